// Standalone acceptance harness. Each numbered criterion prints supporting
// detail and exactly one PASS/FAIL verdict line; the process exit status is
// the number of failed criteria. Every run is seeded, so results are
// reproducible bit for bit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "covest/avar.hpp"
#include "covest/core.hpp"
#include "covest/estimators.hpp"
#include "covest/sim.hpp"
#include "covest/sync.hpp"
#include "covest/tuning.hpp"

using namespace covest;

namespace {

int g_bad = 0;  // running count of unmet checks inside the current criterion

// EXPECT prints one "unmet:" line per failed check; SHOW records supporting
// numbers unconditionally so the log documents what was measured.
#define EXPECT(cond, ...)                         \
    do {                                          \
        if (!(cond)) {                            \
            ++g_bad;                              \
            std::printf("    unmet: " __VA_ARGS__); \
            std::printf("\n");                    \
        }                                         \
    } while (0)

#define SHOW(...)                      \
    do {                               \
        std::printf("    " __VA_ARGS__); \
        std::printf("\n");             \
    } while (0)

template <typename Fn>
int criterion(int index, const char* name, Fn body) {
    std::printf("criterion %d: %s\n", index, name);
    int before = g_bad;
    auto t0 = std::chrono::steady_clock::now();
    body();
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    int bad = g_bad - before;
    std::printf("%s criterion %d: %s (%.1f s)\n", bad ? "FAIL" : "PASS", index,
                name, secs);
    return bad ? 1 : 0;
}

ObservationPair make_pair(std::vector<double> tx, std::vector<double> vx,
                          std::vector<double> ty, std::vector<double> vy,
                          double horizon) {
    ObservationPair pair;
    pair.x = TickSeries{std::move(tx), std::move(vx), "x"};
    pair.y = TickSeries{std::move(ty), std::move(vy), "y"};
    pair.horizon = horizon;
    return pair;
}

// Two hand-checkable schemes exercising every boundary case: repeated right
// endpoints, interior ticks skipped by both group maps, and staggered
// overlaps. All downstream tables are known in closed form.
ObservationPair reference_pair() {
    std::vector<double> tx{0, 1, 2, 4, 5, 6, 8, 10, 12, 14, 16};
    std::vector<double> ty{0, 3, 3.5, 4, 7, 9, 11, 11.5, 13, 15, 16};
    std::vector<double> vx, vy;
    for (std::size_t i = 0; i < tx.size(); ++i)
        vx.push_back(std::sin(1.0 + 0.7 * static_cast<double>(i)) +
                     0.1 * static_cast<double>(i));
    for (std::size_t i = 0; i < ty.size(); ++i)
        vy.push_back(std::cos(0.3 * static_cast<double>(i)) -
                     0.05 * static_cast<double>(i) * static_cast<double>(i));
    return make_pair(tx, vx, ty, vy, 16.0);
}

// ---------------------------------------------------------------- criterion 1

void synchronization_tables() {
    ObservationPair pair = reference_pair();
    SyncResult s = synchronize(pair);

    EXPECT(s.n_sync == 8, "group count %zu, want 8", s.n_sync);
    const std::vector<double> want_T{0, 3, 4, 7, 9, 11, 12, 14, 16};
    const std::vector<double> want_l{0, 0, 2, 4, 6, 8, 10, 12, 14};
    const std::vector<double> want_g{0, 4, 4, 8, 10, 12, 12, 14, 16};
    const std::vector<double> want_lam{0, 0, 3, 4, 7, 9, 11, 11.5, 13};
    const std::vector<double> want_gam{0, 3, 4, 7, 9, 11, 13, 15, 16};
    EXPECT(s.refresh == want_T, "refresh times differ from the hand table");
    EXPECT(s.l == want_l, "left x endpoints differ from the hand table");
    EXPECT(s.g == want_g, "right x endpoints differ from the hand table");
    EXPECT(s.lambda == want_lam, "left y endpoints differ from the hand table");
    EXPECT(s.gamma == want_gam, "right y endpoints differ from the hand table");

    const std::vector<std::size_t> want_li{0, 0, 2, 3, 5, 6, 7, 8, 9};
    const std::vector<std::size_t> want_gi{0, 3, 3, 6, 7, 8, 8, 9, 10};
    const std::vector<std::size_t> want_lami{0, 0, 1, 3, 4, 5, 6, 7, 8};
    const std::vector<std::size_t> want_gami{0, 1, 3, 4, 5, 6, 8, 9, 10};
    EXPECT(s.l_index == want_li, "left x index map differs");
    EXPECT(s.g_index == want_gi, "right x index map differs");
    EXPECT(s.lambda_index == want_lami, "left y index map differs");
    EXPECT(s.gamma_index == want_gami, "right y index map differs");
    EXPECT(s.unused_x == 2 && s.unused_y == 1,
           "unused tick counts (%zu, %zu), want (2, 1)", s.unused_x,
           s.unused_y);

    CaseLabels labels = classify(s, pair);
    const CaseLabel want_x[8] = {CaseLabel::c2, CaseLabel::c1, CaseLabel::c3,
                                 CaseLabel::c3, CaseLabel::c2, CaseLabel::c1,
                                 CaseLabel::c1, CaseLabel::c1};
    const CaseLabel want_y[8] = {CaseLabel::c1, CaseLabel::c1, CaseLabel::c1,
                                 CaseLabel::c1, CaseLabel::c1, CaseLabel::c3,
                                 CaseLabel::c4, CaseLabel::c1};
    for (std::size_t j = 1; j <= 8; ++j) {
        EXPECT(labels.for_x[j] == want_x[j - 1],
               "x case at group %zu is %d, want %d", j,
               static_cast<int>(labels.for_x[j]),
               static_cast<int>(want_x[j - 1]));
        EXPECT(labels.for_y[j] == want_y[j - 1],
               "y case at group %zu is %d, want %d", j,
               static_cast<int>(labels.for_y[j]),
               static_cast<int>(want_y[j - 1]));
    }
    SHOW("group tables and boundary-case labels verified exactly");

    // The group-sum form and the quadratic overlap double sum are two
    // evaluations of the same estimator and must agree on any scheme.
    const double tol = 1e-12;
    std::mt19937_64 eng(20260822u);
    std::uniform_int_distribution<int> count(2, 50);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    auto draw_times = [&](int want) {
        std::vector<double> t(static_cast<std::size_t>(want));
        for (double& v : t) v = u(eng);
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        return t;
    };
    auto walk = [&](std::size_t n) {
        std::vector<double> v(n);
        double acc = 0.0;
        for (double& w : v) w = (acc += 0.3 * z(eng));
        return v;
    };
    int done = 0, attempts = 0, violations = 0;
    double worst = 0.0;
    while (done < 1000 && attempts < 4000) {
        ++attempts;
        std::vector<double> tx = draw_times(count(eng));
        std::vector<double> ty = draw_times(count(eng));
        if (tx.size() < 2 || ty.size() < 2) continue;
        ObservationPair p =
            make_pair(tx, walk(tx.size()), ty, walk(ty.size()), 1.0);
        SyncResult sr;
        try {
            sr = synchronize(p);
        } catch (const std::invalid_argument&) {
            continue;
        }
        double gap =
            std::abs(hayashi_yoshida(p, sr).value - hayashi_yoshida_double_sum(p));
        worst = std::max(worst, gap);
        if (gap > tol) ++violations;
        ++done;
    }
    EXPECT(done == 1000, "only %d comparable random schemes", done);
    EXPECT(violations == 0, "%d schemes broke the overlap identity", violations);
    SHOW("overlap identity on %d schemes, worst gap %.3e (tol %.0e)", done,
         worst, tol);
}

// ---------------------------------------------------------------- criterion 2

void weight_constants() {
    // Condition checks: the weights sum to one and their reciprocal-scaled
    // sum vanishes, for every scale count up to 1000.
    const double cond_tol = 1e-12;
    double worst_sum = 0.0, worst_recip = 0.0;
    for (int m = 2; m <= 1000; ++m) {
        WeightVector w = optimal_weights(m);
        double a = 0.0, b = 0.0;
        for (int i = 1; i <= m; ++i) {
            a += w.alpha[static_cast<std::size_t>(i - 1)];
            b += w.alpha[static_cast<std::size_t>(i - 1)] / i;
        }
        worst_sum = std::max(worst_sum, std::abs(a - 1.0));
        worst_recip = std::max(worst_recip, std::abs(b));
    }
    EXPECT(worst_sum <= cond_tol, "normalization off by %.3e", worst_sum);
    EXPECT(worst_recip <= cond_tol, "noise cancellation off by %.3e",
           worst_recip);
    SHOW("conditions over M = 2..1000: worst %.3e and %.3e (tol %.0e)",
         worst_sum, worst_recip, cond_tol);

    // Limiting constants at M = 1000. The three quadratic forms drive the
    // noise and discretization coefficients of the variance formulas; their
    // continuum limits are 6/5, 6/5, and 13/35.
    const int M = 1000;
    WeightVector w = optimal_weights(M);
    const std::vector<double>& al = w.alpha;

    std::vector<double> tail(static_cast<std::size_t>(M) + 2, 0.0);
    for (int i = M; i >= 1; --i)
        tail[static_cast<std::size_t>(i)] =
            tail[static_cast<std::size_t>(i) + 1] +
            al[static_cast<std::size_t>(i - 1)] / i;
    double tail_form = 0.0;
    for (int j = 1; j <= M; ++j) {
        double t = tail[static_cast<std::size_t>(j) + 1];
        tail_form += t * t;
    }
    tail_form *= M;

    double min_form = 0.0;
    for (int i = 1; i <= M; ++i)
        for (int k = 1; k <= M; ++k)
            min_form += al[static_cast<std::size_t>(i - 1)] *
                        al[static_cast<std::size_t>(k - 1)] /
                        (static_cast<double>(i) * k) * std::min(i, k);
    min_form *= M;

    double dis_form = 0.0;
    for (int k = 1; k <= M; ++k)
        for (int l = 1; l <= M; ++l) {
            int lo = std::min(l, k), hi = std::max(l, k);
            dis_form += al[static_cast<std::size_t>(k - 1)] *
                        al[static_cast<std::size_t>(l - 1)] *
                        (static_cast<double>(lo) / (6.0 * M)) *
                        (3.0 - static_cast<double>(lo) / hi);
        }

    const double rel = 0.01;
    EXPECT(std::abs(tail_form - 1.2) <= rel * 1.2,
           "tail quadratic form %.6f, want 1.2 within 1%%", tail_form);
    EXPECT(std::abs(min_form - 1.2) <= rel * 1.2,
           "minimum-weighted form %.6f, want 1.2 within 1%%", min_form);
    EXPECT(std::abs(dis_form - 13.0 / 35.0) <= rel * (13.0 / 35.0),
           "discretization form %.6f, want %.6f within 1%%", dis_form,
           13.0 / 35.0);
    SHOW("limit constants at M = %d: %.6f, %.6f (want 1.2), %.6f (want %.6f)",
         M, tail_form, min_form, dis_form, 13.0 / 35.0);
}

// ---------------------------------------------------------------- criterion 3

void tuning_identities() {
    // The tuned frequency constant is the positive root of the quartic
    // d c^4 - b c^2 - 3a; the sparse constant zeroes the derivative of
    // a/c^2 + c d. Coefficients are drawn log-uniformly from [0.01, 100].
    const double quartic_tol = 1e-9;
    const double stationary_tol = 1e-12;
    std::mt19937_64 eng(5551u);
    std::uniform_real_distribution<double> lg(-2.0, 2.0);
    double worst_quartic = 0.0, worst_stationary = 0.0;
    for (int t = 0; t < 10000; ++t) {
        double a = std::pow(10.0, lg(eng));
        double b = std::pow(10.0, lg(eng));
        double d = std::pow(10.0, lg(eng));
        double c = c_multi_opt(a, b, d);
        double u = c * c;
        worst_quartic =
            std::max(worst_quartic, std::abs(u * (d * u - b) - 3.0 * a));
        double cs = c_sub_opt(a, d);
        worst_stationary =
            std::max(worst_stationary, std::abs(d - 2.0 * a / (cs * cs * cs)));
    }
    EXPECT(worst_quartic < quartic_tol, "worst quartic residual %.3e",
           worst_quartic);
    EXPECT(worst_stationary < stationary_tol, "worst stationarity residual %.3e",
           worst_stationary);
    SHOW("10000 triples: quartic residual %.3e (tol %.0e), stationarity %.3e "
         "(tol %.0e)",
         worst_quartic, quartic_tol, worst_stationary, stationary_tol);
}

// ---------------------------------------------------------------- criterion 4

// Intermeshed pair engineered so the quarter ratio between the interaction
// sums is exact term by term: x starts 0, 7h/4 then continues on the h grid,
// y sits at half-integer multiples of h, and the opening gaps contribute
// mass in the same 4:1 ratio as every interior group. A denser staggered
// tail beyond t = 1 tops the group count up to exactly 10^4, and the
// horizon is set to the accumulated mass so both normalized sums hit their
// limits at t = 1 up to rounding alone.
ObservationPair quarter_ratio_pair(std::size_t tail_y) {
    const double h = 1.0 / 9000.0;
    const double tail_gap = 1e-4;
    const std::size_t groups = 10000;
    const double mass = h * h * (1.5 + 8997.0);
    const double horizon = static_cast<double>(groups) * mass;

    std::vector<double> tx{0.0, 1.75 * h};
    for (std::size_t k = 2; k <= 9000; ++k)
        tx.push_back(static_cast<double>(k) * h);
    std::vector<double> ty;
    for (std::size_t k = 1; k <= 8999; ++k)
        ty.push_back((static_cast<double>(k) + 0.5) * h);
    for (std::size_t j = 1; j <= tail_y + 2; ++j)
        tx.push_back(1.0 + static_cast<double>(j) * tail_gap);
    for (std::size_t j = 0; j < tail_y; ++j)
        ty.push_back(1.0 + (static_cast<double>(j) + 0.5) * tail_gap);

    std::vector<double> vx(tx.size(), 0.0), vy(ty.size(), 0.0);
    return make_pair(std::move(tx), std::move(vx), std::move(ty),
                     std::move(vy), horizon);
}

void functional_limits() {
    // Equidistant joint grid: the quadratic refresh sum tracks the identity.
    {
        const std::size_t n = 1000;
        std::vector<double> t(n + 1), zeros(n + 1, 0.0);
        for (std::size_t j = 0; j <= n; ++j)
            t[j] = static_cast<double>(j) / static_cast<double>(n);
        ObservationPair pair = make_pair(t, zeros, t, zeros, 1.0);
        SyncResult sync = synchronize(pair);
        TimeFunctionals fn = time_functionals(sync, {});
        double worst = 0.0;
        for (std::size_t j = 0; j <= 4 * n; ++j) {
            double q = static_cast<double>(j) / static_cast<double>(4 * n);
            worst = std::max(worst, std::abs(fn.G(q) - q));
        }
        double tol = 2.0 / static_cast<double>(sync.n_sync);
        EXPECT(worst <= tol, "equidistant deviation %.3e above 2/N = %.3e",
               worst, tol);
        SHOW("equidistant grid: N = %zu, max |G(t) - t| = %.3e (tol %.3e)",
             sync.n_sync, worst, tol);
    }

    // Staggered-grid interaction sums at their exact-ratio design point.
    {
        const std::size_t groups = 10000;
        std::size_t tail_y = 1002;
        ObservationPair pair;
        SyncResult sync;
        for (int iter = 0; iter < 8; ++iter) {
            pair = quarter_ratio_pair(tail_y);
            sync = synchronize(pair);
            if (sync.n_sync == groups) break;
            tail_y += groups - sync.n_sync;  // one tail tick per group
        }
        EXPECT(sync.n_sync == groups, "group count %zu, want %zu", sync.n_sync,
               groups);
        TimeFunctionals fn = time_functionals(sync, {1.0});
        const double tol = 1e-6;
        EXPECT(std::abs(fn.F_grid[0] - 1.0) <= tol,
               "first interaction sum %.9f, want 1 within %.0e", fn.F_grid[0],
               tol);
        EXPECT(std::abs(fn.H_grid[0] - 0.25) <= tol,
               "second interaction sum %.9f, want 0.25 within %.0e",
               fn.H_grid[0], tol);
        SHOW("staggered fixture: N = %zu, F(1) = %.9f, H(1) = %.9f (tol %.0e)",
             sync.n_sync, fn.F_grid[0], fn.H_grid[0], tol);
    }

    // Exponential-gap sampling at equal intensities: the repeated-endpoint
    // frequency converges to 1/4.
    {
        Rng rx = rep_rng(20260822u, 0, 0);
        Rng ry = rep_rng(20260822u, 0, 1);
        std::vector<double> tx = sample_poisson_scheme(1.0, 30000, 1.0, rx);
        std::vector<double> ty = sample_poisson_scheme(1.0, 30000, 1.0, ry);
        std::vector<double> vx(tx.size(), 0.0), vy(ty.size(), 0.0);
        ObservationPair pair =
            make_pair(std::move(tx), std::move(vx), std::move(ty),
                      std::move(vy), 1.0);
        SyncResult sync = synchronize(pair);
        TimeFunctionals fn = time_functionals(sync, {});
        const double tol = 0.02;
        EXPECT(std::abs(fn.IX_end - 0.25) <= tol,
               "repeated-endpoint frequency %.4f, want 0.25 within %.2f",
               fn.IX_end, tol);
        SHOW("exponential gaps: N = %zu, IX(1) = %.4f, IY(1) = %.4f "
             "(want 0.25 +/- %.2f)",
             sync.n_sync, fn.IX_end, fn.IY_end, tol);
    }
}

// ------------------------------------------------------- shared simulation

SimConfig desk_config() {
    SimConfig cfg;
    cfg.horizon = 1.0;
    cfg.sigma_x = PiecewiseConstant(1.0);
    cfg.sigma_y = PiecewiseConstant(1.0);
    cfg.rho = PiecewiseConstant(0.5);
    cfg.noise.eta2_x = 1e-3;
    cfg.noise.eta2_y = 1e-3;
    cfg.noise.law = NoiseSpec::Law::gaussian;
    cfg.sampling.kind = SamplingKind::poisson;
    cfg.sampling.n = 30000;
    cfg.sampling.theta1 = 1.0;
    cfg.sampling.theta2 = 1.0;
    cfg.seed = 20260822u;
    return cfg;
}

// ---------------------------------------------------------------- criterion 5

void simulation_moments(const McSummary& mc) {
    EXPECT(mc.reps - mc.failures >= 300, "only %zu usable replications",
           mc.reps - mc.failures);
    SHOW("replications %zu, failures %zu", mc.reps, mc.failures);

    EXPECT(std::abs(mc.mean_multi - 0.5) <= 0.01,
           "combined-scale mean %.4f, want 0.5 within 0.01", mc.mean_multi);
    EXPECT(mc.std_multi >= 0.75 * 0.038 && mc.std_multi <= 1.25 * 0.038,
           "combined-scale std %.4f, want 0.038 within 25%%", mc.std_multi);
    EXPECT(mc.mean_avar_multi >= 0.75 * 0.246 &&
               mc.mean_avar_multi <= 1.25 * 0.246,
           "estimated variance mean %.4f, want 0.246 within 25%%",
           mc.mean_avar_multi);
    EXPECT(mc.std_sub >= 0.75 * 0.042 && mc.std_sub <= 1.25 * 0.042,
           "sparse-scale std %.4f, want 0.042 within 25%%", mc.std_sub);
    SHOW("means: estimate %.4f (truth 0.5), variance %.4f; stds %.4f / %.4f",
         mc.mean_multi, mc.mean_avar_multi, mc.std_multi, mc.std_sub);

    // Closed-form targets at the design point, each evaluated at its own
    // optimal frequency constant.
    const double ex = 1e-3, ey = 1e-3, rho = 0.5, horizon = 1.0;
    const double gap = 14.0 / 9.0;  // equal-intensity exponential-gap factor
    const double dis = gap * (1.0 + rho * rho) * horizon;
    double a0 = 24.0 * ex * ey;
    double b0 = (12.0 / 5.0) * ex * ey + (12.0 / 5.0) * (ey + ex);
    double d0 = (26.0 / 35.0) * dis;
    double c_star = c_multi_opt(a0, b0, d0);
    double closed_multi =
        poisson_avar_closed_form(1.0, 1.0, 1.0, 1.0, rho, ex, ey, c_star,
                                 horizon, AvarKind::multiscale, false);
    double cs_star = c_sub_opt(4.0 * ex * ey, (2.0 / 3.0) * dis);
    double closed_sub =
        poisson_avar_closed_form(1.0, 1.0, 1.0, 1.0, rho, ex, ey, cs_star,
                                 horizon, AvarKind::one_scale, false);
    EXPECT(std::abs(closed_multi / 0.2159 - 1.0) <= 0.005,
           "closed-form variance %.6f, want 0.2159 within 0.5%%", closed_multi);
    EXPECT(std::abs(closed_sub / 0.0357 - 1.0) <= 0.005,
           "closed-form sparse variance %.6f, want 0.0357 within 0.5%%",
           closed_sub);
    SHOW("closed forms: %.6f at c = %.6f (want 0.2159), %.6f at c = %.6f "
         "(want 0.0357)",
         closed_multi, c_star, closed_sub, cs_star);
}

// ---------------------------------------------------------------- criterion 6

void studentized_errors(const McSummary& mc) {
    EXPECT(mc.reps - mc.failures >= 500, "only %zu usable replications",
           mc.reps - mc.failures);
    EXPECT(mc.coverage >= 0.90 && mc.coverage <= 0.99,
           "interval coverage %.4f outside [0.90, 0.99]", mc.coverage);
    const double z = 1.96, tol = 0.15;
    EXPECT(std::abs(mc.student_q_low + z) <= tol,
           "lower studentized quantile %.3f, want %.2f within %.2f",
           mc.student_q_low, -z, tol);
    EXPECT(std::abs(mc.student_q_high - z) <= tol,
           "upper studentized quantile %.3f, want %.2f within %.2f",
           mc.student_q_high, z, tol);
    SHOW("coverage %.4f, studentized quantiles %.3f / %.3f (want -+%.2f "
         "within %.2f)",
         mc.coverage, mc.student_q_low, mc.student_q_high, z, tol);
}

// ---------------------------------------------------------------- criterion 7

void decay_exponents() {
    const std::vector<std::size_t> sizes{2000, 8000, 32000};
    auto family = [&](double eta2, double alpha, std::uint64_t base) {
        std::vector<SimConfig> fam;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            SimConfig cfg = desk_config();
            cfg.noise.eta2_x = eta2;
            cfg.noise.eta2_y = eta2;
            cfg.noise.decay_alpha = alpha;
            cfg.sampling.n = sizes[i];
            cfg.seed = base + i;
            fam.push_back(cfg);
        }
        return fam;
    };
    auto report = [](const char* label, const RateResult& r) {
        for (const RatePoint& p : r.points)
            SHOW("%s: n = %zu, mean groups %.0f, rmse %.5f", label, p.n,
                 p.mean_n_sync, p.rmse);
        SHOW("%s: fitted slope %.4f", label, r.slope);
    };
    const std::size_t reps = 150;

    RateResult flat = rate_check(family(1e-3, 0.0, 910), reps, {}, 0);
    report("constant noise", flat);
    EXPECT(std::abs(flat.slope + 0.25) <= 0.08,
           "constant-noise slope %.4f, want -0.25 within 0.08", flat.slope);

    RateResult shrinking = rate_check(family(0.05, 0.5, 920), reps, {}, 0);
    report("shrinking noise", shrinking);
    EXPECT(std::abs(shrinking.slope + 0.375) <= 0.10,
           "shrinking-noise slope %.4f, want -0.375 within 0.10",
           shrinking.slope);

    TuningConfig plain;
    plain.m_override = 1;
    RateResult clean = rate_check(family(0.0, 0.0, 930), reps, plain, 0);
    report("noise-free single scale", clean);
    EXPECT(std::abs(clean.slope + 0.5) <= 0.08,
           "noise-free slope %.4f, want -0.5 within 0.08", clean.slope);
}

// ---------------------------------------------------------------- criterion 8

void noise_recovery_and_scaling() {
    // Pure-noise replications: the increment-based estimate is unbiased for
    // the noise variance.
    const std::size_t n = 10000;
    const double eta2 = 1e-3;
    const std::size_t reps = 500;
    std::vector<double> times(n);
    for (std::size_t j = 0; j < n; ++j)
        times[j] = static_cast<double>(j) / static_cast<double>(n - 1);
    std::vector<double> est_x, est_y;
    est_x.reserve(reps);
    est_y.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        Rng rx = rep_rng(424242u, r, 3);
        Rng ry = rep_rng(424242u, r, 4);
        std::vector<double> vx(n, 0.0), vy(n, 0.0);
        add_noise(vx, eta2, n, 0.0, NoiseSpec::Law::gaussian, rx);
        add_noise(vy, eta2, n, 0.0, NoiseSpec::Law::gaussian, ry);
        ObservationPair pair = make_pair(times, vx, times, vy, 1.0);
        NoiseVariances nv = noise_variances(pair);
        est_x.push_back(nv.eta2_x);
        est_y.push_back(nv.eta2_y);
    }
    auto mean_se = [&](const std::vector<double>& v, double& mean, double& se) {
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size() - 1);
        se = std::sqrt(var / static_cast<double>(v.size()));
    };
    double mx, sx, my, sy;
    mean_se(est_x, mx, sx);
    mean_se(est_y, my, sy);
    EXPECT(std::abs(mx - eta2) <= 3.0 * sx,
           "x noise mean %.6e is %.2f standard errors from %.6e", mx,
           std::abs(mx - eta2) / sx, eta2);
    EXPECT(std::abs(my - eta2) <= 3.0 * sy,
           "y noise mean %.6e is %.2f standard errors from %.6e", my,
           std::abs(my - eta2) / sy, eta2);
    SHOW("pure noise over %zu replications: means %.6e / %.6e, targets %.6e, "
         "z-scores %.2f / %.2f",
         reps, mx, my, eta2, (mx - eta2) / sx, (my - eta2) / sy);

    // Scaling both value series by a power of two multiplies the variance
    // estimates by s^2 and the histogram integrals by s^4 (squared ratios)
    // or s^2 (plain ratios), exactly in floating point.
    ObservationPair pair = reference_pair();
    SyncResult sync = synchronize(pair);
    TimeFunctionals fn = time_functionals(sync, {});
    HistogramIntegrals base = histogram_integrals(pair, sync, fn, 3, 2);

    const double s = 4.0, s2 = s * s, s4 = s2 * s2;
    ObservationPair scaled = pair;
    for (double& v : scaled.x.values) v *= s;
    for (double& v : scaled.y.values) v *= s;
    SyncResult sync2 = synchronize(scaled);
    TimeFunctionals fn2 = time_functionals(sync2, {});
    HistogramIntegrals big = histogram_integrals(scaled, sync2, fn2, 3, 2);

    EXPECT(big.i1 == s4 * base.i1, "squared-ratio integral broke s^4 scaling");
    EXPECT(big.i2 == s4 * base.i2,
           "product-ratio integral broke s^4 scaling");
    EXPECT(big.i3 == s2 * base.i3, "first endpoint integral broke s^2 scaling");
    EXPECT(big.i4 == s2 * base.i4,
           "second endpoint integral broke s^2 scaling");
    EXPECT(big.merged_g == base.merged_g && big.merged_ix == base.merged_ix &&
               big.merged_iy == base.merged_iy,
           "bin merging changed under value scaling");

    NoiseVariances nv1 = noise_variances(pair);
    NoiseVariances nv2 = noise_variances(scaled);
    EXPECT(nv2.eta2_x == s2 * nv1.eta2_x &&
               nv2.eta2_y == s2 * nv1.eta2_y,
           "noise variances broke s^2 scaling");
    SHOW("value scaling by %g: integrals and noise variances scale exactly", s);
}

}  // namespace

int main() {
    int failed = 0;
    failed += criterion(1,
                        "synchronization tables, boundary cases, and the "
                        "pairwise overlap identity",
                        synchronization_tables);
    failed += criterion(2, "scale weight conditions and limiting constants",
                        weight_constants);
    failed += criterion(3, "frequency tuning optimality identities",
                        tuning_identities);
    failed += criterion(4, "sampling time functionals approach their limits",
                        functional_limits);

    std::printf("shared simulation: 1500 replications, exponential-gap "
                "sampling, expected tick count 30000\n");
    auto t0 = std::chrono::steady_clock::now();
    McSummary mc = run_monte_carlo(desk_config(), 1500, {}, 0);
    std::printf("shared simulation finished in %.1f s\n",
                std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count());

    failed += criterion(5, "simulation moments match the variance formulas",
                        [&] { simulation_moments(mc); });
    failed += criterion(6, "studentized errors give honest interval coverage",
                        [&] { studentized_errors(mc); });
    failed += criterion(7, "error decay exponents across sample sizes",
                        decay_exponents);
    failed += criterion(8, "noise variance recovery and exact scaling "
                           "invariants",
                        noise_recovery_and_scaling);

    std::printf("%d of 8 criteria passed\n", 8 - failed);
    return failed;
}
