#include "covest/sim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "covest/avar.hpp"
#include "covest/detail.hpp"

namespace covest {

double PiecewiseConstant::at(double q) const {
    if (t.empty()) throw std::logic_error("PiecewiseConstant: empty coefficient");
    auto it = std::upper_bound(t.begin(), t.end(), q);
    if (it == t.begin()) return v.front();
    return v[static_cast<std::size_t>(it - t.begin() - 1)];
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_num(const std::string& s, const std::string& key) {
    double out = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(out))
        throw std::invalid_argument("config: bad number '" + s + "' for key '" +
                                    key + "'");
    return out;
}

PiecewiseConstant parse_coefficient(const std::string& s,
                                    const std::string& key) {
    if (s.find(':') == std::string::npos)
        return PiecewiseConstant(parse_num(s, key));
    std::vector<double> ts, vs;
    std::stringstream ss(s);
    std::string entry;
    while (std::getline(ss, entry, ',')) {
        entry = trim(entry);
        std::size_t colon = entry.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("config: bad grid entry '" + entry +
                                        "' for key '" + key + "'");
        ts.push_back(parse_num(trim(entry.substr(0, colon)), key));
        vs.push_back(parse_num(trim(entry.substr(colon + 1)), key));
    }
    if (ts.empty())
        throw std::invalid_argument("config: empty grid for key '" + key + "'");
    if (ts.front() != 0.0)
        throw std::invalid_argument("config: grid for key '" + key +
                                    "' must start at time 0");
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (!(ts[i] > ts[i - 1]))
            throw std::invalid_argument("config: grid times for key '" + key +
                                        "' must increase");
    return PiecewiseConstant(std::move(ts), std::move(vs));
}

void validate_config(const SimConfig& cfg) {
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
        throw std::invalid_argument("config: horizon must be positive");
    if (cfg.sampling.n < 2)
        throw std::invalid_argument("config: n must be at least 2");
    if (!(cfg.sampling.theta1 > 0.0) || !(cfg.sampling.theta2 > 0.0))
        throw std::invalid_argument("config: theta1 and theta2 must be positive");
    if (cfg.noise.eta2_x < 0.0 || cfg.noise.eta2_y < 0.0)
        throw std::invalid_argument("config: noise variances must be nonnegative");
    if (cfg.noise.decay_alpha < 0.0)
        throw std::invalid_argument("config: decay_alpha must be nonnegative");
    for (double s : cfg.sigma_x.v)
        if (!(s > 0.0))
            throw std::invalid_argument("config: sigma_x values must be positive");
    for (double s : cfg.sigma_y.v)
        if (!(s > 0.0))
            throw std::invalid_argument("config: sigma_y values must be positive");
    for (double r : cfg.rho.v)
        if (!(r >= -1.0) || !(r <= 1.0))
            throw std::invalid_argument("config: rho values must lie in [-1, 1]");
}

}  // namespace

SimConfig parse_sim_config_text(const std::string& text) {
    SimConfig cfg;
    bool have_n = false;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key=value, got '" +
                                        line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key == "T" || key == "horizon") {
            cfg.horizon = parse_num(val, key);
        } else if (key == "sigma_x") {
            cfg.sigma_x = parse_coefficient(val, key);
        } else if (key == "sigma_y") {
            cfg.sigma_y = parse_coefficient(val, key);
        } else if (key == "rho") {
            cfg.rho = parse_coefficient(val, key);
        } else if (key == "mu_x") {
            cfg.mu_x = parse_num(val, key);
        } else if (key == "mu_y") {
            cfg.mu_y = parse_num(val, key);
        } else if (key == "eta2_x") {
            cfg.noise.eta2_x = parse_num(val, key);
        } else if (key == "eta2_y") {
            cfg.noise.eta2_y = parse_num(val, key);
        } else if (key == "decay_alpha") {
            cfg.noise.decay_alpha = parse_num(val, key);
        } else if (key == "noise_law") {
            if (val == "gaussian")
                cfg.noise.law = NoiseSpec::Law::gaussian;
            else if (val == "two_point")
                cfg.noise.law = NoiseSpec::Law::two_point;
            else
                throw std::invalid_argument("config: unknown noise_law '" + val +
                                            "'");
        } else if (key == "sampling") {
            if (val == "equidistant_sync")
                cfg.sampling.kind = SamplingKind::equidistant_sync;
            else if (val == "intermeshed")
                cfg.sampling.kind = SamplingKind::intermeshed;
            else if (val == "poisson")
                cfg.sampling.kind = SamplingKind::poisson;
            else
                throw std::invalid_argument("config: unknown sampling '" + val +
                                            "'");
        } else if (key == "n") {
            double d = parse_num(val, key);
            if (d < 2.0 || d != std::floor(d))
                throw std::invalid_argument("config: n must be an integer >= 2");
            cfg.sampling.n = static_cast<std::size_t>(d);
            have_n = true;
        } else if (key == "theta1") {
            cfg.sampling.theta1 = parse_num(val, key);
        } else if (key == "theta2") {
            cfg.sampling.theta2 = parse_num(val, key);
        } else if (key == "seed") {
            double d = parse_num(val, key);
            if (d < 0.0 || d != std::floor(d))
                throw std::invalid_argument("config: seed must be a nonnegative integer");
            cfg.seed = static_cast<std::uint64_t>(d);
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    if (!have_n) throw std::invalid_argument("config: missing key 'n'");
    validate_config(cfg);
    return cfg;
}

SimConfig parse_sim_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_sim_config_text(buf.str());
}

double Rng::uniform() {
    // 53-bit mantissa offset by half a step: strictly inside (0, 1).
    std::uint64_t x = eng_();
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return gaussian_quantile(uniform()); }

double Rng::exponential(double mean) { return -mean * std::log(uniform()); }

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

Rng rep_rng(std::uint64_t seed, std::uint64_t rep, std::uint64_t stream) {
    std::uint64_t s = splitmix64(seed ^ splitmix64(rep * 0x9E3779B97F4A7C15ULL));
    s = splitmix64(s ^ splitmix64(stream * 0xD1B54A32D192ED03ULL));
    return Rng(s);
}

std::vector<double> sample_poisson_scheme(double theta, std::size_t n_expected,
                                          double horizon, Rng& rng) {
    if (!(theta > 0.0) || n_expected < 2)
        throw std::invalid_argument("sample_poisson_scheme: bad parameters");
    const double mean = theta / static_cast<double>(n_expected);
    std::vector<double> out;
    out.reserve(n_expected + n_expected / 4);
    double t = 0.0;
    for (;;) {
        t += rng.exponential(mean);
        if (t > horizon) break;
        out.push_back(t);
    }
    return out;
}

std::vector<double> sample_times(const SamplingSpec& spec, double horizon,
                                 bool for_y, Rng& rng) {
    const std::size_t n = spec.n;
    std::vector<double> out;
    switch (spec.kind) {
        case SamplingKind::equidistant_sync: {
            out.resize(n + 1);
            for (std::size_t j = 0; j <= n; ++j)
                out[j] = static_cast<double>(j) * horizon /
                         static_cast<double>(n);
            break;
        }
        case SamplingKind::intermeshed: {
            if (!for_y) {
                out.resize(n + 1);
                for (std::size_t j = 0; j <= n; ++j)
                    out[j] = static_cast<double>(j) * horizon /
                             static_cast<double>(n);
            } else {
                out.resize(n);
                for (std::size_t j = 0; j < n; ++j)
                    out[j] = (static_cast<double>(j) + 0.5) * horizon /
                             static_cast<double>(n);
            }
            break;
        }
        case SamplingKind::poisson: {
            out = sample_poisson_scheme(for_y ? spec.theta2 : spec.theta1, n,
                                        horizon, rng);
            break;
        }
    }
    return out;
}

PathMoments integrated_moments(const SimConfig& cfg, double a, double b) {
    PathMoments m;
    if (!(b > a)) return m;
    std::vector<double> cuts;
    cuts.push_back(a);
    for (const auto* coef : {&cfg.sigma_x, &cfg.sigma_y, &cfg.rho})
        for (double t : coef->t)
            if (t > a && t < b) cuts.push_back(t);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        double lo = cuts[i - 1];
        double dt = cuts[i] - lo;
        double sx = cfg.sigma_x.at(lo);
        double sy = cfg.sigma_y.at(lo);
        double r = cfg.rho.at(lo);
        m.vxx += sx * sx * dt;
        m.vyy += sy * sy * dt;
        m.vxy += r * sx * sy * dt;
    }
    return m;
}

double integrated_qcov(const SimConfig& cfg) {
    return integrated_moments(cfg, 0.0, cfg.horizon).vxy;
}

PathPair simulate_paths(const SimConfig& cfg, const std::vector<double>& times_x,
                        const std::vector<double>& times_y, Rng& rng) {
    std::vector<double> u;
    u.reserve(times_x.size() + times_y.size() + 1);
    u.push_back(0.0);
    u.insert(u.end(), times_x.begin(), times_x.end());
    u.insert(u.end(), times_y.begin(), times_y.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());

    PathPair out;
    out.x_values.reserve(times_x.size());
    out.y_values.reserve(times_y.size());
    double cx = 0.0, cy = 0.0;
    std::size_t ix = 0, iy = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (k > 0) {
            double dt = u[k] - u[k - 1];
            PathMoments m = integrated_moments(cfg, u[k - 1], u[k]);
            // Two independent normals per interval; the pair (dX, dY) has the
            // exact integrated covariance via its Cholesky factor.
            double z1 = rng.normal();
            double z2 = rng.normal();
            double a = std::sqrt(m.vxx);
            double dx = a * z1 + cfg.mu_x * dt;
            double dy;
            if (a > 0.0) {
                double bx = m.vxy / a;
                double resid = std::max(m.vyy - bx * bx, 0.0);
                dy = bx * z1 + std::sqrt(resid) * z2 + cfg.mu_y * dt;
            } else {
                dy = std::sqrt(m.vyy) * z2 + cfg.mu_y * dt;
            }
            cx += dx;
            cy += dy;
        }
        while (ix < times_x.size() && times_x[ix] == u[k]) {
            out.x_values.push_back(cx);
            ++ix;
        }
        while (iy < times_y.size() && times_y[iy] == u[k]) {
            out.y_values.push_back(cy);
            ++iy;
        }
    }
    return out;
}

void add_noise(std::vector<double>& values, double eta2,
               std::size_t n_for_decay, double alpha, NoiseSpec::Law law,
               Rng& rng) {
    if (eta2 < 0.0)
        throw std::invalid_argument("add_noise: variance must be nonnegative");
    double eff = eta2;
    if (alpha > 0.0)
        eff *= std::pow(static_cast<double>(n_for_decay), -alpha);
    if (eff == 0.0) return;
    double sd = std::sqrt(eff);
    for (double& v : values) {
        if (law == NoiseSpec::Law::gaussian)
            v += sd * rng.normal();
        else
            v += (rng.uniform() < 0.5) ? -sd : sd;
    }
}

ObservationPair simulate_pair(const SimConfig& cfg, std::uint64_t rep) {
    Rng rx = rep_rng(cfg.seed, rep, 0);
    Rng ry = rep_rng(cfg.seed, rep, 1);
    std::vector<double> tx = sample_times(cfg.sampling, cfg.horizon, false, rx);
    std::vector<double> ty = sample_times(cfg.sampling, cfg.horizon, true, ry);
    if (tx.size() < 2 || ty.size() < 2)
        throw std::runtime_error("simulate_pair: degenerate sampling draw");
    Rng rp = rep_rng(cfg.seed, rep, 2);
    PathPair paths = simulate_paths(cfg, tx, ty, rp);
    Rng rnx = rep_rng(cfg.seed, rep, 3);
    Rng rny = rep_rng(cfg.seed, rep, 4);
    add_noise(paths.x_values, cfg.noise.eta2_x, tx.size(),
              cfg.noise.decay_alpha, cfg.noise.law, rnx);
    add_noise(paths.y_values, cfg.noise.eta2_y, ty.size(),
              cfg.noise.decay_alpha, cfg.noise.law, rny);
    ObservationPair pair;
    pair.x = TickSeries{std::move(tx), std::move(paths.x_values), "x"};
    pair.y = TickSeries{std::move(ty), std::move(paths.y_values), "y"};
    pair.horizon = cfg.horizon;
    return pair;
}

namespace {

struct RepRow {
    bool ok = false;
    double point = 0.0, sub_point = 0.0;
    double avar_total = 0.0, avar_sub_total = 0.0;
    double i1 = 0.0, i2 = 0.0, i3 = 0.0, i4 = 0.0;
    bool covered = false;
    double student = 0.0;
    bool has_student = false;
    double n_sync = 0.0, c_multi = 0.0, m_used = 0.0;
};

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (xs.empty()) return;
    detail::KahanSum acc;
    for (double x : xs) acc.add(x);
    mean = acc.value() / static_cast<double>(xs.size());
    if (xs.size() < 2) return;
    detail::KahanSum sq;
    for (double x : xs) sq.add((x - mean) * (x - mean));
    sd = std::sqrt(sq.value() / static_cast<double>(xs.size() - 1));
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    if (sorted.size() == 1) return sorted[0];
    double pos = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac;
}

// Constant-coefficient equivalents for the closed-form columns: a grid-valued
// config maps to the volatilities with the same integrated moments.
void effective_constants(const SimConfig& cfg, double& sx, double& sy,
                         double& rho) {
    PathMoments m = integrated_moments(cfg, 0.0, cfg.horizon);
    sx = std::sqrt(m.vxx / cfg.horizon);
    sy = std::sqrt(m.vyy / cfg.horizon);
    rho = (sx > 0.0 && sy > 0.0) ? m.vxy / (sx * sy * cfg.horizon) : 0.0;
}

double theory_avar(const SimConfig& cfg, AvarKind kind) {
    double sx, sy, rho;
    effective_constants(cfg, sx, sy, rho);
    double ex = cfg.noise.eta2_x;
    double ey = cfg.noise.eta2_y;
    if (cfg.noise.decay_alpha > 0.0) {
        double scale = std::pow(static_cast<double>(cfg.sampling.n),
                                -cfg.noise.decay_alpha);
        ex *= scale;
        ey *= scale;
    }
    if (!(ex > 0.0) || !(ey > 0.0)) return 0.0;
    const double horizon = cfg.horizon;
    const bool poisson = cfg.sampling.kind == SamplingKind::poisson;
    double g = 1.0;
    if (poisson) {
        double t1 = cfg.sampling.theta1, t2 = cfg.sampling.theta2;
        double num = 2.0 * t1 * t1 * t2 * t2;
        double den = t1 * t1 * t2 * t2 +
                     (t1 * t1 + t2 * t2) * (t1 + t2) * (t1 + t2);
        g = 2.0 * (1.0 - num / den);
    }
    const double dis =
        g * (sx * sy) * (sx * sy) * (1.0 + rho * rho) * horizon;
    if (kind == AvarKind::one_scale) {
        double a0 = 4.0 * ex * ey;
        double d0 = (2.0 / 3.0) * dis;
        double c_star = c_sub_opt(a0, d0);
        return poisson
                   ? poisson_avar_closed_form(cfg.sampling.theta1,
                                              cfg.sampling.theta2, sx, sy, rho,
                                              ex, ey, c_star, horizon,
                                              AvarKind::one_scale, false)
                   : synchronous_avar_closed_form(sx, sy, rho, ex, ey, c_star,
                                                  horizon, AvarKind::one_scale);
    }
    double a0 = 24.0 * ex * ey;
    double b0 = (12.0 / 5.0) * ex * ey +
                (12.0 / 5.0) * (ey * sx * sx * horizon + ex * sy * sy * horizon);
    double d0 = (26.0 / 35.0) * dis;
    double c_star = c_multi_opt(a0, b0, d0);
    return poisson ? poisson_avar_closed_form(
                         cfg.sampling.theta1, cfg.sampling.theta2, sx, sy, rho,
                         ex, ey, c_star, horizon, AvarKind::multiscale, false)
                   : synchronous_avar_closed_form(sx, sy, rho, ex, ey, c_star,
                                                  horizon,
                                                  AvarKind::multiscale);
}

template <typename Fn>
void parallel_reps(std::size_t reps, unsigned threads, Fn&& body) {
    unsigned t = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    t = static_cast<unsigned>(
        std::min<std::size_t>(t, std::max<std::size_t>(reps, 1)));
    if (t <= 1) {
        for (std::size_t r = 0; r < reps; ++r) body(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t r = next.fetch_add(1);
                if (r >= reps) break;
                body(r);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

McSummary run_monte_carlo(const SimConfig& cfg, std::size_t reps,
                          const TuningConfig& tuning, unsigned threads) {
    if (reps == 0) throw std::invalid_argument("run_monte_carlo: reps must be positive");
    McSummary s;
    s.reps = reps;
    s.true_qcov = integrated_qcov(cfg);

    std::vector<RepRow> rows(reps);
    parallel_reps(reps, threads, [&](std::size_t r) {
        RepRow row;
        try {
            ObservationPair pair = simulate_pair(cfg, r);
            EstimateReport rep = estimate_full(pair, tuning);
            row.ok = true;
            row.point = rep.point;
            row.sub_point = rep.sub_point;
            row.avar_total = rep.avar.total;
            row.avar_sub_total = rep.avar_sub.total;
            row.i1 = rep.hist.i1;
            row.i2 = rep.hist.i2;
            row.i3 = rep.hist.i3;
            row.i4 = rep.hist.i4;
            row.covered =
                rep.ci_low <= s.true_qcov && s.true_qcov <= rep.ci_high;
            if (rep.avar.total > 0.0) {
                row.student = rep.rate_scale * (rep.point - s.true_qcov) /
                              std::sqrt(rep.avar.total);
                row.has_student = true;
            }
            row.n_sync = static_cast<double>(rep.n_sync);
            row.c_multi = rep.c_multi;
            row.m_used = static_cast<double>(rep.m_used);
        } catch (const std::exception&) {
            row.ok = false;
        }
        rows[r] = row;
    });

    std::vector<double> pts, subs, avs, avsubs, i1s, i2s, i3s, i4s, students,
        nsyncs, cs, ms;
    std::size_t covered = 0, ok_count = 0;
    for (const RepRow& row : rows) {
        if (!row.ok) continue;
        ++ok_count;
        pts.push_back(row.point);
        subs.push_back(row.sub_point);
        avs.push_back(row.avar_total);
        avsubs.push_back(row.avar_sub_total);
        i1s.push_back(row.i1);
        i2s.push_back(row.i2);
        i3s.push_back(row.i3);
        i4s.push_back(row.i4);
        if (row.has_student) students.push_back(row.student);
        nsyncs.push_back(row.n_sync);
        cs.push_back(row.c_multi);
        ms.push_back(row.m_used);
        if (row.covered) ++covered;
    }
    s.failures = reps - ok_count;
    mean_std(pts, s.mean_multi, s.std_multi);
    mean_std(subs, s.mean_sub, s.std_sub);
    mean_std(avs, s.mean_avar_multi, s.std_avar_multi);
    mean_std(avsubs, s.mean_avar_sub, s.std_avar_sub);
    mean_std(i1s, s.mean_i1, s.std_i1);
    mean_std(i2s, s.mean_i2, s.std_i2);
    mean_std(i3s, s.mean_i3, s.std_i3);
    mean_std(i4s, s.mean_i4, s.std_i4);
    double dummy;
    mean_std(nsyncs, s.mean_n_sync, dummy);
    mean_std(cs, s.mean_c_multi, dummy);
    mean_std(ms, s.mean_m_used, dummy);
    s.coverage = ok_count ? static_cast<double>(covered) /
                                static_cast<double>(ok_count)
                          : 0.0;
    std::sort(students.begin(), students.end());
    s.student_q_low = quantile_sorted(students, 0.025);
    s.student_q_high = quantile_sorted(students, 0.975);
    s.avar_multi_theory = theory_avar(cfg, AvarKind::multiscale);
    s.avar_sub_theory = theory_avar(cfg, AvarKind::one_scale);
    return s;
}

void write_mc_summary_csv(const std::string& path, const McSummary& s) {
    std::ofstream out(path);
    if (!out)
        throw std::invalid_argument("write_mc_summary_csv: cannot open '" +
                                    path + "'");
    out.precision(17);
    out << "quantity,value,std\n";
    out << "reps," << s.reps << ",\n";
    out << "failures," << s.failures << ",\n";
    out << "true_qcov," << s.true_qcov << ",\n";
    out << "est_multi," << s.mean_multi << "," << s.std_multi << "\n";
    out << "est_sub," << s.mean_sub << "," << s.std_sub << "\n";
    out << "avar_multi_hat," << s.mean_avar_multi << "," << s.std_avar_multi
        << "\n";
    out << "avar_sub_hat," << s.mean_avar_sub << "," << s.std_avar_sub << "\n";
    out << "avar_multi_theory," << s.avar_multi_theory << ",\n";
    out << "avar_sub_theory," << s.avar_sub_theory << ",\n";
    out << "i1," << s.mean_i1 << "," << s.std_i1 << "\n";
    out << "i2," << s.mean_i2 << "," << s.std_i2 << "\n";
    out << "i3," << s.mean_i3 << "," << s.std_i3 << "\n";
    out << "i4," << s.mean_i4 << "," << s.std_i4 << "\n";
    out << "coverage," << s.coverage << ",\n";
    out << "student_q_low," << s.student_q_low << ",\n";
    out << "student_q_high," << s.student_q_high << ",\n";
    out << "n_sync," << s.mean_n_sync << ",\n";
    out << "c_multi," << s.mean_c_multi << ",\n";
    out << "m_used," << s.mean_m_used << ",\n";
    if (!out)
        throw std::runtime_error("write_mc_summary_csv: write failed for '" +
                                 path + "'");
}

RateResult rate_check(const std::vector<SimConfig>& family, std::size_t reps,
                      const TuningConfig& tuning, unsigned threads) {
    if (family.size() < 3)
        throw std::invalid_argument("rate_check: need at least three sizes");
    std::size_t n_lo = family.front().sampling.n, n_hi = n_lo;
    for (const SimConfig& cfg : family) {
        n_lo = std::min(n_lo, cfg.sampling.n);
        n_hi = std::max(n_hi, cfg.sampling.n);
    }
    if (n_hi < 10 * n_lo)
        throw std::invalid_argument(
            "rate_check: sizes must span at least a factor of ten");

    RateResult result;
    for (const SimConfig& cfg : family) {
        const double truth = integrated_qcov(cfg);
        std::vector<double> err2(reps, -1.0), nsync(reps, 0.0);
        parallel_reps(reps, threads, [&](std::size_t r) {
            try {
                ObservationPair pair = simulate_pair(cfg, r);
                EstimateReport rep = estimate_full(pair, tuning);
                double e = rep.point - truth;
                err2[r] = e * e;
                nsync[r] = static_cast<double>(rep.n_sync);
            } catch (const std::exception&) {
                err2[r] = -1.0;
            }
        });
        detail::KahanSum se, sn;
        std::size_t ok = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            if (err2[r] < 0.0) continue;
            se.add(err2[r]);
            sn.add(nsync[r]);
            ++ok;
        }
        if (ok == 0)
            throw std::runtime_error("rate_check: all replications failed");
        RatePoint pt;
        pt.n = cfg.sampling.n;
        pt.rmse = std::sqrt(se.value() / static_cast<double>(ok));
        pt.mean_n_sync = sn.value() / static_cast<double>(ok);
        result.points.push_back(pt);
    }

    double mx = 0.0, my = 0.0;
    for (const RatePoint& pt : result.points) {
        mx += std::log(pt.mean_n_sync);
        my += std::log(pt.rmse);
    }
    mx /= static_cast<double>(result.points.size());
    my /= static_cast<double>(result.points.size());
    double sxy = 0.0, sxx = 0.0;
    for (const RatePoint& pt : result.points) {
        double dx = std::log(pt.mean_n_sync) - mx;
        sxy += dx * (std::log(pt.rmse) - my);
        sxx += dx * dx;
    }
    result.slope = sxy / sxx;
    return result;
}

}  // namespace covest
