#include "covest/sync.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "covest/detail.hpp"

namespace covest {

double StepFunction::operator()(double q) const {
    auto it = std::upper_bound(t.begin(), t.end(), q);
    if (it == t.begin()) return 0.0;
    return v[static_cast<std::size_t>(it - t.begin()) - 1];
}

namespace {

// First index with ticks[i] >= q, or ticks.size().
std::size_t first_at_or_after(const std::vector<double>& ticks, double q) {
    return static_cast<std::size_t>(
        std::lower_bound(ticks.begin(), ticks.end(), q) - ticks.begin());
}

// First index with ticks[i] > q, or ticks.size().
std::size_t first_after(const std::vector<double>& ticks, double q) {
    return static_cast<std::size_t>(
        std::upper_bound(ticks.begin(), ticks.end(), q) - ticks.begin());
}

}  // namespace

SyncResult synchronize(const ObservationPair& pair) {
    const std::vector<double>& tx = pair.x.times;
    const std::vector<double>& ty = pair.y.times;
    if (tx.size() < 2 || ty.size() < 2)
        throw std::invalid_argument("insufficient overlap: need at least 2 ticks per series");

    SyncResult r;
    r.horizon = pair.horizon;
    r.x_ticks = tx.size();
    r.y_ticks = ty.size();

    auto push = [&r, &tx, &ty](double refresh, std::size_t ig, std::size_t il,
                               std::size_t igam, std::size_t ilam) {
        r.refresh.push_back(refresh);
        r.g.push_back(tx[ig]);
        r.g_index.push_back(ig);
        r.l.push_back(tx[il]);
        r.l_index.push_back(il);
        r.gamma.push_back(ty[igam]);
        r.gamma_index.push_back(igam);
        r.lambda.push_back(ty[ilam]);
        r.lambda_index.push_back(ilam);
    };

    // Group 0 anchors both schemes at their first ticks.
    double t0 = std::max(tx.front(), ty.front());
    std::size_t ig = first_at_or_after(tx, t0);
    std::size_t igam = first_at_or_after(ty, t0);
    if (ig == tx.size() || igam == ty.size())
        throw std::invalid_argument("insufficient overlap: schemes do not intersect");
    push(t0, ig, 0, igam, 0);

    while (true) {
        double prev = r.refresh.back();
        std::size_t ia = first_after(tx, prev);
        std::size_t ib = first_after(ty, prev);
        if (ia == tx.size() || ib == ty.size()) break;
        double next = std::max(tx[ia], ty[ib]);
        // Left endpoints look back to the previous refresh time; both exist
        // because the first ticks are at or before it.
        std::size_t il = ia - 1;
        std::size_t ilam = ib - 1;
        std::size_t jg = first_at_or_after(tx, next);
        std::size_t jgam = first_at_or_after(ty, next);
        bool final_group = false;
        if (jg == tx.size()) {  // only the non-driving side can run out
            jg = tx.size() - 1;
            final_group = true;
        }
        if (jgam == ty.size()) {
            jgam = ty.size() - 1;
            final_group = true;
        }
        push(next, jg, il, jgam, ilam);
        if (final_group) break;
    }

    r.n_sync = r.refresh.size() - 1;
    if (r.n_sync < 1)
        throw std::invalid_argument("insufficient overlap: fewer than 2 sampling groups");

    std::vector<char> used_x(tx.size(), 0), used_y(ty.size(), 0);
    for (std::size_t i : r.g_index) used_x[i] = 1;
    for (std::size_t i : r.l_index) used_x[i] = 1;
    for (std::size_t i : r.gamma_index) used_y[i] = 1;
    for (std::size_t i : r.lambda_index) used_y[i] = 1;
    r.unused_x = static_cast<std::size_t>(
        std::count(used_x.begin(), used_x.end(), 0));
    r.unused_y = static_cast<std::size_t>(
        std::count(used_y.begin(), used_y.end(), 0));
    return r;
}

CaseLabels classify(const SyncResult& sync, const ObservationPair& pair) {
    const std::vector<double>& tx = pair.x.times;
    const std::vector<double>& ty = pair.y.times;
    std::size_t count = sync.n_sync + 1;
    CaseLabels labels;
    labels.for_x.assign(count, CaseLabel::unclassified);
    labels.for_y.assign(count, CaseLabel::unclassified);

    // One scheme's right endpoint against the other's; "+" neighbors are
    // the strictly-next ticks of the original schemes.
    auto decide = [](double own, double other, const double* own_next,
                     const double* other_next) {
        if (own <= other) return CaseLabel::c1;
        if (other_next == nullptr) return CaseLabel::unclassified;
        if (own >= *other_next) return CaseLabel::c2;
        if (own_next == nullptr) return CaseLabel::unclassified;
        return (*own_next > *other_next) ? CaseLabel::c3 : CaseLabel::c4;
    };

    for (std::size_t j = 1; j < count; ++j) {
        std::size_t xg = sync.g_index[j];
        std::size_t yg = sync.gamma_index[j];
        const double* x_next = (xg + 1 < tx.size()) ? &tx[xg + 1] : nullptr;
        const double* y_next = (yg + 1 < ty.size()) ? &ty[yg + 1] : nullptr;
        labels.for_x[j] = decide(sync.g[j], sync.gamma[j], x_next, y_next);
        labels.for_y[j] = decide(sync.gamma[j], sync.g[j], y_next, x_next);
    }
    return labels;
}

namespace {

StepFunction build_step(std::map<double, double>& jumps, double domain_end) {
    StepFunction f;
    f.domain_end = domain_end;
    f.t.reserve(jumps.size());
    f.v.reserve(jumps.size());
    detail::KahanSum acc;
    for (const auto& [time, inc] : jumps) {
        acc.add(inc);
        f.t.push_back(time);
        f.v.push_back(acc.value());
    }
    return f;
}

}  // namespace

TimeFunctionals time_functionals(const SyncResult& sync,
                                 const std::vector<double>& grid) {
    const std::size_t n = sync.n_sync;
    const double horizon = sync.horizon;
    const double scale = static_cast<double>(n) / horizon;
    const auto& T = sync.refresh;

    std::map<double, double> jg, jf, jh, jix, jiy;
    for (std::size_t i = 1; i <= n; ++i) {
        double dt = T[i] - T[i - 1];
        jg[T[i]] += scale * dt * dt;
    }
    for (std::size_t i = 0; i + 1 <= n; ++i) {
        double dt_next = T[i + 1] - T[i];
        double f_term = (T[i] - sync.lambda[i]) * (sync.g[i] - T[i]) +
                        (T[i] - sync.l[i]) * (sync.gamma[i] - T[i]) +
                        dt_next * (T[i] - sync.l[i + 1]) +
                        dt_next * (T[i] - sync.lambda[i + 1]);
        double h_term = (T[i] - sync.l[i + 1]) * (sync.g[i] - T[i]) +
                        (T[i] - sync.lambda[i + 1]) * (sync.gamma[i] - T[i]);
        jf[T[i + 1]] += scale * f_term;
        jh[T[i + 1]] += scale * h_term;
    }
    const double unit = 1.0 / static_cast<double>(n);
    for (std::size_t j = 1; j <= n; ++j) {
        if (sync.g_index[j] == sync.g_index[j - 1]) jix[sync.g[j]] += unit;
        if (sync.gamma_index[j] == sync.gamma_index[j - 1])
            jiy[sync.gamma[j]] += unit;
    }

    TimeFunctionals out;
    out.G = build_step(jg, horizon);
    out.F = build_step(jf, horizon);
    out.H = build_step(jh, horizon);
    out.IX = build_step(jix, horizon);
    out.IY = build_step(jiy, horizon);
    out.G_end = out.G.t.empty() ? 0.0 : out.G.v.back();
    out.IX_end = out.IX.t.empty() ? 0.0 : out.IX.v.back();
    out.IY_end = out.IY.t.empty() ? 0.0 : out.IY.v.back();

    out.grid = grid;
    out.G_grid.reserve(grid.size());
    out.F_grid.reserve(grid.size());
    out.H_grid.reserve(grid.size());
    out.IX_grid.reserve(grid.size());
    out.IY_grid.reserve(grid.size());
    for (double q : grid) {
        if (q < 0.0 || q > horizon * (1.0 + 1e-12))
            throw std::invalid_argument("query grid leaves [0, horizon]");
        out.G_grid.push_back(out.G(q));
        out.F_grid.push_back(out.F(q));
        out.H_grid.push_back(out.H(q));
        out.IX_grid.push_back(out.IX(q));
        out.IY_grid.push_back(out.IY(q));
    }
    return out;
}

double empirical_derivative(const StepFunction& f, double t, double window) {
    if (!(window > 0.0))
        throw std::invalid_argument("window must be positive");
    double slack = 1e-12 * std::max(1.0, std::abs(f.domain_end));
    if (t < -slack || t + window > f.domain_end + slack)
        throw std::invalid_argument("window leaves the function domain");
    double hi = std::min(t + window, f.domain_end);
    return (f(hi) - f(t)) / window;
}

}  // namespace covest
