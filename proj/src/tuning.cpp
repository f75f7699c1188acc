#include "covest/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "covest/detail.hpp"

namespace covest {

double gaussian_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::invalid_argument("gaussian_quantile: p must lie in (0, 1)");
    // Rational approximation in three regimes, then one Halley step against
    // the exact CDF brings the result to ~1e-15 relative accuracy.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
             a[5]) *
            q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r +
             1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
              c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double sqrt2 = 1.4142135623730951;
    const double sqrt_2pi = 2.5066282746310002;
    double e = 0.5 * std::erfc(-x / sqrt2) - p;
    double u = e * sqrt_2pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double c_multi_opt(double a, double b, double d) {
    if (!(a > 0.0) || !(d > 0.0) || b < 0.0)
        throw std::invalid_argument("c_multi_opt: need a > 0, d > 0, b >= 0");
    // c^2 = (root + b) / (2d); the rationalized form avoids cancellation
    // when b dominates the discriminant.
    double root = std::sqrt(b * b + 12.0 * d * a);
    return std::sqrt((root + b) / (2.0 * d));
}

double c_sub_opt(double a, double d) {
    if (!(a > 0.0) || !(d > 0.0))
        throw std::invalid_argument("c_sub_opt: need a > 0, d > 0");
    return std::cbrt(2.0 * a / d);
}

namespace {

// Sparse lag-L variance on the original tick grid: increments between every
// L-th observation.
double sparse_qv(const std::vector<double>& values, int lag) {
    detail::KahanSum acc;
    for (std::size_t j = static_cast<std::size_t>(lag); j < values.size();
         j += static_cast<std::size_t>(lag)) {
        double d = values[j] - values[j - static_cast<std::size_t>(lag)];
        acc.add(d * d);
    }
    return acc.value();
}

}  // namespace

PilotComponents pilot_avars(const ObservationPair& pair, const SyncResult& sync,
                            const TimeFunctionals& fn, int pilot_frequency,
                            bool nonzero_only) {
    const std::size_t n = sync.n_sync;
    const std::size_t L = static_cast<std::size_t>(pilot_frequency);
    if (pilot_frequency < 2)
        throw std::invalid_argument("pilot_avars: pilot frequency must be >= 2");
    if (n < 4 * L)
        throw std::invalid_argument(
            "pilot_avars: need at least 4 * pilot_frequency sampling groups, have " +
            std::to_string(n));

    PilotComponents p;
    p.noise = noise_variances(pair, nonzero_only);
    p.qv_x = sparse_qv(pair.x.values, pilot_frequency);
    p.qv_y = sparse_qv(pair.y.values, pilot_frequency);

    // Sparse discretization estimate: lag-L group increments, the x bracket
    // taken twice (once shifted by two groups) against one y bracket.
    detail::KahanSum dis;
    const auto& vx = pair.x.values;
    const auto& vy = pair.y.values;
    for (std::size_t k = 1; k * L <= n; ++k) {
        std::size_t right = k * L;
        std::size_t left = (k - 1) * L + 1;
        double bx = vx[sync.g_index[right]] - vx[sync.l_index[left]];
        double sum_x = bx * bx;
        if (right + 2 <= n) {
            double bx2 = vx[sync.g_index[right + 2]] - vx[sync.l_index[left + 2]];
            sum_x += bx2 * bx2;
        }
        double by = vy[sync.gamma_index[right]] - vy[sync.lambda_index[left]];
        dis.add(sum_x * by * by);
    }
    p.avar_dis = 0.5 * static_cast<double>(n) * dis.value();

    const double horizon = sync.horizon;
    const double ee = p.noise.eta2_x * p.noise.eta2_y;
    p.a_coeff = (24.0 + 12.0 * (fn.IX_end + fn.IY_end) / horizon) * ee;
    p.b_coeff = (12.0 / 5.0) * ee +
                (12.0 / 5.0) * (p.noise.eta2_y * (1.0 + fn.IY_end / horizon) * p.qv_x +
                                p.noise.eta2_x * (1.0 + fn.IX_end / horizon) * p.qv_y);
    p.d_coeff = p.avar_dis;
    if (!(p.a_coeff > 0.0) || !(p.d_coeff > 0.0))
        throw std::invalid_argument("pilot_avars: degenerate pilot estimates");
    p.c_multi = c_multi_opt(p.a_coeff, p.b_coeff, p.d_coeff);
    // The one-scale discretization coefficient is the same integral with
    // (2/3) in place of (26/35) T.
    const double d_sub = p.avar_dis * (2.0 / 3.0) / ((26.0 / 35.0) * horizon);
    p.c_sub = c_sub_opt(4.0 * ee, d_sub);
    return p;
}

EstimateReport estimate_full(const ObservationPair& pair,
                             const TuningConfig& cfg) {
    EstimateReport rep;
    rep.confidence_level = cfg.confidence_level;
    if (!(cfg.confidence_level > 0.0) || !(cfg.confidence_level < 1.0))
        throw std::invalid_argument("estimate_full: confidence level must lie in (0, 1)");

    rep.mesh = validate(pair);
    SyncResult sync = synchronize(pair);
    rep.n_sync = sync.n_sync;
    const std::size_t n = sync.n_sync;
    const double horizon = sync.horizon;
    std::vector<double> grid{0.0, 0.25 * horizon, 0.5 * horizon,
                             0.75 * horizon, horizon};
    TimeFunctionals fn = time_functionals(sync, grid);
    rep.noise = noise_variances(pair, cfg.nonzero_noise_only);

    const bool hy_only = cfg.m_override.has_value() && *cfg.m_override == 1;
    bool tuned = true;
    try {
        rep.pilot = pilot_avars(pair, sync, fn, cfg.pilot_frequency,
                                cfg.nonzero_noise_only);
    } catch (const std::invalid_argument&) {
        // Without the plain estimate override the pilot stage is mandatory.
        if (!hy_only) throw;
        tuned = false;
    }

    AvarComponents comp;
    comp.eta2_x = rep.noise.eta2_x;
    comp.eta2_y = rep.noise.eta2_y;
    comp.ix_end = fn.IX_end;
    comp.iy_end = fn.IY_end;
    comp.horizon = horizon;
    comp.i_endpoint_over_horizon = cfg.i_endpoint_over_horizon;

    double c_multi = 1.0, c_sub = 1.0;
    if (tuned) {
        std::size_t bins = cfg.bins_override.value_or(static_cast<std::size_t>(
            std::ceil(std::sqrt(rep.pilot.c_multi) *
                      std::pow(static_cast<double>(n), 0.2))));
        bins = std::max<std::size_t>(bins, 1);
        int m_bin = cfg.m_bin_override.value_or(static_cast<int>(
            std::ceil(std::pow(rep.pilot.c_multi, 1.25) *
                      std::pow(static_cast<double>(n), 0.6))));
        m_bin = std::clamp(m_bin, 2,
                           std::max(2, static_cast<int>(n / 3)));
        rep.bins = bins;
        rep.m_bin = m_bin;
        rep.hist = histogram_integrals(pair, sync, fn, bins, m_bin);
        comp.i1 = rep.hist.i1;
        comp.i2 = rep.hist.i2;
        comp.i3 = rep.hist.i3;
        comp.i4 = rep.hist.i4;

        double i_end = (fn.IX_end + fn.IY_end);
        if (cfg.i_endpoint_over_horizon) i_end /= horizon;
        const double ee = comp.eta2_x * comp.eta2_y;
        const double a = (24.0 + 12.0 * i_end) * ee;
        const double b = (12.0 / 5.0) * ee +
                         (12.0 / 5.0) * (comp.eta2_y * (1.0 + comp.i3) +
                                         comp.eta2_x * (1.0 + comp.i4));
        const double d = (26.0 / 35.0) * horizon * (comp.i1 + comp.i2);
        c_multi = (a > 0.0 && d > 0.0) ? c_multi_opt(a, b, d)
                                       : rep.pilot.c_multi;
        const double d_sub = (2.0 / 3.0) * (comp.i1 + comp.i2);
        c_sub = (ee > 0.0 && d_sub > 0.0)
                    ? c_sub_opt(4.0 * ee, d_sub)
                    : rep.pilot.c_sub;
        if (!(c_multi > 0.0)) c_multi = 1.0;
        if (!(c_sub > 0.0)) c_sub = 1.0;
    }
    if (cfg.c_multi_override) c_multi = *cfg.c_multi_override;
    if (cfg.c_sub_override) c_sub = *cfg.c_sub_override;
    rep.c_multi = c_multi;
    rep.c_sub = c_sub;

    int m_used;
    if (cfg.m_override) {
        m_used = *cfg.m_override;
        if (m_used < 1) throw std::invalid_argument("estimate_full: M override must be >= 1");
    } else {
        m_used = static_cast<int>(
            std::ceil(c_multi * std::sqrt(static_cast<double>(n))));
        m_used = std::clamp(m_used, 2, std::max(2, static_cast<int>(n / 3)));
    }
    rep.m_used = m_used;
    if (m_used == 1) {
        rep.point = hayashi_yoshida(pair, sync).value;
    } else {
        if (static_cast<std::size_t>(m_used) > n)
            throw std::invalid_argument("estimate_full: more scales than sampling groups");
        rep.point = multiscale(pair, sync, optimal_weights(m_used)).value;
    }

    std::size_t sub_freq;
    if (cfg.sub_frequency_override) {
        sub_freq = *cfg.sub_frequency_override;
    } else {
        sub_freq = static_cast<std::size_t>(
            std::ceil(c_sub * std::pow(static_cast<double>(n), 2.0 / 3.0)));
    }
    sub_freq = std::clamp<std::size_t>(sub_freq, 1, n);
    rep.sub_frequency = sub_freq;
    rep.sub_point = one_scale(pair, sync, sub_freq).value;

    rep.avar = avar_multiscale(comp, c_multi);
    rep.avar_sub = avar_one_scale(comp, c_sub);

    const double z = gaussian_quantile(0.5 * (1.0 + cfg.confidence_level));
    rep.rate_scale = std::pow(static_cast<double>(n), 0.25);
    double half = z * std::sqrt(std::max(rep.avar.total, 0.0)) / rep.rate_scale;
    rep.ci_low = rep.point - half;
    rep.ci_high = rep.point + half;

    rep.sub_rate_scale = std::pow(static_cast<double>(n), 1.0 / 6.0);
    double sub_half =
        z * std::sqrt(std::max(rep.avar_sub.total, 0.0)) / rep.sub_rate_scale;
    rep.sub_ci_low = rep.sub_point - sub_half;
    rep.sub_ci_high = rep.sub_point + sub_half;
    return rep;
}

}  // namespace covest
