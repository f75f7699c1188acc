#include "covest/estimators.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "covest/detail.hpp"

namespace covest {

WeightVector optimal_weights(int m_scale) {
    if (m_scale < 2)
        throw std::invalid_argument(
            "optimal_weights: need at least 2 scales, got " +
            std::to_string(m_scale));
    const double m = static_cast<double>(m_scale);
    const double cube = m * m * m - m;     // m (m-1)(m+1)
    const double square = m * m - 1.0;
    WeightVector w;
    w.m_scale = m_scale;
    w.alpha.resize(static_cast<std::size_t>(m_scale));
    for (int i = 1; i <= m_scale; ++i) {
        const double di = static_cast<double>(i);
        w.alpha[static_cast<std::size_t>(i - 1)] =
            12.0 * di * di / cube - 6.0 * di / square - 6.0 * di / cube;
    }
    return w;
}

namespace {

struct GroupValues {
    std::vector<double> xg, xl, yg, yl;  // observed values at the group endpoints
};

GroupValues endpoint_values(const ObservationPair& pair,
                            const SyncResult& sync) {
    GroupValues gv;
    const std::size_t count = sync.n_sync + 1;
    gv.xg.resize(count);
    gv.xl.resize(count);
    gv.yg.resize(count);
    gv.yl.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        gv.xg[i] = pair.x.values[sync.g_index[i]];
        gv.xl[i] = pair.x.values[sync.l_index[i]];
        gv.yg[i] = pair.y.values[sync.gamma_index[i]];
        gv.yl[i] = pair.y.values[sync.lambda_index[i]];
    }
    return gv;
}

double lag_sum(const GroupValues& gv, std::size_t n, std::size_t lag) {
    detail::KahanSum acc;
    for (std::size_t j = lag; j <= n; ++j)
        acc.add((gv.xg[j] - gv.xl[j - lag + 1]) *
                (gv.yg[j] - gv.yl[j - lag + 1]));
    return acc.value();
}

}  // namespace

EstimateValue hayashi_yoshida(const ObservationPair& pair,
                              const SyncResult& sync) {
    GroupValues gv = endpoint_values(pair, sync);
    EstimateValue e;
    e.kind = EstimatorKind::hy;
    e.frequency = 1;
    e.n_sync = sync.n_sync;
    e.value = lag_sum(gv, sync.n_sync, 1);
    return e;
}

double hayashi_yoshida_double_sum(const ObservationPair& pair) {
    const auto& tx = pair.x.times;
    const auto& ty = pair.y.times;
    const auto& vx = pair.x.values;
    const auto& vy = pair.y.values;
    detail::KahanSum acc;
    std::size_t j_lo = 1;
    for (std::size_t i = 1; i < tx.size(); ++i) {
        while (j_lo < ty.size() && ty[j_lo] <= tx[i - 1]) ++j_lo;
        for (std::size_t j = j_lo; j < ty.size() && ty[j - 1] < tx[i]; ++j) {
            if (std::min(tx[i], ty[j]) > std::max(tx[i - 1], ty[j - 1]))
                acc.add((vx[i] - vx[i - 1]) * (vy[j] - vy[j - 1]));
        }
    }
    return acc.value();
}

EstimateValue realized_covariance(const ObservationPair& pair,
                                  const SyncResult& sync) {
    auto value_before = [](const TickSeries& s, double q) {
        auto it = std::upper_bound(s.times.begin(), s.times.end(), q);
        return s.values[static_cast<std::size_t>(it - s.times.begin()) - 1];
    };
    detail::KahanSum acc;
    double px = value_before(pair.x, sync.refresh[0]);
    double py = value_before(pair.y, sync.refresh[0]);
    for (std::size_t i = 1; i <= sync.n_sync; ++i) {
        double cx = value_before(pair.x, sync.refresh[i]);
        double cy = value_before(pair.y, sync.refresh[i]);
        acc.add((cx - px) * (cy - py));
        px = cx;
        py = cy;
    }
    EstimateValue e;
    e.kind = EstimatorKind::rc;
    e.frequency = 1;
    e.n_sync = sync.n_sync;
    e.value = acc.value();
    return e;
}

EstimateValue one_scale(const ObservationPair& pair, const SyncResult& sync,
                        std::size_t frequency) {
    if (frequency < 1 || frequency > sync.n_sync)
        throw std::invalid_argument("one_scale: frequency out of 1..n_sync");
    GroupValues gv = endpoint_values(pair, sync);
    EstimateValue e;
    e.kind = EstimatorKind::one_scale;
    e.frequency = frequency;
    e.n_sync = sync.n_sync;
    e.value = lag_sum(gv, sync.n_sync, frequency) /
              static_cast<double>(frequency);
    return e;
}

EstimateValue multiscale(const ObservationPair& pair, const SyncResult& sync,
                         const WeightVector& weights) {
    const int m = weights.m_scale;
    if (m < 2 || weights.alpha.size() != static_cast<std::size_t>(m))
        throw std::invalid_argument("multiscale: malformed weight vector");
    if (static_cast<std::size_t>(m) > sync.n_sync)
        throw std::invalid_argument("multiscale: more scales than groups");
    GroupValues gv = endpoint_values(pair, sync);
    detail::KahanSum acc;
    for (int i = 1; i <= m; ++i) {
        const std::size_t lag = static_cast<std::size_t>(i);
        acc.add(weights.alpha[lag - 1] * lag_sum(gv, sync.n_sync, lag) /
                static_cast<double>(i));
    }
    EstimateValue e;
    e.kind = EstimatorKind::multiscale;
    e.frequency = static_cast<std::size_t>(m);
    e.n_sync = sync.n_sync;
    e.value = acc.value();
    return e;
}

namespace {

double lag_square_sum(const std::vector<double>& v, std::size_t lag) {
    detail::KahanSum acc;
    for (std::size_t j = lag; j < v.size(); ++j) {
        double d = v[j] - v[j - lag];
        acc.add(d * d);
    }
    return acc.value();
}

}  // namespace

EstimateValue tsrv_univariate(const TickSeries& series, std::size_t frequency) {
    const std::size_t n = series.values.size() - 1;
    if (series.values.size() < 2 || frequency < 2 || frequency > n)
        throw std::invalid_argument("tsrv_univariate: frequency out of 2..n");
    const double subsample =
        lag_square_sum(series.values, frequency) /
        static_cast<double>(frequency);
    const double base = lag_square_sum(series.values, 1);
    const double subgrid_ratio =
        static_cast<double>(n - frequency + 1) /
        (static_cast<double>(frequency) * static_cast<double>(n));
    EstimateValue e;
    e.kind = EstimatorKind::tsrv;
    e.frequency = frequency;
    e.n_sync = n;
    e.value = subsample - subgrid_ratio * base;
    return e;
}

EstimateValue msrv_univariate(const TickSeries& series,
                              const WeightVector& weights) {
    const int m = weights.m_scale;
    const std::size_t n = series.values.size() - 1;
    if (m < 2 || weights.alpha.size() != static_cast<std::size_t>(m))
        throw std::invalid_argument("msrv_univariate: malformed weight vector");
    if (static_cast<std::size_t>(m) > n)
        throw std::invalid_argument("msrv_univariate: more scales than increments");
    detail::KahanSum acc;
    for (int i = 1; i <= m; ++i)
        acc.add(weights.alpha[static_cast<std::size_t>(i - 1)] *
                lag_square_sum(series.values, static_cast<std::size_t>(i)) /
                static_cast<double>(i));
    EstimateValue e;
    e.kind = EstimatorKind::msrv;
    e.frequency = static_cast<std::size_t>(m);
    e.n_sync = n;
    e.value = acc.value();
    return e;
}

}  // namespace covest
