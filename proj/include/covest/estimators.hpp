#pragma once

#include <cstddef>
#include <vector>

#include "covest/core.hpp"
#include "covest/sync.hpp"

namespace covest {

// Scale weights alpha_1..alpha_M for the multiscale combinations. They sum
// to one while their 1/i-weighted sum vanishes, which removes the leading
// noise contribution.
struct WeightVector {
    int m_scale = 0;
    std::vector<double> alpha;  // alpha[i-1] is the weight of frequency i
};

// Discrete quadratic weights minimizing the asymptotic variance. Requires
// m_scale >= 2 (both conditions cannot hold on a single scale).
WeightVector optimal_weights(int m_scale);

enum class EstimatorKind {
    hy,
    rc,
    one_scale,
    tsrv,
    multiscale,
    msrv,
};

struct EstimateValue {
    double value = 0.0;
    EstimatorKind kind = EstimatorKind::hy;
    std::size_t frequency = 0;  // i for one_scale/tsrv, M for multiscale/msrv
    std::size_t n_sync = 0;
};

// Sum over groups 1..N of (X_g - X_l)(Y_gamma - Y_lambda), identical to the
// overlap double sum below for noise-free synchronized data.
EstimateValue hayashi_yoshida(const ObservationPair& pair,
                              const SyncResult& sync);

// Reference overlap form: sum over all increment pairs whose observation
// intervals intersect. Quadratic cost; used as a cross-check.
double hayashi_yoshida_double_sum(const ObservationPair& pair);

// Previous-tick realized covariance on the refresh grid.
EstimateValue realized_covariance(const ObservationPair& pair,
                                  const SyncResult& sync);

// Subsampled covariance at lag `frequency` (1 <= frequency <= N):
// (1/i) sum_{j=i..N} (X_{g_j} - X_{l_{j-i+1}})(Y_{gamma_j} - Y_{lambda_{j-i+1}}).
EstimateValue one_scale(const ObservationPair& pair, const SyncResult& sync,
                        std::size_t frequency);

// Weighted combination of the one-scale estimates over frequencies
// 1..weights.m_scale. Requires m_scale <= N.
EstimateValue multiscale(const ObservationPair& pair, const SyncResult& sync,
                         const WeightVector& weights);

// Two-scale realized variance of a single series: lag-i subsample average
// debiased by the lag-1 sum scaled with the subgrid count ratio
// (n - i + 1)/(i n), which zeroes the pure-noise expectation.
// Requires 2 <= frequency <= n.
EstimateValue tsrv_univariate(const TickSeries& series, std::size_t frequency);

// Multiscale realized variance of a single series with the given weights.
// Requires m_scale <= n.
EstimateValue msrv_univariate(const TickSeries& series,
                              const WeightVector& weights);

}  // namespace covest
