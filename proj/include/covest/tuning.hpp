#pragma once

#include <cstddef>
#include <optional>

#include "covest/avar.hpp"
#include "covest/core.hpp"
#include "covest/estimators.hpp"
#include "covest/sync.hpp"

namespace covest {

struct TuningConfig {
    int pilot_frequency = 30;        // sparse lag L of the pilot stage
    double confidence_level = 0.95;  // two-sided coverage of the interval
    std::optional<double> c_multi_override;
    std::optional<double> c_sub_override;
    std::optional<std::size_t> bins_override;       // histogram bin count K
    std::optional<int> m_bin_override;              // binwise frequency
    std::optional<int> m_override;                  // final scale count M
    std::optional<std::size_t> sub_frequency_override;  // one-scale lag i
    bool nonzero_noise_only = false;
    bool i_endpoint_over_horizon = true;
};

// Pilot-stage quantities: sparse lag-L quadratic variations of each series,
// the sparse discretization-coefficient estimate, the assembled c^-3 / c^-1
// / c coefficients, and the resulting preliminary tuning constants.
struct PilotComponents {
    NoiseVariances noise;
    double qv_x = 0.0, qv_y = 0.0;
    double avar_dis = 0.0;
    double a_coeff = 0.0, b_coeff = 0.0, d_coeff = 0.0;
    double c_multi = 0.0, c_sub = 0.0;
};

// Requires n_sync >= 4 * pilot_frequency; throws otherwise, and throws on a
// degenerate (all-zero) pilot.
PilotComponents pilot_avars(const ObservationPair& pair, const SyncResult& sync,
                            const TimeFunctionals& fn, int pilot_frequency,
                            bool nonzero_only = false);

// Minimizer of a c^-3 + b c^-1 + d c over c > 0: the positive root of
// d c^4 - b c^2 - 3 a = 0. Requires a > 0, d > 0, b >= 0.
double c_multi_opt(double a, double b, double d);

// Minimizer of a c^-2 + d c: cbrt(2 a / d). Requires a > 0, d > 0.
double c_sub_opt(double a, double d);

// Standard normal quantile, accurate to ~1e-15 (rational approximation plus
// one Halley refinement). Requires 0 < p < 1.
double gaussian_quantile(double p);

struct EstimateReport {
    double point = 0.0;
    int m_used = 0;
    double c_multi = 0.0;
    AvarReport avar;
    double ci_low = 0.0, ci_high = 0.0;
    double rate_scale = 0.0;  // n_sync^{1/4}

    double sub_point = 0.0;
    std::size_t sub_frequency = 0;
    double c_sub = 0.0;
    AvarReport avar_sub;
    double sub_ci_low = 0.0, sub_ci_high = 0.0;
    double sub_rate_scale = 0.0;  // n_sync^{1/6}

    std::size_t n_sync = 0;
    std::size_t bins = 0;
    int m_bin = 0;
    NoiseVariances noise;
    PilotComponents pilot;
    HistogramIntegrals hist;
    MeshReport mesh;
    double confidence_level = 0.95;
};

// Full adaptive pipeline: validation, synchronization, pilot tuning,
// histogram integrals, final tuning constants, point estimates, variance
// estimates, and confidence intervals. Invariant:
// ci = point -/+ z * sqrt(avar.total) / n_sync^{1/4} (analogously for the
// one-scale part at rate n_sync^{1/6}). An m_override of 1 short-circuits
// to the frequency-1 estimate.
EstimateReport estimate_full(const ObservationPair& pair,
                             const TuningConfig& cfg = {});

}  // namespace covest
