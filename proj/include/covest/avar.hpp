#pragma once

#include <cstddef>
#include <vector>

#include "covest/core.hpp"
#include "covest/estimators.hpp"
#include "covest/sync.hpp"

namespace covest {

struct NoiseVariances {
    double eta2_x = 0.0;
    double eta2_y = 0.0;
};

// eta2 = sum of squared increments / (2n). With nonzero_only, n is replaced
// by the count of nonzero increments (markets quoting unchanged prices).
NoiseVariances noise_variances(const ObservationPair& pair,
                               bool nonzero_only = false);

enum class BinDriver { G, IX, IY };

struct IndexRange {
    std::size_t lo = 0, hi = 0;  // half-open [lo, hi)
};

// Time bins holding equal shares of the driver functional's endpoint mass.
// boundaries has bins+1 entries starting at 0; per-bin ranges index original
// x ticks, original y ticks, and sync groups whose refresh time falls in the
// bin.
struct BinPartition {
    BinDriver driver = BinDriver::G;
    std::vector<double> boundaries;
    std::vector<IndexRange> x_ranges, y_ranges, sync_ranges;
    std::size_t requested_bins = 0;
    std::size_t merged_bins = 0;
};

// Throws std::invalid_argument when the driver endpoint is zero (degenerate
// partition).
BinPartition partition(const SyncResult& sync, const TimeFunctionals& fn,
                       BinDriver driver, std::size_t bins);

// Histogram estimates of the time-transformed squared-volatility integrals:
// i1/i2 from binwise covariation and variation increments over the G bins
// (squared ratio for i1), i3/i4 from binwise variations over the IY/IX bins
// (plain ratios). Bins with fewer than 3*m_bin usable points merge
// rightward. A degenerate IX/IY driver yields i4/i3 = 0 with its flag set.
struct HistogramIntegrals {
    double i1 = 0.0, i2 = 0.0, i3 = 0.0, i4 = 0.0;
    bool i3_degenerate = false, i4_degenerate = false;
    std::size_t merged_g = 0, merged_ix = 0, merged_iy = 0;
};

HistogramIntegrals histogram_integrals(const ObservationPair& pair,
                                       const SyncResult& sync,
                                       const TimeFunctionals& fn,
                                       std::size_t bins, int m_bin);

// Inputs for the variance assembly.
struct AvarComponents {
    double eta2_x = 0.0, eta2_y = 0.0;
    double i1 = 0.0, i2 = 0.0, i3 = 0.0, i4 = 0.0;
    double ix_end = 0.0, iy_end = 0.0;
    double horizon = 1.0;
    // Divide the endpoint asynchronicity sum by the horizon inside the noise
    // coefficient (the estimator-form convention; off reproduces the plain
    // theoretical coefficient).
    bool i_endpoint_over_horizon = true;
};

enum class AvarKind { multiscale, one_scale };

struct AvarReport {
    double avar_noise = 0.0;
    double avar_dis = 0.0;
    double avar_cross = 0.0;
    double avar_end = 0.0;
    double total = 0.0;
    double i1 = 0.0, i2 = 0.0, i3 = 0.0, i4 = 0.0;
    AvarKind kind = AvarKind::multiscale;
};

// c^-3 (24 + 12 (IX + IY)/T) ex ey  +  c (26/35) T (i1 + i2)
// + c^-1 (12/5) (ey (1 + i3) + ex (1 + i4))  +  c^-1 (12/5) ex ey.
AvarReport avar_multiscale(const AvarComponents& comp, double c_multi);

// c^-2 4 ex ey + c (2/3)(i1 + i2).
AvarReport avar_one_scale(const AvarComponents& comp, double c_sub);

// Closed-form asymptotic variance for homogeneous Poisson sampling with
// constant coefficients. include_asynchronicity_terms = false drops the
// scheme-asynchronicity additions in the noise and cross parts, leaving the
// synchronous-case structure with the Poisson discretization factor.
double poisson_avar_closed_form(double theta1, double theta2, double sigma_x,
                                double sigma_y, double rho, double eta2_x,
                                double eta2_y, double c, double horizon,
                                AvarKind kind,
                                bool include_asynchronicity_terms = true);

// Same structure for synchronous (or intermeshed) equidistant sampling,
// where the discretization time change is the identity.
double synchronous_avar_closed_form(double sigma_x, double sigma_y, double rho,
                                    double eta2_x, double eta2_y, double c,
                                    double horizon, AvarKind kind);

}  // namespace covest
