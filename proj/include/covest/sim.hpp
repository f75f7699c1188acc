#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "covest/core.hpp"
#include "covest/tuning.hpp"

namespace covest {

// Right-continuous piecewise-constant coefficient on [0, infinity).
struct PiecewiseConstant {
    std::vector<double> t{0.0};
    std::vector<double> v{0.0};

    PiecewiseConstant() = default;
    explicit PiecewiseConstant(double constant) : t{0.0}, v{constant} {}
    PiecewiseConstant(std::vector<double> times, std::vector<double> values)
        : t(std::move(times)), v(std::move(values)) {}

    double at(double q) const;
};

struct NoiseSpec {
    enum class Law { gaussian, two_point };
    double eta2_x = 0.0;
    double eta2_y = 0.0;
    double decay_alpha = 0.0;  // effective variance eta2 * n^{-alpha}
    Law law = Law::gaussian;
};

enum class SamplingKind { equidistant_sync, intermeshed, poisson };

struct SamplingSpec {
    SamplingKind kind = SamplingKind::equidistant_sync;
    std::size_t n = 0;  // grid size, or expected tick count for poisson
    double theta1 = 1.0;
    double theta2 = 1.0;
};

struct SimConfig {
    double horizon = 1.0;
    PiecewiseConstant sigma_x{1.0}, sigma_y{1.0}, rho{0.0};
    double mu_x = 0.0, mu_y = 0.0;
    NoiseSpec noise;
    SamplingSpec sampling;
    std::uint64_t seed = 0;
};

// Flat "key = value" text; '#' starts a comment. Grid-valued coefficients
// use "t0:v0,t1:v1,...". Unknown keys raise.
SimConfig parse_sim_config(const std::string& path);
SimConfig parse_sim_config_text(const std::string& text);

// Deterministic stream: raw mt19937_64 output mapped to uniforms, normals
// via the inverse CDF, so results are identical across platforms.
class Rng {
  public:
    explicit Rng(std::uint64_t s) : eng_(s) {}
    double uniform();              // (0, 1)
    double normal();               // standard normal
    double exponential(double mean);

  private:
    std::mt19937_64 eng_;
};

// Independent substream for (seed, rep, stream), mixed so neighboring reps
// are uncorrelated.
Rng rep_rng(std::uint64_t seed, std::uint64_t rep, std::uint64_t stream);

// Renewal scheme with exponential gaps of mean theta * horizon-free scale
// 1/n_expected, truncated at the horizon.
std::vector<double> sample_poisson_scheme(double theta, std::size_t n_expected,
                                          double horizon, Rng& rng);

// Observation times for one scheme kind; for_y selects the second grid of
// intermeshed/poisson sampling.
std::vector<double> sample_times(const SamplingSpec& spec, double horizon,
                                 bool for_y, Rng& rng);

struct PathMoments {
    double vxx = 0.0, vyy = 0.0, vxy = 0.0;
};

// Integrated covariance of the latent increments over [a, b].
PathMoments integrated_moments(const SimConfig& cfg, double a, double b);

// int rho sigma_x sigma_y dt over [0, horizon]: the estimand.
double integrated_qcov(const SimConfig& cfg);

struct PathPair {
    std::vector<double> x_values;
    std::vector<double> y_values;
};

// Exact joint Gaussian increments on the union grid of the two schemes;
// values are returned at the requested times (no interpolation error).
PathPair simulate_paths(const SimConfig& cfg, const std::vector<double>& times_x,
                        const std::vector<double>& times_y, Rng& rng);

// Adds iid noise of variance eta2 * n_for_decay^{-alpha} in place.
void add_noise(std::vector<double>& values, double eta2,
               std::size_t n_for_decay, double alpha, NoiseSpec::Law law,
               Rng& rng);

// Scheme + paths + noise with substreams derived from cfg.seed and rep.
ObservationPair simulate_pair(const SimConfig& cfg, std::uint64_t rep = 0);

struct McSummary {
    std::size_t reps = 0;
    std::size_t failures = 0;
    double true_qcov = 0.0;
    double mean_multi = 0.0, std_multi = 0.0;
    double mean_sub = 0.0, std_sub = 0.0;
    double mean_avar_multi = 0.0, std_avar_multi = 0.0;
    double mean_avar_sub = 0.0, std_avar_sub = 0.0;
    double avar_multi_theory = 0.0;
    double avar_sub_theory = 0.0;
    double mean_i1 = 0.0, std_i1 = 0.0;
    double mean_i2 = 0.0, std_i2 = 0.0;
    double mean_i3 = 0.0, std_i3 = 0.0;
    double mean_i4 = 0.0, std_i4 = 0.0;
    double coverage = 0.0;          // fraction of intervals covering truth
    double student_q_low = 0.0;     // empirical 2.5% quantile of the
    double student_q_high = 0.0;    // studentized errors, and the 97.5% one
    double mean_n_sync = 0.0;
    double mean_c_multi = 0.0;
    double mean_m_used = 0.0;
};

// Runs reps independent replications (parallelized over threads; results do
// not depend on the thread count). Failed replications are counted, not
// fatal. The theoretical variance columns use the closed forms matching the
// sampling kind.
McSummary run_monte_carlo(const SimConfig& cfg, std::size_t reps,
                          const TuningConfig& tuning = {},
                          unsigned threads = 0);

void write_mc_summary_csv(const std::string& path, const McSummary& summary);

struct RatePoint {
    std::size_t n = 0;
    double mean_n_sync = 0.0;
    double rmse = 0.0;
};

struct RateResult {
    double slope = 0.0;  // of log RMSE against log mean group count
    std::vector<RatePoint> points;
};

// Fits the convergence-rate exponent over a family of configs differing in
// n. Requires at least three sizes spanning a factor of ten.
RateResult rate_check(const std::vector<SimConfig>& family, std::size_t reps,
                      const TuningConfig& tuning = {}, unsigned threads = 0);

}  // namespace covest
