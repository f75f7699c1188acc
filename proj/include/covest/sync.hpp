#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "covest/core.hpp"

namespace covest {

// Right-continuous piecewise-constant function: value v[i] from t[i] up to
// (but excluding) t[i+1]; 0 before t[0]; v.back() from t.back() to domain_end.
struct StepFunction {
    std::vector<double> t;
    std::vector<double> v;
    double domain_end = 0.0;

    double operator()(double q) const;
};

// Sampling groups 0..N of the two schemes. Group i covers observation-time
// intervals [l_i, g_i] (for x) and [lambda_i, gamma_i] (for y) around the
// refresh time T_i = refresh[i]. *_index entries point into the original
// tick arrays. Invariants: refresh is strictly increasing;
// refresh[k] == min(g[k], gamma[k]) == max(l[k+1], lambda[k+1]);
// l and lambda are pairwise distinct over groups 1..N;
// g[k] == g[k+1] forces gamma[k] != gamma[k+1] and conversely.
struct SyncResult {
    std::vector<double> refresh;
    std::vector<double> g, l, gamma, lambda;
    std::vector<std::size_t> g_index, l_index, gamma_index, lambda_index;
    std::size_t n_sync = 0;  // N; vectors above have length N + 1
    double horizon = 0.0;
    std::size_t x_ticks = 0, y_ticks = 0;
    // Ticks never used as any group endpoint (estimators skip them).
    std::size_t unused_x = 0, unused_y = 0;
};

// Builds the synchronized group sequence. Throws std::invalid_argument
// ("insufficient overlap") when fewer than two groups exist.
SyncResult synchronize(const ObservationPair& pair);

// Boundary geometry of group j, looking at one scheme's right endpoint
// against the other scheme's. c2 is equivalent to a repeated right endpoint
// in the next group. unclassified appears only when a needed neighboring
// tick is missing and no earlier predicate decides.
enum class CaseLabel : std::uint8_t {
    unclassified = 0,
    c1 = 1,
    c2 = 2,
    c3 = 3,
    c4 = 4,
};

struct CaseLabels {
    std::vector<CaseLabel> for_x;  // index 0..N; [0] is unclassified
    std::vector<CaseLabel> for_y;
};

CaseLabels classify(const SyncResult& sync, const ObservationPair& pair);

// Empirical time-transformation functionals of the sampling scheme, as step
// functions over [0, horizon] plus their endpoint values and samples on the
// supplied query grid.
struct TimeFunctionals {
    StepFunction G, F, H, IX, IY;
    double G_end = 0.0, IX_end = 0.0, IY_end = 0.0;
    std::vector<double> grid;
    std::vector<double> G_grid, F_grid, H_grid, IX_grid, IY_grid;
};

TimeFunctionals time_functionals(const SyncResult& sync,
                                 const std::vector<double>& grid);

// Forward difference (f(t + window) - f(t)) / window. Throws when the
// window leaves [0, domain_end] or is not positive.
double empirical_derivative(const StepFunction& f, double t, double window);

}  // namespace covest
