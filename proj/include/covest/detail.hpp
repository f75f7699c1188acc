#pragma once

#include <cstddef>
#include <vector>

namespace covest::detail {

// Compensated accumulator: the running error of s is kept in c, so long
// alternating-sign sums stay accurate to a few ulps of the true value.
struct KahanSum {
    double s = 0.0;
    double c = 0.0;

    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }

    double value() const { return s; }
};

inline double kahan_total(const std::vector<double>& xs) {
    KahanSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

}  // namespace covest::detail
