#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace covest {

// One irregularly observed series. times are strictly increasing and
// nonnegative; values[i] is the observation at times[i].
struct TickSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::string label;
};

// Two series observed over a common window [0, horizon].
struct ObservationPair {
    TickSeries x;
    TickSeries y;
    double horizon = 0.0;
};

// Mesh diagnostics. n and m count increments (ticks minus one). delta_* is
// the widest uncovered interval of [0, horizon], including the gap before
// the first tick and after the last one.
struct MeshReport {
    double delta_x = 0.0;
    double delta_y = 0.0;
    std::size_t n = 0;
    std::size_t m = 0;
    bool count_ratio_warning = false;
};

// Validates ordering, finiteness, and window containment; throws
// std::invalid_argument naming the offending series and index. Sets
// count_ratio_warning when one series has more than ten times the
// increments of the other.
MeshReport validate(const ObservationPair& pair);

struct CsvOptions {
    // Keep the last value when consecutive rows share a timestamp instead of
    // rejecting the file.
    bool collapse_duplicates = false;
};

// Reads "time,value" rows; a non-numeric first row is treated as a header.
// Parsing is locale independent; malformed rows raise with their 1-based
// line number.
TickSeries read_ticks_csv(const std::string& path, const std::string& label,
                          const CsvOptions& opts = {});

void write_ticks_csv(const std::string& path, const TickSeries& series);

// Affinely maps both time axes onto [0,1] using the joint first and last
// tick, and sets horizon = 1. Requires a nondegenerate joint span.
void normalize_times(ObservationPair& pair);

}  // namespace covest
