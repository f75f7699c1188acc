#include "covest/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace covest {

namespace {

void check_series(const TickSeries& s, double horizon) {
    if (s.times.size() != s.values.size())
        throw std::invalid_argument("series '" + s.label +
                                    "': times and values differ in length");
    if (s.times.size() < 2)
        throw std::invalid_argument("series '" + s.label +
                                    "': needs at least 2 ticks");
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        if (!std::isfinite(s.times[i]) || !std::isfinite(s.values[i]))
            throw std::invalid_argument("series '" + s.label +
                                        "': non-finite entry at index " +
                                        std::to_string(i));
    }
    if (s.times.front() < 0.0)
        throw std::invalid_argument("series '" + s.label +
                                    "': negative time at index 0");
    for (std::size_t i = 1; i < s.times.size(); ++i) {
        if (!(s.times[i] > s.times[i - 1]))
            throw std::invalid_argument("series '" + s.label +
                                        "': times not strictly increasing at index " +
                                        std::to_string(i));
    }
    if (s.times.back() > horizon)
        throw std::invalid_argument("series '" + s.label +
                                    "': tick beyond the horizon at index " +
                                    std::to_string(s.times.size() - 1));
}

double mesh_width(const TickSeries& s, double horizon) {
    double widest = s.times.front();  // gap before the first tick
    for (std::size_t i = 1; i < s.times.size(); ++i)
        widest = std::max(widest, s.times[i] - s.times[i - 1]);
    widest = std::max(widest, horizon - s.times.back());
    return widest;
}

}  // namespace

MeshReport validate(const ObservationPair& pair) {
    if (!(pair.horizon > 0.0) || !std::isfinite(pair.horizon))
        throw std::invalid_argument("horizon must be positive and finite");
    check_series(pair.x, pair.horizon);
    check_series(pair.y, pair.horizon);

    MeshReport report;
    report.n = pair.x.times.size() - 1;
    report.m = pair.y.times.size() - 1;
    report.delta_x = mesh_width(pair.x, pair.horizon);
    report.delta_y = mesh_width(pair.y, pair.horizon);
    report.count_ratio_warning =
        std::max(report.n, report.m) > 10 * std::min(report.n, report.m);
    return report;
}

namespace {

bool parse_double(std::string_view field, double& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                          s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                          s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

TickSeries read_ticks_csv(const std::string& path, const std::string& label,
                          const CsvOptions& opts) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");

    TickSeries series;
    series.label = label;
    std::string line;
    std::size_t line_no = 0;
    bool first_data_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = trim(line);
        if (row.empty()) continue;
        auto comma = row.find(',');
        if (comma == std::string_view::npos)
            throw std::runtime_error("'" + path + "' line " +
                                     std::to_string(line_no) +
                                     ": expected 'time,value'");
        std::string_view tf = trim(row.substr(0, comma));
        std::string_view vf = trim(row.substr(comma + 1));
        double t, v;
        if (!parse_double(tf, t)) {
            if (!first_data_seen) continue;  // header row
            throw std::runtime_error("'" + path + "' line " +
                                     std::to_string(line_no) +
                                     ": bad time field '" + std::string(tf) +
                                     "'");
        }
        if (!parse_double(vf, v))
            throw std::runtime_error("'" + path + "' line " +
                                     std::to_string(line_no) +
                                     ": bad value field '" + std::string(vf) +
                                     "'");
        first_data_seen = true;
        if (!series.times.empty()) {
            if (t == series.times.back()) {
                if (opts.collapse_duplicates) {
                    series.values.back() = v;  // keep the last quote
                    continue;
                }
                throw std::runtime_error("'" + path + "' line " +
                                         std::to_string(line_no) +
                                         ": duplicate timestamp");
            }
            if (t < series.times.back())
                throw std::runtime_error("'" + path + "' line " +
                                         std::to_string(line_no) +
                                         ": timestamps decrease");
        }
        series.times.push_back(t);
        series.values.push_back(v);
    }
    if (series.times.empty())
        throw std::runtime_error("'" + path + "': no data rows");
    return series;
}

void write_ticks_csv(const std::string& path, const TickSeries& series) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << "time,value\n";
    out.precision(17);
    for (std::size_t i = 0; i < series.times.size(); ++i)
        out << series.times[i] << ',' << series.values[i] << '\n';
    if (!out)
        throw std::runtime_error("write failed for '" + path + "'");
}

void normalize_times(ObservationPair& pair) {
    if (pair.x.times.empty() || pair.y.times.empty())
        throw std::invalid_argument("cannot normalize an empty series");
    double lo = std::min(pair.x.times.front(), pair.y.times.front());
    double hi = std::max(pair.x.times.back(), pair.y.times.back());
    if (!(hi > lo))
        throw std::invalid_argument("degenerate joint time span");
    double scale = 1.0 / (hi - lo);
    for (double& t : pair.x.times) t = (t - lo) * scale;
    for (double& t : pair.y.times) t = (t - lo) * scale;
    pair.x.times.back() = std::min(pair.x.times.back(), 1.0);
    pair.y.times.back() = std::min(pair.y.times.back(), 1.0);
    pair.horizon = 1.0;
}

}  // namespace covest
