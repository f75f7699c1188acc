#include "covest/avar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "covest/detail.hpp"

namespace covest {

NoiseVariances noise_variances(const ObservationPair& pair, bool nonzero_only) {
    auto one = [nonzero_only](const TickSeries& s) {
        detail::KahanSum acc;
        std::size_t nonzero = 0;
        for (std::size_t i = 1; i < s.values.size(); ++i) {
            double d = s.values[i] - s.values[i - 1];
            acc.add(d * d);
            if (d != 0.0) ++nonzero;
        }
        std::size_t denom = nonzero_only ? nonzero : s.values.size() - 1;
        return denom == 0 ? 0.0 : acc.value() / (2.0 * static_cast<double>(denom));
    };
    return NoiseVariances{one(pair.x), one(pair.y)};
}

namespace {

const StepFunction& driver_of(const TimeFunctionals& fn, BinDriver driver) {
    switch (driver) {
        case BinDriver::G: return fn.G;
        case BinDriver::IX: return fn.IX;
        default: return fn.IY;
    }
}

IndexRange time_range(const std::vector<double>& times, double lo, double hi,
                      bool closed_hi) {
    auto begin = std::lower_bound(times.begin(), times.end(), lo);
    auto end = closed_hi ? std::upper_bound(times.begin(), times.end(), hi)
                         : std::lower_bound(times.begin(), times.end(), hi);
    return IndexRange{static_cast<std::size_t>(begin - times.begin()),
                      static_cast<std::size_t>(end - times.begin())};
}

}  // namespace

BinPartition partition(const SyncResult& sync, const TimeFunctionals& fn,
                       BinDriver driver, std::size_t bins) {
    const StepFunction& s = driver_of(fn, driver);
    if (bins == 0)
        throw std::invalid_argument("partition: need at least one bin");
    double mass = s.t.empty() ? 0.0 : s.v.back();
    if (!(mass > 0.0))
        throw std::invalid_argument("partition: degenerate driver functional");

    // Each jump carries at least one quantile step, so boundaries are
    // distinct as long as there are at least `bins` jumps.
    std::size_t usable = std::min(bins, s.t.size());

    BinPartition p;
    p.driver = driver;
    p.requested_bins = bins;
    p.boundaries.push_back(0.0);
    for (std::size_t j = 1; j <= usable; ++j) {
        double level = mass * static_cast<double>(j) /
                       static_cast<double>(usable);
        auto it = std::lower_bound(s.v.begin(), s.v.end(), level);
        if (it == s.v.end()) --it;  // guard FP rounding at the top level
        p.boundaries.push_back(s.t[static_cast<std::size_t>(it - s.v.begin())]);
    }

    for (std::size_t j = 1; j < p.boundaries.size(); ++j) {
        double lo = p.boundaries[j - 1];
        double hi = p.boundaries[j];
        bool last = (j + 1 == p.boundaries.size());
        // The last bin absorbs anything after its boundary so no tick or
        // group is orphaned.
        double hi_eff = last ? sync.horizon : hi;
        p.sync_ranges.push_back(
            time_range(sync.refresh, lo, hi_eff, last));
        p.x_ranges.push_back(IndexRange{});
        p.y_ranges.push_back(IndexRange{});
    }
    return p;
}

namespace {

void fill_tick_ranges(BinPartition& p, const std::vector<double>& tx,
                      const std::vector<double>& ty, double horizon) {
    for (std::size_t j = 0; j + 1 < p.boundaries.size(); ++j) {
        double lo = p.boundaries[j];
        double hi = p.boundaries[j + 1];
        bool last = (j + 2 == p.boundaries.size());
        double hi_eff = last ? horizon : hi;
        p.x_ranges[j] = time_range(tx, lo, hi_eff, last);
        p.y_ranges[j] = time_range(ty, lo, hi_eff, last);
    }
}

// Merges bin j into its right neighbor while its usable count is below the
// floor; a thin final bin merges leftward. multiplicity tracks how many
// original equimass bins each surviving bin spans.
void merge_thin(BinPartition& p, std::vector<std::size_t> counts,
                std::size_t floor_count,
                std::vector<std::size_t>& multiplicity) {
    std::size_t k = counts.size();
    multiplicity.assign(k, 1);
    std::size_t j = 0;
    while (j < counts.size()) {
        if (counts[j] >= floor_count || counts.size() == 1) {
            ++j;
            continue;
        }
        std::size_t into = (j + 1 < counts.size()) ? j + 1 : j - 1;
        std::size_t lo = std::min(j, into), hi = std::max(j, into);
        counts[lo] += counts[hi];
        multiplicity[lo] += multiplicity[hi];
        auto absorb = [&](std::vector<IndexRange>& ranges) {
            ranges[lo] = IndexRange{std::min(ranges[lo].lo, ranges[hi].lo),
                                    std::max(ranges[lo].hi, ranges[hi].hi)};
            ranges.erase(ranges.begin() + static_cast<std::ptrdiff_t>(hi));
        };
        absorb(p.sync_ranges);
        absorb(p.x_ranges);
        absorb(p.y_ranges);
        counts.erase(counts.begin() + static_cast<std::ptrdiff_t>(hi));
        multiplicity.erase(multiplicity.begin() +
                           static_cast<std::ptrdiff_t>(hi));
        p.boundaries.erase(p.boundaries.begin() +
                           static_cast<std::ptrdiff_t>(hi));
        ++p.merged_bins;
        if (lo < j) j = lo;  // re-check the bin that absorbed leftward
    }
}

// Multiscale combination over the sync groups [range.lo, range.hi).
double binwise_bivariate(const ObservationPair& pair, const SyncResult& sync,
                         const IndexRange& range, const WeightVector& w) {
    const std::size_t n_loc = range.hi - range.lo - 1;
    detail::KahanSum total;
    for (int i = 1; i <= w.m_scale; ++i) {
        const std::size_t lag = static_cast<std::size_t>(i);
        detail::KahanSum acc;
        for (std::size_t j = lag; j <= n_loc; ++j) {
            std::size_t right = range.lo + j;
            std::size_t left = range.lo + j - lag + 1;
            acc.add((pair.x.values[sync.g_index[right]] -
                     pair.x.values[sync.l_index[left]]) *
                    (pair.y.values[sync.gamma_index[right]] -
                     pair.y.values[sync.lambda_index[left]]));
        }
        total.add(w.alpha[lag - 1] * acc.value() / static_cast<double>(i));
    }
    return total.value();
}

// Multiscale variance over the ticks [range.lo, range.hi) of one series.
double binwise_univariate(const std::vector<double>& values,
                          const IndexRange& range, const WeightVector& w) {
    const std::size_t n_loc = range.hi - range.lo - 1;
    detail::KahanSum total;
    for (int i = 1; i <= w.m_scale; ++i) {
        const std::size_t lag = static_cast<std::size_t>(i);
        detail::KahanSum acc;
        for (std::size_t j = lag; j <= n_loc; ++j) {
            double d = values[range.lo + j] - values[range.lo + j - lag];
            acc.add(d * d);
        }
        total.add(w.alpha[lag - 1] * acc.value() / static_cast<double>(i));
    }
    return total.value();
}

}  // namespace

HistogramIntegrals histogram_integrals(const ObservationPair& pair,
                                       const SyncResult& sync,
                                       const TimeFunctionals& fn,
                                       std::size_t bins, int m_bin) {
    if (m_bin < 2)
        throw std::invalid_argument("histogram_integrals: binwise frequency must be >= 2");
    if (bins == 0)
        throw std::invalid_argument("histogram_integrals: need at least one bin");
    const WeightVector w = optimal_weights(m_bin);
    const std::size_t floor_count = 3 * static_cast<std::size_t>(m_bin);
    HistogramIntegrals out;

    // Shared assembly: per-bin ratio terms weighted by the bin's share of
    // the driver mass (one equimass unit per constituent bin).
    auto assemble = [&](BinDriver driver, double mass_end, bool need_x,
                        bool need_y, bool need_sync,
                        std::size_t& merged_out) {
        BinPartition p = partition(sync, fn, driver, bins);
        fill_tick_ranges(p, pair.x.times, pair.y.times, sync.horizon);
        const double unit_mass =
            mass_end / static_cast<double>(p.sync_ranges.size());
        std::vector<std::size_t> counts;
        for (std::size_t j = 0; j < p.sync_ranges.size(); ++j) {
            std::size_t c = static_cast<std::size_t>(-1);
            if (need_sync)
                c = std::min(c, p.sync_ranges[j].hi - p.sync_ranges[j].lo);
            if (need_x) c = std::min(c, p.x_ranges[j].hi - p.x_ranges[j].lo);
            if (need_y) c = std::min(c, p.y_ranges[j].hi - p.y_ranges[j].lo);
            counts.push_back(c);
        }
        std::vector<std::size_t> multiplicity;
        merge_thin(p, counts, floor_count, multiplicity);
        merged_out = p.merged_bins;

        detail::KahanSum first, second;
        for (std::size_t j = 0; j + 1 < p.boundaries.size(); ++j) {
            double width = p.boundaries[j + 1] - p.boundaries[j];
            if (!(width > 0.0)) continue;
            double mass = unit_mass * static_cast<double>(multiplicity[j]);
            if (driver == BinDriver::G) {
                double cb = binwise_bivariate(pair, sync, p.sync_ranges[j], w);
                double ux = binwise_univariate(pair.x.values, p.x_ranges[j], w);
                double uy = binwise_univariate(pair.y.values, p.y_ranges[j], w);
                double r1 = cb / width;
                first.add(r1 * r1 * mass);
                second.add(ux * uy / (width * width) * mass);
            } else if (driver == BinDriver::IY) {
                double ux = binwise_univariate(pair.x.values, p.x_ranges[j], w);
                first.add(ux / width * mass);
            } else {
                double uy = binwise_univariate(pair.y.values, p.y_ranges[j], w);
                first.add(uy / width * mass);
            }
        }
        return std::pair<double, double>{first.value(), second.value()};
    };

    auto [i1, i2] = assemble(BinDriver::G, fn.G_end, true, true, true,
                             out.merged_g);
    out.i1 = i1;
    out.i2 = i2;

    if (fn.IY_end > 0.0) {
        out.i3 = assemble(BinDriver::IY, fn.IY_end, true, false, false,
                          out.merged_iy)
                     .first;
    } else {
        out.i3 = 0.0;
        out.i3_degenerate = true;
    }
    if (fn.IX_end > 0.0) {
        out.i4 = assemble(BinDriver::IX, fn.IX_end, false, true, false,
                          out.merged_ix)
                     .first;
    } else {
        out.i4 = 0.0;
        out.i4_degenerate = true;
    }
    return out;
}

AvarReport avar_multiscale(const AvarComponents& comp, double c_multi) {
    if (!(c_multi > 0.0))
        throw std::invalid_argument("avar_multiscale: c must be positive");
    double i_end = comp.ix_end + comp.iy_end;
    if (comp.i_endpoint_over_horizon) i_end /= comp.horizon;
    const double ee = comp.eta2_x * comp.eta2_y;
    AvarReport r;
    r.kind = AvarKind::multiscale;
    r.avar_noise = (24.0 + 12.0 * i_end) * ee / (c_multi * c_multi * c_multi);
    r.avar_end = (12.0 / 5.0) * ee / c_multi;
    r.avar_dis = c_multi * (26.0 / 35.0) * comp.horizon * (comp.i1 + comp.i2);
    r.avar_cross = (12.0 / 5.0) / c_multi *
                   (comp.eta2_y * (1.0 + comp.i3) +
                    comp.eta2_x * (1.0 + comp.i4));
    r.total = r.avar_noise + r.avar_end + r.avar_dis + r.avar_cross;
    r.i1 = comp.i1;
    r.i2 = comp.i2;
    r.i3 = comp.i3;
    r.i4 = comp.i4;
    return r;
}

AvarReport avar_one_scale(const AvarComponents& comp, double c_sub) {
    if (!(c_sub > 0.0))
        throw std::invalid_argument("avar_one_scale: c must be positive");
    AvarReport r;
    r.kind = AvarKind::one_scale;
    r.avar_noise = 4.0 * comp.eta2_x * comp.eta2_y / (c_sub * c_sub);
    r.avar_dis = c_sub * (2.0 / 3.0) * (comp.i1 + comp.i2);
    r.avar_cross = 0.0;
    r.avar_end = 0.0;
    r.total = r.avar_noise + r.avar_dis;
    r.i1 = comp.i1;
    r.i2 = comp.i2;
    r.i3 = comp.i3;
    r.i4 = comp.i4;
    return r;
}

double poisson_avar_closed_form(double theta1, double theta2, double sigma_x,
                                double sigma_y, double rho, double eta2_x,
                                double eta2_y, double c, double horizon,
                                AvarKind kind,
                                bool include_asynchronicity_terms) {
    if (!(theta1 > 0.0) || !(theta2 > 0.0))
        throw std::invalid_argument("poisson_avar_closed_form: thetas must be positive");
    if (!(c > 0.0))
        throw std::invalid_argument("poisson_avar_closed_form: c must be positive");
    const double t1 = theta1, t2 = theta2;
    const double prod2 = t1 * t1 * t2 * t2;
    const double sum2 = (t1 + t2) * (t1 + t2);
    const double g_factor =
        2.0 * (1.0 - 2.0 * prod2 / (prod2 + (t1 * t1 + t2 * t2) * sum2));
    const double ss = sigma_x * sigma_y;
    const double dis_integral = g_factor * ss * ss * (1.0 + rho * rho) * horizon;
    if (kind == AvarKind::one_scale)
        return 4.0 * eta2_x * eta2_y / (c * c) + c * (2.0 / 3.0) * dis_integral;

    const double i_limit = t1 * t2 / sum2;  // slope of either asynchronicity functional
    const double async = include_asynchronicity_terms ? i_limit : 0.0;
    const double noise =
        (24.0 + 12.0 * 2.0 * async) * eta2_x * eta2_y / (c * c * c);
    const double end_term = (12.0 / 5.0) * eta2_x * eta2_y / c;
    const double dis = c * (26.0 / 35.0) * dis_integral;
    const double cross =
        (12.0 / 5.0) / c *
        (eta2_y * (1.0 + async) * sigma_x * sigma_x * horizon +
         eta2_x * (1.0 + async) * sigma_y * sigma_y * horizon);
    return noise + end_term + dis + cross;
}

double synchronous_avar_closed_form(double sigma_x, double sigma_y, double rho,
                                    double eta2_x, double eta2_y, double c,
                                    double horizon, AvarKind kind) {
    if (!(c > 0.0))
        throw std::invalid_argument("synchronous_avar_closed_form: c must be positive");
    const double ss = sigma_x * sigma_y;
    const double dis_integral = ss * ss * (1.0 + rho * rho) * horizon;
    if (kind == AvarKind::one_scale)
        return 4.0 * eta2_x * eta2_y / (c * c) + c * (2.0 / 3.0) * dis_integral;
    return 24.0 * eta2_x * eta2_y / (c * c * c) +
           (12.0 / 5.0) * eta2_x * eta2_y / c +
           c * (26.0 / 35.0) * dis_integral +
           (12.0 / 5.0) / c *
               (eta2_y * sigma_x * sigma_x * horizon +
                eta2_x * sigma_y * sigma_y * horizon);
}

}  // namespace covest
