// SPDX-License-Identifier: Apache-2.0
//
// Evaluation metrics against simulator ground truth.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "augment.hpp"
#include "config.hpp"
#include "core.hpp"
#include "extractor.hpp"

namespace bisense {

inline constexpr double kMirrorRatioCapDb = 120.0;

struct PercentileTable {
    double p50 = 0.0;
    double p70 = 0.0;
    std::vector<double> sorted_errors; ///< absolute errors, ascending
    std::vector<double> cdf;           ///< (i + 1) / n for each sorted error
};

/// Percentile with linear interpolation between order statistics, rank
/// (n - 1) * q.
inline double percentile(const std::vector<double>& sorted, double q) {
    detail::require(!sorted.empty(), ErrorCode::empty_input, "no samples");
    detail::require(q >= 0.0 && q <= 1.0, ErrorCode::invalid_argument, "q must be in [0, 1]");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Absolute range errors from (estimate, truth) pairs in meters.
inline PercentileTable range_error_cdf(const std::vector<std::pair<double, double>>& estimates) {
    detail::require(!estimates.empty(), ErrorCode::empty_input, "no estimates");
    PercentileTable t;
    for (const auto& [est, truth] : estimates) {
        t.sorted_errors.push_back(std::abs(est - truth));
    }
    std::sort(t.sorted_errors.begin(), t.sorted_errors.end());
    const auto n = static_cast<double>(t.sorted_errors.size());
    for (std::size_t i = 0; i < t.sorted_errors.size(); ++i) {
        t.cdf.push_back(static_cast<double>(i + 1) / n);
    }
    t.p50 = percentile(t.sorted_errors, 0.5);
    t.p70 = percentile(t.sorted_errors, 0.7);
    return t;
}

/// 10 log10(P(+f) / P(-f)) in dB, positive when the true side dominates.
/// Clamped to +-kMirrorRatioCapDb; 0 when both bins are empty.
inline double mirror_ratio(const RVector& magnitudes, const std::vector<double>& axis, double f_true) {
    detail::require(static_cast<std::size_t>(magnitudes.size()) == axis.size(),
                    ErrorCode::dimension_mismatch, "spectrum and axis lengths differ");
    const std::size_t pos = doppler_to_bin(f_true, axis);
    const std::size_t neg = doppler_to_bin(-f_true, axis);
    const double p = std::norm(magnitudes(static_cast<Eigen::Index>(pos)));
    const double q = std::norm(magnitudes(static_cast<Eigen::Index>(neg)));
    if (p == 0.0 && q == 0.0) {
        return 0.0;
    }
    if (q == 0.0) {
        return kMirrorRatioCapDb;
    }
    if (p == 0.0) {
        return -kMirrorRatioCapDb;
    }
    return std::clamp(10.0 * std::log10(p / q), -kMirrorRatioCapDb, kMirrorRatioCapDb);
}

/// Nearest delay bin to a range in meters.
inline std::size_t range_to_bin(double range_m, const DelayGrid& grid) {
    std::size_t best = 0;
    for (std::size_t l = 1; l < grid.size(); ++l) {
        if (std::abs(grid.range_m(l) - range_m) < std::abs(grid.range_m(best) - range_m)) {
            best = l;
        }
    }
    return best;
}

struct LatencyStats {
    std::vector<double> samples_ms;
    double mean_ms = 0.0;
    double stddev_ms = 0.0;

    static LatencyStats from_samples(std::vector<double> samples) {
        detail::require(!samples.empty(), ErrorCode::empty_input, "no latency samples");
        LatencyStats s;
        s.samples_ms = std::move(samples);
        double sum = 0.0;
        for (double v : s.samples_ms) {
            sum += v;
        }
        s.mean_ms = sum / static_cast<double>(s.samples_ms.size());
        double ss = 0.0;
        for (double v : s.samples_ms) {
            ss += (v - s.mean_ms) * (v - s.mean_ms);
        }
        s.stddev_ms = s.samples_ms.size() > 1
                          ? std::sqrt(ss / static_cast<double>(s.samples_ms.size() - 1))
                          : 0.0;
        return s;
    }
};

struct CpiEstimate {
    double estimated_m = 0.0;
    double truth_m = 0.0;
    double estimated_hz = 0.0;
    double truth_hz = 0.0;
};

struct EvalReport {
    std::vector<CpiEstimate> estimates;
    PercentileTable range_errors;
    std::vector<double> mirror_ratios_db; ///< per CPI, at the true delay bin
    std::optional<LatencyStats> latency;

    /// One key=value per line.
    void write(std::ostream& out) const {
        out << "cpis=" << estimates.size() << '\n';
        for (std::size_t c = 0; c < estimates.size(); ++c) {
            const auto& e = estimates[c];
            out << "cpi." << c << "=" << e.estimated_m << ',' << e.truth_m << ','
                << e.estimated_hz << ',' << e.truth_hz << '\n';
        }
        out << "range_error_p50_m=" << range_errors.p50 << '\n';
        out << "range_error_p70_m=" << range_errors.p70 << '\n';
        for (std::size_t i = 0; i < range_errors.sorted_errors.size(); ++i) {
            out << "cdf." << i << "=" << range_errors.sorted_errors[i] << ',' << range_errors.cdf[i]
                << '\n';
        }
        double mean_mirror = 0.0;
        for (double r : mirror_ratios_db) {
            mean_mirror += r;
        }
        if (!mirror_ratios_db.empty()) {
            mean_mirror /= static_cast<double>(mirror_ratios_db.size());
        }
        out << "mirror_ratio_db_mean=" << mean_mirror << '\n';
        if (latency) {
            out << "latency_mean_ms=" << latency->mean_ms << '\n';
            out << "latency_stddev_ms=" << latency->stddev_ms << '\n';
        }
    }

    [[nodiscard]] std::string str() const {
        std::ostringstream ss;
        write(ss);
        return ss.str();
    }
};

/// Scores every CPI of a tensor against one ground-truth target.
inline EvalReport evaluate(const FeatureTensor& tensor, const TruthTarget& truth,
                           std::size_t dc_exclusion_bins) {
    detail::require(tensor.cpis() > 0, ErrorCode::empty_input, "tensor has no CPIs");
    EvalReport report;
    std::vector<std::pair<double, double>> pairs;
    const std::size_t truth_bin = range_to_bin(truth.excess_m, tensor.grid);
    for (std::size_t c = 0; c < tensor.cpis(); ++c) {
        const DelayDopplerFrame frame{tensor.frames[c], tensor.doppler_axis, tensor.grid};
        const PeakEstimate peak = estimate_peak(frame, dc_exclusion_bins);
        report.estimates.push_back({peak.range_m, truth.excess_m, peak.doppler, truth.doppler_hz});
        pairs.emplace_back(peak.range_m, truth.excess_m);
        report.mirror_ratios_db.push_back(mirror_ratio(
            frame.magnitudes.row(static_cast<Eigen::Index>(truth_bin)).transpose(),
            tensor.doppler_axis, truth.doppler_hz));
    }
    report.range_errors = range_error_cdf(pairs);
    return report;
}

} // namespace bisense
