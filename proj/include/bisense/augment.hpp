// SPDX-License-Identifier: Apache-2.0
//
// Physically motivated augmentations of Doppler-time maps and delay-Doppler-time
// tensors. A target's Doppler follows the bistatic projection of its velocity,
// so position, heading and speed changes move or stretch energy along the
// Doppler axis; a later start shifts it along time.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"
#include "extractor.hpp"

namespace bisense {

enum class AugmentKind { translate, affine_scale, mirror, time_shift, noise };

inline AugmentKind parse_augment_kind(std::string_view name) {
    if (name == "translate") return AugmentKind::translate;
    if (name == "affine_scale" || name == "scale") return AugmentKind::affine_scale;
    if (name == "mirror") return AugmentKind::mirror;
    if (name == "time_shift") return AugmentKind::time_shift;
    if (name == "noise") return AugmentKind::noise;
    throw Error(ErrorCode::invalid_argument, "unknown augmentation '" + std::string(name) + "'");
}

/// magnitude meaning per kind:
///   translate   - Doppler shift in bins (rounded), positive toward +Hz
///   affine_scale - Doppler stretch factor s > 0 about 0 Hz
///   mirror      - unused
///   time_shift  - shift in CPIs (rounded), positive toward later
///   noise       - variance of the additive Gaussian
struct AugmentationSpec {
    AugmentKind kind = AugmentKind::mirror;
    double magnitude = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        detail::require(std::isfinite(magnitude), ErrorCode::invalid_argument,
                        "augmentation magnitude must be finite");
        if (kind == AugmentKind::affine_scale) {
            detail::require(magnitude > 0.0, ErrorCode::invalid_argument, "scale must be > 0");
        }
        if (kind == AugmentKind::noise) {
            detail::require(magnitude >= 0.0, ErrorCode::invalid_argument,
                            "noise power must be >= 0");
        }
    }
};

/// Nearest bin on an ascending uniform axis; exact halfway goes to the lower bin.
inline std::size_t doppler_to_bin(double f, const std::vector<double>& axis) {
    detail::require(!axis.empty(), ErrorCode::invalid_argument, "empty Doppler axis");
    const double tol = 1e-9 * (axis.size() > 1 ? axis[1] - axis[0] : 1.0);
    detail::require(f >= axis.front() - tol && f <= axis.back() + tol,
                    ErrorCode::out_of_range_frequency,
                    "frequency " + std::to_string(f) + " Hz outside the Doppler axis");
    std::size_t best = 0;
    for (std::size_t k = 1; k < axis.size(); ++k) {
        if (std::abs(axis[k] - f) < std::abs(axis[best] - f)) {
            best = k;
        }
    }
    return best;
}

namespace detail {

// Applies one augmentation to a Doppler x time matrix in place.
inline void augment_doppler_time(RMatrix& m, const AugmentationSpec& spec, std::mt19937_64& rng) {
    const auto rows = m.rows();
    const auto cols = m.cols();
    switch (spec.kind) {
    case AugmentKind::translate: {
        const auto shift = static_cast<Eigen::Index>(std::lround(spec.magnitude));
        require(std::abs(shift) < rows, ErrorCode::empty_output,
                "Doppler translation moves every bin off the axis");
        RMatrix out = RMatrix::Zero(rows, cols);
        for (Eigen::Index k = 0; k < rows; ++k) {
            const Eigen::Index src = k - shift;
            if (src >= 0 && src < rows) {
                out.row(k) = m.row(src);
            }
        }
        m = std::move(out);
        break;
    }
    case AugmentKind::affine_scale: {
        const double center = 0.5 * static_cast<double>(rows - 1);
        RMatrix out = RMatrix::Zero(rows, cols);
        for (Eigen::Index k = 0; k < rows; ++k) {
            const double src = center + (static_cast<double>(k) - center) / spec.magnitude;
            if (src < 0.0 || src > static_cast<double>(rows - 1)) {
                continue;
            }
            const auto lo = static_cast<Eigen::Index>(std::floor(src));
            const Eigen::Index hi = std::min(lo + 1, rows - 1);
            const double t = src - static_cast<double>(lo);
            out.row(k) = (1.0 - t) * m.row(lo) + t * m.row(hi);
        }
        m = std::move(out);
        break;
    }
    case AugmentKind::mirror:
        m = m.colwise().reverse().eval();
        break;
    case AugmentKind::time_shift: {
        const auto shift = static_cast<Eigen::Index>(std::lround(spec.magnitude));
        require(std::abs(shift) < cols, ErrorCode::empty_output,
                "time shift moves every CPI off the map");
        RMatrix out = RMatrix::Zero(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Eigen::Index src = c - shift;
            if (src >= 0 && src < cols) {
                out.col(c) = m.col(src);
            }
        }
        m = std::move(out);
        break;
    }
    case AugmentKind::noise: {
        if (spec.magnitude == 0.0) {
            break;
        }
        std::normal_distribution<double> normal(0.0, std::sqrt(spec.magnitude));
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (Eigen::Index k = 0; k < rows; ++k) {
                m(k, c) = std::max(0.0, m(k, c) + normal(rng));
            }
        }
        break;
    }
    }
}

inline void require_symmetric_axis(const std::vector<double>& axis) {
    const double tol = 1e-9 * (axis.size() > 1 ? std::abs(axis[1] - axis[0]) : 1.0);
    for (std::size_t k = 0; k < axis.size(); ++k) {
        require(std::abs(axis[k] + axis[axis.size() - 1 - k]) <= tol,
                ErrorCode::inconsistent_axes, "Doppler axis is not symmetric about 0 Hz");
    }
}

} // namespace detail

inline DopplerTimeMap augment(const DopplerTimeMap& map, const AugmentationSpec& spec) {
    spec.validate();
    detail::require_symmetric_axis(map.doppler_axis);
    DopplerTimeMap out = map;
    std::mt19937_64 rng(spec.seed);
    detail::augment_doppler_time(out.magnitudes, spec, rng);
    return out;
}

/// Applies the same augmentation to the Doppler-time slice of every delay bin.
inline FeatureTensor augment(const FeatureTensor& tensor, const AugmentationSpec& spec) {
    spec.validate();
    detail::require_symmetric_axis(tensor.doppler_axis);
    FeatureTensor out = tensor;
    std::mt19937_64 rng(spec.seed);
    const auto dop = static_cast<Eigen::Index>(tensor.doppler_bins());
    const auto cpis = static_cast<Eigen::Index>(tensor.cpis());
    RMatrix slice(dop, cpis);
    for (std::size_t d = 0; d < tensor.delay_bins(); ++d) {
        for (Eigen::Index c = 0; c < cpis; ++c) {
            slice.col(c) = tensor.frames[static_cast<std::size_t>(c)]
                               .row(static_cast<Eigen::Index>(d))
                               .transpose();
        }
        detail::augment_doppler_time(slice, spec, rng);
        for (Eigen::Index c = 0; c < cpis; ++c) {
            out.frames[static_cast<std::size_t>(c)].row(static_cast<Eigen::Index>(d)) =
                slice.col(c).transpose();
        }
    }
    return out;
}

} // namespace bisense
