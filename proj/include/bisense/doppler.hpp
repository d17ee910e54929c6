// SPDX-License-Identifier: Apache-2.0
//
// Doppler spectrum of a slow-time sequence.
//
// The channel model writes a Doppler shift f as the phasor exp(-i 2 pi f t).
// The spectrum is evaluated with the matching kernel exp(+i 2 pi f t), so a
// path with Doppler f lands in the +f bin.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "core.hpp"

namespace bisense {

struct DopplerSpectrum {
    RVector magnitudes;
    std::vector<double> axis; ///< Hz, ascending, symmetric about 0
};

/// Bin offsets (relative to DC) retained by a symmetric crop of +-max_hz.
inline int doppler_half_width(std::size_t m, double sample_rate, double max_hz) {
    detail::require(m >= 2, ErrorCode::invalid_argument, "need at least 2 symbols");
    detail::require(max_hz >= 0.0 && max_hz <= 0.5 * sample_rate * (1.0 + 1e-12),
                    ErrorCode::crop_exceeds_nyquist, "Doppler crop exceeds Nyquist");
    const double spacing = sample_rate / static_cast<double>(m);
    int half = static_cast<int>(std::floor(max_hz / spacing * (1.0 + 1e-12)));
    // keep the axis symmetric: +k and -k must both exist among the M bins
    const int max_symmetric = static_cast<int>((m - 1) / 2);
    return std::min(half, max_symmetric);
}

inline std::vector<double> doppler_axis(std::size_t m, double sample_rate, double max_hz) {
    const int half = doppler_half_width(m, sample_rate, max_hz);
    const double spacing = sample_rate / static_cast<double>(m);
    std::vector<double> axis;
    axis.reserve(static_cast<std::size_t>(2 * half + 1));
    for (int k = -half; k <= half; ++k) {
        axis.push_back(k * spacing);
    }
    return axis;
}

/// Cached FFT plan and crop for repeated spectra of one length.
class DopplerAnalyzer {
public:
    DopplerAnalyzer(std::size_t m, double sample_rate, double max_hz)
        : m_(m), half_(doppler_half_width(m, sample_rate, max_hz)),
          axis_(doppler_axis(m, sample_rate, max_hz)) {}

    [[nodiscard]] const std::vector<double>& axis() const { return axis_; }
    [[nodiscard]] std::size_t length() const { return m_; }

    /// |sum_j x_j exp(+i 2 pi f_k j / M)| over the cropped bins.
    [[nodiscard]] RVector magnitudes(const CVector& x) const {
        detail::require(static_cast<std::size_t>(x.size()) == m_, ErrorCode::dimension_mismatch,
                        "sequence length does not match the analyzer");
        std::vector<cplx> in(m_), out;
        for (std::size_t j = 0; j < m_; ++j) {
            in[j] = std::conj(x(static_cast<Eigen::Index>(j)));
        }
        Eigen::FFT<double> fft;
        fft.fwd(out, in);
        RVector mags(2 * half_ + 1);
        const auto mm = static_cast<int>(m_);
        for (int k = -half_; k <= half_; ++k) {
            mags(k + half_) = std::abs(out[static_cast<std::size_t>((k + mm) % mm)]);
        }
        return mags;
    }

private:
    std::size_t m_;
    int half_;
    std::vector<double> axis_;
};

inline DopplerSpectrum doppler_spectrum(const CVector& x, double sample_rate, double max_hz) {
    const DopplerAnalyzer analyzer(static_cast<std::size_t>(x.size()), sample_rate, max_hz);
    return {analyzer.magnitudes(x), analyzer.axis()};
}

/// Index of the DC bin on a symmetric axis.
inline std::size_t doppler_center(const std::vector<double>& axis) { return axis.size() / 2; }

} // namespace bisense
