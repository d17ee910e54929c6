// SPDX-License-Identifier: Apache-2.0
//
// Self-referencing cross-correlation (SRCC).
//
// Each CSI symbol is taken to the delay domain, a Gaussian window is centered
// on its strongest tap, and the windowed profile is taken back to the
// subcarriers. Multiplying the raw CSI by the conjugate of this reference
// cancels the per-symbol clock phasor, because the reference carries the same
// phasor.
//
// The cancellation is exact only if reconstruction commutes with a delay
// shift. Two choices make that hold for arbitrary (fractional) timing
// offsets:
//   * the window is centered on the sub-bin maximum of the band-limited
//     profile rather than on the integer peak bin;
//   * the default window is periodized over all circular images, so it has no
//     derivative kink at the antipode and lattice sampling introduces no
//     aliasing.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "core.hpp"
#include "csi_sim.hpp"

namespace bisense {

enum class WindowShape {
    periodic,      ///< sum of Gaussians over every circular image, peak-normalized
    nearest_image, ///< single Gaussian of the circular (wrap-around) distance
};

enum class PeakMode {
    per_symbol, ///< one window center per symbol
    cpi_median, ///< median of per-symbol centers, shared by the whole frame
};

struct WindowSpec {
    double sigma = 64.0;          ///< width in delay bins
    std::size_t ifft_size = 128;
    WindowShape shape = WindowShape::periodic;
    PeakMode peak_mode = PeakMode::per_symbol;
    bool subbin_center = true;    ///< refine the integer peak to the continuous maximum

    void validate(std::size_t subcarriers) const {
        detail::require(sigma > 0.0, ErrorCode::invalid_argument, "window sigma must be > 0");
        detail::require(ifft_size >= subcarriers, ErrorCode::invalid_argument,
                        "ifft_size must be >= number of subcarriers");
    }
};

struct CirProfile {
    CVector taps;
    double bin_spacing = 0.0; ///< seconds per delay bin
};

struct SrccMatrix {
    CMatrix values; ///< N x M
    SubcarrierGrid grid;
};

/// Unitary zero-padded transform between the subcarrier grid and ifft_size
/// delay bins. Subcarrier k sits at u_k = (f_k - f_0) / df, where df is the
/// smallest adjacent spacing; on uniform grids u_k = k and the transform is
/// exactly a zero-padded IDFT/DFT pair.
class DelayTransform {
public:
    DelayTransform(const SubcarrierGrid& grid, std::size_t ifft_size)
        : size_(ifft_size) {
        grid.validate();
        const std::size_t n = grid.size();
        detail::require(ifft_size >= n, ErrorCode::invalid_argument,
                        "ifft_size must be >= number of subcarriers");
        double spacing = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < n; ++i) {
            spacing = std::min(spacing, grid.frequencies[i] - grid.frequencies[i - 1]);
        }
        offsets_.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (grid.frequencies[i] - grid.frequencies[0]) / spacing;
            // GHz-scale frequencies leave ~1e-12 residue on uniform grids
            offsets_(static_cast<Eigen::Index>(i)) = std::abs(u - std::round(u)) < 1e-9 ? std::round(u) : u;
        }
        detail::require(offsets_(offsets_.size() - 1) < static_cast<double>(ifft_size),
                        ErrorCode::invalid_argument,
                        "subcarrier span exceeds ifft_size reference bins");
        bin_spacing_ = 1.0 / (static_cast<double>(ifft_size) * spacing);

        const double scale = 1.0 / std::sqrt(static_cast<double>(ifft_size));
        const auto k = static_cast<Eigen::Index>(ifft_size);
        inverse_.resize(k, static_cast<Eigen::Index>(n));
        for (Eigen::Index b = 0; b < k; ++b) {
            for (Eigen::Index i = 0; i < offsets_.size(); ++i) {
                inverse_(b, i) = std::polar(
                    scale, kTwoPi * offsets_(i) * static_cast<double>(b) / static_cast<double>(ifft_size));
            }
        }
        forward_ = inverse_.adjoint();
    }

    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] double bin_spacing() const { return bin_spacing_; }

    /// Subcarrier column (N) or matrix (N x M) to delay taps (K or K x M).
    [[nodiscard]] CMatrix to_delay(const CMatrix& columns) const { return inverse_ * columns; }
    /// Delay taps back to the N subcarrier points.
    [[nodiscard]] CMatrix to_frequency(const CMatrix& taps) const { return forward_ * taps; }

    /// Band-limited interpolant of the delay profile and its first two
    /// derivatives at continuous bin position x.
    struct Sample {
        cplx value, first, second;
    };
    [[nodiscard]] Sample interpolate(const CVector& column, double x) const {
        const double scale = 1.0 / std::sqrt(static_cast<double>(size_));
        Sample s{};
        for (Eigen::Index i = 0; i < offsets_.size(); ++i) {
            const double rate = kTwoPi * offsets_(i) / static_cast<double>(size_);
            const cplx e = column(i) * std::polar(scale, rate * x);
            const cplx d{0.0, rate};
            s.value += e;
            s.first += d * e;
            s.second += d * d * e;
        }
        return s;
    }

private:
    std::size_t size_;
    double bin_spacing_ = 0.0;
    RVector offsets_;
    CMatrix inverse_; // K x N
    CMatrix forward_; // N x K
};

inline CirProfile cir_from_symbol(const CsiFrame& frame, std::size_t j, const WindowSpec& spec) {
    frame.validate();
    detail::require(j < frame.symbols(), ErrorCode::index_out_of_range,
                    "symbol index " + std::to_string(j) + " out of range");
    spec.validate(frame.subcarriers());
    const DelayTransform transform(frame.grid, spec.ifft_size);
    return {transform.to_delay(frame.samples.col(static_cast<Eigen::Index>(j))),
            transform.bin_spacing()};
}

/// Index of the largest |tap|^2; ties go to the smallest index.
inline std::size_t peak_bin(const CirProfile& cir) {
    detail::require(cir.taps.size() > 0, ErrorCode::invalid_argument, "empty delay profile");
    Eigen::Index best = 0;
    double best_power = std::norm(cir.taps(0));
    for (Eigen::Index b = 1; b < cir.taps.size(); ++b) {
        const double p = std::norm(cir.taps(b));
        if (p > best_power) {
            best_power = p;
            best = b;
        }
    }
    detail::require(best_power > 0.0, ErrorCode::all_zero_profile, "delay profile is all zero");
    return static_cast<std::size_t>(best);
}

/// Continuous position (in bins, modulo ifft_size) of the local maximum of
/// |h(x)|^2 next to integer peak `bin`, by Newton iteration on the derivative.
/// Shifting the input by a linear phase shifts the result by the same amount.
inline double refine_peak(const DelayTransform& transform, const CVector& column,
                          std::size_t bin) {
    const double lo = static_cast<double>(bin) - 1.0;
    const double hi = static_cast<double>(bin) + 1.0;
    double x = static_cast<double>(bin);
    for (int iter = 0; iter < 100; ++iter) {
        const auto s = transform.interpolate(column, x);
        const double grad = 2.0 * std::real(s.first * std::conj(s.value));
        const double curv =
            2.0 * std::real(s.second * std::conj(s.value)) + 2.0 * std::norm(s.first);
        double step = curv < 0.0 ? -grad / curv : (grad > 0.0 ? 0.25 : -0.25);
        step = std::clamp(step, -0.5, 0.5);
        const double next = std::clamp(x + step, lo, hi);
        const bool done = std::abs(next - x) < 1e-13;
        x = next;
        if (done) {
            break;
        }
    }
    const double k = static_cast<double>(transform.size());
    x = std::fmod(x, k);
    if (x < 0.0) {
        x += k;
    }
    return x < k ? x : 0.0; // -tiny + k rounds to k
}

namespace detail {

// Peak-normalized periodized Gaussian exp(-(d / (2 sigma))^2) summed over
// images d + m K. Uses the direct image sum or its Poisson dual, whichever
// converges in fewer terms.
inline double periodic_gaussian(double d, double sigma, double period) {
    const double width = 2.0 * sigma;
    const int direct_terms = static_cast<int>(std::ceil(6.2 * width / period)) + 1;
    const int dual_terms = static_cast<int>(std::ceil(6.2 * period / (kPi * width))) + 1;
    auto direct = [&](double x) {
        double acc = 0.0;
        for (int m = -direct_terms; m <= direct_terms; ++m) {
            const double z = (x + m * period) / width;
            acc += std::exp(-z * z);
        }
        return acc;
    };
    auto dual = [&](double x) {
        double acc = 1.0;
        for (int q = 1; q <= dual_terms; ++q) {
            const double z = kPi * width * q / period;
            acc += 2.0 * std::exp(-z * z) * std::cos(kTwoPi * q * x / period);
        }
        return acc;
    };
    if (direct_terms <= dual_terms) {
        return direct(d) / direct(0.0);
    }
    return dual(d) / dual(0.0);
}

} // namespace detail

/// Gaussian window over ifft_size bins centered at (possibly fractional) `center`.
inline RVector gaussian_window(double center, const WindowSpec& spec) {
    const auto k = static_cast<double>(spec.ifft_size);
    detail::require(center >= 0.0 && center < k, ErrorCode::index_out_of_range,
                    "window center outside [0, ifft_size)");
    detail::require(spec.sigma > 0.0, ErrorCode::invalid_argument, "window sigma must be > 0");
    RVector w(static_cast<Eigen::Index>(spec.ifft_size));
    for (Eigen::Index b = 0; b < w.size(); ++b) {
        double d = std::fmod(std::abs(static_cast<double>(b) - center), k);
        if (spec.shape == WindowShape::periodic) {
            w(b) = detail::periodic_gaussian(d, spec.sigma, k);
        } else {
            d = std::min(d, k - d);
            const double z = d / (2.0 * spec.sigma);
            w(b) = std::exp(-z * z);
        }
    }
    return w;
}

/// Reusable reconstruction state for one grid and window configuration.
class Reconstructor {
public:
    static constexpr double kCandidateFloor = 0.5;

    Reconstructor(const SubcarrierGrid& grid, const WindowSpec& spec)
        : spec_(spec), transform_(grid, spec.ifft_size) {
        spec.validate(grid.size());
    }

    [[nodiscard]] const DelayTransform& transform() const { return transform_; }
    [[nodiscard]] const WindowSpec& spec() const { return spec_; }

    /// Window center (continuous bin) for one subcarrier column.
    /// With sub-bin centering every sampled local maximum within a factor
    /// kCandidateFloor of the strongest tap is refined and the highest
    /// continuous maximum wins, so near-equal lobes resolve the same way
    /// regardless of where the bin lattice falls.
    [[nodiscard]] double center_for(const CVector& column, const CVector& taps) const {
        const std::size_t bin = peak_bin({taps, transform_.bin_spacing()});
        if (!spec_.subbin_center) {
            return static_cast<double>(bin);
        }
        const auto k = taps.size();
        const double floor = kCandidateFloor * std::norm(taps(static_cast<Eigen::Index>(bin)));
        double best = refine_peak(transform_, column, bin);
        double best_power = std::norm(transform_.interpolate(column, best).value);
        for (Eigen::Index b = 0; b < k; ++b) {
            const double p = std::norm(taps(b));
            if (static_cast<std::size_t>(b) == bin || p < floor ||
                p < std::norm(taps((b + k - 1) % k)) || p < std::norm(taps((b + 1) % k))) {
                continue;
            }
            const double x = refine_peak(transform_, column, static_cast<std::size_t>(b));
            const double power = std::norm(transform_.interpolate(column, x).value);
            if (power > best_power) {
                best = x;
                best_power = power;
            }
        }
        return best;
    }

    [[nodiscard]] CMatrix reconstruct(const CMatrix& samples) const {
        const CMatrix taps = transform_.to_delay(samples);
        const auto m = samples.cols();
        std::vector<double> centers(static_cast<std::size_t>(m));
        for (Eigen::Index j = 0; j < m; ++j) {
            centers[static_cast<std::size_t>(j)] = center_for(samples.col(j), taps.col(j));
        }
        if (spec_.peak_mode == PeakMode::cpi_median) {
            std::vector<double> sorted = centers;
            std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
            std::fill(centers.begin(), centers.end(), sorted[sorted.size() / 2]);
        }
        CMatrix windowed(taps.rows(), m);
        for (Eigen::Index j = 0; j < m; ++j) {
            const RVector w = gaussian_window(centers[static_cast<std::size_t>(j)], spec_);
            windowed.col(j) = taps.col(j).cwiseProduct(w.cast<cplx>());
        }
        return transform_.to_frequency(windowed);
    }

private:
    WindowSpec spec_;
    DelayTransform transform_;
};

inline CsiFrame reconstruct_csi(const CsiFrame& frame, const WindowSpec& spec) {
    frame.validate();
    const Reconstructor recon(frame.grid, spec);
    return {recon.reconstruct(frame.samples), frame.grid};
}

inline SrccMatrix srcc(const CsiFrame& frame, const Reconstructor& recon) {
    frame.validate();
    return {frame.samples.cwiseProduct(recon.reconstruct(frame.samples).conjugate()), frame.grid};
}

inline SrccMatrix srcc(const CsiFrame& frame, const WindowSpec& spec) {
    frame.validate();
    return srcc(frame, Reconstructor(frame.grid, spec));
}

/// Lower bound on the phase variance of a reconstructed CSI entry:
/// noise_power / (2 ||window .* cir||^2).
inline double crlb_phase_bound(const CirProfile& cir, const RVector& window, double noise_power) {
    detail::require(noise_power > 0.0, ErrorCode::invalid_argument, "noise power must be > 0");
    detail::require(window.size() == cir.taps.size(), ErrorCode::dimension_mismatch,
                    "window length must match the delay profile");
    const double energy = cir.taps.cwiseProduct(window.cast<cplx>()).squaredNorm();
    detail::require(energy > 0.0, ErrorCode::zero_windowed_energy, "windowed CIR has no energy");
    return noise_power / (2.0 * energy);
}

} // namespace bisense
