// SPDX-License-Identifier: Apache-2.0
//
// Synthetic bistatic SISO CSI generator. Each sample is
//
//   CSI[i][j] = exp(-i(2 pi f_i tau_j + phi_j)) exp(-i phi_h) (H_S[i] + H_X[i][j]) + noise
//
// with H_S a sum of static paths rho exp(-i 2 pi f_i tau) and H_X a sum of
// dynamic paths rho exp(-i 2 pi (f_i tau + f_D j dt)).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "core.hpp"
#include "geometry.hpp"

namespace bisense {

struct SubcarrierGrid {
    std::vector<double> frequencies; ///< absolute subcarrier frequencies, Hz
    double symbol_interval = 1e-3;   ///< seconds
    std::size_t num_symbols = 128;

    /// N subcarriers spaced bandwidth/N apart, centered on the carrier.
    static SubcarrierGrid uniform(double carrier, double bandwidth, std::size_t n,
                                  double symbol_interval, std::size_t m) {
        SubcarrierGrid grid;
        grid.frequencies.resize(n);
        const double spacing = bandwidth / static_cast<double>(n);
        const double mid = 0.5 * static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            grid.frequencies[i] = carrier + (static_cast<double>(i) - mid) * spacing;
        }
        grid.symbol_interval = symbol_interval;
        grid.num_symbols = m;
        return grid;
    }

    /// Wi-Fi-like default: 30 subcarriers over 20 MHz at 5.32 GHz, 1 kHz CSI rate.
    static SubcarrierGrid wifi_default(std::size_t m = 128) {
        return uniform(5.32e9, 20e6, 30, 1e-3, m);
    }

    [[nodiscard]] std::size_t size() const { return frequencies.size(); }
    [[nodiscard]] double sample_rate() const { return 1.0 / symbol_interval; }
    [[nodiscard]] double carrier() const {
        return 0.5 * (frequencies.front() + frequencies.back());
    }

    void validate() const {
        detail::require(frequencies.size() >= 2, ErrorCode::invalid_argument,
                        "grid needs at least 2 subcarriers");
        for (std::size_t i = 1; i < frequencies.size(); ++i) {
            detail::require(frequencies[i] > frequencies[i - 1], ErrorCode::invalid_argument,
                            "subcarrier frequencies must be strictly increasing");
        }
        detail::require(symbol_interval > 0.0, ErrorCode::invalid_argument,
                        "symbol interval must be positive");
        detail::require(num_symbols >= 2, ErrorCode::invalid_argument,
                        "grid needs at least 2 symbols");
    }

    friend bool operator==(const SubcarrierGrid&, const SubcarrierGrid&) = default;
};

struct StaticPath {
    cplx attenuation{1.0, 0.0};
    double delay = 0.0; ///< seconds
};

struct DynamicPath {
    cplx attenuation{0.3, 0.0};
    double delay = 0.0;   ///< seconds
    double doppler = 0.0; ///< Hz
};

struct ClockImpairment {
    std::vector<double> timing_offsets; ///< seconds, one per symbol
    std::vector<double> cfo_phases;     ///< radians, one per symbol
    double hardware_phase = 0.0;        ///< radians
    double noise_power = 0.0;           ///< linear, per complex sample

    /// No clock distortion and no noise for m symbols.
    static ClockImpairment none(std::size_t m) {
        ClockImpairment imp;
        imp.timing_offsets.assign(m, 0.0);
        imp.cfo_phases.assign(m, 0.0);
        return imp;
    }
};

struct PathScene {
    SubcarrierGrid grid;
    std::vector<StaticPath> static_paths;
    std::vector<DynamicPath> dynamic_paths;
    ClockImpairment impairment;

    void validate() const {
        grid.validate();
        detail::require(!static_paths.empty(), ErrorCode::invalid_argument,
                        "scene needs at least one static path");
        for (const auto& p : static_paths) {
            detail::require(p.delay >= 0.0, ErrorCode::invalid_argument,
                            "static path delay must be nonnegative");
        }
        const double nyquist = 0.5 / grid.symbol_interval;
        for (const auto& p : dynamic_paths) {
            detail::require(p.delay >= 0.0, ErrorCode::invalid_argument,
                            "dynamic path delay must be nonnegative");
            detail::require(std::abs(p.doppler) < nyquist, ErrorCode::doppler_beyond_nyquist,
                            "doppler " + std::to_string(p.doppler) + " Hz beyond Nyquist");
        }
        detail::require(impairment.timing_offsets.size() == grid.num_symbols &&
                            impairment.cfo_phases.size() == grid.num_symbols,
                        ErrorCode::dimension_mismatch,
                        "impairment vectors must have one entry per symbol");
        detail::require(impairment.noise_power >= 0.0, ErrorCode::invalid_argument,
                        "noise power must be nonnegative");
    }
};

struct CsiFrame {
    CMatrix samples; ///< N x M, subcarrier by symbol
    SubcarrierGrid grid;

    [[nodiscard]] std::size_t subcarriers() const { return static_cast<std::size_t>(samples.rows()); }
    [[nodiscard]] std::size_t symbols() const { return static_cast<std::size_t>(samples.cols()); }

    void validate() const {
        grid.validate();
        detail::require(samples.rows() == static_cast<Eigen::Index>(grid.size()) &&
                            samples.cols() == static_cast<Eigen::Index>(grid.num_symbols),
                        ErrorCode::dimension_mismatch, "frame dimensions do not match grid");
        detail::require(samples.allFinite(), ErrorCode::invalid_argument,
                        "frame contains non-finite samples");
    }
};

/// Noiseless channel H_S[i] + H_X[i][j], without clock impairments.
inline CMatrix channel_response(const PathScene& scene) {
    const auto& g = scene.grid;
    const auto n = static_cast<Eigen::Index>(g.size());
    const auto m = static_cast<Eigen::Index>(g.num_symbols);
    CMatrix h = CMatrix::Zero(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double f = g.frequencies[static_cast<std::size_t>(i)];
        cplx hs{0.0, 0.0};
        for (const auto& p : scene.static_paths) {
            hs += p.attenuation * std::polar(1.0, -kTwoPi * f * p.delay);
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            cplx hx{0.0, 0.0};
            const double t = static_cast<double>(j) * g.symbol_interval;
            for (const auto& p : scene.dynamic_paths) {
                hx += p.attenuation * std::polar(1.0, -kTwoPi * (f * p.delay + p.doppler * t));
            }
            h(i, j) = hs + hx;
        }
    }
    return h;
}

inline CsiFrame generate_csi(const PathScene& scene, std::uint64_t rng_seed) {
    scene.validate();
    const auto& g = scene.grid;
    const auto& imp = scene.impairment;
    CsiFrame frame{channel_response(scene), g};
    const auto n = frame.samples.rows();
    const auto m = frame.samples.cols();
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto js = static_cast<std::size_t>(j);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double f = g.frequencies[static_cast<std::size_t>(i)];
            const double phase = kTwoPi * f * imp.timing_offsets[js] + imp.cfo_phases[js] +
                                 imp.hardware_phase;
            frame.samples(i, j) *= std::polar(1.0, -phase);
        }
    }
    if (imp.noise_power > 0.0) {
        std::mt19937_64 rng(rng_seed);
        std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * imp.noise_power));
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const double re = normal(rng);
                const double im = normal(rng);
                frame.samples(i, j) += cplx(re, im);
            }
        }
    }
    return frame;
}

/// Per-symbol i.i.d. timing offsets in [0, to_scale] and CFO phases in
/// [0, 2 pi), plus one hardware phase in [0, 2 pi). Noise power is left at 0.
inline ClockImpairment random_impairment(std::size_t m, double to_scale, std::uint64_t rng_seed) {
    detail::require(m >= 1, ErrorCode::invalid_argument, "need at least one symbol");
    detail::require(to_scale >= 0.0, ErrorCode::invalid_argument, "timing scale must be >= 0");
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ClockImpairment imp;
    imp.timing_offsets.resize(m);
    imp.cfo_phases.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        imp.timing_offsets[j] = to_scale * unit(rng);
        imp.cfo_phases[j] = kTwoPi * unit(rng);
    }
    imp.hardware_phase = kTwoPi * unit(rng);
    return imp;
}

/// Mean received power per sample of the noiseless scene (paths add in power
/// on average over random phases).
inline double mean_signal_power(const PathScene& scene) {
    double p = 0.0;
    for (const auto& s : scene.static_paths) {
        p += std::norm(s.attenuation);
    }
    for (const auto& d : scene.dynamic_paths) {
        p += std::norm(d.attenuation);
    }
    return p;
}

/// Noise power giving the requested SNR relative to mean_signal_power.
inline double noise_power_for_snr(const PathScene& scene, double snr_db) {
    return mean_signal_power(scene) * std::pow(10.0, -snr_db / 10.0);
}

/// Columns [start, start + count) of a frame, with the grid adjusted.
inline CsiFrame slice_symbols(const CsiFrame& frame, std::size_t start, std::size_t count) {
    detail::require(start + count <= frame.symbols(), ErrorCode::index_out_of_range,
                    "symbol slice exceeds frame");
    CsiFrame out;
    out.samples = frame.samples.middleCols(static_cast<Eigen::Index>(start),
                                           static_cast<Eigen::Index>(count));
    out.grid = frame.grid;
    out.grid.num_symbols = count;
    return out;
}

/// Splits a long capture into CPIs of `length` symbols advancing by `stride`.
inline std::vector<CsiFrame> split_cpis(const CsiFrame& frame, std::size_t length,
                                        std::size_t stride) {
    detail::require(length >= 2 && stride >= 1, ErrorCode::invalid_argument,
                    "CPI length must be >= 2 and stride >= 1");
    detail::require(frame.symbols() >= length, ErrorCode::invalid_argument,
                    "frame shorter than one CPI");
    std::vector<CsiFrame> cpis;
    for (std::size_t start = 0; start + length <= frame.symbols(); start += stride) {
        cpis.push_back(slice_symbols(frame, start, length));
    }
    return cpis;
}

/// Reference scene: unit direct path plus one reflector 0.3 in amplitude at
/// 8 m excess range moving with +40 Hz Doppler. No impairment, no noise.
inline PathScene canonical_scene(const SubcarrierGrid& grid) {
    PathScene scene;
    scene.grid = grid;
    scene.static_paths.push_back({{1.0, 0.0}, 0.0});
    scene.dynamic_paths.push_back({{0.3, 0.0}, 8.0 / kSpeedOfLight, 40.0});
    scene.impairment = ClockImpairment::none(grid.num_symbols);
    return scene;
}

} // namespace bisense
