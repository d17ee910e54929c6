// SPDX-License-Identifier: Apache-2.0
//
// Two-antenna reference methods for clock-phase removal: conjugate
// multiplication (CACC) and CSI ratio (CASR) between receive antennas that
// share one clock impairment.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "core.hpp"
#include "csi_sim.hpp"
#include "doppler.hpp"
#include "srcc.hpp"

namespace bisense {

struct DualAntennaFrame {
    CsiFrame antenna_a;
    CsiFrame antenna_b;
};

/// Generates both antennas with the same clock impairment. Antenna b draws its
/// receiver noise from seed + 1 so the two noise fields are independent.
inline DualAntennaFrame simulate_dual(PathScene scene_a, PathScene scene_b,
                                      const ClockImpairment& shared_impairment,
                                      std::uint64_t seed) {
    detail::require(scene_a.grid == scene_b.grid, ErrorCode::dimension_mismatch,
                    "antenna scenes must share a subcarrier grid");
    scene_a.impairment = shared_impairment;
    scene_b.impairment = shared_impairment;
    return {generate_csi(scene_a, seed), generate_csi(scene_b, seed + 1)};
}

/// Second-antenna scene for a uniform linear array: every path picks up the
/// phase exp(-i 2 pi d sin(theta) / lambda) for a random arrival angle theta
/// in [-pi/2, pi/2]. Magnitudes are unchanged, so static terms have equal
/// power on both antennas.
inline PathScene ula_neighbor(const PathScene& scene, double spacing_wavelengths,
                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(-0.5 * kPi, 0.5 * kPi);
    auto shift = [&] { return std::polar(1.0, -kTwoPi * spacing_wavelengths * std::sin(angle(rng))); };
    PathScene b = scene;
    for (auto& p : b.static_paths) {
        p.attenuation *= shift();
    }
    for (auto& p : b.dynamic_paths) {
        p.attenuation *= shift();
    }
    return b;
}

inline void validate_dual(const DualAntennaFrame& frame) {
    frame.antenna_a.validate();
    frame.antenna_b.validate();
    detail::require(frame.antenna_a.grid == frame.antenna_b.grid &&
                        frame.antenna_a.samples.rows() == frame.antenna_b.samples.rows() &&
                        frame.antenna_a.samples.cols() == frame.antenna_b.samples.cols(),
                    ErrorCode::dimension_mismatch, "antenna frames differ in shape");
}

/// CSI_a * conj(CSI_b).
inline SrccMatrix cacc(const DualAntennaFrame& frame) {
    validate_dual(frame);
    return {frame.antenna_a.samples.cwiseProduct(frame.antenna_b.samples.conjugate()),
            frame.antenna_a.grid};
}

/// CSI_a / CSI_b.
inline SrccMatrix casr(const DualAntennaFrame& frame) {
    validate_dual(frame);
    const CMatrix& b = frame.antenna_b.samples;
    const double floor = 1e-12 * detail::rms(b);
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
        for (Eigen::Index i = 0; i < b.rows(); ++i) {
            detail::require(std::abs(b(i, j)) > floor, ErrorCode::divisor_near_zero,
                            "antenna b sample near zero at (" + std::to_string(i) + ", " +
                                std::to_string(j) + ")");
        }
    }
    return {frame.antenna_a.samples.cwiseQuotient(b), frame.antenna_a.grid};
}

/// Doppler profile without any delay processing: per subcarrier, remove the
/// time mean and take the Doppler power spectrum; average the powers over
/// subcarriers and return their square root as a magnitude.
inline DopplerSpectrum subcarrier_doppler_profile(const SrccMatrix& m, double max_hz) {
    const DopplerAnalyzer analyzer(static_cast<std::size_t>(m.values.cols()),
                                   m.grid.sample_rate(), max_hz);
    RVector power = RVector::Zero(static_cast<Eigen::Index>(analyzer.axis().size()));
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        const CVector row = m.values.row(i).transpose();
        const CVector centered = row.array() - row.mean();
        power += analyzer.magnitudes(centered).array().square().matrix();
    }
    power /= static_cast<double>(m.values.rows());
    return {power.cwiseSqrt(), analyzer.axis()};
}

enum class BaselineMethod { cacc, casr };

inline BaselineMethod parse_baseline_method(const std::string& name) {
    if (name == "cacc") return BaselineMethod::cacc;
    if (name == "casr") return BaselineMethod::casr;
    throw Error(ErrorCode::invalid_argument, "unknown baseline method '" + name + "'");
}

inline SrccMatrix baseline_product(const DualAntennaFrame& frame, BaselineMethod method) {
    return method == BaselineMethod::cacc ? cacc(frame) : casr(frame);
}

/// Two-antenna capture of `scene`: antenna b is its half-wavelength ULA
/// neighbor (arrival angles from seed + 2) and both share scene.impairment.
inline DualAntennaFrame simulate_ula_pair(const PathScene& scene, std::uint64_t seed) {
    return simulate_dual(scene, ula_neighbor(scene, 0.5, seed + 2), scene.impairment, seed);
}

} // namespace bisense
