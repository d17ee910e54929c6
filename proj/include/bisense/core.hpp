// SPDX-License-Identifier: Apache-2.0
//
// Shared numeric aliases, physical constants and the error type used across
// the bisense library.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace bisense {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class ErrorCode {
    invalid_argument,
    dimension_mismatch,
    doppler_beyond_nyquist,
    index_out_of_range,
    all_zero_profile,
    zero_windowed_energy,
    near_zero_static_mean,
    ill_conditioned,
    crop_exceeds_nyquist,
    inconsistent_axes,
    empty_search_region,
    coincident_points,
    divisor_near_zero,
    out_of_range_frequency,
    empty_output,
    empty_input,
    bad_magic,
    version_mismatch,
    truncated_payload,
    trailing_data,
    io_error,
    invalid_config,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::doppler_beyond_nyquist: return "DopplerBeyondNyquist";
    case ErrorCode::index_out_of_range: return "IndexOutOfRange";
    case ErrorCode::all_zero_profile: return "AllZeroProfile";
    case ErrorCode::zero_windowed_energy: return "ZeroWindowedEnergy";
    case ErrorCode::near_zero_static_mean: return "NearZeroStaticMean";
    case ErrorCode::ill_conditioned: return "IllConditioned";
    case ErrorCode::crop_exceeds_nyquist: return "CropExceedsNyquist";
    case ErrorCode::inconsistent_axes: return "InconsistentAxes";
    case ErrorCode::empty_search_region: return "EmptySearchRegion";
    case ErrorCode::coincident_points: return "CoincidentPoints";
    case ErrorCode::divisor_near_zero: return "DivisorNearZero";
    case ErrorCode::out_of_range_frequency: return "OutOfRangeFrequency";
    case ErrorCode::empty_output: return "EmptyOutput";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::bad_magic: return "BadMagic";
    case ErrorCode::version_mismatch: return "VersionMismatch";
    case ErrorCode::truncated_payload: return "TruncatedPayload";
    case ErrorCode::trailing_data: return "TrailingData";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::invalid_config: return "InvalidConfig";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code next to the human message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code),
          message_(message) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

namespace detail {

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) {
        throw Error(code, message);
    }
}

/// Root-mean-square magnitude of a complex matrix; 0 for an empty matrix.
inline double rms(const CMatrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    return std::sqrt(m.squaredNorm() / static_cast<double>(m.size()));
}

} // namespace detail

} // namespace bisense
