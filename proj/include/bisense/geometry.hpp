// SPDX-License-Identifier: Apache-2.0
//
// Planar bistatic geometry: Doppler-velocity projection of a moving target
// onto the transmitter/receiver bisector, and the bistatic excess range.

#pragma once

#include <cmath>

#include "core.hpp"

namespace bisense {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct BistaticGeometry {
    Vec2 tx;
    Vec2 rx;
    Vec2 target;
    Vec2 velocity;
    double carrier = 5.32e9; ///< Hz

    void validate() const {
        constexpr double kMinSeparation = 1e-12;
        detail::require(std::isfinite(tx.x) && std::isfinite(tx.y) && std::isfinite(rx.x) &&
                            std::isfinite(rx.y) && std::isfinite(target.x) &&
                            std::isfinite(target.y),
                        ErrorCode::invalid_argument, "geometry positions must be finite");
        detail::require(norm(target - tx) > kMinSeparation && norm(target - rx) > kMinSeparation,
                        ErrorCode::coincident_points, "target coincides with tx or rx");
        detail::require(carrier > 0.0, ErrorCode::invalid_argument, "carrier must be positive");
    }
};

/// Tx->target->Rx path length minus the Tx->Rx baseline, in meters.
inline double bistatic_excess_range(const BistaticGeometry& g) {
    g.validate();
    return norm(g.target - g.tx) + norm(g.target - g.rx) - norm(g.tx - g.rx);
}

/// Rate of change of the bistatic path length (m/s). Positive when the
/// Tx->target->Rx path lengthens.
inline double doppler_velocity(const BistaticGeometry& g) {
    g.validate();
    const Vec2 to_tx = g.target - g.tx;
    const Vec2 to_rx = g.target - g.rx;
    const Vec2 bisector = (1.0 / norm(to_tx)) * to_tx + (1.0 / norm(to_rx)) * to_rx;
    return dot(g.velocity, bisector);
}

/// Doppler frequency (Hz) corresponding to doppler_velocity at the carrier.
inline double doppler_frequency(const BistaticGeometry& g) {
    return doppler_velocity(g) * g.carrier / kSpeedOfLight;
}

} // namespace bisense
