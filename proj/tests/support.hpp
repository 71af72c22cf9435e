#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "tbod/plant.hpp"

namespace tbod::testing {

inline constexpr double kPi = std::numbers::pi;

inline SensorSetup lab_setup(double side = 0.2) { return {AnchorMap::lab_default(), TagGeometry::equilateral(side)}; }

/// Uniform random rotation (Shoemake).
inline Quaternion random_quaternion(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    return Quaternion(a * std::sin(2 * kPi * u2), a * std::cos(2 * kPi * u2), b * std::sin(2 * kPi * u3),
                      b * std::cos(2 * kPi * u3));
}

/// Rover-like pose inside the anchor field: planar position, yaw anywhere,
/// small roll and pitch.
inline std::pair<Vec3, Quaternion> random_rover_pose(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> x(-0.2, 2.5), y(-3.5, 3.5), z(0.0, 0.6), yaw(-kPi, kPi), tilt(-0.1, 0.1);
    const Vec3 p(x(rng), y(rng), z(rng));
    return {p, a2q({tilt(rng), tilt(rng), yaw(rng)})};
}

inline double rotation_distance(const Mat3& a, const Mat3& b) { return (a - b).norm(); }

}  // namespace tbod::testing
