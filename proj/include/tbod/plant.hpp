#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tbod/geom3d.hpp"

namespace tbod {

/// True rover state. Everything is expressed in the global frame; `b` is the
/// (constant) accelerometer bias, `w` the angular velocity.
struct PlantState {
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 b = Vec3::Zero();
    Quaternion q;
    Vec3 w = Vec3::Zero();

    bool all_finite() const;
};

/// Body-frame inputs at one instant.
struct InputSample {
    Vec3 accel = Vec3::Zero();          ///< linear acceleration u_a, m/s^2
    Vec3 angular_accel = Vec3::Zero();  ///< angular acceleration u_w, rad/s^2
};

using InputSignal = std::function<InputSample(double t)>;

InputSignal zero_input();

struct AnchorMap {
    std::vector<Vec3> positions;

    std::size_t size() const { return positions.size(); }
    Vec3 centroid() const;
    /// All anchors lie on one plane (within 1e-9 m), which leaves a mirror
    /// ambiguity for trilateration; local solvers still work off the plane.
    bool coplanar() const;
    /// Throws InvalidConfig when N < 4 or the anchors are collinear.
    void validate() const;

    /// Anchor field of the indoor lab experiment (four anchors at 2 m height).
    static AnchorMap lab_default();
};

/// Body-frame offsets of the three UWB tags; their barycenter is the body origin.
struct TagGeometry {
    std::array<Vec3, 3> offsets{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};

    /// Throws InvalidConfig when the tags are collinear or off-barycenter.
    void validate() const;

    /// Equilateral triangle in the body x-y plane, centred on the origin.
    static TagGeometry equilateral(double side);
};

struct SensorSetup {
    AnchorMap anchors;
    TagGeometry tags;
};

struct NoiseConfig {
    double sigma_a = 0.05;  ///< accelerometer, m/s^2
    double sigma_w = 0.01;  ///< gyroscope, rad/s
    double sigma_d = 0.2;   ///< UWB range, m
    double sigma_b = 0.1;   ///< accelerometer bias draw, m/s^2
    std::uint64_t seed = 0;

    static NoiseConfig none(std::uint64_t seed = 0) { return {0.0, 0.0, 0.0, 0.0, seed}; }
};

/// One acquisition instant. Ranges are ordered tag-major: index = tag * N + anchor.
struct MeasurementFrame {
    double t = 0.0;
    Vec3 ya = Vec3::Zero();
    Vec3 yw = Vec3::Zero();
    std::optional<Eigen::VectorXd> ranges;

    bool has_uwb() const { return ranges.has_value(); }
};

struct TrajectoryRecord {
    double t = 0.0;
    PlantState state;
    MeasurementFrame frame;
};

struct TrajectoryMeta {
    double dt_a = 0.01;
    double dt_d = 0.05;
    SensorSetup setup;
    NoiseConfig noise;
    std::uint64_t seed = 0;

    /// UWB-to-IMU period ratio; throws GridError when it is not an integer >= 1.
    int uwb_ratio() const;
};

/// Records k = 1..K sit at t_k = t0 + k * dt_a; `initial` is the state at t0.
struct Trajectory {
    TrajectoryMeta meta;
    double t0 = 0.0;
    PlantState initial;
    std::vector<TrajectoryRecord> records;

    std::size_t uwb_count() const;
};

struct SimulationGrid {
    double dt_a = 0.01;
    double dt_d = 0.05;
    double duration = 1.0;
};

std::array<Vec3, 3> tag_positions(const Vec3& p, const Quaternion& q, const TagGeometry& tags);

/// Noise-free tag-to-anchor distances, tag-major.
Eigen::VectorXd true_ranges(const Vec3& p, const Quaternion& q, const SensorSetup& setup);

/// One classical RK4 step of the nominal flow map starting at time t.
PlantState flow_step(const PlantState& s, const InputSignal& u, double t, double dt);

/// IMU sample (always) and the range block (when `at_uwb_tick`). Noise draws
/// come from `rng` in a fixed order: accelerometer, gyroscope, ranges.
MeasurementFrame sample_outputs(const PlantState& s, const InputSample& u, const SensorSetup& setup,
                                const NoiseConfig& noise, std::mt19937_64& rng, bool at_uwb_tick);

/// Simulates the hybrid plant from `initial` (whose bias is overwritten by a
/// draw from N(0, sigma_b) per axis). Deterministic for a fixed noise seed.
Trajectory simulate(const InputSignal& u, const PlantState& initial, const NoiseConfig& noise,
                    const SensorSetup& setup, const SimulationGrid& grid);

}  // namespace tbod
