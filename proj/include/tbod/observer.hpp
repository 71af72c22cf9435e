#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tbod/plant.hpp"
#include "tbod/procrustes.hpp"
#include "tbod/trilateration.hpp"

namespace tbod {

using Vec9 = Eigen::Matrix<double, 9, 1>;

struct ObserverState {
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 b = Vec3::Zero();
    Vec3 a = Vec3::Zero();  ///< filtered global-frame acceleration (bias included)
    Quaternion q;
    Vec3 w = Vec3::Zero();  ///< filtered global-frame angular velocity

    bool all_finite() const;
};

/// Six scalars: k1..k3 scale the position mismatch into p, v, b; k4..k6 are the
/// per-axis (roll, pitch, yaw) orientation injection weights.
struct GainSet {
    std::array<double, 6> k{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};

    Mat3 K1() const { return k[0] * Mat3::Identity(); }
    Mat3 K2() const { return k[1] * Mat3::Identity(); }
    Mat3 K3() const { return k[2] * Mat3::Identity(); }
    Mat3 K4() const { return Vec3(k[3], k[4], k[5]).asDiagonal(); }
    /// Stacked [K1; K2; K3], 9x3.
    Eigen::Matrix<double, 9, 3> K() const;

    static GainSet from(const std::array<double, 6>& values) { return GainSet{values}; }
    /// Heuristic starting point for tuning.
    static GainSet heuristic() { return GainSet{{0.5, 0.5, 0.0, 1.0, 1.0, 1.0}}; }
    /// Values reported for the lab rover.
    static GainSet lab_reported() { return GainSet{{0.91, 2.17, -0.71, 0.98, 0.98, 0.98}}; }
};

struct ObserverConfig {
    double alpha = 20.0;  ///< 1/s
    GainSet gains;
    TrilaterationConfig trilateration;
};

struct ErrorSample {
    Vec9 e_p = Vec9::Zero();  ///< [p - p_hat; v - v_hat; b - b_hat]
    Quaternion e_q;           ///< q^-1 (x) q_hat
    EulerAngles e_euler;      ///< q2a(e_q), for reporting
};

ErrorSample error_of(const PlantState& truth, const ObserverState& est);

/// Continuous part of the hybrid observer over one IMU period (RK4).
ObserverState flow(const ObserverState& s, const MeasurementFrame& frame, const ObserverConfig& cfg, double dt);

/// g(y_d) and delta(y_d) for one range block, initialized from the current estimate.
struct Injection {
    Vec3 position;
    EulerAngles orientation;
    TrilaterationResult trilateration;
};

Injection measure(const ObserverState& s, const Eigen::VectorXd& ranges, const SensorSetup& setup,
                  const ObserverConfig& cfg);

/// Apply the jump map given an already computed injection. Pure algebra.
ObserverState apply_jump(const ObserverState& s, const Injection& inj, const GainSet& gains);

struct JumpOutcome {
    ObserverState state;
    bool applied = false;
    std::string error;  ///< set when the injection failed and the state was held
    std::optional<Injection> injection;
};

/// Discrete part: position/velocity/bias reset through the trilateration
/// mismatch and orientation blend toward the Procrustes orientation. A failed
/// trilateration or fit leaves the state unchanged.
JumpOutcome jump(const ObserverState& s, const Eigen::VectorXd& ranges, const SensorSetup& setup,
                 const ObserverConfig& cfg);

struct ObserverSample {
    double t = 0.0;
    ObserverState state;
    ErrorSample error;
    bool jumped = false;
    /// Innovation ranges (measured minus predicted from the pre-jump estimate), UWB ticks only.
    std::optional<Eigen::VectorXd> range_residual;
};

struct RunResult {
    std::vector<ObserverSample> samples;
    std::size_t skipped_jumps = 0;
};

/// Predicted ranges from an estimate.
Eigen::VectorXd predicted_ranges(const ObserverState& s, const SensorSetup& setup);

/// Flow at every IMU frame; jump right after the flow on UWB frames.
RunResult run(const Trajectory& traj, const ObserverConfig& cfg, const ObserverState& init);

/// Observer state at `truth`, with the filtered signals seeded from one IMU frame.
ObserverState observer_state_from(const PlantState& truth, const MeasurementFrame& frame);

/// Same as above, then shifted by `position_offset` metres along global x and
/// by `yaw_offset` radians about global z.
ObserverState offset_init(const PlantState& truth, const MeasurementFrame& frame, double position_offset,
                          double yaw_offset);

/// Start state used for a trajectory: truth at t0 plus the given offsets.
ObserverState trajectory_init(const Trajectory& traj, double position_offset, double yaw_offset);

}  // namespace tbod
