#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "tbod/plant.hpp"

namespace tbod {

using Mat15 = Eigen::Matrix<double, 15, 15>;
using Vec15 = Eigen::Matrix<double, 15, 1>;

/// Error-state layout: [dp, dv, db, dtheta, dw]. The attitude error is a
/// global-frame rotation vector: q = exp(dtheta) (x) q_hat.
namespace ekf_index {
inline constexpr int p = 0;
inline constexpr int v = 3;
inline constexpr int b = 6;
inline constexpr int theta = 9;
inline constexpr int w = 12;
}  // namespace ekf_index

struct EkfState {
    PlantState mean;
    Mat15 P = Mat15::Identity();
    std::size_t gated = 0;  ///< range innovations whose NIS exceeded the gate so far
};

struct EkfConfig {
    /// Angular-acceleration noise density driving the angular-velocity state, (rad/s^2)^2 s.
    double angular_accel_psd = 1.0;
    /// Bias random-walk intensity, (m/s^2)^2 / s.
    double bias_walk = 1e-6;
    /// Chi-square gate on one-dimensional NIS (99.9 %). Innovations above it are counted, not rejected.
    double nis_gate = 10.83;
    bool use_gyro_update = true;
};

struct EkfInitSpread {
    double position = 1.0;                  ///< m
    double velocity = 0.1;                  ///< m/s
    double bias = 0.1;                      ///< m/s^2
    double attitude_tilt = 0.02;            ///< rad, roll and pitch
    double attitude_yaw = 0.35;             ///< rad
    double angular_velocity = 0.05;         ///< rad/s
};

EkfState ekf_init(const PlantState& mean, const EkfInitSpread& spread = {});

/// Propagates mean and covariance over one IMU period with the accelerometer as input.
EkfState ekf_predict(const EkfState& s, const Vec3& ya, double dt, const NoiseConfig& noise, const EkfConfig& cfg);
/// Gyroscope as a measurement of the angular-velocity state.
EkfState ekf_update_gyro(const EkfState& s, const Vec3& yw, const NoiseConfig& noise);
/// Sequential scalar updates, one per range.
EkfState ekf_update_ranges(const EkfState& s, const Eigen::VectorXd& ranges, const SensorSetup& setup,
                           const NoiseConfig& noise, const EkfConfig& cfg);

/// Predict, gyro update, then range updates when the frame carries them.
/// Throws NonFiniteState.
EkfState ekf_step(const EkfState& s, const MeasurementFrame& frame, double dt, const SensorSetup& setup,
                  const NoiseConfig& noise, const EkfConfig& cfg = {});

/// Range Jacobian rows with respect to the error state, tag-major.
Eigen::MatrixXd range_jacobian(const PlantState& mean, const SensorSetup& setup);

}  // namespace tbod
