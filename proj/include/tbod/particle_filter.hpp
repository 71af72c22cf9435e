#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tbod/plant.hpp"

namespace tbod {

struct Particle {
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 b = Vec3::Zero();
    Quaternion q;
};

struct ParticleSet {
    std::vector<Particle> particles;
    std::vector<double> weights;
    std::size_t collapses = 0;   ///< steps where every likelihood underflowed
    std::size_t resamplings = 0;

    std::size_t size() const { return particles.size(); }
};

struct PfConfig {
    std::size_t particles = 500;
    /// Resample when ESS < threshold * N.
    double resample_threshold = 0.5;
    /// Propagation noise. Larger than the sensor noise so resampled
    /// duplicates spread out again.
    double accel_noise = 1.0;   ///< m/s^2
    double gyro_noise = 0.02;   ///< rad/s
    double bias_jitter = 1e-3;  ///< m/s^2 per step
};

struct PfInitSpread {
    double position = 1.0;
    double velocity = 0.1;
    double bias = 0.1;
    double attitude_tilt = 0.02;
    double attitude_yaw = 0.35;
};

/// N particles drawn around `mean` (Gaussian per component), uniform weights.
ParticleSet pf_init(const PlantState& mean, std::size_t n, const PfInitSpread& spread, std::mt19937_64& rng);

/// Sum of weights squared, inverted.
double effective_sample_size(const std::vector<double>& weights);

/// Indices selected by systematic resampling with positions (u0 + i) / N, u0 in [0, 1).
std::vector<std::size_t> systematic_resample(const std::vector<double>& weights, double u0);

/// Accelerometer and gyroscope as inputs, perturbed by the configured process noise.
void pf_propagate(ParticleSet& ps, const MeasurementFrame& frame, double dt, const PfConfig& cfg,
                  std::mt19937_64& rng);
/// Multiplies weights by the Gaussian range likelihood and renormalizes. When
/// every product underflows the weights are reset to uniform and the event counted.
void pf_weight(ParticleSet& ps, const Eigen::VectorXd& ranges, const SensorSetup& setup, const NoiseConfig& noise);
/// Resamples when the ESS falls below the configured fraction of N.
void pf_maybe_resample(ParticleSet& ps, const PfConfig& cfg, std::mt19937_64& rng);

void pf_step(ParticleSet& ps, const MeasurementFrame& frame, double dt, const SensorSetup& setup,
             const NoiseConfig& noise, const PfConfig& cfg, std::mt19937_64& rng);

struct PfEstimate {
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 b = Vec3::Zero();
    Quaternion q;
};

/// Weighted means of p, v, b; orientation from the dominant eigenvector of sum w q q'.
PfEstimate pf_estimate(const ParticleSet& ps);

}  // namespace tbod
