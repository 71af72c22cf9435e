#include "tbod/particle_filter.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "tbod/errors.hpp"

namespace tbod {

namespace {

Vec3 gaussian3(std::normal_distribution<double>& n01, std::mt19937_64& rng, double sigma) {
    const double x = n01(rng);
    const double y = n01(rng);
    const double z = n01(rng);
    return sigma * Vec3(x, y, z);
}

}  // namespace

ParticleSet pf_init(const PlantState& mean, std::size_t n, const PfInitSpread& spread, std::mt19937_64& rng) {
    if (n == 0) {
        throw InvalidConfig("particle count must be positive");
    }
    std::normal_distribution<double> n01(0.0, 1.0);
    ParticleSet ps;
    ps.particles.resize(n);
    ps.weights.assign(n, 1.0 / static_cast<double>(n));
    for (auto& pt : ps.particles) {
        pt.p = mean.p + gaussian3(n01, rng, spread.position);
        pt.v = mean.v + gaussian3(n01, rng, spread.velocity);
        pt.b = mean.b + gaussian3(n01, rng, spread.bias);
        const double roll = spread.attitude_tilt * n01(rng);
        const double pitch = spread.attitude_tilt * n01(rng);
        const double yaw = spread.attitude_yaw * n01(rng);
        pt.q = q_mul(from_rotation_vector(Vec3(roll, pitch, yaw)), mean.q);
    }
    return ps;
}

double effective_sample_size(const std::vector<double>& weights) {
    double s2 = 0.0;
    for (double w : weights) {
        s2 += w * w;
    }
    return s2 > 0.0 ? 1.0 / s2 : 0.0;
}

std::vector<std::size_t> systematic_resample(const std::vector<double>& weights, double u0) {
    const std::size_t n = weights.size();
    if (n == 0) {
        throw InvalidConfig("cannot resample an empty particle set");
    }
    if (!(u0 >= 0.0 && u0 < 1.0)) {
        throw InvalidConfig("systematic resampling offset must lie in [0, 1)");
    }
    std::vector<std::size_t> idx(n);
    double cumulative = weights[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (u0 + static_cast<double>(i)) / static_cast<double>(n);
        while (u >= cumulative && j + 1 < n) {
            ++j;
            cumulative += weights[j];
        }
        idx[i] = j;
    }
    return idx;
}

void pf_propagate(ParticleSet& ps, const MeasurementFrame& frame, double dt, const PfConfig& cfg,
                  std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    for (auto& pt : ps.particles) {
        const Vec3 ya = frame.ya + gaussian3(n01, rng, cfg.accel_noise);
        const Vec3 yw = frame.yw + gaussian3(n01, rng, cfg.gyro_noise);
        const Mat3 r = to_rotation_matrix(pt.q);
        const Vec3 acc = r * ya - pt.b;
        pt.p += pt.v * dt + 0.5 * acc * dt * dt;
        pt.v += acc * dt;
        pt.b += gaussian3(n01, rng, cfg.bias_jitter);
        pt.q = q_mul(from_rotation_vector(r * yw * dt), pt.q);
    }
}

void pf_weight(ParticleSet& ps, const Eigen::VectorXd& ranges, const SensorSetup& setup, const NoiseConfig& noise) {
    const std::size_t n = setup.anchors.size();
    if (static_cast<std::size_t>(ranges.size()) != 3 * n) {
        throw InvalidConfig("particle filter expected " + std::to_string(3 * n) + " ranges");
    }
    const double var = std::max(noise.sigma_d * noise.sigma_d, 1e-12);
    double total = 0.0;
    for (std::size_t k = 0; k < ps.size(); ++k) {
        const Eigen::VectorXd pred = true_ranges(ps.particles[k].p, ps.particles[k].q, setup);
        const double sq = (ranges - pred).squaredNorm();
        ps.weights[k] *= std::exp(-0.5 * sq / var);
        total += ps.weights[k];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        ++ps.collapses;
        ps.weights.assign(ps.size(), 1.0 / static_cast<double>(ps.size()));
        return;
    }
    for (double& w : ps.weights) {
        w /= total;
    }
}

void pf_maybe_resample(ParticleSet& ps, const PfConfig& cfg, std::mt19937_64& rng) {
    const auto n = static_cast<double>(ps.size());
    if (effective_sample_size(ps.weights) >= cfg.resample_threshold * n) {
        return;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto idx = systematic_resample(ps.weights, unit(rng));
    std::vector<Particle> next;
    next.reserve(ps.size());
    for (std::size_t i : idx) {
        next.push_back(ps.particles[i]);
    }
    ps.particles = std::move(next);
    ps.weights.assign(ps.size(), 1.0 / n);
    ++ps.resamplings;
}

void pf_step(ParticleSet& ps, const MeasurementFrame& frame, double dt, const SensorSetup& setup,
             const NoiseConfig& noise, const PfConfig& cfg, std::mt19937_64& rng) {
    pf_propagate(ps, frame, dt, cfg, rng);
    if (frame.has_uwb()) {
        pf_weight(ps, *frame.ranges, setup, noise);
        pf_maybe_resample(ps, cfg, rng);
    }
    for (const auto& pt : ps.particles) {
        if (!pt.p.allFinite() || !pt.v.allFinite() || !pt.q.coeffs().allFinite()) {
            throw NonFiniteState("particle filter produced a non-finite particle at t=" + std::to_string(frame.t));
        }
    }
}

PfEstimate pf_estimate(const ParticleSet& ps) {
    PfEstimate out;
    Mat4 m = Mat4::Zero();
    for (std::size_t k = 0; k < ps.size(); ++k) {
        const double w = ps.weights[k];
        out.p += w * ps.particles[k].p;
        out.v += w * ps.particles[k].v;
        out.b += w * ps.particles[k].b;
        const Vec4& q = ps.particles[k].q.coeffs();
        m += w * q * q.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Mat4> eig(m);
    out.q = Quaternion(Vec4(eig.eigenvectors().col(3)));
    return out;
}

}  // namespace tbod
