#include "tbod/ekf.hpp"

#include <cmath>
#include <string>

#include "tbod/errors.hpp"

namespace tbod {

namespace {

using namespace ekf_index;

void symmetrize(Mat15& p) { p = 0.5 * (p + p.transpose()).eval(); }

PlantState inject(const PlantState& m, const Vec15& dx) {
    PlantState out = m;
    out.p += dx.segment<3>(p);
    out.v += dx.segment<3>(v);
    out.b += dx.segment<3>(b);
    out.q = q_mul(from_rotation_vector(dx.segment<3>(theta)), m.q);
    out.w += dx.segment<3>(w);
    return out;
}

template <int M>
EkfState kalman_update(const EkfState& s, const Eigen::Matrix<double, M, 1>& innovation,
                       const Eigen::Matrix<double, M, 15>& h, const Eigen::Matrix<double, M, M>& r) {
    const Eigen::Matrix<double, M, M> sm = h * s.P * h.transpose() + r;
    const Eigen::Matrix<double, 15, M> k = s.P * h.transpose() * sm.inverse();
    const Mat15 ikh = Mat15::Identity() - k * h;
    EkfState out = s;
    out.P = ikh * s.P * ikh.transpose() + k * r * k.transpose();
    symmetrize(out.P);
    out.mean = inject(s.mean, k * innovation);
    return out;
}

void check_finite(const EkfState& s, const char* where) {
    if (!s.mean.all_finite() || !s.P.allFinite()) {
        throw NonFiniteState(std::string("EKF produced a non-finite state in ") + where);
    }
}

}  // namespace

EkfState ekf_init(const PlantState& mean, const EkfInitSpread& spread) {
    EkfState s;
    s.mean = mean;
    Vec15 d;
    d.segment<3>(p).setConstant(spread.position * spread.position);
    d.segment<3>(v).setConstant(spread.velocity * spread.velocity);
    d.segment<3>(b).setConstant(spread.bias * spread.bias);
    d.segment<3>(theta) << spread.attitude_tilt * spread.attitude_tilt, spread.attitude_tilt * spread.attitude_tilt,
        spread.attitude_yaw * spread.attitude_yaw;
    d.segment<3>(w).setConstant(spread.angular_velocity * spread.angular_velocity);
    s.P = d.asDiagonal();
    return s;
}

EkfState ekf_predict(const EkfState& s, const Vec3& ya, double dt, const NoiseConfig& noise, const EkfConfig& cfg) {
    const PlantState& m = s.mean;
    const Mat3 r = to_rotation_matrix(m.q);
    const Vec3 fa = r * ya;
    const Vec3 acc = fa - m.b;

    EkfState out = s;
    out.mean.p = m.p + m.v * dt + 0.5 * acc * dt * dt;
    out.mean.v = m.v + acc * dt;
    out.mean.q = q_mul(from_rotation_vector(m.w * dt), m.q);

    Mat15 f = Mat15::Zero();
    f.block<3, 3>(p, v) = Mat3::Identity();
    f.block<3, 3>(v, b) = -Mat3::Identity();
    f.block<3, 3>(v, theta) = -skew(fa);
    f.block<3, 3>(theta, theta) = skew(m.w);
    f.block<3, 3>(theta, w) = Mat3::Identity();
    const Mat15 fdt = f * dt;
    const Mat15 phi = Mat15::Identity() + fdt + 0.5 * fdt * fdt;

    const double sa2 = noise.sigma_a * noise.sigma_a;
    const double qw = cfg.angular_accel_psd;
    const Mat3 eye = Mat3::Identity();
    Mat15 q = Mat15::Zero();
    q.block<3, 3>(p, p) = 0.25 * std::pow(dt, 4) * sa2 * eye;
    q.block<3, 3>(p, v) = 0.5 * std::pow(dt, 3) * sa2 * eye;
    q.block<3, 3>(v, p) = q.block<3, 3>(p, v);
    q.block<3, 3>(v, v) = dt * dt * sa2 * eye;
    q.block<3, 3>(b, b) = cfg.bias_walk * dt * eye;
    q.block<3, 3>(theta, theta) = qw * std::pow(dt, 3) / 3.0 * eye;
    q.block<3, 3>(theta, w) = qw * dt * dt / 2.0 * eye;
    q.block<3, 3>(w, theta) = q.block<3, 3>(theta, w);
    q.block<3, 3>(w, w) = qw * dt * eye;

    out.P = phi * s.P * phi.transpose() + q;
    symmetrize(out.P);
    check_finite(out, "prediction");
    return out;
}

EkfState ekf_update_gyro(const EkfState& s, const Vec3& yw, const NoiseConfig& noise) {
    const Mat3 rt = to_rotation_matrix(s.mean.q).transpose();
    Eigen::Matrix<double, 3, 15> h = Eigen::Matrix<double, 3, 15>::Zero();
    h.block<3, 3>(0, theta) = rt * skew(s.mean.w);
    h.block<3, 3>(0, w) = rt;
    const Vec3 innovation = yw - rt * s.mean.w;
    const double var = std::max(noise.sigma_w * noise.sigma_w, 1e-12);
    const Mat3 r = var * Mat3::Identity();
    EkfState out = kalman_update<3>(s, innovation, h, r);
    check_finite(out, "gyro update");
    return out;
}

Eigen::MatrixXd range_jacobian(const PlantState& mean, const SensorSetup& setup) {
    const Mat3 rot = to_rotation_matrix(mean.q);
    const std::size_t n = setup.anchors.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(3 * n), 15);
    for (std::size_t z = 0; z < 3; ++z) {
        const Vec3 ro = rot * setup.tags.offsets[z];
        const Vec3 tag = mean.p + ro;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 diff = setup.anchors.positions[i] - tag;
            const double d = diff.norm();
            if (d < 1e-12) {
                throw NonFiniteState("EKF tag estimate coincides with an anchor");
            }
            const Vec3 u = diff / d;
            const auto row = static_cast<Eigen::Index>(z * n + i);
            h.block<1, 3>(row, p) = -u.transpose();
            h.block<1, 3>(row, theta) = u.transpose() * skew(ro);
        }
    }
    return h;
}

EkfState ekf_update_ranges(const EkfState& s, const Eigen::VectorXd& ranges, const SensorSetup& setup,
                           const NoiseConfig& noise, const EkfConfig& cfg) {
    const std::size_t n = setup.anchors.size();
    if (static_cast<std::size_t>(ranges.size()) != 3 * n) {
        throw InvalidConfig("EKF expected " + std::to_string(3 * n) + " ranges");
    }
    const double var = std::max(noise.sigma_d * noise.sigma_d, 1e-12);
    EkfState out = s;
    for (std::size_t z = 0; z < 3; ++z) {
        for (std::size_t i = 0; i < n; ++i) {
            const Mat3 rot = to_rotation_matrix(out.mean.q);
            const Vec3 ro = rot * setup.tags.offsets[z];
            const Vec3 diff = setup.anchors.positions[i] - (out.mean.p + ro);
            const double d = diff.norm();
            if (d < 1e-12) {
                throw NonFiniteState("EKF tag estimate coincides with an anchor");
            }
            const Vec3 u = diff / d;
            Eigen::Matrix<double, 1, 15> h = Eigen::Matrix<double, 1, 15>::Zero();
            h.block<1, 3>(0, p) = -u.transpose();
            h.block<1, 3>(0, theta) = u.transpose() * skew(ro);
            Eigen::Matrix<double, 1, 1> innovation;
            innovation[0] = ranges[static_cast<Eigen::Index>(z * n + i)] - d;
            Eigen::Matrix<double, 1, 1> r;
            r[0] = var;
            const double sv = (h * out.P * h.transpose())(0, 0) + var;
            if (innovation[0] * innovation[0] / sv > cfg.nis_gate) {
                ++out.gated;
            }
            out = kalman_update<1>(out, innovation, h, r);
        }
    }
    check_finite(out, "range update");
    return out;
}

EkfState ekf_step(const EkfState& s, const MeasurementFrame& frame, double dt, const SensorSetup& setup,
                  const NoiseConfig& noise, const EkfConfig& cfg) {
    EkfState out = ekf_predict(s, frame.ya, dt, noise, cfg);
    if (cfg.use_gyro_update) {
        out = ekf_update_gyro(out, frame.yw, noise);
    }
    if (frame.has_uwb()) {
        out = ekf_update_ranges(out, *frame.ranges, setup, noise, cfg);
    }
    return out;
}

}  // namespace tbod
