#include "tbod/plant.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tbod/errors.hpp"

namespace tbod {

namespace {

using StateVec = Eigen::Matrix<double, 16, 1>;

StateVec pack(const PlantState& s) {
    StateVec x;
    x << s.p, s.v, s.b, s.q.coeffs(), s.w;
    return x;
}

// Quaternion slots are integrated unnormalized inside the RK stages.
Mat3 rotation_of(const Vec4& c) {
    const Vec4 n = c.normalized();
    return to_rotation_matrix(Quaternion(n));
}

StateVec derivative(const StateVec& x, const InputSample& u) {
    const Vec4 q = x.segment<4>(9);
    const Vec3 w = x.segment<3>(13);
    const Mat3 r = rotation_of(q);
    StateVec dx;
    dx.segment<3>(0) = x.segment<3>(3);
    dx.segment<3>(3) = r * u.accel;
    dx.segment<3>(6).setZero();
    dx.segment<4>(9) = 0.5 * omega_matrix(w) * q;
    dx.segment<3>(13) = r * u.angular_accel;
    return dx;
}

double triangle_area_x2(const Vec3& a, const Vec3& b, const Vec3& c) { return ((b - a).cross(c - a)).norm(); }

}  // namespace

bool PlantState::all_finite() const {
    return p.allFinite() && v.allFinite() && b.allFinite() && q.coeffs().allFinite() && w.allFinite();
}

InputSignal zero_input() {
    return [](double) { return InputSample{}; };
}

Vec3 AnchorMap::centroid() const {
    Vec3 c = Vec3::Zero();
    for (const auto& a : positions) {
        c += a;
    }
    return positions.empty() ? c : Vec3(c / static_cast<double>(positions.size()));
}

namespace {

Eigen::Vector3d centered_singular_values(const std::vector<Vec3>& pts, const Vec3& center) {
    Eigen::MatrixXd m(3, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        m.col(static_cast<Eigen::Index>(i)) = pts[i] - center;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    Eigen::Vector3d sv = Eigen::Vector3d::Zero();
    for (Eigen::Index i = 0; i < svd.singularValues().size() && i < 3; ++i) {
        sv[i] = svd.singularValues()[i];
    }
    return sv;
}

}  // namespace

bool AnchorMap::coplanar() const { return centered_singular_values(positions, centroid())[2] < 1e-9; }

void AnchorMap::validate() const {
    if (positions.size() < 4) {
        throw InvalidConfig("anchor map needs at least 4 anchors, got " + std::to_string(positions.size()));
    }
    for (const auto& a : positions) {
        if (!a.allFinite()) {
            throw InvalidConfig("anchor position is not finite");
        }
    }
    if (centered_singular_values(positions, centroid())[1] < 1e-9) {
        throw InvalidConfig("anchors are collinear");
    }
}

AnchorMap AnchorMap::lab_default() {
    return AnchorMap{{Vec3(-0.40, 4.20, 2.0), Vec3(-0.40, -1.80, 2.0), Vec3(2.48, -2.20, 2.0),
                      Vec3(2.80, -4.20, 2.0)}};
}

void TagGeometry::validate() const {
    const Vec3 bary = (offsets[0] + offsets[1] + offsets[2]) / 3.0;
    if (bary.norm() > 1e-12) {
        throw InvalidConfig("tag barycenter must coincide with the body origin");
    }
    if (triangle_area_x2(offsets[0], offsets[1], offsets[2]) < 1e-9) {
        throw InvalidConfig("tag offsets are collinear");
    }
}

TagGeometry TagGeometry::equilateral(double side) {
    const double r = side / std::sqrt(3.0);
    TagGeometry g;
    for (int i = 0; i < 3; ++i) {
        const double a = 2.0 * std::numbers::pi * i / 3.0;
        g.offsets[static_cast<std::size_t>(i)] = Vec3(r * std::cos(a), r * std::sin(a), 0.0);
    }
    // Remove the rounding residue so the barycenter is the origin to the last bit.
    const Vec3 bary = (g.offsets[0] + g.offsets[1] + g.offsets[2]) / 3.0;
    for (auto& o : g.offsets) {
        o -= bary;
    }
    return g;
}

int TrajectoryMeta::uwb_ratio() const {
    if (!(dt_a > 0.0) || !(dt_d > 0.0)) {
        throw GridError("sampling periods must be positive");
    }
    const double ratio = dt_d / dt_a;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9) {
        throw GridError("dt_d is not an integer multiple of dt_a");
    }
    return static_cast<int>(rounded);
}

std::size_t Trajectory::uwb_count() const {
    std::size_t n = 0;
    for (const auto& r : records) {
        n += r.frame.has_uwb() ? 1 : 0;
    }
    return n;
}

std::array<Vec3, 3> tag_positions(const Vec3& p, const Quaternion& q, const TagGeometry& tags) {
    const Mat3 r = to_rotation_matrix(q);
    return {p + r * tags.offsets[0], p + r * tags.offsets[1], p + r * tags.offsets[2]};
}

Eigen::VectorXd true_ranges(const Vec3& p, const Quaternion& q, const SensorSetup& setup) {
    const auto tags = tag_positions(p, q, setup.tags);
    const auto n = static_cast<Eigen::Index>(setup.anchors.size());
    Eigen::VectorXd d(3 * n);
    for (Eigen::Index z = 0; z < 3; ++z) {
        for (Eigen::Index i = 0; i < n; ++i) {
            d[z * n + i] = (setup.anchors.positions[static_cast<std::size_t>(i)] - tags[static_cast<std::size_t>(z)]).norm();
        }
    }
    return d;
}

PlantState flow_step(const PlantState& s, const InputSignal& u, double t, double dt) {
    const StateVec x = pack(s);
    const InputSample u0 = u(t);
    const InputSample um = u(t + 0.5 * dt);
    const InputSample u1 = u(t + dt);
    const StateVec k1 = derivative(x, u0);
    const StateVec k2 = derivative(x + 0.5 * dt * k1, um);
    const StateVec k3 = derivative(x + 0.5 * dt * k2, um);
    const StateVec k4 = derivative(x + dt * k3, u1);
    const StateVec xn = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    PlantState out;
    out.p = xn.segment<3>(0);
    out.v = xn.segment<3>(3);
    out.b = s.b;
    out.q = Quaternion(Vec4(xn.segment<4>(9)));
    out.w = xn.segment<3>(13);
    if (!xn.allFinite() || !out.all_finite()) {
        throw NonFiniteState("plant flow produced a non-finite state at t=" + std::to_string(t + dt));
    }
    return out;
}

MeasurementFrame sample_outputs(const PlantState& s, const InputSample& u, const SensorSetup& setup,
                                const NoiseConfig& noise, std::mt19937_64& rng, bool at_uwb_tick) {
    std::normal_distribution<double> unit(0.0, 1.0);
    auto draw3 = [&](double sigma) {
        Vec3 n;
        for (int i = 0; i < 3; ++i) {
            n[i] = sigma * unit(rng);
        }
        return n;
    };
    const Mat3 r = to_rotation_matrix(s.q);
    MeasurementFrame f;
    f.ya = u.accel + r.transpose() * s.b + draw3(noise.sigma_a);
    f.yw = r.transpose() * s.w + draw3(noise.sigma_w);
    if (at_uwb_tick) {
        Eigen::VectorXd d = true_ranges(s.p, s.q, setup);
        for (Eigen::Index i = 0; i < d.size(); ++i) {
            d[i] += noise.sigma_d * unit(rng);
        }
        f.ranges = std::move(d);
    }
    return f;
}

Trajectory simulate(const InputSignal& u, const PlantState& initial, const NoiseConfig& noise,
                    const SensorSetup& setup, const SimulationGrid& grid) {
    if (!(grid.duration > 0.0)) {
        throw InvalidConfig("simulation duration must be positive");
    }
    Trajectory traj;
    traj.meta.dt_a = grid.dt_a;
    traj.meta.dt_d = grid.dt_d;
    traj.meta.setup = setup;
    traj.meta.noise = noise;
    traj.meta.seed = noise.seed;
    const int ratio = traj.meta.uwb_ratio();

    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    PlantState s = initial;
    for (int i = 0; i < 3; ++i) {
        s.b[i] = noise.sigma_b * unit(rng);
    }
    traj.initial = s;
    traj.t0 = 0.0;

    const auto steps = static_cast<std::size_t>(std::llround(grid.duration / grid.dt_a));
    traj.records.reserve(steps);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t_prev = static_cast<double>(k - 1) * grid.dt_a;
        const double t = static_cast<double>(k) * grid.dt_a;
        s = flow_step(s, u, t_prev, grid.dt_a);
        // The timer tau resets every dt_d, i.e. a jump on every ratio-th IMU tick.
        const bool tick = k % static_cast<std::size_t>(ratio) == 0;
        MeasurementFrame f = sample_outputs(s, u(t), setup, noise, rng, tick);
        f.t = t;
        traj.records.push_back({t, s, std::move(f)});
    }
    return traj;
}

}  // namespace tbod
