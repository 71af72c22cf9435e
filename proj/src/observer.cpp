#include "tbod/observer.hpp"

#include <cmath>
#include <string>

#include "tbod/errors.hpp"

namespace tbod {

namespace {

using StateVec = Eigen::Matrix<double, 19, 1>;

StateVec pack(const ObserverState& s) {
    StateVec x;
    x << s.p, s.v, s.b, s.a, s.q.coeffs(), s.w;
    return x;
}

StateVec derivative(const StateVec& x, const MeasurementFrame& frame, double alpha) {
    const Vec4 q = x.segment<4>(12);
    const Mat3 r = to_rotation_matrix(Quaternion(Vec4(q.normalized())));
    const Vec3 ya_global = r * frame.ya;
    const Vec3 yw_global = r * frame.yw;
    StateVec dx;
    dx.segment<3>(0) = x.segment<3>(3);
    dx.segment<3>(3) = x.segment<3>(9) - x.segment<3>(6);
    dx.segment<3>(6).setZero();
    dx.segment<3>(9) = alpha * (ya_global - x.segment<3>(9));
    dx.segment<4>(12) = 0.5 * omega_matrix(x.segment<3>(16)) * q;
    dx.segment<3>(16) = alpha * (yw_global - x.segment<3>(16));
    return dx;
}

}  // namespace

bool ObserverState::all_finite() const {
    return p.allFinite() && v.allFinite() && b.allFinite() && a.allFinite() && q.coeffs().allFinite() &&
           w.allFinite();
}

Eigen::Matrix<double, 9, 3> GainSet::K() const {
    Eigen::Matrix<double, 9, 3> out;
    out << K1(), K2(), K3();
    return out;
}

ErrorSample error_of(const PlantState& truth, const ObserverState& est) {
    ErrorSample e;
    e.e_p << truth.p - est.p, truth.v - est.v, truth.b - est.b;
    e.e_q = q_mul(q_inv(truth.q), est.q);
    e.e_euler = q2a(e.e_q);
    return e;
}

ObserverState flow(const ObserverState& s, const MeasurementFrame& frame, const ObserverConfig& cfg, double dt) {
    if (!(cfg.alpha > 0.0)) {
        throw InvalidConfig("observer filter rate alpha must be positive");
    }
    const StateVec x = pack(s);
    const StateVec k1 = derivative(x, frame, cfg.alpha);
    const StateVec k2 = derivative(x + 0.5 * dt * k1, frame, cfg.alpha);
    const StateVec k3 = derivative(x + 0.5 * dt * k2, frame, cfg.alpha);
    const StateVec k4 = derivative(x + dt * k3, frame, cfg.alpha);
    const StateVec xn = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    ObserverState out;
    out.p = xn.segment<3>(0);
    out.v = xn.segment<3>(3);
    out.b = s.b;
    out.a = xn.segment<3>(9);
    out.q = Quaternion(Vec4(xn.segment<4>(12)));
    out.w = xn.segment<3>(16);
    if (!xn.allFinite() || !out.all_finite()) {
        throw NonFiniteState("observer flow produced a non-finite state at t=" + std::to_string(frame.t));
    }
    return out;
}

Injection measure(const ObserverState& s, const Eigen::VectorXd& ranges, const SensorSetup& setup,
                  const ObserverConfig& cfg) {
    std::optional<std::pair<Vec3, Quaternion>> pose;
    if (s.p.allFinite() && (s.p - cfg.trilateration.fallback_init).norm() < cfg.trilateration.region_radius) {
        pose.emplace(s.p, s.q);
    }
    const TagPositions init = initial_guess(pose, setup.tags, cfg.trilateration);
    const DeltaResult d = delta(ranges, setup.anchors, init, setup.tags, cfg.trilateration);
    return {d.trilateration.barycenter, d.orientation.angles, d.trilateration};
}

ObserverState apply_jump(const ObserverState& s, const Injection& inj, const GainSet& gains) {
    ObserverState out = s;
    const Vec3 mismatch = inj.position - s.p;
    out.p = s.p + gains.K1() * mismatch;
    out.v = s.v + gains.K2() * mismatch;
    out.b = s.b + gains.K3() * mismatch;

    const Vec3 k4(gains.k[3], gains.k[4], gains.k[5]);
    if (k4.isZero(0.0)) {
        return out;
    }
    // Blend in Euler coordinates; the angle mismatch is taken on the circle so
    // a fractional gain moves along the short arc.
    const Vec3 current = q2a(s.q).as_vector();
    const Vec3 target = inj.orientation.as_vector();
    Vec3 mismatch_angles;
    for (int i = 0; i < 3; ++i) {
        mismatch_angles[i] = wrap_angle(target[i] - current[i]);
    }
    const Vec3 blended = current + gains.K4() * mismatch_angles;
    out.q = a2q(EulerAngles::from_vector(blended));
    return out;
}

JumpOutcome jump(const ObserverState& s, const Eigen::VectorXd& ranges, const SensorSetup& setup,
                 const ObserverConfig& cfg) {
    JumpOutcome out;
    try {
        Injection inj = measure(s, ranges, setup, cfg);
        out.state = apply_jump(s, inj, cfg.gains);
        out.applied = true;
        out.injection = std::move(inj);
    } catch (const Error& e) {
        out.state = s;
        out.error = e.what();
    }
    return out;
}

Eigen::VectorXd predicted_ranges(const ObserverState& s, const SensorSetup& setup) {
    return true_ranges(s.p, s.q, setup);
}

RunResult run(const Trajectory& traj, const ObserverConfig& cfg, const ObserverState& init) {
    RunResult out;
    out.samples.reserve(traj.records.size());
    ObserverState s = init;
    const double dt = traj.meta.dt_a;
    for (const auto& rec : traj.records) {
        s = flow(s, rec.frame, cfg, dt);
        ObserverSample sample;
        sample.t = rec.t;
        if (rec.frame.has_uwb()) {
            sample.range_residual = *rec.frame.ranges - predicted_ranges(s, traj.meta.setup);
            JumpOutcome j = jump(s, *rec.frame.ranges, traj.meta.setup, cfg);
            if (!j.applied) {
                ++out.skipped_jumps;
            }
            s = j.state;
            sample.jumped = j.applied;
        }
        sample.state = s;
        sample.error = error_of(rec.state, s);
        out.samples.push_back(std::move(sample));
    }
    return out;
}

ObserverState observer_state_from(const PlantState& truth, const MeasurementFrame& frame) {
    const Mat3 r = to_rotation_matrix(truth.q);
    ObserverState s;
    s.p = truth.p;
    s.v = truth.v;
    s.b = truth.b;
    s.a = r * frame.ya;
    s.q = truth.q;
    s.w = r * frame.yw;
    return s;
}

ObserverState offset_init(const PlantState& truth, const MeasurementFrame& frame, double position_offset,
                          double yaw_offset) {
    ObserverState s = observer_state_from(truth, frame);
    s.p.x() += position_offset;
    if (yaw_offset != 0.0) {
        s.q = q_mul(a2q({0.0, 0.0, yaw_offset}), truth.q);
        s.a = to_rotation_matrix(s.q) * frame.ya;
        s.w = to_rotation_matrix(s.q) * frame.yw;
    }
    return s;
}

ObserverState trajectory_init(const Trajectory& traj, double position_offset, double yaw_offset) {
    if (traj.records.empty()) {
        throw InvalidConfig("trajectory has no records");
    }
    return offset_init(traj.initial, traj.records.front().frame, position_offset, yaw_offset);
}

}  // namespace tbod
