#pragma once

#include <cstdint>
#include <vector>

#include "tbod/plant.hpp"

namespace tbod {

struct ProfileParams {
    Vec3 center{1.2, 0.0, 0.3};      ///< mean tag-barycenter position, m
    Vec3 amplitude{0.9, 2.2, 0.02};  ///< per-axis excursion budget, m
    int harmonics = 3;
    double min_period = 10.0;  ///< s
    double max_period = 40.0;  ///< s
    double segment = 4.0;      ///< duration of each constant yaw-rate segment, s
    double transition = 1.0;   ///< cosine blend between consecutive yaw rates, s
    double max_yaw_rate = 0.6; ///< rad/s
};

/**
 * Planar rover excitation: piecewise-constant yaw rate with smooth
 * transitions, plus smoothed random global-frame accelerations built from a
 * few random sinusoids so the path stays inside the anchor field.
 *
 * The body-frame inputs are derived from a closed-form reference motion, so
 * the plant driven from `initial_state()` tracks that reference to RK4
 * accuracy and every bound on the inputs is known analytically.
 */
class RoverProfile {
public:
    RoverProfile(const ProfileParams& params, std::uint64_t seed, double duration);

    InputSample operator()(double t) const;
    InputSignal signal() const;

    PlantState initial_state() const;

    Vec3 position(double t) const;
    Vec3 velocity(double t) const;
    Vec3 acceleration(double t) const;
    double yaw(double t) const;
    double yaw_rate(double t) const;
    double yaw_accel(double t) const;

    /// Upper bound on max{|u_a|, |u_w|, |du_a/dt|, |du_w/dt|}.
    double input_bound() const;

private:
    struct Sine {
        double amplitude;
        double omega;
        double phase;
    };
    struct Segment {
        double start;
        double rate_from;
        double rate_to;
        double yaw_at_start;
    };

    const Segment& segment_at(double t) const;

    ProfileParams params_;
    std::array<std::vector<Sine>, 3> axes_;
    std::vector<Segment> segments_;
};

}  // namespace tbod
