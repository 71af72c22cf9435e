#include "tbod/input_profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tbod/errors.hpp"

namespace tbod {

namespace {

constexpr double kPi = std::numbers::pi;

Mat3 yaw_rotation(double yaw) {
    const double c = std::cos(yaw), s = std::sin(yaw);
    Mat3 r;
    r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return r;
}

}  // namespace

RoverProfile::RoverProfile(const ProfileParams& params, std::uint64_t seed, double duration) : params_(params) {
    if (params.harmonics < 1 || !(params.min_period > 0.0) || params.max_period < params.min_period ||
        !(params.segment > params.transition) || !(params.transition > 0.0)) {
        throw InvalidConfig("invalid rover profile parameters");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int k = 0; k < 3; ++k) {
        std::vector<Sine> sines;
        double weight_sum = 0.0;
        for (int h = 0; h < params.harmonics; ++h) {
            const double period = params.min_period + (params.max_period - params.min_period) * unit(rng);
            const double weight = 0.5 + 0.5 * unit(rng);
            sines.push_back({weight, 2.0 * kPi / period, 2.0 * kPi * unit(rng)});
            weight_sum += weight;
        }
        for (auto& s : sines) {
            s.amplitude *= params.amplitude[k] / weight_sum;
        }
        axes_[static_cast<std::size_t>(k)] = std::move(sines);
    }

    const double yaw0 = kPi * (2.0 * unit(rng) - 1.0);
    const auto count = static_cast<std::size_t>(std::ceil(std::max(duration, 0.0) / params.segment)) + 2;
    double rate_prev = 0.0;
    double yaw_start = yaw0;
    const double blend = params.transition;
    for (std::size_t i = 0; i < count; ++i) {
        const double rate = params.max_yaw_rate * (2.0 * unit(rng) - 1.0);
        segments_.push_back({static_cast<double>(i) * params.segment, rate_prev, rate, yaw_start});
        // Closed-form yaw increment over the segment: blend, then constant rate.
        yaw_start += rate_prev * blend + 0.5 * (rate - rate_prev) * blend + rate * (params.segment - blend);
        rate_prev = rate;
    }
}

const RoverProfile::Segment& RoverProfile::segment_at(double t) const {
    const auto idx = static_cast<std::size_t>(std::clamp(std::floor(t / params_.segment), 0.0,
                                                         static_cast<double>(segments_.size() - 1)));
    return segments_[idx];
}

double RoverProfile::yaw(double t) const {
    const Segment& s = segment_at(t);
    const double tau = t - s.start;
    const double blend = params_.transition;
    const double dr = s.rate_to - s.rate_from;
    if (tau < blend) {
        return s.yaw_at_start + s.rate_from * tau + 0.5 * dr * (tau - blend / kPi * std::sin(kPi * tau / blend));
    }
    return s.yaw_at_start + s.rate_from * blend + 0.5 * dr * blend + s.rate_to * (tau - blend);
}

double RoverProfile::yaw_rate(double t) const {
    const Segment& s = segment_at(t);
    const double tau = t - s.start;
    const double blend = params_.transition;
    if (tau < blend) {
        return s.rate_from + 0.5 * (s.rate_to - s.rate_from) * (1.0 - std::cos(kPi * tau / blend));
    }
    return s.rate_to;
}

double RoverProfile::yaw_accel(double t) const {
    const Segment& s = segment_at(t);
    const double tau = t - s.start;
    const double blend = params_.transition;
    if (tau < blend) {
        return 0.5 * (s.rate_to - s.rate_from) * kPi / blend * std::sin(kPi * tau / blend);
    }
    return 0.0;
}

Vec3 RoverProfile::position(double t) const {
    Vec3 p = params_.center;
    for (int k = 0; k < 3; ++k) {
        for (const auto& s : axes_[static_cast<std::size_t>(k)]) {
            p[k] += s.amplitude * std::sin(s.omega * t + s.phase);
        }
    }
    return p;
}

Vec3 RoverProfile::velocity(double t) const {
    Vec3 v = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
        for (const auto& s : axes_[static_cast<std::size_t>(k)]) {
            v[k] += s.amplitude * s.omega * std::cos(s.omega * t + s.phase);
        }
    }
    return v;
}

Vec3 RoverProfile::acceleration(double t) const {
    Vec3 a = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
        for (const auto& s : axes_[static_cast<std::size_t>(k)]) {
            a[k] -= s.amplitude * s.omega * s.omega * std::sin(s.omega * t + s.phase);
        }
    }
    return a;
}

InputSample RoverProfile::operator()(double t) const {
    InputSample u;
    u.accel = yaw_rotation(yaw(t)).transpose() * acceleration(t);
    u.angular_accel = Vec3(0.0, 0.0, yaw_accel(t));
    return u;
}

InputSignal RoverProfile::signal() const {
    return [profile = *this](double t) { return profile(t); };
}

PlantState RoverProfile::initial_state() const {
    PlantState s;
    s.p = position(0.0);
    s.v = velocity(0.0);
    s.q = a2q({0.0, 0.0, yaw(0.0)});
    s.w = Vec3(0.0, 0.0, yaw_rate(0.0));
    return s;
}

double RoverProfile::input_bound() const {
    Vec3 acc = Vec3::Zero();
    Vec3 jerk = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
        for (const auto& s : axes_[static_cast<std::size_t>(k)]) {
            acc[k] += std::abs(s.amplitude) * s.omega * s.omega;
            jerk[k] += std::abs(s.amplitude) * s.omega * s.omega * s.omega;
        }
    }
    double max_step = 0.0;
    double max_rate = 0.0;
    for (const auto& s : segments_) {
        max_step = std::max(max_step, std::abs(s.rate_to - s.rate_from));
        max_rate = std::max(max_rate, std::abs(s.rate_to));
    }
    const double blend = params_.transition;
    const double ang_acc = 0.5 * max_step * kPi / blend;
    const double ang_jerk = 0.5 * max_step * kPi * kPi / (blend * blend);
    const double lin_jerk = jerk.norm() + max_rate * acc.norm();
    return std::max({acc.norm(), ang_acc, lin_jerk, ang_jerk});
}

}  // namespace tbod
