#include <doctest.h>

#include <cmath>
#include <numeric>
#include <future>
#include <random>
#include <tuple>

#include "support.hpp"
#include "toy_models.hpp"
#include "tbod/errors.hpp"
#include "tbod/input_profile.hpp"
#include "tbod/particle_filter.hpp"

using namespace tbod;

TEST_CASE("systematic resampling selects by cumulative weight") {
    CHECK(systematic_resample({0.5, 0.5, 0.0, 0.0}, 0.5) == std::vector<std::size_t>{0, 0, 1, 1});
    CHECK(systematic_resample({0.25, 0.25, 0.25, 0.25}, 0.0) == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(systematic_resample({0.0, 0.0, 0.0, 1.0}, 0.999) == std::vector<std::size_t>{3, 3, 3, 3});
    CHECK(systematic_resample({0.1, 0.6, 0.3}, 0.5) == std::vector<std::size_t>{1, 1, 2});
    CHECK_THROWS_AS(systematic_resample({}, 0.1), InvalidConfig);
    CHECK_THROWS_AS(systematic_resample({1.0}, 1.0), InvalidConfig);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> w(50);
        for (double& x : w) {
            x = u(rng);
        }
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        for (double& x : w) {
            x /= total;
        }
        const auto idx = systematic_resample(w, u(rng));
        // each particle is copied floor(N w) or ceil(N w) times
        std::vector<int> copies(w.size(), 0);
        for (std::size_t i : idx) {
            ++copies[i];
        }
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double expected = static_cast<double>(w.size()) * w[i];
            CHECK(copies[i] >= std::floor(expected) - 1e-9);
            CHECK(copies[i] <= std::ceil(expected) + 1e-9);
        }
    }
}

TEST_CASE("effective sample size") {
    CHECK(effective_sample_size({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(4.0));
    CHECK(effective_sample_size({1.0, 0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(effective_sample_size({0.0, 0.0}) == 0.0);
}

TEST_CASE("particle count and weight normalization are preserved") {
    const RoverProfile profile({}, 41, 5.0);
    const SensorSetup setup = testing::lab_setup();
    NoiseConfig noise;
    noise.seed = 4;
    const Trajectory t = simulate(profile.signal(), profile.initial_state(), noise, setup, {0.01, 0.05, 5.0});
    std::mt19937_64 rng(5);
    ParticleSet ps = pf_init(t.initial, 300, {}, rng);
    const PfConfig cfg;
    for (const auto& r : t.records) {
        const std::size_t resamplings = ps.resamplings;
        pf_step(ps, r.frame, t.meta.dt_a, setup, noise, cfg, rng);
        CHECK(ps.size() == 300);
        CHECK(ps.weights.size() == 300);
        CHECK(std::accumulate(ps.weights.begin(), ps.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        if (ps.resamplings > resamplings) {
            CHECK(effective_sample_size(ps.weights) == doctest::Approx(300.0));
        }
    }
    CHECK(ps.resamplings > 0);
}

TEST_CASE("noise-free particles at the truth stay together on the truth") {
    const RoverProfile profile({}, 42, 5.0);
    const SensorSetup setup = testing::lab_setup();
    const NoiseConfig noise = NoiseConfig::none(6);
    PfConfig cfg;
    cfg.accel_noise = 0.0;
    cfg.gyro_noise = 0.0;
    cfg.bias_jitter = 0.0;
    // Propagation is first order in dt, so halving the step halves the drift.
    auto drift = [&](double dt) {
        const Trajectory t = simulate(profile.signal(), profile.initial_state(), noise, setup, {dt, 0.05, 5.0});
        std::mt19937_64 rng(6);
        ParticleSet ps = pf_init(t.initial, 20, {0, 0, 0, 0, 0}, rng);
        for (const auto& r : t.records) {
            pf_step(ps, r.frame, dt, setup, noise, cfg, rng);
        }
        for (std::size_t k = 1; k < ps.size(); ++k) {
            CHECK(ps.particles[k].p == ps.particles[0].p);
            CHECK(ps.particles[k].q == ps.particles[0].q);
        }
        for (double w : ps.weights) {
            CHECK(w == doctest::Approx(1.0 / 20));
        }
        const PfEstimate e = pf_estimate(ps);
        return std::make_pair((e.p - t.records.back().state.p).norm(),
                              std::abs(wrap_angle(q2a(e.q).yaw - q2a(t.records.back().state.q).yaw)));
    };
    const auto [p_coarse, yaw_coarse] = drift(0.01);
    const auto [p_fine, yaw_fine] = drift(0.005);
    CHECK(p_coarse < 1e-2);
    CHECK(yaw_coarse < 1e-2);
    CHECK(yaw_coarse / yaw_fine == doctest::Approx(2.0).epsilon(0.25));
    CHECK(p_fine < p_coarse);
}

TEST_CASE("estimate is the weighted mean") {
    ParticleSet ps;
    ps.particles.resize(3);
    ps.particles[0].p = Vec3(1, 0, 0);
    ps.particles[1].p = Vec3(0, 2, 0);
    ps.particles[2].p = Vec3(0, 0, 4);
    ps.particles[0].v = Vec3(1, 1, 1);
    const double yaw = 0.3;
    ps.particles[0].q = a2q({0, 0, yaw - 0.1});
    ps.particles[1].q = a2q({0, 0, yaw + 0.1});
    ps.particles[2].q = a2q({0, 0, yaw});
    ps.weights = {0.25, 0.25, 0.5};
    const PfEstimate e = pf_estimate(ps);
    CHECK((e.p - Vec3(0.25, 0.5, 2.0)).norm() < 1e-15);
    CHECK((e.v - Vec3(0.25, 0.25, 0.25)).norm() < 1e-15);
    CHECK(q2a(e.q).yaw == doctest::Approx(yaw).epsilon(1e-9));
}

TEST_CASE("a likelihood underflow resets the weights and is counted") {
    const SensorSetup setup = testing::lab_setup();
    std::mt19937_64 rng(7);
    PlantState mean;
    mean.p = Vec3(1, 0, 0.2);
    ParticleSet ps = pf_init(mean, 50, {}, rng);
    NoiseConfig noise;
    noise.sigma_d = 1e-3;
    const Eigen::VectorXd far = true_ranges(Vec3(1, 0, 0.2), Quaternion{}, setup).array() + 50.0;
    pf_weight(ps, far, setup, noise);
    CHECK(ps.collapses == 1);
    for (double w : ps.weights) {
        CHECK(w == doctest::Approx(1.0 / 50));
    }
    CHECK_THROWS_AS(pf_weight(ps, Eigen::VectorXd::Zero(3), setup, noise), InvalidConfig);
}

TEST_CASE("particle mean converges to the Kalman mean on the axis toy") {
    // Monte Carlo spread is estimated from independent replications; the
    // single-run formula sigma / sqrt(ESS) ignores the resampling history.
    const int reps = 20;
    auto stats = [&](std::size_t n) {
        std::vector<std::future<testing::AxisPfRun>> jobs;
        for (int r = 0; r < reps; ++r) {
            jobs.push_back(std::async(std::launch::async, testing::axis_pf_run, n, 1000 + r));
        }
        double sum = 0.0, sum2 = 0.0;
        std::size_t collapses = 0;
        for (auto& j : jobs) {
            const auto run = j.get();
            sum += run.dp;
            sum2 += run.dp * run.dp;
            collapses += run.collapses;
        }
        const double mean = sum / reps;
        const double sd = std::sqrt((sum2 - reps * mean * mean) / (reps - 1));
        return std::make_tuple(mean, sd, std::sqrt(sum2 / reps), collapses);
    };
    const auto [mean_big, sd_big, rms_big, collapses_big] = stats(10000);
    const auto [mean_small, sd_small, rms_small, collapses_small] = stats(1000);
    CHECK(collapses_big == 0);
    CHECK(std::abs(mean_big) < 3.0 * sd_big / std::sqrt(static_cast<double>(reps)));
    CHECK(rms_big < rms_small);
}
