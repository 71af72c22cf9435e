#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "support.hpp"
#include "tbod/errors.hpp"
#include "tbod/input_profile.hpp"
#include "tbod/nelder_mead.hpp"
#include "tbod/tuner.hpp"

using namespace tbod;

namespace {

std::vector<Trajectory> short_set(std::size_t count, double duration, std::uint64_t base, bool noisy) {
    std::vector<Trajectory> out;
    for (std::size_t j = 0; j < count; ++j) {
        const RoverProfile profile({}, base + j, duration);
        NoiseConfig n = noisy ? NoiseConfig{} : NoiseConfig::none();
        n.seed = base + 100 + j;
        out.push_back(simulate(profile.signal(), profile.initial_state(), n, testing::lab_setup(),
                               {0.01, 0.05, duration}));
    }
    return out;
}

}  // namespace

TEST_CASE("weighted squared sum") {
    Eigen::VectorXd r(2);
    r << 1.0, 2.0;
    CHECK(weighted_sq_sum({r}, Eigen::Vector2d(1.0, 1.0)) == 5.0);
    CHECK(weighted_sq_sum({r, r}, Eigen::Vector2d(2.0, 0.5)) == 8.0);
    CHECK_THROWS_AS(weighted_sq_sum({r}, Eigen::Vector3d(1, 1, 1)), InvalidConfig);
}

TEST_CASE("default weights") {
    const Eigen::VectorXd g = default_weights(CostMode::GroundTruth, NoiseConfig{}, 4);
    CHECK(g.size() == 12);
    CHECK(g.isOnes());
    const Eigen::VectorXd o = default_weights(CostMode::OutputMismatch, NoiseConfig{}, 4);
    CHECK(o.size() == 18);
    CHECK(o[0] == doctest::Approx(1.0 / (0.05 * 0.05)));
    CHECK(o[17] == doctest::Approx(1.0 / (0.2 * 0.2)));
    CHECK(default_weights(CostMode::OutputMismatch, NoiseConfig::none(), 4).isOnes());
    CHECK(cost_mode_from("output_mismatch") == CostMode::OutputMismatch);
    CHECK(to_string(CostMode::GroundTruth) == "ground_truth");
    CHECK_THROWS_AS(cost_mode_from("truth"), InvalidConfig);
}

TEST_CASE("perfect start and unit gains cost nothing on noise-free static data") {
    NoiseConfig n = NoiseConfig::none(3);
    n.sigma_b = 0.1;
    std::vector<Trajectory> set;
    for (int j = 0; j < 2; ++j) {
        PlantState start;
        start.p = Vec3(0.5 + j, -1.0 + j, 0.2);
        start.q = a2q({0.01, 0.0, 0.5 * j});
        n.seed = 10 + j;
        set.push_back(simulate(zero_input(), start, n, testing::lab_setup(), {0.01, 0.05, 3.0}));
    }
    CostConfig cfg;
    cfg.init_position_offset = 0.0;
    cfg.init_yaw_offset = 0.0;
    CHECK(cost(GainSet::from({1, 0, 0, 1, 1, 1}), set, cfg) < 1e-8);
    cfg.mode = CostMode::OutputMismatch;
    CHECK(cost(GainSet::from({1, 0, 0, 1, 1, 1}), set, cfg) < 1e-8);
}

TEST_CASE("cost scales with the weights and ignores trajectory order") {
    std::vector<Trajectory> set = short_set(3, 2.0, 200, true);
    CostConfig cfg;
    const GainSet g = GainSet::heuristic();
    const double base = cost(g, set, cfg);
    CHECK(base > 0.0);
    CostConfig doubled = cfg;
    doubled.weights = 2.0 * default_weights(cfg.mode, set[0].meta.noise, 4);
    CHECK(cost(g, set, doubled) == doctest::Approx(2.0 * base).epsilon(1e-12));

    std::vector<Trajectory> reversed(set.rbegin(), set.rend());
    CHECK(cost(g, reversed, cfg) == doctest::Approx(base).epsilon(1e-12));
    CostConfig serial = cfg;
    serial.parallel = false;
    CHECK(cost(g, set, serial) == base);

    CostConfig negative = cfg;
    negative.weights = -default_weights(cfg.mode, set[0].meta.noise, 4);
    CHECK_THROWS_AS(cost(g, set, negative), InvalidConfig);
    CHECK_THROWS_AS(cost(g, {}, cfg), InvalidConfig);
}

TEST_CASE("budget of one returns the initial gains") {
    const std::vector<Trajectory> set = short_set(1, 1.0, 300, true);
    TuneOptions opts;
    opts.budget = 1;
    const TuneReport r = tune(GainSet::heuristic(), set, CostConfig{}, opts);
    CHECK(r.best.k == GainSet::heuristic().k);
    CHECK(r.best_cost == r.initial_cost);
    CHECK(r.evaluations == 1);
    opts.budget = 0;
    CHECK_THROWS_AS(tune(GainSet::heuristic(), set, CostConfig{}, opts), InvalidConfig);
    opts.budget = 10;
    CHECK_THROWS_AS(tune(GainSet::from({3, 0, 0, 1, 1, 1}), set, CostConfig{}, opts), InvalidConfig);
}

TEST_CASE("one free gain lands on the grid-scan minimum") {
    const std::vector<Trajectory> set = short_set(2, 2.0, 400, false);
    CostConfig cfg;
    cfg.parallel = false;
    const GainSet init = GainSet::from({0.5, 0.0, 0.0, 0.5, 0.5, 0.5});
    TuneOptions opts;
    opts.budget = 200;
    opts.lower = {-2.0, 0.0, 0.0, 0.5, 0.5, 0.5};
    opts.upper = {2.0, 0.0, 0.0, 0.5, 0.5, 0.5};
    const TuneReport r = tune(init, set, cfg, opts);
    for (std::size_t i = 1; i < 6; ++i) {
        CHECK(r.best.k[i] == init.k[i]);
    }

    double best_k = 0.0;
    double best_f = std::numeric_limits<double>::infinity();
    const int points = 10000;
    for (int i = 0; i <= points; ++i) {
        GainSet g = init;
        g.k[0] = -2.0 + 4.0 * i / points;
        const double f = cost(g, set, cfg);
        if (f < best_f) {
            best_f = f;
            best_k = g.k[0];
        }
    }
    CHECK(std::abs(r.best.k[0] - best_k) < 0.05);
    CHECK(r.best_cost <= best_f * (1.0 + 1e-6));
}

TEST_CASE("tuning is monotone, reproducible and generalizes") {
    const std::vector<Trajectory> train = short_set(2, 60.0, 500, true);
    TuneOptions opts;
    opts.budget = 80;
    const TuneReport a = tune(GainSet::heuristic(), train, CostConfig{}, opts);
    const TuneReport b = tune(GainSet::heuristic(), train, CostConfig{}, opts);
    CHECK(a.best.k == b.best.k);
    CHECK(a.best_cost == b.best_cost);
    CHECK(a.trace == b.trace);
    CHECK(to_json(a) == to_json(b));
    REQUIRE_FALSE(a.trace.empty());
    CHECK(a.trace.front() == a.initial_cost);
    for (std::size_t i = 1; i < a.trace.size(); ++i) {
        CHECK(a.trace[i] <= a.trace[i - 1]);
    }
    CHECK(a.trace.back() == a.best_cost);
    CHECK(a.evaluations <= opts.budget);
    CHECK(a.best_cost <= a.initial_cost);

    const CrossValidation same = cross_validate(a.best, train, CostConfig{});
    const CostBreakdown direct = evaluate(a.best, train, CostConfig{});
    CHECK(same.cost.total == direct.total);
    REQUIRE(same.cost.per_trajectory.size() == direct.per_trajectory.size());
    for (std::size_t i = 0; i < direct.per_trajectory.size(); ++i) {
        CHECK(same.cost.per_trajectory[i].cost == direct.per_trajectory[i].cost);
    }
    CHECK(same.summary.samples == train[0].records.size() + train[1].records.size());

    const std::vector<Trajectory> held_out = short_set(2, 60.0, 700, true);
    CHECK(cost(GainSet{}, held_out, CostConfig{}) > cost(a.best, held_out, CostConfig{}));

    const std::vector<Trajectory> clean = short_set(2, 60.0, 700, false);
    CHECK(cross_validate(a.best, clean, CostConfig{}).summary.mae.yaw_deg < 0.1);
}

TEST_CASE("gains and cost config JSON") {
    const GainSet g = GainSet::lab_reported();
    CHECK(gains_from_json(to_json(g)).k == g.k);
    CHECK_THROWS_AS(gains_from_json(nlohmann::json::array({1, 2})), InvalidConfig);
    CostConfig c;
    c.mode = CostMode::OutputMismatch;
    c.alpha = 12.0;
    const CostConfig back = cost_config_from_json(to_json(c));
    CHECK(back.mode == c.mode);
    CHECK(back.alpha == c.alpha);
    CHECK(to_json(back) == to_json(c));
}

TEST_CASE("Nelder-Mead on a bounded quadratic") {
    NelderMeadOptions opts;
    opts.lower = Eigen::Vector2d(-1, -1);
    opts.upper = Eigen::Vector2d(1, 1);
    opts.max_evals = 400;
    const auto f = [](const Eigen::VectorXd& x) { return (x - Eigen::Vector2d(0.3, 2.0)).squaredNorm(); };
    const NelderMeadResult r = nelder_mead(f, Eigen::Vector2d(0, 0), opts);
    CHECK(std::abs(r.x[0] - 0.3) < 1e-4);
    CHECK(r.x[1] == doctest::Approx(1.0));
    CHECK(r.evals <= opts.max_evals);
}
