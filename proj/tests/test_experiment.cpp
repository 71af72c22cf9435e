#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "tbod/errors.hpp"
#include "tbod/experiment.hpp"

using namespace tbod;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.duration = 3.0;
    c.train = {2, 0};
    c.test = {1, 500};
    c.pf_particles = {100};
    c.tune.budget = 10;
    return c;
}

}  // namespace

TEST_CASE("experiment config JSON round trip") {
    ExperimentConfig c = small_config();
    c.gains = GainSet::lab_reported();
    c.noise.sigma_d = 0.3;
    c.cost.mode = CostMode::OutputMismatch;
    const nlohmann::json j = to_json(c);
    const ExperimentConfig back = experiment_from_json(j);
    CHECK(to_json(back) == j);
    REQUIRE(back.gains.has_value());
    CHECK(back.gains->k == c.gains->k);
    CHECK(experiment_from_json(nlohmann::json::object()).duration == ExperimentConfig{}.duration);
}

TEST_CASE("experiment config validation") {
    ExperimentConfig c = small_config();
    CHECK_NOTHROW(c.validate());
    c.test.seed_offset = 1;
    CHECK_THROWS_AS(c.validate(), InvalidConfig);
    c = small_config();
    c.dt_d = 0.015;
    CHECK_THROWS(c.validate());
    c = small_config();
    c.pf_particles = {0};
    CHECK_THROWS_AS(c.validate(), InvalidConfig);

    nlohmann::json j = to_json(small_config());
    j["unexpected"] = 1;
    CHECK_THROWS_AS(experiment_from_json(j), InvalidConfig);
}

TEST_CASE("split seeds are disjoint and stable") {
    const ExperimentConfig c = small_config();
    CHECK(split_seeds(c, Split::Train) == std::vector<std::uint64_t>{1000, 1001});
    CHECK(split_seeds(c, Split::Test) == std::vector<std::uint64_t>{1500});
    const auto a = make_split(c, Split::Test);
    const auto b = make_split(c, Split::Test);
    REQUIRE(a.size() == 1);
    CHECK(a[0].id == "test_00");
    CHECK(a[0].trajectory.records.back().state.p == b[0].trajectory.records.back().state.p);
    CHECK(*a[0].trajectory.records[4].frame.ranges == *b[0].trajectory.records[4].frame.ranges);
}

TEST_CASE("noise-free comparison from the true start") {
    ExperimentConfig c = small_config();
    c.noise = NoiseConfig::none();
    c.noise.sigma_b = 0.1;
    c.cost.init_position_offset = 0.0;
    c.cost.init_yaw_offset = 0.0;
    const auto test = make_split(c, Split::Test);
    const Comparison cmp = compare(test, GainSet::lab_reported(), c);
    REQUIRE(cmp.table.rows.size() == 3);
    for (const char* method : {"TBOD", "EKF"}) {
        const MetricsRow* row = cmp.table.find(method);
        REQUIRE(row != nullptr);
        CHECK_FALSE(row->failed);
        CHECK(row->mae.x < 1e-3);
        CHECK(row->mae.y < 1e-3);
        CHECK(row->mae.z < 1e-3);
    }
    REQUIRE(cmp.table.find("PF-N100") != nullptr);
}

TEST_CASE("paired runs are deterministic and reports are byte-identical") {
    const ExperimentConfig c = small_config();
    const auto test = make_split(c, Split::Test);
    const Comparison a = compare(test, GainSet::heuristic(), c);
    const Comparison b = compare(test, GainSet::heuristic(), c);
    CHECK(to_csv(a.table) == to_csv(b.table));

    std::vector<MethodLog> logs;
    for (const auto& run : a.runs) {
        logs.insert(logs.end(), run.logs.begin(), run.logs.end());
    }
    const fs::path d1 = fs::temp_directory_path() / "tbod_report_a";
    const fs::path d2 = fs::temp_directory_path() / "tbod_report_b";
    fs::remove_all(d1);
    fs::remove_all(d2);
    report(a.table, logs, d1);
    report(table_from_csv(read_text(d1 / "metrics.csv")), estimate_log_from_csv(read_text(d1 / "estimates.csv")), d2);
    for (const char* f : {"metrics.csv", "metrics.txt", "estimates.csv", "plot_test_00.csv"}) {
        CHECK(read_text(d1 / f) == read_text(d2 / f));
    }

    const std::string plot = read_text(d1 / "plot_test_00.csv");
    const auto lines = static_cast<std::size_t>(std::count(plot.begin(), plot.end(), '\n'));
    CHECK(lines == test[0].trajectory.records.size() + 1);
}
