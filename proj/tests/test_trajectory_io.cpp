#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "tbod/errors.hpp"
#include "tbod/input_profile.hpp"
#include "tbod/trajectory_io.hpp"

using namespace tbod;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("tbod_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Trajectory sample_trajectory() {
    const RoverProfile profile({}, 17, 2.0);
    NoiseConfig n;
    n.seed = 5;
    return simulate(profile.signal(), profile.initial_state(), n, testing::lab_setup(), {0.01, 0.05, 2.0});
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::trunc);
    out << s;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0, -0.0, 123456789.123456789}) {
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK_THROWS_AS(parse_double("1.0x"), FormatError);
    CHECK_THROWS_AS(parse_double(""), FormatError);
}

TEST_CASE("save then load gives back the same trajectory") {
    const fs::path dir = scratch_dir("roundtrip");
    const Trajectory a = sample_trajectory();
    save_trajectory(a, dir / "t.csv");
    CHECK(fs::exists(dir / "t.json"));
    const Trajectory b = load_trajectory(dir / "t.csv");

    CHECK(b.meta.dt_a == a.meta.dt_a);
    CHECK(b.meta.dt_d == a.meta.dt_d);
    CHECK(b.meta.seed == a.meta.seed);
    CHECK(b.meta.noise.sigma_d == a.meta.noise.sigma_d);
    CHECK(b.meta.setup.anchors.positions == a.meta.setup.anchors.positions);
    CHECK(b.initial.p == a.initial.p);
    CHECK(b.initial.b == a.initial.b);
    REQUIRE(b.records.size() == a.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        const auto& ra = a.records[k];
        const auto& rb = b.records[k];
        CHECK(rb.t == ra.t);
        CHECK(rb.state.p == ra.state.p);
        CHECK(rb.state.v == ra.state.v);
        CHECK(rb.state.q == ra.state.q);
        CHECK(rb.state.w == ra.state.w);
        CHECK(rb.frame.ya == ra.frame.ya);
        CHECK(rb.frame.yw == ra.frame.yw);
        REQUIRE(rb.frame.has_uwb() == ra.frame.has_uwb());
        if (ra.frame.has_uwb()) {
            CHECK(*rb.frame.ranges == *ra.frame.ranges);
        }
    }
}

TEST_CASE("a missing range column is a format error") {
    const fs::path dir = scratch_dir("missing_col");
    save_trajectory(sample_trajectory(), dir / "t.csv");
    std::istringstream in(slurp(dir / "t.csv"));
    std::string line, out;
    while (std::getline(in, line)) {
        out += line.substr(0, line.rfind(',')) + "\n";
    }
    spit(dir / "t.csv", out);
    CHECK_THROWS_AS(load_trajectory(dir / "t.csv"), FormatError);
}

TEST_CASE("an empty range cell on a UWB row is a format error") {
    const fs::path dir = scratch_dir("empty_cell");
    save_trajectory(sample_trajectory(), dir / "t.csv");
    std::istringstream in(slurp(dir / "t.csv"));
    std::string line, out;
    int row = 0;
    while (std::getline(in, line)) {
        if (row == 5) {
            line = line.substr(0, line.rfind(',') + 1);
        }
        out += line + "\n";
        ++row;
    }
    spit(dir / "t.csv", out);
    CHECK_THROWS_AS(load_trajectory(dir / "t.csv"), FormatError);
}

TEST_CASE("a UWB period that is not a multiple of the IMU period is a grid error") {
    const fs::path dir = scratch_dir("grid");
    save_trajectory(sample_trajectory(), dir / "t.csv");
    nlohmann::json meta = nlohmann::json::parse(slurp(dir / "t.json"));
    meta["dt_d"] = 0.015;
    spit(dir / "t.json", meta.dump());
    CHECK_THROWS_AS(load_trajectory(dir / "t.csv"), GridError);
}

TEST_CASE("non-uniform timestamps are a grid error") {
    const fs::path dir = scratch_dir("timestamps");
    Trajectory t = sample_trajectory();
    t.records[10].t += 0.001;
    save_trajectory(t, dir / "t.csv");
    CHECK_THROWS_AS(load_trajectory(dir / "t.csv"), GridError);
}

TEST_CASE("sidecar without start state falls back to the first record") {
    const fs::path dir = scratch_dir("nostart");
    const Trajectory a = sample_trajectory();
    save_trajectory(a, dir / "t.csv");
    nlohmann::json meta = nlohmann::json::parse(slurp(dir / "t.json"));
    meta.erase("t0");
    meta.erase("initial_state");
    spit(dir / "t.json", meta.dump());
    const Trajectory b = load_trajectory(dir / "t.csv");
    CHECK(b.initial.p == a.records.front().state.p);
    CHECK(b.t0 == doctest::Approx(0.0).epsilon(1e-12));
}
