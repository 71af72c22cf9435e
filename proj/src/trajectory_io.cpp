#include "tbod/trajectory_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "tbod/errors.hpp"

namespace tbod {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kFixedColumns = 24;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw FormatError("expected a 3-element array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<std::string> header_columns(std::size_t anchors) {
    std::vector<std::string> cols = {"t",  "px", "py", "pz", "vx",  "vy",  "vz",  "bx",  "by",  "bz",  "qx",  "qy",
                                     "qz", "qw", "wx", "wy", "wz", "yax", "yay", "yaz", "ywx", "ywy", "ywz", "uwb_tick"};
    for (std::size_t z = 1; z <= 3; ++z) {
        for (std::size_t i = 1; i <= anchors; ++i) {
            cols.push_back("d_t" + std::to_string(z) + "_a" + std::to_string(i));
        }
    }
    return cols;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

double parse_double(const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw FormatError("not a number: '" + text + "'");
    }
    return v;
}

fs::path sidecar_path(const fs::path& csv_path) {
    fs::path p = csv_path;
    p.replace_extension(".json");
    return p;
}

json to_json(const NoiseConfig& n) {
    return {{"sigma_a", n.sigma_a}, {"sigma_w", n.sigma_w}, {"sigma_d", n.sigma_d},
            {"sigma_b", n.sigma_b}, {"seed", n.seed}};
}

NoiseConfig noise_from_json(const json& j) {
    NoiseConfig n;
    n.sigma_a = j.value("sigma_a", n.sigma_a);
    n.sigma_w = j.value("sigma_w", n.sigma_w);
    n.sigma_d = j.value("sigma_d", n.sigma_d);
    n.sigma_b = j.value("sigma_b", n.sigma_b);
    n.seed = j.value("seed", n.seed);
    if (n.sigma_a < 0.0 || n.sigma_w < 0.0 || n.sigma_d < 0.0 || n.sigma_b < 0.0) {
        throw InvalidConfig("noise standard deviations must be non-negative");
    }
    return n;
}

json to_json(const SensorSetup& s) {
    json anchors = json::array();
    for (const auto& a : s.anchors.positions) {
        anchors.push_back(vec_json(a));
    }
    json tags = json::array();
    for (const auto& t : s.tags.offsets) {
        tags.push_back(vec_json(t));
    }
    return {{"anchors", anchors}, {"tag_offsets", tags}};
}

SensorSetup setup_from_json(const json& j) {
    SensorSetup s;
    for (const auto& a : j.at("anchors")) {
        s.anchors.positions.push_back(vec_from(a));
    }
    const auto& tags = j.at("tag_offsets");
    if (!tags.is_array() || tags.size() != 3) {
        throw FormatError("tag_offsets must list exactly three offsets");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        s.tags.offsets[i] = vec_from(tags[i]);
    }
    return s;
}

json to_json(const PlantState& s) {
    const auto& q = s.q.coeffs();
    return {{"p", vec_json(s.p)},
            {"v", vec_json(s.v)},
            {"b", vec_json(s.b)},
            {"q", json::array({q[0], q[1], q[2], q[3]})},
            {"w", vec_json(s.w)}};
}

PlantState state_from_json(const json& j) {
    PlantState s;
    s.p = vec_from(j.at("p"));
    s.v = vec_from(j.at("v"));
    s.b = vec_from(j.at("b"));
    const auto& q = j.at("q");
    if (!q.is_array() || q.size() != 4) {
        throw FormatError("quaternion must have 4 components");
    }
    s.q = Quaternion(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
    s.w = vec_from(j.at("w"));
    return s;
}

void save_trajectory(const Trajectory& traj, const fs::path& csv_path) {
    const std::size_t n = traj.meta.setup.anchors.size();
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) {
        throw IoError("cannot open " + csv_path.string() + " for writing");
    }
    const auto cols = header_columns(n);
    for (std::size_t i = 0; i < cols.size(); ++i) {
        csv << (i ? "," : "") << cols[i];
    }
    csv << '\n';
    for (const auto& r : traj.records) {
        const PlantState& s = r.state;
        const MeasurementFrame& f = r.frame;
        std::string line = format_double(r.t);
        auto put = [&line](double v) {
            line += ',';
            line += format_double(v);
        };
        auto put3 = [&put](const Vec3& v) {
            put(v.x());
            put(v.y());
            put(v.z());
        };
        put3(s.p);
        put3(s.v);
        put3(s.b);
        for (int i = 0; i < 4; ++i) {
            put(s.q.coeffs()[i]);
        }
        put3(s.w);
        put3(f.ya);
        put3(f.yw);
        line += f.has_uwb() ? ",1" : ",0";
        for (std::size_t i = 0; i < 3 * n; ++i) {
            line += ',';
            if (f.has_uwb()) {
                line += format_double((*f.ranges)[static_cast<Eigen::Index>(i)]);
            }
        }
        csv << line << '\n';
    }
    if (!csv) {
        throw IoError("failed writing " + csv_path.string());
    }

    json meta = {{"dt_a", traj.meta.dt_a},
                 {"dt_d", traj.meta.dt_d},
                 {"seed", traj.meta.seed},
                 {"noise", to_json(traj.meta.noise)},
                 {"setup", to_json(traj.meta.setup)},
                 {"t0", traj.t0},
                 {"initial_state", to_json(traj.initial)}};
    std::ofstream side(sidecar_path(csv_path), std::ios::binary);
    if (!side) {
        throw IoError("cannot open sidecar for " + csv_path.string());
    }
    side << meta.dump(2) << '\n';
}

Trajectory load_trajectory(const fs::path& csv_path) {
    std::ifstream side(sidecar_path(csv_path));
    if (!side) {
        throw IoError("missing sidecar " + sidecar_path(csv_path).string());
    }
    Trajectory traj;
    bool has_t0 = false;
    bool has_initial = false;
    try {
        const json meta = json::parse(side);
        traj.meta.dt_a = meta.at("dt_a").get<double>();
        traj.meta.dt_d = meta.at("dt_d").get<double>();
        traj.meta.seed = meta.value("seed", std::uint64_t{0});
        traj.meta.noise = noise_from_json(meta.value("noise", json::object()));
        traj.meta.setup = setup_from_json(meta.at("setup"));
        has_t0 = meta.contains("t0");
        traj.t0 = meta.value("t0", 0.0);
        has_initial = meta.contains("initial_state");
        if (has_initial) {
            traj.initial = state_from_json(meta.at("initial_state"));
        }
    } catch (const json::exception& e) {
        throw FormatError("bad trajectory sidecar: " + std::string(e.what()));
    }
    const int ratio = traj.meta.uwb_ratio();
    const std::size_t n = traj.meta.setup.anchors.size();
    const auto expected = header_columns(n);

    std::ifstream csv(csv_path);
    if (!csv) {
        throw IoError("cannot open " + csv_path.string());
    }
    std::string line;
    if (!std::getline(csv, line) || split_csv_line(line) != expected) {
        throw FormatError("unexpected trajectory header in " + csv_path.string());
    }
    std::size_t row = 0;
    while (std::getline(csv, line)) {
        if (line.empty()) {
            continue;
        }
        ++row;
        const auto cells = split_csv_line(line);
        if (cells.size() != kFixedColumns + 3 * n) {
            throw FormatError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                              " columns, expected " + std::to_string(kFixedColumns + 3 * n));
        }
        std::size_t c = 0;
        auto next = [&]() { return parse_double(cells[c++]); };
        auto next3 = [&]() {
            const double x = next(), y = next(), z = next();
            return Vec3(x, y, z);
        };
        TrajectoryRecord r;
        r.t = next();
        r.state.p = next3();
        r.state.v = next3();
        r.state.b = next3();
        const double qx = next(), qy = next(), qz = next(), qw = next();
        r.state.q = Quaternion(qx, qy, qz, qw);
        r.state.w = next3();
        r.frame.t = r.t;
        r.frame.ya = next3();
        r.frame.yw = next3();
        const std::string& tick = cells[c++];
        if (tick != "0" && tick != "1") {
            throw FormatError("uwb_tick must be 0 or 1 on row " + std::to_string(row));
        }
        if (tick == "1") {
            Eigen::VectorXd d(static_cast<Eigen::Index>(3 * n));
            for (std::size_t i = 0; i < 3 * n; ++i) {
                if (cells[c].empty()) {
                    throw FormatError("missing range on row " + std::to_string(row));
                }
                d[static_cast<Eigen::Index>(i)] = next();
            }
            r.frame.ranges = std::move(d);
        } else {
            for (std::size_t i = 0; i < 3 * n; ++i) {
                if (!cells[c++].empty()) {
                    throw FormatError("range present without uwb_tick on row " + std::to_string(row));
                }
            }
        }
        traj.records.push_back(std::move(r));
    }
    if (traj.records.empty()) {
        throw FormatError("trajectory has no records");
    }
    // Recorded datasets may omit the pre-roll state; start from the first sample.
    if (!has_t0) {
        traj.t0 = traj.records.front().t - traj.meta.dt_a;
    }
    if (!has_initial) {
        traj.initial = traj.records.front().state;
    }

    for (std::size_t k = 0; k < traj.records.size(); ++k) {
        const double prev = k == 0 ? traj.t0 : traj.records[k - 1].t;
        if (std::abs(traj.records[k].t - prev - traj.meta.dt_a) > 1e-9) {
            throw GridError("non-uniform IMU timestamp at row " + std::to_string(k + 1));
        }
        const bool tick = (k + 1) % static_cast<std::size_t>(ratio) == 0;
        if (tick != traj.records[k].frame.has_uwb()) {
            throw GridError("UWB frame off the dt_d grid at row " + std::to_string(k + 1));
        }
    }
    return traj;
}

}  // namespace tbod
