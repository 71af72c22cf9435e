#include "tbod/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "tbod/errors.hpp"
#include "tbod/trajectory_io.hpp"

namespace tbod {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kNoiseStream = 0x9E3779B97F4A7C15ULL;

const char* const kLogHeader =
    "method,trajectory,t,px,py,pz,vx,vy,vz,bx,by,bz,qx,qy,qz,qw,roll,pitch,yaw,ep_norm,yaw_err_deg,true_x,true_y,"
    "true_z,true_yaw";
constexpr std::size_t kLogColumns = 25;

double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) {
        throw InvalidConfig(std::string(what) + " must be a 3-element array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) {
        throw InvalidConfig(where + " must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            throw InvalidConfig("unknown key '" + key + "' in " + where);
        }
    }
}

EstimateRow make_row(double t, const Vec3& p, const Vec3& v, const Vec3& b, const Quaternion& q,
                     const PlantState& truth) {
    EstimateRow r;
    r.t = t;
    r.p = p;
    r.v = v;
    r.b = b;
    r.q = q;
    Vec9 e;
    e << truth.p - p, truth.v - v, truth.b - b;
    r.ep_norm = e.norm();
    r.true_p = truth.p;
    r.true_yaw = q2a(truth.q).yaw;
    r.yaw_err_deg = wrap_degrees(rad2deg(wrap_angle(r.true_yaw - q2a(q).yaw)));
    return r;
}

PlantState as_plant(const ObserverState& s) {
    PlantState p;
    p.p = s.p;
    p.v = s.v;
    p.b = s.b;
    p.q = s.q;
    p.w = s.w;
    return p;
}

std::string pf_name(std::size_t n) { return "PF-N" + std::to_string(n); }

}  // namespace

void ExperimentConfig::validate() const {
    setup.anchors.validate();
    setup.tags.validate();
    if (!(dt_a > 0.0) || !(dt_d > 0.0) || !(duration > 0.0)) {
        throw InvalidConfig("dt_a, dt_d and duration must be positive");
    }
    try {
        TrajectoryMeta meta;
        meta.dt_a = dt_a;
        meta.dt_d = dt_d;
        meta.uwb_ratio();
    } catch (const GridError& e) {
        throw InvalidConfig(e.what());
    }
    if (train.count < 1 || test.count < 1) {
        throw InvalidConfig("train and test splits need at least one trajectory each");
    }
    if (train.count > 1000 || test.count > 1000 || train.seed_offset >= 1000 || test.seed_offset >= 1000) {
        throw InvalidConfig("split sizes and seed offsets must stay below 1000");
    }
    const auto a = split_seeds(*this, Split::Train);
    const auto b = split_seeds(*this, Split::Test);
    const std::set<std::uint64_t> sa(a.begin(), a.end());
    for (auto s : b) {
        if (sa.contains(s)) {
            throw InvalidConfig("train and test trajectories overlap (seed " + std::to_string(s) + ")");
        }
    }
    if (tune.budget < 1) {
        throw InvalidConfig("tune budget must be at least 1");
    }
    if (!(tune.exploration >= 0.0 && tune.exploration < 1.0)) {
        throw InvalidConfig("tune exploration must lie in [0, 1)");
    }
    if (!(cost.alpha > 0.0)) {
        throw InvalidConfig("alpha must be positive");
    }
    if (pf_particles.empty() || std::find(pf_particles.begin(), pf_particles.end(), 0u) != pf_particles.end()) {
        throw InvalidConfig("particle counts must be positive");
    }
}

json to_json(const ExperimentConfig& c) {
    json anchors = json::array();
    for (const auto& a : c.setup.anchors.positions) {
        anchors.push_back(vec_json(a));
    }
    json tags = json::array();
    for (const auto& t : c.setup.tags.offsets) {
        tags.push_back(vec_json(t));
    }
    const ProfileParams& pp = c.profile;
    json j = {
        {"anchors", anchors},
        {"tag_offsets", tags},
        {"noise",
         {{"sigma_a", c.noise.sigma_a}, {"sigma_w", c.noise.sigma_w}, {"sigma_d", c.noise.sigma_d},
          {"sigma_b", c.noise.sigma_b}}},
        {"dt_a", c.dt_a},
        {"dt_d", c.dt_d},
        {"duration", c.duration},
        {"profile",
         {{"center", vec_json(pp.center)},
          {"amplitude", vec_json(pp.amplitude)},
          {"harmonics", pp.harmonics},
          {"min_period", pp.min_period},
          {"max_period", pp.max_period},
          {"segment", pp.segment},
          {"transition", pp.transition},
          {"max_yaw_rate", pp.max_yaw_rate}}},
        {"train", {{"count", c.train.count}, {"seed_offset", c.train.seed_offset}}},
        {"test", {{"count", c.test.count}, {"seed_offset", c.test.seed_offset}}},
        {"seed", c.seed},
        {"cost", to_json(c.cost)},
        {"tune",
         {{"budget", c.tune.budget},
          {"lower", c.tune.lower},
          {"upper", c.tune.upper},
          {"exploration", c.tune.exploration}}},
        {"ekf",
         {{"angular_accel_psd", c.ekf.angular_accel_psd},
          {"bias_walk", c.ekf.bias_walk},
          {"nis_gate", c.ekf.nis_gate},
          {"use_gyro_update", c.ekf.use_gyro_update},
          {"init",
           {{"position", c.ekf_init.position},
            {"velocity", c.ekf_init.velocity},
            {"bias", c.ekf_init.bias},
            {"attitude_tilt", c.ekf_init.attitude_tilt},
            {"attitude_yaw", c.ekf_init.attitude_yaw},
            {"angular_velocity", c.ekf_init.angular_velocity}}}}},
        {"pf",
         {{"particles", c.pf_particles},
          {"resample_threshold", c.pf.resample_threshold},
          {"accel_noise", c.pf.accel_noise},
          {"gyro_noise", c.pf.gyro_noise},
          {"bias_jitter", c.pf.bias_jitter},
          {"init",
           {{"position", c.pf_init.position},
            {"velocity", c.pf_init.velocity},
            {"bias", c.pf_init.bias},
            {"attitude_tilt", c.pf_init.attitude_tilt},
            {"attitude_yaw", c.pf_init.attitude_yaw}}}}},
    };
    if (c.gains) {
        j["gains"] = to_json(*c.gains);
    }
    return j;
}

ExperimentConfig experiment_from_json(const json& j) {
    ExperimentConfig c;
    try {
        check_keys(j,
                   {"anchors", "tag_offsets", "tag_side", "noise", "dt_a", "dt_d", "duration", "profile", "train",
                    "test", "seed", "gains", "cost", "tune", "ekf", "pf"},
                   "experiment config");
        if (j.contains("anchors")) {
            c.setup.anchors.positions.clear();
            for (const auto& a : j.at("anchors")) {
                c.setup.anchors.positions.push_back(vec3_from(a, "anchor"));
            }
        }
        if (j.contains("tag_offsets") && j.contains("tag_side")) {
            throw InvalidConfig("give either tag_offsets or tag_side, not both");
        }
        if (j.contains("tag_side")) {
            c.setup.tags = TagGeometry::equilateral(j.at("tag_side").get<double>());
        }
        if (j.contains("tag_offsets")) {
            const auto& t = j.at("tag_offsets");
            if (!t.is_array() || t.size() != 3) {
                throw InvalidConfig("tag_offsets must list three offsets");
            }
            for (std::size_t i = 0; i < 3; ++i) {
                c.setup.tags.offsets[i] = vec3_from(t[i], "tag offset");
            }
        }
        if (j.contains("noise")) {
            const auto& n = j.at("noise");
            check_keys(n, {"sigma_a", "sigma_w", "sigma_d", "sigma_b"}, "noise");
            c.noise.sigma_a = n.value("sigma_a", c.noise.sigma_a);
            c.noise.sigma_w = n.value("sigma_w", c.noise.sigma_w);
            c.noise.sigma_d = n.value("sigma_d", c.noise.sigma_d);
            c.noise.sigma_b = n.value("sigma_b", c.noise.sigma_b);
            if (c.noise.sigma_a < 0.0 || c.noise.sigma_w < 0.0 || c.noise.sigma_d < 0.0 || c.noise.sigma_b < 0.0) {
                throw InvalidConfig("noise standard deviations must be non-negative");
            }
        }
        c.dt_a = j.value("dt_a", c.dt_a);
        c.dt_d = j.value("dt_d", c.dt_d);
        c.duration = j.value("duration", c.duration);
        if (j.contains("profile")) {
            const auto& p = j.at("profile");
            check_keys(p,
                       {"center", "amplitude", "harmonics", "min_period", "max_period", "segment", "transition",
                        "max_yaw_rate"},
                       "profile");
            ProfileParams& pp = c.profile;
            if (p.contains("center")) {
                pp.center = vec3_from(p.at("center"), "profile center");
            }
            if (p.contains("amplitude")) {
                pp.amplitude = vec3_from(p.at("amplitude"), "profile amplitude");
            }
            pp.harmonics = p.value("harmonics", pp.harmonics);
            pp.min_period = p.value("min_period", pp.min_period);
            pp.max_period = p.value("max_period", pp.max_period);
            pp.segment = p.value("segment", pp.segment);
            pp.transition = p.value("transition", pp.transition);
            pp.max_yaw_rate = p.value("max_yaw_rate", pp.max_yaw_rate);
        }
        for (auto [key, split] : {std::pair{"train", &c.train}, std::pair{"test", &c.test}}) {
            if (j.contains(key)) {
                const auto& s = j.at(key);
                check_keys(s, {"count", "seed_offset"}, key);
                split->count = s.value("count", split->count);
                split->seed_offset = s.value("seed_offset", split->seed_offset);
            }
        }
        c.seed = j.value("seed", c.seed);
        if (j.contains("gains")) {
            c.gains = gains_from_json(j.at("gains"));
        }
        if (j.contains("cost")) {
            c.cost = cost_config_from_json(j.at("cost"));
        }
        if (j.contains("tune")) {
            const auto& t = j.at("tune");
            check_keys(t, {"budget", "lower", "upper", "exploration"}, "tune");
            c.tune.budget = t.value("budget", c.tune.budget);
            c.tune.exploration = t.value("exploration", c.tune.exploration);
            if (t.contains("lower")) {
                c.tune.lower = t.at("lower").get<std::array<double, 6>>();
            }
            if (t.contains("upper")) {
                c.tune.upper = t.at("upper").get<std::array<double, 6>>();
            }
        }
        if (j.contains("ekf")) {
            const auto& e = j.at("ekf");
            check_keys(e, {"angular_accel_psd", "bias_walk", "nis_gate", "use_gyro_update", "init"}, "ekf");
            c.ekf.angular_accel_psd = e.value("angular_accel_psd", c.ekf.angular_accel_psd);
            c.ekf.bias_walk = e.value("bias_walk", c.ekf.bias_walk);
            c.ekf.nis_gate = e.value("nis_gate", c.ekf.nis_gate);
            c.ekf.use_gyro_update = e.value("use_gyro_update", c.ekf.use_gyro_update);
            if (e.contains("init")) {
                const auto& i = e.at("init");
                check_keys(i, {"position", "velocity", "bias", "attitude_tilt", "attitude_yaw", "angular_velocity"},
                           "ekf init");
                c.ekf_init.position = i.value("position", c.ekf_init.position);
                c.ekf_init.velocity = i.value("velocity", c.ekf_init.velocity);
                c.ekf_init.bias = i.value("bias", c.ekf_init.bias);
                c.ekf_init.attitude_tilt = i.value("attitude_tilt", c.ekf_init.attitude_tilt);
                c.ekf_init.attitude_yaw = i.value("attitude_yaw", c.ekf_init.attitude_yaw);
                c.ekf_init.angular_velocity = i.value("angular_velocity", c.ekf_init.angular_velocity);
            }
        }
        if (j.contains("pf")) {
            const auto& p = j.at("pf");
            check_keys(p, {"particles", "resample_threshold", "accel_noise", "gyro_noise", "bias_jitter", "init"},
                       "pf");
            if (p.contains("particles")) {
                c.pf_particles = p.at("particles").get<std::vector<std::size_t>>();
            }
            c.pf.resample_threshold = p.value("resample_threshold", c.pf.resample_threshold);
            c.pf.accel_noise = p.value("accel_noise", c.pf.accel_noise);
            c.pf.gyro_noise = p.value("gyro_noise", c.pf.gyro_noise);
            c.pf.bias_jitter = p.value("bias_jitter", c.pf.bias_jitter);
            if (p.contains("init")) {
                const auto& i = p.at("init");
                check_keys(i, {"position", "velocity", "bias", "attitude_tilt", "attitude_yaw"}, "pf init");
                c.pf_init.position = i.value("position", c.pf_init.position);
                c.pf_init.velocity = i.value("velocity", c.pf_init.velocity);
                c.pf_init.bias = i.value("bias", c.pf_init.bias);
                c.pf_init.attitude_tilt = i.value("attitude_tilt", c.pf_init.attitude_tilt);
                c.pf_init.attitude_yaw = i.value("attitude_yaw", c.pf_init.attitude_yaw);
            }
        }
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("bad experiment config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_experiment(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidConfig("cannot open config " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidConfig("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return experiment_from_json(j);
}

std::vector<std::uint64_t> split_seeds(const ExperimentConfig& cfg, Split split) {
    const SplitConfig& s = split == Split::Train ? cfg.train : cfg.test;
    std::vector<std::uint64_t> out;
    for (std::size_t j = 0; j < s.count; ++j) {
        out.push_back(cfg.seed * 1000 + s.seed_offset + j);
    }
    return out;
}

Trajectory make_trajectory(const ExperimentConfig& cfg, std::uint64_t seed) {
    const RoverProfile profile(cfg.profile, seed, cfg.duration);
    NoiseConfig noise = cfg.noise;
    noise.seed = seed ^ kNoiseStream;
    Trajectory t = simulate(profile.signal(), profile.initial_state(), noise, cfg.setup,
                            {cfg.dt_a, cfg.dt_d, cfg.duration});
    t.meta.seed = seed;
    return t;
}

std::vector<NamedTrajectory> make_split(const ExperimentConfig& cfg, Split split) {
    const auto seeds = split_seeds(cfg, split);
    const std::string prefix = split == Split::Train ? "train" : "test";
    std::vector<NamedTrajectory> out(seeds.size());
    std::vector<std::future<Trajectory>> jobs;
    for (auto s : seeds) {
        jobs.push_back(std::async(std::launch::async, [&cfg, s] { return make_trajectory(cfg, s); }));
    }
    for (std::size_t j = 0; j < seeds.size(); ++j) {
        char id[32];
        std::snprintf(id, sizeof(id), "%s_%02zu", prefix.c_str(), j);
        out[j] = {id, jobs[j].get()};
    }
    return out;
}

std::vector<Trajectory> trajectories_of(const std::vector<NamedTrajectory>& set) {
    std::vector<Trajectory> out;
    out.reserve(set.size());
    for (const auto& n : set) {
        out.push_back(n.trajectory);
    }
    return out;
}

MethodLog run_tbod(const NamedTrajectory& t, const GainSet& gains, const ExperimentConfig& cfg) {
    const Trajectory& traj = t.trajectory;
    const ObserverState init = trajectory_init(traj, cfg.cost.init_position_offset, cfg.cost.init_yaw_offset);
    const RunResult r = run(traj, observer_config(gains, traj, cfg.cost), init);
    MethodLog log{"TBOD", t.id, {}};
    log.rows.reserve(r.samples.size());
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
        const ObserverState& s = r.samples[k].state;
        log.rows.push_back(make_row(r.samples[k].t, s.p, s.v, s.b, s.q, traj.records[k].state));
    }
    return log;
}

MethodLog run_ekf(const NamedTrajectory& t, const ExperimentConfig& cfg) {
    const Trajectory& traj = t.trajectory;
    const ObserverState init = trajectory_init(traj, cfg.cost.init_position_offset, cfg.cost.init_yaw_offset);
    EkfState s = ekf_init(as_plant(init), cfg.ekf_init);
    MethodLog log{"EKF", t.id, {}};
    log.rows.reserve(traj.records.size());
    for (const auto& rec : traj.records) {
        s = ekf_step(s, rec.frame, traj.meta.dt_a, traj.meta.setup, traj.meta.noise, cfg.ekf);
        log.rows.push_back(make_row(rec.t, s.mean.p, s.mean.v, s.mean.b, s.mean.q, rec.state));
    }
    return log;
}

MethodLog run_pf(const NamedTrajectory& t, std::size_t particles, const ExperimentConfig& cfg) {
    const Trajectory& traj = t.trajectory;
    const ObserverState init = trajectory_init(traj, cfg.cost.init_position_offset, cfg.cost.init_yaw_offset);
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(traj.meta.seed), static_cast<std::uint32_t>(traj.meta.seed >> 32),
                      static_cast<std::uint32_t>(particles)};
    std::mt19937_64 rng(seq);
    PfConfig pc = cfg.pf;
    pc.particles = particles;
    ParticleSet ps = pf_init(as_plant(init), particles, cfg.pf_init, rng);
    MethodLog log{pf_name(particles), t.id, {}};
    log.rows.reserve(traj.records.size());
    for (const auto& rec : traj.records) {
        pf_step(ps, rec.frame, traj.meta.dt_a, traj.meta.setup, traj.meta.noise, pc, rng);
        const PfEstimate e = pf_estimate(ps);
        log.rows.push_back(make_row(rec.t, e.p, e.v, e.b, e.q, rec.state));
    }
    return log;
}

ErrorSeries log_errors(const std::vector<MethodLog>& logs) {
    ErrorSeries out;
    for (const auto& log : logs) {
        for (const auto& r : log.rows) {
            out.push(r.true_p - r.p, wrap_angle(r.true_yaw - q2a(r.q).yaw));
        }
    }
    return out;
}

Comparison compare(const std::vector<NamedTrajectory>& test, const GainSet& gains, const ExperimentConfig& cfg) {
    if (test.empty()) {
        throw InvalidConfig("comparison needs at least one test trajectory");
    }
    using Runner = std::function<MethodLog(const NamedTrajectory&)>;
    std::vector<std::pair<std::string, Runner>> methods;
    methods.emplace_back("EKF", [&cfg](const NamedTrajectory& t) { return run_ekf(t, cfg); });
    for (std::size_t n : cfg.pf_particles) {
        methods.emplace_back(pf_name(n), [&cfg, n](const NamedTrajectory& t) { return run_pf(t, n, cfg); });
    }
    methods.emplace_back("TBOD", [&cfg, gains](const NamedTrajectory& t) { return run_tbod(t, gains, cfg); });

    std::vector<std::future<MethodRun>> jobs;
    for (const auto& [name, runner] : methods) {
        jobs.push_back(std::async(std::launch::async, [&test, name = name, runner = runner] {
            MethodRun mr;
            mr.method = name;
            try {
                for (const auto& t : test) {
                    mr.logs.push_back(runner(t));
                }
            } catch (const Error& e) {
                mr.failed = true;
                mr.failure = e.what();
                mr.logs.clear();
            }
            return mr;
        }));
    }
    Comparison out;
    for (auto& j : jobs) {
        MethodRun mr = j.get();
        out.table.rows.push_back(mr.failed ? failed_row(mr.method, mr.failure) : summarize(mr.method, log_errors(mr.logs)));
        out.runs.push_back(std::move(mr));
    }
    return out;
}

std::string estimate_log_csv(const std::vector<MethodLog>& logs) {
    std::ostringstream out;
    out << kLogHeader << '\n';
    for (const auto& log : logs) {
        for (const auto& r : log.rows) {
            const EulerAngles e = q2a(r.q);
            out << log.method << ',' << log.trajectory;
            for (double v : {r.t, r.p.x(), r.p.y(), r.p.z(), r.v.x(), r.v.y(), r.v.z(), r.b.x(), r.b.y(), r.b.z(),
                             r.q.x(), r.q.y(), r.q.z(), r.q.w(), e.roll, e.pitch, e.yaw, r.ep_norm, r.yaw_err_deg,
                             r.true_p.x(), r.true_p.y(), r.true_p.z(), r.true_yaw}) {
                out << ',' << format_double(v);
            }
            out << '\n';
        }
    }
    return out.str();
}

std::vector<MethodLog> estimate_log_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kLogHeader) {
        throw FormatError("estimate log header mismatch");
    }
    std::vector<MethodLog> logs;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto c = split_csv_line(line);
        if (c.size() != kLogColumns) {
            throw FormatError("estimate log line " + std::to_string(lineno) + " has " + std::to_string(c.size()) +
                              " cells");
        }
        if (logs.empty() || logs.back().method != c[0] || logs.back().trajectory != c[1]) {
            logs.push_back({c[0], c[1], {}});
        }
        std::array<double, 23> v{};
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = parse_double(c[i + 2]);
        }
        EstimateRow r;
        r.t = v[0];
        r.p = {v[1], v[2], v[3]};
        r.v = {v[4], v[5], v[6]};
        r.b = {v[7], v[8], v[9]};
        r.q = Quaternion(v[10], v[11], v[12], v[13]);
        r.ep_norm = v[17];
        r.yaw_err_deg = v[18];
        r.true_p = {v[19], v[20], v[21]};
        r.true_yaw = v[22];
        logs.back().rows.push_back(r);
    }
    return logs;
}

std::string plot_data_csv(const std::vector<MethodLog>& logs) {
    if (logs.empty()) {
        throw InvalidConfig("plot data needs at least one log");
    }
    const std::size_t n = logs.front().rows.size();
    for (const auto& l : logs) {
        if (l.rows.size() != n || l.trajectory != logs.front().trajectory) {
            throw InvalidConfig("plot data logs must cover the same trajectory");
        }
    }
    std::ostringstream out;
    out << "t,true_x,true_y,true_z,true_yaw_deg";
    for (const auto& l : logs) {
        for (const char* ch : {"x", "y", "z", "yaw_deg"}) {
            out << ',' << l.method << '_' << ch;
        }
    }
    out << '\n';
    for (std::size_t k = 0; k < n; ++k) {
        const EstimateRow& ref = logs.front().rows[k];
        out << format_double(ref.t) << ',' << format_double(ref.true_p.x()) << ',' << format_double(ref.true_p.y())
            << ',' << format_double(ref.true_p.z()) << ',' << format_double(rad2deg(ref.true_yaw));
        for (const auto& l : logs) {
            const EstimateRow& r = l.rows[k];
            out << ',' << format_double(r.p.x()) << ',' << format_double(r.p.y()) << ',' << format_double(r.p.z())
                << ',' << format_double(rad2deg(q2a(r.q).yaw));
        }
        out << '\n';
    }
    return out.str();
}

void report(const MetricsTable& table, const std::vector<MethodLog>& logs, const fs::path& outdir) {
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec) {
        throw IoError("cannot create " + outdir.string() + ": " + ec.message());
    }
    write_text(outdir / "metrics.csv", to_csv(table));
    write_text(outdir / "metrics.txt", to_text(table));
    write_text(outdir / "estimates.csv", estimate_log_csv(logs));
    std::map<std::string, std::vector<MethodLog>> by_traj;
    for (const auto& l : logs) {
        by_traj[l.trajectory].push_back(l);
    }
    for (const auto& [id, group] : by_traj) {
        write_text(outdir / ("plot_" + id + ".csv"), plot_data_csv(group));
    }
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << content;
    if (!out) {
        throw IoError("write to " + path.string() + " failed");
    }
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace tbod
