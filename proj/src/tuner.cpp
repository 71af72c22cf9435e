#include "tbod/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>

#include "tbod/errors.hpp"
#include "tbod/nelder_mead.hpp"

namespace tbod {

using nlohmann::json;

namespace {

constexpr std::size_t kGroundTruthDim = 12;

/// Radical inverse of i in the given base, the Halton coordinate.
double halton(std::size_t i, std::size_t base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

double inv_var(double sigma) { return sigma > 0.0 ? 1.0 / (sigma * sigma) : 1.0; }

json vec_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

Eigen::VectorXd vec_from(const json& j) {
    if (!j.is_array()) {
        throw InvalidConfig("expected a numeric array");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

json trajectory_cost_json(const TrajectoryCost& c) {
    json j = {{"cost", c.cost}, {"failed", c.failed}, {"skipped_jumps", c.skipped_jumps}};
    if (c.failed) {
        j["error"] = c.error;
    }
    return j;
}

Eigen::VectorXd weights_for(const Trajectory& traj, const CostConfig& cfg) {
    const Eigen::VectorXd w =
        cfg.weights.size() > 0 ? cfg.weights
                               : default_weights(cfg.mode, traj.meta.noise, traj.meta.setup.anchors.size());
    const Eigen::Index expected = cfg.mode == CostMode::GroundTruth
                                      ? static_cast<Eigen::Index>(kGroundTruthDim)
                                      : static_cast<Eigen::Index>(6 + 3 * traj.meta.setup.anchors.size());
    if (w.size() != expected) {
        throw InvalidConfig("weight vector has " + std::to_string(w.size()) + " entries, expected " +
                            std::to_string(expected));
    }
    return w;
}

}  // namespace

std::string to_string(CostMode mode) { return mode == CostMode::GroundTruth ? "ground_truth" : "output_mismatch"; }

CostMode cost_mode_from(const std::string& name) {
    if (name == "ground_truth") {
        return CostMode::GroundTruth;
    }
    if (name == "output_mismatch") {
        return CostMode::OutputMismatch;
    }
    throw InvalidConfig("unknown cost mode '" + name + "'");
}

Eigen::VectorXd default_weights(CostMode mode, const NoiseConfig& noise, std::size_t anchors) {
    if (mode == CostMode::GroundTruth) {
        return Eigen::VectorXd::Ones(kGroundTruthDim);
    }
    Eigen::VectorXd w(static_cast<Eigen::Index>(6 + 3 * anchors));
    w.head<3>().setConstant(inv_var(noise.sigma_a));
    w.segment<3>(3).setConstant(inv_var(noise.sigma_w));
    w.tail(static_cast<Eigen::Index>(3 * anchors)).setConstant(inv_var(noise.sigma_d));
    return w;
}

double weighted_sq_sum(const std::vector<Eigen::VectorXd>& residuals, const Eigen::VectorXd& w) {
    if ((w.array() < 0.0).any()) {
        throw InvalidConfig("cost weights must be nonnegative");
    }
    double total = 0.0;
    for (const auto& r : residuals) {
        if (r.size() != w.size()) {
            throw InvalidConfig("residual and weight dimensions differ");
        }
        total += (r.array().square() * w.array()).sum();
    }
    return total;
}

std::vector<Eigen::VectorXd> residuals(const RunResult& run, const Trajectory& traj, CostMode mode) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(run.samples.size());
    const auto n_ranges = static_cast<Eigen::Index>(3 * traj.meta.setup.anchors.size());
    for (std::size_t k = 0; k < run.samples.size(); ++k) {
        const ObserverSample& s = run.samples[k];
        if (mode == CostMode::GroundTruth) {
            Eigen::VectorXd r(static_cast<Eigen::Index>(kGroundTruthDim));
            r << s.error.e_p, s.error.e_euler.as_vector();
            out.push_back(std::move(r));
        } else {
            const MeasurementFrame& f = traj.records[k].frame;
            const Mat3 rt = to_rotation_matrix(s.state.q).transpose();
            Eigen::VectorXd r = Eigen::VectorXd::Zero(6 + n_ranges);
            r.head<3>() = f.ya - rt * s.state.a;
            r.segment<3>(3) = f.yw - rt * s.state.w;
            if (s.range_residual) {
                r.tail(n_ranges) = *s.range_residual;
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

ObserverConfig observer_config(const GainSet& gains, const Trajectory& traj, const CostConfig& cfg) {
    ObserverConfig oc;
    oc.alpha = cfg.alpha;
    oc.gains = gains;
    oc.trilateration = cfg.trilateration ? *cfg.trilateration : TrilaterationConfig::for_anchors(traj.meta.setup.anchors);
    return oc;
}

TrajectoryCost trajectory_cost(const GainSet& gains, const Trajectory& traj, const CostConfig& cfg) {
    const Eigen::VectorXd w = weights_for(traj, cfg);
    TrajectoryCost out;
    try {
        const ObserverState init = trajectory_init(traj, cfg.init_position_offset, cfg.init_yaw_offset);
        const RunResult r = run(traj, observer_config(gains, traj, cfg), init);
        out.skipped_jumps = r.skipped_jumps;
        out.cost = weighted_sq_sum(residuals(r, traj, cfg.mode), w);
        if (!std::isfinite(out.cost)) {
            throw NonFiniteState("trajectory cost is not finite");
        }
    } catch (const InvalidConfig&) {
        throw;
    } catch (const Error& e) {
        out.failed = true;
        out.error = e.what();
        out.cost = cfg.failure_penalty;
    }
    return out;
}

CostBreakdown evaluate(const GainSet& gains, const std::vector<Trajectory>& set, const CostConfig& cfg) {
    if (set.empty()) {
        throw InvalidConfig("cost needs at least one trajectory");
    }
    CostBreakdown out;
    out.per_trajectory.resize(set.size());
    if (cfg.parallel && set.size() > 1) {
        std::vector<std::future<TrajectoryCost>> jobs;
        jobs.reserve(set.size());
        for (const auto& traj : set) {
            jobs.push_back(std::async(std::launch::async, [&gains, &traj, &cfg] { return trajectory_cost(gains, traj, cfg); }));
        }
        for (std::size_t j = 0; j < set.size(); ++j) {
            out.per_trajectory[j] = jobs[j].get();
        }
    } else {
        for (std::size_t j = 0; j < set.size(); ++j) {
            out.per_trajectory[j] = trajectory_cost(gains, set[j], cfg);
        }
    }
    // Summed in a fixed order so the total does not depend on scheduling.
    for (const auto& c : out.per_trajectory) {
        out.total += c.cost;
    }
    return out;
}

double cost(const GainSet& gains, const std::vector<Trajectory>& set, const CostConfig& cfg) {
    return evaluate(gains, set, cfg).total;
}

TuneReport tune(const GainSet& init, const std::vector<Trajectory>& set, const CostConfig& cfg,
                const TuneOptions& opts) {
    if (set.empty()) {
        throw InvalidConfig("tuning needs at least one trajectory");
    }
    if (opts.budget < 1) {
        throw InvalidConfig("tuning budget must be at least 1");
    }
    if (!(opts.exploration >= 0.0 && opts.exploration < 1.0)) {
        throw InvalidConfig("exploration share must lie in [0, 1)");
    }
    std::vector<int> free;
    for (int i = 0; i < 6; ++i) {
        if (opts.lower[i] > opts.upper[i]) {
            throw InvalidConfig("gain bounds are inverted for k" + std::to_string(i + 1));
        }
        if (init.k[i] < opts.lower[i] || init.k[i] > opts.upper[i]) {
            throw InvalidConfig("initial k" + std::to_string(i + 1) + " lies outside its bounds");
        }
        if (opts.lower[i] < opts.upper[i]) {
            free.push_back(i);
        }
    }

    const auto start = std::chrono::steady_clock::now();
    TuneReport report;
    report.initial = init;
    report.seed = opts.seed;
    report.config = cfg;
    report.options = opts;

    auto expand = [&](const Eigen::VectorXd& x) {
        GainSet g = init;
        for (std::size_t i = 0; i < free.size(); ++i) {
            g.k[free[i]] = x[static_cast<Eigen::Index>(i)];
        }
        return g;
    };

    if (free.empty()) {
        const CostBreakdown b = evaluate(init, set, cfg);
        report.best = init;
        report.initial_cost = report.best_cost = b.total;
        report.per_trajectory = b.per_trajectory;
        report.trace = {b.total};
        report.evaluations = 1;
    } else {
        const auto n = static_cast<Eigen::Index>(free.size());
        NelderMeadOptions nm;
        nm.lower.resize(n);
        nm.upper.resize(n);
        Eigen::VectorXd x0(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto g = static_cast<std::size_t>(free[static_cast<std::size_t>(i)]);
            nm.lower[i] = opts.lower[g];
            nm.upper[i] = opts.upper[g];
            x0[i] = init.k[g];
        }
        report.initial_cost = cost(expand(x0), set, cfg);
        double best = report.initial_cost;
        Eigen::VectorXd start = x0;
        report.trace = {best};

        // budget: the initial point, the design, then at least one simplex evaluation
        const auto design = opts.budget < 3 ? std::size_t{0}
                                            : std::min(opts.budget - 2, static_cast<std::size_t>(std::floor(
                                                                            opts.exploration * opts.budget)));
        constexpr std::size_t primes[6] = {2, 3, 5, 7, 11, 13};
        for (std::size_t j = 1; j <= design; ++j) {
            Eigen::VectorXd x(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                x[i] = nm.lower[i] + halton(j, primes[i]) * (nm.upper[i] - nm.lower[i]);
            }
            const double c = cost(expand(x), set, cfg);
            if (c < best) {
                best = c;
                start = x;
            }
            report.trace.push_back(best);
        }

        NelderMeadResult res;
        if (opts.budget > 1) {
            nm.max_evals = opts.budget - 1 - design;
            res = nelder_mead([&](const Eigen::VectorXd& x) { return cost(expand(x), set, cfg); }, start, nm);
        } else {
            res.x = start;
            res.f = best;
        }
        if (res.f > best) {
            res.x = start;
            res.f = best;
        }
        for (double f : res.trace) {
            report.trace.push_back(std::min(f, best));
        }
        report.evaluations = 1 + design + res.evals;
        report.best = expand(res.x);
        report.best_cost = res.f;
        report.restarts = res.restarts;
        report.per_trajectory = evaluate(report.best, set, cfg).per_trajectory;
    }
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

CrossValidation cross_validate(const GainSet& gains, const std::vector<Trajectory>& held_out, const CostConfig& cfg) {
    CrossValidation out;
    out.cost = evaluate(gains, held_out, cfg);
    ErrorSeries all;
    for (const auto& traj : held_out) {
        const ObserverState init = trajectory_init(traj, cfg.init_position_offset, cfg.init_yaw_offset);
        const RunResult r = run(traj, observer_config(gains, traj, cfg), init);
        std::vector<PoseSample> poses;
        poses.reserve(r.samples.size());
        for (const auto& s : r.samples) {
            poses.push_back({s.t, s.state.p, s.state.q});
        }
        all.append(pose_errors(poses, traj));
    }
    out.summary = summarize("TBOD", all);
    return out;
}

json to_json(const GainSet& g) { return json::array({g.k[0], g.k[1], g.k[2], g.k[3], g.k[4], g.k[5]}); }

GainSet gains_from_json(const json& j) {
    if (!j.is_array() || j.size() != 6) {
        throw InvalidConfig("gains must be an array of six numbers");
    }
    GainSet g;
    for (std::size_t i = 0; i < 6; ++i) {
        if (!j[i].is_number()) {
            throw InvalidConfig("gains must be numeric");
        }
        g.k[i] = j[i].get<double>();
    }
    return g;
}

json to_json(const CostConfig& c) {
    json j = {{"mode", to_string(c.mode)},
              {"alpha", c.alpha},
              {"init_position_offset", c.init_position_offset},
              {"init_yaw_offset", c.init_yaw_offset},
              {"failure_penalty", c.failure_penalty}};
    if (c.weights.size() > 0) {
        j["weights"] = vec_json(c.weights);
    }
    if (c.trilateration) {
        const auto& t = *c.trilateration;
        j["trilateration"] = {{"iterations", t.iterations},
                              {"fallback_init", vec_json(t.fallback_init)},
                              {"region_radius", t.region_radius},
                              {"max_condition", t.max_condition}};
    }
    return j;
}

CostConfig cost_config_from_json(const json& j) {
    CostConfig c;
    try {
        c.mode = cost_mode_from(j.value("mode", std::string("ground_truth")));
        c.alpha = j.value("alpha", c.alpha);
        c.init_position_offset = j.value("init_position_offset", c.init_position_offset);
        c.init_yaw_offset = j.value("init_yaw_offset", c.init_yaw_offset);
        c.failure_penalty = j.value("failure_penalty", c.failure_penalty);
        if (j.contains("weights")) {
            c.weights = vec_from(j.at("weights"));
            if ((c.weights.array() < 0.0).any()) {
                throw InvalidConfig("cost weights must be nonnegative");
            }
        }
        if (j.contains("trilateration")) {
            const json& t = j.at("trilateration");
            TrilaterationConfig tc;
            tc.iterations = t.value("iterations", tc.iterations);
            if (t.contains("fallback_init")) {
                const Eigen::VectorXd f = vec_from(t.at("fallback_init"));
                if (f.size() != 3) {
                    throw InvalidConfig("fallback_init must have three entries");
                }
                tc.fallback_init = f;
            }
            tc.region_radius = t.value("region_radius", tc.region_radius);
            tc.max_condition = t.value("max_condition", tc.max_condition);
            c.trilateration = tc;
        }
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("bad cost config: ") + e.what());
    }
    if (!(c.alpha > 0.0)) {
        throw InvalidConfig("alpha must be positive");
    }
    return c;
}

json to_json(const TuneReport& r) {
    json per = json::array();
    for (const auto& c : r.per_trajectory) {
        per.push_back(trajectory_cost_json(c));
    }
    return {{"initial_gains", to_json(r.initial)},
            {"best_gains", to_json(r.best)},
            {"initial_cost", r.initial_cost},
            {"best_cost", r.best_cost},
            {"cost_trace", r.trace},
            {"per_trajectory", per},
            {"evaluations", r.evaluations},
            {"restarts", r.restarts},
            {"seed", r.seed},
            {"budget", r.options.budget},
            {"lower", r.options.lower},
            {"upper", r.options.upper},
            {"exploration", r.options.exploration},
            {"cost_config", to_json(r.config)}};
}

}  // namespace tbod
