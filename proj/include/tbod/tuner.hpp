#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbod/metrics.hpp"
#include "tbod/observer.hpp"

namespace tbod {

enum class CostMode { OutputMismatch, GroundTruth };

std::string to_string(CostMode mode);
/// Accepts "output_mismatch" or "ground_truth"; throws InvalidConfig otherwise.
CostMode cost_mode_from(const std::string& name);

struct CostConfig {
    CostMode mode = CostMode::GroundTruth;
    /// Diagonal of W. Empty selects the default for the mode (see default_weights).
    Eigen::VectorXd weights;
    double alpha = 20.0;
    /// Observer start per trajectory: truth shifted along x and rotated in yaw.
    double init_position_offset = 1.0;
    double init_yaw_offset = 20.0 * std::numbers::pi / 180.0;
    /// Added once for every trajectory whose run fails.
    double failure_penalty = 1e9;
    /// Unset: derived from each trajectory's anchors.
    std::optional<TrilaterationConfig> trilateration;
    /// Evaluate trajectories on separate threads.
    bool parallel = true;
};

/// Ground truth: 12 ones over [p, v, b, roll, pitch, yaw] errors (1 rad weighs
/// like 1 m). Output mismatch: inverse variances over [y_a, y_w, ranges],
/// with 1 standing in for any channel whose sigma is zero.
Eigen::VectorXd default_weights(CostMode mode, const NoiseConfig& noise, std::size_t anchors);

/// Sum over samples of r' W r with W = diag(w).
double weighted_sq_sum(const std::vector<Eigen::VectorXd>& residuals, const Eigen::VectorXd& w);

/// Per-sample residuals of one observer run under the given mode.
std::vector<Eigen::VectorXd> residuals(const RunResult& run, const Trajectory& traj, CostMode mode);

struct TrajectoryCost {
    double cost = 0.0;
    bool failed = false;
    std::string error;
    std::size_t skipped_jumps = 0;
};

struct CostBreakdown {
    double total = 0.0;
    std::vector<TrajectoryCost> per_trajectory;
};

ObserverConfig observer_config(const GainSet& gains, const Trajectory& traj, const CostConfig& cfg);
TrajectoryCost trajectory_cost(const GainSet& gains, const Trajectory& traj, const CostConfig& cfg);
/// Throws InvalidConfig for an empty set or negative weights.
CostBreakdown evaluate(const GainSet& gains, const std::vector<Trajectory>& set, const CostConfig& cfg);
double cost(const GainSet& gains, const std::vector<Trajectory>& set, const CostConfig& cfg);

struct TuneOptions {
    std::size_t budget = 500;
    std::array<double, 6> lower{-2.0, -2.0, -2.0, 0.0, 0.0, 0.0};
    std::array<double, 6> upper{2.0, 2.0, 2.0, 1.0, 1.0, 1.0};
    /// Share of the budget spent on a Halton design over the box before the
    /// simplex search starts from the best point seen.
    double exploration = 0.2;
    /// Recorded in the report; the search itself is deterministic.
    std::uint64_t seed = 0;
};

struct TuneReport {
    GainSet initial;
    GainSet best;
    double initial_cost = 0.0;
    double best_cost = 0.0;
    std::vector<double> trace;
    std::vector<TrajectoryCost> per_trajectory;
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
    double wall_time_s = 0.0;
    std::uint64_t seed = 0;
    CostConfig config;
    TuneOptions options;
};

/// Halton exploration of the box, then bounded simplex search from the best
/// point, over the gains that have lower < upper; the others stay at their
/// initial values. The initial gains are always evaluated first. Throws
/// InvalidConfig when `init` lies outside the bounds or the budget is zero.
TuneReport tune(const GainSet& init, const std::vector<Trajectory>& set, const CostConfig& cfg,
                const TuneOptions& opts = {});

struct CrossValidation {
    CostBreakdown cost;
    MetricsRow summary;
};

CrossValidation cross_validate(const GainSet& gains, const std::vector<Trajectory>& held_out, const CostConfig& cfg);

nlohmann::json to_json(const GainSet& g);
GainSet gains_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CostConfig& c);
CostConfig cost_config_from_json(const nlohmann::json& j);
/// Everything except wall time, so the file is reproducible.
nlohmann::json to_json(const TuneReport& r);

}  // namespace tbod
