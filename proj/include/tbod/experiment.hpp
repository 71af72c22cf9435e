#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbod/ekf.hpp"
#include "tbod/input_profile.hpp"
#include "tbod/metrics.hpp"
#include "tbod/particle_filter.hpp"
#include "tbod/tuner.hpp"

namespace tbod {

struct SplitConfig {
    std::size_t count = 0;
    std::uint64_t seed_offset = 0;  ///< trajectory j uses seed * 1000 + seed_offset + j
};

struct ExperimentConfig {
    SensorSetup setup{AnchorMap::lab_default(), TagGeometry::equilateral(0.2)};
    NoiseConfig noise;
    double dt_a = 0.01;
    double dt_d = 0.05;
    double duration = 60.0;
    ProfileParams profile;
    SplitConfig train{4, 0};
    SplitConfig test{2, 500};
    std::uint64_t seed = 1;
    std::optional<GainSet> gains;
    CostConfig cost;
    TuneOptions tune;
    EkfConfig ekf;
    EkfInitSpread ekf_init;
    PfConfig pf;
    PfInitSpread pf_init;
    std::vector<std::size_t> pf_particles{500, 1000};

    /// Throws InvalidConfig on any inconsistency, including overlapping train/test seeds.
    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Missing keys keep their defaults. Throws InvalidConfig.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment(const std::filesystem::path& path);

enum class Split { Train, Test };

struct NamedTrajectory {
    std::string id;
    Trajectory trajectory;
};

std::vector<std::uint64_t> split_seeds(const ExperimentConfig& cfg, Split split);
Trajectory make_trajectory(const ExperimentConfig& cfg, std::uint64_t seed);
std::vector<NamedTrajectory> make_split(const ExperimentConfig& cfg, Split split);
std::vector<Trajectory> trajectories_of(const std::vector<NamedTrajectory>& set);

/// One row of an estimate log.
struct EstimateRow {
    double t = 0.0;
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 b = Vec3::Zero();
    Quaternion q;
    double ep_norm = 0.0;       ///< |[p - p_hat; v - v_hat; b - b_hat]|
    double yaw_err_deg = 0.0;   ///< wrapped truth minus estimate
    Vec3 true_p = Vec3::Zero();
    double true_yaw = 0.0;      ///< rad
};

struct MethodLog {
    std::string method;
    std::string trajectory;
    std::vector<EstimateRow> rows;
};

/// Every run of one method over the test set, ready for aggregation.
struct MethodRun {
    std::string method;
    bool failed = false;
    std::string failure;
    std::vector<MethodLog> logs;
};

MethodLog run_tbod(const NamedTrajectory& t, const GainSet& gains, const ExperimentConfig& cfg);
MethodLog run_ekf(const NamedTrajectory& t, const ExperimentConfig& cfg);
MethodLog run_pf(const NamedTrajectory& t, std::size_t particles, const ExperimentConfig& cfg);

/// Aggregated errors of a set of logs.
ErrorSeries log_errors(const std::vector<MethodLog>& logs);

struct Comparison {
    MetricsTable table;
    std::vector<MethodRun> runs;
};

/// Runs EKF, PF-N<n> for every configured particle count, and TBOD with
/// `gains` on the same test trajectories. A failing method gets a failed row.
Comparison compare(const std::vector<NamedTrajectory>& test, const GainSet& gains, const ExperimentConfig& cfg);

/// method,trajectory,t,px,...,qw,roll,pitch,yaw,ep_norm,yaw_err_deg,true_x,true_y,true_z,true_yaw
std::string estimate_log_csv(const std::vector<MethodLog>& logs);
std::vector<MethodLog> estimate_log_from_csv(const std::string& text);

/// Time, truth and one column block per method for x, y, z and yaw (degrees).
/// One row per sample of the trajectory.
std::string plot_data_csv(const std::vector<MethodLog>& logs_for_one_trajectory);

/// Writes metrics.csv, metrics.txt, estimates.csv and plot_<trajectory>.csv.
void report(const MetricsTable& table, const std::vector<MethodLog>& logs, const std::filesystem::path& outdir);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace tbod
