#pragma once

#include <string>
#include <vector>

#include "tbod/plant.hpp"

namespace tbod {

/// Per-channel values: position in metres, yaw in degrees.
struct ChannelStats {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double yaw_deg = 0.0;
};

/// Truth minus estimate per sample; yaw already wrapped to (-180, 180].
struct ErrorSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> z;
    std::vector<double> yaw_deg;

    void push(const Vec3& position_error, double yaw_error_rad);
    void append(const ErrorSeries& other);
    std::size_t size() const { return x.size(); }
};

/// Wrap to (-180, 180].
double wrap_degrees(double deg);

/// Mean absolute value; throws EmptySeries.
double mae(const std::vector<double>& e);
/// Root mean square; throws EmptySeries.
double rmse(const std::vector<double>& e);
ChannelStats mae(const ErrorSeries& e);
ChannelStats rmse(const ErrorSeries& e);

struct PoseSample {
    double t = 0.0;
    Vec3 p = Vec3::Zero();
    Quaternion q;
};

/// Errors of a pose sequence against the records of `truth`, sample by sample.
ErrorSeries pose_errors(const std::vector<PoseSample>& estimate, const Trajectory& truth);

struct MetricsRow {
    std::string method;
    bool failed = false;
    std::string failure;
    std::size_t samples = 0;
    ChannelStats mae;
    ChannelStats rmse;
};

struct MetricsTable {
    std::vector<MetricsRow> rows;
    /// nullptr when absent.
    const MetricsRow* find(const std::string& method) const;
};

MetricsRow summarize(const std::string& method, const ErrorSeries& e);
MetricsRow failed_row(const std::string& method, const std::string& reason);

/// Columns: method,status,samples,mae_x_m,...,rmse_yaw_deg. Shortest round-trip numbers.
std::string to_csv(const MetricsTable& table);
/// Throws FormatError.
MetricsTable table_from_csv(const std::string& text);
/// Two fixed-width blocks (MAE, RMSE) with x, y, z in metres and yaw in degrees.
std::string to_text(const MetricsTable& table);

}  // namespace tbod
