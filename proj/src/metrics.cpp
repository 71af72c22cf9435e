#include "tbod/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "tbod/errors.hpp"
#include "tbod/trajectory_io.hpp"

namespace tbod {

namespace {

constexpr const char* kCsvHeader =
    "method,status,samples,mae_x_m,mae_y_m,mae_z_m,mae_yaw_deg,rmse_x_m,rmse_y_m,rmse_z_m,rmse_yaw_deg";

double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

void check_nonempty(const std::vector<double>& e) {
    if (e.empty()) {
        throw EmptySeries("metric over an empty error series");
    }
}

}  // namespace

void ErrorSeries::push(const Vec3& position_error, double yaw_error_rad) {
    x.push_back(position_error.x());
    y.push_back(position_error.y());
    z.push_back(position_error.z());
    yaw_deg.push_back(wrap_degrees(rad2deg(yaw_error_rad)));
}

void ErrorSeries::append(const ErrorSeries& other) {
    x.insert(x.end(), other.x.begin(), other.x.end());
    y.insert(y.end(), other.y.begin(), other.y.end());
    z.insert(z.end(), other.z.begin(), other.z.end());
    yaw_deg.insert(yaw_deg.end(), other.yaw_deg.begin(), other.yaw_deg.end());
}

double wrap_degrees(double deg) {
    double w = std::fmod(deg + 180.0, 360.0);
    if (w <= 0.0) {
        w += 360.0;
    }
    return w - 180.0;
}

double mae(const std::vector<double>& e) {
    check_nonempty(e);
    double s = 0.0;
    for (double v : e) {
        s += std::abs(v);
    }
    return s / static_cast<double>(e.size());
}

double rmse(const std::vector<double>& e) {
    check_nonempty(e);
    double s = 0.0;
    for (double v : e) {
        s += v * v;
    }
    return std::sqrt(s / static_cast<double>(e.size()));
}

ChannelStats mae(const ErrorSeries& e) { return {mae(e.x), mae(e.y), mae(e.z), mae(e.yaw_deg)}; }

ChannelStats rmse(const ErrorSeries& e) { return {rmse(e.x), rmse(e.y), rmse(e.z), rmse(e.yaw_deg)}; }

ErrorSeries pose_errors(const std::vector<PoseSample>& estimate, const Trajectory& truth) {
    if (estimate.size() != truth.records.size()) {
        throw InvalidConfig("estimate has " + std::to_string(estimate.size()) + " samples, trajectory has " +
                            std::to_string(truth.records.size()));
    }
    ErrorSeries out;
    for (std::size_t k = 0; k < estimate.size(); ++k) {
        const PlantState& s = truth.records[k].state;
        const double yaw_err = q2a(s.q).yaw - q2a(estimate[k].q).yaw;
        out.push(s.p - estimate[k].p, wrap_angle(yaw_err));
    }
    return out;
}

const MetricsRow* MetricsTable::find(const std::string& method) const {
    for (const auto& r : rows) {
        if (r.method == method) {
            return &r;
        }
    }
    return nullptr;
}

MetricsRow summarize(const std::string& method, const ErrorSeries& e) {
    MetricsRow row;
    row.method = method;
    row.samples = e.size();
    row.mae = mae(e);
    row.rmse = rmse(e);
    return row;
}

MetricsRow failed_row(const std::string& method, const std::string& reason) {
    MetricsRow row;
    row.method = method;
    row.failed = true;
    row.failure = reason;
    return row;
}

std::string to_csv(const MetricsTable& table) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& r : table.rows) {
        if (r.method.find(',') != std::string::npos) {
            throw FormatError("method name contains a comma: " + r.method);
        }
        out << r.method << ',' << (r.failed ? "failed" : "ok") << ',' << r.samples;
        for (const ChannelStats* s : {&r.mae, &r.rmse}) {
            for (double v : {s->x, s->y, s->z, s->yaw_deg}) {
                out << ',';
                if (!r.failed) {
                    out << format_double(v);
                }
            }
        }
        out << '\n';
    }
    return out.str();
}

MetricsTable table_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw FormatError("metrics table header mismatch");
    }
    MetricsTable table;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 11) {
            throw FormatError("metrics row has " + std::to_string(cells.size()) + " cells, expected 11");
        }
        MetricsRow r;
        r.method = cells[0];
        if (cells[1] == "failed") {
            r.failed = true;
        } else if (cells[1] != "ok") {
            throw FormatError("unknown row status '" + cells[1] + "'");
        }
        r.samples = static_cast<std::size_t>(parse_double(cells[2]));
        if (!r.failed) {
            r.mae = {parse_double(cells[3]), parse_double(cells[4]), parse_double(cells[5]), parse_double(cells[6])};
            r.rmse = {parse_double(cells[7]), parse_double(cells[8]), parse_double(cells[9]), parse_double(cells[10])};
        }
        table.rows.push_back(r);
    }
    return table;
}

std::string to_text(const MetricsTable& table) {
    std::ostringstream out;
    char buf[160];
    for (int block = 0; block < 2; ++block) {
        out << (block == 0 ? "MAE" : "RMSE") << '\n';
        std::snprintf(buf, sizeof(buf), "%-12s %10s %10s %10s %12s\n", "method", "x [m]", "y [m]", "z [m]",
                      "yaw [deg]");
        out << buf;
        for (const auto& r : table.rows) {
            if (r.failed) {
                std::snprintf(buf, sizeof(buf), "%-12s %s\n", r.method.c_str(), "failed");
            } else {
                const ChannelStats& s = block == 0 ? r.mae : r.rmse;
                std::snprintf(buf, sizeof(buf), "%-12s %10.4f %10.4f %10.4f %12.4f\n", r.method.c_str(), s.x, s.y, s.z,
                              s.yaw_deg);
            }
            out << buf;
        }
        if (block == 0) {
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace tbod
