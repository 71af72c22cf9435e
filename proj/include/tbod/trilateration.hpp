#pragma once

#include <array>
#include <optional>

#include <Eigen/Dense>

#include "tbod/plant.hpp"

namespace tbod {

using TagPositions = std::array<Vec3, 3>;

/// Settings shared by every trilateration call of a run.
struct TrilaterationConfig {
    int iterations = 5;
    /// Initial guess used when no previous estimate is available.
    Vec3 fallback_init{1.2, 0.0, 0.0};
    /// Radius of the admissible initialization region around `fallback_init`, m.
    double region_radius = 10.0;
    double max_condition = 1e12;

    /// Fallback at the anchor centroid in x-y and at `floor_height` in z, so the
    /// start is off the anchor plane when all anchors share one height.
    static TrilaterationConfig for_anchors(const AnchorMap& anchors, double floor_height = 0.0);
};

struct TrilaterationResult {
    TagPositions tags;
    Vec3 barycenter = Vec3::Zero();
    double residual = 0.0;  ///< total cost J over all tags, m^2
    int iterations = 0;
};

/// J = sum_i sum_z (|a_i - p_z| - d_{i,z})^2 with tag-major ranges.
double cost_J(const TagPositions& candidates, const AnchorMap& anchors, const Eigen::VectorXd& ranges);

/// Per-tag cost over one tag's N ranges.
double tag_cost(const Vec3& p, const AnchorMap& anchors, const Eigen::Ref<const Eigen::VectorXd>& ranges);
Vec3 tag_gradient(const Vec3& p, const AnchorMap& anchors, const Eigen::Ref<const Eigen::VectorXd>& ranges);
Mat3 tag_hessian(const Vec3& p, const AnchorMap& anchors, const Eigen::Ref<const Eigen::VectorXd>& ranges);

/// One Newton-Raphson update p - H^-1 grad. Throws SingularHessian when p sits
/// on an anchor or the Hessian condition number exceeds `max_condition`.
Vec3 newton_step(const Vec3& p, const AnchorMap& anchors, const Eigen::Ref<const Eigen::VectorXd>& ranges,
                 double max_condition = 1e12);

/// Runs exactly `cfg.iterations` Newton steps per tag and averages the tags.
/// Throws OutOfRegion, SingularHessian or DivergedResult.
TrilaterationResult solve(const Eigen::VectorXd& ranges, const AnchorMap& anchors, const TagPositions& init,
                          const TrilaterationConfig& cfg = {});

/// Initial guess: tags placed around `p` with orientation `q` when a previous
/// estimate exists, otherwise all three at `cfg.fallback_init`.
TagPositions initial_guess(const std::optional<std::pair<Vec3, Quaternion>>& pose, const TagGeometry& tags,
                           const TrilaterationConfig& cfg);

}  // namespace tbod
