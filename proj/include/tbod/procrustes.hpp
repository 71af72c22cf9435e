#pragma once

#include <optional>

#include "tbod/trilateration.hpp"

namespace tbod {

struct OrientationFit {
    Mat3 rotation = Mat3::Identity();
    EulerAngles angles;
    /// The unconstrained orthogonal fit was a reflection and the sign fix was applied.
    bool reflection = false;
};

/// Rotation R minimizing |R * B - A|_F where B holds the body-frame tag offsets
/// and A the world tag positions centred on their own barycenter. Throws
/// DegenerateGeometry for collinear world points.
OrientationFit orientation_from_tags(const TagPositions& world, const TagGeometry& tags);

struct DeltaResult {
    OrientationFit orientation;
    TrilaterationResult trilateration;
};

/// Orientation straight from a range block: trilaterate each tag, then fit.
DeltaResult delta(const Eigen::VectorXd& ranges, const AnchorMap& anchors, const TagPositions& init,
                  const TagGeometry& tags, const TrilaterationConfig& cfg = {});

}  // namespace tbod
