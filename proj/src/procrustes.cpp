#include "tbod/procrustes.hpp"

#include "tbod/errors.hpp"

namespace tbod {

OrientationFit orientation_from_tags(const TagPositions& world, const TagGeometry& tags) {
    const Vec3 center = (world[0] + world[1] + world[2]) / 3.0;
    Mat3 a;
    Mat3 b;
    for (int i = 0; i < 3; ++i) {
        a.col(i) = world[static_cast<std::size_t>(i)] - center;
        b.col(i) = tags.offsets[static_cast<std::size_t>(i)];
    }
    // Three centred points span at most a plane, so rank 2 is the best case;
    // the second singular value measures how far they are from a line.
    const Eigen::JacobiSVD<Mat3> shape(a);
    if (!(shape.singularValues()[1] > 1e-9)) {
        throw DegenerateGeometry("tag positions are collinear");
    }

    const Eigen::JacobiSVD<Mat3> svd(a * b.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat3& u = svd.matrixU();
    const Mat3& v = svd.matrixV();
    const double det = (u * v.transpose()).determinant();
    Mat3 fix = Mat3::Identity();
    OrientationFit out;
    if (det < 0.0) {
        fix(2, 2) = -1.0;
        out.reflection = true;
    }
    out.rotation = u * fix * v.transpose();
    out.angles = euler_from_matrix(out.rotation);
    return out;
}

DeltaResult delta(const Eigen::VectorXd& ranges, const AnchorMap& anchors, const TagPositions& init,
                  const TagGeometry& tags, const TrilaterationConfig& cfg) {
    DeltaResult out;
    out.trilateration = solve(ranges, anchors, init, cfg);
    out.orientation = orientation_from_tags(out.trilateration.tags, tags);
    return out;
}

}  // namespace tbod
