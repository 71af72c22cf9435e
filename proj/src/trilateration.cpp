#include "tbod/trilateration.hpp"

#include <cmath>
#include <string>

#include "tbod/errors.hpp"

namespace tbod {

namespace {

constexpr double kAnchorContact = 1e-12;

Eigen::Ref<const Eigen::VectorXd> tag_block(const Eigen::VectorXd& ranges, std::size_t tag, std::size_t n) {
    return ranges.segment(static_cast<Eigen::Index>(tag * n), static_cast<Eigen::Index>(n));
}

void check_ranges(const Eigen::VectorXd& ranges, const AnchorMap& anchors) {
    if (static_cast<std::size_t>(ranges.size()) != 3 * anchors.size()) {
        throw InvalidConfig("expected " + std::to_string(3 * anchors.size()) + " ranges, got " +
                            std::to_string(ranges.size()));
    }
}

}  // namespace

TrilaterationConfig TrilaterationConfig::for_anchors(const AnchorMap& anchors, double floor_height) {
    TrilaterationConfig cfg;
    const Vec3 c = anchors.centroid();
    cfg.fallback_init = Vec3(c.x(), c.y(), floor_height);
    return cfg;
}

double tag_cost(const Vec3& p, const AnchorMap& anchors, const Eigen::Ref<const Eigen::VectorXd>& ranges) {
    double j = 0.0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const double r = (anchors.positions[i] - p).norm() - ranges[static_cast<Eigen::Index>(i)];
        j += r * r;
    }
    return j;
}

double cost_J(const TagPositions& candidates, const AnchorMap& anchors, const Eigen::VectorXd& ranges) {
    check_ranges(ranges, anchors);
    const std::size_t n = anchors.size();
    double j = 0.0;
    for (std::size_t z = 0; z < 3; ++z) {
        j += tag_cost(candidates[z], anchors, tag_block(ranges, z, n));
    }
    return j;
}

Vec3 tag_gradient(const Vec3& p, const AnchorMap& anchors, const Eigen::Ref<const Eigen::VectorXd>& ranges) {
    Vec3 g = Vec3::Zero();
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const Vec3 diff = p - anchors.positions[i];
        const double dist = diff.norm();
        if (dist < kAnchorContact) {
            throw SingularHessian("tag estimate coincides with anchor " + std::to_string(i + 1));
        }
        g += 2.0 * (dist - ranges[static_cast<Eigen::Index>(i)]) * diff / dist;
    }
    return g;
}

Mat3 tag_hessian(const Vec3& p, const AnchorMap& anchors, const Eigen::Ref<const Eigen::VectorXd>& ranges) {
    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const Vec3 diff = p - anchors.positions[i];
        const double dist = diff.norm();
        if (dist < kAnchorContact) {
            throw SingularHessian("tag estimate coincides with anchor " + std::to_string(i + 1));
        }
        const Vec3 u = diff / dist;
        const Mat3 uut = u * u.transpose();
        const double resid = dist - ranges[static_cast<Eigen::Index>(i)];
        h += 2.0 * (uut + resid / dist * (Mat3::Identity() - uut));
    }
    return h;
}

Vec3 newton_step(const Vec3& p, const AnchorMap& anchors, const Eigen::Ref<const Eigen::VectorXd>& ranges,
                 double max_condition) {
    const Vec3 g = tag_gradient(p, anchors, ranges);
    const Mat3 h = tag_hessian(p, anchors, ranges);
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(h, Eigen::EigenvaluesOnly);
    const Vec3 mags = eig.eigenvalues().cwiseAbs();
    if (!(mags.minCoeff() > 0.0) || mags.maxCoeff() / mags.minCoeff() > max_condition) {
        throw SingularHessian("trilateration Hessian is singular (condition > " + std::to_string(max_condition) +
                              ")");
    }
    return p - h.ldlt().solve(g);
}

TrilaterationResult solve(const Eigen::VectorXd& ranges, const AnchorMap& anchors, const TagPositions& init,
                          const TrilaterationConfig& cfg) {
    check_ranges(ranges, anchors);
    const std::size_t n = anchors.size();
    for (const auto& p : init) {
        if (!p.allFinite() || (p - cfg.fallback_init).norm() > cfg.region_radius) {
            throw OutOfRegion("trilateration init lies outside the admissible region");
        }
    }
    const double j0 = cost_J(init, anchors, ranges);

    TrilaterationResult out;
    out.tags = init;
    for (std::size_t z = 0; z < 3; ++z) {
        const auto block = tag_block(ranges, z, n);
        for (int k = 0; k < cfg.iterations; ++k) {
            out.tags[z] = newton_step(out.tags[z], anchors, block, cfg.max_condition);
        }
    }
    out.iterations = cfg.iterations;
    out.residual = cost_J(out.tags, anchors, ranges);
    if (!std::isfinite(out.residual) || out.residual > 10.0 * j0 + 1e-12) {
        throw DivergedResult("trilateration cost grew from " + std::to_string(j0) + " to " +
                             std::to_string(out.residual));
    }
    out.barycenter = (out.tags[0] + out.tags[1] + out.tags[2]) / 3.0;
    return out;
}

TagPositions initial_guess(const std::optional<std::pair<Vec3, Quaternion>>& pose, const TagGeometry& tags,
                           const TrilaterationConfig& cfg) {
    if (pose) {
        return tag_positions(pose->first, pose->second, tags);
    }
    return {cfg.fallback_init, cfg.fallback_init, cfg.fallback_init};
}

}  // namespace tbod
