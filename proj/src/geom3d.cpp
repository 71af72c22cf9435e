#include "tbod/geom3d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tbod {

namespace {

Vec4 canonical(Vec4 c) {
    const double n = c.norm();
    if (n == 0.0 || !std::isfinite(n)) {
        return {0.0, 0.0, 0.0, 1.0};
    }
    // Skip rescaling already-unit input so canonicalization is idempotent bitwise.
    if (std::abs(n - 1.0) > 8.0 * std::numeric_limits<double>::epsilon()) {
        c /= n;
    }
    bool flip = c[3] < 0.0;
    if (c[3] == 0.0) {
        for (int i = 0; i < 3; ++i) {
            if (c[i] != 0.0) {
                flip = c[i] < 0.0;
                break;
            }
        }
    }
    if (flip) {
        c = -c;
    }
    // -0.0 would break bitwise equality of identical rotations.
    for (int i = 0; i < 4; ++i) {
        c[i] += 0.0;
    }
    return c;
}

}  // namespace

Quaternion::Quaternion(double x, double y, double z, double w) : coeffs_(canonical({x, y, z, w})) {}

Quaternion::Quaternion(const Vec4& coeffs) : coeffs_(canonical(coeffs)) {}

Mat4 omega_matrix(const Vec3& w) {
    Mat4 m;
    // clang-format off
    m <<  0.0,  -w.z(),  w.y(), w.x(),
          w.z(),  0.0,  -w.x(), w.y(),
         -w.y(),  w.x(),  0.0,  w.z(),
         -w.x(), -w.y(), -w.z(), 0.0;
    // clang-format on
    return m;
}

Mat4 product_matrix(const Quaternion& q) {
    Mat4 m = omega_matrix(q.vec());
    m.diagonal().setConstant(q.w());
    return m;
}

Quaternion q_mul(const Quaternion& a, const Quaternion& b) {
    return Quaternion(Vec4(product_matrix(a) * b.coeffs()));
}

Quaternion q_inv(const Quaternion& q) { return {-q.x(), -q.y(), -q.z(), q.w()}; }

Mat3 to_rotation_matrix(const Quaternion& q) {
    const double x = q.x(), y = q.y(), z = q.z(), w = q.w();
    Mat3 r;
    // clang-format off
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
         2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y);
    // clang-format on
    return r;
}

Quaternion from_rotation_matrix(const Mat3& r) {
    // Shepperd's method: pick the largest diagonal term for stability.
    const double trace = r.trace();
    Vec4 c;
    if (trace > r(0, 0) && trace > r(1, 1) && trace > r(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + trace);
        c = {(r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s, 0.25 * s};
    } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
        c = {0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s, (r(2, 1) - r(1, 2)) / s};
    } else if (r(1, 1) >= r(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
        c = {(r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s, (r(0, 2) - r(2, 0)) / s};
    } else {
        const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
        c = {(r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s, (r(1, 0) - r(0, 1)) / s};
    }
    return Quaternion(c);
}

double wrap_angle(double a) {
    constexpr double pi = std::numbers::pi;
    if (a > -pi && a <= pi) {
        return a;
    }
    double r = std::remainder(a, 2.0 * pi);
    if (r <= -pi) {
        r += 2.0 * pi;
    }
    return r;
}

namespace {

EulerConversion euler_from_terms(double r00, double r01, double r10, double r11, double r20, double r21,
                                 double r22) {
    constexpr double half_pi = std::numbers::pi / 2.0;
    EulerConversion out;
    const double pitch = std::asin(std::clamp(-r20, -1.0, 1.0));
    if (half_pi - std::abs(pitch) < kGimbalLockTolerance) {
        // Only yaw - roll (or yaw + roll) is observable; pin roll to zero.
        out.gimbal_lock = true;
        out.angles = {0.0, pitch, wrap_angle(std::atan2(-r01, r11))};
        return out;
    }
    out.angles.roll = wrap_angle(std::atan2(r21, r22));
    out.angles.pitch = pitch;
    out.angles.yaw = wrap_angle(std::atan2(r10, r00));
    return out;
}

}  // namespace

EulerConversion q2a_checked(const Quaternion& q) {
    const Mat3 r = to_rotation_matrix(q);
    return euler_from_terms(r(0, 0), r(0, 1), r(1, 0), r(1, 1), r(2, 0), r(2, 1), r(2, 2));
}

EulerAngles q2a(const Quaternion& q) { return q2a_checked(q).angles; }

EulerAngles euler_from_matrix(const Mat3& r) {
    return euler_from_terms(r(0, 0), r(0, 1), r(1, 0), r(1, 1), r(2, 0), r(2, 1), r(2, 2)).angles;
}

Quaternion a2q(const EulerAngles& e) {
    const double cr = std::cos(0.5 * e.roll), sr = std::sin(0.5 * e.roll);
    const double cp = std::cos(0.5 * e.pitch), sp = std::sin(0.5 * e.pitch);
    const double cy = std::cos(0.5 * e.yaw), sy = std::sin(0.5 * e.yaw);
    return {sr * cp * cy - cr * sp * sy, cr * sp * cy + sr * cp * sy, cr * cp * sy - sr * sp * cy,
            cr * cp * cy + sr * sp * sy};
}

Quaternion from_rotation_vector(const Vec3& v) {
    const double angle = v.norm();
    if (angle < 1e-12) {
        return {0.5 * v.x(), 0.5 * v.y(), 0.5 * v.z(), 1.0};
    }
    const Vec3 axis = v / angle;
    const double s = std::sin(0.5 * angle);
    return {axis.x() * s, axis.y() * s, axis.z() * s, std::cos(0.5 * angle)};
}

Mat3 skew(const Vec3& v) {
    Mat3 m;
    // clang-format off
    m <<  0.0,   -v.z(),  v.y(),
          v.z(),  0.0,   -v.x(),
         -v.y(),  v.x(),  0.0;
    // clang-format on
    return m;
}

}  // namespace tbod
