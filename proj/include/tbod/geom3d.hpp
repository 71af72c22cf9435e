#pragma once

#include <Eigen/Dense>

namespace tbod {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/**
 * Unit quaternion stored scalar-last as [x, y, z, w].
 *
 * Hamilton convention; the rotation it encodes maps body-frame vectors into
 * the global frame. Every constructor normalizes and canonicalizes the sign
 * (w >= 0), so two quaternions describing the same rotation compare equal.
 */
class Quaternion {
public:
    Quaternion() : coeffs_(0.0, 0.0, 0.0, 1.0) {}
    Quaternion(double x, double y, double z, double w);
    explicit Quaternion(const Vec4& coeffs);

    static Quaternion identity() { return {}; }

    double x() const { return coeffs_[0]; }
    double y() const { return coeffs_[1]; }
    double z() const { return coeffs_[2]; }
    double w() const { return coeffs_[3]; }
    Vec3 vec() const { return coeffs_.head<3>(); }
    const Vec4& coeffs() const { return coeffs_; }

    bool operator==(const Quaternion& other) const { return coeffs_ == other.coeffs_; }

private:
    Vec4 coeffs_;
};

/// Roll about global X, pitch about global Y, yaw about global Z, applied in
/// that order (extrinsic X-Y-Z), i.e. R = Rz(yaw) * Ry(pitch) * Rx(roll).
struct EulerAngles {
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;

    Vec3 as_vector() const { return {roll, pitch, yaw}; }
    static EulerAngles from_vector(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

struct EulerConversion {
    EulerAngles angles;
    bool gimbal_lock = false;
};

inline constexpr double kGimbalLockTolerance = 1e-6;

/// 4x4 matrix with q_dot = 0.5 * omega_matrix(w) * q for a global-frame rate w.
Mat4 omega_matrix(const Vec3& w);

/// Left-product matrix: q_mul(a, b).coeffs() == normalize(product_matrix(a) * b.coeffs()).
Mat4 product_matrix(const Quaternion& q);

Quaternion q_mul(const Quaternion& a, const Quaternion& b);
Quaternion q_inv(const Quaternion& q);

EulerConversion q2a_checked(const Quaternion& q);
EulerAngles q2a(const Quaternion& q);
Quaternion a2q(const EulerAngles& e);

Mat3 to_rotation_matrix(const Quaternion& q);
Quaternion from_rotation_matrix(const Mat3& r);
EulerAngles euler_from_matrix(const Mat3& r);

/// Rotation by angle |v| about v (global frame), as a quaternion.
Quaternion from_rotation_vector(const Vec3& v);

/// Wrap to (-pi, pi].
double wrap_angle(double a);

Mat3 skew(const Vec3& v);

}  // namespace tbod
