#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tbod/geom3d.hpp"

using namespace tbod;
using tbod::testing::kPi;

namespace {

Mat3 rx(double a) {
    Mat3 m;
    m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
    return m;
}
Mat3 ry(double a) {
    Mat3 m;
    m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
    return m;
}
Mat3 rz(double a) {
    Mat3 m;
    m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    return m;
}

// Hamilton product written out component by component, scalar last.
Vec4 hamilton(const Vec4& a, const Vec4& b) {
    const double ax = a[0], ay = a[1], az = a[2], aw = a[3];
    const double bx = b[0], by = b[1], bz = b[2], bw = b[3];
    return {aw * bx + ax * bw + ay * bz - az * by, aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw, aw * bw - ax * bx - ay * by - az * bz};
}

bool same_rotation(const Quaternion& a, const Quaternion& b, double tol) {
    return (a.coeffs() - b.coeffs()).norm() < tol || (a.coeffs() + b.coeffs()).norm() < tol;
}

}  // namespace

TEST_CASE("quaternion construction normalizes and canonicalizes sign") {
    const Quaternion q(0.0, 0.0, -2.0, -2.0);
    CHECK(std::abs(q.coeffs().norm() - 1.0) < 1e-15);
    CHECK(q.w() > 0.0);
    CHECK(q.z() == doctest::Approx(std::sqrt(0.5)));

    const Quaternion half_turn(0.0, -1.0, 0.0, 0.0);
    CHECK(half_turn.y() == 1.0);
    CHECK(Quaternion(0.0, 0.0, 0.0, -1.0) == Quaternion::identity());
}

TEST_CASE("renormalizing a unit quaternion is bit exact") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const Quaternion q = testing::random_quaternion(rng);
        CHECK(Quaternion(q.coeffs()) == q);
    }
}

TEST_CASE("omega matrix") {
    CHECK(omega_matrix(Vec3::Zero()).isZero(0.0));

    Mat4 expected;
    expected << 0, 0, 0, 1, 0, 0, -1, 0, 0, 1, 0, 0, -1, 0, 0, 0;
    CHECK(omega_matrix(Vec3(1, 0, 0)) == expected);

    const Vec4 qdot = 0.5 * omega_matrix(Vec3(0, 0, 1)) * Vec4(0, 0, 0, 1);
    CHECK(qdot == Vec4(0, 0, 0.5, 0));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const Mat4 a = omega_matrix(Vec3(n(rng), n(rng), n(rng)));
        CHECK((a + a.transpose()).isZero(0.0));
    }
}

TEST_CASE("q_mul") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const Quaternion a = testing::random_quaternion(rng);
        const Quaternion b = testing::random_quaternion(rng);
        CHECK(q_mul(Quaternion::identity(), b) == b);
        CHECK(same_rotation(q_mul(a, q_inv(a)), Quaternion::identity(), 1e-12));
        CHECK(same_rotation(q_mul(a, b), Quaternion(hamilton(a.coeffs(), b.coeffs())), 1e-12));
        const Mat3 lhs = to_rotation_matrix(q_mul(a, b));
        const Mat3 rhs = to_rotation_matrix(a) * to_rotation_matrix(b);
        CHECK((lhs - rhs).norm() < 1e-9);
    }

    const Quaternion yaw90 = a2q({0, 0, kPi / 2});
    const Quaternion composed = q_mul(yaw90, yaw90);
    CHECK((to_rotation_matrix(composed) - rz(kPi / 2) * rz(kPi / 2)).norm() < 1e-12);
    CHECK(same_rotation(composed, a2q({0, 0, kPi}), 1e-12));
}

TEST_CASE("q_inv") {
    CHECK(q_inv(Quaternion::identity()) == Quaternion::identity());
    for (double phi : {0.3, -1.2, 2.9}) {
        const Quaternion q = a2q({0, 0, phi});
        CHECK(same_rotation(q_inv(q), a2q({0, 0, -phi}), 1e-12));
        CHECK((to_rotation_matrix(q_inv(q)) - to_rotation_matrix(q).transpose()).norm() < 1e-12);
    }
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
        const Quaternion q = testing::random_quaternion(rng);
        CHECK(q_inv(q_inv(q)) == q);
    }
}

TEST_CASE("Euler conversions follow extrinsic X-Y-Z") {
    CHECK(q2a(Quaternion::identity()).as_vector().isZero(0.0));
    const EulerAngles e = q2a(a2q({0, 0, kPi / 2}));
    CHECK(e.roll == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.pitch == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.yaw == doctest::Approx(kPi / 2).epsilon(1e-12));

    for (const Vec3 angles : {Vec3(0.1, -0.2, 0.3), Vec3(-1.0, 0.5, 2.5), Vec3(0.7, -1.3, -3.0)}) {
        const Mat3 oracle = rz(angles[2]) * ry(angles[1]) * rx(angles[0]);
        const Quaternion q = a2q(EulerAngles::from_vector(angles));
        CHECK((to_rotation_matrix(q) - oracle).norm() < 1e-12);
        CHECK((q2a(q).as_vector() - angles).norm() < 1e-9);
    }

    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const Quaternion q = testing::random_quaternion(rng);
        const EulerAngles a = q2a(q);
        const Mat3 rebuilt = rz(a.yaw) * ry(a.pitch) * rx(a.roll);
        CHECK((rebuilt - to_rotation_matrix(q)).norm() < 1e-9);
        CHECK(same_rotation(a2q(a), q, 1e-9));
    }
}

TEST_CASE("gimbal lock forces roll to zero and raises the flag") {
    const Quaternion q = a2q({0.4, kPi / 2, 0.9});
    const EulerConversion c = q2a_checked(q);
    CHECK(c.gimbal_lock);
    CHECK(c.angles.roll == 0.0);
    CHECK((to_rotation_matrix(a2q(c.angles)) - to_rotation_matrix(q)).norm() < 1e-6);
    CHECK_FALSE(q2a_checked(a2q({0.1, 0.2, 0.3})).gimbal_lock);
}

TEST_CASE("rotation matrices") {
    CHECK(to_rotation_matrix(Quaternion::identity()) == Mat3::Identity());
    const Vec3 r = to_rotation_matrix(a2q({0, 0, kPi / 2})) * Vec3(1, 0, 0);
    CHECK((r - Vec3(0, 1, 0)).norm() < 1e-12);

    std::mt19937_64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        const Quaternion q = testing::random_quaternion(rng);
        const Mat3 m = to_rotation_matrix(q);
        CHECK((m.transpose() * m - Mat3::Identity()).norm() < 1e-12);
        CHECK(same_rotation(from_rotation_matrix(m), q, 1e-12));
    }
}

TEST_CASE("rotation vectors and skew") {
    const Quaternion q = from_rotation_vector(Vec3(0, 0, kPi / 3));
    CHECK((to_rotation_matrix(q) - rz(kPi / 3)).norm() < 1e-12);
    CHECK(from_rotation_vector(Vec3::Zero()) == Quaternion::identity());
    const Vec3 a(1, 2, 3), b(-0.5, 0.25, 4);
    CHECK((skew(a) * b - a.cross(b)).norm() < 1e-15);
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
    CHECK(wrap_angle(0.25) == 0.25);
    for (double a = -20.0; a < 20.0; a += 0.37) {
        const double w = wrap_angle(a);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        CHECK(std::abs(std::remainder(a - w, 2 * kPi)) < 1e-12);
    }
}

TEST_CASE("quaternion norm survives flow integration") {
    // One RK4 step of q_dot = 0.5 * omega(w) * q drifts the norm by O(h^5) only.
    Quaternion q;
    const Vec3 w(0.3, -0.2, 1.1);
    const Mat4 a = 0.5 * omega_matrix(w);
    const double h = 0.01;
    for (int k = 0; k < 1000; ++k) {
        const Vec4 c = q.coeffs();
        const Vec4 k1 = a * c;
        const Vec4 k2 = a * (c + 0.5 * h * k1);
        const Vec4 k3 = a * (c + 0.5 * h * k2);
        const Vec4 k4 = a * (c + h * k3);
        const Vec4 next = c + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        CHECK(std::abs(next.norm() - 1.0) < 1e-6);
        q = Quaternion(next);
    }
}
