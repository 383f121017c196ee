#ifndef QDGRASP_SE3_HPP
#define QDGRASP_SE3_HPP

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>

namespace qdgrasp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Euler convention shared by every state <-> transform conversion and
/// written into file headers: intrinsic X-Y-Z, R = Rx(roll) Ry(pitch) Rz(yaw).
inline constexpr const char* kEulerConvention = "intrinsic-xyz";

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a)
{
    if (a > -kPi && a <= kPi)
        return a;
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi)
        a += 2.0 * kPi;
    return a;
}

inline Mat3 rot_x(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << 1, 0, 0, 0, c, -s, 0, s, c;
    return r;
}

inline Mat3 rot_y(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, 0, s, 0, 1, 0, -s, 0, c;
    return r;
}

inline Mat3 rot_z(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return r;
}

/// Rotation about a unit axis (Rodrigues).
inline Mat3 axis_angle(const Vec3& axis, double angle)
{
    return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

/// Rotation-vector (log map) of a rotation matrix.
inline Vec3 rotation_log(const Mat3& r)
{
    const Eigen::AngleAxisd aa(r);
    return aa.axis() * aa.angle();
}

/// Exponential map of a rotation vector.
inline Mat3 rotation_exp(const Vec3& w)
{
    const double angle = w.norm();
    if (angle == 0.0)
        return Mat3::Identity();
    return axis_angle(w / angle, angle);
}

/// Nearest rotation in the Frobenius sense (polar decomposition).
inline Mat3 project_to_rotation(const Mat3& m)
{
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    const Mat3& v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0)
        u.col(2) = -u.col(2);
    return u * v.transpose();
}

/// Rigid-body transform. Reads as "a_from_b": maps coordinates expressed in
/// frame b into frame a.
class RigidTransform {
public:
    static constexpr double kDriftTolerance = 1e-12;

    RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
    RigidTransform(const Mat3& rotation, const Vec3& translation) : rotation_(rotation), translation_(translation) {}

    static RigidTransform identity() { return {}; }
    static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
    static RigidTransform from_rotation(const Mat3& r) { return {r, Vec3::Zero()}; }

    /// From a 4x4 homogeneous matrix; the rotation block is projected onto SO(3).
    static RigidTransform from_matrix(const Mat4& m)
    {
        RigidTransform h(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
        h.orthonormalize_if_drifted();
        return h;
    }

    /// 16 row-major entries, as stored on disk.
    static RigidTransform from_row_major(const std::array<double, 16>& v)
    {
        Mat4 m;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                m(r, c) = v[static_cast<std::size_t>(4 * r + c)];
        return from_matrix(m);
    }

    const Mat3& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }

    Mat4 matrix() const
    {
        Mat4 m = Mat4::Identity();
        m.topLeftCorner<3, 3>() = rotation_;
        m.topRightCorner<3, 1>() = translation_;
        return m;
    }

    std::array<double, 16> row_major() const
    {
        std::array<double, 16> out{};
        const Mat4 m = matrix();
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                out[static_cast<std::size_t>(4 * r + c)] = m(r, c);
        return out;
    }

    Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
    Vec3 apply_vector(const Vec3& v) const { return rotation_ * v; }

    /// Largest entry of |R^T R - I|.
    double orthonormality_drift() const
    {
        return (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
    }

    void orthonormalize_if_drifted()
    {
        if (orthonormality_drift() > kDriftTolerance || rotation_.determinant() < 0.0)
            rotation_ = project_to_rotation(rotation_);
    }

    friend bool operator==(const RigidTransform& a, const RigidTransform& b)
    {
        return a.rotation_ == b.rotation_ && a.translation_ == b.translation_;
    }

private:
    Mat3 rotation_;
    Vec3 translation_;
};

/// a * b as 4x4 matrices.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b)
{
    RigidTransform out(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation());
    out.orthonormalize_if_drifted();
    return out;
}

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) { return compose(a, b); }

/// (R^T, -R^T t); no general matrix inversion.
inline RigidTransform invert(const RigidTransform& h)
{
    const Mat3 rt = h.rotation().transpose();
    return {rt, -(rt * h.translation())};
}

/// Max per-entry difference between the 4x4 forms.
inline double max_abs_diff(const RigidTransform& a, const RigidTransform& b)
{
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

/// End-effector position (m) plus roll/pitch/yaw (rad) in kEulerConvention.
struct EndEffectorState {
    Vec3 position = Vec3::Zero();
    Vec3 euler = Vec3::Zero();

    bool finite() const { return position.allFinite() && euler.allFinite(); }

    friend bool operator==(const EndEffectorState& a, const EndEffectorState& b)
    {
        return a.position == b.position && a.euler == b.euler;
    }
};

inline Mat3 euler_to_rotation(const Vec3& rpy) { return rot_x(rpy.x()) * rot_y(rpy.y()) * rot_z(rpy.z()); }

/// Inverse of euler_to_rotation. At gimbal lock (|pitch| = pi/2) roll is set
/// to zero and the remaining rotation folds into yaw.
inline Vec3 rotation_to_euler(const Mat3& r)
{
    const double cos_pitch = std::hypot(r(0, 0), r(0, 1));
    const double pitch = std::atan2(r(0, 2), cos_pitch);
    double roll = 0.0;
    double yaw = 0.0;
    if (cos_pitch > 1e-12) {
        roll = std::atan2(-r(1, 2), r(2, 2));
        yaw = std::atan2(-r(0, 1), r(0, 0));
    } else {
        yaw = std::atan2(r(1, 0), r(1, 1));
    }
    return {normalize_angle(roll), normalize_angle(pitch), normalize_angle(yaw)};
}

inline RigidTransform state_to_transform(const EndEffectorState& s)
{
    return {euler_to_rotation(s.euler), s.position};
}

inline EndEffectorState transform_to_state(const RigidTransform& h)
{
    return {h.translation(), rotation_to_euler(h.rotation())};
}

/// Spherical interpolation between two rotations, t in [0, 1].
inline Mat3 slerp(const Mat3& a, const Mat3& b, double t)
{
    const Eigen::Quaterniond qa(a);
    const Eigen::Quaterniond qb(b);
    return qa.slerp(t, qb).toRotationMatrix();
}

} // namespace qdgrasp

#endif
