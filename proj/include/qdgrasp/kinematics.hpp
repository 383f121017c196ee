#ifndef QDGRASP_KINEMATICS_HPP
#define QDGRASP_KINEMATICS_HPP

#include <qdgrasp/se3.hpp>
#include <qdgrasp/shapes.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qdgrasp {

using JointConfiguration = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

enum class JointType { revolute, prismatic };

enum class Synergy { parallel, thumb_index, thumb_mid, thumb_index_mid, all_hand };

inline constexpr std::array<Synergy, 5> kAllSynergies{Synergy::parallel, Synergy::thumb_index, Synergy::thumb_mid,
                                                      Synergy::thumb_index_mid, Synergy::all_hand};

inline const char* to_string(Synergy s)
{
    switch (s) {
    case Synergy::parallel:
        return "parallel";
    case Synergy::thumb_index:
        return "thumb_index";
    case Synergy::thumb_mid:
        return "thumb_mid";
    case Synergy::thumb_index_mid:
        return "thumb_index_mid";
    case Synergy::all_hand:
        return "all_hand";
    }
    return "parallel";
}

inline Synergy synergy_from_string(const std::string& s)
{
    for (Synergy v : kAllSynergies)
        if (s == to_string(v))
            return v;
    throw std::invalid_argument("unknown synergy '" + s + "'");
}

struct Joint {
    std::string name;
    Vec3 axis = Vec3::UnitZ();
    RigidTransform origin; // joint frame relative to the parent link frame
    JointType type = JointType::revolute;
    double lower = -kPi;
    double upper = kPi;
    double link_mass = 1.0; // lumped at the child link origin
};

/// One finger: its collision shape in the end-effector frame at full opening
/// and the unit direction it travels when closing.
struct Finger {
    std::string name;
    Shape shape;
    Vec3 closure_direction = Vec3::UnitY();
};

struct GripperModel {
    std::vector<Finger> fingers;
    double aperture = 0.08; // full opening; each finger travels aperture / 2
    std::map<Synergy, std::vector<int>> synergies;

    std::vector<Synergy> available_synergies() const
    {
        std::vector<Synergy> out;
        for (const auto& [s, _] : synergies)
            out.push_back(s);
        return out;
    }
};

/// Serial chain. Link 0 is the fixed base, link j + 1 is moved by joint j, and
/// the gripper counts as link joints.size() + 1 for collision bookkeeping.
struct RobotModel {
    std::string id;
    std::vector<Joint> joints;
    RigidTransform base_pose; // B = W unless configured otherwise
    RigidTransform ee_offset;
    std::vector<std::vector<Shape>> link_shapes; // size joints.size() + 1, in link frames
    GripperModel gripper;
    Vec3 gravity{0.0, 0.0, -9.81};
    std::vector<std::pair<int, int>> excluded_pairs; // beyond the automatic adjacent pairs
    std::vector<int> table_exempt_links{0};
    std::optional<JointConfiguration> home;

    std::size_t dof() const { return joints.size(); }
    int gripper_link() const { return static_cast<int>(joints.size()) + 1; }

    void validate() const
    {
        if (joints.size() < 2 || joints.size() > 12)
            throw std::invalid_argument("robot must have between 2 and 12 joints");
        for (const auto& j : joints) {
            if (std::abs(j.axis.norm() - 1.0) > 1e-9)
                throw std::invalid_argument("joint '" + j.name + "' axis must be unit length");
            if (!(j.lower < j.upper))
                throw std::invalid_argument("joint '" + j.name + "' limits must satisfy lower < upper");
        }
        if (link_shapes.size() != joints.size() + 1)
            throw std::invalid_argument("robot needs one shape list per link (joints + 1)");
        for (const auto& link : link_shapes)
            for (const auto& s : link)
                qdgrasp::validate(s);
        for (const auto& f : gripper.fingers) {
            qdgrasp::validate(f.shape);
            if (std::abs(f.closure_direction.norm() - 1.0) > 1e-9)
                throw std::invalid_argument("finger closure direction must be unit length");
        }
        for (const auto& [s, idx] : gripper.synergies)
            for (int i : idx)
                if (i < 0 || i >= static_cast<int>(gripper.fingers.size()))
                    throw std::invalid_argument(std::string("synergy ") + to_string(s) + " names a missing finger");
        if (home && static_cast<std::size_t>(home->size()) != joints.size())
            throw std::invalid_argument("home configuration length mismatch");
    }

    bool pair_excluded(int a, int b) const
    {
        if (a > b)
            std::swap(a, b);
        if (b - a <= 1)
            return true;
        return std::any_of(excluded_pairs.begin(), excluded_pairs.end(), [&](const auto& p) {
            return (p.first == a && p.second == b) || (p.first == b && p.second == a);
        });
    }
};

inline void require_length(const RobotModel& robot, const JointConfiguration& q)
{
    if (static_cast<std::size_t>(q.size()) != robot.dof())
        throw std::invalid_argument("joint configuration length " + std::to_string(q.size()) +
                                    " does not match robot dof " + std::to_string(robot.dof()));
}

inline bool within_limits(const RobotModel& robot, const JointConfiguration& q)
{
    require_length(robot, q);
    for (std::size_t i = 0; i < robot.dof(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        if (q[k] < robot.joints[i].lower || q[k] > robot.joints[i].upper)
            return false;
    }
    return true;
}

inline JointConfiguration clamp_to_limits(const RobotModel& robot, JointConfiguration q)
{
    for (std::size_t i = 0; i < robot.dof(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        q[k] = std::clamp(q[k], robot.joints[i].lower, robot.joints[i].upper);
    }
    return q;
}

/// Home configuration, clamped into limits (all zeros when unspecified).
inline JointConfiguration home_configuration(const RobotModel& robot)
{
    return clamp_to_limits(robot, robot.home ? *robot.home
                                             : JointConfiguration(JointConfiguration::Zero(
                                                   static_cast<Eigen::Index>(robot.dof()))));
}

inline RigidTransform joint_motion(const Joint& j, double q)
{
    if (j.type == JointType::revolute)
        return RigidTransform::from_rotation(axis_angle(j.axis, q));
    return RigidTransform::from_translation(j.axis * q);
}

struct ChainPose {
    std::vector<RigidTransform> links; // base + one per joint, world frame
    std::vector<Vec3> axes;            // joint axes, world frame
    std::vector<Vec3> origins;         // joint frame origins, world frame
    RigidTransform end_effector;
};

inline ChainPose chain_pose(const RobotModel& robot, const JointConfiguration& q)
{
    require_length(robot, q);
    ChainPose out;
    out.links.reserve(robot.dof() + 1);
    out.axes.reserve(robot.dof());
    out.origins.reserve(robot.dof());
    RigidTransform t = robot.base_pose;
    out.links.push_back(t);
    for (std::size_t i = 0; i < robot.dof(); ++i) {
        const Joint& j = robot.joints[i];
        t = compose(t, j.origin);
        out.axes.push_back(t.rotation() * j.axis);
        out.origins.push_back(t.translation());
        t = compose(t, joint_motion(j, q[static_cast<Eigen::Index>(i)]));
        out.links.push_back(t);
    }
    out.end_effector = compose(t, robot.ee_offset);
    return out;
}

/// End-effector pose in the base (= world) frame.
inline RigidTransform forward_kinematics(const RobotModel& robot, const JointConfiguration& q)
{
    return chain_pose(robot, q).end_effector;
}

/// Geometric Jacobian of the point `point` rigidly attached to link
/// `link` (joints 0..link-1 contribute). Rows: linear, then angular.
inline Jacobian point_jacobian(const RobotModel& robot, const ChainPose& pose, std::size_t link, const Vec3& point)
{
    Jacobian jac = Jacobian::Zero(6, static_cast<Eigen::Index>(robot.dof()));
    for (std::size_t i = 0; i < std::min(link, robot.dof()); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        const Vec3& z = pose.axes[i];
        if (robot.joints[i].type == JointType::revolute) {
            jac.block<3, 1>(0, c) = z.cross(point - pose.origins[i]);
            jac.block<3, 1>(3, c) = z;
        } else {
            jac.block<3, 1>(0, c) = z;
        }
    }
    return jac;
}

inline Jacobian jacobian(const RobotModel& robot, const JointConfiguration& q)
{
    const ChainPose pose = chain_pose(robot, q);
    return point_jacobian(robot, pose, robot.dof(), pose.end_effector.translation());
}

struct IkOptions {
    double damping = 1e-2;
    double max_step = 0.2;
    int max_iterations = 300;
    double position_tolerance = 1e-4;
    double orientation_tolerance = 1e-3;
};

/// Outcome of inverse_kinematics. `reachable` false is the Unreachable case;
/// the residuals are kept for diagnostics either way.
struct IkResult {
    bool reachable = false;
    JointConfiguration q;
    double position_error = 0.0;
    double orientation_error = 0.0;
    int iterations = 0;

    explicit operator bool() const { return reachable; }
};

inline Eigen::Matrix<double, 6, 1> pose_error(const RigidTransform& target, const RigidTransform& current)
{
    Eigen::Matrix<double, 6, 1> e;
    e.head<3>() = target.translation() - current.translation();
    e.tail<3>() = rotation_log(target.rotation() * current.rotation().transpose());
    return e;
}

/// Damped least squares with per-iteration step clamping and joint-limit
/// clamping; fails if the clamped iteration does not reach the tolerances.
inline IkResult inverse_kinematics(const RobotModel& robot, const RigidTransform& target, const JointConfiguration& seed,
                                   const IkOptions& opt = {})
{
    require_length(robot, seed);
    IkResult res;
    res.q = clamp_to_limits(robot, seed);
    const auto n = static_cast<Eigen::Index>(robot.dof());
    const double lambda2 = opt.damping * opt.damping;
    for (int it = 0;; ++it) {
        const ChainPose pose = chain_pose(robot, res.q);
        const Eigen::Matrix<double, 6, 1> e = pose_error(target, pose.end_effector);
        res.position_error = e.head<3>().norm();
        res.orientation_error = e.tail<3>().norm();
        res.iterations = it;
        if (res.position_error <= opt.position_tolerance && res.orientation_error <= opt.orientation_tolerance) {
            res.reachable = true;
            return res;
        }
        if (it >= opt.max_iterations)
            return res;
        const Jacobian jac = point_jacobian(robot, pose, robot.dof(), pose.end_effector.translation());
        const Eigen::Matrix<double, 6, 6> jjt = jac * jac.transpose() + lambda2 * Eigen::Matrix<double, 6, 6>::Identity();
        Eigen::VectorXd dq = jac.transpose() * jjt.ldlt().solve(e);
        const double largest = dq.cwiseAbs().maxCoeff();
        if (largest > opt.max_step)
            dq *= opt.max_step / largest;
        if (n > 0 && largest < 1e-14)
            return res; // stalled, typically against a joint limit
        res.q = clamp_to_limits(robot, res.q + dq);
    }
}

/// True iff no joint moves more than max_step between consecutive configurations.
inline bool check_joint_jump(const std::vector<JointConfiguration>& qs, double max_step)
{
    for (std::size_t i = 1; i < qs.size(); ++i)
        if ((qs[i] - qs[i - 1]).cwiseAbs().maxCoeff() > max_step)
            return false;
    return true;
}

/// Upper bound on the distance from the base origin to the end-effector origin.
inline double kinematic_reach(const RobotModel& robot)
{
    double reach = 0.0;
    for (const auto& j : robot.joints) {
        reach += j.origin.translation().norm();
        if (j.type == JointType::prismatic)
            reach += std::max(std::abs(j.lower), std::abs(j.upper));
    }
    return reach + robot.ee_offset.translation().norm();
}

/// Upper bound on how far from the base origin any gripper point can get.
inline double tool_reach(const RobotModel& robot)
{
    double extent = 0.0;
    for (const auto& f : robot.gripper.fingers) {
        const BoundingSphere b = bounding_sphere(f.shape);
        extent = std::max(extent, b.center.norm() + b.radius);
    }
    return kinematic_reach(robot) + extent;
}

} // namespace qdgrasp

#endif
