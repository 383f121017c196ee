#ifndef QDGRASP_GRASP_SIM_HPP
#define QDGRASP_GRASP_SIM_HPP

#include <qdgrasp/kinematics.hpp>
#include <qdgrasp/noise.hpp>
#include <qdgrasp/scene.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdgrasp {

struct GripperCommand {
    std::size_t close_step = 0;
    Synergy synergy = Synergy::parallel;
    double aperture = 0.08;
};

/// Open-loop reach-and-grasp trajectory: n end-effector states plus the
/// gripper command timeline.
struct Trajectory {
    std::vector<EndEffectorState> states;
    GripperCommand gripper;

    std::size_t size() const { return states.size(); }

    void validate() const
    {
        if (states.size() < 2 || states.size() > 1024)
            throw std::invalid_argument("trajectory needs between 2 and 1024 states");
        for (const auto& s : states)
            if (!s.finite())
                throw std::invalid_argument("trajectory states must be finite");
        if (gripper.close_step >= states.size())
            throw std::invalid_argument("gripper close_step must index a waypoint");
        if (!(gripper.aperture > 0.0))
            throw std::invalid_argument("gripper aperture must be positive");
    }
};

/// Tunables of the quasi-static roll-out and of the grasp predicate.
struct SimOptions {
    IkOptions ik;
    double max_joint_step = 0.5;      // rad between consecutive waypoints
    double contact_margin = kContactMargin;
    int closure_substeps = 20;
    double lift_height = 0.05;        // m, post-grasp lift used by the hold check
    double opposition_angle = kPi / 3; // contact normals must oppose within this angle
    double com_tolerance = 0.015;     // m, allowed COM offset from the contact span
};

struct Contact {
    Vec3 point = Vec3::Zero();       // object frame
    Vec3 normal = Vec3::UnitZ();     // object frame, outward from the object
    Vec3 world_point = Vec3::Zero();
    Vec3 world_normal = Vec3::UnitZ();
    int finger = 0;                  // gripper finger index (link gripper_link())
    int arrival = 0;                 // closure substep at which the finger touched
};

enum class FailureReason { none, ik_unreachable, joint_jump, collision, no_grasp, lift_failed };

inline const char* to_string(FailureReason r)
{
    switch (r) {
    case FailureReason::none:
        return "none";
    case FailureReason::ik_unreachable:
        return "ik";
    case FailureReason::joint_jump:
        return "joint_jump";
    case FailureReason::collision:
        return "collision";
    case FailureReason::no_grasp:
        return "no_grasp";
    case FailureReason::lift_failed:
        return "lift_failed";
    }
    return "none";
}

inline FailureReason failure_reason_from_string(const std::string& s)
{
    for (auto r : {FailureReason::none, FailureReason::ik_unreachable, FailureReason::joint_jump,
                   FailureReason::collision, FailureReason::no_grasp, FailureReason::lift_failed})
        if (s == to_string(r))
            return r;
    throw std::invalid_argument("unknown failure reason '" + s + "'");
}

struct GraspOutcome {
    bool success = false;
    FailureReason reason = FailureReason::none;
    std::size_t failure_step = 0;
    std::vector<JointConfiguration> joint_path;
    std::vector<std::vector<Contact>> contacts;
    std::vector<RigidTransform> object_pose_path;
    std::vector<Eigen::VectorXd> torque_path;
    std::size_t grasp_start_step = 0;
    std::size_t grasp_end_step = 0; // == steps() when the grasp never formed

    std::size_t steps() const { return joint_path.size(); }
};

/// Holding torques tau = dV/dq for the gravity potential of link masses lumped
/// at link origins plus a payload at the end effector.
inline Eigen::VectorXd quasi_static_torques(const RobotModel& robot, const JointConfiguration& q, double payload_mass)
{
    const ChainPose pose = chain_pose(robot, q);
    Eigen::VectorXd tau = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(robot.dof()));
    for (std::size_t l = 1; l <= robot.dof(); ++l) {
        const double m = robot.joints[l - 1].link_mass;
        if (m == 0.0)
            continue;
        const Jacobian j = point_jacobian(robot, pose, l, pose.links[l].translation());
        tau -= m * j.topRows<3>().transpose() * robot.gravity;
    }
    if (payload_mass != 0.0) {
        const Jacobian j = point_jacobian(robot, pose, robot.dof(), pose.end_effector.translation());
        tau -= payload_mass * j.topRows<3>().transpose() * robot.gravity;
    }
    return tau;
}

/// Geometric inputs of the grasp predicate, all in one common frame.
struct GraspCheckInput {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;
    Vec3 center_of_mass = Vec3::Zero();
    bool lift_holds = true;
};

struct GraspCheck {
    bool opposed = false;      // (a)
    bool spans_com = false;    // (b)
    bool lift_holds = false;   // (c)
    std::size_t pair_i = 0;
    std::size_t pair_j = 0;

    bool holds() const { return opposed && spans_com && lift_holds; }
};

namespace detail {

using Vec2 = Eigen::Vector2d;

inline double cross2(const Vec2& o, const Vec2& a, const Vec2& b)
{
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/// Distance from p to the convex hull of pts (0 when inside).
inline double distance_to_hull(std::vector<Vec2> pts, const Vec2& p)
{
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    std::vector<Vec2> hull;
    for (int pass = 0; pass < 2; ++pass) {
        const std::size_t start = hull.size();
        for (const Vec2& v : pts) {
            while (hull.size() >= start + 2 && cross2(hull[hull.size() - 2], hull.back(), v) <= 0.0)
                hull.pop_back();
            hull.push_back(v);
        }
        hull.pop_back();
        std::reverse(pts.begin(), pts.end());
    }
    if (hull.empty())
        hull.push_back(pts.front());
    auto seg_dist = [](const Vec2& a, const Vec2& b, const Vec2& x) {
        const Vec2 ab = b - a;
        const double len2 = ab.squaredNorm();
        const double t = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        return (a + t * ab - x).norm();
    };
    if (hull.size() == 1)
        return (hull[0] - p).norm();
    if (hull.size() == 2)
        return seg_dist(hull[0], hull[1], p);
    bool inside = true;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Vec2& a = hull[i];
        const Vec2& b = hull[(i + 1) % hull.size()];
        if (cross2(a, b, p) < 0.0)
            inside = false;
        best = std::min(best, seg_dist(a, b, p));
    }
    return inside ? 0.0 : best;
}

} // namespace detail

/// Force-closure proxy: (a) two contact normals oppose within the configured
/// angle, (b) the best-opposed pair's axis passes the center of mass (COM lies
/// between the pair along the axis and within com_tolerance of the contact
/// polygon across it), (c) the post-grasp lift kept the contacts.
inline GraspCheck grasp_success(const GraspCheckInput& in, const SimOptions& opt = {})
{
    GraspCheck out;
    out.lift_holds = in.lift_holds;
    const double min_dot = std::cos(opt.opposition_angle);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < in.points.size(); ++i) {
        for (std::size_t j = i + 1; j < in.points.size(); ++j) {
            const double opp = -in.normals[i].dot(in.normals[j]);
            if (opp >= min_dot - 1e-12 && opp > best) {
                best = opp;
                out.pair_i = i;
                out.pair_j = j;
                out.opposed = true;
            }
        }
    }
    if (!out.opposed)
        return out;
    const Vec3& pi = in.points[out.pair_i];
    const Vec3& pj = in.points[out.pair_j];
    Vec3 axis = pj - pi;
    const double len = axis.norm();
    axis = len > 1e-12 ? Vec3(axis / len) : Vec3(-in.normals[out.pair_i]);
    const double along = (in.center_of_mass - pi).dot(axis);
    const double along_j = (pj - pi).dot(axis);
    const bool between = along >= -opt.com_tolerance && along <= along_j + opt.com_tolerance;
    // project onto the plane orthogonal to the closure axis
    const Vec3 u = axis.unitOrthogonal();
    const Vec3 v = axis.cross(u);
    std::vector<detail::Vec2> projected;
    for (const auto& p : in.points)
        projected.emplace_back(p.dot(u), p.dot(v));
    const detail::Vec2 com(in.center_of_mass.dot(u), in.center_of_mass.dot(v));
    out.spans_com = between && detail::distance_to_hull(projected, com) <= opt.com_tolerance;
    return out;
}

/// IK-tracked joint path for a trajectory, each waypoint seeded from the
/// previous solution and the first from the home configuration.
struct JointPlan {
    std::vector<JointConfiguration> q;
    FailureReason reason = FailureReason::none;
    std::size_t failed_step = 0;
    double residual = 0.0;

    bool ok() const { return reason == FailureReason::none; }
};

inline JointPlan plan_joint_path(const RobotModel& robot, const std::vector<EndEffectorState>& states,
                                 const SimOptions& opt = {})
{
    JointPlan plan;
    JointConfiguration seed = home_configuration(robot);
    for (std::size_t i = 0; i < states.size(); ++i) {
        const IkResult ik = inverse_kinematics(robot, state_to_transform(states[i]), seed, opt.ik);
        if (!ik) {
            plan.reason = FailureReason::ik_unreachable;
            plan.failed_step = i;
            plan.residual = ik.position_error + ik.orientation_error;
            return plan;
        }
        if (i > 0 && (ik.q - plan.q.back()).cwiseAbs().maxCoeff() > opt.max_joint_step) {
            plan.reason = FailureReason::joint_jump;
            plan.failed_step = i;
            return plan;
        }
        plan.q.push_back(ik.q);
        seed = ik.q;
    }
    return plan;
}

namespace detail {

struct FingerContact {
    double distance = std::numeric_limits<double>::infinity();
    Vec3 object_point = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
};

inline FingerContact finger_object_contact(const RobotModel& robot, std::size_t finger, const RigidTransform& ee,
                                           double closure, const std::vector<Shape>& object_world)
{
    const Shape fs = finger_shape_world(robot, finger, ee, closure);
    const RigidTransform identity;
    FingerContact best;
    for (const auto& os : object_world) {
        const DistanceResult r = shape_distance(fs, identity, os, identity);
        if (r.distance < best.distance) {
            best.distance = r.distance;
            best.object_point = r.point_b;
            const Vec3 d = r.point_a - r.point_b;
            best.normal = r.distance > 1e-9 && d.norm() > 0.0 ? Vec3(d.normalized()) : surface_normal(os, r.point_b);
        }
    }
    return best;
}

inline std::vector<Shape> world_shapes(const ObjectModel& obj, const RigidTransform& pose)
{
    std::vector<Shape> out;
    out.reserve(obj.shapes.size());
    for (const auto& s : obj.shapes)
        out.push_back(transformed(s, pose));
    return out;
}

} // namespace detail

/// Executes a precomputed joint plan against the scene, optionally perturbed.
inline GraspOutcome execute_plan(const RobotModel& robot, const SceneModel& scene, const Trajectory& traj,
                                 const JointPlan& plan, const NoiseSample* noise, const SimOptions& opt = {})
{
    traj.validate();
    const std::size_t n = traj.size();
    const std::size_t close_step = traj.gripper.close_step;
    const NoiseSample nominal;
    const NoiseSample& ns = noise ? *noise : nominal;

    SceneModel world = scene;
    ObjectModel& target = world.objects.at(world.target);
    target.pose = ns.perturb_pose(target.pose);
    const double mass = target.mass * ns.mass_scale;
    const Vec3 com_local = target.center_of_mass + ns.com_offset;
    const double margin = std::max(1e-6, opt.contact_margin + ns.margin_offset);

    const auto& gripper = robot.gripper;
    const auto syn = gripper.synergies.find(traj.gripper.synergy);
    if (syn == gripper.synergies.end())
        throw std::invalid_argument(std::string("robot '") + robot.id + "' has no synergy " +
                                    to_string(traj.gripper.synergy));
    std::vector<bool> active(gripper.fingers.size(), false);
    for (int f : syn->second)
        active[static_cast<std::size_t>(f)] = true;

    GraspOutcome out;
    out.grasp_start_step = close_step;
    FingerClosure closure(gripper.fingers.size(), 0.0);
    std::vector<int> arrival(gripper.fingers.size(), -1);
    bool closed = false;
    bool attached = false;
    bool gave_up = false;
    RigidTransform ee_from_object;
    std::vector<Contact> held; // contacts at attachment, object frame
    RigidTransform object_pose = target.pose;
    std::vector<Shape> object_world = detail::world_shapes(target, object_pose);

    const std::size_t executable = plan.ok() ? n : plan.failed_step;
    for (std::size_t i = 0; i < executable; ++i) {
        JointConfiguration q = plan.q[i];
        if (ns.joint_sigma != 0.0) {
            for (std::size_t j = 0; j < robot.dof(); ++j)
                q[static_cast<Eigen::Index>(j)] += ns.joint_offset(i, j);
            q = clamp_to_limits(robot, q);
        }
        const PosedRobot posed = pose_robot(robot, q);
        const RigidTransform& ee = posed.end_effector;
        if (attached) {
            object_pose = compose(ee, ee_from_object);
            object_world = detail::world_shapes(target, object_pose);
        }
        out.joint_path.push_back(q);
        out.object_pose_path.push_back(object_pose);
        out.contacts.emplace_back();
        out.torque_path.push_back(quasi_static_torques(robot, q, attached ? mass : 0.0));

        const bool pre_closure = i <= close_step;
        world.objects[world.target].pose = object_pose;
        if (find_collision(robot, posed, world, !pre_closure)) {
            if (out.reason == FailureReason::none) {
                out.reason = FailureReason::collision;
                out.failure_step = i;
            }
            out.grasp_end_step = out.steps();
            out.success = false;
            return out;
        }
        if (i < close_step)
            continue;

        if (!closed) {
            closed = true;
            const double travel = 0.5 * traj.gripper.aperture;
            const double step = travel / opt.closure_substeps;
            for (std::size_t f = 0; f < gripper.fingers.size(); ++f)
                if (detail::finger_object_contact(robot, f, ee, 0.0, object_world).distance <= margin)
                    arrival[f] = 0;
            for (int s = 1; s <= opt.closure_substeps; ++s) {
                for (std::size_t f = 0; f < gripper.fingers.size(); ++f) {
                    if (!active[f] || arrival[f] >= 0)
                        continue;
                    const double next = s * step;
                    if (detail::finger_object_contact(robot, f, ee, next, object_world).distance > margin) {
                        closure[f] = next;
                        continue;
                    }
                    // back off to sit at half the margin from the surface
                    double lo = closure[f], hi = next;
                    for (int it = 0; it < 48; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        if (detail::finger_object_contact(robot, f, ee, mid, object_world).distance > 0.5 * margin)
                            lo = mid;
                        else
                            hi = mid;
                    }
                    closure[f] = lo;
                    arrival[f] = s;
                }
            }
        }

        auto& contacts = out.contacts.back();
        if (attached) {
            // fingers and object move as one body: the contacts are fixed in the
            // object frame. Re-querying would let the witness point wander over
            // a flat contact patch under rounding noise.
            for (Contact c : held) {
                c.world_point = object_pose.apply(c.point);
                c.world_normal = object_pose.apply_vector(c.normal);
                contacts.push_back(c);
            }
            continue;
        }
        const RigidTransform object_from_world = invert(object_pose);
        for (std::size_t f = 0; f < gripper.fingers.size(); ++f) {
            const auto fc = detail::finger_object_contact(robot, f, ee, closure[f], object_world);
            if (fc.distance > margin)
                continue;
            Contact c;
            c.world_point = fc.object_point;
            c.world_normal = fc.normal;
            c.point = object_from_world.apply(fc.object_point);
            c.normal = object_from_world.apply_vector(fc.normal);
            c.finger = static_cast<int>(f);
            c.arrival = std::max(arrival[f], 0);
            contacts.push_back(c);
        }
        std::stable_sort(contacts.begin(), contacts.end(),
                         [](const Contact& a, const Contact& b) { return a.arrival < b.arrival; });

        if (gave_up)
            continue;
        GraspCheckInput check;
        for (const auto& c : contacts) {
            check.points.push_back(c.world_point);
            check.normals.push_back(c.world_normal);
        }
        check.center_of_mass = object_pose.apply(com_local);
        const GraspCheck g = grasp_success(check, opt);
        if (!(g.opposed && g.spans_com))
            continue;
        attached = true;
        held = contacts;
        ee_from_object = compose(invert(ee), object_pose);
        out.grasp_end_step = i;
        out.torque_path.back() = quasi_static_torques(robot, q, mass);

        // hold check: lift and verify the fingers still touch the carried object
        const RigidTransform lifted =
            compose(RigidTransform::from_translation(Vec3(0, 0, opt.lift_height)), ee);
        const IkResult lift = inverse_kinematics(robot, lifted, q, opt.ik);
        bool holds = static_cast<bool>(lift);
        if (holds) {
            const PosedRobot lifted_robot = pose_robot(robot, lift.q, closure);
            const RigidTransform carried = compose(lifted_robot.end_effector, ee_from_object);
            holds = !find_collision(robot, lifted_robot, world, true);
            const std::vector<Shape> carried_world = detail::world_shapes(target, carried);
            for (const auto& c : contacts)
                holds = holds && detail::finger_object_contact(robot, static_cast<std::size_t>(c.finger),
                                                               lifted_robot.end_effector, closure[static_cast<std::size_t>(c.finger)],
                                                               carried_world)
                                         .distance <= margin;
        }
        if (!holds) {
            // the object stays put; the episode continues without payload
            out.reason = FailureReason::lift_failed;
            out.failure_step = i;
            attached = false;
            gave_up = true;
            out.torque_path.back() = quasi_static_torques(robot, q, 0.0);
        }
    }

    if (!plan.ok() && out.reason == FailureReason::none) {
        out.reason = plan.reason;
        out.failure_step = plan.failed_step;
    }
    if (!attached) {
        out.grasp_end_step = out.steps();
        if (out.reason == FailureReason::none)
            out.reason = FailureReason::no_grasp;
    }
    out.success = out.reason == FailureReason::none && attached;
    return out;
}

/// Deterministic open-loop roll-out: IK tracking, collision truncation, finger
/// closure, contacts, torques and the grasp predicate.
inline GraspOutcome rollout(const RobotModel& robot, const SceneModel& scene, const Trajectory& traj,
                            const NoiseSample* noise = nullptr, const SimOptions& opt = {})
{
    traj.validate();
    return execute_plan(robot, scene, traj, plan_joint_path(robot, traj.states, opt), noise, opt);
}

/// Row-per-step trace: step, q..., ee pose, object pose, torques, contact count.
inline void write_outcome_trace(std::ostream& os, const RobotModel& robot, const GraspOutcome& outcome)
{
    os << "step";
    for (std::size_t j = 0; j < robot.dof(); ++j)
        os << "\tq" << j;
    os << "\tee_x\tee_y\tee_z\tee_roll\tee_pitch\tee_yaw\tobj_x\tobj_y\tobj_z\tobj_roll\tobj_pitch\tobj_yaw";
    for (std::size_t j = 0; j < robot.dof(); ++j)
        os << "\ttau" << j;
    os << "\tcontacts\n";
    for (std::size_t i = 0; i < outcome.steps(); ++i) {
        os << i;
        for (Eigen::Index j = 0; j < outcome.joint_path[i].size(); ++j)
            os << fmt::format("\t{}", outcome.joint_path[i][j]);
        const EndEffectorState ee = transform_to_state(forward_kinematics(robot, outcome.joint_path[i]));
        const EndEffectorState ob = transform_to_state(outcome.object_pose_path[i]);
        for (const Vec3* v : {&ee.position, &ee.euler, &ob.position, &ob.euler})
            for (int k = 0; k < 3; ++k)
                os << fmt::format("\t{}", (*v)[k]);
        for (Eigen::Index j = 0; j < outcome.torque_path[i].size(); ++j)
            os << fmt::format("\t{}", outcome.torque_path[i][j]);
        os << '\t' << outcome.contacts[i].size() << '\n';
    }
}

} // namespace qdgrasp

#endif
