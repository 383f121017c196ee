#include <qdgrasp/grasp_sim.hpp>

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace qdgrasp;
using namespace qdgrasp::testing;

namespace {

/// Two-joint arm swinging in the x-z plane (axes along y), unit links.
RobotModel swing_arm(double m1, double m2)
{
    RobotModel r = planar_arm(2, 1.0);
    for (auto& j : r.joints)
        j.axis = Vec3::UnitY();
    r.joints[0].link_mass = m1;
    r.joints[1].link_mass = m2;
    return r;
}

/// Gravity potential of lumped link masses plus a payload at the end effector.
double potential(const RobotModel& robot, const JointConfiguration& q, double payload)
{
    const ChainPose p = chain_pose(robot, q);
    double v = 0.0;
    for (std::size_t l = 1; l <= robot.dof(); ++l)
        v -= robot.joints[l - 1].link_mass * robot.gravity.dot(p.links[l].translation());
    return v - payload * robot.gravity.dot(p.end_effector.translation());
}

/// Independent predicate: brute force over pairs, triangles and segments.
GraspCheck oracle_check(const GraspCheckInput& in, double angle, double tol)
{
    GraspCheck g;
    g.lift_holds = in.lift_holds;
    double best = -2;
    for (std::size_t i = 0; i < in.points.size(); ++i)
        for (std::size_t j = i + 1; j < in.points.size(); ++j) {
            const double c = -in.normals[i].dot(in.normals[j]);
            if (std::acos(std::clamp(c, -1.0, 1.0)) <= angle + 1e-9 && c > best) {
                best = c;
                g.opposed = true;
                g.pair_i = i;
                g.pair_j = j;
            }
        }
    if (!g.opposed)
        return g;
    const Vec3 a = in.points[g.pair_i], b = in.points[g.pair_j];
    const Vec3 axis = (b - a).normalized();
    const double s = (in.center_of_mass - a).dot(axis);
    const bool between = s >= -tol && s <= (b - a).norm() + tol;
    // distance in the plane orthogonal to the axis, measured in 3D
    auto flat = [&](const Vec3& p) { return Vec3(p - p.dot(axis) * axis); };
    const Vec3 c = flat(in.center_of_mass);
    double dist = 1e9;
    const std::size_t n = in.points.size();
    for (std::size_t i = 0; i < n; ++i) {
        dist = std::min(dist, (flat(in.points[i]) - c).norm());
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec3 p = flat(in.points[i]), q = flat(in.points[j]);
            const double t = (q - p).squaredNorm() > 0 ? std::clamp((c - p).dot(q - p) / (q - p).squaredNorm(), 0.0, 1.0) : 0.0;
            dist = std::min(dist, (p + t * (q - p) - c).norm());
            for (std::size_t k = j + 1; k < n; ++k) {
                // barycentric inside test for triangle (i, j, k)
                const Vec3 r = flat(in.points[k]);
                const Vec3 nrm = (q - p).cross(r - p);
                if (nrm.norm() < 1e-12)
                    continue;
                const bool inside = nrm.dot((q - p).cross(c - p)) >= 0 && nrm.dot((r - q).cross(c - q)) >= 0 &&
                                    nrm.dot((p - r).cross(c - r)) >= 0;
                if (inside)
                    dist = 0.0;
            }
        }
    }
    g.spans_com = between && dist <= tol;
    return g;
}

} // namespace

TEST(GraspSim, FailureReasonStrings)
{
    for (auto r : {FailureReason::none, FailureReason::ik_unreachable, FailureReason::joint_jump,
                   FailureReason::collision, FailureReason::no_grasp, FailureReason::lift_failed})
        EXPECT_EQ(failure_reason_from_string(to_string(r)), r);
    EXPECT_THROW(failure_reason_from_string("exploded"), std::invalid_argument);
}

TEST(GraspSim, TrajectoryValidation)
{
    Trajectory t = pinch_trajectory();
    t.gripper.close_step = t.size();
    EXPECT_THROW(rollout(desk4(), pinch_scene(), t), std::invalid_argument);
    t = pinch_trajectory();
    t.states.resize(1);
    t.gripper.close_step = 0;
    EXPECT_THROW(rollout(desk4(), pinch_scene(), t), std::invalid_argument);
    t = pinch_trajectory();
    t.gripper.synergy = Synergy::thumb_index;
    EXPECT_THROW(rollout(desk4(), pinch_scene(), t), std::invalid_argument);
}

TEST(GraspSim, AntipodalPinchSucceeds)
{
    const Trajectory t = pinch_trajectory();
    const GraspOutcome o = rollout(desk4(), pinch_scene(), t);
    ASSERT_TRUE(o.success) << to_string(o.reason);
    EXPECT_EQ(o.reason, FailureReason::none);
    EXPECT_EQ(o.steps(), t.size());
    EXPECT_EQ(o.grasp_start_step, t.gripper.close_step);
    EXPECT_EQ(o.grasp_end_step, t.gripper.close_step);
    for (std::size_t i = 0; i < t.gripper.close_step; ++i)
        EXPECT_TRUE(o.contacts[i].empty());
    const auto& c = o.contacts[t.gripper.close_step];
    ASSERT_EQ(c.size(), 2u);
    EXPECT_NEAR(c[0].world_normal.dot(c[1].world_normal), -1.0, 1e-9);
    EXPECT_NEAR(std::abs(c[0].point.y()), 0.02, 1e-9);
    EXPECT_NEAR(c[0].point.z(), 0.0, 1e-6);
    // carried rigidly: the box rises with the end effector
    const Vec3 start = o.object_pose_path.front().translation();
    const Vec3 end = o.object_pose_path.back().translation();
    EXPECT_NEAR((start - Vec3(0.3, 0, 0.02)).norm(), 0.0, 1e-12);
    EXPECT_NEAR(end.z() - start.z(), 0.1, 2e-4);
    for (std::size_t i = t.gripper.close_step; i < o.steps(); ++i)
        EXPECT_EQ(o.contacts[i].size(), 2u) << i;
}

TEST(GraspSim, HeldContactsStayFixedOnTheObject)
{
    const Archive& a = pinch_archive();
    ASSERT_FALSE(a.empty());
    for (const auto& [cell, e] : a.cells) {
        const GraspOutcome o = rollout(desk4(), pinch_scene(), e.trajectory);
        ASSERT_TRUE(o.success) << cell;
        const auto& held = o.contacts[o.grasp_end_step];
        for (std::size_t i = o.grasp_end_step + 1; i < o.steps(); ++i) {
            ASSERT_EQ(o.contacts[i].size(), held.size()) << cell;
            for (std::size_t k = 0; k < held.size(); ++k) {
                EXPECT_EQ(o.contacts[i][k].point, held[k].point) << cell << " step " << i;
                EXPECT_EQ(o.contacts[i][k].finger, held[k].finger);
                EXPECT_LT((o.contacts[i][k].world_point - o.object_pose_path[i].apply(held[k].point)).norm(), 1e-15);
            }
        }
    }
}

TEST(GraspSim, PayloadEntersTorquesAfterAttachment)
{
    const Trajectory t = pinch_trajectory();
    const GraspOutcome o = rollout(desk4(), pinch_scene(), t);
    ASSERT_TRUE(o.success);
    const double m = pinch_scene().target_object().mass;
    for (std::size_t i = 0; i < o.steps(); ++i) {
        const double payload = i >= o.grasp_end_step ? m : 0.0;
        const Eigen::VectorXd expect = quasi_static_torques(desk4(), o.joint_path[i], payload);
        EXPECT_LT((o.torque_path[i] - expect).norm(), 1e-15) << i;
    }
    // lowering the quill lowers everything it carries: dV/dq = -(m_quill + m_wrist + m) g
    const double quill_link_weight = 0.5 + 0.3;
    EXPECT_NEAR(o.torque_path.back()[2], -(quill_link_weight + m) * 9.81, 1e-9);
}

TEST(GraspSim, StayingAboveMakesNoContact)
{
    Trajectory t = pinch_trajectory(Vec3(0.3, 0, 0.15));
    const GraspOutcome o = rollout(desk4(), pinch_scene(), t);
    EXPECT_FALSE(o.success);
    EXPECT_EQ(o.reason, FailureReason::no_grasp);
    EXPECT_EQ(o.steps(), t.size());
    EXPECT_EQ(o.grasp_end_step, o.steps());
    for (const auto& c : o.contacts)
        EXPECT_TRUE(c.empty());
    for (const auto& pose : o.object_pose_path)
        EXPECT_EQ(pose, pinch_scene().object_sim_pose);
}

TEST(GraspSim, MovedObjectFails)
{
    const SceneModel moved =
        pinch_scene().with_target_pose(RigidTransform::from_translation(Vec3(0.3, 0.5, 0.02)));
    const GraspOutcome o = rollout(desk4(), moved, pinch_trajectory());
    EXPECT_FALSE(o.success);
    EXPECT_EQ(o.reason, FailureReason::no_grasp);
}

TEST(GraspSim, UnreachableWaypoint)
{
    const GraspOutcome o = rollout(desk4(), pinch_scene(), pinch_trajectory(Vec3(2.0, 0, 0.02)));
    EXPECT_FALSE(o.success);
    EXPECT_EQ(o.reason, FailureReason::ik_unreachable);
    EXPECT_EQ(o.failure_step, 0u);
    EXPECT_EQ(o.steps(), 0u);
}

TEST(GraspSim, CollisionTruncatesPath)
{
    // off to the side of the box and down through the table
    Trajectory t;
    append_line(t.states, Vec3(0.3, 0.2, 0.1), Vec3(0.3, 0.2, -0.05), 0.0, 20);
    t.gripper.close_step = 19;
    const GraspOutcome o = rollout(desk4(), pinch_scene(), t);
    EXPECT_FALSE(o.success);
    EXPECT_EQ(o.reason, FailureReason::collision);
    ASSERT_EQ(o.steps(), o.failure_step + 1);
    for (std::size_t i = 0; i < o.failure_step; ++i)
        EXPECT_FALSE(robot_collides(desk4(), o.joint_path[i], pinch_scene(), false)) << i;
    EXPECT_TRUE(robot_collides(desk4(), o.joint_path.back(), pinch_scene(), false));
    // first pad below the table: z_pad_bottom = z - 0.008 < 0
    EXPECT_LT(state_to_transform(t.states[o.failure_step]).translation().z(), 0.008 + 1e-12);
    EXPECT_GT(state_to_transform(t.states[o.failure_step - 1]).translation().z(), 0.008);
}

TEST(GraspSim, JointJumpIsReported)
{
    Trajectory t;
    append_line(t.states, Vec3(0.3, 0.0, 0.1), Vec3(0.3, 0.0, 0.1), 0.0, 4);
    t.states[2].euler.z() = 1.2; // wrist must spin past the jump limit
    t.gripper.close_step = 3;
    const GraspOutcome o = rollout(desk4(), pinch_scene(), t);
    EXPECT_EQ(o.reason, FailureReason::joint_jump);
    EXPECT_EQ(o.failure_step, 2u);
    EXPECT_EQ(o.steps(), 2u);
}

TEST(GraspSim, LiftBlockedByJointLimit)
{
    // box held near the top of the quill travel: the +5 cm hold check is out of reach
    const double z = 0.26;
    const SceneModel high = pinch_scene().with_target_pose(RigidTransform::from_translation(Vec3(0.3, 0, z)));
    Trajectory t;
    append_line(t.states, Vec3(0.18, 0, z), Vec3(0.3, 0, z), 0.0, 10);
    append_line(t.states, Vec3(0.3, 0, z), Vec3(0.3, 0, z), 0.0, 3);
    t.gripper.close_step = 10;
    const GraspOutcome o = rollout(desk4(), high, t);
    EXPECT_FALSE(o.success);
    EXPECT_EQ(o.reason, FailureReason::lift_failed);
    EXPECT_EQ(o.failure_step, 10u);
    EXPECT_EQ(o.steps(), t.size());
    EXPECT_EQ(o.grasp_end_step, o.steps());
    EXPECT_EQ(o.contacts[10].size(), 2u);
    for (const auto& pose : o.object_pose_path)
        EXPECT_EQ(pose, high.target_object().pose);
}

TEST(GraspSim, RolloutIsDeterministic)
{
    NoiseSpec spec;
    spec.samples = 4;
    spec.seed = 99;
    for (std::size_t k = 0; k < spec.samples; ++k) {
        const NoiseSample ns = sample_noise(spec, k);
        const GraspOutcome a = rollout(desk4(), pinch_scene(), pinch_trajectory(), &ns);
        const GraspOutcome b = rollout(desk4(), pinch_scene(), pinch_trajectory(), &ns);
        ASSERT_EQ(a.steps(), b.steps());
        EXPECT_EQ(a.success, b.success);
        for (std::size_t i = 0; i < a.steps(); ++i) {
            EXPECT_EQ(a.joint_path[i], b.joint_path[i]);
            EXPECT_EQ(a.object_pose_path[i], b.object_pose_path[i]);
            EXPECT_EQ(a.torque_path[i], b.torque_path[i]);
        }
    }
}

TEST(GraspSim, ZeroNoiseMatchesNominal)
{
    const NoiseSample ns = sample_noise(NoiseSpec::zero(1, 3), 0);
    const GraspOutcome a = rollout(desk4(), pinch_scene(), pinch_trajectory(), &ns);
    const GraspOutcome b = rollout(desk4(), pinch_scene(), pinch_trajectory());
    ASSERT_EQ(a.steps(), b.steps());
    for (std::size_t i = 0; i < a.steps(); ++i)
        EXPECT_EQ(a.joint_path[i], b.joint_path[i]);
    EXPECT_EQ(a.success, b.success);
}

TEST(GraspSim, SmallPoseNoiseKeepsPinch)
{
    NoiseSpec spec;
    spec.samples = 16;
    spec.seed = 1;
    int ok = 0;
    for (std::size_t k = 0; k < spec.samples; ++k) {
        const NoiseSample ns = sample_noise(spec, k);
        ok += rollout(desk4(), pinch_scene(), pinch_trajectory(), &ns).success;
    }
    EXPECT_GE(ok, 12);
}

TEST(GraspSim, TraceHasOneRowPerStep)
{
    const GraspOutcome o = rollout(desk4(), pinch_scene(), pinch_trajectory());
    std::ostringstream os;
    write_outcome_trace(os, desk4(), o);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    const auto columns = std::count(line.begin(), line.end(), '\t') + 1;
    EXPECT_EQ(columns, 1 + 4 + 12 + 4 + 1);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), '\t') + 1, columns);
        ++rows;
    }
    EXPECT_EQ(rows, o.steps());
}

TEST(Torques, LeverArmOracle)
{
    const RobotModel arm = swing_arm(0.0, 1.0);
    JointConfiguration q = JointConfiguration::Zero(2);
    // horizontal: one unit of mass at 1 m from joint 0, none off joint 1
    const Eigen::VectorXd tau = quasi_static_torques(arm, q, 0.0);
    EXPECT_NEAR(std::abs(tau[0]), 9.81, 1e-12);
    EXPECT_NEAR(tau[1], 0.0, 1e-12);
    // vertical link: no moment arm
    q[0] = kPi / 2;
    EXPECT_NEAR(quasi_static_torques(arm, q, 0.0)[0], 0.0, 1e-12);
    // payload of 2 kg at 2 m adds 2 * 2 * 9.81 at joint 0 and 2 * 9.81 at joint 1
    q[0] = 0.0;
    const Eigen::VectorXd loaded = quasi_static_torques(arm, q, 2.0);
    EXPECT_NEAR(std::abs(loaded[0]), 9.81 + 4 * 9.81, 1e-12);
    EXPECT_NEAR(std::abs(loaded[1]), 2 * 9.81, 1e-12);
}

TEST(Torques, GradientOfPotential)
{
    CounterRng rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        RobotModel r = random_chain(rng, 2 + static_cast<int>(rng.below(6)));
        for (auto& j : r.joints)
            j.link_mass = rng.uniform(0.1, 3.0);
        const double payload = rng.uniform(0.0, 2.0);
        const JointConfiguration q = random_q(rng, r, 0.8);
        const Eigen::VectorXd tau = quasi_static_torques(r, q, payload);
        const double h = 1e-6;
        for (std::size_t i = 0; i < r.dof(); ++i) {
            JointConfiguration qp = q, qm = q;
            qp[static_cast<Eigen::Index>(i)] += h;
            qm[static_cast<Eigen::Index>(i)] -= h;
            const double fd = (potential(r, qp, payload) - potential(r, qm, payload)) / (2 * h);
            EXPECT_NEAR(tau[static_cast<Eigen::Index>(i)], fd, 1e-4) << trial << ":" << i;
        }
    }
}

TEST(GraspPredicate, IdealPair)
{
    GraspCheckInput in;
    in.points = {Vec3(0, 0.02, 0), Vec3(0, -0.02, 0)};
    in.normals = {Vec3::UnitY(), -Vec3::UnitY()};
    EXPECT_TRUE(grasp_success(in).holds());
    in.lift_holds = false;
    EXPECT_FALSE(grasp_success(in).holds());
}

TEST(GraspPredicate, SingleOrSameSideContacts)
{
    GraspCheckInput in;
    in.points = {Vec3(0, 0.02, 0)};
    in.normals = {Vec3::UnitY()};
    EXPECT_FALSE(grasp_success(in).opposed);
    in.points.push_back(Vec3(0.01, 0.02, 0));
    in.normals.push_back(Vec3::UnitY());
    EXPECT_FALSE(grasp_success(in).opposed);
}

TEST(GraspPredicate, OppositionAngleBoundary)
{
    GraspCheckInput in;
    in.points = {Vec3(0, 0.02, 0), Vec3(0, -0.02, 0)};
    const auto tilted = [](double deg) {
        const double a = deg * kPi / 180;
        return Vec3(std::sin(a), -std::cos(a), 0);
    };
    in.normals = {Vec3::UnitY(), tilted(59.0)};
    EXPECT_TRUE(grasp_success(in).opposed);
    in.normals = {Vec3::UnitY(), tilted(61.0)};
    EXPECT_FALSE(grasp_success(in).opposed);
}

TEST(GraspPredicate, ComOffAxis)
{
    GraspCheckInput in;
    in.points = {Vec3(0, 0.02, 0), Vec3(0, -0.02, 0)};
    in.normals = {Vec3::UnitY(), -Vec3::UnitY()};
    in.center_of_mass = Vec3(0, 0, 0.014);
    EXPECT_TRUE(grasp_success(in).spans_com);
    in.center_of_mass = Vec3(0, 0, 0.016);
    EXPECT_FALSE(grasp_success(in).spans_com);
    in.center_of_mass = Vec3(0, 0.04, 0);
    EXPECT_FALSE(grasp_success(in).spans_com);
}

TEST(GraspPredicate, MatchesBruteForceOracle)
{
    CounterRng rng(23);
    SimOptions opt;
    int opposed = 0, spans = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        GraspCheckInput in;
        const std::size_t n = 1 + rng.below(4);
        for (std::size_t i = 0; i < n; ++i) {
            in.points.push_back(random_vec(rng, -0.05, 0.05));
            in.normals.push_back(random_unit(rng));
        }
        in.center_of_mass = random_vec(rng, -0.02, 0.02);
        const GraspCheck got = grasp_success(in, opt);
        const GraspCheck want = oracle_check(in, opt.opposition_angle, opt.com_tolerance);
        ASSERT_EQ(got.opposed, want.opposed) << trial;
        if (got.opposed) {
            EXPECT_EQ(got.pair_i, want.pair_i);
            EXPECT_EQ(got.pair_j, want.pair_j);
        }
        EXPECT_EQ(got.spans_com, want.spans_com) << trial;
        opposed += got.opposed;
        spans += got.spans_com;
    }
    EXPECT_GT(opposed, 300);
    EXPECT_GT(spans, 50);
}

TEST(GraspPredicate, RigidInvariance)
{
    CounterRng rng(29);
    for (int trial = 0; trial < 2000; ++trial) {
        GraspCheckInput in;
        const std::size_t n = 2 + rng.below(3);
        for (std::size_t i = 0; i < n; ++i) {
            in.points.push_back(random_vec(rng, -0.05, 0.05));
            in.normals.push_back(random_unit(rng));
        }
        in.center_of_mass = random_vec(rng, -0.02, 0.02);
        const RigidTransform h = random_transform(rng);
        GraspCheckInput moved = in;
        for (std::size_t i = 0; i < n; ++i) {
            moved.points[i] = h.apply(in.points[i]);
            moved.normals[i] = h.apply_vector(in.normals[i]);
        }
        moved.center_of_mass = h.apply(in.center_of_mass);
        const GraspCheck a = grasp_success(in), b = grasp_success(moved);
        EXPECT_EQ(a.opposed, b.opposed) << trial;
        EXPECT_EQ(a.spans_com, b.spans_com) << trial;
    }
}
