#ifndef QDGRASP_ADAPTATION_HPP
#define QDGRASP_ADAPTATION_HPP

#include <qdgrasp/grasp_sim.hpp>
#include <qdgrasp/parallel.hpp>
#include <qdgrasp/qd_engine.hpp>

#include <optional>
#include <string>
#include <vector>

namespace qdgrasp {

/// The three frames of the re-targeting formula, stored in the direction they
/// are measured: camera calibration, pose estimate, simulated object pose.
struct AdaptationFrames {
    RigidTransform world_from_camera;
    RigidTransform camera_from_object;
    RigidTransform world_from_object_sim;

    RigidTransform world_from_object() const { return compose(world_from_camera, camera_from_object); }
};

/// Frames for an object observed at `world_from_object` through the scene's camera.
inline AdaptationFrames frames_for_pose(const SceneModel& scene, const RigidTransform& world_from_object)
{
    return {scene.camera_pose, compose(invert(scene.camera_pose), world_from_object), scene.object_sim_pose};
}

/// Frames that undo `f`: the observed pose becomes the simulated one and back.
inline AdaptationFrames reversed(const AdaptationFrames& f)
{
    return {RigidTransform{}, f.world_from_object_sim, f.world_from_object()};
}

/// e' = world_from_camera * camera_from_object * object_sim_from_world * e.
/// The gripper keeps its pose relative to the object.
inline RigidTransform adapt_pose(const RigidTransform& world_from_ee, const AdaptationFrames& f)
{
    const RigidTransform object_sim_from_world = invert(f.world_from_object_sim);
    return compose(compose(compose(f.world_from_camera, f.camera_from_object), object_sim_from_world), world_from_ee);
}

inline EndEffectorState adapt_state(const EndEffectorState& e, const AdaptationFrames& f)
{
    return transform_to_state(adapt_pose(state_to_transform(e), f));
}

/// Waypoint-wise adaptation; the gripper command is untouched.
inline Trajectory adapt_trajectory(const Trajectory& traj, const AdaptationFrames& f)
{
    Trajectory out = traj;
    for (auto& s : out.states)
        s = adapt_state(s, f);
    return out;
}

enum class FilterCause { none, ik, joint_jump, collision };

inline const char* to_string(FilterCause c)
{
    switch (c) {
    case FilterCause::none:
        return "none";
    case FilterCause::ik:
        return "ik";
    case FilterCause::joint_jump:
        return "joint_jump";
    case FilterCause::collision:
        return "collision";
    }
    return "?";
}

inline const char* to_string(CollisionKind k)
{
    switch (k) {
    case CollisionKind::table:
        return "table";
    case CollisionKind::object:
        return "object";
    case CollisionKind::target:
        return "target";
    case CollisionKind::self:
        return "self";
    }
    return "?";
}

struct FilterReport {
    bool accepted = false;
    FilterCause cause = FilterCause::none;
    std::size_t waypoint = 0; // first failing waypoint when rejected
    std::optional<CollisionHit> hit;
    std::vector<JointConfiguration> q; // solved prefix

    bool ik_ok() const { return cause != FilterCause::ik && cause != FilterCause::joint_jump; }
};

/// Feasibility of a trajectory in a scene: every waypoint solvable with IK
/// seeded along the path, no joint jump above max_step, and no collision with
/// open fingers. Up to close_step the target counts as an obstacle; after it
/// only the target is exempt.
inline FilterReport filter_trajectory(const Trajectory& traj, const RobotModel& robot, const SceneModel& scene,
                                      double max_step, const SimOptions& opt = {})
{
    traj.validate();
    SimOptions sim = opt;
    sim.max_joint_step = max_step;
    const JointPlan plan = plan_joint_path(robot, traj.states, sim);
    FilterReport r;
    r.q = plan.q;
    if (!plan.ok()) {
        r.cause = plan.reason == FailureReason::joint_jump ? FilterCause::joint_jump : FilterCause::ik;
        r.waypoint = plan.failed_step;
        return r;
    }
    for (std::size_t i = 0; i < plan.q.size(); ++i) {
        const bool pre_closure = i <= traj.gripper.close_step;
        if (auto hit = find_collision(robot, pose_robot(robot, plan.q[i]), scene, !pre_closure)) {
            r.cause = FilterCause::collision;
            r.waypoint = i;
            r.hit = hit;
            return r;
        }
    }
    r.accepted = true;
    return r;
}

/// Scene with the target moved to the observed pose of `f`.
inline SceneModel observed_scene(const SceneModel& scene, const AdaptationFrames& f)
{
    return scene.with_target_pose(f.world_from_object());
}

struct AdaptedTrajectory {
    Trajectory trajectory;
    FilterReport report;
};

/// Adapts and filters a batch against the observed scene, one task per trajectory.
inline std::vector<AdaptedTrajectory> adapt_and_filter(const std::vector<Trajectory>& trajs, const AdaptationFrames& f,
                                                       const RobotModel& robot, const SceneModel& scene,
                                                       double max_step, const SimOptions& opt = {},
                                                       std::size_t workers = 1)
{
    const SceneModel observed = observed_scene(scene, f);
    std::vector<AdaptedTrajectory> out(trajs.size());
    parallel_for(trajs.size(), workers, [&](std::size_t i) {
        out[i].trajectory = adapt_trajectory(trajs[i], f);
        out[i].report = filter_trajectory(out[i].trajectory, robot, observed, max_step, opt);
    });
    return out;
}

/// Scenario filters over a ranked repertoire; unset fields do not filter.
/// min_robustness applies to the object-pose robustness.
struct SelectionScenario {
    std::optional<std::size_t> top_k;
    std::optional<AlignedBox> descriptor_region;
    std::optional<double> min_robustness;
};

/// Keeps rank order; top_k truncates after the other filters.
inline std::vector<RankedElite> select_grasps(const std::vector<RankedElite>& ranked, const SelectionScenario& s)
{
    std::vector<RankedElite> out;
    for (const auto& r : ranked) {
        if (s.top_k && out.size() >= *s.top_k)
            break;
        if (s.descriptor_region && !s.descriptor_region->contains(r.elite.descriptor))
            continue;
        if (s.min_robustness && !(r.quality.robustness >= *s.min_robustness))
            continue;
        out.push_back(r);
    }
    return out;
}

} // namespace qdgrasp

#endif
