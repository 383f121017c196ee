#ifndef QDGRASP_QUALITY_HPP
#define QDGRASP_QUALITY_HPP

#include <qdgrasp/archive.hpp>
#include <qdgrasp/grasp_sim.hpp>
#include <qdgrasp/noise.hpp>
#include <qdgrasp/parallel.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace qdgrasp {

struct QualityVector {
    double touch_var = 0.0;              // m^2
    double obj_s_var = 0.0;              // obj_pose_var + obj_orient_var
    double obj_pose_var = 0.0;           // m^2
    double obj_orient_var = 0.0;         // rad^2
    double robustness_noise_joint = 0.0; // [0, 1]
    double robustness = 0.0;             // [0, 1]
    double energy = 0.0;                 // N m step
    double energy_grasp = 0.0;
    double energy_post_grasp = 0.0;
    bool nominal_failure = false;

    bool operator==(const QualityVector&) const = default;
};

inline constexpr std::array<const char*, 9> kQualityMetricNames{
    "touch_var", "obj_s_var", "obj_pose_var", "obj_orient_var", "robustness_noise_joint",
    "robustness", "energy", "energy_grasp", "energy_post_grasp"};

inline std::array<double, 9> metric_values(const QualityVector& q)
{
    return {q.touch_var, q.obj_s_var, q.obj_pose_var, q.obj_orient_var, q.robustness_noise_joint,
            q.robustness, q.energy, q.energy_grasp, q.energy_post_grasp};
}

/// Which step anchors the touch-point variance window.
enum class TouchWindow { end_of_grasp, start_of_grasp };

struct QualityOptions {
    SimOptions sim;
    TouchWindow touch_window = TouchWindow::end_of_grasp;
    std::size_t workers = 1;
};

namespace detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Sum of squared distances to the mean, shifted by the first point so that
/// identical points give exactly zero.
inline double scatter(const std::vector<Vec3>& xs)
{
    if (xs.size() < 2)
        return 0.0;
    Vec3 mean = Vec3::Zero();
    for (const auto& x : xs)
        mean += x - xs.front();
    mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (const auto& x : xs)
        acc += (x - xs.front() - mean).squaredNorm();
    return acc;
}

/// Trace of the population covariance, i.e. mean squared distance to the mean.
inline double covariance_trace(const std::vector<Vec3>& xs)
{
    return xs.size() < 2 ? 0.0 : scatter(xs) / static_cast<double>(xs.size());
}

/// Sum of |tau| over steps [from, to) and all joints.
inline double torque_energy(const std::vector<Eigen::VectorXd>& torques, std::size_t from, std::size_t to)
{
    CompensatedSum s;
    to = std::min(to, torques.size());
    for (std::size_t i = from; i < to; ++i)
        for (Eigen::Index j = 0; j < torques[i].size(); ++j)
            s.add(std::abs(torques[i][j]));
    return s.value();
}

} // namespace detail

/// Rotation-vector spread about the chordal mean rotation.
inline double orientation_variance(const std::vector<RigidTransform>& poses)
{
    const auto same = [&](const RigidTransform& p) { return p.rotation() == poses.front().rotation(); };
    if (std::all_of(poses.begin(), poses.end(), same))
        return 0.0;
    Mat3 sum = Mat3::Zero();
    for (const auto& p : poses)
        sum += p.rotation();
    const Mat3 mean = project_to_rotation(sum);
    std::vector<Vec3> dev;
    dev.reserve(poses.size());
    for (const auto& p : poses)
        dev.push_back(rotation_log(mean.transpose() * p.rotation()));
    return detail::covariance_trace(dev);
}

/// Metrics that need only the nominal outcome; robustness fields stay zero.
inline QualityVector outcome_metrics(const GraspOutcome& o, TouchWindow window = TouchWindow::end_of_grasp)
{
    QualityVector q;
    q.nominal_failure = !o.success;
    const std::size_t n = o.steps();
    const std::size_t touch_from = window == TouchWindow::end_of_grasp ? o.grasp_end_step : o.grasp_start_step;
    // pooled within-finger covariance: each finger's touch point is tracked
    // about its own mean, so fingers resting at fixed points score zero
    std::map<int, std::vector<Vec3>> touch;
    std::size_t touch_count = 0;
    for (std::size_t i = touch_from; i < n; ++i)
        for (const auto& c : o.contacts[i]) {
            touch[c.finger].push_back(c.point);
            ++touch_count;
        }
    double touch_scatter = 0.0;
    for (const auto& [_, pts] : touch)
        touch_scatter += detail::scatter(pts);
    q.touch_var = touch_count == 0 ? 0.0 : touch_scatter / static_cast<double>(touch_count);
    std::vector<Vec3> positions;
    positions.reserve(n);
    for (const auto& p : o.object_pose_path)
        positions.push_back(p.translation());
    q.obj_pose_var = detail::covariance_trace(positions);
    q.obj_orient_var = orientation_variance(o.object_pose_path);
    q.obj_s_var = q.obj_pose_var + q.obj_orient_var;
    q.energy = detail::torque_energy(o.torque_path, 0, n);
    q.energy_grasp = detail::torque_energy(o.torque_path, o.grasp_start_step, n);
    q.energy_post_grasp = detail::torque_energy(o.torque_path, o.grasp_end_step, n);
    return q;
}

struct RobustnessCounts {
    std::size_t object_successes = 0;
    std::size_t joint_successes = 0;
};

/// Success ratios of the perturbed roll-outs, object-pose family and joint
/// family (dynamics perturbations ride along with both). Reuses the plan.
inline RobustnessCounts robustness_counts(const RobotModel& robot, const SceneModel& scene, const Trajectory& traj,
                                          const JointPlan& plan, const NoiseSpec& spec, const QualityOptions& opt)
{
    spec.validate();
    std::vector<unsigned char> obj(spec.samples, 0), joint(spec.samples, 0);
    parallel_for(spec.samples, opt.workers, [&](std::size_t k) {
        const NoiseSample full = sample_noise(spec, k);
        const NoiseSample a = full.restricted(true, false, true);
        const NoiseSample b = full.restricted(false, true, true);
        obj[k] = execute_plan(robot, scene, traj, plan, &a, opt.sim).success;
        joint[k] = execute_plan(robot, scene, traj, plan, &b, opt.sim).success;
    });
    RobustnessCounts c;
    for (std::size_t k = 0; k < spec.samples; ++k) {
        c.object_successes += obj[k];
        c.joint_successes += joint[k];
    }
    return c;
}

/// Full quality vector given an already-computed plan and nominal outcome.
inline QualityVector compute_quality(const RobotModel& robot, const SceneModel& scene, const Trajectory& traj,
                                     const JointPlan& plan, const GraspOutcome& nominal, const NoiseSpec& spec,
                                     const QualityOptions& opt = {})
{
    spec.validate();
    QualityVector q = outcome_metrics(nominal, opt.touch_window);
    if (!nominal.success)
        return q;
    const RobustnessCounts c = robustness_counts(robot, scene, traj, plan, spec, opt);
    q.robustness = static_cast<double>(c.object_successes) / static_cast<double>(spec.samples);
    q.robustness_noise_joint = static_cast<double>(c.joint_successes) / static_cast<double>(spec.samples);
    return q;
}

inline QualityVector compute_quality(const Trajectory& traj, const RobotModel& robot, const SceneModel& scene,
                                     const NoiseSpec& spec, const QualityOptions& opt = {})
{
    traj.validate();
    const JointPlan plan = plan_joint_path(robot, traj.states, opt.sim);
    const GraspOutcome nominal = execute_plan(robot, scene, traj, plan, nullptr, opt.sim);
    return compute_quality(robot, scene, traj, plan, nominal, spec, opt);
}

/// Linear weights over the nine metrics, in kQualityMetricNames order.
struct FitnessWeights {
    std::array<double, 9> w{0, 0, 0, 0, 0.5, 0.5, 0, 0, 0};

    static FitnessWeights default_weights() { return {}; }
};

inline double fitness(const QualityVector& q, const FitnessWeights& weights = {})
{
    const auto v = metric_values(q);
    double f = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        f += weights.w[i] * v[i];
    return f;
}

} // namespace qdgrasp

#endif
