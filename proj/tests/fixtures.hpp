#ifndef QDGRASP_TEST_FIXTURES_HPP
#define QDGRASP_TEST_FIXTURES_HPP

#include <qdgrasp/grasp_sim.hpp>
#include <qdgrasp/model_io.hpp>
#include <qdgrasp/qd_engine.hpp>

#include "test_support.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace qdgrasp::testing {

inline const RobotModel& desk4()
{
    static const RobotModel r = load_robot(data_path("robots/desk4.json"));
    return r;
}

inline const SceneModel& pinch_scene()
{
    static const SceneModel s = load_scene(data_path("scenes/pinch_box.json"));
    return s;
}

/// Straight-line states from a to b over `steps` waypoints (both ends included).
inline void append_line(std::vector<EndEffectorState>& out, const Vec3& a, const Vec3& b, double yaw, int steps)
{
    for (int i = 0; i < steps; ++i) {
        const double t = steps == 1 ? 1.0 : static_cast<double>(i) / (steps - 1);
        out.push_back({a + t * (b - a), Vec3(0, 0, yaw)});
    }
}

/// Descend onto the pinch box, close at the bottom, lift. The pads meet the
/// box side faces at the height of its center of mass.
inline Trajectory pinch_trajectory(const Vec3& target = Vec3(0.3, 0.0, 0.02), double yaw = 0.0)
{
    Trajectory t;
    append_line(t.states, target + Vec3(0, 0, 0.13), target, yaw, 20);
    append_line(t.states, target + Vec3(0, 0, 0.008), target + Vec3(0, 0, 0.1), yaw, 12);
    t.gripper.close_step = 19;
    t.gripper.synergy = Synergy::parallel;
    t.gripper.aperture = 0.08;
    return t;
}

/// Search space hugging the pinch box: top-down, yaw only.
inline QdConfig pinch_qd_config(std::size_t budget, std::uint64_t seed = 7)
{
    QdConfig cfg;
    cfg.bounds.position_min = Vec3(0.27, -0.03, 0.005);
    cfg.bounds.position_max = Vec3(0.33, 0.03, 0.06);
    cfg.bounds.euler_min = Vec3(0, 0, -kPi / 2);
    cfg.bounds.euler_max = Vec3(0, 0, kPi / 2);
    cfg.bounds.close_min = 0.5;
    cfg.bounds.close_max = 0.85;
    cfg.noise.samples = 8;
    cfg.noise.seed = 3;
    cfg.seed = seed;
    cfg.budget = budget;
    return cfg;
}

/// Arbitrary but valid archive for serialization tests; values span many
/// magnitudes so round trips exercise full precision.
inline Archive random_archive(CounterRng& rng, std::size_t max_elites = 12)
{
    const auto wild = [&]() {
        const double mag = std::pow(10.0, rng.uniform(-12.0, 6.0));
        return rng.uniform(-1.0, 1.0) * mag;
    };
    Archive a;
    a.grid.dims = {1 + static_cast<int>(rng.below(12)), 1 + static_cast<int>(rng.below(12)), 1 + static_cast<int>(rng.below(12))};
    a.grid.bounds.min = random_vec(rng, -0.2, -0.01);
    a.grid.bounds.max = random_vec(rng, 0.01, 0.2);
    a.eval_count = rng.below(100000);
    a.rng_seed = rng.next_u64();
    a.config_hash = fnv1a_hex(std::to_string(rng.next_u64()));
    const std::size_t n = rng.below(max_elites + 1);
    for (std::size_t i = 0; i < n; ++i) {
        Elite e;
        const std::size_t k = kMinControlPoints + rng.below(kMaxControlPoints - kMinControlPoints + 1);
        for (std::size_t c = 0; c < k; ++c)
            e.genome.control_points.push_back({random_vec(rng, -1, 1), random_vec(rng, -kPi, kPi)});
        e.genome.close_fraction = rng.uniform(0.0, 1.0);
        e.genome.synergy = kAllSynergies[rng.below(kAllSynergies.size())];
        const std::size_t steps = 2 + rng.below(40);
        for (std::size_t s = 0; s < steps; ++s)
            e.trajectory.states.push_back({Vec3(wild(), wild(), wild()), random_vec(rng, -kPi, kPi)});
        e.trajectory.gripper.close_step = rng.below(steps);
        e.trajectory.gripper.synergy = e.genome.synergy;
        e.trajectory.gripper.aperture = rng.uniform(0.01, 0.2);
        e.fitness = wild();
        e.descriptor = random_vec(rng, -0.3, 0.3);
        if (rng.bernoulli(0.7)) {
            QualityVector q;
            q.touch_var = std::abs(wild());
            q.obj_pose_var = std::abs(wild());
            q.obj_orient_var = std::abs(wild());
            q.obj_s_var = q.obj_pose_var + q.obj_orient_var;
            q.robustness = rng.uniform(0.0, 1.0);
            q.robustness_noise_joint = rng.uniform(0.0, 1.0);
            q.energy = std::abs(wild());
            q.energy_grasp = std::abs(wild());
            q.energy_post_grasp = std::abs(wild());
            q.nominal_failure = rng.bernoulli(0.3);
            e.quality = q;
        }
        e.outcome.success = rng.bernoulli(0.5);
        e.outcome.reason = static_cast<FailureReason>(rng.below(6));
        e.outcome.steps = steps;
        e.outcome.grasp_start_step = rng.below(steps);
        e.outcome.grasp_end_step = rng.below(steps + 1);
        e.outcome.contact_count = rng.below(5);
        a.cells.insert_or_assign(a.grid.index(e.descriptor), std::move(e));
    }
    return a;
}

/// Bitwise equality of every stored field; empty string when equal, else the first difference.
inline std::string archive_difference(const Archive& a, const Archive& b)
{
    const auto same = [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; };
    const auto same3 = [&](const Vec3& x, const Vec3& y) { return same(x[0], y[0]) && same(x[1], y[1]) && same(x[2], y[2]); };
    if (a.grid.dims != b.grid.dims || !same3(a.grid.bounds.min, b.grid.bounds.min) || !same3(a.grid.bounds.max, b.grid.bounds.max))
        return "grid";
    if (a.eval_count != b.eval_count || a.rng_seed != b.rng_seed || a.config_hash != b.config_hash)
        return "header";
    if (a.size() != b.size())
        return "size";
    for (auto ia = a.cells.begin(), ib = b.cells.begin(); ia != a.cells.end(); ++ia, ++ib) {
        const Elite& x = ia->second;
        const Elite& y = ib->second;
        const std::string where = "cell " + std::to_string(ia->first) + ": ";
        if (ia->first != ib->first)
            return where + "index";
        if (x.genome.control_points.size() != y.genome.control_points.size() || !same(x.genome.close_fraction, y.genome.close_fraction) ||
            x.genome.synergy != y.genome.synergy)
            return where + "genome";
        for (std::size_t i = 0; i < x.genome.control_points.size(); ++i)
            if (!same3(x.genome.control_points[i].position, y.genome.control_points[i].position) ||
                !same3(x.genome.control_points[i].euler, y.genome.control_points[i].euler))
                return where + "control point";
        if (x.trajectory.size() != y.trajectory.size() || x.trajectory.gripper.close_step != y.trajectory.gripper.close_step ||
            x.trajectory.gripper.synergy != y.trajectory.gripper.synergy || !same(x.trajectory.gripper.aperture, y.trajectory.gripper.aperture))
            return where + "trajectory";
        for (std::size_t i = 0; i < x.trajectory.size(); ++i)
            if (!same3(x.trajectory.states[i].position, y.trajectory.states[i].position) ||
                !same3(x.trajectory.states[i].euler, y.trajectory.states[i].euler))
                return where + "waypoint " + std::to_string(i);
        if (!same(x.fitness, y.fitness) || !same3(x.descriptor, y.descriptor))
            return where + "fitness/descriptor";
        if (x.quality.has_value() != y.quality.has_value())
            return where + "quality presence";
        if (x.quality) {
            const auto vx = metric_values(*x.quality), vy = metric_values(*y.quality);
            for (std::size_t i = 0; i < vx.size(); ++i)
                if (!same(vx[i], vy[i]))
                    return where + kQualityMetricNames[i];
            if (x.quality->nominal_failure != y.quality->nominal_failure)
                return where + "nominal_failure";
        }
        if (!(x.outcome == y.outcome))
            return where + "outcome";
    }
    return {};
}

/// Small shared repertoire for the tests that need real elites.
inline const Archive& pinch_archive()
{
    static const Archive a = run_map_elites(desk4(), pinch_scene(), pinch_qd_config(600));
    return a;
}

} // namespace qdgrasp::testing

#endif
