// Acceptance harness: one PASS/FAIL line per criterion, pinned tolerances,
// exit status 1 if any criterion fails.

#include <qdgrasp/cli.hpp>

#include "fixtures.hpp"

#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace qdgrasp;
using namespace qdgrasp::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Accumulates the failures of one criterion.
struct Check {
    std::vector<std::string> failures;
    std::vector<std::string> notes;

    void expect(bool ok, const std::string& what)
    {
        if (!ok)
            failures.push_back(what);
    }
    void note(const std::string& s) { notes.push_back(s); }
};

// ---- shared inputs ----------------------------------------------------------------

const fs::path& work_dir()
{
    static const fs::path d = [] {
        const fs::path p = fs::temp_directory_path() / "qdgrasp_acceptance";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

std::string in_work(const std::string& name) { return (work_dir() / name).string(); }

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "qdgrasp");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliRun r;
    r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

const std::string kConfig = data_path("configs/pinch_box.json");
constexpr std::size_t kDeskBudget = 10000;

const RunConfig& run_config()
{
    static const RunConfig c = load_run_config(kConfig);
    return c;
}

/// Repertoire of the desk-scale run (criterion 5), reused by the replay and
/// quality criteria.
const Archive& desk_archive()
{
    static const Archive a = load_repertoire(in_work("desk_a.jsonl")).archive;
    return a;
}

std::vector<Trajectory> trajectories(const Archive& a)
{
    std::vector<Trajectory> out;
    for (const auto& [_, e] : a.cells)
        out.push_back(e.trajectory);
    return out;
}

// ---- criteria ---------------------------------------------------------------------

// 5 runs first: its repertoire feeds 1, 4, 6, 7 and 8.
void desk_scale_run(Check& c)
{
    const std::string budget = std::to_string(kDeskBudget);
    double slowest = 0.0;
    for (const char* tag : {"a", "b"}) {
        const auto t0 = Clock::now();
        const CliRun r = cli({"generate", "--config", kConfig, "--budget", budget, "--out",
                              in_work(std::string("desk_") + tag + ".jsonl"), "--log",
                              in_work(std::string("desk_") + tag + ".tsv"), "--workers", tag[0] == 'a' ? "1" : "2"});
        const double dt = seconds_since(t0);
        slowest = std::max(slowest, dt);
        c.expect(r.code == kExitOk, fmt::format("generate run {} exited {}: {}", tag, r.code, r.err));
        c.note(fmt::format("run {}: {:.1f} s", tag, dt));
    }
    c.expect(slowest < 300.0, fmt::format("slowest run took {:.1f} s (limit 300 s)", slowest));
    c.expect(slurp(in_work("desk_a.jsonl")) == slurp(in_work("desk_b.jsonl")), "same seed gave different repertoire files");
    c.expect(slurp(in_work("desk_a.tsv")) == slurp(in_work("desk_b.tsv")), "same seed gave different generation logs");

    std::istringstream log(slurp(in_work("desk_a.tsv")));
    std::string line;
    std::getline(log, line);
    double last = -1.0;
    std::size_t generations = 0, evals = 0;
    while (std::getline(log, line)) {
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(row, field, '\t'))
            f.push_back(field);
        const double coverage = std::stod(f.at(2));
        c.expect(coverage >= last, fmt::format("coverage fell at generation {}: {} < {}", f.at(0), coverage, last));
        last = coverage;
        evals = std::stoul(f.at(1));
        ++generations;
    }
    c.expect(evals == kDeskBudget, fmt::format("log ends at {} evaluations", evals));
    const Archive& a = desk_archive();
    c.expect(!a.empty(), "final archive is empty");
    c.note(fmt::format("{} generations, {} elites, coverage {:.3f}", generations, a.size(), a.coverage()));
}

void identity_adaptation(Check& c)
{
    const auto base = trajectories(desk_archive());
    std::vector<Trajectory> trajs;
    for (std::size_t i = 0; trajs.size() < 200; ++i)
        trajs.push_back(base[i % base.size()]);
    const RigidTransform o_sim = pinch_scene().object_sim_pose;
    const AdaptationFrames f = frames_for_pose(pinch_scene(), o_sim);
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (const Trajectory& t : trajs) {
        const Trajectory a = adapt_trajectory(t, f);
        for (std::size_t i = 0; i < t.size(); ++i) {
            // compare poses: Euler angles are canonicalized on output
            const RigidTransform x = state_to_transform(a.states[i]), y = state_to_transform(t.states[i]);
            worst = std::max({worst, (x.translation() - y.translation()).cwiseAbs().maxCoeff(),
                              (x.rotation() - y.rotation()).cwiseAbs().maxCoeff()});
        }
        c.expect(a.gripper.close_step == t.gripper.close_step && a.gripper.synergy == t.gripper.synergy,
                 "gripper command changed");
    }
    const double dt = seconds_since(t0);
    c.expect(worst <= 1e-9, fmt::format("largest waypoint deviation {:.3g} (tolerance 1e-9)", worst));
    c.expect(dt < 1.0, fmt::format("took {:.3f} s (limit 1 s)", dt));
    c.note(fmt::format("200 trajectories, max deviation {:.3g}, {:.3f} s", worst, dt));
}

void relative_pose_oracle(Check& c)
{
    CounterRng rng(20241);
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const AdaptationFrames f{random_transform(rng), random_transform(rng, 0.5), random_transform(rng)};
        const EndEffectorState e{random_vec(rng, -0.8, 0.8),
                                 Vec3(rng.uniform(-3.0, 3.0), rng.uniform(-1.5, 1.5), rng.uniform(-3.0, 3.0))};
        const EndEffectorState a = adapt_state(e, f);
        const auto matrix_of = [](const EndEffectorState& s) {
            return naive_matrix(rot_x(s.euler.x()) * rot_y(s.euler.y()) * rot_z(s.euler.z()), s.position);
        };
        const Mat4 world_from_object =
            naive_product(naive_matrix(f.world_from_camera.rotation(), f.world_from_camera.translation()),
                          naive_matrix(f.camera_from_object.rotation(), f.camera_from_object.translation()));
        const Mat4 world_from_sim = naive_matrix(f.world_from_object_sim.rotation(), f.world_from_object_sim.translation());
        const Mat4 lhs = naive_product(world_from_object.inverse(), matrix_of(a));
        const Mat4 rhs = naive_product(world_from_sim.inverse(), matrix_of(e));
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    const double dt = seconds_since(t0);
    c.expect(worst <= 1e-9, fmt::format("largest relative-pose deviation {:.3g} (tolerance 1e-9)", worst));
    c.expect(dt < 5.0, fmt::format("took {:.3f} s (limit 5 s)", dt));
    c.note(fmt::format("1000 frame sets, max deviation {:.3g}, {:.3f} s", worst, dt));
}

void grid_counting(Check& c)
{
    GridSpec s;
    s.divisions = {50, 50, 1};
    c.expect(grid_poses(s).size() == 2500, fmt::format("50x50x1 gave {} poses", grid_poses(s).size()));
    s.divisions = {25, 25, 1};
    s.orientations = default_orientations();
    c.expect(grid_poses(s).size() == 3750, fmt::format("25x25x1 x 6 gave {} poses", grid_poses(s).size()));

    // the per-position ceiling on a real evaluation
    s.box = {Vec3(0.15, -0.2, 0.0), Vec3(0.45, 0.2, 0.1)};
    s.divisions = {3, 3, 1};
    s.trajectories_per_pose = 5;
    const GridResult r = evaluate_grid(pinch_archive(), desk4(), pinch_scene(), s);
    const std::size_t ceiling = r.trajectories() * s.orientations.size();
    c.expect(ceiling == 30, fmt::format("per-position ceiling is {}", ceiling));
    std::size_t best = 0;
    for (const auto& [_, total] : r.position_totals())
        best = std::max(best, total);
    c.expect(best <= 30, fmt::format("a position totals {} > 30", best));
    c.note(fmt::format("2500 / 3750 poses, ceiling 5x6=30, best position {}", best));
}

void reach_boundary(Check& c)
{
    const RobotModel& robot = desk4();
    const SceneModel& scene = pinch_scene();
    const RigidTransform& o_sim = scene.object_sim_pose;
    // 0.1 m cells placed so that one centre falls on the simulated pose
    GridSpec s;
    s.box = {Vec3(o_sim.translation().x() - 1.05, o_sim.translation().y() - 1.05, 0.0),
             Vec3(o_sim.translation().x() + 0.95, o_sim.translation().y() + 0.95, 0.1)};
    s.divisions = {20, 20, 1};
    s.trajectories_per_pose = 5;
    s.seed = run_config().grid.seed;
    const auto t0 = Clock::now();
    const GridResult r = evaluate_grid(desk_archive(), robot, scene, s);
    const double dt = seconds_since(t0);
    const double bound = tool_reach(robot) + scene.target_object().bounding_radius();
    std::size_t beyond = 0, at_sim = 0, feasible = 0;
    for (const auto& p : r.poses) {
        feasible += p.feasible_count;
        if ((p.pose.position - robot.base_pose.translation()).norm() > bound) {
            ++beyond;
            c.expect(p.feasible_count == 0, fmt::format("pose ({:.3f}, {:.3f}) beyond reach keeps {} trajectories",
                                                        p.pose.position.x(), p.pose.position.y(), p.feasible_count));
        }
        if ((p.pose.position - o_sim.translation()).norm() < 1e-9) {
            ++at_sim;
            c.expect(p.feasible_count == s.trajectories_per_pose,
                     fmt::format("pose at O_sim keeps {} of {}", p.feasible_count, s.trajectories_per_pose));
        }
    }
    c.expect(beyond > 0, "grid has no pose beyond reach");
    c.expect(at_sim == 1, fmt::format("{} grid poses sit on O_sim", at_sim));
    c.expect(dt < 30.0, fmt::format("took {:.1f} s (limit 30 s)", dt));
    c.note(fmt::format("reach bound {:.3f} m, {} poses beyond it, {} feasible adaptations, {:.1f} s", bound, beyond,
                       feasible, dt));
}

void replay_soundness(Check& c)
{
    const Archive& a = desk_archive();
    const RunConfig& cfg = run_config();
    const SceneModel& scene = pinch_scene();
    std::size_t ok = 0;
    for (const auto& [cell, e] : a.cells) {
        const Trajectory t = decode(e.genome, cfg.qd.waypoints, desk4().gripper.aperture);
        const GraspOutcome o = rollout(desk4(), scene, t, nullptr, cfg.qd.quality.sim);
        const auto d = compute_descriptor(o, scene.target_object());
        const bool same = t.states == e.trajectory.states && o.success && d && *d == e.descriptor;
        c.expect(same, fmt::format("cell {} does not replay", cell));
        ok += same;
    }
    c.note(fmt::format("{} of {} elites replay with identical descriptors", ok, a.size()));
}

void quality_zero_cases(Check& c)
{
    const Archive& a = desk_archive();
    const RunConfig& cfg = run_config();
    const SceneModel& scene = pinch_scene();
    double worst_touch = 0.0, worst_static = 0.0;
    for (const auto& [cell, e] : a.cells) {
        const Trajectory& t = e.trajectory;
        const JointPlan plan = plan_joint_path(desk4(), t.states, cfg.qd.quality.sim);
        const GraspOutcome nominal = execute_plan(desk4(), scene, t, plan, nullptr, cfg.qd.quality.sim);
        const QualityVector q =
            compute_quality(desk4(), scene, t, plan, nominal, NoiseSpec::zero(4, cfg.seed), cfg.qd.quality);
        c.expect(q.robustness == 1.0 && q.robustness_noise_joint == 1.0,
                 fmt::format("cell {}: sigma 0 robustness {} / {}", cell, q.robustness, q.robustness_noise_joint));
        c.expect(nominal.grasp_start_step <= nominal.grasp_end_step && q.energy >= q.energy_grasp &&
                     q.energy_grasp >= q.energy_post_grasp,
                 fmt::format("cell {}: energy windows not nested", cell));
        // fingers rest at fixed object-frame points once the grasp holds
        worst_touch = std::max(worst_touch, q.touch_var);

        // the same roll-out with the object held still
        GraspOutcome frozen = nominal;
        for (auto& p : frozen.object_pose_path)
            p = scene.object_sim_pose;
        const QualityVector s = outcome_metrics(frozen, cfg.qd.quality.touch_window);
        worst_static = std::max({worst_static, s.touch_var, s.obj_pose_var, s.obj_orient_var, s.obj_s_var});
    }
    c.expect(worst_touch <= 1e-12, fmt::format("touch_var up to {:.3g}", worst_touch));
    c.expect(worst_static <= 1e-12, fmt::format("static-object variance up to {:.3g}", worst_static));
    c.note(fmt::format("{} elites, max touch_var {:.3g}, max static variance {:.3g}", a.size(), worst_touch,
                       worst_static));
}

void robustness_monotonicity(Check& c)
{
    const Archive& a = desk_archive();
    const RunConfig& cfg = run_config();
    std::vector<double> means;
    for (double sigma : {0.0, 0.005, 0.05}) {
        NoiseSpec spec = cfg.qd.noise;
        spec.object_sigma_pos = sigma;
        spec.samples = 16;
        spec.seed = 4242;
        double sum = 0.0;
        for (const auto& [_, e] : a.cells)
            sum += compute_quality(e.trajectory, desk4(), pinch_scene(), spec, cfg.qd.quality).robustness;
        means.push_back(sum / static_cast<double>(a.size()));
    }
    c.expect(means[1] <= means[0] && means[2] <= means[1],
             fmt::format("mean robustness {:.4f}, {:.4f}, {:.4f} is not non-increasing", means[0], means[1], means[2]));
    c.note(fmt::format("mean robustness at sigma_pos 0 / 0.005 / 0.05: {:.4f} / {:.4f} / {:.4f}", means[0], means[1],
                       means[2]));
}

void kinematics_numerics(Check& c)
{
    const auto t0 = Clock::now();
    CounterRng rng(909);
    const std::vector<RobotModel> robots = {desk4(), load_robot(data_path("robots/fr3_like.json")),
                                            load_robot(data_path("robots/ur5_like.json"))};
    const double h = 1e-6;
    double worst_jac = 0.0;
    for (int s = 0; s < 100; ++s) {
        const RobotModel& robot = robots[static_cast<std::size_t>(s) % robots.size()];
        const JointConfiguration q = random_q(rng, robot, 0.9);
        const Jacobian jac = jacobian(robot, q);
        const RigidTransform base = forward_kinematics(robot, q);
        for (Eigen::Index k = 0; k < q.size(); ++k) {
            JointConfiguration qp = q, qm = q;
            qp[k] += h;
            qm[k] -= h;
            const RigidTransform fp = forward_kinematics(robot, qp), fm = forward_kinematics(robot, qm);
            const Vec3 lin = (fp.translation() - fm.translation()) / (2 * h);
            const Vec3 ang = (rotation_log(fp.rotation() * base.rotation().transpose()) -
                              rotation_log(fm.rotation() * base.rotation().transpose())) /
                             (2 * h);
            worst_jac = std::max({worst_jac, (jac.col(k).head<3>() - lin).cwiseAbs().maxCoeff(),
                                  (jac.col(k).tail<3>() - ang).cwiseAbs().maxCoeff()});
        }
    }
    c.expect(worst_jac <= 1e-5, fmt::format("Jacobian differs from central differences by {:.3g}", worst_jac));

    int converged = 0;
    double worst_pos = 0.0, worst_rot = 0.0;
    for (int s = 0; s < 200; ++s) {
        const RobotModel& robot = robots[static_cast<std::size_t>(s) % robots.size()];
        const JointConfiguration q0 = random_q(rng, robot, 0.9);
        const JointConfiguration seed = clamp_to_limits(robot, q0 + 0.3 * random_q(rng, robot, 0.2));
        const RigidTransform target = forward_kinematics(robot, q0);
        const IkResult r = inverse_kinematics(robot, target, seed);
        if (!r)
            continue;
        ++converged;
        const Eigen::Matrix<double, 6, 1> e = pose_error(target, forward_kinematics(robot, r.q));
        worst_pos = std::max(worst_pos, e.head<3>().norm());
        worst_rot = std::max(worst_rot, e.tail<3>().norm());
    }
    c.expect(converged >= 190, fmt::format("IK converged on {} of 200 targets (need 190)", converged));
    c.expect(worst_pos <= 1e-4 && worst_rot <= 1e-3,
             fmt::format("FK round-trip residual {:.3g} m / {:.3g} rad", worst_pos, worst_rot));
    const double dt = seconds_since(t0);
    c.expect(dt < 10.0, fmt::format("took {:.2f} s (limit 10 s)", dt));
    c.note(fmt::format("Jacobian error {:.3g}, IK {}/200, residual {:.3g} m / {:.3g} rad, {:.2f} s", worst_jac, converged,
                       worst_pos, worst_rot, dt));
}

void persistence(Check& c)
{
    CounterRng rng(31337);
    int exact = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Repertoire r{repertoire_info(desk4(), pinch_scene()), random_archive(rng)};
        std::istringstream is(repertoire_text(r));
        const std::string diff = archive_difference(parse_repertoire(is).archive, r.archive);
        c.expect(diff.empty(), fmt::format("archive {} differs after reload: {}", trial, diff));
        exact += diff.empty();
    }

    const auto load_error = [](const std::string& text, const ExpectedModels& expected) {
        std::istringstream is(text);
        try {
            parse_repertoire(is, expected);
        } catch (const FormatError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    const std::string text = slurp(in_work("desk_a.jsonl"));
    std::vector<std::string> lines;
    {
        std::istringstream is(text);
        for (std::string l; std::getline(is, l);)
            lines.push_back(l);
    }
    if (lines.size() >= 5) {
        std::string corrupt;
        for (std::size_t i = 0; i < lines.size(); ++i)
            corrupt += (i == 4 ? lines[i].substr(0, lines[i].size() / 3) : lines[i]) + "\n";
        const std::string msg = load_error(corrupt, {});
        c.expect(msg.find("record 3") != std::string::npos, "corrupted record 3 reported as: " + msg);
    } else {
        c.expect(false, "desk repertoire too small to corrupt record 3");
    }
    const RobotModel fr3 = load_robot(data_path("robots/fr3_like.json"));
    const SceneModel mug = load_scene(data_path("scenes/mug.json"));
    c.expect(load_error(text, {&fr3, nullptr}).find("robot hash mismatch") != std::string::npos,
             "robot mismatch not diagnosed");
    c.expect(load_error(text, {nullptr, &mug.target_object()}).find("object hash mismatch") != std::string::npos,
             "object mismatch not diagnosed");

    // every subcommand twice with identical inputs
    const std::string rep = in_work("desk_a.jsonl");
    const std::string o_obs = [] {
        const SceneModel& s = pinch_scene();
        std::string out;
        for (double v : (invert(s.camera_pose) * RigidTransform::from_translation(Vec3(0.01, -0.02, 0.0)) * s.object_sim_pose)
                            .row_major())
            out += fmt::format("{} ", v);
        return out;
    }();
    const auto with = [&](std::vector<std::string> base, const std::string& out) {
        base.insert(base.end(), {"--config", kConfig});
        if (!out.empty())
            base.insert(base.end(), {"--out", out});
        return base;
    };
    std::vector<std::pair<std::string, std::function<std::vector<std::string>(const std::string&)>>> commands = {
        {"score", [&](const std::string& o) { return with({"score", "--repertoire", rep}, o); }},
        {"select",
         [&](const std::string& o) { return with({"select", "--repertoire", rep, "--top-k", "10", "--min-robustness", "0.5"}, o); }},
        {"grid-eval",
         [&](const std::string& o) { return with({"grid-eval", "--repertoire", rep, "--div", "4", "4", "1", "--k", "3"}, o); }},
        {"export", [&](const std::string& o) { return with({"export", "--repertoire", rep}, o); }},
        {"export-cell",
         [&](const std::string& o) {
             return with({"export", "--repertoire", rep, "--cell", std::to_string(desk_archive().cells.begin()->first)}, o);
         }},
        {"adapt",
         [&](const std::string& o) {
             std::vector<std::string> args = {"adapt", "--repertoire", rep, "--report", o + ".report", "--object"};
             std::istringstream is(o_obs);
             for (std::string v; is >> v;)
                 args.push_back(v);
             return with(args, o);
         }},
    };
    std::size_t identical = 1; // generate, checked by the desk-scale run
    for (const auto& [name, make] : commands) {
        const CliRun a = cli(make(in_work(name + "_1.out")));
        const CliRun b = cli(make(in_work(name + "_2.out")));
        const bool same = a.code == kExitOk && b.code == kExitOk &&
                          slurp(in_work(name + "_1.out")) == slurp(in_work(name + "_2.out")) &&
                          slurp(in_work(name + "_1.out.report")) == slurp(in_work(name + "_2.out.report"));
        c.expect(same, fmt::format("{} is not byte-identical on rerun (exit {} / {}): {}", name, a.code, b.code, a.err));
        identical += same;
    }
    c.note(fmt::format("{}/50 archives field-exact, {}/{} subcommands byte-identical", exact, identical,
                       commands.size() + 1));
}

} // namespace

int main()
{
    const std::vector<std::pair<int, std::pair<std::string, std::function<void(Check&)>>>> criteria = {
        {5, {"desk-scale QD run", desk_scale_run}},
        {1, {"identity adaptation", identity_adaptation}},
        {2, {"relative-pose oracle", relative_pose_oracle}},
        {3, {"grid counting", grid_counting}},
        {4, {"reach boundary", reach_boundary}},
        {6, {"replay soundness", replay_soundness}},
        {7, {"quality-metric zero cases", quality_zero_cases}},
        {8, {"robustness monotonicity", robustness_monotonicity}},
        {9, {"kinematics numerics", kinematics_numerics}},
        {10, {"persistence", persistence}},
    };
    std::map<int, bool> passed;
    for (const auto& [id, named] : criteria) {
        const auto& [name, run] = named;
        Check c;
        const auto t0 = Clock::now();
        try {
            run(c);
        } catch (const std::exception& e) {
            c.failures.push_back(std::string("exception: ") + e.what());
        }
        passed[id] = c.failures.empty();
        std::cout << fmt::format("[{}] criterion {:>2}: {} ({:.1f} s)\n", passed[id] ? "PASS" : "FAIL", id, name,
                                 seconds_since(t0));
        for (const auto& n : c.notes)
            std::cout << "       " << n << "\n";
        for (std::size_t i = 0; i < c.failures.size() && i < 10; ++i)
            std::cout << "       failure: " << c.failures[i] << "\n";
        if (c.failures.size() > 10)
            std::cout << "       ... " << c.failures.size() - 10 << " more failures\n";
        std::cout.flush();
    }
    std::size_t ok = 0;
    for (const auto& [_, p] : passed)
        ok += p;
    std::cout << fmt::format("{}/{} criteria passed\n", ok, passed.size());
    fs::remove_all(work_dir());
    return ok == passed.size() ? 0 : 1;
}
