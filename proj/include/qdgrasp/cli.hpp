#ifndef QDGRASP_CLI_HPP
#define QDGRASP_CLI_HPP

#include <qdgrasp/adaptation.hpp>
#include <qdgrasp/persistence.hpp>
#include <qdgrasp/workspace.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qdgrasp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Command-line mistakes detected after parsing; they exit with kExitUsage.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Worker count: --workers when given, else QDGRASP_WORKERS, else the core count.
inline std::size_t resolve_workers(std::size_t flag)
{
    return flag > 0 ? flag : default_workers();
}

/// 16 row-major numbers or x y z roll pitch yaw.
inline RigidTransform transform_from_numbers(const std::vector<double>& v, const std::string& flag)
{
    if (v.size() == 16) {
        std::array<double, 16> a{};
        std::copy(v.begin(), v.end(), a.begin());
        if (a[12] != 0.0 || a[13] != 0.0 || a[14] != 0.0 || a[15] != 1.0)
            throw UsageError(flag + ": bottom row must be 0 0 0 1");
        RigidTransform h = RigidTransform::from_row_major(a);
        if (h.orthonormality_drift() > 1e-6)
            throw UsageError(flag + ": rotation block is not orthonormal");
        return h;
    }
    if (v.size() == 6)
        return state_to_transform({Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])});
    throw UsageError(flag + " takes 16 numbers (row-major) or 6 (x y z roll pitch yaw), got " + std::to_string(v.size()));
}

namespace detail {

struct CliContext {
    RunConfig config;
    RobotModel robot;
    SceneModel scene;
    std::size_t workers = 1;
};

inline CliContext load_context(const std::string& config_path, std::size_t workers)
{
    CliContext c;
    c.config = load_run_config(config_path);
    c.robot = load_robot(c.config.robot_path());
    c.scene = load_scene(c.config.scene_path());
    c.workers = resolve_workers(workers);
    c.config.qd.workers = c.workers;
    return c;
}

inline Repertoire load_checked(const CliContext& c, const std::string& path)
{
    return load_repertoire(path, {&c.robot, &c.scene.target_object()});
}

/// Repertoire from an archive, stamped with the run's models and config hash.
inline Repertoire stamp(const CliContext& c, Archive archive, const RepertoireInfo* info = nullptr)
{
    archive.config_hash = c.config.qd.config_hash;
    return {info ? *info : repertoire_info(c.robot, c.scene), std::move(archive)};
}

inline std::string meta_line(const CliContext& c, const Repertoire& r)
{
    return fmt::format("config_hash={} repertoire_config_hash={} robot={} object={}", c.config.qd.config_hash,
                       r.archive.config_hash, r.info.robot_id, r.info.object_id);
}

inline void write_or_print(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-")
        out << text;
    else
        write_text_file(path, text);
}

} // namespace detail

/// Runs the command line. Data goes to files or `out`, diagnostics to `err`.
/// Exit codes: 0 success, 1 domain failure, 2 usage error.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Quality-diversity grasp repertoires: generate, score, select, adapt, grid-eval, export", "qdgrasp"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string config_path, repertoire_path, out_path;
    std::size_t workers = 0;
    const auto common = [&](CLI::App* sub, bool needs_repertoire) {
        sub->add_option("--config", config_path, "Run configuration file")->required();
        if (needs_repertoire)
            sub->add_option("--repertoire", repertoire_path, "Input repertoire file")->required();
        sub->add_option("--workers", workers, "Worker threads (default: QDGRASP_WORKERS or core count)");
    };

    // generate
    auto* generate = app.add_subcommand("generate", "Run MAP-Elites and save the repertoire");
    common(generate, false);
    std::optional<std::size_t> budget;
    std::optional<std::uint64_t> seed;
    std::string log_path;
    generate->add_option("--budget", budget, "Override the evaluation budget");
    generate->add_option("--seed", seed, "Override the run seed");
    generate->add_option("--out", out_path, "Output repertoire file")->required();
    generate->add_option("--log", log_path, "Per-generation log (TSV)");

    // score
    auto* score = app.add_subcommand("score", "Re-score and rank a repertoire");
    common(score, true);
    score->add_option("--out", out_path, "Quality table (TSV); stdout when omitted");

    // select
    auto* select = app.add_subcommand("select", "Keep the elites matching a scenario");
    common(select, true);
    std::optional<std::size_t> top_k;
    std::optional<double> min_robustness;
    std::vector<double> region;
    select->add_option("--top-k", top_k, "Keep at most this many elites");
    select->add_option("--min-robustness", min_robustness, "Minimum object-pose robustness");
    select->add_option("--region", region, "Descriptor box: xmin ymin zmin xmax ymax zmax")->expected(6);
    select->add_option("--out", out_path, "Output repertoire file")->required();

    // adapt
    auto* adapt = app.add_subcommand("adapt", "Re-target a repertoire to an observed object pose and filter it");
    common(adapt, true);
    std::vector<double> camera, object, sim;
    std::string report_path;
    adapt->add_option("--camera", camera, "world_from_camera (default: scene camera)")->expected(6, 16);
    adapt->add_option("--object", object, "camera_from_object, the pose estimate")->expected(6, 16)->required();
    adapt->add_option("--sim", sim, "world_from_object_sim (default: from the repertoire)")->expected(6, 16);
    adapt->add_option("--out", out_path, "Adapted repertoire of the accepted elites")->required();
    adapt->add_option("--report", report_path, "Filter report (TSV); stdout when omitted");

    // grid-eval
    auto* grid = app.add_subcommand("grid-eval", "Count feasible adaptations over a grid of object poses");
    common(grid, true);
    std::vector<double> box;
    std::vector<int> div;
    std::optional<std::string> orient_set;
    std::optional<std::size_t> k;
    std::optional<std::uint64_t> grid_seed;
    grid->add_option("--box", box, "Working box: xmin ymin zmin xmax ymax zmax")->expected(6);
    grid->add_option("--div", div, "Divisions: nx ny nz")->expected(3);
    grid->add_option("--orient-set", orient_set, "Orientation set: default or identity");
    grid->add_option("--k", k, "Trajectories sampled per pose");
    grid->add_option("--seed", grid_seed, "Sampling seed");
    grid->add_option("--out", out_path, "Heatmap CSV")->required();

    // export
    auto* exp = app.add_subcommand("export", "Write trajectory traces");
    common(exp, true);
    std::optional<std::size_t> cell;
    exp->add_option("--cell", cell, "Roll out this cell and write its full simulation trace");
    exp->add_option("--out", out_path, "Trace file (TSV); stdout when omitted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    try {
        detail::CliContext ctx = detail::load_context(config_path, workers);
        RunConfig& cfg = ctx.config;

        if (generate->parsed()) {
            if (budget)
                cfg.qd.budget = *budget;
            if (seed)
                cfg.seed = cfg.qd.seed = *seed;
            cfg.qd.config_hash = config_hash(cfg);
            std::string log = std::string(kGenerationLogHeader) + "\n";
            std::size_t next_progress = cfg.progress_interval;
            RunReport report;
            Archive archive = run_map_elites(ctx.robot, ctx.scene, cfg.qd, &report, [&](const GenerationLog& g) {
                log += format_generation_log(g) + "\n";
                if (cfg.progress_interval > 0 && g.eval_count >= next_progress) {
                    err << fmt::format("progress: {}/{} evaluations, {} elites, coverage {:.4f}\n", g.eval_count,
                                       cfg.qd.budget, g.archive_size, g.coverage);
                    while (next_progress <= g.eval_count)
                        next_progress += cfg.progress_interval;
                }
            });
            const std::size_t elites = archive.size();
            save_repertoire(detail::stamp(ctx, std::move(archive)), out_path);
            if (!log_path.empty())
                write_text_file(log_path, log);
            if (cfg.qd.budget == 0) {
                err << "warning: budget is 0, wrote an empty repertoire\n";
                return kExitOk;
            }
            if (!report.diagnostic.empty()) {
                err << "error: " << report.diagnostic << "\n";
                return kExitFailure;
            }
            err << fmt::format("generated {} elites from {} evaluations ({} successful)\n", elites, report.evaluations,
                               report.successes);
            return kExitOk;
        }

        const Repertoire rep = detail::load_checked(ctx, repertoire_path);
        if (rep.archive.empty()) {
            err << "error: repertoire '" << repertoire_path << "' is empty\n";
            return kExitFailure;
        }
        QualityOptions qopt = cfg.qd.quality;
        qopt.workers = ctx.workers;
        // the repertoire's simulated pose is where its trajectories were made
        SceneModel sim_scene = ctx.scene.with_target_pose(rep.info.object_sim_pose);
        sim_scene.object_sim_pose = rep.info.object_sim_pose;

        if (score->parsed() || select->parsed()) {
            const auto ranked = rank_repertoire(rep.archive, ctx.robot, sim_scene, cfg.qd.noise, cfg.qd.weights, qopt);
            if (score->parsed()) {
                detail::write_or_print(out_path, "# " + detail::meta_line(ctx, rep) + "\n" + quality_table(ranked), out);
                return kExitOk;
            }
            SelectionScenario s;
            s.top_k = top_k;
            s.min_robustness = min_robustness;
            if (!region.empty())
                s.descriptor_region = AlignedBox{Vec3(region[0], region[1], region[2]), Vec3(region[3], region[4], region[5])};
            Archive sub;
            sub.grid = rep.archive.grid;
            sub.eval_count = rep.archive.eval_count;
            sub.rng_seed = rep.archive.rng_seed;
            for (const auto& r : select_grasps(ranked, s))
                sub.cells.emplace(r.cell, r.elite);
            err << fmt::format("selected {} of {} elites\n", sub.size(), rep.archive.size());
            if (sub.empty())
                err << "warning: no elite matches the scenario\n";
            save_repertoire(detail::stamp(ctx, std::move(sub), &rep.info), out_path);
            return kExitOk;
        }

        if (adapt->parsed()) {
            AdaptationFrames f;
            f.world_from_camera = camera.empty() ? ctx.scene.camera_pose : transform_from_numbers(camera, "--camera");
            f.camera_from_object = transform_from_numbers(object, "--object");
            f.world_from_object_sim = sim.empty() ? rep.info.object_sim_pose : transform_from_numbers(sim, "--sim");
            std::vector<Trajectory> trajs;
            std::vector<std::size_t> cells;
            for (const auto& [c, e] : rep.archive.cells) {
                trajs.push_back(e.trajectory);
                cells.push_back(c);
            }
            const auto adapted = adapt_and_filter(trajs, f, ctx.robot, ctx.scene, cfg.max_step(), cfg.qd.quality.sim,
                                                  ctx.workers);
            Archive kept;
            kept.grid = rep.archive.grid;
            kept.eval_count = rep.archive.eval_count;
            kept.rng_seed = rep.archive.rng_seed;
            for (std::size_t i = 0; i < adapted.size(); ++i) {
                if (!adapted[i].report.accepted)
                    continue;
                Elite e = rep.archive.cells.at(cells[i]);
                e.trajectory = adapted[i].trajectory;
                kept.cells.emplace(cells[i], std::move(e));
            }
            RepertoireInfo info = rep.info;
            info.object_sim_pose = f.world_from_object();
            const std::size_t accepted = kept.size();
            save_repertoire(detail::stamp(ctx, std::move(kept), &info), out_path);
            detail::write_or_print(report_path, "# " + detail::meta_line(ctx, rep) + "\n" + adaptation_report(cells, adapted),
                                   out);
            err << fmt::format("adapted {} of {} trajectories\n", accepted, adapted.size());
            if (accepted == 0) {
                err << "error: no trajectory is feasible at the observed pose\n";
                return kExitFailure;
            }
            return kExitOk;
        }

        if (grid->parsed()) {
            GridSpec spec = cfg.grid_spec(ctx.robot);
            if (!box.empty())
                spec.box = {Vec3(box[0], box[1], box[2]), Vec3(box[3], box[4], box[5])};
            if (!div.empty())
                spec.divisions = {div[0], div[1], div[2]};
            if (orient_set) {
                try {
                    spec.orientations = orientation_set(*orient_set);
                } catch (const FormatError& e) {
                    throw UsageError(std::string("--orient-set: ") + e.what());
                }
            }
            if (k)
                spec.trajectories_per_pose = *k;
            if (grid_seed)
                spec.seed = *grid_seed;
            try {
                spec.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            GridEvalOptions gopt;
            gopt.max_step = cfg.max_step();
            gopt.sim = cfg.qd.quality.sim;
            gopt.workers = ctx.workers;
            const GridResult result = evaluate_grid(rep.archive, ctx.robot, sim_scene, spec, gopt);
            const std::string meta =
                detail::meta_line(ctx, rep) +
                fmt::format(" box={},{},{},{},{},{} div={}x{}x{} orientations={} k={} seed={} sampled={}", spec.box.min.x(),
                            spec.box.min.y(), spec.box.min.z(), spec.box.max.x(), spec.box.max.y(), spec.box.max.z(),
                            spec.divisions[0], spec.divisions[1], spec.divisions[2], spec.orientations.size(),
                            spec.trajectories_per_pose, spec.seed, fmt::join(result.sampled, ","));
            export_heatmap(result, out_path, meta);
            err << fmt::format("{} poses, {} feasible adaptations\n", result.poses.size(), result.total_feasible());
            return kExitOk;
        }

        if (exp->parsed()) {
            std::string text = "# " + detail::meta_line(ctx, rep) + "\n";
            if (cell) {
                const auto it = rep.archive.cells.find(*cell);
                if (it == rep.archive.cells.end())
                    throw UsageError("--cell " + std::to_string(*cell) + " is not in the repertoire");
                std::ostringstream os;
                write_outcome_trace(os, ctx.robot, rollout(ctx.robot, sim_scene, it->second.trajectory, nullptr,
                                                           cfg.qd.quality.sim));
                text += os.str();
            } else {
                text += trajectory_table(rep.archive);
            }
            detail::write_or_print(out_path, text, out);
            return kExitOk;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace qdgrasp

#endif
