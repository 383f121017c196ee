#ifndef QDGRASP_QD_ENGINE_HPP
#define QDGRASP_QD_ENGINE_HPP

#include <qdgrasp/archive.hpp>
#include <qdgrasp/grasp_sim.hpp>
#include <qdgrasp/parallel.hpp>
#include <qdgrasp/quality.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace qdgrasp {

// ---- generic loop ------------------------------------------------------------

/// Result of evaluating one genome: the success flag feeds the gate, the elite
/// exists only when a descriptor could be computed.
template <class EliteT>
struct Evaluation {
    bool success = false;
    std::optional<EliteT> elite;
};

struct LoopOptions {
    std::size_t budget = 0;
    std::size_t batch = 32;
    std::uint64_t seed = 0;
    bool success_gate = true;
    std::size_t workers = 1;
};

struct GenerationLog {
    std::size_t generation = 0;
    std::size_t eval_count = 0;
    std::size_t archive_size = 0;
    double coverage = 0.0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    std::size_t successes = 0; // cumulative successful evaluations
    std::size_t inserted = 0;  // insertions in this generation
};

inline constexpr const char* kGenerationLogHeader = "generation\teval_count\tcoverage\tbest_fitness\tmean_fitness\tsuccesses";

inline std::string format_generation_log(const GenerationLog& g)
{
    return fmt::format("{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\t{}", g.generation, g.eval_count, g.coverage, g.best_fitness,
                       g.mean_fitness, g.successes);
}

/// MAP-Elites over an arbitrary elite type (needs `genome`, `descriptor`,
/// `fitness`). Evaluation e draws from stream e of the run seed: a random
/// genome while the archive is empty at the start of its generation, otherwise
/// a uniformly selected elite mutated. Batches are evaluated in parallel and
/// inserted serially in evaluation order; exactly `budget` evaluations run.
template <class EliteT, class RandomFn, class MutateFn, class EvalFn, class LogFn>
BasicArchive<EliteT> map_elites(const DescriptorGrid& grid, const LoopOptions& opt, RandomFn&& random_genome_fn,
                                MutateFn&& mutate_fn, EvalFn&& evaluate, LogFn&& log)
{
    grid.validate();
    if (opt.batch == 0)
        throw std::invalid_argument("batch size must be positive");
    using GenomeT = decltype(random_genome_fn(std::declval<CounterRng&>()));
    BasicArchive<EliteT> archive;
    archive.grid = grid;
    archive.rng_seed = opt.seed;
    const CounterRng root(opt.seed);
    std::size_t successes = 0;
    for (std::size_t generation = 0; archive.eval_count < opt.budget; ++generation) {
        const std::size_t count = std::min(opt.batch, opt.budget - archive.eval_count);
        std::vector<const EliteT*> parents;
        parents.reserve(archive.cells.size());
        for (const auto& [_, e] : archive.cells)
            parents.push_back(&e);
        std::vector<GenomeT> genomes;
        genomes.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            CounterRng rng = root.split(archive.eval_count + i);
            if (parents.empty())
                genomes.push_back(random_genome_fn(rng));
            else
                genomes.push_back(mutate_fn(parents[rng.below(parents.size())]->genome, rng));
        }
        std::vector<Evaluation<EliteT>> results(count);
        parallel_for(count, opt.workers, [&](std::size_t i) { results[i] = evaluate(genomes[i]); });
        GenerationLog g;
        for (auto& r : results) {
            successes += r.success;
            if (r.elite)
                g.inserted += archive_insert(archive, std::move(*r.elite), r.success, opt.success_gate);
        }
        archive.eval_count += count;
        g.generation = generation;
        g.eval_count = archive.eval_count;
        g.archive_size = archive.size();
        g.coverage = archive.coverage();
        g.successes = successes;
        if (!archive.empty()) {
            double best = -std::numeric_limits<double>::infinity(), sum = 0.0;
            for (const auto& [_, e] : archive.cells) {
                best = std::max(best, e.fitness);
                sum += e.fitness;
            }
            g.best_fitness = best;
            g.mean_fitness = sum / static_cast<double>(archive.size());
        }
        log(g);
    }
    return archive;
}

// ---- grasp repertoire ---------------------------------------------------------

struct Elite {
    Genome genome;
    Trajectory trajectory;
    double fitness = 0.0;
    Vec3 descriptor = Vec3::Zero();
    OutcomeSummary outcome;
    std::optional<QualityVector> quality;
};

using Archive = BasicArchive<Elite>;

struct QdConfig {
    SearchBounds bounds;
    std::size_t control_points = 3;
    std::size_t waypoints = 32;
    MutationParams mutation;
    std::size_t budget = 1000;
    std::size_t batch = 32;
    std::array<int, 3> grid_dims{10, 10, 10};
    double grid_margin = 0.02;
    bool success_gate = true;
    std::uint64_t seed = 0;
    NoiseSpec noise;
    FitnessWeights weights;
    QualityOptions quality;
    std::size_t workers = 1;
    std::string config_hash;

    void validate() const
    {
        bounds.validate();
        if (control_points < kMinControlPoints || control_points > kMaxControlPoints)
            throw std::invalid_argument("control point count must be between 3 and 16");
        if (waypoints < 2 || waypoints > 1024)
            throw std::invalid_argument("waypoint count must be between 2 and 1024");
        if (batch == 0)
            throw std::invalid_argument("batch size must be positive");
        noise.validate();
    }
};

/// Decode, roll out nominally, extract the descriptor and score.
inline Evaluation<Elite> evaluate_genome(const RobotModel& robot, const SceneModel& scene, const Genome& genome,
                                         const QdConfig& cfg)
{
    Evaluation<Elite> out;
    Trajectory traj = decode(genome, cfg.waypoints, robot.gripper.aperture);
    const JointPlan plan = plan_joint_path(robot, traj.states, cfg.quality.sim);
    const GraspOutcome nominal = execute_plan(robot, scene, traj, plan, nullptr, cfg.quality.sim);
    out.success = nominal.success;
    const std::optional<Vec3> descriptor = compute_descriptor(nominal, scene.target_object());
    if (!descriptor)
        return out;
    QualityOptions qopt = cfg.quality;
    qopt.workers = 1;
    const QualityVector q = compute_quality(robot, scene, traj, plan, nominal, cfg.noise, qopt);
    out.elite = Elite{genome, std::move(traj), fitness(q, cfg.weights), *descriptor, summarize(nominal), q};
    return out;
}

struct RunReport {
    std::size_t evaluations = 0;
    std::size_t successes = 0;
    std::vector<GenerationLog> generations;
    std::string diagnostic;
};

/// Repertoire generation on one robot and scene.
inline Archive run_map_elites(const RobotModel& robot, const SceneModel& scene, const QdConfig& cfg,
                              RunReport* report = nullptr,
                              const std::function<void(const GenerationLog&)>& on_generation = {})
{
    cfg.validate();
    robot.validate();
    scene.validate();
    for (Synergy s : cfg.bounds.synergies)
        if (!robot.gripper.synergies.count(s))
            throw std::invalid_argument(std::string("search bounds name synergy ") + to_string(s) +
                                        " missing from robot '" + robot.id + "'");
    const LoopOptions loop{cfg.budget, cfg.batch, cfg.seed, cfg.success_gate, cfg.workers};
    RunReport local;
    RunReport& rep = report ? *report : local;
    rep = {};
    Archive archive = map_elites<Elite>(
        descriptor_grid_for(scene.target_object(), cfg.grid_dims, cfg.grid_margin), loop,
        [&](CounterRng& rng) { return random_genome(cfg.bounds, cfg.control_points, rng); },
        [&](const Genome& g, CounterRng& rng) { return mutate(g, cfg.bounds, cfg.mutation, rng); },
        [&](const Genome& g) { return evaluate_genome(robot, scene, g, cfg); },
        [&](const GenerationLog& g) {
            rep.generations.push_back(g);
            if (on_generation)
                on_generation(g);
        });
    archive.config_hash = cfg.config_hash;
    rep.evaluations = archive.eval_count;
    rep.successes = rep.generations.empty() ? 0 : rep.generations.back().successes;
    if (archive.empty())
        rep.diagnostic = fmt::format("no successful grasp in {} evaluations; widen the genome bounds or raise the budget",
                                     archive.eval_count);
    return archive;
}

// ---- ranking --------------------------------------------------------------------

struct RankedElite {
    std::size_t cell = 0;
    Elite elite;
    QualityVector quality;
    double fitness = 0.0;
};

inline bool descriptor_less(const Vec3& a, const Vec3& b)
{
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
}

/// Stable descending order by fitness, ties by ascending descriptor.
inline void sort_ranked(std::vector<RankedElite>& list)
{
    std::stable_sort(list.begin(), list.end(), [](const RankedElite& a, const RankedElite& b) {
        if (a.fitness != b.fitness)
            return a.fitness > b.fitness;
        return descriptor_less(a.elite.descriptor, b.elite.descriptor);
    });
}

/// Re-scores every elite with one noise spec and orders them.
inline std::vector<RankedElite> rank_repertoire(const Archive& archive, const RobotModel& robot, const SceneModel& scene,
                                                const NoiseSpec& spec, const FitnessWeights& weights = {},
                                                const QualityOptions& opt = {})
{
    std::vector<RankedElite> out;
    out.reserve(archive.size());
    for (const auto& [cell, e] : archive.cells)
        out.push_back({cell, e, {}, 0.0});
    QualityOptions inner = opt;
    inner.workers = 1;
    parallel_for(out.size(), opt.workers, [&](std::size_t i) {
        out[i].quality = compute_quality(out[i].elite.trajectory, robot, scene, spec, inner);
        out[i].fitness = fitness(out[i].quality, weights);
    });
    sort_ranked(out);
    return out;
}

} // namespace qdgrasp

#endif
