#ifndef QDGRASP_PERSISTENCE_HPP
#define QDGRASP_PERSISTENCE_HPP

#include <qdgrasp/adaptation.hpp>
#include <qdgrasp/model_io.hpp>
#include <qdgrasp/qd_engine.hpp>
#include <qdgrasp/workspace.hpp>

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qdgrasp {

// ---- run configuration -------------------------------------------------------

inline const char* to_string(TouchWindow w) { return w == TouchWindow::end_of_grasp ? "end_of_grasp" : "start_of_grasp"; }

inline TouchWindow touch_window_from_string(const std::string& s)
{
    if (s == "end_of_grasp")
        return TouchWindow::end_of_grasp;
    if (s == "start_of_grasp")
        return TouchWindow::start_of_grasp;
    throw FormatError("unknown touch window '" + s + "'");
}

/// Named orientation sets for the workspace grid.
inline std::vector<Mat3> orientation_set(const std::string& name)
{
    if (name == "default")
        return default_orientations();
    if (name == "identity")
        return {Mat3::Identity()};
    throw FormatError("unknown orientation set '" + name + "' (expected default or identity)");
}

struct GridEvalConfig {
    std::optional<AlignedBox> box; // default: default_working_box(robot)
    std::array<int, 3> divisions{10, 10, 1};
    std::string orientations = "default";
    std::size_t trajectories_per_pose = 5;
    std::uint64_t seed = 0;
};

/// Every tunable of a run. Model paths are kept as written and resolved
/// against the folder of the configuration file.
struct RunConfig {
    std::string robot;
    std::string scene;
    std::filesystem::path base_dir; // not part of the effective configuration
    std::uint64_t seed = 0;
    QdConfig qd;
    GridEvalConfig grid;
    std::size_t progress_interval = 1000; // evaluations between progress lines

    std::filesystem::path resolve(const std::string& p) const
    {
        const std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : (base_dir / path).lexically_normal();
    }
    std::filesystem::path robot_path() const { return resolve(robot); }
    std::filesystem::path scene_path() const { return resolve(scene); }

    double max_step() const { return qd.quality.sim.max_joint_step; }

    GridSpec grid_spec(const RobotModel& robot) const
    {
        GridSpec g;
        g.box = grid.box ? *grid.box : default_working_box(robot);
        g.divisions = grid.divisions;
        g.orientations = orientation_set(grid.orientations);
        g.trajectories_per_pose = grid.trajectories_per_pose;
        g.seed = grid.seed;
        return g;
    }
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline std::array<int, 3> dims_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 3)
        throw FormatError("expected three integers, got " + j.dump());
    return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

} // namespace detail

/// Canonical form of the effective configuration: every field, defaults filled in.
inline json to_json(const RunConfig& c)
{
    const QdConfig& q = c.qd;
    json synergies = json::array();
    for (Synergy s : q.bounds.synergies)
        synergies.push_back(to_string(s));
    json weights = json::object();
    for (std::size_t i = 0; i < kQualityMetricNames.size(); ++i)
        weights[kQualityMetricNames[i]] = q.weights.w[i];
    const SimOptions& sim = q.quality.sim;
    json grid = {{"divisions", json::array({c.grid.divisions[0], c.grid.divisions[1], c.grid.divisions[2]})},
                 {"orientations", c.grid.orientations},
                 {"trajectories_per_pose", c.grid.trajectories_per_pose},
                 {"seed", c.grid.seed}};
    if (c.grid.box)
        grid["box"] = {{"min", to_json(c.grid.box->min)}, {"max", to_json(c.grid.box->max)}};
    return {
        {"format", "qdgrasp-config"},
        {"version", kModelFormatVersion},
        {"robot", c.robot},
        {"scene", c.scene},
        {"seed", c.seed},
        {"trajectory", {{"waypoints", q.waypoints}, {"control_points", q.control_points}}},
        {"genome_bounds",
         {{"position_min", to_json(q.bounds.position_min)},
          {"position_max", to_json(q.bounds.position_max)},
          {"euler_min", to_json(q.bounds.euler_min)},
          {"euler_max", to_json(q.bounds.euler_max)},
          {"close_fraction", json::array({q.bounds.close_min, q.bounds.close_max})},
          {"synergies", synergies}}},
        {"mutation",
         {{"sigma_pos", q.mutation.sigma_pos},
          {"sigma_rot", q.mutation.sigma_rot},
          {"gene_probability", q.mutation.gene_probability},
          {"sigma_close", q.mutation.sigma_close},
          {"synergy_flip", q.mutation.synergy_flip}}},
        {"qd",
         {{"budget", q.budget},
          {"batch_size", q.batch},
          {"grid", json::array({q.grid_dims[0], q.grid_dims[1], q.grid_dims[2]})},
          {"grid_margin", q.grid_margin},
          {"success_gate", q.success_gate}}},
        {"noise", to_json(q.noise)},
        {"fitness", {{"weights", weights}}},
        {"quality", {{"touch_window", to_string(q.quality.touch_window)}}},
        {"sim",
         {{"max_joint_step", sim.max_joint_step},
          {"contact_margin", sim.contact_margin},
          {"closure_substeps", sim.closure_substeps},
          {"lift_height", sim.lift_height},
          {"opposition_angle", sim.opposition_angle},
          {"com_tolerance", sim.com_tolerance},
          {"ik",
           {{"damping", sim.ik.damping},
            {"max_step", sim.ik.max_step},
            {"max_iterations", sim.ik.max_iterations},
            {"position_tolerance", sim.ik.position_tolerance},
            {"orientation_tolerance", sim.ik.orientation_tolerance}}}}},
        {"grid_eval", grid},
        {"progress_interval", c.progress_interval},
    };
}

/// Hash of the canonical effective configuration.
inline std::string config_hash(const RunConfig& c) { return json_hash(to_json(c)); }

/// Parses a configuration document. The seed is mandatory; the noise and grid
/// seeds default to it.
inline RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir = {})
{
    using detail::get_or;
    expect_header(j, "qdgrasp-config");
    try {
        if (!j.contains("seed"))
            throw FormatError("configuration needs an explicit 'seed'");
        RunConfig c;
        c.seed = j.at("seed").get<std::uint64_t>();
        c.base_dir = base_dir;
        c.robot = j.at("robot").get<std::string>();
        c.scene = j.at("scene").get<std::string>();
        QdConfig& q = c.qd;
        q.seed = c.seed;
        const json empty = json::object();
        const json& traj = j.contains("trajectory") ? j.at("trajectory") : empty;
        q.waypoints = get_or(traj, "waypoints", q.waypoints);
        q.control_points = get_or(traj, "control_points", q.control_points);

        const json& b = j.at("genome_bounds");
        q.bounds.position_min = vec3_from_json(b.at("position_min"));
        q.bounds.position_max = vec3_from_json(b.at("position_max"));
        q.bounds.euler_min = vec3_from_json(b.at("euler_min"));
        q.bounds.euler_max = vec3_from_json(b.at("euler_max"));
        if (b.contains("close_fraction")) {
            q.bounds.close_min = b.at("close_fraction").at(0).get<double>();
            q.bounds.close_max = b.at("close_fraction").at(1).get<double>();
        }
        if (b.contains("synergies")) {
            q.bounds.synergies.clear();
            for (const auto& s : b.at("synergies"))
                q.bounds.synergies.push_back(synergy_from_string(s.get<std::string>()));
        }

        const json& m = j.contains("mutation") ? j.at("mutation") : empty;
        q.mutation.sigma_pos = get_or(m, "sigma_pos", q.mutation.sigma_pos);
        q.mutation.sigma_rot = get_or(m, "sigma_rot", q.mutation.sigma_rot);
        q.mutation.gene_probability = get_or(m, "gene_probability", q.mutation.gene_probability);
        q.mutation.sigma_close = get_or(m, "sigma_close", q.mutation.sigma_close);
        q.mutation.synergy_flip = get_or(m, "synergy_flip", q.mutation.synergy_flip);

        const json& qd = j.contains("qd") ? j.at("qd") : empty;
        q.budget = get_or(qd, "budget", q.budget);
        q.batch = get_or(qd, "batch_size", q.batch);
        if (qd.contains("grid"))
            q.grid_dims = detail::dims_from_json(qd.at("grid"));
        q.grid_margin = get_or(qd, "grid_margin", q.grid_margin);
        q.success_gate = get_or(qd, "success_gate", q.success_gate);

        NoiseSpec noise_defaults;
        noise_defaults.seed = c.seed;
        q.noise = j.contains("noise") ? noise_from_json(j.at("noise"), noise_defaults) : noise_defaults;

        if (j.contains("fitness") && j.at("fitness").contains("weights")) {
            const json& w = j.at("fitness").at("weights");
            for (auto it = w.begin(); it != w.end(); ++it) {
                const auto pos = std::find_if(kQualityMetricNames.begin(), kQualityMetricNames.end(),
                                              [&](const char* n) { return it.key() == n; });
                if (pos == kQualityMetricNames.end())
                    throw FormatError("unknown fitness metric '" + it.key() + "'");
                q.weights.w[static_cast<std::size_t>(pos - kQualityMetricNames.begin())] = it.value().get<double>();
            }
        }
        if (j.contains("quality"))
            q.quality.touch_window =
                touch_window_from_string(get_or<std::string>(j.at("quality"), "touch_window", "end_of_grasp"));

        SimOptions& sim = q.quality.sim;
        const json& sj = j.contains("sim") ? j.at("sim") : empty;
        sim.max_joint_step = get_or(sj, "max_joint_step", sim.max_joint_step);
        sim.contact_margin = get_or(sj, "contact_margin", sim.contact_margin);
        sim.closure_substeps = get_or(sj, "closure_substeps", sim.closure_substeps);
        sim.lift_height = get_or(sj, "lift_height", sim.lift_height);
        sim.opposition_angle = get_or(sj, "opposition_angle", sim.opposition_angle);
        sim.com_tolerance = get_or(sj, "com_tolerance", sim.com_tolerance);
        const json& ik = sj.contains("ik") ? sj.at("ik") : empty;
        sim.ik.damping = get_or(ik, "damping", sim.ik.damping);
        sim.ik.max_step = get_or(ik, "max_step", sim.ik.max_step);
        sim.ik.max_iterations = get_or(ik, "max_iterations", sim.ik.max_iterations);
        sim.ik.position_tolerance = get_or(ik, "position_tolerance", sim.ik.position_tolerance);
        sim.ik.orientation_tolerance = get_or(ik, "orientation_tolerance", sim.ik.orientation_tolerance);

        c.grid.seed = c.seed;
        if (j.contains("grid_eval")) {
            const json& g = j.at("grid_eval");
            if (g.contains("box"))
                c.grid.box = AlignedBox{vec3_from_json(g.at("box").at("min")), vec3_from_json(g.at("box").at("max"))};
            if (g.contains("divisions"))
                c.grid.divisions = detail::dims_from_json(g.at("divisions"));
            c.grid.orientations = get_or(g, "orientations", c.grid.orientations);
            c.grid.trajectories_per_pose = get_or(g, "trajectories_per_pose", c.grid.trajectories_per_pose);
            c.grid.seed = get_or(g, "seed", c.grid.seed);
        }
        c.progress_interval = get_or(j, "progress_interval", c.progress_interval);

        (void)orientation_set(c.grid.orientations);
        q.validate();
        q.config_hash = config_hash(c);
        return c;
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
}

inline RunConfig load_run_config(const std::filesystem::path& path)
{
    return run_config_from_json(read_json_file(path), path.parent_path());
}

// ---- repertoire files ----------------------------------------------------------

inline constexpr int kRepertoireFormatVersion = 1;
inline constexpr const char* kRepertoireFormat = "qdgrasp-repertoire";

/// Provenance carried in a repertoire header next to the archive itself.
struct RepertoireInfo {
    std::string robot_id;
    std::string robot_hash;
    std::string object_id;
    std::string object_hash;
    RigidTransform object_sim_pose;
};

inline RepertoireInfo repertoire_info(const RobotModel& robot, const SceneModel& scene)
{
    const ObjectModel& o = scene.target_object();
    return {robot.id, model_hash(robot), o.id, model_hash(o), scene.object_sim_pose};
}

struct Repertoire {
    RepertoireInfo info;
    Archive archive;
};

inline json to_json(const Genome& g)
{
    json cps = json::array();
    for (const auto& c : g.control_points)
        cps.push_back(to_json(c));
    return {{"control_points", cps}, {"close_fraction", g.close_fraction}, {"synergy", to_string(g.synergy)}};
}

inline Genome genome_from_json(const json& j)
{
    Genome g;
    for (const auto& c : j.at("control_points"))
        g.control_points.push_back(state_from_json(c));
    g.close_fraction = j.at("close_fraction").get<double>();
    g.synergy = synergy_from_string(j.at("synergy").get<std::string>());
    return g;
}

inline json to_json(const Trajectory& t)
{
    json states = json::array();
    for (const auto& s : t.states)
        states.push_back(to_json(s));
    return {{"states", states},
            {"close_step", t.gripper.close_step},
            {"synergy", to_string(t.gripper.synergy)},
            {"aperture", t.gripper.aperture}};
}

inline Trajectory trajectory_from_json(const json& j)
{
    Trajectory t;
    for (const auto& s : j.at("states"))
        t.states.push_back(state_from_json(s));
    t.gripper.close_step = j.at("close_step").get<std::size_t>();
    t.gripper.synergy = synergy_from_string(j.at("synergy").get<std::string>());
    t.gripper.aperture = j.at("aperture").get<double>();
    t.validate();
    return t;
}

inline json to_json(const QualityVector& q)
{
    json out = json::object();
    const auto v = metric_values(q);
    for (std::size_t i = 0; i < v.size(); ++i)
        out[kQualityMetricNames[i]] = v[i];
    out["nominal_failure"] = q.nominal_failure;
    return out;
}

inline QualityVector quality_from_json(const json& j)
{
    QualityVector q;
    double* fields[] = {&q.touch_var, &q.obj_s_var, &q.obj_pose_var, &q.obj_orient_var, &q.robustness_noise_joint,
                        &q.robustness, &q.energy, &q.energy_grasp, &q.energy_post_grasp};
    for (std::size_t i = 0; i < kQualityMetricNames.size(); ++i)
        *fields[i] = j.at(kQualityMetricNames[i]).get<double>();
    q.nominal_failure = j.at("nominal_failure").get<bool>();
    return q;
}

inline json to_json(const OutcomeSummary& o)
{
    return {{"success", o.success},
            {"reason", to_string(o.reason)},
            {"steps", o.steps},
            {"grasp_start_step", o.grasp_start_step},
            {"grasp_end_step", o.grasp_end_step},
            {"contact_count", o.contact_count}};
}

inline OutcomeSummary outcome_from_json(const json& j)
{
    OutcomeSummary o;
    o.success = j.at("success").get<bool>();
    o.reason = failure_reason_from_string(j.at("reason").get<std::string>());
    o.steps = j.at("steps").get<std::size_t>();
    o.grasp_start_step = j.at("grasp_start_step").get<std::size_t>();
    o.grasp_end_step = j.at("grasp_end_step").get<std::size_t>();
    o.contact_count = j.at("contact_count").get<std::size_t>();
    return o;
}

inline json elite_to_json(std::size_t cell, const Elite& e)
{
    return {{"cell", cell},
            {"genome", to_json(e.genome)},
            {"trajectory", to_json(e.trajectory)},
            {"fitness", e.fitness},
            {"descriptor", to_json(e.descriptor)},
            {"quality", e.quality ? to_json(*e.quality) : json(nullptr)},
            {"outcome", to_json(e.outcome)}};
}

inline Elite elite_from_json(const json& j)
{
    Elite e;
    e.genome = genome_from_json(j.at("genome"));
    e.trajectory = trajectory_from_json(j.at("trajectory"));
    e.fitness = j.at("fitness").get<double>();
    e.descriptor = vec3_from_json(j.at("descriptor"));
    if (!j.at("quality").is_null())
        e.quality = quality_from_json(j.at("quality"));
    e.outcome = outcome_from_json(j.at("outcome"));
    return e;
}

inline json repertoire_header(const Repertoire& r)
{
    const Archive& a = r.archive;
    return {{"format", kRepertoireFormat},
            {"format_version", kRepertoireFormatVersion},
            {"euler_convention", kEulerConvention},
            {"robot", {{"id", r.info.robot_id}, {"hash", r.info.robot_hash}}},
            {"object", {{"id", r.info.object_id}, {"hash", r.info.object_hash}}},
            {"object_sim_pose", to_json(r.info.object_sim_pose)},
            {"grid",
             {{"dims", json::array({a.grid.dims[0], a.grid.dims[1], a.grid.dims[2]})},
              {"min", to_json(a.grid.bounds.min)},
              {"max", to_json(a.grid.bounds.max)}}},
            {"seed", a.rng_seed},
            {"eval_count", a.eval_count},
            {"config_hash", a.config_hash},
            {"records", a.size()}};
}

/// One JSON header line, then one line per elite in cell order. Doubles are
/// written in shortest round-trip form, so a reload is field-exact.
inline std::string repertoire_text(const Repertoire& r)
{
    std::string out = repertoire_header(r).dump();
    out += '\n';
    for (const auto& [cell, e] : r.archive.cells) {
        out += elite_to_json(cell, e).dump();
        out += '\n';
    }
    return out;
}

inline void save_repertoire(const Repertoire& r, const std::filesystem::path& path)
{
    write_text_file(path, repertoire_text(r));
}

/// Optional model identities a file must match at load time.
struct ExpectedModels {
    const RobotModel* robot = nullptr;
    const ObjectModel* object = nullptr;
};

inline Repertoire parse_repertoire(std::istream& in, const ExpectedModels& expected = {})
{
    std::string line;
    if (!std::getline(in, line))
        throw FormatError("repertoire: missing header");
    Repertoire r;
    std::size_t records = 0;
    try {
        const json h = json::parse(line);
        if (!h.is_object() || h.value("format", std::string{}) != kRepertoireFormat)
            throw FormatError("repertoire: header is not a qdgrasp-repertoire header");
        const int version = h.value("format_version", -1);
        if (version != kRepertoireFormatVersion)
            throw FormatError("repertoire: unsupported format_version " + std::to_string(version));
        if (h.at("euler_convention").get<std::string>() != kEulerConvention)
            throw FormatError("repertoire: unsupported euler convention '" + h.at("euler_convention").get<std::string>() +
                              "'");
        r.info.robot_id = h.at("robot").at("id").get<std::string>();
        r.info.robot_hash = h.at("robot").at("hash").get<std::string>();
        r.info.object_id = h.at("object").at("id").get<std::string>();
        r.info.object_hash = h.at("object").at("hash").get<std::string>();
        r.info.object_sim_pose = transform_from_json(h.at("object_sim_pose"));
        r.archive.grid.dims = detail::dims_from_json(h.at("grid").at("dims"));
        r.archive.grid.bounds = {vec3_from_json(h.at("grid").at("min")), vec3_from_json(h.at("grid").at("max"))};
        r.archive.grid.validate();
        r.archive.rng_seed = h.at("seed").get<std::uint64_t>();
        r.archive.eval_count = h.at("eval_count").get<std::size_t>();
        r.archive.config_hash = h.at("config_hash").get<std::string>();
        records = h.at("records").get<std::size_t>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("repertoire header: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("repertoire header: ") + e.what());
    }
    if (expected.robot && model_hash(*expected.robot) != r.info.robot_hash)
        throw FormatError("repertoire: robot hash mismatch (file has " + r.info.robot_id + " " + r.info.robot_hash +
                          ", model '" + expected.robot->id + "' hashes to " + model_hash(*expected.robot) + ")");
    if (expected.object && model_hash(*expected.object) != r.info.object_hash)
        throw FormatError("repertoire: object hash mismatch (file has " + r.info.object_id + " " + r.info.object_hash +
                          ", model '" + expected.object->id + "' hashes to " + model_hash(*expected.object) + ")");

    std::size_t index = 0;
    for (; std::getline(in, line); ++index) {
        const auto fail = [&](const std::string& what) {
            return FormatError(fmt::format("repertoire record {} (line {}): {}", index, index + 2, what));
        };
        if (index >= records)
            throw fail("more records than the header declares");
        try {
            const json j = json::parse(line);
            const std::size_t cell = j.at("cell").get<std::size_t>();
            Elite e = elite_from_json(j);
            if (cell >= r.archive.grid.total())
                throw fail("cell " + std::to_string(cell) + " outside the grid");
            if (r.archive.grid.index(e.descriptor) != cell)
                throw fail("cell " + std::to_string(cell) + " does not match its descriptor");
            if (!r.archive.cells.emplace(cell, std::move(e)).second)
                throw fail("duplicate cell " + std::to_string(cell));
        } catch (const FormatError&) {
            throw;
        } catch (const std::exception& e) {
            throw fail(e.what());
        }
    }
    if (index != records)
        throw FormatError(fmt::format("repertoire: header declares {} records, file has {}", records, index));
    return r;
}

inline Repertoire load_repertoire(const std::filesystem::path& path, const ExpectedModels& expected = {})
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open '" + path.string() + "'");
    try {
        return parse_repertoire(in, expected);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

// ---- tabular exports ------------------------------------------------------------

/// Ranked quality table: one row per elite, tab separated.
inline std::string quality_table(const std::vector<RankedElite>& ranked)
{
    std::string out = "rank\tcell\tfitness\tdescriptor_x\tdescriptor_y\tdescriptor_z";
    for (const char* n : kQualityMetricNames)
        out += std::string("\t") + n;
    out += "\tnominal_failure\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const RankedElite& r = ranked[i];
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}", i, r.cell, r.fitness, r.elite.descriptor.x(), r.elite.descriptor.y(),
                           r.elite.descriptor.z());
        for (double v : metric_values(r.quality))
            out += fmt::format("\t{}", v);
        out += fmt::format("\t{}\n", r.quality.nominal_failure ? 1 : 0);
    }
    return out;
}

/// Waypoint table of every elite: cell, step, pose and whether the gripper is closing.
inline std::string trajectory_table(const Archive& archive)
{
    std::string out = "cell\tstep\tx\ty\tz\troll\tpitch\tyaw\tclosing\tsynergy\n";
    for (const auto& [cell, e] : archive.cells) {
        const Trajectory& t = e.trajectory;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const EndEffectorState& s = t.states[i];
            out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", cell, i, s.position.x(), s.position.y(),
                               s.position.z(), s.euler.x(), s.euler.y(), s.euler.z(),
                               i >= t.gripper.close_step ? 1 : 0, to_string(t.gripper.synergy));
        }
    }
    return out;
}

/// Filter report of an adaptation run, one row per elite plus totals.
inline std::string adaptation_report(const std::vector<std::size_t>& cells, const std::vector<AdaptedTrajectory>& adapted)
{
    std::size_t accepted = 0;
    std::map<FilterCause, std::size_t> causes;
    std::string rows;
    for (std::size_t i = 0; i < adapted.size(); ++i) {
        const FilterReport& r = adapted[i].report;
        accepted += r.accepted;
        ++causes[r.cause];
        rows += fmt::format("{}\t{}\t{}\t{}\t{}\n", cells[i], r.accepted ? 1 : 0, to_string(r.cause),
                            r.accepted ? std::string("-") : std::to_string(r.waypoint),
                            r.hit ? to_string(r.hit->kind) : "-");
    }
    std::string out = fmt::format("# accepted {} rejected {}", accepted, adapted.size() - accepted);
    for (FilterCause c : {FilterCause::ik, FilterCause::joint_jump, FilterCause::collision})
        out += fmt::format(" {} {}", to_string(c), causes[c]);
    out += "\ncell\taccepted\tcause\twaypoint\tcollision\n";
    return out + rows;
}

} // namespace qdgrasp

#endif
