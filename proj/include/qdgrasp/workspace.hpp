#ifndef QDGRASP_WORKSPACE_HPP
#define QDGRASP_WORKSPACE_HPP

#include <qdgrasp/adaptation.hpp>
#include <qdgrasp/parallel.hpp>
#include <qdgrasp/rng.hpp>

#include <fmt/format.h>

#include <array>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdgrasp {

/// Two rotations about y times three about z, y applied first in the world frame.
inline std::vector<Mat3> default_orientations()
{
    std::vector<Mat3> out;
    for (double ay : {0.0, kPi / 2})
        for (double az : {0.0, 2 * kPi / 3, 4 * kPi / 3})
            out.push_back(rot_y(ay) * rot_z(az));
    return out;
}

struct GridSpec {
    AlignedBox box{Vec3(0.1, -0.35, 0.0), Vec3(0.8, 0.35, 0.1)};
    std::array<int, 3> divisions{10, 10, 1};
    std::vector<Mat3> orientations{Mat3::Identity()};
    std::size_t trajectories_per_pose = 5;
    std::uint64_t seed = 0;
    std::optional<double> resting_z; // z of every pose when there is a single z division

    void validate() const
    {
        for (int i = 0; i < 3; ++i) {
            if (divisions[static_cast<std::size_t>(i)] < 1)
                throw std::invalid_argument("grid needs at least one division per axis");
            if (!(box.min[i] < box.max[i]))
                throw std::invalid_argument("grid box needs min < max per axis");
        }
        if (orientations.empty())
            throw std::invalid_argument("grid needs at least one orientation");
        for (const auto& r : orientations)
            if (!((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9 && r.determinant() > 0.0))
                throw std::invalid_argument("grid orientations must be rotations");
        if (trajectories_per_pose == 0)
            throw std::invalid_argument("grid needs at least one trajectory per pose");
    }

    std::size_t cells() const
    {
        return static_cast<std::size_t>(divisions[0]) * static_cast<std::size_t>(divisions[1]) *
               static_cast<std::size_t>(divisions[2]);
    }
};

/// Default working box: 0.7 x 0.7 m centred 0.45 m in front of the base.
inline AlignedBox default_working_box(const RobotModel& robot, double z_min = 0.0, double z_max = 0.1)
{
    const Vec3 c = robot.base_pose.translation() + Vec3(0.45, 0.0, 0.0);
    return {Vec3(c.x() - 0.35, c.y() - 0.35, z_min), Vec3(c.x() + 0.35, c.y() + 0.35, z_max)};
}

struct GridPose {
    std::size_t cell = 0;
    std::size_t orientation = 0;
    Vec3 position = Vec3::Zero();
    Mat3 rotation = Mat3::Identity(); // applied on top of the simulated object rotation
};

/// Cell centres times orientations: x outermost, orientation innermost.
inline std::vector<GridPose> grid_poses(const GridSpec& spec)
{
    spec.validate();
    std::vector<GridPose> out;
    out.reserve(spec.cells() * spec.orientations.size());
    const auto& d = spec.divisions;
    const Vec3 width = (spec.box.max - spec.box.min).cwiseQuotient(Vec3(d[0], d[1], d[2]));
    std::size_t cell = 0;
    for (int ix = 0; ix < d[0]; ++ix)
        for (int iy = 0; iy < d[1]; ++iy)
            for (int iz = 0; iz < d[2]; ++iz, ++cell) {
                Vec3 p = spec.box.min + (Vec3(ix, iy, iz) + Vec3::Constant(0.5)).cwiseProduct(width);
                if (d[2] == 1 && spec.resting_z)
                    p.z() = *spec.resting_z;
                for (std::size_t o = 0; o < spec.orientations.size(); ++o)
                    out.push_back({cell, o, p, spec.orientations[o]});
            }
    return out;
}

/// World pose of the object for a grid pose, given the simulated pose.
inline RigidTransform object_pose_at(const GridPose& g, const RigidTransform& world_from_object_sim)
{
    return {g.rotation * world_from_object_sim.rotation(), g.position};
}

/// k distinct indices out of n by a seeded partial shuffle, in draw order.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    CounterRng rng(seed);
    k = std::min(k, n);
    for (std::size_t i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + rng.below(n - i)]);
    idx.resize(k);
    return idx;
}

struct PoseResult {
    GridPose pose;
    std::size_t feasible_count = 0;
    std::vector<FilterCause> causes; // per sampled trajectory
};

struct GridResult {
    GridSpec spec;
    std::vector<std::size_t> sampled; // repertoire indices used at every pose
    std::vector<PoseResult> poses;    // grid_poses order

    std::size_t trajectories() const { return sampled.size(); }

    std::size_t total_feasible() const
    {
        std::size_t n = 0;
        for (const auto& p : poses)
            n += p.feasible_count;
        return n;
    }

    /// Feasible adaptations summed over the orientations of each cell.
    std::map<std::size_t, std::size_t> position_totals() const
    {
        std::map<std::size_t, std::size_t> out;
        for (const auto& p : poses)
            out[p.pose.cell] += p.feasible_count;
        return out;
    }

    std::map<FilterCause, std::size_t> cause_counts() const
    {
        std::map<FilterCause, std::size_t> out;
        for (const auto& p : poses)
            for (FilterCause c : p.causes)
                ++out[c];
        return out;
    }
};

struct GridEvalOptions {
    double max_step = 0.5;
    SimOptions sim;
    std::size_t workers = 1;
};

/// Samples the trajectories once, then adapts and filters them at every grid
/// pose. With one z division and no resting height set, poses take the z of
/// the simulated object pose.
inline GridResult evaluate_grid(const std::vector<Trajectory>& repertoire, const RobotModel& robot,
                                const SceneModel& scene, const GridSpec& spec, const GridEvalOptions& opt = {})
{
    if (repertoire.empty())
        throw std::invalid_argument("grid evaluation needs a non-empty repertoire");
    GridResult r;
    r.spec = spec;
    if (r.spec.divisions[2] == 1 && !r.spec.resting_z)
        r.spec.resting_z = scene.object_sim_pose.translation().z();
    const std::vector<GridPose> poses = grid_poses(r.spec);
    r.sampled = sample_indices(repertoire.size(), spec.trajectories_per_pose, spec.seed);
    std::vector<Trajectory> chosen;
    for (std::size_t i : r.sampled)
        chosen.push_back(repertoire[i]);
    r.poses.resize(poses.size());
    parallel_for(poses.size(), opt.workers, [&](std::size_t i) {
        PoseResult& out = r.poses[i];
        out.pose = poses[i];
        const AdaptationFrames f = frames_for_pose(scene, object_pose_at(poses[i], scene.object_sim_pose));
        for (const auto& a : adapt_and_filter(chosen, f, robot, scene, opt.max_step, opt.sim, 1)) {
            out.feasible_count += a.report.accepted;
            out.causes.push_back(a.report.cause);
        }
    });
    return r;
}

inline GridResult evaluate_grid(const Archive& archive, const RobotModel& robot, const SceneModel& scene,
                                const GridSpec& spec, const GridEvalOptions& opt = {})
{
    std::vector<Trajectory> trajs;
    trajs.reserve(archive.size());
    for (const auto& [_, e] : archive.cells)
        trajs.push_back(e.trajectory);
    return evaluate_grid(trajs, robot, scene, spec, opt);
}

inline constexpr const char* kHeatmapHeader = "x,y,z,orientation_index,feasible_count,position_total";

/// One row per grid pose; `meta`, when given, becomes a leading '#' line.
inline std::string heatmap_csv(const GridResult& result, const std::string& meta = {})
{
    const auto totals = result.position_totals();
    std::string out;
    if (!meta.empty())
        out += "# " + meta + "\n";
    out += kHeatmapHeader;
    out += '\n';
    for (const auto& p : result.poses)
        out += fmt::format("{},{},{},{},{},{}\n", p.pose.position.x(), p.pose.position.y(), p.pose.position.z(),
                           p.pose.orientation, p.feasible_count, totals.at(p.pose.cell));
    return out;
}

inline void export_heatmap(const GridResult& result, const std::string& path, const std::string& meta = {})
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw std::runtime_error("cannot open " + path + " for writing");
    os << heatmap_csv(result, meta);
    if (!os)
        throw std::runtime_error("failed writing " + path);
}

} // namespace qdgrasp

#endif
