#ifndef QDGRASP_ARCHIVE_HPP
#define QDGRASP_ARCHIVE_HPP

#include <qdgrasp/grasp_sim.hpp>
#include <qdgrasp/rng.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdgrasp {

// ---- genome ----------------------------------------------------------------

/// Search representation: k control points decoded into an n-waypoint trajectory.
struct Genome {
    std::vector<EndEffectorState> control_points;
    double close_fraction = 0.5;
    Synergy synergy = Synergy::parallel;

    bool operator==(const Genome&) const = default;
};

inline constexpr std::size_t kMinControlPoints = 3;
inline constexpr std::size_t kMaxControlPoints = 16;

struct SearchBounds {
    Vec3 position_min = Vec3::Zero();
    Vec3 position_max = Vec3::Zero();
    Vec3 euler_min = Vec3::Zero();
    Vec3 euler_max = Vec3::Zero();
    double close_min = 0.0;
    double close_max = 1.0;
    std::vector<Synergy> synergies{Synergy::parallel};

    void validate() const
    {
        if (!((position_min.array() <= position_max.array()).all() && (euler_min.array() <= euler_max.array()).all()))
            throw std::invalid_argument("search bounds need min <= max per axis");
        if (!(0.0 <= close_min && close_min <= close_max && close_max <= 1.0))
            throw std::invalid_argument("close fraction bounds must satisfy 0 <= min <= max <= 1");
        if (synergies.empty())
            throw std::invalid_argument("search bounds need at least one synergy");
    }

    bool contains(const Genome& g) const
    {
        if (g.close_fraction < close_min || g.close_fraction > close_max)
            return false;
        if (std::find(synergies.begin(), synergies.end(), g.synergy) == synergies.end())
            return false;
        for (const auto& c : g.control_points)
            if (!((c.position.array() >= position_min.array()).all() && (c.position.array() <= position_max.array()).all() &&
                  (c.euler.array() >= euler_min.array()).all() && (c.euler.array() <= euler_max.array()).all()))
                return false;
        return true;
    }
};

inline void validate(const Genome& g, const SearchBounds& bounds)
{
    if (g.control_points.size() < kMinControlPoints || g.control_points.size() > kMaxControlPoints)
        throw std::invalid_argument("genome needs between 3 and 16 control points");
    if (!bounds.contains(g))
        throw std::invalid_argument("genome lies outside the search bounds");
}

/// Piecewise-linear interpolation of the control points over n waypoints,
/// orientation by slerp. Endpoints and runs of identical control points are
/// copied verbatim.
inline Trajectory decode(const Genome& g, std::size_t n, double aperture)
{
    const std::size_t k = g.control_points.size();
    if (k < 2)
        throw std::invalid_argument("decode needs at least two control points");
    if (n < 2)
        throw std::invalid_argument("decode needs at least two waypoints");
    Trajectory t;
    t.states.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            t.states.push_back(g.control_points.front());
            continue;
        }
        if (i == n - 1) {
            t.states.push_back(g.control_points.back());
            continue;
        }
        const double s = static_cast<double>(i) * static_cast<double>(k - 1) / static_cast<double>(n - 1);
        const std::size_t seg = std::min(static_cast<std::size_t>(s), k - 2);
        const double u = s - static_cast<double>(seg);
        const EndEffectorState& a = g.control_points[seg];
        const EndEffectorState& b = g.control_points[seg + 1];
        if (a == b || u == 0.0) {
            t.states.push_back(a);
            continue;
        }
        EndEffectorState st;
        st.position = a.position + u * (b.position - a.position);
        st.euler = rotation_to_euler(slerp(euler_to_rotation(a.euler), euler_to_rotation(b.euler), u));
        t.states.push_back(st);
    }
    t.gripper.close_step = static_cast<std::size_t>(std::llround(g.close_fraction * static_cast<double>(n - 1)));
    t.gripper.synergy = g.synergy;
    t.gripper.aperture = aperture;
    return t;
}

inline Genome random_genome(const SearchBounds& b, std::size_t k, CounterRng& rng)
{
    Genome g;
    g.control_points.resize(k);
    for (auto& c : g.control_points) {
        for (int i = 0; i < 3; ++i)
            c.position[i] = rng.uniform(b.position_min[i], b.position_max[i]);
        for (int i = 0; i < 3; ++i)
            c.euler[i] = rng.uniform(b.euler_min[i], b.euler_max[i]);
    }
    g.close_fraction = rng.uniform(b.close_min, b.close_max);
    g.synergy = b.synergies[rng.below(b.synergies.size())];
    return g;
}

struct MutationParams {
    double sigma_pos = 0.02;
    double sigma_rot = 0.1;
    double gene_probability = 0.3;
    double sigma_close = 0.05;
    double synergy_flip = 0.05;

    MutationParams scaled(double f) const
    {
        MutationParams m = *this;
        m.sigma_pos *= f;
        m.sigma_rot *= f;
        m.sigma_close *= f;
        m.synergy_flip *= f;
        return m;
    }
};

/// Gaussian perturbation clamped into the bounds. Every call consumes the same
/// number of draws, whatever is mutated.
inline Genome mutate(const Genome& parent, const SearchBounds& b, const MutationParams& m, CounterRng& rng)
{
    Genome g = parent;
    for (auto& c : g.control_points) {
        for (int i = 0; i < 6; ++i) {
            const bool hit = rng.bernoulli(m.gene_probability);
            const double step = rng.gaussian(i < 3 ? m.sigma_pos : m.sigma_rot);
            if (!hit)
                continue;
            if (i < 3)
                c.position[i] = std::clamp(c.position[i] + step, b.position_min[i], b.position_max[i]);
            else
                c.euler[i - 3] = std::clamp(c.euler[i - 3] + step, b.euler_min[i - 3], b.euler_max[i - 3]);
        }
    }
    g.close_fraction = std::clamp(g.close_fraction + rng.gaussian(m.sigma_close), b.close_min, b.close_max);
    const bool flip = rng.bernoulli(m.synergy_flip);
    const std::uint64_t pick = rng.next_u64();
    std::vector<Synergy> others;
    for (Synergy s : b.synergies)
        if (s != g.synergy)
            others.push_back(s);
    if (flip && !others.empty())
        g.synergy = others[pick % others.size()];
    return g;
}

/// First gripper-object contact point in the object frame, if any.
inline std::optional<Vec3> compute_descriptor(const GraspOutcome& outcome, const ObjectModel& object)
{
    for (std::size_t i = 0; i < outcome.contacts.size(); ++i) {
        if (outcome.contacts[i].empty())
            continue;
        const RigidTransform& pose = i < outcome.object_pose_path.size() ? outcome.object_pose_path[i] : object.pose;
        return invert(pose).apply(outcome.contacts[i].front().world_point);
    }
    return std::nullopt;
}

// ---- archive ---------------------------------------------------------------

/// Uniform grid over a box of descriptor space; cells are row-major (x outermost).
struct DescriptorGrid {
    AlignedBox bounds{Vec3::Constant(-1), Vec3::Constant(1)};
    std::array<int, 3> dims{10, 10, 10};

    void validate() const
    {
        for (int i = 0; i < 3; ++i) {
            if (dims[static_cast<std::size_t>(i)] < 1)
                throw std::invalid_argument("descriptor grid needs at least one cell per axis");
            if (!(bounds.min[i] < bounds.max[i]))
                throw std::invalid_argument("descriptor grid bounds need min < max per axis");
        }
    }

    std::size_t total() const
    {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]);
    }

    /// Per-axis cell coordinates; points outside the box clamp to border cells.
    std::array<int, 3> coords(const Vec3& d) const
    {
        std::array<int, 3> c{};
        for (int i = 0; i < 3; ++i) {
            const int n = dims[static_cast<std::size_t>(i)];
            const double f = (d[i] - bounds.min[i]) / (bounds.max[i] - bounds.min[i]);
            const double cell = std::floor(f * n);
            c[static_cast<std::size_t>(i)] = std::isfinite(cell) ? static_cast<int>(std::clamp(cell, 0.0, n - 1.0)) : 0;
        }
        return c;
    }

    std::size_t index(const Vec3& d) const
    {
        const auto c = coords(d);
        return (static_cast<std::size_t>(c[0]) * static_cast<std::size_t>(dims[1]) + static_cast<std::size_t>(c[1])) *
                   static_cast<std::size_t>(dims[2]) +
               static_cast<std::size_t>(c[2]);
    }

    AlignedBox cell_box(std::size_t index) const
    {
        const std::size_t nz = static_cast<std::size_t>(dims[2]), ny = static_cast<std::size_t>(dims[1]);
        const std::array<std::size_t, 3> c{index / (ny * nz), (index / nz) % ny, index % nz};
        AlignedBox b;
        for (int i = 0; i < 3; ++i) {
            const double w = (bounds.max[i] - bounds.min[i]) / dims[static_cast<std::size_t>(i)];
            b.min[i] = bounds.min[i] + w * static_cast<double>(c[static_cast<std::size_t>(i)]);
            b.max[i] = b.min[i] + w;
        }
        return b;
    }
};

/// Default descriptor grid: the object's local bounds inflated by 2 cm.
inline DescriptorGrid descriptor_grid_for(const ObjectModel& object, std::array<int, 3> dims = {10, 10, 10},
                                          double margin = 0.02)
{
    return {object.local_bounds().inflated(margin), dims};
}

/// Condensed roll-out result stored with each elite.
struct OutcomeSummary {
    bool success = false;
    FailureReason reason = FailureReason::none;
    std::size_t steps = 0;
    std::size_t grasp_start_step = 0;
    std::size_t grasp_end_step = 0;
    std::size_t contact_count = 0; // contacts at the last step

    bool operator==(const OutcomeSummary&) const = default;
};

inline OutcomeSummary summarize(const GraspOutcome& o)
{
    return {o.success, o.reason, o.steps(), o.grasp_start_step, o.grasp_end_step,
            o.contacts.empty() ? 0 : o.contacts.back().size()};
}

/// Archive over elites of any type exposing `descriptor` and `fitness`.
template <class EliteT>
struct BasicArchive {
    DescriptorGrid grid;
    std::map<std::size_t, EliteT> cells;
    std::size_t eval_count = 0;
    std::uint64_t rng_seed = 0;
    std::string config_hash;

    std::size_t size() const { return cells.size(); }
    bool empty() const { return cells.empty(); }
    double coverage() const { return static_cast<double>(cells.size()) / static_cast<double>(grid.total()); }
};

/// MAP-Elites replacement: the cell takes the candidate iff it is empty or the
/// candidate is strictly fitter. With the success gate on, unsuccessful
/// candidates never enter.
template <class EliteT>
bool archive_insert(BasicArchive<EliteT>& archive, EliteT candidate, bool success, bool success_gate = true)
{
    if (success_gate && !success)
        return false;
    if (!std::isfinite(candidate.fitness) || !candidate.descriptor.allFinite())
        return false;
    const std::size_t cell = archive.grid.index(candidate.descriptor);
    const auto it = archive.cells.find(cell);
    if (it != archive.cells.end() && !(candidate.fitness > it->second.fitness))
        return false;
    archive.cells.insert_or_assign(cell, std::move(candidate));
    return true;
}

} // namespace qdgrasp

#endif
