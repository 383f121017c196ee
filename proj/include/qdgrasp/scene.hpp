#ifndef QDGRASP_SCENE_HPP
#define QDGRASP_SCENE_HPP

#include <qdgrasp/kinematics.hpp>
#include <qdgrasp/shapes.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdgrasp {

/// Distance at or below which two surfaces count as touching.
inline constexpr double kContactMargin = 1e-3;

/// Default object density (kg/m^3), kept as an opaque configurable constant.
inline constexpr double kDefaultDensity = 1.5;

struct AlignedBox {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();

    bool contains(const Vec3& p) const { return (p.array() >= min.array()).all() && (p.array() <= max.array()).all(); }
    AlignedBox inflated(double d) const { return {min.array() - d, max.array() + d}; }
};

struct ObjectModel {
    std::string id;
    std::vector<Shape> shapes; // object frame
    std::vector<Vec3> vertices;
    double mass = 1.0;
    Vec3 center_of_mass = Vec3::Zero(); // object frame
    RigidTransform pose;                // world_from_object

    void validate() const
    {
        if (!(mass > 0.0))
            throw std::invalid_argument("object '" + id + "' mass must be positive");
        if (!center_of_mass.allFinite())
            throw std::invalid_argument("object '" + id + "' center of mass must be finite");
        if (shapes.empty())
            throw std::invalid_argument("object '" + id + "' needs at least one shape");
        for (const auto& s : shapes)
            qdgrasp::validate(s);
    }

    /// Axis-aligned bounds of the collision shapes in the object frame.
    AlignedBox local_bounds() const
    {
        AlignedBox b{Vec3::Constant(std::numeric_limits<double>::infinity()),
                     Vec3::Constant(-std::numeric_limits<double>::infinity())};
        for (const auto& s : shapes) {
            for (int i = 0; i < 3; ++i) {
                const Vec3 e = Vec3::Unit(i);
                b.min[i] = std::min(b.min[i], detail::support_min(s, e).first);
                b.max[i] = std::max(b.max[i], -detail::support_min(s, -e).first);
            }
        }
        return b;
    }

    /// Radius of a sphere about the object origin enclosing every shape.
    double bounding_radius() const
    {
        double r = 0.0;
        for (const auto& s : shapes) {
            const BoundingSphere b = bounding_sphere(s);
            r = std::max(r, b.center.norm() + b.radius);
        }
        return r;
    }
};

struct SceneModel {
    HalfSpace table{Vec3::UnitZ(), 0.0};
    std::vector<ObjectModel> objects;
    std::size_t target = 0;
    RigidTransform camera_pose;     // world_from_camera
    RigidTransform object_sim_pose; // world_from_object_sim

    const ObjectModel& target_object() const
    {
        if (target >= objects.size())
            throw std::out_of_range("scene has no designated target object");
        return objects[target];
    }

    /// Copy with the target object moved to `pose`.
    SceneModel with_target_pose(const RigidTransform& pose) const
    {
        SceneModel out = *this;
        out.objects.at(target).pose = pose;
        return out;
    }

    void validate() const
    {
        qdgrasp::validate(Shape{table});
        (void)target_object();
        for (const auto& o : objects)
            o.validate();
    }
};

struct MassProperties {
    double mass = 0.0;
    Vec3 center_of_mass = Vec3::Zero();
};

/// Center of mass as the vertex mean; mass as density times the volume of the
/// vertex cloud's axis-aligned bounding box.
inline MassProperties object_mass_properties(const std::vector<Vec3>& vertices, double density = kDefaultDensity)
{
    if (vertices.size() < 4)
        throw std::invalid_argument("mass properties need at least 4 vertices");
    Vec3 mean = Vec3::Zero();
    Vec3 lo = vertices.front(), hi = vertices.front();
    for (const auto& v : vertices) {
        mean += v;
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    mean /= static_cast<double>(vertices.size());
    Mat3 scatter = Mat3::Zero();
    for (const auto& v : vertices)
        scatter += (v - mean) * (v - mean).transpose();
    const double scale = std::max(1.0, (hi - lo).squaredNorm());
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
    if (eig.eigenvalues()[0] <= 1e-12 * scale)
        throw std::invalid_argument("degenerate vertex set: vertices are coplanar");
    const Vec3 ext = hi - lo;
    return {density * ext.x() * ext.y() * ext.z(), mean};
}

/// Closure travel per finger (0 = fully open, aperture / 2 = fully closed).
using FingerClosure = std::vector<double>;

inline Shape finger_shape_world(const RobotModel& robot, std::size_t finger, const RigidTransform& ee, double closure)
{
    const Finger& f = robot.gripper.fingers.at(finger);
    return transformed(f.shape, compose(ee, RigidTransform::from_translation(f.closure_direction * closure)));
}

/// Every robot collision shape in the world frame, tagged with its link index.
struct PosedRobot {
    std::vector<int> link;
    std::vector<Shape> shapes;
    std::vector<BoundingSphere> bounds;
    RigidTransform end_effector;
};

inline PosedRobot pose_robot(const RobotModel& robot, const JointConfiguration& q, const FingerClosure& closure = {})
{
    const ChainPose cp = chain_pose(robot, q);
    PosedRobot out;
    out.end_effector = cp.end_effector;
    auto push = [&](int link, Shape s) {
        out.bounds.push_back(bounding_sphere(s));
        out.shapes.push_back(std::move(s));
        out.link.push_back(link);
    };
    for (std::size_t l = 0; l < robot.link_shapes.size(); ++l)
        for (const auto& s : robot.link_shapes[l])
            push(static_cast<int>(l), transformed(s, cp.links[l]));
    for (std::size_t f = 0; f < robot.gripper.fingers.size(); ++f)
        push(robot.gripper_link(), finger_shape_world(robot, f, cp.end_effector, f < closure.size() ? closure[f] : 0.0));
    return out;
}

enum class CollisionKind { table, object, target, self };

struct CollisionHit {
    CollisionKind kind = CollisionKind::table;
    int link = 0;
    int other = 0; // link index for self hits, object index otherwise
    double distance = 0.0;
};

namespace detail {

inline bool spheres_apart(const BoundingSphere& a, const BoundingSphere& b)
{
    return (a.center - b.center).norm() > a.radius + b.radius;
}

} // namespace detail

/// First penetration (signed distance < 0) between the robot and the scene or
/// itself, in a fixed scan order: table, objects, self pairs.
inline std::optional<CollisionHit> find_collision(const RobotModel& robot, const PosedRobot& posed, const SceneModel& scene,
                                                  bool ignore_target)
{
    const RigidTransform identity;
    const Shape table{scene.table};
    const auto& exempt = robot.table_exempt_links;
    for (std::size_t i = 0; i < posed.shapes.size(); ++i) {
        const int link = posed.link[i];
        if (std::find(exempt.begin(), exempt.end(), link) != exempt.end())
            continue;
        const BoundingSphere& b = posed.bounds[i];
        if (scene.table.normal.dot(b.center) - scene.table.offset - b.radius > 0.0)
            continue;
        const double d = shape_distance(posed.shapes[i], identity, table, identity).distance;
        if (d < 0.0)
            return CollisionHit{CollisionKind::table, link, -1, d};
    }
    for (std::size_t o = 0; o < scene.objects.size(); ++o) {
        const bool is_target = o == scene.target;
        if (is_target && ignore_target)
            continue;
        const ObjectModel& obj = scene.objects[o];
        for (const auto& os : obj.shapes) {
            const Shape ws = transformed(os, obj.pose);
            const BoundingSphere ob = bounding_sphere(ws);
            for (std::size_t i = 0; i < posed.shapes.size(); ++i) {
                if (detail::spheres_apart(posed.bounds[i], ob))
                    continue;
                const double d = shape_distance(posed.shapes[i], identity, ws, identity).distance;
                if (d < 0.0)
                    return CollisionHit{is_target ? CollisionKind::target : CollisionKind::object, posed.link[i],
                                        static_cast<int>(o), d};
            }
        }
    }
    for (std::size_t i = 0; i < posed.shapes.size(); ++i) {
        for (std::size_t j = i + 1; j < posed.shapes.size(); ++j) {
            if (robot.pair_excluded(posed.link[i], posed.link[j]))
                continue;
            if (detail::spheres_apart(posed.bounds[i], posed.bounds[j]))
                continue;
            const double d = shape_distance(posed.shapes[i], identity, posed.shapes[j], identity).distance;
            if (d < 0.0)
                return CollisionHit{CollisionKind::self, posed.link[i], posed.link[j], d};
        }
    }
    return std::nullopt;
}

/// True iff any robot shape penetrates the table, a non-target object, the
/// target object (unless ignore_target), or a non-adjacent robot link.
inline bool robot_collides(const RobotModel& robot, const JointConfiguration& q, const SceneModel& scene,
                           bool ignore_target, const FingerClosure& closure = {})
{
    return find_collision(robot, pose_robot(robot, q, closure), scene, ignore_target).has_value();
}

} // namespace qdgrasp

#endif
