#ifndef QDGRASP_MODEL_IO_HPP
#define QDGRASP_MODEL_IO_HPP

#include <qdgrasp/kinematics.hpp>
#include <qdgrasp/noise.hpp>
#include <qdgrasp/scene.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qdgrasp {

using json = nlohmann::json;

/// Raised for unreadable, malformed or inconsistent files.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kModelFormatVersion = 1;

/// FNV-1a, 64 bit, rendered as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4)
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    return out;
}

/// Hash of the canonical (key-sorted, compact) dump of a JSON value.
inline std::string json_hash(const json& j) { return fnv1a_hex(j.dump()); }

inline json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("'" + path.string() + "': " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw FormatError("cannot write '" + path.string() + "'");
    out << text;
    if (!out)
        throw FormatError("failed writing '" + path.string() + "'");
}

// ---- primitives ----------------------------------------------------------

inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 3)
        throw FormatError("expected a 3-vector, got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

/// Transforms are written as 16 row-major numbers.
inline json to_json(const RigidTransform& h)
{
    json out = json::array();
    for (double v : h.row_major())
        out.push_back(v);
    return out;
}

/// Accepts 16 row-major numbers or {"xyz": [..], "rpy": [..]}.
inline RigidTransform transform_from_json(const json& j)
{
    if (j.is_array()) {
        if (j.size() != 16)
            throw FormatError("transform needs 16 numbers, got " + std::to_string(j.size()));
        std::array<double, 16> v{};
        for (std::size_t i = 0; i < 16; ++i)
            v[i] = j[i].get<double>();
        if (v[12] != 0.0 || v[13] != 0.0 || v[14] != 0.0 || v[15] != 1.0)
            throw FormatError("transform bottom row must be [0, 0, 0, 1]");
        return RigidTransform::from_row_major(v);
    }
    if (j.is_object()) {
        const Vec3 xyz = j.contains("xyz") ? vec3_from_json(j.at("xyz")) : Vec3::Zero();
        const Vec3 rpy = j.contains("rpy") ? vec3_from_json(j.at("rpy")) : Vec3::Zero();
        return state_to_transform({xyz, rpy});
    }
    throw FormatError("unrecognized transform " + j.dump());
}

/// States are written as 6 numbers: x y z roll pitch yaw.
inline json to_json(const EndEffectorState& s)
{
    return json::array({s.position.x(), s.position.y(), s.position.z(), s.euler.x(), s.euler.y(), s.euler.z()});
}

inline EndEffectorState state_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 6)
        throw FormatError("state needs 6 numbers, got " + j.dump());
    EndEffectorState s;
    for (int i = 0; i < 3; ++i) {
        s.position[i] = j[static_cast<std::size_t>(i)].get<double>();
        s.euler[i] = j[static_cast<std::size_t>(i + 3)].get<double>();
    }
    return s;
}

inline json to_json(const Eigen::VectorXd& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

inline Eigen::VectorXd vector_from_json(const json& j)
{
    if (!j.is_array())
        throw FormatError("expected an array, got " + j.dump());
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

inline json to_json(const Shape& s)
{
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sphere>)
                return {{"type", "sphere"}, {"center", to_json(v.center)}, {"radius", v.radius}};
            else if constexpr (std::is_same_v<T, Capsule>)
                return {{"type", "capsule"}, {"p0", to_json(v.p0)}, {"p1", to_json(v.p1)}, {"radius", v.radius}};
            else if constexpr (std::is_same_v<T, Box>)
                return {{"type", "box"}, {"half_extents", to_json(v.half_extents)}, {"pose", to_json(v.pose)}};
            else
                return {{"type", "half_space"}, {"normal", to_json(v.normal)}, {"offset", v.offset}};
        },
        s);
}

inline Shape shape_from_json(const json& j)
{
    const std::string type = j.at("type").get<std::string>();
    Shape s;
    if (type == "sphere")
        s = Sphere{vec3_from_json(j.at("center")), j.at("radius").get<double>()};
    else if (type == "capsule")
        s = Capsule{vec3_from_json(j.at("p0")), vec3_from_json(j.at("p1")), j.at("radius").get<double>()};
    else if (type == "box")
        s = Box{vec3_from_json(j.at("half_extents")), j.contains("pose") ? transform_from_json(j.at("pose")) : RigidTransform{}};
    else if (type == "half_space")
        s = HalfSpace{vec3_from_json(j.at("normal")), j.at("offset").get<double>()};
    else
        throw FormatError("unknown shape type '" + type + "'");
    try {
        validate(s);
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
    return s;
}

inline void expect_header(const json& j, const std::string& format)
{
    if (!j.is_object() || j.value("format", std::string{}) != format)
        throw FormatError("expected a '" + format + "' document");
    const int version = j.value("version", -1);
    if (version != kModelFormatVersion)
        throw FormatError("unsupported " + format + " version " + std::to_string(version));
}

// ---- robot ---------------------------------------------------------------

inline json to_json(const RobotModel& r)
{
    json joints = json::array();
    for (const auto& jt : r.joints)
        joints.push_back({{"name", jt.name},
                          {"type", jt.type == JointType::revolute ? "revolute" : "prismatic"},
                          {"axis", to_json(jt.axis)},
                          {"origin", to_json(jt.origin)},
                          {"limits", {jt.lower, jt.upper}},
                          {"link_mass", jt.link_mass}});
    json links = json::array();
    for (const auto& l : r.link_shapes) {
        json shapes = json::array();
        for (const auto& s : l)
            shapes.push_back(to_json(s));
        links.push_back(shapes);
    }
    json fingers = json::array();
    for (const auto& f : r.gripper.fingers)
        fingers.push_back({{"name", f.name}, {"shape", to_json(f.shape)}, {"closure_direction", to_json(f.closure_direction)}});
    json synergies = json::object();
    for (const auto& [s, idx] : r.gripper.synergies)
        synergies[to_string(s)] = idx;
    json excluded = json::array();
    for (const auto& [a, b] : r.excluded_pairs)
        excluded.push_back({a, b});
    json out = {{"format", "qdgrasp-robot"},
                {"version", kModelFormatVersion},
                {"id", r.id},
                {"base_pose", to_json(r.base_pose)},
                {"ee_offset", to_json(r.ee_offset)},
                {"gravity", to_json(r.gravity)},
                {"joints", joints},
                {"links", links},
                {"gripper", {{"aperture", r.gripper.aperture}, {"fingers", fingers}, {"synergies", synergies}}},
                {"excluded_pairs", excluded},
                {"table_exempt_links", r.table_exempt_links}};
    if (r.home)
        out["home"] = to_json(*r.home);
    return out;
}

inline RobotModel robot_from_json(const json& j)
{
    expect_header(j, "qdgrasp-robot");
    try {
        RobotModel r;
        r.id = j.at("id").get<std::string>();
        if (j.contains("base_pose"))
            r.base_pose = transform_from_json(j.at("base_pose"));
        if (j.contains("ee_offset"))
            r.ee_offset = transform_from_json(j.at("ee_offset"));
        if (j.contains("gravity"))
            r.gravity = vec3_from_json(j.at("gravity"));
        for (const auto& jj : j.at("joints")) {
            Joint jt;
            jt.name = jj.value("name", std::string{});
            const std::string type = jj.value("type", std::string("revolute"));
            if (type != "revolute" && type != "prismatic")
                throw FormatError("joint '" + jt.name + "' has unknown type '" + type + "'");
            jt.type = type == "revolute" ? JointType::revolute : JointType::prismatic;
            jt.axis = vec3_from_json(jj.at("axis"));
            if (jj.contains("origin"))
                jt.origin = transform_from_json(jj.at("origin"));
            jt.lower = jj.at("limits").at(0).get<double>();
            jt.upper = jj.at("limits").at(1).get<double>();
            jt.link_mass = jj.value("link_mass", 1.0);
            r.joints.push_back(jt);
        }
        for (const auto& lj : j.at("links")) {
            std::vector<Shape> shapes;
            for (const auto& sj : lj)
                shapes.push_back(shape_from_json(sj));
            r.link_shapes.push_back(std::move(shapes));
        }
        const json& g = j.at("gripper");
        r.gripper.aperture = g.at("aperture").get<double>();
        for (const auto& fj : g.at("fingers"))
            r.gripper.fingers.push_back({fj.value("name", std::string{}), shape_from_json(fj.at("shape")),
                                         vec3_from_json(fj.at("closure_direction"))});
        for (const auto& [name, idx] : g.at("synergies").items())
            r.gripper.synergies[synergy_from_string(name)] = idx.get<std::vector<int>>();
        if (j.contains("excluded_pairs"))
            for (const auto& p : j.at("excluded_pairs"))
                r.excluded_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
        if (j.contains("table_exempt_links"))
            r.table_exempt_links = j.at("table_exempt_links").get<std::vector<int>>();
        if (j.contains("home"))
            r.home = vector_from_json(j.at("home"));
        r.validate();
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("robot: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("robot: ") + e.what());
    }
}

inline RobotModel load_robot(const std::filesystem::path& path) { return robot_from_json(read_json_file(path)); }

/// Identity of a robot model, independent of file whitespace and key order.
inline std::string model_hash(const RobotModel& r) { return json_hash(to_json(r)); }

// ---- objects and scenes ----------------------------------------------------

/// Object description without its pose (the pose belongs to the scene).
inline json to_json(const ObjectModel& o)
{
    json shapes = json::array();
    for (const auto& s : o.shapes)
        shapes.push_back(to_json(s));
    json verts = json::array();
    for (const auto& v : o.vertices)
        verts.push_back(to_json(v));
    return {{"format", "qdgrasp-object"},
            {"version", kModelFormatVersion},
            {"id", o.id},
            {"shapes", shapes},
            {"vertices", verts},
            {"mass", o.mass},
            {"center_of_mass", to_json(o.center_of_mass)}};
}

/// Mass and center of mass default to the vertex-cloud estimate at the given
/// density when the document omits them.
inline ObjectModel object_from_json(const json& j)
{
    expect_header(j, "qdgrasp-object");
    try {
        ObjectModel o;
        o.id = j.at("id").get<std::string>();
        for (const auto& sj : j.at("shapes"))
            o.shapes.push_back(shape_from_json(sj));
        if (j.contains("vertices"))
            for (const auto& v : j.at("vertices"))
                o.vertices.push_back(vec3_from_json(v));
        if (!j.contains("mass") || !j.contains("center_of_mass")) {
            const MassProperties mp = object_mass_properties(o.vertices, j.value("density", kDefaultDensity));
            o.mass = mp.mass;
            o.center_of_mass = mp.center_of_mass;
        }
        if (j.contains("mass"))
            o.mass = j.at("mass").get<double>();
        if (j.contains("center_of_mass"))
            o.center_of_mass = vec3_from_json(j.at("center_of_mass"));
        o.validate();
        return o;
    } catch (const json::exception& e) {
        throw FormatError(std::string("object: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("object: ") + e.what());
    }
}

inline std::string model_hash(const ObjectModel& o) { return json_hash(to_json(o)); }

inline json to_json(const SceneModel& s)
{
    json objects = json::array();
    for (const auto& o : s.objects)
        objects.push_back({{"object", to_json(o)}, {"pose", to_json(o.pose)}});
    return {{"format", "qdgrasp-scene"},
            {"version", kModelFormatVersion},
            {"table", {{"normal", to_json(s.table.normal)}, {"offset", s.table.offset}}},
            {"objects", objects},
            {"target", s.target_object().id},
            {"camera_pose", to_json(s.camera_pose)},
            {"object_sim_pose", to_json(s.object_sim_pose)}};
}

/// Objects may be inline ({"object": {...}}) or referenced ({"file": path},
/// relative to the scene file). The target starts at object_sim_pose.
inline SceneModel scene_from_json(const json& j, const std::filesystem::path& base_dir = {})
{
    expect_header(j, "qdgrasp-scene");
    try {
        SceneModel s;
        if (j.contains("table")) {
            s.table.normal = vec3_from_json(j.at("table").at("normal"));
            s.table.offset = j.at("table").at("offset").get<double>();
        }
        for (const auto& oj : j.at("objects")) {
            ObjectModel o = oj.contains("file") ? object_from_json(read_json_file(base_dir / oj.at("file").get<std::string>()))
                                                : object_from_json(oj.at("object"));
            if (oj.contains("pose"))
                o.pose = transform_from_json(oj.at("pose"));
            s.objects.push_back(std::move(o));
        }
        const std::string target = j.at("target").get<std::string>();
        const auto it = std::find_if(s.objects.begin(), s.objects.end(), [&](const auto& o) { return o.id == target; });
        if (it == s.objects.end())
            throw FormatError("scene target '" + target + "' is not among its objects");
        s.target = static_cast<std::size_t>(it - s.objects.begin());
        if (j.contains("camera_pose"))
            s.camera_pose = transform_from_json(j.at("camera_pose"));
        s.object_sim_pose = j.contains("object_sim_pose") ? transform_from_json(j.at("object_sim_pose"))
                                                          : s.objects[s.target].pose;
        s.objects[s.target].pose = s.object_sim_pose;
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw FormatError(std::string("scene: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("scene: ") + e.what());
    }
}

inline SceneModel load_scene(const std::filesystem::path& path)
{
    return scene_from_json(read_json_file(path), path.parent_path());
}

// ---- noise -----------------------------------------------------------------

inline json to_json(const NoiseSpec& n)
{
    return {{"object_sigma_pos", n.object_sigma_pos}, {"object_sigma_rot", n.object_sigma_rot},
            {"joint_sigma", n.joint_sigma},           {"mass_sigma_rel", n.mass_sigma_rel},
            {"com_sigma", n.com_sigma},               {"margin_sigma", n.margin_sigma},
            {"samples", n.samples},                   {"seed", n.seed}};
}

inline NoiseSpec noise_from_json(const json& j, const NoiseSpec& defaults = {})
{
    NoiseSpec n = defaults;
    n.object_sigma_pos = j.value("object_sigma_pos", n.object_sigma_pos);
    n.object_sigma_rot = j.value("object_sigma_rot", n.object_sigma_rot);
    n.joint_sigma = j.value("joint_sigma", n.joint_sigma);
    n.mass_sigma_rel = j.value("mass_sigma_rel", n.mass_sigma_rel);
    n.com_sigma = j.value("com_sigma", n.com_sigma);
    n.margin_sigma = j.value("margin_sigma", n.margin_sigma);
    n.samples = j.value("samples", n.samples);
    n.seed = j.value("seed", n.seed);
    n.validate();
    return n;
}

} // namespace qdgrasp

#endif
