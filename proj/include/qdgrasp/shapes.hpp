#ifndef QDGRASP_SHAPES_HPP
#define QDGRASP_SHAPES_HPP

#include <qdgrasp/se3.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

namespace qdgrasp {

struct Sphere {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
};

struct Capsule {
    Vec3 p0 = Vec3::Zero();
    Vec3 p1 = Vec3::Zero();
    double radius = 0.0;
};

struct Box {
    Vec3 half_extents = Vec3::Zero();
    RigidTransform pose; // box frame inside the owning frame
};

/// Solid region {x : normal . x <= offset}; the surface normal points out of it.
struct HalfSpace {
    Vec3 normal = Vec3::UnitZ();
    double offset = 0.0;
};

using Shape = std::variant<Sphere, Capsule, Box, HalfSpace>;

inline void validate(const Shape& s)
{
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sphere> || std::is_same_v<T, Capsule>) {
                if (!(v.radius > 0.0))
                    throw std::invalid_argument("shape radius must be strictly positive");
            } else if constexpr (std::is_same_v<T, Box>) {
                if (!(v.half_extents.minCoeff() > 0.0))
                    throw std::invalid_argument("box half extents must be strictly positive");
            } else {
                if (std::abs(v.normal.norm() - 1.0) > 1e-9)
                    throw std::invalid_argument("half-space normal must have unit length");
            }
        },
        s);
}

/// Expresses a shape (given in some frame F) in the frame `pose` maps F into.
inline Shape transformed(const Shape& s, const RigidTransform& pose)
{
    return std::visit(
        [&](const auto& v) -> Shape {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sphere>) {
                return Sphere{pose.apply(v.center), v.radius};
            } else if constexpr (std::is_same_v<T, Capsule>) {
                return Capsule{pose.apply(v.p0), pose.apply(v.p1), v.radius};
            } else if constexpr (std::is_same_v<T, Box>) {
                return Box{v.half_extents, compose(pose, v.pose)};
            } else {
                const Vec3 n = pose.apply_vector(v.normal);
                return HalfSpace{n, v.offset + n.dot(pose.translation())};
            }
        },
        s);
}

/// Center and radius of a sphere enclosing the shape; infinite for half-spaces.
struct BoundingSphere {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
};

inline BoundingSphere bounding_sphere(const Shape& s)
{
    return std::visit(
        [](const auto& v) -> BoundingSphere {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sphere>)
                return {v.center, v.radius};
            else if constexpr (std::is_same_v<T, Capsule>)
                return {0.5 * (v.p0 + v.p1), 0.5 * (v.p1 - v.p0).norm() + v.radius};
            else if constexpr (std::is_same_v<T, Box>)
                return {v.pose.translation(), v.half_extents.norm()};
            else
                return {Vec3::Zero(), std::numeric_limits<double>::infinity()};
        },
        s);
}

struct DistanceResult {
    double distance = std::numeric_limits<double>::infinity();
    Vec3 point_a = Vec3::Zero();
    Vec3 point_b = Vec3::Zero();
};

namespace detail {

struct SegmentPair {
    double s = 0.0;
    double t = 0.0;
    Vec3 c1;
    Vec3 c2;
};

/// Closest points between segments p1-q1 and p2-q2.
inline SegmentPair closest_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2)
{
    const Vec3 d1 = q1 - p1;
    const Vec3 d2 = q2 - p2;
    const Vec3 r = p1 - p2;
    const double a = d1.squaredNorm();
    const double e = d2.squaredNorm();
    const double f = d2.dot(r);
    constexpr double eps = 1e-300;
    double s = 0.0;
    double t = 0.0;
    if (a <= eps && e <= eps) {
        // both degenerate
    } else if (a <= eps) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = d1.dot(r);
        if (e <= eps) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double denom = a * e - b * b;
            s = denom > 1e-18 * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return {s, t, p1 + d1 * s, p2 + d2 * t};
}

inline Vec3 closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b)
{
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0)
        return a;
    return a + ab * std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
}

/// Signed distance from a point to a box, with the closest surface point.
inline std::pair<double, Vec3> point_box(const Vec3& p, const Box& box)
{
    const Vec3 local = invert(box.pose).apply(p);
    const Vec3& h = box.half_extents;
    const Vec3 clamped = local.cwiseMax(-h).cwiseMin(h);
    if (clamped != local)
        return {(local - clamped).norm(), box.pose.apply(clamped)};
    // inside: push out through the nearest face
    int axis = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        const double gap = h[i] - std::abs(local[i]);
        if (gap < best) {
            best = gap;
            axis = i;
        }
    }
    Vec3 surface = local;
    surface[axis] = local[axis] >= 0.0 ? h[axis] : -h[axis];
    return {-best, box.pose.apply(surface)};
}

inline std::array<Vec3, 8> box_corners(const Box& box)
{
    std::array<Vec3, 8> out;
    for (int i = 0; i < 8; ++i) {
        const Vec3 local((i & 1 ? 1 : -1) * box.half_extents.x(), (i & 2 ? 1 : -1) * box.half_extents.y(),
                         (i & 4 ? 1 : -1) * box.half_extents.z());
        out[static_cast<std::size_t>(i)] = box.pose.apply(local);
    }
    return out;
}

inline constexpr std::array<std::array<int, 2>, 12> kBoxEdges{{{0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 2}, {1, 3},
                                                              {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}}};

/// Slab test of the segment against the box (box-local coordinates).
inline bool segment_intersects_box(const Vec3& a_local, const Vec3& b_local, const Vec3& h)
{
    double t0 = 0.0, t1 = 1.0;
    const Vec3 d = b_local - a_local;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(d[i]) < 1e-300) {
            if (a_local[i] < -h[i] || a_local[i] > h[i])
                return false;
            continue;
        }
        double ta = (-h[i] - a_local[i]) / d[i];
        double tb = (h[i] - a_local[i]) / d[i];
        if (ta > tb)
            std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1)
            return false;
    }
    return true;
}

/// Signed distance between a segment and a box: point on segment, point on box.
inline DistanceResult segment_box(const Vec3& a, const Vec3& b, const Box& box)
{
    const RigidTransform to_local = invert(box.pose);
    const Vec3 al = to_local.apply(a);
    const Vec3 bl = to_local.apply(b);
    const Vec3& h = box.half_extents;
    DistanceResult best;
    auto consider_point = [&](const Vec3& p) {
        const auto [d, q] = point_box(p, box);
        if (d < best.distance)
            best = {d, p, q};
    };
    if (!segment_intersects_box(al, bl, h)) {
        consider_point(a);
        consider_point(b);
        const auto corners = box_corners(box);
        for (const auto& e : kBoxEdges) {
            const auto sp = closest_segment_segment(a, b, corners[static_cast<std::size_t>(e[0])],
                                                    corners[static_cast<std::size_t>(e[1])]);
            const double d = (sp.c1 - sp.c2).norm();
            if (d < best.distance)
                best = {d, sp.c1, sp.c2};
        }
        return best;
    }
    // Penetrating: inside the box the signed distance is the max of six affine
    // functions of the segment parameter, so the minimum sits at an endpoint
    // or at a crossing of two of them.
    const Vec3 d = bl - al;
    std::array<double, 6> slope{}, icpt{};
    for (int i = 0; i < 3; ++i) {
        slope[static_cast<std::size_t>(2 * i)] = d[i];
        icpt[static_cast<std::size_t>(2 * i)] = al[i] - h[i];
        slope[static_cast<std::size_t>(2 * i + 1)] = -d[i];
        icpt[static_cast<std::size_t>(2 * i + 1)] = -al[i] - h[i];
    }
    consider_point(a);
    consider_point(b);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = i + 1; j < 6; ++j) {
            const double ds = slope[i] - slope[j];
            if (std::abs(ds) < 1e-300)
                continue;
            const double t = (icpt[j] - icpt[i]) / ds;
            if (t > 0.0 && t < 1.0)
                consider_point(a + (b - a) * t);
        }
    }
    return best;
}

/// Separating-axis test; returns the largest separation over the 15 axes
/// (negative when overlapping: minus the minimal penetration depth).
inline std::pair<double, Vec3> box_box_sat(const Box& a, const Box& b)
{
    const Mat3& ra = a.pose.rotation();
    const Mat3& rb = b.pose.rotation();
    const Vec3 t = b.pose.translation() - a.pose.translation();
    double best = -std::numeric_limits<double>::infinity();
    Vec3 best_axis = Vec3::UnitX();
    auto test = [&](Vec3 axis) {
        const double len = axis.norm();
        if (len < 1e-9)
            return;
        axis /= len;
        double pa = 0.0, pb = 0.0;
        for (int i = 0; i < 3; ++i) {
            pa += a.half_extents[i] * std::abs(ra.col(i).dot(axis));
            pb += b.half_extents[i] * std::abs(rb.col(i).dot(axis));
        }
        const double sep = std::abs(t.dot(axis)) - pa - pb;
        if (sep > best) {
            best = sep;
            best_axis = t.dot(axis) >= 0.0 ? axis : Vec3(-axis);
        }
    };
    for (int i = 0; i < 3; ++i)
        test(ra.col(i));
    for (int i = 0; i < 3; ++i)
        test(rb.col(i));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            test(ra.col(i).cross(rb.col(j)));
    return {best, best_axis};
}

inline DistanceResult box_box(const Box& a, const Box& b)
{
    const auto [sep, axis] = box_box_sat(a, b);
    if (sep < 0.0) {
        // penetration: deepest points along the minimal axis (axis points a -> b)
        const auto ca = box_corners(a);
        const auto cb = box_corners(b);
        const Vec3 pa = *std::max_element(ca.begin(), ca.end(),
                                          [&](const Vec3& x, const Vec3& y) { return x.dot(axis) < y.dot(axis); });
        const Vec3 pb = *std::min_element(cb.begin(), cb.end(),
                                          [&](const Vec3& x, const Vec3& y) { return x.dot(axis) < y.dot(axis); });
        return {sep, pa, pb};
    }
    DistanceResult best;
    const auto ca = box_corners(a);
    for (const auto& e : kBoxEdges) {
        const auto r = segment_box(ca[static_cast<std::size_t>(e[0])], ca[static_cast<std::size_t>(e[1])], b);
        if (r.distance < best.distance)
            best = r;
    }
    const auto cb = box_corners(b);
    for (const auto& e : kBoxEdges) {
        const auto r = segment_box(cb[static_cast<std::size_t>(e[0])], cb[static_cast<std::size_t>(e[1])], a);
        if (r.distance < best.distance)
            best = {r.distance, r.point_b, r.point_a};
    }
    return best;
}

inline DistanceResult swap_result(const DistanceResult& r) { return {r.distance, r.point_b, r.point_a}; }

/// Witness on a shape minimizing normal . x, and that minimum.
inline std::pair<double, Vec3> support_min(const Shape& s, const Vec3& n)
{
    return std::visit(
        [&](const auto& v) -> std::pair<double, Vec3> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sphere>) {
                const Vec3 p = v.center - v.radius * n;
                return {p.dot(n), p};
            } else if constexpr (std::is_same_v<T, Capsule>) {
                const Vec3& c = v.p0.dot(n) <= v.p1.dot(n) ? v.p0 : v.p1;
                const Vec3 p = c - v.radius * n;
                return {p.dot(n), p};
            } else if constexpr (std::is_same_v<T, Box>) {
                Vec3 local = Vec3::Zero();
                const Vec3 nl = v.pose.rotation().transpose() * n;
                for (int i = 0; i < 3; ++i)
                    local[i] = nl[i] > 0.0 ? -v.half_extents[i] : (nl[i] < 0.0 ? v.half_extents[i] : 0.0);
                const Vec3 p = v.pose.apply(local);
                return {p.dot(n), p};
            } else {
                return {-std::numeric_limits<double>::infinity(), Vec3::Zero()};
            }
        },
        s);
}

inline DistanceResult shape_halfspace(const Shape& s, const HalfSpace& h)
{
    if (const auto* other = std::get_if<HalfSpace>(&s)) {
        if ((other->normal + h.normal).norm() < 1e-12)
            return {-other->offset - h.offset, Vec3::Zero(), Vec3::Zero()};
        return {-std::numeric_limits<double>::infinity(), Vec3::Zero(), Vec3::Zero()};
    }
    const auto [lowest, p] = support_min(s, h.normal);
    const double d = lowest - h.offset;
    return {d, p, p - d * h.normal};
}

/// Distance between world-frame shapes with a.index() <= b.index().
inline DistanceResult ordered_distance(const Shape& a, const Shape& b)
{
    if (const auto* hb = std::get_if<HalfSpace>(&b))
        return shape_halfspace(a, *hb);
    if (const auto* sa = std::get_if<Sphere>(&a)) {
        if (const auto* sb = std::get_if<Sphere>(&b)) {
            const Vec3 d = sb->center - sa->center;
            const double len = d.norm();
            const Vec3 dir = len > 0.0 ? Vec3(d / len) : Vec3(Vec3::UnitX());
            return {len - sa->radius - sb->radius, sa->center + sa->radius * dir, sb->center - sb->radius * dir};
        }
        if (const auto* cb = std::get_if<Capsule>(&b)) {
            const Vec3 q = closest_point_on_segment(sa->center, cb->p0, cb->p1);
            const Vec3 d = q - sa->center;
            const double len = d.norm();
            const Vec3 dir = len > 0.0 ? Vec3(d / len) : Vec3(Vec3::UnitX());
            return {len - sa->radius - cb->radius, sa->center + sa->radius * dir, q - cb->radius * dir};
        }
        const auto& bb = std::get<Box>(b);
        const auto [d, q] = point_box(sa->center, bb);
        Vec3 dir = q - sa->center;
        const double len = dir.norm();
        dir = len > 0.0 ? Vec3(dir / len) : Vec3(Vec3::UnitX());
        if (d < 0.0)
            dir = -dir;
        return {d - sa->radius, sa->center + sa->radius * dir, q};
    }
    if (const auto* ca = std::get_if<Capsule>(&a)) {
        if (const auto* cb = std::get_if<Capsule>(&b)) {
            const auto sp = closest_segment_segment(ca->p0, ca->p1, cb->p0, cb->p1);
            const Vec3 d = sp.c2 - sp.c1;
            const double len = d.norm();
            const Vec3 dir = len > 0.0 ? Vec3(d / len) : Vec3(Vec3::UnitX());
            return {len - ca->radius - cb->radius, sp.c1 + ca->radius * dir, sp.c2 - cb->radius * dir};
        }
        const auto& bb = std::get<Box>(b);
        const auto r = segment_box(ca->p0, ca->p1, bb);
        Vec3 dir = r.point_b - r.point_a;
        const double len = dir.norm();
        dir = len > 0.0 ? Vec3(dir / len) : Vec3(Vec3::UnitX());
        if (r.distance < 0.0)
            dir = -dir;
        return {r.distance - ca->radius, r.point_a + ca->radius * dir, r.point_b};
    }
    return box_box(std::get<Box>(a), std::get<Box>(b));
}

} // namespace detail

/// Signed distance between two posed shapes (negative iff penetrating) with
/// world-frame witness points on a and on b.
inline DistanceResult shape_distance(const Shape& a, const RigidTransform& pose_a, const Shape& b,
                                     const RigidTransform& pose_b)
{
    const Shape wa = transformed(a, pose_a);
    const Shape wb = transformed(b, pose_b);
    if (wa.index() <= wb.index())
        return detail::ordered_distance(wa, wb);
    return detail::swap_result(detail::ordered_distance(wb, wa));
}

/// Outward surface normal of a world-frame shape near a surface point.
inline Vec3 surface_normal(const Shape& s, const Vec3& p)
{
    return std::visit(
        [&](const auto& v) -> Vec3 {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sphere>) {
                const Vec3 d = p - v.center;
                return d.norm() > 0.0 ? Vec3(d.normalized()) : Vec3(Vec3::UnitZ());
            } else if constexpr (std::is_same_v<T, Capsule>) {
                const Vec3 d = p - detail::closest_point_on_segment(p, v.p0, v.p1);
                return d.norm() > 0.0 ? Vec3(d.normalized()) : Vec3(Vec3::UnitZ());
            } else if constexpr (std::is_same_v<T, Box>) {
                const Vec3 local = invert(v.pose).apply(p);
                int axis = 0;
                double best = -std::numeric_limits<double>::infinity();
                for (int i = 0; i < 3; ++i) {
                    const double r = std::abs(local[i]) / v.half_extents[i];
                    if (r > best) {
                        best = r;
                        axis = i;
                    }
                }
                Vec3 n = Vec3::Zero();
                n[axis] = local[axis] >= 0.0 ? 1.0 : -1.0;
                return v.pose.apply_vector(n);
            } else {
                return v.normal;
            }
        },
        s);
}

} // namespace qdgrasp

#endif
