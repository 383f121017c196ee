#!/usr/bin/env python3
"""Regenerates the bundled robot, object, scene and config fixtures under data/."""
import json
import math
import os

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")
PI = math.pi


def rx(a):
    c, s = math.cos(a), math.sin(a)
    return [[1, 0, 0], [0, c, -s], [0, s, c]]


def rz(a):
    c, s = math.cos(a), math.sin(a)
    return [[c, -s, 0], [s, c, 0], [0, 0, 1]]


def matvec(a, v):
    return [sum(a[i][k] * v[k] for k in range(3)) for i in range(3)]


def clean(x):
    return 0.0 if abs(x) < 1e-15 else x


def tf(r, t):
    return [clean(r[0][0]), clean(r[0][1]), clean(r[0][2]), clean(t[0]),
            clean(r[1][0]), clean(r[1][1]), clean(r[1][2]), clean(t[1]),
            clean(r[2][0]), clean(r[2][1]), clean(r[2][2]), clean(t[2]),
            0.0, 0.0, 0.0, 1.0]


I3 = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def link_segment(end, radius):
    if math.hypot(*end) < 1e-9:
        return {"type": "sphere", "center": [0, 0, 0], "radius": radius}
    return {"type": "capsule", "p0": [0, 0, 0], "p1": [clean(v) for v in end], "radius": radius}


def parallel_gripper():
    """Two pads whose inner surfaces sit at |y| = aperture / 2 when open."""
    fingers = [
        {"name": "left", "shape": {"type": "capsule", "p0": [0, 0.07, 0], "p1": [0, 0.048, 0], "radius": 0.008},
         "closure_direction": [0, -1, 0]},
        {"name": "right", "shape": {"type": "capsule", "p0": [0, -0.07, 0], "p1": [0, -0.048, 0], "radius": 0.008},
         "closure_direction": [0, 1, 0]},
    ]
    return {"aperture": 0.08, "fingers": fingers, "synergies": {"parallel": [0, 1]}}


def desk4():
    joints = [
        {"name": "shoulder", "type": "revolute", "axis": [0, 0, 1], "origin": tf(I3, [0, 0, 0.4]),
         "limits": [-2.8, 2.8], "link_mass": 2.0},
        {"name": "elbow", "type": "revolute", "axis": [0, 0, 1], "origin": tf(I3, [0.25, 0, 0]),
         "limits": [-2.5, 2.5], "link_mass": 1.5},
        {"name": "quill", "type": "prismatic", "axis": [0, 0, -1], "origin": tf(I3, [0.2, 0, 0]),
         "limits": [0.0, 0.35], "link_mass": 0.5},
        {"name": "wrist", "type": "revolute", "axis": [0, 0, 1], "origin": tf(I3, [0, 0, 0]),
         "limits": [-2.8, 2.8], "link_mass": 0.3},
    ]
    links = [
        [{"type": "capsule", "p0": [0, 0, 0], "p1": [0, 0, 0.36], "radius": 0.05}],
        [{"type": "capsule", "p0": [0, 0, 0.03], "p1": [0.25, 0, 0.03], "radius": 0.03}],
        [{"type": "capsule", "p0": [0, 0, 0.03], "p1": [0.2, 0, 0.03], "radius": 0.025}],
        [{"type": "capsule", "p0": [0, 0, -0.02], "p1": [0, 0, 0.2], "radius": 0.012}],
        [{"type": "box", "half_extents": [0.015, 0.085, 0.01], "pose": tf(I3, [0, 0, -0.08])}],
    ]
    return {
        "format": "qdgrasp-robot", "version": 1, "id": "desk4",
        "base_pose": tf(I3, [0, 0, 0]),
        # tool frame: origin between the finger pads, approach along -z
        "ee_offset": tf(I3, [0, 0, -0.12]),
        "gravity": [0, 0, -9.81],
        "joints": joints, "links": links,
        "gripper": parallel_gripper(),
        "excluded_pairs": [], "table_exempt_links": [0],
        "home": [0.0, 0.6, 0.1, 0.0],
    }


def fr3_like():
    a = [0, 0, 0, 0.0825, -0.0825, 0, 0.088]
    d = [0.333, 0, 0.316, 0, 0.384, 0, 0]
    alpha = [0, -PI / 2, PI / 2, PI / 2, -PI / 2, PI / 2, PI / 2]
    lim = [[-2.8973, 2.8973], [-1.7628, 1.7628], [-2.8973, 2.8973], [-3.0718, -0.0698],
           [-2.8973, 2.8973], [-0.0175, 3.7525], [-2.8973, 2.8973]]
    mass = [4.97, 0.65, 3.23, 3.59, 1.23, 1.67, 0.74]
    joints, origins = [], []
    for i in range(7):
        r = rx(alpha[i])
        t = matvec(r, [0, 0, d[i]])
        t[0] += a[i]
        origins.append(t)
        joints.append({"name": f"fr3_joint{i + 1}", "type": "revolute", "axis": [0, 0, 1], "origin": tf(r, t),
                       "limits": lim[i], "link_mass": mass[i]})
    flange = 0.107
    ee_r = rz(-PI / 4)
    links = [[link_segment(origins[0], 0.07)]]
    for i in range(1, 7):
        links.append([link_segment(origins[i], 0.05)])
    links.append([link_segment([0, 0, flange - 0.02], 0.035)])
    # hand body in link 7, just behind the finger pads
    hand = {"type": "box", "half_extents": [0.02, 0.09, 0.03], "pose": tf(ee_r, [0, 0, flange + 0.1034 - 0.05])}
    links[-1].append(hand)
    excluded = [[l, l + 2] for l in range(0, 7)]
    return {
        "format": "qdgrasp-robot", "version": 1, "id": "fr3_like",
        "base_pose": tf(I3, [0, 0, 0]),
        "ee_offset": tf(ee_r, [0, 0, flange + 0.1034]),
        "gravity": [0, 0, -9.81],
        "joints": joints, "links": links,
        "gripper": parallel_gripper(),
        "excluded_pairs": excluded, "table_exempt_links": [0, 1],
        "home": [0.0, -PI / 4, 0.0, -3 * PI / 4, 0.0, PI / 2, PI / 4],
    }


def ur5_like():
    d = [0.089159, 0, 0, 0.10915, 0.09465, 0.0823]
    a = [0, -0.425, -0.39225, 0, 0, 0]
    alpha = [PI / 2, 0, 0, PI / 2, -PI / 2, 0]
    mass = [3.7, 8.393, 2.275, 1.219, 1.219, 0.1879]
    fixed = []
    for i in range(6):
        r = rx(alpha[i])
        t = [a[i], 0, d[i]]
        fixed.append((r, t))
    joints = []
    for i in range(6):
        r, t = (I3, [0, 0, 0]) if i == 0 else fixed[i - 1]
        joints.append({"name": f"ur5_joint{i + 1}", "type": "revolute", "axis": [0, 0, 1], "origin": tf(r, t),
                       "limits": [-2 * PI, 2 * PI], "link_mass": mass[i]})
    links = [[{"type": "capsule", "p0": [0, 0, 0.0], "p1": [0, 0, 0.06], "radius": 0.06}]]
    for i in range(6):
        links.append([link_segment(fixed[i][1], 0.05 if i < 3 else 0.04)])
    tool = 0.13
    r6, t6 = fixed[5]
    ee_t = [t6[0], t6[1], t6[2] + tool]
    links[-1] = [link_segment(ee_t[:2] + [ee_t[2] - 0.06], 0.04),
                 {"type": "box", "half_extents": [0.075, 0.05, 0.02], "pose": tf(I3, [0, 0, ee_t[2] - 0.045])}]
    fingers = [{"name": "thumb", "shape": {"type": "capsule", "p0": [0.0, -0.07, 0], "p1": [0.0, -0.048, 0], "radius": 0.008},
                "closure_direction": [0, 1, 0]}]
    for name, x in (("index", 0.045), ("middle", 0.015), ("ring", -0.015), ("pinky", -0.045)):
        fingers.append({"name": name, "shape": {"type": "capsule", "p0": [x, 0.07, 0], "p1": [x, 0.048, 0], "radius": 0.008},
                        "closure_direction": [0, -1, 0]})
    synergies = {"thumb_index": [0, 1], "thumb_mid": [0, 2], "thumb_index_mid": [0, 1, 2], "all_hand": [0, 1, 2, 3, 4]}
    excluded = [[l, l + 2] for l in range(0, 6)]
    return {
        "format": "qdgrasp-robot", "version": 1, "id": "ur5_like",
        "base_pose": tf(I3, [0, 0, 0]),
        "ee_offset": tf(I3, ee_t),
        "gravity": [0, 0, -9.81],
        "joints": joints, "links": links,
        "gripper": {"aperture": 0.08, "fingers": fingers, "synergies": synergies},
        "excluded_pairs": excluded, "table_exempt_links": [0, 1],
        "home": [0.0, -PI / 2, PI / 2, -PI / 2, -PI / 2, 0.0],
    }


def box_vertices(h, c=(0, 0, 0)):
    return [[c[0] + sx * h[0], c[1] + sy * h[1], c[2] + sz * h[2]]
            for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]


def sphere_vertices(r, n=12):
    out = []
    for i in range(n):
        for j in range(1, n // 2):
            th, ph = 2 * PI * i / n, PI * j / (n // 2)
            out.append([r * math.sin(ph) * math.cos(th), r * math.sin(ph) * math.sin(th), r * math.cos(ph)])
    out += [[0, 0, r], [0, 0, -r]]
    return [[round(v, 12) for v in p] for p in out]


def obj(id_, shapes, vertices):
    return {"format": "qdgrasp-object", "version": 1, "id": id_, "shapes": shapes, "vertices": vertices,
            "density": 1.5}


def objects():
    out = {}
    out["pinch_box"] = obj("pinch_box", [{"type": "box", "half_extents": [0.02, 0.02, 0.02]}],
                           box_vertices([0.02, 0.02, 0.02]))
    out["pudding_box"] = obj("pudding_box", [{"type": "box", "half_extents": [0.0175, 0.055, 0.0445]}],
                             box_vertices([0.0175, 0.055, 0.0445]))
    out["orange"] = obj("orange", [{"type": "sphere", "center": [0, 0, 0], "radius": 0.036}], sphere_vertices(0.036))
    out["mug"] = obj("mug", [
        {"type": "capsule", "p0": [0, 0, -0.01], "p1": [0, 0, 0.01], "radius": 0.04},
        {"type": "capsule", "p0": [0.045, 0, -0.02], "p1": [0.045, 0, 0.02], "radius": 0.01},
    ], box_vertices([0.04, 0.04, 0.05]) + box_vertices([0.01, 0.01, 0.03], (0.045, 0, 0)))
    out["power_drill"] = obj("power_drill", [
        {"type": "box", "half_extents": [0.09, 0.025, 0.03], "pose": tf(I3, [0.02, 0, 0.06])},
        {"type": "capsule", "p0": [-0.02, 0, -0.07], "p1": [-0.02, 0, 0.02], "radius": 0.02},
        {"type": "box", "half_extents": [0.04, 0.03, 0.015], "pose": tf(I3, [-0.02, 0, -0.08])},
    ], box_vertices([0.09, 0.025, 0.03], (0.02, 0, 0.06)) + box_vertices([0.02, 0.02, 0.045], (-0.02, 0, -0.025))
       + box_vertices([0.04, 0.03, 0.015], (-0.02, 0, -0.08)))
    out["spatula"] = obj("spatula", [
        {"type": "box", "half_extents": [0.09, 0.01, 0.008], "pose": tf(I3, [-0.05, 0, 0])},
        {"type": "box", "half_extents": [0.045, 0.035, 0.004], "pose": tf(I3, [0.085, 0, -0.004])},
    ], box_vertices([0.09, 0.01, 0.008], (-0.05, 0, 0)) + box_vertices([0.045, 0.035, 0.004], (0.085, 0, -0.004)))
    return out


RESTING_Z = {"pinch_box": 0.02, "pudding_box": 0.0445, "orange": 0.036, "mug": 0.05, "power_drill": 0.095,
             "spatula": 0.008}


def scene(target, x, y, extras=()):
    objs = [{"file": f"../objects/{target}.json", "pose": {"xyz": [x, y, RESTING_Z[target]]}}]
    for name, ex, ey in extras:
        objs.append({"file": f"../objects/{name}.json", "pose": {"xyz": [ex, ey, RESTING_Z[name]]}})
    return {"format": "qdgrasp-scene", "version": 1, "table": {"normal": [0, 0, 1], "offset": 0.0},
            "objects": objs, "target": target,
            "camera_pose": {"xyz": [x + 0.5, y, 0.6], "rpy": [0, 2.3, PI]},
            "object_sim_pose": {"xyz": [x, y, RESTING_Z[target]]}}


def config(robot, scene_file, object_center, half, z_range, yaw_only, budget, grid, k=3, n=32, noise_samples=8,
           synergies=("parallel",)):
    lo = [object_center[0] - half, object_center[1] - half, z_range[0]]
    hi = [object_center[0] + half, object_center[1] + half, z_range[1]]
    if yaw_only:
        rlo, rhi = [0, 0, -PI / 2], [0, 0, PI / 2]
    else:
        rlo, rhi = [PI - 0.4, -0.4, -PI / 2], [PI + 0.4, 0.4, PI / 2]
    return {
        "format": "qdgrasp-config", "version": 1,
        "robot": f"../robots/{robot}.json", "scene": f"../scenes/{scene_file}.json",
        "seed": 7,
        "trajectory": {"waypoints": n, "control_points": k},
        "genome_bounds": {"position_min": lo, "position_max": hi, "euler_min": rlo, "euler_max": rhi,
                          "close_fraction": [0.5, 0.85], "synergies": list(synergies)},
        "mutation": {"sigma_pos": 0.02, "sigma_rot": 0.1, "gene_probability": 0.3, "sigma_close": 0.05,
                     "synergy_flip": 0.05},
        "qd": {"budget": budget, "batch_size": 32, "grid": grid, "grid_margin": 0.02, "success_gate": True},
        "noise": {"samples": noise_samples, "object_sigma_pos": 0.005, "object_sigma_rot": 0.02,
                  "joint_sigma": 0.005},
        "quality": {"touch_window": "end_of_grasp"},
        "grid_eval": {"divisions": [10, 10, 1], "orientations": "default", "trajectories_per_pose": 5},
        "progress_interval": 500,
    }


def dump(path, doc):
    full = os.path.join(ROOT, path)
    os.makedirs(os.path.dirname(full), exist_ok=True)
    with open(full, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def main():
    dump("robots/desk4.json", desk4())
    dump("robots/fr3_like.json", fr3_like())
    dump("robots/ur5_like.json", ur5_like())
    for name, doc in objects().items():
        dump(f"objects/{name}.json", doc)
    dump("scenes/pinch_box.json", scene("pinch_box", 0.3, 0.0))
    for name in ("pudding_box", "power_drill", "mug", "orange", "spatula"):
        dump(f"scenes/{name}.json", scene(name, 0.5, 0.0))
    dump("scenes/cluttered_mug.json", scene("mug", 0.5, 0.0, extras=[("orange", 0.5, 0.14)]))
    dump("configs/pinch_box.json", config("desk4", "pinch_box", [0.3, 0.0], 0.03, [0.005, 0.06], True, 2000, [10, 10, 10]))
    for name in ("pudding_box", "mug", "orange"):
        dump(f"configs/{name}_fr3.json", config("fr3_like", name, [0.5, 0.0], 0.05, [0.01, 0.2], False, 2000, [10, 10, 10]))
    dump("configs/mug_ur5.json", config("ur5_like", "mug", [0.5, 0.0], 0.05, [0.01, 0.2], False, 2000, [10, 10, 10],
                                        synergies=("thumb_index", "thumb_mid", "thumb_index_mid", "all_hand")))


if __name__ == "__main__":
    main()
