"""Regenerate the shipped scenario fixtures in ``scenarios/``.

Link parameters are representative of an adult-sized biped and a
lower-limb exoskeleton; they are not measured data.
"""

import json
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

from fwpkit.dynamics import forward_kinematics
from fwpkit.scenario import scenario_from_dict

OUT = Path(__file__).resolve().parent.parent / "scenarios"


def _foot_positions(data, q):
    sc = scenario_from_dict({**data, "state": {"q": list(q), "v": [0.0] * len(data["state"]["v"])}})
    kin = forward_kinematics(sc.model, sc.state.q)
    out = {}
    for name, cp in sc.model.contact_points.items():
        out[name] = kin.p[cp.body] + kin.R[cp.body] @ cp.position
    return out


def planar_biped():
    bodies = [
        {"name": "torso", "mass": 30.0, "com": [0.0, 0.25], "inertia": 1.6},
    ]
    joints, actuated, contacts = [], [], []
    limits = {"hip": 120.0, "knee": 90.0}
    for side in ("l", "r"):
        bodies += [
            {"name": f"thigh_{side}", "mass": 7.0, "com": [0.0, -0.2], "inertia": 0.12},
            {"name": f"shank_{side}", "mass": 3.5, "com": [0.0, -0.18], "inertia": 0.05},
        ]
        joints += [
            {"name": f"hip_{side}", "parent": "torso", "child": f"thigh_{side}",
             "type": "revolute", "origin": [0.0, 0.0]},
            {"name": f"knee_{side}", "parent": f"thigh_{side}", "child": f"shank_{side}",
             "type": "revolute", "origin": [0.0, -0.42]},
        ]
        actuated += [
            {"joint": f"hip_{side}", "lower": -limits["hip"], "upper": limits["hip"]},
            {"joint": f"knee_{side}", "lower": -limits["knee"], "upper": limits["knee"]},
        ]
        contacts.append({"name": f"foot_{side}", "body": f"shank_{side}", "position": [0.0, -0.42]})
    data = {
        "schema_version": 1,
        "units": "SI",
        "name": "planar biped, right foot on a 15 cm step",
        "model": {"base_type": "planar3", "bodies": bodies, "joints": joints,
                  "actuated": actuated, "contact_points": contacts},
        "state": {"q": [0.0] * 7, "v": [0.0] * 7},
        "gravity": [0.0, -9.81],
        "contacts": [
            {"name": "foot_l", "normal": [0.0, 1.0], "mu": 0.6},
            {"name": "foot_r", "normal": [0.0, 1.0], "mu": 0.6},
        ],
        "options": {"naive": True},
    }
    target = {"foot_l": np.array([-0.18, 0.0]), "foot_r": np.array([0.22, 0.15])}
    hip_height = 0.74

    def resid(qj):
        q = np.concatenate([[0.0, hip_height, 0.0], qj])
        pos = _foot_positions(data, q)
        return np.concatenate([pos[k][[0, 2]] - target[k] for k in target])

    # knees bent forward: thigh swings forward (ccw), shank back
    sol = least_squares(resid, [0.3, -0.6, 0.6, -1.0], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    assert np.abs(sol.fun).max() < 1e-12, sol.fun
    q = np.concatenate([[0.0, hip_height, 0.0], sol.x])
    data["state"]["q"] = [float(x) for x in q]
    data["contacts"][1]["origin"] = [float(v) for v in target["foot_r"]]
    data["contacts"][0]["origin"] = [float(v) for v in target["foot_l"]]
    return data


def single_contact():
    return {
        "schema_version": 1,
        "units": "SI",
        "name": "free planar body resting on one point under its CoM",
        "model": {
            "base_type": "planar3",
            "bodies": [{"name": "body", "mass": 10.0, "com": [0.0, 0.0], "inertia": 0.4}],
            "joints": [],
            "actuated": [],
            "contact_points": [{"name": "point", "body": "body", "position": [0.0, 0.0]}],
        },
        "state": {"q": [0.0, 0.0, 0.0], "v": [0.0, 0.0, 0.0]},
        "gravity": [0.0, -9.81],
        "contacts": [{"name": "point", "normal": [0.0, 1.0], "mu": 0.5}],
    }


def exoskeleton(stance="single", passive=()):
    """Exoskeleton-like tree; ``stance`` is "single" (left foot) or "double"."""

    def diag(*d):
        return np.diag(d).tolist()

    bodies = [{"name": "pelvis", "mass": 42.0, "com": [0.0, 0.0, 0.12],
               "inertia": diag(1.4, 1.1, 0.7)}]
    joints, actuated, contacts = [], [], []
    limits = {"hip_abd": 80.0, "hip_flex": 100.0, "knee": 100.0, "ankle": 60.0}
    for side, y in (("l", 0.11), ("r", -0.11)):
        bodies += [
            {"name": f"hipframe_{side}", "mass": 1.2, "com": [0.0, 0.0, 0.0],
             "inertia": diag(0.004, 0.004, 0.004)},
            {"name": f"thigh_{side}", "mass": 9.0, "com": [0.0, 0.0, -0.19],
             "inertia": diag(0.15, 0.15, 0.03)},
            {"name": f"shank_{side}", "mass": 4.5, "com": [0.0, 0.0, -0.18],
             "inertia": diag(0.07, 0.07, 0.01)},
            {"name": f"foot_{side}", "mass": 1.4, "com": [0.05, 0.0, -0.04],
             "inertia": diag(0.003, 0.012, 0.012)},
        ]
        joints += [
            {"name": f"hip_abd_{side}", "parent": "pelvis", "child": f"hipframe_{side}",
             "type": "revolute", "origin": [0.0, y, 0.0], "axis": [1.0, 0.0, 0.0]},
            {"name": f"hip_flex_{side}", "parent": f"hipframe_{side}", "child": f"thigh_{side}",
             "type": "revolute", "origin": [0.0, 0.0, 0.0], "axis": [0.0, 1.0, 0.0]},
            {"name": f"knee_{side}", "parent": f"thigh_{side}", "child": f"shank_{side}",
             "type": "revolute", "origin": [0.0, 0.0, -0.42], "axis": [0.0, 1.0, 0.0]},
            {"name": f"ankle_{side}", "parent": f"shank_{side}", "child": f"foot_{side}",
             "type": "revolute", "origin": [0.0, 0.0, -0.41], "axis": [0.0, 1.0, 0.0]},
        ]
        for j in ("hip_abd", "hip_flex", "knee", "ankle"):
            name = f"{j}_{side}"
            if name not in passive:
                actuated.append({"joint": name, "lower": -limits[j], "upper": limits[j]})
        contacts += [
            {"name": f"heel_{side}", "body": f"foot_{side}", "position": [-0.05, 0.0, -0.08]},
            {"name": f"toe_{side}", "body": f"foot_{side}", "position": [0.17, 0.0, -0.08]},
        ]
    # abduction, hip flexion, knee, ankle; hip + knee + ankle = 0 keeps each sole level
    if stance == "single":
        qj = [0.06, 0.35, -0.6, 0.25, -0.05, 0.55, -0.95, 0.3]
        active = ("heel_l", "toe_l")
    else:
        qj = [0.06, 0.35, -0.6, 0.25, -0.04, 0.1, -0.3, 0.2]
        active = ("heel_l", "toe_l", "heel_r", "toe_r")
    label = "single stance on the left foot" if stance == "single" else "double stance"
    if passive:
        label += ", passive " + ", ".join(passive)
    data = {
        "schema_version": 1,
        "units": "SI",
        "name": f"lower-limb exoskeleton, {label}",
        "model": {"base_type": "spatial6", "bodies": bodies, "joints": joints,
                  "actuated": actuated, "contact_points": contacts},
        "state": {"q": [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0] + qj, "v": [0.0] * 14},
        "gravity": [0.0, 0.0, -9.81],
        "contacts": [{"name": "heel_l", "normal": [0.0, 0.0, 1.0], "mu": 0.7}],
    }
    pos = _foot_positions(data, data["state"]["q"])
    data["state"]["q"][2] = float(-pos["heel_l"][2])
    pos = _foot_positions(data, data["state"]["q"])
    data["contacts"] = []
    for n in active:
        data["contacts"].append({
            "name": n,
            "normal": [0.0, 0.0, 1.0],
            "tangents": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            "origin": [round(float(c), 12) for c in pos[n]],
            "mu": 0.7,
        })
    return data


def main():
    OUT.mkdir(exist_ok=True)
    fixtures = {
        "planar_biped_step.json": planar_biped(),
        "single_contact_statics.json": single_contact(),
        "exoskeleton_single_stance.json": exoskeleton("single"),
        "exoskeleton_single_stance_passive_ankle.json": exoskeleton("single", ("ankle_l",)),
    }
    for name, data in fixtures.items():
        (OUT / name).write_text(json.dumps(data, indent=2) + "\n")
        print("wrote", OUT / name)


if __name__ == "__main__":
    main()
