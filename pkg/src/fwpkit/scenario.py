"""Scenario files: robot model, state, active contacts and options (JSON, SI units).

Planar models give positions as ``[x, z]``, fixed joint rotations as an
``angle`` (counter-clockwise in the x-z plane) and inertias as scalars.
Spatial models give ``[x, y, z]`` positions, ``rpy`` angles (rad) and 3x3
inertias. Spatial states store the base quaternion as ``[w, x, y, z]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np
from scipy.spatial.transform import Rotation

from .contact import ActiveContact
from .dynamics import (
    PLANAR,
    SPATIAL,
    Body,
    ContactFrame,
    ContactPoint,
    Joint,
    RobotModel,
    RobotState,
    embed_planar_point,
    planar_rotation,
)
from .fwp import FwpOptions

SCHEMA_VERSION = 1

_num = {"type": "number"}
_vec = {"type": "array", "items": _num}

SCHEMA = {
    "type": "object",
    "required": ["schema_version", "model", "state", "contacts"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "units": {"const": "SI"},
        "name": {"type": "string"},
        "model": {
            "type": "object",
            "required": ["base_type", "bodies", "joints", "actuated", "contact_points"],
            "properties": {
                "base_type": {"enum": [PLANAR, SPATIAL]},
                "bodies": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["name", "mass", "com", "inertia"],
                        "properties": {
                            "name": {"type": "string"},
                            "mass": {"type": "number", "exclusiveMinimum": 0},
                            "com": _vec,
                            "inertia": {"anyOf": [_num, {"type": "array"}]},
                        },
                    },
                },
                "joints": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["name", "parent", "child", "type"],
                        "properties": {
                            "name": {"type": "string"},
                            "parent": {"type": "string"},
                            "child": {"type": "string"},
                            "type": {"enum": ["revolute", "prismatic"]},
                            "axis": {"anyOf": [_num, _vec]},
                            "origin": _vec,
                            "angle": _num,
                            "rpy": _vec,
                        },
                    },
                },
                "actuated": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["joint", "lower", "upper"],
                        "properties": {"joint": {"type": "string"}, "lower": _num, "upper": _num},
                    },
                },
                "contact_points": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["name", "body", "position"],
                        "properties": {
                            "name": {"type": "string"},
                            "body": {"type": "string"},
                            "position": _vec,
                        },
                    },
                },
            },
        },
        "state": {
            "type": "object",
            "required": ["q", "v"],
            "properties": {"q": _vec, "v": _vec},
        },
        "gravity": _vec,
        "contacts": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "normal", "mu"],
                "properties": {
                    "name": {"type": "string"},
                    "normal": _vec,
                    "tangents": {"type": "array", "items": _vec},
                    "origin": _vec,
                    "mu": {"type": "number", "minimum": 0},
                },
            },
        },
        "options": {
            "type": "object",
            "properties": {
                "f_max": {"type": ["number", "null"]},
                "subsets": {
                    "anyOf": [
                        {"const": "all"},
                        {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
                    ]
                },
                "naive": {"type": "boolean"},
                "tolerances": {
                    "type": "object",
                    "properties": {"established": _num, "hull": _num},
                },
            },
        },
    },
}


class ScenarioError(ValueError):
    """Schema or consistency violation; ``path`` locates the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass
class Scenario:
    model: RobotModel
    state: RobotState
    contacts: list
    gravity: np.ndarray
    options: FwpOptions
    name: str = ""


def _rotation_from_rpy(rpy):
    return Rotation.from_euler("xyz", rpy).as_matrix()


def _model(m) -> RobotModel:
    base_type = m["base_type"]
    planar = base_type == PLANAR
    bodies = []
    for i, b in enumerate(m["bodies"]):
        path = f"model.bodies[{i}]"
        if planar:
            _need_len(b["com"], 2, path + ".com")
            if not isinstance(b["inertia"], (int, float)):
                raise ScenarioError("planar inertia must be a scalar", path + ".inertia")
            com_ = embed_planar_point(b["com"])
            inertia = np.eye(3) * float(b["inertia"])
        else:
            _need_len(b["com"], 3, path + ".com")
            com_ = np.asarray(b["com"], dtype=float)
            inertia = np.asarray(b["inertia"], dtype=float)
            if inertia.shape != (3, 3):
                raise ScenarioError("spatial inertia must be 3x3", path + ".inertia")
        bodies.append(Body(b["name"], float(b["mass"]), com_, inertia))
    joints = []
    for i, j in enumerate(m["joints"]):
        path = f"model.joints[{i}]"
        if planar:
            origin = embed_planar_point(j.get("origin", [0.0, 0.0]))
            rot = planar_rotation(j.get("angle", 0.0))
            if j["type"] == "revolute":
                sign = float(j.get("axis", 1.0))
                axis = np.array([0.0, -1.0, 0.0]) * np.sign(sign)
            else:
                if "axis" not in j:
                    raise ScenarioError("prismatic joint needs an axis", path + ".axis")
                _need_len(j["axis"], 2, path + ".axis")
                axis = embed_planar_point(j["axis"])
        else:
            origin = np.asarray(j.get("origin", [0.0, 0.0, 0.0]), dtype=float)
            rot = _rotation_from_rpy(j.get("rpy", [0.0, 0.0, 0.0]))
            if "axis" not in j:
                raise ScenarioError("spatial joint needs an axis", path + ".axis")
            _need_len(j["axis"], 3, path + ".axis")
            axis = np.asarray(j["axis"], dtype=float)
        n = np.linalg.norm(axis)
        if n == 0:
            raise ScenarioError("joint axis must be nonzero", path + ".axis")
        joints.append(Joint(j["name"], j["parent"], j["child"], j["type"], axis / n, origin, rot))
    actuated = {a["joint"]: (float(a["lower"]), float(a["upper"])) for a in m["actuated"]}
    cps = []
    for i, c in enumerate(m["contact_points"]):
        path = f"model.contact_points[{i}].position"
        _need_len(c["position"], 2 if planar else 3, path)
        pos = embed_planar_point(c["position"]) if planar else np.asarray(c["position"], float)
        cps.append(ContactPoint(c["name"], c["body"], pos))
    try:
        return RobotModel(base_type, bodies, joints, actuated, cps)
    except ValueError as exc:
        raise ScenarioError(str(exc), "model") from None


def _need_len(v, n, path):
    if len(v) != n:
        raise ScenarioError(f"expected {n} components, got {len(v)}", path)


def scenario_from_dict(data: dict) -> Scenario:
    """Validate and build a :class:`Scenario`; raises :class:`ScenarioError`."""
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path)
        raise ScenarioError(exc.message, path) from None
    model = _model(data["model"])
    planar = model.planar
    q = np.asarray(data["state"]["q"], dtype=float)
    v = np.asarray(data["state"]["v"], dtype=float)
    if q.shape[0] != model.n_q:
        raise ScenarioError(f"expected {model.n_q} components, got {q.shape[0]}", "state.q")
    if v.shape[0] != model.n_v:
        raise ScenarioError(f"expected {model.n_v} components, got {v.shape[0]}", "state.v")
    if not planar and abs(np.linalg.norm(q[3:7]) - 1.0) > 1e-9:
        raise ScenarioError("base quaternion must be normalized", "state.q")
    g = data.get("gravity", [0.0, -9.81] if planar else [0.0, 0.0, -9.81])
    _need_len(g, 2 if planar else 3, "gravity")

    contacts = []
    for i, c in enumerate(data["contacts"]):
        path = f"contacts[{i}]"
        if c["name"] not in model.contact_points:
            raise ScenarioError(f"unknown contact point {c['name']!r}", path + ".name")
        try:
            if planar:
                _need_len(c["normal"], 2, path + ".normal")
                tan = c.get("tangents")
                frame = ContactFrame.planar(c["normal"], tan[0] if tan else None, c.get("origin"))
            else:
                _need_len(c["normal"], 3, path + ".normal")
                frame = ContactFrame.spatial(c["normal"], c.get("tangents"), c.get("origin"))
        except ValueError as exc:
            raise ScenarioError(str(exc), path) from None
        contacts.append(ActiveContact(c["name"], frame, float(c["mu"])))
    names = [c.name for c in contacts]
    if len(set(names)) != len(names):
        raise ScenarioError("duplicate active contact", "contacts")

    opts = data.get("options", {})
    subsets = opts.get("subsets", "all")
    tols = opts.get("tolerances", {})
    options = FwpOptions(
        f_max=opts.get("f_max"),
        subsets=None if subsets == "all" else tuple(tuple(s) for s in subsets),
        naive=bool(opts.get("naive", False)),
        tau_est=float(tols.get("established", 1e-6)),
        tau_hull=float(tols.get("hull", 1e-7)),
    )
    for s in options.subsets or ():
        for n in s:
            if n not in names:
                raise ScenarioError(f"unknown contact {n!r} in subset", "options.subsets")
    return Scenario(model, RobotState(q, v), contacts, np.asarray(g, float), options,
                    data.get("name", ""))


def load_scenario(path) -> Scenario:
    """Read a scenario file. JSON syntax errors surface as :class:`ScenarioError`."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from None
    return scenario_from_dict(data)
