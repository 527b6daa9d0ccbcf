"""Floating-base rigid-body dynamics for planar and spatial trees.

All spatial quantities are expressed in world-aligned Plücker coordinates
about the world origin, ordered (angular, linear). Planar models are
embedded in 3-D: the plane is x-z and planar rotations are counter-clockwise
in that plane, i.e. about the world -y axis.

Generalized velocities:

* ``planar3``:  ``v = (xdot, zdot, thetadot, qdot_joints)``, ``q = (x, z, theta, q_joints)``
* ``spatial6``: ``v = (pdot, omega, qdot_joints)`` with ``pdot`` and ``omega``
  world-aligned, ``q = (p, quat_wxyz, q_joints)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial.transform import Rotation

PLANAR = "planar3"
SPATIAL = "spatial6"
QUAT_TOL = 1e-9

# axis of planar rotations in the embedding
PLANAR_AXIS = np.array([0.0, -1.0, 0.0])


def skew(a):
    return np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])


def crm(V):
    """Motion cross-product matrix ``V x``."""
    w, v = V[:3], V[3:]
    out = np.zeros((6, 6))
    out[:3, :3] = skew(w)
    out[3:, :3] = skew(v)
    out[3:, 3:] = skew(w)
    return out


def crf(V):
    """Force cross-product matrix ``V x*``."""
    return -crm(V).T


def planar_rotation(theta):
    """Rotation by ``theta`` counter-clockwise in the x-z plane."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def embed_planar_point(xz):
    xz = np.asarray(xz, dtype=float)
    return np.array([xz[0], 0.0, xz[1]])


def spatial_inertia(mass, com_world, inertia_world):
    """World spatial inertia of a body with CoM at ``com_world``."""
    cx = skew(com_world)
    out = np.zeros((6, 6))
    out[:3, :3] = inertia_world + mass * cx @ cx.T
    out[:3, 3:] = mass * cx
    out[3:, :3] = mass * cx.T
    out[3:, 3:] = mass * np.eye(3)
    return out


@dataclass(frozen=True)
class Body:
    name: str
    mass: float
    com: np.ndarray  # body frame
    inertia: np.ndarray  # 3x3 about the CoM, body frame


@dataclass(frozen=True)
class Joint:
    name: str
    parent: str
    child: str
    type: str  # "revolute" | "prismatic"
    axis: np.ndarray  # unit, joint frame
    origin: np.ndarray  # translation parent -> joint frame
    rotation: np.ndarray  # rotation parent -> joint frame


@dataclass(frozen=True)
class ContactPoint:
    name: str
    body: str
    position: np.ndarray  # body frame


@dataclass(frozen=True)
class ContactFrame:
    """Environment frame of a contact: tangent axes then the normal.

    ``axes`` holds unit world directions as columns, shape (3, t) with
    t = 2 (planar: tangent, normal) or 3 (spatial: T1, T2, normal).
    ``origin`` is optional; when given, the contact point must lie on the
    environment surface through it.
    """

    axes: np.ndarray
    origin: np.ndarray | None = None

    @property
    def t(self) -> int:
        return self.axes.shape[1]

    @property
    def normal(self) -> np.ndarray:
        return self.axes[:, -1]

    @classmethod
    def planar(cls, normal, tangent=None, origin=None) -> "ContactFrame":
        n = np.asarray(normal, dtype=float)
        n = n / np.linalg.norm(n)
        if tangent is None:
            tangent = np.array([n[1], -n[0]])
        t = np.asarray(tangent, dtype=float)
        t = t / np.linalg.norm(t)
        R2 = np.column_stack([t, n])
        if abs(R2[:, 0] @ R2[:, 1]) > 1e-9 or np.linalg.det(R2) < 0:
            raise ValueError("planar contact frame must be orthonormal and right-handed")
        axes = np.column_stack([embed_planar_point(t), embed_planar_point(n)])
        o = None if origin is None else embed_planar_point(origin)
        return cls(axes, o)

    @classmethod
    def spatial(cls, normal, tangents=None, origin=None) -> "ContactFrame":
        n = np.asarray(normal, dtype=float)
        n = n / np.linalg.norm(n)
        if tangents is None:
            helper = np.eye(3)[int(np.argmin(np.abs(n)))]
            t1 = np.cross(helper, n)
            t1 /= np.linalg.norm(t1)
            t2 = np.cross(n, t1)
        else:
            t1, t2 = (np.asarray(t, dtype=float) for t in tangents)
            t1 = t1 / np.linalg.norm(t1)
            t2 = t2 / np.linalg.norm(t2)
        R = np.column_stack([t1, t2, n])
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-9) or np.linalg.det(R) < 0:
            raise ValueError("spatial contact frame must be orthonormal and right-handed")
        o = None if origin is None else np.asarray(origin, dtype=float)
        return cls(R, o)


class RobotModel:
    """Floating-base kinematic tree.

    Parameters
    ----------
    base_type : {"planar3", "spatial6"}
    bodies : sequence of Body
    joints : sequence of Joint
        One degree of freedom each; generalized-velocity index of joint ``j``
        is ``n_base + j`` in list order.
    actuated : mapping joint name -> (lower, upper)
        Actuation limits with ``lower < 0 < upper``. Order defines ``u``.
    contact_points : sequence of ContactPoint
    """

    def __init__(self, base_type, bodies, joints, actuated, contact_points):
        if base_type not in (PLANAR, SPATIAL):
            raise ValueError(f"unknown base_type {base_type!r}")
        self.base_type = base_type
        self.bodies = list(bodies)
        self.joints = list(joints)
        self.actuated = dict(actuated)
        self.contact_points = {c.name: c for c in contact_points}
        self._validate()

        self.body_index = {b.name: i for i, b in enumerate(self.bodies)}
        children = {j.child for j in self.joints}
        roots = [b.name for b in self.bodies if b.name not in children]
        self.root = roots[0]
        self.n_base = 3 if base_type == PLANAR else 6
        self.n_v = self.n_base + len(self.joints)
        self.n_q = self.n_v + (1 if base_type == SPATIAL else 0)
        self.joint_dof = {j.name: self.n_base + i for i, j in enumerate(self.joints)}
        self.parent_joint = {j.child: j for j in self.joints}
        self.order = self._topological_order()
        # dofs influencing each body
        self.support = {}
        for name in self.order:
            mask = np.zeros(self.n_v, dtype=bool)
            if name == self.root:
                mask[: self.n_base] = True
            else:
                j = self.parent_joint[name]
                mask |= self.support[j.parent]
                mask[self.joint_dof[j.name]] = True
            self.support[name] = mask

    @property
    def planar(self) -> bool:
        return self.base_type == PLANAR

    @property
    def t(self) -> int:
        """Force components per contact."""
        return 2 if self.planar else 3

    @property
    def n_a(self) -> int:
        return len(self.actuated)

    @property
    def total_mass(self) -> float:
        return float(sum(b.mass for b in self.bodies))

    def _validate(self):
        names = [b.name for b in self.bodies]
        if len(set(names)) != len(names):
            raise ValueError("duplicate body names")
        for b in self.bodies:
            if not b.mass > 0:
                raise ValueError(f"body {b.name!r}: mass must be positive")
            I = np.asarray(b.inertia)
            if not np.allclose(I, I.T, atol=1e-12):
                raise ValueError(f"body {b.name!r}: inertia must be symmetric")
            if np.linalg.eigvalsh(I).min() <= 0:
                raise ValueError(f"body {b.name!r}: inertia must be positive definite")
        children = [j.child for j in self.joints]
        if len(set(children)) != len(children):
            raise ValueError("a body is the child of more than one joint")
        for j in self.joints:
            if j.parent not in names or j.child not in names:
                raise ValueError(f"joint {j.name!r} references an unknown body")
            if j.type not in ("revolute", "prismatic"):
                raise ValueError(f"joint {j.name!r}: unsupported type {j.type!r}")
        roots = [n for n in names if n not in set(children)]
        if len(roots) != 1:
            raise ValueError(f"kinematic tree needs exactly one root, found {roots}")
        jnames = {j.name for j in self.joints}
        for name, (lo, hi) in self.actuated.items():
            if name not in jnames:
                raise ValueError(f"actuated joint {name!r} does not exist")
            if not lo < 0 < hi:
                raise ValueError(f"actuation limits of {name!r} must satisfy lower < 0 < upper")
        for c in self.contact_points.values():
            if c.body not in names:
                raise ValueError(f"contact {c.name!r} references unknown body {c.body!r}")

    def _topological_order(self):
        order = [self.root]
        kids = {}
        for j in self.joints:
            kids.setdefault(j.parent, []).append(j.child)
        i = 0
        while i < len(order):
            order.extend(kids.get(order[i], []))
            i += 1
        if len(order) != len(self.bodies):
            raise ValueError("kinematic tree contains a cycle or a disconnected body")
        return order

    def actuation_matrix(self) -> np.ndarray:
        """``S_a``: maps ``u`` to generalized forces (n_v x n_a)."""
        S = np.zeros((self.n_v, self.n_a))
        for r, name in enumerate(self.actuated):
            S[self.joint_dof[name], r] = 1.0
        return S

    def actuation_limits(self):
        lo = np.array([self.actuated[n][0] for n in self.actuated], dtype=float)
        hi = np.array([self.actuated[n][1] for n in self.actuated], dtype=float)
        return lo, hi

    def with_passive(self, *joint_names) -> "RobotModel":
        """Copy of the model with the named joints no longer actuated."""
        act = {k: v for k, v in self.actuated.items() if k not in joint_names}
        return RobotModel(self.base_type, self.bodies, self.joints, act, self.contact_points.values())

    def neutral_configuration(self) -> np.ndarray:
        q = np.zeros(self.n_q)
        if not self.planar:
            q[3] = 1.0
        return q


class RobotState(NamedTuple):
    q: np.ndarray
    v: np.ndarray


# ---------------------------------------------------------------------------
# Kinematics


@dataclass
class Kinematics:
    """Per-configuration kinematic quantities (world frame)."""

    R: dict
    p: dict
    S: np.ndarray  # (6, n_v) motion subspace columns
    com: dict  # body CoM positions
    inertia6: dict  # world spatial inertias
    base_position: np.ndarray = field(default=None)


def _check_state(model, q, v=None):
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != model.n_q:
        raise ValueError(f"q has size {q.shape[0]}, expected {model.n_q}")
    if not model.planar:
        nq = np.linalg.norm(q[3:7])
        if abs(nq - 1.0) > QUAT_TOL:
            raise ValueError(f"base quaternion not normalized (norm {nq!r})")
    if v is not None:
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape[0] != model.n_v:
            raise ValueError(f"v has size {v.shape[0]}, expected {model.n_v}")
    return q, v


def _base_pose(model, q):
    if model.planar:
        return embed_planar_point(q[:2]), planar_rotation(q[2])
    w, x, y, z = q[3:7]
    return q[:3].copy(), Rotation.from_quat([x, y, z, w]).as_matrix()


def joint_positions(model, q) -> np.ndarray:
    return np.asarray(q)[model.n_q - len(model.joints):]


def forward_kinematics(model: RobotModel, q) -> Kinematics:
    q, _ = _check_state(model, q)
    qj = joint_positions(model, q)
    p0, R0 = _base_pose(model, q)
    R, p = {model.root: R0}, {model.root: p0}
    S = np.zeros((6, model.n_v))
    if model.planar:
        S[3:, 0] = [1.0, 0.0, 0.0]
        S[3:, 1] = [0.0, 0.0, 1.0]
        S[:3, 2] = PLANAR_AXIS
        S[3:, 2] = np.cross(p0, PLANAR_AXIS)
    else:
        S[3:, :3] = np.eye(3)
        S[:3, 3:6] = np.eye(3)
        S[3:, 3:6] = skew(p0)
    for name in model.order[1:]:
        j = model.parent_joint[name]
        i = model.joint_dof[j.name]
        Rj = R[j.parent] @ j.rotation
        pj = p[j.parent] + R[j.parent] @ j.origin
        a = Rj @ j.axis
        qi = qj[i - model.n_base]
        if j.type == "revolute":
            R[name] = Rj @ Rotation.from_rotvec(j.axis * qi).as_matrix()
            p[name] = pj
            S[:3, i] = a
            S[3:, i] = np.cross(pj, a)
        else:
            R[name] = Rj
            p[name] = pj + a * qi
            S[3:, i] = a
    com, inertia6 = {}, {}
    for b in model.bodies:
        c = p[b.name] + R[b.name] @ b.com
        com[b.name] = c
        Iw = R[b.name] @ b.inertia @ R[b.name].T
        inertia6[b.name] = spatial_inertia(b.mass, c, Iw)
    return Kinematics(R, p, S, com, inertia6, p0)


def body_jacobian(model, kin, body) -> np.ndarray:
    """World spatial Jacobian (6 x n_v) of ``body``."""
    return kin.S * model.support[body][None, :]


def _propagate(model, kin, v, vdot, a_root):
    """Body spatial velocities and accelerations by forward recursion."""
    Vb, Ab = {}, {}
    nb = model.n_base
    Sb = kin.S[:, :nb]
    V0 = Sb @ v[:nb]
    pdot = V0[3:] + np.cross(V0[:3], kin.base_position)  # base-origin velocity
    bias0 = np.concatenate([np.zeros(3), np.cross(pdot, V0[:3])])
    Vb[model.root] = V0
    Ab[model.root] = a_root + Sb @ vdot[:nb] + bias0
    for name in model.order[1:]:
        j = model.parent_joint[name]
        i = model.joint_dof[j.name]
        s = kin.S[:, i]
        Vb[name] = Vb[j.parent] + s * v[i]
        Ab[name] = Ab[j.parent] + crm(Vb[name]) @ s * v[i] + s * vdot[i]
    return Vb, Ab


def _gravity6(model, gravity):
    g = np.asarray(gravity, dtype=float).reshape(-1)
    if model.planar:
        if g.shape[0] == 2:
            g = embed_planar_point(g)
    if g.shape[0] != 3:
        raise ValueError("gravity must be a 3-vector (or a 2-vector for planar models)")
    return np.concatenate([np.zeros(3), -g])


def inverse_dynamics(model: RobotModel, q, v, vdot, gravity) -> np.ndarray:
    """``M vdot + h`` by recursive Newton-Euler."""
    q, v = _check_state(model, q, v)
    vdot = np.asarray(vdot, dtype=float).reshape(-1)
    kin = forward_kinematics(model, q)
    Vb, Ab = _propagate(model, kin, v, vdot, _gravity6(model, gravity))
    f = {}
    for name in model.order:
        I = kin.inertia6[name]
        f[name] = I @ Ab[name] + crf(Vb[name]) @ I @ Vb[name]
    tau = np.zeros(model.n_v)
    for name in reversed(model.order[1:]):
        j = model.parent_joint[name]
        i = model.joint_dof[j.name]
        tau[i] = kin.S[:, i] @ f[name]
        f[j.parent] = f[j.parent] + f[name]
    nb = model.n_base
    tau[:nb] = kin.S[:, :nb].T @ f[model.root]
    return tau


def bias_forces(model: RobotModel, q, v, gravity) -> np.ndarray:
    """``h(q, v)``: gravity and velocity terms, on the left-hand side of the EoM."""
    return inverse_dynamics(model, q, v, np.zeros(model.n_v), gravity)


def mass_matrix(model: RobotModel, q, kin: Kinematics | None = None) -> np.ndarray:
    """Joint-space inertia matrix by the composite-rigid-body algorithm."""
    if kin is None:
        kin = forward_kinematics(model, q)
    Ic = {name: kin.inertia6[name].copy() for name in model.order}
    for name in reversed(model.order[1:]):
        Ic[model.parent_joint[name].parent] += Ic[name]
    M = np.zeros((model.n_v, model.n_v))
    nb = model.n_base
    for name in model.order[1:]:
        j = model.parent_joint[name]
        i = model.joint_dof[j.name]
        F = Ic[name] @ kin.S[:, i]
        anc = model.support[name].copy()
        M[anc, i] = kin.S[:, anc].T @ F
        M[i, anc] = M[anc, i]
    Sb = kin.S[:, :nb]
    M[:nb, :nb] = Sb.T @ Ic[model.root] @ Sb
    return M


def com(model: RobotModel, q, kin: Kinematics | None = None) -> np.ndarray:
    """Whole-body centre of mass (world, 3-D)."""
    if kin is None:
        kin = forward_kinematics(model, q)
    total = sum(b.mass * kin.com[b.name] for b in model.bodies)
    return total / model.total_mass


def com_jacobian(model: RobotModel, q, kin: Kinematics | None = None) -> np.ndarray:
    if kin is None:
        kin = forward_kinematics(model, q)
    J = np.zeros((3, model.n_v))
    for b in model.bodies:
        Jb = body_jacobian(model, kin, b.name)
        J += b.mass * (Jb[3:] - skew(kin.com[b.name]) @ Jb[:3])
    return J / model.total_mass


# ---------------------------------------------------------------------------
# Contacts


@dataclass(frozen=True)
class ContactPointKinematics:
    """Kinematics of one contact point, in its environment frame.

    ``rotation`` is the world-from-contact rotation: 2x2 over (x, z) for
    planar models, 3x3 for spatial ones.
    """

    position_world: np.ndarray
    rotation_world_from_contact: np.ndarray
    jacobian_contact_frame: np.ndarray
    bias_accel_contact_frame: np.ndarray
    velocity_contact_frame: np.ndarray
    axes_world: np.ndarray  # (3, t) embedding of the contact axes


def point_position(model, kin, contact_name) -> np.ndarray:
    cp = _contact_point(model, contact_name)
    return kin.p[cp.body] + kin.R[cp.body] @ cp.position


def _contact_point(model, name):
    try:
        return model.contact_points[name]
    except KeyError:
        raise KeyError(f"unknown contact point {name!r}") from None


def contact_kinematics(
    model: RobotModel, q, v, contact: str, frame: ContactFrame, kin: Kinematics | None = None
) -> ContactPointKinematics:
    q, v = _check_state(model, q, v)
    cp = _contact_point(model, contact)
    if frame.t != model.t:
        raise ValueError(f"contact frame has {frame.t} axes, model needs {model.t}")
    if kin is None:
        kin = forward_kinematics(model, q)
    pos = kin.p[cp.body] + kin.R[cp.body] @ cp.position
    Jb = body_jacobian(model, kin, cp.body)
    Jpt = Jb[3:] - skew(pos) @ Jb[:3]
    Vb, Ab = _propagate(model, kin, v, np.zeros(model.n_v), np.zeros(6))
    V, A = Vb[cp.body], Ab[cp.body]
    vel = V[3:] + np.cross(V[:3], pos)
    acc = A[3:] + np.cross(A[:3], pos) + np.cross(V[:3], vel)
    E = frame.axes
    if model.planar:
        rot = E[[0, 2], :]
        pos_out = pos
    else:
        rot = E
        pos_out = pos
    return ContactPointKinematics(
        position_world=pos_out,
        rotation_world_from_contact=rot,
        jacobian_contact_frame=E.T @ Jpt,
        bias_accel_contact_frame=E.T @ acc,
        velocity_contact_frame=E.T @ vel,
        axes_world=E,
    )


class ForwardDynamicsResult(NamedTuple):
    vdot: np.ndarray
    forces: np.ndarray  # (n_k, t), contact-frame coordinates
    rank_deficient: bool


def constrained_forward_dynamics(
    model: RobotModel,
    state: RobotState,
    u,
    contacts: Sequence[tuple[str, ContactFrame]],
    gravity,
) -> ForwardDynamicsResult:
    """Solve ``[M -J^T; J 0][vdot; f] = [S_a u - h; -Jdot v]``.

    Redundant contacts make the block matrix singular; the least-squares
    solution is returned and ``rank_deficient`` is set (with a warning).
    """
    q, v = _check_state(model, state.q, state.v)
    u = np.zeros(model.n_a) if u is None else np.asarray(u, dtype=float).reshape(-1)
    kin = forward_kinematics(model, q)
    M = mass_matrix(model, q, kin)
    h = bias_forces(model, q, v, gravity)
    ks = [contact_kinematics(model, q, v, name, fr, kin) for name, fr in contacts]
    t = model.t
    nk = len(ks)
    J = np.vstack([k.jacobian_contact_frame for k in ks]) if ks else np.zeros((0, model.n_v))
    Jdv = np.concatenate([k.bias_accel_contact_frame for k in ks]) if ks else np.zeros(0)
    n = model.n_v
    K = np.zeros((n + t * nk, n + t * nk))
    K[:n, :n] = M
    K[:n, n:] = -J.T
    K[n:, :n] = J
    rhs = np.concatenate([model.actuation_matrix() @ u - h, -Jdv])
    sv = np.linalg.svd(K, compute_uv=False)
    deficient = bool(sv[-1] <= 1e-10 * sv[0])
    if deficient:
        warnings.warn("contact constraints are redundant; using least squares", RuntimeWarning)
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    else:
        sol = np.linalg.solve(K, rhs)
    return ForwardDynamicsResult(sol[:n], sol[n:].reshape(nk, t), deficient)


def integrate(model: RobotModel, q, v, dt) -> np.ndarray:
    """Configuration reached from ``q`` under constant ``v`` for ``dt``."""
    q = np.asarray(q, dtype=float).copy()
    v = np.asarray(v, dtype=float)
    if model.planar:
        return q + dt * v
    out = q.copy()
    out[:3] = q[:3] + dt * v[:3]
    w, x, y, z = q[3:7]
    R = Rotation.from_rotvec(v[3:6] * dt) * Rotation.from_quat([x, y, z, w])
    xq, yq, zq, wq = R.as_quat()
    out[3:7] = [wq, xq, yq, zq]
    out[7:] = q[7:] + dt * v[6:]
    return out
