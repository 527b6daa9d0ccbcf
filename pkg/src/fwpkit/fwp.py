"""Feasible wrench polytopes of a legged system.

The pipeline, for a given state and set of active contacts:

1. build the H-description of ``x = (f_1, ..., f_nk, u)`` (all contacts
   stick) or of ``x_o = (f_s, u)`` (a subset opens, the rest stick);
2. enumerate its vertices;
3. map the force part of every vertex to a centroidal wrench.

Wrenches are ordered (torque, force) and taken about the whole-body CoM.
Planar wrenches are ``(tau, f_x, f_z)`` with ``tau`` counter-clockwise in
the x-z plane.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import block_diag, cho_factor, cho_solve

from .contact import ActiveContact, ActuationLimits, actuation_hrep, friction_hrep
from .dynamics import (
    PLANAR_AXIS,
    RobotModel,
    RobotState,
    bias_forces,
    com,
    contact_kinematics,
    forward_kinematics,
    mass_matrix,
    skew,
)
from .polytope import (
    TAU_FEAS,
    TAU_HULL,
    HPolytope,
    VPolytope,
    affine_hull,
    contains,
    extreme_points,
    facet_enum,
    support,
    vertex_enum,
)

logger = logging.getLogger(__name__)

TAU_EST = 1e-6
TAU_GAP = 1e-6
MAX_CONTACTS = 12

PLANAR_WRENCH_AXES = ("tau", "fx", "fz")
SPATIAL_WRENCH_AXES = ("tx", "ty", "tz", "fx", "fy", "fz")


def default_gravity(model: RobotModel) -> np.ndarray:
    return np.array([0.0, -9.81]) if model.planar else np.array([0.0, 0.0, -9.81])


def wrench_axes(model: RobotModel) -> tuple:
    return PLANAR_WRENCH_AXES if model.planar else SPATIAL_WRENCH_AXES


# ---------------------------------------------------------------------------
# Dynamics terms shared by the constraint builders


@dataclass
class _Terms:
    M_chol: tuple
    h: np.ndarray
    S_a: np.ndarray
    J: list  # per contact, (t, n_v)
    Jdv: list  # per contact, (t,)
    positions: list  # per contact, world 3-vector
    axes: list  # per contact, (3, t)
    com: np.ndarray
    t: int

    def Minv(self, X):
        return cho_solve(self.M_chol, X)


def _terms(model, state, contacts, gravity, tau_est=TAU_EST):
    q = np.asarray(state.q, dtype=float)
    v = np.asarray(state.v, dtype=float)
    if gravity is None:
        gravity = default_gravity(model)
    kin = forward_kinematics(model, q)
    M = mass_matrix(model, q, kin)
    try:
        chol = cho_factor(M)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("mass matrix is not positive definite") from None
    h = bias_forces(model, q, v, gravity)
    J, Jdv, pos, axes = [], [], [], []
    for c in contacts:
        ck = contact_kinematics(model, q, v, c.name, c.frame, kin)
        speed = np.linalg.norm(ck.velocity_contact_frame)
        if speed > tau_est:
            raise ValueError(
                f"contact {c.name!r} is not established: point speed {speed:.3g} m/s"
            )
        if c.frame.origin is not None:
            gap = c.frame.normal @ (ck.position_world - c.frame.origin)
            if abs(gap) > TAU_GAP:
                raise ValueError(f"contact {c.name!r} is not active: gap {gap:.3g} m")
        J.append(ck.jacobian_contact_frame)
        Jdv.append(ck.bias_accel_contact_frame)
        pos.append(ck.position_world)
        axes.append(ck.axes_world)
    return _Terms(chol, h, model.actuation_matrix(), J, Jdv, pos, axes,
                  com(model, q, kin), model.t)


def _limits(model, limits):
    if limits is None:
        return ActuationLimits.from_model(model)
    if limits.n_a != model.n_a:
        raise ValueError(f"{limits.n_a} actuation limits for {model.n_a} actuators")
    return limits


def _force_cap_rows(nf, n_x, f_max):
    A = np.zeros((2 * nf, n_x))
    A[:nf, :nf] = np.eye(nf)
    A[nf:, :nf] = -np.eye(nf)
    return A, np.full(2 * nf, float(f_max))


def _inequalities(contacts, limits, n_x):
    """Block-diagonal friction rows for ``contacts`` followed by ``A_a``."""
    fr = [friction_hrep(c.friction()).A for c in contacts]
    act = actuation_hrep(limits)
    blocks = fr + ([act.A] if limits.n_a else [])
    A = block_diag(*blocks) if blocks else np.zeros((0, n_x))
    A = A.reshape(-1, n_x)
    b = np.concatenate([np.zeros(sum(len(a) for a in fr)), act.b])
    return A, b


def _mask(subset, contacts) -> int:
    """Bitmask (bit i = contact i opened) from names, indices or an int."""
    if isinstance(subset, (int, np.integer)):
        return int(subset)
    names = [c.name for c in contacts]
    mask = 0
    for s in subset:
        i = names.index(s) if isinstance(s, str) else int(s)
        mask |= 1 << i
    return mask


def subset_names(mask: int, contacts) -> list:
    return [c.name for i, c in enumerate(contacts) if mask >> i & 1]


def stick_hrep(
    model: RobotModel,
    state: RobotState,
    contacts: Sequence[ActiveContact],
    limits: ActuationLimits | None = None,
    gravity=None,
    f_max=None,
    tau_est=TAU_EST,
    terms=None,
) -> HPolytope:
    """Constraints on ``x = (f, u)`` when every active contact sticks.

    Equalities ``[J M^-1 J^T, J M^-1 S_a] x = J M^-1 h - Jdot v`` keep all
    contact points at rest; inequalities are the friction pyramids, the
    actuation box and (optionally) ``|f_i|_inf <= f_max``.
    """
    limits = _limits(model, limits)
    T = terms or _terms(model, state, contacts, gravity, tau_est)
    nf = T.t * len(contacts)
    n_x = nf + limits.n_a
    J = np.vstack(T.J)
    Jdv = np.concatenate(T.Jdv)
    C = np.hstack([J @ T.Minv(J.T), J @ T.Minv(T.S_a)])
    d = J @ T.Minv(T.h) - Jdv
    A, b = _inequalities(contacts, limits, n_x)
    if f_max is not None:
        Af, bf = _force_cap_rows(nf, n_x, f_max)
        A, b = np.vstack([A, Af]), np.concatenate([b, bf])
    return HPolytope(A, b, C, d)


def opening_hrep(
    model: RobotModel,
    state: RobotState,
    contacts: Sequence[ActiveContact],
    opening_subset,
    limits: ActuationLimits | None = None,
    gravity=None,
    f_max=None,
    tau_est=TAU_EST,
    terms=None,
) -> HPolytope:
    """Constraints on ``x_o = (f_s, u)`` when ``opening_subset`` opens.

    Sticking contacts keep zero acceleration; each opened contact gets one
    non-penetration row on its normal acceleration.
    """
    limits = _limits(model, limits)
    nk = len(contacts)
    mask = _mask(opening_subset, contacts)
    if mask <= 0 or mask >= (1 << nk) - 1:
        raise ValueError("opening subset must be non-empty and leave a sticking contact")
    T = terms or _terms(model, state, contacts, gravity, tau_est)
    stick = [i for i in range(nk) if not mask >> i & 1]
    opened = [i for i in range(nk) if mask >> i & 1]
    Js = np.vstack([T.J[i] for i in stick])
    Jsdv = np.concatenate([T.Jdv[i] for i in stick])
    JoN = np.vstack([T.J[i][-1] for i in opened])
    JoNdv = np.array([T.Jdv[i][-1] for i in opened])
    Bx = np.hstack([T.Minv(Js.T), T.Minv(T.S_a)])  # vdot = Bx x_o - M^-1 h
    Mih = T.Minv(T.h)
    C = Js @ Bx
    d = Js @ Mih - Jsdv
    n_x = C.shape[1]
    A, b = _inequalities([contacts[i] for i in stick], limits, n_x)
    A_np = -JoN @ Bx
    b_np = JoNdv - JoN @ Mih
    A, b = np.vstack([A, A_np]), np.concatenate([b, b_np])
    if f_max is not None:
        Af, bf = _force_cap_rows(T.t * len(stick), n_x, f_max)
        A, b = np.vstack([A, Af]), np.concatenate([b, bf])
    return HPolytope(A, b, C, d)


# ---------------------------------------------------------------------------
# Wrench map


@dataclass(frozen=True)
class WrenchMap:
    """``T = [T_1 ... T_k]`` mapping stacked contact-frame forces to a CoM wrench."""

    T: np.ndarray
    contacts: tuple

    @property
    def wrench_dim(self) -> int:
        return self.T.shape[0]

    def __call__(self, f):
        f = np.asarray(f, dtype=float)
        return f @ self.T.T if f.ndim == 2 else self.T @ f


def _wrench_block(planar, p, x_c, E):
    r = p - x_c
    T6 = np.vstack([skew(r) @ E, E])
    if planar:
        return np.vstack([PLANAR_AXIS @ T6[:3], T6[3], T6[5]])
    return T6


def wrench_map(model, q, contacts, subset_keep=None, terms=None) -> WrenchMap:
    """Wrench map over the contacts in ``subset_keep`` (default: all)."""
    if subset_keep is None:
        keep = list(range(len(contacts)))
    else:
        names = [c.name for c in contacts]
        keep = [names.index(s) if isinstance(s, str) else int(s) for s in subset_keep]
    if terms is not None:
        pos, axes, x_c = terms.positions, terms.axes, terms.com
    else:
        kin = forward_kinematics(model, q)
        x_c = com(model, q, kin)
        pos, axes = [], []
        for c in contacts:
            cp = model.contact_points[c.name]
            pos.append(kin.p[cp.body] + kin.R[cp.body] @ cp.position)
            axes.append(c.frame.axes)
    blocks = [_wrench_block(model.planar, pos[i], x_c, axes[i]) for i in keep]
    wdim = 3 if model.planar else 6
    T = np.hstack(blocks) if blocks else np.zeros((wdim, 0))
    return WrenchMap(T, tuple(contacts[i].name for i in keep))


def _to_wrench(P: HPolytope, wmap: WrenchMap) -> VPolytope:
    V = vertex_enum(P)
    nf = wmap.T.shape[1]
    wdim = wmap.wrench_dim
    if V.is_empty:
        return VPolytope.empty(wdim)
    W = wmap(V.vertices[:, :nf])
    R = wmap(V.rays[:, :nf]) if len(V.rays) else np.zeros((0, wdim))
    if len(R):
        scale = max(1.0, np.abs(W).max())
        R = R[np.linalg.norm(R, axis=1) > 1e-9 * scale]
    return extreme_points(VPolytope(W, R, n=wdim))


def fwp_stick(model, state, contacts, limits=None, gravity=None, f_max=None,
              tau_est=TAU_EST) -> VPolytope:
    """Wrench vertices feasible while all contacts stick."""
    T = _terms(model, state, contacts, gravity, tau_est)
    P = stick_hrep(model, state, contacts, limits, gravity, f_max, tau_est, terms=T)
    return _to_wrench(P, wrench_map(model, state.q, contacts, terms=T))


def fwp_opening(model, state, contacts, subset, limits=None, gravity=None, f_max=None,
                tau_est=TAU_EST) -> VPolytope:
    """Wrench vertices feasible while ``subset`` opens and the rest stick."""
    T = _terms(model, state, contacts, gravity, tau_est)
    P = opening_hrep(model, state, contacts, subset, limits, gravity, f_max, tau_est, terms=T)
    mask = _mask(subset, contacts)
    keep = [i for i in range(len(contacts)) if not mask >> i & 1]
    return _to_wrench(P, wrench_map(model, state.q, contacts, keep, terms=T))


def naive_fwp_opening(model, state, contacts, subset, limits=None, gravity=None,
                      f_max=None, tau_est=TAU_EST) -> VPolytope:
    """Stick set over the remaining contacts, ignoring non-penetration of opened ones."""
    mask = _mask(subset, contacts)
    if mask <= 0 or mask >= (1 << len(contacts)) - 1:
        raise ValueError("opening subset must be non-empty and leave a sticking contact")
    kept = [c for i, c in enumerate(contacts) if not mask >> i & 1]
    return fwp_stick(model, state, kept, limits, gravity, f_max, tau_est)


# ---------------------------------------------------------------------------
# Full FWP


@dataclass(frozen=True)
class FwpOptions:
    f_max: float | None = None
    subsets: tuple | None = None  # bitmasks or name tuples; None = all
    naive: bool = False
    max_contacts: int = MAX_CONTACTS
    threads: int | None = None
    tau_est: float = TAU_EST
    tau_hull: float = TAU_HULL


@dataclass
class SubsetDiagnostics:
    feasible: bool
    bounded: bool = True
    n_vertices: int = 0
    affine_dim: int = -1
    error: str | None = None

    def to_dict(self):
        return {
            "feasible": self.feasible,
            "bounded": self.bounded,
            "n_vertices": self.n_vertices,
            "affine_dim": self.affine_dim,
            "error": self.error,
        }


def _diagnose(vp: VPolytope, tol) -> SubsetDiagnostics:
    if vp.is_empty:
        return SubsetDiagnostics(False, True, 0, -1)
    return SubsetDiagnostics(True, vp.is_bounded, vp.m, affine_hull(vp, tol).dim)


@dataclass
class FwpResult:
    contact_names: tuple
    planar: bool
    stick: VPolytope
    opening: dict = field(default_factory=dict)  # mask -> non-empty VPolytope
    naive_opening: dict | None = None
    diagnostics: dict = field(default_factory=dict)  # mask -> SubsetDiagnostics; 0 = stick

    @property
    def wrench_dim(self) -> int:
        return 3 if self.planar else 6

    @property
    def axes(self) -> tuple:
        return PLANAR_WRENCH_AXES if self.planar else SPATIAL_WRENCH_AXES

    @property
    def attempted_subsets(self) -> list:
        return sorted(k for k in self.diagnostics if k != 0)

    def subset_label(self, mask: int) -> str:
        opened = [n for i, n in enumerate(self.contact_names) if mask >> i & 1]
        return "open:" + "+".join(opened)

    def configurations(self):
        """(label, polytope) pairs: stick first, then non-empty openings by mask."""
        yield "stick", self.stick
        for mask in sorted(self.opening):
            yield self.subset_label(mask), self.opening[mask]

    def union_contains(self, w, tol=None) -> bool:
        return any(inside for inside, _ in check_wrench(self, w, tol).values())

    def to_dict(self) -> dict:
        def entry(mask, vp):
            d = vp.to_dict()
            d["mask"] = mask
            d["open"] = [n for i, n in enumerate(self.contact_names) if mask >> i & 1]
            return d

        out = {
            "format": "fwp-result",
            "version": 1,
            "planar": self.planar,
            "wrench_axes": list(self.axes),
            "contacts": list(self.contact_names),
            "stick": self.stick.to_dict(),
            "opening": [entry(m, self.opening[m]) for m in sorted(self.opening)],
            "diagnostics": [
                dict(mask=m, open=[n for i, n in enumerate(self.contact_names) if m >> i & 1],
                     **self.diagnostics[m].to_dict())
                for m in sorted(self.diagnostics)
            ],
        }
        if self.naive_opening is not None:
            out["naive_opening"] = [entry(m, self.naive_opening[m]) for m in sorted(self.naive_opening)]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FwpResult":
        if data.get("format") != "fwp-result":
            raise ValueError("not an FWP result document")
        planar = bool(data["planar"])
        n = 3 if planar else 6

        def load(e):
            return VPolytope(e.get("V", []), e.get("rays", []), n=n)

        diags = {}
        for e in data.get("diagnostics", []):
            diags[int(e["mask"])] = SubsetDiagnostics(
                e["feasible"], e["bounded"], e["n_vertices"], e["affine_dim"], e.get("error")
            )
        naive = None
        if "naive_opening" in data:
            naive = {int(e["mask"]): load(e) for e in data["naive_opening"]}
        return cls(
            tuple(data["contacts"]),
            planar,
            load(data["stick"]),
            {int(e["mask"]): load(e) for e in data.get("opening", [])},
            naive,
            diags,
        )


def _thread_count(options):
    if options.threads:
        return options.threads
    env = os.environ.get("FWP_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def fwp_full(model, state, contacts, limits=None, options: FwpOptions | None = None,
             gravity=None) -> FwpResult:
    """Stick polytope plus one polytope per opening subset.

    ``2**n_k - 2`` subsets are attempted unless ``options.subsets`` lists
    them explicitly. Failures are recorded per subset without aborting.
    """
    options = options or FwpOptions()
    nk = len(contacts)
    if nk < 1:
        raise ValueError("need at least one active contact")
    if options.subsets is None:
        if nk > options.max_contacts:
            raise ValueError(
                f"{nk} contacts exceed the subset-enumeration cap ({options.max_contacts}); "
                "pass an explicit subset list"
            )
        masks = list(range(1, (1 << nk) - 1))
    else:
        masks = sorted({_mask(s, contacts) for s in options.subsets})
        for m in masks:
            if m <= 0 or m >= (1 << nk) - 1:
                raise ValueError(f"invalid opening subset mask {m}")

    limits = _limits(model, limits)
    terms = _terms(model, state, contacts, gravity, options.tau_est)
    wmap_all = wrench_map(model, state.q, contacts, terms=terms)
    stick = _to_wrench(
        stick_hrep(model, state, contacts, limits, gravity, options.f_max, terms=terms), wmap_all
    )
    diagnostics = {0: _diagnose(stick, options.tau_hull)}

    def run(mask):
        keep = [i for i in range(nk) if not mask >> i & 1]
        wmap = wrench_map(model, state.q, contacts, keep, terms=terms)
        out = {}
        try:
            P = opening_hrep(model, state, contacts, mask, limits, gravity, options.f_max, terms=terms)
            out["open"] = _to_wrench(P, wmap)
            if options.naive:
                kept = [contacts[i] for i in keep]
                Pn = stick_hrep(model, state, kept, limits, gravity, options.f_max,
                                terms=_sub_terms(terms, keep))
                out["naive"] = _to_wrench(Pn, wmap)
        except Exception as exc:  # recorded per subset
            logger.warning("opening subset %d failed: %s", mask, exc)
            out["error"] = f"{type(exc).__name__}: {exc}"
        return mask, out

    with ThreadPoolExecutor(max_workers=_thread_count(options)) as pool:
        results = list(pool.map(run, masks))

    opening, naive = {}, ({} if options.naive else None)
    for mask, out in results:
        if "error" in out:
            diagnostics[mask] = SubsetDiagnostics(False, error=out["error"])
            continue
        diagnostics[mask] = _diagnose(out["open"], options.tau_hull)
        if not out["open"].is_empty:
            opening[mask] = out["open"]
        if options.naive and not out["naive"].is_empty:
            naive[mask] = out["naive"]
    return FwpResult(tuple(c.name for c in contacts), model.planar, stick, opening, naive, diagnostics)


def _sub_terms(terms, keep):
    return _Terms(
        terms.M_chol, terms.h, terms.S_a,
        [terms.J[i] for i in keep], [terms.Jdv[i] for i in keep],
        [terms.positions[i] for i in keep], [terms.axes[i] for i in keep],
        terms.com, terms.t,
    )


# ---------------------------------------------------------------------------
# Analyses


def _tol_for(vp: VPolytope, tol):
    scale = 1.0 + (np.abs(vp.vertices).max() if vp.m else 0.0)
    return (1e-7 if tol is None else tol) * scale


def signed_distance(vp: VPolytope, w) -> float:
    """Signed distance from ``w`` to the boundary of a bounded polytope.

    Positive outside. Facet normals come from the hull; offsets are the
    support values along them. Degenerate polytopes count the distance to
    their affine hull as outside distance.
    """
    if vp.is_empty:
        return np.inf
    if not vp.is_bounded:
        return np.nan
    w = np.asarray(w, dtype=float)
    H = facet_enum(vp)
    d_eq = 0.0
    if len(H.C):
        d_eq = float(np.max(np.abs(H.C @ w - H.d) / np.linalg.norm(H.C, axis=1)))
    if not len(H.A):
        return d_eq
    normals = H.A / np.linalg.norm(H.A, axis=1, keepdims=True)
    offsets = np.array([support(vp, a) for a in normals])
    d_in = float(np.max(normals @ w - offsets))
    if d_eq <= 1e-9 * (1.0 + np.abs(w).max()):
        return d_in
    return max(d_in, d_eq)


def check_wrench(result: FwpResult, w, tol=None) -> dict:
    """Membership of ``w`` in each configuration's polytope.

    Returns ``{label: (inside, signed_distance)}`` with the stick set first.
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != result.wrench_dim:
        raise ValueError(f"wrench has dimension {w.shape[0]}, expected {result.wrench_dim}")
    report = {}
    for label, vp in result.configurations():
        if vp.is_empty:
            report[label] = (False, np.inf)
            continue
        inside = contains(vp, w, _tol_for(vp, tol))
        dist = signed_distance(vp, w) if vp.is_bounded else np.nan
        report[label] = (inside, dist)
    return report


def non_actuated_directions(poly: VPolytope, tol=TAU_HULL) -> np.ndarray:
    """Orthonormal wrench directions (columns) along which ``poly`` has no extent."""
    return affine_hull(poly, tol).null_basis


def wrench_slice(vp: VPolytope, fixed: dict, tol=TAU_HULL) -> VPolytope:
    """Intersect ``vp`` with ``{w : w[k] = value}`` for each ``k: value`` in
    ``fixed`` and return the polytope over the remaining coordinates."""
    if not vp.is_bounded:
        raise ValueError("cannot slice an unbounded polytope")
    keep = [k for k in range(vp.n) if k not in fixed]
    if vp.is_empty:
        return VPolytope.empty(len(keep))
    H = facet_enum(vp, tol)
    idx = sorted(fixed)
    E = np.zeros((len(idx), vp.n))
    E[np.arange(len(idx)), idx] = 1.0
    P = HPolytope(H.A, H.b, np.vstack([H.C, E]), np.concatenate([H.d, [fixed[k] for k in idx]]))
    V = vertex_enum(P)
    if V.is_empty:
        return VPolytope.empty(len(keep))
    return VPolytope(V.vertices[:, keep])
