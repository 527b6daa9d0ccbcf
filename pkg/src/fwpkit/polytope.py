"""Convex polytopes in half-space (H) and vertex (V) form.

Vertex enumeration uses the double-description method on the
equality-reduced system. Facet enumeration delegates the hull to qhull
(through :mod:`scipy.spatial`) after projecting onto the affine hull, so the
two conversions are computed along independent routes.

Vertices are stored row-wise (``vertices.shape == (m, n)``); the
column-wise matrix ``V`` is available as a property.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError, cKDTree

TAU_RANK = 1e-10
TAU_VERT = 1e-8
TAU_FEAS = 1e-8
TAU_HULL = 1e-7

# zero test inside the double-description loop (unit rows, unit rays)
_DD_EPS = 1e-9

_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


class DegeneracyWarning(UserWarning):
    """Raised (as a warning) when an inequality system is numerically degenerate."""


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HPolytope:
    """``{x : A x <= b, C x = d}``.

    ``C`` and ``d`` may have zero rows.
    """

    A: np.ndarray
    b: np.ndarray
    C: np.ndarray = None
    d: np.ndarray = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.size == 0 and A.shape[0] != b.shape[0]:
            raise ValueError("empty A needs an explicit (0, n) shape")
        n = A.shape[1]
        if self.C is None:
            C = np.zeros((0, n))
            d = np.zeros(0)
        else:
            C = np.asarray(self.C, dtype=float)
            if C.size == 0:
                C = C.reshape(0, n)
            C = np.atleast_2d(C)
            d = np.asarray(self.d, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.shape[0]}")
        if C.shape[0] != d.shape[0]:
            raise ValueError(f"C has {C.shape[0]} rows but d has {d.shape[0]}")
        if C.shape[1] != n:
            raise ValueError(f"C has {C.shape[1]} columns, expected {n}")
        object.__setattr__(self, "A", _readonly(A))
        object.__setattr__(self, "b", _readonly(b))
        object.__setattr__(self, "C", _readonly(C))
        object.__setattr__(self, "d", _readonly(d))

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "C": self.C.tolist(),
            "d": self.d.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HPolytope":
        n = int(data["n"])
        A = np.asarray(data.get("A", []), dtype=float).reshape(-1, n)
        C = np.asarray(data.get("C", []), dtype=float).reshape(-1, n)
        return cls(A, data.get("b", []), C, data.get("d", []))


@dataclass(frozen=True)
class VPolytope:
    """Convex hull of ``vertices`` plus the cone generated by ``rays``.

    Duplicate vertices (within ``TAU_VERT``) are merged on construction and
    rows are sorted lexicographically, so equal sets compare equal.
    """

    vertices: np.ndarray
    rays: np.ndarray = None
    n: int = None

    def __post_init__(self):
        X = np.asarray(self.vertices, dtype=float)
        n = self.n
        if n is None:
            if X.ndim == 2 and X.shape[1] > 0:
                n = X.shape[1]
            elif self.rays is not None and np.size(self.rays):
                n = np.atleast_2d(self.rays).shape[1]
            else:
                raise ValueError("cannot infer dimension of an empty VPolytope")
        X = X.reshape(-1, n)
        R = np.zeros((0, n)) if self.rays is None else np.asarray(self.rays, float).reshape(-1, n)
        if len(R):
            norms = np.linalg.norm(R, axis=1)
            R = R[norms > 0] / norms[norms > 0, None]
        X = _lexsort_rows(_unique_rows(X, TAU_VERT))
        R = _lexsort_rows(_unique_rows(R, TAU_VERT))
        object.__setattr__(self, "vertices", _readonly(X))
        object.__setattr__(self, "rays", _readonly(R))
        object.__setattr__(self, "n", int(n))

    @property
    def V(self) -> np.ndarray:
        """Vertices as columns."""
        return self.vertices.T

    @property
    def m(self) -> int:
        return self.vertices.shape[0]

    @property
    def is_empty(self) -> bool:
        return self.m == 0

    @property
    def is_bounded(self) -> bool:
        return self.rays.shape[0] == 0

    def to_dict(self) -> dict:
        return {"n": self.n, "V": self.vertices.tolist(), "rays": self.rays.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "VPolytope":
        n = data.get("n")
        return cls(data.get("V", []), data.get("rays", []), n=n)

    @classmethod
    def empty(cls, n: int) -> "VPolytope":
        return cls(np.zeros((0, n)), n=n)


Polytope = Union[HPolytope, VPolytope]


def polytope_from_dict(data: dict) -> Polytope:
    """Load either form from its JSON object."""
    if "V" in data:
        return VPolytope.from_dict(data)
    return HPolytope.from_dict(data)


def _unique_rows(X, tol):
    if len(X) <= 1:
        return X
    tree = cKDTree(X)
    keep = np.ones(len(X), dtype=bool)
    for i in range(len(X)):
        if keep[i]:
            near = np.asarray(tree.query_ball_point(X[i], tol), dtype=int)
            keep[near[near > i]] = False
    return X[keep]


def _lexsort_rows(X):
    if len(X) <= 1:
        return X
    return X[np.lexsort(X.T[::-1])]


# ---------------------------------------------------------------------------
# Equality reduction


@dataclass(frozen=True)
class AffineLift:
    """``x = offset + linear @ y``."""

    offset: np.ndarray
    linear: np.ndarray

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            return self.offset + self.linear @ y
        return self.offset + y @ self.linear.T

    @property
    def dim(self) -> int:
        return self.linear.shape[1]


class EqualityReduction(NamedTuple):
    polytope: HPolytope | None
    lift: AffineLift | None
    feasible: bool


def reduce_equalities(P: HPolytope, tau_rank=TAU_RANK, tau_feas=TAU_FEAS) -> EqualityReduction:
    """Parametrize ``{C x = d}`` and restate the inequalities in that chart.

    Returns ``(P_red, lift, feasible)``. ``P_red`` has no equality rows and
    ``x = lift(y)`` for ``y`` in ``P_red``. When ``C x = d`` has no solution
    the polytope is empty and ``feasible`` is False.
    """
    n = P.n
    if P.C.shape[0] == 0:
        lift = AffineLift(_readonly(np.zeros(n)), _readonly(np.eye(n)))
        return EqualityReduction(HPolytope(P.A, P.b), lift, True)

    U, s, Vt = np.linalg.svd(P.C)
    smax = s[0] if s.size else 0.0
    r = int(np.sum(s > tau_rank * smax)) if smax > 0 else 0
    x0 = Vt[:r].T @ ((U[:, :r].T @ P.d) / s[:r])
    resid = P.C @ x0 - P.d
    scale = 1.0 + np.max(np.abs(P.d), initial=0.0)
    if np.max(np.abs(resid), initial=0.0) > tau_feas * scale:
        return EqualityReduction(None, None, False)
    N = Vt[r:].T
    lift = AffineLift(_readonly(x0), _readonly(N))
    red = HPolytope(np.asarray(P.A @ N).reshape(P.A.shape[0], N.shape[1]), P.b - P.A @ x0)
    return EqualityReduction(red, lift, True)


# ---------------------------------------------------------------------------
# Linear programming helpers


def _lp_max(c, A, b, A_eq=None, b_eq=None):
    """Maximize ``c @ z`` over ``A z <= b``; returns (status, value, z)."""
    k = len(c)
    res = linprog(
        -np.asarray(c, float),
        A_ub=A if len(A) else None,
        b_ub=b if len(A) else None,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=[(None, None)] * k,
        method="highs",
        options=_LP_OPTIONS,
    )
    if res.status == 2:
        return "infeasible", -np.inf, None
    if res.status == 3:
        return "unbounded", np.inf, None
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    return "optimal", -res.fun, res.x


def _chebyshev(A, b):
    """Largest ball (radius capped at 1) inside ``A z <= b`` with unit rows."""
    k = A.shape[1]
    c = np.zeros(k + 1)
    c[-1] = 1.0
    Aub = np.hstack([A, np.ones((len(A), 1))])
    status, r, z = _lp_max(
        c, np.vstack([Aub, c]), np.concatenate([b, [1.0]])
    )
    if status == "infeasible":
        return None, -np.inf
    return z[:-1], r


def _remove_redundant(A, b, tol):
    keep = list(range(len(A)))
    for i in range(len(A)):
        others = [j for j in keep if j != i]
        Ao = np.vstack([A[others], A[i]])
        bo = np.concatenate([b[others], [b[i] + 1.0]])
        status, val, _ = _lp_max(A[i], Ao, bo)
        if status == "optimal" and val <= b[i] + tol:
            keep.remove(i)
    return np.asarray(keep, dtype=int)


def _implicit_equalities(A, b, tol):
    rows = []
    for i in range(len(A)):
        status, val, _ = _lp_max(-A[i], A, b)
        if status == "optimal" and b[i] + val <= tol:
            rows.append(i)
    return rows


# ---------------------------------------------------------------------------
# Double description


def _double_description(G, order):
    """Extreme rays of the pointed cone ``{z : G z >= 0}``.

    ``G`` must have unit rows and full column rank. Rows are inserted in
    ``order``; the first independent ones seed the initial simplicial cone.
    Adjacency uses the combinatorial test on zero sets.
    """
    m, D = G.shape
    basis = []
    Q = np.zeros((0, D))
    for i in order:
        g = G[i] - Q.T @ (Q @ G[i])
        nrm = np.linalg.norm(g)
        if nrm > 1e-8:
            basis.append(i)
            Q = np.vstack([Q, g / nrm])
            if len(basis) == D:
                break
    if len(basis) < D:
        raise np.linalg.LinAlgError("constraint matrix is rank deficient")

    R = np.linalg.inv(G[basis]).T
    R /= np.linalg.norm(R, axis=1, keepdims=True)
    Z = np.zeros((D, m), dtype=bool)
    for j in range(D):
        Z[j, basis] = True
        Z[j, basis[j]] = False
    processed = np.zeros(m, dtype=bool)
    processed[basis] = True

    for i in order:
        if processed[i]:
            continue
        vals = R @ G[i]
        pos = vals > _DD_EPS
        neg = vals < -_DD_EPS
        zer = ~(pos | neg)
        processed[i] = True
        if not neg.any():
            Z[:, i] = zer
            continue

        ip, ineg = np.flatnonzero(pos), np.flatnonzero(neg)
        new_R, new_Z = [], []
        if len(ip):
            Zf = Z.astype(np.float32)
            common_counts = Zf[ip] @ Zf[ineg].T
            for a, p in enumerate(ip):
                cand = ineg[common_counts[a] >= D - 2]
                if not len(cand):
                    continue
                common = Z[p] & Z[cand]
                sizes = common.sum(axis=1)
                hits = Zf @ common.T.astype(np.float32)
                supersets = (hits == sizes[None, :]).sum(axis=0)
                for q, cz in zip(cand[supersets == 2], common[supersets == 2]):
                    r = vals[p] * R[q] - vals[q] * R[p]
                    nr = np.linalg.norm(r)
                    if nr <= 0:
                        continue
                    r = r / nr
                    z = cz.copy()
                    z[i] = True
                    z |= processed & (np.abs(G @ r) <= _DD_EPS)
                    new_R.append(r)
                    new_Z.append(z)

        Z[:, i] = zer
        keep = ~neg
        R = R[keep]
        Z = Z[keep]
        if new_R:
            R = np.vstack([R, np.asarray(new_R)])
            Z = np.vstack([Z, np.asarray(new_Z)])
        if not len(R):
            break
    return R


def vertex_enum(
    P: HPolytope,
    tau_rank=TAU_RANK,
    tau_feas=TAU_FEAS,
    tau_vert=TAU_VERT,
) -> VPolytope:
    """All vertices (and recession rays) of ``P``.

    Empty polytopes give an empty :class:`VPolytope`. Unbounded ones carry
    their extreme rays in ``rays``; lines are reported as opposite ray pairs.
    """
    n = P.n
    red, lift, feasible = reduce_equalities(P, tau_rank, tau_feas)
    if not feasible:
        return VPolytope.empty(n)
    A, b = red.A, red.b
    k = lift.dim
    if k == 0:
        ok = np.all(b >= -tau_feas * (1.0 + np.abs(b)))
        return VPolytope(lift.offset[None, :] if ok else np.zeros((0, n)), n=n)

    norms = np.linalg.norm(A, axis=1)
    scale = norms.max(initial=0.0)
    tiny = norms <= 1e-12 * max(scale, 1.0)
    if np.any(b[tiny] < -tau_feas):
        return VPolytope.empty(n)
    A, b, norms = A[~tiny], b[~tiny], norms[~tiny]
    A = A / norms[:, None]
    b = b / norms

    y_vertices, y_rays = _enumerate_reduced(A, b, norms, k, tau_rank, tau_feas)
    if y_vertices is None:
        return VPolytope.empty(n)
    X = lift(y_vertices) if len(y_vertices) else np.zeros((0, n))
    Rx = y_rays @ lift.linear.T if len(y_rays) else np.zeros((0, n))
    # snap back onto the equality manifold / dedupe in the original space
    X = _unique_rows(X, tau_vert)
    return VPolytope(X, Rx, n=n)


def _enumerate_reduced(A, b, norms, k, tau_rank, tau_feas):
    """Vertices and rays of ``{y : A y <= b}`` (unit rows) in R^k."""
    if len(A) == 0:
        warnings.warn("no inequality constraints: polyhedron is a full space", DegeneracyWarning)
        I = np.eye(k)
        return np.zeros((1, k)), np.vstack([I, -I])

    U, s, Vt = np.linalg.svd(A, full_matrices=True)
    rho = int(np.sum(s > tau_rank * s[0]))
    lines = Vt[rho:]
    Qrow = Vt[:rho].T
    if rho < k:
        warnings.warn(
            f"inequality block has rank {rho} < {k}: polyhedron contains lines",
            DegeneracyWarning,
        )
    Az = A @ Qrow

    center, radius = _chebyshev(Az, b)
    # a negative radius means no point satisfies every row
    if center is None or radius < -tau_feas * (1.0 + np.abs(b).max()):
        return None, None
    if radius <= tau_feas:
        eq = _implicit_equalities(Az, b, tau_feas)
        if eq:
            sub = HPolytope(Az, b, Az[eq], b[eq])
            inner = vertex_enum(sub, tau_rank, tau_feas)
            if inner.is_empty:
                return None, None
            Y = inner.vertices @ Qrow.T
            rays = inner.rays @ Qrow.T
            if len(lines):
                rays = np.vstack([rays, lines, -lines])
            return Y, rays

    bs = b - Az @ center
    order_norms = norms
    if len(Az) > 4 * rho:
        keep = _remove_redundant(Az, bs, tau_feas)
        Az, bs, order_norms = Az[keep], bs[keep], norms[keep]

    G = np.vstack([np.hstack([-Az, bs[:, None]]), np.eye(rho + 1)[-1]])
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    order = list(np.argsort(-np.concatenate([order_norms, [np.inf]]), kind="stable"))
    rays_h = _double_description(G, order)

    t = rays_h[:, -1]
    is_vertex = t > _DD_EPS
    Zv = rays_h[is_vertex, :-1] / t[is_vertex, None] + center
    Zr = rays_h[~is_vertex, :-1]
    rn = np.linalg.norm(Zr, axis=1)
    Zr = Zr[rn > 1e-12] / rn[rn > 1e-12, None]
    if not len(Zv):
        return None, None
    Y = Zv @ Qrow.T
    rays = Zr @ Qrow.T
    if len(lines):
        rays = np.vstack([rays, lines, -lines])
    return Y, rays


# ---------------------------------------------------------------------------
# Affine hull / facets


@dataclass(frozen=True)
class AffineHull:
    base_point: np.ndarray
    span_basis: np.ndarray
    null_basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.span_basis.shape[1]


def affine_hull(vp: VPolytope, tol=TAU_HULL) -> AffineHull:
    """Affine hull of the vertices (and ray directions) of ``vp``."""
    if vp.is_empty:
        raise ValueError("affine hull of an empty polytope")
    X = vp.vertices
    base = X.mean(axis=0)
    D = np.vstack([X - base, vp.rays])
    _, s, Vt = np.linalg.svd(D, full_matrices=True)
    smax = s[0] if s.size else 0.0
    r = int(np.sum(s > max(tol * smax, TAU_VERT)))
    return AffineHull(_readonly(base), _readonly(Vt[:r].T), _readonly(Vt[r:].T))


def _hull_in_span(vp, tol):
    hull = affine_hull(vp, tol)
    Y = (vp.vertices - hull.base_point) @ hull.span_basis
    return hull, Y


def _qhull(Y):
    try:
        return ConvexHull(Y)
    except QhullError:
        return ConvexHull(Y, qhull_options="Qx Qs QbB")


def facet_enum(vp: VPolytope, tol=TAU_HULL) -> HPolytope:
    """H-description of a bounded V-polytope.

    Equalities describe the affine hull when the vertex set is degenerate;
    inequalities describe the facets within that hull.
    """
    if vp.is_empty:
        raise ValueError("facet enumeration of an empty polytope")
    if not vp.is_bounded:
        raise ValueError("facet enumeration needs a bounded polytope")
    hull, Y = _hull_in_span(vp, tol)
    base, S, N = hull.base_point, hull.span_basis, hull.null_basis
    C = N.T
    d = C @ base
    k = S.shape[1]
    if k == 0:
        return HPolytope(np.zeros((0, vp.n)), np.zeros(0), C, d)
    if k == 1:
        a = S[:, 0]
        A = np.vstack([a, -a])
        b = np.array([Y.max() + a @ base, -Y.min() - a @ base])
        return HPolytope(A, b, C, d)
    a, off = _facet_planes(Y, tol)
    A = a @ S.T
    b = off + A @ base
    return HPolytope(A, b, C, d)


def _facet_planes(Y, tol, chunk=4096):
    """Unit outward normals ``a`` and offsets of the facets of conv(Y).

    Merging coplanar facets makes qhull very slow on simple polytopes in
    higher dimensions, so the joggled hull only proposes vertex subsets.
    Each plane is then refit through the original points and kept only if
    it supports every point.
    """
    k = Y.shape[1]
    try:
        simplices = ConvexHull(Y, qhull_options="QJ").simplices
    except QhullError:
        simplices = _qhull(Y).simplices
    scale = max(np.abs(Y).max(), 1.0)
    centre = Y.mean(axis=0)
    normals, offsets = [], []
    for lo in range(0, len(simplices), chunk):
        P = Y[simplices[lo:lo + chunk]]
        _, sv, Vt = np.linalg.svd(P[:, 1:] - P[:, :1])
        a = Vt[:, -1]
        spans = sv[:, -1] > 1e-9 * sv[:, 0] if k > 1 else np.ones(len(P), dtype=bool)
        a = a * np.sign(np.einsum("sk,sk->s", a, P[:, 0] - centre))[:, None]
        top = (Y @ a.T).max(axis=0)
        # all points on or below the fitted plane, up to tolerance
        ok = spans & (top - np.einsum("sk,sk->s", a, P[:, 0]) <= tol * scale)
        normals.append(a[ok])
        offsets.append(top[ok])
    eq = np.hstack([np.vstack(normals), np.concatenate(offsets)[:, None] / scale])
    eq = _lexsort_rows(_unique_rows(eq, 1e-9))
    return eq[:, :-1], eq[:, -1] * scale


def extreme_points(vp: VPolytope, tol=TAU_HULL) -> VPolytope:
    """Drop non-extreme points (interior images after a linear map)."""
    if vp.m <= 1 or not vp.is_bounded:
        return vp
    hull, Y = _hull_in_span(vp, tol)
    k = hull.dim
    if k == 0:
        idx = [0]
    elif k == 1:
        idx = [int(np.argmin(Y[:, 0])), int(np.argmax(Y[:, 0]))]
    else:
        idx = _qhull(Y).vertices
    return VPolytope(vp.vertices[np.sort(idx)], n=vp.n)


# ---------------------------------------------------------------------------
# Queries


def support(P: Polytope, direction) -> float:
    """``max_{x in P} direction @ x``; ``inf`` if unbounded, ``-inf`` if empty."""
    c = np.asarray(direction, dtype=float).reshape(-1)
    if c.shape[0] != P.n:
        raise ValueError(f"direction has dimension {c.shape[0]}, polytope {P.n}")
    if not np.any(c):
        raise ValueError("direction must be nonzero")
    if isinstance(P, VPolytope):
        if P.is_empty:
            return -np.inf
        if len(P.rays) and np.any(P.rays @ c > TAU_FEAS):
            return np.inf
        return float(np.max(P.vertices @ c))

    red, lift, feasible = reduce_equalities(P)
    if not feasible:
        return -np.inf
    cy = lift.linear.T @ c
    base = float(c @ lift.offset)
    if lift.dim == 0:
        if np.all(red.b >= -TAU_FEAS):
            return base
        return -np.inf
    status, val, _ = _lp_max(cy, red.A, red.b)
    if status == "optimal":
        return base + val
    return val


def contains(P: Polytope, x, tol=TAU_FEAS) -> bool:
    """Membership test with tolerance ``tol``.

    H-form: every row satisfied within ``tol`` times its norm. V-form: the
    L-infinity distance from ``x`` to the convex hull (plus ray cone) is at
    most ``tol``, found by a small LP over convex weights.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != P.n:
        raise ValueError(f"point has dimension {x.shape[0]}, polytope {P.n}")
    if isinstance(P, HPolytope):
        an = np.maximum(np.linalg.norm(P.A, axis=1), 1e-300)
        cn = np.maximum(np.linalg.norm(P.C, axis=1), 1e-300)
        ok_in = np.all(P.A @ x - P.b <= tol * an)
        ok_eq = np.all(np.abs(P.C @ x - P.d) <= tol * cn)
        return bool(ok_in and ok_eq)
    return distance_linf(P, x) <= tol


def distance_linf(vp: VPolytope, x) -> float:
    """L-infinity distance from ``x`` to ``vp`` (``inf`` when empty)."""
    if vp.is_empty:
        return np.inf
    x = np.asarray(x, dtype=float).reshape(-1)
    m, r, n = vp.m, len(vp.rays), vp.n
    # variables: alpha (m), beta (r), s
    nv = m + r + 1
    G = np.hstack([vp.vertices.T, vp.rays.T])
    A_ub = np.vstack([
        np.hstack([G, -np.ones((n, 1))]),
        np.hstack([-G, -np.ones((n, 1))]),
    ])
    b_ub = np.concatenate([x, -x])
    A_eq = np.zeros((1, nv))
    A_eq[0, :m] = 1.0
    c = np.zeros(nv)
    c[-1] = 1.0
    res = linprog(
        c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
        bounds=[(0, None)] * nv, method="highs", options=_LP_OPTIONS,
    )
    if res.status != 0:
        raise RuntimeError(f"distance LP failed: {res.message}")
    return float(max(res.fun, 0.0))


def to_off(vp: VPolytope, tol=TAU_HULL) -> str:
    """OFF mesh of a bounded 3-D V-polytope (triangulated hull facets)."""
    if vp.n != 3:
        raise ValueError("OFF export needs a 3-D polytope")
    if not vp.is_bounded:
        raise ValueError("OFF export needs a bounded polytope")
    X = vp.vertices
    faces = []
    if vp.m >= 3:
        hull, Y = _hull_in_span(vp, tol)
        if hull.dim == 3:
            ch = _qhull(Y)
            centre = X.mean(axis=0)
            for simplex in ch.simplices:
                i, j, k = (int(s) for s in simplex)
                # orient in the original coordinates: normal away from the interior
                if np.cross(X[j] - X[i], X[k] - X[i]) @ (X[i] - centre) < 0:
                    j, k = k, j
                faces.append((i, j, k))
        elif hull.dim == 2:
            ch = _qhull(Y)
            faces.append(tuple(int(i) for i in ch.vertices))
    faces.sort()
    lines = ["OFF", f"{len(X)} {len(faces)} 0"]
    lines += [" ".join(repr(float(c)) for c in row) for row in X]
    lines += [f"{len(f)} " + " ".join(str(i) for i in f) for f in faces]
    return "\n".join(lines) + "\n"
