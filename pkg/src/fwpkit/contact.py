"""Contact-model primitives: friction pyramids, actuation boxes, scenarios."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dynamics import ContactFrame
from .polytope import HPolytope

PLANAR2 = "planar2"
SPATIAL3 = "spatial3"


@dataclass(frozen=True)
class FrictionSpec:
    """Static friction coefficient and force dimension (normal component last)."""

    mu: float
    dim: str = PLANAR2

    def __post_init__(self):
        if not self.mu >= 0:
            raise ValueError(f"friction coefficient must be non-negative, got {self.mu}")
        if self.dim not in (PLANAR2, SPATIAL3):
            raise ValueError(f"unknown friction dimension {self.dim!r}")


@dataclass(frozen=True)
class ActuationLimits:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("lower and upper limits differ in length")
        if not (np.all(lo < 0) and np.all(hi > 0)):
            raise ValueError("actuation limits must satisfy lower < 0 < upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def n_a(self) -> int:
        return self.lower.shape[0]

    @classmethod
    def from_model(cls, model) -> "ActuationLimits":
        return cls(*model.actuation_limits())


@dataclass(frozen=True)
class ActiveContact:
    """An active contact: model contact point, environment frame and friction."""

    name: str
    frame: ContactFrame
    mu: float

    def friction(self) -> FrictionSpec:
        return FrictionSpec(self.mu, PLANAR2 if self.frame.t == 2 else SPATIAL3)


class ContactScenario(enum.Enum):
    OPENING = "opening"
    STICK = "stick"
    SLIP = "slip"


def friction_hrep(spec: FrictionSpec) -> HPolytope:
    """Linear friction constraints ``A_f f <= 0``.

    Planar forces are (f_T, f_N); spatial forces (f_T1, f_T2, f_N) use the
    inner pyramid with half-width ``mu / sqrt(2)`` per tangent axis.
    """
    mu = spec.mu
    if spec.dim == PLANAR2:
        A = np.array([[-1.0, -mu], [1.0, -mu], [0.0, -1.0]])
    else:
        k = mu / np.sqrt(2.0)
        A = np.array([
            [-1.0, 0.0, -k],
            [1.0, 0.0, -k],
            [0.0, -1.0, -k],
            [0.0, 1.0, -k],
            [0.0, 0.0, -1.0],
        ])
    return HPolytope(A, np.zeros(A.shape[0]))


def actuation_hrep(limits: ActuationLimits) -> HPolytope:
    """Box ``[I; -I] u <= [u_max; -u_min]``."""
    n = limits.n_a
    A = np.vstack([np.eye(n), -np.eye(n)]).reshape(2 * n, n)
    b = np.concatenate([limits.upper, -limits.lower])
    return HPolytope(A, b)


def classify_contact(p_n, pdot_n, pddot_n_candidate, stick_force, spec: FrictionSpec,
                     tol=0.0) -> ContactScenario:
    """Opening, stick or slip for an active contact (gap ``p_n`` = 0)."""
    if p_n < -tol:
        raise ValueError(f"contact penetrates the environment (p_N = {p_n})")
    if pdot_n > tol or (abs(pdot_n) <= tol and pddot_n_candidate > tol):
        return ContactScenario.OPENING
    H = friction_hrep(spec)
    f = np.asarray(stick_force, dtype=float)
    if np.all(H.A @ f <= tol):
        return ContactScenario.STICK
    return ContactScenario.SLIP
