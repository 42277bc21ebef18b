"""Finite-difference spatial operators, grids, initial data, and nonlinearities.

The 1D domain (0, ell) is discretized at the interior nodes x_i = i*dx,
i = 1..n, with dx = ell/(n+1). Homogeneous Dirichlet values at the
endpoints are eliminated, so all vectors have length n.

Two symmetric operators are provided:

* wave: second-difference approximation of -d^2/dx^2, tridiagonal with
  diagonal 2/dx^2 and off-diagonal -1/dx^2;
* beam: fourth-difference approximation of d^4/dx^4 under hinged-hinged
  boundary conditions, pentadiagonal with corner diagonal entries 5/dx^4,
  interior diagonal 6/dx^4, and off-diagonals -4/dx^4, 1/dx^4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    UnknownNonlinearityError,
    UnknownProfileError,
)

WAVE = "wave"
BEAM = "beam"


@dataclass(frozen=True)
class GridOperator:
    """Symmetric banded spatial operator with its grid metadata.

    ``entries`` is the dense n-by-n matrix; it is exactly symmetric by
    construction (never symmetrized after the fact).
    """

    kind: str
    n: int
    dx: float
    ell: float
    entries: np.ndarray

    @property
    def bandwidth(self) -> int:
        return 1 if self.kind == WAVE else 2


@dataclass(frozen=True)
class Profile:
    """Named initial-data profile with its shape parameters."""

    name: str
    params: tuple = ()


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients, nonlinearities, initial data, and horizon of one problem.

    The governing system is u_tt + (alpha*S + delta*I) u + (beta*S + gamma*I) u_t
    = g(u) + h(u_t), with S the spatial operator. alpha must be positive;
    beta, gamma, delta are non-negative.
    """

    alpha: float
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    g: str = "zero"
    h: str = "zero"
    p: Profile = field(default_factory=lambda: Profile("zero"))
    q: Profile = field(default_factory=lambda: Profile("zero"))
    ell: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        for name in ("beta", "gamma", "delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        if not self.ell > 0:
            raise ValueError(f"ell must be positive, got {self.ell}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        for name in (self.g, self.h):
            if name not in NONLINEARITIES:
                raise UnknownNonlinearityError(f"unknown nonlinearity {name!r}")
        for prof in (self.p, self.q):
            if prof.name not in PROFILES:
                raise UnknownProfileError(f"unknown profile {prof.name!r}")


@dataclass
class StateVector:
    """Stacked (u, w) values at the interior nodes, w = du/dt."""

    u: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        if self.u.shape != self.w.shape or self.u.ndim != 1:
            raise DimensionMismatchError(
                f"u and w must be 1-D arrays of equal length, got {self.u.shape} and {self.w.shape}"
            )

    @property
    def n(self) -> int:
        return self.u.size

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.u, self.w])

    @classmethod
    def from_stacked(cls, y: np.ndarray) -> "StateVector":
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size % 2:
            raise DimensionMismatchError(f"stacked state must have even length, got {y.shape}")
        n = y.size // 2
        return cls(y[:n].copy(), y[n:].copy())


def build_wave_operator(n: int, ell: float) -> GridOperator:
    """Tridiagonal operator for -d^2/dx^2 with Dirichlet ends."""
    if n < 1:
        raise InvalidDimensionError(f"wave operator needs n >= 1, got {n}")
    if not ell > 0:
        raise InvalidDimensionError(f"domain length must be positive, got {ell}")
    dx = ell / (n + 1)
    c = 1.0 / (dx * dx)
    entries = 2.0 * c * np.eye(n)
    if n > 1:
        entries -= c * (np.eye(n, k=1) + np.eye(n, k=-1))
    return GridOperator(WAVE, n, dx, ell, entries)


def build_beam_operator(n: int, ell: float) -> GridOperator:
    """Pentadiagonal operator for d^4/dx^4 with hinged-hinged ends.

    The 5/dx^4 corner entries come from eliminating the zero-moment ghost
    values; this is the only beam boundary variant provided.
    """
    if n < 3:
        raise InvalidDimensionError(f"beam operator needs n >= 3, got {n}")
    if not ell > 0:
        raise InvalidDimensionError(f"domain length must be positive, got {ell}")
    dx = ell / (n + 1)
    c = 1.0 / dx**4
    entries = 6.0 * c * np.eye(n)
    entries[0, 0] = 5.0 * c
    entries[n - 1, n - 1] = 5.0 * c
    entries -= 4.0 * c * (np.eye(n, k=1) + np.eye(n, k=-1))
    entries += c * (np.eye(n, k=2) + np.eye(n, k=-2))
    return GridOperator(BEAM, n, dx, ell, entries)


def build_operator(kind: str, n: int, ell: float) -> GridOperator:
    if kind == WAVE:
        return build_wave_operator(n, ell)
    if kind == BEAM:
        return build_beam_operator(n, ell)
    raise InvalidDimensionError(f"unknown operator kind {kind!r}")


def grid_points(n: int, ell: float) -> np.ndarray:
    """Interior nodes x_i = i*dx, i = 1..n."""
    return np.arange(1, n + 1) * (ell / (n + 1))


def _profile_sine(x, ell, amp=1.0, freq=math.pi):
    return amp * np.sin(freq * x)


def _profile_cosine(x, ell, amp=1.0, freq=math.pi):
    return amp * np.cos(freq * x)


def _profile_hat(x, ell, amp=1.0):
    # peak value amp at ell/2, linear to zero at both ends
    return amp * 2.0 * np.minimum(x, ell - x) / ell


def _profile_step(x, ell, left=0.0, right=1.0):
    # the midpoint itself takes the left value (x <= ell/2 branch)
    return np.where(x <= 0.5 * ell, left, right)


def _profile_gaussian(x, ell, amp=1.0, rate=1.0, center=0.5):
    return amp * np.exp(-rate * (x - center) ** 2)


def _profile_zero(x, ell):
    return np.zeros_like(x)


PROFILES = {
    "sine": _profile_sine,
    "cosine": _profile_cosine,
    "hat": _profile_hat,
    "step": _profile_step,
    "gaussian": _profile_gaussian,
    "zero": _profile_zero,
}


def sample_profile(name: str, params, n: int, ell: float) -> np.ndarray:
    """Evaluate a registered profile at the interior nodes."""
    try:
        fn = PROFILES[name]
    except KeyError:
        raise UnknownProfileError(f"unknown profile {name!r}") from None
    x = grid_points(n, ell)
    return np.asarray(fn(x, ell, *params), dtype=float)


NONLINEARITIES = {
    "zero": lambda v: np.zeros_like(v),
    "sin": np.sin,
    "abs": np.abs,
    "square": lambda v: v * v,
    "cube": lambda v: v**3,
    "signed_square": lambda v: v * np.abs(v),
    "neg_signed_square": lambda v: -v * np.abs(v),
    "neg_signed_fourth": lambda v: -v * np.abs(v) ** 3,
    "neg_five_cube": lambda v: -5.0 * v**3,
}


def nonlinearity(name: str):
    try:
        return NONLINEARITIES[name]
    except KeyError:
        raise UnknownNonlinearityError(f"unknown nonlinearity {name!r}") from None


def apply_nonlinearity(spec: ProblemSpec, y: StateVector) -> StateVector:
    """Source term (0, g(u) + h(w)) of the first-order system."""
    g = nonlinearity(spec.g)
    h = nonlinearity(spec.h)
    return StateVector(np.zeros_like(y.u), g(y.u) + h(y.w))


def initial_state(spec: ProblemSpec, n: int) -> StateVector:
    """Sample the initial profiles (p, q) onto the interior grid."""
    u0 = sample_profile(spec.p.name, spec.p.params, n, spec.ell)
    w0 = sample_profile(spec.q.name, spec.q.params, n, spec.ell)
    return StateVector(u0, w0)
