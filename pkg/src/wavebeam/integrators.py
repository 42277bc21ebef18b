"""Exponential Runge-Kutta schemes over the block propagator, plus an RK4 baseline.

A scheme step reads

    Y_i    = exp(c_i tau A) y_n + tau * sum_j a_ij(tau A) F(Y_j),
    y_next = exp(tau A) y_n + tau * sum_i b_i(tau A) F(Y_i),

where every coefficient a_ij and b_i is a scalar-weighted combination of
phi_k functions: entries of row i are evaluated at c_i*tau*A, weights at
tau*A. Coefficients are stored symbolically as (k, weight) pairs, so the
consistency identities sum_j a_ij = c_i*phi_1(c_i tau A) and
sum_i b_i = phi_1(tau A) can be checked exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .discretize import (
    GridOperator,
    ProblemSpec,
    StateVector,
    initial_state,
    nonlinearity,
)
from .errors import ConfigError, InstabilityError, UnknownSchemeError
from .propagator import BlockPropagator, build_propagator

# coefficient = sum of weight * phi_k, encoded ((k, weight), ...)
PhiCombo = tuple

SCHEME_NAMES = ("EI-E1", "EI-SW21", "EI-SW22", "EI-K4", "EI-SW4")


@dataclass(frozen=True)
class SchemeTableau:
    """Stage nodes and symbolic phi-combination coefficients of one scheme."""

    name: str
    s: int
    c: tuple
    a: tuple  # a[i] = row of PhiCombo entries for stages j < i
    b: tuple  # one PhiCombo per stage
    c2: float | None = None


@dataclass(frozen=True)
class SolveStats:
    steps: int
    phi_evals: int  # distinct (t, k) mode-block tables built
    phi_applies: int  # matrix-function actions applied
    wall_time: float


@dataclass
class SolveResult:
    y_final: StateVector
    snapshots: list | None
    stats: SolveStats


def combine_combos(combos) -> dict:
    """Collapse an iterable of (k, weight) combos into {k: total weight}."""
    total: dict[int, float] = {}
    for combo in combos:
        for k, w in combo:
            total[k] = total.get(k, 0.0) + w
    return {k: w for k, w in total.items() if w != 0.0}


def _check_tableau(tab: SchemeTableau) -> None:
    if tab.c[0] != 0.0:
        raise ValueError(f"{tab.name}: first node must be 0")
    for i in range(tab.s):
        row_sum = combine_combos(tab.a[i])
        expected = {1: tab.c[i]} if tab.c[i] != 0.0 else {}
        if row_sum != expected:
            raise ValueError(f"{tab.name}: row {i + 1} sums to {row_sum}, expected {expected}")
    if combine_combos(tab.b) != {1: 1.0}:
        raise ValueError(f"{tab.name}: weights do not collapse to phi_1")


def build_tableau(name: str, c2: float | None = None) -> SchemeTableau:
    """Coefficient table for one of the five schemes.

    EI-SW21 and EI-SW22 take their free node c2 in (0, 1]; the other
    schemes ignore it.
    """
    key = name.upper()
    if not key.startswith("EI-"):
        key = "EI-" + key
    if key not in SCHEME_NAMES:
        raise UnknownSchemeError(f"unknown scheme {name!r}; choose from {', '.join(SCHEME_NAMES)}")
    if key in ("EI-SW21", "EI-SW22"):
        if c2 is None:
            raise ConfigError(f"{key} requires the free node c2")
        if not 0.0 < c2 <= 1.0:
            raise ConfigError(f"{key} needs c2 in (0, 1], got {c2}")

    if key == "EI-E1":
        tab = SchemeTableau(key, 1, (0.0,), ((),), (((1, 1.0),),))
    elif key == "EI-SW21":
        tab = SchemeTableau(
            key,
            2,
            (0.0, c2),
            ((), (((1, c2),),)),
            (((1, 1.0), (2, -1.0 / c2)), ((2, 1.0 / c2),)),
            c2=c2,
        )
    elif key == "EI-SW22":
        tab = SchemeTableau(
            key,
            2,
            (0.0, c2),
            ((), (((1, c2),),)),
            (((1, 1.0 - 0.5 / c2),), ((1, 0.5 / c2),)),
            c2=c2,
        )
    elif key == "EI-K4":
        tab = SchemeTableau(
            key,
            4,
            (0.0, 0.5, 0.5, 1.0),
            (
                (),
                (((1, 0.5),),),
                (((1, 0.5), (2, -1.0)), ((2, 1.0),)),
                (((1, 1.0), (2, -2.0)), (), ((2, 2.0),)),
            ),
            (
                ((1, 1.0), (2, -3.0), (3, 4.0)),
                ((2, 2.0), (3, -4.0)),
                ((2, 2.0), (3, -4.0)),
                ((2, -1.0), (3, 4.0)),
            ),
        )
    else:  # EI-SW4
        tab = SchemeTableau(
            key,
            4,
            (0.0, 0.5, 0.5, 1.0),
            (
                (),
                (((1, 0.5),),),
                (((1, 0.5), (2, -0.5)), ((2, 0.5),)),
                (((1, 1.0), (2, -2.0)), ((2, -2.0),), ((2, 4.0),)),
            ),
            (
                ((1, 1.0), (2, -3.0), (3, 4.0)),
                (),
                ((2, 4.0), (3, -8.0)),
                ((2, -1.0), (3, 4.0)),
            ),
        )
    _check_tableau(tab)
    return tab


def _group_row(combos) -> list:
    """[(k, [(source index, weight), ...]), ...] for one coefficient row."""
    grouped: dict[int, list] = {}
    for j, combo in enumerate(combos):
        for k, w in combo:
            grouped.setdefault(k, []).append((j, w))
    return sorted(grouped.items())


def _forcing_from_spec(spec: ProblemSpec, n: int):
    g = nonlinearity(spec.g)
    h = nonlinearity(spec.h)

    def forcing(y: np.ndarray) -> np.ndarray:
        out = np.zeros_like(y)
        out[n:] = g(y[:n]) + h(y[n:])
        return out

    return forcing


def _step_stacked(prop, a_grouped, b_grouped, c_nodes, forcing, tau, y):
    # blow-ups surface as InstabilityError, so numpy's own overflow
    # warnings on the way there are suppressed
    with np.errstate(over="ignore", invalid="ignore"):
        f_stages = [forcing(y)]
        for i in range(1, len(c_nodes)):
            ci = c_nodes[i]
            yi = prop.apply_stacked(0, tau, y, ci)
            for k, pairs in a_grouped[i]:
                vec = pairs[0][1] * f_stages[pairs[0][0]]
                for j, w in pairs[1:]:
                    vec = vec + w * f_stages[j]
                yi += tau * prop.apply_stacked(k, tau, vec, ci)
            if not np.all(np.isfinite(yi)):
                raise InstabilityError(f"non-finite values in stage {i + 1}")
            f_stages.append(forcing(yi))
        y_next = prop.apply_stacked(0, tau, y)
        for k, pairs in b_grouped:
            vec = pairs[0][1] * f_stages[pairs[0][0]]
            for j, w in pairs[1:]:
                vec = vec + w * f_stages[j]
            y_next += tau * prop.apply_stacked(k, tau, vec)
        if not np.all(np.isfinite(y_next)):
            raise InstabilityError("non-finite values in the step update")
    return y_next


def step(
    prop: BlockPropagator,
    tableau: SchemeTableau,
    spec: ProblemSpec,
    tau: float,
    y_n: StateVector,
) -> StateVector:
    """One scheme step of size tau from y_n."""
    if not tau > 0:
        raise ValueError(f"step size must be positive, got {tau}")
    forcing = _forcing_from_spec(spec, prop.n)
    y = _step_stacked(
        prop,
        [_group_row(row) for row in tableau.a],
        _group_row(tableau.b),
        tableau.c,
        forcing,
        tau,
        y_n.stacked(),
    )
    return StateVector.from_stacked(y)


def solve(
    prop: BlockPropagator,
    tableau: SchemeTableau,
    spec: ProblemSpec,
    M: int,
    snapshot_every: int | None = None,
    forcing=None,
) -> SolveResult:
    """M constant steps of size T/M from the sampled initial data to T."""
    if M < 1:
        raise ValueError(f"step count must be positive, got {M}")
    tau = spec.T / M
    y = initial_state(spec, prop.n).stacked()
    if forcing is None:
        forcing = _forcing_from_spec(spec, prop.n)
    a_grouped = [_group_row(row) for row in tableau.a]
    b_grouped = _group_row(tableau.b)

    built0, applied0 = prop.tables_built, prop.applies
    snapshots = [] if snapshot_every else None
    start = time.perf_counter()
    for i in range(M):
        try:
            y = _step_stacked(prop, a_grouped, b_grouped, tableau.c, forcing, tau, y)
        except InstabilityError as exc:
            raise InstabilityError(
                f"{tableau.name} unstable at step {i + 1} of {M} (t = {(i + 1) * tau:.6g}): {exc}",
                step=i + 1,
                time=(i + 1) * tau,
            ) from exc
        if snapshots is not None and (i + 1) % snapshot_every == 0 and i + 1 < M:
            snapshots.append(((i + 1) * tau, StateVector.from_stacked(y)))
    wall = time.perf_counter() - start
    if snapshots is not None:
        snapshots = [(t, s) for t, s in snapshots if t < spec.T]
        snapshots.append((spec.T, StateVector.from_stacked(y)))
    stats = SolveStats(
        steps=M,
        phi_evals=prop.tables_built - built0,
        phi_applies=prop.applies - applied0,
        wall_time=wall,
    )
    return SolveResult(StateVector.from_stacked(y), snapshots, stats)


def rk4_step(f, tau: float, y: np.ndarray) -> np.ndarray:
    """Classic fourth-order Runge-Kutta step."""
    k1 = f(y)
    k2 = f(y + 0.5 * tau * k1)
    k3 = f(y + 0.5 * tau * k2)
    k4 = f(y + tau * k3)
    return y + (tau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def assemble_sparse_A(op: GridOperator, spec: ProblemSpec) -> sp.csr_matrix:
    """Sparse 2n-by-2n system matrix [[0, I], [-alpha*S-delta*I, -beta*S-gamma*I]]."""
    n = op.n
    s_mat = sp.csr_matrix(op.entries)
    eye = sp.identity(n, format="csr")
    lower_left = -spec.alpha * s_mat - spec.delta * eye
    lower_right = -spec.beta * s_mat - spec.gamma * eye
    return sp.bmat([[None, eye], [lower_left, lower_right]], format="csr")


def rk4_baseline_solve(op: GridOperator, spec: ProblemSpec, M: int) -> SolveResult:
    """Fixed-step classical RK4 on y' = A y + F(y), the non-exponential comparator."""
    if M < 1:
        raise ValueError(f"step count must be positive, got {M}")
    a_mat = assemble_sparse_A(op, spec)
    forcing = _forcing_from_spec(spec, op.n)

    def f(y):
        return a_mat @ y + forcing(y)

    tau = spec.T / M
    y = initial_state(spec, op.n).stacked()
    start = time.perf_counter()
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(M):
            y = rk4_step(f, tau, y)
            if not np.all(np.isfinite(y)):
                raise InstabilityError(
                    f"RK4 unstable at step {i + 1} of {M} (t = {(i + 1) * tau:.6g})",
                    step=i + 1,
                    time=(i + 1) * tau,
                )
    wall = time.perf_counter() - start
    stats = SolveStats(steps=M, phi_evals=0, phi_applies=0, wall_time=wall)
    return SolveResult(StateVector.from_stacked(y), None, stats)


def merged_damping_solve(
    op: GridOperator,
    spec: ProblemSpec,
    tableau: SchemeTableau,
    M: int,
    fact=None,
    snapshot_every: int | None = None,
) -> SolveResult:
    """Solve with the damping terms folded into the nonlinearity.

    The linear part keeps only [[0, I], [-alpha*S - delta*I, 0]] (the
    cosine/sine propagator), while F gains -beta*S*w - gamma*w. This is the
    comparison variant; it loses accuracy for damped waves and goes unstable
    for the stiff beam operator at step sizes the full propagator handles.
    """
    import dataclasses

    lin_spec = dataclasses.replace(spec, beta=0.0, gamma=0.0)
    prop = build_propagator(op, lin_spec, fact=fact)
    g = nonlinearity(spec.g)
    h = nonlinearity(spec.h)
    s_mat = op.entries
    beta, gamma = spec.beta, spec.gamma
    n = op.n

    def forcing(y: np.ndarray) -> np.ndarray:
        w = y[n:]
        out = np.zeros_like(y)
        out[n:] = g(y[:n]) + h(w) - beta * (s_mat @ w) - gamma * w
        return out

    return solve(prop, tableau, lin_spec, M, snapshot_every=snapshot_every, forcing=forcing)
