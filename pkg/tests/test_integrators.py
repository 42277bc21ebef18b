"""Scheme tableaus, stepping, the RK4 baseline, and the merged-damping variant."""

import math

import numpy as np
import pytest

from wavebeam.discretize import (
    ProblemSpec,
    Profile,
    StateVector,
    build_beam_operator,
    build_wave_operator,
    initial_state,
)
from wavebeam.errors import ConfigError, InstabilityError, UnknownSchemeError
from wavebeam.integrators import (
    build_tableau,
    combine_combos,
    merged_damping_solve,
    rk4_baseline_solve,
    rk4_step,
    solve,
    step,
)
from wavebeam.oracles import dense_phi
from wavebeam.propagator import apply_phi, build_propagator

ALL_SCHEMES = [("EI-E1", None), ("EI-SW21", 0.6), ("EI-SW22", 0.6), ("EI-K4", None), ("EI-SW4", None)]


def damped_wave_setup(n=8, g="sin", T=1.0):
    spec = ProblemSpec(
        alpha=1.0,
        beta=0.01,
        gamma=0.1,
        delta=0.5,
        g=g,
        p=Profile("sine", (1.0, math.pi)),
        q=Profile("cosine", (0.5, math.pi)),
        T=T,
    )
    op = build_wave_operator(n, spec.ell)
    return spec, op, build_propagator(op, spec)


class TestTableauContents:
    def test_e1(self):
        tab = build_tableau("EI-E1")
        assert tab.s == 1 and tab.c == (0.0,)
        assert tab.b == (((1, 1.0),),)

    def test_sw21_weights(self):
        tab = build_tableau("EI-SW21", 0.75)
        assert combine_combos([tab.b[0]]) == {1: 1.0, 2: -4.0 / 3.0}
        assert combine_combos([tab.b[1]]) == {2: 4.0 / 3.0}
        assert tab.a[1][0] == ((1, 0.75),)

    def test_sw22_uses_only_phi1(self):
        tab = build_tableau("EI-SW22", 0.25)
        ks = {k for combo in tab.b for k, _ in combo}
        assert ks == {1}
        assert combine_combos([tab.b[1]]) == {1: 2.0}

    def test_k4_weight_row(self):
        tab = build_tableau("EI-K4")
        assert combine_combos([tab.b[0]]) == {1: 1.0, 2: -3.0, 3: 4.0}
        assert combine_combos([tab.b[1]]) == {2: 2.0, 3: -4.0}
        assert combine_combos([tab.b[2]]) == {2: 2.0, 3: -4.0}
        assert combine_combos([tab.b[3]]) == {2: -1.0, 3: 4.0}

    def test_sw4_third_stage(self):
        tab = build_tableau("EI-SW4")
        assert combine_combos([tab.a[3][2]]) == {2: 4.0}
        assert tab.b[1] == ()

    def test_name_normalization(self):
        assert build_tableau("sw4").name == "EI-SW4"
        assert build_tableau("ei-k4").name == "EI-K4"

    def test_unknown_scheme(self):
        with pytest.raises(UnknownSchemeError):
            build_tableau("EI-RK9")

    def test_missing_or_bad_c2(self):
        with pytest.raises(ConfigError):
            build_tableau("EI-SW21")
        with pytest.raises(ConfigError):
            build_tableau("EI-SW22", 0.0)
        with pytest.raises(ConfigError):
            build_tableau("EI-SW21", 1.5)


class TestTableauIdentities:
    @pytest.mark.parametrize("name,c2", ALL_SCHEMES)
    def test_row_sums_collapse_to_c_phi1(self, name, c2):
        tab = build_tableau(name, c2)
        for i in range(tab.s):
            total = combine_combos(tab.a[i])
            expected = {1: tab.c[i]} if tab.c[i] != 0.0 else {}
            assert total == expected, f"{name} stage {i + 1}"

    @pytest.mark.parametrize("name,c2", ALL_SCHEMES)
    def test_weights_collapse_to_phi1(self, name, c2):
        tab = build_tableau(name, c2)
        assert combine_combos(tab.b) == {1: 1.0}


class TestStep:
    def test_zero_forcing_reduces_to_exponential(self):
        spec, op, prop = damped_wave_setup(g="zero")
        y = initial_state(spec, op.n)
        tau = 0.17
        for name, c2 in ALL_SCHEMES:
            got = step(prop, build_tableau(name, c2), spec, tau, y)
            want = apply_phi(prop, 0, tau, y)
            assert np.array_equal(got.stacked(), want.stacked()), name

    @pytest.mark.parametrize("name,c2", ALL_SCHEMES)
    def test_constant_forcing_is_exact(self, name, c2):
        # weight consistency: one step reproduces e^{tau A} y0 + tau phi_1(tau A) c
        spec, op, prop = damped_wave_setup(g="zero")
        rng = np.random.default_rng(11)
        const = rng.standard_normal(2 * op.n)

        def forcing(_y):
            return const

        tau = 0.21
        import dataclasses

        spec1 = dataclasses.replace(spec, T=tau)
        got = solve(prop, build_tableau(name, c2), spec1, 1, forcing=forcing).y_final.stacked()
        y0 = initial_state(spec, op.n).stacked()
        want = prop.apply_stacked(0, tau, y0) + tau * prop.apply_stacked(1, tau, const)
        err = np.max(np.abs(got - want)) / np.max(np.abs(want))
        assert err <= 1e-10, f"{name}: {err:.2e}"

    def test_e1_single_mode_hand_value(self):
        # one spatial mode: the step is a 2x2 computation
        spec = ProblemSpec(alpha=1.0, beta=0.1, g="cube", p=Profile("sine", (2.0, math.pi)), T=1.0)
        op = build_wave_operator(1, 1.0)
        prop = build_propagator(op, spec)
        y0 = initial_state(spec, 1)
        assert y0.u[0] == 2.0 and y0.w[0] == 0.0
        tau = 0.3
        got = step(prop, build_tableau("EI-E1"), spec, tau, y0).stacked()
        g_mat = np.array([[0.0, 1.0], [-op.entries[0, 0], -0.1 * op.entries[0, 0]]])
        f0 = np.array([0.0, y0.u[0] ** 3])
        want = dense_phi(0, tau * g_mat) @ np.array([2.0, 0.0]) + tau * (
            dense_phi(1, tau * g_mat) @ f0
        )
        assert np.allclose(got, want, rtol=1e-12)

    def test_instability_reported_with_step_index(self):
        # explosive growth: g(u) = u^3 from large data blows up quickly
        spec = ProblemSpec(alpha=1.0, g="cube", p=Profile("sine", (50.0, math.pi)), T=50.0)
        op = build_wave_operator(6, spec.ell)
        prop = build_propagator(op, spec)
        with pytest.raises(InstabilityError) as exc_info:
            solve(prop, build_tableau("EI-E1"), spec, 10)
        assert exc_info.value.step is not None
        assert exc_info.value.time is not None


class TestSolve:
    def test_linear_single_step_equals_exponential(self):
        spec, op, prop = damped_wave_setup(g="zero", T=0.8)
        res = solve(prop, build_tableau("EI-SW4"), spec, 1)
        want = apply_phi(prop, 0, spec.T, initial_state(spec, op.n))
        assert np.allclose(res.y_final.stacked(), want.stacked(), rtol=1e-13)

    def test_error_halves_when_steps_double(self):
        spec, op, prop = damped_wave_setup(g="sin", T=1.0)
        ref = solve(prop, build_tableau("EI-SW4"), spec, 4096).y_final.stacked()
        tab = build_tableau("EI-E1")
        errs = [
            np.linalg.norm(solve(prop, tab, spec, M).y_final.stacked() - ref)
            for M in (64, 128, 256)
        ]
        assert 1.7 <= errs[0] / errs[1] <= 2.3
        assert 1.7 <= errs[1] / errs[2] <= 2.3

    def test_determinism_bitwise(self):
        spec, op, prop = damped_wave_setup(g="sin")
        r1 = solve(prop, build_tableau("EI-K4"), spec, 40)
        r2 = solve(prop, build_tableau("EI-K4"), spec, 40)
        assert np.array_equal(r1.y_final.stacked(), r2.y_final.stacked())

    def test_snapshot_times(self):
        spec, op, prop = damped_wave_setup(g="sin", T=1.0)
        res = solve(prop, build_tableau("EI-E1"), spec, 10, snapshot_every=3)
        times = [t for t, _ in res.snapshots]
        assert times == sorted(times)
        assert all(t2 > t1 for t1, t2 in zip(times, times[1:]))
        assert times[-1] == spec.T

    def test_phi_evaluation_counting_k4(self):
        # EI-K4 needs 7 block tables: (c=1/2: k=0,1,2) + (c=1: k=0,1,2,3),
        # all built in step one; 12 actions per step thereafter
        spec, op, prop = damped_wave_setup(g="sin")
        res = solve(prop, build_tableau("EI-K4"), spec, 3)
        assert res.stats.phi_evals == 7
        assert res.stats.phi_applies == 12 * 3
        # same step size again: every (tau, c, k) table is a cache hit
        res2 = solve(prop, build_tableau("EI-K4"), spec, 3)
        assert res2.stats.phi_evals == 0
        assert res2.stats.phi_applies == 12 * 3
        # a different step size builds a fresh set
        res3 = solve(prop, build_tableau("EI-K4"), spec, 6)
        assert res3.stats.phi_evals == 7

    def test_phi_evaluation_counting_e1(self):
        spec, op, prop = damped_wave_setup(g="sin")
        res = solve(prop, build_tableau("EI-E1"), spec, 5)
        assert res.stats.phi_evals == 2  # exp and phi_1 at the full step
        assert res.stats.phi_applies == 2 * 5
        assert res.stats.steps == 5


class TestRK4Baseline:
    def test_scalar_stability_polynomial(self):
        tau = 0.37
        got = rk4_step(lambda y: -y, tau, np.array([1.0]))[0]
        want = 1.0 - tau + tau**2 / 2 - tau**3 / 6 + tau**4 / 24
        assert got == pytest.approx(want, rel=1e-15)

    def test_agrees_with_exponential_integrator(self):
        # non-stiff smooth problem: both converge to the same solution
        spec, op, prop = damped_wave_setup(n=8, g="sin", T=0.1)
        res_rk = rk4_baseline_solve(op, spec, 10_000)
        res_ei = solve(prop, build_tableau("EI-K4"), spec, 10_000)
        diff = np.max(np.abs(res_rk.y_final.stacked() - res_ei.y_final.stacked()))
        assert diff <= 1e-8

    def test_beam_cfl_violation_blows_up(self):
        spec = ProblemSpec(
            alpha=15.0, beta=3e-6, gamma=3e-4, delta=10.0, g="neg_five_cube",
            p=Profile("gaussian", (5.0, 100.0, 2.0 / 3.0)), T=1.0,
        )
        op = build_beam_operator(200, spec.ell)
        with pytest.raises(InstabilityError) as exc_info:
            rk4_baseline_solve(op, spec, 100)
        assert exc_info.value.step is not None


class TestMergedDamping:
    def test_identical_when_undamped(self):
        spec = ProblemSpec(
            alpha=2.0, g="sin", p=Profile("sine", (1.0, math.pi)),
            q=Profile("cosine", (1.0, math.pi)), T=0.5,
        )
        op = build_wave_operator(10, spec.ell)
        prop = build_propagator(op, spec)
        tab = build_tableau("EI-SW21", 0.5)
        direct = solve(prop, tab, spec, 16).y_final.stacked()
        merged = merged_damping_solve(op, spec, tab, 16).y_final.stacked()
        assert np.max(np.abs(direct - merged)) <= 1e-12 * max(np.max(np.abs(direct)), 1.0)

    def test_merged_loses_accuracy_with_damping(self):
        spec = ProblemSpec(
            alpha=1.0, beta=1e-2, gamma=1e-1, delta=1.0, g="neg_five_cube",
            p=Profile("sine", (5.0, 5 * math.pi)), q=Profile("cosine", (5.0, 10 * math.pi)), T=1.0,
        )
        op = build_wave_operator(32, spec.ell)
        prop = build_propagator(op, spec)
        ref = solve(prop, build_tableau("EI-K4"), spec, 8192).y_final.stacked()
        tab = build_tableau("EI-SW21", 1.0 / 3.0)
        M = 256
        e_full = np.linalg.norm(solve(prop, tab, spec, M).y_final.stacked() - ref)
        e_merged = np.linalg.norm(merged_damping_solve(op, spec, tab, M).y_final.stacked() - ref)
        assert e_merged > 5.0 * e_full
