import cmath
import math

import numpy as np
import pytest

from cgl.grid import Field, Grid, grad_norm_sq, inner, laplacian, norm2, sine_mode
from cgl.kernels import KernelParams, g
from cgl.operators import (ContinuationError, InvalidOperatorError, OperatorSpec,
                           ResolventError, accretivity_probe, apply_A, apply_B,
                           apply_L, epsilon_continuation, resolvent)
from cgl.params import ModelParams, ray_coefficient
from cgl.rng import Rng
import cgl.operators as operators_mod


def make_spec(grid=None, theta=0.6, m=0.5, p=3.0, eps=1e-3, M=10.0, b=0.5, gamma=0.1):
    grid = grid or Grid(1, 48)
    a = (1.0 + 0.2j) * cmath.exp(-1j * theta)
    return OperatorSpec(ModelParams(theta, m, p, a, b, gamma), KernelParams(eps, M), grid)


def random_field(grid, seed, scale=1.0):
    return Field(Rng(seed).complex_box(grid.size, scale), grid)


class TestSpecValidation:
    def test_rejects_inadmissible_params(self):
        with pytest.raises(InvalidOperatorError):
            OperatorSpec(ModelParams(0.0, 0.5, 3.0, a=-1.0), KernelParams(1e-3), Grid(1, 8))

    def test_rejects_singular_kernel_without_regularization(self):
        with pytest.raises(InvalidOperatorError):
            make_spec(eps=0.0, m=0.5)

    def test_linear_regime_allows_eps_zero(self):
        make_spec(eps=0.0, m=1.0)


class TestApplyOperators:
    def test_L_reduces_to_negative_laplacian(self):
        spec = make_spec(theta=0.0, m=1.0, eps=0.0, b=0.0, gamma=0.0)
        spec = OperatorSpec(ModelParams(0.0, 1.0, 3.0, 1.0, 0.0, 0.0),
                            KernelParams(0.0), spec.grid)
        u = random_field(spec.grid, 1)
        np.testing.assert_allclose(apply_L(u, spec).values, -laplacian(u).values)

    def test_L_on_eigenmode(self):
        spec = make_spec()
        k = 3
        mode = sine_mode(spec.grid, k)
        expected = spec.params.phase * (spec.grid.eigenvalue(k) + spec.params.gamma)
        np.testing.assert_allclose(apply_L(mode, spec).values, expected * mode.values,
                                   rtol=1e-12)

    def test_L_quadratic_form_identity(self):
        spec = make_spec()
        u = random_field(spec.grid, 2)
        q = inner(apply_L(u, spec), u).real
        expected = math.cos(spec.params.theta) * grad_norm_sq(u) \
            + spec.params.rotated(spec.params.gamma).real * norm2(u) ** 2
        assert q == pytest.approx(expected, rel=1e-12)
        assert q >= 0.0

    def test_B_linear_regime(self):
        spec = OperatorSpec(ModelParams(0.4, 1.0, 3.0, 1 + 0.5j, 0.0, 0.0),
                            KernelParams(0.0), Grid(1, 16))
        u = random_field(spec.grid, 3)
        np.testing.assert_allclose(apply_B(u, spec).values,
                                   spec.params.rotated(1 + 0.5j) * u.values)

    def test_B_at_zero(self):
        spec = make_spec()
        assert norm2(apply_B(Field.zero(spec.grid), spec)) == 0.0

    def test_B_rejects_multivalued_domain(self):
        spec = make_spec(m=1.0, eps=0.0)
        bad = object.__new__(OperatorSpec)
        object.__setattr__(bad, "params", ModelParams(0.6, 0.5, 3.0, spec.params.a))
        object.__setattr__(bad, "kernel", KernelParams(0.0))
        object.__setattr__(bad, "grid", spec.grid)
        with pytest.raises(InvalidOperatorError):
            apply_B(random_field(spec.grid, 4), bad)

    def test_A_is_sum(self):
        spec = make_spec()
        u = random_field(spec.grid, 5)
        np.testing.assert_allclose(
            apply_A(u, spec).values,
            apply_L(u, spec).values + apply_B(u, spec).values)

    def test_monotonicity_random_pairs(self):
        saturated = OperatorSpec(
            ModelParams(0.2, 0.0, 3.0, ray_coefficient(1.0, 0.2), 0.5, 0.1),
            KernelParams(1e-3, 10.0), Grid(1, 48))
        for spec in (make_spec(), saturated, make_spec(m=1.0, eps=0.0, theta=-0.8)):
            rng = Rng(6)
            for _ in range(50):
                u = Field(rng.complex_box(spec.grid.size, 2.0), spec.grid)
                v = Field(rng.complex_box(spec.grid.size, 2.0), spec.grid)
                dA = apply_A(u, spec) - apply_A(v, spec)
                defect = inner(dA, u - v).real
                assert defect >= -1e-10 * (1 + norm2(dA)) * (1 + norm2(u - v))


class TestResolvent:
    def test_roundtrip_recovers_known_solution(self):
        spec = make_spec()
        u = random_field(spec.grid, 7, scale=2.0)
        lam = 0.37
        F = Field(u.values + lam * apply_A(u, spec).values, spec.grid)
        res = resolvent(F, lam, spec, tol=1e-12)
        assert norm2(res.u - u) <= 10 * 1e-12 * (1 + norm2(F))
        assert res.residual <= 1e-12 * (1 + norm2(F))
        assert res.certificate >= -1e-12

    def test_linear_modal_division(self):
        spec = OperatorSpec(ModelParams(0.5, 1.0, 3.0, 0.8 + 0.1j, 0.0, 0.2 + 0.1j),
                            KernelParams(0.0), Grid(1, 32))
        lam = 0.8
        modes, weights = (1, 4, 9), (1.0, -0.5 + 0.3j, 0.25j)
        F = Field(sum(w * sine_mode(spec.grid, k).values for k, w in zip(modes, weights)),
                  spec.grid)
        expected = sum(
            w / (1 + lam * spec.params.phase
                 * (spec.grid.eigenvalue(k) + spec.params.a + spec.params.gamma))
            * sine_mode(spec.grid, k).values
            for k, w in zip(modes, weights))
        res = resolvent(F, lam, spec, tol=1e-13)
        np.testing.assert_allclose(res.u.values, expected, atol=1e-12)

    def test_nonexpansive_in_data(self):
        spec = make_spec(m=0.3, eps=1e-2)
        rng = Rng(8)
        for lam in (0.05, 1.0, 5.0):
            F1 = Field(rng.complex_box(spec.grid.size, 2.0), spec.grid)
            F2 = Field(rng.complex_box(spec.grid.size, 2.0), spec.grid)
            u1 = resolvent(F1, lam, spec, tol=1e-12).u
            u2 = resolvent(F2, lam, spec, tol=1e-12).u
            assert norm2(u1 - u2) <= (1 + 1e-10) * norm2(F1 - F2)

    def test_2d_roundtrip(self):
        spec = make_spec(grid=Grid(2, 12))
        u = random_field(spec.grid, 9, scale=1.5)
        F = Field(u.values + 2.0 * apply_A(u, spec).values, spec.grid)
        res = resolvent(F, 2.0, spec, tol=1e-12)
        assert norm2(res.u - u) <= 1e-10

    def test_rejects_nonpositive_lambda(self):
        spec = make_spec()
        with pytest.raises(ValueError):
            resolvent(Field.zero(spec.grid), 0.0, spec)

    def test_failure_carries_best_iterate_and_history(self, monkeypatch):
        spec = make_spec()
        monkeypatch.setattr(operators_mod, "MAX_FIXED_POINT", 1)
        F = random_field(spec.grid, 10, scale=3.0)
        with pytest.raises(ResolventError) as err:
            resolvent(F, 1.0, spec, tol=1e-10, max_iter=0)
        assert err.value.history
        assert isinstance(err.value.best, Field)

    def test_zero_rhs_gives_zero(self):
        spec = make_spec()
        res = resolvent(Field.zero(spec.grid), 1.0, spec, tol=1e-12)
        assert norm2(res.u) <= 1e-12

    def test_linear_regime_solves_in_one_factorization(self):
        spec = make_spec(m=1.0, eps=0.0, b=0.0)
        res = resolvent(random_field(spec.grid, 20), 0.5, spec)
        assert res.iterations == 1

    def test_fixed_point_fallback_rescues_bad_newton_directions(self, monkeypatch):
        # sabotage the direction solver so every line search fails with a
        # fresh factorization; the damped fixed-point stage must still land
        spec = make_spec(eps=1e-2)

        def garbage_solver(vals, spec_, lam):
            return lambda R: np.full_like(vals, 1e6 + 1e6j)

        monkeypatch.setattr(operators_mod, "_make_solver_1d", garbage_solver)
        u = random_field(spec.grid, 21)
        F = Field(u.values + 0.05 * apply_A(u, spec).values, spec.grid)
        res = resolvent(F, 0.05, spec, tol=1e-10)
        assert norm2(res.u - u) <= 1e-8
        assert res.iterations > 1


class TestEpsilonContinuation:
    def _stationary_spec(self, m):
        theta = 0.3
        a = ray_coefficient(1.0, theta) if m == 0.0 else (1 + 0.1j) * cmath.exp(-1j * theta)
        return OperatorSpec(ModelParams(theta, m, 3.0, a, 0.5, 0.0),
                            KernelParams(1e-2, 100.0), Grid(1, 63))

    def test_linear_regime_is_single_solve(self):
        spec = OperatorSpec(ModelParams(0.2, 1.0, 3.0, 1.0, 0.0, 0.1),
                            KernelParams(0.0), Grid(1, 32))
        F = sine_mode(spec.grid, 1, 2.0)
        u, U, report = epsilon_continuation(F, spec, [0.5, 0.1])
        assert U is None and len(report.entries) == 1 and report.completed

    def test_cauchy_differences_decrease(self):
        spec = self._stationary_spec(0.5)
        F = sine_mode(spec.grid, 1, 2.0)
        u, U, report = epsilon_continuation(F, spec, [10.0**-k for k in range(1, 9)])
        diffs = report.diffs
        assert all(b < a for a, b in zip(diffs, diffs[1:]))
        assert U is None

    def test_saturated_section_extraction(self):
        spec = self._stationary_spec(0.0)
        F = sine_mode(spec.grid, 1, 2.0)
        u, U, report = epsilon_continuation(F, spec, [10.0**-k for k in range(1, 9)])
        assert np.max(np.abs(U.values)) <= 1.0 + 1e-12
        eps_last = 1e-8
        big = np.abs(u.values) > 10 * eps_last
        expected = u.values[big] / np.abs(u.values[big])
        np.testing.assert_allclose(U.values[big], expected, atol=1e-12)
        # the per-eps sup norms of the uniform-boundedness step are recorded
        assert all(e.grad_norm > 0 and e.lap_norm > 0 for e in report.entries)

    def test_2d_saturated_continuation(self):
        # amplitude keeps |u| away from the deep-saturation regime, where the
        # first one or two Cauchy differences can be non-monotone
        theta = 0.3
        spec = OperatorSpec(ModelParams(theta, 0.0, 3.0, ray_coefficient(1.0, theta), 0.3, 0.0),
                            KernelParams(1e-2, 100.0), Grid(2, 12))
        F = sine_mode(spec.grid, (1, 1), 8.0)
        u, U, report = epsilon_continuation(F, spec, [10.0**-k for k in range(1, 7)])
        diffs = report.diffs
        assert all(b < a for a, b in zip(diffs, diffs[1:]))
        assert np.max(np.abs(U.values)) <= 1.0 + 1e-12

    def test_schedule_validation(self):
        spec = self._stationary_spec(0.5)
        F = sine_mode(spec.grid, 1)
        with pytest.raises(ValueError):
            epsilon_continuation(F, spec, [])
        with pytest.raises(ValueError):
            epsilon_continuation(F, spec, [0.1, 0.2])
        with pytest.raises(ValueError):
            epsilon_continuation(F, spec, [0.1, 1e-15])

    def test_abort_carries_partial_report(self, monkeypatch):
        spec = self._stationary_spec(0.5)
        F = sine_mode(spec.grid, 1)
        calls = []
        real = operators_mod.resolvent

        def flaky(F_, lam, spec_, tol=1e-10, max_iter=50, x0=None):
            calls.append(spec_.kernel.epsilon)
            if len(calls) >= 3:
                raise ResolventError("forced", F_, [1.0])
            return real(F_, lam, spec_, tol=tol, max_iter=max_iter, x0=x0)

        monkeypatch.setattr(operators_mod, "resolvent", flaky)
        with pytest.raises(ContinuationError) as err:
            epsilon_continuation(F, spec, [1e-1, 1e-2, 1e-3, 1e-4])
        assert len(err.value.report.entries) == 2
        assert not err.value.report.completed


class TestAccretivityProbe:
    def test_real_fields_have_real_pairing(self):
        spec = make_spec(m=0.5, eps=0.1, b=0.0)
        x = spec.grid.coords()
        u = Field(np.sin(np.pi * x).astype(complex), spec.grid)
        defect = accretivity_probe(u, spec)
        gu = Field(g(u.values, 0.5, 0.1), spec.grid)
        pairing = inner(Field(-laplacian(u).values, spec.grid), gu)
        assert abs(pairing.imag) <= 1e-14 * abs(pairing.real)
        assert defect >= -1e-12 * (1 + abs(pairing.real))

    def test_vanishes_identically_at_m_one(self):
        spec = make_spec(m=1.0, eps=0.0)
        u = random_field(spec.grid, 11)
        assert accretivity_probe(u, spec) == pytest.approx(0.0, abs=1e-12)

    def test_mesh_refinement_stays_bounded_below(self):
        defects = []
        for n in (63, 127, 255):
            spec = OperatorSpec(
                ModelParams(0.5, 0.5, 3.0, (1 + 0.2j) * cmath.exp(-0.5j), 0.0, 0.0),
                KernelParams(0.1, 1e8), Grid(1, n))
            x = spec.grid.coords()
            u = Field((1 + 1j) * np.sin(np.pi * x), spec.grid)
            defects.append(accretivity_probe(u, spec))
        # the pairing inherits the sector bound through summation by parts,
        # so the defect is nonnegative at every h (stronger than the O(h^2)
        # lower envelope the continuum argument alone would give)
        for n, d in zip((63, 127, 255), defects):
            h = 1.0 / (n + 1)
            assert d >= -10.0 * h**2

    def test_random_fields_nonnegative(self):
        spec = make_spec(m=0.7, eps=1e-3, b=0.0)
        rng = Rng(12)
        for _ in range(50):
            u = Field(rng.complex_normal(spec.grid.size, 2.0), spec.grid)
            assert accretivity_probe(u, spec) >= -1e-10 * (1 + norm2(laplacian(u)) * norm2(u))
