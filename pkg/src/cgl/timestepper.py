"""Implicit time integration u_t + A u = e^{i theta} f by backward Euler.

Each step is one resolvent application,

    u^{n+1} = (I + tau A)^{-1} (u^n + tau e^{i theta} f^{n+1}),

with the forcing evaluated at t_{n+1} (fully implicit pairing).  Pairing the
step equation with u^{n+1} yields an exact algebraic energy identity

    1/2||u^{n+1}||^2 - 1/2||u^n||^2 + 1/2||u^{n+1}-u^n||^2
        + tau Re<A u^{n+1}, u^{n+1}> = tau Re<e^{i theta} f^{n+1}, u^{n+1}>,

whose A-term splits into individually nonnegative gradient, damping,
absorption and zeroth-order pieces under the admissibility cones.  The
ledger records every term per step together with the identity residual;
with f = 0 the L^2 norm is exactly nonincreasing.

Only backward Euler is certified here: it is the scheme that inherits the
nonexpansive resolvent structure.  (An explicit reference integrator for
small smooth problems lives in the oracle module and is never used for
certification.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .diagnostics import EnergyLedger
from .grid import Field, Grid, grad_norm_sq, inner, norm2, norm_q, read_snapshot, sine_mode
from .kernels import g, h
from .operators import OperatorSpec, ResolventError, resolvent


@dataclass(frozen=True)
class TimeConfig:
    tau: float
    t_end: float
    snapshot_every: int = 1

    def __post_init__(self):
        if not 0.0 < self.tau <= self.t_end:
            raise ValueError("need 0 < tau <= t_end")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be a positive count")

    @property
    def steps(self) -> int:
        return max(1, int(round(self.t_end / self.tau)))


@dataclass(frozen=True)
class ForcingSpec:
    """Separable forcing f(t, x) = profile(t) * spatial(x).

    kinds: zero | constant (uniform amplitude) | modal (sine mode k) |
    file (snapshot).  profiles: constant | exponential (e^{rate t}) |
    samples (one multiplier per step, applied at t_{n+1}).
    """

    kind: str = "zero"
    k: int | tuple = 1
    amplitude: complex = 1.0
    path: str | None = None
    profile: str = "constant"
    rate: float = 0.0
    samples: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "modal", "file"):
            raise ValueError(f"unknown forcing kind {self.kind!r}")
        if self.profile not in ("constant", "exponential", "samples"):
            raise ValueError(f"unknown forcing profile {self.profile!r}")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def spatial(self, grid: Grid) -> Field:
        return _spatial_field(self, grid)

    def profile_value(self, t: float, step: int) -> float:
        if self.profile == "constant":
            return 1.0
        if self.profile == "exponential":
            return math.exp(self.rate * t)
        if not 1 <= step <= len(self.samples):
            raise ValueError(f"samples profile has no entry for step {step}")
        return float(self.samples[step - 1])

    def profile_derivative(self, t: float) -> float:
        if self.profile == "constant":
            return 0.0
        if self.profile == "exponential":
            return self.rate * math.exp(self.rate * t)
        raise ValueError("samples profile is not time-differentiable")

    def field_at(self, t: float, grid: Grid, step: int) -> Field:
        if self.is_zero:
            return Field.zero(grid)
        return self.profile_value(t, step) * self.spatial(grid)


@lru_cache(maxsize=32)
def _spatial_field(spec: ForcingSpec, grid: Grid) -> Field:
    """Spatial factor, cached so file-kind forcing reads its snapshot once."""
    if spec.kind == "zero":
        return Field.zero(grid)
    if spec.kind == "constant":
        return Field(np.full(grid.size, complex(spec.amplitude)), grid)
    if spec.kind == "modal":
        return sine_mode(grid, spec.k, spec.amplitude)
    f = read_snapshot(spec.path)
    if f.grid != grid:
        raise ValueError(f"forcing snapshot grid {f.grid} does not match run grid {grid}")
    return f


@dataclass
class Trajectory:
    times: np.ndarray
    snapshots: list            # Field at the recorded times
    snapshot_steps: list       # step indices of the snapshots
    ledger: EnergyLedger
    sections: list | None      # saturated sections per snapshot (m = 0 only)
    spec: OperatorSpec
    forcing: ForcingSpec
    time: TimeConfig
    error: tuple | None = None  # (step index, message) when the run aborted

    @property
    def final(self) -> Field:
        return self.snapshots[-1]


class StepError(RuntimeError):
    """Resolvent failure wrapped with the offending step index."""

    def __init__(self, step: int, cause: ResolventError):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


def step(u_n: Field, f_next: Field, tau: float, spec: OperatorSpec,
         tol: float = 1e-10) -> Field:
    """One backward-Euler step; the resolvent contract is inherited."""
    rhs = Field(u_n.values + tau * spec.params.phase * f_next.values, u_n.grid)
    return resolvent(rhs, tau, spec, tol=tol, x0=u_n).u


def _ledger_state_terms(u: Field, spec: OperatorSpec):
    """The instantaneous-rate columns of the energy identity at state u."""
    p, kern = spec.params, spec.kernel
    hd = u.grid.h ** u.grid.dim
    gu = g(u.values, p.m, kern.epsilon)
    damp_pairing = float(hd * np.sum((gu * np.conj(u.values)).real))
    if p.b != 0:
        hu = h(u.values, p.p, kern.M)
        super_pairing = float(hd * np.sum((hu * np.conj(u.values)).real))
    else:
        super_pairing = 0.0
    nrm2 = norm2(u) ** 2
    return {
        "half_mass": 0.5 * nrm2,
        "grad_term": math.cos(p.theta) * grad_norm_sq(u),
        "damp_term": p.rotated(p.a).real * damp_pairing,
        "super_term": p.rotated(p.b).real * super_pairing,
        "gamma_term": p.rotated(p.gamma).real * nrm2,
        "norm_m1": norm_q(u, p.m + 1.0) ** (p.m + 1.0),
        "norm_p1": norm_q(u, p.p + 1.0) ** (p.p + 1.0),
    }


def run(u0: Field, forcing: ForcingSpec, time: TimeConfig, spec: OperatorSpec,
        tol: float = 1e-10) -> Trajectory:
    """Sequential backward-Euler run with per-step ledger rows.

    Snapshots are kept at t = 0, every `snapshot_every` steps, and at the
    end.  Deterministic given (u0, forcing, time, spec).  A failure on the
    first step raises; a later failure returns the partial trajectory with
    an error mark.
    """
    if u0.grid != spec.grid:
        raise ValueError("initial state lives on a different grid than the spec")
    tau = time.tau
    p = spec.params
    ledger = EnergyLedger()
    row0 = _ledger_state_terms(u0, spec)
    ledger.add_row(step=0, t=0.0, forcing_term=0.0, dissipation=0.0,
                   balance_residual=0.0, forcing_norm=0.0, **row0)

    saturated = p.m == 0.0
    snapshots, snap_steps = [u0], [0]
    sections = [Field(g(u0.values, 0.0, spec.kernel.epsilon), u0.grid)] if saturated else None
    u = u0
    half_mass_prev = row0["half_mass"]
    error = None

    for n in range(1, time.steps + 1):
        t_next = n * tau
        f_next = forcing.field_at(t_next, spec.grid, n)
        try:
            u_next = step(u, f_next, tau, spec, tol=tol)
        except ResolventError as err:
            if n == 1:
                raise StepError(n, err) from err
            error = (n, str(err))
            break

        terms = _ledger_state_terms(u_next, spec)
        diss = 0.5 * norm2(u_next - u) ** 2 / tau
        f_term = inner(Field(p.phase * f_next.values, spec.grid), u_next).real
        residual = (terms["half_mass"] - half_mass_prev) + tau * (
            diss + terms["grad_term"] + terms["damp_term"]
            + terms["super_term"] + terms["gamma_term"] - f_term)
        ledger.add_row(step=n, t=t_next, forcing_term=f_term, dissipation=diss,
                       balance_residual=residual, forcing_norm=norm2(f_next), **terms)

        u = u_next
        half_mass_prev = terms["half_mass"]
        if n % time.snapshot_every == 0 or n == time.steps:
            snapshots.append(u)
            snap_steps.append(n)
            if saturated:
                sections.append(Field(g(u.values, 0.0, spec.kernel.epsilon), u.grid))

    times = tau * np.asarray(snap_steps, dtype=float)
    return Trajectory(times=times, snapshots=snapshots, snapshot_steps=snap_steps,
                      ledger=ledger, sections=sections, spec=spec, forcing=forcing,
                      time=time, error=error)


@dataclass
class PairReport:
    """Per-step contraction data for two runs sharing the same spec and tau."""

    times: np.ndarray
    diff_norms: np.ndarray      # ||u - u~||_2 at t_0..t_N
    forcing_accum: np.ndarray   # sum_{k<=n} tau ||f^k - f~^k||_2
    defects: np.ndarray         # diff - diff(0) - forcing_accum, one per step
    scale: float


def pair_run(u0: Field, u0_tilde: Field, f: ForcingSpec, f_tilde: ForcingSpec,
             time: TimeConfig, spec: OperatorSpec, tol: float = 1e-10) -> PairReport:
    """Run two trajectories in lockstep and measure the contraction defect.

    Nonexpansiveness of each resolvent step telescopes into

        ||u - u~||(t) <= ||u0 - u0~|| + sum tau ||f - f~||,

    so the reported defect must stay below solver slack.
    """
    tau = time.tau
    phase = spec.params.phase
    u, v = u0, u0_tilde
    diffs = [norm2(u - v)]
    accum = [0.0]
    for n in range(1, time.steps + 1):
        t_next = n * tau
        fu = f.field_at(t_next, spec.grid, n)
        fv = f_tilde.field_at(t_next, spec.grid, n)
        u = resolvent(Field(u.values + tau * phase * fu.values, spec.grid),
                      tau, spec, tol=tol, x0=u).u
        v = resolvent(Field(v.values + tau * phase * fv.values, spec.grid),
                      tau, spec, tol=tol, x0=v).u
        diffs.append(norm2(u - v))
        accum.append(accum[-1] + tau * norm2(fu - fv))

    diffs = np.asarray(diffs)
    accum = np.asarray(accum)
    defects = diffs[1:] - diffs[0] - accum[1:]
    scale = 1.0 + diffs[0] + accum[-1]
    times = tau * np.arange(time.steps + 1, dtype=float)
    return PairReport(times=times, diff_norms=diffs, forcing_accum=accum,
                      defects=defects, scale=scale)
