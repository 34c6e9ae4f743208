"""Independent reference solutions backing the derived test values.

Three cross-check routes, all deliberately decoupled from the Newton
resolvent and the implicit stepper:

* closed-form modal solutions of the semidiscrete linear problem
  (m = 1, b = 0): each sine mode decays like exp(-e^{i theta}(mu_k + a +
  gamma) t) with the discrete eigenvalue mu_k,
* a classical fixed-step RK4 integrator for the zero-dimensional reduction
  (no Laplacian), valid while the right-hand side stays smooth along the
  trajectory,
* a brute-force scalar resolvent: the kernels are radial multiples of z,
  so z + lam A(z) = F reduces to z c(|z|) = F with
  c(s) = 1 + lam e^{i theta}(a G(s) + b H(s) + gamma); monotonicity gives
  Re c >= 1, the modulus equation s |c(s)| = |F| brackets in [0, |F|],
  and bisection pins s without any derivative information.  A plain 2D
  grid search with residual-certified box shrinking is kept as a second,
  cruder route (the strong-monotonicity bound |z - root| <= |residual(z)|
  makes every shrink safe); it is slower and used on mild cells only.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .grid import Field, sine_mode
from .kernels import KernelParams, g, h
from .operators import OperatorSpec
from .params import ModelParams


class OracleInvalidError(RuntimeError):
    """The reference route left its smoothness domain; result not trustworthy."""


@dataclass(frozen=True)
class ModalSolution:
    """Sine mode k with complex decay rate e^{i theta}(mu_k + a + gamma)."""

    k: int | tuple
    amplitude: complex = 1.0

    def rate(self, spec: OperatorSpec) -> complex:
        p = spec.params
        return p.phase * (spec.grid.eigenvalue(self.k) + p.a + p.gamma)


def modal_exact(t: float, mode: ModalSolution, spec: OperatorSpec) -> Field:
    """Exact semidiscrete solution of the unforced linear problem at time t."""
    p = spec.params
    if not (p.m == 1.0 and p.b == 0):
        raise ValueError("modal solutions need the linear regime m = 1, b = 0")
    amp = mode.amplitude * cmath.exp(-mode.rate(spec) * t)
    return sine_mode(spec.grid, mode.k, amp)


def _rhs_0d(z: complex, params: ModelParams, kernel: KernelParams, f: complex) -> complex:
    drift = params.a * g(z, params.m, kernel.epsilon) \
        + params.b * h(z, params.p, kernel.M) + params.gamma * z
    return params.phase * (f - drift)


def scalar_ode_reference(z0: complex, params: ModelParams, kernel: KernelParams,
                         t_end: float, fine_dt: float, forcing=None) -> complex:
    """Classical RK4 on z' = -e^{i theta}(a g(z) + b h(z) + gamma z) + e^{i theta} f.

    `forcing` is a callable t -> complex (None means 0).  Raises
    OracleInvalidError if the trajectory approaches the kernel singularity
    (|z| below 10 sqrt(eps), or a tiny floor in the eps = 0 regime with
    m < 1), where the right-hand side is no longer smooth.
    """
    f = forcing if forcing is not None else (lambda t: 0.0 + 0.0j)
    steps = max(1, int(round(t_end / fine_dt)))
    dt = t_end / steps
    floor = 0.0
    if params.m < 1.0:
        # below 10 sqrt(eps) the regularization dominates; at eps = 0 the
        # right-hand side derivatives blow up like |z|^{m-4}, so the step
        # is only resolved while |z|^{1-m} stays well above dt
        floor = max(10.0 * math.sqrt(kernel.epsilon),
                    (10.0 * dt) ** (1.0 / (1.0 - params.m))
                    if kernel.epsilon == 0.0 else 0.0)
    z = complex(z0)
    for n in range(steps):
        t = n * dt
        if params.m < 1.0 and abs(z) < floor:
            raise OracleInvalidError(
                f"trajectory entered |z| < {floor:g} at t={t:g}; RK4 reference invalid")
        k1 = _rhs_0d(z, params, kernel, f(t))
        k2 = _rhs_0d(z + 0.5 * dt * k1, params, kernel, f(t + 0.5 * dt))
        k3 = _rhs_0d(z + 0.5 * dt * k2, params, kernel, f(t + 0.5 * dt))
        k4 = _rhs_0d(z + dt * k3, params, kernel, f(t + dt))
        z = z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return z


def _radial_coefficient(s: float, lam: float, params: ModelParams,
                        kernel: KernelParams) -> complex:
    G = (s * s + kernel.epsilon) ** (0.5 * (params.m - 1.0)) \
        if (kernel.epsilon > 0.0 or s > 0.0) else 0.0
    if params.m == 1.0:
        G = 1.0
    H = min(s, kernel.M) ** (params.p - 1.0)
    return 1.0 + lam * params.phase * (params.a * G + params.b * H + params.gamma)


def brute_resolvent_1node(F: complex, lam: float, params: ModelParams,
                          kernel: KernelParams, bisections: int = 200) -> complex:
    """Scalar resolvent by bisection on the modulus equation s |c(s)| = |F|.

    Independent of the Newton solver: no Jacobians, no line search, only
    the radial structure of the kernels and the bracketing Re c(s) >= 1
    guaranteed by the admissibility cones.
    """
    F = complex(F)
    if F == 0:
        return 0.0 + 0.0j

    def phi(s):
        return s * abs(_radial_coefficient(s, lam, params, kernel)) - abs(F)

    lo, hi = 0.0, abs(F)
    f_hi = phi(hi)
    while f_hi < 0.0:  # defensive: only reachable for inadmissible coefficients
        hi *= 2.0
        f_hi = phi(hi)
        if hi > 1e12 * (1.0 + abs(F)):
            raise OracleInvalidError("modulus equation does not bracket a root")
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        if phi(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-300:
            break
    s = 0.5 * (lo + hi)
    return F / _radial_coefficient(s, lam, params, kernel)


def _residual_1node(z, F, lam, params, kernel):
    return z + lam * params.phase * (params.a * g(z, params.m, kernel.epsilon)
                                     + params.b * h(z, params.p, kernel.M)
                                     + params.gamma * z) - F


def grid_search_resolvent_1node(F: complex, lam: float, params: ModelParams,
                                kernel: KernelParams, coarse: int = 401,
                                refinements: int = 60) -> complex:
    """Dense 2D grid search with residual-certified shrinking boxes.

    Strong monotonicity of I + lam A gives |z - root| <= |residual(z)|, so
    a box centered at the running best with half-width 1.05 |residual|
    always contains the root; each pass shrinks it until round-off.
    Crude and slow; a second opinion for mild parameter cells.
    """
    F = complex(F)
    half = 2.0 * (abs(F) + 1.0)
    center = 0.0 + 0.0j
    best, best_r = center, abs(_residual_1node(center, F, lam, params, kernel))
    pts = coarse
    for _ in range(refinements):
        xs = np.linspace(center.real - half, center.real + half, pts)
        ys = np.linspace(center.imag - half, center.imag + half, pts)
        Z = xs[None, :] + 1j * ys[:, None]
        R = np.abs(_residual_1node(Z, F, lam, params, kernel))
        i = int(np.argmin(R))
        if R.flat[i] < best_r:
            best, best_r = complex(Z.flat[i]), float(R.flat[i])
        if best_r < 1e-13 * (1.0 + abs(F)):
            break
        center = best
        half = min(0.75 * half, 1.05 * best_r)
        pts = 33
    return best
