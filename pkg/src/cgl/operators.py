"""Discrete evolution operator A = L + B and its resolvent (I + lam A)^{-1}.

    L u = -e^{i theta} Delta_h u + gamma e^{i theta} u
    B u = a e^{i theta} g(u) + b e^{i theta} h(u)

L is exactly monotone on the grid (symmetric PSD Laplacian, |theta| < pi/2,
Re(gamma e^{i theta}) >= 0) and B is a pointwise sum of kernel defects that
are nonnegative under the coefficient cones, so A is monotone to round-off
and the resolvent is nonexpansive up to solver slack.

The resolvent solver is Newton on the real 2N system (re/im split: the
kernels depend on |z| and are not holomorphic), with an Armijo backtracking
line search and a damped fixed-point fallback
``u <- (I + lam L)^{-1}(F - lam B(u))`` when the search stalls.  Linear
solves are direct: banded (interleaved ordering, bandwidth 3) in 1D and
sparse LU in 2D.

The eps-continuation mirrors the construction of the singular/saturated
limit: solve (I + A_eps) u = F along a decreasing eps schedule with
M = 1/eps, monitor the Cauchy differences, and extract the saturated
section of the final iterate when m = 0.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import splu

from .grid import Field, Grid, grad_norm_sq, inner, laplacian, laplacian_values, norm2
from .kernels import KernelParams, g, g_jacobian, h, h_jacobian, saturated_section
from .params import ModelParams, validate


class InvalidOperatorError(ValueError):
    """Operator spec violates admissibility or single-valuedness requirements."""


class ResolventError(RuntimeError):
    """Nonlinear solve did not reach tolerance; carries the best iterate."""

    def __init__(self, message, best: "Field", history):
        super().__init__(message)
        self.best = best
        self.history = list(history)


@dataclass(frozen=True)
class OperatorSpec:
    """Admissible coefficients + regularization + grid; immutable and shareable."""

    params: ModelParams
    kernel: KernelParams
    grid: Grid

    def __post_init__(self):
        report = validate(self.params)
        if not report.ok:
            raise InvalidOperatorError(f"inadmissible parameters: {report}")
        if self.params.m < 1.0 and not self.kernel.epsilon > 0.0:
            raise InvalidOperatorError(
                "single-valued evaluation needs epsilon > 0 when m < 1; "
                "use epsilon_continuation for the singular limit")


@dataclass(frozen=True)
class ResolventResult:
    u: Field
    iterations: int
    residual: float
    certificate: float


@dataclass
class ContinuationEntry:
    epsilon: float
    M: float
    iterations: int
    residual: float
    diff_from_prev: float  # nan for the first entry
    grad_norm: float
    lap_norm: float
    g_norm: float
    h_norm: float


@dataclass
class ContinuationReport:
    entries: list = field(default_factory=list)
    completed: bool = False

    @property
    def diffs(self):
        return [e.diff_from_prev for e in self.entries[1:]]


class ContinuationError(RuntimeError):
    def __init__(self, message, report: ContinuationReport):
        super().__init__(message)
        self.report = report


def _B_values(vals: np.ndarray, spec: OperatorSpec) -> np.ndarray:
    p = spec.params
    out = p.rotated(p.a) * g(vals, p.m, spec.kernel.epsilon)
    if p.b != 0:
        out = out + p.rotated(p.b) * h(vals, p.p, spec.kernel.M)
    return out


def _A_values(vals: np.ndarray, spec: OperatorSpec) -> np.ndarray:
    p = spec.params
    lap = laplacian_values(vals, spec.grid)
    return -p.phase * lap + p.rotated(p.gamma) * vals + _B_values(vals, spec)


def apply_L(u: Field, spec: OperatorSpec) -> Field:
    p = spec.params
    return Field(-p.phase * laplacian(u).values + p.rotated(p.gamma) * u.values, u.grid)


def apply_B(u: Field, spec: OperatorSpec) -> Field:
    if spec.params.m < 1.0 and not spec.kernel.epsilon > 0.0:
        raise InvalidOperatorError("B is multivalued for m < 1 with epsilon = 0")
    return Field(_B_values(u.values, spec), u.grid)


def apply_A(u: Field, spec: OperatorSpec) -> Field:
    return Field(_A_values(u.values, spec), u.grid)


# ---------------------------------------------------------------------------
# linear algebra backends
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _neg_laplacian_matrix(grid: Grid) -> sp.csr_matrix:
    """-Delta_h as a real sparse matrix (PSD), cached per grid."""
    inv_h2 = 1.0 / grid.h**2
    n = grid.n
    s1 = sp.diags([-inv_h2, 2.0 * inv_h2, -inv_h2], [-1, 0, 1],
                  shape=(n, n), format="csr")
    if grid.dim == 1:
        return s1
    eye = sp.identity(n, format="csr")
    return (sp.kron(s1, eye) + sp.kron(eye, s1)).tocsr()


def _cmul_block(c: complex):
    """Real 2x2 representation of multiplication by the complex scalar c."""
    return np.array([[c.real, -c.imag], [c.imag, c.real]])


@lru_cache(maxsize=16)
def _linear_complex_factor(grid: Grid, theta: float, gamma_rot: complex, lam: float):
    """Solver for the complex constant-coefficient system
    (I + lam (e^{i theta}(-Delta_h) + gamma_rot)) u = w."""
    c_lap = lam * cmath.exp(1j * theta)
    c_diag = 1.0 + lam * gamma_rot
    if grid.dim == 1:
        inv_h2 = 1.0 / grid.h**2
        n = grid.n
        ab = np.zeros((3, n), dtype=complex)
        ab[0, 1:] = -c_lap * inv_h2
        ab[1, :] = c_diag + 2.0 * c_lap * inv_h2
        ab[2, :-1] = -c_lap * inv_h2
        return lambda w: solve_banded((1, 1), ab, w)
    S = _neg_laplacian_matrix(grid)
    M = (c_diag * sp.identity(grid.size) + c_lap * S).tocsc()
    return splu(M).solve


@lru_cache(maxsize=16)
def _newton_base_1d(spec: OperatorSpec, lam: float):
    """Static band template (bandwidth 3, interleaved re/im) of the Jacobian."""
    grid = spec.grid
    n = grid.n
    inv_h2 = 1.0 / grid.h**2
    s0, s1 = 2.0 * inv_h2, -inv_h2
    cr, ci = np.cos(spec.params.theta), np.sin(spec.params.theta)
    gam = spec.params.rotated(spec.params.gamma)
    ab = np.zeros((7, 2 * n))
    ab[3, :] = 1.0 + lam * (cr * s0 + gam.real)
    # node-diagonal cross couplings (x_k <-> y_k)
    ab[4, 0:2 * n - 1:2] = lam * (ci * s0 + gam.imag)
    ab[2, 1::2] = -lam * (ci * s0 + gam.imag)
    # neighbor couplings
    ab[5, :2 * n - 2] = lam * cr * s1
    ab[1, 2:] = lam * cr * s1
    ab[4, 1:2 * n - 2:2] = -lam * ci * s1   # x_{k+1} <- y_k
    ab[2, 2::2] = lam * ci * s1             # y_{k-1} <- x_k
    ab[6, 0:2 * n - 3:2] = lam * ci * s1    # y_{k+1} <- x_k
    ab[0, 3::2] = -lam * ci * s1            # x_k <- y_{k+1}
    ab.setflags(write=False)
    return ab


@lru_cache(maxsize=8)
def _jacobian_template_2d(grid: Grid):
    """Fixed CSC structure of the real 2N x 2N Jacobian.

    All four re/im blocks share the Laplacian pattern (which contains the
    diagonal), so the structure and the scatter maps from block data into
    K.data are computed once per grid; per-iteration assembly is four fancy
    assignments.
    """
    N = grid.size
    Sc = _neg_laplacian_matrix(grid).tocsc(copy=True)
    Sc.sort_indices()
    indptr, indices, nnz = Sc.indptr, Sc.indices, Sc.nnz
    counts = np.diff(indptr)
    # diagonal slot of column j inside Sc.data
    dpos = np.array([indptr[j] + np.searchsorted(indices[indptr[j]:indptr[j + 1]], j)
                     for j in range(N)])

    K_indptr = np.empty(2 * N + 1, dtype=np.int32)
    K_indptr[0] = 0
    K_indptr[1:N + 1] = 2 * np.cumsum(counts)
    K_indptr[N + 1:] = K_indptr[N] + 2 * np.cumsum(counts)
    K_indices = np.empty(4 * nnz, dtype=np.int32)
    perm = {key: np.empty(nnz, dtype=np.int64) for key in ("11", "21", "12", "22")}
    out = 0
    for j in range(N):
        lo, hi = indptr[j], indptr[j + 1]
        w = hi - lo
        K_indices[out:out + w] = indices[lo:hi]
        perm["11"][lo:hi] = np.arange(out, out + w)
        out += w
        K_indices[out:out + w] = indices[lo:hi] + N
        perm["21"][lo:hi] = np.arange(out, out + w)
        out += w
    for j in range(N):
        lo, hi = indptr[j], indptr[j + 1]
        w = hi - lo
        K_indices[out:out + w] = indices[lo:hi]
        perm["12"][lo:hi] = np.arange(out, out + w)
        out += w
        K_indices[out:out + w] = indices[lo:hi] + N
        perm["22"][lo:hi] = np.arange(out, out + w)
        out += w
    return Sc.data.copy(), dpos, K_indptr, K_indices, perm


@lru_cache(maxsize=16)
def _newton_base_2d(spec: OperatorSpec, lam: float):
    """Block data arrays (Laplacian pattern order) of I + lam L, per (spec, lam)."""
    s_data, dpos, _, _, _ = _jacobian_template_2d(spec.grid)
    cr, ci = np.cos(spec.params.theta), np.sin(spec.params.theta)
    gam = spec.params.rotated(spec.params.gamma)
    b_diag = lam * cr * s_data
    b_diag[dpos] += 1.0 + lam * gam.real
    b_off = lam * ci * s_data
    b_off[dpos] += lam * gam.imag
    b_diag.setflags(write=False)
    b_off.setflags(write=False)
    return b_diag, b_off


def _kernel_blocks(vals: np.ndarray, spec: OperatorSpec) -> np.ndarray:
    """Per-node real 2x2 Jacobian of B, shape (N, 2, 2)."""
    p, kern = spec.params, spec.kernel
    P = np.einsum("ab,nbc->nac", _cmul_block(p.rotated(p.a)),
                  g_jacobian(vals, p.m, kern.epsilon))
    if p.b != 0:
        P = P + np.einsum("ab,nbc->nac", _cmul_block(p.rotated(p.b)),
                          h_jacobian(vals, p.p, kern.M))
    return P


def _make_solver_1d(vals, spec, lam):
    """Banded LU of the Jacobian at vals; returns R -> Newton direction."""
    ab = _newton_base_1d(spec, lam).copy()
    P = lam * _kernel_blocks(vals, spec)
    ab[3, 0::2] += P[:, 0, 0]
    ab[3, 1::2] += P[:, 1, 1]
    ab[4, 0:-1:2] += P[:, 1, 0]
    ab[2, 1::2] += P[:, 0, 1]
    n = len(vals)

    def solve(R):
        rhs = np.empty(2 * n)
        rhs[0::2] = -R.real
        rhs[1::2] = -R.imag
        d = solve_banded((3, 3), ab, rhs)
        return d[0::2] + 1j * d[1::2]

    return solve


def _make_solver_2d(vals, spec, lam):
    _, dpos, K_indptr, K_indices, perm = _jacobian_template_2d(spec.grid)
    b_diag, b_off = _newton_base_2d(spec, lam)
    P = lam * _kernel_blocks(vals, spec)
    c11 = b_diag.copy()
    c11[dpos] += P[:, 0, 0]
    c22 = b_diag.copy()
    c22[dpos] += P[:, 1, 1]
    c12 = -b_off
    c12[dpos] += P[:, 0, 1]
    c21 = b_off.copy()
    c21[dpos] += P[:, 1, 0]
    data = np.empty(4 * len(b_diag))
    data[perm["11"]] = c11
    data[perm["21"]] = c21
    data[perm["12"]] = c12
    data[perm["22"]] = c22
    n = len(vals)
    K = sp.csc_matrix((data, K_indices, K_indptr), shape=(2 * n, 2 * n))
    lu = splu(K, permc_spec="MMD_AT_PLUS_A")

    def solve(R):
        d = lu.solve(np.concatenate([-R.real, -R.imag]))
        return d[:n] + 1j * d[n:]

    return solve


# ---------------------------------------------------------------------------
# resolvent
# ---------------------------------------------------------------------------

MAX_BACKTRACKS = 30
MAX_FIXED_POINT = 500


def resolvent(F: Field, lam: float, spec: OperatorSpec, tol: float = 1e-10,
              max_iter: int = 50, x0: Field | None = None) -> ResolventResult:
    """Solve u + lam A(u) = F to ||residual||_2 <= tol (1 + ||F||_2).

    Warm start from x0 when given, else from the resolvent of the linear
    part.  The fully linear regime (m = 1, b = 0) is solved directly.
    """
    if not lam > 0.0:
        raise ValueError("resolvent step lam must be positive")
    grid = spec.grid
    hd_sqrt = np.sqrt(grid.h ** grid.dim)
    fvals = F.values
    target = tol * (1.0 + norm2(F))

    def l2(r):
        return float(hd_sqrt * np.linalg.norm(r))

    def residual(vals):
        return vals + lam * _A_values(vals, spec) - fvals

    p = spec.params
    if p.m == 1.0 and p.b == 0:
        # linear regime: a e^{i theta} folds into the zeroth-order slot
        solve = _linear_complex_factor(grid, p.theta, p.rotated(p.gamma + p.a), lam)
        u = solve(fvals)
        rn = l2(residual(u))
        uf = Field(u, grid)
        return ResolventResult(uf, 1, rn, _monotonicity_certificate(uf, spec))

    make_solver = _make_solver_1d if grid.dim == 1 else _make_solver_2d
    if x0 is not None:
        u = x0.values.copy()
    else:
        # warm start at the resolvent of the linear part (cached factorization)
        u = np.asarray(_linear_complex_factor(grid, p.theta, p.rotated(p.gamma), lam)(fvals))
    history = []
    iterations = 0
    stalled = False
    solve = None
    fresh = False

    # modified Newton: the factorization is reused while the residual keeps
    # contracting well, refreshed otherwise; only a freshly factored step
    # that still fails its line search trips the fixed-point fallback
    for _ in range(max_iter):
        R = residual(u)
        rn = l2(R)
        history.append(rn)
        if rn <= target:
            return _finish(u, grid, spec, iterations, rn)
        if solve is None:
            solve = make_solver(u, spec, lam)
            fresh = True
        d = solve(R)
        alpha, rn_new = 1.0, np.inf
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            trial = u + alpha * d
            rn_new = l2(residual(trial))
            if rn_new <= (1.0 - 1e-4 * alpha) * rn:
                u, accepted = trial, True
                break
            alpha *= 0.5
        iterations += 1
        if accepted:
            if rn_new > 0.4 * rn:
                solve = None  # slow contraction: refactor at the new iterate
            else:
                fresh = False
        elif fresh:
            stalled = True
            break
        else:
            solve = None  # stale direction failed: retry with a fresh factorization

    # damped fixed-point fallback on the resolvent of the linear part
    lin_solve = _linear_complex_factor(grid, p.theta, p.rotated(p.gamma), lam)
    omega = 1.0
    rn = l2(residual(u))
    for _ in range(MAX_FIXED_POINT):
        if rn <= target:
            return _finish(u, grid, spec, iterations, rn)
        w = lin_solve(fvals - lam * _B_values(u, spec))
        trial = (1.0 - omega) * u + omega * w
        rn_trial = l2(residual(trial))
        iterations += 1
        if rn_trial < rn:
            u, rn = trial, rn_trial
            history.append(rn)
            omega = min(1.0, 1.5 * omega)
        else:
            omega *= 0.5
            if omega < 1e-6:
                break

    mode = "stalled line search" if stalled else "iteration budget"
    raise ResolventError(
        f"resolvent did not converge ({mode}): residual {rn:.3e} > target {target:.3e}",
        Field(u, grid), history)


def _monotonicity_certificate(u: Field, spec: OperatorSpec) -> float:
    """Re<A(u), u>: monotonicity defect of the accepted step against A(0) = 0."""
    return inner(apply_A(u, spec), u).real


def _finish(vals, grid, spec, iterations, rn):
    u = Field(vals, grid)
    return ResolventResult(u, iterations, rn, _monotonicity_certificate(u, spec))


# ---------------------------------------------------------------------------
# eps-continuation toward the singular/saturated limit
# ---------------------------------------------------------------------------

EPS_FLOOR = 1e-12


def epsilon_continuation(F: Field, spec: OperatorSpec, eps_schedule,
                         tol: float = 1e-10, couple_M: bool = True):
    """Solve (I + A_eps) u = F along a decreasing eps schedule.

    Returns (u_final, U, report): for m = 0, U is the saturated section
    extracted from the final iterate (|U| <= 1 pointwise, u/|u| off the
    vanishing set, 0 on it), None otherwise.  The
    report records per-eps solver stats, Cauchy differences and measured
    L^2 sup norms of the gradients, Laplacians and kernel images (the
    discrete counterparts of the uniform-boundedness step).
    """
    report = ContinuationReport()
    if spec.params.m == 1.0:
        res = resolvent(F, 1.0, spec, tol=tol)
        report.entries.append(_continuation_entry(res, spec, np.nan))
        report.completed = True
        return res.u, None, report

    schedule = [float(e) for e in eps_schedule]
    if not schedule:
        raise ValueError("empty eps schedule")
    if any(e < EPS_FLOOR for e in schedule):
        raise ValueError(f"eps schedule must stay >= {EPS_FLOOR}")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("eps schedule must be strictly decreasing")

    u_prev = None
    for eps in schedule:
        kern = KernelParams.coupled(eps) if couple_M else KernelParams(eps, spec.kernel.M)
        spec_k = replace(spec, kernel=kern)
        try:
            res = resolvent(F, 1.0, spec_k, tol=tol, x0=u_prev)
        except ResolventError as err:
            report.completed = False
            raise ContinuationError(
                f"continuation aborted at eps={eps:g}: {err}", report) from err
        diff = norm2(res.u - u_prev) if u_prev is not None else np.nan
        report.entries.append(_continuation_entry(res, spec_k, diff))
        u_prev = res.u

    report.completed = True
    U = None
    if spec.params.m == 0.0:
        # limit section (not the last regularized image g_eps(u), whose
        # modulus is still eps/(2|u|^2) short of 1 near the vanishing set)
        U = Field(saturated_section(u_prev.values), spec.grid)
    return u_prev, U, report


def _continuation_entry(res: ResolventResult, spec_k: OperatorSpec, diff: float):
    vals = res.u.values
    return ContinuationEntry(
        epsilon=spec_k.kernel.epsilon,
        M=spec_k.kernel.M,
        iterations=res.iterations,
        residual=res.residual,
        diff_from_prev=diff,
        grad_norm=float(np.sqrt(grad_norm_sq(res.u))),
        lap_norm=norm2(laplacian(res.u)),
        g_norm=norm2(Field(g(vals, spec_k.params.m, spec_k.kernel.epsilon), res.u.grid)),
        h_norm=norm2(Field(h(vals, spec_k.params.p, spec_k.kernel.M), res.u.grid)),
    )


def accretivity_probe(u: Field, spec: OperatorSpec) -> float:
    """Defect (1-m) Re(I_h) - 2 sqrt(m) |Im(I_h)|, I_h = <-Delta_h u, g(u)>.

    The continuum statement is an inequality (>= 0); the discrete pairing
    inherits it through summation by parts, so the probe stays nonnegative
    up to round-off and converges to the continuum value as h -> 0.
    """
    m = spec.params.m
    gu = Field(g(u.values, m, spec.kernel.epsilon), u.grid)
    I_h = inner(Field(-laplacian(u).values, u.grid), gu)
    return (1.0 - m) * I_h.real - 2.0 * np.sqrt(m) * abs(I_h.imag)
