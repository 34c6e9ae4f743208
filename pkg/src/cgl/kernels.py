"""Pointwise complex nonlinearities and their inequality certificates.

Two kernels drive the evolution:

* ``g(z, m, eps) = (|z|^2 + eps)^{-(1-m)/2} z`` — the damping term,
  regularized around z = 0 by eps.  At eps = 0 it is |z|^{m-1} z with the
  convention 0 at z = 0 (m > 0); at m = 0, eps = 0 it is the saturated
  kernel z/|z|, multivalued at 0.
* ``h(z, p, M) = |z|^{p-1} z`` for |z| < M, ``M^{p-1} z`` for |z| >= M —
  the superlinear absorption truncated at level M so it maps L^2 to L^2.

Both are radial multiples of z, so pairings like Re(g(z) conj(z)) are real
and nonnegative.  The defect functions below measure the two structural
inequalities the evolution rests on: rotated monotonicity of g under the
coefficient cone, and the unconditional sector bound for h with constant
2 sqrt(p) against (p - 1).

All functions accept scalars or numpy arrays of complex values and are
stateless and reentrant.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

# above this modulus, (|z|^2 + eps) would overflow; eps is then negligible
_BIG = 1e100


class MultivaluedKernelError(ValueError):
    """Saturated kernel evaluated at z = 0 with eps = 0; use saturated_section."""


@dataclass(frozen=True)
class KernelParams:
    """Regularization pair: eps >= 0 for the damping, truncation level M > 0.

    The continuation construction couples M = 1/eps by default; both stay
    independently overridable for truncation studies.
    """

    epsilon: float = 0.0
    M: float = 1e8

    def __post_init__(self):
        if not self.epsilon >= 0.0:
            raise ValueError("epsilon must be >= 0")
        if not self.M > 0.0:
            raise ValueError("M must be > 0")

    @staticmethod
    def coupled(epsilon: float) -> "KernelParams":
        return KernelParams(epsilon=epsilon, M=1.0 / epsilon)


def g(z, m: float, epsilon: float):
    """Damping kernel (|z|^2 + eps)^{-(1-m)/2} z.

    Raises MultivaluedKernelError for (m = 0, eps = 0, z = 0), where every
    value of modulus <= 1 is admissible; callers wanting a single-valued
    selection there should use saturated_section.  Inputs are promoted to
    1-d arrays so scalar and vector calls share one code path bit-for-bit.
    """
    scalar = np.isscalar(z) or getattr(z, "ndim", 0) == 0
    if m == 1.0:
        return complex(z) if scalar else np.asarray(z, dtype=complex)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    s = np.abs(zz)
    if epsilon == 0.0:
        if m == 0.0 and np.any(s == 0.0):
            raise MultivaluedKernelError(
                "g is multivalued at z = 0 for m = 0, eps = 0; use saturated_section")
        # normalize first (componentwise real division: safe down to
        # subnormals, unlike complex division which squares the modulus)
        denom = np.where(s > 0.0, s, 1.0)
        unit = zz.real / denom + 1j * (zz.imag / denom)
        out = np.where(s > 0.0, unit * s**m, 0.0 + 0.0j)
    else:
        fac = (np.minimum(s, _BIG) ** 2 + epsilon) ** (0.5 * (m - 1.0))
        with np.errstate(invalid="ignore", divide="ignore"):
            fac = np.where(s > _BIG, s ** (m - 1.0), fac)
        out = fac * zz
    return complex(out[0]) if scalar else out.reshape(np.shape(z))


def h(z, p: float, M: float):
    """Truncated absorption kernel; the two branches agree at |z| = M."""
    scalar = np.isscalar(z) or getattr(z, "ndim", 0) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    s = np.abs(zz)
    fac = np.where(s < M, s ** (p - 1.0), M ** (p - 1.0))
    out = fac * zz
    return complex(out[0]) if scalar else out.reshape(np.shape(z))


def saturated_section(values):
    """Pointwise z/|z| off the zero set, 0 on it; modulus <= 1 everywhere.

    The zero-set value is a free choice (any modulus <= 1 section is legal);
    0 is the minimal-norm selection and matches the weak limits produced by
    the eps-continuation.
    """
    zz = np.asarray(values, dtype=complex)
    s = np.abs(zz)
    denom = np.where(s > 0.0, s, 1.0)
    return np.where(s > 0.0, zz.real / denom + 1j * (zz.imag / denom), 0.0 + 0.0j)


def g_jacobian(z, m: float, epsilon: float):
    """Real 2x2 linearization of g at z (shape (..., 2, 2)).

    The kernel depends on |z|, hence is not holomorphic; the derivative is
    c1 * Re(conj(z) w) z + c0 * w as a map on w, i.e. a rank-one radial
    correction on top of a scalar multiple of the identity.  Identity at
    m = 1.  Unbounded as z -> 0 when eps = 0 and m < 1.
    """
    zz = np.asarray(z, dtype=complex)
    out = np.zeros(zz.shape + (2, 2), dtype=float)
    if m == 1.0:
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = 1.0
        return out if zz.ndim else out[()]
    x, y = zz.real, zz.imag
    s2 = x * x + y * y + epsilon
    with np.errstate(divide="ignore", invalid="ignore"):
        c0 = s2 ** (0.5 * (m - 1.0))
        c1 = (m - 1.0) * s2 ** (0.5 * (m - 3.0))
    out[..., 0, 0] = c0 + c1 * x * x
    out[..., 0, 1] = c1 * x * y
    out[..., 1, 0] = c1 * x * y
    out[..., 1, 1] = c0 + c1 * y * y
    return out if zz.ndim else out[()]


def h_jacobian(z, p: float, M: float):
    """Real 2x2 linearization of h at z (shape (..., 2, 2)).

    On the non-differentiable circle |z| = M the inner branch is returned;
    the circle has measure zero and any selection there is a valid
    generalized derivative for the Newton solver.
    """
    zz = np.asarray(z, dtype=complex)
    x, y = zz.real, zz.imag
    s = np.abs(zz)
    inner = s <= M
    out = np.zeros(zz.shape + (2, 2), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        c0 = np.where(inner, s ** (p - 1.0), M ** (p - 1.0))
        c1 = np.where(inner & (s > 0.0), (p - 1.0) * s ** (p - 3.0), 0.0)
    c1 = np.where(s == 0.0, 0.0, c1)
    out[..., 0, 0] = c0 + c1 * x * x
    out[..., 0, 1] = c1 * x * y
    out[..., 1, 0] = c1 * x * y
    out[..., 1, 1] = c0 + c1 * y * y
    return out if zz.ndim else out[()]


def defect_scale(z1, z2, q: float):
    """Magnitude scale (1 + |z1| + |z2|)^{max(q,1)+1} for defect tolerances.

    The pairing defects are degree-(q+1) in the moduli, so comparison
    tolerances must grow accordingly.
    """
    return (1.0 + np.abs(z1) + np.abs(z2)) ** (max(q, 1.0) + 1.0)


def g_monotonicity_defect(z1, z2, m: float, epsilon: float, a: complex, theta: float):
    """Re( a e^{i theta} (g(z1) - g(z2)) conj(z1 - z2) ).

    Nonnegative whenever a lies in the cone C_theta(m); may go negative
    otherwise (the cone condition is sharp).
    """
    rot = complex(a) * cmath.exp(1j * theta)
    G = (g(z1, m, epsilon) - g(z2, m, epsilon)) * np.conj(np.asarray(z1) - np.asarray(z2))
    out = np.real(rot * G)
    return float(out) if np.isscalar(z1) and np.isscalar(z2) else out


def h_sector_defect(z1, z2, p: float, M: float):
    """(p-1) Re(Z) - 2 sqrt(p) |Im(Z)| with Z = (h(z1) - h(z2)) conj(z1 - z2).

    Nonnegative for every complex pair, including the mixed-branch case
    0 < |z2| < M <= |z1| where the extremal ratio |Im|/Re reaches
    (p-1)/(2 sqrt(p)).
    """
    Z = (h(z1, p, M) - h(z2, p, M)) * np.conj(np.asarray(z1) - np.asarray(z2))
    out = (p - 1.0) * np.real(Z) - 2.0 * np.sqrt(p) * np.abs(np.imag(Z))
    return float(out) if np.isscalar(z1) and np.isscalar(z2) else out
