"""Model coefficients and admissibility of the damping/absorption cones.

The rotated coefficient cone for exponent q is

    C_theta(q) = { z : Re(z e^{i theta}) > 0  and
                       2 sqrt(q) Re(z e^{i theta}) >= |1-q| |Im(z e^{i theta})| }.

For q = 0 the sector condition forces Im(z e^{i theta}) = 0 (a positive ray),
for q = 1 only the strict real-part condition remains.  Admissible problems
need theta strictly inside (-pi/2, pi/2), the damping exponent m in [0, 1],
the absorption exponent p > 1, a in C_theta(m), b in C_theta(p) or b = 0, and
Re(gamma e^{i theta}) >= 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field


def _finite(*vals) -> bool:
    for v in vals:
        if isinstance(v, complex):
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                return False
        elif not math.isfinite(v):
            return False
    return True


def in_cone(z: complex, theta: float, q: float) -> bool:
    """Membership of z in C_theta(q).

    The boundary of the sector inequality is accepted (>=); the real-part
    condition is strict, matching the mixed strict/non-strict definition.
    """
    if not _finite(complex(z), theta, q):
        raise ValueError("in_cone requires finite z, theta, q")
    if q < 0:
        raise ValueError("cone exponent q must be >= 0")
    w = complex(z) * cmath.exp(1j * theta)
    if not w.real > 0.0:
        return False
    return 2.0 * math.sqrt(q) * w.real >= abs(1.0 - q) * abs(w.imag)


def cone_margin(z: complex, theta: float, q: float) -> float:
    """Signed slack of the sector inequality, 2 sqrt(q) Re - |1-q| |Im|."""
    w = complex(z) * cmath.exp(1j * theta)
    return 2.0 * math.sqrt(q) * w.real - abs(1.0 - q) * abs(w.imag)


def _ulp_step(x: float, k: int) -> float:
    toward = math.inf if k > 0 else -math.inf
    for _ in range(abs(k)):
        x = math.nextafter(x, toward)
    return x


def ray_coefficient(mu: float, theta: float) -> complex:
    """mu e^{-i theta} such that Im(a e^{i theta}) cancels exactly in floats.

    The saturated cone C_theta(0) is the exact ray, so a decimal literal for
    a generally rounds off it.  For mu a power of two the componentwise
    products commute exactly and no adjustment is needed; otherwise the
    imaginary component is nudged by ulps until the rotated product is a
    true zero.
    """
    if not mu > 0.0:
        raise ValueError("ray coefficient needs mu > 0")
    w = cmath.exp(1j * theta)
    c, s = w.real, w.imag
    frac, _ = math.frexp(mu)
    if frac == 0.5:  # power of two: scaling is exact, products commute
        return complex(mu * c, -(mu * s))
    re0 = mu * c
    for dre in range(0, 65):
        for re in ({re0} if dre == 0 else {_ulp_step(re0, dre), _ulp_step(re0, -dre)}):
            target = -(re * s)
            im0 = target / c
            for dim in range(0, 9):
                cands = {im0} if dim == 0 else {_ulp_step(im0, dim), _ulp_step(im0, -dim)}
                for im in cands:
                    if im * c == target:
                        return complex(re, im)
    raise ValueError(
        f"could not land mu={mu!r} exactly on the theta={theta!r} ray; "
        "use a power-of-two mu")


@dataclass(frozen=True)
class ModelParams:
    """Coefficient tuple (theta, m, p, a, b, gamma) of the evolution."""

    theta: float
    m: float
    p: float
    a: complex
    b: complex = 0.0
    gamma: complex = 0.0

    def rotated(self, z: complex) -> complex:
        return complex(z) * cmath.exp(1j * self.theta)

    @property
    def phase(self) -> complex:
        return cmath.exp(1j * self.theta)


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of validate(): per-condition margins plus the violation list."""

    ok: bool
    violations: list = field(default_factory=list)
    margins: dict = field(default_factory=dict)

    def __str__(self) -> str:
        lines = ["admissible" if self.ok else "NOT admissible"]
        for name, margin in self.margins.items():
            lines.append(f"  {name}: margin={margin:.6g}")
        for fieldname, reason, margin in self.violations:
            lines.append(f"  VIOLATION {fieldname}: {reason} (margin={margin:.6g})")
        return "\n".join(lines)


def validate(params: ModelParams) -> AdmissibilityReport:
    """Check every admissibility condition; failures are report entries.

    Margins are absolute (no normalization): positive means slack, zero is
    a boundary case.  Boundary equality is accepted everywhere except the
    strict real-part conditions of the cones.
    """
    violations = []
    margins = {}

    if not _finite(params.theta, params.m, params.p,
                   complex(params.a), complex(params.b), complex(params.gamma)):
        violations.append(("params", "non-finite coefficient", math.nan))
        return AdmissibilityReport(False, violations, margins)

    t_margin = math.pi / 2 - abs(params.theta)
    margins["theta_range"] = t_margin
    if not t_margin > 0.0:
        violations.append(("theta", "theta must lie strictly inside (-pi/2, pi/2)", t_margin))

    m_margin = min(params.m, 1.0 - params.m)
    margins["m_range"] = m_margin
    if m_margin < 0.0:
        violations.append(("m", "damping exponent m must lie in [0, 1]", m_margin))

    p_margin = params.p - 1.0
    margins["p_range"] = p_margin
    if not p_margin > 0.0:
        violations.append(("p", "absorption exponent p must be > 1", p_margin))

    if not violations:
        a_rot = params.rotated(params.a)
        margins["a_realpart"] = a_rot.real
        margins["a_sector"] = cone_margin(params.a, params.theta, params.m)
        if not a_rot.real > 0.0:
            violations.append(("a", "Re(a e^{i theta}) must be > 0", a_rot.real))
        elif margins["a_sector"] < 0.0:
            violations.append(("a", "a outside the damping cone C_theta(m)", margins["a_sector"]))

        if params.b != 0:
            b_rot = params.rotated(params.b)
            margins["b_realpart"] = b_rot.real
            margins["b_sector"] = cone_margin(params.b, params.theta, params.p)
            if not b_rot.real > 0.0:
                violations.append(("b", "Re(b e^{i theta}) must be > 0 (or b = 0)", b_rot.real))
            elif margins["b_sector"] < 0.0:
                violations.append(("b", "b outside the absorption cone C_theta(p)", margins["b_sector"]))

        g_margin = params.rotated(params.gamma).real
        margins["gamma_realpart"] = g_margin
        if g_margin < 0.0:
            violations.append(("gamma", "Re(gamma e^{i theta}) must be >= 0", g_margin))

    return AdmissibilityReport(not violations, violations, margins)
