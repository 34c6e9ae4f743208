"""Certification suites behind ``cgl verify`` and the acceptance tests.

Each suite returns a list of Certificates.  Sample counts follow the
acceptance budgets at scale 1.0 and shrink proportionally with --quick.
Bundled trajectory runs are cached per invocation so the energy, h1 and
contraction suites share work.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import replace

from .config import RunConfig, load_config
from .diagnostics import (Certificate, accretivity_certificate, contraction,
                          default_test_matrix, energy_balance,
                          eps_consistency_certificate, g_monotonicity_certificate,
                          g_sharpness_certificate, h1_apriori, h_cone_certificate,
                          jacobian_fd_certificate, lipschitz_bound,
                          lipschitz_ratio_certificate, nonexpansiveness_certificate,
                          operator_monotonicity_certificate, roundtrip_certificate,
                          sector_certificate, surjectivity_certificate)
from .grid import Field, Grid
from .oracle import brute_resolvent_1node
from .operators import resolvent
from .rng import Rng
from .timestepper import ForcingSpec, TimeConfig, pair_run, run

BUNDLED_CONFIGS = ("linear", "singular", "saturated")
SUITES = ("kernels", "operator", "energy", "contraction", "h1", "all")


def bundled_config(name: str) -> RunConfig:
    path = importlib.resources.files("cgl") / "configs" / f"{name}.cfg"
    return load_config(str(path))


def _count(base: int, scale: float, floor: int = 10) -> int:
    return max(floor, int(round(base * scale)))


class SuiteRunner:
    def __init__(self, seed: int = 0, scale: float = 1.0, progress=None):
        self.seed = seed
        self.scale = scale
        self._trajectories = {}
        self._progress = progress or (lambda msg: None)

    def trajectory(self, name: str):
        """Bundled run, shortened with the sample scale, cached per runner."""
        if name not in self._trajectories:
            cfg = bundled_config(name)
            time = cfg.time
            if self.scale < 1.0:
                steps = _count(time.steps, self.scale, floor=50)
                time = TimeConfig(tau=time.tau, t_end=steps * time.tau,
                                  snapshot_every=time.snapshot_every)
            self._progress(f"running bundled config {name} ({time.steps} steps)")
            spec = cfg.operator_spec()
            traj = run(cfg.initial_field(), cfg.forcing, time, spec)
            if traj.error is not None:
                raise RuntimeError(f"bundled run {name} aborted: {traj.error}")
            self._trajectories[name] = (traj, spec)
        return self._trajectories[name]

    # -- suites ------------------------------------------------------------

    def kernels(self) -> list:
        s, seed = self.scale, self.seed
        certs = [
            sector_certificate(_count(10**6, s, 1000), seed),
            g_monotonicity_certificate(_count(10**5, s, 200), 100, seed + 1),
            g_sharpness_certificate(_count(10**4, s, 100), seed + 2),
            h_cone_certificate(_count(10**4, s, 100), seed + 3),
            jacobian_fd_certificate(_count(2000, s, 50), seed + 4),
            lipschitz_ratio_certificate(_count(10**6, s, 1000), seed + 5),
            eps_consistency_certificate(_count(10**4, s, 100), seed + 6),
            accretivity_certificate(_count(200, s, 20), seed + 7),
        ]
        return certs

    def operator(self) -> list:
        s, seed = self.scale, self.seed
        certs = []
        for grid in (Grid(1, 64), Grid(2, 32)):
            tag = f"{grid.dim}d"
            pairs = _count(100, s, 4)
            certs.append(operator_monotonicity_certificate(grid, pairs, seed)
                         .renamed(f"operator_monotonicity_{tag}"))
            certs.append(nonexpansiveness_certificate(grid, pairs, seed + 1)
                         .renamed(f"resolvent_nonexpansiveness_{tag}"))
            certs.append(roundtrip_certificate(grid, _count(5, s, 2), seed + 2)
                         .renamed(f"resolvent_roundtrip_{tag}"))
            certs.append(surjectivity_certificate(grid, _count(5, s, 2), seed + 3)
                         .renamed(f"resolvent_surjectivity_{tag}"))
        certs.append(self._oracle_agreement(_count(1000, s, 20)))
        return certs

    def _oracle_agreement(self, count: int) -> Certificate:
        """Newton resolvent against the brute-force scalar oracle.

        On a single interior node the Laplacian acts as multiplication by
        2/h^2, so the grid problem is the scalar radial equation with the
        zeroth-order coefficient shifted by 2/h^2.
        """
        rng = Rng(self.seed + 11)
        grid = Grid(1, 1, length=1.0)
        shift = 2.0 / grid.h**2
        margins = []
        specs = default_test_matrix(grid)
        for i in range(count):
            spec = specs[int(rng.integers(1, 0, len(specs))[0])]
            lam = float(10.0 ** rng.uniform(1, -2.0, 1.0)[0])
            F = complex(rng.complex_box(1, 3.0)[0])
            shifted = replace(spec.params, gamma=spec.params.gamma + shift)
            brute = brute_resolvent_1node(F, lam, shifted, spec.kernel)
            newt = resolvent(Field([F], grid), lam, spec, tol=1e-13).u.values[0]
            margins.append(1e-9 - abs(brute - newt))
        worst = min(margins)
        return Certificate("resolvent_oracle_agreement", worst >= 0.0, worst,
                           margins.index(worst), note=f"{count} random (F, lam, params)")

    def energy(self) -> list:
        certs = []
        for name in BUNDLED_CONFIGS:
            traj, spec = self.trajectory(name)
            cert = energy_balance(traj, spec)
            certs.append(cert.renamed(f"energy_balance_{name}"))
        return certs

    def contraction(self) -> list:
        cfg = bundled_config("singular")
        spec = cfg.operator_spec()
        steps = _count(1000, self.scale, 100)
        time = TimeConfig(tau=cfg.time.tau, t_end=steps * cfg.time.tau,
                          snapshot_every=cfg.time.snapshot_every)
        u0 = cfg.initial_field()
        rng = Rng(self.seed + 21)
        bump = Field(1e-2 * rng.complex_normal(spec.grid.size), spec.grid)
        certs = []
        self._progress(f"contraction pair runs ({steps} steps each)")
        rep = pair_run(u0, u0 + bump, cfg.forcing, cfg.forcing, time, spec)
        certs.append(contraction(rep).renamed("contraction_perturbed_state"))
        f2 = ForcingSpec(kind=cfg.forcing.kind, k=cfg.forcing.k,
                         amplitude=cfg.forcing.amplitude * 1.05,
                         profile=cfg.forcing.profile, rate=cfg.forcing.rate)
        rep = pair_run(u0, u0, cfg.forcing, f2, time, spec)
        certs.append(contraction(rep).renamed("contraction_perturbed_forcing"))
        return certs

    def h1(self) -> list:
        certs = []
        for name in BUNDLED_CONFIGS:
            traj, spec = self.trajectory(name)
            certs.append(h1_apriori(traj, spec).renamed(f"h1_apriori_{name}"))
            certs.append(lipschitz_bound(traj, spec).renamed(f"lipschitz_{name}"))
        return certs

    def suite(self, name: str) -> list:
        if name == "all":
            certs = []
            for sub in ("kernels", "operator", "energy", "contraction", "h1"):
                self._progress(f"suite {sub}")
                certs.extend(self.suite(sub))
            return certs
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
        return getattr(self, name)()
