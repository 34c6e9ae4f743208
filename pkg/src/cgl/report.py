"""Report rendering: gnuplot-ready columns and matplotlib figures.

Reads a ledger CSV and writes, side by side in the output directory,

* whitespace-delimited ``.dat`` files with ``#`` comment headers
  (mass.dat, terms.dat, residual.dat), directly plottable with gnuplot,
* PNG figures of the same quantities (mass decay, energy-identity terms,
  identity residual against its tolerance envelope).

Plotting stays out of the diagnostics layer; this module is the only one
that touches matplotlib.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .diagnostics import PER_STEP_ENERGY_TOL, read_ledger_csv  # noqa: E402

_FIGSIZE = (6.4, 4.0)


def _write_dat(path, header_cols, columns):
    with open(path, "w") as f:
        f.write("# " + "  ".join(header_cols) + "\n")
        for row in zip(*columns):
            f.write("  ".join(f"{x:.16e}" for x in row) + "\n")


def render_report(ledger_path, out_dir, snapshot_dir=None) -> list:
    """Write column files and figures for one ledger; returns written paths.

    With snapshot_dir, the first/middle/last field snapshots are rendered
    as modulus profiles (1d) or a final-modulus image (2d) as well.
    """
    ledger = read_ledger_csv(ledger_path)
    os.makedirs(out_dir, exist_ok=True)
    written = []

    t = ledger.column("t")
    half_mass = ledger.column("half_mass")
    residual = np.abs(ledger.column("balance_residual"))
    tol_env = PER_STEP_ENERGY_TOL * (1.0 + half_mass)
    term_names = ("grad_term", "damp_term", "super_term", "gamma_term",
                  "forcing_term", "dissipation")
    terms = {name: ledger.column(name) for name in term_names}

    path = os.path.join(out_dir, "mass.dat")
    _write_dat(path, ("t", "half_mass", "norm_m1", "norm_p1"),
               (t, half_mass, ledger.column("norm_m1"), ledger.column("norm_p1")))
    written.append(path)
    path = os.path.join(out_dir, "terms.dat")
    _write_dat(path, ("t",) + term_names, (t,) + tuple(terms.values()))
    written.append(path)
    path = os.path.join(out_dir, "residual.dat")
    _write_dat(path, ("t", "abs_balance_residual", "tolerance"), (t, residual, tol_env))
    written.append(path)

    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(t, half_mass, lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\frac{1}{2}\|u\|_{L^2}^2$")
    ax.set_title("mass decay")
    ax.grid(alpha=0.3)
    path = os.path.join(out_dir, "mass.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for name, vals in terms.items():
        ax.plot(t, vals, lw=1.0, label=name.replace("_", " "))
    ax.set_xlabel("t")
    ax.set_ylabel("energy rate terms")
    ax.legend(fontsize=8, ncol=2)
    ax.grid(alpha=0.3)
    path = os.path.join(out_dir, "terms.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=_FIGSIZE)
    positive = np.maximum(residual, 1e-20)
    ax.semilogy(t[1:], positive[1:], lw=1.0, label="|balance residual|")
    ax.semilogy(t[1:], tol_env[1:], lw=1.0, ls="--", label="tolerance")
    ax.set_xlabel("t")
    ax.set_ylabel("per-step identity residual")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    path = os.path.join(out_dir, "residual.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    if snapshot_dir is not None:
        written.extend(_render_snapshots(snapshot_dir, out_dir))
    return written


def _render_snapshots(snapshot_dir, out_dir) -> list:
    from .grid import read_snapshot

    names = sorted(n for n in os.listdir(snapshot_dir)
                   if n.startswith("snap_") and n.endswith(".cglf"))
    if not names:
        return []
    picks = sorted({names[0], names[len(names) // 2], names[-1]})
    fields = {n: read_snapshot(os.path.join(snapshot_dir, n)) for n in picks}
    written = []

    first = fields[picks[0]]
    if first.grid.dim == 1:
        x = first.grid.coords()
        path = os.path.join(out_dir, "profile.dat")
        _write_dat(path, ("x",) + tuple(n[:-5] for n in picks),
                   (x,) + tuple(np.abs(fields[n].values) for n in picks))
        written.append(path)
        fig, ax = plt.subplots(figsize=_FIGSIZE)
        for n in picks:
            ax.plot(x, np.abs(fields[n].values), lw=1.1, label=n[:-5])
        ax.set_xlabel("x")
        ax.set_ylabel("|u|")
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
    else:
        last = fields[picks[-1]]
        img = np.abs(last.values).reshape(last.grid.n, last.grid.n)
        fig, ax = plt.subplots(figsize=(5.0, 4.2))
        im = ax.imshow(img.T, origin="lower", cmap="viridis",
                       extent=(0, last.grid.length, 0, last.grid.length))
        fig.colorbar(im, ax=ax, label="|u|")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title(picks[-1][:-5])
    path = os.path.join(out_dir, "profile.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)
    return written
