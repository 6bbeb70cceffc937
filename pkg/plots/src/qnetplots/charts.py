"""Render qnetgec CSV results into the three standard chart kinds.

The renderer is deliberately dumb about provenance: it consumes only the
published CSV column contracts, recomputes the critical-region boundary from
its closed form, and writes byte-stable PNGs (fixed backend, fixed dpi, no
timestamps or software tags).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

CHART_KINDS = ("gec-curves", "region-map", "tradeoff")

_SAVE_OPTS = {"dpi": 150, "metadata": {"Software": None}}

_COLUMNS = {
    "gec-curves": ("geometry", "L", "p_x", "fidelity", "se"),
    "region-map": ("P_c", "p_x_prime", "F"),
    "tradeoff": ("alpha", "alpha_prime", "phi", "F", "F_se"),
}

_STRATEGY_COLUMNS = ("alpha", "alpha_prime", "P_c", "p_x_prime")


class ChartError(ValueError):
    """Unusable input: unknown kind, empty table, or missing columns."""


@dataclass(frozen=True)
class ChartSpec:
    """One rendering job: what to draw, from where, to where."""

    kind: str
    csv_in: str
    out: str
    csv_in2: str | None = None
    boundary: bool = True

    def __post_init__(self) -> None:
        if self.kind not in CHART_KINDS:
            raise ChartError(
                f"unknown chart kind {self.kind!r}; expected one of {CHART_KINDS}"
            )


def read_table(path: str) -> list[dict[str, str]]:
    """Read a results CSV, skipping `#` comment lines; empty data is an error."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    if not rows:
        raise ChartError(f"{path}: no data rows")
    return rows


def require_columns(rows: list[dict[str, str]], needed, path: str) -> None:
    missing = [c for c in needed if c not in rows[0]]
    if missing:
        raise ChartError(f"{path}: missing columns: {', '.join(missing)}")


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def boundary_error_rate(P_c: float) -> float:
    """Solve (1 - H(p)) * P_c = 1/2 for p on [0, 1/2].

    Defined for P_c > 1/2; returns 0 at the percolation end of the curve.
    """
    if P_c <= 0.5:
        return 0.0
    target = 1.0 - 0.5 / P_c
    lo, hi = 0.0, 0.5
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def boundary_curve(n: int = 201) -> tuple[np.ndarray, np.ndarray]:
    """The critical-region boundary p*(P_c) for P_c in [1/2, 1]."""
    pcs = np.linspace(0.5, 1.0, n)
    return pcs, np.array([boundary_error_rate(float(pc)) for pc in pcs])


def _floats(rows, col) -> np.ndarray:
    return np.array([float(r[col]) for r in rows])


def _render_gec_curves(spec: ChartSpec) -> None:
    rows = read_table(spec.csv_in)
    require_columns(rows, _COLUMNS["gec-curves"], spec.csv_in)
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    groups: dict[tuple[str, str], list[dict[str, str]]] = {}
    for r in rows:
        groups.setdefault((r["geometry"], r["L"]), []).append(r)
    for (geometry, L), grp in sorted(groups.items()):
        grp = sorted(grp, key=lambda r: float(r["p_x"]))
        ax.errorbar(
            _floats(grp, "p_x"), _floats(grp, "fidelity"), yerr=_floats(grp, "se"),
            marker="o", markersize=3.5, capsize=2, linewidth=1.2,
            label=f"{geometry} {L}x{L}",
        )
    for p_star in (0.11, 0.17):
        ax.axvline(p_star, color="black", linestyle=":", linewidth=1.0)
    ax.set_xlabel("bit-flip probability p_x")
    ax.set_ylabel("pair success / fidelity")
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="lower left", fontsize=8)
    ax.grid(alpha=0.25)
    fig.tight_layout()
    fig.savefig(spec.out, **_SAVE_OPTS)
    plt.close(fig)


def _render_region_map(spec: ChartSpec) -> None:
    rows = read_table(spec.csv_in)
    require_columns(rows, _COLUMNS["region-map"], spec.csv_in)
    pcs = np.array(sorted({float(r["P_c"]) for r in rows}))
    pxs = np.array(sorted({float(r["p_x_prime"]) for r in rows}))
    pc_idx = {v: i for i, v in enumerate(pcs)}
    px_idx = {v: i for i, v in enumerate(pxs)}
    grid = np.full((len(pxs), len(pcs)), np.nan)
    for r in rows:
        grid[px_idx[float(r["p_x_prime"])], pc_idx[float(r["P_c"])]] = float(r["F"])

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    mesh = ax.pcolormesh(
        pcs, pxs, np.ma.masked_invalid(grid),
        shading="nearest", cmap="viridis", vmin=0.0, vmax=1.0,
    )
    fig.colorbar(mesh, ax=ax, label="fidelity F")
    if spec.boundary:
        bx, by = boundary_curve()
        ax.plot(bx, by, color="black", linewidth=2.5)
    if spec.csv_in2:
        strategy = read_table(spec.csv_in2)
        require_columns(strategy, _STRATEGY_COLUMNS, spec.csv_in2)
        by_alpha: dict[str, list[dict[str, str]]] = {}
        for r in strategy:
            by_alpha.setdefault(r["alpha"], []).append(r)
        for alpha, grp in sorted(by_alpha.items()):
            grp = sorted(grp, key=lambda r: float(r["alpha_prime"]))
            ax.plot(
                _floats(grp, "P_c"), _floats(grp, "p_x_prime"),
                linestyle="--", linewidth=1.2, color="white",
            )
            ax.annotate(f"a={alpha}", (float(grp[-1]["P_c"]), float(grp[-1]["p_x_prime"])),
                        color="white", fontsize=7, ha="right", va="bottom")
    ax.set_xlabel("bond conversion probability P_c")
    ax.set_ylabel("bit-flip probability p_x'")
    fig.tight_layout()
    fig.savefig(spec.out, **_SAVE_OPTS)
    plt.close(fig)


def _render_tradeoff(spec: ChartSpec) -> None:
    rows = read_table(spec.csv_in)
    require_columns(rows, _COLUMNS["tradeoff"], spec.csv_in)
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    by_alpha: dict[str, list[dict[str, str]]] = {}
    for r in rows:
        by_alpha.setdefault(r["alpha"], []).append(r)
    for alpha, grp in sorted(by_alpha.items()):
        grp = sorted(grp, key=lambda r: float(r["alpha_prime"]))
        ax.errorbar(
            _floats(grp, "phi"), _floats(grp, "F"), yerr=_floats(grp, "F_se"),
            marker="s", markersize=3.5, capsize=2, linewidth=1.2,
            label=f"alpha={alpha}",
        )
    ax.set_xlabel("largest-cluster fraction phi")
    ax.set_ylabel("pair fidelity F")
    ax.set_xlim(0.0, 1.05)
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(alpha=0.25)
    fig.tight_layout()
    fig.savefig(spec.out, **_SAVE_OPTS)
    plt.close(fig)


_RENDERERS = {
    "gec-curves": _render_gec_curves,
    "region-map": _render_region_map,
    "tradeoff": _render_tradeoff,
}


def render(spec: ChartSpec) -> None:
    """Render one chart to ``spec.out``; raises ChartError on bad input."""
    _RENDERERS[spec.kind](spec)
