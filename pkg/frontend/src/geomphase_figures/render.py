"""Render the four standard figures from geomphase output directories.

This package does no physics: it reads the documented CSV/JSON files and
draws them.  Phase axes are displayed in units of pi and energies in units
of the exchange constant; the time axis carries the 1/xi convention of the
data files.  Rendering is deterministic for fixed inputs and style.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

EVOLUTION_COLUMNS = ["t", "p1", "p2", "p3", "Gamma12", "Gamma3", "product_arg"]
EVOLUTION_COLUMNS_4 = ["t", "p1", "p2", "p3", "p4", "Gamma12", "Gamma3", "product_arg"]
ENERGY_COLUMNS = ["t", "E1", "E2", "E3", "D1", "D2", "D3"]
SWEEP_COLUMNS = [
    "Omega0",
    "A",
    "Gamma12",
    "product_arg",
    "adiabatic_flag",
    "max_adiabaticity_ratio",
    "status",
]

TIME_LABEL = r"$t\ [1/\xi]$"
_STATE_LABELS = (r"$|\downarrow\downarrow\rangle$", r"$|\psi^+\rangle$",
                 r"$|\uparrow\uparrow\rangle$", r"$|\psi^-\rangle$")


class SchemaMismatch(Exception):
    """A CSV file does not carry the documented columns."""


@dataclass(frozen=True)
class FigureSpec:
    """What to render: figure number, input directory, output image path."""

    figure_id: int
    input_dir: Path
    output_path: Path
    dpi: int = 150

    def __post_init__(self):
        if self.figure_id not in (1, 2, 3, 4):
            raise ValueError("figure_id must be 1..4")


def read_csv(path: Path, expected_columns, alternates=()):
    """Parse a delimited file, validating the header column by column.

    Returns (columns, data) with data shaped (n_rows, n_cols); data may be
    empty.  Raises SchemaMismatch naming the first offending column.
    """
    path = Path(path)
    if not path.exists():
        raise SchemaMismatch(f"{path}: file not found")
    lines = path.read_text().splitlines()
    if not lines:
        raise SchemaMismatch(f"{path}: empty file, expected header {expected_columns}")
    header = lines[0].split(",")
    for candidate in (expected_columns, *alternates):
        if header == list(candidate):
            break
    else:
        for i, name in enumerate(expected_columns):
            if i >= len(header) or header[i] != name:
                found = header[i] if i < len(header) else "<missing>"
                raise SchemaMismatch(
                    f"{path}: column {i + 1} is {found!r}, expected {name!r}"
                )
        raise SchemaMismatch(f"{path}: trailing unexpected columns {header[len(expected_columns):]}")
    rows = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise SchemaMismatch(f"{path}:{lineno}: expected {len(header)} fields")
        rows.append([float(x) for x in parts])
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    return header, data


def _read_summary(input_dir: Path) -> dict:
    path = Path(input_dir) / "summary.json"
    if not path.exists():
        raise SchemaMismatch(f"{path}: file not found")
    return json.loads(path.read_text())


def _new_figure(nrows, figsize):
    fig, axes = plt.subplots(nrows, 1, figsize=figsize, constrained_layout=True)
    return fig, (axes if nrows > 1 else [axes])


def render_energy_diagram(input_dir: Path, ax_levels, ax_gaps):
    _, data = read_csv(Path(input_dir) / "energy.csv", ENERGY_COLUMNS)
    if data.size:
        for i, style in zip(range(1, 4), ("-", "-", "-")):
            ax_levels.plot(data[:, 0], data[:, i], style, lw=1.4, label=f"E{i}")
        for i in range(4, 7):
            ax_levels.plot(data[:, 0], data[:, i], ":", lw=1.0, color="gray")
    ax_levels.set_xlabel(TIME_LABEL)
    ax_levels.set_ylabel(r"energy $[\xi]$")
    if data.size:
        ax_levels.legend(loc="upper left", fontsize=8)
    summary = _read_summary(input_dir)
    entries = summary.get("panel_b", [])
    if entries:
        xis = [e["xi"] for e in entries]
        gaps = [e["min_gap"] for e in entries]
        ax_gaps.semilogy(xis, gaps, "o-")
    ax_gaps.set_xlabel(r"exchange constant $\xi$")
    ax_gaps.set_ylabel(r"min level gap $[\xi]$")


def render_evolution(input_dir: Path, ax_pops, ax_phases, csv_name="evolution.csv"):
    header, data = read_csv(
        Path(input_dir) / csv_name, EVOLUTION_COLUMNS, alternates=(EVOLUTION_COLUMNS_4,)
    )
    n_pops = 4 if len(header) == 8 else 3
    if data.size:
        for i in range(n_pops):
            ax_pops.plot(data[:, 0], data[:, 1 + i], lw=1.4, label=_STATE_LABELS[i])
        # phases in units of pi; NaN rows break the curves naturally
        for off, label, style in (
            (0, r"$\Gamma_{12}/\pi$", "--"),
            (1, r"$\Gamma_{3}/\pi$", "-"),
            (2, r"$\arg(\gamma_{12}\gamma_3)/\pi$", "-."),
        ):
            ax_phases.plot(
                data[:, 0], data[:, n_pops + 1 + off] / np.pi, style, lw=1.2, label=label
            )
    ax_pops.set_ylabel("population")
    ax_pops.set_ylim(-0.05, 1.05)
    ax_phases.set_xlabel(TIME_LABEL)
    ax_phases.set_ylabel(r"phase $[\pi]$")
    ax_phases.set_ylim(-1.1, 1.1)
    if data.size:
        ax_pops.legend(loc="center left", fontsize=8)
        ax_phases.legend(loc="center left", fontsize=8)


def render_sweep(input_dir: Path, ax_gamma, ax_product):
    _, data = read_csv(Path(input_dir) / "sweep.csv", SWEEP_COLUMNS)
    if data.size:
        om0 = np.unique(data[:, 0])
        As = np.unique(data[:, 1])
        shape = (len(om0), len(As))
        bad = (data[:, 6] != 0) | ~np.isfinite(data[:, 2])
        gamma = np.ma.masked_where(bad, np.abs(data[:, 2])).reshape(shape) / np.pi
        product = np.ma.masked_where(
            (data[:, 6] != 0) | ~np.isfinite(data[:, 3]), np.abs(data[:, 3])
        ).reshape(shape) / np.pi
        for ax, grid, label in (
            (ax_gamma, gamma, r"$|\Gamma_{12}|\ [\pi]$"),
            (ax_product, product, r"$|\arg(\gamma_{12}\gamma_3)|\ [\pi]$"),
        ):
            mesh = ax.pcolormesh(om0, As, grid.T, shading="auto", cmap="viridis")
            cbar = ax.figure.colorbar(mesh, ax=ax)
            cbar.set_label(label, fontsize=9)
    for ax in (ax_gamma, ax_product):
        ax.set_xlabel(r"$\Omega_0\ [\xi]$")
        ax.set_ylabel(r"$A\ [\xi^2]$")


def render(spec: FigureSpec) -> Path:
    """Draw the requested figure and write it to spec.output_path."""
    input_dir = Path(spec.input_dir)
    if spec.figure_id == 1:
        fig, axes = _new_figure(2, (6.0, 6.4))
        render_energy_diagram(input_dir, axes[0], axes[1])
    elif spec.figure_id == 2:
        fig, axes = _new_figure(2, (6.0, 6.4))
        render_evolution(input_dir, axes[0], axes[1])
    elif spec.figure_id == 3:
        fig, axes = _new_figure(2, (5.6, 7.6))
        render_sweep(input_dir, axes[0], axes[1])
    else:
        fig, axes = _new_figure(2, (6.0, 6.4))
        render_evolution(input_dir, axes[0], axes[1], csv_name="twin.csv")
    try:
        out = Path(spec.output_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, dpi=spec.dpi, metadata={"Software": "geomphase-figures"})
    finally:
        plt.close(fig)
    return out
