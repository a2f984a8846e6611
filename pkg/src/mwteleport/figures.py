"""Figure rendering for CLI reports.

Every function takes already-computed report data and writes one PNG;
nothing here recomputes physics.  The Agg backend is forced so the CLI
works headless.
"""

from __future__ import annotations

from typing import Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig: plt.Figure, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_budget(result: dict[str, Any], path: str) -> str:
    """Stacked contributions against the classical threshold."""
    fig, ax = plt.subplots(figsize=(5, 4))
    labels = ["shared correlation", "measurement chain"]
    values = [result["delta_xi_prime2"], result["a_total"]]
    ax.bar(labels, values, color=["tab:blue", "tab:orange"])
    ax.axhline(1.0, color="k", linestyle="--", linewidth=1,
               label="classical bound on the sum")
    ax.set_ylabel("added noise (vacuum units)")
    ax.set_title(f"fidelity {result['fidelity']:.4f}")
    ax.legend()
    return _finish(fig, path)


def render_sweep(axes: list[dict[str, Any]], rows: list[dict[str, Any]], path: str) -> str:
    """Line plot for one axis, fidelity heat map for two."""
    fig, ax = plt.subplots(figsize=(6, 4))
    if len(axes) == 1:
        name = axes[0]["path"]
        xs = [row[name] for row in rows]
        ax.plot(xs, [row["fidelity"] for row in rows], marker="o", label="fidelity")
        ax.plot(xs, [row["delta_xi_prime2"] for row in rows], marker="s",
                label="shared correlation")
        ax.axhline(0.5, color="k", linestyle="--", linewidth=1)
        ax.set_xlabel(name)
        ax.legend()
    else:
        n0, n1 = axes[0]["path"], axes[1]["path"]
        xs0 = sorted({row[n0] for row in rows})
        xs1 = sorted({row[n1] for row in rows})
        grid = np.full((len(xs0), len(xs1)), np.nan)
        for row in rows:
            grid[xs0.index(row[n0]), xs1.index(row[n1])] = row["fidelity"]
        mesh = ax.pcolormesh(xs1, xs0, grid, shading="nearest")
        fig.colorbar(mesh, ax=ax, label="fidelity")
        ax.set_xlabel(n1)
        ax.set_ylabel(n0)
    ax.set_title("scenario sweep")
    return _finish(fig, path)


def render_teleport(fidelities: np.ndarray, expected: float, path: str) -> str:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.hist(fidelities, bins=60, color="tab:blue", alpha=0.8)
    ax.axvline(expected, color="k", linestyle="--", linewidth=1, label="closed form")
    ax.axvline(float(np.mean(fidelities)), color="tab:red", linewidth=1, label="sample mean")
    ax.set_xlabel("single-run fidelity")
    ax.set_ylabel("count")
    ax.legend()
    return _finish(fig, path)


def render_repeater(result: dict[str, Any], path: str) -> str:
    fig, ax = plt.subplots(figsize=(5, 4))
    stages = ["before", "after", "after_averaged"]
    xs = np.arange(len(stages))
    sums = [result[s]["delta_xi2"] for s in stages]
    ax.bar(xs - 0.18, sums, width=0.36, label="joint quadrature variance sum")
    ax.bar(xs + 0.18, [result[s]["delta_xi_perp2"] for s in stages],
           width=0.36, label="anti-squeezed partner")
    ax.axhline(1.0, color="k", linestyle="--", linewidth=1)
    ax.set_xticks(xs, stages)
    ax.set_yscale("log")
    ax.set_ylabel("variance (vacuum units)")
    ax.legend()
    ax.set_title(f"gain {result['gain']:.4f}")
    return _finish(fig, path)


def render_kerr(result: dict[str, Any], path: str) -> str:
    fig, ax = plt.subplots(figsize=(5, 4))
    labels = ["stark shift", "cross-Kerr", "fourth-order prediction"]
    values = [abs(result["chi_stark"]), abs(result["chi_kerr"]), abs(result["prediction"])]
    ax.bar(labels, values, color=["tab:blue", "tab:orange", "tab:green"])
    ax.set_yscale("log")
    ax.set_ylabel("rate magnitude")
    ax.set_title(f"fit residual {result['fit_residual']:.2e} rad")
    ax.tick_params(axis="x", labelrotation=12)
    return _finish(fig, path)
