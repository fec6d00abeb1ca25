"""Report figures rendered to files alongside the delimited output."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_solve_figures(report: dict, outdir: str) -> list[str]:
    """Write residual and convergence figures for one solve report.

    Returns the paths written: residuals.png with the per-point residual
    components of both frames, convergence.png with the iteration step
    sizes and condition estimates.
    """
    os.makedirs(outdir, exist_ok=True)
    written = []

    ids = [row["id"] for row in report["residuals"]]
    v_src = np.array([row["v_source_m"] for row in report["residuals"]])
    v_dst = np.array([row["v_target_m"] for row in report["residuals"]])
    n = len(ids)
    x = np.arange(n)
    fig, axes = plt.subplots(2, 1, figsize=(max(6.0, 0.9 * n + 3), 6.0), sharex=True)
    width = 0.25
    for ax, block, title in ((axes[0], v_src, "source frame"),
                             (axes[1], v_dst, "target frame")):
        for j, comp in enumerate("xyz"):
            ax.bar(x + (j - 1) * width, block[:, j], width, label=f"v_{comp}")
        ax.axhline(0.0, color="k", linewidth=0.6)
        ax.set_ylabel("residual [m]")
        ax.set_title(f"residuals, {title}")
        ax.legend(fontsize=8)
    axes[1].set_xticks(x)
    axes[1].set_xticklabels(ids, rotation=30, ha="right", fontsize=8)
    fig.suptitle(f"{report['method']} ({report['mode']}, {report['dim']}D), "
                 f"sigma0 = {report['sigma0']:.4g}")
    fig.tight_layout()
    path = os.path.join(outdir, "residuals.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax1 = plt.subplots(figsize=(6.4, 4.0))
    its = np.arange(1, len(report["objective_log"]) + 1)
    ax1.semilogy(its, np.maximum(report["objective_log"], 1e-300), "o-",
                 color="tab:blue", label="v'Pv")
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("objective v'Pv", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.semilogy(its, report["condition_log"], "s--", color="tab:red",
                 label="condition estimate")
    ax2.set_ylabel("condition estimate", color="tab:red")
    fig.suptitle("iteration diagnostics")
    fig.tight_layout()
    path = os.path.join(outdir, "convergence.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written


def render_compare_figure(table: dict, outdir: str) -> list[str]:
    """Bar chart of per-method parameter deviations from their common mean."""
    os.makedirs(outdir, exist_ok=True)
    methods = [m for m, col in table["columns"].items() if "error" not in col]
    if len(methods) < 2:
        return []
    quants = ("lambda", "eps_deg", "psi_deg", "omega_deg", "t_x", "t_y", "t_z", "sigma0")
    vals = np.array([[table["columns"][m][q] for q in quants] for m in methods])
    dev = np.abs(vals - vals.mean(axis=0, keepdims=True))
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    x = np.arange(len(quants))
    width = 0.8 / len(methods)
    for i, m in enumerate(methods):
        ax.bar(x + i * width, np.maximum(dev[i], 1e-18), width, label=m)
    ax.set_yscale("log")
    ax.set_xticks(x + 0.4 - width / 2)
    ax.set_xticklabels(quants, rotation=20, fontsize=8)
    ax.set_ylabel("|deviation from method mean|")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(outdir, "method_agreement.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]
