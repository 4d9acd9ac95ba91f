"""Matplotlib rendering of run traces and sweep summaries to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .trace import IterationTrace


def plot_trace(trace: IterationTrace, path) -> None:
    """Four-panel convergence figure for one run: objective, gradient
    sup-norm, Lyapunov value, and Hamiltonian magnitude versus step."""
    steps = np.array([r.step for r in trace.records])
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), constrained_layout=True)
    panels = [
        ("energy", "objective E", False),
        ("grad_inf", "sup-norm of grad E", True),
        ("clf_value", "Lyapunov value V", True),
        ("hamiltonian", "|Hamiltonian|", True),
    ]
    for ax, (attr, label, log) in zip(axes.ravel(), panels):
        vals = np.array([getattr(r, attr) for r in trace.records], dtype=float)
        if attr == "hamiltonian":
            vals = np.abs(vals)
        if log:
            positive = vals > 0
            if positive.any():
                ax.semilogy(steps[positive], vals[positive], ".-", ms=3)
            else:
                ax.plot(steps, vals, ".-", ms=3)
        else:
            ax.plot(steps, vals, ".-", ms=3)
        ax.set_xlabel("step")
        ax.set_title(label, fontsize=10)
        ax.grid(True, alpha=0.3)
    algo = trace.metadata.get("config", {}).get("algo", "")
    problem = trace.metadata.get("config", {}).get("problem", "")
    fig.suptitle(f"{algo} on {problem}".strip())
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_convergence(problem_name: str, traces: dict, path) -> None:
    """Overlay gradient decay curves of several algorithms on one problem."""
    fig, ax = plt.subplots(figsize=(7, 4.5), constrained_layout=True)
    for algo, trace in traces.items():
        vals = np.array([r.grad_inf for r in trace.records], dtype=float)
        ax.semilogy(np.arange(len(vals)), np.maximum(vals, 1e-300), label=algo)
    ax.set_xlabel("record index")
    ax.set_ylabel("sup-norm of grad E")
    ax.set_title(problem_name)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep(rows: list, path) -> None:
    """Grouped bar chart of iteration counts per (problem, algorithm)."""
    problems = sorted({row["problem"] for row in rows})
    algos = sorted({row["algorithm"] for row in rows})
    width = 0.8 / max(1, len(algos))
    fig, ax = plt.subplots(figsize=(1.8 + 1.6 * len(problems), 4.5), constrained_layout=True)
    base = np.arange(len(problems), dtype=float)
    for j, algo in enumerate(algos):
        counts = []
        for p in problems:
            match = [r for r in rows if r["problem"] == p and r["algorithm"] == algo]
            counts.append(match[0]["iterations"] if match and match[0]["status"] == "ok" else 0)
        ax.bar(base + j * width, counts, width=width, label=algo)
    ax.set_xticks(base + 0.4 - width / 2)
    ax.set_xticklabels(problems, rotation=15, fontsize=8)
    ax.set_ylabel("iterations / samples to stop")
    ax.set_yscale("symlog")
    ax.legend(fontsize=8)
    ax.grid(True, axis="y", alpha=0.3)
    fig.savefig(path, dpi=120)
    plt.close(fig)
