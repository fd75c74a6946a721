"""Figures written next to the delimited CLI output. Agg backend only."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _style(ax):
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    ax.grid(alpha=0.3, linewidth=0.5)


def plot_valuation_trace(trace, path, title=None):
    """Valuation at each level n against the threshold phi(p^n)."""
    ns = [r.n for r in trace]
    vals = [r.valuation for r in trace]
    phis = [r.phi_pn for r in trace]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(ns, phis, "--", color="0.5", label="phi(p^n)")
    ax.plot(ns, vals, "o-", color="C0", label="valuation")
    for r in trace:
        if r.verdict.kind == "exact":
            ax.annotate(str(r.verdict), (r.n, r.valuation), textcoords="offset points", xytext=(6, -12))
    ax.set_xticks(ns)
    ax.set_xlabel("n")
    ax.set_ylabel("ord at (1 - zeta)")
    if trace:
        r = trace[0]
        ax.set_title(title or f"D={r.D}, p={r.p}")
    ax.legend(frameon=False, fontsize=8)
    _style(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_survey(records, path, p=None):
    """Final lambda sum (or lower bound) per ell."""
    exact = [(r["ell"], r["verdict"]["value"]) for r in records
             if r["status"] == "ok" and r["verdict"]["kind"] == "exact"]
    lower = [(r["ell"], r["verdict"]["value"]) for r in records
             if r["status"] == "ok" and r["verdict"]["kind"] == "lower_bound"]
    fig, ax = plt.subplots(figsize=(6, 3.2))
    if exact:
        ax.plot(*zip(*exact), "o", color="C0", label="exact")
    if lower:
        ax.plot(*zip(*lower), "^", color="C3", label="lower bound")
    ax.set_xlabel("ell")
    ax.set_ylabel("lambda sum")
    ax.set_title(f"p = {p}" if p else "survey")
    if exact or lower:
        ax.legend(frameon=False, fontsize=8)
    _style(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
