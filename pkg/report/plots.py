from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from core.types import DomainId  # noqa: E402
from sim.log import TickRecord  # noqa: E402

TAU_BINS = 40


def phase_portrait(records: Sequence[TickRecord], path: str | Path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot([r.knee for r in records], [r.knee_rate for r in records], lw=0.6)
    ax.set_xlabel("knee angle (rad)")
    ax.set_ylabel("knee rate (rad/s)")
    ax.set_title(title or "knee phase portrait")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def clf_trace(records: Sequence[TickRecord], path: str | Path, title: str = "") -> None:
    qp = [r for r in records if r.qp_status]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    if qp:
        t = [r.t for r in qp]
        ax.plot(t, [r.Vdot for r in qp], lw=0.6, label="V dot")
        ax.plot(t, [r.bound for r in qp], lw=0.6, ls="--", label="-(gamma/eps) V")
        ax.legend(loc="upper right")
    ax.set_xlabel("time (s)")
    ax.set_title(title or "CLF derivative vs bound")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def torque_bands(records: Sequence[TickRecord], domain: DomainId, bins: int = TAU_BINS) -> tuple[np.ndarray, ...]:
    """Bin centres, mean and standard deviation of the knee torque against tau."""
    tau = np.array([r.tau for r in records if r.domain == domain])
    u = np.array([r.u_knee for r in records if r.domain == domain])
    edges = np.linspace(0.0, 1.0, bins + 1)
    idx = np.clip(np.digitize(tau, edges) - 1, 0, bins - 1)
    centres = 0.5 * (edges[:-1] + edges[1:])
    mean = np.full(bins, np.nan)
    std = np.full(bins, np.nan)
    for b in range(bins):
        sel = u[idx == b]
        if sel.size:
            mean[b], std[b] = sel.mean(), sel.std()
    return centres, mean, std


def torque_plot(records: Sequence[TickRecord], path: str | Path, title: str = "") -> None:
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.5), sharey=True)
    for ax, domain in zip(axes, (DomainId.PS, DomainId.PNS), strict=True):
        x, mean, std = torque_bands(records, domain)
        ax.plot(x, mean, lw=1.0)
        ax.fill_between(x, mean - 3 * std, mean + 3 * std, alpha=0.3)
        ax.set_xlabel("tau")
        ax.set_title(f"{domain.value}")
    axes[0].set_ylabel("knee torque (N m), mean +/- 3 sd")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
