"""Figure rendering for the command-line report paths.

Each renderer takes the already-computed rows a command writes to its CSV and
saves a PNG next to it.  Kept import-light: matplotlib loads only when a
figure is actually drawn.
"""

from __future__ import annotations


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def convergence_figure(rows, path, decay: float | None = None) -> None:
    """Fidelity trace and its log-residual, one panel each."""
    plt = _pyplot()
    ns = [r[0] for r in rows]
    f_sim = [r[1] for r in rows]
    f_ana = [r[2] for r in rows]
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax0.plot(ns, f_sim, "o-", label="simulated")
    ax0.plot(ns, f_ana, "--", label="geometric law")
    ax0.set_xlabel("iteration")
    ax0.set_ylabel("target fidelity")
    ax0.set_ylim(-0.02, 1.02)
    ax0.legend(frameon=False)
    resid = [(n, 1.0 - f) for n, f in zip(ns, f_sim) if 1.0 - f > 0]
    if resid:
        ax1.semilogy([r[0] for r in resid], [r[1] for r in resid], "o-")
    if decay is not None and 0 < decay < 1 and resid:
        n0, r0 = resid[0]
        ax1.semilogy(
            [r[0] for r in resid],
            [r0 * decay ** (n - n0) for n, _ in resid],
            "--",
            label=f"decay {decay:.6g}",
        )
        ax1.legend(frameon=False)
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("1 - fidelity")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def filter_figure(rows, path) -> None:
    """Filtered fidelity plus surviving intensity and the gain repaying it."""
    plt = _pyplot()
    ns = [r[0] for r in rows]
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax0.plot(ns, [r[1] for r in rows], "o-", label="numeric")
    ax0.plot(ns, [r[2] for r in rows], "--", label="closed form")
    ax0.set_xlabel("iteration")
    ax0.set_ylabel("target fidelity")
    ax0.set_ylim(-0.02, 1.02)
    ax0.legend(frameon=False)
    ax1.semilogy(ns, [r[3] for r in rows], "o-", label="surviving norm$^2$")
    ax1.semilogy(ns, [r[4] for r in rows], "s--", label="required gain")
    ax1.set_xlabel("iteration")
    ax1.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def pulse_train_figure(rows, path, x_label: str) -> None:
    """Per-bin weights (stems) with per-bin fidelity overlay."""
    plt = _pyplot()
    xs = [r[1] for r in rows]
    weights = [r[6] for r in rows]
    fids = [r[7] for r in rows]
    fig, ax0 = plt.subplots(figsize=(7, 3.4))
    ax0.stem(xs, weights, basefmt=" ")
    ax0.set_xlabel(x_label)
    ax0.set_ylabel("weight (norm$^2$)")
    ax0.set_ylim(0, max(weights) * 1.15 + 1e-12)
    ax1 = ax0.twinx()
    ax1.plot(xs, fids, "r.", alpha=0.7)
    ax1.set_ylabel("per-bin target fidelity", color="r")
    ax1.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
