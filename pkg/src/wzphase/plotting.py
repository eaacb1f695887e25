"""Figure rendering for the CLI report path.

Each mode gets a small set of matplotlib figures written as PNG files next
to the delimited output.  Figures are a convenience view of the emitted
records; the CSV/JSON records remain the authoritative output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_CASE_ORDER = ["TrivialDiagonal", "Case1", "Case2", "Case3", "Case4",
               "Case5", "NonDegenerate"]


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def _plot_classify(records, stem):
    ts = [r["t"] for r in records]
    cases = [_CASE_ORDER.index(r["case"]) for r in records]
    residuals = [r["residual"] for r in records]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax1.step(ts, cases, where="mid")
    ax1.set_yticks(range(len(_CASE_ORDER)), _CASE_ORDER, fontsize=8)
    ax1.set_ylabel("case")
    ax2.semilogy(ts, np.maximum(residuals, 1e-18), ".-")
    ax2.set_xlabel("t")
    ax2.set_ylabel("condition residual")
    return [_save(fig, f"{stem}_cases.png")]


def _plot_spectrum(records, stem):
    ts = [r["t"] for r in records]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(ts, [r["e1"] for r in records], label="E1 (simple)")
    ax.plot(ts, [r["e2"] for r in records], label="E2 (degenerate)")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.legend()
    return [_save(fig, f"{stem}_levels.png")]


def _plot_connection(records, stem):
    ts = [r["t"] for r in records]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax1.plot(ts, [r["a1"] for r in records])
    ax1.set_ylabel("a1 pullback")
    ax2.plot(ts, [r["a2_11_re"] for r in records], label="a2[1,1]")
    ax2.plot(ts, [r["a2_22_re"] for r in records], label="a2[2,2]")
    off = [abs(complex(r["a2_12_re"], r["a2_12_im"])) for r in records]
    ax2.plot(ts, off, label="|a2[1,2]|")
    ax2.set_xlabel("t")
    ax2.set_ylabel("a2 pullback")
    ax2.legend(fontsize=8)
    return [_save(fig, f"{stem}_connection.png")]


def _plot_holonomy(records, stem):
    rec = records[0]
    g2 = np.array([[complex(rec["gamma2_11_re"], rec["gamma2_11_im"]),
                    complex(rec["gamma2_12_re"], rec["gamma2_12_im"])],
                   [complex(rec["gamma2_21_re"], rec["gamma2_21_im"]),
                    complex(rec["gamma2_22_re"], rec["gamma2_22_im"])]])
    phases = np.sort(np.angle(np.linalg.eigvals(g2)))
    g1 = complex(rec["gamma1_re"], rec["gamma1_im"])
    fig, ax = plt.subplots(figsize=(5, 5))
    circle = np.exp(1j * np.linspace(0, 2 * np.pi, 256))
    ax.plot(circle.real, circle.imag, color="0.8")
    ax.plot(g1.real, g1.imag, "o", label="gamma1")
    for k, ph in enumerate(phases):
        z = np.exp(1j * ph)
        ax.plot(z.real, z.imag, "s", label=f"gamma2 eigenphase {k + 1}")
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.legend(fontsize=8)
    return [_save(fig, f"{stem}_holonomy.png")]


def _plot_verify(records, stem):
    Ts = [r["T"] for r in records]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(Ts, [r["unitary_distance"] for r in records], "o-",
              label="block distance")
    ax.loglog(Ts, [max(r["subspace_leakage"], 1e-18) for r in records], "s-",
              label="leakage")
    ax.set_xlabel("T")
    ax.set_ylabel("error")
    ax.legend()
    return [_save(fig, f"{stem}_adiabatic.png")]


_PLOTTERS = {"classify": _plot_classify, "spectrum": _plot_spectrum,
             "connection": _plot_connection, "holonomy": _plot_holonomy,
             "verify": _plot_verify}


def render(mode: str, records: list[dict], stem: str) -> list[str]:
    """Render the figures for one mode; returns the written paths."""
    if not records:
        return []
    return _PLOTTERS[mode](records, stem)
