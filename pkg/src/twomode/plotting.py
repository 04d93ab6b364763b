"""Optional PNG rendering of figure data (the CSV stays the primary output)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

LABELS = {"0": r"$\Phi=0$", "pi_2": r"$\Phi=\pi/2$", "pi": r"$\Phi=\pi$"}


def render_figure(data, path: str | Path, dpi: int = 120) -> Path:
    """Draw every data column of ``data`` against tau and save it to ``path``."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    try:
        for name, col in zip(data.header[1:], data.columns[1:]):
            symbol, _, phase = name.partition("_Phi_")
            ax.plot(data.taus, col, label=LABELS.get(phase, phase), lw=1.2)
        ax.set_xlabel(r"$\tau = \lambda t$")
        ax.set_ylabel("linear entropy $S_A$" if symbol == "S" else "exchange functional $E$")
        ax.set_title(data.title, fontsize=10)
        ax.set_xlim(data.taus[0], data.taus[-1])
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, dpi=dpi)
    finally:
        plt.close(fig)
    return path
