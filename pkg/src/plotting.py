"""
Plotting Module

Static SVG scatter plots for the command-line workflow: the network layout
(nodes and edges) and an eigenvalue scatter with Gershgorin disc outlines.

Figures are built with the object-oriented matplotlib API, so no global
pyplot state is touched. SVG output is made byte-reproducible by fixing the
element-id salt and dropping the creation date.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

from matplotlib.collections import LineCollection  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

from .errors import DataError  # noqa: E402
from .graph_core import GershgorinDisc, Network  # noqa: E402
from .spectral import Spectrum  # noqa: E402

logger = logging.getLogger(__name__)

_SVG_RC = {"svg.hashsalt": "loadstab", "svg.fonttype": "none"}


def _save_svg(fig: Figure, path: Union[str, Path]) -> None:
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.debug("wrote %s", path)


def plot_network_svg(network: Network, path: Union[str, Path], title: Optional[str] = None) -> None:
    """Scatter of node positions with one segment per connected pair.

    Raises:
        DataError: If the network carries no positions
    """
    if network.positions is None:
        raise DataError("network has no positions to plot")
    P = network.positions
    fig = Figure(figsize=(6, 6))
    ax = fig.add_subplot(1, 1, 1)
    pairs = {(min(j, i), max(j, i)) for j, i, _ in network.edges()}
    if pairs:
        segments = [[P[a], P[b]] for a, b in sorted(pairs)]
        ax.add_collection(LineCollection(segments, colors="0.6", linewidths=0.6, zorder=1))
    ax.scatter(P[:, 0], P[:, 1], s=12, color="tab:blue", zorder=2)
    window = network.generator.get("window")
    if window:
        ax.set_xlim(window["x_min"], window["x_max"])
        ax.set_ylim(window["y_min"], window["y_max"])
    ax.set_aspect("equal")
    ax.set_title(title or str(network))
    _save_svg(fig, path)


def plot_spectrum_svg(spectrum: Spectrum, discs: Sequence[GershgorinDisc], path: Union[str, Path],
                      title: str = "Eigenvalues and Gershgorin discs") -> None:
    """Eigenvalue scatter in the complex plane with disc outlines."""
    fig = Figure(figsize=(6, 5))
    ax = fig.add_subplot(1, 1, 1)
    for disc in discs:
        ax.add_patch(Circle((disc.center.real, disc.center.imag), disc.radius,
                            fill=False, edgecolor="0.7", linewidth=0.6))
    ev = spectrum.sorted()
    ax.scatter(ev.real, ev.imag, s=10, color="tab:red", zorder=3)
    ax.axvline(0.0, color="k", linewidth=0.5)
    ax.axhline(0.0, color="k", linewidth=0.5)
    ax.autoscale_view()
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title)
    _save_svg(fig, path)
