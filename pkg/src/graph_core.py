"""
Graph Core Module

This module holds the load-sharing network representation together with the
quantities the stability analysis is built on:

- the weighted in-degree w_i = Σ_j a_ji
- the weighted in-Laplacian Λ = D - A with D = diag(w), so that Λ^T·1 = 0
- Gershgorin discs of an arbitrary square matrix (row or column mode)

Convention: the adjacency entry A[j, i] = a_ji is the weight of the directed
offloading edge j -> i. Matrices are dense; the eigen-solves downstream cost
O(N^3), which is fine for desk-scale networks (N up to a few thousand).
"""

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DataError, ParameterError, ShapeError
from .utils import TOL, as_finite_matrix

logger = logging.getLogger(__name__)

Edge = Tuple[int, int, float]


class Network:
    """A weighted directed load-sharing network between base stations.

    The adjacency matrix is copied on construction and frozen (read-only), so a
    Network can be shared freely between threads.

    Attributes:
        _adjacency (np.ndarray): n×n matrix with A[j, i] = a_ji >= 0
        _positions (np.ndarray | None): n×2 node coordinates, if known
        _seed (int | None): Master seed the network was generated from
        _generator (dict): Description of how the network was produced

    Examples:
        >>> net = Network.from_edges(2, [(0, 1, 1.0)])
        >>> net.n
        2
        >>> in_degree(net).tolist()
        [0.0, 1.0]
    """

    def __init__(self, adjacency: Any, positions: Optional[Any] = None,
                 seed: Optional[int] = None, generator: Optional[Dict[str, Any]] = None):
        """Initialize a Network.

        Args:
            adjacency: Square matrix of non-negative finite weights, zero diagonal
            positions: Optional n×2 array of node coordinates
            seed (int, optional): Master seed recorded for provenance
            generator (dict, optional): Generator parameters recorded for provenance

        Raises:
            ShapeError: If adjacency is not square or positions do not match n
            DataError: If entries are non-finite, negative or on the diagonal
        """
        A = np.array(as_finite_matrix("adjacency", adjacency), dtype=float)
        if np.any(A < 0):
            raise DataError("adjacency entries must be >= 0")
        if np.any(np.diag(A) != 0):
            raise DataError("adjacency must have a zero diagonal (no self-loops)")
        A.setflags(write=False)
        self._adjacency = A

        if positions is not None:
            P = np.array(positions, dtype=float)
            if P.size == 0:
                P = P.reshape(0, 2)
            if P.shape != (A.shape[0], 2):
                raise ShapeError(f"positions must have shape ({A.shape[0]}, 2), got {P.shape}")
            if not np.all(np.isfinite(P)):
                raise DataError("positions must be finite")
            P.setflags(write=False)
            self._positions = P
        else:
            self._positions = None
        self._seed = seed
        self._generator = dict(generator) if generator else {}

    @property
    def n(self) -> int:
        """int: Number of nodes."""
        return self._adjacency.shape[0]

    @property
    def adjacency(self) -> np.ndarray:
        """np.ndarray: Read-only adjacency matrix, A[j, i] = a_ji."""
        return self._adjacency

    @property
    def positions(self) -> Optional[np.ndarray]:
        """np.ndarray | None: Read-only node coordinates."""
        return self._positions

    @property
    def seed(self) -> Optional[int]:
        """int | None: Master seed recorded at generation time."""
        return self._seed

    @property
    def generator(self) -> Dict[str, Any]:
        """dict: Copy of the generator description."""
        return dict(self._generator)

    @property
    def edge_count(self) -> int:
        """int: Number of directed edges (positive adjacency entries)."""
        return int(np.count_nonzero(self._adjacency))

    def edges(self) -> List[Edge]:
        """List the directed edges as (j, i, a_ji) triples in row-major order."""
        rows, cols = np.nonzero(self._adjacency)
        return [(int(j), int(i), float(self._adjacency[j, i])) for j, i in zip(rows, cols)]

    def is_symmetric(self) -> bool:
        """bool: True when a_ji == a_ij for every pair."""
        return bool(np.array_equal(self._adjacency, self._adjacency.T))

    def has_unit_weights(self) -> bool:
        """bool: True when every edge weight is exactly 1."""
        A = self._adjacency
        return bool(np.all((A == 0) | (A == 1)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[float]], positions: Optional[Any] = None,
                   seed: Optional[int] = None, generator: Optional[Dict[str, Any]] = None) -> "Network":
        """Build a network from (j, i[, weight]) edge triples.

        Args:
            n (int): Number of nodes
            edges: Iterable of (j, i) or (j, i, weight); weight defaults to 1
            positions: Optional node coordinates

        Raises:
            ParameterError: If n is negative
            DataError: If an edge references a node outside range(n)

        Examples:
            >>> Network.from_edges(3, [(0, 1), (1, 0)]).edge_count
            2
        """
        if isinstance(n, bool) or int(n) != n or n < 0:
            raise ParameterError(f"n must be a non-negative integer, got {n!r}")
        n = int(n)
        A = np.zeros((n, n))
        for edge in edges:
            if len(edge) not in (2, 3):
                raise DataError(f"edge must be (j, i) or (j, i, weight), got {edge!r}")
            j, i = int(edge[0]), int(edge[1])
            weight = float(edge[2]) if len(edge) == 3 else 1.0
            if not (0 <= j < n and 0 <= i < n):
                raise DataError(f"edge {edge!r} references a node outside 0..{n - 1}")
            A[j, i] = weight
        return cls(A, positions=positions, seed=seed, generator=generator)

    @classmethod
    def complete(cls, n: int) -> "Network":
        """Complete graph on n nodes with unit weights."""
        A = np.ones((n, n)) - np.eye(n)
        return cls(A, generator={"kind": "complete", "n": n})

    @classmethod
    def empty(cls, n: int) -> "Network":
        """Graph on n nodes with no edges."""
        return cls(np.zeros((n, n)), generator={"kind": "empty", "n": n})

    def to_dict(self) -> Dict[str, Any]:
        """Serialize to the network JSON schema.

        Returns:
            dict: {"n", "positions" (optional), "edges": [[j, i, w], ...],
            "seed", "generator"}
        """
        data: Dict[str, Any] = {"n": self.n}
        if self._positions is not None:
            data["positions"] = [[float(x), float(y)] for x, y in self._positions]
        data["edges"] = [[j, i, w] for j, i, w in self.edges()]
        data["seed"] = self._seed
        data["generator"] = self.generator
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Network":
        """Rebuild a network from the network JSON schema.

        Raises:
            DataError: If required keys are missing or malformed
        """
        if not isinstance(data, dict) or "n" not in data or "edges" not in data:
            raise DataError("network JSON must be an object with 'n' and 'edges'")
        try:
            return cls.from_edges(
                data["n"], data["edges"], positions=data.get("positions"),
                seed=data.get("seed"), generator=data.get("generator"),
            )
        except (TypeError, ValueError) as e:
            raise DataError(f"invalid network JSON: {e}") from e

    def save_json(self, path: Union[str, Path]) -> None:
        """Write the network JSON file (deterministic formatting)."""
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def load_json(cls, path: Union[str, Path]) -> "Network":
        """Read a network JSON file.

        Raises:
            DataError: If the file is missing, not JSON, or not a valid network
        """
        path = Path(path)
        if not path.exists():
            raise DataError(f"network file not found: {path}")
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise DataError(f"network file {path} is not valid JSON: {e}") from e
        network = cls.from_dict(data)
        logger.debug("loaded network n=%d edges=%d from %s", network.n, network.edge_count, path)
        return network

    def __str__(self) -> str:
        return f"Network ({self.n} nodes, {self.edge_count} directed edges)"

    def __repr__(self) -> str:
        return f"Network(n={self.n}, edges={self.edge_count}, seed={self._seed})"


def in_degree(network: Network) -> np.ndarray:
    """Weighted in-degree vector w_i = Σ_j a_ji (column sums of A).

    Examples:
        >>> in_degree(Network.from_edges(2, [(0, 1)])).tolist()
        [0.0, 1.0]
    """
    return network.adjacency.sum(axis=0)


def in_laplacian(network: Network) -> np.ndarray:
    """Weighted in-Laplacian Λ = diag(w) - A.

    Its transpose annihilates the all-ones vector, and the Jacobian at the
    uniform equilibrium is f'(r)·Id - γ·Λ^T.

    Examples:
        >>> in_laplacian(Network.from_edges(2, [(0, 1)])).tolist()
        [[0.0, -1.0], [0.0, 1.0]]
    """
    return np.diag(in_degree(network)) - network.adjacency


def laplacian_kernel_residual(laplacian: np.ndarray) -> float:
    """Return ||Λ^T·1||_∞, which is zero for an exact in-Laplacian."""
    L = np.asarray(laplacian, dtype=float)
    if L.size == 0:
        return 0.0
    return float(np.max(np.abs(L.T @ np.ones(L.shape[0]))))


@dataclass(frozen=True)
class GershgorinDisc:
    """A closed disc {z : |z - center| <= radius} in the complex plane."""

    center: complex
    radius: float

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        """bool: True if z lies in the disc enlarged by tol."""
        return abs(complex(z) - self.center) <= self.radius + tol

    @property
    def rightmost(self) -> float:
        """float: Largest real part of any point in the disc."""
        return float(self.center.real + self.radius)


def gershgorin_discs(M: Any, mode: str = "rows") -> List[GershgorinDisc]:
    """Gershgorin discs of a square matrix.

    Args:
        M: Square real matrix
        mode (str): 'rows' (radius Σ_{k≠i}|M_ik|) or 'columns' (Σ_{k≠i}|M_ki|)

    Returns:
        List[GershgorinDisc]: One disc per diagonal entry

    Raises:
        ShapeError: If M is not square
        ParameterError: If mode is not 'rows' or 'columns'

    Examples:
        >>> [d.radius for d in gershgorin_discs([[-1.0, 0.0], [0.0, -3.0]])]
        [0.0, 0.0]
    """
    if mode not in ("rows", "columns"):
        raise ParameterError(f"mode must be 'rows' or 'columns', got {mode!r}")
    A = as_finite_matrix("M", M)
    absA = np.abs(A)
    off = absA.sum(axis=1 if mode == "rows" else 0) - np.diag(absA)
    return [GershgorinDisc(complex(c), float(r)) for c, r in zip(np.diag(A), off)]


def in_disc_union(z: complex, discs: Sequence[GershgorinDisc], tol: float = TOL.containment) -> bool:
    """bool: True if z lies in the union of the discs (each enlarged by tol)."""
    return any(disc.contains(z, tol) for disc in discs)


def export_laplacian_csv(laplacian: np.ndarray, path: Union[str, Path]) -> None:
    """Write a Laplacian as a headerless CSV matrix (for debugging)."""
    L = np.asarray(laplacian, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        for row in L:
            writer.writerow([repr(float(x)) for x in row])


def export_discs_csv(discs: Sequence[GershgorinDisc], path: Union[str, Path], mode: str) -> None:
    """Write Gershgorin discs as CSV with header index,center_re,center_im,radius,mode."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["index", "center_re", "center_im", "radius", "mode"])
        for idx, disc in enumerate(discs):
            writer.writerow([idx, repr(disc.center.real), repr(disc.center.imag),
                             repr(disc.radius), mode])
