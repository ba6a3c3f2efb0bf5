"""
Spectral Module

Dense eigenvalue computation, spectral abscissa and assembly of the Jacobian
at the uniform equilibrium r·1:

    J(r·1) = f'(r)·Id - γ·Λ^T

so that its eigenvalues are μ_i = f'(r) - γ·λ_i for the Laplacian eigenvalues
λ_i. Eigenvalues come from LAPACK's Hessenberg reduction + shifted QR
(numpy.linalg.eigvals), which is backward stable and returns exact conjugate
pairs for real input.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError, ShapeError
from .utils import as_finite_matrix, require_finite

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Multiset of eigenvalues of an n×n real matrix.

    Attributes:
        eigenvalues (np.ndarray): Complex eigenvalues, multiplicity included
        source_dim (int): Dimension n of the source matrix
    """

    eigenvalues: np.ndarray
    source_dim: int

    def __len__(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def real(self) -> np.ndarray:
        return self.eigenvalues.real

    @property
    def imag(self) -> np.ndarray:
        return self.eigenvalues.imag

    def sorted(self) -> np.ndarray:
        """Eigenvalues ordered by real part, then imaginary part."""
        ev = self.eigenvalues
        return ev[np.lexsort((ev.imag, ev.real))]

    def count_near(self, value: complex, tol: float) -> int:
        """Number of eigenvalues within tol of value."""
        return int(np.count_nonzero(np.abs(self.eigenvalues - value) <= tol))

    def to_csv(self, path: Union[str, Path]) -> None:
        """Write the sorted eigenvalues as CSV with header re,im."""
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["re", "im"])
            for z in self.sorted():
                writer.writerow([repr(float(z.real)), repr(float(z.imag))])


@dataclass(frozen=True, eq=False)
class JacobianSpec:
    """Inputs of the equilibrium Jacobian: f'(r), γ = g'(0) and the in-Laplacian."""

    fprime_r: float
    gamma: float
    laplacian: np.ndarray

    def __post_init__(self):
        require_finite("f'(r)", self.fprime_r)
        require_finite("gamma", self.gamma)


def eigenvalues(M: Any) -> Spectrum:
    """Full eigenvalue multiset of a square real matrix.

    Args:
        M: Square, finite real matrix

    Returns:
        Spectrum: All n eigenvalues (complex dtype)

    Raises:
        ShapeError: If M is not square
        DataError: If M has non-finite entries

    Examples:
        >>> sorted(eigenvalues([[1.0, 0.0], [0.0, -2.0]]).real.tolist())
        [-2.0, 1.0]
    """
    A = as_finite_matrix("M", M)
    if A.shape[0] == 0:
        return Spectrum(np.zeros(0, dtype=complex), 0)
    ev = np.linalg.eigvals(A).astype(complex)
    logger.debug("eigvals n=%d", A.shape[0])
    return Spectrum(ev, A.shape[0])


def spectral_abscissa(s: Spectrum) -> float:
    """Largest real part ρ = max Re(λ_i).

    Raises:
        DataError: If the spectrum is empty
    """
    if len(s) == 0:
        raise DataError("spectral abscissa of an empty spectrum is undefined")
    return float(np.max(s.eigenvalues.real))


def assemble_jacobian(spec: JacobianSpec) -> np.ndarray:
    """Jacobian at the uniform equilibrium, f'(r)·Id - γ·Λ^T.

    Raises:
        ShapeError: If the Laplacian is not square

    Examples:
        >>> L = np.array([[0.0, -1.0], [0.0, 1.0]])
        >>> assemble_jacobian(JacobianSpec(-1.0, 0.5, L)).tolist()
        [[-1.0, 0.0], [0.5, -1.5]]
    """
    L = np.asarray(spec.laplacian, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ShapeError(f"laplacian must be square, got shape {L.shape}")
    return spec.fprime_r * np.eye(L.shape[0]) - spec.gamma * L.T


def max_matching_distance(a: Any, b: Any) -> float:
    """Largest pair distance under the minimum-cost matching of two eigenvalue multisets.

    Raises:
        ShapeError: If the multisets differ in size
    """
    a = np.asarray(getattr(a, "eigenvalues", a), dtype=complex).ravel()
    b = np.asarray(getattr(b, "eigenvalues", b), dtype=complex).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"spectra differ in size: {a.size} vs {b.size}")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
