"""
Shared Utilities Module

Central numerical tolerances, seeded random-number substreams and the small
parameter guards every module uses to validate its inputs.
"""

import math
import zlib
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DataError, ParameterError, ShapeError


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used throughout the package.

    Attributes:
        kernel (float): Bound on ||Λ^T·1||_∞ for a valid in-Laplacian
        containment (float): Slack for Gershgorin containment checks
        stability_margin (float): max Re(μ) must be below -margin to count as stable
        boundary_rtol (float): Relative tolerance of the |f'(r)| = |γ|ρ boundary
        g_zero (float): Largest accepted |g(0)| for general coupling functions
        root (float): Largest accepted |f(r)| for a bracketed root
        singularity (float): Capacities at or below this value are singular
        equilibrium (float): Largest accepted equilibrium residual
    """

    kernel: float = 1e-12
    containment: float = 1e-9
    stability_margin: float = 1e-9
    boundary_rtol: float = 1e-9
    g_zero: float = 1e-12
    root: float = 1e-12
    singularity: float = 1e-12
    equilibrium: float = 1e-10


TOL = Tolerances()


def _stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def check_seed(seed: Any) -> int:
    """Validate an integer RNG seed.

    Args:
        seed: Candidate seed

    Returns:
        int: The seed as a plain Python int

    Raises:
        ParameterError: If seed is not a non-negative integer
    """
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ParameterError(f"seed must be an integer, got {seed!r}")
    if seed < 0:
        raise ParameterError(f"seed must be non-negative, got {seed}")
    return int(seed)


def seed_sequence(seed: int, name: str) -> np.random.SeedSequence:
    """SeedSequence for the named stream of a master seed (spawn further children from it)."""
    return np.random.SeedSequence(entropy=check_seed(seed), spawn_key=(_stream_key(name),))


def substream(seed: int, name: str) -> np.random.Generator:
    """Return the named random substream of a master seed.

    Different names give statistically independent generators, so a single
    master seed can drive sampling, connection and noise draws reproducibly.

    Args:
        seed (int): Master seed (non-negative)
        name (str): Stream name, e.g. 'ppp' or 'connect'

    Returns:
        np.random.Generator: Generator seeded from (seed, name)

    Examples:
        >>> a = substream(7, "ppp").random()
        >>> b = substream(7, "ppp").random()
        >>> a == b
        True
    """
    return np.random.default_rng(seed_sequence(seed, name))


def derive_seed(seed: int, name: str) -> int:
    """Derive a child integer seed from a master seed and a stream name."""
    return int(seed_sequence(seed, name).generate_state(1, dtype=np.uint32)[0])


def require_finite(name: str, value: float) -> float:
    """Raise DataError unless value is a finite real number."""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise DataError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise DataError(f"{name} must be finite, got {value}")
    return value


def require_positive(name: str, value: float) -> float:
    """Raise ParameterError unless value is finite and strictly positive."""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value) or value <= 0:
        raise ParameterError(f"{name} must be finite and > 0, got {value}")
    return value


def require_non_negative(name: str, value: float) -> float:
    """Raise ParameterError unless value is finite and >= 0."""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value) or value < 0:
        raise ParameterError(f"{name} must be finite and >= 0, got {value}")
    return value


def as_finite_matrix(name: str, M: Any) -> np.ndarray:
    """Convert M to a float ndarray and check it is a finite square matrix.

    Raises:
        ShapeError: If M is not two-dimensional and square
        DataError: If M has non-finite entries
    """
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} has non-finite entries")
    return arr
