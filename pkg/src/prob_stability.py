"""
Probabilistic Stability Module

Stability of the default load-balancing dynamics when β and γ are only known
up to uniform measurement noise:

    dl_i/dt = (β + ζ_i)(1 - l_i) + Σ_j a_ji (γ + ξ_ji)(l_j - l_i)
    ζ_i ~ Uniform[-b, b],  ξ_ji ~ Uniform[-c, c]   (one ξ per directed edge)

The Gershgorin margin s_i = -β - ζ_i + Σ_j a_ji(|γ + ξ_ji| - γ - ξ_ji) is the
rightmost point of row i's disc of the perturbed Jacobian; all s_i < 0
certifies stability. Each gated term X = |γ + ξ| - γ - ξ is 0 with probability
(1 + γ/c)/2 and Uniform[0, 2(c - γ)] otherwise, so Y = Σ X over a node's
in-edges has an Irwin-Hall mixture law with an atom at 0. The product of
P(s_i < 0) over nodes bounds the stability probability from below; a Monte
Carlo eigenvalue oracle checks the bound.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate

from .errors import DataError, DomainError, ParameterError, ShapeError
from .graph_core import Network, in_degree
from .utils import TOL, check_seed, require_finite, require_non_negative, seed_sequence, substream

logger = logging.getLogger(__name__)

# Above this many terms the alternating Irwin-Hall sums are evaluated exactly.
_EXACT_TERMS = 40


@dataclass(frozen=True)
class NoiseModel:
    """Uniform measurement-noise half-widths: b for β, c for γ."""

    b: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        require_non_negative("b", self.b)
        require_non_negative("c", self.c)


@dataclass(frozen=True, eq=False)
class PerturbationSample:
    """One draw of the noise variables.

    Attributes:
        zeta (np.ndarray): ζ_i per node, |ζ_i| <= b
        edges (np.ndarray): E×2 array of directed edges (j, i) with a_ji > 0
        xi_values (np.ndarray): ξ_ji per edge, aligned with edges, |ξ_ji| <= c
    """

    zeta: np.ndarray
    edges: np.ndarray
    xi_values: np.ndarray

    @property
    def n(self) -> int:
        return int(self.zeta.shape[0])

    @property
    def xi(self) -> Dict[Tuple[int, int], float]:
        """dict: (j, i) -> ξ_ji."""
        return {(int(j), int(i)): float(v) for (j, i), v in zip(self.edges, self.xi_values)}

    def xi_matrix(self) -> np.ndarray:
        """n×n matrix with Ξ[j, i] = ξ_ji on edges and 0 elsewhere."""
        X = np.zeros((self.n, self.n))
        if len(self.edges):
            X[self.edges[:, 0], self.edges[:, 1]] = self.xi_values
        return X


def _edge_list(network: Network) -> np.ndarray:
    return np.argwhere(network.adjacency > 0).reshape(-1, 2)


def draw_perturbation(network: Network, noise: NoiseModel, rng: np.random.Generator) -> PerturbationSample:
    """Draw ζ (one per node) and ξ (one per directed edge, row-major order) from rng."""
    edges = _edge_list(network)
    zeta = rng.uniform(-noise.b, noise.b, size=network.n)
    xi_values = rng.uniform(-noise.c, noise.c, size=len(edges))
    return PerturbationSample(zeta, edges, xi_values)


def sample_perturbation(network: Network, noise: NoiseModel, seed: int) -> PerturbationSample:
    """Seeded draw of one PerturbationSample (substream 'perturbation')."""
    return draw_perturbation(network, noise, substream(seed, "perturbation"))


def _check_sample(network: Network, sample: PerturbationSample) -> None:
    if sample.n != network.n:
        raise ShapeError(f"sample has {sample.n} nodes, network has {network.n}")
    if len(sample.edges) and np.any(network.adjacency[sample.edges[:, 0], sample.edges[:, 1]] <= 0):
        raise ShapeError("sample has ξ on a pair that is not an edge of the network")


def _jacobians(A: np.ndarray, beta: float, gamma: float, zeta: np.ndarray, Xi: np.ndarray) -> np.ndarray:
    # works on single matrices and on stacks (leading trial axis)
    W = A * (gamma + Xi)
    J = np.swapaxes(W, -1, -2).copy()
    idx = np.arange(A.shape[0])
    J[..., idx, idx] = -(beta + zeta) - W.sum(axis=-2)
    return J


def _margins(A: np.ndarray, beta: float, gamma: float, zeta: np.ndarray, Xi: np.ndarray) -> np.ndarray:
    gated = np.abs(gamma + Xi) - (gamma + Xi)
    return -beta - zeta + (A * gated).sum(axis=-2)


def perturbed_jacobian(network: Network, beta: float, gamma: float, sample: PerturbationSample) -> np.ndarray:
    """Jacobian of the noisy system at l = 1 for a given sample.

    (J)_ii = -β - ζ_i - Σ_j a_ji(γ + ξ_ji),  (J)_ij = a_ji(γ + ξ_ji) for i ≠ j.
    """
    _check_sample(network, sample)
    return _jacobians(network.adjacency, require_finite("beta", beta), require_finite("gamma", gamma),
                      sample.zeta, sample.xi_matrix())


def sample_perturbed_jacobian(network: Network, beta: float, gamma: float,
                              noise: NoiseModel, seed: int) -> np.ndarray:
    """Draw one noise sample (seeded) and assemble the perturbed Jacobian.

    With b = c = 0 this is exactly -β·Id - γ·Λ^T.
    """
    return perturbed_jacobian(network, beta, gamma, sample_perturbation(network, noise, seed))


def gershgorin_margin(network: Network, beta: float, gamma: float, sample: PerturbationSample) -> np.ndarray:
    """s_i = -β - ζ_i + Σ_j a_ji(|γ + ξ_ji| - γ - ξ_ji) for every node.

    Examples:
        >>> net = Network.empty(1)
        >>> s = PerturbationSample(np.array([0.3]), np.zeros((0, 2), dtype=int), np.zeros(0))
        >>> gershgorin_margin(net, 1.0, 0.5, s).tolist()
        [-1.3]
    """
    _check_sample(network, sample)
    return _margins(network.adjacency, require_finite("beta", beta), require_finite("gamma", gamma),
                    sample.zeta, sample.xi_matrix())


# --- Irwin-Hall mixture -----------------------------------------------------

def _alternating_sum(u: float, n: int, power: int) -> float:
    # Σ_{k=0}^{floor(u)} (-1)^k C(n,k) (u-k)^power / power!
    top = int(math.floor(u))
    if n <= _EXACT_TERMS:
        total = sum((-1) ** k * math.comb(n, k) * (u - k) ** power for k in range(top + 1))
        return total / math.factorial(power)
    uq = Fraction(u)
    total = sum((-1) ** k * math.comb(n, k) * (uq - k) ** power for k in range(top + 1))
    return float(total / math.factorial(power))


def irwin_hall_pdf(u: float, n: int) -> float:
    """Density of the sum of n independent Uniform[0,1] variables at u."""
    if u < 0 or u > n:
        return 0.0
    if u > n / 2:
        u = n - u
    return max(_alternating_sum(u, n, n - 1), 0.0)


def irwin_hall_cdf(u: float, n: int) -> float:
    """Distribution function of the sum of n independent Uniform[0,1] variables."""
    if u <= 0:
        return 0.0
    if u >= n:
        return 1.0
    if u > n / 2:
        return 1.0 - irwin_hall_cdf(n - u, n)
    return min(max(_alternating_sum(u, n, n), 0.0), 1.0)


def _check_mixture(n_terms: int, gamma: float, c: float, allow_zero_terms: bool = False) -> None:
    if isinstance(n_terms, bool) or int(n_terms) != n_terms or n_terms < (0 if allow_zero_terms else 1):
        raise ParameterError(f"n_terms must be an integer >= {0 if allow_zero_terms else 1}, got {n_terms!r}")
    require_finite("gamma", gamma)
    require_finite("c", c)
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")


def _mixture_parts(n_terms: int, gamma: float, c: float) -> Tuple[float, float, float]:
    p = 0.5 * (1.0 - gamma / c)
    q = 0.5 * (1.0 + gamma / c)
    return p, q, 2.0 * (c - gamma)


def irwin_hall_atom_mass(n_terms: int, gamma: float, c: float) -> float:
    """Probability that Y = 0, ((1 + γ/c)/2)^n_terms (1 when c <= γ or n_terms = 0)."""
    _check_mixture(n_terms, gamma, c, allow_zero_terms=True)
    if n_terms == 0 or c <= gamma:
        return 1.0
    return _mixture_parts(n_terms, gamma, c)[1] ** int(n_terms)


def _mixture_pdf_scalar(x: float, n: int, gamma: float, c: float) -> float:
    p, q, h = _mixture_parts(n, gamma, c)
    if x < 0 or x > n * h:
        return 0.0
    u = x / h
    return sum(math.comb(n, m) * p ** m * q ** (n - m) * irwin_hall_pdf(u, m)
               for m in range(1, n + 1)) / h


def _mixture_cdf_scalar(x: float, n: int, gamma: float, c: float) -> float:
    if x < 0:
        return 0.0
    if n == 0 or c <= gamma:
        return 1.0
    p, q, h = _mixture_parts(n, gamma, c)
    u = x / h
    total = q ** n + sum(math.comb(n, m) * p ** m * q ** (n - m) * irwin_hall_cdf(u, m)
                         for m in range(1, n + 1))
    return min(total, 1.0)


def irwin_hall_mixture_pdf(x: Any, n_terms: int, gamma: float, c: float) -> Any:
    """Continuous part of the density of Y = X_1 + ... + X_n_terms.

    Each X is 0 with probability (1 + γ/c)/2 and Uniform[0, 2(c - γ)] with
    probability (1 - γ/c)/2. The atom at 0 is not included here; see
    irwin_hall_atom_mass(). Points outside [0, 2·n_terms·(c - γ)] have density 0.

    Args:
        x: Evaluation point(s)
        n_terms (int): Number of gated terms (>= 1)
        gamma (float): Offloading rate γ >= 0
        c (float): Noise half-width, c > γ

    Raises:
        DomainError: If c <= γ (Y is identically 0; use the deterministic branch)

    Examples:
        >>> irwin_hall_mixture_pdf(1.0, 1, 0.0, 1.0)
        0.25
    """
    _check_mixture(n_terms, gamma, c)
    if c <= gamma:
        raise DomainError("c <= gamma: Y is identically 0, use the deterministic branch")
    n = int(n_terms)
    if np.ndim(x) == 0:
        return _mixture_pdf_scalar(float(x), n, gamma, c)
    return np.array([_mixture_pdf_scalar(float(v), n, gamma, c) for v in np.ravel(x)]).reshape(np.shape(x))


def irwin_hall_mixture_cdf(x: Any, n_terms: int, gamma: float, c: float) -> Any:
    """P(Y <= x), atom included. Degenerate (step at 0) when c <= γ or n_terms = 0."""
    _check_mixture(n_terms, gamma, c, allow_zero_terms=True)
    n = int(n_terms)
    if np.ndim(x) == 0:
        return _mixture_cdf_scalar(float(x), n, gamma, c)
    return np.array([_mixture_cdf_scalar(float(v), n, gamma, c) for v in np.ravel(x)]).reshape(np.shape(x))


# --- margin probability and product bound -----------------------------------

def _uniform_tail(beta: float, b: float) -> float:
    # P(ζ > -β) for ζ ~ Uniform[-b, b]
    if b == 0:
        return 1.0 if beta > 0 else 0.0
    return float(min(1.0, max(0.0, (beta + b) / (2.0 * b))))


def prob_s_negative(beta: float, b: float, gamma: float, c: float, degree: int) -> float:
    """P(s_i < 0) for a node with the given number of unit-weight in-edges.

    s_i < 0 exactly when Y < β + ζ, so the probability is the average of the
    mixture CDF of Y over the uniform window [β - b, β + b]. The inner integral
    is the closed-form CDF; the outer one is adaptive quadrature with break
    points where the CDF changes piece.

    Args:
        beta (float): β > 0
        b (float): Half-width of ζ, >= 0
        gamma (float): γ >= 0
        c (float): Half-width of ξ, >= 0
        degree (int): Number of in-edges, >= 0

    Returns:
        float: Probability in [0, 1]; exactly 1 when c <= γ and b < β

    Raises:
        DataError: If an input is not finite
        DomainError: If β <= 0, γ < 0, b < 0 or c < 0
        ParameterError: If degree is not a non-negative integer

    Examples:
        >>> prob_s_negative(1.0, 0.5, 0.5, 1.0, 0)
        1.0
        >>> round(prob_s_negative(0.2, 0.5, 0.5, 1.0, 0), 12)
        0.7
    """
    beta, b = require_finite("beta", beta), require_finite("b", b)
    gamma, c = require_finite("gamma", gamma), require_finite("c", c)
    if beta <= 0:
        raise DomainError(f"beta must be > 0, got {beta}")
    if gamma < 0 or b < 0 or c < 0:
        raise DomainError(f"gamma, b and c must be >= 0, got gamma={gamma}, b={b}, c={c}")
    if isinstance(degree, bool) or int(degree) != degree or degree < 0:
        raise ParameterError(f"degree must be a non-negative integer, got {degree!r}")
    degree = int(degree)

    if degree == 0 or c <= gamma:
        return _uniform_tail(beta, b)
    if b == 0:
        return _mixture_cdf_scalar(beta, degree, gamma, c)

    h = 2.0 * (c - gamma)
    breaks = [k * h - beta for k in range(degree + 1) if -b < k * h - beta < b]
    value, err = integrate.quad(
        lambda z: _mixture_cdf_scalar(beta + z, degree, gamma, c), -b, b,
        points=breaks or None, epsabs=1e-10, epsrel=1e-10, limit=200,
    )
    logger.debug("prob_s_negative beta=%g b=%g gamma=%g c=%g degree=%d -> %.10f (quad err %.1e)",
                 beta, b, gamma, c, degree, value / (2 * b), err)
    return float(min(1.0, max(0.0, value / (2.0 * b))))


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Monte Carlo estimate of the stability probability with a 95% normal CI.

    Attributes:
        certified (int): Trials whose Gershgorin margins were all negative
        sufficiency_violations (int): Certified trials that were not stable
            (always 0 unless the Gershgorin theorem is violated numerically)
    """

    estimate: float
    trials: int
    successes: int
    stderr: float
    ci_low: float
    ci_high: float
    seed: int
    certified: int = 0
    sufficiency_violations: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimate": self.estimate, "trials": self.trials, "successes": self.successes,
            "stderr": self.stderr, "ci95": [self.ci_low, self.ci_high], "seed": self.seed,
            "certified_by_margin": self.certified,
            "sufficiency_violations": self.sufficiency_violations,
        }


@dataclass(frozen=True, eq=False)
class StabilityBound:
    """Product lower bound on the stability probability.

    Attributes:
        per_node_prob (np.ndarray): P(s_i < 0) per node
        lower_bound (float): Π per_node_prob
        mc_estimate (MonteCarloEstimate | None): Optional Monte Carlo check
        params (dict): β, b, γ, c the bound was computed for
    """

    per_node_prob: np.ndarray
    lower_bound: float
    mc_estimate: Optional[MonteCarloEstimate] = None
    params: Dict[str, float] = field(default_factory=dict)

    def with_mc(self, estimate: MonteCarloEstimate) -> "StabilityBound":
        return StabilityBound(self.per_node_prob, self.lower_bound, estimate, dict(self.params))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "params": dict(self.params),
            "per_node_prob": [float(p) for p in self.per_node_prob],
            "lower_bound": self.lower_bound,
            "mc": self.mc_estimate.to_dict() if self.mc_estimate else None,
        }


def stability_lower_bound(network: Network, beta: float, b: float, gamma: float, c: float) -> StabilityBound:
    """Π_i P(s_i < 0) with each node's in-degree as its number of gated terms.

    The margin events use disjoint noise variables, so the product is the exact
    probability that every margin is negative, and hence a lower bound on the
    probability of stability.

    Raises:
        DataError: If the network is empty
        DomainError: If the network has non-unit weights
    """
    if network.n == 0:
        raise DataError("stability bound of an empty network is undefined")
    if not network.has_unit_weights():
        raise DomainError("the Irwin-Hall bound needs unit edge weights")
    degrees = np.rint(in_degree(network)).astype(int)
    by_degree = {int(d): prob_s_negative(beta, b, gamma, c, int(d)) for d in np.unique(degrees)}
    probs = np.array([by_degree[int(d)] for d in degrees])
    bound = float(np.prod(probs))
    logger.debug("stability_lower_bound n=%d degrees=%s -> %.6g", network.n, sorted(by_degree), bound)
    return StabilityBound(probs, bound, None, {"beta": float(beta), "b": float(b),
                                               "gamma": float(gamma), "c": float(c)})


def _chunk_sizes(trials: int, chunk: int) -> List[int]:
    sizes = [chunk] * (trials // chunk)
    if trials % chunk:
        sizes.append(trials % chunk)
    return sizes


def mc_stability_probability(network: Network, beta: float, gamma: float, noise: NoiseModel,
                             trials: int, seed: int, workers: int = 1,
                             chunk_size: Optional[int] = None) -> MonteCarloEstimate:
    """Fraction of sampled perturbed Jacobians whose spectrum lies in Re < 0.

    Trials run in vectorised chunks; chunk k draws from its own child seed of
    the master seed, so the result does not depend on the number of workers.

    Args:
        network (Network): Load-sharing network
        beta (float): β
        gamma (float): γ
        noise (NoiseModel): Half-widths b and c
        trials (int): Number of trials (>= 1)
        seed (int): Master seed
        workers (int): Threads evaluating chunks concurrently
        chunk_size (int, optional): Trials per chunk

    Returns:
        MonteCarloEstimate: Estimate with 95% normal-approximation CI

    Raises:
        ParameterError: If trials or workers < 1
    """
    if isinstance(trials, bool) or int(trials) != trials or trials < 1:
        raise ParameterError(f"trials must be an integer >= 1, got {trials!r}")
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    if network.n == 0:
        raise DataError("Monte Carlo on an empty network is undefined")
    seed = check_seed(seed)
    beta, gamma = require_finite("beta", beta), require_finite("gamma", gamma)
    trials = int(trials)
    n = network.n
    A = network.adjacency
    edges = _edge_list(network)
    if chunk_size is None:
        chunk_size = max(1, min(1024, (1 << 21) // (n * n)))
    sizes = _chunk_sizes(trials, chunk_size)
    children = seed_sequence(seed, "mc").spawn(len(sizes))

    def run_chunk(child: np.random.SeedSequence, size: int) -> Tuple[int, int, int]:
        rng = np.random.default_rng(child)
        zeta = rng.uniform(-noise.b, noise.b, size=(size, n))
        Xi = np.zeros((size, n, n))
        if len(edges):
            Xi[:, edges[:, 0], edges[:, 1]] = rng.uniform(-noise.c, noise.c, size=(size, len(edges)))
        J = _jacobians(A, beta, gamma, zeta, Xi)
        stable = np.linalg.eigvals(J).real.max(axis=1) < -TOL.stability_margin
        certified = _margins(A, beta, gamma, zeta, Xi).max(axis=1) < 0
        return int(stable.sum()), int(certified.sum()), int((certified & ~stable).sum())

    if workers == 1:
        results = [run_chunk(ch, sz) for ch, sz in zip(children, sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_chunk, children, sizes))

    successes = sum(r[0] for r in results)
    certified = sum(r[1] for r in results)
    violations = sum(r[2] for r in results)
    if violations:
        logger.warning("%d trials certified by Gershgorin margins were not spectrally stable", violations)
    p = successes / trials
    stderr = math.sqrt(p * (1.0 - p) / trials)
    half = 1.96 * stderr
    return MonteCarloEstimate(p, trials, successes, stderr, max(0.0, p - half), min(1.0, p + half),
                              seed, certified, violations)
