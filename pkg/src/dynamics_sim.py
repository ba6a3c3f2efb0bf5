"""
Dynamics Simulation Module

Load dynamics on a network, integrated with the classical fixed-step
fourth-order Runge-Kutta method:

    dl_i/dt = f(l_i) + Σ_j a_ji g(l_j - l_i)

Families:

- LinearLoadDynamics:          f(l) = β(1 - l), g(x) = γx
- GeneralScalarDynamics:       user-supplied f and g with g(0) = 0
- CapacityTransformedDynamics: the linear family rewritten in capacities
  c_i = d_i / l_i, whose equilibrium is the demand vector d
- TransformedDynamics:         any scalar family under a smooth invertible
  per-node change of variables x = φ(l)
- PerturbedLoadDynamics:       the linear family with one drawn noise sample

A DynamicsSpec hands out its vector field for a given network as a callable
F(t, x), which is what simulate() and numerical_jacobian() consume.
"""

import csv
import json
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import optimize

from .errors import (DataError, DivergenceError, EstimationError, ParameterError,
                     RootNotFoundError, ShapeError, SingularityError)
from .graph_core import Network, in_degree, in_laplacian
from .prob_stability import PerturbationSample, perturbed_jacobian
from .spectral import JacobianSpec, assemble_jacobian
from .utils import TOL, require_finite

logger = logging.getLogger(__name__)

VectorField = Callable[[float, np.ndarray], np.ndarray]
ScalarFunction = Callable[[Any], Any]

# Central-difference step for derivatives that are not supplied.
FD_STEP = 1e-6


class DynamicsSpec(ABC):
    """Abstract base class for a load-dynamics family.

    Attributes:
        _family (str): Family name, e.g. 'LinearLoad'
    """

    def __init__(self, family: str):
        self._family = family

    @property
    def family(self) -> str:
        """str: Family name."""
        return self._family

    @abstractmethod
    def vector_field(self, network: Network) -> VectorField:
        """Return F(t, x) for this family on the given network."""

    @abstractmethod
    def root(self) -> float:
        """Root r of the self-dynamics (f(r) = 0), in load units."""

    @abstractmethod
    def jacobian_spec(self, network: Network) -> JacobianSpec:
        """f'(r), γ = g'(0) and the in-Laplacian of the load-space linearisation."""

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Parameters as a JSON-friendly dict."""

    def equilibrium(self, n: int) -> np.ndarray:
        """Equilibrium state in this family's coordinates (r·1 by default)."""
        return np.full(n, self.root())

    def jacobian(self, network: Network) -> np.ndarray:
        """Jacobian of the vector field at the equilibrium."""
        return assemble_jacobian(self.jacobian_spec(network))

    def check_network(self, network: Network) -> None:
        """Hook for family-specific network checks."""

    def check_initial(self, x0: Any, n: int) -> np.ndarray:
        """Validate an initial state and return it as a float vector.

        Raises:
            ShapeError: If x0 does not have length n
            DataError: If x0 has non-finite entries
        """
        x = np.array(x0, dtype=float).reshape(-1)
        if x.shape != (n,):
            raise ShapeError(f"initial state must have length {n}, got {x.shape[0]}")
        if not np.all(np.isfinite(x)):
            raise DataError("initial state must be finite")
        return x

    def check_state(self, x: np.ndarray, t: float) -> None:
        if not np.all(np.isfinite(x)):
            raise DivergenceError("state became non-finite", t)

    def __str__(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.describe().items() if k != "family")
        return f"{self._family}({params})"


class _ScalarFamily(DynamicsSpec):
    """Families defined by scalar f and g acting on loads."""

    @abstractmethod
    def f(self, l: Any) -> Any:
        """Self-dynamics."""

    @abstractmethod
    def g(self, x: Any) -> Any:
        """Coupling function of load differences."""

    @abstractmethod
    def fprime(self, l: float) -> float:
        pass

    @abstractmethod
    def gprime(self, x: float) -> float:
        pass

    def vector_field(self, network: Network) -> VectorField:
        A = network.adjacency

        def field(t: float, x: np.ndarray) -> np.ndarray:
            diff = x[:, None] - x[None, :]  # diff[j, i] = x_j - x_i
            return np.asarray(self.f(x), dtype=float) + (A * self.g(diff)).sum(axis=0)

        return field

    def jacobian_spec(self, network: Network) -> JacobianSpec:
        return JacobianSpec(self.fprime(self.root()), self.gprime(0.0), in_laplacian(network))


class LinearLoadDynamics(_ScalarFamily):
    """f(l) = β(1 - l), g(x) = γx; equilibrium at full load l = 1.

    Examples:
        >>> spec = LinearLoadDynamics(beta=2.0, gamma=1.0)
        >>> spec.root()
        1.0
    """

    def __init__(self, beta: float, gamma: float):
        super().__init__("LinearLoad")
        self._beta = require_finite("beta", beta)
        self._gamma = require_finite("gamma", gamma)

    @property
    def beta(self) -> float:
        return self._beta

    @property
    def gamma(self) -> float:
        return self._gamma

    def f(self, l: Any) -> Any:
        return self._beta * (1.0 - np.asarray(l, dtype=float))

    def g(self, x: Any) -> Any:
        return self._gamma * np.asarray(x, dtype=float)

    def fprime(self, l: float) -> float:
        return -self._beta

    def gprime(self, x: float) -> float:
        return self._gamma

    def root(self) -> float:
        return 1.0

    def vector_field(self, network: Network) -> VectorField:
        A_T = network.adjacency.T.copy()
        w = in_degree(network)
        beta, gamma = self._beta, self._gamma

        def field(t: float, x: np.ndarray) -> np.ndarray:
            return beta * (1.0 - x) + gamma * (A_T @ x - w * x)

        return field

    def describe(self) -> Dict[str, Any]:
        return {"family": self._family, "beta": self._beta, "gamma": self._gamma}


class GeneralScalarDynamics(_ScalarFamily):
    """User-supplied self-dynamics f and coupling g.

    f and g must accept numpy arrays elementwise. The root of f is searched by
    Brent's method on the given bracket the first time it is needed; missing
    derivatives are approximated by central differences.

    Args:
        f: Self-dynamics
        g: Coupling, g(0) = 0
        bracket (tuple): (lo, hi) with a sign change of f
        fprime: Optional derivative of f
        gprime: Optional derivative of g

    Raises:
        ParameterError: If |g(0)| >= 1e-12 or the bracket is not lo < hi

    Examples:
        >>> spec = GeneralScalarDynamics(lambda l: 1 - l**2, lambda x: x, (0.0, 2.0))
        >>> abs(spec.root() - 1.0) < 1e-12
        True
    """

    def __init__(self, f: ScalarFunction, g: ScalarFunction, bracket: Tuple[float, float],
                 fprime: Optional[ScalarFunction] = None, gprime: Optional[ScalarFunction] = None,
                 name: str = ""):
        super().__init__("GeneralScalar")
        if not callable(f) or not callable(g):
            raise ParameterError("f and g must be callables")
        g0 = float(g(0.0))
        if not math.isfinite(g0) or abs(g0) >= TOL.g_zero:
            raise ParameterError(f"coupling must satisfy g(0) = 0, got g(0) = {g0}")
        lo, hi = (require_finite("bracket", v) for v in bracket)
        if not lo < hi:
            raise ParameterError(f"bracket must satisfy lo < hi, got ({lo}, {hi})")
        self._f = f
        self._g = g
        self._fprime = fprime
        self._gprime = gprime
        self._bracket = (lo, hi)
        self._name = name
        self._root: Optional[float] = None

    @property
    def bracket(self) -> Tuple[float, float]:
        return self._bracket

    def f(self, l: Any) -> Any:
        return self._f(l)

    def g(self, x: Any) -> Any:
        return self._g(x)

    def fprime(self, l: float) -> float:
        if self._fprime is not None:
            return float(self._fprime(l))
        return float((self._f(l + FD_STEP) - self._f(l - FD_STEP)) / (2 * FD_STEP))

    def gprime(self, x: float) -> float:
        if self._gprime is not None:
            return float(self._gprime(x))
        return float((self._g(x + FD_STEP) - self._g(x - FD_STEP)) / (2 * FD_STEP))

    def root(self) -> float:
        """Root of f in the bracket.

        Raises:
            RootNotFoundError: If f has no sign change on the bracket or the
                located root leaves |f(r)| >= 1e-12
        """
        if self._root is not None:
            return self._root
        lo, hi = self._bracket
        f_lo, f_hi = float(self._f(lo)), float(self._f(hi))
        if f_lo == 0.0:
            r = lo
        elif f_hi == 0.0:
            r = hi
        elif np.sign(f_lo) == np.sign(f_hi):
            raise RootNotFoundError(f"f has no sign change on [{lo}, {hi}] (f={f_lo:.3g}, {f_hi:.3g})")
        else:
            r = optimize.brentq(lambda v: float(self._f(v)), lo, hi, xtol=1e-15, maxiter=200)
        if abs(float(self._f(r))) >= TOL.root:
            raise RootNotFoundError(f"bracketed root r={r} leaves |f(r)| = {abs(float(self._f(r))):.3g}")
        self._root = float(r)
        logger.debug("general family root r=%.15g on [%g, %g]", r, lo, hi)
        return self._root

    def describe(self) -> Dict[str, Any]:
        return {"family": self._family, "name": self._name, "bracket": list(self._bracket)}


class CapacityTransformedDynamics(DynamicsSpec):
    """Linear load dynamics written in capacities c_i = d_i / l_i:

        dc_i/dt = β c_i (1 - c_i/d_i) + γ Σ_j a_ji c_i (1 - c_i d_j / (c_j d_i))

    The equilibrium is c = d. The Jacobian there is similar to the load-space
    one, so jacobian_spec() reports the load-space quantities.

    Raises:
        ParameterError: If a demand is not finite and > 0
    """

    def __init__(self, beta: float, gamma: float, demands: Any):
        super().__init__("CapacityTransformed")
        self._beta = require_finite("beta", beta)
        self._gamma = require_finite("gamma", gamma)
        d = np.array(demands, dtype=float).reshape(-1)
        if d.size == 0 or not np.all(np.isfinite(d)) or np.any(d <= 0):
            raise ParameterError("demands must be finite and > 0")
        d.setflags(write=False)
        self._demands = d

    @property
    def beta(self) -> float:
        return self._beta

    @property
    def gamma(self) -> float:
        return self._gamma

    @property
    def demands(self) -> np.ndarray:
        return self._demands

    def root(self) -> float:
        return 1.0

    def equilibrium(self, n: int) -> np.ndarray:
        if n != self._demands.size:
            raise ShapeError(f"{self._demands.size} demands for {n} nodes")
        return self._demands.copy()

    def to_load(self, c: Any) -> np.ndarray:
        return self._demands / np.asarray(c, dtype=float)

    def from_load(self, l: Any) -> np.ndarray:
        return self._demands / np.asarray(l, dtype=float)

    def check_network(self, network: Network) -> None:
        if network.n != self._demands.size:
            raise ShapeError(f"{self._demands.size} demands for a network of {network.n} nodes")

    def check_initial(self, x0: Any, n: int) -> np.ndarray:
        c = super().check_initial(x0, n)
        if np.any(c <= TOL.singularity):
            raise ParameterError("initial capacities must be > 0 (the transform d/l is singular at 0)")
        return c

    def check_state(self, x: np.ndarray, t: float) -> None:
        if not np.all(np.isfinite(x)) or np.any(x <= TOL.singularity):
            raise SingularityError("capacity reached 0 or became non-finite", t)

    def vector_field(self, network: Network) -> VectorField:
        A_T = network.adjacency.T.copy()
        w = in_degree(network)
        d = self._demands
        beta, gamma = self._beta, self._gamma

        def field(t: float, c: np.ndarray) -> np.ndarray:
            l = d / c
            return beta * c * (1.0 - c / d) + gamma * c * (w - (c / d) * (A_T @ l))

        return field

    def jacobian_spec(self, network: Network) -> JacobianSpec:
        return JacobianSpec(-self._beta, self._gamma, in_laplacian(network))

    def jacobian(self, network: Network) -> np.ndarray:
        # P J_load P^-1 with P = diag(dc/dl) = diag(-d) at l = 1
        J = super().jacobian(network)
        d = self._demands
        return (d[:, None] * J) / d[None, :]

    def describe(self) -> Dict[str, Any]:
        return {"family": self._family, "beta": self._beta, "gamma": self._gamma,
                "demands": [float(v) for v in self._demands]}


class TransformedDynamics(DynamicsSpec):
    """A scalar family under the change of variables x_i = φ(l)_i.

    dx/dt = φ'(l) ⊙ F_base(l) with l = φ^{-1}(x). The maps act on whole state
    vectors so they may differ per node.

    Args:
        base: Scalar load family (LinearLoadDynamics or GeneralScalarDynamics)
        phi: l -> x
        phi_inv: x -> l
        phi_prime: l -> dφ/dl (elementwise)
    """

    def __init__(self, base: DynamicsSpec, phi: Callable[[np.ndarray], np.ndarray],
                 phi_inv: Callable[[np.ndarray], np.ndarray],
                 phi_prime: Callable[[np.ndarray], np.ndarray], name: str = "custom"):
        super().__init__("Transformed")
        if not isinstance(base, _ScalarFamily):
            raise ParameterError("base must be a scalar load family")
        self._base = base
        self._phi = phi
        self._phi_inv = phi_inv
        self._phi_prime = phi_prime
        self._name = name

    @classmethod
    def capacity(cls, base: DynamicsSpec, demands: Any) -> "TransformedDynamics":
        """φ(l) = d / l, the capacity transform of any scalar family."""
        d = np.array(demands, dtype=float).reshape(-1)
        if d.size == 0 or not np.all(np.isfinite(d)) or np.any(d <= 0):
            raise ParameterError("demands must be finite and > 0")
        return cls(base, lambda l: d / l, lambda c: d / c, lambda l: -d / l ** 2, name="capacity")

    @property
    def base(self) -> DynamicsSpec:
        return self._base

    def root(self) -> float:
        return self._base.root()

    def equilibrium(self, n: int) -> np.ndarray:
        return np.asarray(self._phi(self._base.equilibrium(n)), dtype=float)

    def check_state(self, x: np.ndarray, t: float) -> None:
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(self._phi_inv(x))):
            raise SingularityError("transformed state left the domain of the inverse map", t)

    def vector_field(self, network: Network) -> VectorField:
        base_field = self._base.vector_field(network)

        def field(t: float, x: np.ndarray) -> np.ndarray:
            l = self._phi_inv(x)
            return self._phi_prime(l) * base_field(t, l)

        return field

    def jacobian_spec(self, network: Network) -> JacobianSpec:
        return self._base.jacobian_spec(network)

    def jacobian(self, network: Network) -> np.ndarray:
        p = np.asarray(self._phi_prime(self._base.equilibrium(network.n)), dtype=float)
        return (p[:, None] * self._base.jacobian(network)) / p[None, :]

    def describe(self) -> Dict[str, Any]:
        return {"family": self._family, "transform": self._name, "base": self._base.describe()}


class PerturbedLoadDynamics(DynamicsSpec):
    """Linear load dynamics with one fixed noise draw:

        dl_i/dt = (β + ζ_i)(1 - l_i) + Σ_j a_ji (γ + ξ_ji)(l_j - l_i)

    l = 1 stays an equilibrium. jacobian_spec() is the noise-free spec;
    jacobian() is the perturbed Jacobian of this draw.
    """

    def __init__(self, beta: float, gamma: float, sample: PerturbationSample):
        super().__init__("PerturbedLoad")
        self._beta = require_finite("beta", beta)
        self._gamma = require_finite("gamma", gamma)
        self._sample = sample

    @property
    def sample(self) -> PerturbationSample:
        return self._sample

    def root(self) -> float:
        return 1.0

    def check_network(self, network: Network) -> None:
        if self._sample.n != network.n:
            raise ShapeError(f"noise sample has {self._sample.n} nodes, network has {network.n}")

    def vector_field(self, network: Network) -> VectorField:
        self.check_network(network)
        W = network.adjacency * (self._gamma + self._sample.xi_matrix())
        W_T = W.T.copy()
        w = W.sum(axis=0)
        rate = self._beta + self._sample.zeta

        def field(t: float, x: np.ndarray) -> np.ndarray:
            return rate * (1.0 - x) + W_T @ x - w * x

        return field

    def jacobian_spec(self, network: Network) -> JacobianSpec:
        return JacobianSpec(-self._beta, self._gamma, in_laplacian(network))

    def jacobian(self, network: Network) -> np.ndarray:
        return perturbed_jacobian(network, self._beta, self._gamma, self._sample)

    def describe(self) -> Dict[str, Any]:
        return {"family": self._family, "beta": self._beta, "gamma": self._gamma,
                "zeta": [float(z) for z in self._sample.zeta]}


class DynamicsFactory:
    """Factory for dynamics families."""

    _families = {
        "linear": LinearLoadDynamics,
        "general": GeneralScalarDynamics,
        "capacity": CapacityTransformedDynamics,
        "transformed": TransformedDynamics,
        "perturbed": PerturbedLoadDynamics,
    }

    @staticmethod
    def create(family: str, **kwargs) -> DynamicsSpec:
        """Create a dynamics spec.

        Args:
            family (str): 'linear', 'general', 'capacity', 'transformed' or 'perturbed'
            **kwargs: Constructor arguments of the family

        Raises:
            ParameterError: If family is not supported

        Examples:
            >>> DynamicsFactory.create("linear", beta=1.0, gamma=0.5).family
            'LinearLoad'
        """
        key = family.lower()
        if key not in DynamicsFactory._families:
            raise ParameterError(f"unsupported dynamics family {family!r}; "
                                 f"choose from {DynamicsFactory.get_supported_types()}")
        return DynamicsFactory._families[key](**kwargs)

    @staticmethod
    def get_supported_types() -> List[str]:
        return list(DynamicsFactory._families)


@dataclass(frozen=True, eq=False)
class EquilibriumReport:
    """Uniform equilibrium of a dynamics spec.

    Attributes:
        r (float): Root of f (load units)
        equilibrium (np.ndarray): r·1, or d for the capacity family
        residual (float): ||F(equilibrium)||_∞
    """

    r: float
    equilibrium: np.ndarray
    residual: float

    def to_dict(self) -> Dict[str, Any]:
        return {"r": self.r, "equilibrium": [float(v) for v in self.equilibrium], "residual": self.residual}


def find_uniform_equilibrium(spec: DynamicsSpec, network: Optional[Network] = None) -> EquilibriumReport:
    """Locate the uniform equilibrium and check its residual.

    Args:
        spec (DynamicsSpec): Dynamics family
        network (Network, optional): Network for the residual check; an
            edgeless network of matching size is used when omitted

    Raises:
        RootNotFoundError: If f has no root in the bracket, or the residual is
            not below 1e-10

    Examples:
        >>> find_uniform_equilibrium(LinearLoadDynamics(2.0, 1.0)).residual
        0.0
    """
    if network is None:
        n = spec.demands.size if isinstance(spec, CapacityTransformedDynamics) else 1
        network = Network.empty(n)
    spec.check_network(network)
    r = spec.root()
    eq = spec.equilibrium(network.n)
    residual = float(np.max(np.abs(spec.vector_field(network)(0.0, eq)))) if network.n else 0.0
    if residual >= TOL.equilibrium:
        raise RootNotFoundError(f"equilibrium residual {residual:.3g} is not below {TOL.equilibrium}")
    return EquilibriumReport(float(r), eq, residual)


class Trajectory:
    """Sampled solution of a simulation.

    Attributes:
        _times (np.ndarray): Strictly increasing sample times
        _states (np.ndarray): m×n states aligned with times
    """

    def __init__(self, times: Any, states: Any, spec: DynamicsSpec, network: Network):
        times = np.asarray(times, dtype=float)
        states = np.asarray(states, dtype=float)
        if states.ndim != 2 or states.shape[0] != times.shape[0]:
            raise ShapeError("states must be an m×n array aligned with times")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise DataError("trajectory times must be strictly increasing")
        self._times = times
        self._states = states
        self._spec = spec
        self._network = network

    @property
    def times(self) -> np.ndarray:
        return self._times

    @property
    def states(self) -> np.ndarray:
        return self._states

    @property
    def spec(self) -> DynamicsSpec:
        return self._spec

    @property
    def network(self) -> Network:
        return self._network

    @property
    def final_state(self) -> np.ndarray:
        return self._states[-1]

    def __len__(self) -> int:
        return int(self._times.shape[0])

    def to_csv(self, path: Union[str, Path]) -> None:
        """Write the trajectory as CSV with header t,x1..xn."""
        n = self._states.shape[1]
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["t"] + [f"x{k + 1}" for k in range(n)])
            for t, x in zip(self._times, self._states):
                writer.writerow([repr(float(t))] + [repr(float(v)) for v in x])


def rk4_step(field: VectorField, t: float, h: float, y: np.ndarray) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step."""
    k1 = field(t, y)
    k2 = field(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = field(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = field(t + h, y + h * k3)
    return y + h * (k1 / 6 + k2 / 3 + k3 / 3 + k4 / 6)


def simulate(spec: DynamicsSpec, network: Network, x0: Any, t_end: float,
             dt: float = 1e-3, record_every: int = 1) -> Trajectory:
    """Integrate the dynamics from x0 up to t_end with fixed step dt.

    Sample times are k·dt; when t_end is not a multiple of dt a final shorter
    step lands exactly on t_end.

    Args:
        spec (DynamicsSpec): Dynamics family
        network (Network): Network the dynamics run on
        x0: Initial state (length n)
        t_end (float): Final time, t_end >= dt
        dt (float): Step size (> 0)
        record_every (int): Keep every k-th step (the final state is always kept)

    Returns:
        Trajectory: Recorded states including t = 0

    Raises:
        ParameterError: If dt <= 0, t_end < dt or record_every < 1
        DivergenceError: If the state becomes non-finite (SingularityError for
            capacities that reach 0)
    """
    t_end = require_finite("t_end", t_end)
    dt = require_finite("dt", dt)
    if dt <= 0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    if t_end < dt:
        raise ParameterError(f"t_end must be >= dt, got t_end={t_end}, dt={dt}")
    if isinstance(record_every, bool) or int(record_every) != record_every or record_every < 1:
        raise ParameterError(f"record_every must be an integer >= 1, got {record_every!r}")
    spec.check_network(network)
    x = spec.check_initial(x0, network.n)
    spec.check_state(x, 0.0)
    field = spec.vector_field(network)

    steps = int(math.floor(t_end / dt + 1e-9))
    remainder = t_end - steps * dt
    if remainder <= 1e-12 * max(1.0, t_end):
        remainder = 0.0

    times: List[float] = [0.0]
    states: List[np.ndarray] = [x.copy()]
    # check_state reports overflow and NaN as errors
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for k in range(1, steps + 1):
            x = rk4_step(field, (k - 1) * dt, dt, x)
            t = k * dt
            spec.check_state(x, t)
            if k % record_every == 0 or (k == steps and remainder == 0.0):
                times.append(t)
                states.append(x.copy())
        if remainder > 0.0:
            x = rk4_step(field, steps * dt, remainder, x)
            spec.check_state(x, t_end)
            times.append(t_end)
            states.append(x.copy())

    logger.debug("simulated %s n=%d steps=%d dt=%g t_end=%g", spec.family, network.n, steps, dt, t_end)
    return Trajectory(times, states, spec, network)


def simulate_capacity(spec: CapacityTransformedDynamics, network: Network, c0: Any,
                      t_end: float, dt: float = 1e-3, record_every: int = 1) -> Trajectory:
    """Integrate the capacity system from strictly positive c0.

    Raises:
        ParameterError: If spec is not a capacity family or c0 has entries <= 0
        SingularityError: If a capacity reaches 0 during integration
    """
    if not isinstance(spec, CapacityTransformedDynamics):
        raise ParameterError(f"simulate_capacity needs a CapacityTransformed spec, got {spec.family}")
    return simulate(spec, network, c0, t_end, dt, record_every)


def estimate_contraction_rate(traj: Trajectory, equilibrium: Any, tail_fraction: float = 0.5,
                              floor: Optional[float] = None) -> float:
    """Exponential decay rate of ||x(t) - eq||_2 over the tail of a trajectory.

    Fits log||x(t) - eq|| linearly over the last tail_fraction of the samples,
    after the fast modes have died out, and returns minus the slope. With a
    floor, samples from the first deviation at or below it onward are dropped
    before the window is taken.

    Raises:
        ShapeError: If equilibrium does not match the state dimension
        EstimationError: If the trajectory does not converge, or deviations on
            the fitted window fall to 1e-12 or below
    """
    eq = np.asarray(equilibrium, dtype=float).reshape(-1)
    if eq.shape[0] != traj.states.shape[1]:
        raise ShapeError(f"equilibrium has length {eq.shape[0]}, states have {traj.states.shape[1]}")
    if not 0 < tail_fraction <= 1:
        raise ParameterError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    dev = np.linalg.norm(traj.states - eq, axis=1)
    if not dev[-1] < dev[0]:
        raise EstimationError("trajectory is not converging to the equilibrium")
    times = traj.times
    if floor is not None:
        below = np.flatnonzero(dev <= floor)
        if below.size:
            times, dev = times[:below[0]], dev[:below[0]]
    start = int(times.size * (1.0 - tail_fraction))
    t_w, d_w = times[start:], dev[start:]
    if t_w.size < 2:
        raise EstimationError("too few samples in the fitted window")
    if np.any(d_w <= 1e-12):
        raise EstimationError("deviation reached 1e-12 inside the fitted window; shorten t_end")
    slope = float(np.polyfit(t_w, np.log(d_w), 1)[0])
    if slope >= 0:
        raise EstimationError(f"fitted log-deviation slope {slope:.3g} is not negative")
    return -slope


def numerical_jacobian(spec: DynamicsSpec, network: Network, x: Any, h: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of the vector field at x, J[i, k] = ∂F_i/∂x_k."""
    x = np.asarray(x, dtype=float).reshape(-1)
    field = spec.vector_field(network)
    n = x.shape[0]
    J = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        J[:, k] = (field(0.0, x + e) - field(0.0, x - e)) / (2 * h)
    return J


def load_initial_condition(path: Union[str, Path]) -> np.ndarray:
    """Read an initial state from JSON: a list of numbers or {"x0": [...]}.

    Raises:
        DataError: If the file is missing, malformed or non-numeric
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"initial-condition file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DataError(f"initial-condition file {path} is not valid JSON: {e}") from e
    if isinstance(data, dict):
        data = data.get("x0")
    try:
        x0 = np.array(data, dtype=float).reshape(-1)
    except (TypeError, ValueError) as e:
        raise DataError(f"initial condition in {path} must be a list of numbers") from e
    if x0.size == 0 or not np.all(np.isfinite(x0)):
        raise DataError(f"initial condition in {path} must be a non-empty list of finite numbers")
    return x0
