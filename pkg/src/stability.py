"""
Stability Module

Classifies the uniform equilibrium r·1 of the load dynamics from the sign of
the self-dynamics slope f'(r), the coupling rate γ = g'(0) and the Laplacian
spectral abscissa ρ, and provides a direct spectral oracle to cross-check the
classification.

Convention: the equilibrium is asymptotically stable when every Jacobian
eigenvalue has negative real part (the Routh-Hurwitz convention), which is the
only reading consistent with all five scenarios below.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

from .errors import DataError, DomainError
from .graph_core import Network, in_laplacian
from .spectral import JacobianSpec, assemble_jacobian, eigenvalues, spectral_abscissa
from .utils import TOL, require_finite

logger = logging.getLogger(__name__)


class Outcome(Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    INDETERMINATE = "Indeterminate"


class Scenario(Enum):
    """Stability scenarios, each fixing its outcome."""

    DEFAULT_LOAD_BALANCING = "DefaultLoadBalancing"
    NEGATIVE_GAMMA_STABLE = "NegativeGammaStable"
    NEGATIVE_GAMMA_UNSTABLE = "NegativeGammaUnstable"
    NEGATIVE_GAMMA_BOUNDARY = "NegativeGammaBoundary"
    ZERO_SELF_NEGATIVE_GAMMA = "ZeroSelfNegativeGamma"
    ZERO_SELF_NONNEGATIVE_GAMMA = "ZeroSelfNonnegativeGamma"
    POSITIVE_SELF = "PositiveSelf"

    @property
    def outcome(self) -> Outcome:
        return _SCENARIO_OUTCOME[self]


_SCENARIO_OUTCOME = {
    Scenario.DEFAULT_LOAD_BALANCING: Outcome.STABLE,
    Scenario.NEGATIVE_GAMMA_STABLE: Outcome.STABLE,
    Scenario.NEGATIVE_GAMMA_UNSTABLE: Outcome.UNSTABLE,
    Scenario.NEGATIVE_GAMMA_BOUNDARY: Outcome.INDETERMINATE,
    Scenario.ZERO_SELF_NEGATIVE_GAMMA: Outcome.UNSTABLE,
    Scenario.ZERO_SELF_NONNEGATIVE_GAMMA: Outcome.INDETERMINATE,
    Scenario.POSITIVE_SELF: Outcome.UNSTABLE,
}


@dataclass(frozen=True)
class StabilityVerdict:
    """Result of classify(): scenario, its outcome and the numbers behind it.

    Attributes:
        scenario (Scenario): Which of the stability scenarios applies
        evidence (dict): f'(r), γ, ρ and, for γ < 0 with f'(r) < 0, the
            compared quantities |f'(r)| and |γ|ρ
    """

    scenario: Scenario
    evidence: Dict[str, Any] = field(default_factory=dict)

    @property
    def outcome(self) -> Outcome:
        return self.scenario.outcome

    @property
    def is_decidable(self) -> bool:
        return self.outcome is not Outcome.INDETERMINATE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "scenario": self.scenario.value,
            "evidence": dict(self.evidence),
        }


def classify(fprime_r: float, gamma: float, rho: float) -> StabilityVerdict:
    """Classify the uniform equilibrium from f'(r), γ and ρ.

    Args:
        fprime_r (float): Slope of the self-dynamics at the root r
        gamma (float): Coupling rate g'(0)
        rho (float): Spectral abscissa of the in-Laplacian (>= 0)

    Returns:
        StabilityVerdict: Scenario plus evidence

    Raises:
        DataError: If an input is not finite
        DomainError: If rho is negative

    Examples:
        >>> classify(-1.0, 0.5, 3.0).scenario.value
        'DefaultLoadBalancing'
        >>> classify(-1.0, -0.5, 3.0).outcome.value
        'Unstable'
        >>> classify(0.0, 1.0, 2.0).outcome.value
        'Indeterminate'
    """
    fprime_r = require_finite("f'(r)", fprime_r)
    gamma = require_finite("gamma", gamma)
    rho = require_finite("rho", rho)
    if rho < -TOL.containment:
        raise DomainError(f"rho must be >= 0 (Laplacian spectral abscissa), got {rho}")
    rho = max(rho, 0.0)

    evidence: Dict[str, Any] = {"fprime_r": fprime_r, "gamma": gamma, "rho": rho}
    if fprime_r > 0:
        scenario = Scenario.POSITIVE_SELF
    elif fprime_r == 0:
        scenario = Scenario.ZERO_SELF_NEGATIVE_GAMMA if gamma < 0 else Scenario.ZERO_SELF_NONNEGATIVE_GAMMA
    elif gamma >= 0:
        scenario = Scenario.DEFAULT_LOAD_BALANCING
    else:
        self_rate = abs(fprime_r)
        coupled_rate = abs(gamma) * rho
        evidence.update({"abs_fprime_r": self_rate, "abs_gamma_rho": coupled_rate})
        if math.isclose(self_rate, coupled_rate, rel_tol=TOL.boundary_rtol):
            scenario = Scenario.NEGATIVE_GAMMA_BOUNDARY
        elif self_rate > coupled_rate:
            scenario = Scenario.NEGATIVE_GAMMA_STABLE
        else:
            scenario = Scenario.NEGATIVE_GAMMA_UNSTABLE
    logger.debug("classify f'=%g gamma=%g rho=%g -> %s", fprime_r, gamma, rho, scenario.value)
    return StabilityVerdict(scenario, evidence)


def verify_by_spectrum(J: Any) -> bool:
    """Spectral oracle: True iff max Re(eig(J)) < -margin.

    Examples:
        >>> verify_by_spectrum([[-1.0, 0.0], [0.0, -2.0]])
        True
        >>> verify_by_spectrum([[-1.0, 0.0], [0.0, 0.1]])
        False
    """
    return spectral_abscissa(eigenvalues(J)) < -TOL.stability_margin


def critical_gamma(fprime_r: float, rho: float) -> float:
    """|γ| at which a negative coupling destabilises, |f'(r)| / ρ.

    Returns math.inf when ρ = 0 (no negative coupling can destabilise).

    Raises:
        DomainError: If f'(r) >= 0 (no threshold exists) or rho < 0
    """
    fprime_r = require_finite("f'(r)", fprime_r)
    rho = require_finite("rho", rho)
    if fprime_r >= 0:
        raise DomainError("critical gamma only exists for f'(r) < 0")
    if rho < 0:
        raise DomainError(f"rho must be >= 0, got {rho}")
    return math.inf if rho == 0 else abs(fprime_r) / rho


def classify_network(network: Network, fprime_r: float, gamma: float,
                     laplacian_rho: Optional[float] = None) -> StabilityVerdict:
    """Classify on a concrete network and attach the spectral-oracle result.

    Args:
        network (Network): Load-sharing network
        fprime_r (float): f'(r)
        gamma (float): g'(0)
        laplacian_rho (float, optional): Precomputed ρ; computed if omitted

    Returns:
        StabilityVerdict: evidence additionally holds 'jacobian_abscissa' and
        'spectral_stable'
    """
    if network.n == 0:
        raise DataError("cannot classify an empty network")
    L = in_laplacian(network)
    rho = spectral_abscissa(eigenvalues(L)) if laplacian_rho is None else laplacian_rho
    verdict = classify(fprime_r, gamma, rho)
    J = assemble_jacobian(JacobianSpec(fprime_r, gamma, L))
    mu = spectral_abscissa(eigenvalues(J))
    evidence = dict(verdict.evidence)
    evidence.update({"n": network.n, "jacobian_abscissa": mu,
                     "spectral_stable": bool(mu < -TOL.stability_margin)})
    if verdict.is_decidable and (verdict.outcome is Outcome.STABLE) != evidence["spectral_stable"]:
        logger.warning("classifier (%s) and spectral oracle disagree: max Re(mu)=%g",
                       verdict.outcome.value, mu)
    return StabilityVerdict(verdict.scenario, evidence)
