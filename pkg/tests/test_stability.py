"""
Test Suite for Stability Module

Tests the scenario classifier, the spectral oracle and the critical
coupling threshold.
"""

import math
import unittest
import sys
import os

import numpy as np

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.errors import DataError, DomainError
from src.graph_core import Network, in_laplacian
from src.spectral import JacobianSpec, assemble_jacobian, eigenvalues, spectral_abscissa
from src.stability import (
    Outcome, Scenario, StabilityVerdict, classify, classify_network, critical_gamma, verify_by_spectrum
)


class TestClassify(unittest.TestCase):
    """Test every scenario of the classifier."""

    def test_default_load_balancing(self):
        verdict = classify(-1.0, 0.5, 3.0)
        self.assertEqual(verdict.scenario, Scenario.DEFAULT_LOAD_BALANCING)
        self.assertEqual(verdict.outcome, Outcome.STABLE)

    def test_negative_gamma_unstable(self):
        """Test |γ|ρ = 1.5 > |f'(r)| = 1 is unstable."""
        verdict = classify(-1.0, -0.5, 3.0)
        self.assertEqual(verdict.scenario, Scenario.NEGATIVE_GAMMA_UNSTABLE)
        self.assertEqual(verdict.outcome, Outcome.UNSTABLE)
        self.assertEqual(verdict.evidence["abs_gamma_rho"], 1.5)

    def test_negative_gamma_stable(self):
        verdict = classify(-1.0, -0.2, 3.0)
        self.assertEqual(verdict.scenario, Scenario.NEGATIVE_GAMMA_STABLE)
        self.assertEqual(verdict.outcome, Outcome.STABLE)

    def test_negative_gamma_boundary(self):
        """Test |f'(r)| = |γ|ρ is reported as indeterminate."""
        verdict = classify(-1.0, -1.0 / 3.0, 3.0)
        self.assertEqual(verdict.scenario, Scenario.NEGATIVE_GAMMA_BOUNDARY)
        self.assertFalse(verdict.is_decidable)

    def test_zero_self_dynamics(self):
        self.assertEqual(classify(0.0, -1.0, 2.0).outcome, Outcome.UNSTABLE)
        self.assertEqual(classify(0.0, 1.0, 2.0).outcome, Outcome.INDETERMINATE)
        self.assertEqual(classify(0.0, 0.0, 2.0).scenario, Scenario.ZERO_SELF_NONNEGATIVE_GAMMA)

    def test_positive_self_dynamics(self):
        verdict = classify(0.5, 1.0, 1.0)
        self.assertEqual(verdict.scenario, Scenario.POSITIVE_SELF)
        self.assertEqual(verdict.outcome, Outcome.UNSTABLE)

    def test_every_scenario_has_outcome(self):
        for scenario in Scenario:
            self.assertIsInstance(scenario.outcome, Outcome)

    def test_invalid_inputs(self):
        with self.assertRaises(DomainError):
            classify(-1.0, 1.0, -0.5)
        with self.assertRaises(DataError):
            classify(float("nan"), 1.0, 1.0)

    def test_tiny_negative_rho_is_clamped(self):
        self.assertEqual(classify(-1.0, -1.0, -1e-12).evidence["rho"], 0.0)

    def test_verdict_to_dict(self):
        data = classify(-1.0, 0.5, 3.0).to_dict()
        self.assertEqual(data["outcome"], "Stable")
        self.assertEqual(data["scenario"], "DefaultLoadBalancing")
        self.assertEqual(data["evidence"]["rho"], 3.0)
        self.assertIsInstance(StabilityVerdict(Scenario.POSITIVE_SELF).evidence, dict)


class TestSpectralOracle(unittest.TestCase):
    """Test the classifier against eigenvalues of the assembled Jacobian."""

    def test_verify_by_spectrum(self):
        self.assertTrue(verify_by_spectrum([[-1.0, 0.0], [0.0, -2.0]]))
        self.assertFalse(verify_by_spectrum([[-1.0, 0.0], [0.0, 0.1]]))
        self.assertFalse(verify_by_spectrum([[0.0]]))

    def test_zero_self_negative_gamma_is_spectrally_unstable(self):
        L = in_laplacian(Network.complete(4))
        self.assertFalse(verify_by_spectrum(assemble_jacobian(JacobianSpec(0.0, -0.5, L))))

    def test_positive_self_is_spectrally_unstable(self):
        L = in_laplacian(Network.complete(4))
        self.assertFalse(verify_by_spectrum(assemble_jacobian(JacobianSpec(0.3, 1.0, L))))

    def test_classify_network_evidence(self):
        """Test classify_network computes ρ and agrees with the oracle."""
        verdict = classify_network(Network.complete(3), -1.0, 0.5)
        self.assertAlmostEqual(verdict.evidence["rho"], 3.0, places=10)
        self.assertTrue(verdict.evidence["spectral_stable"])
        self.assertAlmostEqual(verdict.evidence["jacobian_abscissa"], -1.0, places=10)
        self.assertEqual(verdict.evidence["n"], 3)

    def test_classify_network_negative_gamma(self):
        verdict = classify_network(Network.complete(3), -1.0, -0.5)
        self.assertEqual(verdict.outcome, Outcome.UNSTABLE)
        self.assertFalse(verdict.evidence["spectral_stable"])

    def test_classify_empty_network(self):
        with self.assertRaises(DataError):
            classify_network(Network.empty(0), -1.0, 0.5)

    def test_agreement_over_random_networks(self):
        """Test every decidable verdict matches the oracle on 500 directed weighted networks."""
        rng = np.random.default_rng(2024)
        seen = set()
        for _ in range(500):
            n = int(rng.integers(2, 13))
            A = (rng.random((n, n)) < 0.4) * rng.uniform(0.1, 2.0, (n, n))
            np.fill_diagonal(A, 0.0)
            L = in_laplacian(Network(A))
            rho = spectral_abscissa(eigenvalues(L))
            sign = rng.choice([-1.0, 0.0, 1.0], p=[0.6, 0.15, 0.25])
            fprime = sign * rng.uniform(0.1, 3.0)
            gamma = rng.uniform(-2.0, 2.0)
            verdict = classify(fprime, gamma, rho)
            if not verdict.is_decidable:
                continue
            # eigenvalue round-off can flip draws sitting on |f'(r)| = |γ|ρ
            if fprime < 0 and gamma < 0 and abs(abs(fprime) - abs(gamma) * rho) < 1e-6:
                continue
            oracle = verify_by_spectrum(assemble_jacobian(JacobianSpec(fprime, gamma, L)))
            self.assertEqual(verdict.outcome is Outcome.STABLE, oracle,
                             f"{verdict.scenario.value}: f'={fprime}, gamma={gamma}, rho={rho}")
            seen.add(verdict.scenario)
        self.assertEqual(seen, {Scenario.DEFAULT_LOAD_BALANCING, Scenario.NEGATIVE_GAMMA_STABLE,
                                Scenario.NEGATIVE_GAMMA_UNSTABLE, Scenario.ZERO_SELF_NEGATIVE_GAMMA,
                                Scenario.POSITIVE_SELF})


class TestCriticalGamma(unittest.TestCase):
    """Test the |γ| threshold of the negative-coupling scenario."""

    def test_triangle_threshold(self):
        self.assertAlmostEqual(critical_gamma(-1.0, 3.0), 1.0 / 3.0)

    def test_zero_rho(self):
        self.assertTrue(math.isinf(critical_gamma(-1.0, 0.0)))

    def test_requires_negative_slope(self):
        with self.assertRaises(DomainError):
            critical_gamma(0.0, 3.0)

    def test_threshold_matches_spectrum(self):
        L = in_laplacian(Network.complete(3))
        g = critical_gamma(-1.0, 3.0)
        self.assertTrue(verify_by_spectrum(assemble_jacobian(JacobianSpec(-1.0, -(g - 1e-3), L))))
        self.assertFalse(verify_by_spectrum(assemble_jacobian(JacobianSpec(-1.0, -(g + 1e-3), L))))


if __name__ == '__main__':
    unittest.main()
