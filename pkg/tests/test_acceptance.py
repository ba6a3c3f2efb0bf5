"""
Acceptance Test Suite

End-to-end checks of the workbench's headline claims: Laplacian spectra of
generated networks, the default stability theorem, the negative-coupling
threshold, contraction rates, the capacity transform, linearisation, the
probabilistic bound, the Irwin-Hall mixture law, Gershgorin containment and
reproducible CLI runs.
"""

import unittest
import tempfile
import shutil
import contextlib
import io
import json
from pathlib import Path
import sys
import os

import numpy as np
from scipy import integrate

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from main import main
from src.dynamics_sim import (CapacityTransformedDynamics, GeneralScalarDynamics, LinearLoadDynamics,
                              estimate_contraction_rate, numerical_jacobian, simulate, simulate_capacity)
from src.graph_core import Network, gershgorin_discs, in_disc_union, in_laplacian
from src.network_gen import ConnectivityParams, PcpParams, PppParams, Window, connect_rgg, sample_pcp, sample_ppp
from src.prob_stability import (NoiseModel, irwin_hall_atom_mass, irwin_hall_mixture_pdf, mc_stability_probability,
                                sample_perturbation, perturbed_jacobian, stability_lower_bound)
from src.spectral import JacobianSpec, assemble_jacobian, eigenvalues
from src.stability import Outcome, classify_network, verify_by_spectrum


def random_connected_network(n, rng, extra=0.3):
    """Random symmetric network: a random spanning path plus extra pairs."""
    order = rng.permutation(n)
    A = np.zeros((n, n))
    for a, b in zip(order[:-1], order[1:]):
        A[a, b] = A[b, a] = 1.0
    A[np.triu(rng.random((n, n)) < extra, k=1)] = 1.0
    return Network(np.maximum(A, A.T))


def random_directed_network(n, rng, density=0.3):
    A = rng.uniform(0.1, 3.0, size=(n, n)) * (rng.random((n, n)) < density)
    np.fill_diagonal(A, 0.0)
    return Network(A)


def random_unit_network(n, rng, density=0.5):
    A = np.triu((rng.random((n, n)) < density).astype(float), k=1)
    return Network(A + A.T)


class TestLaplacianSpectrumOfGeneratedNetworks(unittest.TestCase):
    """Test generated networks have Laplacian spectra in the closed right half-plane."""

    def check_network(self, network):
        spec = eigenvalues(in_laplacian(network))
        self.assertTrue(np.all(spec.eigenvalues.real >= -1e-9))
        self.assertGreaterEqual(spec.count_near(0.0, 1e-9), 1)

    def test_poisson_networks(self):
        for seed in range(20):
            points = sample_ppp(PppParams(100.0), Window(), seed)
            self.check_network(connect_rgg(points, ConnectivityParams(0.15, 0.8), seed + 1000))

    def test_cluster_networks(self):
        checked = 0
        for seed in range(20):
            points = sample_pcp(PcpParams(4.0, 0.08, 25.0), Window(), seed)
            if len(points) == 0:
                continue
            self.check_network(connect_rgg(points, ConnectivityParams(0.15, 0.8), seed + 1000))
            checked += 1
        self.assertGreaterEqual(checked, 15)


class TestDefaultStability(unittest.TestCase):
    """Test f'(r) < 0 with γ >= 0 is always stable."""

    def test_random_networks(self):
        rng = np.random.default_rng(2024)
        for _ in range(500):
            network = random_directed_network(int(rng.integers(1, 21)), rng)
            beta = 5.0 - rng.uniform(0.0, 5.0)
            gamma = rng.uniform(0.0, 5.0)
            verdict = classify_network(network, -beta, gamma)
            self.assertEqual(verdict.outcome, Outcome.STABLE)
            self.assertTrue(verdict.evidence["spectral_stable"])
            self.assertLess(verdict.evidence["jacobian_abscissa"], 0.0)


class TestNegativeCouplingThreshold(unittest.TestCase):
    """Test the triangle destabilises at |γ| = |f'(r)| / ρ = 1/3."""

    def test_flip_point(self):
        L = in_laplacian(Network.complete(3))
        gammas = np.linspace(-1.0, -0.01, 991)
        stable = np.array([verify_by_spectrum(assemble_jacobian(JacobianSpec(-1.0, g, L))) for g in gammas])
        flips = np.flatnonzero(np.diff(stable.astype(int)))
        self.assertEqual(len(flips), 1)
        self.assertFalse(stable[0])
        self.assertTrue(stable[-1])
        k = flips[0]
        flip = 0.5 * (abs(gammas[k]) + abs(gammas[k + 1]))
        self.assertLess(abs(flip - 1.0 / 3.0), 1e-3)


class TestContractionRate(unittest.TestCase):
    """Test ||l(t) - 1|| decays at rate β on connected networks with γ > 0."""

    def test_rate_equals_beta(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            n = int(rng.integers(6, 13))
            network = random_connected_network(n, rng)
            beta, gamma = rng.uniform(0.5, 1.5), rng.uniform(0.5, 2.0)
            traj = simulate(LinearLoadDynamics(beta, gamma), network, rng.uniform(1.2, 2.0, n),
                            16.0 / beta, 2e-3)
            rate = estimate_contraction_rate(traj, np.ones(n))
            self.assertLess(abs(rate - beta) / beta, 0.05)


class TestCapacityTransform(unittest.TestCase):
    """Test load-space and capacity-space simulations agree through c = d / l."""

    def test_random_configurations(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(2, 9))
            network = random_connected_network(n, rng)
            beta, gamma = rng.uniform(1.0, 2.0), rng.uniform(0.0, 1.5)
            d = rng.uniform(0.5, 3.0, n)
            l0 = rng.uniform(0.3, 2.0, n)
            load = simulate(LinearLoadDynamics(beta, gamma), network, l0, 10.0, 1e-3, record_every=10)
            spec = CapacityTransformedDynamics(beta, gamma, d)
            cap = simulate_capacity(spec, network, spec.from_load(l0), 10.0, 1e-3, record_every=10)
            np.testing.assert_allclose(cap.states, d / load.states, rtol=1e-5)
            np.testing.assert_allclose(cap.final_state, d, atol=1e-3)


class TestLinearisation(unittest.TestCase):
    """Test finite-difference Jacobians match the assembled f'(r)·Id - γ·Λ^T."""

    def setUp(self):
        self.network = random_directed_network(9, np.random.default_rng(6), density=0.4)

    def test_linear_family(self):
        spec = LinearLoadDynamics(0.8, 1.1)
        J_fd = numerical_jacobian(spec, self.network, np.ones(9))
        np.testing.assert_allclose(J_fd, assemble_jacobian(spec.jacobian_spec(self.network)), atol=1e-5)

    def test_cubic_self_dynamics_with_tanh_coupling(self):
        spec = GeneralScalarDynamics(lambda l: 1 - l ** 3, lambda x: 0.6 * np.tanh(x), (0.0, 2.0))
        J_fd = numerical_jacobian(spec, self.network, np.full(9, spec.root()))
        np.testing.assert_allclose(J_fd, assemble_jacobian(spec.jacobian_spec(self.network)), atol=1e-5)


class TestProbabilisticBound(unittest.TestCase):
    """Test the product bound never exceeds the Monte Carlo estimate."""

    def test_bound_below_monte_carlo(self):
        rng = np.random.default_rng(7)
        for k in range(50):
            network = random_unit_network(int(rng.integers(2, 9)), rng)
            beta = rng.uniform(1.0, 2.0)
            b = rng.uniform(0.0, beta)
            gamma = rng.uniform(0.0, 1.0)
            c = gamma + rng.uniform(0.05, 1.0)
            bound = stability_lower_bound(network, beta, b, gamma, c)
            mc = mc_stability_probability(network, beta, gamma, NoiseModel(b, c), trials=10_000, seed=k)
            self.assertLessEqual(bound.lower_bound, mc.estimate + 2 * mc.stderr)
            self.assertEqual(mc.sufficiency_violations, 0)

    def test_small_noise_is_certain(self):
        rng = np.random.default_rng(8)
        for k in range(5):
            network = random_unit_network(int(rng.integers(2, 9)), rng)
            beta = rng.uniform(0.5, 2.0)
            b = 0.9 * beta
            gamma = rng.uniform(0.1, 1.0)
            c = 0.9 * gamma
            self.assertEqual(stability_lower_bound(network, beta, b, gamma, c).lower_bound, 1.0)
            mc = mc_stability_probability(network, beta, gamma, NoiseModel(b, c), trials=2_000, seed=k)
            self.assertEqual(mc.estimate, 1.0)


class TestIrwinHallMixtureLaw(unittest.TestCase):
    """Test normalisation and the empirical density of the gated noise sum."""

    def test_normalisation(self):
        for gamma in (0.0, 0.1, 0.3, 0.6, 1.5):
            for c in (gamma + 0.2, gamma + 0.4, gamma + 0.8, gamma + 1.6, gamma + 3.2):
                h = 2.0 * (c - gamma)
                for n_terms in range(1, 7):
                    breaks = [k * h for k in range(1, n_terms)] or None
                    mass, _ = integrate.quad(lambda x: irwin_hall_mixture_pdf(x, n_terms, gamma, c),
                                             0.0, n_terms * h, points=breaks, epsabs=1e-11, limit=200)
                    self.assertAlmostEqual(mass + irwin_hall_atom_mass(n_terms, gamma, c), 1.0, delta=1e-6)

    def test_empirical_density(self):
        gamma, c, n_terms = 0.2, 0.7, 6
        rng = np.random.default_rng(9)
        xi = rng.uniform(-c, c, size=(1_000_000, n_terms))
        y = (np.abs(gamma + xi) - gamma - xi).sum(axis=1)
        edges = np.linspace(0.0, 3.0, 16)
        counts, _ = np.histogram(y[y > 0], bins=edges)
        empirical = counts / (len(y) * np.diff(edges))
        analytic = np.array([
            integrate.quad(lambda x: irwin_hall_mixture_pdf(x, n_terms, gamma, c), lo, hi)[0] / (hi - lo)
            for lo, hi in zip(edges[:-1], edges[1:])
        ])
        self.assertLess(np.max(np.abs(empirical - analytic)), 0.01)


class TestGershgorinContainment(unittest.TestCase):
    """Test eigenvalues of Laplacians and perturbed Jacobians lie in both disc unions."""

    def check(self, M):
        rows, cols = gershgorin_discs(M, "rows"), gershgorin_discs(M, "columns")
        for z in eigenvalues(M).eigenvalues:
            self.assertTrue(in_disc_union(z, rows, 1e-9))
            self.assertTrue(in_disc_union(z, cols, 1e-9))

    def test_random_matrices(self):
        rng = np.random.default_rng(10)
        for k in range(100):
            self.check(in_laplacian(random_directed_network(int(rng.integers(1, 15)), rng)))
            network = random_unit_network(int(rng.integers(1, 15)), rng)
            sample = sample_perturbation(network, NoiseModel(0.5, 1.5), seed=k)
            self.check(perturbed_jacobian(network, 1.0, 0.5, sample))


class TestReproducibleRuns(unittest.TestCase):
    """Test a config-file driven pipeline is byte-for-byte reproducible."""

    def setUp(self):
        self.test_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def run_all(self, name):
        out = self.test_dir / name
        config = self.test_dir / f"{name}.json"
        config.write_text(json.dumps({"lambda": 80, "R": 0.15, "P": 0.8, "seed": 42, "out": str(out),
                                      "b": 0.2, "c": 0.9, "trials": 500, "t_end": 2.0, "dt": 0.01}),
                          encoding="utf-8")
        net = str(out / "network.json")
        for argv in (["generate"], ["spectrum", "--input", net], ["classify", "--input", net],
                     ["simulate", "--input", net], ["probbound", "--input", net]):
            with contextlib.redirect_stdout(io.StringIO()):
                self.assertEqual(main(argv + ["--config", str(config)]), 0)
        return {p.name: p.read_bytes() for p in sorted(out.iterdir())}

    def test_identical_outputs(self):
        first, second = self.run_all("first"), self.run_all("second")
        self.assertEqual(sorted(first), ["bound.json", "contraction.json", "eigenvalues.csv", "gershgorin.csv",
                                         "network.json", "network.svg", "spectrum.svg", "trajectory.csv",
                                         "verdict.json"])
        self.assertEqual(first, second)


if __name__ == '__main__':
    unittest.main()
