"""
Test Suite for Dynamics Simulation Module

Tests equilibria, RK4 integration, contraction rates, the capacity
transform and linearisation consistency.
"""

import unittest
import tempfile
import shutil
import warnings
import csv
import json
from pathlib import Path
import sys
import os

import numpy as np

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.errors import (DataError, DivergenceError, EstimationError, ParameterError, RootNotFoundError,
                        ShapeError, SingularityError)
from src.graph_core import Network
from src.dynamics_sim import (
    CapacityTransformedDynamics, DynamicsFactory, DynamicsSpec, GeneralScalarDynamics, LinearLoadDynamics,
    PerturbedLoadDynamics, TransformedDynamics, estimate_contraction_rate, find_uniform_equilibrium,
    load_initial_condition, numerical_jacobian, simulate, simulate_capacity
)
from src.prob_stability import NoiseModel, sample_perturbation
from src.spectral import assemble_jacobian


def random_connected_network(n, rng, extra=0.2):
    """Random symmetric network: a random spanning path plus extra pairs."""
    order = rng.permutation(n)
    A = np.zeros((n, n))
    for a, b in zip(order[:-1], order[1:]):
        A[a, b] = A[b, a] = 1.0
    extra_pairs = np.triu(rng.random((n, n)) < extra, k=1)
    A[extra_pairs] = 1.0
    A = np.maximum(A, A.T)
    return Network(A)


TWO_NODES = Network.from_edges(2, [(0, 1), (1, 0)])


class TestEquilibrium(unittest.TestCase):
    """Test uniform equilibria of each family."""

    def test_linear_root(self):
        report = find_uniform_equilibrium(LinearLoadDynamics(beta=2.0, gamma=1.0))
        self.assertEqual(report.r, 1.0)
        self.assertEqual(report.residual, 0.0)

    def test_general_root(self):
        spec = GeneralScalarDynamics(lambda l: 1 - l ** 2, lambda x: x, (0.0, 2.0))
        report = find_uniform_equilibrium(spec, Network.complete(4))
        self.assertLess(abs(report.r - 1.0), 1e-12)
        self.assertLess(report.residual, 1e-12)

    def test_general_without_root(self):
        spec = GeneralScalarDynamics(lambda l: 1 + l ** 2, lambda x: x, (0.0, 2.0))
        with self.assertRaises(RootNotFoundError):
            find_uniform_equilibrium(spec)

    def test_coupling_must_vanish_at_zero(self):
        with self.assertRaises(ParameterError):
            GeneralScalarDynamics(lambda l: 1 - l, lambda x: x + 1e-6, (0.0, 2.0))

    def test_invalid_bracket(self):
        with self.assertRaises(ParameterError):
            GeneralScalarDynamics(lambda l: 1 - l, lambda x: x, (2.0, 0.0))

    def test_capacity_equilibrium_is_demand(self):
        spec = CapacityTransformedDynamics(1.0, 0.5, [1.0, 3.0])
        report = find_uniform_equilibrium(spec, TWO_NODES)
        np.testing.assert_array_equal(report.equilibrium, [1.0, 3.0])
        self.assertLess(report.residual, 1e-12)

    def test_residual_on_random_networks(self):
        """Test ||F(r·1)||_∞ < 1e-12 for each family on random networks."""
        rng = np.random.default_rng(5)
        net = random_connected_network(8, rng)
        specs = [
            LinearLoadDynamics(1.5, 0.7),
            GeneralScalarDynamics(lambda l: 1 - l ** 3, lambda x: 0.4 * np.tanh(x), (0.0, 2.0)),
            CapacityTransformedDynamics(1.0, 0.3, rng.uniform(0.5, 2.0, 8)),
            TransformedDynamics.capacity(LinearLoadDynamics(1.0, 0.3), rng.uniform(0.5, 2.0, 8)),
        ]
        for spec in specs:
            self.assertLess(find_uniform_equilibrium(spec, net).residual, 1e-12)


class TestSimulate(unittest.TestCase):
    """Test RK4 integration against closed-form solutions."""

    def test_scalar_linear(self):
        """Test l(1) = 1 - e^-1 for β=1, l(0)=0."""
        traj = simulate(LinearLoadDynamics(1.0, 0.0), Network.empty(1), [0.0], t_end=1.0, dt=1e-3)
        self.assertAlmostEqual(traj.final_state[0], 1.0 - np.exp(-1.0), delta=1e-6)
        self.assertEqual(traj.times[-1], 1.0)

    def test_two_node_exchange(self):
        """Test l(t) = (1 - e^-2t, 1 + e^-2t) for β=0, γ=1, l0=(0,2)."""
        traj = simulate(LinearLoadDynamics(0.0, 1.0), TWO_NODES, [0.0, 2.0], t_end=1.0, dt=1e-3)
        expected = [1.0 - np.exp(-2.0), 1.0 + np.exp(-2.0)]
        np.testing.assert_allclose(traj.final_state, expected, atol=1e-6)

    def test_triangle_converges(self):
        rng = np.random.default_rng(6)
        traj = simulate(LinearLoadDynamics(1.0, 0.5), Network.complete(3), rng.uniform(0, 3, 3), 10.0, 1e-3)
        self.assertLess(np.max(np.abs(traj.final_state - 1.0)), 1e-4)

    def test_fourth_order_convergence(self):
        """Test halving dt reduces the end-state error about 16 times."""
        exact = 1.0 - np.exp(-1.0)
        errors = []
        for dt in (0.2, 0.1):
            traj = simulate(LinearLoadDynamics(1.0, 0.0), Network.empty(1), [0.0], 1.0, dt)
            errors.append(abs(traj.final_state[0] - exact))
        self.assertTrue(12 <= errors[0] / errors[1] <= 20)

    def test_time_grid(self):
        """Test sample times k·dt plus a final partial step."""
        traj = simulate(LinearLoadDynamics(1.0, 0.0), Network.empty(1), [0.0], t_end=1.05, dt=0.1)
        self.assertEqual(len(traj), 12)
        self.assertEqual(traj.times[-1], 1.05)
        self.assertTrue(np.all(np.diff(traj.times) > 0))

    def test_record_every(self):
        traj = simulate(LinearLoadDynamics(1.0, 0.0), Network.empty(1), [0.0], 1.0, 0.01, record_every=10)
        self.assertEqual(len(traj), 11)
        self.assertAlmostEqual(traj.times[-1], 1.0)

    def test_invalid_steps(self):
        spec = LinearLoadDynamics(1.0, 0.0)
        with self.assertRaises(ParameterError):
            simulate(spec, Network.empty(1), [0.0], 1.0, 0.0)
        with self.assertRaises(ParameterError):
            simulate(spec, Network.empty(1), [0.0], 0.001, 0.01)
        with self.assertRaises(ShapeError):
            simulate(spec, Network.empty(2), [0.0], 1.0, 0.1)
        with self.assertRaises(DataError):
            simulate(spec, Network.empty(1), [np.nan], 1.0, 0.1)

    def test_divergence_carries_time(self):
        """Test an unstable system raises DivergenceError with the failure time."""
        with np.errstate(over="ignore", invalid="ignore"):
            with self.assertRaises(DivergenceError) as ctx:
                simulate(LinearLoadDynamics(-50.0, 0.0), Network.empty(1), [2.0], 30.0, 0.01)
        self.assertGreater(ctx.exception.t, 0.0)
        self.assertLess(ctx.exception.t, 30.0)

    def test_divergence_is_silent(self):
        """Test overflow is reported only through DivergenceError."""
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            with self.assertRaises(DivergenceError):
                simulate(LinearLoadDynamics(-50.0, 0.0), Network.empty(1), [2.0], 30.0, 0.01)
        self.assertEqual([w for w in caught if issubclass(w.category, RuntimeWarning)], [])


class TestContractionRate(unittest.TestCase):
    """Test the fitted exponential decay rate."""

    def test_scalar_rate(self):
        traj = simulate(LinearLoadDynamics(0.5, 0.0), Network.empty(1), [0.0], 20.0, 1e-2)
        self.assertAlmostEqual(estimate_contraction_rate(traj, [1.0]), 0.5, delta=0.005)

    def test_decoupled_cells(self):
        """Test γ=0 gives the rate β for a generic initial condition."""
        rng = np.random.default_rng(7)
        traj = simulate(LinearLoadDynamics(2.0, 0.0), Network.complete(5), rng.uniform(0, 2, 5), 8.0, 1e-3)
        self.assertAlmostEqual(estimate_contraction_rate(traj, np.ones(5)), 2.0, delta=0.02)

    def test_slowest_mode_dominates(self):
        """Test β=1, γ=2 on a random connected network decays at rate β."""
        rng = np.random.default_rng(8)
        net = random_connected_network(10, rng)
        traj = simulate(LinearLoadDynamics(1.0, 2.0), net, rng.uniform(1.2, 2.0, 10), 20.0, 1e-3)
        self.assertAlmostEqual(estimate_contraction_rate(traj, np.ones(10)), 1.0, delta=0.05)

    def test_floor_cuts_round_off_tail(self):
        """Test a run that decays below 1e-12 is fitted up to the deviation floor."""
        traj = simulate(LinearLoadDynamics(3.0, 0.0), Network.empty(1), [0.0], 10.0, 1e-2)
        with self.assertRaises(EstimationError):
            estimate_contraction_rate(traj, [1.0])
        self.assertAlmostEqual(estimate_contraction_rate(traj, [1.0], floor=1e-10), 3.0, delta=1e-3)

    def test_non_convergent(self):
        traj = simulate(LinearLoadDynamics(-0.5, 0.0), Network.empty(1), [0.5], 2.0, 1e-2)
        with self.assertRaises(EstimationError):
            estimate_contraction_rate(traj, [1.0])

    def test_shape_mismatch(self):
        traj = simulate(LinearLoadDynamics(1.0, 0.0), Network.empty(1), [0.0], 1.0, 0.1)
        with self.assertRaises(ShapeError):
            estimate_contraction_rate(traj, [1.0, 1.0])


class TestCapacitySystem(unittest.TestCase):
    """Test the capacity-space dynamics and the change of variables."""

    def test_single_cell(self):
        """Test c(t) rises monotonically to d = 2."""
        spec = CapacityTransformedDynamics(1.0, 0.0, [2.0])
        traj = simulate_capacity(spec, Network.empty(1), [1.0], 10.0, 1e-3)
        self.assertLess(abs(traj.final_state[0] - 2.0), 1e-4)
        self.assertTrue(np.all(np.diff(traj.states[:, 0]) > 0))

    def test_two_cells(self):
        spec = CapacityTransformedDynamics(1.0, 0.5, [1.0, 3.0])
        traj = simulate_capacity(spec, TWO_NODES, [2.0, 2.0], 20.0, 1e-3)
        np.testing.assert_allclose(traj.final_state, [1.0, 3.0], atol=1e-3)

    def test_zero_capacity_rejected(self):
        spec = CapacityTransformedDynamics(1.0, 0.5, [1.0, 3.0])
        with self.assertRaises(ParameterError):
            simulate_capacity(spec, TWO_NODES, [0.0, 2.0], 1.0, 1e-3)

    def test_singularity_during_run(self):
        """Test a capacity decaying to 0 raises SingularityError."""
        spec = CapacityTransformedDynamics(-1.0, 0.0, [1.0])
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            with self.assertRaises(SingularityError) as ctx:
                simulate_capacity(spec, Network.empty(1), [0.5], 60.0, 1e-2)
        self.assertGreater(ctx.exception.t, 20.0)

    def test_requires_capacity_spec(self):
        with self.assertRaises(ParameterError):
            simulate_capacity(LinearLoadDynamics(1.0, 0.5), TWO_NODES, [1.0, 1.0], 1.0, 0.1)

    def test_invalid_demands(self):
        with self.assertRaises(ParameterError):
            CapacityTransformedDynamics(1.0, 0.5, [1.0, -1.0])
        with self.assertRaises(ShapeError):
            simulate_capacity(CapacityTransformedDynamics(1.0, 0.5, [1.0]), TWO_NODES, [1.0, 1.0], 1.0, 0.1)

    def test_load_and_capacity_agree(self):
        """Test simulating loads and mapping through d/l matches the capacity run."""
        rng = np.random.default_rng(9)
        net = random_connected_network(6, rng)
        d = rng.uniform(0.5, 2.0, 6)
        l0 = rng.uniform(0.5, 1.5, 6)
        load = simulate(LinearLoadDynamics(1.2, 0.4), net, l0, 5.0, 1e-3)
        cap_spec = CapacityTransformedDynamics(1.2, 0.4, d)
        cap = simulate_capacity(cap_spec, net, cap_spec.from_load(l0), 5.0, 1e-3)
        np.testing.assert_allclose(cap.states, d / load.states, rtol=1e-5)

    def test_generic_transform_matches_closed_form(self):
        rng = np.random.default_rng(10)
        net = random_connected_network(5, rng)
        d = rng.uniform(0.5, 2.0, 5)
        closed = CapacityTransformedDynamics(1.0, 0.5, d)
        generic = TransformedDynamics.capacity(LinearLoadDynamics(1.0, 0.5), d)
        c0 = rng.uniform(0.5, 2.0, 5)
        a = simulate(closed, net, c0, 2.0, 1e-2)
        b = simulate(generic, net, c0, 2.0, 1e-2)
        np.testing.assert_allclose(a.states, b.states, rtol=1e-9)
        np.testing.assert_allclose(generic.equilibrium(5), d)


class TestLinearisation(unittest.TestCase):
    """Test finite-difference Jacobians against the assembled Jacobian."""

    def setUp(self):
        self.network = random_connected_network(7, np.random.default_rng(11))

    def test_linear_family(self):
        spec = LinearLoadDynamics(1.3, 0.6)
        J_fd = numerical_jacobian(spec, self.network, np.ones(7))
        np.testing.assert_allclose(J_fd, assemble_jacobian(spec.jacobian_spec(self.network)), atol=1e-5)

    def test_nonlinear_family(self):
        """Test f(l) = 1 - l³, g(x) = γ tanh x."""
        spec = GeneralScalarDynamics(lambda l: 1 - l ** 3, lambda x: 0.8 * np.tanh(x), (0.0, 2.0))
        J_fd = numerical_jacobian(spec, self.network, np.full(7, spec.root()))
        js = spec.jacobian_spec(self.network)
        self.assertAlmostEqual(js.fprime_r, -3.0, places=6)
        self.assertAlmostEqual(js.gamma, 0.8, places=6)
        np.testing.assert_allclose(J_fd, assemble_jacobian(js), atol=1e-5)

    def test_capacity_family(self):
        """Test the capacity Jacobian at d is similar to the load Jacobian."""
        d = np.linspace(0.5, 2.0, 7)
        spec = CapacityTransformedDynamics(1.0, 0.5, d)
        J_fd = numerical_jacobian(spec, self.network, d)
        np.testing.assert_allclose(J_fd, spec.jacobian(self.network), atol=1e-5)
        generic = TransformedDynamics.capacity(LinearLoadDynamics(1.0, 0.5), d)
        np.testing.assert_allclose(generic.jacobian(self.network), spec.jacobian(self.network), atol=1e-12)

    def test_perturbed_family(self):
        sample = sample_perturbation(self.network, NoiseModel(0.3, 0.8), seed=3)
        spec = PerturbedLoadDynamics(1.0, 0.5, sample)
        J_fd = numerical_jacobian(spec, self.network, np.ones(7))
        np.testing.assert_allclose(J_fd, spec.jacobian(self.network), atol=1e-5)
        self.assertLess(find_uniform_equilibrium(spec, self.network).residual, 1e-12)


class TestFactoryAndIO(unittest.TestCase):
    """Test the dynamics factory and trajectory/initial-condition files."""

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def test_cannot_instantiate_abstract_spec(self):
        with self.assertRaises(TypeError):
            DynamicsSpec("abstract")

    def test_factory(self):
        self.assertIsInstance(DynamicsFactory.create("linear", beta=1.0, gamma=0.5), LinearLoadDynamics)
        self.assertIsInstance(DynamicsFactory.create("capacity", beta=1.0, gamma=0.5, demands=[1.0]),
                              CapacityTransformedDynamics)
        self.assertIn("general", DynamicsFactory.get_supported_types())
        with self.assertRaises(ParameterError):
            DynamicsFactory.create("stiff")

    def test_trajectory_csv(self):
        traj = simulate(LinearLoadDynamics(1.0, 0.5), TWO_NODES, [0.0, 2.0], 0.2, 0.1)
        path = Path(self.test_dir) / "traj.csv"
        traj.to_csv(path)
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        self.assertEqual(rows[0], ["t", "x1", "x2"])
        self.assertEqual(rows[1], ["0.0", "0.0", "2.0"])
        self.assertEqual(len(rows), 4)

    def test_load_initial_condition(self):
        path = Path(self.test_dir) / "x0.json"
        path.write_text(json.dumps({"x0": [0.5, 1.5]}), encoding="utf-8")
        np.testing.assert_array_equal(load_initial_condition(path), [0.5, 1.5])
        path.write_text(json.dumps([1, 2, 3]), encoding="utf-8")
        np.testing.assert_array_equal(load_initial_condition(path), [1.0, 2.0, 3.0])
        path.write_text(json.dumps({"x0": ["a"]}), encoding="utf-8")
        with self.assertRaises(DataError):
            load_initial_condition(path)
        with self.assertRaises(DataError):
            load_initial_condition(Path(self.test_dir) / "missing.json")


if __name__ == '__main__':
    unittest.main()
