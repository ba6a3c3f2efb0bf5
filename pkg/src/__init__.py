"""
Load-Balancing Stability Library

Stability analysis of load-balancing dynamics on base-station networks:
network generation, Laplacian spectra, scenario classification, ODE
simulation and noise-robust probabilistic bounds.
"""
from .errors import (
    LoadStabError,
    ParameterError,
    UsageError,
    ShapeError,
    DataError,
    DomainError,
    NumericError,
    RootNotFoundError,
    DivergenceError,
    SingularityError,
    EstimationError
)
from .graph_core import (
    Network,
    GershgorinDisc,
    in_degree,
    in_laplacian,
    laplacian_kernel_residual,
    gershgorin_discs,
    in_disc_union,
    export_laplacian_csv,
    export_discs_csv
)
from .network_gen import (
    Window,
    PppParams,
    PcpParams,
    ConnectivityParams,
    PointSet,
    PointProcessFactory,
    sample_ppp,
    sample_pcp,
    connect_rgg
)
from .spectral import (
    Spectrum,
    JacobianSpec,
    eigenvalues,
    spectral_abscissa,
    assemble_jacobian,
    max_matching_distance
)
from .stability import (
    Outcome,
    Scenario,
    StabilityVerdict,
    classify,
    classify_network,
    verify_by_spectrum,
    critical_gamma
)
from .prob_stability import (
    NoiseModel,
    PerturbationSample,
    StabilityBound,
    MonteCarloEstimate,
    sample_perturbation,
    perturbed_jacobian,
    sample_perturbed_jacobian,
    gershgorin_margin,
    irwin_hall_mixture_pdf,
    irwin_hall_mixture_cdf,
    irwin_hall_atom_mass,
    prob_s_negative,
    stability_lower_bound,
    mc_stability_probability
)
from .dynamics_sim import (
    DynamicsSpec,
    LinearLoadDynamics,
    GeneralScalarDynamics,
    CapacityTransformedDynamics,
    TransformedDynamics,
    PerturbedLoadDynamics,
    DynamicsFactory,
    EquilibriumReport,
    Trajectory,
    find_uniform_equilibrium,
    simulate,
    simulate_capacity,
    estimate_contraction_rate,
    numerical_jacobian,
    load_initial_condition
)

__all__ = [
    'LoadStabError', 'ParameterError', 'UsageError', 'ShapeError', 'DataError', 'DomainError',
    'NumericError', 'RootNotFoundError', 'DivergenceError', 'SingularityError', 'EstimationError',
    'Network', 'GershgorinDisc', 'in_degree', 'in_laplacian', 'laplacian_kernel_residual',
    'gershgorin_discs', 'in_disc_union', 'export_laplacian_csv', 'export_discs_csv',
    'Window', 'PppParams', 'PcpParams', 'ConnectivityParams', 'PointSet', 'PointProcessFactory',
    'sample_ppp', 'sample_pcp', 'connect_rgg',
    'Spectrum', 'JacobianSpec', 'eigenvalues', 'spectral_abscissa', 'assemble_jacobian',
    'max_matching_distance',
    'Outcome', 'Scenario', 'StabilityVerdict', 'classify', 'classify_network', 'verify_by_spectrum',
    'critical_gamma',
    'NoiseModel', 'PerturbationSample', 'StabilityBound', 'MonteCarloEstimate',
    'sample_perturbation', 'perturbed_jacobian', 'sample_perturbed_jacobian', 'gershgorin_margin', 'irwin_hall_mixture_pdf',
    'irwin_hall_mixture_cdf', 'irwin_hall_atom_mass', 'prob_s_negative', 'stability_lower_bound',
    'mc_stability_probability',
    'DynamicsSpec', 'LinearLoadDynamics', 'GeneralScalarDynamics', 'CapacityTransformedDynamics',
    'TransformedDynamics', 'PerturbedLoadDynamics', 'DynamicsFactory', 'EquilibriumReport',
    'Trajectory', 'find_uniform_equilibrium', 'simulate', 'simulate_capacity',
    'estimate_contraction_rate', 'numerical_jacobian', 'load_initial_condition'
]
