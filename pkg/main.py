#!/usr/bin/env python3
"""
Load-Balancing Stability Workbench
Command-line entry point tying network generation, spectral analysis,
stability classification, simulation and probabilistic bounds into
reproducible runs with file outputs.

Every output file is a pure function of the run configuration: seeds for the
individual random steps are derived from one master seed, and no timestamps or
absolute paths are written.
"""

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.dynamics_sim import (CapacityTransformedDynamics, LinearLoadDynamics, estimate_contraction_rate,
                              find_uniform_equilibrium, load_initial_condition, simulate)
from src.errors import LoadStabError, UsageError
from src.graph_core import Network, export_discs_csv, gershgorin_discs, in_laplacian
from src.network_gen import ConnectivityParams, PointProcessFactory, Window, connect_rgg
from src.plotting import plot_network_svg, plot_spectrum_svg
from src.prob_stability import NoiseModel, mc_stability_probability, stability_lower_bound
from src.spectral import JacobianSpec, assemble_jacobian, eigenvalues, spectral_abscissa
from src.stability import classify_network, critical_gamma
from src.utils import derive_seed, substream

logger = logging.getLogger(__name__)

COMMANDS = ("generate", "spectrum", "classify", "simulate", "probbound")
NEEDS_INPUT = ("spectrum", "classify", "simulate", "probbound")
SEED_ENV = "LOADSTAB_SEED"

# Deviations at or below this are round-off; the contraction fit stops there.
DEVIATION_FLOOR = 1e-10

# Config-file spellings of the model symbols.
ALIASES = {
    "lambda": "intensity",
    "lambda_p": "parent_intensity",
    "R_c": "cluster_radius",
    "mu_d": "mean_daughters",
}


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run of one command."""

    command: str
    input: Optional[str] = None
    out: str = "out"
    seed: int = 0
    process: str = "ppp"
    intensity: float = 100.0
    parent_intensity: float = 4.0
    cluster_radius: float = 0.08
    mean_daughters: float = 25.0
    window: Tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)
    R: float = 0.15
    P: float = 1.0
    beta: float = 1.0
    gamma: float = 0.5
    fprime_r: Optional[float] = None
    b: float = 0.0
    c: float = 0.0
    dt: float = 1e-3
    t_end: float = 10.0
    record_every: int = 1
    family: str = "linear"
    initial: Optional[str] = None
    demands: Optional[Tuple[float, ...]] = None
    trials: int = 10000
    workers: int = 1
    matrix: str = "laplacian"
    disc_mode: str = "rows"
    svg: bool = True
    verbosity: int = 0

    @property
    def self_slope(self) -> float:
        """f'(r) used for classification: given explicitly or -β of the linear family."""
        return -self.beta if self.fprime_r is None else self.fprime_r


FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message: str) -> None:
        raise UsageError("arguments", message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(description="Load-balancing stability workbench")
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="Operation to run")
    parser.add_argument("--config", help="JSON config file (flags override its values)")
    parser.add_argument("--input", help="Network JSON produced by 'generate'")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--seed", type=int, help=f"Master seed (falls back to ${SEED_ENV})")
    parser.add_argument("-v", "--verbose", dest="verbosity", action="count", help="-v INFO, -vv DEBUG")

    gen = parser.add_argument_group("generate")
    gen.add_argument("--process", choices=PointProcessFactory.get_supported_types())
    gen.add_argument("--lambda", dest="intensity", type=float, help="PPP intensity λ")
    gen.add_argument("--lambda-p", dest="parent_intensity", type=float, help="PCP parent intensity λ_p")
    gen.add_argument("--rc", dest="cluster_radius", type=float, help="PCP cluster radius R_c")
    gen.add_argument("--mu-d", dest="mean_daughters", type=float, help="PCP mean daughters μ_d")
    gen.add_argument("--window", nargs=4, type=float, metavar=("X0", "X1", "Y0", "Y1"))
    gen.add_argument("--R", dest="R", type=float, help="Connection radius")
    gen.add_argument("--P", dest="P", type=float, help="Connection probability")
    gen.add_argument("--svg", action=argparse.BooleanOptionalAction, help="Write SVG plots")

    model = parser.add_argument_group("model")
    model.add_argument("--beta", type=float, help="Scaling-efficiency rate β")
    model.add_argument("--gamma", type=float, help="Offloading rate γ")
    model.add_argument("--fprime", dest="fprime_r", type=float, help="f'(r) for classify (default -β)")
    model.add_argument("--matrix", choices=("laplacian", "jacobian"), help="Matrix analysed by 'spectrum'")
    model.add_argument("--disc-mode", dest="disc_mode", choices=("rows", "columns"))

    sim = parser.add_argument_group("simulate")
    sim.add_argument("--family", choices=("linear", "capacity"))
    sim.add_argument("--dt", type=float)
    sim.add_argument("--t-end", dest="t_end", type=float)
    sim.add_argument("--record-every", dest="record_every", type=int)
    sim.add_argument("--initial", help="JSON initial state (loads; capacities for the capacity family)")
    sim.add_argument("--demands", nargs="+", type=float, help="Demands d_i (capacity family)")

    prob = parser.add_argument_group("probbound")
    prob.add_argument("--b", dest="b", type=float, help="Noise half-width on β")
    prob.add_argument("--c", dest="c", type=float, help="Noise half-width on γ")
    prob.add_argument("--trials", type=int, help="Monte Carlo trials (0 skips the check)")
    prob.add_argument("--workers", type=int, help="Threads for Monte Carlo")
    return parser


def _read_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise UsageError("config", "file must exist", path) from None
    except json.JSONDecodeError as e:
        raise UsageError("config", "file must be valid JSON", str(e)) from None
    if not isinstance(data, dict):
        raise UsageError("config", "file must hold a JSON object")
    values = {}
    for key, value in data.items():
        name = ALIASES.get(key, key)
        if name not in FIELDS:
            raise UsageError(key, "unknown configuration key")
        values[name] = value
    return values


def _number(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise UsageError(key, "must be a finite number", repr(value))
    return float(value)


def _integer(key: str, value: Any, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise UsageError(key, f"{key} must be an integer >= {minimum}", repr(value))
    return value


def _check(key: str, ok: bool, constraint: str, value: Any) -> None:
    if not ok:
        raise UsageError(key, constraint, f"got {value!r}")


def _validate(values: Dict[str, Any]) -> RunConfig:
    """Type-check and range-check merged values, then build the RunConfig."""
    v = dict(values)
    command = v.get("command")
    _check("command", command in COMMANDS, f"one of {', '.join(COMMANDS)}", command)
    if command in NEEDS_INPUT and not v.get("input"):
        raise UsageError("input", f"required for '{command}'")

    v["seed"] = _integer("seed", v.get("seed", 0), 0)
    for key in ("window", "demands"):
        if v.get(key) is not None and not isinstance(v[key], (list, tuple)):
            raise UsageError(key, f"{key} must be a list of numbers", repr(v[key]))
    for key in ("intensity", "parent_intensity", "cluster_radius", "mean_daughters", "R", "P",
                "beta", "gamma", "b", "c", "dt", "t_end"):
        if key in v:
            v[key] = _number(key, v[key])
    if v.get("fprime_r") is not None:
        v["fprime_r"] = _number("fprime_r", v["fprime_r"])
    for key, minimum in (("record_every", 1), ("trials", 0), ("workers", 1), ("verbosity", 0)):
        if key in v:
            v[key] = _integer(key, v[key], minimum)

    cfg = RunConfig(**{k: val for k, val in v.items() if k not in ("window", "demands")},
                    window=tuple(_number("window", x) for x in v.get("window", RunConfig.window)),
                    demands=None if v.get("demands") is None
                    else tuple(_number("demands", x) for x in v["demands"]))

    _check("process", cfg.process in PointProcessFactory.get_supported_types(),
           "process ∈ {ppp, matern, thomas}", cfg.process)
    _check("window", len(cfg.window) == 4 and cfg.window[0] < cfg.window[1] and cfg.window[2] < cfg.window[3],
           "window = [x_min, x_max, y_min, y_max] with x_min < x_max, y_min < y_max", cfg.window)
    for key in ("intensity", "parent_intensity", "cluster_radius", "mean_daughters"):
        _check(key, getattr(cfg, key) > 0, f"{key} > 0", getattr(cfg, key))
    _check("R", cfg.R >= 0, "R >= 0", cfg.R)
    _check("P", 0.0 <= cfg.P <= 1.0, "P ∈ [0,1]", cfg.P)
    _check("b", cfg.b >= 0, "b >= 0", cfg.b)
    _check("c", cfg.c >= 0, "c >= 0", cfg.c)
    _check("dt", cfg.dt > 0, "dt > 0", cfg.dt)
    _check("t_end", cfg.t_end >= cfg.dt, "t_end >= dt", cfg.t_end)
    _check("family", cfg.family in ("linear", "capacity"), "family ∈ {linear, capacity}", cfg.family)
    _check("matrix", cfg.matrix in ("laplacian", "jacobian"), "matrix ∈ {laplacian, jacobian}", cfg.matrix)
    _check("disc_mode", cfg.disc_mode in ("rows", "columns"), "disc_mode ∈ {rows, columns}", cfg.disc_mode)
    _check("svg", isinstance(cfg.svg, bool), "svg must be true or false", cfg.svg)
    if cfg.demands is not None:
        _check("demands", len(cfg.demands) > 0 and min(cfg.demands) > 0, "demands > 0", cfg.demands)
    if command == "probbound":
        _check("beta", cfg.beta > 0, "beta > 0", cfg.beta)
        _check("gamma", cfg.gamma >= 0, "gamma >= 0", cfg.gamma)
    return cfg


def parse_config(argv: Optional[Sequence[str]] = None, environ: Optional[Dict[str, str]] = None) -> RunConfig:
    """Build a RunConfig from defaults, $LOADSTAB_SEED, --config and flags.

    Later sources override earlier ones: defaults < environment seed < config
    file < command-line flags.

    Raises:
        UsageError: On unknown keys, missing required fields or out-of-range
            values; the message names the key and the violated constraint

    Examples:
        >>> parse_config(["generate", "--lambda", "100", "--seed", "1"]).intensity
        100.0
    """
    args = build_parser().parse_args(argv)
    environ = os.environ if environ is None else environ
    values: Dict[str, Any] = {}

    if environ.get(SEED_ENV):
        try:
            values["seed"] = int(environ[SEED_ENV])
        except ValueError:
            raise UsageError(SEED_ENV, "must be a non-negative integer", environ[SEED_ENV]) from None
    if args.config:
        values.update(_read_config_file(args.config))
    for name in FIELDS:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = flag_value
    return _validate(values)


def _write_json(path: Path, data: Any) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")


class LoadStabilityWorkbench:
    """
    Runs one configured command and writes its output files.
    """

    def __init__(self, config: RunConfig):
        """Initialize the workbench and create the output directory."""
        self.config = config
        self.out_dir = Path(config.out)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.written: List[Path] = []

    def _path(self, name: str) -> Path:
        path = self.out_dir / name
        self.written.append(path)
        return path

    def load_network(self) -> Network:
        return Network.load_json(self.config.input)

    def generate(self) -> Network:
        """Sample node positions and connect them by the percolation rule."""
        cfg = self.config
        window = Window(*cfg.window)
        if cfg.process == "ppp":
            process = PointProcessFactory.create("ppp", intensity=cfg.intensity)
        else:
            process = PointProcessFactory.create(cfg.process, parent_intensity=cfg.parent_intensity,
                                                 cluster_radius=cfg.cluster_radius,
                                                 mean_daughters=cfg.mean_daughters)
        points = process.generate(window, derive_seed(cfg.seed, "sample"))
        wired = connect_rgg(points, ConnectivityParams(cfg.R, cfg.P), derive_seed(cfg.seed, "connect"))
        network = Network(wired.adjacency, positions=wired.positions, seed=cfg.seed, generator=wired.generator)
        network.save_json(self._path("network.json"))
        if cfg.svg:
            plot_network_svg(network, self._path("network.svg"))
        print(f"✓ Generated {network}")
        return network

    def spectrum(self) -> float:
        """Eigenvalues and Gershgorin discs of the Laplacian (or the Jacobian)."""
        cfg = self.config
        network = self.load_network()
        M = in_laplacian(network)
        if cfg.matrix == "jacobian":
            M = assemble_jacobian(JacobianSpec(cfg.self_slope, cfg.gamma, M))
        spec = eigenvalues(M)
        discs = gershgorin_discs(M, cfg.disc_mode)
        spec.to_csv(self._path("eigenvalues.csv"))
        export_discs_csv(discs, self._path("gershgorin.csv"), cfg.disc_mode)
        if cfg.svg:
            plot_spectrum_svg(spec, discs, self._path("spectrum.svg"),
                              title=f"{cfg.matrix} eigenvalues ({network.n} nodes)")
        abscissa = spectral_abscissa(spec)
        print(f"✓ {cfg.matrix} spectrum: {len(spec)} eigenvalues, max Re = {abscissa:.6g}")
        return abscissa

    def classify(self) -> Dict[str, Any]:
        cfg = self.config
        network = self.load_network()
        verdict = classify_network(network, cfg.self_slope, cfg.gamma)
        data = verdict.to_dict()
        if cfg.self_slope < 0:
            threshold = critical_gamma(cfg.self_slope, verdict.evidence["rho"])
            data["evidence"]["critical_abs_gamma"] = None if math.isinf(threshold) else threshold
        _write_json(self._path("verdict.json"), data)
        print(f"✓ Verdict: {verdict.outcome.value} ({verdict.scenario.value})")
        return data

    def simulate(self) -> Dict[str, Any]:
        cfg = self.config
        network = self.load_network()
        n = network.n
        if cfg.initial:
            l0 = load_initial_condition(cfg.initial)
        else:
            l0 = substream(cfg.seed, "initial").uniform(0.5, 1.5, size=n)
        if cfg.family == "capacity":
            demands = np.ones(n) if cfg.demands is None else np.array(cfg.demands)
            spec = CapacityTransformedDynamics(cfg.beta, cfg.gamma, demands)
            spec.check_network(network)
            x0 = l0 if cfg.initial else spec.from_load(l0)
        else:
            spec = LinearLoadDynamics(cfg.beta, cfg.gamma)
            x0 = l0
        report = find_uniform_equilibrium(spec, network)
        traj = simulate(spec, network, x0, cfg.t_end, cfg.dt, cfg.record_every)
        rate = estimate_contraction_rate(traj, report.equilibrium, floor=DEVIATION_FLOOR)
        traj.to_csv(self._path("trajectory.csv"))
        summary = {
            "dynamics": spec.describe(),
            "equilibrium": report.to_dict(),
            "contraction_rate": rate,
            "dt": cfg.dt,
            "t_end": cfg.t_end,
            "samples": len(traj),
            "final_deviation": float(np.max(np.abs(traj.final_state - report.equilibrium))),
        }
        _write_json(self._path("contraction.json"), summary)
        print(f"✓ Simulated {spec.family} to t={cfg.t_end:g}: contraction rate {rate:.6g}")
        return summary

    def probbound(self) -> Dict[str, Any]:
        cfg = self.config
        network = self.load_network()
        bound = stability_lower_bound(network, cfg.beta, cfg.b, cfg.gamma, cfg.c)
        if cfg.trials > 0:
            estimate = mc_stability_probability(network, cfg.beta, cfg.gamma, NoiseModel(cfg.b, cfg.c),
                                                cfg.trials, derive_seed(cfg.seed, "mc"), workers=cfg.workers)
            bound = bound.with_mc(estimate)
        data = bound.to_dict()
        data["seed"] = cfg.seed
        _write_json(self._path("bound.json"), data)
        print(f"✓ Stability lower bound {bound.lower_bound:.6g}"
              + (f", Monte Carlo {bound.mc_estimate.estimate:.4f}" if bound.mc_estimate else ""))
        return data

    def execute(self) -> List[Path]:
        """Run the configured command and return the files written."""
        getattr(self, self.config.command)()
        for path in self.written:
            print(f"✓ Wrote {path}")
        return list(self.written)


def execute(config: RunConfig) -> int:
    """Run one command; return 0 on success or the error's exit code."""
    try:
        LoadStabilityWorkbench(config).execute()
    except LoadStabError as e:
        logger.debug("command %s failed", config.command, exc_info=True)
        print(f"❌ {e.category} error: {e}")
        return e.exit_code
    return 0


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stdout, level=level,
                        format="%(asctime)s - %(levelname)s - %(message)s")
    logging.getLogger().setLevel(level)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point."""
    try:
        config = parse_config(argv)
    except UsageError as e:
        print(f"❌ usage error: {e}")
        return e.exit_code
    configure_logging(config.verbosity)
    return execute(config)


if __name__ == "__main__":
    sys.exit(main())
