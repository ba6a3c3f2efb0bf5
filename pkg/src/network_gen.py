"""
Network Generation Module

Spatial base-station layouts and the load-sharing networks built on them:

- Abstract base class for point processes (AbstractPointProcess)
- Poisson Point Process, Matérn and Thomas cluster processes
- Percolation connectivity: pairs within distance R are linked with probability P

Every sampler is a pure function of its parameters and an integer seed. The
seed is expanded into named substreams ('ppp', 'matern', 'thomas', 'connect'), so one
master seed reproduces the same layout and the same network on every platform.

Cluster parents are drawn on the window dilated by the cluster reach and only
daughters that land inside the window are kept, which makes the clipped
pattern stationary inside the window (mean count λ_p·area·μ_d).
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import DataError, ParameterError
from .graph_core import Network
from .utils import check_seed, require_non_negative, require_positive, substream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangular observation window.

    Raises:
        ParameterError: If a bound is non-finite or the window has zero area

    Examples:
        >>> Window(0.0, 2.0, 0.0, 0.5).area
        1.0
    """

    x_min: float = 0.0
    x_max: float = 1.0
    y_min: float = 0.0
    y_max: float = 1.0

    def __post_init__(self):
        bounds = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not all(isinstance(b, (int, float)) and math.isfinite(b) for b in bounds):
            raise ParameterError(f"window bounds must be finite reals, got {bounds}")
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ParameterError(f"window must have x_max > x_min and y_max > y_min, got {bounds}")

    @property
    def area(self) -> float:
        """float: Window area."""
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    @property
    def diagonal(self) -> float:
        """float: Length of the window diagonal."""
        return math.hypot(self.x_max - self.x_min, self.y_max - self.y_min)

    def dilated(self, margin: float) -> "Window":
        """Return the window grown by margin on every side."""
        return Window(self.x_min - margin, self.x_max + margin,
                      self.y_min - margin, self.y_max + margin)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of the points (k×2 array) lying inside the closed window."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return ((pts[:, 0] >= self.x_min) & (pts[:, 0] <= self.x_max)
                & (pts[:, 1] >= self.y_min) & (pts[:, 1] <= self.y_max))

    def uniform(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw count i.i.d. uniform points in the window."""
        return rng.uniform(low=(self.x_min, self.y_min), high=(self.x_max, self.y_max),
                           size=(count, 2))

    def to_dict(self) -> Dict[str, float]:
        return {"x_min": self.x_min, "x_max": self.x_max, "y_min": self.y_min, "y_max": self.y_max}


@dataclass(frozen=True)
class PppParams:
    """Poisson Point Process parameters (intensity λ, nodes per unit area)."""

    intensity: float

    def __post_init__(self):
        require_positive("intensity λ", self.intensity)


@dataclass(frozen=True)
class PcpParams:
    """Poisson Cluster Process parameters.

    Attributes:
        parent_intensity (float): λ_p, parents per unit area
        cluster_radius (float): R_c, disc radius (Matérn) or Gaussian σ (Thomas)
        mean_daughters (float): μ_d, mean daughters per parent
        process (str): 'matern' (uniform in disc) or 'thomas' (Gaussian)
        edge_correction (bool): Draw parents on the dilated window
    """

    parent_intensity: float
    cluster_radius: float
    mean_daughters: float
    process: str = "matern"
    edge_correction: bool = True

    def __post_init__(self):
        require_positive("parent intensity λ_p", self.parent_intensity)
        require_positive("cluster radius R_c", self.cluster_radius)
        require_positive("mean daughters μ_d", self.mean_daughters)
        if self.process not in ("matern", "thomas"):
            raise ParameterError(f"process must be 'matern' or 'thomas', got {self.process!r}")


@dataclass(frozen=True)
class ConnectivityParams:
    """Percolation connectivity: radius R >= 0 and link probability P ∈ [0,1]."""

    R: float
    P: float = 1.0

    def __post_init__(self):
        require_non_negative("R", self.R)
        if not isinstance(self.P, (int, float)) or not (0.0 <= self.P <= 1.0):
            raise ParameterError(f"P ∈ [0,1] required, got {self.P!r}")


@dataclass(frozen=True, eq=False)
class PointSet:
    """Sampled node positions.

    Attributes:
        points (np.ndarray): k×2 coordinates, all inside window
        window (Window): Observation window
        seed (int): Seed the sample was drawn with
        parents (np.ndarray | None): Cluster centres for cluster processes
        generator (dict): Process name and parameters
    """

    points: np.ndarray
    window: Window
    seed: int
    parents: Optional[np.ndarray] = None
    generator: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def to_list(self) -> List[List[float]]:
        return [[float(x), float(y)] for x, y in self.points]


class AbstractPointProcess(ABC):
    """Abstract base class for spatial point processes.

    Subclasses implement sample() and expected_count(); the shared
    generate() template validates the seed and logs the draw.
    """

    def __init__(self, name: str):
        if not name.strip():
            raise ParameterError("point process name cannot be empty")
        self._name = name

    @property
    def name(self) -> str:
        """str: Process name used in generator records."""
        return self._name

    @abstractmethod
    def sample(self, window: Window, rng: np.random.Generator, seed: int) -> PointSet:
        """Draw one realisation inside window from rng."""

    @abstractmethod
    def expected_count(self, window: Window) -> float:
        """Mean number of points falling inside window."""

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Generator description recorded in output files."""

    def generate(self, window: Window, seed: int) -> PointSet:
        """Template method: derive the process substream and sample."""
        seed = check_seed(seed)
        points = self.sample(window, substream(seed, self._name), seed)
        logger.debug("%s seed=%d drew %d points (expected %.3f)",
                     self._name, seed, len(points), self.expected_count(window))
        return points

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.describe()})"


class PoissonPointProcess(AbstractPointProcess):
    """Homogeneous PPP: Poisson(λ·area) points, i.i.d. uniform on the window."""

    def __init__(self, params: PppParams):
        super().__init__("ppp")
        self._params = params

    def sample(self, window: Window, rng: np.random.Generator, seed: int) -> PointSet:
        count = int(rng.poisson(self._params.intensity * window.area))
        return PointSet(window.uniform(rng, count), window, seed, generator=self.describe())

    def expected_count(self, window: Window) -> float:
        return self._params.intensity * window.area

    def describe(self) -> Dict[str, Any]:
        return {"process": "ppp", "intensity": self._params.intensity}


class _ClusterProcess(AbstractPointProcess):
    """Shared parent/daughter mechanics of Neyman-Scott cluster processes."""

    def __init__(self, name: str, params: PcpParams):
        super().__init__(name)
        self._params = params

    @property
    @abstractmethod
    def reach(self) -> float:
        """Distance beyond which daughters are (practically) never placed."""

    @abstractmethod
    def _offsets(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Daughter displacements relative to their parent."""

    def sample(self, window: Window, rng: np.random.Generator, seed: int) -> PointSet:
        parent_window = window.dilated(self.reach) if self._params.edge_correction else window
        n_parents = int(rng.poisson(self._params.parent_intensity * parent_window.area))
        parents = parent_window.uniform(rng, n_parents)
        counts = rng.poisson(self._params.mean_daughters, size=n_parents)
        owners = np.repeat(np.arange(n_parents), counts)
        daughters = parents[owners] + self._offsets(rng, int(counts.sum()))
        kept = daughters[window.contains(daughters)]
        return PointSet(kept, window, seed, parents=parents, generator=self.describe())

    def expected_count(self, window: Window) -> float:
        return self._params.parent_intensity * window.area * self._params.mean_daughters

    def describe(self) -> Dict[str, Any]:
        return {
            "process": self._name,
            "parent_intensity": self._params.parent_intensity,
            "cluster_radius": self._params.cluster_radius,
            "mean_daughters": self._params.mean_daughters,
            "edge_correction": self._params.edge_correction,
        }


class MaternClusterProcess(_ClusterProcess):
    """Matérn cluster process: daughters uniform in the disc of radius R_c."""

    def __init__(self, params: PcpParams):
        super().__init__("matern", params)

    @property
    def reach(self) -> float:
        return self._params.cluster_radius

    def _offsets(self, rng: np.random.Generator, count: int) -> np.ndarray:
        # sqrt of a uniform radius fraction gives area-uniform points
        radius = self._params.cluster_radius * np.sqrt(rng.random(count))
        theta = 2.0 * np.pi * rng.random(count)
        return np.column_stack((radius * np.cos(theta), radius * np.sin(theta)))


class ThomasClusterProcess(_ClusterProcess):
    """Thomas cluster process: daughters Gaussian around the parent, σ = R_c."""

    def __init__(self, params: PcpParams):
        super().__init__("thomas", params)

    @property
    def reach(self) -> float:
        return 4.0 * self._params.cluster_radius

    def _offsets(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.normal(0.0, self._params.cluster_radius, size=(count, 2))


class PointProcessFactory:
    """Factory for creating point processes by name."""

    @staticmethod
    def create(process: str, **kwargs) -> AbstractPointProcess:
        """Create a point process.

        Args:
            process (str): 'ppp', 'matern' or 'thomas'
            **kwargs: intensity for 'ppp'; parent_intensity, cluster_radius,
                mean_daughters (and optionally edge_correction) otherwise

        Raises:
            ParameterError: For an unknown process name

        Examples:
            >>> PointProcessFactory.create("ppp", intensity=10.0).name
            'ppp'
        """
        if process == "ppp":
            return PoissonPointProcess(PppParams(**kwargs))
        if process == "matern":
            return MaternClusterProcess(PcpParams(process="matern", **kwargs))
        if process == "thomas":
            return ThomasClusterProcess(PcpParams(process="thomas", **kwargs))
        raise ParameterError(f"Unknown point process: {process!r}")

    @staticmethod
    def get_supported_types() -> List[str]:
        return ["ppp", "matern", "thomas"]


def sample_ppp(params: PppParams, window: Window, seed: int) -> PointSet:
    """Sample a homogeneous Poisson Point Process on window.

    Examples:
        >>> ps = sample_ppp(PppParams(50.0), Window(), seed=7)
        >>> ps.to_list() == sample_ppp(PppParams(50.0), Window(), seed=7).to_list()
        True
    """
    return PoissonPointProcess(params).generate(window, seed)


def sample_pcp(params: PcpParams, window: Window, seed: int) -> PointSet:
    """Sample a Poisson Cluster Process (Matérn by default, Thomas on request)."""
    if params.process == "thomas":
        return ThomasClusterProcess(params).generate(window, seed)
    return MaternClusterProcess(params).generate(window, seed)


def connect_rgg(points: PointSet, conn: ConnectivityParams, seed: int) -> Network:
    """Connect nodes by the percolation rule.

    Every unordered pair at Euclidean distance <= R becomes a symmetric pair of
    unit-weight directed edges with independent probability P.

    Args:
        points (PointSet): Node layout (non-empty)
        conn (ConnectivityParams): Radius R and probability P
        seed (int): Seed of the 'connect' substream

    Returns:
        Network: Symmetric, zero-diagonal, unit-weight network with positions

    Raises:
        DataError: If points is empty
    """
    seed = check_seed(seed)
    n = len(points)
    if n == 0:
        raise DataError("cannot connect an empty point set")
    A = np.zeros((n, n))
    if conn.R > 0 and n > 1:
        pairs = cKDTree(points.points).query_pairs(conn.R, output_type="ndarray")
        if len(pairs):
            pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
            keep = substream(seed, "connect").random(len(pairs)) < conn.P
            pairs = pairs[keep]
            A[pairs[:, 0], pairs[:, 1]] = 1.0
            A[pairs[:, 1], pairs[:, 0]] = 1.0
    generator = dict(points.generator)
    generator.update({"R": conn.R, "P": conn.P, "window": points.window.to_dict(),
                      "sample_seed": points.seed, "connect_seed": seed})
    network = Network(A, positions=points.points, generator=generator)
    logger.debug("connect_rgg n=%d R=%g P=%g -> %d directed edges", n, conn.R, conn.P, network.edge_count)
    return network
