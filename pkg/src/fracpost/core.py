"""Problem definition, meshes, run configuration and validation."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration; ``violations`` lists (field, observed value, message)."""

    def __init__(self, message: str, violations: Optional[list] = None):
        super().__init__(message)
        self.violations = violations or []


@dataclass(frozen=True)
class ProblemSpec:
    """Time-fractional diffusion problem on (0,1) x (0,T] with zero Dirichlet data.

    ``source`` is f(x, t) and ``exact`` (optional) is u(x, t); both must accept
    numpy arrays for x.  ``diffusion`` is A(x) > 0.  ``diffusion_prime`` is
    optional; when absent A' is obtained by central differences.
    """

    alpha: float
    T: float
    diffusion: Callable
    source: Callable
    initial: Callable
    exact: Optional[Callable] = None
    theta: float = math.pi / 4
    diffusion_prime: Optional[Callable] = None
    name: str = "custom"


@dataclass(frozen=True)
class TimeMesh:
    nodes: np.ndarray
    grading: float = 1.0

    @property
    def N(self) -> int:
        return len(self.nodes) - 1

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def T(self) -> float:
        return float(self.nodes[-1])


@dataclass(frozen=True)
class SpaceMesh:
    coords: np.ndarray

    @property
    def M(self) -> int:
        return len(self.coords) - 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.coords)

    @property
    def interior_count(self) -> int:
        return self.M - 1


EXAMPLE_IDS = ("smooth", "nonsmooth", "custom")
_OUTPUT_FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    """Sweep configuration.  ``alpha`` and ``theta`` extend the base field set
    because a sweep cannot run without them."""

    example_id: str = "smooth"
    N_list: tuple = (16, 32, 64, 128)
    M: int = 512
    grading_mode: object = "uniform"  # "uniform" | "auto" | float r >= 1
    output: dict = field(default_factory=lambda: {"format": "csv", "path": None})
    constants_convention: str = "unit"
    alpha: tuple = (0.25, 0.5, 0.75)
    theta: float = math.pi / 4
    T: float = 1.0

    def __post_init__(self):
        v = []
        if self.example_id not in EXAMPLE_IDS:
            v.append(("example_id", self.example_id, "unknown example"))
        if len(self.N_list) == 0:
            v.append(("N_list", self.N_list, "N_list empty"))
        for N in self.N_list:
            if not isinstance(N, (int, np.integer)) or N < 2:
                v.append(("N_list", N, "each N must be an integer >= 2"))
        if not isinstance(self.M, (int, np.integer)) or self.M < 2:
            v.append(("M", self.M, "M must be an integer >= 2"))
        gm = self.grading_mode
        if isinstance(gm, str):
            if gm not in ("uniform", "auto"):
                v.append(("grading_mode", gm, "expected uniform, auto or a number >= 1"))
        elif not (isinstance(gm, (int, float)) and gm >= 1):
            v.append(("grading_mode", gm, "explicit grading exponent must be >= 1"))
        fmt = (self.output or {}).get("format", "csv")
        if fmt not in _OUTPUT_FORMATS:
            v.append(("output", fmt, "format must be csv or json"))
        if self.constants_convention != "unit":
            v.append(("constants_convention", self.constants_convention, "only 'unit' is supported"))
        for a in self.alpha:
            if not 0 < a < 1:
                v.append(("alpha", a, "alpha out of (0,1)"))
        if not 0 < self.theta < math.pi / 2:
            v.append(("theta", self.theta, "theta out of (0,pi/2)"))
        if not self.T > 0:
            v.append(("T", self.T, "T must be positive"))
        if v:
            raise ConfigError("; ".join(f"{f}={o!r}: {m}" for f, o, m in v), v)


def load_run_config(source) -> RunConfig:
    """Parse a RunConfig from a JSON string, path or dict; unknown keys are rejected."""
    if isinstance(source, dict):
        data = dict(source)
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            with open(text) as fh:
                text = fh.read()
        data = json.loads(text)
    allowed = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown RunConfig keys: {unknown}",
                          [(k, data[k], "unknown key") for k in unknown])
    for key in ("N_list", "alpha"):
        if key in data:
            data[key] = tuple(data[key]) if isinstance(data[key], (list, tuple)) else (data[key],)
    return RunConfig(**data)


def auto_grading(alpha: float) -> float:
    if not 0 < alpha < 1:
        raise ConfigError(f"alpha out of (0,1): {alpha}", [("alpha", alpha, "alpha out of (0,1)")])
    return max((2 - alpha) / alpha, 1.0)


def make_graded_time_mesh(T: float, N: int, r: float = 1.0) -> TimeMesh:
    if not T > 0:
        raise ConfigError(f"T must be positive, got {T}", [("T", T, "nonpositive")])
    if int(N) != N or N < 1:
        raise ConfigError(f"N must be a positive integer, got {N}", [("N", N, "nonpositive")])
    if not r >= 1:
        raise ConfigError(f"grading exponent must be >= 1, got {r}", [("r", r, "r < 1")])
    N = int(N)
    nodes = T * (np.arange(N + 1) / N) ** r
    nodes[0], nodes[-1] = 0.0, T
    return TimeMesh(nodes=nodes, grading=float(r))


def make_uniform_space_mesh(M: int) -> SpaceMesh:
    if int(M) != M or M < 2:
        raise ConfigError(f"M must be an integer >= 2, got {M}", [("M", M, "M < 2")])
    return SpaceMesh(coords=np.linspace(0.0, 1.0, int(M) + 1))


def validate(spec: ProblemSpec, cfg: Optional[RunConfig] = None, n_samples: int = 257) -> list:
    """Return a list of (field, observed, message) violations; empty when valid."""
    v = []
    if not 0 < spec.alpha < 1:
        v.append(("alpha", spec.alpha, "alpha out of (0,1)"))
    if not spec.T > 0:
        v.append(("T", spec.T, "T must be positive"))
    if not 0 < spec.theta < math.pi / 2:
        v.append(("theta", spec.theta, "theta out of (0,pi/2)"))
    xs = np.linspace(0.0, 1.0, n_samples)
    A = np.broadcast_to(np.asarray(spec.diffusion(xs), dtype=float), xs.shape)
    if not np.all(A > 0):
        v.append(("diffusion", float(A.min()), "coercivity violated"))
    u0 = np.asarray(spec.initial(np.array([0.0, 1.0])), dtype=float)
    u0 = np.broadcast_to(u0, (2,))
    if np.max(np.abs(u0)) > 1e-12:
        v.append(("initial", tuple(u0), "boundary compatibility u0(0)=u0(1)=0 violated"))
    return v


def check(spec: ProblemSpec, cfg: Optional[RunConfig] = None) -> ProblemSpec:
    """Raise ConfigError listing every violation, else return ``spec``."""
    v = validate(spec, cfg)
    if v:
        raise ConfigError("; ".join(f"{f}={o!r}: {m}" for f, o, m in v), v)
    return spec
