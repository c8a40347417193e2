"""
Experiment configuration
Loads an experiment file (YAML, JSON accepted) into typed sections and checks
everything that can be checked before any numerics run.
"""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import yaml

from .errors import ConfigError
from .pde import SYSTEMS, EvolutionConfig
from .scattering import INITIAL_DATA, GridSpec1D

logger = logging.getLogger(__name__)

REQUIRED_SECTIONS = ("initial_datum", "model", "spectral_grid", "spatial_grid")


@dataclass
class InitialDatumSpec:
    expression: Optional[str] = None
    params: Dict[str, float] = field(default_factory=dict)
    csv: Optional[Path] = None


@dataclass
class ModelSpec:
    alpha: float
    beta: float
    kappa: int


@dataclass
class SpectralGridSpec:
    z_min: float
    z_max: float
    n: int
    x_match: float = 0.0

    @property
    def zgrid(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.n)


@dataclass
class EvaluationSpec:
    """Either rays (ξ list × t list) or explicit (x, t) points."""

    xi: List[float] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    points: List[Tuple[float, float]] = field(default_factory=list)

    def rays(self) -> Dict[float, List[float]]:
        """Group every requested evaluation by its ray ξ = x/t."""
        grouped: Dict[float, List[float]] = {xi: list(self.times) for xi in self.xi}
        for x, t in self.points:
            grouped.setdefault(x / t, []).append(t)
        return {xi: sorted(ts) for xi, ts in grouped.items()}


@dataclass
class ExperimentConfig:
    name: str
    initial_datum: InitialDatumSpec
    model: ModelSpec
    spectral_grid: SpectralGridSpec
    spatial_grid: GridSpec1D
    evolution: Optional[EvolutionConfig]
    evaluation: EvaluationSpec
    output_dir: Path
    strict_paper_constants: bool = True
    seed: int = 0
    scattering_csv: Optional[Path] = None
    source: Optional[Path] = None

    def with_overrides(self, output_dir: str = None, seed: int = None) -> "ExperimentConfig":
        if output_dir is not None:
            self.output_dir = Path(output_dir)
        if seed is not None:
            self.seed = int(seed)
        return self


def _section(raw: Dict, name: str) -> Dict:
    value = raw.get(name)
    if value is None:
        raise ConfigError(f"Missing config section '{name}'")
    if not isinstance(value, dict):
        raise ConfigError(f"Config section '{name}' must be a mapping")
    return value


def _number(section: Dict, key: str, where: str, kind=float, default=None):
    if key not in section:
        if default is not None:
            return default
        raise ConfigError(f"Missing field '{where}.{key}'")
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"Field '{where}.{key}' must be numeric, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise ConfigError(f"Field '{where}.{key}' must be an integer, got {value!r}")
        return int(value)
    return float(value)


def _resolve(path: str, base: Path) -> Path:
    candidate = Path(path)
    if not candidate.is_absolute():
        candidate = base / candidate
    if not candidate.exists():
        raise ConfigError(f"Referenced file not found: {candidate}")
    return candidate


def _initial_datum(raw: Dict, base: Path) -> InitialDatumSpec:
    section = _section(raw, "initial_datum")
    if section.get("csv"):
        return InitialDatumSpec(csv=_resolve(section["csv"], base))
    expression = section.get("expression")
    if expression not in INITIAL_DATA:
        raise ConfigError(f"initial_datum.expression must be one of {sorted(INITIAL_DATA)}, got {expression!r}")
    params = section.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError("initial_datum.params must be a mapping")
    return InitialDatumSpec(expression=expression, params=params)


def _evaluation(raw: Dict) -> EvaluationSpec:
    section = raw.get("evaluation") or {}
    xi = section.get("xi", [])
    xi = [xi] if isinstance(xi, (int, float)) else list(xi)
    times = [float(t) for t in section.get("t", [])]
    points = [(float(x), float(t)) for x, t in section.get("points", [])]
    if xi and not times:
        raise ConfigError("evaluation.xi given without evaluation.t")
    if any(t <= 0 for t in times) or any(t <= 0 for _, t in points):
        raise ConfigError("Evaluation times must be positive")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError("evaluation.t must be strictly increasing")
    return EvaluationSpec([float(v) for v in xi], times, points)


def _check_rays(model: ModelSpec, evaluation: EvaluationSpec):
    for xi in evaluation.rays():
        if model.alpha ** 2 - 3 * model.beta * xi <= 0:
            raise ConfigError(
                f"Ray xi={xi:.6g} has no separated stationary points "
                f"(alpha^2 - 3*beta*xi = {model.alpha ** 2 - 3 * model.beta * xi:.6g})"
            )


def parse_config(raw: Dict, base: Path = Path(".")) -> ExperimentConfig:
    """Build an ExperimentConfig from an already-parsed mapping."""
    if not isinstance(raw, dict):
        raise ConfigError("Experiment file must contain a mapping at top level")
    for name in REQUIRED_SECTIONS:
        _section(raw, name)

    model_raw = raw["model"]
    model = ModelSpec(
        alpha=_number(model_raw, "alpha", "model"),
        beta=_number(model_raw, "beta", "model"),
        kappa=_number(model_raw, "kappa", "model", kind=int),
    )
    if model.kappa not in (1, -1):
        raise ConfigError(f"model.kappa must be +1 or -1, got {model.kappa}")

    spectral_raw = raw["spectral_grid"]
    spectral = SpectralGridSpec(
        z_min=_number(spectral_raw, "z_min", "spectral_grid"),
        z_max=_number(spectral_raw, "z_max", "spectral_grid"),
        n=_number(spectral_raw, "n", "spectral_grid", kind=int),
        x_match=_number(spectral_raw, "x_match", "spectral_grid", default=0.0),
    )
    if spectral.n < 2 or spectral.z_max <= spectral.z_min:
        raise ConfigError("spectral_grid needs n >= 2 and z_max > z_min")

    spatial_raw = raw["spatial_grid"]
    grid = GridSpec1D.symmetric(
        _number(spatial_raw, "x_max", "spatial_grid"),
        _number(spatial_raw, "n", "spatial_grid", kind=int),
    )

    evolution = None
    if raw.get("evolution"):
        ev = _section(raw, "evolution")
        system = ev.get("system", "nonlocal")
        if system not in SYSTEMS:
            raise ConfigError(f"evolution.system must be one of {SYSTEMS}, got {system!r}")
        evolution = EvolutionConfig(
            grid=grid,
            dt=_number(ev, "dt", "evolution"),
            t_end=_number(ev, "t_end", "evolution"),
            alpha=model.alpha,
            beta=model.beta,
            kappa=model.kappa,
            dealias=_number(ev, "dealias", "evolution", default=2.0 / 3.0),
            system=system,
            support_threshold=_number(ev, "support_threshold", "evolution", default=1e-2),
        )

    evaluation = _evaluation(raw)
    _check_rays(model, evaluation)
    if evolution is not None and evaluation.times and max(evaluation.times) > evolution.t_end:
        raise ConfigError("evaluation.t extends beyond evolution.t_end")

    strict = raw.get("strict_paper_constants", True)
    if not isinstance(strict, bool):
        raise ConfigError("strict_paper_constants must be true or false")

    scattering_csv = _resolve(raw["scattering_csv"], base) if raw.get("scattering_csv") else None
    experiment = raw.get("experiment") or {}

    return ExperimentConfig(
        name=str(experiment.get("name", "experiment")),
        initial_datum=_initial_datum(raw, base),
        model=model,
        spectral_grid=spectral,
        spatial_grid=grid,
        evolution=evolution,
        evaluation=evaluation,
        output_dir=Path(raw.get("output_dir", "output")),
        strict_paper_constants=strict,
        seed=_number(raw, "seed", "config", kind=int, default=0),
        scattering_csv=scattering_csv,
    )


def load_config(path) -> ExperimentConfig:
    """
    Read and validate an experiment file.

    Args:
        path: YAML or JSON experiment file

    Returns:
        ExperimentConfig with paths resolved relative to the file
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Could not parse {path}: {e}")

    config = parse_config(raw, path.parent)
    config.source = path
    logger.info(f"Loaded experiment '{config.name}' from {path}")
    return config


def worker_count() -> int:
    """Thread cap from NH_THREADS, defaulting to the CPU count."""
    value = os.getenv("NH_THREADS")
    if value is None:
        return os.cpu_count() or 1
    try:
        count = int(value)
    except ValueError:
        raise ConfigError(f"NH_THREADS must be an integer, got {value!r}")
    if count < 1:
        raise ConfigError(f"NH_THREADS must be positive, got {count}")
    return count
