"""Experiment configuration: TOML ingestion and total validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

import numpy as np

from ..forward import MediumScatterer
from ..geometry import AdmissibilityBounds, ConvexPolygon, GeometryError, polygon_from_list, square
from ..material import (
    IncidentWave,
    LameParameters,
    ParameterError,
    WaveContext,
    density_from_spec,
    plane_wave,
    wavenumbers,
)

KINDS = ("stability", "corner", "betti", "verify", "solve", "farfield")


class ConfigError(ValueError):
    """Invalid configuration; ``violations`` lists ``(field, message)`` pairs."""

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = violations
        super().__init__("; ".join(f"{k}: {m}" for k, m in violations))


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    lam: float = 1.0
    mu: float = 1.0
    omega: float = 2 * math.pi
    alpha1: complex = 1.0
    alpha2: complex = 0.0
    incident_angle: float = 0.0
    polygon: list = field(default_factory=lambda: square(1.0).vertices.tolist())
    density: dict = field(default_factory=lambda: {"kind": "constant", "contrast": 0.5})
    cell_size: float = 1 / 20
    bbox: list | None = None
    directions: int = 64
    sweep: dict = field(default_factory=dict)
    admissibility: dict = field(default_factory=lambda: {"alpha_m": math.pi / 10, "alpha_M": 5 * math.pi / 12, "l0": 0.2, "eps0": 0.05})
    output_dir: str = "out"
    raw: dict = field(default_factory=dict)

    # builders -------------------------------------------------------------
    @property
    def params(self) -> LameParameters:
        return LameParameters(self.lam, self.mu)

    @property
    def context(self) -> WaveContext:
        return wavenumbers(self.params, self.omega)

    @property
    def wave(self) -> IncidentWave:
        return plane_wave(self.context, self.alpha1, self.alpha2, self.incident_angle)

    @property
    def support(self) -> ConvexPolygon:
        return polygon_from_list(self.polygon)

    @property
    def scatterer(self) -> MediumScatterer:
        P = self.support
        return MediumScatterer(P, density_from_spec(P, self.density))

    @property
    def bounds(self) -> AdmissibilityBounds:
        a = self.admissibility
        return AdmissibilityBounds(a["alpha_m"], a["alpha_M"], a["l0"], a["eps0"])

    def echo(self) -> dict:
        """Canonical, JSON-friendly view used in run manifests."""
        return {
            "kind": self.kind,
            "seed": self.seed,
            "material": {"lam": self.lam, "mu": self.mu},
            "wave": {
                "omega": self.omega,
                "alpha1": [complex(self.alpha1).real, complex(self.alpha1).imag],
                "alpha2": [complex(self.alpha2).real, complex(self.alpha2).imag],
                "angle": self.incident_angle,
            },
            "scatterer": {"polygon": self.polygon, "density": self.density},
            "grid": {"cell_size": self.cell_size, "bbox": self.bbox},
            "farfield": {"directions": self.directions},
            "sweep": self.sweep,
            "admissibility": self.admissibility,
        }


def _complex(v, name, errs):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    errs.append((name, "must be a number or a [re, im] pair"))
    return 0j


def _number(d, key, name, errs, default, positive=False):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        errs.append((name, f"must be a finite number, got {v!r}"))
        return default
    if positive and not v > 0:
        errs.append((name, f"must be positive, got {v!r}"))
        return default
    return float(v)


def _table(d, key, errs) -> dict:
    v = d.get(key, {})
    if not isinstance(v, dict):
        errs.append((key, "must be a table"))
        return {}
    return v


def config_from_dict(d: dict, kind: str | None = None, seed: int | None = None) -> ExperimentConfig:
    """Validate a parsed config; every problem is collected before raising."""
    errs: list[tuple[str, str]] = []
    if not isinstance(d, dict):
        raise ConfigError([("<root>", "config must be a table")])
    k = kind if kind is not None else d.get("kind")
    if k not in KINDS:
        errs.append(("kind", f"must be one of {KINDS}, got {k!r}"))
    s = d.get("seed", 0) if seed is None else seed
    if isinstance(s, bool) or not isinstance(s, int) or not 0 <= s < 2**64:
        errs.append(("seed", "must be an unsigned 64-bit integer"))
        s = 0
    mat, wav, sc, grid = _table(d, "material", errs), _table(d, "wave", errs), _table(d, "scatterer", errs), _table(d, "grid", errs)
    ff, sweep, adm, out = _table(d, "farfield", errs), _table(d, "sweep", errs), _table(d, "admissibility", errs), _table(d, "output", errs)

    cfg = ExperimentConfig(kind=k if k in KINDS else "verify", seed=int(s), raw=d)
    cfg.lam = _number(mat, "lam", "material.lam", errs, 1.0)
    cfg.mu = _number(mat, "mu", "material.mu", errs, 1.0)
    cfg.omega = _number(wav, "omega", "wave.omega", errs, 2 * math.pi, positive=True)
    cfg.alpha1 = _complex(wav.get("alpha1", 1.0), "wave.alpha1", errs)
    cfg.alpha2 = _complex(wav.get("alpha2", 0.0), "wave.alpha2", errs)
    cfg.incident_angle = _number(wav, "angle", "wave.angle", errs, 0.0)
    if "polygon" in sc:
        cfg.polygon = sc["polygon"]
    if "density" in sc:
        cfg.density = sc["density"]
    cfg.cell_size = _number(grid, "cell_size", "grid.cell_size", errs, 1 / 20, positive=True)
    cfg.bbox = grid.get("bbox")
    M = ff.get("directions", 64)
    if isinstance(M, bool) or not isinstance(M, int) or M < 8:
        errs.append(("farfield.directions", "must be an integer >= 8"))
    else:
        cfg.directions = M
    cfg.sweep = sweep
    cfg.admissibility = {**cfg.admissibility, **adm}
    cfg.output_dir = str(out.get("dir", "out"))

    # semantic checks through the module constructors
    try:
        cfg.params
    except ParameterError as e:
        errs.append(("material", str(e)))
    try:
        P = cfg.support
    except (GeometryError, ValueError, TypeError) as e:
        errs.append(("scatterer.polygon", str(e)))
        P = None
    if P is not None:
        try:
            density_from_spec(P, cfg.density)
        except (ParameterError, KeyError, TypeError, ValueError) as e:
            errs.append(("scatterer.density", f"invalid density spec: {e}"))
    if cfg.bbox is not None:
        b = cfg.bbox
        if not (isinstance(b, list) and len(b) == 4 and all(isinstance(t, (int, float)) for t in b) and b[0] < b[1] and b[2] < b[3]):
            errs.append(("grid.bbox", "must be [xmin, xmax, ymin, ymax]"))
    if not errs:
        try:
            cfg.wave
        except ParameterError as e:
            errs.append(("wave", str(e)))
    for key in ("alpha_m", "alpha_M", "l0", "eps0"):
        v = cfg.admissibility.get(key)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            errs.append((f"admissibility.{key}", "must be a positive number"))
    for key, val in sweep.items():
        if isinstance(val, list) and not all(isinstance(t, (int, float, str)) and not isinstance(t, bool) for t in val):
            errs.append((f"sweep.{key}", "list entries must be numbers or names"))
    if errs:
        raise ConfigError(errs)
    return cfg


def load_config(path: str | Path | None, kind: str | None = None, seed: int | None = None) -> ExperimentConfig:
    """Read a TOML file (``None`` gives the defaults for ``kind``)."""
    if path is None:
        return config_from_dict({}, kind=kind, seed=seed)
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError([("--config", f"cannot read {path}: {e}")]) from e
    try:
        d = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError([("--config", f"TOML parse error: {e}")]) from e
    return config_from_dict(d, kind=kind, seed=seed)


def sweep_list(cfg: ExperimentConfig, key: str, default) -> list:
    v = cfg.sweep.get(key, default)
    return list(v) if isinstance(v, (list, tuple)) else [v]


def as_array(v) -> np.ndarray:
    return np.asarray(v, dtype=float)
