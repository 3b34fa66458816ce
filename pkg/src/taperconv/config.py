"""Strict JSON run configuration.

Every section is optional; missing keys take the default calibration.
``resolve`` fills in every derived value (calibrated coupling, center
wavelength, ...) so the echoed document reparses to the same config.
"""
from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .dispersion import (
    CouplingSpec,
    DesignWavelengths,
    DispersionError,
    SyntheticDispersion,
    load_tabulated,
)
from .experiments import OBSERVABLES, SWEEP_PARAMETERS
from .profile import Cosine, Linear, ProfileError, Uniform, load_piecewise
from .propagation import PropagationSettings
from .spectrum import DEFAULT_POINTS, MIN_POINTS


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


_NUM = (int, float)


@dataclass(frozen=True)
class DispersionConfig:
    type: str = "synthetic"
    w0: float | None = None
    kappa_w: float | None = None
    dbeta_dlambda: float | None = None
    g_ref: float | None = None
    p_ref: float = 1.0
    g_slope: float = 0.0
    lambda1: float = 1550.0
    lambda2: float = 980.0
    lambda3_center: float | None = None
    path: str | None = None


@dataclass(frozen=True)
class ProfileConfig:
    type: str = "linear"
    w0: float | None = None
    delta_w: float = 4.0
    period: float | None = None
    path: str | None = None


@dataclass(frozen=True)
class SimulationConfig:
    length: float = 1000.0
    pump_power: float = 1.0
    lambda3: float | None = None
    step_count: int | None = None
    loss_alpha1: float = 0.0
    loss_alpha3: float = 0.0


@dataclass(frozen=True)
class SpectrumConfig:
    lambda_min: float | None = None
    lambda_max: float | None = None
    points: int = DEFAULT_POINTS


@dataclass(frozen=True)
class SweepConfig:
    parameter: str = "delta_w"
    values: tuple = (0.0, 2.0, 4.0, 8.0)
    observable: str = "eta_at_center"


@dataclass(frozen=True)
class RunConfig:
    dispersion: DispersionConfig = field(default_factory=DispersionConfig)
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    spectrum: SpectrumConfig = field(default_factory=SpectrumConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sweep"]["values"] = list(d["sweep"]["values"])
        return d

    def build_model(self):
        d = self.dispersion
        design = DesignWavelengths(d.lambda1, d.lambda2, d.lambda3_center)
        if d.type == "synthetic":
            return SyntheticDispersion(d.w0, d.kappa_w, d.dbeta_dlambda, d.g_ref, d.p_ref, d.g_slope, design)
        return load_tabulated(d.path, design=design, coupling=CouplingSpec(d.g_ref, d.p_ref, d.g_slope))

    def build_profile(self):
        p = self.profile
        if p.type == "uniform":
            return Uniform(p.w0)
        if p.type == "linear":
            return Linear(p.w0, p.delta_w, self.simulation.length)
        if p.type == "cosine":
            return Cosine(p.w0, p.delta_w, p.period)
        return load_piecewise(p.path)

    def build_settings(self) -> PropagationSettings:
        s = self.simulation
        return PropagationSettings(s.step_count, s.loss_alpha1, s.loss_alpha3)


_SECTIONS = {
    "dispersion": DispersionConfig,
    "profile": ProfileConfig,
    "simulation": SimulationConfig,
    "spectrum": SpectrumConfig,
    "sweep": SweepConfig,
}

_TYPES = {
    "dispersion.type": ("synthetic", "tabulated"),
    "profile.type": ("uniform", "linear", "cosine", "piecewise"),
    "sweep.parameter": tuple(SWEEP_PARAMETERS),
    "sweep.observable": OBSERVABLES,
}

_POSITIVE = {
    "dispersion.w0", "dispersion.kappa_w", "dispersion.dbeta_dlambda", "dispersion.p_ref",
    "dispersion.lambda1", "dispersion.lambda2", "dispersion.lambda3_center",
    "profile.w0", "profile.period", "simulation.length", "simulation.lambda3",
    "spectrum.lambda_min", "spectrum.lambda_max",
}
_NONNEGATIVE = {"dispersion.g_ref", "simulation.pump_power", "simulation.loss_alpha1", "simulation.loss_alpha3"}


def _check_value(path: str, value, default_field):
    annot = default_field.type
    if path in _TYPES:
        if value not in _TYPES[path]:
            raise ConfigError(path, f"must be one of {list(_TYPES[path])}, got {value!r}")
        return value
    if path in ("dispersion.path", "profile.path"):
        if value is not None and not isinstance(value, str):
            raise ConfigError(path, "must be a string")
        return value
    if path == "sweep.values":
        if not isinstance(value, list) or not value:
            raise ConfigError(path, "must be a non-empty list of numbers")
        for i, v in enumerate(value):
            if isinstance(v, bool) or not isinstance(v, _NUM):
                raise ConfigError(f"{path}[{i}]", f"expected a number, got {v!r}")
        return tuple(float(v) for v in value)
    if value is None:
        if "None" not in str(annot):
            raise ConfigError(path, "may not be null")
        return None
    if path in ("simulation.step_count", "spectrum.points"):
        if value == "auto" and path == "simulation.step_count":
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        minimum = 16 if path == "simulation.step_count" else MIN_POINTS
        if value < minimum:
            raise ConfigError(path, f"must be >= {minimum}")
        return value
    if isinstance(value, bool) or not isinstance(value, _NUM):
        raise ConfigError(path, f"expected a number, got {value!r}")
    value = float(value)
    if path in _POSITIVE and not value > 0:
        raise ConfigError(path, f"must be > 0, got {value}")
    if path in _NONNEGATIVE and value < 0:
        raise ConfigError(path, f"must be >= 0, got {value}")
    return value


def from_dict(doc) -> RunConfig:
    """Validate a parsed JSON document and return the fully resolved config."""
    if not isinstance(doc, dict):
        raise ConfigError("$", "top level must be a JSON object")
    sections = {}
    for name, value in doc.items():
        if name not in _SECTIONS:
            raise ConfigError(name, "unknown key")
        if not isinstance(value, dict):
            raise ConfigError(name, "must be a JSON object")
        cls = _SECTIONS[name]
        fields = cls.__dataclass_fields__
        kwargs = {}
        for key, v in value.items():
            if key not in fields:
                raise ConfigError(f"{name}.{key}", "unknown key")
            kwargs[key] = _check_value(f"{name}.{key}", v, fields[key])
        sections[name] = cls(**kwargs)
    return resolve(RunConfig(**sections))


def resolve(cfg: RunConfig) -> RunConfig:
    d = cfg.dispersion
    if d.type == "tabulated" and not d.path:
        raise ConfigError("dispersion.path", "required for tabulated dispersion")
    if d.type == "synthetic" and d.path is not None:
        raise ConfigError("dispersion.path", "only valid for tabulated dispersion")
    try:
        design = DesignWavelengths(d.lambda1, d.lambda2, d.lambda3_center)
    except DispersionError as exc:
        raise ConfigError("dispersion.lambda3_center", str(exc)) from None
    if d.type == "synthetic":
        kwargs = {k: getattr(d, k) for k in ("w0", "kappa_w", "dbeta_dlambda", "g_ref") if getattr(d, k) is not None}
        try:
            model = SyntheticDispersion(p_ref=d.p_ref, g_slope=d.g_slope, design=design, **kwargs)
        except DispersionError as exc:
            raise ConfigError("dispersion", str(exc)) from None
        d = DispersionConfig(
            "synthetic", model.w0, model.kappa_w, model.dbeta_dlambda, model.g_ref, d.p_ref, d.g_slope,
            design.lambda1, design.lambda2, design.lambda3_center, None,
        )
    else:
        for key in ("w0", "kappa_w", "dbeta_dlambda"):
            if getattr(d, key) is not None:
                raise ConfigError(f"dispersion.{key}", "derived from the index table; do not set it")
        coupling = None if d.g_ref is None else CouplingSpec(d.g_ref, d.p_ref, d.g_slope)
        try:
            model = load_tabulated(d.path, design=design, coupling=coupling)
        except (OSError, DispersionError) as exc:
            raise ConfigError("dispersion.path", str(exc)) from None
        d = DispersionConfig(
            "tabulated", None, None, None, model.coupling.g_ref, d.p_ref, d.g_slope,
            design.lambda1, design.lambda2, design.lambda3_center, d.path,
        )
    p = cfg.profile
    if p.type == "piecewise":
        if not p.path:
            raise ConfigError("profile.path", "required for piecewise profiles")
    elif p.path is not None:
        raise ConfigError("profile.path", "only valid for piecewise profiles")
    if p.type == "cosine" and p.period is None:
        raise ConfigError("profile.period", "required for cosine profiles")
    if p.type != "cosine" and p.period is not None:
        raise ConfigError("profile.period", "only valid for cosine profiles")
    w0 = model.w0 if p.w0 is None else p.w0
    p = ProfileConfig(p.type, None if p.type == "piecewise" else w0, p.delta_w, p.period, p.path)
    s = cfg.simulation
    lam3 = model.lambda3_center if s.lambda3 is None else s.lambda3
    s = SimulationConfig(s.length, s.pump_power, lam3, s.step_count, s.loss_alpha1, s.loss_alpha3)
    sp = cfg.spectrum
    if (sp.lambda_min is None) != (sp.lambda_max is None):
        raise ConfigError("spectrum", "set both lambda_min and lambda_max or neither")
    if sp.lambda_min is not None and not sp.lambda_min < sp.lambda_max:
        raise ConfigError("spectrum.lambda_min", "must be < lambda_max")
    out = RunConfig(d, p, s, sp, cfg.sweep)
    try:
        out.build_profile()
    except (OSError, ProfileError) as exc:
        raise ConfigError("profile", str(exc)) from None
    return out


def parse_config(source) -> RunConfig:
    """Read JSON from a path, ``-`` (stdin) or an open text stream."""
    try:
        if source == "-" or source is None:
            text = sys.stdin.read()
        elif hasattr(source, "read"):
            text = source.read()
        else:
            text = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("$", f"cannot read config: {exc}") from None
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    return from_dict(doc)
