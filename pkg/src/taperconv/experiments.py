"""Parameter sweeps behind the efficiency, area-law and periodic-modulation studies."""
from __future__ import annotations

import dataclasses
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import io
from .analytic import lz_exponent
from .dispersion import DispersionModel, coupling_g
from .profile import Cosine, Linear, TaperProfile
from .propagation import PropagationSettings, efficiency, propagate, resolve_step_count
from .spectrum import (
    DEFAULT_POINTS,
    TailLeakageWarning,
    compute_spectrum,
    default_window,
    fwhm,
    integrate_area,
    thread_count,
)

OBSERVABLES = ("eta_peak", "eta_at_center", "area", "fwhm")
SATURATION_DEVIATION = 0.10
ADIABATIC_CUTOFF = 0.5


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRecord:
    parameter: str
    value: float
    observable: str
    result: float
    fixed: dict = field(repr=False)
    warning: str = ""

    def __post_init__(self):
        if self.observable not in OBSERVABLES:
            raise SweepError(f"unknown observable {self.observable!r}")
        if not (math.isfinite(self.result) and self.result >= 0):
            raise SweepError(f"observable must be finite and >= 0, got {self.result}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class _Task:
    parameter: str
    value: float
    model: DispersionModel
    profile: TaperProfile
    length: float
    pump_power: float
    lambda3: float
    observable: str
    settings: PropagationSettings
    points: int = DEFAULT_POINTS


def _snapshot(task: _Task) -> dict:
    """Fully resolved inputs: explicit step count and wavelength window."""
    snap = {
        "model": io.describe(task.model),
        "profile": io.describe(task.profile),
        "length_um": task.length,
        "pump_power_W": task.pump_power,
        "lambda3_nm": task.lambda3,
    }
    if task.observable == "eta_at_center":
        n = resolve_step_count(task.model, task.profile, task.length, task.pump_power, task.lambda3, task.settings)
    else:
        lo, hi = default_window(task.model, task.profile, task.length)
        snap["window_nm"] = [lo, hi]
        snap["points"] = task.points
        grid = np.linspace(lo, hi, task.points)
        n = resolve_step_count(task.model, task.profile, task.length, task.pump_power, grid, task.settings)
    snap["settings"] = io.describe(dataclasses.replace(task.settings, step_count=n))
    return snap


def evaluate(snapshot: dict, observable: str, threads: int | None = 1) -> tuple[float, str]:
    """Compute one observable from a snapshot; returns (value, warning text)."""
    model = io.model_from_dict(snapshot["model"])
    profile = io.profile_from_dict(snapshot["profile"])
    settings = PropagationSettings(**snapshot["settings"])
    length, pump = snapshot["length_um"], snapshot["pump_power_W"]
    if observable == "eta_at_center":
        return efficiency(propagate(model, profile, length, pump, snapshot["lambda3_nm"], settings)), ""
    lo, hi = snapshot["window_nm"]
    s = compute_spectrum(model, profile, length, pump, lo, hi, snapshot["points"], settings, threads=threads)
    if observable == "eta_peak":
        return float(np.max(s.etas)), ""
    if observable == "fwhm":
        return fwhm(s), ""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TailLeakageWarning)
        area = integrate_area(s)
    return area, "; ".join(str(w.message) for w in caught)


def _run(tasks: list[_Task], threads: int | None) -> list[SweepRecord]:
    tasks = sorted(tasks, key=lambda t: t.value)

    def one(task):
        snap = _snapshot(task)
        value, warn = evaluate(snap, task.observable)
        return SweepRecord(task.parameter, task.value, task.observable, value, snap, warn)

    n = min(thread_count(threads), max(len(tasks), 1))
    if n == 1:
        return [one(t) for t in tasks]
    with ThreadPoolExecutor(n) as pool:
        return list(pool.map(one, tasks))


def replay(record: SweepRecord) -> float:
    """Recompute a record from its snapshot (bit-exact)."""
    return evaluate(record.fixed, record.observable)[0]


def _nonempty(values, name):
    values = [float(v) for v in values]
    if not values:
        raise SweepError(f"{name} list is empty")
    return values


def _center(model, lambda3):
    return model.lambda3_center if lambda3 is None else lambda3


def _with_length(template: TaperProfile, length: float) -> TaperProfile:
    if isinstance(template, Linear):
        return dataclasses.replace(template, length=length)
    return template


def sweep_length(
    model: DispersionModel,
    template: TaperProfile,
    lengths,
    pump_power: float,
    lambda3: float | None = None,
    settings: PropagationSettings | None = None,
    threads: int | None = None,
) -> list[SweepRecord]:
    """eta at one wavelength versus length; Linear templates keep delta_w and stretch."""
    settings = settings or PropagationSettings()
    lengths = _nonempty(lengths, "length")
    if any(v <= 0 for v in lengths):
        raise SweepError("lengths must be > 0")
    lam = _center(model, lambda3)
    tasks = [
        _Task("length_um", L, model, _with_length(template, L), L, pump_power, lam, "eta_at_center", settings)
        for L in lengths
    ]
    return _run(tasks, threads)


def sweep_delta_w(
    model: DispersionModel,
    length: float,
    pump_power: float,
    delta_ws,
    lambda3: float | None = None,
    settings: PropagationSettings | None = None,
    threads: int | None = None,
) -> list[SweepRecord]:
    settings = settings or PropagationSettings()
    delta_ws = _nonempty(delta_ws, "delta_w")
    lam = _center(model, lambda3)
    tasks = [
        _Task("delta_w_nm", dw, model, Linear(model.w0, dw, length), length, pump_power, lam, "eta_at_center", settings)
        for dw in delta_ws
    ]
    return _run(tasks, threads)


def sweep_pump(
    model: DispersionModel,
    profile: TaperProfile,
    length: float,
    pump_powers,
    lambda3: float | None = None,
    settings: PropagationSettings | None = None,
    threads: int | None = None,
) -> list[SweepRecord]:
    settings = settings or PropagationSettings()
    powers = _nonempty(pump_powers, "pump_power")
    if any(p < 0 for p in powers):
        raise SweepError("pump powers must be >= 0")
    lam = _center(model, lambda3)
    tasks = [
        _Task("pump_power_W", p, model, profile, length, p, lam, "eta_at_center", settings) for p in powers
    ]
    return _run(tasks, threads)


def area_sweep(
    model: DispersionModel,
    length: float,
    pump_power: float = 1.0,
    delta_ws=None,
    pump_powers=None,
    delta_w: float = 0.0,
    points: int = DEFAULT_POINTS,
    settings: PropagationSettings | None = None,
    threads: int | None = None,
) -> list[SweepRecord]:
    """Spectrally integrated efficiency versus taper depth or pump power.

    Pass exactly one of ``delta_ws`` (at ``pump_power``) or ``pump_powers``
    (at ``delta_w``). Tail-leakage warnings land in ``SweepRecord.warning``.
    """
    settings = settings or PropagationSettings()
    if (delta_ws is None) == (pump_powers is None):
        raise SweepError("give exactly one of delta_ws or pump_powers")
    lam = model.lambda3_center
    if delta_ws is not None:
        tasks = [
            _Task("delta_w_nm", dw, model, Linear(model.w0, dw, length), length, pump_power, lam, "area", settings, points)
            for dw in _nonempty(delta_ws, "delta_w")
        ]
    else:
        profile = Linear(model.w0, delta_w, length)
        tasks = [
            _Task("pump_power_W", p, model, profile, length, p, lam, "area", settings, points)
            for p in _nonempty(pump_powers, "pump_power")
        ]
    return _run(tasks, threads)


def sweep_period(
    model: DispersionModel,
    length: float,
    pump_power: float,
    delta_w: float,
    periods,
    observable: str = "area",
    points: int = DEFAULT_POINTS,
    settings: PropagationSettings | None = None,
    threads: int | None = None,
) -> list[SweepRecord]:
    """Observable of a cosine-modulated guide versus modulation period."""
    settings = settings or PropagationSettings()
    periods = _nonempty(periods, "period")
    lam = model.lambda3_center
    tasks = [
        _Task("period_um", T, model, Cosine(model.w0, delta_w, T), length, pump_power, lam, observable, settings, points)
        for T in periods
    ]
    return _run(tasks, threads)


def saturation_threshold(records: list[SweepRecord]) -> float:
    """Smallest pump power whose area departs > 10% from the low-power line.

    The line passes through the origin and is fitted to the lowest quarter
    of the records (at least two). Returns ``math.inf`` if nothing departs.
    """
    if len(records) < 8:
        raise SweepError(f"need at least 8 records, got {len(records)}")
    pts = sorted((r.value, r.result) for r in records)
    p = np.array([v for v, _ in pts])
    a = np.array([r for _, r in pts])
    k = max(2, math.ceil(len(pts) / 4))
    pl, al = p[:k], a[:k]
    if not np.any(pl > 0):
        raise SweepError("lowest-quartile records need a positive pump power")
    slope = float(np.dot(pl, al) / np.dot(pl, pl))
    line = slope * p
    off = np.abs(a - line) > SATURATION_DEVIATION * np.abs(line)
    off &= p > 0
    hits = np.nonzero(off)[0]
    return float(p[hits[0]]) if hits.size else math.inf


def adiabatic_thresholds(model: DispersionModel, delta_w: float, length: float, pump_power: float) -> tuple[float, float]:
    """(pump power, length) at which the Landau-Zener exponent reaches 0.5.

    The exponent 2 pi g^2 / |d dbeta/dz| of a linear taper grows as P * L;
    the first value holds ``length`` fixed, the second ``pump_power``.
    Both are ``inf`` for a uniform guide.
    """
    g_unit = coupling_g(model, model.w0, model.coupling.p_ref)
    if delta_w == 0 or g_unit == 0:
        return math.inf, math.inf
    # exponent per W per um
    c = lz_exponent(g_unit, model.kappa_w * abs(delta_w)) / model.coupling.p_ref
    p_th = ADIABATIC_CUTOFF / (c * length)
    l_th = ADIABATIC_CUTOFF / (c * pump_power) if pump_power > 0 else math.inf
    return p_th, l_th


SWEEP_PARAMETERS = {
    "length": "length_um",
    "delta_w": "delta_w_nm",
    "pump_power": "pump_power_W",
    "period": "period_um",
}


def sweep(
    model: DispersionModel,
    profile: TaperProfile,
    length: float,
    pump_power: float,
    parameter: str,
    values,
    observable: str = "eta_at_center",
    lambda3: float | None = None,
    points: int = DEFAULT_POINTS,
    settings: PropagationSettings | None = None,
    threads: int | None = None,
) -> list[SweepRecord]:
    """Any observable against one of length, delta_w, pump_power or period.

    delta_w and period sweeps keep the base profile's shape where it has
    that parameter; a uniform base becomes a linear taper (delta_w) or a
    cosine modulation (period) around the same center width.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise SweepError(f"unknown sweep parameter {parameter!r}; choose from {sorted(SWEEP_PARAMETERS)}")
    if observable not in OBSERVABLES:
        raise SweepError(f"unknown observable {observable!r}")
    settings = settings or PropagationSettings()
    values = _nonempty(values, parameter)
    lam = _center(model, lambda3)
    w0 = getattr(profile, "w0", model.w0)
    tasks = []
    for v in values:
        prof, L, P = profile, length, pump_power
        if parameter == "length":
            if v <= 0:
                raise SweepError("lengths must be > 0")
            prof, L = _with_length(profile, v), v
        elif parameter == "delta_w":
            prof = dataclasses.replace(profile, delta_w=v) if isinstance(profile, (Linear, Cosine)) else Linear(w0, v, length)
        elif parameter == "pump_power":
            if v < 0:
                raise SweepError("pump powers must be >= 0")
            P = v
        else:
            if v <= 0:
                raise SweepError("periods must be > 0")
            dw = profile.delta_w if isinstance(profile, (Linear, Cosine)) else 0.0
            prof = dataclasses.replace(profile, period=v) if isinstance(profile, Cosine) else Cosine(w0, dw, v)
        tasks.append(_Task(SWEEP_PARAMETERS[parameter], v, model, prof, L, P, lam, observable, settings, points))
    return _run(tasks, threads)


def records_csv(records: list[SweepRecord], config: dict | None = None) -> str:
    header = ["parameter", "value", "observable", "result", "length_um", "pump_power_W", "lambda3_nm", "profile", "step_count", "warning"]
    rows = []
    for r in records:
        f = r.fixed
        rows.append(
            [
                r.parameter,
                r.value,
                r.observable,
                r.result,
                f["length_um"],
                f["pump_power_W"],
                f["lambda3_nm"],
                f["profile"]["type"],
                f["settings"]["step_count"],
                r.warning.replace(",", ";"),
            ]
        )
    return io.csv_text(header, rows, config)


def records_jsonl(records: list[SweepRecord], config: dict | None = None) -> str:
    lines = [json.dumps({"version": io.__version__, "config": config}, sort_keys=True)]
    for r in records:
        d = r.to_dict()
        d["value"] = io.round_floats(d["value"])
        d["result"] = io.round_floats(d["result"])
        lines.append(json.dumps(d, sort_keys=True))
    return "\n".join(lines) + "\n"
