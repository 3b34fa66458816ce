"""Idler-wavelength spectra eta(lambda3) and quantities derived from them."""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.signal

from .analytic import bandwidth_estimate
from .dispersion import DispersionModel
from .profile import Cosine, Linear, Piecewise, TaperProfile
from .propagation import PropagationSettings, efficiency, propagate_batch, resolve_step_count

DEFAULT_POINTS = 801
MIN_POINTS = 21
MIN_HALF_WINDOW = 2.0  # nm
# fraction of the weak-coupling area allowed to fall outside the default window
TAIL_FRACTION = 1e-3
LEAK_FRACTION = 0.01
DEFAULT_PROMINENCE = 0.05


class UnresolvedBandwidthError(ValueError):
    pass


class TailLeakageWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class Spectrum:
    lambdas: np.ndarray
    etas: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        eta = np.asarray(self.etas, dtype=float)
        if lam.ndim != 1 or lam.shape != eta.shape:
            raise ValueError("lambdas and etas must be 1-D arrays of equal length")
        if lam.size < MIN_POINTS:
            raise ValueError(f"a spectrum needs at least {MIN_POINTS} points")
        if np.any(np.diff(lam) <= 0):
            raise ValueError("lambdas must be strictly increasing")
        if np.any(eta < 0) or np.any(eta > 1):
            raise ValueError("efficiencies must lie in [0, 1]")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "etas", eta)

    @property
    def spacing(self) -> float:
        return float(np.max(np.diff(self.lambdas)))

    @property
    def band_resolved(self) -> bool:
        """True when both grid ends sit below 1% of the peak."""
        peak = float(np.max(self.etas))
        if peak == 0:
            return True
        return max(self.etas[0], self.etas[-1]) < LEAK_FRACTION * peak


def taper_depth(profile: TaperProfile) -> float:
    """Peak-to-peak width excursion in nm."""
    if isinstance(profile, (Linear, Cosine)):
        return abs(profile.delta_w)
    if isinstance(profile, Piecewise):
        return float(np.ptp(profile.w)) * 1e3
    return 0.0


def default_window(model: DispersionModel, profile: TaperProfile, length: float) -> tuple[float, float]:
    """Center +- max(3 x bandwidth estimate, 2 nm, sinc^2 tail allowance).

    The tail allowance keeps the far sidelobes that lie outside the window
    (they decay like 1/dbeta^2) below TAIL_FRACTION of the total area.
    """
    bw = bandwidth_estimate(taper_depth(profile), model.kappa_w, model.dbeta_dlambda)
    tail = 1.0 / (math.pi * length * TAIL_FRACTION) / model.dbeta_dlambda
    half = max(3 * bw, MIN_HALF_WINDOW, tail)
    c = model.lambda3_center
    return c - half, c + half


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("TAPERCONV_THREADS", "0") or 0)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def compute_spectrum(
    model: DispersionModel,
    profile: TaperProfile,
    length: float,
    pump_power: float,
    lambda_min: float | None = None,
    lambda_max: float | None = None,
    points: int = DEFAULT_POINTS,
    settings: PropagationSettings | None = None,
    threads: int | None = None,
) -> Spectrum:
    """Efficiency on a uniform lambda3 grid.

    The automatic step count is resolved once for the whole grid, so each
    point equals a standalone propagation with that explicit step count.
    Work is split into contiguous chunks; chunking does not change results.
    """
    settings = settings or PropagationSettings()
    if lambda_min is None or lambda_max is None:
        lo, hi = default_window(model, profile, length)
        lambda_min = lo if lambda_min is None else lambda_min
        lambda_max = hi if lambda_max is None else lambda_max
    if not lambda_min < lambda_max:
        raise ValueError("lambda_min must be < lambda_max")
    if points < MIN_POINTS:
        raise ValueError(f"points must be >= {MIN_POINTS}")
    lam = np.linspace(lambda_min, lambda_max, points)
    n = resolve_step_count(model, profile, length, pump_power, lam, settings)
    fixed = PropagationSettings(n, settings.loss_alpha1, settings.loss_alpha3)

    def run(chunk):
        try:
            return efficiency(propagate_batch(model, profile, length, pump_power, chunk, fixed))
        except Exception as exc:
            raise type(exc)(f"{exc} (lambda3 in [{chunk[0]:.6g}, {chunk[-1]:.6g}] nm)") from exc

    nthreads = min(thread_count(threads), points)
    chunks = np.array_split(lam, nthreads)
    if nthreads == 1:
        parts = [run(lam)]
    else:
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(run, chunks))
    etas = np.concatenate([np.atleast_1d(p) for p in parts])
    meta = {
        "length_um": length,
        "pump_power_W": pump_power,
        "lambda_min_nm": float(lambda_min),
        "lambda_max_nm": float(lambda_max),
        "points": points,
        "step_count": n,
        "loss_alpha1_per_m": settings.loss_alpha1,
        "loss_alpha3_per_m": settings.loss_alpha3,
    }
    return Spectrum(lam, etas, meta)


def _half_crossings(s: Spectrum) -> tuple[float, float]:
    lam, eta = s.lambdas, s.etas
    peak = float(np.max(eta))
    if peak <= 0:
        raise ValueError("spectrum has no positive maximum")
    imax = int(np.argmax(eta))
    half = peak / 2
    above = np.nonzero(eta >= half)[0]
    i, j = int(above[0]), int(above[-1])
    if imax in (0, eta.size - 1) or i == 0 or j == eta.size - 1:
        raise UnresolvedBandwidthError("half-maximum not reached inside the grid; widen the wavelength window")
    left = lam[i - 1] + (half - eta[i - 1]) * (lam[i] - lam[i - 1]) / (eta[i] - eta[i - 1])
    right = lam[j] + (eta[j] - half) * (lam[j + 1] - lam[j]) / (eta[j] - eta[j + 1])
    return float(left), float(right)


def fwhm(s: Spectrum) -> float:
    """Full width at half maximum (nm) between the outermost half-max crossings."""
    left, right = _half_crossings(s)
    return right - left


def integrate_area(s: Spectrum) -> float:
    """Trapezoid integral of eta over lambda3 (nm); warns if the band is cut off."""
    if not s.band_resolved:
        warnings.warn(
            "spectrum ends exceed 1% of the peak; area is truncated",
            TailLeakageWarning,
            stacklevel=2,
        )
    return float(np.trapezoid(s.etas, s.lambdas))


class Peak(NamedTuple):
    wavelength: float
    eta: float


def find_peaks(s: Spectrum, min_prominence: float = DEFAULT_PROMINENCE) -> list[Peak]:
    """Local maxima with prominence above ``min_prominence`` x max, highest first.

    Positions are refined with a parabola through the three samples around
    each maximum.
    """
    if not 0 < min_prominence < 1:
        raise ValueError("min_prominence must be in (0, 1)")
    eta = s.etas
    peak = float(np.max(eta))
    if peak <= 0:
        return []
    idx, _ = scipy.signal.find_peaks(eta, prominence=min_prominence * peak)
    out = []
    for i in idx:
        y0, y1, y2 = eta[i - 1], eta[i], eta[i + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        # local spacing; uniform grids make this exact
        step = 0.5 * (s.lambdas[i + 1] - s.lambdas[i - 1])
        out.append(Peak(float(s.lambdas[i] + shift * step), float(y1 - 0.25 * (y0 - y2) * shift)))
    out.sort(key=lambda p: -p.eta)
    return out


class FlatTop(NamedTuple):
    mean: float
    std: float


def flat_top(s: Spectrum) -> FlatTop:
    """Mean and standard deviation of eta over the central half of the FWHM window."""
    left, right = _half_crossings(s)
    mid, quarter = 0.5 * (left + right), 0.25 * (right - left)
    sel = np.abs(s.lambdas - mid) <= quarter
    vals = s.etas[sel]
    return FlatTop(float(np.mean(vals)), float(np.std(vals)))
