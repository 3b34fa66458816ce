"""Phase mismatch and coupling strength as functions of waveguide width.

Units used throughout the package:

* widths ``w`` in um, width *differences* (``delta_w``) in nm
* wavelengths in nm
* ``delta_beta`` in rad/um, ``kappa_w`` in rad/um per nm of width,
  ``dbeta_dlambda`` in rad/um per nm of wavelength
* coupling ``g`` in rad/um, pump power in W
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import bisect

# design geometry: 1550 nm signal, 980 nm pump
LAMBDA_SIGNAL = 1550.0
LAMBDA_PUMP = 980.0
W0_DEFAULT = 0.773
KAPPA_W_DEFAULT = 0.01
INDEX_CONTRAST_DEFAULT = 0.2
AREA_TARGET = 0.1114  # nm, analytic area at L = 1000 um, P = 1 W
AREA_REF_LENGTH = 1000.0


class DispersionError(ValueError):
    pass


class WidthRangeError(DispersionError):
    pass


class PhaseMatchError(DispersionError):
    pass


class TableParseError(DispersionError):
    pass


@dataclass(frozen=True)
class DesignWavelengths:
    lambda1: float = LAMBDA_SIGNAL
    lambda2: float = LAMBDA_PUMP
    lambda3_center: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.lambda3_center is None:
            object.__setattr__(self, "lambda3_center", 1.0 / (1.0 / self.lambda1 + 1.0 / self.lambda2))
        for name in ("lambda1", "lambda2", "lambda3_center"):
            if not getattr(self, name) > 0:
                raise DispersionError(f"{name} must be positive")
        mismatch = abs(1.0 / self.lambda3_center - (1.0 / self.lambda1 + 1.0 / self.lambda2))
        if mismatch > 1e-9:
            raise DispersionError(
                f"wavelengths violate energy conservation: |1/l3 - 1/l1 - 1/l2| = {mismatch:.3g} nm^-1"
            )


@dataclass(frozen=True)
class CouplingSpec:
    g_ref: float
    p_ref: float = 1.0
    g_slope: float = 0.0

    def __post_init__(self):
        if self.g_ref < 0:
            raise DispersionError("g_ref must be >= 0")
        if not self.p_ref > 0:
            raise DispersionError("p_ref must be > 0")


def dbeta_dlambda_from_contrast(index_contrast: float, lambda3: float) -> float:
    """2*pi*(n3 - n1)/lambda3**2, returned in rad/um per nm."""
    return 2 * math.pi * index_contrast / lambda3**2 * 1e3


def calibrated_g_ref(dbeta_dlambda: float, area: float = AREA_TARGET, length: float = AREA_REF_LENGTH) -> float:
    """Coupling that makes the weak-coupling area equal ``area`` at ``length``."""
    return math.sqrt(area * dbeta_dlambda / (2 * math.pi * length))


@dataclass(frozen=True)
class SyntheticDispersion:
    """Linearized mismatch around the phase-matching width ``w0``."""

    w0: float = W0_DEFAULT
    kappa_w: float = KAPPA_W_DEFAULT
    dbeta_dlambda: float = None  # type: ignore[assignment]
    g_ref: float = None  # type: ignore[assignment]
    p_ref: float = 1.0
    g_slope: float = 0.0
    design: DesignWavelengths = field(default_factory=DesignWavelengths)

    def __post_init__(self):
        if self.dbeta_dlambda is None:
            object.__setattr__(
                self,
                "dbeta_dlambda",
                dbeta_dlambda_from_contrast(INDEX_CONTRAST_DEFAULT, self.design.lambda3_center),
            )
        if self.g_ref is None:
            object.__setattr__(self, "g_ref", calibrated_g_ref(self.dbeta_dlambda))
        if not self.w0 > 0:
            raise DispersionError("w0 must be > 0")
        if not self.kappa_w > 0:
            raise DispersionError("kappa_w must be > 0")
        if not self.dbeta_dlambda > 0:
            raise DispersionError("dbeta_dlambda must be > 0")
        CouplingSpec(self.g_ref, self.p_ref, self.g_slope)

    @property
    def coupling(self) -> CouplingSpec:
        return CouplingSpec(self.g_ref, self.p_ref, self.g_slope)

    @property
    def lambda3_center(self) -> float:
        return self.design.lambda3_center

    @property
    def width_domain(self) -> tuple[float, float]:
        return (0.0, math.inf)

    def check_width(self, w):
        if np.any(np.asarray(w) <= 0):
            raise WidthRangeError("width must be > 0")

    def mismatch_at_center(self, w):
        return -self.kappa_w * (np.asarray(w) - self.w0) * 1e3

    def slope_lambda(self, w):
        return self.dbeta_dlambda + 0.0 * np.asarray(w, dtype=float)

    def slope_width(self, w):
        """d(delta_beta)/dw in rad/um per um."""
        return -self.kappa_w * 1e3 + 0.0 * np.asarray(w, dtype=float)

    def slope_lambda_dw(self, w):
        return 0.0 * np.asarray(w, dtype=float)


@dataclass(frozen=True, eq=False)
class TabulatedDispersion:
    """Effective-index tables n1, n2, n3 sampled over width.

    Mismatch at the design idler wavelength comes from the interpolated
    indices; detuning in lambda3 is applied to first order with
    ``2*pi*(n3 - n1)/lambda3**2`` evaluated at the local width.
    """

    widths: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    n3: np.ndarray
    design: DesignWavelengths = field(default_factory=DesignWavelengths)
    coupling: CouplingSpec = None  # type: ignore[assignment]

    def __post_init__(self):
        widths = np.asarray(self.widths, dtype=float)
        cols = [np.asarray(c, dtype=float) for c in (self.n1, self.n2, self.n3)]
        if widths.ndim != 1 or any(c.shape != widths.shape for c in cols):
            raise DispersionError("index tables must be 1-D and match the width grid")
        if widths.size < 4:
            raise DispersionError(f"need at least 4 width samples, got {widths.size}")
        if np.any(np.diff(widths) <= 0):
            raise DispersionError("widths must be strictly increasing")
        for name, arr in zip(("widths", "n1", "n2", "n3"), (widths, *cols)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "_interp", tuple(PchipInterpolator(widths, c) for c in cols))
        ends = self.mismatch_at_center(np.array([widths[0], widths[-1]]))
        if np.sign(ends[0]) == np.sign(ends[1]) and ends[0] != 0 and ends[1] != 0:
            raise PhaseMatchError(
                f"no sign change of delta_beta over [{widths[0]}, {widths[-1]}] um at the design wavelength"
            )
        if self.coupling is None:
            dbl = float(self.slope_lambda(phase_matched_width(self, self.design.lambda3_center)))
            object.__setattr__(self, "coupling", CouplingSpec(calibrated_g_ref(dbl)))
        object.__setattr__(self, "w0", phase_matched_width(self, self.design.lambda3_center))

    @property
    def lambda3_center(self) -> float:
        return self.design.lambda3_center

    @property
    def width_domain(self) -> tuple[float, float]:
        return (float(self.widths[0]), float(self.widths[-1]))

    def check_width(self, w):
        lo, hi = self.width_domain
        w = np.asarray(w)
        if np.any(w < lo) or np.any(w > hi):
            raise WidthRangeError(f"width outside tabulated range [{lo}, {hi}] um")

    def indices(self, w):
        self.check_width(w)
        return tuple(f(w) for f in self._interp)

    def mismatch_at_center(self, w):
        n1, n2, n3 = self.indices(w)
        d = self.design
        # wavelengths converted to um
        return 2 * np.pi * (n1 / (d.lambda1 * 1e-3) + n2 / (d.lambda2 * 1e-3) - n3 / (d.lambda3_center * 1e-3))

    def slope_lambda(self, w):
        n1, _, n3 = self.indices(w)
        return 2 * np.pi * (n3 - n1) / self.design.lambda3_center**2 * 1e3

    def slope_width(self, w):
        self.check_width(w)
        d = self.design
        dn1, dn2, dn3 = (f.derivative()(w) for f in self._interp)
        return 2 * np.pi * (dn1 / (d.lambda1 * 1e-3) + dn2 / (d.lambda2 * 1e-3) - dn3 / (d.lambda3_center * 1e-3))

    def slope_lambda_dw(self, w):
        self.check_width(w)
        dn1, dn3 = (f.derivative()(w) for f in (self._interp[0], self._interp[2]))
        return 2 * np.pi * (dn3 - dn1) / self.design.lambda3_center**2 * 1e3

    @property
    def kappa_w(self) -> float:
        """-d(delta_beta)/dw at the phase-matching width, per nm of width."""
        return float(-self.slope_width(self.w0) * 1e-3)

    @property
    def dbeta_dlambda(self) -> float:
        return float(self.slope_lambda(self.w0))


DispersionModel = SyntheticDispersion | TabulatedDispersion


def delta_beta(model: DispersionModel, w, lambda3):
    """Phase mismatch in rad/um at width ``w`` (um) and idler wavelength ``lambda3`` (nm)."""
    if np.any(np.asarray(lambda3) <= 0):
        raise DispersionError("lambda3 must be > 0")
    return model.mismatch_at_center(w) + model.slope_lambda(w) * (np.asarray(lambda3) - model.lambda3_center)


def dbeta_dw(model: DispersionModel, w, lambda3):
    """Partial derivative of delta_beta with respect to width, rad/um per um."""
    return model.slope_width(w) + model.slope_lambda_dw(w) * (np.asarray(lambda3) - model.lambda3_center)


def dbeta_dlambda_from_indices(model: TabulatedDispersion, w):
    return model.slope_lambda(w)


def coupling_g(model: DispersionModel, w, pump_power):
    """Pump-scaled coupling, g_ref * sqrt(P/p_ref) * (1 + g_slope * (w - w0)[nm])."""
    if np.any(np.asarray(pump_power) < 0):
        raise DispersionError("pump power must be >= 0")
    c = model.coupling
    factor = 1.0 + c.g_slope * (np.asarray(w, dtype=float) - model.w0) * 1e3
    if np.any(factor < 0):
        warnings.warn("coupling slope drives g negative; clamped to 0", RuntimeWarning, stacklevel=2)
        factor = np.maximum(factor, 0.0)
    g = c.g_ref * np.sqrt(np.asarray(pump_power, dtype=float) / c.p_ref) * factor
    return float(g) if np.ndim(g) == 0 else g


def phase_matched_width(model: DispersionModel, lambda3: float) -> float:
    """Width where delta_beta(w, lambda3) vanishes (|residual| < 1e-10 rad/um)."""
    if isinstance(model, SyntheticDispersion):
        detune = model.dbeta_dlambda * (lambda3 - model.lambda3_center)
        if detune == 0:
            return model.w0
        lo, hi = model.w0 - 0.5 * model.w0, model.w0 + 0.5 * model.w0
        lo = min(lo, model.w0 + 2 * detune / (model.kappa_w * 1e3))
        hi = max(hi, model.w0 + 2 * detune / (model.kappa_w * 1e3))
        lo = max(lo, 1e-9)
    else:
        lo, hi = model.width_domain

    def f(w):
        return float(delta_beta(model, w, lambda3))

    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise PhaseMatchError(f"delta_beta has no sign change on [{lo}, {hi}] um at lambda3={lambda3} nm")
    w = bisect(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=400)
    if abs(f(w)) >= 1e-10:
        raise PhaseMatchError(f"bisection residual {f(w):.3g} rad/um exceeds 1e-10")
    return w


def export_tabulated(
    model: SyntheticDispersion,
    path,
    widths=None,
    n1_center: float = 1.9,
    dn1_dw: float = 0.5,
) -> Path:
    """Write index tables that reproduce a synthetic model (``w_um,n1,n2,n3``).

    n1 is an arbitrary smooth baseline; n3 = n1 + contrast fixes the
    wavelength slope and n2 is solved so the mismatch matches the linear form.
    """
    if widths is None:
        widths = np.linspace(model.w0 - 0.05, model.w0 + 0.05, 21)
    widths = np.asarray(widths, dtype=float)
    d = model.design
    contrast = model.dbeta_dlambda * 1e-3 * d.lambda3_center**2 / (2 * np.pi)
    n1 = n1_center + dn1_dw * (widths - model.w0)
    n3 = n1 + contrast
    target = model.mismatch_at_center(widths)
    lam1, lam2, lam3 = d.lambda1 * 1e-3, d.lambda2 * 1e-3, d.lambda3_center * 1e-3
    n2 = lam2 * (target / (2 * np.pi) - n1 / lam1 + n3 / lam3)
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["w_um", "n1", "n2", "n3"])
        for row in zip(widths, n1, n2, n3):
            writer.writerow([repr(float(v)) for v in row])
    return path


def load_tabulated(path, design: DesignWavelengths | None = None, coupling: CouplingSpec | None = None) -> TabulatedDispersion:
    """Read a ``w_um,n1,n2,n3`` CSV into a :class:`TabulatedDispersion`."""
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = None
        for lineno, row in enumerate(reader, start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in row]
                if header != ["w_um", "n1", "n2", "n3"]:
                    raise TableParseError(f"{path}:{lineno}: expected header w_um,n1,n2,n3, got {','.join(row)}")
                continue
            if len(row) != 4:
                raise TableParseError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise TableParseError(f"{path}:{lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in vals):
                raise TableParseError(f"{path}:{lineno}: non-finite value")
            if rows and vals[0] <= rows[-1][1][0]:
                kind = "duplicate width" if vals[0] == rows[-1][1][0] else "non-increasing width"
                raise TableParseError(f"{path}:{lineno}: {kind} {vals[0]!r}")
            rows.append((lineno, vals))
    if header is None:
        raise TableParseError(f"{path}: empty file")
    if len(rows) < 4:
        raise TableParseError(f"{path}: need at least 4 data rows, got {len(rows)}")
    data = np.array([v for _, v in rows])
    kwargs = {}
    if design is not None:
        kwargs["design"] = design
    return TabulatedDispersion(data[:, 0], data[:, 1], data[:, 2], data[:, 3], coupling=coupling, **kwargs)
