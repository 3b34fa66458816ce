"""Waveguide width along the propagation axis, w(z).

Widths are in um, ``delta_w`` in nm, positions and lengths in um.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dispersion import DispersionModel, dbeta_dw

# tolerance on z beyond a Linear profile's length (floating-point node placement)
_Z_SLACK = 1e-9


class ProfileError(ValueError):
    pass


def _check_z(z):
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ProfileError(f"z must be >= 0, got min {np.min(z)}")
    return z


@dataclass(frozen=True)
class Uniform:
    w0: float

    def __post_init__(self):
        if not self.w0 > 0:
            raise ProfileError("w0 must be > 0")

    def width(self, z):
        z = _check_z(z)
        return self.w0 + 0.0 * z

    def slope(self, z):
        return 0.0 * _check_z(z)


@dataclass(frozen=True)
class Linear:
    """w(z) = w0 + (delta_w/L) (z - L/2); pinned to w0 at mid-length."""

    w0: float
    delta_w: float
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise ProfileError("length must be > 0")
        if not self.w0 - abs(self.delta_w) * 1e-3 / 2 > 0:
            raise ProfileError("taper reaches non-positive width")

    def _check(self, z):
        z = _check_z(z)
        if np.any(z > self.length * (1 + _Z_SLACK)):
            raise ProfileError(f"z beyond taper length {self.length} um")
        return z

    def width(self, z):
        z = self._check(z)
        return self.w0 + self.delta_w * 1e-3 / self.length * (z - self.length / 2)

    def slope(self, z):
        z = self._check(z)
        return self.delta_w * 1e-3 / self.length + 0.0 * z


@dataclass(frozen=True)
class Cosine:
    """w(z) = w0 - (delta_w/2) cos(2 pi z / T); narrowest at z = 0."""

    w0: float
    delta_w: float
    period: float

    def __post_init__(self):
        if not self.period > 0:
            raise ProfileError("period must be > 0")
        if not self.w0 - abs(self.delta_w) * 1e-3 / 2 > 0:
            raise ProfileError("modulation reaches non-positive width")

    def width(self, z):
        z = _check_z(z)
        return self.w0 - self.delta_w * 1e-3 / 2 * np.cos(2 * np.pi * z / self.period)

    def slope(self, z):
        z = _check_z(z)
        k = 2 * np.pi / self.period
        return self.delta_w * 1e-3 / 2 * k * np.sin(k * z)


@dataclass(frozen=True, eq=False)
class Piecewise:
    """Linear interpolation through measured (z, w) points, clamped outside."""

    z: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if z.ndim != 1 or z.shape != w.shape:
            raise ProfileError("z and w must be 1-D arrays of equal length")
        if z.size < 2:
            raise ProfileError("piecewise profile needs at least 2 points")
        if np.any(np.diff(z) <= 0):
            raise ProfileError("z must be strictly increasing")
        if np.any(w <= 0):
            raise ProfileError("widths must be > 0")
        z.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "w", w)

    def _clamp_warn(self, z):
        if np.any(z < self.z[0]) or np.any(z > self.z[-1]):
            warnings.warn(
                f"z outside piecewise range [{self.z[0]}, {self.z[-1]}] um; end widths held",
                RuntimeWarning,
                stacklevel=3,
            )

    def width(self, z):
        z = _check_z(z)
        self._clamp_warn(z)
        return np.interp(z, self.z, self.w)

    def slope(self, z):
        z = _check_z(z)
        self._clamp_warn(z)
        seg = np.diff(self.w) / np.diff(self.z)
        idx = np.clip(np.searchsorted(self.z, z, side="right") - 1, 0, seg.size - 1)
        out = seg[idx]
        return np.where((z < self.z[0]) | (z > self.z[-1]), 0.0, out)

    def to_dict(self):
        return {"z": self.z.tolist(), "w": self.w.tolist()}


TaperProfile = Uniform | Linear | Cosine | Piecewise


def width_at(profile: TaperProfile, z):
    w = profile.width(z)
    return float(w) if np.ndim(w) == 0 else w


def dbeta_dz(profile: TaperProfile, model: DispersionModel, z, lambda3):
    """d(delta_beta)/dz along the waveguide, rad/um^2 (chain rule through w(z))."""
    if isinstance(profile, Uniform):
        _check_z(z)
        out = 0.0 * np.asarray(z, dtype=float)
    else:
        out = dbeta_dw(model, profile.width(z), lambda3) * profile.slope(z)
    return float(out) if np.ndim(out) == 0 else out


def period_of(profile: TaperProfile) -> float | None:
    return profile.period if isinstance(profile, Cosine) else None


def load_piecewise(path) -> Piecewise:
    """Read a ``z_um,w_um`` CSV."""
    path = Path(path)
    zs, ws = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        header = None
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in row]
                if header != ["z_um", "w_um"]:
                    raise ProfileError(f"{path}:{lineno}: expected header z_um,w_um")
                continue
            if len(row) != 2:
                raise ProfileError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                z, w = float(row[0]), float(row[1])
            except ValueError as exc:
                raise ProfileError(f"{path}:{lineno}: {exc}") from None
            if not (math.isfinite(z) and math.isfinite(w)):
                raise ProfileError(f"{path}:{lineno}: non-finite value")
            if zs and z <= zs[-1]:
                raise ProfileError(f"{path}:{lineno}: z not strictly increasing ({z!r})")
            zs.append(z)
            ws.append(w)
    if header is None:
        raise ProfileError(f"{path}: empty file")
    return Piecewise(np.array(zs), np.array(ws))
