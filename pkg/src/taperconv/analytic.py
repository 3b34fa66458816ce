"""Closed-form limits used as oracles for the numerical propagation."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class AreaEstimate(NamedTuple):
    value: float  # nm
    weak_coupling: bool  # False once g*L >= 1


def eta_uniform(delta_beta, g, length):
    """Efficiency of a uniform guide, |g|^2 L^2 sinc^2(sqrt(dbeta^2/4 + |g|^2) L).

    sinc is the unnormalized sin(x)/x.
    """
    if np.any(np.asarray(length) < 0):
        raise ValueError("length must be >= 0")
    g2 = np.abs(g) ** 2
    x = np.sqrt(np.asarray(delta_beta, dtype=float) ** 2 / 4 + g2) * length
    # np.sinc is sin(pi x)/(pi x)
    eta = g2 * np.asarray(length, dtype=float) ** 2 * np.sinc(x / np.pi) ** 2
    eta = np.clip(eta, 0.0, 1.0)
    return float(eta) if np.ndim(eta) == 0 else eta


def lz_exponent(g, dbeta_dz_mag):
    return 2 * np.pi * np.abs(g) ** 2 / dbeta_dz_mag


def eta_landau_zener(g, dbeta_dz_mag):
    """Transition probability 1 - exp(-2 pi |g|^2 / |d dbeta/dz|)."""
    if np.any(np.asarray(dbeta_dz_mag) <= 0):
        raise ValueError("|d(delta_beta)/dz| must be > 0; a uniform guide has no Landau-Zener limit")
    eta = -np.expm1(-lz_exponent(g, dbeta_dz_mag))
    return float(eta) if np.ndim(eta) == 0 else eta


def bandwidth_estimate(delta_w: float, kappa_w: float, dbeta_dlambda: float) -> float:
    """Conversion bandwidth in nm, delta_w * kappa_w / dbeta_dlambda."""
    if dbeta_dlambda == 0:
        raise ValueError("dbeta_dlambda must be nonzero")
    return abs(delta_w) * kappa_w / dbeta_dlambda


def area_uniform(g: float, length: float, dbeta_dlambda: float) -> AreaEstimate:
    """Spectrally integrated efficiency 2 pi |g|^2 L / dbeta_dlambda (nm).

    The same weak-coupling value holds for adiabatic tapers.
    """
    if dbeta_dlambda == 0:
        raise ValueError("dbeta_dlambda must be nonzero")
    value = 2 * math.pi * abs(g) ** 2 * length / dbeta_dlambda
    return AreaEstimate(value, abs(g) * length < 1)
