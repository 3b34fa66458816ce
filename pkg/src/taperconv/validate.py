"""Invariant checks run by ``taperconv validate`` at the default calibration."""
from __future__ import annotations

import math
import tempfile
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from . import analytic, dispersion, experiments, profile, propagation, spectrum
from .dispersion import SyntheticDispersion
from .propagation import PropagationSettings


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


CHECKS: list[tuple[str, Callable[[SyntheticDispersion], tuple[bool, str]]]] = []


def check(name):
    def deco(fn):
        CHECKS.append((name, fn))
        return fn

    return deco


@check("dispersion: linear slopes recovered by finite differences")
def _fd_slopes(m):
    lc = m.lambda3_center
    h = 1e-4
    kw = -(dispersion.delta_beta(m, m.w0 + h, lc) - dispersion.delta_beta(m, m.w0 - h, lc)) / (2 * h) * 1e-3
    dl = (dispersion.delta_beta(m, m.w0, lc + 0.5) - dispersion.delta_beta(m, m.w0, lc - 0.5)) / 1.0
    err = max(abs(kw / m.kappa_w - 1), abs(dl / m.dbeta_dlambda - 1))
    return err < 1e-9, f"max relative error {err:.2e}"


@check("dispersion: g(4P) = 2 g(P)")
def _g_scaling(m):
    g1, g4 = dispersion.coupling_g(m, m.w0, 1.3), dispersion.coupling_g(m, m.w0, 5.2)
    return abs(g4 - 2 * g1) <= 1e-15 * g4, f"g(P)={g1:.6g}, g(4P)={g4:.6g}"


@check("dispersion: phase-matched width has |dbeta| < 1e-10")
def _phase_match(m):
    worst = 0.0
    for off in (-20.0, -3.0, 0.0, 7.5):
        w = dispersion.phase_matched_width(m, m.lambda3_center + off)
        worst = max(worst, abs(float(dispersion.delta_beta(m, w, m.lambda3_center + off))))
    return worst < 1e-10, f"max residual {worst:.2e} rad/um"


@check("dispersion: tabulated round trip within 1e-6 rad/um")
def _round_trip(m):
    with tempfile.TemporaryDirectory() as tmp:
        path = dispersion.export_tabulated(m, Path(tmp) / "table.csv")
        t = dispersion.load_tabulated(path, design=m.design, coupling=m.coupling)
    w = np.linspace(t.widths[0], t.widths[-1], 97)
    lam = m.lambda3_center + np.linspace(-10, 10, 97)
    err = float(np.max(np.abs(dispersion.delta_beta(t, w, lam) - dispersion.delta_beta(m, w, lam))))
    return err < 1e-6, f"max |dbeta difference| {err:.2e}"


@check("profile: dbeta_dz matches finite differences")
def _dbeta_dz(m):
    worst = 0.0
    lc = m.lambda3_center
    for prof in (profile.Linear(m.w0, 4.0, 1000.0), profile.Cosine(m.w0, 4.0, 500.0)):
        for z in (100.0, 333.0, 610.0):
            h = 1e-3
            fd = (dispersion.delta_beta(m, prof.width(z + h), lc) - dispersion.delta_beta(m, prof.width(z - h), lc)) / (2 * h)
            an = profile.dbeta_dz(prof, m, z, lc)
            worst = max(worst, abs(fd - an) / abs(an))
    return worst < 1e-7, f"max relative error {worst:.2e}"


@check("propagation: uniform guide reproduces the sinc^2 law")
def _uniform_oracle(m):
    L = 1000.0
    lam = m.lambda3_center + np.linspace(0, 5.0, 11)
    M = propagation.propagate_batch(m, profile.Uniform(m.w0), L, 4.0, lam)
    db = dispersion.delta_beta(m, m.w0, lam)
    ref = analytic.eta_uniform(db, dispersion.coupling_g(m, m.w0, 4.0), L)
    err = float(np.max(np.abs(propagation.raw_efficiency(M) / ref - 1)))
    return err < 1e-6, f"max relative error {err:.2e}"


@check("propagation: lossless transfer matrices are unitary")
def _unitarity(m):
    lam = m.lambda3_center + np.linspace(-15, 15, 31)
    M = propagation.propagate_batch(m, profile.Linear(m.w0, 8.0, 2000.0), 2000.0, 3.0, lam)
    err = M.unitarity_error()
    return err < 1e-9, f"max |MM^dagger - I| {err:.2e}"


@check("propagation: periodic guide equals the per-period matrix power")
def _periodicity(m):
    T, N, n = 400.0, 4, 400
    prof = profile.Cosine(m.w0, 4.0, T)
    lam = m.lambda3_center + 2.0
    one = propagation.propagate(m, prof, T, 1.0, lam, PropagationSettings(n))
    full = propagation.propagate(m, prof, N * T, 1.0, lam, PropagationSettings(N * n))
    err = float(np.max(np.abs(np.linalg.matrix_power(one.as_array(), N) - full.as_array())))
    return err < 1e-8, f"max entry difference {err:.2e}"


@check("propagation: fourth-order convergence")
def _order(m):
    L, P = 1000.0, 9.0
    lam = m.lambda3_center + 3.0
    db = float(dispersion.delta_beta(m, m.w0, lam))
    ref = analytic.eta_uniform(db, dispersion.coupling_g(m, m.w0, P), L)
    errs = [
        abs(propagation.raw_efficiency(propagation.propagate(m, profile.Uniform(m.w0), L, P, lam, PropagationSettings(n))) - ref)
        for n in (40, 80)
    ]
    order = math.log2(errs[0] / errs[1])
    return order > 3.8, f"observed order {order:.3f}"


@check("propagation: equal losses scale eta by exp(-alpha L)")
def _loss(m):
    L, lam = 10000.0, m.lambda3_center
    prof = profile.Linear(m.w0, 4.0, L)
    lossless = propagation.propagate(m, prof, L, 1.0, lam)
    lossy = propagation.propagate(m, prof, L, 1.0, lam, PropagationSettings(None, 1.0, 1.0))
    factor = math.exp(-1.0 * L * 1e-6)
    out = propagation.propagate_state(lossy, propagation.StateVector(1.0, 0.0))
    err = max(abs(out.norm2 - factor), abs(propagation.raw_efficiency(lossy) - factor * propagation.raw_efficiency(lossless)))
    return err < 1e-8, f"max deviation {err:.2e}"


@check("analytic: Landau-Zener small-exponent limit")
def _lz_small(m):
    ok = True
    for x in (1e-6, 1e-5, 1e-4, 9e-4):
        g = math.sqrt(x / (2 * math.pi))
        r = analytic.eta_landau_zener(g, 1.0) / x
        ok &= 1 - x <= r <= 1
    return ok, "eta/x within [1-x, 1]"


@check("spectrum: area law across taper depths")
def _area_law(m):
    recs = experiments.area_sweep(m, 1000.0, 1.0, delta_ws=[0.0, 2.0, 4.0, 8.0], threads=None)
    areas = np.array([r.result for r in recs])
    ref = analytic.area_uniform(dispersion.coupling_g(m, m.w0, 1.0), 1000.0, m.dbeta_dlambda).value
    spread = float((areas.max() - areas.min()) / areas.mean())
    dev = float(np.max(np.abs(areas / ref - 1)))
    return spread < 0.02 and dev < 0.03, f"spread {spread:.3%}, max deviation from analytic {dev:.3%}"


@check("experiments: records replay bit-exactly")
def _replay(m):
    recs = experiments.sweep_delta_w(m, 1000.0, 1.0, [0.0, 4.0])
    ok = all(experiments.replay(r) == r.result for r in recs)
    return ok, "replayed from snapshots"


def run_checks(model: SyntheticDispersion | None = None) -> list[Check]:
    model = model or SyntheticDispersion()
    out = []
    for name, fn in CHECKS:
        try:
            passed, detail = fn(model)
        except Exception as exc:  # a crash is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(Check(name, bool(passed), detail))
    return out
