"""Transfer matrix of the two-mode conversion problem by fixed-step RK4.

The amplitudes (A1, A3) obey -i d/dz |Phi> = H(z) |Phi> with

    H(z) = [[dbeta(z)/2 + i a1/2,  g],
            [g,                   -dbeta(z)/2 + i a3/2]]

where a1, a3 are power loss rates (the +i sign gives decay under
d/dz = iH). We integrate dM/dz = i H(z) M from M(0) = I.

Integration is batched: one call propagates many (lambda3, pump power)
pairs that share the same waveguide. Each entry runs the same scalar loop,
so a batch entry is bitwise identical to the same point run on its own
with the same step count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .dispersion import DispersionModel, coupling_g
from .profile import TaperProfile, period_of

MAX_STEPS = 10**7
MIN_STEPS = 16
PHASE_PER_STEP = 0.05
# bound on accumulated RK4 norm defect, sum over steps of (h Omega)^6 / 72
NORM_DEFECT_BUDGET = 1e-10
_SAMPLES = 256


class ResourceError(RuntimeError):
    pass


@dataclass(frozen=True)
class PropagationSettings:
    step_count: int | None = None  # None selects the automatic rule
    loss_alpha1: float = 0.0  # 1/m
    loss_alpha3: float = 0.0  # 1/m

    def __post_init__(self):
        if self.step_count is not None:
            if int(self.step_count) != self.step_count or self.step_count < MIN_STEPS:
                raise ValueError(f"step_count must be an integer >= {MIN_STEPS}")
        if self.loss_alpha1 < 0 or self.loss_alpha3 < 0:
            raise ValueError("loss coefficients must be >= 0")

    @property
    def alphas_per_um(self) -> tuple[float, float]:
        return self.loss_alpha1 * 1e-6, self.loss_alpha3 * 1e-6


@dataclass(frozen=True)
class StateVector:
    a1: complex
    a3: complex

    @property
    def norm2(self) -> float:
        return abs(self.a1) ** 2 + abs(self.a3) ** 2


@dataclass(frozen=True)
class TransferMatrix:
    m11: complex
    m12: complex
    m21: complex
    m22: complex

    def as_array(self) -> np.ndarray:
        """(2, 2) array, or (..., 2, 2) for a batched matrix."""
        rows = [[self.m11, self.m12], [self.m21, self.m22]]
        arr = np.array(rows, dtype=complex)
        return np.moveaxis(arr, (0, 1), (-2, -1)) if arr.ndim > 2 else arr

    @classmethod
    def from_array(cls, a) -> "TransferMatrix":
        a = np.asarray(a, dtype=complex)
        return cls(a[..., 0, 0], a[..., 0, 1], a[..., 1, 0], a[..., 1, 1])

    def __getitem__(self, idx) -> "TransferMatrix":
        return TransferMatrix(self.m11[idx], self.m12[idx], self.m21[idx], self.m22[idx])

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        return TransferMatrix.from_array(self.as_array() @ other.as_array())

    def unitarity_error(self) -> float:
        """max |M M^dagger - I| over entries (and over the batch)."""
        a = self.as_array()
        err = a @ np.conj(np.swapaxes(a, -1, -2)) - np.eye(2)
        return float(np.max(np.abs(err)))


def hamiltonian(delta_beta: float, g: complex, alpha1: float = 0.0, alpha3: float = 0.0) -> np.ndarray:
    """2x2 generator at one position. ``alpha1``/``alpha3`` in 1/um."""
    return np.array(
        [
            [delta_beta / 2 + 0.5j * alpha1, np.conj(g)],
            [g, -delta_beta / 2 + 0.5j * alpha3],
        ],
        dtype=complex,
    )


def efficiency(m: TransferMatrix):
    """|M21|^2 clamped to [0, 1]; see :func:`raw_efficiency` for the unclamped value."""
    eta = np.clip(raw_efficiency(m), 0.0, 1.0)
    return float(eta) if np.ndim(eta) == 0 else eta


def raw_efficiency(m: TransferMatrix):
    eta = np.abs(m.m21) ** 2
    return float(eta) if np.ndim(eta) == 0 else eta


def propagate_state(m: TransferMatrix, state: StateVector) -> StateVector:
    return StateVector(
        m.m11 * state.a1 + m.m12 * state.a3,
        m.m21 * state.a1 + m.m22 * state.a3,
    )


def _z_nodes(length: float, n: int) -> np.ndarray:
    # full and half steps; exact endpoints
    return length * (np.arange(2 * n + 1) / (2 * n))


def auto_step_count(model: DispersionModel, profile: TaperProfile, length: float, pump_power, lambda3) -> int:
    """Fixed step from h = min(L/2000, T/64, 0.05/max Omega, h_budget).

    Omega = sqrt(dbeta^2/4 + g^2) is sampled at 256 positions and maximized
    over every requested (lambda3, pump) pair. RK4 shrinks the norm of a
    rotation by about (h Omega)^6/72 per step; h_budget keeps the total over
    the guide below NORM_DEFECT_BUDGET, which matters for long guides. For periodic profiles whose
    length is a whole number of periods the count is rounded up to a multiple
    of that number, so every period sees the same step grid.
    """
    h = length / 2000
    period = period_of(profile)
    if period is not None:
        h = min(h, period / 64)
    z = np.linspace(0.0, length, _SAMPLES)
    w = profile.width(z)
    db0 = model.mismatch_at_center(w)
    bl = model.slope_lambda(w)
    dl = np.asarray(lambda3, dtype=float) - model.lambda3_center
    lo, hi = float(np.min(dl)), float(np.max(dl))
    db_max = np.maximum(np.abs(db0 + bl * lo), np.abs(db0 + bl * hi))
    g_max = np.asarray(coupling_g(model, w, float(np.max(pump_power))))
    omega = float(np.max(np.sqrt(db_max**2 / 4 + g_max**2)))
    if omega > 0:
        x_budget = (72 * NORM_DEFECT_BUDGET / (omega * length)) ** 0.2
        h = min(h, PHASE_PER_STEP / omega, x_budget / omega)
    n = max(math.ceil(length / h - 1e-9), MIN_STEPS)
    if period is not None:
        periods = round(length / period)
        if periods >= 1 and abs(length / period - periods) < 1e-9:
            n = periods * math.ceil(n / periods)
    if n > MAX_STEPS:
        raise ResourceError(
            f"step rule needs {n} RK4 steps (> {MAX_STEPS}); request a shorter waveguide or a coarser step_count"
        )
    return n


def resolve_step_count(model, profile, length, pump_power, lambda3, settings: PropagationSettings) -> int:
    if settings.step_count is not None:
        return int(settings.step_count)
    return auto_step_count(model, profile, length, pump_power, lambda3)


@numba.njit(cache=True, nogil=True)
def _rk4_kernel(db0, bl, gz, dl, gscale, h, la1, la3, out):
    """Integrate dM/dz = iH M for each batch entry; writes (m11, m12, m21, m22) to ``out``.

    ``db0``, ``bl``, ``gz`` hold delta_beta at the design wavelength, its
    wavelength slope and the unit-pump coupling at the 2n+1 half-step nodes;
    ``dl`` and ``gscale`` are per-entry detuning and sqrt(P/p_ref).
    With iH = [[p, q], [q, r]]: d(m1j) = p m1j + q m2j, d(m2j) = q m1j + r m2j.
    """
    n = (db0.size - 1) // 2
    h2 = 0.5 * h
    h6 = h / 6.0
    for b in range(dl.size):
        d = dl[b]
        sc = gscale[b]
        a11 = 1.0 + 0.0j
        a12 = 0.0j
        a21 = 0.0j
        a22 = 1.0 + 0.0j
        half = 0.5 * (db0[0] + bl[0] * d)
        p0 = complex(la1, half)
        q0 = complex(0.0, gz[0] * sc)
        r0 = complex(la3, -half)
        for k in range(n):
            j = 2 * k + 1
            half = 0.5 * (db0[j] + bl[j] * d)
            p1 = complex(la1, half)
            q1 = complex(0.0, gz[j] * sc)
            r1 = complex(la3, -half)
            half = 0.5 * (db0[j + 1] + bl[j + 1] * d)
            p2 = complex(la1, half)
            q2 = complex(0.0, gz[j + 1] * sc)
            r2 = complex(la3, -half)

            k1_11 = p0 * a11 + q0 * a21
            k1_12 = p0 * a12 + q0 * a22
            k1_21 = q0 * a11 + r0 * a21
            k1_22 = q0 * a12 + r0 * a22
            t11 = a11 + h2 * k1_11
            t12 = a12 + h2 * k1_12
            t21 = a21 + h2 * k1_21
            t22 = a22 + h2 * k1_22
            k2_11 = p1 * t11 + q1 * t21
            k2_12 = p1 * t12 + q1 * t22
            k2_21 = q1 * t11 + r1 * t21
            k2_22 = q1 * t12 + r1 * t22
            t11 = a11 + h2 * k2_11
            t12 = a12 + h2 * k2_12
            t21 = a21 + h2 * k2_21
            t22 = a22 + h2 * k2_22
            k3_11 = p1 * t11 + q1 * t21
            k3_12 = p1 * t12 + q1 * t22
            k3_21 = q1 * t11 + r1 * t21
            k3_22 = q1 * t12 + r1 * t22
            t11 = a11 + h * k3_11
            t12 = a12 + h * k3_12
            t21 = a21 + h * k3_21
            t22 = a22 + h * k3_22
            k4_11 = p2 * t11 + q2 * t21
            k4_12 = p2 * t12 + q2 * t22
            k4_21 = q2 * t11 + r2 * t21
            k4_22 = q2 * t12 + r2 * t22
            a11 = a11 + h6 * (k1_11 + 2.0 * k2_11 + 2.0 * k3_11 + k4_11)
            a12 = a12 + h6 * (k1_12 + 2.0 * k2_12 + 2.0 * k3_12 + k4_12)
            a21 = a21 + h6 * (k1_21 + 2.0 * k2_21 + 2.0 * k3_21 + k4_21)
            a22 = a22 + h6 * (k1_22 + 2.0 * k2_22 + 2.0 * k3_22 + k4_22)
            p0 = p2
            q0 = q2
            r0 = r2
        out[b, 0] = a11
        out[b, 1] = a12
        out[b, 2] = a21
        out[b, 3] = a22


def propagate_batch(
    model: DispersionModel,
    profile: TaperProfile,
    length: float,
    pump_power,
    lambda3,
    settings: PropagationSettings | None = None,
) -> TransferMatrix:
    """Propagate every broadcast (pump_power, lambda3) pair; returns a batched matrix."""
    settings = settings or PropagationSettings()
    if not length > 0:
        raise ValueError("length must be > 0")
    pump, lam = np.broadcast_arrays(np.asarray(pump_power, dtype=float), np.asarray(lambda3, dtype=float))
    shape = pump.shape
    pump = pump.ravel()
    lam = lam.ravel()
    if np.any(pump < 0):
        raise ValueError("pump power must be >= 0")
    if np.any(lam <= 0):
        raise ValueError("lambda3 must be > 0")
    n = resolve_step_count(model, profile, length, pump, lam, settings)
    z = _z_nodes(length, n)
    w = profile.width(z)
    db0 = np.asarray(model.mismatch_at_center(w), dtype=float)
    bl = np.asarray(model.slope_lambda(w), dtype=float)
    c = model.coupling
    gz = np.asarray(coupling_g(model, w, c.p_ref), dtype=float)
    gscale = np.sqrt(pump / c.p_ref)
    a1, a3 = settings.alphas_per_um
    out = np.empty((lam.size, 4), dtype=complex)
    _rk4_kernel(db0, bl, gz, lam - model.lambda3_center, gscale, length / n, -0.5 * a1, -0.5 * a3, out)
    return TransferMatrix(*(out[:, i].reshape(shape) for i in range(4)))


def propagate(
    model: DispersionModel,
    profile: TaperProfile,
    length: float,
    pump_power: float,
    lambda3: float | None = None,
    settings: PropagationSettings | None = None,
) -> TransferMatrix:
    """Transfer matrix M(L) for one idler wavelength (defaults to the design center)."""
    if lambda3 is None:
        lambda3 = model.lambda3_center
    m = propagate_batch(model, profile, length, np.array([pump_power]), np.array([lambda3]), settings)
    return TransferMatrix(*(complex(x[0]) for x in (m.m11, m.m12, m.m21, m.m22)))
