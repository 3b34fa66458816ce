import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from taperconv.dispersion import SyntheticDispersion, delta_beta
from taperconv.profile import (
    Cosine,
    Linear,
    Piecewise,
    ProfileError,
    Uniform,
    dbeta_dz,
    load_piecewise,
    period_of,
    width_at,
)

M = SyntheticDispersion()


def test_linear_endpoints():
    p = Linear(0.8, 4.0, 1000.0)
    assert width_at(p, 0.0) == pytest.approx(0.798)
    assert width_at(p, 500.0) == pytest.approx(0.8)
    assert width_at(p, 1000.0) == pytest.approx(0.802)
    assert np.all(p.slope(np.array([0.0, 700.0])) == pytest.approx(4e-6))


def test_linear_domain():
    p = Linear(0.8, 4.0, 1000.0)
    with pytest.raises(ProfileError):
        p.width(1000.1)
    with pytest.raises(ProfileError):
        p.width(-1.0)
    with pytest.raises(ProfileError):
        Linear(0.8, 4.0, 0.0)
    with pytest.raises(ProfileError):
        Linear(0.001, 4.0, 10.0)


@given(st.floats(0.0, 5000.0), st.integers(1, 20), st.floats(1.0, 1000.0))
def test_cosine_is_periodic(z, k, period):
    p = Cosine(0.8, 6.0, period)
    assert p.width(z + k * period) == pytest.approx(p.width(z), abs=1e-12)


def test_cosine_shape():
    p = Cosine(0.8, 6.0, 400.0)
    assert width_at(p, 0.0) == pytest.approx(0.797)
    assert width_at(p, 200.0) == pytest.approx(0.803)
    assert period_of(p) == 400.0
    assert period_of(Linear(0.8, 1.0, 10.0)) is None


def test_uniform():
    p = Uniform(0.8)
    assert np.all(p.width(np.linspace(0, 100, 5)) == 0.8)
    assert dbeta_dz(p, M, 3.0, M.lambda3_center) == 0.0
    with pytest.raises(ProfileError):
        Uniform(0.0)


@given(st.floats(-10.0, 10.0).filter(lambda d: abs(d) > 1e-3), st.floats(100.0, 10000.0), st.floats(0.0, 1.0))
def test_linear_sweep_rate(dw, length, frac):
    rate = dbeta_dz(Linear(M.w0, dw, length), M, frac * length, M.lambda3_center)
    assert rate == pytest.approx(-M.kappa_w * dw / length, rel=1e-12)


def test_cosine_chain_rule():
    p = Cosine(M.w0, 4.0, 500.0)
    lam = M.lambda3_center + 1.0
    for z in (37.0, 125.0, 333.0):
        h = 1e-3
        fd = (delta_beta(M, p.width(z + h), lam) - delta_beta(M, p.width(z - h), lam)) / (2 * h)
        assert dbeta_dz(p, M, z, lam) == pytest.approx(fd, rel=1e-6)


def test_piecewise_interpolates_and_clamps():
    p = Piecewise(np.array([0.0, 100.0, 300.0]), np.array([0.8, 0.81, 0.79]))
    assert width_at(p, 50.0) == pytest.approx(0.805)
    assert p.slope(np.array([50.0]))[0] == pytest.approx(1e-4)
    with pytest.warns(RuntimeWarning, match="outside"):
        assert width_at(p, 400.0) == pytest.approx(0.79)


@pytest.mark.parametrize(
    "z, w",
    [([0.0], [0.8]), ([0.0, 0.0], [0.8, 0.8]), ([0.0, 1.0], [0.8, -0.1])],
)
def test_piecewise_validation(z, w):
    with pytest.raises(ProfileError):
        Piecewise(np.array(z), np.array(w))


def test_load_piecewise(tmp_path):
    good = tmp_path / "p.csv"
    good.write_text("# measured\nz_um,w_um\n0,0.8\n500,0.802\n1000,0.801\n")
    p = load_piecewise(good)
    assert width_at(p, 250.0) == pytest.approx(0.801)
    bad = tmp_path / "q.csv"
    bad.write_text("z_um,w_um\n0,0.8\n0,0.81\n")
    with pytest.raises(ProfileError, match=":3:"):
        load_piecewise(bad)
    with pytest.raises(ProfileError, match="header"):
        load_piecewise(_text(tmp_path, "z,w\n0,1\n"))
    assert math.isclose(p.w[-1], 0.801)


def _text(tmp_path, s):
    f = tmp_path / "x.csv"
    f.write_text(s)
    return f
