import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taperconv import analytic
from taperconv.dispersion import (
    DesignWavelengths,
    DispersionError,
    PhaseMatchError,
    SyntheticDispersion,
    TableParseError,
    WidthRangeError,
    coupling_g,
    dbeta_dw,
    delta_beta,
    export_tabulated,
    load_tabulated,
    phase_matched_width,
)

M = SyntheticDispersion()
LC = 1.0 / (1.0 / 1550 + 1.0 / 980)


def test_default_calibration():
    assert M.lambda3_center == pytest.approx(LC, rel=1e-15)
    assert M.lambda3_center == pytest.approx(600.39526, abs=1e-5)
    assert M.dbeta_dlambda == pytest.approx(2 * math.pi * 0.2 / LC**2 * 1e3, rel=1e-14)
    area = analytic.area_uniform(coupling_g(M, M.w0, 1.0), 1000.0, M.dbeta_dlambda)
    assert area.value == pytest.approx(0.1114, rel=1e-12)
    assert area.weak_coupling


def test_energy_conservation_enforced():
    # the rounded 600.4 nm misses 1/l1 + 1/l2 by ~1.3e-8 nm^-1
    with pytest.raises(DispersionError, match="energy conservation"):
        DesignWavelengths(1550.0, 980.0, 600.4)


def test_bad_parameters():
    for kw in ({"w0": 0.0}, {"kappa_w": -1.0}, {"dbeta_dlambda": 0.0}, {"g_ref": -1e-4}, {"p_ref": 0.0}):
        with pytest.raises(DispersionError):
            SyntheticDispersion(**kw)


def test_phase_matched_at_design_point():
    assert delta_beta(M, M.w0, M.lambda3_center) == 0.0
    assert phase_matched_width(M, M.lambda3_center) == M.w0


@given(
    dw=st.floats(-50.0, 50.0),
    dl=st.floats(-30.0, 30.0),
)
def test_mismatch_is_bilinear(dw, dl):
    w = M.w0 + dw * 1e-3
    got = delta_beta(M, w, M.lambda3_center + dl)
    assert got == pytest.approx(-M.kappa_w * dw + M.dbeta_dlambda * dl, abs=1e-12)


@given(st.floats(0.0, 100.0), st.floats(0.01, 100.0))
def test_coupling_scales_with_sqrt_power(p, k):
    assert coupling_g(M, M.w0, k**2 * p) == pytest.approx(k * coupling_g(M, M.w0, p), rel=1e-12, abs=1e-300)


@given(st.floats(-40.0, 40.0))
@settings(max_examples=50)
def test_phase_matched_width_residual(offset):
    lam = M.lambda3_center + offset
    w = phase_matched_width(M, lam)
    assert abs(delta_beta(M, w, lam)) < 1e-10


def test_coupling_slope_clamps_with_warning():
    m = SyntheticDispersion(g_slope=0.5)
    with pytest.warns(RuntimeWarning, match="clamped"):
        g = coupling_g(m, m.w0 - 0.01, 1.0)
    assert g == 0.0
    assert coupling_g(m, m.w0 + 0.001, 1.0) == pytest.approx(1.5 * m.g_ref)


def test_negative_pump_rejected():
    with pytest.raises(DispersionError):
        coupling_g(M, M.w0, -1.0)


@pytest.fixture
def table(tmp_path):
    path = export_tabulated(M, tmp_path / "table.csv")
    return load_tabulated(path, design=M.design, coupling=M.coupling)


def test_tabulated_round_trip(table):
    w = np.linspace(table.widths[0], table.widths[-1], 51)
    lam = M.lambda3_center + np.linspace(-10.0, 10.0, 51)
    assert np.max(np.abs(delta_beta(table, w, lam) - delta_beta(M, w, lam))) < 1e-6
    assert table.w0 == pytest.approx(M.w0, abs=1e-9)
    assert table.kappa_w == pytest.approx(M.kappa_w, rel=1e-6)
    assert table.dbeta_dlambda == pytest.approx(M.dbeta_dlambda, rel=1e-9)
    assert np.allclose(dbeta_dw(table, w, M.lambda3_center), -M.kappa_w * 1e3, rtol=1e-6)


def test_tabulated_calibrates_coupling(tmp_path):
    t = load_tabulated(export_tabulated(M, tmp_path / "t.csv"), design=M.design)
    assert t.coupling.g_ref == pytest.approx(M.g_ref, rel=1e-9)


def test_tabulated_width_range(table):
    with pytest.raises(WidthRangeError):
        delta_beta(table, table.widths[-1] + 0.01, M.lambda3_center)


def test_tabulated_phase_match(table):
    lam = M.lambda3_center + 3.0
    assert abs(delta_beta(table, phase_matched_width(table, lam), lam)) < 1e-10


def _write(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    return p


ROWS = "\n".join(f"{w},1.9,{n2},1.95" for w, n2 in zip((0.70, 0.75, 0.80, 0.85), (1.6, 1.62, 1.64, 1.66)))


@pytest.mark.parametrize(
    "text, match",
    [
        ("w,n1,n2,n3\n" + ROWS, "header"),
        ("w_um,n1,n2,n3\n0.7,1.9,1.6\n", ":2: expected 4 columns"),
        ("w_um,n1,n2,n3\n0.7,1.9,x,1.9\n", ":2:"),
        ("w_um,n1,n2,n3\n0.7,1.9,1.6,1.9\n0.7,1.9,1.6,1.9\n", ":3: duplicate width"),
        ("w_um,n1,n2,n3\n0.8,1.9,1.6,1.9\n0.7,1.9,1.6,1.9\n", ":3: non-increasing"),
        ("w_um,n1,n2,n3\n0.7,1.9,nan,1.9\n", "non-finite"),
        ("w_um,n1,n2,n3\n0.7,1.9,1.6,1.9\n", "at least 4"),
        ("", "empty"),
    ],
)
def test_table_parse_errors(tmp_path, text, match):
    with pytest.raises(TableParseError, match=match):
        load_tabulated(_write(tmp_path, text))


def test_table_without_sign_change(tmp_path):
    # mismatch keeps one sign across the whole width range
    with pytest.raises(PhaseMatchError, match="no sign change"):
        load_tabulated(_write(tmp_path, "w_um,n1,n2,n3\n" + ROWS))
