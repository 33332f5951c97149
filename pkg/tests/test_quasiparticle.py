import decimal
import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fhtoeplitz.eigensolver import SpectralDecomposition, solve
from fhtoeplitz.quasiparticle import (
    TableRow,
    fit_log_law,
    label_for_rule,
    momentum_record,
    p_from_eigenvalue,
    p_from_eigenvector,
    p_psi_least_squares,
    p_psi_table,
    qp_table,
    spacing_report,
    table_window,
)
from fhtoeplitz.symbol import analytic_values, grid_values

from conftest import STUDY

GOLDEN = json.loads((Path(__file__).parent / "golden" / "printed_tables.json").read_text())
COLUMNS = ("value_psi", "value_eps", "diff_e6", "diff_Nk", "value_psi_N", "residual")


def half_unit(printed: str) -> float:
    return 0.5 * 10.0 ** decimal.Decimal(printed).as_tuple().exponent


def test_label_rules():
    assert label_for_rule("half", 100) == 49
    assert label_for_rule("quarter", 400) == 99
    assert label_for_rule("golden-literal", 40) == 24
    # the rule that reproduces the printed golden-ratio table
    assert label_for_rule("golden", 40) == 23 and label_for_rule("golden", 100) == 60
    assert label_for_rule("golden", 400) == label_for_rule("golden-literal", 400)
    with pytest.raises(ValueError):
        label_for_rule("third", 10)


def test_pure_exponential():
    p0 = 1.3 + 0.02j
    psi = np.exp(1j * p0 * np.arange(200))
    l = round(1.3 * 199 / (2 * math.pi))
    for j, J in ((10, 50), (40, 160), (0, 199)):
        assert abs(p_from_eigenvector(psi, j, J, l, 200) - p0) < 1e-12
        assert abs(p_psi_least_squares(psi, j, J, l, 200) - p0) < 1e-12


def test_window_validation():
    with pytest.raises(ValueError):
        p_from_eigenvector(np.ones(10), 5, 5, 0, 10)
    with pytest.raises(ValueError):
        p_from_eigenvector(np.ones(10), 2, 10, 0, 10)
    with pytest.raises(ValueError):
        table_window(10, "imag", "wide")


def test_table_windows():
    assert table_window(100, "imag") == (19, 49)
    assert table_window(100, "real") == (19, 50)
    assert table_window(100, "real", "literal") == (20, 50)


def test_im_p_psi_n100(decomp):
    assert abs(p_psi_table(decomp(100).right(49), 49, 100).imag - 0.101950) < 2e-6


def test_im_p_psi_n100_literal_window_differs(decomp):
    # the two-point formula on 0-based indices [0.2N], [0.5N] misses the printed
    # 0.101950 by ~1e-4; the printed digits need the window of `table_window`
    v = p_psi_table(decomp(100).right(49), 49, 100, window="literal").imag
    assert 5e-5 < abs(v - 0.101950) < 5e-4


def test_im_p_psi_golden_n40(decomp):
    l = label_for_rule("golden", 40)
    assert abs(p_psi_table(decomp(40).right(l), l, 40).imag - 0.212772) < 2e-6


def test_im_p_psi_golden_literal_label_differs(decomp):
    # l = [(sqrt5 - 1)(N - 1)/2] = 24 does not give the printed 0.212772; l = 23 does
    v = p_psi_table(decomp(40).right(24), 24, 40).imag
    assert abs(v - 0.212772) > 1e-4


@pytest.mark.parametrize("p0", [0.7 + 0.01j, 2.5 + 0.05j, 4.0 + 0.002j])
def test_eigenvalue_round_trip(p0):
    N = 200
    l = round(p0.real * (N - 1) / (2 * math.pi))
    # a(exp(-i p0)) with |exp(-i p0)| = exp(Im p0) > 1
    eps = complex(analytic_values(STUDY, np.exp(-1j * p0)))
    assert abs(p_from_eigenvalue(eps, l, N, STUDY) - p0) < 1e-12


def test_im_p_eps_n100(decomp):
    assert abs(p_from_eigenvalue(decomp(100).eigenvalue(49), 49, 100, STUDY).imag - 0.101961) < 2e-6


def test_re_q_eps_n40_half(decomp):
    l = label_for_rule("half", 40)
    r = momentum_record(decomp(40), l)
    assert abs(r.q_eps.real * 1e6 - 4274.71) < 0.005


def test_re_q_eps_n40_quarter_differs(decomp):
    # the quarter rule gives a different value, so the table uses the half rule
    r = momentum_record(decomp(40), 9)
    assert abs(r.q_eps.real * 1e6 - 4274.71) > 100


def test_fit_exact_points():
    pts = [(N, (5 / 3) * math.log(N) + 1.0) for N in (40, 100, 400, 2000)]
    fit = fit_log_law(pts, 1 / 3)
    assert abs(fit.C - 1.0) < 1e-13
    assert all(abs(r) < 1e-13 for r in fit.residuals.values())
    assert abs(fit.ls_slope - 5 / 3) < 1e-12


def printed(table, col):
    return [(N, float(v)) for N, v in zip(GOLDEN["N"], GOLDEN[table][col])]


def test_fit_printed_table1_column():
    fit = fit_log_law(printed("table1", "value_psi_N"), 1 / 3)
    assert fit.anchor_N == 2000
    # printed to three decimals (15.308 - (5/3) ln 2000 = 2.6398)
    assert abs(fit.C - 2.639) < 1e-3
    assert abs(fit.residuals[40] - (-0.258)) < 5e-4
    assert abs(fit.ls_slope - 1.728) < 5e-4


def test_fit_single_point_and_errors():
    fit = fit_log_law([(40, 8.5)], 1 / 3)
    assert fit.residuals == {40: 0.0} and math.isnan(fit.ls_slope)
    with pytest.raises(ValueError):
        fit_log_law([], 1 / 3)
    with pytest.raises(ValueError):
        fit_log_law([(40, 1.0)], 1 / 3, anchor=100)


def test_qp_table_rows_and_header():
    rows, fit = qp_table(STUDY, [40, 100], "half", "imag_p")
    assert [r.N for r in rows] == [100, 40]
    assert len(TableRow.HEADER) == len(rows[0].as_tuple())
    assert rows[0].residual == 0.0 and fit.anchor_N == 100
    with pytest.raises(ValueError):
        qp_table(STUDY, [40], "half", "both")


def rounding_floor(N, l):
    # eigenvalue condition number |psi|^2 (pairing normalized to 1) times
    # machine epsilon and |T|; two independent double-precision solves may
    # differ by several times this
    kappa = np.linalg.norm(solve(STUDY, N).right(l)) ** 2
    return 10.0 * kappa * np.finfo(float).eps * 3.0


def check_rows(table, rows, Ns, columns=COLUMNS):
    g = GOLDEN[table]
    scale = 1e6 if g["part"] == "real_q" else 1.0
    bad = []
    for r in rows:
        if r.N not in Ns:
            continue
        i = GOLDEN["N"].index(r.N)
        got = dict(zip(TableRow.HEADER, r.as_tuple()))
        for col in columns:
            key = col if col in g else col + "_e6"
            s = g[key][i]
            v = got[col] * (scale if col in ("value_psi", "value_eps") else 1.0)
            floor = rounding_floor(r.N, r.l) * (scale if col in ("value_psi", "value_eps") else r.N)
            if table == "table1" and r.N == 1000 and col == "value_psi_N":
                # printed 14.146 contradicts the printed 0.0141435 * 1000
                s = "14.1435"
            if abs(v - float(s)) > max(half_unit(s) * 1.0001, floor):
                bad.append((r.N, col, s, v))
    return bad


@pytest.mark.parametrize("table", ["table1", "table2", "table3", "table4"])
def test_tables_desk_scale(table):
    g = GOLDEN[table]
    Ns = [40, 100, 200, 400]
    rows, _ = qp_table(STUDY, Ns, g["l_rule"], g["part"])
    assert check_rows(table, rows, Ns, COLUMNS[:4]) == []


@pytest.mark.extended
@pytest.mark.parametrize("table", ["table1", "table2", "table3", "table4"])
def test_tables_full(table):
    g = GOLDEN[table]
    rows, fit = qp_table(STUDY, GOLDEN["N"], g["l_rule"], g["part"])
    assert check_rows(table, rows, GOLDEN["N"]) == []
    if "fit_constant" in g:
        s = g["fit_constant"]
        assert abs(fit.C - float(s)) <= half_unit(s)


@pytest.mark.extended
def test_table_rows_named_in_examples():
    rows, _ = qp_table(STUDY, GOLDEN["N"], "half", "imag_p")
    assert abs(rows[0].value_psi - 0.00765381) < 5e-9 and abs(rows[0].value_eps - 0.00765381) < 5e-9
    rows, _ = qp_table(STUDY, GOLDEN["N"], "golden", "imag_p")
    assert abs(rows[1].value_psi - 0.0140678) < 5e-8
    rows, _ = qp_table(STUDY, GOLDEN["N"], "half", "real_q")
    assert abs(rows[4].value_psi * 1e6 - 1265.36) < 5e-3


def test_spacing_n100(decomp):
    rep = spacing_report(decomp(100))
    assert rep.central_max_deviation < 0.1


def test_spacing_exact_grid():
    N = 60
    g = grid_values(STUDY, N)
    # a(exp(-i p)) on the circle itself: p_eps is the grid momentum
    d = SpectralDecomposition(N, STUDY, g, np.eye(N, dtype=complex), g, np.zeros(N))
    rep = spacing_report(d)
    assert np.allclose(rep.ratio, 1.0, atol=1e-9)


def test_spacing_endpoint_band(decomp):
    rep = spacing_report(decomp(100))
    flagged = rep.l[rep.endpoint]
    assert flagged.size and (flagged < 0.05 * 99).any() and (flagged > 0.95 * 99).any()
    assert not (rep.central_mask & rep.endpoint).any()


@pytest.mark.parametrize("rule", ["half", "golden"])
def test_consistency_scaling(rule):
    # |Im diff| N^3 and |Re diff| N^2 stay within a factor 4 of their N = 200 values
    vals = {}
    for N in (40, 100, 200, 400):
        l = label_for_rule(rule, N)
        r = momentum_record(solve(STUDY, N), l)
        d = r.p_psi - r.p_eps
        vals[N] = (abs(d.imag) * N**3, abs(d.real) * N**2)
    for k in (0, 1):
        ref = vals[200][k]
        assert all(ref / 4 <= v[k] <= 4 * ref for v in vals.values())


@pytest.mark.parametrize("rule", ["half", "golden"])
def test_window_independence(rule):
    out = []
    for N in (100, 200, 400, 800):
        l = label_for_rule(rule, N)
        psi = solve(STUDY, N).right(l)
        a = p_from_eigenvector(psi, int(0.2 * N), int(0.5 * N), l, N)
        b = p_from_eigenvector(psi, int(0.3 * N), int(0.6 * N), l, N)
        out.append(abs(a - b) * N)
    # difference * N trends to 0; the golden labels jitter with rounding of l
    slope = np.polyfit(np.log([100, 200, 400, 800]), np.log(out), 1)[0]
    assert slope < -0.2 and out[-1] < out[0]


def test_re_p_half_approaches_pi():
    dev = []
    for N in (40, 100, 200, 400, 800):
        l = label_for_rule("half", N)
        dev.append(abs(momentum_record(solve(STUDY, N), l).p_psi.real - math.pi))
    assert all(a > b for a, b in zip(dev, dev[1:]))
    assert dev[-1] < 0.005


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 2 * math.pi - 0.05), st.floats(-0.1, 0.1), st.integers(0, 100), st.integers(5, 100))
def test_pure_exponential_property(re, im, j, width):
    N = 300
    p0 = complex(re, im)
    psi = np.exp(1j * p0 * np.arange(N))
    l = round(re * (N - 1) / (2 * math.pi))
    assert abs(p_from_eigenvector(psi, j, j + width, l, N) - p0) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.floats(0.2, 2 * math.pi - 0.2), st.floats(0.001, 0.08))
def test_eigenvalue_round_trip_property(re, im):
    N = 400
    p0 = complex(re, im)
    l = round(re * (N - 1) / (2 * math.pi))
    eps = complex(analytic_values(STUDY, np.exp(-1j * p0)))
    assert abs(p_from_eigenvalue(eps, l, N, STUDY) - p0) < 1e-10
