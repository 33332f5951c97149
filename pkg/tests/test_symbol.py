import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fhtoeplitz.quasiparticle import p_psi_least_squares
from fhtoeplitz.symbol import (
    FHParams,
    SymbolError,
    WindingError,
    analytic_log_derivative,
    analytic_values,
    circle_values,
    grid_values,
    solve_zc,
    symbol_analytic,
    symbol_circle,
    symbol_image,
    winding_number,
)

from conftest import FLIPPED, SHIFT, STUDY


def test_params_coerce_and_range():
    from fractions import Fraction

    p = FHParams(Fraction(1, 3), Fraction(-1, 2))
    assert p.alpha == 1 / 3 and p.beta == -0.5
    assert p.in_study_range and not SHIFT.in_study_range
    assert p.tail_exponent == pytest.approx(5 / 3)
    assert p.flipped() == FLIPPED
    with pytest.raises(ValueError):
        FHParams(math.inf, 0.0)


def test_circle_at_pi():
    assert abs(symbol_circle(STUDY, math.pi) - 4 ** (1 / 3)) < 1e-15


def test_circle_vanishes_at_singular_point():
    assert symbol_circle(STUDY, 0.0) == 0
    vals = [abs(symbol_circle(STUDY, t)) for t in (1e-2, 1e-4, 1e-8)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-5


def test_circle_shift_symbol_is_minus_inverse():
    # (2 - z - 1/z)^0 (-z)^(-1) = -1/z; the sign differs from the plain z^-1
    z = cmath.exp(0.5j * math.pi)
    assert abs(symbol_circle(SHIFT, math.pi / 2) - (-1 / z)) < 1e-15
    assert abs(symbol_circle(SHIFT, math.pi / 2) + z ** -1) < 1e-15


def test_circle_singular_for_negative_alpha():
    with pytest.raises(SymbolError):
        symbol_circle(FHParams(-0.2, 0.3), 0.0)


def test_analytic_matches_circle_at_minus_one():
    v = symbol_analytic(STUDY, -1.0).value
    assert abs(v - symbol_circle(STUDY, math.pi)) < 1e-12


def test_analytic_continuation_radially():
    # integrate d ln a / dz along z = r i, r from 1 to 2, starting from the circle value
    def part(k):
        return quad(lambda r: (complex(analytic_log_derivative(STUDY, 1j * r)) * 1j).real if k == 0
                    else (complex(analytic_log_derivative(STUDY, 1j * r)) * 1j).imag, 1.0, 2.0,
                    epsabs=1e-14, epsrel=1e-14)[0]

    start = symbol_circle(STUDY, math.pi / 2)
    oracle = start * cmath.exp(part(0) + 1j * part(1))
    assert abs(symbol_analytic(STUDY, 2j).value - oracle) < 1e-12


def test_analytic_algebraic_decay():
    # |a(z)| |z|^-(alpha+beta) -> 1 as |z| -> inf
    ratios = [abs(symbol_analytic(STUDY, R * cmath.exp(0.7j)).value) / R ** (STUDY.alpha + STUDY.beta)
              for R in (1e2, 1e4, 1e8)]
    assert abs(ratios[-1] - 1.0) < 1e-7
    assert abs(ratios[0] - 1) > abs(ratios[1] - 1) > abs(ratios[2] - 1)


@pytest.mark.parametrize("z", [0.0, 0.5, 2.0])
def test_analytic_rejects_cut(z):
    with pytest.raises(SymbolError):
        symbol_analytic(STUDY, z)


def test_branch_record():
    assert symbol_analytic(STUDY, -2.0).branch_arg_convention == ((0.0, 2 * math.pi), (0.0, 2 * math.pi))


def test_image_small_m():
    img = symbol_image(STUDY, 4)
    assert len(img) == 4 and img[0] == 0
    assert abs(img[2] - 4 ** (1 / 3)) < 1e-15


def test_image_max_modulus_near_pi():
    img = symbol_image(STUDY, 512)
    theta = 2 * math.pi * np.arange(512) / 512
    dense = np.linspace(0.0, 2 * math.pi, 200001)
    t_star = dense[np.argmax(np.abs(circle_values(STUDY, dense)))]
    assert abs(theta[np.argmax(np.abs(img))] - t_star) <= 2 * math.pi / 512


def test_image_shift_on_unit_circle():
    assert np.allclose(np.abs(symbol_image(SHIFT, 64)), 1.0, atol=1e-15)


def test_grid_denominators():
    g1 = grid_values(STUDY, 11)
    g2 = grid_values(STUDY, 11, "N")
    assert g1[0] == 0 and abs(g1[-1]) < 1e-12
    assert abs(g1[5] - symbol_circle(STUDY, math.pi)) < 1e-14
    assert abs(g2[5] - symbol_circle(STUDY, 2 * math.pi - 2 * math.pi * 5 / 11)) < 1e-14


def test_winding_study_and_flipped(decomp):
    assert all(winding_number(STUDY, e, 4096) == -1 for e in decomp(40).eigenvalues)
    assert all(winding_number(FLIPPED, e, 4096) == 1 for e in decomp(40, FLIPPED).eigenvalues)


def test_winding_shift():
    assert winding_number(SHIFT, 0.5, 1024) == -1
    assert winding_number(SHIFT, 2.0, 1024) == 0


def test_winding_on_curve_raises():
    with pytest.raises(WindingError):
        winding_number(STUDY, symbol_circle(STUDY, math.pi))


def test_solve_zc_on_curve():
    t = 2.0
    z = solve_zc(STUDY, symbol_circle(STUDY, t), cmath.exp(1j * t))
    assert abs(z - cmath.exp(1j * t)) < 1e-12


@pytest.mark.parametrize("eps", [0.3, -0.5 + 0.2j, 0.9j])
def test_solve_zc_shift(eps):
    # root of -1/z = eps; for the plain z^-1 symbol it is 1/eps with eps -> -eps
    z = solve_zc(SHIFT, eps, -1.2 / eps)
    assert abs(z - (-1 / eps)) < 1e-12 * abs(z)


def test_solve_zc_study_decay_rate(decomp):
    N = 400
    l = (N - 1) // 4
    d = decomp(N)
    z = solve_zc(STUDY, d.eigenvalue(l), cmath.exp(-2j * math.pi * l / (N - 1)) * (1 + 3 / N))
    im_p = p_psi_least_squares(d.right(l), int(0.2 * N), int(0.5 * N), l, N).imag
    assert abs(z) > 1
    assert abs(math.log(abs(z)) - im_p) < 1e-3 * im_p
    # same order as the leading law (2a+1) ln N / N; the gap is the O(1/N) constant
    assert 0.5 < math.log(abs(z)) / ((5 / 3) * math.log(N) / N) < 2.0


def test_solve_zc_rejects_inside():
    # the interior root of -1/z = eps for |eps| > 1
    with pytest.raises(SymbolError):
        solve_zc(SHIFT, 2.0, -0.5)


study_params = st.tuples(st.floats(0.05, 0.9), st.floats(0.05, 0.95), st.booleans()).filter(
    lambda t: t[0] < t[1] - 0.02).map(lambda t: FHParams(t[0], -t[1] if t[2] else t[1]))


@settings(max_examples=100, deadline=None)
@given(study_params, st.floats(1e-3, 2 * math.pi - 1e-3))
def test_conjugation(params, theta):
    a = symbol_circle(params, 2 * math.pi - theta)
    b = symbol_circle(params, theta).conjugate()
    assert abs(a - b) < 1e-12


@settings(max_examples=50, deadline=None)
@given(study_params, st.floats(0.05, 2 * math.pi - 0.05))
def test_one_sided_consistency(params, theta):
    target = symbol_circle(params, theta)
    z = cmath.exp(1j * theta)
    for side in (1.0, -1.0):
        errs = [abs(complex(analytic_values(params, z * (1 + side * d))) - target) for d in (1e-5, 1e-7, 1e-9)]
        assert errs[2] < 1e-7 * max(1.0, abs(target))
        assert errs[2] <= errs[0] + 1e-14


@settings(max_examples=60, deadline=None)
@given(study_params, st.complex_numbers(max_magnitude=2.5))
def test_winding_sign_flip(params, eps):
    # dense near both ends, where the curve approaches 0 along two rays
    t = 2 * math.pi * np.logspace(-40, 0, 20000)
    curve = circle_values(params, np.concatenate([t, 2 * math.pi - t]))
    assume(np.abs(curve - eps).min() > 1e-2 and np.abs(curve - eps.conjugate()).min() > 1e-2)
    assert winding_number(params, eps) == -winding_number(params.flipped(), eps.conjugate())


@settings(max_examples=60, deadline=None)
@given(study_params, st.floats(0.3, 2 * math.pi - 0.3), st.floats(1e-3, 0.05))
def test_solve_zc_residual(params, theta, push):
    # a point of the curve pushed towards its interior has a root just outside the circle
    z0 = cmath.exp(1j * theta) * (1 + push)
    eps = complex(analytic_values(params, z0))
    try:
        z = solve_zc(params, eps, cmath.exp(1j * theta) * (1 + 0.5 * push))
    except SymbolError:
        return
    assert abs(complex(analytic_values(params, z)) - eps) <= 1e-12 * abs(eps)
    assert abs(z) >= 1 - 1e-12
