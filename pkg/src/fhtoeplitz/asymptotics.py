"""Two-term picture of the eigenvector and its consequences.

Multiplying the exponential factor 1/(z - z_c) by the algebraic tail of
exp(-S) gives, after an integral representation of (k+1)^{-(2a+1)},

    psi_j ~ A z_c^{-j-1} + B (j+1)^{-(2a+1)}.

Requiring the two terms to interfere at j ~ N yields
Im p = (2a+1) ln N / N + O(1/N), and from it the eigenvalue shift.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .specialfn import gamma_real, sinpi
from .symbol import FHParams, grid_values

__all__ = [
    "EndpointError",
    "TwoTermModel",
    "coeff_A",
    "coeff_B",
    "coeff_B_limit",
    "eigenvalue_shift",
    "interference_ratio",
    "measured_shift",
    "predicted_im_p",
    "prod_j_direct",
    "psi_two_term",
    "tail_term",
    "two_term_model",
]

DENOM_GUARD = 1e-6


class EndpointError(ValueError):
    """Parameters fall in the endpoint regime where the formulas break down."""


def _prefactor(params: FHParams, eps: complex) -> complex:
    return sinpi(params.alpha + params.beta) / (math.pi * complex(eps))


def _min_denominator(z_c: complex, scale: float = 1.0) -> float:
    """min over x in (0, 1] of |1 - z_c x|, with x = exp(-mu / scale)."""
    z_c = complex(z_c)
    # closest point of the segment (0, 1] to 1/z_c, times |z_c|
    target = 1.0 / z_c
    x = min(1.0, max(0.0, target.real))
    return abs(z_c) * abs(target - x) if x > 0.0 else 1.0


def _mu_integral(kernel, s_minus_1: float) -> complex:
    """int_0^inf mu^{s-1} e^{-mu} kernel(mu) dmu, real and imaginary parts separately."""
    out = 0j
    for part in (0, 1):
        def f(mu: float, part: int = part) -> float:
            v = kernel(mu)
            return v.real if part == 0 else v.imag

        # algebraic endpoint weight on [0, 1], plain rule beyond
        v1, _ = quad(lambda m: f(m) * math.exp(-m), 0.0, 1.0, weight="alg", wvar=(s_minus_1, 0.0),
                     epsabs=1e-12, epsrel=1e-11, limit=200)
        v2, _ = quad(lambda m: f(m) * math.exp(-m) * m**s_minus_1, 1.0, math.inf,
                     epsabs=1e-12, epsrel=1e-11, limit=200)
        out += (v1 + v2) * (1.0 if part == 0 else 1j)
    return out


def coeff_A(params: FHParams, eps: complex, z_c: complex) -> complex:
    """A = (sin pi(a+b) / pi eps) int e^{-mu} mu^{2a} / (1 - z_c e^{-mu}) dmu."""
    pref = _prefactor(params, eps)
    if pref == 0:
        return 0j
    if _min_denominator(z_c) < DENOM_GUARD:
        raise EndpointError(f"1 - z_c e^-mu nearly vanishes for z_c = {z_c} (endpoint regime)")
    zc = complex(z_c)
    return pref * _mu_integral(lambda mu: 1.0 / (1.0 - zc * math.exp(-mu)), 2.0 * params.alpha)


def coeff_B(params: FHParams, eps: complex, z_c: complex, j: int, *, exact: bool = False) -> complex:
    """B at index j: -(sin pi(a+b)/pi eps) int e^{-mu} mu^{2a} / (1 - z_c e^{-mu/(j+1)}) dmu.

    With ``exact=True`` the integrand carries the extra factor
    e^{-mu/(j+1)} produced by the rescaling mu -> mu/(j+1); the two-term
    sum is then identical to the convolution `prod_j_direct`.
    """
    pref = _prefactor(params, eps)
    if pref == 0:
        return 0j
    if _min_denominator(z_c) < DENOM_GUARD:
        raise EndpointError(f"1 - z_c e^-mu nearly vanishes for z_c = {z_c} (endpoint regime)")
    zc = complex(z_c)
    r = 1.0 / (int(j) + 1.0)
    if exact:
        kern = lambda mu: math.exp(-mu * r) / (1.0 - zc * math.exp(-mu * r))  # noqa: E731
    else:
        kern = lambda mu: 1.0 / (1.0 - zc * math.exp(-mu * r))  # noqa: E731
    return -pref * _mu_integral(kern, 2.0 * params.alpha)


def coeff_B_limit(params: FHParams, eps: complex, z_c: complex) -> complex:
    """j -> inf limit of B: -(sin pi(a+b)/pi eps) Gamma(2a+1) / (1 - z_c)."""
    return -_prefactor(params, eps) * gamma_real(2.0 * params.alpha + 1.0).value / (1.0 - complex(z_c))


@dataclass(frozen=True)
class TwoTermModel:
    A: complex
    B: complex
    z_c: complex
    alpha: float
    beta: float
    j_ref: int | None = None

    @property
    def exponent(self) -> float:
        return 2.0 * self.alpha + 1.0

    def exp_term(self, j) -> np.ndarray:
        j = np.asarray(j, dtype=float)
        return self.A * np.exp(-(j + 1.0) * np.log(complex(self.z_c)))

    def alg_term(self, j) -> np.ndarray:
        j = np.asarray(j, dtype=float)
        return self.B * (j + 1.0) ** -self.exponent


def two_term_model(params: FHParams, eps: complex, z_c: complex, j_ref: int) -> TwoTermModel:
    A = coeff_A(params, eps, z_c)
    B = coeff_B(params, eps, z_c, j_ref)
    return TwoTermModel(A, B, complex(z_c), params.alpha, params.beta, j_ref)


def psi_two_term(model: TwoTermModel, j) -> np.ndarray | complex:
    """A z_c^{-j-1} + B (j+1)^{-(2a+1)}."""
    if np.any(np.asarray(j) < 0):
        raise ValueError("j must be >= 0")
    out = model.exp_term(j) + model.alg_term(j)
    return complex(out) if np.ndim(out) == 0 else out


def prod_j_direct(params: FHParams, eps: complex, z_c: complex, J: int) -> np.ndarray:
    """psi_j = Gamma(2a+1) sin pi(a+b)/(pi eps z_c) sum_{k<=j} z_c^{k-j} (k+1)^{-(2a+1)}, j < J."""
    s = 2.0 * params.alpha + 1.0
    P = gamma_real(s).value * _prefactor(params, eps) / complex(z_c)
    out = np.empty(J, dtype=complex)
    acc = 0j
    inv = 1.0 / complex(z_c)
    for j in range(J):
        acc = acc * inv + P * (j + 1.0) ** -s
        out[j] = acc
    return out


def predicted_im_p(alpha: float, N: int) -> float:
    """Leading term (2a+1) ln N / N of Im p."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return (2.0 * alpha + 1.0) * math.log(N) / N


def eigenvalue_shift(params: FHParams, p: complex, N: int) -> complex:
    """delta eps / eps = (b + i a cot(p/2)) (2a+1) ln N / N."""
    pr = math.fmod(complex(p).real, 2.0 * math.pi)
    if pr < 0:
        pr += 2.0 * math.pi
    if min(pr, 2.0 * math.pi - pr) < 1e-3:
        raise EndpointError(f"p = {p} within 1e-3 of 0 or 2pi; cot(p/2) diverges")
    cot = 1.0 / math.tan(0.5 * complex(p).real) if isinstance(p, (int, float)) or complex(p).imag == 0 else None
    if cot is None:
        cot = complex(1.0 / np.tan(0.5 * complex(p)))
    return (params.beta + 1j * params.alpha * cot) * predicted_im_p(params.alpha, N)


def measured_shift(eigenvalues: np.ndarray, params: FHParams, l: int) -> complex:
    """(eps^l - a(e^{-2 pi i l/(N-1)})) / eps^l for a labeled spectrum."""
    N = len(eigenvalues)
    g = grid_values(params, N)[l]
    e = complex(eigenvalues[l])
    return (e - g) / e


def tail_term(params: FHParams, eps: complex, j) -> np.ndarray | complex:
    """-Gamma(2a+1) sin pi(a+b) / (pi eps (j+1)^{2a+1})."""
    if np.any(np.asarray(j) < 1):
        raise ValueError("tail_term needs j >= 1")
    s = 2.0 * params.alpha + 1.0
    out = -gamma_real(s).value * _prefactor(params, eps) * (np.asarray(j, dtype=float) + 1.0) ** -s
    return complex(out) if np.ndim(out) == 0 else out


def interference_ratio(model: TwoTermModel, N: int) -> float:
    """|A z_c^{-N}| / |B N^{-(2a+1)}|: order one when the terms interfere at j = N - 1."""
    return float(abs(model.exp_term(N - 1)) / abs(model.alg_term(N - 1)))
