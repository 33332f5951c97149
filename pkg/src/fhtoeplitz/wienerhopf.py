"""Wiener-Hopf construction of the semi-infinite eigenvector (winding -1).

For winding number -1 the operator eigenvector is the Taylor series of
psi+(z) = C exp(-G+(z)), where G+ is the "inside" half of ln[z (a(z) - eps)].
Deforming the contour onto the branch cut along [1, inf) splits it as

    G+(z) = L(z) + S(z),   L(z) = ln(z - z_c),
    S(z) = (1/2 pi i) int_1^inf dt/(t - z) ln R(t),

where z_c is the root of a(z) = eps outside the unit circle and R is the
ratio of the two one-sided limits of a(t) - eps across the cut.  Everything
is defined up to an additive constant in G+, which ends up in C.

S is computed with t = 1 + e^u and the trapezoid rule in u, which converges
exponentially because the integrand is analytic in a strip around the real
u axis.  Taylor coefficients come from sampling on |z| = 1 and an FFT, with
the slowly decaying (j+1)^{-(2a+1)} tail removed from the aliasing sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import zeta

from .export import write_csv
from .specialfn import sinpi
from .symbol import FHParams, WindingError, circle_values, solve_zc, winding_number

__all__ = [
    "AliasingError",
    "ComparisonReport",
    "QuadratureError",
    "SQuadrature",
    "ShiftFactorization",
    "WHEigenvector",
    "WindingGateError",
    "coefficient_extraction",
    "compare_with_exact",
    "find_zc",
    "g_plus",
    "psi_s_coeffs",
    "psi_wh_coeffs",
    "s_integral",
    "s_integral_oracle",
    "shift_example_factorization",
    "wh_eigenvector",
]

TWO_PI = 2.0 * math.pi
S_TOL = 1e-11
ALIAS_RTOL = 1e-8
MAX_SAMPLES = 2**20
TAIL_TERMS = 3


class WindingGateError(ValueError):
    """The construction only exists for winding number -1."""


class QuadratureError(ArithmeticError):
    pass


class AliasingError(ArithmeticError):
    pass


def _check_winding(params: FHParams, eps: complex) -> None:
    try:
        nu = winding_number(params, eps, 4096)
    except WindingError as exc:
        raise WindingGateError(str(exc)) from exc
    if nu != -1:
        msg = f"winding number {nu} != -1"
        if nu > 0:
            msg += ": only trivial eigenvector solutions"
        raise WindingGateError(msg)


def find_zc(params: FHParams, eps: complex, z0: complex | None = None) -> complex:
    """z_c with a(z_c) = eps and |z_c| > 1.

    Without a starting point the unit circle is scanned for the closest
    symbol value and Newton is started slightly outside it.
    """
    if z0 is not None:
        return solve_zc(params, eps, z0)
    m = 8192
    theta = TWO_PI * (np.arange(m) + 0.5) / m
    k = int(np.argmin(np.abs(circle_values(params, theta) - eps)))
    last: Exception | None = None
    for dr in (1e-3, 1e-2, 3e-2, 1e-1, 3e-1):
        try:
            zc = solve_zc(params, eps, np.exp(1j * theta[k]) * (1.0 + dr))
        except ArithmeticError as exc:  # pragma: no cover - retried
            last = exc
            continue
        except ValueError as exc:
            last = exc
            continue
        if abs(zc) > 1.0:
            return zc
    raise QuadratureError(f"could not locate z_c for eps = {eps}: {last}")


class SQuadrature:
    """Trapezoid rule for S(z) in the variable u, t = 1 + e^u.

    The node set and ln R(u) are fixed at construction; `__call__` then
    evaluates S at any array of z with |z| <= 1.
    """

    def __init__(self, params: FHParams, eps: complex, *, tol: float = S_TOL, h0: float = 0.4,
                 h_min: float = 0.0125):
        self.params = params
        self.eps = complex(eps)
        a, b = params.alpha, params.beta
        s = a + b
        self.trivial = sinpi(s) == 0.0
        if self.trivial:
            self.h = math.nan
            return
        if s >= 0.0:
            raise QuadratureError("S integral needs alpha + beta < 0 (ratio -> 1 at infinity)")
        rate = 2.0 * a if a > 0.0 else 1.0
        self.u_min = max(-745.0, -40.0 / rate)
        # past u_max the leading tail term is added analytically; the
        # neglected remainder is O(e^{2 s u_max})
        self.u_max = min(700.0, 18.0 / abs(s))
        self._tail_amp = 2j * math.sin(math.pi * s) / self.eps / (2j * math.pi) / abs(s)
        self.s = s
        probes = np.array([-1.0, 1.0, 1j, -1j, 0.0, np.exp(0.05j), np.exp(-0.05j)])
        h = h0
        prev = self._setup(h)(probes)
        while True:
            h *= 0.5
            f = self._setup(h)
            cur = f(probes)
            err = float(np.abs(cur - prev).max())
            if err <= tol:
                break
            if h < h_min:
                raise QuadratureError(f"S quadrature did not converge: achieved {err:.3g} at h = {h}")
            prev = cur
        self.h = h
        self.achieved = err
        self._set(h)

    def _setup(self, h: float):
        self._set(h)
        return self.__call__

    def _set(self, h: float) -> None:
        a, b = self.params.alpha, self.params.beta
        u = np.arange(self.u_min, self.u_max + 0.5 * h, h)
        # (t-1)^{2a} t^{b-a} with t = 1 + e^u, no cancellation
        base = np.exp(2.0 * a * u + (b - a) * np.logaddexp(0.0, u))
        ph = math.pi * (a + b)
        R = (base * np.exp(-1j * ph) - self.eps) / (base * np.exp(1j * ph) - self.eps)
        steps = np.angle(R[1:] / R[:-1])
        if np.abs(steps).max() > 0.5 * math.pi:
            raise QuadratureError("ln R branch jump between adjacent nodes; refine h")
        # unwrap from u = +inf, where R -> 1 and the log is 0
        arg = np.unwrap(np.angle(R[::-1]))[::-1]
        arg -= TWO_PI * round(arg[-1] / TWO_PI)
        self._u = u
        self._eu = np.exp(u)
        self._w = np.log(np.abs(R)) + 1j * arg
        self._w = self._w * self._eu * (h / (2j * math.pi))
        self._w[0] *= 0.5
        self._w[-1] *= 0.5
        self._tail = self._tail_amp * math.exp(self.s * u[-1])
        self.h = h

    def __call__(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.trivial:
            return np.zeros(z.shape, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        flat = z.ravel()
        res = out.ravel()
        chunk = max(1, 2**21 // len(self._u))
        # t - z computed as e^u + (1 - z): exact at z = 1
        for i in range(0, len(flat), chunk):
            omz = 1.0 - flat[i:i + chunk, None]
            res[i:i + chunk] = (self._w / (self._eu + omz)).sum(axis=1)
        return res.reshape(z.shape) + self._tail

    @cached_property
    def at_one(self) -> complex:
        return complex(self(1.0)[0])


def s_integral(params: FHParams, eps: complex, z: complex) -> complex:
    """S(z) = (1/2 pi i) int_1^inf dt/(t - z) ln R(t), for |z| <= 1."""
    z = complex(z)
    if abs(z) > 1.0 + 1e-12:
        raise ValueError("s_integral needs |z| <= 1")
    if sinpi(params.alpha + params.beta) != 0.0:
        _check_winding(params, eps)
    return complex(SQuadrature(params, eps)(z)[0])


def s_integral_oracle(params: FHParams, eps: complex, z: complex, z_c: complex) -> complex:
    """S(z) - S(0) from the unit-circle contour integral of G+, no cut deformation.

    Uses G+(z) - G+(0) = -(1/2pi) int ln(1 - z e^{-it}) a'(e^{it}) e^{it} / (a - eps) dt,
    obtained by integrating the projection formula by parts; the logarithm
    of the symbol never appears, so there is no branch to track.
    """
    from scipy.integrate import quad

    from .symbol import analytic_log_derivative

    def f(t: float, part: int) -> float:
        if t <= 0.0 or t >= TWO_PI:
            return 0.0
        w = complex(math.cos(t), math.sin(t))
        av = complex(circle_values(params, t))
        dlog = complex(analytic_log_derivative(params, w))
        val = -np.log(1.0 - z * np.conj(w)) * (av * dlog * w) / (av - eps) / TWO_PI
        return val.real if part == 0 else val.imag

    tot = 0j
    for part in (0, 1):
        acc = 0.0
        for lo, hi in ((0.0, math.pi), (math.pi, TWO_PI)):
            v, _ = quad(f, lo, hi, args=(part,), limit=400, epsabs=1e-13, epsrel=1e-13)
            acc += v
        tot += acc if part == 0 else 1j * acc
    return tot - complex(np.log(1.0 - z / z_c))


def g_plus(params: FHParams, eps: complex, z: complex, z_c: complex | None = None) -> complex:
    """G+(z) = ln(z - z_c) + S(z), principal log, up to the usual constant."""
    zc = find_zc(params, eps) if z_c is None else z_c
    return complex(np.log(complex(z) - zc)) + s_integral(params, eps, z)


def _aliased_power(n: np.ndarray, M: int, s: float) -> np.ndarray:
    """sum_{m>=0} (n + m M + 1)^{-s}."""
    return M ** -s * zeta(s, (n + 1.0) / M)


def _tail_exponents(s: float) -> list[float]:
    """Leading decay exponents of the coefficients of exp(-S).

    Near z = 1, S - S(1) is a power series in (1-z)^{2a} times analytic
    factors, so the tail runs over (n+1)^{-(k(s-1) + m + 1)}, k >= 1, m >= 0.
    """
    out: list[float] = []
    for k in range(1, TAIL_TERMS + 1):
        for m in range(TAIL_TERMS):
            e = k * (s - 1.0) + m + 1.0
            if all(abs(e - o) > 1e-6 for o in out):
                out.append(e)
    return sorted(out)[:TAIL_TERMS]


def _tail_fit(c: np.ndarray, M: int, s: float) -> tuple[np.ndarray, list[float]]:
    n = np.arange(M // 32, M // 8)
    exps = _tail_exponents(s)
    basis = np.column_stack([_aliased_power(n, M, e) for e in exps])
    K, *_ = np.linalg.lstsq(basis, c[n], rcond=None)
    return K, exps


def coefficient_extraction(samples: np.ndarray, J_max: int, s: float | None) -> tuple[np.ndarray, complex]:
    """First J_max Taylor coefficients from M samples on the unit circle.

    When ``s`` is given the coefficients are assumed to decay like a sum
    of K_k (n+1)^{-e_k} with e_0 = s (see `_tail_exponents`); the K_k are
    fitted on n in [M/32, M/8] and the aliased copies
    sum_{m>=1} K_k (j + m M + 1)^{-e_k} are subtracted.  Returns the
    coefficients and the leading amplitude K_0.
    """
    M = len(samples)
    c = np.fft.fft(samples) / M
    K0 = 0j
    if s is not None and M >= 256:
        K, exps = _tail_fit(c, M, s)
        j = np.arange(J_max)
        c = c.copy()
        for Kk, e in zip(K, exps):
            c[:J_max] -= Kk * (_aliased_power(j, M, e) - (j + 1.0) ** -e)
        K0 = complex(K[0])
    return c[:J_max], K0


def _default_M(J_max: int) -> int:
    return 1 << int(math.ceil(math.log2(32 * J_max)))


@dataclass
class WHEigenvector:
    params: FHParams
    eps: complex
    z_c: complex
    coeffs: np.ndarray = field(repr=False)
    psi_s: np.ndarray = field(repr=False)
    C: complex = 1.0
    M: int = 0
    h: float = math.nan
    aliasing_estimate: float = math.nan
    tail_K: complex = 0j
    S_at_one: complex = 0j

    @property
    def J_max(self) -> int:
        return len(self.coeffs)

    def scaled(self) -> np.ndarray:
        return self.C * self.coeffs


def _extract(params: FHParams, eps: complex, J_max: int, M: int | None, quad: SQuadrature,
             z_c: complex, *, with_exponential: bool) -> tuple[np.ndarray, np.ndarray, int, float, complex]:
    if J_max < 8:
        raise ValueError("J_max must be >= 8")
    M = M or _default_M(J_max)
    s = None if quad.trivial else 2.0 * params.alpha + 1.0
    while True:
        zs = np.exp(TWO_PI * 1j * np.arange(M) / M)
        f = np.exp(-quad(zs))
        cS, K = coefficient_extraction(f, J_max, s)
        cS_half, _ = coefficient_extraction(f[::2], J_max, s)
        if with_exponential:
            psi = _times_inverse_linear(cS, z_c)
            psi_half = _times_inverse_linear(cS_half, z_c)
        else:
            psi, psi_half = cS, cS_half
        est = float(np.abs(psi - psi_half).max())
        scale = float(np.abs(psi).max())
        if est <= ALIAS_RTOL * scale:
            return psi, cS, M, est, K
        if 2 * M > MAX_SAMPLES:
            raise AliasingError(f"aliasing estimate {est:.3g} exceeds {ALIAS_RTOL:g} * max|coeff| at M = {M}")
        M *= 2


def _times_inverse_linear(c: np.ndarray, z_c: complex) -> np.ndarray:
    """Coefficients of (sum c_k z^k) / (z - z_c); psi_j = (psi_{j-1} - c_j) / z_c."""
    out = np.empty_like(c)
    prev = 0j
    inv = 1.0 / z_c
    for j in range(len(c)):
        prev = (prev - c[j]) * inv
        out[j] = prev
    return out


def wh_eigenvector(params: FHParams, eps: complex, J_max: int, *, z_c: complex | None = None,
                   M: int | None = None) -> WHEigenvector:
    """Full Wiener-Hopf record: z_c, coefficients of exp(-G+) and of exp(-S)."""
    eps = complex(eps)
    _check_winding(params, eps)
    zc = find_zc(params, eps) if z_c is None else solve_zc(params, eps, z_c)
    quad = SQuadrature(params, eps)
    psi, cS, M_used, est, K = _extract(params, eps, J_max, M, quad, zc, with_exponential=True)
    return WHEigenvector(params, eps, zc, psi, cS, 1.0, M_used, quad.h, est, K,
                         0j if quad.trivial else quad.at_one)


def psi_wh_coeffs(params: FHParams, eps: complex, J_max: int, *, z_c: complex | None = None,
                  M: int | None = None) -> np.ndarray:
    """Taylor coefficients j < J_max of exp(-G+(z)) (C = 1)."""
    return wh_eigenvector(params, eps, J_max, z_c=z_c, M=M).coeffs


def psi_s_coeffs(params: FHParams, eps: complex, J_max: int, *, M: int | None = None) -> np.ndarray:
    """Taylor coefficients j < J_max of exp(-S(z))."""
    eps = complex(eps)
    if sinpi(params.alpha + params.beta) == 0.0:
        out = np.zeros(J_max, dtype=complex)
        out[0] = 1.0
        return out
    _check_winding(params, eps)
    quad = SQuadrature(params, eps)
    _, cS, _, _, _ = _extract(params, eps, J_max, M, quad, 0j, with_exponential=False)
    return cS


@dataclass(frozen=True)
class ComparisonReport:
    j: np.ndarray
    abs_err: np.ndarray
    rel_err: np.ndarray
    window: tuple[int, int]
    C: complex
    psi_exact: np.ndarray = field(repr=False)
    psi_wh: np.ndarray = field(repr=False)

    def max_abs_error(self, j_max: int | None = None) -> float:
        e = self.abs_err if j_max is None else self.abs_err[: j_max + 1]
        return float(e.max())

    def write_csv(self, path: str | Path, config: dict | None = None) -> Path:
        N = len(self.psi_exact)
        rows = [
            (j, j / (N - 1), ae, re, abs(pe), abs(pw))
            for j, ae, re, pe, pw in zip(self.j, self.abs_err, self.rel_err, self.psi_exact, self.psi_wh)
        ]
        return write_csv(path, ["j", "j_frac", "abs_err", "rel_err", "abs_psi_exact", "abs_psi_wh"], rows, config)


def compare_with_exact(wh: WHEigenvector | np.ndarray, exact, window: Sequence[int] | None = None,
                       *, normalize: str = "none") -> ComparisonReport:
    """Fit C by least squares on the window and report per-j errors.

    ``window`` is an inclusive index range (default [0.2N], [0.5N]).
    ``normalize="max"`` first rescales the exact vector to unit maximum
    modulus, which makes absolute errors independent of how the exact
    eigenvector happened to be normalized.
    """
    exact = np.asarray(exact, dtype=complex)
    if normalize == "max":
        exact = exact / np.abs(exact).max()
    elif normalize != "none":
        raise ValueError(f"unknown normalization {normalize!r}")
    N = len(exact)
    coeffs = wh.coeffs if isinstance(wh, WHEigenvector) else np.asarray(wh, dtype=complex)
    if len(coeffs) < N:
        raise ValueError(f"need at least N = {N} Wiener-Hopf coefficients, got {len(coeffs)}")
    coeffs = coeffs[:N]
    lo, hi = (int(0.2 * N), int(0.5 * N)) if window is None else (int(window[0]), int(window[1]))
    if not (0 <= lo <= hi <= N - 1):
        raise ValueError(f"window [{lo}, {hi}] outside [0, {N - 1}]")
    w = slice(lo, hi + 1)
    C = complex(np.vdot(coeffs[w], exact[w]) / np.vdot(coeffs[w], coeffs[w]))
    fit = C * coeffs
    abs_err = np.abs(fit - exact)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel_err = np.where(np.abs(fit) > 1e-14, np.abs(exact / fit - 1.0), np.nan)
    if isinstance(wh, WHEigenvector):
        wh.C = C
    return ComparisonReport(np.arange(N), abs_err, rel_err, (lo, hi), C, exact, fit)


@dataclass(frozen=True)
class ShiftFactorization:
    """K(z) = z^{-1} - eps = K+(z) / (z K-(z)) with K+ = 1 - eps z, K- = 1."""

    eps: complex
    K_plus: tuple[complex, complex]
    K_minus: tuple[complex]

    def psi(self, J: int, C: complex = 1.0) -> np.ndarray:
        return C * self.eps ** np.arange(J)

    def K(self, z: complex) -> complex:
        return 1.0 / z - self.eps

    def factored(self, z: complex) -> complex:
        kp = self.K_plus[0] + self.K_plus[1] * z
        return kp / (z * self.K_minus[0])


def shift_example_factorization(eps: complex) -> ShiftFactorization:
    """Exact factorization for the shift symbol z^{-1} (the plain z^{-1} sign convention).

    The Fisher-Hartwig symbol with alpha = 0, beta = -1 is -z^{-1}; its
    eigenvalue -eps corresponds to eps here.
    """
    eps = complex(eps)
    if abs(eps) >= 1.0:
        raise ValueError("|eps| must be < 1 (eigenvalue inside the unit circle)")
    return ShiftFactorization(eps, (1.0 + 0j, -eps), (1.0 + 0j,))
