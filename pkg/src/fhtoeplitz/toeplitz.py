"""Fisher-Hartwig Toeplitz matrices.

The diagonals have the closed form

    T(n) = (-1)^n Gamma(2a+1) / (Gamma(a+1+b-n) Gamma(a+1-b+n)),

evaluated through log-gamma so that offsets far beyond the gamma overflow
threshold are fine.  `element_numeric` is the independent Fourier-integral
oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
from scipy.linalg import matmul_toeplitz, toeplitz

from .export import write_csv, write_json
from .specialfn import POLE_TOL, gamma_real, log_gamma_real, sinpi
from .symbol import FHParams, circle_values

__all__ = [
    "ToeplitzMatrix",
    "apply_operator",
    "build_matrix",
    "diagonals",
    "element",
    "element_asymptotic",
    "element_numeric",
    "fourier_elements",
    "operator_truncation_bound",
]


def _check_alpha(params: FHParams) -> None:
    if not params.alpha > -0.5:
        raise ValueError(f"closed-form elements need alpha > -1/2, got {params.alpha}")


def _rgamma_shifted(c: float, m: int) -> tuple[float, float]:
    """1/Gamma(c + m) as (sign, log-magnitude) for integer m.

    For c + m <= 0 the reflection formula is used with
    sin(pi (c + m)) = (-1)^m sin(pi c), so the rounding of c + m never enters
    the sine.  Poles give (0, -inf).
    """
    x = c + m
    if x > 0.0:
        return 1.0, -log_gamma_real(x)
    frac = c - math.floor(c)
    if min(frac, 1.0 - frac) <= POLE_TOL:
        return 0.0, -math.inf
    s = sinpi(c) * (-1.0 if m % 2 else 1.0)
    # 1/Gamma(x) = -x sin(pi x) Gamma(-x) / pi; -x > 0 here
    sign = math.copysign(1.0, s)
    return sign, math.log(-x) + math.log(abs(s)) + log_gamma_real(-x) - math.log(math.pi)


def element(params: FHParams, n: int) -> float:
    """Closed-form diagonal T(n); exactly 0 at a pole of either denominator gamma."""
    _check_alpha(params)
    n = int(n)
    a, b = params.alpha, params.beta
    s1, l1 = _rgamma_shifted(a + 1.0 + b, -n)
    s2, l2 = _rgamma_shifted(a + 1.0 - b, n)
    if s1 == 0.0 or s2 == 0.0:
        return 0.0
    args = (2.0 * a + 1.0, a + 1.0 + b - n, a + 1.0 - b + n)
    if all(x == round(x) and 0 < x < 171 for x in args):
        # integer arguments (e.g. the shift matrix): exact factorials
        g0, g1, g2 = (math.factorial(int(x) - 1) for x in args)
        return float((-1) ** (n % 2) * Fraction(g0, g1 * g2))
    g = gamma_real(2.0 * a + 1.0).value
    sign = s1 * s2 * (-1.0 if n % 2 else 1.0) * math.copysign(1.0, g)
    return sign * math.exp(math.log(abs(g)) + l1 + l2)


def diagonals(params: FHParams, N: int) -> np.ndarray:
    """T(n) for n = -(N-1) .. N-1 (index n + N - 1)."""
    return np.array([element(params, n) for n in range(-(N - 1), N)])


def fourier_elements(params: FHParams, m: int) -> np.ndarray:
    """Plain trapezoid Fourier coefficients with m samples; index n mod m."""
    theta = 2.0 * math.pi * np.arange(m) / m
    vals = circle_values(params, theta)
    return np.fft.fft(vals) / m


def element_numeric(
    params: FHParams,
    n: int,
    m: int = 2**16,
    *,
    extrapolate: bool = True,
) -> complex:
    """(1/2pi) * integral of a(e^{it}) e^{-int} dt by the trapezoid rule.

    The integrand behaves like |t|^{2 alpha} at t = 0 with different phases
    on the two sides, so the trapezoid error runs in powers
    m^{-(2a+1)}, m^{-(2a+2)}, m^{-(2a+3)}, ...  With ``extrapolate`` the
    values at m/8, m/4, m/2, m are combined by Richardson elimination of
    those three terms.
    """
    if m < 256:
        raise ValueError("element_numeric needs m >= 256")
    n = int(n)
    if not extrapolate:
        return complex(fourier_elements(params, m)[n % m])
    # coarser rules are subsamples of the finest one
    theta = 2.0 * math.pi * np.arange(m) / m
    vals = circle_values(params, theta)
    col = []
    for k in (8, 4, 2, 1):
        mk = m // k
        if mk <= 2 * abs(n):
            raise ValueError(f"m = {m} too small for Richardson at n = {n}")
        sub = vals[::k]
        col.append(complex(np.dot(sub, np.exp(-1j * n * theta[::k])) / mk))
    s = 2.0 * params.alpha + 1.0
    for e in (s, s + 1.0, s + 2.0):
        f = 2.0**e
        col = [(f * col[i + 1] - col[i]) / (f - 1.0) for i in range(len(col) - 1)]
    return col[0]


def element_asymptotic(params: FHParams, n: int, convention: str = "literal") -> float:
    """Large-|n| law -Gamma(2a+1) sin(pi(a +- b)) / (pi |n +- b|^(2a+1)).

    The sine uses a + b for n > 0 and a - b for n < 0.  ``convention``
    selects the shift of the base: "literal" uses |n + b|, "centered" uses
    |n - b|, which is the shift that the exact gamma ratio actually follows
    (error O(n^-2) instead of O(n^-1)).
    """
    n = int(n)
    if n == 0:
        raise ValueError("element_asymptotic needs |n| >= 1")
    a, b = params.alpha, params.beta
    s = sinpi(a + b) if n > 0 else sinpi(a - b)
    if convention == "literal":
        base = abs(n + b)
    elif convention == "centered":
        base = abs(n - b)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    g = gamma_real(2.0 * a + 1.0).value
    return -g * s / (math.pi * base ** (2.0 * a + 1.0))


@dataclass(frozen=True)
class ToeplitzMatrix:
    """Order-N Toeplitz matrix stored as its 2N-1 diagonals."""

    params: FHParams
    N: int
    diagonals: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.diagonals, dtype=float)
        if d.shape != (2 * self.N - 1,):
            raise ValueError(f"expected {2 * self.N - 1} diagonals, got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("non-finite matrix element")
        d.setflags(write=False)
        object.__setattr__(self, "diagonals", d)

    def diag(self, n: int) -> float:
        return float(self.diagonals[n + self.N - 1])

    def entry(self, j: int, k: int) -> float:
        return self.diag(j - k)

    def dense(self) -> np.ndarray:
        N = self.N
        col = self.diagonals[N - 1:]          # T(0), T(1), ...
        row = self.diagonals[N - 1::-1]       # T(0), T(-1), ...
        return toeplitz(col, row)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        N = self.N
        return matmul_toeplitz((self.diagonals[N - 1:], self.diagonals[N - 1::-1]), np.asarray(x))

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha1(self.diagonals.tobytes()).hexdigest()[:12]
        return f"FH(alpha={self.params.alpha!r}, beta={self.params.beta!r}, N={self.N}, sha1={h})"

    def to_record(self) -> dict[str, Any]:
        return {
            "alpha": self.params.alpha,
            "beta": self.params.beta,
            "N": self.N,
            "diagonals": self.diagonals.tolist(),
        }

    def write_json(self, path: str | Path) -> Path:
        return write_json(path, self.to_record())

    def write_csv(self, path: str | Path) -> Path:
        A = self.dense()
        header = [f"c{k}" for k in range(self.N)]
        cfg = {"alpha": self.params.alpha, "beta": self.params.beta, "N": self.N}
        return write_csv(path, header, A.tolist(), cfg)


def build_matrix(params: FHParams, N: int) -> ToeplitzMatrix:
    if N < 2:
        raise ValueError("N must be >= 2")
    return ToeplitzMatrix(params, int(N), diagonals(params, N))


def apply_operator(
    params: FHParams,
    vec,
    j_max: int,
    *,
    check_headroom: bool = True,
) -> np.ndarray:
    """Rows j < j_max of the semi-infinite operator applied to a truncated vector.

    out_j = sum_{k < M} T(j - k) vec_k with M = len(vec).  Use
    `operator_truncation_bound` for the neglected k >= M part.
    """
    vec = np.asarray(vec)
    M = len(vec)
    if check_headroom and M < 4 * j_max:
        raise ValueError(f"need len(vec) >= 4*j_max, got {M} < {4 * j_max}")
    col = np.array([element(params, j) for j in range(j_max)])
    row = np.array([element(params, -k) for k in range(M)])
    return matmul_toeplitz((col, row), vec)


def operator_truncation_bound(params: FHParams, M: int, j_max: int, vec_sup: float = 1.0) -> float:
    """Bound on sum_{k >= M} |T(j - k)| * sup|vec| for j < j_max.

    Uses the asymptotic element size and the integral comparison
    sum_{m >= d} m^{-s} <= d^{1-s}/(s-1) + d^{-s}.
    """
    a, b = params.alpha, params.beta
    s = 2.0 * a + 1.0
    d = M - j_max + 1
    amp = abs(gamma_real(s).value * sinpi(a - b)) / math.pi
    if s <= 1.0:
        return math.inf
    return amp * (d ** (1.0 - s) / (s - 1.0) + d ** (-s)) * vec_sup
