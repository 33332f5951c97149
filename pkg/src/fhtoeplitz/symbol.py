"""The Fisher-Hartwig symbol a(z) = (2 - z - 1/z)^alpha (-z)^beta.

Two forms are provided.  On the unit circle the symbol is written as
(2 - 2 cos t)^alpha exp(i beta (t - pi)), which pins the (-z)^beta branch to
be real and positive at z = -1.  Off the circle the analytic continuation

    a(z) = (z - 1)^(2 alpha) z^(beta - alpha) exp(-i (beta + alpha) pi)

is used, with the arguments of z - 1 and z taken in [0, 2pi): both branch
cuts run along the positive real axis.  The two forms agree on the circle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

__all__ = [
    "BranchedValue",
    "FHParams",
    "SymbolError",
    "WindingError",
    "circle_values",
    "analytic_values",
    "analytic_log_derivative",
    "grid_values",
    "solve_zc",
    "symbol_analytic",
    "symbol_circle",
    "symbol_image",
    "winding_number",
]

TWO_PI = 2.0 * math.pi


class SymbolError(ValueError):
    """Evaluation of the symbol at a singular or ambiguous point."""


class WindingError(ArithmeticError):
    """Winding number cannot be determined reliably."""


@dataclass(frozen=True)
class FHParams:
    """Exponents (alpha, beta) of the Fisher-Hartwig symbol.

    Rational input (e.g. ``Fraction(1, 3)``) is converted once to float.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")

    @property
    def in_study_range(self) -> bool:
        return 0.0 < self.alpha < abs(self.beta) < 1.0

    @property
    def tail_exponent(self) -> float:
        """2 alpha + 1, the decay exponent of the matrix elements."""
        return 2.0 * self.alpha + 1.0

    @property
    def beta_is_integer(self) -> bool:
        return self.beta == round(self.beta)

    def flipped(self) -> "FHParams":
        """Parity image beta -> -beta."""
        return FHParams(self.alpha, -self.beta)


@dataclass(frozen=True)
class BranchedValue:
    value: complex
    # argument intervals used for the factors (z - 1) and z
    branch_arg_convention: tuple[tuple[float, float], tuple[float, float]] = (
        (0.0, TWO_PI),
        (0.0, TWO_PI),
    )


def circle_values(params: FHParams, theta) -> np.ndarray:
    """Vectorised symbol on the unit circle at angles ``theta`` in [0, 2pi].

    theta = 0 (and 2pi) map to the singular point z = 1; the value there is
    the continuous limit, 0 for alpha > 0.
    """
    a, b = params.alpha, params.beta
    theta = np.asarray(theta, dtype=float)
    # 2 - 2cos t loses precision near t = 0; 4 sin^2(t/2) does not
    base = 4.0 * np.sin(0.5 * theta) ** 2
    with np.errstate(divide="ignore"):
        mag = np.where(base > 0.0, np.exp(a * np.log(np.where(base > 0.0, base, 1.0))), 0.0 if a > 0 else 1.0)
    return mag * np.exp(1j * b * (theta - math.pi))


def symbol_circle(params: FHParams, theta: float) -> complex:
    """a(e^{i theta}) for theta in [0, 2pi).

    At theta = 0 the limit 0 is returned when alpha > 0.  For alpha <= 0 the
    point is singular unless alpha = 0 and beta is an integer (then the
    symbol is a plain power of z and continuous there).
    """
    theta = float(theta)
    if not (0.0 <= theta < TWO_PI):
        theta = math.fmod(theta, TWO_PI)
        if theta < 0.0:
            theta += TWO_PI
    if theta == 0.0:
        if params.alpha > 0.0:
            return 0j
        if params.alpha == 0.0 and params.beta_is_integer:
            return complex((-1.0) ** int(round(params.beta)))
        raise SymbolError("symbol is singular at z = 1 for alpha <= 0")
    return complex(circle_values(params, theta))


def _branched_log(z: np.ndarray) -> np.ndarray:
    """log z with arg in [0, 2pi)."""
    ang = np.angle(z)
    ang = np.where(ang < 0.0, ang + TWO_PI, ang)
    return np.log(np.abs(z)) + 1j * ang


def analytic_values(params: FHParams, z) -> np.ndarray:
    """Vectorised analytic continuation; see `symbol_analytic`."""
    a, b = params.alpha, params.beta
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        expo = (b - a) * _branched_log(z) - 1j * (b + a) * math.pi
        if a != 0.0:
            expo = expo + 2.0 * a * _branched_log(z - 1.0)
        return np.exp(expo)


def analytic_log_derivative(params: FHParams, z) -> np.ndarray:
    """a'(z) / a(z) = 2 alpha / (z - 1) + (beta - alpha) / z."""
    z = np.asarray(z, dtype=complex)
    return 2.0 * params.alpha / (z - 1.0) + (params.beta - params.alpha) / z


def symbol_analytic(params: FHParams, z: complex) -> BranchedValue:
    """Analytic continuation of the symbol off the unit circle.

    Raises `SymbolError` at z = 0 and on the cut [0, inf) of the real axis,
    where the one-sided limits differ.
    """
    z = complex(z)
    if z == 0:
        raise SymbolError("z = 0 is a branch point")
    if z.imag == 0.0 and z.real > 0.0:
        raise SymbolError(f"z = {z} lies on the branch cut; use a one-sided limit")
    return BranchedValue(complex(analytic_values(params, z)))


def grid_values(params: FHParams, N: int, denominator: str = "N-1") -> np.ndarray:
    """a(exp(-2 pi i l / d)) for l = 0..N-1, with d = N - 1 (default) or N."""
    d = N - 1 if denominator == "N-1" else N
    p = TWO_PI * np.arange(N) / d
    theta = np.mod(-p, TWO_PI)
    return circle_values(params, theta)


def symbol_image(params: FHParams, m: int) -> np.ndarray:
    """Closed image curve: samples at theta_k = 2 pi k / m, k = 0..m-1.

    m >= 16 is needed for a usable curve; smaller m is accepted for spot
    checks.
    """
    if m < 1:
        raise ValueError("symbol_image needs m >= 1")
    theta = TWO_PI * np.arange(m) / m
    vals = circle_values(params, theta)
    vals[0] = symbol_circle(params, 0.0)
    return vals


def _winding_angles(params: FHParams, m: int) -> np.ndarray:
    """m + 1 angles from 0 to 2pi, clustered at the singular point.

    theta = pi u^q on each half with q = max(1, 1/(2 alpha)), so that
    |a| ~ theta^{2 alpha} grows roughly linearly in the uniform variable u.
    """
    q = max(1.0, 1.0 / (2.0 * params.alpha)) if params.alpha > 0.0 else 1.0
    half = m // 2
    u = np.arange(half + 1) / half
    left = math.pi * u**q
    return np.concatenate([left, TWO_PI - left[-2::-1]])


def winding_number(
    params: FHParams,
    eps: complex,
    m: int = 1024,
    *,
    max_m: int = 2**22,
    min_distance: float = 1e-12,
) -> int:
    """Winding number of a(e^{ip}) - eps as p runs over [0, 2pi].

    The phase is unwrapped on a grid of m steps, doubled until every phase
    step is below pi/2.  The grid is uniform in u with theta = pi u^q near
    each end (see `_winding_angles`), because |a| ~ theta^{2 alpha} leaves
    zero with unbounded slope.
    """
    eps = complex(eps)
    m = max(int(m), 16)
    while True:
        theta = _winding_angles(params, m)
        vals = circle_values(params, theta)
        vals[0] = vals[-1] = symbol_circle(params, 0.0)
        vals = vals - eps
        dist = np.abs(vals).min()
        if dist <= min_distance * max(1.0, abs(eps)):
            raise WindingError(f"eps = {eps} lies on the symbol curve (distance {dist:.3g})")
        steps = np.angle(vals[1:] / vals[:-1])
        if np.abs(steps).max() < 0.5 * math.pi:
            return int(round(steps.sum() / TWO_PI))
        if m >= max_m:
            raise WindingError(f"phase steps still >= pi/2 at m = {m}; eps too close to the curve")
        m *= 2


def solve_zc(
    params: FHParams,
    eps: complex,
    z0: complex,
    *,
    rtol: float = 1e-13,
    max_iter: int = 200,
) -> complex:
    """Root z_c of a(z) = eps outside the unit circle, by damped Newton.

    Raises `SymbolError` when the iteration stalls or lands inside the unit
    circle.
    """
    eps = complex(eps)
    z = complex(z0)
    scale = max(abs(eps), 1e-300)

    def resid(w: complex) -> complex:
        return complex(analytic_values(params, w)) - eps

    f = resid(z)
    for _ in range(max_iter):
        if abs(f) <= rtol * scale:
            break
        aval = f + eps
        deriv = aval * complex(analytic_log_derivative(params, z))
        if deriv == 0:
            raise SymbolError("zero derivative in Newton iteration for z_c")
        step = f / deriv
        lam = 1.0
        while True:
            trial = z - lam * step
            # never step across the cut on the positive real axis
            if trial != 0 and not (abs(trial.imag) < 1e-300 and trial.real > 0):
                ft = resid(trial)
                if np.isfinite(ft) and abs(ft) < abs(f) * (1.0 - 1e-4 * lam) or lam < 1e-10:
                    break
            lam *= 0.5
        if lam < 1e-10:
            raise SymbolError(f"Newton iteration for z_c stalled at z = {z}")
        z, f = trial, ft
    else:
        if abs(f) > 1e-12 * scale:
            raise SymbolError(f"Newton iteration for z_c did not converge (|residual| = {abs(f):.3g})")
    if abs(f) > 1e-12 * scale:
        raise SymbolError(f"z_c residual {abs(f):.3g} above tolerance")
    # eps exactly on the curve legitimately gives |z_c| = 1
    if abs(z) < 1.0 - 1e-12:
        raise SymbolError(f"root z = {z} lies inside the unit circle (wrong branch)")
    return z
