"""Real-argument gamma and log-gamma.

The gamma function is evaluated with the 13-term Lanczos rational
approximation (g = 6.0246800407767...), the same coefficient set used by
Boost and cephes, and the reflection formula below x = 0.5.  Poles at the
non-positive integers are reported explicitly instead of being
extrapolated through.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "GammaValue",
    "POLE_TOL",
    "gamma_real",
    "log_gamma_real",
    "nearest_pole_distance",
    "rgamma_sign_log",
    "sinpi",
]

POLE_TOL = 1e-12

_LANCZOS_G = 6.024680040776729583740234375
_LANCZOS_GMH = _LANCZOS_G - 0.5

# exp(-g)-scaled Lanczos sum, numerator and denominator in decreasing powers.
_NUM = (
    0.006061842346248906525783753964555936883222,
    0.5098416655656676188125178644804694509993,
    19.51992788247617482847860966235652136208,
    449.9445569063168119446858607650988409623,
    6955.999602515376140356310115515198987526,
    75999.29304014542649875303443598909137092,
    601859.6171681098786670226533699352302507,
    3481712.15498064590882071018964774556468,
    14605578.08768506808414169982791359218571,
    43338889.32467613834773723740590533316085,
    86363131.28813859145546927288977868422342,
    103794043.1163445451906271053616070238554,
    56906521.91347156388090791033559122686859,
)
_DEN = (
    1.0, 66.0, 1925.0, 32670.0, 357423.0, 2637558.0, 13339535.0,
    45995730.0, 105258076.0, 150917976.0, 120543840.0, 39916800.0, 0.0,
)

_EULER = 0.57721566490153286061
# ln Gamma(1 + e) = -gamma*e + sum_k c_k e^k,  c_k = (-1)^k zeta(k) / k
_SERIES_AT_ONE = (
    0.82246703342411321824, -0.40068563438653142847, 0.27058080842778454788,
    -0.20738555102867398527, 0.16955717699740818995, -0.14404989676884611812,
    0.12550966952474304242, -0.11133426586956469049, 0.10009945751278180853,
    -0.090954017145829042233, 0.083353840546109004025, -0.076932516411352191473,
    0.071432946295361336059, -0.066668705882420468033, 0.062500955141213040742,
    -0.058823978658684582339, 0.055555767627403611102, -0.052631679379616660734,
    0.05000004769810169364, -0.047619070330142227991, 0.045454556293204669442,
    -0.043478266053040259361, 0.041666669150341210469, -0.040000001192140140586,
    0.038461539034675185706, -0.037037037312989325549, 0.035714285847333358028,
    -0.034482758684919300811, 0.033333333364377581081,
)
# ln Gamma(2 + e) = (1 - gamma)*e + sum_k d_k e^k,  d_k = (-1)^k (zeta(k) - 1) / k
_SERIES_AT_TWO = (
    0.32246703342411321824, -0.067352301053198095133, 0.020580808427784547879,
    -0.0073855510286739852663, 0.0028905103307415232858, -0.0011927539117032609771,
    0.00050966952474304242234, -0.00022315475845357937976, 0.000099457512781808533715,
    -0.0000449262367381331417, 0.000020507212775670691553, -9.439488275268395904e-6,
    4.3748667899074878042e-6, -2.0392157538013662368e-6, 9.5514121304074198329e-7,
    -4.4924691987645660433e-7, 2.1207184805554665869e-7, -1.0043224823968099609e-7,
    4.7698101693639805658e-8, -2.271109460894316491e-8, 1.0838659214896954091e-8,
    -5.1834750419700466551e-9, 2.4836745438024783172e-9, -1.1921401405860912074e-9,
    5.7313672416788620133e-10, -2.7595228851242331452e-10, 1.3304764374244489481e-10,
    -6.4229645638381000221e-11, 3.1044247747322272762e-11,
)
_SERIES_RADIUS = 0.25
_GAMMA_MAX_ARG = 171.6243769563027


class GammaOverflowError(OverflowError):
    """Gamma(x) is not representable as a double."""


@dataclass(frozen=True)
class GammaValue:
    value: float
    is_pole: bool

    def __float__(self) -> float:
        return self.value


def nearest_pole_distance(x: float) -> float:
    """Distance from x to the nearest non-positive integer."""
    if x > 0.0:
        return x
    return abs(x - round(x))


def sinpi(x: float) -> float:
    """sin(pi*x) with exact argument reduction."""
    r = math.fmod(x, 2.0)
    if r < 0.0:
        r += 2.0
    # r in [0, 2)
    sign = 1.0
    if r >= 1.0:
        r -= 1.0
        sign = -1.0
    if r > 0.5:
        r = 1.0 - r
    if r == 0.0:
        return 0.0 * sign
    if r <= 0.25:
        return sign * math.sin(math.pi * r)
    return sign * math.cos(math.pi * (0.5 - r))


def _lanczos_sum_scaled(x: float) -> float:
    if x < 5.0:
        num = 0.0
        den = 0.0
        for a, b in zip(_NUM, _DEN):
            num = num * x + a
            den = den * x + b
    else:
        # same rational function in 1/x; keeps the powers bounded for large x
        y = 1.0 / x
        num = 0.0
        den = 0.0
        for a, b in zip(reversed(_NUM), reversed(_DEN)):
            num = num * y + a
            den = den * y + b
    return num / den


def _y_and_correction(x: float) -> tuple[float, float]:
    """x + g - 1/2 and the relative correction for its rounding error."""
    y = x + _LANCZOS_GMH
    if x > _LANCZOS_GMH:
        err = (y - x) - _LANCZOS_GMH
    else:
        err = (y - _LANCZOS_GMH) - x
    return y, err * _LANCZOS_G / y


def _gamma_positive(x: float) -> float:
    if x > _GAMMA_MAX_ARG:
        raise GammaOverflowError(f"gamma({x!r}) overflows")
    y, corr = _y_and_correction(x)
    r = _lanczos_sum_scaled(x) * math.exp(0.5 - x)
    r += corr * r
    if x < 140.0:
        return r * y ** (x - 0.5)
    half = y ** (0.5 * x - 0.25)
    return r * half * half


def gamma_real(x: float) -> GammaValue:
    """Gamma function for real x.

    Returns ``GammaValue(nan, True)`` within `POLE_TOL` of a non-positive
    integer.  Raises `GammaOverflowError` when |Gamma(x)| exceeds the double
    range (x > ~171.6) and `ValueError` for non-finite input.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"gamma_real needs a finite argument, got {x!r}")
    if x <= 0.0 and nearest_pole_distance(x) <= POLE_TOL:
        return GammaValue(math.nan, True)
    if x.is_integer() and x <= 171.0:
        return GammaValue(float(math.factorial(int(x) - 1)), False)
    if 0.0 < x < 1.0 / 1.7e308:
        raise GammaOverflowError(f"gamma({x!r}) exceeds the double range")
    if x >= 0.5:
        return GammaValue(_gamma_positive(x), False)
    # Gamma(x) = -pi / (x sin(pi x) Gamma(-x)); -x is exact
    s = sinpi(x)
    if x > -0.5:
        # Gamma(1 - x) with 1 - x in (0.5, 1.5) has no cancellation issue
        return GammaValue(math.pi / (s * _gamma_positive(1.0 - x)), False)
    if -x > _GAMMA_MAX_ARG:
        raise GammaOverflowError(f"gamma({x!r}) underflows the double range")
    return GammaValue(-math.pi / (x * s * _gamma_positive(-x)), False)


def _series(e: float, lead: float, coeffs: tuple[float, ...]) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * e + c
    return e * (lead + e * acc)


def log_gamma_real(x: float) -> float:
    """ln Gamma(x) for x > 0.

    Near the zeros at x = 1 and x = 2 the Taylor series with zeta-value
    coefficients is used, so the result stays accurate relative to its own
    (small) magnitude.
    """
    x = float(x)
    if not (x > 0.0) or not math.isfinite(x):
        raise ValueError(f"log_gamma_real needs x > 0, got {x!r}")
    if abs(x - 1.0) <= _SERIES_RADIUS:
        return _series(x - 1.0, -_EULER, _SERIES_AT_ONE)
    if abs(x - 2.0) <= _SERIES_RADIUS:
        return _series(x - 2.0, 1.0 - _EULER, _SERIES_AT_TWO)
    if x < 0.5:
        return math.log(gamma_real(x).value)
    if x < 8.0:
        return math.log(_gamma_positive(x))
    y, corr = _y_and_correction(x)
    return math.log(_lanczos_sum_scaled(x)) + corr + (x - 0.5) * (math.log(y) - 1.0)


def rgamma_sign_log(x: float) -> tuple[float, float]:
    """1/Gamma(x) as ``(sign, ln|1/Gamma(x)|)``.

    Sign is 0.0 (and the log is -inf) at the poles of Gamma.  Works for
    arguments of any magnitude through the reflection formula.
    """
    x = float(x)
    if x > 0.0:
        return 1.0, -log_gamma_real(x)
    if nearest_pole_distance(x) <= POLE_TOL:
        return 0.0, -math.inf
    # 1/Gamma(x) = -x sin(pi x) Gamma(-x) / pi
    s = sinpi(x)
    sign = math.copysign(1.0, s)
    return sign, math.log(-x) + math.log(abs(s)) + log_gamma_real(-x) - math.log(math.pi)
