"""Quasi-particle momenta from eigenvectors and eigenvalues.

An eigenvector behaves like psi_j ~ exp(i p j) in its central region, and the
eigenvalue obeys eps = a(exp(-i p)).  Both routes give a complex momentum p;
their agreement, and the ln N / N law for Im p, are what the tables check.

Table conventions
-----------------
The printed tables are reproduced digit for digit with these choices
(indices 0-based, [x] = floor):

* Im p_psi: least-squares slope of -ln|psi_k| over k in [[0.2N]-1, [0.5N]-1];
* Re p_psi: two-point formula with j = [0.2N]-1, J = [0.5N];
* golden label l = [(sqrt5-1) N/2] - 1, which equals [(sqrt5-1)(N-1)/2] for
  N >= 200 but differs by one at N = 40 and 100.

``window="literal"`` uses the two-point formula with j = [0.2N], J = [0.5N]
for both parts, and ``l_rule="golden-literal"`` the unshifted golden rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .eigensolver import SpectralDecomposition, solve
from .symbol import FHParams, solve_zc

__all__ = [
    "FitResult",
    "MomentumRecord",
    "SpacingReport",
    "TableRow",
    "L_RULES",
    "label_for_rule",
    "fit_log_law",
    "momentum_record",
    "p_from_eigenvalue",
    "p_from_eigenvector",
    "p_psi_least_squares",
    "qp_table",
    "spacing_report",
    "table_window",
]

TWO_PI = 2.0 * math.pi
GOLDEN = math.sqrt(5.0) - 1.0
L_RULES = ("half", "golden", "quarter", "golden-literal")


def label_for_rule(rule: str, N: int) -> int:
    if rule == "half":
        return (N - 1) // 2
    if rule == "quarter":
        return (N - 1) // 4
    if rule == "golden":
        return int(math.floor(GOLDEN * N / 2.0)) - 1
    if rule == "golden-literal":
        return int(math.floor(GOLDEN * (N - 1) / 2.0))
    raise ValueError(f"unknown l-rule {rule!r}; expected one of {L_RULES}")


def _grid_p(l: int, N: int) -> float:
    return TWO_PI * l / (N - 1)


def _unwrapped_phase(psi: np.ndarray, j: int, J: int, base: float) -> np.ndarray:
    """Phase of psi_k, k = j..J, continuous relative to the advance exp(i base k).

    Removing the expected advance first keeps the steps small, so plain
    unwrapping is unambiguous even when base is close to pi.
    """
    k = np.arange(j, J + 1)
    seg = psi[j:J + 1]
    if np.any(seg == 0):
        raise ValueError(f"zero component in window [{j}, {J}]")
    return np.unwrap(np.angle(seg * np.exp(-1j * base * k))) + base * k


def p_from_eigenvector(psi, j: int, J: int, l: int, N: int) -> complex:
    """-i [ln psi_J - ln psi_j] / (J - j), log branch tracked along the window."""
    psi = np.asarray(psi, dtype=complex)
    if not (0 <= j < J <= len(psi) - 1):
        raise ValueError(f"need 0 <= j < J <= N-1, got j={j}, J={J}")
    ph = _unwrapped_phase(psi, j, J, _grid_p(l, N))
    re = (ph[-1] - ph[0]) / (J - j)
    im = -(math.log(abs(psi[J])) - math.log(abs(psi[j]))) / (J - j)
    return complex(re, im)


def p_psi_least_squares(psi, j: int, J: int, l: int, N: int) -> complex:
    """Least-squares slopes of the unwrapped phase and of -ln|psi_k| over [j, J]."""
    psi = np.asarray(psi, dtype=complex)
    k = np.arange(j, J + 1)
    ph = _unwrapped_phase(psi, j, J, _grid_p(l, N))
    re = np.polyfit(k, ph, 1)[0]
    im = -np.polyfit(k, np.log(np.abs(psi[k])), 1)[0]
    return complex(re, im)


def table_window(N: int, part: str, window: str = "table") -> tuple[int, int]:
    j, J = int(0.2 * N), int(0.5 * N)
    if window == "literal":
        return j, J
    if window != "table":
        raise ValueError(f"unknown window {window!r}")
    return (j - 1, J - 1) if part == "imag" else (j - 1, J)


def p_psi_table(psi, l: int, N: int, window: str = "table") -> complex:
    """p_psi as used in the tables; see the module docstring."""
    if window == "literal":
        return p_from_eigenvector(psi, *table_window(N, "real", "literal"), l, N)
    re = p_from_eigenvector(psi, *table_window(N, "real"), l, N).real
    im = p_psi_least_squares(psi, *table_window(N, "imag"), l, N).imag
    return complex(re, im)


def p_from_eigenvalue(eps: complex, l: int, N: int, params: FHParams) -> complex:
    """p_eps = i ln z_c, with Re p on the branch nearest 2 pi l / (N-1)."""
    base = _grid_p(l, N)
    z0 = complex(math.cos(base), -math.sin(base)) * (1.0 + 3.0 / N)
    zc = solve_zc(params, eps, z0)
    re = -math.atan2(zc.imag, zc.real)
    re += TWO_PI * round((base - re) / TWO_PI)
    return complex(re, math.log(abs(zc)))


@dataclass(frozen=True)
class MomentumRecord:
    N: int
    l: int
    p_psi: complex
    p_eps: complex

    @property
    def q_psi(self) -> complex:
        return self.p_psi - _grid_p(self.l, self.N)

    @property
    def q_eps(self) -> complex:
        return self.p_eps - _grid_p(self.l, self.N)


def momentum_record(decomp: SpectralDecomposition, l: int, window: str = "table") -> MomentumRecord:
    N = decomp.N
    p_psi = p_psi_table(decomp.right(l), l, N, window)
    p_eps = p_from_eigenvalue(decomp.eigenvalue(l), l, N, decomp.params)
    return MomentumRecord(N, l, p_psi, p_eps)


@dataclass(frozen=True)
class FitResult:
    slope_coeff: float
    C: float
    residuals: dict[int, float]
    anchor_N: int
    ls_slope: float = math.nan
    ls_intercept: float = math.nan


def fit_log_law(
    points: Iterable[tuple[int, float]],
    alpha: float,
    *,
    slope: float | None = None,
    anchor: int | None = None,
) -> FitResult:
    """Fit value*N = slope * ln N + C, C anchored so the residual at `anchor` is 0.

    slope defaults to 2 alpha + 1; pass 0 for the constant fits of the real
    part.  The anchor defaults to the largest N.  An unconstrained
    least-squares line is returned alongside (NaN for a single point).
    """
    pts = sorted((int(n), float(v)) for n, v in points)
    if not pts:
        raise ValueError("fit_log_law needs at least one point")
    k = 2.0 * alpha + 1.0 if slope is None else float(slope)
    anchor = pts[-1][0] if anchor is None else int(anchor)
    vals = dict(pts)
    if anchor not in vals:
        raise ValueError(f"anchor N={anchor} not among the points")
    C = vals[anchor] - k * math.log(anchor)
    res = {n: v - (k * math.log(n) + C) for n, v in pts}
    res[anchor] = 0.0
    ls_s = ls_c = math.nan
    if len(pts) >= 2:
        x = np.log([n for n, _ in pts])
        y = np.array([v for _, v in pts])
        ls_s, ls_c = (float(c) for c in np.polyfit(x, y, 1))
    return FitResult(k, C, res, anchor, ls_s, ls_c)


@dataclass(frozen=True)
class TableRow:
    N: int
    l: int
    value_psi: float
    value_eps: float
    diff_e6: float
    diff_Nk: float
    value_psi_N: float
    residual: float

    HEADER = ("N", "l", "value_psi", "value_eps", "diff_e6", "diff_Nk", "value_psi_N", "residual")

    def as_tuple(self) -> tuple:
        return (self.N, self.l, self.value_psi, self.value_eps, self.diff_e6, self.diff_Nk,
                self.value_psi_N, self.residual)


def qp_table(
    params: FHParams,
    Ns: Sequence[int],
    l_rule: str = "half",
    part: str = "imag_p",
    *,
    window: str = "table",
    anchor: int | None = None,
    decomps: dict[int, SpectralDecomposition] | None = None,
) -> tuple[list[TableRow], FitResult]:
    """Rows of Tables 1-4 style output, largest N first.

    part "imag_p" tabulates Im p (difference scaled by N^3, fit slope
    2 alpha + 1); "real_q" tabulates Re q = Re p - 2 pi l/(N-1)
    (difference scaled by N^2, constant fit).
    """
    if part not in ("imag_p", "real_q"):
        raise ValueError(f"unknown part {part!r}")
    recs = []
    for N in sorted(set(int(n) for n in Ns), reverse=True):
        d = decomps[N] if decomps and N in decomps else solve(params, N)
        l = label_for_rule(l_rule, N)
        recs.append(momentum_record(d, l, window))
    if part == "imag_p":
        vals = [(r.p_psi.imag, r.p_eps.imag) for r in recs]
        k, slope = 3, None
    else:
        vals = [(r.q_psi.real, r.q_eps.real) for r in recs]
        k, slope = 2, 0.0
    fit = fit_log_law([(r.N, v[0] * r.N) for r, v in zip(recs, vals)], params.alpha, slope=slope, anchor=anchor)
    rows = []
    for r, (vp, ve) in zip(recs, vals):
        diff = vp - ve
        rows.append(TableRow(r.N, r.l, vp, ve, diff * 1e6, diff * r.N**k, vp * r.N, fit.residuals[r.N]))
    return rows, fit


@dataclass(frozen=True)
class SpacingReport:
    l: np.ndarray
    ratio: np.ndarray
    endpoint: np.ndarray = field(repr=False)
    central_mask: np.ndarray = field(repr=False)

    @property
    def central_max_deviation(self) -> float:
        r = self.ratio[self.central_mask]
        return float(np.abs(r - 1.0).max()) if r.size else math.nan

    @property
    def central_mean(self) -> float:
        r = self.ratio[self.central_mask]
        return float(r.mean()) if r.size else math.nan


def spacing_report(decomp: SpectralDecomposition, central: tuple[float, float] = (0.1, 0.9),
                   endpoint_band: float = 0.05) -> SpacingReport:
    """Re(p_eps^{l+1} - p_eps^l) (N-1)/(2 pi) for consecutive labels.

    Rows with l/(N-1) in the central band feed the summary statistic; rows
    within ``endpoint_band`` of either end are flagged.
    """
    N = decomp.N
    ls = np.arange(1, N - 2)
    p = {}
    for l in range(1, N - 1):
        p[l] = p_from_eigenvalue(decomp.eigenvalue(l), l, N, decomp.params).real
    ratio = np.array([(p[l + 1] - p[l]) * (N - 1) / TWO_PI for l in ls])
    frac = ls / (N - 1)
    central_mask = (frac >= central[0]) & ((ls + 1) / (N - 1) <= central[1])
    endpoint = (frac < endpoint_band) | (frac > 1.0 - endpoint_band)
    return SpacingReport(ls, ratio, endpoint, central_mask & ~endpoint)
