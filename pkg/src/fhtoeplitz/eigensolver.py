"""Dense eigendecomposition, Widom-grid labeling and biorthonormalization.

The matrix is real and non-Hermitian.  Because T_{jk} depends on j - k,
reversing the index order maps T onto its transpose, so the left
eigenvector belonging to eps^l is the right one read backwards:
psi~^l_j = psi^l_{N-1-j}.  No second solve is needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .export import write_csv
from .symbol import FHParams, grid_values
from .toeplitz import ToeplitzMatrix, build_matrix

__all__ = [
    "DEFAULT_CAP",
    "DEGENERACY_TOL",
    "DefectiveError",
    "DegenerateSpectrumError",
    "EigenSolverError",
    "RawEigen",
    "SpectralDecomposition",
    "biorthonormality_error",
    "check_completeness",
    "eig_dense",
    "label_spectrum",
    "normalize_biorthogonal",
    "solve",
]

DEFAULT_CAP = 2000
DEGENERACY_TOL = 1e-10
RESIDUAL_TOL = 1e-10


class EigenSolverError(ArithmeticError):
    pass


class DegenerateSpectrumError(EigenSolverError):
    """Eigenvalues too close for labeling or biorthonormalization."""


class DefectiveError(EigenSolverError):
    """Vanishing self-pairing: no biorthonormal basis exists."""


@dataclass(frozen=True)
class RawEigen:
    matrix: ToeplitzMatrix = field(repr=False)
    values: np.ndarray
    vectors: np.ndarray = field(repr=False)
    max_residual: float = math.nan  # relative, per the residual contract

    @property
    def N(self) -> int:
        return self.matrix.N


def _relative_residuals(A: np.ndarray, w: np.ndarray, V: np.ndarray) -> np.ndarray:
    R = A @ V - V * w
    normA = np.abs(A).sum(axis=1).max()
    scale = normA * np.abs(V).max(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return np.abs(R).max(axis=0) / scale


def eig_dense(
    matrix: ToeplitzMatrix,
    *,
    cap: int = DEFAULT_CAP,
    check_residual: bool = True,
) -> RawEigen:
    """All eigenpairs of the dense matrix (LAPACK geev via scipy).

    Raises `EigenSolverError` (with the matrix fingerprint) when LAPACK does
    not converge or the residual contract is violated.
    """
    if matrix.N > cap:
        raise ValueError(f"N = {matrix.N} exceeds the solver cap {cap}")
    A = matrix.dense()
    try:
        w, V = scipy.linalg.eig(A, check_finite=True, overwrite_a=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenSolverError(f"eigensolver failed for {matrix.fingerprint()}: {exc}") from exc
    res = math.nan
    if check_residual:
        res = float(_relative_residuals(A, w, V).max())
        # defective matrices (e.g. nilpotent) have exact zero residual but a
        # deficient basis; that is caught later by the normalization
        if not res <= RESIDUAL_TOL:
            raise EigenSolverError(f"residual {res:.3g} above contract for {matrix.fingerprint()}")
    return RawEigen(matrix, w.astype(complex), V.astype(complex), res)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs ordered by label l = 0..N-1.

    ``vectors[:, l]`` is psi^l; ``left[:, l]`` is the reversed vector.
    """

    N: int
    params: FHParams
    eigenvalues: np.ndarray
    vectors: np.ndarray = field(repr=False)
    grid: np.ndarray = field(repr=False)
    match_distance: np.ndarray = field(repr=False)
    normalized: bool = False
    denominator: str = "N-1"
    # explicit left vectors for non-Toeplitz input; None means index reversal
    left_vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def labels(self) -> np.ndarray:
        return np.arange(self.N)

    @property
    def left(self) -> np.ndarray:
        return self.vectors[::-1, :] if self.left_vectors is None else self.left_vectors

    def eigenvalue(self, l: int) -> complex:
        return complex(self.eigenvalues[l])

    def right(self, l: int) -> np.ndarray:
        return self.vectors[:, l]

    def left_vector(self, l: int) -> np.ndarray:
        return self.left[:, l]

    def entries(self) -> list[dict]:
        return [
            {"l": l, "eigenvalue": self.eigenvalues[l], "right": self.vectors[:, l], "left": self.left[:, l]}
            for l in range(self.N)
        ]

    def write_eigenvalues_csv(self, path: str | Path, config: dict | None = None) -> Path:
        rows = [
            (l, e.real, e.imag, g.real, g.imag, d)
            for l, (e, g, d) in enumerate(zip(self.eigenvalues, self.grid, self.match_distance))
        ]
        header = ["l", "re_eps", "im_eps", "re_grid", "im_grid", "match_distance"]
        return write_csv(path, header, rows, config)

    def write_eigenvector_csv(self, l: int, path: str | Path, config: dict | None = None) -> Path:
        psi = self.vectors[:, l]
        phase = np.unwrap(np.angle(psi))
        rows = [(j, v.real, v.imag, abs(v), ph) for j, (v, ph) in enumerate(zip(psi, phase))]
        return write_csv(path, ["j", "re_psi", "im_psi", "abs_psi", "phase_unwrapped"], rows, config)


def _min_gap(w: np.ndarray) -> float:
    if len(w) < 2:
        return math.inf
    d = np.abs(w[:, None] - w[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())


def label_spectrum(
    raw: RawEigen,
    params: FHParams | None = None,
    *,
    denominator: str = "N-1",
) -> SpectralDecomposition:
    """Assign labels by optimal matching to the grid a(exp(-2 pi i l / (N-1))).

    The assignment minimises the total distance (Hungarian algorithm).  Both
    end labels l = 0 and l = N-1 map to the singular point a(1) = 0; for
    the cost they are replaced by the grid value a quarter step inwards, so
    the two eigenvalues nearest zero are told apart by the side of the curve
    they sit on.
    """
    params = params or raw.matrix.params
    w, V = raw.values, raw.vectors
    N = len(w)
    if V.shape != (N, N):
        raise ValueError("raw eigenpairs incomplete")
    gap = _min_gap(w)
    if gap <= DEGENERACY_TOL:
        raise DegenerateSpectrumError(
            f"eigenvalue gap {gap:.3g} <= {DEGENERACY_TOL:g}; labeling is ambiguous"
        )
    grid = grid_values(params, N, denominator)
    d = N - 1 if denominator == "N-1" else N
    cost_grid = grid.copy()
    if N > 2:
        from .symbol import circle_values

        for l, off in ((0, 0.25), (N - 1, N - 1.25)):
            if denominator != "N-1" and l == N - 1:
                continue
            cost_grid[l] = circle_values(params, np.mod(-2.0 * math.pi * off / d, 2.0 * math.pi))
    cost = np.abs(w[:, None] - cost_grid[None, :])
    rows, cols = linear_sum_assignment(cost)
    order = np.empty(N, dtype=int)
    order[cols] = rows
    ev = w[order]
    return SpectralDecomposition(
        N=N,
        params=params,
        eigenvalues=ev,
        vectors=V[:, order],
        grid=grid,
        match_distance=np.abs(ev - grid),
        normalized=False,
        denominator=denominator,
    )


def normalize_biorthogonal(decomp: SpectralDecomposition) -> SpectralDecomposition:
    """Scale each psi^l so that sum_j psi^l_{N-1-j} psi^l_j = 1.

    The remaining sign is fixed by making the first nonzero component have
    positive real part (positive imaginary part if its real part is below
    1e-12).
    """
    gap = _min_gap(decomp.eigenvalues)
    if gap <= DEGENERACY_TOL:
        raise DegenerateSpectrumError(f"eigenvalue gap {gap:.3g}; biorthonormalization undefined")
    V = decomp.vectors.copy()
    # rescale to unit max-norm first so the 1e-14 threshold is meaningful
    V /= np.abs(V).max(axis=0)
    pair = np.einsum("jl,jl->l", V[::-1, :], V)
    bad = np.flatnonzero(np.abs(pair) < 1e-14)
    if bad.size:
        raise DefectiveError(f"vanishing self-pairing for labels {bad[:8].tolist()}")
    V /= np.sqrt(pair)
    for l in range(V.shape[1]):
        col = V[:, l]
        tol = 1e-12 * np.abs(col).max()
        k = int(np.argmax(np.abs(col) > tol))
        c = col[k]
        if (c.real < 0.0 and abs(c.real) >= 1e-12) or (abs(c.real) < 1e-12 and c.imag < 0.0):
            V[:, l] = -col
    return replace(decomp, vectors=V, normalized=True)


def biorthonormality_error(decomp: SpectralDecomposition) -> float:
    """max_{l,m} |sum_j psi~^l_j psi^m_j - delta(l,m)|."""
    G = decomp.left.T @ decomp.vectors
    G[np.diag_indices_from(G)] -= 1.0
    return float(np.abs(G).max())


def check_completeness(decomp: SpectralDecomposition) -> float:
    """max_{j,k} |sum_l psi~^l_j psi^l_k - delta(j,k)|."""
    G = decomp.left @ decomp.vectors.T
    G[np.diag_indices_from(G)] -= 1.0
    return float(np.abs(G).max())


def left_residual(decomp: SpectralDecomposition, matrix: ToeplitzMatrix) -> float:
    """Relative residual of psi~ T = eps psi~ for the reversed vectors."""
    A = matrix.dense()
    L = decomp.left
    R = A.T @ L - L * decomp.eigenvalues
    normA = np.abs(A).sum(axis=1).max()
    return float((np.abs(R).max(axis=0) / (normA * np.abs(L).max(axis=0))).max())


@lru_cache(maxsize=16)
def solve(params: FHParams, N: int, *, cap: int = DEFAULT_CAP, check_residual: bool = True) -> SpectralDecomposition:
    """Build, diagonalise, label and normalise; cached per (params, N)."""
    raw = eig_dense(build_matrix(params, N), cap=cap, check_residual=check_residual)
    return normalize_biorthogonal(label_spectrum(raw, params))
