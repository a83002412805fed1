"""Dense symmetric linear algebra with explicit tolerances.

Contents:
    Tolerance        -- the three thresholds used for every decision
    as_sym           -- validate and symmetrize a square array
    Spectrum, eig_sym -- cyclic Jacobi eigensolver
    rank_and_kernel, is_psd, principal_submatrix
    svec, smat, nullspace_of_linear_map -- linear maps on symmetric matrices
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceError, InputError

MAX_SWEEPS = 100


@dataclass(frozen=True)
class Tolerance:
    """Thresholds for rank, semidefiniteness and matching decisions."""

    rank_eps: float = 1e-9
    psd_eps: float = 1e-9
    match_eps: float = 1e-8

    def __post_init__(self):
        for name in ("rank_eps", "psd_eps", "match_eps"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InputError(f"{name} must be a positive finite number, got {value!r}")


DEFAULT_TOL = Tolerance()


def as_sym(data, *, check: bool = True, atol: float = 1e-12) -> np.ndarray:
    """Return ``data`` as a float symmetric matrix.

    With ``check`` the input must already be symmetric up to ``atol`` relative
    to its largest entry; the returned array is the exact symmetrization.
    """
    a = np.array(data, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InputError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    if check:
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a - a.T)) > atol * scale:
            raise InputError("matrix is not symmetric")
    return (a + a.T) / 2


def inf_norm(a: np.ndarray) -> float:
    """Maximum absolute row sum."""
    return float(np.max(np.sum(np.abs(a), axis=1))) if a.size else 0.0


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in ascending order and the matching orthonormal eigenvectors (columns)."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


def _normalize_signs(vectors: np.ndarray) -> np.ndarray:
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        big = np.nonzero(np.abs(col) > 1e-12)[0]
        if big.size and col[big[0]] < 0:
            vectors[:, k] = -col
    return vectors


def eig_sym(a, max_sweeps: int = MAX_SWEEPS) -> Spectrum:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Each eigenvector has its first non-negligible component positive.
    """
    a = as_sym(a, check=False)
    n = a.shape[0]
    v = np.eye(n)
    negligible = 1e-17 * float(np.max(np.abs(a)))
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= negligible:
                    continue
                rotated = True
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            break
    else:
        raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return Spectrum(values[order], _normalize_signs(v[:, order]))


def _zero_mask(values: np.ndarray, tol: Tolerance) -> np.ndarray:
    top = float(np.max(np.abs(values))) if values.size else 0.0
    return np.abs(values) <= tol.rank_eps * max(1.0, top)


def rank_and_kernel(a, tol: Tolerance = DEFAULT_TOL) -> tuple[int, np.ndarray]:
    """Numerical rank and an orthonormal kernel basis (columns)."""
    eig = eig_sym(a)
    zero = _zero_mask(eig.values, tol)
    return int(np.count_nonzero(~zero)), eig.vectors[:, zero]


def is_psd(a, tol: Tolerance = DEFAULT_TOL) -> bool:
    a = as_sym(a, check=False)
    lam_min = eig_sym(a).values[0]
    return bool(lam_min >= -tol.psd_eps * (1.0 + inf_norm(a)))


def principal_submatrix(a: np.ndarray, index: Sequence[int]) -> np.ndarray:
    """Submatrix on 0-based ``index`` (any order, repeated indices rejected)."""
    idx = np.asarray(list(index), dtype=int)
    if len(set(idx.tolist())) != idx.size:
        raise InputError("principal index set has repeated entries")
    return a[np.ix_(idx, idx)]


def svec(x: np.ndarray) -> np.ndarray:
    """Coordinates of a symmetric matrix on the basis E_ii, E_ij + E_ji (i < j)."""
    iu = np.triu_indices(x.shape[0])
    return x[iu]


def smat(vec: np.ndarray, n: int) -> np.ndarray:
    x = np.zeros((n, n))
    iu = np.triu_indices(n)
    x[iu] = vec
    return x + np.triu(x, 1).T


def functional_row(f: np.ndarray) -> np.ndarray:
    """Row vector r with r @ svec(X) == <f, X> (Frobenius) for symmetric X."""
    g = f + f.T - np.diag(np.diag(f))
    return svec(g)


def nullspace_of_linear_map(
    functionals: Iterable[np.ndarray], n: int, tol: Tolerance = DEFAULT_TOL
) -> list[np.ndarray]:
    """Basis of {X symmetric : <F, X> = 0 for every F} as unit-norm symmetric matrices.

    The functionals are given as n x n matrices; dimension is decided by the
    singular values of the stacked coefficient matrix against ``rank_eps``.
    """
    rows = [functional_row(np.asarray(f, dtype=float)) for f in functionals]
    dim = n * (n + 1) // 2
    if not rows:
        basis = np.eye(dim)
    else:
        m = np.vstack(rows)
        _, s, vt = np.linalg.svd(m)
        top = float(s[0]) if s.size else 0.0
        rank = int(np.count_nonzero(s > tol.rank_eps * max(1.0, top)))
        basis = vt[rank:].T
    out = []
    for k in range(basis.shape[1]):
        x = smat(basis[:, k], n)
        out.append(x / np.linalg.norm(x))
    return out
