"""Periodic linear recurrence attached to a zero collection.

The recurrence of order d = n-3 reads
    x[t+d] + sum_{i<d} c_t[i] x[t+i] = 0,
with c_t the window coefficients of u^t.  State vectors hold d consecutive
terms; the monodromy maps (x_1..x_d) to (x_{n+1}..x_{n+d}).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .numkernel import DEFAULT_TOL, Tolerance
from .supports import ZeroCollection, rank_of_U

CLUSTER_RADIUS = 1e-6
CIRCLE_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class PeriodicSystem:
    n: int
    d: int
    coeffs: np.ndarray  # shape (n, d+1), row t-1 holds c_t, last column is 1
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def coefficient(self, t: int) -> np.ndarray:
        """Coefficients c_t for 1-based t, extended n-periodically."""
        return self.coeffs[(t - 1) % self.n]

    def step_matrix(self, t: int) -> np.ndarray:
        d = self.d
        s = np.zeros((d, d))
        s[:-1, 1:] = np.eye(d - 1)
        s[-1, :] = -self.coefficient(t)[:-1]
        return s

    def evaluations(self, count: int) -> np.ndarray:
        """Rows r_1..r_count with x_t = r_t @ (x_1..x_d) for every solution."""
        have = self._cache.get("eval")
        if have is None or have.shape[0] < count:
            d = self.d
            rows = np.zeros((max(count, d), d))
            rows[:d] = np.eye(d)
            for t in range(1, rows.shape[0] - d + 1):
                c = self.coefficient(t)
                rows[t + d - 1] = -c[:-1] @ rows[t - 1:t + d - 1]
            self._cache["eval"] = have = rows
        return have[:count]

    def step_back(self, t: int, window: np.ndarray) -> np.ndarray:
        """Recover the value at time t from the d values at times t+1..t+d."""
        c = self.coefficient(t)
        return -(c[1:-1] @ window[:-1] + window[-1]) / c[0]


def system_from_collection(c: ZeroCollection) -> PeriodicSystem:
    n = c.n
    coeffs = np.array([c.coefficients(j) for j in range(n)])
    if np.any(coeffs[:, 0] <= 0):
        raise InputError("leading coefficients must be positive")
    return PeriodicSystem(n, n - 3, coeffs)


@dataclass(frozen=True, eq=False)
class Monodromy:
    matrix: np.ndarray
    multipliers: np.ndarray  # complex, sorted by (angle, modulus)
    det: float

    def cluster_radius(self) -> float:
        """Grouping radius; widened for large monodromies, whose defective
        eigenvalues scatter by about sqrt(machine eps) * |M|."""
        spread = 10 * np.sqrt(np.finfo(float).eps) * float(np.max(np.abs(self.matrix)))
        return max(CLUSTER_RADIUS, spread)

    def clusters(self) -> list[tuple[complex, int]]:
        return cluster_multipliers(self.multipliers, self.cluster_radius())

    def on_unit_circle(self, radius: float = CIRCLE_TOL) -> int:
        """Multipliers (with multiplicity) whose cluster mean has modulus 1."""
        return sum(k for z, k in self.clusters() if abs(abs(z) - 1.0) <= radius)

    def count_near(self, value: complex) -> int:
        return sum(k for z, k in self.clusters() if abs(z - value) <= self.cluster_radius())

    def geometric_multiplicity(self, value: float, tol: Tolerance = DEFAULT_TOL) -> int:
        d = self.matrix.shape[0]
        s = np.linalg.svd(self.matrix - value * np.eye(d), compute_uv=False)
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        return int(np.count_nonzero(s <= tol.rank_eps * scale * 10))


def monodromy(sys: PeriodicSystem) -> Monodromy:
    m = np.eye(sys.d)
    for t in range(1, sys.n + 1):
        m = sys.step_matrix(t) @ m
    mult = np.linalg.eigvals(m)
    order = np.lexsort((np.abs(mult), np.round(np.angle(mult), 9)))
    mult = mult[order]
    det = float(np.linalg.det(m))
    return Monodromy(m, mult, det)


def periodic_solution_space(c: ZeroCollection, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of n-periodic solutions, i.e. of the complement of span U."""
    rank = rank_of_U(c, tol)
    _, _, vt = np.linalg.svd(c.u.T)
    return vt[rank:].T


def cluster_multipliers(mult: np.ndarray, radius: float = CLUSTER_RADIUS) -> list[tuple[complex, int]]:
    """Single-linkage groups of multipliers; returns (mean, multiplicity) pairs."""
    mult = np.asarray(mult)
    label = list(range(mult.size))

    def root(i):
        while label[i] != i:
            label[i] = label[label[i]]
            i = label[i]
        return i

    for i in range(mult.size):
        for j in range(i + 1, mult.size):
            if abs(mult[i] - mult[j]) <= radius:
                label[root(i)] = root(j)
    groups: dict[int, list[int]] = {}
    for i in range(mult.size):
        groups.setdefault(root(i), []).append(i)
    return [(complex(np.mean(mult[idx])), len(idx)) for idx in sorted(groups.values())]
