"""Explicit copositive matrices and the angle parametrization of circulant families."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalAlarm, PremiseError
from .numkernel import DEFAULT_TOL, Tolerance, as_sym, is_psd, rank_and_kernel
from .supports import ZeroCollection, positive_kernel_vector

ANGLE_EPS = 1e-12


def horn() -> np.ndarray:
    return np.array([
        [1, -1, 1, 1, -1],
        [-1, 1, -1, 1, 1],
        [1, -1, 1, -1, 1],
        [1, 1, -1, 1, -1],
        [-1, 1, 1, -1, 1],
    ], dtype=float)


def t_matrix(theta) -> np.ndarray:
    """5 x 5 extremal matrix with five minimal zeros; needs theta_k > 0 and sum < pi."""
    th = np.asarray(theta, dtype=float)
    if th.shape != (5,) or np.any(th <= 0) or np.any(th >= np.pi) or th.sum() >= np.pi:
        raise InputError("theta must be five angles in (0, pi) with sum below pi")
    t1, t2, t3, t4, t5 = th
    c = np.cos
    return np.array([
        [1, -c(t1), c(t1 + t2), c(t4 + t5), -c(t5)],
        [-c(t1), 1, -c(t2), c(t2 + t3), c(t5 + t1)],
        [c(t1 + t2), -c(t2), 1, -c(t3), c(t3 + t4)],
        [c(t4 + t5), c(t2 + t3), -c(t3), 1, -c(t4)],
        [-c(t5), c(t5 + t1), c(t3 + t4), -c(t4), 1],
    ])


def _banded_circulant(n: int, period: int) -> np.ndarray:
    a, b = math.cos(math.pi / period), math.cos(3 * math.pi / period)
    row = np.zeros(n)
    row[0] = 2 * (1 + 2 * a * b)
    row[1] = row[n - 1] = -2 * (a + b)
    row[2] = row[n - 2] = 1.0
    return np.array([np.roll(row, k) for k in range(n)])


def deg_extremal(n: int) -> np.ndarray:
    """Circulant extremal matrix whose zero windows carry two minimal zeros each."""
    if n < 5:
        raise InputError("n must be at least 5")
    return _banded_circulant(n, n)


def reg_extremal(n: int) -> np.ndarray:
    """Circulant extremal matrix with minimal circulant zeros, odd n."""
    if n < 5 or n % 2 == 0:
        raise InputError("n must be odd and at least 5")
    return _banded_circulant(n, n + 1)


def family6(phi) -> tuple[np.ndarray, np.ndarray, ZeroCollection]:
    """6 x 6 extremal matrix, its six minimal zeros (columns) and the zero collection."""
    p = np.asarray(phi, dtype=float)
    if p.shape != (3,) or np.any(p <= 0) or p.sum() >= np.pi:
        raise InputError("phi must be three positive angles with sum below pi")
    p1, p2, p3 = p
    c1, c2, c3 = np.cos(p)
    c12, c23, c13, c123 = np.cos([p1 + p2, p2 + p3, p1 + p3, p1 + p2 + p3])
    s1, s2, s3 = np.sin(p)
    s12, s23, s13 = np.sin([p1 + p2, p2 + p3, p1 + p3])
    a = np.array([
        [1, -c1, c12, -c123, c23, -c3],
        [-c1, 1, -c2, c23, -c123, c13],
        [c12, -c2, 1, -c3, c13, -c123],
        [-c123, c23, -c3, 1, -c1, c12],
        [c23, -c123, c13, -c1, 1, -c2],
        [-c3, c13, -c123, c12, -c2, 1],
    ])
    v = np.array([
        [s2, 0, 0, 0, s2, s13],
        [s12, s3, 0, 0, 0, s3],
        [s1, s23, s1, 0, 0, 0],
        [0, s2, s13, s2, 0, 0],
        [0, 0, s3, s12, s3, 0],
        [0, 0, 0, s1, s23, s1],
    ])
    u = v + np.roll(v, -1, axis=1)
    return a, v, ZeroCollection(6, u)


# ---------------------------------------------------------------- angle tuples


def angle_count(n: int) -> int:
    return (n + 1) // 2 - 2


@dataclass(frozen=True, eq=False)
class AngleTuple:
    """Increasing angles zeta_1 < ... < zeta_m in (0, pi); pi itself allowed for odd n."""

    n: int
    zetas: np.ndarray

    def __post_init__(self):
        z = np.array(self.zetas, dtype=float)
        n = self.n
        if n < 5:
            raise InputError("n must be at least 5")
        if z.shape != (angle_count(n),):
            raise InputError(f"need {angle_count(n)} angles for n = {n}")
        upper_ok = z[-1] <= np.pi + ANGLE_EPS if n % 2 else z[-1] < np.pi
        if np.any(z <= 0) or not upper_ok or np.any(np.diff(z) <= 0):
            raise InputError("angles must increase strictly inside (0, pi)" +
                             (" or end at pi" if n % 2 else ""))
        z = np.minimum(z, np.pi)
        z.setflags(write=False)
        object.__setattr__(self, "zetas", z)

    @property
    def m(self) -> int:
        return self.zetas.size


def deg_angles(n: int) -> AngleTuple:
    m = angle_count(n)
    return AngleTuple(n, np.array([(2 * j + 3) * np.pi / n for j in range(1, m + 1)]))


def reg_angles(n: int) -> AngleTuple:
    if n % 2 == 0:
        raise InputError("n must be odd")
    m = angle_count(n)
    return AngleTuple(n, np.array([(2 * j + 3) * np.pi / (n + 1) for j in range(1, m + 1)]))


def fraction_condition(angles: AngleTuple) -> np.ndarray:
    """Per-angle flags: frac(n zeta_j / 4pi) in (0, 1/2) for odd j, in (1/2, 1) for even j."""
    frac = np.mod(angles.n * angles.zetas / (4 * np.pi), 1.0)
    odd = (np.arange(angles.m) % 2) == 0
    return np.where(odd, (frac > 0) & (frac < 0.5), frac > 0.5)


def angles_to_core(angles: AngleTuple) -> np.ndarray:
    """Coefficients (ascending powers) of prod (x^2 - 2x cos zeta + 1), times (x+1) for even n."""
    p = np.array([1.0])
    for z in angles.zetas:
        p = np.convolve(p, [1.0, -2.0 * np.cos(z), 1.0])
    if angles.n % 2 == 0:
        p = np.convolve(p, [1.0, 1.0])
    return p


def _cos_gap(a: float, b: float) -> float:
    # cos a - cos b without cancellation
    return -2.0 * math.sin((a + b) / 2) * math.sin((a - b) / 2)


def _near_multiple_of(z: float, unit: float) -> bool:
    r = z / unit
    return abs(r - round(r)) * unit <= 1e-10


def _raw_weights(angles: AngleTuple) -> np.ndarray:
    """1 / (s(zeta_j) sin(n zeta_j / 2) prod_{l != j}(cos zeta_j - cos zeta_l))."""
    n, z = angles.n, angles.zetas
    for j, zj in enumerate(z):
        if _near_multiple_of(zj, 2 * np.pi / n):
            raise PremiseError(f"angle {j + 1} is a multiple of 2pi/n")
    out = np.empty(z.size)
    for j, zj in enumerate(z):
        s = math.sin(zj) if n % 2 == 0 else math.sin(zj / 2)
        prod = 1.0
        for l, zl in enumerate(z):
            if l != j:
                prod *= _cos_gap(zj, zl)
        out[j] = 1.0 / (s * math.sin(n * zj / 2) * prod)
    return out


def lambda_weights(angles: AngleTuple) -> np.ndarray:
    """Closed-form solution of the weight system built by ``weight_system``."""
    return _raw_weights(angles) / 2.0 ** angles.m


def weight_system(angles: AngleTuple) -> tuple[np.ndarray, np.ndarray]:
    """Matrix and right-hand side of the m linear equations for the weights.

    Rows k = 3..m+1 ask sum_j w_j (cos((n-k) z_j) - cos(k z_j)) = 0, the last
    row asks the same expression at k = 2 to equal -1.
    """
    n, z, m = angles.n, angles.zetas, angles.m
    ks = list(range(3, m + 2)) + [2]
    mat = np.array([[math.cos((n - k) * zj) - math.cos(k * zj) for zj in z] for k in ks])
    rhs = np.zeros(m)
    rhs[-1] = -1.0
    return mat, rhs


def circulant_from_angles(angles: AngleTuple, c: float = 1.0, lam: float = 0.0) -> np.ndarray:
    """Circulant matrix of the family; ``lam`` adds the alternating PSD ray for even n."""
    n = angles.n
    if not c >= 0 or not lam >= 0:
        raise InputError("c and lam must be nonnegative")
    if n % 2 and lam != 0:
        raise InputError("the alternating ray only exists for even n")
    flags = fraction_condition(angles)
    if c > 0 and not np.all(flags):
        bad = int(np.nonzero(~flags)[0][0]) + 1
        raise PremiseError(f"the fraction condition fails at angle {bad}")
    w = _raw_weights(angles) if c > 0 else np.zeros(angles.m)
    row = np.zeros(n)
    for k in range(n // 2 + 1):
        value = c * float(np.sum(w * np.cos(k * angles.zetas)))
        if n % 2 == 0:
            value += (-1) ** k * lam
        row[k] = value
        row[(n - k) % n] = value
    return np.array([np.roll(row, k) for k in range(n)])


# ------------------------------------------------------------ polygon slacks


def regular_polygon_rays(n: int, jitter: float = 0.0, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    ang = 2 * np.pi * np.arange(n) / n
    if jitter:
        ang = ang + rng.uniform(-jitter, jitter, n) * (2 * np.pi / n)
    return np.column_stack([np.cos(ang), np.sin(ang), np.ones(n)])


def polygon_slack_collection(rays) -> ZeroCollection:
    """Zero collection given by the slack matrix of a polyhedral cone in R^3.

    Rays must be listed in cyclic order.  Facet k is spanned by rays k, k+1;
    entry (i, j) is the slack of ray j on facet i+1, which puts the two zero
    entries of column j at rows j-2, j-1 as the window convention requires.
    """
    x = np.asarray(rays, dtype=float)
    if x.ndim != 2 or x.shape[1] != 3 or x.shape[0] < 5:
        raise InputError("need at least five rays in R^3")
    n = x.shape[0]
    normals = np.cross(x, np.roll(x, -1, axis=0))
    slack = normals @ x.T  # slack[k, j] = <f_k, x_j>
    for k in range(n):
        if slack[k].sum() < 0:
            normals[k] = -normals[k]
            slack[k] = -slack[k]
    u = np.roll(slack, -1, axis=0)
    scale = np.max(np.abs(u))
    for j in range(n):
        for i in range(n):
            expect_zero = (i - j) % n in (n - 2, n - 1)
            if expect_zero:
                u[i, j] = 0.0
            elif u[i, j] <= 1e-9 * scale:
                raise InputError("rays are not in convex cyclic position")
    return ZeroCollection(n, u)


# ------------------------------------------------------------ Toeplitz atoms


def toeplitz_atom(zeta: float, size: int) -> np.ndarray:
    k = np.arange(size)
    return np.cos(np.abs(k[:, None] - k[None, :]) * zeta)


@dataclass(frozen=True, eq=False)
class ToeplitzDecomposition:
    angles: np.ndarray
    weights: np.ndarray

    def reconstruct(self, size: int) -> np.ndarray:
        return sum((w * toeplitz_atom(z, size) for z, w in zip(self.angles, self.weights)),
                   np.zeros((size, size)))


def toeplitz_decompose(t, tol: Tolerance = DEFAULT_TOL, require_nonneg_kernel: bool = False
                       ) -> ToeplitzDecomposition:
    """Write a singular PSD Toeplitz matrix as a positive sum of atoms T(zeta).

    The angles are read off the unit-circle roots of a kernel polynomial and
    then polished by Gauss-Newton on the first row.
    """
    t = as_sym(t)
    size = t.shape[0]
    first = t[0]
    expect = np.array([[first[abs(i - j)] for j in range(size)] for i in range(size)])
    if np.max(np.abs(t - expect)) > tol.match_eps * max(1.0, np.max(np.abs(t))):
        raise PremiseError("matrix is not Toeplitz")
    if not is_psd(t, tol):
        raise PremiseError("matrix is not positive semidefinite")
    rank, kernel = rank_and_kernel(t, tol)
    if rank == size:
        raise PremiseError("matrix is nonsingular")
    if rank == 0:
        return ToeplitzDecomposition(np.zeros(0), np.zeros(0))
    if require_nonneg_kernel:
        try:
            positive_kernel_vector(t, tol)
        except PremiseError as exc:
            raise PremiseError("kernel has no positive vector") from exc
    _, _, vt = np.linalg.svd(t[:rank + 1, :rank + 1])
    poly = vt[-1]
    roots = np.roots(poly[::-1])
    if np.any(np.abs(np.abs(roots) - 1.0) > 1e-4):
        raise NumericalAlarm("kernel polynomial has roots off the unit circle")
    upper = np.sort(np.abs(np.angle(roots[roots.imag > 1e-7])))
    real = roots[np.abs(roots.imag) <= 1e-7]
    fixed = sorted(0.0 if r.real > 0 else np.pi for r in real)
    if 2 * upper.size + len(fixed) != rank:
        raise NumericalAlarm("could not pair the kernel polynomial roots")
    free = upper.copy()
    fixed = np.array(fixed)
    lags = np.arange(size)

    def basis(zs):
        return np.cos(np.outer(lags, zs))

    all_z = np.concatenate([free, fixed])
    w = np.linalg.lstsq(basis(all_z), first, rcond=None)[0]
    for _ in range(20):
        all_z = np.concatenate([free, fixed])
        resid = basis(all_z) @ w - first
        jac = np.hstack([basis(all_z), -(lags[:, None] * np.sin(np.outer(lags, free))) * w[:free.size]])
        step = np.linalg.lstsq(jac, -resid, rcond=None)[0]
        w = w + step[:all_z.size]
        free = free + step[all_z.size:]
        if np.max(np.abs(step)) < 1e-15:
            break
    all_z = np.concatenate([free, fixed])
    order = np.argsort(all_z)
    all_z, w = all_z[order], w[order]
    if np.any(w <= 0):
        raise NumericalAlarm("recovered weights are not positive")
    return ToeplitzDecomposition(all_z, w)


# --------------------------------------------------------- conjecture search


@dataclass
class ConjectureReport:
    n: int
    resolution: int
    tuples_checked: int = 0
    fraction_condition_holds: int = 0
    counterexamples: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "resolution": self.resolution,
            "tuples_checked": self.tuples_checked,
            "fraction_condition_holds": self.fraction_condition_holds,
            "counterexamples": [
                {"angles": list(z), "interval_predicate": pred, "coefficients_positive": pos}
                for z, pred, pos in self.counterexamples
            ],
        }


def conjecture_grid(n: int, resolution: int) -> np.ndarray:
    """Grid points i pi / resolution, minus a guard band around multiples of 2pi/n."""
    step = np.pi / resolution
    top = resolution if n % 2 else resolution - 1
    pts = np.arange(1, top + 1) * step
    unit = 2 * np.pi / n
    dist = np.abs(pts / unit - np.round(pts / unit)) * unit
    return pts[dist >= step / 2]


def interval_predicate(angles: AngleTuple) -> bool:
    n = angles.n
    j = np.arange(1, angles.m + 1)
    lo, hi = (2 * j + 2) * np.pi / n, (2 * j + 4) * np.pi / n
    return bool(np.all((angles.zetas > lo) & (angles.zetas < hi)))


def _scan(args):
    n, grid, first_indices = args
    m = angle_count(n)
    checked = holds = 0
    bad = []
    for i in first_indices:
        for rest in itertools.combinations(range(i + 1, grid.size), m - 1):
            angles = AngleTuple(n, grid[[i, *rest]])
            checked += 1
            if not np.all(fraction_condition(angles)):
                continue
            holds += 1
            pred = interval_predicate(angles)
            pos = bool(np.all(angles_to_core(angles) > 0))
            if pred != pos:
                bad.append((tuple(float(z) for z in angles.zetas), pred, pos))
    return checked, holds, bad


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("COPOSET_THREADS")
    count = requested or os.cpu_count() or 1
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError as exc:
            raise InputError("COPOSET_THREADS must be an integer") from exc
    return max(1, count)


def conjecture_search(n: int, resolution: int, workers: int | None = None) -> ConjectureReport:
    """Grid test of: all core coefficients positive iff every angle sits in its interval.

    Only tuples satisfying the fraction condition count.  Results do not depend on the
    number of workers.
    """
    if n < 5 or resolution < 2:
        raise InputError("need n >= 5 and resolution >= 2")
    grid = conjecture_grid(n, resolution)
    workers = worker_count(workers)
    chunks = [(n, grid, list(range(k, grid.size, workers))) for k in range(workers)]
    if workers == 1:
        results = [_scan(chunks[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan, chunks))
    report = ConjectureReport(n, resolution)
    for checked, holds, bad in results:
        report.tuples_checked += checked
        report.fraction_condition_holds += holds
        report.counterexamples.extend(bad)
    report.counterexamples.sort()
    return report
