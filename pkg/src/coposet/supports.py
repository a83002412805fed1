"""Cyclic index sets and zero collections.

Indices are 0-based internally; JSON and CLI use 1-based positions only
through the matrix row order, so nothing here needs conversion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from .errors import InputError, PremiseError
from .numkernel import DEFAULT_TOL, Tolerance, as_sym, principal_submatrix, rank_and_kernel

POSITIVE_REL = 1e-7


@dataclass(frozen=True)
class IndexSets:
    """The cyclic windows of length n-2 (``long``) and n-3 (``short``)."""

    n: int
    long: tuple[tuple[int, ...], ...]
    short: tuple[tuple[int, ...], ...]


@lru_cache(maxsize=None)
def make_index_sets(n: int) -> IndexSets:
    if not isinstance(n, (int, np.integer)) or n < 5:
        raise InputError(f"index sets need n >= 5, got {n!r}")
    n = int(n)
    long = tuple(tuple((j + k) % n for k in range(n - 2)) for j in range(n))
    short = tuple(tuple((j + k) % n for k in range(n - 3)) for j in range(n))
    return IndexSets(n, long, short)


@dataclass(frozen=True, eq=False)
class ZeroCollection:
    """Columns u^1..u^n, u^j >= 0 supported exactly on window j, last window entry 1."""

    n: int
    u: np.ndarray  # shape (n, n); column j is u^j

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        n = self.n
        if u.shape != (n, n):
            raise InputError(f"collection must be {n} x {n}, got {u.shape}")
        sets = make_index_sets(n)
        for j, window in enumerate(sets.long):
            col = u[:, j]
            inside = col[list(window)]
            outside = np.delete(col, window)
            if np.any(outside != 0.0):
                raise InputError(f"u^{j + 1} has entries outside its window")
            if np.any(inside <= 0.0):
                raise InputError(f"u^{j + 1} is not strictly positive on its window")
        u = u / u[[w[-1] for w in sets.long], range(n)]
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def vector(self, j: int) -> np.ndarray:
        return self.u[:, j % self.n]

    def coefficients(self, j: int) -> np.ndarray:
        """u^j restricted to its window, in window order; last entry is 1."""
        j %= self.n
        return self.u[list(make_index_sets(self.n).long[j]), j]

    def to_json(self) -> dict:
        return {"n": self.n, "u": [self.u[:, j].tolist() for j in range(self.n)]}

    @classmethod
    def from_json(cls, obj) -> "ZeroCollection":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            n = int(obj["n"])
            rows = np.array(obj["u"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad collection JSON: {exc}") from exc
        if rows.shape != (n, n):
            raise InputError(f"collection JSON needs {n} vectors of length {n}")
        return cls(n, rows.T)


def collection_from_core(core, n: int) -> ZeroCollection:
    """Circulant collection whose every window carries the same coefficients."""
    core = np.asarray(core, dtype=float)
    if core.shape != (n - 2,):
        raise InputError(f"core must have length n-2 = {n - 2}")
    sets = make_index_sets(n)
    u = np.zeros((n, n))
    for j, window in enumerate(sets.long):
        u[list(window), j] = core
    return ZeroCollection(n, u)


def _positive_part(v: np.ndarray) -> np.ndarray | None:
    """Return +-v if strictly positive at the relative threshold, else None."""
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    if np.all(v > POSITIVE_REL * np.max(np.abs(v))):
        return v
    return None


def _cone_rays_2d(kernel: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Extreme rays of {K c : c in R^2} intersected with the nonnegative orthant."""
    cands = []
    for a, b in kernel:
        if abs(a) + abs(b) == 0.0:
            continue
        for sign in (1.0, -1.0):
            c = sign * np.array([-b, a])
            c /= np.linalg.norm(c)
            w = kernel @ c
            if np.all(w >= -1e-12 * np.max(np.abs(w))):
                cands.append(c)
    if len(cands) < 2:
        return None
    best, pair = -2.0, None
    for i in range(len(cands)):
        for k in range(i + 1, len(cands)):
            ang = np.arccos(np.clip(cands[i] @ cands[k], -1.0, 1.0))
            if ang > best:
                best, pair = ang, (cands[i], cands[k])
    if best < 1e-9:
        return None
    return kernel @ pair[0], kernel @ pair[1]


def _interior_kernel_point(kernel: np.ndarray) -> np.ndarray | None:
    """A strictly positive vector in the column span of ``kernel``, via LP."""
    m, k = kernel.shape
    # maximize t subject to K c >= t, sum(K c) = 1, t <= 1
    c_obj = np.zeros(k + 1)
    c_obj[-1] = -1.0
    a_ub = np.hstack([-kernel, np.ones((m, 1))])
    a_eq = np.hstack([kernel.sum(axis=0)[None, :], [[0.0]]])
    res = linprog(c_obj, A_ub=a_ub, b_ub=np.zeros(m), A_eq=a_eq, b_eq=[1.0],
                  bounds=[(None, None)] * k + [(None, 1.0)], method="highs")
    if res.status != 0 or res.x[-1] <= 0:
        return None
    return kernel @ res.x[:-1]


def positive_kernel_vector(block: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, int]:
    """Canonical strictly positive kernel vector of ``block`` and the kernel dimension.

    Corank 1 returns the sign-fixed generator, corank 2 the sum of the two
    extreme rays of the kernel cone, higher corank an LP interior point.
    Raises PremiseError when no such vector exists.
    """
    _, kernel = rank_and_kernel(block, tol)
    corank = kernel.shape[1]
    if corank == 0:
        raise PremiseError("block is nonsingular")
    if corank == 1:
        v = _positive_part(kernel[:, 0])
    elif corank == 2:
        rays = _cone_rays_2d(kernel)
        v = None
        if rays is not None:
            r1, r2 = (r / np.max(r) for r in rays)
            v = _positive_part(r1 + r2)
    else:
        v = _interior_kernel_point(kernel)
        if v is not None:
            v = _positive_part(v)
    if v is None:
        raise PremiseError("kernel contains no strictly positive vector")
    return v, corank


def zeros_from_matrix(a, tol: Tolerance = DEFAULT_TOL) -> ZeroCollection:
    """Read the zero collection off the singular blocks of ``a`` on each window."""
    a = as_sym(a)
    n = a.shape[0]
    sets = make_index_sets(n)
    u = np.zeros((n, n))
    for j, window in enumerate(sets.long):
        try:
            v, _ = positive_kernel_vector(principal_submatrix(a, window), tol)
        except PremiseError as exc:
            raise PremiseError(f"window {j + 1}: {exc}") from exc
        u[list(window), j] = v / v[-1]
    return ZeroCollection(n, u)


def rank_of_U(c: ZeroCollection, tol: Tolerance = DEFAULT_TOL) -> int:
    s = np.linalg.svd(c.u, compute_uv=False)
    return int(np.count_nonzero(s > tol.rank_eps * max(1.0, float(s[0]))))
