"""Copositivity verdicts, zero enumeration and extremality.

``circulant_criterion`` decides copositivity from a circulant zero collection using
only the window blocks and n cross products.  ``oracle_copositive`` is an
independent simplicial-partition test used to cross-check it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import InputError, NumericalAlarm, PremiseError
from .numkernel import (
    DEFAULT_TOL,
    Tolerance,
    as_sym,
    is_psd,
    nullspace_of_linear_map,
    principal_submatrix,
    rank_and_kernel,
)
from .supports import POSITIVE_REL, ZeroCollection, make_index_sets, positive_kernel_vector

STRICT_REL = 1e-7
EQUAL_REL = 1e-9


# ------------------------------------------------------------ criterion


class CriterionVerdict(enum.Enum):
    COPOSITIVE_PSD = "COPOSITIVE_PSD"
    COPOSITIVE_EXCEPTIONAL = "COPOSITIVE_EXCEPTIONAL"
    NOT_COPOSITIVE = "NOT_COPOSITIVE"

    @property
    def copositive(self) -> bool:
        return self is not CriterionVerdict.NOT_COPOSITIVE


@dataclass(frozen=True, eq=False)
class CriterionResult:
    verdict: CriterionVerdict
    cross: np.ndarray
    reason: str | None = None
    witness: np.ndarray | None = None


def circulant_criterion(a, c: ZeroCollection, tol: Tolerance = DEFAULT_TOL) -> CriterionResult:
    """Copositivity of ``a`` given a circulant zero collection.

    Every u^j must be a zero of ``a``.  A u^j with negative value is itself a
    violating vector and yields NOT_COPOSITIVE; a positive value is a premise
    failure.  Cross products mixing zero and positive values beyond the
    tolerance bands raise NumericalAlarm.
    """
    a = as_sym(a)
    n = c.n
    if a.shape[0] != n:
        raise InputError("matrix and collection sizes differ")
    amax = 1.0 + float(np.max(np.abs(a)))
    us = [c.vector(j) for j in range(n)]
    cross = np.array([us[j] @ a @ us[(j + 1) % n] for j in range(n)])
    for j, u in enumerate(us):
        q = float(u @ a @ u)
        scale = amax * float(np.sum(u)) ** 2
        if q < -tol.match_eps * scale:
            return CriterionResult(CriterionVerdict.NOT_COPOSITIVE, cross,
                              f"u^{j + 1} has negative value {q:.6g}", u / u.sum())
        if q > tol.match_eps * scale:
            raise PremiseError(f"u^{j + 1} is not a zero (value {q:.6g})")
    sets = make_index_sets(n)
    for j, window in enumerate(sets.long):
        if not is_psd(principal_submatrix(a, window), tol):
            return CriterionResult(CriterionVerdict.NOT_COPOSITIVE, cross,
                              f"block on window {j + 1} is not positive semidefinite")
    scales = np.array([amax * us[j].sum() * us[(j + 1) % n].sum() for j in range(n)])
    if np.any(cross < -STRICT_REL * scales):
        j = int(np.nonzero(cross < -STRICT_REL * scales)[0][0])
        return CriterionResult(CriterionVerdict.NOT_COPOSITIVE, cross, f"cross product {j + 1} is negative")
    zero = np.abs(cross) <= EQUAL_REL * scales
    positive = cross > STRICT_REL * scales
    if np.all(zero):
        return CriterionResult(CriterionVerdict.COPOSITIVE_PSD, cross)
    if np.all(positive):
        return CriterionResult(CriterionVerdict.COPOSITIVE_EXCEPTIONAL, cross)
    raise NumericalAlarm("cross products are neither all zero nor all positive")


# --------------------------------------------------------------- oracle


class OracleVerdict(enum.Enum):
    COPOSITIVE = "COPOSITIVE"
    NOT_COPOSITIVE = "NOT_COPOSITIVE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True, eq=False)
class OracleResult:
    verdict: OracleVerdict
    violator: np.ndarray | None = None
    simplices: int = 0
    max_depth: int = 0


def _split_certified(q: np.ndarray, margin: float) -> bool:
    """Cheap sound test: q = P + N with N >= 0 and P the block of vertices
    touching a negative entry, required PSD."""
    neg = q < -margin
    if not neg.any():
        return True
    idx = np.nonzero(neg.any(axis=0))[0]
    return bool(np.linalg.eigvalsh(q[np.ix_(idx, idx)])[0] >= -margin)


def _positive_in_span(basis: np.ndarray) -> np.ndarray | None:
    """A strictly positive vector in the column span of ``basis``, if any."""
    if basis.shape[1] == 1:
        v = basis[:, 0] * np.sign(basis[np.argmax(np.abs(basis[:, 0])), 0])
        return v if np.all(v > POSITIVE_REL * np.max(v)) else None
    res = linprog(np.r_[np.zeros(basis.shape[1]), -1.0],
                  A_ub=np.hstack([-basis, np.ones((basis.shape[0], 1))]), b_ub=np.zeros(basis.shape[0]),
                  A_eq=np.r_[basis.sum(axis=0), 0.0][None, :], b_eq=[1.0],
                  bounds=[(None, None)] * basis.shape[1] + [(None, 1.0)], method="highs")
    if res.status != 0 or res.x[-1] <= POSITIVE_REL:
        return None
    return basis @ res.x[:-1]


def _eigen_criterion(q: np.ndarray, margin: float) -> tuple[bool | None, np.ndarray | None]:
    """Exact copositivity test: some principal block has an eigenvalue below
    -margin with a strictly positive eigenvector iff q is not copositive.

    Returns (True, None), (False, violator) or (None, None) when an
    eigenvector sits on the positivity threshold.
    """
    k = q.shape[0]
    undecided = False
    for mask in range(1, 1 << k):
        idx = [i for i in range(k) if mask >> i & 1]
        vals, vecs = np.linalg.eigh(q[np.ix_(idx, idx)])
        gap = 1e-9 * max(1.0, float(np.max(np.abs(vals))))
        seen = -1
        for r, lam in enumerate(vals):
            if lam >= -margin:
                break
            if r <= seen:
                continue
            group = [g for g in range(r, len(vals)) if abs(vals[g] - lam) <= gap]
            seen = group[-1]
            v = _positive_in_span(vecs[:, group])
            if v is not None:
                full = np.zeros(k)
                full[idx] = v
                return False, full
            if len(group) == 1:
                w = vecs[:, r] * np.sign(vecs[np.argmax(np.abs(vecs[:, r])), r])
                if np.all(w > -POSITIVE_REL * np.max(w)) and np.min(w) <= POSITIVE_REL * np.max(w):
                    undecided = True
    return (None, None) if undecided else (True, None)


def oracle_copositive(a, tol: Tolerance = DEFAULT_TOL, depth_cap: int = 24) -> OracleResult:
    """Simplicial partition of the standard simplex.

    A simplex with vertex matrix V is settled when Q = V^T A V passes the
    pairwise or PSD-block test, or the exact principal-eigenvector test;
    undecided simplices are bisected along their longest edge.
    """
    a = as_sym(a)
    n = a.shape[0]
    if n > 16:
        raise InputError("oracle is limited to n <= 16")
    margin = tol.psd_eps * (1.0 + float(np.max(np.abs(a))))

    def found(x, visited, deepest):
        return OracleResult(OracleVerdict.NOT_COPOSITIVE, x / x.sum(), visited, deepest)

    stack = [(np.eye(n), 0)]
    visited = deepest = 0
    inconclusive = False
    while stack:
        verts, depth = stack.pop()
        visited += 1
        deepest = max(deepest, depth)
        q = verts.T @ a @ verts
        diag = np.diag(q)
        if diag.min() < -margin:
            return found(verts[:, int(np.argmin(diag))], visited, deepest)
        if _split_certified(q, margin):
            continue
        ok, combo = _eigen_criterion(q, margin)
        if ok:
            continue
        if ok is False:
            return found(verts @ combo, visited, deepest)
        if depth >= depth_cap:
            inconclusive = True
            continue
        diff = verts[:, :, None] - verts[:, None, :]
        lengths = np.einsum("kij,kij->ij", diff, diff)
        i, j = np.unravel_index(int(np.argmax(lengths)), lengths.shape)
        mid = (verts[:, i] + verts[:, j]) / 2
        if float(mid @ a @ mid) < -margin:
            return found(mid, visited, deepest)
        left = verts.copy()
        left[:, j] = mid
        right = verts.copy()
        right[:, i] = mid
        stack.append((right, depth + 1))
        stack.append((left, depth + 1))
    verdict = OracleVerdict.INCONCLUSIVE if inconclusive else OracleVerdict.COPOSITIVE
    return OracleResult(verdict, None, visited, deepest)


# -------------------------------------------------------------- zeros


class ZeroKind(enum.Enum):
    MINIMAL_CIRCULANT = "MINIMAL_CIRCULANT"
    NONMINIMAL_CIRCULANT = "NONMINIMAL_CIRCULANT"
    NOT_CIRCULANT = "NOT_CIRCULANT"
    PSD = "PSD"
    NOT_COPOSITIVE = "NOT_COPOSITIVE"


@dataclass(frozen=True, eq=False)
class Zero:
    support: tuple[int, ...]  # 0-based, ascending
    generator: np.ndarray
    corank: int

    @property
    def minimal(self) -> bool:
        return self.corank == 1


@dataclass(frozen=True, eq=False)
class ZeroReport:
    kind: ZeroKind
    zeros: list[Zero] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def minimal_zeros(self) -> list[Zero]:
        return [z for z in self.zeros if z.minimal]

    @property
    def minimal_supports(self) -> list[tuple[int, ...]]:
        return [z.support for z in self.minimal_zeros]


def _normalize_generator(v: np.ndarray) -> np.ndarray:
    last = np.nonzero(v > 0)[0][-1]
    return v / v[last]


def enumerate_zeros(a, tol: Tolerance = DEFAULT_TOL) -> ZeroReport:
    """All supports carrying a zero, by ascending size, with canonical generators.

    Supersets of supports with non-PSD blocks are skipped, since a zero
    support always carries a PSD block.
    """
    a = as_sym(a)
    n = a.shape[0]
    if n > 16:
        raise InputError("support enumeration is limited to n <= 16")
    scale = 1.0 + float(np.max(np.abs(a)))
    if np.min(np.diag(a)) < -tol.psd_eps * scale:
        i = int(np.argmin(np.diag(a)))
        return ZeroReport(ZeroKind.NOT_COPOSITIVE, notes=[f"negative diagonal entry at {i + 1}"])
    bad = np.zeros(1 << n, dtype=bool)
    zeros: list[Zero] = []
    masks = sorted(range(1, 1 << n), key=lambda m: (bin(m).count("1"), m))
    for mask in masks:
        members = [i for i in range(n) if mask >> i & 1]
        if any(bad[mask & ~(1 << i)] for i in members if mask & ~(1 << i)):
            bad[mask] = True
            continue
        block = a[np.ix_(members, members)]
        if not is_psd(block, tol):
            bad[mask] = True
            continue
        rank, _ = rank_and_kernel(block, tol)
        if rank == len(members):
            continue
        try:
            v, corank = positive_kernel_vector(block, tol)
        except PremiseError:
            continue
        full = np.zeros(n)
        full[members] = v
        zeros.append(Zero(tuple(members), _normalize_generator(full), corank))
    for z in zeros:
        if not z.minimal:
            continue
        g = a @ z.generator
        if g.min() < -tol.match_eps * scale * z.generator.sum():
            k = int(np.argmin(g))
            return ZeroReport(ZeroKind.NOT_COPOSITIVE, zeros,
                              [f"zero on {_one_based(z.support)} has negative gradient at {k + 1}"])
    if is_psd(a, tol):
        return ZeroReport(ZeroKind.PSD, zeros)
    kind = _circulant_kind(n, zeros)
    return ZeroReport(kind, zeros)


def _one_based(support) -> str:
    return "{" + ",".join(str(i + 1) for i in support) + "}"


def _circulant_kind(n: int, zeros: list[Zero]) -> ZeroKind:
    if n < 5:
        return ZeroKind.NOT_CIRCULANT
    windows = {tuple(sorted(w)) for w in make_index_sets(n).long}
    supports = {z.support: z for z in zeros}
    maximal = {s for s in supports if not any(set(s) < set(t) for t in supports)}
    if maximal != windows:
        return ZeroKind.NOT_CIRCULANT
    coranks = {supports[w].corank for w in windows}
    if coranks == {1}:
        return ZeroKind.MINIMAL_CIRCULANT
    if coranks == {2}:
        return ZeroKind.NONMINIMAL_CIRCULANT
    return ZeroKind.NOT_CIRCULANT


# ------------------------------------------------------------ extremality


@dataclass(frozen=True, eq=False)
class ExtremalityResult:
    extremal: bool
    solution_dim: int
    residual: float
    report: ZeroReport


def is_extremal(a, tol: Tolerance = DEFAULT_TOL, report: ZeroReport | None = None) -> ExtremalityResult:
    """Extremality test: the linear conditions (X u)_i = 0 inherited from the
    minimal zeros must cut out a single ray."""
    a = as_sym(a)
    n = a.shape[0]
    report = report or enumerate_zeros(a, tol)
    if report.kind is ZeroKind.NOT_COPOSITIVE:
        raise PremiseError("matrix is not copositive")
    scale = 1.0 + float(np.max(np.abs(a)))
    funcs = []
    residual = 0.0
    for z in report.minimal_zeros:
        u = z.generator
        g = a @ u
        for i in np.nonzero(np.abs(g) <= tol.match_eps * scale * u.sum())[0]:
            residual = max(residual, abs(float(g[i])))
            f = np.zeros((n, n))
            f[i, :] += u / 2
            f[:, i] += u / 2
            funcs.append(f)
    basis = nullspace_of_linear_map(funcs, n, tol)
    if not basis:
        raise NumericalAlarm("extremality system has no solution; A itself should solve it")
    return ExtremalityResult(len(basis) == 1, len(basis), residual, report)


def completion_delta(a, u, v, tol: Tolerance = DEFAULT_TOL) -> tuple[float, np.ndarray]:
    """Correction delta with A - delta (E_1n + E_n1) PSD and u + v in its kernel."""
    a = as_sym(a)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    n = a.shape[0]
    if u.shape != (n,) or v.shape != (n,):
        raise InputError("vectors must have length n")
    if not (u[0] > 0 and v[-1] > 0 and u[-1] == 0 and v[0] == 0):
        raise PremiseError("need u_1 > 0 = u_n and v_n > 0 = v_1")
    delta = float(u @ a @ v) / (u[0] * v[-1])
    out = a.copy()
    out[0, -1] -= delta
    out[-1, 0] -= delta
    scale = 1.0 + float(np.max(np.abs(a)))
    w = u + v
    if not is_psd(out, tol) or np.max(np.abs(out @ w)) > tol.match_eps * scale * w.sum():
        raise PremiseError("completion is not PSD with u + v in its kernel")
    return delta, out


def rank1_subtractable(a, w, tol: Tolerance = DEFAULT_TOL, report: ZeroReport | None = None) -> bool:
    """Whether w is orthogonal to every zero of a (minimal zeros suffice)."""
    a = as_sym(a)
    w = np.asarray(w, dtype=float)
    report = report or enumerate_zeros(a, tol)
    for z in report.minimal_zeros:
        u = z.generator
        if abs(float(w @ u)) > tol.match_eps * np.linalg.norm(w) * np.linalg.norm(u):
            return False
    return True
