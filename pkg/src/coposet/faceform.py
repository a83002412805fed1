"""Bilinear-form picture of the face attached to a zero collection.

A matrix A whose windows annihilate the collection corresponds to the
bilinear form B = A restricted to the first n-3 indices, viewed on the dual
of the solution space of the periodic recurrence.  Evaluation functionals
e_t for t > n-3 are expanded through the recurrence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, PremiseError
from .floquet import PeriodicSystem, monodromy, system_from_collection
from .numkernel import (
    DEFAULT_TOL,
    Tolerance,
    as_sym,
    functional_row,
    inf_norm,
    is_psd,
    nullspace_of_linear_map,
    principal_submatrix,
    rank_and_kernel,
)
from .supports import (
    ZeroCollection,
    make_index_sets,
    positive_kernel_vector,
    rank_of_U,
    zeros_from_matrix,
)

STRICT_REL = 1e-7
EQUAL_REL = 1e-9


@dataclass(frozen=True, eq=False)
class BilinearForm:
    sys: PeriodicSystem
    mat: np.ndarray

    @property
    def n(self) -> int:
        return self.sys.n

    @property
    def d(self) -> int:
        return self.sys.d

    def functional(self, t: int) -> np.ndarray:
        """Coordinates of e_t (1-based) in the basis e_1..e_d."""
        return self.sys.evaluations(t)[t - 1]

    def value(self, t: int, s: int) -> float:
        return float(self.functional(t) @ self.mat @ self.functional(s))

    def coordinate_scale(self) -> float:
        rows = self.sys.evaluations(2 * self.n + self.d)
        return max(1.0, float(np.max(np.abs(rows)))) ** 2


class MembershipStatus(enum.Enum):
    IN_P = "IN_P"
    IN_F_STRICT = "IN_F_STRICT"
    OUT = "OUT"


@dataclass(frozen=True, eq=False)
class Membership:
    status: MembershipStatus
    reason: str | None
    margins: np.ndarray


class FaceKind(enum.Enum):
    ZERO = "ZERO"
    PSD_ONLY = "PSD_ONLY"
    RAY_EXCEPTIONAL = "RAY_EXCEPTIONAL"
    R2_EVEN = "R2_EVEN"
    HIGHER_ODD = "HIGHER_ODD"
    UNRESOLVED = "UNRESOLVED"


@dataclass(frozen=True, eq=False)
class FaceReport:
    n: int
    rank_U: int
    monodromy_is_identity: bool
    r_psd: int
    multipliers_on_circle: int
    face_kind: FaceKind
    psd_dim: int | None = None
    dim_A_u: int | None = None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "rank_U": self.rank_U,
            "monodromy_is_identity": self.monodromy_is_identity,
            "r_psd": self.r_psd,
            "multipliers_on_circle": self.multipliers_on_circle,
            "face_kind": self.face_kind.value,
            "psd_dim": self.psd_dim,
            "dim_A_u": self.dim_A_u,
            "notes": list(self.notes),
        }


def window_residual(a: np.ndarray, c: ZeroCollection) -> float:
    """Largest |(A_{I_j} u^j)_i| over all windows, relative to |A| |u^j|."""
    sets = make_index_sets(c.n)
    worst = 0.0
    scale_a = max(1.0, float(np.max(np.abs(a))))
    for j, window in enumerate(sets.long):
        coef = c.coefficients(j)
        r = principal_submatrix(a, window) @ coef
        worst = max(worst, float(np.max(np.abs(r))) / (scale_a * float(np.max(coef))))
    return worst


def lambda_of(a, c: ZeroCollection, tol: Tolerance = DEFAULT_TOL) -> BilinearForm:
    a = as_sym(a)
    if a.shape[0] != c.n:
        raise InputError("matrix and collection sizes differ")
    res = window_residual(a, c)
    if res > tol.match_eps:
        raise PremiseError(f"matrix does not annihilate the collection on its windows (residual {res:.3g})")
    sys = system_from_collection(c)
    d = sys.d
    return BilinearForm(sys, a[:d, :d].copy())


def _equality_violations(form: BilinearForm, tol: Tolerance) -> str | None:
    n, d = form.n, form.d
    bound = tol.match_eps * (1.0 + inf_norm(form.mat)) * form.coordinate_scale()
    for t in range(1, d + 1):
        for s in range(1, d + 1):
            if abs(form.value(t + n, s + n) - form.value(t, s)) > bound:
                return f"shift invariance fails at ({t}, {s})"
    for t in range(1, n + 1):
        for s in range(t + 3, n - 2 + t):
            if s > n:
                break
            if abs(form.value(t, s) - form.value(t + n, s)) > bound:
                return f"linear relation fails at ({t}, {s})"
    return None


def inequality_margins(form: BilinearForm) -> np.ndarray:
    n = form.n
    return np.array([form.value(t, t + 2) - form.value(t + n, t + 2) for t in range(1, n + 1)])


def check_membership(form: BilinearForm, tol: Tolerance = DEFAULT_TOL) -> Membership:
    """Decide whether the form lies in the PSD part, strictly in the face, or outside."""
    margins = inequality_margins(form)
    if not is_psd(form.mat, tol):
        return Membership(MembershipStatus.OUT, "form is not positive semidefinite", margins)
    bad = _equality_violations(form, tol)
    if bad:
        return Membership(MembershipStatus.OUT, bad, margins)
    scale = 1.0 + inf_norm(form.mat)
    strict = margins > STRICT_REL * scale
    equal = np.abs(margins) <= EQUAL_REL * scale
    if np.all(strict):
        return Membership(MembershipStatus.IN_F_STRICT, None, margins)
    if np.all(equal):
        return Membership(MembershipStatus.IN_P, None, margins)
    negative = np.nonzero(margins < -EQUAL_REL * scale)[0]
    if negative.size:
        return Membership(MembershipStatus.OUT, f"inequality {negative[0] + 1} violated", margins)
    return Membership(MembershipStatus.OUT, "dichotomy violated: margins mix zero and positive values", margins)


def lambda_inverse(form: BilinearForm, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Rebuild the n x n matrix from a form satisfying the linear constraints."""
    bad = _equality_violations(form, tol)
    if bad:
        raise PremiseError(bad)
    n = form.n
    a = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            v = form.value(i, j) if j - i <= n - 3 else form.value(i + n, j)
            a[i - 1, j - 1] = a[j - 1, i - 1] = v
    return a


def triangular_block(form: BilinearForm, k: int) -> np.ndarray:
    """Matrix (B(e_{t+k} - e_{t+n+k}, e_{s+k})) for t = 0..n-5, s = 2..n-3."""
    n = form.n
    out = np.zeros((n - 4, n - 4))
    for t in range(n - 4):
        for s in range(2, n - 2):
            out[t, s - 2] = form.value(t + k, s + k) - form.value(t + n + k, s + k)
    return out


def _window_solutions(vectors, n: int, tol: Tolerance) -> list[np.ndarray]:
    funcs = []
    for window, u in zip(make_index_sets(n).long, vectors):
        for i in window:
            f = np.zeros((n, n))
            f[i, :] += u / 2
            f[:, i] += u / 2
            funcs.append(f)
    return nullspace_of_linear_map(funcs, n, tol)


def A_u_basis(c: ZeroCollection, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Basis of symmetric X with X_{I_j} u^j_{I_j} = 0 for every window."""
    return _window_solutions([c.vector(j) for j in range(c.n)], c.n, tol)


def circulant_window_solutions(core, n: int, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Same solution space for the cyclic shifts of ``core``, which may have any signs."""
    core = np.asarray(core, dtype=float)
    if n < 5 or core.shape != (n - 2,):
        raise InputError("core must have n - 2 entries and n >= 5")
    base = np.concatenate([core, np.zeros(2)])
    return _window_solutions([np.roll(base, j) for j in range(n)], n, tol)


def dim_A_u(c: ZeroCollection, tol: Tolerance = DEFAULT_TOL) -> int:
    return len(A_u_basis(c, tol))


def classify_face(c: ZeroCollection, tol: Tolerance = DEFAULT_TOL, member=None) -> FaceReport:
    """Classify the face of matrices sharing the zero collection.

    ``member`` is an optional matrix of that face used to settle the
    exceptional cases; without it those cases come back UNRESOLVED.
    """
    n = c.n
    rank_u = rank_of_U(c, tol)
    mono = monodromy(system_from_collection(c))
    r_psd = n - rank_u
    on_circle = mono.on_unit_circle()
    identity = bool(np.max(np.abs(mono.matrix - np.eye(n - 3))) <= 1e-8)
    base = dict(n=n, rank_U=rank_u, monodromy_is_identity=identity, r_psd=r_psd,
                multipliers_on_circle=on_circle)
    if rank_u == 3:
        return FaceReport(**base, face_kind=FaceKind.PSD_ONLY, psd_dim=n - 3,
                          notes=["monodromy is the identity"])
    if r_psd >= 2:
        return FaceReport(**base, face_kind=FaceKind.PSD_ONLY, psd_dim=r_psd,
                          notes=["periodic solution space has dimension >= 2"])
    if on_circle < n - 4:
        kind = FaceKind.PSD_ONLY if r_psd else FaceKind.ZERO
        return FaceReport(**base, face_kind=kind, psd_dim=r_psd or None,
                          notes=[f"only {on_circle} multipliers on the unit circle"])
    dim_au = dim_A_u(c, tol)
    base["dim_A_u"] = dim_au
    if member is None:
        return FaceReport(**base, face_kind=FaceKind.UNRESOLVED, psd_dim=r_psd or None,
                          notes=["necessary conditions hold; supply a member to decide"])
    form = lambda_of(member, c, tol)
    status = check_membership(form, tol)
    if status.status is not MembershipStatus.IN_F_STRICT:
        note = "member is positive semidefinite" if status.status is MembershipStatus.IN_P else \
            f"member is not in the face: {status.reason}"
        return FaceReport(**base, face_kind=FaceKind.UNRESOLVED, psd_dim=r_psd or None, notes=[note])
    rank_b, _ = rank_and_kernel(form.mat, tol)
    has_minus_one = mono.count_near(-1.0) > 0
    notes = [f"member form has rank {rank_b}"]
    if n % 2 == 0:
        kind = FaceKind.R2_EVEN if r_psd == 1 else FaceKind.RAY_EXCEPTIONAL
    elif dim_au == 1 or not has_minus_one:
        kind = FaceKind.RAY_EXCEPTIONAL
    else:
        kind = FaceKind.HIGHER_ODD
        notes.append(f"face dimension at most {dim_au}; extremality of interior points not decided")
    return FaceReport(**base, face_kind=kind, psd_dim=r_psd or None, notes=notes)


def manifold_codim_check(a, kind: str, tol: Tolerance = DEFAULT_TOL) -> tuple[int, int]:
    """Rank of the gradient system for the zero-preserving manifold and its expected value.

    ``kind`` is "MINIMAL" (n gradients u u^T) or "NONMINIMAL" (2n gradients
    built from the kernels of the short windows).
    """
    a = as_sym(a)
    n = a.shape[0]
    sets = make_index_sets(n)
    if kind == "MINIMAL":
        c = zeros_from_matrix(a, tol)
        grads = [np.outer(c.vector(j), c.vector(j)) for j in range(n)]
    elif kind == "NONMINIMAL":
        vs = []
        for window in sets.short:
            v, corank = positive_kernel_vector(principal_submatrix(a, window), tol)
            if corank != 1:
                raise PremiseError("short window block must have corank 1")
            full = np.zeros(n)
            full[list(window)] = v / np.linalg.norm(v)
            vs.append(full)
        grads = [np.outer(v, v) for v in vs]
        grads += [np.outer(vs[j], vs[(j + 1) % n]) + np.outer(vs[(j + 1) % n], vs[j]) for j in range(n)]
    else:
        raise InputError(f"kind must be MINIMAL or NONMINIMAL, got {kind!r}")
    m = np.vstack([functional_row(g) for g in grads])
    s = np.linalg.svd(m, compute_uv=False)
    rank = int(np.count_nonzero(s > tol.rank_eps * max(1.0, float(s[0]))))
    return rank, len(grads)
