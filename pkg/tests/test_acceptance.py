"""Acceptance criteria 1-13.

Each test is one criterion.  Under pytest a PASS/FAIL line per criterion is
printed in the terminal summary; ``python3 tests/test_acceptance.py`` runs the
same checks without pytest.
"""
from __future__ import annotations

import json
import sys
import tempfile
import time
from pathlib import Path

import mpmath
import numpy as np

from coposet.cli import main as cli_main
from coposet.coposcheck import (
    OracleVerdict,
    CriterionVerdict,
    ZeroKind,
    circulant_criterion,
    enumerate_zeros,
    is_extremal,
    oracle_copositive,
)
from coposet.errors import NumericalAlarm
from coposet.faceform import (
    A_u_basis,
    MembershipStatus,
    check_membership,
    dim_A_u,
    lambda_inverse,
    lambda_of,
    manifold_codim_check,
)
from coposet.floquet import monodromy, periodic_solution_space, system_from_collection
from coposet.gallery import (
    AngleTuple,
    angle_count,
    angles_to_core,
    fraction_condition,
    conjecture_search,
    deg_extremal,
    family6,
    t_matrix,
    horn,
    lambda_weights,
    polygon_slack_collection,
    reg_extremal,
    regular_polygon_rays,
    toeplitz_atom,
    toeplitz_decompose,
)
from coposet.numkernel import principal_submatrix, rank_and_kernel
from coposet.supports import (
    collection_from_core,
    make_index_sets,
    positive_kernel_vector,
    rank_of_U,
    zeros_from_matrix,
)

SEED = 42


def rng(offset=0):
    return np.random.default_rng(SEED + offset)


def t_matrix_thetas(count=25):
    gen = rng(1)
    return [gen.uniform(0.05, 0.6, 5) for _ in range(count)]


def family6_phis(count=25):
    gen = rng(2)
    out = []
    while len(out) < count:
        phi = gen.uniform(0.05, 1.0, 3)
        if phi.sum() < np.pi - 0.05:
            out.append(phi)
    return out


def window_coranks(a):
    n = a.shape[0]
    return {len(w) - rank_and_kernel(principal_submatrix(a, w))[0] for w in make_index_sets(n).long}


def window_supports(n):
    return {tuple(sorted(w)) for w in make_index_sets(n).long}


def slack_psd_members(sizes=(5, 6, 7), per_size=3):
    gen = rng(3)
    out = []
    for n in sizes:
        for _ in range(per_size):
            c = polygon_slack_collection(regular_polygon_rays(n, 0.15, gen))
            basis = periodic_solution_space(c)
            coef = gen.standard_normal((basis.shape[1], basis.shape[1]))
            out.append((basis @ coef @ coef.T @ basis.T, c))
    return out


def gallery_with_collections(max_n=10):
    members = [horn()]
    members += [t_matrix(t) for t in t_matrix_thetas(8)]
    members += [deg_extremal(n) for n in range(5, max_n + 1)]
    members += [reg_extremal(n) for n in range(5, max_n + 1, 2)]
    members += [family6(p)[0] for p in family6_phis(8)]
    out = [(a, zeros_from_matrix(a)) for a in members]
    out += [(a, family6(p)[2]) for a, p in zip(members[-8:], family6_phis(8))]
    return out


# ------------------------------------------------------------------ criteria


def test_criterion_01_horn_suite():
    with tempfile.TemporaryDirectory() as tmp:
        matrix = Path(tmp, "horn.json")
        report = Path(tmp, "verify.json")
        assert cli_main(["gallery", "horn", "-o", str(matrix)]) == 0
        assert cli_main(["verify", str(matrix), "-o", str(report)]) == 0
        out = json.loads(report.read_text())
    assert out["copositive"] is True and out["exceptional"] is True and out["extremal"] is True
    assert out["zero_kind"] == "NONMINIMAL_CIRCULANT"
    assert {tuple(s) for s in out["minimal_supports"]} == {(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)}
    ext = is_extremal(horn())
    assert ext.solution_dim == 1 and ext.residual <= 1e-8


def test_criterion_02_t_matrix_suite():
    for theta in t_matrix_thetas():
        a = t_matrix(theta)
        report = enumerate_zeros(a)
        assert report.kind is ZeroKind.MINIMAL_CIRCULANT
        assert set(report.minimal_supports) == window_supports(5)
        assert window_coranks(a) == {1}
        assert is_extremal(a, report=report).extremal
        assert circulant_criterion(a, zeros_from_matrix(a)).verdict is CriterionVerdict.COPOSITIVE_EXCEPTIONAL


def test_criterion_03_degenerate_five_is_horn():
    assert np.max(np.abs(deg_extremal(5) - horn())) <= 1e-12


def test_criterion_04_degenerate_family():
    for n in range(5, 11):
        a = deg_extremal(n)
        c = zeros_from_matrix(a)
        assert circulant_criterion(a, c).verdict is CriterionVerdict.COPOSITIVE_EXCEPTIONAL
        assert is_extremal(a).extremal
        assert window_coranks(a) == {2}
        if n % 2 == 0:
            x = (-1.0) ** np.arange(n)
            p = np.outer(x, x)
            assert all(abs(c.vector(j) @ p @ c.vector(j)) <= 1e-12 for j in range(n))
            assert check_membership(lambda_of(p, c)).status is MembershipStatus.IN_P


def test_criterion_05_regular_family():
    for n in (5, 7, 9):
        a = reg_extremal(n)
        report = enumerate_zeros(a)
        assert report.kind is ZeroKind.MINIMAL_CIRCULANT
        assert is_extremal(a, report=report).extremal
        assert window_coranks(a) == {1}
        assert dim_A_u(zeros_from_matrix(a)) == 1


def test_criterion_06_six_by_six_classification():
    expected = {(0, 1, 2), (1, 2, 3), (2, 3, 4), (3, 4, 5), (0, 4, 5), (0, 1, 5)}
    for phi in family6_phis():
        a, v, c = family6(phi)
        assert circulant_criterion(a, c).verdict is CriterionVerdict.COPOSITIVE_EXCEPTIONAL
        report = enumerate_zeros(a)
        assert set(report.minimal_supports) == expected
        assert is_extremal(a, report=report).extremal
        for col in v.T:
            assert col @ a @ col <= 1e-10
            support = np.nonzero(col > 0)[0]
            kernel, corank = positive_kernel_vector(principal_submatrix(a, support))
            assert corank == 1
            assert np.allclose(kernel / kernel.max(), col[support] / col[support].max(), atol=1e-9)


def cross_validation_instances():
    gen = rng(7)
    bases = [(a, c) for a, c in gallery_with_collections(max_n=7)]
    bases += slack_psd_members()
    instances = list(bases)
    while len(instances) < 200:
        a, c = bases[int(gen.integers(len(bases)))]
        n = a.shape[0]
        i, j = (int(k) for k in gen.integers(0, n, 2))
        b = a.copy()
        b[i, j] -= 0.05
        if i != j:
            b[j, i] -= 0.05
        instances.append((b, c))
    return instances


def test_criterion_07_criterion_matches_oracle():
    instances = cross_validation_instances()
    assert len(instances) == 200
    disagreements = inconclusive = alarms = 0
    for a, c in instances:
        oracle = oracle_copositive(a, depth_cap=24)
        if oracle.verdict is OracleVerdict.INCONCLUSIVE:
            inconclusive += 1
            continue
        try:
            verdict = circulant_criterion(a, c).verdict
        except NumericalAlarm:
            alarms += 1
            continue
        if verdict.copositive != (oracle.verdict is OracleVerdict.COPOSITIVE):
            disagreements += 1
    assert (disagreements, inconclusive, alarms) == (0, 0, 0)


def matched(found, expected, atol):
    found = list(found)
    for z in expected:
        k = int(np.argmin([abs(z - f) for f in found]))
        if abs(z - found[k]) > atol:
            return False
        found.pop(k)
    return not found


def interval_angles(n, gen):
    j = np.arange(1, angle_count(n) + 1)
    lo, hi = (2 * j + 2) * np.pi / n, (2 * j + 4) * np.pi / n
    return AngleTuple(n, np.minimum(lo + (hi - lo) * gen.uniform(0.1, 0.9, j.size), np.pi))


def test_criterion_08_floquet_identities():
    collections = [c for _, c in gallery_with_collections()] + [c for _, c in slack_psd_members()]
    for c in collections:
        mono = monodromy(system_from_collection(c))
        expected = np.prod([c.vector(j)[j] for j in range(c.n)])
        assert abs(mono.det - expected) <= 1e-9 * abs(expected)
        rank_u = rank_of_U(c)
        if rank_u == 3:
            assert np.max(np.sum(np.abs(mono.matrix - np.eye(c.n - 3)), axis=1)) <= 1e-8
        assert mono.geometric_multiplicity(1.0) == c.n - rank_u
    gen = rng(8)
    for n in range(5, 12):
        for _ in range(4):
            angles = interval_angles(n, gen)
            c = collection_from_core(angles_to_core(angles), n)
            mono = monodromy(system_from_collection(c))
            expected = [np.exp(s * 1j * n * z) for z in angles.zetas for s in (1, -1)]
            expected = expected if n % 2 else expected + [1.0]
            # defective pairs (zeta = pi) scatter by sqrt(eps); read them as cluster means
            found = [z for z, k in mono.clusters() for _ in range(k)]
            assert matched(found, expected, 1e-7)


def weight_samples(count=10_000, separation=0.05):
    gen = rng(9)
    while count:
        n = int(gen.integers(5, 16))
        m = angle_count(n)
        unit = 2 * np.pi / n
        z = np.sort(gen.uniform(0, np.pi, m))
        if np.diff(np.concatenate([[0.0], z, [np.pi]])).min() < separation:
            continue
        if np.min(np.abs(z / unit - np.round(z / unit)) * unit) < separation:
            continue
        count -= 1
        yield AngleTuple(n, z)


def exact_weights(angles):
    mpmath.mp.dps = 40
    n, m = angles.n, angles.m
    z = [mpmath.mpf(float(x)) for x in angles.zetas]
    ks = list(range(3, m + 2)) + [2]
    mat = mpmath.matrix([[mpmath.cos((n - k) * zj) - mpmath.cos(k * zj) for zj in z] for k in ks])
    rhs = mpmath.matrix([0] * (m - 1) + [-1])
    return np.array([float(x) for x in mpmath.lu_solve(mat, rhs)])


def test_criterion_09_closed_form_weights():
    worst = 0.0
    mismatches = 0
    for angles in weight_samples():
        w = lambda_weights(angles)
        worst = max(worst, float(np.max(np.abs(w - exact_weights(angles)))))
        mismatches += bool(np.all(w > 0)) != bool(np.all(fraction_condition(angles)))
    assert worst <= 1e-10 and mismatches == 0


def test_criterion_10_conjecture_grid_search():
    start = time.perf_counter()
    for n, resolution in ((5, 100), (6, 100), (7, 40), (8, 40)):
        report = conjecture_search(n, resolution, workers=4)
        assert report.fraction_condition_holds > 0
        assert report.counterexamples == []
    assert time.perf_counter() - start <= 600


def test_criterion_11_manifold_codimensions():
    for theta in t_matrix_thetas(10):
        assert manifold_codim_check(t_matrix(theta), "MINIMAL") == (5, 5)
    for n in (5, 7):
        assert manifold_codim_check(reg_extremal(n), "MINIMAL") == (n, n)
    assert manifold_codim_check(horn(), "NONMINIMAL") == (10, 10)
    for n in range(5, 9):
        assert manifold_codim_check(deg_extremal(n), "NONMINIMAL") == (2 * n, 2 * n)
    for phi in family6_phis(10):
        assert manifold_codim_check(family6(phi)[0], "NONMINIMAL") == (12, 12)


def test_criterion_12_toeplitz_round_trip():
    gen = rng(12)
    done = 0
    while done < 100:
        atoms = int(gen.integers(1, 7))
        with_pi = bool(gen.integers(0, 2))
        size = int(gen.integers(2 * atoms + with_pi + 1, 13)) if 2 * atoms + with_pi < 12 else 0
        if not size:
            continue
        zetas = np.sort(gen.uniform(0.1, np.pi - 0.1, atoms))
        if atoms > 1 and np.diff(zetas).min() < 0.15:
            continue
        if with_pi:
            zetas = np.append(zetas, np.pi)
        weights = gen.uniform(0.2, 2.0, zetas.size)
        t = sum(w * toeplitz_atom(z, size) for z, w in zip(zetas, weights))
        dec = toeplitz_decompose(t)
        assert np.max(np.abs(t - dec.reconstruct(size))) <= 1e-9
        assert dec.angles.size == zetas.size
        assert np.max(np.abs(dec.angles - zetas)) <= 1e-7
        done += 1


def test_criterion_13_lambda_consistency():
    gen = rng(13)
    members = gallery_with_collections() + slack_psd_members()
    for a, c in list(members):
        basis = A_u_basis(c)
        members.append((sum(gen.standard_normal() * b for b in basis), c))
    for k, (a, c) in enumerate(members):
        form = lambda_of(a, c)
        assert np.max(np.abs(lambda_inverse(form) - a)) <= 1e-10
        rank_b = rank_and_kernel(form.mat)[0]
        assert all(rank_and_kernel(principal_submatrix(a, w))[0] == rank_b
                   for w in make_index_sets(c.n).long)
        if k < len(members) // 2:
            assert check_membership(form).status in (MembershipStatus.IN_P, MembershipStatus.IN_F_STRICT)


if __name__ == "__main__":
    failed = 0
    for name, func in sorted(globals().items()):
        if not name.startswith("test_criterion_"):
            continue
        try:
            func()
        except Exception as exc:  # report and keep going
            failed += 1
            print(f"FAIL {name}: {type(exc).__name__}: {exc}")
        else:
            print(f"PASS {name}")
    sys.exit(1 if failed else 0)
