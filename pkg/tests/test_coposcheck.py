from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coposet.coposcheck import (
    OracleVerdict,
    CriterionVerdict,
    ZeroKind,
    circulant_criterion,
    completion_delta,
    enumerate_zeros,
    is_extremal,
    oracle_copositive,
    rank1_subtractable,
)
from coposet.errors import InputError, PremiseError
from coposet.floquet import periodic_solution_space
from coposet.gallery import (
    deg_extremal,
    family6,
    t_matrix,
    horn,
    polygon_slack_collection,
    reg_extremal,
    regular_polygon_rays,
)
from coposet.numkernel import is_psd
from coposet.supports import make_index_sets, zeros_from_matrix

from conftest import random_family6_angles, random_t_angles

HORN_SUPPORTS = {(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)}


def test_horn_verdicts():
    a = horn()
    crit = circulant_criterion(a, zeros_from_matrix(a))
    assert crit.verdict is CriterionVerdict.COPOSITIVE_EXCEPTIONAL
    assert np.all(crit.cross > 0)
    report = enumerate_zeros(a)
    assert report.kind is ZeroKind.NONMINIMAL_CIRCULANT
    assert set(report.minimal_supports) == HORN_SUPPORTS
    ext = is_extremal(a, report=report)
    assert ext.extremal and ext.solution_dim == 1 and ext.residual <= 1e-8
    assert oracle_copositive(a).verdict is OracleVerdict.COPOSITIVE


def test_psd_slack_member_is_copositive_psd():
    c = polygon_slack_collection(regular_polygon_rays(6, 0.1, 3))
    x = periodic_solution_space(c)[:, 0]
    crit = circulant_criterion(np.outer(x, x), c)
    assert crit.verdict is CriterionVerdict.COPOSITIVE_PSD
    assert enumerate_zeros(np.outer(x, x)).kind is ZeroKind.PSD


@pytest.mark.parametrize("n", [5, 6, 7, 8])
def test_degenerate_family_passes_criterion(n):
    a = deg_extremal(n)
    assert circulant_criterion(a, zeros_from_matrix(a)).verdict is CriterionVerdict.COPOSITIVE_EXCEPTIONAL


def test_perturbation_inside_window_breaks_copositivity():
    a = reg_extremal(7)
    c = zeros_from_matrix(a)
    b = a.copy()
    b[0, 1] -= 0.05
    b[1, 0] -= 0.05
    crit = circulant_criterion(b, c)
    assert crit.verdict is CriterionVerdict.NOT_COPOSITIVE
    assert crit.witness is not None and crit.witness @ b @ crit.witness < 0
    res = oracle_copositive(b)
    assert res.verdict is OracleVerdict.NOT_COPOSITIVE
    assert res.violator.min() >= 0 and res.violator @ b @ res.violator < 0


def test_collection_that_is_not_a_zero_set_is_a_premise_failure():
    with pytest.raises(PremiseError):
        circulant_criterion(np.eye(5), zeros_from_matrix(horn()))
    with pytest.raises(InputError):
        circulant_criterion(np.eye(6), zeros_from_matrix(horn()))


@given(st.floats(0.1, 50.0))
def test_criterion_is_scale_invariant(scale):
    a = horn()
    c = zeros_from_matrix(a)
    assert circulant_criterion(scale * a, c).verdict is CriterionVerdict.COPOSITIVE_EXCEPTIONAL
    assert circulant_criterion(scale * (a - 0.05 * np.eye(5)), c).verdict is CriterionVerdict.NOT_COPOSITIVE


@given(st.integers(0, 2**32 - 1))
def test_criterion_agrees_with_oracle_on_t_matrices(seed):
    a = t_matrix(random_t_angles(np.random.default_rng(seed)))
    c = zeros_from_matrix(a)
    crit = circulant_criterion(a, c)
    assert crit.verdict is CriterionVerdict.COPOSITIVE_EXCEPTIONAL
    assert oracle_copositive(a).verdict is OracleVerdict.COPOSITIVE
    b = a.copy()
    b[2, 4] -= 0.05
    b[4, 2] -= 0.05
    assert circulant_criterion(b, c).verdict.copositive is False
    assert oracle_copositive(b).verdict is OracleVerdict.NOT_COPOSITIVE


def test_oracle_simple_cases():
    assert oracle_copositive(np.eye(4)).verdict is OracleVerdict.COPOSITIVE
    assert oracle_copositive(np.ones((3, 3)) - 2 * np.eye(3)).verdict is OracleVerdict.NOT_COPOSITIVE
    # nonnegative but indefinite
    assert oracle_copositive(np.array([[0.0, 1.0], [1.0, 0.0]])).verdict is OracleVerdict.COPOSITIVE
    with pytest.raises(InputError):
        oracle_copositive(np.eye(17))


def test_principal_blocks_inherit_copositivity(rng):
    a, _, _ = family6(random_family6_angles(rng))
    for members in ([0, 1, 2, 3], [1, 3, 5], [0, 2, 3, 4, 5]):
        assert oracle_copositive(a[np.ix_(members, members)]).verdict is OracleVerdict.COPOSITIVE


def test_t_matrix_zeros_are_minimal_with_corank_one(rng):
    a = t_matrix(random_t_angles(rng))
    report = enumerate_zeros(a)
    assert report.kind is ZeroKind.MINIMAL_CIRCULANT
    windows = {tuple(sorted(w)) for w in make_index_sets(5).long}
    assert set(report.minimal_supports) == windows
    assert all(z.corank == 1 for z in report.minimal_zeros)
    assert is_extremal(a, report=report).extremal


def test_family6_minimal_supports(rng):
    a, v, _ = family6(random_family6_angles(rng))
    report = enumerate_zeros(a)
    expected = {(0, 1, 2), (1, 2, 3), (2, 3, 4), (3, 4, 5), (0, 4, 5), (0, 1, 5)}
    assert set(report.minimal_supports) == expected
    for col in v.T:
        assert col @ a @ col <= 1e-10


def test_identity_is_not_extremal():
    ext = is_extremal(np.eye(4))
    assert not ext.extremal and ext.solution_dim == 10


def test_not_copositive_report():
    assert enumerate_zeros(np.diag([1.0, -1.0, 1.0])).kind is ZeroKind.NOT_COPOSITIVE
    b = horn()
    b[0, 1] = b[1, 0] = -1.1
    report = enumerate_zeros(b)
    assert report.kind is ZeroKind.NOT_COPOSITIVE
    with pytest.raises(PremiseError):
        is_extremal(b, report=report)


def test_completion_delta_recovers_corner(rng):
    n = 5
    u = np.array([1.0, 2.0, 0.5, 0.0, 0.0])
    v = np.array([0.0, 0.0, 1.0, 0.7, 2.0])
    basis = np.linalg.svd(np.stack([u, v]))[2][2:]
    g = rng.standard_normal((3, 3))
    b = basis.T @ (g @ g.T) @ basis
    a = b.copy()
    a[0, -1] += 0.3
    a[-1, 0] += 0.3
    delta, completed = completion_delta(a, u, v)
    assert delta == pytest.approx(0.3, abs=1e-10)
    assert np.allclose(completed, b, atol=1e-10)
    assert is_psd(completed)
    with pytest.raises(PremiseError):
        completion_delta(a, v, u)


def test_rank_one_subtractability():
    a = np.array([[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    assert rank1_subtractable(a, [1.0, 1.0, 0.0]) is False
    assert rank1_subtractable(a, [1.0, -1.0, 0.0]) is True
    assert rank1_subtractable(a, [0.0, 0.0, 1.0]) is True
    # Horn's minimal zeros span everything
    assert rank1_subtractable(horn(), [1.0, -1.0, 1.0, -1.0, 1.0]) is False
