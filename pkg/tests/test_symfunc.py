from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hrsurf.errors import RangeError, ValidationError
from hrsurf.symfunc import (
    PrincipalCurvatures,
    SelfAdjointOperator,
    elementary_symmetric,
    elementary_symmetric_all,
    identity_report,
    newton_tensor,
    newton_tensors,
    normalized_hr,
    partial_sr,
    positivity_chain,
)

from helpers import random_symmetric, subset_sr

curvatures = st.integers(2, 8).flatmap(
    lambda n: arrays(np.float64, n, elements=st.floats(-3, 3, allow_nan=False)))


def test_s2_of_123():
    assert elementary_symmetric([1, 2, 3], 2) == 11


@pytest.mark.parametrize("n", [2, 3, 5, 8])
@pytest.mark.parametrize("r", [0, 1, 2])
def test_all_ones_gives_binomial(n, r):
    assert elementary_symmetric(np.ones(n), r) == comb(n, r)


def test_normalized_examples():
    assert normalized_hr([1, 1], 2) == 1
    assert normalized_hr([1, 2, 3], 2) == pytest.approx(11 / 3, rel=1e-15)
    assert normalized_hr([0.0, 2.0, -1.5], 3) == 0


@pytest.mark.parametrize("r", [-1, 4])
def test_out_of_range(r):
    with pytest.raises(RangeError):
        elementary_symmetric([1, 2, 3], r)


def test_normalized_rejects_r0():
    with pytest.raises(RangeError):
        normalized_hr([1, 2], 0)


def test_principal_curvatures_validation():
    with pytest.raises(ValidationError):
        PrincipalCurvatures([1.0])
    with pytest.raises(ValidationError):
        PrincipalCurvatures([1.0, np.inf])
    k = PrincipalCurvatures([1, 2, 3])
    assert k.n == 3 and k.orientation == "upward"
    assert elementary_symmetric(k, 3) == 6


@settings(max_examples=200, deadline=None)
@given(curvatures)
def test_recurrence_matches_enumeration(k):
    s = elementary_symmetric_all(k)
    for r in range(k.size + 1):
        ref = subset_sr(k, r)
        scale = max(1.0, subset_sr(np.abs(k), r))
        assert abs(s[r] - ref) <= 1e-12 * scale


@settings(max_examples=50, deadline=None)
@given(curvatures, st.randoms(use_true_random=False))
def test_permutation_invariance(k, rnd):
    perm = list(range(k.size))
    rnd.shuffle(perm)
    a, b = elementary_symmetric_all(k), elementary_symmetric_all(k[perm])
    scale = np.maximum(1.0, elementary_symmetric_all(np.abs(k)))
    assert np.all(np.abs(a - b) <= 1e-14 * scale)


def test_batched_evaluation():
    k = np.array([[1.0, 2.0, 3.0], [1.0, 1.0, 1.0]])
    np.testing.assert_array_equal(elementary_symmetric_all(k), [[1, 6, 11, 6], [1, 3, 3, 1]])


def test_partial_derivative_by_deletion():
    k = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(partial_sr(k, 2), [5, 4, 3])
    h = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (elementary_symmetric(k + e, 3) - elementary_symmetric(k - e, 3)) / (2 * h)
        assert fd == pytest.approx(partial_sr(k, 3)[i], rel=1e-8)


def test_newton_tensor_diag():
    a = np.diag([1.0, 2.0, 3.0])
    np.testing.assert_allclose(newton_tensor(a, 1).matrix, np.diag([5.0, 4.0, 3.0]))
    assert np.trace(newton_tensor(a, 1).matrix @ a) == pytest.approx(22.0)
    np.testing.assert_allclose(newton_tensor(a, 0).matrix, np.eye(3))


def test_trace_p2_random_4x4(rng):
    a = random_symmetric(rng, 4)
    k = np.linalg.eigvalsh(a)
    s2 = subset_sr(k, 2)
    assert np.trace(newton_tensor(a, 2).matrix) == pytest.approx(2 * s2, rel=1e-12, abs=1e-12)


def test_newton_tensor_rejects_asymmetric():
    with pytest.raises(ValidationError):
        newton_tensor(np.array([[0.0, 1.0], [0.0, 0.0]]), 1)
    with pytest.raises(RangeError):
        newton_tensor(np.eye(3), 3)


def test_symmetrize_within_tolerance():
    a = np.array([[1.0, 2.0], [2.0 + 1e-14, 1.0]])
    op = SelfAdjointOperator(a)
    np.testing.assert_array_equal(op.matrix, op.matrix.T)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_newton_tensor_commutes(rng, n):
    for _ in range(20):
        a = random_symmetric(rng, n)
        a *= rng.uniform(1.0, 2.0) / np.linalg.norm(a, 2)
        norm = np.linalg.norm(a, 2)
        for r in range(n):
            p = newton_tensor(a, r).matrix
            assert np.linalg.norm(p @ a - a @ p, 2) <= 1e-11 * norm ** (r + 1)


def test_general_matrix_recursion_matches_symmetric(rng):
    # a conjugated copy A' = M A M^-1 has the same S_j and conjugated P_j
    n = 5
    a = random_symmetric(rng, n)
    m = rng.normal(size=(n, n)) + 3 * np.eye(n)
    b = m @ a @ np.linalg.inv(m)
    ps, ss = newton_tensors(b, n - 1)
    s = elementary_symmetric_all(np.linalg.eigvalsh(a))
    for r in range(n):
        assert ss[r] == pytest.approx(s[r], rel=1e-9, abs=1e-9)
        ref = m @ newton_tensor(a, r).matrix @ np.linalg.inv(m)
        np.testing.assert_allclose(ps[r], ref, atol=1e-8)


def test_identity_report_zero_and_identity():
    rep = identity_report(np.zeros((4, 4)))
    assert rep.max_abs == 0 and rep.passed
    rep = identity_report(np.eye(3))
    np.testing.assert_allclose(rep.sr, [1, 3, 3, 1])
    assert rep.max_abs < 1e-15


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_identity_report_random_diagonal(rng, n):
    for _ in range(20):
        k = rng.uniform(-2, 2, n)
        rep = identity_report(np.diag(k))
        assert rep.passed, rep.checks
        assert all(abs(rep.sr[r] - subset_sr(k, r)) < 1e-12 for r in range(n + 1))


def test_positivity_chain_examples():
    assert positivity_chain([1, 1, 1, 1], 4)
    assert positivity_chain([1, 1, 1, 1], 1)
    assert not positivity_chain([1, -1], 2)


def test_positivity_chain_matches_newton_eigenvalues(rng):
    for _ in range(50):
        n = rng.integers(2, 6)
        k = rng.uniform(-0.5, 2.0, n)
        r = int(rng.integers(1, n + 1))
        by_eig = all(np.min(np.linalg.eigvalsh(newton_tensor(np.diag(k), j - 1).matrix)) > 0
                     for j in range(1, r + 1))
        assert positivity_chain(k, r) == by_eig
