import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from gaugegap.blocks import SectorLabel, build_block
from gaugegap.decompose import decompose
from gaugegap.eigen import (
    NoConvergence,
    ProblemTooLarge,
    dense_spectrum,
    positivity_check,
    topk_symmetric,
)
from gaugegap.gaugecode import compass_2d, xy_1d


def random_symmetric(dim, seed):
    a = np.random.default_rng(seed).standard_normal((dim, dim))
    return (a + a.T) / 2


@pytest.mark.parametrize("k", [1, 3, 5])
def test_topk_matches_dense(k):
    m = random_symmetric(300, 4)
    res = topk_symmetric(m, k=k, tol=1e-10)
    np.testing.assert_allclose(res.values, np.linalg.eigvalsh(m)[::-1][:k], atol=1e-8)
    assert res.converged and res.meta["method"] == "lanczos"
    assert np.all(res.residuals <= 1e-10 * np.maximum(1, np.abs(res.values)))


def test_degenerate_copies_are_found():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.standard_normal((200, 200)))
    vals = np.concatenate([[5.0, 5.0, 5.0], rng.uniform(-3, 3, 197)])
    m = (q * vals) @ q.T
    res = topk_symmetric(m, k=3, check_multiplicity=True)
    np.testing.assert_allclose(res.values, [5, 5, 5], atol=1e-8)


def test_block_operator_above_basis_cap():
    code = compass_2d(4)
    dec = decompose(code)
    block = build_block(code, dec, SectorLabel(1, 0, dec.m_z, dec.m_x))
    res = topk_symmetric(block, k=2, return_vectors=True)
    exact = np.linalg.eigvalsh(block.dense())[::-1][:2]
    np.testing.assert_allclose(res.values, exact, atol=1e-8)
    v = res.vectors[0]
    assert np.linalg.norm(block.apply(v) - res.values[0] * v) < 1e-6


def test_sparse_input_and_small_dense_path():
    m = sp.random(400, 400, density=0.02, random_state=3)
    m = m + m.T
    res = topk_symmetric(m, k=2)
    np.testing.assert_allclose(res.values, np.linalg.eigvalsh(m.toarray())[::-1][:2], atol=1e-8)
    small = topk_symmetric(np.diag([1.0, 3.0, 2.0]), k=2)
    assert small.meta["method"] == "dense"
    np.testing.assert_allclose(small.values, [3, 2])


def test_same_seed_same_answer():
    code = xy_1d(12)
    block = build_block(code, decompose(code))
    a = topk_symmetric(block, k=2, seed=7)
    b = topk_symmetric(block, k=2, seed=7)
    assert np.array_equal(a.values, b.values)


def test_no_convergence_carries_partial_result():
    m = random_symmetric(500, 1)
    with pytest.raises(NoConvergence) as err:
        topk_symmetric(m, k=4, tol=1e-15, max_iter=70)
    assert len(err.value.result.values) == 4
    assert not err.value.result.converged


def test_memory_guard():
    class Huge:
        dim = 1 << 34

        def apply(self, x):
            raise AssertionError("never called")

    with pytest.raises(ProblemTooLarge):
        topk_symmetric(Huge(), k=1)


def test_bad_arguments():
    with pytest.raises(ValueError):
        topk_symmetric(np.eye(3), k=4)
    with pytest.raises(ValueError):
        topk_symmetric(np.ones((2, 3)))
    with pytest.raises(TypeError):
        topk_symmetric("matrix")
    with pytest.raises(ValueError):
        dense_spectrum(np.eye(10), cap=5)


def test_positivity_check():
    assert positivity_check(np.array([0.1, 0.5, 0.2])) == "positive"
    assert positivity_check(np.array([-0.1, -0.5, -0.2])) == "positive"
    assert positivity_check(np.array([0.1, -0.5, 0.2])) == "mixed"
    assert positivity_check(np.array([0.0, 0.5, 0.2])) == "nonnegative"


@settings(max_examples=40, deadline=None)
@given(st.integers(70, 160), st.integers(0, 10_000), st.integers(1, 4))
def test_random_spectra(dim, seed, k):
    m = random_symmetric(dim, seed)
    res = topk_symmetric(m, k=k, seed=seed, check_multiplicity=True)
    np.testing.assert_allclose(res.values, np.linalg.eigvalsh(m)[::-1][:k], atol=1e-7)
