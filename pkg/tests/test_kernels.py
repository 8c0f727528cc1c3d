"""The jit and numpy variants of every kernel must agree."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from biasdisen import kernels
from biasdisen._backend import HAVE_NUMBA
from biasdisen.sparse import SparseMatrix

IMPL = kernels.IMPLEMENTATIONS
pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


def test_spmm_agree():
    rng = np.random.default_rng(0)
    dense = (rng.random((40, 30)) < 0.1) * rng.normal(size=(40, 30))
    dense[5] = 0.0  # empty row
    a = SparseMatrix.from_dense(dense)
    h = rng.normal(size=(30, 7))
    ref = dense @ h
    for name in ("numba", "numpy"):
        out = IMPL["spmm"][name](a.indptr, a.indices, a.data, h)
        np.testing.assert_allclose(out, ref, rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    x=hnp.arrays(np.float64, st.tuples(st.integers(2, 25), st.integers(1, 3)),
                 elements=st.integers(0, 4).map(float)),
    data=st.data(),
)
def test_knn_agree_with_ties(x, data):
    k = data.draw(st.integers(1, x.shape[0] - 1))
    a = IMPL["knn"]["numba"](x, k)
    b = IMPL["knn"]["numpy"](x, k)
    np.testing.assert_array_equal(a, b)


def test_knn_numpy_blocked_matches_unblocked():
    x = np.random.default_rng(1).random((70, 3))
    full = IMPL["knn"]["numpy"](x, 5)
    tiny = IMPL["knn"]["numpy"](x, 5, block_bytes=64)
    np.testing.assert_array_equal(full, tiny)


@settings(max_examples=200, deadline=None)
@given(
    a=st.lists(st.integers(-3, 3).map(float), min_size=1, max_size=9),
    b=st.lists(st.integers(-3, 3).map(float), min_size=1, max_size=9),
)
def test_w1_agree(a, b):
    a, b = np.array(a), np.array(b)
    va, ga, gb = IMPL["w1"]["numba"](a, b)
    vb, ha, hb = IMPL["w1"]["numpy"](a, b)
    assert va == pytest.approx(vb, abs=1e-12)
    np.testing.assert_allclose(ga, ha, atol=1e-12)
    np.testing.assert_allclose(gb, hb, atol=1e-12)


def test_w1_columns_agree_and_match_scalar():
    rng = np.random.default_rng(2)
    a, b = rng.normal(size=(9, 5)), rng.normal(size=(4, 5))
    v1, ga1, gb1 = IMPL["w1_columns"]["numba"](a, b)
    v2, ga2, gb2 = IMPL["w1_columns"]["numpy"](a, b)
    np.testing.assert_allclose(v1, v2, atol=1e-12)
    np.testing.assert_allclose(ga1, ga2, atol=1e-12)
    np.testing.assert_allclose(gb1, gb2, atol=1e-12)
    for j in range(5):
        assert v1[j] == pytest.approx(IMPL["w1"]["numpy"](a[:, j], b[:, j])[0], abs=1e-12)
