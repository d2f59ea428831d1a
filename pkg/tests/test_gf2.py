import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sheafhofer import gf2

BACKENDS = gf2.available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    prev = gf2.set_backend(request.param)
    yield request.param
    gf2.set_backend(prev)


def test_compiled_kernel_is_built():
    # the fallback exists for machines without a compiler; this build has one
    assert "cython" in BACKENDS


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        gf2.set_backend("fortran")


def test_backends_agree_on_random_matrices(rng):
    for _ in range(200):
        shape = tuple(int(x) for x in rng.integers(1, 90, 2))
        m = rng.integers(0, 2, shape, dtype=np.uint8)
        out = {}
        for b in BACKENDS:
            prev = gf2.set_backend(b)
            out[b] = (gf2.rank(m), gf2.rref(m)[0].tobytes(), tuple(gf2.rref(m)[1]))
            gf2.set_backend(prev)
        assert len(set(out.values())) == 1


mats = arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)), elements=st.integers(0, 1))


@given(mats)
def test_rank_nullity(m):
    for b in BACKENDS:
        prev = gf2.set_backend(b)
        ns = gf2.nullspace(m)
        assert gf2.rank(m) + ns.shape[0] == m.shape[1]
        if ns.size:
            assert not gf2.matmul(m, ns.T).any()
        gf2.set_backend(prev)


@given(mats, st.data())
def test_solve_returns_solution_or_proves_inconsistency(m, data):
    x = np.array(data.draw(st.lists(st.integers(0, 1), min_size=m.shape[1], max_size=m.shape[1])), np.uint8)
    b = gf2.matmul(m, x[:, None])[:, 0]
    y = gf2.solve(m, b)
    assert y is not None and np.array_equal(gf2.matmul(m, y[:, None])[:, 0], b)
    # inconsistent right-hand side: append a zero row with target 1
    z = np.vstack([m, np.zeros((1, m.shape[1]), np.uint8)])
    assert gf2.solve(z, np.append(b, 1)) is None


def test_inverse(backend, rng):
    for _ in range(30):
        n = int(rng.integers(1, 20))
        m = rng.integers(0, 2, (n, n), dtype=np.uint8)
        if gf2.rank(m) < n:
            with pytest.raises(np.linalg.LinAlgError):
                gf2.inverse(m)
            continue
        assert np.array_equal(gf2.matmul(m, gf2.inverse(m)), np.eye(n, dtype=np.uint8))


def test_empty_and_wide_inputs(backend):
    assert gf2.rank(np.zeros((0, 5))) == 0
    assert gf2.rank(np.ones((3, 130), np.uint8)) == 1
    r, piv = gf2.rref(np.eye(70, dtype=np.uint8)[::-1])
    assert piv == list(range(70)) and np.array_equal(r, np.eye(70, dtype=np.uint8))
