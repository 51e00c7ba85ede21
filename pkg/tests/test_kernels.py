import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.spatial.distance import directed_hausdorff

from ifspovm import _kernels as K
from ifspovm import linalg
from oracles import transport_lp

pytestmark = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba missing")


@pytest.mark.parametrize("seed", range(5))
def test_directed_hausdorff_paths_agree_with_scipy(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.random((40, 2)), rng.random((25, 2))
    ref = directed_hausdorff(a, b)[0]
    assert K.directed_hausdorff_nb(a, b) == pytest.approx(ref, abs=1e-15)
    assert K.directed_hausdorff_np(a, b) == pytest.approx(ref, abs=1e-15)


def test_leader_labels_paths_identical():
    rng = np.random.default_rng(3)
    pts = rng.random((60, 1))
    for r in (0.0, 0.01, 0.1):
        l1, ld1 = K.leader_labels_nb(pts, r)
        l2, ld2 = K.leader_labels_np(pts, r)
        assert np.array_equal(l1, l2) and np.array_equal(ld1, ld2)
        lead = pts[ld1]
        if len(lead) > 1:
            gaps = np.abs(lead[:, None, 0] - lead[None, :, 0])[~np.eye(len(lead), dtype=bool)]
            assert gaps.min() > r


@pytest.mark.parametrize("n", [1, 2, 3, 6, 9])
def test_jacobi_paths_against_numpy(n):
    rng = np.random.default_rng(n)
    s = rng.standard_normal((n, n))
    s = s + s.T
    for fn in (K.jacobi_eigh_nb, K.jacobi_eigh_np):
        w, v, _ = fn(s, 1e-15, 100)
        assert np.allclose(np.sort(w), np.linalg.eigvalsh(s), atol=1e-12)
        assert np.allclose(v.T @ v, np.eye(n), atol=1e-12)
        assert np.allclose(v @ np.diag(w) @ v.T, s, atol=1e-12)


def test_complex_hermitian_eigh():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    h = a + a.conj().T
    w, v = linalg.eigh(h)
    assert np.allclose(w, np.linalg.eigvalsh(h), atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_transport_paths_against_linprog(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 10, size=2)
    a, b = rng.random(m), rng.random(n)
    a, b = a / a.sum(), b / b.sum()
    x, y = rng.random((m, 2)), rng.random((n, 2))
    c = np.linalg.norm(x[:, None] - y[None], axis=2)
    ref = transport_lp(x, a, y, b)
    for fn in (K.transport_simplex_nb, K.transport_simplex_np):
        flow, u, v, it, ok = fn(a, b, c, 1e-13, 10_000)
        assert ok
        assert np.sum(flow * c) == pytest.approx(ref, abs=1e-12)
        assert np.allclose(flow.sum(axis=1), a) and np.allclose(flow.sum(axis=0), b)
        assert flow.min() >= -1e-15
        # dual feasibility of the final potentials
        assert np.all(u[:, None] + v[None, :] <= c + 1e-12)


def test_env_flag_selects_numpy_backend():
    code = "import ifspovm._kernels as k; print(k.backend())"
    env = dict(os.environ, IFSPOVM_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env.pop("IFSPOVM_DISABLE_NUMBA")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"
