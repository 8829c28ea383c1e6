import os
import subprocess
import sys

import numpy as np
import pytest

from nsprecoding import kernels
from nsprecoding.checks import random_grams

BACKENDS = sorted(kernels.available_backends().items())


def _tridiag_stack(T, K, seed):
    rng = np.random.default_rng(seed)
    D = np.zeros((T, K, K), dtype=complex)
    idx = np.arange(K)
    D[:, idx, idx] = 4 + rng.standard_normal((T, K))
    off = rng.standard_normal((T, K - 1)) + 1j * rng.standard_normal((T, K - 1))
    D[:, idx[1:], idx[:-1]] = off
    D[:, idx[:-1], idx[1:]] = np.conj(off)
    return D


def test_compiled_backend_present():
    # setup.py builds the extension; the fallback exists for environments that cannot
    if "cython" not in kernels.available_backends():
        pytest.skip("compiled extension not built")
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_offdiag_energy(name, mod):
    G = random_grams(7, 5, 0)
    ref = np.sum(np.abs(G) ** 2, axis=1) - np.abs(np.einsum("tii->ti", G)) ** 2
    assert np.allclose(mod.offdiag_energy(G), ref, rtol=1e-12)


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_tridiag_inverse_matches_dense(name, mod):
    D = _tridiag_stack(6, 9, 1)
    Dinv, ok = mod.tridiag_inverse(D)
    assert ok.all()
    assert np.allclose(Dinv, np.linalg.inv(D), atol=1e-12)


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_tridiag_zero_pivot_flagged(name, mod):
    D = _tridiag_stack(3, 4, 2)
    D[1, 0, 0] = 0.0
    D[2] = np.array([[1, 1, 0, 0], [1, 1, 1, 0], [0, 1, 3, 1], [0, 0, 1, 3]], dtype=complex)
    _, ok = mod.tridiag_inverse(D)
    assert ok.tolist() == [True, False, False]


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_first_order_matrix(name, mod):
    G = random_grams(6, 4, 3)
    Dinv = random_grams(6, 4, 4)
    assert np.allclose(mod.first_order_matrix(G, Dinv), 2 * Dinv - Dinv @ G @ Dinv, atol=1e-13)


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_precoder_stats(name, mod):
    G = random_grams(5, 3, 5)
    P = np.linalg.inv(G) + 0.1 * random_grams(5, 3, 6)
    power, sig, intf = mod.precoder_stats(G, P)
    F = G @ P
    for t in range(3):
        assert np.isclose(power[t], np.trace(P[t].conj().T @ G[t] @ P[t]).real, rtol=1e-12)
        a = np.abs(F[t]) ** 2
        assert np.allclose(sig[t], np.diag(a), rtol=1e-12)
        assert np.allclose(intf[t], a.sum(axis=1) - np.diag(a), rtol=1e-10)


def test_backends_agree_bitwise_close():
    if len(BACKENDS) < 2:
        pytest.skip("only one backend available")
    G = random_grams(10, 50, 7)
    py, cy = kernels.available_backends()["python"], kernels.available_backends()["cython"]
    Dinv = np.linalg.inv(G)
    for fn in ("first_order_matrix",):
        assert np.allclose(getattr(py, fn)(G, Dinv), getattr(cy, fn)(G, Dinv), rtol=1e-12, atol=1e-13)
    for a, b in zip(py.precoder_stats(G, Dinv), cy.precoder_stats(G, Dinv)):
        assert np.allclose(a, b, rtol=1e-12, atol=1e-13)


def test_env_forces_python_backend():
    env = dict(os.environ, NSPRECODING_KERNELS="python")
    out = subprocess.run(
        [sys.executable, "-c", "from nsprecoding import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
