"""Pure numpy implementations of the hot kernels.

Every function takes stacks of ``K x K`` complex128 matrices with a leading
trial axis and mirrors the compiled versions in ``_ckernels.pyx``
argument-for-argument.
"""
import numpy as np

PIVOT_TOL = 1e-12


def offdiag_energy(G):
    sq = np.abs(G) ** 2
    k = np.arange(sq.shape[1])
    sq[:, k, k] = 0.0
    return sq.sum(axis=1)


def tridiag_inverse(D):
    """Invert tridiagonal matrices by Thomas elimination against the identity.

    Returns ``(Dinv, ok)``; ``ok[t]`` is False when a pivot of trial ``t``
    fell below ``PIVOT_TOL`` in magnitude (its ``Dinv`` is then garbage).
    """
    T, K, _ = D.shape
    idx = np.arange(K)
    main = D[:, idx, idx].copy()
    lower = np.zeros((T, K), dtype=complex)
    upper = np.zeros((T, K), dtype=complex)
    lower[:, 1:] = D[:, idx[1:], idx[:-1]]
    upper[:, :-1] = D[:, idx[:-1], idx[1:]]

    ok = np.ones(T, dtype=bool)
    rhs = np.broadcast_to(np.eye(K, dtype=complex), (T, K, K)).copy()
    cprime = np.zeros((T, K), dtype=complex)
    piv = main[:, 0]
    ok &= np.abs(piv) >= PIVOT_TOL
    piv = np.where(ok, piv, 1.0)
    cprime[:, 0] = upper[:, 0] / piv
    rhs[:, 0, :] /= piv[:, None]
    for i in range(1, K):
        piv = main[:, i] - lower[:, i] * cprime[:, i - 1]
        ok &= np.abs(piv) >= PIVOT_TOL
        piv = np.where(np.abs(piv) >= PIVOT_TOL, piv, 1.0)
        cprime[:, i] = upper[:, i] / piv
        rhs[:, i, :] = (rhs[:, i, :] - lower[:, i, None] * rhs[:, i - 1, :]) / piv[:, None]
    for i in range(K - 2, -1, -1):
        rhs[:, i, :] -= cprime[:, i, None] * rhs[:, i + 1, :]
    return rhs, ok


def first_order_matrix(G, Dinv):
    """``2 Dinv - Dinv G Dinv`` for each trial."""
    return 2.0 * Dinv - Dinv @ G @ Dinv


def precoder_stats(G, P):
    """Signal, interference and power of the unnormalized precoder ``H P / M``.

    With ``F = G P`` (the effective channel up to the normalization scalar)
    this returns ``tr(P^H G P)`` and, per user, ``|F_kk|^2`` and
    ``sum_{j != k} |F_kj|^2``.
    """
    F = G @ P
    power = np.real(np.einsum("tij,tij->t", np.conj(P), F))
    a = np.abs(F) ** 2
    k = np.arange(a.shape[1])
    sig = a[:, k, k].copy()
    a[:, k, k] = 0.0
    intf = a.sum(axis=2)
    return power, sig, intf
