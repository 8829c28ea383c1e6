"""Precondition matrices for the first-order Neumann-series inverse.

The Gram matrix is split as ``G = D + E`` and ``G^{-1}`` is approximated by
``sum_n (-D^{-1} E)^n D^{-1}``. The choices of ``D`` implemented here:

========== ==============================================================
INS        ``omega * I``
DNS        main diagonal of ``G``
TNS        main, super- and sub-diagonal of ``G``
CNS        main diagonal plus the off-diagonal part of column 0
ICNS       ``omega * I`` plus the off-diagonal part of column 0
OrderedICNS ``omega * I`` plus the off-diagonal part of the column with
            the largest off-diagonal energy
========== ==============================================================

Every inverse is computed in closed form from the structure of ``D``; the
column-type ones rely on the off-diagonal column block squaring to zero.
Batched variants (leading trial axis) back the Monte Carlo engine, and the
single-matrix API is a thin wrapper around them.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import BadRange, SingularPrecondition

PIVOT_TOL = kernels.PIVOT_TOL


class Kind(enum.Enum):
    INS = "INS"
    DNS = "DNS"
    TNS = "TNS"
    CNS = "CNS"
    ICNS = "ICNS"
    ORDERED_ICNS = "OrderedICNS"

    @property
    def uses_omega(self) -> bool:
        return self in (Kind.INS, Kind.ICNS, Kind.ORDERED_ICNS)

    @classmethod
    def parse(cls, name: str) -> "Kind":
        key = name.strip().lower().replace("-", "").replace("_", "")
        for k in cls:
            if k.value.lower() == key:
                return k
        raise ValueError(f"unknown precondition kind {name!r}")


@dataclass(frozen=True)
class PreconditionKind:
    """A precondition family plus its relaxation parameter.

    ``omega=None`` on an omega-using kind means "use the asymptotic optimum
    for the system at hand"; resolve it with :func:`resolve_omega` before
    building a matrix.
    """

    tag: Kind
    omega: Optional[float] = None

    def __post_init__(self):
        if self.tag.uses_omega:
            if self.omega is not None and not self.omega > 0:
                raise BadRange(f"omega must be positive, got {self.omega}")
        elif self.omega is not None:
            raise ValueError(f"{self.tag.value} takes no relaxation parameter")

    @property
    def name(self) -> str:
        return self.tag.value


@dataclass(frozen=True)
class PreconditionMatrix:
    D: np.ndarray
    D_inv: np.ndarray
    kind: PreconditionKind
    selected_column: Optional[int] = None


@dataclass(frozen=True)
class MpEdges:
    a_bar: float
    b_bar: float


def mp_edges(r_eff: float) -> MpEdges:
    """Asymptotic extreme eigenvalues of ``G`` for effective loading ``K/(cM)``."""
    if not (0.0 < r_eff <= 1.0):
        raise BadRange(f"effective loading {r_eff} outside (0, 1]")
    s = math.sqrt(r_eff)
    return MpEdges(a_bar=(1.0 - s) ** 2, b_bar=(1.0 + s) ** 2)


def omega_star(M: int, K: int, c: float) -> float:
    """Relaxation parameter maximizing the asymptotic NS convergence speed.

    Midpoint of the Marchenko-Pastur edges, which simplifies to
    ``1 + K / (c M)``.
    """
    e = mp_edges(K / (c * M))
    return 0.5 * (e.a_bar + e.b_bar)


def resolve_omega(kind: PreconditionKind, M: int, K: int, c: float) -> PreconditionKind:
    if kind.tag.uses_omega and kind.omega is None:
        return PreconditionKind(kind.tag, omega_star(M, K, c))
    return kind


# -- batched assembly and inversion ---------------------------------------------


def _offdiag_column(G, cols):
    """Stack with only the off-diagonal entries of column ``cols[t]`` of ``G[t]``."""
    T, K, _ = G.shape
    t = np.arange(T)
    out = np.zeros_like(G)
    out[t, :, cols] = G[t, :, cols]
    out[t, cols, cols] = 0.0
    return out


def select_columns(G: np.ndarray) -> np.ndarray:
    """Column with the largest off-diagonal energy per trial; ties go to the lowest index."""
    return np.argmax(kernels.offdiag_energy(G), axis=1)


def assemble_batch(kind: PreconditionKind, G: np.ndarray):
    """Build ``D`` for a stack of Gram matrices.

    Returns ``(D, selected)`` where ``selected`` holds the chosen column per
    trial for OrderedICNS and is None otherwise.
    """
    G = np.asarray(G, dtype=complex)
    T, K, _ = G.shape
    idx = np.arange(K)
    tag = kind.tag
    if tag.uses_omega and kind.omega is None:
        raise ValueError(f"{tag.value} needs a resolved omega")
    selected = None
    D = np.zeros_like(G)
    if tag in (Kind.DNS, Kind.TNS, Kind.CNS):
        D[:, idx, idx] = G[:, idx, idx]
    else:
        D[:, idx, idx] = kind.omega
    if tag is Kind.TNS and K > 1:
        D[:, idx[1:], idx[:-1]] = G[:, idx[1:], idx[:-1]]
        D[:, idx[:-1], idx[1:]] = G[:, idx[:-1], idx[1:]]
    elif tag in (Kind.CNS, Kind.ICNS):
        D[:, 1:, 0] = G[:, 1:, 0]
    elif tag is Kind.ORDERED_ICNS:
        selected = select_columns(G)
        D += _offdiag_column(G, selected)
    return D, selected


def _check_pivots(d, ok):
    return ok & np.all(np.abs(d) >= PIVOT_TOL, axis=-1)


def invert_batch(kind: PreconditionKind, D: np.ndarray):
    """Closed-form inverses of a stack of precondition matrices.

    Returns ``(D_inv, ok)``; ``ok[t]`` is False where a pivot of ``D[t]`` is
    numerically zero.
    """
    D = np.asarray(D, dtype=complex)
    T, K, _ = D.shape
    idx = np.arange(K)
    ok = np.ones(T, dtype=bool)
    tag = kind.tag
    if tag is Kind.TNS:
        return kernels.tridiag_inverse(D)
    diag = D[:, idx, idx]
    ok = _check_pivots(diag, ok)
    safe = np.where(np.abs(diag) >= PIVOT_TOL, diag, 1.0)
    Dinv = np.zeros_like(D)
    if tag in (Kind.INS, Kind.DNS):
        Dinv[:, idx, idx] = 1.0 / safe
    elif tag in (Kind.ICNS, Kind.ORDERED_ICNS):
        # D = w I + C with C^2 = 0, so D^{-1} = I / w - C / w^2
        w = safe[:, :1, None]
        C = D.copy()
        C[:, idx, idx] = 0.0
        Dinv = -C / w**2
        Dinv[:, idx, idx] += 1.0 / w[:, :, 0]
    elif tag is Kind.CNS:
        # D = diag0(G) (I + Ct) with Ct = diag0(G)^{-1} C, so D^{-1} = (I - Ct) diag0(G)^{-1}
        C = np.zeros_like(D)
        C[:, 1:, 0] = D[:, 1:, 0]
        Ct = C / safe[:, :, None]
        Dinv = -Ct / safe[:, None, :]
        Dinv[:, idx, idx] += 1.0 / safe
    else:  # pragma: no cover
        raise ValueError(tag)
    return Dinv, ok


def precondition_inverse_batch(kind: PreconditionKind, G: np.ndarray):
    """``(D_inv, ok)`` for a stack of Gram matrices."""
    D, _ = assemble_batch(kind, G)
    return invert_batch(kind, D)


# -- single-matrix API -----------------------------------------------------------


def invert_precondition(kind: PreconditionKind, D: np.ndarray) -> np.ndarray:
    """Exact inverse of a precondition matrix, via its closed form.

    Raises
    ------
    SingularPrecondition
        If a diagonal entry (or a Thomas pivot for TNS) has magnitude below
        ``1e-12``.
    """
    Dinv, ok = invert_batch(kind, np.asarray(D, dtype=complex)[None])
    if not ok[0]:
        raise SingularPrecondition(f"{kind.name}: pivot magnitude below {PIVOT_TOL:g}")
    return Dinv[0]


def build_precondition(kind: PreconditionKind, G: np.ndarray) -> PreconditionMatrix:
    """Assemble ``D`` from a Hermitian Gram matrix and invert it."""
    G = np.asarray(G, dtype=complex)
    D, selected = assemble_batch(kind, G[None])
    D_inv = invert_precondition(kind, D[0])
    col = None if selected is None else int(selected[0])
    return PreconditionMatrix(D=D[0], D_inv=D_inv, kind=kind, selected_column=col)


def spectral_check(D_inv: np.ndarray, G: np.ndarray, rtol: float = 1e-8, max_iter: int = 10_000) -> float:
    """Spectral norm of the NS iteration matrix ``-D^{-1} E = I - D^{-1} G``.

    Power iteration on ``X^H X`` from a fixed start vector. A value below 1
    means the Neumann series converges.
    """
    D_inv = np.asarray(D_inv, dtype=complex)
    K = D_inv.shape[0]
    X = np.eye(K) - D_inv @ np.asarray(G, dtype=complex)
    if not np.any(X):
        return 0.0
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(K) + 1j * rng.standard_normal(K)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        xv = X @ v
        u = X.conj().T @ xv
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return 0.0
        new = float(np.linalg.norm(xv))
        v = u / nu
        if abs(new - sigma) <= rtol * new:
            return float(new)
        sigma = new
    return float(sigma)
