"""ZF, MRT and first-order Neumann-series precoders.

All precoders here have the form ``W = beta * H P / M`` for a ``K x K``
matrix ``P``: ``G^{-1}`` for ZF, ``I`` for MRT and
``2 D^{-1} - D^{-1} G D^{-1}`` for the first-order NS family. The effective
channel is then ``H^H W = beta * G P`` and the unnormalized transmit power
is ``tr(P^H G P) / M``, which is what lets the Monte Carlo engine work from
Gram matrices alone.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from . import kernels
from .channel import ChannelRealization, NormMode, SystemConfig
from .errors import SingularGram
from .preconditioners import Kind, PreconditionKind, build_precondition, resolve_omega


class Scheme(enum.Enum):
    ZF = "ZF"
    MRT = "MRT"
    NS = "NS"


@dataclass(frozen=True)
class PrecoderSpec:
    scheme: Scheme
    kind: Optional[PreconditionKind] = None
    ns_order: int = 1

    def __post_init__(self):
        if (self.scheme is Scheme.NS) != (self.kind is not None):
            raise ValueError("a precondition kind is required for NS schemes and only for them")
        if self.ns_order != 1:
            raise ValueError("only first-order NS precoders are built; use ns_approx_inverse for L > 1")

    @classmethod
    def zf(cls):
        return cls(Scheme.ZF)

    @classmethod
    def mrt(cls):
        return cls(Scheme.MRT)

    @classmethod
    def ns(cls, tag: Kind, omega: Optional[float] = None):
        return cls(Scheme.NS, PreconditionKind(tag, omega))

    @classmethod
    def parse(cls, name: str, omega: Optional[float] = None):
        """Spec from a scheme name such as ``"ZF"`` or ``"OrderedICNS"``."""
        key = name.strip().upper()
        if key == "ZF":
            return cls.zf()
        if key == "MRT":
            return cls.mrt()
        tag = Kind.parse(name)
        return cls.ns(tag, omega if tag.uses_omega else None)

    @property
    def name(self) -> str:
        return self.kind.name if self.scheme is Scheme.NS else self.scheme.value

    def resolved(self, cfg: SystemConfig) -> "PrecoderSpec":
        """Copy with a relaxation parameter of ``None`` replaced by the asymptotic optimum."""
        if self.scheme is not Scheme.NS:
            return self
        return PrecoderSpec(Scheme.NS, resolve_omega(self.kind, cfg.M, cfg.K, cfg.c))


@dataclass(frozen=True)
class PrecodingOutput:
    W: np.ndarray
    beta: float
    H: np.ndarray = field(repr=False)

    @property
    def Heff(self) -> np.ndarray:
        """Effective channel ``H^H W``; entry ``(k, j)`` is ``h_k^H w_j``."""
        return self.H.conj().T @ self.W


def ns_approx_inverse(D_inv: np.ndarray, G: np.ndarray, L: int) -> np.ndarray:
    """Order-``L`` Neumann approximation ``sum_{n=0}^{L} (-D^{-1} E)^n D^{-1}``.

    Evaluated by Horner's rule, ``S <- D^{-1} + (I - D^{-1} G) S``.
    """
    if L < 0:
        raise ValueError("L must be non-negative")
    D_inv = np.asarray(D_inv, dtype=complex)
    X = np.eye(D_inv.shape[0]) - D_inv @ np.asarray(G, dtype=complex)
    S = D_inv.copy()
    for _ in range(L):
        S = D_inv + X @ S
    return S


def first_order_inverse(D_inv: np.ndarray, G: np.ndarray) -> np.ndarray:
    """``2 D^{-1} - D^{-1} G D^{-1}``, the ``L = 1`` case in closed form."""
    return kernels.first_order_matrix(np.asarray(G)[None], np.asarray(D_inv)[None])[0]


def _zf_solve(G: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        factor = scipy.linalg.cho_factor(G, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularGram(str(exc)) from exc
    return scipy.linalg.cho_solve(factor, rhs)


def unnormalized_precoder(spec: PrecoderSpec, real: ChannelRealization, cfg: SystemConfig) -> np.ndarray:
    """``W0 = H P / M`` with ``beta = 1``."""
    H, G = real.H, real.G
    M = H.shape[0]
    if spec.scheme is Scheme.ZF:
        # H G^{-1} = (G^{-1} H^H)^H since G is Hermitian
        return _zf_solve(G, H.conj().T).conj().T / M
    if spec.scheme is Scheme.MRT:
        return H / M
    spec = spec.resolved(cfg)
    pm = build_precondition(spec.kind, G)
    return H @ first_order_inverse(pm.D_inv, G) / M


def build_precoder(
    spec: PrecoderSpec,
    real: ChannelRealization,
    cfg: SystemConfig,
    power_scale: Optional[float] = None,
) -> PrecodingOutput:
    """Precoding matrix normalized per ``cfg.norm_mode``.

    Per-realization normalization makes ``tr(W W^H) = 1`` for this draw.
    Statistical normalization needs ``power_scale``, the batch average of
    ``tr(W0 W0^H)`` over the trials sharing one ``beta``.
    """
    W0 = unnormalized_precoder(spec, real, cfg)
    if cfg.norm_mode is NormMode.PER_REALIZATION:
        scale = float(np.real(np.vdot(W0, W0)))
    else:
        if power_scale is None:
            raise ValueError("statistical normalization needs the batch power_scale")
        scale = float(power_scale)
    beta = 1.0 / math.sqrt(scale)
    return PrecodingOutput(W=beta * W0, beta=beta, H=real.H)


def sinr_per_user(real: ChannelRealization, out: PrecodingOutput, rho_t: float) -> np.ndarray:
    """``|h_k^H w_k|^2 / (sum_{j != k} |h_k^H w_j|^2 + 1/rho_t)`` for every user."""
    a = np.abs(out.H.conj().T @ out.W) ** 2
    sig = np.diagonal(a).copy()
    np.fill_diagonal(a, 0.0)
    return sig / (a.sum(axis=1) + 1.0 / rho_t)
