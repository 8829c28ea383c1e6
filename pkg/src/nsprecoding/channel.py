"""Correlated Rayleigh channel draws for the massive MIMO downlink.

The covariance model is ``R = A A^H / c`` with ``A`` an ``M x cM``
semi-unitary direction matrix, so a channel matrix is generated as
``H = A Z / sqrt(c)`` with ``Z`` an i.i.d. ``cM x K`` CN(0, 1) matrix.
The normalized Gram matrix ``G = H^H H / M`` then equals ``Z^H Z / (cM)``
and does not depend on ``A`` at all.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BadRange, NonIntegerEffectiveDimension, OverloadedSystem

_INT_TOL = 1e-9
_MASK64 = 0xFFFFFFFFFFFFFFFF


class NormMode(enum.Enum):
    """How the precoder power constraint ``E{tr(W W^H)} = 1`` is enforced."""

    PER_REALIZATION = "per"
    STATISTICAL = "stat"


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions and operating point of one downlink system.

    ``rho_t`` is the linear transmit SNR. When ``direction_seed`` is set the
    direction matrix ``A`` is drawn once from that seed and shared by every
    realization; otherwise each realization draws its own ``A``.
    """

    M: int
    K: int
    c: float = 1.0
    rho_t: float = 10.0
    norm_mode: NormMode = NormMode.PER_REALIZATION
    direction_seed: Optional[int] = None

    @property
    def cM(self) -> int:
        return int(round(self.c * self.M))

    @property
    def r(self) -> float:
        return self.K / self.M

    def with_(self, **changes) -> "SystemConfig":
        fields = dict(
            M=self.M, K=self.K, c=self.c, rho_t=self.rho_t,
            norm_mode=self.norm_mode, direction_seed=self.direction_seed,
        )
        fields.update(changes)
        return SystemConfig(**fields)


@dataclass(frozen=True)
class ChannelRealization:
    A: np.ndarray
    Ztilde: np.ndarray
    H: np.ndarray
    G: np.ndarray


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Return ``cfg`` unchanged, or raise if any system invariant fails."""
    if not (0.0 < cfg.c <= 1.0):
        raise BadRange(f"correlation level c={cfg.c} outside (0, 1]")
    if not cfg.rho_t > 0:
        raise BadRange(f"transmit SNR rho_t={cfg.rho_t} must be positive")
    if int(cfg.M) != cfg.M or int(cfg.K) != cfg.K:
        raise BadRange("M and K must be integers")
    if cfg.K < 1 or cfg.M < cfg.K:
        raise BadRange(f"need M >= K >= 1, got M={cfg.M}, K={cfg.K}")
    cm = cfg.c * cfg.M
    if abs(cm - round(cm)) > _INT_TOL:
        raise NonIntegerEffectiveDimension(f"c*M = {cm:g} is not an integer")
    if cfg.K > round(cm):
        raise OverloadedSystem(f"K={cfg.K} exceeds effective dimension cM={round(cm)}")
    return cfg


def trial_seed(master_seed: int, trial: int) -> int:
    """64-bit seed of one Monte Carlo trial, a stateless mix of its two inputs."""
    ss = np.random.SeedSequence(int(master_seed) & _MASK64, spawn_key=(int(trial),))
    return int(ss.generate_state(1, np.uint64)[0])


def seeded_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) samples: real and imaginary parts each N(0, 1/2)."""
    x = rng.standard_normal((2,) + tuple(shape))
    return (x[0] + 1j * x[1]) * math.sqrt(0.5)


def semi_unitary(rng: np.random.Generator, M: int, cM: int) -> np.ndarray:
    """Orthonormal-column factor of an ``M x cM`` complex Gaussian matrix.

    Householder QR with the phases of ``diag(R)`` folded back into ``Q``,
    which makes the result Haar distributed on the Stiefel manifold.
    """
    q, r = np.linalg.qr(complex_normal(rng, (M, cM)))
    d = np.diagonal(r)
    phase = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * phase[None, :]


def gram_from_inner(Ztilde: np.ndarray) -> np.ndarray:
    """``Z^H Z / cM``, re-symmetrized. Accepts a single matrix or a stack."""
    cM = Ztilde.shape[-2]
    zh = np.conj(np.swapaxes(Ztilde, -1, -2))
    G = zh @ Ztilde / cM
    return 0.5 * (G + np.conj(np.swapaxes(G, -1, -2)))


def draw_inner(cfg: SystemConfig, seed: int) -> np.ndarray:
    """Draw only ``Ztilde`` for a realization; identical to ``draw_realization(...).Ztilde``."""
    return complex_normal(seeded_rng(seed), (cfg.cM, cfg.K))


def draw_realization(cfg: SystemConfig, seed: int) -> ChannelRealization:
    """Draw one channel realization, bit-reproducible for a given ``(cfg, seed)``.

    ``Ztilde`` is drawn first from the seed's stream, then the Gaussian matrix
    that is orthonormalized into ``A`` (from ``cfg.direction_seed`` instead
    when that is set).
    """
    validate_config(cfg)
    rng = seeded_rng(seed)
    Ztilde = complex_normal(rng, (cfg.cM, cfg.K))
    if cfg.direction_seed is None:
        A = semi_unitary(rng, cfg.M, cfg.cM)
    else:
        A = semi_unitary(seeded_rng(cfg.direction_seed), cfg.M, cfg.cM)
    H = (A @ Ztilde) / math.sqrt(cfg.c)
    return ChannelRealization(A=A, Ztilde=Ztilde, H=H, G=gram_from_inner(Ztilde))


def gram_offdiag(G: np.ndarray) -> np.ndarray:
    """Per-column squared 2-norm of ``G`` with its main diagonal removed."""
    from . import kernels

    G = np.asarray(G, dtype=complex)
    return kernels.offdiag_energy(G[None])[0]
