"""Closed-form sum-rate approximations for INS, ICNS, ZF and MRT.

All SNRs are linear. ``M`` and ``K`` may be passed as floats so the
expressions can be evaluated along continuous limits.

Each coefficient is evaluated term by term in its grouped form, with
``cM = c * M`` and ``a = 1 - 1/omega``. ``crosscheck`` holds a second
transcription of the same coefficients in different variables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateZF


@dataclass(frozen=True)
class InsCoefficients:
    """Normalized signal (C1), noise scale (C2) and per-user interference (C3) of INS."""

    C1: float
    C2: float
    C3: float


@dataclass(frozen=True)
class IcnsCoefficients:
    """ICNS signal/interference of user 1 (C4, C6), of users 2..K (C7, C8), and the shared noise scale C5."""

    C4: float
    C5: float
    C6: float
    C7: float
    C8: float


@dataclass(frozen=True)
class Case1Gaps:
    """Leading-order ICNS minus INS gaps at ``omega = 1 + r/c``.

    The user-1 pair is M-independent; the users-2..K pair is multiplied by
    ``cM``.
    """

    sig_gap_user1: float
    int_gap_user1: float
    sig_gap_others: float
    int_gap_others: float


def ins_coefficients(M, K, c, omega) -> InsCoefficients:
    w = omega
    cM = c * M
    a = 1 - 1 / w
    C1 = (
        (2 - 1 / w) ** 2
        + 4 / cM * a**2
        - 2 * K / (cM * w) * (2 - 1 / w)
        + K / (cM**2 * w) * (-4 + 5 / w)
        + K**2 / (cM**2 * w**2)
        + K**2 / (cM**3 * w**2)
    )
    C2 = (2 - 1 / w) ** 2 + K / (cM * w) * (-4 + 3 / w) + K**2 / (cM**2 * w**2)
    C3 = 4 / cM * a**2 + K / (cM**2 * w) * (-4 + 5 / w) + K**2 / (cM**3 * w**2)
    return InsCoefficients(C1, C2, C3)


def ins_sum_rate(M, K, c, omega, rho_t) -> float:
    """``K log2(1 + C1 / ((K/M) C2 / rho_t + (K-1) C3))``."""
    co = ins_coefficients(M, K, c, omega)
    return K * math.log2(1 + co.C1 / (K / M * co.C2 / rho_t + (K - 1) * co.C3))


def icns_coefficients(M, K, c, omega) -> IcnsCoefficients:
    w = omega
    cM = c * M
    a = 1 - 1 / w
    C4 = (2 - 1 / w + 3 * K / (cM * w) * (-1 + 1 / w) + K**2 / (cM**2 * w**2) * a) ** 2
    C5 = (
        (2 - 1 / w) ** 2
        + K / (cM * w) * (-4 + 3 / w)
        + K**2 / (cM**2 * w**2)
        + 2 / (cM * w) * (-4 + 14 / w - 11 / w**2 + 2 / w**3)
        + K / (cM**2 * w**2) * (16 - 44 / w + 27 / w**2 - 4 / w**3)
        + K**2 / (cM**3 * w**3) * (-4 + 13 / w - 8 / w**2 + 1 / w**3)
        + K**3 / (cM**4 * w**4) * a**2
    )
    C6 = 4 * K / cM * a**2 - K**2 / (cM**2 * w) * (4 * a**2 - 1 / w) + K**3 / (cM**3 * w**2) * a**2
    C7 = (
        (2 - 1 / w) ** 2
        - 2 * K / (cM * w) * (2 - 1 / w)
        + K**2 / (cM**2 * w**2)
        + 2 / cM * (2 - 4 / w + 4 / w**2 - 1 / w**3)
        + K / (cM**2 * w) * (-4 + 9 / w - 4 / w**2)
        + K**2 / (cM**3 * w**2) * (1 - 2 / w)
    )
    C8 = (
        4 * K / cM * a**2
        + K**2 / (cM**2 * w) * (-4 + 5 / w)
        + K**3 / (cM**3 * w**2)
        + 1 / cM * (4 / w**2 * (-2 + 1 / w) ** 2 - 4)
        + K / (cM**2 * w) * (-4 + 51 / w - 84 / w**2 + 38 / w**3 - 4 / w**4)
        + K**2 / (cM**3 * w**2) * (15 - 66 / w + 65 / w**2 - 20 / w**3 + 1 / w**4)
        + K**3 / (cM**4 * w**3) * (-8 + 21 / w - 16 / w**2 + 3 / w**3)
        + K**4 / (cM**5 * w**4) * a**2
    )
    return IcnsCoefficients(C4, C5, C6, C7, C8)


def icns_user_rates(M, K, c, omega, rho_t):
    """``(rate of user 1, rate of each user 2..K)``."""
    co = icns_coefficients(M, K, c, omega)
    noise = K / M * co.C5 / rho_t
    if noise + co.C6 <= 0 or noise + co.C8 <= 0:
        raise ValueError(f"ICNS approximation has a non-positive SINR denominator at cM={c * M:g}, K={K:g}")
    return math.log2(1 + co.C4 / (noise + co.C6)), math.log2(1 + co.C7 / (noise + co.C8))


def icns_sum_rate(M, K, c, omega, rho_t) -> float:
    r1, rk = icns_user_rates(M, K, c, omega, rho_t)
    return r1 + (K - 1) * rk


def zf_sum_rate(M, K, c, rho_t) -> float:
    """``K log2(1 + rho_t (M/K - 1/c))``; needs ``cM > K``."""
    if c * M <= K:
        raise DegenerateZF(f"ideal ZF needs cM > K, got cM={c * M:g}, K={K}")
    return K * math.log2(1 + rho_t * (M / K - 1 / c))


def mrt_sum_rate_lb(M, K, c, rho_t) -> float:
    """``K log2(1 + M / ((K-1)/c + K/rho_t))``."""
    return K * math.log2(1 + M / ((K - 1) / c + K / rho_t))


def r_star(c, rho_t) -> float:
    """Loading factor at which the asymptotic INS SINR meets ideal ZF."""
    return c * (math.sqrt(9 * c**2 + 4 * c * rho_t + 4 * rho_t**2) - 3 * c) / (2 * (c + rho_t))


def mrt_cross_threshold(r, c) -> float:
    """SNR above which INS beats MRT at loading ``r``."""
    return r * c / (r + c)


def ins_sinr_asymptotic(r, c, rho_t) -> float:
    """Per-user INS SINR for large ``M`` at fixed ``r = K/M`` with ``omega = 1 + r/c``."""
    return (rho_t / r) / (1 + r * c / (r + c) ** 2 + rho_t * (r / c) / (r + c))


def ins_zf_ratio(r, c, rho_t) -> float:
    """Asymptotic INS SINR over the ideal ZF SINR ``rho_t (1/r - 1/c)``."""
    if r >= c:
        raise DegenerateZF(f"ideal ZF SINR vanishes at r={r:g} >= c={c:g}")
    return ins_sinr_asymptotic(r, c, rho_t) / (rho_t * (1 / r - 1 / c))


def case1_gaps(r_over_c) -> Case1Gaps:
    """ICNS minus INS signal and interference gaps against ``r/c``."""
    x = r_over_c
    w = 1 + x
    a = 1 - 1 / w
    sig1 = (
        x * (-8 / w + 16 / w**2 - 6 / w**3)
        + x**2 * (12 / w**2 - 24 / w**3 + 11 / w**4)
        + (-6 * x**3 / w**3 + x**4 / w**4) * a**2
    )
    int1 = 4 * x**2 / w**2 * a + x**3 / w**3 * (1 / w - 2)
    sigo = 2 / w**2 * (2 - 1 / w + 2 * x * a - x**2 / w)
    into = (
        4 / w * a**2 * (-2 + 1 / w)
        + 1 / w * (-8 + 56 / w - 84 / w**2 + 38 / w**3 - 4 / w**4) * x
        + 1 / w**2 * (16 - 66 / w + 65 / w**2 - 20 / w**3 + 1 / w**4) * x**2
        + 1 / w**3 * (-8 + 21 / w - 16 / w**2 + 3 / w**3) * x**3
        + 1 / w**4 * a**2 * x**4
    )
    return Case1Gaps(sig1, int1, sigo, into)
