"""Second transcription of the INS/ICNS coefficients.

Written as polynomials in ``x = K/(cM)``, ``e = 1/(cM)`` and ``u = 1/omega``
with coefficient tables, so a slip in either this file or ``analysis``
shows up as a disagreement between the two.
"""
import numpy as np

from .analysis import IcnsCoefficients, InsCoefficients


def _poly(coeffs, u):
    """``sum_i coeffs[i] * u**i``."""
    return float(np.polynomial.polynomial.polyval(u, coeffs))


def ins_coefficients_alt(M, K, c, omega) -> InsCoefficients:
    e = 1.0 / (c * M)
    x = K * e
    u = 1.0 / omega
    head = _poly([4, -4, 1], u)  # (2 - u)^2
    a2 = _poly([1, -2, 1], u)  # (1 - u)^2
    C1 = head + 4 * e * a2 - 2 * x * u * (2 - u) + x * e * u * (-4 + 5 * u) + x * x * u * u + x * x * e * u * u
    C2 = head + x * u * (-4 + 3 * u) + x * x * u * u
    C3 = 4 * e * a2 + x * e * u * (-4 + 5 * u) + x * x * e * u * u
    return InsCoefficients(C1, C2, C3)


def icns_coefficients_alt(M, K, c, omega) -> IcnsCoefficients:
    e = 1.0 / (c * M)
    x = K * e
    u = 1.0 / omega
    a = 1 - u
    head = _poly([4, -4, 1], u)
    C4 = (2 - u - 3 * x * u * a + x * x * u * u * a) ** 2
    C5 = (
        head
        + x * u * (-4 + 3 * u)
        + x * x * u * u
        + 2 * e * u * _poly([-4, 14, -11, 2], u)
        + x * e * u**2 * _poly([16, -44, 27, -4], u)
        + x * x * e * u**3 * _poly([-4, 13, -8, 1], u)
        + x**3 * e * u**4 * a * a
    )
    C6 = 4 * x * a * a - x * x * u * (4 * a * a - u) + x**3 * u * u * a * a
    C7 = (
        head
        - 2 * x * u * (2 - u)
        + x * x * u * u
        + 2 * e * _poly([2, -4, 4, -1], u)
        + x * e * u * _poly([-4, 9, -4], u)
        + x * x * e * u * u * (1 - 2 * u)
    )
    C8 = (
        4 * x * a * a
        + x * x * u * (-4 + 5 * u)
        + x**3 * u * u
        + e * (4 * u * u * (u - 2) ** 2 - 4)
        + x * e * u * _poly([-4, 51, -84, 38, -4], u)
        + x * x * e * u * u * _poly([15, -66, 65, -20, 1], u)
        + x**3 * e * u**3 * _poly([-8, 21, -16, 3], u)
        + x**4 * e * u**4 * a * a
    )
    return IcnsCoefficients(C4, C5, C6, C7, C8)
