"""Leading-order operation counts of the first-order NS precoders.

Only the cost of forming the approximate inverse is counted; the product
with ``H`` is shared by every scheme and left out. DNS is not part of the
reference table and is counted with the same method, so it is flagged as
extrapolated.
"""
from dataclasses import dataclass

from .preconditioners import Kind

# (multiplications / K^2, divisions / K)
_TABLE = {
    Kind.INS: (1, 0),
    Kind.CNS: (4, 1),
    Kind.TNS: (6, 1),
    Kind.ICNS: (4, 0),
    Kind.ORDERED_ICNS: (5, 0),
    Kind.DNS: (1, 1),
}


@dataclass(frozen=True)
class ComplexityReport:
    scheme: Kind
    mults: int
    divs: int
    extrapolated: bool = False


def op_counts(scheme, K: int) -> ComplexityReport:
    """Complex multiplications and divisions, highest order in ``K`` only.

    TNS needs about ``K`` divisions for its elimination pivots; exactly ``K``
    is reported.
    """
    if isinstance(scheme, str):
        scheme = Kind.parse(scheme)
    if int(K) != K or K < 2:
        raise ValueError(f"K must be an integer >= 2, got {K}")
    m, d = _TABLE[scheme]
    return ComplexityReport(scheme, m * K * K, d * K, scheme is Kind.DNS)
