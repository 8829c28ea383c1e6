"""Oracle suites behind ``nsprecoding check``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .analysis import icns_coefficients, ins_coefficients
from .channel import SystemConfig
from .crosscheck import icns_coefficients_alt, ins_coefficients_alt
from .preconditioners import Kind, PreconditionKind, assemble_batch, invert_batch, omega_star
from .simulate import eigen_edge_report, lemma2_moments

CHECK_NAMES = ("moments", "edges", "inverses", "dualcode")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    label: str
    measured: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.measured < self.tol)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.suite}: {self.label} measured={self.measured:.3g} tol={self.tol:g}"


def check_moments(trials: int = 200_000, seed: int = 1) -> List[CheckResult]:
    out = []
    for cM in (2, 4, 8):
        for rep in lemma2_moments(cM, trials, seed):
            if rep.exact:
                out.append(CheckResult("moments", f"cM={cM} {rep.name}", rep.rel_err, 0.03))
    for rep in lemma2_moments(64, trials, seed):
        if not rep.exact:
            out.append(CheckResult("moments", f"cM=64 {rep.name}", rep.rel_err, 0.10))
    return out


def check_edges(trials: int = 2000, seed: int = 1) -> List[CheckResult]:
    out = []
    for c in (0.5, 1.0):
        for rep in eigen_edge_report(SystemConfig(400, 40, c), trials, seed):
            out.append(CheckResult("edges", f"M=400 K=40 c={c:g} {rep.name} target={rep.target:.5f} mean={rep.empirical:.5f}", rep.rel_err, 0.05))
    return out


def random_grams(K: int, n: int, seed: int, cM: Optional[int] = None) -> np.ndarray:
    """``n`` random Gram matrices ``Z^H Z / cM`` with ``cM = 2K`` by default."""
    rng = np.random.default_rng(seed)
    cM = cM or 2 * K
    Z = (rng.standard_normal((n, cM, K)) + 1j * rng.standard_normal((n, cM, K))) * np.sqrt(0.5)
    G = np.conj(np.swapaxes(Z, 1, 2)) @ Z / cM
    return 0.5 * (G + np.conj(np.swapaxes(G, 1, 2)))


def all_kinds(K: int, cM: int) -> List[PreconditionKind]:
    w = omega_star(cM, K, 1.0)
    return [PreconditionKind(t, w if t.uses_omega else None) for t in Kind]


def check_inverses(K: int = 16, draws: int = 100, seed: int = 1) -> List[CheckResult]:
    G = random_grams(K, draws, seed)
    out = []
    for kind in all_kinds(K, 2 * K):
        D, _ = assemble_batch(kind, G)
        Dinv, ok = invert_batch(kind, D)
        err = np.linalg.norm(D @ Dinv - np.eye(K), axis=(1, 2)).max()
        if not ok.all():
            err = np.inf
        out.append(CheckResult("inverses", f"K={K} {kind.name} max ||D D^-1 - I||_F over {draws} draws", float(err), 1e-10))
    return out


def dualcode_discrepancy(points: int = 1000, seed: int = 1) -> float:
    """Largest relative disagreement between the two coefficient transcriptions."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(points):
        c = rng.uniform(0.05, 1.0)
        M = int(rng.integers(10, 2001))
        K = int(rng.integers(1, max(2, int(c * M)) + 1))
        w = rng.uniform(0.5, 3.0)
        pairs = (
            (ins_coefficients(M, K, c, w), ins_coefficients_alt(M, K, c, w)),
            (icns_coefficients(M, K, c, w), icns_coefficients_alt(M, K, c, w)),
        )
        for a, b in pairs:
            for f in a.__dataclass_fields__:
                x, y = getattr(a, f), getattr(b, f)
                worst = max(worst, abs(x - y) / max(abs(x), abs(y), 1e-300))
    return worst


def check_dualcode(points: int = 1000, seed: int = 1) -> List[CheckResult]:
    return [CheckResult("dualcode", f"{points}-point grid, max relative discrepancy", dualcode_discrepancy(points, seed), 1e-12)]


def run_checks(names: Sequence[str], trials: Optional[int] = None, seed: int = 1) -> List[CheckResult]:
    unknown = [n for n in names if n not in CHECK_NAMES]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; choose from {CHECK_NAMES}")
    results = []
    for name in names:
        if name == "moments":
            results += check_moments(trials or 200_000, seed)
        elif name == "edges":
            results += check_edges(trials or 2000, seed)
        elif name == "inverses":
            results += check_inverses(seed=seed)
        else:
            results += check_dualcode(seed=seed)
    return results
