"""Monte Carlo sum-rate estimation and random-matrix oracles.

The engine never forms the ``M x K`` channel unless asked to. For a precoder
``W0 = H P / M`` the effective channel is ``H^H W0 = G P`` and the transmit
power is ``tr(P^H G P) / M``, so every SINR follows from the ``K x K`` Gram
matrix. ``MonteCarloPlan(full_channel=True)`` switches to an independent
route that draws ``A``, builds ``H`` and ``W`` explicitly, and is used to
cross-check the Gram path.

Trials are split into fixed-size chunks whose boundaries do not depend on
``parallel_width``. Every trial draws from its own seed, per-trial results
are concatenated in trial order, and all reductions run on the concatenated
arrays, so estimates are bit-identical for any worker count.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import kernels
from .channel import (
    NormMode,
    SystemConfig,
    draw_inner,
    draw_realization,
    gram_from_inner,
    trial_seed,
    validate_config,
)
from .errors import SingularGram, SingularPrecondition
from .preconditioners import mp_edges, precondition_inverse_batch
from .precoders import PrecoderSpec, Scheme, unnormalized_precoder

CHUNK = 256
SKIP_BUDGET = 1e-3
N_BATCHES = 20


@dataclass(frozen=True)
class MonteCarloPlan:
    trials: int
    master_seed: int
    parallel_width: int = 1
    full_channel: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.parallel_width < 1:
            raise ValueError("parallel_width must be positive")


@dataclass(frozen=True)
class SumRateEstimate:
    mean: float
    std_error: float
    trials: int
    per_user_means: np.ndarray


@dataclass(frozen=True)
class MomentReport:
    """Empirical moment against its target.

    ``rel_err`` is ``|empirical - target| / scale``. ``scale`` is
    ``|target|`` unless the target is zero, in which case it is the RMS
    magnitude of the sampled quantity. ``exact`` is False for targets that
    only hold as ``M`` grows.
    """

    name: str
    empirical: float
    target: float
    rel_err: float
    scale: float = float("nan")
    exact: bool = True


@dataclass
class TrialStats:
    """Per-trial statistics of one unnormalized precoder.

    ``power[t]`` is ``tr(W0 W0^H)``; ``sig[t, k]`` and ``intf[t, k]`` are the
    desired and leaked power seen by user ``k``. ``ok`` flags trials that
    produced a usable precoder.
    """

    power: np.ndarray
    sig: np.ndarray
    intf: np.ndarray
    ok: np.ndarray

    @staticmethod
    def concat(parts: Sequence["TrialStats"]) -> "TrialStats":
        return TrialStats(*(np.concatenate([getattr(p, f) for p in parts]) for f in ("power", "sig", "intf", "ok")))

    def valid(self) -> "TrialStats":
        m = self.ok
        return TrialStats(self.power[m], self.sig[m], self.intf[m], m[m])


# -- chunked execution ----------------------------------------------------------


def _chunk_bounds(trials: int) -> List[Tuple[int, int]]:
    return [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]


def _map_chunks(fn, trials: int, width: int):
    bounds = _chunk_bounds(trials)
    if width == 1 or len(bounds) == 1:
        return [fn(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=width) as ex:
        return list(ex.map(lambda ab: fn(*ab), bounds))


def gram_batch(cfg: SystemConfig, master_seed: int, start: int, stop: int) -> np.ndarray:
    """Gram matrices of trials ``start..stop-1``, same values as the full draws."""
    Z = np.stack([draw_inner(cfg, trial_seed(master_seed, t)) for t in range(start, stop)])
    return gram_from_inner(Z)


# -- per-scheme statistics ----------------------------------------------------------


def _zf_stats(G: np.ndarray) -> TrialStats:
    T, K, _ = G.shape
    ok = np.ones(T, dtype=bool)
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        L = np.empty_like(G)
        for t in range(T):
            try:
                L[t] = np.linalg.cholesky(G[t])
            except np.linalg.LinAlgError:
                ok[t] = False
                L[t] = np.eye(K)
    # tr(G^{-1}) = ||L^{-1}||_F^2
    Linv = np.linalg.solve(L, np.broadcast_to(np.eye(K, dtype=complex), L.shape))
    power = np.sum(np.abs(Linv) ** 2, axis=(1, 2))
    return TrialStats(power, np.ones((T, K)), np.zeros((T, K)), ok)


def _gram_stats(spec: PrecoderSpec, cfg: SystemConfig, G: np.ndarray) -> TrialStats:
    """Statistics of ``W0 = H P / M`` from Gram matrices; power still lacks the ``1/M``."""
    T, K, _ = G.shape
    if spec.scheme is Scheme.ZF:
        return _zf_stats(G)
    if spec.scheme is Scheme.MRT:
        P = np.broadcast_to(np.eye(K, dtype=complex), G.shape)
        ok = np.ones(T, dtype=bool)
    else:
        Dinv, ok = precondition_inverse_batch(spec.resolved(cfg).kind, G)
        P = kernels.first_order_matrix(G, Dinv)
    power, sig, intf = kernels.precoder_stats(G, P)
    return TrialStats(power, sig, intf, ok)


def _full_stats(spec: PrecoderSpec, cfg: SystemConfig, master_seed: int, start: int, stop: int) -> TrialStats:
    T, K = stop - start, cfg.K
    power = np.zeros(T)
    sig = np.zeros((T, K))
    intf = np.zeros((T, K))
    ok = np.ones(T, dtype=bool)
    for i, t in enumerate(range(start, stop)):
        real = draw_realization(cfg, trial_seed(master_seed, t))
        try:
            W0 = unnormalized_precoder(spec, real, cfg)
        except (SingularGram, SingularPrecondition):
            ok[i] = False
            continue
        a = np.abs(real.H.conj().T @ W0) ** 2
        sig[i] = np.diagonal(a)
        np.fill_diagonal(a, 0.0)
        intf[i] = a.sum(axis=1)
        power[i] = np.real(np.vdot(W0, W0))
    return TrialStats(power, sig, intf, ok)


def _error_for(spec: PrecoderSpec):
    return SingularGram if spec.scheme is Scheme.ZF else SingularPrecondition


def collect_stats(cfg: SystemConfig, specs: Sequence[PrecoderSpec], plan: MonteCarloPlan) -> Dict[str, TrialStats]:
    """Per-trial statistics for several schemes on common channel draws.

    Trials where a scheme fails (ZF Cholesky breakdown, a zero pivot in
    ``D``) are dropped with a warning while they stay within 0.1% of the
    batch; beyond that the corresponding error is raised.
    """
    validate_config(cfg)
    specs = list(specs)
    M = cfg.M

    def run(start, stop):
        if plan.full_channel:
            return [_full_stats(s, cfg, plan.master_seed, start, stop) for s in specs]
        G = gram_batch(cfg, plan.master_seed, start, stop)
        out = []
        for s in specs:
            st = _gram_stats(s, cfg, G)
            st.power = st.power / M
            out.append(st)
        return out

    parts = _map_chunks(run, plan.trials, plan.parallel_width)
    result = {}
    for i, s in enumerate(specs):
        st = TrialStats.concat([p[i] for p in parts])
        bad = int(np.count_nonzero(~st.ok))
        if bad:
            msg = f"{s.name}: {bad} of {plan.trials} draws numerically degenerate"
            if bad > SKIP_BUDGET * plan.trials:
                raise _error_for(s)(msg)
            warnings.warn(msg + "; skipped", RuntimeWarning, stacklevel=2)
        result[s.name] = st
    return result


# -- estimators -----------------------------------------------------------------------


def per_trial_rates(st: TrialStats, cfg: SystemConfig) -> np.ndarray:
    """``(T, K)`` per-user rates ``log2(1 + SINR)`` of the valid trials."""
    st = st.valid()
    if cfg.norm_mode is NormMode.PER_REALIZATION:
        p = st.power[:, None]
    else:
        p = np.mean(st.power)
    sinr = st.sig / (st.intf + p / cfg.rho_t)
    return np.log2(1.0 + sinr)


def _estimate(rates: np.ndarray) -> SumRateEstimate:
    total = rates.sum(axis=1)
    T = total.size
    se = float(np.std(total, ddof=1) / math.sqrt(T)) if T > 1 else float("nan")
    return SumRateEstimate(float(total.mean()), se, T, rates.mean(axis=0))


def _simu_approx_users(st: TrialStats, rho_t: float) -> np.ndarray:
    s = np.mean(st.power)
    return np.log2(1.0 + (st.sig.mean(axis=0) / s) / (1.0 / rho_t + st.intf.mean(axis=0) / s))


def _simu_approx_estimate(st: TrialStats, rho_t: float) -> SumRateEstimate:
    st = st.valid()
    users = _simu_approx_users(st, rho_t)
    T = st.power.size
    nb = min(N_BATCHES, T)
    se = float("nan")
    if nb > 1:
        edges = np.linspace(0, T, nb + 1).astype(int)
        vals = [
            _simu_approx_users(TrialStats(st.power[a:b], st.sig[a:b], st.intf[a:b], st.ok[a:b]), rho_t).sum()
            for a, b in zip(edges[:-1], edges[1:])
        ]
        se = float(np.std(vals, ddof=1) / math.sqrt(nb))
    return SumRateEstimate(float(users.sum()), se, T, users)


def ergodic_sum_rate(cfg: SystemConfig, spec: PrecoderSpec, plan: MonteCarloPlan) -> SumRateEstimate:
    """Mean over trials of ``sum_k log2(1 + SINR_k)``."""
    st = collect_stats(cfg, [spec], plan)[spec.name]
    return _estimate(per_trial_rates(st, cfg))


def sum_rate_simu_approx(cfg: SystemConfig, spec: PrecoderSpec, plan: MonteCarloPlan) -> SumRateEstimate:
    """Sum-rate with signal, interference and power replaced by batch means.

    This is the ratio-of-expectations quantity the closed-form sum-rates
    approximate. It always uses the batch power scale, whatever
    ``cfg.norm_mode`` says. ``std_error`` comes from batch means over
    20 contiguous trial blocks.
    """
    st = collect_stats(cfg, [spec], plan)[spec.name]
    return _simu_approx_estimate(st, cfg.rho_t)


@dataclass(frozen=True)
class SchemeComparison:
    """Estimates of several schemes over the same channel draws."""

    ergodic: Dict[str, SumRateEstimate]
    simu_approx: Dict[str, SumRateEstimate]
    per_trial: Dict[str, np.ndarray]

    def paired_difference(self, a: str, b: str) -> Tuple[float, float]:
        """Mean and standard error of the per-trial sum-rate difference ``a - b``."""
        d = self.per_trial[a] - self.per_trial[b]
        return float(d.mean()), float(np.std(d, ddof=1) / math.sqrt(d.size))

    def ratio(self, a: str, b: str) -> Tuple[float, float]:
        """``mean(a) / mean(b)`` with a delta-method standard error."""
        x, y = self.per_trial[a], self.per_trial[b]
        mx, my = x.mean(), y.mean()
        R = mx / my
        n = x.size
        cov = np.cov(x, y, ddof=1)
        var = (cov[0, 0] - 2 * R * cov[0, 1] + R * R * cov[1, 1]) / (my * my * n)
        return float(R), float(math.sqrt(max(var, 0.0)))


def compare_schemes(cfg: SystemConfig, specs: Sequence[PrecoderSpec], plan: MonteCarloPlan) -> SchemeComparison:
    stats = collect_stats(cfg, specs, plan)
    common = np.logical_and.reduce([st.ok for st in stats.values()])
    erg, sa, per = {}, {}, {}
    for name, st in stats.items():
        rates = per_trial_rates(TrialStats(st.power, st.sig, st.intf, common), cfg)
        erg[name] = _estimate(rates)
        per[name] = rates.sum(axis=1)
        sa[name] = _simu_approx_estimate(st, cfg.rho_t)
    return SchemeComparison(erg, sa, per)


# -- random-matrix oracles ----------------------------------------------------------


def _report(name, total, sq_total, n, target, exact=True):
    """Report from a running sum and sum of squared magnitudes over ``n`` samples."""
    emp = np.asarray(total) / n
    if target == 0:
        scale = float(np.sqrt(np.max(np.asarray(sq_total)) / n))
        emp_val = float(np.max(np.abs(emp)))
        err = emp_val / scale
    else:
        scale = abs(target)
        emp_val = float(np.real(emp))
        err = abs(emp_val - target) / scale
    return MomentReport(name, emp_val, float(target), err, scale, exact)


def _pair_draws(cM, seed, start, stop):
    # one stream per fixed-size chunk; chunk boundaries never depend on the worker count
    g = np.random.Generator(np.random.PCG64(trial_seed(seed, start // CHUNK)))
    x = g.standard_normal((2, stop - start, 2, cM))
    return (x[0] + 1j * x[1]) * math.sqrt(0.5)


_MOMENT_NAMES = (
    "E|zi^H zj|^2",
    "E|zi^H zj|^2 zi^H zj",
    "E|zi^H zj|^4 / M^2",
    "E|zi^H zj|^6 / M^3",
    "E|zi^H zi|^2",
    "E|zi^H zi|^3",
    "E|zi^H zi|^4",
    "E zi^H zi zi",
)


def lemma2_moments(cM: int, trials: int, seed: int, c: float = 1.0, parallel_width: int = 1) -> List[MomentReport]:
    """Moments of two independent CN(0, I_cM) vectors against their targets.

    Targets with ``M = cM / c``: the exact identities hold for every ``cM``;
    the normalized fourth and sixth cross moments only converge to ``2c^2``
    and ``6c^3`` as ``cM`` grows.
    """
    if cM < 1 or trials < 2:
        raise ValueError("need cM >= 1 and at least two trials")
    M = cM / c
    n = float(cM)

    def run(a, b):
        z = _pair_draws(cM, seed, a, b)
        zi, zj = z[:, 0], z[:, 1]
        x = np.einsum("ti,ti->t", zi.conj(), zj)
        s = np.einsum("ti,ti->t", zi.conj(), zi).real
        a2 = np.abs(x) ** 2
        qs = (a2, a2 * x, a2**2 / M**2, a2**3 / M**3, s**2, s**3, s**4, s[:, None] * zi)
        sums = [q.sum(axis=0) for q in qs]
        sq = [(np.abs(q) ** 2).sum(axis=0) for q in qs]
        outer = (s[:, None] * zi).T @ zi.conj()
        return sums, sq, outer

    parts = _map_chunks(run, trials, parallel_width)
    sums = [sum(p[0][i] for p in parts) for i in range(len(_MOMENT_NAMES))]
    sq = [sum(p[1][i] for p in parts) for i in range(len(_MOMENT_NAMES))]
    targets = (n, 0.0, 2 * c**2, 6 * c**3, n**2 + n, n**3 + 3 * n**2 + 2 * n, n**4 + 6 * n**3 + 11 * n**2 + 6 * n, 0.0)
    reports = [
        _report(name, sums[i], sq[i], trials, targets[i], exact=i not in (2, 3))
        for i, name in enumerate(_MOMENT_NAMES)
    ]
    emp = sum(p[2] for p in parts) / trials
    target = (n + 1) * np.eye(cM)
    tn = float(np.linalg.norm(target))
    err = float(np.linalg.norm(emp - target)) / tn
    reports.insert(7, MomentReport("E zi zi^H zi zi^H = (cM+1) I", float(np.real(np.trace(emp)) / cM), n + 1, err, tn, True))
    return reports


def eigen_edge_report(cfg: SystemConfig, trials: int, seed: int, parallel_width: int = 1) -> Tuple[MomentReport, MomentReport]:
    """Mean extreme eigenvalues of ``G`` against the Marchenko-Pastur edges."""
    validate_config(cfg)

    def run(a, b):
        ev = np.linalg.eigvalsh(gram_batch(cfg, seed, a, b))
        return ev[:, 0], ev[:, -1]

    parts = _map_chunks(run, trials, parallel_width)
    lo = np.concatenate([p[0] for p in parts])
    hi = np.concatenate([p[1] for p in parts])
    e = mp_edges(cfg.K / cfg.cM)
    return (
        _report("min eigenvalue of G", lo.sum(), (lo**2).sum(), lo.size, e.a_bar),
        _report("max eigenvalue of G", hi.sum(), (hi**2).sum(), hi.size, e.b_bar),
    )


def tracy_widom_edges(cfg: SystemConfig) -> Tuple[float, float]:
    """Marchenko-Pastur edges shifted by the mean Tracy-Widom fluctuation.

    Finite-size prediction of the mean extreme eigenvalues of ``G``. The
    largest eigenvalue of a complex Wishart matrix sits near
    ``b + sigma * E[TW2]`` with ``E[TW2] = -1.7711``; the smallest mirrors
    this at the soft lower edge.
    """
    n, p = cfg.cM, cfg.K
    tw2_mean = -1.7710868074
    sn, sp = math.sqrt(n), math.sqrt(p)
    hi = (sn + sp) ** 2 / n + (sn + sp) * (1 / sn + 1 / sp) ** (1 / 3) / n * tw2_mean
    lo = (sn - sp) ** 2 / n - (sn - sp) * (1 / sp - 1 / sn) ** (1 / 3) / n * tw2_mean
    return lo, hi
