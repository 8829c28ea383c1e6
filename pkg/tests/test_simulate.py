import warnings

import numpy as np
import pytest

from nsprecoding import simulate
from nsprecoding.analysis import zf_sum_rate
from nsprecoding.channel import NormMode, SystemConfig
from nsprecoding.errors import SingularPrecondition
from nsprecoding.preconditioners import Kind
from nsprecoding.precoders import PrecoderSpec
from nsprecoding.simulate import (
    MomentReport,
    MonteCarloPlan,
    collect_stats,
    compare_schemes,
    eigen_edge_report,
    ergodic_sum_rate,
    lemma2_moments,
    sum_rate_simu_approx,
    tracy_widom_edges,
)

CFG = SystemConfig(60, 10, 0.5, 10.0)
SPECS = [PrecoderSpec.zf(), PrecoderSpec.mrt()] + [PrecoderSpec.ns(t) for t in Kind]


def test_plan_validation():
    with pytest.raises(ValueError):
        MonteCarloPlan(0, 1)
    with pytest.raises(ValueError):
        MonteCarloPlan(10, 1, parallel_width=0)


def test_independent_of_parallel_width():
    a = compare_schemes(CFG, SPECS, MonteCarloPlan(700, 42, 1))
    b = compare_schemes(CFG, SPECS, MonteCarloPlan(700, 42, 3))
    for name in a.ergodic:
        assert a.ergodic[name].mean == b.ergodic[name].mean
        assert a.ergodic[name].std_error == b.ergodic[name].std_error
        assert a.simu_approx[name].mean == b.simu_approx[name].mean


def test_gram_path_matches_full_channel():
    g = collect_stats(CFG, SPECS, MonteCarloPlan(40, 9))
    f = collect_stats(CFG, SPECS, MonteCarloPlan(40, 9, full_channel=True))
    for name in g:
        assert np.allclose(g[name].power, f[name].power, rtol=1e-10)
        assert np.allclose(g[name].sig, f[name].sig, rtol=1e-10, atol=1e-12)
        assert np.allclose(g[name].intf, f[name].intf, rtol=1e-8, atol=1e-12)


def test_zf_statistical_matches_closed_form():
    cfg = SystemConfig(100, 10, 0.5, 10.0, NormMode.STATISTICAL)
    est = ergodic_sum_rate(cfg, PrecoderSpec.zf(), MonteCarloPlan(2000, 3))
    assert abs(est.mean - zf_sum_rate(100, 10, 0.5, 10.0)) / est.mean < 0.03


def test_zf_statistical_sinr_concentrates():
    cfg = SystemConfig(100, 10, 0.5, 10.0, NormMode.STATISTICAL)
    st = collect_stats(cfg, [PrecoderSpec.zf()], MonteCarloPlan(4000, 5))["ZF"]
    sinr = 1.0 / (st.power.mean() / cfg.rho_t)
    target = 10.0 * (50 - 10) / (0.5 * 10)
    assert abs(sinr - target) / target < 0.02


def test_single_user_schemes_agree():
    cfg = SystemConfig(20, 1, 0.5, 10.0)
    cmp = compare_schemes(cfg, SPECS, MonteCarloPlan(500, 1))
    ref = cmp.ergodic["ZF"]
    for name, e in cmp.ergodic.items():
        assert abs(e.mean - ref.mean) <= 1e-9 + ref.std_error


def test_std_error_scaling():
    spec = PrecoderSpec.ns(Kind.ICNS)
    a = ergodic_sum_rate(CFG, spec, MonteCarloPlan(1000, 2))
    b = ergodic_sum_rate(CFG, spec, MonteCarloPlan(4000, 2))
    assert abs(b.std_error / a.std_error - 0.5) < 0.15
    assert a.trials == 1000 and a.per_user_means.shape == (10,)
    assert a.mean == pytest.approx(a.per_user_means.sum())


def test_monotone_in_rho_and_M():
    spec = PrecoderSpec.ns(Kind.INS)
    plan = MonteCarloPlan(1000, 4)
    by_rho = [ergodic_sum_rate(CFG.with_(rho_t=r), spec, plan) for r in (1.0, 10.0, 100.0)]
    by_M = [ergodic_sum_rate(CFG.with_(M=m), spec, plan) for m in (60, 100, 200)]
    for seq in (by_rho, by_M):
        for lo, hi in zip(seq, seq[1:]):
            assert hi.mean - lo.mean > 2 * np.hypot(lo.std_error, hi.std_error)


def test_simu_approx_gap_shrinks_with_M():
    # measured relative to the ideal-ZF sum-rate
    spec = PrecoderSpec.ns(Kind.INS)
    gaps = []
    for M in (60, 200):
        cfg = CFG.with_(M=M)
        plan = MonteCarloPlan(3000, 6)
        d = sum_rate_simu_approx(cfg, spec, plan).mean - ergodic_sum_rate(cfg, spec, plan).mean
        gaps.append(abs(d) / zf_sum_rate(M, 10, 0.5, 10.0))
    assert gaps[1] < gaps[0]


def test_simu_approx_has_batch_error():
    est = sum_rate_simu_approx(CFG, PrecoderSpec.ns(Kind.INS), MonteCarloPlan(2000, 1))
    assert 0 < est.std_error < 0.5


def test_paired_difference_and_ratio():
    cmp = compare_schemes(CFG, [PrecoderSpec.zf(), PrecoderSpec.ns(Kind.INS)], MonteCarloPlan(500, 3))
    d, se = cmp.paired_difference("ZF", "INS")
    assert d > 0 and se > 0
    r, rse = cmp.ratio("INS", "ZF")
    assert r == pytest.approx(cmp.ergodic["INS"].mean / cmp.ergodic["ZF"].mean)
    assert 0 < rse < 0.05


def _fail_some(n_bad):
    # marks the first n_bad draws of the first chunk only
    real = simulate.precondition_inverse_batch
    calls = []

    def patched(kind, G):
        Dinv, ok = real(kind, G)
        if not calls:
            ok = ok.copy()
            ok[:n_bad] = False
        calls.append(1)
        return Dinv, ok

    return patched


def test_degenerate_draws_within_budget_warn(monkeypatch):
    # one bad draw in the first chunk out of 2000 trials is within the 0.1% budget
    monkeypatch.setattr(simulate, "precondition_inverse_batch", _fail_some(1))
    with pytest.warns(RuntimeWarning):
        est = ergodic_sum_rate(CFG, PrecoderSpec.ns(Kind.DNS), MonteCarloPlan(2000, 1))
    assert est.trials == 1999


def test_degenerate_draws_over_budget_raise(monkeypatch):
    monkeypatch.setattr(simulate, "precondition_inverse_batch", _fail_some(5))
    with pytest.raises(SingularPrecondition):
        ergodic_sum_rate(CFG, PrecoderSpec.ns(Kind.DNS), MonteCarloPlan(1000, 1))


def test_no_warning_on_clean_run():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ergodic_sum_rate(CFG, PrecoderSpec.ns(Kind.TNS), MonteCarloPlan(300, 1))


def _by_name(reports):
    return {r.name: r for r in reports}


def test_moment_exact_targets():
    r4 = _by_name(lemma2_moments(4, 20000, 1))
    assert r4["E|zi^H zi|^2"].target == 20
    r2 = _by_name(lemma2_moments(2, 20000, 1))
    assert r2["E|zi^H zi|^4"].target == 120
    assert r2["E|zi^H zi|^3"].target == 24
    for r in list(r2.values()) + list(r4.values()):
        if r.exact:
            assert r.rel_err < 0.05, r


def test_moments_deterministic_and_width_free():
    a = lemma2_moments(3, 3000, 7, parallel_width=1)
    b = lemma2_moments(3, 3000, 7, parallel_width=4)
    assert a == b


def test_moment_report_rel_err():
    for r in lemma2_moments(4, 5000, 2):
        if r.target != 0 and "zi^H zi zi^H" not in r.name:
            assert r.rel_err == pytest.approx(abs(r.empirical - r.target) / abs(r.target))
    with pytest.raises(ValueError):
        lemma2_moments(0, 10, 1)


def test_edges_single_user():
    lo, hi = eigen_edge_report(SystemConfig(200, 1, 0.5), 500, 1)
    assert lo.empirical == hi.empirical
    assert abs(lo.empirical - 1) < 0.02


def test_edges_match_tracy_widom_corrected_mean():
    # the finite-size mean extremes sit inside the asymptotic edges by about
    # sigma * E[TW2]; the shifted prediction is accurate to well under 1%
    for c in (0.5, 1.0):
        cfg = SystemConfig(400, 40, c)
        lo, hi = eigen_edge_report(cfg, 2000, 3)
        plo, phi = tracy_widom_edges(cfg)
        assert abs(lo.empirical - plo) / plo < 0.01
        assert abs(hi.empirical - phi) / phi < 0.01
        assert lo.empirical > lo.target and hi.empirical < hi.target


def test_moment_report_fields():
    r = MomentReport("x", 1.0, 2.0, 0.5)
    assert np.isnan(r.scale) and r.exact
