"""Experiment plans, figure presets and the sweep runner.

A plan file is flat UTF-8 text with one ``key = value`` per line, ``#``
comments and comma-separated lists. A list may also be written as
``start:stop:step`` (stop inclusive)::

    sweep = M
    values = 60:150:10
    K = 10
    c = 0.5
    rho = 10
    rho_unit = linear
    schemes = INS, ICNS, OrderedICNS, ZF
    metrics = ergodic_sum_rate, zf_ratio
    trials = 10000
    seed = 1

Recognized sweep variables are ``M``, ``K``, ``r``, ``omega`` and ``rho``.
A fixed ``r`` may be combined with an ``M`` sweep, in which case
``K = r * M`` at every point. SNR values are converted to linear units once,
when the plan is parsed.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from . import analysis
from .channel import NormMode, SystemConfig, validate_config
from .complexity import op_counts
from .errors import ConfigError, DegenerateZF
from .precoders import PrecoderSpec, Scheme
from .simulate import MonteCarloPlan, compare_schemes

log = logging.getLogger("nsprecoding")

SWEEP_VARS = ("M", "K", "r", "omega", "rho")
MC_METRICS = ("ergodic_sum_rate", "simu_approx", "zf_ratio")
THEORY_METRICS = ("theo_approx", "theo_zf_ratio", "ins_zf_ratio", "r_star", "case1_gaps")
COUNT_METRICS = ("mults", "divs")
METRICS = MC_METRICS + THEORY_METRICS + COUNT_METRICS
ALL_NS = ("INS", "DNS", "TNS", "CNS", "ICNS", "OrderedICNS")

COLUMNS = ("scheme", "M", "K", "c", "rho", "rho_unit", "omega", "trials", "seed", "metric", "value", "std_error", "extrapolated")


@dataclass(frozen=True)
class ExperimentPlan:
    sweep: str
    values: Tuple[float, ...]
    schemes: Tuple[str, ...]
    metrics: Tuple[str, ...]
    M: Optional[int] = None
    K: Optional[int] = None
    r: Optional[float] = None
    c: float = 1.0
    rho: float = 10.0
    omega: Optional[float] = None
    rho_unit: str = "linear"
    trials: int = 10000
    seed: int = 1
    norm_mode: NormMode = NormMode.PER_REALIZATION
    out: Optional[str] = None
    name: str = "sweep"
    rho_linear: Tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.sweep not in SWEEP_VARS:
            raise ConfigError(f"sweep variable must be one of {SWEEP_VARS}, got {self.sweep!r}")
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        if self.rho_unit not in ("linear", "dB"):
            raise ConfigError(f"rho_unit must be 'linear' or 'dB', got {self.rho_unit!r}")
        bad = [m for m in self.metrics if m not in METRICS]
        if bad:
            raise ConfigError(f"unknown metrics {bad}")
        for s in self.schemes:
            try:
                PrecoderSpec.parse(s)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if not self.rho_linear:
            rhos = self.values if self.sweep == "rho" else (self.rho,)
            object.__setattr__(self, "rho_linear", tuple(to_linear(v, self.rho_unit) for v in rhos))


def to_linear(rho: float, unit: str) -> float:
    return 10.0 ** (rho / 10.0) if unit == "dB" else float(rho)


# -- parsing ------------------------------------------------------------------------


def _parse_list(text: str) -> List[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _parse_values(text: str) -> Tuple[float, ...]:
    text = text.strip()
    if ":" in text and "," not in text:
        start, stop, step = (float(t) for t in text.split(":"))
        if step <= 0:
            raise ConfigError("range step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(round(start + i * step, 12)) for i in range(n))
    return tuple(float(t) for t in _parse_list(text))


def _as_int(v, key):
    f = float(v)
    if f != int(f):
        raise ConfigError(f"{key} must be an integer, got {v}")
    return int(f)


def parse_plan(text: str, **overrides) -> ExperimentPlan:
    """Build a plan from ``key = value`` text; keyword overrides win over the file."""
    raw: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        raw[k] = v
    kw = {}
    try:
        if "sweep" not in raw or "values" not in raw:
            raise ConfigError("plan needs 'sweep' and 'values'")
        kw["sweep"] = raw.pop("sweep")
        kw["values"] = _parse_values(raw.pop("values"))
        kw["schemes"] = tuple(_parse_list(raw.pop("schemes", "INS")))
        kw["metrics"] = tuple(_parse_list(raw.pop("metrics", "ergodic_sum_rate")))
        for key in ("M", "K", "trials", "seed"):
            if key in raw:
                kw[key] = _as_int(raw.pop(key), key)
        for key in ("r", "c", "rho", "omega"):
            if key in raw:
                kw[key] = float(raw.pop(key))
        for key in ("rho_unit", "out", "name"):
            if key in raw:
                kw[key] = raw.pop(key)
        if "norm_mode" in raw:
            kw["norm_mode"] = NormMode(raw.pop("norm_mode"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if raw:
        raise ConfigError(f"unknown keys {sorted(raw)}")
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentPlan(**kw)


# -- presets ---------------------------------------------------------------------------


def _omega_grid():
    return tuple(round(0.8 + 0.05 * i, 2) for i in range(25))


def presets() -> Dict[str, List[ExperimentPlan]]:
    base = dict(c=0.5, rho=10.0, rho_unit="linear")
    flavors = ("ergodic_sum_rate", "simu_approx", "theo_approx")
    ratio = ("ergodic_sum_rate", "zf_ratio")
    validate = ("ergodic_sum_rate", "zf_ratio", "theo_approx", "theo_zf_ratio")
    r_grid_K = tuple(float(k) for k in range(5, 500, 5))  # r/c = 0.01 .. 0.99 at M = 1000
    return {
        "fig1-left": [ExperimentPlan("omega", _omega_grid(), ("INS", "ICNS", "OrderedICNS"), flavors, M=60, K=10, name="fig1-left", **base)],
        "fig1-right": [ExperimentPlan("omega", _omega_grid(), ("INS", "ICNS", "OrderedICNS"), flavors, M=100, K=10, name="fig1-right", **base)],
        "fig2": [ExperimentPlan("K", r_grid_K, ("ICNS",), ("case1_gaps",), M=1000, name="fig2", **base)],
        "fig3": [
            ExperimentPlan("K", r_grid_K, ("INS",), ("ins_zf_ratio", "r_star"), M=1000, c=0.5, rho=db, rho_unit="dB", name="fig3")
            for db in (10.0, 13.0, 16.0, 20.0)
        ],
        "fig4": [ExperimentPlan("M", tuple(float(m) for m in range(60, 151, 10)), ALL_NS + ("ZF",), ratio, K=10, name="fig4", **base)],
        "fig5": [ExperimentPlan("M", tuple(float(m) for m in range(100, 501, 50)), ALL_NS + ("ZF",), ratio, r=0.1, name="fig5", **base)],
        "fig6": [ExperimentPlan("M", tuple(float(m) for m in range(50, 501, 50)), ALL_NS + ("ZF",), ratio, r=0.2, name="fig6", **base)],
        "fig7": [ExperimentPlan("M", tuple(float(m) for m in range(60, 151, 10)), ("INS", "ICNS", "ZF"), validate, K=10, name="fig7", **base)],
        "fig8": [ExperimentPlan("M", tuple(float(m) for m in range(50, 501, 50)), ("INS", "ICNS", "ZF"), validate, r=0.2, name="fig8", **base)],
    }


PRESET_NAMES = tuple(presets())


# -- sweep points --------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    M: Optional[int]
    K: Optional[int]
    c: float
    rho: float
    rho_linear: float
    omega: Optional[float]


def _int_product(r, M, what):
    k = r * M
    if abs(k - round(k)) > 1e-9:
        raise ConfigError(f"{what}: r*M = {k:g} is not an integer")
    return int(round(k))


def sweep_points(plan: ExperimentPlan) -> Iterator[SweepPoint]:
    for i, v in enumerate(plan.values):
        M, K, rho, omega = plan.M, plan.K, plan.rho, plan.omega
        rho_lin = plan.rho_linear[0]
        if plan.sweep == "M":
            M = _as_int(v, "M")
        elif plan.sweep == "K":
            K = _as_int(v, "K")
        elif plan.sweep == "omega":
            omega = float(v)
        elif plan.sweep == "rho":
            rho, rho_lin = float(v), plan.rho_linear[i]
        if plan.sweep == "r":
            K = _int_product(float(v), M, "sweep point")
        elif plan.r is not None and K is None:
            K = _int_product(plan.r, M, "sweep point")
        yield SweepPoint(M, K, plan.c, rho, rho_lin, omega)


def point_config(plan: ExperimentPlan, pt: SweepPoint) -> SystemConfig:
    if pt.M is None or pt.K is None:
        raise ConfigError("both M and K must be fixed or swept")
    return validate_config(SystemConfig(pt.M, pt.K, pt.c, pt.rho_linear, plan.norm_mode))


# -- running ---------------------------------------------------------------------------


Row = Dict[str, object]


def _row(plan, pt, scheme, metric, value, se=None, omega=None, mc=False, extrapolated=False, M=..., K=...):
    return {
        "scheme": scheme,
        "M": pt.M if M is ... else M,
        "K": pt.K if K is ... else K,
        "c": pt.c,
        "rho": pt.rho,
        "rho_unit": plan.rho_unit,
        "omega": omega,
        "trials": plan.trials if mc else None,
        "seed": plan.seed if mc else None,
        "metric": metric,
        "value": value,
        "std_error": se,
        "extrapolated": extrapolated,
    }


def _spec_for(name: str, pt: SweepPoint, cfg: SystemConfig) -> PrecoderSpec:
    spec = PrecoderSpec.parse(name, pt.omega)
    return spec.resolved(cfg)


def _theory(scheme: str, cfg: SystemConfig, omega):
    key = scheme.upper()
    if key == "INS":
        return analysis.ins_sum_rate(cfg.M, cfg.K, cfg.c, omega, cfg.rho_t)
    if key == "ICNS":
        return analysis.icns_sum_rate(cfg.M, cfg.K, cfg.c, omega, cfg.rho_t)
    if key == "ZF":
        return analysis.zf_sum_rate(cfg.M, cfg.K, cfg.c, cfg.rho_t)
    if key == "MRT":
        return analysis.mrt_sum_rate_lb(cfg.M, cfg.K, cfg.c, cfg.rho_t)
    return None


def run_point(plan: ExperimentPlan, pt: SweepPoint, parallel_width: int = 1) -> List[Row]:
    rows: List[Row] = []
    metrics = set(plan.metrics)
    if metrics & {"ins_zf_ratio", "case1_gaps"}:
        r = pt.K / pt.M
        if "ins_zf_ratio" in metrics:
            try:
                val = analysis.ins_zf_ratio(r, pt.c, pt.rho_linear)
            except DegenerateZF:
                val = float("nan")
            rows.append(_row(plan, pt, "INS", "ins_zf_ratio", val, omega=1 + r / pt.c))
        if "case1_gaps" in metrics:
            g = analysis.case1_gaps(r / pt.c)
            for f in ("sig_gap_user1", "int_gap_user1", "sig_gap_others", "int_gap_others"):
                rows.append(_row(plan, pt, "ICNS", f, getattr(g, f), omega=1 + r / pt.c))
    metrics -= {"r_star", "ins_zf_ratio", "case1_gaps"}
    if not metrics:
        return rows

    cfg = point_config(plan, pt)
    specs = [_spec_for(s, pt, cfg) for s in plan.schemes]
    omegas = {s.name: (s.kind.omega if s.scheme is Scheme.NS else None) for s in specs}
    cmp = None
    if metrics & set(MC_METRICS):
        mc_specs = list(specs)
        if "zf_ratio" in metrics and not any(s.scheme is Scheme.ZF for s in specs):
            mc_specs.append(PrecoderSpec.zf())
        cmp = compare_schemes(cfg, mc_specs, MonteCarloPlan(plan.trials, plan.seed, parallel_width))

    for s in specs:
        name, w = s.name, omegas[s.name]
        if "ergodic_sum_rate" in metrics:
            e = cmp.ergodic[name]
            rows.append(_row(plan, pt, name, "ergodic_sum_rate", e.mean, e.std_error, w, mc=True))
        if "simu_approx" in metrics:
            e = cmp.simu_approx[name]
            rows.append(_row(plan, pt, name, "simu_approx", e.mean, e.std_error, w, mc=True))
        if "zf_ratio" in metrics:
            ratio, se = cmp.ratio(name, "ZF")
            rows.append(_row(plan, pt, name, "zf_ratio", ratio, se, w, mc=True))
        if metrics & {"theo_approx", "theo_zf_ratio"}:
            try:
                th = _theory(name, cfg, w)
            except ValueError:
                # degenerate ZF or outside the validity range of the truncated expansion
                th = float("nan")
            if th is not None:
                if "theo_approx" in metrics:
                    rows.append(_row(plan, pt, name, "theo_approx", th, omega=w))
                if "theo_zf_ratio" in metrics:
                    try:
                        ratio = th / analysis.zf_sum_rate(cfg.M, cfg.K, cfg.c, cfg.rho_t)
                    except DegenerateZF:
                        ratio = float("nan")
                    rows.append(_row(plan, pt, name, "theo_zf_ratio", ratio, omega=w))
        if s.scheme is Scheme.NS and metrics & set(COUNT_METRICS) and cfg.K >= 2:
            rep = op_counts(s.kind.tag, cfg.K)
            for m in COUNT_METRICS:
                if m in metrics:
                    rows.append(_row(plan, pt, name, m, getattr(rep, m), omega=w, extrapolated=rep.extrapolated))
    return rows


def run_sweep(plans: Sequence[ExperimentPlan], parallel_width: int = 1):
    """Run every point of every plan in order.

    Returns ``(rows, failures)``; a point whose configuration is rejected is
    logged, listed in ``failures`` and skipped.
    """
    rows: List[Row] = []
    failures: List[str] = []
    for plan in plans:
        if "r_star" in plan.metrics:
            # one marker row per plan, not tied to a sweep point
            pt = SweepPoint(None, None, plan.c, plan.rho, plan.rho_linear[0], None)
            rows.append(_row(plan, pt, "INS", "r_star", analysis.r_star(plan.c, plan.rho_linear[0])))
        for i, pt in enumerate(sweep_points(plan)):
            label = f"{plan.name}[{i}] M={pt.M} K={pt.K} c={pt.c:g} rho={pt.rho:g}{plan.rho_unit if plan.rho_unit == 'dB' else ''}"
            if pt.omega is not None:
                label += f" omega={pt.omega:g}"
            try:
                out = run_point(plan, pt, parallel_width)
            except ConfigError as exc:
                log.error("%s: %s", label, exc)
                failures.append(f"{label}: {exc}")
                continue
            log.info("%s: %d rows", label, len(out))
            rows.extend(out)
    return rows, failures


def with_overrides(plans: Sequence[ExperimentPlan], **kw) -> List[ExperimentPlan]:
    kw = {k: v for k, v in kw.items() if v is not None}
    out = []
    for p in plans:
        q = replace(p, rho_linear=(), **kw) if kw else p
        out.append(q)
    return out
