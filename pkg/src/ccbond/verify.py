"""Executable checks of the pricing results.

* ``saddle_battery``   -- Monte Carlo test of the extended saddle-point conditions
  (i) J~ = J at the centre, (ii) no holder deviation beats the centre under J~,
  (iii) no firm deviation goes below the centre under J.
* ``dpp_check``        -- dynamic programming identities with eta = T_k ^ stop.
* ``property_sweep``   -- random-parameter sweep of the root/threshold inequalities.
* ``asymptotics_check``-- convergence to the unconstrained problem as lam grows.
* ``smooth_fit_report``, ``regime_continuity``, ``oracle_check`` and the two
  deterministic toy games.

All Monte Carlo comparisons use common random numbers: every row of a report is
evaluated on the same simulated paths, and standard errors come from paired
differences against the centre.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import closed_form as cf
from .engine import (
    DeterministicGameSpec,
    EstimatorResult,
    check_truncation,
    deterministic_game_value,
    simulate_stops,
    summarize,
)
from .errors import CCBondError, NonMonotoneLadder, RegimeMismatch
from .model import ModelParams, RegimeTag, RootPair, char_roots, classify_regime, q_lambda, root_bound_report
from .oracle import GridConfig, relative_gap, solve_hjb_ca_low, solve_hjb_co, solve_hjb_f
from .strategies import StoppingStrategy

SE_BAND = 3.0


def _paired(diff: np.ndarray) -> tuple:
    n = diff.size
    mean = float(np.sum(diff) / n)
    se = float(np.std(diff, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return mean, se


def _z(mean: float, se: float) -> float:
    if se > 0:
        return mean / se
    return 0.0 if mean == 0 else math.copysign(math.inf, mean)


# ---------------------------------------------------------------- saddle battery

@dataclass(frozen=True)
class SaddleRow:
    condition: str          # "ii" (holder deviates, J~) or "iii" (firm deviates, J)
    strategy: StoppingStrategy
    estimate: EstimatorResult
    diff: float             # estimate - centre, paired
    diff_se: float
    z_score: float          # diff / diff_se

    @property
    def ok(self) -> bool:
        if self.condition == "ii":
            return self.z_score <= SE_BAND
        return self.z_score >= -SE_BAND


@dataclass
class SaddleReport:
    regime: RegimeTag
    x0: float
    firm: StoppingStrategy
    holder: StoppingStrategy
    center_value: EstimatorResult
    center_modified: EstimatorResult
    condition_i_gap: float
    condition_i_se: float
    unpaired_se: float
    rows: list = field(default_factory=list)

    @property
    def condition_i_ok(self) -> bool:
        return self.condition_i_gap <= SE_BAND * self.condition_i_se

    @property
    def failures(self) -> list:
        return [r for r in self.rows if not r.ok]

    @property
    def passed(self) -> bool:
        return self.condition_i_ok and not self.failures

    def summary(self) -> str:
        c = self.center_value
        lines = [
            f"saddle battery  regime={self.regime.value}  x0={self.x0:g}  "
            f"firm={self.firm}  holder={self.holder}",
            f"  centre J = {c.mean:.6f} +- {c.stderr:.2e}   (n={c.n_paths}, seed={c.seed})",
            f"  (i)   |J~ - J| = {self.condition_i_gap:.3e}  paired se {self.condition_i_se:.2e}"
            f"  unpaired se {self.unpaired_se:.2e}  {'ok' if self.condition_i_ok else 'VIOLATED'}",
        ]
        for r in self.rows:
            flag = "ok" if r.ok else "VIOLATED"
            lines.append(f"  ({r.condition:<3}) {str(r.strategy):<24} {r.estimate.mean:.6f}"
                         f"  diff {r.diff:+.3e}  z {r.z_score:+7.2f}  {flag}")
        lines.append(f"  => {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _reference_levels(p: ModelParams) -> tuple:
    sol = cf.solve_game(p)
    kb = p.K / p.gamma
    if sol.regime.tag is RegimeTag.LowK:
        return kb, kb
    if sol.regime.tag is RegimeTag.MidK:
        return sol.x_ca, kb
    return sol.z, sol.x_co


def default_alternatives(level: float, role: str, n_thresholds: int = 12) -> list:
    """Thresholds log-spaced over [0.2, 5] x ``level``, FixedArrival(1..4) and Never."""
    out = [StoppingStrategy.threshold(y, role) for y in np.geomspace(0.2 * level, 5.0 * level, n_thresholds)]
    out += [StoppingStrategy.arrival(k, role) for k in range(1, 5)]
    out.append(StoppingStrategy.never(role))
    return out


def saddle_battery(p: ModelParams, x0: float, firm_alts=None, holder_alts=None,
                   n_paths: int = 200_000, seed: int = 42, workers: int = 1,
                   firm: StoppingStrategy | None = None,
                   holder: StoppingStrategy | None = None) -> SaddleReport:
    """Run conditions (i)-(iii) around the centre (firm, holder); defaults to the closed-form saddle."""
    sol = cf.solve_game(p)
    firm = firm or sol.firm_strategy
    holder = holder or sol.holder_strategy
    f_ref, h_ref = _reference_levels(p)
    firm_alts = list(firm_alts) if firm_alts is not None else default_alternatives(f_ref, "firm")
    holder_alts = list(holder_alts) if holder_alts is not None else default_alternatives(h_ref, "holder")

    table = simulate_stops(p, x0, [firm, holder, *firm_alts, *holder_alts], n_paths, seed, workers=workers)
    n_trunc = check_truncation(table)
    center = table.payoffs(firm, holder)
    center_mod = table.payoffs(firm, holder, modified=True)
    gap, gap_se = _paired(center_mod - center)
    unpaired = math.hypot(*(np.std(a, ddof=1) / math.sqrt(a.size) for a in (center, center_mod)))

    rows = []
    for cond, alts in (("ii", holder_alts), ("iii", firm_alts)):
        for s in alts:
            pay = table.payoffs(firm, s, modified=True) if cond == "ii" else table.payoffs(s, holder)
            d, d_se = _paired(pay - center)
            rows.append(SaddleRow(cond, s, summarize(pay, seed, n_trunc), d, d_se, _z(d, d_se)))
    return SaddleReport(sol.regime.tag, float(x0), firm, holder,
                        summarize(center, seed, n_trunc), summarize(center_mod, seed, n_trunc),
                        abs(gap), gap_se, float(unpaired), rows)


# ---------------------------------------------------------------- DPP

class Player(enum.Enum):
    Bondholder = "Bondholder"
    Firm = "Firm"


@dataclass(frozen=True)
class DPPReport:
    which: Player
    x0: float
    eta_arrival: int
    target: float
    estimate: EstimatorResult
    stopped_at_eta: float   # fraction of paths with eta equal to the optimal stop

    @property
    def z_score(self) -> float:
        return _z(self.estimate.mean - self.target, self.estimate.stderr)

    @property
    def passed(self) -> bool:
        return abs(self.z_score) <= SE_BAND

    def summary(self) -> str:
        e = self.estimate
        return (f"DPP {self.which.value:<10} x0={self.x0:<8g} eta=T_{self.eta_arrival}^stop  "
                f"rhs={e.mean:.6f} +- {e.stderr:.2e}  closed form={self.target:.6f}  "
                f"z={self.z_score:+.2f}  {'PASS' if self.passed else 'FAIL'}")


def dpp_check(p: ModelParams, x0: float, which: Player | str, n_paths: int = 200_000,
              seed: int = 42, eta_arrival: int = 1, workers: int = 1) -> DPPReport:
    """Estimate the right side of the DPP identity with eta = T_k ^ (optimal stop).

    Bondholder: E[coupons to eta + e^{-r eta} v_co(X_eta) 1{eta < tau*} + e^{-r tau*} gamma X 1{tau* = eta}].
    Firm: the same with v_f, sigma* and max(gamma X, K) as stopped payoff.
    """
    which = Player(which)
    if which is Player.Firm:
        if classify_regime(p).tag is not RegimeTag.MidK:
            raise RegimeMismatch("the firm identity is posed for c/r < K < gamma*x_co")
        sol = cf.firm_coefficients(p)
        stop, value = StoppingStrategy.threshold(sol.x_ca, "firm"), sol.curve

        def stopped(x):
            return np.maximum(p.gamma * x, p.K)
    else:
        sol = cf.bondholder_solution(p)
        stop, value = StoppingStrategy.threshold(sol.x_co, "holder"), sol.curve

        def stopped(x):
            return p.gamma * x

    eta = StoppingStrategy.arrival(eta_arrival)
    table = simulate_stops(p, x0, [stop, eta], n_paths, seed, workers=workers)
    n_trunc = check_truncation(table)
    s_t, s_x = table.stop(stop)
    e_t, e_x = table.stop(eta)
    at_stop = s_t <= e_t
    t = np.where(at_stop, s_t, e_t)
    pay = -(p.c / p.r) * np.expm1(-p.r * t)
    with np.errstate(invalid="ignore", over="ignore"):
        tail = np.where(at_stop, stopped(np.nan_to_num(s_x, nan=1.0)),
                        value(np.nan_to_num(e_x, nan=1.0)))
        pay = pay + np.where(np.isfinite(t), np.exp(-p.r * t) * tail, 0.0)
    target = float(value(float(x0)))
    return DPPReport(which, float(x0), int(eta_arrival), target,
                     summarize(pay, seed, n_trunc), float(np.mean(at_stop & np.isfinite(t))))


# ---------------------------------------------------------------- property sweep

@dataclass(frozen=True)
class SweepConfig:
    r: tuple = (0.01, 0.2)
    q: tuple = (0.01, 0.2)
    sigma: tuple = (0.1, 0.8)
    lam: tuple = (0.1, 50.0)
    c: tuple = (0.1, 5.0)
    gamma: tuple = (0.1, 5.0)
    log_lambda: bool = True
    seed: int = 20240917


@dataclass(frozen=True)
class Violation:
    draw: int
    claim: str
    detail: str
    params: ModelParams


@dataclass
class SweepReport:
    n_draws: int
    tol: float
    checks: dict = field(default_factory=dict)     # claim -> number of draws where it applied
    violations: list = field(default_factory=list)
    runtime: float = 0.0
    regimes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        lines = [f"property sweep: {self.n_draws} draws, tol {self.tol:g}, {self.runtime:.2f} s, "
                 f"regimes {self.regimes}"]
        for claim, n in self.checks.items():
            bad = sum(v.claim == claim for v in self.violations)
            lines.append(f"  {claim:<34} applied {n:5d}  violations {bad}")
        for v in self.violations[:20]:
            lines.append(f"  draw {v.draw}: {v.claim}: {v.detail}  {v.params}")
        lines.append(f"  => {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def sample_params(rng: np.random.Generator, cfg: SweepConfig, target: RegimeTag) -> ModelParams:
    u = lambda lo_hi: float(rng.uniform(*lo_hi))  # noqa: E731
    lam = math.exp(u(tuple(map(math.log, cfg.lam)))) if cfg.log_lambda else u(cfg.lam)
    base = ModelParams(r=u(cfg.r), q=u(cfg.q), sigma=u(cfg.sigma), lam=lam, c=u(cfg.c), gamma=u(cfg.gamma), K=1.0)
    cr = base.c / base.r
    gx = base.gamma * cf.threshold_co(base)
    if target is RegimeTag.LowK:
        K = cr * float(rng.uniform(0.2, 1.0))
    elif target is RegimeTag.MidK:
        K = cr + (gx - cr) * float(rng.uniform(0.01, 0.99))
    else:
        K = gx * float(rng.uniform(1.0, 3.0))
    return base.replace(K=K)


def _bounded(lo, value, hi, tol) -> bool:
    """lo < value < hi, with violations only beyond ``tol`` relative to the value."""
    slack = tol * max(1.0, abs(value))
    return value - lo > -slack and hi - value > -slack


def check_draw(p: ModelParams, tol: float = 1e-9, roots: RootPair | None = None,
               roots0: RootPair | None = None, n_grid: int = 64) -> tuple:
    """Evaluate every applicable claim for one parameter set.

    Returns ``(applied, failures)``: the claim names checked and (claim, detail)
    pairs that failed. ``roots``/``roots0`` replace the lam and lam=0 roots.
    """
    rl = roots or char_roots(p, p.lam)
    r0 = roots0 or char_roots(p, 0.0)
    applied, bad = [], []

    def claim(name, ok, detail=""):
        applied.append(name)
        if not ok:
            bad.append((name, detail))

    # root bounds
    for lam_, rp in ((p.lam, rl), (0.0, r0)):
        scale = abs(p.r + lam_) + 0.5 * p.sigma ** 2 * max(rp.alpha ** 2, rp.beta ** 2)
        res = max(abs(q_lambda(p, lam_, rp.alpha)), abs(q_lambda(p, lam_, rp.beta))) / scale
        claim("roots:Q=0,alpha>1,beta<0", res <= tol and rp.alpha > 1.0 and rp.beta < 0.0,
              f"lam={lam_}: residual {res:.2e}, alpha={rp.alpha}, beta={rp.beta}")
    if p.r != p.q:
        m = (p.lam + p.r) / (p.r - p.q)
        claim("roots:Q((lam+r)/(r-q))>0", q_lambda(p, p.lam, m) > -tol, f"Q={q_lambda(p, p.lam, m)}")
    rep = root_bound_report(p, p.lam, roots=rl, roots0=r0)
    for name, (lo, v, hi) in rep.checks.items():
        claim("roots:" + name, _bounded(lo, v, hi, tol), f"{lo} < {v} < {hi}")

    # conversion threshold bounds
    try:
        xs = cf.threshold_co_from_roots(p, r0.alpha, rl.beta)
    except CCBondError as exc:
        claim("x_co:bounds", False, str(exc))
        return applied, bad
    lower = max(p.c / (p.gamma * p.r), p.c / (p.gamma * p.q) * (p.lam + p.q) / (p.lam + p.r))
    upper = p.c / (p.gamma * p.r) * r0.alpha / (r0.alpha - 1.0) if r0.alpha > 1 else math.inf
    claim("x_co:bounds", _bounded(lower, xs, upper, tol), f"{lower} < {xs} < {upper}")

    tag = classify_regime(p).tag
    kb = p.K / p.gamma
    if tag is RegimeTag.LowK:
        a, b = cf.low_k_coefficients(p)
        claim("signs:LowK A>0,B>0", a > 0 and b > 0, f"A={a}, B={b}")
    elif tag is RegimeTag.MidK:
        try:
            sol = cf.firm_coefficients(p)
        except CCBondError as exc:
            claim("x_ca:iff", False, f"{type(exc).__name__}: {exc}")
            return applied, bad
        claim("signs:MidK A>0,B<0", sol.a_coef > 0 and sol.b_coef < 0, f"A={sol.a_coef}, B={sol.b_coef}")
        claim("x_ca:iff", (xs > kb) == (sol.x_ca < kb), f"x_co={xs}, x_ca={sol.x_ca}, K/gamma={kb}")
        x = np.geomspace(1e-3 * sol.x_ca, sol.x_ca, n_grid)
        gap = sol.curve(x) - p.gamma * x
        worst = float(np.min(gap / np.maximum(1.0, np.abs(sol.curve(x)))))
        claim("v_f>=gamma*x", worst > -tol, f"min (v_f - gamma x) = {worst:.3e}")
    else:
        x = np.geomspace(1e-3 * xs, xs, n_grid)
        v = cf.value_co(p, x)
        worst = float(np.max((v - p.K) / max(1.0, p.K)))
        claim("v_co<=K", worst < tol, f"max (v_co - K) = {worst:.3e}")
    return applied, bad


def property_sweep(n_draws: int = 1000, cfg: SweepConfig = SweepConfig(), tol: float = 1e-9,
                   corrupt_roots=None) -> SweepReport:
    """Random draws cycling through LowK, MidK, HighK; ``corrupt_roots(p) -> RootPair`` injects lam roots."""
    if n_draws < 1000:
        raise ValueError(f"the sweep needs at least 1000 draws, got {n_draws}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    targets = list(RegimeTag)
    rep = SweepReport(n_draws, tol)
    for i in range(n_draws):
        p = sample_params(rng, cfg, targets[i % 3])
        tag = classify_regime(p).tag.value
        rep.regimes[tag] = rep.regimes.get(tag, 0) + 1
        roots = corrupt_roots(p) if corrupt_roots else None
        applied, bad = check_draw(p, tol, roots=roots)
        for name in applied:
            rep.checks[name] = rep.checks.get(name, 0) + 1
        rep.violations += [Violation(i, name, detail, p) for name, detail in bad]
    rep.runtime = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------- asymptotics

DEFAULT_LADDER = (1.0, 4.0, 16.0, 64.0, 256.0, 1024.0)
ASYMPTOTIC_TOL = 0.01


@dataclass(frozen=True)
class LadderRung:
    lam: float
    regime: RegimeTag
    x_co: float
    x_ca: float | None
    value_gaps: tuple


@dataclass
class AsymptoticsReport:
    base: ModelParams
    x_co_limit: float
    x_points: tuple
    rungs: list
    checks: dict = field(default_factory=dict)   # name -> (ok, detail)

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    def x_co_gaps(self) -> list:
        return [abs(r.x_co - self.x_co_limit) / self.x_co_limit for r in self.rungs]

    def summary(self) -> str:
        lines = [f"asymptotics  K={self.base.K:g}  x_co limit={self.x_co_limit:.6f}  points={self.x_points}"]
        for r, g in zip(self.rungs, self.x_co_gaps()):
            xca = f"{r.x_ca:.6f}" if r.x_ca is not None else "-"
            lines.append(f"  lam={r.lam:<8g} {r.regime.value:<5} x_co={r.x_co:.6f} (gap {g:.3%})"
                         f"  x_ca={xca}  value gap max={max(r.value_gaps):.3%}")
        for name, (ok, detail) in self.checks.items():
            lines.append(f"  {name:<28} {'ok' if ok else 'FAILED'}  {detail}")
        lines.append(f"  => {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def default_points(p: ModelParams) -> tuple:
    ref = p.c / (p.gamma * p.r)
    return tuple(ref * f for f in (0.2, 0.6, 1.0, 2.0, 4.0))


def asymptotics_check(p: ModelParams, ladder=DEFAULT_LADDER, x_points=None,
                      tol: float = ASYMPTOTIC_TOL) -> AsymptoticsReport:
    """Thresholds and values along an increasing lam ladder against the unconstrained limits."""
    ladder = [float(v) for v in ladder]
    if len(ladder) < 5:
        raise NonMonotoneLadder(f"ladder needs at least 5 rungs, got {len(ladder)}")
    if any(b <= a for a, b in zip(ladder, ladder[1:])) or ladder[0] <= 0:
        raise NonMonotoneLadder(f"ladder must be positive and strictly increasing: {ladder}")
    x_points = tuple(x_points) if x_points is not None else default_points(p)
    xs_inf = cf.threshold_co_unconstrained(p)
    v_inf = np.asarray(cf.value_ca_unconstrained(p, np.array(x_points)))
    rungs = []
    for lam in ladder:
        q = p.replace(lam=lam)
        sol = cf.solve_game(q)
        gaps = np.abs(np.asarray(sol.value(np.array(x_points))) - v_inf) / np.abs(v_inf)
        rungs.append(LadderRung(lam, sol.regime.tag, sol.x_co, sol.x_ca, tuple(float(g) for g in gaps)))

    rep = AsymptoticsReport(p, xs_inf, x_points, rungs)
    gaps = rep.x_co_gaps()
    below = all(r.x_co < xs_inf for r in rungs)
    rep.checks["x_co below limit"] = (below, "x_co,lam < x_co on every rung")
    dec = all(b < a for a, b in zip(gaps, gaps[1:]))
    rep.checks["x_co gap decreasing"] = (dec, "")
    rep.checks["x_co final gap"] = (gaps[-1] < tol, f"{gaps[-1]:.4%} (limit {tol:.0%})")
    kb = p.K / p.gamma
    if rungs[-1].regime is RegimeTag.MidK or classify_regime(p).tag is RegimeTag.MidK:
        last = rungs[-1].x_ca
        if last is None:
            rep.checks["x_ca final gap"] = (False, f"final rung is {rungs[-1].regime.value}, not MidK")
        else:
            g = abs(last - kb) / kb
            rep.checks["x_ca final gap"] = (g < tol, f"|x_ca - K/gamma|/(K/gamma) = {g:.4%}")
    vfinal = max(rungs[-1].value_gaps)
    rep.checks["value final gap"] = (vfinal < tol, f"{vfinal:.4%}")
    return rep


# ---------------------------------------------------------------- smooth fit

SMOOTH_FIT_STEPS = (1e-3, 5e-4, 2.5e-4)


@dataclass(frozen=True)
class CutReport:
    name: str
    cut: float
    value_residual: float
    gaps: tuple
    ratios: tuple

    def ok(self, min_ratio: float = 1.8, value_tol: float = 1e-10) -> bool:
        return self.value_residual <= value_tol and all(r >= min_ratio for r in self.ratios)


def derivative_gaps(f, cut: float, steps=SMOOTH_FIT_STEPS) -> tuple:
    """|right - left| one-sided difference quotients at ``cut`` for each step."""
    out = []
    f0 = float(f(cut))
    for h in steps:
        left = (f0 - float(f(cut - h))) / h
        right = (float(f(cut + h)) - f0) / h
        out.append(abs(right - left))
    return tuple(out)


def cut_report(name: str, curve: cf.PiecewiseCurve, index: int, steps=SMOOTH_FIT_STEPS) -> CutReport:
    cut = curve.cuts[index]
    left = float(curve.branch(index, cut))
    right = float(curve.branch(index + 1, cut))
    gaps = derivative_gaps(curve, cut, steps)
    ratios = tuple(a / b if b > 0 else math.inf for a, b in zip(gaps, gaps[1:]))
    return CutReport(name, cut, abs(left - right) / max(1.0, abs(left)), gaps, ratios)


def smooth_fit_report(p: ModelParams) -> list:
    """Cut reports for v_co (always) plus v_f (MidK) or the low-K game value (LowK)."""
    out = [cut_report("v_co @ x_co", cf.bondholder_solution(p).curve, 0)]
    tag = classify_regime(p).tag
    if tag is RegimeTag.MidK:
        curve = cf.firm_coefficients(p).curve
        out += [cut_report("v_f @ x_ca", curve, 0), cut_report("v_f @ K/gamma", curve, 1)]
    elif tag is RegimeTag.LowK:
        out.append(cut_report("v_ca(LowK) @ K/gamma", cf.solve_game(p).value, 0))
    return out


# ---------------------------------------------------------------- regime continuity

@dataclass(frozen=True)
class ContinuityRow:
    cut_name: str
    cut: float
    x: float
    below: float
    above: float

    @property
    def diff(self) -> float:
        return abs(self.above - self.below)


def regime_continuity(p: ModelParams, xs=(0.3, 0.5), dK: float = 1e-4) -> list:
    """v_ca^lam(x) just below and above each regime cut in K."""
    cut_low = p.c / p.r
    cut_high = p.gamma * cf.threshold_co(p)
    rows = []
    for name, cut in (("c/r", cut_low), ("gamma*x_co", cut_high)):
        lo, hi = cf.solve_game(p.replace(K=cut - dK)), cf.solve_game(p.replace(K=cut + dK))
        for x in xs:
            rows.append(ContinuityRow(name, cut, float(x), float(lo(x)), float(hi(x))))
    return rows


# ---------------------------------------------------------------- oracle comparison

@dataclass(frozen=True)
class OracleReport:
    regime: RegimeTag
    equation: str
    gap: float
    boundary: float | None
    boundary_exact: float | None
    runtime: float
    iterations: int

    @property
    def boundary_gap(self) -> float:
        if self.boundary is None:
            return 0.0
        return abs(self.boundary - self.boundary_exact) / self.boundary_exact

    def passed(self, gap_tol: float = 5e-3, boundary_tol: float = 0.01) -> bool:
        return self.gap <= gap_tol and self.boundary_gap <= boundary_tol

    def summary(self) -> str:
        b = "" if self.boundary is None else \
            f"  boundary {self.boundary:.7f} vs {self.boundary_exact:.7f} ({self.boundary_gap:.2e})"
        return (f"oracle {self.regime.value:<5} {self.equation:<8} sup rel gap {self.gap:.3e}{b}"
                f"  {self.iterations} it  {self.runtime * 1e3:.1f} ms")


def oracle_check(p: ModelParams, cfg: GridConfig = GridConfig()) -> OracleReport:
    """Solve the regime's HJB equation by finite differences and compare with the closed form."""
    tag = classify_regime(p).tag
    t0 = time.perf_counter()
    if tag is RegimeTag.LowK:
        curve = solve_hjb_ca_low(p, cfg)
        exact, name, key, ref = cf.solve_game(p).value, "v_ca", None, None
    elif tag is RegimeTag.MidK:
        curve = solve_hjb_f(p, cfg)
        sol = cf.firm_coefficients(p)
        exact, name, key, ref = sol.curve, "v_f", "x_ca", sol.x_ca
    else:
        curve = solve_hjb_co(p, cfg)
        sol = cf.bondholder_solution(p)
        exact, name, key, ref = sol.curve, "v_co", "x_co", sol.x_co
    dt = time.perf_counter() - t0
    found = curve.boundary_report.get(key) if key else None
    return OracleReport(tag, name, relative_gap(curve, exact), found, ref, dt, curve.iterations)


# ---------------------------------------------------------------- toy deterministic games

ORDER_GAME_GRIDS = ((0.5, 1.0, 1.5, 2.0), (0.5, 1.0, 1.2, 1.5, 2.0))
VALUED_GAME_GRID = (0.5, 1.0, 1.5)


def order_game(grid_player1=ORDER_GAME_GRIDS[0], grid_player2=ORDER_GAME_GRIDS[1]) -> tuple:
    """L = M = 1{t > 1}, U = 1{t <= 1}: the order condition L <= U fails. Returns (upper, lower)."""
    spec = DeterministicGameSpec(
        L=lambda t: float(t > 1), M=lambda t: float(t > 1), U=lambda t: float(t <= 1),
        grid_player1=grid_player1, grid_player2=grid_player2,
    )
    return deterministic_game_value(spec)


def valued_game(grid=VALUED_GAME_GRID) -> tuple:
    """L = M = 1{t >= 1}, U = 1{t < 1}. Returns (upper, lower)."""
    spec = DeterministicGameSpec(
        L=lambda t: float(t >= 1), M=lambda t: float(t >= 1), U=lambda t: float(t < 1),
        grid_player1=grid, grid_player2=grid,
    )
    return deterministic_game_value(spec)
