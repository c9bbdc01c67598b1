"""Acceptance criteria, one test per criterion.

Each test appends a single ``[n] PASS/FAIL ...`` line to ``ACCEPTANCE_LINES``
(echoed in the terminal summary) and then asserts at the stated tolerance.
Criteria that do not hold are left failing on purpose.
"""

import time

import numpy as np
import pytest

from ccbond import closed_form as cf
from ccbond import verify as V
from ccbond.engine import estimate_J
from ccbond.model import RegimeTag
from ccbond.oracle import GridConfig
from ccbond.strategies import StoppingStrategy

from conftest import ACCEPTANCE_LINES, TOY

REGIME_K = {"LowK": 0.4, "MidK": 0.6, "HighK": 0.8}
N_PATHS = 200_000


def record(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{n}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_1_closed_form_vs_fd_oracle():
    cfg = GridConfig(n_nodes=4000)
    parts, ok = [], True
    for name, K in REGIME_K.items():
        rep = V.oracle_check(TOY.replace(K=K), cfg)
        good = rep.gap <= 5e-3 and rep.runtime <= 10.0 and rep.boundary_gap <= 0.01
        ok &= good and rep.regime.value == name
        b = "" if rep.boundary is None else f" boundary={rep.boundary:.5f}"
        parts.append(f"{name} gap={rep.gap:.1e}{b} {rep.runtime:.2f}s")
    record(1, "closed form vs FD oracle", ok, "; ".join(parts))


def test_2_smooth_fit():
    reports = [c for K in REGIME_K.values() for c in V.smooth_fit_report(TOY.replace(K=K))]
    ok = all(c.ok(1.8, 1e-10) for c in reports)
    worst_ratio = min(min(c.ratios) for c in reports)
    worst_res = max(c.value_residual for c in reports)
    record(2, "smooth fit", ok,
           f"{len(reports)} cuts, min gap ratio {worst_ratio:.3f}, max value residual {worst_res:.1e}")


@pytest.mark.slow
def test_3_monte_carlo_pricing():
    parts, ok = [], True
    for name, K in REGIME_K.items():
        p = TOY.replace(K=K)
        sol = cf.solve_game(p)
        t0 = time.perf_counter()
        zs = []
        for x0 in (0.3, 0.5, 1.0):
            est = estimate_J(p, x0, sol.firm_strategy, sol.holder_strategy, n_paths=N_PATHS)
            zs.append((est.mean - float(sol(x0))) / est.stderr)
        dt = time.perf_counter() - t0
        ok &= all(abs(z) <= 3 for z in zs) and dt <= 60
        parts.append(f"{name} z=[{', '.join(f'{z:+.2f}' for z in zs)}] {dt:.1f}s")
    record(3, "Monte Carlo pricing", ok, "; ".join(parts))


@pytest.mark.slow
def test_4_saddle_battery():
    parts, ok = [], True
    for name, K in REGIME_K.items():
        rep = V.saddle_battery(TOY.replace(K=K), 0.5, n_paths=N_PATHS)
        n_firm = sum(r.condition == "iii" for r in rep.rows)
        n_holder = sum(r.condition == "ii" for r in rep.rows)
        ok &= rep.passed and min(n_firm, n_holder) >= 16
        parts.append(f"{name} {'ok' if rep.passed else 'violated'} ({n_firm}+{n_holder} alternatives)")

    # negative control: the firm calls only at ten times its optimal level
    p = TOY
    z = cf.z_level(p)
    bad = StoppingStrategy.threshold(10 * z, "firm")
    ctrl = V.saddle_battery(p, 0.5, n_paths=N_PATHS, firm=bad)
    worst = min(r.z_score for r in ctrl.rows if r.condition == "iii")
    caught = worst < -3
    ok &= caught
    parts.append(f"control Threshold(10z) worst (iii) z={worst:+.2f} {'caught' if caught else 'NOT caught'}")
    record(4, "saddle battery", ok, "; ".join(parts))


@pytest.mark.slow
def test_5_dpp_identities():
    xs = (0.1, 0.3, 0.5, 0.8, 1.2)
    reps = [V.dpp_check(TOY, x, V.Player.Bondholder, n_paths=N_PATHS) for x in xs]
    reps += [V.dpp_check(TOY.replace(K=0.6), x, V.Player.Firm, n_paths=N_PATHS) for x in xs]
    ok = all(r.passed for r in reps)
    zs = [r.z_score for r in reps]
    record(5, "DPP identities", ok,
           f"{len(reps)} checks (5 bondholder, 5 firm), |z| max {max(abs(z) for z in zs):.2f}")


def test_6_property_sweep():
    rep = V.property_sweep(1000, tol=1e-9)
    ok = rep.n_draws == 1000 and not rep.violations and rep.runtime <= 30
    record(6, "property sweep", ok,
           f"{rep.n_draws} draws, {sum(rep.checks.values())} claim evaluations, {len(rep.violations)} violations, {rep.runtime:.2f}s")


def test_7_asymptotics():
    reps = {K: V.asymptotics_check(TOY.replace(K=K)) for K in REGIME_K.values()}
    mid = reps[0.6]
    failed = sorted({name for r in reps.values() for name, (good, _) in r.checks.items() if not good})
    x_ca = mid.rungs[-1].x_ca
    detail = (f"x_co gap at 1024 {mid.x_co_gaps()[-1]:.2%}; MidK x_ca at 1024 {x_ca:.5f} vs K/gamma 0.6; "
              f"max value gap {max(max(r.rungs[-1].value_gaps) for r in reps.values()):.2%}")
    if failed:
        detail += f"; failing: {', '.join(failed)}"
    record(7, "asymptotics", not failed, detail)


def test_8_toy_games():
    order = V.order_game()
    valued = V.valued_game()
    ok = order == (1.0, 0.0) and valued == (1.0, 1.0)
    record(8, "deterministic toy games", ok,
           f"order game (upper, lower) = {order} (want (1, 0)); valued game = {valued} (want (1, 1))")


def test_9_regime_continuity():
    rows = V.regime_continuity(TOY, xs=(0.3, 0.5), dK=1e-4)
    worst = {name: max(r.diff for r in rows if r.cut_name == name) for name in ("c/r", "gamma*x_co")}
    ok = len(rows) == 4 and all(d <= 1e-3 for d in worst.values())
    record(9, "regime continuity", ok, ", ".join(f"cut {k}: max diff {v:.2e}" for k, v in worst.items()))
