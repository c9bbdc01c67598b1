"""Command-line driver: ``ccbond {price,curve,simulate,verify,asymptotics}``.

Config files are flat ``key = value`` lines with keys r, q, sigma, lambda, c,
gamma, K and (optionally) x; ``#`` starts a comment.

Exit codes: 0 success/PASS, 1 verification failure, 2 input error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import difflib
import io
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import closed_form as cf
from . import verify as V
from .engine import estimate_J
from .errors import CCBondError, NonMonotoneLadder, ParameterError, StrategyParseError
from .model import ModelParams, RegimeTag, classify_regime, validate_params
from .strategies import parse_strategy

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3
CONFIG_KEYS = ("r", "q", "sigma", "lambda", "c", "gamma", "K", "x")
CURVE_HEADER = ("x", "v_ca_lambda", "v_ca_unconstrained", "v_co_lambda", "regime")
LADDER_HEADER = ("lambda", "x_co_lambda", "x_ca_lambda", "value_gap_max")
SIMULATE_HEADER = ("x", "firm", "holder", "modified", "mean", "stderr", "n_paths", "seed")
TOY = ModelParams(r=2.0, q=2.0, sigma=math.sqrt(2.0), lam=4.0, c=1.0, gamma=1.0, K=0.8)
TOY_REGIMES = ((0.4, 0.3), (0.6, 0.3), (0.8, 0.5))   # (K, x0) for LowK, MidK, HighK


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    model: ModelParams
    x: float | None = None
    paths: int = 200_000
    seed: int = 42
    grid: tuple = (0.01, 5.0, 400)
    lambda_ladder: tuple = V.DEFAULT_LADDER

    def __post_init__(self):
        lo, hi, n = self.grid
        if not 0 < lo < hi:
            raise InputError(f"grid: need 0 < x_min < x_max, got {lo}, {hi}")
        if int(n) != n or n < 2:
            raise InputError(f"grid: points must be an integer >= 2, got {n}")
        if self.paths < 100:
            raise InputError(f"paths: must be >= 100, got {self.paths}")
        if self.seed < 0:
            raise InputError(f"seed: must be >= 0, got {self.seed}")

    def x_grid(self) -> np.ndarray:
        lo, hi, n = self.grid
        return np.linspace(lo, hi, int(n))


def fmt(v) -> str:
    """17 significant digits; round-trips every double."""
    if v is None:
        return ""
    return format(float(v), ".17g")


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        where = f"{source}:{lineno}"
        if not sep or not key:
            raise InputError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        if key not in CONFIG_KEYS:
            hint = difflib.get_close_matches(key, CONFIG_KEYS, n=1)
            extra = f" (did you mean '{hint[0]}'?)" if hint else ""
            raise InputError(f"{where}: unknown key '{key}'{extra}")
        if key in values:
            raise InputError(f"{where}: duplicate key '{key}'")
        try:
            values[key] = float(value)
        except ValueError:
            raise InputError(f"{where}: {key}: not a number: {value!r}") from None
    return values


def load_config(path: str | None) -> tuple:
    """(ModelParams, x or None) from a config file; the toy parameters if ``path`` is None."""
    if path is None:
        return TOY, None
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror or exc}") from None
    values = parse_config_text(text, path)
    x = values.pop("x", None)
    return validate_params(values), x


def _run_config(args, x_required: bool = False) -> RunConfig:
    model, x = load_config(args.config)
    if getattr(args, "x", None) is not None:
        x = args.x
    if x is not None and not (x > 0 and math.isfinite(x)):
        raise ParameterError("x", f"NonPositiveX(x): stock price must be > 0, got {x}")
    if x_required and x is None:
        raise InputError("x: give --x or an 'x = ...' line in the config")
    kw = {}
    if getattr(args, "paths", None) is not None:
        kw["paths"] = args.paths
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    if getattr(args, "lambdas", None) is not None:
        kw["lambda_ladder"] = args.lambdas
    return RunConfig(model, x, **kw)


# ---------------------------------------------------------------- commands

def cmd_price(cfg: RunConfig, out) -> int:
    p, x = cfg.model, cfg.x
    sol = cf.solve_game(p)
    lines = [
        f"regime              {sol.regime.tag.value}   (c/r = {fmt(p.c / p.r)}, gamma*x_co,lambda = {fmt(p.gamma * sol.x_co)})",
        f"x_co,lambda         {fmt(sol.x_co)}",
        f"x_co (lambda=inf)   {fmt(cf.threshold_co_unconstrained(p))}",
    ]
    if sol.x_ca is not None:
        lines.append(f"x_ca,lambda         {fmt(sol.x_ca)}")
    if sol.z is not None:
        lines.append(f"z                   {fmt(sol.z)}")
    lines += [
        f"x                   {fmt(x)}",
        f"v_ca_lambda(x)      {fmt(sol.value(x))}",
        f"v_ca(x)             {fmt(cf.value_ca_unconstrained(p, x))}",
        f"firm strategy       {sol.firm_strategy}",
        f"holder strategy     {sol.holder_strategy}",
    ]
    print("\n".join(lines), file=out)
    return EXIT_OK


def curve_rows(cfg: RunConfig) -> list:
    p = cfg.model
    xs = cfg.x_grid()
    tag = classify_regime(p).tag.value
    v = cf.solve_game(p).value(xs)
    vu = cf.value_ca_unconstrained(p, xs)
    vco = cf.value_co(p, xs)
    return [(fmt(a), fmt(b), fmt(c), fmt(d), tag) for a, b, c, d in zip(xs, v, vu, vco)]


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(path: str, text: str, mode: str = "w") -> None:
    with open(path, mode, encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_curve(cfg: RunConfig, path: str | None, out) -> int:
    text = _csv_text(CURVE_HEADER, curve_rows(cfg))
    if path is None:
        out.write(text)
    else:
        _write(path, text)
        print(f"wrote {len(cfg.x_grid())} rows to {path}", file=out)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, firm_spec, holder_spec, path: str | None, modified: bool, out) -> int:
    p = cfg.model
    sol = cf.solve_game(p)
    firm = parse_strategy(firm_spec, "firm") if firm_spec else sol.firm_strategy
    holder = parse_strategy(holder_spec, "holder") if holder_spec else sol.holder_strategy
    res = estimate_J(p, cfg.x, firm, holder, modified=modified, n_paths=cfg.paths, seed=cfg.seed)
    label = "J~" if modified else "J"
    print(f"{label}(firm={firm}, holder={holder}) at x={fmt(cfg.x)}", file=out)
    print(f"mean     {fmt(res.mean)}\nstderr   {fmt(res.stderr)}\nn_paths  {res.n_paths}\nseed     {res.seed}", file=out)
    if res.n_truncated:
        print(f"truncated paths {res.n_truncated}", file=out)
    if path is not None:
        row = (fmt(cfg.x), str(firm), str(holder), int(modified), fmt(res.mean), fmt(res.stderr), res.n_paths, res.seed)
        new = not os.path.exists(path) or os.path.getsize(path) == 0
        text = _csv_text(SIMULATE_HEADER, [row]) if new else _csv_text(SIMULATE_HEADER, [row]).split("\n", 1)[1]
        _write(path, text, "a")
    return EXIT_OK


def _cases(cfg: RunConfig, explicit: bool) -> list:
    """(params, x0) pairs: the configured model, or the three toy regimes."""
    if explicit:
        return [(cfg.model, cfg.x if cfg.x is not None else 0.5)]
    return [(TOY.replace(K=K), cfg.x if cfg.x is not None else x0) for K, x0 in TOY_REGIMES]


def _suite_saddle(cfg, explicit, out) -> bool:
    ok = True
    for p, x0 in _cases(cfg, explicit):
        rep = V.saddle_battery(p, x0, n_paths=cfg.paths, seed=cfg.seed)
        print(rep.summary(), file=out)
        ok &= rep.passed
    return ok


def _suite_dpp(cfg, explicit, out) -> bool:
    if explicit:
        p, x0 = cfg.model, (cfg.x if cfg.x is not None else 0.5)
        which = [V.Player.Bondholder]
        if classify_regime(p).tag is RegimeTag.MidK:
            which.append(V.Player.Firm)
        jobs = [(p, w, x0) for w in which]
    else:
        xs = (0.1, 0.3, 0.5, 0.8, 1.2)
        jobs = [(TOY, V.Player.Bondholder, x) for x in xs] + [(TOY.replace(K=0.6), V.Player.Firm, x) for x in xs]
    ok = True
    for p, w, x in jobs:
        rep = V.dpp_check(p, x, w, n_paths=cfg.paths, seed=cfg.seed)
        print(rep.summary(), file=out)
        ok &= rep.passed
    return ok


def _suite_properties(cfg, explicit, out) -> bool:
    rep = V.property_sweep(1000)
    print(rep.summary(), file=out)
    return rep.passed


def _suite_oracle(cfg, explicit, out) -> bool:
    ok = True
    for p, _ in _cases(cfg, explicit):
        rep = V.oracle_check(p)
        print(rep.summary() + ("  PASS" if rep.passed() else "  FAIL"), file=out)
        ok &= rep.passed()
    return ok


def _suite_examples(cfg, explicit, out) -> bool:
    up, lo = V.order_game()
    ok1 = (up, lo) == (1.0, 0.0)
    print(f"Order game  grids {V.ORDER_GAME_GRIDS[0]} / {V.ORDER_GAME_GRIDS[1]}: "
          f"upper={up:g} lower={lo:g}  (expected upper=1 lower=0)  {'PASS' if ok1 else 'FAIL'}", file=out)
    up4, lo4 = V.valued_game()
    ok4 = up4 == lo4 == 1.0
    print(f"Valued game  grid {V.VALUED_GAME_GRID}: upper={up4:g} lower={lo4:g} value={up4:g}"
          f"  {'PASS' if ok4 else 'FAIL'}", file=out)
    return ok1 and ok4


SUITES = {
    "saddle": _suite_saddle,
    "dpp": _suite_dpp,
    "properties": _suite_properties,
    "oracle": _suite_oracle,
    "examples": _suite_examples,
}


def cmd_verify(cfg: RunConfig, suite: str, explicit: bool, out) -> int:
    ok = SUITES[suite](cfg, explicit, out)
    print(f"verify {suite}: {'PASS' if ok else 'FAIL'}", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def ladder_rows(rep: V.AsymptoticsReport) -> list:
    return [(fmt(r.lam), fmt(r.x_co), fmt(r.x_ca), fmt(max(r.value_gaps))) for r in rep.rungs]


def cmd_asymptotics(cfg: RunConfig, path: str | None, out) -> int:
    rep = V.asymptotics_check(cfg.model, cfg.lambda_ladder)
    text = _csv_text(LADDER_HEADER, ladder_rows(rep))
    if path is None:
        out.write(text)
    else:
        _write(path, text)
    print(rep.summary(), file=out)
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------- argument parsing

def _ladder(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ccbond", description="Callable convertible bond with Poisson-constrained stopping.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="key = value file (r, q, sigma, lambda, c, gamma, K, x); default: toy parameters")
        return sp

    sp = common(sub.add_parser("price", help="regime, thresholds, value and saddle strategies at x"))
    sp.add_argument("--x", type=float)

    sp = common(sub.add_parser("curve", help="CSV of value curves on the default x grid"))
    sp.add_argument("--out", help="output CSV (stdout if omitted)")

    sp = common(sub.add_parser("simulate", help="Monte Carlo estimate of J for given strategies"))
    sp.add_argument("--x", type=float)
    sp.add_argument("--paths", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--firm", help="threshold:<y> | arrival:<k> | never (default: saddle strategy)")
    sp.add_argument("--holder", help="threshold:<y> | arrival:<k> | never (default: saddle strategy)")
    sp.add_argument("--modified", action="store_true", help="estimate J~ (call pays max(gamma X, K))")
    sp.add_argument("--out", help="append one CSV row to this file")

    sp = common(sub.add_parser("verify", help="run a verification suite"))
    sp.add_argument("--suite", required=True, choices=sorted(SUITES))
    sp.add_argument("--x", type=float)
    sp.add_argument("--paths", type=int)
    sp.add_argument("--seed", type=int)

    sp = common(sub.add_parser("asymptotics", help="lambda ladder against the unconstrained limit"))
    sp.add_argument("--lambdas", type=_ladder, help="comma list, default 1,4,16,64,256,1024")
    sp.add_argument("--out", help="output CSV (stdout if omitted)")
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "price":
            cfg = _run_config(args, x_required=True)
            return cmd_price(cfg, out)
        if args.command == "curve":
            return cmd_curve(_run_config(args), args.out, out)
        if args.command == "simulate":
            cfg = _run_config(args, x_required=True)
            return cmd_simulate(cfg, args.firm, args.holder, args.out, args.modified, out)
        if args.command == "verify":
            cfg = _run_config(args)
            return cmd_verify(cfg, args.suite, args.config is not None, out)
        cfg = _run_config(args)
        return cmd_asymptotics(cfg, args.out, out)
    except (InputError, ParameterError, StrategyParseError, NonMonotoneLadder) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CCBondError as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
