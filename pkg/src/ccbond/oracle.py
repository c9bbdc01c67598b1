"""Finite-difference solver for the three HJB equations.

Works in log-price on a uniform grid, where the killed generator has
constant coefficients. Each semilinear equation

    L_lam V + c + lam * g(x, V) = 0

is solved by fixed-point iteration: freeze ``g`` at the previous iterate and
solve the resulting tridiagonal system. The map is a sup-norm contraction
with factor lam / (lam + r). Dirichlet data come from the limits of the value
functions: the perpetuity at the left end and the linear asymptote
c/(lam + r) + lam gamma x/(lam + q) at the right end, which is placed far
enough out that the decaying power term is below 1e-8 of the asymptote.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .closed_form import threshold_co
from .errors import MultipleCrossings, NoConvergence, NoCrossing, RegimeMismatch
from .model import ModelParams, RegimeTag, char_roots, classify_regime


@dataclass(frozen=True)
class GridConfig:
    n_nodes: int = 4000
    x_lo: float | None = None
    x_hi: float | None = None
    tol: float = 1e-10
    max_iter: int = 100_000
    linear_tol: float = 1e-8


@dataclass
class GridCurve:
    nodes: np.ndarray
    values: np.ndarray
    residual: float
    iterations: int = 0
    linear_residual: float = 0.0
    boundary_report: dict = field(default_factory=dict)
    history: list = field(default_factory=list, repr=False)

    @property
    def interior(self) -> slice:
        return slice(1, len(self.nodes) - 1)


class Crossing(enum.Enum):
    CrossGammaX = "CrossGammaX"
    CrossK = "CrossK"


def default_bounds(p: ModelParams) -> tuple:
    kb = p.K / p.gamma
    left_ref = min(p.c / (p.gamma * p.r), kb) if p.c > 0 else kb
    right_ref = max(threshold_co(p), kb)
    beta = char_roots(p, p.lam).beta
    x_hi = max(10.0 * right_ref, right_ref * 1e-8 ** (1.0 / beta))
    return 1e-3 * left_ref, x_hi


def aligned_config(anchors, h: float, below: float = 8.0, above: float = 12.0, **kw) -> GridConfig:
    """Grid with log-spacing ``h`` that places every anchor exactly on a node.

    Halving ``h`` keeps all previous nodes, so the kinks of the solution sit at
    the same relative position in every refinement and the error ratio is clean.
    """
    logs = sorted(math.log(a) for a in anchors)
    for a, b in zip(logs, logs[1:]):
        m = (b - a) / h
        if abs(m - round(m)) > 1e-6:
            raise ValueError(f"anchors are not {h}-commensurate in log space")
    n_lo, n_hi = math.ceil(below / h), math.ceil(above / h)
    lo = logs[0] - n_lo * h
    hi = logs[-1] + n_hi * h
    return GridConfig(n_nodes=int(round((hi - lo) / h)) + 1, x_lo=math.exp(lo), x_hi=math.exp(hi), **kw)


def _grid(p: ModelParams, cfg: GridConfig) -> np.ndarray:
    lo, hi = default_bounds(p)
    lo = cfg.x_lo if cfg.x_lo is not None else lo
    hi = cfg.x_hi if cfg.x_hi is not None else hi
    if not 0 < lo < hi or cfg.n_nodes < 3:
        raise ValueError(f"bad grid: x_lo={lo}, x_hi={hi}, n_nodes={cfg.n_nodes}")
    return np.exp(np.linspace(math.log(lo), math.log(hi), cfg.n_nodes))


class _Operator:
    """Banded form of -L_lam on the interior nodes, Dirichlet at both ends."""

    def __init__(self, p: ModelParams, x: np.ndarray):
        h = math.log(x[1] / x[0])
        d2 = 0.5 * p.sigma ** 2 / h ** 2
        d1 = (p.r - p.q - 0.5 * p.sigma ** 2) / (2.0 * h)
        self.lower = -(d2 - d1)
        self.diag = 2.0 * d2 + p.r + p.lam
        self.upper = -(d2 + d1)
        m = len(x) - 2
        ab = np.zeros((3, m))
        ab[0, 1:] = self.upper
        ab[1, :] = self.diag
        ab[2, :-1] = self.lower
        self.ab = ab

    def rhs(self, source, left, right):
        b = np.array(source[1:-1], dtype=float)
        b[0] -= self.lower * left
        b[-1] -= self.upper * right
        return b

    def solve(self, source, left, right):
        inner = solve_banded((1, 1), self.ab, self.rhs(source, left, right))
        return np.concatenate(([left], inner, [right]))

    def residual(self, V, source):
        r = self.lower * V[:-2] + self.diag * V[1:-1] + self.upper * V[2:] - source[1:-1]
        return float(np.max(np.abs(r)) / max(np.max(np.abs(source[1:-1])), 1e-300))


def _right_bc(p: ModelParams, x_hi: float) -> float:
    return p.c / (p.lam + p.r) + p.lam * p.gamma * x_hi / (p.lam + p.q)


def solve_linear(p: ModelParams, x: np.ndarray, source: np.ndarray, left: float, right: float) -> np.ndarray:
    """Solve L_lam V + source = 0 on the grid ``x`` with Dirichlet values ``left``/``right``."""
    return _Operator(p, x).solve(source, left, right)


def _fixed_point(p, x, nonlin, left, cfg: GridConfig, keep_history=False) -> GridCurve:
    op = _Operator(p, x)
    right = _right_bc(p, x[-1])
    V = np.full_like(x, p.c / (p.lam + p.r))
    V[0], V[-1] = left, right
    history = [V.copy()] if keep_history else []
    change = math.inf
    for it in range(1, cfg.max_iter + 1):
        source = p.c + p.lam * nonlin(V)
        new = op.solve(source, left, right)
        change = float(np.max(np.abs(new - V)))
        V = new
        if keep_history:
            history.append(V.copy())
        if change <= cfg.tol:
            lin = op.residual(V, p.c + p.lam * nonlin(V))
            return GridCurve(x, V, change, it, lin, history=history)
    raise NoConvergence(cfg.max_iter, change)


def solve_hjb_co(p: ModelParams, cfg: GridConfig = GridConfig(), keep_history: bool = False) -> GridCurve:
    """Bondholder equation  L_lam V + c + lam max(V, gamma x) = 0."""
    x = _grid(p, cfg)
    gx = p.gamma * x
    curve = _fixed_point(p, x, lambda V: np.maximum(V, gx), p.c / p.r, cfg, keep_history)
    curve.boundary_report["x_co"] = detect_free_boundary(curve, Crossing.CrossGammaX, p) if p.c > 0 else 0.0
    return curve


def solve_hjb_f(p: ModelParams, cfg: GridConfig = GridConfig(), keep_history: bool = False) -> GridCurve:
    """Firm equation  L_lam V + c + lam (min(V, K) 1{x < K/gamma} + gamma x 1{x >= K/gamma}) = 0."""
    if classify_regime(p).tag is not RegimeTag.MidK:
        raise RegimeMismatch("firm equation is posed for c/r < K < gamma*x_co")
    x = _grid(p, cfg)
    forced = x >= p.K / p.gamma
    gx = p.gamma * x

    def nonlin(V):
        return np.where(forced, gx, np.minimum(V, p.K))

    curve = _fixed_point(p, x, nonlin, p.c / p.r, cfg, keep_history)
    curve.boundary_report["x_ca"] = detect_free_boundary(curve, Crossing.CrossK, p)
    return curve


def solve_hjb_ca_low(p: ModelParams, cfg: GridConfig = GridConfig()) -> GridCurve:
    """Low-K game equation  L_lam V + c + lam max(gamma x, K) = 0 (linear in V)."""
    if classify_regime(p).tag is not RegimeTag.LowK:
        raise RegimeMismatch("low-K equation is posed for K <= c/r")
    x = _grid(p, cfg)
    op = _Operator(p, x)
    source = p.c + p.lam * np.maximum(p.gamma * x, p.K)
    V = op.solve(source, (p.c + p.lam * p.K) / (p.lam + p.r), _right_bc(p, x[-1]))
    return GridCurve(x, V, 0.0, 1, op.residual(V, source))


def detect_free_boundary(curve: GridCurve, condition: Crossing, p: ModelParams) -> float:
    """Locate the single interior sign change of V - gamma x or V - K by linear interpolation."""
    condition = Crossing(condition)
    x = curve.nodes[curve.interior]
    v = curve.values[curve.interior]
    d = v - (p.gamma * x if condition is Crossing.CrossGammaX else p.K)
    sign = np.sign(d)
    # zeros inherit the sign on their left so a touch is not counted twice
    for i in range(1, len(sign)):
        if sign[i] == 0:
            sign[i] = sign[i - 1]
    flips = np.nonzero(sign[1:] * sign[:-1] < 0)[0]
    if flips.size == 0:
        raise NoCrossing(f"{condition.value}: no sign change on the grid interior")
    if flips.size > 1:
        raise MultipleCrossings(f"{condition.value}: {flips.size} sign changes")
    i = flips[0]
    w = d[i] / (d[i] - d[i + 1])
    return float(x[i] + w * (x[i + 1] - x[i]))


def relative_gap(curve: GridCurve, exact) -> float:
    """Sup-norm relative gap between oracle values and ``exact`` on interior nodes."""
    x = curve.nodes[curve.interior]
    ref = np.asarray(exact(x))
    return float(np.max(np.abs(curve.values[curve.interior] - ref) / np.abs(ref)))
