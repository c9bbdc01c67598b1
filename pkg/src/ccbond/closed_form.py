"""Closed-form thresholds and value functions.

Three value functions are built here:

* ``v_co``: the bondholder's conversion problem without a call feature,
  stopping at the first arrival with X >= x*_co,lam;
* ``v_f``: the firm's call problem (moderate K), where the bondholder may
  only pre-empt a call and conversion is forced once X >= K/gamma;
* ``v_ca``: the game value, which equals one of the above or the low-K
  formula depending on the surrender-price regime.

Piecewise branches are evaluated in log-price, ``exp(e * log(x / ref))``, so
large exponents at high intensity do not overflow for moderate ratios.
Branch exponents mix the lam = 0 root (first branch, where nothing is
killed) with the lam roots exactly as the smooth-fit system dictates.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InternalBound, NonPositiveXError, RegimeMismatch, SmoothFitResidual
from .model import ModelParams, Regime, RegimeTag, RootPair, char_roots, classify_regime
from .strategies import StoppingStrategy

SMOOTH_FIT_TOL = 1e-10


def _pow_ratio(x, ref, e):
    return np.exp(e * np.log(x / ref))


def _as_positive(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise NonPositiveXError()
    return arr


def _unwrap(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


@dataclass(frozen=True)
class PiecewiseCurve:
    """Piecewise function of the stock price.

    Branch ``i`` applies on ``[cuts[i-1], cuts[i])`` with implicit outer cuts
    0 and infinity. Branches remain callable individually (outside their
    own interval too), which is what the smooth-fit checks use.
    """

    cuts: tuple
    branches: tuple

    def __call__(self, x):
        arr = _as_positive(x)
        flat = np.atleast_1d(arr).astype(float)
        out = np.empty_like(flat)
        edges = (0.0,) + tuple(self.cuts) + (math.inf,)
        for i, f in enumerate(self.branches):
            mask = (flat >= edges[i]) & (flat < edges[i + 1])
            if mask.any():
                out[mask] = f(flat[mask])
        return _unwrap(out.reshape(arr.shape), x)

    def branch(self, i: int, x):
        arr = np.asarray(x, dtype=float)
        return _unwrap(self.branches[i](np.atleast_1d(arr)).reshape(arr.shape), x)


@functools.lru_cache(maxsize=4096)
def _roots(p: ModelParams) -> tuple:
    return char_roots(p, 0.0), char_roots(p, p.lam)


def threshold_co(p: ModelParams) -> float:
    """Bondholder conversion threshold x*_co,lam under the Poisson constraint."""
    r0, rl = _roots(p)
    return threshold_co_from_roots(p, r0.alpha, rl.beta)


def threshold_co_from_roots(p: ModelParams, alpha: float, bl: float) -> float:
    """x*_co,lam from explicit roots (alpha at lam = 0, beta_lam); lets callers inject roots."""
    lam, r, q = p.lam, p.r, p.q
    denom = alpha * (lam + q) - lam - bl * q
    if not denom > 0:
        raise InternalBound(f"x_co denominator must be positive, got {denom}")
    return p.c * (lam + q) * (alpha * (lam + r) - bl * r) / (p.gamma * r * (lam + r) * denom)


def threshold_co_unconstrained(p: ModelParams) -> float:
    alpha = _roots(p)[0].alpha
    return alpha / (alpha - 1.0) * p.c / (p.gamma * p.r)


@dataclass(frozen=True)
class BondholderSolution:
    x_co: float
    curve: PiecewiseCurve
    roots: RootPair
    roots0: RootPair

    def __call__(self, x):
        return self.curve(x)


@functools.lru_cache(maxsize=4096)
def bondholder_solution(p: ModelParams) -> BondholderSolution:
    r0, rl = _roots(p)
    xs = threshold_co(p)
    cr = p.c / p.r
    g, lam, q = p.gamma, p.lam, p.q
    alpha, bl = r0.alpha, rl.beta
    if xs == 0.0:
        # c = 0: conversion is optimal everywhere, only the linear part survives
        def low(x):
            return np.full_like(x, cr)

        def high(x):
            return lam * g * x / (lam + q)
    else:
        k_low = g * xs - cr
        k_high = q * g * xs / (lam + q) - p.c / (lam + p.r)

        def low(x):
            return cr + k_low * _pow_ratio(x, xs, alpha)

        def high(x):
            return p.c / (lam + p.r) + lam * g * x / (lam + q) + k_high * _pow_ratio(x, xs, bl)

    return BondholderSolution(xs, PiecewiseCurve((xs,), (low, high)), rl, r0)


def value_co(p: ModelParams, x):
    """Bondholder value v_co^lam(x) (no call feature)."""
    return bondholder_solution(p).curve(x)


@dataclass(frozen=True)
class FirmSolution:
    x_ca: float
    theta: float
    a_coef: float
    b_coef: float
    c_coef: float
    curve: PiecewiseCurve
    residuals: tuple = field(default=())

    def __call__(self, x):
        return self.curve(x)


def smooth_fit_residuals(p: ModelParams, a, b, c_coef, theta) -> tuple:
    """Scaled residuals of the four value-matching/smooth-fit equations at x*_ca and K/gamma.

    Each residual is divided by the largest magnitude term of its equation.
    The second and fourth equations are multiplied through by x*_ca and K/gamma.
    """
    r0, rl = _roots(p)
    alpha, al, bl = r0.alpha, rl.alpha, rl.beta
    lam, r, q, K, c = p.lam, p.r, p.q, p.K, p.c
    ta, tb = theta ** al, theta ** bl
    eqs = (
        (K, -(c + lam * K) / (lam + r), -a, -b),
        ((K - c / r) * alpha, -a * al, -b * bl),
        ((c + lam * K) / (lam + r), a * ta, b * tb, -c / (lam + r), -lam * K / (lam + q), -c_coef),
        (a * al * ta, b * bl * tb, -lam * K / (lam + q), -c_coef * bl),
    )
    return tuple(abs(math.fsum(t)) / max(max(abs(v) for v in t), 1e-300) for t in eqs)


@functools.lru_cache(maxsize=4096)
def firm_coefficients(p: ModelParams) -> FirmSolution:
    """Coefficients A, B, C, the call threshold x*_ca,lam and the curve v_f^lam (MidK only)."""
    regime = classify_regime(p)
    if regime.tag is not RegimeTag.MidK:
        raise RegimeMismatch(f"firm problem needs c/r < K < gamma*x_co (got {regime.tag.value})")
    r0, rl = _roots(p)
    alpha, al, bl = r0.alpha, rl.alpha, rl.beta
    lam, r, q, K, c, g = p.lam, p.r, p.q, p.K, p.c, p.gamma
    excess = K - c / r
    a = excess / (al - bl) * (alpha - r * bl / (lam + r))
    b = excess / (al - bl) * (r * al / (lam + r) - alpha)
    bracket = (1.0 / excess) * (lam + r) / (alpha * (lam + r) - r * bl) \
        * lam * K / (lam + q) * (1.0 - (r - q) * bl / (lam + r))
    x_ca = K / g * bracket ** (-1.0 / al)
    theta = K / (g * x_ca)
    c_coef = a * al / bl * theta ** al + b * theta ** bl - lam * K / (lam + q) / bl

    res = smooth_fit_residuals(p, a, b, c_coef, theta)
    if max(res) > SMOOTH_FIT_TOL:
        raise SmoothFitResidual(f"smooth-fit residuals {res} exceed {SMOOTH_FIT_TOL}")

    cr = c / r
    kb = K / g

    def low(x):
        return cr + excess * _pow_ratio(x, x_ca, alpha)

    def mid(x):
        return (c + lam * K) / (lam + r) + a * _pow_ratio(x, x_ca, al) + b * _pow_ratio(x, x_ca, bl)

    def high(x):
        return c / (lam + r) + lam * g * x / (lam + q) + c_coef * _pow_ratio(x, kb, bl)

    curve = PiecewiseCurve((x_ca, kb), (low, mid, high))
    return FirmSolution(x_ca, theta, a, b, c_coef, curve, res)


def value_f(p: ModelParams, x):
    """Firm problem value v_f^lam(x) (MidK only)."""
    return firm_coefficients(p).curve(x)


def z_level(p: ModelParams) -> float:
    """Level z >= K/gamma with v_co(z) = K (HighK only); bracket by doubling then bisect."""
    if classify_regime(p).tag is not RegimeTag.HighK:
        raise RegimeMismatch("z is defined only when K >= gamma*x_co")
    v = bondholder_solution(p).curve
    K = p.K
    lo = K / p.gamma
    if v(lo) - K >= 0.0:
        return lo
    hi = 2.0 * lo
    while v(hi) - K < 0.0:
        lo, hi = hi, 2.0 * hi
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if v(mid) - K < 0.0:
            lo = mid
        else:
            hi = mid
    z = hi if abs(v(hi) - K) <= abs(v(lo) - K) else lo
    if abs(v(z) - K) > 1e-12 * K:
        raise InternalBound(f"bisection for z stalled: |v_co(z) - K| = {abs(v(z) - K):.3e}")
    return z


@dataclass(frozen=True)
class GameSolution:
    """Game value and the saddle-point strategies for one parameter set."""

    regime: Regime
    value: PiecewiseCurve
    firm_strategy: StoppingStrategy
    holder_strategy: StoppingStrategy
    x_co: float
    x_ca: float | None = None
    z: float | None = None
    # LowK: {"A", "B"}; MidK: {"A", "B", "C", "theta"}
    coefficients: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.value(x)


def low_k_coefficients(p: ModelParams) -> tuple:
    """A > 0 and B > 0 of the low-K game value."""
    rl = _roots(p)[1]
    al, bl = rl.alpha, rl.beta
    lam, r, q, K = p.lam, p.r, p.q, p.K
    scale = lam * K / ((lam + q) * (lam + r)) / (al - bl)
    return ((lam + r) - bl * (r - q)) * scale, ((lam + r) - al * (r - q)) * scale


@functools.lru_cache(maxsize=4096)
def solve_game(p: ModelParams) -> GameSolution:
    regime = classify_regime(p)
    hold = bondholder_solution(p)
    g, K = p.gamma, p.K
    if regime.tag is RegimeTag.LowK:
        rl = hold.roots
        a, b = low_k_coefficients(p)
        kb = K / g
        lam, r, q, c = p.lam, p.r, p.q, p.c

        def low(x):
            return (c + lam * K) / (lam + r) + a * _pow_ratio(x, kb, rl.alpha)

        def high(x):
            return c / (lam + r) + lam * g * x / (lam + q) + b * _pow_ratio(x, kb, rl.beta)

        return GameSolution(
            regime, PiecewiseCurve((kb,), (low, high)),
            StoppingStrategy.arrival(1, "firm"), StoppingStrategy.threshold(kb, "holder"),
            x_co=hold.x_co, coefficients={"A": a, "B": b},
        )
    if regime.tag is RegimeTag.MidK:
        firm = firm_coefficients(p)
        return GameSolution(
            regime, firm.curve,
            StoppingStrategy.threshold(firm.x_ca, "firm"), StoppingStrategy.threshold(K / g, "holder"),
            x_co=hold.x_co, x_ca=firm.x_ca,
            coefficients={"A": firm.a_coef, "B": firm.b_coef, "C": firm.c_coef, "theta": firm.theta},
        )
    z = z_level(p)
    return GameSolution(
        regime, hold.curve,
        StoppingStrategy.threshold(z, "firm"), StoppingStrategy.threshold(hold.x_co, "holder"),
        x_co=hold.x_co, z=z,
    )


def value_ca(p: ModelParams, x):
    """Game value v_ca^lam(x) and the saddle strategies ``(firm, holder)``."""
    sol = solve_game(p)
    return sol.value(x), (sol.firm_strategy, sol.holder_strategy)


def value_ca_unconstrained(p: ModelParams, x):
    """Game value when both players may stop at any time (no Poisson constraint)."""
    arr = _as_positive(x)
    alpha = _roots(p)[0].alpha
    g, K, cr = p.gamma, p.K, p.c / p.r
    xs = threshold_co_unconstrained(p)
    if K <= cr:
        out = np.maximum(K, g * arr)
    elif K < g * xs:
        kb = K / g
        with np.errstate(over="ignore"):
            out = np.where(arr < kb, cr + (K - cr) * _pow_ratio(arr, kb, alpha), g * arr)
    else:
        with np.errstate(over="ignore"):
            out = np.where(arr < xs, cr + (g * xs - cr) * _pow_ratio(arr, xs, alpha), g * arr)
    return _unwrap(np.asarray(out, dtype=float), x)


def forced_conversion_boundary(p: ModelParams, x):
    """Expected discounted payoff at the trigger time under forced conversion."""
    arr = _as_positive(x)
    out = p.c / (p.r + p.lam) + p.lam / (p.q + p.lam) * p.gamma * arr
    return _unwrap(np.asarray(out, dtype=float), x)


def regime_boundaries(p: ModelParams) -> tuple:
    return classify_regime(p).boundaries

