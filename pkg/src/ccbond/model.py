"""Model parameters, characteristic roots of the killed generator, regime tags.

The stock follows a GBM with rate ``r``, dividend yield ``q`` and volatility
``sigma``; both players may only stop at arrival times of an independent
Poisson process with intensity ``lam``. The power solutions ``x**z`` of

    0.5 sigma^2 x^2 f'' + (r - q) x f' - (r + lam) f = 0

have exponents ``z`` solving ``Q_lam(z) = 0``; those roots drive every closed
form in :mod:`ccbond.closed_form`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import (
    BoundViolated,
    NegativeCouponError,
    NonFiniteError,
    NonPositiveError,
    ParameterError,
)

_POSITIVE_FIELDS = ("r", "q", "sigma", "lam", "gamma", "K")
# accepted spellings in raw records (config files say "lambda")
_ALIASES = {"lambda": "lam", "lambda_": "lam", "k": "K"}


@dataclass(frozen=True)
class ModelParams:
    r: float
    q: float
    sigma: float
    lam: float
    c: float
    gamma: float
    K: float

    def __post_init__(self):
        for name in ("r", "q", "sigma", "lam", "c", "gamma", "K"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ParameterError(name, f"{name} is not a number: {value!r}") from None
            if not math.isfinite(value):
                raise NonFiniteError(name)
            object.__setattr__(self, name, value)
        for name in _POSITIVE_FIELDS:
            if getattr(self, name) <= 0.0:
                raise NonPositiveError(name)
        if self.c < 0.0:
            raise NegativeCouponError()

    @property
    def perpetuity(self) -> float:
        """Value c/r of the coupon stream if nobody ever stops."""
        return self.c / self.r

    def replace(self, **changes) -> "ModelParams":
        values = {n: getattr(self, n) for n in ("r", "q", "sigma", "lam", "c", "gamma", "K")}
        values.update(changes)
        return ModelParams(**values)


def validate_params(raw: Mapping[str, object]) -> ModelParams:
    """Build a :class:`ModelParams` from a loose mapping.

    Keys may use ``lambda`` for the intensity. Missing keys raise
    :class:`ParameterError`; nothing is clamped or defaulted.
    """
    values = {}
    for key, value in raw.items():
        name = _ALIASES.get(key, key)
        values[name] = value
    missing = [n for n in ("r", "q", "sigma", "lam", "c", "gamma", "K") if n not in values]
    if missing:
        raise ParameterError(missing[0], f"missing parameter: {missing[0]}")
    return ModelParams(**{n: values[n] for n in ("r", "q", "sigma", "lam", "c", "gamma", "K")})


def q_lambda(p: ModelParams, lam: float, z):
    """Characteristic polynomial 0.5 sigma^2 z^2 + (r - q - 0.5 sigma^2) z - (r + lam)."""
    s2 = p.sigma * p.sigma
    return 0.5 * s2 * z * z + (p.r - p.q - 0.5 * s2) * z - (p.r + lam)


@dataclass(frozen=True)
class RootPair:
    alpha: float
    beta: float
    lambda_used: float


def char_roots(p: ModelParams, lam: float) -> RootPair:
    """Roots alpha > 1 and beta < 0 of ``q_lambda(p, lam, .)``.

    The larger-magnitude root comes from the quadratic formula with the sign
    chosen to avoid cancellation; the other from the product of roots.
    """
    if lam < 0 or not math.isfinite(lam):
        raise ParameterError("lambda", f"intensity must be finite and >= 0, got {lam}")
    a = 0.5 * p.sigma * p.sigma
    b = p.r - p.q - a
    c0 = -(p.r + lam)
    disc = math.sqrt(b * b - 4.0 * a * c0)
    big = -0.5 * (b + math.copysign(disc, b))
    z1, z2 = big / a, c0 / big
    return RootPair(alpha=max(z1, z2), beta=min(z1, z2), lambda_used=float(lam))


@dataclass
class BoundReport:
    lam: float
    roots: RootPair
    # name -> (lower, value, upper); the margin is min(value - lower, upper - value)
    checks: dict = field(default_factory=dict)

    def margin(self, name: str) -> float:
        lo, value, hi = self.checks[name]
        return min(value - lo, hi - value)

    @property
    def ok(self) -> bool:
        return all(self.margin(n) > 0.0 for n in self.checks)

    def failures(self, tol: float = 0.0) -> list:
        return [n for n in self.checks if not self.margin(n) > tol]


def root_bound_report(p: ModelParams, lam: float, roots: RootPair | None = None,
                      roots0: RootPair | None = None) -> BoundReport:
    """Evaluate the root bounds without raising. ``roots`` may be injected for negative controls."""
    rl = roots if roots is not None else char_roots(p, lam)
    r0 = roots0 if roots0 is not None else char_roots(p, 0.0)
    rep = BoundReport(lam=lam, roots=rl)
    inf = math.inf
    if p.q < p.r:
        cap = (lam + p.r) / (p.r - p.q)
        rep.checks["alpha_lambda_in_(1,(lam+r)/(r-q))"] = (1.0, rl.alpha, cap)
        rep.checks["alpha_in_(1,r/(r-q))"] = (1.0, r0.alpha, p.r / (p.r - p.q))
    elif p.q > p.r:
        floor = (lam + p.r) / (p.r - p.q)
        rep.checks["beta_lambda_in_((lam+r)/(r-q),0)"] = (floor, rl.beta, 0.0)
    rep.checks["r*alpha_lambda/(lam+r)<alpha"] = (-inf, p.r * rl.alpha / (lam + p.r), r0.alpha)
    return rep


def check_root_bounds(p: ModelParams, lam: float) -> BoundReport:
    """Root bounds as a report; raises :class:`BoundViolated` if any fails.

    The r != q clauses are skipped when r == q.
    """
    rep = root_bound_report(p, lam)
    bad = rep.failures()
    if bad:
        raise BoundViolated(bad[0])
    return rep


class RegimeTag(enum.Enum):
    LowK = "LowK"
    MidK = "MidK"
    HighK = "HighK"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    # (c/r, gamma * x_co_lambda)
    boundaries: tuple

    def __str__(self):
        return self.tag.value


def classify_regime(p: ModelParams) -> Regime:
    """LowK iff K <= c/r; HighK iff K >= gamma x*_co,lam; MidK strictly between."""
    from .closed_form import threshold_co

    low = p.c / p.r
    high = p.gamma * threshold_co(p)
    if p.K <= low:
        tag = RegimeTag.LowK
    elif p.K >= high:
        tag = RegimeTag.HighK
    else:
        tag = RegimeTag.MidK
    return Regime(tag=tag, boundaries=(low, high))
