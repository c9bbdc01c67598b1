"""Monte Carlo for the Poisson-constrained game, plus a finite minimax evaluator.

The stock is only ever needed at Poisson arrival times, so paths are
generated arrival by arrival with exact lognormal transitions over
exponential gaps; there is no time-discretisation bias.

A path is abandoned once the discounted remainder of the contract is
negligible, ``exp(-r T_n) (c/r + K + gamma X_{T_n}) <= tol * scale``. Since
``exp(-r t) X_t`` is a supermartingale (q > 0), this bounds the bias from
treating any later stop as "never stops" by ``tol * scale``. This matters
because threshold rules need not stop almost surely: with negative log-drift
a level above the start is missed with positive probability, and such paths
simply earn the perpetuity c/r.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyGrid, NonPositiveXError, ParameterError, Truncated
from .model import ModelParams
from .rng import arrival_draws
from .strategies import StoppingStrategy, StrategyKind

N_MAX = 100_000
DISCOUNT_TOL = 1e-10
MAX_TRUNCATED_FRACTION = 1e-3
BLOCK_SIZE = 1 << 15


def _advance(p: ModelParams, T, logx, gap, z):
    # one arrival: exact GBM transition over an exponential gap
    T = T + gap
    logx = logx + (p.r - p.q - 0.5 * p.sigma * p.sigma) * gap + p.sigma * np.sqrt(gap) * z
    return T, logx


def _negligible(p: ModelParams, T, X, scale):
    return np.exp(-p.r * T) * (p.c / p.r + p.K + p.gamma * X) <= DISCOUNT_TOL * scale


def _scale(p: ModelParams, x0: float) -> float:
    return p.c / p.r + p.K + p.gamma * x0


@dataclass
class ArrivalPath:
    """One path observed at arrival times, extended on demand.

    ``times[n-1]`` and ``prices[n-1]`` hold T_n and X_{T_n}. Values depend only
    on ``(seed, path_index)``.
    """

    params: ModelParams
    x0: float
    seed: int
    path_index: int
    n_max: int = N_MAX
    times: list = field(default_factory=list)
    prices: list = field(default_factory=list)
    _logx: float = field(default=math.nan, repr=False)

    @property
    def seed_info(self) -> tuple:
        return (self.seed, self.path_index)

    def extend_to(self, n: int) -> None:
        if n > self.n_max:
            raise Truncated(self.n_max)
        idx = np.array([self.path_index], dtype=np.uint64)
        T = np.array([self.times[-1] if self.times else 0.0])
        logx = np.array([self._logx if self.times else math.log(self.x0)])
        for step in range(len(self.times) + 1, n + 1):
            gap, z = arrival_draws(self.seed, idx, np.array([step], dtype=np.uint64), self.params.lam)
            T, logx = _advance(self.params, T, logx, gap, z)
            self.times.append(float(T[0]))
            self.prices.append(float(np.exp(logx)[0]))
            self._logx = float(logx[0])

    def arrival(self, n: int) -> tuple:
        """``(T_n, X_{T_n})`` for n >= 1."""
        if n < 1:
            raise ValueError("arrivals are numbered from 1")
        if n > len(self.times):
            self.extend_to(n)
        return self.times[n - 1], self.prices[n - 1]


def sample_path(p: ModelParams, x0: float, seed: int, path_index: int, n_max: int = N_MAX) -> ArrivalPath:
    if not x0 > 0:
        raise NonPositiveXError("x0")
    return ArrivalPath(p, float(x0), int(seed), int(path_index), n_max)


def _stops_at(strategy: StoppingStrategy, n: int, X):
    if strategy.kind is StrategyKind.THRESHOLD:
        return X >= strategy.level
    if strategy.kind is StrategyKind.ARRIVAL:
        return np.full(np.shape(X), n == strategy.k)
    return np.zeros(np.shape(X), dtype=bool)


def _terminal(p: ModelParams, s_t, s_x, t_t, t_x, modified: bool):
    """Discounted payoff given firm stop (s_t, s_x) and holder stop (t_t, t_x); inf means never."""
    s_t, s_x, t_t, t_x = (np.asarray(a, dtype=float) for a in (s_t, s_x, t_t, t_x))
    end = np.minimum(s_t, t_t)
    pay = -(p.c / p.r) * np.expm1(-p.r * end)
    holder = np.isfinite(t_t) & (t_t <= s_t)
    firm = s_t < t_t
    with np.errstate(invalid="ignore"):
        pay = pay + np.where(holder, np.exp(-p.r * t_t) * p.gamma * t_x, 0.0)
        call = np.maximum(p.gamma * s_x, p.K) if modified else np.full_like(s_x, p.K)
        pay = pay + np.where(firm, np.exp(-p.r * s_t) * call, 0.0)
    return pay


def evaluate_payoff(p: ModelParams, path: ArrivalPath, firm: StoppingStrategy,
                    holder: StoppingStrategy, modified: bool = False) -> float:
    """Discounted bond payoff on one path; ties go to the bondholder.

    With ``modified`` the firm's call pays ``max(gamma X, K)`` (the holder may
    pre-empt a call by converting).
    """
    scale = _scale(p, path.x0)
    n = 0
    while True:
        n += 1
        T, X = path.arrival(n)
        hold = bool(_stops_at(holder, n, X))
        call = bool(_stops_at(firm, n, X))
        if hold or call:
            inf = math.inf
            return float(_terminal(p, T if call else inf, X, T if hold else inf, X, modified))
        if bool(_negligible(p, T, X, scale)):
            return p.c / p.r


@dataclass
class StopTable:
    """Realised stop time and price of each strategy on a common set of paths.

    ``times[i][j]`` is the stop time of ``strategies[i]`` on path j, ``inf``
    if it had not stopped when the path was abandoned.
    """

    params: ModelParams
    x0: float
    seed: int
    first_index: int
    strategies: tuple
    times: np.ndarray
    prices: np.ndarray
    stop_index: np.ndarray
    truncated: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.times.shape[1]

    def _row(self, s: StoppingStrategy) -> int:
        key = _key(s)
        for i, t in enumerate(self.strategies):
            if _key(t) == key:
                return i
        raise KeyError(f"strategy {s} was not simulated")

    def stop(self, s: StoppingStrategy) -> tuple:
        i = self._row(s)
        return self.times[i], self.prices[i]

    def index(self, s: StoppingStrategy) -> np.ndarray:
        """Arrival index N at which ``s`` stopped (0 if it never did)."""
        return self.stop_index[self._row(s)]

    def payoffs(self, firm: StoppingStrategy, holder: StoppingStrategy, modified: bool = False) -> np.ndarray:
        s_t, s_x = self.stop(firm)
        t_t, t_x = self.stop(holder)
        return _terminal(self.params, s_t, s_x, t_t, t_x, modified)


def _key(s: StoppingStrategy):
    return (s.kind, s.level if s.kind is StrategyKind.THRESHOLD else None, s.k)


def _unique(strategies: Sequence[StoppingStrategy]) -> tuple:
    seen, out = set(), []
    for s in strategies:
        if _key(s) not in seen:
            seen.add(_key(s))
            out.append(s)
    return tuple(out)


def _simulate_block(p: ModelParams, x0: float, seed: int, indices: np.ndarray,
                    strategies: tuple, n_max: int):
    m, k = len(indices), len(strategies)
    times = np.full((k, m), np.inf)
    prices = np.full((k, m), np.nan)
    stop_index = np.zeros((k, m), dtype=np.int64)
    truncated = np.zeros(m, dtype=bool)
    active = np.arange(m)
    T = np.zeros(m)
    logx = np.full(m, math.log(x0))
    scale = _scale(p, x0)
    n = 0
    while active.size:
        if n >= n_max:
            truncated[active] = True
            break
        n += 1
        gap, z = arrival_draws(seed, indices[active], np.full(active.size, n, dtype=np.uint64), p.lam)
        Ta, la = _advance(p, T[active], logx[active], gap, z)
        T[active], logx[active] = Ta, la
        X = np.exp(la)
        pending = np.zeros(active.size, dtype=bool)
        for i, s in enumerate(strategies):
            fresh = np.isinf(times[i, active])
            hit = fresh & _stops_at(s, n, X)
            if hit.any():
                cols = active[hit]
                times[i, cols] = Ta[hit]
                prices[i, cols] = X[hit]
                stop_index[i, cols] = n
            pending |= fresh & ~hit
        keep = pending & ~_negligible(p, Ta, X, scale)
        active = active[keep]
    return times, prices, stop_index, truncated


def simulate_stops(p: ModelParams, x0: float, strategies: Sequence[StoppingStrategy], n_paths: int,
                   seed: int, first_index: int = 0, workers: int = 1, n_max: int = N_MAX) -> StopTable:
    """Simulate ``n_paths`` paths once and record every strategy's stop on them."""
    if not x0 > 0:
        raise NonPositiveXError("x0")
    if n_paths < 1:
        raise ParameterError("paths", "n_paths must be >= 1")
    strategies = _unique(strategies)
    starts = list(range(0, n_paths, BLOCK_SIZE))

    def run(start):
        idx = np.arange(first_index + start, first_index + min(start + BLOCK_SIZE, n_paths), dtype=np.uint64)
        return _simulate_block(p, float(x0), seed, idx, strategies, n_max)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    times, prices, stop_index, truncated = (np.concatenate([b[i] for b in parts], axis=-1) for i in range(4))
    return StopTable(p, float(x0), int(seed), int(first_index), strategies,
                     times, prices, stop_index, truncated)


@dataclass(frozen=True)
class EstimatorResult:
    mean: float
    stderr: float
    n_paths: int
    seed: int
    n_truncated: int = 0

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.mean - target) <= k * self.stderr


def summarize(samples: np.ndarray, seed: int, n_truncated: int = 0) -> EstimatorResult:
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    mean = float(np.sum(samples) / n)
    stderr = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return EstimatorResult(mean, stderr, n, int(seed), int(n_truncated))


def check_truncation(table: StopTable) -> int:
    count = int(table.truncated.sum())
    if count > MAX_TRUNCATED_FRACTION * table.n_paths:
        raise Truncated(N_MAX, count)
    return count


def estimate_J(p: ModelParams, x0: float, firm: StoppingStrategy, holder: StoppingStrategy,
               modified: bool = False, n_paths: int = 200_000, seed: int = 42,
               workers: int = 1) -> EstimatorResult:
    """Monte Carlo estimate of J (or the modified criterion with ``modified=True``)."""
    if n_paths < 100:
        raise ParameterError("paths", "n_paths must be >= 100")
    table = simulate_stops(p, x0, [firm, holder], n_paths, seed, workers=workers)
    n_trunc = check_truncation(table)
    return summarize(table.payoffs(firm, holder, modified), seed, n_trunc)


@dataclass(frozen=True)
class DeterministicGameSpec:
    """Deterministic Dynkin game on finite time grids.

    Player 1 (time ``tau``) maximises, player 2 (time ``sigma``) minimises;
    the payment is L(tau) if tau < sigma, U(sigma) if sigma < tau and M(tau)
    on a tie.
    """

    L: Callable[[float], float]
    M: Callable[[float], float]
    U: Callable[[float], float]
    grid_player1: tuple
    grid_player2: tuple

    def __post_init__(self):
        for name in ("grid_player1", "grid_player2"):
            grid = tuple(sorted(float(t) for t in getattr(self, name)))
            if not grid:
                raise EmptyGrid(f"{name} is empty")
            if grid[0] < 0:
                raise ValueError(f"{name} must hold non-negative times")
            object.__setattr__(self, name, grid)

    def payoff(self, sigma: float, tau: float) -> float:
        if tau < sigma:
            return self.L(tau)
        if sigma < tau:
            return self.U(sigma)
        return self.M(tau)

    def matrix(self) -> np.ndarray:
        """Rows: player 2 times; columns: player 1 times."""
        return np.array([[self.payoff(s, t) for t in self.grid_player1] for s in self.grid_player2], dtype=float)


def deterministic_game_value(spec: DeterministicGameSpec) -> tuple:
    """Upper value min_sigma max_tau J and lower value max_tau min_sigma J by enumeration."""
    J = spec.matrix()
    return float(J.max(axis=1).min()), float(J.min(axis=0).max())
