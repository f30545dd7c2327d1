"""Leakage/download-cost tradeoff optimization.

For a two-level cost profile (the first ``N`` options cost ``c`` symbols,
the remaining ``M - N`` cost ``c + 1``) the distribution minimizing the
Renyi divergence from uniform subject to a download-cost budget is the
two-level distribution

    p_m = (1 - lam) / N          for the N low-cost options,
    p_m = lam / (M - N)          otherwise,

where ``lam = L * D - c`` is the probability mass spent on high-cost
options at normalized cost ``D``.  This holds for every finite order
including KL; in the max-order limit the low-cost levels are forced but the
high-cost mass may be spread arbitrarily below that level, so the solution
set is larger.

Everything closed-form here is double-checked by an independent numeric
route: ``numeric_oracle`` minimizes the raw convex objective over the
simplex intersected with the cost hyperplane by spectral projected gradient
descent (max order: bisection on the epigraph bound), knowing nothing about
the two-level shape, and ``kkt_check`` verifies stationarity and
complementary slackness of any candidate solution.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConvergenceError, CostRangeError, ParameterError
from .leakage import KL, RenyiOrder, as_order, maximal_leakage
from .schemes import SchemeParams, build_structure, check_distribution

__all__ = [
    "CostProfile",
    "TradeoffPoint",
    "KktReport",
    "OracleConfig",
    "OracleResult",
    "OptimalSolution",
    "CrossoverResult",
    "capacity",
    "perfect_privacy_cost",
    "feasible_cost_range",
    "high_cost_mass",
    "optimal_distribution",
    "tradeoff_leakage",
    "numeric_oracle",
    "kkt_check",
    "sweep_tradeoff",
    "find_crossover",
    "points_to_csv",
    "points_to_json",
    "CSV_HEADER",
]

CSV_HEADER = ["scheme", "N", "K", "L", "alpha", "D", "leakage_nats", "leakage_normalized"]

_RANGE_TOL = 1e-12


@dataclass(frozen=True)
class CostProfile:
    """Per-option download costs of one scheme, in the contract order."""

    costs: tuple[int, ...]
    message_len: int
    n_low: int
    params: SchemeParams | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.message_len < 1 or self.n_low < 1:
            raise ParameterError("message_len and n_low must be positive")
        if len(self.costs) < self.n_low:
            raise ParameterError("fewer costs than low-cost options")
        levels = sorted(set(self.costs))
        low = self.costs[0]
        if any(c != low for c in self.costs[: self.n_low]):
            raise ParameterError("first n_low costs must share the low value")
        if len(levels) == 1:
            if len(self.costs) != self.n_low:
                raise ParameterError("single cost level implies all options are low-cost")
        elif levels != [low, low + 1]:
            raise ParameterError(f"expected two cost levels c and c+1, got {levels}")

    @classmethod
    def from_params(cls, params: SchemeParams) -> "CostProfile":
        m, n = params.n_options, params.n_databases
        costs = (params.low_cost,) * n + (params.high_cost,) * (m - n)
        return cls(costs, params.message_len, n, params)

    @property
    def n_options(self) -> int:
        return len(self.costs)

    @property
    def low_cost(self) -> int:
        return self.costs[0]

    @property
    def high_cost(self) -> int:
        return self.costs[0] + 1 if self.n_options > self.n_low else self.costs[0]

    @property
    def n_high(self) -> int:
        return self.n_options - self.n_low

    def cost_array(self) -> np.ndarray:
        return np.array(self.costs, dtype=np.float64)


@dataclass(frozen=True)
class TradeoffPoint:
    """One point of a leakage/download-cost tradeoff curve."""

    download_cost: float
    leakage_nats: float
    order: RenyiOrder
    scheme: SchemeParams | None = None
    leakage_normalized: float | None = None
    maximal_leakage_nats: float | None = None


@dataclass(frozen=True)
class KktReport:
    """Optimality-condition residuals for a candidate distribution."""

    stationarity_residual: float
    primal_cost_residual: float
    primal_normalization_residual: float
    complementary_slackness_residual: float
    feasible: bool

    @property
    def max_residual(self) -> float:
        return max(
            self.stationarity_residual,
            self.primal_cost_residual,
            self.primal_normalization_residual,
            self.complementary_slackness_residual,
        )


class OptimalSolution(NamedTuple):
    probs: np.ndarray
    is_unique: bool


class OracleResult(NamedTuple):
    probs: np.ndarray
    objective_nats: float
    iterations: int


@dataclass
class OracleConfig:
    """Knobs for the numeric oracle; defaults meet the verification suite."""

    max_iters: int = 300_000
    grad_tol: float = 1e-12
    seed: int = 0
    n_restarts: int = 1
    armijo: float = 1e-4
    history: int = 10
    bisect_iters: int = 200


@dataclass(frozen=True)
class CrossoverResult:
    """Download cost below which one scheme's optimal leakage beats another's."""

    d_star: float | None
    exists: bool
    metric: str
    order: RenyiOrder
    d_low: float
    d_high: float
    gap_at_low: float
    gap_at_high: float


# --------------------------------------------------------------------------
# Closed-form quantities


def capacity(n_databases: int, n_messages: int) -> float:
    """Largest rate achievable with zero leakage: 1 / (1 + 1/N + ... + 1/N^(K-1))."""
    if n_databases < 2 or n_messages < 1:
        raise ParameterError("need n_databases >= 2 and n_messages >= 1")
    total = sum(Fraction(1, n_databases**i) for i in range(n_messages))
    return float(1 / total)


def _perfect_privacy_cost_fraction(profile: CostProfile) -> Fraction:
    return Fraction(sum(profile.costs), profile.message_len * profile.n_options)


def perfect_privacy_cost(profile: CostProfile) -> float:
    """Normalized download cost of the uniform (zero-leakage) distribution."""
    return float(_perfect_privacy_cost_fraction(profile))


def feasible_cost_range(profile: CostProfile, mode: str = "theorem") -> tuple[float, float]:
    """Range of normalized download costs.

    ``theorem`` mode covers the tradeoff statements: [1, perfect-privacy
    cost].  ``simplex`` mode is everything any distribution can realize:
    [low_cost/L, high_cost/L].
    """
    ell = profile.message_len
    if mode == "theorem":
        return (float(Fraction(profile.low_cost, ell)), perfect_privacy_cost(profile))
    if mode == "simplex":
        return (float(Fraction(profile.low_cost, ell)), float(Fraction(profile.high_cost, ell)))
    raise ParameterError(f"unknown mode {mode!r}; use 'theorem' or 'simplex'")


def high_cost_mass(profile: CostProfile, download_cost: float) -> float:
    """Probability mass on high-cost options implied by the cost budget."""
    return profile.message_len * download_cost - profile.low_cost


def _check_theorem_range(profile: CostProfile, download_cost: float) -> float:
    lo, hi = feasible_cost_range(profile, "theorem")
    if not lo - _RANGE_TOL <= download_cost <= hi + _RANGE_TOL:
        raise CostRangeError(
            f"download cost {download_cost} outside tradeoff range [{lo}, {hi}]"
        )
    lam = high_cost_mass(profile, download_cost)
    lam_max = 1.0 - profile.n_low / profile.n_options
    return min(max(lam, 0.0), lam_max)


def optimal_distribution(profile: CostProfile, download_cost: float, order) -> OptimalSolution:
    """Leakage-minimizing distribution at the given download cost.

    Unique for every finite order and for KL.  In the max-order limit the
    returned two-level distribution is one member of a larger solution set
    (except at the range endpoints, where it is forced); ``is_unique``
    reports which case applies.
    """
    order = as_order(order)
    lam = _check_theorem_range(profile, download_cost)
    m, n = profile.n_options, profile.n_low
    probs = np.empty(m)
    probs[:n] = (1.0 - lam) / n
    if m > n:
        probs[n:] = lam / (m - n)
    lam_max = 1.0 - n / m
    unique = (not order.is_max) or lam <= _RANGE_TOL or lam >= lam_max - _RANGE_TOL
    return OptimalSolution(probs, unique)


def tradeoff_leakage(profile: CostProfile, download_cost: float, order) -> float:
    """Minimum leakage at the given download cost, in nats (closed form)."""
    order = as_order(order)
    lam = _check_theorem_range(profile, download_cost)
    m, n = profile.n_options, profile.n_low
    n_high = m - n
    p_lo = (1.0 - lam) / n
    p_hi = lam / n_high if n_high else 0.0
    log_m = math.log(m)
    if order.is_max:
        return max(0.0, math.log(p_lo) + log_m)
    if order.is_kl:
        total = 0.0
        if lam < 1.0:
            total += (1.0 - lam) * math.log(p_lo)
        if lam > 0.0:
            total += lam * math.log(p_hi)
        return max(0.0, total + log_m)
    alpha = order.alpha
    mass = n * p_lo**alpha + n_high * p_hi**alpha
    return max(0.0, math.log(mass) / (alpha - 1.0) + log_m)


# --------------------------------------------------------------------------
# Numeric oracle: primal descent with no knowledge of the two-level shape


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def _project_cost_simplex(y: np.ndarray, costs: np.ndarray, budget: float) -> np.ndarray:
    """Euclidean projection onto {p >= 0, sum p = 1, costs @ p = budget}.

    Outer bisection on the cost multiplier (the realized cost of the
    shifted simplex projection is nonincreasing in it), then an active-set
    polish for machine-precision feasibility.
    """
    d = costs
    if d.max() - d.min() < 1e-12:
        return _project_simplex(y)

    def realized(xi: float) -> tuple[float, np.ndarray]:
        p = _project_simplex(y - xi * d)
        return float(d @ p), p

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if realized(lo)[0] >= budget - 1e-15:
            break
        lo *= 2.0
    for _ in range(200):
        if realized(hi)[0] <= budget + 1e-15:
            break
        hi *= 2.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if realized(mid)[0] > budget:
            lo = mid
        else:
            hi = mid
    p = realized(0.5 * (lo + hi))[1]

    active = p > 0
    n_act = int(active.sum())
    if n_act >= 2:
        da, ya = d[active], y[active]
        sd, sdd = da.sum(), float(da @ da)
        det = n_act * sdd - sd * sd
        if det > 1e-12 * max(1.0, n_act * sdd):
            rhs1, rhs2 = ya.sum() - 1.0, float(da @ ya) - budget
            mu = (rhs1 * sdd - sd * rhs2) / det
            xi = (n_act * rhs2 - sd * rhs1) / det
            cand = ya - mu - xi * da
            if cand.min() >= -1e-12:
                out = np.zeros_like(p)
                out[active] = np.maximum(cand, 0.0)
                return out
    return p


def _raw_objective(order: RenyiOrder) -> tuple[Callable, Callable, Callable]:
    """Raw convex objective, gradient, and diagonal curvature for the oracle."""
    if order.is_kl:

        def f(p):
            q = p[p > 0]
            return float(np.sum(q * np.log(q)))

        def grad(p):
            return 1.0 + np.log(np.maximum(p, 1e-300))

        def hess(p):
            return 1.0 / np.maximum(p, 1e-12)

        return f, grad, hess

    alpha = order.alpha
    if alpha > 1:

        def f(p):
            return float(np.sum(np.maximum(p, 0.0) ** alpha))

        def grad(p):
            return alpha * np.maximum(p, 0.0) ** (alpha - 1.0)

        def hess(p):
            return alpha * (alpha - 1.0) * np.maximum(p, 1e-12) ** (alpha - 2.0)

        return f, grad, hess

    def f(p):
        return -float(np.sum(np.maximum(p, 0.0) ** alpha))

    def grad(p):
        return -alpha * np.maximum(p, 1e-12) ** (alpha - 1.0)

    def hess(p):
        return alpha * (1.0 - alpha) * np.maximum(p, 1e-12) ** (alpha - 2.0)

    return f, grad, hess


def _rho_from_raw(raw: float, order: RenyiOrder, m: int) -> float:
    if order.is_kl:
        return max(0.0, raw + math.log(m))
    alpha = order.alpha
    total = raw if alpha > 1 else -raw
    return max(0.0, math.log(total) / (alpha - 1.0) + math.log(m))


def _weighted_constrained_direction(
    g: np.ndarray, d: np.ndarray, weights: np.ndarray
) -> np.ndarray | None:
    """Direction w * (g - a - b*d) with multipliers fit so that the direction
    sums to zero and is orthogonal to the cost vector.

    Solved in a centered basis: the raw normal equations cancel
    catastrophically when the weights are strongly nonuniform.
    Returns None when fewer than two coordinates carry weight.
    """
    sw = float(weights.sum())
    if (weights > 0).sum() < 2 or sw <= 0.0:
        return None
    d_bar = float(weights @ d) / sw
    g_bar = float(weights @ g) / sw
    dc = d - d_bar
    denom = float(weights @ (dc * dc))
    b = float(weights @ (dc * g)) / denom if denom > 1e-30 else 0.0
    return weights * (g - g_bar - b * dc)


def _reduced_direction(g: np.ndarray, d: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Project the gradient onto the feasible directions at x.

    Feasible directions keep both equality constraints and do not push
    zero coordinates negative; the latter is enforced by an active-set
    refinement (at most a handful of passes in practice).
    """
    weights = np.ones(g.size)
    for _ in range(g.size):
        v = _weighted_constrained_direction(g, d, weights)
        if v is None:
            return np.zeros_like(g)
        newly_clamped = (weights > 0) & (x <= 1e-15) & (v > 0)
        if not newly_clamped.any():
            return v
        weights[newly_clamped] = 0.0
    return v


def _refeasibilize(x: np.ndarray, d: np.ndarray, budget: float) -> np.ndarray:
    """Remove accumulated drift from the two equality constraints."""
    m = x.size
    sd, sdd = d.sum(), float(d @ d)
    det = m * sdd - sd * sd
    r1, r2 = x.sum() - 1.0, float(d @ x) - budget
    if det <= 1e-12 * max(1.0, m * sdd):
        x = x - r1 / m
    else:
        a = (r1 * sdd - sd * r2) / det
        b = (m * r2 - sd * r1) / det
        x = x - a - b * d
    return np.maximum(x, 0.0)


def _spg_minimize(
    f: Callable, grad: Callable, x0: np.ndarray, d: np.ndarray, budget: float, cfg: OracleConfig
) -> tuple[np.ndarray, int]:
    """Spectral (Barzilai-Borwein) projected gradient descent on the slice."""
    x = x0.copy()
    fx = f(x)
    g = grad(x)
    v = _reduced_direction(g, d, x)
    recent = [fx]
    eta = 1.0 / max(1.0, float(np.abs(v).max()))
    for it in range(1, cfg.max_iters + 1):
        gscale = max(1.0, float(np.abs(g).max()))
        vmax = float(np.abs(v).max())
        if vmax <= cfg.grad_tol * gscale:
            return x, it
        # largest step keeping every coordinate nonnegative
        pushing = v > 0
        cap = float(np.min(x[pushing] / v[pushing])) if pushing.any() else math.inf
        step = min(eta, 0.999 * cap) if math.isfinite(cap) else eta
        if step <= 0.0:
            step = eta
        fref = max(recent)
        vv = float(v @ v)
        accepted = False
        for _ in range(60):
            xn = np.maximum(x - step * v, 0.0)
            fn = f(xn)
            if fn <= fref - cfg.armijo * step * vv:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            xn, fn = x, fx
        gn = grad(xn)
        s = xn - x
        ybb = gn - g
        sty = float(s @ ybb)
        if sty > 1e-30:
            eta = min(max(float(s @ s) / sty, 1e-14), 1e14)
        else:
            eta = min(eta * 2.0, 1e14)
        x, fx, g = xn, fn, gn
        recent.append(fx)
        if len(recent) > cfg.history:
            recent.pop(0)
        if it % 512 == 0:
            x = _refeasibilize(x, d, budget)
            fx = f(x)
            g = grad(x)
        v = _reduced_direction(g, d, x)
    residuals = {
        "reduced_grad_inf": float(np.abs(v).max()),
        "sum_residual": float(abs(x.sum() - 1.0)),
        "cost_residual": float(abs(d @ x - budget)),
    }
    raise ConvergenceError(
        f"oracle did not converge within {cfg.max_iters} iterations",
        last_iterate=x,
        residuals=residuals,
    )


def _newton_polish(
    f: Callable,
    grad: Callable,
    hess: Callable,
    x: np.ndarray,
    d: np.ndarray,
    budget: float,
) -> np.ndarray:
    """Projected-Newton refinement of a near-optimal iterate.

    The separable objectives have diagonal curvature, so the Newton step
    under the two equality constraints is a weighted version of the reduced
    gradient; its length estimates the remaining coordinate error directly,
    which makes it immune to the nearly flat directions that stall
    first-order steps at high orders.
    """
    fx = f(x)
    for _ in range(60):
        g = grad(x)
        h = hess(x)
        w = 1.0 / np.maximum(h, 1e-14 * float(h.max()))
        v = np.zeros_like(x)
        for _ in range(x.size):
            v = _weighted_constrained_direction(g, d, w)
            if v is None:
                return _refeasibilize(x, d, budget)
            newly_clamped = (x <= 1e-15) & (v > 0) & (w > 0)
            if not newly_clamped.any():
                break
            w[newly_clamped] = 0.0
        vmax = float(np.abs(v).max())
        if vmax <= 1e-12:
            break
        pushing = v > 0
        cap = float(np.min(x[pushing] / v[pushing])) if pushing.any() else math.inf
        t = min(1.0, 0.999 * cap)
        slope = float(v @ g)
        improved = False
        for _ in range(40):
            xn = np.maximum(x - t * v, 0.0)
            fn = f(xn)
            if fn <= fx - 1e-4 * t * slope + 1e-18:
                x, fx = xn, fn
                improved = True
                break
            t *= 0.5
        if not improved or vmax * t <= 1e-13:
            break
    return _refeasibilize(x, d, budget)


def _greedy_cost(costs_sorted: np.ndarray, level: float) -> float:
    """Cost of packing unit mass at per-coordinate cap ``level`` in the given order."""
    k = int(1.0 // level)
    k = min(k, costs_sorted.size)
    total = float(costs_sorted[:k].sum()) * level
    rem = 1.0 - k * level
    if rem > 1e-18 and k < costs_sorted.size:
        total += float(costs_sorted[k]) * rem
    return total


def _greedy_fill(costs: np.ndarray, order_idx: np.ndarray, level: float) -> np.ndarray:
    p = np.zeros(costs.size)
    rem = 1.0
    for i in order_idx:
        take = min(level, rem)
        p[i] = take
        rem -= take
        if rem <= 1e-18:
            break
    return p


def _oracle_max_order(costs: np.ndarray, budget: float, cfg: OracleConfig) -> tuple[np.ndarray, int]:
    """Minimize max_m p_m over the slice: bisection on the epigraph bound.

    Feasibility of a cap t is exact: the realizable costs under the cap form
    the interval between cheapest-first and dearest-first packings.
    """
    m = costs.size
    asc = np.argsort(costs, kind="stable")
    desc = asc[::-1]
    c_asc = costs[asc]
    c_desc = costs[desc]

    def feasible(level: float) -> bool:
        if level * m < 1.0 - 1e-12:
            return False
        return (
            _greedy_cost(c_asc, level) - 1e-12
            <= budget
            <= _greedy_cost(c_desc, level) + 1e-12
        )

    lo, hi = 1.0 / m, 1.0
    if feasible(lo):
        hi = lo
    it = 0
    for it in range(1, cfg.bisect_iters + 1):
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    level = hi
    p_min = _greedy_fill(costs, asc, level)
    p_max = _greedy_fill(costs, desc, level)
    c_min, c_max = float(costs @ p_min), float(costs @ p_max)
    if c_max - c_min < 1e-15:
        return p_min, it
    theta = min(max((budget - c_min) / (c_max - c_min), 0.0), 1.0)
    return (1.0 - theta) * p_min + theta * p_max, it


def numeric_oracle(
    profile: CostProfile, download_cost: float, order, config: OracleConfig | None = None
) -> OracleResult:
    """Minimize the order-appropriate leakage objective numerically.

    Primal descent over the full M-dimensional feasible set from a seeded
    random start; no use of the closed form or of the option ordering.
    Raises ConvergenceError (carrying the last iterate and its residuals)
    if the iteration cap is hit.
    """
    order = as_order(order)
    cfg = config or OracleConfig()
    lo, hi = feasible_cost_range(profile, "simplex")
    if not lo - _RANGE_TOL <= download_cost <= hi + _RANGE_TOL:
        raise CostRangeError(
            f"download cost {download_cost} outside simplex range [{lo}, {hi}]"
        )
    d = profile.cost_array()
    budget = float(download_cost * profile.message_len)
    budget = min(max(budget, float(d.min())), float(d.max()))
    m = profile.n_options

    if order.is_max:
        probs, iters = _oracle_max_order(d, budget, cfg)
        objective = max(0.0, math.log(m * float(probs.max())))
        return OracleResult(probs, objective, iters)

    f, grad, hess = _raw_objective(order)
    rng = np.random.default_rng(cfg.seed)
    best: tuple[float, np.ndarray, int] | None = None
    for _ in range(max(1, cfg.n_restarts)):
        x0 = _project_cost_simplex(rng.dirichlet(np.ones(m)), d, budget)
        x, iters = _spg_minimize(f, grad, x0, d, budget, cfg)
        x = _newton_polish(f, grad, hess, x, d, budget)
        fx = f(x)
        if best is None or fx < best[0]:
            best = (fx, x, iters)
    fx, x, iters = best
    return OracleResult(x, _rho_from_raw(fx, order, m), iters)


# --------------------------------------------------------------------------
# KKT residuals


def kkt_check(profile: CostProfile, probs, download_cost: float, order) -> KktReport:
    """Residuals of the optimality conditions at a candidate distribution.

    Finite orders and KL: fits the two equality multipliers by least squares
    over the positive coordinates and reports the worst stationarity
    residual.  Max order: checks the solution-set structure instead (low
    block pinned at the common level, correct mass above it, no coordinate
    exceeding the level) and reports violations as the complementary
    slackness residual.
    """
    order = as_order(order)
    p = check_distribution(probs, profile.n_options)
    d = profile.cost_array()
    ell = profile.message_len
    r_norm = float(abs(p.sum() - 1.0))
    r_cost = float(abs(d @ p / ell - download_cost))
    feasible = r_norm <= 1e-9 and r_cost <= 1e-9

    if order.is_max:
        lam = high_cost_mass(profile, download_cost)
        n = profile.n_low
        level = (1.0 - lam) / n
        level_dev = float(np.abs(p[:n] - level).max())
        tail_dev = float(abs(p[n:].sum() - lam)) if profile.n_high else 0.0
        cap_dev = float(max(0.0, p.max() - level))
        slack = max(level_dev, tail_dev, cap_dev)
        return KktReport(0.0, r_cost, r_norm, slack, feasible and slack <= 1e-9)

    if order.is_kl:
        grad = 1.0 + np.log(np.maximum(p, 1e-300))
    else:
        alpha = order.alpha
        sign = 1.0 if alpha > 1 else -1.0
        grad = sign * alpha * np.maximum(p, 1e-300) ** (alpha - 1.0)

    pos = p > 1e-12
    a = np.column_stack([d[pos] / ell, np.ones(int(pos.sum()))])
    mult, *_ = np.linalg.lstsq(a, -grad[pos], rcond=None)
    stationarity = float(np.abs(grad[pos] + a @ mult).max())
    return KktReport(stationarity, r_cost, r_norm, 0.0, feasible and stationarity <= 1e-9)


# --------------------------------------------------------------------------
# Sweeps and scheme comparison


def sweep_tradeoff(
    profile: CostProfile,
    orders: Sequence,
    n_points: int,
    include_maximal_leakage: bool = False,
    db_index: int = 0,
) -> list[TradeoffPoint]:
    """Closed-form tradeoff curves over evenly spaced download costs."""
    if n_points < 2:
        raise ParameterError("need at least 2 sweep points")
    orders = [as_order(o) for o in orders]
    lo, hi = feasible_cost_range(profile, "theorem")
    grid = np.linspace(lo, hi, n_points)
    log_m = math.log(profile.n_options)

    ml_values = None
    if include_maximal_leakage:
        if profile.params is None:
            raise ParameterError("maximal leakage sweep needs scheme parameters")
        structures = [
            build_structure(profile.params, theta)
            for theta in range(1, profile.params.n_messages + 1)
        ]
        ml_values = [
            maximal_leakage(structures, optimal_distribution(profile, float(dd), KL).probs, db_index)
            for dd in grid
        ]

    points = []
    for order in orders:
        for i, dd in enumerate(grid):
            leak = tradeoff_leakage(profile, float(dd), order)
            points.append(
                TradeoffPoint(
                    download_cost=float(dd),
                    leakage_nats=leak,
                    order=order,
                    scheme=profile.params,
                    leakage_normalized=leak / log_m,
                    maximal_leakage_nats=None if ml_values is None else ml_values[i],
                )
            )
    return points


def _unit_scale(units: str) -> tuple[float, str]:
    if units == "nats":
        return 1.0, "nats"
    if units == "bits":
        return 1.0 / math.log(2.0), "bits"
    raise ParameterError(f"unknown units {units!r}; use 'nats' or 'bits'")


def points_to_csv(points: Sequence[TradeoffPoint], units: str = "nats") -> str:
    """Fixed-schema CSV; leakage values in nats unless ``units='bits'``."""
    scale, suffix = _unit_scale(units)
    include_ml = any(pt.maximal_leakage_nats is not None for pt in points)
    header = CSV_HEADER[:6] + [f"leakage_{suffix}", "leakage_normalized"]
    if include_ml:
        header.append(f"maximal_leakage_{suffix}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for pt in points:
        scheme = pt.scheme
        row = [
            scheme.kind.value if scheme else "",
            scheme.n_databases if scheme else "",
            scheme.n_messages if scheme else "",
            scheme.message_len if scheme else "",
            pt.order.label,
            repr(pt.download_cost),
            repr(pt.leakage_nats * scale),
            "" if pt.leakage_normalized is None else repr(pt.leakage_normalized),
        ]
        if include_ml:
            row.append(
                ""
                if pt.maximal_leakage_nats is None
                else repr(pt.maximal_leakage_nats * scale)
            )
        writer.writerow(row)
    return buf.getvalue()


def points_to_json(points: Sequence[TradeoffPoint], units: str = "nats") -> str:
    scale, suffix = _unit_scale(units)
    rows = []
    for pt in points:
        scheme = pt.scheme
        row = {
            "scheme": scheme.kind.value if scheme else None,
            "N": scheme.n_databases if scheme else None,
            "K": scheme.n_messages if scheme else None,
            "L": scheme.message_len if scheme else None,
            "alpha": pt.order.label,
            "D": pt.download_cost,
            f"leakage_{suffix}": pt.leakage_nats * scale,
            "leakage_normalized": pt.leakage_normalized,
        }
        if pt.maximal_leakage_nats is not None:
            row[f"maximal_leakage_{suffix}"] = pt.maximal_leakage_nats * scale
        rows.append(row)
    return json.dumps(rows, indent=2)


def _leakage_function(params: SchemeParams, order: RenyiOrder, metric: str, db_index: int):
    profile = CostProfile.from_params(params)
    log_m = math.log(profile.n_options)
    if metric == "renyi":
        return lambda dd: tradeoff_leakage(profile, dd, order)
    if metric == "normalized":
        return lambda dd: tradeoff_leakage(profile, dd, order) / log_m
    if metric == "maximal":
        structures = [
            build_structure(params, theta) for theta in range(1, params.n_messages + 1)
        ]
        return lambda dd: maximal_leakage(
            structures, optimal_distribution(profile, dd, KL).probs, db_index
        )
    raise ParameterError(f"unknown metric {metric!r}")


def find_crossover(
    n_databases: int,
    n_messages: int,
    message_len: int,
    order=KL,
    metric: str = "renyi",
    db_index: int = 0,
    tol: float = 1e-10,
) -> CrossoverResult:
    """Locate the download cost where the shorter-message scheme's optimal
    leakage stops beating the full-length scheme's, by bisection.

    The search runs over the full-length scheme's tradeoff range.  If the
    shorter scheme never does better there, the result reports that rather
    than raising.
    """
    order = as_order(order)
    tsc = SchemeParams.tsc(n_databases, n_messages)
    alt = SchemeParams.alternative(n_databases, n_messages, message_len)
    f_tsc = _leakage_function(tsc, order, metric, db_index)
    f_alt = _leakage_function(alt, order, metric, db_index)
    d_lo, d_hi = feasible_cost_range(CostProfile.from_params(tsc), "theorem")

    def gap(dd: float) -> float:
        return f_tsc(dd) - f_alt(dd)

    g_lo, g_hi = gap(d_lo), gap(d_hi)
    if g_lo <= 0.0:
        return CrossoverResult(None, False, metric, order, d_lo, d_hi, g_lo, g_hi)
    if g_hi >= 0.0:
        return CrossoverResult(None, False, metric, order, d_lo, d_hi, g_lo, g_hi)
    lo, hi = d_lo, d_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return CrossoverResult(0.5 * (lo + hi), True, metric, order, d_lo, d_hi, g_lo, g_hi)
