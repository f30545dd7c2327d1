"""Information-leakage measures for probabilistic query schemes.

The central measure is the Renyi divergence of order ``alpha`` from the
perfect-privacy option distribution ``U`` to the chosen distribution ``P``:

    D_alpha(P || U) = (1 / (alpha - 1)) * log sum_m p_m**alpha / u_m**(alpha - 1)

with the Kullback-Leibler divergence as the ``alpha -> 1`` limit and
``log max_m p_m / u_m`` as the ``alpha -> inf`` limit.  All values are in
nats.  Zero-probability conventions: ``0**alpha = 0`` and ``0 * log 0 = 0``.

Also provided: maximal leakage, the smallest epsilon bounding query
probability ratios across candidate message indices, mutual-information
leakage, and the empirical estimator used by protocol simulations.  The
structure-based metrics compare, at a single database, the query marginals
induced by the same option distribution for every candidate ``theta``.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ParameterError,
    SupportViolationError,
    UndefinedNormalizationError,
)
from .schemes import QueryStructure, check_distribution, per_db_query_distribution

__all__ = [
    "RenyiOrder",
    "KL",
    "MAX_ORDER",
    "as_order",
    "renyi_divergence",
    "renyi_entropy",
    "normalized_renyi",
    "maximal_leakage",
    "eps_privacy",
    "mutual_information_leakage",
    "empirical_distribution",
    "total_variation",
    "uniform_distribution",
]

# Below this distance from alpha = 1 the direct formula loses precision; the
# divergence is computed as KL plus a first-order correction instead.
_NEAR_KL = 1e-6
# Between _NEAR_KL and this bound an expm1/log1p formulation is used.
_NEAR_KL_WIDE = 1e-4
# Probabilities below this count as zero for support comparisons.
_SUPPORT_TOL = 1e-15


@dataclass(frozen=True)
class RenyiOrder:
    """Divergence order: a finite ``alpha``, the KL limit (``alpha = 1``),
    or the max limit (``alpha = inf``)."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ParameterError(f"order must be positive, got {self.alpha}")

    @classmethod
    def finite(cls, alpha: float) -> "RenyiOrder":
        if alpha <= 0 or alpha == 1 or math.isinf(alpha):
            raise ParameterError(
                f"finite order must be in (0,1) or (1,inf), got {alpha}"
            )
        return cls(float(alpha))

    @classmethod
    def kl(cls) -> "RenyiOrder":
        return cls(1.0)

    @classmethod
    def max_order(cls) -> "RenyiOrder":
        return cls(math.inf)

    @property
    def is_kl(self) -> bool:
        return self.alpha == 1.0

    @property
    def is_max(self) -> bool:
        return math.isinf(self.alpha)

    @property
    def is_finite(self) -> bool:
        return not (self.is_kl or self.is_max)

    @property
    def label(self) -> str:
        if self.is_max:
            return "inf"
        return f"{self.alpha:g}"

    def __str__(self) -> str:
        return self.label


KL = RenyiOrder(1.0)
MAX_ORDER = RenyiOrder(math.inf)


def as_order(order) -> RenyiOrder:
    """Coerce a float, ``"inf"``, or RenyiOrder into a RenyiOrder."""
    if isinstance(order, RenyiOrder):
        return order
    if isinstance(order, str):
        order = math.inf if order.strip().lower() in ("inf", "infinity") else float(order)
    return RenyiOrder(float(order))


def uniform_distribution(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def _support_violation(message: str, extended: bool) -> float:
    if extended:
        return math.inf
    raise SupportViolationError(message)


def _kl(p: np.ndarray, u: np.ndarray, extended: bool) -> float:
    mask = p > 0
    if np.any(u[mask] <= 0):
        return _support_violation("KL divergence undefined: reference has zero "
                                  "mass where the argument is positive", extended)
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(u[mask]))))


def _log_ratio_moments(p: np.ndarray, u: np.ndarray) -> tuple[float, float]:
    mask = p > 0
    x = np.log(p[mask]) - np.log(u[mask])
    mean = float(np.sum(p[mask] * x))
    var = float(np.sum(p[mask] * (x - mean) ** 2))
    return mean, var


def renyi_divergence(p, u, order, *, extended: bool = False) -> float:
    """Renyi divergence of the given order from ``u`` to ``p``, in nats.

    For orders >= 1 (including the max limit) the support of ``p`` must be
    contained in the support of ``u``; a violation raises
    ``SupportViolationError`` unless ``extended=True``, which returns ``inf``
    instead.  The result is 0 exactly when ``p == u``.
    """
    order = as_order(order)
    p = check_distribution(p)
    u = check_distribution(u)
    if p.size != u.size:
        raise ParameterError(f"length mismatch: {p.size} vs {u.size}")
    if np.array_equal(p, u):
        return 0.0

    if order.is_kl:
        return _kl(p, u, extended)

    if order.is_max:
        if np.any(p[u <= 0] > _SUPPORT_TOL):
            return _support_violation(
                "max-order divergence undefined: argument has mass outside "
                "the reference support", extended)
        mask = u > 0
        return max(0.0, float(np.log(np.max(p[mask] / u[mask]))))

    alpha = order.alpha
    if alpha > 1 and np.any(p[u <= 0] > _SUPPORT_TOL):
        return _support_violation(
            f"order-{alpha} divergence undefined: argument has mass outside "
            "the reference support", extended)

    gap = alpha - 1.0
    if abs(gap) < _NEAR_KL:
        # KL plus first-order correction in (alpha - 1).
        kl_val = _kl(p, u, extended)
        if math.isinf(kl_val):
            return kl_val
        _, var = _log_ratio_moments(p, u)
        return max(0.0, kl_val + 0.5 * gap * var)
    if abs(gap) < _NEAR_KL_WIDE:
        mask = p > 0
        if np.any(u[mask] <= 0):
            # Only reachable for alpha > 1; alpha < 1 with disjoint reference
            # support is handled by the generic branch below.
            return _support_violation(
                f"order-{alpha} divergence undefined", extended)
        x = np.log(p[mask]) - np.log(u[mask])
        total = float(np.sum(p[mask] * np.expm1(gap * x)))
        return max(0.0, float(np.log1p(total)) / gap)

    # Generic branch, in log space: sum_m exp(alpha*log p_m - gap*log u_m)
    # over the support of p.  Terms with u_m = 0 contribute 0 when alpha < 1.
    mask = p > 0
    with np.errstate(divide="ignore"):
        z = alpha * np.log(p[mask]) - gap * np.log(u[mask])
    if np.any(np.isposinf(z)):  # alpha > 1 with sub-tolerance mass off support
        return _support_violation(
            f"order-{alpha} divergence undefined: argument has mass outside "
            "the reference support", extended)
    z = z[np.isfinite(z)]  # drop -inf terms (alpha < 1, u_m = 0)
    if z.size == 0:
        return _support_violation(
            f"order-{alpha} divergence undefined: distributions are "
            "mutually singular", extended)
    zmax = float(np.max(z))
    total = zmax + float(np.log(np.sum(np.exp(z - zmax))))
    return max(0.0, total / gap)


def renyi_entropy(u, order) -> float:
    """Renyi entropy of a distribution, in nats (log of size for uniform)."""
    order = as_order(order)
    u = check_distribution(u)
    mask = u > 0
    if order.is_kl:
        return float(-np.sum(u[mask] * np.log(u[mask])))
    if order.is_max:
        return float(-np.log(np.max(u)))
    alpha = order.alpha
    gap = 1.0 - alpha
    if abs(gap) < _NEAR_KL:
        x = np.log(u[mask])
        mean = float(np.sum(u[mask] * x))
        var = float(np.sum(u[mask] * (x - mean) ** 2))
        return -mean + 0.5 * (alpha - 1.0) * var
    z = alpha * np.log(u[mask])
    zmax = float(np.max(z))
    return (zmax + float(np.log(np.sum(np.exp(z - zmax))))) / gap


def normalized_renyi(p, u, order, *, extended: bool = False) -> float:
    """Renyi divergence normalized by the Renyi entropy of the reference."""
    order = as_order(order)
    h = renyi_entropy(u, order)
    if h <= 0.0:
        raise UndefinedNormalizationError(
            "reference entropy is zero; normalized leakage undefined")
    return renyi_divergence(p, u, order, extended=extended) / h


def _marginals_per_theta(
    structures: Sequence[QueryStructure], probs, db_index: int
) -> list[dict]:
    structures = list(structures)
    if not structures:
        raise ParameterError("need at least one structure")
    params = structures[0].params
    if any(s.params != params for s in structures):
        raise ParameterError("structures must share scheme parameters")
    thetas = sorted(s.theta for s in structures)
    if thetas != list(range(1, params.n_messages + 1)):
        raise ParameterError(
            f"need one structure per theta in 1..{params.n_messages}, got {thetas}"
        )
    by_theta = sorted(structures, key=lambda s: s.theta)
    return [per_db_query_distribution(s, probs, db_index) for s in by_theta]


def maximal_leakage(structures: Sequence[QueryStructure], probs, db_index: int) -> float:
    """``log sum_q max_theta Pr(query = q)`` at one database, in nats.

    Zero when the per-theta query marginals coincide (perfect privacy); at
    most ``log K``.
    """
    marginals = _marginals_per_theta(structures, probs, db_index)
    queries = set().union(*[m.keys() for m in marginals])
    total = sum(max(m.get(q, 0.0) for m in marginals) for q in queries)
    return max(0.0, math.log(total))


def eps_privacy(structures: Sequence[QueryStructure], probs, db_index: int) -> float:
    """Smallest ``eps`` with ``Pr_k1(q) <= exp(eps) * Pr_k2(q)`` for all
    queries and all pairs of candidate indices at one database.

    Returns ``inf`` when a query is possible under one candidate index and
    impossible under another; that is the metric's honest answer rather than
    an error.
    """
    marginals = _marginals_per_theta(structures, probs, db_index)
    queries = set().union(*[m.keys() for m in marginals])
    worst = 0.0
    for q in queries:
        vals = [m.get(q, 0.0) for m in marginals]
        hi, lo = max(vals), min(vals)
        if hi <= _SUPPORT_TOL:
            continue
        if lo <= _SUPPORT_TOL:
            return math.inf
        worst = max(worst, math.log(hi / lo))
    return worst


def mutual_information_leakage(
    structures: Sequence[QueryStructure], probs, db_index: int, prior=None
) -> float:
    """Mutual information between the message index and the query at one
    database, under the given prior on the index (uniform by default)."""
    marginals = _marginals_per_theta(structures, probs, db_index)
    k = len(marginals)
    if prior is None:
        prior = uniform_distribution(k)
    prior = check_distribution(prior, k)
    queries = sorted(set().union(*[m.keys() for m in marginals]))
    mix = {q: sum(prior[i] * marginals[i].get(q, 0.0) for i in range(k)) for q in queries}
    total = 0.0
    for i in range(k):
        if prior[i] <= 0:
            continue
        for q, pq in marginals[i].items():
            if pq > 0:
                total += prior[i] * pq * math.log(pq / mix[q])
    return max(0.0, total)


def empirical_distribution(counts) -> np.ndarray:
    """Normalize a vector of sample counts into a probability vector."""
    c = np.asarray(counts, dtype=np.float64)
    if c.ndim != 1 or c.size == 0:
        raise ParameterError(f"expected a nonempty 1-d count vector, got shape {c.shape}")
    if np.any(c < 0):
        raise ParameterError("counts must be nonnegative")
    total = c.sum()
    if total <= 0:
        raise ParameterError("all counts are zero")
    return c / total


def total_variation(p, q) -> float:
    p = check_distribution(p)
    q = check_distribution(q)
    if p.size != q.size:
        raise ParameterError(f"length mismatch: {p.size} vs {q.size}")
    return 0.5 * float(np.sum(np.abs(p - q)))
