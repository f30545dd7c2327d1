import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpir.errors import (
    ParameterError,
    SupportViolationError,
    UndefinedNormalizationError,
)
from wpir.leakage import (
    KL,
    MAX_ORDER,
    RenyiOrder,
    as_order,
    empirical_distribution,
    eps_privacy,
    maximal_leakage,
    mutual_information_leakage,
    normalized_renyi,
    renyi_divergence,
    renyi_entropy,
    total_variation,
    uniform_distribution,
)
from wpir.schemes import SchemeParams, build_structure

ORDERS = [0.5, 1.0, 2.0, 5.0, math.inf]

# First-column queries of the 9-option structure (N=3, K=2), transcribed by
# hand for both desired indices; the independent oracle for the
# structure-based metrics below.
DB1_QUERIES_THETA1 = [
    "W1(1)", "-", "W1(2)",
    "W2(1)", "W1(2)+W2(1)", "W1(1)+W2(1)",
    "W2(2)", "W1(2)+W2(2)", "W1(1)+W2(2)",
]
DB1_QUERIES_THETA2 = [
    "W2(1)", "-", "W2(2)",
    "W1(1)", "W1(1)+W2(2)", "W1(1)+W2(1)",
    "W1(2)", "W1(2)+W2(2)", "W1(2)+W2(1)",
]


def aggregate(queries, probs):
    out = {}
    for q, p in zip(queries, probs):
        if p > 0:
            out[q] = out.get(q, 0.0) + p
    return out


def distributions(max_len=8):
    return (
        st.lists(st.floats(0.01, 1.0), min_size=2, max_size=max_len)
        .map(lambda xs: np.array(xs) / sum(xs))
    )


# ----------------------------------------------------------------- orders


def test_order_constructors():
    assert as_order(1.0).is_kl
    assert as_order(math.inf).is_max
    assert as_order("inf").is_max
    assert as_order("2").alpha == 2.0
    assert RenyiOrder.finite(0.5).is_finite
    with pytest.raises(ParameterError):
        RenyiOrder.finite(1.0)
    with pytest.raises(ParameterError):
        RenyiOrder.finite(-2.0)
    with pytest.raises(ParameterError):
        as_order(0.0)
    assert KL.label == "1" and MAX_ORDER.label == "inf"


# ------------------------------------------------------------- divergence


@pytest.mark.parametrize("order", ORDERS)
def test_identity_gives_zero(order):
    p = np.array([0.1, 0.2, 0.3, 0.4])
    assert renyi_divergence(p, p, order) == 0.0


def test_half_support_order_two():
    p = np.array([0.5, 0.5, 0.0, 0.0])
    u = uniform_distribution(4)
    assert renyi_divergence(p, u, 2.0) == pytest.approx(math.log(2), abs=1e-12)


@pytest.mark.parametrize("order", ORDERS)
def test_direct_download_leakage_is_log3(order):
    # three equiprobable options out of nine
    p = np.zeros(9)
    p[:3] = 1 / 3
    u = uniform_distribution(9)
    assert renyi_divergence(p, u, order) == pytest.approx(math.log(3), abs=1e-12)


def test_support_violation_raises_and_extended_mode():
    p = np.array([0.5, 0.5])
    u = np.array([1.0, 0.0])
    for order in (2.0, 1.0, math.inf):
        with pytest.raises(SupportViolationError):
            renyi_divergence(p, u, order)
        assert renyi_divergence(p, u, order, extended=True) == math.inf


def test_low_order_tolerates_partial_support():
    # below order one the divergence is finite when the supports overlap
    p = np.array([0.5, 0.5, 0.0])
    u = np.array([0.5, 0.0, 0.5])
    val = renyi_divergence(p, u, 0.5)
    assert val == pytest.approx(-2.0 * math.log(0.5), abs=1e-12)


@given(distributions(), distributions())
@settings(max_examples=150, deadline=None)
def test_nonnegative_and_monotone_in_order(p_raw, u_raw):
    n = min(p_raw.size, u_raw.size)
    p = p_raw[:n] / p_raw[:n].sum()
    u = u_raw[:n] / u_raw[:n].sum()
    values = [renyi_divergence(p, u, a) for a in (0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 5.0, 20.0)]
    vmax = renyi_divergence(p, u, math.inf)
    assert values[0] >= -1e-12
    for lo, hi in zip(values, values[1:]):
        assert hi >= lo - 1e-9
    assert vmax >= values[-1] - 1e-9


@given(distributions())
@settings(max_examples=100, deadline=None)
def test_zero_iff_equal(p):
    u = uniform_distribution(p.size)
    d = renyi_divergence(p, u, 2.0)
    if np.allclose(p, u, atol=1e-15):
        assert d <= 1e-12
    else:
        assert d > 0.0


def test_continuity_at_order_one():
    # both the series branch (|alpha-1| < 1e-6) and the direct branch just
    # outside it stay within 1e-5 of KL; mixing with uniform bounds the
    # log-ratio variance so the genuine O(alpha-1) gap stays below tolerance
    rng = np.random.default_rng(0)
    uniform = uniform_distribution(6)
    for _ in range(50):
        p = 0.9 * rng.dirichlet(np.ones(6)) + 0.1 * uniform
        u = 0.9 * rng.dirichlet(np.ones(6)) + 0.1 * uniform
        kl = renyi_divergence(p, u, 1.0)
        for eps in (1e-7, 5e-7, 2e-6):
            for alpha in (1.0 - eps, 1.0 + eps):
                assert renyi_divergence(p, u, alpha) == pytest.approx(kl, abs=1e-5)


def test_near_one_orders_bracket_kl():
    # the divergence is increasing in the order, so values just below and
    # above 1 must bracket KL
    rng = np.random.default_rng(1)
    p = rng.dirichlet(np.ones(5))
    u = rng.dirichlet(np.ones(5))
    kl = renyi_divergence(p, u, 1.0)
    below = renyi_divergence(p, u, 0.999)
    above = renyi_divergence(p, u, 1.001)
    assert below <= kl + 1e-12 <= above + 2e-12
    assert above == pytest.approx(kl, abs=1e-3)


# ---------------------------------------------------------------- entropy


@pytest.mark.parametrize("order", ORDERS)
def test_uniform_entropy_is_log_m(order):
    assert renyi_entropy(uniform_distribution(9), order) == pytest.approx(
        math.log(9), abs=1e-12
    )


def test_normalized_renyi():
    p = np.zeros(9)
    p[:3] = 1 / 3
    u = uniform_distribution(9)
    for order in ORDERS:
        assert normalized_renyi(p, u, order) == pytest.approx(0.5, abs=1e-12)
    assert normalized_renyi(u, u, 2.0) == 0.0


def test_normalized_renyi_rejects_degenerate_reference():
    with pytest.raises(UndefinedNormalizationError):
        normalized_renyi(np.array([1.0, 0.0]), np.array([1.0, 0.0]), 2.0)


# --------------------------------------------------- structure-based metrics


@pytest.fixture(scope="module")
def tsc32():
    params = SchemeParams.tsc(3, 2)
    return [build_structure(params, 1), build_structure(params, 2)]


@pytest.fixture(scope="module")
def alt321():
    params = SchemeParams.alternative(3, 2, 1)
    return [build_structure(params, 1), build_structure(params, 2)]


def test_maximal_leakage_uniform_is_zero(tsc32, alt321):
    for structures in (tsc32, alt321):
        m = structures[0].n_options
        for db in range(3):
            assert maximal_leakage(structures, uniform_distribution(m), db) == pytest.approx(
                0.0, abs=1e-12
            )


def test_maximal_leakage_direct_downloads_by_enumeration(tsc32):
    probs = np.zeros(9)
    probs[:3] = 1 / 3
    # independent oracle: aggregate the transcribed first-column queries
    m1 = aggregate(DB1_QUERIES_THETA1, probs)
    m2 = aggregate(DB1_QUERIES_THETA2, probs)
    expected = math.log(
        sum(max(m1.get(q, 0.0), m2.get(q, 0.0)) for q in set(m1) | set(m2))
    )
    assert expected == pytest.approx(math.log(5 / 3), abs=1e-12)
    assert maximal_leakage(tsc32, probs, 0) == pytest.approx(expected, abs=1e-12)


def test_maximal_leakage_single_message():
    params = SchemeParams.tsc(3, 1)
    structures = [build_structure(params, 1)]
    probs = np.zeros(3)
    probs[0] = 1.0
    assert maximal_leakage(structures, probs, 0) == pytest.approx(0.0, abs=1e-12)


def test_maximal_leakage_at_most_log_k(tsc32):
    rng = np.random.default_rng(3)
    for _ in range(25):
        probs = rng.dirichlet(np.ones(9))
        for db in range(3):
            assert maximal_leakage(tsc32, probs, db) <= math.log(2) + 1e-12


def test_eps_privacy_uniform_zero(tsc32):
    assert eps_privacy(tsc32, uniform_distribution(9), 0) == 0.0


def test_eps_privacy_disjoint_support_infinite(tsc32):
    probs = np.zeros(9)
    probs[:3] = 1 / 3
    assert eps_privacy(tsc32, probs, 0) == math.inf


def test_eps_privacy_two_level_by_enumeration(tsc32):
    # two-level distribution at download cost 1.2
    lam = 2 * 0.2
    probs = np.array([(1 - lam) / 3] * 3 + [lam / 6] * 6)
    m1 = aggregate(DB1_QUERIES_THETA1, probs)
    m2 = aggregate(DB1_QUERIES_THETA2, probs)
    worst = 0.0
    for q in set(m1) | set(m2):
        a, b = m1.get(q, 0.0), m2.get(q, 0.0)
        worst = max(worst, abs(math.log(a / b)))
    got = eps_privacy(tsc32, probs, 0)
    assert got == pytest.approx(worst, abs=1e-12)
    assert got == pytest.approx(math.log(3), abs=1e-12)


def test_mutual_information_uniform_zero(tsc32):
    assert mutual_information_leakage(tsc32, uniform_distribution(9), 0) == 0.0


def test_mutual_information_single_message():
    params = SchemeParams.tsc(2, 1)
    structures = [build_structure(params, 1)]
    assert mutual_information_leakage(structures, [0.25, 0.75], 0) == 0.0


def test_mutual_information_nonuniform_prior(tsc32):
    probs = np.zeros(9)
    probs[:3] = 1 / 3
    prior = np.array([0.8, 0.2])
    m1 = aggregate(DB1_QUERIES_THETA1, probs)
    m2 = aggregate(DB1_QUERIES_THETA2, probs)
    mix = {
        q: prior[0] * m1.get(q, 0.0) + prior[1] * m2.get(q, 0.0)
        for q in set(m1) | set(m2)
    }
    expected = sum(
        w * pq * math.log(pq / mix[q])
        for w, marg in zip(prior, (m1, m2))
        for q, pq in marg.items()
    )
    got = mutual_information_leakage(tsc32, probs, 0, prior=prior)
    assert got == pytest.approx(expected, abs=1e-12)
    assert got < mutual_information_leakage(tsc32, probs, 0)


@pytest.mark.parametrize(
    "params",
    [
        SchemeParams.tsc(2, 2),
        SchemeParams.tsc(3, 3),
        SchemeParams.tsc(4, 2),
        SchemeParams.alternative(3, 3, 1),
        SchemeParams.alternative(4, 2, 2),
        SchemeParams.alternative(4, 3, 1),
    ],
    ids=lambda p: p.label,
)
def test_maximal_leakage_zero_at_uniform_over_grid(params):
    structures = [
        build_structure(params, theta) for theta in range(1, params.n_messages + 1)
    ]
    uniform = uniform_distribution(params.n_options)
    for db in range(params.n_databases):
        assert maximal_leakage(structures, uniform, db) <= 1e-12
        assert maximal_leakage(structures, uniform, db) <= math.log(params.n_messages) + 1e-12


def test_mutual_information_direct_downloads_by_enumeration(tsc32):
    probs = np.zeros(9)
    probs[:3] = 1 / 3
    m1 = aggregate(DB1_QUERIES_THETA1, probs)
    m2 = aggregate(DB1_QUERIES_THETA2, probs)
    mix = {q: 0.5 * m1.get(q, 0.0) + 0.5 * m2.get(q, 0.0) for q in set(m1) | set(m2)}
    expected = 0.0
    for marg in (m1, m2):
        for q, pq in marg.items():
            expected += 0.5 * pq * math.log(pq / mix[q])
    got = mutual_information_leakage(tsc32, probs, 0)
    assert got == pytest.approx(expected, abs=1e-12)
    assert got == pytest.approx((2 / 3) * math.log(2), abs=1e-12)


def test_zero_metrics_coincide(tsc32, alt321):
    rng = np.random.default_rng(11)
    for structures in (tsc32, alt321):
        m = structures[0].n_options
        candidates = [uniform_distribution(m)]
        candidates.extend(rng.dirichlet(np.ones(m)) for _ in range(10))
        for probs in candidates:
            for db in range(3):
                ml = maximal_leakage(structures, probs, db)
                eps = eps_privacy(structures, probs, db)
                mi = mutual_information_leakage(structures, probs, db)
                flags = (ml <= 1e-12, eps <= 1e-12, mi <= 1e-12)
                assert len(set(flags)) == 1, (flags, ml, eps, mi)


def test_mismatched_structures_rejected(tsc32):
    params = SchemeParams.tsc(3, 2)
    with pytest.raises(ParameterError):
        maximal_leakage([tsc32[0], tsc32[0]], uniform_distribution(9), 0)
    other = build_structure(SchemeParams.alternative(3, 2, 1), 2)
    with pytest.raises(ParameterError):
        maximal_leakage([tsc32[0], other], uniform_distribution(9), 0)


# -------------------------------------------------------------- estimators


def test_empirical_distribution_basic():
    assert np.allclose(empirical_distribution([1, 1, 1, 1]), [0.25] * 4)
    assert np.allclose(empirical_distribution([9, 0, 0]), [1.0, 0.0, 0.0])
    assert np.allclose(empirical_distribution([2, 3, 5]), [0.2, 0.3, 0.5])


def test_empirical_distribution_rejects_bad_counts():
    with pytest.raises(ParameterError):
        empirical_distribution([0, 0, 0])
    with pytest.raises(ParameterError):
        empirical_distribution([1, -1])


def test_empirical_distribution_converges():
    rng = np.random.default_rng(1234)
    target = np.array([0.5, 0.25, 0.125, 0.125])
    counts = rng.multinomial(10**6, target)
    emp = empirical_distribution(counts)
    assert total_variation(emp, target) <= 0.01
