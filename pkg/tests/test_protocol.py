import math

import numpy as np
import pytest

from wpir.errors import DecodeError, ParameterError
from wpir.leakage import total_variation, uniform_distribution
from wpir.optimizer import CostProfile, optimal_distribution
from wpir.protocol import (
    MessageStore,
    answer_query,
    decode,
    random_store,
    retrieve,
    simulate,
    verify_decodability,
)
from wpir.schemes import QueryElement, QueryOption, SchemeParams, build_structure

TSC32 = SchemeParams.tsc(3, 2)


@pytest.fixture(scope="module")
def tsc32_structures():
    return [build_structure(TSC32, 1), build_structure(TSC32, 2)]


# ----------------------------------------------------------- answer queries


def test_direct_download_answers():
    store = MessageStore(np.array([[0xAB, 0xCD], [0x00, 0x00]], dtype=np.uint8))
    structure = build_structure(TSC32, 1)
    ans = answer_query(store, structure.options[0])
    assert ans.per_database == ((0xAB,), (0xCD,), ())
    assert ans.n_symbols == structure.options[0].download_cost


def test_masked_answer_is_xor():
    store = MessageStore(np.array([[0x0F, 0x00], [0xF0, 0x00]], dtype=np.uint8))
    option = QueryOption((
        (QueryElement.of((1, 1), (2, 1)),),
        (),
        (),
    ), 1)
    ans = answer_query(store, option)
    assert ans.per_database[0][0] == 0xFF


def test_zero_store_yields_zero_answers():
    store = MessageStore(np.zeros((2, 2), dtype=np.uint8))
    structure = build_structure(TSC32, 1)
    for option in structure.options:
        ans = answer_query(store, option)
        assert all(v == 0 for db in ans.per_database for v in db)


def test_dangling_symbol_rejected():
    store = MessageStore(np.zeros((1, 1), dtype=np.uint8))
    option = QueryOption(((QueryElement.of((2, 1)),), ()), 1)
    with pytest.raises(ParameterError):
        answer_query(store, option)


# ------------------------------------------------------------------ decode


def test_decode_masked_option_by_hand():
    # option 4 of the 9-option structure: answers are the interference
    # symbol, then each desired symbol masked by it
    store = MessageStore(np.array([[0x11, 0x22], [0x33, 0x5A]], dtype=np.uint8))
    structure = build_structure(TSC32, 1)
    option = structure.options[3]
    ans = answer_query(store, option)
    assert ans.per_database == ((0x33,), (0x11 ^ 0x33,), (0x22 ^ 0x33,))
    assert list(decode(option, ans, 1)) == [0x11, 0x22]


def test_decode_direct_option_passthrough():
    store = MessageStore(np.array([[0x7E, 0x81], [0x42, 0x24]], dtype=np.uint8))
    structure = build_structure(TSC32, 1)
    ans = answer_query(store, structure.options[1])
    assert list(decode(structure.options[1], ans, 1)) == [0x7E, 0x81]


def test_decode_alt_option_by_hand():
    store = MessageStore(np.array([[0x01], [0x02]], dtype=np.uint8))
    structure = build_structure(SchemeParams.alternative(3, 2, 1), 1)
    option = structure.options[3]
    ans = answer_query(store, option)
    assert ans.per_database == ((0x02,), (0x03,), ())
    assert list(decode(option, ans, 1)) == [0x01]


def test_decode_rejects_corrupted_option():
    # a masked element without its bare interference partner is undecodable
    option = QueryOption(((QueryElement.of((1, 1), (2, 1)),), (), ()), 1)
    store = MessageStore(np.array([[0x01], [0x02]], dtype=np.uint8))
    ans = answer_query(store, option)
    with pytest.raises(DecodeError):
        decode(option, ans, 1)


GRID = (
    [SchemeParams.tsc(n, k) for n in (2, 3, 4) for k in (1, 2, 3)]
    + [
        SchemeParams.alternative(n, k, ell)
        for n in (3, 4)
        for k in (1, 2, 3)
        for ell in range(1, n - 1)
    ]
)


@pytest.mark.parametrize("params", GRID, ids=lambda p: p.label)
def test_round_trip_random_stores(params):
    for theta in range(1, params.n_messages + 1):
        structure = build_structure(params, theta)
        verify_decodability(structure, n_stores=25, seed=theta)


# ---------------------------------------------------------------- retrieve


def test_retrieve_point_mass():
    structure = build_structure(TSC32, 1)
    store = random_store(TSC32, 3)
    probs = np.zeros(9)
    probs[0] = 1.0
    transcript = retrieve(store, structure, probs, rng=0)
    assert transcript.option_index == 0
    assert transcript.downloaded_symbols == 2
    assert transcript.decoded_message == tuple(store.message(1))


def test_retrieve_seeded_determinism():
    structure = build_structure(TSC32, 2)
    store = random_store(TSC32, 4)
    t1 = retrieve(store, structure, uniform_distribution(9), rng=99)
    t2 = retrieve(store, structure, uniform_distribution(9), rng=99)
    assert t1 == t2


def test_retrieve_monte_carlo_cost():
    structure = build_structure(TSC32, 1)
    store = random_store(TSC32, 5)
    profile = CostProfile.from_params(TSC32)
    probs = optimal_distribution(profile, 7 / 6, 1.0).probs
    rng = np.random.default_rng(2024)
    total = 0
    n = 20_000
    for _ in range(n):
        total += retrieve(store, structure, probs, rng).downloaded_symbols
    mean_cost = total / (n * TSC32.message_len)
    assert mean_cost == pytest.approx(7 / 6, abs=0.01)


# ---------------------------------------------------------------- simulate


def test_simulate_uniform_matches_perfect_privacy(tsc32_structures):
    store = random_store(TSC32, 6)
    report = simulate(
        store,
        tsc32_structures,
        uniform_distribution(9),
        n_trials=200_000,
        seed=11,
        orders=[1.0, 2.0],
    )
    assert report.n_trials == 200_000
    assert report.option_counts.sum() == 200_000
    assert report.empirical_cost == pytest.approx(4 / 3, abs=0.005)
    assert all(v < 0.005 for v in report.empirical_leakage.values())


def test_simulate_empirical_cost_is_exact_average(tsc32_structures):
    store = random_store(TSC32, 8)
    report = simulate(store, tsc32_structures, uniform_distribution(9), 5_000, seed=2)
    costs = tsc32_structures[0].costs
    expected = float(report.option_counts @ costs) / (5_000 * TSC32.message_len)
    assert report.empirical_cost == expected


def test_simulate_seeded_reports_identical(tsc32_structures):
    store = random_store(TSC32, 9)
    a = simulate(store, tsc32_structures, uniform_distribution(9), 10_000, seed=5, orders=[2.0])
    b = simulate(store, tsc32_structures, uniform_distribution(9), 10_000, seed=5, orders=[2.0])
    assert np.array_equal(a.option_counts, b.option_counts)
    assert a.empirical_cost == b.empirical_cost
    assert a.empirical_leakage == b.empirical_leakage
    assert a.per_db_query_counts == b.per_db_query_counts
    assert a.to_json() == b.to_json()


def test_simulate_single_trial(tsc32_structures):
    store = random_store(TSC32, 10)
    report = simulate(store, tsc32_structures, uniform_distribution(9), 1, seed=0)
    assert report.option_counts.sum() == 1
    assert report.empirical_cost in (1.0, 1.5)


def test_simulate_point_prior_marginals_close(tsc32_structures):
    store = random_store(TSC32, 12)
    n = 200_000
    r1 = simulate(store, tsc32_structures, uniform_distribution(9), n, seed=21, prior=[1, 0])
    r2 = simulate(store, tsc32_structures, uniform_distribution(9), n, seed=22, prior=[0, 1])
    assert r1.theta_counts[1] == 0 and r2.theta_counts[0] == 0
    for db in range(3):
        queries = sorted(set(r1.per_db_query_counts[db]) | set(r2.per_db_query_counts[db]))
        a = np.array([r1.per_db_query_counts[db].get(q, 0) for q in queries]) / n
        b = np.array([r2.per_db_query_counts[db].get(q, 0) for q in queries]) / n
        assert 0.5 * np.abs(a - b).sum() <= 0.01


def test_simulate_transcript_stream(tsc32_structures, tmp_path):
    import io
    import json

    store = random_store(TSC32, 13)
    sink = io.StringIO()
    report = simulate(
        store, tsc32_structures, uniform_distribution(9), 50, seed=3,
        transcript_sink=sink,
    )
    lines = sink.getvalue().splitlines()
    assert len(lines) == 50
    costs = np.zeros(9, dtype=int)
    for line in lines:
        doc = json.loads(line)
        assert doc["theta"] in (1, 2)
        assert doc["downloaded_symbols"] in (2, 3)
        assert doc["decoded_message"] == list(store.message(doc["theta"]))
        costs[doc["option_index"]] += 1
    assert np.array_equal(costs, report.option_counts)
    # audit mode must not change the report
    baseline = simulate(store, tsc32_structures, uniform_distribution(9), 50, seed=3)
    assert np.array_equal(baseline.option_counts, report.option_counts)


def test_simulate_validates_inputs(tsc32_structures):
    store = random_store(TSC32, 1)
    with pytest.raises(ParameterError):
        simulate(store, tsc32_structures, uniform_distribution(9), 0)
    with pytest.raises(ParameterError):
        simulate(store, tsc32_structures[:1], uniform_distribution(9), 10)
