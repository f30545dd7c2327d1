"""End-to-end retrieval protocol simulation.

Messages are vectors of 8-bit symbols in a characteristic-2 alphabet, so
adding and subtracting symbols are both XOR.  Every database holds an
identical replica and answers only its own query: for each nonempty query
element it returns the XOR of the referenced symbols.  The user decodes the
desired message by cancelling the common interference sum (downloaded in
the clear within the same option) out of the masked symbols.

``simulate`` draws the message index from a prior and the option index from
the scheme distribution with a single seeded generator (inverse CDF over
the option index), so identical seeds give identical reports.  The measured
quantities (option frequencies, normalized cost, per-database query counts,
plug-in leakage estimates) depend only on the sampled indices, which lets
the sampling itself run vectorized; each distinct (theta, option) pair that
occurs is additionally round-tripped through answer/decode as a correctness
check.
"""

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DecodeError, ParameterError
from .leakage import (
    as_order,
    empirical_distribution,
    renyi_divergence,
    uniform_distribution,
)
from .schemes import (
    CanonicalQuery,
    QueryOption,
    QueryStructure,
    SchemeParams,
    canonical_query,
    check_distribution,
)

__all__ = [
    "MessageStore",
    "Answer",
    "RetrievalTranscript",
    "SimulationReport",
    "answer_query",
    "decode",
    "retrieve",
    "simulate",
    "verify_decodability",
    "random_store",
]


@dataclass(frozen=True)
class MessageStore:
    """K messages of L byte-symbols each, replicated at every database."""

    messages: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.messages, dtype=np.uint8)
        if arr.ndim != 2:
            raise ParameterError(f"messages must be a (K, L) array, got shape {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "messages", arr)

    @property
    def n_messages(self) -> int:
        return self.messages.shape[0]

    @property
    def message_len(self) -> int:
        return self.messages.shape[1]

    def symbol(self, message_index: int, symbol_index: int) -> int:
        """Look up a symbol by its 1-based labels."""
        return int(self.messages[message_index - 1, symbol_index - 1])

    def message(self, message_index: int) -> np.ndarray:
        return self.messages[message_index - 1]


def random_store(params: SchemeParams, rng) -> MessageStore:
    rng = np.random.default_rng(rng)
    return MessageStore(
        rng.integers(0, 256, size=(params.n_messages, params.message_len), dtype=np.uint8)
    )


@dataclass(frozen=True)
class Answer:
    """Per-database answer symbols, one per nonempty query element."""

    per_database: tuple[tuple[int, ...], ...]

    @property
    def n_symbols(self) -> int:
        return sum(len(db) for db in self.per_database)


@dataclass(frozen=True)
class RetrievalTranscript:
    theta: int
    option_index: int
    queries: tuple[CanonicalQuery, ...]
    answer: Answer
    decoded_message: tuple[int, ...]
    downloaded_symbols: int

    def to_json_line(self) -> str:
        doc = {
            "theta": self.theta,
            "option_index": self.option_index,
            "queries": [
                [["%d:%d" % (k, l) for k, l in elem] for elem in q]
                for q in self.queries
            ],
            "answers": [list(db) for db in self.answer.per_database],
            "decoded_message": list(self.decoded_message),
            "downloaded_symbols": self.downloaded_symbols,
        }
        return json.dumps(doc, separators=(",", ":"))


def _element_value(store: MessageStore, terms) -> int:
    value = 0
    for k, l in terms:
        if not (1 <= k <= store.n_messages and 1 <= l <= store.message_len):
            raise ParameterError(f"symbol W{k}({l}) outside the store dimensions")
        value ^= store.symbol(k, l)
    return value


def answer_query(store: MessageStore, option: QueryOption) -> Answer:
    """What the databases return: the XOR of each nonempty element's symbols.

    Each database computes its entry from its own query only.
    """
    per_db = tuple(
        tuple(_element_value(store, elem.terms) for elem in db if not elem.is_empty)
        for db in option.per_database
    )
    return Answer(per_db)


def decode(option: QueryOption, answer: Answer, theta: int) -> np.ndarray:
    """Recover the desired message from an option's answer.

    Direct elements pass through; masked elements are cancelled against the
    one element carrying the bare interference sum.  Raises DecodeError if
    the option lacks the structure to do so.
    """
    flat: list[tuple[tuple, int]] = []
    for db_elements, db_answers in zip(option.per_database, answer.per_database):
        nonempty = [e for e in db_elements if not e.is_empty]
        if len(nonempty) != len(db_answers):
            raise DecodeError("answer symbols misaligned with query elements")
        flat.extend((e.terms, v) for e, v in zip(nonempty, db_answers))

    pure = {terms: value for terms, value in flat if all(k != theta for k, _ in terms)}
    desired: dict[int, int] = {}
    for terms, value in flat:
        own = [l for k, l in terms if k == theta]
        if not own:
            continue
        if len(own) > 1:
            raise DecodeError(f"element mixes several desired symbols: {terms}")
        rest = tuple(t for t in terms if t[0] != theta)
        if rest:
            if rest not in pure:
                raise DecodeError(f"no bare interference element matching {terms}")
            value ^= pure[rest]
        desired[own[0]] = value

    lengths = sorted(desired)
    if not lengths or lengths != list(range(1, lengths[-1] + 1)):
        raise DecodeError(f"recovered symbol set {lengths} has gaps")
    return np.array([desired[l] for l in lengths], dtype=np.uint8)


def _sample_options(probs: np.ndarray, rng, size: int) -> np.ndarray:
    cdf = np.cumsum(probs)
    u = rng.random(size)
    return np.minimum(np.searchsorted(cdf, u, side="right"), probs.size - 1)


def retrieve(
    store: MessageStore, structure: QueryStructure, probs, rng
) -> RetrievalTranscript:
    """One retrieval: sample an option, query, decode, verify correctness."""
    p = check_distribution(probs, structure.n_options)
    rng = np.random.default_rng(rng)
    m = int(_sample_options(p, rng, 1)[0])
    option = structure.options[m]
    queries = tuple(
        canonical_query(structure, m, db)
        for db in range(structure.params.n_databases)
    )
    answer = answer_query(store, option)
    decoded = decode(option, answer, structure.theta)
    if not np.array_equal(decoded, store.message(structure.theta)):
        raise DecodeError(
            f"decoded message differs from the stored one (option {m}, "
            f"theta {structure.theta})"
        )
    return RetrievalTranscript(
        theta=structure.theta,
        option_index=m,
        queries=queries,
        answer=answer,
        decoded_message=tuple(int(x) for x in decoded),
        downloaded_symbols=option.download_cost,
    )


@dataclass
class SimulationReport:
    n_trials: int
    seed: int
    theta_counts: np.ndarray
    option_counts: np.ndarray
    empirical_cost: float
    empirical_leakage: dict[str, float]
    per_db_query_counts: list[dict[CanonicalQuery, int]]

    def to_json(self) -> str:
        def fmt_query(q: CanonicalQuery) -> str:
            return " ; ".join(
                "+".join(f"{k}:{l}" for k, l in elem) for elem in q
            ) or "-"

        doc = {
            "n_trials": self.n_trials,
            "seed": self.seed,
            "theta_counts": [int(c) for c in self.theta_counts],
            "option_counts": [int(c) for c in self.option_counts],
            "empirical_cost": self.empirical_cost,
            "empirical_leakage": self.empirical_leakage,
            "per_db_query_counts": [
                {fmt_query(q): int(c) for q, c in sorted(db.items())}
                for db in self.per_db_query_counts
            ],
        }
        return json.dumps(doc, indent=2)


def simulate(
    store: MessageStore,
    structures: Sequence[QueryStructure],
    probs,
    n_trials: int,
    seed: int = 0,
    prior=None,
    orders: Sequence = (),
    transcript_sink=None,
) -> SimulationReport:
    """Run ``n_trials`` retrievals with the message index drawn from a prior
    (uniform by default) and aggregate the empirical statistics.

    ``transcript_sink``, if given, receives one JSON line per trial (audit
    mode; slower, but the sampled index streams and the report are identical
    either way).
    """
    structures = sorted(structures, key=lambda s: s.theta)
    if not structures:
        raise ParameterError("need at least one structure")
    params = structures[0].params
    if any(s.params != params for s in structures):
        raise ParameterError("structures must share scheme parameters")
    if [s.theta for s in structures] != list(range(1, params.n_messages + 1)):
        raise ParameterError(
            f"need one structure per message index 1..{params.n_messages}"
        )
    if n_trials < 1:
        raise ParameterError("n_trials must be at least 1")
    k = len(structures)
    p = check_distribution(probs, params.n_options)
    if prior is None:
        prior = uniform_distribution(k)
    prior = check_distribution(prior, k)

    rng = np.random.default_rng(seed)
    thetas = _sample_options(prior, rng, n_trials)
    options = _sample_options(p, rng, n_trials)

    m = params.n_options
    joint = np.bincount(thetas * m + options, minlength=k * m).reshape(k, m)
    theta_counts = joint.sum(axis=1)
    option_counts = joint.sum(axis=0)

    costs = structures[0].costs
    empirical_cost = float(option_counts @ costs) / (n_trials * params.message_len)

    # Spot-check correctness once per distinct (theta, option) pair drawn.
    for t in range(k):
        for opt_idx in np.nonzero(joint[t])[0]:
            option = structures[t].options[int(opt_idx)]
            decoded = decode(option, answer_query(store, option), t + 1)
            if not np.array_equal(decoded, store.message(t + 1)):
                raise DecodeError(
                    f"decode failed for theta {t + 1}, option {int(opt_idx)}"
                )

    if transcript_sink is not None:
        for t_idx, opt_idx in zip(thetas, options):
            structure = structures[int(t_idx)]
            option = structure.options[int(opt_idx)]
            answer = answer_query(store, option)
            transcript = RetrievalTranscript(
                theta=int(t_idx) + 1,
                option_index=int(opt_idx),
                queries=tuple(
                    canonical_query(structure, int(opt_idx), db)
                    for db in range(params.n_databases)
                ),
                answer=answer,
                decoded_message=tuple(
                    int(v) for v in decode(option, answer, int(t_idx) + 1)
                ),
                downloaded_symbols=option.download_cost,
            )
            transcript_sink.write(transcript.to_json_line() + "\n")

    per_db: list[dict[CanonicalQuery, int]] = []
    for db in range(params.n_databases):
        counts: dict[CanonicalQuery, int] = {}
        for t in range(k):
            lookup = [canonical_query(structures[t], i, db) for i in range(m)]
            for opt_idx in np.nonzero(joint[t])[0]:
                q = lookup[int(opt_idx)]
                counts[q] = counts.get(q, 0) + int(joint[t, opt_idx])
        per_db.append(counts)

    emp = empirical_distribution(option_counts)
    uniform = uniform_distribution(m)
    leakage = {
        as_order(o).label: renyi_divergence(emp, uniform, o, extended=True)
        for o in orders
    }

    return SimulationReport(
        n_trials=n_trials,
        seed=seed,
        theta_counts=theta_counts,
        option_counts=option_counts,
        empirical_cost=empirical_cost,
        empirical_leakage=leakage,
        per_db_query_counts=per_db,
    )


def verify_decodability(structure: QueryStructure, n_stores: int = 1000, seed: int = 0) -> int:
    """Round-trip every option against random stores; returns checks done.

    Raises DecodeError on the first failure.
    """
    rng = np.random.default_rng(seed)
    checks = 0
    for _ in range(n_stores):
        store = random_store(structure.params, rng)
        want = store.message(structure.theta)
        for option in structure.options:
            decoded = decode(option, answer_query(store, option), structure.theta)
            if not np.array_equal(decoded, want):
                raise DecodeError(
                    f"decode mismatch for option costing {option.download_cost}"
                )
            checks += 1
    return checks
