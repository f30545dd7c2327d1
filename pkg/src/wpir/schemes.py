"""Probabilistic PIR query structures.

Builds the full option table a user draws from when retrieving message
``theta`` out of ``K`` messages replicated across ``N`` databases.  Two
constructions are supported:

* ``TSC``: message length is pinned to ``L = N - 1``; every option costs
  ``N - 1`` or ``N`` downloaded symbols and there are ``N**K`` options.
* ``ALTERNATIVE``: a shorter-message variant with ``1 <= L <= N - 2``;
  options cost ``L`` or ``L + 1`` symbols and there are
  ``N * (L + 1)**(K - 1)`` of them.

Both share the same recipe.  The first ``N`` options download the desired
symbols directly (one per database, all cyclic shifts across databases).
Every further option picks a nonempty subset of the other messages and one
symbol from each, downloads that interference sum from one database, and
downloads each desired symbol masked by the same sum from the next ``L``
databases; again all cyclic shifts are included.

Ordering contract: options are emitted with direct downloads first, then
interference options grouped by (message subset, symbol choice) in
lexicographic order, with the ``N`` cyclic shifts of each group adjacent.
The first ``N`` options are exactly the low-cost ones, which downstream
optimization relies on.

Conventions: message and symbol indices are 1-based labels (``W2(1)`` is
symbol 1 of message 2, ``theta`` ranges over ``1..K``), while options and
databases are 0-based positions into the Python sequences that hold them.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, product
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DistributionError, ParameterError

__all__ = [
    "SchemeKind",
    "SchemeParams",
    "SymbolRef",
    "QueryElement",
    "QueryOption",
    "QueryStructure",
    "CanonicalQuery",
    "build_structure",
    "canonical_query",
    "per_db_query_distribution",
    "check_distribution",
    "format_element",
    "format_db_query",
    "structure_to_json",
    "structure_from_json",
]

EMPTY_QUERY_SYMBOL = "∅"

# Tolerance on sum(probs) == 1 for user-supplied distributions.
PROB_SUM_TOL = 1e-12


class SchemeKind(Enum):
    TSC = "tsc"
    ALTERNATIVE = "alt"


@dataclass(frozen=True)
class SchemeParams:
    """The (N, K, L, kind) tuple naming one query structure family."""

    n_databases: int
    n_messages: int
    message_len: int
    kind: SchemeKind

    def __post_init__(self):
        n, k, ell = self.n_databases, self.n_messages, self.message_len
        if n < 2:
            raise ParameterError(f"need at least 2 databases, got {n}")
        if k < 1:
            raise ParameterError(f"need at least 1 message, got {k}")
        if self.kind is SchemeKind.TSC and ell != n - 1:
            raise ParameterError(
                f"TSC fixes message_len = n_databases - 1 = {n - 1}, got {ell}"
            )
        if self.kind is SchemeKind.ALTERNATIVE and not 1 <= ell <= n - 2:
            raise ParameterError(
                f"alternative scheme needs 1 <= message_len <= {n - 2}, got {ell}"
            )

    @classmethod
    def tsc(cls, n_databases: int, n_messages: int) -> "SchemeParams":
        return cls(n_databases, n_messages, n_databases - 1, SchemeKind.TSC)

    @classmethod
    def alternative(
        cls, n_databases: int, n_messages: int, message_len: int
    ) -> "SchemeParams":
        return cls(n_databases, n_messages, message_len, SchemeKind.ALTERNATIVE)

    @property
    def n_options(self) -> int:
        """Total number of query options M."""
        return self.n_databases * (self.message_len + 1) ** (self.n_messages - 1)

    @property
    def low_cost(self) -> int:
        """Download cost (in symbols) of the direct-download options."""
        return self.message_len

    @property
    def high_cost(self) -> int:
        """Download cost (in symbols) of the interference-masked options."""
        return self.message_len + 1

    @property
    def label(self) -> str:
        return f"{self.kind.value}(N={self.n_databases},K={self.n_messages},L={self.message_len})"


class SymbolRef(NamedTuple):
    """Reference to one message symbol, both indices 1-based."""

    message_index: int
    symbol_index: int


@dataclass(frozen=True)
class QueryElement:
    """One requested value: the sum of the referenced symbols.

    ``terms`` is kept sorted and duplicate-free; all sums have coefficient 1
    over a characteristic-2 alphabet, so a duplicated term would cancel.
    """

    terms: tuple[SymbolRef, ...]

    def __post_init__(self):
        ordered = tuple(sorted(SymbolRef(*t) for t in self.terms))
        if len(set(ordered)) != len(ordered):
            raise ParameterError(f"duplicate symbol in query element: {ordered}")
        object.__setattr__(self, "terms", ordered)

    @classmethod
    def of(cls, *refs: tuple[int, int]) -> "QueryElement":
        return cls(tuple(SymbolRef(*r) for r in refs))

    @property
    def is_empty(self) -> bool:
        return not self.terms


@dataclass(frozen=True)
class QueryOption:
    """One complete per-database query assignment and its download cost."""

    per_database: tuple[tuple[QueryElement, ...], ...]
    download_cost: int

    def __post_init__(self):
        n_nonempty = sum(
            1 for db in self.per_database for elem in db if not elem.is_empty
        )
        if n_nonempty != self.download_cost:
            raise ParameterError(
                f"download_cost {self.download_cost} != {n_nonempty} nonempty elements"
            )


@dataclass(frozen=True)
class QueryStructure:
    """The full ordered option table for retrieving message ``theta``."""

    params: SchemeParams
    theta: int
    options: tuple[QueryOption, ...] = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.theta <= self.params.n_messages:
            raise ParameterError(
                f"theta must be in 1..{self.params.n_messages}, got {self.theta}"
            )
        if len(self.options) != self.params.n_options:
            raise ParameterError(
                f"expected {self.params.n_options} options, got {len(self.options)}"
            )

    @property
    def n_options(self) -> int:
        return len(self.options)

    @property
    def costs(self) -> np.ndarray:
        return np.array([opt.download_cost for opt in self.options], dtype=np.int64)


# A canonical per-database query: sorted tuple of sorted term tuples with
# empty elements dropped.  Hashable, independent of which theta produced it.
CanonicalQuery = tuple[tuple[SymbolRef, ...], ...]


def _shifted(base: list[tuple[QueryElement, ...]], shift: int) -> tuple:
    n = len(base)
    return tuple(base[(db - shift) % n] for db in range(n))


def _bases(params: SchemeParams, theta: int) -> Iterator[list]:
    """Yield the unshifted per-database layouts in the contract order."""
    n, k, ell = params.n_databases, params.n_messages, params.message_len
    desired = [QueryElement.of((theta, j)) for j in range(1, ell + 1)]

    # Direct downloads: desired symbols in the first L databases.
    yield [(elem,) for elem in desired] + [()] * (n - ell)

    others = [m for m in range(1, k + 1) if m != theta]
    for size in range(1, k):
        for subset in combinations(others, size):
            for labels in product(range(1, ell + 1), repeat=size):
                interference = tuple(
                    SymbolRef(m, l) for m, l in zip(subset, labels)
                )
                masked = [
                    QueryElement(interference + (SymbolRef(theta, j),))
                    for j in range(1, ell + 1)
                ]
                yield (
                    [(QueryElement(interference),)]
                    + [(elem,) for elem in masked]
                    + [()] * (n - ell - 1)
                )


def build_structure(params: SchemeParams, theta: int) -> QueryStructure:
    """Construct the complete option table for retrieving message ``theta``.

    Deterministic: repeated calls return identical structures.
    """
    if not 1 <= theta <= params.n_messages:
        raise ParameterError(
            f"theta must be in 1..{params.n_messages}, got {theta}"
        )
    options = []
    for base in _bases(params, theta):
        cost = sum(1 for db in base for elem in db if not elem.is_empty)
        for shift in range(params.n_databases):
            options.append(QueryOption(_shifted(base, shift), cost))
    return QueryStructure(params, theta, tuple(options))


def canonical_query(
    structure: QueryStructure, option_index: int, db_index: int
) -> CanonicalQuery:
    """Canonical form of the query option ``option_index`` sends to database
    ``db_index`` (both 0-based): empty elements dropped, terms and elements
    sorted, as a hashable value.

    Two queries requesting identical symbol sums canonicalize identically no
    matter which theta generated them.
    """
    if not 0 <= option_index < structure.n_options:
        raise ParameterError(f"option index {option_index} out of range")
    if not 0 <= db_index < structure.params.n_databases:
        raise ParameterError(f"database index {db_index} out of range")
    elements = structure.options[option_index].per_database[db_index]
    return tuple(sorted(elem.terms for elem in elements if not elem.is_empty))


def check_distribution(probs, n: int | None = None) -> np.ndarray:
    """Validate a probability vector and return it as a float array."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1:
        raise DistributionError(f"expected a 1-d probability vector, got shape {p.shape}")
    if n is not None and p.size != n:
        raise DistributionError(f"expected length {n}, got {p.size}")
    if p.size == 0:
        raise DistributionError("empty probability vector")
    if np.any(p < 0):
        raise DistributionError(f"negative probability: min = {p.min()}")
    total = p.sum()
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise DistributionError(f"probabilities sum to {total}, not 1")
    return p


def per_db_query_distribution(
    structure: QueryStructure, probs, db_index: int
) -> dict[CanonicalQuery, float]:
    """Marginal distribution of the canonical query seen at one database.

    Queries carrying no probability are omitted, so the keys are exactly the
    support.
    """
    p = check_distribution(probs, structure.n_options)
    out: dict[CanonicalQuery, float] = {}
    for m in range(structure.n_options):
        if p[m] > 0.0:
            q = canonical_query(structure, m, db_index)
            out[q] = out.get(q, 0.0) + float(p[m])
    return out


def format_element(element: QueryElement) -> str:
    """Render one element as e.g. ``W1(2)+W2(1)``."""
    return "+".join(f"W{k}({l})" for k, l in element.terms)


def format_db_query(elements: tuple[QueryElement, ...], empty: str = EMPTY_QUERY_SYMBOL) -> str:
    parts = [format_element(e) for e in elements if not e.is_empty]
    return " ; ".join(parts) if parts else empty


def structure_to_json(structure: QueryStructure) -> str:
    """Serialize a structure to the documented JSON shape.

    ``{"params": {...}, "theta": t, "options": [{"per_database": [[["k:l", ...],
    ...], ...], "cost": c}, ...]}`` where each database holds a list of
    elements and each element is a list of ``"message:symbol"`` strings.
    """
    doc = {
        "params": {
            "kind": structure.params.kind.value,
            "n_databases": structure.params.n_databases,
            "n_messages": structure.params.n_messages,
            "message_len": structure.params.message_len,
        },
        "theta": structure.theta,
        "options": [
            {
                "per_database": [
                    [[f"{k}:{l}" for k, l in elem.terms] for elem in db]
                    for db in opt.per_database
                ],
                "cost": opt.download_cost,
            }
            for opt in structure.options
        ],
    }
    return json.dumps(doc, indent=2)


def structure_from_json(text: str) -> QueryStructure:
    doc = json.loads(text)
    p = doc["params"]
    params = SchemeParams(
        p["n_databases"], p["n_messages"], p["message_len"], SchemeKind(p["kind"])
    )
    options = []
    for opt in doc["options"]:
        per_db = tuple(
            tuple(
                QueryElement(
                    tuple(SymbolRef(*map(int, ref.split(":"))) for ref in elem)
                )
                for elem in db
            )
            for db in opt["per_database"]
        )
        options.append(QueryOption(per_db, opt["cost"]))
    return QueryStructure(params, doc["theta"], tuple(options))
