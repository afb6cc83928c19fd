"""Streaming engine for the recurrence a_n = K*a_{n-1} + lcm(n, a_{n-1}).

K=1 is the classic sequence (increments b_n), K=2 the twin-prime variant
(increments c_n). Terms are kept as prime-valuation maps; the increment at
index n is n / gcd(n, a_{n-1}), and the term update is the multiplication
a_n = a_{n-1} * (K + increment).

Alongside the term, the engine maintains the guaranteed stock (the product
of (q + K) over recorded prime steps q) and streaming one-hit counters:
counter[p] = number of recorded prime steps q with p | q + K. For K=1 a
prime step q != 3 is recorded unconditionally (the increment q is forced);
for K >= 2 a prime step is recorded only when the increment q is observed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import DomainError, InvariantViolation, ResourceError
from .factored import FactoredNat, factor_map, gcd_with_map
from .primes import SpfTable

CLASS_ONE = "one"
CLASS_PRIME = "prime"
CLASS_COMPOSITE = "composite_counterexample"


@dataclass
class StepRecord:
    """One emitted step: index, increment, term multiplier, class of b."""

    n: int
    b: int
    multiplier: int
    classification: str


@dataclass
class SequenceState:
    """Resumable engine state after completing index n.

    Single-writer: step() must be called sequentially. Independent runs
    (different K) parallelize freely.
    """

    k: int
    n: int = 1
    a_vals: FactoredNat = field(default_factory=FactoredNat)
    stock_vals: FactoredNat = field(default_factory=FactoredNat)
    hit_counters: dict[int, int] = field(default_factory=dict)


def init_state(k: int) -> SequenceState:
    """Fresh state at n = 1 (term value 1)."""
    if k < 1:
        raise DomainError(f"K must be >= 1, got {k}")
    return SequenceState(k=k)


def classify_increment(b: int, table: SpfTable) -> str:
    if b == 1:
        return CLASS_ONE
    if table.is_prime(b):
        return CLASS_PRIME
    return CLASS_COMPOSITE


def step(state: SequenceState, table: SpfTable) -> StepRecord:
    """Advance from n to n+1 and return the emitted record."""
    m = state.n + 1
    if m > table.limit - state.k:
        raise ResourceError(
            f"step to n={m} needs factorization up to {m + state.k}, "
            f"beyond table limit {table.limit}"
        )
    fm = factor_map(m, table)
    b = m // gcd_with_map(fm, state.a_vals)
    if not (1 <= b <= m) or m % b != 0:
        raise InvariantViolation(f"increment b={b} at n={m} violates 1 <= b <= n, b | n")
    multiplier = state.k + b
    state.a_vals.imul_map(factor_map(multiplier, table))
    if table.spf[m] == m and m != 3 and (state.k == 1 or b == m):
        supply = factor_map(m + state.k, table)
        state.stock_vals.imul_map(supply)
        counters = state.hit_counters
        for p in supply:
            counters[p] = counters.get(p, 0) + 1
    state.n = m
    return StepRecord(n=m, b=b, multiplier=multiplier, classification=classify_increment(b, table))


def run(
    k: int,
    n_max: int,
    table: SpfTable,
    sink: Callable[[StepRecord], None] | None = None,
    state: SequenceState | None = None,
) -> SequenceState:
    """Stream records for n = state.n+1 .. n_max; returns the final state."""
    if state is None:
        state = init_state(k)
    elif state.k != k:
        raise DomainError(f"state has K={state.k}, run asked for K={k}")
    if n_max > table.limit - k:
        raise ResourceError(
            f"n_max={n_max} needs factorization up to {n_max + k}, "
            f"beyond table limit {table.limit}"
        )
    while state.n < n_max:
        rec = step(state, table)
        if sink is not None:
            sink(rec)
    return state


def oracle_run(k: int, n_max: int) -> list[int]:
    """Reference increments via full-width integers and Euclid gcd.

    Ground-truth oracle for the factored engine; quadratic-ish in n_max, so
    keep n_max modest (the terms grow by roughly n bits per step).
    """
    if k < 1:
        raise DomainError(f"K must be >= 1, got {k}")
    a = 1
    out: list[int] = []
    for n in range(2, n_max + 1):
        b = n // math.gcd(n, a)
        a = k * a + math.lcm(n, a)
        out.append(b)
    return out
