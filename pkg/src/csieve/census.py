"""Desk-scale empirical verification: density census, regime bucketing,
sieve-lemma bound checks, and the K=2 twin-prime inhibition census.

The asymptotic thresholds P_small = (log x)^(2B+10) and Q = sqrt(x)/(log x)^B
are devices for large x; with the default constants P_small exceeds any
feasible horizon, so the medium regime is vacuous at desk scale. All
thresholds are therefore overridable, and every report embeds the effective
values it ran with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .companion import DeficitReport, deficit_report
from .engine import (
    CLASS_COMPOSITE,
    CLASS_ONE,
    CLASS_PRIME,
    SequenceState,
    StepRecord,
    init_state,
    step,
)
from .errors import DomainError, InvariantViolation
from .factored import factor_map
from .primes import SpfTable, li, mertens_tail_sum, primes_upto

DEFICIT_HISTOGRAM_CAP = 32

BUCKET_LARGE_SQUARE = "a"
BUCKET_TWO_LARGE = "b"
BUCKET_MEDIUM_EXCEPTION = "c"


@dataclass(frozen=True)
class RegimeConfig:
    """Thresholds for the three-regime classification at horizon x.

    Defaults follow the BV-constant choice A=10, B=A+5/2=12.5 and error
    tolerance eps(x) = (log x)^-5. Derived thresholds are recomputed on
    access, never stored.
    """

    x: int
    bv_a: float = 10.0
    bv_b: float = 12.5
    eps_exponent: float = 5.0
    p_small_override: int | None = None
    q_override: int | None = None
    grid_ratio: float = 1.01

    def __post_init__(self):
        if self.x < 16:
            raise DomainError(f"x must be >= 16, got {self.x}")
        if self.bv_b < 3:
            raise DomainError(f"B must be >= 3, got {self.bv_b}")
        if self.grid_ratio <= 1:
            raise DomainError("grid ratio must exceed 1")

    @property
    def p_small(self) -> float:
        if self.p_small_override is not None:
            return float(self.p_small_override)
        return math.log(self.x) ** (2 * self.bv_b + 10)

    @property
    def q_threshold(self) -> float:
        if self.q_override is not None:
            return float(self.q_override)
        return math.sqrt(self.x) / math.log(self.x) ** self.bv_b

    @property
    def eps(self) -> float:
        return math.log(self.x) ** (-self.eps_exponent)

    def medium_range(self) -> tuple[float, float]:
        return self.p_small, self.q_threshold

    def medium_is_vacuous(self) -> bool:
        lo, hi = self.medium_range()
        return lo >= hi

    def as_dict(self) -> dict:
        return {
            "x": self.x,
            "bv_a": self.bv_a,
            "bv_b": self.bv_b,
            "eps_exponent": self.eps_exponent,
            "p_small_override": self.p_small_override,
            "q_override": self.q_override,
            "grid_ratio": self.grid_ratio,
            "effective_p_small": self.p_small,
            "effective_q": self.q_threshold,
            "effective_eps": self.eps,
            "medium_vacuous": self.medium_is_vacuous(),
        }


@dataclass
class TwinCensus:
    """Evidence counters for the K=2 inhibition mechanism."""

    n_max: int
    pairs_examined: int = 0
    c_p_equals_p: int = 0
    inhibition_verified: int = 0
    inhibition_violations: int = 0
    forced_one_primes: list[int] = field(default_factory=list)
    converse_check_failures: list[int] = field(default_factory=list)


@dataclass
class CensusReport:
    """Aggregates over one streaming pass of the recurrence to n_max."""

    k: int
    n_max: int
    config: dict
    counts: dict[str, int]
    deficit_histogram: dict[int, int]
    deficit_overflow: int
    criterion_density: float
    obstruction_buckets: dict[str, int]
    composite_rows: list[StepRecord] = field(default_factory=list)
    chain_failures: list[int] = field(default_factory=list)
    twin: TwinCensus | None = None

    @property
    def has_findings(self) -> bool:
        if self.counts.get(CLASS_COMPOSITE, 0) or self.chain_failures:
            return True
        return bool(self.twin and self.twin.converse_check_failures)


def classify_obstruction(
    n: int,
    config: RegimeConfig,
    table: SpfTable,
    bad_primes_set: frozenset[int] = frozenset(),
) -> set[str]:
    """Large-prime obstruction buckets for n, from its exact factorization.

    'a': some prime p > Q with p^2 | n; 'b': two distinct primes > Q divide
    n; 'c': n is divisible by a flagged bad medium prime. Medium-regime
    deficits (the other route into 'c') need engine state and are added by
    the census stream, not here. Empty set means unobstructed.
    """
    return _classify_factors(factor_map(n, table), config.q_threshold, bad_primes_set)


def _classify_factors(
    factors: dict[int, int], q_threshold: float, bad_primes_set: frozenset[int]
) -> set[str]:
    out: set[str] = set()
    n_large = 0
    for p, e in factors.items():
        if p > q_threshold:
            n_large += 1
            if e >= 2:
                out.add(BUCKET_LARGE_SQUARE)
        if p in bad_primes_set:
            out.add(BUCKET_MEDIUM_EXCEPTION)
    if n_large >= 2:
        out.add(BUCKET_TWO_LARGE)
    return out


@dataclass
class BadPrimesScan:
    """Medium primes whose AP error exceeds eps(x) * Li(x)/(p-1) on a y-grid."""

    vacuous: bool
    flagged: list[int]
    reciprocal_sum: float
    p_small: float
    q_threshold: float
    eps: float
    grid_size: int


def bad_primes(config: RegimeConfig, table: SpfTable) -> BadPrimesScan:
    """Grid-evaluated max_y |pi(y;p,-1) - Li(y)/(p-1)| test over medium primes.

    The geometric grid bounds the true max from below, which can only
    under-flag, never over-flag. A degenerate medium range returns the
    explicit vacuous marker.
    """
    lo, hi = config.medium_range()
    if config.medium_is_vacuous():
        return BadPrimesScan(
            vacuous=True, flagged=[], reciprocal_sum=0.0,
            p_small=lo, q_threshold=hi, eps=config.eps, grid_size=0,
        )
    x = config.x
    if x > table.limit:
        raise DomainError(f"census horizon {x} exceeds table limit {table.limit}")
    primes = table.primes()
    mediums = primes[(primes > lo) & (primes <= hi)]
    grid = []
    y = float(x)
    while y >= 2.0:
        grid.append(y)
        y /= config.grid_ratio
    grid_arr = np.array(sorted(grid))
    li_grid = np.array([li(v) for v in grid_arr.tolist()])
    li_x = li(x)
    flagged: list[int] = []
    for p in mediums.tolist():
        qs = primes[primes % p == p - 1]
        counts = np.searchsorted(qs, grid_arr, side="right")
        err = np.abs(counts - li_grid / (p - 1))
        if float(err.max(initial=0.0)) > config.eps * li_x / (p - 1):
            flagged.append(int(p))
    rsum = math.fsum(1.0 / p for p in flagged)
    return BadPrimesScan(
        vacuous=False, flagged=flagged, reciprocal_sum=rsum,
        p_small=lo, q_threshold=hi, eps=config.eps, grid_size=len(grid_arr),
    )


@dataclass
class SieveLemmaCheck:
    """Exact counts against the two explicit large-prime sieve bounds."""

    x: int
    q_threshold: int
    large_square_count: int
    large_square_bound: float
    two_large_count: int        # both primes in (Q, sqrt(x)], the set the bound covers
    two_large_bound: float
    two_large_full_count: int   # any two distinct primes > Q (reported, unbounded here)

    @property
    def ok(self) -> bool:
        return (
            self.large_square_count <= self.large_square_bound
            and self.two_large_count <= self.two_large_bound
        )


def check_sieve_lemmas(x: int, q_threshold: int, table: SpfTable) -> SieveLemmaCheck:
    """Count large-square and two-large-prime integers up to x, exactly.

    The explicit bounds are theorems (x/Q and (x/2) * (sum 1/p)^2 with the
    sum over (Q, sqrt x]); a violated bound aborts. The two-large bound
    covers pairs with both primes at most sqrt(x) -- the count over the
    wider set (one factor allowed past sqrt x) is reported alongside.
    """
    if x < 4 or q_threshold < 2:
        raise DomainError(f"need x >= 4 and Q >= 2, got x={x} Q={q_threshold}")
    if x > table.limit:
        raise DomainError(f"x={x} exceeds table limit {table.limit}")
    primes = table.primes()
    root = math.isqrt(x)

    marked = np.zeros(x + 1, dtype=bool)
    for p in primes[(primes > q_threshold) & (primes <= root)].tolist():
        marked[p * p :: p * p] = True
    count_sq = int(marked.sum())

    large = primes[primes > q_threshold]
    large_list = large.tolist()
    marked_full = np.zeros(x + 1, dtype=bool)
    marked_pairs = np.zeros(x + 1, dtype=bool)
    for i, p1 in enumerate(large_list):
        if i + 1 >= len(large_list) or p1 * large_list[i + 1] > x:
            break
        for p2 in large_list[i + 1 :]:
            m = p1 * p2
            if m > x:
                break
            marked_full[m::m] = True
            if p2 <= root:
                marked_pairs[m::m] = True
    count_two = int(marked_pairs.sum())
    count_two_full = int(marked_full.sum())

    bound_sq = x / q_threshold
    tail = mertens_tail_sum(q_threshold, max(root, q_threshold + 1))
    bound_two = (x / 2.0) * tail * tail
    result = SieveLemmaCheck(
        x=x, q_threshold=q_threshold,
        large_square_count=count_sq, large_square_bound=bound_sq,
        two_large_count=count_two, two_large_bound=bound_two,
        two_large_full_count=count_two_full,
    )
    if count_sq > bound_sq:
        raise InvariantViolation(
            f"large-square count {count_sq} exceeds proven bound {bound_sq}"
        )
    if count_two > bound_two:
        raise InvariantViolation(
            f"two-large-prime count {count_two} exceeds proven bound {bound_two}"
        )
    return result


def stream_rows(
    k: int,
    n_max: int,
    table: SpfTable,
    state: SequenceState | None = None,
):
    """Yield (StepRecord, DeficitReport) for n = 2..n_max in order."""
    if state is None:
        state = init_state(k)
    while state.n < n_max:
        report = deficit_report(state.n + 1, state, table)
        rec = step(state, table)
        yield rec, report


def run_density_census(
    k: int,
    n_max: int,
    config: RegimeConfig | None = None,
    table: SpfTable | None = None,
    *,
    row_sink: Callable[[StepRecord, DeficitReport], None] | None = None,
    include_twin: bool = False,
) -> CensusReport:
    """Single streaming pass filling classification, deficit, and bucket tallies."""
    if n_max < 2:
        raise DomainError(f"n_max must be >= 2, got {n_max}")
    if table is None:
        from .primes import build_spf

        table = build_spf(n_max + k + 1)
    if config is None:
        config = RegimeConfig(x=max(n_max, 16))
    bad_set: frozenset[int] = frozenset()
    if not config.medium_is_vacuous():
        bad_set = frozenset(bad_primes(config, table).flagged)
    lo, hi = config.medium_range()
    q_threshold = config.q_threshold

    counts = {CLASS_ONE: 0, CLASS_PRIME: 0, CLASS_COMPOSITE: 0}
    hist: dict[int, int] = {}
    overflow = 0
    buckets = {BUCKET_LARGE_SQUARE: 0, BUCKET_TWO_LARGE: 0, BUCKET_MEDIUM_EXCEPTION: 0}
    criterion_hits = 0
    composite_rows: list[StepRecord] = []
    chain_failures: list[int] = []

    state = init_state(k)
    while state.n < n_max:
        m = state.n + 1
        report = deficit_report(m, state, table)
        rec = step(state, table)
        counts[rec.classification] += 1
        if rec.classification == CLASS_COMPOSITE:
            composite_rows.append(rec)
        if not report.chain_ok:
            chain_failures.append(m)
        total = report.total_deficit
        if total <= 1:
            criterion_hits += 1
        if total <= DEFICIT_HISTOGRAM_CAP:
            hist[total] = hist.get(total, 0) + 1
        else:
            overflow += 1
        fm = factor_map(m, table)
        tags = _classify_factors(fm, q_threshold, bad_set)
        if BUCKET_MEDIUM_EXCEPTION not in tags:
            for p in report.deficits:
                if lo < p <= hi:
                    tags.add(BUCKET_MEDIUM_EXCEPTION)
                    break
        for tag in tags:
            buckets[tag] += 1
        if row_sink is not None:
            row_sink(rec, report)

    twin = twin_census(n_max, table) if include_twin and k == 2 else None
    return CensusReport(
        k=k,
        n_max=n_max,
        config=config.as_dict(),
        counts=counts,
        deficit_histogram=dict(sorted(hist.items())),
        deficit_overflow=overflow,
        criterion_density=criterion_hits / (n_max - 1),
        obstruction_buckets=buckets,
        composite_rows=composite_rows,
        chain_failures=chain_failures,
        twin=twin,
    )


def twin_census(n_max: int, table: SpfTable | None = None) -> TwinCensus:
    """Stream the K=2 run and tally the twin-pair inhibition evidence.

    An inhibition violation (c_p = p at a twin-lower p without c_{p+2} = 1)
    is a proven impossibility and aborts; a forced-1 prime q whose q-2 is
    composite is a reportable finding, logged in the census.
    """
    if n_max < 2:
        raise DomainError(f"n_max must be >= 2, got {n_max}")
    if table is None:
        from .primes import build_spf

        table = build_spf(n_max + 3)
    state = init_state(2)
    c_at_prime: dict[int, int] = {}
    spf = table.spf
    while state.n < n_max:
        rec = step(state, table)
        if spf[rec.n] == rec.n:
            c_at_prime[rec.n] = rec.b

    census = TwinCensus(n_max=n_max)
    prime_list = [int(p) for p in primes_upto(n_max)]
    prime_set = set(prime_list)
    for p in prime_list:
        if p + 2 in prime_set:
            census.pairs_examined += 1
            if c_at_prime[p] == p:
                census.c_p_equals_p += 1
                if c_at_prime[p + 2] == 1:
                    census.inhibition_verified += 1
                else:
                    census.inhibition_violations += 1
                    raise InvariantViolation(
                        f"inhibition failed at twin pair ({p}, {p + 2}): "
                        f"c_p = {c_at_prime[p]}, c_(p+2) = {c_at_prime[p + 2]}"
                    )
        if p >= 5 and c_at_prime[p] == 1:
            census.forced_one_primes.append(p)
            if p - 2 not in prime_set:
                census.converse_check_failures.append(p)
    return census
