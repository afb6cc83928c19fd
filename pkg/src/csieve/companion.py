"""Guaranteed stock companions, per-prime deficits, and the deficit criterion.

At index n the stock-derived quantities are parameterized by the state
*before* the step at n: the stock of recorded prime steps q <= n-1 and the
one-hit counters supply(p) = #{recorded q <= n-1 : p | q + K}. The product
companion divides out of n whatever the stock covers; the one-hit companion
keeps, for each prime p | n, the shortfall of supply against the demand
vp(n). The chain b | product companion | one-hit companion holds throughout,
so a total shortfall of at most 1 pins b to 1 or a prime.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .engine import SequenceState
from .errors import DomainError, InvariantViolation
from .factored import FactoredNat, factor_map, gcd_with_map
from .primes import ApCountQuery, SpfTable, count_primes_in_ap, is_prime_u64

CRITERION_PROVES = "criterion_proves"
CRITERION_SILENT = "criterion_silent"


@dataclass
class DeficitReport:
    """Per-index record of companions, deficits, and consistency checks."""

    n: int
    b: int
    b_product: int
    b_one_hit: FactoredNat
    deficits: dict[int, int] = field(default_factory=dict)
    total_deficit: int = 0
    criterion_pass: bool = False
    chain_ok: bool = False


def s1p(p: int, m: int, k: int = 1, *, budget: int | None = None) -> int:
    """One-hit supply: #{q <= m : q prime, q != 3, q = -K (mod p)}.

    The q = 3 exclusion matters only when 3 lies in the residue class
    -K (mod p); it mirrors the engine's rule of never recording q = 3.
    """
    if not is_prime_u64(p):
        raise DomainError(f"p must be prime, got {p}")
    if m < 0:
        raise DomainError(f"m must be >= 0, got {m}")
    a = (-k) % p
    if a == 0:
        # q = -K (mod p) with q prime forces q = p
        return 1 if (p <= m and p != 3) else 0
    if m < a:
        return 0
    count = count_primes_in_ap(ApCountQuery(p, a, m), budget=budget)
    if m >= 3 and 3 % p == a:
        count -= 1
    return count


def product_companion(n: int, stock: FactoredNat, table: SpfTable) -> int:
    """n / gcd(n, stock): a stock-only multiple of the increment at n."""
    return n // gcd_with_map(factor_map(n, table), stock)


def one_hit_companion(
    n: int,
    s1_provider: Callable[[int], int],
    table: SpfTable,
) -> tuple[FactoredNat, dict[int, int]]:
    """One-hit companion and deficit map at n.

    s1_provider(p) must return the one-hit supply at n-1 for prime p.
    Primes not dividing n have zero demand and are omitted; entries with
    zero shortfall are omitted too.
    """
    deficits: dict[int, int] = {}
    for p, e in factor_map(n, table).items():
        short = e - s1_provider(p)
        if short > 0:
            deficits[p] = short
    return FactoredNat(deficits, _trusted=True), deficits


def check_chain(n: int, b: int, b_product: int, b_one_hit: FactoredNat, table: SpfTable) -> bool:
    """Divisibility chain b | b_product | b_one_hit; False is an alarm."""
    if b_product % b != 0:
        return False
    return all(
        e <= b_one_hit.valuation(p) for p, e in factor_map(b_product, table).items()
    )


def deficit_criterion(report: DeficitReport) -> str:
    """Apply the total-deficit criterion to a completed report.

    A total of <= 1 forces the one-hit companion (hence b) into {1, prime};
    anything else at that point is an implementation bug, not a finding.
    """
    if report.total_deficit > 1:
        return CRITERION_SILENT
    structure_ok = len(report.deficits) <= 1 and all(
        e == 1 for e in report.deficits.values()
    )
    if not structure_ok:
        raise InvariantViolation(
            f"total deficit {report.total_deficit} at n={report.n} but one-hit "
            f"companion {report.b_one_hit!r} is not 1 or prime"
        )
    return CRITERION_PROVES


def deficit_report(m: int, state: SequenceState, table: SpfTable) -> DeficitReport:
    """Build the full report for index m from the pre-step state (n = m-1)."""
    if state.n != m - 1:
        raise DomainError(f"state is at n={state.n}, cannot report index {m}")
    fm = factor_map(m, table)
    b = m // gcd_with_map(fm, state.a_vals)
    b_product = m // gcd_with_map(fm, state.stock_vals)
    counters = state.hit_counters
    deficits: dict[int, int] = {}
    for p, e in fm.items():
        short = e - counters.get(p, 0)
        if short > 0:
            deficits[p] = short
    b_one_hit = FactoredNat(deficits, _trusted=True)
    total = sum(deficits.values())
    report = DeficitReport(
        n=m,
        b=b,
        b_product=b_product,
        b_one_hit=b_one_hit,
        deficits=deficits,
        total_deficit=total,
        criterion_pass=total <= 1,
        chain_ok=check_chain(m, b, b_product, b_one_hit, table),
    )
    deficit_criterion(report)
    return report


def one_hit_to_string(x: FactoredNat) -> str:
    """Render a factored companion as '1' or 'p^e*...' with ascending primes."""
    if len(x) == 0:
        return "1"
    return "*".join(f"{p}^{e}" if e > 1 else str(p) for p, e in x.items())
