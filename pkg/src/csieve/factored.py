"""Exact arithmetic on prime-valuation maps.

A positive integer is held as a finite map prime -> exponent, so sequence
terms whose bit length grows linearly with the index are never materialized.
The recurrence only ever multiplies, so no subtraction/division is needed.
"""

from __future__ import annotations

import math
from typing import Iterator

from .errors import DomainError, ResourceError
from .primes import SpfTable, is_prime_u64


class FactoredNat:
    """A positive integer as a prime -> exponent map; {} is 1.

    Value semantics: equality is map equality, multiplication adds
    valuations pointwise. Iteration and serialization are in ascending
    prime order.
    """

    __slots__ = ("_f",)

    def __init__(self, factors: dict[int, int] | None = None, *, _trusted: bool = False):
        if factors is None:
            self._f: dict[int, int] = {}
            return
        if not _trusted:
            for p, e in factors.items():
                if not isinstance(p, int) or not is_prime_u64(p):
                    raise DomainError(f"key {p!r} is not prime")
                if not isinstance(e, int) or e < 1:
                    raise DomainError(f"exponent {e!r} for prime {p} must be >= 1")
        self._f = dict(factors)

    @classmethod
    def one(cls) -> "FactoredNat":
        return cls()

    def valuation(self, p: int) -> int:
        """Exponent of p, 0 if absent."""
        return self._f.get(p, 0)

    def items(self) -> list[tuple[int, int]]:
        """(prime, exponent) pairs in ascending prime order."""
        return sorted(self._f.items())

    def primes(self) -> Iterator[int]:
        return iter(sorted(self._f))

    def __len__(self) -> int:
        return len(self._f)

    def __bool__(self) -> bool:  # 1 is truthy like any value
        return True

    def __eq__(self, other) -> bool:
        if isinstance(other, FactoredNat):
            return self._f == other._f
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self.items()))

    def __mul__(self, other: "FactoredNat") -> "FactoredNat":
        if not isinstance(other, FactoredNat):
            return NotImplemented
        out = dict(self._f)
        for p, e in other._f.items():
            out[p] = out.get(p, 0) + e
        return FactoredNat(out, _trusted=True)

    def imul_map(self, factors: dict[int, int]) -> None:
        """In-place pointwise add of a trusted factor map (engine hot path)."""
        f = self._f
        for p, e in factors.items():
            f[p] = f.get(p, 0) + e

    def copy(self) -> "FactoredNat":
        return FactoredNat(self._f, _trusted=True)

    def divides(self, other: "FactoredNat") -> bool:
        """Pointwise exponent comparison."""
        g = other._f
        return all(e <= g.get(p, 0) for p, e in self._f.items())

    def to_int(self) -> int:
        """Materialize the represented integer (use only when small)."""
        out = 1
        for p, e in self._f.items():
            out *= p**e
        return out

    def __repr__(self) -> str:
        if not self._f:
            return "FactoredNat(1)"
        body = "*".join(f"{p}^{e}" if e > 1 else str(p) for p, e in self.items())
        return f"FactoredNat({body})"


def factor_map(m: int, table: SpfTable) -> dict[int, int]:
    """Prime -> exponent map of m as a plain dict (insertion order ascending)."""
    if m == 0:
        raise DomainError("cannot factor 0")
    if m < 0:
        raise DomainError(f"cannot factor negative {m}")
    if m <= table.limit:
        spf = table.spf
        out: dict[int, int] = {}
        while m > 1:
            p = int(spf[m])
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out[p] = e
        return out
    return _factor_map_fallback(m, table)


def _factor_map_fallback(m: int, table: SpfTable) -> dict[int, int]:
    """Trial division by sieved primes; complete for m <= limit^2."""
    if m > table.limit * table.limit:
        raise ResourceError(
            f"{m} exceeds the factorization budget (limit^2 = {table.limit**2}); "
            "build a larger SPF table"
        )
    out: dict[int, int] = {}
    root = math.isqrt(m)
    for p in table.primes().tolist():
        if p > root:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out[p] = e
            root = math.isqrt(m)
    if m > 1:
        # remainder has no factor <= sqrt(m), hence prime
        if not is_prime_u64(m):
            raise ResourceError(f"composite cofactor {m} beyond sieve reach")
        out[m] = out.get(m, 0) + 1
    return dict(sorted(out.items()))


def factorize(m: int, table: SpfTable) -> FactoredNat:
    """Factor m into a FactoredNat."""
    return FactoredNat(factor_map(m, table), _trusted=True)


def gcd_with_map(factors: dict[int, int], x: FactoredNat) -> int:
    """gcd of a factored small integer with x, without materializing x."""
    g = 1
    xv = x._f
    for p, e in factors.items():
        v = xv.get(p, 0)
        if v:
            g *= p ** (e if e < v else v)
    return g


def gcd_small(m: int, x: FactoredNat, table: SpfTable) -> int:
    """gcd(m, x) for small m against an arbitrarily large factored x."""
    if m < 1:
        raise DomainError(f"gcd_small requires m >= 1, got {m}")
    return gcd_with_map(factor_map(m, table), x)
