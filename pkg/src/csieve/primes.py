"""Shared prime infrastructure.

Smallest-prime-factor tables, deterministic 64-bit primality, exact prime
counting in arithmetic progressions, Mertens-type reciprocal sums, and the
logarithmic integral. Everything here is exact except ``li``, which is
numerical quadrature with a stated tolerance.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceError

DEFAULT_SCAN_BUDGET = 10**8
DEFAULT_SPF_BUDGET = 2**31

# An AP scan walks candidates a, a+p, a+2p, ...; up to this many candidates
# it is a stepped primality scan, beyond it a sieve over the index space.
STEPPED_SCAN_MAX = 10**7
_PLAIN_LOOP_MAX = 10**5

# Strong-pseudoprime witnesses covering every modulus below 3.3e24 > 2^64.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_LI_REL_TOL = 1e-9
_LI_ABS_FLOOR = 1e-12


def scan_budget() -> int:
    """Primality-test budget per AP scan (env CSIEVE_SCAN_BUDGET)."""
    raw = os.environ.get("CSIEVE_SCAN_BUDGET", "")
    return int(raw) if raw else DEFAULT_SCAN_BUDGET


def spf_limit_env() -> int | None:
    raw = os.environ.get("CSIEVE_SPF_LIMIT", "")
    return int(raw) if raw else None


def is_prime_u64(m: int) -> bool:
    """Deterministic Miller-Rabin for 0 <= m < 2^64."""
    if m < 0 or m >> 64:
        raise DomainError(f"is_prime_u64 expects 0 <= m < 2^64, got {m}")
    if m < 2:
        return False
    for r in _MR_WITNESSES:
        if m % r == 0:
            return m == r
    if m < 41 * 41:
        return True
    d = m - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_WITNESSES:
        x = pow(a, d, m)
        if x == 1 or x == m - 1:
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def sieve_is_prime(limit: int) -> np.ndarray:
    """Boolean primality array for 0..limit."""
    if limit < 1:
        raise DomainError("sieve limit must be >= 1")
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return flags


def primes_upto(limit: int) -> np.ndarray:
    """All primes <= limit, ascending, as int64."""
    return np.flatnonzero(sieve_is_prime(limit)).astype(np.int64)


@dataclass(frozen=True)
class SpfTable:
    """Smallest-prime-factor table for 2..limit.

    spf[m] is the least prime dividing m; spf[m] == m iff m is prime.
    Immutable after construction; safe to share across threads.
    """

    limit: int
    spf: np.ndarray
    _primes: list = field(default_factory=list, repr=False, compare=False)

    def is_prime(self, m: int) -> bool:
        if 2 <= m <= self.limit:
            return int(self.spf[m]) == m
        return is_prime_u64(m)

    def primes(self) -> np.ndarray:
        """Primes <= limit (cached)."""
        if not self._primes:
            idx = np.flatnonzero(
                self.spf[2:] == np.arange(2, self.limit + 1, dtype=self.spf.dtype)
            )
            self._primes.append((idx + 2).astype(np.int64))
        return self._primes[0]


def build_spf(limit: int, *, budget: int | None = None) -> SpfTable:
    """Sieve the smallest-prime-factor table up to ``limit`` inclusive."""
    if limit < 2:
        raise DomainError("build_spf requires limit >= 2")
    budget = budget if budget is not None else DEFAULT_SPF_BUDGET
    if limit + 1 > budget:
        raise ResourceError(
            f"SPF table of {limit + 1} entries exceeds budget of {budget} "
            "(set CSIEVE_SPF_LIMIT or pass budget= to raise it)"
        )
    dtype = np.uint32 if limit < 2**32 else np.uint64
    spf = np.zeros(limit + 1, dtype=dtype)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            spf[p] = p
            sl = spf[p * p :: p]
            sl[sl == 0] = p
    rest = np.flatnonzero(spf[2:] == 0).astype(np.int64) + 2
    spf[rest] = rest
    return SpfTable(limit=limit, spf=spf)


@dataclass(frozen=True)
class ApCountQuery:
    """Count primes q <= bound with q = residue (mod modulus)."""

    modulus: int
    residue: int
    bound: int

    def __post_init__(self):
        if self.modulus < 2 or not is_prime_u64(self.modulus):
            raise DomainError(f"modulus must be prime, got {self.modulus}")
        if not 0 < self.residue < self.modulus:
            raise DomainError(
                f"residue must satisfy 0 < a < p, got a={self.residue} p={self.modulus}"
            )
        if self.bound < 0:
            raise DomainError(f"bound must be >= 0, got {self.bound}")


def count_primes_in_ap(query: ApCountQuery, *, budget: int | None = None) -> int:
    """Exact pi(bound; modulus, residue).

    Stepped scan with is_prime_u64 when the candidate count is small,
    a sieve over the progression's index space otherwise.
    """
    p, a, y = query.modulus, query.residue, query.bound
    if y < a:
        return 0
    n_candidates = (y - a) // p + 1
    limit = budget if budget is not None else scan_budget()
    if n_candidates > limit:
        raise ResourceError(
            f"AP scan of {n_candidates} candidates (p={p}, y={y}) exceeds "
            f"scan budget {limit} (CSIEVE_SCAN_BUDGET)"
        )
    if n_candidates <= _PLAIN_LOOP_MAX:
        return sum(1 for q in range(a, y + 1, p) if is_prime_u64(q))
    if n_candidates <= STEPPED_SCAN_MAX:
        return _count_ap_screened(p, a, y, n_candidates)
    return _count_ap_sieve(p, a, y, n_candidates)


def _count_ap_screened(p: int, a: int, y: int, n_candidates: int) -> int:
    """Stepped scan, batched: small-prime screen then is_prime_u64 survivors."""
    screen = [int(r) for r in primes_upto(256) if r != p]
    total = 0
    chunk = 1 << 21
    for lo in range(0, n_candidates, chunk):
        hi = min(lo + chunk, n_candidates)
        cand = a + p * np.arange(lo, hi, dtype=np.int64)
        keep = cand >= 2
        for r in screen:
            keep &= (cand % r != 0) | (cand == r)
        total += sum(1 for q in cand[keep].tolist() if is_prime_u64(q))
    return total


def _count_ap_sieve(p: int, a: int, y: int, n_candidates: int) -> int:
    """Sieve candidate indices: r | (a + i*p) iff i = -a/p (mod r)."""
    mask = np.ones(n_candidates, dtype=bool)
    if a == 1:
        mask[0] = False
    for r in primes_upto(math.isqrt(y)).tolist():
        if r == p:
            continue
        i0 = (-a) * pow(p, -1, r) % r
        if a + i0 * p == r:  # the candidate equal to r is prime, skip it
            i0 += r
        if i0 < n_candidates:
            mask[i0::r] = False
    return int(mask.sum())


def li(x: float) -> float:
    """Logarithmic integral of x over [2, x], relative error <= 1e-9."""
    if x < 2:
        raise DomainError(f"li requires x >= 2, got {x}")
    if x == 2:
        return 0.0
    f = lambda t: 1.0 / math.log(t)
    a, b = 2.0, float(x)
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tol = max(_LI_ABS_FLOOR, _LI_REL_TOL * abs(whole))
    return _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 60)


def _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, depth) -> float:
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    half = tol / 2.0
    return _adaptive_simpson(
        f, a, m, fa, flm, fm, left, half, depth - 1
    ) + _adaptive_simpson(f, m, b, fm, frm, fb, right, half, depth - 1)


def mertens_tail_sum(p_lo: int, y_hi: int, *, budget: int | None = None) -> float:
    """Exact sum of 1/p over primes p with p_lo < p <= y_hi."""
    if not 2 <= p_lo < y_hi:
        raise DomainError(f"need 2 <= P < Y, got P={p_lo} Y={y_hi}")
    limit = budget if budget is not None else DEFAULT_SPF_BUDGET
    if y_hi + 1 > limit:
        raise ResourceError(f"Y={y_hi} exceeds sieve budget {limit}")
    pr = primes_upto(y_hi)
    pr = pr[pr > p_lo]
    return math.fsum(1.0 / p for p in pr.tolist())
