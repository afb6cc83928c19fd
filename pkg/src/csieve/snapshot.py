"""Text snapshot format for resumable runs.

Human-auditable and diff-able; at most O(pi(n)) lines. Layout:

    A135504-SNAPSHOT v1 K=<K> n=<n>
    [A]
    <p> <exponent>      (term valuations, primes strictly ascending)
    [C]
    <p> <exponent>      (stock valuations)
    [S1]
    <p> <count>         (one-hit counters)

UTF-8, LF line endings, no trailing whitespace. Serialization is
byte-stable: parse(serialize(s)) == s and re-serializing reproduces the
exact bytes.
"""

from __future__ import annotations

import re

from .engine import SequenceState
from .errors import SnapshotParseError
from .factored import FactoredNat
from .primes import is_prime_u64

_MAGIC = "A135504-SNAPSHOT"
_VERSION = "v1"
_HEADER_RE = re.compile(r"^A135504-SNAPSHOT (\S+) K=(\d+) n=(\d+)$")
_ENTRY_RE = re.compile(r"^(\d+) (\d+)$")

_SECTIONS = ("[A]", "[C]", "[S1]")


def serialize_snapshot(state: SequenceState) -> bytes:
    lines = [f"{_MAGIC} {_VERSION} K={state.k} n={state.n}"]
    for header, entries in (
        ("[A]", state.a_vals.items()),
        ("[C]", state.stock_vals.items()),
        ("[S1]", sorted(state.hit_counters.items())),
    ):
        lines.append(header)
        for p, v in entries:
            lines.append(f"{p} {v}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_snapshot(data: bytes | str) -> SequenceState:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SnapshotParseError(1, "empty snapshot")
    header = _HEADER_RE.match(lines[0])
    if header is None:
        raise SnapshotParseError(1, f"bad header {lines[0]!r}")
    if header.group(1) != _VERSION:
        raise SnapshotParseError(1, f"unsupported version {header.group(1)!r}")
    k, n = int(header.group(2)), int(header.group(3))
    if k < 1 or n < 1:
        raise SnapshotParseError(1, f"invalid K={k} or n={n}")

    sections: dict[str, dict[int, int]] = {}
    current: dict[int, int] | None = None
    section_idx = -1
    last_prime = 0
    for line_no, line in enumerate(lines[1:], start=2):
        if line in _SECTIONS:
            expected = _SECTIONS[section_idx + 1] if section_idx + 1 < len(_SECTIONS) else None
            if line != expected:
                raise SnapshotParseError(line_no, f"unexpected section {line}")
            section_idx += 1
            current = {}
            sections[line] = current
            last_prime = 0
            continue
        if current is None:
            raise SnapshotParseError(line_no, f"data before any section: {line!r}")
        entry = _ENTRY_RE.match(line)
        if entry is None:
            raise SnapshotParseError(line_no, f"malformed entry {line!r}")
        p, v = int(entry.group(1)), int(entry.group(2))
        if v < 1:
            raise SnapshotParseError(line_no, f"value {v} must be >= 1")
        if not is_prime_u64(p):
            raise SnapshotParseError(line_no, f"key {p} is not prime")
        if p <= last_prime:
            raise SnapshotParseError(line_no, f"primes not strictly ascending at {p}")
        last_prime = p
        current[p] = v
    if section_idx != len(_SECTIONS) - 1:
        raise SnapshotParseError(len(lines), "missing section(s)")

    return SequenceState(
        k=k,
        n=n,
        a_vals=FactoredNat(sections["[A]"], _trusted=True),
        stock_vals=FactoredNat(sections["[C]"], _trusted=True),
        hit_counters=dict(sections["[S1]"]),
    )
