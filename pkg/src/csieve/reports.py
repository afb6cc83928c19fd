"""CSV/JSON emission for run rows, census, checkpoint, and twin reports.

All output is deterministic for a fixed configuration: column orders are
pinned, dict payloads are written with sorted keys, and nothing here
consults clocks or randomness.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path
from typing import Iterable

from .census import CensusReport, SieveLemmaCheck, TwinCensus
from .checkpoint import CheckpointEntry, NstarResult
from .companion import DeficitReport, one_hit_to_string
from .engine import StepRecord

RUN_COLUMNS = [
    "n", "b", "multiplier", "classification",
    "bP", "b1", "total_deficit", "criterion_pass", "chain_ok",
]
CHECKPOINT_COLUMNS = ["p", "strategy", "t0", "kmax", "p_pow_t0"]


def run_row(rec: StepRecord, report: DeficitReport) -> dict:
    return {
        "n": rec.n,
        "b": rec.b,
        "multiplier": rec.multiplier,
        "classification": rec.classification,
        "bP": report.b_product,
        "b1": one_hit_to_string(report.b_one_hit),
        "total_deficit": report.total_deficit,
        "criterion_pass": report.criterion_pass,
        "chain_ok": report.chain_ok,
    }


def write_run_rows(path: Path, rows: Iterable[dict], fmt: str, meta: dict) -> None:
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=RUN_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
    else:
        _write_json(path, {"meta": meta, "rows": list(rows)})


def checkpoint_row(entry: CheckpointEntry) -> dict:
    return {
        "p": entry.p,
        "strategy": entry.strategy,
        "t0": entry.t0,
        "kmax": entry.kmax,
        "p_pow_t0": entry.p_pow_t0,
    }


def write_checkpoint_table(path: Path, result: NstarResult, fmt: str) -> None:
    rows = [checkpoint_row(e) for e in result.entries]
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CHECKPOINT_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
    else:
        _write_json(
            path,
            {
                "nstar": result.value,
                "argmax_p": result.argmax_p,
                "argmax_t": result.argmax_t,
                "entries": rows,
            },
        )


def write_checkpoint_traces(path: Path, entries: Iterable[CheckpointEntry]) -> None:
    payload = {
        str(e.p): {
            "strategy": e.strategy,
            "t0": e.t0,
            "kmax": e.kmax,
            "certified_up_to": e.certified_up_to,
            "trace": [asdict(row) for row in e.trace],
        }
        for e in entries
    }
    _write_json(path, payload)


def census_payload(report: CensusReport) -> dict:
    payload = {
        "k": report.k,
        "n_max": report.n_max,
        "config": report.config,
        "counts": report.counts,
        "criterion_density": report.criterion_density,
        "deficit_histogram": {str(k): v for k, v in report.deficit_histogram.items()},
        "deficit_overflow": report.deficit_overflow,
        "obstruction_buckets": report.obstruction_buckets,
        "composite_rows": [asdict(r) for r in report.composite_rows],
        "chain_failures": report.chain_failures,
    }
    if report.twin is not None:
        payload["twin"] = asdict(report.twin)
    return payload


def write_census_report(path: Path, report: CensusReport, fmt: str) -> None:
    if fmt == "json":
        _write_json(path, census_payload(report))
        return
    with path.open("w", newline="") as fh:
        fh.write("# config " + json.dumps(report.config, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerow(["k", report.k])
        writer.writerow(["n_max", report.n_max])
        for name in sorted(report.counts):
            writer.writerow([f"count_{name}", report.counts[name]])
        writer.writerow(["criterion_density", repr(report.criterion_density)])
        for bucket in sorted(report.obstruction_buckets):
            writer.writerow([f"bucket_{bucket}", report.obstruction_buckets[bucket]])
        for total, count in report.deficit_histogram.items():
            writer.writerow([f"deficit_{total}", count])
        writer.writerow(["deficit_overflow", report.deficit_overflow])
        writer.writerow(["chain_failures", len(report.chain_failures)])


def write_twin_report(path: Path, twin: TwinCensus, fmt: str) -> None:
    if fmt == "json":
        _write_json(path, asdict(twin))
        return
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerow(["n_max", twin.n_max])
        writer.writerow(["pairs_examined", twin.pairs_examined])
        writer.writerow(["c_p_equals_p", twin.c_p_equals_p])
        writer.writerow(["inhibition_verified", twin.inhibition_verified])
        writer.writerow(["inhibition_violations", twin.inhibition_violations])
        writer.writerow(["forced_one_primes", len(twin.forced_one_primes)])
        writer.writerow(["converse_check_failures", len(twin.converse_check_failures)])


def sieve_check_payload(check: SieveLemmaCheck) -> dict:
    return asdict(check) | {"ok": check.ok}


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
