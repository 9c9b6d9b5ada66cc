"""Python access to the STING core: probe codec, traffic schedules,
reference scenarios, emulated runs, the run store, and analysis."""

from __future__ import annotations

import json
from typing import Any, Iterable, Optional

from . import _sting
from ._sting import (
    HEADER_BYTES,
    PROTOCOL_VERSION,
    AnalysisError,
    NotFound,
    ProbeError,
    SchemaError,
    decode_probe,
    encode_probe,
    median_increase,
)

__all__ = [
    "HEADER_BYTES",
    "PROTOCOL_VERSION",
    "AnalysisError",
    "NotFound",
    "ProbeError",
    "SchemaError",
    "contention_checks",
    "decode_probe",
    "departures",
    "encode_probe",
    "export",
    "functional_test",
    "list_runs",
    "load_run",
    "median_increase",
    "offered_load",
    "parcours_test",
    "run_emulated",
    "summarize",
    "validate_scenario",
]


def _dump(value: Any) -> str:
    return value if isinstance(value, str) else json.dumps(value)


def departures(profile: dict, count: int, start_ns: int = 0) -> list[tuple[int, int, int, int]]:
    """First `count` departures of a device profile as (time_ns, flow_id, seq, payload_bytes)."""
    return _sting.departures(_dump(profile), count, start_ns)


def offered_load(profile: dict) -> float:
    return _sting.offered_load(_dump(profile))


def functional_test(**options: Any) -> dict:
    return json.loads(_sting.functional_test(json.dumps(options)))


def parcours_test(**options: Any) -> dict:
    return json.loads(_sting.parcours_test(json.dumps(options)))


def validate_scenario(scenario: dict) -> None:
    _sting.validate_scenario(_dump(scenario))


def run_emulated(scenario: dict, seed: Optional[int] = None, store_root: str = "") -> dict:
    """Runs a scenario on the emulated channel in virtual time; returns the run record."""
    return json.loads(_sting.run_emulated(_dump(scenario), seed, store_root))


def summarize(records: Iterable[dict], sut: str = "sut", with_series: bool = False) -> list[dict]:
    return json.loads(_sting.summarize([_dump(r) for r in records], sut, with_series))


def export(records: Iterable[dict], out_dir: str, fmt: str = "all", sut: str = "sut") -> list[str]:
    return _sting.export([_dump(r) for r in records], sut, fmt, out_dir)


def contention_checks(records: Iterable[dict], sut_offered_bps: float, capacity_bps: float,
                      sut: str = "sut") -> list[tuple[str, bool, str]]:
    return _sting.contention_checks([_dump(r) for r in records], sut, sut_offered_bps, capacity_bps)


def list_runs(store_root: str) -> list[dict]:
    return [{"run_id": r, "created_at_ns": t, "status": s} for r, t, s in _sting.store_list(store_root)]


def load_run(store_root: str, run_id: str) -> dict:
    return json.loads(_sting.store_load(store_root, run_id))
