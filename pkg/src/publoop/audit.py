"""Append-only hash-chained event log.

Each line is a JSON object {hash, kind, payload, prev_hash, seq, t} where
hash = sha256(prev_hash || canonical({seq, t, kind, payload})). Canonical
form sorts keys, strips whitespace, and rounds every float to 6 significant
digits at append time, so re-serializing a parsed line reproduces the exact
bytes that were hashed. The genesis record links to a zero digest. Payloads
carry aggregates and opaque ids only, never manuscript content.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Optional

GENESIS = "0" * 64

EVENT_KINDS = frozenset({
    "triage_summary", "policy_update", "escalation", "assignment_fallback",
    "collusion_state", "intervention", "decision_batch_summary", "run_meta",
})


def round_floats(obj: Any) -> Any:
    """Round floats to 6 significant digits, recursively; ints pass through."""
    if isinstance(obj, bool) or isinstance(obj, int) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    raise TypeError(f"unsupported payload value type: {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def event_hash(prev_hash: str, seq: int, t: int, kind: str, payload: dict) -> str:
    body = canonical_json({"seq": seq, "t": t, "kind": kind, "payload": payload})
    return hashlib.sha256((prev_hash + body).encode("utf-8")).hexdigest()


class AuditLog:
    """Writer for one run's chain. Buffers in memory; optionally mirrors to disk."""

    def __init__(self, path: Optional[Path] = None):
        self.path = path
        self.events: list[dict] = []
        self._seq = 0
        self._prev = GENESIS
        self._fh = open(path, "a", encoding="utf-8") if path else None

    def append(self, t: int, kind: str, payload: dict) -> dict:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown audit event kind: {kind}")
        payload = round_floats(payload)
        h = event_hash(self._prev, self._seq, t, kind, payload)
        event = {"hash": h, "kind": kind, "payload": payload,
                 "prev_hash": self._prev, "seq": self._seq, "t": t}
        self.events.append(event)
        if self._fh:
            self._fh.write(canonical_json(event) + "\n")
        self._seq += 1
        self._prev = h
        return event

    @property
    def head_hash(self) -> str:
        return self._prev

    @property
    def next_seq(self) -> int:
        return self._seq

    def flush(self) -> None:
        if self._fh:
            self._fh.flush()

    def close(self) -> None:
        if self._fh:
            self._fh.close()
            self._fh = None


def verify_chain(log_path: Path | str) -> dict:
    """Recompute the whole chain; report the first broken sequence number."""
    prev = GENESIS
    seq = 0
    path = Path(log_path)
    if not path.exists():
        return {"ok": False, "broken_at": 0, "reason": "missing log"}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError:
                return {"ok": False, "broken_at": seq, "reason": "unparseable line"}
            if not isinstance(event, dict) or set(event) != {
                "hash", "kind", "payload", "prev_hash", "seq", "t"
            }:
                return {"ok": False, "broken_at": seq, "reason": "malformed record"}
            if event["seq"] != seq:
                return {"ok": False, "broken_at": seq, "reason": "sequence gap"}
            if event["prev_hash"] != prev:
                return {"ok": False, "broken_at": seq, "reason": "broken link"}
            expected = event_hash(prev, seq, event["t"], event["kind"], event["payload"])
            if event["hash"] != expected:
                return {"ok": False, "broken_at": seq, "reason": "hash mismatch"}
            prev = event["hash"]
            seq += 1
    return {"ok": True, "length": seq, "head": prev}
