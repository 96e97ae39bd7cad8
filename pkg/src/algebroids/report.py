"""Structured pass/fail reports for axiom and theorem-instance checks.

Every verification in the library reports through this type instead of
raising: a failed identity carries its first nonzero residual as a witness
string, so reports are replayable and diffable.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import List, Optional

SCHEMA = "algebroids-report/1"


@dataclass
class CheckEntry:
    id: str
    description: str
    passed: bool
    witness: Optional[str] = None
    elapsed: float = 0.0


@dataclass
class CheckReport:
    entries: List[CheckEntry] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.passed for e in self.entries)

    def add(self, id: str, description: str, passed: bool,
            witness: Optional[str] = None) -> CheckEntry:
        entry = CheckEntry(id, description, bool(passed),
                           witness if not passed else None)
        self.entries.append(entry)
        return entry

    def check_zero(self, id: str, description: str, residual) -> CheckEntry:
        """Record an identity check; the residual is anything with is_zero."""
        passed = residual.is_zero
        return self.add(id, description, passed,
                        None if passed else str(residual))

    def merge(self, other: "CheckReport", prefix: str = "") -> "CheckReport":
        for e in other.entries:
            self.entries.append(CheckEntry(
                (prefix + "." + e.id) if prefix else e.id,
                e.description, e.passed, e.witness, e.elapsed))
        return self

    def first_failure(self) -> Optional[CheckEntry]:
        for e in self.entries:
            if not e.passed:
                return e
        return None

    def require_ok(self, what: str):
        failure = self.first_failure()
        if failure is not None:
            raise ValueError(
                f"{what}: check {failure.id} failed"
                + (f" (witness: {failure.witness})" if failure.witness else ""))

    # -- rendering -----------------------------------------------------------

    def to_text(self, timings: bool = False) -> str:
        lines = []
        for e in self.entries:
            status = "PASS" if e.passed else "FAIL"
            line = f"[{status}] {e.id}: {e.description}"
            if e.witness:
                line += f"  [witness: {e.witness}]"
            if timings:
                line += f"  ({e.elapsed:.3f}s)"
            lines.append(line)
        lines.append(f"{'OK' if self.ok else 'FAILED'}: "
                     f"{sum(e.passed for e in self.entries)}/{len(self.entries)} checks passed")
        return "\n".join(lines) + "\n"

    def to_json(self, timings: bool = False) -> str:
        payload = {
            "schema": SCHEMA,
            "ok": self.ok,
            "entries": [
                {
                    "id": e.id,
                    "description": e.description,
                    "verdict": "pass" if e.passed else "fail",
                    "witness": e.witness,
                    "time": round(e.elapsed, 6) if timings else None,
                }
                for e in self.entries
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


class timed:
    """Context manager stamping an entry's elapsed time."""

    def __init__(self, entry: CheckEntry):
        self.entry = entry

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.entry.elapsed = time.perf_counter() - self.start
        return False
