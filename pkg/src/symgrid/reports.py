"""Check reports with a canonical machine form.

The machine document is deterministic byte-for-byte for a fixed seed:
timings are kept out of it (they live only in the human rendering), all
maps are emitted key-sorted, and every value field is produced by seeded
computation.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field as dc_field


@dataclass
class CheckResult:
    check_id: str
    status: str  # "pass" | "fail" | "error"
    witness: object = None
    seconds: float = 0.0

    @property
    def ok(self):
        return self.status == "pass"


@dataclass
class Report:
    suite: str
    seed: int
    checks: list = dc_field(default_factory=list)

    def add(self, check_id: str, ok: bool, witness=None, seconds: float = 0.0):
        self.checks.append(
            CheckResult(check_id, "pass" if ok else "fail", witness, seconds)
        )

    def add_error(self, check_id: str, message: str, seconds: float = 0.0):
        self.checks.append(CheckResult(check_id, "error", message, seconds))

    @property
    def all_pass(self):
        return all(c.ok for c in self.checks)

    def machine_document(self) -> str:
        doc = {
            "suite": self.suite,
            "seed": self.seed,
            "checks": [
                {
                    "id": c.check_id,
                    "status": c.status,
                    "witness": _canonical(c.witness),
                }
                for c in self.checks
            ],
        }
        body = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        digest = hashlib.sha256(body.encode()).hexdigest()[:16]
        return json.dumps(
            {"digest": digest, "report": doc}, sort_keys=True, separators=(",", ":")
        )

    def human_lines(self):
        lines = [f"suite {self.suite} (seed {self.seed})"]
        for c in self.checks:
            mark = {"pass": "ok  ", "fail": "FAIL", "error": "ERR "}[c.status]
            extra = f" [{c.seconds:.2f}s]" if c.seconds else ""
            wit = f" :: {_canonical(c.witness)}" if c.witness is not None else ""
            lines.append(f"  {mark} {c.check_id}{wit}{extra}")
        tail = "all checks passed" if self.all_pass else "FAILURES present"
        lines.append(tail)
        return lines


def _canonical(value):
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return f"{value:.12e}"
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))}
    return str(value)


class Timer:
    def __enter__(self):
        self.t0 = time.time()
        self._final = None
        return self

    def __exit__(self, *exc):
        self._final = time.time() - self.t0
        return False

    @property
    def seconds(self):
        return self._final if self._final is not None else time.time() - self.t0
