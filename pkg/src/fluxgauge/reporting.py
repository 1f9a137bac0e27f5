"""Machine-readable run reports: JSON, delimited summaries, config hashes.

Reports are deterministic for a fixed (config, seed): keys are sorted, floats
are written with round-trip precision, and the only varying block is the
isolated timing section.
"""

from __future__ import annotations

import csv
import hashlib
import importlib.metadata
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from .bounds import BoundReport, is_gating_violation

__all__ = ["TOOL_VERSION", "config_hash", "CheckRecord", "RunReport"]

try:
    TOOL_VERSION = importlib.metadata.version("fluxgauge")
except importlib.metadata.PackageNotFoundError:  # running from a source tree
    TOOL_VERSION = "0.1.0"


def _canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    """Stable digest of a config dict (order-insensitive)."""
    return hashlib.sha256(_canonical_json(config).encode()).hexdigest()


@dataclass(frozen=True)
class CheckRecord:
    """One summary row: an inequality report plus its run coordinates."""

    check_id: str
    report: BoundReport
    seed: int
    resolution: float

    def to_dict(self) -> dict:
        out = self.report.to_dict()
        out["check_id"] = self.check_id
        out["seed"] = self.seed
        out["resolution"] = self.resolution
        return out


@dataclass
class RunReport:
    """Everything one scenario run produced."""

    scenario: str
    config: dict
    records: List[CheckRecord] = field(default_factory=list)
    figures: List[str] = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    def add(self, check_id: str, report: BoundReport, seed: int, resolution: float) -> None:
        self.records.append(CheckRecord(check_id, report, int(seed), float(resolution)))

    @property
    def config_digest(self) -> str:
        return config_hash(self.config)

    def gating_failures(self) -> List[CheckRecord]:
        return [r for r in self.records if is_gating_violation(r.report)]

    @property
    def exit_code(self) -> int:
        return 1 if self.gating_failures() else 0

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "config": self.config,
            "config_hash": self.config_digest,
            "tool_version": TOOL_VERSION,
            "checks": [r.to_dict() for r in self.records],
            "figures": sorted(self.figures),
            "extras": self.extras,
            "gating_failures": [r.check_id for r in self.gating_failures()],
            "timing": {"wall_clock_s": self.wall_clock},
        }

    def summary_rows(self) -> List[list]:
        rows = []
        for r in self.records:
            rows.append(
                [
                    r.check_id,
                    "%.17g" % r.report.lhs,
                    "%.17g" % r.report.rhs,
                    "%.17g" % r.report.slack,
                    r.report.verdict,
                    str(r.seed),
                    "%.17g" % r.resolution,
                ]
            )
        return rows

    def write(self, out_dir) -> dict:
        """Write report.json and summary.csv; returns the paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report_path = out / "report.json"
        with report_path.open("w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
        summary_path = out / "summary.csv"
        with summary_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["check_id", "lhs", "rhs", "slack", "verdict", "seed", "resolution"]
            )
            writer.writerows(self.summary_rows())
        return {"report": report_path, "summary": summary_path}
