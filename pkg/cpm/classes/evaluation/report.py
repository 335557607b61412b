#!/usr/bin/env python3
"""EvalReport: metrics per predictor and role, bootstrap comparisons, audits and provenance.

JSON output is key-sorted and unrounded; the text rendering rounds."""
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .audit import OverlapAuditRow
from .bootstrap import BootstrapConfig, BootstrapResult
from .metrics import RoleMetrics, TOP_KS
from .selection import SelectionResult
from ..model.retrieval import RetrievalConfig
from ..model.roles import Role, ROLES
from ..util.errors import InvariantError

DECOMPOSITION_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Comparison:
    """Paired bootstrap of predictor b minus predictor a, Acc@1 on one role."""
    role: Role
    a: str
    b: str
    result: BootstrapResult

    @property
    def name(self) -> str:
        return "{}-{}".format(self.b, self.a)

    def to_dict(self) -> dict:
        d = self.result.to_dict()
        d.update({"role": self.role.value, "a": self.a, "b": self.b})
        return d


@dataclass
class EvalReport:
    retrieval: RetrievalConfig
    bootstrap: BootstrapConfig
    provenance: dict
    counts: dict
    predictors: Dict[str, Dict[Role, RoleMetrics]] = field(default_factory=dict)
    comparisons: List[Comparison] = field(default_factory=list)
    overlap: List[OverlapAuditRow] = field(default_factory=list)
    selection: Optional[SelectionResult] = None

    def add_predictor(self, name: str, metrics: Dict[Role, RoleMetrics]):
        for role, m in metrics.items():
            check_decomposition(name, m)
        self.predictors[name] = metrics

    def primary(self, name: str) -> float:
        """Mean over roles of Acc@1."""
        metrics = self.predictors[name]
        return sum(metrics[role].acc(1) for role in ROLES) / len(ROLES)

    def comparison(self, role: Role, a: str, b: str) -> BootstrapResult:
        for c in self.comparisons:
            if (c.role, c.a, c.b) == (role, a, b):
                return c.result
        raise KeyError("No comparison {}-{} for {}.".format(b, a, role.value))

    def to_dict(self) -> dict:
        return {
            "retrieval": self.retrieval.to_dict(),
            "bootstrap": self.bootstrap.to_dict(),
            "provenance": self.provenance,
            "counts": self.counts,
            "predictors": {name: {"primary_mean@1": self.primary(name),
                                  "roles": {role.value: m.to_dict() for role, m in metrics.items()}}
                           for name, metrics in self.predictors.items()},
            "comparisons": [c.to_dict() for c in self.comparisons],
            "overlap": [row.to_dict() for row in self.overlap],
            "selection": self.selection.to_dict() if self.selection else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_text(self) -> str:
        lines = ["Retrieval: {}".format(self.retrieval),
                 "Rows: {} train, {} test, {} duplicate groups in test".format(
                     self.counts.get("train"), self.counts.get("test"), self.counts.get("test_duplicate_groups")),
                 ""]
        lines += _accuracy_table(self)
        lines += [""] + _absent_table(self)
        if self.comparisons:
            lines += ["", "Paired bootstrap, Acc@1 points ({:.0%} percentile CI, {} resamples, seed {})".format(
                self.bootstrap.confidence, self.bootstrap.resamples, self.bootstrap.seed)]
            for c in self.comparisons:
                lines.append("  {:<9} {:<14} {:+6.1f}  [{:+.1f}, {:+.1f}]".format(
                    c.role.value, c.name, 100 * c.result.delta, 100 * c.result.lower, 100 * c.result.upper))
        if self.overlap:
            lines += ["", "Overlap audit"]
            for row in self.overlap:
                precision = "n/a" if row.precision is None else "{:.4f}".format(row.precision)
                lines.append("  {:<30} P@{} {}  ({} queries, {} skipped)".format(
                    row.rung.value, row.k, precision, row.queries, row.skipped))
        if self.selection:
            lines += ["", "Selected {} by validation {} over {} candidates".format(
                self.selection.winner, self.selection.metric, len(self.selection.table))]
        return "\n".join(lines) + "\n"


def _accuracy_table(report: EvalReport) -> List[str]:
    header = "{:<18}".format("predictor") + "".join(
        "{:>10}".format("{}@{}".format(role.value[:4], k)) for role in ROLES for k in TOP_KS) + "{:>10}".format("mean@1")
    lines = [header, "-" * len(header)]
    for name, metrics in report.predictors.items():
        cells = "".join("{:>10.3f}".format(metrics[role].acc(k)) for role in ROLES for k in TOP_KS)
        lines.append("{:<18}{}{:>10.3f}".format(name, cells, report.primary(name)))
    return lines


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else "{:.3f}".format(value)


def _absent_table(report: EvalReport) -> List[str]:
    lines = ["{:<18}{:<10}{:>16}{:>8}{:>8}{:>8}{:>10}".format(
        "predictor", "role", "absent", "all@1", "pres@1", "abs@1", "masked@1")]
    for name, metrics in report.predictors.items():
        for role in ROLES:
            audit = metrics[role].audit
            lines.append("{:<18}{:<10}{:>16}{:>8}{:>8}{:>8}{:>10}".format(
                name, role.value, "{} ({:.1%})".format(audit.absent, audit.absent_share), _fmt(audit.all_at1),
                _fmt(audit.present_at1), _fmt(audit.absent_at1), _fmt(audit.present_masked_at1)))
    return lines


def check_decomposition(name: str, metrics: RoleMetrics):
    """all@1 must equal the row-weighted mix of present@1 and absent@1."""
    audit = metrics.audit
    gap = abs(audit.all_at1 - audit.reconstructed_all_at1())
    if gap > DECOMPOSITION_TOLERANCE:
        raise InvariantError("{} {}: all@1 {} does not reconstruct from present/absent ({} apart).".format(
            name, metrics.role.value, audit.all_at1, gap))
    if abs(audit.all_at1 - metrics.acc(1)) > DECOMPOSITION_TOLERANCE:
        raise InvariantError("{} {}: audit all@1 {} disagrees with Acc@1 {}.".format(
            name, metrics.role.value, audit.all_at1, metrics.acc(1)))


def comparison_pairs(names: List[str]) -> List[Tuple[str, str]]:
    """(a, b) pairs bootstrapped as b - a: hybrid against each of its components."""
    pairs = []
    if "hybrid" in names:
        for a in ("head", "knn"):
            if a in names:
                pairs.append((a, "hybrid"))
    return pairs
