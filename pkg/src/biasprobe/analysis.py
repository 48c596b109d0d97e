"""Cross-domain comparison: gender direction, gendered neighbors, reports.

Answers, per domain and across domains: does the masculine-feminine axis
differ, which words sit closest to each end of it, and how do the
effect sizes rank.  "Dominance" of a gender is operationalized here as
signed WEAT effect size plus neighbor-list asymmetry; both are stated
operationalizations, not the only possible readings.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .embed import EmbeddingSpace, lookup
from .lexicon import GenderPairList
from .tgbi import TgbiResult
from .weat import WeatResult

_EIG_TOL = 1e-9
_EIG_MAX_ITER = 1000


@dataclass
class GenderDirection:
    vector: np.ndarray
    pairs_used: list[tuple[str, str]]
    pairs_dropped: list[tuple[str, str]]
    method: str


def gender_direction(
    space: EmbeddingSpace, pairs: GenderPairList, method: str = "mean_difference"
) -> GenderDirection:
    """Unit vector for the masculine-feminine axis.

    mean_difference normalizes the mean of (masc - fem) vectors over the
    pairs resolvable in `space`.  first_principal_component runs power
    iteration on the second-moment matrix of the difference vectors
    (uncentered, so a single repeated difference is its own principal
    direction) and is sign-aligned so the mean difference projects
    non-negatively.
    """
    if method not in ("mean_difference", "first_principal_component"):
        raise ValueError(f"unknown direction method: {method}")
    used, dropped, diffs = [], [], []
    for masc, fem in pairs.pairs:
        vm, vf = lookup(space, masc), lookup(space, fem)
        if vm is None or vf is None:
            dropped.append((masc, fem))
            continue
        used.append((masc, fem))
        diffs.append(vm - vf)
    if not used:
        raise ValueError("no gender pair resolved against the embedding space")

    d = np.stack(diffs)
    mean_diff = d.mean(axis=0)
    if method == "mean_difference":
        norm = np.linalg.norm(mean_diff)
        if norm == 0.0:
            raise ValueError("mean difference vector has zero norm")
        vec = mean_diff / norm
    else:
        vec = _top_component(d, start=mean_diff)
        if float(vec @ mean_diff) < 0.0:
            vec = -vec
        elif float(vec @ mean_diff) == 0.0:
            nz = np.flatnonzero(vec)
            if nz.size and vec[nz[0]] < 0.0:
                vec = -vec
    return GenderDirection(vector=vec, pairs_used=used, pairs_dropped=dropped, method=method)


def _top_component(diffs: np.ndarray, start: np.ndarray) -> np.ndarray:
    second_moment = diffs.T @ diffs
    v = start.astype(np.float64)
    if np.linalg.norm(v) == 0.0:
        norms = np.linalg.norm(diffs, axis=1)
        if not np.any(norms > 0.0):
            raise ValueError("all difference vectors are zero, no principal direction")
        v = diffs[int(np.argmax(norms))]
    v = v / np.linalg.norm(v)
    eigenvalue = float(v @ second_moment @ v)
    for _ in range(_EIG_MAX_ITER):
        w = second_moment @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            raise ValueError("power iteration collapsed to the zero vector")
        v = w / norm
        new_eigenvalue = float(v @ second_moment @ v)
        if abs(new_eigenvalue - eigenvalue) <= _EIG_TOL * max(abs(new_eigenvalue), 1e-300):
            break
        eigenvalue = new_eigenvalue
    return v


def gendered_neighbors(
    space: EmbeddingSpace,
    direction: GenderDirection,
    k: int,
    counts: dict[str, int] | None = None,
    min_count: int = 0,
) -> tuple[list[tuple[str, float]], list[tuple[str, float]]]:
    """Top-k masculine-end and feminine-end vocabulary words.

    Every token is scored by cosine against the direction; definitional
    pair tokens are excluded, as are tokens below `min_count` when a
    counts map is given.  Positive scores feed the masculine list,
    negative the feminine; ties break lexicographically.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    excluded = {t for pair in direction.pairs_used for t in pair}
    norms = np.linalg.norm(space.matrix, axis=1)
    projections = space.matrix @ direction.vector

    scored = []
    for i, token in enumerate(space.tokens):
        if token in excluded or norms[i] == 0.0:
            continue
        if counts is not None and counts.get(token, 0) < min_count:
            continue
        scored.append((token, float(np.clip(projections[i] / norms[i], -1.0, 1.0))))

    eligible_pos = [(t, s) for t, s in scored if s > 0.0]
    eligible_neg = [(t, s) for t, s in scored if s < 0.0]
    if k > len(eligible_pos) or k > len(eligible_neg):
        warnings.warn(
            f"k={k} exceeds eligible vocabulary "
            f"({len(eligible_pos)} masculine, {len(eligible_neg)} feminine); truncating",
            stacklevel=2,
        )
    masculine = sorted(eligible_pos, key=lambda ts: (-ts[1], ts[0]))[:k]
    feminine = sorted(eligible_neg, key=lambda ts: (ts[1], ts[0]))[:k]
    return masculine, feminine


@dataclass
class DomainReport:
    domain_id: str
    weat_results: dict[str, WeatResult]
    tgbi_result: TgbiResult | None = None
    masculine_top: list[tuple[str, float]] = field(default_factory=list)
    feminine_top: list[tuple[str, float]] = field(default_factory=list)
    embedding_provenance: str = ""

    def to_dict(self) -> dict:
        return {
            "domain_id": self.domain_id,
            "weat_results": {k: r.to_dict() for k, r in self.weat_results.items()},
            "tgbi_result": self.tgbi_result.to_dict() if self.tgbi_result else None,
            "masculine_top": [[t, s] for t, s in self.masculine_top],
            "feminine_top": [[t, s] for t, s in self.feminine_top],
            "embedding_provenance": self.embedding_provenance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DomainReport":
        return cls(
            domain_id=data["domain_id"],
            weat_results={
                k: WeatResult.from_dict(r) for k, r in data["weat_results"].items()
            },
            tgbi_result=(
                TgbiResult.from_dict(data["tgbi_result"]) if data.get("tgbi_result") else None
            ),
            masculine_top=[(t, s) for t, s in data.get("masculine_top", [])],
            feminine_top=[(t, s) for t, s in data.get("feminine_top", [])],
            embedding_provenance=data.get("embedding_provenance", ""),
        )


@dataclass
class CrossDomainReport:
    domains: list[DomainReport]
    rankings: dict[str, dict]
    generated_at: str
    tool_version: str = __version__
    config_digest: str = ""

    def to_dict(self) -> dict:
        return {
            "domains": [d.to_dict() for d in self.domains],
            "rankings": self.rankings,
            "generated_at": self.generated_at,
            "tool_version": self.tool_version,
            "config_digest": self.config_digest,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CrossDomainReport":
        return cls(
            domains=[DomainReport.from_dict(d) for d in data["domains"]],
            rankings={
                m: {k: list(v) for k, v in r.items()} for m, r in data["rankings"].items()
            },
            generated_at=data["generated_at"],
            tool_version=data["tool_version"],
            config_digest=data["config_digest"],
        )


def _rank(pairs: list[tuple[str, float]], key) -> tuple[list[str], list[list[str]]]:
    ordered = sorted(pairs, key=lambda p: (key(p[1]), p[0]))
    ranking = [domain for domain, _ in ordered]
    ties: list[list[str]] = []
    by_value: dict[float, list[str]] = {}
    for domain, value in ordered:
        by_value.setdefault(key(value), []).append(domain)
    for group in by_value.values():
        if len(group) > 1:
            ties.append(sorted(group))
    return ranking, sorted(ties)


def compute_rankings(reports: list[DomainReport]) -> dict[str, dict]:
    """Per metric name: domains ordered by signed and absolute effect size."""
    metric_names = sorted({m for r in reports for m in r.weat_results})
    if not any(
        sum(1 for r in reports if name in r.weat_results) >= 2 for name in metric_names
    ):
        raise ValueError("no metric name is shared by at least two domain reports")
    rankings: dict[str, dict] = {}
    for name in metric_names:
        have = [
            (r.domain_id, r.weat_results[name].effect_size)
            for r in reports
            if name in r.weat_results
        ]
        omitted = sorted(r.domain_id for r in reports if name not in r.weat_results)
        signed, signed_ties = _rank(have, key=lambda v: -v)
        absolute, abs_ties = _rank(have, key=lambda v: -abs(v))
        rankings[name] = {
            "signed": signed,
            "absolute": absolute,
            "ties": sorted({tuple(t) for t in signed_ties + abs_ties}),
            "omitted": omitted,
        }
        rankings[name]["ties"] = [list(t) for t in rankings[name]["ties"]]
    return rankings


def default_timestamp() -> str:
    """UTC ISO-8601; honors SOURCE_DATE_EPOCH for reproducible outputs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        dt = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        dt = datetime.now(tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def compare_domains(
    reports: list[DomainReport],
    generated_at: str | None = None,
    config_digest: str = "",
) -> CrossDomainReport:
    """Assemble the cross-domain report; needs >= 2 domains sharing a metric."""
    if len(reports) < 2:
        raise ValueError(f"need at least 2 domain reports, got {len(reports)}")
    return CrossDomainReport(
        domains=list(reports),
        rankings=compute_rankings(reports),
        generated_at=generated_at or default_timestamp(),
        tool_version=__version__,
        config_digest=config_digest,
    )


def emit_report(report: CrossDomainReport, format: str = "json") -> bytes:
    if format == "json":
        return (
            json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)
            + "\n"
        ).encode("utf-8")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["domain", "metric", "effect_size", "p_value", "method"])
        for domain in report.domains:
            for name in sorted(domain.weat_results):
                r = domain.weat_results[name]
                writer.writerow(
                    [domain.domain_id, name, repr(r.effect_size), repr(r.p_value), r.method]
                )
        return buf.getvalue().encode("utf-8")
    if format == "markdown":
        return _markdown_report(report).encode("utf-8")
    raise ValueError(f"unknown report format: {format}")


def parse_report(data: bytes | str) -> CrossDomainReport:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return CrossDomainReport.from_dict(json.loads(data))


def _fmt(x: float) -> str:
    return f"{x:.6f}" if math.isfinite(x) else str(x)


def _markdown_report(report: CrossDomainReport) -> str:
    lines = [
        "# Cross-domain gender bias report",
        "",
        f"- generated_at: {report.generated_at}",
        f"- tool_version: {report.tool_version}",
        f"- config_digest: {report.config_digest or '(none)'}",
        "",
    ]
    for name in sorted(report.rankings):
        ranking = report.rankings[name]
        lines += [f"## Metric: {name}", ""]
        lines += [
            "| domain | effect size | p-value | method |",
            "| --- | ---: | ---: | --- |",
        ]
        for domain_id in ranking["signed"]:
            domain = next(d for d in report.domains if d.domain_id == domain_id)
            r = domain.weat_results[name]
            lines.append(
                f"| {domain_id} | {_fmt(r.effect_size)} | {_fmt(r.p_value)} | {r.method} |"
            )
        lines.append("")
        if ranking["omitted"]:
            lines.append(f"Omitted (metric missing): {', '.join(ranking['omitted'])}")
            lines.append("")
        if ranking["ties"]:
            tie_text = "; ".join(", ".join(group) for group in ranking["ties"])
            lines.append(f"Ties (broken by domain id): {tie_text}")
            lines.append("")
    for domain in report.domains:
        if not domain.masculine_top and not domain.feminine_top:
            continue
        lines += [f"## Gendered neighbors: {domain.domain_id}", ""]
        for label, top in (
            ("Masculine end", domain.masculine_top),
            ("Feminine end", domain.feminine_top),
        ):
            lines.append(f"**{label}**")
            lines.append("")
            for token, score in top:
                lines.append(f"- {token} ({_fmt(score)})")
            lines.append("")
        if domain.tgbi_result is not None:
            lines.append(f"TGBI index: {_fmt(domain.tgbi_result.index)}")
            lines.append("")
    return "\n".join(lines)
