"""Metrics over finished sessions: recall at k, subgraph recall, turn counts.

Failure sessions (turn limit, backend error) score zero on every recall
and contribute their turn count to the average, which for a turn-limit
failure is exactly the cap. Reports are plain dicts with sorted keys plus
an aligned text table, so CI can diff them.
"""

from __future__ import annotations

import json
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .orchestration import DIAGNOSED, Transcript
from .profiles import PatientProfile
from .simulator import stable_rng

RECALL_KS = (1, 2, 3, 4)


def recall_at_k(predicted, gold, k: int) -> float:
    """Fraction of gold ids found in the first k predictions.

    ``predicted`` is an ordered id list that may contain None placeholders
    for unresolvable names; those occupy a rank but can never match.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    gold_set = set(gold)
    if not gold_set:
        raise ValueError("gold set must be non-empty")
    if not predicted:
        return 0.0
    top = {p for p in predicted[:k] if p is not None}
    return len(gold_set & top) / len(gold_set)


def max_recall1_bound(profiles) -> float:
    """Theoretical ceiling of mean recall@1: the mean of 1/|gold|.

    A single prediction can hit at most one gold disease, so a profile with
    g gold diseases caps at 1/g. Profiles outside the expected 1-2 gold
    range still contribute 1/g, with a warning.
    """
    if not profiles:
        raise ValueError("no profiles")
    total = 0.0
    for p in profiles:
        gold = p.gold_diseases if isinstance(p, PatientProfile) else p
        size = len(gold)
        if size not in (1, 2):
            warnings.warn(f"profile with {size} gold diseases in recall bound")
        total += 1.0 / size
    return total / len(profiles)


def hg_recall_at_k(anchor_lists, gold_sets, k: int) -> float:
    """Mean recall of gold diseases within the final-turn anchor lists."""
    if len(anchor_lists) != len(gold_sets):
        raise ValueError("one anchor list per gold set required")
    if not anchor_lists:
        raise ValueError("no sessions")
    return sum(
        recall_at_k(list(anchors), gold, k)
        for anchors, gold in zip(anchor_lists, gold_sets)
    ) / len(anchor_lists)


def subgraph_recall(subgraph_disease_ids, gold) -> float:
    """Fraction of gold diseases present anywhere in the final subgraph."""
    gold_set = set(gold)
    if not gold_set:
        raise ValueError("gold set must be non-empty")
    return len(gold_set & set(subgraph_disease_ids)) / len(gold_set)


@dataclass
class EvalReport:
    session_count: int
    recall_at_k: dict[int, float]
    hg_recall_at_k: dict[int, float]
    subgraph_recall: float
    avg_turns: float
    failure_rate: float
    persona_slices: dict[str, dict[str, dict[str, float]]] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "avg_turns": self.avg_turns,
            "failure_rate": self.failure_rate,
            "hg_recall_at_k": {str(k): v for k, v in sorted(self.hg_recall_at_k.items())},
            "persona_slices": self.persona_slices,
            "recall_at_k": {str(k): v for k, v in sorted(self.recall_at_k.items())},
            "session_count": self.session_count,
            "subgraph_recall": self.subgraph_recall,
        }

    def table(self) -> str:
        lines = [
            f"{'metric':<22}{'value':>10}",
            f"{'sessions':<22}{self.session_count:>10d}",
        ]
        for k in sorted(self.recall_at_k):
            lines.append(f"{f'recall@{k}':<22}{self.recall_at_k[k]:>10.4f}")
        for k in sorted(self.hg_recall_at_k):
            lines.append(f"{f'hg_recall@{k}':<22}{self.hg_recall_at_k[k]:>10.4f}")
        lines.append(f"{'subgraph_recall':<22}{self.subgraph_recall:>10.4f}")
        lines.append(f"{'avg_turns':<22}{self.avg_turns:>10.4f}")
        lines.append(f"{'failure_rate':<22}{self.failure_rate:>10.4f}")
        return "\n".join(lines)


def _session_metrics(t: Transcript) -> dict:
    gold = set(t.gold_ids)
    diagnosed = t.outcome == DIAGNOSED
    final = t.records[-1] if t.records else None
    out = {"turns": t.turns, "failed": not diagnosed}
    for k in RECALL_KS:
        out[f"recall@{k}"] = (
            recall_at_k(t.diagnoses_resolved, gold, k) if diagnosed and gold else 0.0
        )
        anchors = final.anchors if final else []
        out[f"hg_recall@{k}"] = (
            recall_at_k(list(anchors), gold, k) if diagnosed and gold else 0.0
        )
    candidates = final.candidates if final else []
    out["subgraph_recall"] = (
        subgraph_recall(candidates, gold) if diagnosed and gold else 0.0
    )
    return out


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0


def evaluate_run(
    transcripts: list[Transcript],
    include_failures_in_turns: bool = True,
) -> EvalReport:
    """Aggregate all metrics over a transcript set, with per-persona slices.

    Order-invariant: transcripts are reduced through means only. Failure
    sessions stay in the turn average unless excluded by flag.
    """
    if not transcripts:
        raise ValueError("no transcripts to evaluate")
    rows = [_session_metrics(t) for t in transcripts]

    turn_rows = rows if include_failures_in_turns else [r for r in rows if not r["failed"]]
    report = EvalReport(
        session_count=len(transcripts),
        recall_at_k={k: _mean(r[f"recall@{k}"] for r in rows) for k in RECALL_KS},
        hg_recall_at_k={k: _mean(r[f"hg_recall@{k}"] for r in rows) for k in RECALL_KS},
        subgraph_recall=_mean(r["subgraph_recall"] for r in rows),
        avg_turns=_mean(r["turns"] for r in turn_rows),
        failure_rate=_mean(1.0 if r["failed"] else 0.0 for r in rows),
    )

    slices: dict[str, dict[str, dict[str, float]]] = {}
    by_field: dict[str, dict[str, list[dict]]] = defaultdict(lambda: defaultdict(list))
    for t, row in zip(transcripts, rows):
        for field_name, value in t.persona.items():
            by_field[field_name][value].append(row)
    for field_name in sorted(by_field):
        slices[field_name] = {}
        for value in sorted(by_field[field_name]):
            group = by_field[field_name][value]
            slices[field_name][value] = {
                "recall@4": _mean(r["recall@4"] for r in group),
                "avg_turns": _mean(r["turns"] for r in group),
                "sessions": float(len(group)),
            }
    report.persona_slices = slices
    return report


def write_report(report: EvalReport, path: str | Path) -> None:
    path = Path(path)
    path.write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    path.with_suffix(".txt").write_text(report.table() + "\n", encoding="utf-8")


def stratified_split(
    profiles: list[PatientProfile],
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    cap: int = 60,
    seed=0,
) -> tuple[list[PatientProfile], list[PatientProfile], list[PatientProfile]]:
    """Deterministic stratified train/valid/test split.

    The stratification key is the sorted gold-disease multiset, so disease
    co-occurrence patterns distribute proportionally. After allocation the
    train split is capped at ``cap`` profiles per disease; the excess is
    dropped with a warning rather than moved.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must sum to 1")
    strata: dict[tuple[str, ...], list[PatientProfile]] = defaultdict(list)
    for p in profiles:
        strata[tuple(sorted(p.gold_diseases))].append(p)

    train: list[PatientProfile] = []
    valid: list[PatientProfile] = []
    test: list[PatientProfile] = []
    for key in sorted(strata):
        group = sorted(strata[key], key=lambda p: p.id)
        rng = stable_rng(seed, "split", *key)
        rng.shuffle(group)
        if len(group) == 1:
            warnings.warn(f"stratum {key} has a single profile; assigned to train")
            train.extend(group)
            continue
        counts = _allocate(len(group), ratios)
        train.extend(group[: counts[0]])
        valid.extend(group[counts[0] : counts[0] + counts[1]])
        test.extend(group[counts[0] + counts[1] :])

    per_disease: dict[str, int] = defaultdict(int)
    capped_train: list[PatientProfile] = []
    dropped = 0
    for p in sorted(train, key=lambda p: p.id):
        if any(per_disease[d] >= cap for d in p.gold_diseases):
            dropped += 1
            continue
        for d in p.gold_diseases:
            per_disease[d] += 1
        capped_train.append(p)
    if dropped:
        warnings.warn(f"dropped {dropped} train profile(s) over the {cap}-per-disease cap")
    return capped_train, valid, test


def _allocate(total: int, ratios) -> list[int]:
    """Largest-remainder apportionment of `total` across ratios."""
    raw = [total * r for r in ratios]
    counts = [int(x) for x in raw]
    remainder = total - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: raw[i] - counts[i], reverse=True)
    for i in order[:remainder]:
        counts[i] += 1
    return counts
