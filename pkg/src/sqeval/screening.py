"""Vote screening: trapping/gold checks, qualification gates, playback telemetry.

A failed control rejects the whole task submission; only votes from accepted
tasks, minus the control clips themselves, count as reliable.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

log = logging.getLogger(__name__)

SCALES = ("sig", "bak", "ovrl")

SCALE_ORDER_SIG_FIRST = "sig_first"
SCALE_ORDER_BAK_FIRST = "bak_first"

VOTES_CSV_HEADER = [
    "worker_id",
    "task_id",
    "clip_id",
    "scale_order",
    "sig",
    "bak",
    "ovrl",
    "playback_sig",
    "playback_bak",
    "playback_ovrl",
    "submitted_at",
]

REASON_TRAPPING = "trapping_failed"
REASON_GOLD = "gold_out_of_tolerance"
REASON_PLAYBACK = "playback_incomplete"
REASON_UNQUALIFIED = "unqualified_worker"
_REASON_ORDER = (REASON_TRAPPING, REASON_GOLD, REASON_PLAYBACK, REASON_UNQUALIFIED)

GOLD_TOLERANCE = 1
HEARING_PASS_THRESHOLD = 0.8
ENVIRONMENT_PASS_THRESHOLD = 0.8


@dataclass
class Vote:
    """One worker's (SIG, BAK, OVRL) triple for one clip."""

    worker_id: str
    task_id: str
    clip_id: str
    sig: int
    bak: int
    ovrl: int
    scale_order: str = SCALE_ORDER_SIG_FIRST
    playback_sig: bool = True
    playback_bak: bool = True
    playback_ovrl: bool = True
    submitted_at: str = ""

    def __post_init__(self):
        for scale in SCALES:
            score = getattr(self, scale)
            if not isinstance(score, int) or not 1 <= score <= 5:
                raise ValueError(f"{scale} score must be an integer in 1..5, got {score!r}")
        if self.scale_order not in (SCALE_ORDER_SIG_FIRST, SCALE_ORDER_BAK_FIRST):
            raise ValueError(f"unknown scale_order {self.scale_order!r}")

    def score(self, scale: str) -> int:
        return getattr(self, scale)

    def playback_complete(self, scale: str) -> bool:
        return getattr(self, f"playback_{scale}")


@dataclass(frozen=True)
class QualificationResult:
    worker_id: str
    hearing_correct: float
    environment_correct: float
    passed: bool

    def __post_init__(self):
        for name in ("hearing_correct", "environment_correct"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a fraction in [0, 1], got {value}")


def evaluate_qualification(
    worker_id: str, hearing_correct: float, environment_correct: float
) -> QualificationResult:
    """Apply the pass thresholds to the hearing and environment test fractions."""
    passed = (
        hearing_correct >= HEARING_PASS_THRESHOLD
        and environment_correct >= ENVIRONMENT_PASS_THRESHOLD
    )
    return QualificationResult(worker_id, hearing_correct, environment_correct, passed)


@dataclass(frozen=True)
class TaskKey:
    """Per-task answer key for the two control stimuli."""

    trapping_clip: str
    trapping_expected: Mapping[str, int]
    gold_clip: str
    gold_expected: Mapping[str, int]

    @property
    def control_clips(self) -> frozenset:
        return frozenset((self.trapping_clip, self.gold_clip))


@dataclass
class ScreeningVerdict:
    task_id: str
    accepted: bool
    reasons: list[str]
    worker_id: str = ""

    def __post_init__(self):
        if self.accepted != (not self.reasons):
            raise ValueError("accepted must hold exactly when reasons is empty")


def score_digit_triplet(responses: Sequence[tuple[str, str]]) -> float:
    """Fraction of digit triplets transcribed correctly.

    A triplet counts only if all three digits match in order; partial credit
    would defeat the hearing test.
    """
    if not responses:
        raise ValueError("no digit-triplet responses")
    correct = 0
    for expected, answered in responses:
        for value in (expected, answered):
            if not (isinstance(value, str) and len(value) == 3 and value.isdigit()):
                raise ValueError(f"malformed digit triplet {value!r}")
        if expected == answered:
            correct += 1
    return correct / len(responses)


def screen_task(
    votes: Sequence[Vote],
    key: TaskKey,
    worker_qual: Optional[QualificationResult],
) -> ScreeningVerdict:
    """Accept or reject one task submission as a whole.

    Rejection reasons: trapping answer differs from the demanded score on any
    scale (or is missing), gold answer off by more than GOLD_TOLERANCE on any
    scale (or missing), any incomplete playback, or an unqualified worker.
    """
    if not votes:
        raise ValueError("no votes to screen")
    task_ids = {v.task_id for v in votes}
    if len(task_ids) != 1:
        raise ValueError(f"votes span multiple tasks: {sorted(task_ids)}")
    workers = {v.worker_id for v in votes}
    if len(workers) != 1:
        raise ValueError(f"votes span multiple workers: {sorted(workers)}")
    task_id = task_ids.pop()
    worker_id = workers.pop()

    reasons = set()
    by_clip = {v.clip_id: v for v in votes}

    trapping = by_clip.get(key.trapping_clip)
    if trapping is None or any(
        trapping.score(s) != key.trapping_expected[s] for s in SCALES
    ):
        reasons.add(REASON_TRAPPING)

    gold = by_clip.get(key.gold_clip)
    if gold is None or any(
        abs(gold.score(s) - key.gold_expected[s]) > GOLD_TOLERANCE for s in SCALES
    ):
        reasons.add(REASON_GOLD)

    if any(not v.playback_complete(s) for v in votes for s in SCALES):
        reasons.add(REASON_PLAYBACK)

    if worker_qual is None or not worker_qual.passed:
        reasons.add(REASON_UNQUALIFIED)

    ordered = [r for r in _REASON_ORDER if r in reasons]
    return ScreeningVerdict(
        task_id=task_id, accepted=not ordered, reasons=ordered, worker_id=worker_id
    )


def screen_all(
    votes: Iterable[Vote],
    keys: Mapping[str, TaskKey],
    quals: Mapping[str, QualificationResult],
) -> list[ScreeningVerdict]:
    """Screen every (task, worker) submission found in the vote stream."""
    groups: dict[tuple[str, str], list[Vote]] = {}
    for v in votes:
        groups.setdefault((v.task_id, v.worker_id), []).append(v)
    verdicts = []
    for (task_id, worker_id) in sorted(groups):
        if task_id not in keys:
            raise ValueError(f"no answer key for task {task_id}")
        verdicts.append(
            screen_task(groups[(task_id, worker_id)], keys[task_id], quals.get(worker_id))
        )
    return verdicts


def filter_reliable(
    votes: Iterable[Vote],
    verdicts: Iterable[ScreeningVerdict],
    control_clips: Iterable[str],
) -> list[Vote]:
    """Votes of accepted tasks, minus the control-clip votes themselves."""
    accepted: dict[tuple[str, str], bool] = {}
    for verdict in verdicts:
        accepted[(verdict.task_id, verdict.worker_id)] = verdict.accepted
    controls = set(control_clips)
    out = []
    for v in votes:
        key = (v.task_id, v.worker_id)
        if key not in accepted and (v.task_id, "") not in accepted:
            raise ValueError(f"no verdict for task {v.task_id} (worker {v.worker_id})")
        if accepted.get(key, accepted.get((v.task_id, ""))) and v.clip_id not in controls:
            out.append(v)
    return out


# ---------------------------------------------------------------------------
# CSV / JSON wire formats

def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "1"):
        return True
    if lowered in ("false", "0"):
        return False
    raise ValueError(f"expected boolean, got {value!r}")


def read_votes_csv(path) -> list[Vote]:
    """Parse the votes CSV; the header must match VOTES_CSV_HEADER exactly."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != VOTES_CSV_HEADER:
            raise ValueError(
                "malformed votes CSV header; expected exactly: "
                + ",".join(VOTES_CSV_HEADER)
            )
        votes = []
        for row in reader:
            if not row:
                continue
            rec = dict(zip(VOTES_CSV_HEADER, row))
            votes.append(
                Vote(
                    worker_id=rec["worker_id"],
                    task_id=rec["task_id"],
                    clip_id=rec["clip_id"],
                    scale_order=rec["scale_order"],
                    sig=int(rec["sig"]),
                    bak=int(rec["bak"]),
                    ovrl=int(rec["ovrl"]),
                    playback_sig=_parse_bool(rec["playback_sig"]),
                    playback_bak=_parse_bool(rec["playback_bak"]),
                    playback_ovrl=_parse_bool(rec["playback_ovrl"]),
                    submitted_at=rec["submitted_at"],
                )
            )
    return votes


def write_votes_csv(path, votes: Iterable[Vote]) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(VOTES_CSV_HEADER)
        for v in votes:
            writer.writerow(
                [
                    v.worker_id,
                    v.task_id,
                    v.clip_id,
                    v.scale_order,
                    v.sig,
                    v.bak,
                    v.ovrl,
                    str(v.playback_sig).lower(),
                    str(v.playback_bak).lower(),
                    str(v.playback_ovrl).lower(),
                    v.submitted_at,
                ]
            )


def verdicts_to_json(verdicts: Sequence[ScreeningVerdict]) -> list[dict]:
    return [
        {
            "task_id": v.task_id,
            "worker_id": v.worker_id,
            "accepted": v.accepted,
            "reasons": list(v.reasons),
        }
        for v in verdicts
    ]


def task_keys_from_answer_key(answer_key: Mapping) -> dict[str, TaskKey]:
    """Build per-task keys from the moderator answer-key JSON."""
    keys = {}
    for task_id, entry in answer_key["tasks"].items():
        keys[task_id] = TaskKey(
            trapping_clip=entry["trapping"]["clip_id"],
            trapping_expected={k: int(v) for k, v in entry["trapping"]["expected"].items()},
            gold_clip=entry["gold"]["clip_id"],
            gold_expected={k: int(v) for k, v in entry["gold"]["expected"].items()},
        )
    return keys


def load_qualifications(records: Iterable[Mapping]) -> dict[str, QualificationResult]:
    """Build qualification results from raw records.

    Each record carries worker_id plus either ready fractions
    (hearing_correct / environment_correct) or raw material: digit-triplet
    response pairs under "triplets" and JND pair-comparison booleans under
    "pairs".
    """
    out = {}
    for rec in records:
        worker_id = rec["worker_id"]
        if "hearing_correct" in rec:
            hearing = float(rec["hearing_correct"])
        else:
            hearing = score_digit_triplet([tuple(t) for t in rec["triplets"]])
        if "environment_correct" in rec:
            environment = float(rec["environment_correct"])
        else:
            pairs = [bool(p) for p in rec["pairs"]]
            if not pairs:
                raise ValueError(f"no environment-test pairs for {worker_id}")
            environment = sum(pairs) / len(pairs)
        out[worker_id] = evaluate_qualification(worker_id, hearing, environment)
    return out
