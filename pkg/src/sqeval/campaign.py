"""Rating-campaign planning: task assembly with control stimuli and session gating.

A campaign packs rating clips into tasks of ~10 stimuli, injects one trapping
and one gold stimulus per task, and tracks when workers must redo the
qualification / setup / training sections.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .audio import AudioClip

log = logging.getLogger(__name__)

KIND_RATING = "rating"
KIND_TRAPPING = "trapping"
KIND_GOLD = "gold"

SECTION_QUALIFICATION = "qualification"
SECTION_SETUP = "setup"
SECTION_TRAINING = "training"

# Default gold answer: a clean clip should score at the top of every scale.
GOLD_EXPECTED_DEFAULT = {"sig": 5, "bak": 5, "ovrl": 5}


@dataclass
class Stimulus:
    """One clip as presented to a worker, with moderator-only control metadata."""

    clip_id: str
    url_or_path: str
    condition_id: str = ""
    kind: str = KIND_RATING
    expected_answer: Optional[dict] = None

    def __post_init__(self):
        if self.kind not in (KIND_RATING, KIND_TRAPPING, KIND_GOLD):
            raise ValueError(f"unknown stimulus kind {self.kind!r}")
        if self.kind == KIND_RATING and self.expected_answer is not None:
            raise ValueError("rating stimuli must not carry an expected answer")
        if self.kind != KIND_RATING and self.expected_answer is None:
            raise ValueError(f"{self.kind} stimulus requires an expected answer")


@dataclass
class TaskAssignment:
    task_id: str
    stimuli: list[Stimulus]
    scale_order_seed: int
    campaign_id: str


@dataclass(frozen=True)
class SessionPolicy:
    setup_validity_minutes: float = 30.0
    training_validity_minutes: float = 60.0
    qualification_once: bool = True

    def __post_init__(self):
        if self.setup_validity_minutes <= 0 or self.training_validity_minutes <= 0:
            raise ValueError("validity windows must be strictly positive")


@dataclass
class WorkerState:
    worker_id: str
    qualification_passed: bool = False
    qualification_at: Optional[datetime] = None
    last_setup_pass: Optional[datetime] = None
    last_training_pass: Optional[datetime] = None


def plan_campaign(
    clips: Sequence[Stimulus],
    trapping_pool: Sequence[Stimulus],
    gold_pool: Sequence[Stimulus],
    *,
    target_votes_per_clip: int,
    task_size: int = 10,
    seed: int = 0,
    campaign_id: str = "campaign",
) -> list[TaskAssignment]:
    """Pack rating clips into tasks so each clip collects the target vote count.

    One planning round is a seeded shuffle of all clips chopped into groups of
    task_size (a short final group is topped up from the same shuffle), and
    target_votes_per_clip rounds are emitted. Each task gets one trapping and
    one gold stimulus, never in first position, and a per-task stimulus
    permutation derived from (seed, task_id).
    """
    if not clips:
        raise ValueError("no rating clips")
    if task_size < 2:
        raise ValueError("task_size must be >= 2")
    if target_votes_per_clip < 1:
        raise ValueError("target_votes_per_clip must be >= 1")
    if not trapping_pool:
        raise ValueError("trapping pool is empty")
    if not gold_pool:
        raise ValueError("gold pool is empty")
    if any(c.kind != KIND_RATING for c in clips):
        raise ValueError("campaign clips must all be rating stimuli")
    if any(s.kind != KIND_TRAPPING for s in trapping_pool):
        raise ValueError("trapping pool must contain trapping stimuli")
    if any(s.kind != KIND_GOLD for s in gold_pool):
        raise ValueError("gold pool must contain gold stimuli")
    if len(clips) < task_size:
        raise ValueError(
            f"need at least task_size={task_size} distinct clips, got {len(clips)}"
        )

    tasks: list[TaskAssignment] = []
    index = 0
    for round_no in range(target_votes_per_clip):
        order = list(clips)
        random.Random(f"{seed}:round:{round_no}").shuffle(order)
        for start in range(0, len(order), task_size):
            chunk = order[start : start + task_size]
            if len(chunk) < task_size:
                in_chunk = {s.clip_id for s in chunk}
                filler = [s for s in order if s.clip_id not in in_chunk]
                chunk = chunk + filler[: task_size - len(chunk)]
            task_id = f"{campaign_id}-t{index:04d}"
            index += 1
            rng = random.Random(f"{seed}:{task_id}")
            rng.shuffle(chunk)
            stimuli = list(chunk)
            # controls never first: first-clip ratings are noisy
            stimuli.insert(rng.randrange(1, len(stimuli) + 1), rng.choice(list(trapping_pool)))
            stimuli.insert(rng.randrange(1, len(stimuli) + 1), rng.choice(list(gold_pool)))
            tasks.append(
                TaskAssignment(
                    task_id=task_id,
                    stimuli=stimuli,
                    scale_order_seed=rng.randrange(2**31),
                    campaign_id=campaign_id,
                )
            )
    return tasks


def make_trapping_stimulus(
    base: AudioClip,
    prompt: AudioClip,
    demanded_score: int,
    *,
    clip_id: str = "trapping",
    url_or_path: str = "",
    splice_fraction: float = 0.5,
) -> tuple[Stimulus, AudioClip]:
    """Build a trapping stimulus: base clip prefix, then the spoken instruction.

    The prompt names demanded_score; the expected answer is that score on all
    three scales. The splice sits mid-clip by default so the worker must
    listen past the start.
    """
    if not 1 <= demanded_score <= 5:
        raise ValueError("demanded_score must be in 1..5")
    if base.sample_rate != prompt.sample_rate:
        raise ValueError("base and prompt sample rates differ")
    if len(prompt) > len(base):
        raise ValueError("prompt is longer than the base clip")
    if not 0.0 <= splice_fraction < 1.0:
        raise ValueError("splice_fraction must be in [0, 1)")
    prefix = base.samples[: int(len(base) * splice_fraction)]
    audio = AudioClip(np.concatenate([prefix, prompt.samples]), base.sample_rate)
    score = int(demanded_score)
    stimulus = Stimulus(
        clip_id=clip_id,
        url_or_path=url_or_path,
        kind=KIND_TRAPPING,
        expected_answer={"sig": score, "bak": score, "ovrl": score},
    )
    return stimulus, audio


def gate_session(state: WorkerState, now: datetime, policy: SessionPolicy) -> set[str]:
    """Sections the worker must (re)take before rating.

    Qualification is required until passed once; setup and training expire
    strictly after their validity windows (30 and 60 minutes by default).
    """
    required = set()
    if not state.qualification_passed:
        required.add(SECTION_QUALIFICATION)
    setup_window = timedelta(minutes=policy.setup_validity_minutes)
    if state.last_setup_pass is None or now - state.last_setup_pass > setup_window:
        required.add(SECTION_SETUP)
    training_window = timedelta(minutes=policy.training_validity_minutes)
    if state.last_training_pass is None or now - state.last_training_pass > training_window:
        required.add(SECTION_TRAINING)
    return required


# ---------------------------------------------------------------------------
# serialization: plan / answer key / worker-state store / campaign config

def worker_payload(tasks: Sequence[TaskAssignment]) -> dict:
    """Worker-visible plan: control stimuli are indistinguishable (kind stripped)."""
    if not tasks:
        raise ValueError("no tasks")
    return {
        "campaign_id": tasks[0].campaign_id,
        "tasks": [
            {
                "task_id": t.task_id,
                "scale_order_seed": t.scale_order_seed,
                "stimuli": [
                    {"clip_id": s.clip_id, "url": s.url_or_path} for s in t.stimuli
                ],
            }
            for t in tasks
        ],
    }


def answer_key(tasks: Sequence[TaskAssignment]) -> dict:
    """Moderator-only key: control clips, expected answers, clip-to-condition map."""
    if not tasks:
        raise ValueError("no tasks")
    key_tasks = {}
    clip_conditions: dict[str, str] = {}
    for t in tasks:
        trapping = [s for s in t.stimuli if s.kind == KIND_TRAPPING]
        gold = [s for s in t.stimuli if s.kind == KIND_GOLD]
        if len(trapping) != 1 or len(gold) != 1:
            raise ValueError(f"task {t.task_id} must carry exactly one trapping and one gold")
        key_tasks[t.task_id] = {
            "trapping": {"clip_id": trapping[0].clip_id, "expected": trapping[0].expected_answer},
            "gold": {"clip_id": gold[0].clip_id, "expected": gold[0].expected_answer},
        }
        for s in t.stimuli:
            if s.kind == KIND_RATING and s.condition_id:
                clip_conditions[s.clip_id] = s.condition_id
    return {
        "campaign_id": tasks[0].campaign_id,
        "tasks": key_tasks,
        "clip_conditions": clip_conditions,
    }


def _dt(value: Optional[str]) -> Optional[datetime]:
    return datetime.fromisoformat(value) if value else None


def _iso(value: Optional[datetime]) -> Optional[str]:
    return value.isoformat() if value else None


def load_worker_states(path) -> dict[str, WorkerState]:
    """Read the append-only worker-state log; the latest record per worker wins."""
    states: dict[str, WorkerState] = {}
    p = Path(path)
    if not p.exists():
        return states
    with p.open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            states[rec["worker_id"]] = WorkerState(
                worker_id=rec["worker_id"],
                qualification_passed=bool(rec.get("qualification_passed", False)),
                qualification_at=_dt(rec.get("qualification_at")),
                last_setup_pass=_dt(rec.get("last_setup_pass")),
                last_training_pass=_dt(rec.get("last_training_pass")),
            )
    return states


def append_worker_state(path, state: WorkerState) -> None:
    """Append one worker-state record; timestamps may never move backwards."""
    current = load_worker_states(path).get(state.worker_id)
    if current is not None:
        for attr in ("qualification_at", "last_setup_pass", "last_training_pass"):
            old, new = getattr(current, attr), getattr(state, attr)
            if old is not None and (new is None or new < old):
                raise ValueError(f"{attr} for {state.worker_id} would move backwards")
    record = {
        "worker_id": state.worker_id,
        "qualification_passed": state.qualification_passed,
        "qualification_at": _iso(state.qualification_at),
        "last_setup_pass": _iso(state.last_setup_pass),
        "last_training_pass": _iso(state.last_training_pass),
    }
    with Path(path).open("a") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def _pool_stimulus(entry: dict, kind: str) -> Stimulus:
    if kind == KIND_TRAPPING:
        score = int(entry["demanded_score"])
        expected = {"sig": score, "bak": score, "ovrl": score}
    else:
        expected = entry.get("expected", GOLD_EXPECTED_DEFAULT)
    return Stimulus(
        clip_id=entry["clip_id"],
        url_or_path=entry.get("url", entry.get("url_or_path", "")),
        kind=kind,
        expected_answer={k: int(v) for k, v in expected.items()},
    )


@dataclass
class CampaignConfig:
    task_size: int
    target_votes_per_clip: int
    seed: int
    trapping_pool: list[Stimulus]
    gold_pool: list[Stimulus]
    policy: SessionPolicy
    campaign_id: str = "campaign"


def load_campaign_config(path) -> CampaignConfig:
    """Parse the campaign config JSON (task size, pools, session policy)."""
    with open(path) as fh:
        raw = json.load(fh)
    policy_raw = raw.get("policy", {})
    policy = SessionPolicy(
        setup_validity_minutes=float(policy_raw.get("setup_minutes", 30)),
        training_validity_minutes=float(policy_raw.get("training_minutes", 60)),
    )
    return CampaignConfig(
        task_size=int(raw.get("task_size", 10)),
        target_votes_per_clip=int(raw["target_votes_per_clip"]),
        seed=int(raw.get("seed", 0)),
        trapping_pool=[_pool_stimulus(e, KIND_TRAPPING) for e in raw["trapping_pool"]],
        gold_pool=[_pool_stimulus(e, KIND_GOLD) for e in raw["gold_pool"]],
        policy=policy,
        campaign_id=str(raw.get("campaign_id", "campaign")),
    )


def load_clips(path) -> list[Stimulus]:
    """Read the rating-clip listing (clip_id, url, condition_id) JSON."""
    with open(path) as fh:
        raw = json.load(fh)
    return [
        Stimulus(
            clip_id=e["clip_id"],
            url_or_path=e.get("url", e.get("url_or_path", "")),
            condition_id=e.get("condition_id", ""),
        )
        for e in raw
    ]
