import json
from datetime import datetime, timedelta

import numpy as np
import pytest

from sqeval.audio import AudioClip
from sqeval.campaign import (
    KIND_GOLD,
    KIND_RATING,
    KIND_TRAPPING,
    SECTION_QUALIFICATION,
    SECTION_SETUP,
    SECTION_TRAINING,
    SessionPolicy,
    Stimulus,
    WorkerState,
    answer_key,
    append_worker_state,
    gate_session,
    load_campaign_config,
    load_clips,
    load_worker_states,
    make_trapping_stimulus,
    plan_campaign,
    worker_payload,
)

from conftest import SR


def _clips(n: int) -> list[Stimulus]:
    return [
        Stimulus(clip_id=f"c{i:03d}", url_or_path=f"clips/c{i:03d}.wav", condition_id=f"i{i % 12 + 1:02d}")
        for i in range(n)
    ]


def _trapping() -> list[Stimulus]:
    return [
        Stimulus("trap1", "t1.wav", kind=KIND_TRAPPING, expected_answer={"sig": 2, "bak": 2, "ovrl": 2}),
        Stimulus("trap2", "t2.wav", kind=KIND_TRAPPING, expected_answer={"sig": 4, "bak": 4, "ovrl": 4}),
    ]


def _gold() -> list[Stimulus]:
    return [Stimulus("gold1", "g1.wav", kind=KIND_GOLD, expected_answer={"sig": 5, "bak": 5, "ovrl": 5})]


def test_stimulus_kind_invariants():
    with pytest.raises(ValueError):
        Stimulus("x", "x.wav", kind="bonus")
    with pytest.raises(ValueError):
        Stimulus("x", "x.wav", kind=KIND_RATING, expected_answer={"sig": 5})
    with pytest.raises(ValueError):
        Stimulus("x", "x.wav", kind=KIND_GOLD)


def test_plan_meets_vote_target_exactly_per_round():
    clips = _clips(30)
    tasks = plan_campaign(
        clips, _trapping(), _gold(), target_votes_per_clip=5, task_size=10, seed=1
    )
    assert len(tasks) == 15  # 30/10 chunks x 5 rounds
    counts = {c.clip_id: 0 for c in clips}
    for task in tasks:
        for s in task.stimuli:
            if s.kind == KIND_RATING:
                counts[s.clip_id] += 1
    assert all(count == 5 for count in counts.values())


def test_plan_tops_up_short_final_chunk():
    clips = _clips(13)
    tasks = plan_campaign(
        clips, _trapping(), _gold(), target_votes_per_clip=1, task_size=10, seed=0
    )
    assert len(tasks) == 2
    for task in tasks:
        ratings = [s for s in task.stimuli if s.kind == KIND_RATING]
        assert len(ratings) == 10
        assert len({s.clip_id for s in ratings}) == 10  # no duplicate within a task
    counts: dict[str, int] = {}
    for task in tasks:
        for s in task.stimuli:
            if s.kind == KIND_RATING:
                counts[s.clip_id] = counts.get(s.clip_id, 0) + 1
    # 13 clips got one vote; 7 fillers got a second one
    assert sum(counts.values()) == 20
    assert all(count in (1, 2) for count in counts.values())


def test_every_task_has_one_trapping_and_one_gold_never_first():
    tasks = plan_campaign(
        _clips(40), _trapping(), _gold(), target_votes_per_clip=3, task_size=10, seed=7
    )
    for task in tasks:
        kinds = [s.kind for s in task.stimuli]
        assert kinds.count(KIND_TRAPPING) == 1
        assert kinds.count(KIND_GOLD) == 1
        assert kinds[0] == KIND_RATING
        assert len(task.stimuli) == 12


def test_plan_is_deterministic_and_seed_sensitive():
    kwargs = dict(target_votes_per_clip=2, task_size=10)
    a = plan_campaign(_clips(20), _trapping(), _gold(), seed=5, **kwargs)
    b = plan_campaign(_clips(20), _trapping(), _gold(), seed=5, **kwargs)
    c = plan_campaign(_clips(20), _trapping(), _gold(), seed=6, **kwargs)
    as_tuples = lambda tasks: [
        (t.task_id, t.scale_order_seed, tuple(s.clip_id for s in t.stimuli)) for t in tasks
    ]
    assert as_tuples(a) == as_tuples(b)
    assert as_tuples(a) != as_tuples(c)


def test_plan_validates_inputs():
    with pytest.raises(ValueError, match="task_size"):
        plan_campaign(_clips(10), _trapping(), _gold(), target_votes_per_clip=1, task_size=1)
    with pytest.raises(ValueError, match="trapping pool"):
        plan_campaign(_clips(10), [], _gold(), target_votes_per_clip=1)
    with pytest.raises(ValueError, match="gold pool"):
        plan_campaign(_clips(10), _trapping(), [], target_votes_per_clip=1)
    with pytest.raises(ValueError, match="at least task_size"):
        plan_campaign(_clips(5), _trapping(), _gold(), target_votes_per_clip=1, task_size=10)
    with pytest.raises(ValueError, match="rating"):
        plan_campaign(_trapping() * 5, _trapping(), _gold(), target_votes_per_clip=1, task_size=2)


def test_trapping_stimulus_splices_prompt_after_prefix():
    rng = np.random.default_rng(0)
    base = AudioClip(rng.uniform(-0.5, 0.5, SR * 2), SR)
    prompt = AudioClip(rng.uniform(-0.5, 0.5, SR // 2), SR)
    stim, audio = make_trapping_stimulus(base, prompt, 3, clip_id="trap_x")
    assert stim.kind == KIND_TRAPPING
    assert stim.expected_answer == {"sig": 3, "bak": 3, "ovrl": 3}
    assert len(audio) == SR + SR // 2
    assert np.array_equal(audio.samples[:SR], base.samples[:SR])
    assert np.array_equal(audio.samples[SR:], prompt.samples)


def test_trapping_stimulus_validation():
    base = AudioClip(np.ones(SR), SR)
    prompt = AudioClip(np.ones(SR // 4), SR)
    with pytest.raises(ValueError, match="demanded_score"):
        make_trapping_stimulus(base, prompt, 6)
    with pytest.raises(ValueError, match="sample rates"):
        make_trapping_stimulus(base, AudioClip(np.ones(100), 16000), 3)
    with pytest.raises(ValueError, match="longer than the base"):
        make_trapping_stimulus(prompt, base, 3)


def test_gate_session_requires_everything_for_new_worker():
    state = WorkerState(worker_id="w1")
    required = gate_session(state, datetime(2024, 5, 1, 12, 0), SessionPolicy())
    assert required == {SECTION_QUALIFICATION, SECTION_SETUP, SECTION_TRAINING}


def test_gate_session_windows():
    t0 = datetime(2024, 5, 1, 12, 0)
    state = WorkerState(
        worker_id="w1",
        qualification_passed=True,
        qualification_at=t0,
        last_setup_pass=t0,
        last_training_pass=t0,
    )
    policy = SessionPolicy()
    assert gate_session(state, t0 + timedelta(minutes=29), policy) == set()
    assert gate_session(state, t0 + timedelta(minutes=31), policy) == {SECTION_SETUP}
    assert gate_session(state, t0 + timedelta(minutes=59), policy) == {SECTION_SETUP}
    assert gate_session(state, t0 + timedelta(minutes=61), policy) == {
        SECTION_SETUP,
        SECTION_TRAINING,
    }


def test_gate_session_qualification_is_once_only():
    t0 = datetime(2024, 5, 1, 12, 0)
    state = WorkerState(
        worker_id="w1",
        qualification_passed=True,
        qualification_at=t0 - timedelta(days=30),
        last_setup_pass=t0,
        last_training_pass=t0,
    )
    assert SECTION_QUALIFICATION not in gate_session(state, t0, SessionPolicy())


def test_policy_validation():
    with pytest.raises(ValueError):
        SessionPolicy(setup_validity_minutes=0)


def test_worker_payload_hides_control_kinds():
    tasks = plan_campaign(
        _clips(10), _trapping(), _gold(), target_votes_per_clip=1, task_size=10, seed=2
    )
    payload = worker_payload(tasks)
    for task in payload["tasks"]:
        for stim in task["stimuli"]:
            assert set(stim) == {"clip_id", "url"}
        assert isinstance(task["scale_order_seed"], int)


def test_answer_key_maps_controls_and_conditions():
    tasks = plan_campaign(
        _clips(10), _trapping(), _gold(), target_votes_per_clip=1, task_size=10, seed=2
    )
    key = answer_key(tasks)
    assert set(key["tasks"]) == {t.task_id for t in tasks}
    entry = key["tasks"][tasks[0].task_id]
    assert entry["trapping"]["clip_id"].startswith("trap")
    assert entry["gold"]["clip_id"] == "gold1"
    assert key["clip_conditions"]["c003"] == "i04"
    assert "trap1" not in key["clip_conditions"]


def test_worker_state_log_round_trip(tmp_path):
    path = tmp_path / "workers.ndjson"
    t0 = datetime(2024, 5, 1, 12, 0)
    append_worker_state(path, WorkerState("w1", True, t0, t0, t0))
    append_worker_state(path, WorkerState("w2", False))
    later = t0 + timedelta(minutes=45)
    append_worker_state(path, WorkerState("w1", True, t0, later, t0))
    states = load_worker_states(path)
    assert states["w1"].last_setup_pass == later
    assert states["w1"].last_training_pass == t0
    assert not states["w2"].qualification_passed


def test_worker_state_log_rejects_backward_timestamps(tmp_path):
    path = tmp_path / "workers.ndjson"
    t0 = datetime(2024, 5, 1, 12, 0)
    append_worker_state(path, WorkerState("w1", True, t0, t0, t0))
    with pytest.raises(ValueError, match="backwards"):
        append_worker_state(path, WorkerState("w1", True, t0, t0 - timedelta(minutes=1), t0))


def test_config_and_clip_loading(tmp_path):
    config_path = tmp_path / "campaign.json"
    config_path.write_text(
        json.dumps(
            {
                "campaign_id": "demo",
                "task_size": 8,
                "target_votes_per_clip": 3,
                "seed": 11,
                "trapping_pool": [{"clip_id": "trap1", "url": "t1.wav", "demanded_score": 2}],
                "gold_pool": [{"clip_id": "gold1", "url": "g1.wav"}],
                "policy": {"setup_minutes": 20, "training_minutes": 40},
            }
        )
    )
    clips_path = tmp_path / "clips.json"
    clips_path.write_text(
        json.dumps([{"clip_id": "c1", "url": "c1.wav", "condition_id": "i01"}])
    )
    config = load_campaign_config(config_path)
    assert config.campaign_id == "demo"
    assert config.task_size == 8
    assert config.policy.setup_validity_minutes == 20
    assert config.trapping_pool[0].expected_answer == {"sig": 2, "bak": 2, "ovrl": 2}
    assert config.gold_pool[0].expected_answer == {"sig": 5, "bak": 5, "ovrl": 5}
    clips = load_clips(clips_path)
    assert clips[0].clip_id == "c1"
    assert clips[0].kind == KIND_RATING


def test_task_permutations_differ_between_tasks():
    tasks = plan_campaign(
        _clips(10), _trapping(), _gold(), target_votes_per_clip=4, task_size=10, seed=9
    )
    orders = {tuple(s.clip_id for s in t.stimuli) for t in tasks}
    assert len(orders) == len(tasks)
