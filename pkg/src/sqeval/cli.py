"""Command-line pipeline: reference audio, campaign planning, screening, scores.

One binary with subcommands over files. Machine-readable JSON goes to stdout
with --json, human tables otherwise; exit code 0 means every entry was
processed without error. SQ_EVAL_LOG sets the log level.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import campaign, refcond, screening, stats

log = logging.getLogger(__name__)


class CliError(Exception):
    """Expected failure: message to stderr, exit code 1."""


def _require_files(*paths) -> None:
    missing = [str(p) for p in paths if p is not None and not Path(p).is_file()]
    if missing:
        raise CliError("missing input file(s): " + ", ".join(missing))


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _print_table(rows: list[list[str]]) -> None:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    for row in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_clip_conditions(path) -> dict[str, str]:
    """Clip-to-condition map: either a plain JSON object or an answer key."""
    raw = _read_json(path)
    if "clip_conditions" in raw:
        raw = raw["clip_conditions"]
    return {str(k): str(v) for k, v in raw.items()}


def _read_votes(path) -> list:
    _require_files(path)
    return screening.read_votes_csv(path)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_gen_refcond(args) -> int:
    _require_files(args.manifest)
    entries = _read_json(args.manifest)
    if not isinstance(entries, list):
        raise CliError("manifest must be a JSON list of entries")
    base = Path(args.manifest).parent
    # validate every referenced path before any audio is written
    inputs = []
    for entry in entries:
        inputs.append(base / entry["speech_path"])
        if entry.get("noise_path"):
            inputs.append(base / entry["noise_path"])
    _require_files(*inputs)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    augmented = []
    for number, entry in enumerate(entries):
        output = out_dir / entry["output_path"]
        try:
            output.parent.mkdir(parents=True, exist_ok=True)
            noise = entry.get("noise_path")
            info = refcond.generate_condition_file(
                base / entry["speech_path"],
                base / noise if noise else None,
                entry["condition_id"],
                output,
            )
        except Exception as exc:
            # a partial batch is not a usable artifact
            for path in written + [output]:
                path.unlink(missing_ok=True)
            raise CliError(f"entry {number} ({entry.get('condition_id')}): {exc}") from exc
        written.append(output)
        augmented.append({**entry, **info})

    _write_json(out_dir / "manifest.json", augmented)
    if args.json:
        print(json.dumps(augmented, indent=2))
    else:
        rows = [["condition", "output", "noise_gain_db", "post_mix_scale"]]
        for entry in augmented:
            gain = entry["applied_noise_gain_db"]
            rows.append(
                [
                    entry["condition_id"],
                    entry["output_path"],
                    "" if gain is None else f"{gain:.2f}",
                    f"{entry['post_mix_scale']:.4f}",
                ]
            )
        _print_table(rows)
    return 0


def _cmd_create_campaign(args) -> int:
    _require_files(args.config, args.clips)
    config = campaign.load_campaign_config(args.config)
    clips = campaign.load_clips(args.clips)
    task_size = config.task_size if args.task_size is None else args.task_size
    target = (
        config.target_votes_per_clip if args.target_votes is None else args.target_votes
    )
    seed = config.seed if args.seed is None else args.seed
    tasks = campaign.plan_campaign(
        clips,
        config.trapping_pool,
        config.gold_pool,
        target_votes_per_clip=target,
        task_size=task_size,
        seed=seed,
        campaign_id=config.campaign_id,
    )
    out = _out_dir(args)
    plan = campaign.worker_payload(tasks)
    key = campaign.answer_key(tasks)
    _write_json(out / "plan.json", plan)
    _write_json(out / "answer_key.json", key)
    if args.json:
        print(json.dumps({"tasks": len(tasks), "out": str(out)}))
    else:
        print(f"planned {len(tasks)} tasks ({len(clips)} clips x {target} votes)")
        print(f"wrote {out / 'plan.json'} and {out / 'answer_key.json'}")
    return 0


def _cmd_screen(args) -> int:
    _require_files(args.answer_key, args.qualifications)
    votes = _read_votes(args.votes)
    keys = screening.task_keys_from_answer_key(_read_json(args.answer_key))
    quals = screening.load_qualifications(_read_json(args.qualifications))
    verdicts = screening.screen_all(votes, keys, quals)
    controls: set[str] = set()
    for key in keys.values():
        controls |= key.control_clips
    reliable = screening.filter_reliable(votes, verdicts, controls)
    out = _out_dir(args)
    _write_json(out / "verdicts.json", screening.verdicts_to_json(verdicts))
    screening.write_votes_csv(out / "reliable_votes.csv", reliable)
    accepted = sum(v.accepted for v in verdicts)
    if args.json:
        print(
            json.dumps(
                {
                    "submissions": len(verdicts),
                    "accepted": accepted,
                    "reliable_votes": len(reliable),
                }
            )
        )
    else:
        print(
            f"{accepted}/{len(verdicts)} submissions accepted; "
            f"{len(reliable)} reliable votes"
        )
    return 0


def _cmd_aggregate(args) -> int:
    _require_files(args.conditions)
    votes = _read_votes(args.votes)
    if not votes:
        raise CliError("no reliable votes to aggregate")
    conditions = _load_clip_conditions(args.conditions)
    scores = stats.aggregate(votes, conditions, baseline_condition=args.baseline)
    out = _out_dir(args)
    _write_json(out / "scores.json", stats.scores_to_json(scores))
    rows = stats.scores_to_csv_rows(scores)
    with (out / "scores.csv").open("w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    if args.json:
        print(json.dumps(stats.scores_to_json(scores), indent=2))
    else:
        _print_table(rows)
    return 0


def _cmd_analyze(args) -> int:
    _require_files(args.scores)
    scores = stats.scores_from_json(_read_json(args.scores))
    fit = stats.fit_ovrl_regression(scores)
    predictions = []
    for s in scores:
        predicted = stats.predict_ovrl(fit, s.mos("sig"), s.mos("bak"))
        predictions.append(
            {
                "condition_id": s.condition_id,
                "ovrl_observed": s.mos("ovrl"),
                "ovrl_predicted": predicted,
            }
        )
    payload = {"fit": stats.fit_to_json(fit), "predicted_vs_observed": predictions}
    out = _out_dir(args)
    _write_json(out / "fit.json", payload)
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(
            "OVRL = {:+.4f} {:+.4f}*SIG {:+.4f}*BAK   adj R2 {:.4f}   rho {:.4f}".format(
                fit.intercept, fit.coef_sig, fit.coef_bak, fit.adjusted_r2, fit.pearson_rho
            )
        )
        rows = [["condition", "ovrl_observed", "ovrl_predicted", "residual"]]
        for p in predictions:
            rows.append(
                [
                    p["condition_id"],
                    f"{p['ovrl_observed']:.2f}",
                    f"{p['ovrl_predicted']:.2f}",
                    f"{p['ovrl_observed'] - p['ovrl_predicted']:+.3f}",
                ]
            )
        _print_table(rows)
    return 0


def _cmd_compare_runs(args) -> int:
    _require_files(args.scores_a, args.scores_b)
    a = stats.scores_from_json(_read_json(args.scores_a))
    b = stats.scores_from_json(_read_json(args.scores_b))
    transformed_a = transformed_b = None
    if args.votes_a or args.votes_b:
        if not (args.votes_a and args.votes_b and args.conditions):
            raise CliError(
                "rank-transformed SRCC needs --votes-a, --votes-b and --conditions"
            )
        conditions = _load_clip_conditions(args.conditions)
        transformed_a = stats.rank_transform(_read_votes(args.votes_a), conditions)
        transformed_b = stats.rank_transform(_read_votes(args.votes_b), conditions)
    report = stats.compare_runs(a, b, transformed_a, transformed_b)
    payload = stats.report_to_json(report)
    out = _out_dir(args)
    _write_json(out / "comparison.json", payload)
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        rows = [["scale", "pcc", "srcc", "srcc_rank", "rmse", "avg_ci_a", "avg_ci_b"]]
        for scale, sc in payload.items():
            rows.append(
                [
                    scale,
                    f"{sc['pcc']:.3f}",
                    f"{sc['srcc']:.3f}",
                    "" if sc["srcc_rank_transformed"] is None
                    else f"{sc['srcc_rank_transformed']:.3f}",
                    f"{sc['rmse']:.3f}",
                    "" if sc["average_ci_a"] is None else f"{sc['average_ci_a']:.3f}",
                    "" if sc["average_ci_b"] is None else f"{sc['average_ci_b']:.3f}",
                ]
            )
        _print_table(rows)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqeval",
        description="Subjective speech-quality evaluation pipeline over files",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-refcond", help="render reference-condition WAVs from a manifest")
    p.add_argument("manifest", help="JSON list of {speech_path, noise_path, condition_id, output_path}")
    p.add_argument("out_dir", help="directory for output WAVs and the augmented manifest")
    p.add_argument("--json", action="store_true", help="machine-readable stdout")
    p.set_defaults(func=_cmd_gen_refcond)

    p = sub.add_parser("create-campaign", help="plan rating tasks with control stimuli")
    p.add_argument("config", help="campaign config JSON")
    p.add_argument("clips", help="rating-clip listing JSON")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--task-size", type=int, default=None, help="rating stimuli per task (default 10)")
    p.add_argument("--target-votes", type=int, default=None, help="votes to collect per clip")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_create_campaign)

    p = sub.add_parser("screen", help="screen submitted votes against the answer key")
    p.add_argument("votes", help="submitted votes CSV")
    p.add_argument("answer_key", help="answer key JSON from create-campaign")
    p.add_argument("qualifications", help="worker qualification records JSON")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_screen)

    p = sub.add_parser("aggregate", help="pool reliable votes into per-condition scores")
    p.add_argument("votes", help="reliable votes CSV")
    p.add_argument("--conditions", required=True, help="clip-to-condition map JSON (or answer key)")
    p.add_argument("--baseline", default=None, help="condition id for DMOS reference")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("analyze", help="fit OVRL on SIG and BAK condition scores")
    p.add_argument("scores", help="scores JSON from aggregate")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("compare-runs", help="correlation report between two runs")
    p.add_argument("scores_a", help="scores JSON of run A")
    p.add_argument("scores_b", help="scores JSON of run B")
    p.add_argument("--votes-a", default=None, help="run A reliable votes CSV (rank-transformed SRCC)")
    p.add_argument("--votes-b", default=None, help="run B reliable votes CSV")
    p.add_argument("--conditions", default=None, help="clip-to-condition map JSON")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_compare_runs)

    return parser


def main(argv=None) -> int:
    level = os.environ.get("SQ_EVAL_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
