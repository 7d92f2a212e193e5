"""Command-line interface.

    hazsync simulate --out DIR [--config FILE] [--seed N]
    hazsync align SESSION_DIR
    hazsync label SESSION_DIR [--window S] [--cone DEG]
    hazsync report INPUT [INPUT ...] [--out DIR] [--format json|csv|both]

Exit codes: 0 success, 2 configuration problem, 3 missing or corrupt
session data, 4 clock synchronization failure, 5 empty detection set.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import session_io
from .analytics import CATEGORY_ORDER, build_report
from .config import (
    build_session_plan,
    device_profiles,
    load_config,
    public_config,
    resolve_config,
    sim_options,
)
from .errors import (
    DegenerateFit,
    InsufficientMarkers,
    InvalidConfig,
    InvalidPlan,
    MissingModel,
    NoCommonMarkers,
    NoDetections,
    PlacementInfeasible,
    SessionFormatError,
)
from .gaze import DEFAULT_CONE_HALF_ANGLE_DEG
from .labeling import DEFAULT_WINDOW
from .pipeline import align_loaded, label_loaded
from .scene import category_of
from .simulator import simulate_session

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SYNC = 4
EXIT_EMPTY = 5


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hazsync",
        description="Simulate, synchronize, and label multi-device hazard-recognition sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic session directory")
    p_sim.add_argument("--out", required=True, help="output session directory")
    p_sim.add_argument("--config", help="JSON config file (defaults apply otherwise)")
    p_sim.add_argument("--seed", type=int, help="override the config seed")

    p_align = sub.add_parser("align", help="fit clocks and write aligned.jsonl")
    p_align.add_argument("session", help="session directory")

    p_label = sub.add_parser("label", help="sync implicitly, then label detections")
    p_label.add_argument("session", help="session directory")
    p_label.add_argument("--window", type=float, help="lookback window in seconds")
    p_label.add_argument("--cone", type=float, help="gaze cone half-angle in degrees")

    p_report = sub.add_parser("report", help="aggregate detections.json inputs into a report")
    p_report.add_argument("inputs", nargs="+", help="detections.json files or their directories")
    p_report.add_argument("--out", default=".", help="output directory (default: current)")
    p_report.add_argument(
        "--format", choices=("json", "csv", "both"), default="json", help="report format"
    )
    return parser


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config) if args.config else resolve_config()
    if args.seed is not None:
        cfg["seed"] = args.seed
    plan = build_session_plan(cfg)
    recording = simulate_session(plan, device_profiles(cfg), cfg["seed"], sim_options(cfg))
    out = session_io.write_session(
        recording, args.out, labeling_defaults=cfg["labeling"], config=public_config(cfg)
    )
    print(f"session written to {out}")
    print(
        f"participant {plan.participant_id}: {len(plan.trials)} trials, "
        f"{len(recording.schedule)} markers, {recording.press_t_device.size} presses"
    )
    print(
        f"planned outcome: {len(recording.ground_truth)} detections, "
        f"{len(recording.ground_truth_false_alarms)} false alarms"
    )
    return EXIT_OK


def cmd_align(args: argparse.Namespace) -> int:
    session = session_io.read_session(args.session)
    records, diagnostics, models = align_loaded(session)
    session_io.write_aligned(session.path, records, diagnostics)
    print(f"aligned {len(records)} records onto reference {session.reference_id!r}")
    for device_id, model in sorted(models.items()):
        print(
            f"  {device_id}: scale={model.scale:.9f} offset={model.offset:.6f} s "
            f"residual_rms={model.residual_rms * 1e3:.4f} ms n_markers={model.n_markers}"
        )
    return EXIT_OK


def cmd_label(args: argparse.Namespace) -> int:
    session = session_io.read_session(args.session)
    defaults = session.manifest.get("labeling_defaults", {})
    window = args.window if args.window is not None else defaults.get("window", DEFAULT_WINDOW)
    cone = (
        args.cone
        if args.cone is not None
        else defaults.get("cone_half_angle_deg", DEFAULT_CONE_HALF_ANGLE_DEG)
    )
    result = label_loaded(session, window=window, cone_half_angle_deg=cone)
    diagnostics = {
        "reference": session.reference_id,
        "devices": {
            device_id: {
                "scale": m.scale,
                "offset": m.offset,
                "residual_rms": m.residual_rms,
                "n_markers": m.n_markers,
            }
            for device_id, m in result.models.items()
        },
    }
    session_io.write_json(session.path / session_io.DIAGNOSTICS_NAME, diagnostics)
    session_io.write_detections(
        session.path,
        detections=result.detections,
        false_alarms=result.false_alarms,
        params=dict(result.params),
        participants=[session.participant_id],
        n_trials=session.n_trials,
    )
    print(
        f"labeled {len(result.detections)} detections and "
        f"{len(result.false_alarms)} false alarms "
        f"(window={window} s, cone={cone} deg, {result.n_gaze_hits} gaze hits)"
    )
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    events = []
    false_alarms = []
    session_meta: list[tuple[str, int]] = []
    for item in args.inputs:
        data = session_io.read_detections(item)
        events.extend(data.detections)
        false_alarms.extend(data.false_alarms)
        session_meta.extend((pid, data.n_trials) for pid in data.participants)
    report = build_report(events, false_alarms, session_meta=session_meta)
    written = session_io.write_report_files(report, args.out, args.format)
    for path in written:
        print(f"wrote {path}")
    print(f"{report.n_detections} detections over {report.opportunities} participant-trials")
    for hazard_id in sorted(report.per_hazard_counts):
        print(
            f"  hazard {hazard_id:>2} ({category_of(hazard_id).value}): "
            f"{report.per_hazard_ratio[hazard_id] * 100.0:6.2f}% "
            f"(n={report.per_hazard_counts[hazard_id]})"
        )
    for cat in CATEGORY_ORDER:
        print(f"  {cat.value}: {report.per_category_ratio[cat] * 100.0:.2f}%")
    return EXIT_OK


_HANDLERS = {
    "simulate": cmd_simulate,
    "align": cmd_align,
    "label": cmd_label,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (InvalidConfig, InvalidPlan, PlacementInfeasible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SessionFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NoCommonMarkers, InsufficientMarkers, DegenerateFit, MissingModel) as exc:
        print(f"error: clock sync failed: {exc}", file=sys.stderr)
        return EXIT_SYNC
    except NoDetections as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY


if __name__ == "__main__":
    sys.exit(main(None))
