"""Shared fixtures plus the acceptance-criteria summary.

Acceptance tests register one line per criterion through
record_criterion; the summary block prints them all at the end of the
run.  The whole-suite runtime budget (criterion 8) is enforced here,
since only the session hooks see the full duration.
"""

from __future__ import annotations

import time

import pytest

from hazsync.config import build_session_plan, device_profiles, resolve_config, sim_options
from hazsync.simulator import simulate_session

SUITE_BUDGET_S = 60.0

_ACCEPTANCE: list[tuple[int, str, bool, str]] = []
_T0: float = 0.0


def record_criterion(num: int, title: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE.append((num, title, bool(passed), detail))


def pytest_sessionstart(session):
    global _T0
    _T0 = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _T0
    ok = elapsed < SUITE_BUDGET_S
    record_criterion(
        8,
        f"full test suite completes in under {SUITE_BUDGET_S:.0f} s",
        ok,
        f"{elapsed:.1f} s",
    )
    if not ok and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(_ACCEPTANCE):
        status = "PASS" if ok else "FAIL"
        extra = f" [{detail}]" if detail else ""
        terminalreporter.write_line(f"{status}  criterion {num}: {title}{extra}")


def quiet_overrides(seed: int = 0, **extra) -> dict:
    """Config overrides for a zero-jitter, zero-dropout session with drift."""
    overrides = {
        "seed": seed,
        "gaze": {"jitter_deg": 0.0},
        "devices": [
            {
                "device_id": "eeg01",
                "kind": "eeg",
                "nominal_rate": 128.0,
                "channel_count": 14,
                "clock_scale": 1.0003,
                "clock_offset": 5.25,
            },
            {
                "device_id": "gaze01",
                "kind": "gaze",
                "nominal_rate": 120.0,
                "clock_scale": 0.99985,
                "clock_offset": -3.75,
            },
            {
                "device_id": "input01",
                "kind": "input",
                "nominal_rate": 1000.0,
                "clock_scale": 1.00005,
                "clock_offset": 1.5,
            },
        ],
    }
    overrides.update(extra)
    return overrides


def make_recording(seed: int = 0, **extra):
    """One quiet drifting session recording (shared helper)."""
    cfg = resolve_config(quiet_overrides(seed, **extra))
    plan = build_session_plan(cfg)
    return simulate_session(plan, device_profiles(cfg), cfg["seed"], sim_options(cfg)), cfg


@pytest.fixture(scope="session")
def quiet_recording():
    """A zero-noise drifting recording reused by read-only tests."""
    recording, _ = make_recording(seed=404)
    return recording


@pytest.fixture(scope="session")
def default_recording():
    """A default-config (noisy) recording reused by read-only tests."""
    cfg = resolve_config({"seed": 915})
    plan = build_session_plan(cfg)
    return simulate_session(plan, device_profiles(cfg), cfg["seed"], sim_options(cfg))
