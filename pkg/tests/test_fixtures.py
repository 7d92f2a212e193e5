"""Reference-share fixture: apportionment and the bundled data."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hazsync.fixtures import (
    DEFAULT_FIXTURE_TOTAL,
    REFERENCE_SHARES_BP,
    bundled_fixture_dir,
    largest_remainder_counts,
    reference_counts,
    reference_detection_events,
    reference_shares,
    write_reference_fixture,
)
from hazsync.session_io import read_detections

from oracles import oracle_largest_remainder


def test_reference_shares_are_basis_points():
    assert sum(REFERENCE_SHARES_BP.values()) == 10001
    assert set(REFERENCE_SHARES_BP) == set(range(1, 11))
    shares = reference_shares()
    assert shares[1] == pytest.approx(0.2065, abs=5e-5)
    # published percentages carry one extra basis point of rounding excess
    assert sum(shares.values()) == pytest.approx(1.0001, abs=1e-12)


def test_largest_remainder_exact_at_native_total():
    counts = largest_remainder_counts(REFERENCE_SHARES_BP, DEFAULT_FIXTURE_TOTAL)
    assert counts == REFERENCE_SHARES_BP


@settings(max_examples=60, deadline=None)
@given(st.integers(50, 5000))
def test_largest_remainder_matches_fraction_oracle(total):
    counts = largest_remainder_counts(REFERENCE_SHARES_BP, total)
    assert counts == oracle_largest_remainder(REFERENCE_SHARES_BP, total)
    assert sum(counts.values()) == total


def test_largest_remainder_is_near_exact():
    total = 2500
    counts = largest_remainder_counts(REFERENCE_SHARES_BP, total)
    for i, c in counts.items():
        quota = Fraction(REFERENCE_SHARES_BP[i] * total, sum(REFERENCE_SHARES_BP.values()))
        assert abs(Fraction(c) - quota) < 1


def test_reference_events_realize_reference_counts():
    events = reference_detection_events()
    assert len(events) == DEFAULT_FIXTURE_TOTAL
    got = {i: 0 for i in range(1, 11)}
    for e in events:
        got[e.hazard_id] += 1
    assert got == reference_counts()
    # no duplicate (participant, trial, hazard) triple: the events survive
    # labeling-style dedup unchanged
    triples = {(e.participant_id, e.trial_id, e.hazard_id) for e in events}
    assert len(triples) == len(events)
    # deterministic ordering
    assert events == reference_detection_events()


def test_bundled_fixture_matches_generator(tmp_path):
    bundled = bundled_fixture_dir()
    regenerated = write_reference_fixture(tmp_path / "fixture")
    bundled_bytes = (bundled / "detections.json").read_bytes()
    fresh_bytes = (regenerated / "detections.json").read_bytes()
    assert bundled_bytes == fresh_bytes


def test_bundled_fixture_parses():
    data = read_detections(bundled_fixture_dir())
    assert len(data.detections) == DEFAULT_FIXTURE_TOTAL
    assert data.n_trials == 10
    assert len(data.participants) * data.n_trials >= len(
        {(e.participant_id, e.trial_id) for e in data.detections}
    )
    payload = json.loads((bundled_fixture_dir() / "detections.json").read_text())
    assert payload["params"]["total"] == DEFAULT_FIXTURE_TOTAL
