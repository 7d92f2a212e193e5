"""Hazard catalog and layout generation."""

from __future__ import annotations

import numpy as np
import pytest

from hazsync.errors import PlacementInfeasible
from hazsync.scene import (
    CATEGORY_MEMBERS,
    HAZARD_IDS,
    HazardAoi,
    HazardCategory,
    TrialLayout,
    category_of,
    generate_trial_layout,
    hazard_catalog,
)


def test_catalog_has_ten_hazards_in_five_categories():
    assert HAZARD_IDS == tuple(range(1, 11))
    assert {cat for cat, _ in (row[1:] for row in hazard_catalog())} == set(HazardCategory)


def test_category_membership_partition():
    assert CATEGORY_MEMBERS[HazardCategory.FALL] == (1, 4)
    assert CATEGORY_MEMBERS[HazardCategory.ELECTRICAL] == (2, 7)
    assert CATEGORY_MEMBERS[HazardCategory.TRIP] == (3, 6)
    assert CATEGORY_MEMBERS[HazardCategory.CHEMICAL] == (5, 8, 9)
    assert CATEGORY_MEMBERS[HazardCategory.PRESSURE] == (10,)
    all_members = [i for members in CATEGORY_MEMBERS.values() for i in members]
    assert sorted(all_members) == list(HAZARD_IDS)


def test_category_of():
    assert category_of(1) is HazardCategory.FALL
    assert category_of(9) is HazardCategory.CHEMICAL
    assert category_of(10) is HazardCategory.PRESSURE
    with pytest.raises(KeyError):
        category_of(11)


def test_duplicate_chemical_descriptions_share_text():
    # Two distinct hazard ids carry the same bucket description; ids stay
    # the identity, not the text.
    catalog = {i: desc for i, _, desc in hazard_catalog()}
    assert catalog[5] == catalog[9]
    assert category_of(5) is category_of(9)


def test_layout_deterministic_in_trial_and_seed():
    a = generate_trial_layout(3, layout_seed=42)
    b = generate_trial_layout(3, layout_seed=42)
    c = generate_trial_layout(4, layout_seed=42)
    d = generate_trial_layout(3, layout_seed=43)
    assert a == b
    assert a != c
    assert a != d


def test_layout_respects_bounds_and_separation():
    layout = generate_trial_layout(1, layout_seed=7)
    centers = layout.centers()
    assert centers.shape == (10, 3)
    assert np.all(centers >= [-15.0, -15.0, 0.0]) and np.all(centers <= [15.0, 15.0, 5.0])
    diff = centers[:, None, :] - centers[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    np.fill_diagonal(dist, np.inf)
    assert dist.min() >= 2.0


def test_layout_viewpoint_constraints():
    vp = (0.0, 0.0, 1.7)
    layout = generate_trial_layout(
        2, layout_seed=9, viewpoint=vp, min_view_angle_deg=12.0, min_view_distance=1.5
    )
    rel = layout.centers() - np.asarray(vp)
    dists = np.linalg.norm(rel, axis=1)
    assert dists.min() >= 1.5
    unit = rel / dists[:, None]
    cosang = unit @ unit.T
    np.fill_diagonal(cosang, -1.0)
    min_angle = np.degrees(np.arccos(np.clip(cosang.max(), -1.0, 1.0)))
    assert min_angle >= 12.0 - 1e-9


def test_layout_centers_ordered_by_id():
    layout = generate_trial_layout(1, layout_seed=0)
    by_id = sorted(layout.placements, key=lambda a: a.id)
    assert [a.id for a in by_id] == list(HAZARD_IDS)
    np.testing.assert_array_equal(layout.centers(), np.array([a.center for a in by_id]))


def test_layout_infeasible_bounds_raise():
    with pytest.raises(PlacementInfeasible):
        generate_trial_layout(
            1, layout_seed=1, site_bounds=((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)), min_separation=5.0
        )


def test_trial_layout_requires_each_hazard_once():
    layout = generate_trial_layout(1, layout_seed=3)
    dup = layout.placements[:9] + (layout.placements[0],)
    with pytest.raises(ValueError):
        TrialLayout(trial_id=1, placements=dup, layout_seed=3)


def test_aoi_lookup_and_radius():
    layout = generate_trial_layout(1, layout_seed=11)
    aoi = layout.aoi(7)
    assert isinstance(aoi, HazardAoi)
    assert aoi.id == 7 and aoi.radius == 0.5
    with pytest.raises(KeyError):
        layout.aoi(0)
