"""The simulated construction site: hazard catalog and per-trial layouts.

Ten fixed hazards (five categories) are re-placed at random positions for
every trial so participants cannot learn locations across trials.  Each
hazard occupies a spherical area of interest; hit testing elsewhere only
uses the sphere center, the radius drives the non-overlap constraint.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import PlacementInfeasible


class HazardCategory(enum.Enum):
    FALL = "Fall"
    ELECTRICAL = "Electrical"
    TRIP = "Trip"
    CHEMICAL = "Chemical"
    PRESSURE = "Pressure"


# id -> (category, description); the fixed ten-hazard catalog.
_CATALOG: dict[int, tuple[HazardCategory, str]] = {
    1: (HazardCategory.FALL, "unprotected object near the edge"),
    2: (HazardCategory.ELECTRICAL, "unprotected electric cables without proper conduit"),
    3: (HazardCategory.TRIP, "unprotected ladder"),
    4: (HazardCategory.FALL, "unprotected barrel near the edge"),
    5: (HazardCategory.CHEMICAL, "an unmarked bucket with unknown chemical fluid without lid"),
    6: (HazardCategory.TRIP, "unprotected bricks on the ground"),
    7: (HazardCategory.ELECTRICAL, "unprotected junction box without proper protection"),
    8: (HazardCategory.CHEMICAL, "unprotected igneous chemical fluids"),
    9: (HazardCategory.CHEMICAL, "an unmarked bucket with unknown chemical fluid without lid"),
    10: (HazardCategory.PRESSURE, "gas cylinder without proper restraints in the work zone"),
}

HAZARD_IDS = tuple(sorted(_CATALOG))

CATEGORY_MEMBERS: dict[HazardCategory, tuple[int, ...]] = {
    HazardCategory.FALL: (1, 4),
    HazardCategory.ELECTRICAL: (2, 7),
    HazardCategory.TRIP: (3, 6),
    HazardCategory.CHEMICAL: (5, 8, 9),
    HazardCategory.PRESSURE: (10,),
}


def category_of(hazard_id: int) -> HazardCategory:
    return _CATALOG[hazard_id][0]


def hazard_catalog() -> list[tuple[int, HazardCategory, str]]:
    """The fixed (id, category, description) rows, ordered by id."""
    return [(i, _CATALOG[i][0], _CATALOG[i][1]) for i in HAZARD_IDS]


# Site defaults: a 30 m x 30 m floor, 5 m tall.  Configuration, not contract.
DEFAULT_SITE_BOUNDS = ((-15.0, -15.0, 0.0), (15.0, 15.0, 5.0))
DEFAULT_MIN_SEPARATION = 2.0
DEFAULT_AOI_RADIUS = 0.5
PLACEMENT_ATTEMPT_CAP = 10_000


@dataclass(frozen=True)
class HazardAoi:
    """One placed hazard: catalog row plus its spherical volume."""

    id: int
    category: HazardCategory
    description: str
    center: tuple[float, float, float]
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"AOI radius must be > 0, got {self.radius!r}")


@dataclass(frozen=True)
class TrialLayout:
    """All ten hazards placed for one trial."""

    trial_id: int
    placements: tuple[HazardAoi, ...]
    layout_seed: int

    def __post_init__(self):
        ids = sorted(p.id for p in self.placements)
        if ids != list(HAZARD_IDS):
            raise ValueError(f"layout must contain each hazard id exactly once, got {ids}")

    def centers(self) -> np.ndarray:
        """(10, 3) center array ordered by hazard id."""
        ordered = sorted(self.placements, key=lambda p: p.id)
        return np.array([p.center for p in ordered], dtype=np.float64)

    def aoi(self, hazard_id: int) -> HazardAoi:
        for p in self.placements:
            if p.id == hazard_id:
                return p
        raise KeyError(hazard_id)


def _angle_between(u: np.ndarray, v: np.ndarray) -> float:
    c = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return math.degrees(math.acos(max(-1.0, min(1.0, c))))


def generate_trial_layout(
    trial_id: int,
    layout_seed: int,
    site_bounds: Sequence[Sequence[float]] = DEFAULT_SITE_BOUNDS,
    min_separation: float = DEFAULT_MIN_SEPARATION,
    *,
    aoi_radius: float = DEFAULT_AOI_RADIUS,
    viewpoint: Optional[Sequence[float]] = None,
    min_view_angle_deg: float = 0.0,
    min_view_distance: float = 1.5,
) -> TrialLayout:
    """Place all ten hazards at random, deterministic in (trial_id, layout_seed).

    Sequential rejection sampling: candidates are drawn uniformly in the
    bounding box and rejected while closer than max(min_separation,
    2 * aoi_radius) to an already placed hazard.  When a viewpoint is
    given, candidates must also keep min_view_distance from it and
    min_view_angle_deg of angular separation seen from it, which keeps
    hazards from stacking along one line of sight.

    Raises PlacementInfeasible after 10,000 total failed attempts.
    """
    lo = np.asarray(site_bounds[0], dtype=np.float64)
    hi = np.asarray(site_bounds[1], dtype=np.float64)
    if lo.shape != (3,) or hi.shape != (3,) or np.any(hi <= lo):
        raise ValueError(f"bad site bounds: {site_bounds!r}")
    sep = max(min_separation, 2.0 * aoi_radius)
    vp = None if viewpoint is None else np.asarray(viewpoint, dtype=np.float64)

    rng = np.random.default_rng([int(layout_seed) & 0xFFFFFFFF, int(trial_id)])
    placed: list[np.ndarray] = []
    attempts = 0
    while len(placed) < len(HAZARD_IDS):
        if attempts >= PLACEMENT_ATTEMPT_CAP:
            raise PlacementInfeasible(
                f"placed {len(placed)}/{len(HAZARD_IDS)} hazards after "
                f"{PLACEMENT_ATTEMPT_CAP} attempts (bounds too tight for "
                f"separation {sep} m)"
            )
        attempts += 1
        cand = lo + rng.random(3) * (hi - lo)
        if any(np.linalg.norm(cand - p) < sep for p in placed):
            continue
        if vp is not None:
            rel = cand - vp
            if np.linalg.norm(rel) < min_view_distance:
                continue
            if min_view_angle_deg > 0.0 and any(
                _angle_between(rel, p - vp) < min_view_angle_deg for p in placed
            ):
                continue
        placed.append(cand)

    placements = tuple(
        HazardAoi(
            id=i,
            category=_CATALOG[i][0],
            description=_CATALOG[i][1],
            center=(float(c[0]), float(c[1]), float(c[2])),
            radius=aoi_radius,
        )
        for i, c in zip(HAZARD_IDS, placed)
    )
    return TrialLayout(trial_id=trial_id, placements=placements, layout_seed=layout_seed)
