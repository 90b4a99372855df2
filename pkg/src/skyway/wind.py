"""Wind-adjusted kinematics and battery consumption for skyway legs.

Ground speed comes from the classic wind triangle: the wind vector is split
into an along-track component (headwind negative, tailwind positive) and a
cross-track component the drone must crab against.  Travel time and battery
use per leg follow from the resulting ground speed.

Conventions: bearings are compass degrees in [0, 360) (0 = +y, 90 = +x),
wind bearing is the direction the wind blows FROM (meteorological), speeds
are km/h, distances km, times hours.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

from .errors import WindInfeasibleError

#: Battery percent spent per 10 km at the 1 kg reference payload in calm air.
DEFAULT_BASE_RATE_PCT_PER_10KM = 25.0

#: Airframe mass equivalent used to scale consumption with payload weight.
DEFAULT_FRAME_MASS_KG = 3.0


@dataclass(frozen=True)
class WindSample:
    """Wind at one instant: speed (km/h) and the bearing it blows from."""

    speed: float
    bearing: float

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError(f"wind speed must be >= 0, got {self.speed}")
        if not 0.0 <= self.bearing < 360.0:
            raise ValueError(f"wind bearing must be in [0, 360), got {self.bearing}")


CALM = WindSample(0.0, 0.0)


@dataclass(frozen=True)
class WindField:
    """Piecewise-constant wind timeline.

    ``epochs`` maps epoch start hours to samples; the first epoch must start
    at t = 0 and starts must be strictly increasing.
    """

    epochs: tuple[tuple[float, WindSample], ...]

    def __post_init__(self):
        if not self.epochs:
            raise ValueError("wind field needs at least one epoch")
        starts = [start for start, _ in self.epochs]
        if starts[0] != 0.0:
            raise ValueError("first wind epoch must start at t=0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("wind epoch starts must be strictly increasing")
        object.__setattr__(self, "_starts", tuple(starts))

    @classmethod
    def constant(cls, sample: WindSample) -> "WindField":
        return cls(((0.0, sample),))

    def at(self, t: float) -> WindSample:
        """Sample in effect at hour ``t`` (clamped to the first epoch)."""
        idx = bisect_right(self._starts, t) - 1
        return self.epochs[max(idx, 0)][1]

    def next_change_after(self, t: float) -> float | None:
        """Start of the next epoch strictly after ``t``, or None."""
        idx = bisect_right(self._starts, t)
        if idx >= len(self.epochs):
            return None
        return self.epochs[idx][0]


@dataclass(frozen=True)
class LegKinematics:
    """Resolved wind triangle for one leg under a fixed wind sample.

    ``wind_along_kmh`` is the along-track wind component: negative for
    headwind, positive for tailwind.  ``air_along_kmh`` is the share of air
    speed left for forward progress after crabbing into the crosswind, so
    ``ground_speed_kmh = wind_along_kmh + air_along_kmh``.
    """

    course_correction_deg: float
    wind_along_kmh: float
    wind_cross_kmh: float
    air_along_kmh: float
    ground_speed_kmh: float
    air_speed_kmh: float


def course_correction(bearing_deg: float, wind_bearing_deg: float) -> float:
    """Angle between course and wind origin, normalized to (-180, 180]."""
    delta = (bearing_deg - wind_bearing_deg) % 360.0
    if delta > 180.0:
        delta -= 360.0
    return delta


def ground_speed(air_speed_kmh: float, wind: WindSample, bearing_deg: float) -> LegKinematics:
    """Resolve the wind triangle for a leg flown on ``bearing_deg``.

    Raises WindInfeasibleError when the crosswind component exceeds the air
    speed or the resulting ground speed is not positive; callers treat such
    legs as temporarily unavailable rather than as hard failures.
    """
    if air_speed_kmh <= 0:
        raise ValueError(f"air speed must be > 0, got {air_speed_kmh}")
    delta = course_correction(bearing_deg, wind.bearing)
    supplement = math.radians(180.0 - delta)
    along = wind.speed * math.cos(supplement)
    cross = wind.speed * math.sin(supplement)
    under = air_speed_kmh * air_speed_kmh - cross * cross
    if under < 0:
        raise WindInfeasibleError(
            f"crosswind {abs(cross):.1f} km/h exceeds air speed {air_speed_kmh:.1f} km/h"
        )
    forward = math.sqrt(under)
    gs = along + forward
    if gs <= 0:
        raise WindInfeasibleError(f"ground speed {gs:.1f} km/h is not positive")
    return LegKinematics(
        course_correction_deg=delta,
        wind_along_kmh=along,
        wind_cross_kmh=cross,
        air_along_kmh=forward,
        ground_speed_kmh=gs,
        air_speed_kmh=air_speed_kmh,
    )


def travel_time(distance_km: float, kin: LegKinematics) -> float:
    """Hours to cover ``distance_km`` at the leg's ground speed."""
    if distance_km <= 0:
        raise ValueError(f"distance must be > 0, got {distance_km}")
    if kin.ground_speed_kmh <= 0:
        raise ValueError("ground speed must be > 0")
    return distance_km / kin.ground_speed_kmh


def battery_consumed(
    distance_km: float,
    package_weight_kg: float,
    kin: LegKinematics,
    *,
    base_rate_pct_per_10km: float = DEFAULT_BASE_RATE_PCT_PER_10KM,
    frame_mass_kg: float = DEFAULT_FRAME_MASS_KG,
) -> float:
    """Battery percent consumed over one leg.

    The base rate is the calm-air consumption per 10 km at the 1 kg
    reference payload; it scales linearly with distance, with total lifted
    mass relative to the reference, and with the ratio of air speed to
    ground speed (headwind costs more, tailwind less).
    """
    if distance_km < 0:
        raise ValueError(f"distance must be >= 0, got {distance_km}")
    if package_weight_kg <= 0:
        raise ValueError(f"package weight must be > 0, got {package_weight_kg}")
    if distance_km == 0:
        return 0.0
    weight_factor = (frame_mass_kg + package_weight_kg) / (frame_mass_kg + 1.0)
    wind_factor = kin.air_speed_kmh / kin.ground_speed_kmh
    return base_rate_pct_per_10km * (distance_km / 10.0) * weight_factor * wind_factor


@dataclass(frozen=True)
class EnergyParams:
    """Configured constants for the consumption model."""

    base_rate_pct_per_10km: float = DEFAULT_BASE_RATE_PCT_PER_10KM
    frame_mass_kg: float = DEFAULT_FRAME_MASS_KG

    def consumed(self, distance_km: float, package_weight_kg: float, kin: LegKinematics) -> float:
        return battery_consumed(
            distance_km,
            package_weight_kg,
            kin,
            base_rate_pct_per_10km=self.base_rate_pct_per_10km,
            frame_mass_kg=self.frame_mass_kg,
        )


DEFAULT_ENERGY = EnergyParams()
