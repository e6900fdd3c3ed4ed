"""Model-unit to Galactic-unit conversion of the learnt solar location.

The radial coordinate ``s1`` (model units) is scaled so the Sun sits at
``r_sun_kpc``; one model length unit is then ``r_sun_kpc / s1`` kpc and
the bar pattern speed is ``v0 / (1 model unit) = v0 * s1 / r_sun_kpc``.
The angular coordinate ``s2`` is already the bar-Sun angle in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from tvgp.analysis import HpdInterval
from tvgp.errors import DomainError


@dataclass(frozen=True)
class UnitConstants:
    r_sun_kpc: float = 8.0
    v0_kms: float = 220.0

    def __post_init__(self):
        if not (self.r_sun_kpc > 0 and self.v0_kms > 0):
            raise DomainError("unit constants must be positive")


def omega_bar(s1_model: float, c: UnitConstants = UnitConstants()) -> float:
    """Bar pattern speed in km/s/kpc."""
    if not s1_model > 0:
        raise DomainError(f"radial coordinate must be positive, got {s1_model}")
    return c.v0_kms * s1_model / c.r_sun_kpc


def s1_from_omega(omega: float, c: UnitConstants = UnitConstants()) -> float:
    if not omega > 0:
        raise DomainError(f"pattern speed must be positive, got {omega}")
    return omega * c.r_sun_kpc / c.v0_kms


def bar_angle_deg(s2_model_rad: float) -> float:
    return math.degrees(s2_model_rad)


def convert_interval(iv: HpdInterval, kind: str, c: UnitConstants = UnitConstants()) -> HpdInterval:
    """Map HPD endpoints through the (increasing) conversion for ``s1``/``s2``."""
    if kind == "s1":
        f = lambda v: omega_bar(v, c)  # noqa: E731
    elif kind == "s2":
        f = bar_angle_deg
    else:
        raise KeyError(f"no unit conversion for {kind!r}")
    return HpdInterval(f(iv.lower), f(iv.upper), iv.mass)
