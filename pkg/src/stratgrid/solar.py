"""Solar geometry, above-cloud irradiance and PV output."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .scenario import Environment, HapNode


@dataclass(frozen=True)
class SunState:
    declination: float
    hour_angle: float
    zenith_angle: float
    cos_zenith: float


@dataclass(frozen=True)
class GenerationProfile:
    node_id: str
    power_w: np.ndarray


def declination(day_of_year: int) -> float:
    """Cooper's formula, degrees."""
    return 23.45 * math.sin(math.radians(360.0 * (284 + day_of_year) / 365.0))


def sun_state(latitude: float, day_of_year: int, hour: float) -> SunState:
    if not -90.0 <= latitude <= 90.0:
        raise DomainError(f"latitude {latitude} outside [-90, 90]")
    decl = declination(day_of_year)
    ha = 15.0 * (hour - 12.0)
    phi, delta, h = map(math.radians, (latitude, decl, ha))
    cz = math.sin(phi) * math.sin(delta) + math.cos(phi) * math.cos(delta) * math.cos(h)
    cz = max(-1.0, min(1.0, cz))
    return SunState(declination=decl, hour_angle=ha, zenith_angle=math.degrees(math.acos(cz)), cos_zenith=cz)


def _day_and_hour(env: Environment, hour: float) -> tuple[int, float]:
    # horizons longer than a day roll the calendar forward
    days, h = divmod(hour, 24.0)
    day = (env.day_of_year - 1 + int(days)) % 365 + 1
    return day, h


def irradiance_from_cos(env: Environment, cos_zenith: float) -> float:
    return env.solar_constant * env.atmospheric_transmittance * max(0.0, cos_zenith)


def irradiance(env: Environment, hour: float) -> float:
    """Direct beam on a horizontal array above the cloud deck, W/m^2."""
    day, h = _day_and_hour(env, hour)
    return irradiance_from_cos(env, sun_state(env.latitude, day, h).cos_zenith)


def pv_power(node: HapNode, irradiance_w_m2: float) -> float:
    if irradiance_w_m2 < 0:
        raise DomainError("irradiance must be >= 0")
    return irradiance_w_m2 * node.pv_area * node.system_efficiency


def generation_profile(node: HapNode, env: Environment, horizon: float, timestep: float) -> GenerationProfile:
    """Per-step power sampled at each step midpoint."""
    steps = int(round(horizon / timestep))
    power = np.array([pv_power(node, irradiance(env, (k + 0.5) * timestep)) for k in range(steps)])
    return GenerationProfile(node.id, power)
