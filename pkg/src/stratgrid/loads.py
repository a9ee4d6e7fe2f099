"""Electrical demand: station-keeping propulsion plus mission payloads."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LengthMismatch
from .scenario import Environment, HapNode, PayloadSchedule

GRAVITY = 9.81


@dataclass(frozen=True)
class LoadProfile:
    node_id: str
    station_keeping: np.ndarray
    comm: np.ndarray
    sensing: np.ndarray
    compute: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.station_keeping + self.comm + self.sensing + self.compute


def station_keeping_power(node: HapNode, wind_speed: float) -> float:
    """Level-flight shaft demand m g v / (L/D * eta), flying at least as fast as the wind."""
    if node.lift_to_drag <= 0 or node.propulsive_efficiency <= 0:
        raise DomainError("lift_to_drag and propulsive_efficiency must be positive")
    if wind_speed < 0:
        raise DomainError("wind speed must be >= 0")
    v = max(node.airspeed, wind_speed)
    return node.mass * GRAVITY * v / (node.lift_to_drag * node.propulsive_efficiency)


def payload_power(schedule: PayloadSchedule, hour: float) -> tuple[float, float, float]:
    comm = sensing = compute = 0.0
    for e in schedule.entries:
        if e.start_hour <= hour < e.end_hour:
            comm += e.comm_power
            sensing += e.sensing_power
            compute += e.compute_power
    return comm, sensing, compute


def load_profile(node: HapNode, env: Environment, horizon: float, timestep: float) -> LoadProfile:
    steps = int(round(horizon / timestep))
    # no profile at all means calm air
    wind = env.wind_speed_profile if env.wind_speed_profile is not None else (0.0,) * steps
    if len(wind) != steps:
        raise LengthMismatch(f"wind profile has {len(wind)} entries, expected {steps}")
    sk = np.array([station_keeping_power(node, w) for w in wind])
    payload = np.array([payload_power(node.payload_schedule, k * timestep) for k in range(steps)]).reshape(steps, 3)
    return LoadProfile(node.id, sk, payload[:, 0], payload[:, 1], payload[:, 2])
