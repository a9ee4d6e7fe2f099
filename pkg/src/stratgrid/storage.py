"""State-of-charge dynamics for batteries and regenerative fuel cells.

Energies are Wh. ``charge_wh`` is bus energy drawn into the unit and
``discharge_wh`` is energy delivered to the bus, so

    E' = E + eta_c * charge_wh - discharge_wh / eta_d
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, SimultaneousChargeDischarge
from .scenario import StorageUnit

# absolute slack, relative to capacity, for floating-point bound checks
BOUND_TOL = 1e-9


@dataclass(frozen=True)
class SocTrajectory:
    node_id: str
    energy_wh: np.ndarray
    capacity_wh: float

    @property
    def soc(self) -> np.ndarray:
        return self.energy_wh / self.capacity_wh


def step(unit: StorageUnit, energy_wh: float, charge_wh: float, discharge_wh: float, timestep: float) -> float:
    tol = BOUND_TOL * unit.capacity_wh
    if charge_wh < 0 or discharge_wh < 0:
        raise BoundsError("charge and discharge must be >= 0")
    if charge_wh > 0 and discharge_wh > 0:
        raise SimultaneousChargeDischarge(f"charge {charge_wh} Wh and discharge {discharge_wh} Wh in one step")
    if charge_wh > unit.max_charge_power * timestep + tol:
        raise BoundsError(f"charge {charge_wh} Wh exceeds power limit")
    if discharge_wh > unit.max_discharge_power * timestep + tol:
        raise BoundsError(f"discharge {discharge_wh} Wh exceeds power limit")
    new = energy_wh + unit.charge_efficiency * charge_wh - discharge_wh / unit.discharge_efficiency
    if new < unit.floor_wh - tol or new > unit.capacity_wh + tol:
        raise BoundsError(
            f"stored energy {new:.6f} Wh leaves [{unit.floor_wh:.6f}, {unit.capacity_wh:.6f}]"
        )
    return new


def usable_energy(unit: StorageUnit, energy_wh: float) -> float:
    """Energy deliverable to the bus before hitting the SOC floor."""
    return unit.discharge_efficiency * (energy_wh - unit.floor_wh)


def trajectory(unit: StorageUnit, node_id: str, initial_wh: float, charge, discharge, timestep: float) -> SocTrajectory:
    energy = [initial_wh]
    for c, d in zip(charge, discharge):
        energy.append(step(unit, energy[-1], float(c), float(d), timestep))
    return SocTrajectory(node_id, np.array(energy), unit.capacity_wh)
