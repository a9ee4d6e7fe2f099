import numpy as np
import pytest
from hypothesis import given, strategies as st

from stratgrid import storage
from stratgrid.errors import BoundsError, SimultaneousChargeDischarge
from stratgrid.scenario import StorageUnit

UNIT = StorageUnit(specific_energy=700.0, storage_mass=10.0)   # 7000 Wh, floor 1400 Wh


def test_charge_applies_charge_efficiency():
    assert storage.step(UNIT, 3000.0, 1000.0, 0.0, 1.0) == pytest.approx(3950.0)


def test_discharge_withdraws_more_than_it_delivers():
    assert storage.step(UNIT, 3000.0, 0.0, 950.0, 1.0) == pytest.approx(2000.0)


def test_floor_and_capacity_enforced():
    with pytest.raises(BoundsError):
        storage.step(UNIT, 1500.0, 0.0, 200.0, 1.0)
    with pytest.raises(BoundsError):
        storage.step(UNIT, 6900.0, 200.0, 0.0, 1.0)


def test_power_limits():
    with pytest.raises(BoundsError):
        storage.step(UNIT, 3000.0, UNIT.max_charge_power * 1.01, 0.0, 1.0)
    storage.step(UNIT, 3000.0, UNIT.max_charge_power * 0.5, 0.0, 0.5)


def test_simultaneous_charge_and_discharge_rejected():
    with pytest.raises(SimultaneousChargeDischarge):
        storage.step(UNIT, 3000.0, 10.0, 10.0, 1.0)


def test_negative_flows_rejected():
    with pytest.raises(BoundsError):
        storage.step(UNIT, 3000.0, -1.0, 0.0, 1.0)


def test_usable_energy():
    assert storage.usable_energy(UNIT, 3400.0) == pytest.approx(0.95 * 2000.0)


@given(st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=48), st.floats(0.2, 1.0))
def test_clipped_actions_keep_soc_in_bounds(actions, soc0):
    """Any action clipped to the feasible range keeps the trajectory within [floor, capacity]."""
    e = soc0 * UNIT.capacity_wh
    charge, discharge = [], []
    for a in actions:
        if a >= 0:
            room = (UNIT.capacity_wh - e) / UNIT.charge_efficiency
            c = a * min(room, UNIT.max_charge_power)
            charge.append(c)
            discharge.append(0.0)
            e += UNIT.charge_efficiency * c
        else:
            avail = (e - UNIT.floor_wh) * UNIT.discharge_efficiency
            d = -a * min(avail, UNIT.max_discharge_power)
            charge.append(0.0)
            discharge.append(d)
            e -= d / UNIT.discharge_efficiency
    traj = storage.trajectory(UNIT, "n", soc0 * UNIT.capacity_wh, charge, discharge, 1.0)
    tol = storage.BOUND_TOL * UNIT.capacity_wh
    assert np.all(traj.energy_wh >= UNIT.floor_wh - tol)
    assert np.all(traj.energy_wh <= UNIT.capacity_wh + tol)
    assert traj.soc[0] == pytest.approx(soc0)


def test_worked_examples():
    assert storage.step(UNIT, 5000.0, 1000.0, 0.0, 1.0) == pytest.approx(5950.0)
    assert storage.step(UNIT, 5000.0, 0.0, 0.0, 1.0) == 5000.0
    assert storage.usable_energy(UNIT, UNIT.floor_wh) == 0.0
    assert storage.usable_energy(UNIT, 7000.0) == pytest.approx(5320.0)
    rfcs = StorageUnit(technology="RFCS", specific_energy=700.0, storage_mass=10.0,
                       charge_efficiency=0.731, discharge_efficiency=0.731)
    assert storage.usable_energy(rfcs, 7000.0) == pytest.approx(4093.6)
