"""Build the bundled three-platform reference scenario and write it as JSON.

The published case study gives the PV area, the specific energy of the
batteries, the 20% SOC floor and the qualitative roles of the platforms
(HAP1 large storage, HAP2 heavily loaded with small storage, HAP3 moderate).
Payload profiles, battery masses, distances and wind are not given; the
values below are a reconstruction chosen to realise those roles.

    python scripts/make_case_study.py [output.json]
"""
from __future__ import annotations

import sys
from pathlib import Path

from stratgrid.scenario import (
    Environment, GroundStation, HapNode, PayloadEntry, PayloadSchedule, Scenario, StorageUnit,
    save_scenario, validate,
)
from stratgrid.wptlink import Modality, WptLink

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "stratgrid" / "data" / "case_study.json"


def node(node_id, battery_kg, mass, airspeed, day_payload, night_payload, x_km, initial_soc):
    return HapNode(
        id=node_id,
        pv_area=50.0,
        mass=mass,
        airspeed=airspeed,
        storage=StorageUnit(specific_energy=700.0, storage_mass=battery_kg, soc_floor=0.2),
        payload_schedule=PayloadSchedule((
            PayloadEntry(0.0, 6.0, *night_payload),
            PayloadEntry(6.0, 18.0, *day_payload),
            PayloadEntry(18.0, 24.0, *night_payload),
        )),
        position=(x_km, 0.0, 20.0),
        receiver_area=2.0,
        initial_soc=initial_soc,
    )


def build() -> Scenario:
    nodes = (
        node("hap1", 25.0, 150.0, 20.0, (600.0, 300.0, 200.0), (600.0, 0.0, 200.0), 0.0, 0.5),
        node("hap2", 10.0, 400.0, 25.0, (5500.0, 2000.0, 500.0), (600.0, 0.0, 200.0), 10.0, 0.5),
        node("hap3", 15.0, 150.0, 20.0, (600.0, 300.0, 200.0), (600.0, 0.0, 200.0), 20.0, 0.5),
    )
    links = (
        WptLink("hap1", "hap2", Modality.OPTICAL, max_tx_power=10000.0),
        WptLink("hap3", "hap2", Modality.OPTICAL, max_tx_power=10000.0),
    )
    return validate(Scenario(
        nodes=nodes,
        links=links,
        ground_stations=(GroundStation(id="ground", position=(10.0, 0.0, 0.0), max_supply_power=20000.0),),
        environment=Environment(latitude=0.0, day_of_year=80),
        horizon_hours=24.0,
        timestep_hours=1.0,
        name="case_study",
    ))


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    out = Path(argv[0]) if argv else DEFAULT_OUT
    save_scenario(build(), out)
    print(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
