"""Seeded random instances for oracle and property checks."""
from __future__ import annotations

import numpy as np

from .profiles import Profiles
from .scenario import GroundStation, HapNode, Scenario, StorageUnit, validate
from .wptlink import Modality, WptLink


def _node(rng: np.random.Generator, k: int, capacity_range: tuple[float, float]) -> HapNode:
    cap = rng.uniform(*capacity_range)
    specific = 700.0
    floor = float(rng.choice([0.0, 0.2]))
    unit = StorageUnit(
        specific_energy=specific,
        storage_mass=cap / specific,
        charge_efficiency=float(rng.uniform(0.8, 1.0)),
        discharge_efficiency=float(rng.uniform(0.8, 1.0)),
        soc_floor=floor,
        max_charge_power=float(rng.uniform(0.3, 1.0) * cap),
        max_discharge_power=float(rng.uniform(0.3, 1.0) * cap),
    )
    return HapNode(
        id=f"hap{k + 1}",
        pv_area=50.0,
        mass=40.0,
        storage=unit,
        position=(30.0 * k, 0.0, 20.0),
        initial_soc=float(rng.uniform(floor, 1.0)),
    )


def random_instance(
    rng: np.random.Generator,
    n_nodes: int,
    steps: int,
    n_links: int,
    energy_scale: float = 1000.0,
    capacity_range: tuple[float, float] = (300.0, 900.0),
    ground_slack: float = 1.5,
) -> tuple[Scenario, Profiles]:
    """A scenario skeleton with random storage plus random per-step energy profiles.

    Link endpoints are drawn among distinct node pairs. The ground cap is
    ``ground_slack`` times the worst single-step cluster deficit, so the
    instance is always feasible when ``ground_slack >= 1``.
    """
    nodes = [_node(rng, k, capacity_range) for k in range(n_nodes)]
    pairs = [(a, b) for a in range(n_nodes) for b in range(n_nodes) if a != b]
    chosen = rng.permutation(len(pairs))[:n_links] if pairs else []
    links = tuple(
        WptLink(from_id=nodes[pairs[p][0]].id, to_id=nodes[pairs[p][1]].id, modality=Modality.OPTICAL)
        for p in chosen
    )
    L = len(links)
    daylight = rng.random((n_nodes, steps)) < 0.6
    gen = np.where(daylight, rng.uniform(0, 1.5, (n_nodes, steps)), 0.0) * energy_scale
    load = rng.uniform(0.1, 1.0, (n_nodes, steps)) * energy_scale
    eff = rng.uniform(0.2, 0.95, (L, steps))
    link_cap = rng.uniform(0.1, 1.0, (L, steps)) * energy_scale
    worst = max(1.0, float(np.maximum(load - gen, 0.0).sum(axis=0).max()))
    total = np.full(steps, ground_slack * worst)
    node_cap = np.tile(total, (n_nodes, 1))
    scenario = validate(Scenario(
        nodes=tuple(nodes),
        links=links,
        ground_stations=(GroundStation(id="ground", max_supply_power=float(total[0])),),
        horizon_hours=float(steps),
        timestep_hours=1.0,
        name="random",
    ))
    return scenario, Profiles(gen, load, eff, link_cap, node_cap, total)


def oracle_instance(rng: np.random.Generator) -> tuple[Scenario, Profiles]:
    """Instance within the oracle's size limits: <= 2 nodes, <= 4 steps, <= 1 link."""
    n = int(rng.integers(1, 3))
    steps = int(rng.integers(1, 5))
    links = int(rng.integers(0, 2)) if n == 2 else 0
    return random_instance(rng, n, steps, links, energy_scale=400.0, capacity_range=(200.0, 600.0))


def dominance_instance(rng: np.random.Generator) -> tuple[Scenario, Profiles]:
    """3-5 nodes over a day, with a diurnal generation shape and ample ground supply."""
    n = int(rng.integers(3, 6))
    steps = 24
    max_links = n * (n - 1)
    links = int(rng.integers(1, min(max_links, 2 * n) + 1))
    scenario, prof = random_instance(rng, n, steps, links, energy_scale=3000.0,
                                     capacity_range=(2000.0, 15000.0), ground_slack=1.5)
    hours = np.arange(steps) + 0.5
    shape = np.clip(np.cos(np.radians(15 * (hours - 12))), 0, None)
    gen = np.outer(rng.uniform(0.5, 3.0, n), shape) * 3000.0
    worst = max(1.0, float(np.maximum(prof.load_wh - gen, 0.0).sum(axis=0).max()))
    total = np.full(steps, 1.5 * worst)
    return scenario, Profiles(gen, prof.load_wh, prof.link_eff, prof.link_cap_wh,
                              np.tile(total, (n, 1)), total)
