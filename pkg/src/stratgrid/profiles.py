"""Per-step energy inputs for dispatch, assembled from the physical models.

All arrays are Wh per step: nodes x steps, links x steps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import loads, solar
from .scenario import Scenario
from .wptlink import link_budget


@dataclass(frozen=True)
class Profiles:
    gen_wh: np.ndarray
    load_wh: np.ndarray
    link_eff: np.ndarray
    link_cap_wh: np.ndarray
    ground_node_cap_wh: np.ndarray
    ground_total_cap_wh: np.ndarray

    @property
    def steps(self) -> int:
        return self.gen_wh.shape[1]

    def scaled(self, k: float) -> "Profiles":
        return Profiles(self.gen_wh * k, self.load_wh * k, self.link_eff, self.link_cap_wh * k,
                        self.ground_node_cap_wh * k, self.ground_total_cap_wh * k)


def transfer_link_series(scenario: Scenario):
    """End-to-end efficiency and sendable-energy cap per transfer link and step."""
    dt = scenario.timestep_hours
    positions = scenario.positions()
    links = scenario.transfer_links
    eff = np.zeros((len(links), scenario.steps))
    cap = np.zeros_like(eff)
    for l, link in enumerate(links):
        rx_area = scenario.node(link.to_id).receiver_area
        for t in range(scenario.steps):
            b = link_budget(link, positions, t, rx_area)
            eff[l, t] = b.end_to_end_eff
            # deliverable power caps what arrives; convert back to the sending side
            cap[l, t] = b.max_deliverable_power * dt / b.end_to_end_eff if b.end_to_end_eff > 0 else 0.0
    return eff, cap


def ground_caps(scenario: Scenario):
    """Per-node and cluster-wide delivered ground energy caps.

    Without intake links every node may draw on the whole ground supply. With
    intake links a node may draw only what its own intake links can deliver.
    """
    dt = scenario.timestep_hours
    steps = scenario.steps
    total = np.full(steps, sum(g.max_supply_power for g in scenario.ground_stations) * dt)
    intake = scenario.intake_links
    if not intake:
        return np.tile(total, (len(scenario.nodes), 1)), total
    stations = {g.id: g for g in scenario.ground_stations}
    positions = scenario.positions()
    node_cap = np.zeros((len(scenario.nodes), steps))
    index = {nid: i for i, nid in enumerate(scenario.node_ids)}
    for link in intake:
        i = index[link.to_id]
        rx_area = scenario.node(link.to_id).receiver_area
        supply = stations[link.from_id].max_supply_power
        for t in range(steps):
            b = link_budget(link, positions, t, rx_area)
            node_cap[i, t] += min(b.max_deliverable_power, supply * b.end_to_end_eff) * dt
    return node_cap, total


def compute_profiles(scenario: Scenario) -> Profiles:
    dt = scenario.timestep_hours
    env = scenario.environment
    gen = np.array([
        solar.generation_profile(n, env, scenario.horizon_hours, dt).power_w for n in scenario.nodes
    ]).reshape(len(scenario.nodes), scenario.steps) * dt
    load = np.array([
        loads.load_profile(n, env, scenario.horizon_hours, dt).total for n in scenario.nodes
    ]).reshape(len(scenario.nodes), scenario.steps) * dt
    eff, cap = transfer_link_series(scenario)
    node_cap, total = ground_caps(scenario)
    return Profiles(gen, load, eff, cap, node_cap, total)
