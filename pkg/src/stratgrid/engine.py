"""Replay of dispatch plans against the physical models, plus reporting.

The replay never trusts LP residuals. Generation, load and link efficiency
are recomputed from the scenario (or taken from explicitly supplied
profiles), stored energy is stepped through ``storage.step``, and every
node balance is re-evaluated.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import storage
from .dispatch import DispatchPlan, Mode, ground_shortfall
from .errors import ConservationViolation, IoError, PlanMismatch, ScenarioMismatch
from .profiles import Profiles, compute_profiles
from .scenario import Scenario

# residual tolerance relative to the magnitude of the energies in play
REL_TOL = 1e-9

CSV_COLUMNS = (
    "node_id", "step", "hour", "gen_w", "load_w", "charge_w", "discharge_w",
    "transfer_in_w", "transfer_out_w", "ground_w", "curtail_w", "soc",
)


@dataclass(frozen=True)
class EnergyLedger:
    """Cluster-wide energy totals over the horizon (Wh)."""

    generation: float
    ground: float
    load: float
    curtailment: float
    link_loss: float
    storage_loss: float
    stored_change: float

    @property
    def imbalance(self) -> float:
        return (self.generation + self.ground
                - self.load - self.curtailment - self.link_loss - self.storage_loss - self.stored_change)

    @property
    def scale(self) -> float:
        return max(1.0, self.generation, self.ground, self.load)


@dataclass(frozen=True)
class SimulationResult:
    scenario: Scenario
    plan: DispatchPlan
    profiles: Profiles
    energy_wh: np.ndarray          # nodes x (steps + 1), replayed
    residual_wh: np.ndarray        # nodes x steps
    transfer_in_wh: np.ndarray
    transfer_out_wh: np.ndarray
    ledger: EnergyLedger
    shortfall: np.ndarray          # per-node bool

    @property
    def mode(self) -> Mode:
        return self.plan.mode

    @property
    def timestep(self) -> float:
        return self.scenario.timestep_hours

    @property
    def soc(self) -> np.ndarray:
        caps = np.array([n.storage.capacity_wh for n in self.scenario.nodes])
        return self.energy_wh / caps[:, None]

    def power_series(self) -> dict[str, np.ndarray]:
        """Step-average powers (W), nodes x steps."""
        dt = self.timestep
        return {
            "gen_w": self.profiles.gen_wh / dt,
            "load_w": self.profiles.load_wh / dt,
            "charge_w": self.plan.charge_wh / dt,
            "discharge_w": self.plan.delivered_discharge_wh / dt,
            "transfer_in_w": self.transfer_in_wh / dt,
            "transfer_out_w": self.transfer_out_wh / dt,
            "ground_w": self.plan.ground_wh / dt,
            "curtail_w": self.plan.curtail_wh / dt,
        }

    def soc_swing(self) -> np.ndarray:
        """Mean absolute per-step SOC change for each node."""
        return np.abs(np.diff(self.soc, axis=1)).mean(axis=1)


@dataclass(frozen=True)
class DispatchReport:
    node_ids: tuple[str, ...]
    cooperative_objective: float
    independent_objective: float
    independent_unrepaired_objective: float
    reduction_fraction: float
    degenerate: bool
    cooperative_shortfall: tuple[bool, ...]
    independent_shortfall: tuple[bool, ...]
    night_steps: tuple[int, ...]
    night_deficit_wh: np.ndarray                 # nodes x steps, load - gen where nothing is generated
    night_ground_wh: dict = field(default_factory=dict)   # mode -> nodes x steps
    soc_swing: dict = field(default_factory=dict)          # mode -> per-node
    decomposition: dict = field(default_factory=dict)      # mode -> {term: Wh}
    ground_plus_curtail_reduction: float = 0.0


def _check_dimensions(scenario: Scenario, plan: DispatchPlan, profiles: Profiles) -> None:
    N, T = len(scenario.nodes), scenario.steps
    if tuple(plan.node_ids) != tuple(scenario.node_ids):
        raise PlanMismatch(f"plan nodes {list(plan.node_ids)} differ from scenario nodes {scenario.node_ids}")
    keys = tuple(lk.key for lk in scenario.transfer_links)
    if tuple(plan.link_keys) != keys:
        raise PlanMismatch(f"plan links {list(plan.link_keys)} differ from scenario links {list(keys)}")
    if abs(plan.timestep - scenario.timestep_hours) > 1e-12:
        raise PlanMismatch(f"plan timestep {plan.timestep} h differs from scenario {scenario.timestep_hours} h")
    for name in ("ground_wh", "curtail_wh", "charge_wh", "discharge_wh"):
        if getattr(plan, name).shape != (N, T):
            raise PlanMismatch(f"plan {name} has shape {getattr(plan, name).shape}, expected {(N, T)}")
    if plan.energy_wh.shape != (N, T + 1):
        raise PlanMismatch(f"plan energy_wh has shape {plan.energy_wh.shape}, expected {(N, T + 1)}")
    if plan.transfer_wh.shape != (len(keys), T):
        raise PlanMismatch(f"plan transfer_wh has shape {plan.transfer_wh.shape}, expected {(len(keys), T)}")
    if profiles.gen_wh.shape != (N, T) or profiles.link_eff.shape != (len(keys), T):
        raise PlanMismatch("profiles do not match the scenario dimensions")


def simulate(scenario: Scenario, plan: DispatchPlan, profiles: Profiles | None = None) -> SimulationResult:
    """Replay ``plan`` step by step and audit every node balance.

    Raises PlanMismatch on dimension or id mismatch and ConservationViolation
    when a balance or stored-energy residual exceeds tolerance.
    """
    if profiles is None:
        profiles = compute_profiles(scenario)
    _check_dimensions(scenario, plan, profiles)
    N, T = len(scenario.nodes), scenario.steps
    dt = scenario.timestep_hours
    index = {nid: i for i, nid in enumerate(scenario.node_ids)}

    inflow = np.zeros((N, T))
    outflow = np.zeros((N, T))
    for l, link in enumerate(scenario.transfer_links):
        sent = plan.transfer_wh[l]
        outflow[index[link.from_id]] += sent
        inflow[index[link.to_id]] += profiles.link_eff[l] * sent

    # storage replay
    energy = np.zeros((N, T + 1))
    for i, node in enumerate(scenario.nodes):
        unit = node.storage
        energy[i, 0] = node.initial_soc * unit.capacity_wh
        for t in range(T):
            delivered = unit.discharge_efficiency * plan.discharge_wh[i, t]
            energy[i, t + 1] = storage.step(unit, energy[i, t], plan.charge_wh[i, t], delivered, dt)
        drift = np.abs(energy[i] - plan.energy_wh[i])
        tol = REL_TOL * max(1.0, unit.capacity_wh)
        if drift.max() > tol:
            t = int(np.argmax(drift))
            raise ConservationViolation(node.id, max(t - 1, 0), float(energy[i, t] - plan.energy_wh[i, t]))

    delivered = plan.delivered_discharge_wh
    supply = profiles.gen_wh + delivered + inflow + plan.ground_wh
    demand = profiles.load_wh + plan.charge_wh + outflow + plan.curtail_wh
    residual = supply - demand
    magnitude = np.maximum(1.0, np.maximum(supply, demand))
    bad = np.abs(residual) > REL_TOL * magnitude
    if bad.any():
        i, t = np.argwhere(bad)[0]
        raise ConservationViolation(scenario.node_ids[i], int(t), float(residual[i, t]))

    ledger = EnergyLedger(
        generation=float(profiles.gen_wh.sum()),
        ground=float(plan.ground_wh.sum()),
        load=float(profiles.load_wh.sum()),
        curtailment=float(plan.curtail_wh.sum()),
        link_loss=float((outflow - inflow).sum()),
        storage_loss=float(plan.storage_loss_wh.sum()),
        stored_change=float((energy[:, -1] - energy[:, 0]).sum()),
    )
    if abs(ledger.imbalance) > REL_TOL * ledger.scale:
        raise ConservationViolation("cluster", T - 1, ledger.imbalance)

    return SimulationResult(
        scenario=scenario,
        plan=plan,
        profiles=profiles,
        energy_wh=energy,
        residual_wh=residual,
        transfer_in_wh=inflow,
        transfer_out_wh=outflow,
        ledger=ledger,
        shortfall=ground_shortfall(plan, profiles),
    )


def decomposition(plan: DispatchPlan) -> dict[str, float]:
    return {
        "ground_wh": plan.ground_total_wh,
        "curtail_wh": plan.curtail_total_wh,
        "storage_loss_wh": float(plan.storage_loss_wh.sum()),
        "link_loss_wh": float(plan.link_loss_wh.sum()),
        "repair_wh": plan.repair_cost_wh,
        "objective_wh": plan.repaired_objective_wh,
    }


def _reduction(coop: float, indep: float) -> tuple[float, bool]:
    if indep <= 0:
        return 0.0, True
    return 1.0 - coop / indep, False


def compare(coop: SimulationResult, indep: SimulationResult) -> DispatchReport:
    """Cooperative-versus-independent comparison.

    The independent objective is the repaired one: the greedy plan plus the
    ground energy needed to restore each battery to its initial level, so
    both modes end the horizon in the same storage state.
    """
    if coop.scenario != indep.scenario:
        raise ScenarioMismatch("the two results come from different scenarios")
    pc, pi = coop.profiles, indep.profiles
    for a, b in ((pc.gen_wh, pi.gen_wh), (pc.load_wh, pi.load_wh), (pc.link_eff, pi.link_eff)):
        if a.shape != b.shape or not np.array_equal(a, b):
            raise ScenarioMismatch("the two results were replayed against different profiles")

    c_obj = coop.plan.repaired_objective_wh
    i_obj = indep.plan.repaired_objective_wh
    reduction, degenerate = _reduction(c_obj, i_obj)
    gc_c = coop.plan.ground_total_wh + coop.plan.curtail_total_wh + coop.plan.repair_cost_wh
    gc_i = indep.plan.ground_total_wh + indep.plan.curtail_total_wh + indep.plan.repair_cost_wh
    gc_reduction, _ = _reduction(gc_c, gc_i)

    night = pc.gen_wh.sum(axis=0) <= 0
    deficit = np.where(night[None, :], np.maximum(0.0, pc.load_wh - pc.gen_wh), 0.0)
    results = {coop.mode.value: coop, indep.mode.value: indep}
    return DispatchReport(
        node_ids=tuple(coop.scenario.node_ids),
        cooperative_objective=c_obj,
        independent_objective=i_obj,
        independent_unrepaired_objective=indep.plan.objective_wh,
        reduction_fraction=reduction,
        degenerate=degenerate,
        cooperative_shortfall=tuple(bool(x) for x in coop.shortfall),
        independent_shortfall=tuple(bool(x) for x in indep.shortfall),
        night_steps=tuple(int(t) for t in np.flatnonzero(night)),
        night_deficit_wh=deficit,
        night_ground_wh={m: np.where(night[None, :], r.plan.ground_wh, 0.0) for m, r in results.items()},
        soc_swing={m: r.soc_swing() for m, r in results.items()},
        decomposition={m: decomposition(r.plan) for m, r in results.items()},
        ground_plus_curtail_reduction=gc_reduction,
    )


# --------------------------------------------------------------------------
# output


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def to_csv(result: SimulationResult) -> str:
    """One row per node per step; ``soc`` is the state of charge at the end of the step."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    series = result.power_series()
    soc = result.soc
    dt = result.timestep
    for i, nid in enumerate(result.scenario.node_ids):
        for t in range(result.scenario.steps):
            row = [nid, t, _fmt(t * dt)]
            row += [_fmt(series[col][i, t]) for col in CSV_COLUMNS[3:-1]]
            row.append(_fmt(soc[i, t + 1]))
            w.writerow(row)
    return buf.getvalue()


def summary_text(result: SimulationResult) -> str:
    plan = result.plan
    lines = [
        f"scenario: {result.scenario.name or 'unnamed'}",
        f"mode: {plan.mode.value}",
        f"steps: {result.scenario.steps}",
        f"timestep_h: {_fmt(result.timestep)}",
        "objective:",
    ]
    lines += [f"  {k}: {_fmt(v)}" for k, v in decomposition(plan).items()]
    lines.append(f"  ground_plus_curtail_wh: {_fmt(plan.ground_total_wh + plan.curtail_total_wh)}")
    led = result.ledger
    lines += [
        "ledger:",
        f"  generation_wh: {_fmt(led.generation)}",
        f"  ground_wh: {_fmt(led.ground)}",
        f"  load_wh: {_fmt(led.load)}",
        f"  curtail_wh: {_fmt(led.curtailment)}",
        f"  link_loss_wh: {_fmt(led.link_loss)}",
        f"  storage_loss_wh: {_fmt(led.storage_loss)}",
        f"  stored_change_wh: {_fmt(led.stored_change)}",
        f"  imbalance_wh: {_fmt(led.imbalance)}",
        f"max_balance_residual_wh: {_fmt(np.abs(result.residual_wh).max(initial=0.0))}",
        "nodes:",
    ]
    soc = result.soc
    swing = result.soc_swing()
    for i, nid in enumerate(result.scenario.node_ids):
        lines += [
            f"  {nid}:",
            f"    ground_wh: {_fmt(plan.ground_wh[i].sum())}",
            f"    curtail_wh: {_fmt(plan.curtail_wh[i].sum())}",
            f"    transfer_in_wh: {_fmt(result.transfer_in_wh[i].sum())}",
            f"    transfer_out_wh: {_fmt(result.transfer_out_wh[i].sum())}",
            f"    soc_min: {_fmt(soc[i].min())}",
            f"    soc_end: {_fmt(soc[i, -1])}",
            f"    mean_soc_swing: {_fmt(swing[i])}",
            f"    ground_shortfall: {str(bool(result.shortfall[i])).lower()}",
        ]
    return "\n".join(lines) + "\n"


def report_text(report: DispatchReport) -> str:
    lines = [
        f"cooperative_objective_wh: {_fmt(report.cooperative_objective)}",
        f"independent_objective_wh: {_fmt(report.independent_objective)}",
        f"independent_unrepaired_objective_wh: {_fmt(report.independent_unrepaired_objective)}",
        f"reduction_fraction: {_fmt(report.reduction_fraction)}",
        f"ground_plus_curtail_reduction: {_fmt(report.ground_plus_curtail_reduction)}",
        f"degenerate: {str(report.degenerate).lower()}",
        f"night_steps: [{', '.join(str(t) for t in report.night_steps)}]",
        "decomposition:",
    ]
    for mode, terms in report.decomposition.items():
        lines.append(f"  {mode}:")
        lines += [f"    {k}: {_fmt(v)}" for k, v in terms.items()]
    lines.append("nodes:")
    for i, nid in enumerate(report.node_ids):
        lines.append(f"  {nid}:")
        lines.append(f"    night_deficit_wh: {_fmt(report.night_deficit_wh[i].sum())}")
        for mode in report.soc_swing:
            lines.append(f"    {mode.lower()}_night_ground_wh: {_fmt(report.night_ground_wh[mode][i].sum())}")
            lines.append(f"    {mode.lower()}_mean_soc_swing: {_fmt(report.soc_swing[mode][i])}")
        lines.append(f"    cooperative_shortfall: {str(report.cooperative_shortfall[i]).lower()}")
        lines.append(f"    independent_shortfall: {str(report.independent_shortfall[i]).lower()}")
    return "\n".join(lines) + "\n"


def write_text(path: Path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write {str(path)!r}: {exc.strerror or exc}") from None
