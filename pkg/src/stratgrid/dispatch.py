"""Cooperative dispatch LP, the independent greedy baseline and a lattice oracle.

Decision variables per node and step (all Wh):

    g    ground energy delivered to the node
    c    curtailed PV energy
    ch   bus energy drawn into storage
    dis  energy withdrawn from storage (the bus receives eta_d * dis)
    E    stored energy at the end of the step

and per transfer link and step ``x``, the energy sent into the link (the
receiver gets ``eta_link * x``).

The objective is the cluster's schedulable energy: ground intake plus
surplus. Surplus is curtailed energy plus energy dissipated in storage and
link conversions. Counting dissipation matters: were it free, a lossy
charge/discharge cycle or a back-and-forth beam would be a zero-cost
substitute for curtailment and the optimum would be full of such loops.
"""
from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import simplex
from .errors import InfeasibleByConstruction, TooLarge
from .profiles import Profiles
from .scenario import Scenario

log = logging.getLogger(__name__)

G, C, CH, DIS, E = range(5)
PER_NODE = 5
# per-Wh tie-break on flows so that among equal-schedulable-energy plans the
# solver prefers ones without pointless cycling
FLOW_TIE_BREAK = 1e-6


class Mode(str, enum.Enum):
    COOPERATIVE = "Cooperative"
    INDEPENDENT = "Independent"


@dataclass
class DispatchLP:
    scenario: Scenario
    profiles: Profiles
    c: np.ndarray
    cost: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    n_nodes: int
    n_links: int
    steps: int
    initial_wh: np.ndarray

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def block(self) -> int:
        return PER_NODE * self.n_nodes + self.n_links

    def var(self, node: int, step: int, kind: int) -> int:
        return step * self.block + PER_NODE * node + kind

    def link_var(self, link: int, step: int) -> int:
        return step * self.block + PER_NODE * self.n_nodes + link


@dataclass(frozen=True)
class DispatchPlan:
    node_ids: tuple[str, ...]
    link_keys: tuple[tuple[str, str], ...]
    timestep: float
    mode: Mode
    ground_wh: np.ndarray
    curtail_wh: np.ndarray
    charge_wh: np.ndarray
    discharge_wh: np.ndarray
    energy_wh: np.ndarray
    transfer_wh: np.ndarray
    charge_eff: np.ndarray
    discharge_eff: np.ndarray
    link_eff: np.ndarray
    terminal_repair_wh: np.ndarray = field(default=None)
    max_dual_infeasibility: float = 0.0

    @property
    def steps(self) -> int:
        return self.ground_wh.shape[1]

    @property
    def delivered_discharge_wh(self) -> np.ndarray:
        return self.discharge_eff[:, None] * self.discharge_wh

    @property
    def storage_loss_wh(self) -> np.ndarray:
        return ((1 - self.charge_eff)[:, None] * self.charge_wh
                + (1 - self.discharge_eff)[:, None] * self.discharge_wh)

    @property
    def link_loss_wh(self) -> np.ndarray:
        return (1 - self.link_eff) * self.transfer_wh

    @property
    def ground_total_wh(self) -> float:
        return float(self.ground_wh.sum())

    @property
    def curtail_total_wh(self) -> float:
        return float(self.curtail_wh.sum())

    @property
    def dissipation_wh(self) -> float:
        return float(self.storage_loss_wh.sum() + self.link_loss_wh.sum())

    @property
    def objective_wh(self) -> float:
        """Schedulable energy: ground intake + curtailment + conversion dissipation."""
        return self.ground_total_wh + self.curtail_total_wh + self.dissipation_wh

    @property
    def repair_cost_wh(self) -> float:
        """Extra schedulable energy to top storage back up to its initial level from the ground."""
        if self.terminal_repair_wh is None:
            return 0.0
        g = self.terminal_repair_wh / self.charge_eff
        return float((g + (1 - self.charge_eff) * g).sum())

    @property
    def repaired_objective_wh(self) -> float:
        return self.objective_wh + self.repair_cost_wh

    def transfers_into(self, node_id: str) -> np.ndarray:
        out = np.zeros(self.steps)
        for l, (_, dst) in enumerate(self.link_keys):
            if dst == node_id:
                out += self.link_eff[l] * self.transfer_wh[l]
        return out


# --------------------------------------------------------------------------
# LP construction


def _storage_params(scenario: Scenario):
    units = [n.storage for n in scenario.nodes]
    eta_c = np.array([u.charge_efficiency for u in units])
    eta_d = np.array([u.discharge_efficiency for u in units])
    cap = np.array([u.capacity_wh for u in units])
    floor = np.array([u.floor_wh for u in units])
    e0 = np.array([n.initial_soc * n.storage.capacity_wh for n in scenario.nodes])
    dt = scenario.timestep_hours
    ch_max = np.array([u.max_charge_power for u in units]) * dt
    # withdrawal limit; the discharge power limit applies to delivered energy
    dis_max = np.array([u.max_discharge_power for u in units]) * dt / eta_d
    return eta_c, eta_d, cap, floor, e0, ch_max, dis_max


def check_supply(scenario: Scenario, profiles: Profiles) -> None:
    """Raise InfeasibleByConstruction if some node's load beats every possible intake."""
    eta_c, eta_d, cap, floor, e0, ch_max, dis_max = _storage_params(scenario)
    index = {nid: i for i, nid in enumerate(scenario.node_ids)}
    inbound = np.zeros_like(profiles.gen_wh)
    for l, link in enumerate(scenario.transfer_links):
        inbound[index[link.to_id]] += profiles.link_eff[l] * profiles.link_cap_wh[l]
    storage = np.minimum(eta_d * dis_max, eta_d * (cap - floor))[:, None]
    ground = np.minimum(profiles.ground_node_cap_wh, profiles.ground_total_cap_wh[None, :])
    slack = profiles.gen_wh + storage + inbound + ground - profiles.load_wh
    tol = 1e-9 * max(1.0, float(np.abs(profiles.load_wh).max(initial=0.0)))
    bad = np.argwhere(slack < -tol)
    if bad.size:
        i, t = bad[0]
        raise InfeasibleByConstruction(scenario.node_ids[i], int(t), float(-slack[i, t]))


def build_lp(scenario: Scenario, profiles: Profiles) -> DispatchLP:
    N = len(scenario.nodes)
    links = scenario.transfer_links
    L = len(links)
    T = scenario.steps
    if profiles.gen_wh.shape != (N, T) or profiles.load_wh.shape != (N, T):
        raise ValueError(f"profiles must cover {N} nodes x {T} steps")
    if profiles.link_eff.shape != (L, T):
        raise ValueError(f"link profiles must cover {L} links x {T} steps")
    check_supply(scenario, profiles)
    eta_c, eta_d, cap, floor, e0, ch_max, dis_max = _storage_params(scenario)
    index = {nid: i for i, nid in enumerate(scenario.node_ids)}
    src = [index[lk.from_id] for lk in links]
    dst = [index[lk.to_id] for lk in links]

    block = PER_NODE * N + L
    nv = T * block
    lp = DispatchLP(scenario, profiles, np.zeros(nv), np.zeros(nv), np.zeros((2 * N * T, nv)),
                    np.zeros(2 * N * T), np.zeros((T + N, nv)), np.zeros(T + N),
                    np.zeros(nv), np.full(nv, np.inf), N, L, T, e0)
    cost, A, b, Au, bu, lb, ub = lp.cost, lp.A_eq, lp.b_eq, lp.A_ub, lp.b_ub, lp.lb, lp.ub

    for t in range(T):
        for i in range(N):
            g, c, ch, dis, e = (lp.var(i, t, k) for k in range(PER_NODE))
            cost[g] = 1.0
            cost[c] = 1.0
            cost[ch] = 1.0 - eta_c[i]
            cost[dis] = 1.0 - eta_d[i]
            ub[g] = profiles.ground_node_cap_wh[i, t]
            ub[ch] = ch_max[i]
            ub[dis] = dis_max[i]
            lb[e], ub[e] = floor[i], cap[i]
            # power balance
            row = t * N + i
            A[row, g] = 1.0
            A[row, c] = -1.0
            A[row, dis] = eta_d[i]
            A[row, ch] = -1.0
            b[row] = profiles.load_wh[i, t] - profiles.gen_wh[i, t]
            # storage recursion
            row = N * T + t * N + i
            A[row, e] = 1.0
            A[row, ch] = -eta_c[i]
            A[row, dis] = 1.0
            if t == 0:
                b[row] = e0[i]
            else:
                A[row, lp.var(i, t - 1, E)] = -1.0
            Au[t, g] = 1.0
        bu[t] = profiles.ground_total_cap_wh[t]
        for l in range(L):
            x = lp.link_var(l, t)
            cost[x] = 1.0 - profiles.link_eff[l, t]
            ub[x] = profiles.link_cap_wh[l, t]
            A[t * N + src[l], x] = -1.0
            A[t * N + dst[l], x] = profiles.link_eff[l, t]
    # cyclic sustainability: end no lower than we started
    for i in range(N):
        Au[T + i, lp.var(i, T - 1, E)] = -1.0
        bu[T + i] = -e0[i]

    flows = np.zeros(nv, dtype=bool)
    for t in range(T):
        for i in range(N):
            flows[lp.var(i, t, CH)] = flows[lp.var(i, t, DIS)] = True
        for l in range(L):
            flows[lp.link_var(l, t)] = True
    lp.c[:] = cost + FLOW_TIE_BREAK * flows
    return lp


# --------------------------------------------------------------------------
# solving


def cancel_overlap(charge, discharge, curtail, eta_c, eta_d):
    """Replace simultaneous charge and discharge by their net, curtailing the freed bus energy.

    Leaves stored energy and schedulable energy unchanged.
    """
    charge, discharge, curtail = charge.copy(), discharge.copy(), curtail.copy()
    both = (charge > 0) & (discharge > 0)
    for i, t in zip(*np.nonzero(both)):
        ch, dis = charge[i, t], discharge[i, t]
        net = eta_c[i] * ch - dis
        if net >= 0:
            new_ch, new_dis = net / eta_c[i], 0.0
        else:
            new_ch, new_dis = 0.0, -net
        freed = (ch - eta_d[i] * dis) - (new_ch - eta_d[i] * new_dis)
        charge[i, t], discharge[i, t] = new_ch, new_dis
        curtail[i, t] += freed
    return charge, discharge, curtail


def plan_from_vector(lp: DispatchLP, x: np.ndarray, mode: Mode = Mode.COOPERATIVE, dual_inf: float = 0.0) -> DispatchPlan:
    N, L, T = lp.n_nodes, lp.n_links, lp.steps
    sol = x[: T * lp.block].reshape(T, lp.block)
    node_part = sol[:, : PER_NODE * N].reshape(T, N, PER_NODE).transpose(1, 0, 2)
    links = sol[:, PER_NODE * N:].T.reshape(L, T)
    eta_c, eta_d, *_ = _storage_params(lp.scenario)
    charge, discharge, curtail = cancel_overlap(
        node_part[:, :, CH], node_part[:, :, DIS], node_part[:, :, C], eta_c, eta_d
    )
    energy = np.concatenate([lp.initial_wh[:, None], node_part[:, :, E]], axis=1)
    return DispatchPlan(
        node_ids=tuple(lp.scenario.node_ids),
        link_keys=tuple(lk.key for lk in lp.scenario.transfer_links),
        timestep=lp.scenario.timestep_hours,
        mode=mode,
        ground_wh=node_part[:, :, G].copy(),
        curtail_wh=curtail,
        charge_wh=charge,
        discharge_wh=discharge,
        energy_wh=energy,
        transfer_wh=links.copy(),
        charge_eff=eta_c,
        discharge_eff=eta_d,
        link_eff=lp.profiles.link_eff.copy(),
        max_dual_infeasibility=dual_inf,
    )


def solve_lp(lp: DispatchLP, opt_tol: float = 1e-9) -> DispatchPlan:
    res = simplex.solve(lp.c, lp.A_eq, lp.b_eq, lp.A_ub, lp.b_ub, lp.lb, lp.ub, opt_tol=opt_tol)
    log.debug("dispatch LP solved in %d pivots (dual infeasibility %.3g)", res.iterations,
              res.max_dual_infeasibility)
    x = np.clip(res.x, lp.lb, lp.ub)
    return plan_from_vector(lp, x, Mode.COOPERATIVE, res.max_dual_infeasibility)


def solve_cooperative(scenario: Scenario, profiles: Profiles, opt_tol: float = 1e-9) -> DispatchPlan:
    return solve_lp(build_lp(scenario, profiles), opt_tol)


# --------------------------------------------------------------------------
# independent baseline


def independent_baseline(scenario: Scenario, profiles: Profiles) -> DispatchPlan:
    """Myopic per-node rule with no transfers.

    Surplus charges storage up to its limits and the rest is curtailed; a
    deficit is met from storage down to the floor and the rest from the
    ground. The terminal storage level is left wherever the rule puts it;
    ``terminal_repair_wh`` records how far below its start each node ends.
    """
    eta_c, eta_d, cap, floor, e0, ch_max, dis_max = _storage_params(scenario)
    N, T = profiles.gen_wh.shape
    ground = np.zeros((N, T))
    curtail = np.zeros((N, T))
    charge = np.zeros((N, T))
    discharge = np.zeros((N, T))
    energy = np.zeros((N, T + 1))
    energy[:, 0] = e0
    for i in range(N):
        e = e0[i]
        for t in range(T):
            net = profiles.gen_wh[i, t] - profiles.load_wh[i, t]
            if net >= 0:
                ch = min(net, ch_max[i], max(0.0, cap[i] - e) / eta_c[i])
                charge[i, t] = ch
                curtail[i, t] = net - ch
                e = min(cap[i], e + eta_c[i] * ch)
            else:
                deficit = -net
                delivered = min(deficit, eta_d[i] * dis_max[i], eta_d[i] * max(0.0, e - floor[i]))
                discharge[i, t] = delivered / eta_d[i]
                ground[i, t] = deficit - delivered
                e = max(floor[i], e - discharge[i, t])
            energy[i, t + 1] = e
    L = len(scenario.transfer_links)
    return DispatchPlan(
        node_ids=tuple(scenario.node_ids),
        link_keys=tuple(lk.key for lk in scenario.transfer_links),
        timestep=scenario.timestep_hours,
        mode=Mode.INDEPENDENT,
        ground_wh=ground,
        curtail_wh=curtail,
        charge_wh=charge,
        discharge_wh=discharge,
        energy_wh=energy,
        transfer_wh=np.zeros((L, T)),
        charge_eff=eta_c,
        discharge_eff=eta_d,
        link_eff=profiles.link_eff.copy(),
        terminal_repair_wh=np.maximum(0.0, e0 - energy[:, -1]),
    )


def ground_shortfall(plan: DispatchPlan, profiles: Profiles) -> np.ndarray:
    """Per node, whether the plan draws more ground energy than is available at some step."""
    tol = 1e-9 * max(1.0, float(profiles.ground_total_cap_wh.max(initial=0.0)))
    over_node = (plan.ground_wh > profiles.ground_node_cap_wh + tol).any(axis=1)
    over_total = plan.ground_wh.sum(axis=0) > profiles.ground_total_cap_wh + tol
    return over_node | (plan.ground_wh[:, over_total] > 0).any(axis=1)


# --------------------------------------------------------------------------
# lattice oracle

ORACLE_MAX_NODES = 2
ORACLE_MAX_STEPS = 4
ORACLE_MAX_LINKS = 1


def _levels(lo: float, hi: float, anchor: float, q: float) -> np.ndarray:
    k_lo = int(np.ceil((lo - anchor) / q - 1e-12))
    k_hi = int(np.floor((hi - anchor) / q + 1e-12))
    pts = anchor + q * np.arange(k_lo, k_hi + 1)
    return np.unique(np.concatenate([pts, [lo, hi, anchor]]).clip(lo, hi))


def _dedupe(values, lo: float, hi: float, tol: float) -> np.ndarray:
    v = np.sort(np.asarray([x for x in values if lo - tol <= x <= hi + tol])).clip(lo, hi)
    if v.size == 0:
        return v
    keep = np.concatenate([[True], np.diff(v) > tol])
    return v[keep]


def _balance_shift(residual: float, eta_c: float, eta_d: float) -> float:
    """Stored-energy change that exactly absorbs a bus residual (surplus > 0)."""
    return eta_c * residual if residual >= 0 else residual / eta_d


def _oracle_levels(i, scenario, profiles, q, params, tol):
    """Per-step stored-energy candidates for one node.

    The q-lattice anchored at the initial level, the floor and the ceiling,
    plus every level reached from those anchors by runs of exactly balancing
    steps, walked forward from the start and backward from the end.
    """
    eta_c, eta_d, cap, floor, e0, ch_max, dis_max = params
    T = scenario.steps
    base = _levels(floor[i], cap[i], e0[i], q)
    shifts = [
        {0.0, eta_c[i] * ch_max[i], -dis_max[i],
         _balance_shift(profiles.gen_wh[i, t] - profiles.load_wh[i, t], eta_c[i], eta_d[i])}
        for t in range(T)
    ]
    extra = [set() for _ in range(T + 1)]
    for anchor in (e0[i], floor[i], cap[i]):
        for start in range(T + 1):
            front = {anchor}
            for t in range(start, T):
                front = {e + s for e in front for s in shifts[t] if floor[i] - tol <= e + s <= cap[i] + tol}
                extra[t + 1] |= front
            front = {anchor}
            for t in range(start, 0, -1):
                front = {e - s for e in front for s in shifts[t - 1] if floor[i] - tol <= e - s <= cap[i] + tol}
                extra[t - 1] |= front
    levels = [np.array([e0[i]])]
    for t in range(1, T + 1):
        levels.append(_dedupe(list(base) + list(extra[t]), floor[i], cap[i], tol))
    return levels


def _moves(s_from, s_to, i, params, tol):
    eta_c, eta_d, cap, floor, e0, ch_max, dis_max = params
    d = s_to[None, :] - s_from[:, None]
    ch = np.where(d > 0, d / eta_c[i], 0.0)
    dis = np.where(d < 0, -d, 0.0)
    ok = (ch <= ch_max[i] + tol) & (dis <= dis_max[i] + tol)
    bus = eta_d[i] * dis - ch
    loss = (1 - eta_c[i]) * ch + (1 - eta_d[i]) * dis
    return bus, loss, ok


def brute_force_oracle(scenario: Scenario, profiles: Profiles, grid_wh: float) -> float:
    """Minimal schedulable energy over all storage decisions drawn from a lattice.

    Stored energy at each step ranges over ``E0 + k * grid_wh``, the floor,
    the ceiling, and the levels reached from those by runs of exactly
    balancing steps. Given the storage moves, ground intake and curtailment
    are the positive and negative parts of each node's residual (their
    cheapest completion), and the single transfer is chosen exactly by
    checking every breakpoint of its convex piecewise-linear cost. Stages are
    enumerated in turn over the joint level sets keeping the best cost per
    joint state, so every lattice plan is covered. Returns ``inf`` if no
    lattice plan is feasible.
    """
    N, T, L = len(scenario.nodes), scenario.steps, len(scenario.transfer_links)
    if N > ORACLE_MAX_NODES or T > ORACLE_MAX_STEPS or L > ORACLE_MAX_LINKS:
        raise TooLarge(f"oracle handles <= {ORACLE_MAX_NODES} nodes, <= {ORACLE_MAX_STEPS} steps, "
                       f"<= {ORACLE_MAX_LINKS} link; got {N}, {T}, {L}")
    if grid_wh <= 0:
        raise ValueError("grid_wh must be positive")
    params = _storage_params(scenario)
    eta_c, eta_d, cap, floor, e0, ch_max, dis_max = params
    index = {nid: i for i, nid in enumerate(scenario.node_ids)}
    link = scenario.transfer_links[0] if L else None
    tol = 1e-9 * max(1.0, float(np.abs(profiles.load_wh).max(initial=0.0)), float(cap.max()))
    levels = [_oracle_levels(i, scenario, profiles, grid_wh, params, tol) for i in range(N)]

    V = np.zeros((1,) * N)
    for t in range(T):
        parts = []
        for i in range(N):
            bus, loss, ok = _moves(levels[i][t], levels[i][t + 1], i, params, tol)
            parts.append((profiles.gen_wh[i, t] - profiles.load_wh[i, t] + bus, loss, ok))
        g_cap = profiles.ground_node_cap_wh[:, t]
        g_tot = profiles.ground_total_cap_wh[t]
        if N == 1:
            r, loss, ok = parts[0]
            g = np.maximum(0.0, -r)
            ok = ok & (g <= min(g_cap[0], g_tot) + tol)
            cost = np.where(ok, np.abs(r) + loss, np.inf)
            V = (V[:, None] + cost).min(axis=0)
            continue
        # joint transition arrays indexed [a, b, a', b']
        ra = parts[0][0][:, None, :, None]
        rb = parts[1][0][None, :, None, :]
        base_loss = parts[0][1][:, None, :, None] + parts[1][1][None, :, None, :]
        base_ok = parts[0][2][:, None, :, None] & parts[1][2][None, :, None, :]
        if link is None or profiles.link_cap_wh[0, t] <= 0:
            xs = [np.zeros(1)]
            eta, src = 1.0, 0
        else:
            eta = profiles.link_eff[0, t]
            src = index[link.from_id]
            xcap = profiles.link_cap_wh[0, t]
            rs, rd = (ra, rb) if src == 0 else (rb, ra)
            cs, cd = (g_cap[0], g_cap[1]) if src == 0 else (g_cap[1], g_cap[0])
            xs = [np.zeros(1), np.full(1, xcap), rs, rs + cs, rs + g_tot]
            if eta > 0:
                xs += [-rd / eta, (-rd - cd) / eta, (-rd - g_tot) / eta]
            if eta < 1:
                xs.append((g_tot + rs + rd) / (1 - eta))
            xs = [np.clip(x, 0.0, xcap) for x in xs]
        best = None
        for x in xs:
            if link is None or profiles.link_cap_wh[0, t] <= 0:
                na, nb = ra, rb
            elif src == 0:
                na, nb = ra - x, rb + eta * x
            else:
                na, nb = ra + eta * x, rb - x
            ga, gb = np.maximum(0.0, -na), np.maximum(0.0, -nb)
            ok = base_ok & (ga <= g_cap[0] + tol) & (gb <= g_cap[1] + tol) & (ga + gb <= g_tot + tol)
            cost = np.abs(na) + np.abs(nb) + base_loss + (1 - eta) * x
            cost = np.where(ok, cost, np.inf)
            best = cost if best is None else np.minimum(best, cost)
        V = (V[:, :, None, None] + best).min(axis=(0, 1))
    # cyclic terminal condition
    mask = levels[0][T] >= e0[0] - tol
    if N == 1:
        V = np.where(mask, V, np.inf)
    else:
        V = np.where(mask[:, None] & (levels[1][T] >= e0[1] - tol)[None, :], V, np.inf)
    return float(V.min())


def enumerate_plans(scenario: Scenario, profiles: Profiles, grid_wh: float) -> float:
    """Literal enumeration of every single-node lattice path; for checking the oracle on tiny cases."""
    if len(scenario.nodes) != 1 or scenario.transfer_links:
        raise TooLarge("literal enumeration supports one node and no links")
    eta_c, eta_d, cap, floor, e0, ch_max, dis_max = _storage_params(scenario)
    s = _levels(floor[0], cap[0], e0[0], grid_wh)
    tol = 1e-9 * max(1.0, float(cap.max()))
    best = np.inf
    for path in itertools.product(s, repeat=scenario.steps):
        if path[-1] < e0[0] - tol:
            continue
        prev, total = e0[0], 0.0
        for t, e in enumerate(path):
            d = e - prev
            ch, dis = (d / eta_c[0], 0.0) if d > 0 else (0.0, -d)
            if ch > ch_max[0] + tol or dis > dis_max[0] + tol:
                total = np.inf
                break
            net = profiles.gen_wh[0, t] - profiles.load_wh[0, t] + eta_d[0] * dis - ch
            g = max(0.0, -net)
            if g > min(profiles.ground_node_cap_wh[0, t], profiles.ground_total_cap_wh[t]) + tol:
                total = np.inf
                break
            total += abs(net) + (1 - eta_c[0]) * ch + (1 - eta_d[0]) * dis
            prev = e
        best = min(best, total)
    return float(best)
