"""RF and optical power-beaming link budgets and max-efficiency relay routing.

Distances are in km, apertures and wavelengths in metres, powers in W.
"""
from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, NoPath, ZeroDistance

RECTENNA_EFF_MAX = 0.615
DENSITY_LIMIT_W_M2 = 3600.0
RIS_REFLECTION_EFF = 0.8

# Optical chain defaults. Extinction is solved so the chain gives 20% at 8.6 km.
OPTICAL_DC_TO_CARRIER = 0.45
OPTICAL_CARRIER_TO_DC = 0.55
OPTICAL_POINTING_EFF = 0.85
OPTICAL_CALIBRATION_KM = 8.6
OPTICAL_CALIBRATION_EFF = 0.20
OPTICAL_EXTINCTION_PER_KM = (
    math.log(OPTICAL_DC_TO_CARRIER * OPTICAL_CARRIER_TO_DC * OPTICAL_POINTING_EFF / OPTICAL_CALIBRATION_EFF)
    / OPTICAL_CALIBRATION_KM
)

RF_DC_TO_CARRIER = 0.7


class Modality(str, enum.Enum):
    RF = "RF"
    OPTICAL = "Optical"


class Regime(str, enum.Enum):
    FRESNEL = "Fresnel"
    FAR_FIELD = "FarField"


@dataclass(frozen=True)
class WptLink:
    """A directed energy channel from ``from_id`` to ``to_id``.

    Efficiency fields left as ``None`` are filled with modality defaults.
    ``weather_ok`` is an optional per-step clear-sky mask; an optical link is
    dark on steps where it is False.
    """

    from_id: str
    to_id: str
    modality: Modality = Modality.RF
    tx_aperture: float = 10.0
    rx_aperture: float = 10.0
    wavelength: float | None = None
    dc_to_carrier_eff: float | None = None
    carrier_to_dc_eff: float | None = None
    aperture_efficiency: float = 1.0
    max_tx_power: float = 5000.0
    rx_power_density_limit: float = DENSITY_LIMIT_W_M2
    weather_ok: tuple[bool, ...] | None = None
    pointing_efficiency: float = OPTICAL_POINTING_EFF
    extinction_per_km: float = OPTICAL_EXTINCTION_PER_KM
    ris_reflections: int = 0
    ris_efficiency: float = RIS_REFLECTION_EFF

    def __post_init__(self):
        modality = Modality(self.modality)
        object.__setattr__(self, "modality", modality)
        optical = modality is Modality.OPTICAL
        if self.wavelength is None:
            object.__setattr__(self, "wavelength", 1.07e-6 if optical else 0.01)
        if self.dc_to_carrier_eff is None:
            object.__setattr__(
                self, "dc_to_carrier_eff", OPTICAL_DC_TO_CARRIER if optical else RF_DC_TO_CARRIER
            )
        if self.carrier_to_dc_eff is None:
            object.__setattr__(
                self, "carrier_to_dc_eff", OPTICAL_CARRIER_TO_DC if optical else RECTENNA_EFF_MAX
            )
        if self.weather_ok is not None:
            object.__setattr__(self, "weather_ok", tuple(bool(w) for w in self.weather_ok))

    @property
    def key(self) -> tuple[str, str]:
        return (self.from_id, self.to_id)

    def clear_sky(self, step: int) -> bool:
        if self.weather_ok is None:
            return True
        return self.weather_ok[step]


@dataclass(frozen=True)
class LinkBudget:
    distance: float
    regime: Regime
    geometric_eff: float
    end_to_end_eff: float
    max_deliverable_power: float
    modality: Modality = Modality.RF


def fresnel_distance(tx_aperture: float, wavelength: float) -> float:
    """Radiating near-field boundary 2 D^2 / lambda, returned in km."""
    if tx_aperture <= 0 or wavelength <= 0:
        raise DomainError("aperture and wavelength must be positive")
    return 2.0 * tx_aperture**2 / wavelength / 1000.0


def collection_parameter(tx_aperture: float, rx_aperture: float, wavelength: float, distance_km: float) -> float:
    return math.pi * tx_aperture * rx_aperture / (4.0 * wavelength * distance_km * 1000.0)


def rf_geometric_efficiency(link: WptLink, distance: float) -> float:
    """Beam collection efficiency 1 - exp(-tau^2).

    Approaches 1 for short range and tau^2 (a 1/d^2 falloff) deep in the far
    field, so one expression covers both sides of the Fresnel boundary.
    """
    if distance <= 0:
        raise DomainError("distance must be positive")
    tau = collection_parameter(link.tx_aperture, link.rx_aperture, link.wavelength, distance)
    # expm1 keeps precision when tau is tiny
    return min(1.0, -math.expm1(-tau * tau))


def regime(link: WptLink, distance: float) -> Regime:
    return Regime.FRESNEL if distance < fresnel_distance(link.tx_aperture, link.wavelength) else Regime.FAR_FIELD


def optical_transmission(link: WptLink, distance: float) -> float:
    return math.exp(-link.extinction_per_km * distance) * link.pointing_efficiency


def optical_end_to_end_efficiency(link: WptLink, distance: float, step: int | None = None) -> float:
    if distance <= 0:
        raise DomainError("distance must be positive")
    if step is not None and not link.clear_sky(step):
        return 0.0
    return link.dc_to_carrier_eff * optical_transmission(link, distance) * link.carrier_to_dc_eff


def _distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.dist(tuple(a), tuple(b))


def link_budget(
    link: WptLink,
    positions: Mapping[str, Sequence[float]],
    step: int = 0,
    rx_area: float | None = None,
) -> LinkBudget:
    """Compose the efficiency chain and the receive-density cap for one step.

    ``rx_area`` is the receiving surface in m^2; without it the receive
    aperture disc is used.
    """
    d = _distance(positions[link.from_id], positions[link.to_id])
    if d <= 0:
        raise ZeroDistance(f"link {link.from_id}->{link.to_id} has coincident endpoints")
    if link.modality is Modality.OPTICAL:
        geom = optical_transmission(link, d) if link.clear_sky(step) else 0.0
    else:
        geom = rf_geometric_efficiency(link, d)
    geom *= link.aperture_efficiency * link.ris_efficiency**link.ris_reflections
    e2e = link.dc_to_carrier_eff * geom * link.carrier_to_dc_eff
    if rx_area is None:
        rx_area = math.pi * (link.rx_aperture / 2.0) ** 2
    density_cap = link.rx_power_density_limit * rx_area * link.carrier_to_dc_eff
    return LinkBudget(
        distance=d,
        regime=regime(link, d),
        geometric_eff=geom,
        end_to_end_eff=e2e,
        max_deliverable_power=min(link.max_tx_power * e2e, density_cap),
        modality=link.modality,
    )


def select_modality(rf_budget: LinkBudget, opt_budget: LinkBudget, weather_ok: bool) -> LinkBudget:
    """Optical under clear sky unless RF is strictly better; RF otherwise."""
    if weather_ok and opt_budget.end_to_end_eff >= rf_budget.end_to_end_eff:
        return opt_budget
    return rf_budget


@dataclass
class EnergyGraph:
    """Directed graph whose edge weights are per-step end-to-end efficiencies.

    ``edges[(u, v)]`` holds one efficiency per step.
    """

    vertices: list[str]
    edges: dict[tuple[str, str], np.ndarray] = field(default_factory=dict)

    def add_edge(self, u: str, v: str, eff: Sequence[float]) -> None:
        eff = np.asarray(eff, dtype=float)
        if np.any(eff < 0) or np.any(eff > 1):
            raise DomainError(f"edge {u}->{v} efficiency outside [0, 1]")
        for x in (u, v):
            if x not in self.vertices:
                self.vertices.append(x)
        self.edges[(u, v)] = eff

    def efficiency(self, u: str, v: str, step: int) -> float:
        return float(self.edges[(u, v)][step])

    def neighbours(self, u: str):
        for (a, b), eff in self.edges.items():
            if a == u:
                yield b, eff


def build_energy_graph(
    links: Sequence[WptLink],
    positions: Mapping[str, Sequence[float]],
    steps: int,
    rx_areas: Mapping[str, float] | None = None,
) -> EnergyGraph:
    """Per-step graph; parallel RF/optical links on one pair collapse via select_modality."""
    rx_areas = rx_areas or {}
    graph = EnergyGraph(vertices=list(positions))
    grouped: dict[tuple[str, str], list[WptLink]] = {}
    for link in links:
        grouped.setdefault(link.key, []).append(link)
    for (u, v), group in grouped.items():
        effs = np.zeros(steps)
        for t in range(steps):
            rf = [link_budget(lk, positions, t, rx_areas.get(v)) for lk in group if lk.modality is Modality.RF]
            opt = [
                (link_budget(lk, positions, t, rx_areas.get(v)), lk.clear_sky(t))
                for lk in group
                if lk.modality is Modality.OPTICAL
            ]
            best_rf = max(rf, key=lambda b: b.end_to_end_eff, default=None)
            best_opt = max(opt, key=lambda bw: bw[0].end_to_end_eff, default=None)
            if best_rf is None:
                effs[t] = best_opt[0].end_to_end_eff
            elif best_opt is None:
                effs[t] = best_rf.end_to_end_eff
            else:
                effs[t] = select_modality(best_rf, best_opt[0], best_opt[1]).end_to_end_eff
        graph.add_edge(u, v, effs)
    return graph


def route_max_efficiency(graph: EnergyGraph, src: str, dst: str, step: int) -> tuple[list[str], float]:
    """Most efficient relay chain from src to dst at one step.

    Dijkstra on additive weights -ln(eff); zero-efficiency edges are absent.
    Ties are broken by the lexicographically smallest path.
    """
    for x in (src, dst):
        if x not in graph.vertices:
            raise NoPath(f"{x!r} is not in the graph")
    if src == dst:
        return [src], 1.0
    adjacency: dict[str, list[tuple[str, float]]] = {}
    for (u, v), eff in graph.edges.items():
        e = float(eff[step])
        if e > 0:
            adjacency.setdefault(u, []).append((v, -math.log(e)))
    best: dict[str, float] = {src: 0.0}
    heap: list[tuple[float, list[str]]] = [(0.0, [src])]
    done: set[str] = set()
    while heap:
        cost, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == dst:
            return path, math.exp(-cost)
        for v, w in adjacency.get(u, ()):
            if v in done:
                continue
            c = cost + w
            if c <= best.get(v, math.inf):
                best[v] = c
                heapq.heappush(heap, (c, path + [v]))
    raise NoPath(f"{dst!r} unreachable from {src!r} at step {step}")
