"""Problem-instance data model, scenario files and size-class presets.

Scenario files are JSON documents carrying ``format_version``; the schema is
documented in ``docs/scenario_format.md``. Validation errors name the
offending field with a JSON-pointer path such as ``/nodes/2/initial_soc``.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .errors import DanglingReference, IoError, ParseError, ValidationError
from .wptlink import Modality, WptLink

FORMAT_VERSION = 1
DEFAULT_SOLAR_CONSTANT = 1361.0
DEFAULT_TRANSMITTANCE = 1250.0 / 1361.0
DEFAULT_SYSTEM_EFFICIENCY = 0.2
DEFAULT_PROPULSIVE_EFFICIENCY = 0.8
DEFAULT_SOC_FLOOR = 0.2
DEFAULT_C_RATE = 0.5
BATTERY_EFFICIENCY = 0.95
# sqrt of the 53.4 % RFCS round trip
RFCS_EFFICIENCY = math.sqrt(0.534)


class HapClass(str, enum.Enum):
    SMALL = "Small"
    MEDIUM = "Medium"
    LARGE = "Large"
    CUSTOM = "Custom"


class StorageTech(str, enum.Enum):
    BATTERY = "SecondaryBattery"
    RFCS = "RFCS"


@dataclass(frozen=True)
class StorageUnit:
    technology: StorageTech = StorageTech.BATTERY
    specific_energy: float = 700.0
    storage_mass: float = 10.0
    charge_efficiency: float | None = None
    discharge_efficiency: float | None = None
    soc_floor: float = DEFAULT_SOC_FLOOR
    max_charge_power: float | None = None
    max_discharge_power: float | None = None

    def __post_init__(self):
        tech = StorageTech(self.technology)
        object.__setattr__(self, "technology", tech)
        eff = RFCS_EFFICIENCY if tech is StorageTech.RFCS else BATTERY_EFFICIENCY
        if self.charge_efficiency is None:
            object.__setattr__(self, "charge_efficiency", eff)
        if self.discharge_efficiency is None:
            object.__setattr__(self, "discharge_efficiency", eff)
        c_rate_power = DEFAULT_C_RATE * self.specific_energy * self.storage_mass
        if self.max_charge_power is None:
            object.__setattr__(self, "max_charge_power", c_rate_power)
        if self.max_discharge_power is None:
            object.__setattr__(self, "max_discharge_power", c_rate_power)

    @property
    def capacity_wh(self) -> float:
        return self.specific_energy * self.storage_mass

    @property
    def floor_wh(self) -> float:
        return self.soc_floor * self.capacity_wh

    @property
    def round_trip(self) -> float:
        return self.charge_efficiency * self.discharge_efficiency


@dataclass(frozen=True)
class PayloadEntry:
    start_hour: float
    end_hour: float
    comm_power: float = 0.0
    sensing_power: float = 0.0
    compute_power: float = 0.0


@dataclass(frozen=True)
class PayloadSchedule:
    entries: tuple[PayloadEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=lambda e: e.start_hour)))


@dataclass(frozen=True)
class HapNode:
    id: str
    pv_area: float
    mass: float
    hap_class: HapClass = HapClass.CUSTOM
    system_efficiency: float = DEFAULT_SYSTEM_EFFICIENCY
    lift_to_drag: float = 25.0
    propulsive_efficiency: float = DEFAULT_PROPULSIVE_EFFICIENCY
    airspeed: float = 25.0
    storage: StorageUnit = field(default_factory=StorageUnit)
    payload_schedule: PayloadSchedule = field(default_factory=PayloadSchedule)
    position: tuple[float, float, float] = (0.0, 0.0, 20.0)
    receiver_area: float = 1.0
    initial_soc: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "hap_class", HapClass(self.hap_class))
        object.__setattr__(self, "position", tuple(float(p) for p in self.position))


class GroundModality(str, enum.Enum):
    RF = "RF"
    OPTICAL = "Optical"


@dataclass(frozen=True)
class GroundStation:
    id: str
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    max_supply_power: float = 20000.0
    modality: GroundModality = GroundModality.RF

    def __post_init__(self):
        object.__setattr__(self, "modality", GroundModality(self.modality))
        object.__setattr__(self, "position", tuple(float(p) for p in self.position))


@dataclass(frozen=True)
class Environment:
    latitude: float = 0.0
    day_of_year: int = 80
    atmospheric_transmittance: float = DEFAULT_TRANSMITTANCE
    solar_constant: float = DEFAULT_SOLAR_CONSTANT
    wind_speed_profile: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.wind_speed_profile is not None:
            object.__setattr__(self, "wind_speed_profile", tuple(float(w) for w in self.wind_speed_profile))


@dataclass(frozen=True)
class Scenario:
    nodes: tuple[HapNode, ...]
    links: tuple[WptLink, ...] = ()
    ground_stations: tuple[GroundStation, ...] = ()
    environment: Environment = field(default_factory=Environment)
    horizon_hours: float = 24.0
    timestep_hours: float = 1.0
    name: str = ""

    def __post_init__(self):
        for attr in ("nodes", "links", "ground_stations"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        env = self.environment
        if env.wind_speed_profile is None:
            steps = self.steps if self.timestep_hours > 0 else 0
            object.__setattr__(self, "environment", replace(env, wind_speed_profile=(0.0,) * steps))

    @property
    def steps(self) -> int:
        return int(round(self.horizon_hours / self.timestep_hours))

    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    @property
    def ground_ids(self) -> list[str]:
        return [g.id for g in self.ground_stations]

    @property
    def transfer_links(self) -> list[WptLink]:
        """Node-to-node links; these carry dispatch transfer variables."""
        ids = set(self.node_ids)
        return [lk for lk in self.links if lk.from_id in ids]

    @property
    def intake_links(self) -> list[WptLink]:
        """Ground-station-to-node links; these shape ground intake caps."""
        ids = set(self.ground_ids)
        return [lk for lk in self.links if lk.from_id in ids]

    def positions(self) -> dict[str, tuple[float, float, float]]:
        pos = {n.id: n.position for n in self.nodes}
        pos.update({g.id: g.position for g in self.ground_stations})
        return pos

    def node(self, node_id: str) -> HapNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)


# --------------------------------------------------------------------------
# validation


def _check(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ValidationError(path, message)


def _finite(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def validate_storage(unit: StorageUnit, path: str) -> None:
    for name in ("specific_energy", "storage_mass", "charge_efficiency", "discharge_efficiency",
                 "soc_floor", "max_charge_power", "max_discharge_power"):
        _check(_finite(getattr(unit, name)), f"{path}/{name}", "must be a finite number")
    _check(unit.capacity_wh > 0, f"{path}/storage_mass", "capacity (specific_energy x storage_mass) must be > 0")
    _check(0 <= unit.soc_floor < 1, f"{path}/soc_floor", "must lie in [0, 1)")
    for name in ("charge_efficiency", "discharge_efficiency"):
        v = getattr(unit, name)
        _check(0 < v <= 1, f"{path}/{name}", "must lie in (0, 1]")
    _check(unit.max_charge_power >= 0, f"{path}/max_charge_power", "must be >= 0")
    _check(unit.max_discharge_power >= 0, f"{path}/max_discharge_power", "must be >= 0")


def validate_schedule(schedule: PayloadSchedule, horizon: float, path: str) -> None:
    prev_end = -math.inf
    for k, e in enumerate(schedule.entries):
        p = f"{path}/entries/{k}"
        for name in ("start_hour", "end_hour", "comm_power", "sensing_power", "compute_power"):
            _check(_finite(getattr(e, name)), f"{p}/{name}", "must be a finite number")
        _check(0 <= e.start_hour < e.end_hour <= horizon, p, f"hours must satisfy 0 <= start < end <= {horizon}")
        _check(e.start_hour >= prev_end, p, "entries overlap")
        for name in ("comm_power", "sensing_power", "compute_power"):
            _check(getattr(e, name) >= 0, f"{p}/{name}", "must be >= 0")
        prev_end = e.end_hour


def validate_node(node: HapNode, horizon: float, path: str) -> None:
    _check(isinstance(node.id, str) and node.id != "", f"{path}/id", "must be a non-empty string")
    for name in ("pv_area", "mass", "system_efficiency", "lift_to_drag", "propulsive_efficiency",
                 "airspeed", "receiver_area", "initial_soc"):
        _check(_finite(getattr(node, name)), f"{path}/{name}", "must be a finite number")
    _check(node.pv_area > 0, f"{path}/pv_area", "must be > 0")
    _check(node.mass > 0, f"{path}/mass", "must be > 0")
    _check(node.lift_to_drag > 0, f"{path}/lift_to_drag", "must be > 0")
    _check(0 < node.system_efficiency <= 1, f"{path}/system_efficiency", "must lie in (0, 1]")
    _check(0 < node.propulsive_efficiency <= 1, f"{path}/propulsive_efficiency", "must lie in (0, 1]")
    _check(node.airspeed >= 0, f"{path}/airspeed", "must be >= 0")
    _check(node.receiver_area > 0, f"{path}/receiver_area", "must be > 0")
    _check(len(node.position) == 3 and all(map(_finite, node.position)), f"{path}/position",
           "must be three finite coordinates")
    validate_storage(node.storage, f"{path}/storage")
    _check(node.storage.soc_floor <= node.initial_soc <= 1, f"{path}/initial_soc",
           f"must lie in [soc_floor={node.storage.soc_floor}, 1]")
    validate_schedule(node.payload_schedule, horizon, f"{path}/payload_schedule")


def validate_link(link: WptLink, path: str) -> None:
    for name in ("tx_aperture", "rx_aperture", "wavelength"):
        v = getattr(link, name)
        _check(_finite(v) and v > 0, f"{path}/{name}", "must be > 0")
    for name in ("dc_to_carrier_eff", "carrier_to_dc_eff", "aperture_efficiency", "pointing_efficiency",
                 "ris_efficiency"):
        v = getattr(link, name)
        _check(_finite(v) and 0 < v <= 1, f"{path}/{name}", "must lie in (0, 1]")
    _check(_finite(link.max_tx_power) and link.max_tx_power >= 0, f"{path}/max_tx_power", "must be >= 0")
    _check(_finite(link.rx_power_density_limit) and link.rx_power_density_limit > 0,
           f"{path}/rx_power_density_limit", "must be > 0")
    _check(_finite(link.extinction_per_km) and link.extinction_per_km >= 0, f"{path}/extinction_per_km",
           "must be >= 0")
    _check(isinstance(link.ris_reflections, int) and link.ris_reflections >= 0, f"{path}/ris_reflections",
           "must be a non-negative integer")
    _check(link.from_id != link.to_id, path, "self-loop links are not allowed")


def validate(scenario: Scenario) -> Scenario:
    """Check every invariant; raise on the first violation, else return the scenario."""
    _check(_finite(scenario.horizon_hours) and scenario.horizon_hours > 0, "/horizon_hours", "must be > 0")
    _check(_finite(scenario.timestep_hours) and scenario.timestep_hours > 0, "/timestep_hours", "must be > 0")
    ratio = scenario.horizon_hours / scenario.timestep_hours
    _check(abs(ratio - round(ratio)) < 1e-9, "/timestep_hours", "horizon must be divisible by timestep")
    _check(len(scenario.nodes) > 0, "/nodes", "at least one node is required")

    env = scenario.environment
    _check(_finite(env.latitude) and -90 <= env.latitude <= 90, "/environment/latitude", "must lie in [-90, 90]")
    _check(isinstance(env.day_of_year, int) and 1 <= env.day_of_year <= 365, "/environment/day_of_year",
           "must be an integer in [1, 365]")
    _check(_finite(env.atmospheric_transmittance) and 0 < env.atmospheric_transmittance <= 1,
           "/environment/atmospheric_transmittance", "must lie in (0, 1]")
    _check(_finite(env.solar_constant) and env.solar_constant > 0, "/environment/solar_constant", "must be > 0")
    _check(len(env.wind_speed_profile) == scenario.steps, "/environment/wind_speed_profile",
           f"must have one entry per step ({scenario.steps})")
    for k, w in enumerate(env.wind_speed_profile):
        _check(_finite(w) and w >= 0, f"/environment/wind_speed_profile/{k}", "must be >= 0")

    seen: set[str] = set()
    for i, node in enumerate(scenario.nodes):
        validate_node(node, scenario.horizon_hours, f"/nodes/{i}")
        _check(node.id not in seen, f"/nodes/{i}/id", f"duplicate id {node.id!r}")
        seen.add(node.id)
    for k, gs in enumerate(scenario.ground_stations):
        p = f"/ground_stations/{k}"
        _check(gs.id not in seen, f"{p}/id", f"duplicate id {gs.id!r}")
        _check(_finite(gs.max_supply_power) and gs.max_supply_power >= 0, f"{p}/max_supply_power", "must be >= 0")
        seen.add(gs.id)

    node_ids = set(scenario.node_ids)
    for k, link in enumerate(scenario.links):
        p = f"/links/{k}"
        validate_link(link, p)
        if link.from_id not in seen:
            raise DanglingReference(f"{p}/from_id", link.from_id)
        if link.to_id not in seen:
            raise DanglingReference(f"{p}/to_id", link.to_id)
        _check(link.to_id in node_ids, f"{p}/to_id", "links must terminate at a node")
        if link.weather_ok is not None:
            _check(len(link.weather_ok) == scenario.steps, f"{p}/weather_ok",
                   f"must have one entry per step ({scenario.steps})")
    return scenario


# --------------------------------------------------------------------------
# serialization

_ENUMS = (HapClass, StorageTech, GroundModality, Modality)


def _plain(obj: Any) -> Any:
    if isinstance(obj, _ENUMS):
        return obj.value
    if isinstance(obj, tuple):
        return [_plain(x) for x in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    return obj


def to_dict(scenario: Scenario) -> dict:
    doc = {"format_version": FORMAT_VERSION}
    doc.update(_plain(scenario))
    for node in doc["nodes"]:
        node["class"] = node.pop("hap_class")
    return doc


def dumps(scenario: Scenario) -> str:
    return json.dumps(to_dict(scenario), indent=2, sort_keys=False) + "\n"


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    try:
        Path(path).write_text(dumps(scenario))
    except OSError as exc:
        raise IoError(f"cannot write scenario to {str(path)!r}: {exc.strerror or exc}") from None


def _build(cls, data: Any, path: str, nested: dict | None = None):
    if not isinstance(data, dict):
        raise ValidationError(path, f"expected an object for {cls.__name__}")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ValidationError(f"{path}/{unknown[0]}", "unknown field")
    kwargs = {}
    for key, value in data.items():
        if nested and key in nested:
            value = nested[key](value, f"{path}/{key}")
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ValidationError(path, str(exc)) from None
    except ValueError as exc:
        raise ValidationError(path, str(exc)) from None


def _list_of(builder):
    def parse(value, path):
        if not isinstance(value, list):
            raise ValidationError(path, "expected a list")
        return tuple(builder(v, f"{path}/{k}") for k, v in enumerate(value))
    return parse


def _storage(d, p):
    return _build(StorageUnit, d, p)


def _entry(d, p):
    return _build(PayloadEntry, d, p)


def _schedule(d, p):
    return _build(PayloadSchedule, d, p, {"entries": _list_of(_entry)})


def _node(d, p):
    if isinstance(d, dict) and "class" in d:
        d = dict(d)
        d["hap_class"] = d.pop("class")
    return _build(HapNode, d, p, {"storage": _storage, "payload_schedule": _schedule})


def _link(d, p):
    return _build(WptLink, d, p)


def _ground(d, p):
    return _build(GroundStation, d, p)


def _env(d, p):
    return _build(Environment, d, p)


def from_dict(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be a JSON object")
    doc = dict(doc)
    version = doc.pop("format_version", None)
    if version != FORMAT_VERSION:
        raise ValidationError("/format_version", f"expected {FORMAT_VERSION}, got {version!r}")
    scenario = _build(Scenario, doc, "", {
        "nodes": _list_of(_node),
        "links": _list_of(_link),
        "ground_stations": _list_of(_ground),
        "environment": _env,
    })
    return validate(scenario)


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed scenario file: {exc}") from None
    return from_dict(doc)


BUILTIN_DIR = Path(__file__).parent / "data"


def resolve_path(path: str | Path) -> Path:
    """Accept a file path or the name of a bundled scenario (e.g. ``case_study``)."""
    p = Path(path)
    if not p.exists():
        builtin = BUILTIN_DIR / f"{p.name}.json"
        if builtin.exists() and p.suffix == "":
            return builtin
    return p


def load_scenario(path: str | Path) -> Scenario:
    p = resolve_path(path)
    try:
        text = p.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read scenario {str(path)!r}: {exc}") from None
    return loads(text)


# --------------------------------------------------------------------------
# presets: mid-range values of the small/medium/large HAP size classes

_PRESETS = {
    # pv m2, mass kg, airspeed m/s, comm W, sensing W, compute W, battery kg
    HapClass.SMALL: dict(pv_area=7.5, mass=75.0, airspeed=12.0, comm=20.0, sensing=10.0, compute=20.0,
                         battery_mass=15.0, receiver_area=0.5),
    HapClass.MEDIUM: dict(pv_area=40.0, mass=330.0, airspeed=25.0, comm=1000.0, sensing=500.0, compute=100.0,
                          battery_mass=60.0, receiver_area=2.0),
    HapClass.LARGE: dict(pv_area=85.0, mass=1140.0, airspeed=25.0, comm=4000.0, sensing=0.0, compute=250.0,
                         battery_mass=200.0, receiver_area=5.0),
}
SAR_WINDOW = (10.0, 12.0)
SAR_POWER = 1500.0


def preset(hap_class: HapClass | str, node_id: str | None = None, horizon: float = 24.0) -> HapNode:
    """A node populated with mid-range size-class values."""
    hap_class = HapClass(hap_class)
    if hap_class is HapClass.CUSTOM:
        raise ValueError("no preset for Custom")
    p = _PRESETS[hap_class]
    if hap_class is HapClass.LARGE:
        a, b = SAR_WINDOW
        entries = (
            PayloadEntry(0.0, a, p["comm"], 0.0, p["compute"]),
            PayloadEntry(a, b, p["comm"], SAR_POWER, p["compute"]),
            PayloadEntry(b, horizon, p["comm"], 0.0, p["compute"]),
        )
    else:
        entries = (PayloadEntry(0.0, horizon, p["comm"], p["sensing"], p["compute"]),)
    return HapNode(
        id=node_id or hap_class.value.lower(),
        hap_class=hap_class,
        pv_area=p["pv_area"],
        mass=p["mass"],
        airspeed=p["airspeed"],
        system_efficiency=DEFAULT_SYSTEM_EFFICIENCY,
        storage=StorageUnit(storage_mass=p["battery_mass"]),
        payload_schedule=PayloadSchedule(entries),
        receiver_area=p["receiver_area"],
        initial_soc=0.5,
    )


def single_node_scenario(node: HapNode, supply_power: float = 50000.0) -> Scenario:
    """One node plus one ground transmitter, one day at hourly steps."""
    return validate(Scenario(
        nodes=(node,),
        ground_stations=(GroundStation(id="ground", max_supply_power=supply_power),),
        name=f"{node.hap_class.value.lower()}-single",
    ))
