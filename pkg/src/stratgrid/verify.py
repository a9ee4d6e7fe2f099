"""Built-in self-check: calibration anchors, size-class table and the LP-vs-oracle suite."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dispatch, loads, randomized, solar
from .scenario import HapClass, HapNode, Environment, preset
from .wptlink import Modality, WptLink, fresnel_distance, optical_end_to_end_efficiency

ORACLE_QUANTUM_WH = 50.0
ORACLE_INSTANCES = 100
REL_TOL = 1e-6
CERT_TOL = 1e-9

# size-class bands: pv area (m2), produce (kW), comm+sensing (W), compute (W)
SIZE_CLASSES = {
    HapClass.SMALL: dict(area=(5.0, 10.0), produce=(1.1, 2.5), comm_sens=(10.0, 50.0), compute=(0.0, 20.0)),
    HapClass.MEDIUM: dict(area=(30.0, 50.0), produce=(6.6, 12.5), comm_sens=(1000.0, 2000.0), compute=(100.0, 100.0)),
    HapClass.LARGE: dict(area=(80.0, 90.0), produce=(17.6, 22.5), comm_sens=(3000.0, 5000.0), compute=(200.0, 300.0)),
}
IRRADIANCE_BAND = (1100.0, 1250.0)
HAWK30_AREA = 219.0
HAWK30_BAND_KW = (48.0, 55.0)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _within(x: float, target: float, rel: float) -> bool:
    return abs(x - target) <= rel * abs(target)


def _pv_kw(area: float, g: float) -> float:
    return solar.pv_power(HapNode(id="probe", pv_area=area, mass=1.0), g) / 1000.0


def size_class_checks() -> list[Check]:
    out = []
    for cls, band in SIZE_CLASSES.items():
        lo = _pv_kw(band["area"][0], IRRADIANCE_BAND[0])
        hi = _pv_kw(band["area"][1], IRRADIANCE_BAND[1])
        ok = _within(lo, band["produce"][0], 0.05) and _within(hi, band["produce"][1], 0.05)
        out.append(Check(f"produce band {cls.value}", ok,
                         f"{lo:.3f}-{hi:.3f} kW vs {band['produce'][0]}-{band['produce'][1]} kW"))
        node = preset(cls)
        entries = node.payload_schedule.entries
        comm_sens = max(e.comm_power + (0.0 if cls is HapClass.LARGE else e.sensing_power) for e in entries)
        compute = max(e.compute_power for e in entries)
        ok = (band["area"][0] <= node.pv_area <= band["area"][1]
              and band["comm_sens"][0] <= comm_sens <= band["comm_sens"][1]
              and band["compute"][0] <= compute <= band["compute"][1])
        out.append(Check(f"preset {cls.value}", ok,
                         f"pv {node.pv_area} m2, comm/sens {comm_sens:.0f} W, compute {compute:.0f} W"))
    lo, hi = _pv_kw(HAWK30_AREA, IRRADIANCE_BAND[0]), _pv_kw(HAWK30_AREA, IRRADIANCE_BAND[1])
    ok = HAWK30_BAND_KW[0] <= lo and hi <= HAWK30_BAND_KW[1]
    out.append(Check("HAWK30 219 m2", ok, f"{lo:.2f}-{hi:.2f} kW vs 48-55 kW"))
    return out


def calibration_checks() -> list[Check]:
    probe = HapNode(id="probe", pv_area=1.0, mass=40.0, airspeed=25.0, lift_to_drag=25.0, propulsive_efficiency=0.8)
    sk = loads.station_keeping_power(probe, 0.0)
    f1 = fresnel_distance(10.0, 0.01)
    f2 = fresnel_distance(15.0, 0.005)
    eta = optical_end_to_end_efficiency(WptLink("a", "b", Modality.OPTICAL), 8.6)
    g = solar.irradiance(Environment(latitude=0.0, day_of_year=80), 12.0)
    return [
        Check("station keeping 40 kg 25 m/s", _within(sk, 500.0, 0.05), f"{sk:.1f} W vs 500 W"),
        Check("fresnel 10 m 10 mm", abs(f1 - 20.0) <= 1e-9, f"{f1:.6f} km vs 20 km"),
        Check("fresnel 15 m 5 mm", abs(f2 - 90.0) <= 1e-9, f"{f2:.6f} km vs 90 km"),
        Check("optical 8.6 km", abs(eta - 0.20) <= 0.005, f"{eta:.4f} vs 0.20"),
        Check("peak irradiance", _within(g, 1250.0, 0.005), f"{g:.1f} W/m2 vs 1250 W/m2"),
    ]


def oracle_case(rng: np.random.Generator, solver_tol: float = 1e-9):
    """One random tiny instance: (agrees, lp objective, oracle objective, dual infeasibility)."""
    scenario, profiles = randomized.oracle_instance(rng)
    plan = dispatch.solve_cooperative(scenario, profiles, opt_tol=solver_tol)
    oracle = dispatch.brute_force_oracle(scenario, profiles, ORACLE_QUANTUM_WH)
    lp = plan.objective_wh
    slack = REL_TOL * max(1.0, abs(oracle))
    agrees = (
        abs(lp - oracle) <= 2 * ORACLE_QUANTUM_WH + slack
        # the lattice only restricts the feasible set, so the LP may never lose to it
        and lp <= oracle + slack
        and plan.max_dual_infeasibility <= CERT_TOL
    )
    return agrees, lp, oracle, plan.max_dual_infeasibility


def oracle_checks(seed: int, instances: int = ORACLE_INSTANCES, solver_tol: float = 1e-9) -> list[Check]:
    rng = np.random.default_rng(seed)
    failures = []
    worst_gap = 0.0
    for k in range(instances):
        agrees, lp, oracle, dual = oracle_case(rng, solver_tol)
        worst_gap = max(worst_gap, abs(lp - oracle))
        if not agrees:
            failures.append((k, lp, oracle, dual))
    detail = f"{instances - len(failures)}/{instances} agree, worst |LP-oracle| {worst_gap:.3f} Wh"
    if failures:
        k, lp, oracle, dual = failures[0]
        detail += f"; first failure #{k}: LP {lp:.3f} oracle {oracle:.3f} dual infeasibility {dual:.2e}"
    return [Check("LP vs lattice oracle", not failures, detail)]


def run_all(seed: int, solver_tol: float = 1e-9, instances: int = ORACLE_INSTANCES) -> list[Check]:
    return calibration_checks() + size_class_checks() + oracle_checks(seed, instances, solver_tol)


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  result  detail"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL':<6}  {c.detail}")
    passed = sum(c.passed for c in checks)
    lines.append(f"{passed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"
