import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stratgrid.profiles import Profiles
from stratgrid.scenario import GroundStation, HapNode, Scenario, StorageUnit, validate
from stratgrid.wptlink import Modality, WptLink

settings.register_profile(
    "repo", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("repo")


def make_node(node_id="hap1", capacity=1000.0, floor=0.2, soc=None, x=0.0, **storage_kw):
    unit = StorageUnit(specific_energy=100.0, storage_mass=capacity / 100.0, soc_floor=floor, **storage_kw)
    return HapNode(id=node_id, pv_area=10.0, mass=10.0, storage=unit, position=(x, 0.0, 20.0),
                   initial_soc=floor if soc is None else soc)


def make_case(nodes, links=(), steps=4, supply=1e6):
    """Scenario skeleton whose energy profiles are supplied by the caller."""
    return validate(Scenario(
        nodes=tuple(nodes),
        links=tuple(links),
        ground_stations=(GroundStation(id="ground", max_supply_power=supply),),
        horizon_hours=float(steps),
        timestep_hours=1.0,
    ))


def make_profiles(gen, load, link_eff=None, link_cap=None, ground=1e6):
    gen = np.atleast_2d(np.asarray(gen, dtype=float))
    load = np.atleast_2d(np.asarray(load, dtype=float))
    n, t = gen.shape
    link_eff = np.zeros((0, t)) if link_eff is None else np.atleast_2d(np.asarray(link_eff, dtype=float))
    link_cap = np.zeros((0, t)) if link_cap is None else np.atleast_2d(np.asarray(link_cap, dtype=float))
    total = np.full(t, float(ground))
    return Profiles(gen, load, link_eff, link_cap, np.tile(total, (n, 1)), total)


def optical(a, b):
    return WptLink(a, b, Modality.OPTICAL)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
