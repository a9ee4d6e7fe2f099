import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stratgrid import wptlink as w
from stratgrid.errors import DomainError, NoPath, ZeroDistance
from stratgrid.wptlink import Modality, Regime, WptLink


def test_fresnel_anchors():
    assert w.fresnel_distance(10.0, 0.01) == 20.0
    assert w.fresnel_distance(15.0, 0.005) == 90.0
    with pytest.raises(DomainError):
        w.fresnel_distance(0.0, 0.01)


def test_optical_default_chain_at_8_6_km():
    eta = w.optical_end_to_end_efficiency(WptLink("a", "b", Modality.OPTICAL), 8.6)
    assert eta == pytest.approx(0.20, abs=0.005)


def test_optical_link_dark_under_cloud():
    link = WptLink("a", "b", Modality.OPTICAL, weather_ok=(True, False))
    assert w.optical_end_to_end_efficiency(link, 5.0, step=1) == 0.0
    b = w.link_budget(link, {"a": (0, 0, 20), "b": (5, 0, 20)}, step=1)
    assert b.end_to_end_eff == 0.0 and b.max_deliverable_power == 0.0


def test_rf_near_field_collects_almost_everything():
    link = WptLink("a", "b", Modality.RF, tx_aperture=10.0, rx_aperture=10.0, wavelength=0.01)
    assert w.rf_geometric_efficiency(link, 0.5) > 0.999
    assert w.regime(link, 0.5) is Regime.FRESNEL
    assert w.regime(link, 25.0) is Regime.FAR_FIELD


def test_rf_far_field_falls_as_inverse_square():
    link = WptLink("a", "b", Modality.RF, tx_aperture=1.0, rx_aperture=1.0, wavelength=0.01)
    e1, e2 = w.rf_geometric_efficiency(link, 100.0), w.rf_geometric_efficiency(link, 200.0)
    assert e1 / e2 == pytest.approx(4.0, rel=1e-3)


@given(d1=st.floats(0.01, 500), d2=st.floats(0.01, 500))
def test_efficiency_monotone_in_distance(d1, d2):
    lo, hi = sorted((d1, d2))
    rf = WptLink("a", "b", Modality.RF)
    opt = WptLink("a", "b", Modality.OPTICAL)
    assert w.rf_geometric_efficiency(rf, lo) >= w.rf_geometric_efficiency(rf, hi)
    assert w.optical_end_to_end_efficiency(opt, lo) >= w.optical_end_to_end_efficiency(opt, hi)
    assert 0 <= w.rf_geometric_efficiency(rf, hi) <= 1


def test_rectenna_and_density_cap():
    link = WptLink("a", "b", Modality.RF, tx_aperture=20.0, rx_aperture=20.0, max_tx_power=1e6)
    b = w.link_budget(link, {"a": (0, 0, 20), "b": (1, 0, 20)}, rx_area=2.0)
    assert b.max_deliverable_power == pytest.approx(3600.0 * 2.0 * 0.615)
    assert b.end_to_end_eff <= 0.7 * 0.615 + 1e-12


def test_ris_reflections_multiply():
    pos = {"a": (0, 0, 20), "b": (3, 0, 20)}
    plain = w.link_budget(WptLink("a", "b", Modality.OPTICAL), pos)
    bounced = w.link_budget(WptLink("a", "b", Modality.OPTICAL, ris_reflections=2), pos)
    assert bounced.end_to_end_eff == pytest.approx(plain.end_to_end_eff * 0.64)


def test_zero_distance():
    with pytest.raises(ZeroDistance):
        w.link_budget(WptLink("a", "b"), {"a": (1, 2, 3), "b": (1, 2, 3)})


def test_select_modality():
    rf = w.LinkBudget(1.0, Regime.FRESNEL, 0.9, 0.3, 100.0, Modality.RF)
    opt = w.LinkBudget(1.0, Regime.FRESNEL, 0.5, 0.2, 100.0, Modality.OPTICAL)
    assert w.select_modality(rf, opt, True) is rf
    assert w.select_modality(rf, opt, False) is rf
    better = w.LinkBudget(1.0, Regime.FRESNEL, 0.8, 0.35, 100.0, Modality.OPTICAL)
    assert w.select_modality(rf, better, True) is better
    assert w.select_modality(rf, better, False) is rf


def test_parallel_links_collapse_to_best_modality():
    pos = {"a": (0, 0, 20), "b": (8.6, 0, 20)}
    links = [WptLink("a", "b", Modality.RF, tx_aperture=1.0, rx_aperture=1.0),
             WptLink("a", "b", Modality.OPTICAL, weather_ok=(True, False))]
    g = w.build_energy_graph(links, pos, 2)
    rf_eta = w.link_budget(links[0], pos).end_to_end_eff
    assert g.efficiency("a", "b", 0) == pytest.approx(0.20, abs=0.005)
    assert g.efficiency("a", "b", 1) == pytest.approx(rf_eta)


def test_relay_beats_direct_when_hops_are_efficient():
    g = w.EnergyGraph(vertices=["a", "b", "c"])
    g.add_edge("a", "c", [0.1])
    g.add_edge("a", "b", [0.5])
    g.add_edge("b", "c", [0.5])
    path, eta = w.route_max_efficiency(g, "a", "c", 0)
    assert path == ["a", "b", "c"] and eta == pytest.approx(0.25)


def test_no_path():
    g = w.EnergyGraph(vertices=["a", "b"])
    g.add_edge("a", "b", [0.0])
    with pytest.raises(NoPath):
        w.route_max_efficiency(g, "a", "b", 0)
    with pytest.raises(NoPath):
        w.route_max_efficiency(g, "a", "zz", 0)


def test_edge_efficiency_range_checked():
    g = w.EnergyGraph(vertices=[])
    with pytest.raises(DomainError):
        g.add_edge("a", "b", [1.2])


def exhaustive_best(graph, src, dst, step):
    """Best product of efficiencies over every simple path."""
    others = [v for v in graph.vertices if v not in (src, dst)]
    best = 0.0
    for k in range(len(others) + 1):
        for mid in itertools.permutations(others, k):
            path = [src, *mid, dst]
            eta = 1.0
            for u, v in zip(path, path[1:]):
                e = graph.edges.get((u, v))
                eta *= 0.0 if e is None else float(e[step])
            best = max(best, eta)
    return best


def random_graph(rng, n):
    names = [f"v{k}" for k in range(n)]
    g = w.EnergyGraph(vertices=list(names))
    for u, v in itertools.permutations(names, 2):
        if rng.random() < 0.4:
            g.add_edge(u, v, [rng.uniform(0.01, 1.0)])
    return g


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 7))
def test_routing_matches_exhaustive_search(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n)
    expected = exhaustive_best(g, "v0", f"v{n - 1}", 0)
    if expected == 0.0:
        with pytest.raises(NoPath):
            w.route_max_efficiency(g, "v0", f"v{n - 1}", 0)
        return
    path, eta = w.route_max_efficiency(g, "v0", f"v{n - 1}", 0)
    assert eta == pytest.approx(expected, rel=1e-12)
    product = math.prod(g.efficiency(u, v, 0) for u, v in zip(path, path[1:]))
    assert product == pytest.approx(eta, rel=1e-12)
    assert len(set(path)) == len(path)


def test_small_aperture_fresnel():
    assert w.fresnel_distance(1.0, 0.01) == pytest.approx(0.2)


def test_rf_collection_worked_example():
    link = WptLink("a", "b", Modality.RF, tx_aperture=10.0, rx_aperture=10.0, wavelength=0.01)
    assert w.collection_parameter(10.0, 10.0, 0.01, 20.0) == pytest.approx(0.3927, abs=1e-4)
    assert w.rf_geometric_efficiency(link, 20.0) == pytest.approx(0.1429, abs=1e-4)
    b = w.link_budget(link, {"a": (0, 0, 20), "b": (20, 0, 20)})
    assert b.end_to_end_eff == pytest.approx(0.0615, abs=1e-4)
    assert w.rf_geometric_efficiency(link, 1e-6) == pytest.approx(1.0)


def test_optical_at_twice_the_calibration_distance():
    link = WptLink("a", "b", Modality.OPTICAL)
    expected = 0.45 * 0.55 * 0.85 * math.exp(-2 * link.extinction_per_km * 8.6)
    assert w.optical_end_to_end_efficiency(link, 17.2) == pytest.approx(expected)
    assert w.optical_end_to_end_efficiency(link, 8.6) == pytest.approx(0.200, abs=0.001)


def test_one_square_metre_receives_at_most_3_6_kw_carrier():
    link = WptLink("a", "b", Modality.RF, max_tx_power=1e7)
    b = w.link_budget(link, {"a": (0, 0, 20), "b": (0.5, 0, 20)}, rx_area=1.0)
    assert b.max_deliverable_power / link.carrier_to_dc_eff == pytest.approx(3600.0)


def test_equal_efficiency_prefers_optical():
    rf = w.LinkBudget(1.0, Regime.FRESNEL, 0.5, 0.2, 100.0, Modality.RF)
    opt = w.LinkBudget(1.0, Regime.FRESNEL, 0.5, 0.2, 100.0, Modality.OPTICAL)
    assert w.select_modality(rf, opt, True) is opt


def test_two_hop_example_and_trivial_route():
    g = w.EnergyGraph(vertices=["a", "b", "c"])
    g.add_edge("a", "c", [0.5])
    g.add_edge("a", "b", [0.8])
    g.add_edge("b", "c", [0.7])
    path, eta = w.route_max_efficiency(g, "a", "c", 0)
    assert path == ["a", "b", "c"] and eta == pytest.approx(0.56)
    assert w.route_max_efficiency(g, "b", "b", 0) == (["b"], 1.0)
