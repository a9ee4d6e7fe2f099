import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from stratgrid import simplex
from stratgrid.errors import Infeasible, Unbounded

# Beale's classic example: Dantzig pricing with textbook ties cycles on it
BEALE_C = np.array([-0.75, 20.0, -0.5, 6.0])
BEALE_A = np.array([[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]])
BEALE_B = np.array([0.0, 0.0, 1.0])


def test_beale_example_terminates_at_optimum():
    res = simplex.solve(BEALE_C, A_ub=BEALE_A, b_ub=BEALE_B)
    assert res.objective == pytest.approx(-1.25)
    assert res.certified()


def test_bland_fallback_reaches_same_optimum():
    res = simplex.solve(BEALE_C, A_ub=BEALE_A, b_ub=BEALE_B, degenerate_limit=1)
    assert res.objective == pytest.approx(-1.25)


def test_box_constraints_handled_without_rows():
    res = simplex.solve([-1.0, -2.0], A_ub=[[1.0, 1.0]], b_ub=[3.0], ub=[2.0, 2.0])
    assert res.objective == pytest.approx(-5.0)
    np.testing.assert_allclose(res.x, [1.0, 2.0])


def test_equality_and_nonzero_lower_bounds():
    res = simplex.solve([1.0, 1.0], A_eq=[[1.0, -1.0]], b_eq=[0.5], lb=[1.0, 0.0])
    np.testing.assert_allclose(res.x, [1.0, 0.5])


def test_infeasible():
    with pytest.raises(Infeasible) as err:
        simplex.solve([1.0], A_eq=[[1.0]], b_eq=[5.0], ub=[2.0])
    assert err.value.violated_rows == [0]


def test_bounds_contradiction_is_infeasible():
    with pytest.raises(Infeasible):
        simplex.solve([1.0], lb=[2.0], ub=[1.0])


def test_unbounded():
    with pytest.raises(Unbounded):
        simplex.solve([-1.0, 0.0], A_ub=[[1.0, -1.0]], b_ub=[1.0])


def test_redundant_equalities():
    res = simplex.solve([1.0, 2.0], A_eq=[[1.0, 1.0], [2.0, 2.0]], b_eq=[1.0, 2.0])
    assert res.objective == pytest.approx(1.0)


def random_lp(rng, m_eq, m_ub, n):
    """A random LP with a known feasible point and a bounded objective."""
    x0 = rng.uniform(0, 2, n)
    A_eq = rng.normal(size=(m_eq, n))
    A_ub = rng.normal(size=(m_ub, n))
    b_eq = A_eq @ x0
    b_ub = A_ub @ x0 + rng.uniform(0, 1, m_ub)
    ub = np.where(rng.random(n) < 0.5, x0 + rng.uniform(0, 3, n), np.inf)
    c = rng.normal(size=n)
    c[np.isinf(ub)] = np.abs(c[np.isinf(ub)])   # keep unbounded directions uphill
    return c, A_eq, b_eq, A_ub, b_ub, ub


@given(seed=st.integers(0, 2**32 - 1), m_eq=st.integers(0, 5), m_ub=st.integers(0, 6), n=st.integers(1, 10))
def test_matches_highs(seed, m_eq, m_ub, n):
    rng = np.random.default_rng(seed)
    c, A_eq, b_eq, A_ub, b_ub, ub = random_lp(rng, m_eq, m_ub, n)
    ref = linprog(c, A_ub=A_ub if m_ub else None, b_ub=b_ub if m_ub else None,
                  A_eq=A_eq if m_eq else None, b_eq=b_eq if m_eq else None,
                  bounds=list(zip(np.zeros(n), [None if np.isinf(u) else u for u in ub])), method="highs")
    if ref.status == 3:
        with pytest.raises(Unbounded):
            simplex.solve(c, A_eq, b_eq, A_ub, b_ub, ub=ub)
        return
    assert ref.status == 0
    res = simplex.solve(c, A_eq, b_eq, A_ub, b_ub, ub=ub)
    assert res.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)
    assert res.certified(1e-9)
    if m_eq:
        np.testing.assert_allclose(A_eq @ res.x, b_eq, atol=1e-7)
    if m_ub:
        assert np.all(A_ub @ res.x <= b_ub + 1e-7)


def test_deterministic():
    rng = np.random.default_rng(3)
    args = random_lp(rng, 4, 4, 9)
    a = simplex.solve(*args[:5], ub=args[5])
    b = simplex.solve(*args[:5], ub=args[5])
    assert np.array_equal(a.x, b.x) and np.array_equal(a.basis, b.basis)


def test_certificate_detects_suboptimal_basis():
    # min -x s.t. x <= 1 solved with a loose tolerance still certifies; a bad basis does not
    A = np.array([[1.0, 1.0]])
    b = np.array([1.0])
    c = np.array([-1.0, 0.0])
    lb, ub = np.zeros(2), np.full(2, np.inf)
    good, _ = simplex.certificate(A, b, c, lb, ub, np.array([0]), np.array([1.0, 0.0]))
    bad, _ = simplex.certificate(A, b, c, lb, ub, np.array([1]), np.array([0.0, 1.0]))
    assert good == 0.0 and bad == pytest.approx(1.0)
