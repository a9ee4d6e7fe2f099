"""Two-phase bounded-variable primal simplex on a dense tableau.

Solves

    min c.x   s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lb <= x <= ub

with finite lower bounds and possibly infinite upper bounds. Nonbasic
variables sit at one of their bounds, so box constraints cost no rows.
Pricing is Dantzig's rule until a run of degenerate pivots is seen, after
which the phase continues under Bland's rule, which cannot cycle. Ties in
the ratio test go to the lowest variable index, so results are
deterministic.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, Unbounded

log = logging.getLogger(__name__)

AT_LOWER, AT_UPPER, BASIC = 0, 1, 2


@dataclass
class SimplexResult:
    x: np.ndarray
    objective: float
    iterations: int
    basis: np.ndarray
    max_dual_infeasibility: float
    max_primal_infeasibility: float
    bland_switched: bool

    def certified(self, tol: float = 1e-9) -> bool:
        return self.max_dual_infeasibility <= tol


class _Tableau:
    def __init__(self, M, b, lb, ub, basis, x, opt_tol, feas_tol, refactor_every, degenerate_limit):
        self.M = M
        self.b = b
        self.lb = lb
        self.ub = ub
        self.basis = basis
        self.x = x
        self.status = np.full(M.shape[1], AT_LOWER, dtype=np.int8)
        self.status[(x == ub) & (ub > lb)] = AT_UPPER
        self.status[basis] = BASIC
        self.opt_tol = opt_tol
        self.feas_tol = feas_tol
        self.refactor_every = refactor_every
        self.degenerate_limit = degenerate_limit
        self.iterations = 0
        self.bland_switched = False
        self.refactor()

    def refactor(self):
        B = self.M[:, self.basis]
        nonbasic = self.status != BASIC
        rhs = self.b - self.M[:, nonbasic] @ self.x[nonbasic]
        self.T = np.linalg.solve(B, self.M)
        self.beta = np.linalg.solve(B, rhs)
        self.x[self.basis] = self.beta

    def reduced_costs(self, c):
        return c - c[self.basis] @ self.T

    def run(self, c, allowed, max_iter):
        d = self.reduced_costs(c)
        bland = False
        degenerate_run = 0
        since_refactor = 0
        n = self.M.shape[1]
        idx = np.arange(n)
        while True:
            if self.iterations >= max_iter:
                raise RuntimeError(f"simplex iteration limit {max_iter} reached")
            at_lower = (self.status == AT_LOWER) & (self.ub > self.lb)
            at_upper = self.status == AT_UPPER
            improving = allowed & ((at_lower & (d < -self.opt_tol)) | (at_upper & (d > self.opt_tol)))
            if not improving.any():
                return
            if bland:
                j = int(idx[improving][0])
            else:
                cand = idx[improving]
                j = int(cand[np.argmax(np.abs(d[cand]))])
            sigma = 1.0 if self.status[j] == AT_LOWER else -1.0
            alpha = self.T[:, j]
            delta = sigma * alpha
            lbB = self.lb[self.basis]
            ubB = self.ub[self.basis]
            ratios = np.full(alpha.shape, np.inf)
            piv_tol = 1e-11
            dec = delta > piv_tol
            inc = delta < -piv_tol
            ratios[dec] = (self.beta[dec] - lbB[dec]) / delta[dec]
            with np.errstate(invalid="ignore"):
                ratios[inc] = (ubB[inc] - self.beta[inc]) / (-delta[inc])
            ratios = np.maximum(ratios, 0.0)
            t_rows = ratios.min() if ratios.size else np.inf
            t_flip = self.ub[j] - self.lb[j]
            if not np.isfinite(t_rows) and not np.isfinite(t_flip):
                raise Unbounded(f"variable {j} can decrease the objective without limit")
            self.iterations += 1
            if t_flip <= t_rows:
                # bound flip, basis unchanged
                self.beta -= t_flip * delta
                self.x[j] = self.ub[j] if sigma > 0 else self.lb[j]
                self.status[j] = AT_UPPER if sigma > 0 else AT_LOWER
                self.x[self.basis] = self.beta
                degenerate_run = 0
                continue
            t = t_rows
            ties = np.flatnonzero(ratios <= t + self.feas_tol * 1e-3)
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                mags = np.abs(alpha[ties])
                best = mags.max()
                close = ties[mags >= best * (1 - 1e-9)]
                r = int(close[np.argmin(self.basis[close])])
            leaving = int(self.basis[r])
            entering_value = self.x[j] + sigma * t
            self.beta -= t * delta
            leave_to_lower = delta[r] > 0
            self.x[leaving] = self.lb[leaving] if leave_to_lower else self.ub[leaving]
            self.status[leaving] = AT_LOWER if leave_to_lower else AT_UPPER
            self.beta[r] = entering_value
            self.x[j] = entering_value
            self.status[j] = BASIC
            self.basis[r] = j
            # tableau and reduced-cost update
            pivot_row = self.T[r] / alpha[r]
            col = alpha.copy()
            col[r] = 0.0
            rows = np.flatnonzero(col)
            self.T[rows] -= col[rows, None] * pivot_row
            self.T[r] = pivot_row
            d = d - d[j] * pivot_row
            d[self.basis] = 0.0
            self.x[self.basis] = self.beta
            if t <= self.feas_tol:
                degenerate_run += 1
                if degenerate_run >= self.degenerate_limit and not bland:
                    bland = True
                    self.bland_switched = True
                    log.debug("switching to Bland's rule after %d degenerate pivots", degenerate_run)
            else:
                degenerate_run = 0
            since_refactor += 1
            if since_refactor >= self.refactor_every:
                self.refactor()
                d = self.reduced_costs(c)
                since_refactor = 0


def solve(
    c,
    A_eq=None,
    b_eq=None,
    A_ub=None,
    b_ub=None,
    lb=None,
    ub=None,
    opt_tol: float = 1e-9,
    feas_tol: float = 1e-9,
    max_iter: int = 200000,
    refactor_every: int = 100,
    degenerate_limit: int = 50,
) -> SimplexResult:
    """Minimise ``c.x``. Raises Infeasible or Unbounded.

    ``feas_tol`` is relative to the largest right-hand side magnitude.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float).copy()
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float).copy()
    if not np.all(np.isfinite(lb)):
        raise ValueError("all lower bounds must be finite")
    if np.any(ub < lb):
        bad = np.flatnonzero(ub < lb)
        raise Infeasible(f"variables {bad.tolist()} have upper < lower bound")

    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
    m = m_eq + m_ub
    # structural | slack
    A = np.zeros((m, n + m_ub))
    A[:m_eq, :n] = A_eq
    A[m_eq:, :n] = A_ub
    A[m_eq:, n:] = np.eye(m_ub)
    b = np.concatenate([b_eq, b_ub])
    lb_all = np.concatenate([lb, np.zeros(m_ub)])
    ub_all = np.concatenate([ub, np.full(m_ub, np.inf)])
    c_all = np.concatenate([c, np.zeros(m_ub)])
    nv = n + m_ub

    scale = max(1.0, float(np.abs(b).max(initial=0.0)), float(np.abs(lb[np.isfinite(lb)]).max(initial=0.0)))
    ftol = feas_tol * scale

    x0 = lb_all.copy()
    resid = b - A @ x0
    signs = np.where(resid >= 0, 1.0, -1.0)
    M = np.hstack([A, np.diag(signs)])
    lb_full = np.concatenate([lb_all, np.zeros(m)])
    ub_full = np.concatenate([ub_all, np.full(m, np.inf)])
    x = np.concatenate([x0, np.abs(resid)])
    basis = np.arange(nv, nv + m)

    tab = _Tableau(M, b, lb_full, ub_full, basis, x, opt_tol, ftol, refactor_every, degenerate_limit)
    structural = np.zeros(nv + m, dtype=bool)
    structural[:nv] = True

    # phase 1
    c1 = np.concatenate([np.zeros(nv), np.ones(m)])
    tab.run(c1, np.ones(nv + m, dtype=bool), max_iter)
    tab.refactor()
    infeas = tab.x[nv:]
    if infeas.sum() > ftol * max(1, m) ** 0.5:
        rows = np.flatnonzero(infeas > ftol).tolist()
        raise Infeasible(f"no feasible point; constraint rows {rows} cannot be satisfied", rows)

    # drive zero-valued artificials out of the basis; drop redundant rows
    keep_rows = np.ones(m, dtype=bool)
    for r in range(m):
        if tab.basis[r] < nv:
            continue
        row = tab.T[r, :nv]
        cand = np.flatnonzero((np.abs(row) > 1e-9) & (tab.status[:nv] != BASIC))
        if cand.size == 0:
            keep_rows[r] = False
            continue
        j = int(cand[np.argmax(np.abs(row[cand]))])
        leaving = int(tab.basis[r])
        tab.x[leaving] = 0.0
        tab.status[leaving] = AT_LOWER
        tab.basis[r] = j
        tab.status[j] = BASIC
        tab.refactor()
    rows = np.flatnonzero(keep_rows)
    basis = tab.basis[rows].copy()
    M2 = tab.M[rows][:, :nv]
    b2 = b[rows]
    x2 = tab.x[:nv].copy()
    tab2 = _Tableau(M2, b2, lb_all, ub_all, basis, x2, opt_tol, ftol, refactor_every, degenerate_limit)
    tab2.iterations = tab.iterations
    tab2.bland_switched = tab.bland_switched

    # phase 2
    tab2.run(c_all, np.ones(nv, dtype=bool), max_iter)
    tab2.refactor()
    x_full = np.clip(tab2.x, lb_all, ub_all)

    dual_inf, primal_inf = certificate(M2, b2, c_all, lb_all, ub_all, tab2.basis, x_full)
    return SimplexResult(
        x=x_full[:n].copy(),
        objective=float(c @ x_full[:n]),
        iterations=tab2.iterations,
        basis=tab2.basis.copy(),
        max_dual_infeasibility=dual_inf,
        max_primal_infeasibility=primal_inf,
        bland_switched=tab2.bland_switched,
    )


def certificate(A, b, c, lb, ub, basis, x) -> tuple[float, float]:
    """Recompute duals from scratch; return (max dual infeasibility, max primal residual).

    A nonbasic variable at its lower bound must have a nonnegative reduced
    cost, one at its upper bound a nonpositive one.
    """
    B = A[:, basis]
    y = np.linalg.solve(B.T, c[basis])
    d = c - A.T @ y
    nonbasic = np.ones(A.shape[1], dtype=bool)
    nonbasic[basis] = False
    fixed = ub <= lb
    span = np.maximum(1.0, np.abs(ub - lb))
    at_lower = nonbasic & ~fixed & (np.abs(x - lb) <= 1e-9 * span)
    at_upper = nonbasic & ~fixed & ~at_lower
    viol = np.concatenate([np.maximum(0.0, -d[at_lower]), np.maximum(0.0, d[at_upper]), [0.0]])
    primal = np.abs(A @ x - b).max(initial=0.0)
    return float(viol.max()), float(primal)
