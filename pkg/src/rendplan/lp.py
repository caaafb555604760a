"""Dense linear-program solver used by the rendezvous optimizer.

Small, deterministic two-phase tableau simplex. Bland's smallest-index rule
is used for every pivot choice, which rules out cycling and makes the solve
reproducible bit-for-bit across runs and platforms. The instances produced
by the model builder are a few hundred rows, so a dense tableau is both fast
enough and much easier to audit than a revised/sparse implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7

LE, EQ, GE = -1, 0, 1

_REL_SYMBOL = {LE: "<=", EQ: "==", GE: ">="}


class LpError(ValueError):
    """Malformed linear program (dimension mismatch, bad bounds...)."""


@dataclass
class LpProblem:
    """minimize c @ x  subject to  A x (<=,==,>=) b  and  lb <= x <= ub."""

    c: np.ndarray
    a: np.ndarray
    rel: np.ndarray  # one of LE/EQ/GE per row
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.a = np.atleast_2d(np.asarray(self.a, dtype=float))
        self.rel = np.asarray(self.rel, dtype=int)
        self.b = np.asarray(self.b, dtype=float)
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)
        n = self.c.size
        m = self.b.size
        if m == 0:
            self.a = self.a.reshape(0, n)
        if self.a.shape != (m, n):
            raise LpError(f"constraint matrix is {self.a.shape}, expected {(m, n)}")
        if self.rel.shape != (m,):
            raise LpError("relation vector length does not match rhs")
        if self.lb.shape != (n,) or self.ub.shape != (n,):
            raise LpError("bound vectors do not match variable count")
        if not np.all(np.isfinite(self.lb)):
            raise LpError("lower bounds must be finite")

    @property
    def num_vars(self) -> int:
        return self.c.size


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded
    x: np.ndarray | None = None
    objective: float | None = None


def solve_lp(lp: LpProblem, max_pivots: int = 200_000) -> LpResult:
    """Solve an LpProblem to optimality.

    Fixed variables (lb == ub) are substituted out first; every other pivot
    decision follows Bland's rule, so identical inputs give identical output.
    """
    n = lp.num_vars
    if np.any(lp.ub - lp.lb < -FEAS_TOL):
        return LpResult("infeasible")

    fixed = np.abs(lp.ub - lp.lb) <= 0.0
    free = ~fixed
    x_fixed = np.where(fixed, lp.lb, 0.0)

    a = lp.a[:, free] if lp.a.size else lp.a.reshape(lp.b.size, 0)
    b = lp.b - (lp.a[:, fixed] @ x_fixed[fixed] if lp.a.size else 0.0)
    c = lp.c[free]
    const = float(lp.c[fixed] @ x_fixed[fixed])
    lb = lp.lb[free]
    ub = lp.ub[free]
    nf = int(free.sum())

    if nf == 0:
        resid = b
        ok = np.ones(resid.size, dtype=bool)
        ok &= ~((lp.rel == LE) & (resid < -FEAS_TOL))
        ok &= ~((lp.rel == GE) & (resid > FEAS_TOL))
        ok &= ~((lp.rel == EQ) & (np.abs(resid) > FEAS_TOL))
        if not ok.all():
            return LpResult("infeasible")
        return LpResult("optimal", x_fixed.copy(), const)

    # shift x = lb + y so every variable has lower bound 0
    b = b - a @ lb
    const += float(c @ lb)

    rows = [a]
    rels = [lp.rel.copy()]
    rhs = [b]
    has_ub = np.isfinite(ub)
    if has_ub.any():
        ub_rows = np.zeros((int(has_ub.sum()), nf))
        for r, j in enumerate(np.flatnonzero(has_ub)):
            ub_rows[r, j] = 1.0
        rows.append(ub_rows)
        rels.append(np.full(ub_rows.shape[0], LE))
        rhs.append(ub[has_ub] - lb[has_ub])
    a_all = np.vstack(rows)
    rel_all = np.concatenate(rels)
    b_all = np.concatenate(rhs)

    status, y, obj = _two_phase_simplex(c, a_all, rel_all, b_all, max_pivots)
    if status != "optimal":
        return LpResult(status)

    x = x_fixed.copy()
    x[free] = y + lb
    return LpResult("optimal", x, obj + const)


def _two_phase_simplex(c, a, rel, b, max_pivots):
    """Textbook two-phase simplex on min c y, A y rel b, y >= 0."""
    m, n = a.shape

    # equilibrate rows: big-M coefficients otherwise dominate the tableau
    # and amplify roundoff in long degenerate runs
    if m:
        scale = np.abs(a).max(axis=1)
        scale[scale == 0.0] = 1.0
        a = a / scale[:, None]
        b = b / scale

    neg = b < 0
    a = np.where(neg[:, None], -a, a)
    b = np.where(neg, -b, b)
    rel = np.where(neg, -rel, rel)

    n_slack = int(np.sum(rel != EQ))
    n_art = int(np.sum(rel != LE))
    width = n + n_slack + n_art + 1
    t = np.zeros((m, width))
    t[:, :n] = a
    t[:, -1] = b

    basis = np.empty(m, dtype=int)
    s = n
    g = n + n_slack
    art_start = n + n_slack
    for i in range(m):
        if rel[i] == LE:
            t[i, s] = 1.0
            basis[i] = s
            s += 1
        elif rel[i] == GE:
            t[i, s] = -1.0
            s += 1
            t[i, g] = 1.0
            basis[i] = g
            g += 1
        else:
            t[i, g] = 1.0
            basis[i] = g
            g += 1

    if n_art:
        cost1 = np.zeros(width - 1)
        cost1[art_start:] = 1.0
        status = _run_simplex(t, basis, cost1, max_pivots)
        if status != "optimal":  # phase 1 is always bounded below by 0
            return "infeasible", None, None
        phase1 = float(cost1[basis] @ t[:, -1])
        if phase1 > FEAS_TOL:
            return "infeasible", None, None
        t, basis = _drop_artificials(t, basis, art_start)

    cost2 = np.zeros(t.shape[1] - 1)
    cost2[:n] = c
    status = _run_simplex(t, basis, cost2, max_pivots)
    if status != "optimal":
        return status, None, None

    y = np.zeros(n)
    in_range = basis < n
    y[basis[in_range]] = t[in_range, -1]
    return "optimal", y, float(c @ y)


DEGEN_STREAK = 40  # degenerate pivots tolerated before Bland's rule engages


def _run_simplex(t, basis, cost, max_pivots):
    """One simplex phase.

    Entering column is Dantzig's most-negative reduced cost (ties: lowest
    index) until a degenerate streak suggests stalling, then Bland's
    smallest-index rule takes over until the objective strictly improves
    again. Bland episodes cannot cycle and every exit from one lowers the
    objective, so the phase terminates; every choice is index-based, so it
    is also deterministic.
    """
    m = t.shape[0]
    red = cost - cost[basis] @ t[:, :-1]
    obj = float(cost[basis] @ t[:, -1])
    stalled = 0
    bland = False
    since_refresh = 0
    for _ in range(max_pivots):
        entering = _pick_entering(red, bland)
        if entering < 0:
            # optimality must be certified on exact reduced costs; the
            # incrementally updated row drifts over long degenerate runs
            red = cost - cost[basis] @ t[:, :-1]
            since_refresh = 0
            entering = _pick_entering(red, bland)
            if entering < 0:
                return "optimal"

        leave = _pick_leaving(t, basis, entering, bland)
        if leave == -1:
            return "unbounded"

        _pivot(t, leave, entering)
        basis[leave] = entering
        np.clip(t[:, -1], 0.0, None, out=t[:, -1])
        since_refresh += 1
        if since_refresh >= 64:
            red = cost - cost[basis] @ t[:, :-1]
            since_refresh = 0
        else:
            red = red - red[entering] * t[leave, :-1]
        new_obj = float(cost[basis] @ t[:, -1])
        if new_obj < obj - 1e-12 * max(1.0, abs(obj)):
            stalled = 0
            bland = False
        else:
            stalled += 1
            if stalled >= DEGEN_STREAK:
                bland = True
        obj = new_obj
    raise LpError("pivot limit exceeded; simplex did not converge")


ELEM_TOL = 1e-7  # smallest tableau element accepted as a pivot


def _pick_leaving(t, basis, entering, bland):
    """Clamped ratio test.

    Among rows within tolerance of the minimum ratio, prefer the largest
    pivot element (keeps the tableau well conditioned); under Bland's rule
    prefer the smallest basic-variable index instead. Returns -1 when the
    column has no positive entry (unbounded direction).
    """
    col = t[:, entering]
    ok = col > ELEM_TOL
    if not ok.any():
        return -1
    with np.errstate(divide="ignore"):
        ratios = np.where(ok, np.maximum(t[:, -1], 0.0) / np.where(ok, col, 1.0), np.inf)
    best = ratios.min()
    cand = np.flatnonzero(ok & (ratios <= best + PIVOT_TOL))
    if bland:
        return int(cand[np.argmin(basis[cand])])
    big = cand[col[cand] == col[cand].max()]
    return int(big[np.argmin(basis[big])])


def _pick_entering(red, bland):
    if bland:
        for j in range(red.size):
            if red[j] < -PIVOT_TOL:
                return j
        return -1
    j = int(np.argmin(red))
    return j if red[j] < -PIVOT_TOL else -1


def _pivot(t, row, col):
    t[row] /= t[row, col]
    factors = t[:, col].copy()
    factors[row] = 0.0
    t -= np.outer(factors, t[row])
    t[:, col] = 0.0
    t[row, col] = 1.0


def _drop_artificials(t, basis, art_start):
    """Pivot leftover artificial variables out of the basis, drop their columns."""
    keep_rows = np.ones(t.shape[0], dtype=bool)
    for i in range(t.shape[0]):
        if basis[i] < art_start:
            continue
        piv = -1
        for j in range(art_start):
            if abs(t[i, j]) > PIVOT_TOL:
                piv = j
                break
        if piv < 0:
            keep_rows[i] = False  # redundant constraint
        else:
            _pivot(t, i, piv)
            basis[i] = piv
    t = np.hstack([t[keep_rows, :art_start], t[keep_rows, -1:]])
    return t, basis[keep_rows]
