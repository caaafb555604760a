"""Exact solvers for the mission model.

solve_milp runs best-first branch and bound over the allocation bits with the
dense simplex as relaxation engine; brute_force enumerates every allocation
matrix on small instances and serves as the independence oracle for it. Both
post-process the winning solution to the exact highest/latest semantics so a
clean feasibility report is part of the optimality contract.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass

import numpy as np

from .lp import solve_lp
from .model import (
    MilpModel,
    MilpSolution,
    MissionParams,
    build_model,
    compute_highest_endings,
    compute_latest_available,
)

INT_TOL = 1e-6  # integrality tolerance on allocation bits
GAP_TOL = 1e-9  # bound comparisons inside the search

BRUTE_FORCE_BUDGET = 4096  # 2**(S*R) enumeration cap


class InstanceTooLargeError(ValueError):
    """Enumeration oracle asked for more than its 2**(S*R) budget."""


@dataclass
class SolveReport:
    status: str  # optimal | infeasible | node-limit
    solution: MilpSolution | None
    node_count: int
    wall_time_s: float

    @property
    def objective(self) -> float | None:
        return None if self.solution is None else self.solution.objective

    def to_json(self) -> dict:
        # wall time is the one nondeterministic field; it stays out of the
        # serialized report so identical runs write identical bytes
        return {
            "status": self.status,
            "objective": self.objective,
            "node_count": self.node_count,
            "solution": None if self.solution is None else self.solution.to_json(),
        }


def solve_milp(model: MilpModel, node_limit: int = 1_000_000) -> SolveReport:
    """Best-first branch and bound on the allocation bits, to proven optimality.

    Branches on the most fractional bit (ties: lowest index), children are
    solved eagerly and queued by their own LP bound with insertion order as
    tie-break. Deterministic by construction.
    """
    t0 = time.perf_counter()
    base = model.to_lp()
    bin_idx = np.array(model.binary_indices(), dtype=int)

    def solve_fixed(fixes: dict[int, float]):
        lp = base
        if fixes:
            lb = base.lb.copy()
            ub = base.ub.copy()
            for idx, val in fixes.items():
                lb[idx] = val
                ub[idx] = val
            lp = type(base)(c=base.c, a=base.a, rel=base.rel, b=base.b, lb=lb, ub=ub)
        return solve_lp(lp)

    nodes = 0
    res = solve_fixed({})
    nodes += 1
    if res.status != "optimal":
        return SolveReport("infeasible", None, nodes, time.perf_counter() - t0)

    incumbent_x = None
    incumbent_obj = np.inf
    heap = []
    push_order = itertools.count()
    heapq.heappush(heap, (res.objective, next(push_order), {}, res.x))
    hit_limit = False

    while heap:
        bound, _, fixes, x = heapq.heappop(heap)
        if bound >= incumbent_obj - GAP_TOL:
            break  # best-first: every remaining node is at least this bound
        frac = np.abs(x[bin_idx] - np.round(x[bin_idx]))
        worst = int(np.argmax(frac))  # ties -> lowest index via argmax
        if frac[worst] <= INT_TOL:
            incumbent_obj = bound
            incumbent_x = x
            continue
        branch_var = int(bin_idx[worst])
        if nodes + 2 > node_limit:
            hit_limit = True
            break
        for val in (0.0, 1.0):
            child = dict(fixes)
            child[branch_var] = val
            cres = solve_fixed(child)
            nodes += 1
            if cres.status != "optimal":
                continue
            if cres.objective >= incumbent_obj - GAP_TOL:
                continue
            cfrac = np.abs(cres.x[bin_idx] - np.round(cres.x[bin_idx]))
            if cfrac.max() <= INT_TOL:
                if cres.objective < incumbent_obj - GAP_TOL:
                    incumbent_obj = cres.objective
                    incumbent_x = cres.x
            else:
                heapq.heappush(heap, (cres.objective, next(push_order), child, cres.x))

    elapsed = time.perf_counter() - t0
    if incumbent_x is None:
        status = "node-limit" if hit_limit else "infeasible"
        return SolveReport(status, None, nodes, elapsed)
    status = "node-limit" if hit_limit else "optimal"
    return SolveReport(status, _extract(model, incumbent_x, incumbent_obj), nodes, elapsed)


def feasible_allocations(params: MissionParams):
    """Yield every allocation matrix passing the row/column screens, in
    ascending bit order (bit i*R+j is slot (i, j))."""
    s, r = params.num_rendezvous, params.num_robots
    cap = min(params.max_robots, r - 1)
    for code in range(1 << (s * r)):
        alloc = np.array(
            [[(code >> (i * r + j)) & 1 for j in range(r)] for i in range(s)],
            dtype=int,
        )
        sums = alloc.sum(axis=1)
        if np.any(sums < params.min_robots) or np.any(sums > cap):
            continue
        if np.any(alloc.sum(axis=0) < 1):
            continue
        yield alloc


def brute_force(params: MissionParams) -> SolveReport:
    """Enumerate every allocation matrix and solve the per-matrix LP.

    Ground-truth oracle for solve_milp on instances with S*R <= 12. Keeps the
    first matrix (ascending bit order) achieving the best objective.
    """
    t0 = time.perf_counter()
    s, r = params.num_rendezvous, params.num_robots
    if (1 << (s * r)) > BRUTE_FORCE_BUDGET:
        raise InstanceTooLargeError(
            f"2**(S*R) = 2**{s * r} exceeds the enumeration budget {BRUTE_FORCE_BUDGET}"
        )
    model = build_model(params)
    base = model.to_lp()
    best_obj = np.inf
    best_x = None
    nodes = 0
    for alloc in feasible_allocations(params):
        lb = base.lb.copy()
        ub = base.ub.copy()
        for i in range(s):
            for j in range(r):
                idx = model.alloc_idx(i, j)
                lb[idx] = ub[idx] = float(alloc[i, j])
        res = solve_lp(type(base)(c=base.c, a=base.a, rel=base.rel, b=base.b, lb=lb, ub=ub))
        nodes += 1
        if res.status == "optimal" and res.objective < best_obj - GAP_TOL:
            best_obj = res.objective
            best_x = res.x

    elapsed = time.perf_counter() - t0
    if best_x is None:
        return SolveReport("infeasible", None, nodes, elapsed)
    return SolveReport("optimal", _extract(model, best_x, best_obj), nodes, elapsed)


def _extract(model: MilpModel, x: np.ndarray, objective: float) -> MilpSolution:
    """Read matrices out of a variable vector and normalize them.

    The model only bounds the group endings from below, so a solver may hand
    back inflated highest/latest values at the same objective; they are
    replaced with the exact max/propagation semantics before anything
    downstream sees the solution.
    """
    s, r = model.params.num_rendezvous, model.params.num_robots
    alloc = np.empty((s, r), dtype=int)
    start = np.empty((s, r))
    end = np.empty((s, r))
    for i in range(s):
        for j in range(r):
            alloc[i, j] = int(round(x[model.alloc_idx(i, j)]))
            start[i, j] = max(x[model.start_idx(i, j)], 0.0)
            end[i, j] = max(x[model.end_idx(i, j)], 0.0)
    start[alloc == 0] = 0.0
    end[alloc == 0] = 0.0
    highest = compute_highest_endings(end, alloc)
    latest = compute_latest_available(end, alloc)
    return MilpSolution(
        alloc=alloc,
        start=start,
        end=end,
        latest=latest,
        highest=highest,
        objective=float(objective),
    )
