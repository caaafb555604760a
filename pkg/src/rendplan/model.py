"""Rendezvous-mission MILP: decision variables, constraint rows, objectives.

The mission couples R robots through S scheduled rendezvous. Each (rendezvous,
robot) slot carries an allocation bit plus start/end times for the robot's
exploration job ending at that rendezvous; chained "latest available" values
propagate each robot's release time from one rendezvous to the next through
big-M rows. Constraint rows keep their formulation tags (a1..f4) so that
feasibility reports and tests can name exactly which rule a solution breaks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .lp import EQ, GE, LE, LpProblem

FEAS_TOL = 1e-6  # absolute tolerance on time values for all feasibility checks


class InvalidParamsError(ValueError):
    """Mission parameters violate a structural invariant."""


@dataclass(frozen=True)
class MissionParams:
    """Everything the model builder needs, with the paper-free defaults filled in.

    max_robots defaults to R-1 (the hard cap the allocation rows impose anyway)
    and big_m to twice the mission budget, which deactivates every relaxed row
    with slack because all time values are bounded by the budget.
    """

    num_robots: int
    num_rendezvous: int
    m_assign: float
    min_proc: float
    min_robots: int = 2
    max_robots: int = -1  # -1 -> num_robots - 1
    alpha: float = 1.0
    beta: float = 1.0
    big_m: float = -1.0  # -1 -> 2 * m_assign

    def __post_init__(self):
        if self.max_robots == -1:
            # R-1 is the cap the allocation rows enforce anyway; keeping the
            # default >= min_robots lets structurally impossible missions
            # (min_robots > R-1) surface as model infeasibility, which is
            # where the allocation-bound contradiction belongs
            object.__setattr__(
                self, "max_robots", max(self.num_robots - 1, self.min_robots)
            )
        if self.big_m == -1.0:
            object.__setattr__(self, "big_m", 2.0 * self.m_assign)
        if self.num_robots < 2:
            raise InvalidParamsError("num_robots must be >= 2")
        if self.num_rendezvous < 1:
            raise InvalidParamsError("num_rendezvous must be >= 1")
        if self.min_robots < 2:
            raise InvalidParamsError("min_robots must be >= 2")
        if self.max_robots < self.min_robots:
            raise InvalidParamsError("max_robots must be >= min_robots")
        if not self.min_proc > 0:
            raise InvalidParamsError("min_proc must be > 0")
        if self.min_proc > self.m_assign:
            raise InvalidParamsError("min_proc must be <= m_assign")
        if self.alpha < 0 or self.beta < 0:
            raise InvalidParamsError("objective weights must be >= 0")
        if self.big_m < 2.0 * self.m_assign:
            raise InvalidParamsError("big_m must be >= 2 * m_assign")

    @classmethod
    def from_json(cls, obj: dict) -> "MissionParams":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(obj) - known
        if extra:
            raise InvalidParamsError(f"unknown mission parameter(s): {sorted(extra)}")
        return cls(**obj)

    def to_json(self) -> dict:
        return {
            "num_robots": self.num_robots,
            "num_rendezvous": self.num_rendezvous,
            "m_assign": self.m_assign,
            "min_proc": self.min_proc,
            "min_robots": self.min_robots,
            "max_robots": self.max_robots,
            "alpha": self.alpha,
            "beta": self.beta,
            "big_m": self.big_m,
        }


@dataclass
class Variable:
    name: str
    kind: str  # continuous | binary
    lb: float
    ub: float


@dataclass
class Row:
    tag: str  # formulation tag: a1, b3, e1, w+, dev-, ...
    i: int | None  # 1-based rendezvous index, when applicable
    j: int | None  # 1-based robot index, when applicable
    coeffs: dict[int, float]
    rel: int  # lp.LE / lp.EQ / lp.GE
    rhs: float


@dataclass
class Violation:
    tag: str
    i: int | None = None
    j: int | None = None
    amount: float = 0.0

    def __str__(self):
        where = ", ".join(
            f"{k}={v}" for k, v in (("i", self.i), ("j", self.j)) if v is not None
        )
        return f"{self.tag}({where}) off by {self.amount:.3g}"


class MilpModel:
    """Variables, tagged linear rows and objective for one mission instance."""

    def __init__(self, params: MissionParams):
        self.params = params
        self.variables: list[Variable] = []
        self.rows: list[Row] = []
        s, r = params.num_rendezvous, params.num_robots
        self._sr = s * r
        self.objective = np.zeros(0)

    # variable layout: alloc, start, end, latest blocks (row-major S x R),
    # then highest (S), then work_dev, mean_proc, proc_dev block.
    def alloc_idx(self, i, j):
        return i * self.params.num_robots + j

    def start_idx(self, i, j):
        return self._sr + i * self.params.num_robots + j

    def end_idx(self, i, j):
        return 2 * self._sr + i * self.params.num_robots + j

    def latest_idx(self, i, j):
        return 3 * self._sr + i * self.params.num_robots + j

    def highest_idx(self, i):
        return 4 * self._sr + i

    @property
    def work_dev_idx(self):
        return 4 * self._sr + self.params.num_rendezvous

    @property
    def mean_proc_idx(self):
        return self.work_dev_idx + 1

    def proc_dev_idx(self, i, j):
        return self.mean_proc_idx + 1 + i * self.params.num_robots + j

    @property
    def num_core_vars(self):
        return 4 * self._sr + self.params.num_rendezvous

    @property
    def num_vars(self):
        return len(self.variables)

    def binary_indices(self):
        return [v for v in range(self.num_vars) if self.variables[v].kind == "binary"]

    def to_lp(self) -> LpProblem:
        n = self.num_vars
        m = len(self.rows)
        a = np.zeros((m, n))
        rel = np.zeros(m, dtype=int)
        b = np.zeros(m)
        for r, row in enumerate(self.rows):
            for idx, coeff in row.coeffs.items():
                a[r, idx] = coeff
            rel[r] = row.rel
            b[r] = row.rhs
        lb = np.array([v.lb for v in self.variables])
        ub = np.array([v.ub for v in self.variables])
        return LpProblem(c=self.objective.copy(), a=a, rel=rel, b=b, lb=lb, ub=ub)


@dataclass
class MilpSolution:
    """Allocation bits plus the time matrices a solve produces."""

    alloc: np.ndarray  # (S, R) 0/1
    start: np.ndarray  # (S, R) seconds
    end: np.ndarray  # (S, R) seconds
    latest: np.ndarray  # (S, R) seconds
    highest: np.ndarray  # (S,) seconds
    objective: float

    def __post_init__(self):
        self.alloc = np.asarray(self.alloc, dtype=int)
        self.start = np.asarray(self.start, dtype=float)
        self.end = np.asarray(self.end, dtype=float)
        self.latest = np.asarray(self.latest, dtype=float)
        self.highest = np.asarray(self.highest, dtype=float)
        s, r = self.alloc.shape
        for name in ("start", "end", "latest"):
            if getattr(self, name).shape != (s, r):
                raise ValueError(f"{name} matrix shape mismatch")
        if self.highest.shape != (s,):
            raise ValueError("highest array shape mismatch")

    def to_json(self) -> dict:
        return {
            "alloc": self.alloc.tolist(),
            "start": self.start.tolist(),
            "end": self.end.tolist(),
            "latest": self.latest.tolist(),
            "highest": self.highest.tolist(),
            "objective": self.objective,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MilpSolution":
        return cls(
            alloc=np.array(obj["alloc"]),
            start=np.array(obj["start"]),
            end=np.array(obj["end"]),
            latest=np.array(obj["latest"]),
            highest=np.array(obj["highest"]),
            objective=float(obj["objective"]),
        )


def build_model(params: MissionParams) -> MilpModel:
    """Assemble the full mission MILP for the given parameters.

    Core variables are the allocation bits and the start/end/latest/highest
    time values; auxiliaries linearize the two objective terms (absolute
    budget error, and mean absolute deviation of job lengths around their
    mean). Every row keeps its formulation tag.
    """
    model = MilpModel(params)
    s, r = params.num_rendezvous, params.num_robots
    m_big = params.big_m
    budget = params.m_assign
    sr = s * r

    for i in range(s):
        for j in range(r):
            model.variables.append(Variable(f"alloc[{i+1},{j+1}]", "binary", 0.0, 1.0))
    for i in range(s):
        for j in range(r):
            ub = 0.0 if i == 0 else budget  # first-row jobs start at t=0
            model.variables.append(Variable(f"start[{i+1},{j+1}]", "continuous", 0.0, ub))
    for i in range(s):
        for j in range(r):
            model.variables.append(Variable(f"end[{i+1},{j+1}]", "continuous", 0.0, budget))
    for i in range(s):
        for j in range(r):
            ub = 0.0 if i == 0 else m_big
            model.variables.append(Variable(f"latest[{i+1},{j+1}]", "continuous", 0.0, ub))
    for i in range(s):
        model.variables.append(Variable(f"highest[{i+1}]", "continuous", 0.0, m_big))
    model.variables.append(Variable("work_dev", "continuous", 0.0, sr * budget))
    model.variables.append(Variable("mean_proc", "continuous", 0.0, budget))
    for i in range(s):
        for j in range(r):
            model.variables.append(Variable(f"proc_dev[{i+1},{j+1}]", "continuous", 0.0, budget))

    rows = model.rows
    for i in range(s):
        for j in range(r):
            # (a1) group's highest ending bounds every allocated ending
            rows.append(Row("a1", i + 1, j + 1,
                            {model.highest_idx(i): 1.0,
                             model.end_idx(i, j): -1.0,
                             model.alloc_idx(i, j): -m_big},
                            GE, -m_big))
    for i in range(1, s):
        for j in range(r):
            li, lp_ = model.latest_idx(i, j), model.latest_idx(i - 1, j)
            kp = model.alloc_idx(i - 1, j)
            hp = model.highest_idx(i - 1)
            # (b1)/(b2) carry the previous latest value when the robot sat out
            rows.append(Row("b1", i + 1, j + 1, {li: 1.0, lp_: -1.0, kp: m_big}, GE, 0.0))
            rows.append(Row("b2", i + 1, j + 1, {li: 1.0, lp_: -1.0, kp: -m_big}, LE, 0.0))
            # (b3)/(b4) pick up the group ending when it participated
            rows.append(Row("b3", i + 1, j + 1, {li: 1.0, hp: -1.0, kp: -m_big}, GE, -m_big))
            rows.append(Row("b4", i + 1, j + 1, {li: 1.0, hp: -1.0, kp: m_big}, LE, m_big))
            # (b5) allocated jobs cannot start before the robot is available
            rows.append(Row("b5", i + 1, j + 1,
                            {model.start_idx(i, j): 1.0,
                             li: -1.0,
                             model.alloc_idx(i, j): -m_big},
                            GE, -m_big))
    for i in range(s):
        for j in range(r):
            si, ei, ki = model.start_idx(i, j), model.end_idx(i, j), model.alloc_idx(i, j)
            rows.append(Row("d1", i + 1, j + 1, {si: 1.0, ki: -m_big}, LE, 0.0))
            rows.append(Row("d2", i + 1, j + 1, {ei: 1.0, ki: -m_big}, LE, 0.0))
            rows.append(Row("c1", i + 1, j + 1, {ei: 1.0, si: -1.0}, GE, 0.0))
            rows.append(Row("c2", i + 1, j + 1, {ei: 1.0}, LE, budget))
            rows.append(Row("c3", i + 1, j + 1, {ei: 1.0, si: -1.0, ki: -m_big}, LE, 0.0))
            rows.append(Row("c4", i + 1, j + 1,
                            {ei: 1.0, si: -1.0, ki: -params.min_proc}, GE, 0.0))
    for j in range(r):
        rows.append(Row("e1", None, j + 1,
                        {model.alloc_idx(i, j): 1.0 for i in range(s)}, GE, 1.0))
    for i in range(s):
        krow = {model.alloc_idx(i, j): 1.0 for j in range(r)}
        rows.append(Row("e2", i + 1, None, dict(krow), GE, float(params.min_robots)))
        rows.append(Row("e3", i + 1, None, dict(krow), LE, float(params.max_robots)))
        rows.append(Row("e4", i + 1, None, dict(krow), LE, float(r - 1)))
    for j in range(r):
        rows.append(Row("f3", 1, j + 1, {model.start_idx(0, j): 1.0}, EQ, 0.0))
        rows.append(Row("f3", 1, j + 1, {model.latest_idx(0, j): 1.0}, EQ, 0.0))

    # |total work - budget| via one auxiliary bounded from both sides
    proc = {}
    for i in range(s):
        for j in range(r):
            proc[model.end_idx(i, j)] = 1.0
            proc[model.start_idx(i, j)] = -1.0
    w = model.work_dev_idx
    rows.append(Row("w+", None, None, {**proc, w: 1.0}, GE, budget))
    rows.append(Row("w-", None, None, {k: -v for k, v in proc.items()} | {w: 1.0}, GE, -budget))
    # mean job length stays a variable tied to total work, keeping the
    # deviation rows linear
    tau = model.mean_proc_idx
    rows.append(Row("mean", None, None, {**proc, tau: -float(sr)}, EQ, 0.0))
    for i in range(s):
        for j in range(r):
            d = model.proc_dev_idx(i, j)
            ei, si = model.end_idx(i, j), model.start_idx(i, j)
            rows.append(Row("dev+", i + 1, j + 1,
                            {d: 1.0, ei: -1.0, si: 1.0, tau: 1.0}, GE, 0.0))
            rows.append(Row("dev-", i + 1, j + 1,
                            {d: 1.0, ei: 1.0, si: -1.0, tau: -1.0}, GE, 0.0))

    obj = np.zeros(model.num_vars)
    obj[w] = params.alpha
    for i in range(s):
        for j in range(r):
            obj[model.proc_dev_idx(i, j)] = params.beta / sr
    model.objective = obj
    return model


def compute_highest_endings(end: np.ndarray, alloc: np.ndarray) -> np.ndarray:
    """Per-rendezvous max ending over allocated jobs; 0 for empty rows."""
    end = np.asarray(end, dtype=float)
    alloc = np.asarray(alloc)
    if end.shape != alloc.shape or end.ndim != 2:
        raise ValueError("end/alloc dimension mismatch")
    masked = np.where(alloc != 0, end, -np.inf)
    h = masked.max(axis=1)
    return np.where(np.isfinite(h), h, 0.0)


def compute_latest_available(end: np.ndarray, alloc: np.ndarray) -> np.ndarray:
    """Release time per slot: the group ending of the robot's previous rendezvous.

    Row 1 is all zeros; a robot that never appeared before row i keeps 0.
    """
    end = np.asarray(end, dtype=float)
    alloc = np.asarray(alloc)
    if end.shape != alloc.shape or end.ndim != 2:
        raise ValueError("end/alloc dimension mismatch")
    s, r = end.shape
    h = compute_highest_endings(end, alloc)
    latest = np.zeros((s, r))
    for j in range(r):
        carry = 0.0
        for i in range(1, s):
            if alloc[i - 1, j]:
                carry = h[i - 1]
            latest[i, j] = carry
    return latest


def objective_value(sol: MilpSolution, params: MissionParams) -> tuple[float, float, float]:
    """(budget error, mean absolute job-length deviation, weighted total)."""
    _check_solution_shape(sol, params)
    proc = sol.end - sol.start
    if np.any(proc < -FEAS_TOL) or np.any(sol.start < -FEAS_TOL):
        raise ValueError("solution violates nonnegative job intervals")
    sr = params.num_rendezvous * params.num_robots
    total = float(proc.sum())
    w_err = abs(total - params.m_assign)
    tau = total / sr
    j_err = float(np.abs(proc - tau).sum()) / sr
    return w_err, j_err, params.alpha * w_err + params.beta * j_err


def check_feasibility(sol: MilpSolution, params: MissionParams) -> list[Violation]:
    """Evaluate every model row plus the exact highest/latest semantics.

    Returns one Violation per broken rule (never raises); an optimal solve
    post-processed to exact semantics must come back with an empty list.
    """
    _check_solution_shape(sol, params)
    model = build_model(params)
    s, r = params.num_rendezvous, params.num_robots
    sr = s * r
    x = np.zeros(model.num_vars)
    for i in range(s):
        for j in range(r):
            x[model.alloc_idx(i, j)] = sol.alloc[i, j]
            x[model.start_idx(i, j)] = sol.start[i, j]
            x[model.end_idx(i, j)] = sol.end[i, j]
            x[model.latest_idx(i, j)] = sol.latest[i, j]
        x[model.highest_idx(i)] = sol.highest[i]
    proc = sol.end - sol.start
    total = float(proc.sum())
    tau = total / sr
    x[model.work_dev_idx] = abs(total - params.m_assign)
    x[model.mean_proc_idx] = tau
    for i in range(s):
        for j in range(r):
            x[model.proc_dev_idx(i, j)] = abs(proc[i, j] - tau)

    out: list[Violation] = []
    for row in model.rows:
        lhs = sum(x[idx] * coeff for idx, coeff in row.coeffs.items())
        gap = lhs - row.rhs
        bad = (
            (row.rel == LE and gap > FEAS_TOL)
            or (row.rel == GE and gap < -FEAS_TOL)
            or (row.rel == EQ and abs(gap) > FEAS_TOL)
        )
        if bad:
            out.append(Violation(row.tag, row.i, row.j, abs(gap)))

    for i in range(s):
        if sol.highest[i] < -FEAS_TOL:
            out.append(Violation("f1", i + 1, None, -float(sol.highest[i])))
        for j in range(r):
            k = sol.alloc[i, j]
            if k not in (0, 1):
                out.append(Violation("f4", i + 1, j + 1, abs(k - round(k))))
            if sol.latest[i, j] < -FEAS_TOL:
                out.append(Violation("f1", i + 1, j + 1, -float(sol.latest[i, j])))
            if sol.start[i, j] < -FEAS_TOL or sol.end[i, j] < -FEAS_TOL:
                out.append(
                    Violation("f2", i + 1, j + 1,
                              -float(min(sol.start[i, j], sol.end[i, j])))
                )

    h_exact = compute_highest_endings(sol.end, sol.alloc)
    for i in range(s):
        gap = abs(sol.highest[i] - h_exact[i])
        if gap > FEAS_TOL:
            out.append(Violation("h-exact", i + 1, None, gap))
    l_exact = compute_latest_available(sol.end, sol.alloc)
    for i in range(s):
        for j in range(r):
            gap = abs(sol.latest[i, j] - l_exact[i, j])
            if gap > FEAS_TOL:
                out.append(Violation("l-exact", i + 1, j + 1, gap))
    return out


def _check_solution_shape(sol: MilpSolution, params: MissionParams):
    if sol.alloc.shape != (params.num_rendezvous, params.num_robots):
        raise ValueError(
            f"solution is {sol.alloc.shape}, mission wants "
            f"{(params.num_rendezvous, params.num_robots)}"
        )


def load_params(path: str) -> MissionParams:
    with open(path) as fh:
        return MissionParams.from_json(json.load(fh))
