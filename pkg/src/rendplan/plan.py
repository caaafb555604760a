"""Executable rendezvous plans extracted from solver output.

A plan is the contract between the optimizer and the simulator: an ordered
list of events, each coupling a sub-team to a shared arrival deadline. Event
ids are the 1-based rendezvous rows of the allocation matrix so a plan entry
can always be traced back to its MILP slot. Rendezvous locations are *not*
part of the plan; robots assign and update them at runtime.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .model import FEAS_TOL, MilpSolution, MissionParams, check_feasibility


class InfeasibleSolutionError(ValueError):
    """Plan extraction was handed a solution with feasibility violations."""


@dataclass
class PlanEvent:
    id: int  # 1-based rendezvous row
    participants: list[int]  # 1-based robot ids, ascending
    deadline: float  # latest job ending of the group, seconds
    starts: dict[int, float]  # job start per participant, seconds


@dataclass
class RendezvousPlan:
    m_assign: float
    num_robots: int
    events: list[PlanEvent]

    def events_of(self, robot_id: int) -> list[PlanEvent]:
        return [ev for ev in self.events if robot_id in ev.participants]

    def to_json(self) -> dict:
        return {
            "m_assign": self.m_assign,
            "num_robots": self.num_robots,
            "events": [
                {
                    "id": ev.id,
                    "participants": list(ev.participants),
                    "deadline": ev.deadline,
                    "starts": {str(r): t for r, t in sorted(ev.starts.items())},
                }
                for ev in self.events
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RendezvousPlan":
        events = [
            PlanEvent(
                id=int(e["id"]),
                participants=[int(r) for r in e["participants"]],
                deadline=float(e["deadline"]),
                starts={int(r): float(t) for r, t in e["starts"].items()},
            )
            for e in obj["events"]
        ]
        return cls(m_assign=float(obj["m_assign"]), num_robots=int(obj["num_robots"]),
                   events=events)

    def dump(self, path: str):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "RendezvousPlan":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass
class PlanViolation:
    rule: str
    event_id: int | None = None
    robot_id: int | None = None
    detail: str = ""

    def __str__(self):
        bits = [self.rule]
        if self.event_id is not None:
            bits.append(f"event {self.event_id}")
        if self.robot_id is not None:
            bits.append(f"robot {self.robot_id}")
        if self.detail:
            bits.append(self.detail)
        return ": ".join(bits)


def extract_plan(sol: MilpSolution, params: MissionParams,
                 require_feasible: bool = True) -> RendezvousPlan:
    """One event per allocated rendezvous row, ordered by deadline.

    Rows without any allocation are dropped rather than rejected, which keeps
    extraction total if the minimum-team rule is ever relaxed. Events sharing
    a deadline keep their row order.
    """
    if require_feasible:
        viols = check_feasibility(sol, params)
        if viols:
            summary = "; ".join(str(v) for v in viols[:5])
            raise InfeasibleSolutionError(
                f"solution has {len(viols)} feasibility violation(s): {summary}"
            )
    events = []
    s, r = sol.alloc.shape
    for i in range(s):
        members = [j + 1 for j in range(r) if sol.alloc[i, j]]
        if not members:
            continue
        events.append(
            PlanEvent(
                id=i + 1,
                participants=members,
                deadline=float(sol.highest[i]),
                starts={j: float(sol.start[i, j - 1]) for j in members},
            )
        )
    events.sort(key=lambda ev: (ev.deadline, ev.id))
    return RendezvousPlan(m_assign=params.m_assign, num_robots=params.num_robots,
                          events=events)


def validate_plan(plan: RendezvousPlan, params: MissionParams) -> list[PlanViolation]:
    """Check every plan invariant; empty list means the plan is executable."""
    out: list[PlanViolation] = []
    size_cap = min(params.max_robots, params.num_robots - 1)

    prev_deadline = -float("inf")
    for ev in plan.events:
        if ev.deadline < prev_deadline - FEAS_TOL:
            out.append(PlanViolation("order", ev.id,
                                     detail="deadlines not ascending"))
        prev_deadline = max(prev_deadline, ev.deadline)
        if ev.deadline > plan.m_assign + FEAS_TOL:
            out.append(PlanViolation("c2-horizon", ev.id,
                                     detail=f"deadline {ev.deadline} past budget"))
        if len(ev.participants) < params.min_robots:
            out.append(PlanViolation("e2-min-team", ev.id,
                                     detail=f"{len(ev.participants)} participants"))
        if len(ev.participants) > size_cap:
            out.append(PlanViolation("e3-max-team", ev.id,
                                     detail=f"{len(ev.participants)} participants"))

    for robot in range(1, plan.num_robots + 1):
        own = plan.events_of(robot)
        if not own:
            out.append(PlanViolation("e1-coverage", robot_id=robot,
                                     detail="robot appears in no event"))
        for a, b in zip(own, own[1:]):
            if b.starts[robot] < a.deadline - FEAS_TOL:
                out.append(
                    PlanViolation("overlap", b.id, robot,
                                  f"start {b.starts[robot]} before {a.deadline}")
                )
    return out
