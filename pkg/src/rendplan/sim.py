"""Lockstep mission driver.

All robots read the committed state of tick t (poses, modes, cursors, map
snapshots for anyone in communication range) and produce their tick t+1
state, so stepping order cannot matter. Each run is fully determined by
(world, plan, config, seed): the seed only perturbs the starting cells
around their nominal spawn markers, standing in for the start-pose variation
between repeated physical runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .plan import RendezvousPlan
from .policy import (
    DONE,
    PolicyConfig,
    RobotState,
    TeamView,
    step_robot,
)
from .world import GridWorld, blank_known

SPAWN_JITTER = 3  # Chebyshev radius of seed-dependent start-cell perturbation


class SimSetupError(ValueError):
    """World/plan/config combination cannot be simulated."""


def perturbed_spawns(world: GridWorld, num_robots: int, seed: int) -> dict[int, tuple[int, int]]:
    """Seed-dependent start cells near the nominal spawn markers."""
    if len(world.spawns) < num_robots:
        raise SimSetupError(
            f"map provides {len(world.spawns)} spawns, mission needs {num_robots}"
        )
    rng = np.random.default_rng(seed)
    taken: set[tuple[int, int]] = set()
    out: dict[int, tuple[int, int]] = {}
    for rid in range(1, num_robots + 1):
        r0, c0 = world.spawns[rid]
        cands = []
        for r in range(max(1, r0 - SPAWN_JITTER), min(world.height - 1, r0 + SPAWN_JITTER + 1)):
            for c in range(max(1, c0 - SPAWN_JITTER), min(world.width - 1, c0 + SPAWN_JITTER + 1)):
                if not world.occ[r, c] and (r, c) not in taken:
                    cands.append((r, c))
        if not cands:
            raise SimSetupError(f"no free start cell near spawn {rid}")
        pick = cands[int(rng.integers(len(cands)))]
        taken.add(pick)
        out[rid] = pick
    return out


def run_mission(world: GridWorld, plan: RendezvousPlan, cfg: PolicyConfig,
                seed: int, overtime_cap: float = 600.0) -> list[dict]:
    """Run one mission to completion; returns the trace records."""
    num_robots = plan.num_robots
    spawns = perturbed_spawns(world, num_robots, seed)
    ids = sorted(spawns)
    states = {
        rid: RobotState(
            id=rid,
            pose=spawns[rid],
            spawn=spawns[rid],
            spawn_of=spawns,
            known=blank_known(world),
            events=plan.events_of(rid),
            speed=cfg.speed_mps,
        )
        for rid in ids
    }

    records: list[dict] = [
        {
            "type": "header",
            "seed": seed,
            "variant": cfg.variant,
            "num_robots": num_robots,
            "m_assign": plan.m_assign,
            "cell_size": world.cell_size,
            "map_shape": [world.height, world.width],
            "dt": cfg.dt,
            "comm_range_m": cfg.comm_range_m,
            "sensor_range_m": cfg.sensor_range_m,
            "speed_mps": cfg.speed_mps,
            "spawns": {str(r): list(spawns[r]) for r in ids},
            "events": [
                {"id": ev.id, "participants": list(ev.participants),
                 "deadline": ev.deadline}
                for ev in plan.events
            ],
        }
    ]

    resolved: set[int] = set()
    max_ticks = int((plan.m_assign + overtime_cap) / cfg.dt) + 2
    t = 0
    while t < max_ticks:
        clock = t * cfg.dt
        for s in states.values():
            s.clock = clock

        in_range = _contacts(states, world.cell_size, cfg.comm_range_m)
        involved = [rid for rid in ids if in_range[rid]]
        view = TeamView(
            poses={rid: states[rid].pose for rid in ids},
            modes={rid: states[rid].mode for rid in ids},
            event_ids={
                rid: (states[rid].current_event.id
                      if states[rid].current_event else None)
                for rid in ids
            },
            maps={rid: states[rid].known.copy() for rid in involved},
            in_range=in_range,
        )

        arrivals_before = {rid: set(states[rid].arrivals) for rid in ids}
        wait_ends_before = {rid: set(states[rid].wait_ends) for rid in ids}
        comm = []
        for rid in ids:
            comm.extend(step_robot(states[rid], view, plan, world, cfg))

        seen = set()
        for ev in sorted(comm, key=lambda e: (e.kind, e.participants, e.event_id or 0)):
            key = (ev.kind, ev.participants, ev.event_id)
            if key in seen:
                continue
            seen.add(key)
            records.append(
                {"type": "comm", "t": t, "clock": clock, "kind": ev.kind,
                 "participants": list(ev.participants), "event": ev.event_id}
            )
            if ev.kind == "scheduled" and ev.event_id not in resolved:
                resolved.add(ev.event_id)
                records.append(
                    {"type": "resolution", "t": t, "clock": clock,
                     "event": ev.event_id, "participants": list(ev.participants)}
                )

        for rid in ids:
            for evid in sorted(set(states[rid].arrivals) - arrivals_before[rid]):
                records.append(
                    {"type": "arrival", "t": t, "clock": states[rid].arrivals[evid],
                     "event": evid, "robot": rid}
                )
            for evid in sorted(set(states[rid].wait_ends) - wait_ends_before[rid]):
                records.append(
                    {"type": "wait_end", "t": t,
                     "clock": states[rid].wait_ends[evid],
                     "event": evid, "robot": rid}
                )

        records.append(
            {
                "type": "tick",
                "t": t,
                "clock": clock,
                "robots": [
                    {
                        "id": rid,
                        "pose": list(states[rid].pose),
                        "mode": states[rid].mode,
                        "cursor": states[rid].cursor,
                        "h": _finite_or_none(states[rid].last_heuristic),
                        "free": states[rid].known.free_count(),
                    }
                    for rid in ids
                ],
            }
        )

        t += 1
        if all(s.mode == DONE for s in states.values()) and all(
            s.pose == s.spawn for s in states.values()
        ):
            break

    records.append(
        {
            "type": "end",
            "t": t,
            "clock": t * cfg.dt,
            "resolved": sorted(resolved),
            "unresolved": sorted(
                {ev.id for ev in plan.events} - resolved
            ),
        }
    )
    return records


def _contacts(states, cell_size, comm_range_m):
    ids = sorted(states)
    out = {rid: [] for rid in ids}
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            (r0, c0), (r1, c1) = states[a].pose, states[b].pose
            if math.hypot(r1 - r0, c1 - c0) * cell_size <= comm_range_m:
                out[a].append(b)
                out[b].append(a)
    return {rid: tuple(v) for rid, v in out.items()}


def _finite_or_none(h):
    if h is None or not math.isfinite(h):
        return None
    return h
