"""Per-robot decision loop: frontier exploration with rendezvous tracking.

Each robot explores frontiers on its own partial map while watching the
mission clock. Every tick it prices the trip to its next rendezvous location
(path time at the expected speed) against the time window left; the moment
that slack reaches zero it breaks off and navigates there, which is what
keeps waiting times at the meeting points near zero. The baseline variant
strips exactly that rule and leaves at the scheduled job end instead,
arriving late by roughly its travel time.

All cross-robot interaction is resolved against start-of-tick snapshots, so
stepping order never matters. Consensus quantities (shared frontier ranking,
updated rendezvous locations) are computed from snapshot-only merged maps
that every participant reconstructs identically; no message channel is
needed beyond the co-location itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .plan import PlanEvent, RendezvousPlan
from .world import (
    FREE,
    SQRT2,
    GridWorld,
    KnownMap,
    astar_path,
    detect_frontiers,
    grid_distances,
    merge_maps,
    nearest_free_cell,
    sense,
)

EXPLORING = "exploring"
HEADING = "heading_to_rendezvous"
WAITING = "waiting"
DONE = "done"

VARIANT_RTUS = "rtus"
VARIANT_BASELINE = "baseline"


@dataclass
class CommEvent:
    time: float
    participants: tuple[int, ...]
    kind: str  # opportunistic | scheduled
    event_id: int | None = None


@dataclass
class PolicyConfig:
    dt: float = 1.0
    comm_range_m: float = 10.0
    sensor_range_m: float = 16.0
    speed_mps: float = 1.0
    variant: str = VARIANT_RTUS
    m_assign: float = 1800.0


@dataclass
class RobotState:
    id: int
    pose: tuple[int, int]
    spawn: tuple[int, int]
    spawn_of: dict[int, tuple[int, int]]  # all spawns; shared pre-mission info
    known: KnownMap
    events: list[PlanEvent]  # this robot's events, deadline order
    speed: float  # expected velocity, m/s
    clock: float = 0.0
    cursor: int = 0
    mode: str = EXPLORING
    target: tuple[int, int] | None = None
    path: list[tuple[int, int]] = field(default_factory=list)
    move_budget: float = 0.0
    last_contacts: frozenset[int] = frozenset()
    # event id -> consensus-assigned meeting cell; events not in here track
    # the participants' spawn centroid on this robot's own map
    fixed_locations: dict[int, tuple[int, int]] = field(default_factory=dict)
    arrivals: dict[int, float] = field(default_factory=dict)
    wait_ends: dict[int, float] = field(default_factory=dict)
    last_heuristic: float | None = None

    @property
    def current_event(self) -> PlanEvent | None:
        return self.events[self.cursor] if self.cursor < len(self.events) else None


@dataclass
class TeamView:
    """Frozen start-of-tick state of the whole team."""

    poses: dict[int, tuple[int, int]]
    modes: dict[int, str]
    event_ids: dict[int, int | None]  # current event id per robot
    maps: dict[int, KnownMap]  # snapshots for robots involved in a contact
    in_range: dict[int, tuple[int, ...]]  # other ids within comm range


def rtus_heuristic(state: RobotState, rendezvous_loc: tuple[int, int],
                   deadline: float) -> float:
    """Slack before the robot must leave: remaining window minus travel time.

    -inf when no known-free path exists, forcing an immediate departure;
    planning through unknown space would make the estimate meaningless.
    """
    window = deadline - state.clock
    res = astar_path(state.known, state.pose, rendezvous_loc)
    if res is None:
        return -math.inf
    _, length_m = res
    return window - length_m / state.speed


def utility(frontier, state: RobotState) -> float:
    """Frontier value per travel cost; unreachable frontiers are worthless."""
    res = astar_path(state.known, state.pose, frontier.centroid)
    if res is None:
        return 0.0
    _, length_m = res
    return frontier.size / max(length_m, state.known.cell_size)


def batch_utilities(known: KnownMap, pose: tuple[int, int], frontiers) -> list[float]:
    """Utilities of every frontier from one reference pose (single flood)."""
    dist = grid_distances(known, pose)
    out = []
    for f in frontiers:
        d = dist[f.centroid]
        out.append(0.0 if math.isinf(d) else f.size / max(d, known.cell_size))
    return out


def allocate_frontier(frontiers, utilities_list, ids_in_range, my_id):
    """Rank-based self-allocation: the k-th lowest id takes the k-th best
    frontier; robots beyond the frontier count share the last one."""
    if not frontiers:
        return None
    order = _utility_order(frontiers, utilities_list)
    rank = sorted(ids_in_range).index(my_id)
    return frontiers[order[min(rank, len(frontiers) - 1)]]


def _utility_order(frontiers, utilities_list):
    return sorted(
        range(len(frontiers)),
        key=lambda i: (-utilities_list[i], tuple(frontiers[i].cells[0])),
    )


def update_rendezvous_location(consensus: KnownMap, targets: list[tuple[int, int]]):
    """Meeting cell for a sub-team's next shared event.

    Nearest known-free cell to the centroid of the members' fresh frontier
    targets, so meeting points drift toward where the team explores next;
    with no targets it falls back to the centroid of known-free space. Pure
    function of the consensus map, hence identical for every member.
    """
    if targets:
        mean_r = sum(t[0] for t in targets) / len(targets)
        mean_c = sum(t[1] for t in targets) / len(targets)
    else:
        free = np.argwhere(consensus.cells == FREE)
        if free.size == 0:
            return None
        mean_r = float(free[:, 0].mean())
        mean_c = float(free[:, 1].mean())
    return nearest_free_cell(consensus, (mean_r, mean_c))


def step_robot(state: RobotState, view: TeamView, plan: RendezvousPlan,
               world: GridWorld, cfg: PolicyConfig) -> list[CommEvent]:
    """Advance one robot by one tick against the frozen team view."""
    out: list[CommEvent] = []
    sense(world, state.known, state.pose, cfg.sensor_range_m)

    contacts = view.in_range.get(state.id, ())
    new_contacts = frozenset(contacts) - state.last_contacts
    for other in contacts:
        state.known = merge_maps(state.known, view.maps[other])
        out.append(CommEvent(state.clock, tuple(sorted((state.id, other))),
                             "opportunistic"))
    state.last_contacts = frozenset(contacts)

    if state.clock > cfg.m_assign and state.mode != DONE:
        if state.mode == WAITING:
            ev = state.current_event
            if ev is not None:
                state.wait_ends.setdefault(ev.id, state.clock)
        _go_home(state)

    ev = state.current_event
    loc = _location_of(state, ev)
    trigger_slack = None
    if ev is not None and loc is not None and state.mode != DONE:
        h = rtus_heuristic(state, loc, ev.deadline)
        state.last_heuristic = h
        # while the meeting area is still unexplored, `loc` is only the
        # known-free stand-in nearest the agreed centroid; budget the beeline
        # remainder too, or the robot leaves late by exactly that stretch
        remainder = _remainder_m(state, ev, loc)
        trigger_slack = h - remainder / state.speed
    else:
        state.last_heuristic = None

    if ev is not None and state.mode != DONE and _resolution_ready(state, ev, view, cfg):
        out.append(CommEvent(state.clock, tuple(ev.participants), "scheduled", ev.id))
        _resolve_rendezvous(state, ev, view, plan)
        return out

    if state.mode == WAITING:
        if loc is not None and state.pose != loc:
            # tracked location drifted as the map grew; walk the correction
            state.mode = HEADING
        else:
            return out

    if state.mode == EXPLORING:
        # a robot with no rendezvous left keeps exploring until the budget
        # runs out or the map offers nothing more
        if ev is not None and _should_head(state, cfg, trigger_slack):
            state.mode = HEADING
            state.target = None
            state.path = []
        elif new_contacts or state.target is None:
            # on fresh contact the whole group stops and re-ranks; alone this
            # runs after every frontier stop
            _pick_frontier(state, view, contacts)
            if new_contacts:
                state.move_budget = 0.0

    if state.mode == HEADING:
        goal = loc
        if state.pose == loc and _remainder_m(state, ev, loc) > state.known.cell_size:
            # standing on the best known cell but the agreed point is still
            # buried in unknown terrain: probe toward the centroid itself
            goal = _centroid_cell(state, ev)
        _replan_towards(state, goal)
        if state.pose == loc and not state.path:
            # either the estimate localizes the meeting point, or there is
            # nothing left to explore toward it; settle and wait
            _arrive(state, ev)
        else:
            _move(state, cfg.dt)
            if state.pose == loc and _remainder_m(state, ev, loc) <= state.known.cell_size:
                _arrive(state, ev)
    elif state.mode == EXPLORING and state.target is not None:
        _move(state, cfg.dt)
        if state.pose == state.target:
            # stop on the reached frontier; fresh ones are computed next tick
            # after sensing from here
            state.target = None
            state.path = []
            state.move_budget = 0.0
    elif state.mode == DONE:
        if not state.path and state.pose != state.spawn:
            _replan_towards(state, state.spawn)
        _move(state, cfg.dt)

    return out


def _should_head(state, cfg, trigger_slack) -> bool:
    if cfg.variant == VARIANT_BASELINE:
        # no tracking: leave when the scheduled job ends
        return state.clock >= state.current_event.deadline
    return trigger_slack is not None and trigger_slack <= 0.0


def _remainder_m(state, ev, loc) -> float:
    """Beeline meters from the known-free stand-in cell to the agreed point."""
    if ev.id in state.fixed_locations:
        return 0.0
    cr, cc = _centroid_point(state, ev)
    dr = abs(loc[0] - cr)
    dc = abs(loc[1] - cc)
    return (max(dr, dc) + (SQRT2 - 1.0) * min(dr, dc)) * state.known.cell_size


def _centroid_point(state, ev):
    rows = [state.spawn_of[p][0] for p in ev.participants]
    cols = [state.spawn_of[p][1] for p in ev.participants]
    return sum(rows) / len(rows), sum(cols) / len(cols)


def _centroid_cell(state, ev):
    cr, cc = _centroid_point(state, ev)
    return int(math.floor(cr + 0.5)), int(math.floor(cc + 0.5))


def _arrive(state, ev):
    state.mode = WAITING
    state.path = []
    if ev is not None and ev.id not in state.arrivals:
        state.arrivals[ev.id] = state.clock


def _location_of(state, ev):
    if ev is None:
        return None
    fixed = state.fixed_locations.get(ev.id)
    if fixed is not None:
        return fixed
    return nearest_free_cell(state.known, _centroid_point(state, ev))


def _resolution_ready(state, ev, view, cfg) -> bool:
    members = ev.participants
    for p in members:
        if view.event_ids.get(p) != ev.id or view.modes.get(p) != WAITING:
            return False
    cell = state.known.cell_size
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            (r0, c0), (r1, c1) = view.poses[a], view.poses[b]
            if math.hypot(r1 - r0, c1 - c0) * cell > cfg.comm_range_m:
                return False
    return True


def _resolve_rendezvous(state, ev, view, plan):
    """Exchange maps, re-allocate frontiers, agree on the next location.

    Consensus inputs are the start-of-tick snapshots of all participants,
    merged identically by each of them; the personal map additionally keeps
    this robot's current-tick scan.
    """
    members = sorted(ev.participants)
    consensus = view.maps[members[0]].copy()
    for p in members[1:]:
        consensus = merge_maps(consensus, view.maps[p])
    state.known = merge_maps(state.known, consensus)

    fronts = detect_frontiers(consensus)
    assignment: list[tuple[int, int]] = []
    my_front = None
    if fronts:
        leader = max(members)
        utils = batch_utilities(consensus, view.poses[leader], fronts)
        order = _utility_order(fronts, utils)
        for rank, p in enumerate(members):
            f = fronts[order[min(rank, len(fronts) - 1)]]
            assignment.append(f.centroid)
            if p == state.id:
                my_front = f

    nxt = _next_shared_event(plan, ev)
    if nxt is not None:
        loc = update_rendezvous_location(consensus, assignment)
        if loc is not None:
            state.fixed_locations[nxt.id] = loc

    state.wait_ends[ev.id] = state.clock
    state.cursor += 1
    state.mode = EXPLORING
    state.move_budget = 0.0
    state.path = []
    state.target = None
    if my_front is not None:
        state.target = my_front.centroid
        _replan_towards(state, state.target)


def _next_shared_event(plan: RendezvousPlan, ev: PlanEvent):
    """Next event that couples exactly the same sub-team, if any."""
    seen = False
    for other in plan.events:
        if other.id == ev.id:
            seen = True
            continue
        if seen and other.participants == ev.participants:
            return other
    return None


def _pick_frontier(state, view, contacts):
    fronts = detect_frontiers(state.known)
    if not fronts:
        _go_home(state)  # nothing left to explore anywhere on this map
        return
    group = sorted((state.id, *contacts))
    leader = group[-1]
    ref_pose = state.pose if leader == state.id else view.poses[leader]
    utils = batch_utilities(state.known, ref_pose, fronts)
    order = _utility_order(fronts, utils)
    rank = group.index(state.id)
    idx = order[min(rank, len(fronts) - 1)]

    my_dist = grid_distances(state.known, state.pose)
    if math.isinf(my_dist[fronts[idx].centroid]):
        # group pick is unreachable from here; take my best reachable one
        my_utils = [
            0.0 if math.isinf(my_dist[f.centroid])
            else f.size / max(my_dist[f.centroid], state.known.cell_size)
            for f in fronts
        ]
        my_order = _utility_order(fronts, my_utils)
        idx = my_order[0]
        if my_utils[idx] == 0.0:
            state.target = None  # nothing reachable yet; sense and retry
            state.path = []
            return
    state.target = fronts[idx].centroid
    _replan_towards(state, state.target)


def _go_home(state):
    state.mode = DONE
    state.target = None
    state.path = []
    _replan_towards(state, state.spawn)


def _replan_towards(state, goal):
    """Plan through known-free space; fall back to the reachable cell nearest
    the goal while the goal region is still disconnected from us."""
    state.path = []
    if goal is None or state.pose == goal:
        return
    res = astar_path(state.known, state.pose, goal)
    if res is None:
        dist = grid_distances(state.known, state.pose)
        reachable = np.argwhere(np.isfinite(dist))
        if reachable.size == 0:
            return
        dr = np.abs(reachable[:, 0] - goal[0])
        dc = np.abs(reachable[:, 1] - goal[1])
        d = np.maximum(dr, dc) + (SQRT2 - 1.0) * np.minimum(dr, dc)
        proxy = tuple(int(v) for v in reachable[int(np.argmin(d))])
        if proxy == state.pose:
            return
        res = astar_path(state.known, state.pose, proxy)
        if res is None:
            return
    path, _ = res
    state.path = [tuple(map(int, cell)) for cell in path[1:]]


def _move(state, dt):
    """Walk the current path on a carried motion budget (a cardinal step
    costs cell_size meters, a diagonal one cell_size*sqrt(2))."""
    state.move_budget += state.speed * dt
    cs = state.known.cell_size
    while state.path:
        nr, nc = state.path[0]
        r, c = state.pose
        cost = cs * (SQRT2 if (nr != r and nc != c) else 1.0)
        if state.move_budget + 1e-9 < cost:
            break
        state.move_budget -= cost
        state.pose = state.path.pop(0)
    if not state.path:
        # parked: budget must not pile up into a later sprint
        state.move_budget = min(state.move_budget, state.speed * dt)
