"""Time-expanded flow LPs for spectrum minimization with D2D relaying.

A demand's traffic leaves its source user at the start slot, moves one hop
per slot over real links (or waits on a virtual self-link), and must be at a
base station by the deadline.  Spectrum is billed to the receiving side's BS
(receiver takeover): uplink transmissions into b count toward alpha_b(t),
transmissions into users of b toward beta_b(t), and alpha + beta must stay
under the per-BS peak being minimized.

Variable pruning drops (link, slot) pairs a demand cannot use: the sender
must be reachable from the source within t - start hops and some BS must be
reachable from the receiver in the slots that remain.  Pruning never changes
the optimum; `prune_equivalence_check` verifies that on concrete instances.

One deviation from the naive formulation, applied with or without pruning:
no variable lets a node other than the source transmit at the start slot.
The flow equations alone leave that slot unconstrained for non-source nodes,
admitting sourceless circulations that can fake cheaper deliveries on
heterogeneous-rate instances.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import lp
from .model import (
    Demand,
    DemandSet,
    ModelError,
    Schedule,
    SpectrumResult,
    Topology,
    compute_volumes,
    per_slot_loads,
)


class InfeasibleDemandError(ModelError):
    """A demand cannot reach any BS within its lifetime."""


def hop_distances_from(topology: Topology, source: str) -> dict[str, int]:
    """BFS hop counts from a node along directed links."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in topology.out_neighbors.get(u, ()):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def hop_distances_to_bs(topology: Topology) -> dict[str, int]:
    """Minimum hops from each node to any BS (multi-source BFS on reversed links)."""
    dist = {b: 0 for b in topology.bs_ids}
    queue = deque(topology.bs_ids)
    while queue:
        v = queue.popleft()
        for u in topology.in_neighbors.get(v, ()):
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


@dataclass
class TimeExpandedIndex:
    """Column layout of one assembled flow LP."""

    problem: lp.LpProblem
    flow_vars: dict[tuple[int, str, str, int], int]  # (demand, src, dst, slot) -> column
    alpha_vars: dict[tuple[str, int], int]
    beta_vars: dict[tuple[str, int], int]
    peak_vars: dict[str, int]
    demand_ids: tuple[int, ...]

    @property
    def n_flow_variables(self) -> int:
        return len(self.flow_vars)

    def extract_schedule(self, solution: lp.LpSolution) -> Schedule:
        alloc = {
            key: solution.value(col)
            for key, col in self.flow_vars.items()
            if solution.value(col) != 0.0
        }
        return Schedule(alloc)


def build_flow_lp(
    topology: Topology,
    demands: DemandSet,
    demand_subset: Sequence[Demand] | None = None,
    pruning: bool = True,
    residual_load: Mapping[tuple[str, int], float] | None = None,
    objective: str = "spectrum",
    spectrum_cap: float | None = None,
    name: str = "min-spectrum-d2d",
) -> TimeExpandedIndex:
    """Assemble the flow-over-time LP.

    demand_subset restricts the flow variables to a subset of demands (the
    reduced heuristic problem); residual_load adds a fixed per-(BS, slot)
    spectrum floor under the peak; objective is "spectrum" (sum of per-BS
    peaks) or "d2d_traffic"; spectrum_cap bounds the sum of peaks.
    """
    if objective not in ("spectrum", "d2d_traffic"):
        raise ModelError(f"unknown objective {objective!r}")
    demands.check_users(topology)
    active = tuple(demand_subset) if demand_subset is not None else demands.demands
    residual_load = dict(residual_load or {})
    user_set = set(topology.user_ids)
    dist_to_bs = hop_distances_to_bs(topology)

    problem = lp.LpProblem(name)
    flow_vars: dict[tuple[int, str, str, int], int] = {}
    real_links = list(topology.rate_map.items())

    for j in active:
        dist_src = hop_distances_from(topology, j.user)
        span = j.end - j.start + 1
        if dist_to_bs.get(j.user, 10**9) > span:
            raise InfeasibleDemandError(
                f"demand {j.id}: user {j.user!r} cannot reach any BS within its"
                f" lifetime [{j.start}, {j.end}]"
            )

        def admissible(u: str, v: str, t: int) -> bool:
            if t == j.start and u != j.user:
                return False  # only the source holds the data at the start slot
            if not pruning:
                return True
            if dist_src.get(u, 10**9) > t - j.start:
                return False
            return dist_to_bs.get(v, 10**9) <= j.end - t

        for (u, v), _rate in real_links:
            for t in range(j.start, j.end + 1):
                if admissible(u, v, t):
                    flow_vars[(j.id, u, v, t)] = problem.add_variable(
                        f"x_j{j.id}_{u}_{v}_t{t}"
                    )
        for node in topology.all_nodes():
            for t in range(j.start, j.end + 1):
                if admissible(node, node, t):
                    flow_vars[(j.id, node, node, t)] = problem.add_variable(
                        f"x_j{j.id}_{node}_{node}_t{t}"
                    )

    def rate(u: str, v: str) -> float:
        return 1.0 if u == v else float(topology.rate_map[(u, v)])

    # per-demand flow constraints
    in_real = topology.in_neighbors
    out_real = topology.out_neighbors
    for j in active:
        source_terms = {}
        for v in (*out_real.get(j.user, ()), j.user):
            col = flow_vars.get((j.id, j.user, v, j.start))
            if col is not None:
                source_terms[col] = rate(j.user, v)
        problem.add_constraint(source_terms, "=", float(j.volume), f"source_j{j.id}")

        arrival_terms = {}
        for b in topology.bs_ids:
            for v in (*in_real.get(b, ()), b):
                col = flow_vars.get((j.id, v, b, j.end))
                if col is not None:
                    arrival_terms[col] = rate(v, b)
        problem.add_constraint(arrival_terms, "=", float(j.volume), f"arrival_j{j.id}")

        for node in topology.all_nodes():
            for t in range(j.start, j.end):
                terms: dict[int, float] = {}
                for w in (*in_real.get(node, ()), node):
                    col = flow_vars.get((j.id, w, node, t))
                    if col is not None:
                        terms[col] = terms.get(col, 0.0) + rate(w, node)
                for w in (*out_real.get(node, ()), node):
                    col = flow_vars.get((j.id, node, w, t + 1))
                    if col is not None:
                        terms[col] = terms.get(col, 0.0) - rate(node, w)
                if terms:
                    problem.add_constraint(terms, "=", 0.0, f"conserve_j{j.id}_{node}_t{t}")

    # per-(BS, slot) billing: alpha = uplink into b, beta = D2D into users of b
    alpha_members: dict[tuple[str, int], dict[int, float]] = {}
    beta_members: dict[tuple[str, int], dict[int, float]] = {}
    for (jid, u, v, t), col in flow_vars.items():
        if u == v:
            continue
        if v in user_set:
            beta_members.setdefault((topology.home_bs[v], t), {})[col] = 1.0
        else:
            alpha_members.setdefault((v, t), {})[col] = 1.0

    peak_vars = {b: problem.add_variable(f"peak_{b}") for b in topology.bs_ids}
    billed_slots = sorted(
        set(alpha_members) | set(beta_members) | set(residual_load), key=lambda k: (k[0], k[1])
    )
    alpha_vars: dict[tuple[str, int], int] = {}
    beta_vars: dict[tuple[str, int], int] = {}
    for b, t in billed_slots:
        a_col = problem.add_variable(f"alpha_{b}_t{t}")
        b_col = problem.add_variable(f"beta_{b}_t{t}")
        alpha_vars[(b, t)] = a_col
        beta_vars[(b, t)] = b_col
        problem.add_constraint(
            {**alpha_members.get((b, t), {}), a_col: -1.0}, "=", 0.0, f"alpha_{b}_t{t}"
        )
        problem.add_constraint(
            {**beta_members.get((b, t), {}), b_col: -1.0}, "=", 0.0, f"beta_{b}_t{t}"
        )
        problem.add_constraint(
            {a_col: 1.0, b_col: 1.0, peak_vars[b]: -1.0},
            "<=",
            -float(residual_load.get((b, t), 0.0)),
            f"peak_{b}_t{t}",
        )

    if spectrum_cap is not None:
        problem.add_constraint(
            {col: 1.0 for col in peak_vars.values()}, "<=", float(spectrum_cap), "total_cap"
        )

    if objective == "spectrum":
        problem.set_objective({col: 1.0 for col in peak_vars.values()})
    else:
        demand_end = {j.id: j.end for j in active}
        obj: dict[int, float] = {}
        for (jid, u, v, t), col in flow_vars.items():
            if u != v and v in user_set and t <= demand_end[jid] - 1:
                obj[col] = rate(u, v)
        problem.set_objective(obj)

    return TimeExpandedIndex(
        problem=problem,
        flow_vars=flow_vars,
        alpha_vars=alpha_vars,
        beta_vars=beta_vars,
        peak_vars=peak_vars,
        demand_ids=tuple(j.id for j in active),
    )


def build_min_spectrum_d2d(
    topology: Topology, demands: DemandSet, pruning: bool = True
) -> TimeExpandedIndex:
    return build_flow_lp(topology, demands, pruning=pruning)


@dataclass(frozen=True)
class D2DSolveOutcome:
    result: SpectrumResult
    schedule: Schedule
    index: TimeExpandedIndex
    solution: lp.LpSolution


def solve_min_spectrum_d2d(
    topology: Topology,
    demands: DemandSet,
    pruning: bool = True,
    options: lp.LpOptions | None = None,
) -> D2DSolveOutcome:
    """Minimum total spectrum with D2D and an optimal schedule."""
    index = build_min_spectrum_d2d(topology, demands, pruning)
    solution = lp.solve(index.problem, options)
    if not solution.optimal:
        raise lp.LpError(f"Min-Spectrum-D2D terminated with status {solution.status}")
    schedule = index.extract_schedule(solution)
    per_bs = {b: solution.value(col) for b, col in index.peak_vars.items()}
    v_d2d, v_bs = compute_volumes(schedule, topology)
    result = SpectrumResult(
        per_bs_peak=per_bs,
        total=float(solution.objective),
        v_d2d=v_d2d,
        v_bs=v_bs,
        per_slot_load=per_slot_loads(schedule, topology),
    )
    return D2DSolveOutcome(result, schedule, index, solution)


def solve_min_overhead(
    topology: Topology,
    demands: DemandSet,
    total_spectrum: float,
    pruning: bool = True,
    slack: float = lp.DEFAULT_LEXICO_SLACK,
    options: lp.LpOptions | None = None,
) -> tuple[Schedule, float, D2DSolveOutcome]:
    """Minimize D2D traffic subject to the given total-spectrum budget.

    ``total_spectrum`` is the Min-Spectrum-D2D optimum; the budget constraint
    binds at the returned optimum (up to the numeric slack).
    """
    cap = total_spectrum + slack * max(1.0, abs(total_spectrum))
    index = build_flow_lp(
        topology,
        demands,
        pruning=pruning,
        objective="d2d_traffic",
        spectrum_cap=cap,
        name="min-overhead",
    )
    solution = lp.solve(index.problem, options)
    if not solution.optimal:
        raise lp.LpError(f"Min-Overhead terminated with status {solution.status}")
    schedule = index.extract_schedule(solution)
    per_bs = {b: solution.value(col) for b, col in index.peak_vars.items()}
    v_d2d, v_bs = compute_volumes(schedule, topology)
    result = SpectrumResult(
        per_bs_peak=per_bs,
        total=sum(per_bs.values()),
        v_d2d=v_d2d,
        v_bs=v_bs,
        per_slot_load=per_slot_loads(schedule, topology),
    )
    return schedule, float(solution.objective), D2DSolveOutcome(result, schedule, index, solution)


@dataclass(frozen=True)
class PruneReport:
    optimum_pruned: float
    optimum_unpruned: float
    n_vars_pruned: int
    n_vars_unpruned: int
    rel_gap: float

    @property
    def equal(self) -> bool:
        return self.rel_gap <= 1e-6

    @property
    def variable_reduction(self) -> float:
        if self.n_vars_unpruned == 0:
            return 0.0
        return 1.0 - self.n_vars_pruned / self.n_vars_unpruned


def prune_equivalence_check(
    topology: Topology, demands: DemandSet, options: lp.LpOptions | None = None
) -> PruneReport:
    """Solve with and without pruning and compare optima and variable counts."""
    pruned = solve_min_spectrum_d2d(topology, demands, pruning=True, options=options)
    unpruned = solve_min_spectrum_d2d(topology, demands, pruning=False, options=options)
    f_p, f_u = pruned.result.total, unpruned.result.total
    gap = abs(f_p - f_u) / max(1.0, abs(f_u))
    return PruneReport(
        optimum_pruned=f_p,
        optimum_unpruned=f_u,
        n_vars_pruned=pruned.index.n_flow_variables,
        n_vars_unpruned=unpruned.index.n_flow_variables,
        rel_gap=gap,
    )
