"""Three-step reduced-size alternative to the full D2D flow LP.

Step I solves each cell without D2D.  Step II marks the slots whose no-D2D
load exceeds a fraction ``level`` of the cell's peak as hot and splits the
demands: anything served in a hot slot becomes D2D-eligible, the rest keeps
its no-D2D allocation.  Step III re-solves the flow LP for the D2D-eligible
demands only, on top of the kept allocations.

level=0 reduces to the full problem, level=1 to the pure no-D2D solution;
in between the split trades LP size against spectrum.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Mapping

from . import lp
from .d2d_flow import build_flow_lp
from .model import (
    Demand,
    DemandSet,
    ModelError,
    Schedule,
    SpectrumResult,
    Topology,
    compute_volumes,
    fill_storage,
    per_slot_loads,
)
from .no_d2d import min_spectrum_no_d2d

#: slots count as hot only when the load clears the threshold by this much
HOT_SLOT_TOL = 1e-9
#: an allocation below this is treated as zero when splitting demands
ALLOC_TOL = 1e-9


@dataclass(frozen=True)
class SplitResult:
    """Step II outcome: hot slots, demand partition, and kept allocations."""

    level: float
    hot_slots: Mapping[str, frozenset[int]]
    d2d_demand_ids: frozenset[int]
    nd_demand_ids: frozenset[int]
    residual_load: Mapping[tuple[str, int], float]  # per (BS, slot), ND demands only
    nd_schedule: Schedule  # full Step-I schedule (all demands, direct links)


def split_demands(
    topology: Topology,
    demands: DemandSet,
    nd_schedule: Schedule,
    level: float,
) -> SplitResult:
    """Partition demands into D2D-eligible and locally-served sets.

    ``nd_schedule`` must be an optimal per-cell no-D2D schedule; its per-slot
    loads define the hot slots.  A demand is D2D-eligible iff it has a
    positive allocation in some hot slot of its cell.
    """
    if not 0.0 <= level <= 1.0:
        raise ModelError(f"split level must lie in [0, 1], got {level}")
    loads = per_slot_loads(nd_schedule, topology)
    peaks: dict[str, float] = {b: 0.0 for b in topology.bs_ids}
    for (b, _t), load in loads.items():
        peaks[b] = max(peaks[b], float(load))
    hot: dict[str, set[int]] = {b: set() for b in topology.bs_ids}
    for (b, t), load in loads.items():
        if float(load) > level * peaks[b] + HOT_SLOT_TOL:
            hot[b].add(t)

    d2d_ids: set[int] = set()
    for (jid, u, v, t), x in nd_schedule.allocations.items():
        if u == v or float(x) <= ALLOC_TOL:
            continue
        b = topology.home_bs[u]
        if t in hot[b]:
            d2d_ids.add(jid)
    nd_ids = {j.id for j in demands.demands} - d2d_ids

    residual: dict[tuple[str, int], float] = {}
    for (jid, u, v, t), x in nd_schedule.allocations.items():
        if u == v or jid not in nd_ids:
            continue
        key = (topology.home_bs[u], t)
        residual[key] = residual.get(key, 0.0) + float(x)
    return SplitResult(
        level=level,
        hot_slots={b: frozenset(ts) for b, ts in hot.items()},
        d2d_demand_ids=frozenset(d2d_ids),
        nd_demand_ids=frozenset(nd_ids),
        residual_load=residual,
        nd_schedule=nd_schedule,
    )


@dataclass(frozen=True)
class HeuristicOutcome:
    total_spectrum: float
    schedule: Schedule  # combined: kept ND allocations plus Step-III flows
    split: SplitResult
    result: SpectrumResult
    step3_variables: int
    step3_wall_seconds: float
    f_nd: float
    per_bs_nd: dict[str, float]


def _combined_schedule(
    topology: Topology,
    demands: DemandSet,
    split: SplitResult,
    d2d_schedule: Schedule,
) -> Schedule:
    kept = {
        key: x
        for key, x in split.nd_schedule.allocations.items()
        if key[0] in split.nd_demand_ids
    }
    nd_part = fill_storage(
        Schedule(kept),
        topology,
        DemandSet(
            demands.horizon,
            tuple(j for j in demands.demands if j.id in split.nd_demand_ids),
        ),
    )
    return nd_part.merged_with(d2d_schedule)


def heuristic_min_spectrum(
    topology: Topology,
    demands: DemandSet,
    level: float,
    nd_method: str = "yds",
    pruning: bool = True,
    options: lp.LpOptions | None = None,
) -> HeuristicOutcome:
    """Run the three steps; returns the reduced-problem spectrum and schedule."""
    nd_result, nd_schedule, _ = min_spectrum_no_d2d(topology, demands, method=nd_method)
    split = split_demands(topology, demands, nd_schedule, level)
    d2d_subset = tuple(j for j in demands.demands if j.id in split.d2d_demand_ids)
    t0 = time.perf_counter()
    index = build_flow_lp(
        topology,
        demands,
        demand_subset=d2d_subset,
        pruning=pruning,
        residual_load=split.residual_load,
        name=f"heuristic-spectrum-level{level}",
    )
    solution = lp.solve(index.problem, options)
    wall = time.perf_counter() - t0
    if not solution.optimal:
        raise lp.LpError(f"heuristic step III terminated with status {solution.status}")
    d2d_schedule = index.extract_schedule(solution)
    schedule = _combined_schedule(topology, demands, split, d2d_schedule)
    per_bs = {b: solution.value(col) for b, col in index.peak_vars.items()}
    v_d2d, v_bs = compute_volumes(schedule, topology)
    result = SpectrumResult(
        per_bs_peak=per_bs,
        total=float(solution.objective),
        v_d2d=v_d2d,
        v_bs=v_bs,
        per_slot_load=per_slot_loads(schedule, topology),
    )
    return HeuristicOutcome(
        total_spectrum=float(solution.objective),
        schedule=schedule,
        split=split,
        result=result,
        step3_variables=index.n_flow_variables,
        step3_wall_seconds=wall,
        f_nd=float(nd_result.total),
        per_bs_nd={b: float(f) for b, f in nd_result.per_bs_peak.items()},
    )


def heuristic_min_overhead(
    topology: Topology,
    demands: DemandSet,
    level: float,
    outcome: HeuristicOutcome,
    pruning: bool = True,
    slack: float = lp.DEFAULT_LEXICO_SLACK,
    options: lp.LpOptions | None = None,
) -> tuple[Schedule, float]:
    """Minimize the D2D traffic of the reduced problem at its spectrum optimum."""
    split = outcome.split
    d2d_subset = tuple(j for j in demands.demands if j.id in split.d2d_demand_ids)
    cap = outcome.total_spectrum + slack * max(1.0, abs(outcome.total_spectrum))
    index = build_flow_lp(
        topology,
        demands,
        demand_subset=d2d_subset,
        pruning=pruning,
        residual_load=split.residual_load,
        objective="d2d_traffic",
        spectrum_cap=cap,
        name=f"heuristic-overhead-level{level}",
    )
    solution = lp.solve(index.problem, options)
    if not solution.optimal:
        raise lp.LpError(f"heuristic overhead step terminated with status {solution.status}")
    schedule = _combined_schedule(topology, demands, split, index.extract_schedule(solution))
    return schedule, float(solution.objective)


@dataclass(frozen=True)
class HeuristicBoundReport:
    level: float
    rho: float
    rho_heuristic: float
    eta_heuristic: float
    sandwich_lower: float  # (1 - level) * rho
    eta_bound: float  # refined overhead bound from the D2D-eligible volume
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_heuristic_bounds(
    demands: DemandSet,
    level: float,
    rho: float,
    rho_heuristic: float,
    eta_heuristic: float,
    d2d_demand_ids: frozenset[int],
    tol: float = 1e-6,
) -> HeuristicBoundReport:
    """Check the sandwich on the spectrum reduction and the refined overhead bound."""
    d_max = demands.max_delay
    volume_d2d_eligible = float(
        sum(j.volume for j in demands.demands if j.id in d2d_demand_ids)
    )
    total_volume = float(demands.total_volume)
    scaled = (d_max - 1) * volume_d2d_eligible
    eta_bound = scaled / (scaled + total_volume) if scaled + total_volume > 0 else 0.0
    lower = (1.0 - level) * rho
    violations = []
    if rho_heuristic < lower - tol:
        violations.append(
            f"spectrum reduction {rho_heuristic} below sandwich lower bound {lower}"
        )
    if rho_heuristic > rho + tol:
        violations.append(f"spectrum reduction {rho_heuristic} above full-LP value {rho}")
    if eta_heuristic > eta_bound + tol:
        violations.append(f"overhead ratio {eta_heuristic} above bound {eta_bound}")
    return HeuristicBoundReport(
        level=level,
        rho=rho,
        rho_heuristic=rho_heuristic,
        eta_heuristic=eta_heuristic,
        sandwich_lower=lower,
        eta_bound=eta_bound,
        violations=tuple(violations),
    )


__all__ = [
    "SplitResult",
    "split_demands",
    "HeuristicOutcome",
    "heuristic_min_spectrum",
    "heuristic_min_overhead",
    "HeuristicBoundReport",
    "check_heuristic_bounds",
]
