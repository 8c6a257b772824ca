"""Command-line experiment harness.

Subcommands mirror the analysis pipeline: ``nd`` (per-cell minima without
D2D, interval search cross-checked against the LP), ``d2d`` (full flow LP
plus overhead minimization), ``heuristic`` (split-level sweep), and
``bounds`` (closed-form bounds against observed values).  Outputs are CSV or
JSON files under --out, each carrying a provenance header with the config
hash, seed, backend, and tolerances.

Exit codes: 0 success, 2 invariant or bound violation, 3 solver failure,
4 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import lp
from .d2d_flow import solve_min_overhead, solve_min_spectrum_d2d
from .heuristic import check_heuristic_bounds, heuristic_min_overhead, heuristic_min_spectrum
from .model import (
    DemandSet,
    ModelError,
    Topology,
    compute_metrics,
    compute_volumes,
    instance_from_json,
    instance_to_json,
    validate_schedule,
)
from .no_d2d import min_spectrum_no_d2d
from .scenario import (
    GeoParams,
    fixture,
    generate_topology,
    random_multicell_instance,
    read_trace_csv,
    synthesize_demands,
)

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_SOLVER = 3
EXIT_CONFIG = 4

#: YDS-vs-LP agreement required by the nd command (relative)
ND_AGREEMENT_RTOL = 1e-6
DEFAULT_LAMBDA_GRID = tuple(round(0.1 * k, 1) for k in range(11))


@dataclass
class ExperimentConfig:
    command: str
    fixture: str | None = None
    trace: str | None = None
    instance: str | None = None
    generate: str | None = None
    seed: int = 0
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    backend: str = "scipy"
    pruning: bool = True
    out: str = "out"
    users_per_cell: int = 4
    cell_radius_m: float = 300.0
    d2d_range_m: float = 30.0
    transmit_power_dbm: float = 21.0
    noise_power_dbm: float = -102.0
    path_loss_exponent: float = 3.5
    splits: int = 6
    slot_seconds: float = 2.0
    reuse: float | None = None
    reuse_d2d: float | None = None

    def hash(self) -> str:
        # the hash identifies the experiment, not where its files land
        payload = {k: v for k, v in asdict(self).items() if k != "out"}
        return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _provenance(config: ExperimentConfig, options: lp.LpOptions) -> list[str]:
    return [
        f"config_hash={config.hash()}",
        f"seed={config.seed}",
        f"backend={options.backend}",
        f"tolerance={options.tolerance}",
        f"optimality_tolerance={options.optimality_tolerance}",
    ]


def load_instance(config: ExperimentConfig) -> tuple[Topology, DemandSet]:
    sources = [s for s in (config.fixture, config.trace, config.instance, config.generate) if s]
    if len(sources) != 1:
        raise ModelError("exactly one of --fixture / --trace / --instance / --generate required")
    if config.fixture:
        return fixture(config.fixture)
    if config.instance:
        return instance_from_json(Path(config.instance).read_text())
    if config.trace:
        records = read_trace_csv(config.trace)
        cells = sorted({r.cell_id for r in records})
        spacing = config.cell_radius_m  # adjacent discs overlap, enabling inter-cell D2D
        positions = [(spacing * i, 0.0) for i in range(len(cells))]
        geo = GeoParams(
            cell_radius_m=config.cell_radius_m,
            d2d_range_m=config.d2d_range_m,
            users_per_cell=config.users_per_cell,
            transmit_power_dbm=config.transmit_power_dbm,
            noise_power_dbm=config.noise_power_dbm,
            path_loss_exponent=config.path_loss_exponent,
            seed=config.seed,
        )
        rng = np.random.default_rng(config.seed)
        topology = generate_topology(positions, geo, rng)
        # trace cells map onto generated BS ids in sorted order
        renamed = [
            type(r)(r.timestamp, f"b{cells.index(r.cell_id) + 1}", r.volume_bits)
            for r in records
        ]
        demands = synthesize_demands(
            renamed,
            topology,
            np.random.default_rng(config.seed + 1),
            splits=config.splits,
            slot_seconds=config.slot_seconds,
        )
        return topology, demands
    params = dict(kv.split("=") for kv in config.generate.split(",") if kv)
    rng = np.random.default_rng(config.seed)
    return random_multicell_instance(
        rng,
        n_cells=int(params.get("cells", 3)),
        users_per_cell=int(params.get("users", 3)),
        n_demands=int(params.get("demands", 30)),
        horizon=int(params.get("T", 30)),
    )


def _write_csv(path: Path, header: list[str], rows: list[list], provenance: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in provenance:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _emit_instance(config: ExperimentConfig, topology: Topology, demands: DemandSet) -> None:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "instance.json").write_text(instance_to_json(topology, demands))


def cmd_nd(config: ExperimentConfig, options: lp.LpOptions) -> int:
    topology, demands = load_instance(config)
    _emit_instance(config, topology, demands)
    yds_result, _schedule, intervals = min_spectrum_no_d2d(topology, demands, method="yds")
    lp_result, _, _ = min_spectrum_no_d2d(topology, demands, method="lp", options=options)
    out = Path(config.out)
    prov = _provenance(config, options)
    rows = []
    disagreements = []
    for b in topology.bs_ids:
        f_yds = float(yds_result.per_bs_peak[b])
        f_lp = float(lp_result.per_bs_peak[b])
        if abs(f_yds - f_lp) > ND_AGREEMENT_RTOL * max(1.0, abs(f_lp)):
            disagreements.append((b, f_yds, f_lp))
        z, z2 = intervals[b]
        rows.append([b, repr(f_yds), z, z2])
    _write_csv(out / "nd_cells.csv", ["bs", "min_spectrum", "interval_start", "interval_end"], rows, prov)
    load_rows = [
        [b, t, repr(float(load))] for (b, t), load in sorted(yds_result.per_slot_load.items())
    ]
    _write_csv(out / "nd_loads.csv", ["bs", "slot", "load"], load_rows, prov)
    print(f"nd: total={float(yds_result.total)!r} cells={len(topology.bs_ids)}")
    if disagreements:
        for b, f_yds, f_lp in disagreements:
            print(f"nd: DISAGREEMENT cell {b}: interval search {f_yds} vs LP {f_lp}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_d2d(config: ExperimentConfig, options: lp.LpOptions) -> int:
    topology, demands = load_instance(config)
    _emit_instance(config, topology, demands)
    nd_result, _, _ = min_spectrum_no_d2d(topology, demands, method="yds")
    outcome = solve_min_spectrum_d2d(topology, demands, pruning=config.pruning, options=options)
    schedule, v_d2d, _ = solve_min_overhead(
        topology, demands, outcome.result.total, pruning=config.pruning, options=options
    )
    report = validate_schedule(schedule, topology, demands, flow_abs_tol=1e-6)
    if not report.ok:
        print(report.summary(), file=sys.stderr)
        return EXIT_VIOLATION
    vd, vb = compute_volumes(schedule, topology)
    metrics = compute_metrics(nd_result.total, outcome.result.total, vd, vb)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "provenance": dict(kv.split("=", 1) for kv in _provenance(config, options)),
        "f_nd": float(nd_result.total),
        "f_d2d": float(outcome.result.total),
        "spectrum_reduction": float(metrics.spectrum_reduction),
        "v_d2d": float(vd),
        "v_bs": float(vb),
        "overhead_ratio": float(metrics.overhead_ratio),
        "per_bs_no_d2d": {b: float(f) for b, f in nd_result.per_bs_peak.items()},
        "per_bs_d2d": {b: float(f) for b, f in outcome.result.per_bs_peak.items()},
    }
    (out / "d2d_result.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    schedule.to_csv(str(out / "schedule.csv"), topology, _provenance(config, options))
    print(
        f"d2d: f_nd={payload['f_nd']!r} f_d2d={payload['f_d2d']!r}"
        f" rho={payload['spectrum_reduction']!r} eta={payload['overhead_ratio']!r}"
    )
    return EXIT_OK


def cmd_heuristic(config: ExperimentConfig, options: lp.LpOptions) -> int:
    topology, demands = load_instance(config)
    _emit_instance(config, topology, demands)
    nd_result, _, _ = min_spectrum_no_d2d(topology, demands, method="yds")
    full = solve_min_spectrum_d2d(topology, demands, pruning=config.pruning, options=options)
    rho = float((nd_result.total - full.result.total) / nd_result.total)
    rows = []
    worst = EXIT_OK
    for level in config.lambda_grid:
        t0 = time.perf_counter()
        outcome = heuristic_min_spectrum(
            topology, demands, level, pruning=config.pruning, options=options
        )
        schedule, v_d2d = heuristic_min_overhead(
            topology, demands, level, outcome, pruning=config.pruning, options=options
        )
        wall = time.perf_counter() - t0
        vd, vb = compute_volumes(schedule, topology)
        rho_h = float((nd_result.total - outcome.total_spectrum) / nd_result.total)
        eta_h = float(vd / (vd + vb)) if vd + vb > 0 else 0.0
        bound_report = check_heuristic_bounds(
            demands, level, rho, rho_h, eta_h, outcome.split.d2d_demand_ids
        )
        if not bound_report.ok:
            for v in bound_report.violations:
                print(f"heuristic level={level}: BOUND VIOLATION {v}", file=sys.stderr)
            worst = EXIT_VIOLATION
        rows.append(
            [
                level,
                repr(outcome.total_spectrum),
                repr(rho_h),
                repr(eta_h),
                len(outcome.split.d2d_demand_ids),
                outcome.step3_variables,
                f"{wall:.4f}",
            ]
        )
    _write_csv(
        Path(config.out) / "heuristic_sweep.csv",
        ["lambda", "total_spectrum", "rho", "eta", "n_d2d_demands", "step3_variables", "wall_seconds"],
        rows,
        _provenance(config, options),
    )
    print(f"heuristic: {len(rows)} levels, rho(full)={rho!r}")
    return worst


def cmd_bounds(config: ExperimentConfig, options: lp.LpOptions) -> int:
    topology, demands = load_instance(config)
    _emit_instance(config, topology, demands)
    nd_result, _, _ = min_spectrum_no_d2d(topology, demands, method="yds")
    outcome = solve_min_spectrum_d2d(topology, demands, pruning=config.pruning, options=options)
    schedule, v_d2d, _ = solve_min_overhead(
        topology, demands, outcome.result.total, pruning=config.pruning, options=options
    )
    vd, vb = compute_volumes(schedule, topology)
    metrics = compute_metrics(nd_result.total, outcome.result.total, vd, vb)
    rho, eta = float(metrics.spectrum_reduction), float(metrics.overhead_ratio)

    floor, simple_bound = bounds_mod.simple_rho_upper_bound(
        topology, demands, f_nd=float(nd_result.total)
    )
    general = bounds_mod.general_rho_upper_bound(topology)
    intra = bounds_mod.intra_cell_bound(topology)
    inter = bounds_mod.inter_cell_bound(topology)
    eta_bound = bounds_mod.overhead_upper_bound(demands.max_delay)
    rows = [
        ["free_relay_rho_bound", repr(simple_bound), repr(rho)],
        ["general_rho_bound", repr(general.bound), repr(rho)],
        ["intra_cell_rho_bound", repr(intra.bound), None],
        ["inter_cell_rho_bound", repr(inter.bound), None],
        ["overhead_bound", repr(eta_bound), repr(eta)],
    ]
    if config.reuse is not None and config.reuse_d2d is not None:
        adjusted = bounds_mod.frequency_reuse_adjusted(rho, config.reuse, config.reuse_d2d)
        rows.append(["reuse_adjusted_rho", repr(adjusted), None])
    table = []
    violated = False
    for name, bound, observed in rows:
        ok = None
        if observed is not None:
            ok = float(observed) <= float(bound) + 1e-6
            violated |= not ok
        table.append([name, bound, observed if observed is not None else "", ok if ok is not None else ""])
    _write_csv(
        Path(config.out) / "bounds.csv",
        ["bound", "value", "observed", "satisfied"],
        table,
        _provenance(config, options),
    )
    print(f"bounds: rho={rho!r} eta={eta!r} floor={floor!r}")
    return EXIT_VIOLATION if violated else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="d2dlb",
        description="Spectrum requirements with and without D2D load balancing",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("nd", "per-cell minimum spectrum without D2D"),
        ("d2d", "minimum total spectrum and overhead with D2D"),
        ("heuristic", "split-level sweep of the reduced problem"),
        ("bounds", "closed-form bounds vs observed values"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--fixture", help="named instance, e.g. toy-fig1, ring(3), complete(4,2)")
        p.add_argument("--trace", help="trace CSV (timestamp,cell_id,volume_bits)")
        p.add_argument("--instance", help="instance JSON produced by this package")
        p.add_argument("--generate", help="random instance spec, e.g. cells=3,users=3,demands=30,T=30")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--backend", default="scipy", choices=["reference", "scipy", "external"])
        p.add_argument("--pruning", default="on", choices=["on", "off"])
        p.add_argument("--out", default="out")
        p.add_argument("--users-per-cell", type=int, default=4, dest="users_per_cell")
        p.add_argument("--cell-radius", type=float, default=300.0, dest="cell_radius_m")
        p.add_argument("--d2d-range", type=float, default=30.0, dest="d2d_range_m")
        p.add_argument("--tx-power-dbm", type=float, default=21.0, dest="transmit_power_dbm")
        p.add_argument("--noise-dbm", type=float, default=-102.0, dest="noise_power_dbm")
        p.add_argument("--path-loss-exp", type=float, default=3.5, dest="path_loss_exponent")
        p.add_argument("--splits", type=int, default=6, help="demands per trace window")
        p.add_argument("--slot-seconds", type=float, default=2.0, dest="slot_seconds")
        if name == "heuristic":
            p.add_argument("--lambda-grid", default=None, dest="lambda_grid")
        if name == "bounds":
            p.add_argument("--reuse", type=float, default=None)
            p.add_argument("--reuse-d2d", type=float, default=None, dest="reuse_d2d")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    grid = DEFAULT_LAMBDA_GRID
    if getattr(args, "lambda_grid", None):
        grid = tuple(float(v) for v in args.lambda_grid.split(","))
        if any(not 0.0 <= v <= 1.0 for v in grid):
            raise ModelError("lambda grid values must lie in [0, 1]")
    return ExperimentConfig(
        command=args.command,
        fixture=args.fixture,
        trace=args.trace,
        instance=args.instance,
        generate=args.generate,
        seed=args.seed,
        lambda_grid=grid,
        backend=args.backend,
        pruning=args.pruning == "on",
        out=args.out,
        users_per_cell=args.users_per_cell,
        cell_radius_m=args.cell_radius_m,
        d2d_range_m=args.d2d_range_m,
        transmit_power_dbm=args.transmit_power_dbm,
        noise_power_dbm=args.noise_power_dbm,
        path_loss_exponent=args.path_loss_exponent,
        splits=args.splits,
        slot_seconds=args.slot_seconds,
        reuse=getattr(args, "reuse", None),
        reuse_d2d=getattr(args, "reuse_d2d", None),
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        options = lp.LpOptions(backend=config.backend)
        handler = {
            "nd": cmd_nd,
            "d2d": cmd_d2d,
            "heuristic": cmd_heuristic,
            "bounds": cmd_bounds,
        }[config.command]
        return handler(config, options)
    except ModelError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except lp.LpError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
