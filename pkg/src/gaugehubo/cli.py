"""Command-line front end.

Subcommands: generate (benchmark instances), map (polynomial file to
gauge graph), solve (one solver run), bench (multi-sample experiments
from a config file), sim (adiabatic sweep CSV). Exit codes: 0 success,
1 error, 2 for a valid solve that missed the ground-state reference.

Every command echoes its effective configuration, including auto-drawn
seeds, so any run can be reproduced from its output.
"""

from __future__ import annotations

import argparse
import configparser
import secrets
import sys
from dataclasses import replace
from pathlib import Path

from . import annealers, bench, graphs, hubo, quantumsim
from .errors import GaugeHuboError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_GROUND = 2

_FAMILY_ALIASES = {
    "torus": "torus",
    "4rd": "four-regular-dual",
    "four-regular-dual": "four-regular-dual",
}


def _echo(command: str, **settings):
    pairs = " ".join(f"{k}={v}" for k, v in settings.items())
    print(f"config: {command} {pairs}")


def _resolve_seed(seed: int | None) -> int:
    if seed is None:
        seed = secrets.randbelow(2**31)
        print(f"seed: auto-generated {seed}")
    return seed


def _check_out_path(path: str) -> Path:
    out = Path(path)
    if out.parent and not out.parent.exists():
        raise GaugeHuboError(f"output directory {out.parent} does not exist")
    return out


def cmd_generate(args) -> int:
    family = _FAMILY_ALIASES.get(args.family)
    if family is None:
        raise GaugeHuboError(f"unknown family {args.family!r}")
    out = _check_out_path(args.out)
    if family == "torus":
        g = graphs.gen_torus_lattice(args.size)
        _echo("generate", family=family, size=args.size, out=out)
    else:
        seed = _resolve_seed(args.seed)
        g = graphs.gen_four_regular_dual(args.size, seed=seed, k_m=args.km)
        _echo("generate", family=family, size=args.size, seed=seed, km=args.km, out=out)
    out.write_text(graphs.serialize_ggraph(g))
    print(f"links {g.n_links} plaquettes {g.n_plaquettes} sites {len(g.sites)}")
    return EXIT_OK


def cmd_map(args) -> int:
    out = _check_out_path(args.out)
    poly = hubo.parse_instance(Path(args.instance).read_text())
    g = graphs.map_polynomial(poly, k_m=args.km)
    out.write_text(graphs.serialize_ggraph(g))
    _echo("map", instance=args.instance, km=args.km, out=out)
    print(f"links {g.n_links} plaquettes {g.n_plaquettes} gauge_operators {len(g.sites)}")
    if not g.sites:
        print("warning: no gauge operators found; gauge forcing will be inactive")
    return EXIT_OK


def cmd_solve(args) -> int:
    g = graphs.parse_ggraph(Path(args.ggraph).read_text())
    seed = _resolve_seed(args.seed)
    if args.solver in ("lqa", "glqa"):
        params = annealers.AnnealerParams(
            n_iter=args.n_iter,
            gamma=args.gamma,
            eta=args.eta,
            mu=args.mu,
            B=args.B,
            init_scale=args.init_scale,
            seed=seed,
        )
        _echo("solve", ggraph=args.ggraph, solver=args.solver, **vars(params))
        run = annealers.lqa_run if args.solver == "lqa" else annealers.glqa_run
        result = run(g, params)
    else:
        schedule = annealers.SaSchedule(args.beta_min, args.beta_max, args.beta_kind)
        _echo(
            "solve", ggraph=args.ggraph, solver="sa", sweeps=args.sweeps,
            beta_min=args.beta_min, beta_max=args.beta_max,
            beta_kind=args.beta_kind, seed=seed,
        )
        result = annealers.sa_run(g, args.sweeps, schedule, seed)
    reference = g.reference_energy
    success = result.energy == reference
    print(f"energy {result.energy!r}")
    print(f"reference {reference!r}")
    print(f"success {success}")
    print(f"wall_time_s {result.wall_time:.6f}")
    if args.json_out:
        import json

        Path(args.json_out).write_text(json.dumps({
            "energy": result.energy,
            "reference": reference,
            "success": success,
            "wall_time_s": result.wall_time,
            "spins": result.spins.tolist(),
            "iterations_run": result.iterations_run,
        }, indent=2))
    return EXIT_OK if success else EXIT_NO_GROUND


_BENCH_KEYS = {
    "family", "size", "instance_seed", "k_m", "solver", "grid", "n_sam",
    "master_seed", "workers", "n_iter", "gamma", "eta", "mu", "B",
    "init_scale", "sa_beta_min", "sa_beta_max", "sa_beta_kind",
    "reference_energy", "out",
}


def _load_bench_config(path: str | None, args) -> tuple[list[str], bench.ExperimentConfig, str]:
    values: dict[str, str] = {}
    if path is not None:
        ini = configparser.ConfigParser()
        ini.optionxform = str  # keys are case-sensitive (B vs b)
        read = ini.read(path)
        if not read:
            raise GaugeHuboError(f"config file {path} not found")
        if not ini.has_section("bench"):
            raise GaugeHuboError(f"config file {path} has no [bench] section")
        values = dict(ini.items("bench"))
    unknown = set(values) - _BENCH_KEYS
    if unknown:
        raise GaugeHuboError(f"unknown config keys: {sorted(unknown)}")
    # command-line overrides
    if args.family is not None:
        values["family"] = args.family
    if args.size is not None:
        values["size"] = str(args.size)
    if args.solver is not None:
        values["solver"] = args.solver
    if args.n_iter is not None:
        values["grid"] = str(args.n_iter)
    if args.n_sam is not None:
        values["n_sam"] = str(args.n_sam)
    if args.seed is not None:
        values["master_seed"] = str(args.seed)
    if args.workers is not None:
        values["workers"] = str(args.workers)
    if args.km is not None:
        values["k_m"] = str(args.km)
    if args.out is not None:
        values["out"] = args.out

    solvers = [s.strip() for s in values.get("solver", "glqa").split(",") if s.strip()]
    grid_text = values.get("grid", "1000")
    grid = tuple(int(x) for x in grid_text.replace(",", " ").split())
    if not grid:
        raise GaugeHuboError("grid must list at least one iteration budget")
    family = _FAMILY_ALIASES.get(values.get("family", "torus"))
    if family is None:
        raise GaugeHuboError(f"unknown family {values.get('family')!r}")
    defaults = annealers.AnnealerParams()
    annealer = annealers.AnnealerParams(
        n_iter=grid[0],
        gamma=float(values.get("gamma", defaults.gamma)),
        eta=float(values.get("eta", defaults.eta)),
        mu=float(values.get("mu", defaults.mu)),
        B=float(values.get("B", defaults.B)),
        init_scale=float(values.get("init_scale", defaults.init_scale)),
        seed=0,
    )
    schedule = annealers.SaSchedule(
        beta_min=float(values.get("sa_beta_min", 0.1)),
        beta_max=float(values.get("sa_beta_max", 10.0)),
        kind=values.get("sa_beta_kind", "geometric"),
    )
    reference = values.get("reference_energy")
    cfg = bench.ExperimentConfig(
        family=family,
        size=int(values.get("size", 10)),
        instance_seed=int(values.get("instance_seed", 0)),
        k_m=int(values.get("k_m", graphs.DEFAULT_MAX_CYCLE_LEN)),
        solver=solvers[0],
        annealer=annealer,
        sa_schedule=schedule,
        grid=grid,
        n_sam=int(values.get("n_sam", 200)),
        master_seed=int(values.get("master_seed", 0)),
        reference_energy=float(reference) if reference is not None else None,
        workers=int(values.get("workers", 1)),
    )
    return solvers, cfg, values.get("out", "report")


def cmd_bench(args) -> int:
    solvers, cfg, out_prefix = _load_bench_config(args.config, args)
    for s in solvers:
        if s not in bench.SOLVERS:
            raise GaugeHuboError(f"unknown solver {s!r}")
    csv_path = _check_out_path(out_prefix + ".csv")
    json_path = _check_out_path(out_prefix + ".json")
    _echo("bench", solvers=",".join(solvers), **{
        "family": cfg.family, "size": cfg.size, "grid": cfg.grid,
        "n_sam": cfg.n_sam, "master_seed": cfg.master_seed,
        "workers": cfg.workers, "out": out_prefix,
    })
    graph = bench.build_instance(cfg)
    reports = []
    for solver in solvers:
        rep = bench.run_experiment(replace(cfg, solver=solver), graph=graph)
        reports.append(rep)
        best = rep.best_point()
        if best is None:
            print(f"{solver}: no grid point reached the reference energy")
        else:
            print(
                f"{solver}: minimal TTS {best.tts_seconds:.4f}s at budget "
                f"{best.budget} (p={best.p:.4f})"
            )
    csv_path.write_text(bench.report_csv(reports))
    json_path.write_text(bench.report_json(reports))
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_sim(args) -> int:
    g = graphs.parse_ggraph(Path(args.ggraph).read_text())
    seed = _resolve_seed(args.seed)
    out = _check_out_path(args.out)
    _echo(
        "sim", ggraph=args.ggraph, gamma=args.gamma, n_steps=args.n_steps,
        dt=args.dt, measure_every=args.measure_every, seed=seed, out=out,
    )
    report = quantumsim.adiabatic_sweep(
        g, gamma=args.gamma, n_steps=args.n_steps, dt_per_step=args.dt,
        measure_every=args.measure_every, seed=seed,
    )
    out.write_text(report.to_csv())
    print(
        f"steps {args.n_steps} final_energy {report.energies[-1]!r} "
        f"final_fidelity {report.final_fidelity!r} "
        f"minus_outcomes {report.minus_outcomes}/{report.measurements}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaugehubo",
        description="High-order binary optimization via gauge-graph annealers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a benchmark gauge graph")
    p.add_argument("family", help="torus or 4rd (four-regular-dual)")
    p.add_argument("size", type=int, help="lattice side L or graph vertices")
    p.add_argument("out", help="output gauge-graph file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--km", type=int, default=graphs.DEFAULT_MAX_CYCLE_LEN)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("map", help="map a polynomial instance file to its gauge graph")
    p.add_argument("instance")
    p.add_argument("out")
    p.add_argument("--km", type=int, default=graphs.DEFAULT_MAX_CYCLE_LEN)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("solve", help="run one solver sample on a gauge graph")
    p.add_argument("ggraph")
    p.add_argument("--solver", choices=bench.SOLVERS, default="glqa")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-iter", type=int, default=1000)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--mu", type=float, default=0.9)
    p.add_argument("--B", type=float, default=0.05)
    p.add_argument("--init-scale", type=float, default=0.1)
    p.add_argument("--sweeps", type=int, default=1000, help="sa only")
    p.add_argument("--beta-min", type=float, default=0.1)
    p.add_argument("--beta-max", type=float, default=10.0)
    p.add_argument("--beta-kind", choices=("geometric", "linear"), default="geometric")
    p.add_argument("--json-out", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run experiments from a config file")
    p.add_argument("--config", default=None, help="INI file with a [bench] section")
    p.add_argument("--family", default=None)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--solver", default=None, help="comma-separated list")
    p.add_argument("--n-iter", default=None, help="comma-separated budget grid")
    p.add_argument("--n-sam", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--km", type=int, default=None)
    p.add_argument("--out", default=None, help="output prefix for .csv/.json")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sim", help="adiabatic sweep on a small gauge graph")
    p.add_argument("ggraph")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--n-steps", type=int, default=100)
    p.add_argument("--dt", type=float, default=0.2)
    p.add_argument("--measure-every", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sim)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GaugeHuboError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
