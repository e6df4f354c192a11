"""Multi-sample experiments: success probability and time-to-solution.

A run executes n_sam independent solver samples per grid point (the grid
varies the iteration budget), counts samples that hit the reference
ground energy, and aggregates minimum energy, lower-middle median energy,
success probability p, mean per-sample wall time, and

    TTS = t_mean * ln(0.01) / ln(1 - p),

the expected time to reach the optimum at 99% confidence. Per-sample
seeds derive from (master_seed, sample_index), so results do not depend
on worker count or completion order.
"""

from __future__ import annotations

import json
import math
import time
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .annealers import AnnealerParams, SaSchedule, glqa_run, lqa_run, sa_run
from .errors import DivergenceError
from .graphs import GGraph, gen_four_regular_dual, gen_torus_lattice

FAMILIES = ("torus", "four-regular-dual")
SOLVERS = ("lqa", "glqa", "sa")


def tts(t_p: float, p: float) -> float | None:
    """Time-to-solution at 99% confidence; None when p = 0 (unattainable).

    A single run suffices once p >= 0.99, so the formula caps at t_p.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"success probability must be in [0, 1], got {p}")
    if t_p < 0:
        raise ValueError(f"wall time must be >= 0, got {t_p}")
    if p == 0:
        return None
    if p >= 0.99:
        return t_p
    return t_p * math.log(0.01) / math.log(1.0 - p)


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "torus"
    size: int = 10
    instance_seed: int = 0
    k_m: int = 6
    solver: str = "glqa"
    annealer: AnnealerParams = field(default_factory=AnnealerParams)
    sa_schedule: SaSchedule = field(default_factory=SaSchedule)
    grid: tuple[int, ...] = (1000,)  # n_iter for lqa/glqa, sweeps for sa
    n_sam: int = 200
    master_seed: int = 0
    reference_energy: float | None = None  # default: satisfied-plaquette energy
    workers: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.n_sam < 1:
            raise ValueError(f"n_sam must be >= 1, got {self.n_sam}")
        if not self.grid:
            raise ValueError("grid of iteration budgets must be non-empty")
        if any(b < 0 for b in self.grid):
            raise ValueError(f"grid budgets must be >= 0, got {self.grid}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass
class GridPointResult:
    budget: int
    e_min: float
    e_med: float
    p: float
    n_sol: int
    n_failed: int
    t_mean: float
    tts_seconds: float | None
    energies: tuple[float, ...]
    wall_times: tuple[float, ...]


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    machine: str
    sample_seeds: tuple[int, ...]
    points: list[GridPointResult]

    def best_point(self) -> GridPointResult | None:
        """Grid point with the smallest attainable TTS."""
        attainable = [pt for pt in self.points if pt.tts_seconds is not None]
        return min(attainable, key=lambda pt: pt.tts_seconds, default=None)


def build_instance(cfg: ExperimentConfig) -> GGraph:
    if cfg.family == "torus":
        return gen_torus_lattice(cfg.size)
    return gen_four_regular_dual(cfg.size, seed=cfg.instance_seed, k_m=cfg.k_m)


def sample_seed(master_seed: int, index: int) -> int:
    """Deterministic per-sample seed from the master seed."""
    return int(np.random.SeedSequence((master_seed, index)).generate_state(1)[0])


def _run_sample(g: GGraph, cfg: ExperimentConfig, budget: int, seed: int):
    """One solver sample: (energy or nan on divergence, wall_time)."""
    start = time.perf_counter()
    try:
        if cfg.solver == "lqa":
            r = lqa_run(g, replace(cfg.annealer, n_iter=budget, seed=seed))
        elif cfg.solver == "glqa":
            r = glqa_run(g, replace(cfg.annealer, n_iter=budget, seed=seed))
        else:
            r = sa_run(g, max(budget, 1), cfg.sa_schedule, seed)
        return r.energy, r.wall_time
    except DivergenceError:
        return math.nan, time.perf_counter() - start


_WORKER_STATE: dict = {}


def _worker_init(g: GGraph, cfg: ExperimentConfig):
    _WORKER_STATE["g"] = g
    _WORKER_STATE["cfg"] = cfg


def _worker_task(args):
    budget, seed = args
    return _run_sample(_WORKER_STATE["g"], _WORKER_STATE["cfg"], budget, seed)


def _aggregate(cfg: ExperimentConfig, budget: int, results, reference: float) -> GridPointResult:
    energies = np.array([e for e, _ in results])
    times = np.array([t for _, t in results])
    finite = energies[np.isfinite(energies)]
    n_failed = int(len(energies) - len(finite))
    n_sol = int(np.sum(finite == reference))
    p = n_sol / cfg.n_sam
    if len(finite):
        ordered = np.sort(finite)
        e_min = float(ordered[0])
        e_med = float(ordered[(len(ordered) - 1) // 2])  # lower-middle median
    else:
        e_min = e_med = math.nan
    t_mean = float(times.mean())
    return GridPointResult(
        budget=budget,
        e_min=e_min,
        e_med=e_med,
        p=p,
        n_sol=n_sol,
        n_failed=n_failed,
        t_mean=t_mean,
        tts_seconds=tts(t_mean, p),
        energies=tuple(float(e) for e in energies),
        wall_times=tuple(float(t) for t in times),
    )


def run_experiment(cfg: ExperimentConfig, graph: GGraph | None = None) -> ExperimentReport:
    """Run the full (grid x n_sam) sample matrix for one solver."""
    g = build_instance(cfg) if graph is None else graph
    reference = cfg.reference_energy
    if reference is None:
        reference = g.reference_energy
    seeds = tuple(sample_seed(cfg.master_seed, i) for i in range(cfg.n_sam))
    points = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(
            max_workers=cfg.workers, initializer=_worker_init, initargs=(g, cfg)
        ) as pool:
            for budget in cfg.grid:
                tasks = [(budget, s) for s in seeds]
                results = list(pool.map(_worker_task, tasks, chunksize=8))
                points.append(_aggregate(cfg, budget, results, reference))
    else:
        for budget in cfg.grid:
            results = [_run_sample(g, cfg, budget, s) for s in seeds]
            points.append(_aggregate(cfg, budget, results, reference))
    machine = f"{platform.platform()} / {platform.processor() or 'unknown cpu'}"
    return ExperimentReport(config=cfg, machine=machine, sample_seeds=seeds, points=points)


# ----------------------------------------------------------------------
# Paired LQA / gLQA scaling sweeps
# ----------------------------------------------------------------------

@dataclass
class RatioRow:
    size: int
    p_lqa: float
    p_glqa: float
    r_p: float
    tts_lqa: float | None
    tts_glqa: float | None
    r_tts: float
    lqa_failed: bool


def _ratio(report_lqa: ExperimentReport, report_glqa: ExperimentReport, size: int) -> RatioRow:
    pl, pg = report_lqa.points[0], report_glqa.points[0]
    if pl.p == 0:
        # LQA never reached the reference: probability gain is infinite,
        # the TTS reduction is total.
        r_p = math.inf if pg.p > 0 else math.nan
        r_tts = 0.0 if pg.p > 0 else math.nan
        failed = True
    else:
        r_p = pg.p / pl.p
        r_tts = (
            pg.tts_seconds / pl.tts_seconds if pg.tts_seconds is not None else math.inf
        )
        failed = False
    return RatioRow(
        size=size,
        p_lqa=pl.p,
        p_glqa=pg.p,
        r_p=r_p,
        tts_lqa=pl.tts_seconds,
        tts_glqa=pg.tts_seconds,
        r_tts=r_tts,
        lqa_failed=failed,
    )


def scaling_sweep(
    family: str, sizes: tuple[int, ...], template: ExperimentConfig
) -> tuple[list[ExperimentReport], list[RatioRow]]:
    """run_experiment per size for both lqa and glqa at a fixed budget;
    returns all reports plus per-size success and TTS ratios."""
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    reports: list[ExperimentReport] = []
    ratios: list[RatioRow] = []
    for size in sizes:
        base = replace(template, family=family, size=size)
        g = build_instance(base)
        rep_l = run_experiment(replace(base, solver="lqa"), graph=g)
        rep_g = run_experiment(replace(base, solver="glqa"), graph=g)
        reports.extend([rep_l, rep_g])
        ratios.append(_ratio(rep_l, rep_g, size))
    return reports, ratios


# ----------------------------------------------------------------------
# Report output
# ----------------------------------------------------------------------

CSV_HEADER = "family,size,solver,n_iter,n_sam,E_min,E_med,p,t_p_mean_s,TTS_s"


def report_csv(reports: list[ExperimentReport]) -> str:
    lines = [CSV_HEADER]
    for rep in reports:
        c = rep.config
        for pt in rep.points:
            tts_field = "unattainable" if pt.tts_seconds is None else repr(pt.tts_seconds)
            lines.append(
                f"{c.family},{c.size},{c.solver},{pt.budget},{c.n_sam},"
                f"{pt.e_min!r},{pt.e_med!r},{pt.p!r},{pt.t_mean!r},{tts_field}"
            )
    return "\n".join(lines) + "\n"


def report_json(reports: list[ExperimentReport]) -> str:
    payload = []
    for rep in reports:
        entry = {
            "config": asdict(rep.config),
            "machine": rep.machine,
            "sample_seeds": list(rep.sample_seeds),
            "points": [
                {
                    "budget": pt.budget,
                    "E_min": pt.e_min,
                    "E_med": pt.e_med,
                    "p": pt.p,
                    "n_sol": pt.n_sol,
                    "n_failed": pt.n_failed,
                    "t_p_mean_s": pt.t_mean,
                    "TTS_s": pt.tts_seconds,
                    "energies": list(pt.energies),
                    "wall_times": list(pt.wall_times),
                }
                for pt in rep.points
            ],
        }
        payload.append(entry)
    return json.dumps(payload, indent=2, allow_nan=True)
