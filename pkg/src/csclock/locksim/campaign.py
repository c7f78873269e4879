from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .allan import AllanSeries, allan_deviation
from .config import SimConfig
from .engine import simulate


@dataclass(frozen=True)
class SeedSummary:
    index: int
    seed: int
    series: AllanSeries
    mean_y: float

    @property
    def sigma(self) -> np.ndarray:
        return self.series.sigma


@dataclass(frozen=True, eq=False)
class CampaignResult:
    aggregate: AllanSeries  # mean σ(τ); bounds are the standard error across seeds
    spread: np.ndarray  # standard deviation of σ(τ) across seeds
    per_seed: tuple[SeedSummary, ...]

    @property
    def mean_y(self) -> float:
        return float(np.mean([s.mean_y for s in self.per_seed]))

    @property
    def mean_y_sem(self) -> float:
        vals = np.array([s.mean_y for s in self.per_seed])
        return float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else float("nan")


def campaign_seeds(master_seed: int, n: int) -> list[int]:
    return [int(s.generate_state(1, dtype=np.uint64)[0] >> 1)
            for s in np.random.SeedSequence(master_seed).spawn(n)]


def _one(args) -> SeedSummary:
    index, cfg, taus = args
    trace = simulate(cfg)
    series = allan_deviation(trace, taus)
    return SeedSummary(index, cfg.seed, series, float(trace.y.mean()))


def run_campaign(cfg: SimConfig, n: int, taus, master_seed: int | None = None,
                 workers: int = 1) -> CampaignResult:
    """Run ``n`` independent seeds derived from ``master_seed`` (default ``cfg.seed``)."""
    if n < 1:
        raise ValueError("a campaign needs at least one seed")
    master = cfg.seed if master_seed is None else master_seed
    jobs = [(i, replace(cfg, seed=s), taus) for i, s in enumerate(campaign_seeds(master, n))]
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one, jobs))
    else:
        results = [_one(job) for job in jobs]
    results.sort(key=lambda r: r.index)
    if n == 1:
        only = results[0].series
        return CampaignResult(only, np.zeros_like(only.sigma), tuple(results))
    table = np.vstack([r.sigma for r in results])
    spread = table.std(axis=0, ddof=1)
    sem = spread / np.sqrt(n)
    ref = results[0].series
    aggregate = AllanSeries(ref.tau, table.mean(axis=0), sem, sem, ref.edf * n)
    return CampaignResult(aggregate, spread, tuple(results))
