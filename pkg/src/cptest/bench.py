"""Monte Carlo harness: ROC curves from replicated p-values, power versus
sample size, and the closed-form minimax reference for the Gaussian
mean-shift problem."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .core import RngStream
from .errors import InputError
from .generators import ScenarioSpec, generate_dataset
from .permutation import p_value_ecdf, permutation_test
from .stats import StatisticKind

_STD_NORMAL = NormalDist()


def minimax_power(alpha: float, d: int, n: int, delta_sq: float, sigma: float) -> float:
    """Minimax power of a level-``alpha`` test of N(0, s^2 I) vs N(delta, s^2 I)
    with ``n`` points per sample; ``delta_sq`` is ``|delta|_2^2``.

    ``z_alpha`` is the lower quantile, so the curve equals ``alpha`` at
    ``delta_sq = 0``.
    """
    if not 0 < alpha < 1:
        raise InputError("alpha must lie in (0, 1)")
    if d <= 0 or n <= 0 or sigma <= 0 or delta_sq < 0:
        raise InputError("d, n, sigma must be positive and delta_sq nonnegative")
    snr = delta_sq / sigma**2
    z = _STD_NORMAL.inv_cdf(alpha)
    arg = math.sqrt(d) / math.sqrt(d + n * snr) * z + snr / math.sqrt(8 * d / n**2 + 8 * snr / n)
    return _STD_NORMAL.cdf(arg)


@dataclass(frozen=True)
class ExperimentRecord:
    scenario: ScenarioSpec
    statistic_kind: StatisticKind
    replications: int
    B: int
    seed: int
    p_values: np.ndarray
    alpha_grid: np.ndarray
    roc: list[tuple[float, float]]
    runtime_seconds: float


@dataclass(frozen=True)
class PowerCurve:
    scenario: ScenarioSpec
    statistic_kind: StatisticKind
    sample_sizes: tuple[int, ...]
    powers: np.ndarray
    replications: int
    B: int
    seed: int
    alpha: float
    p_values: np.ndarray  # shape (len(sample_sizes), replications)
    runtime_seconds: float


def replicate_p_values(scenario: ScenarioSpec, kind: StatisticKind, R: int, B: int, seed: int, threads: int = 1) -> np.ndarray:
    """p-values of ``R`` independent tests, each on freshly generated data.

    Replication ``r`` uses data stream ``(seed, r)`` and permutation stream
    ``(seed, r)`` under fixed spawn keys, so the output is identical for any
    thread count or execution order.
    """
    if R < 1:
        raise InputError("R must be at least 1")
    root = RngStream(seed)

    def one(r):
        data = generate_dataset(scenario, root.spawn(1, r))
        return permutation_test(data, kind, B=B, alpha=0.05, rng=root.spawn(2, r)).p_value

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(one, range(R)))
    else:
        out = [one(r) for r in range(R)]
    return np.asarray(out)


def roc_experiment(scenario, kind, R=400, B=200, alpha_grid=None, seed=0, threads=1) -> ExperimentRecord:
    grid = np.linspace(0.01, 1.0, 100) if alpha_grid is None else np.asarray(alpha_grid, float)
    start = time.perf_counter()
    p = replicate_p_values(scenario, kind, R, B, seed, threads)
    power = p_value_ecdf(p, grid)
    return ExperimentRecord(
        scenario=scenario,
        statistic_kind=kind,
        replications=R,
        B=B,
        seed=seed,
        p_values=p,
        alpha_grid=grid,
        roc=[(float(a), float(b)) for a, b in zip(grid, power)],
        runtime_seconds=time.perf_counter() - start,
    )


def power_curve(scenario, kind, sizes, reps=250, B=200, seed=0, alpha=0.05, threads=1) -> PowerCurve:
    """Rejection rate (p <= alpha) at each per-sample size in ``sizes``."""
    sizes = tuple(int(s) for s in sizes)
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InputError("sizes must be a non-empty increasing sequence")
    start = time.perf_counter()
    pvals = np.array([
        replicate_p_values(scenario.with_size(s), kind, reps, B, seed, threads) for s in sizes
    ])
    powers = np.mean(pvals <= alpha, axis=1)
    return PowerCurve(
        scenario=scenario,
        statistic_kind=kind,
        sample_sizes=sizes,
        powers=powers,
        replications=reps,
        B=B,
        seed=seed,
        alpha=alpha,
        p_values=pvals,
        runtime_seconds=time.perf_counter() - start,
    )


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def roc_csv(records) -> str:
    rows = [
        (repr(a), repr(pw), rec.statistic_kind.label, rec.scenario.kind, rec.replications, rec.B, rec.seed)
        for rec in records
        for a, pw in rec.roc
    ]
    return _csv_text(("alpha", "power", "statistic", "scenario", "R", "B", "seed"), rows)


def roc_pvalues_csv(records) -> str:
    rows = [
        (rec.statistic_kind.label, rec.scenario.kind, r, repr(float(p)))
        for rec in records
        for r, p in enumerate(rec.p_values)
    ]
    return _csv_text(("statistic", "scenario", "replication", "p_value"), rows)


def power_csv(curves) -> str:
    rows = [
        (n, repr(float(pw)), c.statistic_kind.label, c.scenario.kind, c.replications, c.B, c.seed)
        for c in curves
        for n, pw in zip(c.sample_sizes, c.powers)
    ]
    return _csv_text(("n", "power", "statistic", "scenario", "reps", "B", "seed"), rows)


def power_pvalues_csv(curves) -> str:
    rows = [
        (c.statistic_kind.label, c.scenario.kind, n, r, repr(float(p)))
        for c in curves
        for n, row in zip(c.sample_sizes, c.p_values)
        for r, p in enumerate(row)
    ]
    return _csv_text(("statistic", "scenario", "n", "replication", "p_value"), rows)


_COLORS = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02")


def roc_svg(records, reference=None, title="") -> str:
    """Static ROC overlay: one polyline per record, the diagonal, and an
    optional reference curve given as ``(alpha, power)`` pairs."""
    size, pad = 400, 50

    def pt(a, b):
        return f"{pad + a * size:.2f},{pad + (1 - b) * size:.2f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2 * pad + 160}" height="{size + 2 * pad}">',
        f'<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="none" stroke="black"/>',
        f'<polyline points="{pt(0, 0)} {pt(1, 1)}" fill="none" stroke="#999" stroke-dasharray="4"/>',
        f'<text x="{pad + size / 2}" y="{pad + size + 35}" text-anchor="middle">significance level</text>',
        f'<text x="15" y="{pad + size / 2}" transform="rotate(-90 15 {pad + size / 2})" text-anchor="middle">power</text>',
        f'<text x="{pad + size / 2}" y="30" text-anchor="middle">{title}</text>',
    ]
    legend = []
    if reference is not None:
        pts = " ".join(pt(a, b) for a, b in reference)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="2"/>')
        legend.append(("minimax", "black"))
    for i, rec in enumerate(records):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(pt(a, b) for a, b in [(0.0, 0.0)] + list(rec.roc))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}"/>')
        legend.append((rec.statistic_kind.label, color))
    for i, (name, color) in enumerate(legend):
        y = pad + 15 + 18 * i
        parts.append(f'<line x1="{pad + size + 15}" y1="{y - 4}" x2="{pad + size + 35}" y2="{y - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{pad + size + 40}" y="{y}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def minimax_reference(scenario: ScenarioSpec, grid) -> list[tuple[float, float]] | None:
    """Minimax curve over ``grid`` for a balanced mean-shift scenario, else None."""
    n, m = scenario.sizes
    if scenario.kind != "mean_shift" or n != m:
        return None
    return [
        (float(a), minimax_power(float(a), scenario.d, n, scenario.shift**2, scenario.sigma))
        for a in grid
        if 0 < a < 1
    ]
