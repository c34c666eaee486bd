"""Sweep harness: random environments, both planners per trial, summaries and trend checks.

Each trial's environment seed is ``derive_seed(master_seed, point, trial,
attempt)``. ``attempt`` only advances when target placement fails, so every
sweep point keeps exactly ``trials`` records.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .errors import GenerationFailedError, InvalidSpecError
from .grid import EnvKind, GenSpec, OccupancyGrid, closed_saturated, derive_seed, generate_environment
from .mapio import parse_map, read_map
from .maxflow import VARIANT
from .oracle import verify_separation
from .planner import (
    parallel_individual_time_bound,
    parallel_individual_time_estimate,
    solve_holistic,
    solve_individual,
)

log = logging.getLogger(__name__)

SWEEPS = ("obstacles", "targets", "size", "none")
MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep. ``start..stop`` is inclusive with stride ``step``.

    ``map`` names a fixed map file (or a bundled map such as ``pathologic``)
    instead of generating environments; the sweep must then be ``none``.
    """

    experiment: str = "custom"
    kind: EnvKind = EnvKind.OPEN
    sweep: str = "obstacles"
    start: int = 10
    stop: int = 10
    step: int = 1
    trials: int = 1
    width: int = 100
    height: int = 100
    targets: tuple = (15, 20)
    obstacles: int = 100
    block_size: int = 3
    seed: int = 0
    margin: int = 2
    rect_min: int = 2
    rect_max: int = 10
    map: Optional[str] = None
    checked: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", EnvKind(self.kind))
        if isinstance(self.targets, int):
            object.__setattr__(self, "targets", (self.targets, self.targets))
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.sweep not in SWEEPS:
            raise InvalidSpecError(f"sweep must be one of {SWEEPS}, got {self.sweep!r}")
        if self.trials < 1:
            raise InvalidSpecError("trials must be >= 1")
        if self.sweep != "none":
            if self.step < 1:
                raise InvalidSpecError("step must be >= 1")
            if self.stop < self.start:
                raise InvalidSpecError("empty sweep range")
        if self.map is not None and self.sweep != "none":
            raise InvalidSpecError("fixed-map experiments cannot sweep")
        if self.map is None:
            self.gen_spec(self.sweep_values()[0], 0)

    def sweep_values(self) -> list[int]:
        if self.sweep == "none":
            return [0]
        return list(range(self.start, self.stop + 1, self.step))

    def gen_spec(self, value: int, seed: int) -> GenSpec:
        spec = GenSpec(
            kind=self.kind, width=self.width, height=self.height, obstacles=self.obstacles,
            targets=self.targets, block_size=self.block_size, seed=seed, rect_min=self.rect_min,
            rect_max=self.rect_max, margin=self.margin,
        )
        if self.sweep == "obstacles":
            spec = replace(spec, obstacles=value)
        elif self.sweep == "targets":
            spec = replace(spec, targets=(value, value))
        elif self.sweep == "size":
            spec = replace(spec, width=value, height=value)
        return spec


@dataclass
class TrialRecord:
    """One environment's outcome. Field order is the CSV column order."""

    experiment: str
    point: int
    sweep_value: int
    trial: int
    seed: int
    attempts: int
    kind: str
    width: int
    height: int
    obstacles: int
    saturated: bool
    m: int
    robots_individual: int
    robots_holistic: int
    savings: Optional[int]
    feasible_individual: bool
    feasible_holistic: bool
    oracle_verified: Optional[bool]
    solver: str
    time_individual_total: float
    time_individual_parallel: float
    time_individual_max: float
    time_holistic: float


TIMING_COLUMNS = ("time_individual_total", "time_individual_parallel", "time_individual_max", "time_holistic")
CSV_COLUMNS = tuple(f.name for f in fields(TrialRecord))


def load_bundled_map(name: str) -> OccupancyGrid:
    text = resources.files("cordon").joinpath("data", f"{name}.map").read_text(encoding="ascii")
    return parse_map(text).grid


def _load_map(ref: str) -> OccupancyGrid:
    if resources.files("cordon").joinpath("data", f"{ref}.map").is_file():
        return load_bundled_map(ref)
    return read_map(ref).grid


def evaluate(grid: OccupancyGrid, checked: bool = True) -> dict:
    """Run both planners on ``grid``; the per-trial fields of a :class:`TrialRecord`."""
    ind = solve_individual(grid)
    hol = solve_holistic(grid)
    both = ind.feasible and hol.feasible
    savings = ind.count - hol.count if both else None
    verified = None
    if checked:
        verified = True
        if ind.feasible:
            verified &= verify_separation(grid, ind.robots)
        if hol.feasible:
            verified &= verify_separation(grid, hol.robots)
        if savings is not None and savings < 0:
            log.error("dominance violated: individual=%d holistic=%d", ind.count, hol.count)
    return dict(
        m=grid.m,
        robots_individual=ind.count,
        robots_holistic=hol.count,
        savings=savings,
        feasible_individual=ind.feasible,
        feasible_holistic=hol.feasible,
        oracle_verified=verified,
        solver=VARIANT,
        time_individual_total=ind.solve_time,
        time_individual_parallel=parallel_individual_time_estimate(ind),
        time_individual_max=parallel_individual_time_bound(ind),
        time_holistic=hol.solve_time,
    )


def run_trial(cfg: ExperimentConfig, point: int, trial: int) -> TrialRecord:
    value = cfg.sweep_values()[point]
    if cfg.map is not None:
        grid = _load_map(cfg.map)
        return TrialRecord(
            experiment=cfg.experiment, point=point, sweep_value=value, trial=trial, seed=0,
            attempts=1, kind="map", width=grid.width, height=grid.height,
            obstacles=int(grid.obstacle_mask.sum()), saturated=False,
            **evaluate(grid, cfg.checked),
        )
    for attempt in range(MAX_ATTEMPTS):
        seed = derive_seed(cfg.seed, point, trial, attempt)
        spec = cfg.gen_spec(value, seed)
        try:
            grid = generate_environment(spec)
        except GenerationFailedError as exc:
            log.info("point %d trial %d attempt %d discarded (seed %d): %s",
                     point, trial, attempt, seed, exc)
            continue
        return TrialRecord(
            experiment=cfg.experiment, point=point, sweep_value=value, trial=trial, seed=seed,
            attempts=attempt + 1, kind=spec.kind.value, width=spec.width, height=spec.height,
            obstacles=spec.obstacles, saturated=closed_saturated(spec),
            **evaluate(grid, cfg.checked),
        )
    raise GenerationFailedError(f"point {point} trial {trial}: no valid environment in {MAX_ATTEMPTS} attempts")


def _run_task(args):
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> list[TrialRecord]:
    """All trials of ``cfg`` ordered by (point, trial)."""
    tasks = [(cfg, p, t) for p in range(len(cfg.sweep_values())) for t in range(cfg.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
    else:
        records = [_run_task(t) for t in tasks]
    return records


# ---------------------------------------------------------------------------
# CSV

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def records_to_csv(records: Sequence[TrialRecord], timing: bool = True) -> str:
    columns = [c for c in CSV_COLUMNS if timing or c not in TIMING_COLUMNS]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        row = asdict(rec)
        writer.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def _parse_cell(name: str, text: str):
    ftype = {f.name: f.type for f in fields(TrialRecord)}[name]
    if text == "":
        return None
    if "bool" in ftype:
        return text == "1"
    if "float" in ftype:
        return float(text)
    if "int" in ftype:
        return int(text)
    return text


def records_from_csv(text: str) -> list[TrialRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        values = {name: _parse_cell(name, row.get(name, "")) for name in CSV_COLUMNS}
        for name in TIMING_COLUMNS:
            if values[name] is None:
                values[name] = math.nan
        out.append(TrialRecord(**values))
    return out


# ---------------------------------------------------------------------------
# summaries

PERCENTILES = (5, 25, 50, 75, 95)


@dataclass(frozen=True)
class Percentiles:
    p5: float
    p25: float
    median: float
    p75: float
    p95: float

    @classmethod
    def of(cls, values) -> "Percentiles":
        # nearest rank: the ceil(p/100 * n)-th smallest value
        q = np.percentile(np.asarray(values, dtype=float), PERCENTILES, method="inverted_cdf")
        return cls(*(float(x) for x in q))


@dataclass(frozen=True)
class PointSummary:
    point: int
    sweep_value: int
    n: int
    n_feasible: int
    mean_savings: float
    savings: Percentiles
    time_individual_total: Percentiles
    time_individual_parallel: Percentiles
    time_holistic: Percentiles
    time_ratio: Percentiles  # holistic / parallel individual


@dataclass
class SweepSummary:
    experiment: str
    points: list = field(default_factory=list)

    @property
    def sweep_values(self) -> list[int]:
        return [p.sweep_value for p in self.points]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        series = ("savings", "time_individual_total", "time_individual_parallel", "time_holistic", "time_ratio")
        header = ["point", "sweep_value", "n", "n_feasible", "mean_savings"]
        header += [f"{s}_{q}" for s in series for q in ("p5", "p25", "median", "p75", "p95")]
        writer.writerow(header)
        for p in self.points:
            row = [p.point, p.sweep_value, p.n, p.n_feasible, f"{p.mean_savings:.6f}"]
            for s in series:
                pc = getattr(p, s)
                row += [f"{getattr(pc, q):.6f}" for q in ("p5", "p25", "median", "p75", "p95")]
            writer.writerow(row)
        return buf.getvalue()


def summarize(records: Sequence[TrialRecord]) -> SweepSummary:
    """Nearest-rank order statistics per sweep point, over feasible trials."""
    by_point: dict[int, list[TrialRecord]] = {}
    for rec in records:
        by_point.setdefault(rec.point, []).append(rec)
    summary = SweepSummary(records[0].experiment if records else "")
    for point in sorted(by_point):
        recs = by_point[point]
        ok = [r for r in recs if r.savings is not None]
        if not ok:
            log.warning("sweep point %d has no feasible trials; excluded", point)
            continue
        savings = [r.savings for r in ok]
        summary.points.append(PointSummary(
            point=point,
            sweep_value=recs[0].sweep_value,
            n=len(recs),
            n_feasible=len(ok),
            mean_savings=float(np.mean(savings)),
            savings=Percentiles.of(savings),
            time_individual_total=Percentiles.of([r.time_individual_total for r in ok]),
            time_individual_parallel=Percentiles.of([r.time_individual_parallel for r in ok]),
            time_holistic=Percentiles.of([r.time_holistic for r in ok]),
            time_ratio=Percentiles.of([r.time_holistic / r.time_individual_parallel for r in ok]),
        ))
    return summary


@dataclass
class TrendReport:
    """Qualitative findings; ``None`` means not applicable or inconclusive."""

    interior_peak: Optional[bool] = None
    size_decline: Optional[bool] = None
    timing_crossover: Optional[bool] = None
    target_growth: Optional[bool] = None
    details: dict = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"note: {self.details['all']}"] if "all" in self.details else []
        for name in ("interior_peak", "size_decline", "timing_crossover", "target_growth"):
            value = getattr(self, name)
            verdict = "n/a" if value is None else ("yes" if value else "no")
            extra = self.details.get(name, "")
            out.append(f"{name}: {verdict}" + (f" ({extra})" if extra else ""))
        return out


def trend_checks(summary: SweepSummary, sweep: str = "obstacles") -> TrendReport:
    """Qualitative shape checks on a summarized sweep.

    * obstacles: the best median savings lies strictly inside the range, and
      the holistic / parallel-individual time ratio falls as obstacles grow
      (negative Spearman correlation of point medians).
    * size: median savings at the smallest size beats the largest.
    * targets: mean savings at the largest count is at least twice that at
      the smallest count above one.
    """
    report = TrendReport()
    pts = summary.points
    if len(pts) < 3:
        report.details["all"] = "inconclusive: fewer than 3 sweep points"
        return report
    medians = [p.savings.median for p in pts]
    if sweep == "obstacles":
        inner = max(medians[1:-1])
        report.interior_peak = inner > max(medians[0], medians[-1])
        report.details["interior_peak"] = f"medians {medians}"
        ratios = [p.time_ratio.median for p in pts]
        if len(set(ratios)) == 1:
            report.details["timing_crossover"] = "inconclusive: constant time ratio"
        else:
            rho = stats.spearmanr(summary.sweep_values, ratios).statistic
            report.timing_crossover = bool(rho < 0)
            report.details["timing_crossover"] = f"spearman {rho:.3f}"
    elif sweep == "size":
        report.size_decline = medians[0] > medians[-1]
        report.details["size_decline"] = f"medians {medians}"
    elif sweep == "targets":
        nontrivial = [p for p in pts if p.sweep_value > 1]
        low, high = nontrivial[0].mean_savings, nontrivial[-1].mean_savings
        report.target_growth = high >= 2 * low and high > 0
        report.details["target_growth"] = f"mean savings {low:.3f} -> {high:.3f}"
    return report


# ---------------------------------------------------------------------------
# config files

class ConfigError(InvalidSpecError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


_INT_KEYS = {"from": "start", "to": "stop", "step": "step", "trials": "trials", "width": "width",
             "height": "height", "obstacles": "obstacles", "block_size": "block_size", "seed": "seed",
             "margin": "margin", "rect_min": "rect_min", "rect_max": "rect_max"}
_STR_KEYS = {"experiment": "experiment", "kind": "kind", "sweep": "sweep", "map": "map"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the ``[experiment]`` / ``key = value`` config format.

    ``#`` and ``;`` start comment lines. ``targets`` takes ``N`` or ``LO-HI``;
    ``checked`` takes ``true``/``false``. Errors carry the offending line.
    """
    values = {}
    lines_of = {}
    in_section = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if line != "[experiment]":
                raise ConfigError(f"unknown section {line}", lineno)
            in_section = True
            continue
        if not in_section:
            raise ConfigError("expected [experiment] section header", lineno)
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw!r}", lineno)
        if key in lines_of:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        lines_of[key] = lineno
        try:
            if key in _INT_KEYS:
                values[_INT_KEYS[key]] = int(value)
            elif key in _STR_KEYS:
                values[_STR_KEYS[key]] = value
            elif key == "targets":
                lo, _, hi = value.partition("-")
                values["targets"] = (int(lo), int(hi or lo))
            elif key == "checked":
                if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(value)
                values["checked"] = value.lower() in ("true", "1", "yes")
            else:
                raise ConfigError(f"unknown key {key!r}", lineno)
        except ValueError:
            raise ConfigError(f"bad value for {key!r}: {value!r}", lineno) from None
    if not in_section:
        raise ConfigError("missing [experiment] section", 1)
    if values.get("sweep", "obstacles") != "none":
        if values.get("stop", ExperimentConfig.stop) < values.get("start", ExperimentConfig.start):
            raise ConfigError("'to' is below 'from'", lines_of.get("to", lines_of.get("from")))
        if values.get("step", 1) < 1:
            raise ConfigError("'step' must be >= 1", lines_of["step"])
    if values.get("trials", 1) < 1:
        raise ConfigError("'trials' must be >= 1", lines_of["trials"])
    try:
        return ExperimentConfig(**values)
    except ValueError as exc:
        key = _blame(str(exc), lines_of)
        raise ConfigError(str(exc), lines_of.get(key)) from None


def _blame(message: str, lines_of: dict) -> Optional[str]:
    for key in lines_of:
        if key in message:
            return key
    return None


def format_config(cfg: ExperimentConfig) -> str:
    lines = ["[experiment]", f"experiment = {cfg.experiment}"]
    if cfg.map is not None:
        lines += [f"map = {cfg.map}", "sweep = none", f"trials = {cfg.trials}"]
    else:
        lines += [f"kind = {cfg.kind.value}", f"sweep = {cfg.sweep}"]
        if cfg.sweep != "none":
            lines += [f"from = {cfg.start}", f"to = {cfg.stop}", f"step = {cfg.step}"]
        lo, hi = cfg.targets
        lines += [
            f"trials = {cfg.trials}", f"width = {cfg.width}", f"height = {cfg.height}",
            f"targets = {lo}-{hi}" if lo != hi else f"targets = {lo}",
            f"obstacles = {cfg.obstacles}", f"block_size = {cfg.block_size}",
            f"margin = {cfg.margin}", f"rect_min = {cfg.rect_min}", f"rect_max = {cfg.rect_max}",
            f"seed = {cfg.seed}",
        ]
    lines.append(f"checked = {'true' if cfg.checked else 'false'}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())


def bundled_config(name: str) -> ExperimentConfig:
    """A config shipped with the package, e.g. ``exp2`` (desk scale) or ``full_exp2``."""
    text = resources.files("cordon").joinpath("configs", f"{name}.cfg").read_text(encoding="utf-8")
    return parse_config(text)
