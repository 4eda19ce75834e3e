"""Monte Carlo size and power studies.

Replication ``r`` draws its two samples from the substreams
``(seed, r, "data1")`` and ``(seed, r, "data2")`` and its bootstrap
multipliers from ``(seed, r, "boot")``, so results do not depend on the
number of workers or on which methods are enabled. Power studies reuse
the same base samples at every shift (common random numbers).
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import yaml

from .baselines import sst_test
from .elliptical import PopulationSpec, RadialSpec, ShapeSpec, sample_population
from .errors import ConfigError, NumericalError
from .pipeline import pdq_test
from .rng import substream

logger = logging.getLogger(__name__)

MODELS = {
    "normal": RadialSpec.normal(),
    "t3": RadialSpec.student_t(3.0),
    "mixnormal": RadialSpec.mixture(0.8, 3.0),
}
METHODS = ("pdq", "sst")
MAX_FAILURE_RATE = 0.01


class StudyFailed(NumericalError):
    module = "harness"


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "size"
    n1: int = 50
    n2: int = 50
    p: int = 100
    model: str = "normal"
    shape: str = "ar1"
    rho: float = 0.9
    alpha_pdq: float = 0.5
    B: int = 200
    level: float = 0.05
    reps: int = 2000
    seed: int = 0
    methods: tuple = ("pdq", "sst")
    delta_grid: tuple = ()
    signal: str = "dense"

    def __post_init__(self):
        if self.mode not in ("size", "power"):
            raise ConfigError(f"mode must be 'size' or 'power', got {self.mode!r}")
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {sorted(MODELS)}, got {self.model!r}")
        if self.shape not in ("ar1", "cs"):
            raise ConfigError(f"shape must be 'ar1' or 'cs', got {self.shape!r}")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if min(self.n1, self.n2) < 2 or self.p < 2:
            raise ConfigError("need n1, n2 >= 2 and p >= 2")
        if not 0 < self.level <= 1:
            raise ConfigError("level must lie in (0, 1]")
        if not 0 < self.alpha_pdq < 1:
            raise ConfigError("alpha_pdq must lie in (0, 1)")
        if self.B < 19:
            raise ConfigError("B must be >= 19")
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise ConfigError(f"methods must be a nonempty subset of {METHODS}, got {list(self.methods)}")
        if self.mode == "power" and not self.delta_grid:
            raise ConfigError("power mode needs a nonempty delta_grid")
        if self.signal != "dense":
            raise ConfigError("only the dense shift delta * 1/sqrt(p) is supported")
        try:
            self.population(1)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def population(self, group: int, delta: float = 0.0) -> PopulationSpec:
        shape = ShapeSpec.ar1(self.rho) if self.shape == "ar1" else ShapeSpec.cs(self.rho)
        theta = None
        if group == 2 and delta != 0.0:
            theta = np.full(self.p, delta / math.sqrt(self.p))
        return PopulationSpec(self.p, shape, MODELS[self.model], theta=theta)

    def to_dict(self):
        out = asdict(self)
        out["methods"] = list(self.methods)
        out["delta_grid"] = list(self.delta_grid)
        return out


GRID_FIELDS = ("n1", "n2", "p", "shape", "model")


def parse_config(mapping: dict, **overrides) -> list[ExperimentConfig]:
    """Build configs from a flat mapping.

    ``n1``, ``n2``, ``p``, ``shape`` and ``model`` may be lists, in which
    case one config per combination is returned (``n2`` follows ``n1`` when
    omitted). Keys not in :class:`ExperimentConfig` are rejected.
    """
    data = dict(mapping or {})
    data.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "n2" not in data and "n1" in data:
        data["n2"] = data["n1"]
        paired = True
    else:
        paired = False
    for key in ("methods", "delta_grid"):
        if key in data:
            v = data[key]
            data[key] = tuple(v) if isinstance(v, (list, tuple)) else (v,)
    if "delta_grid" in data:
        data["delta_grid"] = tuple(float(d) for d in data["delta_grid"])
    axes = {}
    for key in GRID_FIELDS:
        v = data.pop(key, None)
        if v is None:
            continue
        axes[key] = list(v) if isinstance(v, (list, tuple)) else [v]
    if paired:
        axes.pop("n2")
    keys = list(axes)
    configs = []
    for combo in itertools.product(*(axes[k] for k in keys)):
        cell = dict(zip(keys, combo))
        if paired:
            cell["n2"] = cell["n1"]
        try:
            configs.append(ExperimentConfig(**data, **cell))
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
    return configs


def load_config(path, **overrides) -> list[ExperimentConfig]:
    try:
        with open(path) as fh:
            mapping = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if mapping is not None and not isinstance(mapping, dict):
        raise ConfigError("config file must hold a flat key-value mapping")
    return parse_config(mapping, **overrides)


def _replicate(config: ExperimentConfig, rep: int, deltas):
    """Rejection flags ``{(delta, method): bool | None}`` for one replication."""
    seed = config.seed
    base1 = sample_population(config.population(1), config.n1, substream(seed, rep, "data1"))
    base2 = sample_population(config.population(2), config.n2, substream(seed, rep, "data2"))
    out = {}
    for delta in deltas:
        x2 = base2 + delta / math.sqrt(config.p) if delta else base2
        for method in config.methods:
            try:
                if method == "pdq":
                    res = pdq_test(base1, x2, config.alpha_pdq, config.B, config.level,
                                   substream(seed, rep, "boot"))
                    out[(delta, method)] = bool(res.reject)
                else:
                    out[(delta, method)] = bool(sst_test(base1, x2, config.level).reject)
            except NumericalError as exc:
                logger.debug("replication %d, %s failed: %s", rep, method, exc)
                out[(delta, method)] = None
    return out


def _run_chunk(args):
    config, reps, deltas = args
    return [(r, _replicate(config, r, deltas)) for r in reps]


def _run_replications(config, deltas, workers):
    reps = list(range(config.reps))
    if workers <= 1:
        results = _run_chunk((config, reps, deltas))
    else:
        size = max(1, math.ceil(len(reps) / (4 * workers)))
        chunks = [(config, reps[i:i + size], deltas) for i in range(0, len(reps), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [item for part in pool.map(_run_chunk, chunks) for item in part]
    results.sort(key=lambda item: item[0])
    return [res for _, res in results]


@dataclass
class Cell:
    n1: int
    n2: int
    p: int
    model: str
    shape: str
    rho: float
    delta: float
    method: str
    rejections: int
    reps_ok: int
    failures: int

    @property
    def rate(self):
        return self.rejections / self.reps_ok if self.reps_ok else float("nan")

    @property
    def se(self):
        r = self.rate
        return math.sqrt(r * (1 - r) / self.reps_ok) if self.reps_ok else float("nan")


@dataclass
class StudyReport:
    mode: str
    cells: list = field(default_factory=list)
    level: float = 0.05
    wall_clock: float = 0.0
    configs: list = field(default_factory=list)

    def rate(self, method, **where):
        hits = [c for c in self.cells if c.method == method
                and all(getattr(c, k) == v for k, v in where.items())]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} cells match {method} {where}")
        return hits[0].rate

    def are(self):
        """``sum |100 rate - 100 level|`` per (method, model, shape) over the grid."""
        out = {}
        for c in self.cells:
            key = f"{c.method}_{c.model}_{c.shape}"
            out[key] = out.get(key, 0.0) + abs(100 * c.rate - 100 * self.level)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.mode == "size":
            cols = sorted({(c.method, c.model, c.shape) for c in self.cells})
            rows = sorted({(c.n1, c.n2, c.p) for c in self.cells})
            names = [f"{m}_{mod}_{s}" for m, mod, s in cols]
            w.writerow(["n1", "n2", "p"] + names + [f"{nm}_se" for nm in names])
            index = {(c.n1, c.n2, c.p, c.method, c.model, c.shape): c for c in self.cells}
            for row in rows:
                cells = [index.get(row + col) for col in cols]
                w.writerow(list(row) + [_fmt(c.rate if c else None) for c in cells]
                           + [_fmt(c.se if c else None) for c in cells])
            are = self.are()
            w.writerow(["ARE", "", ""] + [_fmt(are[nm]) for nm in names] + [""] * len(names))
        else:
            cols = sorted({(c.method, c.model, c.shape) for c in self.cells})
            names = [f"{m}_{mod}_{s}" for m, mod, s in cols]
            w.writerow(["delta"] + names + [f"{nm}_se" for nm in names])
            index = {(c.delta, c.method, c.model, c.shape): c for c in self.cells}
            for delta in sorted({c.delta for c in self.cells}):
                cells = [index.get((delta,) + col) for col in cols]
                w.writerow([_fmt(delta)] + [_fmt(c.rate if c else None) for c in cells]
                           + [_fmt(c.se if c else None) for c in cells])
        return buf.getvalue()

    def to_dict(self):
        return {
            "mode": self.mode,
            "level": self.level,
            "wall_clock_seconds": self.wall_clock,
            "cells": [dict(asdict(c), rate=c.rate, se=c.se) for c in self.cells],
            "ARE": self.are() if self.mode == "size" else None,
            "configs": [c.to_dict() for c in self.configs],
        }


def _fmt(x):
    if x is None:
        return ""
    return repr(float(x))


def read_report_csv(text: str) -> dict:
    """Parse an emitted CSV back into ``{row key: {column: value}}``."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    nkey = 3 if header[0] == "n1" else 1
    out = {}
    for row in reader:
        key = tuple(row[:nkey]) if nkey > 1 else row[0]
        out[key] = {h: (float(v) if v != "" else None) for h, v in zip(header[nkey:], row[nkey:])}
    return out


def _tally(config, results, deltas):
    cells = []
    for delta in deltas:
        for method in config.methods:
            flags = [res[(delta, method)] for res in results]
            ok = [f for f in flags if f is not None]
            failures = len(flags) - len(ok)
            if failures > MAX_FAILURE_RATE * len(flags):
                raise StudyFailed(
                    f"{method}: {failures} of {len(flags)} replications failed numerically "
                    f"(n1={config.n1}, p={config.p}, {config.model}/{config.shape})"
                )
            cells.append(Cell(config.n1, config.n2, config.p, config.model, config.shape, config.rho,
                              delta, method, sum(ok), len(ok), failures))
    return cells


def run_size_study(configs, workers: int = 1) -> StudyReport:
    """Null rejection rates for every config (a single config or a grid)."""
    configs = [configs] if isinstance(configs, ExperimentConfig) else list(configs)
    start = time.perf_counter()
    report = StudyReport("size", level=configs[0].level, configs=configs)
    for config in configs:
        if config.mode != "size":
            raise ConfigError("run_size_study needs mode='size'")
        results = _run_replications(config, (0.0,), workers)
        report.cells.extend(_tally(config, results, (0.0,)))
    report.wall_clock = time.perf_counter() - start
    return report


def run_power_study(configs, workers: int = 1) -> StudyReport:
    """Rejection rates along ``delta_grid`` with shift ``delta * 1/sqrt(p)`` on sample 2."""
    configs = [configs] if isinstance(configs, ExperimentConfig) else list(configs)
    start = time.perf_counter()
    report = StudyReport("power", level=configs[0].level, configs=configs)
    for config in configs:
        if config.mode != "power":
            raise ConfigError("run_power_study needs mode='power'")
        deltas = tuple(config.delta_grid)
        results = _run_replications(config, deltas, workers)
        report.cells.extend(_tally(config, results, deltas))
    report.wall_clock = time.perf_counter() - start
    return report


def run_study(configs, workers=1):
    configs = list(configs)
    modes = {c.mode for c in configs}
    if len(modes) != 1:
        raise ConfigError("all configs in one study must share a mode")
    return run_size_study(configs, workers) if modes == {"size"} else run_power_study(configs, workers)


def write_report(report: StudyReport, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{report.mode}.csv"
    csv_path.write_text(report.to_csv())
    json_path = out / f"{report.mode}_report.json"
    json_path.write_text(json.dumps(report.to_dict(), indent=2))
    return {"csv": str(csv_path), "json": str(json_path)}


def with_seed(configs, seed):
    return [replace(c, seed=seed) for c in configs]


def run_test(x1_path, x2_path, alpha=0.5, B=200, level=0.05, seed=0, out=None) -> dict:
    """Feasible PDQ test on two CSV samples; returns (and optionally writes) the JSON report."""
    from .dataio import read_sample_csv

    x1 = read_sample_csv(x1_path, "x1")
    x2 = read_sample_csv(x2_path, "x2")
    outcome = pdq_test(x1, x2, alpha=alpha, B=B, level=level, rng=substream(seed, 0, "boot"))
    report = outcome.to_dict()
    report["config"].update({"x1": str(x1_path), "x2": str(x2_path), "seed": seed})
    if out is not None:
        Path(out).write_text(json.dumps(report, indent=2))
    return report
