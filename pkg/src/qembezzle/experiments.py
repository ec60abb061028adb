"""Experiment harness: declarative configs, CSV results, and run manifests.

Each experiment is a pure function of its configuration (seed included),
so a run manifest pins everything needed to reproduce its CSV byte for
byte. Floats are serialised with 12 significant digits.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .convex_split import CatalystSearchQuery, min_copies_search
from .correlated import qutrit_region_map
from .distill import convex_split_plan, embezzle_plan
from .embezzle import (
    EXACT_RESIDUAL_RANK_CAP,
    _extraction_overlap,
    catalyst_residual,
    extraction_fidelity_bound,
    schmidt_rank_for_fidelity,
)
from .errors import ConfigError, QEmbezzleError
from .fixtures import LABEL_KINDS, fixture_label, fixture_row_count, load_fixture
from .qstates import SeededRng, maximally_mixed, random_density, read_density
from .teleport import average_fidelity_from_fraction, entanglement_fraction

EXPERIMENTS = (
    "fidelity",
    "nmin",
    "montecarlo",
    "embezzle",
    "consumption",
    "qutrit-map",
    "distill",
)

_DEFAULT_EPS_GRID = {
    "nmin": [0.02, 0.05, 0.1, 0.15, 0.2],
    "embezzle": [0.05, 0.1, 0.15, 0.2, 0.3],
    "distill": [0.1, 0.2, 0.3],
}


@dataclass
class ExperimentConfig:
    experiment: str
    d: int = 2
    epsilon: float | None = None
    epsilon_grid: list[float] = field(default_factory=list)
    candidates: int = 100
    samples: int = 200
    seed: int = 0
    state_source: str | None = None
    output_path: str = "results.csv"
    resolution: int = 100
    threshold: float = 0.9
    margin: float = 0.01
    m_values: list[int] = field(default_factory=list)
    threads: int = 1

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.d < 2:
            raise ConfigError("d", f"must be >= 2, got {self.d}")
        if self.samples < 1:
            raise ConfigError("samples", f"must be >= 1, got {self.samples}")
        if self.candidates < 0:
            raise ConfigError("candidates", f"must be >= 0, got {self.candidates}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if self.threads < 1:
            raise ConfigError("threads", f"must be >= 1, got {self.threads}")
        for i, eps in enumerate(self.epsilon_grid):
            if not 0.0 < eps < 1.0:
                raise ConfigError(f"epsilon_grid[{i}]", f"must lie in (0, 1), got {eps}")
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise ConfigError("epsilon", f"must lie in (0, 1), got {self.epsilon}")
        for i, m in enumerate(self.m_values):
            if m < 1:
                raise ConfigError(f"m_values[{i}]", f"must be >= 1, got {m}")
        if self.experiment == "qutrit-map" and self.resolution < 50:
            raise ConfigError("resolution", f"must be >= 50, got {self.resolution}")

    def eps_values(self) -> list[float]:
        if self.epsilon_grid:
            return list(self.epsilon_grid)
        if self.epsilon is not None:
            return [self.epsilon]
        default = _DEFAULT_EPS_GRID.get(self.experiment)
        if default is None:
            raise ConfigError("epsilon", "this experiment needs epsilon or epsilon_grid")
        return list(default)


def config_from_dict(doc: dict) -> ExperimentConfig:
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    for key in doc:
        if key not in known:
            raise ConfigError(key, "unknown configuration field")
    if "experiment" not in doc:
        raise ConfigError("experiment", "missing required field")
    try:
        cfg = ExperimentConfig(**doc)
    except TypeError as exc:
        raise ConfigError("<config>", str(exc)) from exc
    cfg.validate()
    return cfg


def _resolve_states(cfg: ExperimentConfig, default: str) -> list[tuple[str, int, object]]:
    """Expand a state-source spec into (origin, row, DensityMatrix) triples."""
    src = cfg.state_source or default
    if src == "random":
        rho = random_density(cfg.d * cfg.d, SeededRng(cfg.seed).derive(0x5EED), split=(cfg.d, cfg.d))
        return [("random", 0, rho)]
    if src.startswith("file:"):
        return [("file", 0, read_density(src[5:]))]
    if src.startswith("fixture:"):
        parts = src.split(":")
        if len(parts) == 2:
            table = parts[1]
            return [
                (table, row, load_fixture(table, row)) for row in range(fixture_row_count(table))
            ]
        if len(parts) == 3:
            table, row = parts[1], int(parts[2])
            return [(table, row, load_fixture(table, row))]
    raise ConfigError("state_source", f"cannot parse {src!r}")


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    return str(value)


@dataclass(frozen=True)
class ResultTable:
    header: tuple[str, ...]
    rows: tuple[tuple, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def parse_result_csv(text: str) -> ResultTable:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    return ResultTable(header=tuple(rows[0]), rows=tuple(tuple(r) for r in rows[1:]))


# ---------------------------------------------------------------------------
# Experiment bodies
# ---------------------------------------------------------------------------


def _run_fidelity(cfg: ExperimentConfig) -> ResultTable:
    rows = []
    sources = (
        _resolve_states(cfg, "fixture:I")
        if cfg.state_source
        else [
            (t, r, load_fixture(t, r))
            for t in ("I", "II", "III", "reference")
            for r in range(fixture_row_count(t))
        ]
    )
    for table, row, state in sources:
        frac = entanglement_fraction(state)
        avg = average_fidelity_from_fraction(frac, state.split_a)
        label = fixture_label(table, row) if table in LABEL_KINDS else None
        rows.append(
            (
                table,
                row,
                "" if label is None else _fmt(float(label)),
                LABEL_KINDS.get(table) or "",
                frac,
                avg,
            )
        )
    return ResultTable(
        header=("table", "row", "label", "label_kind", "fraction", "avg_fidelity"),
        rows=tuple(rows),
    )


def _run_nmin(cfg: ExperimentConfig) -> ResultTable:
    _, _, rho = _resolve_states(cfg, "fixture:reference:0")[0]
    rows = []
    for idx, eps in enumerate(cfg.eps_values()):
        query = CatalystSearchQuery(
            rho=rho,
            epsilon=eps,
            candidate_count=cfg.candidates,
            rng=SeededRng(cfg.seed).derive((idx + 1) << 32),
        )
        res = min_copies_search(query)
        rows.append((eps, res.n_mixed, res.n_best, res.p_mixed, res.p_best, res.ratio))
    return ResultTable(
        header=("epsilon", "n_mixed", "n_best", "p_mixed", "p_best", "descent_ratio"),
        rows=tuple(rows),
    )


def _montecarlo_sample(cfg: ExperimentConfig, index: int) -> tuple:
    master = SeededRng(cfg.seed)
    rho = random_density(cfg.d * cfg.d, master.derive(2 * index + 1), split=(cfg.d, cfg.d))
    f0 = average_fidelity_from_fraction(entanglement_fraction(rho), cfg.d)
    gen = master.derive(2 * index + 2).generator()
    eps = float(gen.uniform(0.0, 1.0 - f0))
    eps = min(max(eps, 1e-9), 1.0 - 1e-9)
    query = CatalystSearchQuery(
        rho=rho, epsilon=eps, candidate_count=cfg.candidates, rng=master.derive((index + 1) << 20)
    )
    res = min_copies_search(query)
    return (index, eps, f0, res.n_mixed, res.n_best, res.ratio)


def _run_montecarlo(cfg: ExperimentConfig) -> ResultTable:
    indices = range(cfg.samples)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(lambda i: _montecarlo_sample(cfg, i), indices))
    else:
        rows = [_montecarlo_sample(cfg, i) for i in indices]
    return ResultTable(
        header=("sample", "epsilon", "avg_fidelity_unassisted", "n_mixed", "n_best", "descent_ratio"),
        rows=tuple(rows),
    )


def _run_embezzle(cfg: ExperimentConfig) -> ResultTable:
    rows = []
    for eps in cfg.eps_values():
        rank = schmidt_rank_for_fidelity(cfg.d, eps)
        bound = extraction_fidelity_bound(cfg.d, rank)
        exact = (
            _extraction_overlap(cfg.d, rank) ** 2 if rank <= EXACT_RESIDUAL_RANK_CAP else math.nan
        )
        avg_lb = average_fidelity_from_fraction(bound, cfg.d)
        rows.append((eps, rank, bound, exact, avg_lb))
    return ResultTable(
        header=("epsilon", "schmidt_rank", "fraction_bound", "fraction_exact", "avg_fidelity_lb"),
        rows=tuple(rows),
    )


def _run_consumption(cfg: ExperimentConfig) -> ResultTable:
    m_values = cfg.m_values or list(range(max(cfg.d, 4), 65))
    rows = []
    for m in m_values:
        res = catalyst_residual(cfg.d, m)
        rows.append((cfg.d, m, res.p_exact, res.p_closed_form, res.p_bound))
    return ResultTable(
        header=("d", "schmidt_rank", "p_exact", "p_closed_form", "p_bound"),
        rows=tuple(rows),
    )


def _run_qutrit_map(cfg: ExperimentConfig) -> ResultTable:
    region = qutrit_region_map(cfg.resolution, cfg.threshold, cfg.margin)
    rows = [
        (
            pt.weights[0],
            pt.weights[1],
            pt.weights[2],
            pt.fidelity,
            pt.correlated_bound,
            pt.label_correlated.value,
            pt.label_embezzling.value,
            pt.rank_required,
        )
        for pt in region.points
    ]
    return ResultTable(
        header=(
            "lambda1",
            "lambda2",
            "lambda3",
            "f",
            "correlated_bound",
            "label_correlated",
            "label_embezzling",
            "M_required",
        ),
        rows=tuple(rows),
    )


def _run_distill(cfg: ExperimentConfig) -> ResultTable:
    rows = []
    zeta = maximally_mixed(cfg.d * cfg.d, split=(cfg.d, cfg.d))
    for table, row, state in _resolve_states(cfg, "fixture:III"):
        for eps in cfg.eps_values():
            plan_cs = convex_split_plan(state, zeta, eps)
            rows.append(
                (
                    table,
                    row,
                    eps,
                    "CS",
                    plan_cs.p,
                    plan_cs.copies,
                    plan_cs.k,
                    plan_cs.exact_output_fidelity,
                    "exact",
                    plan_cs.predicted_consumption,
                )
            )
            plan_e = embezzle_plan(cfg.d, eps)
            rows.append(
                (
                    table,
                    row,
                    eps,
                    "E",
                    "",
                    plan_e.schmidt_rank,
                    "",
                    plan_e.predicted_fidelity_lb,
                    "bound",
                    plan_e.predicted_consumption,
                )
            )
    return ResultTable(
        header=(
            "table",
            "row",
            "epsilon",
            "kind",
            "p",
            "copies_or_rank",
            "k",
            "fidelity",
            "fidelity_kind",
            "consumption",
        ),
        rows=tuple(rows),
    )


_RUNNERS = {
    "fidelity": _run_fidelity,
    "nmin": _run_nmin,
    "montecarlo": _run_montecarlo,
    "embezzle": _run_embezzle,
    "consumption": _run_consumption,
    "qutrit-map": _run_qutrit_map,
    "distill": _run_distill,
}


@dataclass(frozen=True)
class RunResult:
    table: ResultTable
    csv_path: Path
    manifest_path: Path
    manifest: dict


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run one experiment, writing its CSV and reproduction manifest."""
    cfg.validate()
    start = time.perf_counter()
    table = _RUNNERS[cfg.experiment](cfg)
    wall = time.perf_counter() - start

    csv_text = table.to_csv()
    csv_path = Path(cfg.output_path)
    if csv_path.parent != Path(""):
        csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(csv_text, encoding="utf-8", newline="")

    manifest = {
        "config": asdict(cfg),
        "seed": cfg.seed,
        "versions": {
            "qembezzle": __version__,
            "numpy": np.__version__,
        },
        "wall_time_s": wall,
        "csv_path": str(csv_path),
        "csv_sha256": hashlib.sha256(csv_text.encode("utf-8")).hexdigest(),
    }
    manifest_path = csv_path.with_name(csv_path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return RunResult(table=table, csv_path=csv_path, manifest_path=manifest_path, manifest=manifest)


def replay_manifest(manifest_path: str | Path, output_path: str | Path | None = None) -> RunResult:
    """Re-run the manifest's config and require a byte-identical CSV."""
    doc = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    cfg = config_from_dict(doc["config"])
    if output_path is not None:
        cfg.output_path = str(output_path)
    result = run_experiment(cfg)
    if result.manifest["csv_sha256"] != doc["csv_sha256"]:
        raise QEmbezzleError(
            "replay mismatch: csv digest "
            f"{result.manifest['csv_sha256']} != recorded {doc['csv_sha256']}"
        )
    return result
