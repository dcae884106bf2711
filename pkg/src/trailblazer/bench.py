"""PAC coverage experiments, complexity-exponent fits and report files."""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .baselines import SparseSamplingConfig, monte_carlo_eval, sparse_sampling
from .mdp import ContinuousToy, ContractError, GenerativeModel, TabularMdp, exact_value, horizon_for_tolerance
from .planner import BudgetExceeded, PlannerConfig, RunCounter, plan, sample_budget

PLANNERS = ("trailblazer", "sparse", "monte_carlo")
COLUMNS = ("epsilon", "delta", "seed", "estimate", "truth", "success", "oracle_calls",
           "transition_calls", "reward_calls", "depth", "wall_time_ms")


@dataclass
class ExperimentSpec:
    model: GenerativeModel
    epsilons: Sequence[float]
    deltas: Sequence[float] = (0.1,)
    trials: int = 1
    base_seed: int = 0
    planner: str = "trailblazer"
    call_cap: int | None = None
    sparse: SparseSamplingConfig = field(default_factory=lambda: SparseSamplingConfig(16, 4))
    engine: str = "auto"
    source: str = ""

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ContractError("trials must be >= 1")
        if not self.epsilons or any(not e > 0 for e in self.epsilons):
            raise ContractError("epsilon grid must be nonempty and positive")
        if not self.deltas or any(not 0 < d < 1 for d in self.deltas):
            raise ContractError("delta grid must be nonempty and inside (0, 1)")
        if self.planner not in PLANNERS:
            raise ContractError(f"unknown planner {self.planner!r}; choose from {PLANNERS}")


@dataclass
class TrialRecord:
    epsilon: float
    delta: float
    seed: int
    estimate: float | None
    truth: float | None
    success: bool | None
    oracle_calls: int
    transition_calls: int
    reward_calls: int
    depth: int | None
    wall_time_ms: float | None
    budget_exceeded: bool = False

    def row(self) -> dict:
        return {c: getattr(self, c) for c in COLUMNS}


@dataclass
class Truth:
    value: float
    width: float


def truth_for(model: GenerativeModel, tol: float) -> Truth | None:
    """Reference value of the root with bracket width at most ``tol``, if one is known."""
    if isinstance(model, TabularMdp):
        b = exact_value(model, horizon_for_tolerance(model.gamma, tol))
        return Truth((b.lower + b.upper) / 2.0, b.width)
    if isinstance(model, ContinuousToy):
        return Truth(model.root_value(), 0.0)
    return None


def _run_trial(spec: ExperimentSpec, eps: float, delta: float, seed: int) -> TrialRecord:
    model = spec.model
    root = model.root
    if spec.planner == "trailblazer":
        cfg = PlannerConfig(model.gamma, delta, eps, call_cap=spec.call_cap)
        try:
            r = plan(model, cfg, seed, engine=spec.engine)
        except BudgetExceeded as exc:
            c = exc.counter
            return TrialRecord(eps, delta, seed, None, None, None, c.oracle_calls, c.transition_calls,
                               c.reward_calls, exc.max_depth, None, budget_exceeded=True)
        return TrialRecord(eps, delta, seed, r.estimate, None, None, r.oracle_calls, r.transition_calls,
                           r.reward_calls, r.max_depth_reached, r.wall_time * 1000.0)
    rng = np.random.default_rng(seed)
    counter = RunCounter()
    start = time.perf_counter()
    if spec.planner == "monte_carlo":
        m = sample_budget(model.gamma, delta, eps)
        action = root.action if root.kind == "avg" else 0
        est = monte_carlo_eval(model, root.state, m, eps / 2.0, rng, counter, action=action)
    else:
        est = sparse_sampling(model, root.state, spec.sparse, rng, counter)
    wall = (time.perf_counter() - start) * 1000.0
    return TrialRecord(eps, delta, seed, est, None, None, counter.oracle_calls, counter.transition_calls,
                       counter.reward_calls, None, wall)


def run_pac_experiment(spec: ExperimentSpec) -> list[TrialRecord]:
    """Run ``spec.trials`` seeded trials per (epsilon, delta) cell; trial ``i`` uses seed ``base_seed + i``.

    A trial succeeds when ``|estimate - V| <= epsilon``.  Success is left
    undefined (``None``) when no reference value with bracket width below
    ``epsilon/10`` exists.  Records come back ordered by (epsilon, delta, seed).
    """
    eps_grid = sorted(set(float(e) for e in spec.epsilons))
    delta_grid = sorted(set(float(d) for d in spec.deltas))
    truth = truth_for(spec.model, min(eps_grid) / 20.0)
    records = []
    for eps in eps_grid:
        for delta in delta_grid:
            for i in range(spec.trials):
                rec = _run_trial(spec, eps, delta, spec.base_seed + i)
                if truth is not None and truth.width < eps / 10.0:
                    rec.truth = truth.value
                    rec.success = rec.estimate is not None and abs(rec.estimate - truth.value) <= eps
                records.append(rec)
    return records


def binomial_upper_quantile(n: int, p: float, q: float = 0.999) -> int:
    """Smallest ``k`` with ``P(Binomial(n, p) <= k) >= q``."""
    return int(stats.binom.ppf(q, n, p))


@dataclass
class CellSummary:
    epsilon: float
    delta: float
    trials: int
    failures: int | None
    failure_bound: int
    coverage_ok: bool | None
    mean_calls: float
    max_depth: int | None
    budget_exceeded: int


def summarize(records: Iterable[TrialRecord], quantile: float = 0.999) -> list[CellSummary]:
    """Per-cell failure counts against the exact binomial bound, plus call statistics.

    ``failures`` and ``coverage_ok`` are ``None`` for cells without a usable
    reference value.
    """
    cells: dict[tuple[float, float], list[TrialRecord]] = {}
    for r in records:
        cells.setdefault((r.epsilon, r.delta), []).append(r)
    out = []
    for (eps, delta), recs in sorted(cells.items()):
        n = len(recs)
        bound = binomial_upper_quantile(n, delta, quantile)
        if all(r.success is not None for r in recs):
            failures = sum(1 for r in recs if not r.success)
            ok = failures <= bound
        else:
            failures, ok = None, None
        depths = [r.depth for r in recs if r.depth is not None]
        out.append(CellSummary(eps, delta, n, failures, bound, ok,
                               float(np.mean([r.oracle_calls for r in recs])),
                               max(depths) if depths else None,
                               sum(r.budget_exceeded for r in recs)))
    return out


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    r_squared: float
    residuals: list[float]
    n_points: int


def fit_complexity_exponent(records: Iterable[TrialRecord] | dict[float, Sequence[float]],
                            level: float = 0.95) -> ExponentFit:
    """OLS of ``ln(mean oracle calls)`` on ``ln(1/epsilon)``.

    Accepts trial records or a mapping ``epsilon -> call counts``.  Needs at
    least four distinct epsilon values.
    """
    if isinstance(records, dict):
        groups = {float(e): list(v) for e, v in records.items()}
    else:
        groups = {}
        for r in records:
            groups.setdefault(float(r.epsilon), []).append(r.oracle_calls)
    if len(groups) < 4:
        raise ContractError(f"need at least 4 distinct epsilon values, got {len(groups)}")
    eps = np.array(sorted(groups))
    means = np.array([np.mean(groups[e]) for e in eps])
    if np.any(means <= 0):
        raise ContractError("mean call counts must be positive")
    x, y = np.log(1.0 / eps), np.log(means)
    res = stats.linregress(x, y)
    n = len(x)
    if n > 2:
        t = stats.t.ppf(0.5 + level / 2.0, n - 2)
        half = t * res.stderr
    else:
        half = math.inf
    resid = (y - (res.intercept + res.slope * x)).tolist()
    return ExponentFit(float(res.slope), float(res.intercept), float(res.stderr),
                       float(res.slope - half), float(res.slope + half), float(res.rvalue ** 2),
                       resid, n)


def demand_inversions(records: Iterable[TrialRecord]) -> tuple[int, int]:
    """Adjacent epsilon pairs (per delta) where mean calls rise with epsilon by more than 5%."""
    by_delta: dict[float, dict[float, list[int]]] = {}
    for r in records:
        by_delta.setdefault(r.delta, {}).setdefault(r.epsilon, []).append(r.oracle_calls)
    bad = total = 0
    for cells in by_delta.values():
        eps = sorted(cells)
        means = [np.mean(cells[e]) for e in eps]
        for a, b in zip(means, means[1:]):
            total += 1
            if b > a * 1.05:
                bad += 1
    return bad, total


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_report(records: Sequence[TrialRecord], fmt: str, path: str | Path,
                timing: bool = False) -> Path:
    """Write records as CSV or JSON with a fixed column order.

    Floats use the shortest decimal that round-trips.  Wall time is left
    empty unless ``timing`` is set, so that reports of identical runs are
    byte-identical.
    """
    if not records:
        raise ContractError("no records to write")
    if fmt not in ("csv", "json"):
        raise ContractError(f"unknown format {fmt!r}")
    path = Path(path)
    rows = []
    for r in records:
        row = r.row()
        if not timing:
            row["wall_time_ms"] = None
        rows.append(row)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for row in rows:
                w.writerow([_fmt(row[c]) for c in COLUMNS])
    else:
        path.write_text(json.dumps(rows, indent=1) + "\n")
    return path


_INT_COLS = {"seed", "oracle_calls", "transition_calls", "reward_calls", "depth"}


def _parse(col: str, text: str):
    if text == "":
        return None
    if col == "success":
        return text == "true"
    if col in _INT_COLS:
        return int(text)
    return float(text)


def read_report(path: str | Path) -> list[dict]:
    """Parse a report written by :func:`emit_report` (format taken from the suffix or content)."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("["):
        return [{c: row.get(c) for c in COLUMNS} for row in json.loads(text)]
    reader = csv.DictReader(text.splitlines())
    return [{c: _parse(c, row[c]) for c in COLUMNS} for row in reader]


def records_from_rows(rows: Iterable[dict]) -> list[TrialRecord]:
    out = []
    for row in rows:
        out.append(TrialRecord(**{c: row.get(c) for c in COLUMNS},
                               budget_exceeded=row.get("estimate") is None))
    return out
