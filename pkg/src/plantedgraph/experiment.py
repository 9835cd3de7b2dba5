"""Monte Carlo experiments: configuration, trial runner, aggregation and persistence.

Trial ``i`` draws its null graph from stream ``(base_seed, i, 0)`` and its
planted graph from ``(base_seed, i, 1)``, so results do not depend on how
trials are scheduled across workers.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
import functools
import hashlib
import io
import itertools
import json
import math
import time

import numpy as np

from . import __version__
from .exceptions import InvalidParameterError, PlantedGraphError
from .graphs import FAMILIES, Graph, build_family, er_sample, plant, read_graph, sigma
from .sdp import SdpParams, sdp_test
from .spectral import identification_condition, identify, significant_set, spectral_test
from .stats import exhaustive_test
from .validation import check_int, check_probability

METHODS = ("spectral", "sdp", "exhaustive", "identify")
NULL, PLANTED = 0, 1
TAGS = {NULL: "null", PLANTED: "planted"}

METHOD_PARAMS = {
    "spectral": {"tol", "constant", "eigen_method"},
    "exhaustive": {"budget"},
    "sdp": {"slack_rel", "tol", "max_iter", "rho", "route"},
    "identify": {"k", "refine_eps", "tol", "eigen_method", "delta", "c"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment's output.

    Attributes:
        family: a name from :data:`graphs.FAMILIES` or ``"custom-file"``.
        family_params: constructor arguments, e.g. ``{"k": 48}``.
        graph_file: path of ``H`` when ``family == "custom-file"``.
        n: vertices of the observed graph.
        q0: null edge probability.
        method: one of ``spectral``, ``sdp``, ``exhaustive``, ``identify``.
        trials: number of (null, planted) pairs.
        base_seed: root of all trial seed streams.
        method_params: method options (tolerances, slack, ``delta``, ``c``, ...).
        time_budget: optional wall-clock seconds per trial; slower trials are
            marked ``over_budget`` (this makes the report timing-dependent).
        record_timing: store per-trial wall time in the records.
    """

    family: str = "clique"
    family_params: dict = field(default_factory=lambda: {"k": 10})
    n: int = 100
    q0: float = 0.5
    method: str = "spectral"
    trials: int = 10
    base_seed: int = 0
    method_params: dict = field(default_factory=dict)
    graph_file: str | None = None
    time_budget: float | None = None
    record_timing: bool = False

    def validate(self) -> "ExperimentConfig":
        if self.family != "custom-file" and self.family not in FAMILIES:
            raise InvalidParameterError(
                f"unknown family {self.family!r}; choose from {sorted(FAMILIES) + ['custom-file']}")
        if self.family == "custom-file" and not self.graph_file:
            raise InvalidParameterError("family 'custom-file' needs graph_file")
        check_int(self.n, "n", minimum=2)
        check_int(self.trials, "trials", minimum=1)
        check_int(self.base_seed, "base_seed", minimum=0)
        check_probability(self.q0, "q0", low_open=True, high_open=True)
        if self.method not in METHODS:
            raise InvalidParameterError(f"unknown method {self.method!r}; choose from {METHODS}")
        unknown = set(self.method_params) - METHOD_PARAMS[self.method]
        if unknown:
            raise InvalidParameterError(f"unknown {self.method} parameters {sorted(unknown)}")
        if self.time_budget is not None and not self.time_budget > 0:
            raise InvalidParameterError("time_budget must be positive")
        H = self.hidden_graph()
        if H.n > self.n:
            raise InvalidParameterError(f"v(H)={H.n} exceeds n={self.n}")
        if H.m == 0:
            raise InvalidParameterError("H must have at least one edge")
        return self

    def hidden_graph(self) -> Graph:
        if self.family == "custom-file":
            return read_graph(self.graph_file)
        return _family(self.family, tuple(sorted(self.family_params.items())))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise InvalidParameterError(f"unknown config fields {sorted(extra)}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidParameterError(f"{path}: {exc}") from None
        d.pop("grid", None)
        return cls.from_dict(d)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        d = self.to_dict()
        for key, val in kw.items():
            if val is None:
                continue
            if key.startswith("family_params."):
                d["family_params"] = dict(d["family_params"], **{key.split(".", 1)[1]: val})
            elif key.startswith("method_params."):
                d["method_params"] = dict(d["method_params"], **{key.split(".", 1)[1]: val})
            else:
                d[key] = val
        return ExperimentConfig.from_dict(d)

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


@functools.lru_cache(maxsize=64)
def _family(name, items):
    return build_family(name, **dict(items))


# ------------------------------------------------------------------ trials


def _apply(config: ExperimentConfig, H: Graph, G: Graph, planted_set):
    mp = config.method_params
    if config.method == "spectral":
        o = spectral_test(G, config.q0, tol=mp.get("tol", 1e-8), method=mp.get("eigen_method", "auto"),
                          constant=mp.get("constant", 2.1))
        return {"statistic": o.statistic, "threshold": o.threshold, "decision": o.decision}
    if config.method == "exhaustive":
        o = exhaustive_test(G, H, config.q0, budget=mp.get("budget", 10**8))
        return {"statistic": o.statistic, "threshold": o.threshold, "decision": o.decision}
    if config.method == "sdp":
        params = SdpParams(**{k: mp[k] for k in ("slack_rel", "tol", "max_iter", "rho", "route") if k in mp})
        o = sdp_test(G, H, params)
        return {"statistic": o.statistic, "threshold": o.threshold, "decision": o.decision,
                "route": o.metadata["route"], "reliable": o.reliable}
    k = int(mp.get("k", H.n))
    res = identify(G, config.q0, k, method=mp.get("eigen_method", "secular"), tol=mp.get("tol", 1e-6),
                   refine_eps=mp.get("refine_eps"))
    chosen = res.refined if res.refined is not None else res.selected
    chosen = set(chosen)
    rec = {"statistic": float(len(chosen)), "threshold": res.threshold,
           "decision": int(bool(chosen)), "selected": sorted(i + 1 for i in chosen),
           "false_vertices": len(chosen - planted_set)}
    if planted_set:
        tp = len(chosen & planted_set)
        rec.update(precision=tp / len(chosen) if chosen else 1.0,
                   recall=tp / len(planted_set), exact=chosen == planted_set)
    return rec


def run_trial(config: ExperimentConfig, trial: int, hypothesis: int, H: Graph | None = None) -> dict:
    """One method application on the null or planted graph of ``trial``; errors are recorded."""
    H = H if H is not None else config.hidden_graph()
    rec = {"trial": trial, "hypothesis": TAGS[hypothesis],
           "seed": [config.base_seed, trial, hypothesis]}
    t0 = time.perf_counter()
    try:
        if hypothesis == NULL:
            G = er_sample(config.n, config.q0, seed=config.base_seed, stream=(trial, NULL))
            planted_set = set()
        else:
            inst = plant(config.n, config.q0, H, seed=config.base_seed, stream=(trial, PLANTED))
            G = inst.graph
            planted_set = set(inst.planted_vertices.tolist())
        rec.update(_apply(config, H, G, planted_set))
        if config.method == "identify" and "c" in config.method_params and planted_set:
            sig = significant_set(H, config.method_params["c"])
            targets = {int(inst.hidden.targets[i]) for i in sig}
            chosen = {i - 1 for i in rec["selected"]}
            rec["significant_recovered"] = targets <= chosen
        rec["error"] = None
    except (PlantedGraphError, np.linalg.LinAlgError) as exc:
        rec.update(statistic=None, threshold=None, decision=None,
                   error=f"{type(exc).__name__}: {exc}")
    elapsed = time.perf_counter() - t0
    if config.record_timing:
        rec["wall_time"] = elapsed
    if config.time_budget is not None:
        rec["over_budget"] = elapsed > config.time_budget
    return rec


def _rate(values):
    return float(np.mean(values)) if values else None


def aggregate(records: list, method: str) -> dict:
    """Error rates (and identification scores) recomputed from trial records."""
    null = [r for r in records if r["hypothesis"] == "null" and r["error"] is None]
    alt = [r for r in records if r["hypothesis"] == "planted" and r["error"] is None]
    fpr = _rate([r["decision"] for r in null])
    fnr = _rate([1 - r["decision"] for r in alt])
    out = {"false_positive_rate": fpr, "false_negative_rate": fnr,
           "risk": None if fpr is None or fnr is None else fpr + fnr,
           "null_trials": len(null), "planted_trials": len(alt),
           "errors": sum(r["error"] is not None for r in records),
           "over_budget": sum(bool(r.get("over_budget")) for r in records)}
    if method == "identify":
        out["precision"] = _rate([r["precision"] for r in alt])
        out["recall"] = _rate([r["recall"] for r in alt])
        out["exact_recovery_rate"] = _rate([float(r["exact"]) for r in alt])
        out["zero_false_rate"] = _rate([float(r["false_vertices"] == 0) for r in alt])
        out["null_empty_rate"] = _rate([float(r["false_vertices"] == 0) for r in null])
        sig = [float(r["significant_recovered"]) for r in alt if "significant_recovered" in r]
        if sig:
            out["significant_recovery_rate"] = _rate(sig)
    return out


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    records: list
    aggregates: dict
    environment: dict

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "records": self.records,
                "aggregates": self.aggregates, "environment": self.environment}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        return records_to_csv(report_rows(self))


def environment(config: ExperimentConfig) -> dict:
    return {"package": "plantedgraph", "version": __version__,
            "numpy": np.__version__, "config_hash": config.config_hash()}


def run_experiment(config: ExperimentConfig, n_jobs: int = 1) -> ExperimentReport:
    """Run ``config.trials`` null and planted trials, possibly in parallel.

    Per-trial failures are stored in the record's ``error`` field and left
    out of the rates; the batch always completes.
    """
    config.validate()
    H = config.hidden_graph()
    jobs = [(i, h) for i in range(config.trials) for h in (NULL, PLANTED)]
    if n_jobs == 1:
        records = [run_trial(config, i, h, H) for i, h in jobs]
    else:
        from joblib import Parallel, delayed
        records = Parallel(n_jobs=n_jobs)(delayed(run_trial)(config, i, h, H) for i, h in jobs)
    aggregates = aggregate(records, config.method)
    if config.method == "identify" and "delta" in config.method_params and H.n >= 3:
        aggregates["condition"] = identification_condition(
            H, config.n, config.q0, config.method_params["delta"]).to_dict()
    return ExperimentReport(config, records, aggregates, environment(config))


def report_from_json(text: str) -> dict:
    return json.loads(text)


# ------------------------------------------------------------------- sweeps

CSV_FIELDS = ("point", "family", "family_params", "n", "q0", "sigma", "method", "trial",
              "hypothesis", "seed", "statistic", "threshold", "decision", "error")


def report_rows(report: ExperimentReport, point: int = 0, extra: dict | None = None) -> list:
    c = report.config
    rows = []
    for r in report.records:
        row = {"point": point, "family": c.family,
               "family_params": json.dumps(c.family_params, sort_keys=True),
               "n": c.n, "q0": c.q0, "sigma": sigma(c.q0), "method": c.method,
               "trial": r["trial"], "hypothesis": r["hypothesis"],
               "seed": "-".join(str(s) for s in r["seed"]),
               "statistic": r["statistic"], "threshold": r["threshold"],
               "decision": r["decision"], "error": r["error"]}
        row.update(extra or {})
        rows.append(row)
    return rows


def records_to_csv(rows: list) -> str:
    buf = io.StringIO()
    fields = list(CSV_FIELDS)
    for row in rows:
        fields += [k for k in row if k not in fields]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: "" if row.get(k) is None else row.get(k) for k in fields})
    return buf.getvalue()


def _parse_cell(s):
    if s == "":
        return None
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def csv_to_records(text: str) -> list:
    """Inverse of :func:`records_to_csv`: numbers come back as ``int``/``float``, blanks as ``None``."""
    return [{k: _parse_cell(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


def grid_points(base: ExperimentConfig, grid: dict) -> list:
    """Cartesian product of ``grid`` applied to ``base``.

    Keys are config fields, ``family_params.<name>``, ``method_params.<name>``
    or ``k_ratio``, which sets ``family_params.k = ceil(ratio * sigma(q0) * sqrt(n))``.
    An empty grid (or any empty value list) yields no points.
    """
    if not grid:
        return []
    keys = sorted(grid)
    points = []
    for values in itertools.product(*(grid[k] for k in keys)):
        over = dict(zip(keys, values))
        ratio = over.pop("k_ratio", None)
        cfg = base.with_overrides(**over)
        if ratio is not None:
            k = math.ceil(ratio * sigma(cfg.q0) * math.sqrt(cfg.n))
            cfg = cfg.with_overrides(**{"family_params.k": k})
        points.append((dict(zip(keys, values)), cfg))
    return points


@dataclass(frozen=True)
class SweepResult:
    points: list
    reports: list

    def rows(self) -> list:
        out = []
        for idx, (over, rep) in enumerate(zip(self.points, self.reports)):
            extra = {f"grid.{k}": v for k, v in over.items()}
            out.extend(report_rows(rep, idx, extra))
        return out

    def to_csv(self) -> str:
        return records_to_csv(self.rows())

    def to_dict(self) -> dict:
        return {"points": [{"grid": p, "report": r.to_dict()} for p, r in zip(self.points, self.reports)]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def sweep(base: ExperimentConfig, grid: dict, n_jobs: int = 1) -> SweepResult:
    """Run :func:`run_experiment` at every grid point."""
    pts = grid_points(base, grid)
    return SweepResult([p for p, _ in pts], [run_experiment(c, n_jobs) for _, c in pts])
