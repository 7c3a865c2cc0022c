"""End-to-end variant scoring: geometry -> PES -> barrier -> kinetics -> RQAS."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .pes import (
    BarrierParams,
    PESCurve,
    ScanOptions,
    barrier_width,
    extract_barrier,
    log10_rqas,
    scan_pes,
    tunneling_probability,
)
from .variants import VariantDataset, builtin_dataset, load_dataset

log = logging.getLogger(__name__)

MODES = ("parametric", "ab-initio")

# Predicted label cut points on log10 RQAS, highest first.
SEVERITY_THRESHOLDS = (
    (-1.0, "Healthy"),
    (-15.0, "Mild"),
    (-25.0, "Moderate"),
    (-80.0, "Severe"),
)

RESULT_COLUMNS = [
    "variant", "d_OO", "V0_kcalmol", "w_A",
    "log10_Ptunnel", "log10_Pthermal", "log10_Ptotal", "log10_RQAS",
]


def predicted_severity(log10_rqas_value: float) -> str:
    for cut, label in SEVERITY_THRESHOLDS:
        if log10_rqas_value >= cut:
            return label
    return "Null"


@dataclass(frozen=True)
class PipelineConfig:
    dataset: str | None = None  # path; None means the built-in table
    distance_source: str = "Table1"
    mode: str = "parametric"
    n_layers: int = 3
    iterations: int = 25
    step_size: float = 0.4
    seed: int = 0
    points: int = 25
    margin: float = 1.0
    penalty_weight: float = 1.0
    warm_start: bool = True
    barrier_reference: str = "wildtype"  # or "self"
    out_dir: str = "rqas_out"
    cache: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.barrier_reference not in ("wildtype", "self"):
            raise ValueError("barrier_reference must be 'wildtype' or 'self'")

    def scan_options(self) -> ScanOptions:
        return ScanOptions(
            points=self.points,
            margin=self.margin,
            n_layers=self.n_layers,
            iterations=self.iterations,
            step_size=self.step_size,
            seed=self.seed,
            warm_start=self.warm_start,
            penalty_weight=self.penalty_weight,
        )

    def physics_hash(self) -> str:
        """Hash over every option that changes numbers (not paths or worker counts)."""
        keys = ["mode", "n_layers", "iterations", "step_size", "seed", "points", "margin",
                "penalty_weight", "warm_start", "barrier_reference"]
        blob = json.dumps({k: getattr(self, k) for k in keys}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def scan_hash(self) -> str:
        keys = ["n_layers", "iterations", "step_size", "seed", "points", "margin",
                "penalty_weight", "warm_start"]
        blob = json.dumps({k: getattr(self, k) for k in keys}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def load_dataset(self) -> VariantDataset:
        ds = builtin_dataset() if self.dataset is None else load_dataset(self.dataset)
        if self.distance_source != "Table1":
            ds = ds.with_alternate(self.distance_source)
        return ds


_BOOL = {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    types = {f.name: f.type for f in fields(PipelineConfig)}
    out = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ValueError(f"config line {n}: unknown key {key!r}")
        t = str(types[key])
        if "bool" in t:
            if value.lower() not in _BOOL:
                raise ValueError(f"config line {n}: {key} needs a boolean")
            out[key] = _BOOL[value.lower()]
        elif "int" in t:
            out[key] = int(value)
        elif "float" in t:
            out[key] = float(value)
        elif value.lower() in ("", "none"):
            out[key] = None
        else:
            out[key] = value
    return out


def load_config(path, **overrides) -> PipelineConfig:
    values = parse_config_text(Path(path).read_text()) if path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig(**values)


@dataclass(frozen=True)
class RQASResult:
    variant: str
    d_oo: float
    V0: float
    w: float
    log10_P_tunnel: float
    log10_P_thermal: float
    log10_P_total: float
    log10_rqas: float
    severity_predicted: str
    mode: str
    config_hash: str

    @property
    def rqas(self) -> float:
        return 10.0**self.log10_rqas

    def row(self) -> list:
        return [
            self.variant, repr(self.d_oo), repr(self.V0), repr(self.w), repr(self.log10_P_tunnel),
            repr(self.log10_P_thermal), repr(self.log10_P_total), repr(self.log10_rqas),
        ]


@dataclass
class PipelineRun:
    results: list
    errors: list  # {"variant", "stage", "message"}
    curves: dict = field(default_factory=dict)
    barriers: dict = field(default_factory=dict)
    config: PipelineConfig | None = None

    def by_id(self) -> dict:
        return {r.variant: r for r in self.results}


# --- cache ------------------------------------------------------------------------


class CurveCache:
    """One JSON file per (scan hash, variant) under ``<out>/cache``."""

    def __init__(self, root, enabled: bool = True):
        self.root = Path(root) / "cache"
        self.enabled = enabled

    def path(self, scan_hash: str, variant: str) -> Path:
        return self.root / f"{scan_hash}_{variant}.json"

    def get(self, scan_hash: str, variant: str, d_oo: float) -> PESCurve | None:
        if not self.enabled:
            return None
        p = self.path(scan_hash, variant)
        if not p.exists():
            return None
        try:
            raw = json.loads(p.read_text())
        except json.JSONDecodeError:
            return None
        if raw.get("d_oo") != d_oo:
            return None
        return PESCurve.from_dict(raw)

    def put(self, scan_hash: str, variant: str, curve: PESCurve) -> None:
        if not self.enabled:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        self.path(scan_hash, variant).write_text(json.dumps(curve.to_dict(), sort_keys=True))


def _scan_job(args):
    d_oo, opts = args
    return scan_pes(d_oo, opts)


# --- orchestration -----------------------------------------------------------------


def _curves(config: PipelineConfig, dataset: VariantDataset, errors: list) -> dict:
    cache = CurveCache(config.out_dir, config.cache)
    key = config.scan_hash()
    opts = config.scan_options()
    curves, todo = {}, []
    for rec in dataset:
        hit = cache.get(key, rec.id, rec.d_oo)
        if hit is not None:
            curves[rec.id] = hit
        else:
            todo.append(rec)
    if config.workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {rec.id: pool.submit(_scan_job, (rec.d_oo, opts)) for rec in todo}
            outcomes = {}
            for vid, fut in futures.items():
                try:
                    outcomes[vid] = fut.result()
                except Exception as exc:  # noqa: BLE001
                    outcomes[vid] = exc
    else:
        outcomes = {}
        for rec in todo:
            try:
                outcomes[rec.id] = scan_pes(rec.d_oo, opts)
            except Exception as exc:  # noqa: BLE001
                outcomes[rec.id] = exc
    for rec in todo:
        res = outcomes[rec.id]
        if isinstance(res, Exception):
            errors.append({"variant": rec.id, "stage": "scan", "message": str(res)})
            log.error("scan failed for %s: %s", rec.id, res)
        else:
            curves[rec.id] = res
            cache.put(key, rec.id, res)
    return curves


def run_pipeline(config: PipelineConfig, dataset: VariantDataset | None = None,
                 variants: list | None = None) -> PipelineRun:
    """Score every variant (or the listed ones plus WT) against the wild type.

    Failures are collected per variant; a failing wild type fails everything
    because nothing can be normalised.
    """
    dataset = dataset or config.load_dataset()
    if variants is not None:
        wanted = set(variants) | {"WT"}
        for v in variants:
            dataset.lookup(v)
        dataset = VariantDataset(tuple(r for r in dataset if r.id in wanted))
    errors: list = []
    barriers: dict = {}
    curves: dict = {}
    if config.mode == "parametric":
        for rec in dataset:
            if rec.V0_kcalmol is None or rec.width_A is None:
                errors.append({"variant": rec.id, "stage": "parameters",
                               "message": "no tabulated V0/width for parametric mode"})
                continue
            barriers[rec.id] = BarrierParams(rec.V0_kcalmol, rec.width_A, rec.d_oo)
    else:
        curves = _curves(config, dataset, errors)
        ref = None
        if config.barrier_reference == "wildtype" and "WT" in curves:
            ref = min(curves["WT"].energies)
        for rec in dataset:
            if rec.id not in curves:
                continue
            if config.barrier_reference == "wildtype" and ref is None:
                continue
            try:
                barriers[rec.id] = extract_barrier(curves[rec.id], reference_energy=ref)
            except Exception as exc:  # noqa: BLE001
                errors.append({"variant": rec.id, "stage": "barrier", "message": str(exc)})

    kin = {}
    for rec in dataset:
        if rec.id not in barriers:
            continue
        try:
            kin[rec.id] = tunneling_probability(barriers[rec.id])
        except Exception as exc:  # noqa: BLE001
            errors.append({"variant": rec.id, "stage": "kinetics", "message": str(exc)})

    results = []
    failed = {e["variant"] for e in errors}
    wt = kin.get("WT")
    for rec in dataset:
        if rec.id in failed:
            continue
        if wt is None:
            errors.append({"variant": rec.id, "stage": "rqas",
                           "message": "wild-type reference unavailable"})
            continue
        p = kin[rec.id]
        lr = log10_rqas(p, wt)
        b = barriers[rec.id]
        results.append(RQASResult(
            variant=rec.id, d_oo=rec.d_oo, V0=b.V0, w=b.w,
            log10_P_tunnel=p.log10_P_tunnel, log10_P_thermal=p.log10_P_thermal,
            log10_P_total=p.log10_P_total, log10_rqas=lr,
            severity_predicted=predicted_severity(lr),
            mode=config.mode, config_hash=config.physics_hash(),
        ))
    return PipelineRun(results, errors, curves, barriers, config)


def results_to_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in results:
        w.writerow(r.row())
    return buf.getvalue()


def results_from_csv(text: str, mode: str = "unknown", config_hash: str = "") -> list:
    out = []
    for raw in csv.DictReader(io.StringIO(text)):
        lr = float(raw["log10_RQAS"])
        out.append(RQASResult(
            variant=raw["variant"], d_oo=float(raw["d_OO"]), V0=float(raw["V0_kcalmol"]),
            w=float(raw["w_A"]), log10_P_tunnel=float(raw["log10_Ptunnel"]),
            log10_P_thermal=float(raw["log10_Pthermal"]), log10_P_total=float(raw["log10_Ptotal"]),
            log10_rqas=lr, severity_predicted=predicted_severity(lr), mode=mode, config_hash=config_hash,
        ))
    return out


def results_to_json(results) -> str:
    return json.dumps([asdict(r) for r in results], indent=2)


__all__ = [
    "PipelineConfig", "RQASResult", "PipelineRun", "run_pipeline", "predicted_severity",
    "results_to_csv", "results_from_csv", "load_config", "parse_config_text", "barrier_width",
]
