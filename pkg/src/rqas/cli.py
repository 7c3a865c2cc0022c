"""Command-line entry point: ``rqas <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .chem_core import build_geometry, sto3g_basis
from .integrals import build_tables
from .pes import ScanOptions, extract_barrier, scan_pes
from .pipeline import (
    PipelineConfig,
    load_config,
    results_from_csv,
    results_to_csv,
    run_pipeline,
)
from .qubit import active_qubit_hamiltonian
from .report import emit_plots, ranking_csv, validate, validate_pairs
from .scf import run_rhf, select_active_space
from .variants import builtin_dataset, dataset_to_csv, dataset_to_json

log = logging.getLogger("rqas")


def _common(parser: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--mode", choices=["parametric", "ab-initio"], default=d)
    parser.add_argument("--seed", type=int, default=d)
    parser.add_argument("--out", default=d, help="output directory")
    parser.add_argument("--config", default=d, help="flat key = value config file")
    parser.add_argument("--dataset", default=d, help="variant CSV/JSON (default: built-in table)")
    parser.add_argument("--no-cache", action="store_true", default=argparse.SUPPRESS if suppress else False)
    parser.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rqas", description="Proton-tunnelling activity scores for enzyme variants")
    _common(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        sp = sub.add_parser(name, **kw)
        _common(sp, suppress=True)
        return sp

    sp = add("pipeline", help="score every variant and write reports")
    sp.add_argument("--no-svg", action="store_true")
    sp.add_argument("--exclude-wt", action="store_true", help="leave WT out of the regression")

    sp = add("scan", help="single PES scan")
    sp.add_argument("--doo", type=float, required=True)
    sp.add_argument("--points", type=int)
    sp.add_argument("--margin", type=float)

    sp = add("variant", help="score one variant against WT")
    sp.add_argument("id")

    sp = add("validate", help="validation statistics from a results CSV")
    sp.add_argument("--results", help="results CSV (default: <out>/results.csv)")
    sp.add_argument("--published", action="store_true", help="use the tabulated RQAS values instead")

    sp = add("export-dataset", help="write the built-in variant table")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--path", help="destination (default: stdout)")

    sp = add("hamiltonian", help="dump the active-space qubit Hamiltonian")
    sp.add_argument("--doo", type=float, required=True)
    sp.add_argument("--z", type=float, required=True)
    return p


def _config(args) -> PipelineConfig:
    return load_config(
        args.config,
        mode=args.mode,
        seed=args.seed,
        out_dir=args.out,
        dataset=args.dataset,
        cache=False if args.no_cache else None,
    )


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _cmd_pipeline(args) -> int:
    cfg = _config(args)
    run = run_pipeline(cfg)
    out = Path(cfg.out_dir)
    ds = cfg.load_dataset()
    _write(out / "results.csv", results_to_csv(run.results))
    _write(out / "errors.json", json.dumps(run.errors, indent=2) + "\n")
    if run.results:
        _write(out / "ranking.csv", ranking_csv(run.results, ds))
    report = None
    try:
        report = validate(run.results, ds, include_wildtype=not args.exclude_wt)
        _write(out / "validation.json", report.to_json() + "\n")
    except ValueError as exc:
        log.warning("validation skipped: %s", exc)
    if run.results:
        emit_plots(run.results, report, out, svg=not args.no_svg)
    for name, curve in sorted(run.curves.items()):
        _write(out / "pes" / f"{name}.csv", curve.to_csv())
    summary = {
        "results": len(run.results),
        "errors": len(run.errors),
        "r2": None if report is None else report.r2,
        "rank_concordance": None if report is None else report.rank_concordance,
        "out": str(out),
    }
    print(json.dumps(summary))
    if run.errors:
        print(json.dumps({"error": "partial failure", "manifest": run.errors}), file=sys.stderr)
        return 1
    return 0


def _cmd_scan(args) -> int:
    cfg = _config(args)
    opts = cfg.scan_options()
    if args.points is not None or args.margin is not None:
        opts = ScanOptions(**{**opts.__dict__,
                              **({"points": args.points} if args.points is not None else {}),
                              **({"margin": args.margin} if args.margin is not None else {})})
    curve = scan_pes(args.doo, opts)
    out = Path(cfg.out_dir)
    stem = f"scan_{args.doo:.4f}"
    _write(out / f"{stem}.csv", curve.to_csv())
    _write(out / f"{stem}.json", json.dumps(curve.to_dict(), sort_keys=True) + "\n")
    b = extract_barrier(curve)
    print(json.dumps({"d_OO": args.doo, "points": len(curve.z), "V0_self_kcalmol": b.V0,
                      "z_at_max": b.z_at_max, "csv": str(out / f"{stem}.csv")}))
    return 0


def _cmd_variant(args) -> int:
    cfg = _config(args)
    run = run_pipeline(cfg, variants=[args.id])
    res = run.by_id().get(args.id)
    if res is None:
        print(json.dumps({"error": "variant failed", "manifest": run.errors}), file=sys.stderr)
        return 1
    payload = {**res.__dict__, "rqas": res.rqas}
    _write(Path(cfg.out_dir) / f"variant_{args.id}.json", json.dumps(payload, indent=2) + "\n")
    print(json.dumps(payload))
    return 0


def _cmd_validate(args) -> int:
    cfg = _config(args)
    ds = cfg.load_dataset()
    if args.published:
        recs = [r for r in ds if r.has_activity and r.published_rqas is not None]
        import math

        report = validate_pairs([r.exp_activity_pct for r in recs],
                                [math.log10(r.published_rqas) for r in recs], [r.id for r in recs])
    else:
        path = Path(args.results) if args.results else Path(cfg.out_dir) / "results.csv"
        if not path.exists():
            raise FileNotFoundError(f"no results at {path}; run the pipeline first")
        report = validate(results_from_csv(path.read_text()), ds)
    print(report.to_json())
    return 0


def _cmd_export(args) -> int:
    ds = builtin_dataset()
    text = dataset_to_json(ds) + "\n" if args.format == "json" else dataset_to_csv(ds)
    if args.path:
        _write(Path(args.path), text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_hamiltonian(args) -> int:
    geom = build_geometry(args.doo, args.z)
    tables = build_tables(geom, sto3g_basis(geom))
    scf = run_rhf(tables, geom.n_electrons)
    if not scf.converged:
        raise RuntimeError("RHF did not converge")
    h = active_qubit_hamiltonian(select_active_space(scf, tables))
    sys.stdout.write(h.to_text())
    return 0


COMMANDS = {
    "pipeline": _cmd_pipeline,
    "scan": _cmd_scan,
    "variant": _cmd_variant,
    "validate": _cmd_validate,
    "export-dataset": _cmd_export,
    "hamiltonian": _cmd_hamiltonian,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except KeyError as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(json.dumps({"error": "KeyError", "message": msg}), file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - reported as JSON
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
