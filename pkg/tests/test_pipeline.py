import math
from dataclasses import replace

import pytest

from rqas.pes import decay_constant
from rqas.pipeline import (
    CurveCache,
    PipelineConfig,
    load_config,
    parse_config_text,
    predicted_severity,
    results_from_csv,
    results_to_csv,
    results_to_json,
    run_pipeline,
)
from rqas.report import emit_plots, linear_fit
from rqas.variants import Severity, VariantDataset, VariantRecord, builtin_dataset
from rqas.vqe import EVALUATIONS

ORDER = ["WT", "T457N", "L341S", "Y368H", "E417Q", "R91W", "D470N", "H241R"]


def tiny_ab_initio(tmp_path, **kw):
    base = dict(mode="ab-initio", points=3, iterations=2, n_layers=1, margin=1.0, out_dir=str(tmp_path))
    base.update(kw)
    return PipelineConfig(**base)


def two_variant_dataset():
    ds = builtin_dataset()
    return VariantDataset((ds.lookup("WT"), ds.lookup("R91W")))


def test_defaults_follow_protocol():
    cfg = PipelineConfig()
    assert cfg.points == 25 and cfg.iterations == 25 and cfg.step_size == 0.4
    with pytest.raises(ValueError):
        PipelineConfig(mode="quantum")


def test_parametric_run():
    run = run_pipeline(PipelineConfig())
    assert [r.variant for r in run.results] == ORDER and not run.errors
    wt = run.by_id()["WT"]
    assert wt.log10_rqas == 0.0 and wt.rqas == 1.0
    ys = [r.log10_rqas for r in run.results]
    assert all(a > b for a, b in zip(ys, ys[1:]))
    assert all(r.mode == "parametric" for r in run.results)


@pytest.mark.parametrize("value, label", [
    (0.0, "Healthy"), (math.log10(3.54e-10), "Mild"), (math.log10(1.47e-18), "Moderate"),
    (math.log10(2.60e-34), "Severe"), (math.log10(9.11e-59), "Severe"), (math.log10(7.66e-74), "Severe"),
    (math.log10(1.63e-85), "Null"),
])
def test_thresholds_reproduce_tabulated_labels(value, label):
    assert predicted_severity(value) == label


def test_threshold_labels_match_dataset():
    for rec in builtin_dataset():
        assert predicted_severity(math.log10(rec.published_rqas)) == rec.severity.name


def test_partial_failure_manifest():
    ds = builtin_dataset()
    extra = VariantRecord("NOPARAM", None, 0.3, 3.0, None, Severity.Severe)
    run = run_pipeline(PipelineConfig(), VariantDataset(ds.records + (extra,)))
    assert len(run.results) == 8 and len(run.errors) == 1
    err = run.errors[0]
    assert err["variant"] == "NOPARAM" and err["stage"] == "parameters" and err["message"]


def test_missing_wildtype_kinetics_fails_everyone():
    ds = builtin_dataset()
    wt = replace(ds.wildtype, V0_kcalmol=None)
    run = run_pipeline(PipelineConfig(), VariantDataset((wt,) + ds.records[1:]))
    assert not run.results and len(run.errors) == 8


def test_variant_subset_and_unknown():
    run = run_pipeline(PipelineConfig(), variants=["R91W"])
    assert [r.variant for r in run.results] == ["WT", "R91W"]
    with pytest.raises(KeyError):
        run_pipeline(PipelineConfig(), variants=["NOSUCH"])


def test_csv_determinism_and_round_trip():
    a = results_to_csv(run_pipeline(PipelineConfig()).results)
    b = results_to_csv(run_pipeline(PipelineConfig()).results)
    assert a == b
    assert a.splitlines()[0] == "variant,d_OO,V0_kcalmol,w_A,log10_Ptunnel,log10_Pthermal,log10_Ptotal,log10_RQAS"
    back = results_from_csv(a)
    assert results_to_csv(back) == a
    assert '"variant": "WT"' in results_to_json(back)


def test_cliff_slope_matches_decay_law(tmp_path):
    # constant V0 and a width that grows one-for-one with d_OO; widths stay small
    # so the thermal channel is negligible next to tunnelling
    v0 = 14.2
    recs = [replace(builtin_dataset().wildtype, V0_kcalmol=v0, width_A=0.05)]
    for i, w in enumerate([0.08, 0.11, 0.15, 0.19, 0.22, 0.25]):
        shift = round(w - 0.05, 12)
        recs.append(VariantRecord(f"S{i}", None, shift, round(2.70 + shift, 12), None, Severity.Mild,
                                  V0_kcalmol=v0, width_A=w))
    run = run_pipeline(PipelineConfig(), VariantDataset(tuple(recs)))
    slope, _ = linear_fit([r.d_oo for r in run.results], [r.log10_rqas for r in run.results])
    expected = -2 * decay_constant(v0) * 1e-10 / math.log(10)
    assert slope == pytest.approx(expected, rel=1e-6)
    written = emit_plots(run.results, None, tmp_path)
    assert {p.name for p in written} == {"cliff.csv", "cliff.svg"}


def test_hashes():
    a = PipelineConfig()
    assert a.physics_hash() == PipelineConfig(out_dir="elsewhere", workers=4).physics_hash()
    assert a.physics_hash() != PipelineConfig(seed=1).physics_hash()
    assert a.scan_hash() == PipelineConfig(mode="ab-initio").scan_hash()
    assert a.scan_hash() != PipelineConfig(margin=0.8).scan_hash()


def test_config_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nmode = ab-initio\nseed = 7\nmargin = 0.9\ncache = no\ndataset = none\n")
    cfg = load_config(p, seed=11)
    assert cfg.mode == "ab-initio" and cfg.seed == 11 and cfg.margin == 0.9 and cfg.cache is False
    assert cfg.dataset is None
    for bad in ["nonsense", "colour = red", "cache = maybe"]:
        with pytest.raises(ValueError):
            parse_config_text(bad)


def test_distance_source_switch():
    run = run_pipeline(PipelineConfig(distance_source="Table3"))
    assert run.by_id()["E417Q"].d_oo == 3.20


def test_ab_initio_cache_skips_vqe(tmp_path):
    cfg = tiny_ab_initio(tmp_path)
    ds = two_variant_dataset()
    first = run_pipeline(cfg, ds)
    assert not first.errors and len(first.results) == 2
    wt = first.by_id()["WT"]
    assert wt.log10_rqas == 0.0 and wt.V0 > 0
    assert CurveCache(tmp_path).path(cfg.scan_hash(), "R91W").exists()
    before = EVALUATIONS["vqe_runs"]
    second = run_pipeline(cfg, ds)
    assert EVALUATIONS["vqe_runs"] == before
    assert results_to_csv(second.results) == results_to_csv(first.results)


def test_ab_initio_uncached_deterministic(tmp_path):
    cfg = tiny_ab_initio(tmp_path, cache=False, seed=3)
    ds = VariantDataset((builtin_dataset().wildtype,))
    a = results_to_csv(run_pipeline(cfg, ds).results)
    b = results_to_csv(run_pipeline(cfg, ds).results)
    assert a == b


def test_ab_initio_scan_failure_collected(tmp_path):
    ds = builtin_dataset()
    squeezed = VariantRecord("SQZ", None, -0.55, 2.15, None, Severity.Healthy)
    cfg = tiny_ab_initio(tmp_path, margin=1.1)
    run = run_pipeline(cfg, VariantDataset((ds.wildtype, squeezed)))
    assert [r.variant for r in run.results] == ["WT"]
    assert run.errors[0]["variant"] == "SQZ" and run.errors[0]["stage"] == "scan"


def test_self_referenced_barriers(tmp_path):
    cfg = tiny_ab_initio(tmp_path, barrier_reference="self")
    run = run_pipeline(cfg, VariantDataset((builtin_dataset().wildtype,)))
    b = run.barriers["WT"]
    assert b.reference_energy == min(run.curves["WT"].energies)
