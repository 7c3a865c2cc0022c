"""Variant geometries, measured activities and severity labels."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

WT_DISTANCE_A = 2.70
WT_ID = "WT"

CSV_COLUMNS = ["id", "from", "pos", "to", "shift_A", "dOO_A", "activity_pct", "severity", "source"]
# optional trailing columns carrying the tabulated barrier and reference values
CSV_EXTRA_COLUMNS = [
    "V0_kcalmol", "width_A", "P_tunnel_published", "rqas_published", "alt_dOO_A", "alt_source", "note",
]


class Severity(enum.IntEnum):
    Healthy = 0
    Mild = 1
    Moderate = 2
    Severe = 3
    Null = 4


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class VariantRecord:
    id: str
    substitution: tuple | None  # (from residue, position, to residue)
    shift: float  # Angstrom
    d_oo: float  # Angstrom
    exp_activity_pct: float | None
    severity: Severity
    source: str = "user"  # Table1 | Table3 | user
    impact_note: str = ""
    V0_kcalmol: float | None = None
    width_A: float | None = None
    published_P_tunnel: float | None = None
    published_rqas: float | None = None
    alternates: dict = field(default_factory=dict, compare=True, hash=False)

    def __post_init__(self):
        a = self.exp_activity_pct
        if a is not None and not (0 < a <= 100):
            raise DatasetError(f"{self.id}: activity {a}% outside (0, 100]")

    @property
    def has_activity(self) -> bool:
        return self.exp_activity_pct is not None


@dataclass(frozen=True)
class VariantDataset:
    records: tuple

    def __post_init__(self):
        ids = [r.id for r in self.records]
        seen = set()
        for i, vid in enumerate(ids):
            if vid in seen:
                raise DatasetError(f"duplicate variant id {vid!r} (record {i + 1})")
            seen.add(vid)
        if WT_ID not in seen:
            raise DatasetError("dataset has no WT record")
        wt = self.lookup(WT_ID)
        if abs(wt.shift) > 1e-12 or abs(wt.d_oo - WT_DISTANCE_A) > 1e-12:
            raise DatasetError("WT record must have shift 0 and d_OO = 2.70 A")

    @property
    def wildtype(self) -> VariantRecord:
        return self.lookup(WT_ID)

    def lookup(self, vid: str) -> VariantRecord:
        for r in self.records:
            if r.id == vid:
                return r
        raise KeyError(f"unknown variant {vid!r}")

    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def with_alternate(self, source: str) -> "VariantDataset":
        """Swap in an alternate distance (e.g. ``"Table3"``) wherever one is stored."""
        recs = []
        for r in self.records:
            alt = r.alternates.get(source)
            if alt is not None:
                r = replace(r, d_oo=alt, shift=round(alt - WT_DISTANCE_A, 12), source=source)
            recs.append(r)
        return VariantDataset(tuple(recs))


def _rec(vid, sub, shift, d, act, sev, note, v0, a, p, rq, alternates=None):
    return VariantRecord(
        id=vid,
        substitution=sub,
        shift=shift,
        d_oo=d,
        exp_activity_pct=act,
        severity=sev,
        source="Table1",
        impact_note=note,
        V0_kcalmol=v0,
        width_A=a,
        published_P_tunnel=p,
        published_rqas=rq,
        alternates=alternates or {},
    )


def builtin_dataset() -> VariantDataset:
    """The eight tabulated variants; E417Q uses the 3.08 A distance, 3.20 A kept as alternate."""
    S = Severity
    return VariantDataset((
        _rec("WT", None, 0.0, 2.70, 100.0, S.Healthy, "Healthy active site reference",
             14.2, 0.42, 1.00, 1.00),
        _rec("T457N", ("Thr", 457, "Asn"), 0.08, 2.78, 85.0, S.Mild, "Surface variation",
             14.8, 0.48, 3.5e-10, 3.54e-10),
        _rec("L341S", ("Leu", 341, "Ser"), 0.15, 2.85, 22.4, S.Moderate, "Packing void",
             15.3, 0.55, 1.5e-18, 1.47e-18),
        _rec("Y368H", ("Tyr", 368, "His"), 0.28, 2.98, 5.2, S.Severe, "H-bond loss",
             16.1, 0.64, 2.6e-34, 2.60e-34),
        _rec("E417Q", ("Glu", 417, "Gln"), 0.38, 3.08, None, S.Severe, "Charge loss",
             16.8, 0.72, 1.6e-46, 1.59e-46, {"Table3": 3.20}),
        _rec("R91W", ("Arg", 91, "Trp"), 0.42, 3.12, 0.78, S.Severe, "Steric clash",
             17.2, 0.78, 9.1e-59, 9.11e-59),
        _rec("D470N", ("Asp", 470, "Asn"), 0.55, 3.25, 0.008, S.Severe, "Substrate float",
             18.1, 0.89, 7.7e-74, 7.66e-74),
        _rec("H241R", ("His", 241, "Arg"), 0.65, 3.35, None, S.Null, "Iron kick",
             19.3, 0.97, 1.6e-85, 1.63e-85),
    ))


# --- serialisation ---------------------------------------------------------------


def _fmt(v) -> str:
    return "" if v is None else repr(v) if isinstance(v, float) else str(v)


def dataset_to_csv(ds: VariantDataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS + CSV_EXTRA_COLUMNS)
    for r in ds:
        frm, pos, to = r.substitution or ("", "", "")
        alt_src, alt_val = next(iter(r.alternates.items()), ("", None))
        w.writerow([
            r.id, frm, pos, to, _fmt(r.shift), _fmt(r.d_oo), _fmt(r.exp_activity_pct),
            r.severity.name, r.source, _fmt(r.V0_kcalmol), _fmt(r.width_A),
            _fmt(r.published_P_tunnel), _fmt(r.published_rqas), _fmt(alt_val), alt_src, r.impact_note,
        ])
    return buf.getvalue()


def _record_to_dict(r: VariantRecord) -> dict:
    d = asdict(r)
    d["severity"] = r.severity.name
    d["substitution"] = list(r.substitution) if r.substitution else None
    return d


def dataset_to_json(ds: VariantDataset) -> str:
    return json.dumps({"records": [_record_to_dict(r) for r in ds]}, indent=2)


def save_dataset(ds: VariantDataset, path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    text = dataset_to_json(ds) if fmt == "json" else dataset_to_csv(ds)
    path.write_text(text)


def _float_or_none(text: str, what: str, row: int):
    text = (text or "").strip()
    if text == "" or text.upper() == "N/A":
        return None
    try:
        v = float(text)
    except ValueError:
        raise DatasetError(f"row {row}: {what} {text!r} is not a number") from None
    if not math.isfinite(v):
        raise DatasetError(f"row {row}: {what} must be finite")
    return v


def _build_record(raw: dict, row: int) -> VariantRecord:
    vid = (raw.get("id") or "").strip()
    if not vid:
        raise DatasetError(f"row {row}: missing id")
    shift = _float_or_none(raw.get("shift_A"), "shift_A", row)
    d = _float_or_none(raw.get("dOO_A"), "dOO_A", row)
    source = (raw.get("source") or "").strip() or "user"
    if shift is None and d is None:
        raise DatasetError(f"row {row}: need shift_A or dOO_A")
    if d is None:
        d = round(WT_DISTANCE_A + shift, 12)
    if shift is None:
        shift = round(d - WT_DISTANCE_A, 12)
    if abs(WT_DISTANCE_A + shift - d) > 1e-9:
        raise DatasetError(f"row {row}: dOO_A {d} inconsistent with shift_A {shift}")
    act = _float_or_none(raw.get("activity_pct"), "activity_pct", row)
    if act is not None and not (0 < act <= 100):
        raise DatasetError(f"row {row}: activity {act}% outside (0, 100]")
    sev_text = (raw.get("severity") or "").strip()
    try:
        sev = Severity[sev_text]
    except KeyError:
        raise DatasetError(f"row {row}: unknown severity {sev_text!r}") from None
    frm, pos, to = (raw.get("from") or "").strip(), (raw.get("pos") or "").strip(), (raw.get("to") or "").strip()
    sub = (frm, int(pos), to) if frm and pos and to else None
    alternates = {}
    alt = _float_or_none(raw.get("alt_dOO_A"), "alt_dOO_A", row)
    if alt is not None:
        alternates[(raw.get("alt_source") or "alternate").strip()] = alt
    return VariantRecord(
        id=vid,
        substitution=sub,
        shift=shift,
        d_oo=d,
        exp_activity_pct=act,
        severity=sev,
        source=source,
        impact_note=(raw.get("note") or "").strip(),
        V0_kcalmol=_float_or_none(raw.get("V0_kcalmol"), "V0_kcalmol", row),
        width_A=_float_or_none(raw.get("width_A"), "width_A", row),
        published_P_tunnel=_float_or_none(raw.get("P_tunnel_published"), "P_tunnel_published", row),
        published_rqas=_float_or_none(raw.get("rqas_published"), "rqas_published", row),
        alternates=alternates,
    )


def _assemble(records: list, rows: list) -> VariantDataset:
    seen = {}
    for rec, row in zip(records, rows):
        if rec.id in seen:
            raise DatasetError(f"row {row}: duplicate id {rec.id!r} (first seen in row {seen[rec.id]})")
        seen[rec.id] = row
    if WT_ID not in seen:
        raise DatasetError("missing WT row")
    return VariantDataset(tuple(records))


def dataset_from_csv(text: str) -> VariantDataset:
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise DatasetError(f"CSV header missing columns: {', '.join(missing)}")
    records, rows = [], []
    for i, raw in enumerate(reader, start=2):  # row 1 is the header
        records.append(_build_record(raw, i))
        rows.append(i)
    return _assemble(records, rows)


def dataset_from_json(text: str) -> VariantDataset:
    raw = json.loads(text)
    items = raw["records"] if isinstance(raw, dict) else raw
    records, rows = [], []
    for i, item in enumerate(items, start=1):
        if "d_oo" in item:  # native dump
            sub = item.get("substitution")
            try:
                rec = VariantRecord(
                    id=item["id"],
                    substitution=tuple(sub) if sub else None,
                    shift=float(item["shift"]),
                    d_oo=float(item["d_oo"]),
                    exp_activity_pct=item.get("exp_activity_pct"),
                    severity=Severity[item["severity"]],
                    source=item.get("source") or "user",
                    impact_note=item.get("impact_note", ""),
                    V0_kcalmol=item.get("V0_kcalmol"),
                    width_A=item.get("width_A"),
                    published_P_tunnel=item.get("published_P_tunnel"),
                    published_rqas=item.get("published_rqas"),
                    alternates=dict(item.get("alternates") or {}),
                )
            except (KeyError, DatasetError) as exc:
                raise DatasetError(f"record {i}: {exc}") from None
            if abs(WT_DISTANCE_A + rec.shift - rec.d_oo) > 1e-9:
                raise DatasetError(f"record {i}: d_oo inconsistent with shift")
        else:  # flat rows using the CSV column names
            rec = _build_record({k: ("" if v is None else str(v)) for k, v in item.items()}, i)
        records.append(rec)
        rows.append(i)
    return _assemble(records, rows)


def load_dataset(path, fmt: str | None = None) -> VariantDataset:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    text = path.read_text()
    if fmt == "json":
        return dataset_from_json(text)
    if fmt == "csv":
        return dataset_from_csv(text)
    raise DatasetError(f"unsupported dataset format {fmt!r}")
