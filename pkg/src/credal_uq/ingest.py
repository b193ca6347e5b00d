"""Reading ensemble predictions from disk into per-instance credal sets.

Two input formats are supported:

JSONL
    one object per line with exactly the fields ``id`` (string), ``label``
    (optional integer or null) and ``probs`` (an ``M x K`` nested list).
CSV
    header ``instance_id, model_id, label, p_0 .. p_{K-1}``, one row per
    (instance, model) pair in any order; ``label`` may be blank.

A JSON manifest ``{"model_ids": [...], "likelihood_ratios": [...]}`` supplies
each model's likelihood relative to the best one, for filtering.

Loaders collect every problem before failing; the raised :class:`DatasetError`
carries the full list of :class:`Diagnostic` entries.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .simplex import CredalSet, SimplexError, _validate_probs

PARSE, SHAPE, SIMPLEX = "parse", "shape", "simplex"
EXIT_CODES = {PARSE: 2, SHAPE: 3, SIMPLEX: 4}


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.kind} error: {self.message}"


class DatasetError(ValueError):
    """One or more problems found while loading a dataset."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        head = str(self.diagnostics[0]) if self.diagnostics else "invalid dataset"
        more = len(self.diagnostics) - 1
        super().__init__(head + (f" (+{more} more)" if more > 0 else ""))

    @property
    def exit_code(self) -> int:
        return min(EXIT_CODES[d.kind] for d in self.diagnostics)


@dataclass(frozen=True)
class Instance:
    instance_id: str
    credal_set: CredalSet
    label: int | None = None


@dataclass(frozen=True)
class PredictionDataset:
    instances: tuple[Instance, ...]
    model_ids: tuple[str, ...]
    likelihood_ratios: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        m = len(self.model_ids)
        for inst in self.instances:
            if inst.credal_set.m != m:
                raise ValueError(
                    f"instance {inst.instance_id!r} has {inst.credal_set.m} generators, expected {m}"
                )
        if self.likelihood_ratios is not None:
            r = np.asarray(self.likelihood_ratios, dtype=float)
            if r.shape != (m,):
                raise ValueError(f"expected {m} likelihood ratios, got shape {r.shape}")
            if np.any((r < 0) | (r > 1)) or not np.isfinite(r).all():
                raise ValueError("likelihood ratios must lie in [0, 1]")
            if abs(r.max() - 1.0) > 1e-9:
                raise ValueError("the best model must have likelihood ratio 1")
            r = r.copy()
            r.setflags(write=False)
            object.__setattr__(self, "likelihood_ratios", r)

    @property
    def m(self) -> int:
        return len(self.model_ids)

    @property
    def k(self) -> int:
        return self.instances[0].credal_set.k if self.instances else 0

    def __len__(self) -> int:
        return len(self.instances)

    def with_likelihood_ratios(self, ratios: Sequence[float], model_ids: Sequence[str] | None = None):
        """Attach likelihood ratios, matching by model id when ``model_ids`` is given."""
        ratios = [float(r) for r in ratios]
        if model_ids is None:
            return replace(self, likelihood_ratios=np.array(ratios))
        model_ids = [str(x) for x in model_ids]
        if len(model_ids) != len(ratios):
            raise ValueError("manifest model_ids and likelihood_ratios differ in length")
        if sorted(model_ids) == sorted(self.model_ids):
            lookup = dict(zip(model_ids, ratios))
            return replace(self, likelihood_ratios=np.array([lookup[m] for m in self.model_ids]))
        if _default_ids(self.m) == self.model_ids and len(model_ids) == self.m:
            return replace(self, model_ids=tuple(model_ids), likelihood_ratios=np.array(ratios))
        raise ValueError(f"manifest models {model_ids} do not match dataset models {list(self.model_ids)}")


def _default_ids(m: int) -> tuple[str, ...]:
    return tuple(f"model_{j}" for j in range(m))


def _fail_if(diags: list[Diagnostic]) -> None:
    if diags:
        raise DatasetError(diags)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def load_jsonl(path, strict: bool = False) -> PredictionDataset:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetError([Diagnostic(PARSE, str(path), f"cannot read file: {exc}")]) from exc

    diags: list[Diagnostic] = []
    instances: list[Instance] = []
    shape: tuple[int, int] | None = None
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        loc = f"{path.name}:{lineno}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            diags.append(Diagnostic(PARSE, loc, f"invalid JSON: {exc.msg}"))
            continue
        if not isinstance(obj, dict):
            diags.append(Diagnostic(PARSE, loc, "expected a JSON object"))
            continue
        extra = set(obj) - {"id", "label", "probs"}
        if extra:
            diags.append(Diagnostic(PARSE, loc, f"unexpected fields {sorted(extra)}"))
            continue
        if not isinstance(obj.get("id"), str):
            diags.append(Diagnostic(PARSE, loc, "field 'id' must be a string"))
            continue
        label = obj.get("label")
        if label is not None and not _is_int(label):
            diags.append(Diagnostic(PARSE, loc, "field 'label' must be an integer or null"))
            continue
        probs = obj.get("probs")
        if (
            not isinstance(probs, list)
            or not probs
            or not all(isinstance(row, list) for row in probs)
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for row in probs for v in row)
        ):
            diags.append(Diagnostic(PARSE, loc, "field 'probs' must be a non-empty list of numeric lists"))
            continue
        ks = {len(row) for row in probs}
        if len(ks) != 1:
            diags.append(Diagnostic(SHAPE, loc, f"ragged probs rows with lengths {sorted(ks)}"))
            continue
        this_shape = (len(probs), ks.pop())
        if shape is None:
            shape = this_shape
        elif this_shape != shape:
            diags.append(Diagnostic(SHAPE, loc, f"probs has shape {this_shape}, expected {shape}"))
            continue
        if obj["id"] in seen:
            diags.append(Diagnostic(SHAPE, loc, f"duplicate instance id {obj['id']!r}"))
            continue
        seen.add(obj["id"])
        if label is not None and not 0 <= label < this_shape[1]:
            diags.append(Diagnostic(SHAPE, loc, f"label {label} out of range for K={this_shape[1]}"))
            continue
        rows = []
        for j, row in enumerate(probs):
            try:
                rows.append(_validate_probs(row, strict=strict))
            except SimplexError as exc:
                diags.append(Diagnostic(SIMPLEX, f"{loc} model {j}", str(exc)))
        if len(rows) == len(probs):
            instances.append(Instance(obj["id"], CredalSet._trusted(np.vstack(rows)), label))

    if not instances and not diags:
        diags.append(Diagnostic(PARSE, str(path), "dataset is empty"))
    _fail_if(diags)
    return PredictionDataset(tuple(instances), _default_ids(shape[0]))


def load_csv(path, strict: bool = False) -> PredictionDataset:
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DatasetError([Diagnostic(PARSE, str(path), f"cannot read file: {exc}")]) from exc

    diags: list[Diagnostic] = []
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError([Diagnostic(PARSE, str(path), "dataset is empty")]) from None
        header = [h.strip() for h in header]
        k = len(header) - 3
        if header[:3] != ["instance_id", "model_id", "label"] or k < 2 or header[3:] != [
            f"p_{y}" for y in range(k)
        ]:
            raise DatasetError(
                [Diagnostic(PARSE, f"{path.name}:1", "header must be instance_id,model_id,label,p_0..p_{K-1}")]
            )

        order: list[str] = []
        models: list[str] = []
        cells: dict[str, dict[str, np.ndarray]] = {}
        labels: dict[str, int | None] = {}
        first_line: dict[str, int] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            loc = f"{path.name}:{lineno}"
            if len(row) != len(header):
                diags.append(Diagnostic(SHAPE, loc, f"row has {len(row)} fields, expected {len(header)}"))
                continue
            iid, mid, lab = row[0].strip(), row[1].strip(), row[2].strip()
            try:
                label = int(lab) if lab else None
                values = [float(v) for v in row[3:]]
            except ValueError as exc:
                diags.append(Diagnostic(PARSE, loc, f"non-numeric field: {exc}"))
                continue
            if label is not None and not 0 <= label < k:
                diags.append(Diagnostic(SHAPE, loc, f"label {label} out of range for K={k}"))
                continue
            try:
                p = _validate_probs(values, strict=strict)
            except SimplexError as exc:
                diags.append(Diagnostic(SIMPLEX, f"{loc} model {mid!r}", str(exc)))
                continue
            if iid not in cells:
                cells[iid] = {}
                order.append(iid)
                labels[iid] = label
                first_line[iid] = lineno
            elif labels[iid] != label:
                diags.append(
                    Diagnostic(SHAPE, loc, f"label {label} for {iid!r} disagrees with earlier {labels[iid]}")
                )
                continue
            if mid not in models:
                models.append(mid)
            if mid in cells[iid]:
                diags.append(Diagnostic(SHAPE, loc, f"duplicate row for instance {iid!r}, model {mid!r}"))
                continue
            cells[iid][mid] = p

    instances = []
    for iid in order:
        missing = [m for m in models if m not in cells[iid]]
        if missing:
            for m in missing:
                diags.append(
                    Diagnostic(SHAPE, f"{path.name}:{first_line[iid]}", f"instance {iid!r} missing model {m!r}")
                )
            continue
        P = np.vstack([cells[iid][m] for m in models])
        instances.append(Instance(iid, CredalSet._trusted(P), labels[iid]))
    if not order and not diags:
        diags.append(Diagnostic(PARSE, str(path), "dataset is empty"))
    _fail_if(diags)
    return PredictionDataset(tuple(instances), tuple(models))


def load_dataset(path, fmt: str | None = None, strict: bool = False) -> PredictionDataset:
    """Load by explicit ``fmt`` ('jsonl' or 'csv') or by file extension."""
    if fmt is None:
        fmt = "csv" if str(path).lower().endswith(".csv") else "jsonl"
    if fmt == "jsonl":
        return load_jsonl(path, strict=strict)
    if fmt == "csv":
        return load_csv(path, strict=strict)
    raise ValueError(f"unknown format {fmt!r}")


def load_manifest(path) -> dict:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError([Diagnostic(PARSE, str(path), f"cannot read manifest: {exc}")]) from exc
    if (
        not isinstance(obj, dict)
        or not isinstance(obj.get("model_ids"), list)
        or not isinstance(obj.get("likelihood_ratios"), list)
    ):
        raise DatasetError(
            [Diagnostic(PARSE, str(path), "manifest needs lists 'model_ids' and 'likelihood_ratios'")]
        )
    return {"model_ids": [str(m) for m in obj["model_ids"]], "likelihood_ratios": obj["likelihood_ratios"]}


def attach_manifest(ds: PredictionDataset, manifest: dict) -> PredictionDataset:
    return ds.with_likelihood_ratios(manifest["likelihood_ratios"], manifest["model_ids"])


def filter_by_relative_likelihood(ds: PredictionDataset, alpha: float) -> PredictionDataset:
    """Keep only models whose likelihood ratio is at least ``alpha``."""
    if ds.likelihood_ratios is None:
        raise ValueError("dataset carries no likelihood ratios; attach a manifest first")
    if not 0.0 <= alpha <= 1.0 or math.isnan(alpha):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    ratios = ds.likelihood_ratios
    # The best model has ratio 1 up to 1e-9; never drop it for that reason.
    keep = [j for j, r in enumerate(ratios) if r >= alpha or r >= 1.0 - 1e-9]
    instances = tuple(
        Instance(inst.instance_id, inst.credal_set.subset(keep), inst.label) for inst in ds.instances
    )
    return PredictionDataset(instances, tuple(ds.model_ids[j] for j in keep), ratios[keep])


def inject_dirac_member(ds: PredictionDataset, label: int, model_id: str | None = None) -> PredictionDataset:
    """Append a model that puts all mass on ``label`` for every instance."""
    if not 0 <= label < ds.k:
        raise IndexError(f"label {label} out of range for K={ds.k}")
    dirac = np.zeros(ds.k)
    dirac[label] = 1.0
    instances = tuple(
        Instance(inst.instance_id, inst.credal_set.with_generator(dirac), inst.label) for inst in ds.instances
    )
    ratios = None
    if ds.likelihood_ratios is not None:
        # An arbitrary fixed-class predictor fits the data no better than anything else.
        ratios = np.append(ds.likelihood_ratios, 0.0)
    mid = model_id or f"dirac_{label}"
    return PredictionDataset(instances, ds.model_ids + (mid,), ratios)


def format_float(x: float) -> str:
    """Round-trip-safe text for a float (17 significant digits)."""
    return format(float(x), ".17g")


def dumps(obj) -> str:
    """Compact JSON with floats written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite value {obj}")
        return format_float(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def instance_to_json(inst: Instance) -> str:
    obj = {"id": inst.instance_id, "label": inst.label, "probs": inst.credal_set.probs.tolist()}
    return dumps(obj)


def write_jsonl(ds: PredictionDataset | Iterable[Instance], path) -> None:
    instances = ds.instances if isinstance(ds, PredictionDataset) else ds
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(instance_to_json(inst) + "\n")


def write_manifest(model_ids: Sequence[str], ratios: Sequence[float], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps({"model_ids": list(model_ids), "likelihood_ratios": [float(r) for r in ratios]}) + "\n")
