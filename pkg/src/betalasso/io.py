"""Delimited-text ingestion and structured result artifacts.

Artifacts are JSON documents whose floats serialize through Python's repr,
which round-trips every finite double exactly. Each artifact carries
provenance (tool version, a hash of the generating configuration, seed,
timestamp) and a kind tag.
"""

import hashlib
import json
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError
from .model import Dataset, Params, RESPONSE_EPS
from .solver import FitResult

__all__ = [
    "read_dataset",
    "RunArtifact",
    "write_artifact",
    "read_artifact",
    "config_hash",
    "fit_result_to_payload",
    "fit_result_from_payload",
]

TOOL_VERSION = "0.1.0"

_DELIMITERS = (",", "\t", ";")
_MISSING_TOKENS = {"", "na", "nan", "null", "none", "missing"}

ARTIFACT_KINDS = ("fit", "path", "debias", "sim", "select")


def _sniff_delimiter(header_line):
    counts = {d: header_line.count(d) for d in _DELIMITERS}
    best = max(counts, key=counts.get)
    if counts[best] == 0:
        raise ValidationError(
            "read_dataset: could not detect a delimiter (expected comma, tab or semicolon)"
        )
    return best


def read_dataset(
    path,
    response_column="y",
    delimiter=None,
    standardize=False,
    drop_missing=False,
) -> Dataset:
    """Load a delimited text file with a header row into a Dataset.

    ``response_column`` may be a column name or an integer index. Responses
    must lie strictly inside (0, 1). Rows with missing cells are rejected
    unless ``drop_missing`` is set, in which case they are dropped. With
    ``standardize`` the predictors are centered and scaled to unit empirical
    variance and the transforms are recorded on the returned Dataset.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.rstrip("\n").rstrip("\r") for ln in fh]
    except OSError as exc:
        raise ValidationError(f"read_dataset: cannot read {path}: {exc}") from exc
    lines = [ln for ln in lines if ln.strip() != ""]
    if len(lines) < 2:
        raise ValidationError(f"read_dataset: {path} needs a header row and data rows")
    delim = delimiter if delimiter is not None else _sniff_delimiter(lines[0])
    header = [h.strip() for h in lines[0].split(delim)]
    ncol = len(header)
    if isinstance(response_column, int):
        y_idx = response_column if response_column >= 0 else ncol + response_column
        if not 0 <= y_idx < ncol:
            raise ValidationError(f"read_dataset: response index {response_column} out of range")
    else:
        if response_column not in header:
            raise ValidationError(
                f"read_dataset: response column {response_column!r} not in header {header}"
            )
        y_idx = header.index(response_column)

    rows, kept_lines = [], []
    dropped = 0
    for lineno, ln in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in ln.split(delim)]
        if len(cells) != ncol:
            raise ValidationError(
                f"read_dataset: line {lineno} has {len(cells)} cells, expected {ncol}"
            )
        if any(c.lower() in _MISSING_TOKENS for c in cells):
            if drop_missing:
                dropped += 1
                continue
            raise ValidationError(
                f"read_dataset: missing value on line {lineno}; pass drop_missing to drop"
            )
        parsed = []
        for col, cell in enumerate(cells):
            try:
                parsed.append(float(cell))
            except ValueError as exc:
                raise ValidationError(
                    f"read_dataset: non-numeric cell {cell!r} at line {lineno}, "
                    f"column {header[col]!r}"
                ) from exc
        rows.append(parsed)
        kept_lines.append(lineno)
    if not rows:
        raise ValidationError(f"read_dataset: no usable data rows in {path} ({dropped} dropped)")

    data = np.asarray(rows, dtype=float)
    y = data[:, y_idx]
    bad = [kept_lines[i] for i in np.flatnonzero((y <= 0.0) | (y >= 1.0))]
    if bad:
        raise ValidationError(
            f"read_dataset: responses must lie strictly in (0, 1); offending lines: {bad[:10]}"
        )
    # keep logs finite for responses arbitrarily close to the boundary
    y = np.clip(y, RESPONSE_EPS, 1.0 - RESPONSE_EPS)
    X = np.delete(data, y_idx, axis=1)
    names = tuple(h for i, h in enumerate(header) if i != y_idx)

    center = scale = None
    if standardize:
        center = X.mean(axis=0)
        scale = X.std(axis=0)
        flat = np.flatnonzero(scale == 0.0)
        if flat.size:
            raise ValidationError(
                f"read_dataset: constant columns cannot be standardized: "
                f"{[names[i] for i in flat[:10]]}"
            )
        X = (X - center) / scale
    return Dataset(X, y, feature_names=names, center=center, scale=scale)


def _to_jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    return obj


def config_hash(config) -> str:
    """Stable hash of a configuration mapping; changes when any field does."""
    canon = json.dumps(_to_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class RunArtifact:
    """A tagged result payload plus provenance, round-trippable through JSON."""

    kind: str
    payload: dict
    provenance: dict

    def __post_init__(self):
        if self.kind not in ARTIFACT_KINDS:
            raise ValidationError(f"RunArtifact: unknown kind {self.kind!r}")


def make_artifact(kind, payload, config=None, seed=None) -> RunArtifact:
    provenance = {
        "tool_version": TOOL_VERSION,
        "config_hash": config_hash(config if config is not None else {}),
        "seed": seed,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    return RunArtifact(kind=kind, payload=_to_jsonable(payload), provenance=provenance)


def write_artifact(artifact: RunArtifact, path) -> None:
    doc = {
        "kind": artifact.kind,
        "provenance": artifact.provenance,
        "payload": _to_jsonable(artifact.payload),
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise ValidationError(f"write_artifact: cannot write {path}: {exc}") from exc


def read_artifact(path) -> RunArtifact:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"read_artifact: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"read_artifact: {path} is not valid JSON: {exc}") from exc
    for key in ("kind", "provenance", "payload"):
        if key not in doc:
            raise ValidationError(f"read_artifact: {path} is missing the {key!r} field")
    version = doc["provenance"].get("tool_version")
    if version != TOOL_VERSION:
        warnings.warn(
            f"read_artifact: {path} was written by tool version {version}, "
            f"this is {TOOL_VERSION}; parsing anyway",
            stacklevel=2,
        )
    return RunArtifact(kind=doc["kind"], payload=doc["payload"], provenance=doc["provenance"])


def fit_result_to_payload(result: FitResult) -> dict:
    return {
        "params": {
            "beta0": result.params.beta0,
            "beta": result.params.beta,
            "phi": result.params.phi,
        },
        "lam": result.lam,
        "objective_trace": result.objective_trace,
        "kkt_residual": result.kkt_residual,
        "active_set": result.active_set,
        "iterations": result.iterations,
        "converged": result.converged,
        "final_stepsize": result.final_stepsize,
    }


def fit_result_from_payload(payload: dict) -> FitResult:
    prm = payload["params"]
    return FitResult(
        params=Params(
            beta0=prm["beta0"], beta=np.asarray(prm["beta"], dtype=float), phi=prm["phi"]
        ),
        lam=payload["lam"],
        objective_trace=np.asarray(payload["objective_trace"], dtype=float),
        kkt_residual=payload["kkt_residual"],
        active_set=np.asarray(payload["active_set"], dtype=int),
        iterations=payload["iterations"],
        converged=payload["converged"],
        final_stepsize=payload["final_stepsize"],
    )
