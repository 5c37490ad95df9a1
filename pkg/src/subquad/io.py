"""Structured-text (JSON) files for sample sets, models, frames and reports.

Reals are written with 17 significant digits, which pins down an IEEE
double uniquely: reading a file back reproduces the in-memory coefficients
bit for bit. Matrices are nested row-major lists.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .errors import FileFormatError
from .geometry import SampleSet, SubspaceFrame
from .models import GradientFamily, ModelResult, QuadraticModel
from .simplex import DirectionBundle

MODEL_KINDS = ("dqi", "mn", "mfn", "lfu", "qgsd")


def format_real(value) -> str:
    """Render a float with 17 significant digits (round-trip exact)."""
    value = float(value)
    if not np.isfinite(value):
        raise FileFormatError(f"cannot serialize non-finite real {value!r}")
    text = format(value, ".17g")
    if "." not in text and "e" not in text and "E" not in text:
        text += ".0"
    return text


def dumps(obj, indent: int = 0) -> str:
    """JSON text with 17-significant-digit reals."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [
            f"{inner}{json.dumps(str(key))}: {dumps(val, indent + 1)}"
            for key, val in obj.items()
        ]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        rendered = [dumps(val, indent + 1) for val in obj]
        if all(len(r) < 26 and "\n" not in r for r in rendered):
            return "[" + ", ".join(rendered) + "]"
        return (
            "[\n" + ",\n".join(inner + r for r in rendered) + f"\n{pad}]"
        )
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_real(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise FileFormatError(f"cannot serialize object of type {type(obj)!r}")


def write_document(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps(obj))
        handle.write("\n")


def read_document(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: expected a top-level object")
    return doc


def _need(doc: dict, key: str, path="document"):
    if key not in doc:
        raise FileFormatError(f"{path}: missing required field {key!r}")
    return doc[key]


def _as_array(value, name, path="document") -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(
            f"{path}: field {name!r} is not numeric"
        ) from exc
    if not np.all(np.isfinite(arr)):
        raise FileFormatError(f"{path}: field {name!r} has non-finite entries")
    return arr


# ---------------------------------------------------------------------------
# sample sets


def sampleset_to_dict(sample_set: SampleSet, config: dict | None = None):
    doc = {
        "n": sample_set.n,
        "x0": sample_set.x0,
        "displacements": sample_set.displacements,
        "values": sample_set.values,
    }
    if config:
        doc["config"] = config
    return doc


def load_sampleset(path) -> SampleSet:
    doc = read_document(path)
    n = int(_need(doc, "n", path))
    x0 = _as_array(_need(doc, "x0", path), "x0", path)
    disp = _as_array(
        _need(doc, "displacements", path), "displacements", path
    )
    values = _as_array(_need(doc, "values", path), "values", path)
    if disp.ndim == 1:
        disp = disp.reshape(-1, n) if n == 1 else disp.reshape(1, -1)
    if x0.shape != (n,) or disp.ndim != 2 or disp.shape[1] != n:
        raise FileFormatError(
            f"{path}: inconsistent dimensions (n={n}, x0 {x0.shape}, "
            f"displacements {disp.shape})"
        )
    return SampleSet(x0, disp, values)


def save_sampleset(path, sample_set: SampleSet,
                   config: dict | None = None) -> None:
    write_document(path, sampleset_to_dict(sample_set, config))


# ---------------------------------------------------------------------------
# models


def model_to_dict(result: ModelResult, config: dict | None = None):
    model = result.model
    doc = {
        "kind": result.kind,
        "n": model.n,
        "x0": model.x0,
        "c": model.c,
        "g": model.g,
        "H": model.H,
    }
    if result.gradients.ambiguity_basis.shape[1]:
        doc["ambiguity_basis"] = result.gradients.ambiguity_basis
    if result.reference_hessian is not None:
        doc["href"] = result.reference_hessian
    if result.correction_applied is not None:
        doc["correction_applied"] = bool(result.correction_applied)
    if config:
        doc["config"] = config
    return doc


def save_model(path, result: ModelResult,
               config: dict | None = None) -> None:
    write_document(path, model_to_dict(result, config))


def load_model(path) -> ModelResult:
    doc = read_document(path)
    kind = str(_need(doc, "kind", path)).lower()
    if kind not in MODEL_KINDS:
        raise FileFormatError(
            f"{path}: unknown model kind {kind!r}; expected one of "
            f"{MODEL_KINDS}"
        )
    n = int(_need(doc, "n", path))
    x0 = _as_array(_need(doc, "x0", path), "x0", path)
    grad = _as_array(_need(doc, "g", path), "g", path)
    hess = _as_array(_need(doc, "H", path), "H", path)
    if x0.shape != (n,) or grad.shape != (n,) or hess.shape != (n, n):
        raise FileFormatError(
            f"{path}: inconsistent model dimensions for n={n}"
        )
    constant = _need(doc, "c", path)
    if not isinstance(constant, (int, float)):
        raise FileFormatError(f"{path}: field 'c' must be a real number")
    model = QuadraticModel(x0, float(constant), grad, hess)
    if "ambiguity_basis" in doc:
        ambiguity = _as_array(doc["ambiguity_basis"], "ambiguity_basis", path)
        if ambiguity.ndim != 2 or ambiguity.shape[0] != n:
            raise FileFormatError(
                f"{path}: ambiguity basis must have {n} rows"
            )
    else:
        ambiguity = np.zeros((n, 0))
    href = None
    if "href" in doc:
        href = _as_array(doc["href"], "href", path)
        if href.shape != (n, n):
            raise FileFormatError(f"{path}: href must be {n} x {n}")
    correction = doc.get("correction_applied")
    return ModelResult(
        model, GradientFamily(grad, ambiguity), kind,
        reference_hessian=href,
        correction_applied=None if correction is None else bool(correction),
    )


# ---------------------------------------------------------------------------
# frames


def frame_to_dict(frame: SubspaceFrame, config: dict | None = None):
    doc = {
        "n": frame.n,
        "d": frame.d,
        "x0": frame.x0,
        "Q": frame.Q,
    }
    if frame.dhat is not None:
        doc["dhat"] = frame.dhat
    if config:
        doc["config"] = config
    return doc


def save_frame(path, frame: SubspaceFrame,
               config: dict | None = None) -> None:
    write_document(path, frame_to_dict(frame, config))


def load_frame(path) -> SubspaceFrame:
    doc = read_document(path)
    n = int(_need(doc, "n", path))
    d = int(_need(doc, "d", path))
    x0 = _as_array(_need(doc, "x0", path), "x0", path)
    basis = _as_array(_need(doc, "Q", path), "Q", path)
    if x0.shape != (n,) or basis.shape != (n, d):
        raise FileFormatError(
            f"{path}: inconsistent frame dimensions (n={n}, d={d})"
        )
    dhat = None
    if "dhat" in doc:
        dhat = _as_array(doc["dhat"], "dhat", path)
        if dhat.ndim != 2 or dhat.shape[1] != d:
            raise FileFormatError(f"{path}: dhat must have {d} columns")
    return SubspaceFrame(x0, basis, dhat)


# ---------------------------------------------------------------------------
# direction bundles


def load_bundle(path) -> tuple[DirectionBundle, np.ndarray]:
    """Read a direction bundle; returns ``(bundle, x0)``.

    The file holds ``n``, outer directions ``S`` (n rows, one column per
    direction), and either a shared inner block ``T`` or a per-direction
    ``T_list``. An optional ``x0`` defaults to the origin.
    """
    doc = read_document(path)
    n = int(_need(doc, "n", path))
    outer = _as_array(_need(doc, "S", path), "S", path)
    if outer.ndim != 2 or outer.shape[0] != n:
        raise FileFormatError(f"{path}: S must have {n} rows")
    if "T" in doc and "T_list" in doc:
        raise FileFormatError(f"{path}: give either T or T_list, not both")
    if "T" in doc:
        inner = _as_array(doc["T"], "T", path)
        if inner.ndim != 2 or inner.shape[0] != n:
            raise FileFormatError(f"{path}: T must have {n} rows")
        bundle = DirectionBundle(outer, inner)
    elif "T_list" in doc:
        blocks = [
            _as_array(block, f"T_list[{i}]", path)
            for i, block in enumerate(doc["T_list"])
        ]
        bundle = DirectionBundle(outer, blocks)
    else:
        raise FileFormatError(f"{path}: missing inner directions (T/T_list)")
    x0 = np.zeros(n)
    if "x0" in doc:
        x0 = _as_array(doc["x0"], "x0", path)
        if x0.shape != (n,):
            raise FileFormatError(f"{path}: x0 must have length {n}")
    return bundle, x0


def save_bundle(path, bundle: DirectionBundle, x0=None,
                config: dict | None = None) -> None:
    doc: dict = {"n": bundle.n, "S": bundle.S}
    if bundle.shared:
        doc["T"] = bundle.T
    else:
        doc["T_list"] = [np.asarray(b) for b in bundle.blocks]
    if x0 is not None:
        doc["x0"] = np.asarray(x0, dtype=float)
    if config:
        doc["config"] = config
    write_document(path, doc)


# ---------------------------------------------------------------------------
# reference Hessians


def load_reference_hessian(spec: str, n: int) -> np.ndarray:
    """Resolve an ``--href`` argument: ``0``, ``I<k>``, or a file path.

    The file form holds ``n`` and a symmetric matrix ``H``.
    """
    text = str(spec).strip()
    if text == "0":
        return np.zeros((n, n))
    if text.upper().startswith("I") and text[1:].isdigit():
        k = int(text[1:])
        if k != n:
            raise FileFormatError(
                f"reference identity order {k} does not match dimension {n}"
            )
        return np.eye(n)
    doc = read_document(text)
    k = int(_need(doc, "n", text))
    hess = _as_array(_need(doc, "H", text), "H", text)
    if hess.shape != (k, k) or k != n:
        raise FileFormatError(
            f"{text}: reference Hessian must be {n} x {n}"
        )
    return hess


# ---------------------------------------------------------------------------
# reports and suite results


def save_report(path, report, config: dict | None = None) -> None:
    doc = report.to_dict()
    if config:
        doc["config"] = config
    write_document(path, doc)


def suite_rows(result) -> list[dict]:
    return [
        {
            "theorem": rec.suite,
            "trial": rec.trial,
            "n": rec.n,
            "d": rec.d,
            "m": rec.m,
            "function_class": rec.function_class,
            "gap": format_real(rec.gap) if np.isfinite(rec.gap) else "inf",
            "passed": rec.passed,
            "detail": rec.detail,
        }
        for rec in result.records
    ]


def save_suite_csv(path, result) -> None:
    """Per-trial table for one suite (comma-delimited text)."""
    fields = [
        "theorem", "trial", "n", "d", "m", "function_class",
        "gap", "passed", "detail",
    ]
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields)
        writer.writeheader()
        for row in suite_rows(result):
            writer.writerow(row)


def suite_summary(result) -> dict:
    return {
        "theorem": result.theorem,
        "trials": result.trials,
        "failures": result.failures,
        "max_gap": result.max_gap,
        "tol": result.tol,
        "seed": result.seed,
        "passed": result.passed,
        "gap_histogram": result.gap_histogram(),
    }


def save_suite_summary(path, results, config: dict | None = None) -> None:
    doc = {"suites": [suite_summary(r) for r in results]}
    doc["all_passed"] = all(r.passed for r in results)
    if config:
        doc["config"] = config
    write_document(path, doc)
