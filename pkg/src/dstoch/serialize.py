"""JSON and CSV formats.

JSON shapes::

    vector          {"d": 3, "data": [0.2, 0.3, 0.5]}
    matrix          {"d": 2, "data": [[0.5, 0.5], [0.5, 0.5]]}
    complex matrix  {"d": 2, "re": [[...]], "im": [[...]]}
    decomposition   {"d": 2, "terms": [{"perm": [0, 1], "weight": 0.5}, ...]}
    schedule        {"initial": <vector>, "steps": [<matrix>, ...]}
    polytope        {"d": 3, "generator": <vector>, "vertices": [[...], ...]}

CSV numbers use 12 significant digits, comma delimiters and ``\\n`` line
endings so repeated runs diff cleanly.
"""
from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence

import numpy as np

from .birkhoff import BirkhoffDecomposition
from .errors import DimensionMismatch, ValidationError
from .markov import ChainSchedule, PathDistribution
from .polytope import UniversalPolytope
from .stochastic import (
    DoublyStochasticMatrix,
    Permutation,
    ProbabilityVector,
    validate_doubly_stochastic,
    validate_probability_vector,
)


def _need(obj: dict, *keys):
    if not isinstance(obj, dict):
        raise ValidationError(f"expected a JSON object, got {type(obj).__name__}")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise ValidationError(f"missing keys: {', '.join(missing)}")


def _check_d(obj: dict, actual: int):
    if "d" in obj and int(obj["d"]) != actual:
        raise DimensionMismatch(f"declared d={obj['d']} but data has d={actual}")


def vector_to_json(x) -> dict:
    x = validate_probability_vector(x)
    return {"d": x.d, "data": x.tolist()}


def vector_from_json(obj) -> ProbabilityVector:
    if isinstance(obj, list):
        return validate_probability_vector(obj)
    _need(obj, "data")
    x = validate_probability_vector(obj["data"])
    _check_d(obj, x.d)
    return x


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=float)
    return {"d": int(m.shape[0]), "data": m.tolist()}


def matrix_from_json(obj) -> DoublyStochasticMatrix:
    if isinstance(obj, list):
        return validate_doubly_stochastic(obj)
    _need(obj, "data")
    m = validate_doubly_stochastic(obj["data"])
    _check_d(obj, m.d)
    return m


def complex_matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"d": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def complex_matrix_from_json(obj) -> np.ndarray:
    """Raw complex array; callers validate it as the type they need."""
    _need(obj, "re")
    re = np.array(obj["re"], dtype=float)
    im = np.array(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise DimensionMismatch("re and im parts differ in shape")
    if re.ndim != 2 or re.shape[0] != re.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {re.shape}")
    _check_d(obj, re.shape[0])
    return re + 1j * im


def decomposition_to_json(dec: BirkhoffDecomposition) -> dict:
    return {
        "d": dec.d,
        "terms": [{"perm": list(p.image), "weight": w} for p, w in dec.terms],
    }


def decomposition_from_json(obj) -> BirkhoffDecomposition:
    _need(obj, "d", "terms")
    terms = tuple((Permutation(tuple(t["perm"])), float(t["weight"])) for t in obj["terms"])
    return BirkhoffDecomposition(terms, int(obj["d"]))


def schedule_to_json(schedule: ChainSchedule) -> dict:
    return {
        "initial": vector_to_json(schedule.initial),
        "steps": [matrix_to_json(m) for m in schedule.steps],
    }


def schedule_from_json(obj) -> ChainSchedule:
    _need(obj, "initial")
    return ChainSchedule(
        vector_from_json(obj["initial"]),
        tuple(matrix_from_json(m) for m in obj.get("steps", [])),
    )


def polytope_to_json(p: UniversalPolytope) -> dict:
    return {
        "d": p.d,
        "generator": vector_to_json(p.generator),
        "vertices": p.vertices.tolist(),
    }


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v == 0.0:
            return "0"
        return format(v, ".12g")
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence], comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment is not None:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def path_key(path: Sequence[int]) -> str:
    return "-".join(str(a) for a in path)


def path_distribution_rows(dist: PathDistribution, skip_zero: bool = False):
    for path, q in dist.items():
        if skip_zero and q == 0.0:
            continue
        yield path_key(path), q


def hat_vertex_rows(hat: np.ndarray):
    return [list(r) for r in hat]


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    """Parse a CSV written by :func:`csv_text`, skipping ``#`` comment lines."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]
