"""JSON formats for tuples, dilations, subspaces, polynomials and reports.

Complex matrices are stored as nested lists of ``[re, im]`` pairs, one inner
list per row. Coefficient maps are keyed by the comma-joined multi-index,
``"k1,k2,...,kn"``. Everything that fails to parse raises
:class:`~rowdil.errors.ConfigError`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from rowdil.dilation import DilationMap
from rowdil.errors import ConfigError, RowdilError
from rowdil.inner_functions import MatrixPolynomial
from rowdil.invariant_subspaces import Subspace
from rowdil.kernel_spaces import KernelSpec, MultiIndex, TruncatedSpace
from rowdil.row_contractions import OperatorTuple

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray


# ── Scalars and matrices ─────────────────────────────────────────────


def complex_to_json(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


def complex_from_json(value: Any, what: str = "value") -> complex:
    """Parse a real number or an ``[re, im]`` pair."""
    if isinstance(value, bool):
        raise ConfigError(f"{what}: expected a number or [re, im], got {value!r}")
    if isinstance(value, (int, float)):
        z = complex(value)
    elif isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        z = complex(value[0], value[1])
    else:
        raise ConfigError(f"{what}: expected a number or [re, im], got {value!r}")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ConfigError(f"{what}: non-finite entry {value!r}")
    return z


def matrix_to_json(A: ArrayLike) -> List[List[List[float]]]:
    M = np.asarray(A, dtype=np.complex128)
    return [[complex_to_json(z) for z in row] for row in M]


def matrix_from_json(data: Any, what: str = "matrix", shape: Optional[Sequence[int]] = None) -> NDArray[np.complex128]:
    """Parse ``[[[re, im], ...], ...]``; a zero-row matrix needs ``shape``."""
    if not isinstance(data, list) or not all(isinstance(row, list) for row in data):
        raise ConfigError(f"{what}: expected a list of rows")
    rows = [[complex_from_json(v, what) for v in row] for row in data]
    if len({len(row) for row in rows}) > 1:
        raise ConfigError(f"{what}: rows have different lengths")
    if not rows:
        if shape is None:
            raise ConfigError(f"{what}: empty matrix without a declared shape")
        M = np.zeros(tuple(shape), dtype=np.complex128)
    else:
        M = np.array(rows, dtype=np.complex128)
    if shape is not None and M.shape != tuple(shape):
        raise ConfigError(f"{what}: expected shape {tuple(shape)}, got {M.shape}")
    return M


def _require(data: Any, keys: Sequence[str], what: str) -> Mapping[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError(f"{what}: expected a JSON object, got {type(data).__name__}")
    missing = [k for k in keys if k not in data]
    if missing:
        raise ConfigError(f"{what}: missing field(s) {', '.join(missing)}")
    return data


def _natural(value: Any, what: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{what} must be an integer >= {minimum}, got {value!r}")
    return value


def _multi_index(key: str, n: int, what: str) -> MultiIndex:
    try:
        k = MultiIndex.from_key(key)
    except ValueError as e:
        raise ConfigError(f"{what}: {e}") from None
    if k.n != n:
        raise ConfigError(f"{what}: key {key!r} has {k.n} entries, expected {n}")
    return k


# ── Spaces ───────────────────────────────────────────────────────────


def kernel_spec_from_dict(data: Any) -> KernelSpec:
    """``{"n": 2, "lambda": 1.0}``; ``lambda`` defaults to 1 (Drury-Arveson)."""
    data = _require(data, ["n"], "space")
    n = _natural(data["n"], "space.n", 1)
    lam = data.get("lambda", 1.0)
    if isinstance(lam, bool) or not isinstance(lam, (int, float)):
        raise ConfigError(f"space.lambda must be a number, got {lam!r}")
    try:
        return KernelSpec(n, float(lam))
    except ValueError as err:
        raise ConfigError(f"space: {err}") from None


def space_from_dict(data: Any) -> TruncatedSpace:
    """``{"n", "lambda", "max_degree", "fiber_dim"}``."""
    spec = kernel_spec_from_dict(data)
    data = _require(data, ["max_degree"], "space")
    N = _natural(data["max_degree"], "space.max_degree")
    fiber = _natural(data.get("fiber_dim", 1), "space.fiber_dim", 1)
    return TruncatedSpace(spec, N, fiber)


# ── Operator tuples ──────────────────────────────────────────────────


def tuple_to_dict(T: OperatorTuple) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "n": T.n,
        "dim": T.dim,
        "matrices": [matrix_to_json(Ti) for Ti in T],
    }
    if T.boundary_mask is not None:
        data["boundary"] = [bool(b) for b in T.boundary_mask]
    return data


def tuple_from_dict(data: Any) -> OperatorTuple:
    """``{"n", "dim", "matrices": [...], "boundary"?}``."""
    data = _require(data, ["n", "dim", "matrices"], "tuple")
    n = _natural(data["n"], "tuple.n", 1)
    d = _natural(data["dim"], "tuple.dim", 1)
    mats = data["matrices"]
    if not isinstance(mats, list) or len(mats) != n:
        raise ConfigError(f"tuple: expected {n} matrices")
    matrices = [matrix_from_json(M, f"tuple.matrices[{i}]", (d, d)) for i, M in enumerate(mats)]
    boundary = data.get("boundary")
    if boundary is not None:
        if not isinstance(boundary, list) or len(boundary) != d or not all(isinstance(b, bool) for b in boundary):
            raise ConfigError(f"tuple.boundary must be a list of {d} booleans")
        boundary = np.array(boundary, dtype=bool)
    try:
        return OperatorTuple(matrices, boundary_mask=boundary)
    except RowdilError as err:
        raise ConfigError(f"tuple: {err}") from None


# ── Dilations ────────────────────────────────────────────────────────


def dilation_to_dict(Pi: DilationMap) -> Dict[str, Any]:
    return {
        "header": {
            "n": Pi.n,
            "source_dim": Pi.source_dim,
            "fiber_dim": Pi.fiber_dim,
            "degree_cut": Pi.degree_cut,
        },
        "coefficients": {k.key: matrix_to_json(c) for k, c in Pi.coefficients.items()},
    }


def dilation_from_dict(data: Any) -> DilationMap:
    """``{"header": {"n", "source_dim", "fiber_dim", "degree_cut"}, "coefficients"}``."""
    data = _require(data, ["header", "coefficients"], "dilation")
    header = _require(data["header"], ["n", "source_dim", "fiber_dim", "degree_cut"], "dilation.header")
    n = _natural(header["n"], "dilation.header.n", 1)
    d = _natural(header["source_dim"], "dilation.header.source_dim")
    e = _natural(header["fiber_dim"], "dilation.header.fiber_dim")
    cut = _natural(header["degree_cut"], "dilation.header.degree_cut")
    raw = data["coefficients"]
    if not isinstance(raw, dict):
        raise ConfigError("dilation.coefficients must be an object keyed by multi-index")
    coefficients = {
        _multi_index(key, n, "dilation.coefficients"): matrix_from_json(value, f"c_{key}", (e, d))
        for key, value in raw.items()
    }
    try:
        return DilationMap(n=n, source_dim=d, fiber_dim=e, degree_cut=cut, coefficients=coefficients)
    except RowdilError as err:
        raise ConfigError(f"dilation: {err}") from None


# ── Subspaces ────────────────────────────────────────────────────────


def subspace_to_dict(S: Subspace) -> Dict[str, Any]:
    return {"ambient_dim": S.ambient_dim, "dim": S.dim, "basis": matrix_to_json(S.basis)}


def subspace_from_dict(data: Any) -> Subspace:
    """``{"ambient_dim", "basis"}``; the columns are orthonormalized on load."""
    data = _require(data, ["ambient_dim", "basis"], "subspace")
    m = _natural(data["ambient_dim"], "subspace.ambient_dim", 1)
    raw = data["basis"]
    if isinstance(raw, list) and not raw:
        return Subspace.zero(m)
    B = matrix_from_json(raw, "subspace.basis")
    if B.shape[0] != m:
        raise ConfigError(f"subspace.basis has {B.shape[0]} rows, expected {m}")
    return Subspace.span(B)


# ── Polynomials ──────────────────────────────────────────────────────


def polynomial_to_dict(p: MatrixPolynomial) -> Dict[str, Any]:
    return {
        "n": p.n,
        "source_dim": p.source_dim,
        "target_dim": p.target_dim,
        "coefficients": {k.key: matrix_to_json(A) for k, A in p.coefficients.items()},
    }


def polynomial_from_dict(data: Any) -> MatrixPolynomial:
    """Scalar form ``{"n", "terms": {"k1,k2": c}}`` or matrix form with ``coefficients``."""
    data = _require(data, ["n"], "polynomial")
    n = _natural(data["n"], "polynomial.n", 1)
    if "terms" in data:
        raw = data["terms"]
        if not isinstance(raw, dict):
            raise ConfigError("polynomial.terms must be an object keyed by multi-index")
        terms = {
            _multi_index(key, n, "polynomial.terms"): complex_from_json(value, f"a_{key}")
            for key, value in raw.items()
        }
        return MatrixPolynomial.scalar(n, terms)
    data = _require(data, ["source_dim", "target_dim", "coefficients"], "polynomial")
    e = _natural(data["source_dim"], "polynomial.source_dim", 1)
    f = _natural(data["target_dim"], "polynomial.target_dim", 1)
    raw = data["coefficients"]
    if not isinstance(raw, dict):
        raise ConfigError("polynomial.coefficients must be an object keyed by multi-index")
    coefficients = {
        _multi_index(key, n, "polynomial.coefficients"): matrix_from_json(value, f"A_{key}", (f, e))
        for key, value in raw.items()
    }
    return MatrixPolynomial(n=n, source_dim=e, target_dim=f, coefficients=coefficients)


# ── Files and reports ────────────────────────────────────────────────


def load_json(path: Union[str, Path]) -> Any:
    """Read a JSON file; decoding problems become ConfigError, I/O errors propagate."""
    raw = Path(path).read_bytes()
    try:
        return json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise ConfigError(f"{path}: not UTF-8 text ({e.reason} at byte {e.start})") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return complex_to_json(complex(value))
    return value


def dumps_report(report: Mapping[str, Any]) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def write_report(report: Mapping[str, Any], path: Optional[Union[str, Path]] = None) -> str:
    """Write the report to ``path`` (if given) and return the text."""
    text = dumps_report(report)
    if path is not None:
        Path(path).write_text(text)
    return text


def format_csv(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([_jsonable(v) for v in row])
    return buffer.getvalue()


__all__ = [
    "complex_to_json",
    "complex_from_json",
    "matrix_to_json",
    "matrix_from_json",
    "kernel_spec_from_dict",
    "space_from_dict",
    "tuple_to_dict",
    "tuple_from_dict",
    "dilation_to_dict",
    "dilation_from_dict",
    "subspace_to_dict",
    "subspace_from_dict",
    "polynomial_to_dict",
    "polynomial_from_dict",
    "load_json",
    "dumps_report",
    "write_report",
    "format_csv",
]
