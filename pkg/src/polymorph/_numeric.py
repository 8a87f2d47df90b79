"""Scalar and array helpers shared by the exact (rational) and float code paths.

Exact arrays are numpy ``object`` arrays holding :class:`fractions.Fraction`;
float arrays are ``float64``.  Every public computation keeps the mode of its
inputs, so rational inputs yield rational outputs.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

import numpy as np

Scalar = Union[Fraction, float]

FLOAT_TOL = 1e-12


def parse_scalar(value) -> Scalar:
    """Parse a JSON-ish value.

    Strings (``"2/5"``, ``"0.4"``) and integers become exact fractions,
    Python floats stay floats.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (int, np.integer, Rational)):
        return Fraction(int(value)) if isinstance(value, (int, np.integer)) else Fraction(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    raise TypeError(f"cannot interpret {value!r} as a number")


def as_array(values, exact: bool | None = None) -> np.ndarray:
    """Build an exact (object/Fraction) or float array from nested values.

    With ``exact=None`` the mode is inferred: exact iff no element is a float.
    """
    raw = np.asarray(values, dtype=object)
    flat = [parse_scalar(v) for v in raw.ravel()]
    if exact is None:
        exact = not any(isinstance(v, float) for v in flat)
    if not exact:
        return np.array([float(v) for v in flat], dtype=float).reshape(raw.shape)
    out = np.empty(raw.shape, dtype=object)
    for i, v in enumerate(flat):
        out.flat[i] = Fraction(repr(v)) if isinstance(v, float) else v
    return out


def is_exact(arr: np.ndarray) -> bool:
    return arr.dtype == object


def to_float(arr: np.ndarray) -> np.ndarray:
    return np.asarray(arr, dtype=float) if not is_exact(arr) else np.vectorize(float, otypes=[float])(arr)


def to_exact(arr: np.ndarray) -> np.ndarray:
    """Convert to Fractions.  Floats are converted through their shortest repr."""
    if is_exact(arr):
        return arr
    out = np.empty(arr.shape, dtype=object)
    out.ravel()[:] = [Fraction(repr(float(v))) for v in arr.ravel()]
    return out


def default_tol(arr: np.ndarray) -> float:
    return 0.0 if is_exact(arr) else FLOAT_TOL


def zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape, dtype=float)


def eye(n: int, exact: bool) -> np.ndarray:
    out = zeros((n, n), exact)
    one = Fraction(1) if exact else 1.0
    for i in range(n):
        out[i, i] = one
    return out


def all_close(a: np.ndarray, b: np.ndarray, tol: float = 0.0) -> bool:
    if a.shape != b.shape:
        return False
    if tol == 0.0:
        return bool(np.all(a == b))
    return bool(np.max(np.abs(to_float(a) - to_float(b)), initial=0.0) <= tol)


def abs_sum(arr: np.ndarray) -> Scalar:
    """Sum of absolute values, exact for object arrays."""
    if is_exact(arr):
        return sum((abs(v) for v in arr.ravel()), Fraction(0))
    return float(np.abs(arr).sum())


def format_scalar(value) -> str | float:
    """JSON-friendly form: fractions as ``"p/q"`` strings, floats unchanged."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return float(value)


def format_array(arr: np.ndarray):
    return [format_scalar(v) for v in arr.ravel()] if arr.ndim <= 1 else [format_array(row) for row in arr]


# -- exact linear algebra -----------------------------------------------------

def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                row_r = m[r]
                m[i] = [a - factor * b for a, b in zip(m[i], row_r)]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def exact_rank(arr: np.ndarray) -> int:
    a = to_exact(np.atleast_2d(arr))
    _, pivots = _rref(a.tolist(), a.shape[1])
    return len(pivots)


def exact_nullspace(arr: np.ndarray) -> np.ndarray:
    """Basis of the right null space, one basis vector per column."""
    a = to_exact(np.atleast_2d(arr))
    n = a.shape[1]
    reduced, pivots = _rref(a.tolist(), n)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = zeros((n, len(free)), exact=True)
    for j, fc in enumerate(free):
        basis[fc, j] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            basis[pc, j] = -row[fc]
    return basis


def rank(arr: np.ndarray, tol: float | None = None) -> int:
    if is_exact(arr):
        return exact_rank(arr)
    return int(np.linalg.matrix_rank(np.asarray(arr, dtype=float), tol=tol))


def weighted_operator_norm(op: np.ndarray, weights: Sequence) -> Scalar:
    """Norm of ``f -> op @ f`` on L2 of the weighted point set.

    Returns an exact zero for an exactly-zero object array; otherwise a float.
    """
    if is_exact(op) and all(v == 0 for v in op.ravel()):
        return Fraction(0)
    w = np.sqrt(np.array([float(x) for x in weights]))
    scaled = w[:, None] * to_float(op) / w[None, :]
    return float(np.linalg.norm(scaled, 2))


def fractions_from(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) if not isinstance(v, Fraction) else v for v in values)
