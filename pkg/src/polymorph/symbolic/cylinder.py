"""Bernoulli shifts and cylinder functions on two-sided sequences.

The shift ``T`` is the right shift, ``(T x)_i = x_(i-1)``, and a polymorphism
acts on functions by integrating against its images, so ``T`` acts by
``f -> f o T``.  A function of coordinate 0 is carried to a function of
coordinate -1.

A :class:`CylinderFunction` stores a table of shape ``(a,) * width`` whose
axis ``j`` is the symbol at site ``start + j``.  Word order is lexicographic
with the lowest site most significant, matching numpy's C order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .._numeric import as_array, format_scalar, is_exact, parse_scalar, to_exact, to_float


@dataclass(frozen=True)
class SymbolicSystem:
    """Bernoulli product measure with the given site weights."""

    weights: tuple

    def __post_init__(self):
        w = tuple(parse_scalar(v) for v in self.weights)
        if not w or any(v <= 0 for v in w):
            raise ValueError("site weights must be strictly positive")
        exact = not any(isinstance(v, float) for v in w)
        if exact and sum(w) != 1:
            raise ValueError(f"site weights sum to {sum(w)}")
        if not exact:
            w = tuple(float(v) for v in w)
            if abs(sum(w) - 1) > 1e-12:
                raise ValueError(f"site weights sum to {sum(w)}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, alphabet: int) -> "SymbolicSystem":
        return cls((Fraction(1, alphabet),) * alphabet)

    @property
    def alphabet(self) -> int:
        return len(self.weights)

    @property
    def exact(self) -> bool:
        return isinstance(self.weights[0], Fraction)

    def w(self) -> np.ndarray:
        return as_array(list(self.weights), exact=self.exact)

    def word_weight(self, word: Sequence[int]):
        out = Fraction(1) if self.exact else 1.0
        for c in word:
            out *= self.weights[c]
        return out

    def words(self, length: int):
        return list(itertools.product(range(self.alphabet), repeat=length))

    def to_json(self) -> dict:
        return {"alphabet": self.alphabet, "weights": [format_scalar(v) for v in self.weights]}


@dataclass(frozen=True, eq=False)
class CylinderFunction:
    start: int
    table: np.ndarray

    def __post_init__(self):
        t = self.table if isinstance(self.table, np.ndarray) else np.asarray(self.table)
        if t.ndim and len(set(t.shape)) != 1:
            raise ValueError(f"table shape {t.shape} is not (a,)*width")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    # -- constructors ----------------------------------------------------------

    @classmethod
    def from_words(cls, window: tuple[int, int], values: Sequence, alphabet: int, exact: bool | None = None):
        """Table listed word by word over ``window = (a, b)``."""
        lo, hi = window
        width = hi - lo + 1
        if len(values) != alphabet ** width:
            raise ValueError(f"need {alphabet ** width} values for window {window}, got {len(values)}")
        arr = as_array(list(values), exact=exact).reshape((alphabet,) * width)
        return cls(lo, arr).canonical()

    @classmethod
    def on_site(cls, site: int, values: Sequence, exact: bool | None = None) -> "CylinderFunction":
        return cls(site, as_array(list(values), exact=exact)).canonical()

    @classmethod
    def constant(cls, value, exact: bool | None = None) -> "CylinderFunction":
        return cls(0, as_array(value, exact=exact))

    # -- shape -----------------------------------------------------------------

    @property
    def width(self) -> int:
        return self.table.ndim

    @property
    def stop(self) -> int:
        return self.start + self.width - 1

    @property
    def window(self) -> tuple[int, int] | None:
        return None if self.width == 0 else (self.start, self.stop)

    @property
    def exact(self) -> bool:
        return is_exact(self.table)

    def is_constant(self) -> bool:
        return self.width == 0

    def canonical(self) -> "CylinderFunction":
        """Drop end coordinates the function does not depend on."""
        t, start = self.table, self.start
        while t.ndim and np.all(t == t[:1]):
            t, start = t[0, ...], start + 1
        while t.ndim and np.all(t == t[..., :1]):
            t = t[..., 0]
        if t is self.table and start == self.start:
            return self
        return CylinderFunction(start if t.ndim else 0, np.asarray(t, dtype=self.table.dtype))

    def extend(self, lo: int, hi: int, alphabet: int) -> np.ndarray:
        """The table broadcast to the window ``[lo, hi]``, which must contain the own window."""
        if self.width and (lo > self.start or hi < self.stop):
            raise ValueError("extension window must contain the function window")
        if self.width == 0:
            return np.broadcast_to(self.table, (alphabet,) * (hi - lo + 1)).copy()
        before, after = self.start - lo, hi - self.stop
        t = self.table.reshape((1,) * before + self.table.shape + (1,) * after)
        return np.broadcast_to(t, (alphabet,) * (hi - lo + 1)).copy()

    def astype(self, exact: bool) -> "CylinderFunction":
        if exact == self.exact:
            return self
        return CylinderFunction(self.start, to_exact(self.table) if exact else to_float(self.table))

    def __call__(self, x: Mapping[int, int]):
        """Value at a sequence given as a mapping from sites to symbols."""
        idx = tuple(x[self.start + j] for j in range(self.width))
        return self.table[idx] if idx else self.table[()]

    def values(self) -> list:
        return list(self.table.ravel())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CylinderFunction):
            return NotImplemented
        a, b = self.canonical(), other.canonical()
        return a.window == b.window and a.table.shape == b.table.shape and bool(np.all(a.table == b.table))

    __hash__ = None

    def __repr__(self) -> str:
        return f"CylinderFunction(window={self.window}, values={[format_scalar(v) for v in self.values()]})"

    def to_json(self) -> dict:
        return {"window": list(self.window) if self.window else None, "values": [format_scalar(v) for v in self.values()]}

    @classmethod
    def from_json(cls, data: dict, alphabet: int) -> "CylinderFunction":
        if data.get("window") is None:
            return cls.constant(data["values"][0])
        return cls.from_words(tuple(data["window"]), data["values"], alphabet)


def shift_apply(f: CylinderFunction, k: int) -> CylinderFunction:
    """Operator of ``T^k``: ``f -> f o T^k``, which moves the window by ``-k``."""
    if k == 0 or f.width == 0:
        return f
    return CylinderFunction(f.start - k, f.table)


def _contract_front(t: np.ndarray, w: np.ndarray, count: int) -> np.ndarray:
    for _ in range(count):
        t = np.tensordot(w, t, axes=([0], [0]))
    return t


def _contract_back(t: np.ndarray, w: np.ndarray, count: int) -> np.ndarray:
    for _ in range(count):
        t = np.tensordot(t, w, axes=([t.ndim - 1], [0]))
    return t


def _scalar(t):
    return t[()] if isinstance(t, np.ndarray) else t


def _weights_for(system: SymbolicSystem, *fs: CylinderFunction) -> np.ndarray:
    exact = system.exact and all(f.exact for f in fs)
    w = system.w()
    return w if exact else to_float(w)


def expectation(system: SymbolicSystem, f: CylinderFunction):
    w = _weights_for(system, f)
    return _scalar(_contract_front(f.table, w, f.width))


def marginal(system: SymbolicSystem, f: CylinderFunction, lo: int, hi: int) -> np.ndarray:
    """Conditional expectation of ``f`` given the coordinates ``lo..hi`` (inside the window)."""
    w = _weights_for(system, f)
    t = _contract_front(f.table, w, lo - f.start)
    return _contract_back(t, w, f.stop - hi)


def inner(system: SymbolicSystem, f: CylinderFunction, g: CylinderFunction):
    """``<f, g>`` under the product measure, summing only over shared coordinates."""
    if f.width == 0 or g.width == 0:
        return expectation(system, f) * expectation(system, g)
    lo, hi = max(f.start, g.start), min(f.stop, g.stop)
    if lo > hi:
        return expectation(system, f) * expectation(system, g)
    w = _weights_for(system, f, g)
    prod = marginal(system, f, lo, hi) * marginal(system, g, lo, hi)
    return _scalar(_contract_front(prod, w, hi - lo + 1))


def norm2(system: SymbolicSystem, f: CylinderFunction):
    return inner(system, f, f)


def random_cylinder(
    system: SymbolicSystem,
    lo: int,
    hi: int,
    rng: np.random.Generator,
    max_width: int = 3,
    value_range: tuple[int, int] = (-3, 3),
) -> CylinderFunction:
    """Integer-valued cylinder function on a random sub-window of ``[lo, hi]``."""
    width = int(rng.integers(1, min(max_width, hi - lo + 1) + 1))
    start = int(rng.integers(lo, hi - width + 2))
    vals = rng.integers(value_range[0], value_range[1] + 1, size=system.alphabet ** width)
    return CylinderFunction.from_words((start, start + width - 1), [int(v) for v in vals], system.alphabet,
                                       exact=system.exact)
