"""Polymorphisms of a finite space: bistochastic measures and their semigroup.

A polymorphism is stored through its bistochastic measure ``nu`` on the square
of a :class:`~polymorph.finite_space.FiniteSpace`; both marginals of ``nu``
equal the space weights.  Row ``x`` of ``nu`` divided by ``mu[x]`` is the
image (transition measure) of the point ``x``.

Composition follows ``compose(a, b)``: *b acts first, then a*.  In transition
form that is ``P_b @ P_a``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from ._numeric import (
    Scalar,
    abs_sum,
    all_close,
    as_array,
    default_tol,
    eye,
    format_array,
    is_exact,
    rank,
    to_float,
)
from .finite_space import (
    BELL_LIMIT,
    FiniteSpace,
    Partition,
    SizeLimitError,
    enumerate_partitions,
)


@dataclass(frozen=True, eq=False)
class Polymorphism:
    space: FiniteSpace
    nu: np.ndarray

    def __post_init__(self):
        nu = as_array(self.nu, exact=self.space.exact) if not isinstance(self.nu, np.ndarray) else self.nu
        if is_exact(nu) != self.space.exact:
            nu = as_array(nu.tolist(), exact=self.space.exact)
        n = self.space.size
        if nu.shape != (n, n):
            raise ValueError(f"nu has shape {nu.shape}, expected {(n, n)}")
        tol = default_tol(nu)
        if np.any(to_float(nu) < -tol) if tol else any(v < 0 for v in nu.ravel()):
            raise ValueError("bistochastic measure has a negative entry")
        mu = self.space.mu()
        for axis, name in ((1, "row"), (0, "column")):
            sums = nu.sum(axis=axis)
            if not all_close(sums, mu, tol):
                bad = next(i for i in range(n) if not all_close(sums[i:i + 1], mu[i:i + 1], tol))
                raise ValueError(f"{name} marginal {bad} is {sums[bad]}, expected {mu[bad]}")
        nu = nu.copy()
        nu.setflags(write=False)
        object.__setattr__(self, "nu", nu)

    @property
    def size(self) -> int:
        return self.space.size

    @property
    def exact(self) -> bool:
        return self.space.exact

    @property
    def transitions(self) -> np.ndarray:
        """Row-stochastic array ``nu[x][y] / mu[x]``."""
        return self.nu / self.space.mu()[:, None]

    def image(self, x: int) -> "PointMeasure":
        """The transition measure of the point ``x``."""
        return PointMeasure(self.space, self.transitions[x])

    def as_float(self) -> "Polymorphism":
        if not self.exact:
            return self
        return Polymorphism(self.space.as_float(), to_float(self.nu))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polymorphism):
            return NotImplemented
        return self.space == other.space and bool(np.all(self.nu == other.nu))

    __hash__ = None

    def __matmul__(self, other: "Polymorphism") -> "Polymorphism":
        return compose(self, other)

    def __repr__(self) -> str:
        return f"Polymorphism(weights={list(self.space.weights)}, nu={format_array(self.nu)})"

    def to_json(self) -> dict:
        return {"weights": self.space.to_json()["weights"], "nu": format_array(self.nu)}

    @classmethod
    def from_json(cls, data: dict | str) -> "Polymorphism":
        if isinstance(data, str):
            data = json.loads(data)
        space = FiniteSpace(tuple(data["weights"]))
        return cls(space, as_array(data["nu"], exact=space.exact))


@dataclass(frozen=True, eq=False)
class PointMeasure:
    space: FiniteSpace
    mass: np.ndarray

    def __post_init__(self):
        m = self.mass if isinstance(self.mass, np.ndarray) else as_array(self.mass, exact=self.space.exact)
        tol = default_tol(m)
        if m.shape != (self.space.size,):
            raise ValueError("measure length does not match the space")
        total = m.sum()
        if (abs(float(total) - 1.0) > tol) if tol else total != 1:
            raise ValueError(f"point measure has total mass {total}")
        object.__setattr__(self, "mass", m)

    @classmethod
    def delta(cls, space: FiniteSpace, x: int) -> "PointMeasure":
        m = as_array([0] * space.size, exact=space.exact)
        m[x] = Fraction(1) if space.exact else 1.0
        return cls(space, m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointMeasure):
            return NotImplemented
        return self.space == other.space and bool(np.all(self.mass == other.mass))

    __hash__ = None


def _require_same_space(*ps: Polymorphism) -> None:
    first = ps[0].space
    for p in ps[1:]:
        if p.space != first:
            raise ValueError("polymorphisms live on different spaces")


def _from_transitions_unchecked(space: FiniteSpace, P: np.ndarray) -> Polymorphism:
    return Polymorphism(space, space.mu()[:, None] * P)


# -- constructors -------------------------------------------------------------

def identity(space: FiniteSpace) -> Polymorphism:
    return Polymorphism(space, space.mu()[:, None] * eye(space.size, space.exact))


def zero(space: FiniteSpace) -> Polymorphism:
    """The product measure ``mu x mu``, the absorbing element of the semigroup."""
    mu = space.mu()
    return Polymorphism(space, np.outer(mu, mu))


def from_transitions(space: FiniteSpace, P) -> Polymorphism:
    """Polymorphism with transition array ``P``; ``P`` must keep ``mu`` invariant."""
    P = as_array(P, exact=space.exact) if not isinstance(P, np.ndarray) else P
    tol = default_tol(P)
    rows = P.sum(axis=1)
    ones = as_array([1] * space.size, exact=is_exact(P))
    if not all_close(rows, ones, tol):
        bad = next(i for i in range(space.size) if not all_close(rows[i:i + 1], ones[i:i + 1], tol))
        raise ValueError(f"row {bad} of the transition array sums to {rows[bad]}")
    mu = space.mu()
    pushed = mu @ P
    if not all_close(pushed, mu, tol):
        bad = next(i for i in range(space.size) if not all_close(pushed[i:i + 1], mu[i:i + 1], tol))
        raise ValueError(f"transition array does not preserve the measure: column {bad}")
    return _from_transitions_unchecked(space, P)


def permutation(space: FiniteSpace, sigma: Sequence[int]) -> Polymorphism:
    """Deterministic kernel ``x -> sigma[x]``; ``sigma`` must preserve the weights."""
    n = space.size
    if sorted(sigma) != list(range(n)):
        raise ValueError(f"{sigma} is not a permutation of 0..{n - 1}")
    P = as_array([[0] * n for _ in range(n)], exact=space.exact)
    for x, y in enumerate(sigma):
        P[x, y] = Fraction(1) if space.exact else 1.0
    return from_transitions(space, P)


# -- semigroup operations -----------------------------------------------------

def compose(p1: Polymorphism, p2: Polymorphism) -> Polymorphism:
    """Product ``p1 p2``: apply ``p2`` first, then ``p1``."""
    _require_same_space(p1, p2)
    return _from_transitions_unchecked(p1.space, p2.transitions @ p1.transitions)


def conjugate(p: Polymorphism) -> Polymorphism:
    return Polymorphism(p.space, p.nu.T)


def convex_combination(ps: Sequence[Polymorphism], coeffs: Sequence) -> Polymorphism:
    if len(ps) != len(coeffs) or not ps:
        raise ValueError("need one coefficient per polymorphism")
    _require_same_space(*ps)
    c = as_array(list(coeffs), exact=ps[0].exact)
    tol = default_tol(c)
    if any(float(v) < -tol for v in c) or (abs(float(c.sum()) - 1) > tol if tol else c.sum() != 1):
        raise ValueError(f"coefficients {list(c)} are not a probability vector")
    nu = sum((ci * p.nu for ci, p in zip(c, ps)), 0 * ps[0].nu)
    return Polymorphism(ps[0].space, nu)


def power(p: Polymorphism, n: int) -> Polymorphism:
    if n < 0:
        raise ValueError("negative power; use conjugate() for inverses of automorphisms")
    result = eye(p.size, p.exact)
    base = p.transitions
    while n:
        if n & 1:
            result = result @ base
        base = base @ base
        n >>= 1
    return _from_transitions_unchecked(p.space, result)


def weak_distance(p1: Polymorphism, p2: Polymorphism) -> Scalar:
    """Total variation between the bistochastic measures."""
    _require_same_space(p1, p2)
    return abs_sum(p1.nu - p2.nu)


# -- structural predicates ----------------------------------------------------

def _block_mass(p: Polymorphism, xi: Partition) -> np.ndarray:
    """``out[x][j]`` = mass of row ``x`` of ``nu`` inside block ``j``."""
    if xi.size != p.size:
        raise ValueError("partition and polymorphism sizes differ")
    cols = [p.nu[:, list(b)].sum(axis=1) for b in xi.blocks]
    return np.stack(cols, axis=1)


def _full(mass, target, tol) -> bool:
    return mass == target if not tol else abs(float(mass) - float(target)) <= tol


def is_associated(p: Polymorphism, xi: Partition, tol: float | None = None) -> bool:
    """True iff every point's image lies inside the point's own block."""
    tol = default_tol(p.nu) if tol is None else tol
    bm = _block_mass(p, xi)
    mu = p.space.weights
    return all(_full(bm[x, j], mu[x], tol) for j, block in enumerate(xi.blocks) for x in block)


def _block_targets(p: Polymorphism, xi: Partition, tol: float) -> list[int | None]:
    """For each block, the single block receiving all its mass, else None."""
    bm = _block_mass(p, xi)
    mu = p.space.weights
    targets: list[int | None] = []
    for block in xi.blocks:
        found = None
        for j in range(len(xi.blocks)):
            if all(_full(bm[x, j], mu[x], tol) for x in block):
                found = j
                break
        targets.append(found)
    return targets


def is_invariant_partition(p: Polymorphism, xi: Partition, tol: float | None = None) -> bool:
    tol = default_tol(p.nu) if tol is None else tol
    return all(t is not None for t in _block_targets(p, xi, tol))


def is_fixed_partition(p: Polymorphism, xi: Partition, tol: float | None = None) -> bool:
    tol = default_tol(p.nu) if tol is None else tol
    return all(t == i for i, t in enumerate(_block_targets(p, xi, tol)))


def _support(p: Polymorphism, tol: float) -> np.ndarray:
    return to_float(p.nu) > tol if tol else np.vectorize(lambda v: v != 0, otypes=[bool])(p.nu)


def is_ergodic(p: Polymorphism, tol: float | None = None) -> bool:
    """No proper absorbing set.

    Every point carries positive stationary mass, so the support graph has no
    transient states; absence of a proper closed set is strong connectivity.
    """
    if p.size == 1:
        return True
    tol = default_tol(p.nu) if tol is None else tol
    ncomp, _ = connected_components(_support(p, tol).astype(int), directed=True, connection="strong")
    return ncomp == 1


class PrimeScan(NamedTuple):
    prime: bool
    witness: Partition | None


def is_prime(p: Polymorphism, size_limit: int = BELL_LIMIT, tol: float | None = None) -> PrimeScan:
    """Exhaustive scan for an invariant partition other than the one-block partition.

    The discrete partition counts as nontrivial: it is invariant exactly for
    automorphisms, which are never prime on two or more points.
    """
    if p.size > min(size_limit, BELL_LIMIT):
        raise SizeLimitError(f"size_limit exceeded: space has {p.size} points (limit {min(size_limit, BELL_LIMIT)})")
    tol = default_tol(p.nu) if tol is None else tol
    for xi in enumerate_partitions(p.size):
        if len(xi.blocks) == 1:
            continue
        if is_invariant_partition(p, xi, tol):
            return PrimeScan(False, xi)
    return PrimeScan(True, None)


def is_nondegenerate(p: Polymorphism, tol: float | None = None) -> bool:
    """True iff no point's image is a point mass."""
    tol = default_tol(p.nu) if tol is None else tol
    support = _support(p, tol)
    return bool(np.all(support.sum(axis=1) > 1))


class DensityReport(NamedTuple):
    semi_dense: bool
    codense: bool
    dense: bool


def density_check(p: Polymorphism, tol: float | None = None) -> DensityReport:
    """Trivial kernel of the transition array and of its conjugate's."""
    n = p.size
    semi = rank(p.transitions, tol) == n
    co = rank(conjugate(p).transitions, tol) == n
    return DensityReport(semi, co, semi and co)


@dataclass(frozen=True)
class MixingReport:
    distances: tuple
    is_mixing: bool
    rate: float
    tol: float = field(default=1e-9)

    def to_json(self) -> dict:
        from ._numeric import format_scalar

        return {
            "distances": [format_scalar(d) for d in self.distances],
            "is_mixing": self.is_mixing,
            "rate": self.rate,
            "tol": self.tol,
        }


def _geometric_rate(distances: Sequence, floor: float = 1e-13) -> float:
    vals = [float(d) for d in distances]
    if not vals:
        return float("nan")
    if vals[-1] == 0.0:
        return 0.0
    usable = [(i, v) for i, v in enumerate(vals) if v > floor]
    tail = usable[len(usable) // 2:]
    if len(tail) < 2:
        return 0.0
    xs = np.array([i for i, _ in tail], dtype=float)
    ys = np.log(np.array([v for _, v in tail]))
    slope = np.polyfit(xs, ys, 1)[0]
    return float(math.exp(slope))


def mixing_report(p: Polymorphism, N: int = 200, tol: float = 1e-9) -> MixingReport:
    """Distances ``d(p^n, zero)`` for ``n = 1..N`` and a fitted geometric rate."""
    if N < 1:
        raise ValueError("N must be at least 1")
    theta = zero(p.space)
    distances = []
    P = p.transitions
    current = P
    for _ in range(N):
        distances.append(weak_distance(_from_transitions_unchecked(p.space, current), theta))
        current = current @ P
    return MixingReport(tuple(distances), float(distances[-1]) < tol, _geometric_rate(distances), tol)


def factor(p: Polymorphism, xi: Partition) -> Polymorphism:
    """Quotient polymorphism on the blocks of ``xi``."""
    if xi.size != p.size:
        raise ValueError("partition and polymorphism sizes differ")
    quotient = FiniteSpace(tuple(p.space.mass(b) for b in xi.blocks))
    nu = [[p.nu[np.ix_(list(a), list(b))].sum() for b in xi.blocks] for a in xi.blocks]
    return Polymorphism(quotient, as_array(nu, exact=p.exact))


def convolve(p: Polymorphism, m: PointMeasure) -> PointMeasure:
    """Push a probability measure through the transitions of ``p``."""
    if m.space != p.space:
        raise ValueError("measure and polymorphism live on different spaces")
    return PointMeasure(p.space, m.mass @ p.transitions)


# -- Markov chain diagnostics -------------------------------------------------

def sample_markov_chain(p: Polymorphism, length: int, seed: int = 0) -> np.ndarray:
    """Stationary chain started from ``mu`` with the transitions of ``p``."""
    if length < 1:
        raise ValueError("length must be at least 1")
    rng = np.random.default_rng(seed)
    P = to_float(p.transitions)
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    start_cum = np.cumsum(np.array([float(w) for w in p.space.weights]))
    start_cum[-1] = 1.0
    u = rng.random(length)
    states = np.empty(length, dtype=np.int64)
    states[0] = int(np.searchsorted(start_cum, u[0], side="right"))
    for t in range(1, length):
        states[t] = int(np.searchsorted(cum[states[t - 1]], u[t], side="right"))
    return states


def chain_to_csv(states: Sequence[int]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "state"])
    for step, state in enumerate(states):
        writer.writerow([step, int(state)])
    return buf.getvalue()


def _block_entropy(seq: Sequence[int], k: int) -> float:
    if k == 0:
        return 0.0
    counts = Counter(tuple(seq[i:i + k]) for i in range(len(seq) - k + 1))
    total = sum(counts.values())
    return -sum((c / total) * math.log(c / total) for c in counts.values())


def entropy_rate_estimate(sequence: Sequence[int], block: int = 2) -> float:
    """Plug-in estimate ``H_block - H_(block-1)`` in nats."""
    if block < 1:
        raise ValueError("block must be at least 1")
    seq = [int(s) for s in sequence]
    if len(seq) < block:
        raise ValueError("sequence shorter than the block length")
    return max(0.0, _block_entropy(seq, block) - _block_entropy(seq, block - 1))
