"""Finite weighted point sets and the lattice of their set partitions."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from ._numeric import FLOAT_TOL, Scalar, as_array, format_scalar, parse_scalar

BELL_LIMIT = 12


class SizeLimitError(ValueError):
    """Raised when an exhaustive scan would exceed the desk-scale size guard."""


@dataclass(frozen=True)
class FiniteSpace:
    """Points ``0..n-1`` carrying strictly positive weights summing to one.

    Weights are kept as :class:`~fractions.Fraction` (exact mode) or floats.
    """

    weights: tuple

    def __post_init__(self):
        w = tuple(parse_scalar(v) for v in self.weights)
        if not w:
            raise ValueError("a space needs at least one point")
        if any(v <= 0 for v in w):
            raise ValueError(f"weights must be strictly positive, got {w}")
        exact = not any(isinstance(v, float) for v in w)
        if exact:
            if sum(w) != 1:
                raise ValueError(f"weights sum to {sum(w)}, not 1")
        else:
            w = tuple(float(v) for v in w)
            if abs(sum(w) - 1.0) > FLOAT_TOL:
                raise ValueError(f"weights sum to {sum(w)!r}, not 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int, exact: bool = True) -> "FiniteSpace":
        return cls((Fraction(1, n),) * n if exact else (1.0 / n,) * n)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def exact(self) -> bool:
        return isinstance(self.weights[0], Fraction)

    def mu(self) -> np.ndarray:
        return as_array(list(self.weights), exact=self.exact)

    def mass(self, points: Iterable[int]) -> Scalar:
        return sum((self.weights[i] for i in points), Fraction(0) if self.exact else 0.0)

    def as_float(self) -> "FiniteSpace":
        if not self.exact:
            return self
        return FiniteSpace(tuple(float(v) for v in self.weights))

    def to_json(self) -> dict:
        return {"weights": [format_scalar(v) for v in self.weights]}

    @classmethod
    def from_json(cls, data: dict | str) -> "FiniteSpace":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple(data["weights"]))


@dataclass(frozen=True)
class Partition:
    """A set partition of ``{0, ..., size-1}`` in canonical form.

    Blocks are sorted internally and ordered by their least element, so two
    partitions compare equal iff they have the same blocks.
    """

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(set(b))) for b in self.blocks), key=lambda b: b[0] if b else -1))
        if any(len(b) == 0 for b in blocks):
            raise ValueError("partition blocks must be nonempty")
        points = [x for b in blocks for x in b]
        if sorted(points) != list(range(len(points))):
            raise ValueError(f"blocks {blocks} do not partition 0..{len(points) - 1}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.blocks)

    @classmethod
    def trivial(cls, n: int) -> "Partition":
        return cls((tuple(range(n)),))

    @classmethod
    def discrete(cls, n: int) -> "Partition":
        return cls(tuple((i,) for i in range(n)))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        groups: dict[int, list[int]] = {}
        for point, label in enumerate(labels):
            groups.setdefault(label, []).append(point)
        return cls(tuple(groups.values()))

    def labels(self) -> list[int]:
        out = [0] * self.size
        for i, block in enumerate(self.blocks):
            for x in block:
                out[x] = i
        return out

    def block_of(self, x: int) -> tuple:
        for block in self.blocks:
            if x in block:
                return block
        raise IndexError(x)

    def refines(self, other: "Partition") -> bool:
        """True iff every block of ``self`` lies inside a block of ``other``."""
        lab = other.labels()
        return all(len({lab[x] for x in b}) == 1 for b in self.blocks)

    def to_json(self) -> list[list[int]]:
        return [list(b) for b in self.blocks]

    @classmethod
    def from_json(cls, data) -> "Partition":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple(tuple(b) for b in data))


def trivial_partition(n: int) -> Partition:
    return Partition.trivial(n)


def discrete_partition(n: int) -> Partition:
    return Partition.discrete(n)


def enumerate_partitions(n: int, cap: int | None = None) -> Iterator[Partition]:
    """Yield every set partition of ``{0..n-1}`` once.

    Order is lexicographic in the restricted growth string, so the one-block
    partition comes first and the discrete partition last.  Without ``cap``
    the size is limited to ``BELL_LIMIT`` points.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if cap is None and n > BELL_LIMIT:
        raise SizeLimitError(f"size_limit exceeded: n={n} > {BELL_LIMIT} without a cap")
    count = 0
    rgs = [0] * n
    maxima = [0] * n  # maxima[i] = max(rgs[:i+1])
    while True:
        if cap is not None and count >= cap:
            return
        yield Partition.from_labels(rgs)
        count += 1
        # advance to the next restricted growth string
        i = n - 1
        while i > 0 and rgs[i] > maxima[i - 1]:
            i -= 1
        if i == 0:
            return
        rgs[i] += 1
        maxima[i] = max(maxima[i - 1], rgs[i])
        for j in range(i + 1, n):
            rgs[j] = 0
            maxima[j] = maxima[i]


def _check_sizes(p1: Partition, p2: Partition) -> None:
    if p1.size != p2.size:
        raise ValueError(f"partition sizes differ: {p1.size} vs {p2.size}")


def join(p1: Partition, p2: Partition) -> Partition:
    """Coarsest common refinement: the nonempty pairwise block intersections."""
    _check_sizes(p1, p2)
    l1, l2 = p1.labels(), p2.labels()
    return Partition.from_labels([(a, b) for a, b in zip(l1, l2)])


def meet(p1: Partition, p2: Partition) -> Partition:
    """Finest partition coarser than both (closure of block overlap)."""
    _check_sizes(p1, p2)
    parent = list(range(p1.size))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for part in (p1, p2):
        for block in part.blocks:
            root = find(block[0])
            for x in block[1:]:
                parent[find(x)] = root
    return Partition.from_labels([find(x) for x in range(p1.size)])


def classify(p: Partition) -> str:
    if len(p.blocks) == 1:
        return "trivial"
    if len(p.blocks) == p.size:
        return "discrete"
    return "proper"


def conditional_weights(space: FiniteSpace, block: Sequence[int]) -> tuple:
    """Weights of ``block``'s points renormalized to sum to one, in block order."""
    block = list(block)
    if not block:
        raise ValueError("conditional weights of an empty block")
    total = space.mass(block)
    return tuple(space.weights[i] / total for i in block)
