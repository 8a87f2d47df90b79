"""Random and structured kernels for sweeps, plus the bundled kernel files.

All generators take a :class:`numpy.random.Generator` and return exact
(rational) objects, so a fixed seed always yields the same kernels.
"""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from typing import Iterator, Sequence

import numpy as np

from ._numeric import zeros
from .finite_space import FiniteSpace, Partition
from .polymorph_core import Polymorphism, convex_combination, identity, permutation, zero


def random_weights(n: int, rng: np.random.Generator, denom: int = 12, repeats: bool = False) -> FiniteSpace:
    """Positive rational weights with small denominators.

    With ``repeats`` the weights are drawn from two levels so that nontrivial
    weight-preserving permutations exist.
    """
    if repeats:
        levels = rng.integers(1, 4, size=2)
        raw = [int(levels[int(rng.integers(0, 2))]) for _ in range(n)]
    else:
        raw = [int(v) for v in rng.integers(1, denom + 1, size=n)]
    total = sum(raw)
    return FiniteSpace(tuple(Fraction(v, total) for v in raw))


def preserving_permutation(space: FiniteSpace, rng: np.random.Generator) -> list[int]:
    """Random permutation that only exchanges points of equal weight."""
    sigma = list(range(space.size))
    groups: dict = {}
    for x, w in enumerate(space.weights):
        groups.setdefault(w, []).append(x)
    for members in groups.values():
        shuffled = [members[i] for i in rng.permutation(len(members))]
        for x, y in zip(members, shuffled):
            sigma[x] = y
    return sigma


def cycle_kernel(space: FiniteSpace, rng: np.random.Generator, cycles: int = 3) -> Polymorphism:
    """Start from the identity and push mass around random cycles.

    Moving ``t`` from ``nu[x_i][x_i]`` to ``nu[x_i][x_(i+1)]`` along a cycle
    keeps every row and column sum, so the result stays bistochastic.
    """
    n = space.size
    nu = zeros((n, n), exact=True)
    for x in range(n):
        nu[x, x] = space.weights[x]
    for _ in range(cycles):
        length = int(rng.integers(2, n + 1)) if n >= 2 else 1
        if length < 2:
            break
        pts = [int(v) for v in rng.choice(n, size=length, replace=False)]
        room = min(nu[x, x] for x in pts)
        t = room * Fraction(int(rng.integers(1, 5)), 5)
        for i, x in enumerate(pts):
            y = pts[(i + 1) % length]
            nu[x, x] -= t
            nu[x, y] += t
    return Polymorphism(space, nu)


def block_theta(space: FiniteSpace, xi: Partition) -> Polymorphism:
    """Independent resampling inside each block: ``nu[x][y] = mu[x] mu[y] / mu(B)``."""
    n = space.size
    nu = zeros((n, n), exact=space.exact)
    for block in xi.blocks:
        mass = space.mass(block)
        for x in block:
            for y in block:
                nu[x, y] = space.weights[x] * space.weights[y] / mass
    return Polymorphism(space, nu)


def block_permutation(space: FiniteSpace, xi: Partition, sigma: Sequence[int]) -> Polymorphism:
    """Send block ``b`` onto block ``sigma[b]`` and resample inside it.

    Blocks exchanged by ``sigma`` must carry equal mass.
    """
    n = space.size
    nu = zeros((n, n), exact=space.exact)
    for b, block in enumerate(xi.blocks):
        target = xi.blocks[sigma[b]]
        mass = space.mass(target)
        if mass != space.mass(block):
            raise ValueError(f"block {b} and its image have different masses")
        for x in block:
            for y in target:
                nu[x, y] = space.weights[x] * space.weights[y] / mass
    return Polymorphism(space, nu)


def random_partition(n: int, rng: np.random.Generator, blocks: int | None = None) -> Partition:
    k = blocks if blocks is not None else int(rng.integers(1, n + 1))
    labels = [int(v) for v in rng.integers(0, k, size=n)]
    return Partition.from_labels(labels)


def random_kernel(space: FiniteSpace, rng: np.random.Generator) -> Polymorphism:
    """Convex mixture of a cycle kernel, a weight-preserving permutation and ``Theta``.

    Mixture weights are occasionally zero, so sparse kernels (with invariant
    partitions) appear alongside fully supported ones.
    """
    parts = [cycle_kernel(space, rng), permutation(space, preserving_permutation(space, rng)), zero(space)]
    raw = [int(v) for v in rng.integers(0, 4, size=3)]
    if sum(raw) == 0:
        raw[0] = 1
    total = sum(raw)
    return convex_combination(parts, [Fraction(v, total) for v in raw])


def mixed_corpus(rng: np.random.Generator, count: int, max_size: int = 6) -> Iterator[Polymorphism]:
    """Cycle through permutations, ``Theta``, block kernels and random mixtures."""
    for i in range(count):
        n = int(rng.integers(1, max_size + 1))
        kind = i % 5
        if kind == 0:
            space = random_weights(n, rng, repeats=True)
            yield permutation(space, preserving_permutation(space, rng))
        elif kind == 1:
            yield zero(random_weights(n, rng))
        elif kind == 2:
            space = random_weights(n, rng)
            yield block_theta(space, random_partition(n, rng))
        elif kind == 3:
            # two blocks of equal mass swapped
            half = max(1, n // 2)
            space = FiniteSpace.uniform(2 * half)
            xi = Partition.from_labels([0] * half + [1] * half)
            yield block_permutation(space, xi, [1, 0])
        else:
            yield random_kernel(random_weights(n, rng, repeats=bool(rng.integers(0, 2))), rng)


def standard_kernels() -> dict[str, Polymorphism]:
    """Small named kernels used by the bundled corpus and the tests."""
    u2, u4 = FiniteSpace.uniform(2), FiniteSpace.uniform(4)
    w4 = FiniteSpace((Fraction(2, 5), Fraction(3, 10), Fraction(1, 5), Fraction(1, 10)))
    two_blocks = Partition([[0, 1], [2, 3]])
    return {
        "identity_w4": identity(w4),
        "theta_w4": zero(w4),
        "swap": permutation(u2, [1, 0]),
        "lazy_flip": Polymorphism(u2, [[Fraction(9, 20), Fraction(1, 20)], [Fraction(1, 20), Fraction(9, 20)]]),
        "cycle4": permutation(u4, [1, 2, 3, 0]),
        "block_diagonal": block_theta(u4, two_blocks),
        "block_swap": block_permutation(u4, two_blocks, [1, 0]),
    }


def bundled_kernels() -> dict[str, Polymorphism]:
    """Kernels shipped as JSON under ``polymorph/data/kernels``, keyed by file stem."""
    root = resources.files("polymorph") / "data" / "kernels"
    out = {}
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            out[entry.name[:-5]] = Polymorphism.from_json(json.loads(entry.read_text()))
    return out
