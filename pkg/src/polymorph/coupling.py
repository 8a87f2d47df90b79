"""Zero-diagonal couplings with prescribed equal marginals, and block systems built from them.

A coupling for a probability vector ``p`` is a nonnegative matrix ``q`` with
``q[i][i] == 0`` whose row sums and column sums both equal ``p``.  Read as a
bistochastic measure on ``len(p)`` points, it moves every point somewhere else
while preserving ``p``.  One exists iff ``max(p) <= 1/2``: row ``i`` must fit
its mass ``p[i]`` into the columns ``j != i``, whose total budget is
``1 - p[i]``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._numeric import format_array, format_scalar, to_float, zeros

HALF = Fraction(1, 2)


class Infeasible(ValueError):
    """No zero-diagonal coupling exists; ``index`` is the entry exceeding one half."""

    def __init__(self, p: Sequence[Fraction], index: int):
        self.p = tuple(p)
        self.index = index
        super().__init__(f"p[{index}] = {p[index]} exceeds 1/2: no zero-diagonal coupling exists")


def _as_probability(p: Sequence) -> tuple[Fraction, ...]:
    try:
        vals = tuple(Fraction(repr(v)) if isinstance(v, float) else Fraction(v) for v in p)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"not a probability vector: {p!r}") from exc
    if len(vals) < 2:
        raise ValueError("not a probability vector of length >= 2")
    if any(v < 0 for v in vals) or sum(vals) != 1:
        raise ValueError(f"not a probability vector: entries {[str(v) for v in vals]} sum to {sum(vals)}")
    return vals


def feasibility_check(p: Sequence) -> bool:
    vals = _as_probability(p)
    return max(vals) <= HALF


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    p: tuple
    q: np.ndarray

    def __post_init__(self):
        q = self.q.copy()
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def size(self) -> int:
        return len(self.p)

    def violations(self) -> list[str]:
        """Names of violated invariants; empty for a valid coupling."""
        out = []
        k = self.size
        if any(self.q[i, i] != 0 for i in range(k)):
            out.append("diagonal")
        if any(v < 0 for v in self.q.ravel()):
            out.append("negative entry")
        if any(sum(self.q[i, :]) != self.p[i] for i in range(k)):
            out.append("row marginal")
        if any(sum(self.q[:, j]) != self.p[j] for j in range(k)):
            out.append("column marginal")
        return out

    def transition(self, i: int) -> tuple:
        """Probabilities of moving from label ``i`` to each label: ``q[i][j] / p[i]``."""
        return tuple(self.q[i, j] / self.p[i] for j in range(self.size))

    def to_json(self, exact: bool = True) -> dict:
        if exact:
            return {"p": [format_scalar(v) for v in self.p], "q": format_array(self.q)}
        return {"p": [float(v) for v in self.p], "q": to_float(self.q).tolist()}


def _max_flow(capacity: dict[int, dict[int, Fraction]], source: int, sink: int) -> dict[int, dict[int, Fraction]]:
    """Edmonds-Karp on exact capacities.  Neighbours are visited in insertion order."""
    flow: dict[int, dict[int, Fraction]] = {u: {v: Fraction(0) for v in nbrs} for u, nbrs in capacity.items()}
    for u, nbrs in capacity.items():
        for v in nbrs:
            flow.setdefault(v, {}).setdefault(u, Fraction(0))
    residual = lambda u, v: capacity.get(u, {}).get(v, Fraction(0)) - flow[u][v]  # noqa: E731
    while True:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v in flow[u]:
                if v not in parent and residual(u, v) > 0:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            return flow
        path = []
        v = sink
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        push = min(residual(u, v) for u, v in path)
        for u, v in path:
            flow[u][v] += push
            flow[v][u] -= push


def _flow_coupling(p: Sequence[Fraction]) -> np.ndarray:
    """Zero-diagonal transport of ``p`` onto itself via max-flow; rows are ``1..k``, columns ``k+1..2k``."""
    k = len(p)
    source, sink = 0, 2 * k + 1
    total = sum(p)
    cap: dict[int, dict[int, Fraction]] = {source: {}}
    for i in range(k):
        cap[source][1 + i] = p[i]
        cap[1 + i] = {1 + k + j: total for j in range(k) if j != i}
        cap[1 + k + i] = {sink: p[i]}
    flow = _max_flow(cap, source, sink)
    q = zeros((k, k), exact=True)
    for i in range(k):
        for j in range(k):
            if j != i:
                q[i, j] = max(flow[1 + i][1 + k + j], Fraction(0))
    return q


def solve_coupling(p: Sequence) -> CouplingMatrix:
    """Exact zero-diagonal coupling with both marginals equal to ``p``.

    Uniform ``p`` gets the symmetric solution ``1/(k(k-1))`` off the diagonal.
    Otherwise a floor ``delta`` is placed on every off-diagonal entry, as large
    as keeps the remainder feasible, and the remainder is routed by max-flow;
    when ``max(p) < 1/2`` and ``k >= 3`` this makes every off-diagonal entry
    positive, so no point is sent deterministically.
    """
    vals = _as_probability(p)
    k = len(vals)
    top = max(vals)
    if top > HALF:
        raise Infeasible(vals, vals.index(top))
    if all(v == vals[0] for v in vals):
        q = zeros((k, k), exact=True)
        off = Fraction(1, k * (k - 1))
        for i in range(k):
            for j in range(k):
                if i != j:
                    q[i, j] = off
        return CouplingMatrix(vals, q)
    delta = Fraction(0)
    if k >= 3:
        # remainder p_i - (k-1) delta must stay >= 0 and satisfy max <= total / 2
        delta = min(min(vals) / (k - 1), (HALF - top) / ((k - 1) * Fraction(k - 2, 2))) / 2
    rest = [v - (k - 1) * delta for v in vals]
    q = _flow_coupling(rest)
    for i in range(k):
        for j in range(k):
            if i != j:
                q[i, j] += delta
    coupling = CouplingMatrix(vals, q)
    bad = coupling.violations()
    if bad:  # pragma: no cover - guarded by the feasibility criterion
        raise RuntimeError(f"max-flow returned an invalid coupling: {bad}")
    return coupling


# Klein four-group on labels 0..3: every label is sent to each other label by exactly one involution.
KLEIN_INVOLUTIONS = ((1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0))


def involution_weights(coupling: CouplingMatrix) -> tuple[tuple[Fraction, ...], ...]:
    """For a 4-point block, probability of applying each involution at each label.

    ``out[i][n]`` is the chance that a point labelled ``n`` is moved by
    ``KLEIN_INVOLUTIONS[i]``; columns sum to one.
    """
    if coupling.size != 4:
        raise ValueError("involution form needs a 4-point block")
    return tuple(
        tuple(coupling.q[n, inv[n]] / coupling.p[n] for n in range(4)) for inv in KLEIN_INVOLUTIONS
    )


@dataclass(frozen=True)
class BlockSystem:
    """Disjoint blocks of indices, each carrying a solved coupling; the rest is left fixed."""

    blocks: tuple
    conditional: tuple
    couplings: tuple
    residual: tuple
    residual_mass: Fraction
    grow_requested: bool = False
    labels: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.labels:
            labels = {x: (b, n) for b, block in enumerate(self.blocks) for n, x in enumerate(block)}
            object.__setattr__(self, "labels", labels)

    def to_json(self) -> dict:
        return {
            "blocks": [list(b) for b in self.blocks],
            "couplings": [c.to_json() for c in self.couplings],
            "residual": list(self.residual),
            "residual_mass": format_scalar(self.residual_mass),
            "grow_requested": self.grow_requested,
        }


def _feasible_core(order: list[int], w: Sequence[Fraction]) -> list[int]:
    """Drop the heaviest index while it outweighs all the others together."""
    core = list(order)
    total = sum(w[i] for i in core)
    while len(core) >= 2 and w[core[0]] > total - w[core[0]]:
        total -= w[core[0]]
        core.pop(0)
    return core


def _split(core: list[int], w: Sequence[Fraction], min_block: int, max_block: int) -> list[list[int]]:
    """Cut a feasible core (heaviest first) into feasible blocks of size in [min_block, max_block]."""
    chunks: list[list[int]] = []
    rest = list(core)
    while len(rest) >= 2 * min_block:
        head, tail = rest[0], rest[1:]
        chunk = [head]
        # light indices balance the heavy head
        while tail and (len(chunk) < min_block or w[head] > sum(w[i] for i in chunk[1:])):
            if len(chunk) >= max_block:
                break
            chunk.append(tail.pop())
        remainder = tail
        feasible = w[head] <= sum(w[i] for i in chunk[1:])
        rem_ok = len(remainder) >= min_block and (
            not remainder or w[remainder[0]] <= sum(w[i] for i in remainder[1:])
        )
        if not (feasible and rem_ok and len(chunk) >= min_block):
            break
        chunks.append(sorted(chunk))
        rest = remainder
    chunks.append(sorted(rest))
    return chunks


def block_builder(
    weights: Sequence,
    min_block: int = 4,
    policy: str = "residual",
    residual_cap: Fraction = Fraction(1, 64),
    max_block: int | None = None,
) -> BlockSystem:
    """Group indices into blocks whose normalized weights admit a zero-diagonal coupling.

    Indices heavier than everything else combined can never be balanced and go
    to the residual, heaviest first; if fewer than ``min_block`` indices remain,
    all of them do.  With ``max_block`` the feasible core is cut into several
    blocks.  ``policy`` is ``"residual"`` (accept any residual), ``"grow"``
    (set ``grow_requested`` when the residual mass exceeds ``residual_cap``) or
    ``"strict"`` (raise instead).
    """
    if policy not in ("residual", "grow", "strict"):
        raise ValueError(f"unknown policy {policy!r}")
    if min_block < 2:
        raise ValueError("blocks need at least two points")
    w = tuple(Fraction(repr(v)) if isinstance(v, float) else Fraction(v) for v in weights)
    if any(v <= 0 for v in w):
        raise ValueError("weights must be positive")
    order = sorted(range(len(w)), key=lambda i: (-w[i], i))
    core = _feasible_core(order, w)
    if len(core) < min_block:
        core = []
    if not core:
        chunks: list[list[int]] = []
    elif max_block is None:
        chunks = [sorted(core)]
    else:
        chunks = _split(core, w, min_block, max(max_block, min_block))
    covered = {i for c in chunks for i in c}
    residual = tuple(i for i in range(len(w)) if i not in covered)
    residual_mass = sum((w[i] for i in residual), Fraction(0))
    total = sum(w)
    residual_share = residual_mass / total
    if policy == "strict" and residual_share > residual_cap:
        raise ValueError(f"residual mass {residual_share} exceeds the cap {residual_cap}")
    conditional = []
    couplings = []
    for chunk in chunks:
        mass = sum(w[i] for i in chunk)
        cond = tuple(w[i] / mass for i in chunk)
        conditional.append(cond)
        couplings.append(solve_coupling(cond))
    return BlockSystem(
        blocks=tuple(tuple(c) for c in chunks),
        conditional=tuple(conditional),
        couplings=tuple(couplings),
        residual=residual,
        residual_mass=residual_share,
        grow_requested=policy == "grow" and residual_share > residual_cap,
    )


def coupling_to_json(coupling: CouplingMatrix, exact: bool = True) -> str:
    return json.dumps(coupling.to_json(exact), sort_keys=True)
