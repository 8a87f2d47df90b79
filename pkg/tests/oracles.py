"""Independent reference computations for the tests.

Nothing here calls into the tensor code paths under test: pairings are summed
word by word over explicit windows, couplings are checked with generic LP and
max-flow solvers, and Bell numbers come from the Bell triangle.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import networkx as nx
import numpy as np
from scipy.optimize import linprog


def bell_triangle(n: int) -> int:
    row = [1]
    for _ in range(n - 1):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[-1]


def lp_feasible(p) -> bool:
    """Is there a zero-diagonal nonnegative matrix with both marginals ``p``?"""
    p = [float(v) for v in p]
    k = len(p)
    cells = [(i, j) for i in range(k) for j in range(k) if i != j]
    A, b = [], []
    for i in range(k):
        A.append([1.0 if c[0] == i else 0.0 for c in cells])
        b.append(p[i])
    for j in range(k):
        A.append([1.0 if c[1] == j else 0.0 for c in cells])
        b.append(p[j])
    res = linprog(np.zeros(len(cells)), A_eq=np.array(A), b_eq=np.array(b), bounds=(0, None), method="highs")
    return res.status == 0


def flow_feasible(p) -> bool:
    """Integer-scaled max-flow on the bipartite graph with the diagonal removed."""
    p = [Fraction(v) for v in p]
    scale = math.lcm(*(v.denominator for v in p))
    ints = [int(v * scale) for v in p]
    g = nx.DiGraph()
    for i, v in enumerate(ints):
        g.add_edge("s", ("r", i), capacity=v)
        g.add_edge(("c", i), "t", capacity=v)
        for j in range(len(ints)):
            if j != i:
                g.add_edge(("r", i), ("c", j), capacity=scale)
    return nx.maximum_flow_value(g, "s", "t") == scale


def entropy(weights) -> float:
    return -sum(float(w) * math.log(float(w)) for w in weights)


def spectral_distances(P: np.ndarray, mu: np.ndarray, N: int) -> list[float]:
    """``sum |nu_n - mu x mu|`` with ``P^n`` rebuilt from an eigendecomposition."""
    vals, vecs = np.linalg.eig(P)
    inv = np.linalg.inv(vecs)
    out = []
    for n in range(1, N + 1):
        Pn = (vecs * vals ** n) @ inv
        out.append(float(np.abs(mu[:, None] * Pn.real - np.outer(mu, mu)).sum()))
    return out


# -- word-level symbolic oracles ---------------------------------------------

def _weight(weights, word):
    out = Fraction(1)
    for c in word:
        out *= weights[c]
    return out


def word_transition(spec, word: tuple) -> list[tuple[tuple, Fraction]]:
    """Images of a base-window word under the perturbation, read off the couplings directly."""
    for b, block in enumerate(spec.blocks):
        heads = [w[: spec.r] for w in block]
        if word in heads:
            i = heads.index(word)
            c = spec.couplings[b]
            return [(heads[j], c.q[i][j] / c.p[i]) for j in range(len(heads)) if c.q[i][j] != 0]
    return [(word, Fraction(1))]


def word_adjoint_transition(spec, word: tuple) -> list[tuple[tuple, Fraction]]:
    """Adjoint images: the transposed coupling, normalized by the source label's weight."""
    for b, block in enumerate(spec.blocks):
        heads = [w[: spec.r] for w in block]
        if word in heads:
            i = heads.index(word)
            c = spec.couplings[b]
            return [(heads[j], c.q[j][i] / c.p[i]) for j in range(len(heads)) if c.q[j][i] != 0]
    return [(word, Fraction(1))]


class Window:
    """Functions on the words of ``[lo, hi]`` stored as dicts keyed by word."""

    def __init__(self, alphabet: int, weights, lo: int, hi: int):
        self.a, self.weights, self.lo, self.hi = alphabet, weights, lo, hi
        self.words = list(itertools.product(range(alphabet), repeat=hi - lo + 1))

    def lift(self, f) -> dict:
        out = {}
        for w in self.words:
            if f.width == 0:
                out[w] = f.table[()]
            else:
                idx = tuple(w[s - self.lo] for s in range(f.start, f.stop + 1))
                out[w] = f.table[idx]
        return out

    def pair(self, h: dict, g: dict):
        return sum(_weight(self.weights, w) * h[w] * g[w] for w in self.words)

    def phi(self, spec, k: int, h: dict, adjoint: bool = False) -> dict:
        """``(V h)(x) = sum_y P(x, y) h(y)`` with the perturbation placed on ``[k, k+r-1]``."""
        if k < self.lo or k + spec.r - 1 > self.hi:
            raise ValueError("perturbation window sticks out of the oracle window")
        off = k - self.lo
        step = word_adjoint_transition if adjoint else word_transition
        out = {}
        for w in self.words:
            total = 0
            for image, prob in step(spec, w[off:off + spec.r]):
                y = w[:off] + image + w[off + spec.r:]
                total += prob * h[y]
            out[w] = total
        return out


def brute_phi_k(spec, f, g, k: int, lo: int, hi: int):
    """``<V(Phi_k) f, g>`` summed over every word of ``[lo, hi]``."""
    win = Window(spec.system.alphabet, spec.system.weights, lo, hi)
    return win.pair(win.phi(spec, k, win.lift(f)), win.lift(g))


def brute_lambda(spec, f, g, n: int, lo: int, hi: int):
    """``<V(Lambda_n) f, g>`` applying ``Phi_0`` first, directly on ``f``."""
    win = Window(spec.system.alphabet, spec.system.weights, lo, hi)
    h = win.lift(f)
    for k in range(n):
        h = win.phi(spec, k, h)
    return win.pair(h, win.lift(g))


def brute_gamma(spec, f, g, n: int, lo: int, hi: int):
    win = Window(spec.system.alphabet, spec.system.weights, lo, hi)
    h = win.lift(f)
    for k in range(n, 0, -1):
        h = win.phi(spec, -k, h)
    return win.pair(h, win.lift(g))
