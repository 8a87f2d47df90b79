"""Finite-window probes of tail triviality and of primality for the perturbed shift."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .._numeric import exact_nullspace, rank, to_float, zeros
from ..finite_space import BELL_LIMIT, FiniteSpace, SizeLimitError
from ..polymorph_core import Polymorphism, PrimeScan, is_prime
from .cylinder import SymbolicSystem
from .perturbation import PerturbationSpec

MAX_WINDOW = 4
MAX_ALPHABET = 4
DENSE_LIMIT = 64


def _resample(system: SymbolicSystem, exact: bool) -> np.ndarray:
    """Single-site resampling operator ``f -> sum_c w_c f(c)`` as an ``a x a`` array."""
    w = system.w()
    one = np.ones(system.alphabet, dtype=object if exact else float)
    op = np.outer(one, w)
    return op if exact else to_float(op)


def _kron_site(site_op: np.ndarray, i: int, L: int) -> np.ndarray:
    a = site_op.shape[0]
    out = np.ones((1, 1), dtype=site_op.dtype)
    for j in range(L):
        out = np.kron(out, site_op if j == i else np.eye(a, dtype=site_op.dtype))
    return out


def tail_ergodicity_probe(system: SymbolicSystem, window: int, method: str = "auto") -> int:
    """Dimension of the functions on ``[-window, window]`` fixed by every single-coordinate resampling.

    ``method="dense"`` stacks ``E_i - I`` for all sites into one exact matrix
    and takes its null space.  ``"factored"`` uses that the ``E_i`` are
    commuting projections acting on different tensor factors, so the joint
    fixed space is the tensor product of the per-site fixed spaces.  ``"auto"``
    takes the dense route while the table has at most 64 entries.
    """
    if window < 0 or window > MAX_WINDOW:
        raise ValueError(f"window must be in [0, {MAX_WINDOW}], got {window}")
    if system.alphabet > MAX_ALPHABET:
        raise ValueError(f"alphabet must be at most {MAX_ALPHABET}, got {system.alphabet}")
    L = 2 * window + 1
    exact = system.exact
    site = _resample(system, exact)
    size = system.alphabet ** L
    if method == "auto":
        method = "dense" if size <= DENSE_LIMIT else "factored"
    if method == "dense":
        ident = np.eye(size, dtype=site.dtype)
        if exact:
            ident = zeros((size, size), exact=True)
            for i in range(size):
                ident[i, i] = Fraction(1)
        stacked = np.vstack([_kron_site(site, i, L) - ident for i in range(L)])
        if exact:
            return exact_nullspace(stacked).shape[1]
        return size - rank(stacked, 1e-10)
    if method == "factored":
        a = system.alphabet
        ident = zeros((a, a), exact=exact)
        for i in range(a):
            ident[i, i] = Fraction(1) if exact else 1.0
        diff = site - ident
        per_site = exact_nullspace(diff).shape[1] if exact else a - rank(diff, 1e-10)
        return per_site ** L
    raise ValueError(f"unknown method {method!r}")


def window_kernel(spec: PerturbationSpec, W: int) -> Polymorphism:
    """Joint law of ``(x, Pi x)`` read on the coordinates ``[-W, W]``.

    Coordinates ``-W+1..W`` of ``T x`` are coordinates ``-W..W-1`` of ``x``;
    coordinate ``-W`` comes from outside the window and is an independent
    draw from the site weights.  The perturbation then rewrites ``[0, r-1]``,
    which must lie inside the window.
    """
    sys_ = spec.system
    if spec.r - 1 > W:
        raise ValueError(f"window [-{W}, {W}] does not contain the perturbation window [0, {spec.r - 1}]")
    a = sys_.alphabet
    words = list(itertools.product(range(a), repeat=2 * W + 1))
    if len(words) > BELL_LIMIT:
        raise SizeLimitError(f"size_limit exceeded: {len(words)} window words (limit {BELL_LIMIT})")
    index = {w: i for i, w in enumerate(words)}
    M = spec.transition
    exact = sys_.exact
    nu = zeros((len(words), len(words)), exact=exact)
    r = spec.r
    for u in words:
        mu_u = sys_.word_weight(u)
        for c in range(a):
            shifted = (c,) + u[:-1]
            head = shifted[W:W + r]  # sites 0..r-1
            row = spec._index(head)
            for col in range(a ** r):
                prob = M[row, col]
                if prob == 0:
                    continue
                tail = np.unravel_index(col, (a,) * r)
                v = shifted[:W] + tuple(int(t) for t in tail) + shifted[W + r:]
                nu[index[u], index[v]] += mu_u * sys_.weights[c] * prob
    space = FiniteSpace(tuple(sys_.word_weight(w) for w in words))
    return Polymorphism(space, nu)


def cylinder_invariant_partition_scan(spec: PerturbationSpec, W: int) -> PrimeScan:
    """Bounded-window primality certificate.

    Scans every partition of the words on ``[-W, W]`` for one carried into a
    single block by the window kernel.  ``prime=True`` certifies only that no
    partition measurable with respect to this window is invariant; it is not
    a proof of primality for the shift itself.
    """
    return is_prime(window_kernel(spec, W))
