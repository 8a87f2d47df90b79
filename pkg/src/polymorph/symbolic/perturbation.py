"""The local perturbation and its translates.

A :class:`PerturbationSpec` describes a polymorphism that rewrites the word on
the base window ``[0, r-1]``: inside each block of words it moves the current
word to another word of the same block, with probabilities taken from the
block's zero-diagonal coupling; words in no block stay put.  Its translate by
``k`` acts the same way on ``[k, k+r-1]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .._numeric import to_float, zeros
from ..coupling import CouplingMatrix, block_builder, solve_coupling
from .cylinder import CylinderFunction, SymbolicSystem

GROW_LIMIT = 4096


class DegeneratePerturbationWarning(UserWarning):
    """The perturbation has no blocks and acts as the identity."""


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    system: SymbolicSystem
    r: int
    blocks: tuple
    couplings: tuple = ()
    residual_cap: Fraction = Fraction(1, 64)

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("the base window needs at least one site")
        blocks = tuple(tuple(tuple(int(c) for c in word) for word in block) for block in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not self.couplings and _associated(self):
            sols = tuple(solve_coupling(self.conditional_weights(b)) for b in range(len(blocks)))
            object.__setattr__(self, "couplings", sols)

    @property
    def base_window(self) -> tuple[int, int]:
        return (0, self.r - 1)

    def window(self, k: int) -> tuple[int, int]:
        return (k, k + self.r - 1)

    def conditional_weights(self, b: int) -> tuple:
        ws = [self.system.word_weight(word[: self.r]) for word in self.blocks[b]]
        total = sum(ws)
        return tuple(v / total for v in ws)

    @property
    def residual_words(self) -> list[tuple]:
        used = {word[: self.r] for block in self.blocks for word in block}
        return [w for w in self.system.words(self.r) if w not in used]

    @property
    def residual_mass(self):
        return sum((self.system.word_weight(w) for w in self.residual_words), Fraction(0) if self.system.exact else 0.0)

    def is_nondegenerate(self) -> bool:
        """Every word is moved, and never deterministically."""
        if self.residual_words:
            return False
        return all(sum(1 for v in c.q[i] if v != 0) >= 2 for c in self.couplings for i in range(c.size))

    def _index(self, word) -> int:
        idx = 0
        for c in word[: self.r]:
            idx = idx * self.system.alphabet + c
        return idx

    @cached_property
    def transition(self) -> np.ndarray:
        """Row-stochastic array on the ``a**r`` words of the base window."""
        return self._build(adjoint=False)

    @cached_property
    def adjoint_transition(self) -> np.ndarray:
        """Transition array of the conjugate: each block uses its transposed coupling."""
        return self._build(adjoint=True)

    def _build(self, adjoint: bool) -> np.ndarray:
        if not _associated(self):
            raise ValueError("perturbation is not associated with its base window")
        exact = self.system.exact
        size = self.system.alphabet ** self.r
        M = zeros((size, size), exact=True)
        for idx in range(size):
            M[idx, idx] = Fraction(1)
        for b, block in enumerate(self.blocks):
            coupling: CouplingMatrix = self.couplings[b]
            cond = self.conditional_weights(b)
            matches = (
                tuple(coupling.p) == tuple(cond)
                if exact
                else max(abs(float(x) - float(y)) for x, y in zip(coupling.p, cond)) <= 1e-12
            )
            if len(coupling.p) != len(cond) or not matches:
                raise ValueError(f"coupling of block {b} does not match its conditional weights")
            for i, wi in enumerate(block):
                row = self._index(wi)
                M[row, row] = Fraction(0)
                for j, wj in enumerate(block):
                    mass = coupling.q[j, i] if adjoint else coupling.q[i, j]
                    M[row, self._index(wj)] = mass / coupling.p[i]
        if not exact:
            M = to_float(M)
        M.setflags(write=False)
        return M

    def to_json(self) -> dict:
        return {
            "system": self.system.to_json(),
            "r": self.r,
            "blocks": [[list(w) for w in block] for block in self.blocks],
            "couplings": [c.to_json() for c in self.couplings],
            "residual_mass": str(self.residual_mass),
        }


def _associated(spec: PerturbationSpec) -> bool:
    a = spec.system.alphabet
    seen = set()
    for block in spec.blocks:
        if len(block) < 2:
            return False
        contexts = set()
        for word in block:
            if len(word) < spec.r or any(not 0 <= c < a for c in word):
                return False
            contexts.add(word[spec.r:])
            if word[: spec.r] in seen:
                return False
            seen.add(word[: spec.r])
        if len(contexts) != 1:
            return False
    return True


def association_check(spec: PerturbationSpec) -> bool:
    """True iff every block only rewrites coordinates inside the base window.

    A perturbation passing this check changes finitely many coordinates, so
    it moves each sequence within its class of the finitely-differing relation.
    """
    if not spec.blocks:
        warnings.warn("perturbation has no blocks; it is the identity and degenerate",
                      DegeneratePerturbationWarning, stacklevel=2)
        return True
    return _associated(spec)


def build_perturbation(
    system: SymbolicSystem,
    r: int = 1,
    min_block: int | None = None,
    residual_cap: Fraction = Fraction(1, 64),
    policy: str = "residual",
    max_block: int | None = None,
) -> PerturbationSpec:
    """Blocks over the words of ``[0, r-1]`` from :func:`~polymorph.coupling.block_builder`.

    With ``policy="grow"`` the window is lengthened until the residual mass
    fits under ``residual_cap`` (up to ``GROW_LIMIT`` words).
    """
    while True:
        words = system.words(r)
        weights = [system.word_weight(w) for w in words]
        mb = min_block if min_block is not None else min(4, len(words))
        bs = block_builder(weights, mb, policy, residual_cap, max_block)
        if not bs.grow_requested:
            break
        if system.alphabet ** (r + 1) > GROW_LIMIT:
            raise ValueError(f"residual mass {bs.residual_mass} still above {residual_cap} at r={r}")
        r += 1
    blocks = tuple(tuple(words[i] for i in block) for block in bs.blocks)
    return PerturbationSpec(system, r, blocks, bs.couplings, residual_cap)


def _apply(f: CylinderFunction, spec: PerturbationSpec, k: int, M: np.ndarray) -> CylinderFunction:
    lo_b, hi_b = spec.window(k)
    if f.width == 0 or hi_b < f.start or lo_b > f.stop:
        return f
    a, r = spec.system.alphabet, spec.r
    exact = spec.system.exact and f.exact
    f = f.astype(exact)
    M = M if exact else to_float(M)
    lo, hi = min(f.start, lo_b), max(f.stop, hi_b)
    t = f.extend(lo, hi, a)
    off = lo_b - lo
    axes = list(range(off, off + r))
    t = np.moveaxis(t, axes, list(range(r)))
    shape = t.shape
    t = (M @ t.reshape(a ** r, -1)).reshape(shape)
    t = np.moveaxis(t, list(range(r)), axes)
    return CylinderFunction(lo, t).canonical()


def phi_apply(f: CylinderFunction, spec: PerturbationSpec, k: int = 0) -> CylinderFunction:
    """Markov operator of the perturbation translated to ``[k, k+r-1]``.

    Returns ``f`` itself when the windows do not meet.
    """
    return _apply(f, spec, k, spec.transition)


def phi_adjoint_apply(g: CylinderFunction, spec: PerturbationSpec, k: int = 0) -> CylinderFunction:
    return _apply(g, spec, k, spec.adjoint_transition)


def identity_spec(system: SymbolicSystem, r: int = 1) -> PerturbationSpec:
    """The empty perturbation (all words residual)."""
    return PerturbationSpec(system, r, ())


__all__ = [
    "DegeneratePerturbationWarning",
    "PerturbationSpec",
    "association_check",
    "build_perturbation",
    "identity_spec",
    "phi_adjoint_apply",
    "phi_apply",
]
