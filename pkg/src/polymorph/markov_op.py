"""Markov operators on the weighted function space of a finite space.

A :class:`MarkovMatrix` acts on functions by ``(V f)(x) = sum_y op[x, y] f(y)``
with inner product ``<f, g> = sum_x mu[x] f(x) g(x)``.  The map
:func:`operator_of` sends a polymorphism to its operator; it reverses products,
``operator_of(compose(a, b)) == operator_of(b) @ operator_of(a)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from ._numeric import (
    Scalar,
    all_close,
    as_array,
    default_tol,
    format_array,
    format_scalar,
    is_exact,
    to_float,
    weighted_operator_norm,
)
from .finite_space import BELL_LIMIT, FiniteSpace, Partition, SizeLimitError, enumerate_partitions
from .polymorph_core import (
    Polymorphism,
    compose,
    conjugate,
    power,
    weak_distance,
)

NORM_SLACK = 1e-12


class AxiomViolation(ValueError):
    """An array that fails one of the Markov operator axioms."""


@dataclass(frozen=True, eq=False)
class MarkovMatrix:
    space: FiniteSpace
    op: np.ndarray

    def __post_init__(self):
        op = self.op if isinstance(self.op, np.ndarray) else as_array(self.op, exact=self.space.exact)
        if op.shape != (self.space.size, self.space.size):
            raise ValueError(f"operator shape {op.shape} does not match a space of size {self.space.size}")
        op = op.copy()
        op.setflags(write=False)
        object.__setattr__(self, "op", op)

    @property
    def exact(self) -> bool:
        return is_exact(self.op)

    def __matmul__(self, other: "MarkovMatrix") -> "MarkovMatrix":
        if other.space != self.space:
            raise ValueError("operators act on different spaces")
        return MarkovMatrix(self.space, self.op @ other.op)

    def apply(self, f) -> np.ndarray:
        return self.op @ np.asarray(f, dtype=self.op.dtype)

    def inner(self, f, g) -> Scalar:
        mu = self.space.mu()
        return (mu * np.asarray(f, dtype=self.op.dtype) * np.asarray(g, dtype=self.op.dtype)).sum()

    def __eq__(self, other) -> bool:
        if not isinstance(other, MarkovMatrix):
            return NotImplemented
        return self.space == other.space and bool(np.all(self.op == other.op))

    __hash__ = None

    def to_json(self) -> dict:
        return {"weights": self.space.to_json()["weights"], "op": format_array(self.op)}


def operator_of(p: Polymorphism) -> MarkovMatrix:
    return MarkovMatrix(p.space, p.transitions)


def _ones(space: FiniteSpace, exact: bool) -> np.ndarray:
    return as_array([1] * space.size, exact=exact)


@dataclass(frozen=True)
class AxiomReport:
    positive: bool
    unit: bool
    co_unit: bool
    norm: float
    contraction: bool
    failing_row: int | None = None
    failing_column: int | None = None

    @property
    def ok(self) -> bool:
        return self.positive and self.unit and self.co_unit and self.contraction

    @property
    def norm_implied(self) -> bool:
        """Positivity plus both unit conditions force the contraction bound."""
        return not (self.positive and self.unit and self.co_unit) or self.contraction

    def failures(self) -> list[str]:
        out = []
        if not self.positive:
            out.append("positivity")
        if not self.unit:
            out.append(f"V1=1 (row {self.failing_row})")
        if not self.co_unit:
            out.append(f"V*1=1 (column {self.failing_column})")
        if not self.contraction:
            out.append(f"contraction (norm {self.norm})")
        return out

    def to_json(self) -> dict:
        return {
            "positive": self.positive,
            "unit": self.unit,
            "co_unit": self.co_unit,
            "norm": self.norm,
            "contraction": self.contraction,
            "failing_row": self.failing_row,
            "failing_column": self.failing_column,
            "ok": self.ok,
        }


def axioms_check(v: MarkovMatrix) -> AxiomReport:
    op = v.op
    tol = default_tol(op)
    exact = is_exact(op)
    positive = all(x >= 0 for x in op.ravel()) if exact else bool(np.all(op >= -tol))
    ones = _ones(v.space, exact)
    rows = op @ ones
    mu = v.space.mu() if exact else to_float(v.space.mu())
    cols = mu @ op  # V*1 = 1  <=>  mu^T V = mu^T
    bad_row = next((i for i in range(len(rows)) if not all_close(rows[i:i + 1], ones[i:i + 1], tol)), None)
    bad_col = next((j for j in range(len(cols)) if not all_close(cols[j:j + 1], mu[j:j + 1], tol)), None)
    norm = float(weighted_operator_norm(op, v.space.weights))
    return AxiomReport(
        positive=positive,
        unit=bad_row is None,
        co_unit=bad_col is None,
        norm=norm,
        contraction=norm <= 1 + NORM_SLACK,
        failing_row=bad_row,
        failing_column=bad_col,
    )


def kernel_of(v: MarkovMatrix) -> Polymorphism:
    report = axioms_check(v)
    if not report.ok:
        raise AxiomViolation("not a Markov operator: " + ", ".join(report.failures()))
    return Polymorphism(v.space, v.space.mu()[:, None] * v.op)


def adjoint(v: MarkovMatrix) -> MarkovMatrix:
    """Adjoint for the weighted inner product: ``op*[y, x] = mu[x] op[x, y] / mu[y]``."""
    mu = v.space.mu()
    if not is_exact(v.op):
        mu = to_float(mu)
    return MarkovMatrix(v.space, (mu[:, None] * v.op).T / mu[:, None])


def operator_norm(a: MarkovMatrix | np.ndarray, space: FiniteSpace | None = None) -> Scalar:
    if isinstance(a, MarkovMatrix):
        return weighted_operator_norm(a.op, a.space.weights)
    return weighted_operator_norm(a, space.weights)


def antiisomorphism_check(p1: Polymorphism, p2: Polymorphism) -> Scalar:
    """Norm of ``V(p1 p2) - V(p2) V(p1)``; zero for a correct correspondence."""
    if p1.space != p2.space:
        raise ValueError("polymorphisms live on different spaces")
    lhs = operator_of(compose(p1, p2)).op
    rhs = (operator_of(p2) @ operator_of(p1)).op
    return weighted_operator_norm(lhs - rhs, p1.space.weights)


class IsometryScan(NamedTuple):
    totally_nonisometric: bool
    witness: Partition | None


def _indicators(xi: Partition, exact: bool) -> np.ndarray:
    n = xi.size
    cols = []
    for block in xi.blocks:
        col = [0] * n
        for x in block:
            col[x] = 1
        cols.append(col)
    return as_array(cols, exact=exact).T


def _subspace_invariant(op: np.ndarray, xi: Partition, tol: float) -> bool:
    """Does ``op`` map every block indicator to a function constant on blocks?"""
    images = op @ _indicators(xi, is_exact(op))
    for block in xi.blocks:
        rows = images[list(block)]
        if not all_close(rows, np.repeat(rows[:1], len(block), axis=0), tol):
            return False
    return True


def _isometric_on(op: np.ndarray, mu: np.ndarray, xi: Partition, tol: float) -> bool:
    """Gram-matrix test on the centered block indicators (mean-zero, xi-measurable)."""
    ind = _indicators(xi, is_exact(op))
    masses = mu @ ind
    basis = ind[:, 1:] - masses[None, 1:]  # drop one block: the rest span the centered subspace
    image = op @ basis
    gram = basis.T @ (mu[:, None] * basis)
    gram_image = image.T @ (mu[:, None] * image)
    return all_close(gram, gram_image, tol)


def is_isometric_partition(v: MarkovMatrix, xi: Partition, tol: float | None = None,
                           require_adjoint_invariance: bool = False) -> bool:
    """Is ``xi`` a witness: its measurable subspace invariant, and ``V`` isometric on it minus constants?"""
    op = v.op
    if tol is None:
        tol = default_tol(op) if is_exact(op) else 1e-10
    mu = v.space.mu() if is_exact(op) else to_float(v.space.mu())
    if not _subspace_invariant(op, xi, tol):
        return False
    if require_adjoint_invariance and not _subspace_invariant(adjoint(v).op, xi, tol):
        return False
    return _isometric_on(op, mu, xi, tol)


def isometric_subalgebra_scan(
    v: MarkovMatrix,
    size_limit: int = BELL_LIMIT,
    tol: float | None = None,
    require_adjoint_invariance: bool = False,
) -> IsometryScan:
    """Look for a block-measurable subalgebra, orthogonal to constants, preserved isometrically.

    Each partition other than the one-block partition is tested for invariance of
    its measurable subspace first and isometry second.  ``require_adjoint_invariance``
    additionally demands invariance under the adjoint.
    """
    n = v.space.size
    if n > min(size_limit, BELL_LIMIT):
        raise SizeLimitError(f"size_limit exceeded: space has {n} points (limit {min(size_limit, BELL_LIMIT)})")
    op = v.op
    if tol is None:
        tol = default_tol(op) if is_exact(op) else 1e-10
    mu = v.space.mu() if is_exact(op) else to_float(v.space.mu())
    op_star = adjoint(v).op if require_adjoint_invariance else None
    for xi in enumerate_partitions(n):
        if len(xi.blocks) == 1:
            continue
        if not _subspace_invariant(op, xi, tol):
            continue
        if op_star is not None and not _subspace_invariant(op_star, xi, tol):
            continue
        if _isometric_on(op, mu, xi, tol):
            return IsometryScan(False, xi)
    return IsometryScan(True, None)


def intertwining_residual(v: MarkovMatrix, u: MarkovMatrix, l: MarkovMatrix) -> Scalar:
    """Norm of ``v l - l u``."""
    if not (v.space == u.space == l.space):
        raise ValueError("operators act on different spaces")
    return weighted_operator_norm((v @ l).op - (l @ u).op, v.space.weights)


def is_permutation_kernel(p: Polymorphism) -> bool:
    P = p.transitions
    return all(sum(1 for x in row if x != 0) == 1 for row in P)


@dataclass(frozen=True)
class SequenceVerdict:
    steps: tuple
    verdict: str  # "converged", "cycling" or "undetermined"
    period: int | None

    def to_json(self) -> dict:
        return {"steps": [format_scalar(s) for s in self.steps], "verdict": self.verdict, "period": self.period}


@dataclass(frozen=True)
class ProductConvergence:
    products: SequenceVerdict
    conjugates: SequenceVerdict

    def to_json(self) -> dict:
        return {"products": self.products.to_json(), "conjugates": self.conjugates.to_json()}


def _verdict(seq: list[Polymorphism], tol: float) -> SequenceVerdict:
    steps = tuple(weak_distance(seq[i], seq[i - 1]) for i in range(1, len(seq)))
    tail_start = len(seq) // 2

    def same(a, b):
        d = weak_distance(a, b)
        return d == 0 if tol == 0 else float(d) <= tol

    # a period must repeat at least twice inside the tail to count
    for period in range(1, (len(seq) - tail_start) // 2 + 1):
        if all(same(seq[i], seq[i - period]) for i in range(tail_start + period, len(seq))):
            return SequenceVerdict(steps, "converged" if period == 1 else "cycling", period)
    return SequenceVerdict(steps, "undetermined", None)


def product_convergence_report(r: Polymorphism, s: Polymorphism, N: int = 32) -> ProductConvergence:
    """Track ``r^n s^-n`` and ``s^n q s^-n`` with ``q = s^-1 r`` for ``n <= N``.

    ``s`` must be invertible (a permutation kernel); its inverse is its conjugate.
    The verdict is ``converged`` when the tail is constant, ``cycling`` when
    it repeats with a longer period.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if r.space != s.space:
        raise ValueError("polymorphisms live on different spaces")
    if not is_permutation_kernel(s):
        raise ValueError("s is not invertible: it is not a permutation kernel")
    s_inv = conjugate(s)
    q = compose(s_inv, r)
    tol = default_tol(r.nu)
    products = [compose(power(r, n), power(s_inv, n)) for n in range(N + 1)]
    conjugates = [compose(compose(power(s, n), q), power(s_inv, n)) for n in range(N + 1)]
    return ProductConvergence(_verdict(products, tol), _verdict(conjugates, tol))
