from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import entropy, spectral_distances
from polymorph.corpus import block_permutation, block_theta, random_kernel, random_weights
from polymorph.finite_space import FiniteSpace, Partition, SizeLimitError, discrete_partition, trivial_partition
from polymorph.polymorph_core import (
    PointMeasure,
    Polymorphism,
    compose,
    conjugate,
    convex_combination,
    convolve,
    density_check,
    entropy_rate_estimate,
    factor,
    from_transitions,
    identity,
    is_associated,
    is_ergodic,
    is_fixed_partition,
    is_invariant_partition,
    is_nondegenerate,
    is_prime,
    mixing_report,
    permutation,
    power,
    sample_markov_chain,
    weak_distance,
    zero,
)

F = Fraction
U2 = FiniteSpace.uniform(2)
U4 = FiniteSpace.uniform(4)
W4 = FiniteSpace((F(2, 5), F(3, 10), F(1, 5), F(1, 10)))
SWAP = permutation(U2, [1, 0])
LAZY = from_transitions(U2, [["9/10", "1/10"], ["1/10", "9/10"]])


def _marginals_hold(p: Polymorphism) -> bool:
    mu = p.space.mu()
    if p.exact:
        return list(p.nu.sum(axis=1)) == list(mu) and list(p.nu.sum(axis=0)) == list(mu)
    return np.allclose(p.nu.sum(axis=1), mu, atol=1e-12, rtol=0) and np.allclose(p.nu.sum(axis=0), mu, atol=1e-12, rtol=0)


# -- constructors ---------------------------------------------------------------

def test_constructor_examples():
    assert zero(U2).nu.tolist() == [[F(1, 4)] * 2] * 2
    assert identity(FiniteSpace(("3/5", "2/5"))).nu.tolist() == [[F(3, 5), 0], [0, F(2, 5)]]
    assert LAZY.nu.tolist() == [[F(9, 20), F(1, 20)], [F(1, 20), F(9, 20)]]


def test_from_transitions_names_the_column():
    space = FiniteSpace(("3/5", "2/5"))
    with pytest.raises(ValueError, match="column 0"):
        from_transitions(space, [[0, 1], [0, 1]])
    with pytest.raises(ValueError, match="row 1"):
        from_transitions(space, [[1, 0], [F(1, 2), F(1, 3)]])


def test_polymorphism_rejects_bad_marginals():
    with pytest.raises(ValueError, match="column marginal 0"):
        Polymorphism(U2, [[F(1, 2), 0], [F(1, 4), F(1, 4)]])
    with pytest.raises(ValueError, match="row marginal 1"):
        Polymorphism(U2, [[F(1, 2), 0], [0, F(1, 4)]])
    with pytest.raises(ValueError, match="negative"):
        Polymorphism(U2, [[F(3, 4), F(-1, 4)], [F(-1, 4), F(3, 4)]])


def test_json_roundtrip():
    k = random_kernel(W4, np.random.default_rng(1))
    assert Polymorphism.from_json(k.to_json()) == k


# -- semigroup ----------------------------------------------------------------

def test_compose_examples():
    p = LAZY
    assert compose(zero(U2), p) == zero(U2)
    assert compose(identity(U2), p) == p
    assert compose(SWAP, SWAP) == identity(U2)


def test_compose_right_argument_acts_first():
    # 0 -> 1 under a, then 1 -> 2 under b: b after a must send 0 to 2
    a = permutation(FiniteSpace.uniform(3), [1, 0, 2])
    b = permutation(FiniteSpace.uniform(3), [0, 2, 1])
    ba = compose(b, a)
    assert ba.transitions[0, 2] == 1
    assert (ba.transitions == (a.transitions @ b.transitions)).all()


def test_conjugate_examples():
    assert conjugate(zero(W4)) == zero(W4)
    cyc = permutation(FiniteSpace.uniform(3), [1, 2, 0])
    assert conjugate(cyc) == permutation(FiniteSpace.uniform(3), [2, 0, 1])
    nu = [[F(1, 6), F(1, 6), 0], [0, F(1, 6), F(1, 6)], [F(1, 6), 0, F(1, 6)]]
    p = Polymorphism(FiniteSpace.uniform(3), nu)
    assert conjugate(p).nu.tolist() == [list(r) for r in zip(*nu)]


def test_convex_examples():
    assert convex_combination([LAZY], [1]) == LAZY
    assert convex_combination([identity(U2), SWAP], ["1/2", "1/2"]) == zero(U2)
    assert convex_combination([zero(W4), zero(W4)], ["1/3", "2/3"]) == zero(W4)
    with pytest.raises(ValueError):
        convex_combination([SWAP, SWAP], ["1/2", "1/3"])


def test_power_examples():
    assert power(LAZY, 0) == identity(U2)
    assert power(SWAP, 2) == identity(U2)
    assert power(zero(W4), 5) == zero(W4)
    assert power(LAZY, 3) == compose(LAZY, compose(LAZY, LAZY))


def test_weak_distance_examples():
    assert weak_distance(LAZY, LAZY) == 0
    assert weak_distance(identity(U2), zero(U2)) == 1
    assert weak_distance(identity(U2), SWAP) == 2


# -- predicates -----------------------------------------------------------------

def test_is_associated_examples():
    assert is_associated(LAZY, trivial_partition(2))
    assert is_associated(identity(U4), discrete_partition(4))
    assert not is_associated(zero(U2), discrete_partition(2))
    assert not is_associated(SWAP, Partition([[0], [1]]))


def test_invariant_and_fixed_examples():
    xi = Partition([[0, 1], [2, 3]])
    for p in (LAZY, SWAP, zero(U2)):
        assert is_invariant_partition(p, trivial_partition(2)) and is_fixed_partition(p, trivial_partition(2))
    assert is_fixed_partition(identity(U2), discrete_partition(2))
    assert not is_fixed_partition(SWAP, discrete_partition(2))
    assert is_invariant_partition(SWAP, discrete_partition(2))
    assert is_fixed_partition(block_theta(U4, xi), xi)
    bs = block_permutation(U4, xi, [1, 0])
    assert is_invariant_partition(bs, xi) and not is_fixed_partition(bs, xi)


def test_is_ergodic_examples():
    assert not is_ergodic(identity(U4))
    assert is_ergodic(SWAP)
    assert is_ergodic(zero(W4))
    assert not is_ergodic(block_theta(U4, Partition([[0, 1], [2, 3]])))
    assert is_ergodic(identity(FiniteSpace((1,))))


def test_is_prime_examples():
    scan = is_prime(identity(U4))
    assert not scan.prime and scan.witness is not None and len(scan.witness.blocks) > 1
    assert is_prime(zero(W4)).prime
    xi = Partition([[0, 1], [2, 3]])
    scan = is_prime(block_theta(U4, xi))
    assert not scan.prime and scan.witness == xi
    assert is_prime(identity(FiniteSpace((1,)))).prime
    big = FiniteSpace.uniform(13)
    with pytest.raises(SizeLimitError):
        is_prime(zero(big))


def test_is_prime_witness_is_invariant():
    rng = np.random.default_rng(5)
    for _ in range(30):
        k = random_kernel(random_weights(int(rng.integers(2, 6)), rng, repeats=True), rng)
        scan = is_prime(k)
        if not scan.prime:
            assert is_invariant_partition(k, scan.witness)


def test_is_nondegenerate_examples():
    assert is_nondegenerate(zero(U4))
    assert not is_nondegenerate(SWAP)
    mixed = Polymorphism(FiniteSpace.uniform(3), [[F(1, 3), 0, 0], [0, F(1, 6), F(1, 6)], [0, F(1, 6), F(1, 6)]])
    assert not is_nondegenerate(mixed)


def test_density_examples():
    assert density_check(identity(W4)).dense
    d = density_check(zero(U2))
    assert not d.semi_dense and not d.codense and not d.dense
    assert density_check(LAZY).dense
    assert density_check(LAZY.as_float()).dense


# -- mixing -------------------------------------------------------------------

def test_mixing_theta_is_zero():
    mr = mixing_report(zero(W4), 10)
    assert all(d == 0 for d in mr.distances) and mr.is_mixing


def test_mixing_swap_is_constant():
    # swap^n alternates between Id and swap, both at distance 1 from Theta
    mr = mixing_report(SWAP, 6)
    assert list(mr.distances) == [1] * 6
    assert not mr.is_mixing


def test_mixing_lazy_flip_matches_spectral_oracle():
    mr = mixing_report(LAZY.as_float(), 60)
    oracle = spectral_distances(np.array([[0.9, 0.1], [0.1, 0.9]]), np.array([0.5, 0.5]), 60)
    assert max(abs(a - b) for a, b in zip(mr.distances, oracle)) <= 1e-10
    assert max(abs(a - 0.8 ** (n + 1)) for n, a in enumerate(mr.distances)) <= 1e-10
    assert abs(mr.rate - 0.8) < 1e-6
    exact = mixing_report(LAZY, 12)
    assert list(exact.distances) == [F(4, 5) ** n for n in range(1, 13)]


# -- factor and convolution ---------------------------------------------------

def test_factor_examples():
    k = random_kernel(W4, np.random.default_rng(2))
    one = factor(k, trivial_partition(4))
    assert one.size == 1 and one.nu[0, 0] == 1
    assert factor(k, discrete_partition(4)) == k
    xi = Partition([[0, 1], [2, 3]])
    q = factor(k, xi)
    assert q.nu[0, 1] == k.nu[0, 2] + k.nu[0, 3] + k.nu[1, 2] + k.nu[1, 3]
    assert q.space.weights == (F(7, 10), F(3, 10))


def test_convolve_examples():
    delta = PointMeasure.delta(W4, 2)
    assert list(convolve(zero(W4), delta).mass) == list(W4.mu())
    m = PointMeasure(W4, [F(1, 4)] * 4)
    assert convolve(identity(W4), m) == m
    assert convolve(SWAP, PointMeasure.delta(U2, 0)) == PointMeasure.delta(U2, 1)


# -- chain diagnostics --------------------------------------------------------

def test_chain_identity_and_swap():
    s = sample_markov_chain(identity(W4), 500, seed=3)
    assert len(set(s.tolist())) == 1
    assert entropy_rate_estimate(s) == 0.0
    s = sample_markov_chain(SWAP, 500, seed=3)
    assert all(a != b for a, b in zip(s, s[1:]))
    assert entropy_rate_estimate(s) == pytest.approx(0.0, abs=1e-12)


def test_chain_theta_entropy_matches_closed_form():
    s = sample_markov_chain(zero(W4), 100_000, seed=11)
    assert abs(entropy_rate_estimate(s, 2) - entropy(W4.weights)) < 0.05


def test_chain_is_seeded():
    a = sample_markov_chain(LAZY, 1000, seed=9)
    b = sample_markov_chain(LAZY, 1000, seed=9)
    assert (a == b).all()


# -- properties ---------------------------------------------------------------

kernel_seeds = st.integers(0, 2**32 - 1)


def _triple(seed: int, exact: bool = True):
    rng = np.random.default_rng(seed)
    space = random_weights(int(rng.integers(1, 7)), rng, repeats=bool(seed % 2))
    ks = [random_kernel(space, rng) for _ in range(3)]
    return ks if exact else [k.as_float() for k in ks]


@settings(max_examples=60, deadline=None)
@given(kernel_seeds)
def test_closure(seed):
    a, b, c = _triple(seed)
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 3, size=a.size).tolist()
    for out in (compose(a, b), power(a, 3), conjugate(a), convex_combination([a, b, c], ["1/2", "1/3", "1/6"]),
                factor(a, Partition.from_labels(labels))):
        assert _marginals_hold(out)


@settings(max_examples=40, deadline=None)
@given(kernel_seeds)
def test_closure_float(seed):
    a, b, c = _triple(seed, exact=False)
    for out in (compose(a, b), power(a, 5), conjugate(a), convex_combination([a, b, c], [0.2, 0.3, 0.5])):
        assert _marginals_hold(out)


@settings(max_examples=60, deadline=None)
@given(kernel_seeds)
def test_associativity_and_involution(seed):
    a, b, c = _triple(seed)
    assert weak_distance(compose(a, compose(b, c)), compose(compose(a, b), c)) == 0
    assert conjugate(compose(a, b)) == compose(conjugate(b), conjugate(a))
    assert conjugate(conjugate(a)) == a


@settings(max_examples=60, deadline=None)
@given(kernel_seeds)
def test_zero_absorbs(seed):
    a, _, _ = _triple(seed)
    th = zero(a.space)
    assert compose(th, a) == th and compose(a, th) == th


@settings(max_examples=40, deadline=None)
@given(kernel_seeds, st.integers(0, 6))
def test_telescoping_identity(seed, n):
    rng = np.random.default_rng(seed)
    size = int(rng.integers(2, 6))
    space = FiniteSpace.uniform(size)
    pi = random_kernel(space, rng)
    t = permutation(space, [int(v) for v in rng.permutation(size)])
    t_inv = conjugate(t)

    def lam(m):
        return compose(power(pi, m), power(t_inv, m))

    assert compose(pi, lam(n)) == compose(lam(n + 1), t)


@settings(max_examples=40, deadline=None)
@given(kernel_seeds)
def test_factor_commutes_with_compose(seed):
    rng = np.random.default_rng(seed)
    space = FiniteSpace.uniform(4)
    xi = Partition([[0, 1], [2, 3]])
    swap = block_permutation(space, xi, [1, 0])
    choices = [
        block_theta(space, xi),
        swap,
        convex_combination([block_theta(space, xi), identity(space)], ["1/3", "2/3"]),
        compose(swap, convex_combination([block_theta(space, xi), identity(space)], ["1/2", "1/2"])),
    ]
    ks = [choices[int(i)] for i in rng.integers(0, len(choices), size=2)]
    a, b = ks
    assert is_invariant_partition(a, xi) and is_invariant_partition(b, xi)
    assert factor(compose(a, b), xi) == compose(factor(a, xi), factor(b, xi))
