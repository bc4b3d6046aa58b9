import statistics
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bisidon.embedding import (
    THETA_DENOMINATOR,
    EmbeddingPreconditionError,
    ModularEmbedding,
    best_of_k_embeddings,
    embed_with_thetas,
    multiplicative_to_additive_embedding,
    phi,
    sample_modular_embedding,
    verify_freiman_homomorphism,
)
from bisidon.streams import draw_seed, make_rng, substream

F = Fraction
pos_rationals = st.lists(
    st.fractions(min_value=F(1, 40), max_value=500, max_denominator=40), min_size=1, max_size=12, unique=True
)


# ---------------------------------------------------------------- radix embedding


def test_radix_singleton_and_powers():
    emb = multiplicative_to_additive_embedding([1])
    assert emb(1) == 0
    emb = multiplicative_to_additive_embedding([2, 4, 8])
    assert emb.prime_order == (2,) and emb.radix == 13
    assert emb(2) + emb(8) == emb(4) + emb(4)


def test_radix_two_coordinates():
    emb = multiplicative_to_additive_embedding([2, 3, 6])
    assert emb.prime_order == (2, 3)
    sums = {emb(a) + emb(b) for a, b in [(2, 2), (2, 3), (2, 6), (3, 3), (3, 6), (6, 6)]}
    assert len(sums) == 6


def test_radix_rejects_nonpositive():
    with pytest.raises(ValueError):
        multiplicative_to_additive_embedding([1, -2])


@given(pos_rationals)
def test_radix_is_two_sided_freiman(A):
    emb = multiplicative_to_additive_embedding(A)
    assert len(set(emb.image_table.values())) == len(A)
    for a, b, c, d in product(A, repeat=4):
        assert (a * b == c * d) == (emb(a) + emb(b) == emb(c) + emb(d))


def test_radix_exhaustive_forty():
    A = sorted({F(2**i * 3**j, 5**k) for i in range(4) for j in range(3) for k in range(4)})[:40]
    emb = multiplicative_to_additive_embedding(A)
    prods: dict = {}
    for a in A:
        for b in A:
            prods.setdefault(a * b, set()).add(emb(a) + emb(b))
    images = [next(iter(s)) for s in prods.values()]
    assert all(len(s) == 1 for s in prods.values())
    assert len(set(images)) == len(images)


# ---------------------------------------------------------------- modular embedding


def test_phi_examples():
    assert phi(F(3, 10), 7) == 2
    assert (F(7 * 3, 10) - phi(F(3, 10), 7)) == F(1, 10)
    assert phi(F(10, 10), 7) == 0
    assert phi(F(13, 10), 7) == 2


def test_homomorphism_witness():
    t = F(1, 10)
    assert (phi(3 * t, 7) + phi(10 * t, 7)) % 7 == phi(13 * t, 7)


def test_collision_set_is_removed():
    # theta just above 1/10: 3 -> 2 and 10 -> 0 keep fractional parts below 1/2
    k = -(-THETA_DENOMINATOR // 10)
    table = embed_with_thetas([3, 10], 7, [k]).embedding.image_table
    assert table == {3: (2,), 10: (0,)}
    # 13 also lands on 2, so both 3 and 13 fall into the collision set
    res = embed_with_thetas([3, 10, 13], 7, [k])
    assert res.embedding.retained == (10,)
    assert res.retained_fraction == F(1, 3)


def test_sample_matches_exact_definition():
    rng = make_rng(11)
    A = sorted(rng.choice(10**6, size=80, replace=False) + 1)
    p = 97
    res = sample_modular_embedding(A, p, 2, rng)
    emb = res.embedding
    thetas = emb.thetas
    eligible = {}
    for a in A:
        xs = [p * t * int(a) for t in thetas]
        if all(x - x.__floor__() < F(1, 2) for x in xs):
            eligible[int(a)] = tuple(x.__floor__() % p for x in xs)
    images = list(eligible.values())
    expect = {a for a, v in eligible.items() if images.count(v) == 1}
    assert set(emb.retained) == expect
    assert all(emb(a) == eligible[a] for a in emb.retained)
    assert res.retained_fraction == F(len(expect), len(A))
    assert verify_freiman_homomorphism(emb)


def test_capacity_precondition():
    with pytest.raises(EmbeddingPreconditionError):
        sample_modular_embedding(range(1, 400), 97, 2, make_rng(0))


def test_verify_detects_corruption():
    rng = make_rng(5)
    A = list(range(1, 200))
    emb = sample_modular_embedding(A, 97, 2, rng).embedding
    assert verify_freiman_homomorphism(emb)
    a, b = emb.retained[:2]
    bad = dict(emb.image_table)
    bad[a] = bad[b]
    assert not verify_freiman_homomorphism(ModularEmbedding(emb.p, emb.d, emb.theta_numerators, emb.retained, bad))
    shifted = dict(emb.image_table)
    x, y = shifted[a]
    shifted[a] = ((x + 1) % 97, y)
    if len(set(shifted.values())) == len(shifted):
        assert not verify_freiman_homomorphism(
            ModularEmbedding(emb.p, emb.d, emb.theta_numerators, emb.retained, shifted)
        )


def test_verify_vacuous():
    assert verify_freiman_homomorphism(ModularEmbedding(7, 2, (0, 0), (), {}))
    assert verify_freiman_homomorphism(ModularEmbedding(7, 2, (0, 0), (5,), {5: (1, 2)}))


@given(st.lists(st.integers(1, 10**12), min_size=1, max_size=60, unique=True), st.integers(0, 2**63))
def test_every_sample_is_freiman(A, seed):
    res = sample_modular_embedding(A, 101, 2, make_rng(seed))
    assert set(res.embedding.retained) <= set(A)
    assert verify_freiman_homomorphism(res.embedding)


def test_best_of_one_is_one_sample():
    A = list(range(1, 150))
    got = best_of_k_embeddings(A, 97, 2, 1, make_rng(9))
    ref = sample_modular_embedding(A, 97, 2, substream(draw_seed(make_rng(9)), 0))
    assert got.embedding.retained == ref.embedding.retained


def test_best_of_k_helps_in_median():
    A = list(range(1, 200))
    rng = make_rng(12)
    one = [len(best_of_k_embeddings(A, 97, 2, 1, rng).embedding.retained) for _ in range(100)]
    ten = [len(best_of_k_embeddings(A, 97, 2, 10, rng).embedding.retained) for _ in range(100)]
    assert statistics.median(ten) >= statistics.median(one)


def test_singleton_retention():
    for s in range(20):
        assert len(sample_modular_embedding([42], 11, 2, make_rng(s)).embedding.retained) in (0, 1)


def test_retention_statistics():
    # E|B| = 2^-d N; collisions then remove at most 2^-d-1 N in expectation
    rng = make_rng(31)
    A = sorted(int(a) for a in rng.choice(10**6, size=100, replace=False) + 1)
    eligible, kept = [], []
    for _ in range(400):
        res = sample_modular_embedding(A, 97, 2, rng)
        k = res.embedding.theta_numerators
        flags = []
        for a in A:
            flags.append(all((97 * t * a) % THETA_DENOMINATOR < THETA_DENOMINATOR // 2 for t in k))
        eligible.append(sum(flags))
        kept.append(len(res.embedding.retained))
    m = np.mean(eligible)
    sd = np.std(eligible) / np.sqrt(len(eligible))
    assert abs(m - 25) <= 3 * sd + 1e-9
    assert np.mean(kept) >= 100 / 8
