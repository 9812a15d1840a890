import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idnc_cde import coding, kernels
from idnc_cde.session import ErasureModel


def test_pair_wants(pair):
    assert coding.wants_indicator(pair.S).tolist() == [1, 1]


def test_pair_sender_combinations(pair):
    k1 = coding.select_combination_greedy(0, pair.S, pair.model)
    k2 = coding.select_combination_greedy(1, pair.S, pair.model)
    assert k1.tolist() == [1, 0] and coding.target_set(k1, pair.S).tolist() == [0, 1]
    assert k2.tolist() == [0, 1] and coding.target_set(k2, pair.S).tolist() == [1, 0]


def test_target_set_counts_exactly_one():
    S = np.array([[1, 1, 0], [1, 0, 0], [0, 0, 1]])
    assert coding.target_set([1, 1, 0], S).tolist() == [0, 1, 0]


def test_candidate_order_priority_first():
    S = np.array([[1, 0], [0, 1], [1, 0], [0, 0]])
    order = coding.candidate_order(S, [0.1, 0.3, 0.2, 0.0], priority=[2])
    assert order.tolist() == [2, 1, 0]  # player 3 wants nothing


def test_exhaustive_cap():
    S = np.zeros((2, 25), dtype=np.uint8)
    with pytest.raises(coding.SearchTooLarge):
        coding.best_mask_exhaustive(S, np.ones(25), np.ones(2), cap=20)


def _states(max_m=6, max_n=8):
    def build(args):
        m, n, bits, owner = args
        S = np.array(bits, dtype=np.uint8).reshape(m, n)
        for p in np.flatnonzero(S.min(axis=0) == 1):
            S[owner % m, p] = 0
        return S
    return st.integers(1, max_m).flatmap(lambda m: st.integers(1, max_n).flatmap(
        lambda n: st.tuples(st.just(m), st.just(n),
                            st.lists(st.integers(0, 1), min_size=m * n, max_size=m * n),
                            st.integers(0, 100)))).map(build)


@settings(max_examples=150, deadline=None)
@given(_states())
def test_greedy_is_instantly_decodable(S):
    M = S.shape[0]
    model = ErasureModel.uniform(M, 0.2)
    K = coding.greedy_all(S, model)
    for i in range(M):
        k = K[i]
        # the sender only codes packets it holds
        assert not (k & S[i]).any()
        for j in np.flatnonzero(coding.target_set(k, S)):
            assert (S[j] & k).sum() == 1


@settings(max_examples=100, deadline=None)
@given(_states(max_m=5, max_n=7))
def test_exact_targets_at_least_greedy(S):
    M = S.shape[0]
    model = ErasureModel.uniform(M, 0.1)
    for i in range(M):
        g = coding.target_set(coding.select_combination_greedy(i, S, model), S).sum()
        e = coding.target_set(coding.select_combination_exact(i, S, model), S).sum()
        assert e >= g


def test_exhaustive_matches_enumeration(rng):
    for _ in range(30):
        S = (rng.random((5, 6)) < 0.5).astype(np.uint8)
        has = (rng.random(6) < 0.7).astype(np.uint8)
        reward = rng.random(5)
        pri = np.flatnonzero(rng.random(5) < 0.4)
        got = coding.best_mask_exhaustive(S, has, reward, pri)
        held = np.flatnonzero(has)
        best = None
        for mask in range(1 << held.size):
            k = np.zeros(6, dtype=np.uint8)
            k[held[[b for b in range(held.size) if mask >> b & 1]]] = 1
            t = coding.target_set(k, S).astype(bool)
            key = (int(t[pri].sum()), int(t.sum()), float(reward[t].sum()), -mask)
            if best is None or key > best[0]:
                best = (key, k)
        assert got.tolist() == best[1].tolist()


# -- numba / numpy agreement ------------------------------------------------

def _random_case(rng, m, n):
    S = (rng.random((m, n)) < 0.5).astype(np.uint8)
    order = rng.permutation(m).astype(np.int64)
    return S, order


@pytest.mark.parametrize("seed", range(5))
def test_greedy_kernels_agree(seed):
    rng = np.random.default_rng(seed)
    for m, n in [(3, 4), (10, 30), (60, 30)]:
        S, order = _random_case(rng, m, n)
        a = kernels.greedy_masks_numba(S, order)
        b = kernels.greedy_masks_numpy(S, order)
        assert np.array_equal(a, b)
        has = (rng.random(n) < 0.5).astype(np.uint8)
        assert np.array_equal(kernels.greedy_mask_numba(S, has, order),
                              kernels.greedy_mask_numpy(S, has, order))


@pytest.mark.parametrize("seed", range(5))
def test_exhaustive_kernels_agree(seed):
    rng = np.random.default_rng(seed)
    S = (rng.random((8, 14)) < 0.4).astype(np.uint8)
    held = np.arange(14)
    packed = kernels.pack_wants(S, held)
    pri = rng.random(8) < 0.3
    # coarse rewards force float ties
    reward = np.round(rng.random(8), 1)
    assert kernels.exhaustive_best_numba(packed, 14, pri, reward) == \
        kernels.exhaustive_best_numpy(packed, 14, pri, reward)


@pytest.mark.parametrize("seed", range(5))
def test_multistart_kernels_agree(seed):
    rng = np.random.default_rng(seed)
    S, order = _random_case(rng, 30, 25)
    full = np.ones(25, dtype=np.uint8)
    pri = rng.random(30) < 0.2
    reward = np.round(rng.random(30), 1)
    a = kernels.multistart_best_numba(S, full, order, pri, reward)
    b = kernels.multistart_best_numpy(S, full, order, pri, reward)
    assert np.array_equal(a, b)


def test_multistart_not_worse_than_single_pass(rng):
    S, order = _random_case(rng, 40, 30)
    full = np.ones(30, dtype=np.uint8)
    pri = np.zeros(40, dtype=bool)
    one = kernels.greedy_mask(S, full, order)
    best = kernels.multistart_best(S, full, order, pri, np.ones(40))
    assert coding.target_set(best, S).sum() >= coding.target_set(one, S).sum()


def test_dispatch_uses_backend(backend, rng):
    S, order = _random_case(rng, 6, 9)
    K = kernels.greedy_masks(S, order)
    assert np.array_equal(K, kernels.greedy_masks_numpy(S, order))
