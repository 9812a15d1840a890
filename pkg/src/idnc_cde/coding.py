"""IDNC packet combinations: targeting and per-sender combination selection."""
import numpy as np

from . import kernels

EXHAUSTIVE_CAP = 20


class SearchTooLarge(ValueError):
    pass


def wants_indicator(S):
    """1 for every player whose Wants set is non-empty."""
    return (np.asarray(S).sum(axis=1) > 0).astype(np.uint8)


def target_set(kappa, S):
    """Players for which ``kappa`` contains exactly one wanted packet."""
    S = np.asarray(S, dtype=np.int64)
    return (S @ np.asarray(kappa, dtype=np.int64) == 1).astype(np.uint8)


def target_matrix(K, S):
    """Row ``i`` is the target vector of combination ``K[i]``."""
    counts = np.asarray(K, dtype=np.int64) @ np.asarray(S, dtype=np.int64).T
    return (counts == 1).astype(np.uint8)


def candidate_order(S, avg_erasure, priority=None):
    """Receivers in greedy visiting order.

    Wanting players only; priority members first, then the least reliable
    (largest ``1 / (1 - p)``), then lowest index.
    """
    S = np.asarray(S)
    M = S.shape[0]
    wanting = np.flatnonzero(S.sum(axis=1) > 0)
    pri = np.zeros(M, dtype=bool)
    if priority is not None:
        pri[np.asarray(list(priority), dtype=np.int64)] = True
    weight = 1.0 / (1.0 - np.asarray(avg_erasure, dtype=np.float64))
    keys = (wanting, -weight[wanting], ~pri[wanting])
    return wanting[np.lexsort(keys)].astype(np.int64)


def select_combination_greedy(i, S, model, priority=None):
    """Greedy instantly-decodable combination for sender ``i``.

    Visits receivers in :func:`candidate_order` and adds, for each, the lowest
    indexed packet it wants that the sender and all receivers targeted so far
    hold, provided the receiver already holds every packet chosen so far.
    """
    S = np.asarray(S, dtype=np.uint8)
    order = candidate_order(S, model.avg, priority)
    return kernels.greedy_mask(S, 1 - S[i], order)


def greedy_all(S, model, priority=None):
    """:func:`select_combination_greedy` for every sender at once."""
    S = np.asarray(S, dtype=np.uint8)
    order = candidate_order(S, model.avg, priority)
    return kernels.greedy_masks(S, order)


def best_mask_exhaustive(S, has, success, priority=None, cap=EXHAUSTIVE_CAP):
    """Exhaustive search over all subsets of the packets in ``has``.

    Maximizes (targeted priority players, targeted players, summed success
    probability of targeted players) lexicographically; ties go to the
    smallest mask when packet ``j`` carries weight ``2**j``.
    """
    S = np.asarray(S, dtype=np.uint8)
    held = np.flatnonzero(np.asarray(has))
    if held.size > cap:
        raise SearchTooLarge(
            f"exhaustive search over {held.size} held packets exceeds cap {cap}")
    pri = np.zeros(S.shape[0], dtype=bool)
    if priority is not None:
        pri[np.asarray(list(priority), dtype=np.int64)] = True
    kappa = np.zeros(S.shape[1], dtype=np.uint8)
    if held.size == 0:
        return kappa
    packed = kernels.pack_wants(S, held)
    best = kernels.exhaustive_best(packed, held.size, pri, success)
    bits = (best >> np.arange(held.size)) & 1
    kappa[held] = bits.astype(np.uint8)
    return kappa


def select_combination_exact(i, S, model, priority=None, cap=EXHAUSTIVE_CAP):
    """Exhaustive-search oracle for sender ``i`` (small Has sets only)."""
    S = np.asarray(S, dtype=np.uint8)
    return best_mask_exhaustive(S, 1 - S[i], 1.0 - model.player[:, i],
                                priority, cap)


def exact_all(S, model, priority=None, cap=EXHAUSTIVE_CAP):
    S = np.asarray(S, dtype=np.uint8)
    return np.stack([select_combination_exact(i, S, model, priority, cap)
                     for i in range(S.shape[0])])
