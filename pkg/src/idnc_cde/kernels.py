"""Hot inner loops: greedy IDNC combination building and exhaustive mask search.

Every kernel exists twice, a numba ``@njit`` version and a plain numpy
version with identical semantics. The public names dispatch on
``_accel.USE_NUMBA``; the ``*_numba`` / ``*_numpy`` names are always
available so tests and the benchmark can pit them against each other.

Conventions shared by all kernels:

* ``wants`` is the M x N uint8 state matrix (1 = packet wanted).
* ``has`` is a length-N uint8 mask of packets the sender holds.
* ``order`` is an int64 array of candidate receivers, already sorted.
"""
import numpy as np

from . import _accel
from ._accel import njit

EXHAUSTIVE_CHUNK = 1 << 14


# -- greedy ------------------------------------------------------------------

@njit(cache=True)
def _greedy_into(wants, has, order, out):
    n = wants.shape[1]
    usable = has.copy()
    for idx in range(order.shape[0]):
        j = order[idx]
        clash = False
        for p in range(n):
            if out[p] != 0 and wants[j, p] != 0:
                clash = True
                break
        if clash:
            continue
        for p in range(n):
            if wants[j, p] != 0 and usable[p] != 0:
                out[p] = 1
                for r in range(n):
                    if wants[j, r] != 0:
                        usable[r] = 0
                break


@njit(cache=True)
def greedy_mask_numba(wants, has, order):
    out = np.zeros(wants.shape[1], dtype=np.uint8)
    _greedy_into(wants, has, order, out)
    return out


@njit(cache=True)
def greedy_masks_numba(wants, order):
    m, n = wants.shape
    out = np.zeros((m, n), dtype=np.uint8)
    has = np.empty(n, dtype=np.uint8)
    for i in range(m):
        for p in range(n):
            has[p] = 1 - wants[i, p]
        _greedy_into(wants, has, order, out[i])
    return out


def greedy_mask_numpy(wants, has, order):
    w = wants.astype(bool)
    kappa = np.zeros(w.shape[1], dtype=bool)
    usable = has.astype(bool)
    for j in order:
        row = w[j]
        if (row & kappa).any():
            continue
        cand = np.flatnonzero(row & usable)
        if cand.size:
            kappa[cand[0]] = True
            usable &= ~row
    return kappa.astype(np.uint8)


def greedy_masks_numpy(wants, order):
    has = 1 - wants
    return np.stack([greedy_mask_numpy(wants, has[i], order)
                     for i in range(wants.shape[0])]) if wants.shape[0] else \
        np.zeros(wants.shape, dtype=np.uint8)


# -- multi-start greedy --------------------------------------------------------
#
# One greedy pass per candidate, each starting from a different receiver and
# then following ``order``. The pass with the best (targeted priority players,
# targeted players, summed reward) wins; ties go to the earliest start.

@njit(cache=True)
def _score(wants, mask, priority, reward):
    m, n = wants.shape
    pri = 0
    tot = 0
    rew = 0.0
    for j in range(m):
        c = 0
        for p in range(n):
            if mask[p] != 0 and wants[j, p] != 0:
                c += 1
        if c == 1:
            tot += 1
            rew += reward[j]
            if priority[j]:
                pri += 1
    return pri, tot, rew


@njit(cache=True)
def multistart_best_numba(wants, has, order, priority, reward):
    n = wants.shape[1]
    k = order.shape[0]
    best = np.zeros(n, dtype=np.uint8)
    best_pri, best_tot, best_rew = -1, -1, -1.0
    rotated = np.empty(k, dtype=np.int64)
    for s in range(k):
        rotated[0] = order[s]
        pos = 1
        for r in range(k):
            if r != s:
                rotated[pos] = order[r]
                pos += 1
        mask = np.zeros(n, dtype=np.uint8)
        _greedy_into(wants, has, rotated, mask)
        pri, tot, rew = _score(wants, mask, priority, reward)
        if pri > best_pri or (pri == best_pri and (
                tot > best_tot or (tot == best_tot and rew > best_rew))):
            best = mask
            best_pri, best_tot, best_rew = pri, tot, rew
    return best


def multistart_best_numpy(wants, has, order, priority, reward):
    best = np.zeros(wants.shape[1], dtype=np.uint8)
    best_key = None
    w = wants.astype(np.int64)
    for s in range(order.size):
        rotated = np.concatenate([order[s:s + 1], np.delete(order, s)])
        mask = greedy_mask_numpy(wants, has, rotated)
        hit = (w @ mask.astype(np.int64)) == 1
        rew = 0.0
        for j in np.flatnonzero(hit):
            rew += reward[j]
        key = (int((hit & priority).sum()), int(hit.sum()), rew)
        if best_key is None or key > best_key:
            best, best_key = mask, key
    return best


# -- exhaustive --------------------------------------------------------------
#
# Masks are enumerated over the sender's Has set only; bit b of a mask is the
# b-th held packet in ascending order. A receiver is targeted iff the AND of
# the mask with its packed Wants bits is a power of two.

def pack_wants(wants, held):
    """Pack each row of ``wants`` restricted to columns ``held`` into int64."""
    sub = wants[:, held].astype(np.int64)
    weights = np.left_shift(np.int64(1), np.arange(held.size, dtype=np.int64))
    return sub @ weights


@njit(cache=True)
def exhaustive_best_numba(packed, nbits, priority, reward):
    m = packed.shape[0]
    best_mask = 0
    best_pri = -1
    best_tot = -1
    best_rew = -1.0
    for mask in range(1 << nbits):
        pri = 0
        tot = 0
        rew = 0.0
        for j in range(m):
            x = mask & packed[j]
            if x != 0 and (x & (x - 1)) == 0:
                tot += 1
                rew += reward[j]
                if priority[j]:
                    pri += 1
        if pri > best_pri or (pri == best_pri and (
                tot > best_tot or (tot == best_tot and rew > best_rew))):
            best_mask = mask
            best_pri = pri
            best_tot = tot
            best_rew = rew
    return best_mask


def exhaustive_best_numpy(packed, nbits, priority, reward):
    pri_w = priority.astype(np.int64)
    best = None
    total = 1 << nbits
    for start in range(0, total, EXHAUSTIVE_CHUNK):
        masks = np.arange(start, min(total, start + EXHAUSTIVE_CHUNK),
                          dtype=np.int64)
        x = masks[:, None] & packed[None, :]
        hit = (x != 0) & ((x & (x - 1)) == 0)
        pri = hit.astype(np.int64) @ pri_w
        tot = hit.sum(axis=1)
        # sequential sum so that float ties resolve like the jitted kernel
        rew = np.zeros(masks.size)
        for j in range(packed.size):
            rew = rew + np.where(hit[:, j], reward[j], 0.0)
        k = np.lexsort((masks, -rew, -tot, -pri))[0]
        cand = (int(pri[k]), int(tot[k]), float(rew[k]), -int(masks[k]))
        if best is None or cand > best:
            best = cand
    return -best[3]


# -- dispatch ----------------------------------------------------------------

def greedy_mask(wants, has, order):
    wants = np.ascontiguousarray(wants, dtype=np.uint8)
    has = np.ascontiguousarray(has, dtype=np.uint8)
    order = np.ascontiguousarray(order, dtype=np.int64)
    if _accel.USE_NUMBA:
        return greedy_mask_numba(wants, has, order)
    return greedy_mask_numpy(wants, has, order)


def greedy_masks(wants, order):
    """Greedy combination for every player as sender, one row per player."""
    wants = np.ascontiguousarray(wants, dtype=np.uint8)
    order = np.ascontiguousarray(order, dtype=np.int64)
    if _accel.USE_NUMBA:
        return greedy_masks_numba(wants, order)
    return greedy_masks_numpy(wants, order)


def exhaustive_best(packed, nbits, priority, reward):
    packed = np.ascontiguousarray(packed, dtype=np.int64)
    priority = np.ascontiguousarray(priority, dtype=np.bool_)
    reward = np.ascontiguousarray(reward, dtype=np.float64)
    if _accel.USE_NUMBA:
        return int(exhaustive_best_numba(packed, int(nbits), priority, reward))
    return int(exhaustive_best_numpy(packed, int(nbits), priority, reward))


def multistart_best(wants, has, order, priority, reward):
    wants = np.ascontiguousarray(wants, dtype=np.uint8)
    has = np.ascontiguousarray(has, dtype=np.uint8)
    order = np.ascontiguousarray(order, dtype=np.int64)
    priority = np.ascontiguousarray(priority, dtype=np.bool_)
    reward = np.ascontiguousarray(reward, dtype=np.float64)
    if _accel.USE_NUMBA:
        return multistart_best_numba(wants, has, order, priority, reward)
    return multistart_best_numpy(wants, has, order, priority, reward)
