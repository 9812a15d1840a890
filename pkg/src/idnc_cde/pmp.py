"""Point-to-multipoint baseline: the base station alone repairs the frame."""
import numpy as np

from . import coding
from .delay import pmp_completion_estimate
from .kernels import multistart_best
from .session import is_complete, run_init_phase


def pmp_critical(S, q, initial_wants, delays):
    """Wanting players whose next delay would raise the worst PMP estimate."""
    q = np.asarray(q, dtype=np.float64)
    C = pmp_completion_estimate(initial_wants, delays, q)
    raised = pmp_completion_estimate(initial_wants, np.asarray(delays) + 1.0, q)
    return np.flatnonzero((raised > C.max()) & (np.asarray(S).sum(axis=1) > 0))


def pmp_combination(S, q, initial_wants, delays, exact_cap=coding.EXHAUSTIVE_CAP):
    """The base station's combination.

    Exhaustive search for frames of at most ``exact_cap`` packets. Larger
    frames get the multi-start greedy: one pass per wanting receiver as the
    starting point, scored like the exhaustive search.
    """
    S = np.asarray(S, dtype=np.uint8)
    q = np.asarray(q, dtype=np.float64)
    pri = pmp_critical(S, q, initial_wants, delays)
    full = np.ones(S.shape[1], dtype=np.uint8)
    if S.shape[1] <= exact_cap:
        return coding.best_mask_exhaustive(S, full, 1.0 - q, pri, exact_cap)
    order = coding.candidate_order(S, q, pri)
    pmask = np.zeros(S.shape[0], dtype=bool)
    pmask[pri] = True
    return multistart_best(S, full, order, pmask, 1.0 - q)


def pmp_step(S, bs_erasure, rng, initial_wants=None, delays=None,
             exact_cap=coding.EXHAUSTIVE_CAP):
    """One base-station slot; returns (new state, delay increments, combination)."""
    S = np.array(S, dtype=np.uint8)
    if is_complete(S):
        raise ValueError("PMP step called on a completed frame")
    M = S.shape[0]
    q = np.broadcast_to(np.asarray(bs_erasure, dtype=np.float64), (M,))
    W0 = S.sum(axis=1) if initial_wants is None else initial_wants
    D = np.zeros(M) if delays is None else delays
    kappa = pmp_combination(S, q, W0, D, exact_cap)
    tau = coding.target_set(kappa, S)
    heard = rng.random(M) >= q
    wanting = S.sum(axis=1) > 0
    inc = (heard & wanting & (tau == 0)).astype(np.float64)
    for k in np.flatnonzero(heard & (tau == 1)):
        S[k, np.flatnonzero(S[k] & kappa)[0]] = 0
    return S, inc, kappa


def run_pmp_episode(M, N, bs_erasure, rng, S0=None, slot_cap=None,
                    exact_cap=coding.EXHAUSTIVE_CAP):
    """Init phase (unless ``S0`` is given) then PMP slots until done.

    Returns ``(T, mean estimate, total delay, censored)``; a capped episode
    returns ``censored=True`` and the slot count reached.
    """
    q = np.broadcast_to(np.asarray(bs_erasure, dtype=np.float64), (M,))
    S = run_init_phase(M, N, q, rng) if S0 is None else np.array(S0, dtype=np.uint8)
    cap = 100 * max(N, 1) if slot_cap is None else slot_cap
    W0 = S.sum(axis=1).astype(np.float64)
    D = np.zeros(M)
    T = 0
    while not is_complete(S):
        if T >= cap:
            break
        S, inc, _ = pmp_step(S, q, rng, W0, D, exact_cap)
        D = D + inc
        T += 1
    est = float(np.mean(pmp_completion_estimate(W0, D, q))) if M else 0.0
    return T, est, float(D.sum()), not is_complete(S)
