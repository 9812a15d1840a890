"""Decoding-delay accounting and completion-time estimates."""
import numpy as np

from .coding import target_set, wants_indicator


def stage_delay(sender, kappa, S, omega):
    """Delay increments when ``sender`` alone transmits ``kappa``.

    A player is charged when it wants packets, hears the transmission and is
    not targeted. ``omega`` may hold success probabilities instead of bits,
    which yields the expected increments.
    """
    S = np.asarray(S)
    received = np.asarray(omega, dtype=np.float64)[:, sender]
    untargeted = 1 - target_set(kappa, S)
    return received * untargeted * wants_indicator(S)


def accumulate_delay(ledger, profile, per_stage, Mw):
    """Apply one stage to the cumulative delay of ``ledger``.

    Silence or collision charges every wanting player; a lone transmitter
    charges ``per_stage``.
    """
    n_tx = int(np.asarray(profile).sum())
    if (n_tx == 1) != (per_stage is not None):
        raise ValueError(
            "per-stage delay must be given exactly when one player transmits "
            f"(got {n_tx} transmitters)")
    inc = np.asarray(Mw if n_tx != 1 else per_stage, dtype=np.float64)
    return ledger.evolve(cumulative_delay=ledger.cumulative_delay + inc)


def completion_estimate(initial_wants, cumulative_delay, avg_erasure):
    """Per-player completion estimate ``(W0 + D - p) / (1 - p)``."""
    p = np.asarray(avg_erasure, dtype=np.float64)
    if (p >= 1).any():
        raise ValueError("average erasure must be < 1 for every player")
    W0 = np.asarray(initial_wants, dtype=np.float64)
    D = np.asarray(cumulative_delay, dtype=np.float64)
    return (W0 + D - p) / (1.0 - p)


def pmp_completion_estimate(initial_wants, cumulative_delay, q):
    """Base-station-only variant of :func:`completion_estimate`."""
    q = np.asarray(q, dtype=np.float64)
    if (q >= 1).any():
        raise ValueError("bs erasure must be < 1")
    out = (np.asarray(initial_wants, dtype=np.float64)
           + np.asarray(cumulative_delay, dtype=np.float64) - q) / (1.0 - q)
    return float(out) if out.ndim == 0 else out
