"""Sequential best-response dynamics played virtually before each slot."""
import numpy as np

from .equilibrium import _Table
from .game import utility


class NoConvergence(RuntimeError):
    pass


def expected_utility(profile, session, game=None):
    """Utility with each reception bit replaced by its success probability."""
    return utility(profile, session, game, channel_mode="expected")


def _value(t, game, on):
    k = len(on)
    if k == 1:
        return t.u_single(game, next(iter(on)))
    if game == "game1":
        return -t.peak0
    return -t.peak0 - k - t.w / t.M


def best_response_sweep(session, order=None, game=None, channel_mode="expected",
                        single_sweep=False, max_sweeps=None, _table=None):
    """Ordered best-response passes from all-silent until nothing changes.

    Each visited player keeps or flips its bit to maximize the common
    utility given everybody's current bits; a tie keeps it silent.
    """
    game = game or session.game
    M = session.M
    order = range(M) if order is None else [int(i) for i in order]
    t = _table or _Table(session, channel_mode)
    cap = max_sweeps or 4 * max(M, 1)
    on = set()
    for _ in range(cap):
        changed = False
        for i in order:
            was = i in on
            on.discard(i)
            talk = False
            if t.eligible[i]:
                talk = _value(t, game, on | {i}) > _value(t, game, on)
            if talk:
                on.add(i)
            changed |= talk != was
        if not changed or single_sweep:
            break
    else:
        raise NoConvergence(f"best response did not settle within {cap} sweeps")
    a = np.zeros(M, dtype=np.uint8)
    a[sorted(on)] = 1
    return a


def resolve_stage_action(session, game=None, channel_mode="expected",
                         liveness=True, single_sweep=False, order=None):
    """Profile actually played this slot.

    Runs the best-response dynamics. With ``liveness`` on, an all-silent
    outcome is replaced by the lone sender of highest utility among eligible
    players that can target somebody (ties: more targets, then lower index).
    """
    game = game or session.game
    t = _Table(session, channel_mode)
    a = best_response_sweep(session, order, game, channel_mode, single_sweep,
                            _table=t)
    if not liveness or a.any():
        return a
    reach = (session.targets() & session.wants()[None, :]).sum(axis=1)
    cands = [i for i in range(session.M) if t.eligible[i] and reach[i] > 0]
    if not cands:
        return a
    pick = max(cands, key=lambda i: (t.u_single(game, i), reach[i], -i))
    a[pick] = 1
    return a
