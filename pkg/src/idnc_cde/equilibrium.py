"""Per-stage equilibrium analysis and the brute-force oracles that check it.

Stage costs are written ``phi' + xi`` where ``phi'`` is the cost carried in
from the previous stage. The Y values are the amounts by which the worst
completion estimate rises: ``Y0`` when the stage is wasted (silence or
collision) and ``Y[j]`` when ``j`` transmits alone. Under the deterministic
channel, where every critical player already sits at the maximum, these reduce
to ``max 1 / (1 - p)`` over the affected critical players (``literal=True``
returns that textbook form).
"""
import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .delay import completion_estimate
from .game import utility

BRUTE_FORCE_CAP = 16


class YValues(NamedTuple):
    y0: float
    y: np.ndarray
    defined: bool


@dataclass(frozen=True)
class StageAnalysis:
    stage: int
    game: str
    critical: tuple
    helper: tuple
    y0: float
    y: np.ndarray
    y0_defined: bool
    ne_profiles: frozenset
    pone: frozenset
    poa: float
    poa_lower_bound: float
    cost_prev: float

    def record(self):
        """Flat record for the stage-analysis CSV export."""
        zy = [self.y[j] for j in self.helper]
        pone = min(self.pone) if self.pone else ()
        return {
            "t": self.stage,
            "Q": len(self.critical),
            "Z": len(self.helper),
            "Y0": self.y0,
            "minY": min(zy) if zy else float("nan"),
            "PoA": self.poa,
            "PoA_lb": self.poa_lower_bound,
            "NE": len(self.ne_profiles),
            "PONE": "".join(str(b) for b in pone),
        }


class _Table:
    """Utilities of the only profile classes that matter in a stage game.

    ``peak0`` is the worst estimate after a wasted stage, ``peak[i]`` after
    ``i`` transmits alone; ``l1[i]`` is the delay mass charged by ``i``.
    """

    def __init__(self, session, channel_mode="deterministic"):
        self.M = session.M
        C = session.completion()
        self.cmax = float(C.max())
        Mw = session.wants()
        self.w = float(Mw.astype(np.float64).sum())
        self.critical = session.critical()
        self.D = session.single_delays(channel_mode)
        self.l1 = self.D.sum(axis=1)
        if channel_mode == "deterministic":
            raised = session.raised_completion()
            self.peak0 = _peak(self.cmax, raised, self.critical)
            self.peak = np.array([
                _peak(self.cmax, raised, self.critical & (self.D[j] > 0))
                for j in range(self.M)])
        else:
            self.peak0 = float(session.completion(Mw).max())
            L = session.ledger
            rows = completion_estimate(L.initial_wants,
                                       L.cumulative_delay[None, :] + self.D,
                                       session.model.avg)
            self.peak = rows.max(axis=1) if self.M else np.zeros(0)
        self.eligible = session.backoff() == 0
        self.avg = session.model.avg

    def u_silent(self, game):
        if game == "game1":
            return -self.peak0
        return -self.peak0 - 0 - self.w / self.M

    def u_single(self, game, i):
        if game == "game1":
            return -float(self.peak[i])
        return -float(self.peak[i]) - 1 - float(self.l1[i]) / self.M


def _peak(cmax, raised, mask):
    return max(cmax, float(raised[mask].max())) if mask.any() else cmax


def _all_profiles(M):
    if M > BRUTE_FORCE_CAP:
        raise ValueError(f"profile enumeration capped at M={BRUTE_FORCE_CAP}, got {M}")
    return [tuple(p) for p in itertools.product((0, 1), repeat=M)]


def critical_set(session):
    """Wanting players whose next delay unit would raise the worst estimate."""
    return tuple(int(i) for i in np.flatnonzero(session.critical()))


def y_values(session, channel_mode="deterministic", literal=False):
    t = _Table(session, channel_mode)
    defined = bool(t.critical.any())
    if literal:
        inv = 1.0 / (1.0 - t.avg)
        y0 = float(inv[t.critical].max()) if defined else 0.0
        y = np.array([float(inv[m].max()) if m.any() else 0.0
                      for m in (t.critical & (t.D[j] > 0) for j in range(t.M))])
        return YValues(y0, y, defined)
    return YValues(t.peak0 - t.cmax, t.peak - t.cmax, defined)


def helper_set(y0, y):
    return tuple(int(j) for j in np.flatnonzero(np.asarray(y) < y0))


def _helpers(t):
    # compare peaks, not differences, so ties survive rounding
    return tuple(int(j) for j in np.flatnonzero(t.peak < t.peak0))


def ne_set_game1(session, channel_mode="deterministic"):
    """Pure NE of the completion-time game, from the helper set alone.

    Everything is an equilibrium when no lone sender beats a wasted stage.
    Otherwise: any lone sender, any three or more senders, or a pair of
    senders neither of whom is a helper.
    """
    t = _Table(session, channel_mode)
    Z = set(_helpers(t))
    profiles = _all_profiles(session.M)
    if not Z:
        return frozenset(profiles)

    def is_ne(a):
        on = [i for i, b in enumerate(a) if b]
        if len(on) == 1 or len(on) > 2:
            return True
        return len(on) == 2 and not (Z & set(on))

    return frozenset(a for a in profiles if is_ne(a))


def _singleton(M, i):
    a = [0] * M
    a[i] = 1
    return tuple(a)


def ne_set_game2(session, channel_mode="deterministic", literal=False):
    """Pure NE of the punished game.

    Two or more senders are never an equilibrium: dropping one sender always
    saves at least the transmit charge. Silence is an equilibrium iff no
    eligible lone sender beats it; lone sender ``i`` iff it does not lose to
    silence. ``literal=True`` instead returns the textbook set (helpers as
    lone senders, or every lone sender when there is no helper), which does
    not account for the transmit charge against silence.
    """
    t = _Table(session, channel_mode)
    M = session.M
    if literal:
        Z = _helpers(t)
        senders = Z if Z else range(M)
        return frozenset(_singleton(M, i) for i in senders)
    us = t.u_silent("game2")
    single = {i: t.u_single("game2", i) for i in range(M) if t.eligible[i]}
    out = {_singleton(M, i) for i, u in single.items() if u >= us}
    if all(u <= us for u in single.values()):
        out.add((0,) * M)
    return frozenset(out)


def _phi_prev(session, game, phi_prev):
    return session.ledger.phi_prev[game] if phi_prev is None else float(phi_prev)


def poa_game1(session, phi_prev=None, channel_mode="deterministic"):
    """Price of anarchy of the completion-time game.

    ``1 - (Y0 - min_Z Y) / (phi' + Y0)``, or 1 without helpers. The sender
    attaining Y0 always charges itself, so it is never a helper and some
    equilibrium always pays the full Y0.
    """
    t = _Table(session, channel_mode)
    Z = _helpers(t)
    if not Z:
        return 1.0
    phi = _phi_prev(session, "game1", phi_prev)
    y0 = t.peak0 - t.cmax
    ymin = min(float(t.peak[j]) for j in Z) - t.cmax
    return 1.0 - (y0 - ymin) / (phi + y0)


def poa_game2(session, phi_prev=None, channel_mode="deterministic", literal=False):
    """(price of anarchy, lower bound) of the punished game.

    Lone sender ``i`` costs ``phi' + |D_i| / M + 1 + Y_i`` and silence costs
    ``phi' + Y0 + w / M``; the ratio runs over :func:`ne_set_game2`.
    """
    t = _Table(session, channel_mode)
    phi = _phi_prev(session, "game2", phi_prev)
    Z = _helpers(t)
    y0 = t.peak0 - t.cmax
    y = t.peak - t.cmax
    costs = []
    for a in ne_set_game2(session, channel_mode, literal):
        if sum(a):
            i = a.index(1)
            yi = y[i] if (Z or not literal) else y0
            costs.append(phi + t.l1[i] / t.M + 1 + yi)
        else:
            costs.append(phi + y0 + t.w / t.M)
    poa = min(costs) / max(costs) if costs else 1.0
    if Z:
        ymin = min(float(y[j]) for j in Z)
        lb = 1.0 - (1.0 + y0 - ymin) / (phi + 2.0 + y0)
    else:
        lb = 1.0 - 1.0 / (phi + 2.0 + y0)
    return float(poa), float(lb)


def brute_force_ne(session, game=None, channel_mode="deterministic"):
    """Enumerate every admissible profile; return (NE set, PONE set).

    A profile is an equilibrium when no player's admissible unilateral switch
    strictly raises the common utility. The PONE are the equilibria of
    highest utility.
    """
    game = game or session.game
    M = session.M
    eligible = session.backoff() == 0 if game == "game2" else np.ones(M, bool)
    profiles = [a for a in _all_profiles(M)
                if all(eligible[i] or not b for i, b in enumerate(a))]
    U = {a: utility(a, session, game, channel_mode) for a in profiles}
    ne = []
    for a in profiles:
        stable = True
        for i in range(M):
            b = a[:i] + (1 - a[i],) + a[i + 1:]
            if b in U and U[b] > U[a]:
                stable = False
                break
        if stable:
            ne.append(a)
    best = max(U[a] for a in ne)
    return frozenset(ne), frozenset(a for a in ne if U[a] == best)


def brute_force_poa(session, game=None, phi_prev=None, channel_mode="deterministic"):
    """Best-to-worst equilibrium cost ratio straight from the utility table."""
    game = game or session.game
    ne, _ = brute_force_ne(session, game, channel_mode)
    phi = _phi_prev(session, game, phi_prev)
    cmax = float(session.completion().max())
    costs = [phi + (-utility(a, session, game, channel_mode) - cmax) for a in ne]
    return min(costs) / max(costs)


def analyze_stage(session, game=None, channel_mode="deterministic"):
    game = game or session.game
    t = _Table(session, channel_mode)
    yv = y_values(session, channel_mode)
    Z = _helpers(t)
    phi = _phi_prev(session, game, None)
    if game == "game1":
        ne = ne_set_game1(session, channel_mode)
        poa = poa_game1(session, channel_mode=channel_mode)
        lb = poa
        if Z:
            best = min(float(t.peak[j]) for j in Z)
            pone = frozenset(_singleton(t.M, j) for j in Z if t.peak[j] == best)
        else:
            pone = ne
    else:
        ne = ne_set_game2(session, channel_mode)
        poa, lb = poa_game2(session, channel_mode=channel_mode)
        u = {a: (t.u_single("game2", a.index(1)) if sum(a) else t.u_silent("game2"))
             for a in ne}
        top = max(u.values())
        pone = frozenset(a for a in ne if u[a] == top)
    return StageAnalysis(
        stage=session.ledger.stage, game=game, critical=critical_set(session),
        helper=Z, y0=yv.y0, y=yv.y, y0_defined=yv.defined, ne_profiles=ne,
        pone=pone, poa=poa, poa_lower_bound=lb, cost_prev=phi)
