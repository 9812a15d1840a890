"""Oracle-equivalence suites over random stage states.

Each suite compares a closed-form analysis routine with exhaustive
enumeration. The corpus is reproducible from a single seed.
"""
import itertools
from dataclasses import dataclass, field

import numpy as np

from .equilibrium import (
    _Table, _helpers, brute_force_ne, brute_force_poa, ne_set_game1,
    ne_set_game2, poa_game1, poa_game2, y_values,
)
from .game import Session, player_utilities, utility
from .learning import resolve_stage_action
from .session import ErasureModel, GameLedger

CORPUS_PLAYERS = (2, 3, 4, 5, 6)
CORPUS_PACKETS = (4, 5, 6, 7, 8, 9, 10)
POA_TOL = 1e-9


def crossed_pair(game="game2"):
    """The 2-player crossed instance: each player wants what the other holds."""
    S = np.array([[0, 1], [1, 0]], dtype=np.uint8)
    P = np.array([[0.0, 0.4], [0.1, 0.0]])
    model = ErasureModel(P, np.zeros(2))
    return Session.start(S, model, game=game)


def crossed_session(M, rng, game="game2"):
    """``M`` players, ``M`` packets; player ``i`` misses only packet ``i``."""
    S = np.eye(M, dtype=np.uint8)
    P = rng.uniform(0.01, 0.6, size=(M, M))
    return Session.start(S, ErasureModel(P, np.zeros(M)), game=game)


def random_state(M, N, rng):
    S = (rng.random((M, N)) < 0.5).astype(np.uint8)
    for p in np.flatnonzero(S.min(axis=0) == 1):
        S[rng.integers(M), p] = 0
    return S


def random_stage_session(M, N, rng, game="game2"):
    """Mid-episode stage state: random S, P, delays and initial Wants sizes."""
    S = random_state(M, N, rng)
    P = rng.uniform(0.0, 0.6, size=(M, M))
    D = rng.integers(0, 5, size=M).astype(np.float64)
    W0 = S.sum(axis=1) + rng.integers(0, 4, size=M)
    model = ErasureModel(P, rng.uniform(0.0, 0.5, size=M))
    return Session(S, model, GameLedger(D, W0), game=game)


def corpus(seed=0, players=CORPUS_PLAYERS, packets=CORPUS_PACKETS, per_cell=200):
    """Yield ``(M, N, session)``; the stream depends only on the arguments."""
    for M, N in itertools.product(players, packets):
        rng = np.random.default_rng([seed, M, N])
        for _ in range(per_cell):
            yield M, N, random_stage_session(M, N, rng)


@dataclass
class Tally:
    checked: int = 0
    failed: int = 0
    examples: list = field(default_factory=list)

    def add(self, ok, witness=None):
        self.checked += 1
        if not ok:
            self.failed += 1
            if len(self.examples) < 3 and witness is not None:
                self.examples.append(witness)

    @property
    def ok(self):
        return self.checked > 0 and self.failed == 0

    def line(self):
        return f"{self.checked - self.failed}/{self.checked}"


@dataclass
class SuiteReport:
    """Per-check tallies. ``*_empty`` cover states with no critical player."""

    ne1: Tally = field(default_factory=Tally)
    ne2: Tally = field(default_factory=Tally)
    ne1_empty: Tally = field(default_factory=Tally)
    ne2_empty: Tally = field(default_factory=Tally)
    ne2_literal: Tally = field(default_factory=Tally)
    poa1: Tally = field(default_factory=Tally)
    poa2: Tally = field(default_factory=Tally)
    bound: Tally = field(default_factory=Tally)
    dominance: Tally = field(default_factory=Tally)
    pone_attained: Tally = field(default_factory=Tally)
    states: int = 0

    def tallies(self):
        return {k: v for k, v in vars(self).items() if isinstance(v, Tally)}


def _witness(session):
    return {"S": session.S.tolist(), "D": session.ledger.cumulative_delay.tolist(),
            "W0": session.ledger.initial_wants.tolist(),
            "P": session.model.player.tolist()}


def check_state(session, report, mode="deterministic"):
    """Run every per-state comparison on one session and record the results."""
    report.states += 1
    nonempty = bool(session.critical().any())
    ne1, _ = brute_force_ne(session, "game1", mode)
    ne2, pone2 = brute_force_ne(session, "game2", mode)
    w = _witness(session)
    (report.ne1 if nonempty else report.ne1_empty).add(
        ne_set_game1(session, mode) == ne1, w)
    (report.ne2 if nonempty else report.ne2_empty).add(
        ne_set_game2(session, mode) == ne2, w)
    if not nonempty:
        return
    report.ne2_literal.add(ne_set_game2(session, mode, literal=True) == ne2, w)
    p1 = poa_game1(session, channel_mode=mode)
    p2, lb = poa_game2(session, channel_mode=mode)
    report.poa1.add(abs(p1 - brute_force_poa(session, "game1", channel_mode=mode))
                    <= POA_TOL, w)
    report.poa2.add(abs(p2 - brute_force_poa(session, "game2", channel_mode=mode))
                    <= POA_TOL, w)
    report.bound.add(1.0 >= p2 >= lb, w)
    if _helpers(_Table(session, mode)):
        report.dominance.add(p2 > p1, w)
    a = resolve_stage_action(session, "game2", mode, liveness=False)
    report.pone_attained.add(tuple(int(b) for b in a) in pone2, w)


def run_oracle_suite(seed=0, per_cell=200, players=CORPUS_PLAYERS,
                     packets=CORPUS_PACKETS, mode="deterministic"):
    report = SuiteReport()
    for _, _, session in corpus(seed, players, packets, per_cell):
        check_state(session, report, mode)
    return report


def check_potential_identity(session, game):
    """Common utility is its own potential: every deviation difference matches.

    Returns the number of (profile, player) pairs checked; raises
    ``AssertionError`` on the first mismatch.
    """
    M = session.M
    checked = 0
    for prof in itertools.product((0, 1), repeat=M):
        us = player_utilities(prof, session, game)
        if not (us == us[0]).all():
            raise AssertionError(f"utility differs across players at {prof}")
        phi = utility(prof, session, game)
        for i in range(M):
            dev = prof[:i] + (1 - prof[i],) + prof[i + 1:]
            du = player_utilities(dev, session, game)[i] - us[i]
            if du != utility(dev, session, game) - phi:
                raise AssertionError(f"deviation identity broken at {prof}, i={i}")
            checked += 1
    return checked


def crossed_pair_values():
    """Headline quantities of :func:`crossed_pair`."""
    s = crossed_pair()
    yv = y_values(s)
    p2, lb = poa_game2(s)
    return {
        "Y0": yv.y0, "Y2": float(yv.y[1]), "Z": _helpers(_Table(s, "deterministic")),
        "PoA": poa_game1(s), "PoA2": p2, "PoA2_lb": lb,
        "NE2": ne_set_game2(s), "NE2_literal": ne_set_game2(s, literal=True),
    }


def multi_sender_exhibit(players=(3, 4, 5), per_size=50, seed=0):
    """Count crossed states where Game 1 admits multi-sender NE.

    Returns ``{M: (states, game1_multi, game2_multi, game2_not_singleton)}``.
    """
    out = {}
    for M in players:
        rng = np.random.default_rng([seed, M])
        g1 = g2 = g2s = 0
        for _ in range(per_size):
            s = crossed_session(M, rng)
            ne1, _ = brute_force_ne(s, "game1")
            ne2, _ = brute_force_ne(s, "game2")
            Z = set(_helpers(_Table(s, "deterministic")))
            g1 += any(sum(a) > 2 or (sum(a) == 2 and not Z & {i for i, b in enumerate(a) if b})
                      for a in ne1)
            g2 += any(sum(a) >= 2 for a in ne2)
            g2s += any(sum(a) != 1 for a in ne2)
        out[M] = (per_size, g1, g2, g2s)
    return out


def format_report(report):
    lines = [f"states: {report.states}"]
    for name, t in report.tallies().items():
        if t.checked:
            rate = t.failed / t.checked
            lines.append(f"{name:14s} {t.line():>12s}  mismatch {rate:.4f}")
    return "\n".join(lines)


