"""Session primitives: state matrix, erasure model, init phase, channel draws.

The side-information state is kept as a plain ``M x N`` uint8 array
(``1`` = packet wanted, ``0`` = packet held); there is no wrapper class.
"""
from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_RETX_CAP = 10_000


class InitPhaseError(RuntimeError):
    """The base station gave up re-broadcasting a packet nobody received."""


def check_state(S):
    """Validate a state matrix and return it as uint8.

    Raises ``ValueError`` if entries are not binary or if some packet is
    wanted by every player (nobody could ever send it).
    """
    S = np.asarray(S)
    if S.ndim != 2:
        raise ValueError(f"state matrix must be 2-D, got shape {S.shape}")
    if not np.isin(S, (0, 1)).all():
        raise ValueError("state matrix entries must be 0 or 1")
    S = S.astype(np.uint8)
    if S.shape[0] and S.shape[1] and (S.min(axis=0) == 1).any():
        cols = np.flatnonzero(S.min(axis=0) == 1).tolist()
        raise ValueError(f"packets {cols} are not held by any player")
    return S


@dataclass(frozen=True)
class ErasureModel:
    """Erasure probabilities of a CDE session.

    ``player[i, j]`` is the probability that a packet sent by player ``j``
    is lost at player ``i``; the diagonal is forced to zero. ``bs[i]`` is the
    base-station to player ``i`` erasure probability.
    """

    player: np.ndarray
    bs: np.ndarray
    avg_direction: str = "incoming"

    def __post_init__(self):
        P = np.array(self.player, dtype=np.float64)
        q = np.array(self.bs, dtype=np.float64).reshape(-1)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError(f"player erasure matrix must be square, got {P.shape}")
        if q.size != P.shape[0]:
            raise ValueError("bs erasure vector length must equal player count")
        np.fill_diagonal(P, 0.0)
        if ((P < 0) | (P >= 1)).any() or ((q < 0) | (q >= 1)).any():
            raise ValueError("erasure probabilities must lie in [0, 1)")
        if self.avg_direction not in ("incoming", "outgoing"):
            raise ValueError(f"unknown avg_direction {self.avg_direction!r}")
        P.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "player", P)
        object.__setattr__(self, "bs", q)

    @property
    def players(self):
        return self.player.shape[0]

    @property
    def avg(self):
        """Average erasure linking each player to the others (self term 0)."""
        axis = 1 if self.avg_direction == "incoming" else 0
        return self.player.sum(axis=axis) / self.players

    @classmethod
    def uniform(cls, M, p, q=0.0, **kw):
        return cls(np.full((M, M), float(p)), np.full(M, float(q)), **kw)


@dataclass(frozen=True)
class GameLedger:
    """Sufficient statistics of the play history.

    ``window`` holds the collision indicators of the last ``V`` stages, oldest
    column first. ``phi_prev`` is the running cost used by the price of
    anarchy formulas, one entry per game.
    """

    cumulative_delay: np.ndarray
    initial_wants: np.ndarray
    stage: int = 1
    window: np.ndarray = None
    punishment: int = 2
    phi_prev: dict = field(default_factory=dict)

    def __post_init__(self):
        D = np.array(self.cumulative_delay, dtype=np.float64)
        W0 = np.array(self.initial_wants, dtype=np.float64)
        if D.shape != W0.shape:
            raise ValueError("delay and initial-wants vectors differ in length")
        if self.punishment < 0:
            raise ValueError("punishment window must be >= 0")
        win = self.window
        if win is None:
            win = np.zeros((D.size, self.punishment), dtype=np.uint8)
        win = np.array(win, dtype=np.uint8).reshape(D.size, self.punishment)
        for arr in (D, W0, win):
            arr.setflags(write=False)
        object.__setattr__(self, "cumulative_delay", D)
        object.__setattr__(self, "initial_wants", W0)
        object.__setattr__(self, "window", win)
        object.__setattr__(self, "phi_prev", dict(self.phi_prev))

    @classmethod
    def start(cls, S, punishment=2, initial_delay=None):
        """Ledger at the beginning of the recovery phase."""
        S = np.asarray(S)
        W0 = S.sum(axis=1)
        D = np.zeros(S.shape[0]) if initial_delay is None else initial_delay
        return cls(D, W0, punishment=punishment)

    def evolve(self, **changes):
        return replace(self, **changes)


def run_init_phase(M, N, bs_erasure, rng, max_retx=DEFAULT_RETX_CAP):
    """Uncoded BS broadcast of the frame, repeating packets nobody received.

    Returns the ``M x N`` state matrix at the end of the initial phase.
    """
    q = np.broadcast_to(np.asarray(bs_erasure, dtype=np.float64), (M,))
    if M < 1 or N < 0:
        raise ValueError("need M >= 1 and N >= 0")
    if ((q < 0) | (q >= 1)).any():
        raise ValueError("bs erasure probabilities must lie in [0, 1)")
    got = rng.random((M, N)) >= q[:, None]
    missing = np.flatnonzero(~got.any(axis=0))
    attempts = 1
    while missing.size:
        if attempts >= max_retx:
            raise InitPhaseError(
                f"packets {missing.tolist()} still unreceived after {attempts} broadcasts")
        redo = rng.random((M, missing.size)) >= q[:, None]
        got[:, missing] = redo
        missing = missing[~redo.any(axis=0)]
        attempts += 1
    return (~got).astype(np.uint8)


def sample_channel(model, rng):
    """One realization of the player-to-player reception matrix.

    Entry ``[i, j]`` is 1 when a packet sent by ``j`` reaches ``i``.
    """
    X = (rng.random(model.player.shape) >= model.player).astype(np.uint8)
    np.fill_diagonal(X, 1)
    return X


def is_complete(S):
    return not np.asarray(S).any()
