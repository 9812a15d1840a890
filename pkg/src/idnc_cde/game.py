"""Stage game: action profiles, the two utilities, back-off, stage advance."""
from dataclasses import dataclass, field

import numpy as np

from . import coding
from .delay import accumulate_delay, completion_estimate, stage_delay
from .session import GameLedger, check_state, is_complete, sample_channel

GAMES = ("game1", "game2")
CHANNEL_MODES = ("realized", "deterministic", "expected")


class BackoffViolation(ValueError):
    pass


class SessionComplete(RuntimeError):
    pass


def as_profile(bits, M=None):
    a = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if not np.isin(a, (0, 1)).all():
        raise ValueError(f"action profile must be binary, got {a.tolist()}")
    if M is not None and a.size != M:
        raise ValueError(f"profile has {a.size} entries for {M} players")
    return a


def collision_indicator(profile):
    a = as_profile(profile)
    return a.copy() if a.sum() > 1 else np.zeros_like(a)


def backoff_vector(window):
    """Number of recent collisions per player; positive means barred."""
    window = np.asarray(window, dtype=np.int64)
    if window.ndim != 2:
        raise ValueError("collision window must be M x V")
    return window.sum(axis=1)


def allowed_actions(i, backoff=None, game="game2"):
    """Bits player ``i`` may play: ``(0, 1)`` or ``(0,)`` when backed off."""
    if game == "game1" or backoff is None or backoff[i] == 0:
        return (0, 1)
    return (0,)


@dataclass
class StageOutcome:
    profile: np.ndarray
    realization: np.ndarray
    decoded: list
    delay_increment: np.ndarray
    collided: np.ndarray


@dataclass
class Session:
    """Mutable CDE recovery session (one thread at a time).

    ``selector`` picks how each player's combination is formed: ``"greedy"``
    or the exhaustive ``"exact"`` oracle.
    """

    S: np.ndarray
    model: object
    ledger: GameLedger
    game: str = "game2"
    selector: str = "greedy"
    log: list = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.S = check_state(self.S).copy()
        if self.game not in GAMES:
            raise ValueError(f"unknown game {self.game!r}")
        if self.selector not in ("greedy", "exact"):
            raise ValueError(f"unknown selector {self.selector!r}")
        if self.model.players != self.S.shape[0]:
            raise ValueError("erasure model and state disagree on player count")
        if self.ledger.cumulative_delay.size != self.S.shape[0]:
            raise ValueError("ledger and state disagree on player count")
        if not self.ledger.phi_prev:
            c0 = float(self.completion().max()) if self.M else 0.0
            self.ledger = self.ledger.evolve(phi_prev={g: c0 for g in GAMES})

    @classmethod
    def start(cls, S, model, game="game2", punishment=2, **kw):
        S = check_state(S)
        return cls(S, model, GameLedger.start(S, punishment), game=game, **kw)

    @property
    def M(self):
        return self.S.shape[0]

    @property
    def N(self):
        return self.S.shape[1]

    def copy(self, **changes):
        kw = dict(S=self.S.copy(), model=self.model, ledger=self.ledger,
                  game=self.game, selector=self.selector, log=None)
        kw.update(changes)
        return Session(**kw)

    def complete(self):
        return is_complete(self.S)

    def wants(self):
        return coding.wants_indicator(self.S)

    def completion(self, extra_delay=0.0):
        L = self.ledger
        return completion_estimate(L.initial_wants,
                                   L.cumulative_delay + extra_delay,
                                   self.model.avg)

    def raised_completion(self):
        """Each player's estimate if it alone were charged one more unit."""
        return self.completion(1.0)

    def critical(self):
        """Boolean mask of wanting players whose next delay raises the max."""
        if self.M == 0:
            return np.zeros(0, dtype=bool)
        return (self.raised_completion() > self.completion().max()) & \
            (self.wants() == 1)

    def backoff(self):
        if self.game == "game1":
            return np.zeros(self.M, dtype=np.int64)
        return backoff_vector(self.ledger.window)

    def _key(self, tag):
        return (tag, self.ledger.stage, self.S.tobytes(),
                self.ledger.cumulative_delay.tobytes())

    def combinations(self):
        """Every player's combination for this stage (row ``i`` = sender ``i``).

        All players compute the same matrix, the critical set acting as the
        greedy priority.
        """
        key = self._key("K")
        if key not in self._cache:
            self._cache.clear()
            pri = np.flatnonzero(self.critical())
            if self.selector == "greedy":
                K = coding.greedy_all(self.S, self.model, pri)
            else:
                K = coding.exact_all(self.S, self.model, pri)
            self._cache[key] = K
        return self._cache[key]

    def targets(self):
        key = self._key("T")
        if key not in self._cache:
            K = self.combinations()
            self._cache[key] = coding.target_matrix(K, self.S)
        return self._cache[key]

    def reception(self, channel_mode, omega=None):
        """Reception matrix under the given channel mode."""
        if channel_mode == "deterministic":
            return np.ones((self.M, self.M))
        if channel_mode == "expected":
            return 1.0 - self.model.player
        if channel_mode == "realized":
            if omega is None:
                raise ValueError("realized channel mode needs a realization")
            return np.asarray(omega, dtype=np.float64)
        raise ValueError(f"unknown channel mode {channel_mode!r}")

    def single_delays(self, channel_mode="deterministic", omega=None):
        """Row ``i`` = delay increments when player ``i`` transmits alone."""
        R = self.reception(channel_mode, omega)
        untargeted = 1 - self.targets()
        return R.T * untargeted * self.wants()[None, :]


def profile_increment(profile, session, channel_mode="deterministic", omega=None):
    """Delay increments a profile would cause this stage."""
    a = as_profile(profile, session.M)
    if a.sum() != 1:
        return session.wants().astype(np.float64)
    i = int(np.flatnonzero(a)[0])
    R = session.reception(channel_mode, omega)
    return stage_delay(i, session.combinations()[i], session.S, R)


def utility_game1(profile, session, channel_mode="deterministic", omega=None):
    """Common utility of the completion-time game: minus the worst estimate."""
    inc = profile_increment(profile, session, channel_mode, omega)
    return -float(session.completion(inc).max())


def utility_game2(profile, session, channel_mode="deterministic", omega=None):
    """Game 1 utility minus transmitter count minus mean delay increment."""
    a = as_profile(profile, session.M)
    inc = profile_increment(a, session, channel_mode, omega)
    cnorm = float(session.completion(inc).max())
    return -cnorm - int(a.sum()) - float(inc.sum()) / session.M


def utility(profile, session, game=None, channel_mode="deterministic", omega=None):
    game = game or session.game
    if game == "game1":
        return utility_game1(profile, session, channel_mode, omega)
    if game == "game2":
        return utility_game2(profile, session, channel_mode, omega)
    raise ValueError(f"unknown game {game!r}")


def player_utilities(profile, session, game=None, channel_mode="deterministic"):
    """The utility as seen by each player; every entry is the same number."""
    return np.array([utility(profile, session, game, channel_mode)
                     for _ in range(session.M)])


def _stage_cost_increment(session, game, profile, inc, c_old, c_new):
    if game == "game1":
        return c_new - c_old
    return int(np.asarray(profile).sum()) + float(inc.sum()) / session.M \
        + c_new - c_old


def advance_stage(session, profile, rng=None, omega=None):
    """Play one stage: draw the channel, decode, charge delay, update window."""
    if session.complete():
        raise SessionComplete("cannot advance a completed session")
    a = as_profile(profile, session.M)
    B = session.backoff()
    if ((a == 1) & (B > 0)).any():
        raise BackoffViolation(
            f"players {np.flatnonzero((a == 1) & (B > 0)).tolist()} are backed off")
    if omega is None:
        if rng is None:
            raise ValueError("need an rng or an explicit realization")
        omega = sample_channel(session.model, rng)
    omega = np.asarray(omega, dtype=np.uint8)
    Mw = session.wants()
    c_old = float(session.completion().max())
    decoded = []
    if a.sum() == 1:
        i = int(np.flatnonzero(a)[0])
        kappa = session.combinations()[i]
        tau = session.targets()[i]
        per_stage = stage_delay(i, kappa, session.S, omega)
        for k in np.flatnonzero((tau == 1) & (omega[:, i] == 1)):
            p = int(np.flatnonzero(session.S[k] & kappa)[0])
            decoded.append((int(k), p))
        ledger = accumulate_delay(session.ledger, a, per_stage, Mw)
        inc = per_stage
    else:
        ledger = accumulate_delay(session.ledger, a, None, Mw)
        inc = Mw.astype(np.float64)
    for k, p in decoded:
        session.S[k, p] = 0
    c = collision_indicator(a)
    window = ledger.window
    if window.shape[1]:
        window = np.concatenate([window[:, 1:], c[:, None]], axis=1)
    c_new = float(completion_estimate(ledger.initial_wants, ledger.cumulative_delay,
                                      session.model.avg).max())
    phi = {g: session.ledger.phi_prev[g]
           + _stage_cost_increment(session, g, a, inc, c_old, c_new)
           for g in GAMES}
    session.ledger = ledger.evolve(stage=ledger.stage + 1, window=window,
                                   phi_prev=phi)
    outcome = StageOutcome(a, omega, decoded, np.asarray(inc, dtype=np.float64), c)
    if session.log is not None:
        session.log.append({
            "stage": ledger.stage,
            "profile": a.tolist(),
            "omega": omega.reshape(-1).tolist(),
            "decoded": [list(d) for d in decoded],
            "delay": session.ledger.cumulative_delay.tolist(),
        })
    return outcome
