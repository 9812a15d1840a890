"""Monte-Carlo experiments: erasure sampling, paired CDE/PMP episodes, sweeps."""
import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .game import Session, advance_stage
from .learning import resolve_stage_action
from .pmp import run_pmp_episode
from .session import ErasureModel, GameLedger, check_state, run_init_phase

CSV_HEADER = ("x", "scheme", "mean_T", "stderr", "mean_estimate", "censored",
              "iterations")
STAGE_HEADER = ("t", "Q", "Z", "Y0", "minY", "PoA", "PoA_lb", "NE", "PONE")
FIG1_PLAYERS = (20, 30, 40, 50, 60)
FIG2_RATIOS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2)
STREAMS = ("model", "init", "cde", "pmp")


@dataclass(frozen=True)
class ExperimentConfig:
    players: int = 20
    packets: int = 30
    q_mean: float = 0.2
    p_mean: float = 0.1
    spread: float = 0.1
    punishment: int = 2
    game: str = "game2"
    channel_mode: str = "expected"
    iterations: int = 500
    seed: int = 0
    liveness: bool = True
    single_sweep: bool = False
    avg_direction: str = "incoming"
    slot_cap_factor: int = 100
    out: str = None

    def __post_init__(self):
        if self.players < 1 or self.packets < 0:
            raise ValueError("need players >= 1 and packets >= 0")
        for name in ("q_mean", "p_mean"):
            v = getattr(self, name)
            if not 0 <= v < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.game not in ("game1", "game2"):
            raise ValueError(f"unknown game {self.game!r}")
        if self.channel_mode not in ("expected", "deterministic", "realized"):
            raise ValueError(f"unknown channel mode {self.channel_mode!r}")

    @property
    def slot_cap(self):
        return self.slot_cap_factor * max(self.packets, 1)

    def with_(self, **kw):
        return replace(self, **kw)


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def parse_config_text(text):
    """Flat ``key = value`` file; ``#`` starts a comment. Keys use field names."""
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in types:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        kind = types[key]
        if kind in (int, "int"):
            out[key] = int(value)
        elif kind in (float, "float"):
            out[key] = float(value)
        elif kind in (bool, "bool"):
            out[key] = _BOOL[value.lower()]
        else:
            out[key] = value
    return out


def iteration_streams(seed, index):
    """Independent generators for one iteration, keyed only by (seed, index)."""
    children = np.random.SeedSequence(int(seed), spawn_key=(int(index),)).spawn(len(STREAMS))
    return {name: np.random.default_rng(ss) for name, ss in zip(STREAMS, children)}


def _clipped(mean, spread):
    if spread == 0:
        return mean, mean
    lo, hi = max(0.001, mean - spread), min(0.99, mean + spread)
    if lo > hi:
        raise ValueError(f"erasure mean {mean} with spread {spread} leaves an empty range")
    return lo, hi


def clipped_mean(mean, spread):
    """Exact mean of the clipped uniform law used by :func:`sample_erasure_model`."""
    lo, hi = _clipped(mean, spread)
    return 0.5 * (lo + hi)


def sample_erasure_model(config, index, rng=None):
    """Per-iteration erasure draws around the configured means."""
    rng = rng or iteration_streams(config.seed, index)["model"]
    M = config.players
    plo, phi = _clipped(config.p_mean, config.spread)
    qlo, qhi = _clipped(config.q_mean, config.spread)
    P = rng.uniform(plo, phi, size=(M, M))
    np.fill_diagonal(P, 0.0)
    q = rng.uniform(qlo, qhi, size=M)
    return ErasureModel(P, q, avg_direction=config.avg_direction)


class EpisodeResult(NamedTuple):
    T: int
    mean_estimate: float
    total_delay: float
    censored: bool


def run_cde_episode(config, index, S0=None, model=None, rng=None, log=None):
    """One cooperative recovery episode driven by best-response play."""
    streams = iteration_streams(config.seed, index)
    if model is None:
        model = sample_erasure_model(config, index, streams["model"])
    if S0 is None:
        S0 = run_init_phase(config.players, config.packets, model.bs, streams["init"])
    rng = rng or streams["cde"]
    session = Session.start(S0, model, game=config.game,
                            punishment=config.punishment, log=log)
    mode = "expected" if config.channel_mode == "realized" else config.channel_mode
    T = 0
    while not session.complete() and T < config.slot_cap:
        a = resolve_stage_action(session, channel_mode=mode,
                                 liveness=config.liveness,
                                 single_sweep=config.single_sweep)
        advance_stage(session, a, rng)
        T += 1
    est = float(session.completion().mean())
    return EpisodeResult(T, est, float(session.ledger.cumulative_delay.sum()),
                         not session.complete())


def run_paired_iteration(config, index):
    """CDE and PMP from the same initial state; returns (cde, pmp) results."""
    streams = iteration_streams(config.seed, index)
    model = sample_erasure_model(config, index, streams["model"])
    S0 = run_init_phase(config.players, config.packets, model.bs, streams["init"])
    cde = run_cde_episode(config, index, S0, model, streams["cde"])
    pmp = run_pmp_episode(config.players, config.packets, model.bs,
                          streams["pmp"], S0=S0, slot_cap=config.slot_cap)
    return cde, EpisodeResult(*pmp)


def _point_task(args):
    config, lo, hi = args
    return [run_paired_iteration(config, i) for i in range(lo, hi)]


@dataclass(frozen=True)
class SweepRow:
    x: float
    scheme: str
    mean_T: float
    stderr: float
    mean_estimate: float
    censored: int
    iterations: int


def _summarize(x, scheme, results):
    ok = [r for r in results if not r.censored]
    Ts = np.array([r.T for r in ok], dtype=np.float64)
    n = Ts.size
    mean = float(Ts.mean()) if n else float("nan")
    se = float(Ts.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    est = float(np.mean([r.mean_estimate for r in ok])) if n else float("nan")
    return SweepRow(x, scheme, mean, se, est, len(results) - n, len(results))


def point_config(config, variable, value):
    if variable == "M":
        return config.with_(players=int(value))
    if variable == "ratio":
        return config.with_(p_mean=float(value) * config.q_mean)
    raise ValueError(f"unknown sweep variable {variable!r}")


def run_sweep(config, variable, values, jobs=1, progress=None):
    """Paired CDE/PMP means at every grid value; two rows per value."""
    values = list(values)
    if not values:
        raise ValueError("sweep grid is empty")
    rows = []
    for x in values:
        cfg = point_config(config, variable, x)
        if jobs > 1:
            step = math.ceil(cfg.iterations / (4 * jobs))
            chunks = [(cfg, lo, min(cfg.iterations, lo + step))
                      for lo in range(0, cfg.iterations, step)]
            with ProcessPoolExecutor(jobs) as pool:
                pairs = [p for part in pool.map(_point_task, chunks) for p in part]
        else:
            pairs = _point_task((cfg, 0, cfg.iterations))
        rows.append(_summarize(x, "cde", [c for c, _ in pairs]))
        rows.append(_summarize(x, "pmp", [p for _, p in pairs]))
        if progress:
            progress(rows[-2], rows[-1])
    return rows


def _fmt(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6f}"
    return str(v)


def format_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(getattr(r, k)) for k in CSV_HEADER])
    return buf.getvalue()


def format_gnuplot(rows):
    """Whitespace table: x, then mean/stderr/censored per scheme."""
    schemes = []
    for r in rows:
        if r.scheme not in schemes:
            schemes.append(r.scheme)
    cols = ["x"] + [f"{s}_{k}" for s in schemes for k in ("mean_T", "stderr", "censored")]
    lines = ["# " + " ".join(cols)]
    by_x = {}
    for r in rows:
        by_x.setdefault(r.x, {})[r.scheme] = r
    for x, per in by_x.items():
        vals = [_fmt(float(x))]
        for s in schemes:
            r = per.get(s)
            vals += [_fmt(r.mean_T), _fmt(r.stderr), str(r.censored)] if r else ["nan"] * 3
        lines.append(" ".join(vals))
    return "\n".join(lines) + "\n"


def emit_outputs(rows, path):
    """Write ``<path>`` (CSV) and ``<path stem>.dat`` (gnuplot); return both paths."""
    path = Path(path)
    if path.suffix != ".csv":
        path = path.with_suffix(".csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    dat = path.with_suffix(".dat")
    path.write_text(format_csv(rows))
    dat.write_text(format_gnuplot(rows))
    return path, dat


# -- state snapshots ---------------------------------------------------------

def _bits(line, n):
    toks = line.split()
    if len(toks) == 1 and len(toks[0]) == n and n > 1:
        toks = list(toks[0])
    if len(toks) != n:
        raise ValueError(f"expected {n} bits, got {line!r}")
    return [int(t) for t in toks]


def _nums(line, n):
    toks = line.split()
    if len(toks) != n:
        raise ValueError(f"expected {n} numbers, got {line!r}")
    return [float(t) for t in toks]


def read_snapshot(text, game="game2", punishment=2, avg_direction="incoming"):
    """Parse a state snapshot into a :class:`Session`.

    Layout: ``M N``; M lines of N bits (state); M lines of M probabilities
    (player erasures); one line of M base-station erasures; one line of
    cumulative delays; one line of initial Wants sizes.
    """
    lines = [ln for ln in (s.split("#", 1)[0].strip() for s in text.splitlines()) if ln]
    if not lines:
        raise ValueError("empty snapshot")
    M, N = (int(v) for v in lines[0].split())
    need = 1 + 2 * M + 3
    if len(lines) != need:
        raise ValueError(f"snapshot for M={M} needs {need} lines, got {len(lines)}")
    S = check_state(np.array([_bits(lines[1 + i], N) for i in range(M)], dtype=np.uint8)
                    .reshape(M, N))
    P = np.array([_nums(lines[1 + M + i], M) for i in range(M)])
    q = np.array(_nums(lines[1 + 2 * M], M))
    D = np.array(_nums(lines[2 + 2 * M], M))
    W0 = np.array(_nums(lines[3 + 2 * M], M))
    if (W0 < S.sum(axis=1)).any():
        raise ValueError("initial Wants sizes cannot be below current Wants sizes")
    model = ErasureModel(P, q, avg_direction=avg_direction)
    ledger = GameLedger(D, W0, punishment=punishment)
    return Session(S, model, ledger, game=game)


def _num(v):
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def write_snapshot(session):
    S, m, L = session.S, session.model, session.ledger
    out = [f"{session.M} {session.N}"]
    out += [" ".join(str(int(b)) for b in row) for row in S]
    out += [" ".join(repr(float(p)) for p in row) for row in m.player]
    out.append(" ".join(repr(float(v)) for v in m.bs))
    out.append(" ".join(_num(v) for v in L.cumulative_delay))
    out.append(" ".join(_num(v) for v in L.initial_wants))
    return "\n".join(out) + "\n"


def format_episode_log(records):
    """One JSON object per stage, keys in fixed order."""
    return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)


def format_stage_records(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STAGE_HEADER)
    for rec in records:
        w.writerow([_fmt(rec[k]) if isinstance(rec[k], float) else rec[k]
                    for k in STAGE_HEADER])
    return buf.getvalue()


def config_dict(config):
    return asdict(config)
