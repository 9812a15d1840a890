"""Command-line entry point: ``idnc-cde <subcommand> [flags]``.

Settings are resolved in three layers: built-in defaults (plus a per-command
preset for the sweeps), then ``--config FILE``, then explicit flags.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness, verification
from .equilibrium import analyze_stage
from .game import Session, advance_stage
from .harness import ExperimentConfig
from .learning import resolve_stage_action

# flag dest -> config field
_FLAG_FIELDS = {
    "players": "players", "packets": "packets", "p_mean": "p_mean",
    "q_mean": "q_mean", "spread": "spread", "punishment": "punishment",
    "game": "game", "channel_mode": "channel_mode", "iterations": "iterations",
    "seed": "seed", "out": "out", "liveness": "liveness",
    "single_sweep": "single_sweep",
}

_PRESETS = {
    "sweep-m": {"packets": 30, "q_mean": 0.2, "p_mean": 0.1},
    "sweep-ratio": {"players": 60, "packets": 30, "q_mean": 0.3},
}


def _common(p):
    p.add_argument("--config", type=Path, help="key=value settings file")
    p.add_argument("--players", type=int)
    p.add_argument("--packets", type=int)
    p.add_argument("--p-mean", type=float, dest="p_mean")
    p.add_argument("--q-mean", type=float, dest="q_mean")
    p.add_argument("--spread", type=float)
    p.add_argument("--punishment", type=int)
    p.add_argument("--game", choices=("1", "2"))
    p.add_argument("--channel-mode", dest="channel_mode",
                   choices=("realized", "deterministic", "expected"))
    p.add_argument("--iterations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--liveness", choices=("on", "off"))
    p.add_argument("--single-sweep", dest="single_sweep", action="store_true",
                   default=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="idnc-cde", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one episode and print its trace")
    _common(p)
    p.add_argument("--index", type=int, default=0, help="iteration index")
    p.add_argument("--snapshot", type=Path, help="start from this state snapshot")
    p.add_argument("--quiet", action="store_true", help="summary line only")

    p = sub.add_parser("analyze-stage", help="equilibrium analysis of a snapshot")
    _common(p)
    p.add_argument("snapshot", type=Path)
    p.add_argument("--stages", type=int, default=1,
                   help="play this many stages, analysing each one")

    for name, grid in (("sweep-m", harness.FIG1_PLAYERS),
                       ("sweep-ratio", harness.FIG2_RATIOS)):
        p = sub.add_parser(name, help=f"CDE vs PMP sweep ({name[6:]})")
        _common(p)
        p.add_argument("--grid", default=",".join(str(g) for g in grid),
                       help="comma-separated grid values")
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("verify", help="run the oracle-equivalence suites")
    _common(p)
    p.add_argument("--per-cell", type=int, default=200, dest="per_cell")
    return ap


def resolve_config(args, preset=None):
    values = dict(preset or {})
    if getattr(args, "config", None):
        values.update(harness.parse_config_text(args.config.read_text()))
    for dest, key in _FLAG_FIELDS.items():
        v = getattr(args, dest, None)
        if v is None:
            continue
        if dest == "game":
            v = f"game{v}"
        elif dest == "liveness":
            v = v == "on"
        values[key] = v
    return ExperimentConfig(**values)


def _profile_str(a):
    return "".join(str(int(b)) for b in a)


def cmd_simulate(args, out):
    cfg = resolve_config(args)
    log = []
    if args.snapshot:
        session = harness.read_snapshot(args.snapshot.read_text(), cfg.game,
                                        cfg.punishment)
        session.log = log
        rng = harness.iteration_streams(cfg.seed, args.index)["cde"]
        mode = "expected" if cfg.channel_mode == "realized" else cfg.channel_mode
        T = 0
        while not session.complete() and T < cfg.slot_cap:
            a = resolve_stage_action(session, channel_mode=mode,
                                     liveness=cfg.liveness,
                                     single_sweep=cfg.single_sweep)
            advance_stage(session, a, rng)
            T += 1
        res = harness.EpisodeResult(T, float(session.completion().mean()),
                                    float(session.ledger.cumulative_delay.sum()),
                                    not session.complete())
    else:
        res = harness.run_cde_episode(cfg, args.index, log=log)
    if not args.quiet:
        for rec in log:
            dec = " ".join(f"{k}:{p}" for k, p in rec["decoded"]) or "-"
            print(f"t={rec['stage']:<4d} a={_profile_str(rec['profile'])}  "
                  f"decoded {dec}", file=out)
    print(f"T={res.T} mean_estimate={res.mean_estimate:.6f} "
          f"total_delay={res.total_delay:g} censored={int(res.censored)}", file=out)
    if cfg.out:
        Path(cfg.out).write_text(harness.format_episode_log(log))
    return 0


def cmd_analyze(args, out):
    cfg = resolve_config(args)
    mode = cfg.channel_mode if cfg.channel_mode != "realized" else "deterministic"
    session = harness.read_snapshot(args.snapshot.read_text(), cfg.game, cfg.punishment)
    rng = np.random.default_rng(cfg.seed)
    records = []
    for _ in range(max(args.stages, 1)):
        if session.complete():
            break
        st = analyze_stage(session, channel_mode=mode)
        records.append(st.record())
        ne = " ".join(sorted(_profile_str(a) for a in st.ne_profiles))
        pone = " ".join(sorted(_profile_str(a) for a in st.pone))
        print(f"stage {st.stage} ({st.game}, {mode})", file=out)
        print(f"  Q    = {list(st.critical)}", file=out)
        print(f"  Z    = {list(st.helper)}", file=out)
        print(f"  Y0   = {st.y0:.6f}", file=out)
        print(f"  Y    = {[round(float(v), 6) for v in st.y]}", file=out)
        print(f"  NE   = {ne}", file=out)
        print(f"  PONE = {pone}", file=out)
        print(f"  PoA  = {st.poa:.6f}  lower bound {st.poa_lower_bound:.6f}", file=out)
        if args.stages > 1:
            a = resolve_stage_action(session, channel_mode=mode,
                                     liveness=cfg.liveness)
            advance_stage(session, a, rng)
    if cfg.out:
        Path(cfg.out).write_text(harness.format_stage_records(records))
    return 0


def _grid(text, variable):
    conv = int if variable == "M" else float
    vals = [conv(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise SystemExit("error: empty grid")
    return vals


def cmd_sweep(args, out, variable):
    cfg = resolve_config(args, _PRESETS[args.command])
    values = _grid(args.grid, variable)

    def progress(cde, pmp):
        print(f"x={cde.x:g}  cde {cde.mean_T:.3f}  pmp {pmp.mean_T:.3f}  "
              f"censored {cde.censored}/{pmp.censored}", file=sys.stderr)

    rows = harness.run_sweep(cfg, variable, values, jobs=args.jobs, progress=progress)
    if cfg.out:
        csv_path, dat_path = harness.emit_outputs(rows, cfg.out)
        print(f"wrote {csv_path} and {dat_path}", file=out)
    else:
        out.write(harness.format_csv(rows))
    return 0


def cmd_verify(args, out):
    seed = args.seed or 0
    report = verification.run_oracle_suite(seed=seed, per_cell=args.per_cell)
    print(verification.format_report(report), file=out)
    rng = np.random.default_rng(seed)
    pairs = 0
    for M in range(2, 7):
        s = verification.random_stage_session(M, 6, rng)
        for game in ("game1", "game2"):
            pairs += verification.check_potential_identity(s, game)
    print(f"potential identity: {pairs} deviations checked", file=out)
    required = ("ne1", "ne2", "poa1", "poa2", "bound")
    bad = [k for k in required if getattr(report, k).failed]
    print("oracle equivalence:", "FAIL " + ",".join(bad) if bad else "ok", file=out)
    return 1 if bad else 0


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args, out)
        if args.command == "analyze-stage":
            return cmd_analyze(args, out)
        if args.command == "sweep-m":
            return cmd_sweep(args, out, "M")
        if args.command == "sweep-ratio":
            return cmd_sweep(args, out, "ratio")
        return cmd_verify(args, out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
