"""Command line entry points: run campaigns, summarize logs, serve live sessions."""

import argparse
import os
import sys

from . import harness


def _add_common_run_flags(p):
    p.add_argument("--env", choices=("pendulum", "mountaincar"), default=None,
                   help="environment id")
    p.add_argument("--algo", choices=("ppmp", "pmp", "ddpg"), default=None,
                   help="learner variant")
    p.add_argument("--error-rate", dest="error_rate", default=None,
                   help="oracle feedback sign-flip probability")
    p.add_argument("--np", dest="n_pred", default=None,
                   help="steps before the predictor output is used")
    p.add_argument("--nq", dest="n_qfilter", default=None,
                   help="steps before the Q-filter picks between candidates")
    p.add_argument("--config", default=None, help="flat key=value config file")


def _build_config(args, extra: dict):
    overrides = {
        "env": args.env, "algo": args.algo, "error_rate": args.error_rate,
        "n_pred": args.n_pred, "n_qfilter": args.n_qfilter,
    }
    overrides.update(extra)
    return harness.load_config(path=args.config, overrides=overrides)


def cmd_run(args) -> int:
    cfg = _build_config(args, {
        "seeds": args.seeds, "episodes": args.episodes, "out_dir": args.out,
    })
    print(f"running {cfg.algo} on {cfg.env}: seeds {list(cfg.seeds)}, "
          f"{cfg.episodes} episodes, feedback {cfg.feedback} "
          f"(config {harness.config_hash(cfg)})")
    paths = harness.run_experiment(cfg)
    if not paths:
        print("all runs failed", file=sys.stderr)
        return 1
    print(f"wrote {len(paths)} run logs to {cfg.out_dir}")
    return 0


def cmd_summarize(args) -> int:
    paths = list(args.logs)
    if not paths:
        print("no run logs given", file=sys.stderr)
        return 1
    summary = harness.summarize(paths, window=args.window)
    out = args.out or "summary.csv"
    harness.write_summary_csv(summary, out)
    last = summary["eval_mean"][-1]
    print(f"summarized {summary['n_runs']} runs over {len(summary['episode'])} episodes "
          f"(window {args.window}); final smoothed eval {last:.2f}")
    print(f"wrote {out}")
    return 0


def cmd_serve(args) -> int:
    from .agent import AgentConfig
    from .gateway import LiveSession, serve

    cfg = _build_config(args, {})
    session = LiveSession(
        env_name=cfg.env, algo=cfg.algo, seed=args.seed, rate=args.rate,
        episodes=args.episodes, use_oracle=args.oracle, agent_cfg=cfg.agent,
    )
    ui_dir = args.ui_dir
    if ui_dir is not None and not os.path.isdir(ui_dir):
        print(f"ui dir {ui_dir!r} does not exist", file=sys.stderr)
        return 1
    print(f"session {session.session}: {cfg.algo} on {cfg.env}, "
          f"{args.rate} steps/s; ws://{args.host}:{args.port}/ws")
    serve(session, host=args.host, port=args.port, ui_dir=ui_dir)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ppmp",
        description="corrective-feedback actor-critic: train, summarize, or serve live")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="train one configuration over several seeds")
    _add_common_run_flags(p_run)
    p_run.add_argument("--seeds", default=None, help="comma-separated seed list")
    p_run.add_argument("--episodes", default=None, help="episodes per seed")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.set_defaults(fn=cmd_run)

    p_sum = sub.add_parser("summarize", help="cross-seed summary of run CSVs")
    p_sum.add_argument("logs", nargs="*", help="run CSV paths")
    p_sum.add_argument("--window", type=int, default=5, help="moving-average window")
    p_sum.add_argument("--out", default=None, help="summary CSV path")
    p_sum.set_defaults(fn=cmd_summarize)

    p_srv = sub.add_parser("serve", help="live session over WebSocket")
    _add_common_run_flags(p_srv)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8800)
    p_srv.add_argument("--rate", type=float, default=20.0, help="env steps per second")
    p_srv.add_argument("--seed", type=int, default=0)
    p_srv.add_argument("--episodes", type=int, default=0, help="0 = run until stopped")
    p_srv.add_argument("--oracle", action="store_true",
                       help="synthetic feedback fills in when no client feedback arrives")
    p_srv.add_argument("--ui-dir", dest="ui_dir", default=None,
                       help="directory of static UI files to serve at /")
    p_srv.set_defaults(fn=cmd_serve)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
