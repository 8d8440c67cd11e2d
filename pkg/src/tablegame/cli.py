"""Command line interface.

Subcommands: encode, solve, verify, play, project, demo, oracle, serve,
report.  See README.md for the file formats.
"""

import argparse
import json
import sys

import numpy as np

from . import formats
from .encoder import full_encode
from .errors import EncodingInfeasibleError, TableGameError
from .game import TableGameEnv
from .projection import ProjectionProblem, brute_force_project, project_action
from .reduction import ifp_solve, replay_path
from .server import serve_stdio, serve_tcp
from .solvers import bfs_solve, greedy_rollout


def _read(path):
    with open(path) as fh:
        return fh.read()


def cmd_encode(args):
    system = formats.load_system(_read(args.system))
    try:
        inst = full_encode(system, bound=args.bound)
    except EncodingInfeasibleError as exc:
        print(f"encoding-infeasible: {exc}", file=sys.stderr)
        return 2
    with open(args.out, "w") as fh:
        fh.write(formats.dump_instance(inst))
    print(f"wrote {args.out}: r={inst.r} h={inst.h} U={inst.big_u} "
          f"enabled={len(inst.enabled)}")
    return 0


def cmd_solve(args):
    if args.system:
        system = formats.load_system(_read(args.system))
        try:
            inst = full_encode(system, bound=args.bound)
        except EncodingInfeasibleError:
            print("NO (encoding infeasible)")
            return 1
    else:
        inst = formats.load_instance(_read(args.instance))
    result = ifp_solve(
        inst,
        fiber_cap=args.fiber_cap,
        step_cap=args.step_cap,
        want_path=args.certificate is not None,
    )
    if args.certificate:
        with open(args.certificate, "w") as fh:
            fh.write(formats.dump_certificate(result, inst))
    if result.status == "yes":
        print("YES", " ".join(str(int(x)) for x in result.solution))
        return 0
    print(result.status.upper().replace("_", "-"))
    return 1 if result.status == "no" else 3


def cmd_verify(args):
    doc = formats.load_certificate(_read(args.certificate))
    if doc["status"] != "yes":
        print(f"certificate status is {doc['status']}; nothing to replay")
        return 1
    final = replay_path(doc["initial"], doc.get("moves") or [])
    ok = (final == doc["witness"]).all()
    print("replay reaches the witness" if ok else "replay MISMATCH")
    if args.instance:
        from .encoder import decode_solution

        inst = formats.load_instance(_read(args.instance))
        y = decode_solution(inst, doc["witness"])
        same = list(map(int, y)) == list(doc.get("solution", []))
        print(f"decoded solution {' '.join(str(int(v)) for v in y)}"
              + ("" if same else " (differs from certificate!)"))
        ok = ok and same
    return 0 if ok else 1


def cmd_play(args):
    cfg = formats.load_config(_read(args.config))
    env = TableGameEnv(cfg)
    rng = np.random.default_rng(args.seed if args.seed is not None else cfg.seed)
    state = env.reset(seed=args.seed)
    print(json.dumps({"state": state.table.tolist()}))
    done = False
    while not done:
        if args.policy == "greedy":
            from .solvers import greedy_step

            action = greedy_step(env.state, cfg.goal)
            if action is None:
                print(json.dumps({"stuck": True}))
                return 1
        elif args.policy == "random":
            legal = env.legal_actions(limit=512)
            if not legal:
                print(json.dumps({"stuck": True}))
                return 1
            action = legal[int(rng.integers(len(legal)))]
        else:
            line = sys.stdin.readline()
            if not line:
                return 0
            action = np.array(json.loads(line), dtype=np.int64)
        try:
            state, reward, done, info = env.step(action)
        except TableGameError as exc:
            print(json.dumps({"error": str(exc)}))
            return 1
        print(json.dumps({
            "state": state.table.tolist(),
            "reward": reward,
            "done": done,
            "info": info,
        }, sort_keys=True))
    return 0


def cmd_project(args):
    state_table = formats.load_table(_read(args.state))
    target = np.array(
        [[float(x) for x in ln.split()] for ln in _read(args.target).splitlines()
         if ln.strip()]
    )
    from .game import GameState

    problem = ProjectionProblem(
        target=target,
        state=GameState.from_table(state_table),
        d=args.d,
        c1=args.c1,
        c2=args.c2,
        respect_state=not args.no_respect_state,
    )
    action = (brute_force_project if args.brute_force else project_action)(problem)
    print(formats.dump_table(action), end="")
    return 0


def cmd_demo(args):
    cfg = formats.load_config(_read(args.config))
    env = TableGameEnv(cfg)
    episodes = []
    successes = 0
    for ep in range(args.episodes):
        env.reset(seed=cfg.seed + ep,
                  solvable_walk=args.walk if args.walk else None)
        transitions, success = greedy_rollout(env)
        episodes.append(transitions)
        successes += success
    with open(args.out, "w") as fh:
        count = formats.export_demos(episodes, fh, cfg.reward_variant)
    print(f"wrote {count} transitions over {args.episodes} episodes "
          f"({successes} solved) to {args.out}")
    return 0


def cmd_oracle(args):
    cfg = formats.load_config(_read(args.config))
    env = TableGameEnv(cfg)
    solved = unreachable = exhausted = 0
    lengths = []
    for ep in range(args.episodes):
        state = env.reset(seed=cfg.seed + ep,
                          solvable_walk=args.walk if args.walk else None)
        res = bfs_solve(state, cfg.goal, node_cap=args.cap)
        if res.status == "solved":
            solved += 1
            lengths.append(len(res.path))
        elif res.status == "unreachable":
            unreachable += 1
        else:
            exhausted += 1
    mean_len = sum(lengths) / len(lengths) if lengths else float("nan")
    print(f"solved={solved} unreachable={unreachable} "
          f"budget_exhausted={exhausted} mean_path={mean_len:.2f}")
    return 0


def cmd_serve(args):
    cfg = formats.load_config(_read(args.config))
    if args.socket:
        host, _, port = args.socket.partition(":")
        server, addr = serve_tcp(cfg, host or "127.0.0.1", int(port or 0))
        print(f"listening on {addr[0]}:{addr[1]}", flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        return 0
    serve_stdio(cfg)
    return 0


def cmd_report(args):
    from .report import render_demo_report, render_metrics_report

    if args.demos:
        written = render_demo_report(args.demos, args.out_dir)
    else:
        written = render_metrics_report(args.metrics, args.out_dir)
    for path in written:
        print(path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tablegame",
        description="Integer feasibility as a game on tables with fixed margins",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode a linear system as a 3-way instance")
    p.add_argument("--system", required=True)
    p.add_argument("--bound", type=int, default=None,
                   help="override the computed vertex bound U")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("solve", help="decide integer feasibility")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance")
    src.add_argument("--system")
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--fiber-cap", type=int, default=10 ** 6)
    p.add_argument("--step-cap", type=int, default=10 ** 6)
    p.add_argument("--certificate", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="replay a solve certificate")
    p.add_argument("--certificate", required=True)
    p.add_argument("--instance", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("play", help="play episodes of the table game")
    p.add_argument("--config", required=True)
    p.add_argument("--policy", choices=("greedy", "random", "stdin"),
                   default="greedy")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("project", help="project a continuous action")
    p.add_argument("--state", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--d", type=int, choices=(1, 2), default=2)
    p.add_argument("--c1", type=int, default=None)
    p.add_argument("--c2", type=int, default=None)
    p.add_argument("--no-respect-state", action="store_true")
    p.add_argument("--brute-force", action="store_true")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("demo", help="export greedy demonstrations")
    p.add_argument("--config", required=True)
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--walk", type=int, default=0,
                   help="reverse-walk length for guaranteed-solvable starts")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("oracle", help="exact BFS over game instances")
    p.add_argument("--config", required=True)
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--walk", type=int, default=0)
    p.add_argument("--cap", type=int, default=10 ** 6)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("serve", help="serve the environment protocol")
    p.add_argument("--config", required=True)
    p.add_argument("--socket", default=None,
                   help="HOST:PORT for a local TCP socket instead of stdio")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="figures and summary from demos/metrics")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--demos")
    src.add_argument("--metrics")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TableGameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
