"""Generalization sweep: evaluate a trained agent on environments whose
margin bound exceeds the one it was trained with."""

import argparse
import csv
import os
import sys
import tempfile

from .env_client import EnvClient
from .evaluate import evaluate
from .td3 import TD3Agent


def _override_ub(env_config_path, ub):
    lines = []
    with open(env_config_path) as fh:
        for ln in fh:
            key = ln.split("=", 1)[0].strip()
            if key == "ub":
                ln = f"ub={ub}\n"
            lines.append(ln)
    fd, path = tempfile.mkstemp(suffix=".cfg", text=True)
    with os.fdopen(fd, "w") as fh:
        fh.writelines(lines)
    return path


def sweep(agent_path, env_config, ubs, episodes=100, out_csv=None,
          project_kwargs=None, log=print):
    agent = TD3Agent.load(agent_path)
    rows = []
    for ub in ubs:
        cfg_path = _override_ub(env_config, ub)
        try:
            with EnvClient(cfg_path) as client:
                metrics = evaluate(client, agent.act, episodes=episodes,
                                   project_kwargs=project_kwargs)
        finally:
            os.unlink(cfg_path)
        row = {"ub": ub, **metrics}
        rows.append(row)
        log(f"ub={ub}: success={metrics['success_rate']:.2f} "
            f"mean_len={metrics['mean_episode_length']:.1f}")
    if out_csv:
        with open(out_csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(prog="tablegame-rl-generalize")
    parser.add_argument("--agent", required=True)
    parser.add_argument("--env-config", required=True)
    parser.add_argument("--ubs", default="20,40,60,80,100,140")
    parser.add_argument("--episodes", type=int, default=100)
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)
    ubs = [int(x) for x in args.ubs.split(",") if x]
    sweep(args.agent, args.env_config, ubs, episodes=args.episodes,
          out_csv=args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
