"""Training entry point: TD3 with demonstrations against a spawned
environment, plus the behavior-cloning baseline, with CSV metrics and
checkpoints per evaluation epoch."""

import argparse
import csv
import os
import subprocess
import sys

import numpy as np

from .bc import train_bc
from .buffers import DemoBuffer, ReplayBuffer
from .env_client import EnvClient, ProtocolError
from .evaluate import evaluate
from .td3 import AgentConfig, TD3Agent


def load_run_config(path):
    kv = {}
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            key, val = ln.split("=", 1)
            kv[key.strip()] = val.strip()
    base = os.path.dirname(os.path.abspath(path))
    for key in ("env_config", "demos"):
        if key in kv and not os.path.isabs(kv[key]):
            kv[key] = os.path.join(base, kv[key])
    return kv


def ensure_demos(kv, out_dir):
    """Collect demonstrations through the environment CLI when the run
    config does not point at an existing file."""
    path = kv.get("demos")
    if path and os.path.exists(path):
        return path
    path = path or os.path.join(out_dir, "demos.jsonl")
    count = int(kv.get("demo_count", 100))
    cmd = [sys.executable, "-m", "tablegame", "demo",
           "--config", kv["env_config"], "--episodes", str(count),
           "--out", path]
    walk = kv.get("demo_walk")
    if walk:
        cmd += ["--walk", walk]
    subprocess.run(cmd, check=True, capture_output=True)
    return path


def agent_config(kv):
    fields = {}
    for key in ("gamma", "lr", "noise_std", "demo_fraction", "tau",
                "demo_weight"):
        if key in kv:
            fields[key] = float(kv[key])
    for key in ("batch_size", "demo_count", "policy_delay", "channels",
                "blocks"):
        if key in kv:
            fields[key] = int(kv[key])
    if "q_filter" in kv:
        fields["q_filter"] = kv["q_filter"]
    return AgentConfig(**fields)


def project_kwargs(kv):
    out = {}
    if kv.get("project_c1"):
        out["c1"] = int(kv["project_c1"])
    if kv.get("project_c2"):
        out["c2"] = int(kv["project_c2"])
    return out


def train(kv, log=print):
    out_dir = kv.get("out_dir", "runs/latest")
    os.makedirs(out_dir, exist_ok=True)
    seed = int(kv.get("seed", 0))
    total_steps = int(kv.get("total_steps", 20000))
    warmup = int(kv.get("warmup_steps", 500))
    eval_interval = int(kv.get("eval_interval", 2000))
    eval_episodes = int(kv.get("eval_episodes", 100))
    updates_per_step = float(kv.get("updates_per_step", 1.0))
    cfg = agent_config(kv)
    pk = project_kwargs(kv)

    demos_path = ensure_demos(kv, out_dir)
    demo_buf = DemoBuffer.from_file(demos_path, seed=seed)

    with EnvClient(kv["env_config"]) as client:
        env_cfg = client.config()
        m, n = env_cfg["m"], env_cfg["n"]
        max_steps = env_cfg["max_steps"]
        agent = TD3Agent(m, n, cfg, seed=seed)
        replay = ReplayBuffer(int(kv.get("replay_capacity", 200000)), m, n,
                              seed=seed)

        # behavior-cloning baseline on the same demonstrations
        bc_steps = int(kv.get("bc_steps", 3000))
        bc_model, bc_loss = train_bc(demo_buf, m, n, steps=bc_steps,
                                     batch_size=cfg.batch_size, lr=cfg.lr,
                                     seed=seed,
                                     blocks=cfg.blocks, channels=cfg.channels)
        bc_metrics = evaluate(client, bc_model.act, episodes=eval_episodes,
                              max_steps=max_steps, project_kwargs=pk)
        log(f"bc: loss={bc_loss:.4f} success={bc_metrics['success_rate']:.2f} "
            f"mean_len={bc_metrics['mean_episode_length']:.1f}")
        bc_model.save(os.path.join(out_dir, "bc.pt"))

        metrics_path = os.path.join(out_dir, "metrics.csv")
        fields = ["env_steps", "success_rate", "mean_episode_length",
                  "mean_neg_episode_length", "mean_return", "critic_loss",
                  "bc_success_rate", "bc_mean_episode_length",
                  "illegal_moves"]
        writer_fh = open(metrics_path, "w", newline="")
        writer = csv.DictWriter(writer_fh, fieldnames=fields)
        writer.writeheader()

        rng = np.random.default_rng(seed)
        env_steps = 0
        episode_seed = seed * 1_000_003
        state, info = client.reset(episode_seed)
        pending_updates = 0.0
        last_critic = float("nan")
        best_success = -1.0
        while env_steps < total_steps:
            if info.get("terminal"):
                episode_seed += 1
                state, info = client.reset(episode_seed)
                continue
            if env_steps < warmup:
                target = rng.uniform(-1, 1, size=(m, n))
            else:
                target = agent.explore(state)
            try:
                action = client.project(target, **pk)
            except ProtocolError as exc:
                # a dead state (no legal action at all) ends the episode
                if exc.code != "projection_infeasible":
                    raise
                episode_seed += 1
                state, info = client.reset(episode_seed)
                continue
            next_state, reward, done, step_info = client.step(action)
            terminal = done and step_info.get("termination") == "goal"
            replay.push(state, target, reward, next_state, terminal)
            state = next_state
            env_steps += 1
            if done:
                episode_seed += 1
                state, info = client.reset(episode_seed)
            else:
                info = {}

            if env_steps >= warmup and replay.size >= cfg.batch_size:
                pending_updates += updates_per_step
                while pending_updates >= 1.0:
                    stats = agent.update(replay, demo_buf)
                    last_critic = stats["critic_loss"]
                    pending_updates -= 1.0

            if env_steps % eval_interval == 0 or env_steps == total_steps:
                metrics = evaluate(client, agent.act, episodes=eval_episodes,
                                   max_steps=max_steps, project_kwargs=pk)
                row = {
                    "env_steps": env_steps,
                    "critic_loss": last_critic,
                    "bc_success_rate": bc_metrics["success_rate"],
                    "bc_mean_episode_length":
                        bc_metrics["mean_episode_length"],
                    "illegal_moves": client.illegal_moves,
                    **metrics,
                }
                writer.writerow(row)
                writer_fh.flush()
                log(f"steps={env_steps} success={metrics['success_rate']:.2f} "
                    f"mean_len={metrics['mean_episode_length']:.1f} "
                    f"critic_loss={last_critic:.4f}")
                agent.save(os.path.join(out_dir, "agent.pt"))
                if metrics["success_rate"] >= best_success:
                    best_success = metrics["success_rate"]
                    agent.save(os.path.join(out_dir, "agent_best.pt"))
        writer_fh.close()
        agent.save(os.path.join(out_dir, "agent.pt"))
        assert client.illegal_moves == 0, "a projected action was rejected"
        return {
            "agent": agent,
            "bc_metrics": bc_metrics,
            "final_metrics": metrics,
            "metrics_path": metrics_path,
            "out_dir": out_dir,
        }


def main(argv=None):
    parser = argparse.ArgumentParser(prog="tablegame-rl-train")
    parser.add_argument("--config", required=True,
                        help="key=value run config (see rl/configs)")
    args = parser.parse_args(argv)
    kv = load_run_config(args.config)
    result = train(kv)
    final = result["final_metrics"]
    print(f"final: success={final['success_rate']:.2f} "
          f"mean_len={final['mean_episode_length']:.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
