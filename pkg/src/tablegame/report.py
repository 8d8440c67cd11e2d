"""Reporting: render figures and a delimited summary from demonstration
logs or training-metric CSVs."""

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .formats import read_demos


def summarize_episodes(episodes):
    """Per-episode length, return, and success rows."""
    rows = []
    for idx, transitions in enumerate(episodes):
        length = len(transitions)
        ret = float(sum(tr.reward for tr in transitions))
        success = bool(
            transitions and transitions[-1].done
            and transitions[-1].info.get("termination") == "goal"
        )
        rows.append({"episode": idx, "length": length, "return": ret,
                     "success": int(success)})
    return rows


def write_summary_csv(rows, path):
    fields = ["episode", "length", "return", "success"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def render_demo_report(demos_path, out_dir):
    """Summary CSV plus figures for a demonstration file; returns the list
    of files written."""
    os.makedirs(out_dir, exist_ok=True)
    with open(demos_path) as fh:
        episodes = read_demos(fh)
    rows = summarize_episodes(episodes)
    written = []

    csv_path = os.path.join(out_dir, "summary.csv")
    write_summary_csv(rows, csv_path)
    written.append(csv_path)

    lengths = [r["length"] for r in rows]
    returns = [r["return"] for r in rows]
    success = [r["success"] for r in rows]

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(lengths, bins=max(5, min(40, len(set(lengths)))), color="#4878d0")
    ax.set_xlabel("episode length")
    ax.set_ylabel("episodes")
    rate = 100.0 * np.mean(success) if success else 0.0
    ax.set_title(f"episode lengths ({len(rows)} episodes, {rate:.0f}% solved)")
    fig.tight_layout()
    lengths_png = os.path.join(out_dir, "episode_lengths.png")
    fig.savefig(lengths_png, dpi=120)
    plt.close(fig)
    written.append(lengths_png)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(returns, lw=1.0, color="#d65f5f")
    ax.set_xlabel("episode")
    ax.set_ylabel("undiscounted return")
    ax.set_title("episode returns")
    fig.tight_layout()
    returns_png = os.path.join(out_dir, "returns.png")
    fig.savefig(returns_png, dpi=120)
    plt.close(fig)
    written.append(returns_png)
    return written


def render_metrics_report(metrics_path, out_dir):
    """Learning curves from a metrics CSV (columns: env_steps plus any of
    mean_neg_episode_length / success_rate / ...); returns files written."""
    os.makedirs(out_dir, exist_ok=True)
    with open(metrics_path) as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError("metrics file has no rows")
    written = []
    x_key = "env_steps" if "env_steps" in rows[0] else list(rows[0])[0]
    xs = [float(r[x_key]) for r in rows]
    series = {}
    for key in rows[0]:
        if key in (x_key, "run"):
            continue
        try:
            series[key] = [float(r[key]) for r in rows]
        except (TypeError, ValueError):
            continue
    for key, ys in series.items():
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(xs, ys, marker="o", ms=3, lw=1.2)
        ax.set_xlabel(x_key)
        ax.set_ylabel(key)
        ax.set_title(key.replace("_", " "))
        fig.tight_layout()
        png = os.path.join(out_dir, f"{key}.png")
        fig.savefig(png, dpi=120)
        plt.close(fig)
        written.append(png)

    summary = os.path.join(out_dir, "metrics_summary.csv")
    with open(summary, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "first", "last", "best"])
        for key, ys in series.items():
            best = max(ys) if "success" in key or "rate" in key else min(ys)
            writer.writerow([key, ys[0], ys[-1], best])
    written.append(summary)
    return written
