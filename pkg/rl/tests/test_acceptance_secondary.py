"""Secondary acceptance: the full 5x5 UB=20 training criterion.

Resource-dependent (a real run takes on the order of an hour on one
workstation), so this module checks the artifacts of a completed run rather
than training inline.  Point TABLEGAME_RL_RUN_DIR at a finished
`configs/gs5_ub20.cfg` run (metrics.csv + agent.pt) to assert the criterion:
success rate >= 0.9 and mean episode length strictly better than the
behavior-cloning baseline; otherwise the test is skipped.
"""

import csv
import os

import pytest

RUN_DIR = os.environ.get("TABLEGAME_RL_RUN_DIR")


@pytest.mark.skipif(not RUN_DIR, reason="no finished run directory supplied")
def test_td3_beats_floor_and_bc():
    with open(os.path.join(RUN_DIR, "metrics.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert rows, "empty metrics file"
    best = max(rows, key=lambda r: (float(r["success_rate"]),
                                    -float(r["mean_episode_length"])))
    success = float(best["success_rate"])
    mean_len = float(best["mean_episode_length"])
    bc_len = float(best["bc_mean_episode_length"])
    assert int(best["illegal_moves"]) == 0
    print(f"[{'PASS' if success >= 0.9 else 'FAIL'}] td3 success {success:.2f}"
          f" (floor 0.9); mean_len {mean_len:.1f} vs bc {bc_len:.1f}")
    assert success >= 0.9
    assert mean_len < bc_len


@pytest.mark.skipif(not RUN_DIR, reason="no finished run directory supplied")
def test_generalization_trend():
    path = os.path.join(RUN_DIR, "generalization.csv")
    if not os.path.exists(path):
        pytest.skip("no generalization sweep recorded")
    with open(path) as fh:
        rows = {int(r["ub"]): float(r["success_rate"])
                for r in csv.DictReader(fh)}
    assert rows.get(40, 0.0) >= 0.8
    # monotone-in-trend degradation toward the largest bound
    ubs = sorted(rows)
    assert rows[ubs[-1]] <= rows[ubs[0]]
