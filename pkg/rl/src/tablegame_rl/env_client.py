"""Client for the table-game wire protocol.

Spawns `tablegame serve` as a subprocess and talks line-delimited JSON over
stdio; this package never imports the environment's implementation.
"""

import json
import subprocess
import sys

import numpy as np


class ProtocolError(RuntimeError):
    def __init__(self, code, message):
        super().__init__(f"{code}: {message}")
        self.code = code


class EnvClient:
    def __init__(self, env_config_path, command=None):
        if command is None:
            command = [sys.executable, "-m", "tablegame", "serve",
                       "--config", str(env_config_path)]
        self.proc = subprocess.Popen(
            command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL, text=True, bufsize=1,
        )
        self.illegal_moves = 0

    def request(self, obj):
        self.proc.stdin.write(json.dumps(obj) + "\n")
        self.proc.stdin.flush()
        line = self.proc.stdout.readline()
        if not line:
            raise RuntimeError("environment process closed the stream")
        resp = json.loads(line)
        if "error" in resp:
            if resp["error"]["code"] == "illegal_move":
                self.illegal_moves += 1
            raise ProtocolError(resp["error"]["code"],
                                resp["error"]["message"])
        return resp

    def config(self):
        return self.request({"cmd": "config"})["config"]

    def reset(self, seed, solvable_walk=None):
        req = {"cmd": "reset", "seed": int(seed)}
        if solvable_walk is not None:
            req["solvable_walk"] = int(solvable_walk)
        resp = self.request(req)
        state = np.array(resp["state"], dtype=np.int64)
        return state, resp.get("info", {})

    def step(self, action):
        resp = self.request({
            "cmd": "step",
            "action": np.asarray(action, dtype=np.int64).tolist(),
        })
        return (
            np.array(resp["state"], dtype=np.int64),
            float(resp["reward"]),
            bool(resp["done"]),
            resp.get("info", {}),
        )

    def project(self, target, d=2, c1=None, c2=None):
        req = {"cmd": "project", "d": int(d),
               "target": np.asarray(target, dtype=float).tolist()}
        if c1 is not None:
            req["c1"] = int(c1)
        if c2 is not None:
            req["c2"] = int(c2)
        resp = self.request(req)
        return np.array(resp["action"], dtype=np.int64)

    def close(self):
        if self.proc.poll() is None:
            try:
                self.request({"cmd": "close"})
            except Exception:
                pass
            self.proc.stdin.close()
            self.proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
