"""Line-delimited JSON environment protocol over stdio or a local socket.

One session per connection, strict request/response alternation.  Requests:

    {"cmd": "reset", "seed": 7}
    {"cmd": "reset", "seed": 7, "solvable_walk": 12}
    {"cmd": "step", "action": [[...]]}
    {"cmd": "legal", "limit": 100}
    {"cmd": "project", "target": [[...]], "d": 2, "c1": 1, "c2": 4}
    {"cmd": "config"}
    {"cmd": "close"}

Every response carries a server-assigned monotonically increasing "id" and
either the session payload (state / reward / done / info) or an "error"
object with a machine-readable code.  Malformed lines produce an error
response and the session continues; an illegal action leaves the state
unchanged.
"""

import json
import socketserver
import sys

from .errors import IllegalMoveError, ProjectionInfeasibleError, TableGameError
from .formats import FORMAT_VERSION
from .game import TableGameEnv, is_terminal
from .projection import ProjectionProblem, project_action

import numpy as np


class EnvSession:
    """Protocol state machine for one connection."""

    def __init__(self, cfg):
        self.env = TableGameEnv(cfg)
        self.next_id = 0
        self.closed = False

    def _base(self):
        self.next_id += 1
        return {"v": FORMAT_VERSION, "id": self.next_id}

    def _error(self, code, message):
        out = self._base()
        out["error"] = {"code": code, "message": message}
        return out

    def _state_payload(self, out, reward=None, done=None, info=None):
        state = self.env.state
        out["state"] = state.table.tolist()
        out["step_count"] = state.step_count
        if reward is not None:
            out["reward"] = reward
        if done is not None:
            out["done"] = done
        if info is not None:
            out["info"] = info
        return out

    def handle_line(self, line):
        """One request line to one response dict."""
        try:
            req = json.loads(line)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            return self._error("bad_json", str(exc))
        if not isinstance(req, dict) or "cmd" not in req:
            return self._error("bad_request", "expected an object with 'cmd'")
        cmd = req["cmd"]
        try:
            if cmd == "reset":
                seed = req.get("seed")
                walk = req.get("solvable_walk")
                self.env.reset(seed=seed, solvable_walk=walk)
                out = self._state_payload(self._base())
                out["info"] = {
                    "goal": [list(g) for g in self.env.cfg.goal],
                    "terminal": is_terminal(self.env.state, self.env.cfg.goal),
                }
                return out
            if cmd == "step":
                if self.env.state is None:
                    return self._error("no_episode", "reset before stepping")
                action = np.array(req.get("action"), dtype=np.int64)
                nxt, reward, done, info = self.env.step(action)
                return self._state_payload(
                    self._base(), reward=reward, done=done, info=info
                )
            if cmd == "legal":
                if self.env.state is None:
                    return self._error("no_episode", "reset before querying")
                limit = req.get("limit")
                acts = self.env.legal_actions(limit=limit)
                out = self._base()
                out["actions"] = [a.tolist() for a in acts]
                return out
            if cmd == "project":
                target = np.array(req.get("target"), dtype=float)
                problem = ProjectionProblem(
                    target=target,
                    state=self.env.state,
                    d=int(req.get("d", 2)),
                    c1=req.get("c1"),
                    c2=req.get("c2"),
                    respect_state=bool(req.get("respect_state", True))
                    and self.env.state is not None,
                )
                action = project_action(problem)
                out = self._base()
                out["action"] = action.tolist()
                return out
            if cmd == "config":
                out = self._base()
                out["config"] = {
                    "m": self.env.cfg.m,
                    "n": self.env.cfg.n,
                    "goal": [list(g) for g in self.env.cfg.goal],
                    "lb": self.env.cfg.lb,
                    "ub": self.env.cfg.ub,
                    "reward_variant": self.env.cfg.reward_variant,
                    "max_steps": self.env.cfg.max_steps,
                }
                return out
            if cmd == "close":
                self.closed = True
                out = self._base()
                out["closed"] = True
                return out
            return self._error("unknown_cmd", f"unknown command {cmd!r}")
        except IllegalMoveError as exc:
            return self._error("illegal_move", str(exc))
        except ProjectionInfeasibleError as exc:
            return self._error("projection_infeasible", str(exc))
        except TableGameError as exc:
            return self._error("invalid_input", str(exc))
        except (TypeError, ValueError, KeyError) as exc:
            return self._error("bad_request", str(exc))


def serve_stdio(cfg, stdin=None, stdout=None):
    """Serve one session over stdio until EOF or a close command.

    Reads raw bytes when possible so undecodable input produces an error
    response instead of killing the session."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    raw = getattr(stdin, "buffer", stdin)
    session = EnvSession(cfg)
    for line in raw:
        if isinstance(line, bytes):
            line = line.decode("utf-8", errors="replace")
        if not line.strip():
            continue
        resp = session.handle_line(line)
        stdout.write(json.dumps(resp, sort_keys=True) + "\n")
        stdout.flush()
        if session.closed:
            break


def serve_tcp(cfg, host="127.0.0.1", port=0):
    """Serve independent sessions on a local TCP socket (one per
    connection); returns the bound (server, (host, port))."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            session = EnvSession(cfg)
            for raw in self.rfile:
                line = raw.decode("utf-8", errors="replace")
                if not line.strip():
                    continue
                resp = session.handle_line(line)
                self.wfile.write(
                    (json.dumps(resp, sort_keys=True) + "\n").encode()
                )
                if session.closed:
                    break

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    server = Server((host, port), Handler)
    return server, server.server_address
