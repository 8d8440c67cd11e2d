"""Text file formats: tables, margins, systems, encoded instances, game
configs, demonstration logs, and solve certificates.

All table-like data is written row-major with 0-based indices.  Formats are
versioned where they are line-delimited JSON (a "v" field); plain text
formats carry a header line instead.
"""

import json

import numpy as np

from .encoder import EncodedInstance, RationalLinearSystem
from .errors import InvalidInputError
from .game import GameConfig, Transition

FORMAT_VERSION = 1


def _ints(tokens, context):
    try:
        return [int(x) for x in tokens]
    except ValueError:
        raise InvalidInputError(f"non-integer token in {context}") from None


# ---------------------------------------------------------------------------
# tables and margins
# ---------------------------------------------------------------------------

def dump_table(table):
    """First line: the shape; then the entries in row-major order."""
    t = np.asarray(table)
    if t.ndim not in (2, 3):
        raise InvalidInputError("only 2- and 3-way tables are serialized")
    head = " ".join(str(d) for d in t.shape)
    body = " ".join(str(int(x)) for x in t.ravel())
    return f"{head}\n{body}\n"

def load_table(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidInputError("empty table file")
    dims = _ints(lines[0].split(), "table header")
    if len(dims) not in (2, 3):
        raise InvalidInputError("table header must list 2 or 3 dimensions")
    flat = _ints((x for ln in lines[1:] for x in ln.split()), "table body")
    if len(flat) != int(np.prod(dims)):
        raise InvalidInputError("table body does not match its header")
    return np.array(flat, dtype=np.int64).reshape(dims)


def dump_margins(vectors):
    """One line per margin vector."""
    return "".join(" ".join(str(int(x)) for x in v) + "\n" for v in vectors)

def load_margins(text):
    vecs = []
    for ln in text.splitlines():
        if ln.strip():
            vecs.append(np.array(_ints(ln.split(), "margins"), dtype=np.int64))
    if len(vecs) not in (2, 3):
        raise InvalidInputError("expected 2 or 3 margin lines")
    return vecs


# ---------------------------------------------------------------------------
# linear systems and encoded instances
# ---------------------------------------------------------------------------

def dump_system(sys):
    lines = [f"{sys.m} {sys.n}"]
    for i in range(sys.m):
        lines.append(" ".join(str(int(x)) for x in sys.a[i]))
    lines.append(" ".join(str(int(x)) for x in sys.b))
    return "\n".join(lines) + "\n"

def load_system(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = _ints(lines[0].split(), "system header")
    if len(head) != 2:
        raise InvalidInputError("system header must be: m n")
    m, n = head
    if len(lines) != m + 2:
        raise InvalidInputError("system file must have m rows plus b")
    a = [_ints(lines[1 + i].split(), "system row") for i in range(m)]
    b = _ints(lines[m + 1].split(), "system rhs")
    if any(len(row) != n for row in a) or len(b) != m:
        raise InvalidInputError("system dimensions disagree with the header")
    return RationalLinearSystem(np.array(a), np.array(b))


def dump_instance(inst):
    """Header `r h U`, margin lines u/v/w, one line per enabled triple, one
    line per sigma entry, plus box and embedding lines for decoding."""
    lines = [f"{inst.r} {inst.h} {inst.big_u}"]
    lines.append(" ".join(str(int(x)) for x in inst.u))
    lines.append(" ".join(str(int(x)) for x in inst.v))
    lines.append(" ".join(str(int(x)) for x in inst.w))
    for (i, j, k) in sorted(inst.enabled):
        lines.append(f"e {i} {j} {k}")
    for var, cell in enumerate(inst.sigma):
        if cell is None:
            lines.append(f"s {var} -")
        else:
            lines.append(f"s {var} {cell[0]} {cell[1]} {cell[2]}")
    for var, (start, size) in enumerate(inst.boxes):
        lines.append(f"b {var} {start} {size}")
    for orig, enc in enumerate(inst.embedding):
        lines.append(f"m {orig} {enc}")
    sysline = dump_system(inst.system).replace("\n", ";")
    origline = dump_system(inst.orig_system).replace("\n", ";")
    lines.append(f"sys {sysline}")
    lines.append(f"orig {origline}")
    return "\n".join(lines) + "\n"

def load_instance(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    r, h, big_u = _ints(lines[0].split(), "instance header")
    u = np.array(_ints(lines[1].split(), "u margins"), dtype=np.int64)
    v = np.array(_ints(lines[2].split(), "v margins"), dtype=np.int64)
    w = np.array(_ints(lines[3].split(), "w margins"), dtype=np.int64)
    enabled = set()
    sigma = {}
    boxes = {}
    embedding = {}
    system = orig = None
    for ln in lines[4:]:
        parts = ln.split(maxsplit=1)
        tag = parts[0]
        rest = parts[1] if len(parts) > 1 else ""
        if tag == "e":
            i, j, k = _ints(rest.split(), "enabled triple")
            enabled.add((i, j, k))
        elif tag == "s":
            fields = rest.split()
            var = int(fields[0])
            sigma[var] = None if fields[1] == "-" else tuple(
                int(x) for x in fields[1:4]
            )
        elif tag == "b":
            var, start, size = _ints(rest.split(), "box line")
            boxes[var] = (start, size)
        elif tag == "m":
            orig_var, enc = _ints(rest.split(), "embedding line")
            embedding[orig_var] = enc
        elif tag == "sys":
            system = load_system(rest.replace(";", "\n"))
        elif tag == "orig":
            orig = load_system(rest.replace(";", "\n"))
        else:
            raise InvalidInputError(f"unknown instance line tag {tag!r}")
    nvars = len(sigma)
    if system is None:
        raise InvalidInputError("instance file lacks its system line")
    return EncodedInstance(
        r=r,
        h=h,
        big_u=big_u,
        u=u,
        v=v,
        w=w,
        enabled=frozenset(enabled),
        sigma=tuple(sigma[i] for i in range(nvars)),
        boxes=tuple(boxes[i] for i in range(len(boxes))),
        system=system,
        embedding=tuple(embedding[i] for i in range(len(embedding))),
        orig_system=orig if orig is not None else system,
    )


# ---------------------------------------------------------------------------
# game configs
# ---------------------------------------------------------------------------

def dump_config(cfg):
    goal = ";".join(f"{i},{j}" for (i, j) in cfg.goal)
    return (
        f"m={cfg.m}\nn={cfg.n}\ngoal={goal}\nlb={cfg.lb}\nub={cfg.ub}\n"
        f"reward_variant={cfg.reward_variant}\nmax_steps={cfg.max_steps}\n"
        f"seed={cfg.seed}\n"
    )

def load_config(text):
    kv = {}
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if "=" not in ln:
            raise InvalidInputError(f"config line {ln!r} is not key=value")
        key, val = ln.split("=", 1)
        kv[key.strip()] = val.strip()
    try:
        goal = tuple(
            tuple(int(x) for x in pair.split(","))
            for pair in kv["goal"].split(";")
            if pair
        )
        return GameConfig(
            m=int(kv["m"]),
            n=int(kv["n"]),
            goal=goal,
            lb=int(kv.get("lb", 0)),
            ub=int(kv.get("ub", 20)),
            reward_variant=kv.get("reward_variant", "unit_penalty"),
            max_steps=int(kv.get("max_steps", 400)),
            seed=int(kv.get("seed", 0)),
        )
    except KeyError as missing:
        raise InvalidInputError(f"config is missing {missing}") from None
    except ValueError as bad:
        raise InvalidInputError(f"bad config value: {bad}") from None


# ---------------------------------------------------------------------------
# demonstrations (line-delimited JSON) and certificates
# ---------------------------------------------------------------------------

def transition_record(tr, episode, step_index, reward_variant):
    return {
        "v": FORMAT_VERSION,
        "episode": int(episode),
        "step": int(step_index),
        "state": np.asarray(tr.state).tolist(),
        "action": np.asarray(tr.action).tolist(),
        "next_state": np.asarray(tr.next_state).tolist(),
        "reward": float(tr.reward),
        "done": bool(tr.done),
        "reward_variant": reward_variant,
        "info": dict(tr.info),
    }


def export_demos(episodes, fh, reward_variant="unit_penalty"):
    """Write one Transition per line; returns the number of lines."""
    count = 0
    for episode, transitions in enumerate(episodes):
        for idx, tr in enumerate(transitions):
            rec = transition_record(tr, episode, idx, reward_variant)
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            count += 1
    return count


def read_demos(fh):
    """Parse a demonstration file back into per-episode Transition lists."""
    episodes = {}
    for ln in fh:
        if not ln.strip():
            continue
        rec = json.loads(ln)
        tr = Transition(
            state=np.array(rec["state"], dtype=np.int64),
            action=np.array(rec["action"], dtype=np.int64),
            next_state=np.array(rec["next_state"], dtype=np.int64),
            reward=rec["reward"],
            done=rec["done"],
            info=rec.get("info", {}),
        )
        episodes.setdefault(rec["episode"], []).append((rec["step"], tr))
    out = []
    for episode in sorted(episodes):
        steps = episodes[episode]
        steps.sort(key=lambda pair: pair[0])
        out.append([tr for _, tr in steps])
    return out


def dump_certificate(result, inst=None):
    """The witness plus the move path, replayable without the solver."""
    doc = {"v": FORMAT_VERSION, "status": result.status}
    if result.initial is not None:
        doc["initial"] = result.initial.tolist()
    if result.witness is not None:
        doc["witness"] = result.witness.tolist()
    if result.solution is not None:
        doc["solution"] = [int(x) for x in result.solution]
    if result.moves is not None:
        doc["moves"] = [
            [[list(cell), int(d)] for (cell, d) in mv] for mv in result.moves
        ]
    doc["stats"] = {k: int(v) if isinstance(v, (int, np.integer)) else v
                    for k, v in result.stats.items()}
    return json.dumps(doc, sort_keys=True) + "\n"


def load_certificate(text):
    doc = json.loads(text)
    if doc.get("moves") is not None:
        doc["moves"] = [
            tuple((tuple(cell), int(d)) for cell, d in mv) for mv in doc["moves"]
        ]
    for key in ("initial", "witness"):
        if doc.get(key) is not None:
            doc[key] = np.array(doc[key], dtype=np.int64)
    return doc
