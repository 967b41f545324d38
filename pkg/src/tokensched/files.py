"""Text formats for graphs and schedules.

Graph file: optional `#` comment lines, a header line `n m`, then m lines
`u v` with 0 <= u < v < n.  Cost parameters never live in the graph file.

Schedule file::

    TCSCHED 1
    length L
    r v SEND u [token=k]
    r v COMPUTE

Rounds are 1-indexed.  Unknown trailing fields are rejected.
"""

from __future__ import annotations

from .core import COMPUTE, SEND, Action, Graph, MalformedInputError, Schedule


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def parse_graph(text: str) -> Graph:
    lines = list(_data_lines(text))
    if not lines:
        raise MalformedInputError("graph file has no data lines")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise MalformedInputError(f"line {lineno}: expected 'n m', got {header!r}")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise MalformedInputError(f"line {lineno}: non-integer header {header!r}") from exc
    if len(lines) - 1 != m:
        raise MalformedInputError(f"header declares {m} edges, file has {len(lines) - 1}")
    edges = []
    for lineno, line in lines[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise MalformedInputError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise MalformedInputError(f"line {lineno}: non-integer edge {line!r}") from exc
        if not (0 <= u < v < n):
            raise MalformedInputError(f"line {lineno}: edge must satisfy 0 <= u < v < n")
        edges.append((u, v))
    return Graph(n, edges)


def format_graph(g: Graph) -> str:
    out = [f"{g.n} {len(g.edges)}"]
    out.extend(f"{u} {v}" for u, v in sorted(g.edges))
    return "\n".join(out) + "\n"


def parse_schedule(text: str) -> Schedule:
    lines = list(_data_lines(text))
    if len(lines) < 2:
        raise MalformedInputError("schedule file needs a TCSCHED header and a length line")
    lineno, magic = lines[0]
    if magic.split() != ["TCSCHED", "1"]:
        raise MalformedInputError(f"line {lineno}: expected 'TCSCHED 1', got {magic!r}")
    lineno, lenline = lines[1]
    parts = lenline.split()
    if len(parts) != 2 or parts[0] != "length":
        raise MalformedInputError(f"line {lineno}: expected 'length L', got {lenline!r}")
    try:
        length = int(parts[1])
    except ValueError as exc:
        raise MalformedInputError(f"line {lineno}: non-integer length") from exc
    actions = []
    for lineno, line in lines[2:]:
        parts = line.split()
        if len(parts) < 3:
            raise MalformedInputError(f"line {lineno}: incomplete action {line!r}")
        try:
            r, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise MalformedInputError(f"line {lineno}: non-integer round or node") from exc
        kind = parts[2]
        if kind == COMPUTE:
            if len(parts) != 3:
                raise MalformedInputError(f"line {lineno}: trailing fields after COMPUTE")
            actions.append(Action(r, v, COMPUTE))
        elif kind == SEND:
            if len(parts) not in (4, 5):
                raise MalformedInputError(f"line {lineno}: SEND takes a target and at most token=k")
            try:
                target = int(parts[3])
            except ValueError as exc:
                raise MalformedInputError(f"line {lineno}: non-integer send target") from exc
            token = None
            if len(parts) == 5:
                if not parts[4].startswith("token="):
                    raise MalformedInputError(f"line {lineno}: unknown field {parts[4]!r}")
                try:
                    token = int(parts[4][len("token="):])
                except ValueError as exc:
                    raise MalformedInputError(f"line {lineno}: non-integer token id") from exc
            actions.append(Action(r, v, SEND, target, token))
        else:
            raise MalformedInputError(f"line {lineno}: unknown action kind {kind!r}")
    return Schedule(length, tuple(actions))


def format_schedule(s: Schedule) -> str:
    out = ["TCSCHED 1", f"length {s.length}"]
    for a in s.actions:
        if a.kind == COMPUTE:
            out.append(f"{a.start_round} {a.node} COMPUTE")
        elif a.token is None:
            out.append(f"{a.start_round} {a.node} SEND {a.target}")
        else:
            out.append(f"{a.start_round} {a.node} SEND {a.target} token={a.token}")
    return "\n".join(out) + "\n"


def read_graph(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


def write_graph(path, g: Graph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_graph(g))


def read_schedule(path) -> Schedule:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_schedule(fh.read())


def write_schedule(path, s: Schedule) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_schedule(s))
