"""Token network model: graphs, cost parameters, schedules, and a round-accurate
simulator/validator.

Rounds are 1-indexed.  An action started at round r occupies rounds
[r, r + duration - 1] and its effect (token delivered, tokens merged) becomes
visible at the start of round r + duration.  A token that is in flight still
counts at the sender until delivery.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

SEND = "SEND"
COMPUTE = "COMPUTE"


class MalformedInputError(ValueError):
    """Structurally bad input: unknown node ids, non-neighbor send targets,
    unparseable files.  Distinct from a well-formed but invalid schedule."""


class DisconnectedGraphError(ValueError):
    """The operation needs a connected graph; aggregation is unsolvable otherwise."""


class InvalidScheduleError(ValueError):
    """A well-formed schedule broke a validity rule during replay."""

    def __init__(self, round_: int, node: int, rule: str, message: str):
        super().__init__(f"round {round_}, node {node}, rule ({rule}): {message}")
        self.round = round_
        self.node = node
        self.rule = rule
        self.message = message


class Graph:
    """Undirected simple graph on nodes 0..n-1."""

    def __init__(self, n: int, edges):
        if n < 1:
            raise MalformedInputError(f"node count must be >= 1, got {n}")
        canon = set()
        for u, v in edges:
            if u == v:
                raise MalformedInputError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise MalformedInputError(f"edge ({u}, {v}) out of range for n={n}")
            canon.add((min(u, v), max(u, v)))
        self.n = n
        self.edges = frozenset(canon)
        adj = [set() for _ in range(n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        self.adj = tuple(frozenset(s) for s in adj)

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={len(self.edges)})"

    def neighbors(self, v: int) -> frozenset:
        return self.adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def is_complete(self) -> bool:
        return len(self.edges) == self.n * (self.n - 1) // 2

    def bfs_distances(self, source: int) -> list:
        """Hop distances from source; -1 for unreachable nodes."""
        dist = [-1] * self.n
        dist[source] = 0
        q = deque([source])
        while q:
            u = q.popleft()
            for w in self.adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return dist

    def is_connected(self) -> bool:
        return all(d >= 0 for d in self.bfs_distances(0))

    def _eccentricities(self) -> list:
        eccs = []
        for v in range(self.n):
            dist = self.bfs_distances(v)
            if any(d < 0 for d in dist):
                raise DisconnectedGraphError(
                    "graph is disconnected; aggregation to one token is unsolvable"
                )
            eccs.append(max(dist))
        return eccs

    def radius(self) -> int:
        return min(self._eccentricities())

    def diameter(self) -> int:
        return max(self._eccentricities())


@dataclass(frozen=True)
class NetworkParams:
    """Round costs: t_c per merge of two tokens, t_m per send to a neighbor."""

    t_c: int
    t_m: int

    def __post_init__(self):
        if self.t_c < 1 or self.t_m < 1:
            raise MalformedInputError(f"t_c and t_m must be >= 1, got ({self.t_c}, {self.t_m})")

    def duration(self, kind: str) -> int:
        return self.t_m if kind == SEND else self.t_c


@dataclass(frozen=True)
class Action:
    """One timed action of one node.

    SEND occupies [start_round, start_round + t_m - 1]; COMPUTE occupies
    [start_round, start_round + t_c - 1].  `token`, when set, names the sent
    token by the lowest singleton id it contains; an unnamed SEND transmits
    the node's oldest-acquired token.
    """

    start_round: int
    node: int
    kind: str
    target: int | None = None
    token: int | None = None

    def __post_init__(self):
        if self.kind not in (SEND, COMPUTE):
            raise MalformedInputError(f"unknown action kind {self.kind!r}")
        if self.kind == SEND and self.target is None:
            raise MalformedInputError("SEND needs a target")
        if self.kind == COMPUTE and (self.target is not None or self.token is not None):
            raise MalformedInputError("COMPUTE takes no target or token")

    def sort_key(self):
        return (
            self.start_round,
            self.node,
            0 if self.kind == COMPUTE else 1,
            -1 if self.target is None else self.target,
            -1 if self.token is None else self.token,
        )


@dataclass(frozen=True)
class Schedule:
    """A timed list of actions plus a declared length in rounds.

    Actions are kept canonically sorted so equal schedules compare equal and
    serialize identically.
    """

    length: int
    actions: tuple = ()

    def __post_init__(self):
        if self.length < 0:
            raise MalformedInputError(f"length must be >= 0, got {self.length}")
        object.__setattr__(
            self, "actions", tuple(sorted(self.actions, key=Action.sort_key))
        )

    def shifted(self, offset: int) -> "Schedule":
        """Same actions delayed by `offset` rounds."""
        moved = tuple(
            Action(a.start_round + offset, a.node, a.kind, a.target, a.token)
            for a in self.actions
        )
        return Schedule(self.length + offset, moved)

    def last_occupied_round(self, p: NetworkParams) -> int:
        return max(
            (a.start_round + p.duration(a.kind) - 1 for a in self.actions), default=0
        )


@dataclass(frozen=True)
class TokenState:
    """Per-node token holdings at one round boundary.

    Each token is a frozenset of the singleton origins it contains; tokens at
    a node are listed oldest-acquired first.  A token in flight is listed at
    its sender.
    """

    holdings: tuple  # tuple over nodes of tuple[frozenset, ...]

    def tokens_at(self, v: int) -> tuple:
        return self.holdings[v]

    def counts(self) -> tuple:
        return tuple(len(h) for h in self.holdings)

    def total_tokens(self) -> int:
        return sum(len(h) for h in self.holdings)

    def singleton_cover(self) -> list:
        """All singleton ids contained anywhere, with multiplicity."""
        out = []
        for h in self.holdings:
            for tok in h:
                out.extend(tok)
        return sorted(out)


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violation: tuple | None  # (round, node, rule id, message)
    final_token_count: int


def initial_state(g: Graph) -> TokenState:
    return TokenState(tuple((frozenset([v]),) for v in range(g.n)))


class _Replay:
    """Round-by-round engine shared by the validator and the simulator.

    Start-of-round effects (deliveries, merge completions) are applied before
    that round's actions are checked and started.  Rule violations raise
    InvalidScheduleError; malformed actions raise MalformedInputError.
    """

    def __init__(self, g: Graph, p: NetworkParams, length: int,
                 start: TokenState | None = None, record_events: bool = False):
        if start is not None and len(start.holdings) != g.n:
            raise MalformedInputError("token state does not match graph size")
        state = start if start is not None else initial_state(g)
        self.g = g
        self.p = p
        self.length = length
        self.holdings = [list(h) for h in state.holdings]
        self.busy_until = [0] * g.n
        self.effects = {}  # round -> effects applied at the start of that round
        # ("deliver", round, sender, target, tok) / ("merge", round, node, a, b)
        self.events = [] if record_events else None

    def apply_effects(self, round_: int):
        # Merge completions land before deliveries so a delivered token is
        # always newer in acquisition order than a merge finishing that round.
        pending = self.effects.pop(round_, [])
        pending.sort(key=lambda e: (0 if e[0] == "merge" else 1, e[1], e[2]))
        for eff in pending:
            if eff[0] == "merge":
                _, node, _, a, b = eff
                self.holdings[node].remove(a)
                self.holdings[node].remove(b)
                self.holdings[node].append(a | b)
                if self.events is not None:
                    self.events.append(("merge", round_, node, a, b))
            else:
                _, sender, target, tok = eff
                self.holdings[sender].remove(tok)
                self.holdings[target].append(tok)
                if self.events is not None:
                    self.events.append(("deliver", round_, sender, target, tok))

    def start_action(self, a: Action):
        g = self.g
        if not (0 <= a.node < g.n):
            raise MalformedInputError(f"action names unknown node {a.node}")
        if a.kind == SEND:
            if not (0 <= a.target < g.n) or a.target == a.node:
                raise MalformedInputError(
                    f"round {a.start_round}: node {a.node} sends to invalid node {a.target}"
                )
            if not g.has_edge(a.node, a.target):
                raise MalformedInputError(
                    f"round {a.start_round}: nodes {a.node} and {a.target} are not neighbors"
                )
        r = a.start_round
        dur = self.p.duration(a.kind)
        if r < 1 or r + dur - 1 > self.length:
            raise InvalidScheduleError(
                r, a.node, "d",
                f"{a.kind} occupies [{r}, {r + dur - 1}] outside [1, {self.length}]",
            )
        if self.busy_until[a.node] >= r:
            raise InvalidScheduleError(
                r, a.node, "c", f"node busy until round {self.busy_until[a.node]}"
            )
        held = self.holdings[a.node]
        if a.kind == SEND:
            if not held:
                raise InvalidScheduleError(r, a.node, "a", "send with no token in hand")
            if a.token is not None:
                matches = [t for t in held if min(t) == a.token]
                if not matches:
                    raise InvalidScheduleError(r, a.node, "a", f"named token {a.token} not held")
                tok = matches[0]
            else:
                tok = held[0]  # oldest-acquired
            self.busy_until[a.node] = r + dur - 1
            self.effects.setdefault(r + dur, []).append(("deliver", a.node, a.target, tok))
        else:
            if len(held) < 2:
                raise InvalidScheduleError(
                    r, a.node, "b", f"compute with {len(held)} token(s) in hand"
                )
            self.busy_until[a.node] = r + dur - 1
            self.effects.setdefault(r + dur, []).append(
                ("merge", a.node, a.node, held[0], held[1])  # two oldest-acquired
            )

    def snapshot(self) -> TokenState:
        return TokenState(tuple(tuple(h) for h in self.holdings))


def simulate(g: Graph, p: NetworkParams, s: Schedule,
             start: TokenState | None = None) -> list:
    """Token-placement trace of a schedule, one TokenState per round boundary.

    trace[0] is the state before round 1; trace[r] is the state after round r
    (with effects completing at the start of round r+1 already visible).
    Raises InvalidScheduleError when the schedule breaks a structural rule
    (bad window, busy overlap, send without a token, compute without two).
    Full aggregation is not required; callers inspect the final state.
    """
    eng = _Replay(g, p, s.length, start)
    by_round = {}
    for a in s.actions:
        by_round.setdefault(a.start_round, []).append(a)
    for r in sorted(k for k in by_round if k < 1):
        eng.start_action(by_round[r][0])  # raises the window violation
    trace = [eng.snapshot()]
    for r in range(1, s.length + 1):
        eng.apply_effects(r)
        for a in by_round.get(r, []):
            eng.start_action(a)
        eng.apply_effects(r + 1)
        trace.append(eng.snapshot())
    for r in sorted(k for k in by_round if k > s.length):
        eng.start_action(by_round[r][0])  # raises the window violation
    return trace


def _run(g: Graph, p: NetworkParams, s: Schedule, start: TokenState | None,
         record_events: bool) -> _Replay:
    eng = _Replay(g, p, s.length, start, record_events)
    by_round = {}
    for a in s.actions:
        by_round.setdefault(a.start_round, []).append(a)
    for r in sorted(k for k in by_round if k < 1):
        eng.start_action(by_round[r][0])  # raises the window violation
    for r in range(1, s.length + 1):
        eng.apply_effects(r)
        for a in by_round.get(r, []):
            eng.start_action(a)
    for r in sorted(k for k in by_round if k > s.length):
        eng.start_action(by_round[r][0])  # raises the window violation
    eng.apply_effects(s.length + 1)
    return eng


def replay_events(g: Graph, p: NetworkParams, s: Schedule,
                  start: TokenState | None = None) -> tuple:
    """(final TokenState, event list) for a structurally sound schedule.

    Events are ("deliver", round, sender, target, token) and
    ("merge", round, node, operand_a, operand_b), where `round` is the round
    at whose start the effect lands, in application order.
    """
    eng = _run(g, p, s, start, record_events=True)
    return eng.snapshot(), eng.events


def validate_schedule(g: Graph, p: NetworkParams, s: Schedule,
                      start: TokenState | None = None) -> ValidationReport:
    """Check a schedule against the validity rules, in round order.

    (a) a sender holds the token it sends (a target that is not a graph
        neighbor is malformed input, not merely an invalid schedule),
    (b) a computing node holds at least two tokens,
    (c) one action at a time per node,
    (d) every occupancy window fits in [1, length],
    (e) exactly one token remains after the last round.
    """
    try:
        final_state = _run(g, p, s, start, record_events=False).snapshot()
    except InvalidScheduleError as e:
        return ValidationReport(False, (e.round, e.node, e.rule, e.message), -1)
    final = final_state.total_tokens()
    if final != 1:
        return ValidationReport(
            False,
            (s.length, -1, "e", f"{final} tokens remain after round {s.length}"),
            final,
        )
    return ValidationReport(True, None, 1)


def ceil_log2(n: int) -> int:
    """Smallest k with 2**k >= n, for n >= 1."""
    return (n - 1).bit_length()


def lower_bounds(g: Graph, p: NetworkParams) -> tuple:
    """(compute_lb, radius_lb, combined_lb) in rounds.

    compute_lb: merging n tokens into one needs ceil(log2 n) serialized
    merges.  radius_lb: some token must travel at least radius(g) hops.
    """
    if g.n == 1:
        return (0, 0, 0)
    if not g.is_connected():
        raise DisconnectedGraphError(
            "graph is disconnected; aggregation to one token is unsolvable"
        )
    compute_lb = p.t_c * ceil_log2(g.n)
    radius_lb = p.t_m * g.radius()
    return (compute_lb, radius_lb, max(compute_lb, radius_lb))


def trivial_upper_bound(g: Graph, p: NetworkParams) -> int:
    """Rounds used by the naive schedule that repeatedly routes one token to
    another and merges: (n - 1) * (t_c + diameter * t_m)."""
    if g.n == 1:
        return 0
    if not g.is_connected():
        raise DisconnectedGraphError(
            "graph is disconnected; aggregation to one token is unsolvable"
        )
    return (g.n - 1) * (p.t_c + g.diameter() * p.t_m)
