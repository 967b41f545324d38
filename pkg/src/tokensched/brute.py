"""Exhaustive minimum-length schedule oracle for tiny instances.

Feasibility of finishing by a deadline depends only on where tokens are, not
on what they contain (any token may be sent, any two merged), so the search
runs over content-free states: per-node token counts, busy horizons, and
in-flight deliveries.  Token contents are recovered afterwards by replaying
the winning schedule.

States are canonicalized by sorting the records of interchangeable nodes
(twin vertices: same neighborhood, so any permutation among them is a graph
automorphism).  On a complete graph all nodes are twins and the reduction is
maximal; on an asymmetric graph it degenerates to exact-state memoization.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    COMPUTE,
    SEND,
    Action,
    Graph,
    NetworkParams,
    Schedule,
    ceil_log2,
    lower_bounds,
    replay_events,
    trivial_upper_bound,
    validate_schedule,
)
from .paths import DirectedPathSet

DEFAULT_MAX_NODES = 5
DEFAULT_MAX_COST = 3


class SearchInfeasibleError(ValueError):
    """Refusal: the instance is beyond the oracle's default envelope."""


class NoScheduleWithinLimitError(ValueError):
    """The search space is exhausted: no valid schedule within the limit."""


@dataclass(frozen=True)
class OracleResult:
    opt_length: int
    schedule: Schedule
    max_singleton_distance: int  # furthest hop count any singleton travels


def _twin_classes(g: Graph) -> list:
    """Groups of mutually interchangeable nodes (classes of size >= 2 only)."""
    by_closed = {}
    by_open = {}
    for v in range(g.n):
        by_closed.setdefault(frozenset(g.adj[v]) | {v}, []).append(v)
    grouped = set()
    classes = []
    for members in by_closed.values():
        if len(members) >= 2:
            classes.append(tuple(members))
            grouped.update(members)
    for v in range(g.n):
        if v not in grouped:
            by_open.setdefault(g.adj[v], []).append(v)
    for members in by_open.values():
        if len(members) >= 2:
            classes.append(tuple(members))
    return classes


class _Search:
    """Depth-first search for a schedule finishing within a fixed horizon.

    Action sets per round are enumerated in lexicographic order of their
    sorted action lists (the empty set first), so the first schedule found is
    the lexicographically least one of its length.
    """

    def __init__(self, g: Graph, p: NetworkParams, horizon: int):
        self.g = g
        self.p = p
        self.L = horizon
        self.adj_sorted = [sorted(g.adj[v]) for v in range(g.n)]
        self.dist = [g.bfs_distances(v) for v in range(g.n)]
        self.twins = _twin_classes(g)
        self.visited = set()

    # A state at the start of round r is a tuple over nodes of
    # (token count, rounds still busy, sorted tuple of rounds-to-arrival of
    # incoming in-flight tokens).  A merge decrements its node's count when it
    # starts; the node is busy until the merge lands, so nothing reads the
    # count early.

    def _canon(self, state):
        if not self.twins:
            return state
        canon = list(state)
        for cls in self.twins:
            for pos, rec in zip(cls, sorted(state[i] for i in cls)):
                canon[pos] = rec
        return tuple(canon)

    def _lower_bound(self, state) -> int:
        total = sum(rec[0] + len(rec[2]) for rec in state)
        tail = max(rec[1] for rec in state)
        if total == 1:
            return tail
        lb = self.p.t_c * ceil_log2(total)
        locs = [v for v, rec in enumerate(state) if rec[0] > 0 or rec[2]]
        gather = min(
            max(self.dist[u][v0] for u in locs) for v0 in range(self.g.n)
        )
        return max(lb, gather * self.p.t_m + self.p.t_c, tail)

    def _candidates(self, r: int, state) -> list:
        cands = []
        t_c, t_m = self.p.t_c, self.p.t_m
        for v, (count, busy, _) in enumerate(state):
            if busy:
                continue
            if count >= 2 and r + t_c - 1 <= self.L:
                cands.append((COMPUTE, v, -1))
            if count >= 1 and r + t_m - 1 <= self.L:
                cands.extend((SEND, v, u) for u in self.adj_sorted[v])
        return cands

    @staticmethod
    def _action_sets(cands):
        """All per-node-compatible subsets, in lexicographic list order."""
        stack = [(0, frozenset(), ())]
        while stack:
            i, used, chosen = stack.pop()
            yield chosen
            ext = []
            for j in range(i, len(cands)):
                a = cands[j]
                if a[1] in used:
                    continue
                ext.append((j + 1, used | {a[1]}, chosen + (a,)))
            stack.extend(reversed(ext))

    def _advance(self, state, acts):
        counts = [rec[0] for rec in state]
        busy = [max(0, rec[1] - 1) for rec in state]
        incoming = [[] for _ in state]
        for v, rec in enumerate(state):
            for a_in in rec[2]:
                if a_in == 1:
                    counts[v] += 1
                else:
                    incoming[v].append(a_in - 1)
        t_c, t_m = self.p.t_c, self.p.t_m
        for kind, v, u in acts:
            counts[v] -= 1
            if kind == COMPUTE:
                busy[v] = t_c - 1
            else:
                busy[v] = t_m - 1
                if t_m == 1:
                    counts[u] += 1
                else:
                    incoming[u].append(t_m - 1)
        return tuple(
            (counts[v], busy[v], tuple(sorted(incoming[v])))
            for v in range(self.g.n)
        )

    def _dfs(self, r: int, state):
        total = sum(rec[0] + len(rec[2]) for rec in state)
        if total == 1:
            return []
        if r - 1 + self._lower_bound(state) > self.L:
            return None
        key = (r, self._canon(state))
        if key in self.visited:
            return None
        self.visited.add(key)
        for acts in self._action_sets(self._candidates(r, state)):
            sub = self._dfs(r + 1, self._advance(state, acts))
            if sub is not None:
                return [acts] + sub
        return None

    def run(self):
        init = tuple((1, 0, ()) for _ in range(self.g.n))
        per_round = self._dfs(1, init)
        if per_round is None:
            return None
        actions = []
        for r, acts in enumerate(per_round, start=1):
            for kind, v, u in acts:
                if kind == COMPUTE:
                    actions.append(Action(r, v, COMPUTE))
                else:
                    actions.append(Action(r, v, SEND, u))
        return tuple(actions)


def max_singleton_distance(g: Graph, p: NetworkParams, s: Schedule) -> int:
    """Furthest hop count any singleton travels: the number of deliveries of
    tokens containing it."""
    _, events = replay_events(g, p, s)
    hops = [0] * g.n
    for ev in events:
        if ev[0] == "deliver":
            for w in ev[4]:
                hops[w] += 1
    return max(hops, default=0)


def brute_opt(g: Graph, p: NetworkParams, limit: int | None = None,
              force: bool = False) -> OracleResult:
    """Minimum-length valid schedule by exhaustive search.

    Searches lengths from the combined lower bound upward; for each length,
    all action subsets per round are explored with symmetry-reduced
    memoization.  Among minimum-length schedules the lexicographically least
    action list is returned.  Refuses instances beyond a small envelope
    (n <= 5, costs <= 3, limit <= the trivial upper bound) unless `force`.
    """
    if not g.is_connected():
        raise SearchInfeasibleError("graph is disconnected; aggregation unsolvable")
    if g.n == 1:
        return OracleResult(0, Schedule(0), 0)
    tub = trivial_upper_bound(g, p)
    if limit is None:
        limit = tub
    if not force:
        if g.n > DEFAULT_MAX_NODES:
            raise SearchInfeasibleError(
                f"n={g.n} exceeds the default search envelope (n <= {DEFAULT_MAX_NODES}); "
                "pass force=True to override"
            )
        if max(p.t_c, p.t_m) > DEFAULT_MAX_COST:
            raise SearchInfeasibleError(
                f"costs {p} exceed the default search envelope (<= {DEFAULT_MAX_COST}); "
                "pass force=True to override"
            )
        if limit > tub:
            raise SearchInfeasibleError(
                f"limit {limit} exceeds the trivial upper bound {tub}; "
                "pass force=True to override"
            )
    start = lower_bounds(g, p)[2]
    for L in range(start, limit + 1):
        actions = _Search(g, p, L).run()
        if actions is not None:
            sched = Schedule(L, actions)
            report = validate_schedule(g, p, sched)
            if not report.valid:
                raise RuntimeError(f"oracle produced an invalid schedule: {report}")
            return OracleResult(L, sched, max_singleton_distance(g, p, sched))
    raise NoScheduleWithinLimitError(
        f"no valid schedule of length <= {limit} exists"
    )


def solvable_within(g: Graph, p: NetworkParams, rounds: int) -> bool:
    """Whether any valid schedule of length <= `rounds` exists."""
    if g.n == 1:
        return True
    if not g.is_connected():
        return False
    if lower_bounds(g, p)[2] > rounds:
        return False
    return _Search(g, p, rounds).run() is not None


def n_star_table(R_max: int, p: NetworkParams, max_n: int = 6) -> list:
    """Rows (R, largest n with a length-<=R schedule on K_n), for R <= R_max.

    Verified against the aggregation-tree size at every R; the table is
    truncated with a warning row once confirming an entry would need a search
    beyond max_n nodes.
    """
    from .complete import tree_size
    from .generators import complete_graph

    rows = []
    n = 1
    for R in range(R_max + 1):
        while n + 1 <= max_n and solvable_within(complete_graph(n + 1), p, R):
            n += 1
        if n + 1 > max_n:
            # Cannot refute n+1; the entry would be a guess, so stop here.
            break
        expected = tree_size(R, p)
        if n != expected:
            raise RuntimeError(
                f"oracle disagrees with the tree recurrence at R={R}: "
                f"N*={n} vs |T(R)|={expected}"
            )
        rows.append((R, n))
    return rows


def extract_opt_paths(g: Graph, p: NetworkParams, s: Schedule, W) -> DirectedPathSet:
    """Directed source-to-sink paths traced by the tokens of W in a schedule.

    Replays the schedule tracking, for each w in W, the vertices that receive
    tokens containing w's singleton.  A token is active when it contains an
    odd number of W-singletons; the first merge of two active tokens pairs the
    two singletons that are still pending and fixes the meeting vertex.  The
    path for w runs from w to the meeting vertex and back down its partner's
    trace.  Vertex congestion of the result is at most
    2 * length / min(t_c, t_m).
    """
    W = sorted(set(W))
    if any(not 0 <= w < g.n for w in W):
        raise ValueError("W contains unknown nodes")
    if len(W) % 2 == 1:
        W = W[:-1]  # drop the highest id to make the pairing total
    report = validate_schedule(g, p, s)
    if not report.valid:
        raise ValueError(f"schedule is invalid: {report.violation}")
    if not W:
        return DirectedPathSet(())
    wset = set(W)
    _, events = replay_events(g, p, s)

    def active(tok) -> bool:
        return len(tok & wset) % 2 == 1

    pending = set(W)
    trace = {w: [w] for w in W}
    frozen = {}
    partner = {}
    live = {frozenset([v]) for v in range(g.n)}
    for ev in events:
        if ev[0] == "deliver":
            _, _, _, target, tok = ev
            for w in wset & tok:
                if w in pending:
                    trace[w].append(target)
        else:
            _, rnd, node, a, b = ev
            if active(a) and active(b):
                pa = sorted(a & wset & pending)
                pb = sorted(b & wset & pending)
                if len(pa) != 1 or len(pb) != 1:
                    raise RuntimeError(
                        "active token does not contain exactly one pending singleton"
                    )
                wa, wb = pa[0], pb[0]
                partner[wa], partner[wb] = wb, wa
                frozen[wa] = list(trace[wa])
                frozen[wb] = list(trace[wb])
                pending.discard(wa)
                pending.discard(wb)
            live.discard(a)
            live.discard(b)
            live.add(a | b)
            for tok in live:
                k = len(tok & wset & pending)
                if k != (1 if active(tok) else 0):
                    raise RuntimeError(
                        "pending-singleton invariant broken during replay"
                    )
    if pending:
        raise RuntimeError(f"singletons {sorted(pending)} never paired")
    out = []
    for w in W:
        u = partner[w]
        if frozen[w][-1] != frozen[u][-1]:
            raise RuntimeError("paired traces do not meet at one vertex")
        out.append(tuple(frozen[w] + frozen[u][-2::-1]))
    ps = DirectedPathSet(tuple(out))
    if ps.con * min(p.t_c, p.t_m) > 2 * s.length:
        raise RuntimeError(
            f"extracted congestion {ps.con} exceeds 2*length/min(t_c,t_m)"
        )
    return ps
