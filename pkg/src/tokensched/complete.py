"""Optimal aggregation scheduling on complete graphs.

The recursive aggregation tree grown for a round budget R is the largest tree
that greedy aggregation can finish within R rounds: a single leaf when
R < t_c + t_m, otherwise the tree for R - t_c with the tree for R - t_c - t_m
joined under its root as one extra (last) subtree.  The optimal schedule for
K_n greedily aggregates on the smallest such tree with at least n nodes,
pruned down to exactly n nodes.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache

from .core import (
    COMPUTE,
    SEND,
    Action,
    Graph,
    NetworkParams,
    Schedule,
)


@lru_cache(maxsize=None)
def _size(R: int, t_c: int, t_m: int) -> int:
    if R < t_c + t_m:
        return 1
    return _size(R - t_c, t_c, t_m) + _size(R - t_c - t_m, t_c, t_m)


def tree_size(R: int, p: NetworkParams) -> int:
    """Node count of the aggregation tree for budget R, without building it."""
    if R < 0:
        raise ValueError(f"round budget must be >= 0, got {R}")
    return _size(R, p.t_c, p.t_m)


def _child_budgets(budget: int, p: NetworkParams) -> list:
    """Budgets of the root's subtrees, in child order (joined subtree last)."""
    buds = []
    b = budget
    while b >= p.t_c + p.t_m:
        buds.append(b - p.t_c - p.t_m)
        b -= p.t_c
    buds.reverse()
    return buds


@dataclass(frozen=True)
class AggTree:
    """Rooted aggregation tree; node 0 is the root, ids are DFS order.

    `budgets` records the round budget each node's subtree was grown for
    (pruned trees keep the budgets of the surviving original nodes).
    """

    R: int
    params: NetworkParams
    children: tuple  # node -> tuple of child ids, in join order
    budgets: tuple

    @property
    def size(self) -> int:
        return len(self.children)

    @property
    def root(self) -> int:
        return 0

    def parents(self) -> list:
        par = [-1] * self.size
        for u, ch in enumerate(self.children):
            for c in ch:
                par[c] = u
        return par

    def depths(self) -> list:
        par = self.parents()
        dep = [0] * self.size
        for u in range(1, self.size):  # DFS ids: parents precede children
            dep[u] = dep[par[u]] + 1
        return dep

    def edges(self) -> list:
        par = self.parents()
        return [(par[u], u) for u in range(1, self.size)]


def build_tree(R: int, p: NetworkParams) -> AggTree:
    """Materialize the aggregation tree for budget R.

    Node count equals tree_size(R, p); callers should check the size first
    for large budgets (growth is exponential in R).
    """
    if R < 0:
        raise ValueError(f"round budget must be >= 0, got {R}")
    children = [[]]
    budgets = [R]
    stack = [(0, R)]
    while stack:
        node, budget = stack.pop()
        buds = _child_budgets(budget, p)
        kids = []
        for cb in buds:
            cid = len(children)
            children.append([])
            budgets.append(cb)
            kids.append(cid)
        children[node] = kids
        # Visit in reverse so descent follows child order; every id exceeds
        # its parent's id.
        stack.extend(zip(reversed(kids), reversed(buds)))
    return AggTree(R, p, tuple(tuple(c) for c in children), tuple(budgets))


def r_star(n: int, p: NetworkParams) -> int:
    """Smallest round budget whose aggregation tree has at least n nodes."""
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    R = 0
    while tree_size(R, p) < n:
        R += 1
    return R


def prune_tree(tree: AggTree, n: int) -> AggTree:
    """Drop leaves, deepest first (ties to the larger id), until n nodes remain.

    Greedy aggregation on the pruned tree is never slower than on the full
    tree, so the budget R is kept.
    """
    if not (1 <= n <= tree.size):
        raise ValueError(f"cannot prune {tree.size}-node tree to {n} nodes")
    if n == tree.size:
        return tree
    depth = tree.depths()
    nchild = [len(c) for c in tree.children]
    parent = tree.parents()
    alive = [True] * tree.size
    heap = [(-depth[u], -u) for u in range(tree.size) if nchild[u] == 0]
    heapq.heapify(heap)
    remaining = tree.size
    while remaining > n:
        d, negu = heapq.heappop(heap)
        u = -negu
        if not alive[u] or nchild[u] > 0:
            continue
        alive[u] = False
        remaining -= 1
        par = parent[u]
        nchild[par] -= 1
        if nchild[par] == 0 and par != tree.root:
            heapq.heappush(heap, (-depth[par], -par))
    relabel = {}
    for u in range(tree.size):
        if alive[u]:
            relabel[u] = len(relabel)
    children = tuple(
        tuple(relabel[c] for c in tree.children[u] if alive[c])
        for u in range(tree.size)
        if alive[u]
    )
    budgets = tuple(tree.budgets[u] for u in range(tree.size) if alive[u])
    return AggTree(tree.R, tree.params, children, budgets)


@dataclass(frozen=True)
class TreeEmbedding:
    """Injective map from tree node ids to graph node ids."""

    mapping: tuple

    def __post_init__(self):
        if len(set(self.mapping)) != len(self.mapping):
            raise ValueError("embedding must be injective")

    def __getitem__(self, tree_node: int) -> int:
        return self.mapping[tree_node]

    @staticmethod
    def identity(size: int) -> "TreeEmbedding":
        return TreeEmbedding(tuple(range(size)))

    def check_edges(self, tree: AggTree, g: Graph) -> None:
        for u, v in tree.edges():
            if not g.has_edge(self.mapping[u], self.mapping[v]):
                raise ValueError(
                    f"tree edge ({u}, {v}) maps to non-edge "
                    f"({self.mapping[u]}, {self.mapping[v]})"
                )


def greedy_schedule(tree: AggTree, embedding: TreeEmbedding, p: NetworkParams) -> Schedule:
    """Greedy aggregation on an embedded tree.

    Rules, applied whenever a node is free: with two or more tokens it merges;
    a non-root with exactly one token that has heard from every child sends to
    its parent (leaves therefore send in round 1).  The declared schedule
    length is the tree's budget R; on a budget-R tree aggregation always
    completes within R rounds.
    """
    if len(embedding.mapping) != tree.size:
        raise ValueError("embedding size does not match tree size")
    size = tree.size
    parent = tree.parents()
    want = [len(c) for c in tree.children]  # arrivals to hear before sending
    tokens = [1] * size
    heard = [0] * size
    sent = [False] * size
    busy_until = [0] * size
    actions = []
    # Event queue: (round, kind, node) with kind 0 = token arrival (counted
    # when popped, i.e. at delivery), kind 1 = wake-up.  A busy node re-queues
    # itself for its free round; processing is otherwise idempotent.
    heap = [(1, 1, u) for u in range(size) if want[u] == 0 and u != tree.root]
    heapq.heapify(heap)
    while heap:
        r, kind, u = heapq.heappop(heap)
        if kind == 0:
            tokens[u] += 1
            heard[u] += 1
        if busy_until[u] >= r:
            heapq.heappush(heap, (busy_until[u] + 1, 1, u))
            continue
        if tokens[u] >= 2:
            actions.append(Action(r, embedding[u], COMPUTE))
            busy_until[u] = r + p.t_c - 1
            tokens[u] -= 1  # merge lands at r + t_c; only u reads this, when free
            heapq.heappush(heap, (r + p.t_c, 1, u))
        elif (
            u != tree.root
            and tokens[u] == 1
            and heard[u] == want[u]
            and not sent[u]
        ):
            actions.append(Action(r, embedding[u], SEND, embedding[parent[u]]))
            busy_until[u] = r + p.t_m - 1
            sent[u] = True
            tokens[u] = 0
            heapq.heappush(heap, (r + p.t_m, 0, parent[u]))
        # Otherwise nothing to do; a later arrival re-queues the node.
    return Schedule(tree.R, tuple(actions))


def greedy_completion_round(R: int, p: NetworkParams) -> int:
    """Round by which greedy aggregation on the budget-R tree holds one token.

    Computed by recurrence over budgets, without building the tree: a subtree
    finished at round c sends during [c + 1, c + t_m] and its parent can merge
    from round c + t_m + 1 on; a parent chains merges greedily over its
    children's arrivals.  Serves as an independent check on greedy_schedule.
    """

    @lru_cache(maxsize=None)
    def comp(budget: int) -> int:
        buds = _child_budgets(budget, p)
        if not buds:
            return 0
        arrivals = sorted(comp(b) + p.t_m + 1 for b in buds)
        finish = 0  # free from round finish + 1
        for a in arrivals:
            start = max(a, finish + 1)
            finish = start + p.t_c - 1
        return finish

    return comp(R)


def opt_complete(n: int, p: NetworkParams) -> Schedule:
    """Optimal aggregation schedule on the complete graph K_n.

    Builds the tree for budget r_star(n), prunes it to exactly n nodes, embeds
    it into K_n by identity, and greedily aggregates.  The schedule only sends
    along the tree's edges and has length r_star(n, p).
    """
    R = r_star(n, p)
    tree = prune_tree(build_tree(R, p), n)
    return greedy_schedule(tree, TreeEmbedding.identity(n), p)


def baseline_lengths(n: int, p: NetworkParams) -> tuple:
    """(naive_binary, pipelined_binary, optimal, compute_lb) round counts.

    The two binary-tree baselines evaluate the usual lock-step and
    root-pipelined aggregation estimates on a balanced binary tree; `optimal`
    is r_star(n); compute_lb is ceil(t_c * log2 n).
    """
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    if n == 1:
        return (0, 0, 0, 0)
    lg = math.log2(n)

    def iceil(x: float) -> int:
        return math.ceil(x - 1e-9)

    naive = iceil(lg * (p.t_c + p.t_m) + lg * p.t_c)
    pipelined = iceil(2 * p.t_c * lg + p.t_m * lg)
    return (naive, pipelined, r_star(n, p), iceil(p.t_c * lg))
