import pytest

from tokensched.core import SEND, Graph, NetworkParams, validate_schedule
from tokensched.brute import brute_opt
from tokensched.complete import (
    TreeEmbedding,
    baseline_lengths,
    build_tree,
    greedy_completion_round,
    greedy_schedule,
    opt_complete,
    prune_tree,
    r_star,
    tree_size,
)
from tokensched.generators import complete_graph

P11 = NetworkParams(1, 1)
P21 = NetworkParams(2, 1)
P12 = NetworkParams(1, 2)

FIB_SIZES_11 = [1, 1, 2, 3, 5, 8, 13]
SIZES_21 = [1, 1, 1, 2, 2, 3, 4, 5, 7, 9, 12, 16, 21, 28, 37, 49, 65]


def unrolled_sizes(p, r_max):
    # Independent unrolling of the size recurrence, kept apart from tree_size.
    sizes = []
    for r in range(r_max + 1):
        if r < p.t_c + p.t_m:
            sizes.append(1)
        else:
            sizes.append(sizes[r - p.t_c] + sizes[r - p.t_c - p.t_m])
    return sizes


def test_size_sequences():
    assert [tree_size(r, P11) for r in range(7)] == FIB_SIZES_11
    assert [tree_size(r, P21) for r in range(17)] == SIZES_21
    assert tree_size(16, P21) == 65


def test_size_recurrence_grid_to_200():
    for tc, tm in [(1, 1), (2, 1), (1, 2), (3, 1), (1, 3), (2, 3), (3, 2)]:
        p = NetworkParams(tc, tm)
        ref = unrolled_sizes(p, 200)
        got = [tree_size(r, p) for r in range(201)]
        assert got == ref
        assert all(a <= b for a, b in zip(got, got[1:]))  # nondecreasing


def test_build_tree_matches_sizes_and_structure():
    for tc, tm in [(1, 1), (2, 1), (1, 2)]:
        p = NetworkParams(tc, tm)
        for R in range(0, 14):
            tree = build_tree(R, p)
            assert tree.size == tree_size(R, p)
            parents = tree.parents()
            assert parents[0] == -1
            assert all(parents[u] < u for u in range(1, tree.size))
            if R >= tc + tm:
                # Root decomposition per the recurrence: last child's subtree
                # is the joined tree for R - t_c - t_m.
                last = tree.children[0][-1]
                sub = [last]
                size = 0
                while sub:
                    u = sub.pop()
                    size += 1
                    sub.extend(tree.children[u])
                assert size == tree_size(R - tc - tm, p)


def test_r_star_examples():
    assert r_star(1, P11) == 0
    assert r_star(7, P11) == 5
    assert r_star(65, P21) == 16
    assert r_star(16, P21) == 11


def test_two_node_tree_schedule():
    for tc, tm in [(1, 1), (2, 1), (1, 3)]:
        p = NetworkParams(tc, tm)
        R = tc + tm
        tree = build_tree(R, p)
        assert tree.size == 2
        s = greedy_schedule(tree, TreeEmbedding.identity(2), p)
        assert s.length == R
        acts = s.actions
        assert acts[0].kind == SEND and acts[0].start_round == 1
        assert acts[1].start_round == tm + 1
        assert validate_schedule(complete_graph(2), p, s).valid


def test_three_leaf_tree_schedule():
    tree = build_tree(3, P11)
    s = greedy_schedule(tree, TreeEmbedding.identity(3), P11)
    rounds = sorted((a.start_round, a.kind) for a in s.actions)
    assert rounds == [(1, SEND), (1, SEND), (2, "COMPUTE"), (3, "COMPUTE")]
    assert s.length == 3
    assert validate_schedule(complete_graph(3), P11, s).valid


def test_greedy_sweep_moderate():
    # Completion-time recurrence and materialized simulation must agree, the
    # schedule must validate at declared length R, and completion hits R
    # exactly whenever the tree actually grew at R.
    for tc, tm in [(1, 1), (2, 1), (1, 2), (3, 1), (1, 3)]:
        p = NetworkParams(tc, tm)
        for R in range(0, 15):
            tree = build_tree(R, p)
            s = greedy_schedule(tree, TreeEmbedding.identity(tree.size), p)
            assert s.length == R
            comp = greedy_completion_round(R, p)
            assert s.last_occupied_round(p) == comp
            assert comp <= R
            if R >= 1 and tree_size(R, p) > tree_size(R - 1, p):
                assert comp == R
            host = Graph(tree.size, tree.edges()) if tree.size > 1 else Graph(1, [])
            assert validate_schedule(host, p, s).valid


def test_embedding_checks():
    with pytest.raises(ValueError):
        TreeEmbedding((0, 0, 1))
    tree = build_tree(3, P11)
    emb = TreeEmbedding((0, 1, 2))
    emb.check_edges(tree, complete_graph(3))
    with pytest.raises(ValueError):
        emb.check_edges(tree, Graph(3, [(0, 1)]))


def test_prune_tree_counts_and_budget():
    tree = build_tree(6, P11)  # 13 nodes
    for n in (1, 4, 9, 13):
        pruned = prune_tree(tree, n)
        assert pruned.size == n
        assert pruned.R == 6


def test_opt_complete_examples_and_tree_property():
    for tc, tm in [(1, 1), (2, 1), (1, 2)]:
        p = NetworkParams(tc, tm)
        assert opt_complete(2, p).length == tc + tm
    s3 = opt_complete(3, P11)
    assert s3.length == 3 == brute_opt(complete_graph(3), P11).opt_length
    s7 = opt_complete(7, P11)
    assert s7.length == 5
    naive, pipelined, _, _ = baseline_lengths(7, P11)
    assert s7.length < pipelined  # strictly beats the pipelined binary tree
    assert validate_schedule(complete_graph(7), P11, s7).valid


def test_opt_complete_send_edges_form_a_tree():
    for n, p in [(9, P11), (12, P21), (10, P12)]:
        s = opt_complete(n, p)
        send_edges = {
            (min(a.node, a.target), max(a.node, a.target))
            for a in s.actions
            if a.kind == SEND
        }
        touched = {v for e in send_edges for v in e}
        assert len(send_edges) == n - 1
        assert touched == set(range(n))
        # n-1 edges touching all n nodes with no cycle <=> connected tree
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in send_edges:
            ru, rv = find(u), find(v)
            assert ru != rv  # acyclic
            parent[ru] = rv


def test_opt_complete_matches_r_star_broadly():
    for tc, tm in [(1, 1), (2, 1), (1, 2), (3, 1), (1, 3)]:
        p = NetworkParams(tc, tm)
        for n in range(1, 61, 7):
            s = opt_complete(n, p)
            assert s.length == r_star(n, p)
            if n > 1:
                assert s.last_occupied_round(p) == s.length
            assert validate_schedule(complete_graph(n), p, s).valid


def test_baseline_lengths_examples():
    assert baseline_lengths(1, P11) == (0, 0, 0, 0)
    naive, pipelined, optimal, clb = baseline_lengths(16, P21)
    assert pipelined == 20 and optimal == 11
    naive, pipelined, optimal, clb = baseline_lengths(1024, P11)
    assert pipelined == 30 and clb == 10
