import pytest

from tokensched.core import (
    Graph,
    NetworkParams,
    lower_bounds,
    trivial_upper_bound,
    validate_schedule,
)
from tokensched.brute import (
    NoScheduleWithinLimitError,
    SearchInfeasibleError,
    brute_opt,
    extract_opt_paths,
    max_singleton_distance,
    n_star_table,
    solvable_within,
    _twin_classes,
)
from tokensched.complete import r_star, tree_size
from tokensched.generators import (
    complete_graph,
    cycle_graph,
    path_graph,
    star_graph,
)

P11 = NetworkParams(1, 1)


def test_twin_classes():
    assert sorted(map(sorted, _twin_classes(complete_graph(4)))) == [[0, 1, 2, 3]]
    assert sorted(map(sorted, _twin_classes(star_graph(4)))) == [[1, 2, 3]]
    assert sorted(map(sorted, _twin_classes(path_graph(3)))) == [[0, 2]]
    assert _twin_classes(cycle_graph(5)) == []


def test_oracle_examples():
    assert brute_opt(complete_graph(2), P11).opt_length == 2
    assert brute_opt(complete_graph(3), P11).opt_length == 3 == r_star(3, P11)
    assert brute_opt(path_graph(3), P11).opt_length == 3


def test_oracle_schedule_validates_and_is_deterministic():
    res1 = brute_opt(complete_graph(4), P11)
    res2 = brute_opt(complete_graph(4), P11)
    assert res1.schedule == res2.schedule
    assert validate_schedule(complete_graph(4), P11, res1.schedule).valid
    assert res1.schedule.length == res1.opt_length


def test_oracle_between_bounds():
    for g in (complete_graph(4), path_graph(4), star_graph(4), cycle_graph(5)):
        for tc, tm in [(1, 1), (2, 1), (1, 2)]:
            p = NetworkParams(tc, tm)
            res = brute_opt(g, p)
            assert lower_bounds(g, p)[2] <= res.opt_length <= trivial_upper_bound(g, p)


def test_oracle_guards():
    with pytest.raises(SearchInfeasibleError):
        brute_opt(complete_graph(6), P11)
    with pytest.raises(SearchInfeasibleError):
        brute_opt(complete_graph(3), NetworkParams(4, 1))
    with pytest.raises(SearchInfeasibleError):
        brute_opt(complete_graph(3), P11, limit=100)
    with pytest.raises(SearchInfeasibleError):
        brute_opt(Graph(3, [(0, 1)]), P11)
    # force=True lifts the envelope
    assert brute_opt(complete_graph(3), P11, limit=100, force=True).opt_length == 3


def test_no_schedule_within_limit():
    with pytest.raises(NoScheduleWithinLimitError):
        brute_opt(path_graph(3), P11, limit=2, force=True)


def test_single_node():
    res = brute_opt(Graph(1, []), P11)
    assert res.opt_length == 0 and res.max_singleton_distance == 0


def test_solvable_within():
    assert solvable_within(complete_graph(3), P11, 3)
    assert not solvable_within(complete_graph(3), P11, 2)
    assert solvable_within(Graph(1, []), P11, 0)


def test_n_star_tables():
    assert n_star_table(4, P11) == [(0, 1), (1, 1), (2, 2), (3, 3), (4, 5)]
    assert n_star_table(5, NetworkParams(2, 1)) == [
        (0, 1), (1, 1), (2, 1), (3, 2), (4, 2), (5, 3),
    ]
    # Below t_c + t_m only the single-node network is solvable.
    for r, n in n_star_table(2, NetworkParams(1, 2)):
        if r < 3:
            assert n == 1


def test_n_star_matches_tree_sizes():
    for tc, tm in [(1, 1), (2, 1), (1, 2)]:
        p = NetworkParams(tc, tm)
        for r, n in n_star_table(4 if (tc, tm) == (1, 1) else 5, p):
            assert n == tree_size(r, p)


def test_n_star_truncates_rather_than_guessing():
    # Confirming N*(3) = 3 would need refuting K_4, beyond max_n = 3, so the
    # table stops after the last entry it can actually certify.
    rows = n_star_table(4, P11, max_n=3)
    assert rows == [(0, 1), (1, 1), (2, 2)]


def test_max_singleton_distance():
    res = brute_opt(path_graph(3), P11)
    assert res.max_singleton_distance == 1
    res2 = brute_opt(path_graph(4), P11)
    assert res2.max_singleton_distance >= 1
    assert max_singleton_distance(path_graph(3), P11, res.schedule) == 1


def test_extract_paths_two_nodes():
    g = complete_graph(2)
    res = brute_opt(g, P11)
    ps = extract_opt_paths(g, P11, res.schedule, {0, 1})
    assert set(ps.paths) == {(0, 1), (1, 0)}
    assert ps.con == 2
    assert ps.con * min(P11.t_c, P11.t_m) <= 2 * res.opt_length


def test_extract_paths_path3_through_middle():
    g = path_graph(3)
    res = brute_opt(g, P11)
    ps = extract_opt_paths(g, P11, res.schedule, {0, 2})
    assert set(ps.paths) == {(0, 1, 2), (2, 1, 0)}


def test_extract_paths_drops_one_when_odd():
    g = path_graph(3)
    res = brute_opt(g, P11)
    ps = extract_opt_paths(g, P11, res.schedule, {0, 1, 2})
    assert len(ps.paths) == 2  # highest id dropped, the pair (0, 1) remains
    for path in ps.paths:
        assert path[0] in {0, 1} and path[-1] in {0, 1}
        assert path[0] != path[-1]


def test_extract_paths_endpoint_properties():
    for g, p in [
        (complete_graph(4), P11),
        (star_graph(4), NetworkParams(2, 1)),
        (cycle_graph(5), P11),
        (path_graph(4), NetworkParams(1, 2)),
    ]:
        res = brute_opt(g, p)
        W = list(range(g.n))
        ps = extract_opt_paths(g, p, res.schedule, W)
        weven = W if len(W) % 2 == 0 else W[:-1]
        assert len(ps.paths) == len(weven)
        assert sorted(path[0] for path in ps.paths) == weven
        assert sorted(path[-1] for path in ps.paths) == weven
        for path in ps.paths:
            assert path[0] != path[-1]
        assert ps.con * min(p.t_c, p.t_m) <= 2 * res.opt_length


def test_extract_paths_rejects_invalid_schedule():
    g = complete_graph(2)
    from tokensched.core import Schedule

    with pytest.raises(ValueError):
        extract_opt_paths(g, P11, Schedule(1), {0, 1})
