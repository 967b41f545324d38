"""Walkthrough: dominating sets and aggregation schedules translate into
each other on the hub-and-dangler gadget.

A dominating set yields a short schedule on the gadget; any short-enough
schedule on a gadget over disjoint base copies yields a dominating set back.
The reduction loop wraps this into a dominating-set approximator driven by
any aggregation scheduler.
"""

from tokensched import (
    ds_from_schedule,
    mds_apx,
    psi_transform,
    schedule_from_dominating_set,
    validate_schedule,
)
from tokensched.domset import (
    disjoint_copies,
    make_dominating_set,
    min_dominating_set,
)
from tokensched.generators import cycle_graph

g = cycle_graph(5)
kappa = min_dominating_set(g)
delta = g.max_degree()
print(f"base graph: 5-cycle, max degree {delta}, minimum dominating set {sorted(kappa.members)}")

print()
print("== Dominating set -> short schedule ==")
copies = delta
galpha = disjoint_copies(g, copies)
planted = make_dominating_set(
    galpha, [v + i * g.n for i in range(copies) for v in sorted(kappa.members)]
)
t_m = delta + delta * len(kappa) + 1
gadget = psi_transform(galpha, t_m)
print(f"  gadget over {copies} copies: {gadget.graph.n} nodes, t_m={t_m}, t_c=1")
sched = schedule_from_dominating_set(gadget, planted)
print(
    f"  schedule length {sched.length} <= 2*t_m + degree + |set| = "
    f"{2 * t_m + delta + len(planted)}; below the 3*t_m = {3 * t_m} threshold"
)
print(f"  valid: {validate_schedule(gadget.graph, gadget.params, sched).valid}")

print()
print("== Short schedule -> dominating set ==")
recovered = ds_from_schedule(gadget, sched, eps=1.0)
print(f"  recovered {sorted(recovered.members)} (size {len(recovered)}, planted {len(kappa)})")

print()
print("== The reduction as an approximator ==")


def scheduler(graph, params):
    # Stand-in for a near-optimal aggregation scheduler: this demo recognizes
    # the gadget layout and replays the dominating-set construction.
    hub = next(
        (v for v in range(graph.n) if len(graph.adj[v]) == graph.n - 1), None
    )
    if hub is None:
        return None
    from tokensched.core import Graph
    from tokensched.domset import PsiGadget

    base = Graph(hub, [(u, v) for u, v in graph.edges if u < hub and v < hub])
    wrapped = PsiGadget(base, params.t_m, graph, hub, hub + 1,
                        tuple(range(hub + 2, graph.n)))
    members = []
    for i in range(base.n // g.n):
        members.extend(v + i * g.n for v in sorted(min_dominating_set(g).members))
    return schedule_from_dominating_set(wrapped, make_dominating_set(base, members))


result = mds_apx(g, scheduler, eps=1.0)
print(f"  approximator returns {sorted(result.members)} (size {len(result)})")
