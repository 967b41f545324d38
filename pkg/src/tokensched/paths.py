"""Directed vertex-path collections with congestion and dilation bookkeeping."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass


def excise_loops(walk) -> list:
    """Shrink a vertex walk to a simple path with the same endpoints.

    Whenever a vertex repeats, the stretch between its two visits is spliced
    out; every consecutive pair in the result was consecutive in the walk or
    bridges a removed cycle at a shared vertex, so edge validity is preserved.
    """
    out = []
    seen = {}
    for v in walk:
        if v in seen:
            cut = seen[v]
            for w in out[cut + 1:]:
                del seen[w]
            del out[cut + 1:]
        else:
            seen[v] = len(out)
            out.append(v)
    return out


@dataclass(frozen=True)
class DirectedPathSet:
    """Directed vertex paths with distinct sources and distinct sinks.

    `con` is the vertex congestion: the maximum, over vertices, of the number
    of path occurrences (a vertex revisited within one walk counts each
    visit).  `dil` is the maximum path length in hops.  Paths produced for
    routing are simple; diagnostic extractions may contain revisits.
    """

    paths: tuple  # tuple of vertex tuples

    @property
    def sources(self) -> tuple:
        return tuple(p[0] for p in self.paths)

    @property
    def sinks(self) -> tuple:
        return tuple(p[-1] for p in self.paths)

    @property
    def con(self) -> int:
        hits = Counter()
        for p in self.paths:
            hits.update(p)
        return max(hits.values(), default=0)

    @property
    def dil(self) -> int:
        return max((len(p) - 1 for p in self.paths), default=0)

    def __len__(self):
        return len(self.paths)

    def check_endpoints(self, members=None) -> None:
        """Endpoint discipline for the route-and-compute step: sources are
        pairwise distinct, sinks are pairwise distinct, no source is a sink,
        and endpoints lie in `members` when given."""
        src, snk = self.sources, self.sinks
        if len(set(src)) != len(src):
            raise ValueError("duplicate path sources")
        if len(set(snk)) != len(snk):
            raise ValueError("duplicate path sinks")
        if set(src) & set(snk):
            raise ValueError("a source is also a sink")
        for p in self.paths:
            if len(p) < 2:
                raise ValueError("path must have at least one hop")
        if members is not None:
            stray = (set(src) | set(snk)) - set(members)
            if stray:
                raise ValueError(f"endpoints {sorted(stray)} outside the token-holder set")

    def check_simple(self) -> None:
        for p in self.paths:
            if len(set(p)) != len(p):
                raise ValueError(f"path {p} revisits a vertex")
