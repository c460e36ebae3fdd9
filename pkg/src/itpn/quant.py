"""Duration bounds of firing subsequences and task response times.

For time-distance graphs durations come straight out of the distance tables
(re-extending a dropped origin point along the path when needed).  The dbm
and exact graphs get their own measures so results can be compared across
methods: sums of per-step dwell bounds for dbm, and exact optima of the total
elapsed time for exact classes.
"""

from dataclasses import dataclass, field, replace

from . import polyhedra as _poly
from . import timedist as _td
from .bound import INF
from .dbm import BULLET, beta
from .model import ContractError


class InvalidPath(ContractError):
    pass


@dataclass(frozen=True)
class PathQuery:
    transitions: tuple
    start: int = 0          # graph node the path leaves from
    origin: int = None      # point to measure from; default: the start node's point


@dataclass(frozen=True)
class TaskSpec:
    start: int
    end: int


@dataclass
class ResponseTime:
    bcrt: object
    wcrt: object
    paths: int
    truncated: bool = False
    per_path: list = field(default_factory=list)

    @property
    def found(self):
        return self.paths > 0


def _walk(g, q):
    k = q.start
    adj = g.adjacency()
    for t in q.transitions:
        nxt = [d for u, d in adj[k] if u == t]
        if not nxt:
            raise InvalidPath(f"{g.net.transitions[t]} is not an edge from node {k}")
        k = nxt[0]
    return k


def _extend(net, c, tf, std_next, origin):
    """``std_next`` augmented with the rows of ``origin`` computed from ``c``."""
    m_next = std_next.marking
    maps = (std_next.ne, std_next.ni, std_next.na)
    ds_ext, created, inhibited = _td.ds_successor(net, c, tf, m_next, maps, extra_points=(origin,))
    std = std_next.ds
    ds = _td.DistanceSystem(
        std.n, tuple(sorted(set(std.points) | {origin})), std.enabled,
        {**std.up_t, **{k: v for k, v in ds_ext.up_t.items() if k[0] == origin}},
        {**std.lo_t, **{k: v for k, v in ds_ext.lo_t.items() if k[1] == origin}},
        {**std.up_n, origin: ds_ext.up_n[origin]},
        {**std.lo_n, origin: ds_ext.lo_n[origin]})
    return _td.TdisClass(m_next, std_next.depth, *maps, ds, std_next.dc, created, inhibited)


def tdis_path_bounds(net, c, transitions, origin=None, force_extension=False):
    """``(min, max)`` elapsed time from ``origin`` to the end of the path."""
    if origin is None:
        origin = c.depth
    if origin not in c.ds.rows():
        raise InvalidPath(f"point {origin} is not known at the path start")
    if not transitions:
        return (0, 0) if origin == c.depth else (-c.ds.lo_n[origin], c.ds.up_n[origin])
    if origin == c.depth and origin not in c.created:
        row = {t: (c.ds.up_t[origin, t], c.ds.lo_t[t, origin]) for t in c.enabled}
        c = replace(c, created={**c.created, origin: row})
    std = c
    ext = c
    for t in transitions:
        if not _td.firable_tdis(net, std, t):
            raise InvalidPath(f"{net.transitions[t]} is not firable")
        nxt = _td.class_successor(net, std, t)
        if force_extension or origin not in nxt.ds.rows():
            ext = _extend(net, ext, t, nxt, origin)
        else:
            ext = nxt
        std = nxt
    return -ext.ds.lo_n[origin], ext.ds.up_n[origin]


def path_duration_bounds(g, q, force_extension=False, _traces=None):
    if g.method != "tdis":
        return _path_bounds_other(g, q, _traces)
    _walk(g, q)
    return tdis_path_bounds(g.net, g.nodes[q.start], tuple(q.transitions), q.origin,
                            force_extension)


def _path_bounds_other(g, q, traces=None):
    net = g.net
    if q.origin not in (None, 0) and q.origin != g.depth[q.start]:
        raise InvalidPath("non-tdis graphs measure from the path start only")
    _walk(g, q)
    c = g.nodes[q.start]
    if g.method == "dbm":
        lo = hi = 0
        for t in q.transitions:
            b = beta(net, c)
            lo += max(0, -c.D[t, BULLET])
            hi += b[BULLET]
            c = g.engine.successor(c, t)
        return lo, hi
    # traces maps (start, prefix) -> elapsed system; paths of one task share prefixes
    traces = {} if traces is None else traces
    seq = tuple(q.transitions)
    if not seq:
        return 0, 0
    k = len(seq)
    while k and (q.start, seq[:k]) not in traces:
        k -= 1
    tr = traces.get((q.start, seq[:k])) or _poly.initial_elapsed(c.marking, c.D)
    for j in range(k, len(seq)):
        tr = _poly.elapsed_successor(net, tr, seq[j])
        traces[q.start, seq[:j + 1]] = tr
    hi = _poly.sup(tr.system, {_poly.ELAPSED: 1})
    lo = -_poly.sup(tr.system, {_poly.ELAPSED: -1})
    return lo, hi


def task_paths(g, task, max_len=64, max_paths=10000):
    """Yield ``(node, transitions)`` from each start edge's target up to the
    first end edge; each edge is used at most once per path.

    Returns ``(paths, truncated)``; truncation covers cut cycles and limits.
    """
    adj = g.adjacency()
    paths = []
    truncated = False
    for s, t, v in g.edges:
        if t != task.start:
            continue
        stack = [(v, (), frozenset())]
        while stack:
            k, seq, used = stack.pop()
            for u, d in adj[k]:
                edge = (k, u, d)
                if u == task.end:
                    paths.append((v, seq + (u,)))
                    if len(paths) >= max_paths:
                        return paths, True
                    continue
                if edge in used or len(seq) + 1 >= max_len:
                    truncated = True
                    continue
                stack.append((d, seq + (u,), used | {edge}))
    return paths, truncated


def response_time(g, task, max_len=64, max_paths=10000):
    """Best/worst-case time from a ``task.start`` firing to the next ``task.end``.

    WCRT is reported as INF whenever enumeration had to cut a path, since the
    cut suffix could extend the response arbitrarily.
    """
    paths, truncated = task_paths(g, task, max_len, max_paths)
    if not paths:
        return ResponseTime(None, None, 0, truncated)
    per = []
    traces = {}
    for v, seq in paths:
        origin = g.depth[v] if g.method == "tdis" else None
        lo, hi = path_duration_bounds(g, PathQuery(seq, v, origin), _traces=traces)
        per.append((v, seq, lo, hi))
    bcrt = min(p[2] for p in per)
    wcrt = INF if truncated else max(p[3] for p in per)
    return ResponseTime(bcrt, wcrt, len(per), truncated, per)
