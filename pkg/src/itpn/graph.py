"""Breadth-first state-class-graph construction for the three methods."""

import time
from collections import deque
from dataclasses import dataclass, field

from . import dbm as _dbm
from . import polyhedra as _poly
from . import timedist as _td

METHODS = ("exact", "dbm", "tdis")
EQUIVALENCES = ("equality", "inclusion")
# What part of a time-distance class decides node identity:
#   dbm     - marking + approximated DBM (firing and equivalence use only this)
#   points  - additionally the relabeled enabling/inhibiting/activating points
#   full    - additionally the relabeled distance tables
#   history - additionally the recorded snapshots
TDIS_IDENTITIES = ("dbm", "points", "full", "history")


class BoundExceeded(RuntimeError):
    """Exploration hit ``max_classes`` or ``max_depth``; ``graph`` is partial."""

    def __init__(self, msg, graph):
        super().__init__(msg)
        self.graph = graph


@dataclass
class BuildOptions:
    method: str = "tdis"
    equivalence: str = "equality"
    max_classes: int = 100_000
    max_depth: int = None
    tdis_identity: str = "dbm"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.equivalence not in EQUIVALENCES:
            raise ValueError(f"unknown equivalence {self.equivalence!r}")
        if self.tdis_identity not in TDIS_IDENTITIES:
            raise ValueError(f"unknown tdis identity {self.tdis_identity!r}")
        if self.max_classes <= 0 or (self.max_depth is not None and self.max_depth < 0):
            raise ValueError("exploration bounds must be positive")


class Engine:
    """Uniform view of one construction method."""

    def __init__(self, net, method, tdis_identity="dbm"):
        self.net = net
        self.method = method
        self.tdis_identity = tdis_identity

    def initial(self):
        if self.method == "exact":
            return _poly.initial_exact(self.net)
        if self.method == "dbm":
            return _dbm.initial_dbm(self.net)
        return _td.initial_tdis(self.net)

    def firable(self, c):
        if self.method == "exact":
            return _poly.exact_firable_transitions(self.net, c)
        if self.method == "dbm":
            return _dbm.firable_transitions(self.net, c)
        return _td.firable_transitions(self.net, c)

    def successor(self, c, t):
        if self.method == "exact":
            return _poly.exact_successor(self.net, c, t)
        if self.method == "dbm":
            return _dbm.successor_dbm(self.net, c, t)
        return _td.class_successor(self.net, c, t)

    def matrix(self, c):
        """DBM view of a class (exact classes: their tightest DBM)."""
        if self.method == "exact":
            return _poly.exact_dbm(self.net, c)
        if self.method == "dbm":
            return c.D
        return c.dbm()

    def key(self, c):
        return canonical_key(c, self.method, self.tdis_identity)

    def same(self, a, b):
        """Confirm equality within a hash bucket."""
        if self.method == "exact":
            return _poly.equivalent(a.D, b.D)
        return True

    def included(self, small, big):
        if small.marking != big.marking:
            return False
        if self.method == "exact":
            return (set(small.D.vars) == set(big.D.vars)
                    and _poly.includes(big.D, small.D.with_vars(big.D.vars)))
        if self.method == "dbm":
            return small.D.leq(big.D)
        if self.tdis_identity != "dbm" and small.key("points")[3] != big.key("points")[3]:
            return False
        ms, mb = small.dbm(), big.dbm()
        if not ms.leq(mb):
            return False
        if self.tdis_identity in ("full", "history"):
            for ts, tb in zip(small.key("full")[4], big.key("full")[4]):
                if len(ts) != len(tb):
                    return False
                if any(a[:-1] != b[:-1] or a[-1] > b[-1] for a, b in zip(ts, tb)):
                    return False
        return True


def canonical_key(c, method, tdis_identity="dbm"):
    """Hashable key; equal keys mean equal classes for dbm/tdis, and a shared
    bucket (to be confirmed by mutual entailment) for exact classes."""
    if method == "dbm":
        return c.key()
    if method == "tdis":
        return c.key(tdis_identity)
    m = _poly.tightest_dbm(c.D, tuple(sorted(c.D.vars)))
    return (c.marking, m.index, m.rows)


@dataclass
class StateClassGraph:
    net: object
    method: str
    equivalence: str
    nodes: list = field(default_factory=list)
    depth: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    wall_ms: float = 0.0
    truncated: bool = False
    engine: Engine = None

    @property
    def root(self):
        return 0

    def successors(self, k):
        return [(t, d) for s, t, d in self.edges if s == k]

    def adjacency(self):
        adj = {k: [] for k in range(len(self.nodes))}
        for s, t, d in self.edges:
            adj[s].append((t, d))
        return adj

    def follow(self, sequence, start=0):
        """Node reached by an untimed sequence, or None if not a path."""
        adj = self.adjacency()
        k = start
        for t in sequence:
            nxt = [d for u, d in adj[k] if u == t]
            if not nxt:
                return None
            k = nxt[0]
        return k

    def sequences(self, depth):
        """All untimed sequences of length <= depth from the root."""
        adj = self.adjacency()
        out = {()}
        frontier = [((), 0)]
        for _ in range(depth):
            nxt = []
            for seq, k in frontier:
                for t, d in adj[k]:
                    s = seq + (t,)
                    out.add(s)
                    nxt.append((s, d))
            frontier = nxt
        return out

    def describe(self, k):
        c = self.nodes[k]
        if self.method == "tdis":
            return _td.format_class(self.net, c)
        return self.engine.matrix(c).format(self.net)


def build(net, opts=None, **kw):
    opts = opts or BuildOptions(**kw)
    eng = Engine(net, opts.method, opts.tdis_identity)
    g = StateClassGraph(net, opts.method, opts.equivalence, engine=eng)
    start = time.perf_counter()
    buckets = {}
    by_marking = {}

    def intern(c, depth):
        key = eng.key(c)
        for k in buckets.get(key, ()):
            if eng.same(c, g.nodes[k]):
                return k, False
        if opts.equivalence == "inclusion":
            for k in by_marking.get(c.marking, ()):
                if eng.included(c, g.nodes[k]):
                    return k, False
        k = len(g.nodes)
        g.nodes.append(c)
        g.depth.append(depth)
        buckets.setdefault(key, []).append(k)
        by_marking.setdefault(c.marking, []).append(k)
        return k, True

    intern(eng.initial(), 0)
    queue = deque([0])
    error = None
    while queue:
        k = queue.popleft()
        c = g.nodes[k]
        fire = eng.firable(c)
        if fire and opts.max_depth is not None and g.depth[k] >= opts.max_depth:
            g.truncated = True
            error = error or f"depth bound {opts.max_depth} reached"
            continue
        for t in fire:
            succ = eng.successor(c, t)
            d, fresh = intern(succ, g.depth[k] + 1)
            g.edges.append((k, t, d))
            if fresh:
                queue.append(d)
        if len(g.nodes) > opts.max_classes:
            g.truncated = True
            error = f"class bound {opts.max_classes} exceeded"
            break
    g.wall_ms = (time.perf_counter() - start) * 1000
    if error:
        raise BoundExceeded(error, g)
    return g


@dataclass
class GraphDiff:
    only_first: list
    only_second: list

    @property
    def empty(self):
        return not self.only_first and not self.only_second


def diff_graphs(g1, g2, depth):
    s1, s2 = g1.sequences(depth), g2.sequences(depth)
    return GraphDiff(sorted(s1 - s2, key=lambda s: (len(s), s)),
                     sorted(s2 - s1, key=lambda s: (len(s), s)))
