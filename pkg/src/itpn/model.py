"""Inhibitor-arc time Petri nets: structure, marking predicates and the
dense-time concrete semantics (one clock per enabled transition)."""

from dataclasses import dataclass, field
from fractions import Fraction
import random

from .bound import INF, as_bound, bmin, fmt


class ContractError(ValueError):
    """An operation was called outside of its precondition."""


class RejectedStep(ContractError):
    """A concrete firing step violates the firing rule."""


@dataclass(frozen=True)
class Net:
    """Static ITPN ``(P, T, B, F, M0, I, IH)``.

    ``pre``, ``post`` and ``inhib`` are tuples indexed ``[place][transition]``.
    Static intervals are ``(tmin, tmax)`` pairs with ``tmax`` possibly ``INF``.
    """

    places: tuple
    transitions: tuple
    pre: tuple
    post: tuple
    inhib: tuple
    intervals: tuple
    m0: tuple
    _tindex: dict = field(init=False, repr=False, compare=False, hash=False)
    _pindex: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        np, nt = len(self.places), len(self.transitions)
        if len(set(self.places)) != np or len(set(self.transitions)) != nt:
            raise ContractError("duplicate place or transition names")
        for mat in (self.pre, self.post, self.inhib):
            if len(mat) != np or any(len(row) != nt for row in mat):
                raise ContractError("incidence matrix shape mismatch")
            if any(w < 0 for row in mat for w in row):
                raise ContractError("negative arc weight")
        if len(self.intervals) != nt or len(self.m0) != np:
            raise ContractError("interval/marking size mismatch")
        for name, (lo, hi) in zip(self.transitions, self.intervals):
            if lo is INF or lo < 0 or hi < lo:
                raise ContractError(f"empty static interval for {name}")
        object.__setattr__(self, "_tindex", {t: i for i, t in enumerate(self.transitions)})
        object.__setattr__(self, "_pindex", {p: i for i, p in enumerate(self.places)})

    @classmethod
    def build(cls, places, transitions, arcs=(), inhibitors=(), marking=None):
        """Convenience constructor from names.

        ``transitions`` maps name -> (tmin, tmax); ``arcs`` holds
        ``(src, dst, weight)`` triples in either direction; ``inhibitors``
        holds ``(place, transition, weight)``; ``marking`` maps place -> tokens.
        """
        places = tuple(places)
        tnames = tuple(transitions)
        pi = {p: i for i, p in enumerate(places)}
        ti = {t: i for i, t in enumerate(tnames)}
        pre = [[0] * len(tnames) for _ in places]
        post = [[0] * len(tnames) for _ in places]
        inh = [[0] * len(tnames) for _ in places]
        for arc in arcs:
            src, dst = arc[0], arc[1]
            w = arc[2] if len(arc) > 2 else 1
            if src in pi and dst in ti:
                pre[pi[src]][ti[dst]] += w
            elif src in ti and dst in pi:
                post[pi[dst]][ti[src]] += w
            else:
                raise ContractError(f"bad arc {src} -> {dst}")
        for arc in inhibitors:
            p, t = arc[0], arc[1]
            w = arc[2] if len(arc) > 2 else 1
            inh[pi[p]][ti[t]] = w
        m0 = tuple((marking or {}).get(p, 0) for p in places)
        intervals = tuple((as_bound(lo), as_bound(hi)) for lo, hi in
                          (transitions[t] for t in tnames))
        return cls(places, tnames, tuple(map(tuple, pre)), tuple(map(tuple, post)),
                   tuple(map(tuple, inh)), intervals, m0)

    def tindex(self, name):
        if isinstance(name, int):
            return name
        try:
            return self._tindex[name]
        except KeyError:
            raise ContractError(f"unknown transition {name!r}") from None

    def pindex(self, name):
        return self._pindex[name]

    def tmin(self, t):
        return self.intervals[t][0]

    def tmax(self, t):
        return self.intervals[t][1]

    @property
    def has_inhibitors(self):
        return any(w for row in self.inhib for w in row)

    def marking(self, mapping):
        return tuple(mapping.get(p, 0) for p in self.places)

    def marking_str(self, m):
        return ",".join(f"{p}" if k == 1 else f"{p}*{k}"
                        for p, k in zip(self.places, m) if k)


def enabled_set(net, m):
    """Transitions whose preset is covered by ``m``, as a sorted tuple of indices."""
    return tuple(t for t in range(len(net.transitions))
                 if all(net.pre[p][t] <= m[p] for p in range(len(net.places))))


def is_inhibited(net, m, t):
    return any(0 < net.inhib[p][t] <= m[p] for p in range(len(net.places)))


def split_status(net, m):
    """Return ``(activated, inhibited)`` partitions of the enabled set."""
    ta, ti = [], []
    for t in enabled_set(net, m):
        (ti if is_inhibited(net, m, t) else ta).append(t)
    return tuple(ta), tuple(ti)


def conflicting(net, m, t1, t2):
    en = enabled_set(net, m)
    if t1 == t2 or t1 not in en or t2 not in en:
        raise ContractError("conflict test needs two distinct enabled transitions")
    return any(net.pre[p][t1] + net.pre[p][t2] > m[p] for p in range(len(net.places)))


def fire_marking(net, m, t):
    if t not in enabled_set(net, m):
        raise ContractError(f"{net.transitions[t]} is not enabled")
    return tuple(m[p] - net.pre[p][t] + net.post[p][t] for p in range(len(net.places)))


def newly_enabled(net, m, tf, m_next):
    """Transitions newly enabled in ``m_next`` after firing ``tf`` from ``m``.

    The fired transition itself is always newly enabled when it stays enabled
    (a transition conflicts with its own firing).
    """
    before = set(enabled_set(net, m))
    new = []
    for t in enabled_set(net, m_next):
        if t not in before or t == tf or conflicting(net, m, t, tf):
            new.append(t)
    return tuple(new)


@dataclass(frozen=True)
class ConcreteState:
    marking: tuple
    clocks: tuple  # ((t, x, y), ...) sorted by t

    @classmethod
    def initial(cls, net):
        return cls(net.m0, tuple((t, *net.intervals[t]) for t in enabled_set(net, net.m0)))

    def interval(self, t):
        for u, x, y in self.clocks:
            if u == t:
                return x, y
        raise KeyError(t)

    def firing_window(self, net, tf):
        """``(x(tf), MIN y over activated)`` or None when ``tf`` cannot fire."""
        ta, _ = split_status(net, self.marking)
        if tf not in ta:
            return None
        upper = bmin(self.interval(t)[1] for t in ta)
        lo = self.interval(tf)[0]
        if lo > upper:
            return None
        return lo, upper


def sim_step(net, s, tf, theta):
    tf = net.tindex(tf)
    theta = Fraction(theta)
    window = s.firing_window(net, tf)
    if window is None:
        raise RejectedStep(f"{net.transitions[tf]} is not firable")
    lo, hi = window
    if not lo <= theta <= hi:
        raise RejectedStep(f"delay {theta} outside [{fmt(lo)}, {fmt(hi)}]")
    ta, _ = split_status(net, s.marking)
    m_next = fire_marking(net, s.marking, tf)
    new = set(newly_enabled(net, s.marking, tf, m_next))
    clocks = []
    for t in enabled_set(net, m_next):
        if t in new:
            clocks.append((t, *net.intervals[t]))
        else:
            x, y = s.interval(t)
            if t in ta:
                clocks.append((t, max(Fraction(0), x - theta), y - theta))
            else:
                clocks.append((t, x, y))
    return ConcreteState(m_next, tuple(clocks))


@dataclass
class Run:
    steps: list
    deadlocked: bool = False

    def untimed(self):
        return tuple(t for t, _ in self.steps)


DELAY_GRID = 8
UNBOUNDED_SPAN = 10


def random_run(net, length, seed):
    """Random timed run; delays are multiples of 1/8 from the legal window.

    An unbounded window is truncated to ``UNBOUNDED_SPAN`` time units above its
    lower end.  The run stops early (``deadlocked=True``) when nothing can fire.
    """
    rng = random.Random(seed)
    state = ConcreteState.initial(net)
    run = Run([])
    for _ in range(length):
        ta, _ = split_status(net, state.marking)
        choices = [(t, w) for t in ta if (w := state.firing_window(net, t)) is not None]
        if not choices:
            run.deadlocked = True
            break
        t, (lo, hi) = rng.choice(choices)
        if hi is INF:
            hi = lo + UNBOUNDED_SPAN
        k = rng.randint(0, int((hi - lo) * DELAY_GRID))
        theta = lo + Fraction(k, DELAY_GRID)
        state = sim_step(net, state, t, theta)
        run.steps.append((t, theta))
    return run


def replay(net, steps):
    state = ConcreteState.initial(net)
    for t, theta in steps:
        state = sim_step(net, state, t, theta)
    return state
