"""Classical DBM overapproximation of ITPN state classes.

A matrix is indexed by the enabled transitions plus the class-entry instant
``BULLET``; entry ``[x, y]`` bounds ``y - x``.  Successors are computed
directly in normal form, without closure or polyhedral intermediates.
"""

from dataclasses import dataclass

from .bound import INF, bmin, fmt
from .model import ContractError, enabled_set, fire_marking, newly_enabled, split_status

BULLET = -1


class DeadClass(ContractError):
    """No activated transition: nothing can bound the dwelling time."""


@dataclass(frozen=True)
class DbmMatrix:
    index: tuple  # enabled transitions, ascending
    rows: tuple   # (len(index)+1)^2 bounds; position 0 is BULLET

    def _pos(self, x):
        return 0 if x == BULLET else self.index.index(x) + 1

    def __getitem__(self, key):
        x, y = key
        return self.rows[self._pos(x)][self._pos(y)]

    @classmethod
    def from_function(cls, index, entry):
        keys = (BULLET,) + tuple(index)
        return cls(tuple(index), tuple(tuple(entry(x, y) for y in keys) for x in keys))

    def keys(self):
        return (BULLET,) + self.index

    def restrict(self, index):
        return DbmMatrix.from_function(index, lambda x, y: self[x, y])

    def leq(self, other):
        """Entrywise ``self <= other`` over a shared index set."""
        if self.index != other.index:
            return False
        return all(a <= b for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb))

    def closure(self):
        """Floyd-Warshall shortest-path closure (used only as a check)."""
        keys = self.keys()
        d = {(x, y): self[x, y] for x in keys for y in keys}
        for k in keys:
            for x in keys:
                dxk = d[x, k]
                if dxk is INF:
                    continue
                for y in keys:
                    via = dxk + d[k, y]
                    if via < d[x, y]:
                        d[x, y] = via
        return DbmMatrix.from_function(self.index, lambda x, y: d[x, y])

    def format(self, net):
        names = ["*"] + [net.transitions[t] for t in self.index]
        width = max(len(n) for n in names) + 1
        out = [" " * width + "".join(n.rjust(6) for n in names)]
        for name, row in zip(names, self.rows):
            out.append(name.ljust(width) + "".join(fmt(v).rjust(6) for v in row))
        return "\n".join(out)


@dataclass(frozen=True)
class DbmClass:
    marking: tuple
    D: DbmMatrix

    def key(self):
        return (self.marking, self.D.index, self.D.rows)


def initial_dbm(net):
    en = enabled_set(net, net.m0)

    def entry(x, y):
        if x == y:
            return 0
        if x == BULLET:
            return net.tmax(y)
        if y == BULLET:
            return -net.tmin(x)
        return net.tmax(y) - net.tmin(x)

    return DbmClass(net.m0, DbmMatrix.from_function(en, entry))


def beta(net, c):
    """``beta[x] = MIN over activated t of D[x, t]`` for every index x."""
    ta, _ = split_status(net, c.marking)
    if not ta:
        raise DeadClass("no activated transition")
    return {x: bmin(c.D[x, t] for t in ta) for x in c.D.keys()}


def firable_dbm(net, c, t):
    ta, _ = split_status(net, c.marking)
    if t not in ta:
        return False
    return bmin(c.D[t, u] for u in ta) >= 0


def firable_transitions(net, c):
    ta, _ = split_status(net, c.marking)
    return tuple(t for t in ta if bmin(c.D[t, u] for u in ta) >= 0)


def successor_dbm(net, c, tf):
    if not firable_dbm(net, c, tf):
        raise ContractError(f"{net.transitions[tf]} is not firable from this class")
    D = c.D
    b = beta(net, c)
    _, ti = split_status(net, c.marking)
    inhibited = set(ti)
    m_next = fire_marking(net, c.marking, tf)
    new = set(newly_enabled(net, c.marking, tf, m_next))
    en = enabled_set(net, m_next)

    up, lo = {}, {}  # D'[*, t] and D'[t, *]
    for t in en:
        if t in new:
            up[t], lo[t] = net.tmax(t), -net.tmin(t)
        elif t in inhibited:
            lo[t] = bmin(D[t, BULLET], D[tf, BULLET] + b[t])
            up[t] = bmin(D[BULLET, t], D[tf, t] + b[BULLET])
        else:
            up[t], lo[t] = D[tf, t], b[t]

    def entry(x, y):
        if x == y:
            return 0
        if x == BULLET:
            return up[y]
        if y == BULLET:
            return lo[x]
        via = up[y] + lo[x]
        if x in new or y in new:
            return via
        xi, yi = x in inhibited, y in inhibited
        if xi == yi:
            return bmin(D[x, y], via)
        if xi:
            return bmin(D[x, y] + D[tf, BULLET], via)
        return bmin(D[x, y] + b[BULLET], via)

    return DbmClass(m_next, DbmMatrix.from_function(en, entry))
