"""Time-distance based DBM approximation of ITPN state classes.

Besides the marking, a class remembers for every enabled transition the
firing points (path depths) at which it was last enabled, inhibited and
activated, plus a *distance system*: bounds on the elapsed time between
those points and the current point, and between each point and the firing
instant of each enabled transition.  These distances are used to tighten the
DBM of transition differences beyond the classical normal-form update.
"""

from dataclasses import dataclass, field

from .bound import INF, bmin, fmt
from .dbm import BULLET, DbmMatrix, DeadClass
from .model import ContractError, enabled_set, fire_marking, newly_enabled, split_status

NONE = -1


@dataclass(frozen=True)
class DistanceSystem:
    """Four bound tables at current point ``n``.

    ``up_t[i, t]`` / ``lo_t[t, i]``: upper bound / negated lower bound on the
    time from point ``i`` to the firing of ``t``.  ``up_n[i]`` / ``lo_n[i]``:
    same for the time from ``i`` to ``n``.  Rows exist for ``points`` and ``n``.
    """

    n: int
    points: tuple
    enabled: tuple
    up_t: dict
    lo_t: dict
    up_n: dict
    lo_n: dict

    def rows(self):
        return tuple(sorted(set(self.points) | {self.n}))

    def relabel(self, mapping):
        return (
            tuple(sorted((mapping[i], t, v) for (i, t), v in self.up_t.items())),
            tuple(sorted((t, mapping[i], v) for (t, i), v in self.lo_t.items())),
            tuple(sorted((mapping[i], v) for i, v in self.up_n.items())),
            tuple(sorted((mapping[i], v) for i, v in self.lo_n.items())),
        )

    def restricted(self, points):
        """Copy keeping only the given points (plus ``n``)."""
        keep = set(points) | {self.n}
        return DistanceSystem(
            self.n, tuple(sorted(set(points) - {self.n})), self.enabled,
            {k: v for k, v in self.up_t.items() if k[0] in keep},
            {k: v for k, v in self.lo_t.items() if k[1] in keep},
            {k: v for k, v in self.up_n.items() if k in keep},
            {k: v for k, v in self.lo_n.items() if k in keep})


@dataclass(frozen=True)
class TdisClass:
    marking: tuple
    depth: int
    ne: dict
    ni: dict
    na: dict
    ds: DistanceSystem
    dc: dict  # (t, t') -> bound on t' - t, t != t'
    created: dict = field(default_factory=dict)    # point i -> {t: (DS^i[i,t], DS^i[t,i])}
    inhibited: dict = field(default_factory=dict)  # t -> {i: (DS^s[i,t], DS^s[t,i])}, s = Ni(t)

    @property
    def enabled(self):
        return self.ds.enabled

    @property
    def points(self):
        return point_set(self.ne, self.ni, self.na)

    def dc_entry(self, t, u):
        return 0 if t == u else self.dc[t, u]

    def dbm(self):
        """Full DBM view: bullet row/column from the distance system."""
        n = self.depth

        def entry(x, y):
            if x == y:
                return 0
            if x == BULLET:
                return self.ds.up_t[n, y]
            if y == BULLET:
                return self.ds.lo_t[x, n]
            return self.dc[x, y]

        return DbmMatrix.from_function(self.enabled, entry)

    def relabeling(self):
        rows = sorted(set(self.points) | {self.depth})
        return {p: k for k, p in enumerate(rows)} | {NONE: NONE}

    def key(self, identity="dbm"):
        """Identity key at the requested granularity (see graph.TDIS_IDENTITIES).

        Point numbers are relabeled order-preservingly so that classes reached
        at different depths compare equal.
        """
        d = self.dbm()
        k = (self.marking, d.index, d.rows)
        if identity == "dbm":
            return k
        mp = self.relabeling()
        k += (tuple((t, mp[self.ne[t]], mp[self.ni[t]], mp[self.na[t]])
                    for t in self.enabled),)
        if identity == "points":
            return k
        k += (self.ds.relabel(mp),)
        if identity == "history":
            k += (
                tuple(sorted((mp[i], tuple(sorted(row.items())))
                             for i, row in self.created.items())),
                tuple(sorted((t, tuple(sorted((mp[i], v) for i, v in row.items())))
                             for t, row in self.inhibited.items())),
            )
        return k


def point_set(ne, ni, na):
    return tuple(sorted({v for f in (ne, ni, na) for v in f.values()} - {NONE}))


def initial_tdis(net):
    m = net.m0
    en = enabled_set(net, m)
    ta, _ = split_status(net, m)
    ne = {t: 0 for t in en}
    ni = {t: (NONE if t in ta else 0) for t in en}
    na = {t: (0 if t in ta else NONE) for t in en}
    up_t = {(0, t): net.tmax(t) for t in en}
    lo_t = {(t, 0): -net.tmin(t) for t in en}
    ds = DistanceSystem(0, (0,), en, up_t, lo_t, {0: 0}, {0: 0})
    dc = {(t, u): net.tmax(u) - net.tmin(t) for t in en for u in en if t != u}
    created = {0: {t: (up_t[0, t], lo_t[t, 0]) for t in en}}
    inhibited = {t: {0: (up_t[0, t], lo_t[t, 0])} for t in en if ni[t] == 0}
    return TdisClass(m, 0, ne, ni, na, ds, dc, created, inhibited)


def update_points(net, c, tf, m_next):
    """Advance last enabling/inhibiting/activating points; returns (ne, ni, na)."""
    n = c.depth + 1
    ta_prev, ti_prev = split_status(net, c.marking)
    ta, ti = split_status(net, m_next)
    new = set(newly_enabled(net, c.marking, tf, m_next))
    ne, ni, na = {}, {}, {}
    for t in enabled_set(net, m_next):
        if t in new:
            ne[t] = n
            ni[t] = n if t in ti else NONE
            na[t] = n if t in ta else NONE
        else:
            ne[t] = c.ne[t]
            ni[t] = n if (t in ta_prev and t in ti) else c.ni[t]
            na[t] = n if (t in ta and t in ti_prev) else c.na[t]
    return ne, ni, na


def lam(net, c):
    """Per row ``i``: MIN over activated t of ``DS[i, t]`` (max time to next firing)."""
    ta, _ = split_status(net, c.marking)
    if not ta:
        raise DeadClass("no activated transition")
    return {i: bmin(c.ds.up_t[i, t] for t in ta) for i in c.ds.rows()}


def beta_c(net, c):
    ta, _ = split_status(net, c.marking)
    return {t: bmin(c.dc_entry(t, u) for u in ta) for t in c.enabled}


def firable_tdis(net, c, t):
    ta, _ = split_status(net, c.marking)
    if t not in ta:
        return False
    return bmin(c.dc_entry(t, u) for u in ta) >= 0


def firable_transitions(net, c):
    ta, _ = split_status(net, c.marking)
    return tuple(t for t in ta if bmin(c.dc_entry(t, u) for u in ta) >= 0)


class MissingHistory(ContractError):
    pass


def _hist(table, a, b):
    try:
        return table[a][b]
    except KeyError:
        raise MissingHistory(f"no recorded distance for {a}/{b}") from None


def ds_successor(net, c, tf, m_next, points_maps, extra_points=()):
    """Distance system at the next point.

    ``extra_points`` forces additional (earlier) points to be carried, which
    the quantitative analysis uses to re-extend a dropped origin.  Returns
    ``(ds, created, inhibited)``.
    """
    ne, ni, na = points_maps
    n = c.depth + 1
    prev = n - 1
    old = c.ds
    ta_prev, ti_prev = split_status(net, c.marking)
    inh_prev = set(ti_prev)
    lm = lam(net, c)
    bc = beta_c(net, c)
    new = set(newly_enabled(net, c.marking, tf, m_next))
    en = enabled_set(net, m_next)
    pts = tuple(sorted(set(point_set(ne, ni, na)) | set(extra_points)))
    past = [i for i in pts if i < n]

    up_n, lo_n = {n: 0}, {n: 0}
    for i in past:
        up_n[i] = lm[i]
        lo_n[i] = old.lo_t[tf, i]

    up_t, lo_t = {}, {}
    for t in en:
        if t in new:
            hi, lo = net.tmax(t), -net.tmin(t)
            for i in past:
                up_t[i, t] = up_n[i] + hi
                lo_t[t, i] = lo_n[i] + lo
            up_t[n, t], lo_t[t, n] = hi, lo
            continue
        r = ne[t]
        if t not in inh_prev:
            s, p = c.ni[t], na[t]
            for i in past:
                ups = [old.up_t[i, t], up_n[i] + old.up_t[prev, t] + old.lo_t[tf, prev]]
                los = [old.lo_t[t, i], lo_n[i] + bmin(0, old.lo_t[t, prev] + lm[prev])]
                if s != NONE and i <= s <= p:
                    u, l = _hist(c.inhibited, t, i)
                    ups.append(u + lm[s] + lo_n[p])
                    los.append(l + old.lo_t[tf, s] + up_n[p])
                if s != NONE and s <= i <= p:
                    u, l = _hist(c.created, i, t)
                    ups.append(u + up_n[i] + lo_n[p])
                    los.append(l + lo_n[i] + up_n[p])
                up_t[i, t], lo_t[t, i] = bmin(ups), bmin(los)
            lo_t[t, n] = bmin(bc[t], bmin(0, lo_t[t, r] + up_n[r]))
            up_t[n, t] = bmin(c.dc[tf, t], up_t[r, t] + lo_n[r])
            # i -> n -> t with the fresh [n, t], tighter than going via n-1
            for i in past:
                up_t[i, t] = bmin(up_t[i, t], up_n[i] + up_t[n, t])
        else:
            s = ni[t]
            for i in past:
                ups = [old.up_t[i, t] + lm[prev]]
                los = [old.lo_t[t, i] + old.lo_t[tf, prev]]
                if i <= s:
                    u, l = _hist(c.inhibited, t, i)
                    ups.append(u + up_n[s])
                    los.append(l + lo_n[s])
                if s <= i:
                    u, l = _hist(c.created, i, t)
                    ups.append(u + up_n[i])
                    los.append(l + lo_n[i])
                up_t[i, t], lo_t[t, i] = bmin(ups), bmin(los)
            up_t[n, t] = bmin(up_t[r, t] + lo_n[r], old.up_t[prev, t],
                              c.dc[tf, t] + lm[prev])
            lo_t[t, n] = bmin(bmin(0, lo_t[t, r] + up_n[r]), old.lo_t[t, prev],
                              old.lo_t[tf, prev] + bc[t])

    ds = DistanceSystem(n, tuple(i for i in pts if i != n), en, up_t, lo_t, up_n, lo_n)

    keep = set(pts)
    created = {i: {t: v for t, v in row.items() if t in en}
               for i, row in c.created.items() if i in keep}
    if n in keep:
        created[n] = {t: (up_t[n, t], lo_t[t, n]) for t in en}
    inhibited = {}
    for t in en:
        if ni[t] == n:
            inhibited[t] = {i: (up_t[i, t], lo_t[t, i]) for i in pts + (n,) if i <= n}
        elif ni[t] != NONE:
            inhibited[t] = {i: v for i, v in c.inhibited[t].items() if i in keep}
    return ds, created, inhibited


def dc_successor(net, c, tf, m_next, ds):
    """Transition-difference DBM at the next point, tightened by the distances."""
    n = ds.n
    _, ti_prev = split_status(net, c.marking)
    inh_prev = set(ti_prev)
    new = set(newly_enabled(net, c.marking, tf, m_next))
    en = ds.enabled
    rows = ds.rows()
    dwell = None
    shift = c.ds.lo_t[tf, c.depth]  # -(minimal delay of this step)
    dc = {}
    for t in en:
        for u in en:
            if t == u:
                continue
            if t in new or u in new:
                dc[t, u] = ds.up_t[n, u] + ds.lo_t[t, n]
                continue
            alpha = bmin(ds.up_t[i, u] + ds.lo_t[t, i] for i in rows)
            ti, ui = t in inh_prev, u in inh_prev
            if ti == ui:
                dc[t, u] = bmin(c.dc[t, u], alpha)
            elif ti:
                dc[t, u] = bmin(c.dc[t, u] + shift, alpha)
            else:
                if dwell is None:
                    dwell = lam(net, c)[c.depth]
                dc[t, u] = bmin(c.dc[t, u] + dwell, alpha)
    return dc


def class_successor(net, c, tf, extra_points=()):
    if not firable_tdis(net, c, tf):
        raise ContractError(f"{net.transitions[tf]} is not firable from this class")
    m_next = fire_marking(net, c.marking, tf)
    maps = update_points(net, c, tf, m_next)
    ds, created, inhibited = ds_successor(net, c, tf, m_next, maps, extra_points)
    dc = dc_successor(net, c, tf, m_next, ds)
    return TdisClass(m_next, c.depth + 1, *maps, ds, dc, created, inhibited)


def format_class(net, c):
    name = net.transitions.__getitem__
    rows = c.ds.rows()
    out = [f"M: {net.marking_str(c.marking)}"]
    for label, f in (("Ne", c.ne), ("Ni", c.ni), ("Na", c.na)):
        out.append(f"{label}: " + ", ".join(f"{name(t)}->{f[t]}" for t in c.enabled))
    out.append("Dc:")
    for t in c.enabled:
        out.append(f"  {name(t)}: " + ", ".join(fmt(c.dc_entry(t, u)) for u in c.enabled))
    out.append("DS[i,t]:")
    for i in rows:
        out.append(f"  {i}: " + ", ".join(fmt(c.ds.up_t[i, t]) for t in c.enabled))
    out.append("DS[t,i]:")
    for i in rows:
        out.append(f"  {i}: " + ", ".join(fmt(c.ds.lo_t[t, i]) for t in c.enabled))
    out.append("DS[i,n]: " + ", ".join(f"{i}:{fmt(c.ds.up_n[i])}" for i in rows))
    out.append("DS[n,i]: " + ", ".join(f"{i}:{fmt(c.ds.lo_n[i])}" for i in rows))
    return "\n".join(out)
