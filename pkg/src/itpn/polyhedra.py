"""Exact rational linear systems and the exact state-class construction.

Systems are conjunctions of ``sum(a_i * x_i) <= b`` with integer ``a_i`` and
rational ``b``; projection is Fourier-Motzkin elimination.  Everything here is
exponential in the worst case and meant as a ground-truth oracle for small
instances, hence the hard size budget.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .bound import INF, bmin
from .dbm import BULLET, DbmMatrix
from .model import ContractError, enabled_set, fire_marking, newly_enabled, split_status

MAX_CONSTRAINTS = 512
MAX_VARIABLES = 24


class OracleBudgetExceeded(RuntimeError):
    pass


class Inconsistent(ContractError):
    pass


def _normalize(coeffs, bound):
    g = gcd(*coeffs)
    if g > 1:
        coeffs = tuple(a // g for a in coeffs)
        bound = Fraction(bound) / g
    return coeffs, bound


class LinearSystem:
    """Immutable system over the ordered variable tuple ``vars``.

    ``rows`` maps an integer coefficient tuple to its tightest bound.  A row
    with all-zero coefficients is a constant check ``0 <= b``; a negative
    constant makes the system infeasible.
    """

    __slots__ = ("vars", "rows", "_pos", "_hist", "_elim")

    def __init__(self, variables, rows=None):
        self.vars = tuple(variables)
        self.rows = {}
        # origin sets for Chernikov's rule, only set inside an elimination run
        self._hist = None
        self._elim = 0
        self._pos = {v: i for i, v in enumerate(self.vars)}
        if len(self._pos) != len(self.vars):
            raise ContractError("duplicate variable")
        for coeffs, b in (rows or {}).items():
            self._add(tuple(coeffs), b)

    def _add(self, coeffs, b, hist=None):
        if b is INF:
            return
        if len(coeffs) != len(self.vars):
            raise ContractError("coefficient vector does not match variables")
        coeffs, b = _normalize(coeffs, b)
        if not any(coeffs):
            if b >= 0:
                return
        old = self.rows.get(coeffs)
        if old is None or b < old:
            self.rows[coeffs] = b if type(b) is Fraction else Fraction(b)
            if self._hist is not None:
                self._hist[coeffs] = hist
        elif b == old and self._hist is not None and len(hist) < len(self._hist[coeffs]):
            self._hist[coeffs] = hist

    @classmethod
    def from_constraints(cls, variables, constraints):
        """``constraints`` is an iterable of ``({var: coeff}, bound)``."""
        s = cls(variables)
        for form, b in constraints:
            s.add(form, b)
        return s

    def add(self, form, b):
        self._hist = None
        self._elim = 0
        coeffs = [0] * len(self.vars)
        for v, a in form.items():
            coeffs[self._pos[v]] += a
        self._add(tuple(coeffs), b)
        return self

    def copy(self):
        s = LinearSystem(self.vars)
        s.rows = dict(self.rows)
        return s

    def __len__(self):
        return len(self.rows)

    def constraints(self):
        """Rows as ``({var: coeff}, bound)`` pairs, in a stable order."""
        out = []
        for coeffs in sorted(self.rows):
            form = {v: a for v, a in zip(self.vars, coeffs) if a}
            out.append((form, self.rows[coeffs]))
        return out

    def infeasible_marker(self):
        zero = (0,) * len(self.vars)
        return zero in self.rows

    def with_vars(self, variables):
        """Re-express over a superset/reordering of the current variables."""
        s = LinearSystem(variables)
        for form, b in self.constraints():
            s.add(form, b)
        return s

    def substitute(self, target, source_coeffs):
        """Replace ``target`` by ``target + sum(c * v)`` for ``{v: c}``.

        Used for the time-progression shift ``t := t_f + t'``.
        """
        ti = self._pos[target]
        s = LinearSystem(self.vars)
        for coeffs, b in self.rows.items():
            a = coeffs[ti]
            if a:
                c = list(coeffs)
                for v, k in source_coeffs.items():
                    c[self._pos[v]] += a * k
                coeffs = tuple(c)
            s._add(coeffs, b)
        return s

    def rename(self, mapping):
        return LinearSystem(tuple(mapping.get(v, v) for v in self.vars), self.rows)

    def __repr__(self):
        parts = []
        for form, b in self.constraints():
            lhs = " + ".join(f"{a}*{v}" for v, a in form.items()) or "0"
            parts.append(f"{lhs} <= {b}")
        return "LinearSystem(" + "; ".join(parts) + ")"


def _check_budget(s):
    if len(s.vars) > MAX_VARIABLES or len(s.rows) > MAX_CONSTRAINTS:
        raise OracleBudgetExceeded(
            f"system with {len(s.vars)} variables / {len(s.rows)} constraints")


def fm_eliminate(s, x):
    """Project ``x`` out of ``s`` by Fourier-Motzkin pairing.

    Each row remembers which input rows it was combined from.  After k
    eliminations a row built from more than k + 1 of them is implied by the
    others (Chernikov) and is dropped on the spot.
    """
    hist = s._hist
    if hist is None:
        hist = {c: frozenset((i,)) for i, c in enumerate(sorted(s.rows))}
    j = s._pos[x]
    keep = s.vars[:j] + s.vars[j + 1:]
    out = LinearSystem(keep)
    out._hist = {}
    out._elim = s._elim + 1
    limit = out._elim + 1
    pos, neg = [], []
    for coeffs, b in s.rows.items():
        a = coeffs[j]
        if a > 0:
            pos.append((coeffs, b))
        elif a < 0:
            neg.append((coeffs, b))
        else:
            out._add(coeffs[:j] + coeffs[j + 1:], b, hist[coeffs])
    for cp, bp in pos:
        ap = cp[j]
        hp = hist[cp]
        for cn, bn in neg:
            h = hp | hist[cn]
            if len(h) > limit:
                continue
            an = -cn[j]
            coeffs = tuple(an * u + ap * v for u, v in zip(cp, cn))
            out._add(coeffs[:j] + coeffs[j + 1:], an * bp + ap * bn, h)
        if len(out.rows) > MAX_CONSTRAINTS:
            _check_budget(out)
    _check_budget(out)
    return out


def _elimination_cost(s, j):
    p = n = 0
    for coeffs in s.rows:
        if coeffs[j] > 0:
            p += 1
        elif coeffs[j] < 0:
            n += 1
    return p * n - p - n


def eliminate_all(s, keep=()):
    """Eliminate every variable not in ``keep``, cheapest pairing first."""
    _check_budget(s)
    while True:
        if s.infeasible_marker():
            return s
        cand = [j for j, v in enumerate(s.vars) if v not in keep]
        if not cand:
            return s
        j = min(cand, key=lambda j: _elimination_cost(s, j))
        s = fm_eliminate(s, s.vars[j])


def is_consistent(s):
    return not eliminate_all(s).infeasible_marker()


def sup(s, form):
    """Exact supremum of ``sum(form[v] * v)`` over the solutions of ``s``.

    Returns ``INF`` when unbounded; raises ``Inconsistent`` on an empty system.
    """
    z = ("__objective__",)
    t = s.with_vars(s.vars + (z,))
    neg = {v: -a for v, a in form.items()}
    t.add({z: 1, **neg}, 0)
    t.add({z: -1, **form}, 0)
    r = eliminate_all(t, keep=(z,))
    if r.infeasible_marker():
        raise Inconsistent("empty solution set")
    best = INF
    for (a,), b in r.rows.items():
        if a > 0:
            best = bmin(best, b / a)
    return best


def minimize(s):
    """Drop every row implied by the remaining ones (same solution set)."""
    out = s.copy()
    if out.infeasible_marker():
        return out
    for coeffs in sorted(s.rows, key=lambda c: (sum(map(abs, c)), c), reverse=True):
        b = out.rows.pop(coeffs)
        form = {v: a for v, a in zip(out.vars, coeffs) if a}
        if not out.rows or sup(out, form) > b:
            out.rows[coeffs] = b
    return out


def entails(s, form, b):
    return b is INF or sup(s, form) <= b


def includes(big, small):
    """True iff every solution of ``small`` solves ``big`` (same variables)."""
    return all(entails(small, form, b) for form, b in big.constraints())


def equivalent(a, b):
    if set(a.vars) != set(b.vars):
        return False
    b = b.with_vars(a.vars)
    return includes(a, b) and includes(b, a)


def tightest_dbm(s, index):
    """Tightest DBM containing ``s``: exact sups of t, -t and t' - t."""
    try:
        def entry(x, y):
            if x == y:
                return 0
            if x == BULLET:
                return sup(s, {y: 1})
            if y == BULLET:
                return sup(s, {x: -1})
            return sup(s, {y: 1, x: -1})

        return DbmMatrix.from_function(index, entry)
    except Inconsistent:
        raise Inconsistent("tightest DBM of an empty system") from None


@dataclass(frozen=True)
class ExactClass:
    marking: tuple
    D: LinearSystem

    @property
    def index(self):
        return tuple(sorted(self.D.vars))


def initial_exact(net):
    en = enabled_set(net, net.m0)
    s = LinearSystem(en)
    for t in en:
        s.add({t: 1}, net.tmax(t))
        s.add({t: -1}, -net.tmin(t))
    return ExactClass(net.m0, s)


def firable_exact(net, c, tf):
    ta, _ = split_status(net, c.marking)
    if tf not in ta:
        return False
    s = c.D.copy()
    for t in ta:
        if t != tf:
            s.add({tf: 1, t: -1}, 0)
    return is_consistent(s)


def _fire_system(net, system, marking, tf, keep_as=None):
    """Shared step of the exact class and trace constructions.

    ``system`` contains one variable per enabled transition (named by the
    transition index) and possibly extra variables that are carried along.
    With ``keep_as`` the fired transition's variable is renamed to that name
    and kept (it becomes the delay of this step) instead of being eliminated.
    """
    ta, _ = split_status(net, marking)
    m_next = fire_marking(net, marking, tf)
    new = set(newly_enabled(net, marking, tf, m_next))
    en_next = enabled_set(net, m_next)
    persistent = [t for t in en_next if t not in new]

    s = system.copy()
    for t in ta:
        if t != tf:
            s.add({tf: 1, t: -1}, 0)
    for t in persistent:
        if t in ta:
            s = s.substitute(t, {tf: 1})
    if keep_as is not None:
        s = s.rename({tf: keep_as})
    gone = [v for v in s.vars if isinstance(v, int) and v not in persistent]
    for v in gone:
        s = fm_eliminate(s, v)
    s = s.with_vars(s.vars + tuple(sorted(new)))
    for t in sorted(new):
        s.add({t: 1}, net.tmax(t))
        s.add({t: -1}, -net.tmin(t))
    return m_next, s


def exact_successor(net, c, tf):
    if not firable_exact(net, c, tf):
        raise ContractError(f"{net.transitions[tf]} is not firable from this class")
    m_next, s = _fire_system(net, c.D, c.marking, tf)
    return ExactClass(m_next, minimize(s.with_vars(enabled_set(net, m_next))))


def exact_firable_transitions(net, c):
    ta, _ = split_status(net, c.marking)
    return tuple(t for t in ta if firable_exact(net, c, t))


def exact_dbm(net, c):
    return tightest_dbm(c.D, enabled_set(net, c.marking))


def delay(k):
    return ("d", k)


@dataclass(frozen=True)
class TraceSystem:
    """Delays ``d1..dn`` of one firing sequence together with current clocks."""

    marking: tuple
    depth: int
    system: LinearSystem

    def class_system(self):
        """Project the delays away, giving the exact class system."""
        s = eliminate_all(self.system, keep=tuple(v for v in self.system.vars
                                                  if isinstance(v, int)))
        return s


def initial_trace(net):
    c = initial_exact(net)
    return TraceSystem(c.marking, 0, c.D)


def trace_successor(net, tr, tf):
    ta, _ = split_status(net, tr.marking)
    if tf not in ta:
        raise ContractError(f"{net.transitions[tf]} is not activated")
    s = tr.system.copy()
    for t in ta:
        if t != tf:
            s.add({tf: 1, t: -1}, 0)
    if not is_consistent(s):
        raise ContractError(f"{net.transitions[tf]} is not firable along this trace")
    m_next, s = _fire_system(net, tr.system, tr.marking, tf, keep_as=delay(tr.depth + 1))
    return TraceSystem(m_next, tr.depth + 1, minimize(s))


ELAPSED = ("e",)


def initial_elapsed(marking, system):
    """Class system plus an elapsed-time variable, starting at zero."""
    s = system.with_vars(system.vars + (ELAPSED,))
    s.add({ELAPSED: 1}, 0)
    s.add({ELAPSED: -1}, 0)
    return TraceSystem(marking, 0, s)


def elapsed_successor(net, tr, tf):
    """Like ``trace_successor`` but folds each delay into ``ELAPSED``."""
    ta, _ = split_status(net, tr.marking)
    if tf not in ta:
        raise ContractError(f"{net.transitions[tf]} is not activated")
    step, nxt = ("d", 0), ("e", 1)
    m_next, s = _fire_system(net, tr.system, tr.marking, tf, keep_as=step)
    if not is_consistent(s):
        raise ContractError(f"{net.transitions[tf]} is not firable along this trace")
    s = s.with_vars(s.vars + (nxt,))
    s.add({nxt: 1, ELAPSED: -1, step: -1}, 0)
    s.add({nxt: -1, ELAPSED: 1, step: 1}, 0)
    s = fm_eliminate(fm_eliminate(s, step), ELAPSED).rename({nxt: ELAPSED})
    return TraceSystem(m_next, tr.depth + 1, minimize(s))


def trace_of(net, sequence):
    tr = initial_trace(net)
    for t in sequence:
        tr = trace_successor(net, tr, net.tindex(t))
    return tr


def exact_ds(net, tr, points):
    """Exact time-distance coefficients for the points ``points`` (< depth)."""
    from .timedist import DistanceSystem

    n = tr.depth
    en = enabled_set(net, tr.marking)
    wanted = sorted(set(points) - {n})
    # p_i is the time from point i to the current point: d_k = p_{k-1} - p_k
    pv = {i: ("p", i) for i in range(n)}
    clocks = tuple(v for v in tr.system.vars if not (isinstance(v, tuple) and v[0] == "d"))
    s = LinearSystem(tuple(pv.values()) + clocks)
    for form, b in tr.system.constraints():
        g = {}
        for v, a in form.items():
            if isinstance(v, tuple) and v[0] == "d":
                k = v[1]
                g[pv[k - 1]] = g.get(pv[k - 1], 0) + a
                if k < n:
                    g[pv[k]] = g.get(pv[k], 0) - a
            else:
                g[v] = g.get(v, 0) + a
        s.add(g, b)
    s = minimize(eliminate_all(s, keep=tuple(pv[i] for i in wanted) + clocks))
    up_t, lo_t, up_n, lo_n = {}, {}, {n: 0}, {n: 0}
    for i in wanted + [n]:
        span = {pv[i]: 1} if i != n else {}
        if i != n:
            up_n[i] = sup(s, span)
            lo_n[i] = sup(s, {pv[i]: -1})
        for t in en:
            form = dict(span)
            form[t] = 1
            up_t[i, t] = sup(s, form)
            lo_t[t, i] = sup(s, {v: -a for v, a in form.items()})
    return DistanceSystem(n, tuple(sorted(set(points) - {n})), en, up_t, lo_t, up_n, lo_n)


def delays_feasible(tr, delays):
    """Whether concrete delays ``delays[k-1] = d_k`` extend to a solution."""
    s = tr.system
    for k, theta in enumerate(delays, start=1):
        s = s.copy()
        s.add({delay(k): 1}, theta)
        s.add({delay(k): -1}, -theta)
    return is_consistent(s)
