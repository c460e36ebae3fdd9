"""The ``.itpn`` model format and DOT/stats serialization."""

import json
import os
import re
from fractions import Fraction
from importlib import resources

from .bound import INF, as_bound, fmt
from .model import ContractError, Net


class ParseError(ValueError):
    def __init__(self, lineno, msg):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


_NAME = r"[A-Za-z_][\w.']*"
_NUM = r"\d+(?:\.\d+)?(?:/\d+)?"
_PLACE = re.compile(rf"place\s+({_NAME})(?:\s+(\d+))?$")
_TRANS = re.compile(rf"trans\s+({_NAME})\s*\[\s*({_NUM})\s*,\s*({_NUM}|inf)\s*\]$")
_ARC = re.compile(rf"arc\s+({_NAME})\s*->\s*({_NAME})(?:\s+(\d+))?$")
_INHIB = re.compile(rf"inhibit\s+({_NAME})\s*-o\s*({_NAME})(?:\s+(\d+))?$")


def parse_model(text):
    places, marking, trans = [], {}, {}
    arcs, inhibitors = [], []
    pset = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _PLACE.match(line):
            name = m.group(1)
            if name in pset or name in trans:
                raise ParseError(lineno, f"duplicate name {name}")
            places.append(name)
            pset.add(name)
            marking[name] = int(m.group(2) or 0)
        elif m := _TRANS.match(line):
            name = m.group(1)
            if name in pset or name in trans:
                raise ParseError(lineno, f"duplicate name {name}")
            lo, hi = as_bound(m.group(2)), as_bound(m.group(3))
            if hi < lo:
                raise ParseError(lineno, "empty static interval")
            trans[name] = (lo, hi)
        elif m := _ARC.match(line):
            src, dst, w = m.group(1), m.group(2), int(m.group(3) or 1)
            if not ((src in pset and dst in trans) or (src in trans and dst in pset)):
                raise ParseError(lineno, f"arc {src} -> {dst} must join a declared place and transition")
            if w <= 0:
                raise ParseError(lineno, "arc weight must be positive")
            arcs.append((src, dst, w))
        elif m := _INHIB.match(line):
            p, t, w = m.group(1), m.group(2), int(m.group(3) or 1)
            if p not in pset or t not in trans:
                raise ParseError(lineno, f"unknown identifier in inhibitor arc {p} -o {t}")
            if w <= 0:
                raise ParseError(lineno, "inhibitor weight must be positive")
            inhibitors.append((p, t, w))
        else:
            raise ParseError(lineno, f"cannot parse {line!r}")
    try:
        return Net.build(places, trans, arcs, inhibitors, marking)
    except ContractError as e:
        raise ParseError(0, str(e)) from None


def _num(b):
    if b is INF:
        return "inf"
    b = Fraction(b)
    if b.denominator == 1:
        return str(b.numerator)
    # decimal when exact, fraction otherwise
    d = b.denominator
    k = 0
    while d % 2 == 0 or d % 5 == 0:
        d //= 2 if d % 2 == 0 else 5
        k += 1
    if d == 1:
        s = f"{b.numerator * 10**k // b.denominator}"
        s = s.rjust(k + 1, "0")
        return s[:-k] + "." + s[-k:]
    return f"{b.numerator}/{b.denominator}"


def print_model(net):
    lines = []
    for p, k in zip(net.places, net.m0):
        lines.append(f"place {p} {k}" if k else f"place {p}")
    for t, (lo, hi) in zip(net.transitions, net.intervals):
        lines.append(f"trans {t} [{_num(lo)},{_num(hi)}]")
    for pi, p in enumerate(net.places):
        for ti, t in enumerate(net.transitions):
            w = net.pre[pi][ti]
            if w:
                lines.append(f"arc {p} -> {t}" + (f" {w}" if w != 1 else ""))
    for pi, p in enumerate(net.places):
        for ti, t in enumerate(net.transitions):
            w = net.post[pi][ti]
            if w:
                lines.append(f"arc {t} -> {p}" + (f" {w}" if w != 1 else ""))
    for pi, p in enumerate(net.places):
        for ti, t in enumerate(net.transitions):
            w = net.inhib[pi][ti]
            if w:
                lines.append(f"inhibit {p} -o {t}" + (f" {w}" if w != 1 else ""))
    return "\n".join(lines) + "\n"


def load_model(path):
    """Read a model file; a bare name of a bundled fixture also works."""
    if not os.path.exists(path) and os.sep not in path:
        bundled = resources.files("itpn.data").joinpath(path)
        if bundled.is_file():
            return parse_model(bundled.read_text())
    with open(path) as f:
        return parse_model(f.read())


def fixture_text(name):
    return resources.files("itpn.data").joinpath(name).read_text()


def fixture(name="fig1.itpn"):
    return parse_model(fixture_text(name))


def _quote(s):
    # labels carry DOT escapes (\n, \l) on purpose; only quotes need escaping
    return '"' + str(s).replace('"', '\\"') + '"'


def export_dot(net, g, verbosity="marking"):
    """Render a built graph; ``verbosity`` is ``id``, ``marking`` or ``full``."""
    lines = ["digraph scg {", "  node [shape=box, fontname=monospace];"]
    for k, node in enumerate(g.nodes):
        label = f"E{k}"
        if verbosity in ("marking", "full"):
            label += "\\n" + net.marking_str(node.marking)
        if verbosity == "full":
            label += "\\n" + g.describe(k).replace("\n", "\\l") + "\\l"
        lines.append(f"  n{k} [label={_quote(label)}];")
    for src, t, dst in g.edges:
        lines.append(f"  n{src} -> n{dst} [label={_quote(net.transitions[t])}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def stats_record(g, wall_ms=None):
    return {
        "method": g.method,
        "classes": len(g.nodes),
        "edges": len(g.edges),
        "time_ms": round(g.wall_ms if wall_ms is None else wall_ms, 3),
        "equivalence": g.equivalence,
        "truncated": g.truncated,
    }


def dump_stats(record):
    return json.dumps(record, sort_keys=True)
