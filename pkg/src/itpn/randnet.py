"""Seeded random small nets for differential and property testing."""

import random

from .model import Net, enabled_set


def random_net(seed, max_places=6, max_transitions=6, max_inhibitors=2, max_bound=5,
               inhibitors=True, allow_inf=False):
    rng = random.Random(seed)
    while True:
        np_ = rng.randint(2, max_places)
        nt = rng.randint(2, max_transitions)
        places = [f"p{i}" for i in range(np_)]
        trans = {}
        arcs = []
        for j in range(nt):
            lo = rng.randint(0, max_bound)
            hi = rng.randint(lo, max_bound)
            if allow_inf and rng.random() < 0.15:
                hi = "inf"
            name = f"t{j}"
            trans[name] = (lo, hi)
            for p in rng.sample(places, rng.randint(1, min(2, np_))):
                arcs.append((p, name, 1))
            for p in rng.sample(places, rng.randint(0, min(2, np_))):
                arcs.append((name, p, 1))
        inh = []
        if inhibitors:
            for _ in range(rng.randint(0, max_inhibitors)):
                inh.append((rng.choice(places), rng.choice(list(trans)), 1))
            inh = list({(p, t): (p, t, w) for p, t, w in inh}.values())
        marking = {p: 1 for p in places if rng.random() < 0.5}
        net = Net.build(places, trans, arcs, inh, marking)
        if enabled_set(net, net.m0):
            return net
