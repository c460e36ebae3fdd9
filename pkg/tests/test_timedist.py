import pytest

from itpn import timedist as td
from itpn.dbm import initial_dbm, successor_dbm
from itpn.model import ContractError
from itpn.polyhedra import exact_firable_transitions, initial_exact, exact_successor
from itpn.randnet import random_net

from paper_tables import CLASSES, TABLE2, as_published


def walk(net, names):
    c = td.initial_tdis(net)
    for name in names:
        c = td.class_successor(net, c, net.tindex(name))
    return c


def test_initial_distance_system_matches_table2(fig1):
    c = td.initial_tdis(fig1)
    got = as_published(fig1, c, {0: 0})
    assert got["up_t"] == TABLE2["up_t"]
    assert got["lo_t"] == TABLE2["lo_t"]
    assert c.ds.up_n[0] == 0 and c.ds.lo_n[0] == 0
    assert c.dbm().rows == initial_dbm(fig1).D.rows


@pytest.mark.parametrize("label", sorted(CLASSES))
def test_published_class(fig1, label):
    want = CLASSES[label]
    c = walk(fig1, want["path"])
    got = as_published(fig1, c, want["points"])
    for part in ("marking", "ne", "ni", "na", "dc", "up_t", "lo_t", "up_n", "lo_n"):
        assert got[part] == want[part], part


def test_inhibition_raises_min_residual_time(fig1):
    c = walk(fig1, ("t4", "t1", "t2"))
    t3 = fig1.tindex("t3")
    assert c.ds.lo_t[t3, 0] == -4
    assert c.dc[t3, fig1.tindex("t5")] == -1


def test_e6_only_fires_t6(fig1):
    c = walk(fig1, ("t4", "t1", "t2", "t5"))
    assert td.firable_transitions(fig1, c) == (fig1.tindex("t6"),)
    d = initial_dbm(fig1)
    for name in ("t4", "t1", "t2", "t5"):
        d = successor_dbm(fig1, d, fig1.tindex(name))
    from itpn.dbm import firable_transitions
    assert set(firable_transitions(fig1, d)) == {fig1.tindex("t3"), fig1.tindex("t6")}


def test_both_paths_to_e6_agree_on_the_dbm(fig1):
    a = walk(fig1, ("t4", "t1", "t2", "t5"))
    b = walk(fig1, ("t4", "t1", "t5", "t2"))
    assert a.marking == b.marking
    assert a.dbm().rows == b.dbm().rows


def test_e10_keeps_the_spurious_t2(fig1):
    # firing t3 drops the points that would rule t2 out; exact semantics disagree
    c = walk(fig1, ("t4", "t1", "t5", "t3"))
    assert fig1.tindex("t2") in td.firable_transitions(fig1, c)
    e = initial_exact(fig1)
    for name in ("t4", "t1", "t5", "t3"):
        e = exact_successor(fig1, e, fig1.tindex(name))
    assert fig1.tindex("t2") not in exact_firable_transitions(fig1, e)


def test_point_maps_only_keep_live_points(fig1):
    c = walk(fig1, ("t4", "t1", "t2", "t5"))
    assert c.points == (0, 1, 4)
    assert set(c.ds.points) == {0, 1}


def test_firing_a_non_firable_transition_is_rejected(fig1):
    c = td.initial_tdis(fig1)
    with pytest.raises(ContractError):
        td.class_successor(fig1, c, fig1.tindex("t2"))


def test_lambda_and_beta_on_initial_class(fig1):
    c = td.initial_tdis(fig1)
    assert td.lam(fig1, c) == {0: 2}
    b = td.beta_c(fig1, c)
    assert b[fig1.tindex("t4")] == 0
    assert b[fig1.tindex("t1")] == -1


@pytest.mark.parametrize("seed", range(12))
def test_agrees_with_dbm_on_nets_without_inhibitors(seed):
    net = random_net(seed, inhibitors=False)
    stack = [((), td.initial_tdis(net), initial_dbm(net))]
    while stack:
        seq, c, d = stack.pop()
        assert c.dbm().rows == d.D.rows, seq
        if len(seq) == 5:
            continue
        fire = td.firable_transitions(net, c)
        assert fire == tuple(sorted(fire))
        from itpn.dbm import firable_transitions
        assert set(fire) == set(firable_transitions(net, d))
        for t in fire:
            stack.append((seq + (t,), td.class_successor(net, c, t), successor_dbm(net, d, t)))
