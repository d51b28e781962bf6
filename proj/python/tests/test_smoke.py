import pathlib

import pytest

import mpnet

SAMPLES = pathlib.Path(__file__).resolve().parents[2] / "samples"


def load(name, ranks):
    return mpnet.build_mpi((SAMPLES / name).read_text(), ranks)


def test_build_produces_areas_per_rank_and_broker():
    net = load("allsendone_v1.mpl", 3)
    assert net["version"] == 1
    assert net["addressSpace"] == [0, 1, 2, 3]
    assert [a["name"] for a in net["areas"]] == ["rank0", "rank1", "rank2", "broker"]


def test_explore_v1_orders():
    result = mpnet.Simulator(load("allsendone_v1.mpl", 3)).explore()
    assert result["orderings"] == ["1-2"]
    assert result["deadlocks"] == 0
    assert not result["limit_exceeded"]


def test_explore_v2_all_permutations():
    result = mpnet.Simulator(load("allsendone_v2.mpl", 3)).explore()
    assert result["orderings"] == ["1-2", "2-1"]


def test_fire_and_reset_restore_hash():
    sim = mpnet.Simulator(load("allsendone_v2.mpl", 3))
    start = sim.state_hash
    candidates = sim.enabled()
    assert candidates
    sim.fire(0)
    assert sim.state_hash != start
    sim.reset()
    assert sim.state_hash == start


def test_seeded_run_is_deterministic():
    a = mpnet.Simulator(load("allsendone_v2.mpl", 3)).run(seed=7)
    b = mpnet.Simulator(load("allsendone_v2.mpl", 3)).run(seed=7)
    assert a == b
    assert a[-1]["postHash"]


def test_eval_expr_and_errors():
    assert mpnet.eval_expr("x + 1", {"x": 2}) == 3
    assert mpnet.eval_expr("{b = 1, a = true}") == {"a": True, "b": 1}
    with pytest.raises(mpnet.MpnetError):
        mpnet.eval_expr("1 div 0")
    with pytest.raises(mpnet.MpnetError):
        mpnet.build_mpi("program p(rank) { send(data = 1, dest = 0); }", 2)


def test_dot_export():
    text = mpnet.net_dot(load("allsendone_v1.mpl", 2))
    assert text.startswith("digraph")
    assert "normalnormal" in text
