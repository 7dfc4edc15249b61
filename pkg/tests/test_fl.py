import itertools
from fractions import Fraction as F

import pytest

from flmpc import functionality as fn
from flmpc.errors import (
    ConfigError,
    DomainError,
    FieldOverflowError,
    InsufficientClientsError,
    SelectionError,
)
from flmpc.fl import (
    RoundConfig,
    aggregate_plain,
    broadcast_sysparam,
    client_update,
    fl_functionality,
    model_update,
    play_rounds,
    round_functionality,
    run_fl,
    select_clients,
)
from flmpc.values import ACK, ClientDataset, SysParam, fv
from flmpc.views import EntryKind, PartyView


def ds(owner, *pairs):
    return ClientDataset.from_pairs(owner, pairs)


def sp(w, q=17, s=1, r=0):
    return SysParam(tuple(F(x) for x in w), "sqloss-gd1", r, q, s)


# -- selection ---------------------------------------------------------------------


def test_select_all_three():
    pool = [ds(i, ((1,), 0)) for i in (1, 2, 3)]
    chosen = select_clients(pool, 3, seed=42)
    assert sorted(chosen) == [1, 2, 3]
    assert chosen == [1, 3, 2]


def test_select_insufficient():
    pool = [ds(1, ((1,), 0)), ds(2, ((1,), 0), ((1,), 0))] + [ClientDataset(i, ()) for i in (3, 4, 5)]
    with pytest.raises(InsufficientClientsError):
        select_clients(pool, 3)
    with pytest.raises(InsufficientClientsError):
        select_clients([ds(i, ((1,), 0)) for i in range(1, 6)], 3, min_size=2)


def test_select_regression_and_repeatable():
    pool = [ds(i, ((1,), 0)) for i in range(1, 6)]
    assert select_clients(pool, 3, seed=42) == [3, 5, 1]
    assert select_clients(pool, 3, seed=0) == [1, 4, 2]
    assert all(select_clients(pool, 3, seed=42) == [3, 5, 1] for _ in range(10))
    # pool order does not matter: eligible ids are sorted first
    assert select_clients(list(reversed(pool)), 3, seed=42) == [3, 5, 1]


# -- broadcast ------------------------------------------------------------------------


def test_broadcast_consistency():
    cfg = RoundConfig(3, 17, 1, F(1, 4))
    views = {1: PartyView(1), 2: PartyView(2)}
    server = PartyView(3)
    sent = broadcast_sysparam((F(0),), 4, cfg, [1, 2], views, server)
    assert server.entries[-1].kind == EntryKind.MSG_OUT and server.entries[-1].payload == sent
    got = [v.entries[-1] for v in views.values()]
    assert all(e.kind == EntryKind.SYSPARAM and e.payload == sent for e in got)
    assert got[0].payload == got[1].payload
    assert sent.round == 4


def test_broadcast_unselected():
    cfg = RoundConfig(3, 17, 1, F(1, 4))
    with pytest.raises(SelectionError):
        broadcast_sysparam((F(0),), 0, cfg, [1, 2], {}, recipients=[1, 3])


# -- client update ------------------------------------------------------------------------


def test_client_update_examples():
    assert client_update(ds(1, ((1,), 1)), sp([1])) == fv(17, 0)
    assert client_update(ds(1, ((1,), 2)), sp([0])) == fv(17, 13)
    # -8 is exactly the centered bound at q=17 and is accepted
    assert client_update(ds(1, ((1,), 2), ((2,), 1)), sp([0])) == fv(17, 9)


def test_client_update_records_message():
    v = PartyView(1)
    u = client_update(ds(1, ((1,), 2)), sp([0]), v)
    assert v.entries[-1].kind == EntryKind.MSG_OUT and v.entries[-1].payload == u


def test_client_update_errors():
    with pytest.raises(DomainError):
        client_update(ds(1, ((1, 1), 2)), sp([0]))
    with pytest.raises(FieldOverflowError):
        client_update(ds(1, ((1,), 5)), sp([0]))  # g = -10, bound 8
    with pytest.raises(OverflowError):
        client_update(ds(1, ((3,), 2)), sp([0]))  # g = -12


def test_client_update_scale_rounding():
    # g = 2(0 - 1/4)(1) = -1/2, s=1 rounds away from zero to -1
    assert client_update(ds(1, ((1,), F(1, 4))), sp([0])) == fv(17, 16)
    assert client_update(ds(1, ((1,), F(1, 4))), sp([0], s=3)) == fv(17, 17 - 2)  # -3/2 -> -2


# -- aggregation and model update -----------------------------------------------------------


def test_aggregate_plain_examples():
    assert aggregate_plain([fv(5, 3), fv(5, 4)]) == fv(5, 2)
    assert aggregate_plain([fv(5, 3)]) == fv(5, 3)
    assert aggregate_plain([fv(17, 13), fv(17, 9)]) == fv(17, 5)
    with pytest.raises(DomainError):
        aggregate_plain([fv(5, 1), fv(7, 1)])
    with pytest.raises(DomainError):
        aggregate_plain([fv(5, 1), fv(5, 1, 1)])


def test_aggregate_plain_records_each_update():
    v = PartyView(3)
    aggregate_plain([fv(5, 3), fv(5, 4)], v, 0)
    assert [e.payload for e in v.of_kind(EntryKind.MSG_IN)] == [fv(5, 3), fv(5, 4)]


def test_model_update_examples():
    assert model_update((F(3, 7),), fv(17, 0), 2, F(1, 2), 1, 17) == (F(3, 7),)
    assert model_update((F(0),), fv(17, 13), 1, F(1, 4), 1, 17) == (F(1),)
    assert model_update((F(1),), fv(17, 13), 2, F(1, 2), 1, 17) == (F(2),)
    v = PartyView(2)
    model_update((F(0),), fv(17, 13), 1, F(1, 4), 1, 17, v, 0)
    assert v.entries[-1].kind == EntryKind.OUTPUT and v.entries[-1].payload == (F(1),)


# -- round functionality ----------------------------------------------------------------------


def test_round_functionality_one_client():
    f = round_functionality(RoundConfig(2, 17, 1, F(1, 4)))
    assert fn.evaluate_functionality(f, [ds(1, ((1,), 2)), (F(0),)]) == (ACK, (F(1),))


def test_round_functionality_zero_gradient():
    f = round_functionality(RoundConfig(3, 17, 1, F(1, 4)))
    w = (F(1),)
    assert fn.evaluate_functionality(f, [ds(1, ((1,), 1)), ds(2, ((2,), 2)), w]) == (ACK, ACK, w)


def test_round_functionality_two_clients():
    a, b = ds(1, ((1,), 2)), ds(2, ((1,), 2), ((2,), 1))
    # q=17 cannot hold the aggregate -12
    with pytest.raises(FieldOverflowError):
        fn.evaluate_functionality(round_functionality(RoundConfig(3, 17, 1, F(1, 4))), [a, b, (F(0),)])
    cfg = RoundConfig(3, 29, 1, F(1, 4))
    out = fn.evaluate_functionality(round_functionality(cfg), [a, b, (F(0),)])
    # hand pipeline: updates -4 and -8, aggregate -12, w' = 0 - (1/4)(-12)/2
    assert out == (ACK, ACK, (F(3, 2),))
    s = sp([0], q=29)
    agg = aggregate_plain([client_update(a, s), client_update(b, s)])
    assert out[-1] == model_update((F(0),), agg, 2, F(1, 4), 1, 29)


def test_round_config_errors():
    with pytest.raises(ConfigError):
        RoundConfig(3, 15, 1, F(1, 4))
    with pytest.raises(ConfigError):
        RoundConfig(1, 17, 1, F(1, 4))
    with pytest.raises(ConfigError):
        RoundConfig(3, 17, 1, F(0))
    with pytest.raises(ConfigError):
        round_functionality("not a config")


# -- full runs -----------------------------------------------------------------------------------


def test_run_one_round_plain_matches_ideal():
    cfg = RoundConfig(2, 17, 1, F(1, 4))
    data = [ds(1, ((1,), 2))]
    run = run_fl(cfg, data, "plain", 1)
    assert run.model == fn.evaluate_functionality(round_functionality(cfg), [data[0], (F(0),)])[-1] == (F(1),)


def test_run_fixed_point():
    cfg = RoundConfig(3, 17, 1, F(1, 4))
    data = [ds(1, ((1,), 0)), ds(2, ((2,), 0))]
    for variant in ("plain", "oracle", "masked"):
        assert run_fl(cfg, data, variant, 2).model == (F(0),)


def test_variants_agree_and_match_composition():
    cfg = RoundConfig(3, 17, 1, F(1, 8))
    f = fl_functionality(cfg, 2)
    for a, b in itertools.product((-1, 0, 1, 2), repeat=2):
        data = [ds(1, ((1,), a)), ds(2, ((1,), b))]
        ideal = fn.evaluate_functionality(f, data + [(F(0),)])[-1]
        for variant in ("plain", "oracle", "masked"):
            run = run_fl(cfg, data, variant, 2, seed=a * 10 + b)
            assert run.model == ideal


def test_run_views_append_only_and_consistent():
    cfg = RoundConfig(3, 17, 1, F(1, 8))
    data = [ds(1, ((1,), 1)), ds(2, ((1,), 2))]
    run = run_fl(cfg, data, "masked", 2)
    for v in run.views:
        assert [e.seq for e in v.entries] == list(range(len(v)))
    for r in range(2):
        sysparams = [e.payload for v in run.views[:-1] for e in v.of_kind(EntryKind.SYSPARAM) if e.round == r]
        assert len(sysparams) == 2 and sysparams[0] == sysparams[1]


def test_run_error_preserves_views():
    cfg = RoundConfig(3, 17, 1, F(1, 4))
    data = [ds(1, ((1,), 2)), ds(2, ((1,), 5))]
    with pytest.raises(FieldOverflowError) as info:
        play_rounds(cfg, data, "plain", 2, (F(0),))
    views = info.value.views
    assert len(views) == 3
    assert views[0].of_kind(EntryKind.MSG_OUT)  # client 1 sent before client 2 failed
    assert views[2].of_kind(EntryKind.MSG_OUT)  # the broadcast


def test_run_errors():
    cfg = RoundConfig(3, 17, 1, F(1, 4))
    data = [ds(1, ((1,), 0)), ds(2, ((1,), 0))]
    with pytest.raises(ConfigError):
        run_fl(cfg, data, "plain", 0)
    with pytest.raises(ConfigError):
        run_fl(cfg, data, "telepathy", 1)
