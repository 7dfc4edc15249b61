"""Random operation sequences over the real protocol operations, with invariant checks.

Shared by the view-discipline tests and the acceptance suite.
"""

import random
from fractions import Fraction

from flmpc import functionality as fn
from flmpc.fl import RoundConfig, aggregate_plain, broadcast_sysparam, client_update, model_update
from flmpc.secagg import derive_masks, secure_agg_round
from flmpc.values import BOTTOM, ClientDataset
from flmpc.views import EntryKind, PartyView

OPERATIONS = ("broadcast", "client_update", "aggregate", "model_update", "oracle", "secagg")


def _snapshot(views):
    return [v.entries for v in views]


def check_sequence(seed: int, length: int = 12) -> list[str]:
    """Apply ``length`` random operations to fresh views; return invariant violations."""
    rng = random.Random(seed)
    m = rng.randint(2, 5)
    q = rng.choice([101, 257, 521])
    d = rng.randint(1, 2)
    cfg = RoundConfig(m, q, d, Fraction(1, 16))
    k = m - 1
    views = [PartyView(i) for i in range(1, m + 1)]
    server = views[-1]
    model = (Fraction(0),) * d
    binding = fn.OracleBinding("seq", fn.sum_to_server(m, q, d), dict(enumerate(views, start=1)))
    data = [
        ClientDataset.from_pairs(i, [((Fraction(rng.randint(-1, 1)),) * d, Fraction(rng.randint(-1, 1)))])
        for i in range(1, m)
    ]
    problems = []
    round_index = 0
    sp = None
    for step in range(length):
        op = rng.choice(OPERATIONS)
        before = _snapshot(views)
        if op == "broadcast" or sp is None:
            op = "broadcast"
            sp = broadcast_sysparam(model, round_index, cfg, list(range(1, m)),
                                    {i: views[i - 1] for i in range(1, m)}, server)
            delivered = [views[i - 1].entries[-1] for i in range(1, m)]
            if any(e.kind != EntryKind.SYSPARAM or e.payload != sp for e in delivered):
                problems.append(f"seed {seed} step {step}: broadcast inconsistent")
            if len({e.payload for e in delivered}) != 1:
                problems.append(f"seed {seed} step {step}: clients got different sysparams")
        elif op == "client_update":
            i = rng.randint(1, k)
            client_update(data[i - 1], sp, views[i - 1])
        elif op == "aggregate":
            updates = [client_update(ds, sp) for ds in data]
            aggregate_plain(updates, server, round_index)
        elif op == "model_update":
            agg = aggregate_plain([client_update(ds, sp) for ds in data])
            model = model_update(model, agg, k, cfg.learning_rate, 1, q, server, round_index)
            round_index += 1
            sp = None
        elif op == "oracle":
            fn.oracle_call(binding, [client_update(ds, sp) for ds in data] + [BOTTOM], (), round_index)
        else:
            masks = derive_masks(seed, step, range(1, m), q, d)
            secure_agg_round([client_update(ds, sp) for ds in data], masks, views, round_index)
        after = _snapshot(views)
        for b, a, v in zip(before, after, views):
            if a[:len(b)] != b:
                problems.append(f"seed {seed} step {step} ({op}): party {v.party} prefix changed")
            if len(a) < len(b):
                problems.append(f"seed {seed} step {step} ({op}): party {v.party} view shrank")
        touched = sum(len(a) > len(b) for b, a in zip(before, after))
        if touched == 0:
            problems.append(f"seed {seed} step {step} ({op}): no view grew")
    for v in views:
        seqs = [e.seq for e in v.entries]
        if seqs != list(range(len(seqs))) or any(b <= a for a, b in zip(seqs, seqs[1:])):
            problems.append(f"seed {seed}: party {v.party} sequence numbers not strictly increasing")
    return problems
