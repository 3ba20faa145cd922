import dataclasses
import math
import random

import pytest

from wavebroker import (
    Allocation,
    BrokerAgent,
    CompetitionTrace,
    RoundCapExceededError,
    SupplierAgent,
    Termination,
    UndercutPolicy,
    VirtualChannel,
    run_competition,
    validate_trace,
)
from wavebroker.protocol import (
    BROKER_TO_SUPPLIER,
    SUPPLIER_TO_BROKER,
    Exc1,
    Ocl,
    Offp,
    Reqc,
    TraceEvent,
    format_event,
)

from conftest import mknet

VC = VirtualChannel("S", "T", "VC1")
POLICY = UndercutPolicy(50, 100)


def supplier(sid, unit_cost, capacity=1000, policy=POLICY, markup=2.0, wavelengths=1000):
    net = mknet([("S", "T", capacity, unit_cost)], wavelength_count=wavelengths, net_id=sid)
    return SupplierAgent(sid, net, Allocation.empty(), policy, markup)


def duel(seed, mc_a=600, mc_b=400):
    a, b = supplier("A", mc_a), supplier("B", mc_b)
    return run_competition(VC, [a, b], BrokerAgent(), random.Random(seed))


class TestDuel:
    def test_cheaper_network_wins_inside_band(self):
        for seed in range(50):
            outcome = duel(seed)
            assert outcome.termination is Termination.WON
            assert outcome.winner == "B"
            assert 500 <= outcome.final_price <= 700

    def test_final_price_is_last_standing_minimum(self):
        outcome = duel(11)
        bids = [ev.message.p for ev in outcome.trace.events if isinstance(ev.message, Offp)]
        assert outcome.final_price == min(bids)


class TestGateExceptions:
    def test_single_capable_supplier_wins_at_opening_bid_in_one_round(self):
        capable = supplier("A", 600)
        dry = supplier("B", 400, capacity=0)
        outcome = run_competition(VC, [capable, dry], BrokerAgent(), random.Random(0))
        assert outcome.termination is Termination.WON
        assert outcome.winner == "A"
        assert outcome.final_price == 1200
        assert outcome.rounds == 1
        kinds = [type(ev.message) for ev in outcome.trace.events]
        assert kinds == [Reqc, Reqc, Offp, Exc1]

    def test_all_declining_ends_with_no_winner(self):
        outcome = run_competition(
            VC, [supplier("A", 1, capacity=0), supplier("B", 1, capacity=0)], BrokerAgent(), random.Random(0)
        )
        assert outcome.termination is Termination.ALL_DECLINED
        assert outcome.winner is None
        assert outcome.final_price is None

    def test_no_suppliers_is_an_error(self):
        with pytest.raises(ValueError):
            run_competition(VC, [], BrokerAgent(), random.Random(0))


class TestMultiSupplier:
    def test_lone_cutter_after_contested_round_takes_the_win(self):
        # opening bids 1000/990/980; round 2 has two cutters (steps 50 and 100),
        # round 3 only one can still cut, which settles it
        a = supplier("A", 800, policy=UndercutPolicy(50, 50), markup=1.25)
        b = supplier("B", 800, policy=UndercutPolicy(100, 100), markup=1.2375)
        c = supplier("C", 800, policy=UndercutPolicy(100, 100), markup=1.225)
        outcome = run_competition(VC, [a, b, c], BrokerAgent(), random.Random(1))
        assert outcome.rounds == 3
        assert outcome.winner == "A"
        assert outcome.final_price == 830

    def test_alternating_duel_does_not_end_on_single_cutter(self):
        # two suppliers produce one cutter per round by construction; the
        # auction must run down to marginal cost, not stop at first cut
        outcome = duel(3)
        assert outcome.rounds > 2

    def test_round_cap_guard(self):
        a, b = supplier("A", 600), supplier("B", 400)
        with pytest.raises(RoundCapExceededError):
            run_competition(VC, [a, b], BrokerAgent(), random.Random(0), round_cap=1)


class TestTraceConformance:
    def test_emitted_traces_validate(self):
        rng = random.Random(42)
        for trial in range(150):
            n = rng.randint(2, 4)
            suppliers = [
                supplier(
                    f"S{i}",
                    rng.randint(100, 900),
                    capacity=0 if rng.random() < 0.2 else 1000,
                    policy=UndercutPolicy(rng.randint(10, 60), rng.randint(60, 160)),
                    markup=1.0 + rng.random() * 2,
                )
                for i in range(n)
            ]
            outcome = run_competition(VC, suppliers, BrokerAgent(), random.Random(trial))
            assert validate_trace(outcome.trace) == []

    def test_announced_minimum_strictly_decreases(self):
        for seed in range(30):
            outcome = duel(seed, mc_a=500, mc_b=500)
            prices = outcome.trace.ocl_prices()
            assert all(p1 > p2 for p1, p2 in zip(prices, prices[1:]))

    def test_termination_round_bound(self):
        rng = random.Random(9)
        for trial in range(60):
            lo = rng.randint(10, 80)
            policy = UndercutPolicy(lo, lo + rng.randint(0, 80))
            mc_a, mc_b = rng.randint(100, 900), rng.randint(100, 900)
            a, b = supplier("A", mc_a, policy=policy), supplier("B", mc_b, policy=policy)
            outcome = run_competition(VC, [a, b], BrokerAgent(), random.Random(trial))
            max_bid = max(2 * mc_a, 2 * mc_b)
            bound = math.ceil((max_bid - min(mc_a, mc_b)) / policy.l_min) + 2
            assert outcome.rounds <= bound

    def test_announcements_carry_no_identity(self):
        assert {f.name for f in dataclasses.fields(Ocl)} == {"x", "y", "p"}

    def test_winner_never_prices_below_own_marginal_cost(self):
        for seed in range(40):
            outcome = duel(seed, mc_a=700, mc_b=300)
            assert outcome.final_price >= 300


class TestValidateTraceViolations:
    def test_missing_opening_request(self):
        trace = CompetitionTrace((TraceEvent(1, BROKER_TO_SUPPLIER, "A", Ocl("S", "T", 100)),))
        assert {v.code for v in validate_trace(trace)} == {"missing-reqc"}

    def test_non_undercutting_bid(self):
        outcome = duel(5)
        tampered = []
        bumped = False
        for ev in outcome.trace.events:
            if not bumped and ev.round > 1 and isinstance(ev.message, Offp):
                tampered.append(TraceEvent(ev.round, ev.direction, ev.supplier_id, Offp(10_000, "S", "T")))
                bumped = True
            else:
                tampered.append(ev)
        vios = validate_trace(CompetitionTrace(tuple(tampered)))
        assert "non-undercutting-bid" in {v.code for v in vios}

    def test_wrong_announcement_price(self):
        outcome = duel(6)
        tampered = tuple(
            TraceEvent(ev.round, ev.direction, ev.supplier_id, Ocl("S", "T", ev.message.p + 1))
            if isinstance(ev.message, Ocl)
            else ev
            for ev in outcome.trace.events
        )
        vios = validate_trace(CompetitionTrace(tampered))
        assert "ocl-price-mismatch" in {v.code for v in vios}

    def test_illegal_settlement_sequence(self):
        outcome = duel(7)
        from wavebroker.protocol import Nack

        extended = outcome.trace.events + (
            TraceEvent(outcome.rounds, BROKER_TO_SUPPLIER, "B", Nack("S", "T")),
            TraceEvent(outcome.rounds, BROKER_TO_SUPPLIER, "B", Nack("S", "T")),
        )
        vios = validate_trace(CompetitionTrace(extended))
        assert "illegal-settlement" in {v.code for v in vios}


class TestTraceFormat:
    def test_line_format_is_stable(self):
        ev = TraceEvent(3, SUPPLIER_TO_BROKER, "netB", Offp(725, "S", "T"))
        assert format_event(ev) == "3\tsupplier->broker\tnetB\toffp\tp=725,x=S,y=T"
        ev2 = TraceEvent(1, BROKER_TO_SUPPLIER, "netA", Reqc("S", "T"))
        assert format_event(ev2) == "1\tbroker->supplier\tnetA\treqc\tx=S,y=T"
