"""Broker demand behavior, settlement, profit accounting, scenario execution.

The broker aggregates its customers into a price-demand function per
virtual channel, evaluated once at the final auction price.  Settlement
turns an auction outcome into allocation deltas, ledger entries, and the
grant/deny message tail; a scenario is a scheduled sequence of such
competitions against live allocation state.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .errors import ConfigError, InfeasibleError, InvalidOutcomeError, UnknownNetworkError
from .game import SupplierAgent, UndercutPolicy, equilibrium_bounds
from .protocol import (
    BROKER_TO_SUPPLIER,
    SUPPLIER_TO_BROKER,
    Ack,
    BrokerAgent,
    CompetitionOutcome,
    CompetitionTrace,
    DEFAULT_ROUND_CAP,
    Exc1,
    Exc2,
    Nack,
    Termination,
    TraceEvent,
    run_competition,
)
from .rwa import Allocation, incremental_allocate
from .topology import Network, VirtualChannel, validate_network


# -- demand --------------------------------------------------------------------

@dataclass(frozen=True)
class LinearDemand:
    """D(p) = max(0, floor(a - b*p)); a in wavelengths, b in wavelengths per minor unit."""

    a: float
    b: float

    kind = "linear"

    def quantity(self, price: int) -> int:
        return max(0, math.floor(self.a - self.b * price))


@dataclass(frozen=True)
class ConstantElasticityDemand:
    """D(p) = floor(a * p**(-eps)), defined from one minor unit upward."""

    a: float
    eps: float

    kind = "constant_elasticity"

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("elasticity must be positive")

    def quantity(self, price: int) -> int:
        return max(0, math.floor(self.a * max(price, 1) ** (-self.eps)))


DemandFunction = LinearDemand | ConstantElasticityDemand


def broker_demand(df: DemandFunction, price: int) -> int:
    """Wavelengths the broker buys at this per-wavelength price."""
    if price < 0:
        raise ValueError("price must be >= 0")
    return df.quantity(price)


# -- ledger --------------------------------------------------------------------

@dataclass
class LedgerEntry:
    revenue: int = 0
    cost: int = 0
    wavelengths_sold: int = 0

    @property
    def profit(self) -> int:
        return self.revenue - self.cost


class ProfitLedger:
    """Exact per-(network, channel) accounting in integer minor units."""

    def __init__(self):
        self._entries: dict[tuple[str, str], LedgerEntry] = {}

    def ensure(self, network_id: str, vc_label: str) -> None:
        self._entries.setdefault((network_id, vc_label), LedgerEntry())

    def record(self, network_id: str, vc_label: str, revenue: int, cost: int, sold: int) -> None:
        self.ensure(network_id, vc_label)
        entry = self._entries[(network_id, vc_label)]
        entry.revenue += revenue
        entry.cost += cost
        entry.wavelengths_sold += sold

    def entry(self, network_id: str, vc_label: str) -> LedgerEntry:
        return self._entries[(network_id, vc_label)]

    def networks(self) -> list[str]:
        seen: dict[str, None] = {}
        for net_id, _ in self._entries:
            seen.setdefault(net_id)
        return list(seen)

    def vc_labels(self, network_id: str) -> list[str]:
        return [vc for net, vc in self._entries if net == network_id]

    def totals(self, network_id: str) -> LedgerEntry:
        if network_id not in self.networks():
            raise UnknownNetworkError(f"no ledger entries for network {network_id!r}")
        total = LedgerEntry()
        for (net, _vc), entry in self._entries.items():
            if net == network_id:
                total.revenue += entry.revenue
                total.cost += entry.cost
                total.wavelengths_sold += entry.wavelengths_sold
        return total

    def rows(self) -> list[tuple[str, str, int, int, int, int]]:
        """(network, vc, revenue, cost, profit, wavelengths_sold), sorted."""
        out = []
        for (net, vc) in sorted(self._entries):
            e = self._entries[(net, vc)]
            out.append((net, vc, e.revenue, e.cost, e.profit, e.wavelengths_sold))
        return out


def profit_percentages(ledger: ProfitLedger, network_id: str) -> dict[str, float] | None:
    """Per-channel share of a network's profit, in percent to one decimal.

    Returns None when the network's total profit is not positive, since
    shares of a non-positive total are meaningless.
    """
    total = ledger.totals(network_id).profit
    if total <= 0:
        return None
    out: dict[str, float] = {}
    for vc in ledger.vc_labels(network_id):
        share = Decimal(ledger.entry(network_id, vc).profit * 100) / Decimal(total)
        out[vc] = float(share.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))
    return out


# -- settlement ------------------------------------------------------------------

@dataclass(frozen=True)
class SettlementResult:
    termination: Termination
    demand: int
    granted: int
    revenue: int
    cost: int
    allocation_delta: tuple
    events: tuple[TraceEvent, ...]


def settle(
    outcome: CompetitionOutcome,
    df: DemandFunction,
    winner_agent: SupplierAgent,
    vc: VirtualChannel,
    reject_partial: bool = False,
) -> SettlementResult:
    """Reveal demand at the final price and provision what the winner can carry.

    Zero demand sends the price-rejection exception followed by a deny.  A
    capacity shortfall has the winner report how many wavelengths fit; the
    broker takes that partial grant unless ``reject_partial`` is set.  The
    caller commits the returned allocation delta.
    """
    if outcome.termination is not Termination.WON:
        raise InvalidOutcomeError(f"cannot settle a {outcome.termination.value} auction")
    price = outcome.final_price
    rnd = outcome.rounds
    wid = outcome.winner
    x, y = vc.src, vc.dst

    demand = broker_demand(df, price)
    if demand == 0:
        events = (
            TraceEvent(rnd, BROKER_TO_SUPPLIER, wid, Exc2(x, y, price)),
            TraceEvent(rnd, BROKER_TO_SUPPLIER, wid, Nack(x, y)),
        )
        return SettlementResult(Termination.BROKER_REJECTED, 0, 0, 0, 0, (), events)

    try:
        delta, added = incremental_allocate(winner_agent.network, winner_agent.state, vc, demand)
        events = (TraceEvent(rnd, BROKER_TO_SUPPLIER, wid, Ack(x, y, demand)),)
        return SettlementResult(Termination.WON, demand, demand, price * demand, added, tuple(delta), events)
    except InfeasibleError as exc:
        fit = exc.placed
        shortfall = (TraceEvent(rnd, SUPPLIER_TO_BROKER, wid, Exc1(fit, price, x, y)),)
        if fit >= 1 and not reject_partial:
            events = shortfall + (TraceEvent(rnd, BROKER_TO_SUPPLIER, wid, Ack(x, y, fit)),)
            return SettlementResult(Termination.WON, demand, fit, price * fit, exc.added_cost, exc.delta, events)
        events = shortfall + (TraceEvent(rnd, BROKER_TO_SUPPLIER, wid, Nack(x, y)),)
        return SettlementResult(Termination.WON, demand, 0, 0, 0, (), events)


# -- scenario ------------------------------------------------------------------

@dataclass(frozen=True)
class SupplierConfig:
    network: Network
    policy: UndercutPolicy
    markup: float


@dataclass(frozen=True)
class ChannelConfig:
    vc: VirtualChannel
    demand: DemandFunction


@dataclass(frozen=True)
class ScenarioConfig:
    id: str
    seed: int
    suppliers: tuple[SupplierConfig, ...]
    channels: tuple[ChannelConfig, ...]
    schedule: tuple[tuple[int, str], ...]
    round_cap: int = DEFAULT_ROUND_CAP
    reject_partial: bool = False


def validate_scenario(config: ScenarioConfig) -> list[str]:
    """Every config invariant violation, as location-prefixed messages."""
    problems: list[str] = []
    if not config.suppliers:
        problems.append("networks: at least one supplier network is required")
    seen_nets: set[str] = set()
    for i, sup in enumerate(config.suppliers):
        loc = f"networks[{i}]"
        if sup.network.id in seen_nets:
            problems.append(f"{loc}: duplicate network id {sup.network.id!r}")
        seen_nets.add(sup.network.id)
        for v in validate_network(sup.network):
            problems.append(f"{loc}: {v}")
        if sup.markup < 1:
            problems.append(f"{loc}: markup {sup.markup} is below 1")
    labels: set[str] = set()
    for j, ch in enumerate(config.channels):
        loc = f"virtual_channels[{j}]"
        if ch.vc.label in labels:
            problems.append(f"{loc}: duplicate label {ch.vc.label!r}")
        labels.add(ch.vc.label)
        for i, sup in enumerate(config.suppliers):
            for end in (ch.vc.src, ch.vc.dst):
                if end not in sup.network.nodes:
                    problems.append(f"{loc}: endpoint {end!r} missing from networks[{i}] ({sup.network.id!r})")
    for k, (rnd, label) in enumerate(config.schedule):
        if label not in labels:
            problems.append(f"schedule[{k}]: unknown virtual channel {label!r}")
        if rnd < 0:
            problems.append(f"schedule[{k}]: negative round {rnd}")
    if config.round_cap < 1:
        problems.append(f"round_cap: {config.round_cap} must be >= 1")
    return problems


@dataclass(frozen=True)
class AuctionRecord:
    """One scheduled request: who won at what price, and the settlement result."""

    index: int
    request_round: int
    vc: str
    termination: str
    winner: str | None
    final_price: int | None
    rounds: int
    demand: int | None
    granted: int
    revenue: int
    cost: int
    reference_mc: int | None
    band_low: int | None
    band_high: int | None
    within_band: bool | None


@dataclass
class Report:
    scenario_id: str
    seed: int
    network_ids: tuple[str, ...]
    vc_labels: tuple[str, ...]
    ledger: ProfitLedger
    records: tuple[AuctionRecord, ...]
    traces: tuple[CompetitionTrace, ...]
    final_states: dict[str, Allocation]
    networks: dict[str, Network]


def run_scenario(config: ScenarioConfig, seed_override: int | None = None) -> Report:
    """Execute the request schedule in order against live allocation state.

    Each request runs one competition plus settlement.  Every auction
    record carries the equilibrium-band prediction computed from the
    competitors' marginal costs at auction start, so the band can be
    checked from the report alone.
    """
    problems = validate_scenario(config)
    if problems:
        raise ConfigError(problems)
    seed = config.seed if seed_override is None else seed_override
    rng = random.Random(seed)
    agents = [
        SupplierAgent(sc.network.id, sc.network, Allocation.empty(), sc.policy, sc.markup)
        for sc in config.suppliers
    ]
    broker = BrokerAgent()
    channels = {ch.vc.label: ch for ch in config.channels}
    ledger = ProfitLedger()
    for agent in agents:
        for ch in config.channels:
            ledger.ensure(agent.id, ch.vc.label)

    records: list[AuctionRecord] = []
    traces: list[CompetitionTrace] = []
    for index, (request_round, label) in enumerate(config.schedule):
        ch = channels[label]
        mcs = {agent.id: agent.next_unit_mc(ch.vc) for agent in agents}
        priced = [(agent, mcs[agent.id]) for agent in agents if mcs[agent.id] is not None]
        bound = None
        if len(priced) >= 2:
            bound = equilibrium_bounds([mc for _, mc in priced], [a.policy for a, _ in priced])

        outcome = run_competition(ch.vc, agents, broker, rng, config.round_cap, mc_by_supplier=mcs)
        if outcome.termination is Termination.WON:
            winner = next(a for a in agents if a.id == outcome.winner)
            result = settle(outcome, ch.demand, winner, ch.vc, reject_partial=config.reject_partial)
            if result.allocation_delta:
                winner.commit(result.allocation_delta)
            ledger.record(winner.id, label, result.revenue, result.cost, result.granted)
            trace = CompetitionTrace(outcome.trace.events + result.events)
            termination = result.termination
            demand: int | None = result.demand
            granted, revenue, cost = result.granted, result.revenue, result.cost
        else:
            trace = outcome.trace
            termination = outcome.termination
            demand, granted, revenue, cost = None, 0, 0, 0

        within = None
        band_low = band_high = ref = None
        if bound is not None:
            band_low, band_high = bound.interval()
            ref = bound.reference_mc
            if outcome.final_price is not None:
                within = band_low <= outcome.final_price <= band_high

        records.append(
            AuctionRecord(
                index=index,
                request_round=request_round,
                vc=label,
                termination=termination.value,
                winner=outcome.winner,
                final_price=outcome.final_price,
                rounds=outcome.rounds,
                demand=demand,
                granted=granted,
                revenue=revenue,
                cost=cost,
                reference_mc=ref,
                band_low=band_low,
                band_high=band_high,
                within_band=within,
            )
        )
        traces.append(trace)

    return Report(
        scenario_id=config.id,
        seed=seed,
        network_ids=tuple(a.id for a in agents),
        vc_labels=tuple(ch.vc.label for ch in config.channels),
        ledger=ledger,
        records=tuple(records),
        traces=tuple(traces),
        final_states={a.id: a.state for a in agents},
        networks={a.id: a.network for a in agents},
    )


# -- seed sweeps ----------------------------------------------------------------

def child_seed(root: int, index: int) -> int:
    """Stable 63-bit child seed for run ``index`` of a sweep rooted at ``root``."""
    digest = hashlib.sha256(f"{root}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _sweep_one(args):
    config, seed = args
    return run_scenario(config, seed_override=seed)


def run_sweep(config: ScenarioConfig, count: int, workers: int = 1) -> list[Report]:
    """Run ``count`` seeded scenario instances; results come back in run-index order."""
    if count < 1:
        raise ValueError("sweep count must be >= 1")
    seeds = [child_seed(config.seed, i) for i in range(count)]
    if workers <= 1:
        return [run_scenario(config, seed_override=s) for s in seeds]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_one, [(config, s) for s in seeds]))
