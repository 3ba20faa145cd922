"""Shared builders: quick networks, shipped-scenario paths, fuzz instance generators."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from wavebroker import DemandRequest, Link, Network, VirtualChannel, make_network

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


def scenario_path(name: str) -> str:
    return str(SCENARIO_DIR / f"{name}.json")


def mknet(links, wavelength_count=2, net_id="net"):
    """Network from (a, b, capacity, unit_cost) tuples; nodes inferred."""
    nodes = {end for a, b, _c, _p in links for end in (a, b)}
    return make_network(net_id, nodes, [Link(a, b, c, p) for a, b, c, p in links], wavelength_count)


def two_route_net(net_id="canwest") -> Network:
    """Mirror of the shipped two_route_costcurve network: 125/leg vs 170/leg."""
    return mknet(
        [
            ("SEA", "DEN", 8, 60),
            ("DEN", "BOS", 8, 65),
            ("SEA", "POR", 8, 30),
            ("POR", "SLC", 8, 35),
            ("SLC", "KC", 8, 40),
            ("KC", "CHI", 8, 30),
            ("CHI", "BOS", 8, 35),
        ],
        wavelength_count=20,
        net_id=net_id,
    )


VC_SEA_BOS = VirtualChannel("SEA", "BOS", "VC1")


def random_guard_instance(rng: random.Random, tag: int):
    """A random connected instance inside the exhaustive-oracle guard.

    Up to 6 nodes and 8 links, W up to 3, at most 2 connections with at
    most 4 units in total.
    """
    n_nodes = rng.randint(4, 6)
    nodes = [f"N{i}" for i in range(n_nodes)]
    links: dict[tuple[str, str], Link] = {}
    order = nodes[:]
    rng.shuffle(order)
    for i in range(1, len(order)):
        a, b = order[rng.randrange(i)], order[i]
        key = (a, b) if a <= b else (b, a)
        links[key] = Link(key[0], key[1], rng.randint(1, 3), rng.randint(1, 20))
    max_links = rng.randint(len(links), 8)
    attempts = 0
    while len(links) < max_links and attempts < 20:
        attempts += 1
        a, b = rng.sample(nodes, 2)
        key = (a, b) if a <= b else (b, a)
        if key not in links:
            links[key] = Link(key[0], key[1], rng.randint(1, 3), rng.randint(1, 20))
    net = make_network(f"fuzz{tag}", nodes, links.values(), rng.randint(1, 3))

    n_conns = rng.randint(1, 2)
    budget = rng.randint(n_conns, 4)
    requests = []
    for c in range(n_conns):
        src, dst = rng.sample(nodes, 2)
        d = 1 if c < n_conns - 1 else budget - (n_conns - 1)
        requests.append(DemandRequest(VirtualChannel(src, dst, f"C{c}"), d))
    return net, requests


def random_parallel_routes_net(rng: random.Random, tag: int, max_routes=3, max_len=2, guard=True):
    """Node-disjoint parallel routes between S and T; greedy placement is
    provably optimal here, which makes these good single-connection probes."""
    links = []
    nodes = ["S", "T"]
    n_routes = rng.randint(1, max_routes)
    node_budget = (6 if guard else 10) - 2
    for r in range(n_routes):
        length = rng.randint(1, max_len)
        length = min(length, node_budget + 1) if length > 1 else length
        route_cost = rng.randint(1, 15)
        cap = rng.randint(1, 3)
        prev = "S"
        for step in range(length - 1):
            if node_budget <= 0:
                break
            mid = f"R{r}M{step}"
            nodes.append(mid)
            node_budget -= 1
            links.append((prev, mid, cap, route_cost))
            prev = mid
        links.append((prev, "T", cap, route_cost))
    merged: dict[tuple[str, str], tuple] = {}
    for a, b, c, p in links:
        key = (a, b) if a <= b else (b, a)
        merged[key] = (key[0], key[1], c, p)
    return mknet(list(merged.values()), wavelength_count=rng.randint(1, 3), net_id=f"par{tag}")


@pytest.fixture
def rng():
    return random.Random(20_260_808)
