"""Immutable network model: nodes, bidirectional fiber links, wavelength budget.

Link capacity bounds how many wavelengths the fiber may carry at once and
``unit_cost`` is the price of lighting one wavelength on it.  Networks are
plain values; nothing here mutates after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import NetworkTooLargeError, NoPathError, Violation

# Complete simple-path enumeration is exponential; desk-scale graphs only.
MAX_ROUTE_NODES = 12

Path = tuple[str, ...]


@dataclass(frozen=True)
class Link:
    """Bidirectional fiber link between two named nodes."""

    a: str
    b: str
    capacity: int
    unit_cost: int

    def key(self) -> tuple[str, str]:
        """Direction-free identity of the link."""
        return (self.a, self.b) if self.a <= self.b else (self.b, self.a)


@dataclass(frozen=True)
class Network:
    id: str
    nodes: frozenset[str]
    links: tuple[Link, ...]
    wavelength_count: int

    @cached_property
    def link_by_key(self) -> dict[tuple[str, str], Link]:
        # first one wins; duplicate links are reported by validate_network
        out: dict[tuple[str, str], Link] = {}
        for link in self.links:
            out.setdefault(link.key(), link)
        return out

    @cached_property
    def adjacency(self) -> dict[str, tuple[str, ...]]:
        nbrs: dict[str, set[str]] = {n: set() for n in self.nodes}
        for link in self.links:
            if link.a in nbrs and link.b in nbrs and link.a != link.b:
                nbrs[link.a].add(link.b)
                nbrs[link.b].add(link.a)
        return {n: tuple(sorted(v)) for n, v in nbrs.items()}


def make_network(net_id: str, nodes, links, wavelength_count: int) -> Network:
    """Build a Network with links stored in canonical order."""
    return Network(
        id=net_id,
        nodes=frozenset(nodes),
        links=tuple(sorted(links, key=lambda l: l.key())),
        wavelength_count=wavelength_count,
    )


@dataclass(frozen=True)
class VirtualChannel:
    """A requested end-to-end logical connection."""

    src: str
    dst: str
    label: str

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"virtual channel {self.label!r} has identical endpoints")
        if not self.label:
            raise ValueError("virtual channel label must be non-empty")


@dataclass(frozen=True)
class DemandRequest:
    vc: VirtualChannel
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("demand must request at least one wavelength")


def validate_network(net: Network) -> list[Violation]:
    """Check every structural invariant; an empty list means the network is valid."""
    violations: list[Violation] = []
    for node in net.nodes:
        if not node:
            violations.append(Violation("empty-node-id", "network contains an empty node label"))
    if net.wavelength_count < 1:
        violations.append(
            Violation("bad-wavelength-count", f"wavelength_count={net.wavelength_count}, need >= 1")
        )
    seen: set[tuple[str, str]] = set()
    for link in net.links:
        name = f"{link.a}-{link.b}"
        if link.a == link.b:
            violations.append(Violation("self-loop", f"link {name} starts and ends at the same node"))
        for end in (link.a, link.b):
            if end not in net.nodes:
                violations.append(Violation("dangling-endpoint", f"link {name} references unknown node {end!r}"))
        if link.key() in seen:
            violations.append(Violation("duplicate-link", f"more than one link joins {link.key()}"))
        seen.add(link.key())
        if link.capacity < 0:
            violations.append(Violation("negative-capacity", f"link {name} has capacity {link.capacity}"))
        if link.unit_cost < 0:
            violations.append(Violation("negative-cost", f"link {name} has unit_cost {link.unit_cost}"))
    return violations


def path_cost(net: Network, path: Path) -> int:
    """Per-wavelength cost of a route: sum of unit costs along its links."""
    total = 0
    for u, v in zip(path, path[1:]):
        key = (u, v) if u <= v else (v, u)
        total += net.link_by_key[key].unit_cost
    return total


def route_candidates(net: Network, vc: VirtualChannel) -> list[Path]:
    """All simple paths from vc.src to vc.dst, cheapest first.

    Ordering is total and insertion-independent: ascending per-wavelength
    path cost, ties broken lexicographically by the node-label sequence.
    Raises NoPathError when the endpoints are disconnected and
    NetworkTooLargeError beyond MAX_ROUTE_NODES nodes.
    """
    if len(net.nodes) > MAX_ROUTE_NODES:
        raise NetworkTooLargeError(
            f"{len(net.nodes)} nodes; complete path enumeration is capped at {MAX_ROUTE_NODES}"
        )
    if vc.src not in net.nodes or vc.dst not in net.nodes:
        raise ValueError(f"virtual channel {vc.label!r} references nodes outside network {net.id!r}")

    adjacency = net.adjacency
    found: list[Path] = []
    stack = [vc.src]
    on_path = {vc.src}

    def walk(node: str) -> None:
        for nxt in adjacency[node]:
            if nxt == vc.dst:
                found.append(tuple(stack) + (vc.dst,))
            elif nxt not in on_path:
                stack.append(nxt)
                on_path.add(nxt)
                walk(nxt)
                on_path.remove(nxt)
                stack.pop()

    walk(vc.src)
    if not found:
        raise NoPathError(f"{vc.src} and {vc.dst} are disconnected in network {net.id!r}")
    found.sort(key=lambda p: (path_cost(net, p), p))
    return found
