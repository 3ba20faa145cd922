"""Total-cost and marginal-cost curves per virtual channel.

The marginal cost at quantity q is what one more wavelength costs given
everything already allocated; it is piecewise constant and never
decreases, because each unit takes the cheapest placement still available
and placements only consume capacity.  The implied total cost is piecewise
linear with TC(0) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyCurveError, InfeasibleError
from .rwa import Allocation, incremental_allocate
from .topology import Network, VirtualChannel


@dataclass(frozen=True)
class CurveSegment:
    q_from: int
    q_to: int
    mc: int


@dataclass(frozen=True)
class CostCurve:
    """Per-channel supply curve: contiguous constant-MC segments from q=1 up."""

    vc: VirtualChannel
    segments: tuple[CurveSegment, ...]
    q_max: int

    def mc_at(self, q: int) -> int:
        for seg in self.segments:
            if seg.q_from <= q <= seg.q_to:
                return seg.mc
        raise ValueError(f"q={q} outside curve (q_max={self.q_max})")

    def total_cost(self, q: int) -> int:
        if q < 0 or q > self.q_max:
            raise ValueError(f"q={q} outside curve (q_max={self.q_max})")
        total = 0
        for seg in self.segments:
            if q < seg.q_from:
                break
            total += seg.mc * (min(q, seg.q_to) - seg.q_from + 1)
        return total


def total_cost_curve(net: Network, state: Allocation, vc: VirtualChannel, q_cap: int) -> CostCurve:
    """Probe unit costs up to q_cap by repeated cheapest placement on a scratch copy.

    q_max is the number of units that actually fit (== q_cap when the probe
    was capped before exhaustion).  Raises EmptyCurveError when not even a
    single wavelength fits.
    """
    if q_cap < 1:
        raise ValueError("q_cap must be >= 1")
    try:
        delta, _added = incremental_allocate(net, state, vc, q_cap)
    except InfeasibleError as exc:
        if exc.placed == 0:
            raise EmptyCurveError(f"{vc.label}: no capacity for even one wavelength") from exc
        delta = list(exc.delta)
    segments: list[CurveSegment] = []
    for q, lp in enumerate(delta, start=1):
        mc = lp.cost(net)
        if segments and segments[-1].mc == mc:
            last = segments[-1]
            segments[-1] = CurveSegment(last.q_from, q, mc)
        else:
            segments.append(CurveSegment(q, q, mc))
    return CostCurve(vc=vc, segments=tuple(segments), q_max=len(delta))


def marginal_cost(net: Network, state: Allocation, vc: VirtualChannel) -> int:
    """Cost of the next single wavelength on this channel given current state.

    Raises InfeasibleError when no capacity remains.
    """
    _delta, added = incremental_allocate(net, state, vc, 1)
    return added


def curve_csv_rows(curve: CostCurve) -> list[tuple[str, int, int, int]]:
    """Rows for the curve CSV: (vc, q_from, q_to, mc_minor_units)."""
    return [(curve.vc.label, s.q_from, s.q_to, s.mc) for s in curve.segments]
