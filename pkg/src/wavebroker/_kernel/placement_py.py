"""Pure-Python placement kernel; behavioral mirror of the Cython extension.

One call answers: given candidate paths in ascending cost order and the
current occupancy of a network, where does the next wavelength unit go?
Tie order is (path cost, wavelength index, path rank).
"""

from __future__ import annotations


def cheapest_placement(path_off, path_links, path_costs, occ, used, caps, banned, n_wl):
    """Pick the cheapest feasible (path, wavelength) cell for one unit.

    Arguments are flat buffers so the native kernel can share the exact
    same signature:

    - path_off/path_links: ragged list of link indices per candidate path
    - path_costs: per-wavelength cost of each path, ascending
    - occ: link-major occupancy grid, ``occ[link * n_wl + w]`` nonzero = taken
    - used/caps: per-link occupied counts and capacity limits
    - banned: wavelengths this connection may not reuse

    Returns ``(path_index, wavelength_index)`` with 0-based wavelength, or
    ``(-1, -1)`` when nothing fits.
    """
    n_paths = len(path_off) - 1
    best_p = -1
    best_w = -1
    best_cost = 0
    for p in range(n_paths):
        cost = path_costs[p]
        if best_p >= 0 and cost > best_cost:
            break
        start = path_off[p]
        end = path_off[p + 1]
        blocked = False
        for i in range(start, end):
            link = path_links[i]
            if used[link] >= caps[link]:
                blocked = True
                break
        if blocked:
            continue
        # once a same-cost candidate exists, only a strictly lower wavelength wins
        limit = best_w if best_p >= 0 else n_wl
        for w in range(limit):
            if banned[w]:
                continue
            free = True
            for i in range(start, end):
                if occ[path_links[i] * n_wl + w]:
                    free = False
                    break
            if free:
                best_p = p
                best_w = w
                best_cost = cost
                break
    return best_p, best_w
