# cython: boundscheck=False, wraparound=False, cdivision=True
"""Native placement kernel.  Keep in lockstep with placement_py.py."""


def cheapest_placement(const long long[::1] path_off,
                       const long long[::1] path_links,
                       const long long[::1] path_costs,
                       const unsigned char[::1] occ,
                       const long long[::1] used,
                       const long long[::1] caps,
                       const unsigned char[::1] banned,
                       Py_ssize_t n_wl):
    cdef Py_ssize_t n_paths = path_off.shape[0] - 1
    cdef Py_ssize_t best_p = -1
    cdef Py_ssize_t best_w = -1
    cdef long long best_cost = 0
    cdef long long cost
    cdef Py_ssize_t p, w, i, start, end, limit, link
    cdef bint blocked, free

    for p in range(n_paths):
        cost = path_costs[p]
        if best_p >= 0 and cost > best_cost:
            break
        start = <Py_ssize_t> path_off[p]
        end = <Py_ssize_t> path_off[p + 1]
        blocked = False
        for i in range(start, end):
            link = <Py_ssize_t> path_links[i]
            if used[link] >= caps[link]:
                blocked = True
                break
        if blocked:
            continue
        limit = best_w if best_p >= 0 else n_wl
        for w in range(limit):
            if banned[w]:
                continue
            free = True
            for i in range(start, end):
                if occ[(<Py_ssize_t> path_links[i]) * n_wl + w]:
                    free = False
                    break
            if free:
                best_p = p
                best_w = w
                best_cost = cost
                break
    return best_p, best_w
