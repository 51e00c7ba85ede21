"""Hot inner loops.

Each kernel exists twice: a loop version compiled with ``numba.njit`` and a
pure-numpy version.  The public name binds to the compiled loop unless numba
is missing or ``IFSPOVM_DISABLE_NUMBA`` is set to a truthy value at import
time.  Both variants stay importable (``*_nb`` / ``*_np``) so the benchmark and
the tests can compare them directly.
"""
import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FLAG = "IFSPOVM_DISABLE_NUMBA"


def _numba_disabled_by_env():
    return os.environ.get(_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _numba_disabled_by_env()


def _njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend():
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Directed Hausdorff distance: max_i min_j |a_i - b_j|
# ---------------------------------------------------------------------------


def _directed_hausdorff_loop(a, b):
    # early-break scan: once a point of ``a`` is closer than the running max
    # to some point of ``b`` it cannot raise the max any further
    cmax = 0.0
    n, d = a.shape
    m = b.shape[0]
    for i in range(n):
        cmin = np.inf
        broke = False
        for j in range(m):
            s = 0.0
            for k in range(d):
                t = a[i, k] - b[j, k]
                s += t * t
            if s < cmax:
                broke = True
                break
            if s < cmin:
                cmin = s
        if not broke and cmin > cmax:
            cmax = cmin
    return math.sqrt(cmax)


directed_hausdorff_nb = _njit(_directed_hausdorff_loop)


def directed_hausdorff_np(a, b, chunk=2048):
    best = 0.0
    for start in range(0, a.shape[0], chunk):
        block = a[start:start + chunk]
        diff = block[:, None, :] - b[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        best = max(best, float(sq.min(axis=1).max()))
    return math.sqrt(best)


# ---------------------------------------------------------------------------
# Leader clustering: each point joins the first earlier leader within radius
# ---------------------------------------------------------------------------


def _leader_labels_loop(points, radius):
    n, d = points.shape
    r2 = radius * radius
    labels = np.empty(n, dtype=np.int64)
    leaders = np.empty(n, dtype=np.int64)
    nlead = 0
    for i in range(n):
        found = -1
        for L in range(nlead):
            j = leaders[L]
            s = 0.0
            for k in range(d):
                t = points[i, k] - points[j, k]
                s += t * t
            if s <= r2:
                found = L
                break
        if found < 0:
            leaders[nlead] = i
            labels[i] = nlead
            nlead += 1
        else:
            labels[i] = found
    return labels, leaders[:nlead].copy()


leader_labels_nb = _njit(_leader_labels_loop)


def leader_labels_np(points, radius):
    n = points.shape[0]
    r2 = radius * radius
    labels = np.empty(n, dtype=np.int64)
    leaders = []
    lead_pts = np.empty((0, points.shape[1]))
    for i in range(n):
        if leaders:
            diff = lead_pts - points[i]
            hit = np.flatnonzero(np.einsum("ij,ij->i", diff, diff) <= r2)
            if hit.size:
                labels[i] = hit[0]
                continue
        labels[i] = len(leaders)
        leaders.append(i)
        lead_pts = points[leaders]
    return labels, np.asarray(leaders, dtype=np.int64)


# ---------------------------------------------------------------------------
# Cyclic Jacobi eigensolver for real symmetric matrices
# ---------------------------------------------------------------------------


def _jacobi_loop(a, tol, max_sweeps):
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n)
    fro2 = 0.0
    for p in range(n):
        for q in range(n):
            fro2 += a[p, q] * a[p, q]
    target = tol * tol * fro2
    sweeps = 0
    while sweeps < max_sweeps:
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += 2.0 * a[p, q] * a[p, q]
        if off <= target or off == 0.0:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.hypot(theta, 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return w, v, sweeps


jacobi_eigh_nb = _njit(_jacobi_loop)


def _round_robin(n):
    """Tournament schedule: n-1 rounds of n/2 disjoint pairs (n even)."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        left, right = players[:half], players[half:][::-1]
        p = np.array([min(x, y) for x, y in zip(left, right)])
        q = np.array([max(x, y) for x, y in zip(left, right)])
        rounds.append((p, q))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh_np(a, tol, max_sweeps):
    """Parallel-order Jacobi: each round rotates n/2 disjoint pairs at once."""
    n0 = a.shape[0]
    n = n0 + (n0 % 2)
    work = np.zeros((n, n))
    work[:n0, :n0] = a
    v = np.eye(n)
    target = tol * tol * float(np.sum(a * a))
    rounds = _round_robin(n) if n > 1 else []
    sweeps = 0
    while sweeps < max_sweeps:
        off = float(np.sum(work * work) - np.sum(np.diag(work) ** 2))
        if off <= target or off == 0.0:
            break
        sweeps += 1
        for p, q in rounds:
            apq = work[p, q]
            app = work[p, p]
            aqq = work[q, q]
            nz = apq != 0.0
            safe = np.where(nz, apq, 1.0)
            # a subnormal apq sends theta to inf, and t to its limit 0
            with np.errstate(over="ignore"):
                theta = (aqq - app) / (2.0 * safe)
                t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t = np.where(theta == 0.0, 1.0, t)
            t = np.where(nz, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            cp, cq = work[:, p].copy(), work[:, q].copy()
            work[:, p] = c * cp - s * cq
            work[:, q] = s * cp + c * cq
            rp, rq = work[p, :].copy(), work[q, :].copy()
            work[p, :] = c[:, None] * rp - s[:, None] * rq
            work[q, :] = s[:, None] * rp + c[:, None] * rq
            work[p, q] = 0.0
            work[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    # the padding index never couples (its off-diagonals stay exactly zero)
    return np.diag(work)[:n0].copy(), v[:n0, :n0].copy(), sweeps


# ---------------------------------------------------------------------------
# Transportation simplex (MODI / u-v method) on a dense cost matrix
# ---------------------------------------------------------------------------


def _tree_path(basic, m, n, src_row, dst_col, parent):
    """Parent pointers of a BFS over the basis tree rooted at ``src_row``.

    Nodes 0..m-1 are rows and m..m+n-1 are columns.
    """
    total = m + n
    for k in range(total):
        parent[k] = -2
    queue = np.empty(total, dtype=np.int64)
    head = 0
    tail = 0
    queue[tail] = src_row
    tail += 1
    parent[src_row] = -1
    while head < tail:
        node = queue[head]
        head += 1
        if node == m + dst_col:
            break
        if node < m:
            for j in range(n):
                if basic[node, j] and parent[m + j] == -2:
                    parent[m + j] = node
                    queue[tail] = m + j
                    tail += 1
        else:
            j = node - m
            for i in range(m):
                if basic[i, j] and parent[i] == -2:
                    parent[i] = node
                    queue[tail] = i
                    tail += 1


def _make_transport(tree_path):
    def _transport_loop(a, b, cost, eps, max_iter):
        m = a.shape[0]
        n = b.shape[0]
        flow = np.zeros((m, n))
        basic = np.zeros((m, n), dtype=np.bool_)
        supply = a.copy()
        demand = b.copy()
        # north-west corner start: m + n - 1 basic cells, a spanning tree
        i = 0
        j = 0
        while True:
            basic[i, j] = True
            if i == m - 1 and j == n - 1:
                flow[i, j] = max(min(supply[i], demand[j]), 0.0)
                break
            if (supply[i] <= demand[j] and i < m - 1) or j == n - 1:
                x = supply[i]
                flow[i, j] = x
                demand[j] -= x
                supply[i] = 0.0
                i += 1
            else:
                x = demand[j]
                flow[i, j] = x
                supply[i] -= x
                demand[j] = 0.0
                j += 1
        u = np.zeros(m)
        v = np.zeros(n)
        parent = np.empty(m + n, dtype=np.int64)
        known = np.zeros(m + n, dtype=np.bool_)
        queue = np.empty(m + n, dtype=np.int64)
        path_r = np.empty(m + n, dtype=np.int64)
        path_c = np.empty(m + n, dtype=np.int64)
        it = 0
        optimal = False
        while it < max_iter:
            # potentials: u_i + v_j = c_ij on the basis tree, u_0 = 0
            for k in range(m + n):
                known[k] = False
            u[0] = 0.0
            known[0] = True
            head = 0
            tail = 1
            queue[0] = 0
            while head < tail:
                node = queue[head]
                head += 1
                if node < m:
                    for jj in range(n):
                        if basic[node, jj] and not known[m + jj]:
                            v[jj] = cost[node, jj] - u[node]
                            known[m + jj] = True
                            queue[tail] = m + jj
                            tail += 1
                else:
                    jj = node - m
                    for ii in range(m):
                        if basic[ii, jj] and not known[ii]:
                            u[ii] = cost[ii, jj] - v[jj]
                            known[ii] = True
                            queue[tail] = ii
                            tail += 1
            best = -eps
            ei = -1
            ej = -1
            for ii in range(m):
                for jj in range(n):
                    if not basic[ii, jj]:
                        r = cost[ii, jj] - u[ii] - v[jj]
                        if r < best:
                            best = r
                            ei = ii
                            ej = jj
            if ei < 0:
                optimal = True
                break
            it += 1
            tree_path(basic, m, n, ei, ej, parent)
            # walk back from column ej to row ei collecting tree edges
            length = 0
            node = m + ej
            while parent[node] != -1:
                par = parent[node]
                if node >= m:
                    path_r[length] = par
                    path_c[length] = node - m
                else:
                    path_r[length] = node
                    path_c[length] = par - m
                length += 1
                node = par
            # edges listed from ej's side: the first edge touches column ej and
            # carries sign '-'; signs alternate along the walk
            theta = np.inf
            leave = -1
            for k in range(0, length, 2):
                f = flow[path_r[k], path_c[k]]
                if f < theta:
                    theta = f
                    leave = k
            for k in range(length):
                if k % 2 == 0:
                    flow[path_r[k], path_c[k]] -= theta
                else:
                    flow[path_r[k], path_c[k]] += theta
            flow[ei, ej] += theta
            basic[ei, ej] = True
            lr = path_r[leave]
            lc = path_c[leave]
            basic[lr, lc] = False
            flow[lr, lc] = 0.0
        return flow, u, v, it, optimal

    return _transport_loop

transport_simplex_nb = _njit(_make_transport(_njit(_tree_path)))
# same pivoting rule, interpreted; slow but dependency-free
transport_simplex_np = _make_transport(_tree_path)


if USE_NUMBA:
    directed_hausdorff = directed_hausdorff_nb
    leader_labels = leader_labels_nb
    jacobi_eigh_raw = jacobi_eigh_nb
    transport_simplex = transport_simplex_nb
else:
    directed_hausdorff = directed_hausdorff_np
    leader_labels = leader_labels_np
    jacobi_eigh_raw = jacobi_eigh_np
    transport_simplex = transport_simplex_np
