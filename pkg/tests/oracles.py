"""Reference computations that share no code with the package."""
import itertools
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import directed_hausdorff


def ternary_cantor(depth):
    """sum_{j<=depth} 2 a_j 3^-j over all binary digit strings, exactly."""
    pts = set()
    for digits in itertools.product((0, 1), repeat=depth):
        pts.add(sum(Fraction(2 * a, 3 ** (j + 1)) for j, a in enumerate(digits)))
    return np.array(sorted(float(p) for p in pts))


def hausdorff(a, b):
    a = np.asarray(a, dtype=float).reshape(len(a), -1)
    b = np.asarray(b, dtype=float).reshape(len(b), -1)
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


def word_points(slopes_offsets, words, seed):
    """Exact rational evaluation of sigma_{w_1} o ... o sigma_{w_k}(seed)."""
    maps = [(Fraction(s), Fraction(b)) for s, b in slopes_offsets]
    out = []
    for w in words:
        x = Fraction(seed)
        for c in reversed(w):
            s, b = maps[c]
            x = s * x + b
        out.append(x)
    return out


def transport_lp(x, a, y, b, cap=None):
    """Primal transport LP solved by HiGHS."""
    x = np.asarray(x, dtype=float).reshape(len(a), -1)
    y = np.asarray(y, dtype=float).reshape(len(b), -1)
    c = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=2)
    if cap is not None:
        c = np.minimum(c, cap)
    m, n = c.shape
    aeq = np.zeros((m + n, m * n))
    for i in range(m):
        aeq[i, i * n : (i + 1) * n] = 1
    for j in range(n):
        aeq[m + j, j::n] = 1
    r = linprog(c.ravel(), A_eq=aeq, b_eq=np.r_[a, b], bounds=(0, None), method="highs")
    assert r.status == 0
    return r.fun


def dual_lp(x, a, y, b, bounded=False, pin=True):
    """sup sum (mu - nu)_i f_i over |f_i - f_j| <= d_ij on the union support.

    ``bounded`` adds -1 <= f <= 1; ``pin`` fixes f at the first point to 0.
    """
    x = np.asarray(x, dtype=float).reshape(len(a), -1)
    y = np.asarray(y, dtype=float).reshape(len(b), -1)
    pts = np.concatenate([x, y])
    g = np.concatenate([a, -np.asarray(b)])
    n = pts.shape[0]
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    rows, rhs = [], []
    for i in range(n):
        for j in range(n):
            if i != j:
                r = np.zeros(n)
                r[i], r[j] = 1, -1
                rows.append(r)
                rhs.append(d[i, j])
    if bounded:
        bounds = [(-1, 1)] * n
    else:
        bounds = [(None, None)] * n
    if pin and not bounded:
        bounds[0] = (0, 0)
    if not pin and not bounded:
        # keep the unpinned problem bounded without changing its value
        bounds = [(-1e6, 1e6)] * n
    r = linprog(-g, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    assert r.status == 0
    return -r.fun


def all_words(n, k):
    return list(itertools.product(range(n), repeat=k))


def cdf_w1(x, a, y, b):
    """Exact area between the two CDFs on the line, in rationals."""
    xs = [Fraction(float(t)) for t in np.ravel(x)]
    ys = [Fraction(float(t)) for t in np.ravel(y)]
    jumps = {}
    for p, w in zip(xs, a):
        jumps[p] = jumps.get(p, 0) + Fraction(float(w))
    for p, w in zip(ys, b):
        jumps[p] = jumps.get(p, 0) - Fraction(float(w))
    grid = sorted(jumps)
    total, run = Fraction(0), Fraction(0)
    for left, right in zip(grid, grid[1:]):
        run += jumps[left]
        total += abs(run) * (right - left)
    return float(total)
