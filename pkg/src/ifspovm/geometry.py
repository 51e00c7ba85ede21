"""Affine contractions, iterated function systems and their attractors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ConvergenceError, DomainError
from .linalg import spectral_norm


def apply_affine(linear, offset, points):
    """Evaluate x -> A x + b row-wise.

    Written out coordinate by coordinate so that the floating point result of
    one point never depends on how many other points share the call.
    """
    d = linear.shape[0]
    if d == 1:
        return points * linear[0, 0] + offset[0]
    out = np.empty_like(points)
    for r in range(d):
        acc = points[:, 0] * linear[r, 0]
        for c in range(1, d):
            acc = acc + points[:, c] * linear[r, c]
        out[:, r] = acc + offset[r]
    return out


class AffineContraction:
    """The map x -> A x + b with spectral norm ``ratio`` < 1."""

    def __init__(self, linear, offset):
        a = np.atleast_2d(np.asarray(linear, dtype=float))
        b = np.atleast_1d(np.asarray(offset, dtype=float)).reshape(-1)
        if a.shape[0] != a.shape[1] or a.shape[0] not in (1, 2):
            raise DomainError(f"linear part must be 1x1 or 2x2, got {a.shape}")
        if b.shape[0] != a.shape[0]:
            raise DomainError("offset length does not match the linear part")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise DomainError("map coefficients must be finite")
        self.linear = a
        self.offset = b
        self.ratio = spectral_norm(a)
        if not self.ratio < 1.0:
            raise DomainError(f"not a contraction: ratio {self.ratio!r} >= 1")

    @property
    def dimension(self):
        return self.linear.shape[0]

    def __call__(self, points):
        return apply_affine(self.linear, self.offset, np.asarray(points, dtype=float))

    def fixed_point(self):
        if self.dimension == 1:
            return np.array([self.offset[0] / (1.0 - self.linear[0, 0])])
        return np.linalg.solve(np.eye(self.dimension) - self.linear, self.offset)

    def inverse_interval(self, lo, hi):
        """Preimage of [lo, hi] under a 1-D map (as an ordered pair)."""
        a, b = self.linear[0, 0], self.offset[0]
        if a == 0.0:
            raise DomainError("constant map has no interval inverse")
        # callers check for overflow to infinity themselves
        with np.errstate(over="ignore"):
            p, q = (lo - b) / a, (hi - b) / a
        return (p, q) if p <= q else (q, p)

    def image_interval(self, lo, hi):
        a, b = self.linear[0, 0], self.offset[0]
        p, q = a * lo + b, a * hi + b
        return (p, q) if p <= q else (q, p)

    def __repr__(self):
        return f"AffineContraction(linear={self.linear.tolist()}, offset={self.offset.tolist()})"


class IFSystem:
    """An ordered family of N >= 2 affine contractions of the same dimension."""

    def __init__(self, maps: Sequence[AffineContraction]):
        maps = list(maps)
        if len(maps) < 2:
            raise DomainError("an IFS needs at least two maps")
        dims = {m.dimension for m in maps}
        if len(dims) != 1:
            raise DomainError("maps act on spaces of different dimension")
        self.maps = maps
        self.dimension = dims.pop()
        self.ratio = max(m.ratio for m in maps)
        self.bounding_box = _invariant_box(maps)

    @classmethod
    def from_slopes(cls, pairs):
        """Build a 1-D system from (slope, offset) pairs."""
        return cls([AffineContraction([[s]], [b]) for s, b in pairs])

    @property
    def n_maps(self):
        return len(self.maps)

    def seed(self):
        """Fixed point of the first map, the common starting point."""
        return self.maps[0].fixed_point()

    def box_diameter(self):
        lo, hi = self.bounding_box
        return float(np.linalg.norm(hi - lo))

    def __repr__(self):
        return f"IFSystem({self.maps!r})"


def _invariant_box(maps):
    d = maps[0].dimension
    fps = np.array([m.fixed_point() for m in maps])
    if d == 1:
        lo, hi = float(fps.min()), float(fps.max())
        # the convex hull of the attractor is the least interval with
        # hull(U sigma_i(J)) = J; iterate up from the fixed points
        for _ in range(10_000):
            ends = [m.image_interval(lo, hi) for m in maps]
            nlo = min(lo, min(e[0] for e in ends))
            nhi = max(hi, max(e[1] for e in ends))
            if nlo == lo and nhi == hi:
                break
            lo, hi = nlo, nhi
        return np.array([lo]), np.array([hi])
    c = fps.mean(axis=0)
    r_inf = max(float(np.abs(m.linear).sum(axis=1).max()) for m in maps)
    if r_inf < 1.0:
        # sup-norm ball around c: invariant when |sigma_i(c) - c| + r R <= R
        shift = max(float(np.abs(m(c[None, :])[0] - c).max()) for m in maps)
        R = shift / (1.0 - r_inf)
    else:
        # Euclidean ball; its bounding square contains the attractor
        r = max(m.ratio for m in maps)
        shift = max(float(np.linalg.norm(m(c[None, :])[0] - c)) for m in maps)
        R = shift / (1.0 - r)
    R *= 1.0 + 1e-12
    return c - R, c + R


@dataclass
class PointCloud:
    """Finite point set; stored points are pairwise further apart than the tolerance."""

    points: np.ndarray
    dedup_tolerance: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise DomainError("a point cloud needs at least one point")
        if self.dedup_tolerance < 0:
            raise DomainError("dedup_tolerance must be nonnegative")
        self.points = dedup(pts, self.dedup_tolerance)

    @property
    def dimension(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def diameter(self):
        return diameter(self.points)


def dedup(points, tol=0.0):
    """Drop repeated points, keeping first occurrences in their original order."""
    if tol == 0.0:
        _, first = np.unique(points, axis=0, return_index=True)
        return points[np.sort(first)]
    _, leaders = _kernels.leader_labels(np.ascontiguousarray(points), float(tol))
    return points[leaders]


def diameter(points):
    if points.shape[0] < 2:
        return 0.0
    if points.shape[1] == 1:
        return float(points.max() - points.min())
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff).max()))


def _as_points(x):
    if isinstance(x, PointCloud):
        return x.points
    pts = np.asarray(x, dtype=float)
    # a flat sequence is a list of points on the line
    return pts.reshape(-1, 1) if pts.ndim <= 1 else pts


def hausdorff_distance(a, b) -> float:
    pa, pb = _as_points(a), _as_points(b)
    if pa.shape[0] == 0 or pb.shape[0] == 0:
        raise DomainError("Hausdorff distance of an empty set")
    if pa.shape[1] != pb.shape[1]:
        raise DomainError("point clouds have different dimensions")
    pa, pb = np.ascontiguousarray(pa), np.ascontiguousarray(pb)
    return max(_kernels.directed_hausdorff(pa, pb), _kernels.directed_hausdorff(pb, pa))


def hb_step(ifs: IFSystem, k: PointCloud) -> PointCloud:
    """One application of K -> U sigma_i(K), images ordered by map index."""
    if k.dimension != ifs.dimension:
        raise DomainError("cloud and IFS dimensions differ")
    images = np.concatenate([m(k.points) for m in ifs.maps], axis=0)
    return PointCloud(images, k.dedup_tolerance)


@dataclass
class AttractorRun:
    cloud: PointCloud
    iterations: int
    gaps: list = field(default_factory=list)

    @property
    def final_gap(self):
        return self.gaps[-1]


def attractor(ifs: IFSystem, tol: float, max_iter: int = 64, dedup_tolerance: float = 0.0) -> AttractorRun:
    """Iterate the Hutchinson-Barnsley map from the fixed point of the first map.

    Stops at the first m with gap(K_m, K_{m+1}) <= tol and returns K_{m+1}.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    k = PointCloud(ifs.seed()[None, :], dedup_tolerance)
    gaps = []
    for m in range(max_iter):
        nxt = hb_step(ifs, k)
        g = hausdorff_distance(k, nxt)
        gaps.append(g)
        if g <= tol:
            return AttractorRun(nxt, m + 1, gaps)
        k = nxt
    raise ConvergenceError(
        f"attractor gap {gaps[-1]:.3e} still above tol {tol:.3e} after {max_iter} steps", gaps
    )


def check_word(word, n_maps):
    w = tuple(int(c) for c in word)
    for c in w:
        if not 0 <= c < n_maps:
            raise DomainError(f"letter {c} outside the alphabet 0..{n_maps - 1}")
    return w


def word_image(ifs: IFSystem, word, base) -> PointCloud:
    """sigma_{a_1} o ... o sigma_{a_k} applied to ``base``."""
    w = check_word(word, ifs.n_maps)
    pts = _as_points(base)
    tol = base.dedup_tolerance if isinstance(base, PointCloud) else 0.0
    for c in reversed(w):
        pts = ifs.maps[c](pts)
    return PointCloud(pts, tol)


def word_interval(ifs: IFSystem, word, lo, hi):
    """Image of the interval [lo, hi] under the composed word map (1-D)."""
    for c in reversed(check_word(word, ifs.n_maps)):
        lo, hi = ifs.maps[c].image_interval(lo, hi)
    return lo, hi

