"""Words, the truncated shift space, cylinder masses and the coding map."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import IFSystem, check_word
from .intervals import as_union


class ShiftSpaceModel:
    """Gamma_N^K in lexicographic order; word index = its base-N value."""

    def __init__(self, alphabet_size: int, depth: int):
        if alphabet_size < 2:
            raise DomainError("alphabet needs at least two letters")
        if depth < 1:
            raise DomainError("depth must be at least 1")
        self.alphabet_size = int(alphabet_size)
        self.depth = int(depth)

    @property
    def n_words(self):
        return self.alphabet_size ** self.depth

    def words(self):
        """(N^K, K) array of letters, row r is the word with index r."""
        n, k = self.alphabet_size, self.depth
        idx = np.arange(n ** k)
        powers = n ** np.arange(k - 1, -1, -1)
        return (idx[:, None] // powers[None, :]) % n

    def word(self, index):
        if not 0 <= index < self.n_words:
            raise DomainError("word index out of range")
        out = []
        for _ in range(self.depth):
            index, r = divmod(index, self.alphabet_size)
            out.append(r)
        return tuple(reversed(out))

    def index(self, word):
        w = check_word(word, self.alphabet_size)
        if len(w) != self.depth:
            raise DomainError(f"word length {len(w)} differs from depth {self.depth}")
        r = 0
        for c in w:
            r = r * self.alphabet_size + c
        return r

    def prefix_range(self, prefix):
        """Indices [start, stop) of the words that begin with ``prefix``."""
        p = check_word(prefix, self.alphabet_size)
        if len(p) > self.depth:
            raise DomainError("prefix longer than the model depth")
        start = 0
        for c in p:
            start = start * self.alphabet_size + c
        span = self.alphabet_size ** (self.depth - len(p))
        return start * span, (start + 1) * span

    def shift_in_indices(self, i):
        """Index of trunc(i . w) for every word w."""
        n = self.alphabet_size
        return i * n ** (self.depth - 1) + np.arange(self.n_words) // n

    def __eq__(self, other):
        return isinstance(other, ShiftSpaceModel) and (self.alphabet_size, self.depth) == (
            other.alphabet_size,
            other.depth,
        )

    def __repr__(self):
        return f"ShiftSpaceModel(N={self.alphabet_size}, K={self.depth})"


@dataclass(frozen=True)
class Cylinder:
    prefix: tuple

    def label(self):
        return "".join(str(c) for c in self.prefix)


def render(word):
    return "".join(str(c) for c in word)


def omega_metric(alpha, beta) -> float:
    """2^-j for the first (1-based) differing position j, 0 for equal words."""
    if len(alpha) != len(beta):
        raise DomainError("words of different lengths")
    for j, (a, b) in enumerate(zip(alpha, beta), start=1):
        if a != b:
            return 2.0 ** -j
    return 0.0


def shift_in(i, w, depth=None, n_letters=None):
    """Prepend letter i; drop the last letter if the result exceeds ``depth``."""
    if n_letters is not None:
        check_word((i,), n_letters)
        check_word(w, n_letters)
    elif int(i) < 0:
        raise DomainError("letters are nonnegative")
    out = (int(i),) + tuple(int(c) for c in w)
    if depth is not None and len(out) > depth:
        out = out[:depth]
    return out


def shift_out(w):
    if len(w) == 0:
        raise DomainError("cannot shift the empty word")
    return tuple(w[1:])


def bernoulli_mass(c, model: ShiftSpaceModel) -> float:
    prefix = c.prefix if isinstance(c, Cylinder) else tuple(c)
    if len(prefix) > model.depth:
        raise DomainError("cylinder deeper than the model")
    check_word(prefix, model.alphabet_size)
    return float(model.alphabet_size) ** -len(prefix)


def coding_point(ifs: IFSystem, w):
    """sigma_{w_1} o ... o sigma_{w_K} applied to the fixed point of sigma_0."""
    w = check_word(w, ifs.n_maps)
    x = ifs.seed()[None, :]
    for c in reversed(w):
        x = ifs.maps[c](x)
    return x[0]


def coding_points(ifs: IFSystem, model: ShiftSpaceModel):
    """Coding points of every depth-K word, rows in word-index order."""
    _check_model(ifs, model)
    pts = ifs.seed()[None, :]
    for _ in range(model.depth):
        pts = np.concatenate([m(pts) for m in ifs.maps], axis=0)
    return pts


def cylinder_intervals(ifs: IFSystem, model: ShiftSpaceModel):
    """sigma_w(bounding interval) for every depth-K word (1-D)."""
    _check_model(ifs, model)
    if ifs.dimension != 1:
        raise DomainError("cylinder intervals need a 1-D system")
    lo, hi = ifs.bounding_box
    lows, highs = lo.copy(), hi.copy()
    for _ in range(model.depth):
        nl, nh = [], []
        for m in ifs.maps:
            a, b = m.linear[0, 0], m.offset[0]
            p, q = lows * a + b, highs * a + b
            nl.append(np.minimum(p, q))
            nh.append(np.maximum(p, q))
        lows, highs = np.concatenate(nl), np.concatenate(nh)
    return lows, highs


def _check_model(ifs, model):
    if model.alphabet_size != ifs.n_maps:
        raise DomainError("model alphabet differs from the number of maps")


@dataclass
class Preimage:
    model: ShiftSpaceModel
    indices: np.ndarray  # word indices whose coding point lies in delta
    ambiguous: np.ndarray  # word indices whose cylinder image straddles an endpoint

    def cylinders(self):
        return [Cylinder(self.model.word(int(i))) for i in self.indices]

    def ambiguous_cylinders(self):
        return [Cylinder(self.model.word(int(i))) for i in self.ambiguous]

    def __len__(self):
        return self.indices.shape[0]


def coding_preimage(ifs: IFSystem, delta, model: ShiftSpaceModel, points=None, boxes=None) -> Preimage:
    """Depth-K cylinders coded into ``delta``, with boundary cylinders flagged.

    A cylinder is ambiguous when its image of the bounding interval is neither
    inside ``delta`` nor disjoint from it: only then can points of the true
    cylinder fall on both sides.
    """
    if ifs.dimension != 1:
        raise DomainError("coding preimages are computed on the line")
    delta = as_union(delta)
    pts = coding_points(ifs, model) if points is None else points
    lows, highs = cylinder_intervals(ifs, model) if boxes is None else boxes
    inside = delta.contains(pts[:, 0])
    contained, disjoint = delta.classify(lows, highs)
    amb = ~(contained | disjoint)
    return Preimage(model, np.flatnonzero(inside), np.flatnonzero(amb))
