"""Finitely supported probability measures and the transfer operator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError
from .geometry import IFSystem
from .intervals import as_union

MASS_TOL = 1e-12


class DiscreteMeasure:
    """Probability measure sum_a w_a delta_{x_a}.

    ``provenance`` optionally holds, per atom, the tuple of words (tuples of
    letters) whose images landed on that atom.
    """

    def __init__(self, atoms, weights, provenance=None, merge_radius=0.0, validate=True):
        atoms = np.asarray(atoms, dtype=float)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if atoms.shape[0] != weights.shape[0]:
            raise DomainError("atoms and weights differ in length")
        if provenance is not None and len(provenance) != weights.shape[0]:
            raise DomainError("one provenance entry per atom is required")
        self.atoms = atoms
        self.weights = weights
        self.provenance = None if provenance is None else tuple(tuple(map(tuple, p)) for p in provenance)
        self.merge_radius = float(merge_radius)
        if validate:
            self.validate()

    def validate(self):
        if self.weights.shape[0] == 0:
            raise DomainError("a probability measure needs at least one atom")
        if not np.all(self.weights > 0):
            raise DomainError("weights must be positive")
        total = float(self.weights.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise DomainError(f"weights sum to {total!r}, not 1")
        if np.unique(self.atoms, axis=0).shape[0] != self.atoms.shape[0]:
            raise DomainError("atoms must be pairwise distinct")

    @classmethod
    def merged(cls, atoms, weights, provenance=None, merge_radius=0.0):
        """Build a measure from raw atoms, pooling coincident ones.

        Returns the measure and, for every raw atom, the index of the atom it
        was pooled into.
        """
        atoms = np.asarray(atoms, dtype=float)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        weights = np.asarray(weights, dtype=float)
        labels, leaders = merge_labels(atoms, merge_radius)
        k = leaders.shape[0]
        w = np.zeros(k)
        np.add.at(w, labels, weights)
        prov = None
        if provenance is not None:
            buckets = [[] for _ in range(k)]
            for lab, words in zip(labels, provenance):
                buckets[lab].extend(words)
            prov = buckets
        return cls(atoms[leaders], w, prov, merge_radius), labels

    @classmethod
    def dirac(cls, point, word=()):
        return cls(np.atleast_1d(np.asarray(point, dtype=float))[None, :], [1.0], [(tuple(word),)])

    @property
    def dimension(self):
        return self.atoms.shape[1]

    def __len__(self):
        return self.weights.shape[0]

    def mass_of(self, k):
        return float(self.weights[as_union(k).contains(self._line())].sum())

    def _line(self):
        if self.dimension != 1:
            raise DomainError("interval operations need a measure on the line")
        return self.atoms[:, 0]

    def sorted(self):
        """Same measure with atoms in lexicographic order."""
        order = np.lexsort(self.atoms.T[::-1])
        prov = None if self.provenance is None else [self.provenance[i] for i in order]
        return DiscreteMeasure(self.atoms[order], self.weights[order], prov, self.merge_radius, validate=False)

    def atom_of_word(self):
        """Dictionary word -> atom index (needs provenance)."""
        if self.provenance is None:
            raise DomainError("measure carries no word provenance")
        return {w: a for a, words in enumerate(self.provenance) for w in words}

    def __repr__(self):
        return f"DiscreteMeasure(n_atoms={len(self)}, dim={self.dimension})"


def merge_labels(points, radius=0.0):
    """Group indices of coincident points; groups are numbered by first occurrence."""
    if radius == 0.0:
        _, first, inv = np.unique(points, axis=0, return_index=True, return_inverse=True)
        inv = inv.reshape(-1)
        order = np.argsort(first, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(order.shape[0])
        return rank[inv], first[order]
    return _kernels.leader_labels(np.ascontiguousarray(points), float(radius))


@dataclass
class TransferResult:
    measure: DiscreteMeasure
    incidence: np.ndarray  # incidence[i, a] = output atom of sigma_i(x_a)


def transfer_step(ifs: IFSystem, nu: DiscreteMeasure, with_incidence=False, merge_radius=None):
    """nu -> (1/N) sum_i nu o sigma_i^{-1}, pooling coincident images."""
    if nu.dimension != ifs.dimension:
        raise DomainError("measure and IFS dimensions differ")
    radius = nu.merge_radius if merge_radius is None else merge_radius
    n = ifs.n_maps
    atoms = np.concatenate([m(nu.atoms) for m in ifs.maps], axis=0)
    weights = np.concatenate([nu.weights / n] * n)
    prov = None
    if nu.provenance is not None:
        prov = [tuple((i,) + w for w in words) for i in range(n) for words in nu.provenance]
    out, labels = DiscreteMeasure.merged(atoms, weights, prov, radius)
    if with_incidence:
        return TransferResult(out, labels.reshape(n, len(nu)))
    return out


def hutchinson_measure(ifs: IFSystem, depth: int, merge_radius=0.0) -> DiscreteMeasure:
    """T^depth applied to the point mass at the fixed point of the first map."""
    if depth < 1:
        raise DomainError("depth must be at least 1")
    mu = DiscreteMeasure.dirac(ifs.seed())
    mu.merge_radius = float(merge_radius)
    for _ in range(depth):
        mu = transfer_step(ifs, mu)
    return mu


def hutchinson_sequence(ifs: IFSystem, depth: int, merge_radius=0.0):
    """[delta, T delta, ..., T^depth delta]."""
    mu = DiscreteMeasure.dirac(ifs.seed())
    mu.merge_radius = float(merge_radius)
    seq = [mu]
    for _ in range(depth):
        seq.append(transfer_step(ifs, seq[-1]))
    return seq


def kravchenko_sequence(n: int, positions) -> DiscreteMeasure:
    """2^-n delta_{x_0} + sum_{k=1}^n 2^-k delta_{x_k}."""
    if n < 1:
        raise DomainError("n must be at least 1")
    pos = np.asarray(positions, dtype=float)
    if pos.ndim == 1:
        pos = pos[:, None]
    if pos.shape[0] < n + 1:
        raise DomainError(f"need {n + 1} positions, got {pos.shape[0]}")
    pos = pos[: n + 1]
    dist = np.linalg.norm(pos - pos[0], axis=1)
    k = np.arange(n + 1)
    bad = np.flatnonzero(dist > k)
    if bad.size:
        raise DomainError(f"position {bad[0]} is further than {bad[0]} from x_0")
    weights = 2.0 ** -k.astype(float)
    weights[0] = 2.0 ** -n
    out, _ = DiscreteMeasure.merged(pos, weights)
    return out


def truncate_measure(mu: DiscreteMeasure, K) -> DiscreteMeasure:
    """mu( . cap K) / mu(K) for a finite union of closed intervals K."""
    keep = as_union(K).contains(mu._line())
    mass = float(mu.weights[keep].sum())
    if mass == 0.0:
        raise DomainError("the truncation set carries no mass")
    prov = None if mu.provenance is None else [p for p, k in zip(mu.provenance, keep) if k]
    return DiscreteMeasure(mu.atoms[keep], mu.weights[keep] / mass, prov, mu.merge_radius, validate=False)


class TruncationFamily:
    """mu_n = mu( . cap K_n) / mu(K_n) for nested sets K_1 subset K_2 subset ..."""

    def __init__(self, base: DiscreteMeasure, sets):
        self.base = base
        self.sets = [as_union(k) for k in sets]
        for a, b in zip(self.sets, self.sets[1:]):
            if not a.subset_of(b):
                raise DomainError("truncation sets must be nested")

    def __len__(self):
        return len(self.sets)

    def member(self, n):
        return truncate_measure(self.base, self.sets[n])

    def members(self):
        return [self.member(n) for n in range(len(self.sets))]

    def escaped_mass(self, n):
        """mu(Y minus K_n), summed over the atoms outside K_n."""
        out = ~self.sets[n].contains(self.base._line())
        return float(self.base.weights[out].sum())
