"""Operators between weighted finite-dimensional Hilbert spaces.

A space is C^n with <f, g> = sum_i w_i f_i conj(g_i).  Operators are stored as
plain matrices in the coordinate basis; adjoints and norms always account
for the weights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import IFSystem
from .linalg import eigvalsh, spectral_norm
from .measures import DiscreteMeasure, hutchinson_measure, transfer_step
from .symbolic import ShiftSpaceModel, coding_points

WEIGHT_TOL = 1e-12


class HilbertSpace:
    def __init__(self, weights, labels=None):
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape[0] == 0 or not np.all(w > 0):
            raise DomainError("weights must be positive")
        if abs(float(w.sum()) - 1.0) > WEIGHT_TOL:
            raise DomainError(f"weights sum to {float(w.sum())!r}, not 1")
        if labels is not None and len(labels) != w.shape[0]:
            raise DomainError("one label per coordinate is required")
        self.weights = w
        self.labels = labels

    @classmethod
    def uniform(cls, n, labels=None):
        return cls(np.full(n, 1.0 / n), labels)

    @classmethod
    def of_measure(cls, mu: DiscreteMeasure):
        return cls(mu.weights, mu.provenance)

    @property
    def dim(self):
        return self.weights.shape[0]

    def inner(self, f, g):
        return complex(np.sum(self.weights * np.asarray(f) * np.conj(np.asarray(g))))

    def norm(self, f):
        return math.sqrt(max(self.inner(f, f).real, 0.0))

    def same_as(self, other: "HilbertSpace"):
        return self is other or (self.dim == other.dim and np.array_equal(self.weights, other.weights))

    def is_uniform(self):
        return bool(np.all(self.weights == self.weights[0]))


class MatrixOperator:
    """Matrix of shape (codomain.dim, domain.dim)."""

    def __init__(self, entries, domain: HilbertSpace, codomain: HilbertSpace | None = None):
        codomain = domain if codomain is None else codomain
        m = np.asarray(entries)
        if m.shape != (codomain.dim, domain.dim):
            raise DomainError(f"matrix shape {m.shape} does not match spaces ({codomain.dim}, {domain.dim})")
        self.entries = m
        self.domain = domain
        self.codomain = codomain

    @classmethod
    def identity(cls, space: HilbertSpace):
        return cls(np.eye(space.dim), space)

    def __call__(self, f):
        return self.entries @ np.asarray(f)

    def __matmul__(self, other: "MatrixOperator"):
        if not self.domain.same_as(other.codomain):
            raise DomainError("cannot compose: spaces differ")
        return MatrixOperator(self.entries @ other.entries, other.domain, self.codomain)

    def _same_spaces(self, other):
        if not (self.domain.same_as(other.domain) and self.codomain.same_as(other.codomain)):
            raise DomainError("operators act between different spaces")

    def __add__(self, other):
        self._same_spaces(other)
        return MatrixOperator(self.entries + other.entries, self.domain, self.codomain)

    def __sub__(self, other):
        self._same_spaces(other)
        return MatrixOperator(self.entries - other.entries, self.domain, self.codomain)

    def scaled(self, c):
        return MatrixOperator(c * self.entries, self.domain, self.codomain)

    def adjoint(self):
        return adjoint(self)

    def norm(self):
        return operator_norm(self)

    def orthonormal(self):
        """The matrix in orthonormal coordinates W^{1/2} f."""
        return np.sqrt(self.codomain.weights)[:, None] * self.entries / np.sqrt(self.domain.weights)[None, :]


def adjoint(op: MatrixOperator) -> MatrixOperator:
    """B with <Ax, y>_cod = <x, By>_dom, i.e. W_dom^-1 A^H W_cod."""
    a = op.entries
    b = a.conj().T * op.codomain.weights[None, :] / op.domain.weights[:, None]
    return MatrixOperator(b, op.codomain, op.domain)


def operator_norm(op: MatrixOperator) -> float:
    m = op.orthonormal()
    if m.size == 0:
        return 0.0
    if op.domain.same_as(op.codomain) and np.allclose(m, m.conj().T, rtol=0.0, atol=1e-14):
        lam = eigvalsh(0.5 * (m + m.conj().T))
        return float(max(abs(lam[0]), abs(lam[-1])))
    return spectral_norm(m)


@dataclass
class CuntzFamily:
    """Operators S_0..S_{N-1}; ``domain`` is their common domain, ``space`` their codomain."""

    isometries: list
    flavor: str
    space: HilbertSpace
    domain: HilbertSpace
    info: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.isometries)

    def adjoints(self):
        return [adjoint(s) for s in self.isometries]

    def range_sum(self) -> MatrixOperator:
        """sum_i S_i S_i*."""
        total = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for s in self.isometries:
            total = total + (s @ adjoint(s)).entries
        return MatrixOperator(total, self.space)

    def relation1_defect(self):
        return operator_norm(self.range_sum() - MatrixOperator.identity(self.space))

    def relation2_defects(self, restrict: MatrixOperator | None = None):
        """N x N table of ||(S_i* S_j - delta_ij id) Q|| with Q = ``restrict`` or id."""
        adj = self.adjoints()
        out = np.zeros((self.n, self.n))
        ident = MatrixOperator.identity(self.domain)
        for i in range(self.n):
            for j in range(self.n):
                g = adj[i] @ self.isometries[j]
                if i == j:
                    g = g - ident
                if restrict is not None:
                    g = g @ restrict
                out[i, j] = operator_norm(g)
        return out


def build_t_family(model: ShiftSpaceModel) -> CuntzFamily:
    """T_i on the depth-K cylinder space.

    T_i* f (w) = (1/sqrt N) f(trunc(i w)); T_i is its adjoint, which under
    uniform weights is the transpose and averages away the last letter.
    """
    if model.depth < 2:
        raise DomainError("the T-family needs depth at least 2")
    space = HilbertSpace.uniform(model.n_words)
    n = model.alphabet_size
    c = 1.0 / math.sqrt(n)
    rows = np.arange(model.n_words)
    ops = []
    for i in range(n):
        t_star = np.zeros((model.n_words, model.n_words))
        t_star[rows, model.shift_in_indices(i)] = c
        ops.append(adjoint(MatrixOperator(t_star, space)))
    return CuntzFamily(ops, "symbolic", space, space, {"model": model})


def depth_projection(model: ShiftSpaceModel, level: int) -> MatrixOperator:
    """Conditional expectation onto functions of the first ``level`` letters."""
    space = HilbertSpace.uniform(model.n_words)
    span = model.alphabet_size ** (model.depth - level)
    blocks = np.arange(model.n_words) // span
    q = (blocks[:, None] == blocks[None, :]).astype(float) / span
    return MatrixOperator(q, space)


def coding_isometry(ifs: IFSystem, model: ShiftSpaceModel, mu_K: DiscreteMeasure) -> MatrixOperator:
    """(V f)(w) = f(atom coded by w): L^2(mu_K) -> L^2(Omega_K, P)."""
    if mu_K.provenance is None:
        raise DomainError("measure carries no word provenance")
    if model.alphabet_size != ifs.n_maps:
        raise DomainError("model alphabet differs from the number of maps")
    v = np.zeros((model.n_words, len(mu_K)))
    seen = np.zeros(model.n_words, dtype=int)
    for a, words in enumerate(mu_K.provenance):
        for w in words:
            if len(w) != model.depth:
                raise DomainError(f"atom {a} carries a word of length {len(w)}, model depth is {model.depth}")
            r = model.index(w)
            v[r, a] = 1.0
            seen[r] += 1
    if not np.all(seen == 1):
        raise DomainError("provenance labels do not cover every word exactly once")
    return MatrixOperator(v, HilbertSpace.of_measure(mu_K), HilbertSpace.uniform(model.n_words))


def _nearest(atoms, pts):
    d = np.abs(pts[:, None, 0] - atoms[None, :, 0]) if atoms.shape[1] == 1 else np.linalg.norm(
        pts[:, None, :] - atoms[None, :, :], axis=2
    )
    idx = d.argmin(axis=1)
    return idx, d[np.arange(pts.shape[0]), idx]


@dataclass
class FFamily:
    """F_0..F_{N-1} together with S_i = F_i* packaged as a Cuntz family."""

    F: list
    family: CuntzFamily
    mode: str
    V: MatrixOperator | None = None
    displacement: np.ndarray | None = None  # per map: max |nearest atom - sigma_i(x)|


def build_f_family(ifs: IFSystem, mu_K: DiscreteMeasure, mode="symbolic", depth=None) -> FFamily:
    """F_i phi = (1/sqrt N) phi o sigma_i at finite resolution.

    ``symbolic``: F_i = V* T_i* V on L^2(mu_K).
    ``direct``:   phi o sigma_i evaluated at the atom nearest sigma_i(x), on L^2(mu_K).
    ``matched``:  L^2(mu_K) -> L^2(mu_{K-1}); sigma_i(x) for an atom x of mu_{K-1}
                  is looked up as the atom of mu_K carrying the word i.w.
    """
    if mu_K.provenance is None:
        raise DomainError("measure carries no word provenance")
    n = ifs.n_maps
    K = len(mu_K.provenance[0][0]) if depth is None else depth
    c = 1.0 / math.sqrt(n)
    space = HilbertSpace.of_measure(mu_K)
    if mode == "symbolic":
        model = ShiftSpaceModel(n, K)
        V = coding_isometry(ifs, model, mu_K)
        tf = build_t_family(model)
        Vs = adjoint(V)
        F = [Vs @ adjoint(t) @ V for t in tf.isometries]
        fam = CuntzFamily([adjoint(f) for f in F], "symbolic", space, space, {"model": model})
        return FFamily(F, fam, mode, V=V)
    if mode == "direct":
        F, disp = [], []
        for m in ifs.maps:
            img = m(mu_K.atoms)
            idx, dist = _nearest(mu_K.atoms, img)
            f = np.zeros((len(mu_K), len(mu_K)))
            f[np.arange(len(mu_K)), idx] = c
            F.append(MatrixOperator(f, space))
            disp.append(float(dist.max()))
        fam = CuntzFamily([adjoint(f) for f in F], "geometric", space, space)
        V = coding_isometry(ifs, ShiftSpaceModel(n, K), mu_K)
        return FFamily(F, fam, mode, V=V, displacement=np.array(disp))
    if mode == "matched":
        if K < 2:
            raise DomainError("matched mode needs depth at least 2")
        prev = hutchinson_measure(ifs, K - 1, mu_K.merge_radius)
        step = transfer_step(ifs, prev, with_incidence=True)
        if len(step.measure) != len(mu_K) or not np.array_equal(step.measure.atoms, mu_K.atoms):
            raise DomainError("mu_K is not the transfer of the depth K-1 measure")
        small = HilbertSpace.of_measure(prev)
        F = []
        for i in range(n):
            f = np.zeros((len(prev), len(mu_K)))
            f[np.arange(len(prev)), step.incidence[i]] = c
            F.append(MatrixOperator(f, space, small))
        fam = CuntzFamily([adjoint(f) for f in F], "geometric", space, small, {"previous": prev})
        return FFamily(F, fam, mode)
    raise DomainError(f"unknown mode {mode!r}")


@dataclass
class IntertwiningReport:
    letter: int
    algebraic: float  # ||V F_i - T_i* V||
    lipschitz: float  # sup over 1-Lipschitz phi of the sup gap to phi o sigma_i o pi
    constant: float  # lipschitz / ratio^K
    depth: int


def intertwining_defect(i, ifs: IFSystem, fam: FFamily, t_family: CuntzFamily | None = None) -> IntertwiningReport:
    """Defect of V F_i = T_i* V.

    The algebraic defect is the weighted operator norm.  For the direct family
    the evaluation at the nearest atom is the only approximation, so its
    Lipschitz-dual defect, (1/sqrt N) max_x |nearest(sigma_i x) - sigma_i x|,
    is what carries the ratio^K rate; the symbolic family has none.
    """
    if fam.V is None:
        raise DomainError("family has no coding isometry attached")
    V = fam.V
    K = int(round(math.log(V.codomain.dim) / math.log(ifs.n_maps)))
    if t_family is None:
        t_family = build_t_family(ShiftSpaceModel(ifs.n_maps, K))
    if t_family.space.dim != V.codomain.dim:
        raise DomainError("T-family and coding isometry live at different depths")
    lhs = V @ fam.F[i]
    rhs = adjoint(t_family.isometries[i]) @ V
    alg = operator_norm(lhs - rhs)
    lip = 0.0
    if fam.displacement is not None:
        lip = fam.displacement[i] / math.sqrt(ifs.n_maps)
    return IntertwiningReport(int(i), alg, lip, lip / ifs.ratio ** K, K)


def word_projection(family: CuntzFamily, a) -> MatrixOperator:
    """S_a S_a* with S_a = S_{a_1} ... S_{a_k}."""
    if not family.space.same_as(family.domain):
        raise DomainError("word products need a family acting on one space")
    ident = MatrixOperator.identity(family.space)
    s = ident
    for c in a:
        if not 0 <= int(c) < family.n:
            raise DomainError(f"letter {c} outside the alphabet")
        s = s @ family.isometries[int(c)]
    return s @ adjoint(s)


def measurement_probs(family: CuntzFamily, h, tol=1e-10) -> np.ndarray:
    """p(i) = <S_i S_i* h, h> for a unit vector h."""
    h = np.asarray(h)
    nrm = family.space.norm(h)
    if abs(nrm - 1.0) > tol:
        raise DomainError(f"state has norm {nrm!r}, expected 1")
    probs = []
    for s in family.isometries:
        p = s @ adjoint(s)
        probs.append(family.space.inner(p(h), h).real)
    return np.asarray(probs)


def self_similarity_gap(ifs: IFSystem, mu_K: DiscreteMeasure, f) -> float:
    """(1/N) sum_i int |f|^2 o sigma_i d mu_K minus int |f|^2 d(T mu_K)."""
    lhs = sum(float(np.sum(mu_K.weights * np.abs(f(m(mu_K.atoms))) ** 2)) for m in ifs.maps) / ifs.n_maps
    nxt = transfer_step(ifs, mu_K)
    rhs = float(np.sum(nxt.weights * np.abs(f(nxt.atoms)) ** 2))
    return lhs - rhs


def coding_atoms_match(ifs: IFSystem, model: ShiftSpaceModel, mu_K: DiscreteMeasure) -> bool:
    """Coding points of all words coincide bitwise with the measure's atoms."""
    pts = coding_points(ifs, model)
    lookup = mu_K.atom_of_word()
    return all(np.array_equal(pts[model.index(w)], mu_K.atoms[a]) for w, a in lookup.items())
