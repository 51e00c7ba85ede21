"""POVMs on a finite interval partition, the transfer map and its fixed point.

Cell values are stored in orthonormal coordinates of the underlying weighted
space (f -> W^{1/2} f), where self-adjoint means Hermitian and adjoints are
conjugate transposes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, PrecisionError
from .geometry import IFSystem
from .intervals import IntervalUnion
from .linalg import eigh, eigvalsh, spectral_norm
from .operators import CuntzFamily, HilbertSpace, MatrixOperator, adjoint, build_t_family
from .symbolic import ShiftSpaceModel, coding_points, coding_preimage, cylinder_intervals
from .transport import lip_check

PSD_TOL = 1e-10
SUM_TOL = 1e-10


class CellPartition:
    """Cells [e_k, e_{k+1}), the last one closed, covering [e_0, e_n]."""

    def __init__(self, edges):
        e = np.asarray(edges, dtype=float).reshape(-1)
        if e.shape[0] < 2 or not np.all(np.diff(e) > 0):
            raise DomainError("partition edges must be strictly increasing")
        self.edges = e

    @classmethod
    def uniform(cls, lo, hi, n_cells):
        if n_cells < 1:
            raise DomainError("need at least one cell")
        return cls(np.linspace(float(lo), float(hi), int(n_cells) + 1))

    @classmethod
    def for_ifs(cls, ifs: IFSystem, n_cells):
        if ifs.dimension != 1:
            raise DomainError("partitions are 1-D")
        return cls.uniform(ifs.bounding_box[0][0], ifs.bounding_box[1][0], n_cells)

    @property
    def n_cells(self):
        return self.edges.shape[0] - 1

    @property
    def representatives(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def lengths(self):
        return np.diff(self.edges)

    @property
    def mesh(self):
        return float(self.lengths.max())

    @property
    def diameter(self):
        return float(self.edges[-1] - self.edges[0])

    def cell(self, k) -> IntervalUnion:
        return IntervalUnion.interval(self.edges[k], self.edges[k + 1], right_closed=k == self.n_cells - 1)

    def locate(self, x):
        """Index of the cell containing each x (points outside get -1)."""
        x = np.asarray(x, dtype=float).reshape(-1)
        k = np.searchsorted(self.edges, x, side="right") - 1
        k = np.where(x == self.edges[-1], self.n_cells - 1, k)
        return np.where((x < self.edges[0]) | (x > self.edges[-1]), -1, k)

    def overlap_matrix(self, lows, highs):
        """M[c, k] = |[lows_c, highs_c] cap cell_k| / |cell_k|."""
        lo = np.maximum(lows[:, None], self.edges[None, :-1])
        hi = np.minimum(highs[:, None], self.edges[None, 1:])
        return np.clip(hi - lo, 0.0, None) / self.lengths[None, :]

    def cells_of(self, lo, hi):
        """Indices of cells whose union is [lo, hi]; None if the ends are off-grid."""
        i = np.flatnonzero(self.edges == lo)
        j = np.flatnonzero(self.edges == hi)
        if i.size == 0 or j.size == 0:
            return None
        return np.arange(i[0], j[0])


def cell_masses(partition: CellPartition, mu) -> np.ndarray:
    """mu(cell) for every cell of the partition."""
    where = partition.locate(mu.atoms[:, 0])
    if np.any(where < 0):
        raise DomainError("measure has atoms outside the partition")
    return np.bincount(where, weights=mu.weights, minlength=partition.n_cells)


class POVMTable:
    """Hermitian PSD matrix per cell, in orthonormal coordinates of ``space``."""

    def __init__(self, partition: CellPartition, values, space: HilbertSpace):
        v = np.asarray(values)
        if v.shape != (partition.n_cells, space.dim, space.dim):
            raise DomainError(f"values shape {v.shape} does not match the partition and space")
        self.partition = partition
        self.values = v
        self.space = space

    @classmethod
    def trivial(cls, partition: CellPartition, space: HilbertSpace, masses):
        """cell -> mass(cell) id."""
        m = np.asarray(masses, dtype=float)
        eye = np.eye(space.dim)
        return cls(partition, m[:, None, None] * eye[None], space)

    @classmethod
    def multiplication(cls, partition: CellPartition, space: HilbertSpace, points):
        """cell -> multiplication by the indicator of the cell (a PVM)."""
        where = partition.locate(np.asarray(points).reshape(-1))
        if np.any(where < 0):
            raise DomainError("atoms outside the partition")
        vals = np.zeros((partition.n_cells, space.dim, space.dim))
        vals[where, np.arange(space.dim), np.arange(space.dim)] = 1.0
        return cls(partition, vals, space)

    def total(self):
        return self.values.sum(axis=0)

    def sum_defect(self):
        return spectral_norm(self.total() - np.eye(self.space.dim))

    def min_eig(self):
        return min(float(eigvalsh(v)[0]) for v in self.values)

    def idempotency_defects(self):
        return np.array([spectral_norm(v @ v - v) for v in self.values])

    def offdiag_mass(self):
        """Per cell, max |entry| off the diagonal."""
        d = self.space.dim
        mask = ~np.eye(d, dtype=bool)
        return np.array([float(np.abs(v[mask]).max()) if d > 1 else 0.0 for v in self.values])

    def value_of_cells(self, cells):
        return self.values[np.asarray(cells, dtype=int)].sum(axis=0)

    def value_of_interval(self, lo, hi):
        """Proportional splitting of straddled cells."""
        m = self.partition.overlap_matrix(np.array([lo]), np.array([hi]))[0]
        return np.tensordot(m, self.values, axes=1)

    def is_povm(self, psd_tol=PSD_TOL, sum_tol=SUM_TOL):
        return self.min_eig() >= -psd_tol and self.sum_defect() <= sum_tol

    def operator(self, k) -> MatrixOperator:
        """Cell value back in the weighted coordinates."""
        r = np.sqrt(self.space.weights)
        return MatrixOperator(self.values[k] / r[:, None] * r[None, :], self.space)


def orthonormal_family(family: CuntzFamily):
    if not family.space.same_as(family.domain):
        raise DomainError("the POVM transfer needs a family acting on one space")
    return np.stack([s.orthonormal() for s in family.isometries])


def transfer_matrices(ifs: IFSystem, partition: CellPartition, check=True):
    """Per map, M_i[c, k] = share of cell k inside sigma_i^{-1}(cell c)."""
    mats = []
    for m in ifs.maps:
        pre = np.array([m.inverse_interval(partition.edges[c], partition.edges[c + 1]) for c in range(partition.n_cells)])
        bad = np.flatnonzero(~np.all(np.isfinite(pre), axis=1))
        if bad.size:
            c = int(bad[0])
            raise PrecisionError(
                f"cell {c} [{partition.edges[c]}, {partition.edges[c + 1]}) has a non-finite preimage interval"
            )
        M = partition.overlap_matrix(pre[:, 0], pre[:, 1])
        if check:
            # each cell is split among the preimages of all cells; its shares
            # must add back to one unless it lies outside sigma_i^{-1}(X)
            cover = M.sum(axis=0)
            lo, hi = m.inverse_interval(partition.edges[0], partition.edges[-1])
            inside = (partition.edges[:-1] >= lo) & (partition.edges[1:] <= hi)
            bad = np.flatnonzero(inside & (np.abs(cover - 1.0) > 1e-9))
            if bad.size:
                k = int(bad[0])
                raise PrecisionError(
                    f"cell {k} [{partition.edges[k]}, {partition.edges[k + 1]}) is not resolved by the preimages "
                    f"(shares add to {cover[k]!r})"
                )
        mats.append(M)
    return np.stack(mats)


def povm_transfer(ifs: IFSystem, family: CuntzFamily, B: POVMTable, mats=None, S=None) -> POVMTable:
    """cell -> sum_i S_i B(sigma_i^{-1}(cell)) S_i*."""
    if family.n != ifs.n_maps:
        raise DomainError("family size differs from the number of maps")
    if not family.space.same_as(B.space):
        raise DomainError("family and table act on different spaces")
    mats = transfer_matrices(ifs, B.partition) if mats is None else mats
    S = orthonormal_family(family) if S is None else S
    out = np.zeros(B.values.shape, dtype=np.result_type(B.values, S))
    for i in range(family.n):
        pulled = np.tensordot(mats[i], B.values, axes=1)
        out += np.einsum("ab,cbd,ed->cae", S[i], pulled, S[i].conj(), optimize=True)
    out = 0.5 * (out + np.conj(np.swapaxes(out, 1, 2)))
    if not np.iscomplexobj(B.values) and np.all(np.isreal(out)):
        out = out.real
    return POVMTable(B.partition, out, B.space)


@dataclass
class LipDictionary:
    functions: np.ndarray  # (count, n_cells) values on representatives
    seed: int
    points: np.ndarray

    def __len__(self):
        return self.functions.shape[0]

    def check(self):
        for k, f in enumerate(self.functions):
            if not lip_check(f, self.points):
                raise DomainError(f"dictionary function {k} is not 1-Lipschitz")


def lip_dictionary_generate(partition: CellPartition, count: int, seed: int = 0) -> LipDictionary:
    """Distances to every representative, then random McShane functions."""
    reps = partition.representatives
    n = reps.shape[0]
    if count < n:
        raise DomainError(f"dictionary needs at least {n} functions, got {count}")
    d = np.abs(reps[:, None] - reps[None, :])
    funcs = [d[j] for j in range(n)]
    rng = np.random.default_rng(seed)
    for _ in range(count - n):
        v = rng.uniform(0.0, partition.diameter, size=n)
        funcs.append((v[None, :] - d).max(axis=1))
    return LipDictionary(np.asarray(funcs), int(seed), reps[:, None])


@dataclass
class RhoEstimate:
    lower: float
    upper: float
    dictionary_size: int
    mesh: float
    argmax: int = -1


def _hermitian_norm(h):
    lam = eigvalsh(h)
    return float(max(abs(lam[0]), abs(lam[-1])))


def rho_estimate(A: POVMTable, B: POVMTable, dictionary: LipDictionary, check=True) -> RhoEstimate:
    """Bracket for sup over 1-Lipschitz f of ||int f dA - int f dB||.

    lower: maximum over the dictionary with f sampled at representatives.
    upper: 2 mesh + max(1, diam/2) sum_cells ||(A - B)(cell)||; the factor
    bounds |f - f(centre)| for a 1-Lipschitz f on the partition's span.
    """
    if A.values.shape != B.values.shape or not np.array_equal(A.partition.edges, B.partition.edges):
        raise DomainError("tables live on different partitions or spaces")
    if dictionary.functions.shape[1] != A.partition.n_cells:
        raise DomainError("dictionary does not match the partition")
    if check:
        dictionary.check()
    D = A.values - B.values
    best, arg = 0.0, -1
    for k, f in enumerate(dictionary.functions):
        val = _hermitian_norm(np.tensordot(f, D, axes=1))
        if val > best:
            best, arg = val, k
    cell_norms = sum(_hermitian_norm(d) for d in D)
    mesh = A.partition.mesh
    upper = 2.0 * mesh + max(1.0, A.partition.diameter / 2.0) * cell_norms
    return RhoEstimate(best, upper, len(dictionary), mesh, arg)


@dataclass
class FixpointResult:
    table: POVMTable
    iterations: int
    res_lower: list
    res_upper: list
    min_eigs: list
    sum_defects: list
    decay_ratio: float
    converged: bool = True
    extra: dict = field(default_factory=dict)

    def rows(self):
        return [
            (m + 1, self.res_lower[m], self.res_upper[m], self.min_eigs[m], self.sum_defects[m])
            for m in range(len(self.res_lower))
        ]


def fit_decay(residuals, floor):
    """exp of the least-squares slope of log residual, over residuals above ``floor``."""
    r = np.asarray(residuals, dtype=float)
    idx = np.flatnonzero(r > floor)
    if idx.size < 2:
        return float("nan")
    slope = np.polyfit(idx.astype(float), np.log(r[idx]), 1)[0]
    return float(math.exp(slope))


def povm_fixpoint(
    ifs: IFSystem,
    family: CuntzFamily,
    partition: CellPartition,
    tol: float,
    max_iter: int = 200,
    dictionary: LipDictionary | None = None,
    initial: POVMTable | None = None,
    masses=None,
    floor=None,
) -> FixpointResult:
    """Iterate the transfer map from the trivial POVM until the rho lower bound of a step is <= tol."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    space = family.space
    if dictionary is None:
        dictionary = lip_dictionary_generate(partition, 2 * partition.n_cells, 0)
    dictionary.check()
    if initial is None:
        if masses is None:
            raise DomainError("the trivial start needs the cell masses")
        initial = POVMTable.trivial(partition, space, masses)
    mats = transfer_matrices(ifs, partition)
    S = orthonormal_family(family)
    floor = 1e3 * np.finfo(float).eps if floor is None else floor
    B = initial
    lows, ups, eigs, sums = [], [], [], []
    for m in range(max_iter):
        nxt = povm_transfer(ifs, family, B, mats=mats, S=S)
        est = rho_estimate(nxt, B, dictionary, check=False)
        lows.append(est.lower)
        ups.append(est.upper)
        eigs.append(nxt.min_eig())
        sums.append(nxt.sum_defect())
        B = nxt
        if est.lower <= tol:
            return FixpointResult(B, m + 1, lows, ups, eigs, sums, fit_decay(lows, max(floor, tol)))
    raise ConvergenceError(f"POVM iteration residual {lows[-1]:.3e} above tol {tol:.3e} after {max_iter} steps", lows)


def fixed_point_residual(ifs, family, table: POVMTable, dictionary: LipDictionary) -> RhoEstimate:
    return rho_estimate(povm_transfer(ifs, family, table), table, dictionary)


class CylinderPVM:
    """E(cylinder) = indicator of the cylinder, on the depth-K cylinder space."""

    def __init__(self, model: ShiftSpaceModel):
        self.model = model
        self.space = HilbertSpace.uniform(model.n_words)

    def diagonal(self, prefix):
        start, stop = self.model.prefix_range(prefix)
        d = np.zeros(self.model.n_words)
        d[start:stop] = 1.0
        return d

    def value(self, prefix) -> MatrixOperator:
        return MatrixOperator(np.diag(self.diagonal(prefix)), self.space)

    def of_indices(self, indices) -> MatrixOperator:
        d = np.zeros(self.model.n_words)
        d[np.asarray(indices, dtype=int)] = 1.0
        return MatrixOperator(np.diag(d), self.space)

    def fixed_point_defect(self, prefix, t_family: CuntzFamily | None = None):
        """|| sum_i T_i E(eta_i^{-1}(c)) T_i* - E(c) ||."""
        t_family = build_t_family(self.model) if t_family is None else t_family
        prefix = tuple(prefix)
        total = np.zeros((self.model.n_words, self.model.n_words))
        for i, t in enumerate(t_family.isometries):
            if prefix and prefix[0] != i:
                continue
            pre = prefix[1:] if prefix else ()
            total = total + (t @ self.value(pre) @ adjoint(t)).entries
        return spectral_norm(total - self.value(prefix).entries)


def build_cylinder_pvm(model: ShiftSpaceModel) -> CylinderPVM:
    return CylinderPVM(model)


@dataclass
class DilationReport:
    depth: int
    defects: np.ndarray  # per cell ||V* E(pi^-1 cell) V - A(cell)||
    resolved: np.ndarray  # same, cells with ambiguous cylinders set to nan
    slack: np.ndarray  # per cell ||V* E(ambiguous cylinders) V||
    isometry_defect: float  # ||V*V - id||, the full-interval cell
    ratio: float

    @property
    def max_defect(self):
        return float(self.defects.max())

    @property
    def max_slack(self):
        return float(self.slack.max())

    @property
    def constant(self):
        return self.max_defect / self.ratio ** self.depth

    def to_json(self):
        return {
            "depth": self.depth,
            "max_defect": self.max_defect,
            "max_slack": self.max_slack,
            "isometry_defect": self.isometry_defect,
            "constant": self.constant,
            "per_cell": [float(x) for x in self.defects],
        }


def dilation_check(ifs: IFSystem, model: ShiftSpaceModel, A: POVMTable, V: MatrixOperator) -> DilationReport:
    """Compare V* E(pi^{-1}(cell)) V with A(cell) on every cell."""
    if V.codomain.dim != model.n_words:
        raise DomainError(f"coding isometry targets {V.codomain.dim} words, model has {model.n_words}")
    if not V.domain.same_as(A.space):
        raise DomainError("the POVM and the coding isometry act on different spaces")
    part = A.partition
    pts = coding_points(ifs, model)
    boxes = cylinder_intervals(ifs, model)
    Vo = V.orthonormal()

    def compress(indices):
        # V* E V in orthonormal coordinates: sum over rows of V in the set
        rows = Vo[np.asarray(indices, dtype=int)]
        return rows.conj().T @ rows if rows.shape[0] else np.zeros((Vo.shape[1],) * 2)

    defects, resolved, slack = [], [], []
    for k in range(part.n_cells):
        pre = coding_preimage(ifs, part.cell(k), model, points=pts, boxes=boxes)
        d = spectral_norm(compress(pre.indices) - A.values[k])
        defects.append(d)
        slack.append(spectral_norm(compress(pre.ambiguous)) if pre.ambiguous.size else 0.0)
        resolved.append(float("nan") if pre.ambiguous.size else d)
    iso = spectral_norm(Vo.conj().T @ Vo - np.eye(Vo.shape[1]))
    return DilationReport(model.depth, np.array(defects), np.array(resolved), np.array(slack), iso, ifs.ratio)
