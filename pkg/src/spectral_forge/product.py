"""Products of commuting spectral measures and pushforwards of atoms.

Given commuting measures E1 (supported on the real line) and E2, the
product measure places an atom at every pair (t_i, w_j) whose projection
product P_i Q_j survives pruning; for commuting measures that product
is itself an orthogonal projection onto the intersection of ranges.
Pushing the atoms forward through a map phi merges images that land
within the clustering radius, which is how a spectral measure for the
original operator is reassembled from the pair measure via
phi(t, w) = w / t.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NonFiniteValue,
    NotCommuting,
    SingularWeightWarning,
)
from .linalg import (
    OperatorMatrix,
    Tolerances,
    _jacobi_hermitian,
    _resolve,
    cluster_points,
)
from .measures import PVM_FACTOR, SpectralMeasure, pvm_integrate
from .report import VerificationReport

__all__ = [
    "ProductMeasure",
    "commute_check",
    "product_measure",
    "fubini_check",
    "pushforward",
    "inverse_weight",
    "marginal_residuals",
    "product_validate",
]

# Atoms whose projection product has Frobenius mass below 1e-10 * n are
# dropped as numerical dust.
PRUNE_FACTOR = 1e-10


@dataclass(frozen=True, eq=False)
class ProductMeasure:
    """Joint measure of a commuting pair, atoms indexed by (t, w) pairs.

    ``t_points`` are real (the first factor lives on the real line),
    ``w_points`` complex.  Projections are stored factored or dense with
    the same conventions as SpectralMeasure.  ``rectangle_residual`` is
    the largest deviation of a stored projection from the literal
    product P_i Q_j, measured at construction time.
    """

    dim: int
    t_points: np.ndarray
    w_points: np.ndarray
    bases: tuple | None = None
    projections: tuple | None = None
    rectangle_residual: float | None = None

    def __post_init__(self):
        ts = np.array(self.t_points, dtype=np.float64, copy=True)
        ws = np.array(self.w_points, dtype=np.complex128, copy=True)
        if ts.ndim != 1 or ws.ndim != 1 or ts.size != ws.size or ts.size == 0:
            raise DimensionMismatch("t and w point lists must match and be nonempty")
        if not (np.all(np.isfinite(ts)) and np.all(np.isfinite(ws.view(np.float64)))):
            raise NonFiniteValue("atom points must be finite")
        ts.setflags(write=False)
        ws.setflags(write=False)
        object.__setattr__(self, "t_points", ts)
        object.__setattr__(self, "w_points", ws)
        if (self.bases is None) == (self.projections is None):
            raise ValueError("exactly one of bases and projections is required")
        if self.bases is not None:
            blocks = tuple(np.array(b, dtype=np.complex128, copy=True)
                           for b in self.bases)
            for b in blocks:
                if b.ndim != 2 or b.shape[0] != self.dim or b.shape[1] == 0:
                    raise DimensionMismatch("basis blocks must be dim x rank")
                b.setflags(write=False)
            if len(blocks) != ts.size:
                raise DimensionMismatch("one basis block per atom is required")
            object.__setattr__(self, "bases", blocks)
        else:
            mats = tuple(np.array(p, dtype=np.complex128, copy=True)
                         for p in self.projections)
            for p in mats:
                if p.shape != (self.dim, self.dim):
                    raise DimensionMismatch("projections must be dim x dim")
                p.setflags(write=False)
            if len(mats) != ts.size:
                raise DimensionMismatch("one projection per atom is required")
            object.__setattr__(self, "projections", mats)

    @property
    def num_atoms(self) -> int:
        return int(self.t_points.size)

    @property
    def ranks(self) -> tuple[int, ...]:
        if self.bases is not None:
            return tuple(b.shape[1] for b in self.bases)
        return tuple(int(round(float(np.trace(p).real))) for p in self.projections)

    def basis(self, i: int) -> np.ndarray:
        if self.bases is not None:
            return self.bases[i]
        return _measure_view(self).basis(i)

    def projection(self, i: int) -> OperatorMatrix:
        if self.bases is not None:
            b = self.bases[i]
            return OperatorMatrix(b @ b.conj().T)
        return OperatorMatrix(self.projections[i])

    @property
    def atoms(self) -> list[tuple[tuple[float, complex], OperatorMatrix]]:
        return [((float(self.t_points[i]), complex(self.w_points[i])),
                 self.projection(i)) for i in range(self.num_atoms)]

    def integrate(self, g) -> OperatorMatrix:
        """``sum g(t_k, w_k) Pi_k`` for a scalar function of the pair."""
        weights = np.array([complex(g(float(t), complex(w)))
                            for t, w in zip(self.t_points, self.w_points)])
        finite = np.isfinite(weights.view(np.float64)).reshape(-1, 2).all(axis=1)
        if not finite.all():
            where = int(np.argmax(~finite))
            raise NonFiniteValue(
                f"integrand is not finite at atom {where} "
                f"(t={float(self.t_points[where])}, w={complex(self.w_points[where])})"
            )
        if self.bases is not None:
            stacked = np.hstack(self.bases)
            per_column = np.repeat(weights, self.ranks)
            return OperatorMatrix((stacked * per_column) @ stacked.conj().T)
        total = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for w, p in zip(weights, self.projections):
            total += w * p
        return OperatorMatrix(total)


def _measure_view(prod: ProductMeasure) -> SpectralMeasure:
    """Reindex a product measure by its w points only, for shared helpers."""
    # Points are synthetic and may repeat; only the projections matter here.
    fake = np.arange(prod.num_atoms, dtype=np.complex128)
    if prod.bases is not None:
        return SpectralMeasure(prod.dim, fake, bases=prod.bases)
    return SpectralMeasure(prod.dim, fake, projections=prod.projections)


def commute_check(e1: SpectralMeasure, e2: SpectralMeasure,
                  tol: Tolerances | None = None) -> bool:
    """True when every projection of e1 commutes with every one of e2.

    The commutator norm of a pair is bounded by twice the mass of the
    projection product, so pairs whose product is already below half
    the threshold are accepted without being formed densely.
    """
    tol = _resolve(tol)
    if e1.dim != e2.dim:
        raise DimensionMismatch("measures act on different dimensions")
    threshold = PVM_FACTOR * tol.rel(e1.dim) + tol.atol
    cross = e1.stacked_basis().conj().T @ e2.stacked_basis()
    off1 = np.cumsum((0,) + e1.ranks)
    off2 = np.cumsum((0,) + e2.ranks)
    worst = 0.0
    for i in range(e1.num_atoms):
        ui = e1.basis(i)
        for j in range(e2.num_atoms):
            block = cross[off1[i]:off1[i + 1], off2[j]:off2[j + 1]]
            mass = float(np.linalg.norm(block))
            if 2.0 * mass <= 0.5 * threshold:
                continue
            pq = (ui @ block) @ e2.basis(j).conj().T
            worst = max(worst, float(np.linalg.norm(pq - pq.conj().T)))
    return worst <= threshold


def product_measure(e1: SpectralMeasure, e2: SpectralMeasure,
                    tol: Tolerances | None = None,
                    prune: float | None = None) -> ProductMeasure:
    """Product of commuting measures, one atom per surviving pair.

    The first factor must be supported on the real line.  For each pair
    with ``||P_i Q_j||_F`` above the pruning threshold (default
    ``1e-10 n``) the projection onto the intersection of ranges is
    extracted from the singular structure of the cross Gram block, and
    its deviation from the literal product P_i Q_j is re-measured.
    Raises NotCommuting when the measures fail the commutation test or
    when a product refuses to behave like a projection.
    """
    tol = _resolve(tol)
    if e1.dim != e2.dim:
        raise DimensionMismatch("measures act on different dimensions")
    n = e1.dim
    if float(np.max(np.abs(e1.points.imag))) > tol.atol:
        raise ValueError("the first factor must be supported on the real line")
    if not commute_check(e1, e2, tol):
        raise NotCommuting("projections of the two measures do not commute")
    prune = PRUNE_FACTOR * n if prune is None else prune
    cross = e1.stacked_basis().conj().T @ e2.stacked_basis()
    off1 = np.cumsum((0,) + e1.ranks)
    off2 = np.cumsum((0,) + e2.ranks)
    t_points, w_points, bases = [], [], []
    rectangle = 0.0
    order1 = range(e1.num_atoms)
    for i in order1:
        ui = e1.basis(i)
        for j in range(e2.num_atoms):
            block = cross[off1[i]:off1[i + 1], off2[j]:off2[j + 1]]
            mass = float(np.linalg.norm(block))
            if mass <= prune:
                continue
            wj = e2.basis(j)
            ri, rj = block.shape
            # Singular vectors of the cross block with singular value
            # near 1 span the intersection of the two ranges.
            if ri <= rj:
                gram = block @ block.conj().T
                gram = (gram + gram.conj().T) / 2.0
                s2, x = _jacobi_hermitian(gram, tol.atol * (1.0 + np.linalg.norm(gram)))
                keep = s2 > 0.25
                if not keep.any():
                    if mass > 0.1:
                        raise NotCommuting(
                            f"pair ({i}, {j}) has projection product mass "
                            f"{mass:.3e} but no stable intersection"
                        )
                    continue
                z = ui @ x[:, keep]
            else:
                gram = block.conj().T @ block
                gram = (gram + gram.conj().T) / 2.0
                s2, y = _jacobi_hermitian(gram, tol.atol * (1.0 + np.linalg.norm(gram)))
                keep = s2 > 0.25
                if not keep.any():
                    if mass > 0.1:
                        raise NotCommuting(
                            f"pair ({i}, {j}) has projection product mass "
                            f"{mass:.3e} but no stable intersection"
                        )
                    continue
                z = ui @ (block @ y[:, keep]) / np.sqrt(s2[keep])
            pq = (ui @ block) @ wj.conj().T
            rectangle = max(rectangle, float(np.linalg.norm(z @ z.conj().T - pq)))
            t_points.append(float(e1.points[i].real))
            w_points.append(complex(e2.points[j]))
            bases.append(z)
    if not t_points:
        raise NotCommuting("no atom pair survived pruning")
    bound = PVM_FACTOR * tol.rel(n)
    if rectangle > bound:
        raise NotCommuting(
            f"product projections deviate from P_i Q_j by {rectangle:.3e}, "
            f"beyond {bound:.3e}"
        )
    return ProductMeasure(n, np.array(t_points), np.array(w_points),
                          bases=tuple(bases), rectangle_residual=rectangle)


def marginal_residuals(prod: ProductMeasure, e1: SpectralMeasure,
                       e2: SpectralMeasure) -> tuple[float, float]:
    """Largest Frobenius gaps of the two marginal sums.

    Summing product projections over j must recover P_i, and over i
    must recover Q_j.
    """
    first = 0.0
    for i in range(e1.num_atoms):
        t = float(e1.points[i].real)
        acc = np.zeros((prod.dim, prod.dim), dtype=np.complex128)
        for k in range(prod.num_atoms):
            if prod.t_points[k] == t:
                acc += prod.projection(k).array
        first = max(first, float(np.linalg.norm(acc - e1.projection(i).array)))
    second = 0.0
    for j in range(e2.num_atoms):
        w = complex(e2.points[j])
        acc = np.zeros((prod.dim, prod.dim), dtype=np.complex128)
        for k in range(prod.num_atoms):
            if complex(prod.w_points[k]) == w:
                acc += prod.projection(k).array
        second = max(second, float(np.linalg.norm(acc - e2.projection(j).array)))
    return first, second


def product_validate(prod: ProductMeasure,
                     tol: Tolerances | None = None) -> VerificationReport:
    """Projection system invariants of a product measure.

    Same residuals as ``pvm_validate`` (atom distinctness aside, since
    product atoms are indexed by pairs), plus the stored rectangle
    residual when available.
    """
    tol = _resolve(tol)
    from .measures import _dense_invariants, _factored_invariants
    view = _measure_view(prod)
    if view.bases is not None:
        idem, herm, ortho, completeness = _factored_invariants(view)
    else:
        idem, herm, ortho, completeness = _dense_invariants(view)
    bound = PVM_FACTOR * tol.rel(prod.dim)
    rank_deficit = float(abs(sum(prod.ranks) - prod.dim))
    residuals = {
        "idempotency": idem,
        "hermitian_defect": herm,
        "orthogonality": ortho,
        "completeness": completeness,
        "rank_deficit": rank_deficit,
    }
    tolerances = {
        "idempotency": bound,
        "hermitian_defect": bound,
        "orthogonality": bound,
        "completeness": bound,
        "rank_deficit": 0.0,
    }
    passed = {key: residuals[key] <= tolerances[key] for key in
              ("idempotency", "hermitian_defect", "orthogonality", "completeness")}
    passed["rank_deficit"] = rank_deficit == 0.0
    if prod.rectangle_residual is not None:
        residuals["rectangle"] = float(prod.rectangle_residual)
        tolerances["rectangle"] = bound
        passed["rectangle"] = prod.rectangle_residual <= bound
    return VerificationReport(residuals, passed, tolerances)


def fubini_check(f1, f2, e1: SpectralMeasure, e2: SpectralMeasure,
                 prod: ProductMeasure, tol: Tolerances | None = None) -> float:
    """Residual of the iterated-integral identity.

    Compares ``(integral of f1 dE1)(integral of f2 dE2)`` against the
    joint sum ``sum f1(t_i) f2(w_j) Pi_ij`` and returns the Frobenius
    gap.  Raises NonFiniteValue when either integrand blows up on an
    atom.
    """
    lhs = pvm_integrate(lambda z: f1(z.real), e1).array @ \
        pvm_integrate(f2, e2).array
    rhs = prod.integrate(lambda t, w: complex(f1(t)) * complex(f2(w))).array
    return float(np.linalg.norm(lhs - rhs))


def inverse_weight(t: float, eps_sing: float = 1e-14) -> float:
    """Reciprocal with a guarded origin: 0 maps to 0, else 1/t.

    Values with ``0 < |t| <= eps_sing`` also map to 0 but emit a
    SingularWeightWarning, since information carried by such an atom is
    below the conditioning floor and is being discarded.
    """
    t = float(t)
    if t == 0.0:
        return 0.0
    if abs(t) <= eps_sing:
        warnings.warn(
            f"weight {t:.3e} is inside the singular margin {eps_sing:.3e}; "
            "its atom is sent to zero",
            SingularWeightWarning,
            stacklevel=2,
        )
        return 0.0
    return 1.0 / t


def pushforward(prod: ProductMeasure, phi,
                tol: Tolerances | None = None) -> SpectralMeasure:
    """Image measure of a product measure under ``phi(t, w)``.

    Image points within the clustering radius merge into one atom at
    their rank-weighted mean, with the member projections summed (their
    bases concatenated).  Raises NonFiniteValue when phi is not finite
    on some atom.
    """
    tol = _resolve(tol)
    images = []
    for t, w in zip(prod.t_points, prod.w_points):
        value = complex(phi(float(t), complex(w)))
        if not (np.isfinite(value.real) and np.isfinite(value.imag)):
            raise NonFiniteValue(
                f"pushforward map is not finite at (t={float(t)}, w={complex(w)})"
            )
        images.append(value)
    images = np.array(images, dtype=np.complex128)
    radius = tol.cluster_radius(float(np.max(np.abs(images))))
    clusters = cluster_points(images, radius)
    ranks = np.array(prod.ranks, dtype=np.float64)
    points = []
    blocks = []
    for c in clusters:
        weight = ranks[c]
        points.append(complex((images[c] * weight).sum() / weight.sum()))
        blocks.append(np.hstack([prod.basis(int(i)) for i in c]))
    return SpectralMeasure(prod.dim, np.array(points), bases=tuple(blocks))
