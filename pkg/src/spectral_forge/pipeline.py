"""End-to-end spectral resolution of a normal operator.

The route never diagonalizes the input directly: it decomposes T into
the bounded pair (A, B), takes the spectral measures of both, forms
their product, and pushes the product forward through
``phi(t, w) = w / t`` (with the guarded reciprocal at the origin).
Because A = (I + T*T)^(-1) and B = T A share eigenvectors with T, the
surviving joint atoms satisfy w / t = z for the corresponding
eigenvalue z of T, so the pushforward reassembles T's own measure.
A direct diagonalization of T is kept only as an optional cross check.

Accuracy degrades with the square of the operator norm once ||T||
passes 1e2 (the reciprocal map amplifies first-factor errors by
1 + |z|^2), which is why the pipeline refuses inputs beyond 1e8 unless
forced; the tolerance schedule below encodes exactly that growth.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .decomposition import Decomposition, decompose
from .errors import NotCommuting, NotNormal, ScaleLimit, SingularWeightWarning
from .linalg import OperatorMatrix, Tolerances, _resolve, is_normal, op_norm_2
from .measures import SpectralMeasure, pvm_from_normal, pvm_integrate
from .product import ProductMeasure, inverse_weight, product_measure, pushforward
from .report import VerificationReport

__all__ = [
    "PipelineResult",
    "spectral_theorem",
    "cross_check",
    "pipeline_tolerance",
    "NORM_LIMIT",
]

# Refuse inputs whose spectral norm exceeds this unless forced.  The
# smallest point of the first measure is 1/(1 + norm^2) and must clear
# the singular weight margin of about 1e-14 with two decades to spare.
NORM_LIMIT = 1e6

# Reconstruction budget: 1e-7 * n at moderate scale, growing with the
# squared norm past 1e2 as the reciprocal map amplifies atom errors.
PIPELINE_FACTOR = 1000.0
SCALE_KNEE = 100.0


def pipeline_tolerance(dim: int, source_norm: float,
                       tol: Tolerances | None = None) -> float:
    """Reconstruction tolerance schedule for the full pipeline."""
    tol = _resolve(tol)
    growth = max(1.0, (source_norm / SCALE_KNEE) ** 2)
    return PIPELINE_FACTOR * tol.rel(dim) * growth


@dataclass(frozen=True, eq=False)
class PipelineResult:
    """Everything produced along the pipeline, plus the final report."""

    decomposition: Decomposition
    e1: SpectralMeasure
    e2: SpectralMeasure
    product: ProductMeasure
    spectral_measure: SpectralMeasure
    report: VerificationReport
    direct_measure: SpectralMeasure | None = None


def _realified(e: SpectralMeasure, atol: float) -> SpectralMeasure:
    """Zero the imaginary parts of near-real atom points."""
    drift = float(np.max(np.abs(e.points.imag)))
    if drift > atol:
        raise NotCommuting(
            f"first-factor measure has imaginary drift {drift:.3e} beyond {atol:.3e}"
        )
    return SpectralMeasure(e.dim, e.points.real.astype(np.complex128),
                           bases=e.bases, projections=e.projections)


def spectral_theorem(t: OperatorMatrix, tol: Tolerances | None = None, *,
                     direct_check: bool = False,
                     force_scale: bool = False) -> PipelineResult:
    """Resolve a normal operator into a discrete spectral measure.

    Parameters
    ----------
    t : OperatorMatrix
        Normal input.  NotNormal is raised otherwise.
    tol : Tolerances, optional
    direct_check : bool
        Also diagonalize T directly and fold the atom-matching residuals
        into the report.
    force_scale : bool
        Proceed past the ``NORM_LIMIT`` conditioning refusal.

    Returns
    -------
    PipelineResult
        With a report carrying reconstruction and support residuals,
        counts of atoms whose weight hit the singular margin, and the
        cross-check residuals when requested.
    """
    tol = _resolve(tol)
    if not is_normal(t, tol):
        raise NotNormal("input is not normal: T*T - TT* exceeds tolerance")
    n = t.dim
    source_norm = op_norm_2(t, tol)
    if source_norm > NORM_LIMIT and not force_scale:
        raise ScaleLimit(
            f"operator norm {source_norm:.3e} exceeds {NORM_LIMIT:.0e}; "
            "the reciprocal map would amplify atom errors beyond recovery "
            "(pass force_scale=True to proceed anyway)"
        )
    d = decompose(t, tol, source_norm=source_norm)
    e1 = _realified(pvm_from_normal(d.a, tol), tol.atol)
    e2 = pvm_from_normal(d.b, tol)
    prod = product_measure(e1, e2, tol)
    eps_sing = 1e-14 * (1.0 + e1.support_radius)
    singular_hits = 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SingularWeightWarning)
        measure = pushforward(
            prod, lambda x, w: inverse_weight(x, eps_sing) * w, tol)
        singular_hits = sum(
            1 for c in caught if issubclass(c.category, SingularWeightWarning))
    recon = float(np.linalg.norm(
        pvm_integrate(lambda z: z, measure).array - t.array))
    fro_t = float(np.linalg.norm(t.array))
    recon_bound = pipeline_tolerance(n, source_norm, tol) * (1.0 + fro_t)
    support_excess = max(0.0, e2.support_radius - 0.5)
    support_bound = 10.0 * tol.rel(n)
    residuals = {
        "atom_count": float(measure.num_atoms),
        "reconstruction": recon,
        "e2_support_excess": support_excess,
        "singular_weight_atoms": float(singular_hits),
    }
    tolerances = {
        "atom_count": float(n),
        "reconstruction": recon_bound,
        "e2_support_excess": support_bound,
        "singular_weight_atoms": 0.0,
    }
    passed = {
        "atom_count": 1 <= measure.num_atoms <= n,
        "reconstruction": recon <= recon_bound,
        "e2_support_excess": support_excess <= support_bound,
        "singular_weight_atoms": singular_hits == 0,
    }
    direct = None
    if direct_check:
        direct = pvm_from_normal(t, tol)
        cc = _match_measures(measure, direct, tol, source_norm, n)
        residuals.update(cc.residuals)
        tolerances.update(cc.tolerances)
        passed.update(cc.passed)
    report = VerificationReport(residuals, passed, tolerances)
    return PipelineResult(d, e1, e2, prod, measure, report, direct)


def _match_measures(result: SpectralMeasure, direct: SpectralMeasure,
                    tol: Tolerances, scale: float, n: int,
                    radius: float | None = None) -> VerificationReport:
    """Greedy nearest-pair matching of two atom systems."""
    if radius is None:
        radius = 1e-7 * (1.0 + scale)
    pa = result.points
    pb = direct.points
    gaps = np.abs(pa[:, None] - pb[None, :])
    pairs = sorted(
        ((float(gaps[i, j]), i, j)
         for i in range(pa.size) for j in range(pb.size)),
        key=lambda item: (item[0], item[1], item[2]),
    )
    used_a: set[int] = set()
    used_b: set[int] = set()
    point_gap = 0.0
    projection_gap = 0.0
    matched = 0
    for gap, i, j in pairs:
        if gap > radius:
            break
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        matched += 1
        point_gap = max(point_gap, gap)
        diff = result.projection(i).array - direct.projection(j).array
        projection_gap = max(projection_gap, float(np.linalg.norm(diff)))
    unmatched = (pa.size - matched) + (pb.size - matched)
    projection_bound = 1e4 * tol.rel(n)
    residuals = {
        "cross_point_gap": point_gap,
        "cross_projection_gap": projection_gap,
        "cross_unmatched": float(unmatched),
    }
    tolerances = {
        "cross_point_gap": radius,
        "cross_projection_gap": projection_bound,
        "cross_unmatched": 0.0,
    }
    passed = {
        "cross_point_gap": point_gap <= radius,
        "cross_projection_gap": projection_gap <= projection_bound,
        "cross_unmatched": unmatched == 0,
    }
    return VerificationReport(residuals, passed, tolerances)


def cross_check(result: PipelineResult, direct: SpectralMeasure,
                tol: Tolerances | None = None,
                radius: float | None = None) -> VerificationReport:
    """Match pipeline atoms against a directly computed measure.

    Pairs atoms greedily by point distance inside the acceptance radius
    (default ``1e-7 (1 + ||T||_2)``, ten times the default clustering
    radius) and reports the largest point and projection gaps together
    with the number of unmatched atoms on either side.
    """
    tol = _resolve(tol)
    return _match_measures(result.spectral_measure, direct, tol,
                           result.decomposition.source_norm,
                           result.spectral_measure.dim, radius)
