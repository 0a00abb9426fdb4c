import numpy as np
import pytest

from spectral_forge.errors import NotNormal, ScaleLimit
from spectral_forge.gallery import OperatorSpec, generate
from spectral_forge.linalg import OperatorMatrix
from spectral_forge.measures import pvm_from_normal, pvm_integrate, pvm_validate
from spectral_forge.pipeline import (
    cross_check,
    pipeline_tolerance,
    spectral_theorem,
)


def test_scalar_example_end_to_end():
    t = OperatorMatrix(np.diag([2j, -3.0]))
    res = spectral_theorem(t, direct_check=True)
    e = res.spectral_measure
    np.testing.assert_allclose(e.points, [-3.0, 2j], atol=1e-12)
    np.testing.assert_allclose(e.projection(0).array, np.diag([0, 1.0]),
                               atol=1e-12)
    np.testing.assert_allclose(e.projection(1).array, np.diag([1.0, 0]),
                               atol=1e-12)
    assert res.report.all_passed, res.report.residuals
    assert res.report.residuals["atom_count"] == 2.0


def test_intermediate_measures_of_scalar_example():
    res = spectral_theorem(OperatorMatrix(np.diag([2j, -3.0])))
    np.testing.assert_allclose(res.e1.points, [0.1, 0.2], atol=1e-14)
    np.testing.assert_allclose(res.e2.points, [-0.3, 0.4j], atol=1e-14)
    assert res.e1.points.dtype == np.complex128
    assert np.all(res.e1.points.imag == 0.0)


def test_zero_operator_single_atom():
    res = spectral_theorem(OperatorMatrix.zeros(3))
    e = res.spectral_measure
    assert e.num_atoms == 1
    assert e.points[0] == 0.0
    np.testing.assert_allclose(e.projection(0).array, np.eye(3), atol=1e-14)
    assert res.report.all_passed


def test_rejects_non_normal():
    with pytest.raises(NotNormal):
        spectral_theorem(OperatorMatrix(np.array([[0, 1], [0, 0]],
                                                 dtype=complex)))


def test_random_normal_matches_direct_diagonalization():
    t = generate(OperatorSpec("random_normal", dim=24, scale=2.0, seed=8))
    res = spectral_theorem(t, direct_check=True)
    rep = res.report
    assert rep.all_passed, rep.residuals
    assert rep.residuals["cross_unmatched"] == 0.0
    assert rep.residuals["cross_point_gap"] <= 1e-7 * (1 + 2.0)
    recon = pvm_integrate(lambda z: z, res.spectral_measure)
    assert np.linalg.norm(recon.array - t.array) < 1e-7 * 24


def test_pipeline_measure_is_valid_pvm():
    t = generate(OperatorSpec("random_normal", dim=12, scale=1.0, seed=20))
    res = spectral_theorem(t)
    assert pvm_validate(res.spectral_measure).all_passed


def test_hermitian_input_real_spectrum():
    t = generate(OperatorSpec("random_hermitian", dim=8, scale=2.0, seed=5))
    res = spectral_theorem(t)
    assert np.max(np.abs(res.spectral_measure.points.imag)) < 1e-8


def test_unitary_atoms_on_circle():
    t = generate(OperatorSpec("random_unitary", dim=6, scale=1.0, seed=10))
    res = spectral_theorem(t, direct_check=True)
    assert res.report.all_passed
    radii = np.abs(res.spectral_measure.points)
    np.testing.assert_allclose(radii, 1.0, atol=1e-8)


def test_laplacian_spectrum_formula():
    # eigenvalues 2 - 2 cos(k pi / (n+1)), all simple
    n = 16
    t = generate(OperatorSpec("laplacian_1d", dim=n, scale=1.0))
    res = spectral_theorem(t, direct_check=True)
    assert res.report.all_passed
    want = np.sort(2.0 - 2.0 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1)))
    got = np.sort(res.spectral_measure.points.real)
    np.testing.assert_allclose(got, want, atol=1e-8)


def test_momentum_ring_degenerate_spectrum():
    # eigenvalues -sin(2 pi k / n) come in coincident pairs
    n = 8
    t = generate(OperatorSpec("momentum_1d", dim=n, scale=1.0))
    res = spectral_theorem(t, direct_check=True)
    assert res.report.all_passed
    want = np.unique(np.round(-np.sin(2 * np.pi * np.arange(n) / n), 12))
    assert res.spectral_measure.num_atoms == want.size


def test_scale_limit_refusal_and_override():
    t = OperatorMatrix(1e9 * np.eye(2))
    with pytest.raises(ScaleLimit):
        spectral_theorem(t)
    # forcing runs to completion; the atoms of A drown in the singular
    # margin and the report says so instead of faking a recovery
    res = spectral_theorem(t, force_scale=True)
    assert not res.report.all_passed
    assert res.report.residuals["singular_weight_atoms"] >= 1.0


def test_norm_at_limit_still_recovers():
    t = OperatorMatrix(1e6 * np.eye(2))
    res = spectral_theorem(t)
    np.testing.assert_allclose(res.spectral_measure.points, [1e6], rtol=1e-9)
    assert res.report.all_passed, res.report.residuals


def test_cross_check_standalone():
    t = generate(OperatorSpec("random_normal", dim=10, scale=1.0, seed=33))
    res = spectral_theorem(t)
    direct = pvm_from_normal(t)
    rep = cross_check(res, direct)
    assert rep.all_passed, rep.residuals
    assert {"cross_point_gap", "cross_projection_gap",
            "cross_unmatched"} <= set(rep.residuals)


def test_pipeline_tolerance_conditioning_schedule():
    # quadratic growth kicks in only beyond norm 100
    assert pipeline_tolerance(4, 1.0) == pytest.approx(1000 * 4e-10)
    assert pipeline_tolerance(4, 100.0) == pytest.approx(1000 * 4e-10)
    assert pipeline_tolerance(4, 200.0) == pytest.approx(1000 * 4e-10 * 4.0)


def test_e2_support_within_half():
    t = generate(OperatorSpec("random_normal", dim=9, scale=50.0, seed=71))
    res = spectral_theorem(t)
    assert res.e2.support_radius <= 0.5 + 1e-9
    assert res.report.passed["e2_support_excess"]
