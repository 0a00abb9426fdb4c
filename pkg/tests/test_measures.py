import numpy as np
import pytest

from spectral_forge.errors import DimensionMismatch, NonFiniteValue
from spectral_forge.gallery import OperatorSpec, generate
from spectral_forge.linalg import OperatorMatrix
from spectral_forge.measures import (
    SpectralMeasure,
    pvm_from_normal,
    pvm_integrate,
    pvm_validate,
)


def test_atoms_of_flip_matrix():
    # projections (I -+ X)/2 onto the two eigenlines
    x = OperatorMatrix(np.array([[0, 1], [1, 0]], dtype=complex))
    e = pvm_from_normal(x)
    assert e.num_atoms == 2
    np.testing.assert_allclose(e.points, [-1, 1], atol=1e-14)
    np.testing.assert_allclose(e.projection(0).array,
                               [[0.5, -0.5], [-0.5, 0.5]], atol=1e-14)
    np.testing.assert_allclose(e.projection(1).array,
                               [[0.5, 0.5], [0.5, 0.5]], atol=1e-14)


def test_multiplicity_collapses_to_one_atom():
    e = pvm_from_normal(OperatorMatrix(np.diag([1.0, 1.0, 2.0])))
    assert e.num_atoms == 2
    assert e.ranks == (2, 1)
    np.testing.assert_allclose(e.projection(0).array,
                               np.diag([1.0, 1.0, 0.0]), atol=1e-14)


def test_near_degenerate_pair_is_merged():
    # gap 1e-12 sits far below the default clustering radius
    e = pvm_from_normal(OperatorMatrix(np.diag([1.0, 1.0 + 1e-12, 5.0])))
    assert e.num_atoms == 2
    assert e.points[0] == pytest.approx(1.0 + 5e-13, abs=1e-13)


def test_support_radius():
    e = pvm_from_normal(OperatorMatrix(np.diag([2j, -3.0])))
    assert e.support_radius == pytest.approx(3.0)


def test_total_rank_is_dimension():
    for seed in (1, 5):
        t = generate(OperatorSpec("random_normal", dim=9, scale=2.0, seed=seed))
        e = pvm_from_normal(t)
        assert sum(e.ranks) == 9


def test_integrate_identity_reconstructs_source():
    t = generate(OperatorSpec("random_normal", dim=8, scale=3.0, seed=2))
    e = pvm_from_normal(t)
    recon = pvm_integrate(lambda z: z, e)
    assert np.linalg.norm(recon.array - t.array) < 1e-9


def test_integrate_reciprocal_hand_value():
    e = pvm_from_normal(OperatorMatrix(np.diag([0.2, 0.1])))
    inv = pvm_integrate(lambda z: 1.0 / z, e)
    np.testing.assert_allclose(inv.array, np.diag([5.0, 10.0]), atol=1e-12)


def test_integrate_constant_gives_identity():
    e = pvm_from_normal(OperatorMatrix(np.diag([2j, -3.0, 0.5])))
    one = pvm_integrate(lambda z: 1.0, e)
    np.testing.assert_allclose(one.array, np.eye(3), atol=1e-14)


def test_integrate_rejects_non_finite_weight():
    e = pvm_from_normal(OperatorMatrix(np.diag([0.0, 1.0])))
    with pytest.raises(NonFiniteValue, match="atom"):
        pvm_integrate(lambda z: 1.0 / z if z != 0 else np.inf, e)


def test_validate_passes_on_generated_measures():
    for dim, seed in ((2, 3), (7, 8), (16, 9)):
        t = generate(OperatorSpec("random_normal", dim=dim, scale=1.5,
                                  seed=seed))
        report = pvm_validate(pvm_from_normal(t))
        assert report.all_passed, report.residuals


def test_validate_catches_duplicated_projection():
    e = pvm_from_normal(OperatorMatrix(np.diag([1.0, 2.0])))
    p0 = e.projection(0).array
    bad = SpectralMeasure(2, np.array([1.0, 2.0], dtype=complex),
                          projections=(p0, p0))
    report = pvm_validate(bad)
    assert not report.passed["orthogonality"]
    assert not report.passed["completeness"]


def test_validate_catches_non_idempotent_block():
    half = 0.5 * np.eye(2)
    bad = SpectralMeasure(2, np.array([0.0 + 0j, 1.0 + 0j]),
                          projections=(half, np.eye(2) - half))
    report = pvm_validate(bad)
    assert not report.passed["idempotency"]


def test_validate_catches_rank_deficit():
    p = np.diag([1.0, 0.0]).astype(complex)
    bad = SpectralMeasure(2, np.array([0.0 + 0j, 1.0 + 0j]),
                          projections=(p, p.copy()))
    report = pvm_validate(bad)
    assert not report.passed["rank_deficit"] or not report.passed["completeness"]


def test_validate_catches_colliding_points():
    e = pvm_from_normal(OperatorMatrix(np.diag([1.0, 2.0])))
    bad = SpectralMeasure(2, np.array([1.0, 1.0 + 1e-12], dtype=complex),
                          bases=(e.basis(0), e.basis(1)))
    report = pvm_validate(bad)
    assert not report.passed["min_point_gap"]


def test_dense_and_factored_storage_agree():
    t = generate(OperatorSpec("random_normal", dim=6, scale=1.0, seed=13))
    e = pvm_from_normal(t)
    dense = SpectralMeasure(6, e.points,
                            projections=tuple(e.projection(i).array
                                              for i in range(e.num_atoms)))
    assert pvm_validate(dense).all_passed
    for i in range(e.num_atoms):
        np.testing.assert_allclose(dense.projection(i).array,
                                   e.projection(i).array, atol=1e-13)
        b = dense.basis(i)
        np.testing.assert_allclose(b @ b.conj().T,
                                   e.projection(i).array, atol=1e-11)


def test_projection_is_exactly_hermitian_in_factored_mode():
    t = generate(OperatorSpec("random_normal", dim=8, scale=2.0, seed=21))
    e = pvm_from_normal(t)
    for i in range(e.num_atoms):
        p = e.projection(i).array
        assert np.array_equal(p, p.conj().T)


def test_constructor_validation():
    pts = np.array([0.0 + 0j])
    with pytest.raises(ValueError):
        SpectralMeasure(2, pts)  # neither storage given
    with pytest.raises(ValueError):
        SpectralMeasure(2, pts, bases=(np.eye(2),),
                        projections=(np.eye(2),))
    with pytest.raises(DimensionMismatch):
        SpectralMeasure(2, np.array([], dtype=complex), bases=())
    with pytest.raises(DimensionMismatch):
        SpectralMeasure(2, pts, bases=(np.eye(3),))
    with pytest.raises(DimensionMismatch):
        SpectralMeasure(2, pts, projections=(np.eye(2), np.eye(2)))


def test_measure_is_read_only():
    e = pvm_from_normal(OperatorMatrix(np.diag([1.0, 2.0])))
    with pytest.raises(ValueError):
        e.points[0] = 9.0
