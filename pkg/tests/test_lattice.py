import math

import numpy as np
import pytest

from epd_gossip.errors import (
    DegenerateCovarianceError,
    DimensionMismatchError,
    DriftError,
    EmptyFilterError,
    NotNormalizedError,
    PeriodicityDetectedError,
)
from epd_gossip.lattice import (
    ScalarField,
    convolve,
    dirac_field,
    field_from_csv,
    field_to_csv,
    filter_from_json,
    filter_fourier,
    filter_to_json,
    lazy_filter,
    load_filter,
    new_filter,
    save_filter,
    standard_filter,
    triangular_filter,
    verify_aperiodicity,
)

LAZY_1D = [((0,), 0.5), ((1,), 0.25), ((-1,), 0.25)]


class TestNewFilter:
    def test_nearest_neighbour_2d_covariance(self):
        f = standard_filter(2)
        np.testing.assert_allclose(f.covariance, 0.5 * np.eye(2), atol=1e-15)
        assert f.is_symmetric
        assert f.radius == 1

    def test_lazy_1d(self):
        f = new_filter(1, LAZY_1D)
        np.testing.assert_allclose(f.covariance, [[0.5]], atol=1e-15)
        assert f.is_symmetric

    def test_drift_rejected(self):
        with pytest.raises(DriftError):
            new_filter(1, [((1,), 1.0)])

    def test_not_normalized_rejected(self):
        with pytest.raises(NotNormalizedError):
            new_filter(1, [((1,), 0.3), ((-1,), 0.3)])

    def test_degenerate_rejected(self):
        # all mass on one axis of Z^2
        with pytest.raises(DegenerateCovarianceError):
            new_filter(2, [((1, 0), 0.5), ((-1, 0), 0.5)])

    def test_empty_rejected(self):
        with pytest.raises(EmptyFilterError):
            new_filter(1, [])

    def test_bad_weight_rejected(self):
        with pytest.raises(ValueError):
            new_filter(1, [((1,), 0.5), ((-1,), 0.5), ((0,), 0.0)])

    def test_duplicate_offset_rejected(self):
        with pytest.raises(ValueError):
            new_filter(1, [((1,), 0.5), ((1,), 0.25), ((-1,), 0.25)])


class TestBuiltins:
    def test_standard_1d(self):
        f = standard_filter(1)
        assert f.entries == {(1,): 0.5, (-1,): 0.5}
        np.testing.assert_allclose(f.covariance, [[1.0]])

    def test_standard_2d_weights(self):
        f = standard_filter(2)
        assert len(f.entries) == 4
        assert all(w == 0.25 for w in f.entries.values())

    def test_standard_3d(self):
        f = standard_filter(3)
        assert len(f.entries) == 6
        assert all(w == pytest.approx(1 / 6) for w in f.entries.values())
        np.testing.assert_allclose(f.covariance, np.eye(3) / 3, atol=1e-15)

    def test_triangular_covariance_and_det(self):
        f = triangular_filter()
        np.testing.assert_allclose(
            f.covariance, [[2 / 3, 1 / 3], [1 / 3, 2 / 3]], atol=1e-15
        )
        assert np.linalg.det(f.covariance) == pytest.approx(1 / 3, rel=1e-14)
        np.testing.assert_allclose(f.mean, [0.0, 0.0], atol=1e-16)


class TestFilterFourier:
    def test_at_zero(self):
        for f in (standard_filter(1), triangular_filter(), lazy_filter(1)):
            assert filter_fourier(f, np.zeros(f.dim)) == pytest.approx(1.0)

    def test_lazy_at_pi(self):
        f = lazy_filter(1)
        assert filter_fourier(f, np.array([math.pi])) == pytest.approx(0.0, abs=1e-15)

    def test_standard_at_pi_witnesses_periodicity(self):
        f = standard_filter(1)
        assert filter_fourier(f, np.array([math.pi])).real == pytest.approx(-1.0)

    def test_symmetric_filters_real(self):
        rng = np.random.default_rng(3)
        for f in (standard_filter(2), triangular_filter(), lazy_filter(1)):
            for _ in range(25):
                xi = rng.uniform(-math.pi, math.pi, size=f.dim)
                assert abs(filter_fourier(f, xi).imag) < 1e-12

    def test_magnitude_bounded(self):
        rng = np.random.default_rng(4)
        f = triangular_filter()
        for _ in range(100):
            xi = rng.uniform(-math.pi, math.pi, size=2)
            assert abs(filter_fourier(f, xi)) <= 1.0 + 1e-14


class TestAperiodicity:
    def test_triangular_passes(self):
        f = triangular_filter()
        report = verify_aperiodicity(f)
        assert report.passed
        assert report.margin > 0
        assert f.aperiodicity_margin == report.margin

    def test_lazy_margin_value(self):
        # dense 1-d scan oracle: min (1 - (1/2 + cos(xi)/2)) / xi^2
        f = lazy_filter(1)
        report = verify_aperiodicity(f, 256)
        xs = np.linspace(-math.pi, math.pi, 256)
        h = xs[1] - xs[0]
        keep = np.abs(xs) >= h
        expected = np.min(
            (1 - np.abs(0.5 + 0.5 * np.cos(xs[keep]))) / xs[keep] ** 2
        )
        assert report.margin == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_standard_filters_detected_periodic(self, d):
        with pytest.raises(PeriodicityDetectedError) as exc:
            verify_aperiodicity(standard_filter(d))
        assert np.max(np.abs(np.abs(exc.value.xi) - math.pi)) < 1e-9

    def test_grid_floor(self):
        with pytest.raises(ValueError):
            verify_aperiodicity(triangular_filter(), 8)


class TestFieldsAndConvolve:
    def test_dirac(self):
        f = dirac_field(2)
        assert f.mass() == 1.0
        assert f.value_at((0, 0)) == 1.0
        assert f.box_radius == 0

    def test_convolve_dirac_returns_filter(self):
        filt = new_filter(1, LAZY_1D)
        out = convolve(filt, dirac_field(1))
        assert out.value_at((-1,)) == 0.25
        assert out.value_at((0,)) == 0.5
        assert out.value_at((1,)) == 0.25

    def test_two_step_standard_1d(self):
        filt = standard_filter(1)
        out = convolve(filt, convolve(filt, dirac_field(1)))
        assert out.value_at((-2,)) == 0.25
        assert out.value_at((0,)) == 0.5
        assert out.value_at((2,)) == 0.25
        assert out.value_at((1,)) == 0.0

    def test_triangular_dirac_support(self):
        filt = triangular_filter()
        out = convolve(filt, dirac_field(2))
        support = {v for v, _ in out.nonzero_entries()}
        assert support == set(filt.entries)

    def test_mass_conserved_random_fields(self):
        rng = np.random.default_rng(11)
        filt = triangular_filter()
        for _ in range(20):
            m = int(rng.integers(0, 4))
            vals = rng.normal(size=(2 * m + 1, 2 * m + 1))
            fld = ScalarField(2, m, vals)
            out = convolve(filt, fld)
            assert out.mass() == pytest.approx(fld.mass(), rel=1e-10, abs=1e-12)
            assert out.box_radius == m + 1

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            convolve(standard_filter(2), dirac_field(1))

    def test_support_growth_exact_zero_outside(self):
        filt = new_filter(1, LAZY_1D)
        fld = dirac_field(1)
        for n in range(1, 12):
            fld = convolve(filt, fld)
            assert fld.box_radius == n
            # nonzero support must stay within [-n, n]
            for v, _ in fld.nonzero_entries():
                assert abs(v[0]) <= n

    def test_dimension_four_generic_path(self):
        # dims above 3 take the plain-numpy fallback kernel
        filt = standard_filter(4)
        out = convolve(filt, convolve(filt, dirac_field(4)))
        assert out.box_radius == 2
        assert out.mass() == pytest.approx(1.0, abs=1e-12)
        assert out.value_at((0, 0, 0, 0)) == pytest.approx(
            2 * (1 / 8) ** 2 * 4, rel=1e-12
        )

    def test_value_outside_box_is_zero(self):
        fld = dirac_field(1)
        assert fld.value_at((5,)) == 0.0

    def test_padded_to(self):
        fld = convolve(new_filter(1, LAZY_1D), dirac_field(1))
        big = fld.padded_to(4)
        assert big.box_radius == 4
        assert big.mass() == pytest.approx(fld.mass())
        assert big.value_at((1,)) == fld.value_at((1,))


class TestFileFormats:
    def test_filter_json_roundtrip(self, tmp_path):
        f = triangular_filter()
        path = tmp_path / "filter.json"
        save_filter(f, path)
        g = load_filter(path)
        assert g.entries == f.entries
        assert g.dim == f.dim
        np.testing.assert_allclose(g.covariance, f.covariance)

    def test_filter_json_shape(self):
        obj = filter_to_json(lazy_filter(1))
        assert set(obj) == {"dim", "entries"}
        assert all(set(e) == {"offset", "weight"} for e in obj["entries"])
        g = filter_from_json(obj)
        assert g.entries == lazy_filter(1).entries

    def test_field_csv_roundtrip(self, tmp_path):
        filt = triangular_filter()
        fld = convolve(filt, convolve(filt, dirac_field(2)))
        path = tmp_path / "field.csv"
        field_to_csv(fld, path)
        back = field_from_csv(path)
        assert back.dim == fld.dim
        np.testing.assert_array_equal(back.values, fld.values)
