import numpy as np
import pytest

from ladsysid import (DimensionError, InputDist, Magnitude, NoiseSpec,
                      OutlierSpec, SpecError, build_regressor, sample_input,
                      sample_noise, sample_outliers)


class TestSampleInput:
    def test_bernoulli_support(self):
        seq = sample_input(InputDist.bernoulli_pm1(), 100, 3, seed=7)
        assert set(np.unique(seq.values)) <= {-1.0, 1.0}
        assert len(seq) == 102

    def test_gaussian_law_of_large_numbers(self):
        n, m = 10**4, 5
        seq = sample_input(InputDist.gaussian(1.0), n, m, seed=1)
        size = n + m - 1
        assert abs(seq.values.mean()) <= 4.0 / np.sqrt(size)
        assert abs(seq.values.var() - 1.0) <= 0.05

    def test_deterministic(self):
        a = sample_input(InputDist.gaussian(2.0), 50, 4, seed=123)
        b = sample_input(InputDist.gaussian(2.0), 50, 4, seed=123)
        assert np.array_equal(a.values, b.values)

    def test_seed_changes_draw(self):
        a = sample_input(InputDist.gaussian(1.0), 50, 4, seed=1)
        b = sample_input(InputDist.gaussian(1.0), 50, 4, seed=2)
        assert not np.array_equal(a.values, b.values)

    def test_dimension_errors(self):
        with pytest.raises(DimensionError):
            sample_input(InputDist.gaussian(1.0), 3, 4, seed=0)
        with pytest.raises(DimensionError):
            sample_input(InputDist.gaussian(1.0), 3, 0, seed=0)

    def test_values_frozen(self):
        seq = sample_input(InputDist.gaussian(1.0), 10, 2, seed=0)
        with pytest.raises(ValueError):
            seq.values[0] = 99.0

    def test_bad_dist(self):
        with pytest.raises(SpecError):
            InputDist("poisson")
        with pytest.raises(SpecError):
            InputDist.gaussian(0.0)


class TestBuildRegressor:
    def test_three_by_three_window_pattern(self):
        a, b, c, d, e = 1.0, 2.0, 3.0, 4.0, 5.0
        H = build_regressor([a, b, c, d, e], 3, 3)
        assert np.array_equal(H.entries,
                              [[a, b, c], [b, c, d], [c, d, e]])

    def test_single_column(self):
        h = np.arange(6.0)
        H = build_regressor(h, 6, 1)
        assert np.array_equal(H.entries[:, 0], h)

    def test_single_row(self):
        H = build_regressor([7.0, 8.0], 1, 2)
        assert np.array_equal(H.entries, [[7.0, 8.0]])

    def test_first_and_last_rows(self):
        seq = sample_input(InputDist.gaussian(1.0), 40, 6, seed=5)
        H = build_regressor(seq, 40, 6)
        assert np.array_equal(H.entries[0], seq.values[:6])
        assert np.array_equal(H.entries[-1], seq.values[-6:])

    def test_antidiagonal_constancy(self):
        seq = sample_input(InputDist.gaussian(1.0), 12, 4, seed=9)
        H = build_regressor(seq, 12, 4).entries
        for i in range(12):
            for j in range(4):
                for i2 in range(12):
                    j2 = i + j - i2
                    if 0 <= j2 < 4:
                        assert H[i, j] == H[i2, j2]

    def test_depends_on_exactly_n_plus_m_minus_1_scalars(self):
        seq = sample_input(InputDist.gaussian(1.0), 30, 3, seed=2)
        H = build_regressor(seq, 30, 3)
        assert len(np.unique(H.entries)) == 32

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            build_regressor(np.zeros(7), 5, 2)

    def test_accepts_sequence_object(self):
        seq = sample_input(InputDist.bernoulli_pm1(), 8, 2, seed=3)
        H = build_regressor(seq, 8, 2)
        assert H.shape == (8, 2)


class TestSampleNoise:
    def test_gamma_second_moment_identity(self):
        # E[w^2] = shape*scale^2 + (shape*scale)^2 = 1/3 + 2/3 = 1
        shape, scale = 2.0, 1.0 / np.sqrt(6.0)
        assert abs(shape * scale**2 + (shape * scale) ** 2 - 1.0) < 1e-12

    def test_exponential_second_moment_identity(self):
        mean = np.sqrt(2.0) / 2.0
        assert abs(2.0 * mean**2 - 1.0) < 1e-12

    @pytest.mark.parametrize("spec", [
        NoiseSpec.gaussian(1.0, seed=11),
        NoiseSpec.gamma(2.0, 1.0 / np.sqrt(6.0), seed=12),
        NoiseSpec.exponential(np.sqrt(2.0) / 2.0, seed=13),
    ])
    def test_unit_energy_presets(self, spec):
        w = sample_noise(spec, 10**5)
        assert abs(np.mean(w**2) - 1.0) <= 0.02

    def test_none_is_zero(self):
        assert not sample_noise(NoiseSpec.none(), 50).any()

    def test_deterministic(self):
        spec = NoiseSpec.gamma(2.0, 0.3, seed=5)
        assert np.array_equal(sample_noise(spec, 100), sample_noise(spec, 100))

    def test_invalid_parameters(self):
        with pytest.raises(SpecError):
            NoiseSpec.gaussian(-1.0)
        with pytest.raises(SpecError):
            NoiseSpec.gamma(0.0, 1.0)
        with pytest.raises(SpecError):
            NoiseSpec.exponential(0.0)


class TestSampleOutliers:
    def test_zero_count_is_zero_vector(self):
        e = sample_outliers(OutlierSpec.fixed(0, seed=1), 20)
        assert not e.any()

    def test_full_count_is_dense(self):
        e = sample_outliers(OutlierSpec.fixed(20, seed=2), 20)
        assert np.count_nonzero(e) == 20

    def test_support_is_distinct_and_magnitudes_large(self):
        spec = OutlierSpec.fixed(30, magnitude=Magnitude(100.0, 1.0), seed=3)
        e = sample_outliers(spec, 200)
        nz = np.nonzero(e)[0]
        assert len(nz) == 30
        assert (e[nz] > 50).all()

    def test_uniform_fraction_mean_count(self):
        # E[round(U * 0.2 * 1000)] = 100; Monte Carlo within 3%
        counts = [
            np.count_nonzero(sample_outliers(
                OutlierSpec.uniform_fraction(0.2, seed=s), 1000))
            for s in range(10**4)
        ]
        assert abs(np.mean(counts) - 100.0) <= 3.0

    def test_count_exceeds_n(self):
        with pytest.raises(SpecError):
            sample_outliers(OutlierSpec.fixed(5, seed=0), 3)

    def test_deterministic(self):
        spec = OutlierSpec.uniform_fraction(0.5, seed=77)
        assert np.array_equal(sample_outliers(spec, 100), sample_outliers(spec, 100))

    def test_support_independent_of_magnitude_params(self):
        a = sample_outliers(OutlierSpec.fixed(10, Magnitude(100.0, 50.0), seed=4), 100)
        b = sample_outliers(OutlierSpec.fixed(10, Magnitude(-3.0, 0.5), seed=4), 100)
        assert np.array_equal(a != 0, b != 0)

    def test_invalid_spec(self):
        with pytest.raises(SpecError):
            OutlierSpec.fixed(-1)
        with pytest.raises(SpecError):
            OutlierSpec.uniform_fraction(1.5)
        with pytest.raises(SpecError):
            Magnitude(0.0, 0.0)
