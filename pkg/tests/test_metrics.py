import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specinfo.errors import (
    DegenerateRangeError,
    DimensionMismatchError,
    EmptySamplesError,
    LengthMismatchError,
    ZeroVarianceError,
)
from specinfo.metrics import (
    BayesReport,
    ClassMultiplicities,
    CorrelationMatrix,
    DistanceReport,
    bayes_error,
    correlation_matrix,
    distances,
    evaluate_transform,
    ideal_matrix,
    multiplicities_from_library,
    partition_indices,
    pearson,
)
from specinfo.spectra import PpmGrid, Spectrum, SpectrumLibrary

TABLE_PATTERN = ClassMultiplicities(tuple([4] * 19 + [1] * 4))


class TestPearson:
    def test_perfect_positive(self):
        assert pearson(np.array([1, 2, 3]), np.array([2, 4, 6])) == pytest.approx(1.0)

    def test_perfect_negative(self):
        assert pearson(np.array([1, 2, 3]), np.array([3, 2, 1])) == pytest.approx(-1.0)

    def test_hand_computed_half(self):
        # centered x = (-1, 0, 1), y = (-1, 1, 0): cov = 1/3, sx = sy =
        # sqrt(2/3), so r = (1/3) / (2/3) = 0.5
        assert pearson(np.array([1, 2, 3]), np.array([1, 3, 2])) == pytest.approx(0.5)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            pearson(np.array([1, 2]), np.array([1, 2, 3]))

    def test_zero_variance(self):
        with pytest.raises(ZeroVarianceError):
            pearson(np.array([1.0, 1.0, 1.0]), np.array([1, 2, 3]))

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_symmetry_and_bound(self, seed):
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=(2, 30))
        r = pearson(x, y)
        assert abs(r) <= 1.0 + 1e-12
        assert r == pytest.approx(pearson(y, x), abs=1e-12)

    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.floats(min_value=0.01, max_value=100),
        st.floats(min_value=-50, max_value=50),
    )
    @settings(max_examples=100, deadline=None)
    def test_affine_invariance(self, seed, a, b):
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=(2, 25))
        assert pearson(a * x + b, y) == pytest.approx(pearson(x, y), abs=1e-9)

    def test_self_affine_is_one(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=40)
        assert pearson(x, 2.5 * x + 3.0) == pytest.approx(1.0, abs=1e-12)


class TestCorrelationMatrix:
    def test_identical_vectors(self):
        m = correlation_matrix([np.array([1.0, 2, 3]), np.array([1.0, 2, 3])])
        assert np.allclose(m.values, 1.0)

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        m = correlation_matrix(list(rng.normal(size=(6, 20))))
        assert np.array_equal(m.values, m.values.T)

    def test_matches_pairwise_loop_oracle(self):
        rng = np.random.default_rng(2)
        vectors = list(rng.normal(size=(10, 35)))
        m = correlation_matrix(vectors)
        for i in range(10):
            for j in range(10):
                assert m.values[i, j] == pytest.approx(
                    pearson(vectors[i], vectors[j]), abs=1e-12
                )

    def test_unit_diagonal(self):
        rng = np.random.default_rng(3)
        m = correlation_matrix(list(rng.normal(size=(5, 12))))
        assert np.allclose(np.diag(m.values), 1.0, atol=1e-12)

    def test_names_offending_vector(self):
        with pytest.raises(ZeroVarianceError, match="vector 1"):
            correlation_matrix([np.array([1.0, 2.0]), np.array([5.0, 5.0])])


class TestIdealMatrix:
    def test_printed_five_by_five(self):
        expected = np.array(
            [
                [1, 1, 0, 0, 0],
                [1, 1, 0, 0, 0],
                [0, 0, 1, 1, 1],
                [0, 0, 1, 1, 1],
                [0, 0, 1, 1, 1],
            ],
            dtype=float,
        )
        m = ideal_matrix(ClassMultiplicities((2, 3)))
        assert np.array_equal(m.values, expected)

    def test_singleton(self):
        assert np.array_equal(ideal_matrix(ClassMultiplicities((1,))).values, [[1.0]])

    def test_table_pattern_counts(self):
        m = ideal_matrix(TABLE_PATTERN)
        assert m.values.size == 6400
        assert int(m.values.sum()) == 308

    def test_entries_binary_and_trace(self):
        m = ideal_matrix(ClassMultiplicities((3, 2, 5)))
        assert set(np.unique(m.values)) == {0.0, 1.0}
        assert np.trace(m.values) == 10


class TestPartitionIndices:
    def test_table_pattern_sizes(self):
        part = partition_indices(TABLE_PATTERN)
        assert len(part.intra) == 308
        assert len(part.inter) == 6092

    def test_singleton(self):
        part = partition_indices(ClassMultiplicities((1,)))
        assert part.intra == {(0, 0)}
        assert part.inter == frozenset()

    def test_matches_ideal_matrix_blocks(self):
        mult = ClassMultiplicities((2, 3))
        part = partition_indices(mult)
        m = ideal_matrix(mult)
        for i in range(5):
            for j in range(5):
                assert ((i, j) in part.intra) == (m.values[i, j] == 1.0)

    def test_sizes_formula(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            counts = tuple(int(c) for c in rng.integers(1, 6, size=rng.integers(1, 8)))
            mult = ClassMultiplicities(counts)
            part = partition_indices(mult)
            assert len(part.intra) == sum(c * c for c in counts)
            assert len(part.inter) == mult.n**2 - len(part.intra)


class TestDistances:
    def test_zero_for_identical(self):
        mult = ClassMultiplicities((2, 3))
        ideal = ideal_matrix(mult)
        report = distances(ideal, ideal, partition_indices(mult))
        assert report.d_intra == report.d_inter == report.d_total == 0.0

    def test_all_zeros_measured_gives_intra_count(self):
        measured = CorrelationMatrix(80, np.zeros((80, 80)))
        ideal = ideal_matrix(TABLE_PATTERN)
        report = distances(measured, ideal, partition_indices(TABLE_PATTERN))
        assert report.d_intra == 308.0
        assert report.d_inter == 0.0
        assert report.d_total == 308.0

    def test_additivity(self):
        rng = np.random.default_rng(5)
        mult = ClassMultiplicities((3, 4, 2))
        vectors = list(rng.normal(size=(9, 30)))
        measured = correlation_matrix(vectors)
        report = distances(measured, ideal_matrix(mult), partition_indices(mult))
        assert report.d_total == pytest.approx(
            report.d_intra + report.d_inter, abs=1e-9
        )
        assert report.d_avg == pytest.approx(
            report.d_intra / report.intra_size + report.d_inter / report.inter_size,
            abs=1e-9,
        )

    def test_dimension_mismatch(self):
        mult = ClassMultiplicities((2, 3))
        with pytest.raises(DimensionMismatchError):
            distances(
                CorrelationMatrix(4, np.eye(4)),
                ideal_matrix(mult),
                partition_indices(mult),
            )


def sweep_oracle(intra, inter, n_candidates=10_000):
    """Exhaustive threshold sweep minimizing the balanced empirical error."""
    lo = min(intra.min(), inter.min())
    hi = max(intra.max(), inter.max())
    best = 0.5
    for t in np.linspace(lo, hi, n_candidates):
        miss = np.mean(intra < t)
        false_alarm = np.mean(inter >= t)
        err = 0.5 * miss + 0.5 * false_alarm
        best = min(best, err, 1.0 - err)
    return best


class TestBayesError:
    def test_disjoint_supports(self):
        report = bayes_error(
            np.linspace(0.9, 1.0, 40), np.linspace(0.0, 0.1, 60)
        )
        assert report.error_probability == 0.0

    def test_identical_distributions(self):
        rng = np.random.default_rng(6)
        samples = rng.normal(size=2000)
        report = bayes_error(samples, rng.normal(size=2000))
        assert report.error_probability == pytest.approx(0.5, abs=0.05)

    def test_overlapping_gaussians_vs_sweep_oracle(self):
        rng = np.random.default_rng(7)
        intra = rng.normal(1.0, 0.5, size=3000)
        inter = rng.normal(0.0, 0.5, size=3000)
        report = bayes_error(intra, inter)
        assert report.error_probability == pytest.approx(
            sweep_oracle(intra, inter), abs=0.02
        )

    def test_histograms_totals(self):
        report = bayes_error(np.array([0.9, 0.95]), np.array([0.1, 0.2, 0.3]))
        assert report.intra_histogram.total == 2
        assert report.inter_histogram.total == 3

    def test_empty_samples(self):
        with pytest.raises(EmptySamplesError):
            bayes_error(np.array([]), np.array([1.0]))

    def test_degenerate_range(self):
        with pytest.raises(DegenerateRangeError):
            bayes_error(np.array([1.0, 1.0]), np.array([1.0]))

    def test_error_never_exceeds_half(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            a = rng.normal(rng.uniform(-1, 1), rng.uniform(0.1, 2), size=200)
            b = rng.normal(rng.uniform(-1, 1), rng.uniform(0.1, 2), size=300)
            report = bayes_error(a, b)
            assert 0.0 <= report.error_probability <= 0.5 + 1e-12


class TestEvaluateTransform:
    def make_library(self, mult, n_channels=30, seed=9):
        rng = np.random.default_rng(seed)
        grid = PpmGrid(0.0, 1.0, n_channels)
        entries = []
        for m, count in enumerate(mult.counts):
            for _ in range(count):
                entries.append(
                    (f"c{m}", Spectrum(grid, rng.uniform(0.1, 1.0, n_channels)))
                )
        return SpectrumLibrary(grid, tuple(entries))

    def test_centroid_transform_zero_intra(self):
        mult = ClassMultiplicities((3, 3))
        lib = self.make_library(mult)
        rng = np.random.default_rng(10)
        centroids = rng.normal(size=(2, 30))
        transformed = [centroids[0]] * 3 + [centroids[1]] * 3
        report, _ = evaluate_transform(lib, transformed, mult)
        assert report.d_intra == pytest.approx(0.0, abs=1e-9)

    def test_identity_transform_matches_manual_pipeline(self):
        mult = ClassMultiplicities((3, 2, 4))
        lib = self.make_library(mult)
        raw = [e.spectrum.intensities for e in lib.entries]
        report, bayes = evaluate_transform(lib, raw, mult)

        measured = correlation_matrix(raw)
        part = partition_indices(mult)
        expected = distances(measured, ideal_matrix(mult), part)
        assert report == expected

        intra_vals = np.array(
            [measured.values[i, j] for i, j in sorted(part.intra)]
        )
        inter_vals = np.array(
            [measured.values[i, j] for i, j in sorted(part.inter)]
        )
        expected_bayes = bayes_error(intra_vals, inter_vals)
        assert bayes.error_probability == expected_bayes.error_probability
        assert bayes.threshold == expected_bayes.threshold

    def test_count_mismatch(self):
        mult = ClassMultiplicities((2, 2))
        lib = self.make_library(mult)
        with pytest.raises(DimensionMismatchError):
            evaluate_transform(lib, [np.ones(30)] * 3, mult)

    def test_multiplicities_from_library(self):
        mult = ClassMultiplicities((2, 5, 1))
        lib = self.make_library(mult)
        assert multiplicities_from_library(lib).counts == (2, 5, 1)


class TestReportSerialization:
    def test_distance_report_roundtrip(self):
        report = DistanceReport(1.5, 2.5, 4.0, 0.25, 10, 90)
        assert DistanceReport.from_dict(report.to_dict()) == report

    def test_bayes_report_roundtrip(self):
        report = bayes_error(
            np.linspace(0.5, 1.0, 20), np.linspace(0.0, 0.6, 30)
        )
        back = BayesReport.from_dict(report.to_dict())
        assert back.threshold == report.threshold
        assert back.error_probability == report.error_probability
        assert np.array_equal(
            back.intra_histogram.counts, report.intra_histogram.counts
        )
        assert np.array_equal(back.bin_edges, report.bin_edges)
