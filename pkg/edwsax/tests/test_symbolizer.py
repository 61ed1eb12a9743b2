import json
import warnings

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from density import DensityModel, fit_density, kde_cdf, kde_pdf, select_kernel
from distance import build_lookup, mindist
from edwsax_common import (
    CorruptModel,
    DegenerateDensityWarning,
    DegenerateSample,
    FormatVersionMismatch,
    InvalidAlphabet,
    InvalidLength,
    InvalidParameter,
    InvalidWordLength,
    ParseError,
    WordMismatch,
)
from symbolizer import (
    Breakpoints,
    Centroids,
    SymbolizerModel,
    SymbolWord,
    WordLengthPolicy,
    build_model,
    compute_breakpoints,
    compute_centroids,
    deserialize_model,
    encode,
    gaussian_breakpoints,
    gaussian_model,
    load_model,
    parse_word,
    reconstruct,
    render_word,
    save_model,
    serialize_model,
    symbolize,
    train,
)
from timeseries import paa, znormalize


def _model_from_interior(interior, centroids=None):
    bp = Breakpoints(interior)
    if centroids is None:
        edges = np.concatenate(([bp.interior[0] - 1.0], bp.interior, [bp.interior[-1] + 1.0]))
        centroids = 0.5 * (edges[:-1] + edges[1:])
    return SymbolizerModel(breakpoints=bp, centroids=Centroids(centroids), lookup=build_lookup(bp.interior))


@pytest.fixture(scope="module")
def normal_model():
    rng = np.random.default_rng(7)
    series = rng.standard_normal((40, 256))
    return train(series, 8, WordLengthPolicy(segment_size=2), kernel="epanechnikov", rule="isj")


class TestBreakpointTypes:
    def test_strictly_increasing(self):
        with pytest.raises(InvalidAlphabet):
            Breakpoints([0.0, 0.0])

    @pytest.mark.parametrize("count", [0, 256])
    def test_alphabet_bounds(self, count):
        with pytest.raises(InvalidAlphabet):
            Breakpoints(np.arange(count, dtype=float))

    def test_betas_have_sentinels(self):
        b = Breakpoints([-1.0, 1.0])
        assert b.alphabet_size == 3
        assert b.betas[0] == -np.inf and b.betas[-1] == np.inf

    def test_symbol_word_validation(self):
        with pytest.raises(WordMismatch):
            SymbolWord([0, 3], 3)
        with pytest.raises(InvalidWordLength):
            SymbolWord([], 3)
        assert SymbolWord([0, 2], 3) == SymbolWord(np.array([0, 2]), 3)
        assert SymbolWord([0, 2], 3) != SymbolWord([0, 2], 4)


class TestWordLengthPolicy:
    def test_segment_size(self):
        assert WordLengthPolicy(segment_size=2).resolve(128) == 64
        assert WordLengthPolicy(segment_size=2).resolve(151) == 75
        assert WordLengthPolicy(segment_size=10).resolve(3) == 1

    def test_fixed(self):
        assert WordLengthPolicy(word_length=8).resolve(100) == 8
        with pytest.raises(InvalidWordLength):
            WordLengthPolicy(word_length=8).resolve(4)

    def test_exactly_one(self):
        with pytest.raises(InvalidParameter):
            WordLengthPolicy()
        with pytest.raises(InvalidParameter):
            WordLengthPolicy(word_length=2, segment_size=2)
        with pytest.raises(InvalidParameter):
            WordLengthPolicy(segment_size=0)

    def test_name_round_trip(self):
        for p in (WordLengthPolicy(word_length=16), WordLengthPolicy(segment_size=2)):
            assert WordLengthPolicy.parse(p.name) == p


class TestGaussian:
    def test_a3(self):
        np.testing.assert_allclose(gaussian_breakpoints(3).interior, [-0.43, 0.43], atol=0.005)

    def test_a2(self):
        np.testing.assert_allclose(gaussian_breakpoints(2).interior, [0.0], atol=1e-15)

    def test_a4(self):
        np.testing.assert_allclose(gaussian_breakpoints(4).interior, [-0.6745, 0.0, 0.6745], atol=1e-3)

    @pytest.mark.parametrize("a", [1, 257, 0])
    def test_out_of_range(self, a):
        with pytest.raises(InvalidAlphabet):
            gaussian_breakpoints(a)

    def test_model_centroids_are_conditional_medians(self):
        m = gaussian_model(4)
        assert m.method == "sax"
        np.testing.assert_allclose(m.centroids.gammas, norm.ppf([0.125, 0.375, 0.625, 0.875]), atol=1e-12)


class TestComputeBreakpoints:
    def test_uniform_law_quartiles(self):
        grid = np.linspace(0.0, 1.0, 2001)
        dens = DensityModel(select_kernel("uniform"), 1e-3, grid, "fixed:0.001")
        np.testing.assert_allclose(compute_breakpoints(dens, 4).interior, [0.25, 0.5, 0.75], atol=0.02)
        bp2 = compute_breakpoints(dens, 2)
        np.testing.assert_allclose(compute_centroids(dens, bp2).gammas, [0.25, 0.75], atol=0.02)

    def test_normal_draws_match_gaussian(self):
        x = np.random.default_rng(3).standard_normal(10000)
        dens = fit_density(x, "normal", "silverman")
        np.testing.assert_allclose(compute_breakpoints(dens, 3).interior, [-0.43, 0.43], atol=0.05)
        bp2 = compute_breakpoints(dens, 2)
        np.testing.assert_allclose(compute_centroids(dens, bp2).gammas, [-0.6745, 0.6745], atol=0.05)

    def test_a2_is_median(self, rng):
        dens = fit_density(rng.exponential(1.0, 2000), "epanechnikov", "silverman")
        b = compute_breakpoints(dens, 2).interior[0]
        assert kde_cdf(dens, b) == pytest.approx(0.5, abs=1e-8)

    @pytest.mark.parametrize("a", [3, 7, 20])
    def test_equal_area_and_centroid_split(self, rng, a):
        x = np.concatenate([rng.normal(-2, 0.5, 600), rng.normal(1.5, 1.0, 400)])
        dens = fit_density(x, "epanechnikov", "isj")
        bp = compute_breakpoints(dens, a)
        cent = compute_centroids(dens, bp)
        lo, hi = dens.support
        edges = np.concatenate(([lo], bp.interior, [hi]))
        pdf = lambda y: kde_pdf(dens, y)  # noqa: E731
        for i in range(a):
            left, _ = integrate.quad(pdf, edges[i], cent.gammas[i], limit=200)
            right, _ = integrate.quad(pdf, cent.gammas[i], edges[i + 1], limit=200)
            assert left + right == pytest.approx(1.0 / a, abs=1e-4)
            assert left == pytest.approx(right, abs=1e-4)
            assert edges[i] < cent.gammas[i] < edges[i + 1]

    def test_flat_cdf_uses_midpoint_and_warns(self):
        # Two clusters with an empty gap: the cdf sits at exactly 0.5 between them.
        samples = np.concatenate([np.linspace(-3.0, -2.0, 50), np.linspace(2.0, 3.0, 50)])
        dens = DensityModel(select_kernel("uniform"), 0.1, samples, "fixed:0.1")
        with pytest.warns(DegenerateDensityWarning):
            bp = compute_breakpoints(dens, 2)
        assert bp.interior[0] == pytest.approx(0.0, abs=1e-6)

    def test_nested_refinement_is_consistent(self, rng):
        dens = fit_density(rng.gamma(2.0, 1.0, 3000), "epanechnikov", "isj")
        b4 = compute_breakpoints(dens, 4).interior
        b8 = compute_breakpoints(dens, 8).interior
        np.testing.assert_array_equal(b8[1::2], b4)


class TestTrain:
    def test_gaussian_limit(self):
        rng = np.random.default_rng(11)
        series = rng.standard_normal((100, 200))
        m = train(series, 5, WordLengthPolicy(segment_size=2), kernel="normal", rule="silverman")
        np.testing.assert_allclose(m.breakpoints.interior, gaussian_breakpoints(5).interior, atol=0.05)

    def test_bimodal_breakpoints(self, rng):
        x = np.concatenate([rng.normal(-3, 1, 5000), rng.normal(3, 1, 5000)])
        rng.shuffle(x)
        m = train([x], 4, kernel="epanechnikov", rule="isj", normalize=False)
        b = m.breakpoints.interior
        assert -4 <= b[0] <= -2
        assert abs(b[1]) < 0.5
        assert 2 <= b[2] <= 4

    def test_deterministic(self, rng):
        series = rng.standard_normal((10, 64))
        m1 = train(series, 6, kernel="biweight", rule="fixed:0.3")
        m2 = train(series, 6, kernel="biweight", rule="fixed:0.3")
        assert serialize_model(m1) == serialize_model(m2)
        assert m1 == m2

    def test_metadata(self, normal_model):
        assert normal_model.method == "edwsax"
        assert normal_model.kernel == "epanechnikov"
        assert normal_model.bandwidth_rule == "isj"
        assert normal_model.sample_count == 40 * 256
        assert normal_model.word_policy == "segment=2"
        assert normal_model.lookup.same_as(build_lookup(normal_model.breakpoints.interior))

    def test_estimate_on_paa(self, rng):
        series = rng.standard_normal((20, 64))
        m = train(series, 4, WordLengthPolicy(segment_size=4), rule="silverman", estimate_on="paa")
        assert m.sample_count == 20 * 16
        assert m.estimate_on == "paa"

    def test_bad_estimate_on(self, rng):
        with pytest.raises(InvalidParameter):
            train(rng.standard_normal((3, 10)), 4, estimate_on="both")

    def test_empty_training_set(self):
        with pytest.raises(DegenerateSample):
            train([], 4)


class TestSymbolize:
    def test_three_symbol_mapping(self):
        m = _model_from_interior([-0.43, 0.43])
        assert list(symbolize(m, [-1.0, 0.0, 2.0]).symbols) == [0, 1, 2]

    def test_boundary_goes_up(self):
        m = _model_from_interior([-0.43, 0.43])
        assert list(symbolize(m, [-0.43, 0.43]).symbols) == [1, 2]

    def test_six_symbol_segment(self, six_symbol_breakpoints):
        m = _model_from_interior(six_symbol_breakpoints)
        word = symbolize(m, [0.7])
        assert word.symbols[0] == 3
        assert render_word(word) == "d"

    def test_monotone(self, normal_model, rng):
        x = np.sort(rng.normal(0, 2, 500))
        assert np.all(np.diff(symbolize(normal_model, x).symbols) >= 0)

    def test_accepts_paa_series(self, normal_model, rng):
        p = paa(znormalize(rng.standard_normal(64)), 16)
        assert symbolize(normal_model, p).word_length == 16


class TestReconstruct:
    def test_centroid_expansion(self):
        m = _model_from_interior([0.0], centroids=[-1.0, 1.0])
        out = reconstruct(m, SymbolWord([0, 1], 2), 4)
        np.testing.assert_array_equal(out.values, [-1.0, -1.0, 1.0, 1.0])

    def test_single_symbol(self, normal_model):
        out = reconstruct(normal_model, SymbolWord([5], 8), 13)
        np.testing.assert_allclose(out.values, normal_model.centroids.gammas[5])

    def test_constant_zero_round_trip(self):
        m = gaussian_model(3)
        z = znormalize([4.0] * 12)
        word = symbolize(m, paa(z, 6))
        np.testing.assert_allclose(reconstruct(m, word, 12).values, 0.0, atol=0.05)

    def test_too_short(self, normal_model):
        with pytest.raises(InvalidLength):
            reconstruct(normal_model, SymbolWord([1, 2, 3], 8), 2)

    def test_alphabet_mismatch(self, normal_model):
        with pytest.raises(WordMismatch):
            reconstruct(normal_model, SymbolWord([1, 2], 4), 4)

    def test_values_inside_bins_and_idempotent(self, normal_model, rng):
        lo = normal_model.support_lo
        edges = np.concatenate(([lo], normal_model.breakpoints.interior, [normal_model.support_hi]))
        for _ in range(20):
            s = znormalize(rng.standard_normal(128))
            word = symbolize(normal_model, paa(s, 64))
            rec = reconstruct(normal_model, word, 128)
            for v, sym in zip(rec.values[::2], word.symbols):
                assert edges[sym] < v < edges[sym + 1]
            assert symbolize(normal_model, paa(rec, 64)) == word

    @pytest.mark.parametrize("n,w", [(5, 2), (7, 3), (13, 5)])
    def test_fractional_lengths_re_encode_to_same_word(self, n, w):
        model = gaussian_model(20)
        extremes = SymbolWord([0, 19] + [0] * (w - 2), 20)
        assert symbolize(model, paa(reconstruct(model, extremes, n), w)) == extremes
        rng = np.random.default_rng(n * 31 + w)
        for _ in range(25):
            word = SymbolWord(rng.integers(0, 20, size=w), 20)
            rec = reconstruct(model, word, n)
            segments = paa(rec, w).segments
            np.testing.assert_allclose(segments, model.centroids.gammas[word.symbols], atol=1e-12)
            assert symbolize(model, paa(rec, w)) == word


class TestEncodeAndWords:
    def test_encode_pipeline(self, normal_model, rng):
        raw = rng.normal(10, 3, 100)
        word = encode(normal_model, raw, WordLengthPolicy(segment_size=2))
        expected = symbolize(normal_model, paa(znormalize(raw), 50))
        assert word == expected

    def test_render_letters_and_integers(self):
        assert render_word(SymbolWord([0, 1, 25], 26)) == "abz"
        assert render_word(SymbolWord([0, 42, 99], 100)) == "0 42 99"

    def test_parse_round_trip(self):
        for w in (SymbolWord([3, 0, 4], 5), SymbolWord([99, 0, 57], 100)):
            assert parse_word(render_word(w), w.alphabet_size) == w

    def test_parse_error_position(self):
        with pytest.raises(ParseError) as exc:
            parse_word("abz", 5, line=3, path="words.txt")
        assert exc.value.line == 3 and exc.value.column == 3
        assert "words.txt:3:3" in str(exc.value)

    def test_parse_integer_out_of_range(self):
        with pytest.raises(ParseError):
            parse_word("1 2 300", 100)


class TestSerialization:
    def test_round_trip(self, normal_model):
        data = serialize_model(normal_model)
        back = deserialize_model(data)
        assert back == normal_model
        np.testing.assert_array_equal(back.breakpoints.interior, normal_model.breakpoints.interior)
        np.testing.assert_array_equal(back.centroids.gammas, normal_model.centroids.gammas)
        assert back.lookup.same_as(normal_model.lookup)
        assert serialize_model(back) == data

    def test_round_trip_behaviour_identical(self, normal_model, rng):
        back = deserialize_model(serialize_model(normal_model))
        a = znormalize(rng.standard_normal(64))
        b = znormalize(rng.standard_normal(64))
        wa, wb = symbolize(normal_model, paa(a, 32)), symbolize(normal_model, paa(b, 32))
        assert symbolize(back, paa(a, 32)) == wa
        np.testing.assert_array_equal(reconstruct(back, wa, 64).values, reconstruct(normal_model, wa, 64).values)
        assert mindist(wa, wb, back.lookup, 64) == mindist(wa, wb, normal_model.lookup, 64)

    def test_header(self, normal_model):
        doc = json.loads(serialize_model(normal_model))
        assert doc["magic"] == "EDWSAX"
        assert doc["format_version"] == 1

    def test_truncated(self, normal_model):
        data = serialize_model(normal_model)
        with pytest.raises(CorruptModel):
            deserialize_model(data[: len(data) // 2])

    def test_not_a_model(self):
        with pytest.raises(CorruptModel):
            deserialize_model(b'{"hello": 1}')
        with pytest.raises(CorruptModel):
            deserialize_model(b"\xff\xfe")

    def test_version_mismatch(self, normal_model):
        doc = json.loads(serialize_model(normal_model))
        doc["format_version"] = 2
        with pytest.raises(FormatVersionMismatch):
            deserialize_model(json.dumps(doc).encode())

    def test_tampered_lookup(self, normal_model):
        doc = json.loads(serialize_model(normal_model))
        doc["lookup"][0][3] += 0.5
        with pytest.raises(CorruptModel):
            deserialize_model(json.dumps(doc).encode())

    def test_missing_field(self, normal_model):
        doc = json.loads(serialize_model(normal_model))
        del doc["centroids"]
        with pytest.raises(CorruptModel):
            deserialize_model(json.dumps(doc).encode())

    def test_save_and_load(self, normal_model, tmp_path):
        path = tmp_path / "models" / "m.json"
        save_model(str(path), normal_model)
        assert load_model(str(path)) == normal_model

    def test_gaussian_model_round_trip(self):
        m = gaussian_model(10, word_policy="w=8")
        assert deserialize_model(serialize_model(m)) == m

    def test_no_warnings_on_clean_model(self, rng):
        with warnings.catch_warnings():
            warnings.simplefilter("error", DegenerateDensityWarning)
            build_model(fit_density(rng.standard_normal(500), "normal", "scott"), 10)
