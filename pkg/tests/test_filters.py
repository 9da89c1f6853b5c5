"""Polynomial filters: shift vs spectral routes, kernel filtering, profiles."""

import numpy as np
import pytest

from wsplab import (Graph, apply_graph_filter, apply_graphon_filter,
                    apply_spectral, constant_graphon, constant_signal,
                    eigendecompose, estimate_spectral_profile,
                    induced_graphon, induced_graphon_filter_output,
                    induced_graphon_signal, ramp_signal, sample_graph_signal,
                    sample_template, sbm_graphon, shift_commutation_check,
                    signal_l2_distance, step_graphon)
from wsplab.bounds import BoundIngredients, bound_generic_filter
from wsplab.graphon import graphon_l2_distance
from wsplab.spectral import c_band_cardinality, c_eigenvalue_margin, \
    graphon_spectrum

PATH2 = Graph(np.array([[0.0, 1.0], [1.0, 0.0]]))


def random_graph(rng, n):
    A = rng.uniform(size=(n, n))
    return Graph((A + A.T) / 2)


class TestApplyGraphFilter:
    def test_identity(self):
        x = np.array([3.0, -1.0])
        np.testing.assert_array_equal(apply_graph_filter([1.0], PATH2, x), x)

    def test_single_shift(self):
        np.testing.assert_allclose(
            apply_graph_filter([0.0, 1.0], PATH2, [1.0, 2.0]), [2.0, 1.0])

    def test_identity_plus_shift(self):
        np.testing.assert_allclose(
            apply_graph_filter([1.0, 1.0], PATH2, [1.0, 2.0]), [3.0, 3.0])

    def test_linearity(self):
        rng = np.random.default_rng(0)
        g = random_graph(rng, 10)
        h = rng.standard_normal(4)
        x, y = rng.standard_normal(10), rng.standard_normal(10)
        a, b = 0.7, -1.3
        lhs = apply_graph_filter(h, g, a * x + b * y)
        rhs = a * apply_graph_filter(h, g, x) + b * apply_graph_filter(h, g, y)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(1)
        n = 12
        A = rng.uniform(size=(n, n))
        S = (A + A.T) / 2
        h = rng.standard_normal(5)
        x = rng.standard_normal(n)
        perm = rng.permutation(n)
        y = apply_graph_filter(h, Graph(S), x)
        y_perm = apply_graph_filter(h, Graph(S[np.ix_(perm, perm)]), x[perm])
        np.testing.assert_allclose(y_perm, y[perm], atol=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply_graph_filter([1.0], PATH2, [1.0, 2.0, 3.0])


class TestSpectralEquivalence:
    def test_identity_filter(self):
        d = eigendecompose(PATH2)
        x = np.array([3.0, -2.0])
        np.testing.assert_allclose(apply_spectral([1.0], d, x), x, atol=1e-12)

    def test_single_shift_matches(self):
        d = eigendecompose(PATH2)
        np.testing.assert_allclose(
            apply_spectral([0.0, 1.0], d, np.array([1.0, 2.0])), [2.0, 1.0],
            atol=1e-12)

    def test_random_pairs_agree(self):
        """Shift-domain and spectral-domain filtering coincide."""
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = int(rng.integers(2, 65))
            k = int(rng.integers(1, 9))
            g = random_graph(rng, n)
            h = rng.standard_normal(k)
            x = rng.standard_normal(n)
            d = eigendecompose(g)
            a = apply_graph_filter(h, g, x)
            b = apply_spectral(h, d, x)
            assert np.linalg.norm(a - b) <= 1e-9 * max(np.linalg.norm(a), 1.0)


class TestGraphonFilter:
    def test_constant_kernel_averages(self):
        y = apply_graphon_filter([0.0, 1.0], constant_graphon(0.4),
                                 constant_signal(1.0), m=128)
        np.testing.assert_allclose(y.values, 0.4, atol=1e-12)

    def test_identity_samples_input(self):
        y = apply_graphon_filter([1.0], constant_graphon(0.4), ramp_signal(), m=16)
        np.testing.assert_allclose(y.values, np.arange(16) / 16)

    def test_zero_kernel_annihilates(self):
        w = step_graphon([0.0, 1.0], [[0.0]])
        y = apply_graphon_filter([0.0, 0.5, 0.2], w, ramp_signal(), m=32)
        np.testing.assert_array_equal(y.values, 0.0)


class TestInducedFilterOutput:
    def test_identity_filter(self):
        g = sample_template(sbm_graphon([0, 0.5, 1], [[0.8, 0.2], [0.2, 0.6]]), 6)
        x = sample_graph_signal(ramp_signal(), g)
        out = induced_graphon_filter_output([1.0], g, x)
        ref = induced_graphon_signal(x, g)
        assert signal_l2_distance(out, ref) == 0.0

    def test_constant_kernel_closed_form(self):
        for n in (2, 7, 20):
            g = sample_template(constant_graphon(0.4), n)
            out = induced_graphon_filter_output([0.0, 1.0], g, np.ones(n))
            np.testing.assert_allclose(out.values, 0.4, atol=1e-12)

    def test_matches_kernel_filter_at_matching_resolution(self):
        """Lifted filtering equals grid filtering of the lifted objects."""
        sbm = sbm_graphon([0, 0.5, 1], [[0.8, 0.2], [0.2, 0.6]])
        g = sample_template(sbm, 8)
        x = sample_graph_signal(ramp_signal(), g)
        h = [0.2, 0.5, 0.1]
        lifted = induced_graphon_filter_output(h, g, x)
        gridded = apply_graphon_filter(h, induced_graphon(g),
                                       induced_graphon_signal(x, g), m=8)
        assert signal_l2_distance(lifted, gridded) < 1e-9

    def test_template_output_within_generic_bound(self):
        """Measured transfer error obeys the generic bound with measured
        kernel and signal gaps."""
        from wsplab import product_graphon
        w = product_graphon()
        x = ramp_signal()
        h = np.array([0.0, 0.0, 0.9])  # band-compliant at c = 0.2
        c = 0.2
        n = 64
        g = sample_template(w, n)
        xn = sample_graph_signal(x, g)
        out_graph = induced_graphon_filter_output(h, g, xn)
        out_kernel = apply_graphon_filter(h, w, x, m=2048)
        err = signal_l2_distance(out_graph, out_kernel)
        ind = induced_graphon(g)
        d = eigendecompose(g, scale="normalized", want_vectors=False)
        spec = graphon_spectrum(w, m=1024)
        ing = BoundIngredients(
            band_threshold=c,
            filter_lipschitz=estimate_spectral_profile(h, c).outer_lipschitz,
            filter_lipschitz_inner=estimate_spectral_profile(h, c).inner_lipschitz,
            signal_norm=x.norm(),
            band_count=c_band_cardinality(d.eigenvalues, c),
            band_margin=c_eigenvalue_margin(spec, d, c),
            kernel_distance=graphon_l2_distance(w, ind),
            signal_distance=signal_l2_distance(x, induced_graphon_signal(xn, g)))
        report = bound_generic_filter(ing)
        assert err <= report.value
        assert report.value == sum(report.terms.values())


class TestSpectralProfile:
    def test_quadratic_response(self):
        p = estimate_spectral_profile([0.0, 0.0, 0.9], 0.5)
        assert p.outer_lipschitz == pytest.approx(1.8, abs=1e-6)
        assert p.inner_lipschitz == pytest.approx(0.9, abs=1e-6)
        assert p.sup_norm == pytest.approx(0.9, abs=1e-9)
        assert p.compliant

    def test_constant_response(self):
        p = estimate_spectral_profile([0.5], 0.5)
        assert p.outer_lipschitz == 0.0 and p.inner_lipschitz == 0.0

    def test_pure_shift_fails_strict_sup(self):
        p = estimate_spectral_profile([0.0, 1.0], 0.5)
        assert p.outer_lipschitz == pytest.approx(1.0)
        assert p.inner_lipschitz == pytest.approx(1.0)
        assert p.sup_norm == pytest.approx(1.0)
        assert not p.compliant

    def test_interior_extremum_found(self):
        """Critical points of h' inside the band are not missed: for
        h = l - l^3, h' = 1 - 3 l^2 peaks at l = 0."""
        p = estimate_spectral_profile([0.0, 1.0, 0.0, -1.0], 0.5,
                                      grid_size=101)
        assert p.inner_lipschitz == pytest.approx(1.0, abs=1e-9)


class TestShiftCommutation:
    def test_polynomials_commute(self):
        rng = np.random.default_rng(3)
        g = random_graph(rng, 16)
        x = rng.standard_normal(16)
        assert shift_commutation_check(rng.standard_normal(4), g, x) < 1e-9

    def test_identity_is_exact(self):
        rng = np.random.default_rng(4)
        g = random_graph(rng, 8)
        assert shift_commutation_check([1.0], g, rng.standard_normal(8)) == 0.0

    def test_longer_taps_larger_graph(self):
        rng = np.random.default_rng(5)
        g = random_graph(rng, 64)
        x = rng.standard_normal(64)
        assert shift_commutation_check(rng.standard_normal(6) * 0.2, g, x) < 1e-8
