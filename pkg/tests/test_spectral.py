"""Sign-indexed eigendecompositions, Fourier transforms, band constants."""

import numpy as np
import pytest

from wsplab import (EmptyBandError, Graph, c_band_cardinality,
                    c_eigenvalue_margin, constant_graphon, eigendecompose,
                    gft, graphon_l2_distance, graphon_spectrum, inverse_gft,
                    ramp_signal, sample_template, sbm_graphon, signed_spectrum,
                    step_graphon, step_graphon_spectrum_exact, wft)
from wsplab.graphon import step_signal

SBM = sbm_graphon([0.0, 0.5, 1.0], [[0.8, 0.2], [0.2, 0.6]])


def random_symmetric(rng, n):
    A = rng.standard_normal((n, n))
    return (A + A.T) / 2


def random_step_graphon(rng, max_blocks=5):
    k = rng.integers(1, max_blocks)
    bp = np.concatenate([[0.0], np.sort(rng.uniform(size=k)), [1.0]])
    v = rng.uniform(size=(k + 1, k + 1))
    return step_graphon(bp, (v + v.T) / 2)


class TestEigendecompose:
    def test_two_node_path(self):
        d = eigendecompose(Graph(np.array([[0.0, 1.0], [1.0, 0.0]])))
        assert list(d.indices) == [1, -1]
        np.testing.assert_allclose(d.eigenvalues, [1.0, -1.0])
        np.testing.assert_allclose(np.abs(d.eigenvectors),
                                   np.full((2, 2), 1 / np.sqrt(2)))
        # sign convention: first maximal component nonnegative
        assert d.eigenvectors[0, 0] > 0 and d.eigenvectors[0, 1] > 0

    def test_zero_matrix(self):
        d = eigendecompose(Graph(np.zeros((4, 4))))
        np.testing.assert_array_equal(d.eigenvalues, 0.0)
        assert list(d.indices) == [1, 2, 3, 4]

    def test_constant_template_normalized(self):
        for n in (3, 17, 64):
            g = sample_template(constant_graphon(0.4), n)
            d = eigendecompose(g, scale="normalized")
            assert d.eigenvalue(1) == pytest.approx(0.4, abs=1e-12)
            assert np.all(np.abs(d.eigenvalues[1:]) < 1e-12)

    def test_ordering_and_reconstruction(self):
        rng = np.random.default_rng(0)
        for n in (5, 32, 128):
            d = eigendecompose(Graph(random_symmetric(rng, n)))
            pos = d.eigenvalues[d.indices > 0]
            neg = d.eigenvalues[d.indices < 0]
            assert np.all(np.diff(pos) <= 1e-12)          # decreasing
            assert np.all(np.diff(neg) >= -1e-12)         # rising toward 0
            V = d.eigenvectors
            np.testing.assert_allclose(V.T @ V, np.eye(n), atol=1e-9)

    def test_rejects_asymmetric(self):
        g = Graph(np.array([[0.0, 1.0], [1.0, 0.0]]))
        with pytest.raises(ValueError):
            eigendecompose(Graph(np.eye(2)), scale="sideways")


class TestReconstructionResidual:
    def test_residual_below_tolerance_up_to_256(self):
        rng = np.random.default_rng(1)
        for n in (8, 64, 256):
            S = random_symmetric(rng, n)
            d = eigendecompose(Graph(S))
            rel = np.linalg.norm(S - d.reconstruction()) / np.linalg.norm(S)
            assert rel < 1e-9


class TestGraphonSpectrum:
    def test_constant_rank_one(self):
        s = graphon_spectrum(constant_graphon(0.4), m=256)
        assert s.eigenvalues[0] == pytest.approx(0.4, abs=1e-12)
        assert np.all(np.abs(s.eigenvalues[1:]) < 1e-12)

    def test_sbm_matches_block_eigenproblem(self):
        """Nonzero spectrum of the equal-block model: eigs of B/2."""
        s = graphon_spectrum(SBM, m=2048)
        expect = np.linalg.eigvalsh(np.array([[0.4, 0.1], [0.1, 0.3]]))[::-1]
        np.testing.assert_allclose(s.eigenvalues[:2], expect, atol=1e-3)
        np.testing.assert_allclose(s.eigenvalues[:2], [0.4618034, 0.2381966],
                                   atol=1e-3)

    def test_zero_graphon(self):
        s = graphon_spectrum(step_graphon([0.0, 1.0], [[0.0]]), m=64)
        np.testing.assert_array_equal(s.eigenvalues, 0.0)

    def test_grid_matches_exact_block_route(self):
        """Independent oracle: exact finite-rank spectra of step kernels."""
        rng = np.random.default_rng(5)
        for _ in range(5):
            w = random_step_graphon(rng)
            exact = step_graphon_spectrum_exact(w).eigenvalues
            grid = graphon_spectrum(w, m=1024).eigenvalues
            k = len(exact)
            top = np.sort(np.abs(grid))[::-1][:k]
            np.testing.assert_allclose(np.sort(np.abs(exact))[::-1], top, atol=5e-3)

    def test_eigenfunction_norms(self):
        s = graphon_spectrum(SBM, m=512)
        for idx in (1, 2):
            f = s.eigenfunction(idx)
            assert f.norm() == pytest.approx(1.0, abs=1e-6)


class TestGft:
    def test_path_alignment(self):
        d = eigendecompose(Graph(np.array([[0.0, 1.0], [1.0, 0.0]])))
        xhat = gft(np.array([1.0, 1.0]), d)
        np.testing.assert_allclose(xhat, [np.sqrt(2.0), 0.0], atol=1e-12)

    def test_zero(self):
        d = eigendecompose(Graph(np.zeros((3, 3))))
        np.testing.assert_array_equal(gft(np.zeros(3), d), 0.0)

    def test_roundtrip_and_parseval(self):
        rng = np.random.default_rng(2)
        d = eigendecompose(Graph(random_symmetric(rng, 16)))
        x = rng.standard_normal(16)
        xhat = gft(x, d)
        np.testing.assert_allclose(inverse_gft(xhat, d), x, atol=1e-10)
        assert np.linalg.norm(xhat) == pytest.approx(np.linalg.norm(x), abs=1e-10)

    def test_dimension_mismatch(self):
        d = eigendecompose(Graph(np.zeros((3, 3))))
        with pytest.raises(ValueError):
            gft(np.zeros(4), d)
        with pytest.raises(ValueError):
            inverse_gft(np.zeros(2), d)


class TestWft:
    def test_ramp_against_constant_kernel(self):
        """First coefficient is int u du = 1/2 up to grid quadrature."""
        s = graphon_spectrum(constant_graphon(0.4), m=2048)
        coeffs = wft(ramp_signal(), s)
        assert coeffs[0] == pytest.approx(0.5, abs=1e-3)

    def test_zero_signal(self):
        s = graphon_spectrum(SBM, m=256)
        np.testing.assert_array_equal(wft(step_signal([0.0, 1.0], [0.0]), s), 0.0)

    def test_eigenfunction_projects_to_unit(self):
        s = graphon_spectrum(SBM, m=512)
        coeffs = wft(s.eigenfunction(1), s)
        assert coeffs[0] == pytest.approx(1.0, abs=1e-9)
        assert np.max(np.abs(coeffs[1:])) < 1e-9

    def test_parseval_up_to_quadrature(self):
        s = graphon_spectrum(SBM, m=1024)
        x = ramp_signal()
        assert np.linalg.norm(wft(x, s)) == pytest.approx(x.norm(), abs=2e-3)


class TestBandCardinality:
    def test_literal_count(self):
        assert c_band_cardinality([0.9, 0.5, -0.45, 0.1], 0.45) == 3

    def test_constant_kernel(self):
        s = graphon_spectrum(constant_graphon(0.4), m=128)
        assert c_band_cardinality(s, 0.3) == 1
        assert c_band_cardinality(s, 0.5) == 0

    def test_threshold_range(self):
        with pytest.raises(ValueError):
            c_band_cardinality([0.5], 1.0 + 1e-9)
        with pytest.raises(ValueError):
            c_band_cardinality([0.5], 0.0)

    def test_non_increasing_in_threshold(self):
        rng = np.random.default_rng(3)
        vals = rng.uniform(-1, 1, size=50)
        counts = [c_band_cardinality(vals, c) for c in (0.1, 0.3, 0.5, 0.9)]
        assert counts == sorted(counts, reverse=True)


class TestEigenvalueMargin:
    def test_worked_example(self):
        """Index 1 in band; j = -1 gives 0.75, zero tail gives 0.5."""
        m = c_eigenvalue_margin([0.45, -0.25], [0.5, -0.2], 0.3)
        assert m == pytest.approx(0.5)

    def test_rank_one_zero_tail(self):
        assert c_eigenvalue_margin([0.4], [0.4], 0.3) == pytest.approx(0.4)

    def test_empty_band(self):
        with pytest.raises(EmptyBandError):
            c_eigenvalue_margin([0.4], [0.2, -0.1], 0.3)

    def test_nonnegative_on_random_spectra(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a = rng.uniform(-1, 1, size=10)
            b = rng.uniform(-1, 1, size=10)
            if np.all(np.abs(b) < 0.5):
                continue
            assert c_eigenvalue_margin(a, b, 0.5) >= 0.0


class TestEigenvaluePerturbation:
    def test_difference_bounded_by_kernel_distance(self):
        """Matching signed indices move at most the L2 kernel distance."""
        rng = np.random.default_rng(6)
        for _ in range(50):
            a = random_step_graphon(rng)
            b = random_step_graphon(rng)
            da = step_graphon_spectrum_exact(a)
            db = step_graphon_spectrum_exact(b)
            dist = graphon_l2_distance(a, b)
            for idx in set(da.indices) | set(db.indices):
                gap = abs(da.eigenvalue(idx, 0.0) - db.eigenvalue(idx, 0.0))
                assert gap <= dist + 1e-9

    def test_template_eigenvalue_converges(self):
        """Leading eigenvalue of S_n/n approaches the kernel's (1/3 for the
        product kernel, eigenfunction u), within the discretization gap."""
        from wsplab import induced_graphon, product_graphon
        w = product_graphon()
        lam = 1.0 / 3.0
        errs = []
        for n in (8, 16, 32, 64):
            g = sample_template(w, n)
            d = eigendecompose(g, scale="normalized")
            gap = graphon_l2_distance(w, induced_graphon(g))
            err = abs(d.eigenvalue(1) - lam)
            assert err <= gap + 1e-9
            errs.append(err)
        assert errs[-1] < errs[0]


class TestSignedSpectrum:
    def test_zero_assignment_after_positives(self):
        d = signed_spectrum([0.5, 0.0, -0.3, 0.2])
        by_index = dict(zip(d.indices.tolist(), d.eigenvalues.tolist()))
        assert by_index[1] == 0.5 and by_index[2] == 0.2 and by_index[3] == 0.0
        assert by_index[-1] == -0.3
