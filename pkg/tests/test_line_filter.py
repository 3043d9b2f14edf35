import numpy as np
import pytest

from steelinspect.line_filter import (
    ScaleBank,
    classify_structure,
    eigs2,
    hessian,
    line_similarity,
    multiscale_response,
)


def render_line(shape, p0, p1, depth=150.0, width=0.7, bg=200.0):
    """Continuous dark line: bg - depth * exp(-d^2 / 2w^2), d = dist to segment."""
    rows, cols = np.mgrid[0:shape[0], 0:shape[1]].astype(np.float64)
    p0 = np.asarray(p0, float)
    v = np.asarray(p1, float) - p0
    w = np.stack([rows - p0[0], cols - p0[1]], axis=-1)
    t = np.clip((w @ v) / (v @ v), 0.0, 1.0)
    d2 = ((w - t[..., None] * v) ** 2).sum(axis=-1)
    return bg - depth * np.exp(-d2 / (2 * width ** 2))


def render_blob(shape, center, depth=150.0, radius=1.0, bg=200.0):
    rows, cols = np.mgrid[0:shape[0], 0:shape[1]].astype(np.float64)
    d2 = (rows - center[0]) ** 2 + (cols - center[1]) ** 2
    return bg - depth * np.exp(-d2 / (2 * radius ** 2))


class TestHessian:
    def test_constant_is_zero(self):
        f = hessian(np.full((16, 16), 80.0), sigma=1.0)
        np.testing.assert_allclose(f.ixx, 0.0, atol=1e-10)
        np.testing.assert_allclose(f.iyy, 0.0, atol=1e-10)
        np.testing.assert_allclose(f.ixy, 0.0, atol=1e-10)

    def test_ramp_interior_zero(self):
        rows, cols = np.mgrid[0:32, 0:32].astype(np.float64)
        f = hessian(2.0 * cols + 3.0 * rows, sigma=1.5)
        sl = (slice(8, 24), slice(8, 24))
        assert np.abs(f.ixx[sl]).max() < 1e-8
        assert np.abs(f.iyy[sl]).max() < 1e-8
        assert np.abs(f.ixy[sl]).max() < 1e-8

    def test_quadratic_second_derivative(self):
        # For x^2 the x-second-derivative is 2 everywhere; a Gaussian
        # derivative filter must agree with the finite-difference oracle.
        rows, cols = np.mgrid[0:40, 0:40].astype(np.float64)
        img = cols ** 2
        f = hessian(img, sigma=1.0)
        oracle = img[:, 2:] - 2 * img[:, 1:-1] + img[:, :-2]  # == 2 exactly
        sl = (slice(10, 30), slice(10, 30))
        np.testing.assert_allclose(f.ixx[sl], 2.0, atol=5e-2)
        np.testing.assert_allclose(oracle[sl], 2.0, atol=1e-12)
        assert np.abs(f.iyy[sl]).max() < 1e-6

    def test_mixed_term(self):
        rows, cols = np.mgrid[0:40, 0:40].astype(np.float64)
        f = hessian(rows * cols, sigma=1.2)
        sl = (slice(10, 30), slice(10, 30))
        np.testing.assert_allclose(f.ixy[sl], 1.0, atol=5e-2)

    def test_sigma_floor(self):
        with pytest.raises(ValueError):
            hessian(np.zeros((8, 8)), sigma=0.4)


class TestEigs2:
    def test_diagonal(self):
        lam1, lam2 = eigs2(np.array(3.0), np.array(0.0), np.array(-5.0))
        assert lam1 == 3.0 and lam2 == -5.0

    def test_symmetric_example(self):
        lam1, lam2 = eigs2(np.array(2.0), np.array(1.0), np.array(2.0))
        assert lam1 == pytest.approx(3.0)
        assert lam2 == pytest.approx(1.0)

    def test_ordering_and_oracle(self):
        rng = np.random.default_rng(21)
        ixx = rng.normal(size=10000)
        ixy = rng.normal(size=10000)
        iyy = rng.normal(size=10000)
        lam1, lam2 = eigs2(ixx, ixy, iyy)
        assert (lam1 >= lam2).all()
        mats = np.zeros((10000, 2, 2))
        mats[:, 0, 0], mats[:, 1, 1] = ixx, iyy
        mats[:, 0, 1] = mats[:, 1, 0] = ixy
        ref = np.linalg.eigvalsh(mats)  # ascending
        np.testing.assert_allclose(lam2, ref[:, 0], atol=1e-9)
        np.testing.assert_allclose(lam1, ref[:, 1], atol=1e-9)

    def test_trace_and_det_preserved(self):
        rng = np.random.default_rng(22)
        ixx, ixy, iyy = rng.normal(size=(3, 500))
        lam1, lam2 = eigs2(ixx, ixy, iyy)
        np.testing.assert_allclose(lam1 + lam2, ixx + iyy, atol=1e-9)
        np.testing.assert_allclose(lam1 * lam2, ixx * iyy - ixy ** 2, atol=1e-9)


class TestLineSimilarity:
    def test_both_negative_bright_line_branch(self):
        # lam2 <= lam1 <= 0: |lam2| + lam1.
        assert line_similarity(np.array(-1.0), np.array(-10.0)) == pytest.approx(9.0)

    def test_mixed_sign_penalized_branch(self):
        # lam2 < 0 < lam1 < |lam2|/mu: |lam2| - mu*lam1.
        assert line_similarity(np.array(2.0), np.array(-10.0), mu=1.0) == pytest.approx(8.0)

    def test_large_positive_lam1_rejected(self):
        assert line_similarity(np.array(12.0), np.array(-10.0), mu=1.0) == 0.0

    def test_both_positive_rejected(self):
        assert line_similarity(np.array(5.0), np.array(2.0)) == 0.0

    def test_isotropic_negative_pair_cancels(self):
        # lam1 == lam2 < 0 (dark-on-bright blob after polarity flip): zero.
        assert line_similarity(np.array(-7.0), np.array(-7.0)) == pytest.approx(0.0)

    def test_nonnegative_everywhere(self):
        rng = np.random.default_rng(23)
        a = rng.normal(size=2000)
        b = rng.normal(size=2000)
        lam1, lam2 = np.maximum(a, b), np.minimum(a, b)
        assert (line_similarity(lam1, lam2, mu=1.0) >= 0).all()

    def test_mu_controls_mixed_branch(self):
        lam1, lam2 = np.array(2.0), np.array(-10.0)
        assert line_similarity(lam1, lam2, mu=0.5) == pytest.approx(9.0)
        assert line_similarity(lam1, lam2, mu=1.0) == pytest.approx(8.0)
        with pytest.raises(ValueError):
            line_similarity(lam1, lam2, mu=2.0)


class TestClassifyStructure:
    # Arguments are magnitude-ordered: |lam1| >= |lam2|.
    def test_examples(self):
        eps = 0.1
        assert classify_structure(5.0, 0.01, eps) == "line"
        assert classify_structure(-8.0, -7.9, 0.5) == "blob"
        assert classify_structure(0.01, 0.02, eps) == "sheet"
        assert classify_structure(5.0, 1.0, eps) == "none"

    def test_eps_must_be_positive(self):
        with pytest.raises(ValueError):
            classify_structure(1.0, 0.0, eps=0.0)


class TestMultiscale:
    def test_constant_zero_response(self):
        out = multiscale_response(np.full((32, 32), 120.0))
        np.testing.assert_allclose(out.response, 0.0, atol=1e-9)

    def test_dark_line_beats_dark_blob(self):
        shape = (64, 64)
        line = render_line(shape, (32, 8), (32, 56))
        blob = render_blob(shape, (32, 32))
        r_line = multiscale_response(line).response[32, 10:54].min()
        r_blob = multiscale_response(blob).response.max()
        assert r_line >= 2.0 * r_blob

    def test_affine_image_zero_interior(self):
        rows, cols = np.mgrid[0:48, 0:48].astype(np.float64)
        out = multiscale_response(100.0 + 0.5 * cols - 0.25 * rows)
        assert np.abs(out.response[12:36, 12:36]).max() <= 1e-4

    def test_contrast_covariance(self):
        img = render_line((48, 48), (24, 6), (24, 42))
        base = multiscale_response(img).response
        scaled = multiscale_response(100.0 + 3.0 * (img - 100.0)).response
        mask = base > 1e-6
        np.testing.assert_allclose(scaled[mask] / base[mask], 3.0, rtol=1e-4)

    def test_rotation_robustness(self):
        horiz = render_line((64, 64), (32, 10), (32, 54))
        diag = render_line((64, 64), (12, 12), (52, 52))
        r_h = multiscale_response(horiz).response.max()
        r_d = multiscale_response(diag).response.max()
        assert abs(r_h - r_d) / r_h < 0.25

    def test_single_scale_uses_sigma1_squared(self):
        img = render_line((48, 48), (24, 6), (24, 42))
        bank = ScaleBank(sigma1=1.0, count=1)
        out = multiscale_response(img, bank)
        f = hessian(img, 1.0)
        from steelinspect.line_filter import eigs2 as _e

        lam1, lam2 = _e(f.ixx, f.ixy, f.iyy)
        manual = 1.0 ** 2 * line_similarity(-lam2, -lam1, 1.0)
        np.testing.assert_allclose(out.response, manual, atol=1e-12)
        assert (out.scale_index == 0).all()

    def test_winning_scale_tracks_width(self):
        thin = render_line((64, 64), (32, 8), (32, 56), width=0.7)
        wide = render_line((64, 64), (32, 8), (32, 56), width=2.5)
        bank = ScaleBank(sigma1=1.0, factor=np.sqrt(2.0), count=4)
        s_thin = multiscale_response(thin, bank).scale_index[32, 32]
        s_wide = multiscale_response(wide, bank).scale_index[32, 32]
        assert s_wide > s_thin

    def test_response_nonnegative(self):
        rng = np.random.default_rng(24)
        img = rng.uniform(0, 255, (48, 48))
        assert (multiscale_response(img).response >= 0).all()

    def test_scalebank_sigmas(self):
        bank = ScaleBank(sigma1=1.0, factor=np.sqrt(2.0), count=4)
        np.testing.assert_allclose(bank.sigmas, [1.0, 2 ** 0.5, 2.0, 2 ** 1.5])
