import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdrcf import core_filter as cf
from mdrcf.errors import DegenerateTrainingError, DimensionError, InvalidParameterError


def brute_kernel(x, z, sigma):
    """k(t) = exp(-||x - shift(z, t)||^2 / (sigma^2 n)) by explicit cyclic shifts."""
    H, W, L = x.shape
    k = np.empty((H, W))
    for th in range(H):
        for tw in range(W):
            shifted = np.roll(z, (-th, -tw), axis=(0, 1))
            k[th, tw] = np.exp(-np.sum((x - shifted) ** 2) / (sigma**2 * x.size))
    return k


def brute_linear(x, z):
    H, W, _ = x.shape
    c = np.empty((H, W))
    for th in range(H):
        for tw in range(W):
            c[th, tw] = np.sum(x * np.roll(z, (-th, -tw), axis=(0, 1)))
    return c


# -- label and window -----------------------------------------------------------

def test_label_single_cell():
    assert cf.gaussian_label(1, 1, 1.0, (0, 0)).tolist() == [[1.0]]


def test_label_3x3_center():
    y = cf.gaussian_label(3, 3, 1.0, (1, 1))
    assert y[1, 1] == 1.0
    for h, w in [(0, 1), (2, 1), (1, 0), (1, 2)]:
        assert y[h, w] == pytest.approx(np.exp(-0.5))


def test_label_wraps_around():
    y = cf.gaussian_label(8, 8, 2.0, (0, 0))
    assert y[4, 4] == pytest.approx(np.exp(-4.0))
    # direct loop with circular distance
    for h in range(8):
        for w in range(8):
            dw, dh = min(w, 8 - w), min(h, 8 - h)
            assert y[h, w] == pytest.approx(np.exp(-(dw**2 + dh**2) / 8.0))


def test_label_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        cf.gaussian_label(4, 4, 0.0, (0, 0))
    with pytest.raises(InvalidParameterError):
        cf.gaussian_label(4, 4, 1.0, (4, 0))


def test_hann_degenerate_and_midpoint():
    assert cf.hann_window(1, 1).tolist() == [[1.0]]
    assert cf.hann_window(3, 3)[1, 1] == 1.0


def test_hann_matches_formula():
    i = np.arange(4)
    v = 0.5 * (1 - np.cos(2 * np.pi * i / 3))
    np.testing.assert_allclose(cf.hann_window(4, 4), np.outer(v, v))
    assert cf.hann_window(5, 3).shape == (3, 5)


# -- kernel -------------------------------------------------------------------------

def test_kernel_self_zero_shift_is_one():
    x = np.random.default_rng(0).random((6, 5, 2))
    k = np.real(cf.ifft2(cf.gaussian_kernel_correlation(x, x, 0.5)))
    assert k[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_kernel_of_zeros_is_one_everywhere():
    z = np.zeros((4, 4, 3))
    k = np.real(cf.ifft2(cf.gaussian_kernel_correlation(z, z, 0.5)))
    np.testing.assert_allclose(k, 1.0)


def test_kernel_matches_brute_force():
    rng = np.random.default_rng(1)
    x, z = rng.random((8, 8, 2)), rng.random((8, 8, 2))
    k = np.real(cf.ifft2(cf.gaussian_kernel_correlation(x, z, 0.5)))
    assert np.max(np.abs(k - brute_kernel(x, z, 0.5))) < 1e-6


def test_linear_kernel_matches_brute_force():
    rng = np.random.default_rng(2)
    x, z = rng.standard_normal((5, 7, 3)), rng.standard_normal((5, 7, 3))
    c = np.real(cf.ifft2(cf.linear_kernel_correlation(x, z)))
    np.testing.assert_allclose(c, brute_linear(x, z), atol=1e-10)


def test_kernel_shape_mismatch():
    with pytest.raises(DimensionError):
        cf.gaussian_kernel_correlation(np.zeros((4, 4)), np.zeros((4, 5)), 0.5)
    with pytest.raises(InvalidParameterError):
        cf.gaussian_kernel_correlation(np.zeros((4, 4)), np.zeros((4, 4)), 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_kernel_values_in_unit_interval(h, w, l, seed):
    rng = np.random.default_rng(seed)
    x, z = rng.standard_normal((h, w, l)), rng.standard_normal((h, w, l))
    k = np.real(cf.ifft2(cf.gaussian_kernel_correlation(x, z, 0.7)))
    assert np.all(k > 0) and np.all(k <= 1 + 1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**31 - 1))
def test_parseval_and_round_trip(h, w, seed):
    v = np.random.default_rng(seed).standard_normal((h, w))
    vf = cf.fft2(v)
    assert np.sum(v**2) == pytest.approx(np.sum(np.abs(vf) ** 2) / (h * w))
    np.testing.assert_allclose(np.real(cf.ifft2(vf)), v, atol=1e-10)


# -- training -----------------------------------------------------------------------

def test_train_zero_kernel_unit_lambda():
    yf = np.random.default_rng(3).standard_normal((4, 4)) + 0j
    np.testing.assert_allclose(cf.train_filter(np.zeros((4, 4)), yf, 1.0), yf)


def test_train_zero_label():
    kf = np.random.default_rng(4).random((4, 4)) + 1
    assert np.all(cf.train_filter(kf, np.zeros((4, 4)), 1e-4) == 0)


def test_train_residual():
    rng = np.random.default_rng(5)
    kf = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    yf = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    w = cf.train_filter(kf, yf, 1e-4)
    assert np.max(np.abs(w * (kf + 1e-4) - yf)) < 1e-10


def test_train_degenerate():
    with pytest.raises(DegenerateTrainingError):
        cf.train_filter(np.zeros((2, 2)), np.ones((2, 2)), 0.0)
    with pytest.raises(DimensionError):
        cf.train_filter(np.zeros((2, 2)), np.ones((2, 3)), 1.0)


def test_ridge_examples():
    np.testing.assert_allclose(cf.ridge_closed_form(np.eye(2), [1, 0], 1.0), [0.5, 0.0])
    np.testing.assert_allclose(cf.ridge_closed_form(np.diag([1.0, 2.0]), [1, 2], 0.0), [1.0, 1.0])


def test_ridge_random_matches_lstsq():
    rng = np.random.default_rng(6)
    X, y = rng.standard_normal((6, 3)), rng.standard_normal(6)
    # augmented least squares is an independent route to the same solution
    A = np.vstack([X, np.sqrt(0.1) * np.eye(3)])
    b = np.concatenate([y, np.zeros(3)])
    expected = np.linalg.lstsq(A, b, rcond=None)[0]
    np.testing.assert_allclose(cf.ridge_closed_form(X, y, 0.1), expected, atol=1e-8)


def test_ridge_singular():
    with pytest.raises(DegenerateTrainingError):
        cf.ridge_closed_form(np.zeros((3, 2)), np.zeros(3), 0.0)


def test_circulant_ridge_equals_dual_solution():
    # rows of X are all cyclic shifts of a 1-channel base sample
    rng = np.random.default_rng(7)
    x = rng.standard_normal((4, 5))
    y = cf.gaussian_label(5, 4, 1.0, (0, 0))
    lam = 0.3
    X = np.array([np.roll(x, (-i, -j), axis=(0, 1)).ravel() for i in range(4) for j in range(5)])
    w = cf.ridge_closed_form(X, y.ravel(), lam)
    alphaf = cf.train_filter(cf.linear_kernel_correlation(x, x), cf.fft2(y), lam)
    # linear kernel: w = sum_i alpha_i x_i
    alpha = np.real(cf.ifft2(alphaf))
    np.testing.assert_allclose(X.T @ alpha.ravel(), w, atol=1e-8)


# -- update and detection ------------------------------------------------------------

def _model(eta=0.02):
    rng = np.random.default_rng(8)
    x = rng.random((6, 6, 2))
    yf = cf.fft2(cf.gaussian_label(6, 6, 1.0, (3, 3)))
    return cf.new_model(x, yf, eta=eta)


def test_update_eta_extremes():
    new = np.full((6, 6), 2.0 + 0j)
    m0 = _model(eta=0.0)
    np.testing.assert_array_equal(cf.update_model(m0, new, t=5).alphaf, m0.alphaf)
    m1 = _model(eta=1.0)
    np.testing.assert_array_equal(cf.update_model(m1, new, t=5).alphaf, new)


def test_update_first_frame_replaces():
    m = _model(eta=0.3)
    new = np.full((6, 6), 2.0 + 0j)
    out = cf.update_model(m, new, t=1)
    np.testing.assert_array_equal(out.alphaf, new)
    assert out.frame_index == 1


def test_update_leaves_input_untouched():
    m = _model()
    before = m.alphaf.copy()
    cf.update_model(m, np.zeros((6, 6), complex))
    np.testing.assert_array_equal(m.alphaf, before)


def test_update_shape_mismatch():
    with pytest.raises(DimensionError):
        cf.update_model(_model(), np.zeros((5, 6), complex))


def test_zero_model_zero_response():
    m = _model()
    m = cf.FilterModel(np.zeros_like(m.alphaf), m.template, 0.5, 1e-4, 0.02)
    assert np.all(cf.detect(m, m.template) == 0)


def test_self_detection_reproduces_label():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((16, 16, 3))
    y = cf.gaussian_label(16, 16, 1.5, (8, 8))
    m = cf.new_model(x, cf.fft2(y), kernel_sigma=0.5, lam=1e-4)
    assert np.max(np.abs(cf.detect(m, x) - y)) < 1e-2


def test_shift_moves_peak():
    rng = np.random.default_rng(10)
    x = rng.standard_normal((16, 16, 3))
    y = cf.gaussian_label(16, 16, 1.5, (8, 8))
    m = cf.new_model(x, cf.fft2(y))
    r0 = cf.detect(m, x)
    r1 = cf.detect(m, np.roll(x, (3, 2), axis=(0, 1)))  # (w, h) = (2, 3)
    h0, w0 = np.unravel_index(np.argmax(r0), r0.shape)
    h1, w1 = np.unravel_index(np.argmax(r1), r1.shape)
    assert ((w1 - w0) % 16, (h1 - h0) % 16) == (2, 3)


def test_subpixel_peak():
    assert cf.subpixel_peak(0.5, 1.0, 0.5) == 0.0
    # parabola through -(t - 0.25)^2
    f = lambda t: -(t - 0.25) ** 2
    assert cf.subpixel_peak(f(-1), f(0), f(1)) == pytest.approx(0.25)
    assert cf.subpixel_peak(1.0, 1.0, 1.0) == 0.0
