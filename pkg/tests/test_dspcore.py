"""Unitary transforms, shifts, convolution and PAPR against direct oracles."""

import numpy as np
import pytest

from helpers import dft_direct, idft_direct
from ofdmradar.dspcore import cyclic_shift, dft_unitary, idft_unitary, linear_convolve, papr_db


def crandn(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def test_dft_impulse_gives_flat_spectrum():
    x = np.array([1, 0, 0, 0], dtype=complex)
    np.testing.assert_allclose(dft_unitary(x), np.full(4, 0.5 + 0j), atol=1e-15)


def test_dft_parseval():
    rng = np.random.default_rng(1)
    for n in (3, 7, 16, 33):
        x = crandn(rng, n)
        assert abs(np.linalg.norm(dft_unitary(x)) - np.linalg.norm(x)) < 1e-12 * np.linalg.norm(x)


def test_dft_matches_direct_sum():
    rng = np.random.default_rng(2)
    x = crandn(rng, 16)
    np.testing.assert_allclose(dft_unitary(x), dft_direct(x), atol=1e-12)


def test_dft_arbitrary_length_matches_direct_sum():
    # prime and non-power-of-two lengths must be supported
    rng = np.random.default_rng(3)
    for n in (151, 302):
        x = crandn(rng, n)
        np.testing.assert_allclose(dft_unitary(x), dft_direct(x), atol=1e-11)


def test_idft_flat_gives_impulse():
    X = np.full(4, 0.5, dtype=complex)
    np.testing.assert_allclose(idft_unitary(X), [1, 0, 0, 0], atol=1e-15)


def test_round_trip_identity():
    rng = np.random.default_rng(4)
    x = crandn(rng, 32)
    np.testing.assert_allclose(idft_unitary(dft_unitary(x)), x, atol=1e-12)
    np.testing.assert_allclose(dft_unitary(idft_unitary(x)), x, atol=1e-12)


def test_idft_matches_direct_sum():
    rng = np.random.default_rng(5)
    X = crandn(rng, 16)
    np.testing.assert_allclose(idft_unitary(X), idft_direct(X), atol=1e-12)


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        dft_unitary(np.array([], dtype=complex))
    with pytest.raises(ValueError):
        idft_unitary(np.array([], dtype=complex))


def test_cyclic_shift_left_basic():
    x = np.array([1, 2, 3, 4], dtype=complex)
    np.testing.assert_array_equal(cyclic_shift(x, 1, "left"), [2, 3, 4, 1])
    np.testing.assert_array_equal(cyclic_shift(x, 1, "right"), [4, 1, 2, 3])


def test_cyclic_shift_by_length_is_identity():
    rng = np.random.default_rng(6)
    x = crandn(rng, 9)
    np.testing.assert_array_equal(cyclic_shift(x, 9, "left"), x)
    np.testing.assert_array_equal(cyclic_shift(x, 18, "right"), x)


def test_left_shift_equals_right_complement():
    rng = np.random.default_rng(7)
    x = crandn(rng, 7)
    for p in range(7):
        np.testing.assert_array_equal(
            cyclic_shift(x, p, "left"), cyclic_shift(x, 7 - p, "right")
        )


def test_left_then_right_is_identity():
    rng = np.random.default_rng(8)
    x = crandn(rng, 11)
    for p in range(13):
        np.testing.assert_array_equal(cyclic_shift(cyclic_shift(x, p, "left"), p, "right"), x)


def test_shift_theorem():
    # DFT of a right shift by s is the unshifted DFT times exp(-2j pi k s / N)
    rng = np.random.default_rng(9)
    n = 12
    x = crandn(rng, n)
    base = dft_unitary(x)
    k = np.arange(n)
    for s in (1, 3, 7):
        shifted = dft_unitary(cyclic_shift(x, s, "right"))
        np.testing.assert_allclose(shifted, base * np.exp(-2j * np.pi * k * s / n), atol=1e-12)


def test_cyclic_shift_bad_direction():
    with pytest.raises(ValueError):
        cyclic_shift(np.ones(3, dtype=complex), 1, "up")


def test_convolve_identity_kernel():
    rng = np.random.default_rng(10)
    x = crandn(rng, 8)
    np.testing.assert_allclose(linear_convolve(x, [1]), x, atol=1e-15)


def test_convolve_small_example():
    np.testing.assert_allclose(linear_convolve([1, 1], [1, 1]), [1, 2, 1], atol=1e-15)


def test_convolve_matches_double_loop():
    rng = np.random.default_rng(11)
    x, h = crandn(rng, 9), crandn(rng, 5)
    out = np.zeros(13, dtype=np.complex128)
    for i in range(9):
        for j in range(5):
            out[i + j] += x[i] * h[j]
    np.testing.assert_allclose(linear_convolve(x, h), out, atol=1e-12)


def test_convolve_commutative_and_bilinear():
    rng = np.random.default_rng(12)
    x, y, h = crandn(rng, 6), crandn(rng, 6), crandn(rng, 4)
    np.testing.assert_allclose(linear_convolve(x, h), linear_convolve(h, x), atol=1e-12)
    np.testing.assert_allclose(
        linear_convolve(2 * x + 3j * y, h),
        2 * linear_convolve(x, h) + 3j * linear_convolve(y, h),
        atol=1e-12,
    )


def test_convolve_empty_rejected():
    with pytest.raises(ValueError):
        linear_convolve(np.array([], dtype=complex), [1])


def test_papr_constant_modulus_is_zero_db():
    # a single occupied subcarrier is constant-modulus at any oversampling
    n = 16
    S = np.zeros(n, dtype=complex)
    S[3] = 1.0
    assert abs(papr_db(S, oversample=4)) < 1e-12


def test_papr_single_time_sample():
    # all energy in one sample of a 33-sample window
    n = 33
    t = np.zeros(n, dtype=complex)
    t[5] = 2.0
    S = dft_unitary(t)
    assert abs(papr_db(S, oversample=1) - 10 * np.log10(33)) < 1e-10


def test_papr_window_restricts_evaluation():
    # peak outside the window must not count
    n = 32
    t = np.zeros(n, dtype=complex)
    t[2] = 10.0  # outside window
    t[10:20] = 1.0
    S = dft_unitary(t)
    assert abs(papr_db(S, oversample=1, window=(10, 19))) < 1e-12


def test_papr_invalid_window():
    S = np.ones(8, dtype=complex)
    with pytest.raises(ValueError):
        papr_db(S, window=(5, 3))
    with pytest.raises(ValueError):
        papr_db(S, window=(0, 8))
    with pytest.raises(ValueError):
        papr_db(np.zeros(8, dtype=complex), window=(0, 7))
