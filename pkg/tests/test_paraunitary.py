"""Paraunitary synthesis: factor validity, polynomial expansion, flat power."""

import numpy as np
import pytest

from ofdmradar import (
    ParaunitaryFactors,
    PolyphaseMatrix,
    load_factors,
    paraunitary_deviation,
    polyphase_to_pulses,
    random_factors,
    save_factors,
    snr_degradation_db,
    synthesize_polyphase,
)


def test_random_factors_unitary_and_unit_vectors():
    for seed in range(5):
        f = random_factors(4, 33, 302, 2, seed=seed)
        p = f.order
        assert np.abs(f.base_matrix @ f.base_matrix.conj().T - np.eye(p)).max() < 1e-12
        assert np.abs(np.linalg.norm(f.vectors, axis=1) - 1).max() < 1e-12


def test_random_factors_deterministic():
    a = random_factors(3, 20, 64, 2, seed=7)
    b = random_factors(3, 20, 64, 2, seed=7)
    np.testing.assert_array_equal(a.base_matrix, b.base_matrix)
    np.testing.assert_array_equal(a.vectors, b.vectors)


def test_factor_count_formula():
    # floor((nonzero_len - P) / P) factors
    assert random_factors(1, 1, 16, 1, seed=0).num_factors == 0
    assert random_factors(1, 5, 16, 1, seed=0).num_factors == 4
    assert random_factors(2, 33, 302, 2, seed=0).num_factors == 15
    assert random_factors(4, 33, 302, 2, seed=0).num_factors == 7


def test_random_factors_single_pulse_is_phase():
    f = random_factors(1, 1, 16, 1, seed=3)
    assert f.base_matrix.shape == (1, 1)
    assert abs(abs(f.base_matrix[0, 0]) - 1) < 1e-12


def test_random_factors_rejects_short_support():
    with pytest.raises(ValueError):
        random_factors(4, 3, 64, 2, seed=0)


def test_synthesize_empty_product_is_scaled_base():
    f = random_factors(3, 3, 64, 2, seed=1)  # no factor vectors
    pm = synthesize_polyphase(f)
    assert pm.degree == 0
    np.testing.assert_allclose(pm.coeffs[0], f.scale * f.base_matrix, atol=1e-15)


def test_synthesize_single_factor_hand_expanded():
    # v = (1, 0): (I - vv^H) + z^-1 vv^H = diag(z^-1, 1)
    f = ParaunitaryFactors(
        base_matrix=np.eye(2), vectors=np.array([[1.0, 0.0]]), num_subcarriers=16, num_tx=1
    )
    pm = synthesize_polyphase(f)
    s = f.scale
    np.testing.assert_allclose(pm.coeffs[0], [[0, 0], [0, s]], atol=1e-15)
    np.testing.assert_allclose(pm.coeffs[1], [[s, 0], [0, 0]], atol=1e-15)


def test_paraunitary_identity_on_unit_circle():
    for p, seed in ((2, 0), (4, 1)):
        f = random_factors(p, 33, 302, 2, seed=seed)
        pm = synthesize_polyphase(f)
        gram = 1.0 / (302 * 2 * p)
        assert paraunitary_deviation(pm, gram, num_points=64) < 1e-12


def test_pulses_flat_total_power_and_energy():
    n, num_tx = 302, 2
    head = 40 + 96 - 1
    for p, seed in ((2, 2), (4, 3)):
        f = random_factors(p, 33, n, num_tx, seed=seed)
        pulses = polyphase_to_pulses(synthesize_polyphase(f), n, head)
        total = np.sum(np.abs(pulses) ** 2, axis=0)
        assert np.abs(total - 1.0 / (n * num_tx)).max() < 1e-12
        energies = np.sum(np.abs(pulses) ** 2, axis=1)
        np.testing.assert_allclose(energies, 1.0 / (num_tx * p), atol=1e-12)
        assert snr_degradation_db(pulses, num_tx) >= -1e-10


def test_constant_polyphase_gives_impulses():
    p, n, head = 3, 48, 10
    f = ParaunitaryFactors(
        base_matrix=np.eye(p), vectors=np.zeros((0, p)), num_subcarriers=n, num_tx=1
    )
    pulses = polyphase_to_pulses(synthesize_polyphase(f), n, head)
    time = np.fft.ifft(pulses, axis=1) * np.sqrt(n)
    for q in range(p):
        expected = np.zeros(n, dtype=complex)
        expected[head + q] = np.sqrt(n) * f.scale
        np.testing.assert_allclose(time[q], expected, atol=1e-12)


def test_pulse_support_inside_window():
    f = random_factors(2, 45, 64, 2, seed=4)  # 21 factors, support 2*22 = 44 <= 45
    pulses = polyphase_to_pulses(synthesize_polyphase(f), 64, 10)
    time = np.fft.ifft(pulses, axis=1) * np.sqrt(64)
    outside = np.concatenate([time[:, :10], time[:, 55:]], axis=1)
    assert np.abs(outside).max() < 1e-12
    # degree-support accounting: support length <= P * (num_factors + 1) <= nonzero_len
    assert 2 * (f.num_factors + 1) <= 45


def test_support_overflow_rejected():
    f = random_factors(2, 45, 64, 2, seed=5)
    pm = synthesize_polyphase(f)
    with pytest.raises(ValueError, match="exceeds the allowed"):
        polyphase_to_pulses(pm, 64, 12)  # window [12, 52] too small for 44 taps


def test_polyphase_roundtrip_against_definition():
    # pulse spectra sampled on the N roots of unity match the polynomial
    n, head = 60, 9
    f = random_factors(2, n - 2 * head + 1, n, 3, seed=6)
    pm = synthesize_polyphase(f)
    pulses = polyphase_to_pulses(pm, n, head)
    p = pm.order
    for k in (0, 7, 31):
        w = np.exp(2j * np.pi * k / n)
        s_poly = pm.evaluate(w**p)  # polyphase components at z^P
        for row in range(p):
            direct = w ** (-head) * sum(w ** (-q) * s_poly[row, q] for q in range(p))
            assert abs(pulses[row, k] - direct) < 1e-12


def test_factor_validation():
    with pytest.raises(ValueError, match="unitary"):
        ParaunitaryFactors(np.ones((2, 2)), np.zeros((0, 2)), 16, 1)
    with pytest.raises(ValueError, match="unit norm"):
        ParaunitaryFactors(np.eye(2), np.array([[2.0, 0.0]]), 16, 1)


def test_polyphase_matrix_validation():
    with pytest.raises(ValueError):
        PolyphaseMatrix(np.zeros((2, 3, 2)))


def test_factors_container_round_trip(tmp_path):
    f = random_factors(3, 20, 64, 2, seed=8)
    path = tmp_path / "factors.bin"
    save_factors(f, path)
    back = load_factors(path)
    assert back.base_matrix.tobytes() == f.base_matrix.tobytes()
    assert back.vectors.tobytes() == f.vectors.tobytes()
    assert (back.num_subcarriers, back.num_tx) == (64, 2)
