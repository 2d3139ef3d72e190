"""Matched-filter baselines: chirps, polyphase codes, decoupling, ordering."""

import numpy as np
import pytest

from helpers import alamouti_icf_ws, small_scene
from ofdmradar import (
    CodeSet,
    fd_lfm_simulate,
    lfm_pulse,
    load_code_set,
    matched_filter_range,
    p4_code,
    p4_code_set,
    pcode_simulate,
    reconstruct_all,
    sample_rcs,
    synthesize_all_received,
)
from ofdmradar.baselines import save_code_set
from ofdmradar.scene import RcsRealization


def autocorr(x):
    return np.correlate(x, x, mode="full")


def test_lfm_constant_modulus_and_energy():
    s = lfm_pulse(40)
    np.testing.assert_allclose(np.abs(s), 1 / np.sqrt(40), atol=1e-15)
    assert np.sum(np.abs(s) ** 2) == pytest.approx(1.0)


def test_lfm_autocorrelation_peak_is_energy():
    s = lfm_pulse(33)
    r = autocorr(s)
    assert abs(r[32] - 1.0) < 1e-12
    assert np.argmax(np.abs(r)) == 32


def test_lfm_peak_to_sidelobe_ratio():
    # length-40 chirp on the continuous delay axis (oversampled evaluation;
    # integer lags alone sample the sinc sidelobes near their nulls):
    # peak-to-max-sidelobe about 13.2 dB
    n, over = 40, 16
    t = np.arange(n * over) / over
    s = np.exp(1j * np.pi * t * t / n)
    r = np.abs(autocorr(s))
    peak_idx = n * over - 1
    mask = np.ones_like(r, dtype=bool)
    mask[peak_idx - over : peak_idx + over + 1] = False  # mainlobe, +-1 sample
    psl_db = 20 * np.log10(r[peak_idx] / r[mask].max())
    assert abs(psl_db - 13.2) < 1.0


def test_lfm_rejects_short():
    with pytest.raises(ValueError):
        lfm_pulse(1)


def test_p4_code_unit_modulus():
    c = p4_code(40)
    np.testing.assert_allclose(np.abs(c), 1.0, atol=1e-15)
    cs = p4_code_set(2, 40)
    assert cs.num_tx == 2 and cs.code_len == 40
    assert not np.allclose(cs.chips[0], cs.chips[1])


def test_code_set_validation():
    with pytest.raises(ValueError, match="unit modulus"):
        CodeSet(np.array([[1.0, 2.0]], dtype=complex))


def test_code_set_csv_round_trip(tmp_path):
    cs = p4_code_set(2, 40)
    path = tmp_path / "codes.csv"
    save_code_set(cs, path)
    back = load_code_set(path)
    assert back.num_tx == 2 and back.code_len == 40
    np.testing.assert_allclose(back.chips, cs.chips, atol=1e-12)


def test_code_set_csv_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="no code rows"):
        load_code_set(empty)
    bad = tmp_path / "bad.csv"
    bad.write_text("0.0,0.1\n0.0,oops\n")
    with pytest.raises(ValueError, match="bad.csv:2"):
        load_code_set(bad)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("0.0,0.1\n0.0\n")
    with pytest.raises(ValueError, match="ragged.csv:2"):
        load_code_set(ragged)


def test_matched_filter_lag_convention():
    # estimate at cell m picks the cross-correlation at lag delay + m
    rng = np.random.default_rng(0)
    ref = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    frame = np.zeros(20, dtype=complex)
    lag = 7
    frame[lag : lag + 5] = 2.0 * ref
    est = matched_filter_range(frame[None, None, :], ref[None, :], [[3]], num_cells=6)
    np.testing.assert_allclose(est[0, 0, lag - 3], 2.0, atol=1e-12)
    # explicit cross-correlation oracle at every cell
    for m in range(6):
        s = 3 + m
        direct = sum(frame[s + j] * np.conj(ref[j]) for j in range(5))
        np.testing.assert_allclose(est[0, 0, m], direct / np.sum(np.abs(ref) ** 2), atol=1e-12)


def test_matched_filter_ideal_reference_exact():
    # a one-sample reference has a perfect autocorrelation: exact recovery
    scene = small_scene([[2]], 6, 3, (1, 4))
    rcs = sample_rcs(scene, 1)
    from ofdmradar.scene import delay_superpose

    ref = np.array([[0.7 - 0.2j]])
    clean = delay_superpose(ref, rcs.d, scene.delays, scene.eta_max)
    est = matched_filter_range(clean[:, None, :], ref, scene.delays, 6)
    np.testing.assert_allclose(est[0, 0], rcs.d[0, 0], atol=1e-12)


def test_matched_filter_dimension_mismatch():
    with pytest.raises(ValueError, match="delays"):
        matched_filter_range(np.zeros((1, 1, 20), dtype=complex), np.ones((2, 4)), [[0]], 4)


def test_pcode_cross_talk_pollutes_other_cells():
    # two transmitters sharing the band: non-target cells get residue
    scene = small_scene([[2, 0], [1, 3]], 16, 3, (5,))
    rcs = sample_rcs(scene, 2)
    est = pcode_simulate(scene, rcs, p4_code_set(2, 12), num_pulses=2)
    err = np.abs(est - rcs.g)
    off_target = [m for m in range(16) if m != 5]
    assert err[:, :, off_target].max() > 1e-3


def test_fd_lfm_decoupling_bit_identical():
    scene = small_scene([[2, 0], [1, 3]], 12, 3, (2, 7))
    rcs = sample_rcs(scene, 3)
    zeroed = RcsRealization(
        g=np.concatenate([rcs.g[:, :1], np.zeros_like(rcs.g[:, 1:])], axis=1),
        d=np.concatenate([rcs.d[:, :1], np.zeros_like(rcs.d[:, 1:])], axis=1),
        tau_sum=rcs.tau_sum,
        seed=rcs.seed,
    )
    scene_noisy = small_scene([[2, 0], [1, 3]], 12, 3, (2, 7), sigma_n2=0.3)
    a = fd_lfm_simulate(scene_noisy, rcs, 8, 2, noise_seed=5)
    b = fd_lfm_simulate(scene_noisy, zeroed, 8, 2, noise_seed=5)
    np.testing.assert_array_equal(a[:, 0, :], b[:, 0, :])


def test_fd_lfm_error_bounded_by_sidelobes():
    # noiseless single target: leakage at other cells stays below the
    # chirp's maximum autocorrelation sidelobe
    scene = small_scene([[0]], 10, 0, (4,))
    rcs = sample_rcs(scene, 4)
    length = 16
    est = fd_lfm_simulate(scene, rcs, length, 1)
    s = lfm_pulse(length)
    r = np.abs(autocorr(s))
    sidelobe_ratio = np.delete(r, length - 1).max() / r[length - 1]
    err = np.abs(est[0, 0] - rcs.g[0, 0])
    assert err[4] <= sidelobe_ratio * np.abs(rcs.g[0, 0, 4]) + 1e-12
    off = [m for m in range(10) if m != 4]
    assert err[off].max() <= sidelobe_ratio * np.abs(rcs.g[0, 0, 4]) + 1e-12


def test_ofdm_beats_fd_lfm_noiseless():
    ws = alamouti_icf_ws(64, 8, 4, seed=3)
    scene = small_scene([[3, 0], [1, 4]], 8, 4, (1, 2, 6))
    rcs = sample_rcs(scene, 6)
    frames = synthesize_all_received(ws, rcs, scene, 0)
    g_ofdm = reconstruct_all(frames, ws, scene, rcs.tau_sum).g_hat
    g_fd = fd_lfm_simulate(scene, rcs, ws.nonzero_len, 2)
    mse_ofdm = np.mean(np.abs(g_ofdm - rcs.g) ** 2)
    mse_fd = np.mean(np.abs(g_fd - rcs.g) ** 2)
    assert mse_ofdm < 1e-20
    assert mse_fd > 1e-8
