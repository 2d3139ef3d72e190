"""Shared test utilities."""

import numpy as np

from ofdmradar import IcfConfig, SceneConfig, alamouti_design, icf_design, place_pulses
from ofdmradar.dspcore import dft_unitary


def dft_direct(x):
    """O(N^2) evaluation of the defining sum, independent of any FFT."""
    n = len(x)
    out = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        acc = 0.0 + 0.0j
        for i in range(n):
            acc += x[i] * np.exp(-2j * np.pi * i * k / n)
        out[k] = acc / np.sqrt(n)
    return out


def idft_direct(X):
    n = len(X)
    out = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        acc = 0.0 + 0.0j
        for k in range(n):
            acc += X[k] * np.exp(2j * np.pi * i * k / n)
        out[i] = acc / np.sqrt(n)
    return out


def random_valid_bases(rng, count, n, eta_max, num_cells, energy=None):
    """Frequency-domain base pulses whose time support is exactly the
    allowed window; optionally scaled to a per-pulse energy."""
    head = eta_max + num_cells - 1
    nt = n - 2 * head + 1
    bases = []
    for _ in range(count):
        t = np.zeros(n, dtype=np.complex128)
        t[head : head + nt] = rng.standard_normal(nt) + 1j * rng.standard_normal(nt)
        if energy is not None:
            t *= np.sqrt(energy / np.sum(np.abs(t) ** 2))
        bases.append(dft_unitary(t))
    return bases


def alamouti_icf_ws(n, num_cells, eta_max, seed=0, iterations=8):
    """Two jointly designed pulses placed on two transmitters."""
    cfg = IcfConfig(
        num_subcarriers=n,
        num_cells=num_cells,
        eta_max=eta_max,
        num_tx=2,
        num_pulses=2,
        num_iterations=iterations,
        papr_target_db=0.1,
        clip_factor=0.1,
        seed=seed,
    )
    return place_pulses(alamouti_design(), icf_design(cfg).pulses, eta_max, num_cells)


def small_scene(delays, num_cells, eta_max, target_cells, sigma_n2=0.0, sigma_d2=1.0):
    delays = np.asarray(delays)
    return SceneConfig(
        num_tx=delays.shape[1],
        num_rx=delays.shape[0],
        delays=delays,
        num_cells=num_cells,
        eta_max=eta_max,
        carrier_hz=9e9,
        bandwidth_hz=150e6,
        target_cells=tuple(target_cells),
        sigma_d2=sigma_d2,
        sigma_n2=sigma_n2,
    )
