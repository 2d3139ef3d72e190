"""Waveform-set container: subcarrier weights for every transmitter and pulse.

A waveform set fixes the pulse burst of one coherent processing interval.
The guard structure is carried by zero-valued head and tail segments of the
time sequences, which is what makes the channel circular after trimming at
the receiver.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .dspcore import idft_unitary

__all__ = [
    "WaveformSet",
    "WaveformCheck",
    "verify_waveform_set",
    "save_waveform_set",
    "load_waveform_set",
    "write_waveform_csv",
]

_MAGIC = b"OFDMRWS\x01"


@dataclass
class WaveformSet:
    """Frequency-domain weights, shape (num_tx, num_pulses, num_subcarriers).

    ``eta_max`` is the provisioned maximum relative delay in samples and
    ``num_cells`` the number of range cells; together they fix the zero
    head length eta_max + num_cells - 1 and zero tail length one less.
    ``num_base_pulses`` counts the non-zero pulse slots per transmitter.
    Instances are treated as immutable after construction.
    """

    freq_weights: np.ndarray
    eta_max: int
    num_cells: int
    num_base_pulses: int
    time_seqs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.asarray(self.freq_weights, dtype=np.complex128)
        if w.ndim != 3:
            raise ValueError("freq_weights must have shape (num_tx, num_pulses, num_subcarriers)")
        self.freq_weights = w
        if self.eta_max < 0 or self.num_cells < 1:
            raise ValueError("eta_max must be >= 0 and num_cells >= 1")
        if not 1 <= self.num_base_pulses <= self.num_pulses:
            raise ValueError("num_base_pulses must be in [1, num_pulses]")
        if self.nonzero_len < 1:
            raise ValueError(
                f"num_subcarriers={self.num_subcarriers} leaves no room for the "
                f"zero head/tail of eta_max={self.eta_max}, num_cells={self.num_cells}"
            )
        self.time_seqs = np.fft.ifft(w, axis=2) * np.sqrt(self.num_subcarriers)

    @property
    def num_tx(self) -> int:
        return self.freq_weights.shape[0]

    @property
    def num_pulses(self) -> int:
        return self.freq_weights.shape[1]

    @property
    def num_subcarriers(self) -> int:
        return self.freq_weights.shape[2]

    @property
    def zero_head_len(self) -> int:
        return self.eta_max + self.num_cells - 1

    @property
    def zero_tail_len(self) -> int:
        return self.eta_max + self.num_cells - 2

    @property
    def nonzero_len(self) -> int:
        """Length of the allowed non-zero time support."""
        return self.num_subcarriers - 2 * self.eta_max - 2 * self.num_cells + 3

    @property
    def support(self) -> tuple[int, int]:
        """Inclusive index range of the allowed non-zero time support."""
        return (self.zero_head_len, self.num_subcarriers - self.zero_head_len)


@dataclass(frozen=True)
class WaveformCheck:
    """Deviations from the waveform-set contract (all should be ~0)."""

    zero_violation: float
    energy_error: float
    flat_unitary_deviation: float


def verify_waveform_set(ws: WaveformSet) -> WaveformCheck:
    """Measure how far a set is from its three defining properties.

    zero_violation: largest |time sample| inside the zero head/tail.
    energy_error: largest deviation of a non-zero pulse's energy from
    1 / (num_tx * num_base_pulses).
    flat_unitary_deviation: see :func:`ofdmradar.cod.verify_flat_unitary`.
    """
    from .cod import verify_flat_unitary

    t = ws.time_seqs
    n = ws.num_subcarriers
    head = np.abs(t[:, :, : ws.zero_head_len])
    zv = float(head.max()) if head.size else 0.0
    if ws.zero_tail_len > 0:
        zv = max(zv, float(np.abs(t[:, :, n - ws.zero_tail_len :]).max()))

    energies = np.sum(np.abs(ws.freq_weights) ** 2, axis=2)
    target = 1.0 / (ws.num_tx * ws.num_base_pulses)
    nonzero = energies > 0
    ee = float(np.abs(energies[nonzero] - target).max()) if nonzero.any() else 0.0

    return WaveformCheck(zv, ee, verify_flat_unitary(ws))


def save_waveform_set(ws: WaveformSet, path) -> None:
    """Write the compact binary container (bit-exact round trip)."""
    header = struct.pack(
        "<6I",
        ws.num_subcarriers,
        ws.num_tx,
        ws.num_pulses,
        ws.num_base_pulses,
        ws.eta_max,
        ws.num_cells,
    )
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(header)
        f.write(np.ascontiguousarray(ws.freq_weights).tobytes())


def load_waveform_set(path) -> WaveformSet:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < len(_MAGIC) + 24 or data[: len(_MAGIC)] != _MAGIC:
        raise ValueError(f"{path}: not a waveform-set container")
    n, num_tx, num_pulses, num_base, eta_max, num_cells = struct.unpack_from(
        "<6I", data, len(_MAGIC)
    )
    payload = data[len(_MAGIC) + 24 :]
    expected = num_tx * num_pulses * n * 16
    if len(payload) != expected:
        raise ValueError(f"{path}: payload size {len(payload)} != expected {expected}")
    w = np.frombuffer(payload, dtype=np.complex128).reshape(num_tx, num_pulses, n)
    return WaveformSet(w.copy(), eta_max, num_cells, num_base)


def write_waveform_csv(ws: WaveformSet, path) -> None:
    """Columnar CSV: k, alpha (1-based), p, re, im."""
    with open(path, "w") as f:
        f.write("k,alpha,p,re,im\n")
        for k in range(ws.num_subcarriers):
            for a in range(ws.num_tx):
                for p in range(ws.num_pulses):
                    v = ws.freq_weights[a, p, k]
                    f.write(f"{k},{a + 1},{p},{float(v.real)!r},{float(v.imag)!r}\n")
