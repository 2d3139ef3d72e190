"""Closed-form synthesis of pulse sets with exactly flat total spectral power.

The P pulses are generated from a P x P paraunitary polynomial matrix
S(z) = scale * prod_l (I - v_l v_l^H + z^-1 v_l v_l^H) * V, whose rows are
the polyphase components of the pulses.  Paraunitariness of S(z) makes the
total spectral power sum_p |S_k^(p)|^2 constant over subcarriers, i.e. the
post-reconstruction SNR degradation is exactly 0 dB for any choice of the
unitary matrix V and the unit vectors v_l.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .dspcore import dft_unitary

__all__ = [
    "ParaunitaryFactors",
    "PolyphaseMatrix",
    "random_factors",
    "synthesize_polyphase",
    "polyphase_to_pulses",
    "paraunitary_deviation",
    "save_factors",
    "load_factors",
]

_MAGIC = b"OFDMRPF\x01"


@dataclass(frozen=True)
class ParaunitaryFactors:
    """Free parameters of the factorization: one unitary matrix plus
    ``(nonzero_len - P) // P`` unit vectors.

    ``scale`` normalizes the synthesized set so the total spectral power is
    1 / (num_subcarriers * num_tx) on every subcarrier and each pulse
    carries energy 1 / (num_tx * P).
    """

    base_matrix: np.ndarray
    vectors: np.ndarray
    num_subcarriers: int
    num_tx: int

    def __post_init__(self):
        v = np.asarray(self.base_matrix, dtype=np.complex128)
        vecs = np.asarray(self.vectors, dtype=np.complex128)
        p = v.shape[0]
        if v.shape != (p, p):
            raise ValueError("base_matrix must be square")
        if vecs.ndim != 2 or vecs.shape[1] != p:
            raise ValueError("vectors must have shape (num_factors, P)")
        if np.abs(v @ v.conj().T - np.eye(p)).max() > 1e-10:
            raise ValueError("base_matrix is not unitary")
        if vecs.shape[0] and np.abs(np.linalg.norm(vecs, axis=1) - 1.0).max() > 1e-10:
            raise ValueError("factor vectors must have unit norm")
        object.__setattr__(self, "base_matrix", v)
        object.__setattr__(self, "vectors", vecs)

    @property
    def order(self) -> int:
        return self.base_matrix.shape[0]

    @property
    def num_factors(self) -> int:
        return self.vectors.shape[0]

    @property
    def scale(self) -> float:
        return 1.0 / np.sqrt(self.num_subcarriers * self.num_tx * self.order)


@dataclass(frozen=True)
class PolyphaseMatrix:
    """Polynomial matrix S(z) = sum_d coeffs[d] z^-d with coeffs[d] P x P.

    Entry (p, q) of S(z) is the qth polyphase component of pulse p.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ValueError("coeffs must have shape (degree + 1, P, P)")
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def evaluate(self, z: complex) -> np.ndarray:
        zpow = np.asarray(z, dtype=np.complex128) ** -np.arange(self.coeffs.shape[0])
        return np.tensordot(zpow, self.coeffs, axes=1)


def random_factors(
    num_pulses: int, nonzero_len: int, num_subcarriers: int, num_tx: int, seed: int = 0
) -> ParaunitaryFactors:
    """Seeded random factors: V from QR-orthonormalized complex Gaussians
    (Haar-like), each v_l a normalized complex Gaussian vector."""
    if num_pulses < 1:
        raise ValueError("num_pulses must be >= 1")
    if nonzero_len < num_pulses:
        raise ValueError(f"nonzero_len={nonzero_len} must be >= num_pulses={num_pulses}")
    rng = np.random.default_rng(seed)
    p = num_pulses
    a = (rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))) / np.sqrt(2)
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    v = q * (d / np.abs(d))  # phase fix for a Haar-uniform column distribution
    nf = (nonzero_len - p) // p
    vecs = (rng.standard_normal((nf, p)) + 1j * rng.standard_normal((nf, p))) / np.sqrt(2)
    if nf:
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return ParaunitaryFactors(v, vecs, num_subcarriers, num_tx)


def synthesize_polyphase(factors: ParaunitaryFactors) -> PolyphaseMatrix:
    """Expand the factorization into explicit polynomial coefficients.

    The degree in z^-1 equals the number of factor vectors; an empty
    product gives the constant matrix scale * V.
    """
    p = factors.order
    coeffs = np.zeros((1, p, p), dtype=np.complex128)
    coeffs[0] = np.eye(p)
    for vl in factors.vectors:
        proj = np.outer(vl, vl.conj())
        keep = np.eye(p) - proj
        nxt = np.zeros((coeffs.shape[0] + 1, p, p), dtype=np.complex128)
        nxt[:-1] += coeffs @ keep
        nxt[1:] += coeffs @ proj
        coeffs = nxt
    coeffs = (coeffs @ factors.base_matrix) * factors.scale
    return PolyphaseMatrix(coeffs)


def paraunitary_deviation(pm: PolyphaseMatrix, gram: float, num_points: int = 64) -> float:
    """Max deviation of S(z) S(z)^H from gram * I over sampled unit-circle z."""
    worst = 0.0
    eye = np.eye(pm.order)
    for w in np.exp(2j * np.pi * np.arange(num_points) / num_points):
        s = pm.evaluate(w)
        worst = max(worst, float(np.abs(s @ s.conj().T - gram * eye).max()))
    return worst


def polyphase_to_pulses(pm: PolyphaseMatrix, num_subcarriers: int, support_start: int) -> np.ndarray:
    """Assemble the P frequency-domain pulses from a polyphase matrix.

    Coefficient (d, p, q) lands at time index support_start + P*d + q of
    pulse p (scaled by sqrt(N)); everything else is zero, so the zero head
    and tail conditions hold exactly.  The support must fit inside
    [support_start, N - support_start].

    Returns an array of shape (P, num_subcarriers) of subcarrier weights.
    """
    p = pm.order
    n = num_subcarriers
    last = support_start + p * (pm.degree + 1) - 1
    if support_start < 0:
        raise ValueError("support_start must be >= 0")
    if last > n - support_start:
        raise ValueError(
            f"time support [{support_start}, {last}] exceeds the allowed "
            f"window [{support_start}, {n - support_start}] for N={n}"
        )
    time = np.zeros((p, n), dtype=np.complex128)
    for d in range(pm.degree + 1):
        for q in range(p):
            time[:, support_start + p * d + q] = np.sqrt(n) * pm.coeffs[d, :, q]
    return np.vstack([dft_unitary(row) for row in time])


def save_factors(factors: ParaunitaryFactors, path) -> None:
    """Binary container for the factor parameters (bit-exact round trip)."""
    header = struct.pack(
        "<4I", factors.order, factors.num_factors, factors.num_subcarriers, factors.num_tx
    )
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(header)
        f.write(np.ascontiguousarray(factors.base_matrix).tobytes())
        f.write(np.ascontiguousarray(factors.vectors).tobytes())


def load_factors(path) -> ParaunitaryFactors:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < len(_MAGIC) + 16 or data[: len(_MAGIC)] != _MAGIC:
        raise ValueError(f"{path}: not a paraunitary-factors container")
    p, nf, n, num_tx = struct.unpack_from("<4I", data, len(_MAGIC))
    off = len(_MAGIC) + 16
    expected = (p * p + nf * p) * 16
    if len(data) - off != expected:
        raise ValueError(f"{path}: payload size {len(data) - off} != expected {expected}")
    v = np.frombuffer(data, dtype=np.complex128, count=p * p, offset=off).reshape(p, p)
    vecs = np.frombuffer(data, dtype=np.complex128, count=nf * p, offset=off + p * p * 16)
    return ParaunitaryFactors(v.copy(), vecs.reshape(nf, p).copy(), n, num_tx)
