"""Complex orthogonal designs (CODs) and pulse placement across transmitters.

A COD is a T x P matrix over {0, +-x_i, +-conj(x_i)} with
X X^H = (sum_i |x_i|^2) I for every complex assignment of the variables.
Using one as the per-subcarrier weighting pattern makes the T x P weight
matrix flat-unitary on every subcarrier, no matter what the base pulses
are, which is what keeps transmitters separable under arbitrary integer
delays.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np

from .dspcore import idft_unitary
from .waveform import WaveformSet

__all__ = [
    "OrthogonalDesign",
    "alamouti_design",
    "cod4_design",
    "cod_design",
    "cod_rate",
    "verify_cod",
    "place_pulses",
    "verify_flat_unitary",
]

# Tolerance for the zero head/tail check on base pulses: iterative designs
# are exactly zero there after their final time filter, closed-form ones by
# construction, so anything above this indicates a broken input.
ZERO_COND_TOL = 1e-10


@dataclass(frozen=True)
class OrthogonalDesign:
    """T x P grid of entries drawn from {0, +-x_i, +-conj(x_i)}.

    ``var_index[t, p]`` is the 1-based variable index (0 marks a structural
    zero slot); ``sign`` and ``conjugate`` decorate the entry.  Every row
    must use every variable exactly once.
    """

    var_index: np.ndarray
    sign: np.ndarray
    conjugate: np.ndarray
    num_vars: int

    def __post_init__(self):
        vi = np.asarray(self.var_index, dtype=int)
        sg = np.asarray(self.sign, dtype=int)
        cj = np.asarray(self.conjugate, dtype=bool)
        if vi.ndim != 2 or vi.shape != sg.shape or vi.shape != cj.shape:
            raise ValueError("var_index, sign and conjugate must share a 2-D shape")
        if not np.all(np.isin(sg, (-1, 1))):
            raise ValueError("sign entries must be +1 or -1")
        if vi.min() < 0 or vi.max() > self.num_vars:
            raise ValueError("var_index entries must lie in [0, num_vars]")
        for row in vi:
            used = sorted(row[row > 0].tolist())
            if used != list(range(1, self.num_vars + 1)):
                raise ValueError("every row must contain each variable index exactly once")
        object.__setattr__(self, "var_index", vi)
        object.__setattr__(self, "sign", sg)
        object.__setattr__(self, "conjugate", cj)

    @property
    def num_tx(self) -> int:
        return self.var_index.shape[0]

    @property
    def num_slots(self) -> int:
        return self.var_index.shape[1]

    def evaluate(self, values) -> np.ndarray:
        """Substitute complex values for the variables, returning the T x P matrix."""
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != (self.num_vars,):
            raise ValueError(f"expected {self.num_vars} variable values")
        lut = np.concatenate([[0.0 + 0.0j], values])
        picked = lut[self.var_index]
        picked = np.where(self.conjugate, np.conj(picked), picked)
        return self.sign * picked


def alamouti_design() -> OrthogonalDesign:
    """The 2x2 Alamouti design [[x1, x2], [-conj(x2), conj(x1)]]."""
    return OrthogonalDesign(
        var_index=[[1, 2], [2, 1]],
        sign=[[1, 1], [-1, 1]],
        conjugate=[[False, False], [True, True]],
        num_vars=2,
    )


def cod4_design() -> OrthogonalDesign:
    """The rate-3/4 design for four transmitters (3 variables, 4 slots)."""
    return OrthogonalDesign(
        var_index=[[1, 2, 3, 0], [2, 1, 0, 3], [3, 0, 1, 2], [0, 3, 2, 1]],
        sign=[[1, 1, 1, 1], [-1, 1, 1, 1], [-1, 1, 1, -1], [1, -1, 1, 1]],
        conjugate=[
            [False, False, False, False],
            [True, True, False, False],
            [True, False, True, False],
            [False, True, True, False],
        ],
        num_vars=3,
    )


def cod_design(num_tx: int, num_pulses: int | None = None) -> OrthogonalDesign:
    """Shipped design for the given transmitter count.

    num_tx=1 is the trivial 1 x P row of distinct variables (``num_pulses``
    selects P, default 1); num_tx=2 is Alamouti; num_tx=3 is the 4x4 design
    with its last row deleted (still a COD by the defining identity);
    num_tx=4 is the 4x4 rate-3/4 design.
    """
    if num_tx == 1:
        p = 1 if num_pulses is None else int(num_pulses)
        if p < 1:
            raise ValueError("num_pulses must be >= 1")
        return OrthogonalDesign(
            var_index=[list(range(1, p + 1))],
            sign=[[1] * p],
            conjugate=[[False] * p],
            num_vars=p,
        )
    if num_pulses is not None:
        raise ValueError("num_pulses is only free for num_tx=1")
    if num_tx == 2:
        return alamouti_design()
    full = cod4_design()
    if num_tx == 3:
        return OrthogonalDesign(
            var_index=full.var_index[:3],
            sign=full.sign[:3],
            conjugate=full.conjugate[:3],
            num_vars=3,
        )
    if num_tx == 4:
        return full
    raise ValueError(f"no shipped design for num_tx={num_tx} (supported: 1..4)")


def cod_rate(num_tx: int) -> Fraction:
    """Best achievable ratio P0/P of variables to slots, as an exact rational."""
    if num_tx < 1:
        raise ValueError("num_tx must be >= 1")
    if num_tx == 1:
        return Fraction(1)
    half = ceil(num_tx / 2)
    return Fraction(half + 1, 2 * half)


def verify_cod(design: OrthogonalDesign, trials: int = 1000, seed: int = 0) -> float:
    """Max Frobenius deviation of X X^H from (sum |x_i|^2) I over random trials."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    eye = np.eye(design.num_tx)
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(design.num_vars) + 1j * rng.standard_normal(design.num_vars)
        m = design.evaluate(x)
        gram = m @ m.conj().T
        dev = np.linalg.norm(gram - np.sum(np.abs(x) ** 2) * eye)
        worst = max(worst, float(dev))
    return worst


def _check_base_pulse(index: int, time_seq: np.ndarray, head: int, tail: int) -> None:
    n = time_seq.size
    if head > 0 and np.abs(time_seq[:head]).max() > ZERO_COND_TOL:
        raise ValueError(
            f"base pulse {index}: time samples [0, {head - 1}] must be zero "
            f"(max |s| = {np.abs(time_seq[:head]).max():.3e})"
        )
    if tail > 0 and np.abs(time_seq[n - tail :]).max() > ZERO_COND_TOL:
        raise ValueError(
            f"base pulse {index}: time samples [{n - tail}, {n - 1}] must be zero, "
            "otherwise the time-reversed placement for the other transmitters "
            f"would break the zero tail (max |s| = {np.abs(time_seq[n - tail:]).max():.3e})"
        )


def place_pulses(design: OrthogonalDesign, base_pulses, eta_max: int, num_cells: int) -> WaveformSet:
    """Place base pulses onto all transmitters according to a design.

    ``base_pulses`` are the frequency-domain weight vectors of the first
    transmitter's non-zero pulses (one per design variable, common length N).
    Zero slots become all-zero pulses; conjugated slots become elementwise
    frequency-domain conjugates, whose time sequence is the conjugated,
    time-reversed base sequence.  Both zero conditions are checked on every
    base pulse before placement.
    """
    bases = [np.asarray(b, dtype=np.complex128) for b in base_pulses]
    if len(bases) != design.num_vars:
        raise ValueError(f"expected {design.num_vars} base pulses, got {len(bases)}")
    n = bases[0].size
    if any(b.shape != (n,) for b in bases):
        raise ValueError("base pulses must be 1-D and share a common length")
    head = eta_max + num_cells - 1
    tail = head - 1
    for i, b in enumerate(bases):
        _check_base_pulse(i, idft_unitary(b), head, tail)

    freq = np.zeros((design.num_tx, design.num_slots, n), dtype=np.complex128)
    for t in range(design.num_tx):
        for p in range(design.num_slots):
            i = design.var_index[t, p]
            if i == 0:
                continue
            w = bases[i - 1]
            if design.conjugate[t, p]:
                w = np.conj(w)
            freq[t, p] = design.sign[t, p] * w
    return WaveformSet(freq, eta_max, num_cells, design.num_vars)


def verify_flat_unitary(ws: WaveformSet) -> float:
    """Largest per-subcarrier deviation of S_k S_k^H from c_k I.

    c_k is the mean squared row norm at subcarrier k; the deviation is the
    max absolute entry of the difference over all k.  A set placed by a
    valid design returns ~0 regardless of the base pulses.
    """
    w = ws.freq_weights
    gram = np.einsum("apk,bpk->abk", w, np.conj(w))
    c = np.mean(np.real(np.einsum("aak->ak", gram)), axis=0)
    eye = np.eye(ws.num_tx)[:, :, None]
    return float(np.abs(gram - eye * c[None, None, :]).max())
