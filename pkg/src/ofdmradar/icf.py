"""Joint pulse design by iterative clipping and filtering.

The loop trades time-domain peak power against flatness of the total
spectral power: each iteration oversamples the pulses, forces the zero
head/tail, clips time-domain peaks toward a target PAPR, drops the
out-of-band leakage, and clips the per-subcarrier total power toward its
mean.  A final time-domain filter and per-pulse normalization make the
zero conditions and the energy budget exact.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dspcore import papr_db

__all__ = [
    "IcfConfig",
    "DesignResult",
    "MonteCarloResult",
    "snr_degradation_db",
    "time_clip",
    "icf_design",
    "monte_carlo_cdf",
    "write_cdf_csv",
]


@dataclass(frozen=True)
class IcfConfig:
    """Parameters of one design run.

    ``num_pulses`` counts the non-zero pulses designed jointly (the pulses
    of the first transmitter before any orthogonal-design placement).
    ``clip_factor`` is the fractional band kept around the mean total
    subcarrier power; ``papr_target_db`` the clip level for the time
    domain; ``oversample`` the PAPR evaluation grid.
    """

    num_subcarriers: int
    num_cells: int
    eta_max: int
    num_tx: int
    num_pulses: int
    num_iterations: int
    papr_target_db: float
    clip_factor: float
    oversample: int = 4
    seed: int = 0

    def __post_init__(self):
        n, m, em = self.num_subcarriers, self.num_cells, self.eta_max
        if m < 1 or em < 0 or self.num_tx < 1:
            raise ValueError("num_cells >= 1, eta_max >= 0 and num_tx >= 1 required")
        if n < em + m:
            raise ValueError(f"num_subcarriers={n} must be >= eta_max + num_cells = {em + m}")
        if not 1 <= self.num_pulses <= self.nonzero_len:
            raise ValueError(
                f"num_pulses={self.num_pulses} must be in [1, {self.nonzero_len}] "
                f"(the non-zero support length for N={n}, M={m}, eta_max={em})"
            )
        if not 0.0 < self.clip_factor < 1.0:
            raise ValueError("clip_factor must be in (0, 1)")
        if self.oversample < 1 or self.num_iterations < 1:
            raise ValueError("oversample and num_iterations must be >= 1")

    @property
    def zero_head_len(self) -> int:
        return self.eta_max + self.num_cells - 1

    @property
    def nonzero_len(self) -> int:
        return self.num_subcarriers - 2 * self.eta_max - 2 * self.num_cells + 3

    @property
    def support(self) -> tuple[int, int]:
        """Inclusive non-zero time support on the N-grid."""
        return (self.zero_head_len, self.num_subcarriers - self.zero_head_len)


@dataclass(frozen=True)
class DesignResult:
    pulses: np.ndarray  # (num_pulses, num_subcarriers) subcarrier weights
    time_seqs: np.ndarray  # matching time sequences; zero head/tail exact here
    per_pulse_papr_db: np.ndarray
    mean_papr_db: float
    snr_degradation_db: float
    iterations_run: int


def snr_degradation_db(pulses, num_tx: int) -> float:
    """SNR loss (dB, <= 0) of joint compression/integration with these pulses.

    Computed from the shape of the total spectral power sum_p |S_k^(p)|^2
    after renormalizing the set's energy to 1/num_tx; 0 dB exactly when the
    total power is flat over k.  A subcarrier with zero total power makes
    the estimate unusable there, reported as -inf rather than an error.
    """
    s = np.asarray(pulses, dtype=np.complex128)
    if s.ndim != 2 or s.size == 0:
        raise ValueError("pulses must have shape (num_pulses, num_subcarriers)")
    power = np.sum(np.abs(s) ** 2, axis=0)
    if np.any(power == 0.0):
        return float("-inf")
    n = power.size
    power = power / (num_tx * power.sum())  # energy convention: total 1/num_tx
    return float(10.0 * np.log10(n * n * num_tx / np.sum(1.0 / power)))


def time_clip(x, papr_target_db: float, window: tuple[int, int]) -> np.ndarray:
    """Clip magnitudes above A = sqrt(mean power * 10^(target/10)) in window.

    The mean power is taken over the window; phases are preserved and
    samples outside the window are untouched.
    """
    x = np.array(x, dtype=np.complex128)
    first, last = int(window[0]), int(window[1])
    if not 0 <= first <= last < x.size:
        raise ValueError(f"window ({first}, {last}) is empty or outside [0, {x.size - 1}]")
    seg = x[first : last + 1]
    p_avg = np.mean(np.abs(seg) ** 2)
    if p_avg == 0.0:
        return x
    amp = np.sqrt(p_avg * 10.0 ** (papr_target_db / 10.0))
    mag = np.abs(seg)
    over = mag > amp
    seg[over] *= amp / mag[over]
    return x


def icf_design(cfg: IcfConfig, validate_clip: bool = False) -> DesignResult:
    """Run the clipping/filtering loop for a fixed iteration count.

    Start: unit-magnitude weights 1/sqrt(N*T*P) * exp(2j pi phi) with phi
    seeded uniform on [0, 1).  Each iteration works on the L-times
    oversampled time grid (zero-pad the weights to L*N, unitary IDFT),
    applies the zero head/tail filter and the time clip over the non-zero
    support, transforms back, keeps only the N in-band bins, then applies
    the total-power clip with band clip_factor around the mean.  After the
    last iteration the N-point time filter and per-pulse normalization to
    energy 1/(num_tx * num_pulses) are applied, which is what makes the
    zero conditions exact.

    ``validate_clip`` re-checks the clipped total power against its band
    inside the loop (used by tests).
    """
    n, p, t = cfg.num_subcarriers, cfg.num_pulses, cfg.num_tx
    l, head = cfg.oversample, cfg.zero_head_len
    ln = l * n
    rng = np.random.default_rng(cfg.seed)
    weights = np.exp(2j * np.pi * rng.random((p, n))) / np.sqrt(n * t * p)

    over_first, over_last = l * head, l * (n - head + 1) - 1
    gate = np.zeros(ln)
    gate[over_first : over_last + 1] = 1.0

    for _ in range(cfg.num_iterations):
        padded = np.concatenate([weights, np.zeros((p, ln - n), dtype=np.complex128)], axis=1)
        time = np.fft.ifft(padded, axis=1) * np.sqrt(ln)
        time *= gate
        for i in range(p):
            time[i] = time_clip(time[i], cfg.papr_target_db, (over_first, over_last))
        spectrum = np.fft.fft(time, axis=1) / np.sqrt(ln)
        inband = spectrum[:, :n]  # out-of-band bins dropped; re-padded next pass

        total = np.sum(np.abs(inband) ** 2, axis=0)
        mean = total.mean()
        hi, lo = mean * (1.0 + cfg.clip_factor), mean * (1.0 - cfg.clip_factor)
        factor = np.ones(n)
        above, below = total > hi, (total < lo) & (total > 0)
        factor[above] = np.sqrt(hi / total[above])
        factor[below] = np.sqrt(lo / total[below])
        weights = inband * factor
        if validate_clip:
            chk = np.sum(np.abs(weights) ** 2, axis=0)
            ok = ((chk >= lo * (1 - 1e-12)) & (chk <= hi * (1 + 1e-12))) | (chk == 0)
            if not ok.all():
                raise AssertionError("total power escaped its clip band")

    time = np.fft.ifft(weights, axis=1) * np.sqrt(n)
    time[:, :head] = 0.0
    time[:, n - head + 1 :] = 0.0
    energy = np.sum(np.abs(time) ** 2, axis=1)
    if np.any(energy == 0.0):
        raise ValueError("a pulse collapsed to zero; adjust the configuration")
    time /= np.sqrt(t * p * energy)[:, None]
    weights = np.fft.fft(time, axis=1) / np.sqrt(n)

    paprs = np.array([papr_db(w, l, cfg.support) for w in weights])
    return DesignResult(
        pulses=weights,
        time_seqs=time,
        per_pulse_papr_db=paprs,
        mean_papr_db=float(paprs.mean()),
        snr_degradation_db=snr_degradation_db(weights, t),
        iterations_run=cfg.num_iterations,
    )


@dataclass(frozen=True)
class MonteCarloResult:
    """Per-seed metrics, their sorted views (empirical CDF samples) and the
    count of trials meeting both thresholds."""

    seeds: np.ndarray
    papr_db: np.ndarray
    degradation_db: np.ndarray
    papr_sorted_db: np.ndarray
    degradation_sorted_db: np.ndarray
    qualifying_count: int
    trials: int
    xi_min_db: float
    papr_max_db: float

    @property
    def qualifying_seeds(self) -> np.ndarray:
        good = (self.degradation_db >= self.xi_min_db) & (self.papr_db <= self.papr_max_db)
        return self.seeds[good]


def _run_trial(args):
    cfg, seed = args
    result = icf_design(replace(cfg, seed=seed))
    return result.mean_papr_db, result.snr_degradation_db


def monte_carlo_cdf(
    cfg: IcfConfig,
    trials: int,
    xi_min_db: float,
    papr_max_db: float,
    workers: int = 1,
) -> MonteCarloResult:
    """Run ``trials`` designs with seeds cfg.seed .. cfg.seed + trials - 1.

    Trials are independent and keyed by seed, so parallel execution
    (``workers`` > 1) returns exactly the sequential result.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    jobs = [(cfg, cfg.seed + i) for i in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            metrics = list(pool.map(_run_trial, jobs, chunksize=max(1, trials // (8 * workers))))
    else:
        metrics = [_run_trial(job) for job in jobs]
    papr = np.array([m[0] for m in metrics])
    xi = np.array([m[1] for m in metrics])
    count = int(np.sum((xi >= xi_min_db) & (papr <= papr_max_db)))
    return MonteCarloResult(
        seeds=np.array([s for _, s in jobs]),
        papr_db=papr,
        degradation_db=xi,
        papr_sorted_db=np.sort(papr),
        degradation_sorted_db=np.sort(xi),
        qualifying_count=count,
        trials=trials,
        xi_min_db=xi_min_db,
        papr_max_db=papr_max_db,
    )


def write_cdf_csv(result: MonteCarloResult, path) -> None:
    """CSV of empirical CDF samples: metric, sorted value, probability."""
    n = result.trials
    with open(path, "w") as f:
        f.write("metric,value,probability\n")
        for name, values in (
            ("mean_papr_db", result.papr_sorted_db),
            ("snr_degradation_db", result.degradation_sorted_db),
        ):
            for i, v in enumerate(values):
                f.write(f"{name},{float(v)!r},{(i + 1) / n!r}\n")


def default_workers() -> int:
    """Worker count for Monte Carlo runs, capped to keep memory modest."""
    return max(1, min(8, os.cpu_count() or 1))
