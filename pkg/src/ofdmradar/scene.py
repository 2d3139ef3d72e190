"""Scene model and received-stream synthesis.

Each range cell is a point-like reflector; the baseband channel from
transmitter alpha to receiver beta is a tap line with integer sample
delays m + eta[beta, alpha] weighted by the phase-carrying reflectivity
d[beta, alpha, m].  Receivers see the superposition over all transmitters
plus white Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kvconfig import ConfigError, Key, load_kv
from .waveform import WaveformSet

__all__ = [
    "SPEED_OF_LIGHT",
    "SceneConfig",
    "RcsRealization",
    "GeometryDelays",
    "SceneBundle",
    "delays_from_geometry",
    "sample_rcs",
    "delay_superpose",
    "synthesize_received",
    "synthesize_all_received",
    "load_scene_file",
    "write_frames_csv",
]

SPEED_OF_LIGHT = 3.0e8  # m/s


@dataclass(frozen=True)
class SceneConfig:
    """Static description of one range line.

    ``delays`` is the (num_rx, num_tx) integer matrix of relative
    propagation delays in samples; all entries must lie in [0, eta_max]
    (eta_max is the provisioned bound the waveforms were designed for).
    ``target_cells`` lists the range cells with non-zero reflectivity.
    """

    num_tx: int
    num_rx: int
    delays: np.ndarray
    num_cells: int
    eta_max: int
    carrier_hz: float
    bandwidth_hz: float
    target_cells: tuple
    sigma_d2: float
    sigma_n2: float
    tau_min_s: float = 0.0
    range_cell_0_m: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=int)
        if d.shape != (self.num_rx, self.num_tx):
            raise ValueError(f"delays must have shape ({self.num_rx}, {self.num_tx})")
        if d.size and (d.min() < 0 or d.max() > self.eta_max):
            raise ValueError(f"delays must lie in [0, eta_max={self.eta_max}]")
        cells = tuple(int(c) for c in self.target_cells)
        if any(not 0 <= c < self.num_cells for c in cells):
            raise ValueError(f"target cells must lie in [0, {self.num_cells - 1}]")
        if self.sigma_d2 < 0 or self.sigma_n2 < 0:
            raise ValueError("variances must be >= 0")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be > 0")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "target_cells", cells)

    @property
    def sample_interval_s(self) -> float:
        return 1.0 / self.bandwidth_hz

    @property
    def range_resolution_m(self) -> float:
        return SPEED_OF_LIGHT * self.sample_interval_s / 2.0


@dataclass(frozen=True)
class RcsRealization:
    """One draw of the cell reflectivities.

    ``g`` is the raw reflectivity, ``d = g * exp(-2j pi f_c tau_sum)`` the
    phase-weighted version entering the channel, and ``tau_sum`` the known
    two-way delays in seconds; all shaped (num_rx, num_tx, num_cells).
    """

    g: np.ndarray
    d: np.ndarray
    tau_sum: np.ndarray
    seed: int


@dataclass(frozen=True)
class GeometryDelays:
    delays: np.ndarray
    tau_min_s: float
    max_rounding_residual: float


def delays_from_geometry(tx_pos, rx_pos, cell0_pos, bandwidth_hz: float) -> GeometryDelays:
    """Integer sample delays from antenna and nearest-cell coordinates.

    Uses two-way slant ranges (R_tx + R_rx)/c relative to the minimum over
    all pairs, rounded to the sample grid 1/bandwidth; the largest rounding
    residual (in samples) is reported so scenario authors can confirm the
    integer-delay assumption is adequate.
    """
    tx = np.atleast_2d(np.asarray(tx_pos, dtype=float))
    rx = np.atleast_2d(np.asarray(rx_pos, dtype=float))
    cell0 = np.asarray(cell0_pos, dtype=float)
    r_tx = np.linalg.norm(tx - cell0, axis=1)
    r_rx = np.linalg.norm(rx - cell0, axis=1)
    tau = (r_rx[:, None] + r_tx[None, :]) / SPEED_OF_LIGHT
    tau_min = float(tau.min())
    frac = (tau - tau_min) * bandwidth_hz
    eta = np.rint(frac).astype(int)
    if eta.min() < 0:
        raise RuntimeError("negative relative delay; geometry inputs are inconsistent")
    return GeometryDelays(eta, tau_min, float(np.abs(frac - eta).max()))


def sample_rcs(scene: SceneConfig, seed: int = 0) -> RcsRealization:
    """Draw reflectivities CN(0, sigma_d2) on the target cells, zero elsewhere."""
    rng = np.random.default_rng(seed)
    shape = (scene.num_rx, scene.num_tx, scene.num_cells)
    g = np.zeros(shape, dtype=np.complex128)
    cells = list(scene.target_cells)
    if cells and scene.sigma_d2 > 0:
        draw = rng.standard_normal((scene.num_rx, scene.num_tx, len(cells), 2))
        g[:, :, cells] = (draw[..., 0] + 1j * draw[..., 1]) * np.sqrt(scene.sigma_d2 / 2.0)
    ts = scene.sample_interval_s
    pair_delay = scene.tau_min_s + scene.delays * ts  # (R, T)
    tau_sum = pair_delay[:, :, None] + np.arange(scene.num_cells) * ts
    d = g * np.exp(-2j * np.pi * scene.carrier_hz * tau_sum)
    return RcsRealization(g=g, d=d, tau_sum=tau_sum, seed=seed)


def delay_superpose(time_seqs, weights, delays, eta_max: int) -> np.ndarray:
    """Direct evaluation of u[beta, i] = sum_a sum_m w[b,a,m] x[a, i-m-delays[b,a]].

    ``time_seqs`` is (num_tx, seq_len); the output spans the full support,
    (num_rx, seq_len + eta_max + num_cells - 1).
    """
    weights = np.asarray(weights, dtype=np.complex128)
    num_rx, num_tx, num_cells = weights.shape
    seqs = np.asarray(time_seqs, dtype=np.complex128)
    if seqs.shape[0] != num_tx:
        raise ValueError("time_seqs and weights disagree on the transmitter count")
    seq_len = seqs.shape[1]
    out = np.zeros((num_rx, seq_len + eta_max + num_cells - 1), dtype=np.complex128)
    for b in range(num_rx):
        for a in range(num_tx):
            base = int(delays[b, a])
            w = weights[b, a]
            for m in np.flatnonzero(w):
                out[b, base + m : base + m + seq_len] += w[m] * seqs[a]
    return out


def _check_compatible(ws: WaveformSet, scene: SceneConfig) -> None:
    if ws.num_tx != scene.num_tx:
        raise ValueError(f"waveform set has {ws.num_tx} transmitters, scene {scene.num_tx}")
    if ws.num_cells != scene.num_cells or ws.eta_max != scene.eta_max:
        raise ValueError(
            "waveform set and scene disagree on (num_cells, eta_max): "
            f"({ws.num_cells}, {ws.eta_max}) vs ({scene.num_cells}, {scene.eta_max})"
        )


def synthesize_received(
    ws: WaveformSet, rcs: RcsRealization, scene: SceneConfig, pulse_index: int, noise_seed: int = 0
) -> np.ndarray:
    """Received sample streams of one pulse for all receivers.

    The transmitted discrete pulse is the N-point time sequence extended
    periodically by the guard length (for sets satisfying the zero head,
    the extension is all zeros, i.e. the guard is implicit).  Output shape
    (num_rx, N + 2*(eta_max + num_cells) - 2).  Noise is CN(0, sigma_n2)
    per sample, keyed by (noise_seed, pulse_index) so successive pulses
    get independent streams from one master seed.
    """
    _check_compatible(ws, scene)
    if not 0 <= pulse_index < ws.num_pulses:
        raise ValueError(f"pulse_index must lie in [0, {ws.num_pulses - 1}]")
    guard = ws.zero_head_len
    x = ws.time_seqs[:, pulse_index, :]
    extended = np.concatenate([x, x[:, : guard]], axis=1)
    frame = delay_superpose(extended, rcs.d, scene.delays, scene.eta_max)
    if scene.sigma_n2 > 0:
        rng = np.random.default_rng([int(noise_seed), int(pulse_index)])
        noise = rng.standard_normal(frame.shape + (2,))
        frame = frame + (noise[..., 0] + 1j * noise[..., 1]) * np.sqrt(scene.sigma_n2 / 2.0)
    return frame


def synthesize_all_received(
    ws: WaveformSet, rcs: RcsRealization, scene: SceneConfig, noise_seed: int = 0
) -> np.ndarray:
    """All pulses at once, shape (num_rx, num_pulses, frame_len)."""
    frames = [
        synthesize_received(ws, rcs, scene, p, noise_seed) for p in range(ws.num_pulses)
    ]
    return np.stack(frames, axis=1)


@dataclass(frozen=True)
class SceneBundle:
    """A scene plus the seeds its file pinned down."""

    scene: SceneConfig
    rcs_seed: int
    noise_seed: int


_SCENE_SCHEMA = {
    "num_tx": Key("int", required=True),
    "num_rx": Key("int", required=True),
    "delay_mode": Key("str", default="explicit"),
    "eta": Key("int_matrix"),
    "tx_pos": Key("float_matrix"),
    "rx_pos": Key("float_matrix"),
    "cell0_pos": Key("float_list"),
    "num_cells": Key("int", required=True),
    "eta_max": Key("int"),
    "carrier_hz": Key("float", required=True),
    "bandwidth_hz": Key("float", required=True),
    "target_cells": Key("int_list", default=[]),
    "sigma_d2": Key("float", default=1.0),
    "sigma_n2": Key("float", default=0.0),
    "tau_min_s": Key("float", default=0.0),
    "range_cell_0_m": Key("float", default=0.0),
    "rcs_seed": Key("int", default=0),
    "noise_seed": Key("int", default=0),
}


def load_scene_file(path) -> SceneBundle:
    """Read a scene description (documented key-value schema).

    ``delay_mode = explicit`` takes the delay matrix from ``eta``;
    ``geometry`` derives it from ``tx_pos``/``rx_pos``/``cell0_pos`` (rows
    of coordinates in meters) and fills ``tau_min_s``; ``eta_max`` then
    defaults to the derived maximum but may be provisioned larger.
    """
    v = load_kv(path, _SCENE_SCHEMA)
    mode = v["delay_mode"]
    if mode == "explicit":
        if v["eta"] is None or v["eta_max"] is None:
            raise ConfigError(f"{path}: explicit delay mode needs 'eta' and 'eta_max'")
        delays, tau_min = np.asarray(v["eta"], dtype=int), v["tau_min_s"]
        eta_max = v["eta_max"]
    elif mode == "geometry":
        if v["tx_pos"] is None or v["rx_pos"] is None or v["cell0_pos"] is None:
            raise ConfigError(
                f"{path}: geometry delay mode needs 'tx_pos', 'rx_pos' and 'cell0_pos'"
            )
        geo = delays_from_geometry(v["tx_pos"], v["rx_pos"], v["cell0_pos"], v["bandwidth_hz"])
        delays, tau_min = geo.delays, geo.tau_min_s
        eta_max = int(delays.max()) if v["eta_max"] is None else v["eta_max"]
    else:
        raise ConfigError(f"{path}: delay_mode must be 'explicit' or 'geometry'")
    try:
        scene = SceneConfig(
            num_tx=v["num_tx"],
            num_rx=v["num_rx"],
            delays=delays,
            num_cells=v["num_cells"],
            eta_max=eta_max,
            carrier_hz=v["carrier_hz"],
            bandwidth_hz=v["bandwidth_hz"],
            target_cells=tuple(v["target_cells"]),
            sigma_d2=v["sigma_d2"],
            sigma_n2=v["sigma_n2"],
            tau_min_s=tau_min,
            range_cell_0_m=v["range_cell_0_m"],
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return SceneBundle(scene, rcs_seed=v["rcs_seed"], noise_seed=v["noise_seed"])


def write_frames_csv(frames, path) -> None:
    """CSV of received samples: beta (1-based), p, i, re, im."""
    frames = np.asarray(frames)
    with open(path, "w") as f:
        f.write("beta,p,i,re,im\n")
        for b in range(frames.shape[0]):
            for p in range(frames.shape[1]):
                for i in range(frames.shape[2]):
                    v = frames[b, p, i]
                    f.write(f"{b + 1},{p},{i},{float(v.real)!r},{float(v.imag)!r}\n")
