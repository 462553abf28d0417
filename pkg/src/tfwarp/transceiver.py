"""Warped multicarrier modulator and the zero-pad FFT receiver.

Frame layout
------------
The synthesis spectrum lives on ``L*Q`` bins in band order (``L`` is the
rendering oversampling factor, 1 for the critically sampled chain).  The
inverse FFT of the summed, amplitude-equalized subcarrier spectra is
circularly centered in the ``L*Q``-sample frame and the central ``T``
window is kept on air.  A guard of ``T_g`` zeros is placed in front of each
symbol, so a channel tail shorter than the guard never reaches the next
symbol.

The receiver takes the ``T + tau_max`` samples after the guard, zero-pads
them back into the frame at the same position, applies the FFT and reads
each subcarrier at its integer-hit center bin.  Because the padded segment
holds the full linear convolution with the channel, the per-bin channel is
exactly the DFT of the impulse response.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .pulse import rc_spectrum, symbol_samples, window_start
from .warping import ConfigurationError, DiscreteWarpGrid


class Constellation(str, enum.Enum):
    QPSK = "QPSK"
    QAM16 = "16QAM"


# Gray-coded per-axis levels, indexed by the axis bit pattern.
_QAM16_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0])


def constellation_points(kind: Constellation | str) -> np.ndarray:
    """Unit-average-energy points indexed by their Gray-coded bit label.

    QPSK label ``2*b0 + b1`` maps to ``((1-2*b0) + 1j*(1-2*b1)) / sqrt(2)``.
    16QAM label ``4*i + q`` uses Gray levels ``[-3, -1, 3, 1]`` on each axis.
    """
    kind = Constellation(kind)
    if kind is Constellation.QPSK:
        labels = np.arange(4)
        return ((1 - 2 * (labels >> 1)) + 1j * (1 - 2 * (labels & 1))) / np.sqrt(2.0)
    labels = np.arange(16)
    pts = _QAM16_LEVELS[labels >> 2] + 1j * _QAM16_LEVELS[labels & 3]
    return pts / np.sqrt(10.0)


def random_symbols(rng: np.random.Generator, shape, kind: Constellation | str):
    """Draw uniform labels and return ``(labels, points)``."""
    pts = constellation_points(kind)
    labels = rng.integers(0, pts.size, size=shape)
    return labels, pts[labels]


def hard_decision(estimates, kind: Constellation | str) -> np.ndarray:
    """Nearest-point labels for an array of symbol estimates."""
    pts = constellation_points(kind)
    est = np.asarray(estimates)
    dist = np.abs(est[..., None] - pts)
    return np.argmin(dist, axis=-1)


@dataclass(frozen=True)
class SymbolFrame:
    """Data symbols of one multicarrier symbol and their receiver estimates."""

    data: np.ndarray | None = None
    estimates: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class SampleBuffer:
    """Complex baseband samples; ``sample_rate`` is samples per base symbol."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=complex)
        if x.ndim != 1:
            raise ValueError("sample buffers are one-dimensional")
        if not np.all(np.isfinite(x)):
            raise ValueError("sample buffer holds non-finite values")
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size

    @property
    def power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2)) if self.samples.size else 0.0

    def to_iq_bytes(self) -> bytes:
        """Interleaved little-endian float64 ``I0 Q0 I1 Q1 ...`` with no header."""
        return self.samples.astype("<c16").tobytes()

    @classmethod
    def from_iq_bytes(cls, raw: bytes, sample_rate: float) -> "SampleBuffer":
        if len(raw) % 16:
            raise ValueError(f"I/Q payload of {len(raw)} bytes is not a whole number of samples")
        return cls(np.frombuffer(raw, dtype="<c16").astype(complex), sample_rate)

    def write_iq(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_bytes(self.to_iq_bytes())
        return path

    @classmethod
    def read_iq(cls, path: str | Path, sample_rate: float) -> "SampleBuffer":
        return cls.from_iq_bytes(Path(path).read_bytes(), sample_rate)

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        k = np.arange(self.samples.size)
        table = np.column_stack([k, self.samples.real, self.samples.imag])
        np.savetxt(path, table, delimiter=",", header="k,real,imag", comments="",
                   fmt=["%d", "%.17g", "%.17g"])
        return path

    @classmethod
    def read_csv(cls, path: str | Path, sample_rate: float) -> "SampleBuffer":
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(table[:, 1] + 1j * table[:, 2], sample_rate)


def amplitude_equalization(grid: DiscreteWarpGrid, alphas) -> np.ndarray:
    """``A_n`` giving every subcarrier unit energy over the ``Q`` bins."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.shape != (grid.N,):
        raise ConfigurationError(f"expected {grid.N} roll-off factors, got {alphas.shape}")
    if np.any((alphas < 0) | (alphas > 1)):
        raise ConfigurationError("roll-off factors must lie in [0, 1]")
    energy = np.array([
        np.sum(rc_spectrum(a, grid.w_of_q - n) ** 2 * grid.wdot_of_q)
        for n, a in enumerate(alphas)
    ])
    if np.any(energy <= 0):
        bad = int(np.argmin(energy))
        raise RuntimeError(f"subcarrier {bad} has zero energy on this grid")
    return 1.0 / np.sqrt(energy)


@dataclass(frozen=True, eq=False)
class WaveformConfig:
    """Complete description of one warped (or windowed-OFDM) waveform.

    ``T``, ``T_g`` and ``tau_max`` are in base-symbol units; one base symbol
    is ``Q/u`` samples at critical sampling and ``oversample * Q/u`` when
    rendered on the oversampled grid.
    """

    grid: DiscreteWarpGrid
    alphas: np.ndarray
    amp_eq: np.ndarray
    T: float
    T_g: float = 0.125
    constellation: Constellation = Constellation.QPSK
    zeta: float = 0.999
    oversample: int = 1
    tau_max: float = 0.0625

    def __post_init__(self):
        object.__setattr__(self, "alphas", np.asarray(self.alphas, dtype=float))
        object.__setattr__(self, "amp_eq", np.asarray(self.amp_eq, dtype=float))
        object.__setattr__(self, "constellation", Constellation(self.constellation))
        N = self.grid.N
        if self.alphas.shape != (N,) or self.amp_eq.shape != (N,):
            raise ConfigurationError(f"roll-off and amplitude arrays must have length N={N}")
        if np.any((self.alphas < 0) | (self.alphas > 1)):
            raise ConfigurationError("roll-off factors must lie in [0, 1]")
        if np.any(self.amp_eq <= 0):
            raise ConfigurationError("amplitude equalization factors must be positive")
        if self.oversample < 1 or int(self.oversample) != self.oversample:
            raise ConfigurationError("oversample must be a positive integer")
        if self.T <= 0 or self.T_g < 0 or self.tau_max < 0:
            raise ConfigurationError("T must be positive and T_g, tau_max non-negative")
        if self.tau_max > self.T_g and self.T_g > 0:
            raise ConfigurationError(f"guard {self.T_g} is shorter than the delay spread {self.tau_max}")
        if self.n_T + self.n_tau > self.frame_length:
            raise ConfigurationError(
                f"T + tau_max ({self.n_T + self.n_tau} samples) exceeds the {self.frame_length}-sample frame")
        energy = self.subcarrier_energies()
        if np.max(np.abs(energy - energy.mean())) > 1e-9 * energy.mean():
            raise ConfigurationError("amplitude equalization does not equalize subcarrier energies")

    @classmethod
    def build(cls, grid: DiscreteWarpGrid, alphas, T: float, **kwargs) -> "WaveformConfig":
        """Config with ``amp_eq`` computed by :func:`amplitude_equalization`."""
        alphas = np.broadcast_to(np.asarray(alphas, dtype=float), (grid.N,)).copy()
        return cls(grid=grid, alphas=alphas, amp_eq=amplitude_equalization(grid, alphas), T=T, **kwargs)

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def frame_length(self) -> int:
        return self.oversample * self.grid.Q

    @property
    def n_T(self) -> int:
        return min(symbol_samples(self.grid, self.T, self.oversample), self.frame_length)

    @property
    def n_guard(self) -> int:
        return symbol_samples(self.grid, self.T_g, self.oversample)

    @property
    def n_tau(self) -> int:
        return symbol_samples(self.grid, self.tau_max, self.oversample)

    @property
    def symbol_length(self) -> int:
        return self.n_guard + self.n_T

    @property
    def sample_rate(self) -> float:
        """Samples per base symbol."""
        return float(self.oversample * self.grid.samples_per_symbol)

    @property
    def window_start(self) -> int:
        """First frame sample of the on-air ``T`` window."""
        return window_start(self.grid, self.n_T, self.oversample)

    @property
    def band_offset(self) -> int:
        """Index of core bin 0 inside the ``L*Q`` band-order spectrum."""
        return (self.oversample - 1) * self.grid.Q // 2

    def with_changes(self, **changes) -> "WaveformConfig":
        fields = dict(grid=self.grid, alphas=self.alphas, amp_eq=self.amp_eq, T=self.T,
                      T_g=self.T_g, constellation=self.constellation, zeta=self.zeta,
                      oversample=self.oversample, tau_max=self.tau_max)
        fields.update(changes)
        if "grid" in changes or "alphas" in changes:
            fields["amp_eq"] = amplitude_equalization(fields["grid"], fields["alphas"])
        return WaveformConfig(**fields)

    @cached_property
    def basis(self) -> np.ndarray:
        """``(N, L*Q)`` band-order spectra ``A_n g_n(w - n) sqrt(wdot)``."""
        w, wdot = self.grid.extended(self.oversample)
        root = np.sqrt(wdot)
        rows = [self.amp_eq[n] * rc_spectrum(a, w - n) * root for n, a in enumerate(self.alphas)]
        return np.array(rows, dtype=complex)

    @cached_property
    def center_gain(self) -> np.ndarray:
        """Receiver scaling ``A_n sqrt(wdot[c_n])`` (``g_n(0) = 1``)."""
        return self.amp_eq * np.sqrt(self.grid.wdot_of_q[self.grid.center_bin])

    def subcarrier_energies(self) -> np.ndarray:
        """Per-subcarrier energy over the ``Q`` core bins after ``A_n``."""
        g = self.grid
        return np.array([
            self.amp_eq[n] ** 2 * np.sum(rc_spectrum(a, g.w_of_q - n) ** 2 * g.wdot_of_q)
            for n, a in enumerate(self.alphas)
        ])


def synthesize(data, config: WaveformConfig) -> np.ndarray:
    """Full centered frames (before truncation) for data of shape ``(..., N)``.

    Amplitudes follow the ``1/Q`` scaling of the critically sampled inverse
    DFT at every rendering factor, so oversampled frames interpolate the
    same waveform.
    """
    d = np.asarray(data, dtype=complex)
    if d.shape[-1] != config.N:
        raise ConfigurationError(f"expected {config.N} data symbols per frame, got {d.shape[-1]}")
    spectrum = d @ config.basis
    frame = np.fft.ifft(np.fft.ifftshift(spectrum, axes=-1), axis=-1) * config.oversample
    return np.roll(frame, config.frame_length // 2, axis=-1)


def modulate_batch(data, config: WaveformConfig) -> np.ndarray:
    """On-air symbols (zero guard then the ``T`` window) for ``(B, N)`` data."""
    frames = synthesize(data, config)
    start = config.window_start
    body = frames[..., start:start + config.n_T]
    guard = np.zeros(body.shape[:-1] + (config.n_guard,), dtype=complex)
    return np.concatenate([guard, body], axis=-1)


def modulate(frame: SymbolFrame, config: WaveformConfig) -> SampleBuffer:
    if frame.data is None or np.shape(frame.data) != (config.N,):
        raise ConfigurationError(f"frame must carry {config.N} data symbols")
    return SampleBuffer(modulate_batch(frame.data, config), config.sample_rate)


def modulate_stream(data, config: WaveformConfig) -> SampleBuffer:
    """Back-to-back symbols for ``(B, N)`` data, followed by one trailing guard."""
    symbols = modulate_batch(np.atleast_2d(data), config)
    tail = np.zeros(config.n_guard, dtype=complex)
    return SampleBuffer(np.concatenate([symbols.ravel(), tail]), config.sample_rate)


def fde(bins, channel_freq_response, mode: str = "ZF", noise_variance: float = 0.0) -> np.ndarray:
    """One-tap frequency-domain equalizer (zero-forcing or MMSE)."""
    y = np.asarray(bins, dtype=complex)
    H = np.asarray(channel_freq_response, dtype=complex)
    if y.shape[-1] != H.shape[-1]:
        raise ConfigurationError(f"{y.shape[-1]} bins but {H.shape[-1]} channel coefficients")
    mode = str(mode).upper()
    if mode == "ZF":
        zero = np.nonzero(H == 0)[0]
        if zero.size:
            raise ZeroDivisionError(f"zero channel coefficient at bin {int(zero[0])}")
        return y / H
    if mode == "MMSE":
        if noise_variance < 0:
            raise ConfigurationError("MMSE noise variance must be non-negative")
        denom = np.abs(H) ** 2 + noise_variance
        zero = np.nonzero(denom == 0)[0]
        if zero.size:
            raise ZeroDivisionError(f"zero channel coefficient at bin {int(zero[0])}")
        return y * np.conj(H) / denom
    raise ConfigurationError(f"unknown equalizer mode {mode!r}")


def channel_frequency_response(taps, config: WaveformConfig) -> np.ndarray:
    """Band-order response of sample-spaced ``taps`` on the ``Q`` core bins.

    Taps are spaced at the config's sample rate.  The FFT has the frame
    length, so this is the exact per-bin channel seen by the receiver.
    """
    h = np.asarray(taps, dtype=complex)
    L = config.frame_length
    if h.size > L:
        raise ConfigurationError("channel longer than the frame")
    H = np.fft.fftshift(np.fft.fft(h, L))
    off = config.band_offset
    return H[off:off + config.grid.Q]


def received_bins(segments, config: WaveformConfig) -> np.ndarray:
    """Core-band spectra ``(..., Q)`` of received post-guard segments."""
    r = np.asarray(segments, dtype=complex)
    n = r.shape[-1]
    if n > config.frame_length - config.window_start:
        raise ConfigurationError(
            f"segment of {n} samples does not fit the {config.frame_length}-sample frame")
    frame = np.zeros(r.shape[:-1] + (config.frame_length,), dtype=complex)
    start = config.window_start
    frame[..., start:start + n] = r
    frame = np.roll(frame, -(config.frame_length // 2), axis=-1)
    spectrum = np.fft.fftshift(np.fft.fft(frame, axis=-1), axes=-1) / config.oversample
    off = config.band_offset
    return spectrum[..., off:off + config.grid.Q]


def demodulate_batch(segments, config: WaveformConfig, channel_freq_response=None,
                     mode: str = "ZF", noise_variance: float = 0.0) -> np.ndarray:
    """Data estimates ``(..., N)`` from post-guard segments of ``T + tau_max`` samples."""
    Y = received_bins(segments, config)[..., config.grid.center_bin]
    if channel_freq_response is not None:
        H = np.asarray(channel_freq_response, dtype=complex)
        if H.shape != (config.grid.Q,):
            raise ConfigurationError(f"channel response must have Q={config.grid.Q} entries")
        Y = fde(Y, H[config.grid.center_bin], mode, noise_variance)
    return Y / config.center_gain


def demodulate(received: SampleBuffer, config: WaveformConfig, channel_freq_response=None,
               mode: str = "ZF", noise_variance: float = 0.0) -> SymbolFrame:
    """Estimates for one symbol from the samples that follow its guard."""
    est = demodulate_batch(received.samples, config, channel_freq_response, mode, noise_variance)
    return SymbolFrame(estimates=est)


def stream_segments(stream, config: WaveformConfig, count: int) -> np.ndarray:
    """Receiver segments ``(count, T + tau_max)`` cut from a symbol stream."""
    x = np.asarray(stream, dtype=complex)
    size = config.n_T + config.n_tau
    starts = np.arange(count) * config.symbol_length + config.n_guard
    if count and starts[-1] + size > x.size:
        raise ConfigurationError("stream too short for the requested symbol count")
    idx = starts[:, None] + np.arange(size)
    return x[idx]


def evm_db(data, estimates) -> float:
    """Error vector magnitude in dB relative to the mean symbol power."""
    d = np.asarray(data)
    e = np.asarray(estimates)
    err = np.mean(np.abs(e - d) ** 2)
    ref = np.mean(np.abs(d) ** 2)
    return float(10 * np.log10(err / ref)) if err > 0 else -np.inf


__all__ = [
    "Constellation", "SampleBuffer", "SymbolFrame", "WaveformConfig", "amplitude_equalization",
    "channel_frequency_response", "constellation_points", "demodulate", "demodulate_batch",
    "evm_db", "fde", "hard_decision", "modulate", "modulate_batch", "modulate_stream",
    "random_symbols", "received_bins", "stream_segments", "synthesize",
]
