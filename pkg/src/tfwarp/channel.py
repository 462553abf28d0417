"""Channel impairments: AWGN, static multipath and adjacent-channel interference."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .transceiver import SampleBuffer, WaveformConfig, modulate_stream, random_symbols
from .warping import ConfigurationError


def derive_seed(base_seed: int, *stream: int) -> np.random.SeedSequence:
    """Independent child seed for ``(base_seed, *stream)``, e.g. a trial index."""
    return np.random.SeedSequence([int(base_seed), *map(int, stream)])


def rng_for(base_seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(base_seed, *stream))


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """Static sample-spaced impulse response, normalized to unit power."""

    taps: np.ndarray
    tau_max: float = 0.0

    def __post_init__(self):
        h = np.atleast_1d(np.asarray(self.taps, dtype=complex))
        if h.size == 0:
            raise ConfigurationError("channel needs at least one tap")
        power = float(np.sum(np.abs(h) ** 2))
        if power == 0:
            raise ConfigurationError("channel taps are all zero")
        object.__setattr__(self, "taps", h / math.sqrt(power))

    @classmethod
    def for_config(cls, taps, config: WaveformConfig) -> "ChannelModel":
        """Channel at ``config``'s sample rate; rejects taps longer than ``tau_max``."""
        span = len(np.atleast_1d(taps)) - 1
        if span > config.n_tau:
            raise ConfigurationError(
                f"{span}-sample delay spread exceeds tau_max ({config.n_tau} samples)")
        return cls(taps, tau_max=config.tau_max)

    def delay_spread(self, sample_rate: float) -> float:
        """Last tap delay in base-symbol units."""
        return (self.taps.size - 1) / sample_rate


def apply_awgn(samples: SampleBuffer, snr_db: float, rng_seed, reference_power: float | None = None) -> SampleBuffer:
    """Add circular complex Gaussian noise at ``snr_db`` per sample.

    The noise variance is ``reference_power / 10**(snr_db/10)``, where the
    reference defaults to the measured power of ``samples``.  ``snr_db =
    +inf`` returns the input unchanged.  ``rng_seed`` may be an integer, a
    ``SeedSequence`` or a ``Generator``.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return samples
    p = samples.power if reference_power is None else float(reference_power)
    var = p / 10 ** (snr_db / 10)
    rng = np.random.default_rng(rng_seed)
    n = samples.samples.size
    noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return SampleBuffer(samples.samples + math.sqrt(var / 2) * noise, samples.sample_rate)


def apply_multipath(samples: SampleBuffer, model: ChannelModel) -> SampleBuffer:
    """Linear convolution with the channel taps (output grows by ``taps - 1``)."""
    return SampleBuffer(np.convolve(samples.samples, model.taps), samples.sample_rate)


@dataclass(frozen=True, eq=False)
class AciScenario:
    """Same-waveform neighbor at ``channel_offset`` subcarrier spacings.

    ``power_imbalance_db`` is the interferer power above the desired signal;
    ``-inf`` disables the interferer.
    """

    channel_offset: float
    power_imbalance_db: float
    interferer_config: WaveformConfig

    def __post_init__(self):
        width = self.interferer_config.grid.nominal_subcarriers
        if abs(self.channel_offset) < width:
            raise ConfigurationError(
                f"offset {self.channel_offset} overlaps allocations {width} subcarriers wide")


def compose_aci(desired: SampleBuffer, scenario: AciScenario, rng_seed) -> SampleBuffer:
    """Desired signal plus one asynchronous, frequency-shifted interferer.

    The interferer is an independent random-data symbol stream of
    ``scenario.interferer_config``, started at a uniformly random sample
    offset within one symbol, shifted by ``channel_offset`` spacings and
    scaled so its power over the buffer is ``power_imbalance_db`` above the
    desired signal's.
    """
    if math.isinf(scenario.power_imbalance_db) and scenario.power_imbalance_db < 0:
        return desired
    cfg = scenario.interferer_config
    if not math.isclose(cfg.sample_rate, desired.sample_rate):
        raise ConfigurationError(
            f"interferer rate {cfg.sample_rate} differs from desired rate {desired.sample_rate}")
    rng = np.random.default_rng(rng_seed)
    n = desired.samples.size
    count = n // cfg.symbol_length + 2
    _, data = random_symbols(rng, (count, cfg.N), cfg.constellation)
    stream = modulate_stream(data, cfg).samples
    offset = int(rng.integers(0, cfg.symbol_length))
    piece = stream[offset:offset + n]
    k = np.arange(n)
    piece = piece * np.exp(2j * np.pi * scenario.channel_offset * k / desired.sample_rate)
    p_int = float(np.mean(np.abs(piece) ** 2))
    if p_int == 0:
        raise ConfigurationError("interferer segment has no power")
    gain = math.sqrt(desired.power * 10 ** (scenario.power_imbalance_db / 10) / p_int)
    return SampleBuffer(desired.samples + gain * piece, desired.sample_rate)


__all__ = [
    "AciScenario", "ChannelModel", "apply_awgn", "apply_multipath", "compose_aci",
    "derive_seed", "rng_for",
]
