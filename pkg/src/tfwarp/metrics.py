"""Spectral, error-rate and envelope metrics with CSV export."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import signal, special

from .transceiver import Constellation, SampleBuffer, SymbolFrame, hard_decision
from .warping import ConfigurationError

OOBE_FLOOR_DB = -200.0


@dataclass(frozen=True, eq=False)
class PsdEstimate:
    """Welch PSD; ``freqs`` in subcarrier spacings around the carrier.

    ``power_db`` is normalized to a 0 dB peak; ``peak_density`` holds the
    linear density of that peak so absolute values can be recovered.
    """

    freqs: np.ndarray
    power_db: np.ndarray
    segment_length: int
    overlap: int
    peak_density: float = 1.0

    @property
    def density(self) -> np.ndarray:
        return self.peak_density * 10 ** (self.power_db / 10)


def estimate_psd(stream: SampleBuffer, segment_length: int, overlap: int | None = None) -> PsdEstimate:
    """Hann-windowed Welch average (two-sided, density scaling)."""
    x = stream.samples
    if segment_length <= 0 or x.size < segment_length:
        raise ConfigurationError(f"stream of {x.size} samples is shorter than one {segment_length}-sample segment")
    if overlap is None:
        overlap = segment_length // 2
    f, p = signal.welch(x, fs=stream.sample_rate, window="hann", nperseg=segment_length,
                        noverlap=overlap, return_onesided=False, detrend=False, scaling="density")
    f, p = np.fft.fftshift(f), np.fft.fftshift(p)
    peak = float(p.max())
    if peak <= 0:
        raise ConfigurationError("stream has no power")
    db = 10 * np.log10(np.maximum(p / peak, 1e-300))
    return PsdEstimate(freqs=f, power_db=db, segment_length=segment_length, overlap=overlap,
                       peak_density=peak)


def oobe_metric(psd: PsdEstimate, band_edges: tuple[float, float]) -> float:
    """Integrated out-of-band over in-band power, in dBc."""
    lo, hi = band_edges
    if not lo < hi:
        raise ConfigurationError(f"degenerate band {band_edges}")
    if lo < psd.freqs[0] or hi > psd.freqs[-1]:
        raise ConfigurationError(f"band {band_edges} leaves the PSD span")
    p = psd.density
    inside = (psd.freqs >= lo) & (psd.freqs <= hi)
    p_in, p_out = p[inside].sum(), p[~inside].sum()
    if p_in <= 0:
        raise ConfigurationError("no in-band power")
    if p_out <= 0:
        return OOBE_FLOOR_DB
    return max(float(10 * np.log10(p_out / p_in)), OOBE_FLOOR_DB)


def _symbols(frames) -> np.ndarray:
    if isinstance(frames, np.ndarray):
        return frames
    items = list(frames)
    if items and isinstance(items[0], SymbolFrame):
        return np.array([f.data if f.estimates is None else f.estimates for f in items])
    return np.asarray(items)


def symbol_errors(tx, rx, constellation: Constellation | str) -> tuple[int, int]:
    """``(errored symbols, total symbols)`` after nearest-point decisions."""
    if isinstance(tx, (list, tuple)) and tx and isinstance(tx[0], SymbolFrame):
        tx = np.array([f.data for f in tx])
    t, r = _symbols(tx), _symbols(rx)
    if t.size == 0:
        raise ConfigurationError("no symbols to compare")
    if t.shape != r.shape:
        raise ConfigurationError(f"tx shape {t.shape} differs from rx shape {r.shape}")
    errors = int(np.count_nonzero(hard_decision(t, constellation) != hard_decision(r, constellation)))
    return errors, int(t.size)


def symbol_error_rate(tx, rx, constellation: Constellation | str = Constellation.QPSK) -> float:
    errors, total = symbol_errors(tx, rx, constellation)
    return errors / total


def q_function(x):
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def qam_ser_awgn(esn0_db, order: int = 4):
    """Exact square-QAM symbol error rate on AWGN (QPSK for ``order = 4``)."""
    m = math.isqrt(order)
    if m * m != order:
        raise ConfigurationError("closed form covers square QAM only")
    esn0 = 10 ** (np.asarray(esn0_db, dtype=float) / 10)
    p_axis = 2 * (1 - 1 / m) * q_function(np.sqrt(3 * esn0 / (order - 1)))
    return 1 - (1 - p_axis) ** 2


def binomial_standard_error(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n) if n else math.inf


@dataclass(frozen=True, eq=False)
class CcdfCurve:
    thresholds_db: np.ndarray
    probabilities: np.ndarray
    papr_db: np.ndarray | None = None

    def threshold_at(self, probability: float) -> float:
        """Smallest PAPR exceeded with at most ``probability`` (empirical quantile)."""
        values = self.papr_db
        if values is None:
            below = np.nonzero(self.probabilities <= probability)[0]
            return float(self.thresholds_db[below[0]]) if below.size else math.inf
        if values.size * probability < 100:
            raise ConfigurationError(
                f"{values.size} frames are too few to read the CCDF at {probability:g}")
        return float(np.quantile(values, 1 - probability))


def papr_db(frames) -> np.ndarray:
    """Per-frame peak-to-average power ratio in dB."""
    if isinstance(frames, (list, tuple)) and not frames:
        return np.array([])
    if isinstance(frames, SampleBuffer):
        frames = [frames]
    if isinstance(frames, np.ndarray):
        x = np.atleast_2d(frames)
        p = np.abs(x) ** 2
        return 10 * np.log10(p.max(axis=-1) / p.mean(axis=-1))
    values = [10 * np.log10(np.max(np.abs(f.samples) ** 2) / np.mean(np.abs(f.samples) ** 2))
              for f in frames]
    return np.array(values)


def papr_ccdf(frames, step_db: float = 0.1) -> CcdfCurve:
    """CCDF ``P(PAPR > threshold)`` on a ``step_db`` grid."""
    return ccdf_from_papr(papr_db(frames), step_db)


def ccdf_from_papr(papr_values, step_db: float = 0.1) -> CcdfCurve:
    """CCDF of precomputed per-frame PAPR values (dB)."""
    values = np.asarray(papr_values, dtype=float).ravel()
    if values.size == 0:
        raise ConfigurationError("no frames")
    lo = math.floor(values.min() / step_db) * step_db - step_db
    hi = math.ceil(values.max() / step_db) * step_db + step_db
    grid = np.round(np.arange(lo, hi + step_db / 2, step_db), 10)
    sorted_vals = np.sort(values)
    prob = 1 - np.searchsorted(sorted_vals, grid, side="right") / values.size
    return CcdfCurve(thresholds_db=grid, probabilities=prob, papr_db=values)


def write_csv(path: str | Path, header: Sequence[str], columns: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_psd_csv(psd: PsdEstimate, path: str | Path) -> Path:
    return write_csv(path, ["freq", "power_db"], [psd.freqs, psd.power_db])


def write_ccdf_csv(curve: CcdfCurve, path: str | Path) -> Path:
    return write_csv(path, ["threshold_db", "ccdf"], [curve.thresholds_db, curve.probabilities])


def write_ser_csv(snr_db, ser, path: str | Path) -> Path:
    return write_csv(path, ["snr_db", "ser"], [snr_db, ser])


__all__ = [
    "CcdfCurve", "OOBE_FLOOR_DB", "PsdEstimate", "binomial_standard_error", "ccdf_from_papr",
    "estimate_psd",
    "oobe_metric", "papr_ccdf", "papr_db", "q_function", "qam_ser_awgn", "symbol_error_rate",
    "symbol_errors", "write_ccdf_csv", "write_csv", "write_psd_csv", "write_ser_csv",
]
