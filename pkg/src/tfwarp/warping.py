"""Frequency-axis warping operators and the discrete warped FFT grid.

A warping function ``w`` maps physical frequency (in nominal subcarrier
spacings) onto the warped axis on which every subcarrier sits at an integer
index.  Its slope ``wdot`` sets the local subcarrier spacing: where
``wdot < 1`` subcarriers are pulled apart.  Pairing ``w`` with the
``sqrt(wdot)`` amplitude factor makes the transform unitary.

The transceiver never evaluates ``w`` off-grid.  It uses a
:class:`DiscreteWarpGrid`, in which every subcarrier center lands exactly on
an FFT bin so the receiver can read symbols without interpolation.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import brentq


class ConfigurationError(ValueError):
    """Raised for inconsistent waveform, grid or experiment parameters."""


class WarpKind(str, enum.Enum):
    IDENTITY = "identity"
    SYMMETRIC_SIGMOID = "symmetric-sigmoid"
    ASYMMETRIC_SIGMOID = "asymmetric-sigmoid"
    TANH_EXAMPLE = "tanh-example"
    TABULATED = "tabulated"


def _sig(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _softplus(x):
    return np.logaddexp(0.0, x)


@dataclass(frozen=True)
class WarpSpec:
    """Continuous warping operator.

    ``a`` and ``b`` are the sigmoid center and width in subcarrier units.
    For the ``tabulated`` kind, ``table_f`` / ``table_w`` hold strictly
    increasing samples of ``w`` that are interpolated linearly.
    """

    kind: WarpKind = WarpKind.IDENTITY
    a: float = 0.0
    b: float = 1.0
    table_f: tuple[float, ...] = field(default=(), repr=False)
    table_w: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", WarpKind(self.kind))
        if self.kind in (WarpKind.SYMMETRIC_SIGMOID, WarpKind.ASYMMETRIC_SIGMOID):
            if not (self.b > 0 and math.isfinite(self.b) and math.isfinite(self.a)):
                raise ConfigurationError(f"sigmoid width must be positive, got b={self.b}")
        if self.kind is WarpKind.TABULATED:
            f = np.asarray(self.table_f, dtype=float)
            w = np.asarray(self.table_w, dtype=float)
            if f.size < 2 or f.shape != w.shape:
                raise ConfigurationError("tabulated warp needs two equal-length tables")
            if np.any(np.diff(f) <= 0) or np.any(np.diff(w) <= 0):
                raise ConfigurationError("tabulated warp must be strictly increasing")

    def wdot(self, f):
        return eval_wdot(self, f)

    def w(self, f):
        return eval_w(self, f)

    def inverse(self, x):
        return eval_inverse(self, x)


def _check_finite(f):
    arr = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("warping operators are defined for finite frequencies only")
    return arr


def _scalar_or_array(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def eval_wdot(spec: WarpSpec, f):
    """Slope of the warping function at ``f`` (scalar or array)."""
    x = _check_finite(f)
    kind = spec.kind
    if kind is WarpKind.IDENTITY:
        out = np.ones_like(x)
    elif kind is WarpKind.SYMMETRIC_SIGMOID:
        out = 1.0 - 0.5 * _sig((np.abs(x) - spec.a) / spec.b)
    elif kind is WarpKind.ASYMMETRIC_SIGMOID:
        out = 1.0 - 0.5 * _sig((x - spec.a) / spec.b)
    elif kind is WarpKind.TANH_EXAMPLE:
        out = 0.5 / np.cosh(x / 8.0) ** 2 + 0.5
    else:
        tf = np.asarray(spec.table_f)
        slopes = np.diff(spec.table_w) / np.diff(tf)
        out = slopes[_segment(tf, x)]
    return _scalar_or_array(out, f)


def _segment(tf, x):
    return np.clip(np.searchsorted(tf, x, side="right") - 1, 0, tf.size - 2)


def _tabulated(spec, x):
    # piecewise linear, extended with the end slopes
    tf = np.asarray(spec.table_f)
    tw = np.asarray(spec.table_w)
    idx = _segment(tf, x)
    slope = (tw[idx + 1] - tw[idx]) / (tf[idx + 1] - tf[idx])
    return tw[idx] + slope * (x - tf[idx])


def eval_w(spec: WarpSpec, f):
    """Warping function, anchored so that ``w(0) == 0``.

    The sigmoid kinds use the closed-form antiderivative of the logistic
    (a softplus), which agrees with direct quadrature of :func:`eval_wdot`.
    """
    x = _check_finite(f)
    kind = spec.kind
    if kind is WarpKind.IDENTITY:
        out = x.copy()
    elif kind is WarpKind.SYMMETRIC_SIGMOID:
        a, b = spec.a, spec.b
        ax = np.abs(x)
        out = np.sign(x) * (ax - 0.5 * b * (_softplus((ax - a) / b) - _softplus(-a / b)))
    elif kind is WarpKind.ASYMMETRIC_SIGMOID:
        a, b = spec.a, spec.b
        out = x - 0.5 * b * (_softplus((x - a) / b) - _softplus(-a / b))
    elif kind is WarpKind.TANH_EXAMPLE:
        out = 4.0 * np.tanh(x / 8.0) + 0.5 * x
    else:
        out = _tabulated(spec, x) - _tabulated(spec, np.zeros(()))
    return _scalar_or_array(out, f)


def eval_inverse(spec: WarpSpec, x, bracket: tuple[float, float] = (-1e4, 1e4)):
    """Inverse warping ``m = w^-1`` by bracketed monotone root search."""
    xs = _check_finite(x)
    lo, hi = bracket
    w_lo, w_hi = eval_w(spec, lo), eval_w(spec, hi)
    if np.any(xs < w_lo) or np.any(xs > w_hi):
        raise ValueError(f"value outside the range of w on [{lo}, {hi}]")
    if spec.kind is WarpKind.IDENTITY:
        return _scalar_or_array(xs.copy(), x)

    def solve(target):
        # slope >= 1/2 everywhere, so |m(target)| <= 2|target|
        span = 2.0 * abs(target) + 1.0
        a, b = max(lo, -span), min(hi, span)
        return brentq(lambda f: eval_w(spec, f) - target, a, b, xtol=1e-14, rtol=1e-15)

    out = np.vectorize(solve, otypes=[float])(xs)
    return _scalar_or_array(out, x)


@dataclass(frozen=True, eq=False)
class DiscreteWarpGrid:
    """Sampled warp on a ``Q``-bin FFT grid, in band order.

    Bin ``q`` sits at physical frequency ``(q - Q//2) / u`` nominal
    subcarrier spacings from the carrier.  ``w_of_q`` is the warped
    coordinate of each bin and ``wdot_of_q`` its per-bin slope (``1/u`` on
    unwarped bins).  ``bins_per_subcarrier[n]`` is the run length of
    subcarrier ``n``; ``center_bin[n]`` is the bin with ``w == n`` exactly.
    """

    Q: int
    u: int
    w_of_q: np.ndarray = field(repr=False)
    wdot_of_q: np.ndarray = field(repr=False)
    center_bin: np.ndarray = field(repr=False)
    bins_per_subcarrier: np.ndarray = field(repr=False)
    edge_count: int = 0

    @property
    def N(self) -> int:
        return int(self.center_bin.size)

    @property
    def nominal_subcarriers(self) -> int:
        return self.Q // self.u

    @property
    def samples_per_symbol(self) -> int:
        """Time samples per base (unwarped) symbol at critical sampling."""
        return self.Q // self.u

    @property
    def slopes(self) -> np.ndarray:
        """Per-subcarrier constant slope ``1/bins_per_subcarrier``."""
        return 1.0 / self.bins_per_subcarrier

    @property
    def allocated_bins(self) -> int:
        return int(self.bins_per_subcarrier.sum())

    @property
    def unallocated_subcarriers(self) -> int:
        return self.nominal_subcarriers - self.N

    @property
    def band_edges(self) -> tuple[float, float]:
        """Edges of the Q-bin band in nominal spacings around the carrier."""
        return ((-0.5 - self.Q // 2) / self.u, (self.Q - 0.5 - self.Q // 2) / self.u)

    def extended(self, oversample: int) -> tuple[np.ndarray, np.ndarray]:
        """``(w, wdot)`` on ``oversample*Q`` bins, extrapolated outside the band.

        Outside the Q-bin band the warp continues linearly with the slope of
        the outermost bin on each side.  Only synthesis for spectral
        measurements uses the out-of-band bins.
        """
        if oversample == 1:
            return self.w_of_q, self.wdot_of_q
        pad = (oversample - 1) * self.Q // 2
        q = np.arange(oversample * self.Q) - pad
        w = np.empty(q.size)
        wd = np.empty(q.size)
        inside = (q >= 0) & (q < self.Q)
        w[inside] = self.w_of_q
        wd[inside] = self.wdot_of_q
        low, high = q < 0, q >= self.Q
        w[low] = self.w_of_q[0] + q[low] * self.wdot_of_q[0]
        wd[low] = self.wdot_of_q[0]
        w[high] = self.w_of_q[-1] + (q[high] - self.Q + 1) * self.wdot_of_q[-1]
        wd[high] = self.wdot_of_q[-1]
        return w, wd

    def check(self) -> list[str]:
        """Return the list of violated grid invariants (empty when valid)."""
        problems = []
        w, wd, c = self.w_of_q, self.wdot_of_q, self.center_bin
        if w.shape != (self.Q,) or wd.shape != (self.Q,):
            problems.append("grid arrays must have length Q")
            return problems
        if np.any(np.diff(w) <= 0):
            problems.append("w_of_q is not strictly increasing")
        if np.any(wd <= 0):
            problems.append("wdot_of_q must be positive")
        if c.size and (c.min() < 0 or c.max() >= self.Q):
            problems.append("center bin outside the grid")
            return problems
        if np.any(w[c] - np.arange(c.size) != 0):
            problems.append("integer-hit rule violated: w[center_bin[n]] != n")
        gaps = np.diff(c)
        if np.any(gaps <= 0):
            problems.append("center bins are not strictly increasing")
        inner = self.bins_per_subcarrier == self.u
        if np.any(wd[c[inner]] != 1.0 / self.u):
            problems.append("inner subcarriers must have slope 1/u")
        return problems


def build_discrete_grid(
    N: int,
    u: int,
    edge_count: int = 0,
    bins_per_edge_subcarrier: Sequence[int] = (),
    Q: int | None = None,
) -> DiscreteWarpGrid:
    """Build an integer-hit warped grid with mirrored band edges.

    ``bins_per_edge_subcarrier`` lists the run length of each warped edge
    subcarrier from the innermost to the outermost; the same profile is
    used on both band edges.  Each subcarrier ``n`` occupies a run of ``b``
    consecutive bins spaced ``1/b`` on the warped axis.  The grid is
    mirror-symmetric about bin ``Q/2``: ``w[Q/2 + j] + w[Q/2 - j] = N - 1``
    and ``center_bin[n] + center_bin[N-1-n] = Q``.  Bins beyond the
    outermost runs continue the outermost slope.
    """
    profile = [int(x) for x in bins_per_edge_subcarrier]
    if any(x != y for x, y in zip(profile, bins_per_edge_subcarrier)):
        raise ConfigurationError("bins per edge subcarrier must be integers")
    if N <= 0 or u <= 0:
        raise ConfigurationError("N and u must be positive")
    if edge_count < 0 or len(profile) != edge_count:
        raise ConfigurationError(
            f"edge profile has {len(profile)} entries, expected edge_count={edge_count}")
    if 2 * edge_count > N:
        raise ConfigurationError("more warped edge subcarriers than subcarriers")
    if any(b < u for b in profile):
        raise ConfigurationError(f"edge runs must span at least u={u} bins")
    if any(b2 < b1 for b1, b2 in zip(profile, profile[1:])):
        raise ConfigurationError("edge profile must be non-decreasing toward the band edge")

    runs = np.full(N, u, dtype=int)
    if edge_count:
        runs[:edge_count] = profile[::-1]
        runs[N - edge_count:] = profile
    budget = int(runs.sum())
    if Q is None:
        Q = 1 << max(budget - 1, 1).bit_length()
    if budget > Q:
        raise ConfigurationError(f"bin budget {budget} exceeds Q={Q}")
    if Q % 2:
        raise ConfigurationError("Q must be even")

    # Lay out the upper half from the band center, then mirror it about bin
    # Q/2 (the zero-frequency bin), which keeps w exactly antisymmetric.
    half = Q // 2
    first = N // 2
    if N % 2:
        start = half - runs[first] // 2
    else:
        if runs[first] % 2:
            raise ConfigurationError("an even subcarrier count needs even run lengths at the band center")
        start = half
    w = np.full(Q, np.nan)
    wdot = np.full(Q, np.nan)
    center = np.empty(N, dtype=int)
    for n in range(first, N):
        b = int(runs[n])
        j0 = b // 2
        idx = np.arange(start, start + b)
        w[idx] = n + (np.arange(b) - j0) / b
        wdot[idx] = 1.0 / b
        center[n] = start + j0
        start += b
    last = start - 1
    outer = 1.0 / runs[-1]
    w[start:] = w[last] + np.arange(1, Q - start + 1) * outer
    wdot[start:] = outer
    upper = np.arange(half + 1, Q)
    w[Q - upper] = (N - 1) - w[upper]
    wdot[Q - upper] = wdot[upper]
    w[0] = w[1] - outer
    wdot[0] = outer
    center[:first] = Q - center[N - 1:N - 1 - first:-1] if first else center[:0]
    grid = DiscreteWarpGrid(Q=Q, u=u, w_of_q=w, wdot_of_q=wdot, center_bin=center,
                            bins_per_subcarrier=runs, edge_count=edge_count)
    problems = grid.check()
    if problems:
        raise ConfigurationError("; ".join(problems))
    return grid


def edge_profile_from_warp(spec: WarpSpec, N: int, u: int, max_edge: int | None = None) -> list[int]:
    """Quantize a continuous symmetric warp into per-subcarrier run lengths.

    Subcarrier positions are measured from the band center on the warped
    axis; each gets ``round(u / wdot(f))`` bins at its physical position
    ``f = m(n - center)``.  Returns the profile for one edge, innermost
    first, keeping only runs wider than ``u``.
    """
    half = (N - 1) / 2.0
    offsets = np.arange(N) - half
    side = offsets[offsets > 0]
    f = eval_inverse(spec, side)
    runs = np.maximum(np.rint(u / eval_wdot(spec, f)).astype(int), u)
    runs = np.maximum.accumulate(runs)
    first = int(np.argmax(runs > u)) if np.any(runs > u) else runs.size
    profile = runs[first:].tolist()
    if max_edge is not None:
        profile = profile[-max_edge:] if max_edge else []
    return profile


def export_grid_csv(grid: DiscreteWarpGrid, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q", "w_of_q", "wdot_of_q"])
        for q in range(grid.Q):
            writer.writerow([q, repr(float(grid.w_of_q[q])), repr(float(grid.wdot_of_q[q]))])
    return path


def import_grid_csv(path: str | Path, N: int, u: int, edge_count: int = 0) -> DiscreteWarpGrid:
    """Load a grid written by :func:`export_grid_csv` without validating it.

    Centers are the bins where ``w`` equals an integer exactly (``-1`` when
    a subcarrier has none), so :meth:`DiscreteWarpGrid.check` reports any
    damage instead of this loader hiding it.
    """
    path = Path(path)
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read grid file {path}: {exc}") from exc
    if table.shape[1] != 3:
        raise ConfigurationError(f"{path}: expected columns q, w_of_q, wdot_of_q")
    order = np.argsort(table[:, 0], kind="stable")
    w, wdot = table[order, 1], table[order, 2]
    center = np.full(N, -1, dtype=int)
    for n in range(N):
        hits = np.nonzero(w == n)[0]
        if hits.size:
            center[n] = hits[0]
    with np.errstate(divide="ignore"):
        runs = np.where(center >= 0, np.rint(1.0 / np.abs(wdot[np.maximum(center, 0)])), u)
    return DiscreteWarpGrid(Q=int(w.size), u=u, w_of_q=w, wdot_of_q=wdot, center_bin=center,
                            bins_per_subcarrier=runs.astype(int), edge_count=edge_count)
