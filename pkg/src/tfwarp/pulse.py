"""Raised-cosine subcarrier pulses and the roll-off solver.

Each subcarrier is a raised-cosine (RC) *time window* of unit flat width
(one base symbol) and roll-off ``alpha``.  On the frequency axis the pulse
is the window's Fourier transform::

    G(nu) = sinc(nu) * cos(pi*alpha*nu) / (1 - (2*alpha*nu)**2)

which is 1 at ``nu = 0`` and vanishes at every other integer, so
subcarriers sampled at their own centers do not see each other.  Larger
``alpha`` lowers the spectral sidelobes and lengthens the window.  Warping
the frequency axis by ``wdot < 1/u`` compresses the window in time, which
is what lets edge subcarriers afford a large roll-off inside the shared
symbol duration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .warping import ConfigurationError, DiscreteWarpGrid


def rc_amplitude(alpha: float, nu):
    """Raised-cosine window shape at ``nu`` (units of the flat width).

    1 on ``|nu| <= (1-alpha)/2``, a cosine taper through 1/2 at ``|nu| =
    1/2`` down to 0 at ``(1+alpha)/2``; for ``alpha = 0`` the indicator of
    ``|nu| <= 1/2``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"roll-off must lie in [0, 1], got {alpha}")
    x = np.abs(np.asarray(nu, dtype=float))
    lo, hi = (1.0 - alpha) / 2.0, (1.0 + alpha) / 2.0
    if alpha == 0.0:
        out = np.where(x <= 0.5, 1.0, 0.0)
    else:
        taper = 0.5 * (1.0 + np.cos(np.pi * (np.clip(x - lo, 0.0, alpha) / alpha)))
        out = np.where(x <= lo, 1.0, np.where(x >= hi, 0.0, taper))
        # pin the midpoint, which rounding in lo would otherwise move
        out = np.where(x == 0.5, 0.5, out)
    return float(out) if np.ndim(nu) == 0 else out


def rc_spectrum(alpha: float, nu):
    """Fourier transform of :func:`rc_amplitude` (unit area window).

    Exact zeros are returned at nonzero integers so the Nyquist property
    holds bit-exactly on integer-hit grids.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"roll-off must lie in [0, 1], got {alpha}")
    v = np.asarray(nu, dtype=float)
    x = 2.0 * alpha * v
    near = np.abs(np.abs(x) - 1.0) < 1e-8
    safe = np.where(near, 0.0, x)
    shape = np.where(near, np.pi / 4.0, np.cos(0.5 * np.pi * safe) / (1.0 - safe**2))
    out = np.sinc(v) * shape
    out = np.where((v == np.rint(v)) & (v != 0), 0.0, out)
    return float(out) if np.ndim(nu) == 0 else out


def subcarrier_spectrum(grid: DiscreteWarpGrid, n: int, alpha: float, oversample: int = 1):
    """Warped pulse ``G(w[q] - n) * sqrt(wdot[q])`` (no amplitude factor)."""
    w, wdot = grid.extended(oversample)
    return rc_spectrum(alpha, w - n) * np.sqrt(wdot)


def symbol_samples(grid: DiscreteWarpGrid, T: float, oversample: int = 1) -> int:
    """Samples in a duration ``T`` (base-symbol units), rounded per base rate."""
    return oversample * int(round(T * grid.samples_per_symbol))


def window_start(grid: DiscreteWarpGrid, n_samples: int, oversample: int = 1) -> int:
    """First sample of the ``n_samples`` window centered on frame sample ``frame/2``.

    Odd lengths are exactly symmetric about the pulse center; even lengths
    keep one extra sample on the early side.
    """
    frame = oversample * grid.Q
    if n_samples > frame:
        raise ConfigurationError(f"{n_samples} samples do not fit the {frame}-sample frame")
    return frame // 2 - n_samples // 2


def centered_pulse(spectrum: np.ndarray) -> np.ndarray:
    """Time pulse of a band-order spectrum, rolled to the frame center."""
    L = spectrum.size
    return np.roll(np.fft.ifft(np.fft.ifftshift(spectrum)), L // 2)


@dataclass(frozen=True)
class ConcentrationReport:
    alpha: float
    ratio: float
    iterations: int = 0
    converged: bool = True


def _check_active(grid: DiscreteWarpGrid, n: int):
    if not 0 <= n < grid.N:
        raise ValueError(f"subcarrier {n} is not active on a grid with N={grid.N}")


def concentration_ratio(grid: DiscreteWarpGrid, n: int, alpha: float, T: float,
                        oversample: int = 1) -> float:
    _check_active(grid, n)
    pulse = centered_pulse(subcarrier_spectrum(grid, n, alpha, oversample))
    energy = np.abs(pulse) ** 2
    n_T = min(symbol_samples(grid, T, oversample), oversample * grid.Q)
    start = window_start(grid, n_T, oversample)
    return float(energy[start:start + n_T].sum() / energy.sum())


def time_concentration(alpha: float, n: int, grid: DiscreteWarpGrid, T: float,
                       oversample: int = 1) -> ConcentrationReport:
    """Fraction of the subcarrier pulse energy inside the centered ``T`` window.

    ``T`` is in base-symbol units; values beyond the frame saturate to the
    full frame.  The total energy is taken over the whole frame.  With
    ``oversample > 1`` the pulse spectrum continues past the ``Q``-bin band
    (see :meth:`DiscreteWarpGrid.extended`), so edge subcarriers are not
    cut off at the band boundary.
    """
    return ConcentrationReport(alpha=alpha,
                               ratio=concentration_ratio(grid, n, alpha, T, oversample))


def solve_alpha(
    n: int,
    grid: DiscreteWarpGrid,
    T: float,
    zeta: float,
    alpha_bounds: tuple[float, float] = (0.0, 1.0),
    tol: float = 1e-6,
    oversample: int = 1,
    scan_step: float = 0.01,
) -> ConcentrationReport:
    """Roll-off minimizing ``|ratio(alpha) - zeta|`` within ``alpha_bounds``.

    Concentration is not monotone in the roll-off: a small roll-off leaves
    slowly decaying spectral tails that the warp spreads in time, while a
    large one makes the window itself longer than ``T``.  A uniform scan
    brackets every crossing of ``zeta``; when there is one, the crossing at
    the largest roll-off (best frequency containment) is refined by
    bisection to ``tol`` and the mismatch is then at the search tolerance.
    Without a crossing the target is either exceeded or missed everywhere;
    the scan minimizer of the mismatch is refined by a bounded scalar
    search and reported with ``converged=False``.
    """
    lo, hi = alpha_bounds
    if not (0.0 <= lo < hi <= 1.0):
        raise ConfigurationError(f"empty or invalid roll-off bounds {alpha_bounds}")
    if not 0.0 < zeta <= 1.0:
        raise ConfigurationError(f"concentration target must lie in (0, 1], got {zeta}")

    def ratio(a):
        return concentration_ratio(grid, n, float(a), T, oversample)

    steps = max(int(np.ceil((hi - lo) / scan_step)), 1)
    alphas = np.linspace(lo, hi, steps + 1)
    ratios = np.array([ratio(a) for a in alphas])
    it = alphas.size
    feasible = ratios >= zeta
    crossings = np.nonzero(feasible[:-1] != feasible[1:])[0]
    if crossings.size == 0:
        miss = np.abs(ratios - zeta)
        k = int(np.argmin(miss))
        a_lo, a_hi = alphas[max(k - 1, 0)], alphas[min(k + 1, steps)]
        res = minimize_scalar(lambda a: abs(ratio(a) - zeta), bounds=(a_lo, a_hi), method="bounded",
                              options={"xatol": tol})
        it += res.nfev
        a, r = (alphas[k], ratios[k]) if miss[k] <= res.fun else (float(res.x), ratio(res.x))
        return ConcentrationReport(alpha=float(a), ratio=float(r), iterations=it, converged=False)
    k = int(crossings[-1])
    a_ok, a_bad = (alphas[k], alphas[k + 1]) if feasible[k] else (alphas[k + 1], alphas[k])
    r_ok = ratios[k] if feasible[k] else ratios[k + 1]
    while abs(a_bad - a_ok) > tol:
        mid = 0.5 * (a_ok + a_bad)
        r_mid = ratio(mid)
        it += 1
        if r_mid >= zeta:
            a_ok, r_ok = mid, r_mid
        else:
            a_bad = mid
    return ConcentrationReport(alpha=float(a_ok), ratio=float(r_ok), iterations=it)


def solve_alphas(
    grid: DiscreteWarpGrid,
    T: float,
    zeta: float,
    inner_alpha: float,
    alpha_bounds: tuple[float, float] = (0.0, 1.0),
    oversample: int = 1,
) -> tuple[np.ndarray, list[ConcentrationReport]]:
    """Roll-off per subcarrier: solved on warped edges, ``inner_alpha`` elsewhere.

    Solves run on one band edge only; the mirrored edge reuses them, which
    keeps the profile exactly symmetric on symmetric grids.
    """
    alphas = np.full(grid.N, float(inner_alpha))
    reports: list[ConcentrationReport | None] = [None] * grid.N
    mirrored = _is_mirrored(grid)
    for n in range(grid.N):
        if not _is_edge(grid, n):
            reports[n] = time_concentration(inner_alpha, n, grid, T, oversample)
            continue
        twin = grid.N - 1 - n
        if mirrored and twin < n and reports[twin] is not None:
            rep = reports[twin]
        else:
            rep = solve_alpha(n, grid, T, zeta, alpha_bounds, oversample=oversample)
        alphas[n] = rep.alpha
        reports[n] = rep
    return alphas, reports


def _is_mirrored(grid: DiscreteWarpGrid) -> bool:
    runs = grid.bins_per_subcarrier
    return bool(np.array_equal(runs, runs[::-1]))


def _is_edge(grid: DiscreteWarpGrid, n: int) -> bool:
    e = grid.edge_count
    return n < e or n >= grid.N - e


def rc_energy(alpha: float) -> float:
    """Energy of the unit-area RC window, ``1 - alpha/4``."""
    return 1.0 - alpha / 4.0


__all__ = [
    "ConcentrationReport", "centered_pulse", "concentration_ratio", "rc_amplitude",
    "rc_energy", "rc_spectrum", "solve_alpha", "solve_alphas", "subcarrier_spectrum",
    "symbol_samples", "time_concentration", "window_start",
]
