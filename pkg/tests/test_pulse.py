import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from tfwarp.experiments import PRESETS, build_grid, design_alphas
from tfwarp.pulse import (concentration_ratio, rc_amplitude, rc_energy, rc_spectrum, solve_alpha,
                          solve_alphas, subcarrier_spectrum, time_concentration)
from tfwarp.warping import ConfigurationError, build_discrete_grid

FIG2 = PRESETS["fig2-illustration"]


def dense_concentration(grid, n, alpha, T, factor=64):
    """Energy fraction of the continuous-time pulse inside |t| <= T/2.

    The pulse is the exact trigonometric sum over the band bins, evaluated
    on a grid ``factor`` times finer than the frame sampling.
    """
    Q, u = grid.Q, grid.u
    spectrum = rc_spectrum(alpha, grid.w_of_q - n) * np.sqrt(grid.wdot_of_q)
    freqs = (np.arange(Q) - Q // 2) / u
    t = np.linspace(-u / 2, u / 2, factor * Q + 1)
    pulse = np.exp(2j * np.pi * np.outer(t, freqs)) @ spectrum
    energy = np.abs(pulse) ** 2
    inside = np.abs(t) <= T / 2
    return trapezoid(energy[inside], t[inside]) / trapezoid(energy, t)


class TestRcWindow:
    def test_examples(self):
        assert rc_amplitude(0.5, 0.0) == 1.0
        assert rc_amplitude(0.5, 0.5) == pytest.approx(0.5, abs=1e-15)
        assert rc_amplitude(0.25, 0.7) == 0.0

    def test_rectangular_limit(self):
        assert rc_amplitude(0.0, 0.49) == 1.0 and rc_amplitude(0.0, 0.51) == 0.0

    def test_domain(self):
        for bad in (-0.1, 1.2):
            with pytest.raises(ValueError):
                rc_amplitude(bad, 0.0)
            with pytest.raises(ValueError):
                rc_spectrum(bad, 0.0)

    def test_spectrum_is_transform_of_window(self):
        # numerical Fourier integral of the window as an independent oracle
        for alpha in (0.0, 0.3, 1.0):
            x = np.linspace(-1, 1, 400001)
            win = rc_amplitude(alpha, x)
            for nu in (0.0, 0.37, 1.5, 2.25):
                ref = trapezoid(win * np.cos(2 * np.pi * nu * x), x)
                assert rc_spectrum(alpha, nu) == pytest.approx(ref, abs=2e-5)

    def test_energy(self):
        x = np.linspace(-1, 1, 400001)
        for alpha in (0.05, 0.4, 1.0):
            assert rc_energy(alpha) == pytest.approx(trapezoid(rc_amplitude(alpha, x) ** 2, x), abs=1e-6)


@settings(max_examples=50, deadline=None)
@given(alpha=st.floats(0.0, 1.0), nu=st.floats(0.0, 2.0))
def test_window_shape_property(alpha, nu):
    value = rc_amplitude(alpha, nu)
    assert 0.0 <= value <= 1.0
    assert value == rc_amplitude(alpha, -nu)
    if nu <= (1 - alpha) / 2 and nu != 0.5:
        assert value == 1.0
    if nu >= (1 + alpha) / 2 and nu != 0.5:
        assert value == 0.0
    if alpha == 0:
        assert rc_amplitude(alpha, 0.5) == 1.0
    else:
        assert rc_amplitude(alpha, 0.5) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(alpha=st.floats(0.0, 0.999), k=st.integers(-50, 50).filter(lambda k: k != 0))
def test_nyquist_zeros_property(alpha, k):
    assert rc_spectrum(alpha, float(k)) == 0.0


def test_nyquist_on_identity_grid():
    g = build_discrete_grid(17, 4)
    for alpha in (0.0, 0.03, 0.5, 0.99):
        for n in range(17):
            spec = subcarrier_spectrum(g, n, alpha)
            others = np.delete(g.center_bin, n)
            assert np.all(spec[others] == 0.0)
            assert spec[g.center_bin[n]] == pytest.approx(0.5)


class TestConcentration:
    def test_full_frame(self):
        g = build_discrete_grid(17, 4)
        assert time_concentration(1.0, 8, g, T=4.0).ratio == pytest.approx(1.0, abs=1e-15)

    def test_dense_oracle(self):
        g = build_discrete_grid(17, 4)
        oracle = dense_concentration(g, 8, 0.0, 1.1)
        assert oracle == pytest.approx(0.9998420122, abs=1e-6)
        assert time_concentration(0.0, 8, g, 1.1).ratio == pytest.approx(oracle, abs=5e-4)
        assert concentration_ratio(g, 8, 0.0, 1.1, oversample=4) == pytest.approx(oracle, abs=5e-4)

    def test_roll_off_lengthens_the_window(self):
        # the RC time window of roll-off alpha spans 1 + alpha base symbols
        g = build_discrete_grid(17, 4)
        assert time_concentration(0.03, 8, g, 1.1).ratio > time_concentration(1.0, 8, g, 1.1).ratio

    def test_inactive_subcarrier(self):
        g = build_discrete_grid(17, 4)
        with pytest.raises(ValueError):
            time_concentration(0.1, 17, g, 1.1)

    def test_ratio_bounded(self):
        g = build_grid(PRESETS["warped"])
        for n in (0, 3, 60):
            assert 0 < concentration_ratio(g, n, 0.5, 1.1) <= 1


@settings(max_examples=12, deadline=None)
@given(T=st.floats(1.0, 1.5), n=st.integers(2, 14))
def test_concentration_falls_once_window_exceeds_symbol(T, n):
    g = build_discrete_grid(17, 4)
    alphas = np.linspace(0, 1, 11)
    alphas = alphas[alphas >= max(0.1, T - 1 + 0.25)]
    ratios = [time_concentration(a, n, g, T).ratio for a in alphas]
    assert np.all(np.diff(ratios) <= 1e-12)


class TestSolver:
    def test_target_met_only_at_lower_bound(self):
        # the wider window loses concentration, so only the lower bound hits zeta
        g = build_discrete_grid(17, 4)
        low = 0.5
        zeta = time_concentration(low, 8, g, 1.1).ratio
        rep = solve_alpha(8, g, 1.1, zeta, alpha_bounds=(low, 1.0))
        assert rep.alpha == pytest.approx(low, abs=1e-4)

    def test_exceeded_everywhere_returns_closest(self):
        g = build_discrete_grid(17, 4)
        rep = solve_alpha(8, g, T=4.0, zeta=0.5, alpha_bounds=(0.1, 0.6))
        assert not rep.converged and rep.ratio >= 0.5
        brute = min(abs(concentration_ratio(g, 8, a, 4.0) - 0.5) for a in np.linspace(0.1, 0.6, 51))
        assert abs(rep.ratio - 0.5) <= brute + 1e-12

    def test_unreachable_target_reports_best(self):
        g = build_discrete_grid(17, 4)
        rep = solve_alpha(8, g, 1.1, 1.0)
        assert not rep.converged and rep.ratio < 1.0
        grid_best = max(time_concentration(a, 8, g, 1.1).ratio for a in np.linspace(0, 1, 101))
        assert rep.ratio >= grid_best - 1e-12

    def test_empty_bounds(self):
        g = build_discrete_grid(17, 4)
        for bounds in ((0.5, 0.5), (0.6, 0.2), (-0.1, 0.5)):
            with pytest.raises(ConfigurationError):
                solve_alpha(8, g, 1.1, 0.999, alpha_bounds=bounds)

    @pytest.mark.parametrize("n, zeta", [(0, 0.999), (1, 0.999), (2, 0.999), (3, 0.9985), (4, 0.995)])
    def test_brute_force_optimality(self, n, zeta):
        g = build_grid(FIG2)
        rep = solve_alpha(n, g, FIG2.T, zeta)
        miss = abs(rep.ratio - zeta)
        brute = min(abs(concentration_ratio(g, n, a, FIG2.T) - zeta) for a in np.arange(0, 1.0005, 1e-3))
        assert miss <= brute + 1e-7
        assert rep.ratio == pytest.approx(concentration_ratio(g, n, rep.alpha, FIG2.T), abs=1e-15)

    def test_fig2_profile_symmetric(self):
        alphas, _ = design_alphas(FIG2)
        assert np.array_equal(alphas, alphas[::-1])

    def test_fig2_profile_non_increasing_toward_center(self):
        alphas, _ = design_alphas(FIG2)
        lower = alphas[: FIG2.N // 2 + 1]
        assert np.all(np.diff(lower) <= 0)

    def test_reference_edge_bracket(self):
        preset = PRESETS["warped"]
        alphas, _ = design_alphas(preset)
        e = build_grid(preset).edge_count
        assert 0.8 <= alphas[0] <= 1.0
        assert 0.03 <= alphas[e - 1] <= 0.1

    def test_inner_subcarriers_keep_fixed_roll_off(self):
        alphas, _ = design_alphas(PRESETS["warped"])
        assert np.all(alphas[7:-7] == 0.03)

    def test_solve_alphas_mirror(self):
        g = build_discrete_grid(21, 4, 3, [5, 6, 8])
        alphas, reports = solve_alphas(g, 1.1, 0.999, 0.03)
        assert np.array_equal(alphas, alphas[::-1])
        assert len(reports) == 21 and all(r is not None for r in reports)


def test_alpha_non_decreasing_in_zeta():
    g = build_grid(FIG2)
    for n in range(4):
        alphas = [solve_alpha(n, g, FIG2.T, z).alpha for z in (0.99, 0.999, 0.9999)]
        assert alphas[0] <= alphas[1] <= alphas[2], f"subcarrier {n}: {alphas}"
