import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import simpson

from tfwarp.warping import (ConfigurationError, WarpKind, WarpSpec, build_discrete_grid,
                            edge_profile_from_warp, eval_inverse, eval_w, eval_wdot,
                            export_grid_csv, import_grid_csv)

SIGMOIDS = [WarpSpec(WarpKind.SYMMETRIC_SIGMOID, a=20.0, b=2.0),
            WarpSpec(WarpKind.ASYMMETRIC_SIGMOID, a=-5.0, b=3.5)]
ALL_KINDS = [WarpSpec(), WarpSpec(WarpKind.TANH_EXAMPLE), *SIGMOIDS,
             WarpSpec(WarpKind.TABULATED, table_f=(-40.0, 0.0, 10.0, 40.0), table_w=(-30.0, 0.0, 9.0, 25.0))]


def simpson_w(spec, f, step=1.0 / 1024):
    """Composite Simpson integral of wdot from 0 to f."""
    if f == 0:
        return 0.0
    n = max(2, 2 * math.ceil(abs(f) / step / 2))
    x = np.linspace(0.0, f, n + 1)
    return float(simpson(eval_wdot(spec, x), x=x))


class TestOperators:
    def test_symmetric_sigmoid_midpoint(self):
        spec = WarpSpec(WarpKind.SYMMETRIC_SIGMOID, a=12.0, b=1.5)
        assert eval_wdot(spec, 12.0) == pytest.approx(0.75, abs=1e-15)
        assert eval_wdot(spec, -12.0) == pytest.approx(0.75, abs=1e-15)

    def test_symmetric_sigmoid_center_is_unwarped(self):
        spec = WarpSpec(WarpKind.SYMMETRIC_SIGMOID, a=40.0, b=1.0)
        assert eval_wdot(spec, 0.0) == pytest.approx(1.0, abs=1e-6)

    def test_asymmetric_sigmoid_upper_asymptote(self):
        spec = WarpSpec(WarpKind.ASYMMETRIC_SIGMOID, a=3.0, b=2.0)
        assert eval_wdot(spec, 1e4) == pytest.approx(0.5, abs=1e-12)

    def test_tanh_example_slope_and_values(self):
        spec = WarpSpec(WarpKind.TANH_EXAMPLE)
        assert eval_wdot(spec, 0.0) == 1.0
        assert eval_w(spec, 0.0) == 0.0
        assert eval_w(spec, 8.0) == pytest.approx(4 * math.tanh(1) + 4, abs=1e-12)
        assert eval_w(spec, 8.0) == pytest.approx(7.046377, abs=1e-6)
        assert simpson_w(spec, 8.0) == pytest.approx(eval_w(spec, 8.0), abs=1e-12)

    def test_identity(self):
        assert eval_w(WarpSpec(), 3.7) == 3.7
        assert eval_wdot(WarpSpec(), -2.0) == 1.0
        assert eval_inverse(WarpSpec(), 2.5) == 2.5

    def test_inverse_examples(self):
        exact = eval_w(WarpSpec(WarpKind.TANH_EXAMPLE), 8.0)
        assert eval_inverse(WarpSpec(WarpKind.TANH_EXAMPLE), exact) == pytest.approx(8.0, abs=1e-9)
        rounded = round(exact, 5)
        assert eval_inverse(WarpSpec(WarpKind.TANH_EXAMPLE), rounded) == pytest.approx(8.0, abs=1e-4)
        assert eval_inverse(SIGMOIDS[0], 0.0) == 0.0

    @pytest.mark.parametrize("spec", SIGMOIDS, ids=lambda s: s.kind.value)
    def test_closed_form_matches_simpson(self, spec):
        for f in (-37.3, -4.0, -0.5, 0.0, 0.25, 3.0, 19.5, 41.0):
            assert eval_w(spec, f) == pytest.approx(simpson_w(spec, f), abs=1e-10)

    def test_non_finite_input_is_rejected(self):
        with pytest.raises(ValueError):
            eval_wdot(WarpSpec(WarpKind.TANH_EXAMPLE), math.nan)
        with pytest.raises(ValueError):
            eval_w(SIGMOIDS[0], math.inf)

    def test_inverse_out_of_range(self):
        with pytest.raises(ValueError):
            eval_inverse(WarpSpec(WarpKind.TANH_EXAMPLE), 1e9)

    def test_bad_sigmoid_width(self):
        with pytest.raises(ConfigurationError):
            WarpSpec(WarpKind.SYMMETRIC_SIGMOID, a=1.0, b=0.0)

    @pytest.mark.parametrize("spec", ALL_KINDS, ids=lambda s: s.kind.value)
    def test_inverse_round_trip_sweep(self, spec):
        f = np.linspace(-60, 60, 1000)
        assert np.max(np.abs(eval_inverse(spec, eval_w(spec, f)) - f)) <= 1e-9

    @pytest.mark.parametrize("spec", ALL_KINDS, ids=lambda s: s.kind.value)
    def test_strictly_increasing(self, spec):
        f = np.linspace(-60, 60, 4001)
        assert np.all(eval_wdot(spec, f) > 0)
        assert np.all(np.diff(eval_w(spec, f)) > 0)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-30, 30), b=st.floats(0.1, 10), f=st.floats(-200, 200))
def test_sigmoid_slope_range_and_symmetry(a, b, f):
    sym = WarpSpec(WarpKind.SYMMETRIC_SIGMOID, a=a, b=b)
    asym = WarpSpec(WarpKind.ASYMMETRIC_SIGMOID, a=a, b=b)
    for spec in (sym, asym):
        assert 0.5 <= eval_wdot(spec, f) <= 1.0
    assert eval_wdot(sym, f) == eval_wdot(sym, -f)


@settings(max_examples=60, deadline=None)
@given(f=st.floats(-100, 100), kind=st.sampled_from([WarpKind.TANH_EXAMPLE, WarpKind.SYMMETRIC_SIGMOID,
                                                      WarpKind.ASYMMETRIC_SIGMOID]))
def test_inverse_round_trip_property(f, kind):
    spec = WarpSpec(kind, a=10.0, b=2.0)
    assert abs(eval_inverse(spec, eval_w(spec, f)) - f) <= 1e-9


class TestGrid:
    def test_identity_grid(self):
        g = build_discrete_grid(8, 4)
        assert g.Q == 32
        assert np.all(g.wdot_of_q == 0.25)
        assert np.allclose(np.diff(g.w_of_q), 0.25, atol=0, rtol=0)
        assert np.array_equal(g.w_of_q[g.center_bin], np.arange(8))
        assert np.array_equal(np.diff(g.center_bin), np.full(7, 4))

    def test_identity_grid_offset_convention(self):
        # the band center q = Q/2 sits halfway between subcarriers 3 and 4
        g = build_discrete_grid(8, 4)
        assert np.array_equal(g.w_of_q, np.arange(32) / 4 - 0.5)
        assert np.array_equal(g.center_bin, 4 * np.arange(8) + 2)

    def test_uniform_six_bin_profile(self):
        g = build_discrete_grid(122, 4, 7, [5, 5, 6, 6, 6, 6, 6])
        assert g.Q == 512
        assert int(g.bins_per_subcarrier[7:-7].sum()) == 432
        assert int(g.bins_per_subcarrier[:7].sum()) == 40 == int(g.bins_per_subcarrier[-7:].sum())
        assert set(np.unique(g.wdot_of_q)) == {1 / 4, 1 / 5, 1 / 6}
        assert g.check() == []

    def test_profile_reaching_one_eighth(self):
        g = build_discrete_grid(122, 4, 7, [4, 5, 5, 6, 6, 6, 8])
        assert g.Q == 512
        assert g.wdot_of_q.min() == 1 / 8 and g.wdot_of_q.max() == 1 / 4
        assert g.wdot_of_q[g.center_bin[0]] == 1 / 8
        assert g.unallocated_subcarriers == 6
        assert g.check() == []

    @pytest.mark.parametrize("profile, match", [
        ([6, 5], "non-decreasing"), ([3, 5], "at least"), ([5], "entries"), ([5.5, 6], "integers")])
    def test_profile_errors(self, profile, match):
        with pytest.raises(ConfigurationError, match=match):
            build_discrete_grid(20, 4, 2, profile)

    def test_budget_overflow(self):
        with pytest.raises(ConfigurationError, match="budget"):
            build_discrete_grid(122, 4, 7, [8] * 7, Q=512)

    def test_explicit_q_override(self):
        assert build_discrete_grid(8, 4, Q=64).Q == 64

    def test_mirror_symmetry(self):
        g = build_discrete_grid(122, 4, 7, [4, 5, 5, 6, 6, 6, 8])
        q = np.arange(1, g.Q)
        assert np.array_equal(g.w_of_q[g.Q - q], (g.N - 1) - g.w_of_q[q])
        assert np.array_equal(g.center_bin + g.center_bin[::-1], np.full(g.N, g.Q))

    def test_csv_round_trip(self, tmp_path):
        g = build_discrete_grid(17, 4, 3, [5, 6, 8])
        path = export_grid_csv(g, tmp_path / "g.csv")
        assert path.read_text().splitlines()[0] == "q,w_of_q,wdot_of_q"
        back = import_grid_csv(path, 17, 4, 3)
        assert np.array_equal(back.w_of_q, g.w_of_q)
        assert np.array_equal(back.center_bin, g.center_bin)
        assert back.check() == []

    def test_corrupted_csv_is_reported(self, tmp_path):
        g = build_discrete_grid(17, 4, 3, [5, 6, 8])
        path = export_grid_csv(g, tmp_path / "g.csv")
        lines = path.read_text().splitlines()
        q, w, d = lines[41].split(",")
        lines[41] = f"{q},{float(w) - 3},{d}"
        path.write_text("\n".join(lines) + "\n")
        problems = import_grid_csv(path, 17, 4, 3).check()
        assert any("increasing" in p for p in problems)

    def test_profile_from_tanh_warp(self):
        profile = edge_profile_from_warp(WarpSpec(WarpKind.TANH_EXAMPLE), 17, 4)
        assert profile == sorted(profile) and all(p > 4 for p in profile)
        assert build_discrete_grid(17, 4, len(profile), profile).check() == []


@st.composite
def grid_inputs(draw):
    u = draw(st.integers(1, 5))
    edge = draw(st.integers(0, 5))
    N = draw(st.integers(2 * edge + 1, 2 * edge + 40))
    steps = draw(st.lists(st.integers(0, 2), min_size=edge, max_size=edge))
    profile = list(np.cumsum(steps) + u + draw(st.integers(0, 2))) if edge else []
    if N % 2 == 0:
        mid = profile[-1] if (N == 2 * edge and profile) else u
        if mid % 2:
            N += 1
    return N, u, edge, [int(p) for p in profile]


@settings(max_examples=80, deadline=None)
@given(grid_inputs())
def test_grid_invariants_property(args):
    N, u, edge, profile = args
    g = build_discrete_grid(N, u, edge, profile)
    w, wd = g.w_of_q, g.wdot_of_q
    assert np.all(np.diff(w) > 0)
    assert np.all(wd > 0)
    assert np.all(w[g.center_bin] - np.arange(N) == 0)
    assert np.all(np.diff(g.center_bin) > 0)
    inner = g.bins_per_subcarrier == u
    assert np.all(wd[g.center_bin[inner]] == 1 / u)
    same = wd[1:] == wd[:-1]
    assert np.all(np.abs(np.diff(w) - wd[:-1])[same] <= 1e-12)
    q = np.arange(1, g.Q)
    assert np.allclose(w[g.Q - q] + w[q], N - 1, atol=1e-12, rtol=0)
    assert g.check() == []
