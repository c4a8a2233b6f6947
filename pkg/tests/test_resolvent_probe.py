import math

import numpy as np
import pytest

from semigroup_regularity import (
    ADAPTIVE,
    FULL,
    ConfigError,
    FitError,
    ScanPolicy,
    SingularResolventError,
    SystemConfig,
    TruncationWarning,
    Verdict,
    block_from_values,
    block_resolvent_norm,
    build_spectrum,
    classify,
    fit_decay_exponent,
    global_resolvent_norm,
    mode_block,
    sweep,
)
from semigroup_regularity.dense_oracle import assemble_dense, dense_resolvent_norm
from semigroup_regularity.resolvent_probe import SweepResult, fit_loglog, resonance_limit, scan_indices

from conftest import random_coercive_config, standard_config


def unit_decoupled_block():
    # a1 = a2 = b1 = b2 = 1, alpha = gamma = 1, beta = 0
    return block_from_values(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0)


class TestBlockResolventNorm:
    def test_golden_ratio_at_zero(self):
        # each 2x2 sub-block is [[0,1],[-1,-1]]; its Gram matrix [[1,1],[1,2]] has
        # characteristic polynomial x^2 - 3x + 1, so sigma_min^2 = (3 - sqrt 5)/2
        sigma_min = math.sqrt((3 - math.sqrt(5)) / 2)
        assert block_resolvent_norm(unit_decoupled_block(), 0.0) == pytest.approx(1 / sigma_min, abs=1e-12)
        assert 1 / sigma_min == pytest.approx(1.6180339887, abs=1e-10)

    def test_high_frequency_decay(self):
        lam = 1e6
        assert lam * block_resolvent_norm(unit_decoupled_block(), lam) == pytest.approx(1.0, abs=1e-5)

    def test_zero_frequency_is_inverse_generator(self):
        blk = mode_block(standard_config(0.5, 0.5, n=10), 9.0)
        expected = np.linalg.norm(np.linalg.inv(blk.matrix), 2)
        assert block_resolvent_norm(blk, 0.0) == pytest.approx(expected, rel=1e-12)

    def test_matches_complex_inverse(self):
        blk = mode_block(standard_config(0.3, 0.7, n=10), 16.0)
        for lam in (0.5, 3.0, 4.0, 40.0):
            inv = np.linalg.inv(1j * lam * np.eye(4) - blk.matrix)
            assert block_resolvent_norm(blk, lam) == pytest.approx(np.linalg.norm(inv, 2), rel=1e-12)

    def test_singular_raises(self):
        # undamped oscillator: i*1 is an eigenvalue
        blk = block_from_values(1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0)
        with pytest.raises(SingularResolventError) as exc:
            block_resolvent_norm(blk, 1.0)
        assert exc.value.lam == 1.0 and exc.value.omega == 1.0


class TestGlobalResolventNorm:
    def test_single_mode_equals_block(self):
        cfg = standard_config(0.4, 0.6, n=1)
        for lam in (0.0, 0.7, 5.0, 1e3):
            g = global_resolvent_norm(cfg, lam)
            assert g.norm == block_resolvent_norm(mode_block(cfg, cfg.omegas[0]), lam)
            assert g.mode_index == 0

    def test_two_modes_against_dense(self):
        cfg = standard_config(0.5, 0.5, n=2)
        dense = assemble_dense(cfg, 2)
        for lam in (0.0, 1.0, 2.0, 17.0):
            g = global_resolvent_norm(cfg, lam, FULL).norm
            assert g == pytest.approx(dense_resolvent_norm(dense, lam), rel=1e-10)

    def test_adaptive_matches_full(self):
        cfg = standard_config(0.25, 0.5, n=2000)
        for lam in (1e3, 37.5, 1999.0):
            a = global_resolvent_norm(cfg, lam, ADAPTIVE)
            f = global_resolvent_norm(cfg, lam, FULL)
            assert a.norm == pytest.approx(f.norm, rel=1e-9)
            assert a.argmax_omega == f.argmax_omega

    def test_adaptive_scan_covers_resonance(self):
        cfg = standard_config(0.5, 0.5, n=2000)
        idx = scan_indices(cfg, 500.0, ADAPTIVE)
        assert np.any(cfg.omegas[idx] == 500.0**2)
        assert idx.size < 2000

    def test_sup_dominates_every_mode(self):
        cfg = random_coercive_config(np.random.default_rng(1), 50)
        for lam in (0.3, 2.0, 25.0):
            g = global_resolvent_norm(cfg, lam, FULL).norm
            per_mode = [block_resolvent_norm(mode_block(cfg, w), lam) for w in cfg.omegas]
            assert g >= max(per_mode) * (1 - 1e-15)
            assert g == max(per_mode)

    def test_even_in_lambda(self):
        cfg = standard_config(0.25, 0.75, n=500)
        for lam in (0.5, 12.0, 333.0):
            a = global_resolvent_norm(cfg, lam).norm
            b = global_resolvent_norm(cfg, -lam).norm
            assert a == pytest.approx(b, rel=1e-12)

    def test_scan_policy_coerce(self):
        assert ScanPolicy.coerce("full") == FULL
        assert ScanPolicy.coerce(ADAPTIVE) is ADAPTIVE
        with pytest.raises(ConfigError):
            ScanPolicy.coerce("partial")


class TestSweep:
    def test_two_points_hit_endpoints(self):
        res = sweep(standard_config(0.5, 0.5, n=100), 1.0, 100.0, 2)
        assert res.lambdas.tolist() == [1.0, 100.0]
        assert len(list(res.rows())) == 2

    def test_grid_is_log_spaced(self):
        res = sweep(standard_config(0.5, 0.5, n=100), 1.0, 1e4, 5)
        np.testing.assert_allclose(res.lambdas, [1, 10, 100, 1e3, 1e4], rtol=1e-12)

    def test_kelvin_voigt_bounded_scaled_norm(self):
        res = sweep(standard_config(1.0, 1.0), 1e2, 1e6, 25)
        scaled = res.lambdas * res.norms
        assert np.all(np.isfinite(scaled))
        assert scaled.max() / scaled.min() < 10

    @pytest.mark.parametrize("args", [(0.0, 10.0, 5), (10.0, 1.0, 5), (1.0, 10.0, 1), (1.0, 10.0, 2.5)])
    def test_invalid_grid(self, args):
        with pytest.raises(ConfigError):
            sweep(standard_config(0.5, 0.5, n=10), *args)

    def test_thread_count_does_not_change_result(self, monkeypatch):
        cfg = standard_config(0.25, 0.5, n=500)
        monkeypatch.setenv("RESOLVENT_PROBE_THREADS", "1")
        a = sweep(cfg, 1.0, 500.0, 21)
        monkeypatch.setenv("RESOLVENT_PROBE_THREADS", "4")
        b = sweep(cfg, 1.0, 500.0, 21)
        np.testing.assert_array_equal(a.norms, b.norms)


class TestFit:
    def test_inverse_power(self):
        lam = np.geomspace(1, 1e4, 41)
        slope, intercept, r2 = fit_loglog(lam, 1 / lam)
        assert slope == pytest.approx(-1, abs=1e-12)
        assert intercept == pytest.approx(0, abs=1e-10)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_intercept(self):
        lam = np.geomspace(1e2, 1e6, 97)
        fit = fit_decay_exponent(SweepResult.from_arrays(lam, 3 * lam**-0.5))
        assert fit.slope == pytest.approx(-0.5, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(3), abs=1e-10)
        assert fit.window == pytest.approx((1e4, 1e6))
        assert fit.n_points == 49

    def test_real_sweep_gevrey_slope(self):
        res = sweep(standard_config(0.25, 0.5), 10.0, 2000.0, 97)
        assert fit_decay_exponent(res).slope == pytest.approx(-0.5, abs=0.05)

    def test_too_few_points(self):
        with pytest.raises(FitError):
            fit_loglog([1.0, 2.0], [1.0, 0.5])
        with pytest.raises(FitError):
            fit_decay_exponent(SweepResult.from_arrays([1.0, 2.0], [1.0, 0.5]))

    def test_bad_window(self):
        res = SweepResult.from_arrays(np.geomspace(1, 10, 5), np.ones(5))
        with pytest.raises(ConfigError):
            fit_decay_exponent(res, 0.0)


class TestClassify:
    def test_analytic(self):
        v = classify(standard_config(0.5, 0.5), 10.0, 2000.0)
        assert v.verdict is Verdict.ANALYTIC
        assert v.fitted_slope == pytest.approx(-1, abs=0.05)
        assert v.delta is None

    def test_kelvin_voigt_default_range(self):
        with pytest.warns(TruncationWarning):
            v = classify(standard_config(1.0, 1.0))
        assert v.verdict is Verdict.ANALYTIC

    def test_gevrey_quarter(self):
        v = classify(standard_config(0.25, 1.0), 10.0, 2000.0)
        assert v.verdict is Verdict.GEVREY
        assert v.delta == 2.0

    def test_gevrey_tenth(self):
        # a finer spectrum resolves the narrow resonances of weak damping
        cfg = standard_config(0.1, 0.1, n=20000, length=10 * math.pi)
        v = classify(cfg, 10.0, 2000.0)
        assert v.verdict is Verdict.GEVREY
        assert v.delta == pytest.approx(5.0)
        assert v.fitted_slope == pytest.approx(-0.2, abs=0.05)

    def test_inconclusive_on_poor_fit(self):
        v = classify(standard_config(0.25, 0.5), 10.0, 2000.0, r2_min=1.0 + 1e-9)
        assert v.verdict is Verdict.INCONCLUSIVE

    def test_no_warning_inside_resolved_range(self, recwarn):
        classify(standard_config(0.5, 0.5, n=500), 1.0, 400.0, 33)
        assert not [w for w in recwarn if issubclass(w.category, TruncationWarning)]

    def test_resonance_limit(self):
        assert resonance_limit(standard_config(0.5, 0.5)) == 2000.0

    def test_as_dict_keys(self):
        d = classify(standard_config(0.5, 0.5, n=200), 1.0, 150.0, 21).as_dict()
        assert set(d) >= {"verdict", "s", "delta", "fitted_slope", "r_squared"}


def test_noncoercive_system_still_probed():
    sp = build_spectrum("dirichlet_1d", {"length": math.pi}, 20)
    cfg = SystemConfig(1, 0.9, 1, 0.5, 0.5, sp, allow_noncoercive=True)
    assert global_resolvent_norm(cfg, 3.0).norm > 0
