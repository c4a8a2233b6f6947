import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from semigroup_regularity import (
    ConfigError,
    ModalState,
    block_eigenvalues,
    block_exponential,
    block_from_values,
    dissipation_rate,
    mode_block,
)
from semigroup_regularity.dense_oracle import assemble_dense
from semigroup_regularity.evolution import (
    evolve,
    expm_pade,
    portrait_slope,
    propagate,
    smoothing_probe,
    spectral_portrait,
)

from conftest import random_coercive_config, standard_config


class TestBlockExponential:
    def test_identity_at_zero(self):
        blk = mode_block(standard_config(0.5, 0.5, n=5), 25.0)
        np.testing.assert_array_equal(block_exponential(blk, 0.0), np.eye(4))

    def test_critical_damping_jordan_form(self):
        # each sub-block is [[0,1],[-1,-2]]: double eigenvalue -1, not diagonalizable
        blk = block_from_values(1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 0.0, 2.0)
        for t in (0.1, 1.0, 3.7):
            E = block_exponential(blk, t)
            sub = math.exp(-t) * np.array([[1 + t, t], [-t, 1 - t]])
            np.testing.assert_allclose(E[:2, :2], sub, atol=1e-12)
            np.testing.assert_allclose(E[2:, 2:], sub, atol=1e-12)
            np.testing.assert_allclose(E[:2, 2:], 0, atol=1e-14)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            block_exponential(mode_block(standard_config(0.5, 0.5, n=3), 1.0), -1.0)

    def test_against_scipy(self):
        cfg = random_coercive_config(np.random.default_rng(4), 30)
        for omega in cfg.omegas[::7]:
            blk = mode_block(cfg, omega)
            for t in (1e-3, 0.5, 4.0):
                np.testing.assert_allclose(block_exponential(blk, t), expm(t * blk.matrix), atol=1e-10)

    def test_pade_against_scipy(self):
        rng = np.random.default_rng(8)
        for scale in (1e-3, 1.0, 50.0):
            A = scale * rng.standard_normal((4, 4))
            np.testing.assert_allclose(expm_pade(A), expm(A), rtol=1e-10, atol=1e-12 * np.linalg.norm(expm(A)))

    def test_semigroup_law(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            cfg = random_coercive_config(rng, 20)
            blk = mode_block(cfg, cfg.omegas[rng.integers(20)])
            s, t = rng.uniform(0, 3, 2)
            lhs = block_exponential(blk, s + t)
            rhs = block_exponential(blk, s) @ block_exponential(blk, t)
            np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_generator_finite_difference(self):
        blk = mode_block(standard_config(0.3, 0.6, n=5), 9.0)
        h = 1e-7
        approx = (block_exponential(blk, h) - np.eye(4)) / h
        np.testing.assert_allclose(approx, blk.matrix, atol=1e-5 * np.abs(blk.matrix).max())

    def test_energy_derivative_is_dissipation(self):
        rng = np.random.default_rng(6)
        cfg = random_coercive_config(rng, 20)
        blk = mode_block(cfg, cfg.omegas[5])
        Z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        h = 1e-6
        energy = [np.linalg.norm(block_exponential(blk, t) @ Z) ** 2 for t in (0.0, h, 2 * h)]
        # one-sided second-order difference at t = 0
        deriv = (-3 * energy[0] + 4 * energy[1] - energy[2]) / (2 * h)
        assert deriv == pytest.approx(2 * dissipation_rate(blk, Z), rel=1e-5)


@settings(max_examples=100, deadline=None)
@given(
    omega=st.floats(1e-2, 1e6),
    mu=st.floats(0.01, 1.0),
    theta=st.floats(0.01, 1.0),
    frac=st.floats(0.0, 0.95),
    t=st.floats(0.0, 50.0),
)
def test_contraction(omega, mu, theta, frac, t):
    b1, b2 = omega**mu, omega**theta
    beta = math.sqrt(frac * b2 / b1)
    blk = block_from_values(omega, omega, omega, b1, b2, 1.0, beta, 1.0)
    assert np.linalg.norm(block_exponential(blk, t), 2) <= 1 + 1e-10


class TestEvolve:
    def test_zero_state(self):
        cfg = standard_config(0.5, 0.5, n=10)
        traj = evolve(cfg, ModalState.zeros(10), [0.0, 1.0, 5.0])
        assert all(s.energy_norm == 0.0 for s in traj)

    def test_single_mode(self):
        cfg = standard_config(0.25, 0.75, n=1)
        Z = np.array([[1.0, 0.5j, -0.2, 0.1]])
        traj = evolve(cfg, ModalState(Z), [0.0, 0.3, 2.0])
        for s in traj:
            expected = expm(s.t * cfg.blocks[0]) @ Z[0]
            np.testing.assert_allclose(s.state.coeffs[0], expected, atol=1e-12)
            assert s.generator_norm == pytest.approx(np.linalg.norm(cfg.blocks[0] @ expected), rel=1e-10)

    def test_against_dense_expm(self):
        cfg = random_coercive_config(np.random.default_rng(12), 64)
        Z = ModalState.random(64, np.random.default_rng(0))
        dense = assemble_dense(cfg, 64).matrix
        for t in (0.1, 1.0, 10.0):
            mine = propagate(cfg, Z, t).as_vector()
            ref = expm(t * dense) @ Z.as_vector()
            assert np.linalg.norm(mine - ref) <= 1e-8

    def test_energy_nonincreasing(self):
        cfg = random_coercive_config(np.random.default_rng(3), 64)
        traj = evolve(cfg, ModalState.random(64, np.random.default_rng(1)), np.linspace(0, 5, 51))
        e = np.array([s.energy_norm for s in traj])
        assert e[0] == pytest.approx(1.0)
        assert np.all(np.diff(e) <= 1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ConfigError):
            evolve(standard_config(0.5, 0.5, n=10), ModalState.zeros(9), [0.0, 1.0])

    @pytest.mark.parametrize("grid", [[], [1.0, 0.5], [-1.0, 1.0]])
    def test_bad_grid(self, grid):
        with pytest.raises(ConfigError):
            evolve(standard_config(0.5, 0.5, n=3), ModalState.zeros(3), grid)

    def test_bad_state_shape(self):
        with pytest.raises(ConfigError):
            ModalState(np.zeros(5))


class TestEigenvalues:
    def test_quadratic_formula(self):
        # (p, v) sub-block [[0, 2], [-2, -2]]: lambda^2 + 2 lambda + 4 = 0
        blk = block_from_values(4.0, 4.0, 4.0, 2.0, 2.0, 1.0, 0.0, 1.0)
        root = complex(-1, math.sqrt(3))
        expected = np.array([root.conjugate(), root.conjugate(), root, root])
        np.testing.assert_allclose(block_eigenvalues(blk), expected, atol=1e-12)

    def test_stability_margin(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            cfg = random_coercive_config(rng, 40)
            w = np.linalg.eigvals(cfg.blocks)
            assert w.real.max() < 0

    def test_portrait_rows(self):
        rows = spectral_portrait(standard_config(0.5, 0.5, n=20), (3, 7))
        assert len(rows) == 20
        assert rows[0].omega == 9.0 and rows[-1].omega == 49.0

    def test_portrait_range_errors(self):
        with pytest.raises(ConfigError):
            spectral_portrait(standard_config(0.5, 0.5, n=20), (0, 3))

    @pytest.mark.parametrize("mu,expected", [(1.0, 1.0), (0.5, 1.0), (0.25, 0.5)])
    def test_portrait_slope(self, mu, expected):
        rows = spectral_portrait(standard_config(mu, mu))
        assert portrait_slope(rows) == pytest.approx(expected, abs=0.05)


class TestSmoothing:
    def test_kelvin_voigt_rate(self):
        rep = smoothing_probe(standard_config(1.0, 1.0), np.geomspace(1e-4, 1e-1, 13))
        assert rep.slope == pytest.approx(-1.0, abs=0.2)

    def test_long_time_decay(self):
        rep = smoothing_probe(standard_config(0.5, 0.5, n=200), [100.0])
        assert rep.sup_norm[0] < 1e-6
        assert rep.slope is None

    def test_rejects_nonpositive_times(self):
        with pytest.raises(ValueError):
            smoothing_probe(standard_config(0.5, 0.5, n=5), [0.0, 1.0])
