import math

import numpy as np
import pytest

from analyzers.wall_analyzer import WallAnalyzer, wall_position
from models.specs import DriveProfile, DriveTarget
from utils.errors import PhysicsValidationError


class TestWallPosition:
    def test_first_order_oscillation(self, make_cfg):
        """x1 = 2 |beta| cos(omega t - theta) without drives"""
        cfg = make_cfg(beta_mag=1.0, theta=0.3)
        analyzer = WallAnalyzer(cfg)
        for s in (0.0, 0.7, 2.5):
            assert analyzer.x1(s) == pytest.approx(2 * math.cos(2 * s - 0.3), abs=1e-14)

    def test_third_order_damping(self, make_cfg):
        """x3 = -(kappa_k^4 t^2 / 4) x1"""
        cfg = make_cfg(beta_mag=1.0)
        analyzer = WallAnalyzer(cfg)
        assert analyzer.x3(3.0) == pytest.approx(-2.25 * analyzer.x1(3.0), rel=1e-14)

    @pytest.mark.parametrize("s", [0.5, 3.0, 12.25])
    def test_second_order_closed_form(self, make_cfg, s):
        """The general second-order integral reduces to the resonant closed form for one mode"""
        cfg = make_cfg(mu_k=1.2)
        analyzer = WallAnalyzer(cfg)
        assert analyzer.x2_full(s) == pytest.approx(analyzer.x2_resonant(s), abs=1e-10)

    def test_trajectory_point(self, make_cfg):
        cfg = make_cfg(mu_k=1.0, beta_mag=1.0)
        t = float(cfg.seconds(2.0))
        point = WallAnalyzer(cfg).wall_position(t, max_order=3)
        eps = cfg.epsilon
        L = cfg.cavity.length
        expected = L * (1 + eps * point.x1_tilde + eps ** 2 * point.x2_tilde + eps ** 3 * point.x3)
        assert point.x_total == pytest.approx(expected, rel=1e-15)
        assert point.x0 == L
        assert point.gamma_k == pytest.approx(1 - eps ** 2 * 4.0 / 4, rel=1e-14)
        assert set(point.to_row()) == {"t", "x0", "x1_tilde", "x2_tilde", "x3", "x_total", "gamma_k"}

    def test_order_zero_is_rest_length(self, cfg):
        assert wall_position(cfg, 1e-13, max_order=0).x_total == cfg.cavity.length

    def test_cavity_drive_limits_order(self, make_cfg):
        drive = DriveProfile(target=DriveTarget.MODE_K, g=0.1, Omega=1e16)
        cfg = make_cfg(drives=[drive])
        with pytest.raises(PhysicsValidationError) as info:
            WallAnalyzer(cfg).wall_position(0.0, max_order=2)
        assert info.value.field == "drives"
        assert WallAnalyzer(cfg).wall_position(0.0, max_order=1).x_total == pytest.approx(cfg.cavity.length)

    def test_rejects_bad_order(self, cfg):
        with pytest.raises(PhysicsValidationError):
            WallAnalyzer(cfg).wall_position(0.0, max_order=4)


class TestCombinedForms:
    def test_drive_cancels_oscillation(self, make_cfg, wall_drive):
        """g = -2 |beta| at theta = pi/2 freezes the coherent oscillation"""
        beta = 1.0
        cfg = make_cfg(beta_mag=beta, theta=math.pi / 2, drives=[wall_drive(-2 * beta)])
        t_grid = cfg.seconds(np.linspace(0.0, 20.0, 41))
        amplitude = WallAnalyzer(cfg).oscillation_amplitude(t_grid, "imag_beta")
        assert amplitude <= 1e-6 * cfg.delta_L0 * beta

    def test_undriven_oscillation_survives(self, make_cfg):
        cfg = make_cfg(beta_mag=1.0, theta=math.pi / 2)
        t_grid = cfg.seconds(np.linspace(0.0, 20.0, 41))
        amplitude = WallAnalyzer(cfg).oscillation_amplitude(t_grid, "imag_beta")
        assert amplitude > cfg.delta_L0

    def test_real_beta_family(self, make_cfg):
        """theta = pi flips the sign of the coherent term"""
        cfg = make_cfg(beta_mag=1.0, theta=math.pi)
        analyzer = WallAnalyzer(cfg)
        t = float(cfg.seconds(0.0))
        x = analyzer.wall_position_combined(t, "real_beta")
        assert x == pytest.approx(cfg.cavity.length * (1 - 2 * cfg.epsilon), rel=1e-14)

    def test_theta_outside_family(self, make_cfg):
        cfg = make_cfg(beta_mag=1.0, theta=0.4)
        with pytest.raises(PhysicsValidationError) as info:
            WallAnalyzer(cfg).wall_position_combined(0.0, "imag_beta")
        assert info.value.field == "state.theta"

    def test_unknown_theta_case(self, cfg):
        with pytest.raises(PhysicsValidationError):
            WallAnalyzer(cfg).wall_position_combined(0.0, "complex_beta")

    def test_needs_degenerate_resonance(self, make_cfg):
        cfg = make_cfg(omega_tilde=3.0, beta_mag=1.0)
        with pytest.raises(PhysicsValidationError) as info:
            WallAnalyzer(cfg).wall_position_combined(0.0, "real_beta")
        assert info.value.field == "mechanics.omega"

    def test_damping_time(self, make_cfg):
        """t_d = N_b(0) / (eps |beta| mu_k^2 omega_k) for theta = -pi/2"""
        cfg = make_cfg(mu_k=1.0, beta_mag=1.0, theta=-math.pi / 2)
        expected = 1.0 / (cfg.epsilon * cfg.omega_k)
        assert WallAnalyzer(cfg).damping_time() == pytest.approx(expected, rel=1e-12)

    def test_damping_time_needs_negative_phase(self, make_cfg):
        cfg = make_cfg(mu_k=1.0, beta_mag=1.0, theta=math.pi / 2)
        with pytest.raises(PhysicsValidationError):
            WallAnalyzer(cfg).damping_time()
