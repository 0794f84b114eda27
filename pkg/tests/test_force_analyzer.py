import math

import pytest

from analyzers.force_analyzer import (
    ForceAnalyzer,
    cutoff_divergence,
    extrapolate_static_force,
    regularized_vacuum_force,
    static_force,
    two_cavity_force,
    vacuum_force_sum,
)
from models.constants import C, HBAR
from models.specs import CavitySpec, InitialState, MechanicalSpec
from models.system import make_system
from utils.errors import NumericalError, PhysicsValidationError

L0 = 10e-6
TAU = 1e-6


@pytest.fixture
def reference_cfg():
    """1e-16 kg mirror at omega = 2 pi c / L0"""

    def factory(beta_sq=1.0):
        cavity = CavitySpec(length=L0, num_modes=4)
        mech = MechanicalSpec(omega=2 * cavity.fundamental_frequency, mirror_mass=1e-16, length=L0)
        return make_system(cavity, mech, InitialState(beta_mag=math.sqrt(beta_sq)))

    return factory


class TestStaticForce:
    def test_value(self):
        assert static_force(L0) == pytest.approx(-HBAR * math.pi * C / (24 * L0 ** 2), rel=1e-15)
        assert static_force(L0) < 0

    def test_extrapolated_cutoff_limit(self):
        """Removing the cutoff divergence and extrapolating gamma -> 0 recovers -hbar pi c / 24 L^2"""
        gammas = [1e-3 * L0 / (math.pi * C) / 2 ** j for j in range(3)]
        assert extrapolate_static_force(L0, gammas) == pytest.approx(static_force(L0), rel=1e-8)

    def test_subtraction(self):
        """The raw cutoff sum minus the divergent term equals the regularized force"""
        gamma = 0.05 * L0 / (math.pi * C)
        raw = vacuum_force_sum(L0, gamma)
        assert raw - cutoff_divergence(gamma) == pytest.approx(regularized_vacuum_force(L0, gamma), rel=1e-9)

    def test_two_cavities(self):
        """A far outer mirror leaves the single-cavity force"""
        gamma = 1e-3 * L0 / (math.pi * C)
        force = two_cavity_force(L0, 1e4 * L0, gamma)
        assert force == pytest.approx(regularized_vacuum_force(L0, gamma), rel=1e-6)

    def test_cutoff_too_large(self):
        with pytest.raises(PhysicsValidationError) as info:
            regularized_vacuum_force(L0, 1.0)
        assert info.value.field == "gamma"

    def test_needs_two_cutoffs(self):
        with pytest.raises(PhysicsValidationError):
            extrapolate_static_force(L0, [1e-20])


class TestCasimirForce:
    def test_static_limit(self, reference_cfg):
        result = ForceAnalyzer(reference_cfg(50.0)).casimir_force(L0, 0.0)
        assert result.F_dynamic == 0.0
        assert result.F_total == static_force(L0)

    def test_dynamic_term(self, reference_cfg):
        """N_bar eps^2 hbar omega_k^3 tau^2 / (6 L)"""
        cfg = reference_cfg(2.0)
        result = ForceAnalyzer(cfg).casimir_force(L0, TAU, "fixed")
        expected = 2.0 * cfg.epsilon ** 2 * HBAR * cfg.omega_k ** 3 * TAU ** 2 / (6 * L0)
        assert result.F_dynamic == pytest.approx(expected, rel=1e-12)
        assert result.neglects_outer_oscillation

    @pytest.mark.parametrize("mode", ["tracking", "fixed"])
    def test_critical_length_matches_closed_form(self, reference_cfg, mode):
        analyzer = ForceAnalyzer(reference_cfg(50.0))
        L_c = analyzer.critical_length(TAU, mode)
        assert L_c == pytest.approx(analyzer.analytic_critical_length(TAU, mode), rel=1e-9)
        assert abs(analyzer.casimir_force(L_c, TAU, mode).F_total) < 1e-9 * abs(static_force(L_c))

    @pytest.mark.parametrize("beta_sq, expected", [(1.0, 0.0316), (50.0, 0.0839), (100.0, 0.0998)])
    def test_fixed_frequency_lengths(self, reference_cfg, beta_sq, expected):
        L_c = ForceAnalyzer(reference_cfg(beta_sq)).critical_length(TAU, "fixed")
        assert L_c / L0 == pytest.approx(expected, rel=1e-2)

    @pytest.mark.parametrize("beta_sq, expected", [(50.0, 0.0368), (100.0, 0.0463)])
    def test_tracking_lengths(self, reference_cfg, beta_sq, expected):
        L_c = ForceAnalyzer(reference_cfg(beta_sq)).critical_length(TAU, "tracking")
        assert L_c / L0 == pytest.approx(expected, rel=1e-2)

    def test_scaling_with_phonons(self, reference_cfg):
        """L_c grows as N_bar^(1/3) when tracking and N_bar^(1/4) at fixed frequency"""
        low = ForceAnalyzer(reference_cfg(50.0))
        high = ForceAnalyzer(reference_cfg(100.0))
        ratio_tracking = high.critical_length(TAU, "tracking") / low.critical_length(TAU, "tracking")
        ratio_fixed = high.critical_length(TAU, "fixed") / low.critical_length(TAU, "fixed")
        assert ratio_tracking == pytest.approx(2 ** (1 / 3), rel=1e-9)
        assert ratio_fixed == pytest.approx(2 ** 0.25, rel=1e-9)

    @pytest.mark.parametrize("mode", ["tracking", "fixed"])
    def test_minimum(self, reference_cfg, mode):
        """The closed-form minimum is a stationary point of the force curve"""
        analyzer = ForceAnalyzer(reference_cfg(50.0))
        L_min, F_min = analyzer.minimum_force(TAU, mode)
        assert analyzer.casimir_force(L_min, TAU, mode).F_total == pytest.approx(F_min, rel=1e-9)
        for factor in (0.98, 1.02):
            assert analyzer.casimir_force(factor * L_min, TAU, mode).F_total > F_min

    def test_default_sweep_mode_is_fixed(self, reference_cfg):
        analyzer = ForceAnalyzer(reference_cfg(50.0))
        assert analyzer.critical_length(TAU) == analyzer.critical_length(TAU, "fixed")
        assert analyzer.casimir_force(0.5 * L0, TAU).sweep_mode == "fixed"
        assert analyzer.minimum_force(TAU) == analyzer.minimum_force(TAU, "fixed")

    def test_printed_reference_column(self, reference_cfg):
        analyzer = ForceAnalyzer(reference_cfg(50.0))
        expected = (4 * math.pi * 50.0 * C * HBAR * TAU ** 2 / 1e-16) ** (1 / 3)
        assert analyzer.printed_critical_length(TAU) == pytest.approx(expected, rel=1e-12)

    def test_sweep_table(self, reference_cfg):
        table = ForceAnalyzer(reference_cfg(50.0)).sweep([0.05 * L0, 0.5 * L0, L0], TAU, "fixed")
        assert list(table.columns) == [
            "L", "tau", "F_static", "F_dynamic", "F_total", "N_bar", "epsilon", "omega",
            "sweep_mode", "neglects_outer_oscillation",
        ]
        assert len(table) == 3
        assert table["F_total"].iloc[0] > 0 > table["F_total"].iloc[-1]


class TestForceValidation:
    def test_needs_degenerate_resonance(self):
        cavity = CavitySpec(length=L0, num_modes=4)
        mech = MechanicalSpec(omega=3 * cavity.fundamental_frequency, mirror_mass=1e-16, length=L0)
        with pytest.raises(PhysicsValidationError) as info:
            ForceAnalyzer(make_system(cavity, mech, InitialState()))
        assert info.value.field == "mechanics.omega"

    def test_needs_massless_field(self):
        mass = HBAR * (math.pi * C / L0) / C ** 2
        cavity = CavitySpec(length=L0, num_modes=4, field_mass=mass)
        mech = MechanicalSpec(omega=2 * cavity.mode_frequency(1), mirror_mass=1e-16, length=L0)
        with pytest.raises(PhysicsValidationError) as info:
            ForceAnalyzer(make_system(cavity, mech, InitialState()))
        assert info.value.field == "cavity.field_mass"

    def test_no_inversion_without_phonons(self, reference_cfg):
        with pytest.raises(PhysicsValidationError):
            ForceAnalyzer(reference_cfg(0.0)).critical_length(TAU)

    def test_no_inversion_without_time(self, reference_cfg):
        with pytest.raises(PhysicsValidationError):
            ForceAnalyzer(reference_cfg(1.0)).analytic_critical_length(0.0)

    def test_unknown_sweep_mode(self, reference_cfg):
        with pytest.raises(PhysicsValidationError):
            ForceAnalyzer(reference_cfg(1.0)).casimir_force(L0, TAU, "adiabatic")

    def test_numerical_error_is_exit_three(self):
        assert NumericalError("x").exit_code == 3
