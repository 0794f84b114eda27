import math

import numpy as np
import pytest

from analyzers.averages import avg_Nk2, avg_x2, time_average
from analyzers.number_analyzer import NumberAnalyzer, photon_number
from models.specs import CavitySpec, DriveProfile, DriveTarget, InitialState, MechanicalSpec
from models.system import make_system
from utils.errors import PhysicsValidationError


def _seconds(cfg, s):
    return float(cfg.seconds(s))


class TestPhotonNumberResonant:
    def test_zero_order_is_coherent_occupation(self, make_cfg):
        cfg = make_cfg(mu_k=1.5)
        result = NumberAnalyzer(cfg).photon_number(1, _seconds(cfg, 3.0), max_order=0)
        assert result.order0 == pytest.approx(2.25, rel=1e-14)
        assert result.order1 == 0.0 and result.order2 == 0.0

    def test_first_order(self, make_cfg):
        """-mu_k^2 kappa_k^2 t (2 |beta| sin theta + g) with kappa_1^2 = 1"""
        cfg = make_cfg(mu_k=1.0, beta_mag=1.0, theta=math.pi / 2)
        result = NumberAnalyzer(cfg).photon_number(1, _seconds(cfg, 5.0), max_order=1)
        assert result.order1 == pytest.approx(-10.0, rel=1e-12)

    def test_second_order_breakdown(self, make_cfg, wall_drive):
        """Sub-terms scale with kappa_k^4 t^2 and sum to the total"""
        cfg = make_cfg(beta_mag=1.0, theta=0.4, squeeze_r=0.2, n_thermal=0.3, drives=[wall_drive(0.5)])
        s = 4.0
        result = NumberAnalyzer(cfg).photon_number(1, _seconds(cfg, s), max_order=2)
        sh2 = math.sinh(0.2) ** 2
        assert result.N_beta == pytest.approx(s ** 2, rel=1e-12)
        assert result.N_sq == pytest.approx(s ** 2 * sh2, rel=1e-12)
        assert result.N_T == pytest.approx(s ** 2 * 0.3, rel=1e-12)
        assert result.N_sqT == pytest.approx(s ** 2 * 0.6 * sh2, rel=1e-12)
        assert result.N_md == pytest.approx(s ** 2 * 0.125 * (4 * math.sin(0.4) + 0.5), rel=1e-12)
        parts = result.N_beta + result.N_vac + result.N_sq + result.N_T + result.N_sqT + result.N_md
        assert result.order2 == pytest.approx(parts, rel=1e-14)
        assert result.total == pytest.approx(result.epsilon ** 2 * parts, rel=1e-12)

    def test_time_average_matches_closed_form(self, make_cfg, wall_drive):
        """<N_k^(2)>_tau agrees with the averaged closed form for random states"""
        rng = np.random.default_rng(7)
        for _ in range(20):
            cfg = make_cfg(
                beta_mag=rng.uniform(0, 2), theta=rng.uniform(-math.pi, math.pi),
                squeeze_r=rng.uniform(0, 0.5), n_thermal=rng.uniform(0, 1),
                drives=[wall_drive(rng.uniform(-1, 1))],
            )
            analyzer = NumberAnalyzer(cfg)
            tau = _seconds(cfg, 100.0)
            average = time_average(lambda t: analyzer.photon_number(1, t, max_order=2).order2, tau)
            assert average == pytest.approx(avg_Nk2(cfg, tau), rel=1e-6)

    def test_first_order_needs_undriven_cavity(self, make_cfg):
        cfg = make_cfg(mu_k=1.0, mu_kp=0.5)
        with pytest.raises(PhysicsValidationError) as info:
            NumberAnalyzer(cfg).photon_number(1, _seconds(cfg, 1.0), max_order=1)
        assert info.value.field == "state.mu_kp"

    def test_rejects_bad_order(self, cfg):
        with pytest.raises(PhysicsValidationError) as info:
            NumberAnalyzer(cfg).photon_number(1, 0.0, max_order=3)
        assert info.value.field == "max_order"

    def test_rejects_bad_approximation(self, cfg):
        with pytest.raises(PhysicsValidationError):
            NumberAnalyzer(cfg).photon_number(1, 0.0, approximation="rwa")

    def test_unknown_mode(self, cfg):
        with pytest.raises(PhysicsValidationError):
            NumberAnalyzer(cfg).photon_number(17, 0.0)

    def test_module_function(self, cfg):
        t = _seconds(cfg, 2.0)
        assert photon_number(cfg, 1, t).total == NumberAnalyzer(cfg).photon_number(1, t).total


class TestPhotonNumberFull:
    @pytest.mark.parametrize("s", [100.0, 200.0])
    def test_growth_from_coherent_phonons(self, make_cfg, s):
        """N_beta approaches |beta|^2 (omega_k t)^2 once omega_k t >> 1"""
        cfg = make_cfg(beta_mag=1.0, theta=0.0)
        result = NumberAnalyzer(cfg).photon_number(1, _seconds(cfg, s), approximation="full")
        assert result.N_beta / s ** 2 == pytest.approx(1.0, rel=2e-2)

    def test_vacuum_term_is_small(self, make_cfg):
        """Vacuum pair creation stays bounded while the coherent-phonon term grows"""
        cfg = make_cfg(beta_mag=1.0)
        result = NumberAnalyzer(cfg).photon_number(1, _seconds(cfg, 50.0), approximation="full")
        assert 0.0 < result.N_vac < 1e-2 * result.N_beta

    def test_first_order_matches_resonant_form_at_start(self, make_cfg):
        """Both forms of the first order vanish at t = 0"""
        cfg = make_cfg(mu_k=1.0, beta_mag=1.0, theta=math.pi / 2)
        result = NumberAnalyzer(cfg).photon_number(1, 0.0, max_order=1, approximation="full")
        assert result.order1 == 0.0

    def test_needs_vacuum_cavity(self, make_cfg):
        cfg = make_cfg(mu_k=1.0)
        with pytest.raises(PhysicsValidationError):
            NumberAnalyzer(cfg).photon_number(1, _seconds(cfg, 1.0), approximation="full")

    def test_beta_spectrum_is_unit_beta_term(self, make_cfg):
        cfg = make_cfg(beta_mag=1.0, theta=0.7)
        analyzer = NumberAnalyzer(cfg)
        t = _seconds(cfg, 30.0)
        expected = analyzer.photon_number(1, t, approximation="full").N_beta
        assert analyzer.beta_spectrum(1, t) == pytest.approx(expected, rel=1e-10)

    def test_truncation_tail_reported(self, make_cfg):
        cfg = make_cfg(beta_mag=1.0)
        result = NumberAnalyzer(cfg).photon_number(1, _seconds(cfg, 10.0), approximation="full")
        assert 0.0 < result.truncation_tail < result.order2


class TestResonanceSpectrum:
    @staticmethod
    def _spectrum(make_cfg, omegas, s):
        values = []
        for w in omegas:
            cfg = make_cfg(omega_tilde=float(w), beta_mag=1.0)
            values.append(NumberAnalyzer(cfg).beta_spectrum(1, _seconds(cfg, s)))
        return np.array(values)

    @pytest.mark.parametrize("peak", [2.0, 3.0, 4.0, 5.0])
    def test_peaks_at_pair_frequencies(self, make_cfg, peak):
        """Pair production of mode 1 peaks where omega = omega_1 + omega_n"""
        omegas = np.linspace(peak - 0.1, peak + 0.1, 41)
        values = self._spectrum(make_cfg, omegas, 100.0)
        assert abs(omegas[np.argmax(values)] - peak) <= 0.005 + 1e-12

    def test_peak_grows_with_time(self, make_cfg):
        heights = [self._spectrum(make_cfg, [2.0], s)[0] for s in (30.0, 50.0, 100.0)]
        assert heights[0] < heights[1] < heights[2]

    def test_peak_narrows_with_time(self, make_cfg):
        """The full width at half maximum scales as 1 / t"""

        def fwhm(s):
            omegas = np.linspace(1.7, 2.3, 1201)
            values = self._spectrum(make_cfg, omegas, s)
            above = omegas[values >= 0.5 * values.max()]
            return above.max() - above.min()

        assert fwhm(30.0) / fwhm(100.0) == pytest.approx(100.0 / 30.0, rel=0.2)


class TestPhononNumber:
    def test_resonant_orders(self, make_cfg):
        cfg = make_cfg(mu_k=1.0, beta_mag=1.0, theta=math.pi / 2)
        s = 5.0
        result = NumberAnalyzer(cfg).phonon_number(_seconds(cfg, s))
        assert result.order0 == pytest.approx(1.0, rel=1e-14)
        assert result.order1 == pytest.approx(5.0, rel=1e-12)
        assert result.order2 == pytest.approx(-0.5 * s ** 2, rel=1e-12)

    def test_first_order_exchange(self, make_cfg):
        """Photons gained at first order equal twice the phonons lost"""
        cfg = make_cfg(mu_k=0.8, beta_mag=1.3, theta=-1.0)
        analyzer = NumberAnalyzer(cfg)
        t = _seconds(cfg, 7.0)
        photons = analyzer.photon_number(1, t, max_order=1).order1
        phonons = analyzer.phonon_number(t, max_order=1).order1
        assert photons + 2 * phonons == pytest.approx(0.0, abs=1e-12)

    def test_full_zero_order_with_drive(self, make_cfg, wall_drive):
        """After the ramp the wall holds |beta + Lambda_p - i Lambda_x|^2 phonons"""
        g = 0.6
        cfg = make_cfg(beta_mag=1.0, theta=math.pi / 2, drives=[wall_drive(g)])
        result = NumberAnalyzer(cfg).phonon_number(_seconds(cfg, 5.0), max_order=0, approximation="full")
        assert result.order0 == pytest.approx(abs(1j + 0.5j * g) ** 2, rel=1e-10)

    def test_full_first_order_vanishes_without_photons(self, cfg):
        result = NumberAnalyzer(cfg).phonon_number(_seconds(cfg, 5.0), max_order=1, approximation="full")
        assert result.order1 == 0.0

    @pytest.mark.parametrize("theta, expected", [
        (0.0, lambda s: -s ** 2 / 2 + s * math.sin(4 * s) / 4),
        (math.pi / 2, lambda s: -s ** 2 / 2 - s * math.sin(4 * s) / 4 + math.sin(2 * s) ** 2 / 2),
    ])
    def test_full_second_order_single_mode(self, make_cfg, theta, expected):
        """With mode 1 alone at omega = 2 omega_1 the secular -s^2/2 carries bounded ripples"""
        cfg = make_cfg(beta_mag=1.0, theta=theta)
        s = 5.3
        result = NumberAnalyzer(cfg, modes=[1]).phonon_number(_seconds(cfg, s), approximation="full")
        assert result.order2 == pytest.approx(expected(s), abs=1e-7)

    def test_full_second_order_thermal_wall(self, make_cfg):
        """A thermal phonon depletes like a coherent one averaged over its phase"""
        cfg = make_cfg(n_thermal=1.0)
        s = 5.3
        result = NumberAnalyzer(cfg, modes=[1]).phonon_number(_seconds(cfg, s), approximation="full")
        assert result.order2 == pytest.approx(-s ** 2 / 2 + math.sin(2 * s) ** 2 / 4, abs=1e-7)

    def test_full_second_order_approaches_resonant_form(self, make_cfg):
        cfg = make_cfg(beta_mag=1.0, theta=0.3)
        t = _seconds(cfg, 60.0)
        analyzer = NumberAnalyzer(cfg, modes=[1])
        full = analyzer.phonon_number(t, approximation="full").order2
        resonant = analyzer.phonon_number(t).order2
        assert full == pytest.approx(resonant, rel=2e-2)


class TestNondegenerate:
    def test_closed_forms(self, make_cfg):
        """At omega = omega_1 + omega_2 the first order is 2 sqrt(2) mu_1 mu_2 t"""
        cfg = make_cfg(omega_tilde=3.0, mu_k=1.0, mu_kp=1.0, beta_mag=1.0, theta=math.pi / 2)
        result = NumberAnalyzer(cfg).nondegenerate(1, 2, _seconds(cfg, 4.0))
        assert result.order1 == pytest.approx(8 * math.sqrt(2), rel=1e-12)
        assert result.order2_average == pytest.approx(32 / 3, rel=1e-12)

    def test_requires_resonance(self, cfg):
        with pytest.raises(PhysicsValidationError) as info:
            NumberAnalyzer(cfg).nondegenerate(1, 2, 0.0)
        assert info.value.field == "mechanics.omega"


class TestAverages:
    def test_constant(self):
        assert time_average(lambda t: 3.0, 1e-12) == pytest.approx(3.0, rel=1e-14)

    def test_wall_average(self, make_cfg):
        """<x2> tends to mu_k^2 (1 - cos(2 w tau) / 2) for long windows"""
        cfg = make_cfg(mu_k=1.0)
        tau = _seconds(cfg, 1000.25)
        expected = 1 - 0.5 * math.cos(2 * 1000.25)
        assert avg_x2(cfg, tau) == pytest.approx(expected, rel=1e-8)
        assert avg_x2(cfg, tau, exact=True) == pytest.approx(expected, abs=1e-3)

    def test_rejects_empty_window(self, cfg):
        with pytest.raises(PhysicsValidationError):
            avg_Nk2(cfg, 0.0)

    def test_reference_photon_yield(self):
        """A 1e-16 kg mirror driven for 1 us at 10 um yields about 2.5e-7 photons per phonon"""
        cavity = CavitySpec(length=10e-6, num_modes=4)
        mech = MechanicalSpec(2 * cavity.fundamental_frequency, 1e-16, cavity.length)
        cfg = make_system(cavity, mech, InitialState(beta_mag=1.0))
        result = NumberAnalyzer(cfg).photon_number(1, 1e-6, max_order=2)
        assert result.total == pytest.approx(2.48e-7, rel=2e-2)


def test_drive_on_cavity_blocks_full_order2(make_cfg):
    drive = DriveProfile(target=DriveTarget.MODE_K, g=0.1, Omega=1e16)
    cfg = make_cfg(drives=[drive])
    with pytest.raises(PhysicsValidationError):
        NumberAnalyzer(cfg).photon_order2_full(1, 1.0)
