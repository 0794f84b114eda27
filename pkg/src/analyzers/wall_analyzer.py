import logging
import math
import os
import sys
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, Optional

import numpy as np

# Add parent directory to path to import our modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from analyzers.mean_field import MeanField
from analyzers.resonance import is_degenerate_with
from models.quadrature import sinc
from models.specs import CavitySpec, DriveProfile, DriveTarget, InitialState, MechanicalSpec
from models.system import SystemConfig, make_system
from utils.errors import PhysicsValidationError

logger = logging.getLogger(__name__)

THETA_TOLERANCE = 1e-9
THETA_CASES = ("real_beta", "imag_beta")


@dataclass
class WallTrajectoryPoint:
    """
    Wall position x = L (1 + eps x1 + eps^2 x2 + eps^3 x3) at one time

    x1_tilde, x2_tilde and x3 are the dimensionless corrections; gamma_k
    is the decay factor 1 - eps^2 omega_k^2 t^2 / 4.
    """

    t: float
    x0: float
    x1_tilde: float
    x2_tilde: float
    x3: float
    x_total: float
    gamma_k: float

    def to_row(self) -> Dict:
        return asdict(self)


class WallAnalyzer:
    """
    Trajectory of the movable wall at perturbative orders 0 to 3
    """

    def __init__(self, cfg: SystemConfig, modes: Optional[Iterable[int]] = None):
        self.cfg = cfg
        self.field = MeanField(cfg, modes)

    def _reduced(self, t: float) -> float:
        if t < 0:
            raise PhysicsValidationError(f"time must be >= 0, got {t}", field="t")
        if t > 0.5 * self.cfg.critical_time:
            logger.warning(
                "t = %.4e s is outside the perturbative window 0.5 t_c = %.4e s",
                t, 0.5 * self.cfg.critical_time,
            )
        return float(self.cfg.reduced_time(t))

    def gamma_factor(self, t: float) -> float:
        """Gamma_k(t) = 1 - eps^2 kappa_k^4 t^2 / 4 (omega_k^2 t^2 for the massless field)"""
        s = float(self.cfg.reduced_time(t))
        kappa4 = float(self.cfg.reduced_coupling_sq(self.cfg.state.k)) ** 2
        return 1.0 - self.cfg.epsilon ** 2 * kappa4 * s ** 2 / 4

    def x1(self, s: float) -> float:
        """2 <X_b> = 2 |beta| cos(omega t - theta) + 2 xi(t)"""
        return 2.0 * self.field.x_b(s)

    def _sine_response(self, nu: float, s: float) -> float:
        """integral_0^s cos(nu s') sin(omega (s - s')) ds'"""
        w = self.cfg.reduced_mirror_frequency
        return 0.5 * s * (
            math.sin(0.5 * (w + nu) * s) * sinc(0.5 * (nu - w) * s)
            + math.sin(0.5 * (w - nu) * s) * sinc(0.5 * (nu + w) * s)
        )

    def x2_full(self, s: float) -> float:
        """
        4 integral_0^s Phi^2(s') sin(omega (s - s')) ds' in closed form

        Valid without cavity drives, where Phi is a sum of two cosines.
        """
        cfg = self.cfg
        modes = [n for n in (cfg.state.k, cfg.state.kp) if n in self.field.modes]
        total = 0.0
        for n in modes:
            mu = cfg.coherent_amplitude(n)
            w_n = float(cfg.reduced_frequency(n))
            kappa2 = float(cfg.reduced_coupling_sq(n))
            total += 0.5 * kappa2 * mu ** 2 * (self._sine_response(0.0, s) + self._sine_response(2 * w_n, s))
        if len(modes) == 2:
            k, kp = modes
            w_k = float(cfg.reduced_frequency(k))
            w_kp = float(cfg.reduced_frequency(kp))
            cross = (
                (-1) ** (k + kp)
                * math.sqrt(float(cfg.reduced_coupling_sq(k) * cfg.reduced_coupling_sq(kp)))
                * cfg.coherent_amplitude(k) * cfg.coherent_amplitude(kp)
            )
            total += cross * (self._sine_response(w_k - w_kp, s) + self._sine_response(w_k + w_kp, s))
        return 4.0 * total

    def x2_resonant(self, s: float) -> float:
        """(kappa_k^2 / omega_k) mu_k^2 (1 - cos 2 omega_k t + omega_k t sin 2 omega_k t)"""
        k = self.cfg.state.k
        w_k = float(self.cfg.reduced_frequency(k))
        scale = float(self.cfg.reduced_coupling_sq(k)) / w_k
        return scale * self.cfg.state.mu_k ** 2 * (
            1 - math.cos(2 * w_k * s) + w_k * s * math.sin(2 * w_k * s)
        )

    def x3(self, s: float) -> float:
        """-(kappa_k^4 t^2 / 4) x1(t): phonon-to-photon conversion damping the oscillation"""
        kappa4 = float(self.cfg.reduced_coupling_sq(self.cfg.state.k)) ** 2
        return -0.25 * kappa4 * s ** 2 * self.x1(s)

    def wall_position(self, t: float, max_order: int = 3,
                      approximation: str = "resonant") -> WallTrajectoryPoint:
        """
        Wall position at time t

        Args:
            t: Time in seconds, within 0.5 t_c
            max_order: Highest order included (0..3)
            approximation: "resonant" uses the degenerate closed form for
                the second order, "full" keeps the off-resonant terms

        Returns:
            WallTrajectoryPoint
        """
        if max_order not in range(4):
            raise PhysicsValidationError(f"max_order must be in 0..3, got {max_order}", field="max_order")
        if approximation not in ("resonant", "full"):
            raise PhysicsValidationError(
                f"approximation must be 'resonant' or 'full', got {approximation!r}",
                field="approximation",
            )
        if max_order >= 2 and self.cfg.has_cavity_drive:
            raise PhysicsValidationError(
                "wall corrections beyond first order need zero cavity drives", field="drives"
            )
        s = self._reduced(t)
        eps = self.cfg.epsilon
        L = self.cfg.cavity.length

        x1 = self.x1(s) if max_order >= 1 else 0.0
        x2 = 0.0
        if max_order >= 2:
            x2 = self.x2_full(s) if approximation == "full" else self.x2_resonant(s)
        x3 = self.x3(s) if max_order >= 3 else 0.0
        x_total = L * (1 + eps * x1 + eps ** 2 * x2 + eps ** 3 * x3)
        return WallTrajectoryPoint(
            t=t, x0=L, x1_tilde=x1, x2_tilde=x2, x3=x3, x_total=x_total,
            gamma_k=self.gamma_factor(t),
        )

    # -- combined closed forms ---------------------------------------------------

    def _family_sign(self, theta_case: str) -> int:
        theta = self.cfg.state.theta
        if theta_case == "real_beta":
            n = round(theta / math.pi)
            offset = theta - n * math.pi
        elif theta_case == "imag_beta":
            n = round((theta - math.pi / 2) / math.pi)
            offset = theta - math.pi / 2 - n * math.pi
        else:
            raise PhysicsValidationError(
                f"theta_case must be one of {THETA_CASES}, got {theta_case!r}", field="theta_case"
            )
        if abs(offset) > THETA_TOLERANCE:
            raise PhysicsValidationError(
                f"theta = {theta} is not in the {theta_case} family", field="state.theta"
            )
        return -1 if n % 2 else 1

    def wall_position_combined(self, t: float, theta_case: str) -> float:
        """
        Resummed wall position for real or purely imaginary beta, in meters

        real_beta: L [1 + eps (2 (-1)^n |beta| cos 2w_k t + g sin 2w_k t) Gamma_k + eps^2 X_mu]
        imag_beta: L [1 + eps (g + 2 (-1)^n |beta|) Gamma_k sin 2w_k t + eps^2 X_mu]
        with X_mu = mu_k^2 (1 - cos 2w_k t + w_k t sin 2w_k t).
        """
        if not is_degenerate_with(self.cfg, self.cfg.state.k):
            raise PhysicsValidationError(
                f"wall_position_combined needs omega = 2 omega_{self.cfg.state.k}",
                field="mechanics.omega",
            )
        sign = self._family_sign(theta_case)
        s = self._reduced(t)
        eps = self.cfg.epsilon
        w_k = float(self.cfg.reduced_frequency(self.cfg.state.k))
        beta = self.cfg.state.beta_mag
        g = self.cfg.drive_amplitude
        gamma = self.gamma_factor(t)
        phase = 2 * w_k * s
        if theta_case == "real_beta":
            first = (2 * sign * beta * math.cos(phase) + g * math.sin(phase)) * gamma
        else:
            first = (g + 2 * sign * beta) * gamma * math.sin(phase)
        return self.cfg.cavity.length * (1 + eps * first + eps ** 2 * self.x2_resonant(s))

    def damping_time(self) -> float:
        """
        Damping time N_b(0) / (eps |beta| mu_k^2 omega_k) of the theta = -pi/2 family, seconds
        """
        sign = self._family_sign("imag_beta")
        state = self.cfg.state
        if sign != -1:
            raise PhysicsValidationError(
                "the damping time is defined for theta = -pi/2 + 2 pi m", field="state.theta"
            )
        if state.beta_mag == 0 or state.mu_k == 0 or self.cfg.epsilon == 0:
            raise PhysicsValidationError(
                "the damping time needs |beta|, mu_k and epsilon to be non-zero", field="state.mu_k"
            )
        coupling = float(self.cfg.coupling_sq(state.k))
        t_bar = self.cfg.initial_phonons / (state.beta_mag * state.mu_k ** 2 * coupling)
        return t_bar / self.cfg.epsilon

    def oscillation_amplitude(self, t_grid: np.ndarray, theta_case: str) -> float:
        """Largest |x - L - L eps^2 X_mu| over a grid, in meters"""
        values = []
        for t in t_grid:
            s = float(self.cfg.reduced_time(t))
            background = self.cfg.cavity.length * self.cfg.epsilon ** 2 * self.x2_resonant(s)
            values.append(self.wall_position_combined(t, theta_case) - self.cfg.cavity.length - background)
        return float(np.max(np.abs(values))) if values else 0.0


def wall_position(cfg: SystemConfig, t: float, max_order: int = 3,
                  approximation: str = "resonant") -> WallTrajectoryPoint:
    return WallAnalyzer(cfg).wall_position(t, max_order, approximation)


def wall_position_combined(cfg: SystemConfig, t: float, theta_case: str) -> float:
    return WallAnalyzer(cfg).wall_position_combined(t, theta_case)


def main():
    """
    Example usage: wall oscillation suppressed by the drive
    """
    print("=" * 60)
    print("WALL TRAJECTORY AT DEGENERATE RESONANCE")
    print("=" * 60)

    cavity = CavitySpec(length=10e-6, num_modes=8)
    mech = MechanicalSpec.from_epsilon(2 * cavity.fundamental_frequency, 1e-3, cavity.length)
    beta = 1.0
    state = InitialState(beta_mag=beta, theta=math.pi / 2)
    drive = DriveProfile(target=DriveTarget.MECHANICAL, g=-2 * beta, Omega=50 * mech.omega)
    cfg = make_system(cavity, mech, state, [drive])
    analyzer = WallAnalyzer(cfg)

    t_grid = cfg.seconds(np.linspace(0, 20, 41))
    amplitude = analyzer.oscillation_amplitude(t_grid, "imag_beta")
    print(f"\nOscillation amplitude with g = -2|beta|: {amplitude:.3e} m")
    print(f"Zero-point amplitude delta_L0: {cfg.delta_L0:.3e} m")
    print("\n✓ Drive cancels the coherent-phonon oscillation")


if __name__ == "__main__":
    main()
