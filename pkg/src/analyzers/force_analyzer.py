import logging
import math
import os
import sys
from dataclasses import asdict, dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import bernoulli, factorial

# Add parent directory to path to import our modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from analyzers.resonance import is_degenerate_with
from models.constants import C, HBAR
from models.specs import CavitySpec, InitialState, MechanicalSpec
from models.system import SystemConfig, make_system
from utils.errors import NumericalError, PhysicsValidationError

logger = logging.getLogger(__name__)

CUTOFF_LIMIT = 0.1      # alpha = gamma pi c / L must stay below this
LAURENT_TERMS = 12
SWEEP_MODES = ("fixed", "tracking")

_B = bernoulli(2 * LAURENT_TERMS)
# 1 / (4 sinh^2(a/2)) - 1/a^2 = sum_k LAURENT[k] a^(2k)
_LAURENT = np.array([
    -(2 * j - 1) * _B[2 * j] / factorial(2 * j, exact=True) for j in range(1, LAURENT_TERMS + 1)
])


def static_force(L: float) -> float:
    """Static Casimir force -hbar pi c / (24 L^2) in newtons"""
    return -HBAR * math.pi * C / (24 * L ** 2)


def _check_cutoff(L: float, gamma: float) -> float:
    if not (L > 0 and math.isfinite(L)):
        raise PhysicsValidationError(f"length must be > 0, got {L}", field="L")
    if not gamma > 0:
        raise PhysicsValidationError(f"cutoff must be > 0 s, got {gamma}", field="gamma")
    alpha = gamma * math.pi * C / L
    if alpha >= CUTOFF_LIMIT:
        raise PhysicsValidationError(
            f"gamma pi c / L = {alpha:.3e} must stay below {CUTOFF_LIMIT}", field="gamma"
        )
    return alpha


def vacuum_force_sum(L: float, gamma: float) -> float:
    """
    Cutoff-regularized vacuum force (hbar pi c / 2 L^2) e^a / (e^a - 1)^2, a = gamma pi c / L

    Diverges as the cutoff is removed; only useful for demonstrations.
    """
    alpha = _check_cutoff(L, gamma)
    return HBAR * math.pi * C / (2 * L ** 2) / (4 * math.sinh(alpha / 2) ** 2)


def cutoff_divergence(gamma: float) -> float:
    """Length-independent divergent part hbar / (2 pi gamma^2 c) of the vacuum force"""
    return HBAR / (2 * math.pi * gamma ** 2 * C)


def regularized_vacuum_force(L: float, gamma: float) -> float:
    """
    Vacuum force with the cutoff divergence subtracted

    Evaluates the Laurent series of e^a / (e^a - 1)^2 - 1/a^2 in Bernoulli
    numbers, so no cancellation between large numbers takes place.
    Tends to -hbar pi c / (24 L^2) as gamma -> 0.

    Args:
        L: Cavity length in meters
        gamma: Exponential cutoff time in seconds, gamma pi c / L < 0.1

    Returns:
        Force in newtons
    """
    alpha = _check_cutoff(L, gamma)
    series = np.polynomial.polynomial.polyval(alpha ** 2, _LAURENT)
    return HBAR * math.pi * C / (2 * L ** 2) * float(series)


def extrapolate_static_force(L: float, gammas: Sequence[float]) -> float:
    """
    Richardson extrapolation of the subtracted vacuum force to gamma -> 0

    Fits a polynomial in gamma^2 through the points and returns its intercept.
    """
    gammas = np.asarray(gammas, dtype=float)
    if gammas.size < 2:
        raise PhysicsValidationError("need at least two cutoffs", field="gamma")
    values = np.array([regularized_vacuum_force(L, g) for g in gammas])
    alphas = gammas * math.pi * C / L
    coefficients = np.polyfit(alphas ** 2, values, deg=gammas.size - 1)
    return float(coefficients[-1])


def two_cavity_force(L: float, L2: float, gamma: float) -> float:
    """
    Net vacuum force on the wall between a cavity of length L and one of length L2 - L

    The cutoff divergence is the same on both sides and cancels.
    """
    if not L2 > L:
        raise PhysicsValidationError(f"outer mirror at {L2} must lie beyond {L}", field="L2")
    return regularized_vacuum_force(L, gamma) - regularized_vacuum_force(L2 - L, gamma)


@dataclass
class ForceResult:
    """
    Time-averaged force on the wall at degenerate resonance

    F_total = F_static + F_dynamic. The oscillating force from the outer
    cavity is neglected (neglects_outer_oscillation).
    """

    L: float
    tau: float
    F_static: float
    F_dynamic: float
    F_total: float
    N_bar: float
    epsilon: float
    omega: float
    sweep_mode: str
    neglects_outer_oscillation: bool = True

    def to_row(self) -> Dict:
        return asdict(self)


class ForceAnalyzer:
    """
    Static plus dynamical Casimir force and the lengths where it changes sign

    In "tracking" sweeps the mirror frequency follows omega = 2 omega_k(L);
    in "fixed" sweeps it keeps the configured value while omega_k(L) = k pi c / L.
    """

    def __init__(self, cfg: SystemConfig):
        if cfg.cavity.is_massive:
            raise PhysicsValidationError(
                "the force closed form holds for the massless field only", field="cavity.field_mass"
            )
        if not is_degenerate_with(cfg, cfg.state.k):
            raise PhysicsValidationError(
                f"the force closed form needs omega = 2 omega_{cfg.state.k}", field="mechanics.omega"
            )
        self.cfg = cfg
        self.mass = cfg.mechanics.mirror_mass
        self.k = cfg.state.k

    def _check_mode(self, sweep_mode: str) -> None:
        if sweep_mode not in SWEEP_MODES:
            raise PhysicsValidationError(
                f"sweep_mode must be one of {SWEEP_MODES}, got {sweep_mode!r}", field="sweep_mode"
            )

    def _mirror_frequency(self, L: float, sweep_mode: str) -> float:
        if sweep_mode == "tracking":
            return 2 * self.k * math.pi * C / L
        return self.cfg.omega

    def mean_phonons(self, omega: float) -> float:
        """N_b_bar(theta) with the thermal occupation at the given mirror frequency"""
        state = self.cfg.state
        g = self.cfg.drive_amplitude
        return state.initial_phonons(omega) + g ** 2 / 4 + g * state.beta_mag * math.sin(state.theta)

    def casimir_force(self, L: float, tau: float, sweep_mode: str = "fixed") -> ForceResult:
        """
        Time-averaged force -hbar pi c / 24 L^2 + N_b_bar eps^2 hbar omega_k^3 tau^2 / (6 L)

        Args:
            L: Cavity length in meters
            tau: Averaging time in seconds (0 gives the static force)
            sweep_mode: "tracking" or "fixed"

        Returns:
            ForceResult with epsilon and omega_k recomputed at L
        """
        self._check_mode(sweep_mode)
        if not (L > 0 and math.isfinite(L)):
            raise PhysicsValidationError(f"length must be > 0, got {L}", field="L")
        if not tau >= 0:
            raise PhysicsValidationError(f"tau must be >= 0, got {tau}", field="tau")

        omega = self._mirror_frequency(L, sweep_mode)
        omega_k = self.k * math.pi * C / L
        delta_L0 = 0.0 if math.isinf(self.mass) else math.sqrt(HBAR / (2 * self.mass * omega))
        epsilon = delta_L0 / L
        n_bar = self.mean_phonons(omega)

        f_static = static_force(L)
        f_dynamic = n_bar * epsilon ** 2 * HBAR * omega_k ** 3 * tau ** 2 / (6 * L)
        return ForceResult(
            L=L, tau=tau, F_static=f_static, F_dynamic=f_dynamic, F_total=f_static + f_dynamic,
            N_bar=n_bar, epsilon=epsilon, omega=omega, sweep_mode=sweep_mode,
        )

    def analytic_critical_length(self, tau: float, sweep_mode: str = "fixed") -> float:
        """
        L_c from the closed forms

        tracking: L_c^3 = k^2 pi N_b_bar hbar c tau^2 / M
        fixed:    L_c^4 = 2 k^3 pi^2 N_b_bar hbar c^2 tau^2 / (M omega)
        """
        self._check_mode(sweep_mode)
        n_bar = self.mean_phonons(self.cfg.omega)
        self._check_inversion(n_bar, tau)
        if sweep_mode == "tracking":
            return (self.k ** 2 * math.pi * n_bar * HBAR * C * tau ** 2 / self.mass) ** (1 / 3)
        return (
            2 * self.k ** 3 * math.pi ** 2 * n_bar * HBAR * C ** 2 * tau ** 2 / (self.mass * self.cfg.omega)
        ) ** 0.25

    def printed_critical_length(self, tau: float) -> float:
        """Reference value (4 pi N_b_bar c hbar tau^2 / M)^(1/3)"""
        n_bar = self.mean_phonons(self.cfg.omega)
        self._check_inversion(n_bar, tau)
        return (4 * math.pi * n_bar * C * HBAR * tau ** 2 / self.mass) ** (1 / 3)

    def _check_inversion(self, n_bar: float, tau: float) -> None:
        if not n_bar > 0:
            raise PhysicsValidationError(
                f"N_b_bar = {n_bar:.3e} <= 0: the force never changes sign", field="state.beta_mag"
            )
        if not tau > 0 or math.isinf(self.mass):
            raise PhysicsValidationError(
                "a dynamical force (tau > 0, finite mirror mass) is needed for an inversion", field="tau"
            )

    def critical_length(self, tau: float, sweep_mode: str = "fixed") -> float:
        """
        Length where the time-averaged force vanishes, refined with brentq

        Returns:
            L_c in meters
        """
        guess = self.analytic_critical_length(tau, sweep_mode)

        def total(L: float) -> float:
            return self.casimir_force(L, tau, sweep_mode).F_total / abs(static_force(L))

        low, high = guess / 4, guess * 4
        if total(low) * total(high) > 0:
            raise NumericalError(
                f"no sign change of the force in [{low:.3e}, {high:.3e}] m", field="critical_length"
            )
        return brentq(total, low, high, xtol=1e-15 * guess, rtol=1e-14, maxiter=200)

    def minimum_force(self, tau: float, sweep_mode: str = "fixed") -> Tuple[float, float]:
        """
        Position and value of the force minimum

        tracking: L_min = (5/2)^(1/3) L_c, F_min = -hbar pi c / (40 L_min^2)
        fixed:    L_min = 3^(1/4) L_c,     F_min = -hbar pi c / (36 L_min^2)
        """
        L_c = self.critical_length(tau, sweep_mode)
        if sweep_mode == "tracking":
            L_min = (5 / 2) ** (1 / 3) * L_c
            F_min = -HBAR * math.pi * C / (40 * L_min ** 2)
        else:
            L_min = 3 ** 0.25 * L_c
            F_min = -HBAR * math.pi * C / (36 * L_min ** 2)
        return L_min, F_min

    def sweep(self, lengths: Sequence[float], tau: float, sweep_mode: str = "fixed") -> pd.DataFrame:
        """Force curve over a set of lengths"""
        rows = [self.casimir_force(float(L), tau, sweep_mode).to_row() for L in lengths]
        return pd.DataFrame(rows)


def casimir_force(cfg: SystemConfig, L: float, tau: float, sweep_mode: str = "fixed") -> ForceResult:
    return ForceAnalyzer(cfg).casimir_force(L, tau, sweep_mode)


def critical_length(cfg: SystemConfig, tau: float, sweep_mode: str = "fixed") -> float:
    return ForceAnalyzer(cfg).critical_length(tau, sweep_mode)


def minimum_force(cfg: SystemConfig, tau: float, sweep_mode: str = "fixed") -> Tuple[float, float]:
    return ForceAnalyzer(cfg).minimum_force(tau, sweep_mode)


def main():
    """
    Example usage: sign inversion of the force for a 10 um cavity
    """
    print("=" * 60)
    print("STATIC + DYNAMICAL CASIMIR FORCE")
    print("=" * 60)

    L0 = 10e-6
    cavity = CavitySpec(length=L0)
    mech = MechanicalSpec(omega=2 * cavity.fundamental_frequency, mirror_mass=1e-16, length=L0)
    tau = 1e-6

    for beta_sq in (1.0, 50.0, 100.0):
        cfg = make_system(cavity, mech, InitialState(beta_mag=math.sqrt(beta_sq)))
        analyzer = ForceAnalyzer(cfg)
        for mode in SWEEP_MODES:
            L_c = analyzer.critical_length(tau, mode)
            L_min, F_min = analyzer.minimum_force(tau, mode)
            print(f"  |beta|^2={beta_sq:5.0f} {mode:8s}  L_c/L0={L_c / L0:.4f}"
                  f"  L_min/L0={L_min / L0:.4f}  F_min={F_min:.3e} N")

    gammas = [1e-3 * L0 / (math.pi * C) / 2 ** j for j in range(3)]
    print(f"\nStatic limit at L0: {extrapolate_static_force(L0, gammas):.6e} N")
    print(f"Exact:              {static_force(L0):.6e} N")
    print("\n✓ Force analysis complete")


if __name__ == "__main__":
    main()
