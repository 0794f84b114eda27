import math
from typing import Callable

from models.quadrature import integrate
from models.system import SystemConfig
from utils.errors import PhysicsValidationError


def time_average(series: Callable[[float], float], tau: float, max_frequency: float = 0.0,
                 epsrel: float = 1e-10) -> float:
    """
    Time average (1/tau) * integral_0^tau series(t) dt

    Args:
        series: Function of time in seconds
        tau: Averaging window in seconds (> 0)
        max_frequency: Fastest angular frequency in the series, rad/s

    Returns:
        The average value

    Example:
        >>> time_average(lambda t: 3.0, 1e-12)
        3.0
    """
    if not tau > 0:
        raise PhysicsValidationError(f"averaging window must be > 0, got {tau}", field="tau")
    return integrate(
        lambda u: series(tau * u), 1.0, max_frequency=max_frequency * tau,
        epsabs=1e-14, epsrel=epsrel,
    )


def avg_x2(cfg: SystemConfig, tau: float, exact: bool = False) -> float:
    """
    Time-averaged second-order wall correction at degenerate resonance

    <x2>_tau = mu_k^2 (1 - cos(2 omega_k tau) / 2), scaled by kappa_k^2 / omega_k
    for a massive field. With exact=True the term
    -mu_k^2 sin(2 omega_k tau) / (4 omega_k tau) dropped for omega_k tau >> 1 is kept.
    """
    if not tau > 0:
        raise PhysicsValidationError(f"averaging window must be > 0, got {tau}", field="tau")
    k = cfg.state.k
    w = float(cfg.reduced_frequency(k))
    scale = float(cfg.reduced_coupling_sq(k)) / w
    s = float(cfg.reduced_time(tau))
    value = 1.0 - 0.5 * math.cos(2 * w * s)
    if exact:
        value -= math.sin(2 * w * s) / (4 * w * s)
    return scale * cfg.state.mu_k ** 2 * value


def avg_Nk2(cfg: SystemConfig, tau: float) -> float:
    """
    Time-averaged second-order photon number of mode k at degenerate resonance

    (w^2 tau^2 / 3)(|beta|^2 cos^2 theta + sinh^2 r + N_T + 2 N_T sinh^2 r)
    + (w^2 tau^2 / 12)(g + 2 |beta| sin theta)^2, with w^2 -> kappa_k^4.
    """
    if not tau > 0:
        raise PhysicsValidationError(f"averaging window must be > 0, got {tau}", field="tau")
    state = cfg.state
    kappa4 = float(cfg.reduced_coupling_sq(state.k)) ** 2
    s = float(cfg.reduced_time(tau))
    g = cfg.drive_amplitude
    sh2 = math.sinh(state.squeeze_r) ** 2
    n_t = cfg.n_thermal
    incoherent = (state.beta_mag * math.cos(state.theta)) ** 2 + sh2 + n_t + 2 * n_t * sh2
    coherent = (g + 2 * state.beta_mag * math.sin(state.theta)) ** 2
    return kappa4 * s ** 2 * (incoherent / 3 + coherent / 12)
