import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Tuple, Union

import numpy as np

from models.constants import EPSILON_MAX
from models.specs import (
    CavitySpec,
    DriveForm,
    DriveProfile,
    DriveTarget,
    InitialState,
    MechanicalSpec,
)
from utils.errors import PhysicsValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemConfig:
    """
    Immutable cavity + wall configuration with cached derived quantities

    Build it through make_system(). Times passed to the analyzers are
    in seconds; internally they work in the reduced units
    omega_tilde = L omega / (pi c) and t_tilde = pi c t / L.
    """

    cavity: CavitySpec
    mechanics: MechanicalSpec
    state: InitialState
    drives: Tuple[DriveProfile, ...] = ()

    unit_frequency: float = field(init=False, repr=False, compare=False)
    mode_frequencies: Tuple[float, ...] = field(init=False, repr=False, compare=False)
    epsilon: float = field(init=False, repr=False, compare=False)
    delta_L0: float = field(init=False, repr=False, compare=False)
    n_thermal: float = field(init=False, repr=False, compare=False)
    initial_phonons: float = field(init=False, repr=False, compare=False)
    critical_time: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "drives", tuple(self.drives))
        object.__setattr__(self, "unit_frequency", self.cavity.fundamental_frequency)
        object.__setattr__(
            self, "mode_frequencies", tuple(float(w) for w in self.cavity.mode_frequencies())
        )
        object.__setattr__(self, "epsilon", self.mechanics.epsilon)
        object.__setattr__(self, "delta_L0", self.mechanics.delta_L0)
        object.__setattr__(self, "n_thermal", self.state.thermal_occupation(self.mechanics.omega))
        object.__setattr__(self, "initial_phonons", self.state.initial_phonons(self.mechanics.omega))
        omega_k = self.cavity.mode_frequency(self.state.k)
        t_c = math.inf if self.epsilon == 0 else 2.0 / (self.epsilon * omega_k)
        object.__setattr__(self, "critical_time", t_c)

    # -- frequencies ---------------------------------------------------------

    @property
    def omega(self) -> float:
        """Mirror frequency in rad/s"""
        return self.mechanics.omega

    @property
    def omega_k(self) -> float:
        return self.mode_frequency(self.state.k)

    def mode_frequency(self, n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        return self.cavity.mode_frequency(n)

    def coupling_sq(self, n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        return self.cavity.coupling_sq(n)

    def reduced_frequency(self, n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        return self.mode_frequency(n) / self.unit_frequency

    def reduced_coupling_sq(self, n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        """kappa_n^2 = n^2 / omega_tilde_n, equal to n for the massless field"""
        return self.coupling_sq(n) / self.unit_frequency

    @property
    def reduced_mirror_frequency(self) -> float:
        return self.omega / self.unit_frequency

    def target_frequency(self, target: DriveTarget) -> float:
        target = DriveTarget(target)
        if target == DriveTarget.MECHANICAL:
            return self.omega
        if target == DriveTarget.MODE_K:
            return float(self.mode_frequency(self.state.k))
        return float(self.mode_frequency(self.state.kp))

    def target_for_mode(self, n: int) -> Optional[DriveTarget]:
        if n == self.state.k:
            return DriveTarget.MODE_K
        if n == self.state.kp:
            return DriveTarget.MODE_KP
        return None

    def coherent_amplitude(self, n: int) -> float:
        if n == self.state.k:
            return self.state.mu_k
        if n == self.state.kp:
            return self.state.mu_kp
        return 0.0

    # -- time conversion -----------------------------------------------------

    def reduced_time(self, t):
        """t_tilde = pi c t / L for a scalar or array of seconds"""
        return np.multiply(t, self.unit_frequency)

    def seconds(self, t_tilde):
        return np.divide(t_tilde, self.unit_frequency)

    # -- drives --------------------------------------------------------------

    def drive_for(self, target: DriveTarget) -> Optional[DriveProfile]:
        target = DriveTarget(target)
        for drive in self.drives:
            if drive.target == target:
                return drive
        return None

    def _active(self, target: DriveTarget) -> bool:
        drive = self.drive_for(target)
        return drive is not None and not drive.is_zero

    @property
    def has_cavity_drive(self) -> bool:
        return self._active(DriveTarget.MODE_K) or self._active(DriveTarget.MODE_KP)

    @property
    def has_mechanical_drive(self) -> bool:
        return self._active(DriveTarget.MECHANICAL)

    @property
    def drive_amplitude(self) -> float:
        """Amplitude g of the mechanical exdr ramp (0 when absent)"""
        drive = self.drive_for(DriveTarget.MECHANICAL)
        if drive is None or drive.form != DriveForm.EXDR_RAMP or drive.is_zero:
            return 0.0
        return drive.g

    @property
    def mean_phonons_bar(self) -> float:
        """N_b_bar(theta) = N_b(0) + g^2/4 + g |beta| sin(theta)"""
        g = self.drive_amplitude
        return self.initial_phonons + g ** 2 / 4 + g * self.state.beta_mag * math.sin(self.state.theta)

    def with_changes(
        self,
        cavity: Optional[CavitySpec] = None,
        mechanics: Optional[MechanicalSpec] = None,
        state: Optional[InitialState] = None,
        drives: Optional[Iterable[DriveProfile]] = None,
    ) -> "SystemConfig":
        """Return a validated copy with some blocks replaced"""
        return make_system(
            cavity or self.cavity,
            mechanics or self.mechanics,
            state or self.state,
            self.drives if drives is None else tuple(drives),
        )


def make_system(
    cavity: CavitySpec,
    mech: MechanicalSpec,
    state: InitialState,
    drives: Iterable[DriveProfile] = (),
) -> SystemConfig:
    """
    Validate the specs together and build the immutable SystemConfig

    Args:
        cavity: Cavity geometry and field mass
        mech: Wall oscillator
        state: Initial state descriptor
        drives: At most one drive per target

    Returns:
        SystemConfig with cached omega_n table, epsilon, N_T, N_b(0), t_c

    Example:
        >>> cavity = CavitySpec(length=10e-6)
        >>> mech = MechanicalSpec(2 * cavity.fundamental_frequency, 1e-16, cavity.length)
        >>> cfg = make_system(cavity, mech, InitialState(beta_mag=1.0))
    """
    drives = tuple(drives)

    if not math.isclose(mech.length, cavity.length, rel_tol=1e-12):
        raise PhysicsValidationError(
            f"wall length {mech.length} differs from cavity length {cavity.length}",
            field="mechanics.length",
        )
    if mech.epsilon >= EPSILON_MAX:
        raise PhysicsValidationError(
            f"epsilon = {mech.epsilon:.3e} must stay below {EPSILON_MAX}", field="mechanics.epsilon"
        )
    if state.k == state.kp:
        raise PhysicsValidationError("k and kp must differ", field="state.kp")
    for name in ("k", "kp"):
        index = getattr(state, name)
        if index > cavity.num_modes:
            raise PhysicsValidationError(
                f"mode {index} exceeds num_modes = {cavity.num_modes}", field=f"state.{name}"
            )

    seen = set()
    for drive in drives:
        if drive.target in seen:
            raise PhysicsValidationError(
                f"duplicate drive for target {drive.target.value}", field="drives.target"
            )
        seen.add(drive.target)

    cfg = SystemConfig(cavity=cavity, mechanics=mech, state=state, drives=drives)

    for drive in drives:
        for message in drive.validity_warnings(mech.omega, cfg.mode_frequencies):
            logger.warning(message)

    logger.debug(
        "system: L=%.4e m, omega=%.4e rad/s, epsilon=%.3e, N_b(0)=%.6g",
        cavity.length, mech.omega, cfg.epsilon, cfg.initial_phonons,
    )
    return cfg
