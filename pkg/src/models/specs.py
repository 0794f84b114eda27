import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from models.constants import (
    C,
    DEFAULT_NUM_MODES,
    DRIVE_RAMP_FACTOR,
    EPSILON_MAX,
    HBAR,
    KB,
)
from utils.errors import PhysicsValidationError


def _require(condition: bool, message: str, field: str) -> None:
    if not condition:
        raise PhysicsValidationError(message, field=field)


def _is_positive_int(value) -> bool:
    return (
        not isinstance(value, bool)
        and isinstance(value, (int, np.integer))
        and value >= 1
    )


@dataclass(frozen=True)
class CavitySpec:
    """
    One-dimensional cavity between the static mirror and the movable wall

    Args:
        length: Rest length L in meters
        num_modes: Number of field modes kept in the infinite mode sums
        field_mass: Mass of the field quanta in kg (0 for the massless field)
    """

    length: float
    num_modes: int = DEFAULT_NUM_MODES
    field_mass: float = 0.0

    def __post_init__(self):
        _require(
            math.isfinite(self.length) and self.length > 0,
            f"must be a positive length in meters, got {self.length}",
            "cavity.length",
        )
        _require(
            _is_positive_int(self.num_modes),
            f"must be a positive integer, got {self.num_modes!r}",
            "cavity.num_modes",
        )
        _require(
            math.isfinite(self.field_mass) and self.field_mass >= 0,
            f"must be >= 0 kg, got {self.field_mass}",
            "cavity.field_mass",
        )
        object.__setattr__(self, "num_modes", int(self.num_modes))

    @property
    def fundamental_frequency(self) -> float:
        """Massless fundamental frequency pi c / L in rad/s"""
        return math.pi * C / self.length

    @property
    def mass_frequency(self) -> float:
        """Rest-mass frequency M_f c^2 / hbar in rad/s"""
        return self.field_mass * C ** 2 / HBAR

    @property
    def is_massive(self) -> bool:
        return self.field_mass > 0

    def momentum(self, n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        """Wave number p_n = n pi / L in 1/m"""
        return n * math.pi / self.length

    def mode_frequency(self, n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        """
        Frequency of mode n in rad/s

        Uses omega_n = sqrt(c^2 p_n^2 + M_f^2 c^4 / hbar^2), which reduces
        to n pi c / L for the massless field.
        """
        cp = C * self.momentum(n)
        return np.sqrt(cp ** 2 + self.mass_frequency ** 2)

    def mode_frequencies(self) -> np.ndarray:
        return self.mode_frequency(np.arange(1, self.num_modes + 1))

    def coupling_sq(self, n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        """
        Squared single-mode coupling c^2 p_n^2 / omega_n in rad/s

        Equals omega_n for the massless field.
        """
        cp = C * self.momentum(n)
        return cp ** 2 / self.mode_frequency(n)


@dataclass(frozen=True)
class MechanicalSpec:
    """
    Movable wall modelled as a quantum harmonic oscillator

    Args:
        omega: Intrinsic mirror frequency in rad/s
        mirror_mass: Mirror mass in kg (math.inf freezes the wall, epsilon = 0)
        length: Cavity rest length in meters, needed for epsilon

    Example:
        >>> mech = MechanicalSpec.from_epsilon(omega=2 * cavity.fundamental_frequency,
        ...                                    epsilon=1e-3, length=cavity.length)
    """

    omega: float
    mirror_mass: float
    length: float

    def __post_init__(self):
        _require(
            math.isfinite(self.omega) and self.omega > 0,
            f"must be a positive frequency in rad/s, got {self.omega}",
            "mechanics.omega",
        )
        _require(
            self.mirror_mass > 0,
            f"must be > 0 kg, got {self.mirror_mass}",
            "mechanics.mirror_mass",
        )
        _require(
            math.isfinite(self.length) and self.length > 0,
            f"must be a positive length in meters, got {self.length}",
            "mechanics.length",
        )
        _require(
            self.epsilon < EPSILON_MAX,
            f"epsilon = delta_L0 / L = {self.epsilon:.3e} must stay below {EPSILON_MAX}",
            "mechanics.mirror_mass",
        )

    @classmethod
    def from_epsilon(cls, omega: float, epsilon: float, length: float) -> "MechanicalSpec":
        """Build the oscillator whose zero-point amplitude gives the requested epsilon"""
        _require(
            math.isfinite(epsilon) and epsilon >= 0,
            f"must be >= 0, got {epsilon}",
            "mechanics.epsilon",
        )
        if epsilon == 0:
            return cls(omega=omega, mirror_mass=math.inf, length=length)
        delta_L0 = epsilon * length
        mass = HBAR / (2.0 * omega * delta_L0 ** 2)
        return cls(omega=omega, mirror_mass=mass, length=length)

    @property
    def delta_L0(self) -> float:
        """Zero-point amplitude sqrt(hbar / (2 M omega)) in meters"""
        if math.isinf(self.mirror_mass):
            return 0.0
        return math.sqrt(HBAR / (2.0 * self.mirror_mass * self.omega))

    @property
    def epsilon(self) -> float:
        return self.delta_L0 / self.length


@dataclass(frozen=True)
class InitialState:
    """
    Coherent cavity amplitudes plus a displaced squeezed thermal wall state

    All cavity modes other than k and kp start in the vacuum. The
    thermal occupation is given either through a temperature (kelvin) or
    directly as n_thermal.
    """

    k: int = 1
    kp: int = 2
    mu_k: float = 0.0
    mu_kp: float = 0.0
    beta_mag: float = 0.0
    theta: float = 0.0
    squeeze_r: float = 0.0
    squeeze_phi: float = 0.0
    temperature: float = 0.0
    n_thermal: Optional[float] = None

    def __post_init__(self):
        _require(_is_positive_int(self.k), f"must be a positive integer, got {self.k!r}", "state.k")
        _require(_is_positive_int(self.kp), f"must be a positive integer, got {self.kp!r}", "state.kp")
        _require(self.k != self.kp, f"k and kp must differ, both are {self.k}", "state.kp")
        for name in ("mu_k", "mu_kp", "theta", "squeeze_phi"):
            _require(math.isfinite(getattr(self, name)), "must be finite", f"state.{name}")
        _require(
            math.isfinite(self.beta_mag) and self.beta_mag >= 0,
            f"must be >= 0, got {self.beta_mag}",
            "state.beta_mag",
        )
        _require(
            math.isfinite(self.squeeze_r) and self.squeeze_r >= 0,
            f"must be >= 0, got {self.squeeze_r}",
            "state.squeeze_r",
        )
        _require(
            math.isfinite(self.temperature) and self.temperature >= 0,
            f"must be >= 0 K, got {self.temperature}",
            "state.temperature",
        )
        if self.n_thermal is not None:
            _require(
                math.isfinite(self.n_thermal) and self.n_thermal >= 0,
                f"must be >= 0, got {self.n_thermal}",
                "state.n_thermal",
            )
            _require(
                self.temperature == 0,
                "give either temperature or n_thermal, not both",
                "state.n_thermal",
            )
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "kp", int(self.kp))

    @property
    def beta(self) -> complex:
        return self.beta_mag * complex(math.cos(self.theta), math.sin(self.theta))

    @property
    def zeta(self) -> complex:
        return self.squeeze_r * complex(math.cos(self.squeeze_phi), math.sin(self.squeeze_phi))

    def thermal_occupation(self, omega: float) -> float:
        """
        Thermal phonon number N_T = sinh^2(r_T), tanh(r_T) = exp(-hbar omega / 2 k_B T)

        Args:
            omega: Mirror frequency in rad/s

        Returns:
            N_T (0 at T = 0)
        """
        if self.n_thermal is not None:
            return float(self.n_thermal)
        if self.temperature == 0:
            return 0.0
        # sinh^2(artanh(x)) = x^2 / (1 - x^2) = 1 / expm1(hbar omega / k_B T)
        return 1.0 / math.expm1(HBAR * omega / (KB * self.temperature))

    def initial_phonons(self, omega: float) -> float:
        """N_b(0) = |beta|^2 + sinh^2 r + N_T cosh 2r"""
        n_thermal = self.thermal_occupation(omega)
        r = self.squeeze_r
        return self.beta_mag ** 2 + math.sinh(r) ** 2 + n_thermal * math.cosh(2 * r)


class DriveTarget(str, Enum):
    MODE_K = "mode_k"
    MODE_KP = "mode_kp"
    MECHANICAL = "mechanical"


class DriveForm(str, Enum):
    EXDR_RAMP = "exdr_ramp"
    ZERO = "zero"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class DriveProfile:
    """
    External drive lambda_x(t), lambda_p(t) acting on one target quadrature pair

    The exdr ramp is lambda_x = -(g Omega / 2) exp(-Omega t) cos(nu t) and
    lambda_p = -(g Omega / 2) exp(-Omega t) sin(nu t), where the carrier nu
    defaults to the free frequency of the driven target. Tabulated drives
    interpolate (times, lambda_x, lambda_p) linearly and vanish outside
    the table.

    Args:
        target: Driven degree of freedom
        form: Drive shape
        g: Dimensionless amplitude (signed)
        Omega: Ramp rate in rad/s
        carrier: Carrier frequency in rad/s, None for the target frequency
        times, lambda_x, lambda_p: Table for tabulated drives (s, rad/s, rad/s)
    """

    target: DriveTarget
    form: DriveForm = DriveForm.EXDR_RAMP
    g: float = 0.0
    Omega: float = 0.0
    carrier: Optional[float] = None
    times: Tuple[float, ...] = ()
    lambda_x: Tuple[float, ...] = ()
    lambda_p: Tuple[float, ...] = ()

    def __post_init__(self):
        try:
            object.__setattr__(self, "target", DriveTarget(self.target))
        except ValueError:
            raise PhysicsValidationError(
                f"unknown drive target {self.target!r}", field="drives.target"
            )
        try:
            object.__setattr__(self, "form", DriveForm(self.form))
        except ValueError:
            raise PhysicsValidationError(f"unknown drive form {self.form!r}", field="drives.form")

        for name in ("times", "lambda_x", "lambda_p"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

        _require(math.isfinite(self.g), "must be finite", "drives.g")
        _require(
            math.isfinite(self.Omega) and self.Omega >= 0,
            f"must be >= 0 rad/s, got {self.Omega}",
            "drives.Omega",
        )
        if self.carrier is not None:
            _require(math.isfinite(self.carrier), "must be finite", "drives.carrier")

        if self.form == DriveForm.TABULATED:
            n = len(self.times)
            _require(n >= 2, "a tabulated drive needs at least two samples", "drives.times")
            _require(
                len(self.lambda_x) == n and len(self.lambda_p) == n,
                "times, lambda_x and lambda_p must have equal length",
                "drives.lambda_x",
            )
            _require(
                bool(np.all(np.diff(self.times) > 0)),
                "times must be strictly increasing",
                "drives.times",
            )

    @property
    def is_zero(self) -> bool:
        if self.form == DriveForm.ZERO:
            return True
        if self.form == DriveForm.EXDR_RAMP:
            return self.g == 0 or self.Omega == 0
        return not (np.any(self.lambda_x) or np.any(self.lambda_p))

    def carrier_frequency(self, frequency: float) -> float:
        return frequency if self.carrier is None else self.carrier

    def lambdas(self, t, frequency: float) -> Tuple:
        """
        Drive coefficients at time t

        Args:
            t: Time in seconds (scalar or array)
            frequency: Free frequency of the driven target in rad/s

        Returns:
            Tuple (lambda_x, lambda_p) in rad/s
        """
        t = np.asarray(t, dtype=float)
        if self.is_zero:
            zero = np.zeros_like(t)
            return zero, zero
        if self.form == DriveForm.EXDR_RAMP:
            nu = self.carrier_frequency(frequency)
            envelope = -0.5 * self.g * self.Omega * np.exp(-self.Omega * t)
            return envelope * np.cos(nu * t), envelope * np.sin(nu * t)
        lx = np.interp(t, self.times, self.lambda_x, left=0.0, right=0.0)
        lp = np.interp(t, self.times, self.lambda_p, left=0.0, right=0.0)
        return lx, lp

    def validity_warnings(self, mirror_frequency: float, mode_frequencies: Sequence[float]) -> List[str]:
        """
        Check the ramp conditions Omega >> omega and Omega != omega_n

        Returns:
            Human-readable warnings, empty when the drive is within its regime
        """
        if self.form != DriveForm.EXDR_RAMP or self.is_zero:
            return []
        warnings = []
        if self.Omega < DRIVE_RAMP_FACTOR * mirror_frequency:
            warnings.append(
                f"{self.target.value} drive: Omega = {self.Omega:.4e} rad/s is below "
                f"{DRIVE_RAMP_FACTOR:g} x mirror frequency {mirror_frequency:.4e} rad/s"
            )
        mode_frequencies = np.asarray(mode_frequencies, dtype=float)
        hits = np.nonzero(np.abs(mode_frequencies - self.Omega) <= 1e-6 * mode_frequencies)[0]
        if hits.size:
            warnings.append(
                f"{self.target.value} drive: Omega coincides with cavity mode n = {int(hits[0]) + 1}"
            )
        return warnings
