from typing import Iterable, List, Optional

import numpy as np

from models.aux_functions import AuxFunctions
from models.specs import DriveTarget
from models.system import SystemConfig
from utils.errors import PhysicsValidationError


class MeanField:
    """
    Zero-order mean fields in reduced time s = t_tilde

    The cavity field enters the interaction only through
    Phi(s) = sum_n (-1)^n kappa_n Re<a_n>(s), where only the coherently
    excited or driven modes k and kp contribute at zero order.
    """

    def __init__(self, cfg: SystemConfig, modes: Optional[Iterable[int]] = None):
        self.cfg = cfg
        self.aux = AuxFunctions(cfg)
        if modes is None:
            self.modes = np.arange(1, cfg.cavity.num_modes + 1)
        else:
            self.modes = np.array(sorted(set(int(m) for m in modes)))
            if self.modes.size == 0 or self.modes[0] < 1 or self.modes[-1] > cfg.cavity.num_modes:
                raise PhysicsValidationError(
                    f"modes must lie in 1..{cfg.cavity.num_modes}", field="modes"
                )
        self._active = self._active_modes()

    def _active_modes(self) -> List[int]:
        active = []
        for n in (self.cfg.state.k, self.cfg.state.kp):
            if n not in self.modes:
                continue
            target = self.cfg.target_for_mode(n)
            drive = self.cfg.drive_for(target)
            driven = drive is not None and not drive.is_zero
            if self.cfg.coherent_amplitude(n) != 0 or driven:
                active.append(n)
        return active

    @property
    def active_modes(self) -> List[int]:
        """Modes with a non-zero zero-order amplitude"""
        return list(self._active)

    def kappa(self, n):
        return np.sqrt(self.cfg.reduced_coupling_sq(n))

    def seconds(self, s):
        return self.cfg.seconds(s)

    def mode_amplitude(self, n: int, s):
        """<a_n>(s) at zero order"""
        if n not in self._active:
            return np.zeros_like(np.asarray(s, dtype=float), dtype=complex)
        return self.aux.mean_amplitude(self.seconds(s), self.cfg.target_for_mode(n))

    def mirror_amplitude(self, s):
        """<b>(s) at zero order"""
        return self.aux.mean_amplitude(self.seconds(s), DriveTarget.MECHANICAL)

    def phi(self, s):
        """Phi(s) = sum_n (-1)^n kappa_n Re<a_n>(s)"""
        total = np.zeros_like(np.asarray(s, dtype=float))
        for n in self._active:
            total = total + (-1) ** n * self.kappa(n) * np.real(self.mode_amplitude(n, s))
        return total if np.ndim(total) else float(total)

    def x_b(self, s):
        """<X_b>(s) = Re<b>(s) = |beta| cos(omega t - theta) + xi(t)"""
        value = np.real(self.mirror_amplitude(s))
        return value if np.ndim(value) else float(value)

    def fastest_frequency(self) -> float:
        """Largest reduced frequency appearing in the zero-order fields"""
        frequencies = [self.cfg.reduced_mirror_frequency]
        frequencies += [float(self.cfg.reduced_frequency(n)) for n in self._active]
        for drive in self.cfg.drives:
            frequencies.append(drive.Omega / self.cfg.unit_frequency)
            if drive.carrier is not None:
                frequencies.append(abs(drive.carrier) / self.cfg.unit_frequency)
        return 3.0 * max(frequencies)
