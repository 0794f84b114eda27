from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from models.constants import RESONANCE_TOLERANCE
from models.system import SystemConfig


class ResonanceType(str, Enum):
    DEGENERATE = "degenerate"
    NONDEGENERATE = "nondegenerate"
    MODE_MIXING = "mode_mixing"
    OFF_RESONANT = "off_resonant"


@dataclass(frozen=True)
class ResonanceKind:
    """
    Result of matching the mirror frequency against the cavity spectrum

    modes holds (k,) for degenerate, (k, kp) for nondegenerate and
    (kp, k) with omega = omega_kp - omega_k for mode mixing.
    """

    kind: ResonanceType
    modes: Tuple[int, ...] = ()
    tolerance: float = 0.0
    ambiguous: bool = False
    matches: int = 0

    def __str__(self) -> str:
        if self.kind == ResonanceType.OFF_RESONANT:
            return "off_resonant"
        label = f"{self.kind.value}({', '.join(str(m) for m in self.modes)})"
        return label + (" [ambiguous]" if self.ambiguous else "")


def resonance_tolerance(cfg: SystemConfig) -> float:
    """delta_res = 1e-6 omega_1 in rad/s"""
    return RESONANCE_TOLERANCE * cfg.mode_frequencies[0]


def classify_resonance(cfg: SystemConfig, tolerance: Optional[float] = None) -> ResonanceKind:
    """
    Classify the mirror frequency as degenerate, nondegenerate or mode mixing

    Conditions are tried in the order omega = 2 omega_k, omega = omega_k + omega_kp,
    omega = omega_kp - omega_k, scanning k < kp <= num_modes; the first hit
    wins. The result is flagged ambiguous when more than one condition holds.

    Args:
        cfg: System configuration
        tolerance: Detection tolerance in rad/s (default 1e-6 omega_1)

    Returns:
        ResonanceKind

    Example:
        >>> classify_resonance(cfg)    # omega = 2 pi c / L
        ResonanceKind(kind=<ResonanceType.DEGENERATE: 'degenerate'>, modes=(1,), ...)
    """
    delta = resonance_tolerance(cfg) if tolerance is None else tolerance
    omega = cfg.omega
    w = cfg.mode_frequencies
    n_modes = len(w)

    hits: List[Tuple[ResonanceType, Tuple[int, ...]]] = []
    for k in range(1, n_modes + 1):
        if abs(omega - 2 * w[k - 1]) <= delta:
            hits.append((ResonanceType.DEGENERATE, (k,)))
    for k in range(1, n_modes + 1):
        for kp in range(k + 1, n_modes + 1):
            if abs(omega - (w[k - 1] + w[kp - 1])) <= delta:
                hits.append((ResonanceType.NONDEGENERATE, (k, kp)))
    for k in range(1, n_modes + 1):
        for kp in range(k + 1, n_modes + 1):
            if abs(omega - (w[kp - 1] - w[k - 1])) <= delta:
                hits.append((ResonanceType.MODE_MIXING, (kp, k)))

    if not hits:
        return ResonanceKind(ResonanceType.OFF_RESONANT, (), delta, False, 0)
    kind, modes = hits[0]
    return ResonanceKind(kind, modes, delta, len(hits) > 1, len(hits))


def is_degenerate_with(cfg: SystemConfig, k: int, tolerance: Optional[float] = None) -> bool:
    """True when omega = 2 omega_k within the tolerance"""
    delta = resonance_tolerance(cfg) if tolerance is None else tolerance
    return abs(cfg.omega - 2 * cfg.mode_frequency(k)) <= delta


def is_nondegenerate_with(cfg: SystemConfig, k: int, kp: int,
                          tolerance: Optional[float] = None) -> bool:
    delta = resonance_tolerance(cfg) if tolerance is None else tolerance
    return abs(cfg.omega - cfg.mode_frequency(k) - cfg.mode_frequency(kp)) <= delta
