import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from models.system import SystemConfig
from oracle.fock_space import LEAKAGE_THRESHOLD, Truncation
from utils.errors import PhysicsValidationError

logger = logging.getLogger(__name__)

PADDING = 40
WEIGHT_CUTOFF = 1e-12


@dataclass
class FockDensity:
    """
    Density matrix on the truncated basis held as a weighted set of pure components

    rho = sum_i w_i |psi_i><psi_i|. Pure states have a single component;
    displaced squeezed thermal wall states carry one component per
    thermal level whose weight exceeds 1e-12.
    """

    dims: Tuple[int, ...]
    components: List[Tuple[float, np.ndarray]]
    tags: Dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return int(np.prod(self.dims))

    @property
    def is_pure(self) -> bool:
        return len(self.components) == 1

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    def to_dense(self) -> np.ndarray:
        rho = np.zeros((self.dimension, self.dimension), dtype=complex)
        for weight, vector in self.components:
            rho += weight * np.outer(vector, vector.conj())
        return rho

    def trace(self) -> float:
        return float(sum(w * np.vdot(v, v).real for w, v in self.components))

    def purity(self) -> float:
        rho = self.to_dense()
        return float(np.real(np.vdot(rho, rho)))

    def expectation(self, matrix) -> complex:
        return complex(sum(w * np.vdot(v, matrix @ v) for w, v in self.components))

    def tensor(self, other: "FockDensity") -> "FockDensity":
        """Product state self (x) other, keeping the component structure"""
        components = [
            (w1 * w2, np.kron(v1, v2))
            for w1, v1 in self.components
            for w2, v2 in other.components
        ]
        tags = {**self.tags, **other.tags}
        return FockDensity(dims=self.dims + other.dims, components=components, tags=tags)


def _padded_ladder(size: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, size, dtype=float)), 1).astype(complex)


def _cut(vector: np.ndarray, levels: int, label: str) -> np.ndarray:
    """Project a padded vector onto the retained levels and renormalize"""
    kept = vector[:levels]
    norm = np.linalg.norm(kept)
    lost = 1.0 - norm ** 2
    if lost > LEAKAGE_THRESHOLD:
        logger.warning("%s loses %.3e of its norm to the truncation at %d levels", label, lost, levels)
    return kept / norm


def coherent_state(alpha: complex, levels: int) -> FockDensity:
    """
    Coherent state |alpha> on a ladder with the given number of levels

    Example:
        >>> coherent_state(0.0, 4).components[0][1]
        array([1.+0.j, 0.+0.j, 0.+0.j, 0.+0.j])
    """
    if alpha == 0:
        return vacuum_state(levels)
    n = np.arange(levels + PADDING)
    log_amp = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    amplitudes = np.exp(log_amp + 1j * np.angle(alpha) * n)
    vector = _cut(amplitudes, levels, f"coherent state {complex(alpha):.3g}")
    return FockDensity(dims=(levels,), components=[(1.0, vector)], tags={"coherent": complex(alpha)})


def thermal_weights(n_thermal: float, size: int) -> np.ndarray:
    """Bose-Einstein populations N^m / (1 + N)^(m + 1) for m < size"""
    m = np.arange(size)
    if n_thermal == 0:
        weights = np.zeros(size)
        weights[0] = 1.0
        return weights
    return (n_thermal / (1 + n_thermal)) ** m / (1 + n_thermal)


def dst_state(beta: complex, zeta: complex, n_thermal: float, levels: int) -> FockDensity:
    """
    Displaced squeezed thermal state D(beta) S(zeta) rho_T S^dag(zeta) D^dag(beta)

    S(zeta) = exp[(zeta^* b^2 - zeta b^dag^2) / 2]. The unitaries are built
    with expm in a space padded by 40 levels and applied to the thermal
    eigenvectors, giving one pure component per thermal level.

    Args:
        beta: Coherent amplitude
        zeta: Squeezing parameter r exp(i phi)
        n_thermal: Thermal occupation N_T
        levels: Retained wall levels
    """
    if n_thermal < 0:
        raise PhysicsValidationError(f"N_T must be >= 0, got {n_thermal}", field="state.n_thermal")
    size = levels + PADDING
    b = _padded_ladder(size)
    bd = b.conj().T
    displacement = expm(beta * bd - np.conj(beta) * b)
    squeeze = expm(0.5 * (np.conj(zeta) * (b @ b) - zeta * (bd @ bd)))
    unitary = displacement @ squeeze

    weights = thermal_weights(n_thermal, size)
    components = []
    for m in np.nonzero(weights >= WEIGHT_CUTOFF)[0]:
        vector = unitary[:levels, m]
        norm_sq = float(np.vdot(vector, vector).real)
        weight = float(weights[m]) * norm_sq
        if weight < WEIGHT_CUTOFF:
            continue
        components.append((weight, vector / math.sqrt(norm_sq)))
    total = sum(w for w, _ in components)
    if 1.0 - total > LEAKAGE_THRESHOLD:
        logger.warning("DST state loses %.3e of its trace to the truncation at %d levels", 1.0 - total, levels)
    components = [(w / total, v) for w, v in components]
    tags = {"beta": complex(beta), "zeta": complex(zeta), "n_thermal": float(n_thermal)}
    return FockDensity(dims=(levels,), components=components, tags=tags)


def vacuum_state(levels: int) -> FockDensity:
    vector = np.zeros(levels, dtype=complex)
    vector[0] = 1.0
    return FockDensity(dims=(levels,), components=[(1.0, vector)], tags={"vacuum": True})


def initial_density(cfg: SystemConfig, truncation: Truncation) -> FockDensity:
    """
    Initial state of the truncated system

    Modes k and kp start in the coherent states mu_k and mu_kp, every other
    simulated mode in the vacuum, the wall in the DST state of cfg.state.
    """
    truncation.check_covers(cfg)
    ladders = []
    for mode, levels in zip(truncation.modes_used, truncation.n_max):
        mu = cfg.coherent_amplitude(mode)
        ladders.append(coherent_state(mu, levels))
    ladders.append(dst_state(cfg.state.beta, cfg.state.zeta, cfg.n_thermal, truncation.m_max))
    rho = reduce(lambda x, y: x.tensor(y), ladders)
    logger.debug("initial state: %d components, dimension %d", len(rho.components), rho.dimension)
    return rho


def sample_components(rho: FockDensity, count: int, seed: Optional[int] = None) -> FockDensity:
    """
    Draw count components with probability equal to their weights

    The sampled ensemble carries equal weights 1 / count.
    """
    if len(rho.components) <= count:
        return rho
    rng = np.random.default_rng(seed)
    weights = rho.weights / rho.weights.sum()
    picks = rng.choice(len(rho.components), size=count, p=weights)
    components = [(1.0 / count, rho.components[i][1]) for i in picks]
    tags = {**rho.tags, "sampled": count, "seed": seed}
    return FockDensity(dims=rho.dims, components=components, tags=tags)

