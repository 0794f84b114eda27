import logging
from dataclasses import dataclass
from functools import reduce
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import norm as sparse_norm

from models.system import SystemConfig
from utils.errors import ConfigError, NumericalError, PhysicsValidationError

logger = logging.getLogger(__name__)

DIMENSION_CAP = 200_000
DENSE_LIMIT = 4000
MAX_ORACLE_MODES = 4
MAX_TRAJECTORIES = 64
LEAKAGE_THRESHOLD = 1e-6
HERMITICITY_TOLERANCE = 1e-14


@dataclass(frozen=True)
class Truncation:
    """
    Retained part of the cavity + wall Fock space

    n_max and m_max count the retained levels of each ladder, so mode n
    keeps the Fock states 0 .. n_max - 1 and the Hilbert dimension is
    m_max * n_max ** len(modes_used). n_max may also be given per mode.

    Args:
        modes_used: Cavity mode indices kept in the simulation (at most 4)
        n_max: Levels per cavity mode
        m_max: Levels of the wall oscillator
        dimension_cap: Largest allowed Hilbert dimension
        dense_limit: Mixed states up to this dimension evolve as full density matrices
        max_trajectories: Mixed states above dense_limit are sampled down to this many members
        leakage_threshold: Largest allowed population of the top two levels of any ladder
    """

    modes_used: Tuple[int, ...]
    n_max: Union[int, Tuple[int, ...]] = 10
    m_max: int = 12
    dimension_cap: int = DIMENSION_CAP
    dense_limit: int = DENSE_LIMIT
    max_trajectories: int = MAX_TRAJECTORIES
    leakage_threshold: float = LEAKAGE_THRESHOLD

    def __post_init__(self):
        modes = tuple(int(m) for m in self.modes_used)
        if not modes:
            raise ConfigError("at least one cavity mode is needed", field="truncation.modes_used")
        if len(set(modes)) != len(modes) or min(modes) < 1:
            raise ConfigError(
                f"modes must be distinct positive indices, got {modes}", field="truncation.modes_used"
            )
        if len(modes) > MAX_ORACLE_MODES:
            raise ConfigError(
                f"the oracle handles at most {MAX_ORACLE_MODES} modes, got {len(modes)}",
                field="truncation.modes_used",
            )
        object.__setattr__(self, "modes_used", modes)

        if np.ndim(self.n_max):
            levels = tuple(int(n) for n in self.n_max)
            if len(levels) != len(modes):
                raise ConfigError("one n_max per mode is needed", field="truncation.n_max")
        else:
            levels = (int(self.n_max),) * len(modes)
        if min(levels) < 2:
            raise ConfigError("every cavity ladder needs at least 2 levels", field="truncation.n_max")
        if int(self.m_max) < 2:
            raise ConfigError("the wall ladder needs at least 2 levels", field="truncation.m_max")
        object.__setattr__(self, "n_max", levels)
        object.__setattr__(self, "m_max", int(self.m_max))

        if self.dimension > self.dimension_cap:
            raise ConfigError(
                f"Hilbert dimension {self.dimension} exceeds the cap {self.dimension_cap}",
                field="truncation",
            )

    @classmethod
    def for_config(cls, cfg: SystemConfig, n_max: int = 10, m_max: int = 12,
                   spectators: Sequence[int] = (), **kwargs) -> "Truncation":
        """Truncation over modes k, kp plus optional spectator modes"""
        modes = [cfg.state.k, cfg.state.kp] + [m for m in spectators if m not in (cfg.state.k, cfg.state.kp)]
        return cls(modes_used=tuple(modes), n_max=n_max, m_max=m_max, **kwargs)

    @property
    def dims(self) -> Tuple[int, ...]:
        """Ladder sizes in tensor order: cavity modes, then the wall"""
        return tuple(self.n_max) + (self.m_max,)

    @property
    def dimension(self) -> int:
        return int(np.prod(self.dims))

    def position(self, mode: int) -> int:
        try:
            return self.modes_used.index(mode)
        except ValueError:
            raise PhysicsValidationError(
                f"mode {mode} is not among the simulated modes {self.modes_used}",
                field="truncation.modes_used",
            )

    def enlarged(self, extra: int = 4) -> "Truncation":
        """Same truncation with every ladder raised by extra levels"""
        return Truncation(
            modes_used=self.modes_used,
            n_max=tuple(n + extra for n in self.n_max),
            m_max=self.m_max + extra,
            dimension_cap=self.dimension_cap,
            dense_limit=self.dense_limit,
            max_trajectories=self.max_trajectories,
            leakage_threshold=self.leakage_threshold,
        )

    def check_covers(self, cfg: SystemConfig) -> None:
        """Every mode carrying photons or a drive must be simulated"""
        for n in (cfg.state.k, cfg.state.kp):
            drive = cfg.drive_for(cfg.target_for_mode(n))
            driven = drive is not None and not drive.is_zero
            if (cfg.coherent_amplitude(n) != 0 or driven) and n not in self.modes_used:
                raise PhysicsValidationError(
                    f"mode {n} is excited or driven but not among {self.modes_used}",
                    field="truncation.modes_used",
                )
        for n in self.modes_used:
            if n > cfg.cavity.num_modes:
                raise PhysicsValidationError(
                    f"mode {n} exceeds num_modes = {cfg.cavity.num_modes}",
                    field="truncation.modes_used",
                )


def annihilation(levels: int) -> sp.csr_matrix:
    """Truncated ladder operator with sqrt(1) .. sqrt(levels - 1) on the upper diagonal"""
    return sp.diags(np.sqrt(np.arange(1, levels, dtype=float)), 1, shape=(levels, levels),
                    format="csr", dtype=complex)


@dataclass
class FockOperator:
    """Sparse operator on the truncated tensor basis, in units of hbar pi c / L where it is an energy"""

    label: str
    matrix: sp.csr_matrix

    @property
    def H(self) -> "FockOperator":
        return FockOperator(f"{self.label}^dag", self.matrix.conj().T.tocsr())

    def __add__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(f"{self.label} + {other.label}", (self.matrix + other.matrix).tocsr())

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(f"{self.label} {other.label}", (self.matrix @ other.matrix).tocsr())

    def scaled(self, factor: complex, label: Optional[str] = None) -> "FockOperator":
        return FockOperator(label or f"{factor:g} {self.label}", (factor * self.matrix).tocsr())

    def hermiticity_error(self) -> float:
        """max |A - A^dag| over the elements divided by the Frobenius norm of A"""
        scale = sparse_norm(self.matrix)
        if scale == 0:
            return 0.0
        diff = self.matrix - self.matrix.conj().T
        largest = abs(diff).max() if diff.nnz else 0.0
        return float(largest) / scale

    def check_hermitian(self, tolerance: float = HERMITICITY_TOLERANCE) -> None:
        error = self.hermiticity_error()
        if error > tolerance:
            raise NumericalError(
                f"{self.label} is not Hermitian: relative deviation {error:.3e}", field="hamiltonian"
            )

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


class FockSpace:
    """
    Ladder operators of the truncated cavity modes and the wall

    Tensor order follows Truncation.dims: the cavity modes in the order
    of modes_used, then the wall oscillator.
    """

    def __init__(self, truncation: Truncation):
        self.truncation = truncation
        self.dims = truncation.dims
        self.dimension = truncation.dimension
        self._levels = np.indices(self.dims).reshape(len(self.dims), -1)

    def embed(self, local: sp.spmatrix, slot: int) -> sp.csr_matrix:
        """Place a single-ladder operator at a tensor slot"""
        factors = [sp.identity(d, dtype=complex, format="csr") for d in self.dims]
        factors[slot] = local
        return reduce(lambda x, y: sp.kron(x, y, format="csr"), factors)

    def identity(self) -> FockOperator:
        return FockOperator("1", sp.identity(self.dimension, dtype=complex, format="csr"))

    def a(self, mode: int) -> FockOperator:
        slot = self.truncation.position(mode)
        return FockOperator(f"a_{mode}", self.embed(annihilation(self.dims[slot]), slot))

    def b(self) -> FockOperator:
        slot = len(self.dims) - 1
        return FockOperator("b", self.embed(annihilation(self.dims[slot]), slot))

    def number(self, mode: int) -> FockOperator:
        a = self.a(mode)
        return FockOperator(f"N_{mode}", (a.H @ a).matrix)

    def mirror_number(self) -> FockOperator:
        b = self.b()
        return FockOperator("N_b", (b.H @ b).matrix)

    @staticmethod
    def quadratures(op: FockOperator) -> Tuple[FockOperator, FockOperator]:
        """X = (a + a^dag) / 2 and P = (a - a^dag) / 2i"""
        dag = op.matrix.conj().T
        x = FockOperator(f"X[{op.label}]", (0.5 * (op.matrix + dag)).tocsr())
        p = FockOperator(f"P[{op.label}]", (-0.5j * (op.matrix - dag)).tocsr())
        return x, p

    def levels(self, slot: int) -> np.ndarray:
        """Occupation of one ladder for every basis state"""
        return self._levels[slot]

    def top_level_masks(self) -> List[np.ndarray]:
        """Boolean masks of the basis states sitting in the top two levels of each ladder"""
        return [self._levels[slot] >= d - 2 for slot, d in enumerate(self.dims)]

    def labels(self) -> List[str]:
        return [f"mode {m}" for m in self.truncation.modes_used] + ["wall"]
