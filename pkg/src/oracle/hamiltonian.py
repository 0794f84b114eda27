import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import scipy.sparse as sp

from models.specs import DriveProfile, DriveTarget
from models.system import SystemConfig
from oracle.fock_space import FockOperator, FockSpace, Truncation

logger = logging.getLogger(__name__)


@dataclass
class DriveTerm:
    """2 lambda_x(t) X_j + sign * 2 lambda_p(t) P_j for one driven ladder"""

    target: DriveTarget
    drive: DriveProfile
    frequency: float
    x: FockOperator
    p: FockOperator


class HamiltonianBuilder:
    """
    Lab-frame Hamiltonian of the truncated cavity + wall system

    In units of hbar pi c / L and reduced time t_tilde = pi c t / L:

        H(t) = sum_n w_n N_n + w N_b - eps :Phi^2: X_b
               + sum_j [2 lambda_xj(t) X_j - 2 lambda_pj(t) P_j]

    with Phi = sum_n (-1)^n kappa_n (a_n + a_n^dag), X_b = (b + b^dag) / 2
    and kappa_n^2 the reduced field coupling (w_n for the massless field).
    The minus sign on the P drive reproduces the Lambda functions of the
    perturbative engine; printed_sign=True flips it.
    """

    def __init__(self, cfg: SystemConfig, truncation: Truncation, printed_sign: bool = False):
        truncation.check_covers(cfg)
        self.cfg = cfg
        self.truncation = truncation
        self.space = FockSpace(truncation)
        self.p_sign = 1.0 if printed_sign else -1.0

        space = self.space
        modes = truncation.modes_used
        self.numbers = {n: space.number(n) for n in modes}
        self.mirror_number = space.mirror_number()
        self.x_b, self.p_b = space.quadratures(space.b())

        free = sp.csr_matrix((space.dimension, space.dimension), dtype=complex)
        for n in modes:
            free = free + float(cfg.reduced_frequency(n)) * self.numbers[n].matrix
        free = free + cfg.reduced_mirror_frequency * self.mirror_number.matrix
        self.free = FockOperator("H_0", free.tocsr())

        self.phi_sq = self._normal_ordered_phi_sq()
        self.interaction = FockOperator("H_I", -(self.phi_sq.matrix @ self.x_b.matrix).tocsr())
        self.static = FockOperator("H_0 + eps H_I", (free + cfg.epsilon * self.interaction.matrix).tocsr())
        self.drive_terms = self._drive_terms()

        self.static.check_hermitian()
        for term in self.drive_terms:
            term.x.check_hermitian()
            term.p.check_hermitian()
        logger.debug(
            "Hamiltonian: dimension %d, %d non-zeros, %d drive terms",
            space.dimension, self.static.matrix.nnz, len(self.drive_terms),
        )

    def _normal_ordered_phi_sq(self) -> FockOperator:
        """:Phi^2: = A^2 + A^dag^2 + 2 A^dag A with A = sum_n (-1)^n kappa_n a_n"""
        A = sp.csr_matrix((self.space.dimension, self.space.dimension), dtype=complex)
        for n in self.truncation.modes_used:
            kappa = np.sqrt(float(self.cfg.reduced_coupling_sq(n)))
            A = A + (-1) ** n * kappa * self.space.a(n).matrix
        Ad = A.conj().T.tocsr()
        return FockOperator(":Phi^2:", (A @ A + Ad @ Ad + 2 * (Ad @ A)).tocsr())

    def _drive_terms(self) -> List[DriveTerm]:
        terms = []
        for drive in self.cfg.drives:
            if drive.is_zero:
                continue
            if drive.target == DriveTarget.MECHANICAL:
                x, p = self.x_b, self.p_b
            else:
                mode = self.cfg.state.k if drive.target == DriveTarget.MODE_K else self.cfg.state.kp
                x, p = self.space.quadratures(self.space.a(mode))
            frequency = self.cfg.target_frequency(drive.target)
            terms.append(DriveTerm(drive.target, drive, frequency, x, p))
        return terms

    def drive_coefficients(self, s: float) -> List[Tuple[float, float]]:
        """Reduced (2 lambda_x, 2 sign lambda_p) of each drive term at reduced time s"""
        unit = self.cfg.unit_frequency
        seconds = s / unit
        coefficients = []
        for term in self.drive_terms:
            lx, lp = term.drive.lambdas(seconds, term.frequency)
            coefficients.append((2 * float(lx) / unit, 2 * self.p_sign * float(lp) / unit))
        return coefficients

    def mechanical_lambda_x(self, s: float) -> float:
        """lambda_xb in rad/s at reduced time s (0 without a wall drive)"""
        for term in self.drive_terms:
            if term.target == DriveTarget.MECHANICAL:
                lx, _ = term.drive.lambdas(s / self.cfg.unit_frequency, term.frequency)
                return float(lx)
        return 0.0

    def apply(self, s: float, y: np.ndarray) -> np.ndarray:
        """H(s) @ y for a state vector or a matrix of column vectors"""
        result = self.static.matrix @ y
        for term, (cx, cp) in zip(self.drive_terms, self.drive_coefficients(s)):
            if cx:
                result = result + cx * (term.x.matrix @ y)
            if cp:
                result = result + cp * (term.p.matrix @ y)
        return result

    def at(self, s: float) -> FockOperator:
        matrix = self.static.matrix.copy()
        for term, (cx, cp) in zip(self.drive_terms, self.drive_coefficients(s)):
            matrix = matrix + cx * term.x.matrix + cp * term.p.matrix
        return FockOperator("H(t)", matrix.tocsr())


def build_hamiltonian(cfg: SystemConfig, truncation: Truncation, t: float,
                      printed_sign: bool = False) -> FockOperator:
    """
    Full Hamiltonian H_0 + eps H_I + H_dr(t) at time t

    Args:
        cfg: System configuration
        truncation: Simulated modes and ladder sizes
        t: Time in seconds
        printed_sign: Use +2 lambda_p P instead of -2 lambda_p P in the drive

    Returns:
        FockOperator in units of hbar pi c / L

    Example:
        >>> H = build_hamiltonian(cfg, Truncation((1, 2), n_max=4, m_max=4), 0.0)
        >>> H.matrix.shape
        (64, 64)
    """
    builder = HamiltonianBuilder(cfg, truncation, printed_sign)
    H = builder.at(float(cfg.reduced_time(t)))
    H.check_hermitian()
    return H
