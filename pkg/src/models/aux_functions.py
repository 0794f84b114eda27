import logging
import math
from typing import Tuple

import numpy as np

from models.quadrature import cexpm1, integrate
from models.specs import DriveForm, DriveTarget
from models.system import SystemConfig
from utils.errors import PhysicsValidationError

logger = logging.getLogger(__name__)


class AuxFunctions:
    """
    Drive-frame auxiliary functions Lambda_x, Lambda_p, xi, psi and vartheta

    All public methods take times in seconds. Lambda_xj and Lambda_pj are
    the integrals from 0 to t of

        dLambda_pj/dt = lambda_xj sin(w_j t) - lambda_pj cos(w_j t)
        dLambda_xj/dt = lambda_xj cos(w_j t) + lambda_pj sin(w_j t)

    where w_j is the free frequency of target j. With these, the mean
    zero-order amplitude of target j is exp(-i w_j t)(mu_j + Lambda_pj - i Lambda_xj).
    """

    def __init__(self, cfg: SystemConfig):
        self.cfg = cfg

    # -- drive coefficients ----------------------------------------------------

    def drive_coefficients(self, t, target: DriveTarget) -> Tuple:
        """(lambda_x, lambda_p) of target at time t, in rad/s"""
        drive = self.cfg.drive_for(target)
        if drive is None:
            zero = np.zeros_like(np.asarray(t, dtype=float))
            return zero, zero
        return drive.lambdas(t, self.cfg.target_frequency(target))

    # -- Lambda ----------------------------------------------------------------

    def big_lambda(self, t, target: DriveTarget) -> Tuple:
        """
        Lambda_x(t), Lambda_p(t) of a target

        Args:
            t: Time in seconds (>= 0), scalar or array for exdr drives
            target: Drive target

        Returns:
            Tuple (Lambda_x, Lambda_p), dimensionless

        Example:
            >>> aux.big_lambda(0.0, DriveTarget.MECHANICAL)
            (0.0, 0.0)
        """
        target = DriveTarget(target)
        self._check_time(t)
        drive = self.cfg.drive_for(target)
        if drive is None or drive.is_zero:
            zero = np.zeros_like(np.asarray(t, dtype=float))
            return (zero, zero) if np.ndim(t) else (0.0, 0.0)

        if drive.form == DriveForm.EXDR_RAMP:
            return self._exdr_lambda(np.asarray(t, dtype=float), target)

        if np.ndim(t):
            pairs = [self.big_lambda_quadrature(float(s), target) for s in np.ravel(t)]
            lx = np.array([p[0] for p in pairs]).reshape(np.shape(t))
            lp = np.array([p[1] for p in pairs]).reshape(np.shape(t))
            return lx, lp
        return self.big_lambda_quadrature(float(t), target)

    def _exdr_lambda(self, t: np.ndarray, target: DriveTarget) -> Tuple:
        drive = self.cfg.drive_for(target)
        w = self.cfg.target_frequency(target)
        detuning = w - drive.carrier_frequency(w)
        a = complex(-drive.Omega, detuning)
        # J = integral_0^t exp(a t') dt'
        if a == 0:
            J = t.astype(complex)
        else:
            J = cexpm1(a * t) / a
        prefactor = -0.5 * drive.g * drive.Omega
        lx = prefactor * np.real(J)
        lp = prefactor * np.imag(J)
        if np.ndim(lx):
            return lx, lp
        return float(lx), float(lp)

    def big_lambda_quadrature(self, t: float, target: DriveTarget,
                              printed_sign: bool = False) -> Tuple[float, float]:
        """
        Lambda_x, Lambda_p by adaptive quadrature (absolute tolerance 1e-12)

        With printed_sign the lambda_p contributions enter with the
        opposite sign, i.e. dLambda_p/dt = lambda_x sin + lambda_p cos and
        dLambda_x/dt = lambda_x cos - lambda_p sin.
        """
        target = DriveTarget(target)
        self._check_time(t)
        if t == 0:
            return 0.0, 0.0
        drive = self.cfg.drive_for(target)
        if drive is None or drive.is_zero:
            return 0.0, 0.0

        unit = self.cfg.unit_frequency
        w = self.cfg.target_frequency(target)
        sign = -1.0 if printed_sign else 1.0

        def rates(s: float) -> Tuple[float, float, float, float]:
            seconds = s / unit
            lx, lp = drive.lambdas(seconds, w)
            return float(lx) / unit, float(lp) / unit, math.sin(w * seconds), math.cos(w * seconds)

        def dlp(s: float) -> float:
            lx, lp, sn, cs = rates(s)
            return lx * sn - lp * cs * sign

        def dlx(s: float) -> float:
            lx, lp, sn, cs = rates(s)
            return lx * cs + lp * sn * sign

        fastest = (abs(w) + abs(drive.carrier_frequency(w)) + drive.Omega) / unit
        nodes = None
        if drive.form == DriveForm.TABULATED:
            nodes = [node * unit for node in drive.times]
        upper = t * unit
        lp = integrate(dlp, upper, max_frequency=fastest, epsabs=1e-12, points=nodes)
        lx = integrate(dlx, upper, max_frequency=fastest, epsabs=1e-12, points=nodes)
        return lx, lp

    def lab_frame_lambda(self, t: float, target: DriveTarget) -> Tuple[float, float]:
        """Lambda_x, Lambda_p accumulated with the printed sign of the P drive term"""
        return self.big_lambda_quadrature(t, target, printed_sign=True)

    def lambda_minus(self, t, target: DriveTarget):
        """Lambda_j^-(t) = Lambda_xj(t) - Lambda_pj(t)"""
        lx, lp = self.big_lambda(t, target)
        return lx - lp

    # -- frame functions ---------------------------------------------------------

    def xi(self, t):
        """xi(t) = cos(omega t) Lambda_pb(t) - sin(omega t) Lambda_xb(t)"""
        lx, lp = self.big_lambda(t, DriveTarget.MECHANICAL)
        phase = self.cfg.omega * np.asarray(t, dtype=float)
        value = np.cos(phase) * lp - np.sin(phase) * lx
        return value if np.ndim(value) else float(value)

    def psi(self, t, target: DriveTarget):
        """psi_j(t) = cos(omega_j t) Lambda_pj(t) + sin(omega_j t) Lambda_xj(t), j in {k, kp}"""
        target = DriveTarget(target)
        if target == DriveTarget.MECHANICAL:
            raise PhysicsValidationError("psi is defined for cavity targets only", field="target")
        lx, lp = self.big_lambda(t, target)
        phase = self.cfg.target_frequency(target) * np.asarray(t, dtype=float)
        value = np.cos(phase) * lp + np.sin(phase) * lx
        return value if np.ndim(value) else float(value)

    def vartheta(self, t):
        """
        Quadratic-in-Lambda scalar vartheta(omega_k, omega_kp, t) in rad/s

        Mode frequencies set the phases; the prefactors are the field
        couplings c^2 p^2 / omega, which equal omega_n for the massless field.
        """
        state = self.cfg.state
        t_arr = np.asarray(t, dtype=float)
        lxk, lpk = self.big_lambda(t, DriveTarget.MODE_K)
        lxq, lpq = self.big_lambda(t, DriveTarget.MODE_KP)
        wk = self.cfg.mode_frequency(state.k)
        wq = self.cfg.mode_frequency(state.kp)
        ck = self.cfg.coupling_sq(state.k)
        cq = self.cfg.coupling_sq(state.kp)

        def single(c, w, lx, lp):
            return (
                -c * (lp ** 2 + lx ** 2)
                - 2 * c * np.sin(2 * w * t_arr) * lp * lx
                - c * np.cos(2 * w * t_arr) * (lx ** 2 + lp ** 2)
            )

        cross = (-1) ** (state.k + state.kp) * 4 * math.sqrt(ck * cq) * (
            np.sin(wk * t_arr) * np.sin(wq * t_arr) * lxq ** 2
            + np.cos(wk * t_arr) * np.cos(wq * t_arr) * lpq ** 2
        )
        value = single(ck, wk, lxk, lpk) + single(cq, wq, lxq, lpq) + cross
        return value if np.ndim(value) else float(value)

    # -- zero-order means --------------------------------------------------------

    def amplitude_shift(self, t, target: DriveTarget):
        """Drive-induced shift Lambda_p - i Lambda_x of the rotating amplitude"""
        lx, lp = self.big_lambda(t, target)
        return lp - 1j * np.asarray(lx)

    def mean_amplitude(self, t, target: DriveTarget):
        """
        Zero-order mean amplitude <a_j>, <b> at time t

        Returns exp(-i w_j t)(mu_j + Lambda_pj - i Lambda_xj) with mu_b = beta.
        """
        target = DriveTarget(target)
        state = self.cfg.state
        if target == DriveTarget.MECHANICAL:
            start = state.beta
        elif target == DriveTarget.MODE_K:
            start = state.mu_k
        else:
            start = state.mu_kp
        w = self.cfg.target_frequency(target)
        t_arr = np.asarray(t, dtype=float)
        value = np.exp(-1j * w * t_arr) * (start + self.amplitude_shift(t, target))
        return value if np.ndim(value) else complex(value)

    @staticmethod
    def _check_time(t) -> None:
        if np.any(np.asarray(t) < 0):
            raise PhysicsValidationError("time must be >= 0", field="t")
