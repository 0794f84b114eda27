import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from analyzers.number_analyzer import NumberAnalyzer
from analyzers.resonance import is_degenerate_with, is_nondegenerate_with
from analyzers.wall_analyzer import WallAnalyzer
from models.aux_functions import AuxFunctions
from models.specs import DriveTarget, MechanicalSpec
from models.system import SystemConfig
from oracle.evolution import EvolutionResult, evolve
from oracle.fock_space import Truncation
from oracle.states import initial_density
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

SCENARIOS = ("wall", "photon_k", "phonon", "nondegenerate", "massive_photon")


@dataclass
class Deviation:
    """Oracle vs engine deviation of one observable truncated at one order, for one epsilon"""

    epsilon: float
    observable: str
    order: int
    max_relative: float
    rms_relative: float
    max_absolute: float


@dataclass
class ScalingFit:
    """Residual epsilon exponent from a two-point log fit"""

    observable: str
    order: int
    fitted: Optional[float]
    expected: Optional[int]


@dataclass
class ErrorReport:
    """
    Agreement between the Fock-space oracle and the perturbative engine

    Relative deviations are |oracle - engine| / max|oracle| over the time
    grid. frame_discrepancy is the largest zero-order number difference
    between the printed and the frame-consistent sign of the P drive.
    """

    scenario: str
    epsilons: Tuple[float, ...]
    deviations: List[Deviation] = field(default_factory=list)
    scaling: List[ScalingFit] = field(default_factory=list)
    leakage: float = 0.0
    purity_drift: float = 0.0
    valid: bool = True
    frame_discrepancy: float = 0.0
    trajectories: Dict[float, pd.DataFrame] = field(default_factory=dict, repr=False)

    def max_relative(self, observable: Optional[str] = None, order: Optional[int] = None,
                     epsilon: Optional[float] = None) -> float:
        values = [
            d.max_relative for d in self.deviations
            if (observable is None or d.observable == observable)
            and (order is None or d.order == order)
            and (epsilon is None or d.epsilon == epsilon)
        ]
        return max(values) if values else 0.0

    def exponent(self, observable: str, order: int) -> Optional[float]:
        for fit in self.scaling:
            if fit.observable == observable and fit.order == order:
                return fit.fitted
        return None

    def to_dict(self) -> Dict:
        return {
            "scenario": self.scenario,
            "epsilons": list(self.epsilons),
            "deviations": [asdict(d) for d in self.deviations],
            "scaling": [asdict(s) for s in self.scaling],
            "leakage": self.leakage,
            "purity_drift": self.purity_drift,
            "valid": self.valid,
            "frame_discrepancy": self.frame_discrepancy,
        }

    def trajectory_table(self) -> pd.DataFrame:
        """Oracle trajectories of every epsilon stacked, engine column schema"""
        frames = []
        for eps, table in self.trajectories.items():
            frame = table.copy()
            frame.insert(0, "epsilon", eps)
            frames.append(frame)
        return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()


@dataclass
class _Plan:
    observable: str
    oracle: Callable[[EvolutionResult, SystemConfig], np.ndarray]
    engine_terms: Callable[[SystemConfig, float], List[float]]
    orders: Tuple[int, ...]
    expected: int


def _photon_plan(cfg: SystemConfig, modes: Sequence[int]) -> _Plan:
    k = cfg.state.k
    vacuum = cfg.state.mu_k == 0 and cfg.state.mu_kp == 0 and not cfg.has_cavity_drive
    orders = (0, 1, 2) if vacuum else (0, 1)

    def engine(c: SystemConfig, t: float) -> List[float]:
        result = NumberAnalyzer(c, modes).photon_number(k, t, max_order=orders[-1], approximation="full")
        return [result.order0, result.order1, result.order2][: len(orders)]

    return _Plan(f"N_{k}", lambda r, c: r.column(f"N_{k}"), engine, orders, orders[-1] + 1)


def _phonon_plan(cfg: SystemConfig, modes: Sequence[int]) -> _Plan:
    def engine(c: SystemConfig, t: float) -> List[float]:
        result = NumberAnalyzer(c, modes).phonon_number(t, max_order=2, approximation="full")
        return [result.order0, result.order1, result.order2]

    return _Plan("N_b", lambda r, c: r.column("N_b"), engine, (0, 1, 2), 3)


def _wall_plan(cfg: SystemConfig, modes: Sequence[int]) -> _Plan:
    orders = (1,) if cfg.has_cavity_drive else (1, 2)

    def engine(c: SystemConfig, t: float) -> List[float]:
        analyzer = WallAnalyzer(c, modes)
        s = float(c.reduced_time(t))
        terms = [0.0, analyzer.x1(s)]
        if len(orders) > 1:
            terms.append(analyzer.x2_full(s))
        return terms

    def oracle(r: EvolutionResult, c: SystemConfig) -> np.ndarray:
        # (x - L) / L
        return 2 * c.epsilon * r.column("X_b")

    return _Plan("x_tilde", oracle, engine, (0,) + orders, orders[-1] + 1)


def _plan(cfg: SystemConfig, scenario: str, modes: Sequence[int]) -> _Plan:
    k, kp = cfg.state.k, cfg.state.kp
    if scenario == "wall":
        return _wall_plan(cfg, modes)
    if scenario == "phonon":
        return _phonon_plan(cfg, modes)
    if scenario == "nondegenerate" and not is_nondegenerate_with(cfg, k, kp):
        logger.warning("nondegenerate scenario with omega != omega_%d + omega_%d", k, kp)
    if scenario == "massive_photon" and not cfg.cavity.is_massive:
        logger.warning("massive_photon scenario with a massless field")
    if scenario == "photon_k" and not is_degenerate_with(cfg, k):
        logger.info("photon_k scenario away from omega = 2 omega_%d", k)
    return _photon_plan(cfg, modes)


def _scaled(values: Sequence[float], eps: float, order: int) -> float:
    return sum(eps ** j * v for j, v in enumerate(values[: order + 1]))


def frame_discrepancy(cfg: SystemConfig, t_grid: Sequence[float]) -> float:
    """
    Largest zero-order number difference between the printed and consistent drive frames

    Evaluates |mu_j + Lambda_pj - i Lambda_xj|^2 for every driven target
    with both signs of the lambda_p contribution.
    """
    aux = AuxFunctions(cfg)
    starts = {
        DriveTarget.MODE_K: cfg.state.mu_k,
        DriveTarget.MODE_KP: cfg.state.mu_kp,
        DriveTarget.MECHANICAL: cfg.state.beta,
    }
    largest = 0.0
    for drive in cfg.drives:
        if drive.is_zero:
            continue
        start = starts[drive.target]
        for t in t_grid:
            lx, lp = aux.big_lambda_quadrature(float(t), drive.target)
            px, pp = aux.lab_frame_lambda(float(t), drive.target)
            consistent = abs(start + lp - 1j * lx) ** 2
            printed = abs(start + pp - 1j * px) ** 2
            largest = max(largest, abs(consistent - printed))
    return largest


def compare_with_perturbative(cfg: SystemConfig, truncation: Truncation, scenario: str,
                              t_grid: Sequence[float], epsilons: Optional[Sequence[float]] = None,
                              tol: float = 1e-9, seed: Optional[int] = None) -> ErrorReport:
    """
    Run the oracle and the engine side by side and report their deviation

    The configuration is rebuilt at each epsilon with the same mirror
    frequency; the engine sums only over the simulated modes. For every
    order j the engine value sum_{i <= j} eps^i term_i is compared with
    the oracle, and the residual exponent is fitted from the first and
    last epsilon.

    Args:
        cfg: System configuration (its epsilon is used when epsilons is None)
        truncation: Oracle truncation
        scenario: One of wall, photon_k, phonon, nondegenerate, massive_photon
        t_grid: Times in seconds, starting at 0
        epsilons: Coupling values to run, e.g. (1e-3, 3e-3)
        tol: Oracle integrator tolerance
        seed: Ensemble sampling seed

    Returns:
        ErrorReport
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {SCENARIOS}, got {scenario!r}", field="scenario")
    if epsilons is None:
        epsilons = (cfg.epsilon, 3 * cfg.epsilon) if cfg.epsilon > 0 else (0.0,)
    epsilons = tuple(float(e) for e in epsilons)
    modes = list(truncation.modes_used)
    plan = _plan(cfg, scenario, modes)

    report = ErrorReport(scenario=scenario, epsilons=epsilons)
    residuals: Dict[int, List[float]] = {order: [] for order in plan.orders}
    for eps in epsilons:
        mech = MechanicalSpec.from_epsilon(cfg.omega, eps, cfg.cavity.length)
        run_cfg = cfg.with_changes(mechanics=mech)
        result = evolve(initial_density(run_cfg, truncation), run_cfg, truncation, t_grid, tol=tol, seed=seed)
        report.trajectories[eps] = result.table
        report.leakage = max(report.leakage, result.leakage)
        report.purity_drift = max(report.purity_drift, result.purity_drift)
        report.valid = report.valid and result.valid

        oracle = plan.oracle(result, run_cfg)
        terms = [plan.engine_terms(run_cfg, float(t)) for t in t_grid]
        scale = float(np.max(np.abs(oracle))) or 1.0
        for order in plan.orders:
            engine = np.array([_scaled(row, eps, order) for row in terms])
            error = np.abs(oracle - engine)
            residuals[order].append(float(error.max()))
            report.deviations.append(Deviation(
                epsilon=eps, observable=plan.observable, order=order,
                max_relative=float(error.max()) / scale,
                rms_relative=float(np.sqrt(np.mean(error ** 2))) / scale,
                max_absolute=float(error.max()),
            ))
        logger.info(
            "%s at eps=%.3e: max relative deviation %.3e (order %d)",
            scenario, eps, report.max_relative(epsilon=eps, order=plan.orders[-1]), plan.orders[-1],
        )

    for order in plan.orders:
        fitted = None
        r = residuals[order]
        if len(epsilons) >= 2 and epsilons[0] > 0 and epsilons[-1] != epsilons[0] and r[0] > 0 and r[-1] > 0:
            fitted = math.log(r[-1] / r[0]) / math.log(epsilons[-1] / epsilons[0])
        expected = plan.expected if order == plan.orders[-1] else None
        report.scaling.append(ScalingFit(plan.observable, order, fitted, expected))

    report.frame_discrepancy = frame_discrepancy(cfg, t_grid)
    return report
