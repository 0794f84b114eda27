import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from analyzers.averages import time_average
from analyzers.force_analyzer import ForceAnalyzer
from analyzers.number_analyzer import NumberAnalyzer
from analyzers.resonance import is_degenerate_with
from analyzers.wall_analyzer import WallAnalyzer
from models.specs import DriveForm, DriveProfile, DriveTarget, MechanicalSpec
from models.system import SystemConfig
from oracle.compare import compare_with_perturbative
from oracle.evolution import evolve
from oracle.fock_space import Truncation
from oracle.states import initial_density
from sweeps.config import RunConfig
from sweeps.output import write_csv, write_json
from sweeps.workers import run_parallel
from utils.errors import ConfigError, PhysicsValidationError

logger = logging.getLogger(__name__)

MIN_SCAN_MODES = 8
DEFAULT_RAMP = 50.0          # Omega / omega of the default wall drive
CONSERVATION_FACTOR = 1e-6
ORACLE_DRIFT_FACTOR = 10.0
CRITICAL_LENGTH_NOTE = (
    "L_c is the root of F_total(L) = 0 and is authoritative; L_c_printed is the closed-form "
    "reference formula, which is not a root of the implemented force law"
)


@dataclass
class ScenarioResult:
    """Tables written as CSV and reports written as JSON, keyed by file stem"""

    scenario: str
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    reports: Dict[str, Dict] = field(default_factory=dict)
    notes: Dict[str, str] = field(default_factory=dict)

    def write(self, out_dir: Path, config_hash: str) -> List[Path]:
        paths = []
        for stem, table in self.tables.items():
            paths.append(write_csv(table, Path(out_dir) / f"{stem}.csv", config_hash, self.notes.get(stem)))
        for stem, report in self.reports.items():
            paths.append(write_json(report, Path(out_dir) / f"{stem}.json", config_hash))
        return paths


def _times(run: RunConfig, cfg: SystemConfig, name: str = "t_tilde") -> List[Tuple[float, float]]:
    """(t_tilde, t in seconds) pairs of a reduced-time grid"""
    return [(float(s), float(cfg.seconds(s))) for s in run.grid(name).values()]


# -- trajectories ---------------------------------------------------------------


def wall_trajectory(run: RunConfig, threads: int) -> ScenarioResult:
    cfg = run.system()
    analyzer = WallAnalyzer(cfg)
    max_order = int(run.option("max_order", 3))
    approximation = run.option("approximation", "resonant")
    theta_case = run.option("theta_case")
    rows = []
    for s, t in _times(run, cfg):
        row = {"t_tilde": s, **analyzer.wall_position(t, max_order, approximation).to_row()}
        if theta_case:
            row["x_combined"] = analyzer.wall_position_combined(t, theta_case)
        rows.append(row)
    return ScenarioResult(run.scenario, tables={run.scenario: pd.DataFrame(rows)})


def _photon_point(args) -> Dict:
    cfg, k, s, t, max_order, approximation = args
    breakdown = NumberAnalyzer(cfg).photon_number(k, t, max_order, approximation)
    return {"t_tilde": s, **breakdown.to_row()}


def _phonon_point(args) -> Dict:
    cfg, s, t, max_order, approximation = args
    breakdown = NumberAnalyzer(cfg).phonon_number(t, max_order, approximation)
    return {"t_tilde": s, **breakdown.to_row()}


def photon_number(run: RunConfig, threads: int) -> ScenarioResult:
    cfg = run.system()
    k = int(run.option("k", cfg.state.k))
    max_order = int(run.option("max_order", 2))
    approximation = run.option("approximation", "resonant")
    items = [(cfg, k, s, t, max_order, approximation) for s, t in _times(run, cfg)]
    rows = run_parallel(_photon_point, items, threads)
    return ScenarioResult(run.scenario, tables={run.scenario: pd.DataFrame(rows)})


def phonon_number(run: RunConfig, threads: int) -> ScenarioResult:
    cfg = run.system()
    max_order = int(run.option("max_order", 2))
    approximation = run.option("approximation", "resonant")
    items = [(cfg, s, t, max_order, approximation) for s, t in _times(run, cfg)]
    rows = run_parallel(_phonon_point, items, threads)
    return ScenarioResult(run.scenario, tables={run.scenario: pd.DataFrame(rows)})


# -- resonance scan -------------------------------------------------------------


def _resonance_point(args) -> List[Dict]:
    cfg, k, omega_tilde, times_tilde = args
    mech = MechanicalSpec(omega_tilde * cfg.unit_frequency, cfg.mechanics.mirror_mass, cfg.cavity.length)
    point = cfg.with_changes(mechanics=mech)
    analyzer = NumberAnalyzer(point)
    return [
        {"omega_tilde": omega_tilde, "t_tilde": s, "N_beta": analyzer.beta_spectrum(k, float(point.seconds(s)))}
        for s in times_tilde
    ]


def resonance_scan(run: RunConfig, threads: int) -> ScenarioResult:
    """
    Coherent-phonon pair production of mode k against the reduced mirror frequency

    Columns omega_tilde, t_tilde, N_beta; N_beta is the |beta|-independent
    full-mode second-order number summed over all cavity modes.
    """
    cfg = run.system()
    if cfg.cavity.num_modes < MIN_SCAN_MODES:
        logger.warning("resonance scan with %d modes, at least %d recommended",
                       cfg.cavity.num_modes, MIN_SCAN_MODES)
    k = int(run.option("k", cfg.state.k))
    times = [float(s) for s in run.option("times_tilde", [30.0, 50.0, 100.0])]
    items = [(cfg, k, float(w), times) for w in run.grid("omega_tilde").values()]
    rows = [row for chunk in run_parallel(_resonance_point, items, threads) for row in chunk]
    table = pd.DataFrame(rows).sort_values(["t_tilde", "omega_tilde"], kind="stable").reset_index(drop=True)
    return ScenarioResult(run.scenario, tables={run.scenario: table})


# -- force ------------------------------------------------------------------------


def _beta_configs(run: RunConfig, cfg: SystemConfig) -> List[Tuple[float, SystemConfig]]:
    values = run.option("beta_sq", [cfg.state.beta_mag ** 2])
    configs = []
    for beta_sq in values:
        if beta_sq < 0:
            raise PhysicsValidationError(f"must be >= 0, got {beta_sq}", field="options.beta_sq")
        state = replace(cfg.state, beta_mag=math.sqrt(beta_sq))
        configs.append((float(beta_sq), cfg.with_changes(state=state)))
    return configs


def force_sweep(run: RunConfig, threads: int) -> ScenarioResult:
    """Time-averaged force against L / L0 for every (|beta|^2, tau) pair"""
    cfg = run.system()
    L0 = cfg.cavity.length
    sweep_mode = run.option("sweep_mode", "fixed")
    taus = [float(t) for t in run.option("taus", [0.0, 1e-6])]
    ratios = run.grid("L_over_L0").values()
    frames = []
    for beta_sq, point in _beta_configs(run, cfg):
        analyzer = ForceAnalyzer(point)
        for tau in taus:
            frame = analyzer.sweep(ratios * L0, tau, sweep_mode)
            frame.insert(0, "L_over_L0", ratios)
            frame.insert(0, "beta_sq", beta_sq)
            frames.append(frame)
    return ScenarioResult(run.scenario, tables={run.scenario: pd.concat(frames, ignore_index=True)})


def critical_length(run: RunConfig, threads: int) -> ScenarioResult:
    """
    Critical and minimum-force lengths per |beta|^2, tau and sweep mode

    N_k is the resonant photon number of mode k at t = tau in the L0 cavity;
    inverts_in_window tells whether L_c falls inside options.window (in L0 units).
    """
    cfg = run.system()
    L0 = cfg.cavity.length
    taus = [float(t) for t in run.option("taus", [1e-6])]
    modes = run.option("sweep_modes", ["tracking", "fixed"])
    low, high = run.option("window", [0.05, 1.0])
    rows = []
    for beta_sq, point in _beta_configs(run, cfg):
        analyzer = ForceAnalyzer(point)
        numbers = NumberAnalyzer(point)
        for tau in taus:
            n_k = numbers.photon_number(point.state.k, tau, max_order=2).total
            for mode in modes:
                L_c = analyzer.critical_length(tau, mode)
                L_min, F_min = analyzer.minimum_force(tau, mode)
                rows.append({
                    "beta_sq": beta_sq,
                    "tau": tau,
                    "sweep_mode": mode,
                    "L_c": L_c,
                    "L_c_over_L0": L_c / L0,
                    "L_c_analytic": analyzer.analytic_critical_length(tau, mode),
                    "L_c_printed": analyzer.printed_critical_length(tau),
                    "L_min": L_min,
                    "F_min": F_min,
                    "N_k": n_k,
                    "inverts_in_window": bool(low <= L_c / L0 <= high),
                })
    return ScenarioResult(
        run.scenario, tables={run.scenario: pd.DataFrame(rows)}, notes={run.scenario: CRITICAL_LENGTH_NOTE}
    )


# -- oracle ---------------------------------------------------------------------


def _truncation(run: RunConfig, cfg: SystemConfig, n_max: int = 10, m_max: int = 12) -> Truncation:
    modes = run.option("modes", [cfg.state.k, cfg.state.kp])
    return Truncation(
        modes_used=tuple(int(m) for m in modes),
        n_max=run.option("n_max", n_max),
        m_max=int(run.option("m_max", m_max)),
        max_trajectories=int(run.option("max_trajectories", 64)),
    )


def oracle_compare(run: RunConfig, threads: int) -> ScenarioResult:
    """Oracle vs engine ErrorReport as JSON plus the oracle trajectories as CSV"""
    cfg = run.system()
    truncation = _truncation(run, cfg)
    t_grid = [t for _, t in _times(run, cfg)]
    epsilons = run.option("epsilons")
    report = compare_with_perturbative(
        cfg, truncation, run.option("scenario", "photon_k"), t_grid,
        epsilons=epsilons, tol=float(run.option("tol", 1e-9)), seed=run.seed,
    )
    deviations = pd.DataFrame([asdict(d) for d in report.deviations])
    return ScenarioResult(
        run.scenario,
        tables={run.scenario: report.trajectory_table(), f"{run.scenario}_deviations": deviations},
        reports={run.scenario: report.to_dict()},
    )


# -- interference and conservation ----------------------------------------------


def interference(run: RunConfig, threads: int) -> ScenarioResult:
    """
    N_k / N0 against theta with g = 2 |beta|, r = 0 and T = 0

    N0 = 2 kappa_k^4 t^2 |beta|^2, so the ratio follows 1 + sin(theta).
    """
    cfg = run.system()
    beta = cfg.state.beta_mag
    if beta == 0:
        raise PhysicsValidationError("the interference check needs |beta| > 0", field="state.beta_mag")
    k = cfg.state.k
    s = float(run.option("t_tilde", 100.0))
    t = float(cfg.seconds(s))
    wall = cfg.drive_for(DriveTarget.MECHANICAL)
    ramp = wall.Omega if wall is not None and wall.form == DriveForm.EXDR_RAMP and wall.Omega > 0 \
        else DEFAULT_RAMP * cfg.omega
    drive = DriveProfile(target=DriveTarget.MECHANICAL, g=2 * beta, Omega=ramp)
    base = replace(cfg.state, mu_k=0.0, mu_kp=0.0, squeeze_r=0.0, temperature=0.0, n_thermal=None)
    n0 = 2 * float(cfg.reduced_coupling_sq(k)) ** 2 * s ** 2 * beta ** 2

    rows = []
    for theta in run.grid("theta").values():
        point = cfg.with_changes(state=replace(base, theta=float(theta)), drives=[drive])
        n_k = NumberAnalyzer(point).photon_number(k, t, max_order=2).order2
        expected = 1 + math.sin(theta)
        rows.append({
            "theta": float(theta), "N_k": n_k, "N0": n0, "ratio": n_k / n0,
            "expected": expected, "deviation": n_k / n0 - expected,
        })
    return ScenarioResult(run.scenario, tables={run.scenario: pd.DataFrame(rows)})


def _random_states(run: RunConfig, cfg: SystemConfig) -> list:
    rng = np.random.default_rng(run.seed)
    count = int(run.option("samples", 10))
    states = []
    for _ in range(count):
        states.append(replace(
            cfg.state,
            mu_k=float(rng.uniform(0.0, 1.0)),
            mu_kp=0.0,
            beta_mag=float(rng.uniform(0.0, 1.0)),
            theta=float(rng.uniform(-math.pi, math.pi)),
            squeeze_r=float(rng.uniform(0.0, 0.3)),
            temperature=0.0,
            n_thermal=float(rng.uniform(0.0, 0.5)),
        ))
    return states


def _excitations(numbers: NumberAnalyzer, k: int, t: float) -> float:
    photons = numbers.photon_number(k, t, max_order=2)
    phonons = numbers.phonon_number(t, max_order=2)
    return photons.total + 2 * phonons.total


def conservation(run: RunConfig, threads: int) -> ScenarioResult:
    """
    Drift of the time-averaged N_k + 2 N_b at degenerate resonance with g = 0

    The engine drift is checked against 1e-6 N_b(0) (omega_k tau eps)^2.
    With options.oracle = true each sampled state is also evolved exactly;
    the oracle keeps the counter-rotating terms, which shift the average at
    first order in eps, and is held to 10 eps (mu_k^2 + 1)(N_b(0) + 1).
    """
    cfg = run.system().with_changes(drives=())
    k = cfg.state.k
    if not is_degenerate_with(cfg, k):
        raise PhysicsValidationError(
            f"the conservation check needs omega = 2 omega_{k}", field="mechanics.omega"
        )
    if cfg.epsilon == 0:
        raise PhysicsValidationError("the conservation check needs epsilon > 0", field="mechanics.mirror_mass")
    w_k = float(cfg.reduced_frequency(k))
    eps = cfg.epsilon
    if "tau_tilde" in run.grids:
        taus = run.grid("tau_tilde").values()
    else:
        taus = np.geomspace(10 / w_k, 0.2 * float(cfg.reduced_time(cfg.critical_time)), 5)
    use_oracle = bool(run.option("oracle", False))

    rows = []
    for sample, state in enumerate(_random_states(run, cfg)):
        point = cfg.with_changes(state=state)
        numbers = NumberAnalyzer(point)
        start = _excitations(numbers, k, 0.0)
        for tau_tilde in taus:
            tau = float(point.seconds(tau_tilde))
            average = time_average(lambda t: _excitations(numbers, k, t), tau)
            drift = average - start
            bound = CONSERVATION_FACTOR * point.initial_phonons * (w_k * tau_tilde * eps) ** 2
            rows.append({
                "sample": sample, "source": "engine", "mu_k": state.mu_k, "beta_mag": state.beta_mag,
                "theta": state.theta, "squeeze_r": state.squeeze_r, "n_thermal": state.n_thermal,
                "tau_tilde": float(tau_tilde), "drift": drift, "bound": bound,
                "within": bool(abs(drift) <= bound),
            })
        if use_oracle:
            rows.append(_oracle_drift(run, point, sample, float(taus[-1])))
    return ScenarioResult(run.scenario, tables={run.scenario: pd.DataFrame(rows)})


def _oracle_drift(run: RunConfig, cfg: SystemConfig, sample: int, tau_tilde: float) -> Dict:
    truncation = _truncation(run, cfg, n_max=8, m_max=10)
    s_grid = np.linspace(0.0, tau_tilde, int(run.option("oracle_points", 41)))
    result = evolve(initial_density(cfg, truncation), cfg, truncation, cfg.seconds(s_grid),
                    seed=run.seed)
    k = cfg.state.k
    series = result.column(f"N_{k}") + 2 * result.column("N_b")
    drift = trapezoid(series, s_grid) / tau_tilde - series[0]
    state = cfg.state
    bound = ORACLE_DRIFT_FACTOR * cfg.epsilon * (state.mu_k ** 2 + 1) * (cfg.initial_phonons + 1)
    if not result.valid:
        logger.warning("conservation sample %d: oracle leakage %.3e", sample, result.leakage)
    return {
        "sample": sample, "source": "oracle", "mu_k": state.mu_k, "beta_mag": state.beta_mag,
        "theta": state.theta, "squeeze_r": state.squeeze_r, "n_thermal": state.n_thermal,
        "tau_tilde": tau_tilde, "drift": float(drift), "bound": bound,
        "within": bool(abs(drift) <= bound),
    }


SCENARIOS: Dict[str, Callable[[RunConfig, int], ScenarioResult]] = {
    "wall_trajectory": wall_trajectory,
    "photon_number": photon_number,
    "phonon_number": phonon_number,
    "resonance_scan": resonance_scan,
    "force_sweep": force_sweep,
    "critical_length": critical_length,
    "oracle_compare": oracle_compare,
    "interference": interference,
    "conservation": conservation,
}


def run_scenario(run: RunConfig, threads: int = 1) -> ScenarioResult:
    try:
        scenario = SCENARIOS[run.scenario]
    except KeyError:
        raise ConfigError(f"unknown scenario {run.scenario!r}", field="run.scenario")
    logger.info("running %s with %d worker(s)", run.scenario, threads)
    return scenario(run, threads)
