import logging
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

# Add parent directory to path to import our modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.constants import C, HBAR
from models.specs import CavitySpec, InitialState, MechanicalSpec
from models.system import SystemConfig, make_system
from oracle.fock_space import Truncation
from oracle.hamiltonian import HamiltonianBuilder
from oracle.states import FockDensity, initial_density, sample_components
from utils.errors import NumericalError, PhysicsValidationError

logger = logging.getLogger(__name__)

TOLERANCE_RANGE = (1e-12, 1e-6)
METHOD = "DOP853"
# rtol below tol keeps the per-step trace drift inside tol
TRACE_MARGIN = 0.1


@dataclass
class EvolutionResult:
    """
    Observables of one oracle run on the requested time grid

    table columns: t (s), t_tilde, N_<n> per simulated mode, N_b, X_b,
    x (wall position, m), force (N, without the static vacuum term),
    purity, trace, energy (<H_0 + eps H_I> in units of hbar pi c / L)
    and leakage (largest top-two-level population of any ladder).
    """

    table: pd.DataFrame
    method: str
    components: int
    leakage: float
    valid: bool
    purity_drift: float
    trace_drift: float
    warnings: List[str] = field(default_factory=list)

    def records(self) -> List[Tuple[float, Dict]]:
        """Rows as (t, observables) pairs"""
        return [(row["t"], row) for row in self.table.to_dict("records")]

    def column(self, name: str) -> np.ndarray:
        return self.table[name].to_numpy()


class _Observables:
    """Expectation values collected from vectors or a dense density matrix"""

    def __init__(self, builder: HamiltonianBuilder):
        self.builder = builder
        self.space = builder.space
        self.masks = self.space.top_level_masks()
        self.operators = {f"N_{n}": op.matrix for n, op in builder.numbers.items()}
        self.operators["N_b"] = builder.mirror_number.matrix
        self.operators["X_b"] = builder.x_b.matrix
        self.operators["phi_sq"] = builder.phi_sq.matrix
        self.operators["energy"] = builder.static.matrix

    def from_vectors(self, weights: Sequence[float], vectors: Sequence[np.ndarray]) -> Dict[str, float]:
        values = {name: 0.0 for name in self.operators}
        populations = np.zeros(self.space.dimension)
        for w, v in zip(weights, vectors):
            for name, op in self.operators.items():
                values[name] += w * float(np.vdot(v, op @ v).real)
            populations += w * np.abs(v) ** 2
        values["trace"] = float(populations.sum())
        values["leakage"] = max(float(populations[mask].sum()) for mask in self.masks)
        return values

    def from_density(self, rho: np.ndarray) -> Dict[str, float]:
        values = {name: float(np.trace(op @ rho).real) for name, op in self.operators.items()}
        populations = np.real(np.diag(rho))
        values["trace"] = float(populations.sum())
        values["leakage"] = max(float(populations[mask].sum()) for mask in self.masks)
        values["purity"] = float(np.vdot(rho, rho).real)
        return values


def _integrate(rhs: Callable, y0: np.ndarray, s_grid: np.ndarray, tol: float) -> np.ndarray:
    """Solutions at s_grid as columns, DOP853 with dense output"""
    if s_grid[-1] == s_grid[0]:
        return y0[:, None]
    solution = solve_ivp(
        rhs, (s_grid[0], s_grid[-1]), y0, method=METHOD, t_eval=s_grid,
        rtol=TRACE_MARGIN * tol, atol=TRACE_MARGIN * tol * 1e-3,
    )
    if solution.status < 0:
        raise NumericalError(f"integration failed: {solution.message}", field="integrator")
    return solution.y


def _check_inputs(t_grid: Sequence[float], tol: float) -> np.ndarray:
    low, high = TOLERANCE_RANGE
    if not low <= tol <= high:
        raise PhysicsValidationError(f"tol must lie in [{low:g}, {high:g}], got {tol}", field="tol")
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] != 0:
        raise PhysicsValidationError("t_grid must be a non-empty 1-D grid starting at 0", field="t_grid")
    if np.any(np.diff(t) <= 0):
        raise PhysicsValidationError("t_grid must be strictly increasing", field="t_grid")
    return t


def evolve(rho0: FockDensity, cfg: SystemConfig, truncation: Truncation, t_grid: Sequence[float],
           tol: float = 1e-9, seed: Optional[int] = None, printed_sign: bool = False) -> EvolutionResult:
    """
    Integrate the von Neumann equation d rho / dt = -i [H(t), rho] / hbar

    Pure states evolve as vectors; mixed states evolve as full density
    matrices up to truncation.dense_limit and as an ensemble of pure
    components above it (sampled down to truncation.max_trajectories
    with the given seed).

    Args:
        rho0: Initial state on the truncated basis
        cfg: System configuration
        truncation: Simulated modes and ladder sizes
        t_grid: Output times in seconds, strictly increasing from 0
        tol: Integrator tolerance in [1e-12, 1e-6]
        seed: Seed for ensemble sampling
        printed_sign: Drive the P quadratures with +2 lambda_p

    Returns:
        EvolutionResult

    Raises:
        NumericalError: when the trace moves by more than tol between grid points
    """
    t = _check_inputs(t_grid, tol)
    if rho0.dims != truncation.dims:
        raise PhysicsValidationError(
            f"state dims {rho0.dims} do not match the truncation {truncation.dims}", field="rho0"
        )
    builder = HamiltonianBuilder(cfg, truncation, printed_sign)
    observables = _Observables(builder)
    s_grid = np.asarray(cfg.reduced_time(t), dtype=float)
    dim = truncation.dimension

    def vector_rhs(s, y):
        return -1j * builder.apply(s, y)

    rows: List[Dict[str, float]] = []
    if rho0.is_pure or dim > truncation.dense_limit:
        state = rho0 if rho0.is_pure else sample_components(rho0, truncation.max_trajectories, seed)
        method = "pure" if rho0.is_pure else "ensemble"
        weights = state.weights
        vectors0 = [v for _, v in state.components]
        gram0 = np.abs(np.array([[np.vdot(u, v) for v in vectors0] for u in vectors0])) ** 2
        logger.info("oracle: %s evolution of %d component(s), dimension %d", method, len(vectors0), dim)
        paths = [_integrate(vector_rhs, v.astype(complex), s_grid, tol) for v in vectors0]
        for i in range(s_grid.size):
            vectors = [path[:, i] for path in paths]
            values = observables.from_vectors(weights, vectors)
            norms = np.array([np.vdot(v, v).real for v in vectors])
            # member overlaps are conserved by the unitary flow; only norms drift
            gram = gram0.copy()
            np.fill_diagonal(gram, norms ** 2)
            values["purity"] = float(weights @ gram @ weights)
            rows.append(values)
    else:
        method = "dense"
        logger.info("oracle: density-matrix evolution, dimension %d", dim)

        def density_rhs(s, y):
            rho = y.reshape(dim, dim)
            m = builder.apply(s, rho)
            return (-1j * (m - m.conj().T)).ravel()

        path = _integrate(density_rhs, rho0.to_dense().ravel(), s_grid, tol)
        for i in range(s_grid.size):
            rows.append(observables.from_density(path[:, i].reshape(dim, dim)))
        state = rho0

    return _assemble(rows, t, s_grid, cfg, builder, truncation, method, len(state.components), tol)


def _assemble(rows, t, s_grid, cfg, builder, truncation, method, components, tol) -> EvolutionResult:
    table = pd.DataFrame(rows)
    table.insert(0, "t_tilde", s_grid)
    table.insert(0, "t", t)
    L = cfg.cavity.length
    table["x"] = L * (1 + 2 * cfg.epsilon * table["X_b"])
    force = HBAR * math.pi * C / (2 * L ** 2) * table["phi_sq"]
    if cfg.delta_L0 > 0 and cfg.has_mechanical_drive:
        drive = np.array([builder.mechanical_lambda_x(s) for s in s_grid])
        force = force - HBAR * drive / cfg.delta_L0
    table["force"] = force
    table = table.drop(columns=["phi_sq"])
    ordered = ["t", "t_tilde"] + [f"N_{n}" for n in truncation.modes_used] + [
        "N_b", "X_b", "x", "force", "purity", "trace", "energy", "leakage"
    ]
    table = table[ordered]

    warnings = []
    leakage = float(table["leakage"].max())
    valid = leakage < truncation.leakage_threshold
    if not valid:
        warnings.append(f"truncation leakage {leakage:.3e} exceeds {truncation.leakage_threshold:g}")
    trace_steps = np.abs(np.diff(table["trace"].to_numpy()))
    trace_drift = float(trace_steps.max()) if trace_steps.size else 0.0
    if trace_drift > tol:
        raise NumericalError(
            f"trace drift per step {trace_drift:.3e} exceeds tol {tol:g}; tighten tol or refine t_grid",
            field="trace",
        )
    purity = table["purity"].to_numpy()
    purity_drift = float(np.max(np.abs(purity - purity[0])))
    for message in warnings:
        logger.warning("oracle: %s", message)

    return EvolutionResult(
        table=table, method=method, components=components, leakage=leakage, valid=valid,
        purity_drift=purity_drift, trace_drift=trace_drift, warnings=warnings,
    )


def main():
    """
    Example usage: dynamical Casimir photons from a coherent wall, exact evolution
    """
    print("=" * 60)
    print("FOCK-SPACE ORACLE: DEGENERATE RESONANCE")
    print("=" * 60)

    cavity = CavitySpec(length=10e-6, num_modes=2)
    mech = MechanicalSpec.from_epsilon(2 * cavity.fundamental_frequency, 1e-3, cavity.length)
    cfg = make_system(cavity, mech, InitialState(beta_mag=1.0))
    truncation = Truncation(modes_used=(1, 2), n_max=6, m_max=8)
    t_grid = cfg.seconds(np.linspace(0, 20, 11))

    result = evolve(initial_density(cfg, truncation), cfg, truncation, t_grid)
    print(result.table[["t_tilde", "N_1", "N_b", "purity", "leakage"]].to_string(index=False))

    if result.valid:
        print("\n✓ Truncation leakage below threshold")
    else:
        print("\n⚠️  Truncation leakage too large, raise n_max / m_max")


if __name__ == "__main__":
    main()
