import numpy as np
import pandas as pd
import pytest

from sweeps.config import loads_config
from sweeps.scenarios import run_scenario
from utils.errors import PhysicsValidationError

SYSTEM = """
[cavity]
length = 1e-5
num_modes = {modes}

[mechanics]
omega_tilde = {omega_tilde}
mirror_mass = 1e-16

[state]
beta_mag = 1.0
"""


def _run(scenario, body, modes=8, omega_tilde=2.0):
    text = SYSTEM.format(modes=modes, omega_tilde=omega_tilde) + body
    return loads_config(text, scenario=scenario)


class TestResonanceScan:
    def test_sorted_and_peaked(self):
        run = _run("resonance_scan", """
[grid.omega_tilde]
start = 1.8
stop = 2.2
points = 3

[options]
times_tilde = [20.0, 10.0]
""")
        table = run_scenario(run).tables["resonance_scan"]
        assert list(table.columns) == ["omega_tilde", "t_tilde", "N_beta"]
        assert len(table) == 6
        assert table["t_tilde"].is_monotonic_increasing
        for _, block in table.groupby("t_tilde"):
            assert block["omega_tilde"].is_monotonic_increasing
            peak = block.loc[block["N_beta"].idxmax(), "omega_tilde"]
            assert peak == pytest.approx(2.0)


class TestForceScenarios:
    def test_force_sweep(self):
        run = _run("force_sweep", """
[grid.L_over_L0]
start = 0.05
stop = 1.0
points = 4

[options]
taus = [0.0, 1e-6]
beta_sq = [1.0, 50.0]
""")
        table = run_scenario(run).tables["force_sweep"]
        assert len(table) == 2 * 2 * 4
        assert list(table.columns[:3]) == ["beta_sq", "L_over_L0", "L"]
        static = table[table["tau"] == 0.0]
        assert (static["F_dynamic"] == 0.0).all()
        assert (static["F_total"] < 0).all()

    def test_critical_length(self):
        run = _run("critical_length", """
[options]
taus = [1e-6]
beta_sq = [50.0, 100.0]
sweep_modes = ["tracking", "fixed"]
window = [0.01, 1.0]
""")
        table = run_scenario(run).tables["critical_length"].set_index(["beta_sq", "sweep_mode"])
        assert table.loc[(50.0, "fixed"), "L_c_over_L0"] == pytest.approx(0.0839, rel=1e-2)
        assert table.loc[(100.0, "tracking"), "L_c_over_L0"] == pytest.approx(0.0463, rel=1e-2)
        assert table["inverts_in_window"].all()
        assert np.allclose(table["L_c"], table["L_c_analytic"], rtol=1e-9)

    def test_printed_column_explained_in_header(self, tmp_path):
        run = _run("critical_length", """
[options]
taus = [1e-6]
beta_sq = [50.0]
""")
        (path,) = run_scenario(run).write(tmp_path, "0" * 64)
        lines = path.read_text().splitlines()
        assert lines[2].startswith("# note: L_c is the root of F_total(L) = 0")
        assert "L_c_printed" in lines[2]
        table = pd.read_csv(path, comment="#")
        assert not np.allclose(table["L_c"], table["L_c_printed"], rtol=1e-2)

    def test_negative_phonon_number(self):
        run = _run("critical_length", """
[options]
beta_sq = [-1.0]
""")
        with pytest.raises(PhysicsValidationError) as info:
            run_scenario(run)
        assert info.value.field == "options.beta_sq"


class TestInterference:
    def test_ratio(self):
        run = _run("interference", """
[grid.theta]
start = -3.0
stop = 3.0
points = 7

[options]
t_tilde = 100.0
""")
        table = run_scenario(run).tables["interference"]
        assert np.allclose(table["deviation"], 0.0, atol=1e-9)
        assert table["ratio"].min() < 0.2
        assert table["ratio"].max() > 1.8


class TestConservation:
    def test_engine_rows(self):
        run = _run("conservation", """
[grid.tau_tilde]
start = 10.0
stop = 100.0
points = 3

[options]
samples = 2
""")
        table = run_scenario(run).tables["conservation"]
        assert set(table["source"]) == {"engine"}
        assert len(table) == 2 * 3
        assert np.all(np.isfinite(table["drift"]))
        assert (table["bound"] >= 0).all()

    def test_needs_degenerate_resonance(self):
        run = _run("conservation", "", omega_tilde=3.0)
        with pytest.raises(PhysicsValidationError) as info:
            run_scenario(run)
        assert info.value.field == "mechanics.omega"


class TestOracleScenario:
    def test_tables_and_report(self):
        run = loads_config("""
[cavity]
length = 1e-5
num_modes = 4

[mechanics]
omega_tilde = 2.0
epsilon = 1e-3

[state]
beta_mag = 1.0

[grid.t_tilde]
start = 0.0
stop = 2.0
points = 3

[options]
scenario = "photon_k"
epsilons = [1e-3]
modes = [1, 2]
n_max = 4
m_max = 8
""", scenario="oracle_compare")
        result = run_scenario(run)
        assert set(result.tables) == {"oracle_compare", "oracle_compare_deviations"}
        assert len(result.tables["oracle_compare"]) == 3
        assert result.reports["oracle_compare"]["scenario"] == "photon_k"
