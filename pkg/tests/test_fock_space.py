import numpy as np
import pytest

from oracle.evolution import evolve
from oracle.fock_space import FockOperator, FockSpace, Truncation, annihilation
from oracle.states import initial_density
from utils.errors import ConfigError, NumericalError, PhysicsValidationError


class TestTruncation:
    def test_dimension(self):
        truncation = Truncation(modes_used=(1, 2), n_max=5, m_max=7)
        assert truncation.dims == (5, 5, 7)
        assert truncation.dimension == 175

    def test_per_mode_levels(self):
        truncation = Truncation(modes_used=(1, 3), n_max=(4, 3), m_max=6)
        assert truncation.dims == (4, 3, 6)
        assert truncation.position(3) == 1

    def test_enlarged(self):
        truncation = Truncation(modes_used=(1,), n_max=4, m_max=6).enlarged(2)
        assert truncation.dims == (6, 8)

    def test_enlarged_truncation_leaves_observables(self, make_cfg):
        """Four more levels per ladder move every observable by less than 1e-6 of its scale"""
        cfg = make_cfg(epsilon=1e-3, beta_mag=1.0)
        grid = cfg.seconds(np.linspace(0.0, 4.0, 5))
        base = Truncation(modes_used=(1, 2))
        larger = base.enlarged(4)
        assert larger.dims == (14, 14, 16)
        small = evolve(initial_density(cfg, base), cfg, base, grid, tol=1e-11).table
        large = evolve(initial_density(cfg, larger), cfg, larger, grid, tol=1e-11).table
        for column in small.columns.drop("leakage"):
            scale = float(np.max(np.abs(small[column]))) or 1.0
            assert np.allclose(small[column], large[column], rtol=0, atol=1e-6 * scale), column

    def test_dimension_cap(self):
        with pytest.raises(ConfigError) as info:
            Truncation(modes_used=(1, 2, 3), n_max=30, m_max=20)
        assert info.value.field == "truncation"

    def test_too_many_modes(self):
        with pytest.raises(ConfigError):
            Truncation(modes_used=(1, 2, 3, 4, 5), n_max=2, m_max=2)

    @pytest.mark.parametrize("modes", [(), (1, 1), (0, 2)])
    def test_bad_modes(self, modes):
        with pytest.raises(ConfigError) as info:
            Truncation(modes_used=modes)
        assert info.value.field == "truncation.modes_used"

    def test_levels_per_mode_must_match(self):
        with pytest.raises(ConfigError):
            Truncation(modes_used=(1, 2), n_max=(4,))

    def test_single_level_ladder(self):
        with pytest.raises(ConfigError):
            Truncation(modes_used=(1,), m_max=1)

    def test_unknown_position(self):
        with pytest.raises(PhysicsValidationError):
            Truncation(modes_used=(1, 2)).position(3)

    def test_covers_excited_modes(self, make_cfg):
        """A coherently excited mode must be simulated"""
        cfg = make_cfg(mu_k=1.0)
        with pytest.raises(PhysicsValidationError) as info:
            Truncation(modes_used=(2, 3), n_max=3, m_max=3).check_covers(cfg)
        assert info.value.field == "truncation.modes_used"

    def test_covers_mode_range(self, make_cfg):
        cfg = make_cfg()
        with pytest.raises(PhysicsValidationError):
            Truncation(modes_used=(1, 20), n_max=2, m_max=2).check_covers(cfg)

    def test_for_config(self, make_cfg):
        truncation = Truncation.for_config(make_cfg(), n_max=3, m_max=4, spectators=(2, 5))
        assert truncation.modes_used == (1, 2, 5)


class TestLadders:
    def test_annihilation(self, tol):
        expected = np.array([[0, 1, 0], [0, 0, np.sqrt(2)], [0, 0, 0]])
        assert np.allclose(annihilation(3).toarray(), expected, atol=tol, rtol=0)

    def test_commutator_below_top_level(self, small_truncation, tol):
        """[a, a^dag] = 1 on every state below the top level of the ladder"""
        space = FockSpace(small_truncation)
        a = space.a(2).matrix
        commutator = (a @ a.conj().T - a.conj().T @ a).diagonal()
        below = space.levels(1) < small_truncation.dims[1] - 1
        assert np.allclose(commutator[below], 1.0, atol=tol, rtol=0)

    def test_number_operator(self, small_truncation, tol):
        space = FockSpace(small_truncation)
        assert np.allclose(space.number(1).matrix.diagonal(), space.levels(0), atol=tol, rtol=0)
        assert np.allclose(space.mirror_number().matrix.diagonal(), space.levels(2), atol=tol, rtol=0)

    def test_quadratures_hermitian(self, small_truncation):
        space = FockSpace(small_truncation)
        x, p = space.quadratures(space.b())
        assert x.hermiticity_error() == 0.0
        assert p.hermiticity_error() == 0.0

    def test_top_level_masks(self, small_truncation):
        masks = FockSpace(small_truncation).top_level_masks()
        assert len(masks) == 3
        assert masks[2].sum() == 2 * 4 * 4

    def test_labels(self, small_truncation):
        assert FockSpace(small_truncation).labels() == ["mode 1", "mode 2", "wall"]


class TestFockOperator:
    def test_non_hermitian_rejected(self, small_truncation):
        a = FockSpace(small_truncation).a(1)
        assert a.hermiticity_error() > 0.05
        with pytest.raises(NumericalError) as info:
            a.check_hermitian()
        assert info.value.field == "hamiltonian"

    def test_algebra(self, small_truncation, tol):
        space = FockSpace(small_truncation)
        a = space.a(1)
        n = a.H @ a
        doubled = (n + n).scaled(0.5)
        assert np.allclose(doubled.toarray(), space.number(1).toarray(), atol=tol, rtol=0)
        assert isinstance(doubled, FockOperator)
