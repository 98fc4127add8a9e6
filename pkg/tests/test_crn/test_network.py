"""ReactionNetwork と化学量論行列の単体テスト。"""

import numpy as np
import pytest

from src.crn.network import BalancedForm, EquilibriaSet, ReactionNetwork, stoichiometric_matrix
from src.errors import DimensionMismatchError, ValidationError


@pytest.mark.unit
class TestReactionNetwork:
    """ReactionNetworkクラスのテスト。"""

    def test_from_reactions_builds_matrices(self, ab_network: ReactionNetwork) -> None:
        """複合体と反応の辞書から Z, B が構築されること。"""
        np.testing.assert_array_equal(ab_network.Z, np.eye(2, dtype=np.int64))
        np.testing.assert_array_equal(ab_network.B, [[-1], [1]])
        assert ab_network.n_species == 2
        assert ab_network.n_complexes == 2
        assert ab_network.n_reactions == 1
        assert ab_network.complex_names == ("C1", "C2")
        assert ab_network.reaction_names == ("R1",)

    def test_source_and_product_complexes(self, dimer_network: ReactionNetwork) -> None:
        """B の -1 / +1 の位置が原系 / 生成系になること。"""
        assert dimer_network.source_complexes.tolist() == [0]
        assert dimer_network.product_complexes.tolist() == [1]

    def test_arrays_are_read_only(self, ab_network: ReactionNetwork) -> None:
        """配列が書込み不可であること。"""
        with pytest.raises(ValueError):
            ab_network.k_fwd[0] = 10.0

    def test_nonpositive_rate_rejected(self) -> None:
        """速度定数が0以下なら ValidationError になること。"""
        with pytest.raises(ValidationError):
            ReactionNetwork.from_reactions(["A", "B"], {"C1": {"A": 1}, "C2": {"B": 1}}, [("C1", "C2", 0.0, 1.0)])

    def test_negative_coefficient_rejected(self) -> None:
        """Z に負の係数があれば ValidationError になること。"""
        with pytest.raises(ValidationError):
            ReactionNetwork(
                species_names=("A",),
                complexes=np.array([[1, -1]]),
                incidence=np.array([[-1], [1]]),
                k_fwd=[1.0],
                k_bwd=[1.0],
                diffusion=[0.0],
            )

    def test_incidence_column_must_have_one_source_and_product(self) -> None:
        """B の列に +1 と -1 が1つずつ無ければ ValidationError になること。"""
        with pytest.raises(ValidationError, match="B の第0列"):
            ReactionNetwork(
                species_names=("A", "B"),
                complexes=np.eye(2, dtype=np.int64),
                incidence=np.array([[1], [1]]),
                k_fwd=[1.0],
                k_bwd=[1.0],
                diffusion=[0.0, 0.0],
            )

    def test_unknown_species_reference(self) -> None:
        """未定義の種を参照する複合体は ValidationError になること。"""
        with pytest.raises(ValidationError, match="未定義の種"):
            ReactionNetwork.from_reactions(["A"], {"C1": {"A": 1}, "C2": {"X": 1}}, [("C1", "C2", 1.0, 1.0)])

    def test_diffusion_dimension_mismatch(self) -> None:
        """拡散係数の個数が種数と異なれば DimensionMismatchError になること。"""
        with pytest.raises(DimensionMismatchError):
            ReactionNetwork.from_reactions(
                ["A", "B"], {"C1": {"A": 1}, "C2": {"B": 1}}, [("C1", "C2", 1.0, 1.0)], diffusion=[1.0]
            )

    def test_with_diffusion_replaces_coefficients(self, ab_network: ReactionNetwork) -> None:
        """with_diffusion で拡散係数だけが差し替わること。"""
        updated = ab_network.with_diffusion([0.0, 0.0])
        np.testing.assert_array_equal(updated.diffusion, [0.0, 0.0])
        np.testing.assert_array_equal(updated.k_fwd, ab_network.k_fwd)
        np.testing.assert_array_equal(ab_network.diffusion, [1.0, 1.0])


@pytest.mark.unit
class TestStoichiometricMatrix:
    """stoichiometric_matrix のテスト。"""

    def test_isomerization(self, ab_network: ReactionNetwork) -> None:
        """A⇌B では S = (-1, +1)ᵀ になること。"""
        S = stoichiometric_matrix(ab_network)
        assert S.dtype == np.int64
        np.testing.assert_array_equal(S, [[-1], [1]])

    def test_dimerization(self, dimer_network: ReactionNetwork) -> None:
        """2A⇌B では S = (-2, +1)ᵀ になること。"""
        np.testing.assert_array_equal(stoichiometric_matrix(dimer_network), [[-2], [1]])

    def test_no_reactions(self) -> None:
        """反応が無い場合は m×0 の空行列になること。"""
        net = ReactionNetwork.from_reactions(["A", "B"], {"C1": {"A": 1}}, [])
        assert stoichiometric_matrix(net).shape == (2, 0)


@pytest.mark.unit
class TestValueTypes:
    """BalancedForm / EquilibriaSet のテスト。"""

    def test_balanced_form_requires_positive_x_star(self) -> None:
        """x* に0以下の成分があれば ValidationError になること。"""
        with pytest.raises(ValidationError):
            BalancedForm(x_star=np.array([1.0, 0.0]), kappa=np.array([1.0]))

    def test_equilibria_set_checks_kernel(self) -> None:
        """kernel_basis が Sᵀw = 0 を満たさなければ ValidationError になること。"""
        with pytest.raises(ValidationError):
            EquilibriaSet(S=np.array([[-1], [1]]), x_star=np.array([1.0, 2.0]), kernel_basis=np.array([[1, 0]]))
