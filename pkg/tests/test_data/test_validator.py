"""ネットワーク・メッシュの不変条件チェックの単体テスト。"""

import numpy as np
import pytest

from src.crn.network import ReactionNetwork
from src.data.validator import CheckItem, has_errors, validate_mesh, validate_network
from src.mesh.complex import SimplicialComplex, build_complex


def by_name(items: list[CheckItem], name: str) -> CheckItem:
    return next(item for item in items if item.name == name)


@pytest.mark.unit
class TestValidateNetwork:
    """validate_network のテスト。"""

    def test_balanced_network(self, ab_network: ReactionNetwork) -> None:
        """A⇌B は全項目 OK になること。"""
        items = validate_network(ab_network, np.array([1.0, 2.0]))
        assert not has_errors(items)
        assert all(item.status == "OK" for item in items)
        assert "(1,1)" in by_name(items, "保存モエティ").detail

    def test_inconsistent_cycle(self) -> None:
        """詳細釣り合いを満たさない3サイクルは ERROR になること。"""
        net = ReactionNetwork.from_reactions(
            species=["A", "B", "C"],
            complexes={"CA": {"A": 1}, "CB": {"B": 1}, "CC": {"C": 1}},
            reactions=[("CA", "CB", 1.0, 1.0), ("CB", "CC", 1.0, 1.0), ("CC", "CA", 1.0, 2.0)],
            diffusion=[1.0, 1.0, 1.0],
        )
        items = validate_network(net)
        assert has_errors(items)
        item = by_name(items, "詳細釣り合い")
        assert item.status == "ERROR"
        assert "NotDetailedBalancedError" in item.detail

    def test_zero_diffusion_warning(self) -> None:
        """拡散係数0の種があれば WARNING になること。"""
        net = ReactionNetwork.from_reactions(
            species=["A", "B"],
            complexes={"C1": {"A": 2}, "C2": {"B": 1}},
            reactions=[("C1", "C2", 1.0, 4.0)],
            diffusion=[0.0, 1.0],
        )
        items = validate_network(net)
        assert not has_errors(items)
        assert by_name(items, "拡散係数").status == "WARNING"


@pytest.mark.unit
class TestValidateMesh:
    """validate_mesh のテスト。"""

    def test_rhombus(self, rhombus_mesh: SimplicialComplex) -> None:
        """菱形メッシュは全項目 OK で双対総体積 √3/2 を報告すること。"""
        items = validate_mesh(rhombus_mesh)
        assert all(item.status == "OK" for item in items)
        assert f"{np.sqrt(3.0) / 2.0:.12g}" in by_name(items, "well-centered").detail

    def test_right_triangle(self) -> None:
        """直角三角形は well-centered 違反の ERROR になること。"""
        mesh = build_complex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]])
        items = validate_mesh(mesh)
        assert has_errors(items)
        assert "NotWellCenteredError" in by_name(items, "well-centered").detail

    def test_interval(self, line_mesh: SimplicialComplex) -> None:
        """1次元メッシュは常に well-centered であること。"""
        assert not has_errors(validate_mesh(line_mesh))

    def test_disconnected_warning(self) -> None:
        """非連結メッシュは連結成分の WARNING になること。"""
        items = validate_mesh(build_complex([0.0, 1.0, 2.0, 5.0, 6.0], [[0, 1], [1, 2], [3, 4]]))
        assert by_name(items, "連結成分").status == "WARNING"
        assert not has_errors(items)
