"""pytest共通フィクスチャ。"""

from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pytest
import yaml

from src.compartmental.system import CompartmentalSystem, assemble
from src.crn.equilibrium import balance
from src.crn.network import BalancedForm, ReactionNetwork
from src.mesh.complex import SimplicialComplex
from src.mesh.generators import interval, rhombus
from src.simulation.config import IntegratorConfig

AB_NETWORK_SPEC: dict[str, Any] = {
    "species": [{"name": "A", "diffusion": 1.0}, {"name": "B", "diffusion": 1.0}],
    "complexes": {"C1": {"A": 1}, "C2": {"B": 1}},
    "reactions": [{"source": "C1", "product": "C2", "k_fwd": 2.0, "k_bwd": 1.0, "name": "R1"}],
    "x_star": [1.0, 2.0],
}


@pytest.fixture
def ab_network() -> ReactionNetwork:
    """A⇌B（k_fwd=2, k_bwd=1, 拡散係数 (1, 1)）を返す。"""
    return ReactionNetwork.from_reactions(
        species=["A", "B"],
        complexes={"C1": {"A": 1}, "C2": {"B": 1}},
        reactions=[("C1", "C2", 2.0, 1.0)],
        diffusion=[1.0, 1.0],
    )


@pytest.fixture
def ab_balanced(ab_network: ReactionNetwork) -> BalancedForm:
    """x* = (1, 2) の平衡形式を返す。"""
    return balance(ab_network, np.array([1.0, 2.0]))


@pytest.fixture
def dimer_network() -> ReactionNetwork:
    """2A⇌B（k_fwd=1, k_bwd=4）を返す。"""
    return ReactionNetwork.from_reactions(
        species=["A", "B"],
        complexes={"C1": {"A": 2}, "C2": {"B": 1}},
        reactions=[("C1", "C2", 1.0, 4.0)],
        diffusion=[0.5, 1.5],
    )


@pytest.fixture
def rhombus_mesh() -> SimplicialComplex:
    """正三角形2枚の菱形メッシュ（N=4, N_e=5）を返す。"""
    return rhombus()


@pytest.fixture
def line_mesh() -> SimplicialComplex:
    """頂点 0, 1, 2 の1次元メッシュを返す。"""
    return interval(3, length=2.0)


@pytest.fixture
def ab_system(ab_network: ReactionNetwork, ab_balanced: BalancedForm, rhombus_mesh: SimplicialComplex) -> CompartmentalSystem:
    """菱形メッシュ上の A⇌B コンパートメントモデルを返す。"""
    return assemble(ab_network, ab_balanced, rhombus_mesh)


@pytest.fixture
def fast_config() -> IntegratorConfig:
    """テスト用の積分設定を返す。"""
    return IntegratorConfig(rtol=1e-8, atol=1e-10, t_end=50.0)


@pytest.fixture
def rng() -> np.random.Generator:
    """固定シードの乱数生成器を返す。"""
    return np.random.default_rng(20240501)


@pytest.fixture
def write_yaml(tmp_path: Path) -> Callable[[str, Any], Path]:
    """tmp_path にYAMLファイルを書き出す関数を返す。"""

    def _write(name: str, payload: Any) -> Path:
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(payload, f, sort_keys=False, allow_unicode=True)
        return path

    return _write


@pytest.fixture
def ab_network_file(write_yaml: Callable[[str, Any], Path]) -> Path:
    """A⇌B のネットワーク仕様ファイルを返す。"""
    return write_yaml("ab.yaml", AB_NETWORK_SPEC)


@pytest.fixture
def rhombus_mesh_file(write_yaml: Callable[[str, Any], Path]) -> Path:
    """菱形メッシュの仕様ファイル（生成器形式）を返す。"""
    return write_yaml("rhombus.yaml", {"generator": {"kind": "rhombus", "side": 1.0}})
