"""ネットワーク・メッシュの不変条件チェック。

validate サブコマンド用に、詳細釣り合い、保存モエティ、拡散係数、
メッシュの well-centered 性、連結成分、境界を個別のチェック項目として報告する。
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from src.analysis.moieties import conserved_moieties, format_moiety
from src.crn.equilibrium import balanced_rate_constants, find_thermodynamic_equilibrium
from src.crn.network import ReactionNetwork, stoichiometric_matrix
from src.errors import ValidationError
from src.mesh.complex import SimplicialComplex, connected_components
from src.mesh.dual import WELL_CENTERED_TOL, circumcentric_dual, well_centered_margins


@dataclass
class CheckItem:
    """個別チェック項目の結果。

    Attributes:
        category: チェックカテゴリ (network / equilibrium / moiety / mesh / dual)
        name: チェック名
        status: OK / WARNING / ERROR
        detail: 詳細説明
    """

    category: str
    name: str
    status: str  # "OK" / "WARNING" / "ERROR"
    detail: str


def has_errors(items: list[CheckItem]) -> bool:
    return any(item.status == "ERROR" for item in items)


def validate_network(net: ReactionNetwork, x_star: NDArray[np.float64] | None = None) -> list[CheckItem]:
    """反応ネットワークの不変条件をチェックする。

    Args:
        net: 構築済みの反応ネットワーク（構造的な不変条件は構築時に検証済み）
        x_star: 仕様ファイルで与えられた熱力学平衡（省略時は導出）
    """
    logger.info("=== ネットワークチェック開始 ===")
    items = [
        CheckItem(
            category="network",
            name="構造",
            status="OK",
            detail=f"種 m={net.n_species}, 複合体 c={net.n_complexes}, 反応 r={net.n_reactions}",
        )
    ]

    try:
        xs = find_thermodynamic_equilibrium(net) if x_star is None else x_star
        kappa = balanced_rate_constants(net, xs)
        items.append(CheckItem(
            category="equilibrium",
            name="詳細釣り合い",
            status="OK",
            detail=f"x*={np.array2string(xs, precision=6)}, κ={np.array2string(kappa, precision=6)}",
        ))
    except ValidationError as e:
        items.append(CheckItem(
            category="equilibrium",
            name="詳細釣り合い",
            status="ERROR",
            detail=f"{type(e).__name__}: {e}",
        ))

    moieties = conserved_moieties(stoichiometric_matrix(net))
    labels = ", ".join(format_moiety(w) for w in moieties) or "なし"
    items.append(CheckItem(category="moiety", name="保存モエティ", status="OK", detail=f"{len(moieties)}個: {labels}"))

    zero = [name for name, d in zip(net.species_names, net.diffusion, strict=True) if d == 0]
    items.append(CheckItem(
        category="network",
        name="拡散係数",
        status="WARNING" if zero else "OK",
        detail=f"拡散係数0の種: {zero}（α = 0、コンセンサスは保証されない）" if zero else "全種で正",
    ))

    for item in items:
        if item.status != "OK":
            logger.warning(f"{item.name}: {item.status}: {item.detail}")
    return items


def validate_mesh(K: SimplicialComplex, tol: float = WELL_CENTERED_TOL) -> list[CheckItem]:
    """メッシュの不変条件（well-centered、連結性、境界）をチェックする。"""
    logger.info("=== メッシュチェック開始 ===")
    items = [
        CheckItem(
            category="mesh",
            name="構造",
            status="OK",
            detail=f"次元={K.dimension}, N={K.n_vertices}, N_e={K.n_edges}, セル={K.n_cells}",
        )
    ]

    margins = well_centered_margins(K)
    if K.dimension == 1 or margins.min() >= tol:
        dual = circumcentric_dual(K, tol)
        items.append(CheckItem(
            category="dual",
            name="well-centered",
            status="OK",
            detail=f"最小マージン={margins.min():.3e}, 双対総体積={dual.total_volume:.12g}",
        ))
    else:
        bad = np.flatnonzero(margins < tol)
        items.append(CheckItem(
            category="dual",
            name="well-centered",
            status="ERROR",
            detail=f"NotWellCenteredError: マージン < {tol:g} のセル {bad[:5].tolist()}（最小 {margins.min():.3e}）",
        ))

    n_components, _ = connected_components(K)
    items.append(CheckItem(
        category="mesh",
        name="連結成分",
        status="OK" if n_components == 1 else "WARNING",
        detail=f"{n_components}個" + ("" if n_components == 1 else "（成分間でコンセンサスは起きない）"),
    ))
    items.append(CheckItem(
        category="mesh",
        name="境界",
        status="OK",
        detail=f"境界頂点 N_b={K.n_boundary}: {K.boundary_vertices.tolist()}",
    ))

    for item in items:
        if item.status != "OK":
            logger.warning(f"{item.name}: {item.status}: {item.detail}")
    return items
