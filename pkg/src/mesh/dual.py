"""外心双対複体とwell-centered判定。

2次元では三角形 ABC の外心の重心座標が a²(b²+c²-a²) : b²(c²+a²-b²) : c²(a²+b²-c²)
（a は頂点Aの対辺長）に比例することを用いる。外心から辺までの符号付き距離は
λ_A · 2|T| / a で、well-centered ならば全て正になる。
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from src.errors import NotWellCenteredError
from src.mesh.complex import SimplicialComplex

# well-centered判定の既定マージン（重心座標）
WELL_CENTERED_TOL = 1e-9


@dataclass(frozen=True)
class DualComplex:
    """外心双対複体の測度。

    Attributes:
        circumcenters: 各トップセルの外心 (n_cells, n)
        vertex_volumes: 頂点の双対セル測度 |⋆ᵢv_k| (N,)
        edge_volumes: 辺の双対セル測度 |⋆ᵢσ¹_k| (N_e,)
        edge_lengths: 辺の長さ |σ¹_k| (N_e,)
        boundary_edges: 境界辺インデックス（境界フラックスの配置先）
    """

    circumcenters: NDArray[np.float64]
    vertex_volumes: NDArray[np.float64]
    edge_volumes: NDArray[np.float64]
    edge_lengths: NDArray[np.float64]
    boundary_edges: NDArray[np.int64]

    @property
    def total_volume(self) -> float:
        return float(np.sum(self.vertex_volumes))


def circumcenter_barycentrics(K: SimplicialComplex) -> NDArray[np.float64]:
    """各トップセルの外心の重心座標 (n_cells, n+1) を返す。1次元では (1/2, 1/2)。"""
    if K.dimension == 1:
        return np.full((K.n_cells, 2), 0.5)
    p = [K.vertices[K.cells[:, k]] for k in range(3)]
    # 局所頂点kの対辺長の2乗
    sq = np.stack(
        [
            np.sum((p[2] - p[1]) ** 2, axis=1),
            np.sum((p[0] - p[2]) ** 2, axis=1),
            np.sum((p[1] - p[0]) ** 2, axis=1),
        ],
        axis=1,
    )
    total = sq.sum(axis=1, keepdims=True)
    weights = sq * (total - 2.0 * sq)
    return np.asarray(weights / weights.sum(axis=1, keepdims=True), dtype=np.float64)


def well_centered_margins(K: SimplicialComplex) -> NDArray[np.float64]:
    """各セルの外心の最小重心座標（内部マージン）を返す。"""
    return np.asarray(circumcenter_barycentrics(K).min(axis=1), dtype=np.float64)


def is_well_centered(K: SimplicialComplex, tol: float = WELL_CENTERED_TOL) -> bool:
    """全トップセルの外心が重心座標マージン tol 以上で内部にあるかを判定する。

    直角三角形は外心が斜辺の中点（マージン0）となるため False。
    1次元の複体は常に True。
    """
    if K.dimension == 1:
        return True
    return bool(np.all(well_centered_margins(K) >= tol))


def circumcentric_dual(K: SimplicialComplex, tol: float = WELL_CENTERED_TOL) -> DualComplex:
    """外心双対の測度を計算する。

    2次元:
        |⋆ᵢσ¹| = 隣接する各三角形の外心から辺までの距離の和
        |⋆ᵢv|  = 頂点の角にできる四角形（頂点・2辺の中点・外心）の面積の和
    1次元:
        |⋆ᵢσ¹| = 1（点）
        |⋆ᵢv|  = 隣接線分の長さの半分の和

    Raises:
        NotWellCenteredError: マージンが tol 未満のセルがある場合
    """
    lengths = K.edge_lengths()
    vertex_volumes = np.zeros(K.n_vertices)

    if K.dimension == 1:
        half = 0.5 * K.cell_measures()
        np.add.at(vertex_volumes, K.cells[:, 0], half)
        np.add.at(vertex_volumes, K.cells[:, 1], half)
        centers = 0.5 * (K.vertices[K.cells[:, 0]] + K.vertices[K.cells[:, 1]])
        dual = DualComplex(
            circumcenters=centers,
            vertex_volumes=vertex_volumes,
            edge_volumes=np.ones(K.n_edges),
            edge_lengths=lengths,
            boundary_edges=K.boundary_edges,
        )
        logger.debug(f"1次元双対を構築: 総体積={dual.total_volume:.12g}")
        return dual

    bary = circumcenter_barycentrics(K)
    margins = bary.min(axis=1)
    if np.any(margins < tol):
        bad = np.flatnonzero(margins < tol)
        raise NotWellCenteredError(
            f"外心がセル内部に無い（マージン < {tol:g}）三角形が {bad.size} 個あります: "
            f"セル {bad[:5].tolist()}, 最小マージン {margins.min():.3e}"
        )

    centers = np.einsum("tk,tkd->td", bary, K.vertices[K.cells])
    areas = K.cell_measures()
    # 局所頂点kの対辺（長さ a_k）までの外心の距離 h_k = λ_k · 2|T| / a_k
    opposite_lengths = lengths[K.cell_edges]
    heights = bary * (2.0 * areas[:, np.newaxis]) / opposite_lengths

    edge_volumes = np.zeros(K.n_edges)
    np.add.at(edge_volumes, K.cell_edges.reshape(-1), heights.reshape(-1))

    # 頂点kの角の四角形 = 隣接2辺それぞれについて (辺長/2)·h/2
    half_triangles = 0.25 * opposite_lengths * heights
    for k in range(3):
        others = [j for j in range(3) if j != k]
        np.add.at(vertex_volumes, K.cells[:, k], half_triangles[:, others].sum(axis=1))

    dual = DualComplex(
        circumcenters=centers,
        vertex_volumes=vertex_volumes,
        edge_volumes=edge_volumes,
        edge_lengths=lengths,
        boundary_edges=K.boundary_edges,
    )
    logger.debug(
        f"外心双対を構築: 総体積={dual.total_volume:.12g}, 最小マージン={margins.min():.3e}"
    )
    return dual
