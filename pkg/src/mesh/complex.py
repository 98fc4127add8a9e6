"""単体複体（1次元・2次元）の構築と検証。

頂点座標とトップセル（線分または三角形）から、境界付き多様体であることと
向きの整合性を検証した SimplicialComplex を構築する。

辺は頂点ペアを昇順に並べた辞書式順で番号付けし、向きは常に
小さい頂点番号 → 大きい頂点番号とする。境界頂点は昇順に並べる。
"""

from collections import Counter, defaultdict
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from src.errors import (
    DegenerateCellError,
    DimensionMismatchError,
    InconsistentOrientationError,
    NonManifoldError,
    ValidationError,
)

# 退化判定の相対許容誤差（最大辺長のn乗に対する測度比）
DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class SimplicialComplex:
    """検証済みの単体複体。

    Attributes:
        vertices: 頂点座標 (N, n)
        cells: トップセルの頂点インデックス (n_cells, n+1)。入力された向きを保持
        edges: 辺 (N_e, 2)。各行は昇順で、行は辞書式順
        cell_edges: 各セルの辺インデックス (n_cells, n+1 choose 2)。
            2次元では第k列が局所頂点kの対辺、1次元ではセル自身の辺
        boundary_vertices: 境界頂点インデックス（昇順）
        boundary_edges: 境界辺インデックス（2次元のみ、1次元では空）
    """

    vertices: NDArray[np.float64]
    cells: NDArray[np.int64]
    edges: NDArray[np.int64]
    cell_edges: NDArray[np.int64]
    boundary_vertices: NDArray[np.int64]
    boundary_edges: NDArray[np.int64]

    @property
    def dimension(self) -> int:
        return int(self.cells.shape[1]) - 1

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def n_cells(self) -> int:
        return int(self.cells.shape[0])

    @property
    def n_boundary(self) -> int:
        return int(self.boundary_vertices.shape[0])

    def edge_lengths(self) -> NDArray[np.float64]:
        """各辺の長さ |σ¹_k| を返す。"""
        diff = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.asarray(np.linalg.norm(diff, axis=1), dtype=np.float64)

    def cell_measures(self) -> NDArray[np.float64]:
        """各トップセルの測度（1次元は長さ、2次元は面積）を返す。"""
        return np.abs(_signed_measures(self.vertices, self.cells))


def _signed_measures(vertices: NDArray[np.float64], cells: NDArray[np.int64]) -> NDArray[np.float64]:
    if cells.shape[1] == 2:
        return np.asarray(vertices[cells[:, 1], 0] - vertices[cells[:, 0], 0], dtype=np.float64)
    p0, p1, p2 = (vertices[cells[:, k]] for k in range(3))
    e1 = p1 - p0
    e2 = p2 - p0
    return np.asarray(0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]), dtype=np.float64)


def _check_degenerate(vertices: NDArray[np.float64], cells: NDArray[np.int64]) -> None:
    n = cells.shape[1] - 1
    measures = np.abs(_signed_measures(vertices, cells))
    longest = np.zeros(cells.shape[0])
    for a in range(n + 1):
        for b in range(a + 1, n + 1):
            span = np.linalg.norm(vertices[cells[:, b]] - vertices[cells[:, a]], axis=1)
            longest = np.maximum(longest, span)
    degenerate = measures <= DEGENERATE_RTOL * np.maximum(longest, 1e-300) ** n
    if np.any(degenerate):
        t = int(np.flatnonzero(degenerate)[0])
        raise DegenerateCellError(f"測度0のセルがあります: セル {t} = {cells[t].tolist()}")


def _count_link_components(link_edges: list[tuple[int, int]]) -> int:
    """頂点リンク（辺の集合）の連結成分数を数える。"""
    adjacency: dict[int, set[int]] = defaultdict(set)
    for a, b in link_edges:
        adjacency[a].add(b)
        adjacency[b].add(a)
    seen: set[int] = set()
    components = 0
    for start in adjacency:
        if start in seen:
            continue
        components += 1
        stack = [start]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(adjacency[v] - seen)
    return components


def _validate_triangles(cells: NDArray[np.int64], n_vertices: int) -> Counter[tuple[int, int]]:
    """三角形複体の多様体性と向きを検証し、辺ごとの所属セル数を返す。"""
    edge_count: Counter[tuple[int, int]] = Counter(
        (min(u, v), max(u, v)) for a, b, c in cells.tolist() for u, v in ((a, b), (b, c), (c, a))
    )
    crowded = [e for e, k in edge_count.items() if k >= 3]
    if crowded:
        raise NonManifoldError(f"3枚以上の三角形が共有する辺があります: {sorted(crowded)[:5]}")

    directed: dict[tuple[int, int], int] = {}
    for t, (a, b, c) in enumerate(cells.tolist()):
        for u, v in ((a, b), (b, c), (c, a)):
            if (u, v) in directed:
                raise InconsistentOrientationError(
                    f"辺 ({u},{v}) がセル {directed[(u, v)]} とセル {t} で同じ向きに辿られています"
                )
            directed[(u, v)] = t

    links: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for a, b, c in cells.tolist():
        links[a].append((b, c))
        links[b].append((c, a))
        links[c].append((a, b))
    for v in range(n_vertices):
        if _count_link_components(links[v]) > 1:
            raise NonManifoldError(f"頂点 {v} でピンチしています（頂点のリンクが非連結）")
    return edge_count


def _validate_segments(cells: NDArray[np.int64]) -> Counter[int]:
    """線分複体の多様体性と向きを検証し、頂点ごとの所属セル数を返す。"""
    vertex_count: Counter[int] = Counter(cells.reshape(-1).tolist())
    crowded = [v for v, k in vertex_count.items() if k >= 3]
    if crowded:
        raise NonManifoldError(f"3本以上の線分が共有する頂点があります: {sorted(crowded)[:5]}")
    tails = Counter(cells[:, 0].tolist())
    heads = Counter(cells[:, 1].tolist())
    clash = [v for v, k in tails.items() if k > 1] + [v for v, k in heads.items() if k > 1]
    if clash:
        raise InconsistentOrientationError(f"頂点 {sorted(clash)[:5]} で隣接線分の向きが矛盾しています")
    return vertex_count


def build_complex(vertices: ArrayLike, cells: ArrayLike | Sequence[Sequence[int]]) -> SimplicialComplex:
    """頂点座標とトップセルから単体複体を構築する。

    Args:
        vertices: 頂点座標 (N, n)。1次元では長さNの1次元配列も可
        cells: トップセル (n_cells, n+1)。線分なら2頂点、三角形なら3頂点

    Returns:
        検証済みの SimplicialComplex

    Raises:
        ValidationError: インデックス範囲外、重複セル、孤立頂点
        DimensionMismatchError: 座標次元とセル次元が一致しない場合
        DegenerateCellError: 測度0のセル
        NonManifoldError: 3枚以上の三角形が共有する辺、頂点ピンチ
        InconsistentOrientationError: 共有面での誘導向きの矛盾
    """
    pts = np.asarray(vertices, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    cell_arr = np.asarray(cells, dtype=np.int64)
    if cell_arr.ndim != 2 or cell_arr.shape[0] == 0:
        raise ValidationError(f"セルは空でない2次元配列である必要があります: shape={cell_arr.shape}")

    n = cell_arr.shape[1] - 1
    if n not in (1, 2):
        raise ValidationError(f"対応する次元は1または2です: セルの頂点数 {cell_arr.shape[1]}")
    if pts.ndim != 2 or pts.shape[1] != n:
        raise DimensionMismatchError(f"頂点座標の次元 {pts.shape[1:]} がセル次元 {n} と一致しません")
    if not np.all(np.isfinite(pts)):
        raise ValidationError("頂点座標に非有限値が含まれます")

    n_vertices = pts.shape[0]
    if cell_arr.min() < 0 or cell_arr.max() >= n_vertices:
        raise ValidationError(f"セルの頂点インデックスが範囲 [0, {n_vertices}) の外にあります")
    for t, cell in enumerate(cell_arr.tolist()):
        if len(set(cell)) != len(cell):
            raise DegenerateCellError(f"セル {t} に重複頂点があります: {cell}")
    sorted_cells = np.sort(cell_arr, axis=1)
    unique_cells, counts = np.unique(sorted_cells, axis=0, return_counts=True)
    if np.any(counts > 1):
        raise ValidationError(f"重複セルがあります: {unique_cells[counts > 1][0].tolist()}")

    used = np.zeros(n_vertices, dtype=bool)
    used[cell_arr.reshape(-1)] = True
    if not np.all(used):
        raise NonManifoldError(f"どのセルにも属さない孤立頂点があります: {np.flatnonzero(~used)[:5].tolist()}")

    _check_degenerate(pts, cell_arr)

    if n == 2:
        edge_count = _validate_triangles(cell_arr, n_vertices)
        edges = np.array(sorted(edge_count), dtype=np.int64)
        edge_index = {(int(a), int(b)): k for k, (a, b) in enumerate(edges)}

        def _edge(u: int, v: int) -> int:
            return edge_index[(min(u, v), max(u, v))]

        cell_edges = np.array([[_edge(b, c), _edge(a, c), _edge(a, b)] for a, b, c in cell_arr.tolist()], dtype=np.int64)
        boundary_edges = np.array(
            [k for k, (a, b) in enumerate(edges.tolist()) if edge_count[(a, b)] == 1],
            dtype=np.int64,
        )
        boundary_vertices = np.unique(edges[boundary_edges].reshape(-1))
    else:
        vertex_count = _validate_segments(cell_arr)
        edges = np.unique(sorted_cells, axis=0)
        edge_index = {(int(a), int(b)): k for k, (a, b) in enumerate(edges)}
        cell_edges = np.array([[edge_index[(int(a), int(b))]] for a, b in sorted_cells], dtype=np.int64)
        boundary_edges = np.zeros(0, dtype=np.int64)
        boundary_vertices = np.array(sorted(v for v, k in vertex_count.items() if k == 1), dtype=np.int64)

    logger.debug(
        f"単体複体を構築: 次元={n}, N={n_vertices}, N_e={edges.shape[0]}, "
        f"セル={cell_arr.shape[0]}, 境界頂点={boundary_vertices.size}"
    )
    return SimplicialComplex(
        vertices=pts,
        cells=cell_arr,
        edges=edges.reshape(-1, 2),
        cell_edges=cell_edges,
        boundary_vertices=boundary_vertices.astype(np.int64),
        boundary_edges=boundary_edges,
    )


def connected_components(K: SimplicialComplex) -> tuple[int, NDArray[np.int32]]:
    """頂点の連結成分数と各頂点の成分ラベルを返す。"""
    n = K.n_vertices
    adjacency = scipy.sparse.coo_matrix(
        (np.ones(K.n_edges), (K.edges[:, 0], K.edges[:, 1])),
        shape=(n, n),
    )
    count, labels = scipy.sparse.csgraph.connected_components(adjacency, directed=False)
    return int(count), labels
