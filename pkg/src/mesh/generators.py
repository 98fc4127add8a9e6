"""組み込みメッシュ生成器。"""

import numpy as np

from src.errors import ValidationError
from src.mesh.complex import SimplicialComplex, build_complex


def interval(n_v: int, length: float = 1.0) -> SimplicialComplex:
    """区間 [0, length] を n_v 頂点で等分割した1次元複体を返す。"""
    if n_v < 2:
        raise ValidationError(f"区間メッシュには2頂点以上必要です: n_v={n_v}")
    if not length > 0:
        raise ValidationError(f"区間の長さは正である必要があります: {length}")
    vertices = np.linspace(0.0, length, n_v)
    cells = np.column_stack([np.arange(n_v - 1), np.arange(1, n_v)])
    return build_complex(vertices, cells)


def equilateral_strip(rows: int, cols: int, side: float = 1.0) -> SimplicialComplex:
    """rows × cols 個の菱形（正三角形2枚）を並べた平行四辺形メッシュを返す。

    頂点 (i, j) は ((i + j/2)·side, j·(√3/2)·side)、番号は j·(cols+1) + i。
    全三角形が反時計回りで向きは整合し、正三角形のため well-centered。
    """
    if rows < 1 or cols < 1:
        raise ValidationError(f"rows, cols は1以上である必要があります: rows={rows}, cols={cols}")
    if not side > 0:
        raise ValidationError(f"辺長は正である必要があります: {side}")

    height = np.sqrt(3.0) / 2.0
    vertices = np.array(
        [[(i + 0.5 * j) * side, j * height * side] for j in range(rows + 1) for i in range(cols + 1)],
        dtype=np.float64,
    )

    def vid(i: int, j: int) -> int:
        return j * (cols + 1) + i

    cells = []
    for j in range(rows):
        for i in range(cols):
            cells.append((vid(i, j), vid(i + 1, j), vid(i, j + 1)))
            cells.append((vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
    return build_complex(vertices, cells)


def rhombus(side: float = 1.0) -> SimplicialComplex:
    """辺を共有する正三角形2枚の菱形メッシュ（N = 4, N_e = 5）を返す。"""
    return equilateral_strip(1, 1, side)


def fig1(side: float = 1.0) -> SimplicialComplex:
    """基準例の2三角形メッシュ（頂点 v0..v3、辺5本）を返す。rhombus と同一。"""
    return rhombus(side)
