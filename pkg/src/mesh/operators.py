"""離散Hodgeスター、外微分、トレース作用素と拡散ラプラシアン。

状態は compartment-major（X = (x¹; …; xᴺ)、各ブロックは m 種）で並べるため、
種ごとの演算子はクロネッカー積 A ⊗ I_m で持ち上げる。R_d も同様に
edge-major（辺kの m 成分が連続）で並べる。

    Δ_d = (d ⊗ I_m)ᵀ (⋆₁ ⊗ I_m) R_d (d ⊗ I_m)
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse
from numpy.typing import ArrayLike, NDArray

from src.errors import DimensionMismatchError, ValidationError
from src.mesh.complex import SimplicialComplex
from src.mesh.dual import DualComplex, circumcentric_dual


@dataclass(frozen=True)
class Operators:
    """メッシュ上の離散作用素。

    Attributes:
        star0: ⋆₀ の対角成分 |⋆ᵢv_k| (N,)
        star1: ⋆₁ の対角成分 |⋆ᵢσ¹_k| / |σ¹_k| (N_e,)
        d: 外微分 (N_e × N)、各行に -1（tail）と +1（head）
        tr: トレース作用素 (N_b × N)、境界頂点を昇順に選択
    """

    star0: NDArray[np.float64]
    star1: NDArray[np.float64]
    d: scipy.sparse.csr_matrix
    tr: scipy.sparse.csr_matrix

    @property
    def n_vertices(self) -> int:
        return int(self.star0.shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.star1.shape[0])

    @property
    def n_boundary(self) -> int:
        return int(self.tr.shape[0])


def hodge_star_0(K: SimplicialComplex, dual: DualComplex) -> NDArray[np.float64]:
    """⋆₀ の対角 |⋆ᵢv_k| / |v_k|（|v_k| = 1）を返す。"""
    if dual.vertex_volumes.shape != (K.n_vertices,):
        raise DimensionMismatchError("双対体積の数が頂点数と一致しません")
    return dual.vertex_volumes.copy()


def hodge_star_1(K: SimplicialComplex, dual: DualComplex) -> NDArray[np.float64]:
    """⋆₁ の対角 |⋆ᵢσ¹_k| / |σ¹_k| を返す。"""
    if dual.edge_volumes.shape != (K.n_edges,):
        raise DimensionMismatchError("双対辺測度の数が辺数と一致しません")
    return np.asarray(dual.edge_volumes / dual.edge_lengths, dtype=np.float64)


def exterior_derivative_0(K: SimplicialComplex) -> scipy.sparse.csr_matrix:
    """0-コチェインの外微分 d を返す。(d·u)_k = u_head - u_tail。"""
    n_e = K.n_edges
    rows = np.repeat(np.arange(n_e), 2)
    cols = K.edges.reshape(-1)
    vals = np.tile([-1.0, 1.0], n_e)
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n_e, K.n_vertices))


def trace_operator(K: SimplicialComplex) -> scipy.sparse.csr_matrix:
    """境界頂点への制限 tr (N_b × N) を返す。境界が無ければ 0 行。"""
    n_b = K.n_boundary
    return scipy.sparse.csr_matrix(
        (np.ones(n_b), (np.arange(n_b), K.boundary_vertices)),
        shape=(n_b, K.n_vertices),
    )


def with_edge_orientation(d: scipy.sparse.spmatrix, flips: ArrayLike) -> scipy.sparse.csr_matrix:
    """flips が True の辺の向きを反転した外微分を返す。"""
    flip_mask = np.asarray(flips, dtype=bool).reshape(-1)
    if flip_mask.size != d.shape[0]:
        raise DimensionMismatchError(f"flips の長さ {flip_mask.size} が辺数 {d.shape[0]} と一致しません")
    signs = np.where(flip_mask, -1.0, 1.0)
    return scipy.sparse.csr_matrix(scipy.sparse.diags(signs) @ d)


def diffusion_resistance(
    diffusion: ArrayLike,
    n_edges: int,
    edge_table: ArrayLike | None = None,
) -> NDArray[np.float64]:
    """R_d の対角（edge-major, 長さ m·N_e）を返す。

    edge_table (N_e × m) を与えた場合は辺ごとの拡散係数として用いる。
    省略時は種ごとの拡散係数を全辺に複製する。
    """
    coeffs = np.asarray(diffusion, dtype=np.float64).reshape(-1)
    if edge_table is None:
        table = np.tile(coeffs, (n_edges, 1))
    else:
        table = np.asarray(edge_table, dtype=np.float64)
        if table.shape != (n_edges, coeffs.size):
            raise DimensionMismatchError(
                f"辺ごとの拡散係数表は ({n_edges}, {coeffs.size}) である必要があります: {table.shape}"
            )
    if np.any(~np.isfinite(table)) or np.any(table < 0):
        raise ValidationError("拡散係数は非負の有限値である必要があります")
    return np.asarray(table.reshape(-1), dtype=np.float64)


def laplacian_factors(
    K: SimplicialComplex,
    ops: Operators,
    R_d: ArrayLike,
    n_species: int | None = None,
) -> tuple[scipy.sparse.csr_matrix, NDArray[np.float64]]:
    """Δ_d = Gᵀ diag(w) G の因子 G = d ⊗ I_m (m·N_e × mN) と w = (⋆₁ ⊗ I_m) R_d を返す。

    Args:
        K: 単体複体
        ops: 離散作用素
        R_d: 正（または0）の対角成分、edge-major で長さ m·N_e
        n_species: 種数 m。省略時は R_d の長さから決める

    Raises:
        DimensionMismatchError: R_d の長さが m·N_e と一致しない場合
    """
    if ops.n_vertices != K.n_vertices or ops.n_edges != K.n_edges:
        raise DimensionMismatchError("作用素の次元が単体複体と一致しません")
    r = np.asarray(R_d, dtype=np.float64).reshape(-1)
    n_e = K.n_edges
    m = n_species if n_species is not None else (r.size // n_e if n_e else 0)
    if m <= 0 or r.size != m * n_e:
        raise DimensionMismatchError(f"R_d の長さ {r.size} が m·N_e = {m}·{n_e} と一致しません")
    if np.any(r < 0):
        raise ValidationError("R_d の対角成分は非負である必要があります")

    identity = scipy.sparse.identity(m, format="csr")
    gradient = scipy.sparse.kron(ops.d, identity, format="csr")
    weights = np.repeat(ops.star1, m) * r
    weights.setflags(write=False)
    return gradient, weights


def laplacian(
    K: SimplicialComplex,
    ops: Operators,
    R_d: ArrayLike,
    n_species: int | None = None,
) -> scipy.sparse.csr_matrix:
    """拡散ラプラシアン Δ_d (mN × mN) を組み立てる。

    Returns:
        対称半正定値の疎行列（compartment-major）

    Raises:
        DimensionMismatchError: R_d の長さが m·N_e と一致しない場合
    """
    gradient, weights = laplacian_factors(K, ops, R_d, n_species)
    return scipy.sparse.csr_matrix(gradient.T @ scipy.sparse.diags(weights) @ gradient)


def build_operators(K: SimplicialComplex, dual: DualComplex | None = None) -> Operators:
    """⋆₀, ⋆₁, d, tr をまとめて構築する（dual 省略時は外心双対を計算）。

    ⋆₀ と ⋆₁ の対角は読み取り専用で返す。
    """
    dual = dual if dual is not None else circumcentric_dual(K)
    star0 = hodge_star_0(K, dual)
    star1 = hodge_star_1(K, dual)
    for diagonal in (star0, star1):
        diagonal.setflags(write=False)
    return Operators(
        star0=star0,
        star1=star1,
        d=exterior_derivative_0(K),
        tr=trace_operator(K),
    )
