"""コンパートメントモデル（開放系・閉鎖系）の組み立てと右辺評価。

状態 X は compartment-major（X = (x¹; …; xᴺ)、各ブロック m 種）で並べる。

開放系:
    Ẋ = -(⋆₀⁻¹ ⊗ I_m)(Δ_d X/X* - (tr ⊗ I_m)ᵀ f̂_b) + F(X)
    e_b = (tr ⊗ I_m) X/X*
閉鎖系（ゼロフラックス境界）は f̂_b = 0 とした開放系。

全離散自由エネルギー:
    G_d(X) = Σⱼ |⋆ᵢv_j| G(x^j)
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from src.analysis.moieties import conserved_moieties
from src.crn.kinetics import balanced_field_blocks, require_positive
from src.crn.network import BalancedForm, ReactionNetwork, stoichiometric_matrix
from src.errors import DimensionMismatchError, ValidationError
from src.mesh.complex import SimplicialComplex
from src.mesh.dual import WELL_CENTERED_TOL, circumcentric_dual
from src.mesh.operators import Operators, build_operators, diffusion_resistance, laplacian, laplacian_factors

# 組み立て時の一様状態カーネル検査の相対許容誤差
_KERNEL_RTOL = 1e-12


@dataclass(frozen=True)
class StateLayout:
    """compartment-major の状態ベクトルの並び。"""

    n_compartments: int
    n_species: int

    @property
    def size(self) -> int:
        return self.n_compartments * self.n_species

    def to_blocks(self, X: ArrayLike) -> NDArray[np.float64]:
        """状態ベクトルを (N, m) のブロック配列に変換する。"""
        arr = np.asarray(X, dtype=np.float64)
        if arr.size != self.size:
            raise DimensionMismatchError(f"状態の長さ {arr.size} が m·N = {self.size} と一致しません")
        return arr.reshape(self.n_compartments, self.n_species)

    def flatten(self, blocks: ArrayLike) -> NDArray[np.float64]:
        """(N, m) のブロック配列を状態ベクトルに変換する。"""
        arr = np.asarray(blocks, dtype=np.float64)
        if arr.shape != (self.n_compartments, self.n_species):
            raise DimensionMismatchError(
                f"ブロック形状 {arr.shape} が ({self.n_compartments}, {self.n_species}) と一致しません"
            )
        return arr.reshape(-1).copy()

    def column_labels(self, species_names: tuple[str, ...]) -> list[str]:
        """CSV等の列名（x{j}_{種名}）を compartment-major 順で返す。"""
        return [f"x{j}_{name}" for j in range(self.n_compartments) for name in species_names]


@dataclass(frozen=True)
class BoundarySignals:
    """境界ポートの信号（種 × 境界頂点、compartment-major）。

    Attributes:
        f_hat_b: 離散境界フラックス (m·N_b)
        e_b: 境界エフォート (m·N_b)
    """

    f_hat_b: NDArray[np.float64]
    e_b: NDArray[np.float64]

    def __post_init__(self) -> None:
        if self.f_hat_b.shape != self.e_b.shape:
            raise DimensionMismatchError(f"f̂_b {self.f_hat_b.shape} と e_b {self.e_b.shape} の次元が一致しません")


@dataclass(frozen=True)
class CompartmentalSystem:
    """組み立て済みのコンパートメントモデル。

    Attributes:
        net: 反応ネットワーク
        bf: 平衡形式
        mesh: 単体複体
        ops: 離散作用素
        layout: 状態の並び
        diffusion: 種ごとの拡散係数
        laplacian: Δ_d (mN × mN)
        gradient: d ⊗ I_m (m·N_e × mN)
        edge_weights: (⋆₁ ⊗ I_m) R_d の対角 (m·N_e)
        inv_star0: (⋆₀⁻¹ ⊗ I_m) の対角 (mN)
        trace_lift: (tr ⊗ I_m)ᵀ (mN × m·N_b)
        x_star_stacked: 1_N ⊗ x* (mN)
        diffusion_operator: 線形拡散部 L = -(⋆₀⁻¹ ⊗ I_m) Δ_d diag(1/X*)
        moieties: 保存モエティ基底 (k × m)
        reactions_enabled: False の場合 F ≡ 0
    """

    net: ReactionNetwork
    bf: BalancedForm
    mesh: SimplicialComplex
    ops: Operators
    layout: StateLayout
    diffusion: NDArray[np.float64]
    laplacian: scipy.sparse.csr_matrix
    gradient: scipy.sparse.csr_matrix
    edge_weights: NDArray[np.float64]
    inv_star0: NDArray[np.float64]
    trace_lift: scipy.sparse.csr_matrix
    x_star_stacked: NDArray[np.float64]
    diffusion_operator: scipy.sparse.csr_matrix
    moieties: NDArray[np.int64]
    reactions_enabled: bool = True

    @property
    def n_compartments(self) -> int:
        return self.layout.n_compartments

    @property
    def n_species(self) -> int:
        return self.layout.n_species

    @property
    def n_boundary_signals(self) -> int:
        return int(self.trace_lift.shape[1])

    @property
    def alpha(self) -> float:
        """R_d ≥ αI の α（拡散係数の最小値）。"""
        return float(self.diffusion.min()) if self.diffusion.size else 0.0


def assemble(
    net: ReactionNetwork,
    bf: BalancedForm,
    mesh: SimplicialComplex,
    diffusion: ArrayLike | None = None,
    reactions_enabled: bool = True,
    edge_diffusion: ArrayLike | None = None,
    well_centered_tol: float = WELL_CENTERED_TOL,
) -> CompartmentalSystem:
    """ネットワークとメッシュからコンパートメントモデルを組み立てる。

    Args:
        net: 反応ネットワーク
        bf: 平衡形式
        mesh: well-centered な単体複体
        diffusion: 種ごとの拡散係数（省略時は net.diffusion）
        reactions_enabled: False の場合、反応項を無効化する（ポート収支の検証用）
        edge_diffusion: 辺ごとの拡散係数表 (N_e × m)
        well_centered_tol: well-centered 判定のマージン

    Raises:
        NotWellCenteredError: メッシュが well-centered でない場合
        DimensionMismatchError: 次元の不整合
    """
    m = net.n_species
    if bf.x_star.shape != (m,) or bf.kappa.shape != (net.n_reactions,):
        raise DimensionMismatchError(
            f"BalancedForm の次元 (x*={bf.x_star.shape}, κ={bf.kappa.shape}) が "
            f"ネットワーク (m={m}, r={net.n_reactions}) と一致しません"
        )

    coeffs = np.asarray(net.diffusion if diffusion is None else diffusion, dtype=np.float64).reshape(-1)
    if coeffs.shape != (m,):
        raise DimensionMismatchError(f"拡散係数は {m} 個必要です: {coeffs.shape}")

    dual = circumcentric_dual(mesh, tol=well_centered_tol)
    ops = build_operators(mesh, dual)
    R_d = diffusion_resistance(coeffs, mesh.n_edges, edge_diffusion)
    gradient, edge_weights = laplacian_factors(mesh, ops, R_d, n_species=m)
    lap = laplacian(mesh, ops, R_d, n_species=m)

    layout = StateLayout(n_compartments=mesh.n_vertices, n_species=m)
    uniform_residual = float(np.max(np.abs(lap @ np.ones(layout.size)), initial=0.0))
    scale = float(np.max(np.abs(lap.data), initial=0.0))
    if uniform_residual > _KERNEL_RTOL * max(scale, 1.0):
        raise ValidationError(f"Δ_d の核が一様状態を含みません: 残差 {uniform_residual:.3e}")

    identity = scipy.sparse.identity(m, format="csr")
    inv_star0 = np.repeat(1.0 / ops.star0, m)
    x_star_stacked = np.tile(bf.x_star, layout.n_compartments)
    trace_lift = scipy.sparse.csr_matrix(scipy.sparse.kron(ops.tr, identity).T)
    diffusion_operator = scipy.sparse.csr_matrix(
        -(scipy.sparse.diags(inv_star0) @ lap @ scipy.sparse.diags(1.0 / x_star_stacked))
    )

    for v in (inv_star0, x_star_stacked, coeffs):
        v.setflags(write=False)

    system = CompartmentalSystem(
        net=net,
        bf=bf,
        mesh=mesh,
        ops=ops,
        layout=layout,
        diffusion=coeffs,
        laplacian=lap,
        gradient=gradient,
        edge_weights=edge_weights,
        inv_star0=inv_star0,
        trace_lift=trace_lift,
        x_star_stacked=x_star_stacked,
        diffusion_operator=diffusion_operator,
        moieties=conserved_moieties(stoichiometric_matrix(net)),
        reactions_enabled=reactions_enabled,
    )
    logger.info(
        f"コンパートメントモデルを組み立て: N={layout.n_compartments}, m={m}, "
        f"状態次元={layout.size}, N_e={mesh.n_edges}, N_b={mesh.n_boundary}, "
        f"反応項={'有効' if reactions_enabled else '無効'}"
    )
    if system.alpha <= 0:
        logger.warning(f"拡散係数に0が含まれます（α = 0）: {coeffs.tolist()}")
    return system


def _positive_state(sys: CompartmentalSystem, X: ArrayLike) -> NDArray[np.float64]:
    state = require_positive(X, "X").reshape(-1)
    if state.size != sys.layout.size:
        raise DimensionMismatchError(f"状態の長さ {state.size} が m·N = {sys.layout.size} と一致しません")
    return state


def reaction_field_all(sys: CompartmentalSystem, X: ArrayLike) -> NDArray[np.float64]:
    """全コンパートメントの反応項 F(X) = (f(x¹); …; f(xᴺ)) を返す。

    Raises:
        DomainError: 0以下の成分がある場合
    """
    state = _positive_state(sys, X)
    if not sys.reactions_enabled:
        return np.zeros_like(state)
    log_ratio = np.log(sys.layout.to_blocks(state) / sys.bf.x_star)
    return balanced_field_blocks(sys.net, sys.bf.kappa, log_ratio).reshape(-1)


def disagreement(sys: CompartmentalSystem, X: ArrayLike) -> NDArray[np.float64]:
    """不一致ベクトル X/X* を返す。"""
    return _positive_state(sys, X) / sys.x_star_stacked


def open_rhs(
    sys: CompartmentalSystem,
    X: ArrayLike,
    f_hat_b: ArrayLike,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """開放系の右辺 Ẋ と境界エフォート e_b を返す。

    Args:
        sys: コンパートメントモデル
        X: 正値の状態 (mN)
        f_hat_b: 境界フラックス (m·N_b)

    Raises:
        DomainError: X に0以下の成分がある場合
        DimensionMismatchError: f_hat_b の長さが m·N_b でない場合
    """
    ratio = disagreement(sys, X)
    flux = np.asarray(f_hat_b, dtype=np.float64).reshape(-1)
    if flux.size != sys.n_boundary_signals:
        raise DimensionMismatchError(f"f̂_b の長さ {flux.size} が m·N_b = {sys.n_boundary_signals} と一致しません")
    if not np.all(np.isfinite(flux)):
        raise ValidationError("f̂_b に非有限値が含まれます")

    # Δ_d は因子の形で作用させる（一様な比では辺差分が厳密に0）
    edge_flux = sys.edge_weights * (sys.gradient @ ratio)
    diffusive = sys.gradient.T @ edge_flux - sys.trace_lift @ flux
    x_dot = -sys.inv_star0 * diffusive + reaction_field_all(sys, X)
    e_b = np.asarray(sys.trace_lift.T @ ratio, dtype=np.float64)
    return np.asarray(x_dot, dtype=np.float64), e_b


def closed_rhs(sys: CompartmentalSystem, X: ArrayLike) -> NDArray[np.float64]:
    """閉鎖系（ゼロフラックス境界）の右辺 Ẋ を返す。"""
    x_dot, _ = open_rhs(sys, X, np.zeros(sys.n_boundary_signals))
    return x_dot


def boundary_signals(sys: CompartmentalSystem, X: ArrayLike, f_hat_b: ArrayLike) -> BoundarySignals:
    """与えた f̂_b と、状態 X における境界エフォート e_b の組を返す。"""
    _, e_b = open_rhs(sys, X, f_hat_b)
    return BoundarySignals(f_hat_b=np.asarray(f_hat_b, dtype=np.float64).reshape(-1), e_b=e_b)


def total_energy(sys: CompartmentalSystem, X: ArrayLike) -> float:
    """全離散自由エネルギー G_d(X) = Σⱼ |⋆ᵢv_j| G(x^j) を返す。"""
    blocks = sys.layout.to_blocks(_positive_state(sys, X))
    x_star = sys.bf.x_star
    per_compartment = np.sum(blocks * np.log(blocks / x_star) + (x_star - blocks), axis=1)
    return float(sys.ops.star0 @ per_compartment)


def energy_rate(sys: CompartmentalSystem, X: ArrayLike) -> float:
    """閉鎖系に沿った dG_d/dt = Σⱼ |⋆ᵢv_j| Ln(x^j/x*)ᵀ ẋ^j を返す。"""
    state = _positive_state(sys, X)
    effort = np.log(sys.layout.to_blocks(state) / sys.bf.x_star)
    x_dot = sys.layout.to_blocks(closed_rhs(sys, state))
    return float(sys.ops.star0 @ np.sum(effort * x_dot, axis=1))


def volume_weighted_mean(sys: CompartmentalSystem, X: ArrayLike) -> NDArray[np.float64]:
    """双対体積で重み付けした平均状態 x̂ = Σⱼ |⋆ᵢv_j| x^j / Σⱼ |⋆ᵢv_j| を返す。"""
    blocks = sys.layout.to_blocks(X)
    return np.asarray(sys.ops.star0 @ blocks / np.sum(sys.ops.star0), dtype=np.float64)


def moiety_totals(sys: CompartmentalSystem, X: ArrayLike, W: ArrayLike | None = None) -> NDArray[np.float64]:
    """保存量 M_w(X) = Σⱼ |⋆ᵢv_j| wᵀx^j を各モエティについて返す。"""
    basis = sys.moieties if W is None else np.asarray(W).reshape(-1, sys.n_species)
    weighted = sys.ops.star0 @ sys.layout.to_blocks(X)
    return np.asarray(basis @ weighted, dtype=np.float64)


def total_mass(sys: CompartmentalSystem, X: ArrayLike) -> NDArray[np.float64]:
    """種ごとの双対体積加重総量 Σⱼ |⋆ᵢv_j| x^j を返す。"""
    return np.asarray(sys.ops.star0 @ sys.layout.to_blocks(X), dtype=np.float64)


def spatial_variance(sys: CompartmentalSystem, X: ArrayLike) -> NDArray[np.float64]:
    """種ごとの空間分散 Σⱼ |⋆ᵢv_j| (x^j - x̄)² を返す（x̄ は双対体積加重平均）。"""
    blocks = sys.layout.to_blocks(X)
    deviation = blocks - volume_weighted_mean(sys, X)
    return np.asarray(sys.ops.star0 @ deviation**2, dtype=np.float64)


def uniform_state(sys: CompartmentalSystem, x: ArrayLike) -> NDArray[np.float64]:
    """全コンパートメントが x の一様状態 1_N ⊗ x を返す。"""
    xv = np.asarray(x, dtype=np.float64).reshape(-1)
    if xv.size != sys.n_species:
        raise DimensionMismatchError(f"x の次元 {xv.size} が種数 {sys.n_species} と一致しません")
    return np.tile(xv, sys.n_compartments)


def diffusion_stiffness(sys: CompartmentalSystem) -> float:
    """線形拡散部 L のスペクトル半径の上界（Gershgorin、行絶対値和の最大）を返す。"""
    if sys.diffusion_operator.nnz == 0:
        return 0.0
    return float(abs(sys.diffusion_operator).sum(axis=1).max())
