"""平衡反応ネットワークのデータ型。

種 m、複合体 c、反応 r からなる可逆反応ネットワークを
複合体化学量論行列 Z (m×c) と接続行列 B (c×r) で表現する。

    S = Z B   （化学量論行列、整数演算で厳密に計算）

値は全て不変（配列は書込み不可）で、スレッド間で共有してよい。
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from src.errors import DimensionMismatchError, ValidationError


def _frozen(values: NDArray, dtype: type) -> NDArray:
    """書込み不可のコピーを返す。"""
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ReactionNetwork:
    """可逆反応ネットワーク。

    Attributes:
        species_names: 種ラベル（m個）
        complexes: 複合体化学量論行列 Z (m×c)、非負整数
        incidence: 複合体グラフの接続行列 B (c×r)、各列に -1（原系）と +1（生成系）が1つずつ
        k_fwd: 正反応速度定数（r個、正値）
        k_bwd: 逆反応速度定数（r個、正値）
        diffusion: 種ごとの拡散係数（m個、非負）
        complex_names: 複合体ラベル（省略時は C1, C2, ...）
        reaction_names: 反応ラベル（省略時は R1, R2, ...）
    """

    species_names: tuple[str, ...]
    complexes: NDArray[np.int64]
    incidence: NDArray[np.int64]
    k_fwd: NDArray[np.float64]
    k_bwd: NDArray[np.float64]
    diffusion: NDArray[np.float64]
    complex_names: tuple[str, ...] = field(default=())
    reaction_names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        species = tuple(str(s) for s in self.species_names)
        m = len(species)
        if len(set(species)) != m:
            raise ValidationError(f"種ラベルが重複しています: {species}")

        raw_z = np.asarray(self.complexes)
        if raw_z.size and not np.all(np.equal(np.mod(raw_z, 1), 0)):
            raise ValidationError("Z の成分は整数である必要があります")
        Z = np.asarray(raw_z, dtype=np.int64).reshape(m, -1) if m else np.zeros((0, 0), dtype=np.int64)
        c = Z.shape[1]
        if np.any(Z < 0):
            raise ValidationError("Z の成分は非負整数である必要があります")
        if c and np.any(~Z.any(axis=0)):
            empty = [int(k) for k in np.flatnonzero(~Z.any(axis=0))]
            raise ValidationError(f"空の複合体（Z のゼロ列）は扱えません: 列 {empty}")

        B = np.asarray(self.incidence, dtype=np.int64)
        if B.ndim != 2 or B.shape[0] != c:
            raise DimensionMismatchError(f"B は {c}×r 行列である必要があります: shape={B.shape}")
        r = B.shape[1]
        for j in range(r):
            col = B[:, j]
            if np.count_nonzero(col == 1) != 1 or np.count_nonzero(col == -1) != 1 or np.count_nonzero(col) != 2:
                raise ValidationError(f"B の第{j}列は +1 と -1 を1つずつ持ち、他は0である必要があります: {col.tolist()}")

        k_fwd = np.asarray(self.k_fwd, dtype=np.float64).reshape(-1)
        k_bwd = np.asarray(self.k_bwd, dtype=np.float64).reshape(-1)
        if k_fwd.shape != (r,) or k_bwd.shape != (r,):
            raise DimensionMismatchError(f"速度定数は {r} 個必要です: k_fwd={k_fwd.shape}, k_bwd={k_bwd.shape}")
        if np.any(~np.isfinite(k_fwd)) or np.any(k_fwd <= 0) or np.any(~np.isfinite(k_bwd)) or np.any(k_bwd <= 0):
            raise ValidationError("速度定数 k_fwd, k_bwd は正の有限値である必要があります")

        diffusion = np.asarray(self.diffusion, dtype=np.float64).reshape(-1)
        if diffusion.shape != (m,):
            raise DimensionMismatchError(f"拡散係数は種ごとに {m} 個必要です: {diffusion.shape}")
        if np.any(~np.isfinite(diffusion)) or np.any(diffusion < 0):
            raise ValidationError("拡散係数は非負の有限値である必要があります")

        complex_names = tuple(self.complex_names) or tuple(f"C{k + 1}" for k in range(c))
        reaction_names = tuple(self.reaction_names) or tuple(f"R{j + 1}" for j in range(r))
        if len(complex_names) != c or len(reaction_names) != r:
            raise DimensionMismatchError("複合体・反応ラベルの数が行列の次元と一致しません")

        object.__setattr__(self, "species_names", species)
        object.__setattr__(self, "complexes", _frozen(Z, np.int64))
        object.__setattr__(self, "incidence", _frozen(B, np.int64))
        object.__setattr__(self, "k_fwd", _frozen(k_fwd, np.float64))
        object.__setattr__(self, "k_bwd", _frozen(k_bwd, np.float64))
        object.__setattr__(self, "diffusion", _frozen(diffusion, np.float64))
        object.__setattr__(self, "complex_names", complex_names)
        object.__setattr__(self, "reaction_names", reaction_names)

    @classmethod
    def from_reactions(
        cls,
        species: Sequence[str],
        complexes: Mapping[str, Mapping[str, int]],
        reactions: Sequence[tuple[str, str, float, float]],
        diffusion: Sequence[float] | None = None,
        reaction_names: Sequence[str] | None = None,
    ) -> "ReactionNetwork":
        """複合体の辞書と反応リストからネットワークを構築する。

        Args:
            species: 種ラベル
            complexes: 複合体ID → {種ラベル: 係数}
            reactions: (原系複合体ID, 生成系複合体ID, k_fwd, k_bwd) のリスト
            diffusion: 種ごとの拡散係数（省略時は全て0）
            reaction_names: 反応ラベル

        Raises:
            ValidationError: 未定義の種・複合体を参照している場合
        """
        species = list(species)
        index = {name: i for i, name in enumerate(species)}
        complex_ids = list(complexes)
        complex_index = {cid: k for k, cid in enumerate(complex_ids)}

        Z = np.zeros((len(species), len(complex_ids)), dtype=np.int64)
        for k, cid in enumerate(complex_ids):
            for name, coeff in complexes[cid].items():
                if name not in index:
                    raise ValidationError(f"複合体 {cid} が未定義の種 {name} を参照しています")
                Z[index[name], k] = coeff

        B = np.zeros((len(complex_ids), len(reactions)), dtype=np.int64)
        k_fwd = np.zeros(len(reactions))
        k_bwd = np.zeros(len(reactions))
        for j, (src, prod, kf, kb) in enumerate(reactions):
            for cid in (src, prod):
                if cid not in complex_index:
                    raise ValidationError(f"反応 {j + 1} が未定義の複合体 {cid} を参照しています")
            if src == prod:
                raise ValidationError(f"反応 {j + 1} の原系と生成系が同一です: {src}")
            B[complex_index[src], j] = -1
            B[complex_index[prod], j] = 1
            k_fwd[j] = kf
            k_bwd[j] = kb

        return cls(
            species_names=tuple(species),
            complexes=Z,
            incidence=B,
            k_fwd=k_fwd,
            k_bwd=k_bwd,
            diffusion=np.zeros(len(species)) if diffusion is None else np.asarray(diffusion, dtype=np.float64),
            complex_names=tuple(complex_ids),
            reaction_names=tuple(reaction_names or ()),
        )

    @property
    def Z(self) -> NDArray[np.int64]:
        return self.complexes

    @property
    def B(self) -> NDArray[np.int64]:
        return self.incidence

    @property
    def n_species(self) -> int:
        return len(self.species_names)

    @property
    def n_complexes(self) -> int:
        return int(self.complexes.shape[1])

    @property
    def n_reactions(self) -> int:
        return int(self.incidence.shape[1])

    @property
    def source_complexes(self) -> NDArray[np.int64]:
        """各反応の原系複合体インデックス（B の -1 の位置）。"""
        return np.argmin(self.incidence, axis=0) if self.n_reactions else np.zeros(0, dtype=np.int64)

    @property
    def product_complexes(self) -> NDArray[np.int64]:
        """各反応の生成系複合体インデックス（B の +1 の位置）。"""
        return np.argmax(self.incidence, axis=0) if self.n_reactions else np.zeros(0, dtype=np.int64)

    def with_diffusion(self, diffusion: Sequence[float] | NDArray[np.float64]) -> "ReactionNetwork":
        """拡散係数だけを差し替えたネットワークを返す。"""
        return ReactionNetwork(
            species_names=self.species_names,
            complexes=self.complexes,
            incidence=self.incidence,
            k_fwd=self.k_fwd,
            k_bwd=self.k_bwd,
            diffusion=np.asarray(diffusion, dtype=np.float64),
            complex_names=self.complex_names,
            reaction_names=self.reaction_names,
        )


@dataclass(frozen=True)
class BalancedForm:
    """熱力学平衡 x* と平衡反応定数 κ(x*) の組。

    Attributes:
        x_star: 熱力学平衡（m個、正値）
        kappa: 平衡反応定数（r個、正値）。K(x*) = diag(kappa)
    """

    x_star: NDArray[np.float64]
    kappa: NDArray[np.float64]

    def __post_init__(self) -> None:
        x_star = np.asarray(self.x_star, dtype=np.float64).reshape(-1)
        kappa = np.asarray(self.kappa, dtype=np.float64).reshape(-1)
        if np.any(~np.isfinite(x_star)) or np.any(x_star <= 0):
            raise ValidationError("x* は正の有限値である必要があります")
        if np.any(~np.isfinite(kappa)) or np.any(kappa <= 0):
            raise ValidationError("κ は正の有限値である必要があります")
        object.__setattr__(self, "x_star", _frozen(x_star, np.float64))
        object.__setattr__(self, "kappa", _frozen(kappa, np.float64))


@dataclass(frozen=True)
class EquilibriaSet:
    """熱力学平衡の集合 E = {x > 0 | Sᵀ Ln x = Sᵀ Ln x*}。

    Attributes:
        S: 化学量論行列 (m×r)、整数
        x_star: 基準となる熱力学平衡
        kernel_basis: ker(Sᵀ) の整数基底（行ベクトル、k×m）。保存モエティ w
    """

    S: NDArray[np.int64]
    x_star: NDArray[np.float64]
    kernel_basis: NDArray[np.int64]

    def __post_init__(self) -> None:
        S = np.asarray(self.S, dtype=np.int64)
        W = np.asarray(self.kernel_basis, dtype=np.int64).reshape(-1, S.shape[0])
        if W.size and np.any(W @ S != 0):
            raise ValidationError("kernel_basis が Sᵀw = 0 を満たしません")
        object.__setattr__(self, "S", _frozen(S, np.int64))
        object.__setattr__(self, "x_star", _frozen(np.asarray(self.x_star).reshape(-1), np.float64))
        object.__setattr__(self, "kernel_basis", _frozen(W, np.int64))


def stoichiometric_matrix(net: ReactionNetwork) -> NDArray[np.int64]:
    """化学量論行列 S = Z B を整数演算で返す（r = 0 の場合は m×0）。"""
    return np.asarray(net.complexes @ net.incidence, dtype=np.int64).reshape(net.n_species, net.n_reactions)
