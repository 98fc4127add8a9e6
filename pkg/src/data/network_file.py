"""反応ネットワーク仕様ファイル（YAML）。

形式:

    species:
      - {name: A, diffusion: 1.0}
      - {name: B, diffusion: 1.0}
    complexes:
      C1: {A: 1}
      C2: {B: 1}
    reactions:
      - {source: C1, product: C2, k_fwd: 2.0, k_bwd: 1.0, name: R1}
    x_star: [1.0, 2.0]   # 省略可
"""

from pathlib import Path
from typing import Any

import numpy as np
import yaml
from loguru import logger
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveFloat, model_validator
from pydantic import ValidationError as SchemaValidationError

from src.crn.network import ReactionNetwork
from src.data.spec_io import read_yaml_mapping, schema_error


class SpeciesEntry(BaseModel):
    """種の定義。"""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(min_length=1)
    diffusion: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)


class ReactionEntry(BaseModel):
    """可逆反応の定義。"""

    model_config = ConfigDict(extra="forbid")

    source: str
    product: str
    k_fwd: PositiveFloat = Field(allow_inf_nan=False)
    k_bwd: PositiveFloat = Field(allow_inf_nan=False)
    name: str | None = None


class NetworkSpecFile(BaseModel):
    """反応ネットワーク仕様ファイルのスキーマ。"""

    model_config = ConfigDict(extra="forbid")

    species: list[SpeciesEntry] = Field(min_length=1)
    complexes: dict[str, dict[str, NonNegativeInt]]
    reactions: list[ReactionEntry] = Field(default_factory=list)
    x_star: list[PositiveFloat] | None = None

    @model_validator(mode="after")
    def _check_references(self) -> "NetworkSpecFile":
        names = [s.name for s in self.species]
        if len(set(names)) != len(names):
            raise ValueError(f"種名が重複しています: {names}")
        known = set(names)
        for cid, coeffs in self.complexes.items():
            unknown = sorted(set(coeffs) - known)
            if unknown:
                raise ValueError(f"complexes.{cid} が未定義の種を参照しています: {unknown}")
        for j, r in enumerate(self.reactions):
            for role, cid in (("source", r.source), ("product", r.product)):
                if cid not in self.complexes:
                    raise ValueError(f"reactions[{j}].{role} が未定義の複合体を参照しています: {cid}")
        if self.x_star is not None and len(self.x_star) != len(self.species):
            raise ValueError(f"x_star の長さ {len(self.x_star)} が種数 {len(self.species)} と一致しません")
        return self

    def to_network(self) -> ReactionNetwork:
        """ReactionNetwork に変換する（ドメイン不変条件を検証）。"""
        names = [r.name or f"R{j + 1}" for j, r in enumerate(self.reactions)]
        return ReactionNetwork.from_reactions(
            species=[s.name for s in self.species],
            complexes=self.complexes,
            reactions=[(r.source, r.product, r.k_fwd, r.k_bwd) for r in self.reactions],
            diffusion=[s.diffusion for s in self.species],
            reaction_names=names,
        )

    def x_star_array(self) -> NDArray[np.float64] | None:
        return None if self.x_star is None else np.asarray(self.x_star, dtype=np.float64)


def load_network_spec(path: str | Path) -> NetworkSpecFile:
    """ネットワーク仕様ファイルを読み込み、スキーマ検証する。

    Raises:
        ParseError: YAML構文エラー
        ValidationError: スキーマ違反（フィールド位置を含む）
    """
    data = read_yaml_mapping(path)
    try:
        spec = NetworkSpecFile.model_validate(data)
    except SchemaValidationError as e:
        raise schema_error(path, e) from e
    logger.debug(f"ネットワーク仕様を読込: {path} (種={len(spec.species)}, 反応={len(spec.reactions)})")
    return spec


def parse_network(path: str | Path) -> ReactionNetwork:
    """ネットワーク仕様ファイルから ReactionNetwork を構築する。"""
    return load_network_spec(path).to_network()


def network_to_dict(net: ReactionNetwork, x_star: NDArray[np.float64] | None = None) -> dict[str, Any]:
    """ReactionNetwork を仕様ファイル形式の辞書に変換する。"""
    complexes: dict[str, dict[str, int]] = {}
    for k, cid in enumerate(net.complex_names):
        column = net.Z[:, k]
        complexes[cid] = {net.species_names[i]: int(column[i]) for i in np.flatnonzero(column)}
    src, prod = net.source_complexes, net.product_complexes
    data: dict[str, Any] = {
        "species": [
            {"name": name, "diffusion": float(d)} for name, d in zip(net.species_names, net.diffusion, strict=True)
        ],
        "complexes": complexes,
        "reactions": [
            {
                "source": net.complex_names[int(src[j])],
                "product": net.complex_names[int(prod[j])],
                "k_fwd": float(net.k_fwd[j]),
                "k_bwd": float(net.k_bwd[j]),
                "name": net.reaction_names[j],
            }
            for j in range(net.n_reactions)
        ],
    }
    if x_star is not None:
        data["x_star"] = [float(v) for v in x_star]
    return data


def dump_network(net: ReactionNetwork, path: str | Path, x_star: NDArray[np.float64] | None = None) -> None:
    """ReactionNetwork を仕様ファイル（YAML）に書き出す。"""
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(network_to_dict(net, x_star), f, sort_keys=False, allow_unicode=True)
    logger.debug(f"ネットワーク仕様を書出: {path}")
