"""メッシュ仕様ファイル（YAML）。

明示形式:

    dimension: 2
    vertices: [[0, 0], [1, 0], [0.5, 0.866]]
    cells: [[0, 1, 2]]

生成器形式:

    generator: {kind: interval, n_v: 17, length: 1.0}
    generator: {kind: fig1}
    generator: {kind: rhombus, side: 1.0}   # fig1 の別名
    generator: {kind: equilateral_strip, rows: 2, cols: 3, side: 1.0}
"""

from pathlib import Path
from typing import Any, Literal

import yaml
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, model_validator
from pydantic import ValidationError as SchemaValidationError

from src.data.spec_io import read_yaml_mapping, schema_error
from src.mesh.complex import SimplicialComplex, build_complex
from src.mesh.generators import equilateral_strip, fig1, interval, rhombus


class GeneratorSpec(BaseModel):
    """組み込み生成器の指定。"""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["interval", "fig1", "rhombus", "equilateral_strip"]
    n_v: int | None = Field(default=None, ge=2)
    length: float = Field(default=1.0, gt=0.0)
    rows: int = Field(default=1, ge=1)
    cols: int = Field(default=1, ge=1)
    side: float = Field(default=1.0, gt=0.0)

    @model_validator(mode="after")
    def _check_parameters(self) -> "GeneratorSpec":
        if self.kind == "interval" and self.n_v is None:
            raise ValueError("interval には n_v が必要です")
        return self

    def build(self) -> SimplicialComplex:
        if self.kind == "interval":
            assert self.n_v is not None
            return interval(self.n_v, self.length)
        if self.kind == "fig1":
            return fig1(self.side)
        if self.kind == "rhombus":
            return rhombus(self.side)
        return equilateral_strip(self.rows, self.cols, self.side)


class MeshSpecFile(BaseModel):
    """メッシュ仕様ファイルのスキーマ（明示形式または生成器形式）。"""

    model_config = ConfigDict(extra="forbid")

    dimension: Literal[1, 2] | None = None
    vertices: list[list[float]] | list[float] | None = None
    cells: list[list[NonNegativeInt]] | None = None
    generator: GeneratorSpec | None = None

    @model_validator(mode="after")
    def _check_form(self) -> "MeshSpecFile":
        explicit = self.vertices is not None or self.cells is not None
        if self.generator is not None and explicit:
            raise ValueError("generator と vertices/cells は同時に指定できません")
        if self.generator is None:
            if self.vertices is None or self.cells is None:
                raise ValueError("vertices と cells の両方、または generator が必要です")
            widths = {len(c) for c in self.cells}
            if len(widths) != 1:
                raise ValueError(f"cells の頂点数が揃っていません: {sorted(widths)}")
            if self.dimension is not None and widths != {self.dimension + 1}:
                raise ValueError(f"dimension={self.dimension} のセルは {self.dimension + 1} 頂点である必要があります")
        return self

    def to_complex(self) -> SimplicialComplex:
        """SimplicialComplex に変換する（多様体性・向きを検証）。"""
        if self.generator is not None:
            return self.generator.build()
        assert self.vertices is not None and self.cells is not None
        return build_complex(self.vertices, self.cells)


def load_mesh_spec(path: str | Path) -> MeshSpecFile:
    """メッシュ仕様ファイルを読み込み、スキーマ検証する。

    Raises:
        ParseError: YAML構文エラー
        ValidationError: スキーマ違反（フィールド位置を含む）
    """
    data = read_yaml_mapping(path)
    try:
        return MeshSpecFile.model_validate(data)
    except SchemaValidationError as e:
        raise schema_error(path, e) from e


def parse_mesh(path: str | Path) -> SimplicialComplex:
    """メッシュ仕様ファイルから SimplicialComplex を構築する。"""
    mesh = load_mesh_spec(path).to_complex()
    logger.debug(f"メッシュを読込: {path} (次元={mesh.dimension}, N={mesh.n_vertices}, N_e={mesh.n_edges})")
    return mesh


def mesh_to_dict(K: SimplicialComplex) -> dict[str, Any]:
    """SimplicialComplex を明示形式の辞書に変換する。"""
    vertices: list[Any] = (
        [float(v) for v in K.vertices[:, 0]] if K.dimension == 1 else [[float(c) for c in row] for row in K.vertices]
    )
    return {
        "dimension": K.dimension,
        "vertices": vertices,
        "cells": [[int(i) for i in cell] for cell in K.cells],
    }


def dump_mesh(K: SimplicialComplex, path: str | Path) -> None:
    """SimplicialComplex を明示形式のYAMLに書き出す。"""
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(mesh_to_dict(K), f, sort_keys=False)
    logger.debug(f"メッシュを書出: {path}")
