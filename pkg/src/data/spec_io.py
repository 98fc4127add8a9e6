"""YAML仕様ファイルの読込と、スキーマ検証エラーの変換。"""

from collections.abc import Iterable
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError as SchemaValidationError

from src.errors import ParseError, ValidationError


def read_yaml_mapping(path: str | Path) -> dict[str, Any]:
    """YAMLファイルを読み込み、トップレベルの辞書を返す。

    Raises:
        OSError: ファイルが読めない場合
        ParseError: YAML構文エラー、またはトップレベルが辞書でない場合
    """
    p = Path(path)
    with open(p, encoding="utf-8") as f:
        text = f.read()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        problem = getattr(e, "problem", None) or str(e)
        if mark is not None:
            raise ParseError(str(p), str(problem), line=mark.line + 1, column=mark.column + 1) from e
        raise ParseError(str(p), str(problem)) from e
    if not isinstance(data, dict):
        raise ParseError(str(p), f"トップレベルは辞書である必要があります（{type(data).__name__}）")
    return data


def _format_location(loc: Iterable[Any]) -> str:
    parts: list[str] = []
    for item in loc:
        if isinstance(item, int):
            parts.append(f"[{item}]")
        else:
            parts.append(("." if parts else "") + str(item))
    return "".join(parts) or "(root)"


def schema_error(path: str | Path, error: SchemaValidationError) -> ValidationError:
    """pydanticの検証エラーを、フィールド位置付きの ValidationError に変換する。"""
    details = "; ".join(f"{_format_location(e['loc'])}: {e['msg']}" for e in error.errors())
    return ValidationError(f"{path}: {details}")
