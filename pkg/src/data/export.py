"""軌道のCSV/JSON出力と読込、ネットワーク・メッシュのハッシュ。

CSV列: t, x{j}_{種名}（compartment-major）, G_d, disagreement_max, min_concentration
JSON: 同じ系列に metadata（network_hash, mesh_hash, config 等）を付加。キーは整列し、
同一入力・同一設定ではバイト単位で同一の出力になる。
"""

import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger

from src.compartmental.system import StateLayout
from src.crn.network import ReactionNetwork
from src.data.mesh_file import mesh_to_dict
from src.data.network_file import network_to_dict
from src.errors import ParseError, ValidationError
from src.mesh.complex import SimplicialComplex
from src.simulation.config import IntegratorConfig
from src.simulation.trajectory import Trajectory

FORMATS = ("csv", "json")


def canonical_json(payload: Any) -> str:
    """キー整列・空白なしのJSON文字列を返す。"""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_canonical_json(payload: Any) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def network_hash(net: ReactionNetwork) -> str:
    """ネットワーク定義のSHA-256ハッシュを返す。"""
    return sha256_canonical_json(network_to_dict(net))


def mesh_hash(K: SimplicialComplex) -> str:
    """メッシュ定義のSHA-256ハッシュを返す。"""
    return sha256_canonical_json(mesh_to_dict(K))


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """軌道を列順固定の DataFrame に変換する。"""
    labels = StateLayout(traj.n_compartments, traj.n_species).column_labels(traj.species_names)
    frame = pd.DataFrame(traj.states, columns=labels)
    frame.insert(0, "t", traj.times)
    frame["G_d"] = traj.energy
    frame["disagreement_max"] = traj.disagreement_max
    frame["min_concentration"] = traj.min_concentration
    return frame


def trajectory_to_dict(traj: Trajectory, metadata: dict[str, Any] | None = None) -> dict[str, Any]:
    """軌道をJSON化可能な辞書に変換する。"""
    meta: dict[str, Any] = {
        "species_names": list(traj.species_names),
        "n_species": traj.n_species,
        "n_compartments": traj.n_compartments,
        "termination_reason": traj.termination_reason,
        "n_accepted": traj.n_accepted,
        "n_rejected": traj.n_rejected,
        "config": traj.config.to_dict() if traj.config is not None else None,
    }
    meta.update(metadata or {})
    return {
        "metadata": meta,
        "times": traj.times.tolist(),
        "states": traj.states.tolist(),
        "energy": traj.energy.tolist(),
        "disagreement_max": traj.disagreement_max.tolist(),
        "min_concentration": traj.min_concentration.tolist(),
        "derivative_norm": traj.derivative_norm.tolist(),
    }


def export_trajectory(
    traj: Trajectory,
    fmt: str,
    path: str | Path,
    network: ReactionNetwork | None = None,
    mesh: SimplicialComplex | None = None,
    metadata: dict[str, Any] | None = None,
) -> Path:
    """軌道をCSVまたはJSONで書き出す。

    Args:
        traj: 軌道
        fmt: "csv" または "json"
        path: 出力パス
        network: ハッシュを埋め込むネットワーク（JSONのみ）
        mesh: ハッシュを埋め込むメッシュ（JSONのみ）
        metadata: 追加メタデータ（JSONのみ）

    Raises:
        ValidationError: 未対応の形式
        OSError: 書込みに失敗した場合
    """
    if fmt not in FORMATS:
        raise ValidationError(f"未対応の出力形式です: {fmt!r}（{FORMATS}）")
    out = Path(path)
    if fmt == "csv":
        trajectory_frame(traj).to_csv(out, index=False, float_format="%.17g", lineterminator="\n")
    else:
        extra = dict(metadata or {})
        if network is not None:
            extra["network_hash"] = network_hash(network)
        if mesh is not None:
            extra["mesh_hash"] = mesh_hash(mesh)
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            json.dump(trajectory_to_dict(traj, extra), f, sort_keys=True, indent=2, ensure_ascii=False)
            f.write("\n")
    logger.info(f"軌道を出力: {out} ({fmt}, サンプル数={traj.n_samples})")
    return out


def load_trajectory(path: str | Path) -> Trajectory:
    """JSON形式の軌道を読み込む。

    Raises:
        ParseError: JSON構文エラーまたは必須キーの欠落
    """
    p = Path(path)
    with open(p, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(str(p), e.msg, line=e.lineno, column=e.colno) from e
    try:
        meta = data["metadata"]
        config = IntegratorConfig(**meta["config"]) if meta.get("config") else None
        return Trajectory(
            times=np.asarray(data["times"], dtype=np.float64),
            states=np.asarray(data["states"], dtype=np.float64),
            energy=np.asarray(data["energy"], dtype=np.float64),
            disagreement_max=np.asarray(data["disagreement_max"], dtype=np.float64),
            min_concentration=np.asarray(data["min_concentration"], dtype=np.float64),
            derivative_norm=np.asarray(data["derivative_norm"], dtype=np.float64),
            n_species=int(meta["n_species"]),
            termination_reason=str(meta["termination_reason"]),
            n_accepted=int(meta["n_accepted"]),
            n_rejected=int(meta["n_rejected"]),
            config=config,
            species_names=tuple(meta["species_names"]),
        )
    except (KeyError, TypeError) as e:
        raise ParseError(str(p), f"軌道ファイルに必要なキーがありません: {e}") from e
