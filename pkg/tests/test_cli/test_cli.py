"""CLIの結合テスト。"""

import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pandas as pd
import pytest

from src.cli import build_parser, default_initial_state, main
from src.compartmental.system import CompartmentalSystem


@pytest.fixture
def bad_cycle_file(write_yaml: Callable[[str, Any], Path]) -> Path:
    """詳細釣り合いを満たさない3サイクルの仕様ファイルを返す。"""
    return write_yaml(
        "cycle.yaml",
        {
            "species": [{"name": s, "diffusion": 1.0} for s in ("A", "B", "C")],
            "complexes": {"CA": {"A": 1}, "CB": {"B": 1}, "CC": {"C": 1}},
            "reactions": [
                {"source": "CA", "product": "CB", "k_fwd": 1.0, "k_bwd": 1.0},
                {"source": "CB", "product": "CC", "k_fwd": 1.0, "k_bwd": 1.0},
                {"source": "CC", "product": "CA", "k_fwd": 1.0, "k_bwd": 2.0},
            ],
        },
    )


@pytest.fixture
def right_triangle_file(write_yaml: Callable[[str, Any], Path]) -> Path:
    """直角三角形1枚のメッシュ仕様ファイルを返す。"""
    return write_yaml("right.yaml", {"vertices": [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], "cells": [[0, 1, 2]]})


@pytest.mark.unit
class TestParser:
    """build_parser のテスト。"""

    def test_subcommands(self) -> None:
        """5つのサブコマンドを解析できること。"""
        parser = build_parser()
        for argv in (
            ["validate", "--network", "n.yaml"],
            ["equilibrium", "--network", "n.yaml"],
            ["mesh-info", "--mesh", "m.yaml"],
            ["simulate", "--network", "n.yaml", "--mesh", "m.yaml", "--open"],
            ["analyze", "--network", "n.yaml", "--mesh", "m.yaml", "--seed", "3"],
        ):
            assert parser.parse_args(argv).command == argv[0]

    def test_unknown_method(self) -> None:
        """未知の --method は argparse エラーになること。"""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["simulate", "--network", "n", "--mesh", "m", "--method", "euler"])

    def test_default_initial_state(self, ab_system: CompartmentalSystem) -> None:
        """既定初期状態が x*·(0.5 + j/(N-1)) のランプになること。"""
        X0 = default_initial_state(ab_system)
        assert X0[:2].tolist() == [0.5, 1.0]
        assert X0[-2:].tolist() == [1.5, 3.0]


@pytest.mark.integration
class TestCommands:
    """サブコマンドの終了コードと出力のテスト。"""

    def test_validate_ok(
        self, ab_network_file: Path, rhombus_mesh_file: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """整合した仕様で終了コード0になること。"""
        assert main(["validate", "--network", str(ab_network_file), "--mesh", str(rhombus_mesh_file)]) == 0
        out = capsys.readouterr().out
        assert "詳細釣り合い" in out
        assert "ERROR" not in out

    def test_validate_bad_rates(self, bad_cycle_file: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """詳細釣り合いを満たさない速度定数で終了コード1になること。"""
        assert main(["validate", "--network", str(bad_cycle_file)]) == 1
        assert "NotDetailedBalancedError" in capsys.readouterr().err

    def test_validate_requires_input(self, capsys: pytest.CaptureFixture[str]) -> None:
        """入力が無ければ終了コード1になること。"""
        assert main(["validate"]) == 1

    def test_equilibrium(self, ab_network_file: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """x*, κ, 保存モエティを表示すること。"""
        assert main(["equilibrium", "--network", str(ab_network_file)]) == 0
        out = capsys.readouterr().out
        assert "[1, 2]" in out
        assert "(1,1)" in out
        assert "dim E = 1" in out

    def test_equilibrium_bad_rates(self, bad_cycle_file: Path) -> None:
        """釣り合わない速度定数では終了コード1になること。"""
        assert main(["equilibrium", "--network", str(bad_cycle_file)]) == 1

    def test_mesh_info(self, rhombus_mesh_file: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """菱形メッシュの N, N_e と well-centered 判定を表示すること。"""
        assert main(["mesh-info", "--mesh", str(rhombus_mesh_file)]) == 0
        out = capsys.readouterr().out
        assert "N        : 4" in out
        assert "N_e      : 5" in out
        assert "well-centered: True" in out

    def test_mesh_info_not_well_centered(
        self, right_triangle_file: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """直角三角形メッシュで判定 False を表示し、終了コード1になること。"""
        assert main(["mesh-info", "--mesh", str(right_triangle_file)]) == 1
        captured = capsys.readouterr()
        assert "NotWellCenteredError" in captured.err
        assert "well-centered: False" in captured.out

    def test_simulate_csv(
        self, ab_network_file: Path, rhombus_mesh_file: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """simulate がCSVを書き出すこと。"""
        out = tmp_path / "traj.csv"
        argv = ["simulate", "--network", str(ab_network_file), "--mesh", str(rhombus_mesh_file)]
        argv += ["--seed", "1", "--t-end", "1.0", "--out", str(out)]
        assert main(argv) == 0
        frame = pd.read_csv(out, float_precision="round_trip")
        assert list(frame.columns[:3]) == ["t", "x0_A", "x0_B"]
        assert "シミュレーション" in capsys.readouterr().out

    def test_simulate_open_json(
        self, ab_network_file: Path, rhombus_mesh_file: Path, tmp_path: Path
    ) -> None:
        """開放系の積分結果をJSONで書き出し、ハッシュを埋め込むこと。"""
        out = tmp_path / "open.json"
        argv = ["simulate", "--network", str(ab_network_file), "--mesh", str(rhombus_mesh_file), "--t-end", "0.5"]
        argv += ["--boundary-schedule", "{kind: constant, values: 0.1}", "--out", str(out)]
        assert main(argv) == 0
        payload = json.loads(out.read_text(encoding="utf-8"))
        assert len(payload["metadata"]["network_hash"]) == 64
        assert len(payload["metadata"]["mesh_hash"]) == 64
        assert payload["times"][-1] == pytest.approx(0.5)

    def test_simulate_initial_file(
        self, ab_network_file: Path, rhombus_mesh_file: Path, write_yaml: Callable[[str, Any], Path]
    ) -> None:
        """--initial の長さが合わなければ終了コード1になること。"""
        initial = write_yaml("x0.yaml", {"X0": [1.0, 2.0, 3.0]})
        argv = ["simulate", "--network", str(ab_network_file), "--mesh", str(rhombus_mesh_file)]
        assert main(argv + ["--initial", str(initial)]) == 1

    def test_analyze_consensus(
        self, ab_network_file: Path, rhombus_mesh_file: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """analyze が CONSENSUS を表示し、JSONレポートを書き出すこと。"""
        out = tmp_path / "report.json"
        argv = ["analyze", "--network", str(ab_network_file), "--mesh", str(rhombus_mesh_file)]
        assert main(argv + ["--seed", "7", "--out", str(out)]) == 0
        assert "判定: CONSENSUS" in capsys.readouterr().out
        assert json.loads(out.read_text(encoding="utf-8"))["status"] == "CONSENSUS"

    def test_analyze_not_converged(
        self, ab_network_file: Path, rhombus_mesh_file: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """t_end が短すぎれば終了コード2になること。"""
        argv = ["analyze", "--network", str(ab_network_file), "--mesh", str(rhombus_mesh_file), "--t-end", "0.1"]
        assert main(argv) == 2
        captured = capsys.readouterr()
        assert "判定: RUNNING" in captured.out
        assert "NotConvergedError" in captured.err

    def test_broken_yaml(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """YAML構文エラーで終了コード3になること。"""
        path = tmp_path / "broken.yaml"
        path.write_text("species: [\n", encoding="utf-8")
        assert main(["equilibrium", "--network", str(path)]) == 3
        assert "ParseError" in capsys.readouterr().err

    def test_missing_file(self, tmp_path: Path) -> None:
        """存在しないファイルで終了コード3になること。"""
        assert main(["mesh-info", "--mesh", str(tmp_path / "none.yaml")]) == 3


@pytest.mark.integration
class TestBundledSpecs:
    """同梱のサンプル仕様のテスト。"""

    SPECS = Path(__file__).resolve().parents[2] / "config" / "specs"

    @pytest.mark.parametrize("network", ["ab_isomerization.yaml", "dimerization.yaml"])
    @pytest.mark.parametrize("mesh", ["fig1.yaml", "strip.yaml"])
    def test_validate(self, network: str, mesh: str) -> None:
        """サンプル仕様が不変条件チェックを通ること。"""
        assert main(["validate", "--network", str(self.SPECS / network), "--mesh", str(self.SPECS / mesh)]) == 0

    def test_constant_influx_schedule(self, tmp_path: Path) -> None:
        """サンプルの境界スケジュールで開放系を積分できること。"""
        argv = ["simulate", "--network", str(self.SPECS / "ab_isomerization.yaml")]
        argv += ["--mesh", str(self.SPECS / "strip.yaml"), "--t-end", "1.0"]
        argv += ["--boundary-schedule", str(self.SPECS / "constant_influx.yaml"), "--out", str(tmp_path / "o.csv")]
        assert main(argv) == 0
