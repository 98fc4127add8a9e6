"""反応拡散コンパートメントネットワークのCLI。

Usage:
    rdnet validate --network net.yaml [--mesh mesh.yaml]
    rdnet equilibrium --network net.yaml
    rdnet mesh-info --mesh mesh.yaml
    rdnet simulate --network net.yaml --mesh mesh.yaml [--seed 0] [--out traj.csv]
    rdnet analyze --network net.yaml --mesh mesh.yaml [--seed 0] [--out report.json]

Examples:
    # 菱形メッシュ上で閉鎖系を積分し、JSONで出力
    rdnet simulate --network ab.yaml --mesh fig1.yaml --seed 1 --out traj.json --format json

    # 境界から一定流入させた開放系
    rdnet simulate --network ab.yaml --mesh fig1.yaml --open \\
        --boundary-schedule "{kind: constant, values: 0.1}" --out open.csv

終了コード:
    0 成功 / 1 検証エラー / 2 数値計算エラー / 3 入出力・構文エラー
"""

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from loguru import logger
from numpy.typing import NDArray

from src.analysis.actuation import ZeroSchedule, boundary_actuation_experiment, schedule_from_dict
from src.analysis.consensus import ConsensusReport, verify_consensus
from src.analysis.moieties import format_moiety
from src.analysis.reporter import format_consensus_report, report_to_dict
from src.compartmental.system import CompartmentalSystem, assemble
from src.config_loader import (
    integrator_config_from,
    limit_point_settings,
    load_config,
    setup_logging,
    well_centered_tol,
)
from src.crn.equilibrium import balance, equilibria_set
from src.crn.network import BalancedForm, ReactionNetwork
from src.data.export import FORMATS, export_trajectory
from src.data.mesh_file import parse_mesh
from src.data.network_file import load_network_spec
from src.data.spec_io import read_yaml_mapping
from src.data.validator import CheckItem, has_errors, validate_mesh, validate_network
from src.errors import DimensionMismatchError, NotConvergedError, NumericalError, ParseError, ValidationError
from src.mesh.complex import SimplicialComplex
from src.mesh.dual import circumcentric_dual, is_well_centered, well_centered_margins
from src.mesh.operators import build_operators
from src.simulation.integrator import integrate
from src.simulation.monitors import detect_convergence, monitor_persistency
from src.simulation.trajectory import Trajectory

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def _banner(title: str) -> None:
    print("=" * 60)
    print(f"  {title}")
    print("=" * 60)


def _vector(values: Any) -> str:
    return "[" + ", ".join(f"{float(v):.10g}" for v in np.asarray(values).reshape(-1)) + "]"


def _print_checks(items: list[CheckItem]) -> None:
    for item in items:
        print(f"  [{item.status:<7}] {item.category}/{item.name}: {item.detail}")


def _load_network(path: str) -> tuple[ReactionNetwork, NDArray[np.float64] | None]:
    spec = load_network_spec(path)
    return spec.to_network(), spec.x_star_array()


def _build_system(args: argparse.Namespace, config: dict[str, Any]) -> tuple[CompartmentalSystem, SimplicialComplex]:
    net, x_star = _load_network(args.network)
    mesh = parse_mesh(args.mesh)
    bf = balance(net, x_star)
    system = assemble(net, bf, mesh, well_centered_tol=well_centered_tol(config))
    return system, mesh


def default_initial_state(system: CompartmentalSystem) -> NDArray[np.float64]:
    """既定の初期状態 x^j = x*·(0.5 + j/(N-1))（N = 1 なら x*）を返す。"""
    n = system.n_compartments
    ramp = np.ones(1) if n == 1 else 0.5 + np.arange(n) / (n - 1)
    return np.asarray(np.outer(ramp, system.bf.x_star).reshape(-1), dtype=np.float64)


def _initial_state(args: argparse.Namespace, system: CompartmentalSystem) -> NDArray[np.float64]:
    if args.initial:
        data = read_yaml_mapping(args.initial)
        if "X0" in data:
            X0 = np.asarray(data["X0"], dtype=np.float64).reshape(-1)
        elif "blocks" in data:
            X0 = system.layout.flatten(data["blocks"])
        elif "x" in data:
            x = np.asarray(data["x"], dtype=np.float64).reshape(-1)
            if x.size != system.n_species:
                raise DimensionMismatchError(f"x の長さ {x.size} が種数 {system.n_species} と一致しません")
            X0 = np.tile(x, system.n_compartments)
        else:
            raise ParseError(args.initial, "X0 / blocks / x のいずれかのキーが必要です")
        if X0.size != system.layout.size:
            raise DimensionMismatchError(f"X0 の長さ {X0.size} が m·N = {system.layout.size} と一致しません")
        return X0
    if args.seed is not None:
        rng = np.random.default_rng(args.seed)
        return rng.uniform(0.1, 10.0, system.layout.size)
    return default_initial_state(system)


def _schedule_spec(raw: str) -> dict[str, Any]:
    """--boundary-schedule の値（YAMLファイルパスまたはインラインYAML）を辞書にする。"""
    if Path(raw).exists():
        return read_yaml_mapping(raw)
    try:
        data = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ParseError("--boundary-schedule", str(e)) from e
    if not isinstance(data, dict):
        raise ParseError("--boundary-schedule", "辞書形式で指定してください（例: {kind: constant, values: 0.1}）")
    return data


def _integrator_config(args: argparse.Namespace, config: dict[str, Any]) -> Any:
    return integrator_config_from(config, t_end=args.t_end, rtol=args.rtol, atol=args.atol, method=args.method)


def cmd_validate(args: argparse.Namespace, config: dict[str, Any]) -> int:
    _banner("仕様チェック")
    items: list[CheckItem] = []
    if args.network:
        net, x_star = _load_network(args.network)
        items.extend(validate_network(net, x_star))
    if args.mesh:
        items.extend(validate_mesh(parse_mesh(args.mesh), well_centered_tol(config)))
    if not items:
        raise ValidationError("--network または --mesh を指定してください")
    _print_checks(items)
    if has_errors(items):
        first = next(item for item in items if item.status == "ERROR")
        print(first.detail, file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_equilibrium(args: argparse.Namespace, config: dict[str, Any]) -> int:
    net, x_star = _load_network(args.network)
    bf: BalancedForm = balance(net, x_star)
    eq = equilibria_set(net, bf.x_star)
    _banner("熱力学平衡")
    print(f"  種       : {list(net.species_names)}")
    print(f"  x*       : {_vector(bf.x_star)}")
    print(f"  κ(x*)    : {_vector(bf.kappa)}")
    print(f"  S        : {eq.S.tolist()}")
    labels = [format_moiety(w) for w in eq.kernel_basis]
    print(f"  保存モエティ: {labels or 'なし'}")
    print("  平衡集合 E = {x > 0 | Sᵀ Ln x = Sᵀ Ln x*}")
    print(f"  次元: dim E = {len(eq.kernel_basis)}")
    return EXIT_OK


def cmd_mesh_info(args: argparse.Namespace, config: dict[str, Any]) -> int:
    mesh = parse_mesh(args.mesh)
    tol = well_centered_tol(config)
    centered = is_well_centered(mesh, tol)
    _banner("メッシュ情報")
    print(f"  次元     : {mesh.dimension}")
    print(f"  N        : {mesh.n_vertices}")
    print(f"  N_e      : {mesh.n_edges}")
    print(f"  N_b      : {mesh.n_boundary} {mesh.boundary_vertices.tolist()}")
    if mesh.dimension == 2:
        margin = float(well_centered_margins(mesh).min())
        print(f"  well-centered: {centered} (最小マージン {margin:.6g}, 許容 {tol:g})")
    else:
        print(f"  well-centered: {centered}")
    dual = circumcentric_dual(mesh, tol)
    ops = build_operators(mesh, dual)
    print(f"  双対総体積: {dual.total_volume:.12g}")
    print(f"  ⋆₀       : {_vector(ops.star0)}")
    print(f"  ⋆₁       : {_vector(ops.star1)}")
    return EXIT_OK


def _print_trajectory_summary(traj: Trajectory) -> None:
    print(f"  終了時刻 : {traj.times[-1]:.6g} ({traj.termination_reason})")
    print(f"  ステップ : 採択 {traj.n_accepted} / 棄却 {traj.n_rejected}")
    print(f"  G_d      : {traj.energy[0]:.6g} → {traj.energy[-1]:.6g}")
    print(f"  不一致   : {traj.disagreement_max[-1]:.3e}")
    print(f"  判定     : {detect_convergence(traj).value}")
    bound = monitor_persistency(traj)
    print(f"  濃度下界 : {bound.value:.6g} (t={bound.time:.6g}, j={bound.compartment}, {bound.species_name})")


def cmd_simulate(args: argparse.Namespace, config: dict[str, Any]) -> int:
    system, mesh = _build_system(args, config)
    X0 = _initial_state(args, system)
    integrator_config = _integrator_config(args, config)

    if args.open or args.boundary_schedule:
        if args.boundary_schedule:
            spec = _schedule_spec(args.boundary_schedule)
            schedule = schedule_from_dict(spec, system.n_boundary_signals, system.n_species)
        else:
            schedule = ZeroSchedule(system.n_boundary_signals)
        traj = boundary_actuation_experiment(system, schedule, integrator_config, X0).trajectory
    else:
        traj = integrate(system, X0, integrator_config)

    _banner("シミュレーション")
    _print_trajectory_summary(traj)
    if args.out:
        fmt = args.format or Path(args.out).suffix.lstrip(".") or "csv"
        export_trajectory(traj, fmt, args.out, network=system.net, mesh=mesh)
        print(f"  出力     : {args.out}")
    return EXIT_OK


def _write_report(report: ConsensusReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(report_to_dict(report), f, sort_keys=True, indent=2, ensure_ascii=False)
        f.write("\n")


def cmd_analyze(args: argparse.Namespace, config: dict[str, Any]) -> int:
    system, _ = _build_system(args, config)
    X0 = _initial_state(args, system)
    tol, max_iter = limit_point_settings(config)
    _banner("コンセンサス検証")
    try:
        report = verify_consensus(system, X0, _integrator_config(args, config), tol, max_iter)
    except NotConvergedError as e:
        if isinstance(e.report, ConsensusReport):
            print(format_consensus_report(e.report))
            if args.out:
                _write_report(e.report, args.out)
        raise
    print(format_consensus_report(report))
    if args.out:
        _write_report(report, args.out)
        print(f"  出力: {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """引数パーサを構築する。"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="設定ファイル（既定: config/config.yaml）")
    common.add_argument("--log-level", help="ログレベル（DEBUG / INFO / WARNING）")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--network", required=True, help="ネットワーク仕様ファイル（YAML）")
    run.add_argument("--mesh", required=True, help="メッシュ仕様ファイル（YAML）")
    run.add_argument("--initial", help="初期状態ファイル（X0 / blocks / x）")
    run.add_argument("--seed", type=int, help="乱数初期状態のシード（[0.1, 10] 一様）")
    run.add_argument("--t-end", type=float, help="積分終了時刻")
    run.add_argument("--rtol", type=float, help="相対許容誤差")
    run.add_argument("--atol", type=float, help="絶対許容誤差")
    run.add_argument("--method", choices=["rk45", "semi-implicit"], help="積分法")
    run.add_argument("--out", help="出力ファイル")

    parser = argparse.ArgumentParser(
        prog="rdnet",
        description="平衡反応ネットワークの反応拡散コンパートメントモデル",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="終了コード: 0 成功 / 1 検証エラー / 2 数値計算エラー / 3 入出力・構文エラー",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", parents=[common], help="仕様ファイルの不変条件チェック")
    p_validate.add_argument("--network", help="ネットワーク仕様ファイル")
    p_validate.add_argument("--mesh", help="メッシュ仕様ファイル")
    p_validate.set_defaults(handler=cmd_validate)

    p_eq = sub.add_parser("equilibrium", parents=[common], help="x*, κ, 保存モエティ")
    p_eq.add_argument("--network", required=True, help="ネットワーク仕様ファイル")
    p_eq.set_defaults(handler=cmd_equilibrium)

    p_mesh = sub.add_parser("mesh-info", parents=[common], help="メッシュと双対の情報")
    p_mesh.add_argument("--mesh", required=True, help="メッシュ仕様ファイル")
    p_mesh.set_defaults(handler=cmd_mesh_info)

    p_sim = sub.add_parser("simulate", parents=[common, run], help="閉鎖系・開放系の積分")
    p_sim.add_argument("--format", choices=list(FORMATS), help="出力形式（既定: 拡張子から判定）")
    p_sim.add_argument("--open", action="store_true", help="開放系で積分する")
    p_sim.add_argument("--boundary-schedule", help="境界スケジュール（YAMLファイルまたはインラインYAML）")
    p_sim.set_defaults(handler=cmd_simulate)

    p_an = sub.add_parser("analyze", parents=[common, run], help="コンセンサス検証レポート")
    p_an.set_defaults(handler=cmd_analyze)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """CLIエントリポイント。終了コードを返す。"""
    args = build_parser().parse_args(argv)
    config = load_config(Path(args.config)) if args.config else load_config()
    setup_logging(config, args.log_level)

    try:
        return int(args.handler(args, config))
    except ValidationError as e:
        logger.error(f"検証エラー: {e}")
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as e:
        logger.error(f"数値計算エラー: {e}")
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParseError, OSError) as e:
        logger.error(f"入出力エラー: {e}")
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
