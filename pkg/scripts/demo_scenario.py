"""デモシナリオスクリプト。

組み込みのネットワークとメッシュを使用して、全レイヤーを通して動作するデモを実行する。

シナリオ:
    1. 反応ネットワークと熱力学平衡（A⇌B / 2A⇌B）
    2. メッシュと離散作用素（菱形メッシュ、⋆₀・⋆₁・Δ_d のスペクトル）
    3. 閉鎖系のコンセンサス検証（ランダム初期状態）
    4. 拡散0との比較（各コンパートメントが別々の極限に留まる）
    5. 境界アクチュエーション（一定流入・周期入力）

Usage:
    python scripts/demo_scenario.py                  # シナリオ実行
    python scripts/demo_scenario.py ./output/demo     # 軌道・レポートを出力
"""

import sys
from pathlib import Path

# プロジェクトルートをsys.pathに追加（直接実行対応）
_PROJECT_ROOT = str(Path(__file__).resolve().parent.parent)
if _PROJECT_ROOT not in sys.path:
    sys.path.insert(0, _PROJECT_ROOT)

import numpy as np
from loguru import logger

# ログ設定: WARNINGレベル以上を表示
logger.remove()
logger.add(sys.stderr, level="WARNING", format="{time:HH:mm:ss} | {level:<8} | {message}")

SEED = 20240501


def _separator(title: str) -> None:
    """セクション区切りを表示する。"""
    print(f"\n{'='*60}")
    print(f"  {title}")
    print(f"{'='*60}\n")


def _fmt(values: np.ndarray) -> str:
    return "(" + ", ".join(f"{v:.6g}" for v in np.asarray(values).reshape(-1)) + ")"


def step1_networks() -> None:
    """Step 1: 反応ネットワークと熱力学平衡。"""
    _separator("Step 1: 反応ネットワークと熱力学平衡")

    from src.analysis.moieties import format_moiety
    from src.crn.equilibrium import balance, compute_limit_point, equilibria_set
    from src.crn.network import ReactionNetwork

    networks = {
        "A⇌B (k=2/1)": ReactionNetwork.from_reactions(
            ["A", "B"], {"C1": {"A": 1}, "C2": {"B": 1}}, [("C1", "C2", 2.0, 1.0)], diffusion=[1.0, 1.0]
        ),
        "2A⇌B (k=1/4)": ReactionNetwork.from_reactions(
            ["A", "B"], {"C1": {"A": 2}, "C2": {"B": 1}}, [("C1", "C2", 1.0, 4.0)], diffusion=[0.5, 1.5]
        ),
    }
    for label, net in networks.items():
        bf = balance(net)
        eq = equilibria_set(net, bf.x_star)
        limit = compute_limit_point([2.0, 2.0], eq, bf)
        moieties = ", ".join(format_moiety(w) for w in eq.kernel_basis)
        print(f"  {label:<14} x*={_fmt(bf.x_star)}  κ={_fmt(bf.kappa)}  モエティ={moieties}")
        print(f"  {'':<14} x0=(2, 2) の極限点 → {_fmt(limit)}")


def step2_mesh() -> None:
    """Step 2: メッシュと離散作用素。"""
    _separator("Step 2: 菱形メッシュと離散作用素")

    from src.mesh.generators import fig1
    from src.mesh.operators import build_operators, laplacian

    mesh = fig1()
    ops = build_operators(mesh)
    lap = laplacian(mesh, ops, np.ones(mesh.n_edges), n_species=1).toarray()
    scaled = lap / np.sqrt(np.outer(ops.star0, ops.star0))
    eigenvalues = np.linalg.eigvalsh(scaled)

    print(f"  N={mesh.n_vertices}, N_e={mesh.n_edges}, 境界頂点={mesh.boundary_vertices.tolist()}")
    print(f"  ⋆₀ = {_fmt(ops.star0)}（総和 {ops.star0.sum():.6g} = √3/2）")
    print(f"  ⋆₁ = {_fmt(ops.star1)}")
    print(f"  ⋆₀^(-1/2) Δ ⋆₀^(-1/2) の固有値: {_fmt(eigenvalues)}")


def step3_consensus(out_dir: Path | None) -> None:
    """Step 3: 閉鎖系のコンセンサス検証。"""
    _separator("Step 3: 閉鎖系のコンセンサス")

    from src.analysis.consensus import verify_consensus
    from src.analysis.reporter import format_consensus_report
    from src.compartmental.system import assemble
    from src.crn.equilibrium import balance
    from src.crn.network import ReactionNetwork
    from src.data.export import export_trajectory
    from src.mesh.generators import fig1
    from src.simulation.config import IntegratorConfig

    net = ReactionNetwork.from_reactions(
        ["A", "B"], {"C1": {"A": 1}, "C2": {"B": 1}}, [("C1", "C2", 2.0, 1.0)], diffusion=[1.0, 1.0]
    )
    mesh = fig1()
    system = assemble(net, balance(net, [1.0, 2.0]), mesh)
    rng = np.random.default_rng(SEED)
    X0 = rng.uniform(0.1, 10.0, system.layout.size)

    report = verify_consensus(system, X0, IntegratorConfig())
    print(format_consensus_report(report))

    if out_dir is not None:
        path = export_trajectory(report.trajectory, "csv", out_dir / "consensus.csv", net, mesh)
        print(f"\n  [出力] {path}")


def step4_zero_diffusion() -> None:
    """Step 4: 拡散0との比較。"""
    _separator("Step 4: 拡散0（空間結合なし）")

    from src.compartmental.system import assemble
    from src.crn.equilibrium import balance
    from src.crn.network import ReactionNetwork
    from src.mesh.generators import fig1
    from src.simulation.integrator import integrate
    from src.simulation.monitors import detect_convergence

    net = ReactionNetwork.from_reactions(
        ["A", "B"], {"C1": {"A": 1}, "C2": {"B": 1}}, [("C1", "C2", 2.0, 1.0)], diffusion=[0.0, 0.0]
    )
    system = assemble(net, balance(net, [1.0, 2.0]), fig1())
    blocks = np.array([[2.0, 2.0], [1.0, 1.0], [3.0, 0.5], [0.2, 0.4]])
    traj = integrate(system, blocks.reshape(-1))

    print(f"  判定: {detect_convergence(traj).value}（t={traj.times[-1]:.4g}）")
    for j, (x0, x) in enumerate(zip(blocks, traj.blocks(-1), strict=True)):
        print(f"  コンパートメント{j}: {_fmt(x0)} → {_fmt(x)}")


def step5_actuation(out_dir: Path | None) -> None:
    """Step 5: 境界アクチュエーション。"""
    _separator("Step 5: 境界アクチュエーション")

    from src.analysis.actuation import boundary_actuation_experiment, schedule_from_dict
    from src.compartmental.system import assemble
    from src.crn.equilibrium import balance
    from src.crn.network import ReactionNetwork
    from src.data.export import export_trajectory
    from src.mesh.generators import equilateral_strip
    from src.simulation.config import IntegratorConfig

    net = ReactionNetwork.from_reactions(
        ["A", "B"], {"C1": {"A": 1}, "C2": {"B": 1}}, [("C1", "C2", 2.0, 1.0)], diffusion=[1.0, 0.2]
    )
    mesh = equilateral_strip(2, 4)
    system = assemble(net, balance(net, [1.0, 2.0]), mesh)
    config = IntegratorConfig(t_end=10.0, stop_on_steady=False)

    schedules = {
        "一定流入（サイト0に A）": {"kind": "constant", "sites": {0: [0.5, 0.0]}},
        "周期入力（全境界）": {"kind": "periodic", "mean": 0.0, "amplitude": 0.05, "period": 4.0},
    }
    for label, spec in schedules.items():
        schedule = schedule_from_dict(spec, system.n_boundary_signals, system.n_species)
        result = boundary_actuation_experiment(system, schedule, config)
        print(f"  {label}")
        print(f"    総量   : {_fmt(result.total_mass[0])} → {_fmt(result.total_mass[-1])}")
        print(f"    空間分散: {_fmt(result.spatial_variance[0])} → {_fmt(result.spatial_variance[-1])}")
        if out_dir is not None and spec["kind"] == "constant":
            path = export_trajectory(result.trajectory, "json", out_dir / "actuation.json", net, mesh)
            print(f"    [出力] {path}")


def main(out_dir: str | None = None) -> None:
    """全シナリオを順次実行する。"""
    print("\n" + "=" * 60)
    print("  反応拡散コンパートメントネットワーク デモシナリオ")
    print("=" * 60)

    target = Path(out_dir) if out_dir else None
    if target is not None:
        target.mkdir(parents=True, exist_ok=True)

    step1_networks()
    step2_mesh()
    step3_consensus(target)
    step4_zero_diffusion()
    step5_actuation(target)

    _separator("デモ完了")
    print("全シナリオが正常に完了しました。")
    if target is not None:
        print(f"出力: {target.resolve()}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
