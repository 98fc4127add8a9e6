"""検証レポートのテキスト整形と機械可読な辞書化。"""

from typing import Any

from src.analysis.consensus import ConsensusReport
from src.analysis.lyapunov import LyapunovReport


def _vector(values: Any) -> str:
    return "(" + ", ".join(f"{float(v):.10g}" for v in values) + ")"


def format_consensus_report(report: ConsensusReport) -> str:
    """ConsensusReport を人間可読なテキストに整形する。"""
    lyap = report.lyapunov
    bound = report.persistency
    lines = [
        f"判定: {report.status.value}",
        f"  最終時刻            : {report.final_time:.6g}",
        f"  最終不一致          : {report.final_disagreement:.3e}",
        f"  平衡集合所属残差    : {report.membership_residual:.3e}",
        f"  予測極限            : {_vector(report.predicted_limit)}",
        f"  シミュレーション極限: {_vector(report.simulated_limit)}",
        f"  予測誤差            : {report.prediction_error:.3e}",
        f"  α（最小拡散係数）   : {report.alpha:.6g}",
        "Lyapunov (G_d):",
        f"  最大増加            : {lyap.max_increase:.3e} (スラック {lyap.slack:.3e}"
        f"{', 超過' if lyap.violated else ''})",
        f"  総減少              : {lyap.total_decrease:.6g}",
        f"  散逸積分            : {lyap.dissipation_integral:.6g}",
        "保存モエティの相対ドリフト:",
    ]
    lines.extend(f"  {label:<20}: {drift:.3e}" for label, drift in report.moiety_drift.items())
    if not report.moiety_drift:
        lines.append("  （保存モエティなし）")
    lines.append(
        f"濃度下界: {bound.value:.6g} (t={bound.time:.6g}, コンパートメント={bound.compartment}, "
        f"種={bound.species_name})"
    )
    return "\n".join(lines)


def lyapunov_to_dict(report: LyapunovReport) -> dict[str, Any]:
    return {
        "max_increase": report.max_increase,
        "total_decrease": report.total_decrease,
        "dissipation_integral": report.dissipation_integral,
        "slack": report.slack,
        "violated": report.violated,
    }


def report_to_dict(report: ConsensusReport) -> dict[str, Any]:
    """ConsensusReport をJSON化可能な辞書に変換する（軌道は含めない）。"""
    bound = report.persistency
    return {
        "status": report.status.value,
        "final_time": report.final_time,
        "final_disagreement": report.final_disagreement,
        "membership_residual": report.membership_residual,
        "predicted_limit": [float(v) for v in report.predicted_limit],
        "simulated_limit": [float(v) for v in report.simulated_limit],
        "prediction_error": report.prediction_error,
        "alpha": report.alpha,
        "lyapunov": lyapunov_to_dict(report.lyapunov),
        "moiety_drift": dict(report.moiety_drift),
        "persistency": {
            "value": bound.value,
            "time": bound.time,
            "compartment": bound.compartment,
            "species": bound.species_name,
        },
        "n_accepted": report.trajectory.n_accepted,
        "n_rejected": report.trajectory.n_rejected,
    }
