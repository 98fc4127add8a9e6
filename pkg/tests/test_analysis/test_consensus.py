"""空間コンセンサス検証の結合テスト。"""

import numpy as np
import pytest

from src.analysis.consensus import ConsensusReport, verify_consensus
from src.compartmental.system import CompartmentalSystem, assemble
from src.crn.equilibrium import balance, compute_limit_point, equilibria_set
from src.crn.network import BalancedForm, ReactionNetwork
from src.errors import NotConvergedError
from src.mesh.complex import SimplicialComplex
from src.simulation.config import IntegratorConfig
from src.simulation.monitors import ConvergenceStatus


def assert_consensus(report: ConsensusReport) -> None:
    """コンセンサス到達時の各指標がしきい値内であること。"""
    assert report.status is ConvergenceStatus.CONSENSUS
    assert report.final_disagreement < 1e-6
    assert report.membership_residual < 1e-6
    assert report.prediction_error < 1e-5
    assert all(drift < 1e-8 for drift in report.moiety_drift.values())
    assert not report.lyapunov.violated
    energy = report.trajectory.energy
    assert report.lyapunov.total_decrease == pytest.approx(energy[0] - energy[-1], abs=1e-10)


@pytest.mark.integration
class TestVerifyConsensus:
    """verify_consensus のテスト。"""

    def test_single_run(
        self, ab_system: CompartmentalSystem, fast_config: IntegratorConfig, rng: np.random.Generator
    ) -> None:
        """ランダム初期状態から予測極限へのコンセンサスに到達すること。"""
        X0 = rng.uniform(0.1, 10.0, 8)
        report = verify_consensus(ab_system, X0, fast_config)
        assert_consensus(report)
        assert report.lyapunov.total_decrease > 0
        assert report.lyapunov.dissipation_integral > 0
        assert report.trajectory.termination_reason == "steady"
        assert set(report.moiety_drift) == {"(1,1)"}

    def test_limit_on_equilibrium_set(
        self, ab_system: CompartmentalSystem, fast_config: IntegratorConfig, rng: np.random.Generator
    ) -> None:
        """極限が b/a = 2 を満たし、双対体積加重総量を保存すること。"""
        X0 = rng.uniform(0.1, 10.0, 8)
        report = verify_consensus(ab_system, X0, fast_config)
        a, b = report.simulated_limit
        assert b / a == pytest.approx(2.0, rel=1e-6)
        blocks = ab_system.layout.to_blocks(X0)
        x_hat = ab_system.ops.star0 @ blocks / np.sum(ab_system.ops.star0)
        assert a + b == pytest.approx(float(np.sum(x_hat)), rel=1e-8)

    def test_dimerization(
        self,
        dimer_network: ReactionNetwork,
        rhombus_mesh: SimplicialComplex,
        fast_config: IntegratorConfig,
        rng: np.random.Generator,
    ) -> None:
        """2A⇌B でもコンセンサスに到達し、モエティ (1,2) を保存すること。"""
        system = assemble(dimer_network, balance(dimer_network), rhombus_mesh)
        report = verify_consensus(system, rng.uniform(0.5, 5.0, 8), fast_config)
        assert_consensus(report)
        assert set(report.moiety_drift) == {"(1,2)"}

    def test_zero_diffusion_not_converged(
        self,
        ab_network: ReactionNetwork,
        ab_balanced: BalancedForm,
        rhombus_mesh: SimplicialComplex,
        fast_config: IntegratorConfig,
    ) -> None:
        """拡散0では NONUNIFORM_STEADY で NotConvergedError になり、各ブロックが自身の極限に留まること。"""
        system = assemble(ab_network, ab_balanced, rhombus_mesh, diffusion=[0.0, 0.0])
        blocks = np.array([[2.0, 2.0], [1.0, 1.0], [3.0, 0.5], [0.2, 0.4]])
        with pytest.raises(NotConvergedError) as exc_info:
            verify_consensus(system, blocks.reshape(-1), fast_config)
        assert exc_info.value.status is ConvergenceStatus.NONUNIFORM_STEADY
        report = exc_info.value.report
        assert report is not None
        assert report.alpha == 0.0
        eq = equilibria_set(ab_network, ab_balanced.x_star)
        final = report.trajectory.blocks(-1)
        for j, x0 in enumerate(blocks):
            np.testing.assert_allclose(final[j], compute_limit_point(x0, eq), atol=1e-6)

    def test_truncated_run_not_converged(
        self, ab_system: CompartmentalSystem, rng: np.random.Generator
    ) -> None:
        """t_end が短すぎれば RUNNING で NotConvergedError になること。"""
        with pytest.raises(NotConvergedError) as exc_info:
            verify_consensus(ab_system, rng.uniform(0.1, 10.0, 8), IntegratorConfig(t_end=0.1))
        assert exc_info.value.status is ConvergenceStatus.RUNNING

    @pytest.mark.slow
    def test_random_initial_states(
        self, ab_system: CompartmentalSystem, fast_config: IntegratorConfig, rng: np.random.Generator
    ) -> None:
        """20個のランダム初期状態すべてでコンセンサスに到達すること。"""
        for _ in range(20):
            assert_consensus(verify_consensus(ab_system, rng.uniform(0.1, 10.0, 8), fast_config))

    @pytest.mark.slow
    def test_default_config_random_initial_states(
        self, ab_system: CompartmentalSystem, rng: np.random.Generator
    ) -> None:
        """既定の積分設定のまま20個のランダム初期状態すべてでコンセンサスに到達すること。"""
        for _ in range(20):
            report = verify_consensus(ab_system, rng.uniform(0.1, 10.0, 8), IntegratorConfig())
            assert_consensus(report)
            assert report.trajectory.termination_reason == "steady"

    @pytest.mark.slow
    def test_integrator_independent_limit(
        self, ab_system: CompartmentalSystem, rng: np.random.Generator
    ) -> None:
        """rk45 と semi-implicit で同じ極限に到達すること。"""
        X0 = rng.uniform(0.1, 10.0, 8)
        explicit = verify_consensus(ab_system, X0, IntegratorConfig(rtol=1e-8, atol=1e-10))
        implicit = verify_consensus(
            ab_system, X0, IntegratorConfig(method="semi-implicit", rtol=1e-7, atol=1e-9, h_max=0.25)
        )
        np.testing.assert_allclose(implicit.simulated_limit, explicit.simulated_limit, atol=1e-5)
        np.testing.assert_allclose(implicit.predicted_limit, explicit.predicted_limit, rtol=1e-12)
