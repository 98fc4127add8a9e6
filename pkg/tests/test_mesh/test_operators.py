"""離散作用素と拡散ラプラシアンの単体テスト。"""

from dataclasses import replace

import numpy as np
import pytest
import scipy.sparse

from src.errors import DimensionMismatchError
from src.mesh.complex import SimplicialComplex, build_complex, connected_components
from src.mesh.dual import circumcentric_dual
from src.mesh.generators import equilateral_strip, interval
from src.mesh.operators import (
    build_operators,
    diffusion_resistance,
    exterior_derivative_0,
    hodge_star_0,
    hodge_star_1,
    laplacian,
    laplacian_factors,
    trace_operator,
    with_edge_orientation,
)


@pytest.mark.unit
class TestHodgeStars:
    """hodge_star_0 / hodge_star_1 のテスト。"""

    def test_interval(self, line_mesh: SimplicialComplex) -> None:
        """区間 0, 1, 2 で ⋆₀ = diag(0.5, 1, 0.5)、⋆₁ = 1/h になること。"""
        dual = circumcentric_dual(line_mesh)
        np.testing.assert_allclose(hodge_star_0(line_mesh, dual), [0.5, 1.0, 0.5])
        np.testing.assert_allclose(hodge_star_1(line_mesh, dual), [1.0, 1.0])

    def test_interval_spacing(self) -> None:
        """間隔 h の区間で ⋆₁ の全成分が 1/h になること。"""
        K = interval(5, length=2.0)
        ops = build_operators(K)
        np.testing.assert_allclose(ops.star1, np.full(4, 2.0))

    def test_rhombus_shared_edge(self, rhombus_mesh: SimplicialComplex) -> None:
        """菱形の共有辺で ⋆₁ = 1/√3 になること。"""
        ops = build_operators(rhombus_mesh)
        assert ops.star1[2] == pytest.approx(1.0 / np.sqrt(3.0), rel=1e-13)
        assert np.all(ops.star0 > 0)

    def test_scaling_homogeneity(self) -> None:
        """座標を λ 倍すると ⋆₀ が λ² 倍、⋆₁ は不変になること。"""
        base = equilateral_strip(2, 2)
        scaled = build_complex(3.0 * base.vertices, base.cells)
        a, b = build_operators(base), build_operators(scaled)
        np.testing.assert_allclose(b.star0, 9.0 * a.star0, rtol=1e-12)
        np.testing.assert_allclose(b.star1, a.star1, rtol=1e-12)

    def test_diagonals_read_only(self, rhombus_mesh: SimplicialComplex) -> None:
        """build_operators の ⋆₀, ⋆₁ が書き換え不可であること。"""
        ops = build_operators(rhombus_mesh)
        with pytest.raises(ValueError):
            ops.star0[0] = 1.0
        with pytest.raises(ValueError):
            ops.star1[0] = 1.0

    def test_rigid_motion_invariance(self, rhombus_mesh: SimplicialComplex) -> None:
        """回転・平行移動で ⋆₀, ⋆₁ が変わらないこと。"""
        angle = 0.7
        rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        moved = build_complex(rhombus_mesh.vertices @ rotation.T + [3.0, -1.0], rhombus_mesh.cells)
        a, b = build_operators(rhombus_mesh), build_operators(moved)
        np.testing.assert_allclose(b.star0, a.star0, rtol=1e-12)
        np.testing.assert_allclose(b.star1, a.star1, rtol=1e-12)


@pytest.mark.unit
class TestExteriorDerivativeAndTrace:
    """exterior_derivative_0 / trace_operator のテスト。"""

    def test_differences(self, line_mesh: SimplicialComplex) -> None:
        """u = (0, 1, 3) で d·u = (1, 2) になること。"""
        d = exterior_derivative_0(line_mesh)
        np.testing.assert_array_equal(d @ np.array([0.0, 1.0, 3.0]), [1.0, 2.0])

    def test_constant_in_kernel(self, rhombus_mesh: SimplicialComplex) -> None:
        """定数ベクトルは d の核に入ること。"""
        d = exterior_derivative_0(rhombus_mesh)
        np.testing.assert_array_equal(d @ np.ones(4), np.zeros(5))

    def test_trace_restricts_to_boundary(self, line_mesh: SimplicialComplex) -> None:
        """tr·(a, b, c) = (a, c)、tr·1 = 1 になること。"""
        tr = trace_operator(line_mesh)
        np.testing.assert_array_equal(tr @ np.array([4.0, 5.0, 6.0]), [4.0, 6.0])
        np.testing.assert_array_equal(tr @ np.ones(3), np.ones(2))

    def test_closed_mesh_trace_is_empty(self) -> None:
        """境界の無いメッシュでは tr が0行になること。"""
        K = build_complex([0.0, 1.0, 2.0], [[0, 1], [1, 2], [2, 0]])
        assert trace_operator(K).shape == (0, 3)


@pytest.mark.unit
class TestLaplacian:
    """laplacian のテスト。"""

    def test_one_dimensional_stencil(self, line_mesh: SimplicialComplex) -> None:
        """間隔1の区間で Δ が標準の2階差分になること。"""
        ops = build_operators(line_mesh)
        lap = laplacian(line_mesh, ops, np.ones(2), n_species=1).toarray()
        np.testing.assert_allclose(lap, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
        scaled = lap / ops.star0[:, np.newaxis]
        np.testing.assert_allclose(scaled[1], [-1, 2, -1])

    def test_uniform_states_in_kernel(self, rhombus_mesh: SimplicialComplex, rng: np.random.Generator) -> None:
        """Δ·(1_N ⊗ v) = 0 となること。"""
        ops = build_operators(rhombus_mesh)
        R_d = rng.uniform(0.5, 2.0, 3 * rhombus_mesh.n_edges)
        lap = laplacian(rhombus_mesh, ops, R_d, n_species=3)
        v = rng.uniform(0.1, 5.0, 3)
        np.testing.assert_allclose(lap @ np.tile(v, 4), np.zeros(12), atol=1e-13)

    def test_symmetric_positive_semidefinite(self, rhombus_mesh: SimplicialComplex, rng: np.random.Generator) -> None:
        """Δ が厳密に対称で xᵀΔx ≥ 0 となること。"""
        ops = build_operators(rhombus_mesh)
        lap = laplacian(rhombus_mesh, ops, rng.uniform(0.1, 3.0, 2 * 5), n_species=2)
        dense = lap.toarray()
        np.testing.assert_array_equal(dense, dense.T)
        samples = rng.normal(size=(10_000, 8))
        quadratic = np.einsum("ij,jk,ik->i", samples, dense, samples)
        assert np.all(quadratic >= -1e-12)

    def test_rhombus_spectrum(self, rhombus_mesh: SimplicialComplex) -> None:
        """菱形メッシュで最小固有値0の重複度が m になること。"""
        ops = build_operators(rhombus_mesh)
        eigenvalues = np.linalg.eigvalsh(laplacian(rhombus_mesh, ops, np.ones(10), n_species=2).toarray())
        assert np.all(eigenvalues >= -1e-12)
        assert int(np.sum(np.abs(eigenvalues) < 1e-10)) == 2

    @pytest.mark.parametrize(
        ("vertices", "cells"),
        [
            ([0.0, 1.0, 2.0, 5.0, 6.0], [[0, 1], [1, 2], [3, 4]]),
            (
                [[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2], [3.0, 0.0], [4.0, 0.0], [3.5, np.sqrt(3.0) / 2]],
                [[0, 1, 2], [3, 4, 5]],
            ),
        ],
    )
    def test_kernel_dimension_per_component(self, vertices: list, cells: list[list[int]]) -> None:
        """非連結メッシュで dim ker Δ_d = m × 連結成分数 になること。"""
        K = build_complex(vertices, cells)
        n_components, _ = connected_components(K)
        assert n_components == 2
        ops = build_operators(K)
        eigenvalues = np.linalg.eigvalsh(laplacian(K, ops, np.ones(2 * K.n_edges), n_species=2).toarray())
        assert int(np.sum(np.abs(eigenvalues) < 1e-10 * eigenvalues.max())) == 2 * n_components

    def test_factors_reproduce_laplacian(self, rhombus_mesh: SimplicialComplex, rng: np.random.Generator) -> None:
        """Gᵀ diag(w) G が Δ_d と一致し、G が一様状態を厳密に0へ写すこと。"""
        ops = build_operators(rhombus_mesh)
        R_d = rng.uniform(0.5, 2.0, 2 * rhombus_mesh.n_edges)
        gradient, weights = laplacian_factors(rhombus_mesh, ops, R_d, n_species=2)
        assert gradient.shape == (10, 8)
        factored = (gradient.T @ scipy.sparse.diags(weights) @ gradient).toarray()
        np.testing.assert_allclose(factored, laplacian(rhombus_mesh, ops, R_d, n_species=2).toarray(), rtol=1e-15)
        np.testing.assert_array_equal(gradient @ np.tile([0.3, 7.0], 4), np.zeros(10))

    def test_orientation_independent(self, rhombus_mesh: SimplicialComplex) -> None:
        """辺の向きを反転しても Δ が変わらないこと。"""
        ops = build_operators(rhombus_mesh)
        flipped = replace(ops, d=with_edge_orientation(ops.d, [True, False, True, False, True]))
        a = laplacian(rhombus_mesh, ops, np.ones(5), n_species=1).toarray()
        b = laplacian(rhombus_mesh, flipped, np.ones(5), n_species=1).toarray()
        np.testing.assert_allclose(a, b)

    def test_resistance_length_mismatch(self, rhombus_mesh: SimplicialComplex) -> None:
        """R_d の長さが m·N_e でなければ DimensionMismatchError になること。"""
        ops = build_operators(rhombus_mesh)
        with pytest.raises(DimensionMismatchError):
            laplacian(rhombus_mesh, ops, np.ones(7), n_species=2)

    def test_edge_table_shape_checked(self) -> None:
        """辺ごとの拡散係数表の形状が違えば DimensionMismatchError になること。"""
        with pytest.raises(DimensionMismatchError):
            diffusion_resistance([1.0, 1.0], 5, np.ones((4, 2)))

    def test_resistance_is_edge_major(self) -> None:
        """R_d が辺ごとに m 成分連続で並ぶこと。"""
        np.testing.assert_array_equal(diffusion_resistance([1.0, 2.0], 3), [1.0, 2.0, 1.0, 2.0, 1.0, 2.0])

    @pytest.mark.parametrize("n_species", [1, 2])
    def test_second_order_convergence(self, n_species: int) -> None:
        """区間 [0, 1] で ⋆₀⁻¹Δ sin(πs) の誤差が細分ごとに 1/3.5 以下になること。"""
        errors = []
        for n_v in (17, 33, 65):
            K = interval(n_v)
            ops = build_operators(K)
            lap = laplacian(K, ops, np.ones(n_species * K.n_edges), n_species=n_species)
            s = K.vertices[:, 0]
            u = np.repeat(np.sin(np.pi * s), n_species)
            approx = (lap @ u) / np.repeat(ops.star0, n_species)
            exact = np.pi**2 * u
            interior = np.repeat((s > 0) & (s < 1), n_species)
            errors.append(float(np.max(np.abs(approx - exact)[interior])))
        assert errors[0] / errors[1] >= 3.5
        assert errors[1] / errors[2] >= 3.5
