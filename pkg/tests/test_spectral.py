"""Dense frequency bases, spectral proxies and cutoff estimation."""

import math

import numpy as np
import pytest
from conftest import (dense_reduced_sigma, random_weighted_graph,
                      spectral_reduced_sigma, strongly_connected_digraph)

import graphsampling as gs
from graphsampling.spectral import SolverConfig

STRICT = SolverConfig(tol=1e-10, maxiter_factor=2000, max_iterations=100000,
                      stagnation_window=5000, dense_fallback=3)


class TestDenseGft:
    def test_two_node_by_hand(self, two_node):
        op = gs.build_variation_operator(two_node, "combinatorial")
        basis = gs.dense_gft(op)
        assert np.allclose(basis.eigenvalues, [0.0, 2.0], atol=1e-12)
        s = 1 / math.sqrt(2)
        assert np.allclose(np.abs(basis.vectors), [[s, s], [s, s]],
                           atol=1e-12)
        assert basis.orthonormal

    def test_sym_normalized_range(self, er30):
        op = gs.build_variation_operator(er30, "sym_normalized")
        basis = gs.dense_gft(op)
        assert abs(basis.eigenvalues[0]) <= 1e-10
        assert basis.eigenvalues[-1] <= 2.0 + 1e-10

    def test_random_walk_matches_sym_normalized_eigenvalues(self):
        g = gs.erdos_renyi(20, 0.3, seed=2)
        rw = gs.dense_gft(gs.build_variation_operator(
            g, "random_walk_undirected"))
        sym = gs.dense_gft(gs.build_variation_operator(g, "sym_normalized"))
        assert np.allclose(np.sort(np.abs(rw.eigenvalues)),
                           np.sort(np.abs(sym.eigenvalues)), atol=1e-8)
        assert not rw.orthonormal

    def test_eigenpair_residuals(self):
        g = random_weighted_graph(25, 0.2, seed=3)
        for kind in ("combinatorial", "hub_authority"):
            op = gs.build_variation_operator(g, kind)
            basis = gs.dense_gft(op)
            dense = op.to_dense()
            for i in range(op.n):
                u = basis.vectors[:, i]
                lam = basis.eigenvalues[i]
                assert np.linalg.norm(dense @ u - lam * u) <= \
                    1e-8 * np.linalg.norm(u) * max(1.0, abs(lam))
            U = basis.vectors
            assert np.abs(U.T @ U - np.eye(op.n)).max() <= 1e-8

    def test_cap_refusal(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        with pytest.raises(ValueError):
            gs.dense_gft(op, cap=10)


class TestBandwidth:
    def test_constant_is_dc(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        basis = gs.dense_gft(op)
        assert gs.bandwidth(np.ones(30), basis) == 0.0

    def test_top_eigenvector(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        basis = gs.dense_gft(op)
        f = basis.vectors[:, -1]
        assert abs(gs.bandwidth(f, basis) -
                   abs(basis.eigenvalues[-1])) <= 1e-10

    def test_two_component_signal_on_path(self):
        g = gs.Graph(5, [(i, i + 1, 1.0) for i in range(4)])
        basis = gs.dense_gft(gs.build_variation_operator(g, "combinatorial"))
        f = basis.vectors[:, 0] + basis.vectors[:, 2]
        assert abs(gs.bandwidth(f, basis) -
                   abs(basis.eigenvalues[2])) <= 1e-10

    def test_zero_signal_rejected(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        basis = gs.dense_gft(op)
        with pytest.raises(ValueError):
            gs.bandwidth(np.zeros(30), basis)


class TestSpectralProxy:
    def test_constant_is_zero(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        for k in (1, 2, 8):
            assert gs.spectral_proxy(op, np.ones(30), k) <= 1e-12

    def test_eigenvector_any_order(self, two_node):
        op = gs.build_variation_operator(two_node, "combinatorial")
        for k in (1, 2, 5):
            assert abs(gs.spectral_proxy(op, np.array([1.0, -1.0]), k)
                       - 2.0) <= 1e-12

    def test_impulse_values_by_hand(self, two_node):
        op = gs.build_variation_operator(two_node, "combinatorial")
        f = np.array([1.0, 0.0])
        assert abs(gs.spectral_proxy(op, f, 1) - math.sqrt(2)) <= 1e-12
        assert abs(gs.spectral_proxy(op, f, 2) -
                   (2 * math.sqrt(2)) ** 0.5) <= 1e-12

    def test_eigenvector_fixed_points(self):
        g = random_weighted_graph(20, 0.25, seed=4)
        op = gs.build_variation_operator(g, "combinatorial")
        basis = gs.dense_gft(op)
        for i in (0, 5, 12, 19):
            lam = abs(basis.eigenvalues[i])
            for k in (1, 2, 4, 8):
                w = gs.spectral_proxy(op, basis.vectors[:, i], k)
                assert abs(w - lam) <= 1e-8 * max(lam, 1.0)

    def test_scale_invariance(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        rng = np.random.default_rng(5)
        f = rng.standard_normal(30)
        base = gs.spectral_proxy(op, f, 3)
        # powers of two rescale exactly; other factors to float accuracy
        assert gs.spectral_proxy(op, 0.5 * f, 3) == base
        for c in (-3.0, 10.0):
            assert abs(gs.spectral_proxy(op, c * f, 3) - base) <= 1e-13 * base

    def test_monotone_in_k_and_bounded_by_bandwidth(self):
        g = random_weighted_graph(25, 0.2, seed=6)
        for kind in ("combinatorial", "sym_normalized"):
            op = gs.build_variation_operator(g, kind)
            basis = gs.dense_gft(op)
            rng = np.random.default_rng(7)
            for _ in range(20):
                f = rng.standard_normal(25)
                w2 = gs.spectral_proxy(op, f, 2)
                w4 = gs.spectral_proxy(op, f, 4)
                w8 = gs.spectral_proxy(op, f, 8)
                bw = gs.bandwidth(f, basis, tol=1e-12)
                assert w2 <= w4 + 1e-9
                assert w4 <= w8 + 1e-9
                assert w8 <= bw + 1e-8

    def test_zero_signal_rejected(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        with pytest.raises(ValueError):
            gs.spectral_proxy(op, np.zeros(30), 2)


class TestCutoffEstimate:
    def test_two_node_single_sample(self, two_node):
        op = gs.build_variation_operator(two_node, "combinatorial")
        est = gs.cutoff_estimate(op, [0], 1)
        assert abs(est.sigma - 2.0) <= 1e-10
        assert abs(est.omega - math.sqrt(2)) <= 1e-10
        assert np.allclose(np.abs(est.phi_star), [0.0, 1.0], atol=1e-12)

    def test_empty_set_gives_zero_cutoff(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        est = gs.cutoff_estimate(op, [], 1)
        assert est.omega <= 1e-6
        # smoothest unconstrained signal is the constant
        phi = est.phi_star
        assert np.ptp(phi * np.sign(phi.sum())) <= 1e-6

    def test_path3_by_hand(self, path3):
        op = gs.build_variation_operator(path3, "combinatorial")
        est = gs.cutoff_estimate(op, [0], 1)
        sigma = (8 - math.sqrt(52)) / 2
        assert abs(est.sigma - sigma) <= 1e-9
        assert abs(est.omega - sigma ** 0.5) <= 1e-9
        assert abs(est.omega - 0.62805) <= 5e-6
        assert est.phi_star[0] == 0.0

    def test_full_sampling_rejected(self, two_node):
        op = gs.build_variation_operator(two_node, "combinatorial")
        with pytest.raises(ValueError):
            gs.cutoff_estimate(op, [0, 1], 1)

    def test_invariants(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        est = gs.cutoff_estimate(op, [1, 4, 9], 2)
        assert abs(est.omega - est.sigma ** (1 / 4)) <= 1e-12 * est.omega
        assert np.all(est.phi_star[[1, 4, 9]] == 0.0)
        assert abs(np.linalg.norm(est.phi_star) - 1.0) <= 1e-12

    def test_matches_dense_oracle_small(self):
        # iterative path (complement > dense_fallback) vs dense eigensolve
        for seed, k in [(0, 1), (1, 2), (2, 3)]:
            g = random_weighted_graph(45, 0.15, seed=seed)
            op = gs.build_variation_operator(g, "combinatorial")
            rng = np.random.default_rng(seed)
            sampled = sorted(rng.choice(45, 8, replace=False).tolist())
            est = gs.cutoff_estimate(op, sampled, k, STRICT)
            ref = dense_reduced_sigma(op, sampled, k)
            assert abs(est.sigma - ref) <= 1e-6 * ref

    def test_asymmetric_kind_supported(self):
        g = strongly_connected_digraph(20, 0.15, seed=8)
        op = gs.build_variation_operator(g, "adjacency_based")
        est = gs.cutoff_estimate(op, [0, 5], 1)
        ref = dense_reduced_sigma(op, [0, 5], 1)
        assert abs(est.sigma - ref) <= 1e-6 * max(ref, 1e-12)

    def test_ordering_chain_in_k(self):
        g = random_weighted_graph(35, 0.18, seed=9)
        op = gs.build_variation_operator(g, "combinatorial")
        rng = np.random.default_rng(10)
        for _ in range(5):
            sampled = sorted(rng.choice(35, 6, replace=False).tolist())
            omegas = [gs.cutoff_estimate(op, sampled, k, STRICT).omega
                      for k in (1, 2, 3)]
            assert omegas[0] <= omegas[1] + 1e-9
            assert omegas[1] <= omegas[2] + 1e-9

    def test_deterministic(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        a = gs.cutoff_estimate(op, [2, 7], 2)
        b = gs.cutoff_estimate(op, [2, 7], 2)
        assert a.sigma == b.sigma
        assert np.array_equal(a.phi_star, b.phi_star)

    def test_warm_start_converges_to_same_answer(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        cold = gs.cutoff_estimate(op, [2, 7], 2)
        rng = np.random.default_rng(11)
        warm = gs.cutoff_estimate(
            op, [2, 7], 2,
            SolverConfig(start=rng.standard_normal(30)))
        assert abs(cold.sigma - warm.sigma) <= 1e-7 * max(cold.sigma, 1e-12)

    def test_high_k_dense_fallback_accuracy(self):
        g = gs.erdos_renyi(20, 0.3, seed=4)
        op = gs.build_variation_operator(g, "combinatorial")
        for k in (3, 8):
            est = gs.cutoff_estimate(op, [0, 3, 7], k)
            ref = spectral_reduced_sigma(op, [0, 3, 7], k)
            assert abs(est.sigma - ref) <= 1e-5 * ref

    def test_json_fields(self, two_node):
        import json
        op = gs.build_variation_operator(two_node, "combinatorial")
        est = gs.cutoff_estimate(op, [0], 1)
        data = json.loads(est.to_json())
        assert set(data) == {"omega", "sigma", "k", "iterations", "residual"}


class TestCosThetaMax:
    def test_two_node_single_row(self, two_node):
        op = gs.build_variation_operator(two_node, "combinatorial")
        basis = gs.dense_gft(op)
        val = gs.cos_theta_max(basis, [0], 1)
        assert abs(val - 1 / math.sqrt(2)) <= 1e-12

    def test_full_sampling_is_one(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        basis = gs.dense_gft(op)
        for r in (1, 5, 30):
            assert abs(gs.cos_theta_max(basis, range(30), r) - 1.0) <= 1e-10

    def test_underdetermined_is_zero(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        basis = gs.dense_gft(op)
        assert gs.cos_theta_max(basis, [0, 1], 5) == 0.0

    def test_requires_orthonormal_and_valid_args(self, er30):
        op = gs.build_variation_operator(er30, "random_walk_undirected")
        basis = gs.dense_gft(op)
        with pytest.raises(ValueError):
            gs.cos_theta_max(basis, [0], 1)
        sym = gs.dense_gft(gs.build_variation_operator(er30, "combinatorial"))
        with pytest.raises(ValueError):
            gs.cos_theta_max(sym, [], 1)
        with pytest.raises(ValueError):
            gs.cos_theta_max(sym, [0], 31)
