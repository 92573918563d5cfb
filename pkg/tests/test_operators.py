"""Variation operators: construction, matvec kernels, spectral subroutines
and the quadratic-form identities each kind must satisfy."""

import numpy as np
import pytest
from conftest import random_weighted_graph, strongly_connected_digraph

import graphsampling as gs
from graphsampling.errors import NumericError

ALL_KINDS = gs.OPERATOR_KINDS
UNDIRECTED_KINDS = ("combinatorial", "sym_normalized",
                    "random_walk_undirected", "adjacency_based",
                    "hub_authority", "random_walk_directed")
DIRECTED_KINDS = ("adjacency_based", "hub_authority", "random_walk_directed")


def _operators_for(g):
    kinds = UNDIRECTED_KINDS if not g.directed else DIRECTED_KINDS
    return [gs.build_variation_operator(g, kind) for kind in kinds]


class TestBuild:
    def test_combinatorial_two_node(self, two_node):
        op = gs.build_variation_operator(two_node, "combinatorial")
        assert np.allclose(op.to_dense(), [[1, -1], [-1, 1]])

    def test_adjacency_two_node(self, two_node):
        op = gs.build_variation_operator(two_node, "adjacency_based")
        assert abs(op._aux["mu_max"] - 1.0) < 1e-8
        assert np.allclose(op.to_dense(), [[1, -1], [-1, 1]], atol=1e-8)

    def test_random_walk_directed_reduces_to_sym_normalized(self):
        g = gs.erdos_renyi(15, 0.4, seed=3)
        rwd = gs.build_variation_operator(g, "random_walk_directed")
        sym = gs.build_variation_operator(g, "sym_normalized")
        assert np.allclose(rwd.to_dense(), sym.to_dense(), atol=1e-8)

    def test_gamma_validation(self, two_node):
        with pytest.raises(ValueError):
            gs.build_variation_operator(two_node, "hub_authority", gamma=1.5)

    def test_directed_graph_rejected_for_undirected_kinds(self):
        g = gs.Graph(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)],
                     directed=True)
        with pytest.raises(ValueError):
            gs.build_variation_operator(g, "combinatorial")

    def test_random_walk_directed_needs_scc(self):
        g = gs.Graph(3, [(0, 1, 1.0), (1, 2, 1.0)], directed=True)
        with pytest.raises(ValueError):
            gs.build_variation_operator(g, "random_walk_directed")

    def test_unknown_kind(self, two_node):
        with pytest.raises(ValueError):
            gs.build_variation_operator(two_node, "graph_fourier")

    def test_zero_degree_rows_use_pseudoinverse(self):
        g = gs.Graph(3, [(0, 1, 1.0)])  # node 2 isolated
        op = gs.build_variation_operator(g, "sym_normalized")
        dense = op.to_dense()
        assert np.all(np.isfinite(dense))
        x = np.array([0.0, 0.0, 1.0])
        assert np.allclose(op.apply(x), x)  # identity on the isolated node


class TestApply:
    def test_constant_in_laplacian_nullspace(self, er30):
        op = gs.build_variation_operator(er30, "combinatorial")
        assert np.allclose(op.apply(np.ones(30)), 0.0, atol=1e-12)

    def test_two_node_column(self, two_node):
        op = gs.build_variation_operator(two_node, "combinatorial")
        assert np.allclose(op.apply(np.array([1.0, 0.0])), [1.0, -1.0])

    def test_dimension_mismatch(self, two_node):
        op = gs.build_variation_operator(two_node, "combinatorial")
        with pytest.raises(ValueError):
            op.apply(np.ones(3))

    @pytest.mark.parametrize("directed", [False, True])
    def test_matches_dense_on_random_graphs(self, directed):
        if directed:
            g = strongly_connected_digraph(50, 0.08, seed=5)
        else:
            g = random_weighted_graph(50, 0.12, seed=5)
        rng = np.random.default_rng(0)
        for op in _operators_for(g):
            dense = op.to_dense()
            for _ in range(3):
                x = rng.standard_normal(g.n_nodes)
                ref = dense @ x
                scale = np.linalg.norm(ref) + 1e-300
                assert np.linalg.norm(op.apply(x) - ref) <= 1e-12 * max(
                    scale, np.linalg.norm(x))
                refT = dense.T @ x
                assert np.linalg.norm(op.apply_adjoint(x) - refT) <= \
                    1e-12 * max(np.linalg.norm(refT), np.linalg.norm(x))

    def test_adjoint_consistency_probes(self):
        g = strongly_connected_digraph(40, 0.1, seed=7)
        rng = np.random.default_rng(1)
        for op in _operators_for(g):
            for _ in range(5):
                x = rng.standard_normal(40)
                y = rng.standard_normal(40)
                lhs = float(op.apply(x) @ y)
                rhs = float(x @ op.apply_adjoint(y))
                scale = max(abs(lhs), abs(rhs), 1e-30)
                assert abs(lhs - rhs) <= 1e-12 * max(
                    scale, np.linalg.norm(x) * np.linalg.norm(y))

    def test_symmetric_kinds_are_psd(self):
        g = strongly_connected_digraph(30, 0.12, seed=9)
        rng = np.random.default_rng(2)
        for kind in ("hub_authority", "random_walk_directed"):
            op = gs.build_variation_operator(g, kind)
            assert op.symmetric
            for _ in range(10):
                x = rng.standard_normal(30)
                quad = float(x @ op.apply(x))
                assert quad >= -1e-10 * (x @ x)


class TestQuadraticForms:
    def test_combinatorial_identity(self):
        g = random_weighted_graph(40, 0.15, seed=11)
        op = gs.build_variation_operator(g, "combinatorial")
        src, dst, wgt = g.edges()
        rng = np.random.default_rng(3)
        for _ in range(10):
            x = rng.standard_normal(40)
            quad = float(x @ op.apply(x))
            direct = float(np.sum(wgt * (x[src] - x[dst]) ** 2))
            assert abs(quad - direct) <= 1e-10 * max(abs(direct), 1.0)

    def test_sym_normalized_identity(self):
        g = random_weighted_graph(40, 0.15, seed=12)
        op = gs.build_variation_operator(g, "sym_normalized")
        src, dst, wgt = g.edges()
        d = g.degrees
        rng = np.random.default_rng(4)
        for _ in range(10):
            x = rng.standard_normal(40)
            quad = float(x @ op.apply(x))
            direct = float(np.sum(
                wgt * (x[src] / np.sqrt(d[src]) - x[dst] / np.sqrt(d[dst]))
                ** 2))
            assert abs(quad - direct) <= 1e-10 * max(abs(direct), 1.0)

    def test_random_walk_directed_identity(self):
        g = strongly_connected_digraph(30, 0.1, seed=13)
        op = gs.build_variation_operator(g, "random_walk_directed")
        pi = gs.stationary_distribution(g)
        W = g.W.toarray()
        P = W / W.sum(axis=1, keepdims=True)
        rng = np.random.default_rng(5)
        for _ in range(10):
            x = rng.standard_normal(30)
            quad = float(x @ op.apply(x))
            xi = x / np.sqrt(pi)
            direct = 0.5 * float(np.sum(
                pi[:, None] * P * (xi[:, None] - xi[None, :]) ** 2))
            assert abs(quad - direct) <= 1e-10 * max(abs(direct), 1.0)

    def test_hub_authority_symmetric_psd_all_gammas(self):
        g = strongly_connected_digraph(25, 0.12, seed=14)
        for gamma in (0.0, 0.5, 1.0):
            op = gs.build_variation_operator(g, "hub_authority", gamma=gamma)
            dense = op.to_dense()
            assert np.allclose(dense, dense.T, atol=1e-12)
            assert np.linalg.eigvalsh(dense).min() >= -1e-10

    def test_colinkage_row_sums_equal_in_degrees(self):
        # the authority co-linkage built from T must satisfy sum_j c_ij = p_i
        g = strongly_connected_digraph(25, 0.15, seed=15)
        p = g.in_degrees
        q = g.out_degrees
        W = g.W.toarray()
        T = np.diag(1 / np.sqrt(q)) @ W @ np.diag(1 / np.sqrt(p))
        C = np.sqrt(p)[:, None] * (T.T @ T) * np.sqrt(p)[None, :]
        assert np.allclose(C.sum(axis=1), p, rtol=1e-10)

    def test_adjacency_eigenvalues_have_nonneg_real_part(self):
        g = strongly_connected_digraph(25, 0.12, seed=16)
        op = gs.build_variation_operator(g, "adjacency_based")
        vals = np.linalg.eigvals(op.to_dense())
        assert vals.real.min() >= -1e-10


class TestStationaryDistribution:
    def test_directed_cycle_uniform(self):
        g = gs.Graph(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)],
                     directed=True)
        assert np.allclose(gs.stationary_distribution(g), 1 / 3, atol=1e-10)

    def test_star_degree_proportional(self):
        g = gs.Graph(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])
        pi = gs.stationary_distribution(g)
        assert np.allclose(pi, [0.5, 1 / 6, 1 / 6, 1 / 6], atol=1e-10)

    def test_matches_dense_eigenvector(self):
        g = strongly_connected_digraph(20, 0.15, seed=21)
        pi = gs.stationary_distribution(g)
        W = g.W.toarray()
        P = W / W.sum(axis=1, keepdims=True)
        vals, vecs = np.linalg.eig(P.T)
        lead = np.argmin(np.abs(vals - 1.0))
        ref = np.abs(vecs[:, lead].real)
        ref /= ref.sum()
        assert np.abs(pi - ref).sum() <= 1e-8

    def test_invariants(self):
        g = strongly_connected_digraph(20, 0.15, seed=22)
        pi = gs.stationary_distribution(g)
        assert np.all(pi > 0)
        assert abs(pi.sum() - 1.0) <= 1e-10
        W = g.W.toarray()
        P = W / W.sum(axis=1, keepdims=True)
        assert np.abs(pi @ P - pi).sum() <= 1e-8

    def test_requires_strong_connectivity(self):
        g = gs.Graph(3, [(0, 1, 1.0), (1, 2, 1.0)], directed=True)
        with pytest.raises(ValueError):
            gs.stationary_distribution(g)


class TestMaxMagnitudeEigenvalue:
    def test_complete_graph(self):
        g = gs.erdos_renyi(8, 1.0, seed=0)
        assert abs(gs.max_magnitude_eigenvalue(g) - 7.0) <= 1e-7

    def test_single_edge_bipartite_safeguard(self, two_node):
        assert abs(gs.max_magnitude_eigenvalue(two_node) - 1.0) <= 1e-8

    def test_matches_dense_spectral_radius(self):
        g = random_weighted_graph(30, 0.2, seed=23)
        rho = np.abs(np.linalg.eigvals(g.W.toarray())).max()
        assert abs(gs.max_magnitude_eigenvalue(g) - rho) <= 1e-8 * rho

    def test_directed_random(self):
        g = strongly_connected_digraph(25, 0.15, seed=24)
        rho = np.abs(np.linalg.eigvals(g.W.toarray())).max()
        assert abs(gs.max_magnitude_eigenvalue(g) - rho) <= 1e-8 * rho

    def test_needs_an_edge(self):
        g = gs.Graph(3, [])
        with pytest.raises(ValueError):
            gs.max_magnitude_eigenvalue(g)
