"""Shared fixtures and dense oracles for the test suite."""

import numpy as np
import pytest

import graphsampling as gs


@pytest.fixture
def two_node():
    """Single undirected unit edge."""
    return gs.Graph(2, [(0, 1, 1.0)], directed=False)


@pytest.fixture
def path3():
    return gs.Graph(3, [(0, 1, 1.0), (1, 2, 1.0)], directed=False)


@pytest.fixture
def er30():
    return gs.erdos_renyi(30, 0.2, seed=1)


def random_weighted_graph(n, p, seed, directed=False):
    """ER-style graph with uniform(0.5, 2) weights."""
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(n):
        for j in range(n):
            if j <= i and not directed:
                continue
            if i == j:
                continue
            if rng.random() < p:
                edges.append((i, j, float(rng.uniform(0.5, 2.0))))
    return gs.Graph(n, edges, directed=directed)


def strongly_connected_digraph(n, extra_p, seed):
    """Directed cycle backbone plus random extra arcs: strongly connected
    by construction, deterministic per seed."""
    rng = np.random.default_rng(seed)
    edges = {(i, (i + 1) % n): 1.0 for i in range(n)}
    for i in range(n):
        for j in range(n):
            if i != j and (i, j) not in edges and rng.random() < extra_p:
                edges[(i, j)] = float(rng.uniform(0.5, 2.0))
    return gs.Graph(n, [(i, j, w) for (i, j), w in edges.items()],
                    directed=True)


def dense_reduced_sigma(op, sampled, k):
    """Oracle: smallest eigenvalue of the explicitly formed reduced matrix
    ((L')^k L^k)_{Sc}, built from a dense matrix power."""
    L = op.to_dense()
    P = np.linalg.matrix_power(L, k)
    M = P.T @ P
    mask = np.ones(op.n, dtype=bool)
    mask[list(sampled)] = False
    sc = np.nonzero(mask)[0]
    return float(np.linalg.eigvalsh(M[np.ix_(sc, sc)])[0])


def spectral_reduced_sigma(op, sampled, k):
    """Higher-accuracy oracle for symmetric operators: powers taken in the
    eigenvalue domain, smallest singular value of the restricted factor."""
    assert op.symmetric
    w, U = np.linalg.eigh(op.to_dense())
    mask = np.ones(op.n, dtype=bool)
    mask[list(sampled)] = False
    sc = np.nonzero(mask)[0]
    B = ((np.abs(w) ** k)[:, None] * U.T)[:, sc]
    sv = np.linalg.svd(B, compute_uv=False)
    return float(sv.min() ** 2)
