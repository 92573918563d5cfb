"""Sparse graph container, random-graph generators, k-NN construction,
strongly-connected-component extraction and Matrix Market IO.

The adjacency matrix is kept in CSR form so every operator in this package
can run matrix-vector products in O(|E|) without densifying. Undirected
graphs store both orientations of each edge (W is symmetric) while the
logical edge list reports each pair once.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import GraphParseError

__all__ = [
    "Graph",
    "erdos_renyi",
    "small_world",
    "barabasi_albert",
    "generate_graph",
    "knn_graph",
    "largest_scc",
    "load_graph",
    "save_graph",
    "load_features",
    "save_features",
]


class Graph:
    """Weighted graph over nodes 0..n_nodes-1 with CSR adjacency.

    ``W[i, j]`` holds the weight of edge i -> j. Weights are strictly
    positive, self-loops and duplicate (src, dst) pairs are rejected, and
    undirected graphs keep W exactly symmetric. Instances are immutable
    after construction and safe to share across threads.
    """

    def __init__(self, n_nodes, edges, directed=False):
        n_nodes = int(n_nodes)
        if n_nodes < 1:
            raise ValueError("n_nodes must be >= 1")
        edges = list(edges)
        if edges:
            src = np.asarray([e[0] for e in edges], dtype=np.int64)
            dst = np.asarray([e[1] for e in edges], dtype=np.int64)
            wgt = np.asarray([e[2] for e in edges], dtype=np.float64)
        else:
            src = np.empty(0, dtype=np.int64)
            dst = np.empty(0, dtype=np.int64)
            wgt = np.empty(0, dtype=np.float64)
        if src.size:
            if src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n_nodes:
                raise ValueError("edge endpoint out of range")
            if np.any(src == dst):
                raise ValueError("self-loops are not allowed")
            if not np.all(np.isfinite(wgt)) or np.any(wgt <= 0):
                raise ValueError("edge weights must be positive and finite")
        if not directed:
            # canonicalize each undirected pair to (min, max); a pair given in
            # both orientations must carry the same weight
            lo = np.minimum(src, dst)
            hi = np.maximum(src, dst)
            key = lo * n_nodes + hi
            order = np.argsort(key, kind="stable")
            key, lo, hi, wgt = key[order], lo[order], hi[order], wgt[order]
            if key.size:
                same = np.nonzero(key[1:] == key[:-1])[0]
                if same.size:
                    if not np.all(wgt[same] == wgt[same + 1]):
                        raise ValueError("conflicting weights for an undirected edge")
                keep = np.ones(key.size, dtype=bool)
                keep[same + 1] = False
                # more than two copies of the same pair is a duplicate
                if same.size and np.any(keep[same] == False):  # noqa: E712
                    raise ValueError("duplicate edges")
                lo, hi, wgt = lo[keep], hi[keep], wgt[keep]
            src = np.concatenate([lo, hi])
            dst = np.concatenate([hi, lo])
            wgt = np.concatenate([wgt, wgt])
        else:
            key = src * n_nodes + dst
            if key.size != np.unique(key).size:
                raise ValueError("duplicate edges")
        W = sp.coo_array((wgt, (src, dst)), shape=(n_nodes, n_nodes)).tocsr()
        if W.nnz != src.size:
            raise ValueError("duplicate edges")
        self._n = n_nodes
        self._directed = bool(directed)
        self._W = W
        self._WT = None

    @classmethod
    def from_adjacency(cls, W, directed):
        """Build from a sparse/dense adjacency matrix (validated)."""
        W = sp.csr_array(W)
        coo = W.tocoo()
        g = cls.__new__(cls)
        keep = coo.data != 0
        src, dst, wgt = coo.row[keep], coo.col[keep], coo.data[keep]
        if directed:
            return cls(W.shape[0], zip(src, dst, wgt), directed=True)
        mask = src < dst
        return cls(W.shape[0], zip(src[mask], dst[mask], wgt[mask]), directed=False)

    @property
    def n_nodes(self):
        return self._n

    @property
    def directed(self):
        return self._directed

    @property
    def W(self):
        """CSR adjacency; symmetric when the graph is undirected."""
        return self._W

    @property
    def WT(self):
        """CSR transpose of the adjacency, cached for adjoint matvecs."""
        if self._WT is None:
            self._WT = sp.csr_array(self._W.T)
        return self._WT

    @property
    def n_edges(self):
        """Number of logical edges (each undirected pair counted once)."""
        return self._W.nnz if self._directed else self._W.nnz // 2

    def edges(self):
        """Edge list as (src, dst, weight) arrays; undirected pairs appear
        once with src < dst."""
        coo = self._W.tocoo()
        src, dst, wgt = coo.row, coo.col, coo.data
        if not self._directed:
            mask = src < dst
            src, dst, wgt = src[mask], dst[mask], wgt[mask]
        order = np.lexsort((dst, src))
        return src[order], dst[order], wgt[order]

    @property
    def out_degrees(self):
        """q_i = sum_j w_ij (row sums)."""
        return np.asarray(self._W.sum(axis=1)).ravel()

    @property
    def in_degrees(self):
        """p_i = sum_j w_ji (column sums)."""
        return np.asarray(self._W.sum(axis=0)).ravel()

    @property
    def degrees(self):
        """d_i for undirected graphs (equals both degree notions)."""
        return self.out_degrees

    def same_edges(self, other):
        """True when both graphs have identical node count, orientation flag
        and edge set (exact weights, order-insensitive)."""
        if self._n != other._n or self._directed != other._directed:
            return False
        a, b = self.edges(), other.edges()
        return all(x.shape == y.shape and np.array_equal(x, y) for x, y in zip(a, b))

    def __repr__(self):
        kind = "directed" if self._directed else "undirected"
        return "Graph(n_nodes=%d, n_edges=%d, %s)" % (self._n, self.n_edges, kind)


# ---------------------------------------------------------------------------
# random-graph generators
# ---------------------------------------------------------------------------

def erdos_renyi(n, p, seed):
    """G(n, p): each of the n(n-1)/2 pairs is linked independently with
    probability p. Deterministic for a fixed seed."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(n - 1):
        hits = np.nonzero(rng.random(n - 1 - i) < p)[0] + i + 1
        edges.extend((i, int(j), 1.0) for j in hits)
    return Graph(n, edges, directed=False)


def small_world(n, degree, beta, seed):
    """Ring lattice of even degree with each ring edge rewired with
    probability beta to a uniform non-duplicate target."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if degree % 2 != 0 or degree >= n or degree < 2:
        raise ValueError("degree must be even, >= 2 and < n")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must be in [0, 1]")
    rng = np.random.default_rng(seed)
    neighbors = [set() for _ in range(n)]
    for j in range(1, degree // 2 + 1):
        for i in range(n):
            t = (i + j) % n
            neighbors[i].add(t)
            neighbors[t].add(i)
    for j in range(1, degree // 2 + 1):
        for i in range(n):
            t = (i + j) % n
            if rng.random() >= beta:
                continue
            if len(neighbors[i]) >= n - 1:
                continue  # node already linked to everyone else
            w = int(rng.integers(n))
            while w == i or w in neighbors[i]:
                w = int(rng.integers(n))
            neighbors[i].discard(t)
            neighbors[t].discard(i)
            neighbors[i].add(w)
            neighbors[w].add(i)
    edges = [(i, j, 1.0) for i in range(n) for j in neighbors[i] if i < j]
    return Graph(n, edges, directed=False)


def barabasi_albert(n, m0, m, seed):
    """Preferential attachment: fully connected seed of m0 nodes, then each
    arriving node links to m distinct existing nodes sampled without
    replacement proportionally to current degree."""
    if not (2 <= m <= m0 < n):
        raise ValueError("need 2 <= m <= m0 < n")
    rng = np.random.default_rng(seed)
    edges = [(i, j, 1.0) for i in range(m0) for j in range(i + 1, m0)]
    deg = np.zeros(n)
    deg[:m0] = m0 - 1
    for u in range(m0, n):
        probs = deg[:u] / deg[:u].sum()
        chosen = set()
        while len(chosen) < m:
            v = int(rng.choice(u, p=probs))
            chosen.add(v)
        for v in sorted(chosen):
            edges.append((v, u, 1.0))
            deg[v] += 1
        deg[u] = m
    return Graph(n, edges, directed=False)


_GENERATORS = {
    "erdos_renyi": (erdos_renyi, ("n", "p")),
    "small_world": (small_world, ("n", "degree", "beta")),
    "barabasi_albert": (barabasi_albert, ("n", "m0", "m")),
}


def generate_graph(model, seed, **params):
    """Dispatch to one of the named generators; deterministic per
    (model, params, seed)."""
    if model not in _GENERATORS:
        raise ValueError("unknown graph model %r" % (model,))
    fn, names = _GENERATORS[model]
    missing = [a for a in names if a not in params]
    extra = [a for a in params if a not in names]
    if missing or extra:
        raise ValueError(
            "model %r takes parameters %s" % (model, ", ".join(names)))
    return fn(*[params[a] for a in names], seed)


# ---------------------------------------------------------------------------
# k-nearest-neighbor graphs from feature vectors
# ---------------------------------------------------------------------------

def knn_graph(points, k, symmetrize=True, weights="binary", sigma=None):
    """Exact Euclidean k-NN graph over the rows of ``points``.

    With ``symmetrize`` the union of the directed k-NN relations is kept,
    producing an undirected graph. ``weights`` is "binary" (all 1, default)
    or "gaussian" for exp(-d^2 / (2 sigma^2)); duplicate points at distance
    zero then get the maximum weight 1.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValueError("points must be a 2-D array with at least one row")
    if not np.all(np.isfinite(points)):
        raise ValueError("points must be finite")
    n = points.shape[0]
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n_points")
    if weights not in ("binary", "gaussian"):
        raise ValueError("weights must be 'binary' or 'gaussian'")
    if weights == "gaussian" and (sigma is None or sigma <= 0):
        raise ValueError("gaussian weights need sigma > 0")

    from scipy.spatial.distance import cdist

    dist = cdist(points, points)
    rows = np.zeros((n, n))
    for i in range(n):
        order = np.argsort(dist[i], kind="stable")  # ties -> smallest index
        order = order[order != i][:k]
        if weights == "binary":
            rows[i, order] = 1.0
        else:
            rows[i, order] = np.exp(-dist[i, order] ** 2 / (2.0 * sigma ** 2))
    W = sp.csr_array(rows)
    if symmetrize:
        W = W.maximum(sp.csr_array(W.T))
        return Graph.from_adjacency(W, directed=False)
    return Graph.from_adjacency(W, directed=True)


# ---------------------------------------------------------------------------
# strongly connected components
# ---------------------------------------------------------------------------

def largest_scc(g):
    """Induced subgraph on the largest strongly connected component.

    Undirected edges count as bidirectional. Size ties go to the component
    containing the smallest original node index. Returns (subgraph, keep)
    where ``keep[i]`` is the original index of subgraph node i.
    """
    n_comp, labels = sp.csgraph.connected_components(
        g.W, directed=True, connection="strong")
    sizes = np.bincount(labels, minlength=n_comp)
    best = sizes.max()
    comp = labels[np.nonzero(sizes[labels] == best)[0][0]]
    keep = np.nonzero(labels == comp)[0]
    sub = g.W[np.ix_(keep, keep)]
    return Graph.from_adjacency(sub, directed=g.directed), keep


# ---------------------------------------------------------------------------
# Matrix Market coordinate IO
# ---------------------------------------------------------------------------

def save_graph(g, path):
    """Write the graph as a Matrix Market coordinate file. Undirected
    graphs use the `symmetric` qualifier with one entry per pair."""
    src, dst, wgt = g.edges()
    with open(path, "w") as fh:
        kind = "general" if g.directed else "symmetric"
        fh.write("%%%%MatrixMarket matrix coordinate real %s\n" % kind)
        fh.write("%d %d %d\n" % (g.n_nodes, g.n_nodes, len(wgt)))
        if g.directed:
            for i, j, w in zip(src, dst, wgt):
                fh.write("%d %d %s\n" % (i + 1, j + 1, repr(float(w))))
        else:
            # symmetric MM files keep the lower triangle (row >= col)
            for i, j, w in zip(src, dst, wgt):
                fh.write("%d %d %s\n" % (j + 1, i + 1, repr(float(w))))


def load_graph(path):
    """Parse a Matrix Market coordinate file into a Graph.

    `symmetric` files load as undirected graphs, `general` as directed.
    Malformed headers, non-positive weights, self-loops, duplicates and
    out-of-range indices raise GraphParseError with the offending line.
    """
    with open(path) as fh:
        lines = fh.readlines()
    if not lines:
        raise GraphParseError("empty file", line=1)
    head = lines[0].strip().split()
    if len(head) != 5 or head[0] != "%%MatrixMarket":
        raise GraphParseError("expected a MatrixMarket header", line=1)
    obj, fmt, field, symm = (t.lower() for t in head[1:])
    if (obj, fmt, field) != ("matrix", "coordinate", "real"):
        raise GraphParseError(
            "only 'matrix coordinate real' files are supported", line=1)
    if symm not in ("general", "symmetric"):
        raise GraphParseError("symmetry must be general or symmetric", line=1)

    lineno = 1
    size = None
    entries = []
    for raw in lines[1:]:
        lineno += 1
        text = raw.strip()
        if not text or text.startswith("%"):
            continue
        parts = text.split()
        if size is None:
            if len(parts) != 3:
                raise GraphParseError("size line must be 'rows cols nnz'",
                                      line=lineno)
            try:
                rows, cols, nnz = (int(p) for p in parts)
            except ValueError:
                raise GraphParseError("size line must be integers", line=lineno)
            if rows != cols or rows < 1:
                raise GraphParseError("adjacency must be square", line=lineno)
            size = (rows, nnz)
            continue
        if len(parts) != 3:
            raise GraphParseError("entry must be 'row col value'", line=lineno)
        try:
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise GraphParseError("entry must be 'int int real'", line=lineno)
        n = size[0]
        if not (1 <= i <= n and 1 <= j <= n):
            raise GraphParseError("index out of bounds", line=lineno)
        if i == j:
            raise GraphParseError("self-loops are not allowed", line=lineno)
        if not np.isfinite(w) or w <= 0:
            raise GraphParseError("edge weight must be positive", line=lineno)
        entries.append((i - 1, j - 1, w))
    if size is None:
        raise GraphParseError("missing size line", line=lineno)
    if len(entries) != size[1]:
        raise GraphParseError(
            "expected %d entries, found %d" % (size[1], len(entries)),
            line=lineno)
    try:
        return Graph(size[0], entries, directed=(symm == "general"))
    except ValueError as exc:
        raise GraphParseError(str(exc)) from exc


def load_features(path):
    """Feature matrix from headerless CSV, one point per row."""
    data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    if not np.all(np.isfinite(data)):
        raise ValueError("feature matrix must be finite")
    return data


def save_features(points, path):
    np.savetxt(path, np.asarray(points, dtype=np.float64), delimiter=",")
