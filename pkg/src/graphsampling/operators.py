"""Variation operators whose spectra define graph frequencies.

Six operator kinds are supported, covering undirected and directed graphs:

======================  ==========  =========================================
kind                    symmetric   action on a signal x
======================  ==========  =========================================
combinatorial           yes         D x - W x
sym_normalized          yes         x - D^{-1/2} W D^{-1/2} x
random_walk_undirected  no          x - D^{-1} W x
adjacency_based         undirected  x - W x / |mu_max|
hub_authority           yes         gamma (x - T'T x) + (1-gamma) (x - TT' x)
random_walk_directed    yes         x - (Pi^1/2 P Pi^-1/2 + transpose) x / 2
======================  ==========  =========================================

with T = Dq^{-1/2} W Dp^{-1/2} built from in-degrees p and out-degrees q,
P the random-walk transition matrix and Pi = diag(pi) its stationary
distribution. Operators are stored factored (graph plus a few cached
vectors), never densified, so one application costs O(|E|).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import NumericError

__all__ = [
    "VariationOperator",
    "build_variation_operator",
    "stationary_distribution",
    "max_magnitude_eigenvalue",
    "OPERATOR_KINDS",
    "SYMMETRIC_KINDS",
]

OPERATOR_KINDS = (
    "combinatorial",
    "sym_normalized",
    "random_walk_undirected",
    "adjacency_based",
    "hub_authority",
    "random_walk_directed",
)

# kinds that are symmetric PSD for every admissible input graph
SYMMETRIC_KINDS = (
    "combinatorial",
    "sym_normalized",
    "hub_authority",
    "random_walk_directed",
)

_UNDIRECTED_ONLY = (
    "combinatorial",
    "sym_normalized",
    "random_walk_undirected",
)

# power-iteration defaults shared by the spectral subroutines below:
# relative-change tolerance and an iteration cap of 10 n
_PI_TOL = 1e-10
_PI_CAP_FACTOR = 10


def _inv_where_positive(v, power=1.0):
    out = np.zeros_like(v)
    mask = v > 0
    out[mask] = v[mask] ** (-power)
    return out


class VariationOperator:
    """A variation operator L over a fixed graph, applied via matvecs.

    Use :func:`build_variation_operator`. ``apply``/``apply_adjoint`` are
    reentrant and consistent, <L x, y> == <x, L' y>; symmetric kinds share
    the same routine for both.
    """

    def __init__(self, graph, kind, gamma=None, aux=None):
        self.graph = graph
        self.kind = kind
        self.gamma = gamma
        self._aux = aux or {}
        self.symmetric = kind in SYMMETRIC_KINDS or (
            kind == "adjacency_based" and not graph.directed)
        self._norm_estimate = None

    @property
    def n(self):
        return self.graph.n_nodes

    # -- matvec kernels ----------------------------------------------------

    def apply(self, x):
        """y = L x, O(|E|) work."""
        x = np.asarray(x)
        if x.shape != (self.n,):
            raise ValueError("signal length %d does not match %d nodes"
                             % (x.size, self.n))
        W = self.graph.W
        a = self._aux
        k = self.kind
        if k == "combinatorial":
            return a["d"] * x - W @ x
        if k == "sym_normalized":
            s = a["d_isqrt"]
            return x - s * (W @ (s * x))
        if k == "random_walk_undirected":
            return x - a["d_inv"] * (W @ x)
        if k == "adjacency_based":
            return x - (W @ x) / a["mu_max"]
        if k == "hub_authority":
            return self._hub_apply(x)
        # random_walk_directed
        sq, isq, qinv = a["pi_sqrt"], a["pi_isqrt"], a["q_inv"]
        left = sq * (qinv * (W @ (isq * x)))
        right = isq * (self.graph.WT @ (qinv * (sq * x)))
        return x - 0.5 * (left + right)

    def apply_adjoint(self, x):
        """y = L' x; equals apply for symmetric kinds."""
        if self.symmetric:
            return self.apply(x)
        x = np.asarray(x)
        if x.shape != (self.n,):
            raise ValueError("signal length %d does not match %d nodes"
                             % (x.size, self.n))
        WT = self.graph.WT
        a = self._aux
        if self.kind == "random_walk_undirected":
            return x - WT @ (a["d_inv"] * x)
        if self.kind == "adjacency_based":
            return x - (WT @ x) / a["mu_max"]
        raise AssertionError("unreachable")

    def _hub_apply(self, x):
        W, WT = self.graph.W, self.graph.WT
        pis, qis = self._aux["p_isqrt"], self._aux["q_isqrt"]
        g = self.gamma

        def T(v):
            return qis * (W @ (pis * v))

        def Tt(v):
            return pis * (WT @ (qis * v))

        out = np.zeros_like(x, dtype=np.float64)
        if g > 0:
            out += g * (x - Tt(T(x)))
        if g < 1:
            out += (1.0 - g) * (x - T(Tt(x)))
        return out

    # -- dense export (debugging and small-graph oracles) -------------------

    def to_dense(self):
        """Dense N x N matrix of the operator, built from its definition."""
        Wd = self.graph.W.toarray()
        n = self.n
        a = self._aux
        k = self.kind
        if k == "combinatorial":
            return np.diag(a["d"]) - Wd
        if k == "sym_normalized":
            S = np.diag(a["d_isqrt"])
            return np.eye(n) - S @ Wd @ S
        if k == "random_walk_undirected":
            return np.eye(n) - np.diag(a["d_inv"]) @ Wd
        if k == "adjacency_based":
            return np.eye(n) - Wd / a["mu_max"]
        if k == "hub_authority":
            T = np.diag(a["q_isqrt"]) @ Wd @ np.diag(a["p_isqrt"])
            g = self.gamma
            return g * (np.eye(n) - T.T @ T) + (1 - g) * (np.eye(n) - T @ T.T)
        P = np.diag(a["q_inv"]) @ Wd
        s, si = np.diag(a["pi_sqrt"]), np.diag(a["pi_isqrt"])
        half = s @ P @ si
        return np.eye(n) - 0.5 * (half + half.T)

    def norm_estimate(self):
        """Spectral-norm estimate sigma_max(L), cached; used to scale the
        k-fold operator chains so the reduced problems stay O(1)."""
        if self._norm_estimate is None:
            self._norm_estimate = _operator_norm(self)
        return self._norm_estimate

    def __repr__(self):
        extra = ", gamma=%g" % self.gamma if self.kind == "hub_authority" else ""
        return "VariationOperator(kind=%r, n=%d%s)" % (self.kind, self.n, extra)


def build_variation_operator(g, kind, gamma=0.5):
    """Construct one of the six operator kinds over graph ``g``.

    ``random_walk_directed`` requires a strongly connected graph (run
    :func:`graphsampling.graphs.largest_scc` first); ``hub_authority``
    takes the mixing weight ``gamma`` in [0, 1]. Zero-degree nodes are
    handled with the pseudo-inverse convention (rows of D^{-1} and
    D^{-1/2} set to zero).
    """
    if kind not in OPERATOR_KINDS:
        raise ValueError("unknown operator kind %r" % (kind,))
    if kind in _UNDIRECTED_ONLY and g.directed:
        raise ValueError("%s requires an undirected graph" % kind)
    aux = {}
    if kind == "combinatorial":
        aux["d"] = g.degrees
    elif kind == "sym_normalized":
        aux["d_isqrt"] = _inv_where_positive(g.degrees, 0.5)
    elif kind == "random_walk_undirected":
        aux["d_inv"] = _inv_where_positive(g.degrees)
    elif kind == "adjacency_based":
        aux["mu_max"] = max_magnitude_eigenvalue(g)
        return VariationOperator(g, kind, aux=aux)
    elif kind == "hub_authority":
        if not 0.0 <= gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        aux["p_isqrt"] = _inv_where_positive(g.in_degrees, 0.5)
        aux["q_isqrt"] = _inv_where_positive(g.out_degrees, 0.5)
        return VariationOperator(g, kind, gamma=float(gamma), aux=aux)
    elif kind == "random_walk_directed":
        n_comp, _ = sp.csgraph.connected_components(
            g.W, directed=True, connection="strong")
        if n_comp != 1:
            raise ValueError(
                "random_walk_directed needs a strongly connected graph; "
                "extract the largest SCC first")
        pi = stationary_distribution(g)
        aux["pi_sqrt"] = np.sqrt(pi)
        aux["pi_isqrt"] = 1.0 / np.sqrt(pi)
        aux["q_inv"] = 1.0 / g.out_degrees
    return VariationOperator(g, kind, aux=aux)


def stationary_distribution(g):
    """Stationary distribution pi of the random walk P_ij = w_ij / q_i.

    Power iteration on P' from the uniform vector, with a two-iterate
    Cesaro average to absorb periodic (e.g. bipartite) oscillation.
    Requires a strongly connected graph with positive out-degrees.
    """
    n = g.n_nodes
    n_comp, _ = sp.csgraph.connected_components(
        g.W, directed=True, connection="strong")
    if n_comp != 1:
        raise ValueError("stationary distribution needs a strongly "
                         "connected graph")
    q = g.out_degrees
    if np.any(q <= 0):
        raise ValueError("every node needs positive out-degree")
    WT = g.WT
    qinv = 1.0 / q

    def step(v):
        v = WT @ (qinv * v)
        return v / v.sum()

    cur = np.full(n, 1.0 / n)
    nxt = step(cur)
    avg_prev = 0.5 * (cur + nxt)
    cap = max(_PI_CAP_FACTOR * n, 50)
    for _ in range(cap):
        cur, nxt = nxt, step(nxt)
        avg = 0.5 * (cur + nxt)
        if np.abs(avg - avg_prev).sum() <= _PI_TOL:
            resid = np.abs(step(avg) - avg).sum()
            if resid <= 1e-8:
                return avg
        avg_prev = avg
    resid = np.abs(step(avg_prev) - avg_prev).sum()
    raise NumericError("stationary distribution did not converge",
                       residual=resid, iterations=cap)


def max_magnitude_eigenvalue(g):
    """|mu_max| of the adjacency matrix, by power iteration.

    Uses a two-step iteration (W applied twice per update) so periodic
    spectra, e.g. the +/-mu pair of bipartite graphs, still converge.
    Deterministic seeded start; 1e-8 relative accuracy target.
    """
    if g.n_edges < 1:
        raise ValueError("graph needs at least one edge")
    W = g.W
    n = g.n_nodes
    rng = np.random.default_rng(0)
    y = np.ones(n) + 1e-3 * rng.standard_normal(n)
    y /= np.linalg.norm(y)
    prev = None
    cap = max(_PI_CAP_FACTOR * n, 100)
    for it in range(cap):
        z = W @ (W @ y)
        nz = np.linalg.norm(z)
        if nz == 0:
            raise NumericError("power iteration collapsed to zero",
                               iterations=it)
        est = np.sqrt(nz)  # ||W^2 y|| / ||y|| with unit y estimates mu^2
        if prev is not None and abs(est - prev) <= _PI_TOL * max(est, 1e-300):
            return est
        prev = est
        y = z / nz
    raise NumericError("spectral radius estimate did not converge",
                       residual=abs(est - prev), iterations=cap)


def _operator_norm(op, tol=1e-10):
    """sigma_max(L) via power iteration on L'L (deterministic start)."""
    n = op.n
    rng = np.random.default_rng(0)
    y = np.ones(n) + 1e-3 * rng.standard_normal(n)
    y /= np.linalg.norm(y)
    prev = None
    for _ in range(max(_PI_CAP_FACTOR * n, 100)):
        z = op.apply_adjoint(op.apply(y))
        nz = np.linalg.norm(z)
        if nz == 0:
            return 0.0
        est = np.sqrt(nz)
        if prev is not None and abs(est - prev) <= tol * est:
            return est
        prev = est
        y = z / nz
    return est  # plateaued estimate is adequate for scaling purposes
