"""Sampling-set selectors.

The workhorse is :func:`select_greedy_proxy`, which grows the set one node
at a time by placing each new sample where the smoothest signal vanishing
on the current set carries the most energy; it needs only matvecs with the
variation operator. The spectral-domain baselines (E-/A-optimal greedy,
sequential basis-representation sampling, Gaussian-elimination pivoting)
require an explicit frequency basis, and an exhaustive maximizer is kept
around as a test oracle.

All selectors resolve ties toward the smallest node index; near-ties
within a 1e-9 relative band count as ties so that results on symmetric
graphs do not depend on eigensolver noise.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math

import numpy as np

from .errors import NumericError
from .spectral import SolverConfig, cutoff_estimate

__all__ = [
    "SamplingSet",
    "select_greedy_proxy",
    "select_optimal_design",
    "select_m2",
    "select_gauss_pivot",
    "select_random",
    "brute_force_best_set",
]

_TIE_REL = 1e-9


def _argmax_ties_low(values, allowed=None):
    """Index of the maximum of ``values``; candidates within a relative
     1e-9 band of the maximum tie, and the smallest index wins."""
    values = np.asarray(values, dtype=np.float64)
    if allowed is not None:
        masked = np.full(values.shape, -np.inf)
        masked[allowed] = values[allowed]
        values = masked
    top = values.max()
    if not np.isfinite(top):
        raise ValueError("no admissible candidate")
    cut = top - _TIE_REL * abs(top)
    return int(np.nonzero(values >= cut)[0][0])


@dataclasses.dataclass
class SamplingSet:
    """An ordered set of sampled nodes.

    ``nodes`` preserves selection order. ``per_step_cutoff`` holds the
    order-k cutoff after each addition for the greedy proxy method (a
    nondecreasing sequence) and is None for other selectors.
    """

    nodes: list
    method: str
    k: int | None = None
    per_step_cutoff: list | None = None

    def __post_init__(self):
        self.nodes = [int(v) for v in self.nodes]
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("sampling set contains duplicates")
        if self.nodes and min(self.nodes) < 0:
            raise ValueError("negative node index")

    def __len__(self):
        return len(self.nodes)

    @property
    def indices(self):
        return np.asarray(self.nodes, dtype=np.int64)

    def prefix(self, m):
        """The first m selections as their own set (greedy selectors are
        nested, so a prefix is itself the size-m selection)."""
        if not 0 <= m <= len(self.nodes):
            raise ValueError("prefix size out of range")
        cut = None
        if self.per_step_cutoff is not None:
            cut = self.per_step_cutoff[:m]
        return SamplingSet(self.nodes[:m], self.method, self.k, cut)

    def to_json(self):
        return json.dumps({
            "method": self.method,
            "k": self.k,
            "nodes": self.nodes,
            "per_step_cutoff": self.per_step_cutoff,
        })

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(data["nodes"], data["method"], data.get("k"),
                   data.get("per_step_cutoff"))


def select_greedy_proxy(op, m, k, config=None):
    """Greedy cutoff-maximizing sampling set of size m (matvec only).

    Starting from the empty set, each step computes the smoothest unit
    signal vanishing on the current samples and adds the node where its
    energy peaks. Warm-starts every eigensolve from the previous smoothest
    signal with the newly sampled entry zeroed. Records the cutoff after
    each addition; if m equals the node count the final entry is +inf
    (every signal is then trivially determined).
    """
    n = op.n
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n_nodes")
    base = config or SolverConfig()
    nodes = []
    cutoffs = []
    total_iters = 0
    cfg = dataclasses.replace(base, start=None)
    est = cutoff_estimate(op, nodes, k, cfg)
    total_iters += est.iterations
    for step in range(m):
        energy = est.phi_star ** 2
        try:
            v = _argmax_ties_low(energy, allowed=_complement(n, nodes))
        except ValueError:
            raise NumericError("greedy step %d: smoothest signal vanished "
                               "on every remaining node" % step)
        nodes.append(v)
        if len(nodes) == n:
            cutoffs.append(math.inf)
            break
        warm = est.phi_star.copy()
        warm[v] = 0.0
        cfg = dataclasses.replace(base, start=warm)
        try:
            est = cutoff_estimate(op, nodes, k, cfg)
        except NumericError as exc:
            raise NumericError("greedy step %d: %s" % (step + 1, exc),
                               residual=exc.residual,
                               iterations=exc.iterations) from exc
        total_iters += est.iterations
        cutoffs.append(est.omega)
    chosen = SamplingSet(nodes, "greedy_proxy", k=k, per_step_cutoff=cutoffs)
    chosen.total_iterations = total_iters
    return chosen


def _complement(n, nodes):
    mask = np.ones(n, dtype=bool)
    mask[list(nodes)] = False
    return np.nonzero(mask)[0]


def select_optimal_design(basis, m, r, criterion="e_opt"):
    """Greedy experiment-design sampling over the first r basis columns.

    ``e_opt`` adds the node maximizing the smallest singular value of the
    sampled rows (worst-case error). ``a_opt`` minimizes the trace of the
    inverse Gram matrix (mean squared error); while the sampled rows are
    still rank deficient it maximizes the Frobenius energy of the sampled
    rows instead, switching as soon as the Gram matrix is invertible.
    """
    if criterion not in ("e_opt", "a_opt"):
        raise ValueError("criterion must be 'e_opt' or 'a_opt'")
    if not basis.orthonormal:
        raise ValueError("optimal-design selection needs an orthonormal basis")
    n = basis.n
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n_nodes")
    if not 1 <= r <= basis.n_vectors:
        raise ValueError("r out of range")
    U = basis.vectors[:, :r]
    nodes = []
    for _ in range(m):
        cand = _complement(n, nodes)
        scores = np.full(n, -np.inf)
        any_invertible = False
        inv_scores = np.full(n, -np.inf)
        for v in cand:
            rows = U[nodes + [int(v)], :]
            sv = np.linalg.svd(rows, compute_uv=False)
            if criterion == "e_opt":
                scores[v] = sv[-1]
            else:
                if rows.shape[0] >= r and sv[-1] > 1e-10:
                    inv_scores[v] = -np.sum(1.0 / sv ** 2)
                    any_invertible = True
                scores[v] = np.sum(sv ** 2)
        if criterion == "a_opt" and any_invertible:
            v = _argmax_ties_low(inv_scores)
        else:
            v = _argmax_ties_low(scores)
        nodes.append(v)
    return SamplingSet(nodes, criterion)


def select_m2(basis, m):
    """Sequential basis-representation sampling (an eigenvector-by-
    eigenvector baseline, tagged "m2" in experiment configs).

    At step t the t-th basis vector is written as a combination of the
    previously used basis vectors plus node indicators on the not yet
    sampled nodes; the node with the largest indicator coefficient is
    sampled. The indicator coefficients are obtained by eliminating the
    basis part through the square system on the sampled rows, which equals
    the least-squares representation whenever the system is nonsingular.
    """
    n = basis.n
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n_nodes")
    if basis.n_vectors < m:
        raise ValueError("basis must cover at least the first m vectors")
    U = basis.vectors
    nodes = []
    for t in range(m):
        cand = _complement(n, nodes)
        if t == 0:
            alpha = U[:, 0]
        else:
            A = U[np.ix_(nodes, range(t))]
            sv = np.linalg.svd(A, compute_uv=False)
            if sv[-1] <= 1e-12 * max(sv[0], 1.0):
                raise NumericError(
                    "representation system is singular at step %d" % t)
            beta = np.linalg.solve(A, U[nodes, t])
            alpha = U[:, t] - U[:, :t] @ beta
        scores = np.full(n, -np.inf)
        scores[cand] = np.abs(alpha[cand])
        nodes.append(_argmax_ties_low(scores))
    return SamplingSet(nodes, "m2")


def select_gauss_pivot(basis, m):
    """Column-wise Gaussian elimination over the basis with partial row
    pivoting; the pivot row of column i is the i-th sample."""
    n = basis.n
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n_nodes")
    if basis.n_vectors < m:
        raise ValueError("basis must cover at least the first m vectors")
    T = np.array(basis.vectors[:, :m], dtype=np.float64)
    used = np.zeros(n, dtype=bool)
    nodes = []
    for i in range(m):
        col = np.abs(T[:, i])
        col[used] = -np.inf
        pivot = _argmax_ties_low(col)
        if T[pivot, i] == 0.0:
            raise NumericError("column %d is exactly zero after "
                               "elimination" % i)
        for j in range(i + 1, m):
            T[:, j] -= T[:, i] * (T[pivot, j] / T[pivot, i])
        used[pivot] = True
        nodes.append(pivot)
    return SamplingSet(nodes, "gauss_pivot")


def select_random(n, m, seed):
    """Uniform sample of m nodes without replacement, deterministic per
    seed."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    rng = np.random.default_rng(seed)
    nodes = rng.choice(n, size=m, replace=False)
    return SamplingSet([int(v) for v in nodes], "random")


def brute_force_best_set(op, m, k, budget=10 ** 6):
    """Exhaustive maximizer of the order-k cutoff over all size-m sets.

    A dense test oracle, not a production selector: every candidate set is
    scored with a dense reduced-matrix eigensolve. Ties go to the
    lexicographically smallest set. Returns (set, cutoff)."""
    n = op.n
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n_nodes")
    if math.comb(n, m) > budget:
        raise ValueError("C(%d, %d) exceeds the oracle budget" % (n, m))
    L = op.to_dense()
    P = np.linalg.matrix_power(L, k)
    M = P.T @ P
    best_sigma = -np.inf
    best = None
    full = np.arange(n)
    for subset in itertools.combinations(range(n), m):
        sc = np.setdiff1d(full, subset, assume_unique=True)
        if sc.size == 0:
            continue
        sigma = float(np.linalg.eigvalsh(M[np.ix_(sc, sc)])[0])
        if sigma > best_sigma:
            best_sigma = sigma
            best = subset
    omega = max(best_sigma, 0.0) ** (1.0 / (2.0 * k))
    return SamplingSet(list(best), "brute_force", k=k), float(omega)
