"""Config-driven experiment runner: reconstruction-error sweeps, selector
runtime benchmarks and one-vs-rest classification over sampled labels.

Experiments are described declaratively (INI-style files with flat
sections, or :class:`ExperimentConfig` directly) and are deterministic:
every random draw derives from the master seed, so a rerun reproduces the
result tables byte for byte. Wall-clock timings go to a separate sidecar
since they are inherently machine-bound.
"""

from __future__ import annotations

import configparser
import dataclasses
import json
import math
import time
import warnings
import zlib
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import __version__ as _pkg_version
from .errors import ConfigurationError, NonUniqueReconstructionError
from .graphs import generate_graph, load_graph
from .operators import SYMMETRIC_KINDS, OPERATOR_KINDS, build_variation_operator
from .reconstruction import consistent_reconstruct, reconstruction_metrics
from .selection import (select_gauss_pivot, select_greedy_proxy, select_m2,
                        select_optimal_design, select_random)
from .signals import SignalModel, gen_signal
from .spectral import DENSE_CAP, GftBasis, SolverConfig, dense_gft

__all__ = [
    "SelectorSpec",
    "ExperimentConfig",
    "ResultTable",
    "load_config",
    "run_mse_experiment",
    "run_bench",
    "classify_one_vs_rest",
    "derive_rng",
    "partial_basis",
]

SELECTOR_NAMES = ("greedy_proxy", "e_opt", "a_opt", "m2", "gauss_pivot",
                  "random")
_NEED_BASIS = ("e_opt", "a_opt", "m2", "gauss_pivot")


def derive_rng(master_seed, *path):
    """Deterministic child generator for a labelled random stream.

    Children are derived as SeedSequence([master, crc32(label) or int
    component, ...]), so streams are independent per path and reproducible
    across runs."""
    entropy = [int(master_seed) & 0xFFFFFFFF]
    for part in path:
        if isinstance(part, str):
            entropy.append(zlib.crc32(part.encode()))
        else:
            entropy.append(int(part) & 0xFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclasses.dataclass
class SelectorSpec:
    """A selector name plus its parameters (currently only k)."""

    method: str
    k: int | None = None

    def label(self):
        if self.method == "greedy_proxy":
            return "greedy_proxy(k=%d)" % self.k
        return self.method

    @classmethod
    def parse(cls, token):
        token = token.strip()
        if "(" in token:
            name, _, rest = token.partition("(")
            rest = rest.rstrip(")").strip()
            params = {}
            if rest:
                for piece in rest.split(";"):
                    key, _, val = piece.partition("=")
                    params[key.strip()] = val.strip()
            if set(params) - {"k"}:
                raise ConfigurationError(
                    "selector %r takes only a k parameter" % name)
            k = int(params["k"]) if "k" in params else None
        else:
            name, k = token, None
        name = name.strip()
        if name not in SELECTOR_NAMES:
            raise ConfigurationError("unknown selector %r" % name)
        if name == "greedy_proxy":
            if k is None:
                raise ConfigurationError("greedy_proxy needs k, e.g. "
                                         "greedy_proxy(k=8)")
            if k < 1:
                raise ConfigurationError("greedy_proxy k must be >= 1")
        elif k is not None:
            raise ConfigurationError("selector %r takes no k" % name)
        return cls(name, k)


@dataclasses.dataclass
class ExperimentConfig:
    """Declarative experiment description.

    ``graph`` is either {"model": ..., param: value, ...} for a generated
    graph or {"path": ...} for a Matrix Market file. ``signal`` carries
    the model kind ("exact"/"approx"), bandwidth r, optional decay, and
    ``snr_db`` for sample noise (inf = noise free). The sweep is inclusive
    of both endpoints.
    """

    graph: dict
    operator_kind: str = "combinatorial"
    gamma: float = 0.5
    signal: dict = dataclasses.field(
        default_factory=lambda: {"model": "exact", "r": 10, "snr_db": math.inf})
    selectors: list = dataclasses.field(default_factory=list)
    sweep: tuple = (10, 20, 5)
    trials: int = 50
    seed: int = 0
    output_dir: str | None = None
    bench_sizes: tuple = ()
    bench_sample_fraction: float = 0.05
    bench_repeats: int = 3
    bench_greedy_cap: int = 30

    def validate(self):
        if self.operator_kind not in OPERATOR_KINDS:
            raise ConfigurationError("unknown operator kind %r"
                                     % self.operator_kind)
        if not self.selectors:
            raise ConfigurationError("at least one selector is required")
        lo, hi, step = self.sweep
        if lo < 1 or hi < lo or step < 1:
            raise ConfigurationError("sweep must satisfy 1 <= min <= max, "
                                     "step >= 1")
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        kind = self.signal.get("model")
        if kind not in ("exact", "approx"):
            raise ConfigurationError("signal model must be 'exact' or "
                                     "'approx'")
        if int(self.signal.get("r", 0)) < 1:
            raise ConfigurationError("signal r must be >= 1")

    def sweep_sizes(self):
        lo, hi, step = self.sweep
        return list(range(lo, hi + 1, step))


def _coerce(text):
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("inf", "+inf"):
        return math.inf
    return text


def load_config(path):
    """Read an ExperimentConfig from flat INI sections.

    Sections: [graph] (model + parameters, or path), [operator] (kind,
    gamma), [signal] (model, r, snr_db, decay), [selectors] (list = comma
    separated selector tokens such as greedy_proxy(k=8)), [sweep]
    (min/max/step), [run] (trials, seed, output_dir), and optionally
    [bench] (sizes, sample_fraction, repeats)."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigurationError("cannot read config file %s" % path)
    if "graph" not in parser:
        raise ConfigurationError("config needs a [graph] section")
    graph = {key: _coerce(val) for key, val in parser["graph"].items()}
    cfg = ExperimentConfig(graph=graph)
    if "operator" in parser:
        sec = parser["operator"]
        cfg.operator_kind = sec.get("kind", cfg.operator_kind)
        cfg.gamma = sec.getfloat("gamma", cfg.gamma)
    if "signal" in parser:
        cfg.signal = {key: _coerce(val) for key, val in parser["signal"].items()}
    if "selectors" in parser:
        tokens = parser["selectors"].get("list", "")
        cfg.selectors = [SelectorSpec.parse(t) for t in _split_selectors(tokens)]
    if "sweep" in parser:
        sec = parser["sweep"]
        cfg.sweep = (sec.getint("min"), sec.getint("max"),
                     sec.getint("step", 1))
    if "run" in parser:
        sec = parser["run"]
        cfg.trials = sec.getint("trials", cfg.trials)
        cfg.seed = sec.getint("seed", cfg.seed)
        cfg.output_dir = sec.get("output_dir", cfg.output_dir)
    if "bench" in parser:
        sec = parser["bench"]
        sizes = sec.get("sizes", "")
        cfg.bench_sizes = tuple(int(t) for t in sizes.split(",") if t.strip())
        cfg.bench_sample_fraction = sec.getfloat("sample_fraction",
                                                 cfg.bench_sample_fraction)
        cfg.bench_repeats = sec.getint("repeats", cfg.bench_repeats)
        cfg.bench_greedy_cap = sec.getint("greedy_cap", cfg.bench_greedy_cap)
    cfg.validate()
    return cfg


def _split_selectors(text):
    """Split on commas that are not inside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            tok = "".join(cur).strip()
            if tok:
                out.append(tok)
            cur = []
        else:
            cur.append(ch)
    tail = "".join(cur).strip()
    if tail:
        out.append(tail)
    if not out:
        raise ConfigurationError("the [selectors] list is empty")
    return out


@dataclasses.dataclass
class ResultTable:
    """A list of uniform result rows with lossless CSV round-tripping."""

    columns: tuple
    rows: list

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(_cell(row.get(c)) for c in self.columns)
                         + "\n")

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
        columns = tuple(lines[0].split(","))
        rows = []
        for ln in lines[1:]:
            rows.append({c: _uncell(v)
                         for c, v in zip(columns, ln.split(","))})
        return cls(columns, rows)


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _uncell(text):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


# ---------------------------------------------------------------------------
# shared pieces
# ---------------------------------------------------------------------------

def _build_graph(cfg):
    spec = dict(cfg.graph)
    if "path" in spec:
        return load_graph(spec["path"])
    if "model" not in spec:
        raise ConfigurationError("[graph] needs a model or a path")
    model = spec.pop("model")
    seed = spec.pop("seed", cfg.seed)
    try:
        return generate_graph(model, seed, **spec)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def _operator_for(cfg, graph):
    try:
        return build_variation_operator(graph, cfg.operator_kind,
                                        gamma=cfg.gamma)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def _check_compat(cfg, graph):
    """Reject selector/operator combinations that cannot run, before any
    heavy compute starts."""
    orthonormal = cfg.operator_kind in SYMMETRIC_KINDS or (
        cfg.operator_kind == "adjacency_based" and not graph.directed)
    for spec in cfg.selectors:
        if spec.method in ("e_opt", "a_opt", "m2") and not orthonormal:
            raise ConfigurationError(
                "%s needs an orthonormal basis; operator kind %r on this "
                "graph does not provide one" % (spec.method,
                                                cfg.operator_kind))


def _run_selector(spec, op, basis, m, r, master_seed):
    if spec.method == "greedy_proxy":
        return select_greedy_proxy(op, m, spec.k)
    if spec.method == "e_opt":
        return select_optimal_design(basis, m, r, "e_opt")
    if spec.method == "a_opt":
        return select_optimal_design(basis, m, r, "a_opt")
    if spec.method == "m2":
        return select_m2(basis, m)
    if spec.method == "gauss_pivot":
        return select_gauss_pivot(basis, m)
    if spec.method == "random":
        seed = derive_rng(master_seed, "random_selector").integers(2 ** 32)
        return select_random(op.n, m, int(seed))
    raise ConfigurationError("unknown selector %r" % spec.method)


def _noisy_samples(f, nodes, snr_db, noise_field):
    """Samples of f on ``nodes`` with the shared noise field rescaled to
    hit the requested SNR exactly on this subvector."""
    y = f[nodes]
    if math.isinf(snr_db) and snr_db > 0:
        return y
    chunk = noise_field[nodes]
    target = np.linalg.norm(y) * 10.0 ** (-snr_db / 20.0)
    return y + chunk * (target / np.linalg.norm(chunk))


# ---------------------------------------------------------------------------
# reconstruction-error sweep
# ---------------------------------------------------------------------------

def run_mse_experiment(cfg):
    """Mean squared reconstruction error per selector and sample count.

    One selection of the largest sweep size per selector (greedy selectors
    are nested, so prefixes give the smaller sets); all selectors see the
    same signal and noise draws (common random numbers). Failed
    reconstructions (rank-deficient sampled rows) count as infinite error.
    Returns a ResultTable with rows {selector, k, sample_size, mean_mse,
    std_mse, trials}."""
    cfg.validate()
    graph = _build_graph(cfg)
    _check_compat(cfg, graph)
    sizes = cfg.sweep_sizes()
    r = int(cfg.signal["r"])
    if sizes[-1] > graph.n_nodes:
        raise ConfigurationError("sweep max exceeds the node count")
    if r > graph.n_nodes:
        raise ConfigurationError("signal r exceeds the node count")
    if graph.n_nodes > DENSE_CAP:
        raise ConfigurationError(
            "spectral signal models need the dense basis; graph exceeds "
            "the %d-node cap" % DENSE_CAP)
    op = _operator_for(cfg, graph)
    basis = dense_gft(op)
    snr_db = float(cfg.signal.get("snr_db", math.inf))
    decay = float(cfg.signal.get("decay", 4.0))

    t0 = time.perf_counter()
    selections = {}
    for spec in cfg.selectors:
        selections[spec.label()] = _run_selector(
            spec, op, basis, sizes[-1], r, cfg.seed)

    signals = []
    noise_fields = []
    for t in range(cfg.trials):
        sseed = int(derive_rng(cfg.seed, "signal", t).integers(2 ** 32))
        model = SignalModel(cfg.signal["model"], r, decay=decay, seed=sseed)
        signals.append(gen_signal(basis, model))
        noise_fields.append(
            derive_rng(cfg.seed, "noise", t).standard_normal(graph.n_nodes))

    rows = []
    for spec in cfg.selectors:
        label = spec.label()
        chosen = selections[label]
        for size in sizes:
            nodes = chosen.indices[:size]
            errors = []
            for f, field in zip(signals, noise_fields):
                y = _noisy_samples(f, nodes, snr_db, field)
                try:
                    rec = consistent_reconstruct(basis, r, nodes, y)
                    errors.append(reconstruction_metrics(f, rec.f_hat)["mse"])
                except NonUniqueReconstructionError:
                    errors.append(math.inf)
            errors = np.asarray(errors)
            rows.append({
                "selector": spec.method,
                "k": spec.k,
                "sample_size": size,
                "mean_mse": float(errors.mean()),
                "std_mse": float(errors.std()),
                "trials": cfg.trials,
            })
    table = ResultTable(
        ("selector", "k", "sample_size", "mean_mse", "std_mse", "trials"),
        rows)
    _emit(cfg, table, "mse", time.perf_counter() - t0)
    return table


# ---------------------------------------------------------------------------
# runtime benchmark
# ---------------------------------------------------------------------------

def to_sparse_operator(op):
    """Explicit CSR form of a variation operator (used by the partial
    eigensolver; the sampling pipeline itself never needs it)."""
    n = op.n
    eye = sp.eye_array(n, format="csr")
    a = op._aux
    k = op.kind
    W = op.graph.W
    if k == "combinatorial":
        return sp.diags_array(a["d"], format="csr") - W
    if k == "sym_normalized":
        S = sp.diags_array(a["d_isqrt"], format="csr")
        return eye - S @ W @ S
    if k == "random_walk_undirected":
        return eye - sp.diags_array(a["d_inv"], format="csr") @ W
    if k == "adjacency_based":
        return eye - W * (1.0 / a["mu_max"])
    if k == "hub_authority":
        T = sp.diags_array(a["q_isqrt"]) @ W @ sp.diags_array(a["p_isqrt"])
        g = op.gamma
        return g * (eye - T.T @ T) + (1 - g) * (eye - T @ T.T)
    P = sp.diags_array(a["q_inv"]) @ W
    half = sp.diags_array(a["pi_sqrt"]) @ P @ sp.diags_array(a["pi_isqrt"])
    return eye - 0.5 * (half + half.T)


def partial_basis(op, count, method="lobpcg", seed=0):
    """Lowest ``count`` eigenpairs of a symmetric operator; the large-graph
    stand-in for the dense basis that spectral-domain selectors require.

    ``method="lobpcg"`` (default) runs a block Rayleigh-quotient solver
    with matvecs only and O(N * count) memory, which is what the runtime
    benchmarks assume the spectral baselines pay for their basis.
    ``method="shift_invert"`` factorizes the operator once and runs
    shift-invert Lanczos; much faster at desk scale but needs the explicit
    matrix plus fill-in."""
    if not op.symmetric:
        raise ConfigurationError("partial basis needs a symmetric operator")
    if method == "shift_invert":
        from scipy.sparse.linalg import eigsh

        A = sp.csc_matrix(to_sparse_operator(op))
        vals, vecs = eigsh(A, k=count, sigma=-1e-2, which="LM")
    elif method == "lobpcg":
        from scipy.sparse.linalg import lobpcg

        A = sp.csr_matrix(to_sparse_operator(op))
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((op.n, count))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            vals, vecs = lobpcg(A, X, tol=1e-4, maxiter=150, largest=False)
    else:
        raise ValueError("method must be 'lobpcg' or 'shift_invert'")
    order = np.argsort(np.abs(vals), kind="stable")
    return GftBasis(vals[order], vecs[:, order], orthonormal=True)


def run_bench(cfg):
    """Wall-clock selection time per selector and graph size.

    Times the full cost of each method: for the spectral-domain baselines
    that includes computing the partial frequency basis they need (via the
    matvec-only block solver, see :func:`partial_basis`), for the greedy
    proxy method it includes all reduced-operator eigensolves (their summed
    iteration count is reported alongside; per-solve iterations are capped
    at ``bench_greedy_cap``, selection-grade accuracy). The reported time
    is the median over ``bench_repeats`` runs. Rows: {selector, k,
    graph_size, wall_time_seconds, eigensolver_iterations}."""
    cfg.validate()
    if not cfg.bench_sizes:
        raise ConfigurationError("bench needs a [bench] sizes list")
    # selection-grade solver effort, comparable to what the spectral
    # baselines spend per eigenpair at their default tolerance
    greedy_cfg = SolverConfig(max_iterations=cfg.bench_greedy_cap,
                              stagnation_window=10)
    rows = []
    t0 = time.perf_counter()
    for size in cfg.bench_sizes:
        spec = dict(cfg.graph)
        spec.pop("path", None)
        model = spec.pop("model", "erdos_renyi")
        spec.pop("seed", None)
        spec["n"] = size
        graph = generate_graph(model, cfg.seed, **spec)
        _check_compat(cfg, graph)
        op = _operator_for(cfg, graph)
        m = max(1, int(round(cfg.bench_sample_fraction * size)))
        for sel in cfg.selectors:
            times = []
            iterations = None
            for _ in range(cfg.bench_repeats):
                tic = time.perf_counter()
                if sel.method == "greedy_proxy":
                    chosen = select_greedy_proxy(op, m, sel.k, greedy_cfg)
                    iterations = getattr(chosen, "total_iterations", None)
                elif sel.method == "random":
                    select_random(op.n, m, cfg.seed)
                else:
                    basis = partial_basis(op, min(m + 1, op.n - 1))
                    _run_selector(sel, op, basis, m, m, cfg.seed)
                times.append(time.perf_counter() - tic)
            rows.append({
                "selector": sel.method,
                "k": sel.k,
                "graph_size": size,
                "wall_time_seconds": float(np.median(times)),
                "eigensolver_iterations": iterations,
            })
    table = ResultTable(
        ("selector", "k", "graph_size", "wall_time_seconds",
         "eigensolver_iterations"), rows)
    _emit(cfg, table, "bench", time.perf_counter() - t0)
    return table


# ---------------------------------------------------------------------------
# one-vs-rest classification over sampled labels
# ---------------------------------------------------------------------------

def classify_one_vs_rest(graph, labels, sampling_set, r, operator_kind,
                         gamma=0.5):
    """Predict a label per node from labels observed on the sampling set.

    Builds one membership indicator per class on the sampled nodes,
    reconstructs each as an r-bandlimited signal, and assigns every node
    the class with the largest reconstructed value (ties to the smallest
    class id). Classes present in ``labels`` but absent from the sampled
    nodes are warned about and effectively count as rest."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (graph.n_nodes,):
        raise ValueError("labels must have one entry per node (-1 for "
                         "unknown)")
    nodes = np.asarray(
        sampling_set.indices if hasattr(sampling_set, "indices")
        else sampling_set, dtype=np.int64)
    classes = np.unique(labels[labels >= 0])
    if classes.size < 2:
        raise ValueError("need at least two classes")
    op = build_variation_operator(graph, operator_kind, gamma=gamma)
    basis = dense_gft(op)
    sampled_classes = set(labels[nodes].tolist())
    scores = np.empty((graph.n_nodes, classes.size))
    for idx, cls in enumerate(classes):
        if int(cls) not in sampled_classes:
            warnings.warn("class %d has no sampled labels; treating it as "
                          "all-rest" % cls)
        indicator = (labels[nodes] == cls).astype(np.float64)
        rec = consistent_reconstruct(basis, r, nodes, indicator)
        scores[:, idx] = rec.f_hat
    return classes[np.argmax(scores, axis=1)]


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _emit(cfg, table, tag, elapsed):
    if not cfg.output_dir:
        return
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    table.to_csv(out / ("%s_results.csv" % tag))
    manifest = {
        "tag": tag,
        "config": {
            "graph": cfg.graph,
            "operator_kind": cfg.operator_kind,
            "gamma": cfg.gamma,
            "signal": cfg.signal,
            "selectors": [s.label() for s in cfg.selectors],
            "sweep": list(cfg.sweep),
            "trials": cfg.trials,
            "seed": cfg.seed,
        },
        "version": _pkg_version,
    }
    with open(out / ("%s_manifest.json" % tag), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    with open(out / ("%s_timings.json" % tag), "w") as fh:
        json.dump({"wall_time_seconds": elapsed}, fh)
