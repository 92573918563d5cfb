"""Command-line interface.

Subcommands: generate-graph, build-operator (debug dense export), select,
reconstruct, experiment, bench, classify. Exit codes: 0 on success, 2 for
configuration/usage errors, 3 for numeric failures.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import ConfigurationError, GraphParseError, NumericError
from .experiments import (SELECTOR_NAMES, SelectorSpec, classify_one_vs_rest,
                          load_config, run_bench, run_mse_experiment,
                          _run_selector)
from .graphs import generate_graph, knn_graph, load_features, load_graph, \
    save_graph
from .operators import OPERATOR_KINDS, build_variation_operator
from .reconstruction import consistent_reconstruct, variational_reconstruct
from .selection import SamplingSet, select_greedy_proxy, select_random
from .signals import read_signal_csv
from .spectral import dense_gft


def _add_operator_args(sub):
    sub.add_argument("--operator", default="combinatorial",
                     choices=OPERATOR_KINDS, help="variation operator kind")
    sub.add_argument("--gamma", type=float, default=0.5,
                     help="hub-authority mixing weight in [0, 1]")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="graphsampling",
        description="Sampling-set selection and bandlimited reconstruction "
                    "for graph signals.")
    subs = parser.add_subparsers(dest="command", required=True)

    gg = subs.add_parser("generate-graph", help="write a random graph as a "
                                                "Matrix Market file")
    gg.add_argument("--model", required=True,
                    choices=("erdos_renyi", "small_world", "barabasi_albert"))
    gg.add_argument("--n", type=int, required=True)
    gg.add_argument("--p", type=float, help="edge probability (erdos_renyi)")
    gg.add_argument("--degree", type=int, help="ring degree (small_world)")
    gg.add_argument("--beta", type=float, help="rewiring prob (small_world)")
    gg.add_argument("--m0", type=int, help="seed clique size "
                                           "(barabasi_albert)")
    gg.add_argument("--m", type=int, help="links per new node "
                                          "(barabasi_albert)")
    gg.add_argument("--seed", type=int, default=0)
    gg.add_argument("--out", required=True)

    bo = subs.add_parser("build-operator",
                         help="export the dense operator for debugging")
    bo.add_argument("--graph", required=True)
    _add_operator_args(bo)
    bo.add_argument("--out", required=True)

    se = subs.add_parser("select", help="select a sampling set")
    se.add_argument("--method", required=True, choices=SELECTOR_NAMES)
    se.add_argument("--k", type=int, help="proxy order (greedy_proxy)")
    se.add_argument("--num-samples", type=int, required=True)
    se.add_argument("--graph", required=True)
    _add_operator_args(se)
    se.add_argument("--basis-r", type=int,
                    help="bandwidth r for e_opt/a_opt (default: num-samples)")
    se.add_argument("--seed", type=int, default=0)
    se.add_argument("--out", required=True, help="output JSON path")

    rc = subs.add_parser("reconstruct", help="reconstruct a signal from "
                                             "samples")
    rc.add_argument("--graph", required=True)
    _add_operator_args(rc)
    rc.add_argument("--basis-r", type=int, required=True)
    rc.add_argument("--samples", required=True,
                    help="node,value CSV of observed samples")
    rc.add_argument("--set", dest="set_path", required=True,
                    help="sampling-set JSON from `select`")
    rc.add_argument("--variational-m", type=int,
                    help="use variational reconstruction of this order "
                         "instead of the consistent basis fit")
    rc.add_argument("--out", required=True, help="output CSV path")

    ex = subs.add_parser("experiment", help="run a reconstruction-error "
                                            "sweep from a config file")
    ex.add_argument("--config", required=True)

    be = subs.add_parser("bench", help="time selectors from a config file")
    be.add_argument("--config", required=True)

    cl = subs.add_parser("classify", help="one-vs-rest classification on a "
                                          "k-NN feature graph")
    cl.add_argument("--features", required=True, help="headerless CSV, one "
                                                      "point per row")
    cl.add_argument("--labels", required=True,
                    help="one integer label per row (-1 = unknown)")
    cl.add_argument("--k-nn", type=int, default=10)
    cl.add_argument("--num-labels", type=int, required=True,
                    help="label budget (sampling set size)")
    cl.add_argument("--r", type=int, required=True,
                    help="bandwidth parameter for reconstruction")
    cl.add_argument("--method", default="greedy_proxy",
                    choices=("greedy_proxy", "random"))
    cl.add_argument("--k", type=int, default=8, help="proxy order")
    _add_operator_args(cl)
    cl.add_argument("--seed", type=int, default=0)
    cl.add_argument("--out", help="optional output CSV of node,label rows")
    return parser


def _cmd_generate_graph(args):
    params = {}
    for name in ("p", "degree", "beta", "m0", "m"):
        val = getattr(args, name)
        if val is not None:
            params[name] = val
    g = generate_graph(args.model, args.seed, n=args.n, **params)
    save_graph(g, args.out)
    print("wrote %s (%d nodes, %d edges)" % (args.out, g.n_nodes, g.n_edges))


def _cmd_build_operator(args):
    g = load_graph(args.graph)
    op = build_variation_operator(g, args.operator, gamma=args.gamma)
    dense = op.to_dense()
    with open(args.out, "w") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        fh.write("%d %d\n" % dense.shape)
        for j in range(dense.shape[1]):
            for i in range(dense.shape[0]):
                fh.write(repr(float(dense[i, j])) + "\n")
    print("wrote dense %s operator to %s" % (args.operator, args.out))


def _cmd_select(args):
    g = load_graph(args.graph)
    op = build_variation_operator(g, args.operator, gamma=args.gamma)
    m = args.num_samples
    if args.method == "greedy_proxy":
        if args.k is None:
            raise ConfigurationError("greedy_proxy needs --k")
        chosen = select_greedy_proxy(op, m, args.k)
    elif args.method == "random":
        chosen = select_random(op.n, m, args.seed)
    else:
        r = args.basis_r or m
        basis = dense_gft(op)
        chosen = _run_selector(SelectorSpec(args.method), op, basis, m, r,
                               args.seed)
    with open(args.out, "w") as fh:
        fh.write(chosen.to_json())
    print("selected %d nodes with %s -> %s" % (m, args.method, args.out))


def _cmd_reconstruct(args):
    g = load_graph(args.graph)
    op = build_variation_operator(g, args.operator, gamma=args.gamma)
    with open(args.set_path) as fh:
        chosen = SamplingSet.from_json(fh.read())
    samples = read_signal_csv(args.samples)
    y = samples[chosen.indices]
    if args.variational_m:
        rec = variational_reconstruct(op, args.variational_m, chosen.indices,
                                      y)
    else:
        basis = dense_gft(op)
        rec = consistent_reconstruct(basis, args.basis_r, chosen.indices, y)
    rec.save_csv(args.out)
    print("reconstructed %d nodes -> %s (residual %.2e)"
          % (rec.f_hat.size, args.out, rec.residual))


def _cmd_experiment(args):
    table = run_mse_experiment(load_config(args.config))
    for row in table.rows:
        print(json.dumps(row))


def _cmd_bench(args):
    table = run_bench(load_config(args.config))
    for row in table.rows:
        print(json.dumps(row))


def _cmd_classify(args):
    points = load_features(args.features)
    labels = np.loadtxt(args.labels, delimiter=",", dtype=np.int64,
                        ndmin=1)
    g = knn_graph(points, args.k_nn, symmetrize=True)
    op = build_variation_operator(g, args.operator, gamma=args.gamma)
    if args.method == "greedy_proxy":
        chosen = select_greedy_proxy(op, args.num_labels, args.k)
    else:
        chosen = select_random(g.n_nodes, args.num_labels, args.seed)
    predicted = classify_one_vs_rest(g, labels, chosen, args.r,
                                     args.operator, gamma=args.gamma)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("node,label\n")
            for i, lab in enumerate(predicted):
                fh.write("%d,%d\n" % (i, lab))
    known = labels >= 0
    if known.any():
        acc = float(np.mean(predicted[known] == labels[known]))
        print("accuracy on labelled nodes: %.4f" % acc)


_COMMANDS = {
    "generate-graph": _cmd_generate_graph,
    "build-operator": _cmd_build_operator,
    "select": _cmd_select,
    "reconstruct": _cmd_reconstruct,
    "experiment": _cmd_experiment,
    "bench": _cmd_bench,
    "classify": _cmd_classify,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except NumericError as exc:
        print("numeric failure: %s" % exc, file=sys.stderr)
        return 3
    except (ConfigurationError, GraphParseError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
