"""Command-line front end: ``digh {spectrum,ssl,model,wavelets}``.

Exit codes: 0 success, 2 input or validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import warnings

import numpy as np

from . import diffusion_wavelets as dw
from . import errors as E
from .filters import PolynomialFilter, SamplingModel, accuracy, learn_signal_model, signs
from .graph_core import (gen_directed_cycle, gen_directed_torus, gen_directed_watts_strogatz,
                         read_edge_list, read_labels, symmetrize)
from .random_walk import (from_graph, google_matrix, lazy, rank_one_walk, reversibilized,
                          similar_operator_T)
from .spectral import decompose
from .ssl import METHODS, evaluate_ssl, normalized_adjacency
from .wavelet_frame import FilterBankSpec, build_bank, write_atoms_csv

INPUT_ERRORS = (E.InvalidArgumentError, E.ConnectivityError, E.DanglingNodeError,
                OSError, ValueError)
NUMERICAL_ERRORS = (E.ConvergenceError, E.DegenerateStationaryError, E.NonDiagonalizableError,
                    E.NoConjugatePairError, E.SingularModelError, E.SolverError,
                    E.DesignInvalidError, E.EmptyBasisError, E.SingularTransformError,
                    np.linalg.LinAlgError)

OPERATORS = ("W_norm", "P", "Pbar", "T", "Tbar", "P_eps", "P_G")
P_FAMILY = ("P", "Pbar", "P_eps", "P_G")


def _fmt(x):
    return f"{x:.17g}"


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _gen(spec):
    kind, _, args = spec.partition(":")
    try:
        vals = [v for v in args.split(",") if v]
        if kind == "cycle" and len(vals) == 1:
            return gen_directed_cycle(int(vals[0]))
        if kind == "torus" and len(vals) == 2:
            return gen_directed_torus(int(vals[0]), int(vals[1]))
        if kind == "dws" and len(vals) == 3:
            return ("dws", int(vals[0]), int(vals[1]), float(vals[2]))
    except ValueError:
        pass
    raise E.InvalidArgumentError(
        f"bad generator {spec!r}; use cycle:N, torus:M,N or dws:N,K,BETA")


def _ergodicize(spec):
    kind, _, val = spec.partition(":")
    if kind not in ("google", "rank1"):
        raise E.InvalidArgumentError(f"bad --ergodicize {spec!r}; use google:G or rank1:EPS")
    try:
        return kind, float(val) if val else (0.85 if kind == "google" else 1e-4)
    except ValueError:
        raise E.InvalidArgumentError(f"bad --ergodicize value {val!r}") from None


def _parse_op(spec):
    """``NAME[:alpha=A]`` with an optional ``_sym`` suffix on NAME."""
    name, _, rest = spec.partition(":")
    alpha = 0.5
    if rest:
        key, _, val = rest.partition("=")
        if key != "alpha":
            raise E.InvalidArgumentError(f"bad operator option {rest!r}; use alpha=A")
        alpha = float(val)
    sym = name.endswith("_sym")
    base = name[:-4] if sym else name
    if base not in OPERATORS:
        raise E.InvalidArgumentError(
            f"unknown operator {name!r}; choose from {', '.join(OPERATORS)} (optionally _sym)")
    return base, sym, alpha


def load_graph(args):
    if args.graph:
        return read_edge_list(args.graph)
    g = _gen(args.gen)
    if isinstance(g, tuple):
        _, n, k, beta = g
        g = gen_directed_watts_strogatz(n, k, beta, seed=args.seed)
    return g


def base_walk(g, args):
    """Walk on ``g``: ergodicized if requested, then made lazy."""
    if args.ergodicize:
        kind, val = _ergodicize(args.ergodicize)
        w = google_matrix(g, val) if kind == "google" else rank_one_walk(g, val)
    else:
        w = from_graph(g)
    return lazy(w, args.lazy) if args.lazy else w


def operator(spec, g, args):
    """Return ``(R, mu, pi)`` for an operator selector."""
    base, sym, alpha = _parse_op(spec)
    if sym:
        g = symmetrize(g)
    if base == "W_norm":
        return normalized_adjacency(g.adjacency()), np.ones(g.n_vertices), None
    if base == "P_eps":
        _, eps = _ergodicize(args.ergodicize) if (
            args.ergodicize or "").startswith("rank1") else (None, 1e-4)
        w = rank_one_walk(g, eps)
    elif base == "P_G":
        _, gam = _ergodicize(args.ergodicize) if (
            args.ergodicize or "").startswith("google") else (None, 0.85)
        w = google_matrix(g, gam)
    else:
        w = base_walk(g, args)
    if args.lazy and base in ("P_eps", "P_G"):
        w = lazy(w, args.lazy)
    if base in ("Pbar", "Tbar"):
        w = reversibilized(w, alpha)
    if base in ("T", "Tbar"):
        return similar_operator_T(w), np.ones(w.n), w.pi
    return w.P, np.array(w.pi), w.pi


def load_truth(g, args):
    """Labels from ``--labels`` or two contiguous blocks of vertex ids."""
    if args.labels:
        lab = read_labels(args.labels, g.n_vertices)
        if np.any(lab == 0):
            raise E.InvalidArgumentError("label file must label every vertex with +1 or -1")
        return lab
    n = g.n_vertices
    return np.where(np.arange(n) < n // 2, 1.0, -1.0)


def _write(rows, out):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def cmd_spectrum(args):
    g = load_graph(args)
    R, _, _ = operator(args.op[0] if args.op else "P", g, args)
    dec = decompose(R)
    if args.out:
        dec.to_csv(args.out)
    else:
        dec.to_csv(sys.stdout)


def cmd_ssl(args):
    g = load_graph(args)
    truth = load_truth(g, args)
    methods = args.methods.split(",")
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise E.InvalidArgumentError(f"unknown SSL methods {bad}; choose from {METHODS}")
    rows = [("method", "p", "mean_accuracy", "std", "best_param")]
    for p in args.p:
        res = evaluate_ssl(g, truth, methods, p=p, n_realizations=args.realizations,
                           gamma_grid=args.gamma_grid, lambda_grid=args.lambda_grid,
                           seed=args.seed)
        rows.extend((r.method, _fmt(r.p), _fmt(r.mean_accuracy), _fmt(r.std),
                     _fmt(r.best_param)) for r in res)
    _write(rows, args.out)


def cmd_model(args):
    g = load_graph(args)
    f0 = load_truth(g, args)
    ops = args.op or ["P"]
    rows = [("operator", "p", "mean_accuracy", "std")]
    seqs = np.random.SeedSequence(args.seed).spawn(args.realizations)
    for spec in ops:
        R, mu, pi = operator(spec, g, args)
        if args.sampling == "stationary" and pi is None:
            pi = from_graph(g).pi
        for p in args.p:
            sampling = SamplingModel(args.sampling, p)
            theta = learn_signal_model(R, f0, sampling, K=args.K, mu=mu, pi=pi)
            H = PolynomialFilter(theta, R).matrix()
            acc = np.array([
                accuracy(signs(H @ sampling.draw(f0, pi=pi, rng=np.random.default_rng(s))), f0)
                for s in seqs])
            rows.append((spec, _fmt(p), _fmt(acc.mean()), _fmt(acc.std())))
    _write(rows, args.out)


def cmd_wavelets(args):
    g = load_graph(args)
    if args.kind == "frame":
        R, _, _ = operator(args.op[0] if args.op else "Pbar", g, args)
        dec = decompose(R)
        bank = build_bank(dec, FilterBankSpec.dyadic(args.scales))
        vertices = args.vertex or [0]
        if max(vertices) >= g.n_vertices:
            raise E.InvalidArgumentError(f"vertex out of range 0..{g.n_vertices - 1}")
        if args.out:
            write_atoms_csv(args.out, bank, vertices, FilterBankSpec.dyadic(args.scales).scales)
        sys.stdout.write(f"frame_lower,{_fmt(bank.frame_lower)}\n"
                         f"frame_upper,{_fmt(bank.frame_upper)}\n")
        return
    R, _, _ = operator(args.op[0] if args.op else "T", g, args)
    summary = [("mode", "eps", "dims", "condition_number")]
    for mode in (dw.ORTHOGONAL, dw.BIORTHOGONAL):
        eps = args.eps if args.eps is not None else dw.DEFAULT_EPS[mode]
        mr = dw.build(R, args.scales, eps, mode)
        kappa = dw.transform_condition_number(mr)
        summary.append((mode, _fmt(eps), " ".join(map(str, mr.dims)), _fmt(kappa)))
        if args.out:
            dw.write_atoms_csv(f"{args.out}.{mode}.csv" if mode == dw.BIORTHOGONAL
                               else args.out, mr)
    _write(summary, None)


def build_parser():
    p = argparse.ArgumentParser(prog="digh", description="Harmonic analysis on directed graphs.")
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="edge list file (src dst [weight])")
    src.add_argument("--gen", help="cycle:N | torus:M,N | dws:N,K,BETA")
    common.add_argument("--labels", help="label file (vertex label, labels +1/-1)")
    common.add_argument("--op", action="append",
                        help="operator NAME[:alpha=A]; NAME in " + ", ".join(OPERATORS)
                        + " with optional _sym suffix; repeatable")
    common.add_argument("--lazy", type=float, default=0.0, metavar="G",
                        help="laziness gamma in [0, 1)")
    common.add_argument("--ergodicize", metavar="google:G|rank1:EPS")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output CSV (default stdout)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="eigenvalues and frequencies")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("ssl", parents=[common], help="semi-supervised label recovery")
    s.add_argument("--methods", default="L_norm,L_rw,R_M")
    s.add_argument("--gamma-grid", type=_floats, default=None)
    s.add_argument("--lambda", dest="lambda_grid", type=_floats, default=None)
    s.add_argument("--p", type=_floats, default=[0.1])
    s.add_argument("--realizations", type=int, default=100)
    s.set_defaults(func=cmd_ssl)

    s = sub.add_parser("model", parents=[common], help="polynomial-filter signal model")
    s.add_argument("--p", type=_floats, default=[0.1])
    s.add_argument("--K", type=int, default=10)
    s.add_argument("--sampling", choices=("uniform", "stationary"), default="uniform")
    s.add_argument("--realizations", type=int, default=100)
    s.set_defaults(func=cmd_model)

    s = sub.add_parser("wavelets", parents=[common], help="diffusion wavelets or frame atoms")
    s.add_argument("--kind", choices=("diffusion", "frame"), default="diffusion")
    s.add_argument("--scales", type=int, default=6, metavar="J")
    s.add_argument("--eps", type=float, default=None)
    s.add_argument("--vertex", type=int, action="append")
    s.set_defaults(func=cmd_wavelets)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except NUMERICAL_ERRORS as exc:
        print(f"digh: numerical error: {exc}", file=sys.stderr)
        return 3
    except INPUT_ERRORS as exc:
        print(f"digh: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
