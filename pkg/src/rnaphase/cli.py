"""Command-line front end: count, classify, tune, sample, fold, bench, tree.

Every artifact embeds the resolved parameter set and seed in '#'-prefixed
header lines, so a run can be reproduced from its output alone.  Exit codes:
0 success, 1 internal failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .energy import (
    SUBCRITICAL_PARAMS,
    SUPERCRITICAL_PARAMS,
    EnergyParams,
    ParamFileError,
    read_params_file,
    write_params_file,
)
from .folding import count_candidates_sweep, fold_full, fold_sparse
from .sampler import (
    discrete_limit_pmf,
    export_batch_csv,
    export_histogram_csv,
    fit_gaussian,
    fit_rayleigh,
    sample,
)
from .series import (
    brute_force_enumerate,
    compute_series,
    export_block_histogram_csv,
    export_series_csv,
)
from .singularity import SingularityError, classify, tune_to_critical
from .structures import (
    StructureError,
    parse_dot_bracket,
    serialize,
    to_tree,
    tree_to_json,
    tree_to_text,
)

PRESETS = {"subcritical": SUBCRITICAL_PARAMS, "supercritical": SUPERCRITICAL_PARAMS}


class ConfigError(ValueError):
    pass


def _resolve_params(args) -> EnergyParams:
    if getattr(args, "preset", None):
        return PRESETS[args.preset]
    if getattr(args, "params", None):
        try:
            return read_params_file(args.params)
        except (OSError, ParamFileError) as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError("provide --params FILE or --preset NAME")


def _add_params_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--params", help="key=value parameter file")
    p.add_argument("--preset", choices=sorted(PRESETS), help="built-in parameter set")


def _out(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_count(args) -> int:
    params = _resolve_params(args)
    kmax = "auto" if args.khist else None
    series = compute_series(params, args.nmax, kmax=kmax)
    out = Path(args.out)
    export_series_csv(series, out)
    if args.khist:
        export_block_histogram_csv(series, args.nmax, out.with_suffix(".khist.csv"))
    if args.oracle_check is not None:
        from .series import BRUTE_FORCE_LIMIT

        if args.oracle_check > min(args.nmax, BRUTE_FORCE_LIMIT):
            raise ConfigError(
                f"--oracle-check must be <= min(nmax, {BRUTE_FORCE_LIMIT}), "
                f"got {args.oracle_check} with nmax={args.nmax}"
            )
        lines = ["n,S_rel_err,C_rel_err"]
        worst = 0.0
        for n in range(args.oracle_check + 1):
            bf = brute_force_enumerate(n, params)
            s_err = _rel_err(series.S.get(n).to_float(), bf.S_exact.to_float())
            c_err = _rel_err(series.C.get(n).to_float(), bf.C_exact.to_float())
            worst = max(worst, s_err, c_err)
            lines.append(f"{n},{s_err!r},{c_err!r}")
        report = out.with_suffix(".oracle.csv")
        report.write_text("\n".join(lines) + "\n")
        print(f"oracle check to n={args.oracle_check}: worst relative error {worst:.3e}")
        if worst > 1e-9:
            print("oracle check FAILED (tolerance 1e-9)", file=sys.stderr)
            return 1
    print(f"wrote {out}")
    return 0


def _rel_err(a: float, b: float) -> float:
    if b == 0.0:
        return abs(a)
    return abs(a - b) / abs(b)


def cmd_classify(args) -> int:
    params = _resolve_params(args)
    if args.tune:
        if args.bracket is None:
            raise ConfigError("--tune requires --bracket LO HI")
        tuned, report = tune_to_critical(params, args.tune, tuple(args.bracket))
        if args.tuned_out:
            write_params_file(tuned, args.tuned_out)
        _out(args, report.to_json())
        return 0
    report = classify(params, tol=args.tol)
    _out(args, report.to_json())
    return 0


def cmd_tune(args) -> int:
    args.tune = args.free_param
    return cmd_classify(args)


def cmd_sample(args) -> int:
    params = _resolve_params(args)
    series = compute_series(params, args.n, kmax="auto" if args.exact_pmf else None)
    batch = sample(args.n, args.count, params, args.seed, series=series)
    prefix = str(args.out_prefix)
    export_batch_csv(batch, prefix + ".batch.csv")

    exact = series.block_pmf(args.n) if args.exact_pmf else None
    law = args.law
    fit_json = None
    limit = None
    if law == "auto":
        regime = classify(params).regime
        law = {"Subcritical": "discrete", "Supercritical": "gaussian",
               "Critical": "rayleigh"}[regime]
    if law == "discrete":
        tau_h = classify(params).tau_h
        kmax = max(int(batch.X.max()) + 1, 8)
        limit = discrete_limit_pmf(tau_h, kmax)
        emp = np.bincount(batch.X, minlength=kmax + 1) / batch.count
        tv = 0.5 * float(np.abs(emp[: kmax + 1] - limit[: kmax + 1]).sum())
        fit_json = json.dumps(
            {"law": "DiscreteLimit", "params": {"tau_h": tau_h},
             "distance": tv, "details": {"n": args.n, "count": args.count}},
            indent=2, sort_keys=True)
    elif law == "gaussian":
        fit_json = fit_gaussian(batch).to_json()
    elif law == "rayleigh":
        fit_json = fit_rayleigh(batch).to_json()
    export_histogram_csv(batch, prefix + ".hist.csv",
                         exact=exact, limit_law=limit)
    if fit_json is not None:
        Path(prefix + ".lawfit.json").write_text(fit_json + "\n")
    print(f"wrote {prefix}.batch.csv and companions")
    return 0


def cmd_fold(args) -> int:
    params = _resolve_params(args)
    seq = _resolve_sequence(args)
    if args.sparse:
        if args.uncapped:
            raise ConfigError("--uncapped applies to the full fold only")
        result, stats = fold_sparse(seq, params, lmax=args.lmax)
    else:
        result = fold_full(seq, params, lmax=args.lmax, uncapped=args.uncapped)
        stats = None
    payload = {
        "sequence": seq if isinstance(seq, str) else seq.text,
        "dot_bracket": serialize(result.structure),
        "score": result.score,
        "arcs": len(result.structure.arcs),
    }
    if stats is not None:
        payload["candidates"] = stats.candidates
        payload["intervals"] = stats.intervals
        payload["fraction_pruned"] = stats.fraction_pruned
    if args.json:
        _out(args, json.dumps(payload, indent=2, sort_keys=True))
    else:
        _out(args, f"{payload['dot_bracket']}\nscore: {payload['score']!r}")
    return 0


def _resolve_sequence(args):
    if args.seq:
        return args.seq
    if args.fasta:
        lines = [
            ln.strip() for ln in Path(args.fasta).read_text().splitlines()
            if ln.strip() and not ln.startswith(">")
        ]
        if not lines:
            raise ConfigError(f"no sequence found in {args.fasta}")
        return "".join(lines)
    raise ConfigError("provide --seq or --fasta")


def cmd_bench(args) -> int:
    params = _resolve_params(args)
    lengths = [int(x) for x in args.lengths.split(",")]
    result = count_candidates_sweep(
        lengths, args.trials, params, args.seed, lmax=args.lmax,
        workers=args.threads,
    )
    prefix = str(args.out_prefix)
    header = _prov_lines(params, seed=args.seed, trials=args.trials,
                         lengths=args.lengths, lmax=args.lmax)
    # Full schema, wall-clock included (timings vary run to run).
    lines = list(header)
    lines.append("n,trial,candidates,intervals,t_full_ms,t_sparse_ms,cells_full,cells_sparse")
    for r in result.rows:
        lines.append(
            f"{r.n},{r.trial},{r.candidates},{r.intervals},"
            f"{r.t_full_ms!r},{r.t_sparse_ms!r},{r.cells_full},{r.cells_sparse}"
        )
    Path(prefix + ".sweep.csv").write_text("\n".join(lines) + "\n")
    # Deterministic subset: byte-identical across runs for a fixed seed.
    lines = list(header)
    lines.append("n,trial,candidates,intervals,cells_full,cells_sparse")
    for r in result.rows:
        lines.append(
            f"{r.n},{r.trial},{r.candidates},{r.intervals},"
            f"{r.cells_full},{r.cells_sparse}"
        )
    Path(prefix + ".counts.csv").write_text("\n".join(lines) + "\n")
    Path(prefix + ".slopes.json").write_text(
        json.dumps(result.slopes, indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote {prefix}.sweep.csv and companions")
    return 0


def _prov_lines(params: EnergyParams, **extra) -> list[str]:
    fields = {k: getattr(params, k) for k in (
        "alpha1", "alpha2", "alpha3", "beta1", "beta2", "gamma1", "gamma2", "v", "p",
    )}
    fields.update(extra)
    return [f"# {k}={v!r}" for k, v in fields.items()]


def cmd_tree(args) -> int:
    if args.struct:
        s = parse_dot_bracket(args.struct)
        forest = to_tree(s)
        _out(args, tree_to_json(forest) if args.json else tree_to_text(forest))
        return 0
    if args.sample_n:
        params = _resolve_params(args)
        series = compute_series(params, args.sample_n)
        batch = sample(args.sample_n, args.count, params, args.seed,
                       series=series, structures=True)
        nodes = np.array([len(s.arcs) for s in batch.structures])
        depths = np.array(
            [max((t.depth() for t in to_tree(s)), default=0) for s in batch.structures]
        )
        payload = {
            "n": args.sample_n, "count": args.count, "seed": args.seed,
            "median_nodes": float(np.median(nodes)),
            "median_depth": float(np.median(depths)),
            "mean_blocks": float(batch.X.mean()),
        }
        _out(args, json.dumps(payload, indent=2, sort_keys=True))
        return 0
    raise ConfigError("provide a dot-bracket string or --sample-n")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rnaphase",
        description="Energy-weighted RNA secondary structure combinatorics",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker processes for sweeps (default: all cores)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="weighted series CSV")
    _add_params_opts(p)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--khist", action="store_true",
                   help="also write the block-count histogram at nmax")
    p.add_argument("--oracle-check", type=int, metavar="N",
                   help="compare against exhaustive enumeration up to N (<= 16)")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("classify", help="regime report JSON")
    _add_params_opts(p)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--tune", metavar="PARAM", help="bisect PARAM to the critical manifold")
    p.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--tuned-out", help="write the tuned parameter file here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("tune", help="tune one parameter to criticality")
    _add_params_opts(p)
    p.add_argument("free_param")
    p.add_argument("--bracket", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    p.add_argument("--tuned-out")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("sample", help="Boltzmann sampling batch + histogram + law fit")
    _add_params_opts(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--law", choices=["auto", "discrete", "gaussian", "rayleigh", "none"],
                   default="auto")
    p.add_argument("--exact-pmf", action="store_true",
                   help="include the exact block pmf in the histogram")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fold", help="MFE fold a sequence")
    _add_params_opts(p)
    p.add_argument("--seq")
    p.add_argument("--fasta")
    p.add_argument("--sparse", action="store_true")
    p.add_argument("--lmax", type=int, default=30)
    p.add_argument("--uncapped", action="store_true")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fold)

    p = sub.add_parser("bench", help="sparsification sweep CSV + slope fits")
    _add_params_opts(p)
    p.add_argument("--lengths", required=True, help="comma-separated, ascending")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--lmax", type=int, default=30)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("tree", help="irreducible-tree rendering / sampled tree stats")
    _add_params_opts(p)
    p.add_argument("struct", nargs="?", help="dot-bracket string")
    p.add_argument("--sample-n", type=int)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tree)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.threads is None:
        import os
        args.threads = os.cpu_count() or 1
    try:
        return args.func(args)
    except (ConfigError, ParamFileError, StructureError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SingularityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
