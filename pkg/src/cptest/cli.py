"""Command-line front end.

    cptest test         run one permutation test (files, corpus, or a scenario)
    cptest simulate     write the two samples of a scenario
    cptest bench-roc    ROC curves from replicated p-values
    cptest bench-power  power versus per-sample size

Exit codes: 0 success, 2 input error, 3 statistical contract violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bench
from .classifiers import ClassifierSpec
from .core import LabeledDataset, RngStream
from .errors import ContractViolation, InputError
from .generators import SCENARIOS, ScenarioSpec, generate, generate_dataset
from .io import load_corpus, read_labeled_file, read_matrix, write_matrix
from .permutation import permutation_test
from .stats import TAGS, StatisticKind

EXIT_INPUT = 2
EXIT_CONTRACT = 3

COMMANDS = ("test", "simulate", "bench-roc", "bench-power")

# argument dest -> converter, used for --config files
_CONFIG_TYPES = {}


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _stat_list(text):
    names = [s.strip().lower() for s in text.split(",") if s.strip()]
    bad = [s for s in names if s not in TAGS]
    if bad or not names:
        raise argparse.ArgumentTypeError(
            f"unknown statistic {', '.join(bad) or text!r}; valid names: {', '.join(TAGS)}"
        )
    return names


def _int_list(text):
    return [int(s) for s in text.split(",") if s.strip()]


def _float_list(text):
    return [float(s) for s in text.split(",") if s.strip()]


def _add(group, *flags, **kw):
    action = group.add_argument(*flags, **kw)
    _CONFIG_TYPES[action.dest] = kw.get("type", str)
    return action


def _common(p):
    g = p.add_argument_group("test")
    _add(g, "--stat", type=_stat_list, default=["cpt1"], help=f"comma-separated subset of {{{','.join(TAGS)}}}")
    _add(g, "--classifier", choices=("knn", "logistic", "forest"), default="forest")
    _add(g, "--permutations", "-B", dest="permutations", type=int, default=200)
    _add(g, "--alpha", type=float, default=0.05)
    _add(g, "--seed", type=int, default=0)
    _add(g, "--threads", type=int, default=1)
    _add(g, "--folds", type=int, default=2, help="cross-validation folds for acc")
    _add(g, "--bandwidth", type=float, default=None, help="MMD kernel width (default: median heuristic)")
    c = p.add_argument_group("classifier")
    _add(c, "--knn-k", type=int, default=10)
    _add(c, "--l2", type=float, default=1.0)
    _add(c, "--max-iter", type=int, default=1000)
    _add(c, "--tol", type=float, default=1e-6)
    _add(c, "--trees", type=int, default=500)
    _add(c, "--mtry", type=int, default=None)
    _add(c, "--min-leaf", type=int, default=10)
    p.add_argument("--config", type=Path, help="key=value file; command-line flags take precedence")
    p.add_argument("--out", type=Path, default=None, help="output directory")


def _scenario_args(p, required=False):
    g = p.add_argument_group("scenario")
    _add(g, "--scenario", choices=SCENARIOS, required=required, default=None)
    _add(g, "--d", type=int, default=100)
    _add(g, "--n", type=int, default=100)
    _add(g, "--m", type=int, default=None)
    _add(g, "--sigma", type=float, default=2.0)
    _add(g, "--shift", type=float, default=1.6)
    _add(g, "--shift-pattern", choices=("sparse", "dense"), default="sparse")
    _add(g, "--rho1", type=float, default=0.01)
    _add(g, "--rho2", type=float, default=0.21)
    _add(g, "--tau", type=float, default=0.65)
    _add(g, "--delta1", type=float, default=0.1)
    _add(g, "--delta2", type=float, default=0.1)
    _add(g, "--scenario-seed", type=int, default=None, help="seed for fixed scenario structure (GGM graphs); default --seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cptest", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="run one permutation test")
    _common(t)
    _scenario_args(t)
    io_ = t.add_argument_group("input")
    _add(io_, "--sample1", type=Path)
    _add(io_, "--sample2", type=Path)
    _add(io_, "--data", type=Path, help="delimited file with a label column")
    _add(io_, "--label-col", default=None, help="label column name or 0-based index")
    _add(io_, "--corpus-file", type=Path, help="two-column delimited file: label, text")
    _add(io_, "--corpus-dir1", type=Path, help="directory of label-1 text files")
    _add(io_, "--corpus-dir0", type=Path, help="directory of label-0 text files")
    _add(io_, "--min-df", type=float, default=0.05)
    _add(io_, "--remove-terms", default="", help="comma-separated terms to drop")
    _add(io_, "--sample-size", type=int, default=None, help="subsample this many documents per class")
    _add(io_, "--delimiter", default=None)

    s = sub.add_parser("simulate", help="write a scenario's two samples")
    _scenario_args(s)
    _add(s, "--seed", type=int, default=0)
    s.add_argument("--config", type=Path)
    s.add_argument("--out", type=Path, default=None)

    r = sub.add_parser("bench-roc", help="ROC curves from replicated tests")
    _common(r)
    _scenario_args(r)
    _add(r, "--replications", "-R", dest="replications", type=int, default=400)
    _add(r, "--alpha-grid", type=_float_list, default=None, help="comma-separated levels (default 0.01..1.00)")
    _add(r, "--svg", action="store_true", help="also write roc.svg")
    _CONFIG_TYPES["svg"] = _bool

    w = sub.add_parser("bench-power", help="power versus sample size")
    _common(w)
    _scenario_args(w)
    _add(w, "--sizes", type=_int_list, default=[50, 100, 150])
    _add(w, "--reps", type=int, default=250)
    return parser


def _bool(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def _read_config(path: Path) -> dict:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{num}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        explicit = _explicit_dests(parser, argv)
        for key, value in _read_config(args.config).items():
            if not hasattr(args, key):
                raise InputError(f"unknown config key {key!r}")
            if key in explicit:
                continue
            conv = _CONFIG_TYPES.get(key, str)
            try:
                setattr(args, key, conv(value))
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise InputError(f"config key {key!r}: {exc}") from exc
    _validate(args)
    return args


def _explicit_dests(parser, argv) -> set:
    sub = parser._subparsers._group_actions[0].choices[argv[0]]
    dests = set()
    for action in sub._actions:
        if any(a == opt or a.startswith(opt + "=") for a in argv for opt in action.option_strings):
            dests.add(action.dest)
    return dests


def _validate(args):
    checks = []
    if hasattr(args, "permutations"):
        checks += [
            (args.permutations >= 1, "--permutations must be at least 1"),
            (0 < args.alpha < 1, "--alpha must lie in (0, 1)"),
            (args.threads >= 1, "--threads must be at least 1"),
            (args.folds >= 2, "--folds must be at least 2"),
        ]
    if hasattr(args, "replications"):
        checks.append((args.replications >= 1, "--replications must be at least 1"))
    if hasattr(args, "reps"):
        checks.append((args.reps >= 1, "--reps must be at least 1"))
    for ok, msg in checks:
        if not ok:
            raise InputError(msg)


def _classifier(args) -> ClassifierSpec:
    return ClassifierSpec(
        kind=args.classifier, knn_k=args.knn_k, logistic_l2=args.l2,
        logistic_max_iter=args.max_iter, logistic_tol=args.tol,
        forest_trees=args.trees, forest_mtry=args.mtry,
        forest_min_leaf=args.min_leaf, seed=args.seed,
    )


def _kinds(args) -> list[StatisticKind]:
    clf = _classifier(args)
    return [
        StatisticKind(tag, None if tag == "mmd" else clf, acc_folds=args.folds, mmd_bandwidth=args.bandwidth)
        for tag in args.stat
    ]


def _scenario(args) -> ScenarioSpec:
    if args.scenario is None:
        raise InputError("--scenario is required")
    return ScenarioSpec(
        kind=args.scenario, d=args.d, n=args.n, m=args.m,
        seed=args.seed if args.scenario_seed is None else args.scenario_seed,
        sigma=args.sigma, shift=args.shift, shift_pattern=args.shift_pattern,
        rho1=args.rho1, rho2=args.rho2, tau=args.tau, delta1=args.delta1, delta2=args.delta2,
    )


def _out_dir(args, default: str) -> Path:
    out = args.out or Path(default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_test_data(args) -> tuple[LabeledDataset, dict]:
    if args.sample1 or args.sample2:
        if not (args.sample1 and args.sample2):
            raise InputError("--sample1 and --sample2 must be given together")
        x1 = read_matrix(args.sample1, args.delimiter)
        x2 = read_matrix(args.sample2, args.delimiter)
        if x1.shape[1] != x2.shape[1]:
            raise InputError(
                f"column counts differ: {args.sample1} has {x1.shape[1]}, {args.sample2} has {x2.shape[1]}"
            )
        return LabeledDataset.from_samples(x1, x2), {"sample1": str(args.sample1), "sample2": str(args.sample2)}
    if args.data:
        if args.label_col is None:
            raise InputError("--data requires --label-col")
        return read_labeled_file(args.data, args.label_col, args.delimiter), {"data": str(args.data)}
    if args.corpus_file or args.corpus_dir1 or args.corpus_dir0:
        corpus = load_corpus(args.corpus_file, args.corpus_dir1, args.corpus_dir0, args.delimiter)
        if args.sample_size:
            corpus = _subsample_corpus(corpus, args.sample_size, RngStream(args.seed).spawn(3))
        from .generators import build_doc_term_matrix

        remove = [t for t in args.remove_terms.split(",") if t.strip()]
        data = build_doc_term_matrix(corpus, args.min_df, remove)
        return data, {"corpus_documents": len(corpus), "vocabulary": data.d}
    if args.scenario:
        sc = _scenario(args)
        return generate_dataset(sc, RngStream(args.seed).spawn(4)), {"scenario": sc.parameters()}
    raise InputError("no input: give --sample1/--sample2, --data, a corpus, or --scenario")


def _subsample_corpus(corpus, size, rng):
    gen = rng.generator()
    out = []
    for label in (1, 0):
        docs = [doc for doc in corpus if int(doc[0]) == label]
        if len(docs) < size:
            raise InputError(f"class {label} has {len(docs)} documents, fewer than --sample-size {size}")
        out += [docs[i] for i in sorted(gen.choice(len(docs), size, replace=False))]
    return out


def cmd_test(args) -> int:
    data, source = _load_test_data(args)
    reports = []
    for kind in _kinds(args):
        res = permutation_test(data, kind, B=args.permutations, alpha=args.alpha,
                               rng=RngStream(args.seed), threads=args.threads)
        reports.append({
            "statistic": kind.label,
            "observed": res.observed,
            "p_value": res.p_value,
            "critical_value": res.critical_value,
            "alpha": res.alpha,
            "B": res.num_permutations,
            "seed": res.seed,
            "decision": "reject" if res.reject else "retain",
            "n": data.n,
            "m": data.m,
            "d": data.d,
        })
        print(
            f"{kind.label}: observed={res.observed:.6g} p={res.p_value:.6g} "
            f"critical={res.critical_value:.6g} alpha={res.alpha} B={res.num_permutations} "
            f"seed={res.seed} -> {'reject H0' if res.reject else 'retain H0'}"
        )
    out = _out_dir(args, "cptest-out")
    _write_json(out / "report.json", {"source": source, "tests": reports})
    return 0


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    x1, x2 = generate(sc, RngStream(args.seed).spawn(4))
    out = _out_dir(args, "cptest-sim")
    write_matrix(out / "sample1.csv", x1)
    write_matrix(out / "sample2.csv", x2)
    _write_json(out / "manifest.json", {"scenario": sc.parameters(), "seed": args.seed,
                                        "files": ["sample1.csv", "sample2.csv"]})
    print(f"wrote {x1.shape[0]}x{x1.shape[1]} and {x2.shape[0]}x{x2.shape[1]} samples to {out}")
    return 0


def _bench_manifest(args, sc, runtime):
    return {
        "command": args.command,
        "scenario": sc.parameters(),
        "statistics": args.stat,
        "classifier": args.classifier,
        "B": args.permutations,
        "seed": args.seed,
        "runtime_seconds": round(runtime, 3),
        "argv": sys.argv[1:],
    }


def cmd_bench_roc(args) -> int:
    sc = _scenario(args)
    start = time.perf_counter()
    records = [
        bench.roc_experiment(sc, kind, R=args.replications, B=args.permutations,
                             alpha_grid=args.alpha_grid, seed=args.seed, threads=args.threads)
        for kind in _kinds(args)
    ]
    runtime = time.perf_counter() - start
    out = _out_dir(args, "cptest-bench")
    (out / "roc.csv").write_text(bench.roc_csv(records), encoding="utf-8")
    (out / "pvalues.csv").write_text(bench.roc_pvalues_csv(records), encoding="utf-8")
    if args.svg:
        ref = bench.minimax_reference(sc, records[0].alpha_grid)
        (out / "roc.svg").write_text(bench.roc_svg(records, ref, title=sc.kind), encoding="utf-8")
    _write_json(out / "manifest.json", _bench_manifest(args, sc, runtime) | {"R": args.replications})
    for rec in records:
        print(f"{rec.statistic_kind.label}: power at 0.05 = {np.mean(rec.p_values <= 0.05):.3f} "
              f"({rec.runtime_seconds:.1f}s)")
    print(f"total runtime {runtime:.1f}s")
    return 0


def cmd_bench_power(args) -> int:
    sc = _scenario(args)
    start = time.perf_counter()
    curves = [
        bench.power_curve(sc, kind, args.sizes, reps=args.reps, B=args.permutations,
                          seed=args.seed, alpha=args.alpha, threads=args.threads)
        for kind in _kinds(args)
    ]
    runtime = time.perf_counter() - start
    out = _out_dir(args, "cptest-bench")
    (out / "power.csv").write_text(bench.power_csv(curves), encoding="utf-8")
    (out / "pvalues.csv").write_text(bench.power_pvalues_csv(curves), encoding="utf-8")
    _write_json(out / "manifest.json", _bench_manifest(args, sc, runtime) | {"reps": args.reps, "sizes": args.sizes})
    for c in curves:
        pts = ", ".join(f"n={n}: {p:.3f}" for n, p in zip(c.sample_sizes, c.powers))
        print(f"{c.statistic_kind.label}: {pts}")
    print(f"total runtime {runtime:.1f}s")
    return 0


_HANDLERS = {"test": cmd_test, "simulate": cmd_simulate, "bench-roc": cmd_bench_roc, "bench-power": cmd_bench_power}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        return _HANDLERS[args.command](args)
    except ContractViolation as exc:
        print(f"cptest: contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except InputError as exc:
        print(f"cptest: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"cptest: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
