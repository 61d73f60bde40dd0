"""Command-line surface: every harness and theory-bench operation.

Exit codes: 0 success, 2 usage (argparse), 3 config/validation failure,
4 I/O failure. Results go to --out as CSV with a JSON metadata sidecar
(<out>.meta.json) echoing the full configuration and seed; without --out the
CSV itself goes to stdout. Progress and notes go to stderr. Identical flags
produce byte-identical files for any --workers value; add --frozen-meta to
also pin the metadata timestamp.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .core import ValidationError
from .classify import FitConfig
from .gaussian import (GaussianTaskSpec, builtin_spec, theorem1_conditions,
                       theorem1_verify, theorem2_gap)
from .harness import (ExperimentConfig, Table1Report, run_adjust_eval,
                      run_fi_quality, run_mask_sweep, run_table1,
                      run_topk_frequency, run_wayshot_grid)
from .kernels import backend_name
from .storage import (ResultsTable, format_results_csv, read_feature_file,
                      read_spec_config, write_results)

_DEFAULT_SEED = 0


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _add_common(p: argparse.ArgumentParser, *names: str) -> None:
    opts = {
        "seed": dict(type=int, default=_DEFAULT_SEED,
                     help="base seed (default 0); echoed in metadata"),
        "tasks": dict(type=int, default=2000,
                      help="tasks / Monte Carlo draws (default 2000)"),
        "out": dict(type=str, default=None,
                    help="output CSV path (stdout when omitted)"),
        "config": dict(type=str, default="illustrative",
                       help="gaussian spec: built-in name (illustrative, "
                            "redundancy512, fi-bench, adjust-bench) or a "
                            "key=value config file path"),
        "data": dict(type=str, default=None,
                     help="FFSB feature file used as the task source"),
        "classifier": dict(type=str, default="ncc", choices=("ncc", "logreg")),
        "shots": dict(type=_int_list, default=(1,),
                      help="shots per class (comma list where applicable)"),
        "ways": dict(type=_int_list, default=(2,),
                     help="ways (comma list where applicable)"),
        "query": dict(type=int, default=None,
                      help="query points per class (default: 10000 gaussian, "
                           "15 feature file)"),
        "views": dict(type=int, default=5,
                      help="augmented views per sample (default 5)"),
        "rho": dict(type=float, default=0.5,
                    help="view noise ratio (default 0.5)"),
        "keep": dict(type=_int_list, default=(),
                     help="keep counts for masking (comma list)"),
        "adjust": dict(type=str, default="none",
                       choices=("none", "oracle", "estimated",
                                "estimated-augmented")),
        "workers": dict(type=int, default=1,
                        help="parallel workers; results are identical for "
                             "any value"),
    }
    for name in names:
        p.add_argument(f"--{name}", **opts[name])
    p.add_argument("--frozen-meta", action="store_true",
                   help="omit the timestamp from metadata for byte-stable runs")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fiprobe",
        description="Feature-importance probing experiments and the Gaussian "
                    "theory bench")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", help="six-cell quantitative table")
    _add_common(p, "seed", "tasks", "out", "config", "query", "workers")

    p = sub.add_parser("thm1-check", help="redundancy-theorem conditions")
    _add_common(p, "out", "config", "shots")

    p = sub.add_parser("thm1-verify", help="Monte Carlo redundancy check")
    _add_common(p, "seed", "tasks", "out", "config", "shots", "workers")

    p = sub.add_parser("thm2-gap", help="empirical 0-1 ERM generalization gaps")
    _add_common(p, "seed", "tasks", "out", "config", "shots", "query", "workers")

    p = sub.add_parser("mask-sweep", help="test error over keep counts")
    _add_common(p, "seed", "tasks", "out", "config", "data", "classifier",
                "shots", "ways", "query", "views", "rho", "keep", "adjust",
                "workers")

    p = sub.add_parser("wayshot-grid", help="full vs best-mask error grid")
    _add_common(p, "seed", "tasks", "out", "config", "data", "classifier",
                "shots", "ways", "query", "views", "rho", "keep", "adjust",
                "workers")

    p = sub.add_parser("fi-quality", help="estimated vs oracle importance")
    _add_common(p, "seed", "tasks", "out", "config", "data", "shots", "ways",
                "views", "rho", "workers")

    p = sub.add_parser("topk-freq", help="top-k membership counts per dimension")
    _add_common(p, "out", "data")
    p.add_argument("--k", type=int, default=10, help="top-k size (default 10)")

    p = sub.add_parser("adjust-eval", help="baseline vs soft-mask accuracies")
    _add_common(p, "seed", "tasks", "out", "config", "data", "classifier",
                "shots", "ways", "query", "views", "rho", "adjust", "workers")
    p.set_defaults(adjust="estimated-augmented")

    p = sub.add_parser("ffsb-info", help="validate and describe an FFSB file")
    p.add_argument("path", help="FFSB feature file")
    p.add_argument("--frozen-meta", action="store_true",
                   help=argparse.SUPPRESS)
    return ap


def _load_source(args):
    if getattr(args, "data", None):
        return read_feature_file(args.data), {"data": args.data}
    name = getattr(args, "config", "illustrative")
    try:
        return builtin_spec(name), {"config": name}
    except ValidationError:
        pass
    return read_spec_config(name), {"config": name}


def _experiment_config(args, source) -> ExperimentConfig:
    return ExperimentConfig(
        source=source,
        ways=getattr(args, "ways", (2,)),
        shots=getattr(args, "shots", (1,)),
        query_per_class=getattr(args, "query", None),
        n_tasks=getattr(args, "tasks", 2000),
        keep_counts=getattr(args, "keep", ()),
        adjust=getattr(args, "adjust", "none"),
        classifier=getattr(args, "classifier", "ncc"),
        views=getattr(args, "views", 5),
        rho=getattr(args, "rho", 0.5),
        base_seed=getattr(args, "seed", _DEFAULT_SEED),
        workers=getattr(args, "workers", 1),
    )


def _metadata(args, source_info: dict, frozen: bool) -> dict:
    meta = {
        "artifact": f"fiprobe {__version__}",
        "command": args.command,
        "erm_kernel": backend_name(),
        "seed": getattr(args, "seed", _DEFAULT_SEED),
    }
    meta.update(source_info)
    for key in ("tasks", "shots", "ways", "query", "views", "rho", "keep",
                "adjust", "classifier", "k"):
        if hasattr(args, key):
            v = getattr(args, key)
            meta[key] = list(v) if isinstance(v, tuple) else v
    if not frozen:
        meta["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return meta


def _emit(table: ResultsTable, args, summary: list[str]) -> None:
    out = getattr(args, "out", None)
    if out:
        write_results(table, out, "csv")
        with open(f"{out}.meta.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(table.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")
        for line in summary:
            print(line)
        print(f"out={out}", file=sys.stderr)
    else:
        sys.stdout.write(format_results_csv(table))


# ---------------------------------------------------------------------------
# per-command runners

def _cmd_table1(args) -> None:
    source, info = _load_source(args)
    if not isinstance(source, GaussianTaskSpec):
        raise ValidationError("table1 runs on a gaussian spec source")
    cfg = _experiment_config(args, source)
    print(f"table1: {cfg.n_tasks} tasks per cell", file=sys.stderr)
    rep = run_table1(cfg)
    table = ResultsTable(
        columns=["cell", "shots", "classifier", "dims", "accuracy_mean",
                 "accuracy_stderr"],
        metadata=_metadata(args, info, args.frozen_meta))
    dims_of = {"1dim": 1, "2dim": 2}
    for cell in Table1Report.CELLS:
        shots = 1 if cell.startswith("1shot") else 500
        clf = ("ncc+logreg" if cell.startswith("1shot")
               else ("logreg" if "logreg" in cell else "ncc"))
        table.append(cell, shots, clf, dims_of[cell.split("_")[1]],
                     rep.accuracy[cell], rep.stderr[cell])
    _emit(table, args, [f"{c}={rep.accuracy[c]:.4f} stderr={rep.stderr[c]:.4f}"
                        for c in Table1Report.CELLS])


def _require_spec(source):
    if not isinstance(source, GaussianTaskSpec):
        raise ValidationError("this command needs a gaussian spec source")
    return source


def _cmd_thm1_check(args) -> None:
    source, info = _load_source(args)
    spec = _require_spec(source)
    table = ResultsTable(
        columns=["shot", "condition1_holds", "margin1", "condition2_holds",
                 "margin2", "guarantee_probability"],
        metadata=_metadata(args, info, args.frozen_meta))
    lines = []
    for shot in args.shots:
        rep = theorem1_conditions(spec, shot)
        table.append(shot, rep.conditions_hold[0], rep.margins[0],
                     rep.conditions_hold[1], rep.margins[1],
                     rep.guarantee_probability)
        lines.append(f"shot={shot} conditions_hold="
                     f"{rep.conditions_hold[0] and rep.conditions_hold[1]} "
                     f"guarantee={rep.guarantee_probability:.6f}")
    _emit(table, args, lines)


def _cmd_thm1_verify(args) -> None:
    source, info = _load_source(args)
    spec = _require_spec(source)
    table = ResultsTable(
        columns=["shot", "n_draws", "condition1_holds", "condition2_holds",
                 "guarantee_probability", "empirical_frequency",
                 "mean_acc_1dim", "mean_acc_2dim"],
        metadata=_metadata(args, info, args.frozen_meta))
    lines = []
    for shot in args.shots:
        print(f"thm1-verify: shot={shot} draws={args.tasks}", file=sys.stderr)
        rep = theorem1_verify(spec, shot, args.tasks, args.seed,
                              workers=args.workers)
        acc1 = 100.0 * (1.0 - rep.ls_one.mean())
        acc2 = 100.0 * (1.0 - rep.ls_two.mean())
        table.append(shot, args.tasks, rep.conditions_hold[0],
                     rep.conditions_hold[1], rep.guarantee_probability,
                     rep.empirical_frequency, acc1, acc2)
        lines.append(f"shot={shot} empirical_frequency="
                     f"{rep.empirical_frequency:.4f} acc_1dim={acc1:.2f} "
                     f"acc_2dim={acc2:.2f}")
    _emit(table, args, lines)


def _cmd_thm2_gap(args) -> None:
    source, info = _load_source(args)
    spec = _require_spec(source)
    table = ResultsTable(
        columns=["shot", "n_draws", "gap_median", "gap_mean",
                 "bayes_component", "mean_ld_1dim", "mean_ld_2dim"],
        metadata=_metadata(args, info, args.frozen_meta))
    lines = []
    for shot in args.shots:
        print(f"thm2-gap: shot={shot} draws={args.tasks}", file=sys.stderr)
        rep = theorem2_gap(spec, shot, args.tasks, args.seed,
                           eval_query=args.query or 0, workers=args.workers)
        table.append(shot, args.tasks, rep.gap_median, float(rep.gaps.mean()),
                     rep.bayes_component, float(rep.ld_one.mean()),
                     float(rep.ld_two.mean()))
        lines.append(f"shot={shot} gap_median={rep.gap_median:+.5f} "
                     f"bayes_component={rep.bayes_component:+.5f}")
    _emit(table, args, lines)


def _cmd_mask_sweep(args) -> None:
    source, info = _load_source(args)
    cfg = _experiment_config(args, source)
    print(f"mask-sweep: {cfg.n_tasks} tasks x {len(cfg.keep_counts)} keeps",
          file=sys.stderr)
    curve = run_mask_sweep(cfg)
    table = ResultsTable(
        columns=["keep", "mean_error", "stderr", "n_tasks"],
        metadata=_metadata(args, info, args.frozen_meta))
    for i, k in enumerate(curve.x):
        table.append(k, curve.mean_error[i], curve.stderr[i], curve.n_tasks)
    _emit(table, args, [f"keep={k} error={curve.mean_error[i]:.5f}"
                        for i, k in enumerate(curve.x)])


def _cmd_wayshot_grid(args) -> None:
    source, info = _load_source(args)
    cfg = _experiment_config(args, source)
    print(f"wayshot-grid: {len(cfg.ways)}x{len(cfg.shots)} cells",
          file=sys.stderr)
    cells = run_wayshot_grid(cfg)
    table = ResultsTable(
        columns=["way", "shot", "full_error", "full_stderr", "best_error",
                 "best_stderr", "best_keep"],
        metadata=_metadata(args, info, args.frozen_meta))
    for c in cells:
        table.append(c.way, c.shot, c.full_error, c.full_stderr, c.best_error,
                     c.best_stderr, c.best_keep)
    _emit(table, args,
          [f"way={c.way} shot={c.shot} full={c.full_error:.5f} "
           f"best={c.best_error:.5f} best_keep={c.best_keep}" for c in cells])


def _cmd_fi_quality(args) -> None:
    source, info = _load_source(args)
    lines = []
    tables = []
    for shot in args.shots:
        cfg = replace(_experiment_config(args, source), shots=(shot,))
        rep = run_fi_quality(cfg)
        tables.append((shot, rep))
        avg_raw = float(rep.raw.std.mean())
        line = f"shot={shot} raw_avg_std={avg_raw:.5f}"
        if rep.augmented is not None:
            line += f" aug_avg_std={float(rep.augmented.std.mean()):.5f}"
        lines.append(line)
    table = ResultsTable(
        columns=["shot", "rank", "oracle_mean", "oracle_std", "raw_mean",
                 "raw_std", "aug_mean", "aug_std"],
        metadata=_metadata(args, info, args.frozen_meta))
    for shot, rep in tables:
        for r in range(rep.oracle.mean.size):
            aug_m = rep.augmented.mean[r] if rep.augmented is not None else ""
            aug_s = rep.augmented.std[r] if rep.augmented is not None else ""
            table.append(shot, r, rep.oracle.mean[r], rep.oracle.std[r],
                         rep.raw.mean[r], rep.raw.std[r], aug_m, aug_s)
    _emit(table, args, lines)


def _cmd_topk_freq(args) -> None:
    if not args.data:
        raise ValidationError("topk-freq needs --data")
    data = read_feature_file(args.data)
    rep = run_topk_frequency(data, args.k)
    table = ResultsTable(
        columns=["dim", "fi_count", "magnitude_count"],
        metadata=_metadata(args, {"data": args.data,
                                  "magnitude_note": "mean |feature| over the "
                                  "task's samples"}, args.frozen_meta))
    for d in range(rep.fi_counts.size):
        table.append(d, int(rep.fi_counts[d]), int(rep.magnitude_counts[d]))
    _emit(table, args, [f"n_pairs={rep.n_pairs} k={rep.k}"])


def _cmd_adjust_eval(args) -> None:
    source, info = _load_source(args)
    cfg = _experiment_config(args, source)
    print(f"adjust-eval: {cfg.n_tasks} tasks", file=sys.stderr)
    rep = run_adjust_eval(cfg)
    table = ResultsTable(
        columns=["baseline_acc", "baseline_stderr", "adjusted_acc",
                 "adjusted_stderr", "delta", "delta_stderr", "n_tasks"],
        metadata=_metadata(args, info, args.frozen_meta))
    table.append(rep.baseline_acc, rep.baseline_stderr, rep.adjusted_acc,
                 rep.adjusted_stderr, rep.delta, rep.delta_stderr, rep.n_tasks)
    _emit(table, args,
          [f"baseline={rep.baseline_acc:.4f} adjusted={rep.adjusted_acc:.4f} "
           f"delta={rep.delta:+.4f}"])


def _cmd_ffsb_info(args) -> None:
    data = read_feature_file(args.path)
    counts = np.bincount(data.labels, minlength=data.n_classes)
    print(f"n_samples={data.n_samples}")
    print(f"dim={data.dim}")
    print(f"n_classes={data.n_classes}")
    print(f"has_groups={int(data.groups is not None)}")
    if data.groups is not None:
        print(f"n_groups={np.unique(data.groups).size}")
    print("class_counts=" + ",".join(str(int(c)) for c in counts))


_COMMANDS = {
    "table1": _cmd_table1,
    "thm1-check": _cmd_thm1_check,
    "thm1-verify": _cmd_thm1_verify,
    "thm2-gap": _cmd_thm2_gap,
    "mask-sweep": _cmd_mask_sweep,
    "wayshot-grid": _cmd_wayshot_grid,
    "fi-quality": _cmd_fi_quality,
    "topk-freq": _cmd_topk_freq,
    "adjust-eval": _cmd_adjust_eval,
    "ffsb-info": _cmd_ffsb_info,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"fiprobe: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"fiprobe: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
