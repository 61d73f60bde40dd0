"""Episodic Monte Carlo experiments: Table-1 cells, masking sweeps, way/shot
grids, estimator-quality curves, top-k frequency counts and soft-mask
evaluation.

Every operation is a deterministic function of (config, base_seed): task t at
shot s always consumes the generator task_rng(base_seed, t, s) in the fixed
order train draw, view draw, query draw. Reductions run in task order, so
results are identical for any worker count. On a Gaussian source the NCC test
error is evaluated in closed form per draw; logistic cells sample
query_per_class points per class (10000 by default) like the quantitative
table.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Episode, LabeledFeatureSet, SeedSpec, ValidationError, derive_task_seed, sample_episode
from .stats import (ClassStats, ImportanceVector, VariancePolicy, class_stats,
                    importance_binary, multiclass_from_stats)
from .select import MaskSpec, ScaleVector, apply_scales, hard_mask, rank_dimensions, soft_mask_scales
from .classify import FitConfig, evaluate, fit_logreg, fit_ncc
from .gaussian import (GaussianTaskSpec, add_views, draw_query, draw_train,
                       ncc_test_error_balanced, task_rng)

__all__ = [
    "ExperimentConfig",
    "SweepCurve",
    "AggregateStat",
    "Table1Report",
    "WayShotCell",
    "FiQualityReport",
    "TopkReport",
    "AdjustEvalReport",
    "run_table1",
    "run_mask_sweep",
    "run_wayshot_grid",
    "run_fi_quality",
    "run_topk_frequency",
    "run_adjust_eval",
]

_ADJUST_MODES = ("none", "oracle", "estimated", "estimated-augmented")
_CLASSIFIERS = ("ncc", "logreg")
_DEFAULT_GAUSSIAN_QUERY = 10000
_DEFAULT_FILE_QUERY = 15


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep axes and evaluation choices for one harness run."""

    source: GaussianTaskSpec | LabeledFeatureSet
    ways: tuple[int, ...] = (2,)
    shots: tuple[int, ...] = (1,)
    query_per_class: int | None = None
    n_tasks: int = 2000
    keep_counts: tuple[int, ...] = ()
    adjust: str = "none"
    classifier: str = "ncc"
    views: int = 5
    rho: float = 0.5
    base_seed: int = 0
    workers: int = 1
    rank_fi: str = "oracle"
    fit: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        if self.n_tasks < 1:
            raise ValidationError("n_tasks must be >= 1")
        if self.adjust not in _ADJUST_MODES:
            raise ValidationError(f"unknown adjust mode {self.adjust!r}")
        if self.classifier not in _CLASSIFIERS:
            raise ValidationError(f"unknown classifier {self.classifier!r}")
        if self.rank_fi not in ("oracle", "estimated", "estimated-augmented"):
            raise ValidationError(f"unknown rank_fi {self.rank_fi!r}")
        if self.views < 0 or self.rho < 0:
            raise ValidationError("views and rho must be >= 0")
        ks = tuple(int(k) for k in self.keep_counts)
        if list(ks) != sorted(set(ks)):
            raise ValidationError("keep_counts must be ascending and unique")
        for k in ks:
            if not 1 <= k <= self.dim:
                raise ValidationError(
                    f"keep value {k} outside [1, {self.dim}]")
        object.__setattr__(self, "keep_counts", ks)
        object.__setattr__(self, "ways", tuple(int(w) for w in self.ways))
        object.__setattr__(self, "shots", tuple(int(s) for s in self.shots))

    @property
    def is_gaussian(self) -> bool:
        return isinstance(self.source, GaussianTaskSpec)

    @property
    def dim(self) -> int:
        return self.source.dim

    @property
    def query_count(self) -> int:
        if self.query_per_class is not None:
            return self.query_per_class
        return _DEFAULT_GAUSSIAN_QUERY if self.is_gaussian else _DEFAULT_FILE_QUERY


@dataclass(frozen=True)
class SweepCurve:
    """Mean test error with std-error over tasks, per sweep point."""

    x: tuple[int, ...]
    mean_error: np.ndarray
    stderr: np.ndarray
    n_tasks: int


@dataclass(frozen=True)
class AggregateStat:
    """Per-rank (or per-dimension) mean and std of a statistic."""

    mean: np.ndarray
    std: np.ndarray


@dataclass(frozen=True)
class Table1Report:
    """The six quantitative-table cells as accuracy percentages."""

    accuracy: dict
    stderr: dict
    n_tasks: int

    CELLS = ("1shot_1dim", "1shot_2dim", "logreg500_1dim", "logreg500_2dim",
             "ncc500_1dim", "ncc500_2dim")


@dataclass(frozen=True)
class WayShotCell:
    way: int
    shot: int
    full_error: float
    full_stderr: float
    best_error: float
    best_stderr: float
    best_keep: int


@dataclass(frozen=True)
class FiQualityReport:
    """Estimated-importance statistics grouped by oracle-importance rank."""

    oracle: AggregateStat
    raw: AggregateStat
    augmented: AggregateStat | None
    shot: int
    n_tasks: int


@dataclass(frozen=True)
class TopkReport:
    fi_counts: np.ndarray
    magnitude_counts: np.ndarray
    n_pairs: int
    k: int


@dataclass(frozen=True)
class AdjustEvalReport:
    """Paired baseline vs soft-mask accuracies (percent) and their delta."""

    baseline_acc: float
    baseline_stderr: float
    adjusted_acc: float
    adjusted_stderr: float
    delta: float
    delta_stderr: float
    n_tasks: int


# ---------------------------------------------------------------------------
# deterministic task mapping

_CTX = None


def _set_ctx(fn, cfg, extra):
    global _CTX
    _CTX = (fn, cfg, extra)


def _call_ctx(t):
    fn, cfg, extra = _CTX
    return fn(cfg, extra, t)


def _run_tasks(fn, cfg: ExperimentConfig, extra, n_tasks: int) -> list:
    if cfg.workers <= 1:
        return [fn(cfg, extra, t) for t in range(n_tasks)]
    chunk = max(1, n_tasks // (8 * cfg.workers))
    with ProcessPoolExecutor(max_workers=cfg.workers, initializer=_set_ctx,
                             initargs=(fn, cfg, extra)) as pool:
        return list(pool.map(_call_ctx, range(n_tasks), chunksize=chunk))


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def _centroids(train: LabeledFeatureSet) -> np.ndarray:
    P = np.empty((train.n_classes, train.dim))
    for c in range(train.n_classes):
        P[c] = train.features[train.labels == c].mean(axis=0)
    return P


# ---------------------------------------------------------------------------
# Table 1

def run_table1(cfg: ExperimentConfig) -> Table1Report:
    """Reproduce the six-cell quantitative table on a 2-d Gaussian source.

    Per task the 1-shot cells share one training draw evaluated in closed
    form (NCC and linear probing coincide at one shot); the 500-shot cells
    share another draw, closed form for NCC and fitted logistic regression
    evaluated on one sampled query set for linear probing.
    """
    if not cfg.is_gaussian or cfg.dim != 2:
        raise ValidationError("table1 requires a 2-dimensional gaussian source")
    rows = np.array(_run_tasks(_table1_task, cfg, None, cfg.n_tasks))
    acc, se = {}, {}
    for i, cell in enumerate(Table1Report.CELLS):
        m, s = _mean_se(100.0 * (1.0 - rows[:, i]))
        acc[cell], se[cell] = m, s
    return Table1Report(accuracy=acc, stderr=se, n_tasks=cfg.n_tasks)


def _table1_task(cfg: ExperimentConfig, extra, t: int):
    spec = cfg.source
    rng1 = task_rng(cfg.base_seed, t, 1)
    tr1 = draw_train(spec, 1, rng1)
    c1 = _centroids(tr1)
    e1_one = ncc_test_error_balanced(spec, c1, (0,))
    e1_two = ncc_test_error_balanced(spec, c1, (0, 1))

    rng500 = task_rng(cfg.base_seed, t, 500)
    tr = draw_train(spec, 500, rng500)
    c500 = _centroids(tr)
    ncc_one = ncc_test_error_balanced(spec, c500, (0,))
    ncc_two = ncc_test_error_balanced(spec, c500, (0, 1))

    clf2 = fit_logreg(tr, cfg.fit)
    tr1d = LabeledFeatureSet(tr.features[:, :1], tr.labels, 2)
    clf1 = fit_logreg(tr1d, cfg.fit)
    qry = draw_query(spec, cfg.query_count, rng500)
    lr_two = evaluate(clf2, qry)
    lr_one = float((clf1.predict(qry.features[:, :1]) != qry.labels).mean())
    return (e1_one, e1_two, lr_one, lr_two, ncc_one, ncc_two)


# ---------------------------------------------------------------------------
# oracle importance per task

def _file_oracle(data: LabeledFeatureSet) -> ClassStats:
    """Full-file statistics as the population proxy for ingested features."""
    return class_stats(data, VariancePolicy.sample_std())


def _task_oracle(cfg: ExperimentConfig, extra, class_map) -> ImportanceVector:
    if cfg.is_gaussian:
        return cfg.source.oracle_importance()
    stats: ClassStats = extra
    sub = ClassStats(means=stats.means[class_map], stds=stats.stds[class_map],
                     counts=stats.counts[class_map])
    return multiclass_from_stats(sub, provenance="oracle")


def _task_oracle_stats(cfg: ExperimentConfig, extra, class_map) -> ClassStats:
    if cfg.is_gaussian:
        return cfg.source.population_stats()
    stats: ClassStats = extra
    return ClassStats(means=stats.means[class_map], stds=stats.stds[class_map],
                      counts=stats.counts[class_map])


def _needs_views(cfg: ExperimentConfig) -> bool:
    return "augmented" in cfg.adjust or "augmented" in cfg.rank_fi


def _draw_task_episode(cfg: ExperimentConfig, t: int, way: int, shot: int,
                       want_query: bool):
    """Build (train, query|None, class_map, rng) with the fixed stream order
    train -> views -> query."""
    if cfg.is_gaussian:
        if way != 2:
            raise ValidationError("gaussian sources are binary (way must be 2)")
        rng = task_rng(cfg.base_seed, t, shot)
        train = draw_train(cfg.source, shot, rng)
        if _needs_views(cfg):
            if cfg.views < 1:
                raise ValidationError("augmented estimation needs views >= 1")
            train = add_views(cfg.source, train, cfg.views, cfg.rho, rng)
        query = draw_query(cfg.source, cfg.query_count, rng) if want_query else None
        return train, query, np.arange(2), rng
    seed1 = derive_task_seed(SeedSpec(cfg.base_seed, t))
    seed = derive_task_seed(SeedSpec(seed1, shot))
    ep = sample_episode(cfg.source, way, shot, cfg.query_count, seed, task_id=t)
    if _needs_views(cfg) and ep.train.groups is None:
        raise ValidationError(
            "augmented estimation on a feature file needs view groups")
    return ep.train, ep.query, ep.class_map, None


def _estimation_pool(cfg: ExperimentConfig, train: LabeledFeatureSet,
                     augmented: bool) -> LabeledFeatureSet:
    """The rows feeding FI/stat estimation: base only, or base plus views."""
    if augmented or train.groups is None:
        return train
    # strip views: first row of each base unit
    keep = []
    for c in range(train.n_classes):
        keep.extend(unit[0] for unit in train.base_units(c))
    idx = np.sort(np.array(keep, dtype=np.int64))
    return LabeledFeatureSet(train.features[idx], train.labels[idx],
                             train.n_classes, None)


def _estimated_importance(pool: LabeledFeatureSet) -> tuple[ImportanceVector, ClassStats]:
    counts = np.bincount(pool.labels, minlength=pool.n_classes)
    policy = (VariancePolicy.sample_std() if counts.min() >= 2
              else VariancePolicy.fixed(1.0))
    stats = class_stats(pool, policy)
    provenance = ("estimated-augmented" if pool.groups is not None
                  else "estimated-raw")
    return multiclass_from_stats(stats, provenance), stats


def _masked_adjust_scales(cfg: ExperimentConfig, extra, masked_train,
                          class_map, mask: np.ndarray) -> ScaleVector | None:
    """Soft-mask scales for the kept dimensions (mask applied first)."""
    if cfg.adjust == "none":
        return None
    if cfg.adjust == "oracle":
        omega = _task_oracle(cfg, extra, class_map)
        stats = _task_oracle_stats(cfg, extra, class_map)
        omega = ImportanceVector(omega.omega * mask, omega.provenance)
        stats = ClassStats(means=stats.means * mask, stds=stats.stds * mask,
                           counts=stats.counts, population=stats.population)
        return soft_mask_scales(omega, stats)
    pool = _estimation_pool(cfg, masked_train, cfg.adjust == "estimated-augmented")
    omega, stats = _estimated_importance(pool)
    return soft_mask_scales(omega, stats)


# ---------------------------------------------------------------------------
# masking sweep

def run_mask_sweep(cfg: ExperimentConfig) -> SweepCurve:
    """Test error over keep_counts: rank, hard-mask, optionally adjust, fit,
    evaluate. Closed-form NCC evaluation on Gaussian sources."""
    if not cfg.keep_counts:
        raise ValidationError("mask sweep needs keep_counts")
    extra = None if cfg.is_gaussian else _file_oracle(cfg.source)
    rows = np.array(_run_tasks(_mask_sweep_task, cfg, extra, cfg.n_tasks))
    means = rows.mean(axis=0)
    ses = (rows.std(axis=0, ddof=1) / np.sqrt(cfg.n_tasks)
           if cfg.n_tasks > 1 else np.zeros(rows.shape[1]))
    return SweepCurve(x=cfg.keep_counts, mean_error=means, stderr=ses,
                      n_tasks=cfg.n_tasks)


def _rank_importance(cfg: ExperimentConfig, extra, train, class_map):
    if cfg.rank_fi == "oracle":
        return _task_oracle(cfg, extra, class_map)
    pool = _estimation_pool(cfg, train, cfg.rank_fi == "estimated-augmented")
    omega, _ = _estimated_importance(pool)
    return omega


def _mask_sweep_task(cfg: ExperimentConfig, extra, t: int) -> np.ndarray:
    way, shot = cfg.ways[0], cfg.shots[0]
    want_query = not (cfg.is_gaussian and cfg.classifier == "ncc")
    train, query, class_map, _ = _draw_task_episode(cfg, t, way, shot, want_query)
    ranking = rank_dimensions(_rank_importance(cfg, extra, train, class_map))
    errs = np.empty(len(cfg.keep_counts))
    for i, keep in enumerate(cfg.keep_counts):
        mspec = MaskSpec(keep_count=keep, ranking=ranking)
        mask = mspec.mask().astype(np.float64)
        masked = hard_mask(train, mspec)
        scales = _masked_adjust_scales(cfg, extra, masked, class_map, mask)
        train_eval = masked if scales is None else apply_scales(masked, scales)
        errs[i] = _eval_error(cfg, train_eval, query, mspec, scales)
    return errs


def _eval_error(cfg: ExperimentConfig, train_eval, query, mspec: MaskSpec,
                scales: ScaleVector | None) -> float:
    kept = np.sort(mspec.kept())
    if cfg.is_gaussian and cfg.classifier == "ncc":
        spec = cfg.source if scales is None else cfg.source.scaled(scales.s)
        return ncc_test_error_balanced(spec, _centroids(train_eval), kept)
    qf = query.features * mspec.mask()
    if scales is not None:
        qf = qf * scales.s
    q_eval = LabeledFeatureSet(qf, query.labels, query.n_classes)
    clf = fit_ncc(train_eval) if cfg.classifier == "ncc" else fit_logreg(train_eval, cfg.fit)
    return evaluate(clf, q_eval)


# ---------------------------------------------------------------------------
# way/shot grid

def run_wayshot_grid(cfg: ExperimentConfig) -> list[WayShotCell]:
    """Full-feature error vs best-over-keep_counts error per (way, shot)."""
    keeps = cfg.keep_counts or _default_keep_grid(cfg.dim)
    if keeps[-1] != cfg.dim:
        keeps = keeps + (cfg.dim,)
    cells = []
    for way in cfg.ways:
        for shot in cfg.shots:
            sub = replace(cfg, ways=(way,), shots=(shot,), keep_counts=keeps)
            curve = run_mask_sweep(sub)
            full_i = len(keeps) - 1
            best_i = int(np.argmin(curve.mean_error))
            cells.append(WayShotCell(
                way=way, shot=shot,
                full_error=float(curve.mean_error[full_i]),
                full_stderr=float(curve.stderr[full_i]),
                best_error=float(curve.mean_error[best_i]),
                best_stderr=float(curve.stderr[best_i]),
                best_keep=keeps[best_i]))
    return cells


def _default_keep_grid(dim: int) -> tuple[int, ...]:
    ks = []
    k = 1
    while k < dim:
        ks.append(k)
        k *= 2
    ks.append(dim)
    return tuple(ks)


# ---------------------------------------------------------------------------
# estimator quality

def run_fi_quality(cfg: ExperimentConfig) -> FiQualityReport:
    """Mean/std of estimated importance grouped by oracle-importance rank.

    Produces the raw estimator and, when views are configured (or the file
    carries groups), the augmented estimator.
    """
    extra = None if cfg.is_gaussian else _file_oracle(cfg.source)
    with_aug = cfg.views > 0 if cfg.is_gaussian else (cfg.source.groups is not None)
    sub = replace(cfg, adjust="estimated-augmented" if with_aug else "estimated")
    rows = _run_tasks(_fi_quality_task, sub, extra, cfg.n_tasks)
    oracle = np.array([r[0] for r in rows])
    raw = np.array([r[1] for r in rows])
    report = FiQualityReport(
        oracle=AggregateStat(oracle.mean(0), oracle.std(0, ddof=1)),
        raw=AggregateStat(raw.mean(0), raw.std(0, ddof=1)),
        augmented=None, shot=cfg.shots[0], n_tasks=cfg.n_tasks)
    if with_aug:
        aug = np.array([r[2] for r in rows])
        report = replace(report,
                         augmented=AggregateStat(aug.mean(0), aug.std(0, ddof=1)))
    return report


def _fi_quality_task(cfg: ExperimentConfig, extra, t: int):
    way, shot = cfg.ways[0], cfg.shots[0]
    train, _, class_map, _ = _draw_task_episode(cfg, t, way, shot, False)
    oracle = _task_oracle(cfg, extra, class_map)
    order = rank_dimensions(oracle)
    raw_pool = _estimation_pool(cfg, train, augmented=False)
    raw, _ = _estimated_importance(raw_pool)
    out = [oracle.omega[order], raw.omega[order]]
    if train.groups is not None:
        aug, _ = _estimated_importance(train)
        out.append(aug.omega[order])
    return out


# ---------------------------------------------------------------------------
# top-k frequency

def run_topk_frequency(data: LabeledFeatureSet, k: int) -> TopkReport:
    """Membership counts over all binary tasks: top-k by oracle importance,
    and separately top-k by the task's mean absolute feature magnitude."""
    if data.n_classes < 2:
        raise ValidationError("need >= 2 classes")
    if not 1 <= k <= data.dim:
        raise ValidationError(f"k {k} outside [1, {data.dim}]")
    stats = _file_oracle(data)
    fi_counts = np.zeros(data.dim, dtype=np.int64)
    mag_counts = np.zeros(data.dim, dtype=np.int64)
    abs_means = np.empty((data.n_classes, data.dim))
    row_counts = np.empty(data.n_classes)
    for c in range(data.n_classes):
        rows = np.abs(data.features[data.labels == c])
        abs_means[c] = rows.mean(axis=0)
        row_counts[c] = rows.shape[0]
    n_pairs = 0
    for c1 in range(data.n_classes):
        for c2 in range(c1 + 1, data.n_classes):
            omega = importance_binary(stats, (c1, c2))
            fi_counts[rank_dimensions(omega)[:k]] += 1
            # magnitude averaged over the task's samples (both classes pooled)
            w1, w2 = row_counts[c1], row_counts[c2]
            mag = (abs_means[c1] * w1 + abs_means[c2] * w2) / (w1 + w2)
            top = np.argsort(-mag, kind="stable")[:k]
            mag_counts[top] += 1
            n_pairs += 1
    return TopkReport(fi_counts=fi_counts, magnitude_counts=mag_counts,
                      n_pairs=n_pairs, k=k)


# ---------------------------------------------------------------------------
# soft-mask evaluation

def run_adjust_eval(cfg: ExperimentConfig) -> AdjustEvalReport:
    """Paired baseline vs soft-mask accuracies from estimated importance."""
    if cfg.adjust not in ("estimated", "estimated-augmented"):
        raise ValidationError(
            "adjust-eval needs adjust = estimated or estimated-augmented")
    extra = None if cfg.is_gaussian else _file_oracle(cfg.source)
    rows = np.array(_run_tasks(_adjust_eval_task, cfg, extra, cfg.n_tasks))
    base_acc = 100.0 * (1.0 - rows[:, 0])
    adj_acc = 100.0 * (1.0 - rows[:, 1])
    bm, bs = _mean_se(base_acc)
    am, as_ = _mean_se(adj_acc)
    dm, ds = _mean_se(adj_acc - base_acc)
    return AdjustEvalReport(baseline_acc=bm, baseline_stderr=bs,
                            adjusted_acc=am, adjusted_stderr=as_,
                            delta=dm, delta_stderr=ds, n_tasks=cfg.n_tasks)


def _adjust_eval_task(cfg: ExperimentConfig, extra, t: int):
    way, shot = cfg.ways[0], cfg.shots[0]
    want_query = not (cfg.is_gaussian and cfg.classifier == "ncc")
    train, query, class_map, _ = _draw_task_episode(cfg, t, way, shot, want_query)
    pool = _estimation_pool(cfg, train, cfg.adjust == "estimated-augmented")
    omega, stats = _estimated_importance(pool)
    scales = soft_mask_scales(omega, stats)
    full = MaskSpec(keep_count=cfg.dim, ranking=np.arange(cfg.dim))
    err_base = _eval_error(cfg, train, query, full, None)
    err_adj = _eval_error(cfg, apply_scales(train, scales), query, full, scales)
    return err_base, err_adj
