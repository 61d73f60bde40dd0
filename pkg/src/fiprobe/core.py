"""Core domain types and episodic task sampling.

A LabeledFeatureSet is an immutable (features, labels) bundle, optionally
carrying view-group ids for augmented samples. An Episode is a C-way K-shot
task with disjoint train/query splits. All sampling is driven by explicitly
derived 64-bit seeds so every experiment is reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ValidationError",
    "LabeledFeatureSet",
    "Episode",
    "SeedSpec",
    "derive_task_seed",
    "sample_episode",
]


class ValidationError(ValueError):
    """Raised when a domain-type invariant or an operation precondition fails."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class LabeledFeatureSet:
    """N x dim feature matrix with class labels and optional view groups.

    Samples sharing a group id are augmented views of one underlying sample;
    they always share one label. Arrays are stored read-only; instances are
    safe to share across workers.
    """

    features: np.ndarray            # (n, dim) float64
    labels: np.ndarray              # (n,) int64 in [0, n_classes)
    n_classes: int
    groups: np.ndarray | None = None  # (n,) int64 view-group ids

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            raise ValidationError(f"features must be 2-d, got shape {feats.shape}")
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if labels.shape != (feats.shape[0],):
            raise ValidationError(
                f"labels shape {labels.shape} does not match {feats.shape[0]} rows")
        if self.n_classes < 1:
            raise ValidationError("n_classes must be >= 1")
        if labels.size == 0:
            raise ValidationError("feature set is empty")
        bad = np.nonzero((labels < 0) | (labels >= self.n_classes))[0]
        if bad.size:
            raise ValidationError(
                f"label {labels[bad[0]]} at row {bad[0]} outside [0, {self.n_classes})")
        present = np.bincount(labels, minlength=self.n_classes)
        missing = np.nonzero(present == 0)[0]
        if missing.size:
            raise ValidationError(f"class {missing[0]} has no samples")
        nonfinite = np.nonzero(~np.isfinite(feats).all(axis=1))[0]
        if nonfinite.size:
            raise ValidationError(f"non-finite feature values at row {nonfinite[0]}")
        groups = self.groups
        if groups is not None:
            groups = np.ascontiguousarray(groups, dtype=np.int64)
            if groups.shape != labels.shape:
                raise ValidationError("groups shape does not match labels")
            # all views in a group must share one label
            order = np.argsort(groups, kind="stable")
            gs, ls = groups[order], labels[order]
            new_grp = np.ones(gs.size, dtype=bool)
            new_grp[1:] = gs[1:] != gs[:-1]
            ref = np.maximum.accumulate(np.where(new_grp, np.arange(gs.size), 0))
            mismatch = np.nonzero(ls != ls[ref])[0]
            if mismatch.size:
                raise ValidationError(
                    f"group {gs[mismatch[0]]} mixes labels "
                    f"{ls[ref[mismatch[0]]]} and {ls[mismatch[0]]}")
            object.__setattr__(self, "groups", _readonly(groups))
        object.__setattr__(self, "features", _readonly(feats))
        object.__setattr__(self, "labels", _readonly(labels))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def class_rows(self, c: int) -> np.ndarray:
        """Row indices of class c, in storage order."""
        return np.nonzero(self.labels == c)[0]

    def base_units(self, c: int) -> list[np.ndarray]:
        """Row-index blocks of class c counting each view group once.

        Without groups every row is its own unit. Units are ordered by first
        occurrence so the episode sampler is deterministic.
        """
        rows = self.class_rows(c)
        if self.groups is None:
            return [rows[i:i + 1] for i in range(rows.size)]
        gids = self.groups[rows]
        _, first = np.unique(gids, return_index=True)
        units = []
        for i in np.sort(first):
            units.append(rows[gids == gids[i]])
        return units


@dataclass(frozen=True)
class Episode:
    """A C-way K-shot task: train split plus query split.

    The train split holds exactly way*shot base samples (view groups counted
    once); both splits share the feature dimension and the 0..way-1 label
    space. class_map records which source class each episode label came from
    (identity when the episode was synthesized directly).
    """

    way: int
    shot: int
    train: LabeledFeatureSet
    query: LabeledFeatureSet
    task_id: int = 0
    class_map: np.ndarray | None = None

    def __post_init__(self):
        if self.class_map is None:
            object.__setattr__(self, "class_map",
                               np.arange(self.way, dtype=np.int64))
        else:
            object.__setattr__(self, "class_map",
                               _readonly(np.ascontiguousarray(self.class_map,
                                                              dtype=np.int64)))
        if self.way < 2:
            raise ValidationError("way must be >= 2")
        if self.shot < 1:
            raise ValidationError("shot must be >= 1")
        if self.train.dim != self.query.dim:
            raise ValidationError("train/query dimension mismatch")
        if self.train.n_classes != self.way or self.query.n_classes != self.way:
            raise ValidationError("episode class space must be exactly 0..way-1")
        if self.query.n_samples == 0:
            raise ValidationError("query split is empty")
        for c in range(self.way):
            n_units = len(self.train.base_units(c))
            if n_units != self.shot:
                raise ValidationError(
                    f"train class {c} has {n_units} base samples, expected {self.shot}")

    @property
    def dim(self) -> int:
        return self.train.dim


@dataclass(frozen=True)
class SeedSpec:
    """Pair (base_seed, task_index) from which a per-task seed is derived."""

    base_seed: int
    task_index: int


_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def derive_task_seed(spec: SeedSpec) -> int:
    """Derive a 64-bit per-task seed via the splitmix64 output function.

    Equals output number task_index of a splitmix64 stream seeded with
    base_seed, so distinct indices give independent-looking seeds and the
    mapping is stable across platforms.
    """
    z = (spec.base_seed + (spec.task_index + 1) * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def sample_episode(data: LabeledFeatureSet, way: int, shot: int,
                   query_per_class: int, seed: int, task_id: int = 0) -> Episode:
    """Sample a C-way K-shot episode from a feature set.

    Classes are drawn without replacement and relabeled 0..way-1 in draw
    order. Within each class, shot+query_per_class base samples are drawn
    without replacement; the first shot go to train, the rest to query.
    Views of a drawn base sample travel with it. Deterministic given seed.
    """
    if way < 2:
        raise ValidationError("way must be >= 2")
    if shot < 1 or query_per_class < 1:
        raise ValidationError("shot and query_per_class must be >= 1")
    if data.n_classes < way:
        raise ValidationError(
            f"insufficient classes: have {data.n_classes}, need {way}")
    rng = np.random.Generator(np.random.PCG64(seed))
    chosen = rng.choice(data.n_classes, size=way, replace=False)
    need = shot + query_per_class
    tr_rows: list[np.ndarray] = []
    tr_labels: list[np.ndarray] = []
    q_rows: list[np.ndarray] = []
    q_labels: list[np.ndarray] = []
    for new_label, orig in enumerate(chosen):
        units = data.base_units(int(orig))
        if len(units) < need:
            raise ValidationError(
                f"insufficient samples in class {orig}: "
                f"have {len(units)} base samples, need {need}")
        picked = rng.choice(len(units), size=need, replace=False)
        for j, u in enumerate(picked):
            rows = units[u]
            dest_r, dest_l = (tr_rows, tr_labels) if j < shot else (q_rows, q_labels)
            dest_r.append(rows)
            dest_l.append(np.full(rows.size, new_label, dtype=np.int64))
    tr_idx = np.concatenate(tr_rows)
    q_idx = np.concatenate(q_rows)
    tr_groups = data.groups[tr_idx] if data.groups is not None else None
    q_groups = data.groups[q_idx] if data.groups is not None else None
    train = LabeledFeatureSet(data.features[tr_idx], np.concatenate(tr_labels),
                              way, tr_groups)
    query = LabeledFeatureSet(data.features[q_idx], np.concatenate(q_labels),
                              way, q_groups)
    return Episode(way=way, shot=shot, train=train, query=query,
                   task_id=task_id, class_map=np.asarray(chosen, dtype=np.int64))
