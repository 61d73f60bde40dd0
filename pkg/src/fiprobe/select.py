"""Dimension ranking, hard masking and the soft-mask feature adjustment.

Hard masking zeroes every dimension outside the top-k of an importance
ranking (zeroing keeps classifier shapes stable across a sweep). The soft
mask rescales each dimension so the overall per-dimension mean magnitude
becomes proportional to its importance, with one global factor preserving
the mean squared feature norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LabeledFeatureSet, ValidationError
from .stats import ClassStats, ImportanceVector

__all__ = [
    "MaskSpec",
    "ScaleVector",
    "rank_dimensions",
    "hard_mask",
    "soft_mask_scales",
    "apply_scales",
]

# relative floor keeping suppressed-dimension scales positive (ScaleVector
# invariant) while still effectively zeroing them
_SCALE_FLOOR_REL = 1e-12


@dataclass(frozen=True)
class MaskSpec:
    """Keep the top keep_count dimensions of a ranking, zero the rest."""

    keep_count: int
    ranking: np.ndarray  # permutation of 0..dim-1, most important first

    def __post_init__(self):
        r = np.ascontiguousarray(self.ranking, dtype=np.int64)
        if sorted(r.tolist()) != list(range(r.size)):
            raise ValidationError("ranking is not a permutation")
        if not 1 <= self.keep_count <= r.size:
            raise ValidationError(
                f"keep_count {self.keep_count} outside [1, {r.size}]")
        object.__setattr__(self, "ranking", r)

    def kept(self) -> np.ndarray:
        return self.ranking[:self.keep_count]

    def mask(self) -> np.ndarray:
        m = np.zeros(self.ranking.size, dtype=bool)
        m[self.kept()] = True
        return m


@dataclass(frozen=True)
class ScaleVector:
    """Positive per-dimension scales, optionally norm-preserving."""

    s: np.ndarray
    norm_preserving: bool = True
    warning: str | None = None

    def __post_init__(self):
        s = np.ascontiguousarray(self.s, dtype=np.float64)
        if s.ndim != 1 or not np.isfinite(s).all() or np.any(s <= 0):
            raise ValidationError("scales must be finite and > 0")
        object.__setattr__(self, "s", s)


def rank_dimensions(omega: ImportanceVector) -> np.ndarray:
    """Dimensions ordered by descending importance, ties to the lower index."""
    return np.argsort(-omega.omega, kind="stable")


def hard_mask(data: LabeledFeatureSet, mask: MaskSpec) -> LabeledFeatureSet:
    """Zero all dimensions outside the mask's top keep_count."""
    if mask.ranking.size != data.dim:
        raise ValidationError("mask dimension does not match data")
    feats = data.features * mask.mask()
    return LabeledFeatureSet(feats, data.labels, data.n_classes, data.groups)


def soft_mask_scales(omega: ImportanceVector, stats: ClassStats,
                     eps: float = 1e-6) -> ScaleVector:
    """Per-dimension scales making the overall mean magnitude proportional to omega.

    Raw scale omega_k / (|mu_k| + eps), then one global factor chosen so the
    mean squared row norm of the adjusted training features matches the
    unadjusted ones (reconstructed from stats). All-zero importance yields
    identity scales with a warning.
    """
    if omega.dim != stats.dim:
        raise ValidationError("omega and stats dimension mismatch")
    if eps < 0:
        raise ValidationError("eps must be >= 0")
    if not np.any(omega.omega > 0):
        return ScaleVector(np.ones(omega.dim), norm_preserving=False,
                           warning="all importances are zero; identity scales")
    raw = omega.omega / (np.abs(stats.overall_mean) + eps)
    if not np.isfinite(raw).all():
        raise ValidationError("non-finite raw scales; increase eps")
    target = stats.mean_squared_row_norm()
    adjusted = stats.mean_squared_row_norm(raw)
    if adjusted <= 0 or target <= 0:
        return ScaleVector(np.ones(omega.dim), norm_preserving=False,
                           warning="degenerate feature norms; identity scales")
    s = raw * np.sqrt(target / adjusted)
    s = np.maximum(s, s.max() * _SCALE_FLOOR_REL)
    return ScaleVector(s, norm_preserving=True)


def apply_scales(data: LabeledFeatureSet, scales: ScaleVector) -> LabeledFeatureSet:
    """Multiply each feature column by its scale; labels and groups unchanged."""
    if scales.s.size != data.dim:
        raise ValidationError("scales dimension does not match data")
    return LabeledFeatureSet(data.features * scales.s, data.labels,
                             data.n_classes, data.groups)
