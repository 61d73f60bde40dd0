"""Class statistics, the standard-normal CDF and the feature-importance estimators.

Feature importance of dimension k for a binary task is
|mu_1k - mu_2k| / (sigma_1k + sigma_2k); multi-class importance averages this
over all class pairs. The estimators differ only in where the class means and
stds come from: population statistics (oracle), raw episode samples, or
episode samples pooled with augmented views.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import ndtr

from .core import LabeledFeatureSet, ValidationError

__all__ = [
    "VariancePolicy",
    "ClassStats",
    "ImportanceVector",
    "class_stats",
    "normal_cdf",
    "importance_binary",
    "importance_multiclass",
    "importance_estimated",
]

OMEGA_CAP = 1e6  # ruling value for zero-denominator dims with distinct means


@dataclass(frozen=True)
class VariancePolicy:
    """How per-class stds are obtained: unbiased sample stds or a fixed value."""

    kind: str            # "sample" | "fixed"
    value: float = 1.0   # the fixed std (kind == "fixed")

    def __post_init__(self):
        if self.kind not in ("sample", "fixed"):
            raise ValidationError(f"unknown variance policy {self.kind!r}")
        if self.kind == "fixed" and not (np.isfinite(self.value) and self.value >= 0):
            raise ValidationError("fixed std must be finite and >= 0")

    @classmethod
    def sample_std(cls) -> "VariancePolicy":
        return cls("sample")

    @classmethod
    def fixed(cls, value: float = 1.0) -> "VariancePolicy":
        return cls("fixed", float(value))


@dataclass(frozen=True)
class ClassStats:
    """Per-class per-dimension means/stds plus the overall per-dimension mean.

    overall_mean is the unweighted mean of the per-class means (the binary
    (mu_1k+mu_2k)/2 generalized). population=True marks closed-form statistics
    of a task distribution rather than sample estimates; it changes only how
    feature norms are reconstructed downstream.
    """

    means: np.ndarray    # (C, dim)
    stds: np.ndarray     # (C, dim) >= 0
    counts: np.ndarray   # (C,) samples per class (views included)
    population: bool = False

    def __post_init__(self):
        if self.means.shape != self.stds.shape or self.means.ndim != 2:
            raise ValidationError("means/stds must be matching (C, dim) arrays")
        if np.any(self.stds < 0):
            raise ValidationError("stds must be >= 0")

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def overall_mean(self) -> np.ndarray:
        return self.means.mean(axis=0)

    def mean_squared_row_norm(self, scales: np.ndarray | None = None) -> float:
        """Mean squared row norm of the (optionally rescaled) features.

        For sample statistics this reconstructs (1/N) sum_i ||s*z_i||^2
        exactly from the unbiased stds; for population statistics it is the
        expectation E||s*z||^2 under equal class weights.
        """
        s2 = np.ones(self.dim) if scales is None else np.asarray(scales) ** 2
        if self.population:
            per_class = (self.means ** 2 + self.stds ** 2) @ s2
            return float(per_class.mean())
        n = self.counts.astype(np.float64)
        per_class = (n[:, None] * self.means ** 2
                     + (n - 1.0)[:, None] * self.stds ** 2) @ s2
        return float(per_class.sum() / n.sum())


@dataclass(frozen=True)
class ImportanceVector:
    """Per-dimension importance omega >= 0 with estimation provenance.

    capped marks dimensions whose zero std-sum forced the OMEGA_CAP value.
    """

    omega: np.ndarray
    provenance: str      # "oracle" | "estimated-raw" | "estimated-augmented"
    capped: np.ndarray | None = None

    def __post_init__(self):
        om = np.ascontiguousarray(self.omega, dtype=np.float64)
        if om.ndim != 1:
            raise ValidationError("omega must be a vector")
        if not np.isfinite(om).all() or np.any(om < 0):
            raise ValidationError("omega entries must be finite and >= 0")
        if self.provenance not in ("oracle", "estimated-raw", "estimated-augmented"):
            raise ValidationError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "omega", om)
        if self.capped is None:
            object.__setattr__(self, "capped", np.zeros(om.size, dtype=bool))

    @property
    def dim(self) -> int:
        return self.omega.size


def class_stats(data: LabeledFeatureSet,
                variance_policy: VariancePolicy) -> ClassStats:
    """Per-class means and stds of a feature set.

    Means are arithmetic; stds are unbiased (n-1) sample stds under the
    sample policy or the fixed constant otherwise. Views count as ordinary
    samples of their class.
    """
    C, m = data.n_classes, data.dim
    means = np.empty((C, m))
    stds = np.empty((C, m))
    counts = np.empty(C, dtype=np.int64)
    for c in range(C):
        rows = data.features[data.labels == c]
        counts[c] = rows.shape[0]
        means[c] = rows.mean(axis=0)
        if variance_policy.kind == "fixed":
            stds[c] = variance_policy.value
        else:
            if rows.shape[0] < 2:
                raise ValidationError(
                    f"sample-std policy needs >= 2 samples, class {c} has "
                    f"{rows.shape[0]}")
            stds[c] = rows.std(axis=0, ddof=1)
    return ClassStats(means=means, stds=stds, counts=counts)


def normal_cdf(x):
    """Standard normal CDF Phi(x), accurate to well below 1e-10.

    Evaluated through the complementary error function; accepts scalars or
    arrays. Every closed-form expression in this package routes through here
    so results are bit-reproducible.
    """
    out = ndtr(x)
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def _pair_omega(mu1, mu2, s1, s2):
    num = np.abs(mu1 - mu2)
    den = s1 + s2
    omega = np.zeros_like(num)
    ok = den > 0
    omega[ok] = num[ok] / den[ok]
    capped = (~ok) & (num > 0)
    omega[capped] = OMEGA_CAP
    return omega, capped


def importance_binary(stats: ClassStats, classes: tuple[int, int] = (0, 1),
                      provenance: str = "oracle") -> ImportanceVector:
    """Eq.-style binary feature importance |mu1-mu2|/(sigma1+sigma2).

    Dimensions with equal means and zero std-sum get omega 0; distinct means
    over a zero std-sum get the OMEGA_CAP value with the capped flag set.
    """
    c1, c2 = classes
    omega, capped = _pair_omega(stats.means[c1], stats.means[c2],
                                stats.stds[c1], stats.stds[c2])
    return ImportanceVector(omega=omega, provenance=provenance, capped=capped)


def importance_multiclass(data: LabeledFeatureSet,
                          variance_policy: VariancePolicy,
                          provenance: str = "oracle") -> ImportanceVector:
    """Mean of the binary importance over all C(C,2) class pairs."""
    if data.n_classes < 2:
        raise ValidationError("need >= 2 classes for feature importance")
    stats = class_stats(data, variance_policy)
    return multiclass_from_stats(stats, provenance)


def multiclass_from_stats(stats: ClassStats,
                          provenance: str = "oracle") -> ImportanceVector:
    """Pairwise-averaged importance computed from prebuilt class statistics."""
    if stats.n_classes < 2:
        raise ValidationError("need >= 2 classes for feature importance")
    acc = np.zeros(stats.dim)
    capped = np.zeros(stats.dim, dtype=bool)
    n_pairs = 0
    for c1, c2 in combinations(range(stats.n_classes), 2):
        om, cap = _pair_omega(stats.means[c1], stats.means[c2],
                              stats.stds[c1], stats.stds[c2])
        acc += om
        capped |= cap
        n_pairs += 1
    return ImportanceVector(omega=acc / n_pairs, provenance=provenance,
                            capped=capped)


def importance_estimated(episode_train: LabeledFeatureSet,
                         policy: VariancePolicy | None = None) -> ImportanceVector:
    """Feature importance estimated from an episode's train split.

    With policy None the sample-std policy is used whenever every class has
    >= 2 rows (augmented views pooled into their class count), otherwise the
    fixed unit-variance 1-shot policy. Provenance records whether views were
    present.
    """
    counts = np.bincount(episode_train.labels, minlength=episode_train.n_classes)
    if policy is None:
        policy = (VariancePolicy.sample_std() if counts.min() >= 2
                  else VariancePolicy.fixed(1.0))
    provenance = ("estimated-augmented" if episode_train.groups is not None
                  else "estimated-raw")
    return importance_multiclass(episode_train, policy, provenance)
