"""Diagonal-Gaussian task model: samplers, closed-form errors, theorem checks.

The model draws class-y features from N(mu_y, diag(sigma^2)). For nearest
centroids and arbitrary linear boundaries the test error has a closed Phi
form, which the Monte Carlo verifiers evaluate per training draw so no test
sampling noise enters. The two theorem checks cover (1) when adding a
low-importance dimension hurts NCC regardless of shots, and (2) how the exact
empirical 0-1 minimizer's handicap from an extra dimension shrinks with
shots.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import Episode, LabeledFeatureSet, SeedSpec, ValidationError, derive_task_seed
from .stats import ClassStats, ImportanceVector, normal_cdf
from .classify import FitConfig, LinearClassifier, fit_erm01_1d, fit_erm01_2d, fit_logreg
from ._parallel import map_ordered

__all__ = [
    "GaussianTaskSpec",
    "TheoremReport",
    "BayesOptimal",
    "illustrative_spec",
    "redundancy_spec",
    "fi_bench_spec",
    "adjust_bench_spec",
    "builtin_spec",
    "task_rng",
    "sample_task",
    "simulate_views",
    "ncc_test_error_closed_form",
    "ncc_test_error_balanced",
    "linear_test_error_closed_form",
    "bayes_optimal_error",
    "centroid_order_prob",
    "theorem1_conditions",
    "theorem1_verify",
    "theorem2_gap",
]


@dataclass(frozen=True)
class GaussianTaskSpec:
    """Binary diagonal-Gaussian task: per-class means, shared per-dim stds."""

    means: np.ndarray   # (2, dim): row 0 class a, row 1 class b
    stds: np.ndarray    # (dim,) > 0

    def __post_init__(self):
        means = np.ascontiguousarray(self.means, dtype=np.float64)
        stds = np.ascontiguousarray(self.stds, dtype=np.float64)
        if means.ndim != 2 or means.shape[0] != 2:
            raise ValidationError("means must have shape (2, dim)")
        if stds.shape != (means.shape[1],):
            raise ValidationError("stds must have shape (dim,)")
        if not np.isfinite(means).all():
            raise ValidationError("means must be finite")
        if not (np.isfinite(stds).all() and np.all(stds > 0)):
            raise ValidationError("stds must be finite and > 0")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def half_distances(self) -> np.ndarray:
        """Per-dimension half inter-class mean distance |mu_b - mu_a| / 2."""
        return np.abs(self.means[1] - self.means[0]) / 2.0

    def oracle_importance(self) -> ImportanceVector:
        """Closed-form importance |mu_a - mu_b| / (2 sigma)."""
        omega = np.abs(self.means[0] - self.means[1]) / (2.0 * self.stds)
        return ImportanceVector(omega=omega, provenance="oracle")

    def population_stats(self) -> ClassStats:
        """Population class statistics (for oracle soft-mask adjustment)."""
        return ClassStats(means=self.means.copy(),
                          stds=np.vstack([self.stds, self.stds]),
                          counts=np.array([1, 1]), population=True)

    def scaled(self, scales: np.ndarray) -> "GaussianTaskSpec":
        """The task distribution after per-dimension feature scaling."""
        s = np.asarray(scales, dtype=np.float64)
        return GaussianTaskSpec(means=self.means * s, stds=self.stds * s)


@dataclass(frozen=True)
class BayesOptimal:
    """Optimal linear population error, its direction, and the 2-d ratio."""

    error: float
    direction: np.ndarray
    alpha: float | None = None


@dataclass(frozen=True)
class TheoremReport:
    """Condition checks plus per-draw error summaries for the two theorems."""

    shot: int
    n_draws: int | None = None
    conditions_hold: tuple[bool, bool] | None = None
    margins: tuple[float, float] | None = None
    guarantee_probability: float | None = None
    empirical_frequency: float | None = None
    ls_one: np.ndarray | None = None   # per-draw class-a NCC error, dim 1 only
    ls_two: np.ndarray | None = None   # per-draw class-a NCC error, both dims
    ld_one: np.ndarray | None = None   # per-draw population error of h1_hat
    ld_two: np.ndarray | None = None   # per-draw population error of h2_hat
    gaps: np.ndarray | None = None
    gap_median: float | None = None
    bayes_component: float | None = None
    mc_ld_one: np.ndarray | None = None
    mc_ld_two: np.ndarray | None = None


# ---------------------------------------------------------------------------
# built-in specs

def illustrative_spec() -> GaussianTaskSpec:
    """The illustrative two-dimensional model (omega_1 = 1.67, omega_2 = 1)."""
    return GaussianTaskSpec(means=np.array([[-1.0, -10.0], [1.0, 10.0]]),
                            stds=np.array([0.6, 10.0]))


def redundancy_spec(dim: int = 512) -> GaussianTaskSpec:
    """High-dimensional redundancy fixture: 2 strong dims, dim-2 weak ones.

    Dims 0-1 carry omega = 1.5; all remaining dims carry omega = 0.1, with
    one large-magnitude confounder among them (large mean magnitude, low
    importance) so centroid distances are dominated by an unhelpful
    dimension at any shot count.
    """
    if dim < 4:
        raise ValidationError("redundancy spec needs dim >= 4")
    half = np.concatenate([[1.5, 1.5, 50.0], np.full(dim - 3, 0.1)])
    stds = np.concatenate([[1.0, 1.0, 500.0], np.full(dim - 3, 1.0)])
    return GaussianTaskSpec(means=np.vstack([-half, half]), stds=stds)


def fi_bench_spec(dim: int = 64) -> GaussianTaskSpec:
    """Heterogeneous-importance bench for estimator-quality experiments.

    Nonzero per-dimension base magnitudes and mid-scale stds; 1/8 of the
    dimensions carry high importance.
    """
    rng = np.random.Generator(np.random.PCG64(42))
    base = rng.uniform(20.0, 40.0, dim)
    stds = rng.uniform(3.0, 4.0, dim)
    n_hi = max(1, dim // 8)
    omega = np.concatenate([rng.uniform(1.0, 2.0, n_hi),
                            rng.uniform(0.05, 0.3, dim - n_hi)])
    half = omega * stds
    return GaussianTaskSpec(means=np.vstack([base - half, base + half]),
                            stds=stds)


def adjust_bench_spec(dim: int = 64) -> GaussianTaskSpec:
    """Magnitude-mismatch fixture where the soft mask pays off.

    A few important dimensions with small magnitude and spread sit next to
    many high-magnitude high-variance low-importance dimensions, mirroring
    the mismatch between feature magnitude and usefulness seen in pretrained
    features.
    """
    n_hi = max(1, dim // 8)
    base = np.concatenate([np.full(n_hi, 5.0), np.full(dim - n_hi, 50.0)])
    half = np.concatenate([np.full(n_hi, 1.5), np.full(dim - n_hi, 2.0)])
    stds = np.concatenate([np.full(n_hi, 1.0), np.full(dim - n_hi, 20.0)])
    return GaussianTaskSpec(means=np.vstack([base - half, base + half]),
                            stds=stds)


_BUILTIN_SPECS = {
    "illustrative": illustrative_spec,
    "redundancy512": redundancy_spec,
    "fi-bench": fi_bench_spec,
    "adjust-bench": adjust_bench_spec,
}


def builtin_spec(name: str) -> GaussianTaskSpec:
    """Look up a named built-in spec (illustrative, redundancy512, fi-bench, ...)."""
    try:
        return _BUILTIN_SPECS[name]()
    except KeyError:
        raise ValidationError(
            f"unknown built-in spec {name!r}; "
            f"choices: {sorted(_BUILTIN_SPECS)}") from None


# ---------------------------------------------------------------------------
# sampling

def task_rng(base_seed: int, task_index: int, stream: int = 0) -> np.random.Generator:
    """Per-(task, stream) generator; stream is keyed by shot count so runs
    sharing (base_seed, task, shot) see identical training draws."""
    s1 = derive_task_seed(SeedSpec(base_seed=base_seed, task_index=task_index))
    s2 = derive_task_seed(SeedSpec(base_seed=s1, task_index=stream))
    return np.random.Generator(np.random.PCG64(s2))


def draw_train(spec: GaussianTaskSpec, shot: int,
               rng: np.random.Generator) -> LabeledFeatureSet:
    """Class-a then class-b i.i.d. training draws, labels 0 and 1."""
    za = rng.normal(spec.means[0], spec.stds, size=(shot, spec.dim))
    zb = rng.normal(spec.means[1], spec.stds, size=(shot, spec.dim))
    labels = np.repeat(np.array([0, 1]), shot)
    return LabeledFeatureSet(np.vstack([za, zb]), labels, 2)


def draw_query(spec: GaussianTaskSpec, query_per_class: int,
               rng: np.random.Generator) -> LabeledFeatureSet:
    qa = rng.normal(spec.means[0], spec.stds, size=(query_per_class, spec.dim))
    qb = rng.normal(spec.means[1], spec.stds, size=(query_per_class, spec.dim))
    labels = np.repeat(np.array([0, 1]), query_per_class)
    return LabeledFeatureSet(np.vstack([qa, qb]), labels, 2)


def sample_task(spec: GaussianTaskSpec, shot: int, query_per_class: int,
                seed: int, task_id: int = 0) -> Episode:
    """A binary episode drawn from the Gaussian model; train before query."""
    if shot < 1 or query_per_class < 1:
        raise ValidationError("shot and query_per_class must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    train = draw_train(spec, shot, rng)
    query = draw_query(spec, query_per_class, rng)
    return Episode(way=2, shot=shot, train=train, query=query, task_id=task_id)


def add_views(spec: GaussianTaskSpec, train: LabeledFeatureSet,
              views_per_sample: int, view_noise_ratio: float,
              rng: np.random.Generator,
              view_bias: float = 0.0) -> LabeledFeatureSet:
    """Augment every train row with simulated feature-space views.

    Each row gains views_per_sample draws from
    N(row + view_bias * sigma, (view_noise_ratio * sigma)^2); a view group id
    ties them to their base row.
    """
    if views_per_sample < 1:
        raise ValidationError("views_per_sample must be >= 1")
    if view_noise_ratio < 0:
        raise ValidationError("view_noise_ratio must be >= 0")
    n, m = train.features.shape
    A = views_per_sample
    noise = rng.normal(0.0, 1.0, size=(n, A, m)) * (view_noise_ratio * spec.stds)
    views = train.features[:, None, :] + view_bias * spec.stds + noise
    blocks = np.concatenate([train.features[:, None, :], views], axis=1)
    feats = blocks.reshape(n * (A + 1), m)
    labels = np.repeat(train.labels, A + 1)
    groups = np.repeat(np.arange(n, dtype=np.int64), A + 1)
    return LabeledFeatureSet(feats, labels, train.n_classes, groups)


def simulate_views(spec: GaussianTaskSpec, episode: Episode,
                   views_per_sample: int, view_noise_ratio: float, seed: int,
                   view_bias: float = 0.0) -> Episode:
    """Episode whose train split carries simulated views; query untouched."""
    rng = np.random.Generator(np.random.PCG64(seed))
    train = add_views(spec, episode.train, views_per_sample, view_noise_ratio,
                      rng, view_bias)
    return Episode(way=episode.way, shot=episode.shot, train=train,
                   query=episode.query, task_id=episode.task_id)


# ---------------------------------------------------------------------------
# closed forms

def _dims_index(spec: GaussianTaskSpec, dims) -> np.ndarray:
    idx = np.atleast_1d(np.asarray(dims, dtype=np.int64))
    if idx.size == 0 or np.any(idx < 0) or np.any(idx >= spec.dim):
        raise ValidationError(f"dims {dims} outside [0, {spec.dim})")
    return idx


def ncc_test_error_closed_form(spec: GaussianTaskSpec, centroids: np.ndarray,
                               dims, test_class: int) -> float:
    """Exact NCC misclassification probability for a fresh test point.

    centroids is (2, dim) aligned with the spec; only the dimensions in dims
    participate. Coinciding centroids give error 0.5 by symmetric tie
    handling.
    """
    idx = _dims_index(spec, dims)
    pa = np.asarray(centroids, dtype=np.float64)[0, idx]
    pb = np.asarray(centroids, dtype=np.float64)[1, idx]
    w = 2.0 * (pb - pa)
    c = float(pb @ pb - pa @ pa)
    if not np.any(w != 0.0):
        return 0.5
    return linear_test_error_closed_form(spec, w, -c, idx, test_class)


def ncc_test_error_balanced(spec: GaussianTaskSpec, centroids: np.ndarray,
                            dims) -> float:
    """NCC test error averaged over the two (equally likely) test classes."""
    return 0.5 * (ncc_test_error_closed_form(spec, centroids, dims, 0)
                  + ncc_test_error_closed_form(spec, centroids, dims, 1))


def linear_test_error_closed_form(spec: GaussianTaskSpec, w, b: float,
                                  dims=None, test_class: int | None = None) -> float:
    """Exact error of 'predict class b iff w.z + b > 0' under the model.

    test_class None averages the two classes. A zero weight vector is the
    constant classifier, scored 0.5 by symmetric tie handling.
    """
    idx = np.arange(spec.dim) if dims is None else _dims_index(spec, dims)
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    if w.shape != idx.shape:
        raise ValidationError("w must match the selected dims")
    den = float(np.sqrt(np.sum(w ** 2 * spec.stds[idx] ** 2)))
    if den == 0.0:
        return 0.5
    ta = (-b - w @ spec.means[0, idx]) / den
    tb = (-b - w @ spec.means[1, idx]) / den
    err_a = 1.0 - normal_cdf(ta)   # Pr[predict b | class a]
    err_b = normal_cdf(tb)         # Pr[predict a | class b]
    if test_class is None:
        return 0.5 * (err_a + err_b)
    return float(err_a if test_class == 0 else err_b)


def classifier_population_error(spec: GaussianTaskSpec, clf: LinearClassifier,
                                dims=None) -> float:
    """Balanced population error of a fitted binary linear classifier."""
    w = clf.W[1] - clf.W[0]
    b = float(clf.b[1] - clf.b[0])
    return linear_test_error_closed_form(spec, w, b, dims)


def bayes_optimal_error(spec: GaussianTaskSpec, dims) -> BayesOptimal:
    """Closed-form optimal linear population error over the chosen dims.

    The maximizing direction is mu_i / sigma_i^2 (mu_i the centered half
    distances); alpha is its second/first component ratio for 2-d queries.
    """
    idx = _dims_index(spec, dims)
    mu = spec.half_distances()[idx]
    sig = spec.stds[idx]
    arg = float(np.sqrt(np.sum(mu ** 2 / sig ** 2)))
    direction = mu / sig ** 2
    alpha = None
    if idx.size == 2:
        alpha = float(direction[1] / direction[0]) if direction[0] != 0 else np.inf
    return BayesOptimal(error=1.0 - normal_cdf(arg), direction=direction,
                        alpha=alpha)


def centroid_order_prob(spec: GaussianTaskSpec, shot: int) -> float:
    """Probability that every dimension's centroids land in the true order:
    the product of Phi(sqrt(2 n) mu_i / sigma_i) over dimensions."""
    if shot < 1:
        raise ValidationError("shot must be >= 1")
    mu = spec.half_distances()
    return float(np.prod(normal_cdf(np.sqrt(2.0 * shot) * mu / spec.stds)))


# ---------------------------------------------------------------------------
# theorem checks

def theorem1_conditions(spec: GaussianTaskSpec, shot: int) -> TheoremReport:
    """Check the two redundancy conditions and the closed-form guarantee.

    Conditions (full distances d_i): d_2/sigma_2 > 2.4/sqrt(n) and
    d_1/sigma_1 > 2 d_2/sigma_2 + 5.4/sqrt(n). The guarantee probability is
    the three-factor Phi product (centered half distances), at least 0.9
    whenever both conditions hold.
    """
    if spec.dim != 2:
        raise ValidationError("theorem 1 is stated for 2-dimensional specs")
    if shot < 1:
        raise ValidationError("shot must be >= 1")
    d = 2.0 * spec.half_distances()
    r1, r2 = d[0] / spec.stds[0], d[1] / spec.stds[1]
    rt = np.sqrt(shot)
    m1 = r2 - 2.4 / rt
    m2 = r1 - (2.0 * r2 + 5.4 / rt)
    mu = spec.half_distances()
    g = (normal_cdf(np.sqrt(2.0 * shot) * mu[0] / spec.stds[0])
         * normal_cdf(np.sqrt(2.0 * shot) * mu[1] / spec.stds[1])
         * normal_cdf(np.sqrt(10.0 * shot) / 5.0
                      * (mu[0] / spec.stds[0] - 2.0 * mu[1] / spec.stds[1])))
    return TheoremReport(shot=shot, conditions_hold=(bool(m1 > 0), bool(m2 > 0)),
                         margins=(float(m1), float(m2)),
                         guarantee_probability=float(g))


def theorem1_verify(spec: GaussianTaskSpec, shot: int, n_draws: int,
                    seed: int, workers: int = 1) -> TheoremReport:
    """Monte Carlo check that the extra dimension hurts NCC.

    Per training draw the exact class-a test errors with dim 1 only and with
    both dims are compared; empirical_frequency is the fraction of draws
    where the two-dimensional error is larger.
    """
    if spec.dim != 2:
        raise ValidationError("theorem 1 is stated for 2-dimensional specs")
    if n_draws < 100:
        raise ValidationError("need >= 100 draws")
    cond = theorem1_conditions(spec, shot)
    payloads = [(spec, shot, seed, t) for t in range(n_draws)]
    pairs = map_ordered(_theorem1_draw, payloads, workers)
    ls1 = np.array([p[0] for p in pairs])
    ls2 = np.array([p[1] for p in pairs])
    return replace(cond, n_draws=n_draws, ls_one=ls1, ls_two=ls2,
                   empirical_frequency=float((ls2 > ls1).mean()))


def _theorem1_draw(payload) -> tuple[float, float]:
    spec, shot, seed, t = payload
    rng = task_rng(seed, t, shot)
    train = draw_train(spec, shot, rng)
    centroids = np.vstack([train.features[:shot].mean(axis=0),
                           train.features[shot:].mean(axis=0)])
    return (ncc_test_error_closed_form(spec, centroids, (0,), 0),
            ncc_test_error_closed_form(spec, centroids, (0, 1), 0))


def theorem2_gap(spec: GaussianTaskSpec, shot: int, n_draws: int, seed: int,
                 eval_query: int = 0, surrogate: str = "erm01",
                 fit_cfg: FitConfig | None = None,
                 workers: int = 1) -> TheoremReport:
    """Per-draw generalization gap between the 2-d and 1-d empirical fits.

    The empirical classifiers are the exact 0-1 minimizers (or logistic
    regression with surrogate='logreg'); their population errors come from
    the closed form. eval_query > 0 additionally samples that many query
    points per class per draw as a Monte Carlo cross-check.
    """
    if spec.dim != 2:
        raise ValidationError("theorem 2 is stated for 2-dimensional specs")
    if shot < 2:
        raise ValidationError("theorem 2 needs shot >= 2")
    if surrogate not in ("erm01", "logreg"):
        raise ValidationError(f"unknown surrogate {surrogate!r}")
    payloads = [(spec, shot, seed, t, eval_query, surrogate, fit_cfg)
                for t in range(n_draws)]
    rows = map_ordered(_theorem2_draw, payloads, workers)
    ld1 = np.array([r[0] for r in rows])
    ld2 = np.array([r[1] for r in rows])
    gaps = ld2 - ld1
    mu = spec.half_distances()
    bayes_component = float(
        normal_cdf(mu[0] / spec.stds[0])
        - normal_cdf(np.sqrt(mu[0] ** 2 / spec.stds[0] ** 2
                             + mu[1] ** 2 / spec.stds[1] ** 2)))
    report = TheoremReport(shot=shot, n_draws=n_draws, ld_one=ld1, ld_two=ld2,
                           gaps=gaps, gap_median=float(np.median(gaps)),
                           bayes_component=bayes_component)
    if eval_query > 0:
        report = replace(report,
                         mc_ld_one=np.array([r[2] for r in rows]),
                         mc_ld_two=np.array([r[3] for r in rows]))
    return report


def _theorem2_draw(payload):
    spec, shot, seed, t, eval_query, surrogate, fit_cfg = payload
    rng = task_rng(seed, t, shot)
    train = draw_train(spec, shot, rng)
    train1 = LabeledFeatureSet(train.features[:, :1], train.labels, 2)
    if surrogate == "erm01":
        clf1 = fit_erm01_1d(train1).classifier
        clf2 = fit_erm01_2d(train).classifier
    else:
        cfg = fit_cfg if fit_cfg is not None else FitConfig()
        clf1 = fit_logreg(train1, cfg)
        clf2 = fit_logreg(train, cfg)
    ld1 = classifier_population_error(spec, clf1, (0,))
    ld2 = classifier_population_error(spec, clf2, (0, 1))
    if eval_query <= 0:
        return ld1, ld2
    query = draw_query(spec, eval_query, rng)
    mc2 = float((clf2.predict(query.features) != query.labels).mean())
    mc1 = float((clf1.predict(query.features[:, :1]) != query.labels).mean())
    return ld1, ld2, mc1, mc2
