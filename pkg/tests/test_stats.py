import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fiprobe.core import LabeledFeatureSet, ValidationError
from fiprobe.gaussian import GaussianTaskSpec, draw_train
from fiprobe.stats import (OMEGA_CAP, VariancePolicy, class_stats,
                           importance_binary, importance_estimated,
                           importance_multiclass, normal_cdf)

# independently computed with mpmath at 40 digits
PHI_REFERENCE = [
    (-8.0, 6.220960574271784123516e-16),
    (-6.0, 9.865876450376981407009e-10),
    (-5.0, 2.866515718791939116738e-7),
    (-4.0, 0.00003167124183311992125377),
    (-3.0, 0.001349898031630094526652),
    (-2.5, 0.006209665325776135166978),
    (-2.0, 0.02275013194817920720028),
    (-1.5, 0.06680720126885806600449),
    (-1.0, 0.1586552539314570514148),
    (-0.5, 0.3085375387259868963623),
    (-0.1, 0.4601721627229710185346),
    (0.1, 0.5398278372770289814654),
    (0.5, 0.6914624612740131036377),
    (1.0, 0.8413447460685429485852),
    (1.5, 0.9331927987311419339955),
    (1.6667, 0.9522129635397043469097),
    (1.9437, 0.9740341806827645514694),
    (2.0, 0.9772498680518207927997),
    (3.0, 0.9986501019683699054733),
    (6.0, 0.9999999990134123549623),
]


def two_class_1d(a_vals, b_vals):
    feats = np.array(a_vals + b_vals, dtype=float)[:, None]
    labels = np.array([0] * len(a_vals) + [1] * len(b_vals))
    return LabeledFeatureSet(feats, labels, 2)


class TestClassStats:
    def test_fixed_policy_example(self):
        data = two_class_1d([0.0], [2.0])
        s = class_stats(data, VariancePolicy.fixed(1.0))
        assert np.allclose(s.means, [[0.0], [2.0]])
        assert np.allclose(s.stds, 1.0)
        assert np.allclose(s.overall_mean, [1.0])

    def test_unbiased_std(self):
        data = two_class_1d([0.0, 2.0], [5.0, 5.0])
        s = class_stats(data, VariancePolicy.sample_std())
        assert s.means[0, 0] == pytest.approx(1.0)
        assert s.stds[0, 0] == pytest.approx(np.sqrt(2.0))

    def test_fixed_policy_overrides_everything(self):
        data = two_class_1d([0.0, 2.0, 4.0], [1.0, 5.0])
        s = class_stats(data, VariancePolicy.fixed(1.0))
        assert np.all(s.stds == 1.0)

    def test_singleton_class_needs_fixed(self):
        data = two_class_1d([0.0], [1.0, 2.0])
        with pytest.raises(ValidationError, match="class 0"):
            class_stats(data, VariancePolicy.sample_std())

    def test_views_count_as_samples(self):
        feats = np.array([[0.0], [2.0], [5.0], [7.0]])
        data = LabeledFeatureSet(feats, np.array([0, 0, 1, 1]), 2,
                                 groups=np.array([0, 0, 1, 1]))
        s = class_stats(data, VariancePolicy.sample_std())
        assert s.counts.tolist() == [2, 2]

    def test_mean_squared_row_norm_exact(self):
        rng = np.random.default_rng(0)
        feats = rng.normal(size=(10, 3))
        data = LabeledFeatureSet(feats, np.array([0] * 5 + [1] * 5), 2)
        s = class_stats(data, VariancePolicy.sample_std())
        direct = float((feats ** 2).sum(axis=1).mean())
        assert s.mean_squared_row_norm() == pytest.approx(direct, rel=1e-12)
        scales = rng.uniform(0.5, 2.0, 3)
        direct_s = float(((feats * scales) ** 2).sum(axis=1).mean())
        assert s.mean_squared_row_norm(scales) == pytest.approx(direct_s, rel=1e-12)


class TestNormalCdf:
    def test_zero(self):
        assert normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_reference_grid(self):
        for x, ref in PHI_REFERENCE:
            assert abs(normal_cdf(x) - ref) <= 1e-10, x

    def test_symmetry(self):
        for x in (0.3, 1.0, 2.5, 4.0):
            assert normal_cdf(x) + normal_cdf(-x) == pytest.approx(1.0, abs=1e-12)

    def test_monotone(self):
        xs = np.linspace(-10, 10, 2001)
        vals = normal_cdf(xs)
        assert np.all(np.diff(vals) >= 0)

    def test_known_value(self):
        assert normal_cdf(1.6667) == pytest.approx(0.95221, abs=5e-6)


class TestImportanceBinary:
    def test_strong_dimension_value(self):
        data = two_class_1d([-1.0], [1.0])
        s = class_stats(data, VariancePolicy.fixed(0.6))
        iv = importance_binary(s)
        assert iv.omega[0] == pytest.approx(1.6667, abs=1e-3)

    def test_weak_dimension_value(self):
        data = two_class_1d([-10.0], [10.0])
        s = class_stats(data, VariancePolicy.fixed(10.0))
        assert importance_binary(s).omega[0] == pytest.approx(1.0)

    def test_equal_means_zero(self):
        data = two_class_1d([3.0, 3.0], [3.0, 3.0])
        s = class_stats(data, VariancePolicy.sample_std())
        iv = importance_binary(s)
        assert iv.omega[0] == 0.0
        assert not iv.capped[0]

    def test_zero_denominator_cap(self):
        data = two_class_1d([0.0, 0.0], [1.0, 1.0])
        s = class_stats(data, VariancePolicy.sample_std())
        iv = importance_binary(s)
        assert iv.omega[0] == OMEGA_CAP
        assert iv.capped[0]


class TestImportanceMulticlass:
    def test_two_classes_reduces_to_binary(self):
        data = two_class_1d([0.0, 2.0], [4.0, 6.0])
        mc = importance_multiclass(data, VariancePolicy.sample_std())
        s = class_stats(data, VariancePolicy.sample_std())
        bi = importance_binary(s)
        assert np.allclose(mc.omega, bi.omega)

    def test_mean_over_pairs(self):
        # three classes with fixed std 0.5: pair distances 1, 3, 2 give
        # pair importances 1, 3, 2 -> mean 2
        feats = np.array([[0.0], [1.0], [3.0]])
        data = LabeledFeatureSet(feats, np.array([0, 1, 2]), 3)
        mc = importance_multiclass(data, VariancePolicy.fixed(0.5))
        assert mc.omega[0] == pytest.approx(2.0)

    def test_identical_classes_zero(self):
        feats = np.tile(np.array([[1.0, 2.0]]), (6, 1))
        data = LabeledFeatureSet(feats, np.array([0, 0, 1, 1, 2, 2]), 3)
        mc = importance_multiclass(data, VariancePolicy.sample_std())
        assert np.all(mc.omega == 0.0)


class TestImportanceEstimated:
    def test_one_shot_fixed_sigma(self):
        data = two_class_1d([0.0], [2.0])
        iv = importance_estimated(data)
        assert iv.omega[0] == pytest.approx(1.0)
        assert iv.provenance == "estimated-raw"

    def test_two_shot_hand_value(self):
        data = two_class_1d([0.0, 2.0], [4.0, 6.0])
        iv = importance_estimated(data)
        assert iv.omega[0] == pytest.approx(4.0 / (2.0 * np.sqrt(2.0)), rel=1e-12)

    def test_views_identical_to_base_keep_means(self):
        base = two_class_1d([0.0, 2.0], [4.0, 6.0])
        dup = LabeledFeatureSet(np.repeat(base.features, 2, axis=0),
                                np.repeat(base.labels, 2), 2,
                                groups=np.repeat(np.arange(4), 2))
        iv_dup = importance_estimated(dup)
        iv_base = importance_estimated(base)
        assert iv_dup.provenance == "estimated-augmented"
        # duplicated rows leave means unchanged; stds shrink via the n-1
        # denominator, so the estimate moves but stays finite and ordered
        assert iv_dup.omega[0] > iv_base.omega[0] > 0

    def test_converges_to_oracle(self):
        spec = GaussianTaskSpec(means=np.array([[-1.0, -10.0], [1.0, 10.0]]),
                                stds=np.array([0.6, 10.0]))
        rng = np.random.Generator(np.random.PCG64(123))
        train = draw_train(spec, 10_000, rng)
        iv = importance_estimated(train)
        oracle = spec.oracle_importance().omega
        assert np.all(np.abs(iv.omega - oracle) / oracle < 0.02)


class TestImportanceProperties:
    @settings(max_examples=30, deadline=None)
    @given(a=st.floats(0.1, 50.0), b=st.floats(-20.0, 20.0),
           seed=st.integers(0, 10 ** 6))
    def test_affine_invariance(self, a, b, seed):
        rng = np.random.default_rng(seed)
        feats = rng.normal(size=(12, 3))
        labels = np.array([0] * 6 + [1] * 6)
        data = LabeledFeatureSet(feats, labels, 2)
        iv = importance_estimated(data)
        feats2 = feats.copy()
        feats2[:, 1] = a * feats2[:, 1] + b
        iv2 = importance_estimated(LabeledFeatureSet(feats2, labels, 2))
        assert iv2.omega[1] == pytest.approx(iv.omega[1], rel=1e-9)
        assert iv2.omega[0] == pytest.approx(iv.omega[0], rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10 ** 6))
    def test_permutation_equivariance(self, seed):
        rng = np.random.default_rng(seed)
        feats = rng.normal(size=(10, 4))
        labels = np.array([0] * 5 + [1] * 5)
        perm = rng.permutation(4)
        iv = importance_estimated(LabeledFeatureSet(feats, labels, 2))
        ivp = importance_estimated(LabeledFeatureSet(feats[:, perm], labels, 2))
        assert np.allclose(ivp.omega, iv.omega[perm], rtol=1e-12)
