import math

import numpy as np
import pytest

from weakrel.errors import ConfigError
from weakrel.features import FeatureVocab
from weakrel.model import (
    Hyperparams,
    Model,
    ModelParams,
    entropy_over_relations,
    init_params,
    load_model,
    log_sigmoid,
    match_prob,
    mention_embedding,
    mention_forward,
    save_model,
    sigmoid,
    type_distribution,
)
from weakrel.supervision import LabelSpace

from conftest import random_params


class TestSigmoid:
    def test_symmetry(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(-50, 50, size=2000)
        np.testing.assert_allclose(sigmoid(x) + sigmoid(-x), 1.0, atol=1e-12)

    def test_scalar_and_vector_agree(self):
        xs = [-700.0, -5.0, 0.0, 3.5, 700.0]
        vec = sigmoid(np.array(xs))
        for x, value in zip(xs, vec):
            assert sigmoid(x) == pytest.approx(value, abs=1e-15)

    def test_log_sigmoid_stable_at_extremes(self):
        assert log_sigmoid(-1000.0) == pytest.approx(-1000.0)
        assert log_sigmoid(1000.0) == pytest.approx(0.0, abs=1e-12)
        assert np.isfinite(log_sigmoid(np.array([-1e4, 0.0, 1e4]))).all()


class TestMentionEmbedding:
    def test_zero_feature_vectors_give_zero_embedding(self):
        rng = np.random.default_rng(0)
        params = random_params(rng)
        params.v[:] = 0.0
        z = mention_embedding(np.array([0, 1]), params)
        np.testing.assert_array_equal(z, np.zeros(params.n_z))

    def test_one_dimensional_case_matches_tanh(self):
        params = ModelParams(
            v=np.array([[0.5]]), v_star=np.array([[0.0]]),
            w=np.array([[1.0]]), l=np.zeros((1, 1)), t=np.zeros((2, 1)),
            phi1=0.8, phi0=0.2,
        )
        z = mention_embedding(np.array([0]), params)
        assert z[0] == pytest.approx(0.46211715726000974, abs=1e-12)  # tanh(0.5)

    def test_opposite_features_cancel(self):
        params = ModelParams(
            v=np.array([[1.0], [-1.0]]), v_star=np.zeros((2, 1)),
            w=np.array([[1.0]]), l=np.zeros((1, 1)), t=np.zeros((2, 1)),
            phi1=0.8, phi0=0.2,
        )
        assert mention_embedding(np.array([0, 1]), params)[0] == 0.0

    def test_components_strictly_inside_unit_interval(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            params = random_params(rng)
            bag = np.array([0, 2, 4])
            z = mention_embedding(bag, params)
            assert np.all(np.abs(z) < 1.0)

    def test_saturated_inputs_stay_within_closed_bounds(self):
        # float64 tanh rounds to exactly +-1.0 deep in saturation
        rng = np.random.default_rng(30)
        params = random_params(rng)
        params.v *= 1000
        z = mention_embedding(np.array([0, 1]), params)
        assert np.all(np.abs(z) <= 1.0)
        assert np.all(np.isfinite(z))

    def test_empty_bag_rejected(self):
        params = random_params(np.random.default_rng(4))
        with pytest.raises(ValueError):
            mention_embedding(np.array([], dtype=int), params)

    def test_dropout_mask_scales_average(self):
        rng = np.random.default_rng(5)
        params = random_params(rng)
        bag = np.array([1, 3])
        mask = np.array([1.0, 0.0, 1.0, 0.0, 1.0])
        z = mention_embedding(bag, params, dropout_mask=mask, dropout_p=0.5)
        a = params.v[bag].mean(axis=0) * mask / 0.5
        np.testing.assert_allclose(z, np.tanh(params.w @ a), atol=1e-12)

    def test_no_dropout_matches_inference_forward(self):
        rng = np.random.default_rng(6)
        params = random_params(rng)
        bag = np.array([0, 1, 2])
        train_z = mention_embedding(bag, params, dropout_mask=np.ones(params.n_v), dropout_p=0.0)
        _, infer_z = mention_forward(bag, params)
        np.testing.assert_array_equal(train_z, infer_z)


class TestMatchProb:
    def test_zero_dot_product_gives_half(self):
        rng = np.random.default_rng(7)
        params = random_params(rng)
        z = np.zeros(params.n_z)
        assert match_prob(z, params.l[0]) == 0.5

    def test_orthogonal_vectors_give_half(self):
        z = np.array([1.0, 0.0])
        l_i = np.array([0.0, 3.0])
        assert match_prob(z, l_i) == 0.5

    def test_known_value(self):
        z = np.array([2.0, 0.0])
        l_i = np.array([1.0, 0.0])
        assert match_prob(z, l_i) == pytest.approx(0.8807970779778823, abs=1e-12)

    def test_antisymmetry(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            z = rng.normal(size=6)
            l_i = rng.normal(size=6)
            assert match_prob(z, l_i) + match_prob(-z, l_i) == pytest.approx(1.0, abs=1e-12)


class TestTypeDistribution:
    def test_zero_vectors_give_uniform(self):
        z = np.zeros(4)
        t = np.zeros((5, 4))
        np.testing.assert_allclose(type_distribution(z, t), 0.2, atol=1e-15)

    def test_shift_invariance(self):
        rng = np.random.default_rng(9)
        z = rng.normal(size=3)
        t = rng.normal(size=(4, 3))
        base = type_distribution(z, t)
        # adding a constant to every score leaves the distribution unchanged
        shift = np.linalg.lstsq(np.vstack([z]), np.array([7.5]), rcond=None)[0]
        shifted = type_distribution(z, t + shift)
        np.testing.assert_allclose(base, shifted, atol=1e-12)

    def test_two_label_hand_value(self):
        z = np.array([1.0])
        t = np.array([[0.0], [math.log(3.0)]])
        np.testing.assert_allclose(type_distribution(z, t), [0.25, 0.75], atol=1e-12)

    def test_sums_to_one_with_huge_scores(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            scores = rng.uniform(-1000, 1000, size=4)
            p = type_distribution(np.array([1.0]), scores[:, None])
            assert np.isfinite(p).all()
            assert abs(p.sum() - 1.0) < 1e-12


class TestEntropyOverRelations:
    def test_uniform_over_relations_gives_log_k(self):
        for k in (2, 3, 7):
            p = np.zeros(k + 1)
            p[1:] = 1.0 / k
            assert entropy_over_relations(p) == pytest.approx(math.log(k), abs=1e-12)

    def test_all_mass_on_none_gives_zero(self):
        p = np.array([1.0, 0.0, 0.0])
        assert entropy_over_relations(p) == 0.0

    def test_hand_value(self):
        # -2 * 0.25 * ln(0.25) = ln(2)
        p = np.array([0.5, 0.25, 0.25])
        assert entropy_over_relations(p) == pytest.approx(0.6931471805599453, abs=1e-12)

    def test_literal_formula_is_not_renormalized(self):
        p = np.array([0.9, 0.05, 0.05])
        literal = entropy_over_relations(p)
        renorm = entropy_over_relations(p, renormalize=True)
        assert literal == pytest.approx(-2 * 0.05 * math.log(0.05), abs=1e-12)
        assert renorm == pytest.approx(math.log(2), abs=1e-12)
        assert literal < renorm


class TestParamsAndHyper:
    def test_init_shapes_and_phi_defaults(self):
        rng = np.random.default_rng(11)
        hyper = Hyperparams(dim_v=7, dim_z=3)
        params = init_params(10, 4, 3, hyper, rng)
        assert params.v.shape == (10, 7)
        assert params.w.shape == (3, 7)
        assert params.l.shape == (4, 3)
        assert params.t.shape == (4, 3)
        assert params.phi0 == pytest.approx(0.25)
        assert params.phi1 == pytest.approx(0.75)
        assert np.abs(params.v).max() <= 0.5 / 7
        assert np.abs(params.w).max() <= 1 / math.sqrt(3)
        params.validate()

    def test_phi_ordering_enforced(self):
        rng = np.random.default_rng(12)
        params = random_params(rng, phi1=0.3, phi0=0.4)
        with pytest.raises(ConfigError):
            params.validate()

    def test_hyper_validation(self):
        with pytest.raises(ConfigError):
            Hyperparams(alpha=0.0).validate()
        with pytest.raises(ConfigError):
            Hyperparams(negatives=0).validate()
        with pytest.raises(ConfigError):
            Hyperparams(dropout=1.0).validate()
        Hyperparams().validate()


class TestSerialization:
    def make_model(self, seed=13):
        rng = np.random.default_rng(seed)
        params = random_params(rng, n_feat=5, n_lfs=2, k=2)
        params.quantize()
        vocab = FeatureVocab({f"f{i}": i for i in range(5)}, [3, 3, 2, 2, 2], 2)
        return Model(params, LabelSpace(("r1", "r2")), ("lf_a", "lf_b"), vocab)

    def test_roundtrip_reproduces_parameters_exactly(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.bin"
        save_model(model, path)
        loaded = load_model(path)
        for name in ("v", "v_star", "w", "l", "t"):
            np.testing.assert_array_equal(
                getattr(loaded.params, name), getattr(model.params, name)
            )
        assert loaded.params.phi1 == model.params.phi1
        assert loaded.params.phi0 == model.params.phi0
        assert loaded.label_space == model.label_space
        assert loaded.lf_names == model.lf_names
        assert loaded.vocab.feature_to_id == model.vocab.feature_to_id

    def test_save_load_save_is_bit_identical(self, tmp_path):
        model = self.make_model()
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        save_model(model, p1)
        save_model(load_model(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOTME" + b"\x00" * 40)
        from weakrel.errors import DataError

        with pytest.raises(DataError):
            load_model(path)

    def test_quantize_makes_arrays_float32_representable(self):
        rng = np.random.default_rng(14)
        params = random_params(rng)
        params.quantize()
        for name in ("v", "v_star", "w", "l", "t"):
            arr = getattr(params, name)
            np.testing.assert_array_equal(arr, arr.astype(np.float32).astype(np.float64))
