"""
Unit tests for the autoformal.model.attention module
"""

import unittest

import numpy as np

from autoformal.core import get_rng
from autoformal.model.attention import (Attention, LuongAttention, ScaledLuongAttention,
                                        BahdanauAttention, NormedBahdanauAttention,
                                        attention_score, get_attention)

from .test_cells import numerical_gradient


class TestAttentionScore(unittest.TestCase):

    def setUp(self):
        rng = get_rng(0)
        self.q = rng.normal(size=4)
        self.k = rng.normal(size=4)

    def test_luong_with_identity_is_dot_product(self):
        score = attention_score(self.q, self.k, "luong", {"W_a": np.eye(4)})
        self.assertAlmostEqual(score, float(self.q @ self.k))

    def test_scaled_luong(self):
        score = attention_score(self.q, self.k, "scaled_luong", {"W_a": np.eye(4), "g": 2.0})
        self.assertAlmostEqual(score, 2.0 * float(self.q @ self.k))

    def test_bahdanau(self):
        rng = get_rng(1)
        weights = {"W_q": rng.normal(size=(4, 4)), "W_k": rng.normal(size=(4, 4)),
                   "v": rng.normal(size=4)}
        expected = weights["v"] @ np.tanh(self.q @ weights["W_q"] + self.k @ weights["W_k"])
        self.assertAlmostEqual(attention_score(self.q, self.k, "bahdanau", weights), expected)

    def test_normed_bahdanau(self):
        rng = get_rng(2)
        weights = {"W_q": rng.normal(size=(4, 4)), "W_k": rng.normal(size=(4, 4)),
                   "u": rng.normal(size=4), "g": 0.7, "b": rng.normal(size=4)}
        v = 0.7 * weights["u"] / np.linalg.norm(weights["u"])
        expected = v @ np.tanh(self.q @ weights["W_q"] + self.k @ weights["W_k"] + weights["b"])
        self.assertAlmostEqual(attention_score(self.q, self.k, "normed_bahdanau", weights),
                               expected)

    def test_normed_bahdanau_scale_of_u_is_irrelevant(self):
        rng = get_rng(2)
        weights = {"W_q": rng.normal(size=(4, 4)), "W_k": rng.normal(size=(4, 4)),
                   "u": rng.normal(size=4), "g": 0.7, "b": np.zeros(4)}
        scaled = dict(weights, u=weights["u"] * 10.0)
        self.assertAlmostEqual(attention_score(self.q, self.k, "normed_bahdanau", weights),
                               attention_score(self.q, self.k, "normed_bahdanau", scaled))

    def test_no_attention_has_no_score(self):
        self.assertRaises(ValueError, attention_score, self.q, self.k, "none", {})


class TestGetAttention(unittest.TestCase):

    def test_none(self):
        self.assertIsNone(get_attention("none", 4))
        self.assertIsNone(get_attention(None, 4))

    def test_variants(self):
        for name, cls in (("luong", LuongAttention), ("scaled_luong", ScaledLuongAttention),
                          ("bahdanau", BahdanauAttention),
                          ("normed_bahdanau", NormedBahdanauAttention)):
            attention = get_attention(name, 4)
            self.assertIsInstance(attention, cls)
            self.assertIsInstance(attention, Attention)

    def test_unknown(self):
        self.assertRaises(ValueError, get_attention, "dot", 4)

    def test_initial_values(self):
        params = get_attention("scaled_luong", 4).init_params(get_rng(0))
        self.assertEqual(float(params["g"]), 1.0)
        params = get_attention("normed_bahdanau", 4).init_params(get_rng(0))
        self.assertAlmostEqual(float(params["g"]), 0.5)
        np.testing.assert_array_equal(params["b"], 0.0)


class TestScoresBackward(unittest.TestCase):
    """Finite-difference checks of the batched score functions."""

    def check_variant(self, variant):
        rng = get_rng(5)
        attention = get_attention(variant, 3)
        params = attention.init_params(rng)
        for name in params:
            params[name] = np.array(params[name] + rng.normal(size=np.shape(params[name])) * 0.3)
        Q = rng.normal(size=(2, 3, 3))
        K = rng.normal(size=(2, 4, 3))
        upstream = rng.normal(size=(2, 3, 4))

        def loss():
            return (attention.scores(params, Q, K)[0] * upstream).sum()
        _, cache = attention.scores(params, Q, K)
        dQ, dK, grads = attention.scores_backward(params, upstream, cache)
        np.testing.assert_allclose(dQ, numerical_gradient(loss, Q), rtol=1e-4, atol=1e-8)
        np.testing.assert_allclose(dK, numerical_gradient(loss, K), rtol=1e-4, atol=1e-8)
        self.assertEqual(set(grads), set(params))
        for name, value in params.items():
            np.testing.assert_allclose(grads[name], numerical_gradient(loss, value),
                                       rtol=1e-4, atol=1e-8, err_msg=name)

    def test_luong(self):
        self.check_variant("luong")

    def test_scaled_luong(self):
        self.check_variant("scaled_luong")

    def test_bahdanau(self):
        self.check_variant("bahdanau")

    def test_normed_bahdanau(self):
        self.check_variant("normed_bahdanau")


if __name__ == '__main__':
    unittest.main()
