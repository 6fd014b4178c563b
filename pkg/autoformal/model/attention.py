"""
Attention score functions.

Scores are computed for a whole batch at once: queries `Q` have shape
(batch, T, d), keys `K` have shape (batch, S, d) and scores have shape
(batch, T, S). Each variant provides the matching backward pass.


:license: BSD 2-clause, see LICENSE for details.
"""
from collections import OrderedDict

import numpy as np

from ..core import component, component_type, get_registered_components
from ..parameters import NO_ATTENTION, BAHDANAU, NORMED_BAHDANAU, LUONG, SCALED_LUONG
from .cells import uniform


@component_type
class Attention(object):
    required_attributes = ("name", "init_params", "scores", "scores_backward")

    def __init__(self, num_units):
        self.num_units = num_units


@component
class LuongAttention(Attention):
    """score(q, k) = q W_a k"""
    name = LUONG

    def init_params(self, rng):
        return OrderedDict([("W_a", uniform(rng, (self.num_units, self.num_units)))])

    def scores(self, params, Q, K):
        QW = Q @ params["W_a"]
        return np.einsum("btd,bsd->bts", QW, K), (Q, K, QW)

    def scores_backward(self, params, dS, cache):
        Q, K, QW = cache
        dQW = np.einsum("bts,bsd->btd", dS, K)
        dK = np.einsum("bts,btd->bsd", dS, QW)
        dW_a = np.einsum("btd,bte->de", Q, dQW)
        return dQW @ params["W_a"].T, dK, OrderedDict([("W_a", dW_a)])


@component
class ScaledLuongAttention(LuongAttention):
    """Luong score multiplied by a learned scalar g (initially 1)."""
    name = SCALED_LUONG

    def init_params(self, rng):
        params = LuongAttention.init_params(self, rng)
        params["g"] = np.array(1.0)
        return params

    def scores(self, params, Q, K):
        raw, cache = LuongAttention.scores(self, params, Q, K)
        return params["g"] * raw, (raw, cache)

    def scores_backward(self, params, dS, cache):
        raw, luong_cache = cache
        dQ, dK, grads = LuongAttention.scores_backward(self, params, dS * params["g"], luong_cache)
        grads["g"] = np.array((dS * raw).sum())
        return dQ, dK, grads


@component
class BahdanauAttention(Attention):
    """score(q, k) = v . tanh(q W_q + k W_k)"""
    name = BAHDANAU

    def init_params(self, rng):
        d = self.num_units
        return OrderedDict([("W_q", uniform(rng, (d, d))),
                            ("W_k", uniform(rng, (d, d))),
                            ("v", uniform(rng, d))])

    def _v(self, params):
        return params["v"], None

    def _bias(self, params):
        return 0.0

    def scores(self, params, Q, K):
        QW = Q @ params["W_q"]
        KW = K @ params["W_k"]
        hidden = np.tanh(QW[:, :, np.newaxis, :] + KW[:, np.newaxis, :, :] + self._bias(params))
        v, v_cache = self._v(params)
        return hidden @ v, (Q, K, hidden, v, v_cache)

    def _v_backward(self, params, dv, v_cache, grads):
        grads["v"] = dv

    def scores_backward(self, params, dS, cache):
        Q, K, hidden, v, v_cache = cache
        dv = np.einsum("bts,btsd->d", dS, hidden)
        dpre = dS[..., np.newaxis] * v * (1.0 - hidden ** 2)
        dQW = dpre.sum(axis=2)
        dKW = dpre.sum(axis=1)
        grads = OrderedDict([("W_q", np.einsum("btd,bte->de", Q, dQW)),
                             ("W_k", np.einsum("bsd,bse->de", K, dKW))])
        self._v_backward(params, dv, v_cache, grads)
        if "b" in params:
            grads["b"] = dpre.sum(axis=(0, 1, 2))
        return dQW @ params["W_q"].T, dKW @ params["W_k"].T, grads


@component
class NormedBahdanauAttention(BahdanauAttention):
    """
    Bahdanau attention with a weight-normalized score vector
    v = g * u / |u| and a bias inside the tanh.
    """
    name = NORMED_BAHDANAU

    def init_params(self, rng):
        d = self.num_units
        return OrderedDict([("W_q", uniform(rng, (d, d))),
                            ("W_k", uniform(rng, (d, d))),
                            ("u", uniform(rng, d)),
                            ("g", np.array(np.sqrt(1.0 / d))),
                            ("b", np.zeros(d))])

    def _v(self, params):
        norm = np.linalg.norm(params["u"])
        direction = params["u"] / norm
        return params["g"] * direction, (direction, norm)

    def _bias(self, params):
        return params["b"]

    def _v_backward(self, params, dv, v_cache, grads):
        direction, norm = v_cache
        grads["u"] = params["g"] / norm * (dv - (dv @ direction) * direction)
        grads["g"] = np.array(dv @ direction)


def get_attention(variant, num_units):
    """Return the attention component for `variant`, or None for no attention."""
    if variant in (None, NO_ATTENTION):
        return None
    try:
        return get_registered_components(Attention)[variant](num_units)
    except KeyError:
        raise ValueError("Unknown attention variant %r" % variant)


def attention_score(query, key, variant, weights):
    """Score a single query vector against a single key vector."""
    query = np.asarray(query, dtype=np.float64)
    key = np.asarray(key, dtype=np.float64)
    attention = get_attention(variant, query.shape[-1])
    if attention is None:
        raise ValueError("No score function without attention")
    weights = dict((name, np.asarray(value, dtype=np.float64)) for name, value in weights.items())
    score, _ = attention.scores(weights, query.reshape(1, 1, -1), key.reshape(1, 1, -1))
    return float(score[0, 0, 0])
