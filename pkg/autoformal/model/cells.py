"""
Recurrent memory cells with hand-written backward passes.

All cells work on batches of row vectors: `x` has shape (batch, input_size)
and every state component has shape (batch, num_units). A state is a tuple
whose first element is the hidden output `h`; LSTM-type cells carry the
memory `c` as second element.

LSTM gate blocks are ordered [input, forget, candidate, output] along the
last axis of the kernel and bias.


:license: BSD 2-clause, see LICENSE for details.
"""
from collections import OrderedDict

import numpy as np

from ..core import DivergenceError, component, component_type, get_registered_components
from ..parameters import LSTM, GRU, LAYER_NORM_LSTM

INIT_SCALE = 0.1
LN_EPSILON = 1e-6


class NonFiniteActivation(DivergenceError):
    pass


def sigmoid(x):
    # split by sign so that exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def uniform(rng, shape, scale=INIT_SCALE):
    return rng.uniform(-scale, scale, size=shape)


def check_finite(name, *arrays):
    for array in arrays:
        if not np.all(np.isfinite(array)):
            raise NonFiniteActivation("non-finite values in %s" % name)


def layer_norm(a, gain, shift, eps=LN_EPSILON):
    """Normalize the last axis of `a` to zero mean and unit variance, then scale and shift."""
    mean = a.mean(axis=-1, keepdims=True)
    centred = a - mean
    inv_std = 1.0 / np.sqrt((centred ** 2).mean(axis=-1, keepdims=True) + eps)
    normed = centred * inv_std
    return gain * normed + shift, (normed, inv_std)


def layer_norm_backward(dy, gain, cache):
    """Return (da, dgain, dshift); gain/shift gradients are summed over the leading axis."""
    normed, inv_std = cache
    dnormed = dy * gain
    da = inv_std * (dnormed - dnormed.mean(axis=-1, keepdims=True)
                    - normed * (dnormed * normed).mean(axis=-1, keepdims=True))
    return da, (dy * normed).sum(axis=0), dy.sum(axis=0)


@component_type
class Cell(object):
    """Base class for recurrent memory cells."""
    required_attributes = ("name", "n_states", "init_params", "step", "step_backward")

    def __init__(self, num_units, forget_bias=1.0):
        self.num_units = num_units
        self.forget_bias = forget_bias

    def zero_state(self, batch_size):
        return tuple(np.zeros((batch_size, self.num_units)) for _ in range(self.n_states))

    def init_params(self, rng, input_size):
        raise NotImplementedError

    def step(self, params, x, state):
        """Return (new_state, cache)."""
        raise NotImplementedError

    def step_backward(self, params, dstate, cache):
        """Return (dx, dstate_prev, grads) given the gradient of the new state."""
        raise NotImplementedError


def _lstm_gates(z, d):
    i = sigmoid(z[:, :d])
    f = sigmoid(z[:, d:2 * d])
    g = np.tanh(z[:, 2 * d:3 * d])
    o = sigmoid(z[:, 3 * d:])
    return i, f, g, o


def _lstm_gates_backward(dh, dc_next, c_prev, new_c, gates):
    i, f, g, o = gates
    tanh_c = np.tanh(new_c)
    dc = dc_next + dh * o * (1.0 - tanh_c ** 2)
    dz = np.concatenate([
        dc * g * i * (1.0 - i),
        dc * c_prev * f * (1.0 - f),
        dc * i * (1.0 - g ** 2),
        dh * tanh_c * o * (1.0 - o),
    ], axis=1)
    return dz, dc * f


@component
class LSTMCell(Cell):
    name = LSTM
    n_states = 2

    def init_params(self, rng, input_size):
        d = self.num_units
        bias = uniform(rng, 4 * d)
        bias[d:2 * d] = self.forget_bias
        return OrderedDict([("kernel", uniform(rng, (input_size + d, 4 * d))),
                            ("bias", bias)])

    def step(self, params, x, state):
        h, c = state
        xh = np.concatenate([x, h], axis=1)
        gates = _lstm_gates(xh @ params["kernel"] + params["bias"], self.num_units)
        i, f, g, o = gates
        new_c = f * c + i * g
        new_h = o * np.tanh(new_c)
        return (new_h, new_c), (xh, c, new_c, gates)

    def step_backward(self, params, dstate, cache):
        dh, dc_next = dstate
        xh, c_prev, new_c, gates = cache
        dz, dc_prev = _lstm_gates_backward(dh, dc_next, c_prev, new_c, gates)
        dxh = dz @ params["kernel"].T
        input_size = xh.shape[1] - self.num_units
        grads = OrderedDict([("kernel", xh.T @ dz), ("bias", dz.sum(axis=0))])
        return dxh[:, :input_size], (dxh[:, input_size:], dc_prev), grads


@component
class GRUCell(Cell):
    """h' = (1 - z) * h + z * tanh([x, r * h] W_c + b_c) with gates [z | r]."""
    name = GRU
    n_states = 1

    def init_params(self, rng, input_size):
        d = self.num_units
        return OrderedDict([("gates_kernel", uniform(rng, (input_size + d, 2 * d))),
                            ("gates_bias", uniform(rng, 2 * d)),
                            ("candidate_kernel", uniform(rng, (input_size + d, d))),
                            ("candidate_bias", uniform(rng, d))])

    def step(self, params, x, state):
        h, = state
        d = self.num_units
        xh = np.concatenate([x, h], axis=1)
        zr = sigmoid(xh @ params["gates_kernel"] + params["gates_bias"])
        z, r = zr[:, :d], zr[:, d:]
        xrh = np.concatenate([x, r * h], axis=1)
        n = np.tanh(xrh @ params["candidate_kernel"] + params["candidate_bias"])
        new_h = (1.0 - z) * h + z * n
        return (new_h,), (xh, xrh, h, z, r, n)

    def step_backward(self, params, dstate, cache):
        dh, = dstate
        xh, xrh, h, z, r, n = cache
        input_size = xh.shape[1] - self.num_units
        dn_pre = dh * z * (1.0 - n ** 2)
        dxrh = dn_pre @ params["candidate_kernel"].T
        drh = dxrh[:, input_size:]
        dzr = np.concatenate([dh * (n - h) * z * (1.0 - z),
                              drh * h * r * (1.0 - r)], axis=1)
        dxh = dzr @ params["gates_kernel"].T
        dx = dxrh[:, :input_size] + dxh[:, :input_size]
        dh_prev = dh * (1.0 - z) + drh * r + dxh[:, input_size:]
        grads = OrderedDict([("gates_kernel", xh.T @ dzr),
                             ("gates_bias", dzr.sum(axis=0)),
                             ("candidate_kernel", xrh.T @ dn_pre),
                             ("candidate_bias", dn_pre.sum(axis=0))])
        return dx, (dh_prev,), grads


@component
class LayerNormLSTMCell(Cell):
    """
    LSTM whose four gate pre-activations are each layer-normalized before
    the nonlinearity. The learned shift plays the role of the bias.
    """
    name = LAYER_NORM_LSTM
    n_states = 2

    def init_params(self, rng, input_size):
        d = self.num_units
        shift = uniform(rng, 4 * d)
        shift[d:2 * d] = self.forget_bias
        return OrderedDict([("kernel", uniform(rng, (input_size + d, 4 * d))),
                            ("gain", np.ones(4 * d)),
                            ("shift", shift)])

    def _normalize(self, params, a):
        d = self.num_units
        batch = a.shape[0]
        y, ln_cache = layer_norm(a.reshape(batch, 4, d),
                                 params["gain"].reshape(4, d), params["shift"].reshape(4, d))
        return y.reshape(batch, 4 * d), ln_cache

    def step(self, params, x, state):
        h, c = state
        xh = np.concatenate([x, h], axis=1)
        z, ln_cache = self._normalize(params, xh @ params["kernel"])
        gates = _lstm_gates(z, self.num_units)
        i, f, g, o = gates
        new_c = f * c + i * g
        new_h = o * np.tanh(new_c)
        return (new_h, new_c), (xh, c, new_c, gates, ln_cache)

    def step_backward(self, params, dstate, cache):
        d = self.num_units
        dh, dc_next = dstate
        xh, c_prev, new_c, gates, ln_cache = cache
        dz, dc_prev = _lstm_gates_backward(dh, dc_next, c_prev, new_c, gates)
        batch = dz.shape[0]
        da, dgain, dshift = layer_norm_backward(dz.reshape(batch, 4, d),
                                                params["gain"].reshape(4, d), ln_cache)
        da = da.reshape(batch, 4 * d)
        dxh = da @ params["kernel"].T
        input_size = xh.shape[1] - d
        grads = OrderedDict([("kernel", xh.T @ da),
                             ("gain", dgain.reshape(4 * d)),
                             ("shift", dshift.reshape(4 * d))])
        return dxh[:, :input_size], (dxh[:, input_size:], dc_prev), grads


def get_cell(unit_type, num_units, forget_bias=1.0):
    try:
        cell_class = get_registered_components(Cell)[unit_type]
    except KeyError:
        raise ValueError("Unknown unit type %r" % unit_type)
    return cell_class(num_units, forget_bias)


def _as_batch(x):
    x = np.asarray(x, dtype=np.float64)
    return x[np.newaxis, :] if x.ndim == 1 else x, x.ndim == 1


def _run_single_step(cell, x, state, weights):
    x, single = _as_batch(x)
    state = tuple(_as_batch(s)[0] for s in state)
    new_state, _ = cell.step(weights, x, state)
    check_finite(cell.name, *new_state)
    if single:
        new_state = tuple(s[0] for s in new_state)
    return new_state


def lstm_step(x, state, weights):
    """One LSTM update. `state` is (h, c); returns (h', c')."""
    weights = dict(weights)
    cell = LSTMCell(np.shape(state[0])[-1])
    return _run_single_step(cell, x, state, weights)


def gru_step(x, h, weights):
    """One GRU update; returns h'."""
    weights = dict(weights)
    cell = GRUCell(np.shape(h)[-1])
    new_h, = _run_single_step(cell, x, (h,), weights)
    return new_h


def layer_norm_lstm_step(x, state, weights):
    """One layer-normalized LSTM update. `state` is (h, c); returns (h', c')."""
    weights = dict(weights)
    cell = LayerNormLSTMCell(np.shape(state[0])[-1])
    return _run_single_step(cell, x, state, weights)
