"""
Training loop: minibatch gradient descent with SGD or Adam, global-norm
gradient clipping, snapshot checkpoints and divergence detection.

Every `snapshot_every` steps the model is serialized into a Snapshot and,
when a dev set is given, its dev-set perplexity is recorded. If the loss,
the gradients or the updated parameters stop being finite, training stops
early and the last finite state is returned with `diverged=True`.


:license: BSD 2-clause, see LICENSE for details.
"""
import logging
import math
from collections import OrderedDict

import numpy as np

from .core import (DataError, DivergenceError, ShapeMismatch, component, component_type,
                   get_registered_components, get_rng, STREAM_TRAIN)
from .corpus import build_vocab
from .parameters import SGD, ADAM
from .evaluation import EmptyEvalSet, perplexity
from .model.seq2seq import Seq2Seq, ModelParams, init_params, target_logprobs
from .model.checkpoint import checkpoint_bytes

logger = logging.getLogger("autoformal")

DEFAULT_SNAPSHOT_EVERY = 1000
DEFAULT_LOG_EVERY = 100
BUCKET_WINDOW = 5  # batches per length-sorted window


class EmptyTrainSet(DataError):
    pass


def _check_shapes(params, grads):
    if list(params.keys()) != list(grads.keys()):
        raise ShapeMismatch("Gradient names do not match parameter names")
    for name, value in params.items():
        if np.shape(value) != np.shape(grads[name]):
            raise ShapeMismatch("Gradient for %s has shape %s, expected %s"
                                % (name, np.shape(grads[name]), np.shape(value)))


def global_norm(grads):
    return math.sqrt(sum(float(np.sum(np.square(g))) for g in grads.values()))


def clip_gradients(grads, clip_norm):
    """Scale all gradients by clip_norm / N when their global L2 norm N exceeds clip_norm."""
    if clip_norm <= 0:
        raise ValueError("clip_norm must be positive")
    norm = global_norm(grads)
    if norm <= clip_norm:
        return grads
    scale = clip_norm / norm
    return ModelParams((name, g * scale) for name, g in grads.items())


def sgd_update(params, grads, lr):
    _check_shapes(params, grads)
    return ModelParams((name, value - lr * grads[name]) for name, value in params.items())


class AdamState(object):

    def __init__(self, step, m, v):
        self.step = step
        self.m = m
        self.v = v

    @classmethod
    def zeros_like(cls, params):
        return cls(0, ModelParams((n, np.zeros_like(p)) for n, p in params.items()),
                   ModelParams((n, np.zeros_like(p)) for n, p in params.items()))


def adam_update(state, params, grads, lr, beta1=0.9, beta2=0.999, epsilon=1e-8):
    """
    One Adam step with bias-corrected moments. Returns (new_params, new_state);
    neither input is modified.
    """
    _check_shapes(params, grads)
    _check_shapes(state.m, grads)
    step = state.step + 1
    m = ModelParams()
    v = ModelParams()
    new_params = ModelParams()
    for name, value in params.items():
        g = grads[name]
        m[name] = beta1 * state.m[name] + (1.0 - beta1) * g
        v[name] = beta2 * state.v[name] + (1.0 - beta2) * g * g
        m_hat = m[name] / (1.0 - beta1 ** step)
        v_hat = v[name] / (1.0 - beta2 ** step)
        new_params[name] = value - lr * m_hat / (np.sqrt(v_hat) + epsilon)
    return new_params, AdamState(step, m, v)


@component_type
class Optimizer(object):
    required_attributes = ("name", "init_state", "update")

    def __init__(self, learning_rate):
        self.learning_rate = learning_rate


@component
class SGDOptimizer(Optimizer):
    name = SGD

    def init_state(self, params):
        return None

    def update(self, params, grads, state):
        return sgd_update(params, grads, self.learning_rate), state


@component
class AdamOptimizer(Optimizer):
    name = ADAM

    def init_state(self, params):
        return AdamState.zeros_like(params)

    def update(self, params, grads, state):
        return adam_update(state, params, grads, self.learning_rate)


def get_optimizer(hp):
    return get_registered_components(Optimizer)[hp.optimizer](hp.learning_rate)


class TrainState(object):

    def __init__(self, step, params, optimizer_state=None, rng_state=None, history=None,
                 dev_history=None):
        self.step = step
        self.params = params
        self.optimizer_state = optimizer_state
        self.rng_state = rng_state
        self.history = history if history is not None else []
        self.dev_history = dev_history if dev_history is not None else []


class Snapshot(object):

    def __init__(self, step, checkpoint):
        self.step = step
        self.checkpoint = checkpoint

    def __repr__(self):
        return "Snapshot(step=%d, %d bytes)" % (self.step, len(self.checkpoint))


def encode_pairs(pairs, hp, vocab_src, vocab_tgt, check_length=True):
    """
    Map SentencePairs to (src_ids, tgt_ids) in the configured direction.
    Pairs longer than the length limits are dropped.
    """
    encoded = []
    for pair in pairs:
        src = pair.side(hp.src_lang)
        tgt = pair.side(hp.tgt_lang)
        if check_length and (len(src) > hp.max_src_len or len(tgt) > hp.max_tgt_len):
            continue
        encoded.append((vocab_src.encode(src), vocab_tgt.encode(tgt)))
    if len(encoded) < len(pairs):
        logger.info("Dropped %d pairs exceeding the length limits", len(pairs) - len(encoded))
    return encoded


def batches(pairs, hp, rng):
    """
    One epoch of batches of (src_ids, tgt_ids). The data is shuffled, then
    windows of several batches are sorted by source length and cut into
    batches, and the batch order is shuffled again.
    """
    order = rng.permutation(len(pairs))
    window = hp.batch_size * BUCKET_WINDOW
    result = []
    for start in range(0, len(order), window):
        chunk = sorted(order[start:start + window], key=lambda i: len(pairs[i][0]))
        for b in range(0, len(chunk), hp.batch_size):
            result.append([pairs[i] for i in chunk[b:b + hp.batch_size]])
    return [result[i] for i in rng.permutation(len(result))]


def _grads_finite(grads):
    return all(np.all(np.isfinite(g)) for g in grads.values())


def dev_perplexity_hook(state, dev, hp, vocab_src, vocab_tgt):
    """Perplexity of the dev set under the parameters of `state`."""
    if not dev:
        raise EmptyEvalSet("dev set is empty")
    sources = [pair.side(hp.src_lang) for pair in dev]
    targets = [pair.side(hp.tgt_lang) for pair in dev]
    return perplexity(target_logprobs(sources, targets, hp, state.params, vocab_src, vocab_tgt))


def train(corpus, hp, snapshot_every=DEFAULT_SNAPSHOT_EVERY, vocab_src=None, vocab_tgt=None,
          gradient_hook=None, log=None, log_every=DEFAULT_LOG_EVERY):
    """
    Train a model on `corpus.train`, returning (final_state, snapshots, diverged).

    Vocabularies default to those of the training set. `gradient_hook(step,
    grads)` is called before clipping and may modify the gradients in place.
    If `log` is a writable text file, a line `step <n> loss <x> dev_ppl <y>`
    is appended every `log_every` steps and at each snapshot.
    """
    if not corpus.train:
        raise EmptyTrainSet("The training set is empty")
    if vocab_src is None:
        vocab_src = build_vocab(pair.side(hp.src_lang) for pair in corpus.train)
    if vocab_tgt is None:
        vocab_tgt = build_vocab(pair.side(hp.tgt_lang) for pair in corpus.train)
    data = encode_pairs(corpus.train, hp, vocab_src, vocab_tgt)
    if not data:
        raise EmptyTrainSet("No training pair is within the length limits")
    dev = list(corpus.dev or [])

    model = Seq2Seq(hp, len(vocab_src), len(vocab_tgt))
    optimizer = get_optimizer(hp)
    params = init_params(hp, vocab_src, vocab_tgt)
    rng = get_rng(hp.seed, STREAM_TRAIN)
    state = TrainState(0, params, optimizer.init_state(params), rng.bit_generator.state)
    snapshots = []
    diverged = False
    pending = []

    logger.info("Training %s/%s model with %d parameters on %d pairs for %d steps",
                hp.unit_type, hp.attention, params.num_parameters(), len(data), hp.train_steps)
    for step in range(1, hp.train_steps + 1):
        if not pending:
            pending = batches(data, hp, rng)
        batch = model.make_batch(pending.pop(0))
        try:
            loss, grads = model.loss_and_gradients(state.params, batch, rng, training=True)
            if gradient_hook is not None:
                gradient_hook(step, grads)
            if not _grads_finite(grads):
                raise DivergenceError("non-finite gradient")
            new_params, new_opt_state = optimizer.update(state.params,
                                                         clip_gradients(grads, hp.clip_norm),
                                                         state.optimizer_state)
            if not new_params.all_finite():
                raise DivergenceError("non-finite parameters")
        except DivergenceError as err:
            logger.warning("Training diverged at step %d (%s); keeping the state of step %d",
                           step, err, state.step)
            diverged = True
            break
        state.history.append((step, float(loss)))
        state = TrainState(step, new_params, new_opt_state, rng.bit_generator.state,
                           state.history, state.dev_history)
        dev_ppl = None
        if snapshot_every and step % snapshot_every == 0:
            snapshots.append(Snapshot(step, checkpoint_bytes(hp, vocab_src, vocab_tgt,
                                                             state.params, step)))
            if dev:
                dev_ppl = dev_perplexity_hook(state, dev, hp, vocab_src, vocab_tgt)
                state.dev_history.append((step, dev_ppl))
        if log is not None and (step % log_every == 0 or dev_ppl is not None):
            log.write("step %d loss %.6f dev_ppl %s\n"
                      % (step, loss, "n/a" if dev_ppl is None else "%.6f" % dev_ppl))
        if step % log_every == 0:
            logger.debug("step %d loss %.6f", step, loss)
    return state, snapshots, diverged


class TrainResult(OrderedDict):
    """Summary of a training run, as stored in run records."""

    @classmethod
    def from_run(cls, state, snapshots, diverged):
        result = cls()
        result["steps"] = state.step
        result["final_loss"] = state.history[-1][1] if state.history else None
        result["snapshots"] = [s.step for s in snapshots]
        result["dev_perplexity"] = state.dev_history[-1][1] if state.dev_history else None
        result["diverged"] = diverged
        return result
