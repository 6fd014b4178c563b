"""
The encoder-decoder translation network.

Source ids are embedded and run through a stack of recurrent cells (or, for
a bidirectional encoder, a forward and a backward stack whose outputs are
concatenated and projected back to `num_units`). The decoder stack starts
from the encoder's final states and is driven by the previous target token.
With attention, each decoder output attends over the encoder outputs and
the attentional hidden state tanh([context; h] W_c) feeds the output
projection; without attention the top decoder output does.

Everything is computed in float64 on padded batches; padded positions are
masked out of state updates, attention and the loss. Gradients are computed
analytically by `Seq2Seq.loss_and_gradients`.


:license: BSD 2-clause, see LICENSE for details.
"""
import logging
from collections import OrderedDict

import numpy as np

from ..core import DataError, DivergenceError, get_rng, STREAM_INIT, STREAM_TRAIN
from ..corpus import SOS_ID, EOS_ID
from ..lexing import TokenSequence
from .cells import get_cell, uniform, check_finite
from .attention import get_attention

logger = logging.getLogger("autoformal")


class NonFiniteLoss(DivergenceError):
    pass


class IdOutOfRange(DataError):
    pass


class LengthExceeded(DataError):
    pass


class EmptySequence(DataError):
    pass


class ModelParams(OrderedDict):
    """Named float64 tensors of one model instance."""

    def copy(self):
        return ModelParams((name, value.copy()) for name, value in self.items())

    def shapes(self):
        return OrderedDict((name, value.shape) for name, value in self.items())

    def all_finite(self):
        return all(np.all(np.isfinite(value)) for value in self.values())

    def num_parameters(self):
        return sum(value.size for value in self.values())

    def group(self, prefix):
        return group(self, prefix)


def group(params, prefix):
    """The tensors under `prefix/`, keyed by their local name."""
    start = len(prefix) + 1
    return OrderedDict((name[start:], value) for name, value in params.items()
                       if name.startswith(prefix + "/") and "/" not in name[start:])


class Batch(object):
    """
    A padded batch. The decoder reads `tgt_in` = <s> + target and is scored
    against `tgt_out` = target + </s>.
    """

    def __init__(self, src, src_mask, tgt_in=None, tgt_out=None, tgt_mask=None):
        self.src = src
        self.src_mask = src_mask
        self.tgt_in = tgt_in
        self.tgt_out = tgt_out
        self.tgt_mask = tgt_mask

    @property
    def size(self):
        return self.src.shape[0]

    @property
    def num_target_tokens(self):
        return int(self.tgt_mask.sum())


def _pad(sequences, length):
    ids = np.zeros((len(sequences), length), dtype=np.int64)
    mask = np.zeros((len(sequences), length), dtype=bool)
    for row, sequence in enumerate(sequences):
        ids[row, :len(sequence)] = sequence
        mask[row, :len(sequence)] = True
    return ids, mask


def _check_ids(ids, vocab_size, max_len, side):
    if max_len is not None and len(ids) > max_len:
        raise LengthExceeded("%s sequence of length %d exceeds the limit of %d"
                             % (side, len(ids), max_len))
    for i in ids:
        if not 0 <= i < vocab_size:
            raise IdOutOfRange("%s id %d outside vocabulary of size %d" % (side, i, vocab_size))


class Seq2Seq(object):
    """The network for one HyperParams setting and pair of vocabulary sizes."""

    def __init__(self, hp, src_vocab_size, tgt_vocab_size):
        self.hp = hp
        self.src_vocab_size = src_vocab_size
        self.tgt_vocab_size = tgt_vocab_size
        self.d = hp.num_units
        self.cell = get_cell(hp.unit_type, hp.num_units, hp.forget_bias)
        self.attention = get_attention(hp.attention, hp.num_units)

    @classmethod
    def for_params(cls, hp, params):
        return cls(hp, params["src_embedding"].shape[0], params["tgt_embedding"].shape[0])

    # --- structure ----------------------------------------------------------

    def encoder_stacks(self):
        """(prefix, number of layers) for each encoder stack."""
        if self.hp.bidirectional:
            half = self.hp.num_layers // 2
            return [("encoder/fw", half), ("encoder/bw", half)]
        return [("encoder", self.hp.num_layers)]

    def init_params(self, rng):
        d = self.d
        params = ModelParams()
        params["src_embedding"] = uniform(rng, (self.src_vocab_size, d))
        params["tgt_embedding"] = uniform(rng, (self.tgt_vocab_size, d))
        stacks = self.encoder_stacks() + [("decoder", self.hp.num_layers)]
        for prefix, num_layers in stacks:
            for layer in range(num_layers):
                for name, value in self.cell.init_params(rng, d).items():
                    params["%s/%d/%s" % (prefix, layer, name)] = value
            if prefix == "encoder/bw":
                params["encoder/bi_projection"] = uniform(rng, (2 * d, d))
        if self.attention is not None:
            for name, value in self.attention.init_params(rng).items():
                params["attention/" + name] = value
            params["attention/W_c"] = uniform(rng, (2 * d, d))
        params["output_projection"] = uniform(rng, (d, self.tgt_vocab_size))
        return params

    def param_shapes(self):
        return self.init_params(np.random.default_rng(0)).shapes()

    def make_batch(self, pairs, check_length=True):
        """
        Build a Batch from (src_ids, tgt_ids) pairs; tgt_ids may be None.
        Length limits are enforced unless `check_length` is False.
        """
        if not pairs:
            raise EmptySequence("A batch needs at least one sentence")
        src_limit = self.hp.max_src_len if check_length else None
        tgt_limit = self.hp.max_tgt_len if check_length else None
        sources = [list(src) for src, _ in pairs]
        for src in sources:
            if not src:
                raise EmptySequence("Cannot encode an empty source sentence")
            _check_ids(src, self.src_vocab_size, src_limit, "source")
        src, src_mask = _pad(sources, max(len(s) for s in sources))
        if any(tgt is None for _, tgt in pairs):
            return Batch(src, src_mask)
        targets = [list(tgt) for _, tgt in pairs]
        for tgt in targets:
            _check_ids(tgt, self.tgt_vocab_size, tgt_limit, "target")
        length = max(len(t) for t in targets) + 1
        tgt_in, tgt_mask = _pad([[SOS_ID] + t for t in targets], length)
        tgt_out, _ = _pad([t + [EOS_ID] for t in targets], length)
        return Batch(src, src_mask, tgt_in, tgt_out, tgt_mask)

    # --- recurrent stacks ---------------------------------------------------

    def _dropout_mask(self, rng, shape, training):
        if not training or self.hp.dropout == 0.0:
            return None
        keep = 1.0 - self.hp.dropout
        return (rng.random(shape) < keep) / keep

    def _run_stack(self, params, prefix, X, mask, init_states, rng=None, training=False):
        batch, steps, _ = X.shape
        m = mask[:, :, np.newaxis].astype(np.float64)
        finals = []
        caches = []
        for layer, state in enumerate(init_states):
            p = group(params, "%s/%d" % (prefix, layer))
            drop = self._dropout_mask(rng, X.shape, training)
            X_in = X if drop is None else X * drop
            outputs = np.zeros((batch, steps, self.d))
            step_caches = []
            for t in range(steps):
                new_state, cache = self.cell.step(p, X_in[:, t], state)
                mt = m[:, t]
                state = tuple(mt * new + (1.0 - mt) * old for new, old in zip(new_state, state))
                outputs[:, t] = state[0]
                step_caches.append(cache)
            if self.hp.residual and layer > 0:
                outputs = outputs + X
            finals.append(state)
            caches.append((drop, step_caches))
            X = outputs
        return X, finals, caches

    def _run_stack_backward(self, params, prefix, dOut, dfinals, caches, mask, grads):
        m = mask[:, :, np.newaxis].astype(np.float64)
        dinits = [None] * len(caches)
        for layer in reversed(range(len(caches))):
            name = "%s/%d" % (prefix, layer)
            p = group(params, name)
            drop, step_caches = caches[layer]
            dstate = dfinals[layer]
            if dstate is None:
                dstate = self.cell.zero_state(dOut.shape[0])
            dX_in = None
            for t in reversed(range(dOut.shape[1])):
                dstate = (dstate[0] + dOut[:, t],) + tuple(dstate[1:])
                mt = m[:, t]
                dx, dprev, step_grads = self.cell.step_backward(
                    p, tuple(mt * ds for ds in dstate), step_caches[t])
                dstate = tuple((1.0 - mt) * ds + dp for ds, dp in zip(dstate, dprev))
                if dX_in is None:
                    dX_in = np.zeros((dOut.shape[0], dOut.shape[1], dx.shape[1]))
                dX_in[:, t] = dx
                for key, value in step_grads.items():
                    grads[name + "/" + key] += value
            dX = dX_in if drop is None else dX_in * drop
            if self.hp.residual and layer > 0:
                dX = dX + dOut
            dinits[layer] = dstate
            dOut = dX
        return dOut, dinits

    # --- encoder ------------------------------------------------------------

    def _encode(self, params, src, src_mask, rng=None, training=False):
        X = params["src_embedding"][src]
        batch = src.shape[0]
        if not self.hp.bidirectional:
            zeros = [self.cell.zero_state(batch) for _ in range(self.hp.num_layers)]
            K, finals, caches = self._run_stack(params, "encoder", X, src_mask, zeros, rng, training)
            return K, finals, ("uni", caches)
        half = self.hp.num_layers // 2
        zeros = [self.cell.zero_state(batch) for _ in range(half)]
        H_fw, finals_fw, caches_fw = self._run_stack(params, "encoder/fw", X, src_mask,
                                                     zeros, rng, training)
        H_bw, finals_bw, caches_bw = self._run_stack(params, "encoder/bw", X[:, ::-1],
                                                     src_mask[:, ::-1], zeros, rng, training)
        both = np.concatenate([H_fw, H_bw[:, ::-1]], axis=-1)
        K = both @ params["encoder/bi_projection"]
        finals = []
        for fw, bw in zip(finals_fw, finals_bw):
            finals.extend([fw, bw])
        return K, finals, ("bi", (caches_fw, caches_bw, both))

    def _encode_backward(self, params, src, src_mask, dK, dfinals, cache, grads):
        kind, caches = cache
        if kind == "uni":
            dX, _ = self._run_stack_backward(params, "encoder", dK, dfinals, caches, src_mask, grads)
        else:
            caches_fw, caches_bw, both = caches
            grads["encoder/bi_projection"] += np.einsum("bsk,bsd->kd", both, dK)
            dboth = dK @ params["encoder/bi_projection"].T
            dX_fw, _ = self._run_stack_backward(params, "encoder/fw", dboth[..., :self.d],
                                                dfinals[0::2], caches_fw, src_mask, grads)
            dX_bw, _ = self._run_stack_backward(params, "encoder/bw", dboth[..., self.d:][:, ::-1],
                                                dfinals[1::2], caches_bw, src_mask[:, ::-1], grads)
            dX = dX_fw + dX_bw[:, ::-1]
        dX = dX * src_mask[:, :, np.newaxis]
        np.add.at(grads["src_embedding"], src, dX)

    # --- attention ----------------------------------------------------------

    def _attend(self, params, H, K, src_mask):
        """Return the attentional hidden states for decoder outputs H over keys K."""
        att = group(params, "attention")
        scores, score_cache = self.attention.scores(att, H, K)
        scores = np.where(src_mask[:, np.newaxis, :], scores, -np.inf)
        scores = scores - scores.max(axis=-1, keepdims=True)
        weights = np.exp(scores)
        alignments = weights / weights.sum(axis=-1, keepdims=True)
        context = np.einsum("bts,bsd->btd", alignments, K)
        joined = np.concatenate([context, H], axis=-1)
        A = np.tanh(joined @ att["W_c"])
        return A, (score_cache, alignments, joined, A, K, H)

    def _attend_backward(self, params, dA, cache, grads):
        att = group(params, "attention")
        score_cache, alignments, joined, A, K, H = cache
        dpre = dA * (1.0 - A ** 2)
        grads["attention/W_c"] += np.einsum("btk,btd->kd", joined, dpre)
        djoined = dpre @ att["W_c"].T
        dcontext = djoined[..., :self.d]
        dH = djoined[..., self.d:]
        dalign = np.einsum("btd,bsd->bts", dcontext, K)
        dK = np.einsum("bts,btd->bsd", alignments, dcontext)
        dscores = alignments * (dalign - (dalign * alignments).sum(axis=-1, keepdims=True))
        dH_score, dK_score, score_grads = self.attention.scores_backward(att, dscores, score_cache)
        for name, value in score_grads.items():
            grads["attention/" + name] += value
        return dH + dH_score, dK + dK_score

    # --- loss ---------------------------------------------------------------

    def _forward(self, params, batch, rng=None, training=False):
        K, finals, enc_cache = self._encode(params, batch.src, batch.src_mask, rng, training)
        Y = params["tgt_embedding"][batch.tgt_in]
        H, _, dec_caches = self._run_stack(params, "decoder", Y, batch.tgt_mask, finals,
                                           rng, training)
        att_cache = None
        top = H
        if self.attention is not None:
            top, att_cache = self._attend(params, H, K, batch.src_mask)
        logits = top @ params["output_projection"]
        log_probs = log_softmax(logits)
        gold = np.take_along_axis(log_probs, batch.tgt_out[..., np.newaxis], axis=-1)[..., 0]
        gold = np.where(batch.tgt_mask, gold, 0.0)
        cache = (K, enc_cache, dec_caches, att_cache, top, log_probs)
        return gold, cache

    def loss(self, params, batch, rng=None, training=False):
        """Summed masked cross-entropy divided by the batch size."""
        if training and rng is None:
            rng = get_rng(self.hp.seed, STREAM_TRAIN)
        with np.errstate(over="ignore", invalid="ignore"):
            gold, cache = self._forward(params, batch, rng, training)
            loss = -gold.sum() / batch.size
        if not np.isfinite(loss):
            raise NonFiniteLoss("loss is %s" % loss)
        return loss, cache

    def loss_and_gradients(self, params, batch, rng=None, training=False):
        loss, cache = self.loss(params, batch, rng, training)
        K, enc_cache, dec_caches, att_cache, top, log_probs = cache
        grads = ModelParams((name, np.zeros_like(value)) for name, value in params.items())

        dlogits = np.exp(log_probs)
        np.put_along_axis(dlogits, batch.tgt_out[..., np.newaxis],
                          np.take_along_axis(dlogits, batch.tgt_out[..., np.newaxis], axis=-1) - 1.0,
                          axis=-1)
        dlogits *= batch.tgt_mask[..., np.newaxis] / batch.size
        grads["output_projection"] += np.einsum("btd,btv->dv", top, dlogits)
        dtop = dlogits @ params["output_projection"].T
        if self.attention is not None:
            dH, dK = self._attend_backward(params, dtop, att_cache, grads)
        else:
            dH, dK = dtop, np.zeros_like(K)
        dY, dfinals = self._run_stack_backward(params, "decoder", dH,
                                               [None] * self.hp.num_layers, dec_caches,
                                               batch.tgt_mask, grads)
        dY = dY * batch.tgt_mask[:, :, np.newaxis]
        np.add.at(grads["tgt_embedding"], batch.tgt_in, dY)
        self._encode_backward(params, batch.src, batch.src_mask, dK, dfinals, enc_cache, grads)
        return loss, grads

    def gold_logprobs(self, params, batch):
        """Per-sentence log-probabilities of the reference tokens, including </s>."""
        gold, _ = self._forward(params, batch)
        lengths = batch.tgt_mask.sum(axis=1)
        return [gold[row, :lengths[row]].tolist() for row in range(batch.size)]

    # --- inference ----------------------------------------------------------

    def encode(self, params, src_ids, check_length=True):
        batch = self.make_batch([(src_ids, None)], check_length)
        K, finals, _ = self._encode(params, batch.src, batch.src_mask)
        return K, finals, batch.src_mask

    def decode_step(self, params, prev_ids, states, K, src_mask):
        """Advance the decoder by one token for each row; return (logits, new_states)."""
        x = params["tgt_embedding"][prev_ids]
        new_states = []
        for layer, state in enumerate(states):
            new_state, _ = self.cell.step(group(params, "decoder/%d" % layer), x, state)
            h = new_state[0]
            if self.hp.residual and layer > 0:
                h = h + x
            new_states.append(new_state)
            x = h
        top = x[:, np.newaxis, :]
        if self.attention is not None:
            top, _ = self._attend(params, top, K, src_mask)
        logits = (top @ params["output_projection"])[:, 0, :]
        check_finite("decoder step", logits, *[s for state in new_states for s in state])
        return logits, new_states

    def greedy_decode(self, params, src_ids, max_len, check_length=True):
        """Return (ids, logprobs, ended_by_eos) for one source sentence."""
        K, states, src_mask = self.encode(params, src_ids, check_length)
        prev = SOS_ID
        ids = []
        logprobs = []
        for _ in range(max_len):
            logits, states = self.decode_step(params, np.array([prev]), states, K, src_mask)
            best = int(np.argmax(logits[0]))
            logprobs.append(float(log_softmax(logits[0])[best]))
            if best == EOS_ID:
                return ids, logprobs, True
            ids.append(best)
            prev = best
        return ids, logprobs, False


def log_softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


class DecodeResult(object):

    def __init__(self, tokens, token_logprobs, ended_by_eos, ids=None):
        self.tokens = tokens
        self.token_logprobs = token_logprobs
        self.ended_by_eos = ended_by_eos
        self.ids = ids

    def __repr__(self):
        return "DecodeResult(%r, ended_by_eos=%s)" % (self.tokens, self.ended_by_eos)


# --- functional interface ----------------------------------------------------

def init_params(hp, vocab_src, vocab_tgt):
    """Draw all weights from the INIT stream of `hp.seed`."""
    model = Seq2Seq(hp, len(vocab_src), len(vocab_tgt))
    params = model.init_params(get_rng(hp.seed, STREAM_INIT))
    logger.debug("Initialized %d parameters in %d tensors", params.num_parameters(), len(params))
    return params


def encode(src_ids, hp, params):
    """Return (annotations of shape (len(src_ids), d), final states per decoder layer)."""
    model = Seq2Seq.for_params(hp, params)
    K, finals, _ = model.encode(params, src_ids)
    return K[0], [tuple(s[0] for s in state) for state in finals]


def decode_step(prev_tgt_id, state, annotations, hp, params):
    """
    One decoder step for a single sentence. `state` is the list of per-layer
    states returned by :func:`encode` (or a previous call); returns
    (logits, new_state).
    """
    model = Seq2Seq.for_params(hp, params)
    annotations = np.asarray(annotations)
    if not 0 <= prev_tgt_id < model.tgt_vocab_size:
        raise IdOutOfRange("target id %d outside vocabulary" % prev_tgt_id)
    states = [tuple(np.asarray(s)[np.newaxis, :] for s in layer) for layer in state]
    src_mask = np.ones((1, annotations.shape[0]), dtype=bool)
    logits, new_states = model.decode_step(params, np.array([prev_tgt_id]), states,
                                           annotations[np.newaxis], src_mask)
    return logits[0], [tuple(s[0] for s in layer) for layer in new_states]


def forward_loss(batch, hp, params, training=False, rng=None):
    """
    Loss of a list of (src_ids, tgt_ids) pairs (or a Batch), feeding the
    gold previous token at every step. Return (loss, number of scored
    target tokens).
    """
    model = Seq2Seq.for_params(hp, params)
    if not isinstance(batch, Batch):
        batch = model.make_batch(batch)
    loss, _ = model.loss(params, batch, rng, training)
    return loss, batch.num_target_tokens


def greedy_decode(src_ids, hp, params, max_len=None, vocab_tgt=None):
    model = Seq2Seq.for_params(hp, params)
    if max_len is None:
        max_len = hp.max_tgt_len
    ids, logprobs, ended = model.greedy_decode(params, src_ids, max_len)
    if vocab_tgt is not None:
        tokens = vocab_tgt.decode(ids)
    else:
        tokens = [str(i) for i in ids]
    return DecodeResult(TokenSequence(tokens, hp.tgt_lang), logprobs, ended, ids)


def target_logprobs(sources, targets, hp, params, vocab_src, vocab_tgt, batch_size=None):
    """
    Gold-prefix log-probabilities of every reference token (and the
    closing </s>) for aligned lists of source and target TokenSequences.
    """
    model = Seq2Seq.for_params(hp, params)
    batch_size = batch_size or hp.batch_size
    result = []
    for start in range(0, len(sources), batch_size):
        chunk = [(vocab_src.encode(src), vocab_tgt.encode(tgt))
                 for src, tgt in zip(sources[start:start + batch_size],
                                     targets[start:start + batch_size])]
        result.extend(model.gold_logprobs(params, model.make_batch(chunk, check_length=False)))
    return result
