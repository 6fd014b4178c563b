"""
Unit tests for the autoformal.model.seq2seq module
"""

import unittest

import numpy as np

from autoformal.core import get_rng
from autoformal.corpus import Vocabulary, SOS_ID, EOS_ID
from autoformal.model import (Seq2Seq, ModelParams, NonFiniteLoss, IdOutOfRange, LengthExceeded,
                              EmptySequence, init_params, encode, decode_step, forward_loss,
                              greedy_decode, log_softmax, target_logprobs)
from autoformal.lexing import TokenSequence

from .utils import tiny_hparams

SRC_VOCAB = Vocabulary(["$", "X", "Y", "Z", "\\subseteq", "="])
TGT_VOCAB = Vocabulary(["X", "Y", "Z", "c=", "=", ";"])


def build(**overrides):
    hp = tiny_hparams(**overrides)
    model = Seq2Seq(hp, len(SRC_VOCAB), len(TGT_VOCAB))
    return hp, model, model.init_params(get_rng(hp.seed, 1))


PAIRS = [([3, 4, 7, 5, 3], [3, 6, 4, 8]), ([3, 5, 3], [5, 8]), ([4, 8, 6], [4, 7, 5, 8])]


class TestParameterLayout(unittest.TestCase):

    def test_unidirectional_names(self):
        hp, model, params = build(attention="scaled_luong")
        self.assertEqual(list(params), [
            "src_embedding", "tgt_embedding",
            "encoder/0/kernel", "encoder/0/bias", "encoder/1/kernel", "encoder/1/bias",
            "decoder/0/kernel", "decoder/0/bias", "decoder/1/kernel", "decoder/1/bias",
            "attention/W_a", "attention/g", "attention/W_c", "output_projection"])
        self.assertEqual(params["src_embedding"].shape, (len(SRC_VOCAB), 6))
        self.assertEqual(params["output_projection"].shape, (6, len(TGT_VOCAB)))
        self.assertEqual(params["attention/W_c"].shape, (12, 6))

    def test_bidirectional_names(self):
        hp, model, params = build(encoder_type="bi", num_layers=2, attention="none")
        self.assertIn("encoder/fw/0/kernel", params)
        self.assertIn("encoder/bw/0/kernel", params)
        self.assertEqual(params["encoder/bi_projection"].shape, (12, 6))
        self.assertNotIn("encoder/0/kernel", params)
        self.assertFalse(any(name.startswith("attention/") for name in params))

    def test_gru_names(self):
        hp, model, params = build(unit_type="gru", num_layers=1, attention="bahdanau")
        self.assertIn("decoder/0/candidate_kernel", params)
        self.assertIn("attention/v", params)

    def test_param_shapes_match_init(self):
        hp, model, params = build()
        self.assertEqual(model.param_shapes(), params.shapes())

    def test_all_float64(self):
        hp, model, params = build()
        self.assertTrue(all(value.dtype == np.float64 for value in params.values()))

    def test_init_is_deterministic(self):
        hp = tiny_hparams(seed=11)
        a = init_params(hp, SRC_VOCAB, TGT_VOCAB)
        b = init_params(hp, SRC_VOCAB, TGT_VOCAB)
        c = init_params(hp.replace(seed=12), SRC_VOCAB, TGT_VOCAB)
        for name in a:
            np.testing.assert_array_equal(a[name], b[name])
        self.assertFalse(np.array_equal(a["output_projection"], c["output_projection"]))

    def test_model_params_helpers(self):
        hp, model, params = build()
        copy = params.copy()
        copy["output_projection"][0, 0] += 1.0
        self.assertNotEqual(copy["output_projection"][0, 0], params["output_projection"][0, 0])
        self.assertTrue(params.all_finite())
        self.assertEqual(params.num_parameters(), sum(v.size for v in params.values()))
        self.assertEqual(list(params.group("decoder/1")), ["kernel", "bias"])
        self.assertIsInstance(copy, ModelParams)


class TestMakeBatch(unittest.TestCase):

    def setUp(self):
        self.hp, self.model, self.params = build(max_src_len=5, max_tgt_len=4)

    def test_target_shift(self):
        batch = self.model.make_batch([([3, 4], [5, 6]), ([3], [7])])
        np.testing.assert_array_equal(batch.tgt_in[0], [SOS_ID, 5, 6])
        np.testing.assert_array_equal(batch.tgt_out[0], [5, 6, EOS_ID])
        np.testing.assert_array_equal(batch.tgt_mask[1], [True, True, False])
        np.testing.assert_array_equal(batch.src_mask[1], [True, False])
        self.assertEqual(batch.num_target_tokens, 5)
        self.assertEqual(batch.size, 2)

    def test_source_only(self):
        batch = self.model.make_batch([([3, 4], None)])
        self.assertIsNone(batch.tgt_in)

    def test_length_limits(self):
        self.assertRaises(LengthExceeded, self.model.make_batch, [([3] * 6, [3])])
        self.assertRaises(LengthExceeded, self.model.make_batch, [([3], [3] * 5)])
        batch = self.model.make_batch([([3] * 6, [3] * 5)], check_length=False)
        self.assertEqual(batch.src.shape, (1, 6))

    def test_ids_out_of_range(self):
        self.assertRaises(IdOutOfRange, self.model.make_batch, [([len(SRC_VOCAB)], [3])])
        self.assertRaises(IdOutOfRange, self.model.make_batch, [([3], [-1])])

    def test_empty(self):
        self.assertRaises(EmptySequence, self.model.make_batch, [])
        self.assertRaises(EmptySequence, self.model.make_batch, [([], [3])])


class TestLoss(unittest.TestCase):

    def test_padding_does_not_change_per_sentence_loss(self):
        for attention in ("none", "luong", "normed_bahdanau"):
            hp, model, params = build(attention=attention)
            joint, _ = model.loss(params, model.make_batch(PAIRS))
            separate = [model.loss(params, model.make_batch([pair]))[0] for pair in PAIRS]
            self.assertAlmostEqual(joint * len(PAIRS), sum(separate), places=10)

    def test_padding_invariance_bidirectional(self):
        hp, model, params = build(encoder_type="bi", attention="bahdanau")
        joint, _ = model.loss(params, model.make_batch(PAIRS))
        separate = [model.loss(params, model.make_batch([pair]))[0] for pair in PAIRS]
        self.assertAlmostEqual(joint * len(PAIRS), sum(separate), places=10)

    def test_gold_logprobs_sum_to_loss(self):
        hp, model, params = build()
        batch = model.make_batch(PAIRS)
        loss, _ = model.loss(params, batch)
        gold = model.gold_logprobs(params, batch)
        self.assertEqual([len(g) for g in gold], [len(t) + 1 for _, t in PAIRS])
        self.assertAlmostEqual(-sum(sum(g) for g in gold) / len(PAIRS), loss, places=10)

    def test_forward_loss_counts_tokens(self):
        hp, model, params = build()
        loss, ntokens = forward_loss(PAIRS, hp, params)
        self.assertEqual(ntokens, sum(len(t) + 1 for _, t in PAIRS))
        self.assertGreater(loss, 0.0)

    def test_untrained_loss_is_near_uniform(self):
        hp, model, params = build(attention="none")
        loss, ntokens = forward_loss(PAIRS, hp, params)
        per_token = loss * len(PAIRS) / ntokens
        self.assertAlmostEqual(per_token, np.log(len(TGT_VOCAB)), delta=0.2)

    def test_non_finite_loss(self):
        hp, model, params = build()
        params["output_projection"][:] = np.nan
        self.assertRaises(NonFiniteLoss, model.loss, params, model.make_batch(PAIRS))

    def test_dropout_only_in_training(self):
        hp, model, params = build(dropout=0.5)
        batch = model.make_batch(PAIRS)
        eval_a, _ = model.loss(params, batch)
        eval_b, _ = model.loss(params, batch)
        train, _ = model.loss(params, batch, get_rng(0, 2), training=True)
        self.assertEqual(eval_a, eval_b)
        self.assertNotEqual(train, eval_a)

    def test_residual_changes_output(self):
        hp, model, params = build(residual=False)
        residual_model = Seq2Seq(hp.replace(residual=True), len(SRC_VOCAB), len(TGT_VOCAB))
        batch = model.make_batch(PAIRS)
        self.assertNotAlmostEqual(model.loss(params, batch)[0],
                                  residual_model.loss(params, batch)[0])

    def test_padding_rows_get_no_embedding_gradient(self):
        hp, model, params = build()
        loss, grads = model.loss_and_gradients(params, model.make_batch(PAIRS))
        np.testing.assert_array_equal(grads["src_embedding"][0], 0.0)
        self.assertEqual(set(grads), set(params))


class TestAttentionWeights(unittest.TestCase):

    def setUp(self):
        rng = get_rng(11)
        self.H = rng.normal(size=(2, 3, 6))
        self.K = rng.normal(size=(2, 4, 6))
        self.mask = np.array([[True, True, True, True], [True, True, False, False]])

    def attend(self, model, params, H, K, mask):
        _, cache = model._attend(params, H, K, mask)
        alignments, joined = cache[1], cache[2]
        return alignments, joined[..., :model.d]

    def test_weights_are_a_distribution_over_unmasked_sources(self):
        for attention in ("luong", "scaled_luong", "bahdanau", "normed_bahdanau"):
            hp, model, params = build(attention=attention)
            alignments, _ = self.attend(model, params, self.H, self.K, self.mask)
            np.testing.assert_allclose(alignments.sum(axis=-1), 1.0, rtol=0, atol=1e-12)
            np.testing.assert_array_equal(alignments[1, :, 2:], 0.0)
            self.assertTrue(np.all(alignments >= 0.0))

    def test_equal_scores_give_the_mean_annotation(self):
        hp, model, params = build(attention="luong")
        params["attention/W_a"][:] = 0.0
        alignments, context = self.attend(model, params, self.H, self.K, self.mask)
        np.testing.assert_allclose(alignments[0], 0.25)
        np.testing.assert_allclose(context[0], np.tile(self.K[0].mean(axis=0), (3, 1)), atol=1e-12)
        np.testing.assert_allclose(context[1], np.tile(self.K[1, :2].mean(axis=0), (3, 1)),
                                   atol=1e-12)

    def test_single_annotation_is_the_context(self):
        for attention in ("luong", "bahdanau"):
            hp, model, params = build(attention=attention)
            K = self.K[:1, :1]
            alignments, context = self.attend(model, params, self.H[:1], K, np.array([[True]]))
            np.testing.assert_array_equal(alignments, 1.0)
            np.testing.assert_allclose(context[0], np.tile(K[0, 0], (3, 1)), rtol=0, atol=1e-15)


class TestOutputDistribution(unittest.TestCase):

    def test_uniform_logits_give_exact_loss(self):
        for attention in ("none", "luong"):
            hp, model, params = build(attention=attention)
            params["output_projection"][:] = 0.0
            loss, _ = model.loss(params, model.make_batch(PAIRS))
            ntokens = sum(len(t) + 1 for _, t in PAIRS)
            self.assertAlmostEqual(loss, ntokens * np.log(len(TGT_VOCAB)) / len(PAIRS), places=12)

    def test_constant_shift_keeps_argmax_and_log_probs(self):
        hp, model, params = build()
        K, states, mask = model.encode(params, PAIRS[0][0])
        logits, _ = model.decode_step(params, np.array([SOS_ID]), states, K, mask)
        for shift in (-1e3, 3.5, 1e3):
            self.assertEqual(int(np.argmax(logits + shift)), int(np.argmax(logits)))
            np.testing.assert_allclose(log_softmax(logits + shift), log_softmax(logits),
                                       rtol=0, atol=1e-9)


class TestDecoding(unittest.TestCase):

    def test_greedy_matches_gold_prefix_scores(self):
        for attention in ("none", "scaled_luong", "bahdanau"):
            hp, model, params = build(attention=attention)
            src = PAIRS[0][0]
            ids, logprobs, ended = model.greedy_decode(params, src, 6)
            gold = model.gold_logprobs(params, model.make_batch([(src, ids)], check_length=False))[0]
            if not ended:
                gold = gold[:-1]
            np.testing.assert_allclose(gold, logprobs, rtol=1e-10, atol=1e-12)

    def test_greedy_respects_max_len(self):
        hp, model, params = build()
        ids, logprobs, ended = model.greedy_decode(params, [3, 4], 3)
        self.assertLessEqual(len(ids), 3)
        self.assertTrue(all(lp <= 0.0 for lp in logprobs))
        self.assertNotIn(EOS_ID, ids)

    def test_ties_go_to_the_lowest_id(self):
        hp, model, params = build(attention="none")
        params["output_projection"][:] = 0.0
        ids, logprobs, ended = model.greedy_decode(params, [3], 5)
        self.assertFalse(ended)
        self.assertEqual(ids, [0] * 5)
        np.testing.assert_allclose(logprobs, -np.log(len(TGT_VOCAB)))

    def test_functional_interface(self):
        hp, model, params = build()
        annotations, state = encode([3, 4, 5], hp, params)
        self.assertEqual(annotations.shape, (3, hp.num_units))
        self.assertEqual(len(state), hp.num_layers)
        self.assertEqual(len(state[0]), 2)
        logits, new_state = decode_step(SOS_ID, state, annotations, hp, params)
        self.assertEqual(logits.shape, (len(TGT_VOCAB),))
        result = greedy_decode([3, 4, 5], hp, params, max_len=4, vocab_tgt=TGT_VOCAB)
        self.assertEqual(result.tokens.language, "mizar")
        if result.ids:
            self.assertEqual(result.ids[0], int(np.argmax(logits)))
        else:
            self.assertTrue(result.ended_by_eos)
            self.assertEqual(int(np.argmax(logits)), EOS_ID)

    def test_decode_step_rejects_bad_id(self):
        hp, model, params = build()
        annotations, state = encode([3], hp, params)
        self.assertRaises(IdOutOfRange, decode_step, len(TGT_VOCAB), state, annotations, hp, params)

    def test_empty_source(self):
        hp, model, params = build()
        self.assertRaises(EmptySequence, encode, [], hp, params)

    def test_target_logprobs(self):
        hp, model, params = build()
        sources = [TokenSequence(["$", "X", "$"], "latex"), TokenSequence(["$", "Y", "$"], "latex")]
        targets = [TokenSequence(["X", ";"], "mizar"), TokenSequence(["unknown"], "mizar")]
        logprobs = target_logprobs(sources, targets, hp, params, SRC_VOCAB, TGT_VOCAB, batch_size=1)
        self.assertEqual([len(lp) for lp in logprobs], [3, 2])

    def test_log_softmax(self):
        values = log_softmax(np.array([[1000.0, 1000.0]]))
        np.testing.assert_allclose(values, np.log([[0.5, 0.5]]))


if __name__ == '__main__':
    unittest.main()
