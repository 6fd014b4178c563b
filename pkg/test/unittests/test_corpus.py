"""
Unit tests for the autoformal.corpus module
"""

import os
import unittest

from autoformal.core import DataError
from autoformal.corpus import (SentencePair, Vocabulary, align_by_position, split_corpus,
                               build_vocab, compute_overlap, read_tagged, read_corpus,
                               write_corpus, write_flags, read_flags, DuplicatePosition,
                               SizeMismatch, SPECIALS, UNK_ID, SOS_ID, EOS_ID)
from autoformal.lexing import SymbolTable, TokenSequence, LATEX_SIDE, MIZAR_SIDE

from .utils import TemporaryDirectoryMixin, make_pair, tiny_corpus


class TestSentencePair(unittest.TestCase):

    def test_empty_side_rejected(self):
        self.assertRaises(DataError, SentencePair, TokenSequence([], LATEX_SIDE),
                          TokenSequence(["X"], MIZAR_SIDE))

    def test_positions_are_one_based(self):
        self.assertRaises(DataError, make_pair, "x", "X", (0, 3))

    def test_side(self):
        pair = make_pair("$ X $", "X")
        self.assertEqual(pair.side("mizar").joined(), "X")
        self.assertRaises(ValueError, pair.side, "coq")


class TestVocabulary(TemporaryDirectoryMixin, unittest.TestCase):

    def test_specials_come_first(self):
        vocab = Vocabulary(["X"])
        self.assertEqual(vocab.tokens[:3], list(SPECIALS))
        self.assertEqual((UNK_ID, SOS_ID, EOS_ID), (0, 1, 2))
        self.assertEqual(vocab.encode(["X"]), [3])

    def test_unknown_tokens_map_to_unk(self):
        self.assertEqual(Vocabulary(["X"]).encode(["Y", "X"]), [UNK_ID, 3])

    def test_decode(self):
        vocab = Vocabulary(["X", "Y"])
        self.assertEqual(vocab.decode([4, 3]), ["Y", "X"])

    def test_file_round_trip(self):
        path = os.path.join(self.tmpdir, "vocab.mizar")
        vocab = Vocabulary(["X", "c=", ";"])
        vocab.save(path)
        self.assertEqual(Vocabulary.from_file(path), vocab)

    def test_file_without_specials_rejected(self):
        path = os.path.join(self.tmpdir, "vocab.mizar")
        with open(path, "w") as f:
            f.write("X\nY\n")
        self.assertRaises(DataError, Vocabulary.from_file, path)


class TestBuildVocab(unittest.TestCase):

    def test_first_occurrence_order(self):
        sentence = TokenSequence.from_line("X c= Y & Y c= Z implies X c= Z ;", MIZAR_SIDE)
        vocab = build_vocab([sentence])
        self.assertEqual(vocab.tokens,
                         list(SPECIALS) + ["X", "c=", "Y", "&", "Z", "implies", ";"])

    def test_empty_corpus(self):
        self.assertEqual(len(build_vocab([])), 3)


class TestAlignByPosition(unittest.TestCase):

    def test_pairs_matching_positions(self):
        latex = [((1, 1), "$X \\subseteq Y$"), ((5, 3), "\\label{a}$Y = Z$")]
        mizar = [((5, 3), "Y = Z;"), ((1, 1), "X c= Y;")]
        pairs = align_by_position(latex, mizar, SymbolTable(symbols=["c="]))
        self.assertEqual(len(pairs), 2)
        self.assertEqual(pairs[0].latex.joined(), "$ X \\subseteq Y $")
        self.assertEqual(pairs[0].mizar.joined(), "X c= Y ;")
        self.assertEqual(pairs[1].latex.joined(), "$ Y = Z $")
        self.assertEqual(pairs[1].position, (5, 3))
        self.assertEqual(pairs.dropped, {"latex": 0, "mizar": 0})

    def test_unpaired_entries_are_counted(self):
        latex = [((1, 1), "$x$"), ((2, 1), "$y$")]
        mizar = [((1, 1), "x;"), ((9, 9), "z;")]
        pairs = align_by_position(latex, mizar)
        self.assertEqual(len(pairs), 1)
        self.assertEqual(pairs.dropped, {"latex": 1, "mizar": 1})

    def test_pairs_with_an_empty_side_are_skipped(self):
        latex = [((1, 1), "\\label{a}"), ((2, 1), "$x$"), ((3, 1), "$y$")]
        mizar = [((1, 1), "x;"), ((2, 1), "x;"), ((3, 1), "   ")]
        pairs = align_by_position(latex, mizar)
        self.assertEqual([pair.position for pair in pairs], [(2, 1)])
        self.assertEqual(pairs.empty, 2)
        self.assertEqual(pairs.dropped, {"latex": 0, "mizar": 0})

    def test_duplicate_position(self):
        latex = [((1, 1), "$x$"), ((1, 1), "$y$")]
        self.assertRaises(DuplicatePosition, align_by_position, latex, [])


class TestSplitCorpus(unittest.TestCase):

    def setUp(self):
        self.pairs = [make_pair("$ x%d $" % i, "x%d ;" % i, (i + 1, 1)) for i in range(20)]

    def test_sizes(self):
        split = split_corpus(self.pairs, (12, 3, 3, 2), seed=1)
        self.assertEqual(split.sizes(), (12, 3, 3, 2))
        self.assertEqual(list(split.parts()), ["train", "dev", "test", "inference"])

    def test_parts_partition_the_corpus(self):
        split = split_corpus(self.pairs, (12, 3, 3, 2), seed=1)
        combined = split.train + split.dev + split.test + split.inference
        self.assertEqual(sorted(combined), sorted(self.pairs))

    def test_same_seed_same_split(self):
        a = split_corpus(self.pairs, (12, 3, 3, 2), seed=5)
        b = split_corpus(self.pairs, (12, 3, 3, 2), seed=5)
        self.assertEqual(a.train, b.train)
        self.assertEqual(a.inference, b.inference)

    def test_different_seed_different_split(self):
        a = split_corpus(self.pairs, (12, 3, 3, 2), seed=5)
        b = split_corpus(self.pairs, (12, 3, 3, 2), seed=6)
        self.assertNotEqual(a.train, b.train)

    def test_sizes_must_sum_to_corpus(self):
        self.assertRaises(SizeMismatch, split_corpus, self.pairs, (10, 3, 3, 2), 0)

    def test_negative_size(self):
        self.assertRaises(SizeMismatch, split_corpus, self.pairs, (22, -1, -1, 0), 0)

    def test_zero_sized_parts(self):
        split = split_corpus(self.pairs, (20, 0, 0, 0), seed=0)
        self.assertEqual(split.dev, [])


class TestComputeOverlap(unittest.TestCase):

    def test_flags_follow_latex_side(self):
        train = [make_pair("$ x $", "x ;"), make_pair("$ y $", "y ;")]
        inference = [make_pair("$ y $", "other ;"), make_pair("$ z $", "z ;")]
        count, flags = compute_overlap(train, inference)
        self.assertEqual(count, 1)
        self.assertEqual(flags, [True, False])

    def test_empty_inference(self):
        self.assertEqual(compute_overlap(tiny_corpus(), []), (0, []))


class TestFiles(TemporaryDirectoryMixin, unittest.TestCase):

    def test_corpus_round_trip_with_positions(self):
        prefix = os.path.join(self.tmpdir, "corpus")
        pairs = tiny_corpus()
        write_corpus(prefix, pairs)
        self.assertTrue(os.path.exists(prefix + ".pos"))
        self.assertEqual(read_corpus(prefix), pairs)

    def test_mismatched_sides(self):
        prefix = os.path.join(self.tmpdir, "corpus")
        with open(prefix + ".latex", "w") as f:
            f.write("$ x $\n$ y $\n")
        with open(prefix + ".mizar", "w") as f:
            f.write("x ;\n")
        self.assertRaises(SizeMismatch, read_corpus, prefix)

    def test_read_tagged(self):
        path = os.path.join(self.tmpdir, "tagged.latex")
        with open(path, "w") as f:
            f.write("3 7\t$x$ is real\n\n4 1\ty\n")
        self.assertEqual(read_tagged(path), [((3, 7), "$x$ is real"), ((4, 1), "y")])

    def test_read_tagged_malformed(self):
        path = os.path.join(self.tmpdir, "tagged.latex")
        with open(path, "w") as f:
            f.write("no tag here\n")
        self.assertRaises(DataError, read_tagged, path)

    def test_flags(self):
        path = os.path.join(self.tmpdir, "inference.overlap")
        write_flags(path, [True, False, True])
        with open(path) as f:
            self.assertEqual(f.read(), "1\n0\n1\n")
        self.assertEqual(read_flags(path), [True, False, True])

    def test_bad_flags(self):
        path = os.path.join(self.tmpdir, "inference.overlap")
        with open(path, "w") as f:
            f.write("1\nyes\n")
        self.assertRaises(DataError, read_flags, path)


if __name__ == '__main__':
    unittest.main()
