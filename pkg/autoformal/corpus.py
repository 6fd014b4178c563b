"""
Aligned corpus construction, splitting, vocabularies and overlap statistics.

Classes
-------

SentencePair - one aligned (LaTeX, Mizar) statement pair.
CorpusSplit  - the train/dev/test/inference partition of a corpus.
Vocabulary   - token <-> id mapping with the special tokens first.

On disk a corpus is a pair of parallel files `<prefix>.latex` and
`<prefix>.mizar` with one tokenized sentence per line, plus an optional
`<prefix>.pos` holding `LINE COLUMN` for every pair.


:license: BSD 2-clause, see LICENSE for details.
"""
import logging
import os
from collections import OrderedDict

from .core import DataError, get_rng, STREAM_SPLIT
from .lexing import (SymbolTable, TokenSequence, tokenize_latex, tokenize_mizar,
                     strip_markup, LATEX_SIDE, MIZAR_SIDE, LANGUAGES)

logger = logging.getLogger("autoformal")

UNK = "<unk>"
SOS = "<s>"
EOS = "</s>"
SPECIALS = (UNK, SOS, EOS)
UNK_ID, SOS_ID, EOS_ID = 0, 1, 2

PARTS = ("train", "dev", "test", "inference")


class DuplicatePosition(DataError):

    def __init__(self, position):
        self.position = position
        DataError.__init__(self, "two entries at line %d, column %d" % tuple(position))


class SizeMismatch(DataError):
    pass


class SentencePair(object):
    """An aligned pair of tokenized statements."""

    def __init__(self, latex, mizar, position=None):
        if len(latex) == 0 or len(mizar) == 0:
            raise DataError("Both sides of a sentence pair must be non-empty")
        if position is not None:
            line, column = position
            if line < 1 or column < 1:
                raise DataError("Positions are 1-based: got %s" % (position,))
            position = (int(line), int(column))
        self.latex = latex
        self.mizar = mizar
        self.position = position

    def side(self, language):
        """Return the sentence in `language` ('latex' or 'mizar')."""
        if language not in LANGUAGES:
            raise ValueError("Unknown language %r" % language)
        return getattr(self, language)

    def _key(self):
        return (self.latex.tokens, self.mizar.tokens, self.position or (0, 0))

    def __eq__(self, other):
        return isinstance(other, SentencePair) and self._key() == other._key()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __lt__(self, other):
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return "SentencePair(%r, %r, %r)" % (self.latex.joined(), self.mizar.joined(),
                                             self.position)


class CorpusSplit(object):

    def __init__(self, train, dev, test, inference, seed):
        self.train = train
        self.dev = dev
        self.test = test
        self.inference = inference
        self.seed = seed

    def parts(self):
        return OrderedDict((name, getattr(self, name)) for name in PARTS)

    def sizes(self):
        return tuple(len(part) for part in self.parts().values())


class Vocabulary(object):
    """
    An ordered list of unique tokens; ids are list positions. The special
    tokens <unk>, <s> and </s> always occupy ids 0, 1 and 2.
    """

    def __init__(self, tokens=()):
        self.tokens = list(SPECIALS)
        self.index = dict((token, i) for i, token in enumerate(self.tokens))
        for token in tokens:
            self.add(token)

    def add(self, token):
        if token not in self.index:
            self.index[token] = len(self.tokens)
            self.tokens.append(token)
        return self.index[token]

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def __ne__(self, other):
        return not self.__eq__(other)

    def encode(self, tokens):
        return [self.index.get(token, UNK_ID) for token in tokens]

    def decode(self, ids):
        return [self.tokens[i] for i in ids]

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for token in self.tokens:
                f.write(token + "\n")

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as f:
            tokens = [line.rstrip("\n") for line in f if line.strip()]
        if tuple(tokens[:3]) != SPECIALS:
            raise DataError("Vocabulary file %s must start with %s" % (path, ", ".join(SPECIALS)))
        return cls(tokens[3:])


class AlignedPairs(list):
    """
    A list of SentencePair that also records how many entries were dropped
    per side, and how many positional matches were skipped because one side
    tokenized to nothing.
    """

    def __init__(self, pairs=(), dropped=None, empty=0):
        list.__init__(self, pairs)
        self.dropped = dropped or {LATEX_SIDE: 0, MIZAR_SIDE: 0}
        self.empty = empty


def align_by_position(tagged_latex, mizar_source, table=None, blacklist=None):
    """
    Pair LaTeX formulas with the Mizar formulas starting at the same
    (line, column) position. Both sides are tokenized; entries without a
    partner are dropped and counted in the `dropped` attribute of the result.
    Matches where either side is empty after tokenization are skipped and
    counted in `empty`.
    """
    if table is None:
        table = SymbolTable()
    latex_by_position = _index_by_position(tagged_latex)
    mizar_by_position = _index_by_position(mizar_source)
    pairs = []
    empty = 0
    for position, latex in latex_by_position.items():
        if position not in mizar_by_position:
            continue
        latex = tokenize_latex(strip_markup(latex, blacklist))
        mizar = tokenize_mizar(mizar_by_position[position], table)
        if len(latex) == 0 or len(mizar) == 0:
            logger.debug("Skipping pair at %s with an empty side", position)
            empty += 1
            continue
        pairs.append(SentencePair(latex, mizar, position))
    dropped = {
        LATEX_SIDE: len(set(latex_by_position) - set(mizar_by_position)),
        MIZAR_SIDE: len(set(mizar_by_position) - set(latex_by_position)),
    }
    if dropped[LATEX_SIDE] or dropped[MIZAR_SIDE]:
        logger.info("Alignment dropped %(latex)d LaTeX and %(mizar)d Mizar entries", dropped)
    if empty:
        logger.info("Alignment skipped %d pairs with an empty side", empty)
    return AlignedPairs(pairs, dropped, empty)


def _index_by_position(entries):
    indexed = OrderedDict()
    for position, text in entries:
        position = tuple(position)
        if position in indexed:
            raise DuplicatePosition(position)
        indexed[position] = text
    return indexed


def split_corpus(pairs, sizes, seed):
    """
    Shuffle `pairs` with the PCG64 generator seeded from `seed` and cut the
    permutation, in order, into train, dev, test and inference parts of the
    requested sizes.
    """
    sizes = tuple(int(size) for size in sizes)
    if len(sizes) != 4 or any(size < 0 for size in sizes):
        raise SizeMismatch("Four non-negative sizes are required, got %s" % (sizes,))
    if sum(sizes) != len(pairs):
        raise SizeMismatch("Sizes %s sum to %d but the corpus has %d pairs"
                           % (sizes, sum(sizes), len(pairs)))
    permutation = get_rng(seed, STREAM_SPLIT).permutation(len(pairs))
    parts = []
    start = 0
    for size in sizes:
        parts.append([pairs[i] for i in permutation[start:start + size]])
        start += size
    logger.info("Split %d pairs into train=%d dev=%d test=%d inference=%d",
                len(pairs), *sizes)
    return CorpusSplit(*parts, seed=seed)


def build_vocab(sentences):
    """Specials followed by the unique tokens in order of first occurrence."""
    vocab = Vocabulary()
    for sentence in sentences:
        for token in sentence:
            vocab.add(token)
    return vocab


def compute_overlap(train, inference):
    """
    Flag the inference pairs whose LaTeX side also occurs as a LaTeX side in
    the training set. Return (count, flags).
    """
    seen = set(pair.latex.joined() for pair in train)
    flags = [pair.latex.joined() in seen for pair in inference]
    return sum(flags), flags


# file IO

def read_tagged(path):
    """Read `LINE COLUMN<TAB>text` lines into a list of ((line, column), text)."""
    entries = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                tag, text = line.split("\t", 1)
                row, column = (int(x) for x in tag.split())
            except ValueError:
                raise DataError("%s:%d: expected 'LINE COLUMN<TAB>text'" % (path, lineno))
            entries.append(((row, column), text))
    return entries


def read_lines(path, language):
    with open(path, encoding="utf-8") as f:
        return [TokenSequence.from_line(line, language) for line in f.read().splitlines()]


def write_lines(path, sentences):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for sentence in sentences:
            f.write(sentence.joined() + "\n")


def read_corpus(prefix):
    """Read `<prefix>.latex`, `<prefix>.mizar` and, if present, `<prefix>.pos`."""
    latex = read_lines(prefix + "." + LATEX_SIDE, LATEX_SIDE)
    mizar = read_lines(prefix + "." + MIZAR_SIDE, MIZAR_SIDE)
    if len(latex) != len(mizar):
        raise SizeMismatch("%s: %d LaTeX lines but %d Mizar lines" % (prefix, len(latex), len(mizar)))
    positions = [None] * len(latex)
    if os.path.exists(prefix + ".pos"):
        with open(prefix + ".pos", encoding="utf-8") as f:
            positions = [tuple(int(x) for x in line.split()) for line in f.read().splitlines()]
        if len(positions) != len(latex):
            raise SizeMismatch("%s.pos has %d lines, expected %d" % (prefix, len(positions), len(latex)))
    return [SentencePair(l, m, p) for l, m, p in zip(latex, mizar, positions)]


def write_corpus(prefix, pairs):
    write_lines(prefix + "." + LATEX_SIDE, [pair.latex for pair in pairs])
    write_lines(prefix + "." + MIZAR_SIDE, [pair.mizar for pair in pairs])
    if pairs and all(pair.position is not None for pair in pairs):
        with open(prefix + ".pos", "w", encoding="utf-8", newline="\n") as f:
            for pair in pairs:
                f.write("%d %d\n" % pair.position)


def write_flags(path, flags):
    """Write one `0`/`1` line per overlap flag."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for flag in flags:
            f.write("1\n" if flag else "0\n")


def read_flags(path):
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if any(line.strip() not in ("0", "1") for line in lines):
        raise DataError("%s: overlap flags must be 0 or 1, one per line" % path)
    return [line.strip() == "1" for line in lines]
