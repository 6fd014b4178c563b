"""
Checkpoint files.

A checkpoint is a numpy `.npz` archive holding every model tensor under its
parameter name, plus a `__meta__` entry: UTF-8 JSON (stored as a uint8
array) with the format version, hyperparameters, both vocabularies and the
training step. Loading a checkpoint reproduces decoding exactly since all
tensors are stored in float64.


:license: BSD 2-clause, see LICENSE for details.
"""
import io
import json
import logging
import os
import zipfile

import numpy as np

from ..core import DataError
from ..corpus import Vocabulary, SPECIALS
from ..parameters import HyperParams
from ..lexing import TokenSequence
from .seq2seq import ModelParams, Seq2Seq, DecodeResult, target_logprobs

logger = logging.getLogger("autoformal")

FORMAT_VERSION = 1
META_KEY = "__meta__"
SNAPSHOT_PREFIX = "snapshot-"


class CheckpointError(DataError):
    pass


class Checkpoint(object):

    def __init__(self, hp, vocab_src, vocab_tgt, params, step=0):
        self.hp = hp
        self.vocab_src = vocab_src
        self.vocab_tgt = vocab_tgt
        self.params = params
        self.step = step

    def __repr__(self):
        return "Checkpoint(step=%d, %s -> %s)" % (self.step, self.hp.src_lang, self.hp.tgt_lang)


def checkpoint_bytes(hp, vocab_src, vocab_tgt, params, step=0):
    buffer = io.BytesIO()
    save_checkpoint(buffer, hp, vocab_src, vocab_tgt, params, step)
    return buffer.getvalue()


def save_checkpoint(target, hp, vocab_src, vocab_tgt, params, step=0):
    """Write a checkpoint to a path or binary file object."""
    meta = {
        "format_version": FORMAT_VERSION,
        "hyperparameters": hp.as_dict(),
        "vocab_src": vocab_src.tokens,
        "vocab_tgt": vocab_tgt.tokens,
        "step": int(step),
        "tensors": list(params.keys()),
    }
    arrays = dict((name, np.asarray(value, dtype=np.float64)) for name, value in params.items())
    arrays[META_KEY] = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    if isinstance(target, (str, os.PathLike)):
        with open(target, "wb") as f:
            np.savez(f, **arrays)
        logger.debug("Saved checkpoint for step %d to %s", step, target)
    else:
        np.savez(target, **arrays)
    return target


def _vocabulary(tokens):
    if tuple(tokens[:3]) != SPECIALS:
        raise CheckpointError("Stored vocabulary does not start with the special tokens")
    return Vocabulary(tokens[3:])


def load_checkpoint(source):
    """Read a checkpoint from a path, a binary file object or a bytes string."""
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    try:
        with np.load(source, allow_pickle=False) as archive:
            if META_KEY not in archive.files:
                raise CheckpointError("%s is not a checkpoint (no metadata)" % (source,))
            meta = json.loads(archive[META_KEY].tobytes().decode("utf-8"))
            if meta.get("format_version") != FORMAT_VERSION:
                raise CheckpointError("Unsupported checkpoint format version %r"
                                      % meta.get("format_version"))
            params = ModelParams((name, archive[name]) for name in meta["tensors"])
    except (OSError, ValueError, KeyError, zipfile.BadZipFile) as err:
        raise CheckpointError("Cannot read checkpoint %s: %s" % (source, err))
    hp = HyperParams(**meta["hyperparameters"])
    checkpoint = Checkpoint(hp, _vocabulary(meta["vocab_src"]), _vocabulary(meta["vocab_tgt"]),
                            params, meta["step"])
    expected = Seq2Seq(hp, len(checkpoint.vocab_src), len(checkpoint.vocab_tgt)).param_shapes()
    if expected != params.shapes():
        raise CheckpointError("Tensor shapes do not match the stored hyperparameters")
    return checkpoint


def snapshot_name(step):
    return "%s%d" % (SNAPSHOT_PREFIX, step)


def find_snapshots(directory):
    """Return [(step, path)] for every `snapshot-<step>` file in `directory`, by step."""
    found = []
    for name in os.listdir(directory):
        if name.startswith(SNAPSHOT_PREFIX) and name[len(SNAPSHOT_PREFIX):].isdigit():
            found.append((int(name[len(SNAPSHOT_PREFIX):]), os.path.join(directory, name)))
    return sorted(found)


def translate(sentences, checkpoint, max_len=None):
    """Greedily decode each source TokenSequence with the checkpointed model."""
    hp = checkpoint.hp
    model = Seq2Seq(hp, len(checkpoint.vocab_src), len(checkpoint.vocab_tgt))
    max_len = max_len or hp.max_tgt_len
    results = []
    for sentence in sentences:
        ids, logprobs, ended = model.greedy_decode(checkpoint.params,
                                                   checkpoint.vocab_src.encode(sentence),
                                                   max_len, check_length=False)
        tokens = TokenSequence(checkpoint.vocab_tgt.decode(ids), hp.tgt_lang)
        results.append(DecodeResult(tokens, logprobs, ended, ids))
    return results


def reference_logprobs(sources, references, checkpoint):
    """Per-sentence log-probabilities the checkpointed model assigns to `references`."""
    return target_logprobs(sources, references, checkpoint.hp, checkpoint.params,
                           checkpoint.vocab_src, checkpoint.vocab_tgt)
