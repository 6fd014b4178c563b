"""
Helper tools for unit tests
"""
import shutil
import tempfile

from autoformal.corpus import SentencePair
from autoformal.lexing import TokenSequence, LATEX_SIDE, MIZAR_SIDE
from autoformal.parameters import HyperParams


class patch(object):
    """
    Decorator for replacing a function or class by a mock version for the
    duration of a test, then replacing the original afterwards.
    """

    def __init__(self, module, obj_name, mock_obj):
        self.module = module
        self.obj_name = obj_name
        self.mock_obj = mock_obj
        self.orig_obj = getattr(module, obj_name)

    def __call__(self, f):
        def wrapped_f(*args, **kwargs):
            setattr(self.module, self.obj_name, self.mock_obj)
            try:
                f(*args, **kwargs)
            finally:
                setattr(self.module, self.obj_name, self.orig_obj)
        wrapped_f.__name__ = f.__name__
        return wrapped_f


class TemporaryDirectoryMixin(object):

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp(prefix="autoformal_test_")

    def tearDown(self):
        shutil.rmtree(self.tmpdir, ignore_errors=True)


def make_pair(latex, mizar, position=None):
    return SentencePair(TokenSequence(latex.split(), LATEX_SIDE),
                        TokenSequence(mizar.split(), MIZAR_SIDE), position)


TINY_CORPUS = [
    ("$ X \\subseteq Y $", "X c= Y ;"),
    ("$ Y \\subseteq Z $", "Y c= Z ;"),
    ("$ X = Y $", "X = Y ;"),
    ("$ Z = X $", "Z = X ;"),
    ("$ X \\subseteq Z $", "X c= Z ;"),
    ("$ Y = Z $", "Y = Z ;"),
]


def tiny_corpus():
    return [make_pair(latex, mizar, (i + 1, 1)) for i, (latex, mizar) in enumerate(TINY_CORPUS)]


def tiny_hparams(**overrides):
    """Hyperparameters small enough for finite-difference checks."""
    values = dict(src_lang="latex", tgt_lang="mizar", unit_type="lstm", attention="scaled_luong",
                  num_layers=2, residual=False, optimizer="sgd", encoder_type="uni",
                  num_units=6, dropout=0.0, forget_bias=1.0, learning_rate=1.0,
                  batch_size=3, train_steps=10, seed=7, clip_norm=5.0,
                  max_src_len=20, max_tgt_len=20)
    values.update(overrides)
    return HyperParams(**values)
