"""
Commands provided by the autoformal tool.

Each command corresponds to a function in this module; `main` dispatches
to them and turns errors into exit statuses:

    0  success
    2  usage error (bad flags, unknown or invalid hyperparameters)
    3  data error (unreadable or inconsistent input)
    4  training diverged


:license: BSD 2-clause, see LICENSE for details.
"""
import json
import logging
import os
import sys
import warnings
from argparse import ArgumentParser, SUPPRESS
from datetime import datetime
from textwrap import dedent

import numpy as np

import autoformal
from .core import AutoformalError, DataError, DivergenceError, TIMESTAMP_FORMAT
from .lexing import (SymbolTable, UnknownCharacter, UnbalancedBraces, tokenize_latex,
                     tokenize_mizar, strip_markup, LATEX_SIDE, MIZAR_SIDE, LANGUAGES)
from .corpus import (CorpusSplit, Vocabulary, align_by_position, split_corpus, build_vocab,
                     compute_overlap, read_tagged, read_lines, write_lines, read_corpus,
                     write_corpus, read_flags, write_flags, PARTS)
from .parameters import (build_parameters, SimpleParameterSet, HyperParams, DEFAULTS,
                         CHOICES)
from .model import (load_checkpoint, save_checkpoint, snapshot_name, find_snapshots,
                    translate, reference_logprobs, SNAPSHOT_PREFIX)
from .training import train as train_model, TrainResult, DEFAULT_SNAPSHOT_EVERY
from .evaluation import (evaluate as evaluate_hypotheses, cover_report, EvalReport,
                         CoverReport, percent)
from .formatting import get_formatter, TextTable
from .datastore import OutputDirectory
from .records import RunRecord, RecordStore, FINISHED, FAILED, DIVERGED

logger = logging.getLogger("autoformal")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DIVERGED = 4

CHECKPOINT_NAME = "checkpoint"
TRAIN_LOG_NAME = "train.log"
DEFAULT_EXPERIMENT = "model"

modes = ("tokenize", "align", "split", "vocab", "overlap", "train", "infer", "snapshots",
         "evaluate", "cover", "report", "list", "version", "help")

# hyperparameters that have a dedicated flag on `train`
hyperparameter_flags = ("unit_type", "attention", "num_layers", "residual", "optimizer",
                        "encoder_type", "num_units", "dropout", "forget_bias", "learning_rate",
                        "batch_size", "train_steps", "seed", "clip_norm", "max_src_len",
                        "max_tgt_len")


class UsageError(AutoformalError):
    pass


class CommandParser(ArgumentParser):
    """An ArgumentParser that raises UsageError instead of printing and exiting."""

    def error(self, message):
        raise UsageError(message)


def _warning(message, category=UserWarning, filename='', lineno=-1, file=None, line=None):
    print("Warning: %s" % message, file=sys.stderr)


warnings.showwarning = _warning


def _configure_logging(debug=False):
    if not any(getattr(h, "autoformal_handler", False) for h in logger.handlers):
        h = logging.StreamHandler()
        h.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s'))
        h.autoformal_handler = True
        logger.addHandler(h)
    logger.setLevel(logging.DEBUG if debug else logging.WARNING)


def _parser(usage, description, output_dir=True):
    parser = CommandParser(usage=usage, description=dedent(description), prog="autoformal")
    parser.add_argument('-D', '--debug', action='store_true', help="print debugging information.")
    if output_dir:
        parser.add_argument('-d', '--output-dir', metavar='PATH',
                            help="directory receiving the outputs. Defaults to $AUTOFORMAL_OUTPUT_DIR, "
                                 "then ./Data")
    return parser


def _parse(parser, argv):
    args = parser.parse_args(argv)
    _configure_logging(args.debug)
    return args


def _parse_overrides(parser, argv):
    """Like _parse, but NAME=VALUE arguments may follow or sit between options."""
    args, extra = parser.parse_known_args(argv)
    _configure_logging(args.debug)
    args.overrides = list(args.overrides or []) + extra
    unknown = [item for item in args.overrides if item.startswith("-") or "=" not in item]
    if unknown:
        parser.error("unrecognized arguments: %s" % " ".join(unknown))
    return args


def _output_dir(args):
    return OutputDirectory(args.output_dir).create()


class _Recorder(object):
    """
    Wraps a command body: creates a RunRecord, times it and stores it with
    the outcome, whether the body returns or raises.
    """

    def __init__(self, args, command, parameters):
        self.output_dir = _output_dir(args)
        self.store = RecordStore.in_output_dir(self.output_dir)
        label = self.store.unique_label(args.label or datetime.now().strftime(TIMESTAMP_FORMAT))
        self.record = RunRecord(command, parameters, args.experiment_name, label=label,
                                reason=args.reason or "")
        self.outcome = ""
        self.outputs = []

    def __enter__(self):
        self.record.start()
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None:
            status = FINISHED
        elif isinstance(exc, DivergenceError):
            status = DIVERGED
        else:
            status = FAILED
        if exc is not None and not self.outcome:
            self.outcome = "%s: %s" % (type(exc).__name__, exc)
        outputs = [os.path.abspath(path) for path in self.outputs if os.path.isfile(path)]
        self.record.finish(status, self.outcome, self.output_dir.generate_keys(*outputs))
        self.store.save(self.record)
        return False


def _add_record_arguments(parser):
    parser.add_argument('-l', '--label', help="label of the run record. Defaults to a timestamp.")
    parser.add_argument('-r', '--reason', help="why this run was made; stored in the run record.")
    parser.add_argument('-e', '--experiment-name', default=DEFAULT_EXPERIMENT, metavar='NAME',
                        help="experiment name; `train` writes its model to OUTPUT_DIR/NAME. "
                             "Defaults to %(default)s")


def _record_parameters(args, exclude=()):
    return dict((name, value) for name, value in sorted(vars(args).items())
                if name not in ("debug", "label", "reason", "experiment_name") + tuple(exclude))


def _language(value):
    language = value.lower()
    if language not in LANGUAGES:
        raise UsageError("language must be one of %s, not %r" % (", ".join(LANGUAGES), value))
    return language


def tokenize(argv):
    """Tokenize a file of statements, one per line."""
    usage = "%(prog)s tokenize [options] {latex,mizar} INPUT"
    description = """\
      Tokenize each line of INPUT and write the tokens, separated by single
      spaces, one statement per line. Mizar input needs a symbol table
      (-s); LaTeX input is stripped of typesetting markup first unless
      --keep-markup is given."""
    parser = _parser(usage, description, output_dir=False)
    parser.add_argument('side', type=_language, metavar='SIDE')
    parser.add_argument('input', metavar='INPUT')
    parser.add_argument('-s', '--symbols', metavar='FILE', help="symbol-table file (Mizar only).")
    parser.add_argument('-o', '--output', metavar='FILE', help="output file. Defaults to stdout.")
    parser.add_argument('--keep-markup', action='store_true',
                        help="do not strip LaTeX typesetting commands.")
    args = _parse(parser, argv)
    if args.side == MIZAR_SIDE:
        if not args.symbols:
            parser.error("tokenizing Mizar needs a symbol table (-s FILE)")
        table = SymbolTable.from_file(args.symbols)
    with open(args.input, encoding="utf-8") as f:
        lines = f.read().splitlines()
    sentences = []
    for lineno, line in enumerate(lines, 1):
        try:
            if args.side == MIZAR_SIDE:
                sentences.append(tokenize_mizar(line, table))
            else:
                sentences.append(tokenize_latex(line if args.keep_markup else strip_markup(line)))
        except (UnknownCharacter, UnbalancedBraces) as err:
            err.location = (args.input, lineno, err.position + 1)
            raise
    if args.output:
        write_lines(args.output, sentences)
    else:
        for sentence in sentences:
            print(sentence.joined())
    logger.info("Tokenized %d %s statements", len(sentences), args.side)


def align(argv):
    """Build an aligned corpus from position-tagged LaTeX and Mizar statements."""
    usage = "%(prog)s align [options] LATEX_TAGGED MIZAR_TAGGED"
    description = """\
      Pair LaTeX and Mizar statements that start at the same LINE COLUMN
      position of the article. Both inputs hold `LINE COLUMN<TAB>text` lines.
      The tokenized corpus is written to OUTPUT_DIR/NAME.latex, NAME.mizar and
      NAME.pos."""
    parser = _parser(usage, description)
    parser.add_argument('latex', metavar='LATEX_TAGGED')
    parser.add_argument('mizar', metavar='MIZAR_TAGGED')
    parser.add_argument('-s', '--symbols', metavar='FILE', help="symbol-table file.")
    parser.add_argument('-n', '--name', default="corpus", help="corpus name. Defaults to %(default)s")
    args = _parse(parser, argv)
    table = SymbolTable.from_file(args.symbols) if args.symbols else SymbolTable()
    pairs = align_by_position(read_tagged(args.latex), read_tagged(args.mizar), table)
    for side, count in sorted(pairs.dropped.items()):
        if count:
            warnings.warn("%d %s statements have no partner and were dropped" % (count, side))
    if pairs.empty:
        warnings.warn("%d pairs with an empty side were skipped" % pairs.empty)
    prefix = _output_dir(args).path(args.name)
    write_corpus(prefix, pairs)
    print("%d pairs written to %s.{latex,mizar,pos}" % (len(pairs), prefix))


def split(argv):
    """Split an aligned corpus into train, dev, test and inference parts."""
    usage = "%(prog)s split [options] CORPUS_PREFIX TRAIN DEV TEST INFERENCE"
    description = """\
      Shuffle the corpus at CORPUS_PREFIX with the given seed and cut it into
      parts of the given sizes, written to OUTPUT_DIR/train.*, dev.*, test.*
      and inference.*."""
    parser = _parser(usage, description)
    parser.add_argument('corpus', metavar='CORPUS_PREFIX')
    parser.add_argument('sizes', metavar='SIZE', type=int, nargs=4)
    parser.add_argument('--seed', type=int, default=0, help="random seed. Defaults to %(default)s")
    args = _parse(parser, argv)
    if args.seed < 0:
        parser.error("the seed must be non-negative")
    corpus = split_corpus(read_corpus(args.corpus), args.sizes, args.seed)
    output_dir = _output_dir(args)
    for name, part in corpus.parts().items():
        write_corpus(output_dir.path(name), part)
    print(" ".join("%s=%d" % (name, size) for name, size in zip(PARTS, corpus.sizes())))


def vocab(argv):
    """Build the source and target vocabularies of a training corpus."""
    usage = "%(prog)s vocab [options] TRAIN_PREFIX"
    description = """\
      Collect the tokens of each side of the training corpus, in order of
      first occurrence, and write them to OUTPUT_DIR/vocab.latex and
      OUTPUT_DIR/vocab.mizar."""
    parser = _parser(usage, description)
    parser.add_argument('corpus', metavar='TRAIN_PREFIX')
    args = _parse(parser, argv)
    pairs = read_corpus(args.corpus)
    output_dir = _output_dir(args)
    sizes = []
    for side in (LATEX_SIDE, MIZAR_SIDE):
        vocabulary = build_vocab(pair.side(side) for pair in pairs)
        vocabulary.save(output_dir.path("vocab." + side))
        sizes.append("%s=%d" % (side, len(vocabulary)))
    logger.info("Vocabulary sizes: %s", ", ".join(sizes))
    print(" ".join(sizes))


def overlap(argv):
    """Flag the inference pairs whose LaTeX side also occurs in the training set."""
    usage = "%(prog)s overlap [options] TRAIN_PREFIX INFERENCE_PREFIX"
    description = """\
      Write one 0/1 flag per inference pair: 1 if its LaTeX statement also
      appears in the training corpus."""
    parser = _parser(usage, description)
    parser.add_argument('train', metavar='TRAIN_PREFIX')
    parser.add_argument('inference', metavar='INFERENCE_PREFIX')
    parser.add_argument('-o', '--output', metavar='FILE',
                        help="flags file. Defaults to OUTPUT_DIR/inference.overlap")
    args = _parse(parser, argv)
    inference = read_corpus(args.inference)
    count, flags = compute_overlap(read_corpus(args.train), inference)
    output = args.output or _output_dir(args).path("inference.overlap")
    write_flags(output, flags)
    logger.info("%d of %d inference pairs overlap with the training set", count, len(inference))
    print("overlap %d of %d (%.2f%%), no-overlap %d"
          % (count, len(inference), percent(count, len(inference)), len(inference) - count))


def _hyperparameters(args):
    """Table defaults < parameter file < NAME=VALUE overrides < flags."""
    if args.params:
        ps = build_parameters(args.params)
    else:
        ps = SimpleParameterSet({})
    for override in args.overrides:
        try:
            ps.update(ps.parse_command_line_parameter(override))
        except ValueError as v:
            if len(v.args) != 3:
                raise
            message, name, value = v.args
            if name not in DEFAULTS:
                raise ValueError("Unknown hyperparameter %r" % name)
            ps.update({name: value})
    flags = dict((name, getattr(args, name)) for name in hyperparameter_flags)
    flags["src_lang"] = args.src
    flags["tgt_lang"] = args.tgt
    return HyperParams.from_parameters(ps, **flags)


def _nan_injector(step_to_break):
    def inject(step, grads):
        if step == step_to_break:
            logger.debug("Injecting NaN gradients at step %d", step)
            for g in grads.values():
                g[...] = np.nan
    return inject


def train(argv):
    """Train a translation model."""
    usage = "%(prog)s train [options] TRAIN_PREFIX [NAME=VALUE ...]"
    description = """\
      Train a model on the corpus at TRAIN_PREFIX. The checkpoint, the
      snapshot-<step> files and the training log are written to
      OUTPUT_DIR/NAME (see --experiment-name). Hyperparameters come from the
      defaults, then --params FILE, then NAME=VALUE arguments, then flags.
      Exit status 4 means training diverged; the last finite state is saved."""
    parser = _parser(usage, description)
    parser.add_argument('corpus', metavar='TRAIN_PREFIX')
    parser.add_argument('overrides', metavar='NAME=VALUE', nargs='*')
    parser.add_argument('-p', '--params', metavar='FILE', help="hyperparameter file.")
    parser.add_argument('--dev', metavar='PREFIX', help="dev corpus for snapshot perplexities.")
    parser.add_argument('--vocab-src', metavar='FILE', help="source vocabulary file.")
    parser.add_argument('--vocab-tgt', metavar='FILE', help="target vocabulary file.")
    parser.add_argument('--src', type=_language, help="source language (latex or mizar).")
    parser.add_argument('--tgt', type=_language, help="target language (latex or mizar).")
    parser.add_argument('--unit-type', choices=CHOICES["unit_type"])
    parser.add_argument('--attention', help="none, bahdanau, normed_bahdanau, luong or scaled_luong")
    parser.add_argument('--num-layers', type=int)
    parser.add_argument('--residual', action='store_const', const=True)
    parser.add_argument('--no-residual', dest='residual', action='store_const', const=False)
    parser.add_argument('--optimizer', choices=CHOICES["optimizer"])
    parser.add_argument('--encoder-type', help="uni or bi")
    parser.add_argument('--num-units', type=int)
    parser.add_argument('--dropout', type=float)
    parser.add_argument('--forget-bias', type=float)
    parser.add_argument('--learning-rate', type=float)
    parser.add_argument('--batch-size', type=int)
    parser.add_argument('--train-steps', type=int)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--clip-norm', type=float)
    parser.add_argument('--max-src-len', type=int)
    parser.add_argument('--max-tgt-len', type=int)
    parser.add_argument('--snapshot-every', type=int, default=DEFAULT_SNAPSHOT_EVERY,
                        help="steps between snapshots. Defaults to %(default)s")
    parser.add_argument('--log-every', type=int, default=100,
                        help="steps between training log lines. Defaults to %(default)s")
    parser.add_argument('--overwrite', action='store_true',
                        help="replace the checkpoint and snapshots of an earlier run.")
    parser.add_argument('--inject-nan-at', type=int, help=SUPPRESS)
    _add_record_arguments(parser)
    args = _parse_overrides(parser, argv)
    hp = _hyperparameters(args)
    if args.snapshot_every < 0 or args.log_every < 1:
        parser.error("--snapshot-every must be non-negative and --log-every positive")

    pairs = read_corpus(args.corpus)
    dev = read_corpus(args.dev) if args.dev else []
    vocab_src = Vocabulary.from_file(args.vocab_src) if args.vocab_src else None
    vocab_tgt = Vocabulary.from_file(args.vocab_tgt) if args.vocab_tgt else None
    if vocab_src is None:
        vocab_src = build_vocab(pair.side(hp.src_lang) for pair in pairs)
    if vocab_tgt is None:
        vocab_tgt = build_vocab(pair.side(hp.tgt_lang) for pair in pairs)

    parameters = hp.as_dict()
    parameters.update(corpus=args.corpus, dev=args.dev, snapshot_every=args.snapshot_every)
    with _Recorder(args, "train", parameters) as recorder:
        model_dir = recorder.output_dir.path(args.experiment_name)
        checkpoint_path = os.path.join(model_dir, CHECKPOINT_NAME)
        if os.path.isdir(model_dir):
            previous = [path for step, path in find_snapshots(model_dir)]
            if os.path.exists(checkpoint_path):
                previous.append(checkpoint_path)
            if previous and not args.overwrite:
                raise UsageError("%s already holds a trained model; use --overwrite or another "
                                 "--experiment-name" % model_dir)
            for path in previous:
                os.remove(path)
        else:
            os.makedirs(model_dir)
        hook = _nan_injector(args.inject_nan_at) if args.inject_nan_at else None
        with open(os.path.join(model_dir, TRAIN_LOG_NAME), "a", encoding="utf-8") as log:
            state, snapshots, diverged = train_model(
                CorpusSplit(pairs, dev, [], [], hp.seed), hp, args.snapshot_every,
                vocab_src, vocab_tgt, gradient_hook=hook, log=log, log_every=args.log_every)
        for snapshot in snapshots:
            path = os.path.join(model_dir, snapshot_name(snapshot.step))
            with open(path, "wb") as f:
                f.write(snapshot.checkpoint)
            recorder.outputs.append(path)
        save_checkpoint(checkpoint_path, hp, vocab_src, vocab_tgt, state.params, state.step)
        recorder.outputs.append(checkpoint_path)
        recorder.outputs.append(os.path.join(model_dir, TRAIN_LOG_NAME))
        result = TrainResult.from_run(state, snapshots, diverged)
        recorder.outcome = json.dumps(result)
        print("%s: %d steps, %d snapshots, final loss %s"
              % (checkpoint_path, state.step, len(snapshots),
                 "n/a" if result["final_loss"] is None else "%.6f" % result["final_loss"]))
        if diverged:
            raise DivergenceError("training diverged after step %d; checkpoint of step %d saved to %s"
                                  % (state.step, state.step, checkpoint_path))


def infer(argv):
    """Translate a file of tokenized statements with greedy decoding."""
    usage = "%(prog)s infer [options] CHECKPOINT SOURCE"
    description = """\
      Decode every line of SOURCE (tokenized, in the checkpoint's source
      language) with the model in CHECKPOINT, which may be a final checkpoint
      or a snapshot-<step> file, and write one hypothesis per line."""
    parser = _parser(usage, description)
    parser.add_argument('checkpoint', metavar='CHECKPOINT')
    parser.add_argument('source', metavar='SOURCE')
    parser.add_argument('-o', '--output', metavar='FILE',
                        help="hypotheses file. Defaults to OUTPUT_DIR/hypotheses.<target language>")
    parser.add_argument('--max-len', type=int, help="maximum hypothesis length.")
    _add_record_arguments(parser)
    args = _parse(parser, argv)
    checkpoint = load_checkpoint(args.checkpoint)
    sources = read_lines(args.source, checkpoint.hp.src_lang)
    with _Recorder(args, "infer", _record_parameters(args)) as recorder:
        output = args.output or recorder.output_dir.path("hypotheses." + checkpoint.hp.tgt_lang)
        results = translate(sources, checkpoint, args.max_len)
        write_lines(output, [result.tokens for result in results])
        recorder.outputs.append(output)
        unfinished = sum(1 for result in results if not result.ended_by_eos)
        recorder.outcome = "%d hypotheses, %d cut at the length limit" % (len(results), unfinished)
        logger.info("Wrote %d hypotheses to %s", len(results), output)


def snapshots(argv):
    """Show how the translation of some sentences evolves over training."""
    usage = "%(prog)s snapshots [options] MODEL_DIR SOURCE"
    description = """\
      Decode the selected lines of SOURCE with every snapshot-<step> file in
      MODEL_DIR and print one table per sentence, by step."""
    parser = _parser(usage, description, output_dir=False)
    parser.add_argument('model_dir', metavar='MODEL_DIR')
    parser.add_argument('source', metavar='SOURCE')
    parser.add_argument('-n', '--lines', type=int, nargs='+', metavar='N',
                        help="1-based line numbers of SOURCE. Defaults to all lines.")
    parser.add_argument('--max-len', type=int, help="maximum hypothesis length.")
    args = _parse(parser, argv)
    found = find_snapshots(args.model_dir)
    if not found:
        raise DataError("No %s<step> files in %s" % (SNAPSHOT_PREFIX, args.model_dir))
    checkpoints = [(step, load_checkpoint(path)) for step, path in found]
    sources = read_lines(args.source, checkpoints[0][1].hp.src_lang)
    lines = args.lines or range(1, len(sources) + 1)
    for n in lines:
        if not 1 <= n <= len(sources):
            raise DataError("%s has no line %d" % (args.source, n))
    rows = dict((n, []) for n in lines)
    for step, checkpoint in checkpoints:
        selected = [sources[n - 1] for n in lines]
        for n, result in zip(lines, translate(selected, checkpoint, args.max_len)):
            rows[n].append([snapshot_name(step), result.tokens.joined()])
    for n in lines:
        print("Line %d: %s" % (n, sources[n - 1].joined()))
        print(TextTable(["Step", "Translation"], rows[n], max_column_width=200))


def _model_ids(paths):
    ids = [os.path.splitext(os.path.basename(path))[0] for path in paths]
    if len(set(ids)) < len(ids):
        ids = list(paths)
    if len(set(ids)) < len(ids):
        raise UsageError("the same hypotheses file is given twice")
    return ids


def evaluate(argv):
    """Score a hypotheses file against references."""
    usage = "%(prog)s evaluate [options] HYPOTHESES REFERENCES"
    description = """\
      Compute BLEU, identical statements (overall and on the no-overlap
      subset) and edit-distance buckets for HYPOTHESES against REFERENCES.
      With --checkpoint and --source the references are also scored by the
      model, giving the test perplexity. The report is printed and written as
      JSON to the --output file."""
    parser = _parser(usage, description)
    parser.add_argument('hypotheses', metavar='HYPOTHESES')
    parser.add_argument('references', metavar='REFERENCES')
    parser.add_argument('--overlap', metavar='FILE', help="overlap flags file (see `overlap`).")
    parser.add_argument('--checkpoint', metavar='FILE', help="model scoring the references.")
    parser.add_argument('--source', metavar='FILE', help="source sentences of the references.")
    parser.add_argument('-m', '--model-id', help="model name in the report. Defaults to the "
                                                 "hypotheses file name.")
    parser.add_argument('-o', '--output', metavar='FILE',
                        help="JSON report. Defaults to OUTPUT_DIR/<model id>.report.json")
    parser.add_argument('-f', '--format', choices=['text', 'json'], default='text',
                        help="format of the printed report. Defaults to %(default)s")
    _add_record_arguments(parser)
    args = _parse(parser, argv)
    if bool(args.checkpoint) != bool(args.source):
        parser.error("--checkpoint and --source must be given together")
    checkpoint = load_checkpoint(args.checkpoint) if args.checkpoint else None
    language = checkpoint.hp.tgt_lang if checkpoint else MIZAR_SIDE
    hyps = read_lines(args.hypotheses, language)
    refs = read_lines(args.references, language)
    flags = read_flags(args.overlap) if args.overlap else None
    model_id = args.model_id or _model_ids([args.hypotheses])[0]
    with _Recorder(args, "evaluate", _record_parameters(args)) as recorder:
        logprobs = None
        if checkpoint is not None:
            sources = read_lines(args.source, checkpoint.hp.src_lang)
            logprobs = reference_logprobs(sources, refs, checkpoint)
        report = evaluate_hypotheses(hyps, refs, flags, logprobs, model_id,
                                     checkpoint.hp.as_dict() if checkpoint else None)
        output = args.output or recorder.output_dir.path("%s.report.json" % model_id)
        with open(output, "w", encoding="utf-8") as f:
            f.write(get_formatter("json")([report]).format("short") + "\n")
        recorder.outputs.append(output)
        recorder.outcome = "BLEU %.2f, identical %.2f%%" % (report.bleu, report.identical_total[1])
    print(get_formatter(args.format)([report]).format("long").rstrip("\n"))


def cover(argv):
    """Rank models by greedy cover of correct translations."""
    usage = "%(prog)s cover [options] REFERENCES HYPOTHESES [HYPOTHESES ...]"
    description = """\
      Treat each HYPOTHESES file as one model. Choose the top-n models, each
      adding the most items not yet translated correctly, and report edit
      distance buckets for every top-k list and for the union of all models."""
    parser = _parser(usage, description)
    parser.add_argument('references', metavar='REFERENCES')
    parser.add_argument('hypotheses', metavar='HYPOTHESES', nargs='+')
    parser.add_argument('-n', '--top', type=int, default=5, help="models to choose. Defaults to %(default)s")
    parser.add_argument('--overlap', metavar='FILE', help="overlap flags file (see `overlap`).")
    parser.add_argument('--max-distance', type=int, default=0,
                        help="edit distance up to which a translation counts as correct. "
                             "Defaults to %(default)s")
    parser.add_argument('--lang', type=_language, default=MIZAR_SIDE,
                        help="language of the statements. Defaults to %(default)s")
    parser.add_argument('-o', '--output', metavar='FILE',
                        help="JSON report. Defaults to OUTPUT_DIR/cover.report.json")
    parser.add_argument('-f', '--format', choices=['text', 'json', 'latex'], default='text')
    _add_record_arguments(parser)
    args = _parse(parser, argv)
    if args.top < 1 or args.max_distance < 0:
        parser.error("--top must be positive and --max-distance non-negative")
    refs = read_lines(args.references, args.lang)
    hyps_by_model = dict((model_id, read_lines(path, args.lang))
                         for model_id, path in zip(_model_ids(args.hypotheses), args.hypotheses))
    flags = read_flags(args.overlap) if args.overlap else None
    with _Recorder(args, "cover", _record_parameters(args)) as recorder:
        report = cover_report(hyps_by_model, refs, flags, args.top, max_distance=args.max_distance)
        output = args.output or recorder.output_dir.path("cover.report.json")
        with open(output, "w", encoding="utf-8") as f:
            f.write(get_formatter("json")([report]).format("short") + "\n")
        recorder.outputs.append(output)
        recorder.outcome = "chose %s" % ", ".join(report.rows[-2][1]) if len(report.rows) > 1 else "no model"
    print(get_formatter(args.format)([report]).format("table").rstrip("\n"))


def load_report(path):
    """Read an EvalReport or CoverReport JSON file, as written by `evaluate` and `cover`."""
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        if isinstance(data, list):
            if len(data) != 1:
                raise ValueError("expected a single report")
            data = data[0]
        if "rows" in data:
            return CoverReport.from_dict(data)
        return EvalReport.from_dict(data)
    except (ValueError, KeyError, TypeError) as err:
        raise DataError("%s is not a report file: %s" % (path, err))


def report(argv):
    """Tabulate evaluation or cover reports."""
    usage = "%(prog)s report [options] REPORT [REPORT ...]"
    description = """\
      Print several reports written by `evaluate` (or by `cover`) as one
      table: Parameter, Final Test Perplexity, Final Test BLEU, Identical
      Statements (%) and Identical No-overlap (%)."""
    parser = _parser(usage, description, output_dir=False)
    parser.add_argument('reports', metavar='REPORT', nargs='+')
    parser.add_argument('-p', '--parameter', metavar='NAME',
                        help="hyperparameter shown in the first column. Defaults to the model id.")
    parser.add_argument('-f', '--format', choices=['text', 'json', 'latex'], default='text')
    parser.add_argument('--long', action='store_const', const='long', dest='mode', default='table',
                        help="print every field instead of a table.")
    args = _parse(parser, argv)
    reports = [load_report(path) for path in args.reports]
    if len(set(type(r) for r in reports)) > 1:
        raise UsageError("cannot mix evaluation and cover reports in one table")
    print(get_formatter(args.format)(reports, args.parameter).format(args.mode).rstrip("\n"))


def list_records(argv):
    """List the run records stored in the output directory."""
    usage = "%(prog)s list [options] [TAGS]"
    description = """\
      If TAGS (optional) is specified, then only records tagged with one of
      the tags in TAGS will be listed, e.g. _diverged_."""
    parser = _parser(usage, description)
    parser.add_argument('tags', metavar='TAGS', nargs='*')
    parser.add_argument('-l', '--long', action="store_const", const="long",
                        dest="mode", default="short",
                        help="prints full information for each record")
    parser.add_argument('-T', '--table', action="store_const", const="table",
                        dest="mode", help="prints information in tab-separated columns")
    parser.add_argument('-f', '--format', metavar='FMT', choices=['text', 'json', 'latex'],
                        default='text', help="FMT can be 'text' (default), 'json' or 'latex'.")
    parser.add_argument('-r', '--reverse', action="store_true", default=False,
                        help="list records newest first")
    args = _parse(parser, argv)
    records = RecordStore.in_output_dir(OutputDirectory(args.output_dir)).list(args.tags or None)
    if args.reverse:
        records.reverse()
    if records:
        print(get_formatter(args.format)(records).format(args.mode).rstrip("\n"))


def help(argv):
    usage = "%(prog)s help CMD"
    description = """Get help on an %(prog)s command."""
    parser = _parser(usage, description, output_dir=False)
    parser.add_argument('cmd', nargs='?')
    args = _parse(parser, argv)
    if args.cmd is None:
        parser.error('Please specify a command on which you would like help. '
                     'Available commands: ' + ", ".join(modes))
    if args.cmd not in commands:
        parser.error('"%s" is not an autoformal command.' % args.cmd)
    commands[args.cmd](['--help'])


def version(argv):
    usage = "%(prog)s version"
    description = "Print the autoformal version."
    parser = _parser(usage, description, output_dir=False)
    _parse(parser, argv)
    print(autoformal.__version__)


commands = {
    "tokenize": tokenize,
    "align": align,
    "split": split,
    "vocab": vocab,
    "overlap": overlap,
    "train": train,
    "infer": infer,
    "snapshots": snapshots,
    "evaluate": evaluate,
    "cover": cover,
    "report": report,
    "list": list_records,
    "version": version,
    "help": help,
}


def error_line(err):
    """The one-line, machine-parseable description of an error."""
    message = str(err)
    location = getattr(err, "location", None)
    if location:
        message = "%s:%d:%d: %s" % (location + (message,))
    return "error: %s: %s" % (type(err).__name__, " ".join(message.split()))


def exit_status(err):
    if isinstance(err, DivergenceError):
        return EXIT_DIVERGED
    if isinstance(err, (UsageError, ValueError, SyntaxError)):
        return EXIT_USAGE
    return EXIT_DATA


def main(argv=None):
    """Run the command named by argv[0] and return the exit status."""
    if argv is None:
        argv = sys.argv[1:]
    if not argv or argv[0] not in commands:
        print("usage: autoformal CMD [options]\nAvailable commands:\n  " + "\n  ".join(modes),
              file=sys.stderr)
        return EXIT_USAGE
    try:
        commands[argv[0]](argv[1:])
    except SystemExit as err:
        return err.code or EXIT_OK
    except (AutoformalError, ValueError, SyntaxError, OSError) as err:
        logger.debug("%s failed", argv[0], exc_info=True)
        print(error_line(err), file=sys.stderr)
        return exit_status(err)
    return EXIT_OK
