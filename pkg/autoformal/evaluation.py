"""
Translation quality metrics.

perplexity()        - exp of the mean negative log-likelihood per token.
bleu()              - corpus-level BLEU-4, in percent.
exact_match()       - identical statements, overall and on the no-overlap subset.
edit_distance()     - token-level Levenshtein distance.
distance_buckets()  - share of items within edit distance k, for one model or
                      the best of several.
greedy_cover()      - ordered model list by maximal marginal gain of correct items.
union_cover()       - items correct for at least one model.
cover_report()      - distance buckets for the greedy top-k model lists and the union.
evaluate()          - all of the above for one hypothesis file, as an EvalReport.


:license: BSD 2-clause, see LICENSE for details.
"""
import logging
import math
from collections import Counter, OrderedDict

from .core import DataError

logger = logging.getLogger("autoformal")

MAX_ORDER = 4
DEFAULT_BUCKETS = (0, 1, 2, 3)


class EmptyEvalSet(DataError):
    pass


class LengthMismatch(DataError):
    pass


def _check_aligned(hyps, refs, flags=None):
    if len(hyps) != len(refs):
        raise LengthMismatch("%d hypotheses but %d references" % (len(hyps), len(refs)))
    if flags is not None and len(flags) != len(refs):
        raise LengthMismatch("%d overlap flags but %d references" % (len(flags), len(refs)))


def percent(count, total):
    return 100.0 * count / total if total else 0.0


def perplexity(model_logprobs):
    """
    `model_logprobs` holds, per sentence, the natural-log probabilities the
    model assigns to each gold token.
    """
    total = 0.0
    count = 0
    for sentence in model_logprobs:
        for logprob in sentence:
            if logprob > 0:
                raise ValueError("log-probabilities cannot be positive: %r" % logprob)
            total += logprob
            count += 1
    if count == 0:
        raise EmptyEvalSet("perplexity needs at least one token")
    return math.exp(-total / count)


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(hypotheses, references, max_order=MAX_ORDER):
    """
    Corpus BLEU without smoothing, scaled to [0, 100].

    Orders for which the hypotheses contain no n-grams at all are left out of
    the geometric mean; if any remaining order has no match the score is 0.
    """
    _check_aligned(hypotheses, references)
    if not references:
        raise EmptyEvalSet("BLEU needs at least one reference")
    matches = [0] * max_order
    possible = [0] * max_order
    hyp_length = 0
    ref_length = 0
    for hyp, ref in zip(hypotheses, references):
        hyp = list(hyp)
        ref = list(ref)
        hyp_length += len(hyp)
        ref_length += len(ref)
        for n in range(1, max_order + 1):
            hyp_counts = _ngrams(hyp, n)
            ref_counts = _ngrams(ref, n)
            matches[n - 1] += sum(min(count, ref_counts[gram]) for gram, count in hyp_counts.items())
            possible[n - 1] += max(len(hyp) - n + 1, 0)
    if hyp_length == 0:
        return 0.0
    log_precisions = []
    for match, total in zip(matches, possible):
        if total == 0:
            continue
        if match == 0:
            return 0.0
        log_precisions.append(math.log(match / total))
    geo_mean = math.exp(math.fsum(log_precisions) / len(log_precisions))
    if hyp_length < ref_length:
        brevity_penalty = math.exp(1.0 - ref_length / hyp_length)
    else:
        brevity_penalty = 1.0
    return 100.0 * brevity_penalty * geo_mean


def _no_overlap_total(flags):
    return sum(1 for flag in flags if not flag)


def exact_match(hyps, refs, overlap_flags=None):
    """
    Return ((count, percent), (count_no_overlap, percent_no_overlap)). The
    second pair only considers items whose overlap flag is false.
    """
    if overlap_flags is None:
        overlap_flags = [False] * len(refs)
    _check_aligned(hyps, refs, overlap_flags)
    identical = [tuple(h) == tuple(r) for h, r in zip(hyps, refs)]
    count = sum(identical)
    count_no = sum(1 for same, flag in zip(identical, overlap_flags) if same and not flag)
    return ((count, percent(count, len(refs))),
            (count_no, percent(count_no, _no_overlap_total(overlap_flags))))


def edit_distance(a, b):
    """Minimum number of token insertions, deletions and substitutions turning a into b."""
    a = list(a)
    b = list(b)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, token_a in enumerate(a, 1):
        current = [i]
        for j, token_b in enumerate(b, 1):
            current.append(min(previous[j] + 1,
                               current[j - 1] + 1,
                               previous[j - 1] + (token_a != token_b)))
        previous = current
    return previous[-1]


def _per_model(hyps):
    """Normalize to a list of per-model hypothesis lists."""
    if hyps and all(isinstance(h, (list, tuple)) and h and not isinstance(h[0], str) for h in hyps):
        return list(hyps)
    return [hyps]


def min_distances(hyps, refs):
    """Per reference, the smallest edit distance over the supplied models' hypotheses."""
    models = _per_model(hyps)
    for model_hyps in models:
        _check_aligned(model_hyps, refs)
    return [min(edit_distance(model_hyps[i], ref) for model_hyps in models)
            for i, ref in enumerate(refs)]


def distance_buckets(hyps, refs, overlap_flags=None, ks=DEFAULT_BUCKETS):
    """
    For each k, the percentage of items within edit distance k, overall and
    on the no-overlap subset. `hyps` is either one hypothesis list or a list
    of hypothesis lists (one per model), in which case the closest hypothesis
    of each item counts.
    """
    if overlap_flags is None:
        overlap_flags = [False] * len(refs)
    distances = min_distances(hyps, refs)
    _check_aligned(distances, refs, overlap_flags)
    no_overlap_total = _no_overlap_total(overlap_flags)
    buckets = OrderedDict()
    for k in sorted(ks):
        within = [distance <= k for distance in distances]
        within_no = sum(1 for ok, flag in zip(within, overlap_flags) if ok and not flag)
        buckets[k] = (percent(sum(within), len(refs)), percent(within_no, no_overlap_total))
    return buckets


def correct_set(hyps, refs, max_distance=0):
    """Indices of items whose hypothesis is within `max_distance` edits of the reference."""
    _check_aligned(hyps, refs)
    return set(i for i, (h, r) in enumerate(zip(hyps, refs)) if edit_distance(h, r) <= max_distance)


class CoverResult(object):

    def __init__(self, chosen_models, covered, marginal_gains):
        self.chosen_models = chosen_models
        self.covered = covered
        self.marginal_gains = marginal_gains

    def __repr__(self):
        return "CoverResult(%r, %d covered, gains=%r)" % (self.chosen_models, len(self.covered),
                                                          self.marginal_gains)


def greedy_cover(correct_sets, n):
    """
    Choose up to `n` models, each time the one adding most items not yet
    covered. Ties go to the smallest model id; selection stops when no model
    adds anything.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    covered = set()
    chosen = []
    gains = []
    remaining = sorted(correct_sets)
    for _ in range(n):
        best_gain = 0
        best_model = None
        for model in remaining:
            gain = len(correct_sets[model] - covered)
            if gain > best_gain:
                best_gain = gain
                best_model = model
        if best_model is None:
            break
        chosen.append(best_model)
        gains.append(best_gain)
        covered |= correct_sets[best_model]
        remaining.remove(best_model)
    logger.debug("Greedy cover chose %s with gains %s", chosen, gains)
    return CoverResult(chosen, covered, gains)


def union_cover(correct_sets, overlap_flags):
    """
    Return (count, percent_total, percent_no_overlap) for the items correct
    under at least one model; `overlap_flags` has one entry per item.
    """
    union = set()
    for items in correct_sets.values():
        union |= set(items)
    count_no = sum(1 for i in union if not overlap_flags[i])
    return (len(union), percent(len(union), len(overlap_flags)),
            percent(count_no, _no_overlap_total(overlap_flags)))


class EvalReport(object):
    """
    All metrics for one hypothesis set. `perplexity` is None when no model
    was available to score the references.
    """
    fields = ("model_id", "perplexity", "bleu", "identical_total", "identical_no_overlap",
              "distance_buckets", "size", "no_overlap_size", "hyperparameters")

    def __init__(self, perplexity, bleu, identical_total, identical_no_overlap,
                 distance_buckets, model_id=None, hyperparameters=None, size=0,
                 no_overlap_size=0):
        self.perplexity = perplexity
        self.bleu = bleu
        self.identical_total = tuple(identical_total)
        self.identical_no_overlap = tuple(identical_no_overlap)
        self.distance_buckets = OrderedDict((int(k), tuple(v)) for k, v in distance_buckets.items())
        self.model_id = model_id
        self.hyperparameters = hyperparameters or {}
        self.size = size
        self.no_overlap_size = no_overlap_size

    def as_dict(self):
        data = OrderedDict((name, getattr(self, name)) for name in self.fields)
        data["identical_total"] = list(self.identical_total)
        data["identical_no_overlap"] = list(self.identical_no_overlap)
        data["distance_buckets"] = OrderedDict((str(k), list(v))
                                               for k, v in self.distance_buckets.items())
        return data

    @classmethod
    def from_dict(cls, data):
        return cls(data["perplexity"], data["bleu"], data["identical_total"],
                   data["identical_no_overlap"], data["distance_buckets"],
                   data.get("model_id"), data.get("hyperparameters"),
                   data.get("size", 0), data.get("no_overlap_size", 0))

    def __eq__(self, other):
        return isinstance(other, EvalReport) and self.as_dict() == other.as_dict()

    def __ne__(self, other):
        return not self.__eq__(other)


def evaluate(hyps, refs, overlap_flags=None, logprobs=None, model_id=None, hyperparameters=None):
    """Compute every metric for one model's hypotheses."""
    if not refs:
        raise EmptyEvalSet("nothing to evaluate")
    if overlap_flags is None:
        overlap_flags = [False] * len(refs)
    _check_aligned(hyps, refs, overlap_flags)
    identical_total, identical_no_overlap = exact_match(hyps, refs, overlap_flags)
    report = EvalReport(
        perplexity=perplexity(logprobs) if logprobs is not None else None,
        bleu=bleu(hyps, refs),
        identical_total=identical_total,
        identical_no_overlap=identical_no_overlap,
        distance_buckets=distance_buckets(hyps, refs, overlap_flags),
        model_id=model_id,
        hyperparameters=hyperparameters,
        size=len(refs),
        no_overlap_size=_no_overlap_total(overlap_flags))
    logger.info("BLEU %.2f, identical %d (%.2f%%)", report.bleu, *identical_total)
    return report


class CoverReport(object):
    """
    Coverage of a set of models: one row per greedy prefix (top-1 .. top-n)
    and one for the union of all models. Each row holds the model ids and,
    per edit distance k, (percent_total, percent_no_overlap) of the items
    that at least one of the row's models translates within k edits.
    """

    def __init__(self, rows, size=0, no_overlap_size=0, marginal_gains=()):
        self.rows = [(name, list(models), OrderedDict((int(k), tuple(v)) for k, v in buckets.items()))
                     for name, models, buckets in rows]
        self.size = size
        self.no_overlap_size = no_overlap_size
        self.marginal_gains = list(marginal_gains)

    def as_dict(self):
        return OrderedDict([
            ("rows", [OrderedDict([("name", name), ("models", models),
                                   ("distance_buckets", OrderedDict((str(k), list(v))
                                                                    for k, v in buckets.items()))])
                      for name, models, buckets in self.rows]),
            ("size", self.size),
            ("no_overlap_size", self.no_overlap_size),
            ("marginal_gains", self.marginal_gains),
        ])

    @classmethod
    def from_dict(cls, data):
        rows = [(row["name"], row["models"], row["distance_buckets"]) for row in data["rows"]]
        return cls(rows, data.get("size", 0), data.get("no_overlap_size", 0),
                   data.get("marginal_gains", ()))

    def __eq__(self, other):
        return isinstance(other, CoverReport) and self.as_dict() == other.as_dict()

    def __ne__(self, other):
        return not self.__eq__(other)


def cover_report(hyps_by_model, refs, overlap_flags=None, n=5, ks=DEFAULT_BUCKETS, max_distance=0):
    """
    Rank the models of `hyps_by_model` (model id -> hypotheses) by greedy
    cover of their correct items, then tabulate distance buckets for each
    top-k prefix of that ranking and for the union of all models.
    """
    if not refs:
        raise EmptyEvalSet("nothing to evaluate")
    if overlap_flags is None:
        overlap_flags = [False] * len(refs)
    _check_aligned(refs, refs, overlap_flags)
    correct_sets = OrderedDict((model, correct_set(hyps, refs, max_distance))
                               for model, hyps in hyps_by_model.items())
    cover = greedy_cover(correct_sets, n)
    rows = []
    for k in range(1, len(cover.chosen_models) + 1):
        models = cover.chosen_models[:k]
        rows.append(("top-%d" % k, models,
                     distance_buckets([hyps_by_model[m] for m in models], refs, overlap_flags, ks)))
    everything = sorted(hyps_by_model)
    rows.append(("union", everything,
                 distance_buckets([hyps_by_model[m] for m in everything], refs, overlap_flags, ks)))
    count, pct, pct_no = union_cover(correct_sets, overlap_flags)
    logger.info("Union of %d models covers %d items (%.2f%%, %.2f%% no-overlap)",
                len(everything), count, pct, pct_no)
    return CoverReport(rows, len(refs), _no_overlap_total(overlap_flags), cover.marginal_gains)
