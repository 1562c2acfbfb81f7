"""Corpus- and sentence-level BLEU and ChrF scoring.

BLEU is the corpus-level geometric mean of modified n-gram precisions for
orders 1..4 times a brevity penalty, with mteval-style "13a" punctuation
pre-tokenization and exponential smoothing of zero counts, so scores line
up with the widely published reference scorer defaults.  ChrF is the
character n-gram F-score for orders 1..6 with beta=2 and whitespace
stripped; per-order F values are averaged, with a tiny epsilon standing in
for precision or recall whose denominator is empty.

Every knob is recorded in a signature string; reports with different
signatures refuse to aggregate.
"""

from __future__ import annotations

import math
import re
import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import ComparabilityError, InputError

CHRF_EPSILON = 1e-16


@dataclass(frozen=True)
class EvalPair:
    hypothesis: str
    reference: str


@dataclass(frozen=True)
class BleuParams:
    max_order: int = 4
    smoothing: str = "exp"  # exp | floor | none
    floor_value: float = 0.0
    tokenization: str = "13a"  # 13a | none
    lowercase: bool = False

    def signature(self) -> str:
        case = "lc" if self.lowercase else "mixed"
        return (
            f"bleu|order:{self.max_order}|smooth:{self.smoothing}"
            f"|tok:{self.tokenization}|case:{case}"
        )


@dataclass(frozen=True)
class ChrfParams:
    order: int = 6
    beta: float = 2.0
    remove_whitespace: bool = True
    epsilon: float = CHRF_EPSILON

    def signature(self) -> str:
        space = "removed" if self.remove_whitespace else "kept"
        return f"chrf|order:{self.order}|beta:{self.beta:g}|space:{space}|eps:{self.epsilon:g}"


@dataclass
class ScoreReport:
    corpus_bleu: float
    corpus_chrf: float
    sentence_chrf: list[float]
    signature: str
    model: str = ""

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "corpus_bleu": self.corpus_bleu,
            "corpus_chrf": self.corpus_chrf,
            "sentence_chrf": self.sentence_chrf,
            "signature": self.signature,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ScoreReport":
        return cls(
            corpus_bleu=data["corpus_bleu"],
            corpus_chrf=data["corpus_chrf"],
            sentence_chrf=list(data["sentence_chrf"]),
            signature=data["signature"],
            model=data.get("model", ""),
        )


def tokenize_13a(line: str) -> str:
    """Minimal mteval-v13a-equivalent tokenization of one segment."""
    norm = line
    norm = norm.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    norm = norm.replace("&quot;", '"')
    norm = norm.replace("&amp;", "&")
    norm = norm.replace("&lt;", "<")
    norm = norm.replace("&gt;", ">")
    norm = " {} ".format(norm)
    norm = re.sub(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])", " \\1 ", norm)
    norm = re.sub(r"([^0-9])([\.,])", "\\1 \\2 ", norm)
    norm = re.sub(r"([\.,])([^0-9])", " \\1 \\2", norm)
    norm = re.sub(r"([0-9])(-)", "\\1 \\2 ", norm)
    norm = re.sub(r"\s+", " ", norm)
    return norm.strip()


def _bleu_tokens(line: str, params: BleuParams) -> list[str]:
    if params.lowercase:
        line = line.lower()
    if params.tokenization == "13a":
        line = tokenize_13a(line)
    elif params.tokenization != "none":
        raise ValueError(f"unknown tokenization {params.tokenization!r}")
    return line.split()


def _ngram_counts(tokens: list[str], max_order: int) -> Counter:
    counts: Counter = Counter()
    for order in range(1, max_order + 1):
        for start in range(len(tokens) - order + 1):
            counts[tuple(tokens[start:start + order])] += 1
    return counts


def bleu(pairs, params: BleuParams = BleuParams()) -> float:
    """Corpus BLEU in [0, 100] over hypothesis/reference pairs."""
    pairs = list(pairs)
    if not pairs:
        raise InputError("no pairs to score")
    order = params.max_order
    correct = [0] * order
    total = [0] * order
    hyp_len = 0
    ref_len = 0
    for pair in pairs:
        hyp = _bleu_tokens(pair.hypothesis, params)
        ref = _bleu_tokens(pair.reference, params)
        hyp_len += len(hyp)
        ref_len += len(ref)
        ref_ngrams = _ngram_counts(ref, order)
        for ngram, count in _ngram_counts(hyp, order).items():
            n = len(ngram) - 1
            total[n] += count
            correct[n] += min(count, ref_ngrams.get(ngram, 0))

    if hyp_len == 0:
        return 0.0
    brevity = math.exp(min(0.0, 1.0 - ref_len / hyp_len))

    precisions = []
    smooth = 1.0
    for n in range(order):
        if total[n] == 0:
            precisions.append(0.0)
        elif correct[n] == 0:
            if params.smoothing == "exp":
                smooth *= 2.0
                precisions.append(100.0 / (smooth * total[n]))
            elif params.smoothing == "floor":
                precisions.append(100.0 * params.floor_value / total[n])
            else:
                precisions.append(0.0)
        else:
            precisions.append(100.0 * correct[n] / total[n])

    # A perfect hypothesis scores 100 even when the corpus is too short to
    # populate every n-gram order; orders with no n-grams at all are vacuous.
    if brevity == 1.0 and total[0] > 0 and all(c == t for c, t in zip(correct, total)):
        return 100.0
    if any(p == 0.0 for p in precisions):
        return 0.0
    return brevity * math.exp(sum(math.log(p) for p in precisions) / order)


def _chrf_text(text: str, params: ChrfParams) -> str:
    return re.sub(r"\s+", "", text) if params.remove_whitespace else text


def _chrf_stats(hypothesis: str, reference: str, params: ChrfParams) -> list[int]:
    """Flat [hyp_ngrams, ref_ngrams, matches] triples for orders 1..order."""
    hyp = _chrf_text(hypothesis, params)
    ref = _chrf_text(reference, params)
    stats = []
    for order in range(1, params.order + 1):
        hyp_ngrams = Counter(hyp[i:i + order] for i in range(len(hyp) - order + 1))
        ref_ngrams = Counter(ref[i:i + order] for i in range(len(ref) - order + 1))
        matches = sum((hyp_ngrams & ref_ngrams).values())
        stats += [sum(hyp_ngrams.values()), sum(ref_ngrams.values()), matches]
    return stats


def _chrf_from_stats(stats: list[int], params: ChrfParams) -> float:
    beta_sq = params.beta ** 2
    eps = params.epsilon
    score = 0.0
    effective_order = 0
    for i in range(0, len(stats), 3):
        n_hyp, n_ref, matches = stats[i:i + 3]
        if n_hyp == 0 and n_ref == 0:
            continue
        precision = matches / n_hyp if n_hyp > 0 else eps
        recall = matches / n_ref if n_ref > 0 else eps
        denominator = beta_sq * precision + recall
        if denominator > 0:
            score += (1 + beta_sq) * precision * recall / denominator
        if n_hyp > 0 and n_ref > 0:
            effective_order += 1
    if effective_order == 0:
        return 0.0
    return 100.0 * score / effective_order


def sentence_chrf(hypothesis: str, reference: str, params: ChrfParams = ChrfParams()) -> float:
    return _chrf_from_stats(_chrf_stats(hypothesis, reference, params), params)


def chrf(pairs, params: ChrfParams = ChrfParams()) -> tuple[float, list[float]]:
    """Corpus ChrF plus per-sentence scores.

    The corpus score is computed from n-gram statistics summed over all
    pairs, not from averaging the sentence scores.
    """
    pairs = list(pairs)
    if not pairs:
        raise InputError("no pairs to score")
    corpus_stats = [0] * (3 * params.order)
    per_sentence = []
    for pair in pairs:
        stats = _chrf_stats(pair.hypothesis, pair.reference, params)
        for i, value in enumerate(stats):
            corpus_stats[i] += value
        per_sentence.append(_chrf_from_stats(stats, params))
    return _chrf_from_stats(corpus_stats, params), per_sentence


def combined_signature(bleu_params: BleuParams, chrf_params: ChrfParams) -> str:
    return f"{bleu_params.signature()}+{chrf_params.signature()}"


def score_pairs(
    pairs,
    bleu_params: BleuParams = BleuParams(),
    chrf_params: ChrfParams = ChrfParams(),
    model: str = "",
) -> ScoreReport:
    pairs = list(pairs)
    corpus_chrf, per_sentence = chrf(pairs, chrf_params)
    return ScoreReport(
        corpus_bleu=bleu(pairs, bleu_params),
        corpus_chrf=corpus_chrf,
        sentence_chrf=per_sentence,
        signature=combined_signature(bleu_params, chrf_params),
        model=model,
    )


class RunAggregate(NamedTuple):
    mean_bleu: float
    sd_bleu: float
    mean_chrf: float
    sd_chrf: float


def aggregate_runs(reports) -> RunAggregate:
    """Mean and population standard deviation across repeated runs."""
    reports = list(reports)
    if not reports:
        raise InputError("no reports to aggregate")
    signatures = {report.signature for report in reports}
    if len(signatures) > 1:
        raise ComparabilityError(
            "reports carry different signatures: " + ", ".join(sorted(signatures))
        )
    bleus = [report.corpus_bleu for report in reports]
    chrfs = [report.corpus_chrf for report in reports]
    return RunAggregate(
        mean_bleu=statistics.fmean(bleus),
        sd_bleu=statistics.pstdev(bleus),
        mean_chrf=statistics.fmean(chrfs),
        sd_chrf=statistics.pstdev(chrfs),
    )


def format_mean_sd(mean: float, sd: float) -> str:
    """Plain-text rendering of the value-with-spread style used in reports."""
    return f"{mean:.1f}±{sd:.2f}"
