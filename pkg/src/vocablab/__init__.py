"""vocablab: corpus and vocabulary engineering for multilingual MT experiments."""

__version__ = "0.1.0"

from .bpe import BpeModel, TokenizedCorpus, decode, encode, encode_corpus, train_bpe
from .datamix import Bitext, MixManifest, MixRequest, check_parallel, mix
from .metrics import (
    BleuParams,
    ChrfParams,
    EvalPair,
    ScoreReport,
    aggregate_runs,
    bleu,
    chrf,
    score_pairs,
    sentence_chrf,
)
from .miner import DivergenceRecord, mine_divergence, render_examples
from .overlap import (
    OverlapReport,
    TripleOverlapReport,
    complementary_size,
    compute_overlap,
    compute_triple_overlap,
    triple_overlap_from_counts,
)
from .pipeline import ExperimentManifest, comp_size_experiment, run_experiment
from .prefix import PrefixRule, apply_prefix, strip_prefix
from .vocab import Vocabulary, extract_vocab, read_vocab, write_vocab

__all__ = [
    "BpeModel",
    "TokenizedCorpus",
    "train_bpe",
    "encode",
    "decode",
    "encode_corpus",
    "PrefixRule",
    "apply_prefix",
    "strip_prefix",
    "Vocabulary",
    "extract_vocab",
    "write_vocab",
    "read_vocab",
    "OverlapReport",
    "TripleOverlapReport",
    "compute_overlap",
    "compute_triple_overlap",
    "triple_overlap_from_counts",
    "complementary_size",
    "Bitext",
    "MixManifest",
    "MixRequest",
    "mix",
    "check_parallel",
    "EvalPair",
    "BleuParams",
    "ChrfParams",
    "ScoreReport",
    "bleu",
    "chrf",
    "sentence_chrf",
    "score_pairs",
    "aggregate_runs",
    "DivergenceRecord",
    "mine_divergence",
    "render_examples",
    "ExperimentManifest",
    "run_experiment",
    "comp_size_experiment",
]
