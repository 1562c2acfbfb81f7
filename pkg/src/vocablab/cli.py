"""Command-line interface: one ``vocab-lab`` binary with subcommands.

Subcommands write only to their declared output paths and refuse to
clobber existing files unless ``--overwrite`` is given.  ``run`` and
``comp-size-run`` exit with a distinct code per failing stage class (see
``pipeline.STAGE_EXIT_CODES``); other failures exit 1 and usage errors
exit 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .bpe import BpeModel, encode_corpus, decode, train_bpe
from .datamix import MixManifest, check_parallel, mix
from .errors import ConfigurationError, StageError, VocabLabError
from .metrics import (
    BleuParams,
    ChrfParams,
    EvalPair,
    ScoreReport,
    aggregate_runs,
    bleu,
    chrf,
    combined_signature,
    format_mean_sd,
)
from .miner import mine_divergence, render_examples
from .overlap import compute_overlap, compute_triple_overlap, complementary_size
from .pipeline import ExperimentManifest, comp_size_experiment, run_experiment
from .prefix import PrefixRule, apply_prefix, strip_prefix
from .textio import read_lines, read_token_lines, write_lines, write_token_lines
from .vocab import extract_vocab, read_vocab, write_vocab
from .bpe import TokenizedCorpus

logger = logging.getLogger("vocab-lab")

WORKERS_ENV = "VOCAB_LAB_WORKERS"

FORMAT_VERSIONS = (
    "model format vocablab-bpe/1, mix manifest vocablab-mix/1, "
    "experiment manifest vocablab-experiment/1"
)


@dataclass
class GlobalConfig:
    log_level: str = "warning"
    workers: int = 1
    deterministic: bool = False
    seed: int = 1

    def __post_init__(self):
        if self.deterministic:
            self.workers = 1
        if self.workers < 1:
            raise ConfigurationError("worker count must be >= 1")


def _ensure_output(path, overwrite: bool) -> Path:
    path = Path(path)
    if path.exists() and not overwrite:
        raise ConfigurationError(f"refusing to overwrite {path} (pass --overwrite)")
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _load_corpus(path) -> TokenizedCorpus:
    return TokenizedCorpus(language=Path(path).stem, lines=read_token_lines(path))


def _write_json(path, data, overwrite: bool) -> None:
    _ensure_output(path, overwrite).write_text(
        json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def cmd_train_bpe(args, config: GlobalConfig) -> int:
    takes = None
    if args.take is not None:
        parts = args.take.split(",")
        if len(parts) == 1:
            parts = parts * len(args.input)
        if len(parts) != len(args.input):
            raise ConfigurationError("--take must give one value or one per --input")
        takes = [None if part == "all" else int(part) for part in parts]
    lines = []
    for position, path in enumerate(args.input):
        corpus = read_lines(path)
        if takes is not None and takes[position] is not None:
            corpus = corpus[: takes[position]]
        lines.extend(corpus)
    model = train_bpe(
        lines, args.vocab_size, args.byte_fallback, normalize=args.nfkc
    )
    model.save(_ensure_output(args.model_out, args.overwrite))
    logger.info("trained %d merges, %d pieces", len(model.merges), len(model.pieces))
    return 0


def cmd_encode(args, config: GlobalConfig) -> int:
    model = BpeModel.load(args.model)
    corpus = encode_corpus(model, read_lines(args.input), Path(args.input).stem,
                           workers=config.workers)
    write_token_lines(_ensure_output(args.output, args.overwrite), corpus.lines)
    return 0


def cmd_decode(args, config: GlobalConfig) -> int:
    model = BpeModel.load(args.model)
    rows = read_token_lines(args.input)
    write_lines(_ensure_output(args.output, args.overwrite),
                (decode(model, row) for row in rows))
    return 0


def cmd_prefix(args, config: GlobalConfig) -> int:
    rule = PrefixRule(args.prefix, exempt=frozenset(args.exempt))
    corpus = _load_corpus(args.input)
    out = strip_prefix(corpus, rule) if args.strip else apply_prefix(corpus, rule)
    write_token_lines(_ensure_output(args.output, args.overwrite), out.lines)
    return 0


def cmd_extract_vocab(args, config: GlobalConfig) -> int:
    vocabulary = extract_vocab(*(_load_corpus(path) for path in args.input))
    fmt = "compat" if args.compat else "canonical"
    write_vocab(vocabulary, _ensure_output(args.out, args.overwrite), format=fmt)
    if args.compat_out:
        write_vocab(vocabulary, _ensure_output(args.compat_out, args.overwrite),
                    format="compat")
    logger.info("extracted %d entries", vocabulary.size)
    return 0


def _vocab_or_size(value):
    return int(value) if value.isdigit() else read_vocab(value)


def cmd_overlap(args, config: GlobalConfig) -> int:
    joint = _vocab_or_size(args.vocab_joint) if args.vocab_joint else None
    report = compute_overlap(
        _vocab_or_size(args.vocab_a), _vocab_or_size(args.vocab_b), joint
    )
    _write_json(args.report, report.to_json_dict(), args.overwrite)
    if args.dump_tokens:
        if report.overlap_tokens is None:
            raise ConfigurationError("no token sets available to dump (size-only inputs)")
        write_lines(_ensure_output(args.dump_tokens, args.overwrite),
                    sorted(report.overlap_tokens))
    return 0


def cmd_overlap3(args, config: GlobalConfig) -> int:
    report = compute_triple_overlap(
        read_vocab(args.base), read_vocab(args.aux1), read_vocab(args.aux2)
    )
    data = report.to_json_dict()
    if args.report:
        _write_json(args.report, data, args.overwrite)
    else:
        print(json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True))
    return 0


def cmd_comp_size(args, config: GlobalConfig) -> int:
    target = complementary_size(_vocab_or_size(args.joint), _vocab_or_size(args.base))
    print(target)
    return 0


def cmd_mix(args, config: GlobalConfig) -> int:
    manifest = MixManifest.load(args.manifest)
    out_dir = Path(args.out_dir)
    if not args.overwrite:
        for name in ("train.src", "train.trg", "valid.src", "valid.trg"):
            if (out_dir / name).exists():
                raise ConfigurationError(
                    f"refusing to overwrite {out_dir / name} (pass --overwrite)"
                )
    for request in manifest.components + manifest.validation:
        diag = check_parallel(request.source, request.target)
        for issue in diag.issues:
            logger.warning("%s/%s: %s", request.source, request.target, issue)
    mix(manifest, out_dir)
    return 0


def cmd_score(args, config: GlobalConfig) -> int:
    hyp_lines = read_lines(args.hyp)
    ref_lines = read_lines(args.ref)
    if len(hyp_lines) != len(ref_lines):
        raise ConfigurationError(
            f"hypothesis has {len(hyp_lines)} lines, reference {len(ref_lines)}"
        )
    pairs = [EvalPair(h, r) for h, r in zip(hyp_lines, ref_lines)]
    bleu_params, chrf_params = BleuParams(), ChrfParams()
    model = args.model or Path(args.hyp).stem

    data: dict = {"model": model, "n_pairs": len(pairs)}
    if args.metric in ("both", "bleu"):
        data["corpus_bleu"] = bleu(pairs, bleu_params)
    if args.metric in ("both", "chrf"):
        corpus, per_sentence = chrf(pairs, chrf_params)
        data["corpus_chrf"] = corpus
        data["sentence_chrf"] = per_sentence
        if args.per_sentence:
            write_lines(_ensure_output(args.per_sentence, args.overwrite),
                        (f"{value:.6f}" for value in per_sentence))
    if args.metric == "both":
        data["signature"] = combined_signature(bleu_params, chrf_params)
    elif args.metric == "bleu":
        data["signature"] = bleu_params.signature()
    else:
        data["signature"] = chrf_params.signature()
    _write_json(args.report, data, args.overwrite)
    return 0


def cmd_report(args, config: GlobalConfig) -> int:
    by_model: dict[str, list[ScoreReport]] = {}
    for path in args.scores:
        report = ScoreReport.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        by_model.setdefault(report.model or Path(path).stem, []).append(report)

    rows = []
    for model, reports in by_model.items():
        agg = aggregate_runs(reports)
        rows.append((model, agg))

    table = ["model\tbleu\tchrf"]
    plot = ["metric\tmodel\tmean\tsd"]
    for model, agg in rows:
        table.append(
            f"{model}\t{format_mean_sd(agg.mean_bleu, agg.sd_bleu)}"
            f"\t{format_mean_sd(agg.mean_chrf, agg.sd_chrf)}"
        )
        plot.append(f"bleu\t{model}\t{agg.mean_bleu!r}\t{agg.sd_bleu!r}")
        plot.append(f"chrf\t{model}\t{agg.mean_chrf!r}\t{agg.sd_chrf!r}")
    write_lines(_ensure_output(args.out, args.overwrite), table)
    plot_out = args.plot_out or str(args.out) + ".plot.tsv"
    write_lines(_ensure_output(plot_out, args.overwrite), plot)
    if args.svg:
        _ensure_output(args.svg, args.overwrite).write_text(
            _score_bar_svg(rows), encoding="utf-8"
        )
    return 0


def _score_bar_svg(rows) -> str:
    """Minimal grouped bar chart of mean scores with spread whiskers."""
    bar_w, gap, height, base = 34, 26, 240, 210
    width = 60 + len(rows) * (2 * bar_w + gap)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<line x1="40" y1="{base}" x2="{width - 10}" y2="{base}" stroke="black"/>',
        f'<line x1="40" y1="{base}" x2="40" y2="10" stroke="black"/>',
        f'<text x="6" y="14" font-size="10">100</text>',
        f'<text x="6" y="{base + 4}" font-size="10">0</text>',
    ]
    scale = (base - 10) / 100.0
    x = 50.0
    for model, agg in rows:
        for offset, (mean, sd, color) in enumerate(
            ((agg.mean_bleu, agg.sd_bleu, "#4878a8"), (agg.mean_chrf, agg.sd_chrf, "#a85448"))
        ):
            left = x + offset * bar_w
            top = base - mean * scale
            parts.append(
                f'<rect x="{left:.1f}" y="{top:.1f}" width="{bar_w - 4}" '
                f'height="{(mean * scale):.1f}" fill="{color}"/>'
            )
            mid = left + (bar_w - 4) / 2
            parts.append(
                f'<line x1="{mid:.1f}" y1="{base - (mean + sd) * scale:.1f}" '
                f'x2="{mid:.1f}" y2="{base - max(mean - sd, 0) * scale:.1f}" stroke="black"/>'
            )
        parts.append(
            f'<text x="{x:.1f}" y="{base + 16}" font-size="10">{model}</text>'
        )
        x += 2 * bar_w + gap
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_mine(args, config: GlobalConfig) -> int:
    records = mine_divergence(
        read_lines(args.src),
        read_lines(args.ref),
        read_lines(args.hyp_a),
        read_lines(args.hyp_b),
        threshold=args.threshold,
        symmetric=args.symmetric,
    )
    _ensure_output(args.out, args.overwrite).write_text(
        render_examples(records), encoding="utf-8"
    )
    print(render_examples(records, limit=args.limit), end="")
    return 0


def _run_guard(args) -> ExperimentManifest:
    manifest = ExperimentManifest.load(args.manifest)
    if args.out_dir:
        manifest.out_dir = Path(args.out_dir)
    out_dir = Path(manifest.out_dir)
    if out_dir.exists() and any(out_dir.iterdir()) and not args.overwrite:
        raise ConfigurationError(
            f"output directory {out_dir} is not empty (pass --overwrite)"
        )
    return manifest


def cmd_run(args, config: GlobalConfig) -> int:
    run_experiment(_run_guard(args), workers=config.workers)
    return 0


def cmd_comp_size_run(args, config: GlobalConfig) -> int:
    comp_size_experiment(_run_guard(args), workers=config.workers)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vocab-lab",
        description="Corpus and vocabulary engineering toolkit for multilingual MT experiments.",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"vocab-lab {__version__} ({FORMAT_VERSIONS})",
    )
    parser.add_argument("--log-level", default="warning",
                        choices=["debug", "info", "warning", "error"])
    parser.add_argument("--workers", type=int,
                        default=int(os.environ.get(WORKERS_ENV, "1")),
                        help=f"worker processes for encoding (default ${WORKERS_ENV} or 1)")
    parser.add_argument("--deterministic", action="store_true",
                        help="force single-worker execution of ordering-sensitive stages")
    parser.add_argument("--seed", type=int, default=1, help="default seed")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--overwrite", action="store_true",
                        help="allow clobbering existing outputs")

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("train-bpe", parents=[common], help="train a subword model")
    p.add_argument("--input", action="append", required=True)
    p.add_argument("--take", default=None,
                   help="head quota per input: one integer, 'all', or a comma list")
    p.add_argument("--vocab-size", type=int, required=True)
    p.add_argument("--byte-fallback", action="store_true")
    p.add_argument("--nfkc", action="store_true", help="NFKC-normalize text first")
    p.add_argument("--model-out", required=True)
    p.set_defaults(handler=cmd_train_bpe)

    p = sub.add_parser("encode", parents=[common], help="tokenize a corpus file")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="detokenize a token-stream file")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=cmd_decode)

    p = sub.add_parser("prefix", parents=[common], help="apply or strip a token prefix")
    p.add_argument("--input", required=True)
    p.add_argument("--prefix", required=True)
    p.add_argument("--strip", action="store_true")
    p.add_argument("--exempt", action="append", default=[])
    p.add_argument("--output", required=True)
    p.set_defaults(handler=cmd_prefix)

    p = sub.add_parser("extract-vocab", parents=[common],
                       help="extract a frequency-ordered vocabulary")
    p.add_argument("--input", action="append", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--compat", action="store_true",
                   help="write the marian-style YAML map instead of the canonical format")
    p.add_argument("--compat-out", default=None,
                   help="additionally write a marian-style YAML map here")
    p.set_defaults(handler=cmd_extract_vocab)

    p = sub.add_parser("overlap", parents=[common], help="pairwise vocabulary overlap")
    p.add_argument("--vocab-a", required=True, help="vocabulary file or plain size")
    p.add_argument("--vocab-b", required=True, help="vocabulary file or plain size")
    p.add_argument("--vocab-joint", default=None, help="joint vocabulary file or size")
    p.add_argument("--report", required=True)
    p.add_argument("--dump-tokens", default=None, help="write the overlap token set as TSV")
    p.set_defaults(handler=cmd_overlap)

    p = sub.add_parser("overlap3", parents=[common], help="overlap-of-overlaps report")
    p.add_argument("--base", required=True)
    p.add_argument("--aux1", required=True)
    p.add_argument("--aux2", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(handler=cmd_overlap3)

    p = sub.add_parser("comp-size", parents=[common],
                       help="complementary tokenizer size from joint and base")
    p.add_argument("--joint", required=True, help="vocabulary file or plain size")
    p.add_argument("--base", required=True, help="vocabulary file or plain size")
    p.set_defaults(handler=cmd_comp_size)

    p = sub.add_parser("mix", parents=[common], help="build mixed train/valid sets")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=cmd_mix)

    p = sub.add_parser("score", parents=[common], help="score translations against references")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--metric", choices=["bleu", "chrf", "both"], default="both")
    p.add_argument("--per-sentence", default=None, help="write per-sentence chrf here")
    p.add_argument("--report", required=True)
    p.add_argument("--model", default=None, help="model label recorded in the report")
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("report", parents=[common],
                       help="aggregate score reports into tables")
    p.add_argument("--scores", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot-out", default=None)
    p.add_argument("--svg", default=None)
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("mine", parents=[common],
                       help="mine sentence pairs with large ChrF differences")
    p.add_argument("--src", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp-a", required=True)
    p.add_argument("--hyp-b", required=True)
    p.add_argument("--threshold", type=float, default=50.0)
    p.add_argument("--symmetric", action="store_true",
                   help="keep lines where either system wins by the margin")
    p.add_argument("--out", required=True)
    p.add_argument("--limit", type=int, default=10, help="rows printed to stdout")
    p.set_defaults(handler=cmd_mine)

    p = sub.add_parser("run", parents=[common], help="run a full experiment manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("comp-size-run", parents=[common],
                       help="run the complementary-vocabulary-size experiment")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(handler=cmd_comp_size_run)

    return parser


def dispatch(argv, raise_errors: bool = False) -> int:
    """Route one command line to its handler and map errors to exit codes.

    ``raise_errors`` lets the pipeline runner re-wrap toolkit errors with
    stage context instead of collapsing them to an exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "handler", None):
        parser.print_usage()
        return 2
    logging.basicConfig(level=args.log_level.upper())
    try:
        config = GlobalConfig(
            log_level=args.log_level,
            workers=args.workers,
            deterministic=args.deterministic,
            seed=args.seed,
        )
        return args.handler(args, config)
    except StageError as exc:
        if raise_errors:
            raise
        logger.error("%s", exc)
        return exc.exit_code
    except VocabLabError as exc:
        if raise_errors:
            raise
        logger.error("%s", exc)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
