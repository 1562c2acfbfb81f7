"""End-to-end experiment construction from a single manifest.

A run turns raw bitext corpora into a complete artifact directory:
per-language subword models, tokenized and optionally prefixed corpora,
merged source-side training data, extracted vocabularies (joint or
disjoint), an overlap report per auxiliary language, mixed train/valid
sets, and a resolved manifest with checksums.

Internally the run is compiled to a recipe of toolkit CLI invocations
(with ``$RUN`` standing for the output directory) and then executed
through the regular command dispatcher, so running the recorded recipe by
hand reproduces every artifact byte for byte.  The recipe is stored in
``manifest.resolved.json``.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigurationError, StageError, VocabLabError
from .overlap import complementary_size
from .prefix import PrefixRule
from .textio import read_lines, sha256_file
from .vocab import read_vocab

MANIFEST_FORMAT = "vocablab-experiment/1"

# Stage classes and their CLI exit codes.
STAGE_EXIT_CODES = {
    "manifest": 10,
    "tokenizer": 11,
    "encode": 12,
    "prefix": 13,
    "vocab": 14,
    "overlap": 15,
    "mix": 16,
    "report": 17,
}

_RESERVED_NAMES = {"source_side", "joint", "final", "raw"}


@dataclass
class CorpusSpec:
    source: str
    target: str
    domain: str = ""


@dataclass
class ExperimentManifest:
    source: str
    target: str
    corpora: dict
    out_dir: Path
    auxiliary: list = field(default_factory=list)
    name: str = "experiment"
    disjoint: bool = False
    vocab_size: dict = field(default_factory=dict)
    aux_prefixes: dict = field(default_factory=dict)
    byte_fallback: bool = True
    normalize: bool = False
    tokenizer_lines: dict = field(default_factory=dict)
    train_lines: dict = field(default_factory=dict)
    valid_lines: dict = field(default_factory=dict)
    sample: str = "shuffle"
    dedup: bool = False
    subset_order: str = "subset-then-tokenize"
    reuse_vocab_from: Path | None = None
    joint_run: Path | None = None
    seed: int = 1

    def languages(self) -> list:
        return [self.source] + list(self.auxiliary)

    @classmethod
    def load(cls, path) -> "ExperimentManifest":
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        return cls.from_json_dict(data, base_dir=path.parent, default_name=path.stem)

    @classmethod
    def from_json_dict(cls, data: dict, base_dir=".", default_name="experiment") -> "ExperimentManifest":
        base_dir = Path(base_dir)
        source = data["source"]
        auxiliary = list(data.get("auxiliary", []))
        target = data["target"]
        languages = [source] + auxiliary

        corpora = {}
        for lang, spec in data["corpora"].items():
            corpora[lang] = CorpusSpec(
                source=str((base_dir / spec["source"]).resolve()),
                target=str((base_dir / spec["target"]).resolve()),
                domain=spec.get("domain", ""),
            )

        def per_language(value, default, langs):
            if isinstance(value, dict):
                resolved = {lang: value.get(lang, default) for lang in langs}
            else:
                resolved = {lang: (default if value is None else value) for lang in langs}
            return resolved

        mix_spec = data.get("mix", {})
        manifest = cls(
            name=data.get("name", default_name),
            source=source,
            auxiliary=auxiliary,
            target=target,
            corpora=corpora,
            out_dir=base_dir / data["out_dir"] if "out_dir" in data else base_dir / default_name,
            disjoint=bool(data.get("disjoint", False)),
            vocab_size=per_language(data.get("vocab_size", 32000), 32000, languages + [target]),
            aux_prefixes={
                lang: data.get("aux_prefixes", {}).get(lang, lang.upper() + "_")
                for lang in auxiliary
            },
            byte_fallback=bool(data.get("byte_fallback", True)),
            normalize=bool(data.get("normalize", False)),
            tokenizer_lines=per_language(data.get("tokenizer_lines"), None, languages),
            train_lines=per_language(mix_spec.get("train"), None, languages),
            valid_lines=per_language(mix_spec.get("validation", 0), 0, languages),
            sample=mix_spec.get("sample", "shuffle"),
            dedup=bool(mix_spec.get("dedup", False)),
            subset_order=data.get("subset_order", "subset-then-tokenize"),
            reuse_vocab_from=Path(data["reuse_vocab_from"]) if data.get("reuse_vocab_from") else None,
            joint_run=Path(data["joint_run"]) if data.get("joint_run") else None,
            seed=int(data.get("seed", 1)),
        )
        return manifest

    def validate(self) -> "ExperimentManifest":
        all_langs = self.languages() + [self.target]
        if len(set(all_langs)) != len(all_langs):
            raise ConfigurationError("source, auxiliary, and target tags must be distinct")
        for lang in all_langs:
            if not lang or not all(ch.isalnum() or ch in "_-" for ch in lang):
                raise ConfigurationError(f"bad language tag {lang!r}")
            if lang in _RESERVED_NAMES:
                raise ConfigurationError(f"language tag {lang!r} is reserved")
        for lang in self.languages():
            if lang not in self.corpora:
                raise ConfigurationError(f"no corpus configured for language {lang!r}")
            spec = self.corpora[lang]
            for path in (spec.source, spec.target):
                if not Path(path).is_file():
                    raise ConfigurationError(f"corpus file not found: {path}")
        for lang, size in self.vocab_size.items():
            if size is None or size <= 0:
                raise ConfigurationError(f"vocab size for {lang!r} must be positive")
        if self.subset_order not in ("subset-then-tokenize", "tokenize-then-subset"):
            raise ConfigurationError(f"unknown subset order {self.subset_order!r}")
        if self.disjoint:
            for lang in self.auxiliary:
                PrefixRule(self.aux_prefixes[lang])
        if self.reuse_vocab_from is not None and not (Path(self.reuse_vocab_from) / "vocab").is_dir():
            raise ConfigurationError(f"reuse_vocab_from has no vocab/ dir: {self.reuse_vocab_from}")
        return self


def _src_tok(lang: str, split: str, prefixed: bool) -> str:
    suffix = ".prefixed" if prefixed else ""
    return f"$RUN/tok/{split}.{lang}.src{suffix}.tok"


class _Runner:
    """Executes recipe steps through the CLI dispatcher, one stage at a time."""

    def __init__(self, out_dir: Path, workers: int):
        self.out_dir = out_dir
        self.workers = workers
        self.recipe: list[dict] = []

    def resolve(self, text: str) -> str:
        return text.replace("$RUN", str(self.out_dir))

    def run(self, stage: str, argv: list[str]) -> None:
        from . import cli  # deferred: the CLI dispatches back into the modules

        self.recipe.append({"stage": stage, "argv": argv})
        full = ["--workers", str(self.workers), *argv, "--overwrite"]
        try:
            code = cli.dispatch([self.resolve(part) for part in full], raise_errors=True)
        except StageError:
            raise
        except VocabLabError as exc:
            raise StageError(stage, str(exc), STAGE_EXIT_CODES[stage]) from exc
        if code != 0:
            raise StageError(stage, f"exit code {code}", STAGE_EXIT_CODES[stage])


def run_experiment(manifest: ExperimentManifest, workers: int = 1) -> Path:
    """Run the full pipeline described by a manifest; returns the run dir."""
    out_dir = Path(manifest.out_dir)

    try:
        manifest.validate()
    except VocabLabError as exc:
        raise StageError("manifest", str(exc), STAGE_EXIT_CODES["manifest"]) from exc

    for sub in ("models", "tok", "vocab", "mix", "reports"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)

    runner = _Runner(out_dir, workers)
    languages = manifest.languages()
    rules = {lang: PrefixRule(manifest.aux_prefixes[lang]) for lang in manifest.auxiliary}

    # Raw line selection, one single-component mix per language.  The
    # per-language seed is derived from the manifest seed and recorded in
    # the emitted mix manifests.
    for position, lang in enumerate(languages):
        spec = manifest.corpora[lang]
        valid_take = manifest.valid_lines[lang]
        train_take = manifest.train_lines[lang]
        if train_take is None:
            available = len(read_lines(spec.source))
            train_take = available - valid_take
            if train_take < 0:
                raise StageError(
                    "mix",
                    f"{spec.source}: validation quota exceeds corpus size",
                    STAGE_EXIT_CODES["mix"],
                )
        raw_manifest = {
            "components": [{"source": spec.source, "target": spec.target, "take": train_take}],
            "validation": [{"source": spec.source, "target": spec.target, "take": valid_take}],
            "seed": manifest.seed + position,
            "sample": manifest.sample,
            "dedup": manifest.dedup,
        }
        manifest_path = out_dir / "mix" / f"raw.{lang}.manifest.json"
        manifest_path.write_text(
            json.dumps(raw_manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        runner.run(
            "mix",
            ["mix", "--manifest", f"$RUN/mix/raw.{lang}.manifest.json",
             "--out-dir", f"$RUN/mix/raw/{lang}"],
        )

    # Subword models.  Tokenizer training data is the head of each raw
    # corpus, independent of the mixed subsets; the target-side model sees
    # the corresponding data of every language pair.
    for lang in languages:
        argv = ["train-bpe", "--input", manifest.corpora[lang].source,
                "--vocab-size", str(manifest.vocab_size[lang]),
                "--model-out", f"$RUN/models/{lang}.model"]
        if manifest.tokenizer_lines[lang] is not None:
            argv += ["--take", str(manifest.tokenizer_lines[lang])]
        if manifest.byte_fallback:
            argv.append("--byte-fallback")
        if manifest.normalize:
            argv.append("--nfkc")
        runner.run("tokenizer", argv)

    target_argv = ["train-bpe"]
    takes = []
    for lang in languages:
        target_argv += ["--input", manifest.corpora[lang].target]
        takes.append(manifest.tokenizer_lines[lang])
    if any(take is not None for take in takes):
        full = [str(take) if take is not None else "all" for take in takes]
        target_argv += ["--take", ",".join(full)]
    target_argv += ["--vocab-size", str(manifest.vocab_size[manifest.target]),
                    "--model-out", f"$RUN/models/{manifest.target}.model"]
    if manifest.byte_fallback:
        target_argv.append("--byte-fallback")
    if manifest.normalize:
        target_argv.append("--nfkc")
    runner.run("tokenizer", target_argv)

    # Tokenization of the selected subsets.
    for lang in languages:
        for split in ("train", "valid"):
            runner.run(
                "encode",
                ["encode", "--model", f"$RUN/models/{lang}.model",
                 "--input", f"$RUN/mix/raw/{lang}/{split}.src",
                 "--output", _src_tok(lang, split, False)],
            )
            runner.run(
                "encode",
                ["encode", "--model", f"$RUN/models/{manifest.target}.model",
                 "--input", f"$RUN/mix/raw/{lang}/{split}.trg",
                 "--output", f"$RUN/tok/{split}.{lang}.trg.tok"],
            )

    if manifest.disjoint:
        for lang in manifest.auxiliary:
            for split in ("train", "valid"):
                runner.run(
                    "prefix",
                    ["prefix", "--input", _src_tok(lang, split, False),
                     "--prefix", rules[lang].prefix,
                     "--output", _src_tok(lang, split, True)],
                )

    # Final model-ready mix over the tokenized streams: per-language train
    # files concatenate and reshuffle; validation concatenates in order.
    def tok_rel(lang, split, side):
        if side == "src":
            prefixed = manifest.disjoint and lang in manifest.auxiliary
            return "../" + _src_tok(lang, split, prefixed).removeprefix("$RUN/")
        return f"../tok/{split}.{lang}.trg.tok"

    final_manifest = {
        "components": [
            {"source": tok_rel(lang, "train", "src"), "target": tok_rel(lang, "train", "trg"),
             "take": manifest.train_lines[lang]
             if manifest.train_lines[lang] is not None
             else len(read_lines(runner.resolve(f"$RUN/mix/raw/{lang}/train.src")))}
            for lang in languages
        ],
        "validation": [
            {"source": tok_rel(lang, "valid", "src"), "target": tok_rel(lang, "valid", "trg"),
             "take": manifest.valid_lines[lang]}
            for lang in languages
        ],
        "seed": manifest.seed,
        "sample": "head",
        "dedup": False,
    }
    (out_dir / "mix" / "final.manifest.json").write_text(
        json.dumps(final_manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    runner.run(
        "mix",
        ["mix", "--manifest", "$RUN/mix/final.manifest.json", "--out-dir", "$RUN/mix/final"],
    )

    # Vocabularies: the source-side file comes from the merged training
    # data exactly as shipped to the trainer; per-language and pairwise
    # joint files feed the overlap reports.
    if manifest.reuse_vocab_from is not None:
        src_vocab_dir = Path(manifest.reuse_vocab_from) / "vocab"
        for entry in sorted(src_vocab_dir.iterdir()):
            shutil.copyfile(entry, out_dir / "vocab" / entry.name)
    else:
        runner.run(
            "vocab",
            ["extract-vocab", "--input", "$RUN/mix/final/train.src",
             "--out", "$RUN/vocab/source_side.vocab",
             "--compat-out", "$RUN/vocab/source_side.vocab.yml"],
        )
        for lang in languages:
            prefixed = manifest.disjoint and lang in manifest.auxiliary
            runner.run(
                "vocab",
                ["extract-vocab", "--input", _src_tok(lang, "train", prefixed),
                 "--out", f"$RUN/vocab/{lang}.vocab"],
            )
        for lang in manifest.auxiliary:
            prefixed = manifest.disjoint
            runner.run(
                "vocab",
                ["extract-vocab",
                 "--input", _src_tok(manifest.source, "train", False),
                 "--input", _src_tok(lang, "train", prefixed),
                 "--out", f"$RUN/vocab/joint.{manifest.source}-{lang}.vocab"],
            )
        target_argv = ["extract-vocab"]
        for lang in languages:
            target_argv += ["--input", f"$RUN/tok/train.{lang}.trg.tok"]
        target_argv += ["--out", f"$RUN/vocab/{manifest.target}.vocab",
                        "--compat-out", f"$RUN/vocab/{manifest.target}.vocab.yml"]
        runner.run("vocab", target_argv)

    for lang in manifest.auxiliary:
        runner.run(
            "overlap",
            ["overlap", "--vocab-a", f"$RUN/vocab/{manifest.source}.vocab",
             "--vocab-b", f"$RUN/vocab/{lang}.vocab",
             "--vocab-joint", f"$RUN/vocab/joint.{manifest.source}-{lang}.vocab",
             "--report", f"$RUN/reports/overlap.{manifest.source}-{lang}.json"],
        )

    _write_resolved(manifest, out_dir, runner)
    return out_dir


def _write_resolved(manifest: ExperimentManifest, out_dir: Path, runner: _Runner) -> None:
    try:
        artifacts = {}
        for path in sorted(out_dir.rglob("*")):
            if path.is_file() and path.name != "manifest.resolved.json":
                artifacts[str(path.relative_to(out_dir))] = sha256_file(path)
        resolved = {
            "format": MANIFEST_FORMAT,
            "name": manifest.name,
            "source": manifest.source,
            "auxiliary": manifest.auxiliary,
            "target": manifest.target,
            "disjoint": manifest.disjoint,
            "corpora": {
                lang: {
                    "source": spec.source,
                    "target": spec.target,
                    "domain": spec.domain,
                    "source_sha256": sha256_file(spec.source),
                    "target_sha256": sha256_file(spec.target),
                }
                for lang, spec in sorted(manifest.corpora.items())
                if lang in manifest.languages()
            },
            "vocab_size": manifest.vocab_size,
            "aux_prefixes": manifest.aux_prefixes,
            "byte_fallback": manifest.byte_fallback,
            "normalize": manifest.normalize,
            "tokenizer_lines": manifest.tokenizer_lines,
            "train_lines": manifest.train_lines,
            "valid_lines": manifest.valid_lines,
            "sample": manifest.sample,
            "dedup": manifest.dedup,
            "subset_order": manifest.subset_order,
            "reuse_vocab_from": str(manifest.reuse_vocab_from) if manifest.reuse_vocab_from else None,
            "seed": manifest.seed,
            "vocab_sizes_extracted": {
                entry.stem: read_vocab(entry).size
                for entry in sorted((out_dir / "vocab").glob("*.vocab"))
            },
            "recipe": runner.recipe,
            "artifacts": artifacts,
        }
        (out_dir / "manifest.resolved.json").write_text(
            json.dumps(resolved, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    except VocabLabError as exc:
        raise StageError("report", str(exc), STAGE_EXIT_CODES["report"]) from exc


def comp_size_experiment(manifest: ExperimentManifest, workers: int = 1) -> Path:
    """Complementary-size variant: size the auxiliary tokenizers so the
    disjoint total matches the joint vocabulary, then run disjoint."""
    if not manifest.auxiliary:
        raise StageError(
            "manifest", "complementary sizing needs at least one auxiliary language",
            STAGE_EXIT_CODES["manifest"],
        )
    out_dir = Path(manifest.out_dir)

    if manifest.joint_run is not None:
        joint_dir = Path(manifest.joint_run)
    else:
        joint_ref = replace(
            manifest,
            disjoint=False,
            out_dir=out_dir / "joint_ref",
            name=manifest.name + "-joint-ref",
            joint_run=None,
        )
        joint_dir = run_experiment(joint_ref, workers=workers)

    base_size = read_vocab(joint_dir / "vocab" / f"{manifest.source}.vocab").size
    targets = {}
    for lang in manifest.auxiliary:
        joint_size = read_vocab(
            joint_dir / "vocab" / f"joint.{manifest.source}-{lang}.vocab"
        ).size
        try:
            targets[lang] = complementary_size(joint_size, base_size)
        except ConfigurationError as exc:
            raise StageError("manifest", str(exc), STAGE_EXIT_CODES["manifest"]) from exc

    sized = dict(manifest.vocab_size)
    sized.update(targets)
    disjoint = replace(
        manifest, disjoint=True, vocab_size=sized, out_dir=out_dir, joint_run=None
    )
    run_experiment(disjoint, workers=workers)

    report = {}
    for lang in manifest.auxiliary:
        achieved = read_vocab(out_dir / "vocab" / f"{lang}.vocab").size
        report[lang] = {
            "joint_size": read_vocab(joint_dir / "vocab" / f"joint.{manifest.source}-{lang}.vocab").size,
            "base_size": base_size,
            "retrain_target": targets[lang],
            "achieved_extracted": achieved,
        }
        if achieved > targets[lang]:
            raise StageError(
                "report",
                f"extracted {lang} vocabulary ({achieved}) exceeds the retraining "
                f"target ({targets[lang]})",
                STAGE_EXIT_CODES["report"],
            )
    (out_dir / "reports" / "comp_size.json").write_text(
        json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return out_dir
