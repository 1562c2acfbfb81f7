"""Deterministic assembly of mixed training and validation sets from bitext.

Every component file pair is shuffled once with a seed derived from the
manifest seed, validation lines are carved off the head of that shuffle,
and the training quota is taken from what remains, so validation and
training are disjoint by construction rather than by post-hoc filtering.
The concatenated training set is then shuffled again with the manifest
seed.  The same manifest over the same files always produces byte-identical
outputs, and a resolved copy of the manifest with checksums is written next
to them.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import AlignmentError, ConfigurationError, FormatError, QuotaError
from .textio import read_lines, sha256_file, write_lines

MANIFEST_FORMAT = "vocablab-mix/1"


@dataclass
class Bitext:
    """Aligned source/target line lists for one corpus."""

    source_lines: list[str]
    target_lines: list[str]
    source_lang: str = ""
    target_lang: str = ""
    domain_tag: str = ""

    def __post_init__(self):
        if len(self.source_lines) != len(self.target_lines):
            raise AlignmentError(
                f"ragged bitext: {len(self.source_lines)} source lines vs "
                f"{len(self.target_lines)} target lines"
            )
        for side, lines in (("source", self.source_lines), ("target", self.target_lines)):
            for lineno, line in enumerate(lines, start=1):
                if "\n" in line or "\r" in line:
                    raise FormatError(f"embedded newline in {side} line", line=lineno)

    def __len__(self):
        return len(self.source_lines)

    @classmethod
    def load(cls, source_path, target_path, **tags) -> "Bitext":
        return cls(read_lines(source_path), read_lines(target_path), **tags)


@dataclass(frozen=True)
class MixRequest:
    """One file pair and how many lines to take from it.

    ``source``/``target`` are the paths used for I/O; the ``*_label``
    fields keep the spelling from the manifest so resolved manifests stay
    identical wherever the mix is materialized.
    """

    source: str
    target: str
    take: int
    source_label: str = ""
    target_label: str = ""

    def __post_init__(self):
        if not self.source_label:
            object.__setattr__(self, "source_label", self.source)
        if not self.target_label:
            object.__setattr__(self, "target_label", self.target)

    def pair(self) -> tuple[str, str]:
        return (self.source, self.target)


@dataclass
class MixManifest:
    components: list[MixRequest]
    validation: list[MixRequest] = field(default_factory=list)
    seed: int = 1
    dedup: bool = False
    sample: str = "shuffle"  # shuffle | head

    def __post_init__(self):
        if self.sample not in ("shuffle", "head"):
            raise ConfigurationError(f"unknown sample mode {self.sample!r}")
        for group in (self.components, self.validation):
            seen = set()
            for request in group:
                if request.take < 0:
                    raise ConfigurationError("negative line request")
                if request.pair() in seen:
                    raise ConfigurationError(
                        f"duplicate request for file pair {request.pair()}"
                    )
                seen.add(request.pair())

    @classmethod
    def from_json_dict(cls, data: dict, base_dir=".") -> "MixManifest":
        base_dir = Path(base_dir)

        def requests(items):
            return [
                MixRequest(
                    str(base_dir / item["source"]),
                    str(base_dir / item["target"]),
                    int(item["take"]),
                    source_label=item["source"],
                    target_label=item["target"],
                )
                for item in items
            ]

        return cls(
            components=requests(data.get("components", [])),
            validation=requests(data.get("validation", [])),
            seed=int(data.get("seed", 1)),
            dedup=bool(data.get("dedup", False)),
            sample=data.get("sample", "shuffle"),
        )

    @classmethod
    def load(cls, path) -> "MixManifest":
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        return cls.from_json_dict(data, base_dir=path.parent)


@dataclass
class ParallelDiagnostics:
    source_count: int | None
    target_count: int | None
    issues: list[str]

    @property
    def aligned(self) -> bool:
        return self.source_count == self.target_count

    @property
    def ok(self) -> bool:
        return self.aligned and not self.issues


def check_parallel(source_path, target_path) -> ParallelDiagnostics:
    """Non-fatal validation of a bitext pair: alignment, encoding, empties."""
    issues = []
    counts = {}
    for label, path in (("source", source_path), ("target", target_path)):
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            issues.append(f"{label}: unreadable: {exc}")
            counts[label] = None
            continue
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            issues.append(f"{label}: invalid UTF-8 at byte offset {exc.start}")
            counts[label] = None
            continue
        if text.endswith("\n"):
            text = text[:-1]
        lines = text.split("\n") if text else []
        counts[label] = len(lines)
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                issues.append(f"{label}: empty line {lineno}")
    diag = ParallelDiagnostics(counts["source"], counts["target"], issues)
    if diag.source_count is not None and diag.target_count is not None and not diag.aligned:
        diag.issues.append(
            f"alignment: {diag.source_count} source lines vs {diag.target_count} target lines"
        )
    return diag


def pair_rng(seed: int, pair_index: int) -> random.Random:
    """Seeded generator for one component; string seeding is version-stable."""
    return random.Random(f"{seed}:{pair_index}")


def split_indices(
    n_lines: int, valid_take: int, train_take: int, rng: random.Random, sample: str
) -> tuple[list[int], list[int]]:
    """Validation head plus training candidates over one component."""
    order = list(range(n_lines))
    if sample == "shuffle":
        rng.shuffle(order)
    return order[:valid_take], order[valid_take:]


class _PairPlan:
    def __init__(self, bitext: Bitext, valid_take: int, train_take: int):
        self.bitext = bitext
        self.valid_take = valid_take
        self.train_take = train_take
        self.valid_idx: list[int] = []
        self.candidates: list[int] = []


def mix(manifest: MixManifest, out_dir) -> dict:
    """Build train/valid bitext files per the manifest; returns the
    resolved-manifest dictionary that was written alongside them."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    train_by_pair = {req.pair(): req.take for req in manifest.components}
    valid_by_pair = {req.pair(): req.take for req in manifest.validation}
    ordered_pairs = [req.pair() for req in manifest.components]
    ordered_pairs += [
        req.pair() for req in manifest.validation if req.pair() not in train_by_pair
    ]

    plans: dict[tuple[str, str], _PairPlan] = {}
    for pair_index, pair in enumerate(ordered_pairs):
        bitext = Bitext.load(pair[0], pair[1])
        valid_take = valid_by_pair.get(pair, 0)
        train_take = train_by_pair.get(pair, 0)
        if valid_take + train_take > len(bitext):
            raise QuotaError(
                f"{pair[0]}: requested {valid_take}+{train_take} lines, "
                f"only {len(bitext)} available"
            )
        plan = _PairPlan(bitext, valid_take, train_take)
        plan.valid_idx, plan.candidates = split_indices(
            len(bitext), valid_take, train_take, pair_rng(manifest.seed, pair_index), manifest.sample
        )
        plans[pair] = plan

    valid_sources = set()
    if manifest.dedup:
        for plan in plans.values():
            valid_sources.update(plan.bitext.source_lines[i] for i in plan.valid_idx)

    train_src: list[str] = []
    train_trg: list[str] = []
    for request in manifest.components:
        plan = plans[request.pair()]
        usable = plan.candidates
        if manifest.dedup:
            usable = [
                i for i in usable if plan.bitext.source_lines[i] not in valid_sources
            ]
        if len(usable) < plan.train_take:
            raise QuotaError(
                f"{request.source}: {plan.train_take} training lines requested, "
                f"only {len(usable)} remain after validation split"
            )
        for i in usable[:plan.train_take]:
            train_src.append(plan.bitext.source_lines[i])
            train_trg.append(plan.bitext.target_lines[i])

    order = list(range(len(train_src)))
    random.Random(str(manifest.seed)).shuffle(order)
    train_src = [train_src[i] for i in order]
    train_trg = [train_trg[i] for i in order]

    valid_src: list[str] = []
    valid_trg: list[str] = []
    for request in manifest.validation:
        plan = plans[request.pair()]
        for i in plan.valid_idx:
            valid_src.append(plan.bitext.source_lines[i])
            valid_trg.append(plan.bitext.target_lines[i])

    outputs = {
        "train.src": train_src,
        "train.trg": train_trg,
        "valid.src": valid_src,
        "valid.trg": valid_trg,
    }
    for name, lines in outputs.items():
        write_lines(out_dir / name, lines)

    resolved = {
        "format": MANIFEST_FORMAT,
        "seed": manifest.seed,
        "sample": manifest.sample,
        "dedup": manifest.dedup,
        "components": [
            {
                "source": req.source_label,
                "target": req.target_label,
                "take": req.take,
                "source_sha256": sha256_file(req.source),
                "target_sha256": sha256_file(req.target),
            }
            for req in manifest.components
        ],
        "validation": [
            {"source": req.source_label, "target": req.target_label, "take": req.take}
            for req in manifest.validation
        ],
        "outputs": {
            name: {"lines": len(lines), "sha256": sha256_file(out_dir / name)}
            for name, lines in outputs.items()
        },
    }
    (out_dir / "manifest.resolved.json").write_text(
        json.dumps(resolved, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return resolved
