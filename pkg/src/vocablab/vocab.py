"""Frequency-ordered vocabulary extraction from tokenized corpora.

Only observed tokens are listed, which is why extracted vocabularies come
out smaller than the tokenizer's nominal target size.  ``</s>`` and
``<unk>`` are always present at ids 0 and 1 with count 0 unless the stream
actually contains them.  Passing several corpora sums their counts, which
is exactly how a joint vocabulary is built from merged training data.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .bpe import TokenizedCorpus
from .errors import FormatError, InputError
from .textio import escape_field, unescape_field

SENTENCE_END = "</s>"
UNKNOWN = "<unk>"
SPECIAL_TOKENS = (SENTENCE_END, UNKNOWN)


class VocabEntry(NamedTuple):
    token: str
    id: int
    count: int


# Characters JSON leaves raw but YAML either forbids (DEL, C1) or folds as
# line breaks inside double-quoted scalars (NEL, LS, PS).
_YAML_UNSAFE = re.compile("[\x7f-\x9f  ￾￿]")


def _yaml_quote(token: str) -> str:
    quoted = json.dumps(token, ensure_ascii=False)
    return _YAML_UNSAFE.sub(lambda m: "\\u%04x" % ord(m.group()), quoted)


@dataclass(frozen=True)
class Vocabulary:
    entries: tuple

    @property
    def size(self) -> int:
        return len(self.entries)

    def tokens(self) -> frozenset:
        return frozenset(entry.token for entry in self.entries)

    def count_of(self, token: str) -> int:
        for entry in self.entries:
            if entry.token == token:
                return entry.count
        raise KeyError(token)

    def validate(self) -> "Vocabulary":
        if len(self.entries) < len(SPECIAL_TOKENS):
            raise FormatError("vocabulary lacks the special tokens")
        seen = set()
        for position, entry in enumerate(self.entries):
            if entry.id != position:
                raise FormatError(
                    f"id gap: entry {entry.token!r} has id {entry.id}, expected {position}"
                )
            if entry.token in seen:
                raise FormatError(f"duplicate token {entry.token!r}")
            if entry.count < 0:
                raise FormatError(f"negative count for {entry.token!r}")
            seen.add(entry.token)
        for slot, token in enumerate(SPECIAL_TOKENS):
            if self.entries[slot].token != token:
                raise FormatError(f"entry {slot} must be {token!r}")
        counts = [entry.count for entry in self.entries[len(SPECIAL_TOKENS):]]
        if any(a < b for a, b in zip(counts, counts[1:])):
            raise FormatError("non-special entries are not in descending count order")
        return self


def extract_vocab(*corpora: TokenizedCorpus) -> Vocabulary:
    """Count tokens across one or more tokenized corpora.

    Non-special tokens are ordered by descending count; ties keep their
    first-occurrence order over the concatenated input, so shard merges and
    single-pass extraction agree bit for bit.
    """
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    position = 0
    for corpus in corpora:
        for tokens in corpus.lines:
            for token in tokens:
                if token in counts:
                    counts[token] += 1
                else:
                    counts[token] = 1
                    first_seen[token] = position
                position += 1
    if position == 0:
        raise InputError("no tokens in any input corpus")

    entries = [
        VocabEntry(token, slot, counts.pop(token, 0))
        for slot, token in enumerate(SPECIAL_TOKENS)
    ]
    ordered = sorted(counts, key=lambda tok: (-counts[tok], first_seen[tok]))
    entries.extend(
        VocabEntry(token, len(SPECIAL_TOKENS) + rank, counts[token])
        for rank, token in enumerate(ordered)
    )
    return Vocabulary(entries=tuple(entries))


def write_vocab(vocabulary: Vocabulary, path, format: str = "canonical") -> None:
    """Serialize a vocabulary.

    ``canonical`` writes ``token<TAB>id<TAB>count`` lines with escaped
    separators and round-trips through :func:`read_vocab`.  ``compat``
    writes the marian-style YAML map ``"token": id`` (ids only).
    """
    path = Path(path)
    if format == "canonical":
        lines = [
            f"{escape_field(entry.token)}\t{entry.id}\t{entry.count}"
            for entry in vocabulary.entries
        ]
    elif format == "compat":
        lines = [f"{_yaml_quote(entry.token)}: {entry.id}" for entry in vocabulary.entries]
    else:
        raise ValueError(f"unknown vocabulary format {format!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_vocab(path) -> Vocabulary:
    """Parse a canonical vocabulary file; inverse of :func:`write_vocab`."""
    entries = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        fields = line.split("\t")
        if len(fields) != 3:
            raise FormatError(f"expected 3 tab-separated fields, got {len(fields)}", line=lineno)
        token = unescape_field(fields[0])
        try:
            entry_id, count = int(fields[1]), int(fields[2])
        except ValueError as exc:
            raise FormatError(f"non-integer id or count: {line!r}", line=lineno) from exc
        entries.append(VocabEntry(token, entry_id, count))
    return Vocabulary(entries=tuple(entries)).validate()
