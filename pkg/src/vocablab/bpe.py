"""Subword tokenization: greedy pair-merge training, encoding, decoding.

Words carry a leading ``▁`` (U+2581) marker standing for the space that
precedes them, so every word-initial piece renders as ``▁word`` and
detokenization is a pure string operation.  Characters outside the piece
inventory degrade to raw UTF-8 byte pieces (``<0xNN>``) when byte fallback
is enabled, which makes encode→decode lossless for arbitrary UTF-8 input;
without fallback they degrade to the unknown piece.

Training is greedy: the most frequent adjacent pair is merged until the
piece inventory reaches the target size or no pair occurs at least twice.
Ties are broken by the lexicographically smallest concatenated piece so
training is reproducible across platforms.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError, DecodingError, FormatError, InputError
from .textio import escape_field, unescape_field

WHITESPACE_MARKER = "▁"
SENTENCE_END_PIECE = "</s>"
UNKNOWN_PIECE = "<unk>"
DEFAULT_SPECIALS = (SENTENCE_END_PIECE, UNKNOWN_PIECE)
BYTE_PIECES = tuple("<0x%02X>" % value for value in range(256))
MODEL_FORMAT = "vocablab-bpe/1"

# Pathological unbroken words are chunked so pair counting stays bounded.
MAX_WORD_SYMBOLS = 4096

_BYTE_VALUES = {piece: value for value, piece in enumerate(BYTE_PIECES)}
_RESERVED_PIECES = frozenset(BYTE_PIECES) | set(DEFAULT_SPECIALS)


@dataclass
class BpeModel:
    """A trained subword model: ordered merges plus the piece inventory."""

    merges: list[tuple[str, str]]
    pieces: dict[str, int]
    specials: tuple[str, ...]
    byte_fallback: bool
    target_vocab_size: int
    normalize: bool = False
    whitespace_marker: str = WHITESPACE_MARKER
    # Pair frequency recorded when each merge was selected.  Populated by
    # train_bpe only; not serialized.
    merge_counts: list[int] | None = field(default=None, compare=False)

    def __post_init__(self):
        self._ranks = {pair: rank for rank, pair in enumerate(self.merges)}
        self._word_cache: dict[tuple[str, ...], list[str]] = {}

    @property
    def byte_pieces(self) -> tuple[str, ...]:
        return BYTE_PIECES if self.byte_fallback else ()

    @property
    def unknown_piece(self) -> str:
        return UNKNOWN_PIECE

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_word_cache"] = {}
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._word_cache = {}

    def save(self, path) -> None:
        """Write the model as reviewable line-oriented UTF-8 text."""
        lines = [
            MODEL_FORMAT,
            f"target_vocab_size\t{self.target_vocab_size}",
            f"byte_fallback\t{int(self.byte_fallback)}",
            f"normalize\t{int(self.normalize)}",
            f"marker\t{self.whitespace_marker}",
            "specials\t" + "\t".join(escape_field(s) for s in self.specials),
            f"merges\t{len(self.merges)}",
        ]
        for rank, (left, right) in enumerate(self.merges):
            lines.append(f"{rank}\t{escape_field(left)}\t{escape_field(right)}")
        lines.append(f"pieces\t{len(self.pieces)}")
        for piece, piece_id in sorted(self.pieces.items(), key=lambda kv: kv[1]):
            lines.append(f"{escape_field(piece)}\t{piece_id}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "BpeModel":
        raw = Path(path).read_text(encoding="utf-8").split("\n")
        if raw and raw[-1] == "":
            raw.pop()
        if not raw or raw[0] != MODEL_FORMAT:
            raise FormatError(f"{path}: not a {MODEL_FORMAT} file")

        def take(index, key, parts=2):
            if index >= len(raw):
                raise FormatError(f"{path}: truncated model file", line=index + 1)
            fields = raw[index].split("\t")
            if fields[0] != key or (parts and len(fields) != parts):
                raise FormatError(f"{path}: expected {key!r}", line=index + 1)
            return fields

        target = int(take(1, "target_vocab_size")[1])
        fallback = bool(int(take(2, "byte_fallback")[1]))
        normalize = bool(int(take(3, "normalize")[1]))
        marker = take(4, "marker")[1]
        specials = tuple(unescape_field(f) for f in take(5, "specials", parts=0)[1:])
        n_merges = int(take(6, "merges")[1])
        merges = []
        for offset in range(n_merges):
            lineno = 7 + offset
            fields = raw[lineno].split("\t")
            if len(fields) != 3 or int(fields[0]) != offset:
                raise FormatError(f"{path}: bad merge line", line=lineno + 1)
            merges.append((unescape_field(fields[1]), unescape_field(fields[2])))
        header = 7 + n_merges
        n_pieces = int(take(header, "pieces")[1])
        pieces = {}
        for offset in range(n_pieces):
            lineno = header + 1 + offset
            fields = raw[lineno].split("\t")
            if len(fields) != 2:
                raise FormatError(f"{path}: bad piece line", line=lineno + 1)
            piece = unescape_field(fields[0])
            if piece in pieces:
                raise FormatError(f"{path}: duplicate piece {piece!r}", line=lineno + 1)
            pieces[piece] = int(fields[1])
        return cls(
            merges=merges,
            pieces=pieces,
            specials=specials,
            byte_fallback=fallback,
            target_vocab_size=target,
            normalize=normalize,
            whitespace_marker=marker,
        )


@dataclass
class TokenizedCorpus:
    """Token sequences for a corpus, one per input line, with a language tag."""

    language: str
    lines: list[list[str]]

    def __len__(self):
        return len(self.lines)


def _line_to_words(line: str, byte_fallback: bool) -> list[tuple[str, ...]]:
    """Split a line into marker-prefixed word symbol tuples.

    Every space owns a marker, so consecutive, leading, and trailing spaces
    survive detokenization.  A literal U+2581 in the text would be
    indistinguishable from the word-boundary marker, so it is lowered to its
    byte pieces (or the unknown piece) right here and never becomes a
    tokenizable character.
    """
    if not line:
        return []
    words = []
    for segment in line.split(" "):
        symbols = [WHITESPACE_MARKER]
        for ch in segment:
            if ch == WHITESPACE_MARKER:
                if byte_fallback:
                    symbols.extend(BYTE_PIECES[b] for b in ch.encode("utf-8"))
                else:
                    symbols.append(UNKNOWN_PIECE)
            else:
                symbols.append(ch)
        for start in range(0, len(symbols), MAX_WORD_SYMBOLS):
            words.append(tuple(symbols[start:start + MAX_WORD_SYMBOLS]))
    return words


def _apply_merge(symbols: list[str], left: str, right: str, joined: str) -> list[str]:
    """Merge all left-to-right non-overlapping occurrences of (left, right)."""
    out = []
    i = 0
    n = len(symbols)
    while i < n:
        if i + 1 < n and symbols[i] == left and symbols[i + 1] == right:
            out.append(joined)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def _adjacent_pairs(symbols) -> Counter:
    return Counter(zip(symbols, symbols[1:]))


def train_bpe(
    corpus,
    target_vocab_size: int,
    byte_fallback: bool,
    *,
    normalize: bool = False,
    specials: tuple[str, ...] = DEFAULT_SPECIALS,
) -> BpeModel:
    """Train a subword model by greedy highest-frequency pair merging.

    The inventory is assembled as specials, then the 256 byte pieces when
    byte fallback is on, then every distinct corpus character (coverage is
    always 1.0), then merge results until ``target_vocab_size`` pieces exist
    or no adjacent pair occurs at least twice.  If the characters alone
    overflow the target they are kept in frequency order and truncated; the
    rest of the text is reachable through byte fallback.
    """
    corpus = list(corpus)
    if not corpus:
        raise InputError("cannot train on an empty corpus")
    if normalize:
        corpus = [unicodedata.normalize("NFKC", line) for line in corpus]

    mandatory = len(specials) + (256 if byte_fallback else 0)
    if target_vocab_size < mandatory + 1:
        raise ConfigurationError(
            f"target vocab size {target_vocab_size} cannot hold "
            f"{mandatory} mandatory pieces plus at least one text piece"
        )

    word_freqs = Counter()
    for line in corpus:
        word_freqs.update(_line_to_words(line, byte_fallback))

    reserved = frozenset(specials) | _RESERVED_PIECES
    char_freqs = Counter()
    for word, freq in word_freqs.items():
        for symbol in word:
            if len(symbol) == 1:
                char_freqs[symbol] += freq

    piece_list = list(specials)
    if byte_fallback:
        piece_list.extend(BYTE_PIECES)
    chars = sorted(char_freqs, key=lambda ch: (-char_freqs[ch], ch))
    room = target_vocab_size - len(piece_list)
    piece_list.extend(chars[:room])
    piece_set = set(piece_list)

    merges: list[tuple[str, str]] = []
    merge_counts: list[int] = []

    def mergeable(symbol):
        # Byte pieces, specials, and the unknown sentinel never merge.
        return symbol in piece_set and symbol not in reserved

    if len(chars) <= room:
        # Mutable unique-word table with incremental pair bookkeeping.
        words = [list(word) for word in word_freqs]
        freqs = list(word_freqs.values())
        flags = [[mergeable(sym) for sym in word] for word in words]
        pair_counts: Counter = Counter()
        pair_sites: dict[tuple[str, str], set[int]] = {}
        for index, word in enumerate(words):
            for pos, pair in enumerate(zip(word, word[1:])):
                if flags[index][pos] and flags[index][pos + 1]:
                    pair_counts[pair] += freqs[index]
                    pair_sites.setdefault(pair, set()).add(index)

        while len(piece_set) < target_vocab_size and pair_counts:
            best = None
            best_key = None
            for pair, count in pair_counts.items():
                if count < 2:
                    continue
                joined = pair[0] + pair[1]
                if joined in reserved:
                    continue
                key = (-count, joined, pair)
                if best_key is None or key < best_key:
                    best, best_key = pair, key
            if best is None:
                break
            left, right = best
            joined = left + right
            merges.append(best)
            merge_counts.append(pair_counts[best])
            if joined not in piece_set:
                piece_set.add(joined)
                piece_list.append(joined)

            for index in sorted(pair_sites.get(best, ())):
                old = words[index]
                freq = freqs[index]
                for pos, pair in enumerate(zip(old, old[1:])):
                    if flags[index][pos] and flags[index][pos + 1]:
                        pair_counts[pair] -= freq
                        if pair_counts[pair] <= 0:
                            del pair_counts[pair]
                        sites = pair_sites.get(pair)
                        if sites is not None:
                            sites.discard(index)
                            if not sites:
                                del pair_sites[pair]
                new = _apply_merge(old, left, right, joined)
                words[index] = new
                flags[index] = [mergeable(sym) for sym in new]
                for pos, pair in enumerate(zip(new, new[1:])):
                    if flags[index][pos] and flags[index][pos + 1]:
                        pair_counts[pair] += freq
                        pair_sites.setdefault(pair, set()).add(index)

    pieces = {piece: piece_id for piece_id, piece in enumerate(piece_list)}
    return BpeModel(
        merges=merges,
        pieces=pieces,
        specials=tuple(specials),
        byte_fallback=byte_fallback,
        target_vocab_size=target_vocab_size,
        normalize=normalize,
        merge_counts=merge_counts,
    )


def _merge_word(model: BpeModel, word: tuple[str, ...]) -> list[str]:
    """Apply the model's merges to one word, lowest rank first."""
    ranks = model._ranks
    symbols = list(word)
    while len(symbols) > 1:
        best_rank = None
        best = None
        for pair in zip(symbols, symbols[1:]):
            rank = ranks.get(pair)
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank = rank
                best = pair
        if best is None:
            break
        symbols = _apply_merge(symbols, best[0], best[1], best[0] + best[1])
    return symbols


def _emit_symbol(model: BpeModel, symbol: str) -> list[str]:
    if symbol in model.pieces:
        return [symbol]
    if model.byte_fallback:
        # The marker means "space"; if it fell out of the inventory it must
        # come back as a space byte, not as the bytes of U+2581.
        raw = " " if symbol == model.whitespace_marker else symbol
        return [BYTE_PIECES[b] for b in raw.encode("utf-8")]
    return [model.unknown_piece]


def _encode_word(model: BpeModel, word: tuple[str, ...]) -> list[str]:
    cached = model._word_cache.get(word)
    if cached is None:
        cached = []
        for symbol in _merge_word(model, word):
            cached.extend(_emit_symbol(model, symbol))
        model._word_cache[word] = cached
    return cached


def encode(model: BpeModel, line: str) -> list[str]:
    """Tokenize one line deterministically; total over UTF-8 input."""
    if model.normalize:
        line = unicodedata.normalize("NFKC", line)
    tokens: list[str] = []
    for word in _line_to_words(line, model.byte_fallback):
        tokens.extend(_encode_word(model, word))
    return tokens


def decode(model: BpeModel, tokens) -> str:
    """Invert :func:`encode`: markers back to spaces, byte pieces to bytes,
    one leading dummy space stripped.  Sentence-end pieces are dropped; the
    unknown piece is kept verbatim since its content is unrecoverable."""
    buf = bytearray()
    for token in tokens:
        if model.byte_fallback and token in _BYTE_VALUES:
            buf.append(_BYTE_VALUES[token])
        elif token == SENTENCE_END_PIECE and token in model.pieces:
            continue
        elif token in model.pieces:
            buf += token.replace(model.whitespace_marker, " ").encode("utf-8")
        else:
            raise DecodingError(f"token not in piece inventory: {token!r}")
    text = buf.decode("utf-8", errors="replace")
    return text[1:] if text.startswith(" ") else text


def _encode_chunk(args):
    model, lines = args
    return [encode(model, line) for line in lines]


def encode_corpus(model: BpeModel, lines, language: str, workers: int = 1) -> TokenizedCorpus:
    """Encode many lines; output line count equals input line count.

    With ``workers > 1`` the lines are sharded over processes and stitched
    back in order, so the result is identical to the serial run.
    """
    lines = list(lines)
    if workers > 1 and len(lines) > workers:
        step = -(-len(lines) // (workers * 4))
        chunks = [lines[i:i + step] for i in range(0, len(lines), step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_encode_chunk, [(model, chunk) for chunk in chunks])
        encoded = [row for part in parts for row in part]
    else:
        encoded = [encode(model, line) for line in lines]
    return TokenizedCorpus(language=language, lines=encoded)
