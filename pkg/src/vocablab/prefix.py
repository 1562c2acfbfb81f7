"""Token-level prefixing that forces vocabularies apart.

Applied to an auxiliary language's tokenized corpus, a rule like ``SV_``
turns every token into ``SV_▁token`` / ``SV_token``, so no content token
can coincide with a source-language token downstream.  The transform runs
strictly after tokenization; prefixing raw text would change the pair
statistics the tokenizer was trained on.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bpe import WHITESPACE_MARKER, TokenizedCorpus
from .errors import CollisionError, ConfigurationError, FormatError


@dataclass(frozen=True)
class PrefixRule:
    """A per-language prefix plus tokens exempt from it (none by default)."""

    prefix: str
    exempt: frozenset = frozenset()

    def __post_init__(self):
        if not self.prefix:
            raise ConfigurationError("prefix must be non-empty")
        if any(ch.isspace() for ch in self.prefix):
            raise ConfigurationError(f"prefix {self.prefix!r} contains whitespace")
        if WHITESPACE_MARKER.startswith(self.prefix):
            raise ConfigurationError(
                f"prefix {self.prefix!r} collides with the whitespace marker"
            )
        object.__setattr__(self, "exempt", frozenset(self.exempt))

    @classmethod
    def for_language(cls, language: str, exempt=()) -> "PrefixRule":
        return cls(prefix=language.upper() + "_", exempt=frozenset(exempt))


def apply_prefix(corpus: TokenizedCorpus, rule: PrefixRule) -> TokenizedCorpus:
    """Prefix every non-exempt token; line and token counts are unchanged."""
    out = []
    for lineno, tokens in enumerate(corpus.lines, start=1):
        row = []
        for token in tokens:
            if token in rule.exempt:
                row.append(token)
            elif token.startswith(rule.prefix):
                raise CollisionError(
                    f"token {token!r} already starts with prefix {rule.prefix!r}",
                    line=lineno,
                )
            else:
                row.append(rule.prefix + token)
        out.append(row)
    return TokenizedCorpus(language=corpus.language, lines=out)


def strip_prefix(corpus: TokenizedCorpus, rule: PrefixRule) -> TokenizedCorpus:
    """Invert :func:`apply_prefix`; every non-exempt token must carry the prefix."""
    out = []
    for lineno, tokens in enumerate(corpus.lines, start=1):
        row = []
        for token in tokens:
            if token in rule.exempt:
                row.append(token)
            elif not token.startswith(rule.prefix):
                raise FormatError(
                    f"token {token!r} does not start with prefix {rule.prefix!r}",
                    line=lineno,
                )
            else:
                stripped = token[len(rule.prefix):]
                if not stripped:
                    raise FormatError(
                        f"token {token!r} is nothing but the prefix", line=lineno
                    )
                row.append(stripped)
        out.append(row)
    return TokenizedCorpus(language=corpus.language, lines=out)
