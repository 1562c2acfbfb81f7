"""Vocabulary overlap arithmetic: pairwise, three-way, and complementary sizing.

The pairwise overlap O of two vocabularies is their token-string
intersection, and with a joint vocabulary extracted from the merged data
the inclusion-exclusion identity |joint| = |A| + |B| - |O| must hold
exactly; a mismatch means the pipeline that produced the files is
inconsistent.  All operations also accept plain sizes so published numbers
can be checked without the underlying files.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .errors import ConfigurationError, ConsistencyError
from .vocab import Vocabulary


def _size_of(value) -> int:
    return value.size if isinstance(value, Vocabulary) else int(value)


def format_pct(value: float) -> str:
    """Render a percentage: one decimal, half-up; three decimals below 0.01."""
    places = "0.001" if 0 < value < 0.01 else "0.1"
    return str(Decimal(repr(value)).quantize(Decimal(places), rounding=ROUND_HALF_UP))


def format_share(value: float) -> str:
    """Render a share as an integer percentage, half-up."""
    return str(int(Decimal(repr(value)).quantize(Decimal("1"), rounding=ROUND_HALF_UP)))


@dataclass(frozen=True)
class OverlapReport:
    size_a: int
    size_b: int
    size_joint: int
    overlap_tokens: frozenset | None
    overlap_count: int
    overlap_pct: float
    token_length_histogram: dict | None

    def to_json_dict(self) -> dict:
        return {
            "size_a": self.size_a,
            "size_b": self.size_b,
            "size_joint": self.size_joint,
            "overlap_count": self.overlap_count,
            "overlap_pct": self.overlap_pct,
            "overlap_pct_display": format_pct(self.overlap_pct),
            "overlap_tokens": sorted(self.overlap_tokens)
            if self.overlap_tokens is not None
            else None,
            "token_length_histogram": self.token_length_histogram,
        }


@dataclass(frozen=True)
class TripleOverlapReport:
    o_ab: frozenset | None
    o_ac: frozenset | None
    oo: frozenset | None
    count_ab: int
    count_ac: int
    count_oo: int
    unique_ab: int
    unique_ac: int
    share_ab: float
    share_ac: float

    def to_json_dict(self) -> dict:
        return {
            "o_ab": sorted(self.o_ab) if self.o_ab is not None else None,
            "o_ac": sorted(self.o_ac) if self.o_ac is not None else None,
            "oo": sorted(self.oo) if self.oo is not None else None,
            "count_ab": self.count_ab,
            "count_ac": self.count_ac,
            "count_oo": self.count_oo,
            "unique_ab": self.unique_ab,
            "unique_ac": self.unique_ac,
            "share_ab": self.share_ab,
            "share_ac": self.share_ac,
            "share_ab_display": format_share(self.share_ab),
            "share_ac_display": format_share(self.share_ac),
        }


def compute_overlap(a, b, joint=None) -> OverlapReport:
    """Overlap of two vocabularies, optionally checked against a joint one.

    ``a``, ``b``, and ``joint`` are vocabularies or plain entry counts.
    With real vocabularies the overlap is the token intersection and any
    supplied joint size is asserted against inclusion-exclusion; with plain
    sizes the joint is required and the overlap count follows from the
    identity.  The percentage denominator is the joint size (or the union
    size when no joint is given).
    """
    size_a, size_b = _size_of(a), _size_of(b)
    have_sets = isinstance(a, Vocabulary) and isinstance(b, Vocabulary)

    if have_sets:
        tokens = a.tokens() & b.tokens()
        count = len(tokens)
        histogram = dict(sorted(Counter(len(token) for token in tokens).items()))
    else:
        if joint is None:
            raise ConfigurationError(
                "a joint vocabulary or size is required when only sizes are given"
            )
        tokens = None
        histogram = None
        count = size_a + size_b - _size_of(joint)
        if count < 0:
            raise ConsistencyError(
                f"negative overlap from sizes: {size_a} + {size_b} - {_size_of(joint)}"
            )

    if joint is not None:
        size_joint = _size_of(joint)
        if have_sets and size_a + size_b - size_joint != count:
            raise ConsistencyError(
                "inclusion-exclusion violated: "
                f"|A|={size_a}, |B|={size_b}, |joint|={size_joint}, |O|={count}; "
                f"expected |O| = {size_a + size_b - size_joint}"
            )
    else:
        size_joint = size_a + size_b - count

    pct = 100.0 * count / size_joint if size_joint else 0.0
    return OverlapReport(
        size_a=size_a,
        size_b=size_b,
        size_joint=size_joint,
        overlap_tokens=frozenset(tokens) if tokens is not None else None,
        overlap_count=count,
        overlap_pct=pct,
        token_length_histogram=histogram,
    )


def compute_triple_overlap(base: Vocabulary, aux1: Vocabulary, aux2: Vocabulary) -> TripleOverlapReport:
    """Overlap-of-overlaps of two auxiliary vocabularies against a base."""
    o_ab = base.tokens() & aux1.tokens()
    o_ac = base.tokens() & aux2.tokens()
    oo = o_ab & o_ac
    return _triple_report(o_ab, o_ac, oo, len(o_ab), len(o_ac), len(oo))


def triple_overlap_from_counts(count_ab: int, count_ac: int, count_oo: int) -> TripleOverlapReport:
    """Overlap-of-overlaps arithmetic from published counts alone."""
    if count_oo > min(count_ab, count_ac) or min(count_ab, count_ac, count_oo) < 0:
        raise ConsistencyError(
            f"impossible counts: |oo|={count_oo} against |o_ab|={count_ab}, |o_ac|={count_ac}"
        )
    return _triple_report(None, None, None, count_ab, count_ac, count_oo)


def _triple_report(o_ab, o_ac, oo, count_ab, count_ac, count_oo) -> TripleOverlapReport:
    return TripleOverlapReport(
        o_ab=frozenset(o_ab) if o_ab is not None else None,
        o_ac=frozenset(o_ac) if o_ac is not None else None,
        oo=frozenset(oo) if oo is not None else None,
        count_ab=count_ab,
        count_ac=count_ac,
        count_oo=count_oo,
        unique_ab=count_ab - count_oo,
        unique_ac=count_ac - count_oo,
        share_ab=100.0 * count_oo / count_ab if count_ab else 0.0,
        share_ac=100.0 * count_oo / count_ac if count_ac else 0.0,
    )


def complementary_size(joint, base) -> int:
    """Tokenizer retraining target that equalizes total vocabulary size."""
    joint_size, base_size = _size_of(joint), _size_of(base)
    if joint_size <= base_size:
        raise ConfigurationError(
            f"joint size {joint_size} must exceed base size {base_size}"
        )
    return joint_size - base_size
