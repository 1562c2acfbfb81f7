"""Mining sentence pairs where one system beats another by a ChrF margin.

Given aligned source, reference, and two hypothesis files, every line is
scored with sentence-level ChrF and lines whose score difference reaches
the threshold come back as records carrying both hypotheses verbatim, for
qualitative inspection.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AlignmentError, FormatError
from .metrics import ChrfParams, sentence_chrf
from .textio import escape_field, unescape_field

_TABLE_COLUMNS = ("index", "delta", "chrf_a", "chrf_b", "source", "reference", "hyp_a", "hyp_b")


@dataclass(frozen=True)
class DivergenceRecord:
    index: int
    source: str
    reference: str
    hyp_a: str
    hyp_b: str
    chrf_a: float
    chrf_b: float

    @property
    def delta(self) -> float:
        return self.chrf_a - self.chrf_b


def mine_divergence(
    source,
    reference,
    hyp_a,
    hyp_b,
    threshold: float = 50.0,
    *,
    symmetric: bool = False,
    chrf_params: ChrfParams = ChrfParams(),
) -> list[DivergenceRecord]:
    """Return records with ChrF difference at or above the threshold.

    ``symmetric`` keeps lines where either system wins by the margin;
    otherwise only system-a wins count.  Records are sorted by descending
    difference, ties by ascending line index.
    """
    streams = [list(source), list(reference), list(hyp_a), list(hyp_b)]
    lengths = {len(stream) for stream in streams}
    if len(lengths) > 1:
        raise AlignmentError(
            "input files differ in line count: "
            f"source={len(streams[0])}, reference={len(streams[1])}, "
            f"hyp_a={len(streams[2])}, hyp_b={len(streams[3])}"
        )
    records = []
    for index, (src, ref, a, b) in enumerate(zip(*streams)):
        score_a = sentence_chrf(a, ref, chrf_params)
        score_b = sentence_chrf(b, ref, chrf_params)
        delta = score_a - score_b
        if delta >= threshold or (symmetric and -delta >= threshold):
            records.append(
                DivergenceRecord(
                    index=index,
                    source=src,
                    reference=ref,
                    hyp_a=a,
                    hyp_b=b,
                    chrf_a=score_a,
                    chrf_b=score_b,
                )
            )
    records.sort(key=lambda record: (-record.delta, record.index))
    return records


def render_examples(records, limit: int | None = None, precision: int = 6) -> str:
    """Render records as a tab-separated text table, highest delta first."""
    rows = [list(_TABLE_COLUMNS)]
    shown = records if limit is None else records[:limit]
    for record in shown:
        rows.append(
            [
                str(record.index),
                f"{record.delta:.{precision}f}",
                f"{record.chrf_a:.{precision}f}",
                f"{record.chrf_b:.{precision}f}",
                escape_field(record.source),
                escape_field(record.reference),
                escape_field(record.hyp_a),
                escape_field(record.hyp_b),
            ]
        )
    return "\n".join("\t".join(row) for row in rows) + "\n"


def parse_examples(text: str) -> list[DivergenceRecord]:
    """Parse a table produced by :func:`render_examples`."""
    lines = text.splitlines()
    if not lines or tuple(lines[0].split("\t")) != _TABLE_COLUMNS:
        raise FormatError("missing or malformed header row")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(_TABLE_COLUMNS):
            raise FormatError(
                f"expected {len(_TABLE_COLUMNS)} columns, got {len(fields)}", line=lineno
            )
        records.append(
            DivergenceRecord(
                index=int(fields[0]),
                chrf_a=float(fields[2]),
                chrf_b=float(fields[3]),
                source=unescape_field(fields[4]),
                reference=unescape_field(fields[5]),
                hyp_a=unescape_field(fields[6]),
                hyp_b=unescape_field(fields[7]),
            )
        )
    return records
