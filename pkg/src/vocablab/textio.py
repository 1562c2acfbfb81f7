"""Line and token-stream file I/O.

All files are UTF-8 with LF line endings.  Corpus files hold one sentence
per line; token-stream files hold one sentence per line with pieces
separated by single spaces.  Tokens never contain spaces, so the format is
unambiguous; tabs and other control characters inside tokens are escaped
only in vocabulary and model files (see :func:`escape_field`).
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from .errors import FormatError

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def escape_field(text: str) -> str:
    """Escape backslashes and control separators so a token survives
    tab-separated and line-oriented file formats byte-exactly."""
    if not any(ch in text for ch in _ESCAPES):
        return text
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def unescape_field(text: str) -> str:
    if "\\" not in text:
        return text
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\":
            if i + 1 >= n or text[i + 1] not in _UNESCAPES:
                raise FormatError(f"bad escape sequence in field: {text!r}")
            out.append(_UNESCAPES[text[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def read_lines(path) -> list[str]:
    """Read a corpus file into a list of lines without terminators."""
    path = Path(path)
    try:
        data = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: invalid UTF-8 at byte {exc.start}") from exc
    if data.endswith("\n"):
        data = data[:-1]
    return data.split("\n") if data else []


def write_lines(path, lines) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for line in lines:
            handle.write(line)
            handle.write("\n")


def read_token_lines(path) -> list[list[str]]:
    """Read a token-stream file: one space-separated piece list per line."""
    rows = []
    for lineno, line in enumerate(read_lines(path), start=1):
        if not line:
            rows.append([])
            continue
        pieces = line.split(" ")
        if any(piece == "" for piece in pieces):
            raise FormatError("empty piece (double or trailing space)", line=lineno)
        rows.append(pieces)
    return rows


def write_token_lines(path, rows) -> None:
    write_lines(path, (" ".join(row) for row in rows))


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
