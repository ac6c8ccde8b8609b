"""Exact n-gram frequency tables and the text-frequency quantities built on them.

For a text of ``L`` tokens and a table of order ``n`` the text frequency is the
mean training count over its ``L - n + 1`` n-grams. All counting is exact; the
float values are derived from an integer numerator over that denominator so
that the descend/constant/ascend trichotomy never depends on rounding.
"""

from __future__ import annotations

import enum
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import CompatibilityError, DataError, UndefinedFrequencyError, UsageError
from .textcore import DEFAULT_TOKENIZER, Text

log = logging.getLogger(__name__)

MAX_ORDER = 8
FORMAT_VERSION = "v1"
_MAGIC = "#ngram-freq"

NGram = tuple  # tuple[str, ...] of length n


class FDClass(str, enum.Enum):
    FD = "FD"
    FC = "FC"
    FA = "FA"


@dataclass(frozen=True)
class Substitution:
    position: int
    replacement: str


@dataclass(frozen=True, eq=False)
class FrequencyTable:
    """Occurrence counts of every n-gram of one order in a corpus.

    Absent n-grams have count 0. Treat ``counts`` as read-only.
    """

    n: int
    counts: dict
    total_texts: int = 0
    tokenizer: str = DEFAULT_TOKENIZER
    skipped_texts: int = 0
    meta: str | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 1 <= self.n <= MAX_ORDER:
            raise UsageError(f"order n must be in 1..{MAX_ORDER}, got {self.n}")

    def __eq__(self, other):
        if not isinstance(other, FrequencyTable):
            return NotImplemented
        return (
            self.n == other.n
            and self.total_texts == other.total_texts
            and self.tokenizer == other.tokenizer
            and self.counts == other.counts
        )

    __hash__ = None

    def __len__(self):
        return len(self.counts)

    def __getitem__(self, g) -> int:
        return self.counts.get(tuple(g), 0)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def extract_ngrams(text: Text | Sequence[str], n: int) -> list[NGram]:
    toks = tuple(text)
    if n < 1:
        raise UsageError(f"order n must be >= 1, got {n}")
    return [toks[i : i + n] for i in range(len(toks) - n + 1)]


def _count_codes(texts: list[tuple[str, ...]], n: int) -> dict:
    vocab = sorted({tok for toks in texts for tok in toks})
    index = {tok: i for i, tok in enumerate(vocab)}
    base = len(vocab)
    lengths = np.fromiter((len(t) for t in texts), dtype=np.int64, count=len(texts))
    offsets = np.zeros(len(texts) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    ids = np.fromiter((index[tok] for toks in texts for tok in toks), dtype=np.int64, count=int(offsets[-1]))
    codes = _kernels.window_codes(ids, offsets, n, base)
    uniq, cnt = np.unique(codes, return_counts=True)
    counts = {}
    for code, c in zip(uniq.tolist(), cnt.tolist()):
        g = []
        for _ in range(n):
            code, r = divmod(code, base)
            g.append(vocab[r])
        counts[tuple(reversed(g))] = c
    return counts


def build_table(corpus: Iterable[Text], n: int, tokenizer: str = DEFAULT_TOKENIZER) -> FrequencyTable:
    """Count every n-gram occurrence across ``corpus``.

    Texts shorter than ``n`` contribute nothing and are tallied in
    ``skipped_texts``.
    """
    if not 1 <= n <= MAX_ORDER:
        raise UsageError(f"order n must be in 1..{MAX_ORDER}, got {n}")
    texts = [tuple(t) for t in corpus]
    skipped = sum(1 for t in texts if len(t) < n)
    if skipped:
        log.warning("%d of %d texts are shorter than n=%d and were skipped", skipped, len(texts), n)
    vocab_size = len({tok for t in texts for tok in t})
    if vocab_size and vocab_size**n < 2**62:
        counts = _count_codes(texts, n)
    else:
        counts = Counter(g for t in texts for g in extract_ngrams(t, n))
    return FrequencyTable(n=n, counts=dict(counts), total_texts=len(texts), tokenizer=tokenizer, skipped_texts=skipped)


def lookup(table: FrequencyTable, g) -> int:
    g = tuple(g)
    if len(g) != table.n:
        raise UsageError(f"n-gram {g!r} has length {len(g)}, table order is {table.n}")
    return table.counts.get(g, 0)


def _require_len(table: FrequencyTable, text) -> int:
    L = len(text)
    if L < table.n:
        raise UndefinedFrequencyError(f"text of length {L} has no {table.n}-grams")
    return L


def text_frequency_exact(table: FrequencyTable, text: Text) -> tuple[int, int]:
    """Return ``(numerator, denominator)`` of the text frequency."""
    L = _require_len(table, text)
    n, counts, toks = table.n, table.counts, tuple(text)
    num = sum(counts.get(toks[i : i + n], 0) for i in range(L - n + 1))
    return num, L - n + 1


def text_frequency(table: FrequencyTable, text: Text) -> float:
    num, den = text_frequency_exact(table, text)
    return num / den


def _window_sum(counts, toks, n, lo, hi):
    return sum(counts.get(toks[s : s + n], 0) for s in range(lo, hi + 1))


def delta_numerators(table: FrequencyTable, text: Text, position: int, replacements: Sequence[str]) -> tuple[list[int], int]:
    """Exact frequency-change numerators of several replacements at one position.

    Only the n-grams overlapping ``position`` are looked up. The shared
    denominator ``L - n + 1`` is returned alongside.
    """
    L = _require_len(table, text)
    if not 0 <= position < L:
        raise UsageError(f"position {position} out of range for length {L}")
    n, counts = table.n, table.counts
    toks = list(text)
    lo, hi = max(0, position - n + 1), min(L - n, position)
    before = _window_sum(counts, tuple(toks), n, lo, hi)
    out = []
    for s in replacements:
        toks[position] = s
        out.append(_window_sum(counts, tuple(toks), n, lo, hi) - before)
    return out, L - n + 1


def delta_numerator(table: FrequencyTable, text: Text, sub: Substitution) -> tuple[int, int]:
    (num,), den = delta_numerators(table, text, sub.position, [sub.replacement])
    return num, den


def delta_frequency(table: FrequencyTable, text: Text, sub: Substitution) -> float:
    """Change in text frequency caused by one substitution."""
    num, den = delta_numerator(table, text, sub)
    return num / den


def classify_delta(delta, tolerance: float = 0.0) -> FDClass:
    """Sign rule. Pass an exact numerator (int or Fraction) to decide FC exactly."""
    if tolerance < 0:
        raise UsageError("tolerance must be non-negative")
    if delta < -tolerance:
        return FDClass.FD
    if delta > tolerance:
        return FDClass.FA
    return FDClass.FC


# -- persistence ------------------------------------------------------------


def save_table(table: FrequencyTable, path, meta: str | None = None) -> None:
    meta = meta if meta is not None else table.meta
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{_MAGIC} {FORMAT_VERSION} n={table.n} tokenizer={table.tokenizer} texts={table.total_texts}\n")
        if meta is not None:
            fh.write(f"#meta {meta}\n")
        for g in sorted(table.counts):
            fh.write(f"{' '.join(g)}\t{table.counts[g]}\n")


def _parse_header(line: str, path):
    parts = line.split()
    if len(parts) != 5 or parts[0] != _MAGIC:
        raise DataError("missing '#ngram-freq' header", path, line=1, offset=0)
    if parts[1] != FORMAT_VERSION:
        raise CompatibilityError(f"unsupported table version {parts[1]!r}", path, line=1, offset=0)
    fields = {}
    for item in parts[2:]:
        key, sep, val = item.partition("=")
        if not sep:
            raise DataError(f"bad header field {item!r}", path, line=1, offset=0)
        fields[key] = val
    try:
        return int(fields["n"]), fields["tokenizer"], int(fields["texts"])
    except (KeyError, ValueError):
        raise DataError("header needs n=<int> tokenizer=<id> texts=<int>", path, line=1, offset=0) from None


def read_header(path) -> tuple[int, str, int]:
    with open(path, encoding="utf-8") as fh:
        return _parse_header(fh.readline().rstrip("\n"), path)


def load_table(path, tokenizer: str | None = None) -> FrequencyTable:
    """Read a table written by ``save_table``.

    Raises ``CompatibilityError`` on a version mismatch or when ``tokenizer`` is
    given and differs from the stored id, and ``DataError`` (with byte offset)
    on any malformed or truncated entry.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if not data:
        raise DataError("empty file", path, offset=0)
    if not data.endswith(b"\n"):
        raise DataError("truncated file (no final newline)", path, offset=data.rfind(b"\n") + 1)
    lines = data.split(b"\n")[:-1]
    n, tok_id, texts = _parse_header(lines[0].decode("utf-8"), path)
    if tokenizer is not None and tok_id != tokenizer:
        raise CompatibilityError(f"table tokenizer {tok_id!r} does not match {tokenizer!r}", path, line=1, offset=0)
    counts = {}
    meta = None
    offset = len(lines[0]) + 1
    prev = None
    for lineno, raw in enumerate(lines[1:], 2):
        here = offset
        offset += len(raw) + 1
        line = raw.decode("utf-8")
        if line.startswith("#meta "):
            meta = line[len("#meta ") :]
            continue
        key, sep, cnt = line.rpartition("\t")
        g = tuple(key.split(" "))
        if not sep or len(g) != n or not all(g) or not (cnt.isascii() and cnt.isdigit()) or int(cnt) < 1:
            raise DataError(f"malformed entry {line!r}", path, line=lineno, offset=here)
        if prev is not None and g <= prev:
            raise DataError("entries are not strictly sorted", path, line=lineno, offset=here)
        counts[g] = int(cnt)
        prev = g
    return FrequencyTable(n=n, counts=counts, total_texts=texts, tokenizer=tok_id, meta=meta)
