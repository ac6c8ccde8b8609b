"""Tokenization, the Text carrier, and dataset ingestion."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import ConfigurationError, DataError

DEFAULT_TOKENIZER = "simple-v1"

# letters/digits, with apostrophes and hyphens allowed only between them
_SIMPLE_V1 = re.compile(r"[^\W_]+(?:['\-][^\W_]+)*")


def _simple_v1(raw: str) -> list[str]:
    return _SIMPLE_V1.findall(raw.lower())


TOKENIZERS: dict[str, Callable[[str], list[str]]] = {
    "simple-v1": _simple_v1,
}

FORMATS = ("jsonl", "tsv")


@dataclass(frozen=True)
class Text:
    """An immutable sequence of word tokens.

    ``raw`` is kept for reporting only and does not take part in equality.
    """

    tokens: tuple[str, ...]
    raw: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))
        for tok in self.tokens:
            if not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"invalid token {tok!r}")

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def substitute(self, position: int, replacement: str) -> "Text":
        toks = list(self.tokens)
        toks[position] = replacement
        return Text(tuple(toks))


@dataclass(frozen=True)
class LabeledExample:
    text: Text
    label: int

    def __post_init__(self):
        if isinstance(self.label, bool) or not isinstance(self.label, int) or self.label < 0:
            raise ValueError(f"label must be a non-negative integer, got {self.label!r}")


def get_tokenizer(tokenizer: str = DEFAULT_TOKENIZER) -> Callable[[str], list[str]]:
    try:
        return TOKENIZERS[tokenizer]
    except KeyError:
        raise ConfigurationError(f"unknown tokenizer id {tokenizer!r}") from None


def tokenize(raw: str, tokenizer: str = DEFAULT_TOKENIZER) -> Text:
    """Split ``raw`` into lowercase word tokens.

    ``simple-v1`` lowercases, keeps maximal runs of letters and digits with
    internal apostrophes or hyphens, and drops everything else.

    >>> tokenize("The cat sat.").tokens
    ('the', 'cat', 'sat')
    """
    return Text(tuple(get_tokenizer(tokenizer)(raw)), raw=raw)


def detokenize(text: Text) -> str:
    return " ".join(text.tokens)


def _check_format(fmt: str) -> str:
    if fmt not in FORMATS:
        raise ConfigurationError(f"unknown dataset format {fmt!r} (expected one of {FORMATS})")
    return fmt


def infer_format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".json", ".ndjson"):
        return "jsonl"
    if suffix in (".tsv", ".txt"):
        return "tsv"
    raise ConfigurationError(f"cannot infer dataset format from {str(path)!r}; pass it explicitly")


def is_meta_line(obj) -> bool:
    """Provenance header objects written by the CLI as the first JSONL line."""
    return isinstance(obj, dict) and set(obj) == {"_meta"}


def load_dataset(
    path,
    format: str | None = None,
    tokenizer: str = DEFAULT_TOKENIZER,
    num_classes: int | None = None,
) -> list[LabeledExample]:
    """Read a labeled dataset, failing on the first malformed line."""
    fmt = _check_format(format or infer_format(path))
    tok = get_tokenizer(tokenizer)
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if fmt == "jsonl":
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"invalid JSON: {exc.msg}", path, lineno) from None
                if lineno == 1 and is_meta_line(obj):
                    continue
                if not isinstance(obj, dict) or "label" not in obj or "text" not in obj:
                    raise DataError('expected an object with "label" and "text"', path, lineno)
                label, raw = obj["label"], obj["text"]
            else:
                if not line:
                    continue
                label_s, sep, raw = line.partition("\t")
                if not sep:
                    raise DataError("expected label<TAB>text", path, lineno)
                try:
                    label = int(label_s)
                except ValueError:
                    raise DataError(f"label {label_s!r} is not an integer", path, lineno) from None
            if not isinstance(raw, str):
                raise DataError('"text" must be a string', path, lineno)
            if isinstance(label, bool) or not isinstance(label, int) or label < 0:
                raise DataError(f"label {label!r} is not a non-negative integer", path, lineno)
            if num_classes is not None and label >= num_classes:
                raise DataError(f"label {label} out of range for {num_classes} classes", path, lineno)
            out.append(LabeledExample(Text(tuple(tok(raw)), raw=raw), label))
    return out


def write_dataset(
    examples: Iterable[LabeledExample],
    path,
    format: str | None = None,
    meta: dict | None = None,
) -> None:
    """Write examples so that ``load_dataset`` reproduces them.

    The raw string is written when present, otherwise the detokenized form.
    ``meta`` is only supported for JSONL, as a leading ``{"_meta": ...}`` line.
    """
    fmt = _check_format(format or infer_format(path))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if meta is not None:
            if fmt != "jsonl":
                raise ConfigurationError("metadata headers are only supported for JSONL datasets")
            fh.write(json.dumps({"_meta": meta}, sort_keys=True) + "\n")
        for ex in examples:
            raw = ex.text.raw if ex.text.raw is not None else detokenize(ex.text)
            if fmt == "jsonl":
                fh.write(json.dumps({"label": ex.label, "text": raw}, ensure_ascii=False) + "\n")
            else:
                if "\n" in raw or "\r" in raw:
                    raw = detokenize(ex.text)
                fh.write(f"{ex.label}\t{raw}\n")


def texts_of(examples: Sequence[LabeledExample]) -> list[Text]:
    return [ex.text for ex in examples]
