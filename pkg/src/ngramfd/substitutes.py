"""Candidate substitute sets from a synonym lexicon or an embedding neighborhood."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, UsageError
from .freqtable import FDClass, FrequencyTable, classify_delta, delta_numerators
from .textcore import Text

DEFAULT_K = 8
HULL_K = 64


@dataclass(frozen=True)
class SubstituteSet:
    position: int
    candidates: tuple[str, ...]

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)


@dataclass(eq=False)
class SubstituteSource:
    """Word -> ordered candidate list, backed by a lexicon or an embedding index.

    Embedding neighbors are computed on first request and cached.
    """

    kind: str
    k: int | None = DEFAULT_K
    lexicon: dict = field(default_factory=dict)
    words: tuple = ()
    vectors: np.ndarray | None = None
    min_sim: float = -1.0
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in ("lexicon", "embedding"):
            raise UsageError(f"unknown source kind {self.kind!r}")
        if self.k is not None and self.k < 1:
            raise UsageError("K must be >= 1")
        if self.kind == "embedding":
            self._index = {w: i for i, w in enumerate(self.words)}
            vecs = np.asarray(self.vectors, dtype=np.float64).reshape(len(self.words), -1)
            norms = np.linalg.norm(vecs, axis=1)
            with np.errstate(invalid="ignore", divide="ignore"):
                self._unit = vecs / norms[:, None]
            # zero vectors have no direction: never neighbors, never queried
            self._unit[norms == 0] = np.nan
            self._order = np.argsort(np.array(self.words, dtype=object), kind="stable")

    def with_k(self, k: int | None) -> "SubstituteSource":
        return SubstituteSource(self.kind, k, self.lexicon, self.words, self.vectors, self.min_sim)

    def lookup(self, word: str) -> tuple[str, ...]:
        """Full candidate list for ``word`` (capped at K), never containing ``word``."""
        if self.kind == "lexicon":
            cands = self.lexicon.get(word, ())
            return cands if self.k is None else cands[: self.k]
        if word not in self._cache:
            self._cache[word] = self._neighbors(word)
        return self._cache[word]

    def _neighbors(self, word: str) -> tuple[str, ...]:
        i = self._index.get(word)
        if i is None or np.isnan(self._unit[i]).any():
            return ()
        sims = self._unit @ self._unit[i]
        sims[i] = np.nan
        # words pre-sorted lexicographically, then a stable sort on -sim
        ordered = self._order[np.argsort(-sims[self._order], kind="stable")]
        keep = ordered[sims[ordered] >= self.min_sim]
        if self.k is not None:
            keep = keep[: self.k]
        return tuple(self.words[j] for j in keep)


def _dedupe(word: str, cands) -> tuple[str, ...]:
    seen = {word}
    out = []
    for c in cands:
        if c and c not in seen:
            seen.add(c)
            out.append(c)
    return tuple(out)


def lexicon_source(mapping: dict, k: int | None = DEFAULT_K) -> SubstituteSource:
    lex = {w: _dedupe(w, cands) for w, cands in mapping.items()}
    return SubstituteSource("lexicon", k, lexicon=lex)


def load_lexicon(path, k: int | None = DEFAULT_K) -> SubstituteSource:
    """Read ``word<TAB>syn1,syn2,...`` lines. Self-references and repeats are dropped."""
    lex: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            word, sep, rest = line.partition("\t")
            if not sep or not word or any(ch.isspace() for ch in word):
                raise DataError("expected word<TAB>comma-separated-synonyms", path, lineno)
            syns = [s.strip() for s in rest.split(",")] if rest.strip() else []
            if any(any(ch.isspace() for ch in s) for s in syns):
                raise DataError("synonyms must be single tokens", path, lineno)
            lex.setdefault(word, []).extend(syns)
    return lexicon_source(lex, k)


def embedding_source(words, vectors, k: int = DEFAULT_K, min_sim: float = -1.0) -> SubstituteSource:
    if k < 1:
        raise UsageError("K must be >= 1")
    if not -1.0 <= min_sim <= 1.0:
        raise UsageError("min_sim must lie in [-1, 1]")
    words = tuple(words)
    if len(set(words)) != len(words):
        raise UsageError("duplicate words in embedding index")
    return SubstituteSource("embedding", k, words=words, vectors=np.asarray(vectors, dtype=np.float64), min_sim=min_sim)


def nearest_neighbor_source(embedding_path, k: int = DEFAULT_K, min_sim: float = -1.0) -> SubstituteSource:
    """Load ``word v1 ... vD`` lines and serve the K most cosine-similar words.

    Neighbors below ``min_sim`` are excluded; ties are broken lexicographically.
    """
    words, rows, dim = [], [], None
    with open(embedding_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            try:
                vec = [float(x) for x in parts[1:]]
            except ValueError:
                raise DataError("non-numeric vector component", embedding_path, lineno) from None
            if dim is None:
                dim = len(vec)
                if dim == 0:
                    raise DataError("vector has no components", embedding_path, lineno)
            elif len(vec) != dim:
                raise DataError(f"dimension {len(vec)} differs from {dim}", embedding_path, lineno)
            if parts[0] in words:
                raise DataError(f"duplicate word {parts[0]!r}", embedding_path, lineno)
            words.append(parts[0])
            rows.append(vec)
    vectors = np.array(rows, dtype=np.float64).reshape(len(rows), dim or 0)
    return embedding_source(words, vectors, k, min_sim)


def candidates(source: SubstituteSource, text: Text, i: int, include_identity: bool = False) -> SubstituteSet:
    if not 0 <= i < len(text):
        raise UsageError(f"position {i} out of range for length {len(text)}")
    word = text[i]
    cands = source.lookup(word)
    if include_identity:
        cands = (word,) + tuple(c for c in cands if c != word)
    return SubstituteSet(i, tuple(cands))


def partition_fd_fa(table: FrequencyTable, text: Text, i: int, subs: SubstituteSet) -> tuple[SubstituteSet, SubstituteSet]:
    """Split candidates into frequency-descend and frequency-ascend halves of equal size.

    Constant-frequency candidates are dropped; the larger half is cut from the tail.
    """
    nums, _ = delta_numerators(table, text, i, subs.candidates)
    fd, fa = [], []
    for cand, num in zip(subs.candidates, nums):
        cls = classify_delta(num)
        if cls is FDClass.FD:
            fd.append(cand)
        elif cls is FDClass.FA:
            fa.append(cand)
    m = min(len(fd), len(fa))
    return SubstituteSet(i, tuple(fd[:m])), SubstituteSet(i, tuple(fa[:m]))
