"""Frequency analysis of (original, adversarial) pairs and rank/frequency exports."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, PairRejected, UsageError
from .freqtable import FDClass, FrequencyTable, classify_delta, delta_numerators, text_frequency_exact
from .textcore import DEFAULT_TOKENIZER, Text, is_meta_line, tokenize

log = logging.getLogger(__name__)

# Signed-log bins with an isolated zero bin: (-inf,-100) [-100,-10) [-10,-1)
# [-1,0) {0} (0,1) [1,10) [10,100) [100,inf). "0-"/"0+" mark the open sides
# of the zero bin.
DEFAULT_EDGES = (-math.inf, -100.0, -10.0, -1.0, "0-", "0+", 1.0, 10.0, 100.0, math.inf)


@dataclass(frozen=True)
class AEPair:
    original: Text
    adversarial: Text


@dataclass(frozen=True)
class SubstitutionRecord:
    position: int
    old: str
    new: str
    delta: float
    fd_class: FDClass
    oov: bool


def _check_pair(table: FrequencyTable, pair: AEPair) -> int:
    L = len(pair.original)
    if len(pair.adversarial) != L:
        raise PairRejected(f"length mismatch: {L} vs {len(pair.adversarial)}")
    if L < table.n:
        raise PairRejected(f"text of length {L} is shorter than n={table.n}")
    return L


def classify_pair_exact(table: FrequencyTable, pair: AEPair) -> tuple[FDClass, int, int]:
    """Class plus the exact numerator and denominator of the frequency change."""
    _check_pair(table, pair)
    a, den = text_frequency_exact(table, pair.adversarial)
    o, _ = text_frequency_exact(table, pair.original)
    return classify_delta(a - o), a - o, den


def classify_pair(table: FrequencyTable, pair: AEPair) -> tuple[FDClass, float]:
    cls, num, den = classify_pair_exact(table, pair)
    return cls, num / den


def substitution_breakdown(table: FrequencyTable, pair: AEPair) -> list[SubstitutionRecord]:
    """One record per differing position, each measured against the original text alone."""
    L = _check_pair(table, pair)
    n, counts = table.n, table.counts
    orig, adv = pair.original, pair.adversarial
    out = []
    for i in range(L):
        old, new = orig[i], adv[i]
        if old == new:
            continue
        (num,), den = delta_numerators(table, orig, i, [new])
        lo, hi = max(0, i - n + 1), min(L - n, i)
        toks = list(orig)
        olds = [tuple(toks[s : s + n]) for s in range(lo, hi + 1)]
        toks[i] = new
        news = [tuple(toks[s : s + n]) for s in range(lo, hi + 1)]
        oov = all(counts.get(g, 0) == 0 for g in olds + news)
        out.append(SubstitutionRecord(i, old, new, num / den, classify_delta(num), oov))
    return out


def _histogram(values: Sequence[tuple[float, int]], edges) -> list[int]:
    """Count (delta, exact numerator) values into bins."""
    if tuple(edges) == DEFAULT_EDGES:
        counts = [0] * 9
        for v, num in values:
            if num == 0:
                b = 4
            elif num < 0:
                b = 0 if v < -100 else 1 if v < -10 else 2 if v < -1 else 3
            else:
                b = 5 if v < 1 else 6 if v < 10 else 7 if v < 100 else 8
            counts[b] += 1
        return counts
    e = np.asarray(edges, dtype=np.float64)
    if e.ndim != 1 or len(e) < 2 or np.any(np.diff(e) <= 0):
        raise UsageError("histogram edges must be strictly increasing")
    # half-open [e_k, e_{k+1}); values outside the edges go to the end bins
    idx = np.clip(np.searchsorted(e, [v for v, _ in values], side="right") - 1, 0, len(e) - 2)
    return np.bincount(idx, minlength=len(e) - 1).tolist()


def _edges_json(edges):
    return [e if isinstance(e, str) else ("-inf" if e == -math.inf else "inf" if e == math.inf else e) for e in edges]


@dataclass
class OrderStats:
    n: int
    accepted: int = 0
    rejected: int = 0
    n_fd: int = 0
    n_fc: int = 0
    n_fa: int = 0
    pct_fd: float | None = None
    pct_fc: float | None = None
    pct_fa: float | None = None
    undefined: bool = True
    histogram: dict = field(default_factory=dict)
    substitutions: dict = field(default_factory=dict)
    fc_oov_pct: float | None = None


@dataclass
class AnalysisReport:
    orders: dict[int, OrderStats]
    meta: dict | None = None

    def __getitem__(self, n: int) -> OrderStats:
        return self.orders[n]

    def to_json(self) -> dict:
        out = {"orders": {str(n): asdict(s) for n, s in sorted(self.orders.items())}}
        if self.meta is not None:
            out = {"meta": self.meta, **out}
        return out


def _pct(k, total):
    return round(100.0 * k / total, 6) if total else None


def analyze_pairs(tables: dict[int, FrequencyTable], pairs: Iterable[AEPair], n_list: Sequence[int], edges=DEFAULT_EDGES) -> AnalysisReport:
    pairs = list(pairs)
    orders = {}
    for n in n_list:
        if n not in tables:
            raise UsageError(f"no frequency table supplied for n={n}")
        table = tables[n]
        st = OrderStats(n)
        deltas = []
        sub = {"FD": 0, "FC": 0, "FA": 0, "fc_oov": 0}
        for pair in pairs:
            try:
                cls, num, den = classify_pair_exact(table, pair)
                records = substitution_breakdown(table, pair)
            except PairRejected as exc:
                st.rejected += 1
                log.debug("pair rejected at n=%d: %s", n, exc)
                continue
            st.accepted += 1
            deltas.append((num / den, num))
            if cls is FDClass.FD:
                st.n_fd += 1
            elif cls is FDClass.FC:
                st.n_fc += 1
            else:
                st.n_fa += 1
            for r in records:
                sub[r.fd_class.value] += 1
                if r.fd_class is FDClass.FC and r.oov:
                    sub["fc_oov"] += 1
        if st.rejected:
            log.warning("%d pairs rejected at n=%d", st.rejected, n)
        st.pct_fd, st.pct_fc, st.pct_fa = (_pct(k, st.accepted) for k in (st.n_fd, st.n_fc, st.n_fa))
        st.undefined = st.accepted == 0
        st.histogram = {"edges": _edges_json(edges), "counts": _histogram(deltas, edges)}
        st.substitutions = {"FD": sub["FD"], "FC": sub["FC"], "FA": sub["FA"], "fc_oov": sub["fc_oov"]}
        st.fc_oov_pct = _pct(sub["fc_oov"], sub["FC"])
        orders[n] = st
    return AnalysisReport(orders)


def export_rank_frequency(table: FrequencyTable, normalize_by: int = 1) -> list[tuple[int, float]]:
    """Rank n-grams by descending count (ties lexicographic), counts divided by ``normalize_by``."""
    if normalize_by < 1:
        raise UsageError("normalize_by must be >= 1")
    ranked = sorted(table.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(r, c / normalize_by) for r, (_, c) in enumerate(ranked, 1)]


def write_rank_frequency(rows, path, meta: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if meta is not None:
            fh.write(f"# {meta}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "frequency"])
        for rank, freq in rows:
            w.writerow([rank, repr(float(freq))])


def load_pairs(path, tokenizer: str = DEFAULT_TOKENIZER) -> list[AEPair]:
    """Read ``{"orig": ..., "adv": ...}`` JSONL. Generator traces (``"gen"``) are accepted too."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON: {exc.msg}", path, lineno) from None
            if lineno == 1 and is_meta_line(obj):
                continue
            adv = obj.get("adv", obj.get("gen")) if isinstance(obj, dict) else None
            if not isinstance(adv, str) or not isinstance(obj.get("orig"), str):
                raise DataError('expected {"orig": string, "adv": string}', path, lineno)
            out.append(AEPair(tokenize(obj["orig"], tokenizer), tokenize(adv, tokenizer)))
    return out
