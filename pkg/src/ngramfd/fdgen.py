"""Greedy, model-free generation of frequency-descend examples and dataset augmentation."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

from .errors import UndefinedFrequencyError, UsageError
from .freqtable import FrequencyTable, delta_numerators, text_frequency_exact
from .substitutes import SubstituteSource
from .textcore import LabeledExample, Text

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenParams:
    n: int = 1
    max_iter: int = 10
    perturb_rate: float = 0.5
    seed: int | None = None  # reserved for tie shuffling; ties use candidate order

    def __post_init__(self):
        if self.max_iter < 1:
            raise UsageError("max_iter must be >= 1")
        if not 0.0 <= self.perturb_rate <= 1.0:
            raise UsageError("perturb_rate must lie in [0, 1]")

    def budget(self, length: int) -> int:
        # the epsilon keeps e.g. 0.3 * 10 from flooring to 2
        return int(math.floor(self.perturb_rate * length + 1e-9))


@dataclass
class GenResult:
    original: Text
    generated: Text
    iterations_used: int
    phi_trace: list[float]
    substituted_positions: set[int] = field(default_factory=set)

    @property
    def changed(self) -> bool:
        return self.generated != self.original

    def to_json(self) -> dict:
        return {
            "orig": " ".join(self.original),
            "gen": " ".join(self.generated),
            "phi_trace": self.phi_trace,
            "positions": sorted(self.substituted_positions),
        }


def _options(source: SubstituteSource, original: Text, current: list[str], i: int) -> list[str]:
    # identity first so ties keep the current word; the original word stays reachable
    opts = [current[i]]
    for c in (original[i],) + source.lookup(original[i]):
        if c not in opts:
            opts.append(c)
    return opts


def generate_nfd(text: Text, table: FrequencyTable, source: SubstituteSource, params: GenParams) -> GenResult:
    """Lower the text's n-gram frequency by greedy word substitution.

    Each round scans positions left to right and applies the candidate with the
    most negative frequency change against the current text, as long as the
    change is negative and the position budget allows it. Rounds repeat until
    one changes nothing or ``max_iter`` rounds have run.
    """
    if table.n != params.n:
        raise UsageError(f"table order {table.n} does not match params.n={params.n}")
    L = len(text)
    if L < table.n:
        raise UndefinedFrequencyError(f"text of length {L} has no {table.n}-grams")
    budget = params.budget(L)
    current = list(text)
    num, den = text_frequency_exact(table, text)
    trace = [num / den]
    touched: set[int] = set()
    rounds = 0
    for _ in range(params.max_iter):
        rounds += 1
        changed = False
        for i in range(L):
            if i not in touched and len(touched) >= budget:
                continue
            opts = _options(source, text, current, i)
            if len(opts) == 1:
                continue
            deltas, _ = delta_numerators(table, current, i, opts)
            best = min(range(len(opts)), key=deltas.__getitem__)
            if deltas[best] < 0:
                current[i] = opts[best]
                touched.add(i)
                num += deltas[best]
                changed = True
        trace.append(num / den)
        if not changed:
            break
    return GenResult(text, Text(tuple(current)), rounds, trace, touched)


@dataclass
class AugmentStats:
    examples: int = 0
    generated: int = 0
    noop: int = 0
    skipped: int = 0


def augment_dataset(dataset, table: FrequencyTable, source: SubstituteSource, params: GenParams, results: list | None = None):
    """Emit every example followed by one generated copy with the same label.

    No-op generations are emitted as an unchanged copy and counted; texts too
    short for the order get no copy. Returns ``(examples, stats)``.
    """
    out: list[LabeledExample] = []
    stats = AugmentStats()
    for ex in dataset:
        stats.examples += 1
        out.append(ex)
        try:
            res = generate_nfd(ex.text, table, source, params)
        except UndefinedFrequencyError:
            stats.skipped += 1
            continue
        if results is not None:
            results.append(res)
        if not res.changed:
            stats.noop += 1
        stats.generated += 1
        out.append(LabeledExample(res.generated, ex.label))
    if stats.skipped:
        log.warning("%d examples too short for n=%d were not augmented", stats.skipped, table.n)
    return out, stats


def write_traces(results, path, meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if meta is not None:
            fh.write(json.dumps({"_meta": meta}, sort_keys=True) + "\n")
        for res in results:
            fh.write(json.dumps(res.to_json(), ensure_ascii=False) + "\n")
