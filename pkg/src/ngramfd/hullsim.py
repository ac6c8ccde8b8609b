"""Frequency-driven convex-hull weight dynamics.

Every position of a text holds a convex weight vector over its candidate words
(candidate 0 is the original word). Each step accumulates the current weights
as fractional n-gram occurrences, computes the mean-centered frequency change
of every candidate, and moves the weights against it. The model-gradient part
of hull training is left to an observer callback.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import UsageError
from .freqtable import FrequencyTable
from .substitutes import HULL_K, SubstituteSource, candidates
from .textcore import Text


@dataclass(frozen=True)
class ConvexText:
    candidates: tuple[tuple[str, ...], ...]
    weights: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.candidates) != len(self.weights):
            raise UsageError("one weight vector per position is required")
        for i, (c, w) in enumerate(zip(self.candidates, self.weights)):
            if len(c) != len(w):
                raise UsageError(f"position {i}: {len(c)} candidates but {len(w)} weights")

    def __len__(self):
        return len(self.candidates)

    def with_weights(self, i: int, w) -> "ConvexText":
        ws = list(self.weights)
        ws[i] = np.asarray(w, dtype=np.float64)
        return ConvexText(self.candidates, tuple(ws))

    def padded(self) -> tuple[np.ndarray, np.ndarray]:
        sizes = np.array([len(c) for c in self.candidates], dtype=np.int64)
        W = np.zeros((len(sizes), int(sizes.max(initial=1))))
        for i, w in enumerate(self.weights):
            W[i, : len(w)] = w
        return W, sizes

    @classmethod
    def from_padded(cls, cands, W, sizes) -> "ConvexText":
        return cls(tuple(cands), tuple(W[i, : sizes[i]].copy() for i in range(len(sizes))))

    def argmax_text(self) -> Text:
        # np.argmax returns the first maximum, i.e. the lowest candidate index
        return Text(tuple(c[int(np.argmax(w))] for c, w in zip(self.candidates, self.weights)))


@dataclass(eq=False)
class FractionalFreqTable:
    """Integer training counts plus accumulated fractional occurrences.

    Mutable; owned by one simulation.
    """

    n: int
    base: FrequencyTable
    counts: dict = field(default_factory=dict)

    def effective(self, g) -> float:
        g = tuple(g)
        return self.base.counts.get(g, 0) + self.counts.get(g, 0.0)

    @classmethod
    def from_base(cls, base: FrequencyTable, empty: bool = False) -> "FractionalFreqTable":
        if empty:
            base = FrequencyTable(n=base.n, counts={}, tokenizer=base.tokenizer)
        return cls(base.n, base)


@dataclass(frozen=True)
class HullParams:
    n: int = 1
    steps: int = 3
    alpha: float = 10.0
    dirichlet_alpha: float = 1.0
    k: int = HULL_K
    seed: int = 0
    uniform_init: bool = False
    empty_table: bool = False
    static_freq: bool = False  # skip fractional accumulation; deltas use training counts only

    def __post_init__(self):
        if self.n not in (1, 2):
            raise UsageError("hull simulation supports n in {1, 2}")
        if self.steps < 1:
            raise UsageError("steps must be >= 1")
        if self.alpha <= 0:
            raise UsageError("alpha must be > 0")
        if self.dirichlet_alpha <= 0:
            raise UsageError("dirichlet concentration must be > 0")


def init_weights(candidate_sets: Sequence[Sequence[str]], dirichlet_alpha: float = 1.0, seed: int = 0) -> ConvexText:
    """Draw each position's weights from a symmetric Dirichlet.

    Draws come from ``numpy.random.default_rng(seed)`` (PCG64) as per-component
    Gamma variates normalized to sum 1, positions in order. Single-candidate
    positions get weight 1 and consume no draws.
    """
    rng = np.random.default_rng(seed)
    cands, ws = [], []
    for i, cs in enumerate(candidate_sets):
        cs = tuple(cs)
        if not cs:
            raise UsageError(f"position {i} has no candidates")
        if len(cs) == 1:
            w = np.ones(1)
        else:
            g = rng.gamma(dirichlet_alpha, 1.0, size=len(cs))
            s = g.sum()
            w = g / s if s > 0 else np.full(len(cs), 1.0 / len(cs))
        cands.append(cs)
        ws.append(w)
    return ConvexText(tuple(cands), tuple(ws))


def uniform_weights(candidate_sets: Sequence[Sequence[str]]) -> ConvexText:
    cands = tuple(tuple(cs) for cs in candidate_sets)
    if any(not cs for cs in cands):
        raise UsageError("every position needs at least one candidate")
    return ConvexText(cands, tuple(np.full(len(cs), 1.0 / len(cs)) for cs in cands))


def _snap(d: np.ndarray, scale: float) -> np.ndarray:
    # rounding residue of an all-equal centering must not become a direction
    d[np.abs(d) <= 1e-12 * scale] = 0.0
    return d


def hull_delta_1(ctext: ConvexText, i: int, freq: FractionalFreqTable) -> np.ndarray:
    """Unigram change of each candidate: its count minus the weighted mean count."""
    if freq.n != 1:
        raise UsageError("hull_delta_1 needs a unigram table")
    phi = np.array([freq.effective((s,)) for s in ctext.candidates[i]])
    d = phi - ctext.weights[i] @ phi
    return _snap(d, 1.0 + np.abs(phi).max())


def _pair_counts(freq, left: Sequence[str], right: Sequence[str]) -> np.ndarray:
    return np.array([[freq.effective((a, b)) for b in right] for a in left]).reshape(len(left), len(right))


def hull_delta_2(ctext: ConvexText, i: int, freq: FractionalFreqTable) -> np.ndarray:
    """Bigram change of each candidate at ``i``, through its left and right bigrams.

    Each bigram count is centered on its weighted mean over the candidates at
    ``i`` and averaged over the neighbor's weights. Boundary positions use the
    side that exists.
    """
    if freq.n != 2:
        raise UsageError("hull_delta_2 needs a bigram table")
    w = ctext.weights[i]
    d = np.zeros(len(w))
    scale = 1.0
    if i > 0:
        P = _pair_counts(freq, ctext.candidates[i - 1], ctext.candidates[i])  # [m, j]
        Bl = P - (P @ w)[:, None]
        d += ctext.weights[i - 1] @ Bl
        scale = max(scale, 1.0 + np.abs(P).max())
    if i < len(ctext) - 1:
        P = _pair_counts(freq, ctext.candidates[i], ctext.candidates[i + 1])  # [j, k]
        Br = P - (w @ P)[None, :]
        d += Br @ ctext.weights[i + 1]
        scale = max(scale, 1.0 + np.abs(P).max())
    return _snap(d, scale)


def hull_update(ctext: ConvexText, i: int, deltas, alpha: float) -> ConvexText:
    """Step position ``i`` against the l2-normalized deltas, then re-project.

    The projection shifts by the minimum and rescales to sum 1, so the smallest
    weight becomes exactly 0. Zero deltas leave the weights untouched.
    """
    d = np.asarray(deltas, dtype=np.float64)
    w = ctext.weights[i]
    if d.shape != w.shape:
        raise UsageError("deltas must match the candidate count")
    nrm = np.sqrt(d @ d)
    if nrm == 0.0:
        return ctext
    what = w - alpha * d / nrm
    shifted = what - what.min()
    total = shifted.sum()
    new = shifted / total if total > 0 else np.full(len(w), 1.0 / len(w))
    return ctext.with_weights(i, new)


def fractional_update(freq: FractionalFreqTable, ctext: ConvexText) -> FractionalFreqTable:
    """Add the soft occurrence of every n-gram the convex text can realize.

    For each span of ``n`` positions and each choice of one candidate per
    position, the product of the chosen weights is added to that n-gram's
    fractional count. Updates ``freq`` in place and returns it.
    """
    n = freq.n
    L = len(ctext)
    if L < n:
        raise UsageError(f"text of length {L} is shorter than n={n}")
    counts = freq.counts
    for s in range(L - n + 1):
        mass = ctext.weights[s]
        for k in range(1, n):
            mass = np.multiply.outer(mass, ctext.weights[s + k])
        spans = ctext.candidates[s : s + n]
        for idx in zip(*np.nonzero(mass)):
            g = tuple(spans[k][j] for k, j in enumerate(idx))
            counts[g] = counts.get(g, 0.0) + float(mass[idx])
    return freq


def phi_estimate(ctext: ConvexText, table: FrequencyTable) -> float:
    """Expected training-table text frequency of a text sampled from the weights."""
    n, L = table.n, len(ctext)
    if L < n:
        raise UsageError(f"text of length {L} is shorter than n={n}")
    total = 0.0
    for s in range(L - n + 1):
        spans = ctext.candidates[s : s + n]
        for choice in itertools.product(*(range(len(c)) for c in spans)):
            c = table.counts.get(tuple(spans[k][j] for k, j in enumerate(choice)), 0)
            if c:
                total += c * float(np.prod([ctext.weights[s + k][j] for k, j in enumerate(choice)]))
    return total / (L - n + 1)


def _effective_matrices(ctext: ConvexText, freq: FractionalFreqTable, sizes: np.ndarray):
    L, K = len(ctext), int(sizes.max(initial=1))
    if freq.n == 1:
        F = np.zeros((L, K))
        for i, cs in enumerate(ctext.candidates):
            F[i, : len(cs)] = [freq.effective((s,)) for s in cs]
        return F
    P = np.zeros((max(L - 1, 0), K, K))
    for i in range(L - 1):
        left, right = ctext.candidates[i], ctext.candidates[i + 1]
        P[i, : len(left), : len(right)] = _pair_counts(freq, left, right)
    return P


def step(ctext: ConvexText, freq: FractionalFreqTable, alpha: float, accumulate: bool = True) -> ConvexText:
    """One frequency step over all positions: accumulate, measure, update."""
    if accumulate:
        fractional_update(freq, ctext)
    W, sizes = ctext.padded()
    M = _effective_matrices(ctext, freq, sizes)
    D = _kernels.hull_delta1(W, M, sizes) if freq.n == 1 else _kernels.hull_delta2(W, M, sizes)
    return ConvexText.from_padded(ctext.candidates, _kernels.hull_update(W, D, sizes, alpha), sizes)


@dataclass
class SimResult:
    trajectory: list[ConvexText]
    phi_trace: list[float]
    discrete: Text
    freq: FractionalFreqTable

    def records(self, text_index: int | None = None) -> list[dict]:
        out = []
        for t, (ct, phi) in enumerate(zip(self.trajectory, self.phi_trace)):
            rec = {"step": t, "weights": [w.tolist() for w in ct.weights], "phi_estimate": phi}
            if text_index is not None:
                rec = {"text": text_index, **rec}
            out.append(rec)
        return out


def simulate(
    text: Text,
    source: SubstituteSource,
    base_table: FrequencyTable,
    params: HullParams,
    observer: Callable[[int, ConvexText], None] | None = None,
    freq: FractionalFreqTable | None = None,
    init: ConvexText | None = None,
) -> SimResult:
    """Run ``params.steps`` frequency steps on one text.

    ``observer(t, ctext)`` is called with the weights of each step before they
    are updated; a trainer would compute its loss there. Pass ``freq`` to keep
    accumulating fractional counts across texts, and ``init`` to start from
    given weights instead of a Dirichlet (or uniform) draw.
    """
    if base_table.n != params.n:
        raise UsageError(f"table order {base_table.n} does not match params.n={params.n}")
    if len(text) < params.n:
        raise UsageError(f"text of length {len(text)} is shorter than n={params.n}")
    if freq is None:
        freq = FractionalFreqTable.from_base(base_table, empty=params.empty_table)
    elif freq.n != params.n:
        raise UsageError("fractional table order does not match params.n")
    if init is None:
        src = source.with_k(params.k)
        sets = [candidates(src, text, i, include_identity=True).candidates for i in range(len(text))]
        init = uniform_weights(sets) if params.uniform_init else init_weights(sets, params.dirichlet_alpha, params.seed)
    ctext = init
    traj = [ctext]
    phis = [phi_estimate(ctext, base_table)]
    for t in range(params.steps):
        if observer is not None:
            observer(t, ctext)
        ctext = step(ctext, freq, params.alpha, accumulate=not params.static_freq)
        traj.append(ctext)
        phis.append(phi_estimate(ctext, base_table))
    return SimResult(traj, phis, ctext.argmax_text(), freq)


def write_trajectories(results: Sequence[SimResult], path, meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if meta is not None:
            fh.write(json.dumps({"_meta": meta}, sort_keys=True) + "\n")
        for k, res in enumerate(results):
            for rec in res.records(k):
                fh.write(json.dumps(rec) + "\n")
