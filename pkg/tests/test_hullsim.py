import math
import random

import numpy as np
import pytest

from ngramfd import _kernels
from ngramfd.errors import UsageError
from ngramfd.freqtable import FrequencyTable, Substitution, build_table, delta_numerator
from ngramfd.hullsim import (
    ConvexText,
    FractionalFreqTable,
    HullParams,
    fractional_update,
    hull_delta_1,
    hull_delta_2,
    hull_update,
    init_weights,
    phi_estimate,
    simulate,
    step,
    uniform_weights,
)
from ngramfd.substitutes import lexicon_source
from ngramfd.textcore import Text, tokenize

from oracles import hull_delta2_loops


def ct(cands, weights):
    return ConvexText(tuple(tuple(c) for c in cands), tuple(np.asarray(w, dtype=float) for w in weights))


def frac(counts, n):
    return FractionalFreqTable(n, FrequencyTable(n=n, counts=dict(counts)))


def test_init_weights():
    c = init_weights([("a",), ("b", "c", "d")], 1.0, seed=7)
    assert c.weights[0].tolist() == [1.0]
    assert c.weights[1].sum() == pytest.approx(1.0, abs=1e-9) and (c.weights[1] >= 0).all()
    again = init_weights([("a",), ("b", "c", "d")], 1.0, seed=7)
    assert all((x == y).all() for x, y in zip(c.weights, again.weights))
    with pytest.raises(UsageError):
        init_weights([("a",), ()])


def test_hull_delta_1_examples(t1):
    f = FractionalFreqTable.from_base(t1)
    c = ct([("sat", "ran")], [(0.5, 0.5)])
    assert hull_delta_1(c, 0, f).tolist() == [0.5, -0.5]
    c = ct([("sat", "ran")], [(1.0, 0.0)])
    assert hull_delta_1(c, 0, f)[0] == 0.0


def test_hull_delta_2_examples():
    f = frac({("cat", "sat"): 1, ("cat", "ran"): 1}, 2)
    c = ct([("cat",), ("sat", "ran")], [(1.0,), (0.5, 0.5)])
    assert hull_delta_2(c, 1, f).tolist() == [0.0, 0.0]
    f = frac({("cat", "sat"): 3, ("cat", "ran"): 1}, 2)
    assert hull_delta_2(c, 1, f).tolist() == [1.0, -1.0]


def test_hull_update_example():
    c = ct([("sat", "ran")], [(0.5, 0.5)])
    d = np.array([0.5, -0.5])
    what = c.weights[0] - 10 * d / np.linalg.norm(d)
    assert what == pytest.approx([-6.5711, 7.5711], abs=1e-4)
    assert hull_update(c, 0, d, 10.0).weights[0].tolist() == [0.0, 1.0]
    assert hull_update(c, 0, np.zeros(2), 10.0) is c


def test_equal_frequencies_leave_weights():
    base = FrequencyTable(n=1, counts={("a",): 3, ("b",): 3, ("c",): 3})
    init = ct([("a", "b", "c")], [(0.2, 0.3, 0.5)])
    res = simulate(Text(("a",)), lexicon_source({}), base, HullParams(n=1, steps=3, static_freq=True), init=init)
    assert all(w.tolist() == [0.2, 0.3, 0.5] for c in res.trajectory for w in c.weights)
    assert res.discrete == Text(("c",))
    # uniform weights add equal fractional mass, so equal counts stay equal
    src = lexicon_source({"a": ["b", "c"]})
    res = simulate(Text(("a",)), src, base, HullParams(n=1, steps=3, uniform_init=True))
    assert all(np.allclose(w, 1 / 3) for c in res.trajectory for w in c.weights)
    assert res.discrete == Text(("a",))


def test_dirichlet_draw_kept_under_static_equal_counts():
    base = FrequencyTable(n=1, counts={("a",): 3, ("b",): 3, ("c",): 3})
    src = lexicon_source({"a": ["b", "c"]})
    res = simulate(Text(("a",)), src, base, HullParams(n=1, steps=3, seed=11, static_freq=True))
    w0 = res.trajectory[0].weights[0]
    assert all((c.weights[0] == w0).all() for c in res.trajectory)
    assert res.discrete == Text((("a", "b", "c")[int(np.argmax(w0))],))


def test_simulate_worked_example(t1):
    res = simulate(Text(("sat",)), lexicon_source({"sat": ["ran"]}), t1, HullParams(n=1, steps=1, alpha=10, uniform_init=True))
    assert res.trajectory[-1].weights[0].tolist() == [0.0, 1.0]
    assert res.discrete == Text(("ran",))


def test_simulate_deterministic_and_observed(c0):
    t2 = build_table(c0, 2)
    src = lexicon_source({"the": ["a"], "cat": ["dog", "sat"], "sat": ["ran", "cat"]})
    seen = []
    p = HullParams(n=2, steps=3, seed=5)
    a = simulate(tokenize("the cat sat"), src, t2, p, observer=lambda t, c: seen.append(t))
    b = simulate(tokenize("the cat sat"), src, t2, p)
    assert seen == [0, 1, 2]
    assert len(a.trajectory) == 4
    for x, y in zip(a.trajectory, b.trajectory):
        assert all((u == v).all() for u, v in zip(x.weights, y.weights))
    assert a.phi_trace == b.phi_trace


def test_step_matches_per_position_functions():
    rng = np.random.default_rng(3)
    vocab = [f"w{i}" for i in range(6)]
    for n in (1, 2):
        corpus = [Text(tuple(rng.choice(vocab, size=rng.integers(2, 8)))) for _ in range(15)]
        base = build_table(corpus, n)
        cands = [tuple(rng.choice(vocab, size=rng.integers(1, 5), replace=False)) for _ in range(5)]
        c = init_weights(cands, 1.0, seed=1)
        f_batch = FractionalFreqTable.from_base(base)
        f_single = FractionalFreqTable.from_base(base)
        batch = step(c, f_batch, 10.0)
        fractional_update(f_single, c)
        delta = hull_delta_1 if n == 1 else hull_delta_2
        for i in range(len(c)):
            want = hull_update(c, i, delta(c, i, f_single), 10.0).weights[i]
            assert batch.weights[i] == pytest.approx(want, abs=1e-9)


def _random_config(rng, L, kmax=6):
    vocab = [f"w{i}" for i in range(8)]
    cands = [tuple(rng.sample(vocab, rng.randint(1, kmax))) for _ in range(L)]
    weights = []
    for cs in cands:
        w = [rng.random() for _ in cs]
        if rng.random() < 0.2:
            w = [0.0] * len(cs)
            w[rng.randrange(len(cs))] = 1.0
        s = sum(w)
        weights.append([v / s for v in w])
    return cands, weights, vocab


@pytest.mark.parametrize("seed", range(40))
def test_centering_and_oracle(seed):
    rng = random.Random(seed)
    L = rng.randint(1, 5)
    cands, weights, vocab = _random_config(rng, L)
    c = ct(cands, weights)
    f1 = frac({(w,): rng.randint(0, 9) for w in vocab}, 1)
    f1.counts.update({(w,): rng.random() for w in vocab[:3]})
    f2 = frac({(a, b): rng.randint(0, 9) for a in vocab for b in vocab if rng.random() < 0.5}, 2)
    for i in range(L):
        d1 = hull_delta_1(c, i, f1)
        assert abs(c.weights[i] @ d1) <= 1e-6
        phi = [f1.effective((s,)) for s in cands[i]]
        assert d1 == pytest.approx([p - sum(w * q for w, q in zip(weights[i], phi)) for p in phi], abs=1e-9)
        d2 = hull_delta_2(c, i, f2)
        assert abs(c.weights[i] @ d2) <= 1e-6
        assert d2 == pytest.approx(hull_delta2_loops(cands, weights, i, f2.effective), abs=1e-9)


@pytest.mark.parametrize("seed", range(40))
def test_update_keeps_simplex(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 10))
    c = ct([tuple(f"w{j}" for j in range(k))], [rng.dirichlet(np.ones(k))])
    out = hull_update(c, 0, rng.normal(size=k) * 10 ** rng.uniform(-6, 4), float(rng.uniform(0.01, 50)))
    assert out.weights[0].sum() == pytest.approx(1.0, abs=1e-9)
    assert out.weights[0].min() >= 0


def test_two_candidate_descent():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = float(rng.uniform(0, 1))
        lo, hi = sorted(rng.choice(20, size=2, replace=False))
        c = ct([("lo", "hi")], [(a, 1 - a)])
        f = frac({("lo",): int(lo), ("hi",): int(hi)}, 1)
        d = hull_delta_1(c, 0, f)
        # two candidates always end one-hot; alpha > sqrt(2) makes it the low one
        out = hull_update(c, 0, d, float(rng.uniform(1.5, 20)))
        if a < 1:
            assert out.weights[0][0] > a
        else:
            assert out.weights[0][0] == 1.0


@pytest.mark.parametrize("seed", range(60))
def test_min_frequency_candidate_never_loses_rank(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 8))
    phi = rng.permutation(k).astype(float) * 2 + 1
    jmin = int(np.argmin(phi))
    words = tuple(f"w{j}" for j in range(k))
    c = ct([words], [rng.dirichlet(np.ones(k))])
    f = frac({(w,): p for w, p in zip(words, phi)}, 1)
    d = hull_delta_1(c, 0, f)
    what_gain = -d / np.linalg.norm(d)
    assert what_gain[jmin] == what_gain.max()
    out = hull_update(c, 0, d, float(rng.uniform(0.1, 20))).weights[0]
    before = c.weights[0]
    for j in range(k):
        if before[jmin] >= before[j]:
            assert out[jmin] >= out[j]


def test_fractional_update_example():
    f = FractionalFreqTable(2, FrequencyTable(n=2, counts={}))
    c = ct([("a", "b"), ("c", "d")], [(0.5, 0.5), (0.5, 0.5)])
    fractional_update(f, c)
    assert f.counts == {("a", "c"): 0.25, ("a", "d"): 0.25, ("b", "c"): 0.25, ("b", "d"): 0.25}


def test_fractional_one_hot_matches_counting():
    x = tokenize("the cat sat on the mat")
    for n in (1, 2, 3):
        f = FractionalFreqTable(n, FrequencyTable(n=n, counts={}))
        c = ct([(w, "zz") for w in x], [(1.0, 0.0)] * len(x))
        fractional_update(f, c)
        assert f.counts == {g: float(v) for g, v in build_table([x], n).counts.items()}


@pytest.mark.parametrize("seed", range(20))
def test_fractional_mass(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    L = rng.randint(n, 6)
    cands, weights, _ = _random_config(rng, L, kmax=4)
    # distinct per-position tokens so every n-gram key belongs to one span
    cands = [tuple(f"p{i}_{s}" for s in cs) for i, cs in enumerate(cands)]
    f = FractionalFreqTable(n, FrequencyTable(n=n, counts={}))
    fractional_update(f, ct(cands, weights))
    for s in range(L - n + 1):
        mass = sum(v for g, v in f.counts.items() if g[0].startswith(f"p{s}_"))
        assert mass == pytest.approx(1.0, abs=1e-9)
    assert sum(f.counts.values()) == pytest.approx(L - n + 1, abs=1e-6)


def test_one_hot_matches_discrete_ranking():
    rng = random.Random(0)
    vocab = [f"w{i}" for i in range(10)]
    corpus = [Text(tuple(rng.choice(vocab) for _ in range(rng.randint(1, 8)))) for _ in range(30)]
    table = build_table(corpus, 1)
    f = FractionalFreqTable.from_base(table)
    for _ in range(300):
        x = Text(tuple(rng.choice(vocab) for _ in range(rng.randint(1, 6))))
        i = rng.randrange(len(x))
        cs = (x[i],) + tuple(w for w in vocab if w != x[i])
        c = ct([cs], [[1.0] + [0.0] * (len(cs) - 1)])
        hull = hull_delta_1(c, 0, f)
        disc = [delta_numerator(table, x, Substitution(i, s)) for s in cs]
        assert int(np.argmin(hull)) == min(range(len(cs)), key=lambda j: disc[j][0])
        # unigram denominator is L, so the hull delta is the exact numerator
        assert hull.tolist() == [float(num) for num, _ in disc]


def test_phi_estimate_one_hot_equals_text_frequency(t2):
    x = tokenize("the cat sat")
    c = ct([(w, "zz") for w in x], [(1.0, 0.0)] * 3)
    assert phi_estimate(c, t2) == 1.5


def test_empty_table_flag(t1):
    p = HullParams(n=1, steps=1, uniform_init=True, empty_table=True)
    res = simulate(Text(("sat",)), lexicon_source({"sat": ["ran"]}), t1, p)
    # uniform fractional counts only: all candidates equal, nothing moves
    assert res.trajectory[-1].weights[0].tolist() == [0.5, 0.5]
    assert res.freq.base.counts == {}


def test_params_validation():
    with pytest.raises(UsageError):
        HullParams(n=3)
    with pytest.raises(UsageError):
        HullParams(alpha=0)
    with pytest.raises(UsageError):
        HullParams(steps=0)


def test_uniform_weights():
    c = uniform_weights([("a", "b", "c", "d")])
    assert c.weights[0].tolist() == [0.25] * 4
