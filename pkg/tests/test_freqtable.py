import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ngramfd.errors import CompatibilityError, DataError, UndefinedFrequencyError, UsageError
from ngramfd.freqtable import (
    FDClass,
    FrequencyTable,
    Substitution,
    build_table,
    classify_delta,
    delta_frequency,
    delta_numerator,
    extract_ngrams,
    load_table,
    lookup,
    save_table,
    text_frequency,
    text_frequency_exact,
)
from ngramfd.textcore import Text, tokenize

from oracles import phi, recount


def T(s):
    return tokenize(s)


def test_extract_ngrams():
    x = T("the cat sat")
    assert extract_ngrams(x, 2) == [("the", "cat"), ("cat", "sat")]
    assert extract_ngrams(x, 1) == [("the",), ("cat",), ("sat",)]
    assert extract_ngrams(T("the"), 2) == []


def test_c0_counts(c0, t1, t2):
    assert t1.counts == {("the",): 2, ("cat",): 2, ("sat",): 2, ("ran",): 1, ("a",): 1, ("dog",): 1}
    assert t2.counts == {("the", "cat"): 2, ("cat", "sat"): 1, ("cat", "ran"): 1, ("a", "dog"): 1, ("dog", "sat"): 1}
    assert t1.counts == recount(c0, 1) and t2.counts == recount(c0, 2)
    assert t1.total_texts == 3 and t1.total == 9


def test_empty_corpus():
    t = build_table([], 3)
    assert t.counts == {} and lookup(t, ("a", "b", "c")) == 0


def test_short_texts_skipped():
    t = build_table([T("a"), T("a b c")], 2)
    assert t.skipped_texts == 1 and t.total == 2


def test_lookup(t1, t2):
    assert lookup(t1, ("cat",)) == 2
    assert lookup(t2, ("dog", "ran")) == 0
    assert lookup(t2, ("the", "cat")) == 2
    with pytest.raises(UsageError):
        lookup(t2, ("the",))


def test_text_frequency(t1, t2):
    x = T("the cat sat")
    assert text_frequency(t1, x) == 2.0
    assert text_frequency(t2, x) == 1.5
    assert text_frequency_exact(t2, x) == (3, 2)
    assert text_frequency(t2, T("zz yy qq")) == 0.0
    with pytest.raises(UndefinedFrequencyError):
        text_frequency(t2, T("cat"))


def test_delta_frequency(t1, t2):
    x = T("the cat sat")
    assert delta_frequency(t1, x, Substitution(2, "ran")) == pytest.approx(-1 / 3)
    assert delta_numerator(t1, x, Substitution(2, "ran")) == (-1, 3)
    assert delta_frequency(t2, x, Substitution(2, "ran")) == 0.0
    for i in range(3):
        assert delta_frequency(t2, x, Substitution(i, x[i])) == 0.0


@pytest.mark.parametrize("d, cls", [(-0.3333, FDClass.FD), (0.0, FDClass.FC), (0.5, FDClass.FA), (-1, FDClass.FD), (Fraction(0), FDClass.FC)])
def test_classify_delta(d, cls):
    assert classify_delta(d) is cls


def test_classify_tolerance():
    assert classify_delta(1e-12, tolerance=1e-9) is FDClass.FC
    with pytest.raises(UsageError):
        classify_delta(0.0, tolerance=-1)


def test_order_bounds():
    with pytest.raises(UsageError):
        build_table([], 9)
    with pytest.raises(UsageError):
        build_table([], 0)


def _random_corpus(rng, vocab=10, texts=50, max_len=12):
    words = [f"w{i}" for i in range(vocab)]
    return [Text(tuple(rng.choice(words) for _ in range(rng.randint(0, max_len)))) for _ in range(rng.randint(0, texts))]


@pytest.mark.parametrize("seed", range(20))
def test_build_matches_recount(seed):
    rng = random.Random(seed)
    corpus = _random_corpus(rng)
    for n in range(1, 5):
        assert build_table(corpus, n).counts == recount(corpus, n)


def test_large_vocab_falls_back_to_tuples():
    # 3000 ** 6 exceeds the int64 code range
    rng = random.Random(0)
    words = [f"w{i}" for i in range(3000)]
    corpus = [Text(tuple(rng.choice(words) for _ in range(20))) for _ in range(300)]
    assert build_table(corpus, 6).counts == recount(corpus, 6)


tokens = st.sampled_from(["a", "b", "c", "d"])


@settings(max_examples=300)
@given(st.lists(st.lists(tokens, max_size=8), max_size=6), st.lists(tokens, min_size=1, max_size=8), st.integers(1, 4), st.data())
def test_incremental_delta_matches_recompute(corpus, toks, n, data):
    table = build_table([Text(tuple(t)) for t in corpus], n)
    if len(toks) < n:
        return
    x = Text(tuple(toks))
    i = data.draw(st.integers(0, len(toks) - 1))
    s = data.draw(tokens)
    num, den = delta_numerator(table, x, Substitution(i, s))
    exact = phi(table.counts, x.substitute(i, s), n) - phi(table.counts, x, n)
    assert Fraction(num, den) == exact
    assert abs(delta_frequency(table, x, Substitution(i, s)) - float(exact)) <= 1e-9


@given(st.lists(tokens, max_size=10), st.integers(1, 8))
def test_ngram_count_of_text(toks, n):
    assert len(extract_ngrams(toks, n)) == max(0, len(toks) - n + 1)


def test_save_load_round_trip(tmp_path, t1, t2, c0):
    for t in (t1, t2):
        p = tmp_path / f"t{t.n}.freq"
        save_table(t, p)
        back = load_table(p)
        assert back == t
        assert back.counts == build_table(c0, t.n).counts
    lines = (tmp_path / "t2.freq").read_text().splitlines()
    assert lines[0] == "#ngram-freq v1 n=2 tokenizer=simple-v1 texts=3"
    assert lines[1:] == ["a dog\t1", "cat ran\t1", "cat sat\t1", "dog sat\t1", "the cat\t2"]


def test_save_is_deterministic(tmp_path, t2):
    save_table(t2, tmp_path / "a")
    save_table(load_table(tmp_path / "a"), tmp_path / "b")
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_meta_line_preserved(tmp_path, t1):
    save_table(t1, tmp_path / "a", meta='{"tool":"ngramfd"}')
    back = load_table(tmp_path / "a")
    assert back == t1 and back.meta == '{"tool":"ngramfd"}'


def test_truncated_file_reports_offset(tmp_path, t2):
    p = tmp_path / "t.freq"
    save_table(t2, p)
    data = p.read_bytes()
    p.write_bytes(data[:-3])
    with pytest.raises(DataError, match="byte"):
        load_table(p)
    cut = data.index(b"cat ran") + 4
    p.write_bytes(data[:cut] + b"\n")
    with pytest.raises(DataError) as exc:
        load_table(p)
    assert exc.value.offset == data.index(b"cat ran")


def test_compatibility_errors(tmp_path, t1):
    p = tmp_path / "t.freq"
    save_table(t1, p)
    with pytest.raises(CompatibilityError):
        load_table(p, tokenizer="other-v2")
    p.write_text(p.read_text().replace(" v1 ", " v9 "))
    with pytest.raises(CompatibilityError):
        load_table(p)


def test_unsorted_entries_rejected(tmp_path):
    p = tmp_path / "t.freq"
    p.write_text("#ngram-freq v1 n=1 tokenizer=simple-v1 texts=1\nb\t1\na\t1\n")
    with pytest.raises(DataError, match="line 3"):
        load_table(p)


def test_frequency_table_getitem(t1):
    assert t1["cat",] == 2 and t1["zebra",] == 0
    assert isinstance(t1, FrequencyTable)
