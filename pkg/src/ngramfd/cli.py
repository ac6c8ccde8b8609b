"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analysis import analyze_pairs, export_rank_frequency, load_pairs, write_rank_frequency
from .errors import ConfigurationError, DataError, PairRejected, UndefinedFrequencyError, UsageError
from .fdgen import GenParams, augment_dataset, generate_nfd, write_traces
from .freqtable import FrequencyTable, build_table, load_table, read_header, save_table
from .hullsim import HullParams, simulate, write_trajectories
from .substitutes import DEFAULT_K, HULL_K, candidates, load_lexicon, nearest_neighbor_source, partition_fd_fa
from .textcore import DEFAULT_TOKENIZER, LabeledExample, load_dataset, texts_of, write_dataset

log = logging.getLogger("ngramfd")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _int_list(s: str) -> list[int]:
    try:
        vals = [int(x) for x in s.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _meta(args) -> dict:
    flags = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k != "func"}
    return {"tool": "ngramfd", "version": __version__, "flags": flags}


def _meta_line(args) -> str:
    return json.dumps(_meta(args), sort_keys=True, separators=(",", ":"))


def _write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _source(args, k_default: int):
    k = args.k if args.k is not None else k_default
    if args.subs is not None and args.emb is not None:
        raise UsageError("give either --subs or --emb, not both")
    if args.subs is not None:
        return load_lexicon(args.subs, k=k)
    if args.emb is not None:
        return nearest_neighbor_source(args.emb, k=k, min_sim=args.min_sim)
    raise UsageError("a substitute source is required: --subs <lexicon> or --emb <vectors>")


def _table(path, args) -> FrequencyTable:
    return load_table(path, tokenizer=args.tokenizer)


# -- subcommands --------------------------------------------------------------


def cmd_build_freq(args) -> int:
    data = load_dataset(args.corpus, args.format, args.tokenizer)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = _meta_line(args)
    for n in args.n:
        table = build_table(texts_of(data), n, args.tokenizer)
        save_table(table, out / f"ngram-{n}.freq", meta=meta)
        print(f"n={n}: {len(table)} distinct n-grams, {table.total} occurrences, {table.skipped_texts} texts skipped")
    return 0


def _report(tables, pairs, n_list, args) -> int:
    report = analyze_pairs(tables, pairs, n_list)
    report.meta = _meta(args)
    _write_json(report.to_json(), args.out)
    for n in n_list:
        st = report[n]
        if st.undefined:
            print(f"n={n}: no accepted pairs ({st.rejected} rejected)")
        else:
            print(f"n={n}: FD {st.pct_fd:.2f}%  FC {st.pct_fc:.2f}%  FA {st.pct_fa:.2f}%  ({st.accepted} pairs)")
    return 0


def cmd_classify(args) -> int:
    table = _table(args.freq, args)
    return _report({table.n: table}, load_pairs(args.pairs, args.tokenizer), [table.n], args)


def cmd_analyze(args) -> int:
    found = {}
    for path in sorted(Path(args.freq_dir).iterdir()):
        if path.is_file() and path.suffix == ".freq":
            n, _, _ = read_header(path)
            if n in args.n and n not in found:
                found[n] = path
    missing = [n for n in args.n if n not in found]
    if missing:
        raise DataError(f"no table for n={missing}", args.freq_dir)
    tables = {n: _table(p, args) for n, p in found.items()}
    return _report(tables, load_pairs(args.pairs, args.tokenizer), args.n, args)


def _gen_params(args) -> GenParams:
    return GenParams(n=args.n, max_iter=args.max_iter, perturb_rate=args.perturb_rate, seed=args.seed)


def cmd_generate(args) -> int:
    table = _table(args.freq, args)
    source = _source(args, DEFAULT_K)
    params = _gen_params(args)
    results, skipped = [], 0
    for ex in load_dataset(args.input, "jsonl", args.tokenizer):
        try:
            results.append(generate_nfd(ex.text, table, source, params))
        except UndefinedFrequencyError:
            skipped += 1
    write_traces(results, args.out, meta=_meta(args))
    changed = sum(r.changed for r in results)
    print(f"generated {len(results)} examples ({changed} changed, {skipped} too short)")
    return 0


def cmd_augment(args) -> int:
    table = _table(args.freq, args)
    source = _source(args, DEFAULT_K)
    data = load_dataset(args.input, "jsonl", args.tokenizer)
    out, stats = augment_dataset(data, table, source, _gen_params(args))
    write_dataset(out, args.out, "jsonl", meta=_meta(args))
    print(f"{stats.examples} in, {len(out)} out ({stats.noop} no-op, {stats.skipped} too short)")
    return 0


def cmd_hull_sim(args) -> int:
    table = _table(args.freq, args)
    source = _source(args, HULL_K)
    params = HullParams(
        n=args.n,
        steps=args.steps,
        alpha=args.alpha,
        dirichlet_alpha=args.dirichlet,
        k=source.k,
        seed=args.seed,
        uniform_init=args.uniform_init,
        empty_table=args.empty_table,
        static_freq=args.static_freq,
    )
    if table.n != params.n:
        raise DataError(f"table order {table.n} does not match --n {params.n}", args.freq)
    data = load_dataset(args.input, "jsonl", args.tokenizer)
    results, discrete, freq = [], [], None
    for k, ex in enumerate(data):
        if len(ex.text) < params.n:
            log.warning("example %d shorter than n=%d skipped", k, params.n)
            continue
        # one running fractional table across the whole input, seeds offset per text
        p = replace(params, seed=params.seed + k)
        res = simulate(ex.text, source, table, p, freq=freq)
        freq = res.freq
        results.append(res)
        discrete.append(LabeledExample(res.discrete, ex.label))
    write_trajectories(results, args.out, meta=_meta(args))
    if args.discrete_out:
        write_dataset(discrete, args.discrete_out, "jsonl", meta=_meta(args))
    print(f"simulated {len(results)} texts for {params.steps} steps")
    return 0


def cmd_partition(args) -> int:
    table = _table(args.freq, args)
    if table.n != args.n:
        raise DataError(f"table order {table.n} does not match --n {args.n}", args.freq)
    source = _source(args, DEFAULT_K)
    rows = []
    n_fd = 0
    for k, ex in enumerate(load_dataset(args.input, "jsonl", args.tokenizer)):
        if len(ex.text) < table.n:
            continue
        for i in range(len(ex.text)):
            cset = candidates(source, ex.text, i)
            if not len(cset):
                continue
            fd, fa = partition_fd_fa(table, ex.text, i, cset)
            n_fd += len(fd)
            rows.append({"example": k, "position": i, "word": ex.text[i], "fd": list(fd), "fa": list(fa)})
    _write_json({"meta": _meta(args), "positions": rows, "pair_size_total": n_fd}, args.out)
    print(f"partitioned {len(rows)} positions, {n_fd} FD/FA candidate pairs")
    return 0


def cmd_rank_freq(args) -> int:
    table = _table(args.freq, args)
    write_rank_frequency(export_rank_frequency(table, args.normalize), args.out, meta=_meta_line(args))
    return 0


def _add_subs(p, k_default):
    p.add_argument("--subs", help="synonym lexicon TSV (word<TAB>syn1,syn2)")
    p.add_argument("--emb", help="word vector file (word v1 ... vD)")
    p.add_argument("--k", type=int, default=None, help=f"max candidates per word (default {k_default})")
    p.add_argument("--min-sim", type=float, default=-1.0, help="cosine threshold for --emb")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ngramfd", description="n-gram frequency tools for word-level adversarial examples")
    parser.add_argument("--version", action="version", version=f"ngramfd {__version__}")
    parser.add_argument("--tokenizer", default=DEFAULT_TOKENIZER)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("build-freq", help="count n-grams of a labeled corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["jsonl", "tsv"], default=None)
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_freq)

    p = sub.add_parser("classify", help="FD/FC/FA report for AE pairs against one table")
    p.add_argument("--freq", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("analyze", help="FD/FC/FA report over several orders")
    p.add_argument("--freq-dir", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    for name, func, help_ in (
        ("generate", cmd_generate, "greedy frequency-descend generation (JSONL traces)"),
        ("augment", cmd_augment, "original plus one generated example per input"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--freq", required=True)
        _add_subs(p, DEFAULT_K)
        p.add_argument("--input", required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--max-iter", type=int, default=10)
        p.add_argument("--perturb-rate", type=float, default=0.5)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("hull-sim", help="frequency-driven convex hull weight simulation")
    p.add_argument("--freq", required=True)
    _add_subs(p, HULL_K)
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=int, choices=[1, 2], required=True)
    p.add_argument("--steps", type=int, default=3)
    p.add_argument("--alpha", type=float, default=10.0)
    p.add_argument("--dirichlet", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--uniform-init", action="store_true")
    p.add_argument("--empty-table", action="store_true", help="start fractional counts from an empty table")
    p.add_argument("--static-freq", action="store_true", help="do not accumulate fractional counts")
    p.add_argument("--discrete-out", default=None, help="also write argmax texts as a dataset")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hull_sim)

    p = sub.add_parser("partition", help="equal-size FD/FA candidate partition per position")
    p.add_argument("--freq", required=True)
    _add_subs(p, DEFAULT_K)
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("rank-freq", help="rank/frequency CSV of a table")
    p.add_argument("--freq", required=True)
    p.add_argument("--normalize", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank_freq)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, PairRejected, UndefinedFrequencyError, FileNotFoundError, IsADirectoryError, NotADirectoryError, UnicodeDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
