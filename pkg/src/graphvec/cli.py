"""Command-line pipelines: train, eval, nn, induce-lexicon, vocab, graph-debug.

Training runs are described by a plain-text config file (INI syntax) so
they are versionable and reproducible; every [train] key can be
overridden by a command-line flag, and flags win. Corpus streams are
declared in ``[corpus:ID]`` sections and referenced from the model
string by id::

    [train]
    model = T5D1[wiki]+T1A1[enes]
    seed = 7
    output = vectors.bin

    [corpus:wiki]
    kind = dependency
    path = wiki.conll
    lang = en

    [corpus:enes]
    kind = parallel
    src = corpus.en
    tgt = corpus.es
    align = corpus.align
    src_lang = en
    tgt_lang = es

Exit codes: 0 success, 1 runtime/data error, 2 configuration error.
Machine-readable output lines are prefixed ``#=``.
"""

import argparse
import configparser
import logging
import os
import sys
import time

from . import corpus as corpus_mod
from . import embeddings as emb_mod
from . import evaluation as eval_mod
from . import lexicon as lex_mod
from . import report as report_mod
from .corpus import (
    CorpusError,
    ReaderStats,
    Sentence,
    TaggedWord,
    TrainingUnit,
    UnitSource,
    Vocabulary,
    build_vocabulary,
)
from .graphspec import SpecError, parse_composite, parse_spec
from .neighborhood import build_unit_graph, format_graph, format_neighborhood
from .trainer import EmbeddingModel, TrainConfig, TrainStats, TrainingError, train

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


def _machine(line: str):
    print(f"#= {line}")


# ---------------------------------------------------------------------------
# config handling

def _load_config(path) -> configparser.ConfigParser:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as err:
        raise ConfigError(f"cannot parse config: {err}") from None
    return parser


def _need(section, key: str):
    if key not in section:
        raise ConfigError(f"[{section.name}] missing key '{key}'")
    return section[key]


def _need_path(section, key: str) -> str:
    value = _need(section, key)
    if not os.path.exists(value):
        raise ConfigError(f"[{section.name}] key '{key}': no such file: {value}")
    return value


class StreamDecl:
    """One [corpus:ID] section, able to open fresh unit iterators."""

    def __init__(self, stream_id: str, section):
        self.stream_id = stream_id
        self.kind = _need(section, "kind")
        try:
            if self.kind == "mono":
                path = _need_path(section, "path")
                lang = corpus_mod.check_lang(_need(section, "lang"))
                self._open = lambda stats=None: corpus_mod.read_monolingual(
                    path, lang, stats)
            elif self.kind == "dependency":
                path = _need_path(section, "path")
                lang = corpus_mod.check_lang(_need(section, "lang"))
                self._open = lambda stats=None: corpus_mod.read_dependency(
                    path, lang, stats)
            elif self.kind == "parallel":
                src = _need_path(section, "src")
                tgt = _need_path(section, "tgt")
                align = _need_path(section, "align")
                src_lang = corpus_mod.check_lang(_need(section, "src_lang"))
                tgt_lang = corpus_mod.check_lang(_need(section, "tgt_lang"))
                src_deps = section.get("src_deps")
                tgt_deps = section.get("tgt_deps")
                for key, value in (("src_deps", src_deps), ("tgt_deps", tgt_deps)):
                    if value is not None and not os.path.exists(value):
                        raise ConfigError(
                            f"[{section.name}] key '{key}': no such file: {value}")
                self._open = lambda stats=None: corpus_mod.read_parallel(
                    src, tgt, align, src_lang, tgt_lang,
                    src_deps, tgt_deps, stats)
            else:
                raise ConfigError(
                    f"[{section.name}] key 'kind': unknown kind {self.kind!r}")
        except CorpusError as err:
            raise ConfigError(f"[{section.name}]: {err}") from None

    def open(self, stats: ReaderStats | None = None):
        return self._open(stats)


def _declared_streams(parser) -> dict[str, StreamDecl]:
    streams = {}
    for name in parser.sections():
        if name.startswith("corpus:"):
            stream_id = name.split(":", 1)[1]
            if not stream_id:
                raise ConfigError(f"[{name}]: empty stream id")
            streams[stream_id] = StreamDecl(stream_id, parser[name])
    return streams


def _get_typed(section, key, cast, default):
    if section is None or key not in section:
        return default
    try:
        return cast(section[key])
    except ValueError:
        raise ConfigError(f"[{section.name}] key '{key}': bad value "
                          f"{section[key]!r}") from None


# ---------------------------------------------------------------------------
# train

def cmd_train(args) -> int:
    parser = _load_config(args.config)
    section = parser["train"] if parser.has_section("train") else None

    def setting(flag_value, key, cast, default):
        if flag_value is not None:
            return flag_value
        return _get_typed(section, key, cast, default)

    model_text = setting(args.model, "model", str, None)
    if not model_text:
        raise ConfigError("[train] missing key 'model'")
    seed = setting(args.seed, "seed", int, None)
    if seed is None:
        raise ConfigError("[train] missing key 'seed' (seeds are mandatory)")
    output = setting(args.output, "output", str, None)
    if not output:
        raise ConfigError("[train] missing key 'output'")
    out_format = setting(args.format, "format", str, "binary")
    if out_format not in ("binary", "text"):
        raise ConfigError(f"[train] key 'format': unknown format {out_format!r}")
    min_count = setting(args.min_count, "min_count", int, corpus_mod.DEFAULT_MIN_COUNT)
    max_distance = _get_typed(section, "max_distance", int, 10)

    try:
        composite = parse_composite(model_text, max_distance=max_distance)
    except SpecError as err:
        raise ConfigError(f"[train] key 'model': {err}") from None

    declared = _declared_streams(parser)
    for _, stream_id in composite.parts:
        if stream_id not in declared:
            raise ConfigError(
                f"[train] key 'model': stream id '{stream_id}' is not "
                f"declared (expected a [corpus:{stream_id}] section)")

    config = TrainConfig(
        dim=setting(args.dim, "dim", int, 100),
        neg_count=setting(args.neg_count, "neg_count", int, 5),
        epochs=setting(args.epochs, "epochs", int, 5),
        lr0=setting(args.lr0, "lr0", float, 0.025),
        lr_min=_get_typed(section, "lr_min", float, None),
        seed=seed,
        workers=setting(args.workers, "workers", int, 1),
        subsample_threshold=_get_typed(section, "subsample", float, None),
        exponent=_get_typed(section, "exponent", float, 0.75),
    )

    used_ids = [stream_id for _, stream_id in composite.parts]
    read_stats = {sid: ReaderStats() for sid in used_ids}
    vocab = build_vocabulary(
        (declared[sid].open(read_stats[sid]) for sid in used_ids),
        min_count=min_count,
    )
    sources = {
        sid: UnitSource(declared[sid].open, read_stats[sid].units_emitted)
        for sid in used_ids
    }
    save_vocab = setting(args.save_vocab, "save_vocab", str, None)
    if save_vocab:
        vocab.save(save_vocab)

    stats = TrainStats()
    model = train(composite, sources, vocab, config, stats)
    store = emb_mod.EmbeddingStore.from_model(model)
    emb_mod.save(store, output, out_format)

    for sid in used_ids:
        print(f"stream {sid}: {read_stats[sid]}")
    print(f"vocabulary size: {len(vocab)} ({vocab.total_tokens} tokens)")
    print(f"total pairs: {stats.total_pairs}")
    print(f"final lr: {stats.final_lr:.6g}")
    print(f"wall time: {stats.wall_time:.2f}s")
    _machine(f"train vocab_size={len(vocab)} total_pairs={stats.total_pairs} "
             f"final_lr={stats.final_lr:.6g} wall_time={stats.wall_time:.3f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval

def cmd_eval(args) -> int:
    store = emb_mod.load(args.model)
    if args.task == "analogy":
        dataset = eval_mod.load_analogy(
            args.dataset, args.lang, section_prefix=args.sections,
            name=args.name)
        report = eval_mod.eval_analogy(
            store, dataset, resamples=args.resamples, seed=args.ci_seed)
    elif args.task == "similarity":
        dataset = eval_mod.load_similarity(
            args.dataset, args.lang, phrase_mode=args.phrases, name=args.name)
        report = eval_mod.eval_similarity(
            store, dataset, resamples=args.resamples, seed=args.ci_seed)
    elif args.task == "translation":
        if not args.src_lang:
            raise ConfigError("translation needs --src-lang "
                              "(--lang is the target language)")
        dataset = eval_mod.load_translation(
            args.dataset, args.src_lang, args.lang, name=args.name)
        report = eval_mod.eval_translation(
            store, dataset, resamples=args.resamples, seed=args.ci_seed)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown task {args.task!r}")

    print(report_mod.format_table([report]))
    for line in report_mod.machine_lines(report):
        _machine(line)
    if args.out:
        report_mod.write_delimited([report], args.out)
    if args.plot:
        report_mod.render_figure([report], args.plot)
        print(f"figure written to {args.plot}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# nn

def cmd_nn(args) -> int:
    store = emb_mod.load(args.model)
    word = TaggedWord.from_tagged(args.word)
    if word not in store:
        print(f"error: word not in store: {args.word}", file=sys.stderr)
        return EXIT_RUNTIME
    neighbors = store.knn(
        store.vector(word), args.k, lang_filter=args.lang, exclude={word})
    for neighbor, cosine in neighbors:
        print(f"{neighbor.tagged()} {cosine:.4f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# induce-lexicon

def cmd_induce_lexicon(args) -> int:
    store = emb_mod.load(args.model)
    parallel_vocab = Vocabulary.load(args.parallel_vocab)
    mono_vocab = Vocabulary.load(args.mono_vocab)
    criteria = lex_mod.PoovCriteria(
        tgt_lang=corpus_mod.check_lang(args.tgt_lang),
        min_mono_count=args.min_mono_count,
        cosine_threshold=args.threshold,
    )
    poovs = lex_mod.find_poovs(parallel_vocab, mono_vocab, criteria)
    stats = lex_mod.InduceStats()
    entries = lex_mod.induce(store, poovs, criteria, k_best=args.k_best,
                             stats=stats)
    lex_mod.export_phrase_table(entries, args.out)
    print(f"induced/candidates/skipped: {stats.induced}/{stats.candidates}/"
          f"{stats.skipped}", file=sys.stderr)
    _machine(f"lexicon induced={stats.induced} candidates={stats.candidates} "
             f"skipped={stats.skipped}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# vocab

def cmd_vocab(args) -> int:
    if args.vocab_file:
        vocab = Vocabulary.load(args.vocab_file)
    elif args.config:
        parser = _load_config(args.config)
        declared = _declared_streams(parser)
        if not declared:
            raise ConfigError("no [corpus:ID] sections declared")
        stats = {sid: ReaderStats() for sid in declared}
        vocab = build_vocabulary(
            (decl.open(stats[sid]) for sid, decl in declared.items()),
            min_count=args.min_count,
        )
        for sid in declared:
            print(f"stream {sid}: {stats[sid]}")
    else:
        raise ConfigError("need --config or --vocab-file")
    print(f"types: {len(vocab)}")
    print(f"total tokens: {vocab.total_tokens}")
    for lang, count in sorted(vocab.languages().items()):
        print(f"types[{lang}]: {count}")
    for word, count in list(zip(vocab.words, vocab.counts))[:10]:
        print(f"  {word.tagged()} {count}")
    _machine(f"vocab size={len(vocab)} total_tokens={vocab.total_tokens}")
    if args.save:
        vocab.save(args.save)
    return EXIT_OK


# ---------------------------------------------------------------------------
# graph-debug

def cmd_graph_debug(args) -> int:
    src_lang = corpus_mod.check_lang(args.src_lang)
    src = Sentence([TaggedWord(t, src_lang) for t in args.src.split()])
    tgt = None
    alignments = None
    stats = ReaderStats()
    if args.tgt:
        if not args.tgt_lang:
            raise ConfigError("--tgt needs --tgt-lang")
        tgt_lang = corpus_mod.check_lang(args.tgt_lang)
        tgt = Sentence([TaggedWord(t, tgt_lang) for t in args.tgt.split()])
        if args.align:
            alignments = corpus_mod.parse_alignment_pairs(
                args.align, len(src.tokens), len(tgt.tokens), stats)
    if args.src_deps:
        src.deps = corpus_mod.parse_dep_pairs(
            args.src_deps, len(src.tokens), stats)
    if tgt is not None and args.tgt_deps:
        tgt.deps = corpus_mod.parse_dep_pairs(
            args.tgt_deps, len(tgt.tokens), stats)
    unit = TrainingUnit(src, tgt, alignments)

    try:
        spec = parse_spec(args.model)
    except SpecError as err:
        raise ConfigError(f"--model: {err}") from None

    vocab = build_vocabulary([[unit]], min_count=1)
    graph = build_unit_graph(unit, vocab, spec.active_labels())
    print(format_graph(graph, vocab))

    centers = []
    if args.all:
        centers = list(range(len(graph.nodes)))
    else:
        wanted = {TaggedWord.from_tagged(w) for w in args.center or []}
        for index, node in enumerate(graph.nodes):
            if node.vocab_id >= 0 and vocab.words[node.vocab_id] in wanted:
                centers.append(index)
        if not centers and args.center:
            print("error: no center word occurs in the unit", file=sys.stderr)
            return EXIT_RUNTIME
    for center in centers:
        print(format_neighborhood(graph, vocab, center, spec))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphvec",
        description="Multilingual embeddings from labeled-graph contexts",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train embeddings from a config")
    p_train.add_argument("config")
    p_train.add_argument("--model", help="composite model string (overrides config)")
    p_train.add_argument("--seed", type=int)
    p_train.add_argument("--dim", type=int)
    p_train.add_argument("--epochs", type=int)
    p_train.add_argument("--neg-count", type=int, dest="neg_count")
    p_train.add_argument("--lr0", type=float)
    p_train.add_argument("--workers", type=int)
    p_train.add_argument("--min-count", type=int, dest="min_count")
    p_train.add_argument("--output")
    p_train.add_argument("--format", choices=("binary", "text"))
    p_train.add_argument("--save-vocab", dest="save_vocab")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a trained model")
    p_eval.add_argument("model")
    p_eval.add_argument("dataset")
    p_eval.add_argument("--task", required=True,
                        choices=("analogy", "similarity", "translation"))
    p_eval.add_argument("--lang", required=True,
                        help="dataset language; target language for translation")
    p_eval.add_argument("--src-lang", dest="src_lang")
    p_eval.add_argument("--phrases", action="store_true",
                        help="similarity items are &-joined two-word phrases")
    p_eval.add_argument("--sections",
                        help="keep only analogy sections starting with prefix")
    p_eval.add_argument("--name", help="dataset name for reports")
    p_eval.add_argument("--resamples", type=int,
                        default=eval_mod.DEFAULT_RESAMPLES)
    p_eval.add_argument("--ci-seed", type=int, dest="ci_seed",
                        default=eval_mod.DEFAULT_CI_SEED)
    p_eval.add_argument("--out", help="write machine-readable lines to a file")
    p_eval.add_argument("--plot", help="render the report as a figure (png/pdf)")
    p_eval.set_defaults(func=cmd_eval)

    p_nn = sub.add_parser("nn", help="nearest neighbors of a word")
    p_nn.add_argument("model")
    p_nn.add_argument("word", help="language-tagged word, e.g. dog_en")
    p_nn.add_argument("-k", type=int, default=10)
    p_nn.add_argument("--lang", help="restrict candidates to one language")
    p_nn.set_defaults(func=cmd_nn)

    p_lex = sub.add_parser("induce-lexicon",
                           help="induce translations for parallel-OOV words")
    p_lex.add_argument("model")
    p_lex.add_argument("--parallel-vocab", required=True, dest="parallel_vocab")
    p_lex.add_argument("--mono-vocab", required=True, dest="mono_vocab")
    p_lex.add_argument("--tgt-lang", required=True, dest="tgt_lang")
    p_lex.add_argument("--min-mono-count", type=int, default=100,
                       dest="min_mono_count")
    p_lex.add_argument("--threshold", type=float, default=0.3)
    p_lex.add_argument("--k-best", type=int, default=1, dest="k_best")
    p_lex.add_argument("--out", required=True)
    p_lex.set_defaults(func=cmd_induce_lexicon)

    p_vocab = sub.add_parser("vocab", help="build or inspect a vocabulary")
    p_vocab.add_argument("--config")
    p_vocab.add_argument("--vocab-file", dest="vocab_file")
    p_vocab.add_argument("--min-count", type=int, default=1, dest="min_count")
    p_vocab.add_argument("--save")
    p_vocab.set_defaults(func=cmd_vocab)

    p_dbg = sub.add_parser("graph-debug",
                           help="print a unit's graph and neighborhoods")
    p_dbg.add_argument("--src", required=True, help="source sentence text")
    p_dbg.add_argument("--src-lang", required=True, dest="src_lang")
    p_dbg.add_argument("--tgt")
    p_dbg.add_argument("--tgt-lang", dest="tgt_lang")
    p_dbg.add_argument("--align", help="Pharaoh pairs, e.g. '0-0 1-1'")
    p_dbg.add_argument("--src-deps", dest="src_deps",
                       help="head-dependent pairs, e.g. '2-0 2-1'")
    p_dbg.add_argument("--tgt-deps", dest="tgt_deps")
    p_dbg.add_argument("--model", required=True)
    p_dbg.add_argument("--center", action="append",
                       help="tagged center word; repeatable")
    p_dbg.add_argument("--all", action="store_true",
                       help="print a line for every in-vocabulary node")
    p_dbg.set_defaults(func=cmd_graph_debug)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (CorpusError, TrainingError, emb_mod.StoreError, eval_mod.EvalError,
            emb_mod.LookupError_, SpecError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


def run():  # console-script entry point
    raise SystemExit(main())
