"""Corpus ingestion and the multilingual vocabulary.

Three kinds of input are turned into a uniform stream of training units:

* monolingual text, one whitespace-tokenized sentence per line;
* dependency-annotated text in CoNLL-style blocks (blank-line separated;
  tab-separated fields with the 1-based token id in field 1, the surface
  form in field 2 and the head id in field 7, 0 meaning root);
* word-aligned parallel text as three line-aligned files (source, target,
  Pharaoh ``i-j`` alignments, 0-based), optionally with per-line
  dependency sidecar files holding ``head-dependent`` index pairs.

Word types are language-tagged: the same surface in two languages is two
distinct vocabulary entries. The serialized form appends ``_lang`` to the
surface (``dog_en``). No lowercasing or normalization happens here;
preprocessing is the caller's responsibility.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

logger = logging.getLogger(__name__)

_LANG_RE = re.compile(r"^[a-z]{2,3}$")

DEFAULT_MIN_COUNT = 5


class CorpusError(ValueError):
    """Fatal input problem: unreadable file, mismatched line counts, ..."""


class TaggedWord(NamedTuple):
    surface: str
    lang: str

    def tagged(self) -> str:
        return f"{self.surface}_{self.lang}"

    @classmethod
    def from_tagged(cls, text: str) -> "TaggedWord":
        surface, sep, lang = text.rpartition("_")
        if not sep or not surface or not _LANG_RE.match(lang):
            raise CorpusError(f"not a language-tagged word: {text!r}")
        return cls(surface, lang)


def check_lang(lang: str) -> str:
    if not _LANG_RE.match(lang):
        raise CorpusError(f"bad language code {lang!r} (want [a-z]{{2,3}})")
    return lang


@dataclass
class Sentence:
    """Token sequence, optionally with undirected dependency arcs.

    ``deps`` holds (head_index, dependent_index) pairs, 0-based, at most
    one head per dependent, never self-referential.
    """

    tokens: list[TaggedWord]
    deps: list[tuple[int, int]] | None = None


@dataclass
class TrainingUnit:
    """One sentence, or an aligned sentence pair, as read from disk.

    ``alignments`` holds (src_index, tgt_index) pairs and is only present
    when ``tgt`` is; indices are in bounds and pairs are deduplicated.
    """

    src: Sentence
    tgt: Sentence | None = None
    alignments: list[tuple[int, int]] | None = None


@dataclass
class ReaderStats:
    """Counters every reader maintains for the CLI to print."""

    lines_read: int = 0
    units_emitted: int = 0
    warnings: int = 0

    def __str__(self):
        return (
            f"lines_read={self.lines_read} "
            f"units_emitted={self.units_emitted} warnings={self.warnings}"
        )


def _decoded_lines(path) -> Iterator[tuple[int, str | None]]:
    """Yield (lineno, text) per line; text is None for invalid UTF-8."""
    with open(path, "rb") as handle:
        for lineno, raw in enumerate(handle, start=1):
            try:
                yield lineno, raw.decode("utf-8").strip("\n").strip("\r")
            except UnicodeDecodeError:
                yield lineno, None


def read_monolingual(
    path, lang: str, stats: ReaderStats | None = None
) -> Iterator[TrainingUnit]:
    """One TrainingUnit per non-empty line; empty lines emit nothing."""
    check_lang(lang)
    stats = stats if stats is not None else ReaderStats()
    for lineno, line in _decoded_lines(path):
        stats.lines_read += 1
        if line is None:
            stats.warnings += 1
            logger.warning("%s:%d: invalid UTF-8, line skipped", path, lineno)
            continue
        tokens = line.split()
        if not tokens:
            continue
        stats.units_emitted += 1
        yield TrainingUnit(Sentence([TaggedWord(t, lang) for t in tokens]))


def _parse_conll_block(lines: list[str], lang: str) -> Sentence | None:
    """One CoNLL block to a Sentence; None if any line is malformed."""
    tokens = []
    heads = []
    for line in lines:
        fields = line.split("\t")
        if len(fields) < 7:
            return None
        try:
            tok_id = int(fields[0])
            head = int(fields[6])
        except ValueError:
            return None
        if tok_id != len(tokens) + 1:
            return None
        tokens.append(TaggedWord(fields[1], lang))
        heads.append(head)
    n = len(tokens)
    deps = []
    for dep_index, head in enumerate(heads):
        if head == 0:
            continue  # root contributes no arc
        if not (1 <= head <= n) or head - 1 == dep_index:
            return None
        deps.append((head - 1, dep_index))
    return Sentence(tokens, deps)


def read_dependency(
    path, lang: str, stats: ReaderStats | None = None
) -> Iterator[TrainingUnit]:
    """CoNLL-style blocks to TrainingUnits; malformed sentences are rejected."""
    check_lang(lang)
    stats = stats if stats is not None else ReaderStats()
    block: list[str] = []

    def flush():
        if not block:
            return None
        sentence = _parse_conll_block(block, lang)
        block.clear()
        if sentence is None:
            stats.warnings += 1
            logger.warning("%s: malformed block rejected", path)
            return None
        stats.units_emitted += 1
        return TrainingUnit(sentence)

    for _, line in _decoded_lines(path):
        stats.lines_read += 1
        if line is None:
            stats.warnings += 1
            block.append("\x00")  # poisons the block so it gets rejected
            continue
        if line.strip() == "":
            unit = flush()
            if unit is not None:
                yield unit
        else:
            block.append(line)
    unit = flush()
    if unit is not None:
        yield unit


def parse_alignment_pairs(
    text: str, n_src: int, n_tgt: int, stats: ReaderStats
) -> list[tuple[int, int]]:
    """Pharaoh ``i-j`` pairs; bad or out-of-bound pairs are dropped with a
    warning, duplicates are removed keeping first occurrence order."""
    pairs = []
    seen = set()
    for token in text.split():
        left, sep, right = token.partition("-")
        if not sep:
            stats.warnings += 1
            continue
        try:
            i, j = int(left), int(right)
        except ValueError:
            stats.warnings += 1
            continue
        if not (0 <= i < n_src and 0 <= j < n_tgt):
            stats.warnings += 1
            continue
        if (i, j) in seen:
            continue
        seen.add((i, j))
        pairs.append((i, j))
    return pairs


def parse_dep_pairs(
    text: str, n_tokens: int, stats: ReaderStats
) -> list[tuple[int, int]]:
    """``head-dependent`` pairs, 0-based, one line per sentence."""
    deps = []
    claimed = set()
    for token in text.split():
        left, sep, right = token.partition("-")
        try:
            head, dep = int(left), int(right)
        except ValueError:
            stats.warnings += 1
            continue
        if not sep or not (0 <= head < n_tokens and 0 <= dep < n_tokens):
            stats.warnings += 1
            continue
        if head == dep or dep in claimed:
            stats.warnings += 1
            continue
        claimed.add(dep)
        deps.append((head, dep))
    return deps


def read_parallel(
    src_path,
    tgt_path,
    align_path,
    src_lang: str,
    tgt_lang: str,
    src_deps_path=None,
    tgt_deps_path=None,
    stats: ReaderStats | None = None,
) -> Iterator[TrainingUnit]:
    """Line-aligned parallel corpus with Pharaoh alignments.

    The three files (and any sidecar) must have equal line counts; a
    mismatch is fatal. Lines with an empty or undecodable side are
    rejected with a warning; bad alignment pairs are dropped per pair.
    """
    check_lang(src_lang)
    check_lang(tgt_lang)
    stats = stats if stats is not None else ReaderStats()

    streams = [_decoded_lines(src_path), _decoded_lines(tgt_path),
               _decoded_lines(align_path)]
    names = [src_path, tgt_path, align_path]
    if src_deps_path is not None:
        streams.append(_decoded_lines(src_deps_path))
        names.append(src_deps_path)
    if tgt_deps_path is not None:
        streams.append(_decoded_lines(tgt_deps_path))
        names.append(tgt_deps_path)

    while True:
        rows = []
        exhausted = []
        for stream in streams:
            item = next(stream, None)
            rows.append(item)
            exhausted.append(item is None)
        if all(exhausted):
            break
        if any(exhausted):
            short = ", ".join(str(n) for n, e in zip(names, exhausted) if e)
            raise CorpusError(f"line-count mismatch; exhausted early: {short}")
        stats.lines_read += 1
        texts = [row[1] for row in rows]
        if texts[0] is None or texts[1] is None or texts[2] is None:
            stats.warnings += 1
            continue
        src_tokens = texts[0].split()
        tgt_tokens = texts[1].split()
        if not src_tokens or not tgt_tokens:
            stats.warnings += 1
            continue
        src = Sentence([TaggedWord(t, src_lang) for t in src_tokens])
        tgt = Sentence([TaggedWord(t, tgt_lang) for t in tgt_tokens])
        alignments = parse_alignment_pairs(
            texts[2], len(src_tokens), len(tgt_tokens), stats
        )
        cursor = 3
        if src_deps_path is not None:
            text = texts[cursor]
            cursor += 1
            if text:
                src.deps = parse_dep_pairs(text, len(src_tokens), stats)
        if tgt_deps_path is not None:
            text = texts[cursor]
            if text:
                tgt.deps = parse_dep_pairs(text, len(tgt_tokens), stats)
        stats.units_emitted += 1
        yield TrainingUnit(src, tgt, alignments)


class Vocabulary:
    """Language-tagged word types with counts and dense ids.

    Ids run 0..len-1, assigned by descending count, ties broken by
    (lang, surface). ``total_tokens`` counts every token seen at build
    time, including types later dropped by the min-count threshold.
    """

    def __init__(self, counted: dict[TaggedWord, int], total_tokens: int):
        ordered = sorted(counted.items(), key=lambda kv: (-kv[1], kv[0].lang, kv[0].surface))
        self.words: list[TaggedWord] = [w for w, _ in ordered]
        self.counts: list[int] = [c for _, c in ordered]
        self.total_tokens = total_tokens
        self._ids = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: TaggedWord) -> bool:
        return word in self._ids

    def id_of(self, word: TaggedWord) -> int | None:
        return self._ids.get(word)

    def count_of(self, word: TaggedWord) -> int:
        i = self._ids.get(word)
        return 0 if i is None else self.counts[i]

    def languages(self) -> dict[str, int]:
        """Type count per language."""
        out: dict[str, int] = {}
        for word in self.words:
            out[word.lang] = out.get(word.lang, 0) + 1
        return out

    def save(self, path):
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(f"#graphvec-vocab {len(self)} {self.total_tokens}\n")
            for word, count in zip(self.words, self.counts):
                handle.write(f"{word.tagged()}\t{count}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="utf-8") as handle:
            header = handle.readline().split()
            if len(header) != 3 or header[0] != "#graphvec-vocab":
                raise CorpusError(f"{path}: not a vocabulary file")
            expected, total = int(header[1]), int(header[2])
            counted = {}
            for line in handle:
                tagged, _, count = line.rstrip("\n").partition("\t")
                counted[TaggedWord.from_tagged(tagged)] = int(count)
        if len(counted) != expected:
            raise CorpusError(f"{path}: entry count mismatch")
        return cls(counted, total)


def build_vocabulary(
    streams: Iterable[Iterable[TrainingUnit]],
    min_count: int = DEFAULT_MIN_COUNT,
) -> Vocabulary:
    """Count every token on both sides of every unit and keep frequent types."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts: dict[TaggedWord, int] = {}
    total = 0
    for stream in streams:
        for unit in stream:
            for sentence in (unit.src, unit.tgt):
                if sentence is None:
                    continue
                for word in sentence.tokens:
                    counts[word] = counts.get(word, 0) + 1
                    total += 1
    kept = {w: c for w, c in counts.items() if c >= min_count}
    if not kept:
        raise CorpusError(
            f"empty vocabulary: no type reached min_count={min_count} "
            f"over {total} tokens"
        )
    return Vocabulary(kept, total)


@dataclass
class UnitSource:
    """Re-iterable unit stream: a factory plus a cached unit count.

    The trainer walks each stream once per epoch and needs unit counts up
    front to interleave composite parts proportionally.
    """

    factory: Callable[[], Iterable[TrainingUnit]]
    _count: int | None = field(default=None, repr=False)

    def __iter__(self) -> Iterator[TrainingUnit]:
        return iter(self.factory())

    def unit_count(self) -> int:
        if self._count is None:
            self._count = sum(1 for _ in self.factory())
        return self._count


def as_source(units) -> UnitSource:
    """Wrap a list of units, an existing source, or a factory callable."""
    if isinstance(units, UnitSource):
        return units
    if isinstance(units, Sequence):
        return UnitSource(lambda: units, len(units))
    if callable(units):
        return UnitSource(units)
    raise TypeError(f"cannot make a unit source from {type(units).__name__}")
