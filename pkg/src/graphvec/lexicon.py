"""Translation lexicon induction for parallel-OOV source words.

A pOOV is a word absent from the parallel training data but frequent in
monolingual data. Because such words live in the same embedding space as
both languages, their highest-cosine target-language neighbor is a
translation candidate; candidates below the cosine threshold are
discarded. Accepted pairs can be exported as phrase-table entries.
"""

import logging
from dataclasses import dataclass

from .corpus import TaggedWord, Vocabulary
from .embeddings import EmbeddingStore

logger = logging.getLogger(__name__)


@dataclass
class PoovCriteria:
    tgt_lang: str
    min_mono_count: int = 100
    cosine_threshold: float = 0.3

    def __post_init__(self):
        if self.min_mono_count < 1:
            raise ValueError("min_mono_count must be >= 1")
        if not 0.0 < self.cosine_threshold <= 1.0:
            raise ValueError("cosine_threshold must be in (0, 1]")


@dataclass
class LexiconEntry:
    source: TaggedWord
    target: TaggedWord
    cosine: float


@dataclass
class InduceStats:
    candidates: int = 0
    induced: int = 0
    skipped: int = 0


def find_poovs(
    parallel_src_vocab: Vocabulary,
    mono_src_vocab: Vocabulary,
    criteria: PoovCriteria,
) -> set[TaggedWord]:
    """Monolingual words absent from the parallel vocabulary and frequent
    enough to trust (count >= min_mono_count)."""
    return {
        word
        for word, count in zip(mono_src_vocab.words, mono_src_vocab.counts)
        if count >= criteria.min_mono_count and word not in parallel_src_vocab
    }


def induce(
    store: EmbeddingStore,
    poovs,
    criteria: PoovCriteria,
    k_best: int = 1,
    stats: InduceStats | None = None,
) -> list[LexiconEntry]:
    """Propose target-language translations for each pOOV.

    Only neighbors at cosine >= threshold become entries; pOOVs missing
    from the store (or already in the target language) are skipped with a
    warning counter. Output is sorted by descending cosine, then source.
    """
    stats = stats if stats is not None else InduceStats()
    entries = []
    for word in sorted(poovs):
        stats.candidates += 1
        if word not in store or word.lang == criteria.tgt_lang:
            stats.skipped += 1
            logger.warning("pOOV skipped: %s", word.tagged())
            continue
        neighbors = store.knn(
            store.vector(word), k_best, lang_filter=criteria.tgt_lang
        )
        for target, cosine in neighbors:
            if cosine >= criteria.cosine_threshold:
                entries.append(LexiconEntry(word, target, cosine))
    entries.sort(key=lambda e: (-e.cosine, e.source))
    stats.induced = len(entries)
    return entries


def export_phrase_table(entries, path):
    """``source ||| target ||| cosine`` lines, untagged, descending cosine."""
    ordered = sorted(entries, key=lambda e: (-e.cosine, e.source))
    with open(path, "w", encoding="utf-8") as handle:
        for entry in ordered:
            handle.write(
                f"{entry.source.surface} ||| {entry.target.surface} ||| "
                f"{entry.cosine:.6g}\n"
            )
