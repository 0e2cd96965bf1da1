"""Intrinsic evaluation: analogy accuracy, similarity correlation, translation.

Metrics follow the usual conventions: Acc@k is the fraction of test items
whose reference lands among the k highest-cosine candidates, similarity
quality is the Spearman correlation between predicted cosines and human
scores, and every reported value carries a 95% percentile-bootstrap
confidence interval. Items with out-of-vocabulary words are skipped and
reported through the coverage field, never substituted.

Dataset file formats:

* analogy: four whitespace-separated words per line; lines starting with
  ``:`` open a named section (sections whose name starts with ``gram``
  are the syntactic split by the usual convention);
* similarity: tab-separated ``item_a<TAB>item_b<TAB>score``, items being
  single words or ``&``-joined two-word phrases;
* translation: ``source target`` per line.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import stats as scipy_stats

from .corpus import TaggedWord
from .embeddings import EmbeddingStore, cosine_of

DEFAULT_RESAMPLES = 10_000
DEFAULT_CI_SEED = 74250


class EvalError(ValueError):
    pass


@dataclass
class AnalogyDataset:
    name: str
    lang: str
    items: list[tuple[TaggedWord, TaggedWord, TaggedWord, TaggedWord]]


@dataclass
class SimilarityDataset:
    name: str
    lang: str
    items: list[tuple[tuple[TaggedWord, ...], tuple[TaggedWord, ...], float]]
    phrase_mode: bool = False


@dataclass
class TranslationDataset:
    name: str
    src_lang: str
    tgt_lang: str
    items: list[tuple[TaggedWord, TaggedWord]]


@dataclass
class MetricValue:
    name: str
    value: float
    ci_low: float
    ci_high: float


@dataclass
class EvalReport:
    dataset: str
    metrics: list[MetricValue]
    coverage: float
    n_evaluated: int
    n_items: int
    undefined: bool = False


def load_analogy(path, lang: str, section_prefix: str | None = None,
                 name: str | None = None) -> AnalogyDataset:
    items = []
    section = ""
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            fields = line.split()
            if not fields:
                continue
            if fields[0].startswith(":"):
                section = " ".join(fields)[1:].strip()
                continue
            if len(fields) != 4:
                raise EvalError(f"{path}: need 4 words per line, got {line!r}")
            if section_prefix is not None and not section.startswith(section_prefix):
                continue
            items.append(tuple(TaggedWord(w, lang) for w in fields))
    if not items:
        raise EvalError(f"{path}: no analogy items")
    return AnalogyDataset(name or _stem(path), lang, items)


def load_similarity(path, lang: str, phrase_mode: bool = False,
                    name: str | None = None) -> SimilarityDataset:
    items = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3:
                raise EvalError(f"{path}: need item_a<TAB>item_b<TAB>score")
            item_a = tuple(TaggedWord(w.strip(), lang)
                           for w in fields[0].split("&"))
            item_b = tuple(TaggedWord(w.strip(), lang)
                           for w in fields[1].split("&"))
            items.append((item_a, item_b, float(fields[2])))
    if not items:
        raise EvalError(f"{path}: no similarity items")
    return SimilarityDataset(name or _stem(path), lang, items, phrase_mode)


def load_translation(path, src_lang: str, tgt_lang: str,
                     name: str | None = None) -> TranslationDataset:
    items = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 2:
                raise EvalError(f"{path}: need 'source target' per line")
            items.append((TaggedWord(fields[0], src_lang),
                          TaggedWord(fields[1], tgt_lang)))
    if not items:
        raise EvalError(f"{path}: no translation items")
    return TranslationDataset(name or _stem(path), src_lang, tgt_lang, items)


def _stem(path) -> str:
    import os.path
    return os.path.splitext(os.path.basename(str(path)))[0].replace(" ", "_")


def spearman_rho(pred, gold) -> float:
    """Spearman rank correlation with average ranks for ties."""
    if len(pred) != len(gold):
        raise EvalError("pred and gold must have equal length")
    if len(pred) < 2:
        raise EvalError("need at least 2 items")
    return float(scipy_stats.spearmanr(pred, gold).statistic)


def _rowwise_spearman(pred: np.ndarray, gold: np.ndarray) -> np.ndarray:
    """Spearman per row of two equally-shaped 2-D arrays."""
    pr = scipy_stats.rankdata(pred, axis=1)
    gr = scipy_stats.rankdata(gold, axis=1)
    pr -= pr.mean(axis=1, keepdims=True)
    gr -= gr.mean(axis=1, keepdims=True)
    denom = np.sqrt((pr * pr).sum(axis=1) * (gr * gr).sum(axis=1))
    denom = np.where(denom == 0.0, 1.0, denom)
    return (pr * gr).sum(axis=1) / denom


def bootstrap_ci(
    per_item_outcomes,
    statistic: str = "mean",
    resamples: int = DEFAULT_RESAMPLES,
    seed: int = DEFAULT_CI_SEED,
) -> tuple[float, float]:
    """95% percentile bootstrap over items, deterministic given the seed.

    For ``mean`` the outcomes are scalars; for ``rho`` they are
    (predicted, gold) pairs and the statistic is Spearman correlation.
    """
    outcomes = np.asarray(per_item_outcomes, dtype=np.float64)
    if outcomes.size == 0:
        raise EvalError("no outcomes to resample")
    rng = np.random.Generator(np.random.PCG64(seed))
    n = outcomes.shape[0]
    values = np.empty(resamples)
    chunk = max(1, min(resamples, 4_000_000 // max(n, 1)))
    done = 0
    while done < resamples:
        take = min(chunk, resamples - done)
        idx = rng.integers(0, n, size=(take, n))
        if statistic == "mean":
            values[done:done + take] = outcomes[idx].mean(axis=1)
        elif statistic == "rho":
            if outcomes.ndim != 2 or outcomes.shape[1] != 2:
                raise EvalError("rho statistic needs (pred, gold) pairs")
            values[done:done + take] = _rowwise_spearman(
                outcomes[idx, 0], outcomes[idx, 1]
            )
        else:
            raise EvalError(f"unknown statistic {statistic!r}")
        done += take
    low, high = np.percentile(values, [2.5, 97.5])
    return float(low), float(high)


def _accuracy_metrics(hits1, hits5, resamples, seed):
    acc1 = float(np.mean(hits1))
    acc5 = float(np.mean(hits5))
    lo1, hi1 = bootstrap_ci(hits1, "mean", resamples, seed)
    lo5, hi5 = bootstrap_ci(hits5, "mean", resamples, seed)
    return [
        MetricValue("acc1", acc1, lo1, hi1),
        MetricValue("acc5", acc5, lo5, hi5),
    ]


def eval_analogy(
    store: EmbeddingStore,
    dataset: AnalogyDataset,
    resamples: int = DEFAULT_RESAMPLES,
    seed: int = DEFAULT_CI_SEED,
) -> EvalReport:
    """3CosAdd accuracy: rank candidates of the dataset language by cosine
    against v_b - v_a + v_c, excluding the three query words."""
    hits1 = []
    hits5 = []
    for a, b, c, reference in dataset.items:
        if any(w not in store for w in (a, b, c, reference)):
            continue
        query = store.analogy_query(a, b, c)
        top = store.knn(query, 5, lang_filter=dataset.lang, exclude={a, b, c})
        predicted = [w for w, _ in top]
        hits1.append(1.0 if predicted and predicted[0] == reference else 0.0)
        hits5.append(1.0 if reference in predicted else 0.0)
    n_eval = len(hits1)
    coverage = n_eval / len(dataset.items)
    if n_eval == 0:
        nan = float("nan")
        metrics = [MetricValue("acc1", nan, nan, nan),
                   MetricValue("acc5", nan, nan, nan)]
        return EvalReport(dataset.name, metrics, 0.0, 0, len(dataset.items),
                          undefined=True)
    metrics = _accuracy_metrics(hits1, hits5, resamples, seed)
    return EvalReport(dataset.name, metrics, coverage, n_eval, len(dataset.items))


def _item_vector(store: EmbeddingStore, words) -> np.ndarray | None:
    if any(w not in store for w in words):
        return None
    total = np.zeros(store.dim)
    for w in words:
        total += store.vector(w).astype(np.float64)
    return total


def eval_similarity(
    store: EmbeddingStore,
    dataset: SimilarityDataset,
    resamples: int = DEFAULT_RESAMPLES,
    seed: int = DEFAULT_CI_SEED,
) -> EvalReport:
    """Spearman correlation between item cosines and human scores.

    Phrase items are composed by element-wise addition of the word vectors.
    """
    pred = []
    gold = []
    for item_a, item_b, score in dataset.items:
        if not dataset.phrase_mode and (len(item_a) > 1 or len(item_b) > 1):
            raise EvalError(f"{dataset.name}: phrase item in word-pair dataset")
        va = _item_vector(store, item_a)
        vb = _item_vector(store, item_b)
        if va is None or vb is None:
            continue
        pred.append(cosine_of(va, vb))
        gold.append(score)
    n_eval = len(pred)
    coverage = n_eval / len(dataset.items)
    if n_eval < 2:
        raise EvalError(
            f"{dataset.name}: {n_eval} evaluable items "
            f"(coverage {coverage:.3f}), need at least 2"
        )
    rho = spearman_rho(pred, gold)
    lo, hi = bootstrap_ci(list(zip(pred, gold)), "rho", resamples, seed)
    return EvalReport(dataset.name, [MetricValue("rho", rho, lo, hi)],
                      coverage, n_eval, len(dataset.items))


def eval_translation(
    store: EmbeddingStore,
    dataset: TranslationDataset,
    resamples: int = DEFAULT_RESAMPLES,
    seed: int = DEFAULT_CI_SEED,
) -> EvalReport:
    """Acc@1/Acc@5 of the reference among target-language nearest neighbors."""
    hits1 = []
    hits5 = []
    for source, reference in dataset.items:
        if source not in store:
            continue
        top = store.knn(store.vector(source), 5, lang_filter=dataset.tgt_lang)
        predicted = [w for w, _ in top]
        hits1.append(1.0 if predicted and predicted[0] == reference else 0.0)
        hits5.append(1.0 if reference in predicted else 0.0)
    n_eval = len(hits1)
    coverage = n_eval / len(dataset.items)
    if n_eval == 0:
        nan = float("nan")
        metrics = [MetricValue("acc1", nan, nan, nan),
                   MetricValue("acc5", nan, nan, nan)]
        return EvalReport(dataset.name, metrics, 0.0, 0, len(dataset.items),
                          undefined=True)
    metrics = _accuracy_metrics(hits1, hits5, resamples, seed)
    return EvalReport(dataset.name, metrics, coverage, n_eval, len(dataset.items))
