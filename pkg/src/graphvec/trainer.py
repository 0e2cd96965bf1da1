"""Stochastic gradient ascent on neighbor pairs from one or more streams.

For every positive pair (w, c) drawn from the graph neighborhoods and n
negatives c_i, the objective contribution is

    log s(v_w . v_c) + sum_i log s(-v_w . v_c_i),     s(x) = 1/(1+e^-x)

with v_w from the input table and v_c from the output table. Composite
models train several (model, stream) parts into one shared embedding
space, interleaving units proportionally to stream sizes so each part
sees its data once per epoch. The learning rate decays linearly from
lr0 to lr_min over the total pair count, which is established by a
counting pre-pass over the streams.

With workers=1 and a fixed seed, training is bit-reproducible. With
workers>1, threads update the shared matrices without locking: lost
updates are tolerated and results are not deterministic, but the
matrices must stay finite.
"""

import logging
import threading
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .corpus import Sentence, TrainingUnit, UnitSource, Vocabulary, as_source
from .graphspec import CompositeSpec, ModelSpec
from .neighborhood import build_unit_graph, contexts_by_center
from .sampler import (
    DEFAULT_EXPONENT,
    NegativeSamplingTable,
    build_table,
    make_rng,
    sample_negatives,
)

logger = logging.getLogger(__name__)

_SUBSAMPLE_STREAM = 0x5B5B5B


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    dim: int = 100
    neg_count: int = 5
    epochs: int = 5
    lr0: float = 0.025
    lr_min: float | None = None  # defaults to 1e-4 * lr0
    seed: int = 1
    workers: int = 1
    subsample_threshold: float | None = None
    exponent: float = DEFAULT_EXPONENT
    progress_interval: float = 10.0  # seconds between progress lines

    def __post_init__(self):
        if self.lr_min is None:
            self.lr_min = 1e-4 * self.lr0
        if min(self.dim, self.neg_count, self.workers) < 1 or self.epochs < 0:
            raise ValueError("dim, neg_count and workers must be >= 1")
        if self.lr0 <= 0 or not self.lr_min < self.lr0:
            raise ValueError("need 0 < lr_min < lr0")


@dataclass
class EmbeddingModel:
    """Paired input (word) and output (context) vector tables."""

    input_vectors: np.ndarray
    output_vectors: np.ndarray
    dim: int
    vocab: Vocabulary


@dataclass
class TrainStats:
    """Filled in by train() for callers that want run summaries."""

    total_pairs: int = 0
    final_lr: float = 0.0
    epochs: int = 0
    wall_time: float = 0.0


def init_model(vocab: Vocabulary, dim: int, seed: int) -> EmbeddingModel:
    """Input rows uniform in [-0.5/dim, 0.5/dim], output rows zero."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = make_rng(seed)
    bound = 0.5 / dim
    inputs = rng.uniform(-bound, bound, size=(len(vocab), dim))
    outputs = np.zeros((len(vocab), dim))
    return EmbeddingModel(inputs, outputs, dim, vocab)


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def pair_objective(
    model: EmbeddingModel, w: int, c: int, negatives: list[int]
) -> float:
    """log s(v_w.v_c) + sum log s(-v_w.v_neg), numerically stable."""
    dots = model.output_vectors[[c, *negatives]] @ model.input_vectors[w]
    return float(_log_sigmoid(dots[0]) + _log_sigmoid(-dots[1:]).sum())


def sgd_step(
    model: EmbeddingModel, w: int, c: int, negatives: list[int], lr: float
):
    """One ascent step on a single (w, c, negatives) triple.

    All sigmoids are evaluated at the pre-step values; repeated rows in
    (c, negatives) accumulate their contributions.
    """
    vw = model.input_vectors[w]
    ids = np.array([c, *negatives], dtype=np.intp)
    outputs = model.output_vectors
    ctx = outputs[ids]
    coeff = expit(ctx @ vw)
    np.negative(coeff, out=coeff)
    coeff[0] += 1.0
    grad_w = coeff @ ctx
    coeff *= lr
    delta = coeff[:, None] * vw
    distinct = set(negatives)
    if c not in distinct and len(distinct) == len(negatives):
        outputs[ids] += delta
    else:
        np.add.at(outputs, ids, delta)
    vw += lr * grad_w


def _subsample_rng(seed: int, epoch: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([seed, _SUBSAMPLE_STREAM, epoch]))
    )


def _subsample_sentence(
    sentence: Sentence | None,
    keep_prob: np.ndarray,
    rng: np.random.Generator,
) -> tuple[Sentence | None, list[int] | None]:
    if sentence is None:
        return None, None
    remap = [-1] * len(sentence.tokens)
    kept_tokens = []
    for i, word in enumerate(sentence.tokens):
        threshold = keep_prob[i] if keep_prob is not None else 1.0
        if rng.random() < threshold:
            remap[i] = len(kept_tokens)
            kept_tokens.append(word)
    deps = None
    if sentence.deps is not None:
        deps = [
            (remap[h], remap[d])
            for h, d in sentence.deps
            if remap[h] >= 0 and remap[d] >= 0
        ]
    return Sentence(kept_tokens, deps), remap


def _subsample_unit(
    unit: TrainingUnit,
    vocab: Vocabulary,
    threshold: float,
    rng: np.random.Generator,
) -> TrainingUnit:
    """Randomly drop frequent-type occurrences, remapping deps/alignments."""
    def keep_probs(sentence):
        probs = np.ones(len(sentence.tokens))
        for i, word in enumerate(sentence.tokens):
            count = vocab.count_of(word)
            if count:
                freq = count / vocab.total_tokens
                if freq > threshold:
                    probs[i] = (threshold / freq) ** 0.5
        return probs

    src, src_map = _subsample_sentence(unit.src, keep_probs(unit.src), rng)
    tgt, tgt_map = (None, None)
    if unit.tgt is not None:
        tgt, tgt_map = _subsample_sentence(unit.tgt, keep_probs(unit.tgt), rng)
    alignments = None
    if unit.alignments is not None and tgt_map is not None:
        alignments = [
            (src_map[i], tgt_map[j])
            for i, j in unit.alignments
            if src_map[i] >= 0 and tgt_map[j] >= 0
        ]
    return TrainingUnit(src, tgt, alignments)


def _interleaved(
    parts: list[tuple[ModelSpec, UnitSource]],
):
    """Merge part streams so emission tracks each part's share of units."""
    counts = [source.unit_count() for _, source in parts]
    iterators = [iter(source) for _, source in parts]
    emitted = [0] * len(parts)
    remaining = sum(counts)
    while remaining:
        best = None
        best_key = None
        for idx, count in enumerate(counts):
            if emitted[idx] >= count:
                continue
            key = (emitted[idx] + 1) / count
            if best_key is None or key < best_key:
                best_key = key
                best = idx
        try:
            unit = next(iterators[best])
        except StopIteration:
            raise TrainingError(
                "stream shrank between counting and training"
            ) from None
        emitted[best] += 1
        remaining -= 1
        yield best, unit


def _epoch_units(parts, vocab, config: TrainConfig, epoch: int):
    rng = None
    if config.subsample_threshold is not None:
        rng = _subsample_rng(config.seed, epoch)
    for idx, unit in _interleaved(parts):
        if rng is not None:
            unit = _subsample_unit(unit, vocab, config.subsample_threshold, rng)
        yield idx, unit


def _count_pairs_per_epoch(parts, vocab, config: TrainConfig) -> int:
    total = 0
    labels = [spec.active_labels() for spec, _ in parts]
    for idx, unit in _epoch_units(parts, vocab, config, epoch=0):
        graph = build_unit_graph(unit, vocab, labels[idx])
        spec = parts[idx][0]
        total += sum(len(ctx) for _, ctx in contexts_by_center(graph, spec))
    return total


class _Progress:
    def __init__(self, interval: float):
        self.interval = interval
        self.started = time.monotonic()
        self.last = self.started
        self.last_pairs = 0

    def maybe_report(self, pairs_done: int, lr: float, epoch: int):
        now = time.monotonic()
        if now - self.last < self.interval:
            return
        rate = (pairs_done - self.last_pairs) / max(now - self.last, 1e-9)
        logger.info(
            "epoch %d: %.0f pairs/s, lr=%.6f, %d pairs done",
            epoch, rate, lr, pairs_done,
        )
        self.last = now
        self.last_pairs = pairs_done


def _run_worker(
    model: EmbeddingModel,
    table: NegativeSamplingTable,
    parts,
    vocab: Vocabulary,
    config: TrainConfig,
    total_pairs: int,
    worker_index: int,
    shared_count: list,
    progress: _Progress | None,
):
    rng = make_rng(config.seed ^ worker_index)
    lr_span = config.lr_min - config.lr0
    neg = config.neg_count
    labels = [spec.active_labels() for spec, _ in parts]
    workers = config.workers
    lr = config.lr0
    for epoch in range(config.epochs):
        for position, (idx, unit) in enumerate(
            _epoch_units(parts, vocab, config, epoch)
        ):
            if position % workers != worker_index:
                continue
            spec = parts[idx][0]
            graph = build_unit_graph(unit, vocab, labels[idx])
            for center, contexts in contexts_by_center(graph, spec):
                forbidden = set(contexts)
                for context in contexts:
                    t = shared_count[0]
                    lr = config.lr0 + lr_span * min(t / total_pairs, 1.0)
                    negatives = sample_negatives(table, rng, neg, forbidden)
                    sgd_step(model, center, context, negatives, lr)
                    shared_count[0] = t + 1
            if progress is not None:
                progress.maybe_report(shared_count[0], lr, epoch)
    return lr


def train(
    composite: CompositeSpec,
    streams: dict,
    vocab: Vocabulary,
    config: TrainConfig,
    stats: TrainStats | None = None,
) -> EmbeddingModel:
    """Train an embedding model over the composite's (model, stream) parts.

    ``streams`` maps stream ids to unit lists, UnitSources, or factories
    returning fresh iterators; every id named by the composite must
    resolve. Raises TrainingError when the model produces no pairs.
    """
    parts = []
    for spec, stream_id in composite.parts:
        if stream_id not in streams:
            raise TrainingError(f"stream id {stream_id!r} is not resolved")
        parts.append((spec, as_source(streams[stream_id])))

    started = time.monotonic()
    model = init_model(vocab, config.dim, config.seed)
    if config.epochs == 0:
        if stats is not None:
            stats.wall_time = time.monotonic() - started
        return model

    pairs_per_epoch = _count_pairs_per_epoch(parts, vocab, config)
    if pairs_per_epoch == 0:
        raise TrainingError(
            "no training pairs: the model specs produce empty neighborhoods "
            "on the configured streams (check labels against corpus kinds)"
        )
    total_pairs = pairs_per_epoch * config.epochs
    logger.info(
        "training: %d pairs/epoch, %d epochs, |V|=%d, dim=%d",
        pairs_per_epoch, config.epochs, len(vocab), config.dim,
    )

    table = build_table(vocab, config.exponent)
    progress = _Progress(config.progress_interval)
    shared_count = [0]
    if config.workers == 1:
        final_lr = _run_worker(
            model, table, parts, vocab, config, total_pairs, 0,
            shared_count, progress,
        )
    else:
        threads = []
        results = [config.lr0] * config.workers
        def runner(widx):
            results[widx] = _run_worker(
                model, table, parts, vocab, config, total_pairs, widx,
                shared_count, progress if widx == 0 else None,
            )
        for widx in range(config.workers):
            thread = threading.Thread(target=runner, args=(widx,), daemon=True)
            threads.append(thread)
            thread.start()
        for thread in threads:
            thread.join()
        final_lr = results[0]

    if not (np.isfinite(model.input_vectors).all()
            and np.isfinite(model.output_vectors).all()):
        raise TrainingError("non-finite values in trained matrices")

    if stats is not None:
        stats.total_pairs = shared_count[0]
        stats.final_lr = final_lr
        stats.epochs = config.epochs
        stats.wall_time = time.monotonic() - started
    return model
