"""Persisted embedding stores and similarity queries.

Two on-disk formats share a header line ``|V| dim``:

* text: one ``surface_lang v1 ... v_dim`` row per word, floats written
  as the shortest decimal that round-trips through float32;
* binary: per row the UTF-8 word, one space, then the row as raw
  little-endian float32, then a newline (the word2vec binary layout).

Binary round-trips are bit-exact. Queries (cosine, nearest neighbors,
analogy arithmetic) scan the whole table; there is no approximate index.
"""

import numpy as np

from .corpus import TaggedWord
from .trainer import EmbeddingModel


class StoreError(ValueError):
    """Malformed or truncated embedding file."""


class LookupError_(KeyError):
    """Query word absent from the store."""


def _format_float(value: np.float32) -> str:
    return np.format_float_positional(value, unique=True, trim="0")


class EmbeddingStore:
    """Immutable word -> float32 vector table with id order preserved."""

    def __init__(self, words: list[TaggedWord], vectors: np.ndarray):
        if len(words) != vectors.shape[0]:
            raise StoreError("word list and vector row count differ")
        self.words = words
        self.vectors = np.ascontiguousarray(vectors, dtype=np.float32)
        self.dim = int(vectors.shape[1])
        self._ids = {word: i for i, word in enumerate(words)}
        self._unit: np.ndarray | None = None
        self._zero_mask: np.ndarray | None = None
        self._lang_rows: dict[str, np.ndarray] = {}

    @classmethod
    def from_model(cls, model: EmbeddingModel) -> "EmbeddingStore":
        # the input rows are the word embeddings proper
        return cls(list(model.vocab.words), model.input_vectors.astype("<f4"))

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: TaggedWord) -> bool:
        return word in self._ids

    def vector(self, word: TaggedWord) -> np.ndarray:
        index = self._ids.get(word)
        if index is None:
            raise LookupError_(f"word not in store: {word.tagged()}")
        return self.vectors[index]

    @property
    def zero_mask(self) -> np.ndarray:
        """Flags rows whose vector is exactly zero; they rank last in knn."""
        if self._zero_mask is None:
            self._zero_mask = ~self.vectors.any(axis=1)
        return self._zero_mask

    def unit_vectors(self) -> np.ndarray:
        if self._unit is None:
            norms = np.linalg.norm(self.vectors, axis=1, keepdims=True)
            safe = np.where(norms == 0.0, 1.0, norms)
            self._unit = self.vectors / safe
        return self._unit

    def _rows_for_lang(self, lang: str) -> np.ndarray:
        rows = self._lang_rows.get(lang)
        if rows is None:
            rows = np.array(
                [i for i, w in enumerate(self.words) if w.lang == lang],
                dtype=np.intp,
            )
            self._lang_rows[lang] = rows
        return rows

    def cosine(self, a: TaggedWord, b: TaggedWord) -> float:
        va = self.vector(a).astype(np.float64)
        vb = self.vector(b).astype(np.float64)
        return cosine_of(va, vb)

    def knn(
        self,
        query: np.ndarray,
        k: int,
        lang_filter: str | None = None,
        exclude=frozenset(),
    ) -> list[tuple[TaggedWord, float]]:
        """Top-k words by cosine against ``query``; ties break by word id.

        Fewer than k candidates yield a shorter list. Zero vectors are
        pushed below every real cosine.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        query = np.asarray(query, dtype=np.float64)
        norm = np.linalg.norm(query)
        if norm == 0.0:
            scores = np.zeros(len(self.words))
        else:
            scores = self.unit_vectors() @ (query / norm)
        keys = np.where(self.zero_mask, -2.0, scores)
        if lang_filter is not None:
            rows = self._rows_for_lang(lang_filter)
        else:
            rows = np.arange(len(self.words), dtype=np.intp)
        if exclude:
            keep = [r for r in rows if self.words[r] not in exclude]
            rows = np.asarray(keep, dtype=np.intp)
        if rows.size == 0:
            return []
        order = rows[np.argsort(-keys[rows], kind="stable")][:k]
        return [(self.words[r], float(scores[r])) for r in order]

    def analogy_query(
        self, a: TaggedWord, b: TaggedWord, c: TaggedWord
    ) -> np.ndarray:
        """The 3CosAdd query vector v_b - v_a + v_c (a : b :: c : ?)."""
        return (
            self.vector(b).astype(np.float64)
            - self.vector(a).astype(np.float64)
            + self.vector(c).astype(np.float64)
        )


def cosine_of(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def save(store: EmbeddingStore, path, format: str = "binary"):
    if format == "text":
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(f"{len(store)} {store.dim}\n")
            for word, row in zip(store.words, store.vectors):
                values = " ".join(_format_float(v) for v in row)
                handle.write(f"{word.tagged()} {values}\n")
    elif format == "binary":
        with open(path, "wb") as handle:
            handle.write(f"{len(store)} {store.dim}\n".encode("ascii"))
            rows = store.vectors.astype("<f4")
            for word, row in zip(store.words, rows):
                handle.write(word.tagged().encode("utf-8"))
                handle.write(b" ")
                handle.write(row.tobytes())
                handle.write(b"\n")
    else:
        raise ValueError(f"unknown format {format!r}")


def _parse_header(line) -> tuple[int, int]:
    fields = line.split()
    try:
        n, dim = int(fields[0]), int(fields[1])
    except (IndexError, ValueError):
        raise StoreError(f"malformed header: {line!r}") from None
    if len(fields) != 2 or n < 0 or dim < 1:
        raise StoreError(f"malformed header: {line!r}")
    return n, dim


def load(path, format: str = "auto") -> EmbeddingStore:
    """Read a store back; truncated or inconsistent files never load partially.

    With format="auto" a strict text parse is attempted first and binary
    on any failure: the text reader validates every row, so a binary file
    cannot pass it.
    """
    if format == "auto":
        try:
            return load(path, "text")
        except (StoreError, UnicodeDecodeError, ValueError):
            return load(path, "binary")
    if format == "text":
        words = []
        rows = []
        with open(path, encoding="utf-8") as handle:
            n, dim = _parse_header(handle.readline())
            for line in handle:
                fields = line.split()
                if not fields:
                    continue
                if len(fields) != dim + 1:
                    raise StoreError(
                        f"{path}: row for {fields[0]!r} has {len(fields) - 1} "
                        f"values, expected {dim}"
                    )
                words.append(TaggedWord.from_tagged(fields[0]))
                rows.append(np.array(fields[1:], dtype=np.float32))
        if len(words) != n:
            raise StoreError(f"{path}: header promises {n} rows, found {len(words)}")
        return EmbeddingStore(words, np.vstack(rows) if rows else np.zeros((0, dim)))
    if format == "binary":
        with open(path, "rb") as handle:
            try:
                header = handle.readline().decode("ascii")
            except UnicodeDecodeError:
                raise StoreError(f"{path}: malformed header") from None
            n, dim = _parse_header(header)
            row_bytes = dim * 4
            words = []
            rows = []
            for i in range(n):
                tag = bytearray()
                while True:
                    ch = handle.read(1)
                    if ch == b" ":
                        break
                    if not ch or ch == b"\n":
                        raise StoreError(f"{path}: truncated at row {i}")
                    tag.extend(ch)
                payload = handle.read(row_bytes + 1)
                if len(payload) != row_bytes + 1 or payload[-1:] != b"\n":
                    raise StoreError(f"{path}: truncated at row {i}")
                words.append(TaggedWord.from_tagged(tag.decode("utf-8")))
                rows.append(np.frombuffer(payload[:-1], dtype="<f4"))
            if handle.read(1):
                raise StoreError(f"{path}: trailing bytes after {n} rows")
        vectors = np.vstack(rows) if rows else np.zeros((0, dim), dtype=np.float32)
        return EmbeddingStore(words, vectors)
    raise ValueError(f"unknown format {format!r}")
