"""Parsing and handling of context-model notation strings.

A model string assigns a path budget (a non-negative distance) to each
edge label. ``T5A1`` means text edges may be followed up to 5 steps and
alignment edges up to 1; unmentioned labels get distance 0 and are never
traversed. A parenthesized group such as ``(TA)3`` collapses several
labels into one class that shares a single distance and is traversed
without differentiation. Composite strings like ``T5D1[wiki]+T1A1[enes]``
attach one model per named corpus stream.
"""

from dataclasses import dataclass

LABELS = ("T", "A", "D")

DEFAULT_MAX_DISTANCE = 10


class SpecError(ValueError):
    """Raised for a malformed model string; carries the offending position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


@dataclass(frozen=True)
class ModelSpec:
    """Label classes with their distances.

    ``classes`` holds (label set, distance) entries for the labels that
    were written; anything else has distance 0. Classes are pairwise
    disjoint.
    """

    classes: tuple[tuple[frozenset, int], ...]

    def __post_init__(self):
        seen = set()
        for labels, dist in self.classes:
            for lab in labels:
                if lab not in LABELS:
                    raise ValueError(f"unknown label {lab!r}")
                if lab in seen:
                    raise ValueError(f"label {lab} appears in two classes")
                seen.add(lab)
            if dist < 0:
                raise ValueError("negative distance")

    def distance_of(self, label: str) -> int:
        """Distance of the class containing ``label``; 0 if unmentioned."""
        for labels, dist in self.classes:
            if label in labels:
                return dist
        return 0

    def class_of(self, label: str) -> frozenset | None:
        for labels, _ in self.classes:
            if label in labels:
                return labels
        return None

    @property
    def max_distance(self) -> int:
        return max((d for _, d in self.classes), default=0)

    def active_labels(self) -> frozenset:
        """Labels with distance >= 1 (the only ones worth materializing)."""
        return frozenset(
            lab for labels, dist in self.classes if dist >= 1 for lab in labels
        )

    def render(self) -> str:
        """Canonical string form: classes in T, A, D order, groups parenthesized."""
        order = {lab: i for i, lab in enumerate(LABELS)}
        parts = []
        for labels, dist in sorted(
            self.classes, key=lambda c: min(order[lab] for lab in c[0])
        ):
            if dist == 0:
                continue
            names = "".join(sorted(labels, key=order.get))
            if len(labels) > 1:
                names = f"({names})"
            parts.append(f"{names}{dist}")
        return "".join(parts)


@dataclass(frozen=True)
class CompositeSpec:
    """One ModelSpec per named corpus stream; stream ids stay opaque here."""

    parts: tuple[tuple[ModelSpec, str], ...]


def parse_spec(text: str, max_distance: int = DEFAULT_MAX_DISTANCE) -> ModelSpec:
    """Parse a model string like ``T5A1`` or ``(TA)3`` into a ModelSpec.

    Raises SpecError on empty input, repeated labels, an explicit zero
    distance, unknown letters, or a distance above ``max_distance``.
    """
    if not text:
        raise SpecError("empty model string", 0)
    classes: list[tuple[frozenset, int]] = []
    used: set[str] = set()
    i = 0
    n = len(text)
    while i < n:
        start = i
        if text[i] == "(":
            i += 1
            group: list[str] = []
            while i < n and text[i] != ")":
                lab = text[i]
                if lab not in LABELS:
                    raise SpecError(f"unknown label {lab!r}", i)
                if lab in used or lab in group:
                    raise SpecError(f"repeated label {lab}", i)
                group.append(lab)
                i += 1
            if i == n:
                raise SpecError("unclosed group", start)
            if len(group) < 2:
                raise SpecError("group needs at least two labels", start)
            i += 1  # closing paren
            labels = frozenset(group)
        elif text[i] in LABELS:
            lab = text[i]
            if lab in used:
                raise SpecError(f"repeated label {lab}", i)
            labels = frozenset((lab,))
            i += 1
        else:
            raise SpecError(f"unknown label {text[i]!r}", i)
        dstart = i
        while i < n and text[i].isdigit():
            i += 1
        if i == dstart:
            raise SpecError("expected a distance", dstart)
        dist = int(text[dstart:i])
        if dist == 0:
            raise SpecError("distance 0 must be omitted, not written", dstart)
        if dist > max_distance:
            raise SpecError(f"distance {dist} exceeds cap {max_distance}", dstart)
        used.update(labels)
        classes.append((labels, dist))
    return ModelSpec(tuple(classes))


def distance_of(spec: ModelSpec, label: str) -> int:
    if label not in LABELS:
        raise ValueError(f"unknown label {label!r}")
    return spec.distance_of(label)


def parse_composite(
    text: str, max_distance: int = DEFAULT_MAX_DISTANCE
) -> CompositeSpec:
    """Parse ``SPEC[stream_id]+SPEC[stream_id]...`` into a CompositeSpec."""
    if not text:
        raise SpecError("empty composite string", 0)
    parts = []
    offset = 0
    for chunk in text.split("+"):
        if "[" not in chunk or not chunk.endswith("]"):
            raise SpecError("expected SPEC[stream_id]", offset)
        spec_text, _, rest = chunk.partition("[")
        stream_id = rest[:-1]
        if not stream_id:
            raise SpecError("empty stream id", offset + len(spec_text) + 1)
        try:
            spec = parse_spec(spec_text, max_distance=max_distance)
        except SpecError as err:
            raise SpecError(str(err).rsplit(" (at", 1)[0], offset + err.pos) from None
        parts.append((spec, stream_id))
        offset += len(chunk) + 1
    return CompositeSpec(tuple(parts))
