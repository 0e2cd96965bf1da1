"""Per-unit multigraphs over token occurrences and their neighborhoods.

Each training unit becomes an undirected multigraph with identifiable
edges: T edges join adjacent positions on the same side, A edges join
translation-aligned positions across sides, D edges join dependency
heads to their dependents. A context node c belongs to the neighborhood
of w when some path w -> c of length k satisfies

    k <= min over the path's edge labels of that label's distance,

with label distances taken from a ModelSpec (collapsed classes share one
distance). Window-k SkipGram contexts are exactly the ``Tk`` case.

``neighborhood`` is the production BFS; ``brute_force_neighborhood``
enumerates simple paths and applies the rule literally, serving as the
verification oracle for the BFS.
"""

from collections import deque
from typing import Iterable, Iterator, NamedTuple

from .corpus import TrainingUnit, Vocabulary
from .graphspec import LABELS, ModelSpec

OOV_ID = -1

SRC, TGT = 0, 1

_ORACLE_NODE_LIMIT = 16


class GraphNode(NamedTuple):
    side: int
    index: int
    vocab_id: int


class GraphEdge(NamedTuple):
    a: int
    b: int
    label: str


class UnitGraph:
    """Labeled multigraph over the token occurrences of one unit.

    Nodes are listed in position order (source side first); edges are
    identified by list position, so parallel edges are distinct.
    """

    def __init__(self, nodes: list[GraphNode], edges: list[GraphEdge]):
        self.nodes = nodes
        self.edges = edges
        self._adjacency: list[list[tuple[int, str]]] | None = None

    def adjacency(self) -> list[list[tuple[int, str]]]:
        if self._adjacency is None:
            adj: list[list[tuple[int, str]]] = [[] for _ in self.nodes]
            for a, b, label in self.edges:
                adj[a].append((b, label))
                adj[b].append((a, label))
            self._adjacency = adj
        return self._adjacency

    def node_id(self, side: int, index: int) -> int:
        """Nodes are laid out source side first, so ids are positional."""
        if side == SRC:
            return index
        return self._n_src + index

    @property
    def _n_src(self) -> int:
        for i, node in enumerate(self.nodes):
            if node.side == TGT:
                return i
        return len(self.nodes)


def build_unit_graph(
    unit: TrainingUnit,
    vocab: Vocabulary,
    needed_labels: Iterable[str] = LABELS,
) -> UnitGraph:
    """Materialize a unit's graph, keeping only the labels asked for.

    Out-of-vocabulary occurrences become nodes with the OOV sentinel id:
    they stay usable as path interior (dropping them would splice text
    adjacency) but are never emitted in pairs.
    """
    needed = frozenset(needed_labels)
    nodes: list[GraphNode] = []
    edges: list[GraphEdge] = []
    sides = [(SRC, unit.src)]
    if unit.tgt is not None:
        sides.append((TGT, unit.tgt))

    offsets = {}
    for side, sentence in sides:
        offsets[side] = len(nodes)
        for index, word in enumerate(sentence.tokens):
            wid = vocab.id_of(word)
            nodes.append(GraphNode(side, index, OOV_ID if wid is None else wid))

    for side, sentence in sides:
        base = offsets[side]
        n = len(sentence.tokens)
        if "T" in needed:
            for i in range(n - 1):
                edges.append(GraphEdge(base + i, base + i + 1, "T"))
        if "D" in needed and sentence.deps:
            for head, dep in sentence.deps:
                edges.append(GraphEdge(base + head, base + dep, "D"))

    if "A" in needed and unit.alignments:
        tgt_base = offsets[TGT]
        for i, j in unit.alignments:
            edges.append(GraphEdge(i, tgt_base + j, "A"))

    return UnitGraph(nodes, edges)


def neighborhood(graph: UnitGraph, w: int, spec: ModelSpec) -> set[int]:
    """All context nodes of w admissible under the min-label-distance rule.

    BFS over states (node, smallest label distance seen so far): a state
    is only expanded while its depth is below that minimum, and the first
    arrival at a state is the shallowest, so the search is complete
    (removing a cycle from a path never shrinks its admissibility bound).
    """
    dist = {label: spec.distance_of(label) for label in LABELS}
    adj = graph.adjacency()
    result: set[int] = set()
    seen: set[tuple[int, int]] = set()
    queue: deque[tuple[int, int, int]] = deque()

    for nbr, label in adj[w]:
        budget = dist[label]
        if budget >= 1 and (nbr, budget) not in seen:
            seen.add((nbr, budget))
            queue.append((nbr, budget, 1))
            result.add(nbr)

    while queue:
        node, budget, depth = queue.popleft()
        if depth >= budget:
            continue
        for nbr, label in adj[node]:
            nb = budget if dist[label] >= budget else dist[label]
            if depth + 1 <= nb and (nbr, nb) not in seen:
                seen.add((nbr, nb))
                queue.append((nbr, nb, depth + 1))
                result.add(nbr)

    result.discard(w)
    return result


def brute_force_neighborhood(graph: UnitGraph, w: int, spec: ModelSpec) -> set[int]:
    """Oracle: enumerate every simple path from w and test the rule literally.

    Guarded to small graphs; exponential in the worst case by design.
    """
    if len(graph.nodes) > _ORACLE_NODE_LIMIT:
        raise ValueError(
            f"oracle limited to {_ORACLE_NODE_LIMIT} nodes, got {len(graph.nodes)}"
        )
    dist = {label: spec.distance_of(label) for label in LABELS}
    max_len = spec.max_distance
    adj = graph.adjacency()
    result: set[int] = set()
    on_path = {w}

    def extend(node: int, min_dist: int, length: int):
        if length == max_len:
            return
        for nbr, label in adj[node]:
            if nbr in on_path:
                continue
            nd = min(min_dist, dist[label])
            if length + 1 <= nd:
                result.add(nbr)
            on_path.add(nbr)
            extend(nbr, nd, length + 1)
            on_path.remove(nbr)

    if max_len > 0:
        extend(w, max(dist.values(), default=0), 0)
    result.discard(w)
    return result


def contexts_by_center(
    graph: UnitGraph, spec: ModelSpec
) -> Iterator[tuple[int, list[int]]]:
    """Per in-vocabulary center node: its in-vocabulary context ids.

    Centers come in position order, contexts in position order; the pair
    set is already occurrence-deduplicated because neighborhoods are sets
    of occurrence nodes.
    """
    nodes = graph.nodes
    for w, node in enumerate(nodes):
        if node.vocab_id == OOV_ID:
            continue
        ctx = neighborhood(graph, w, spec)
        ids = [nodes[c].vocab_id for c in sorted(ctx) if nodes[c].vocab_id != OOV_ID]
        if ids:
            yield node.vocab_id, ids


def generate_pairs(graph: UnitGraph, spec: ModelSpec) -> Iterator[tuple[int, int]]:
    """(center_id, context_id) pairs for every admissible occurrence pair."""
    for center_id, context_ids in contexts_by_center(graph, spec):
        for context_id in context_ids:
            yield center_id, context_id


def _node_name(graph: UnitGraph, vocab: Vocabulary, node_index: int) -> str:
    node = graph.nodes[node_index]
    if node.vocab_id == OOV_ID:
        return f"<oov:{'st'[node.side]}{node.index}>"
    return vocab.words[node.vocab_id].tagged()


def format_graph(graph: UnitGraph, vocab: Vocabulary) -> str:
    """Stable one-line-per-item dump of nodes and edges for fixtures."""
    lines = []
    for i, node in enumerate(graph.nodes):
        side = "src" if node.side == SRC else "tgt"
        lines.append(f"node {side}:{node.index} {_node_name(graph, vocab, i)}")
    for a, b, label in graph.edges:
        lines.append(f"edge {label} {_node_name(graph, vocab, a)} -- "
                     f"{_node_name(graph, vocab, b)}")
    return "\n".join(lines)


def format_neighborhood(
    graph: UnitGraph, vocab: Vocabulary, w: int, spec: ModelSpec
) -> str:
    """One ``center -> {contexts}`` line, contexts in position order."""
    ctx = sorted(neighborhood(graph, w, spec))
    inner = ", ".join(_node_name(graph, vocab, c) for c in ctx)
    return f"{_node_name(graph, vocab, w)} -> {{{inner}}}"
