"""Directed network topologies: chains, layered graphs, random corpora and file I/O.

Nodes carry the labels 1..n exactly once; a designated source holds the
message to be broadcast. Networks are immutable after construction and safe
to share between threads.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from .errors import FormatError, InvalidChain, InvalidLayering


class Network:
    """Immutable directed graph over labels 1..n with a designated source."""

    __slots__ = ("n", "source", "out_edges", "in_edges")

    def __init__(self, n: int, edges, source: int = 1):
        if n < 1:
            raise ValueError(f"node count must be >= 1, got {n}")
        if not 1 <= source <= n:
            raise ValueError(f"source {source} outside 1..{n}")
        out = {v: [] for v in range(1, n + 1)}
        seen = set()
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u},{v}) outside label range 1..{n}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            out[u].append(v)
        self.n = n
        self.source = source
        # sorted neighbor lists give canonical serialization and reproducible traces
        self.out_edges = {v: tuple(sorted(out[v])) for v in range(1, n + 1)}
        incoming = {v: [] for v in range(1, n + 1)}
        for u, vs in self.out_edges.items():
            for v in vs:
                incoming[v].append(u)
        self.in_edges = {v: tuple(sorted(incoming[v])) for v in range(1, n + 1)}

    @property
    def nodes(self):
        return range(1, self.n + 1)

    def edges(self):
        for u in self.nodes:
            for v in self.out_edges[u]:
                yield (u, v)

    def edge_count(self) -> int:
        return sum(len(vs) for vs in self.out_edges.values())

    def __eq__(self, other):
        return (
            isinstance(other, Network)
            and self.n == other.n
            and self.source == other.source
            and self.out_edges == other.out_edges
        )

    def __hash__(self):
        return hash((self.n, self.source, tuple(self.out_edges.items())))

    def __repr__(self):
        return f"Network(n={self.n}, source={self.source}, edges={self.edge_count()})"


@dataclass(frozen=True)
class Chain:
    """An ordered sequence of distinct labels; materializes as a directed path."""

    sequence: tuple

    def __post_init__(self):
        seq = tuple(self.sequence)
        object.__setattr__(self, "sequence", seq)
        if not seq:
            raise InvalidChain("chain must be nonempty")
        if len(set(seq)) != len(seq):
            raise InvalidChain(f"chain labels must be distinct: {seq}")

    def __len__(self):
        return len(self.sequence)

    def labels(self):
        return set(self.sequence)


@dataclass(frozen=True)
class LayeredSpec:
    """Layer-by-layer label assignment: one source layer, two-node middle layers,
    a final layer of one or two nodes, complete forward edges between neighbors."""

    layer_ids: tuple

    def __post_init__(self):
        object.__setattr__(self, "layer_ids", tuple(tuple(layer) for layer in self.layer_ids))

    def validate(self):
        layers = self.layer_ids
        if not layers:
            raise InvalidLayering("at least one layer required")
        if len(layers[0]) != 1:
            raise InvalidLayering(f"first layer must hold exactly the source, got {layers[0]}")
        for i, layer in enumerate(layers[1:-1], start=2):
            if len(layer) != 2:
                raise InvalidLayering(f"layer {i} must hold exactly 2 nodes, got {layer}")
        if len(layers) > 1 and len(layers[-1]) not in (1, 2):
            raise InvalidLayering(f"last layer must hold 1 or 2 nodes, got {layers[-1]}")
        flat = [v for layer in layers for v in layer]
        n = len(flat)
        if sorted(flat) != list(range(1, n + 1)):
            raise InvalidLayering(f"layers must partition 1..{n}: {layers}")
        return n


def build_chain(ids, n: int | None = None) -> Network:
    """Directed path along `ids`; source is the first label.

    Without an explicit universe size the labels must be exactly 1..len(ids);
    the worst-case generators pass `n` to embed a chain into a larger label set.
    """
    chain = Chain(tuple(ids))
    total = n if n is not None else len(chain)
    for v in chain.sequence:
        if not 1 <= v <= total:
            raise InvalidChain(f"label {v} outside 1..{total}")
    edges = [(chain.sequence[i], chain.sequence[i + 1]) for i in range(len(chain) - 1)]
    return Network(total, edges, source=chain.sequence[0])


def concat_chains(s1: Chain, s2: Chain) -> Chain:
    """Concatenate two label-disjoint chains."""
    overlap = s1.labels() & s2.labels()
    if overlap:
        raise InvalidChain(f"chains share labels {sorted(overlap)}")
    return Chain(s1.sequence + s2.sequence)


def build_layered(spec: LayeredSpec) -> Network:
    """Materialize a layered spec: every node of layer i points at every node of layer i+1."""
    n = spec.validate()
    edges = []
    layers = spec.layer_ids
    for i in range(len(layers) - 1):
        for u in layers[i]:
            for v in layers[i + 1]:
                edges.append((u, v))
    return Network(n, edges, source=layers[0][0])


def random_reachable_digraph(n: int, seed: int) -> Network:
    """Seed-deterministic random digraph in which every node is reachable from node 1.

    A random spanning arborescence rooted at the source guarantees reachability;
    extra edges are then sprinkled with probability ~2/n per ordered pair.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = random.Random(seed)
    order = list(range(2, n + 1))
    rng.shuffle(order)
    reachable = [1]
    edges = set()
    for v in order:
        parent = rng.choice(reachable)
        edges.add((parent, v))
        reachable.append(v)
    p_extra = min(0.5, 2.0 / n) if n > 1 else 0.0
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            if u != v and (u, v) not in edges and rng.random() < p_extra:
                edges.add((u, v))
    return Network(n, sorted(edges), source=1)


def bfs_depths(network: Network) -> dict:
    """Hop distance from the source to every reachable node."""
    depths = {network.source: 0}
    queue = deque([network.source])
    while queue:
        u = queue.popleft()
        for v in network.out_edges[u]:
            if v not in depths:
                depths[v] = depths[u] + 1
                queue.append(v)
    return depths


def eccentricity(network: Network) -> int:
    """Largest source-to-node hop distance; a floor for any broadcast time."""
    return max(bfs_depths(network).values())


def save_network(network: Network, path) -> None:
    """Write the line-based graph format (header, then lexicographically sorted edges)."""
    lines = [f"graph n={network.n} source={network.source}"]
    lines.extend(sorted(f"edge {u} {v}" for u, v in network.edges()))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_network(path) -> Network:
    """Parse a graph file; raises FormatError with the offending line number."""
    header = None
    edges = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "graph":
                if header is not None:
                    raise FormatError("duplicate graph header", lineno)
                try:
                    fields = dict(p.split("=", 1) for p in parts[1:])
                    header = (int(fields["n"]), int(fields["source"]), lineno)
                except (ValueError, KeyError) as exc:
                    raise FormatError(f"bad graph header: {exc}", lineno) from exc
            elif parts[0] == "edge":
                if header is None:
                    raise FormatError("edge before graph header", lineno)
                if len(parts) != 3:
                    raise FormatError(f"bad edge line: {line!r}", lineno)
                try:
                    u, v = int(parts[1]), int(parts[2])
                except ValueError as exc:
                    raise FormatError(f"non-integer edge labels: {line!r}", lineno) from exc
                n = header[0]
                if not (1 <= u <= n and 1 <= v <= n):
                    raise FormatError(f"edge ({u},{v}) outside label range 1..{n}", lineno)
                if u == v:
                    raise FormatError(f"self-loop at node {u}", lineno)
                if (u, v) in seen:
                    raise FormatError(f"duplicate edge ({u},{v})", lineno)
                seen.add((u, v))
                edges.append((u, v))
            else:
                raise FormatError(f"unknown record {parts[0]!r}", lineno)
    if header is None:
        raise FormatError("missing graph header")
    n, source, header_line = header
    if not 1 <= source <= n:
        raise FormatError(f"source {source} outside 1..{n}", header_line)
    return Network(n, edges, source=source)
