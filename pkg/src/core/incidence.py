"""Incidence graphs of designs and the point/block set machinery on them.

Vertices are numbered points first (0..v-1), then blocks (v..v+b-1), so the
point part of a vertex set is a plain mask.
"""
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

from .designs import Design, PointSet, bits


@dataclass(frozen=True)
class IncidenceGraph:
    """Bipartite point/block graph stored as closed-neighbourhood bitsets."""

    v: int
    b: int
    closed_nbhd: Tuple[int, ...]

    @classmethod
    def from_blocks(cls, v: int, blocks: Sequence[int]) -> 'IncidenceGraph':
        """Build the graph of any point/block incidence structure.

        Args:
            v: Number of points
            blocks: Block bitsets over the points

        Returns:
            IncidenceGraph with one vertex per block entry
        """
        b = len(blocks)
        nbhd = [1 << x for x in range(v)] + [1 << (v + j) for j in range(b)]
        for j, blk in enumerate(blocks):
            nbhd[v + j] |= blk
            for x in bits(blk):
                nbhd[x] |= 1 << (v + j)
        return cls(v=v, b=b, closed_nbhd=tuple(nbhd))

    @property
    def n(self) -> int:
        return self.v + self.b

    @property
    def all_vertices(self) -> int:
        return (1 << self.n) - 1

    @property
    def point_mask(self) -> int:
        return (1 << self.v) - 1

    @property
    def block_mask(self) -> int:
        return self.all_vertices & ~self.point_mask

    def degree(self, u: int) -> int:
        return self.closed_nbhd[u].bit_count() - 1

    def edge_count(self) -> int:
        return sum(self.degree(x) for x in range(self.v))

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = frontier = 1
        while frontier:
            reach = 0
            for u in bits(frontier):
                reach |= self.closed_nbhd[u]
            frontier = reach & ~seen
            seen |= reach
        return seen == self.all_vertices

    def label(self, u: int) -> str:
        return f"p{u}" if u < self.v else f"B{u - self.v}"


@dataclass(frozen=True, order=True)
class VertexSet:
    """A set of incidence-graph vertices.

    Ordering compares member tuples, which is the canonical order used for
    enumerations.
    """

    members: Tuple[int, ...]
    v: int
    b: int

    @classmethod
    def from_mask(cls, mask: int, v: int, b: int) -> 'VertexSet':
        if mask >> (v + b):
            raise ValueError(f"Vertex set exceeds capacity {v + b}")
        return cls(members=tuple(bits(mask)), v=v, b=b)

    @classmethod
    def of(cls, g: IncidenceGraph, vertices) -> 'VertexSet':
        mask = 0
        for u in vertices:
            mask |= 1 << u
        return cls.from_mask(mask, g.v, g.b)

    @property
    def mask(self) -> int:
        mask = 0
        for u in self.members:
            mask |= 1 << u
        return mask

    @property
    def points(self) -> PointSet:
        return self.mask & ((1 << self.v) - 1)

    @property
    def block_indices(self) -> List[int]:
        return [u - self.v for u in self.members if u >= self.v]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, u: int) -> bool:
        return u in self.members

    def labels(self) -> List[str]:
        return [f"p{u}" if u < self.v else f"B{u - self.v}" for u in self.members]


def incidence_graph(d: Design) -> IncidenceGraph:
    """Incidence graph G_D of a validated design."""
    g = IncidenceGraph.from_blocks(d.v, d.blocks)
    assert g.is_connected(), f"Incidence graph of {d} is disconnected"
    return g


def pencil(d: Design, x: int) -> int:
    """Bitset over block indices of the blocks through point x."""
    if not 0 <= x < d.v:
        raise IndexError(f"Point {x} out of range 0..{d.v - 1}")
    mask = 0
    for j, blk in enumerate(d.blocks):
        if blk >> x & 1:
            mask |= 1 << j
    return mask


def blocks_meeting(d: Design, P: PointSet) -> int:
    """L(P): block-index bitset of blocks with B ∩ P nonempty."""
    mask = 0
    for j, blk in enumerate(d.blocks):
        if blk & P:
            mask |= 1 << j
    return mask


def blocks_avoiding(d: Design, P: PointSet) -> int:
    """L̂(P): block-index bitset of blocks disjoint from P."""
    return ((1 << d.b) - 1) & ~blocks_meeting(d, P)


def neat_closure(d: Design, P: PointSet) -> VertexSet:
    """I_P = P ∪ L̂(P) as a vertex set."""
    return VertexSet.from_mask(P | blocks_avoiding(d, P) << d.v, d.v, d.b)


def project_points(S: VertexSet) -> PointSet:
    """π(S), the point part of S."""
    return S.points


def dominated_by(g: IncidenceGraph, mask: int) -> int:
    covered = 0
    for u in bits(mask):
        covered |= g.closed_nbhd[u]
    return covered


def is_dominating(g: IncidenceGraph, S: VertexSet) -> bool:
    return dominated_by(g, S.mask) == g.all_vertices


def is_neat(d: Design, S: VertexSet) -> bool:
    return S == neat_closure(d, project_points(S))


def external_private_neighbours(g: IncidenceGraph, S: VertexSet, u: int) -> int:
    """Vertices outside S whose only neighbour in S is u.

    Args:
        g: Incidence graph
        S: Vertex set containing u
        u: Member of S

    Returns:
        Bitset of external private neighbours of u
    """
    if u not in S:
        raise ValueError(f"Vertex {g.label(u)} is not in the set")
    others = dominated_by(g, S.mask & ~(1 << u))
    return g.closed_nbhd[u] & ~S.mask & ~others


def every_member_has_private_neighbour(g: IncidenceGraph, S: VertexSet) -> bool:
    return all(external_private_neighbours(g, S, u) for u in S)
