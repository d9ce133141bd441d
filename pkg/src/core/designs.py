"""Construction, validation and serialization of 2-(v,k,lambda) designs.

Blocks are stored as integer bitsets over point indices (bit i set means
point i lies in the block). Every constructor returns a design in canonical
form: points keep constructor order and blocks are sorted by their point
lists.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .finite_field import DEFAULT_MAX_ORDER, elements, field_of_order

logger = logging.getLogger(__name__)

# A PointSet is a bitset over the points 0..v-1 of one design.
PointSet = int


class DesignValidationError(ValueError):
    """Raised when a block list is not a 2-design."""

    def __init__(self, message: str, pair: Optional[Tuple[int, int]] = None,
                 coverage: Optional[int] = None):
        super().__init__(message)
        self.pair = pair
        self.coverage = coverage


class DesignParseError(DesignValidationError):
    """Raised for malformed design files; carries the offending line number."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(prefix + message)
        self.line_no = line_no


def bits(mask: int) -> Iterator[int]:
    """Indices of set bits in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def point_set(points: Iterable[int]) -> PointSet:
    """Bitset with the given point indices."""
    mask = 0
    for x in points:
        mask |= 1 << x
    return mask


@dataclass(frozen=True)
class DesignParams:
    """Validated parameters of a 2-(v,k,lambda) design."""

    v: int
    k: int
    lam: int
    b: int
    r: int

    def as_tuple(self) -> Tuple[int, int, int, int, int]:
        return (self.v, self.k, self.lam, self.b, self.r)

    def to_dict(self) -> Dict[str, int]:
        return {'v': self.v, 'k': self.k, 'lambda': self.lam, 'b': self.b, 'r': self.r}

    def __str__(self) -> str:
        return f"2-({self.v},{self.k},{self.lam}) b={self.b} r={self.r}"


@dataclass(frozen=True)
class Design:
    """A validated 2-design in canonical form."""

    v: int
    blocks: Tuple[int, ...]
    params: DesignParams
    name: str = field(default='', compare=False)

    @property
    def b(self) -> int:
        return len(self.blocks)

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def all_points(self) -> PointSet:
        return (1 << self.v) - 1

    def block_points(self, j: int) -> List[int]:
        return list(bits(self.blocks[j]))

    def has_repeated_blocks(self) -> bool:
        return len(set(self.blocks)) != len(self.blocks)

    def __str__(self) -> str:
        label = f"{self.name} " if self.name else ""
        return f"{label}{self.params}"


@dataclass(frozen=True)
class ResidualDesign:
    """Res(X, B, B0) together with the index maps back to the parent design."""

    design: Design
    removed_block: int
    point_map: Tuple[int, ...]
    block_map: Tuple[int, ...]


def _block_key(mask: int) -> Tuple[int, ...]:
    return tuple(bits(mask))


def validate(v: int, blocks: Sequence[int]) -> DesignParams:
    """Check that a block list forms a 2-design and derive its parameters.

    Lambda and r are recomputed from the raw incidences; nothing a
    constructor claims is trusted.

    Args:
        v: Number of points
        blocks: Block bitsets

    Returns:
        Validated DesignParams

    Raises:
        DesignValidationError: On non-constant block size, a pair covered the
            wrong number of times, non-constant replication, or b < v
    """
    if v < 2:
        raise DesignValidationError(f"Need at least 2 points, got {v}")
    if not blocks:
        raise DesignValidationError("Empty block list")

    full = (1 << v) - 1
    k = None
    for j, block in enumerate(blocks):
        if block & ~full:
            raise DesignValidationError(f"Block {j} contains points outside 0..{v - 1}")
        size = block.bit_count()
        if k is None:
            k = size
        elif size != k:
            raise DesignValidationError(f"Block {j} has size {size}, expected {k}")
    if not 2 <= k <= v:
        raise DesignValidationError(f"Block size {k} outside [2, {v}]")

    # pencils as bitsets over block indices
    pencils = [0] * v
    for j, block in enumerate(blocks):
        for x in bits(block):
            pencils[x] |= 1 << j

    lam = (pencils[0] & pencils[1]).bit_count()
    if lam < 1:
        raise DesignValidationError("Points 0 and 1 share no block", pair=(0, 1), coverage=0)
    for x in range(v):
        for y in range(x + 1, v):
            coverage = (pencils[x] & pencils[y]).bit_count()
            if coverage != lam:
                raise DesignValidationError(
                    f"Pair coverage mismatch: pair ({x}, {y}) lies in {coverage} blocks, "
                    f"expected {lam}",
                    pair=(x, y), coverage=coverage,
                )

    r = pencils[0].bit_count()
    for x in range(1, v):
        if pencils[x].bit_count() != r:
            raise DesignValidationError(
                f"Point {x} lies in {pencils[x].bit_count()} blocks, expected {r}")

    b = len(blocks)
    if lam * (v - 1) % (k - 1) or lam * (v - 1) // (k - 1) != r:
        raise DesignValidationError(f"Replication {r} != lambda(v-1)/(k-1) for ({v},{k},{lam})")
    if b * k != v * r:
        raise DesignValidationError(f"bk = {b * k} differs from vr = {v * r}")
    if b < v:
        raise DesignValidationError(f"Fisher inequality violated: b = {b} < v = {v}")

    return DesignParams(v=v, k=k, lam=lam, b=b, r=r)


def make_design(v: int, blocks: Iterable[int], name: str = '') -> Design:
    """Canonicalize and validate a block list."""
    ordered = tuple(sorted(blocks, key=_block_key))
    params = validate(v, ordered)
    logger.debug("Validated %s %s", name or 'design', params)
    return Design(v=v, blocks=ordered, params=params, name=name)


def is_symmetric(d: Design) -> bool:
    return d.params.b == d.params.v


def block_intersection_sizes(d: Design) -> List[int]:
    """Sorted distinct sizes of B ∩ C over all pairs of block positions."""
    sizes = set()
    for i in range(d.b):
        for j in range(i + 1, d.b):
            sizes.add((d.blocks[i] & d.blocks[j]).bit_count())
    return sorted(sizes)


def _require_symmetric(d: Design, operation: str) -> None:
    if not is_symmetric(d):
        raise DesignValidationError(
            f"{operation} needs a symmetric design, got b = {d.params.b}, v = {d.params.v}")


def projective_plane(q: int, max_order: int = DEFAULT_MAX_ORDER) -> Design:
    """PG(2,q) as a 2-(q^2+q+1, q+1, 1) design.

    Points are the nonzero vectors of GF(q)^3 whose first nonzero coordinate
    is 1; each block collects the points of one 2-dimensional subspace, i.e.
    the zeros of a normalized linear form.
    """
    f = field_of_order(q, max_order)
    add, mul = f.add_table, f.mul_table
    vals = [e.index for e in elements(f)]

    points = [(1, a, c) for a in vals for c in vals]
    points += [(0, 1, c) for c in vals]
    points.append((0, 0, 1))

    blocks = []
    for form in points:
        mask = 0
        for i, x in enumerate(points):
            dot = add[add[mul[form[0]][x[0]]][mul[form[1]][x[1]]]][mul[form[2]][x[2]]]
            if dot == 0:
                mask |= 1 << i
        blocks.append(mask)
    return make_design(len(points), blocks, name=f"PG(2,{q})")


def affine_plane(q: int, max_order: int = DEFAULT_MAX_ORDER) -> Design:
    """AG(2,q) as a 2-(q^2, q, 1) design.

    Point (x, y) has index x*q + y; blocks are the lines y = mx + c and the
    verticals x = c.
    """
    f = field_of_order(q, max_order)
    add, mul = f.add_table, f.mul_table

    blocks = []
    for m in range(q):
        for c in range(q):
            blocks.append(point_set(x * q + add[mul[m][x]][c] for x in range(q)))
    for c in range(q):
        blocks.append(point_set(c * q + y for y in range(q)))
    return make_design(q * q, blocks, name=f"AG(2,{q})")


def cyclic_design(v: int, base_blocks: Sequence[Iterable[int]], name: str = '') -> Design:
    """Develop base blocks modulo v.

    Short orbits contribute each distinct translate once.

    Args:
        v: Modulus (number of points)
        base_blocks: Base blocks as iterables of residues

    Returns:
        The developed design

    Raises:
        DesignValidationError: If the translates do not form a 2-design
    """
    if v < 3:
        raise DesignValidationError(f"Cyclic development needs v >= 3, got {v}")
    blocks = []
    for base in base_blocks:
        base = sorted(set(base))
        if any(not 0 <= x < v for x in base):
            raise DesignValidationError(f"Base block {base} not contained in 0..{v - 1}")
        if not 2 <= len(base) < v:
            raise DesignValidationError(f"Base block {base} must have between 2 and {v - 1} points")
        orbit = []
        for shift in range(v):
            translate = point_set((x + shift) % v for x in base)
            if translate not in orbit:
                orbit.append(translate)
        blocks.extend(orbit)
    return make_design(v, blocks, name=name or f"cyclic({v})")


def complement(d: Design) -> Design:
    """Replace every block B by X \\ B: a 2-(v, v-k, b-2r+lambda) design."""
    p = d.params
    if p.v - p.k < 2:
        raise DesignValidationError(f"Complement needs v - k >= 2, got {p.v - p.k}")
    result = make_design(d.v, (d.all_points & ~blk for blk in d.blocks),
                         name=f"complement({d.name})" if d.name else '')
    assert result.params.lam == p.b - 2 * p.r + p.lam
    return result


def residual(d: Design, b0: int) -> ResidualDesign:
    """Res(X, B, B0): delete block b0 and its points.

    Repeated traces are kept as separate blocks.

    Args:
        d: Symmetric design
        b0: Index of the block to remove

    Returns:
        ResidualDesign with maps from new to parent indices

    Raises:
        DesignValidationError: If d is not symmetric or b0 is not a block index
    """
    _require_symmetric(d, "Residual")
    if not 0 <= b0 < d.b:
        raise DesignValidationError(f"Block index {b0} outside 0..{d.b - 1}")

    removed = d.blocks[b0]
    point_map = tuple(x for x in range(d.v) if not removed >> x & 1)
    new_index = {old: new for new, old in enumerate(point_map)}

    traces = []
    for j, blk in enumerate(d.blocks):
        if j == b0:
            continue
        traces.append((point_set(new_index[x] for x in bits(blk & ~removed)), j))
    traces.sort(key=lambda t: (_block_key(t[0]), t[1]))

    name = f"Res({d.name},{b0})" if d.name else ''
    design = make_design(len(point_map), (t[0] for t in traces), name=name)
    if design.has_repeated_blocks():
        logger.info("Residual %s keeps repeated blocks", name or b0)
    return ResidualDesign(
        design=design,
        removed_block=b0,
        point_map=point_map,
        block_map=tuple(t[1] for t in traces),
    )


@dataclass(frozen=True)
class DualDesign:
    """The dual design together with the index maps back to the parent design."""

    design: Design
    point_map: Tuple[int, ...]
    block_map: Tuple[int, ...]

    def block_of_point(self, x: int) -> int:
        """Dual block index of parent point x."""
        return self.block_map.index(x)


def dual_with_maps(d: Design) -> DualDesign:
    """Swap points and blocks, keeping track of where everything went.

    Point j of the dual is block j of d. Block i of the dual is the pencil of
    parent point block_map[i].
    """
    _require_symmetric(d, "Dual")
    pencils = [0] * d.v
    for j, blk in enumerate(d.blocks):
        for x in bits(blk):
            pencils[x] |= 1 << j
    order = sorted(range(d.v), key=lambda x: (_block_key(pencils[x]), x))
    design = make_design(d.b, (pencils[x] for x in order),
                         name=f"dual({d.name})" if d.name else '')
    return DualDesign(design=design, point_map=tuple(range(d.b)), block_map=tuple(order))


def dual(d: Design) -> Design:
    """Swap points and blocks: new point j's pencil is old block j."""
    return dual_with_maps(d).design


def relabel(d: Design, mapping: Sequence[int], name: str = '') -> Design:
    """Rename point x to mapping[x] and return the canonical form.

    dual is an involution up to this relabelling:
    relabel(dual(dual(d)), dual_with_maps(d).block_map) == d.
    """
    if sorted(mapping) != list(range(d.v)):
        raise DesignValidationError(f"Relabelling is not a permutation of 0..{d.v - 1}")
    return make_design(d.v, (point_set(mapping[x] for x in bits(blk)) for blk in d.blocks),
                       name=name or d.name)


def encode(d: Design) -> str:
    """Serialize to the text format: header `v k lambda b`, then one block per line."""
    p = d.params
    lines = [f"{p.v} {p.k} {p.lam} {p.b}"]
    lines.extend(' '.join(str(x) for x in bits(blk)) for blk in d.blocks)
    return '\n'.join(lines) + '\n'


def decode(text: str, name: str = '') -> Design:
    """Parse the text format and validate the result.

    Raises:
        DesignParseError: On malformed lines (with line number) or when the
            stated parameters disagree with the blocks
    """
    header = None
    blocks: List[int] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        try:
            numbers = [int(tok) for tok in line.split()]
        except ValueError:
            raise DesignParseError(f"non-integer token in {raw.strip()!r}", line_no) from None

        if header is None:
            if len(numbers) != 4:
                raise DesignParseError("header must read 'v k lambda b'", line_no)
            header = numbers
            v, k = header[0], header[1]
            continue

        if len(blocks) == header[3]:
            raise DesignParseError(f"more than {header[3]} blocks", line_no)
        if len(numbers) != k:
            raise DesignParseError(f"block has {len(numbers)} points, header says k = {k}", line_no)
        if any(b <= a for a, b in zip(numbers, numbers[1:])):
            raise DesignParseError("block points must be strictly increasing", line_no)
        if numbers[0] < 0 or numbers[-1] >= v:
            raise DesignParseError(f"point index outside 0..{v - 1}", line_no)
        blocks.append(point_set(numbers))

    if header is None:
        raise DesignParseError("missing header")
    if len(blocks) != header[3]:
        raise DesignParseError(f"expected {header[3]} blocks, found {len(blocks)}")
    used = max(blk.bit_length() for blk in blocks) if blocks else 0
    if header[0] != used:
        raise DesignParseError(f"header says v = {header[0]}, blocks use points 0..{used - 1}")

    d = make_design(header[0], blocks, name=name)
    if d.params.lam != header[2]:
        raise DesignParseError(f"header says lambda = {header[2]}, blocks give {d.params.lam}")
    return d


def load_design(path) -> Design:
    path = Path(path)
    return decode(path.read_text(encoding='utf-8'), name=path.stem)


def save_design(d: Design, path) -> None:
    Path(path).write_text(encode(d), encoding='utf-8')
