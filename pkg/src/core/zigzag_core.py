"""
Finite zigzag representations and their interval barcodes.

A zigzag shape is a path of L vertices 0..L-1 whose edges may point either
way. The alternating shape used for bipath slices has its sources at the even
vertices; line restrictions of grid modules use the all-forward shape.

Barcodes are computed from generalized ranks (the rank of the canonical map
from the limit to the colimit over a vertex range) by inclusion-exclusion.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .field_linalg import FieldSpec, FieldError, SeedLike
from ..models.data_models import IntervalMultiset

logger = logging.getLogger(__name__)


class ZigzagError(ValueError):
    """Raised for out-of-range intervals, shape mismatches and malformed points."""
    pass


class DecompositionError(RuntimeError):
    """Raised when inclusion-exclusion yields a negative or non-conserving barcode."""
    pass


# ZZ points and the linear index

def zz_index(a: int, b: int) -> int:
    """
    Linear index t of a ZZ point.

    Off-diagonal points (b+1, b) sit at t = 2b, diagonal points (a, a) at
    t = 2a - 1, so consecutive indices are neighbours in the Hasse diagram.

    Raises:
        ZigzagError: If (a, b) is not a point of ZZ
    """
    if a == b:
        return 2 * a - 1
    if a == b + 1:
        return 2 * b
    raise ZigzagError(f"({a}, {b}) is not a zigzag point: need a = b or a = b + 1")


def zz_point(t: int) -> Tuple[int, int]:
    """Inverse of zz_index."""
    if t % 2 == 0:
        return t // 2 + 1, t // 2
    return (t + 1) // 2, (t + 1) // 2


def zz_leq(first: Tuple[int, int], second: Tuple[int, int]) -> bool:
    """Order of ZZ as a subposet of Z^op x Z."""
    return first[0] >= second[0] and first[1] <= second[1]


class Decoration(Enum):
    """The four decorated interval families of ZZ."""
    CLOSED = "cc"
    CLOSED_OPEN = "co"
    OPEN_CLOSED = "oc"
    OPEN = "oo"


_BRACKETS = {
    Decoration.CLOSED: ("[", "]"),
    Decoration.CLOSED_OPEN: ("[", ")"),
    Decoration.OPEN_CLOSED: ("(", "]"),
    Decoration.OPEN: ("(", ")"),
}


@dataclass(frozen=True, order=True)
class DecoratedInterval:
    """
    An interval of ZZ in bracket notation, e.g. [a, b)_ZZ.

    [a,b] = {c <= b, d >= a}, [a,b) = {a <= d < b}, (a,b] = {a < c <= b} and
    (a,b) = {c > a, d < b}. On the linear index these are
    [2a-1, 2b-1], [2a-1, 2b-2], [2a, 2b-1] and [2a, 2b-2].
    """
    kind: Decoration
    a: int
    b: int

    def __post_init__(self):
        first, last = self.to_index_range()
        if first > last:
            raise ZigzagError(f"Empty decorated interval {self}")

    def to_index_range(self) -> Tuple[int, int]:
        """First and last linear index covered by the interval."""
        first = 2 * self.a - 1 if self.kind in (Decoration.CLOSED, Decoration.CLOSED_OPEN) else 2 * self.a
        last = 2 * self.b - 1 if self.kind in (Decoration.CLOSED, Decoration.OPEN_CLOSED) else 2 * self.b - 2
        return first, last

    @classmethod
    def from_index_range(cls, first: int, last: int) -> 'DecoratedInterval':
        """
        Decorated form of the linear index range [first, last].

        Raises:
            ZigzagError: If first > last
        """
        if first > last:
            raise ZigzagError(f"Empty index range [{first}, {last}]")
        starts_closed = first % 2 == 1
        ends_closed = last % 2 == 1
        a = (first + 1) // 2 if starts_closed else first // 2
        b = (last + 1) // 2 if ends_closed else (last + 2) // 2
        if starts_closed and ends_closed:
            kind = Decoration.CLOSED
        elif starts_closed:
            kind = Decoration.CLOSED_OPEN
        elif ends_closed:
            kind = Decoration.OPEN_CLOSED
        else:
            kind = Decoration.OPEN
        return cls(kind, a, b)

    def shifted(self, delta: int) -> 'DecoratedInterval':
        return DecoratedInterval(self.kind, self.a + delta, self.b + delta)

    def __str__(self) -> str:
        left, right = _BRACKETS[self.kind]
        return f"{left}{self.a},{self.b}{right}_ZZ"


# Shapes and representations

@dataclass(frozen=True)
class ZigzagShape:
    """
    Vertex count and edge orientations of a finite zigzag.

    Args:
        length: Number of vertices L >= 1
        forward: One flag per edge e (joining e and e+1); True means e -> e+1
    """
    length: int
    forward: Tuple[bool, ...]

    def __post_init__(self):
        if self.length < 1:
            raise ZigzagError(f"A zigzag needs at least one vertex, got {self.length}")
        if len(self.forward) != self.length - 1:
            raise ZigzagError(f"Expected {self.length - 1} edge orientations, got {len(self.forward)}")
        object.__setattr__(self, 'forward', tuple(bool(flag) for flag in self.forward))

    @classmethod
    def alternating(cls, length: int) -> 'ZigzagShape':
        """Sources at even vertices: edge e points out of whichever endpoint is even."""
        return cls(length, tuple(e % 2 == 0 for e in range(max(length - 1, 0))))

    @classmethod
    def forward_path(cls, length: int) -> 'ZigzagShape':
        """All edges point from v to v+1 (a one-parameter module)."""
        return cls(length, (True,) * max(length - 1, 0))

    def edge(self, e: int) -> Tuple[int, int]:
        """(source, target) of edge e."""
        return (e, e + 1) if self.forward[e] else (e + 1, e)

    def edges(self) -> List[Tuple[int, int]]:
        return [self.edge(e) for e in range(self.length - 1)]

    def is_source(self, v: int) -> bool:
        incoming_left = v > 0 and self.forward[v - 1]
        incoming_right = v < self.length - 1 and not self.forward[v]
        return not (incoming_left or incoming_right)


@dataclass(frozen=True, order=True)
class ZzInterval:
    """Contiguous vertex range [first, last] of a finite zigzag."""
    first: int
    last: int

    def __post_init__(self):
        if self.first < 0 or self.last < self.first:
            raise ZigzagError(f"Invalid vertex range [{self.first}, {self.last}]")

    def contains(self, v: int) -> bool:
        return self.first <= v <= self.last

    @property
    def length(self) -> int:
        return self.last - self.first + 1

    def decorated(self, origin: int = 0) -> DecoratedInterval:
        """Decorated form when vertex 0 sits at linear index origin."""
        return DecoratedInterval.from_index_range(self.first + origin, self.last + origin)

    @classmethod
    def from_decorated(cls, interval: DecoratedInterval, origin: int = 0) -> 'ZzInterval':
        first, last = interval.to_index_range()
        return cls(first - origin, last - origin)

    def __str__(self) -> str:
        return f"[{self.first}..{self.last}]"


class ZzBarcode(IntervalMultiset[ZzInterval]):
    """Multiset of vertex ranges with multiplicities."""

    def dimension_at(self, v: int) -> int:
        return sum(mult for interval, mult in self.items() if interval.contains(v))

    def conserves(self, dims: Sequence[int]) -> bool:
        """True when the bars covering every vertex add up to its dimension."""
        return all(self.dimension_at(v) == d for v, d in enumerate(dims))


@dataclass(frozen=True, eq=False)
class ZigzagRep:
    """
    A representation of a finite zigzag over GF(p).

    Args:
        shape: Zigzag shape
        field: Coefficient field
        dims: Dimension per vertex
        maps: One matrix per edge e, from its source to its target, of shape
            dims[target] x dims[source]

    Raises:
        ZigzagError: If the data does not match the shape
    """
    shape: ZigzagShape
    field: FieldSpec
    dims: Tuple[int, ...]
    maps: Tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, 'dims', tuple(int(d) for d in self.dims))
        if len(self.dims) != self.shape.length:
            raise ZigzagError(f"Expected {self.shape.length} dimensions, got {len(self.dims)}")
        if any(d < 0 for d in self.dims):
            raise ZigzagError(f"Dimensions must be non-negative: {self.dims}")
        if len(self.maps) != self.shape.length - 1:
            raise ZigzagError(f"Expected {self.shape.length - 1} edge maps, got {len(self.maps)}")
        canonical = []
        for e, matrix in enumerate(self.maps):
            source, target = self.shape.edge(e)
            expected = (self.dims[target], self.dims[source])
            matrix = np.asarray(matrix, dtype=np.int64)
            if matrix.shape != expected:
                raise ZigzagError(
                    f"Map on edge {source}->{target} has shape {matrix.shape}, expected {expected}"
                )
            canonical.append(self.field.as_matrix(matrix))
        object.__setattr__(self, 'maps', tuple(canonical))

    @property
    def length(self) -> int:
        return self.shape.length

    @classmethod
    def zero(cls, shape: ZigzagShape, field: FieldSpec) -> 'ZigzagRep':
        return cls(shape, field, (0,) * shape.length, tuple(field.zeros(0, 0) for _ in range(shape.length - 1)))

    def same_as(self, other: 'ZigzagRep') -> bool:
        """Exact equality of shape, field, dimensions and matrices."""
        return (
            self.shape == other.shape
            and self.field == other.field
            and self.dims == other.dims
            and all(np.array_equal(a, b) for a, b in zip(self.maps, other.maps))
        )


def interval_rep(shape: ZigzagShape, field: FieldSpec, interval: ZzInterval) -> ZigzagRep:
    """
    Interval representation: the field on [first, last], identities inside.

    Raises:
        ZigzagError: If the interval leaves the shape
    """
    if interval.last >= shape.length:
        raise ZigzagError(f"Interval {interval} does not fit a zigzag with {shape.length} vertices")
    dims = tuple(1 if interval.contains(v) else 0 for v in range(shape.length))
    maps = []
    for source, target in shape.edges():
        if interval.contains(source) and interval.contains(target):
            maps.append(field.identity(1))
        else:
            maps.append(field.zeros(dims[target], dims[source]))
    return ZigzagRep(shape, field, dims, tuple(maps))


def direct_sum(first: ZigzagRep, second: ZigzagRep) -> ZigzagRep:
    """
    Direct sum with block-diagonal maps.

    Raises:
        ZigzagError: If shapes or fields differ
    """
    if first.shape != second.shape or first.field != second.field:
        raise ZigzagError("Direct sum needs representations of the same shape and field")
    field = first.field
    dims = tuple(a + b for a, b in zip(first.dims, second.dims))
    maps = tuple(field.block_diag([a, b]) for a, b in zip(first.maps, second.maps))
    return ZigzagRep(first.shape, field, dims, maps)


def change_basis(rep: ZigzagRep, bases: Optional[Sequence[np.ndarray]] = None,
                 seed: SeedLike = None) -> ZigzagRep:
    """
    Isomorphic representation under a change of basis at every vertex.

    Each edge map u -> v becomes B_v . map . B_u^-1. When bases is omitted,
    random invertible matrices are drawn from seed.

    Raises:
        ZigzagError: If a basis has the wrong size or is singular
    """
    field = rep.field
    if bases is None:
        rng = np.random.default_rng(seed)
        bases = [field.random_invertible(d, rng) for d in rep.dims]
    if len(bases) != rep.length:
        raise ZigzagError(f"Expected {rep.length} bases, got {len(bases)}")
    inverses = []
    for v, basis in enumerate(bases):
        basis = field.as_matrix(basis)
        if basis.shape != (rep.dims[v], rep.dims[v]):
            raise ZigzagError(f"Basis at vertex {v} has shape {basis.shape}, expected size {rep.dims[v]}")
        try:
            inverses.append(field.inverse(basis))
        except FieldError as e:
            raise ZigzagError(f"Basis at vertex {v} is not invertible") from e
    maps = []
    for e, matrix in enumerate(rep.maps):
        source, target = rep.shape.edge(e)
        maps.append(field.mat_mul(field.as_matrix(bases[target]), field.mat_mul(matrix, inverses[source])))
    return ZigzagRep(rep.shape, field, rep.dims, tuple(maps))


def _check_range(rep: ZigzagRep, first: int, last: int) -> None:
    if first > last:
        raise ZigzagError(f"Empty vertex range [{first}, {last}]")
    if first < 0 or last >= rep.length:
        raise ZigzagError(f"Range [{first}, {last}] leaves a zigzag with {rep.length} vertices")


def generalized_rank(rep: ZigzagRep, first: int, last: int) -> int:
    """
    Rank of the canonical map from the limit to the colimit over [first, last].

    The limit is the kernel of the stacked constraint system
    {map(x_u) = x_v for every edge u -> v in range}; the colimit is the
    cokernel of the stacked relations (iota_v . map - iota_u). The canonical
    map sends a compatible family to the class of its component at first.

    Raises:
        ZigzagError: If the range is empty or leaves the shape
    """
    _check_range(rep, first, last)
    field = rep.field
    vertices = range(first, last + 1)
    offsets: Dict[int, int] = {}
    total = 0
    for v in vertices:
        offsets[v] = total
        total += rep.dims[v]
    if total == 0:
        return 0

    edges = [(e, *rep.shape.edge(e)) for e in range(first, last)]
    constraint_rows = sum(rep.dims[target] for _, _, target in edges)
    relation_cols = sum(rep.dims[source] for _, source, _ in edges)
    constraints = field.zeros(constraint_rows, total)
    relations = field.zeros(total, relation_cols)
    row = col = 0
    for e, source, target in edges:
        d_source, d_target = rep.dims[source], rep.dims[target]
        matrix = rep.maps[e]
        constraints[row:row + d_target, offsets[source]:offsets[source] + d_source] = matrix
        constraints[row:row + d_target, offsets[target]:offsets[target] + d_target] = field.negate(field.identity(d_target))
        relations[offsets[target]:offsets[target] + d_target, col:col + d_source] = matrix
        relations[offsets[source]:offsets[source] + d_source, col:col + d_source] = field.negate(field.identity(d_source))
        row += d_target
        col += d_source

    limit = field.kernel_basis(constraints)
    start = slice(offsets[first], offsets[first] + rep.dims[first])
    image = field.zeros(total, limit.shape[1])
    image[start] = limit[start]
    return field.rank(np.hstack([relations, image])) - field.rank(relations)


def _sweep_ranks(rep: ZigzagRep, start: int) -> List[int]:
    """
    Generalized ranks r[start, q] for q = start, start+1, ... until they vanish.

    The limit over [start, q] is tracked as a basis (lim_p; lim_q) of the
    relation it induces between V_start and V_q; the colimit is built as an
    iterated pushout with structure maps col_p, col_q out of V_start and V_q.
    """
    field = rep.field
    dim = rep.dims[start]
    if dim == 0:
        return []
    lim_p = lim_q = field.identity(dim)
    col_p = col_q = field.identity(dim)
    ranks = [dim]
    for e in range(start, rep.length - 1):
        if rep.dims[e + 1] == 0:
            break
        matrix = rep.maps[e]
        if rep.shape.forward[e]:
            lim_q = field.mat_mul(matrix, lim_q)
            quotient = field.left_kernel_basis(np.vstack([col_q, field.negate(matrix)]))
            colimit_dim = col_q.shape[0]
            col_p = field.mat_mul(quotient[:, :colimit_dim], col_p)
            col_q = quotient[:, colimit_dim:]
        else:
            width = lim_q.shape[1]
            solutions = field.kernel_basis(np.hstack([lim_q, field.negate(matrix)]))
            lim_p = field.mat_mul(lim_p, solutions[:width])
            lim_q = solutions[width:]
            if lim_p.shape[1] > lim_p.shape[0] + lim_q.shape[0]:
                independent = field.column_basis(np.vstack([lim_p, lim_q]))
                lim_p, lim_q = independent[:lim_p.shape[0]], independent[lim_p.shape[0]:]
            col_q = field.mat_mul(col_q, matrix)
        rank = field.rank(field.mat_mul(col_p, lim_p))
        if rank == 0:
            break
        ranks.append(rank)
    return ranks


def rank_table(rep: ZigzagRep) -> Dict[Tuple[int, int], int]:
    """All nonzero generalized ranks keyed by vertex range (first, last)."""
    table: Dict[Tuple[int, int], int] = {}
    for start in range(rep.length):
        for offset, rank in enumerate(_sweep_ranks(rep, start)):
            table[(start, start + offset)] = rank
    return table


def barcode_from_ranks(ranks: Mapping[Tuple[int, int], int], dims: Sequence[int]) -> ZzBarcode:
    """
    Inclusion-exclusion mu[p,q] = r[p,q] - r[p-1,q] - r[p,q+1] + r[p-1,q+1].

    Raises:
        DecompositionError: On a negative multiplicity or a conservation failure
    """
    counts: Dict[ZzInterval, int] = {}
    for (first, last), rank in ranks.items():
        mult = (
            rank
            - ranks.get((first - 1, last), 0)
            - ranks.get((first, last + 1), 0)
            + ranks.get((first - 1, last + 1), 0)
        )
        if mult < 0:
            raise DecompositionError(f"Negative multiplicity {mult} for range [{first}, {last}]")
        if mult:
            counts[ZzInterval(first, last)] = mult
    result = ZzBarcode(counts)
    if not result.conserves(dims):
        raise DecompositionError(f"Barcode {result} does not conserve dimensions {tuple(dims)}")
    return result


def barcode(rep: ZigzagRep) -> ZzBarcode:
    """
    Interval barcode of a zigzag representation.

    Returns:
        ZzBarcode: Bars as vertex ranges; empty for the zero representation

    Raises:
        DecompositionError: If the representation data is inconsistent
    """
    ranks = rank_table(rep)
    result = barcode_from_ranks(ranks, rep.dims)
    logger.debug(f"Zigzag of length {rep.length}: {len(ranks)} nonzero ranks, {result.total} bars")
    return result
