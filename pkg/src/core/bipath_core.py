"""
Bipath posets, their interval modules, and arc code computation.

The bipath poset B(n, m) has vertices 0..n+m-1 ordered by the two maximal
chains 0 < 1 < ... < n and 0 < n+m-1 < n+m-2 < ... < n+1 < n. A bipath module
is decomposed by restricting it along the covering map to a finite zigzag
slice, computing the slice barcode, and reading off one slice bar per bipath
interval.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .field_linalg import FieldSpec, SeedLike
from .zigzag_core import (
    Decoration,
    DecoratedInterval,
    ZigzagRep,
    ZigzagShape,
    ZzBarcode,
    ZzInterval,
    barcode,
    zz_index,
    zz_point,
)
from ..models.data_models import IntervalMultiset

logger = logging.getLogger(__name__)

Arrow = Tuple[int, int]


class BipathValidationError(ValueError):
    """Raised for invalid posets, intervals or modules."""
    pass


class CrossCheckError(RuntimeError):
    """Raised when an arc code does not re-expand to the slice barcode it came from."""
    pass


@dataclass(frozen=True)
class BipathPoset:
    """
    The bipath poset B(n, m).

    Args:
        n: Top-chain length, at least 2
        m: Bottom-chain length, at least 1 (m = 1 leaves the bottom chain
            without interior vertices)
    """
    n: int
    m: int

    def __post_init__(self):
        if self.n < 2:
            raise BipathValidationError(f"Bipath posets need n >= 2, got n = {self.n}")
        if self.m < 1:
            raise BipathValidationError(f"Bipath posets need m >= 1, got m = {self.m}")

    @property
    def N(self) -> int:
        """Period of the covering map."""
        return self.n + self.m - 1

    @property
    def size(self) -> int:
        return self.n + self.m

    @property
    def vertices(self) -> range:
        return range(self.size)

    @property
    def top_chain(self) -> List[int]:
        return list(range(self.n + 1))

    @property
    def bottom_chain(self) -> List[int]:
        return [0] + list(range(self.n + self.m - 1, self.n, -1)) + [self.n]

    def hasse_arrows(self) -> List[Arrow]:
        """Arrows in storage order: top chain ascending, then bottom chain from 0 to n."""
        top, bottom = self.top_chain, self.bottom_chain
        return list(zip(top, top[1:])) + list(zip(bottom, bottom[1:]))

    def check_vertex(self, v: int) -> None:
        if not 0 <= v < self.size:
            raise BipathValidationError(f"{v} is not a vertex of B({self.n}, {self.m})")

    def is_top_interior(self, v: int) -> bool:
        return 1 <= v <= self.n - 1

    def is_bottom_interior(self, v: int) -> bool:
        return self.n + 1 <= v <= self.n + self.m - 1

    def leq(self, u: int, v: int) -> bool:
        """Partial order of B(n, m)."""
        self.check_vertex(u)
        self.check_vertex(v)
        if u == v or u == 0 or v == self.n:
            return True
        if v == 0 or u == self.n:
            return False
        if self.is_top_interior(u) and self.is_top_interior(v):
            return u <= v
        if self.is_bottom_interior(u) and self.is_bottom_interior(v):
            return u >= v
        return False

    def chain_between(self, u: int, v: int) -> List[int]:
        """
        Vertices of a maximal chain from u up to v, inclusive.

        Raises:
            BipathValidationError: If u is not below v
        """
        if not self.leq(u, v):
            raise BipathValidationError(f"{u} is not below {v} in B({self.n}, {self.m})")
        top = self.top_chain
        chain = top if u in top and v in top else self.bottom_chain
        return chain[chain.index(u):chain.index(v) + 1]

    def is_interval(self, support: Iterable[int]) -> bool:
        """True for non-empty convex connected vertex sets."""
        support = set(support)
        if not support:
            return False
        for w in self.vertices:
            if w in support:
                continue
            if any(self.leq(u, w) for u in support) and any(self.leq(w, v) for v in support):
                return False
        # connectivity over the Hasse diagram
        reached = {min(support)}
        frontier = [min(support)]
        while frontier:
            vertex = frontier.pop()
            for a, b in self.hasse_arrows():
                for x, y in ((a, b), (b, a)):
                    if x == vertex and y in support and y not in reached:
                        reached.add(y)
                        frontier.append(y)
        return reached == support

    # Covering map and slice

    def covering_index(self, t: int) -> int:
        """Covering map on the linear index t of ZZ."""
        r = t % (2 * self.N)
        if r == 0:
            return 0
        if r <= 2 * self.n - 2:
            return (r + 1) // 2
        if r == 2 * self.n - 1:
            return self.n
        return self.n + self.m - (2 * self.N - r + 1) // 2

    @property
    def slice_origin(self) -> int:
        """Linear index of the first slice vertex, the ZZ point (-m+2, -m+1)."""
        return -2 * self.m + 2

    @property
    def slice_length(self) -> int:
        return 2 * self.n + 4 * self.m - 3

    def slice_interval(self, interval: DecoratedInterval) -> ZzInterval:
        """
        Vertex range of a decorated interval on the slice.

        Raises:
            BipathValidationError: If the interval leaves the slice
        """
        first, last = interval.to_index_range()
        first -= self.slice_origin
        last -= self.slice_origin
        if first < 0 or last >= self.slice_length:
            raise BipathValidationError(f"{interval} is not contained in the slice of B({self.n}, {self.m})")
        return ZzInterval(first, last)


def covering_vertex(poset: BipathPoset, point: Tuple[int, int]) -> int:
    """
    Image of a ZZ point under the covering map.

    Raises:
        ZigzagError: If point is not a ZZ point
    """
    return poset.covering_index(zz_index(*point))


def slice_shape(poset: BipathPoset) -> ZigzagShape:
    """Alternating shape of length 2n + 4m - 3; vertex 0 is the point (-m+2, -m+1)."""
    return ZigzagShape.alternating(poset.slice_length)


# Intervals

class IntervalKind(Enum):
    """The five interval types of a bipath poset."""
    FULL = "full"
    LEFT = "left"
    RIGHT = "right"
    TOP = "top"
    BOTTOM = "bottom"


_KIND_ORDER = {kind: rank for rank, kind in enumerate(IntervalKind)}


@dataclass(frozen=True)
class BipathInterval:
    """
    A bipath interval label.

    Left(i, j) is {z : 0 <= z <= i} united with {z : 0 <= z <= j} on the bottom
    chain (j = 0 adds nothing); Right(i, j) is {i <= z <= n} united with
    {j <= z <= n} on the bottom chain; Top(i, j) is i..j on the top chain;
    Bottom(i, j) is numerically i..j on the bottom chain, that is, from j up
    to i in the poset order.
    """
    kind: IntervalKind
    i: Optional[int] = None
    j: Optional[int] = None

    @classmethod
    def full(cls) -> 'BipathInterval':
        return cls(IntervalKind.FULL)

    @classmethod
    def left(cls, i: int, j: int) -> 'BipathInterval':
        return cls(IntervalKind.LEFT, i, j)

    @classmethod
    def right(cls, i: int, j: int) -> 'BipathInterval':
        return cls(IntervalKind.RIGHT, i, j)

    @classmethod
    def top(cls, i: int, j: int) -> 'BipathInterval':
        return cls(IntervalKind.TOP, i, j)

    @classmethod
    def bottom(cls, i: int, j: int) -> 'BipathInterval':
        return cls(IntervalKind.BOTTOM, i, j)

    def sort_key(self) -> Tuple[int, int, int]:
        return (_KIND_ORDER[self.kind], -1 if self.i is None else self.i, -1 if self.j is None else self.j)

    def __lt__(self, other: 'BipathInterval') -> bool:
        return self.sort_key() < other.sort_key()

    def validate(self, poset: BipathPoset) -> None:
        """
        Check the label constraints of this interval type.

        Raises:
            BipathValidationError: If the labels are out of range
        """
        n, m = poset.n, poset.m
        i, j = self.i, self.j
        if self.kind is IntervalKind.FULL:
            valid = i is None and j is None
        elif i is None or j is None:
            valid = False
        elif self.kind is IntervalKind.LEFT:
            valid = 0 <= i <= n - 1 and (j == 0 or n + 1 <= j <= n + m - 1)
        elif self.kind is IntervalKind.RIGHT:
            valid = 1 <= i <= n and n <= j <= n + m - 1
        elif self.kind is IntervalKind.TOP:
            valid = 1 <= i <= j <= n - 1
        else:
            valid = n + 1 <= i <= j <= n + m - 1
        if not valid:
            raise BipathValidationError(f"{self} is not an interval of B({n}, {m})")
        if not poset.is_interval(self.support(poset, validate=False)):
            raise BipathValidationError(f"Support of {self} is not convex and connected")

    def support(self, poset: BipathPoset, validate: bool = True) -> FrozenSet[int]:
        """Vertex set of the interval."""
        if validate:
            self.validate(poset)
        n, m = poset.n, poset.m
        i, j = self.i, self.j
        if self.kind is IntervalKind.FULL:
            return frozenset(poset.vertices)
        if self.kind is IntervalKind.LEFT:
            bottom = set() if j == 0 else set(range(j, n + m))
            return frozenset(set(range(0, i + 1)) | bottom)
        if self.kind is IntervalKind.RIGHT:
            return frozenset(set(range(i, n + 1)) | set(range(n, j + 1)))
        return frozenset(range(i, j + 1))

    def to_record(self, mult: int) -> Dict[str, object]:
        return {"kind": self.kind.value, "i": self.i, "j": self.j, "mult": mult}

    def __str__(self) -> str:
        if self.kind is IntervalKind.FULL:
            return "full"
        return f"{self.kind.value}({self.i},{self.j})"


def enumerate_intervals(poset: BipathPoset) -> List[BipathInterval]:
    """Every interval of the poset exactly once, in canonical order."""
    n, m = poset.n, poset.m
    bottom_labels = list(range(n + 1, n + m))
    intervals = [BipathInterval.full()]
    intervals += [BipathInterval.left(i, j) for i in range(n) for j in [0] + bottom_labels]
    intervals += [BipathInterval.right(i, j) for i in range(1, n + 1) for j in [n] + bottom_labels]
    intervals += [BipathInterval.top(i, j) for i in range(1, n) for j in range(i, n)]
    intervals += [BipathInterval.bottom(i, j) for i in bottom_labels for j in bottom_labels if i <= j]
    return sorted(intervals)


def interval_from_support(poset: BipathPoset, support: Iterable[int]) -> BipathInterval:
    """
    The interval whose vertex set is support.

    Raises:
        BipathValidationError: If support is not an interval
    """
    target = frozenset(support)
    for interval in enumerate_intervals(poset):
        if interval.support(poset, validate=False) == target:
            return interval
    raise BipathValidationError(f"{sorted(target)} is not an interval of B({poset.n}, {poset.m})")


class ArcCode(IntervalMultiset[BipathInterval]):
    """Multiset of bipath intervals with multiplicities."""

    def sort_key(self, interval: BipathInterval):
        return interval.sort_key()

    def dimension_at(self, poset: BipathPoset, v: int) -> int:
        return sum(mult for interval, mult in self.items() if v in interval.support(poset, validate=False))

    def conserves(self, poset: BipathPoset, dims: Sequence[int]) -> bool:
        return all(self.dimension_at(poset, v) == d for v, d in enumerate(dims))

    def to_records(self) -> List[Dict[str, object]]:
        return [interval.to_record(mult) for interval, mult in self.items()]


# Modules

@dataclass(frozen=True, eq=False)
class BipathModule:
    """
    A persistence module over B(n, m).

    Construction checks shapes only; commutativity of the two chains is
    checked by validate(), so that non-functorial data can still be held and
    reported.

    Args:
        poset: The bipath poset
        field: Coefficient field
        dims: Dimension per vertex
        arrows: Matrix per Hasse arrow (u, v), of shape dims[v] x dims[u]

    Raises:
        BipathValidationError: On missing arrows or shape mismatches
    """
    poset: BipathPoset
    field: FieldSpec
    dims: Tuple[int, ...]
    arrows: Mapping[Arrow, np.ndarray]

    def __post_init__(self):
        object.__setattr__(self, 'dims', tuple(int(d) for d in self.dims))
        if len(self.dims) != self.poset.size:
            raise BipathValidationError(f"Expected {self.poset.size} dimensions, got {len(self.dims)}")
        if any(d < 0 for d in self.dims):
            raise BipathValidationError(f"Dimensions must be non-negative: {self.dims}")
        expected_arrows = self.poset.hasse_arrows()
        if set(self.arrows) != set(expected_arrows):
            raise BipathValidationError(
                f"Arrow maps must cover exactly {expected_arrows}, got {sorted(self.arrows)}"
            )
        canonical = {}
        for u, v in expected_arrows:
            matrix = np.asarray(self.arrows[(u, v)], dtype=np.int64)
            if matrix.shape != (self.dims[v], self.dims[u]):
                raise BipathValidationError(
                    f"Map {u}->{v} has shape {matrix.shape}, expected {(self.dims[v], self.dims[u])}"
                )
            canonical[(u, v)] = self.field.as_matrix(matrix)
        object.__setattr__(self, 'arrows', canonical)

    @classmethod
    def zero(cls, poset: BipathPoset, field: FieldSpec) -> 'BipathModule':
        return cls(poset, field, (0,) * poset.size, {arrow: field.zeros(0, 0) for arrow in poset.hasse_arrows()})

    def structure_map(self, u: int, v: int) -> np.ndarray:
        """
        Composite map M(u -> v) along a chain through u and v.

        Raises:
            BipathValidationError: If u is not below v
        """
        chain = self.poset.chain_between(u, v)
        result = self.field.identity(self.dims[u])
        for a, b in zip(chain, chain[1:]):
            result = self.field.mat_mul(self.arrows[(a, b)], result)
        return result

    def validate(self) -> None:
        """
        Check that both chains compose to the same map 0 -> n.

        Raises:
            BipathValidationError: If the two composites differ
        """
        top_chain, bottom_chain = self.poset.top_chain, self.poset.bottom_chain
        top = self.field.identity(self.dims[0])
        for a, b in zip(top_chain, top_chain[1:]):
            top = self.field.mat_mul(self.arrows[(a, b)], top)
        bottom = self.field.identity(self.dims[0])
        for a, b in zip(bottom_chain, bottom_chain[1:]):
            bottom = self.field.mat_mul(self.arrows[(a, b)], bottom)
        if not np.array_equal(top, bottom):
            raise BipathValidationError(
                "Commutativity violated: the top and bottom chain composites 0 -> "
                f"{self.poset.n} differ"
            )

    def same_as(self, other: 'BipathModule') -> bool:
        return (
            self.poset == other.poset
            and self.field == other.field
            and self.dims == other.dims
            and all(np.array_equal(self.arrows[a], other.arrows[a]) for a in self.poset.hasse_arrows())
        )


def interval_module(poset: BipathPoset, field: FieldSpec, interval: BipathInterval) -> BipathModule:
    """
    Interval module k I: the field on the support, identities inside.

    Raises:
        BipathValidationError: If the interval is invalid for poset
    """
    support = interval.support(poset)
    dims = tuple(1 if v in support else 0 for v in poset.vertices)
    arrows = {}
    for u, v in poset.hasse_arrows():
        if u in support and v in support:
            arrows[(u, v)] = field.identity(1)
        else:
            arrows[(u, v)] = field.zeros(dims[v], dims[u])
    return BipathModule(poset, field, dims, arrows)


def direct_sum_modules(modules: Sequence[BipathModule], poset: BipathPoset, field: FieldSpec) -> BipathModule:
    """Direct sum with block-diagonal arrow maps."""
    if not modules:
        return BipathModule.zero(poset, field)
    dims = tuple(sum(module.dims[v] for module in modules) for v in poset.vertices)
    arrows = {arrow: field.block_diag([module.arrows[arrow] for module in modules]) for arrow in poset.hasse_arrows()}
    return BipathModule(poset, field, dims, arrows)


def change_module_basis(module: BipathModule, seed: SeedLike = None) -> BipathModule:
    """Isomorphic module under random invertible bases at every vertex."""
    field = module.field
    rng = np.random.default_rng(seed)
    bases = [field.random_invertible(d, rng) for d in module.dims]
    inverses = [field.inverse(basis) for basis in bases]
    arrows = {
        (u, v): field.mat_mul(bases[v], field.mat_mul(matrix, inverses[u]))
        for (u, v), matrix in module.arrows.items()
    }
    return BipathModule(module.poset, field, module.dims, arrows)


def plant_random(poset: BipathPoset, field: FieldSpec, max_summands: int,
                 seed: SeedLike = None) -> Tuple[BipathModule, ArcCode]:
    """
    Random module with a known decomposition.

    Draws between 0 and max_summands intervals uniformly, sums their interval
    modules and conjugates by random invertible bases at each vertex.

    Returns:
        Tuple of the module and its planted arc code
    """
    if max_summands < 0:
        raise BipathValidationError(f"max_summands must be non-negative, got {max_summands}")
    rng = np.random.default_rng(seed)
    catalogue = enumerate_intervals(poset)
    count = int(rng.integers(0, max_summands + 1))
    chosen = [catalogue[int(k)] for k in rng.integers(0, len(catalogue), size=count)]
    summands = [interval_module(poset, field, interval) for interval in chosen]
    module = change_module_basis(direct_sum_modules(summands, poset, field), rng)
    return module, ArcCode.from_intervals(chosen)


# Restriction along the covering map

def restrict_to_window(module: BipathModule, t_first: int, t_last: int) -> ZigzagRep:
    """
    Restriction along the covering map to the ZZ points with linear index in [t_first, t_last].

    Raises:
        BipathValidationError: If the module fails validation or the window is empty
    """
    module.validate()
    if t_first > t_last:
        raise BipathValidationError(f"Empty window [{t_first}, {t_last}]")
    poset = module.poset
    length = t_last - t_first + 1
    shape = ZigzagShape(length, tuple((t_first + e) % 2 == 0 for e in range(length - 1)))
    labels = [poset.covering_index(t_first + v) for v in range(length)]
    dims = tuple(module.dims[label] for label in labels)
    maps = tuple(module.structure_map(labels[source], labels[target]) for source, target in shape.edges())
    return ZigzagRep(shape, module.field, dims, maps)


def restrict_to_slice(module: BipathModule) -> ZigzagRep:
    """
    Restriction to the slice (-m+1, n+m)_ZZ with 2n + 4m - 3 vertices.

    Raises:
        BipathValidationError: If the module fails validation
    """
    poset = module.poset
    return restrict_to_window(module, poset.slice_origin, poset.slice_origin + poset.slice_length - 1)


def corresponding_slice_interval(poset: BipathPoset, interval: BipathInterval) -> DecoratedInterval:
    """Slice bar whose multiplicity equals the multiplicity of interval."""
    n, m = poset.n, poset.m
    i, j = interval.i, interval.j
    kind = interval.kind
    if kind is IntervalKind.FULL:
        return DecoratedInterval(Decoration.OPEN, -m + 1, n + m)
    if kind is IntervalKind.LEFT:
        if j == 0:
            return DecoratedInterval(Decoration.OPEN, 0, i + 1)
        return DecoratedInterval(Decoration.OPEN, -n - m + j, i + 1)
    if kind is IntervalKind.RIGHT:
        return DecoratedInterval(Decoration.CLOSED, i, j)
    if kind is IntervalKind.TOP:
        return DecoratedInterval(Decoration.CLOSED_OPEN, i, j + 1)
    return DecoratedInterval(Decoration.OPEN_CLOSED, i - 1, j)


def slice_restriction(poset: BipathPoset, interval: BipathInterval) -> List[DecoratedInterval]:
    """
    Slice barcode of the interval module k I.

    The first entry is the corresponding bar; Left, Right (j != n) and Bottom
    intervals also wrap around the covering map and leave a companion bar.
    Left(i, 0) leaves the single last slice vertex, which covers vertex 0.
    """
    n, m = poset.n, poset.m
    i, j = interval.i, interval.j
    kind = interval.kind
    if kind is IntervalKind.FULL:
        return [DecoratedInterval(Decoration.OPEN, -m + 1, n + m)]
    if kind is IntervalKind.LEFT and j == 0:
        return [DecoratedInterval(Decoration.OPEN, 0, i + 1), DecoratedInterval(Decoration.OPEN, n + m - 1, n + m)]
    if kind is IntervalKind.LEFT:
        return [DecoratedInterval(Decoration.OPEN, -n - m + j, i + 1), DecoratedInterval(Decoration.OPEN, j - 1, n + m)]
    if kind is IntervalKind.RIGHT and j == n:
        return [DecoratedInterval(Decoration.CLOSED, i, j)]
    if kind is IntervalKind.RIGHT:
        return [
            DecoratedInterval(Decoration.CLOSED, i, j),
            DecoratedInterval(Decoration.OPEN_CLOSED, -m + 1, -n - m + j + 1),
        ]
    if kind is IntervalKind.TOP:
        return [DecoratedInterval(Decoration.CLOSED_OPEN, i, j + 1)]
    return [
        DecoratedInterval(Decoration.OPEN_CLOSED, i - 1, j),
        DecoratedInterval(Decoration.OPEN_CLOSED, -n - m + i, -n - m + j + 1),
    ]


def periodic_restriction(poset: BipathPoset, interval: BipathInterval, t_first: int, t_last: int) -> ZzBarcode:
    """
    Bars of the infinite restriction of k I that meet a window, clipped to it.

    Every bar of the infinite restriction is a translate, by a multiple of N,
    of the corresponding slice bar (the full interval gives the whole line).
    Bars are returned as vertex ranges relative to t_first.
    """
    if interval.kind is IntervalKind.FULL:
        return ZzBarcode({ZzInterval(0, t_last - t_first): 1})
    period = 2 * poset.N
    first, last = corresponding_slice_interval(poset, interval).to_index_range()
    lowest = (t_first - last) // period - 1
    highest = (t_last - first) // period + 1
    counts: Dict[ZzInterval, int] = {}
    for k in range(lowest, highest + 1):
        lo, hi = max(first + k * period, t_first), min(last + k * period, t_last)
        if lo <= hi:
            bar = ZzInterval(lo - t_first, hi - t_first)
            counts[bar] = counts.get(bar, 0) + 1
    return ZzBarcode(counts)


def expected_slice_barcode(poset: BipathPoset, code: ArcCode) -> ZzBarcode:
    """Slice barcode implied by an arc code, through the restriction list."""
    counts: Dict[ZzInterval, int] = {}
    for interval, mult in code.items():
        for bar in slice_restriction(poset, interval):
            key = poset.slice_interval(bar)
            counts[key] = counts.get(key, 0) + mult
    return ZzBarcode(counts)


class ArcCodeCalculator:
    """
    Arc code computation through the finite zigzag slice.

    Each bipath interval corresponds to exactly one slice bar; the
    multiplicity of the interval is the multiplicity of that bar. The
    resulting arc code is expanded back to a slice barcode and compared with
    the computed one, so any index mismatch surfaces as a CrossCheckError.
    """

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def calculate(self, module: BipathModule) -> ArcCode:
        """
        Decompose a bipath module.

        Args:
            module: Valid bipath module

        Returns:
            ArcCode: Intervals with multiplicities

        Raises:
            BipathValidationError: If the module is not a functor
            CrossCheckError: If the read-off does not account for the slice barcode
        """
        poset = module.poset
        slice_rep = restrict_to_slice(module)
        slice_code = barcode(slice_rep)

        counts: Dict[BipathInterval, int] = {}
        for interval in enumerate_intervals(poset):
            bar = poset.slice_interval(corresponding_slice_interval(poset, interval))
            mult = slice_code.multiplicity(bar)
            if mult:
                counts[interval] = mult
        code = ArcCode(counts)

        expected = expected_slice_barcode(poset, code)
        if expected != slice_code:
            raise CrossCheckError(
                f"Arc code {code} re-expands to {expected}, but the slice barcode is {slice_code}"
            )
        if not code.conserves(poset, module.dims):
            raise CrossCheckError(f"Arc code {code} does not conserve dimensions {module.dims}")

        self.logger.debug(
            f"B({poset.n}, {poset.m}): slice of {slice_rep.length} vertices, "
            f"{slice_code.total} bars, {code.total} intervals"
        )
        return code


def arc_code(module: BipathModule) -> ArcCode:
    """Arc code of a bipath module; see ArcCodeCalculator."""
    return ArcCodeCalculator().calculate(module)


def slice_point_labels(poset: BipathPoset) -> List[Tuple[Tuple[int, int], int]]:
    """(ZZ point, bipath vertex) for every slice vertex, in order."""
    origin = poset.slice_origin
    return [(zz_point(origin + v), poset.covering_index(origin + v)) for v in range(poset.slice_length)]
