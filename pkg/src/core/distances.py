"""
Interleaving and bottleneck distances between bipath modules.

Zigzag bars extend to block modules over U = {(c, d) : c <= d}, ordered by
(c, d) <= (c', d') iff c >= c' and d <= d'. The epsilon shift moves a point
to (c - eps, d + eps). Bipath arc codes become orbits of blocks under the
translation by the period N, and the bottleneck distance is an equivariant
matching of those orbits.

Extended rationals: finite values are Fractions, the infinities are
math.inf and -math.inf (which compare exactly with Fractions).
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from .bipath_core import ArcCode, BipathInterval, BipathModule, BipathPoset, IntervalKind, arc_code, corresponding_slice_interval
from .zigzag_core import Decoration, DecoratedInterval

logger = logging.getLogger(__name__)

ExtendedRational = Union[Fraction, float]
INF = math.inf


class DistanceError(ValueError):
    """Raised for negative epsilons, period mismatches and poset mismatches."""
    pass


def extended(value) -> ExtendedRational:
    """Normalize ints, Fractions and infinities to an extended rational."""
    if isinstance(value, float):
        if math.isinf(value):
            return value
        raise DistanceError(f"Finite floats are not exact; use a Fraction instead of {value}")
    return Fraction(value)


def format_extended(value: ExtendedRational) -> str:
    """Render as 'p/q', an integer, 'inf' or '-inf'."""
    if isinstance(value, float):
        return "inf" if value > 0 else "-inf"
    return str(value)


def parse_extended(text: str) -> ExtendedRational:
    text = text.strip()
    if text in ("inf", "+inf"):
        return INF
    if text == "-inf":
        return -INF
    return Fraction(text)


def _gap(x: ExtendedRational, y: ExtendedRational) -> ExtendedRational:
    if x == y:
        return Fraction(0)
    return abs(x - y)


# Blocks

class BlockKind(Enum):
    """Block shapes; ZERO stands for the zero module."""
    CLOSED = "cc"
    CLOSED_OPEN = "co"
    OPEN_CLOSED = "oc"
    OPEN = "oo"
    ZERO = "zero"


_KIND_FROM_DECORATION = {
    Decoration.CLOSED: BlockKind.CLOSED,
    Decoration.CLOSED_OPEN: BlockKind.CLOSED_OPEN,
    Decoration.OPEN_CLOSED: BlockKind.OPEN_CLOSED,
    Decoration.OPEN: BlockKind.OPEN,
}


@dataclass(frozen=True)
class Block:
    """
    A block of U.

    [a,b]_BL = {c <= b, d >= a}, [a,b)_BL = {a <= d < b},
    (a,b]_BL = {a < c <= b}, (a,b)_BL = {c > a, d < b}.
    """
    kind: BlockKind
    a: ExtendedRational = Fraction(0)
    b: ExtendedRational = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, 'a', extended(self.a))
        object.__setattr__(self, 'b', extended(self.b))
        if self.kind is not BlockKind.ZERO and self.a > self.b:
            raise DistanceError(f"Block endpoints out of order: {self.a} > {self.b}")

    @classmethod
    def zero(cls) -> 'Block':
        return cls(BlockKind.ZERO)

    @classmethod
    def whole(cls) -> 'Block':
        return cls(BlockKind.CLOSED, -INF, INF)

    @property
    def is_zero(self) -> bool:
        return self.kind is BlockKind.ZERO

    @property
    def span(self) -> ExtendedRational:
        return Fraction(0) if self.is_zero else self.b - self.a

    def shifted(self, delta) -> 'Block':
        """Translate both endpoints by delta."""
        if self.is_zero:
            return self
        return Block(self.kind, self.a + delta, self.b + delta)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        left = "[" if self.kind in (BlockKind.CLOSED, BlockKind.CLOSED_OPEN) else "("
        right = "]" if self.kind in (BlockKind.CLOSED, BlockKind.OPEN_CLOSED) else ")"
        return f"{left}{format_extended(self.a)},{format_extended(self.b)}{right}_BL"


def block_extend(interval: Optional[DecoratedInterval]) -> Block:
    """
    Block extension of a zigzag bar; None stands for the whole of ZZ.

    The decoration carries over verbatim: [a,b]_ZZ -> [a,b]_BL and so on.
    """
    if interval is None:
        return Block.whole()
    return Block(_KIND_FROM_DECORATION[interval.kind], interval.a, interval.b)


class _Region(NamedTuple):
    """A block-shaped subset of U whose endpoints may cross (then possibly empty)."""
    kind: BlockKind
    a: ExtendedRational
    b: ExtendedRational


def _region(block: Block) -> _Region:
    return _Region(block.kind, block.a, block.b)


def _is_empty(region: _Region) -> bool:
    if region.kind is BlockKind.ZERO:
        return True
    # an up-set {c <= b, d >= a} always meets U far enough up
    if region.kind is BlockKind.CLOSED:
        return False
    return region.a >= region.b


def _up_shift(region: _Region, eps) -> _Region:
    """{x : x shifted up by eps lies in region}."""
    kind, a, b = region
    if kind is BlockKind.CLOSED:
        return _Region(kind, a - eps, b + eps)
    if kind is BlockKind.OPEN:
        return _Region(kind, a + eps, b - eps)
    if kind is BlockKind.CLOSED_OPEN:
        return _Region(kind, a - eps, b - eps)
    if kind is BlockKind.OPEN_CLOSED:
        return _Region(kind, a + eps, b + eps)
    return region


def _intersect(first: _Region, second: _Region) -> _Region:
    return _Region(first.kind, max(first.a, second.a), min(first.b, second.b))


def _contains(outer: _Region, inner: _Region) -> bool:
    if _is_empty(inner):
        return True
    if _is_empty(outer):
        return False
    return outer.a <= inner.a and inner.b <= outer.b


def _shift_support(region: _Region, eps) -> _Region:
    """Points where the internal map M_x -> M_{x + eps} is nonzero."""
    return _intersect(region, _up_shift(region, eps))


def _hom_nonzero(source: _Region, target: _Region) -> bool:
    """
    Whether a nonzero morphism k[source] -> k[target] exists (same kind).

    Such a morphism is a scalar multiple of the map supported on the overlap.
    It is natural iff the overlap is non-empty, no point of source below the
    overlap leaves target, and no point of target above the overlap leaves
    source.
    """
    if _is_empty(source) or _is_empty(target):
        return False
    kind = source.kind
    if kind is BlockKind.CLOSED:
        # up-sets: source must sit inside target
        return _contains(target, source)
    if kind is BlockKind.OPEN:
        # down-sets: target must sit inside source
        return _contains(source, target)
    if kind is BlockKind.CLOSED_OPEN:
        # membership depends on d only, increasing upwards
        return target.a <= source.a < target.b <= source.b
    # membership depends on c only, decreasing upwards
    return source.a <= target.a < source.b <= target.b


def eps_interleaved(first: Block, second: Block, eps) -> bool:
    """
    Decide whether two block modules are eps-interleaved.

    Either both 2 eps internal maps vanish (interleave through zero maps), or
    there are nonzero canonical morphisms f: I -> J(eps), g: J -> I(eps)
    whose composites have exactly the supports of the 2 eps internal maps.

    Args:
        first: Block (or the zero block)
        second: Block (or the zero block)
        eps: Non-negative rational or math.inf

    Raises:
        DistanceError: If eps is negative
    """
    eps = extended(eps)
    if eps < 0:
        raise DistanceError(f"eps must be non-negative, got {eps}")
    if eps == INF:
        return interleaving_cost(first, second) < INF
    one, two = _region(first), _region(second)
    one_vanishes = _is_empty(_shift_support(one, 2 * eps))
    two_vanishes = _is_empty(_shift_support(two, 2 * eps))
    if one_vanishes and two_vanishes:
        return True
    if first.is_zero or second.is_zero or first.kind is not second.kind:
        return False
    one_shifted, two_shifted = _up_shift(one, eps), _up_shift(two, eps)
    if not (_hom_nonzero(one, two_shifted) and _hom_nonzero(two, one_shifted)):
        return False
    return (
        _contains(two_shifted, _shift_support(one, 2 * eps))
        and _contains(one_shifted, _shift_support(two, 2 * eps))
    )


def _deletion_threshold(block: Block) -> ExtendedRational:
    if block.is_zero:
        return Fraction(0)
    if block.kind is BlockKind.CLOSED:
        return INF
    if block.kind is BlockKind.OPEN:
        return block.span / 4
    return block.span / 2


def deletion_threshold(block: Block) -> ExtendedRational:
    """
    Least eps at which the block is eps-interleaved with zero.

    cc blocks never are; oo blocks vanish after a quarter of their span,
    co and oc blocks after half of it.
    """
    return _deletion_threshold(block)


def interleaving_cost(first: Block, second: Block) -> ExtendedRational:
    """
    Least eps at which two blocks are eps-interleaved.

    Same kinds: min(max(|a - a'|, |b - b'|), max of the deletion thresholds).
    Different kinds (or the zero block): the larger deletion threshold.
    """
    trivial = max(_deletion_threshold(first), _deletion_threshold(second))
    if first.is_zero or second.is_zero or first.kind is not second.kind:
        return trivial
    return min(max(_gap(first.a, second.a), _gap(first.b, second.b)), trivial)


# Orbits

@dataclass(frozen=True)
class OrbitBlock:
    """
    A Z-orbit of blocks: rep shifted by every multiple of period.

    The full-interval bar is its own orbit and is marked non-periodic.
    """
    rep: Block
    period: int
    periodic: bool = True
    source: Optional[BipathInterval] = None

    @property
    def kind(self) -> BlockKind:
        return self.rep.kind

    def member(self, z: int) -> Block:
        """The orbit member z up-arrow rep."""
        return self.rep.shifted(z * self.period) if self.periodic else self.rep

    def __str__(self) -> str:
        return f"{self.rep} mod {self.period}" if self.periodic else str(self.rep)


def orbit_blocks(code: ArcCode, poset: BipathPoset) -> List[OrbitBlock]:
    """
    Orbit representatives of the infinite restriction of a bipath module.

    One orbit per interval and unit of multiplicity, in canonical order.
    """
    orbits: List[OrbitBlock] = []
    for interval, mult in code.items():
        interval.validate(poset)
        if interval.kind is IntervalKind.FULL:
            orbit = OrbitBlock(Block.whole(), poset.N, periodic=False, source=interval)
        else:
            orbit = OrbitBlock(block_extend(corresponding_slice_interval(poset, interval)), poset.N, source=interval)
        orbits.extend([orbit] * mult)
    return orbits


def shift_window(first: OrbitBlock, second: OrbitBlock) -> range:
    """Shifts z with |z| <= ceil((largest span + N) / N) + 1."""
    if not (first.periodic and second.periodic):
        return range(0, 1)
    spans = [orbit.rep.span for orbit in (first, second) if orbit.rep.span < INF]
    span = max(spans, default=Fraction(0))
    bound = math.ceil(Fraction(span + first.period, first.period)) + 1
    return range(-bound, bound + 1)


def best_shift(first: OrbitBlock, second: OrbitBlock) -> Tuple[ExtendedRational, int]:
    """
    Cheapest pairing of two orbits and the shift applied to the second.

    Raises:
        DistanceError: If the periods differ
    """
    if first.periodic != second.periodic:
        return INF, 0
    if first.periodic and first.period != second.period:
        raise DistanceError(f"Orbits with periods {first.period} and {second.period} cannot be matched")
    if first.kind is not second.kind:
        return INF, 0
    best: Tuple[ExtendedRational, int] = (INF, 0)
    for z in shift_window(first, second):
        cost = interleaving_cost(first.rep, second.member(z))
        if cost < best[0] or (cost == best[0] and abs(z) < abs(best[1])):
            best = (cost, z)
    return best


def pair_cost(first: OrbitBlock, second: OrbitBlock) -> ExtendedRational:
    """Least eps at which some shift of the second orbit is eps-interleaved with the first."""
    return best_shift(first, second)[0]


def deletion_cost(orbit: OrbitBlock) -> ExtendedRational:
    return deletion_threshold(orbit.rep)


# Matching

class BipartiteGraph:
    """
    Bipartite graph with left vertices 0..num_left-1 and right vertices
    0..num_right-1.
    """

    def __init__(self, num_left: int, num_right: int, edges: Sequence[Tuple[int, int]]):
        self.num_left = num_left
        self.num_right = num_right
        self.adjacent: List[List[int]] = [[] for _ in range(num_left)]
        for u, v in edges:
            if not (0 <= u < num_left and 0 <= v < num_right):
                raise DistanceError(f"Edge ({u}, {v}) leaves the graph")
            if v not in self.adjacent[u]:
                self.adjacent[u].append(v)


class HopcroftKarp:
    """Maximum-cardinality matching by shortest augmenting paths."""

    NIL = -1

    def __init__(self, graph: BipartiteGraph):
        self.graph = graph
        self.match_left = [self.NIL] * graph.num_left
        self.match_right = [self.NIL] * graph.num_right
        self.layer: Dict[int, int] = {}

    def _build_layers(self) -> bool:
        unreachable = self.graph.num_left + 1
        queue: deque = deque()
        for u in range(self.graph.num_left):
            if self.match_left[u] == self.NIL:
                self.layer[u] = 0
                queue.append(u)
            else:
                self.layer[u] = unreachable
        self.layer[self.NIL] = unreachable
        while queue:
            u = queue.popleft()
            if self.layer[u] < self.layer[self.NIL]:
                for v in self.graph.adjacent[u]:
                    partner = self.match_right[v]
                    if self.layer[partner] == unreachable:
                        self.layer[partner] = self.layer[u] + 1
                        if partner != self.NIL:
                            queue.append(partner)
        return self.layer[self.NIL] != unreachable

    def _augment(self, u: int) -> bool:
        if u == self.NIL:
            return True
        for v in self.graph.adjacent[u]:
            partner = self.match_right[v]
            if self.layer[partner] == self.layer[u] + 1 and self._augment(partner):
                self.match_right[v] = u
                self.match_left[u] = v
                return True
        self.layer[u] = self.graph.num_left + 1
        return False

    def __call__(self) -> List[Tuple[int, int]]:
        self.match_left = [self.NIL] * self.graph.num_left
        self.match_right = [self.NIL] * self.graph.num_right
        self.layer = {}
        while self._build_layers():
            for u in range(self.graph.num_left):
                if self.match_left[u] == self.NIL:
                    self._augment(u)
        return [(u, v) for u, v in enumerate(self.match_left) if v != self.NIL]


@dataclass
class MatchingResult:
    """
    An equivariant matching of orbit multisets at threshold epsilon.

    pairs holds (index in A, index in B, shift applied to the B orbit).
    """
    epsilon: ExtendedRational
    pairs: List[Tuple[int, int, int]] = field(default_factory=list)
    deleted_a: List[int] = field(default_factory=list)
    deleted_b: List[int] = field(default_factory=list)

    def to_dict(self, orbits_a: Sequence[OrbitBlock], orbits_b: Sequence[OrbitBlock]) -> Dict[str, object]:
        """JSON-ready form; orbit sources are rendered as interval labels."""
        def describe(orbit: OrbitBlock) -> Dict[str, object]:
            return {
                "interval": str(orbit.source) if orbit.source else None,
                "block": str(orbit.rep),
            }

        return {
            "d_B": format_extended(self.epsilon),
            "d_I": format_extended(self.epsilon),
            "matching": [
                {
                    "a": describe(orbits_a[i]),
                    "b": describe(orbits_b[j]),
                    "shift": z,
                    "cost": format_extended(interleaving_cost(orbits_a[i].rep, orbits_b[j].member(z))),
                }
                for i, j, z in self.pairs
            ],
            "unmatched_a": [describe(orbits_a[i]) for i in self.deleted_a],
            "unmatched_b": [describe(orbits_b[j]) for j in self.deleted_b],
        }


class BottleneckCalculator:
    """
    Bottleneck distance between orbit multisets.

    All pair and deletion costs are computed once; the candidate thresholds
    are binary-searched with a perfect-matching feasibility test on the
    graph that pairs every orbit either with a partner or with a diagonal copy.
    """

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def _feasible(self, threshold: ExtendedRational, costs, deletions_a, deletions_b) -> Optional[List[Tuple[int, int]]]:
        size_a, size_b = len(deletions_a), len(deletions_b)
        edges = []
        for i in range(size_a):
            for j in range(size_b):
                if costs[i][j][0] <= threshold:
                    edges.append((i, j))
            if deletions_a[i] <= threshold:
                edges.append((i, size_b + i))
        for j in range(size_b):
            if deletions_b[j] <= threshold:
                edges.append((size_a + j, j))
            for i in range(size_a):
                edges.append((size_a + j, size_b + i))
        graph = BipartiteGraph(size_a + size_b, size_a + size_b, edges)
        matching = HopcroftKarp(graph)()
        return matching if len(matching) == size_a + size_b else None

    def match(self, orbits_a: Sequence[OrbitBlock], orbits_b: Sequence[OrbitBlock]) -> MatchingResult:
        """
        Optimal equivariant matching.

        Returns:
            MatchingResult: epsilon is infinite when no finite threshold works
        """
        size_a, size_b = len(orbits_a), len(orbits_b)
        if size_a == 0 and size_b == 0:
            return MatchingResult(Fraction(0))
        costs = [[best_shift(a, b) for b in orbits_b] for a in orbits_a]
        deletions_a = [deletion_cost(a) for a in orbits_a]
        deletions_b = [deletion_cost(b) for b in orbits_b]

        candidates = {Fraction(0)}
        candidates.update(cost for row in costs for cost, _ in row if cost < INF)
        candidates.update(cost for cost in deletions_a + deletions_b if cost < INF)
        ordered = sorted(candidates)

        low, high = 0, len(ordered) - 1
        found: Optional[Tuple[ExtendedRational, List[Tuple[int, int]]]] = None
        while low <= high:
            middle = (low + high) // 2
            matching = self._feasible(ordered[middle], costs, deletions_a, deletions_b)
            if matching is not None:
                found = (ordered[middle], matching)
                high = middle - 1
            else:
                low = middle + 1
        self.logger.debug(f"Matched {size_a} against {size_b} orbits over {len(ordered)} candidate thresholds")

        if found is None:
            return MatchingResult(INF, deleted_a=list(range(size_a)), deleted_b=list(range(size_b)))
        threshold, matching = found
        result = MatchingResult(threshold)
        for u, v in sorted(matching):
            if u < size_a and v < size_b:
                result.pairs.append((u, v, costs[u][v][1]))
            elif u < size_a:
                result.deleted_a.append(u)
            elif v < size_b:
                result.deleted_b.append(v)
        return result


def bottleneck_matching(first: ArcCode, second: ArcCode, poset: BipathPoset) -> MatchingResult:
    """Optimal matching between the orbit multisets of two arc codes."""
    return BottleneckCalculator().match(orbit_blocks(first, poset), orbit_blocks(second, poset))


def bottleneck_distance(first: ArcCode, second: ArcCode, poset: BipathPoset) -> ExtendedRational:
    """
    Bottleneck distance of two arc codes over the same poset.

    Raises:
        BipathValidationError: If an interval does not belong to poset
    """
    return bottleneck_matching(first, second, poset).epsilon


def interleaving_distance(first: ArcCode, second: ArcCode, poset: BipathPoset) -> ExtendedRational:
    """Interleaving distance, equal to the bottleneck distance for bipath modules."""
    return bottleneck_distance(first, second, poset)


def common_poset(first: BipathModule, second: BipathModule) -> BipathPoset:
    """
    The poset two modules share.

    Raises:
        DistanceError: If the modules live on different posets
    """
    if first.poset != second.poset:
        raise DistanceError(
            f"Modules over B({first.poset.n}, {first.poset.m}) and "
            f"B({second.poset.n}, {second.poset.m}) cannot be compared"
        )
    return first.poset


def module_distance(first: BipathModule, second: BipathModule) -> Tuple[ExtendedRational, MatchingResult]:
    """Distance between two bipath modules and the matching realizing it."""
    poset = common_poset(first, second)
    result = bottleneck_matching(arc_code(first), arc_code(second), poset)
    return result.epsilon, result


def expand_matching(result: MatchingResult, orbits_a: Sequence[OrbitBlock], orbits_b: Sequence[OrbitBlock],
                    shifts: range) -> List[Tuple[Block, Block]]:
    """Explicit pairs of shifted blocks of a matching, one per shift w in shifts."""
    pairs = []
    for i, j, z in result.pairs:
        for w in shifts:
            pairs.append((orbits_a[i].member(w), orbits_b[j].member(w + z)))
    return pairs
