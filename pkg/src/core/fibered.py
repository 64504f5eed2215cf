"""
Two-parameter grid modules and their fibered invariants.

A grid module assigns a vector space to every point (row, col) of a finite
rows x cols grid, with maps rightward (row, col) -> (row, col + 1) and upward
(row, col) -> (row + 1, col). Coordinates are 0-based and ordered
coordinatewise.

The fibered arc code pulls a grid module back along order-preserving maps
from bipath posets and decomposes the result; the fibered barcode restricts it
to monotone paths standing in for affine lines.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .bipath_core import ArcCode, BipathModule, BipathPoset, arc_code
from .field_linalg import FieldSpec
from .zigzag_core import ZigzagRep, ZigzagShape, ZzBarcode, barcode

logger = logging.getLogger(__name__)

GridPoint = Tuple[int, int]


class GridValidationError(ValueError):
    """Raised for malformed or non-commuting grid modules."""
    pass


class EmbeddingError(ValueError):
    """Raised for embeddings or paths that are not monotone or leave the grid."""
    pass


class BifiltrationError(ValueError):
    """Raised for edges with absent endpoints or grades below their endpoints."""
    pass


def point_leq(p: GridPoint, q: GridPoint) -> bool:
    return p[0] <= q[0] and p[1] <= q[1]


@dataclass(frozen=True, eq=False)
class GridModule:
    """
    A persistence module over a finite rows x cols grid.

    Args:
        rows: Number of rows
        cols: Number of columns
        field: Coefficient field
        dims: dims[r][c] is the dimension at (r, c)
        hmaps: Matrix per point (r, c) with c < cols - 1, mapping to (r, c + 1)
        vmaps: Matrix per point (r, c) with r < rows - 1, mapping to (r + 1, c)

    Raises:
        GridValidationError: On missing maps or shape mismatches
    """
    rows: int
    cols: int
    field: FieldSpec
    dims: Tuple[Tuple[int, ...], ...]
    hmaps: Mapping[GridPoint, np.ndarray]
    vmaps: Mapping[GridPoint, np.ndarray]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise GridValidationError(f"Grid must be at least 1x1, got {self.rows}x{self.cols}")
        dims = tuple(tuple(int(d) for d in row) for row in self.dims)
        if len(dims) != self.rows or any(len(row) != self.cols for row in dims):
            raise GridValidationError(f"Dimensions must form a {self.rows}x{self.cols} table")
        if any(d < 0 for row in dims for d in row):
            raise GridValidationError("Dimensions must be non-negative")
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'hmaps', self._canonical(self.hmaps, self.horizontal_edges(), (0, 1), "HMAP"))
        object.__setattr__(self, 'vmaps', self._canonical(self.vmaps, self.vertical_edges(), (1, 0), "VMAP"))

    def _canonical(self, maps, edges, step, label) -> Dict[GridPoint, np.ndarray]:
        if set(maps) != set(edges):
            missing = sorted(set(edges) - set(maps))
            extra = sorted(set(maps) - set(edges))
            raise GridValidationError(f"{label} maps do not match the grid: missing {missing}, extra {extra}")
        canonical = {}
        for r, c in edges:
            expected = (self.dim_at((r + step[0], c + step[1])), self.dim_at((r, c)))
            matrix = np.asarray(maps[(r, c)], dtype=np.int64)
            if matrix.shape != expected:
                raise GridValidationError(f"{label} {r} {c} has shape {matrix.shape}, expected {expected}")
            canonical[(r, c)] = self.field.as_matrix(matrix)
        return canonical

    def horizontal_edges(self) -> List[GridPoint]:
        return [(r, c) for r in range(self.rows) for c in range(self.cols - 1)]

    def vertical_edges(self) -> List[GridPoint]:
        return [(r, c) for r in range(self.rows - 1) for c in range(self.cols)]

    @classmethod
    def from_maps(cls, rows: int, cols: int, field: FieldSpec, dims: Sequence[Sequence[int]],
                  hmaps: Optional[Mapping[GridPoint, np.ndarray]] = None,
                  vmaps: Optional[Mapping[GridPoint, np.ndarray]] = None) -> 'GridModule':
        """Build a module, filling every edge without a given matrix with the zero map."""
        hmaps, vmaps = dict(hmaps or {}), dict(vmaps or {})
        for r in range(rows):
            for c in range(cols):
                if c < cols - 1 and (r, c) not in hmaps:
                    hmaps[(r, c)] = field.zeros(dims[r][c + 1], dims[r][c])
                if r < rows - 1 and (r, c) not in vmaps:
                    vmaps[(r, c)] = field.zeros(dims[r + 1][c], dims[r][c])
        return cls(rows, cols, field, tuple(tuple(row) for row in dims), hmaps, vmaps)

    @classmethod
    def zero(cls, rows: int, cols: int, field: FieldSpec) -> 'GridModule':
        return cls.from_maps(rows, cols, field, [[0] * cols for _ in range(rows)])

    def contains(self, p: GridPoint) -> bool:
        return 0 <= p[0] < self.rows and 0 <= p[1] < self.cols

    def dim_at(self, p: GridPoint) -> int:
        return self.dims[p[0]][p[1]]

    def grid_map(self, p: GridPoint, q: GridPoint) -> np.ndarray:
        """
        Composite map M(p -> q) along the staircase going right first, then up.

        Raises:
            EmbeddingError: If p is not below q or either point leaves the grid
        """
        if not (self.contains(p) and self.contains(q)):
            raise EmbeddingError(f"Points {p} and {q} must lie in the {self.rows}x{self.cols} grid")
        if not point_leq(p, q):
            raise EmbeddingError(f"{p} is not below {q}")
        result = self.field.identity(self.dim_at(p))
        row = p[0]
        for c in range(p[1], q[1]):
            result = self.field.mat_mul(self.hmaps[(row, c)], result)
        for r in range(p[0], q[0]):
            result = self.field.mat_mul(self.vmaps[(r, q[1])], result)
        return result

    def validate(self) -> None:
        """
        Check that every unit square commutes.

        Raises:
            GridValidationError: Naming the lower-left corner of the first failing square
        """
        for r in range(self.rows - 1):
            for c in range(self.cols - 1):
                right_up = self.field.mat_mul(self.vmaps[(r, c + 1)], self.hmaps[(r, c)])
                up_right = self.field.mat_mul(self.hmaps[(r + 1, c)], self.vmaps[(r, c)])
                if not np.array_equal(right_up, up_right):
                    raise GridValidationError(f"Square at ({r}, {c}) does not commute")


def validate_grid(module: GridModule) -> None:
    """Functoriality check; raises GridValidationError on the first bad square."""
    module.validate()


# Bipath embeddings

@dataclass(frozen=True)
class BipathEmbedding:
    """
    An order-preserving map from a bipath poset into a grid.

    Args:
        poset: Source bipath poset
        targets: Grid point of every bipath vertex, in vertex order
    """
    poset: BipathPoset
    targets: Tuple[GridPoint, ...]

    def __post_init__(self):
        targets = tuple((int(r), int(c)) for r, c in self.targets)
        object.__setattr__(self, 'targets', targets)
        if len(targets) != self.poset.size:
            raise EmbeddingError(f"Expected {self.poset.size} targets, got {len(targets)}")
        for u, v in self.poset.hasse_arrows():
            if not point_leq(targets[u], targets[v]):
                raise EmbeddingError(
                    f"Not order-preserving: {u} <= {v} but {targets[u]} is not below {targets[v]}"
                )

    def check_fits(self, module: GridModule) -> None:
        for v, target in enumerate(self.targets):
            if not module.contains(target):
                raise EmbeddingError(f"Vertex {v} maps to {target}, outside the {module.rows}x{module.cols} grid")


def pullback(module: GridModule, embedding: BipathEmbedding) -> BipathModule:
    """
    The bipath module M composed with f.

    Raises:
        GridValidationError: If the grid module does not commute
        EmbeddingError: If the embedding leaves the grid
    """
    module.validate()
    embedding.check_fits(module)
    targets = embedding.targets
    dims = tuple(module.dim_at(target) for target in targets)
    arrows = {
        (u, v): module.grid_map(targets[u], targets[v])
        for u, v in embedding.poset.hasse_arrows()
    }
    return BipathModule(embedding.poset, module.field, dims, arrows)


def fibered_arc_code(module: GridModule, embeddings: Sequence[BipathEmbedding]) -> List[ArcCode]:
    """Arc code of the pullback along every embedding, in order."""
    codes = [arc_code(pullback(module, embedding)) for embedding in embeddings]
    logger.debug(f"Fibered arc code over {len(embeddings)} embeddings")
    return codes


# Monotone paths

@dataclass(frozen=True)
class MonotonePath:
    """Distinct grid points, each coordinatewise below the next."""
    points: Tuple[GridPoint, ...]

    def __post_init__(self):
        points = tuple((int(r), int(c)) for r, c in self.points)
        object.__setattr__(self, 'points', points)
        if not points:
            raise EmbeddingError("A path needs at least one point")
        for p, q in zip(points, points[1:]):
            if p == q or not point_leq(p, q):
                raise EmbeddingError(f"Path is not strictly monotone at {p} -> {q}")

    def __len__(self) -> int:
        return len(self.points)


def line_module(module: GridModule, path: MonotonePath) -> ZigzagRep:
    """
    One-parameter restriction of a grid module along a path.

    Raises:
        EmbeddingError: If the path leaves the grid
    """
    for point in path.points:
        if not module.contains(point):
            raise EmbeddingError(f"Path point {point} is outside the {module.rows}x{module.cols} grid")
    module.validate()
    shape = ZigzagShape.forward_path(len(path))
    dims = tuple(module.dim_at(point) for point in path.points)
    maps = tuple(module.grid_map(p, q) for p, q in zip(path.points, path.points[1:]))
    return ZigzagRep(shape, module.field, dims, maps)


def line_barcode(module: GridModule, path: MonotonePath) -> ZzBarcode:
    """Barcode of the restriction along path; bars are index ranges into the path."""
    return barcode(line_module(module, path))


def line_bars(module: GridModule, path: MonotonePath) -> List[Tuple[GridPoint, GridPoint, int]]:
    """line_barcode with bars rendered as (first point, last point, multiplicity)."""
    return [
        (path.points[bar.first], path.points[bar.last], mult)
        for bar, mult in line_barcode(module, path).items()
    ]


# The two-row example

EXAMPLE_FIELD = FieldSpec(5)


def build_example_m_lambda(lam: int, field: FieldSpec = EXAMPLE_FIELD) -> GridModule:
    """
    The 2x5 grid module M_lambda.

    Row 0 has dimensions 0, 1, 2, 2, 1 and row 1 has 1, 2, 2, 1, 0. For
    lam = 1 and lam = -1 the fibered barcodes agree while the fibered arc
    codes differ, which needs 1 != -1 in the field.
    """
    lam = int(lam) % field.p
    as_matrix = field.as_matrix
    dims = [[0, 1, 2, 2, 1], [1, 2, 2, 1, 0]]
    hmaps = {
        (0, 0): field.zeros(1, 0),
        (0, 1): as_matrix([[0], [1]]),
        (0, 2): field.identity(2),
        (0, 3): as_matrix([[1, -1]]),
        (1, 0): as_matrix([[1], [0]]),
        (1, 1): field.identity(2),
        (1, 2): as_matrix([[lam, -1]]),
        (1, 3): field.zeros(0, 1),
    }
    vmaps = {
        (0, 0): field.zeros(1, 0),
        (0, 1): as_matrix([[0], [1]]),
        (0, 2): field.identity(2),
        (0, 3): as_matrix([[lam, -1]]),
        (0, 4): field.zeros(0, 1),
    }
    module = GridModule(2, 5, field, tuple(tuple(row) for row in dims), hmaps, vmaps)
    module.validate()
    return module


def example_embedding() -> BipathEmbedding:
    """B(3, 2) sent to the five points (0,2), (1,2), (1,3), (1,4), (0,4)."""
    return BipathEmbedding(BipathPoset(3, 2), ((0, 2), (1, 2), (1, 3), (1, 4), (0, 4)))


def example_lines() -> Dict[str, MonotonePath]:
    """The three lines separating the example modules, as the grid points they meet."""
    return {
        "L0": MonotonePath(((1, 0), (1, 1), (1, 2), (1, 3), (1, 4))),
        "L1": MonotonePath(((0, 2), (1, 3))),
        "L1/2": MonotonePath(((0, 1), (1, 3))),
    }


# Reduced zeroth homology of graph bifiltrations

class UnionFind:
    """Disjoint sets with union by height and path compression."""

    def __init__(self, nodes: Sequence[int]):
        self.parents: Dict[int, int] = {v: v for v in nodes}
        self.heights: Dict[int, int] = {v: 1 for v in nodes}

    def join(self, v1: int, v2: int) -> bool:
        """Merge the sets of v1 and v2; False when they were already one set."""
        r1, r2 = self.root(v1), self.root(v2)
        if r1 == r2:
            return False
        if self.heights[r1] <= self.heights[r2]:
            self.parents[r1] = r2
            self.heights[r2] = max(self.heights[r2], self.heights[r1] + 1)
        else:
            self.parents[r2] = r1
        return True

    def root(self, v0: int) -> int:
        v = v0
        while self.parents[v] != v:
            v = self.parents[v]
        while self.parents[v0] != v:
            self.parents[v0], v0 = v, self.parents[v0]
        return v

    def components(self) -> List[List[int]]:
        """Sets as sorted vertex lists, ordered by their smallest vertex."""
        groups: Dict[int, List[int]] = {}
        for v in self.parents:
            groups.setdefault(self.root(v), []).append(v)
        return sorted((sorted(group) for group in groups.values()), key=lambda group: group[0])


def _components_at(point: GridPoint, vertex_grades: Mapping[int, GridPoint],
                   edges: Sequence[Tuple[int, int, GridPoint]]) -> UnionFind:
    present = [v for v, grade in vertex_grades.items() if point_leq(grade, point)]
    forest = UnionFind(present)
    for u, v, grade in edges:
        if point_leq(grade, point):
            forest.join(u, v)
    return forest


def h0_bifiltration(rows: int, cols: int, vertex_grades: Mapping[int, GridPoint],
                    edges: Sequence[Tuple[int, int, GridPoint]],
                    field: FieldSpec = FieldSpec(2)) -> GridModule:
    """
    Reduced zeroth homology of a one-critical graph bifiltration.

    At each grid point the basis is [c] - [c0] over the components c other
    than the root c0, the component holding the smallest present vertex;
    components are ordered by their smallest vertex.

    Args:
        rows: Grid rows
        cols: Grid columns
        vertex_grades: Entrance grade per vertex id
        edges: (u, v, grade) per edge

    Raises:
        BifiltrationError: On grades outside the grid, absent endpoints, or an
            edge entering before one of its endpoints
    """
    for v, grade in vertex_grades.items():
        if not (0 <= grade[0] < rows and 0 <= grade[1] < cols):
            raise BifiltrationError(f"Vertex {v} has grade {grade} outside the {rows}x{cols} grid")
    for u, v, grade in edges:
        for endpoint in (u, v):
            if endpoint not in vertex_grades:
                raise BifiltrationError(f"Edge ({u}, {v}) references absent vertex {endpoint}")
            if not point_leq(vertex_grades[endpoint], grade):
                raise BifiltrationError(
                    f"Edge ({u}, {v}) enters at {grade}, before vertex {endpoint} at {vertex_grades[endpoint]}"
                )
        if not (0 <= grade[0] < rows and 0 <= grade[1] < cols):
            raise BifiltrationError(f"Edge ({u}, {v}) has grade {grade} outside the {rows}x{cols} grid")

    forests = {
        (r, c): _components_at((r, c), vertex_grades, edges)
        for r in range(rows) for c in range(cols)
    }
    components = {point: forest.components() for point, forest in forests.items()}
    dims = [[max(len(components[(r, c)]) - 1, 0) for c in range(cols)] for r in range(rows)]

    def induced(p: GridPoint, q: GridPoint) -> np.ndarray:
        source, target = components[p], components[q]
        index = {forests[q].root(group[0]): k for k, group in enumerate(target)}
        matrix = field.zeros(max(len(target) - 1, 0), max(len(source) - 1, 0))
        if not source:
            return matrix
        base = index[forests[q].root(source[0][0])]
        for column, group in enumerate(source[1:]):
            image = index[forests[q].root(group[0])]
            # target basis drops the root component, index 0
            if image:
                matrix[image - 1, column] += 1
            if base:
                matrix[base - 1, column] -= 1
        return field.as_matrix(matrix)

    hmaps = {(r, c): induced((r, c), (r, c + 1)) for r in range(rows) for c in range(cols - 1)}
    vmaps = {(r, c): induced((r, c), (r + 1, c)) for r in range(rows - 1) for c in range(cols)}
    module = GridModule(rows, cols, field, tuple(tuple(row) for row in dims), hmaps, vmaps)
    logger.debug(f"H0 of a bifiltration with {len(vertex_grades)} vertices and {len(edges)} edges on {rows}x{cols}")
    return module
