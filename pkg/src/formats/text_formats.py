"""
Text file formats and result renderers.

Every format is line oriented: a header line naming the format, then
keyword lines and matrix rows of space-separated integers. Blank lines and
everything after '#' are ignored. A matrix with zero columns occupies no
lines, so its rows are implied by the dimensions.

    ZIGZAG <L> <p>          DIMS d_0 .. d_{L-1}, then MAP <src> <dst> per edge
    BIPATH <n> <m> <p>      DIMS d_0 .. d_{n+m-1}, then MAP <src> <dst> per Hasse arrow
    GRID <rows> <cols> <p>  DIMS row-major, then HMAP r c / VMAP r c blocks
    EMBED <n> <m>           n + m lines 'v r c'
    BIFILT <rows> <cols>    'V id r c' and 'E id1 id2 r c' lines
    PATH                    'r c' lines
"""
import json
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.bipath_core import ArcCode, BipathModule, BipathPoset
from ..core.fibered import BipathEmbedding, GridModule, MonotonePath, h0_bifiltration
from ..core.field_linalg import FieldSpec, FieldError
from ..core.zigzag_core import ZigzagRep, ZigzagShape, ZzBarcode

logger = logging.getLogger(__name__)

FORMATS = ("ZIGZAG", "BIPATH", "GRID", "EMBED", "BIFILT", "PATH")


class ParseError(ValueError):
    """Raised for malformed input, carrying the 1-based line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class _Line:
    number: int
    tokens: List[str]


class _LineReader:
    """Significant lines of a document, one at a time."""

    def __init__(self, text: str):
        self.lines: List[_Line] = []
        for number, raw in enumerate(text.splitlines(), start=1):
            content = raw.split('#', 1)[0].split()
            if content:
                self.lines.append(_Line(number, content))
        self.position = 0

    @property
    def last_number(self) -> int:
        return self.lines[-1].number if self.lines else 1

    def at_end(self) -> bool:
        return self.position >= len(self.lines)

    def peek(self) -> Optional[_Line]:
        return None if self.at_end() else self.lines[self.position]

    def next(self, expecting: str) -> _Line:
        if self.at_end():
            raise ParseError(f"Unexpected end of input, expecting {expecting}", self.last_number + 1)
        line = self.lines[self.position]
        self.position += 1
        return line

    def keyword(self, word: str, arity: int) -> Tuple[_Line, List[int]]:
        line = self.next(word)
        if line.tokens[0] != word:
            raise ParseError(f"Expected '{word}', got '{line.tokens[0]}'", line.number)
        values = _integers(line, line.tokens[1:])
        if arity >= 0 and len(values) != arity:
            raise ParseError(f"'{word}' takes {arity} values, got {len(values)}", line.number)
        return line, values

    def matrix(self, rows: int, cols: int, field: FieldSpec, label: str) -> np.ndarray:
        if cols == 0:
            return field.zeros(rows, 0)
        data = []
        for _ in range(rows):
            line = self.next(f"a row of {label}")
            values = _integers(line, line.tokens)
            if len(values) != cols:
                raise ParseError(f"Row of {label} needs {cols} entries, got {len(values)}", line.number)
            if not field.entries_valid(values):
                raise ParseError(f"Entries of {label} must be residues modulo {field.p}: {values}", line.number)
            data.append(values)
        return field.as_matrix(data, shape=(rows, cols))

    def expect_end(self) -> None:
        line = self.peek()
        if line is not None:
            raise ParseError(f"Unexpected content '{' '.join(line.tokens)}'", line.number)


def _integers(line: _Line, tokens: Sequence[str]) -> List[int]:
    try:
        return [int(token) for token in tokens]
    except ValueError:
        raise ParseError(f"Expected integers, got '{' '.join(tokens)}'", line.number)


def _field(header: _Line, p: int, override: Optional[int]) -> FieldSpec:
    try:
        return FieldSpec(override if override is not None else p)
    except FieldError as e:
        raise ParseError(str(e), header.number)


def detect_format(text: str) -> str:
    """
    Header keyword of a document.

    Raises:
        ParseError: If the first significant line names no known format
    """
    reader = _LineReader(text)
    line = reader.next("a format header")
    if line.tokens[0] not in FORMATS:
        raise ParseError(f"Unknown format '{line.tokens[0]}', expected one of {', '.join(FORMATS)}", line.number)
    return line.tokens[0]


def _dims(reader: _LineReader, count: int) -> List[int]:
    line, values = reader.keyword("DIMS", -1)
    if len(values) != count:
        raise ParseError(f"Expected {count} dimensions, got {len(values)}", line.number)
    if any(d < 0 for d in values):
        raise ParseError(f"Dimensions must be non-negative: {values}", line.number)
    return values


# Zigzag representations

def parse_zigzag(text: str, field_override: Optional[int] = None) -> ZigzagRep:
    """
    Read a ZIGZAG document; edge orientations come from the MAP headers.

    Raises:
        ParseError: On any syntax, shape or residue error
    """
    reader = _LineReader(text)
    header, (length, p) = reader.keyword("ZIGZAG", 2)
    if length < 1:
        raise ParseError(f"A zigzag needs at least one vertex, got {length}", header.number)
    field = _field(header, p, field_override)
    dims = _dims(reader, length)
    forward, maps = [], []
    for e in range(length - 1):
        line, (source, target) = reader.keyword("MAP", 2)
        if (source, target) == (e, e + 1):
            forward.append(True)
        elif (source, target) == (e + 1, e):
            forward.append(False)
        else:
            raise ParseError(f"Edge {e} must join {e} and {e + 1}, got MAP {source} {target}", line.number)
        maps.append(reader.matrix(dims[target], dims[source], field, f"MAP {source} {target}"))
    reader.expect_end()
    return ZigzagRep(ZigzagShape(length, tuple(forward)), field, tuple(dims), tuple(maps))


def _matrix_lines(matrix: np.ndarray) -> List[str]:
    if matrix.shape[1] == 0:
        return []
    return [" ".join(str(int(x)) for x in row) for row in matrix]


def format_zigzag(rep: ZigzagRep) -> str:
    lines = [f"ZIGZAG {rep.length} {rep.field.p}", "DIMS " + " ".join(str(d) for d in rep.dims)]
    for (source, target), matrix in zip(rep.shape.edges(), rep.maps):
        lines.append(f"MAP {source} {target}")
        lines.extend(_matrix_lines(matrix))
    return "\n".join(lines) + "\n"


# Bipath modules

def parse_bipath(text: str, field_override: Optional[int] = None) -> BipathModule:
    """
    Read a BIPATH document; MAP blocks must follow the Hasse arrow storage order.

    Raises:
        ParseError: On any syntax, shape or residue error
    """
    reader = _LineReader(text)
    header, (n, m, p) = reader.keyword("BIPATH", 3)
    if n < 2 or m < 1:
        raise ParseError(f"Bipath posets need n >= 2 and m >= 1, got n = {n}, m = {m}", header.number)
    poset = BipathPoset(n, m)
    field = _field(header, p, field_override)
    dims = _dims(reader, poset.size)
    arrows = {}
    for source, target in poset.hasse_arrows():
        line, values = reader.keyword("MAP", 2)
        if tuple(values) != (source, target):
            raise ParseError(f"Expected MAP {source} {target}, got MAP {values[0]} {values[1]}", line.number)
        arrows[(source, target)] = reader.matrix(dims[target], dims[source], field, f"MAP {source} {target}")
    reader.expect_end()
    return BipathModule(poset, field, tuple(dims), arrows)


def format_bipath(module: BipathModule) -> str:
    poset = module.poset
    lines = [f"BIPATH {poset.n} {poset.m} {module.field.p}", "DIMS " + " ".join(str(d) for d in module.dims)]
    for source, target in poset.hasse_arrows():
        lines.append(f"MAP {source} {target}")
        lines.extend(_matrix_lines(module.arrows[(source, target)]))
    return "\n".join(lines) + "\n"


# Grid modules

def parse_grid(text: str, field_override: Optional[int] = None) -> GridModule:
    """
    Read a GRID document. Edges without an HMAP or VMAP block carry zero maps.

    Raises:
        ParseError: On any syntax, shape or residue error
    """
    reader = _LineReader(text)
    header, (rows, cols, p) = reader.keyword("GRID", 3)
    if rows < 1 or cols < 1:
        raise ParseError(f"Grid must be at least 1x1, got {rows}x{cols}", header.number)
    field = _field(header, p, field_override)
    flat = _dims(reader, rows * cols)
    dims = [flat[r * cols:(r + 1) * cols] for r in range(rows)]
    hmaps: Dict[Tuple[int, int], np.ndarray] = {}
    vmaps: Dict[Tuple[int, int], np.ndarray] = {}
    while not reader.at_end():
        line = reader.peek()
        word = line.tokens[0]
        if word not in ("HMAP", "VMAP"):
            raise ParseError(f"Expected HMAP or VMAP, got '{word}'", line.number)
        _, (r, c) = reader.keyword(word, 2)
        step = (0, 1) if word == "HMAP" else (1, 0)
        target = (r + step[0], c + step[1])
        if not (0 <= r < rows and 0 <= c < cols and target[0] < rows and target[1] < cols):
            raise ParseError(f"{word} {r} {c} leaves the {rows}x{cols} grid", line.number)
        maps = hmaps if word == "HMAP" else vmaps
        if (r, c) in maps:
            raise ParseError(f"Duplicate {word} {r} {c}", line.number)
        maps[(r, c)] = reader.matrix(dims[target[0]][target[1]], dims[r][c], field, f"{word} {r} {c}")
    return GridModule.from_maps(rows, cols, field, dims, hmaps, vmaps)


def format_grid(module: GridModule) -> str:
    flat = [d for row in module.dims for d in row]
    lines = [f"GRID {module.rows} {module.cols} {module.field.p}", "DIMS " + " ".join(str(d) for d in flat)]
    for word, maps in (("HMAP", module.hmaps), ("VMAP", module.vmaps)):
        for (r, c), matrix in sorted(maps.items()):
            lines.append(f"{word} {r} {c}")
            lines.extend(_matrix_lines(matrix))
    return "\n".join(lines) + "\n"


# Embeddings, paths and bifiltrations

def parse_embedding(text: str) -> BipathEmbedding:
    """
    Read an EMBED document listing the grid point of every bipath vertex.

    Raises:
        ParseError: On syntax errors, missing vertices or a non-monotone map
    """
    reader = _LineReader(text)
    header, (n, m) = reader.keyword("EMBED", 2)
    if n < 2 or m < 1:
        raise ParseError(f"Bipath posets need n >= 2 and m >= 1, got n = {n}, m = {m}", header.number)
    poset = BipathPoset(n, m)
    targets = []
    for v in poset.vertices:
        line = reader.next(f"the target of vertex {v}")
        values = _integers(line, line.tokens)
        if len(values) != 3 or values[0] != v:
            raise ParseError(f"Expected '{v} r c', got '{' '.join(line.tokens)}'", line.number)
        targets.append((values[1], values[2]))
    reader.expect_end()
    try:
        return BipathEmbedding(poset, tuple(targets))
    except ValueError as e:
        raise ParseError(str(e), header.number)


def parse_path(text: str) -> MonotonePath:
    """
    Read a PATH document of 'r c' lines.

    Raises:
        ParseError: On syntax errors or a non-monotone path
    """
    reader = _LineReader(text)
    header, _ = reader.keyword("PATH", 0)
    points = []
    while not reader.at_end():
        line = reader.next("a path point")
        values = _integers(line, line.tokens)
        if len(values) != 2:
            raise ParseError(f"Expected 'r c', got '{' '.join(line.tokens)}'", line.number)
        points.append((values[0], values[1]))
    try:
        return MonotonePath(tuple(points))
    except ValueError as e:
        raise ParseError(str(e), header.number)


def parse_bifiltration(text: str, field_override: Optional[int] = None, default_prime: int = 2) -> GridModule:
    """
    Read a BIFILT document and return its reduced zeroth homology.

    The header may carry a third value, the field prime (default_prime otherwise).

    Raises:
        ParseError: On syntax errors or an inconsistent bifiltration
    """
    reader = _LineReader(text)
    header, values = reader.keyword("BIFILT", -1)
    if len(values) not in (2, 3):
        raise ParseError(f"'BIFILT' takes rows, cols and an optional prime, got {len(values)} values", header.number)
    rows, cols = values[0], values[1]
    field = _field(header, values[2] if len(values) == 3 else default_prime, field_override)
    vertex_grades: Dict[int, Tuple[int, int]] = {}
    edges: List[Tuple[int, int, Tuple[int, int]]] = []
    while not reader.at_end():
        line = reader.next("a V or E line")
        word = line.tokens[0]
        numbers = _integers(line, line.tokens[1:])
        if word == "V" and len(numbers) == 3:
            if numbers[0] in vertex_grades:
                raise ParseError(f"Duplicate vertex {numbers[0]}", line.number)
            vertex_grades[numbers[0]] = (numbers[1], numbers[2])
        elif word == "E" and len(numbers) == 4:
            edges.append((numbers[0], numbers[1], (numbers[2], numbers[3])))
        else:
            raise ParseError(f"Expected 'V id r c' or 'E id1 id2 r c', got '{' '.join(line.tokens)}'", line.number)
    try:
        return h0_bifiltration(rows, cols, vertex_grades, edges, field)
    except ValueError as e:
        raise ParseError(str(e), header.number)


# Result rendering

def canonical_json(payload) -> str:
    """Byte-stable JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def arc_code_records(code: ArcCode) -> List[Dict[str, object]]:
    return code.to_records()


def format_arc_code(code: ArcCode) -> str:
    """Table with one line per interval: kind, i, j, multiplicity."""
    lines = [f"{'kind':<8}{'i':>4}{'j':>4}{'mult':>6}"]
    for interval, mult in code.items():
        i = "-" if interval.i is None else str(interval.i)
        j = "-" if interval.j is None else str(interval.j)
        lines.append(f"{interval.kind.value:<8}{i:>4}{j:>4}{mult:>6}")
    return "\n".join(lines) + "\n"


def barcode_records(bars: ZzBarcode, origin: Optional[int] = None) -> List[Dict[str, object]]:
    """
    Bars as records; with an origin, also the decorated ZZ interval.

    Args:
        bars: Barcode over vertex ranges
        origin: Linear ZZ index of vertex 0, when the zigzag is a window of ZZ
    """
    records = []
    for bar, mult in bars.items():
        record: Dict[str, object] = {"first": bar.first, "last": bar.last, "mult": mult}
        if origin is not None:
            record["interval"] = str(bar.decorated(origin))
        records.append(record)
    return records


def format_barcode(bars: ZzBarcode, origin: Optional[int] = None) -> str:
    lines = []
    for record in barcode_records(bars, origin):
        label = f"[{record['first']}..{record['last']}]"
        if "interval" in record:
            label += f"  {record['interval']}"
        lines.append(f"{label}  x{record['mult']}")
    return "\n".join(lines) + ("\n" if lines else "")

