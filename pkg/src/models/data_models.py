"""
Data models shared by the bipath arc code toolkit.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Generic, Hashable, Iterator, List, Mapping, Optional, Tuple, TypeVar

K = TypeVar('K', bound=Hashable)


class OutputFormat(Enum):
    """Rendering of command results."""
    TEXT = "text"
    JSON = "json"


class CommandVerb(Enum):
    """Verbs accepted by the command-line front door."""
    VALIDATE = "validate"
    DECOMPOSE = "decompose"
    SLICE = "slice"
    DISTANCE = "distance"
    FIBER = "fiber"
    SELFTEST = "selftest"


@dataclass
class EngineConfig:
    """Configuration for computation and output parameters."""
    field_prime: int = 2
    seed: int = 0
    trials: int = 100
    output_format: OutputFormat = OutputFormat.TEXT
    log_level: str = "WARNING"
    log_file_path: Optional[str] = None


@dataclass
class Command:
    """A parsed command-line request."""
    verb: CommandVerb
    inputs: List[str] = field(default_factory=list)
    field_override: Optional[int] = None
    output_format: Optional[OutputFormat] = None
    seed: Optional[int] = None
    trials: Optional[int] = None
    out_path: Optional[str] = None
    env_file: Optional[str] = None


class IntervalMultiset(Generic[K]):
    """
    Finite multiset of intervals with positive multiplicities.

    Used for zigzag barcodes and bipath arc codes. Entries with multiplicity
    zero are dropped on construction, so equality is multiset equality.

    Args:
        counts: Mapping from interval to multiplicity
    """

    def __init__(self, counts: Optional[Mapping[K, int]] = None):
        self._counts: Dict[K, int] = {}
        for interval, mult in (counts or {}).items():
            if mult < 0:
                raise ValueError(f"Negative multiplicity {mult} for {interval}")
            if mult:
                self._counts[interval] = self._counts.get(interval, 0) + int(mult)

    @classmethod
    def from_intervals(cls, intervals) -> 'IntervalMultiset[K]':
        counts: Dict[K, int] = {}
        for interval in intervals:
            counts[interval] = counts.get(interval, 0) + 1
        return cls(counts)

    def multiplicity(self, interval: K) -> int:
        return self._counts.get(interval, 0)

    def items(self) -> List[Tuple[K, int]]:
        """Entries in canonical order (the interval's own ordering)."""
        return sorted(self._counts.items(), key=lambda item: self.sort_key(item[0]))

    def sort_key(self, interval: K):
        return interval

    def elements(self) -> Iterator[K]:
        """Each interval repeated by its multiplicity, canonically ordered."""
        for interval, mult in self.items():
            for _ in range(mult):
                yield interval

    @property
    def total(self) -> int:
        return sum(self._counts.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalMultiset):
            return NotImplemented
        return self._counts == other._counts

    def __len__(self) -> int:
        return len(self._counts)

    def __bool__(self) -> bool:
        return bool(self._counts)

    def __iter__(self) -> Iterator[K]:
        return iter(interval for interval, _ in self.items())

    def __contains__(self, interval) -> bool:
        return interval in self._counts

    def __repr__(self) -> str:
        body = ", ".join(f"{interval}: {mult}" for interval, mult in self.items())
        return f"{type(self).__name__}({{{body}}})"
