"""
Domain entities - typed records exchanged between the engines
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

from domain.values import GaussianRational, GroupElement, ONE
from utils.helpers import ConfigError


@dataclass(frozen=True)
class EndoSpec:
    """Context configuration as read from a context file"""
    rank: int
    matrix: Tuple[Tuple[int, ...], ...]
    moduli: Tuple[int, ...]
    max_depth: int = 24
    enum_cap: int = 1_000_000
    declared_pure: bool = False
    iteration_bound: int = 96
    word_length_bound: int = 64
    purity_extras: Tuple[Tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.rank <= 0:
            raise ConfigError("rank must be positive")
        if len(self.matrix) != self.rank or any(len(row) != self.rank for row in self.matrix):
            raise ConfigError(f"matrix must be {self.rank}x{self.rank}")
        if len(self.moduli) != self.rank:
            raise ConfigError(f"moduli must have {self.rank} entries")
        if any(m < 0 for m in self.moduli):
            raise ConfigError("moduli must be non-negative (0 marks a free coordinate)")
        if self.max_depth <= 0 or self.enum_cap <= 0 or self.iteration_bound <= 0:
            raise ConfigError("max_depth, enum_cap and iteration_bound must be positive")
        if self.word_length_bound <= 0:
            raise ConfigError("word_length_bound must be positive")
        if any(len(v) != self.rank for v in self.purity_extras):
            raise ConfigError(f"purity_extras entries must have {self.rank} coordinates")


@dataclass(frozen=True, order=True)
class CosetHandle:
    level: int
    rep_index: int

    def __post_init__(self):
        if self.level < 0 or self.rep_index < 0:
            raise ValueError("coset handle fields must be non-negative")


@dataclass(frozen=True)
class Valuation:
    value: int
    saturated: bool = False


class PurityKind(Enum):
    PURE_UP_TO_DEPTH = "PureUpToDepth"
    NOT_PURE = "NotPure"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class PurityVerdict:
    kind: PurityKind
    depth: int
    witness: Optional[GroupElement] = None
    declared_pure: bool = False
    reason: str = ""

    @property
    def usable_as_pure(self) -> bool:
        if self.kind is PurityKind.NOT_PURE:
            return False
        return self.kind is PurityKind.PURE_UP_TO_DEPTH or self.declared_pure


class LetterKind(Enum):
    U = "u"
    S = "s"
    SSTAR = "s*"


@dataclass(frozen=True)
class Letter:
    kind: LetterKind
    g: Optional[GroupElement] = None

    def __post_init__(self):
        if (self.kind is LetterKind.U) != (self.g is not None):
            raise ValueError("only U letters carry a group element")


@dataclass(frozen=True)
class Monomial:
    """u_a s^p s*^q u_b"""
    a: GroupElement
    p: int
    q: int
    b: GroupElement

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("exponents must be natural numbers")

    @property
    def degree(self) -> int:
        return self.p - self.q

    @property
    def is_diagonal(self) -> bool:
        return self.p == self.q and (self.a + self.b).is_zero

    def sort_key(self):
        # canonical `a` lies in the coset box, so coordinate order is coset-index order
        return (self.degree, self.q, self.a.coords, self.b.coords)


@dataclass(frozen=True)
class CriticalIndex:
    m: int
    n: int
    h: GroupElement
    h_prime: GroupElement
    fg: GroupElement
    fk: int

    def label(self) -> str:
        return f"(m={self.m},n={self.n},h={self.h},h'={self.h_prime},f=({self.fg};{self.fk}))"


@dataclass(frozen=True)
class QTerm:
    """coeff · s*^n u_{-h} (u_fg s^fk s*^fk u_{-fg}) u_h' s^m"""
    n: int
    h: GroupElement
    fg: GroupElement
    fk: int
    h_prime: GroupElement
    m: int
    coeff: GaussianRational = ONE

    def __post_init__(self):
        if min(self.n, self.fk, self.m) < 0:
            raise ValueError("QTerm exponents must be natural numbers")

    @property
    def is_critical(self) -> bool:
        return not (self.n == self.m and self.h == self.h_prime)

    @property
    def index(self) -> CriticalIndex:
        return CriticalIndex(self.m, self.n, self.h, self.h_prime, self.fg, self.fk)

    def adjoint(self) -> 'QTerm':
        return QTerm(self.m, self.h_prime, self.fg, self.fk, self.h, self.n, self.coeff.conjugate())


@dataclass(frozen=True)
class OrthoResult:
    M: int
    g_list: Tuple[GroupElement, ...]
    h_list: Tuple[GroupElement, ...]
    p: int
    f_list: Tuple[Monomial, ...]
    per_term_exponents: Dict[CriticalIndex, int] = field(default_factory=dict)
    slack: int = 0

    @property
    def N(self) -> int:
        return len(self.g_list)


@dataclass(frozen=True)
class LimitElement:
    """phi^{-depth}(g) in the direct limit; canonical when depth = 0 or g is not in phi(G)"""
    g: GroupElement
    depth: int = 0

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be non-negative")


@dataclass(frozen=True)
class SemidirectElement:
    a: LimitElement
    n: int

    @property
    def in_semigroup(self) -> bool:
        return self.a.depth == 0 and self.n >= 0


@dataclass(frozen=True)
class ProfinitePoint:
    """Truncation at level `depth` of a point of the inverse limit, encoded by its level-depth class"""
    depth: int
    rep: CosetHandle

    def __post_init__(self):
        if self.rep.level != self.depth:
            raise ValueError("representative must live at the point's depth")


@dataclass(frozen=True)
class Cylinder:
    """Basic open set: points whose level-m entry is one of `classes`"""
    m: int
    classes: Tuple[CosetHandle, ...]

    def __post_init__(self):
        if not self.classes:
            raise ValueError("cylinder needs at least one class")
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("cylinder classes must be distinct")
        if any(c.level != self.m for c in self.classes):
            raise ValueError("cylinder classes must live at the cylinder level")
        object.__setattr__(self, 'classes', tuple(sorted(self.classes)))


class DomainKind(Enum):
    EMPTY = "Empty"
    FULL = "Full"
    PROPER = "ProperCylinder"


@dataclass(frozen=True)
class DomainStatus:
    kind: DomainKind
    cylinder: Optional[Cylinder] = None


class FreenessKind(Enum):
    WITNESS = "Witness"
    DOMAIN_EMPTY = "DomainEmpty"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class FreenessVerdict:
    kind: FreenessKind
    point: Optional[ProfinitePoint] = None
    level: Optional[int] = None
    reason: str = ""


@dataclass
class CheckReport:
    """Named verdicts with per-check counts and the first failures seen"""
    verdicts: Dict[str, bool] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)
    failures: list = field(default_factory=list)
    max_failures: int = 20

    def record(self, name: str, ok: bool, detail: str = ""):
        self.verdicts[name] = self.verdicts.get(name, True) and ok
        self.counts[name] = self.counts.get(name, 0) + 1
        if not ok and len(self.failures) < self.max_failures:
            self.failures.append(f"{name}: {detail}" if detail else name)

    @property
    def all_true(self) -> bool:
        return all(self.verdicts.values())
