"""
GROUP CORE
Exact arithmetic for G = Z^d / K, the endomorphism phi = A, the quotients
G/phi^n(G) and the purity filtration.

Coset representatives live in the box [0, W_ii) of the Hermite normal form W
of the lattice A^n Z^d + K, enumerated lexicographically.
"""

import itertools
import threading
from functools import reduce
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form

from domain.entities import CosetHandle, EndoSpec, PurityKind, PurityVerdict, Valuation
from domain.values import GroupElement
from utils.helpers import CapExceeded, ConfigError, VerificationError, ZeroElement
from utils.logger import get_logger

logger = get_logger(__name__)


class _Box:
    """HNF data for one level"""

    def __init__(self, hnf: Matrix):
        d = hnf.rows
        self.hnf = [[int(hnf[i, j]) for j in range(d)] for i in range(d)]
        if all(self.hnf[i][j] == 0 for i in range(d) for j in range(i)):
            self.upper = True
        elif all(self.hnf[i][j] == 0 for i in range(d) for j in range(i + 1, d)):
            self.upper = False
        else:
            raise VerificationError("Hermite normal form is not triangular")
        self.diag = tuple(abs(self.hnf[i][i]) for i in range(d))
        if any(w == 0 for w in self.diag):
            raise VerificationError("Hermite normal form has a zero pivot")
        self.size = reduce(lambda acc, w: acc * w, self.diag, 1)

    def reduce(self, coords: Sequence[int]) -> List[int]:
        x = list(coords)
        d = len(x)
        order = range(d - 1, -1, -1) if self.upper else range(d)
        for i in order:
            pivot = self.hnf[i][i]
            q = x[i] // pivot
            if q:
                for r in range(d):
                    x[r] -= q * self.hnf[r][i]
        return x


class EndoContext:
    """
    Group shape, endomorphism and derived coset tables.

    Safe for concurrent readers: every cache is filled under a lock and never
    mutated afterwards.
    """

    def __init__(self, spec: EndoSpec):
        self.spec = spec
        self.rank = spec.rank
        self.moduli = tuple(spec.moduli)
        self.max_depth = spec.max_depth
        self.enum_cap = spec.enum_cap
        self.iteration_bound = spec.iteration_bound

        self._free = [i for i, m in enumerate(self.moduli) if m == 0]
        self._torsion = [i for i, m in enumerate(self.moduli) if m > 0]
        self._lock = threading.RLock()
        self._powers: List[np.ndarray] = [np.identity(self.rank, dtype=object)]
        self._matrix = np.array(spec.matrix, dtype=object)
        self._boxes: Dict[int, _Box] = {}
        self._transversals: Dict[int, Tuple[GroupElement, ...]] = {}
        self._free_solvers: Dict[int, Tuple[List[List[int]], int]] = {}
        self._torsion_inverse: Dict[int, Dict[Tuple[int, ...], Tuple[int, ...]]] = {}

        self._validate()
        logger.info("context ready", rank=self.rank, moduli=list(self.moduli),
                    index=self.index(1), max_depth=self.max_depth)

    # ========== CONSTRUCTION ==========

    def _validate(self):
        A = self.spec.matrix
        for i in self._torsion:
            m_i = self.moduli[i]
            for r in range(self.rank):
                image = m_i * A[r][i]
                m_r = self.moduli[r]
                if (m_r == 0 and image != 0) or (m_r and image % m_r):
                    raise ConfigError(f"matrix does not preserve the torsion subgroup (column {i}, row {r})")

        if self._free:
            block = Matrix([[A[r][c] for c in self._free] for r in self._free])
            if block.det() == 0:
                raise ConfigError("endomorphism is not injective on the free part (det = 0)")

        if self._torsion:
            size = reduce(lambda acc, i: acc * self.moduli[i], self._torsion, 1)
            if size > self.enum_cap:
                raise CapExceeded("enum_cap", self.enum_cap, size)
            for t in self._torsion_elements():
                if not t.is_zero and self.apply_endo(t, 1).is_zero:
                    raise ConfigError(f"endomorphism is not injective: kernel contains ({t})")

        self._box(1)
        logger.debug("context validated", free=self._free, torsion=self._torsion)

    def _torsion_elements(self) -> Iterable[GroupElement]:
        ranges = [range(self.moduli[i]) if i in self._torsion else range(1) for i in range(self.rank)]
        for coords in itertools.product(*ranges):
            yield GroupElement(tuple(coords), self.moduli)

    # ========== ELEMENTS ==========

    def element(self, coords: Iterable[int]) -> GroupElement:
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates, got {len(coords)}")
        return GroupElement.of(coords, self.moduli)

    def zero(self) -> GroupElement:
        return GroupElement.zero(self.moduli)

    def basis(self, i: int) -> GroupElement:
        return self.element(1 if j == i else 0 for j in range(self.rank))

    def fingerprint(self) -> Dict[str, object]:
        return {
            'rank': self.rank,
            'matrix': [list(row) for row in self.spec.matrix],
            'moduli': list(self.moduli),
            'max_depth': self.max_depth,
            'enum_cap': self.enum_cap,
            'declared_pure': self.spec.declared_pure,
            'purity_extras': [list(v) for v in self.spec.purity_extras],
        }

    # ========== ENDOMORPHISM ==========

    def _power(self, n: int) -> np.ndarray:
        if n > self.iteration_bound:
            raise CapExceeded("iteration_bound", self.iteration_bound, n)
        with self._lock:
            while len(self._powers) <= n:
                self._powers.append(self._matrix.dot(self._powers[-1]))
            return self._powers[n]

    def apply_endo(self, x: GroupElement, n: int = 1) -> GroupElement:
        """phi^n(x) = A^n x reduced by the moduli"""
        if n == 0:
            return x
        image = self._power(n).dot(np.array(x.coords, dtype=object))
        return GroupElement.of((int(c) for c in image), self.moduli)

    def _box(self, n: int) -> _Box:
        with self._lock:
            box = self._boxes.get(n)
            if box is not None:
                return box
            P = self._power(n)
            columns = [[int(P[r, c]) for r in range(self.rank)] for c in range(self.rank)]
            for i in self._torsion:
                columns.append([self.moduli[i] if r == i else 0 for r in range(self.rank)])
            generators = Matrix(self.rank, len(columns), lambda r, c: columns[c][r])
            hnf = hermite_normal_form(generators)
            if hnf.rows != self.rank or hnf.cols != self.rank:
                raise ConfigError(f"phi^{n}(G) has infinite index (lattice rank {hnf.cols} < {self.rank})")
            box = _Box(hnf)
            if n >= 1:
                expected = self._box(1).size ** n if n > 1 else box.size
                if box.size != expected:
                    raise VerificationError(f"|G/phi^{n}(G)| = {box.size}, expected {expected}")
            self._boxes[n] = box
            return box

    def index(self, n: int = 1) -> int:
        """|G/phi^n(G)|"""
        return self._box(n).size

    def canonical(self, x: GroupElement, n: int) -> GroupElement:
        """Canonical representative of x + phi^n(G)"""
        if n == 0:
            return self.zero()
        return GroupElement.of(self._box(n).reduce(x.coords), self.moduli)

    def member(self, x: GroupElement, n: int) -> bool:
        """x in phi^n(G)"""
        return self.canonical(x, n).is_zero

    def preimage(self, x: GroupElement, n: int = 1) -> Optional[GroupElement]:
        """The unique y with phi^n(y) = x, or None when x is not in phi^n(G)"""
        if n == 0:
            return x
        if not self.member(x, n):
            return None
        P = self._power(n)
        y = [0] * self.rank

        if self._free:
            adjugate, det = self._free_solver(n)
            rhs = [x.coords[i] for i in self._free]
            for k, i in enumerate(self._free):
                value = sum(a * v for a, v in zip(adjugate[k], rhs))
                if value % det:
                    raise VerificationError(f"inexact free solve for {x} at level {n}")
                y[i] = value // det

        if self._torsion:
            residual = tuple(
                (x.coords[r] - sum(int(P[r, c]) * y[c] for c in self._free)) % self.moduli[r]
                for r in self._torsion
            )
            solution = self._torsion_table(n).get(residual)
            if solution is None:
                raise VerificationError(f"torsion part of {x} has no preimage at level {n}")
            for k, i in enumerate(self._torsion):
                y[i] = solution[k]

        result = self.element(y)
        if self.apply_endo(result, n) != x:
            raise VerificationError(f"preimage check failed for {x} at level {n}")
        return result

    def _free_solver(self, n: int) -> Tuple[List[List[int]], int]:
        with self._lock:
            if n not in self._free_solvers:
                P = self._power(n)
                block = Matrix([[int(P[r, c]) for c in self._free] for r in self._free])
                adjugate = block.adjugate()
                size = len(self._free)
                self._free_solvers[n] = (
                    [[int(adjugate[r, c]) for c in range(size)] for r in range(size)],
                    int(block.det()),
                )
            return self._free_solvers[n]

    def _torsion_table(self, n: int) -> Dict[Tuple[int, ...], Tuple[int, ...]]:
        with self._lock:
            if n not in self._torsion_inverse:
                P = self._power(n)
                table = {}
                for t in self._torsion_elements():
                    image = tuple(
                        sum(int(P[r, c]) * t.coords[c] for c in self._torsion) % self.moduli[r]
                        for r in self._torsion
                    )
                    table[image] = tuple(t.coords[c] for c in self._torsion)
                self._torsion_inverse[n] = table
            return self._torsion_inverse[n]

    # ========== COSETS ==========

    def transversal(self, n: int) -> Tuple[GroupElement, ...]:
        """Canonical representatives of G/phi^n(G), lexicographic"""
        box = self._box(n) if n else None
        size = box.size if box else 1
        if size > self.enum_cap:
            raise CapExceeded("enum_cap", self.enum_cap, size)
        with self._lock:
            cached = self._transversals.get(n)
            if cached is None:
                if n == 0:
                    cached = (self.zero(),)
                else:
                    cached = tuple(
                        GroupElement(tuple(coords), self.moduli)
                        for coords in itertools.product(*(range(w) for w in box.diag))
                    )
                self._transversals[n] = cached
            return cached

    def rep_index(self, rep: GroupElement, n: int) -> int:
        if n == 0:
            return 0
        index = 0
        for c, w in zip(rep.coords, self._box(n).diag):
            index = index * w + c
        return index

    def rep_of(self, handle: CosetHandle) -> GroupElement:
        if handle.level == 0:
            if handle.rep_index:
                raise ValueError("level 0 has a single class")
            return self.zero()
        diag = self._box(handle.level).diag
        if handle.rep_index >= self.index(handle.level):
            raise ValueError(f"class index {handle.rep_index} out of range at level {handle.level}")
        coords = []
        rest = handle.rep_index
        for w in reversed(diag):
            rest, c = divmod(rest, w)
            coords.append(c)
        return GroupElement(tuple(reversed(coords)), self.moduli)

    def coset_of(self, x: GroupElement, n: int) -> CosetHandle:
        size = self.index(n) if n else 1
        if size > self.enum_cap:
            raise CapExceeded("enum_cap", self.enum_cap, size)
        return CosetHandle(n, self.rep_index(self.canonical(x, n), n))

    # ========== FILTRATION ==========

    def valuation(self, x: GroupElement) -> Valuation:
        """Largest p <= max_depth with x in phi^p(G); saturated when p hits max_depth"""
        if x.is_zero:
            raise ZeroElement("valuation of the identity is infinite")
        p = 0
        y = x
        while p < self.max_depth:
            pre = self.preimage(y, 1)
            if pre is None:
                break
            y = pre
            p += 1
        saturated = p == self.max_depth
        if saturated:
            logger.warning("valuation saturated", element=str(x), max_depth=self.max_depth)
        return Valuation(p, saturated)

    def _is_periodic(self, x: GroupElement) -> bool:
        y = x
        for _ in range(min(self.max_depth, self.iteration_bound)):
            y = self.apply_endo(y, 1)
            if y == x:
                return True
        seen = {x}
        y = x
        for _ in range(self.max_depth):
            y = self.preimage(y, 1)
            if y is None:
                return False
            if y in seen:
                return True
            seen.add(y)
        return False

    def purity_check(self, extras: Optional[Iterable[GroupElement]] = None) -> PurityVerdict:
        """
        Sample-based purity verdict. The sample is transversal(1), the basis and
        `extras`, which default to the context's configured purity_extras.
        """
        declared = self.spec.declared_pure
        if extras is None:
            extras = [self.element(v) for v in self.spec.purity_extras]
        basis = [self.basis(i) for i in range(self.rank)]
        nonzero_basis = [b for b in basis if not b.is_zero]

        if self.index(1) == 1:
            if not nonzero_basis:
                return PurityVerdict(PurityKind.PURE_UP_TO_DEPTH, self.max_depth, declared_pure=declared,
                                     reason="trivial group")
            return PurityVerdict(PurityKind.NOT_PURE, self.max_depth, nonzero_basis[0], declared,
                                 reason="phi is surjective")

        sample: List[GroupElement] = []
        for x in itertools.chain(self.transversal(1), basis, extras):
            if not x.is_zero and x not in sample:
                sample.append(x)

        saturated = None
        for x in sample:
            if not self.valuation(x).saturated:
                continue
            if self._is_periodic(x):
                return PurityVerdict(PurityKind.NOT_PURE, self.max_depth, x, declared,
                                     reason="periodic orbit")
            saturated = saturated or x

        if saturated is not None:
            return PurityVerdict(PurityKind.INCONCLUSIVE, self.max_depth, saturated, declared,
                                 reason="saturated valuation without periodicity")
        return PurityVerdict(PurityKind.PURE_UP_TO_DEPTH, self.max_depth, declared_pure=declared)
