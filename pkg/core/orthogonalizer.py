"""
ORTHOGONALIZER
Constructive projections for the simplicity criterion.

Given y = sum of Q-terms, every f is refined to a common level M, each
level-M class g_i gets a companion h_i = g_i + phi^M(w), and the exponent p is
chosen so that conjugating by f_i = u_{h_i} s^p s*^p u_{-h_i} kills every
critical term: the critical quantity
    phi^m(-h_i) - h' + h + phi^n(h_i)
must leave phi^p(G).
"""

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from core.algebra import WordAlgebra
from domain.aggregates import AlgebraElement
from domain.entities import CriticalIndex, Monomial, OrthoResult, QTerm
from domain.values import GaussianRational, GroupElement
from utils.helpers import (
    CompanionExhausted,
    CompanionRetry,
    PreconditionError,
    SaturatedValuation,
    VerificationError,
)
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class LevelSplit:
    M: int
    terms: Tuple[QTerm, ...]
    g_list: Tuple[GroupElement, ...]

    @property
    def N(self) -> int:
        return len(self.g_list)


@dataclass(frozen=True)
class LiReport:
    verdicts: Dict[str, bool]
    iv_identity: bool
    iv_certificate: bool
    scalars: Tuple[Optional[GaussianRational], ...] = ()
    expectation_norm_sq: Fraction = Fraction(0)
    compressed_norm_sq: Fraction = Fraction(0)
    failures: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def all_true(self) -> bool:
        return all(self.verdicts.values())


class Orthogonalizer:
    """
    Builds orthogonal range projections f_i = u_{h_i} s^p s*^p u_{-h_i}, one
    per class of the common level, that compress a Q-form to its expectation.

    Args:
        algebra: Word algebra of the context
        companion_candidates: Offsets tried per class before giving up
    """

    def __init__(self, algebra: WordAlgebra, companion_candidates: int = 27):
        self.algebra = algebra
        self.context = algebra.context
        self.companion_candidates = companion_candidates

    # ========== LEVELS ==========

    def common_level(self, y: Sequence[QTerm]) -> LevelSplit:
        """
        Refine every projection factor of y to the deepest level M.

        Args:
            y: Nonempty Q-form

        Returns:
            LevelSplit with M, the refined terms and the sorted class list

        Raises:
            PreconditionError: If y is empty
        """
        if not y:
            raise PreconditionError("orthogonalizer input must be nonempty")
        M = max(t.fk for t in y)
        refined: List[QTerm] = []
        classes: Dict[GroupElement, None] = {}
        for term in y:
            f = self.algebra.projection(term.fg, term.fk)
            for atom, _ in self.algebra.raise_to(next(iter(f.terms)), GaussianRational.of(1), M):
                refined.append(replace(term, fg=atom.a, fk=M))
                classes.setdefault(atom.a, None)
        g_list = tuple(sorted(classes, key=lambda g: g.coords))
        logger.debug("common level", M=M, N=len(g_list), terms=len(refined))
        return LevelSplit(M, tuple(refined), g_list)

    # ========== EXPONENTS ==========

    def critical_quantity(self, idx: CriticalIndex, h_i: GroupElement) -> GroupElement:
        ctx = self.context
        return ctx.apply_endo(-h_i, idx.m) - idx.h_prime + idx.h + ctx.apply_endo(h_i, idx.n)

    def critical_exponent(self, idx: CriticalIndex, h_i: GroupElement) -> int:
        """
        Least p with the critical quantity outside phi^p(G).

        Args:
            idx: Critical index (m, n, h, h') of an off-diagonal term
            h_i: Companion offset

        Returns:
            valuation of the critical quantity plus one

        Raises:
            CompanionRetry: If the quantity is zero for this companion
            SaturatedValuation: If the valuation hits max_depth
        """
        quantity = self.critical_quantity(idx, h_i)
        if quantity.is_zero:
            raise CompanionRetry(f"critical quantity vanishes for companion {h_i}")
        valuation = self.context.valuation(quantity)
        if valuation.saturated:
            raise SaturatedValuation(f"valuation of {quantity} reached max_depth {self.context.max_depth}")
        return valuation.value + 1

    def _offsets(self) -> List[GroupElement]:
        """Offsets w by sup-norm shell, then per-coordinate (|c|, c<0): 0, 1, -1, 2, -2, ..."""
        ctx = self.context
        bounded = all(ctx.moduli)
        largest = max(ctx.moduli) if bounded else None
        out: Dict[GroupElement, None] = {}
        radius = 0
        while len(out) < self.companion_candidates:
            if bounded and radius > largest:
                break
            shell = [c for c in itertools.product(range(-radius, radius + 1), repeat=ctx.rank)
                     if max((abs(v) for v in c), default=0) == radius]
            shell.sort(key=lambda c: tuple((abs(v), v < 0) for v in c))
            for coords in shell:
                out.setdefault(ctx.element(coords), None)
                if len(out) == self.companion_candidates:
                    break
            radius += 1
        return list(out)

    # ========== CONSTRUCTION ==========

    def build(self, y: Sequence[QTerm]) -> OrthoResult:
        """
        Companions, exponent and projections for y.

        y is assumed positive; positivity is not checked. For each class the
        first offset with the smallest worst exponent wins; the scan stops early
        once that exponent is within the level floor M + 1.

        Args:
            y: Nonempty Q-form

        Returns:
            OrthoResult with p = max(M + 1, worst critical exponent)

        Raises:
            CompanionExhausted: If no offset gives a usable companion for a class
            SaturatedValuation: If a critical quantity saturates max_depth
            VerificationError: If the built projections fail their identities
        """
        ctx = self.context
        split = self.common_level(y)
        floor = split.M + 1
        critical = list(dict.fromkeys(t.index for t in y if t.is_critical))
        offsets = self._offsets()

        companions: List[GroupElement] = []
        exponents: List[List[int]] = []
        for g in split.g_list:
            best = None
            for w in offsets:
                h = g + ctx.apply_endo(w, split.M)
                try:
                    exps = [self.critical_exponent(idx, h) for idx in critical]
                except CompanionRetry:
                    logger.debug("companion retry", g=str(g), w=str(w))
                    continue
                score = max(exps, default=0)
                if best is None or score < best[0]:
                    best = (score, h, exps)
                if score <= floor:
                    break
            if best is None:
                raise CompanionExhausted(f"no usable companion for class {g} within {len(offsets)} candidates")
            companions.append(best[1])
            exponents.append(best[2])
            logger.debug("companion chosen", g=str(g), h=str(best[1]), worst=best[0])

        per_term = {idx: max(e[k] for e in exponents) for k, idx in enumerate(critical)}
        p = max([floor] + list(per_term.values()))
        result = OrthoResult(
            M=split.M,
            g_list=split.g_list,
            h_list=tuple(companions),
            p=p,
            f_list=tuple(self._projection(h, p) for h in companions),
            per_term_exponents=per_term,
            slack=p - max(per_term.values(), default=0),
        )
        self._verify_projections(result)
        logger.info("orthogonalized", M=split.M, N=split.N, p=p)
        return result

    def _projection(self, h: GroupElement, p: int) -> Monomial:
        return self.algebra.monomial(h, p, p, -h)

    def with_exponent(self, result: OrthoResult, p: int) -> OrthoResult:
        """Same companions, projections rebuilt at exponent p (no verification)"""
        return replace(
            result,
            p=p,
            f_list=tuple(self._projection(h, p) for h in result.h_list),
            slack=p - max(result.per_term_exponents.values(), default=0),
        )

    def _isometry(self, h: GroupElement, p: int) -> AlgebraElement:
        return self.algebra.mul(self.algebra.u(h), self.algebra.s(p))

    def _verify_projections(self, result: OrthoResult):
        alg = self.algebra
        fs = [alg.element(f) for f in result.f_list]
        for i, j in itertools.combinations(range(len(fs)), 2):
            if not alg.is_zero(alg.mul(fs[i], fs[j])):
                raise VerificationError(f"projections {i} and {j} are not orthogonal")
        for h, f in zip(result.h_list, fs):
            v = self._isometry(h, result.p)
            if not alg.equals(alg.mul(alg.adjoint(v), v), alg.one()):
                raise VerificationError(f"u_{h} s^{result.p} is not an isometry")
            if not alg.equals(alg.mul(v, alg.adjoint(v)), f):
                raise VerificationError(f"range projection of u_{h} s^{result.p} differs from f")

    # ========== CRITERION ==========

    def _scalar_multiple(self, z: AlgebraElement, f: AlgebraElement) -> Optional[GaussianRational]:
        alg = self.algebra
        reduced = alg.normal_form(z)
        if reduced.is_zero_syntactically:
            return GaussianRational()
        _, coeff = next(reduced.ordered())
        return coeff if alg.equals(z, f.scale(coeff)) else None

    def certificate_holds(self, y: Sequence[QTerm], result: OrthoResult) -> bool:
        for idx in dict.fromkeys(t.index for t in y if t.is_critical):
            for h in result.h_list:
                try:
                    if self.critical_exponent(idx, h) > result.p:
                        return False
                except (CompanionRetry, SaturatedValuation):
                    return False
        return True

    def verify_li(self, y: Sequence[QTerm], result: OrthoResult) -> LiReport:
        """
        Recheck the four conditions on a result, without raising.

        Args:
            y: The Q-form the result was built for
            result: Output of build() or with_exponent()

        Returns:
            LiReport with verdicts 'i' to 'iv', norms, scalars and failure lines
        """
        alg = self.algebra
        failures: List[str] = []
        Y = alg.from_qform(y)
        E = alg.expectation(Y)
        fs = [alg.element(f) for f in result.f_list]

        orthogonal = True
        for i, j in itertools.combinations(range(len(fs)), 2):
            if not alg.is_zero(alg.mul(fs[i], fs[j])):
                orthogonal = False
                failures.append(f"f_{i} f_{j} != 0")

        isometries = True
        for i, (h, f) in enumerate(zip(result.h_list, fs)):
            v = self._isometry(h, result.p)
            if not (alg.equals(alg.mul(alg.adjoint(v), v), alg.one())
                    and alg.equals(alg.mul(v, alg.adjoint(v)), f)):
                isometries = False
                failures.append(f"f_{i} is not equivalent to 1")

        compressed = alg.zero()
        for f in fs:
            compressed = compressed + alg.product(f, E, f)
        norm_e = alg.diagonal_norm_sq(E)
        norm_c = alg.diagonal_norm_sq(compressed)
        if norm_e != norm_c:
            failures.append(f"compressed norm {norm_c} != {norm_e}")

        identity = True
        scalars: List[Optional[GaussianRational]] = []
        for i, f in enumerate(fs):
            left = alg.product(f, Y, f)
            right = alg.product(f, E, f)
            scalar = self._scalar_multiple(right, f)
            scalars.append(scalar)
            if not alg.equals(left, right) or scalar is None:
                identity = False
                failures.append(f"f_{i} y f_{i} != f_{i} E(y) f_{i} in C f_{i}")

        certificate = self.certificate_holds(y, result)
        if not certificate:
            failures.append(f"critical quantities not separated at p={result.p}")

        verdicts = {
            'i': orthogonal,
            'ii': isometries,
            'iii': norm_e == norm_c,
            'iv': identity and certificate,
        }
        if not all(verdicts.values()):
            logger.warning("criterion not met", p=result.p, failures=len(failures))
        return LiReport(verdicts, identity, certificate, tuple(scalars), norm_e, norm_c, tuple(failures))

    def projections_bounded(self, result: OrthoResult) -> bool:
        """1 - sum f_i has nonnegative real coefficients in normal form"""
        alg = self.algebra
        total = alg.zero()
        for f in result.f_list:
            total = total + alg.element(f)
        remainder = alg.normal_form(alg.one() - total)
        return all(c.is_real and c.re >= 0 for c in remainder.terms.values())
