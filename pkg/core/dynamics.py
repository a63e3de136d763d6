"""
DYNAMICS
The enveloping group S-bar = GG x| Z of the Ore semigroup G x| N, depth-truncated
points of the inverse limit of G/phi^n(G), the partial action on them and the
spectrum of the relations.

GG is the direct limit of G under phi; (g, i) stands for phi^-i(g). A point of
depth N is stored as its level-N class; lower entries are its projections.
"""

import itertools
import random
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from core.algebra import WordAlgebra
from domain.aggregates import AlgebraElement
from domain.entities import (
    CheckReport,
    CosetHandle,
    Cylinder,
    DomainKind,
    DomainStatus,
    FreenessKind,
    FreenessVerdict,
    LimitElement,
    ProfinitePoint,
    QTerm,
    SemidirectElement,
)
from domain.values import GroupElement
from utils.helpers import DepthExhausted, OutOfDomain, PreconditionError, VerificationError
from utils.logger import get_logger

logger = get_logger(__name__)

Word = List[SemidirectElement]


class DynamicsEngine:
    """
    The semidirect product of the direct limit by Z, its partial action on
    the profinite completion, and the spectrum of the diagonal.

    Args:
        algebra: Word algebra of the context
        relations_sample_bound: Coordinate bound of the relations sample
        spectrum_level_bound: Deepest level the spectrum check refines to
        spectrum_shift_bound: Largest negative shift in spectrum samples
    """

    def __init__(self, algebra: WordAlgebra, relations_sample_bound: int = 1,
                 spectrum_level_bound: int = 2, spectrum_shift_bound: int = 2):
        self.algebra = algebra
        self.context = algebra.context
        self.relations_sample_bound = relations_sample_bound
        self.spectrum_level_bound = spectrum_level_bound
        self.spectrum_shift_bound = spectrum_shift_bound

    # ========== DIRECT LIMIT ==========

    def limit(self, g: GroupElement, depth: int = 0) -> LimitElement:
        """Canonical phi^-depth(g): strip while g has a preimage"""
        ctx = self.context
        if g.is_zero:
            return LimitElement(g, 0)
        while depth > 0:
            pre = ctx.preimage(g, 1)
            if pre is None:
                break
            g, depth = pre, depth - 1
        return LimitElement(g, depth)

    def limit_add(self, x: LimitElement, y: LimitElement) -> LimitElement:
        ctx = self.context
        depth = max(x.depth, y.depth)
        total = ctx.apply_endo(x.g, depth - x.depth) + ctx.apply_endo(y.g, depth - y.depth)
        return self.limit(total, depth)

    def limit_neg(self, x: LimitElement) -> LimitElement:
        return LimitElement(-x.g, x.depth)

    def limit_shift(self, x: LimitElement, k: int) -> LimitElement:
        """phi-bar^k, the extension of phi to GG (an automorphism there)"""
        if k >= 0:
            if x.depth >= k:
                return LimitElement(x.g, x.depth - k)
            return self.limit(self.context.apply_endo(x.g, k - x.depth), 0)
        return self.limit(x.g, x.depth - k)

    # ========== SEMIDIRECT PRODUCT ==========

    def element(self, g: GroupElement, depth: int = 0, n: int = 0) -> SemidirectElement:
        return SemidirectElement(self.limit(g, depth), n)

    def identity(self) -> SemidirectElement:
        return SemidirectElement(LimitElement(self.context.zero(), 0), 0)

    def is_identity(self, t: SemidirectElement) -> bool:
        return t.n == 0 and t.a.g.is_zero

    def multiply(self, x: SemidirectElement, y: SemidirectElement) -> SemidirectElement:
        return SemidirectElement(self.limit_add(x.a, self.limit_shift(y.a, x.n)), x.n + y.n)

    def product(self, factors: Iterable[SemidirectElement]) -> SemidirectElement:
        result = self.identity()
        for factor in factors:
            result = self.multiply(result, factor)
        return result

    def inverse(self, x: SemidirectElement) -> SemidirectElement:
        return SemidirectElement(self.limit_neg(self.limit_shift(x.a, -x.n)), -x.n)

    def ore_witness(self, s1: SemidirectElement, s2: SemidirectElement
                    ) -> Tuple[SemidirectElement, SemidirectElement, SemidirectElement]:
        """
        Common left multiple of two semigroup elements.

        Args:
            s1: Element (g1, n1) with depth 0 and n1 >= 0
            s2: Element (g2, n2) with depth 0 and n2 >= 0

        Returns:
            (l1, l2, common) with l1 s1 = l2 s2 = common = (e, n1 + n2)

        Raises:
            PreconditionError: If either element is outside the semigroup
        """
        if not (s1.in_semigroup and s2.in_semigroup):
            raise PreconditionError("Ore witnesses need semigroup elements (depth 0, n >= 0)")
        ctx = self.context
        l1 = self.element(ctx.apply_endo(-s1.a.g, s2.n), 0, s2.n)
        l2 = self.element(ctx.apply_endo(-s2.a.g, s1.n), 0, s1.n)
        common = self.element(ctx.zero(), 0, s1.n + s2.n)
        if self.multiply(l1, s1) != common or self.multiply(l2, s2) != common:
            raise VerificationError("Ore identity failed")
        return l1, l2, common

    # ========== PARTIAL REPRESENTATION ==========

    def lift_depth(self, t: SemidirectElement) -> int:
        return max(t.a.depth, -t.n, 0)

    def pi(self, t: SemidirectElement) -> AlgebraElement:
        """s*^i u_g s^(n+i) with i lifted so that n + i >= 0"""
        alg = self.algebra
        lift = self.lift_depth(t)
        g = self.context.apply_endo(t.a.g, lift - t.a.depth)
        return alg.product(alg.s_star(lift), alg.u(g), alg.s(t.n + lift))

    def psi_word(self, t: SemidirectElement) -> Word:
        """Generator word (e,-1)^i (g,0) (e,1)^(n+i) whose pi-image is pi(t)"""
        ctx = self.context
        lift = self.lift_depth(t)
        g = ctx.apply_endo(t.a.g, lift - t.a.depth)
        down = self.element(ctx.zero(), 0, -1)
        up = self.element(ctx.zero(), 0, 1)
        return [down] * lift + [self.element(g)] + [up] * (t.n + lift)

    # ========== POINTS AND CYLINDERS ==========

    def point(self, x: GroupElement, depth: int) -> ProfinitePoint:
        return ProfinitePoint(depth, self.context.coset_of(x, depth))

    def point_rep(self, x: ProfinitePoint) -> GroupElement:
        return self.context.rep_of(x.rep)

    def level_rep(self, x: ProfinitePoint, m: int) -> GroupElement:
        if m > x.depth:
            raise DepthExhausted(f"level {m} requested from a point of depth {x.depth}")
        return self.context.canonical(self.point_rep(x), m)

    def cylinder(self, m: int, reps: Iterable[GroupElement]) -> Cylinder:
        handles = dict.fromkeys(self.context.coset_of(g, m) for g in reps)
        return Cylinder(m, tuple(handles))

    def in_cylinder(self, x: ProfinitePoint, c: Cylinder) -> bool:
        return self.context.coset_of(self.level_rep(x, c.m), c.m) in c.classes

    def points(self, depth: int) -> List[ProfinitePoint]:
        return [ProfinitePoint(depth, CosetHandle(depth, k)) for k in range(len(self.context.transversal(depth)))]

    # ========== PARTIAL ACTION ==========

    def domain_status(self, t: SemidirectElement) -> DomainStatus:
        """Points x with t in rho(x); this is the range of x -> t.x"""
        ctx = self.context
        depth, n = t.a.depth, t.n
        if n >= 0:
            if depth > 0:
                return DomainStatus(DomainKind.EMPTY)
            if n == 0 or ctx.index(1) == 1:
                return DomainStatus(DomainKind.FULL)
            return DomainStatus(DomainKind.PROPER, Cylinder(n, (ctx.coset_of(t.a.g, n),)))
        if depth <= -n:
            return DomainStatus(DomainKind.FULL)
        return DomainStatus(DomainKind.EMPTY)

    def action_domain(self, t: SemidirectElement) -> DomainStatus:
        """Domain of the map x -> t.x, the set where t^-1 is defined"""
        return self.domain_status(self.inverse(t))

    def apply_partial(self, t: SemidirectElement, x: ProfinitePoint) -> ProfinitePoint:
        """
        Args:
            t: Element acting
            x: Point in the domain of t

        Returns:
            t.x, known to depth x.depth - max(0, -t.n)

        Raises:
            OutOfDomain: If x lies outside the domain of t
            DepthExhausted: If x is too shallow to decide membership or to shift
        """
        domain = self.action_domain(t)
        if domain.kind is DomainKind.EMPTY:
            raise OutOfDomain(f"{_text(t)} acts on no point")
        if domain.kind is DomainKind.PROPER:
            c = domain.cylinder
            if x.depth < c.m:
                raise DepthExhausted(f"point of depth {x.depth} cannot be tested against level {c.m}")
            if not self.in_cylinder(x, c):
                raise OutOfDomain(f"point is outside the domain of {_text(t)}")
        out_depth = x.depth - max(0, -t.n)
        if out_depth < 0:
            raise DepthExhausted(f"{_text(t)} needs depth {-t.n}, point has {x.depth}")
        value = self.limit_add(t.a, self.limit_shift(LimitElement(self.point_rep(x), 0), t.n))
        if value.depth:
            raise VerificationError(f"image entry of {_text(t)} left G")
        return self.point(value.g, out_depth)

    # ========== SPECTRUM ==========

    def xi_contains(self, x: ProfinitePoint, w: SemidirectElement) -> bool:
        """w in rho(x) = {(x_n + phi-bar^n(h), n)}"""
        if w.n <= 0:
            return self.limit_shift(w.a, -w.n).depth == 0
        diff = self.limit_add(w.a, LimitElement(-self.level_rep(x, w.n), 0))
        return diff.depth == 0 and self.context.member(diff.g, w.n)

    def _sample(self) -> List[GroupElement]:
        ctx = self.context
        out = {ctx.zero(): None}
        for i in range(ctx.rank):
            out.setdefault(ctx.basis(i), None)
            out.setdefault(-ctx.basis(i), None)
        return list(out)

    def spectrum_members(self, x: ProfinitePoint) -> List[SemidirectElement]:
        members = []
        for n in range(-self.spectrum_shift_bound, x.depth + 1):
            base = LimitElement(self.level_rep(x, n), 0) if n > 0 else LimitElement(self.context.zero(), 0)
            for h in self._sample():
                members.append(SemidirectElement(self.limit_add(base, self.limit_shift(LimitElement(h, 0), n)), n))
        return list(dict.fromkeys(members))

    def spectrum_check(self, x: ProfinitePoint) -> CheckReport:
        """Closure of rho(x) under the hatted relations on a bounded sample"""
        ctx = self.context
        report = CheckReport()
        report.record('unit', self.xi_contains(x, self.identity()))
        sample = self._sample()
        for g in self.spectrum_members(x):
            report.record('member', self.xi_contains(x, g), _text(g))
            for h in sample:
                right = self.multiply(g, self.element(h))
                report.record('R1', self.xi_contains(x, right), f"{_text(g)} * ({h},0)")
            for k in range(1, self.spectrum_shift_bound + 1):
                down = self.multiply(g, self.element(ctx.zero(), 0, -k))
                report.record('R2', self.xi_contains(x, down), f"{_text(g)} * (e,-{k})")
            for k in range(1, self.spectrum_level_bound + 1):
                if g.n + k > x.depth:
                    break
                hits = sum(1 for c in ctx.transversal(k) if self.xi_contains(x, self.multiply(g, self.element(c, 0, k))))
                report.record('R3', hits == 1, f"{_text(g)} level {k}: {hits} classes")
        if not report.all_true:
            logger.warning("spectrum check failed", depth=x.depth, failures=len(report.failures))
        return report

    def point_from_spectrum(self, contains: Callable[[SemidirectElement], bool], depth: int) -> ProfinitePoint:
        """The point whose rho-image agrees with `contains` at every level up to depth"""
        ctx = self.context
        entry = ctx.zero()
        for level in range(1, depth + 1):
            hits = [c for c in ctx.transversal(level) if contains(self.element(c, 0, level))]
            if len(hits) != 1:
                raise VerificationError(f"{len(hits)} classes qualify at level {level}")
            if ctx.canonical(hits[0], level - 1) != entry:
                raise VerificationError(f"level {level} entry does not refine level {level - 1}")
            entry = hits[0]
        return self.point(entry, depth)

    # ========== FREENESS AND MINIMALITY ==========

    def freeness_witness(self, t: SemidirectElement, c: Cylinder) -> FreenessVerdict:
        """
        A point of c moved by t, with the level at which the move is visible.

        Candidates are the one-level refinements of c inside the domain of t.
        For a candidate u the displacement t.u - u lies in G; a nonzero
        displacement of valuation v is visible at level v + 1.

        Args:
            t: Non-identity element
            c: Target cylinder

        Returns:
            FreenessVerdict: WITNESS with point and level, DOMAIN_EMPTY, or
            INCONCLUSIVE with a reason

        Raises:
            PreconditionError: If t is the identity
        """
        ctx = self.context
        if self.is_identity(t):
            raise PreconditionError("the identity fixes every point")
        domain = self.action_domain(t)
        if domain.kind is DomainKind.EMPTY:
            return FreenessVerdict(FreenessKind.DOMAIN_EMPTY, reason="domain is empty")

        if domain.kind is DomainKind.PROPER:
            dom_level, dom_rep = domain.cylinder.m, ctx.rep_of(domain.cylinder.classes[0])
        else:
            dom_level, dom_rep = 0, ctx.zero()
        level = max(c.m, dom_level) + 1
        wanted = set(ctx.rep_of(h) for h in c.classes)
        candidates = [u for u in ctx.transversal(level)
                      if ctx.canonical(u, c.m) in wanted and ctx.canonical(u, dom_level) == dom_rep]
        if not candidates:
            return FreenessVerdict(FreenessKind.DOMAIN_EMPTY, reason="cylinder misses the domain")

        reason = "every candidate is fixed"
        for u in candidates:
            moved = self.limit_add(t.a, self.limit_shift(LimitElement(u, 0), t.n))
            shift = self.limit_add(moved, LimitElement(-u, 0))
            if shift.depth or shift.g.is_zero:
                continue
            valuation = ctx.valuation(shift.g)
            if valuation.saturated:
                reason = f"displacement of {u} saturates max_depth {ctx.max_depth}"
                continue
            k = valuation.value + 1
            depth = max(level, k + max(0, -t.n))
            if depth > ctx.max_depth:
                reason = f"certificate needs depth {depth} beyond max_depth {ctx.max_depth}"
                continue
            x = self.point(u, depth)
            image = self.apply_partial(t, x)
            if self.level_rep(image, k) == self.level_rep(x, k):
                raise VerificationError(f"candidate {u} is not moved at level {k}")
            logger.debug("freeness witness", t=_text(t), candidate=str(u), level=k)
            return FreenessVerdict(FreenessKind.WITNESS, x, k)

        logger.warning("freeness inconclusive", t=_text(t), reason=reason)
        return FreenessVerdict(FreenessKind.INCONCLUSIVE, reason=reason)

    def orbit_mover(self, x: ProfinitePoint, c: Cylinder) -> SemidirectElement:
        """Translation carrying x into c"""
        if x.depth < c.m:
            raise DepthExhausted(f"point of depth {x.depth} cannot reach level {c.m}")
        u = self.context.rep_of(c.classes[0])
        t = self.element(u - self.level_rep(x, c.m))
        if not self.in_cylinder(self.apply_partial(t, x), c):
            raise VerificationError("orbit mover missed the cylinder")
        return t

    # ========== RELATION SUITES ==========

    def sample_elements(self, bound: int, max_depth: int = 2, max_shift: int = 2) -> List[SemidirectElement]:
        ctx = self.context
        groups = [ctx.element(coords) for coords in itertools.product(range(-bound, bound + 1), repeat=ctx.rank)]
        out = {}
        for g, i, n in itertools.product(groups, range(max_depth + 1), range(-max_shift, max_shift + 1)):
            out.setdefault(self.element(g, i, n), None)
        return list(out)

    def relations_check(self, sample_bound: Optional[int] = None, pair_limit: int = 400, seed: int = 0) -> CheckReport:
        """
        Partial-representation axioms, the relations R1-R3 and the Phi/Psi round trips.

        Args:
            sample_bound: Coordinate bound of sampled elements; engine default when None
            pair_limit: Most (r, t) pairs checked, drawn with `seed` past the limit
            seed: Seed for the pair draw

        Returns:
            CheckReport with one bucket per law
        """
        alg = self.algebra
        ctx = self.context
        bound = self.relations_sample_bound if sample_bound is None else sample_bound
        report = CheckReport()
        sample = self.sample_elements(bound)
        one = alg.one()
        e = ctx.zero()
        images = {t: self.pi(t) for t in sample}

        def pi(t: SemidirectElement) -> AlgebraElement:
            if t not in images:
                images[t] = self.pi(t)
            return images[t]

        report.record('PR1', alg.equals(pi(self.identity()), one))
        for t in sample:
            report.record('PR2', alg.equals(pi(self.inverse(t)), alg.adjoint(pi(t))), _text(t))

        pairs = list(itertools.product(sample, repeat=2))
        if len(pairs) > pair_limit:
            pairs = random.Random(seed).sample(pairs, pair_limit)
        for t, r in pairs:
            r_inv = pi(self.inverse(r))
            left = alg.product(pi(t), pi(r), r_inv)
            right = alg.mul(pi(self.multiply(t, r)), r_inv)
            report.record('PR3', alg.equals(left, right), f"t={_text(t)} r={_text(r)}")

        groups = list(dict.fromkeys(t.a.g for t in sample if t.a.depth == 0))
        for g in groups:
            x = self.element(g)
            report.record('R1', alg.equals(alg.mul(pi(x), pi(self.inverse(x))), one), str(g))
        for n in range(1, 4):
            x = self.element(e, 0, -n)
            report.record('R2', alg.equals(alg.mul(pi(x), pi(self.inverse(x))), one), f"n={n}")
        for n in range(0, 4):
            total = alg.zero()
            for c in ctx.transversal(n):
                x = self.element(c, 0, n)
                total = total + alg.mul(pi(x), pi(self.inverse(x)))
            report.record('R3', alg.equals(total, one), f"n={n}")

        up = pi(self.element(e, 0, 1))
        report.record('isometry', alg.equals(alg.mul(alg.adjoint(up), up), one))
        for g in groups:
            u_g = pi(self.element(g))
            report.record('unitary', alg.equals(alg.mul(alg.adjoint(u_g), u_g), one), str(g))
            report.record('intertwine', alg.equals(alg.mul(up, u_g),
                                                   alg.mul(pi(self.element(ctx.apply_endo(g, 1))), up)), str(g))
            for h in groups:
                report.record('translation', alg.equals(alg.mul(u_g, pi(self.element(h))),
                                                        pi(self.element(g + h))), f"{g} {h}")
        partition = alg.zero()
        for c in ctx.transversal(1):
            u_c = pi(self.element(c))
            partition = partition + alg.product(u_c, up, alg.adjoint(up), alg.adjoint(u_c))
        report.record('partition', alg.equals(partition, one))

        for g in groups:
            report.record('phi_psi', alg.equals(pi(self.element(g)), alg.u(g)), f"u[{g}]")
        report.record('phi_psi', alg.equals(pi(self.element(e, 0, 1)), alg.s()), "s")
        report.record('phi_psi', alg.equals(pi(self.element(e, 0, -1)), alg.s_star()), "s*")
        for t in sample:
            word = self.psi_word(t)
            report.record('psi_phi', self.product(word) == t, _text(t))
            report.record('psi_phi', alg.equals(alg.product(*(pi(w) for w in word)), pi(t)), _text(t))

        log = logger.info if report.all_true else logger.warning
        log("relations checked", elements=len(sample), pairs=len(pairs), all_true=report.all_true)
        return report

    def qterm_word(self, term: QTerm) -> Word:
        e = self.context.zero()
        return [
            self.element(e, 0, -term.n),
            self.element(-term.h),
            self.element(term.fg),
            self.element(e, 0, term.fk),
            self.element(e, 0, -term.fk),
            self.element(-term.fg),
            self.element(term.h_prime),
            self.element(e, 0, term.m),
        ]

    def sample_qterms(self, bound: int = 1, max_exponent: int = 2, limit: int = 200, seed: int = 0) -> List[QTerm]:
        ctx = self.context
        groups = [ctx.element(coords) for coords in itertools.product(range(-bound, bound + 1), repeat=ctx.rank)]
        exps = range(max_exponent + 1)
        terms = [QTerm(n, h, fg, k, hp, m)
                 for n, m, k in itertools.product(exps, exps, exps)
                 for h, hp, fg in itertools.product(groups, groups, groups)]
        if len(terms) > limit:
            terms = random.Random(seed).sample(terms, limit)
        return terms

    def expectation_correspondence_check(self, samples: Sequence[QTerm]) -> CheckReport:
        """Expectation keeps a term exactly when its S-bar product is the identity"""
        alg = self.algebra
        report = CheckReport()
        for term in samples:
            retained = self.is_identity(self.product(self.qterm_word(term)))
            x = alg.from_qterm(term)
            image = alg.expectation(x)
            ok = alg.equals(image, x) if retained else alg.is_zero(image)
            report.record('retained' if retained else 'dropped', ok,
                          f"n={term.n} h={term.h} h'={term.h_prime} m={term.m}")
        report.record('expectation_correspondence', report.all_true)
        return report


def _text(t: SemidirectElement) -> str:
    return f"(({t.a.g}),{t.a.depth},{t.n})"
