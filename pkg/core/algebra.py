"""
WORD ALGEBRA
Normal-form arithmetic on the span of monomials u_a s^p s*^q u_b.

Products use the closed form
    (a,p,q,b)(c,r,t,d) = 0                              if b+c not in phi^min(q,r)(G)
                       = (a+phi^p(e), p+r-q, t, d)       if q <= r
                       = (a, p, q-r+t, phi^t(e)+d)       if q > r
with e = phi^-min(q,r)(b+c). Equality is decided by splitting into gauge
degrees and raising every term of a degree to the largest q in it.
"""

from collections import defaultdict
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from core.group import EndoContext
from domain.aggregates import AlgebraElement
from domain.entities import Letter, LetterKind, Monomial, QTerm
from domain.values import GaussianRational, GroupElement, Number, ONE
from utils.helpers import CapExceeded, NotDiagonal, VerificationError
from utils.logger import get_logger

logger = get_logger(__name__)


class WordAlgebra:
    """Engine bound to one endomorphism context"""

    def __init__(self, context: EndoContext):
        self.context = context
        self.word_length_bound = context.spec.word_length_bound

    # ========== CONSTRUCTORS ==========

    def monomial(self, a: GroupElement, p: int, q: int, b: GroupElement) -> Monomial:
        """Canonical monomial: a reduced modulo phi^p(G), the remainder pushed into b"""
        ctx = self.context
        a_hat = ctx.canonical(a, p)
        if a_hat == a:
            return Monomial(a, p, q, b)
        c = ctx.preimage(a - a_hat, p)
        if c is None:
            raise VerificationError(f"canonical representative of {a} at level {p} is not congruent")
        return Monomial(a_hat, p, q, ctx.apply_endo(c, q) + b)

    def element(self, mono: Monomial, coeff: Number = 1) -> AlgebraElement:
        return AlgebraElement.from_pairs([(mono, GaussianRational.of(coeff))])

    def zero(self) -> AlgebraElement:
        return AlgebraElement()

    def one(self) -> AlgebraElement:
        e = self.context.zero()
        return self.element(Monomial(e, 0, 0, e))

    def scalar(self, coeff: Number) -> AlgebraElement:
        return self.one().scale(coeff)

    def u(self, g: GroupElement) -> AlgebraElement:
        return self.element(self.monomial(g, 0, 0, self.context.zero()))

    def s(self, power: int = 1) -> AlgebraElement:
        e = self.context.zero()
        return self.element(Monomial(e, power, 0, e))

    def s_star(self, power: int = 1) -> AlgebraElement:
        e = self.context.zero()
        return self.element(Monomial(e, 0, power, e))

    def projection(self, g: GroupElement, k: int) -> AlgebraElement:
        """u_g s^k s*^k u_-g, the projection onto g + phi^k(G)"""
        return self.element(self.monomial(g, k, k, -g))

    def from_word(self, word: Sequence[Letter]) -> AlgebraElement:
        if len(word) > self.word_length_bound:
            raise CapExceeded("word_length_bound", self.word_length_bound, len(word))
        result = self.one()
        for letter in word:
            result = self.mul(result, self._letter(letter))
        return result

    def _letter(self, letter: Letter) -> AlgebraElement:
        if letter.kind is LetterKind.U:
            return self.u(letter.g)
        if letter.kind is LetterKind.S:
            return self.s()
        return self.s_star()

    # ========== PRODUCTS ==========

    def mul_monomials(self, x: Monomial, y: Monomial) -> Optional[Monomial]:
        ctx = self.context
        k = min(x.q, y.p)
        e = ctx.preimage(x.b + y.a, k)
        if e is None:
            return None
        if x.q <= y.p:
            return self.monomial(x.a + ctx.apply_endo(e, x.p), x.p + y.p - x.q, y.q, y.b)
        return self.monomial(x.a, x.p, x.q - y.p + y.q, ctx.apply_endo(e, y.q) + y.b)

    def mul(self, x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
        pairs = []
        for mx, cx in x.terms.items():
            for my, cy in y.terms.items():
                product = self.mul_monomials(mx, my)
                if product is not None:
                    pairs.append((product, cx * cy))
        return AlgebraElement.from_pairs(pairs)

    def product(self, *factors: AlgebraElement) -> AlgebraElement:
        result = self.one()
        for factor in factors:
            result = self.mul(result, factor)
        return result

    def adjoint_monomial(self, mono: Monomial) -> Monomial:
        return self.monomial(-mono.b, mono.q, mono.p, -mono.a)

    def adjoint(self, x: AlgebraElement) -> AlgebraElement:
        return AlgebraElement.from_pairs(
            (self.adjoint_monomial(m), c.conjugate()) for m, c in x.terms.items()
        )

    # ========== LEVELS AND NORMAL FORM ==========

    def raise_level(self, mono: Monomial) -> AlgebraElement:
        """Insert sum_g u_g s s* u_-g between s^p and s*^q"""
        ctx = self.context
        pairs = []
        for g in ctx.transversal(1):
            raised = self.monomial(
                mono.a + ctx.apply_endo(g, mono.p),
                mono.p + 1,
                mono.q + 1,
                ctx.apply_endo(-g, mono.q) + mono.b,
            )
            pairs.append((raised, ONE))
        return AlgebraElement.from_pairs(pairs)

    def raise_to(self, mono: Monomial, coeff: GaussianRational, q_target: int) -> List[Tuple[Monomial, GaussianRational]]:
        steps = q_target - mono.q
        if steps <= 0:
            return [(mono, coeff)]
        ctx = self.context
        expected = ctx.index(1) ** steps
        if expected > ctx.enum_cap:
            raise CapExceeded("enum_cap", ctx.enum_cap, expected)
        frontier = [mono]
        for _ in range(steps):
            frontier = [m for current in frontier for m in self.raise_level(current).terms]
        return [(m, coeff) for m in frontier]

    def _reduce_index_one(self, mono: Monomial) -> Monomial:
        # surjective phi: ss* = 1, so only |p - q| survives
        ctx = self.context
        if mono.p >= mono.q:
            delta = mono.p - mono.q
            return self.monomial(mono.a + ctx.apply_endo(mono.b, delta), delta, 0, ctx.zero())
        delta = mono.q - mono.p
        return self.monomial(ctx.zero(), 0, delta, ctx.apply_endo(mono.a, delta) + mono.b)

    def degree_components(self, x: AlgebraElement) -> Dict[int, AlgebraElement]:
        buckets: Dict[int, List[Tuple[Monomial, GaussianRational]]] = defaultdict(list)
        for mono, coeff in x.terms.items():
            buckets[mono.degree].append((mono, coeff))
        return {deg: AlgebraElement.from_pairs(pairs) for deg, pairs in sorted(buckets.items())}

    def normal_form(self, x: AlgebraElement) -> AlgebraElement:
        if self.context.index(1) == 1:
            x = AlgebraElement.from_pairs((self._reduce_index_one(m), c) for m, c in x.terms.items())

        pairs: List[Tuple[Monomial, GaussianRational]] = []
        for degree, component in self.degree_components(x).items():
            level = max(m.q for m in component.terms)
            for mono, coeff in component.terms.items():
                pairs.extend(self.raise_to(mono, coeff, level))
            logger.debug("degree raised", degree=degree, level=level, terms=len(component))
        return AlgebraElement.from_pairs(pairs)

    def is_zero(self, x: AlgebraElement) -> bool:
        return self.normal_form(x).is_zero_syntactically

    def equals(self, x: AlgebraElement, y: AlgebraElement) -> bool:
        return self.is_zero(x - y)

    # ========== EXPECTATION AND DIAGONAL NORMS ==========

    def expectation(self, x: AlgebraElement) -> AlgebraElement:
        return AlgebraElement({m: c for m, c in x.terms.items() if m.is_diagonal})

    def diagonal_atoms(self, x: AlgebraElement) -> Dict[GroupElement, GaussianRational]:
        """Atom value map at the common level; atoms missing from the map carry 0"""
        for mono in x.terms:
            if not mono.is_diagonal:
                raise NotDiagonal(f"term with p={mono.p}, q={mono.q} is not diagonal")
        if not x.terms:
            return {}
        level = max(m.q for m in x.terms)
        atoms: Dict[GroupElement, GaussianRational] = {}
        for mono, coeff in x.terms.items():
            for atom, c in self.raise_to(mono, coeff, level):
                atoms[atom.a] = atoms.get(atom.a, GaussianRational()) + c
        return atoms

    def diagonal_norm_sq(self, x: AlgebraElement) -> Fraction:
        atoms = self.diagonal_atoms(x)
        return max((c.abs_sq() for c in atoms.values()), default=Fraction(0))

    # ========== Q-FORM ==========

    def from_qterm(self, term: QTerm) -> AlgebraElement:
        f = self.projection(term.fg, term.fk)
        body = self.product(
            self.s_star(term.n) if term.n else self.one(),
            self.u(-term.h),
            f,
            self.u(term.h_prime),
            self.s(term.m) if term.m else self.one(),
        )
        return body.scale(term.coeff)

    def from_qform(self, terms: Iterable[QTerm]) -> AlgebraElement:
        total = self.zero()
        for term in terms:
            total = total + self.from_qterm(term)
        return total

    def monomial_to_qterm(self, mono: Monomial, coeff: GaussianRational) -> QTerm:
        ctx = self.context
        delta = mono.degree
        if delta >= 0:
            # u_a s^p s*^q u_b = (u_a s^p s*^p u_-a) u_{a + phi^delta(b)} s^delta
            return QTerm(0, ctx.zero(), mono.a, mono.p, mono.a + ctx.apply_endo(mono.b, delta), delta, coeff)
        return self.monomial_to_qterm(self.adjoint_monomial(mono), coeff.conjugate()).adjoint()

    def to_qform(self, x: AlgebraElement) -> List[QTerm]:
        return [self.monomial_to_qterm(m, c) for m, c in x.ordered()]
