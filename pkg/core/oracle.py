"""
L2 ORACLE
The concrete representation on l2(G): U_g xi_x = xi_{g+x}, S xi_x = xi_{phi(x)}.
Every monomial maps basis vectors to basis vectors or to zero, so finitely
supported vectors are enough and the action is exact on any window.
"""

import itertools
import random
from typing import List, Optional, Sequence, Tuple

from core.algebra import WordAlgebra
from core.group import EndoContext
from domain.aggregates import AlgebraElement, FiniteVector
from domain.entities import Letter, LetterKind, Monomial
from domain.values import GroupElement, ONE
from utils.logger import get_logger

logger = get_logger(__name__)

BasisPoint = GroupElement


class L2Oracle:
    """
    Exact action of algebra elements on the basis vectors delta_x of l2(G).

    u_g translates, s applies phi and s* pulls back along phi (zero off the
    image). Two elements that agree on every basis vector of a window agree
    there as operators, which is what the equality checks rely on.
    """

    def __init__(self, algebra: WordAlgebra):
        self.algebra = algebra
        self.context: EndoContext = algebra.context

    def act_monomial(self, mono: Monomial, x: BasisPoint) -> Optional[BasisPoint]:
        """
        Image of delta_x under the monomial u_a s^p s*^q u_b.

        Args:
            mono: Normal-form monomial
            x: Basis point

        Returns:
            The target point, or None when b + x is not in phi^q(G)
        """
        ctx = self.context
        y = ctx.preimage(mono.b + x, mono.q)
        if y is None:
            return None
        return mono.a + ctx.apply_endo(y, mono.p)

    def act(self, element: AlgebraElement, x: BasisPoint) -> FiniteVector:
        """
        Args:
            element: Algebra element, normal form or not
            x: Basis point

        Returns:
            element applied to delta_x, coefficients merged per target
        """
        pairs = []
        for mono, coeff in element.terms.items():
            target = self.act_monomial(mono, x)
            if target is not None:
                pairs.append((target, coeff))
        return FiniteVector.from_pairs(pairs)

    def act_word(self, word: Sequence[Letter], x: BasisPoint) -> Optional[BasisPoint]:
        """Literal action, letters applied right to left"""
        ctx = self.context
        current = x
        for letter in reversed(word):
            if letter.kind is LetterKind.U:
                current = letter.g + current
            elif letter.kind is LetterKind.S:
                current = ctx.apply_endo(current, 1)
            else:
                current = ctx.preimage(current, 1)
                if current is None:
                    return None
        return current

    def word_vector(self, word: Sequence[Letter], x: BasisPoint) -> FiniteVector:
        target = self.act_word(word, x)
        if target is None:
            return FiniteVector()
        return FiniteVector({target: ONE})

    def equal_on_window(self, x: AlgebraElement, y: AlgebraElement, window: Sequence[BasisPoint]) -> bool:
        """
        Args:
            x: First element
            y: Second element
            window: Nonempty list of basis points

        Returns:
            True when x and y send every window point to the same vector

        Raises:
            ValueError: If the window is empty
        """
        if not window:
            raise ValueError("window must be nonempty")
        return all(self.act(x, point) == self.act(y, point) for point in window)

    def word_matches(self, word: Sequence[Letter], window: Sequence[BasisPoint]) -> bool:
        """from_word(word) acts like the literal word on every window point"""
        reduced = self.algebra.from_word(word)
        return all(self.act(reduced, point) == self.word_vector(word, point) for point in window)

    def separating_point(self, x: AlgebraElement, window: Sequence[BasisPoint]) -> Optional[BasisPoint]:
        """First window point where x acts nonzero, or None"""
        for point in window:
            if not self.act(x, point).is_empty:
                return point
        return None

    def window(self, radius: int) -> List[BasisPoint]:
        """All canonical points with coordinates in [-radius, radius]"""
        ctx = self.context
        points = dict.fromkeys(
            ctx.element(coords) for coords in itertools.product(range(-radius, radius + 1), repeat=ctx.rank)
        )
        return list(points)

    def random_word(self, rng: random.Random, max_length: int, displacement: int) -> List[Letter]:
        ctx = self.context
        word = []
        for _ in range(rng.randint(0, max_length)):
            kind = rng.choice((LetterKind.U, LetterKind.S, LetterKind.SSTAR))
            if kind is LetterKind.U:
                g = ctx.element(rng.randint(-displacement, displacement) for _ in range(ctx.rank))
                word.append(Letter(kind, g))
            else:
                word.append(Letter(kind))
        return word

    def random_word_suite(self, seed: int, count: int, max_length: int, displacement: int,
                          window: Sequence[BasisPoint]) -> Tuple[int, List[List[Letter]]]:
        """
        Check seeded random words against their reduced forms.

        Args:
            seed: Seed for random.Random
            count: Number of words to draw
            max_length: Longest word drawn
            displacement: Bound on the coordinates of u letters
            window: Basis points every word is compared on

        Returns:
            (number passed, list of failing words)
        """
        rng = random.Random(seed)
        failures = []
        passed = 0
        for _ in range(count):
            word = self.random_word(rng, max_length, displacement)
            if self.word_matches(word, window):
                passed += 1
            else:
                failures.append(word)
                logger.error("oracle mismatch", word=" ".join(_letter_text(l) for l in word))
        return passed, failures


def _letter_text(letter: Letter) -> str:
    if letter.kind is LetterKind.U:
        return f"u[{letter.g}]"
    return letter.kind.value
