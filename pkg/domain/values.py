"""
Value objects - immutable, validated values
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Tuple, Union

Number = Union[int, Fraction, 'GaussianRational']


@dataclass(frozen=True)
class GaussianRational:
    """Exact complex number with rational parts"""
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, 're', Fraction(self.re))
        object.__setattr__(self, 'im', Fraction(self.im))

    @classmethod
    def of(cls, value: Number) -> 'GaussianRational':
        if isinstance(value, GaussianRational):
            return value
        return cls(Fraction(value), Fraction(0))

    def __add__(self, other: Number) -> 'GaussianRational':
        other = GaussianRational.of(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self) -> 'GaussianRational':
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other: Number) -> 'GaussianRational':
        return self + (-GaussianRational.of(other))

    def __mul__(self, other: Number) -> 'GaussianRational':
        other = GaussianRational.of(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def conjugate(self) -> 'GaussianRational':
        return GaussianRational(self.re, -self.im)

    def abs_sq(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im} i"
        sign = '-' if self.im < 0 else '+'
        return f"{self.re} {sign} {abs(self.im)} i"


ZERO = GaussianRational()
ONE = GaussianRational(Fraction(1))


@dataclass(frozen=True)
class GroupElement:
    """
    Element of Z^d / K in additive notation.

    `moduli` has one entry per coordinate, 0 for a free coordinate; coordinates
    with a modulus are kept in [0, modulus).
    """
    coords: Tuple[int, ...]
    moduli: Tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != len(self.moduli):
            raise ValueError("coords and moduli must have the same length")
        for c, m in zip(self.coords, self.moduli):
            if m and not 0 <= c < m:
                raise ValueError(f"coordinate {c} not reduced modulo {m}")

    @classmethod
    def of(cls, coords: Iterable[int], moduli: Iterable[int]) -> 'GroupElement':
        moduli = tuple(int(m) for m in moduli)
        coords = tuple(int(c) % m if m else int(c) for c, m in zip(coords, moduli))
        return cls(coords, moduli)

    @classmethod
    def zero(cls, moduli: Iterable[int]) -> 'GroupElement':
        moduli = tuple(moduli)
        return cls((0,) * len(moduli), moduli)

    @property
    def rank(self) -> int:
        return len(self.coords)

    @property
    def is_zero(self) -> bool:
        return not any(self.coords)

    def _check(self, other: 'GroupElement'):
        if self.moduli != other.moduli:
            raise ValueError("group elements from different groups")

    def __add__(self, other: 'GroupElement') -> 'GroupElement':
        self._check(other)
        return GroupElement.of((a + b for a, b in zip(self.coords, other.coords)), self.moduli)

    def __neg__(self) -> 'GroupElement':
        return GroupElement.of((-a for a in self.coords), self.moduli)

    def __sub__(self, other: 'GroupElement') -> 'GroupElement':
        return self + (-other)

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.coords)
