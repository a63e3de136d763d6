"""
Aggregates - finite linear combinations with consistency rules
"""
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, Mapping, Tuple

from domain.entities import Monomial
from domain.values import GaussianRational, GroupElement, Number


def _collect(pairs: Iterable[Tuple[object, GaussianRational]]) -> Dict:
    out: Dict = {}
    for key, coeff in pairs:
        total = out.get(key, GaussianRational()) + coeff
        if total.is_zero:
            out.pop(key, None)
        else:
            out[key] = total
    return out


@dataclass(frozen=True)
class AlgebraElement:
    """
    Finite combination of canonical monomials.

    Monomials must already be canonical; the engine in core.algebra is the only
    producer. Zero coefficients are never stored.
    """
    terms: Mapping[Monomial, GaussianRational] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {m: GaussianRational.of(c) for m, c in self.terms.items() if not GaussianRational.of(c).is_zero}
        object.__setattr__(self, 'terms', MappingProxyType(cleaned))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[Monomial, GaussianRational]]) -> 'AlgebraElement':
        return cls(_collect(pairs))

    @property
    def is_zero_syntactically(self) -> bool:
        return not self.terms

    def ordered(self) -> Iterator[Tuple[Monomial, GaussianRational]]:
        for mono in sorted(self.terms, key=Monomial.sort_key):
            yield mono, self.terms[mono]

    def __add__(self, other: 'AlgebraElement') -> 'AlgebraElement':
        return AlgebraElement.from_pairs(list(self.terms.items()) + list(other.terms.items()))

    def __neg__(self) -> 'AlgebraElement':
        return AlgebraElement({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: 'AlgebraElement') -> 'AlgebraElement':
        return self + (-other)

    def scale(self, coeff: Number) -> 'AlgebraElement':
        coeff = GaussianRational.of(coeff)
        return AlgebraElement({m: c * coeff for m, c in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        # syntactic equality; use WordAlgebra.equals for equality in the algebra
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return dict(self.terms) == dict(other.terms)

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class FiniteVector:
    """Finitely supported vector in l2(G); basis points are canonical group elements"""
    support: Mapping[GroupElement, GaussianRational] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {x: c for x, c in self.support.items() if not c.is_zero}
        object.__setattr__(self, 'support', MappingProxyType(cleaned))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[GroupElement, GaussianRational]]) -> 'FiniteVector':
        return cls(_collect(pairs))

    @property
    def is_empty(self) -> bool:
        return not self.support

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteVector):
            return NotImplemented
        return dict(self.support) == dict(other.support)

    def __hash__(self) -> int:
        return hash(frozenset(self.support.items()))
