"""
EXPRESSION SYNTAX
Lexer (ply.lex), LALR parser (ply.yacc), evaluator and printer for the
algebra's surface syntax:

    sum    := ['-'] term (('+' | '-') term)*
    term   := scalar ['*'] factor* | factor+
    factor := atom ['^' nat] | '(' sum ')' ['*'] ['^' nat]
    atom   := 'u[' ints ']' | 's*' | 's' | 'qterm(' n ',' h ',' g ',' k ',' h' ',' m ')'
    scalar := rational ['i'] | 'i'

Complex coefficients are written as parenthesised sums such as `(1 - 2 i) s`.
A `*` right after `)` is the adjoint of the group, never a product.

Group elements are integer vectors; a rank-1 element may drop the brackets
inside qterm(...). The small CLI syntaxes for semidirect elements `(g, i, n)`,
points `v@N` and cylinders `V[m]{i,j}` share the same lexer.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import ply.lex as lex
import ply.yacc as yacc

from core.algebra import WordAlgebra
from domain.aggregates import AlgebraElement
from domain.entities import Cylinder, Monomial, ProfinitePoint, QTerm, SemidirectElement
from domain.values import GaussianRational, GroupElement, ONE
from utils.helpers import ParseError
from utils.logger import get_logger

logger = get_logger(__name__)


# ========== LEXER ==========

class ExpressionLexer:
    tokens = (
        'QTERM', 'SSTAR', 'S', 'U', 'IMAG', 'CYL', 'INT',
        'SLASH', 'PLUS', 'MINUS', 'CARET', 'STAR', 'AT', 'COMMA',
        'LPAREN', 'RPAREN', 'LBRACKET', 'RBRACKET', 'LBRACE', 'RBRACE',
    )

    t_SLASH = r'/'
    t_PLUS = r'\+'
    t_MINUS = r'-'
    t_CARET = r'\^'
    t_STAR = r'\*'
    t_AT = r'@'
    t_COMMA = r','
    t_LPAREN = r'\('
    t_RPAREN = r'\)'
    t_LBRACKET = r'\['
    t_RBRACKET = r'\]'
    t_LBRACE = r'\{'
    t_RBRACE = r'\}'

    t_ignore = ' \t'

    # function rules match in definition order: qterm before s, s* before s
    def t_QTERM(self, t):
        r'qterm'
        return t

    def t_SSTAR(self, t):
        r's\*'
        return t

    def t_S(self, t):
        r's'
        return t

    def t_U(self, t):
        r'u'
        return t

    def t_IMAG(self, t):
        r'i'
        return t

    def t_CYL(self, t):
        r'V'
        return t

    def t_INT(self, t):
        r'\d+'
        t.value = int(t.value)
        return t

    def t_error(self, t):
        raise ParseError(f"unexpected character {t.value[0]!r}", t.lexpos)

    def __init__(self):
        self.lexer = lex.lex(module=self)

    def tokenize(self, text: str) -> List[lex.LexToken]:
        self.lexer.input(text)
        return list(iter(self.lexer.token, None))


# ========== SYNTAX TREE ==========

@dataclass(frozen=True)
class UAtom:
    coords: Tuple[int, ...]
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ShiftAtom:
    star: bool


@dataclass(frozen=True)
class QTermAtom:
    n: int
    h: Tuple[int, ...]
    fg: Tuple[int, ...]
    fk: int
    h_prime: Tuple[int, ...]
    m: int
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Power:
    base: 'Node'
    exponent: int


@dataclass(frozen=True)
class Group:
    expr: 'Sum'
    adjoint: bool = False


@dataclass(frozen=True)
class Term:
    scalar: GaussianRational
    factors: Tuple['Node', ...] = ()

    def negated(self) -> "Term":
        return Term(-self.scalar, self.factors)


@dataclass(frozen=True)
class Sum:
    terms: Tuple[Term, ...]


Node = Union[UAtom, ShiftAtom, QTermAtom, Power, Group]


# ========== PARSER ==========

class ExpressionGrammar(ExpressionLexer):
    """
    LALR grammar over the lexer's tokens. One table is built per entry point;
    errors carry the offending token's character offset.
    """

    ENTRY_POINTS = ('sum', 'semidirect', 'point', 'cylinder')

    def __init__(self):
        super().__init__()
        self._text = ''
        self.parsers = {
            start: yacc.yacc(module=self, start=start, debug=False, write_tables=False,
                             tabmodule=f"_endoalg_{start}_tab", errorlog=yacc.NullLogger())
            for start in self.ENTRY_POINTS
        }

    def parse(self, text: str, start: str = 'sum'):
        self._text = text
        return self.parsers[start].parse(text, lexer=self.lexer)

    def p_error(self, p):
        if p is None:
            raise ParseError("unexpected end of input", len(self._text))
        raise ParseError(f"unexpected {p.value!r}", p.lexpos)

    # --- sums and terms ---

    def p_sum_first(self, p):
        '''sum : term
               | MINUS term'''
        p[0] = Sum((p[1],)) if len(p) == 2 else Sum((p[2].negated(),))

    def p_sum_more(self, p):
        '''sum : sum PLUS term
               | sum MINUS term'''
        term = p[3] if p[2] == '+' else p[3].negated()
        p[0] = Sum(p[1].terms + (term,))

    def p_term_scalar(self, p):
        '''term : scalar
                | scalar factors
                | scalar STAR factors'''
        p[0] = Term(p[1], p[len(p) - 1] if len(p) > 2 else ())

    def p_term_factors(self, p):
        'term : factors'
        p[0] = Term(ONE, p[1])

    def p_factors(self, p):
        '''factors : factor
                   | factors factor'''
        p[0] = (p[1],) if len(p) == 2 else p[1] + (p[2],)

    def p_factor_atom(self, p):
        '''factor : atom
                  | atom CARET INT'''
        p[0] = p[1] if len(p) == 2 else Power(p[1], p[3])

    def p_factor_group(self, p):
        '''factor : LPAREN sum RPAREN
                  | LPAREN sum RPAREN STAR
                  | LPAREN sum RPAREN CARET INT
                  | LPAREN sum RPAREN STAR CARET INT'''
        node: Node = Group(p[2], adjoint=len(p) in (5, 7))
        p[0] = Power(node, p[len(p) - 1]) if len(p) in (6, 7) else node

    # --- atoms ---

    def p_atom_u(self, p):
        'atom : U LBRACKET int_list RBRACKET'
        p[0] = UAtom(p[3], p.lexpos(1))

    def p_atom_shift(self, p):
        '''atom : S
                | SSTAR'''
        p[0] = ShiftAtom(star=p[1] == 's*')

    def p_atom_qterm(self, p):
        'atom : QTERM LPAREN signed_int COMMA vector COMMA vector COMMA signed_int COMMA vector COMMA signed_int RPAREN'
        n, h, fg, fk, h_prime, m = p[3], p[5], p[7], p[9], p[11], p[13]
        if min(n, fk, m) < 0:
            raise ParseError("qterm exponents must be natural numbers", p.lexpos(1))
        p[0] = QTermAtom(n, h, fg, fk, h_prime, m, p.lexpos(1))

    # --- numbers and vectors ---

    def p_scalar(self, p):
        '''scalar : rational
                  | rational IMAG
                  | IMAG'''
        if p[1] == 'i':
            p[0] = GaussianRational(0, 1)
        else:
            p[0] = GaussianRational(0, p[1]) if len(p) == 3 else GaussianRational(p[1])

    def p_rational(self, p):
        '''rational : INT
                    | INT SLASH INT'''
        if len(p) == 2:
            p[0] = Fraction(p[1])
            return
        if p[3] == 0:
            raise ParseError("zero denominator", p.lexpos(3))
        p[0] = Fraction(p[1], p[3])

    def p_signed_int(self, p):
        '''signed_int : INT
                      | MINUS INT'''
        p[0] = p[1] if len(p) == 2 else -p[2]

    def p_int_list(self, p):
        '''int_list : signed_int
                    | int_list COMMA signed_int'''
        p[0] = (p[1],) if len(p) == 2 else p[1] + (p[3],)

    def p_vector(self, p):
        '''vector : signed_int
                  | LBRACKET int_list RBRACKET'''
        p[0] = (p[1],) if len(p) == 2 else p[2]

    # --- small CLI syntaxes ---

    def p_semidirect(self, p):
        'semidirect : LPAREN vector COMMA signed_int COMMA signed_int RPAREN'
        if p[4] < 0:
            raise ParseError("depth must be non-negative", p.lexpos(1))
        p[0] = (p[2], p[4], p[6])

    def p_point(self, p):
        'point : vector AT INT'
        p[0] = (p[1], p[3])

    def p_cylinder(self, p):
        'cylinder : CYL LBRACKET INT RBRACKET LBRACE nat_list RBRACE'
        p[0] = (p[3], p[6])

    def p_nat_list(self, p):
        '''nat_list : INT
                    | nat_list COMMA INT'''
        p[0] = (p[1],) if len(p) == 2 else p[1] + (p[3],)


_GRAMMAR: Optional[ExpressionGrammar] = None


def _grammar() -> ExpressionGrammar:
    global _GRAMMAR
    if _GRAMMAR is None:
        _GRAMMAR = ExpressionGrammar()
    return _GRAMMAR


def tokenize(text: str) -> List[lex.LexToken]:
    return _grammar().tokenize(text)


def parse_expression(text: str) -> Sum:
    return _grammar().parse(text)


def parse_semidirect(text: str) -> Tuple[Tuple[int, ...], int, int]:
    """`(g, i, n)` -> (coords, depth, shift)"""
    return _grammar().parse(text, 'semidirect')


def parse_point(text: str) -> Tuple[Tuple[int, ...], int]:
    """`v@N` -> (coords, depth)"""
    return _grammar().parse(text, 'point')


def parse_cylinder(text: str) -> Tuple[int, Tuple[int, ...]]:
    """`V[m]{i,j,...}` -> (level, class indices)"""
    return _grammar().parse(text, 'cylinder')

def read_expression_file(path: Union[str, Path]) -> List[str]:
    """One expression per line; `#` starts a comment"""
    try:
        lines = Path(path).read_text(encoding='utf-8').splitlines()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    out = [line.split('#', 1)[0].strip() for line in lines]
    return [line for line in out if line]


def resolve_input(argument: str) -> List[str]:
    if argument.startswith('@'):
        return read_expression_file(argument[1:])
    return [argument]


# ========== EVALUATION ==========

class ExpressionEvaluator:
    """Turns syntax trees into algebra elements for one context"""

    def __init__(self, algebra: WordAlgebra):
        self.algebra = algebra
        self.context = algebra.context

    def group(self, coords: Sequence[int], pos: int = 0) -> GroupElement:
        try:
            return self.context.element(coords)
        except ValueError as e:
            raise ParseError(str(e), pos) from e

    def qterm(self, atom: QTermAtom, coeff: GaussianRational = ONE) -> QTerm:
        return QTerm(atom.n, self.group(atom.h, atom.pos), self.group(atom.fg, atom.pos), atom.fk,
                     self.group(atom.h_prime, atom.pos), atom.m, coeff)

    def evaluate(self, node: Union[Sum, Term, Node]) -> AlgebraElement:
        alg = self.algebra
        if isinstance(node, Sum):
            total = alg.zero()
            for term in node.terms:
                total = total + self.evaluate(term)
            return total
        if isinstance(node, Term):
            return alg.product(*(self.evaluate(f) for f in node.factors)).scale(node.scalar)
        if isinstance(node, UAtom):
            return alg.u(self.group(node.coords, node.pos))
        if isinstance(node, ShiftAtom):
            return alg.s_star() if node.star else alg.s()
        if isinstance(node, QTermAtom):
            return alg.from_qterm(self.qterm(node))
        if isinstance(node, Power):
            base = self.evaluate(node.base)
            return alg.product(*([base] * node.exponent))
        if isinstance(node, Group):
            inner = self.evaluate(node.expr)
            return alg.adjoint(inner) if node.adjoint else inner
        raise TypeError(f"unknown node {node!r}")

    def parse(self, text: str) -> AlgebraElement:
        return self.evaluate(parse_expression(text))

    def qterms(self, texts: Sequence[str]) -> List[QTerm]:
        """
        Q-form of the inputs. Terms written as `c qterm(...)` are kept literally;
        anything else is rewritten through the algebra's Q-form.
        """
        out: List[QTerm] = []
        for text in texts:
            for term in parse_expression(text).terms:
                if len(term.factors) == 1 and isinstance(term.factors[0], QTermAtom):
                    out.append(self.qterm(term.factors[0], term.scalar))
                else:
                    out.extend(self.algebra.to_qform(self.evaluate(term)))
        return out


# ========== PRINTING ==========

def format_vector(g: GroupElement) -> str:
    return str(g.coords[0]) if g.rank == 1 else f"[{g}]"


def format_scalar(c: GaussianRational) -> str:
    return str(c.re) if c.is_real else f"({c})"


def format_monomial(mono: Monomial) -> str:
    parts = []
    if not mono.a.is_zero:
        parts.append(f"u[{mono.a}]")
    if mono.p:
        parts.append(f"s^{mono.p}")
    if mono.q:
        parts.append(f"s*^{mono.q}")
    if not mono.b.is_zero:
        parts.append(f"u[{mono.b}]")
    return " ".join(parts)


def _signed_term(mono: Monomial, coeff: GaussianRational) -> Tuple[bool, str]:
    body = format_monomial(mono)
    negative = coeff.is_real and coeff.re < 0
    magnitude = -coeff if negative else coeff
    if magnitude == ONE and body:
        return negative, body
    scalar = format_scalar(magnitude)
    return negative, f"{scalar} {body}" if body else scalar


def format_element(x: AlgebraElement) -> str:
    pieces = []
    for k, (mono, coeff) in enumerate(x.ordered()):
        negative, text = _signed_term(mono, coeff)
        if k == 0:
            pieces.append(f"-{text}" if negative else text)
        else:
            pieces.append(f"{'-' if negative else '+'} {text}")
    return " ".join(pieces) if pieces else "0"


def format_qterm(term: QTerm) -> str:
    body = (f"qterm({term.n}, {format_vector(term.h)}, {format_vector(term.fg)}, {term.fk}, "
            f"{format_vector(term.h_prime)}, {term.m})")
    return body if term.coeff == ONE else f"{format_scalar(term.coeff)} {body}"


def format_semidirect(t: SemidirectElement) -> str:
    return f"({format_vector(t.a.g)}, {t.a.depth}, {t.n})"


def format_point(x: ProfinitePoint, rep: GroupElement) -> str:
    return f"{format_vector(rep)}@{x.depth}"


def format_cylinder(c: Cylinder) -> str:
    return f"V[{c.m}]{{{','.join(str(h.rep_index) for h in c.classes)}}}"
