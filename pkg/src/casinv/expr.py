"""Exact symbolic expressions: rational functions of symbols plus atomic ln.

An Expr is a quotient num/den of two sparse polynomials (see poly.py) over
the rationals.  The representation is canonical by construction:

* num and den share no polynomial factor (gcd removed),
* den's graded-lex leading coefficient is exactly 1,
* zero is represented as 0/1.

Consequently structural equality is mathematical equality for the rational
fragment.  ln(...) enters as an opaque atom whose argument is itself a
canonical Expr; two ln atoms are equal only when their arguments are
identical, so identities such as ln(x*y) = ln(x) + ln(y) are deliberately
NOT applied -- the sampling-based zero test exists to catch those.

The accepted surface grammar (parse/format round-trip):

    expr    :=  sum of products of powers
    ops     :=  +  -  *  /  ^      (^ takes a literal integer exponent)
    atoms   :=  identifiers  [A-Za-z][A-Za-z0-9_]*,  integer literals,
                ln(expr),  parenthesised subexpressions
"""

from __future__ import annotations

import functools
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction

from . import poly
from .poly import Poly, MONO_SORT_KEY, mono_degree

__all__ = [
    "AlgebraError",
    "ParseError",
    "UnknownSymbolError",
    "EvalError",
    "EvalDomainError",
    "VariableSet",
    "Domain",
    "Point",
    "Expr",
    "Ln",
    "ZeroVerdict",
    "parse",
    "format_expr",
    "python_source",
    "differentiate",
    "evaluate",
    "substitute",
    "normalize",
    "zero_verdict",
    "free_symbols",
    "symbol",
    "number",
    "ln_of",
    "random_rational",
    "random_point",
]


class AlgebraError(Exception):
    """Structurally invalid symbolic operation (e.g. division by zero)."""


class ParseError(Exception):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownSymbolError(ParseError):
    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier '{name}'", position)
        self.name = name


class EvalError(Exception):
    """Evaluation failed (missing symbol value, bad arithmetic)."""


class EvalDomainError(EvalError):
    """Evaluation hit a singular point: ln of a non-positive value or a zero denominator."""


_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_RESERVED = {"ln"}


@dataclass(frozen=True)
class VariableSet:
    """Declared state variables and parameters; all symbols an Expr may use."""

    variables: tuple[str, ...]
    parameters: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.variables:
            raise ValueError("at least one state variable is required")
        seen = set()
        for name in self.variables + self.parameters:
            if not _IDENT_RE.match(name):
                raise ValueError(f"invalid identifier: {name!r}")
            if name in _RESERVED:
                raise ValueError(f"identifier {name!r} is reserved")
            if name in seen:
                raise ValueError(f"duplicate identifier: {name!r}")
            seen.add(name)

    @property
    def n(self) -> int:
        return len(self.variables)

    def all_symbols(self) -> tuple[str, ...]:
        return self.variables + self.parameters

    def is_variable(self, name: str) -> bool:
        return name in self.variables

    def knows(self, name: str) -> bool:
        return name in self.variables or name in self.parameters

    def var_index(self, name: str) -> int:
        return self.variables.index(name)


class Domain:
    """Sign constraints per variable.

    Sampling treats every symbol as positive unless a variable is declared
    negative.  Only *declared* positive variables get a hard positivity guard
    during flow integration; undeclared variables may wander across zero
    (polynomial systems are perfectly happy there).
    """

    def __init__(self, declared: dict | None = None):
        self.declared = dict(declared or {})
        for name, s in self.declared.items():
            if s not in ("+", "-"):
                raise ValueError(f"bad sign {s!r} for {name!r}")

    def sample_sign(self, name: str) -> int:
        return -1 if self.declared.get(name) == "-" else 1

    def guarded_positive(self, name: str) -> bool:
        return self.declared.get(name) == "+"

    def __repr__(self):
        return f"Domain({self.declared!r})"


class Point:
    """An assignment of numeric values (Fraction or float) to every symbol."""

    __slots__ = ("values",)

    def __init__(self, values: dict):
        self.values = dict(values)

    def __getitem__(self, name: str):
        return self.values[name]

    def as_floats(self) -> dict:
        return {k: float(v) for k, v in self.values.items()}

    def __repr__(self):
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self.values.items()))
        return f"Point({inner})"


# ---------------------------------------------------------------------------
# core expression type


class Ln:
    """Atomic natural logarithm of a canonical Expr (used as a Poly atom)."""

    __slots__ = ("arg", "_hash")

    def __init__(self, arg: "Expr"):
        self.arg = arg
        self._hash = hash(("ln", arg))

    @property
    def sort_key(self):
        return self.arg.sort_key

    def __eq__(self, other):
        return isinstance(other, Ln) and self.arg == other.arg

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Ln({self.arg!r})"


class Expr:
    """Canonical quotient of two polynomials.  Immutable."""

    __slots__ = ("num", "den", "_skey", "_hash")

    def __init__(self, num: Poly, den: Poly):
        # private: callers go through _reduce()
        self.num = num
        self.den = den
        self._skey = None
        self._hash = None

    # -- canonicalization --------------------------------------------------

    @property
    def sort_key(self):
        if self._skey is None:
            self._skey = (self.num.sort_key(), self.den.sort_key())
        return self._skey

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.sort_key)
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Expr) and self.num == other.num and self.den == other.den

    def __lt__(self, other):
        return self.sort_key < other.sort_key

    # -- predicates ----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"not a constant: {self}")
        return self.num.const_value()

    def as_integer(self):
        """The exact integer value, or None."""
        if not self.is_constant():
            return None
        v = self.const_value()
        return int(v) if v.denominator == 1 else None

    def has_ln(self) -> bool:
        return any(not isinstance(a, str) for a in self.num.atoms() | self.den.atoms())

    def monomial_count(self) -> int:
        return self.num.monomial_count() + self.den.monomial_count()

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = _as_expr(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            return _reduce(self.num + other.num, self.den)
        return _reduce(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return Expr(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_as_expr(other))

    def __rsub__(self, other):
        return _as_expr(other) + (-self)

    def __mul__(self, other):
        other = _as_expr(other)
        if self.num.is_zero() or other.num.is_zero():
            return EXPR_ZERO
        n1, d1 = self.num, self.den
        n2, d2 = other.num, other.den
        if d1.is_one() and d2.is_one():
            return _reduce(n1 * n2, poly.Poly.one(), coprime=True)
        if not d2.is_const():
            g = poly.gcd(n1, d2)
            if not g.is_one():
                n1 = poly.div_exact(n1, g)
                d2 = poly.div_exact(d2, g)
        if not d1.is_const():
            g = poly.gcd(n2, d1)
            if not g.is_one():
                n2 = poly.div_exact(n2, g)
                d1 = poly.div_exact(d1, g)
        return _reduce(n1 * n2, d1 * d2, coprime=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_expr(other)
        if other.num.is_zero():
            raise AlgebraError("division by an expression that is identically zero")
        return self * _reduce(other.den, other.num, coprime=True)

    def __rtruediv__(self, other):
        return _as_expr(other) / self

    def __pow__(self, e: int):
        if not isinstance(e, int):
            raise TypeError("exponents must be integers")
        if e == 0:
            return EXPR_ONE
        if self.num.is_zero():
            if e < 0:
                raise AlgebraError("negative power of zero")
            return EXPR_ZERO
        if e < 0:
            return _reduce(self.den, self.num, coprime=True) ** (-e)
        return _reduce(self.num ** e, self.den ** e, coprime=True)

    def __str__(self):
        return format_expr(self)

    def __repr__(self):
        return f"<Expr {format_expr(self)}>"


def _reduce(num: Poly, den: Poly, coprime: bool = False) -> Expr:
    if den.is_zero():
        raise AlgebraError("division by zero (denominator is identically zero)")
    if num.is_zero():
        return EXPR_ZERO
    if den.is_const():
        c = den.const_value()
        return Expr(num if c == 1 else num.scale(1 / c), poly.Poly.one())
    if not coprime:
        g = poly.gcd(num, den)
        if not g.is_one():
            num = poly.div_exact(num, g)
            den = poly.div_exact(den, g)
            if den.is_const():
                c = den.const_value()
                return Expr(num if c == 1 else num.scale(1 / c), poly.Poly.one())
    _, lc = den.leading()
    if lc != 1:
        num = num.scale(1 / lc)
        den = den.scale(1 / lc)
    return Expr(num, den)


def _from_poly(p: Poly) -> Expr:
    if p.is_zero():
        return EXPR_ZERO
    return Expr(p, poly.Poly.one())


def _as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return _from_poly(Poly.const(Fraction(x)))
    raise TypeError(f"cannot treat {type(x).__name__} as an expression")


EXPR_ZERO = Expr(Poly.zero(), Poly.one())
EXPR_ONE = Expr(Poly.one(), Poly.one())


def symbol(name: str) -> Expr:
    return _from_poly(Poly.atom(name))


def number(value) -> Expr:
    return _as_expr(Fraction(value))


def ln_of(arg: Expr) -> Expr:
    """ln(arg) as an Expr; folds ln(1) -> 0 and rejects non-positive constants."""
    arg = _as_expr(arg)
    if arg.is_constant():
        v = arg.const_value()
        if v <= 0:
            raise AlgebraError(f"ln of a non-positive constant: {v}")
        if v == 1:
            return EXPR_ZERO
    if arg.is_zero():
        raise AlgebraError("ln(0) is undefined")
    return _from_poly(Poly.atom(Ln(arg)))


# ---------------------------------------------------------------------------
# structural helpers


def free_symbols(e: Expr) -> set:
    out: set = set()
    _collect_symbols(e, out)
    return out


def _collect_symbols(e: Expr, out: set):
    for p in (e.num, e.den):
        for a in p.atoms():
            if isinstance(a, str):
                out.add(a)
            else:
                _collect_symbols(a.arg, out)


def _involves(e: Expr, name: str) -> bool:
    for p in (e.num, e.den):
        for a in p.atoms():
            if isinstance(a, str):
                if a == name:
                    return True
            elif _involves(a.arg, name):
                return True
    return False


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace symbols by expressions, re-normalizing the result."""
    mapping = {k: _as_expr(v) for k, v in mapping.items()}
    return _subs_poly(e.num, mapping) / _subs_poly(e.den, mapping)


def _subs_poly(p: Poly, mapping: dict) -> Expr:
    total = EXPR_ZERO
    for m, c in sorted(p.terms.items(), key=lambda mc: MONO_SORT_KEY(mc[0])):
        term = _as_expr(c)
        for a, e in m:
            if isinstance(a, str):
                base = mapping.get(a)
                if base is None:
                    base = symbol(a)
            else:
                base = ln_of(substitute(a.arg, mapping))
            term = term * base ** e
        total = total + term
    return total


def normalize(e: Expr) -> Expr:
    """Rebuild the canonical form from scratch.  Idempotent by design."""
    return substitute(e, {})


# ---------------------------------------------------------------------------
# differentiation


def differentiate(e: Expr, name: str, symbols: VariableSet) -> Expr:
    """Partial derivative with respect to a declared state variable."""
    if not symbols.knows(name):
        raise ValueError(f"unknown identifier: {name!r}")
    if not symbols.is_variable(name):
        raise ValueError(f"cannot differentiate with respect to parameter {name!r}")
    return _diff(e, name)


@functools.lru_cache(maxsize=None)
def _diff(e: Expr, name: str) -> Expr:
    if not _involves(e, name):
        return EXPR_ZERO
    dn = _poly_diff(e.num, name)
    if e.den.is_one():
        return dn
    dd = _poly_diff(e.den, name)
    num_e = _from_poly(e.num)
    den_e = _from_poly(e.den)
    return (dn * den_e - num_e * dd) / (den_e * den_e)


def _poly_diff(p: Poly, name: str) -> Expr:
    plain: dict = {}
    extra = EXPR_ZERO
    for m, c in p.terms.items():
        for i, (a, e) in enumerate(m):
            if isinstance(a, str):
                if a != name:
                    continue
                nm = _mono_with_exp(m, i, e - 1)
                v = plain.get(nm, Fraction(0)) + c * e
                if v:
                    plain[nm] = v
                else:
                    plain.pop(nm, None)
            else:
                if not _involves(a.arg, name):
                    continue
                nm = _mono_with_exp(m, i, e - 1)
                dln = _diff(a.arg, name) / a.arg
                extra = extra + _from_poly(Poly({nm: c * e})) * dln
    return _from_poly(Poly(plain)) + extra


def _mono_with_exp(m, i, new_e):
    if new_e == 0:
        return m[:i] + m[i + 1:]
    return m[:i] + ((m[i][0], new_e),) + m[i + 1:]


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: Expr, point) -> float:
    """Float value of e at a Point (or plain mapping of symbol values)."""
    values = point.values if isinstance(point, Point) else dict(point)
    v, _ = _eval_quot(e, values, use_float=True)
    return float(v)


def _eval_quot(e: Expr, values: dict, use_float: bool):
    nv, ns = _eval_poly(e.num, values, use_float)
    if e.den.is_one():
        return nv, ns
    dv, _ = _eval_poly(e.den, values, use_float)
    if dv == 0:
        raise EvalDomainError("division by zero while evaluating")
    return nv / dv, ns


def _eval_poly(p: Poly, values: dict, use_float: bool):
    """Value and a term-wise magnitude scale (for relative zero tests)."""
    total = 0.0 if use_float else Fraction(0)
    scale = 0.0
    for m, c in sorted(p.terms.items(), key=lambda mc: MONO_SORT_KEY(mc[0])):
        tv = float(c) if use_float else c
        ts = abs(float(c))
        for a, e in m:
            if isinstance(a, str):
                try:
                    val = values[a]
                except KeyError:
                    raise EvalError(f"no value bound for symbol {a!r}") from None
                if use_float:
                    val = float(val)
            else:
                argv, _ = _eval_quot(a.arg, values, use_float=True)
                argv = float(argv)
                if argv <= 0.0:
                    raise EvalDomainError("ln of a non-positive value")
                if not use_float:
                    raise EvalError("exact evaluation is unavailable for ln expressions")
                val = math.log(argv)
            tv = tv * val ** e
            ts = ts * abs(float(val)) ** e
        total = total + tv
        scale = scale + ts
    return total, scale


# ---------------------------------------------------------------------------
# sampling and the zero verdict


def random_rational(rng: random.Random, lo: int = 1, hi: int = 10) -> Fraction:
    d = rng.randint(16, 128)
    return Fraction(rng.randint(lo * d, hi * d), d)


def random_point(
    symbols: VariableSet,
    domain: Domain | None = None,
    rng: random.Random | None = None,
    lo: int = 1,
    hi: int = 10,
) -> Point:
    """Generic rational point: variables obey domain signs, parameters positive."""
    rng = rng or random.Random(0)
    domain = domain or Domain()
    values = {}
    for name in symbols.variables:
        values[name] = domain.sample_sign(name) * random_rational(rng, lo, hi)
    for name in symbols.parameters:
        values[name] = random_rational(rng, lo, hi)
    return Point(values)


@dataclass(frozen=True)
class ZeroVerdict:
    """Outcome of the zero test.

    status is "zero" (canonical form is zero: proof), "nonzero" (numeric
    witness found, or the expression is ln-free so the canonical form is
    decisive), or "probably-zero" (every sample vanished but ln atoms keep
    the symbolic check from being conclusive).
    """

    status: str
    samples: int
    witness: Point | None = None
    witness_value: float | None = None

    @property
    def is_zero(self) -> bool:
        return self.status == "zero"

    @property
    def is_nonzero(self) -> bool:
        return self.status == "nonzero"

    @property
    def accepts_zero(self) -> bool:
        return self.status in ("zero", "probably-zero")


def zero_verdict(
    e: Expr,
    symbols: VariableSet,
    domain: Domain | None = None,
    *,
    samples: int = 20,
    tol: float = 1e-9,
    seed: int = 0,
    rng: random.Random | None = None,
) -> ZeroVerdict:
    """Decide whether e is identically zero.

    The canonical form settles the rational fragment outright.  Expressions
    containing ln atoms are sampled at `samples` random rational points in
    the domain box; a value exceeding `tol` relative to the term-magnitude
    scale is a nonzero witness, and survival of all samples yields
    "probably-zero".
    """
    if e.num.is_zero():
        return ZeroVerdict("zero", 0)
    rng = rng or random.Random(seed)
    ln_free = not any(not isinstance(a, str) for a in e.num.atoms())
    checked = 0
    for _ in range(samples):
        pt = random_point(symbols, domain, rng)
        try:
            if ln_free:
                nv, _ = _eval_poly(e.num, pt.values, use_float=False)
                checked += 1
                if nv != 0:
                    return ZeroVerdict("nonzero", checked, pt, float(nv))
            else:
                nv, ns = _eval_poly(e.num, pt.values, use_float=True)
                checked += 1
                if abs(nv) > tol * max(ns, 1.0):
                    return ZeroVerdict("nonzero", checked, pt, float(nv))
        except EvalDomainError:
            continue
    if ln_free:
        # a nonzero canonical numerator is already a proof of nonzero-ness;
        # hitting a root at every sample is a measure-zero fluke
        return ZeroVerdict("nonzero", checked)
    return ZeroVerdict("probably-zero", checked)


# ---------------------------------------------------------------------------
# parsing


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|([-+*/^()]))")


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(text: str):
    toks = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            stripped = text[i:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        if m.group(1):
            toks.append(_Token("num", m.group(1), m.start(1)))
        elif m.group(2):
            toks.append(_Token("name", m.group(2), m.start(2)))
        else:
            toks.append(_Token("op", m.group(3), m.start(3)))
        i = m.end()
    toks.append(_Token("end", "", len(text)))
    return toks


_BIN_PREC = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_PREC = 25  # between * and ^, so -x^2 parses as -(x^2)


class _Parser:
    def __init__(self, text: str, symbols: VariableSet):
        self.toks = _tokenize(text)
        self.i = 0
        self.symbols = symbols

    def peek(self) -> _Token:
        return self.toks[self.i]

    def advance(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str):
        t = self.advance()
        if t.kind != "op" or t.text != op:
            raise ParseError(f"expected {op!r}", t.pos)

    def parse(self) -> Expr:
        e = self.parse_expr(0)
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected {t.text!r}", t.pos)
        return e

    def parse_expr(self, min_prec: int) -> Expr:
        left = self.parse_unary()
        while True:
            t = self.peek()
            if t.kind != "op" or t.text not in _BIN_PREC:
                return left
            prec = _BIN_PREC[t.text]
            if prec < min_prec:
                return left
            self.advance()
            if t.text == "^":
                right = self.parse_expr(prec)  # right-associative
                exp = right.as_integer()
                if exp is None:
                    raise ParseError("exponent must be a literal integer", t.pos)
                try:
                    left = left ** exp
                except AlgebraError as err:
                    raise ParseError(str(err), t.pos) from None
            else:
                right = self.parse_expr(prec + 1)
                try:
                    if t.text == "+":
                        left = left + right
                    elif t.text == "-":
                        left = left - right
                    elif t.text == "*":
                        left = left * right
                    else:
                        left = left / right
                except AlgebraError as err:
                    raise ParseError(str(err), t.pos) from None

    def parse_unary(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text in ("-", "+"):
            self.advance()
            operand = self.parse_expr(_UNARY_PREC)
            return -operand if t.text == "-" else operand
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        t = self.advance()
        if t.kind == "num":
            return number(int(t.text))
        if t.kind == "name":
            if t.text == "ln":
                self.expect_op("(")
                inner = self.parse_expr(0)
                self.expect_op(")")
                try:
                    return ln_of(inner)
                except AlgebraError as err:
                    raise ParseError(str(err), t.pos) from None
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                raise ParseError(f"unknown function {t.text!r}", t.pos)
            if not self.symbols.knows(t.text):
                raise UnknownSymbolError(t.text, t.pos)
            return symbol(t.text)
        if t.kind == "op" and t.text == "(":
            inner = self.parse_expr(0)
            self.expect_op(")")
            return inner
        raise ParseError(f"unexpected {t.text!r}" if t.text else "unexpected end of input", t.pos)


def parse(text: str, symbols: VariableSet) -> Expr:
    """Parse the surface grammar into a canonical Expr."""
    return _Parser(text, symbols).parse()


# ---------------------------------------------------------------------------
# printing


def _mono_str(m, c: Fraction, python: bool = False):
    sign = "-" if c < 0 else "+"
    c = abs(c)
    parts = []
    if c != 1 or not m:
        if python:
            parts.append(f"({c.numerator}/{c.denominator})" if c.denominator != 1 else str(c.numerator))
        else:
            parts.append(str(c))
    caret = "**" if python else "^"
    fn = "log" if python else "ln"
    for a, e in m:
        if isinstance(a, str):
            s = a
        else:
            s = f"{fn}({_format(a.arg, python)})"
        if e > 1:
            s = f"{s}{caret}{e}"
        parts.append(s)
    return sign, "*".join(parts)


def _poly_str(p: Poly, python: bool = False) -> str:
    if p.is_zero():
        return "0"
    monos = sorted(p.terms.items(), key=lambda mc: MONO_SORT_KEY(mc[0]), reverse=True)
    out = []
    for k, (m, c) in enumerate(monos):
        sign, body = _mono_str(m, c, python)
        if k == 0:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


def _format(e: Expr, python: bool = False) -> str:
    ns = _poly_str(e.num, python)
    if e.den.is_one():
        return ns
    if len(e.num.terms) > 1:
        ns = f"({ns})"
    ds = _poly_str(e.den, python)
    den_terms = list(e.den.terms.items())
    simple = (
        len(den_terms) == 1
        and den_terms[0][1] == 1
        and len(den_terms[0][0]) == 1
        and den_terms[0][0][0][1] == 1
        and isinstance(den_terms[0][0][0][0], str)
    )
    if not simple:
        ds = f"({ds})"
    return f"{ns}/{ds}"


def format_expr(e: Expr) -> str:
    """Deterministic textual form; parse(format_expr(e)) == e."""
    return _format(e, python=False)


def python_source(e: Expr) -> str:
    """Python expression string for fast float evaluation (needs log in scope)."""
    return _format(e, python=True)
