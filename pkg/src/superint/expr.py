"""Scalar symbolic expressions in the bosonic variables x1, x2, ...

A deliberately small expression kernel: enough structure to differentiate,
evaluate (scalars or numpy arrays), print/parse, and put polynomial-like
expressions into an exact monomial normal form.  There is no general
simplifier; the only rewrites are constant folding and the unit/zero rules
applied by the smart constructors.

Numbers follow the package-wide policy: `fractions.Fraction` while inputs
are rational, float as soon as an irrational enters.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

import numpy as np

from .grassmann import as_number, num_eq

FUNCTIONS = ("exp", "log", "sqrt", "sin", "cos", "asinh", "abs")


class ExprError(ValueError):
    pass


class Expr:
    """Base class; nodes are immutable and hashable."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return add(self, neg(_coerce(other)))

    def __rsub__(self, other):
        return add(_coerce(other), neg(self))

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, other):
        return power(self, _coerce(other))

    def __neg__(self):
        return neg(self)

    def __repr__(self):
        return to_string(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        object.__setattr__(self, "value", as_number(value))

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return isinstance(other, Const) and type(other.value) is type(self.value) \
            and other.value == self.value

    def __hash__(self):
        return hash(("Const", self.value))


class Var(Expr):
    __slots__ = ("index",)

    def __init__(self, index: int):
        if index < 1:
            raise ExprError("variable indices are 1-based")
        object.__setattr__(self, "index", index)

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return isinstance(other, Var) and other.index == self.index

    def __hash__(self):
        return hash(("Var", self.index))


class Symbol(Expr):
    """Opaque identifier (q3, X2, ABSX ...) produced only by the extended
    parser; the superfunction layer interprets these, plain evaluation
    rejects them."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return isinstance(other, Symbol) and other.name == self.name

    def __hash__(self):
        return hash(("Symbol", self.name))


class _NAry(Expr):
    __slots__ = ("args",)

    def __init__(self, args):
        object.__setattr__(self, "args", tuple(args))

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return type(other) is type(self) and other.args == self.args

    def __hash__(self):
        return hash((type(self).__name__, self.args))


class Add(_NAry):
    __slots__ = ()


class Mul(_NAry):
    __slots__ = ()


class Div(_NAry):
    __slots__ = ()


class Pow(_NAry):
    __slots__ = ()


class Neg(_NAry):
    __slots__ = ()


class Call(Expr):
    __slots__ = ("fn", "arg")

    def __init__(self, fn: str, arg: Expr):
        if fn not in FUNCTIONS:
            raise ExprError(f"unknown function {fn!r}")
        object.__setattr__(self, "fn", fn)
        object.__setattr__(self, "arg", arg)

    def __setattr__(self, *a):
        raise AttributeError("immutable")

    def __eq__(self, other):
        return isinstance(other, Call) and other.fn == self.fn and other.arg == self.arg

    def __hash__(self):
        return hash(("Call", self.fn, self.arg))


ZERO = Const(0)
ONE = Const(1)


def _coerce(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return Const(v)


def const(c) -> Const:
    return Const(c)


def var(j: int) -> Var:
    return Var(j)


def is_const(e, value=None) -> bool:
    if not isinstance(e, Const):
        return False
    return value is None or e.value == value


# ---------------------------------------------------------------------------
# smart constructors (constant folding + unit/zero rules only)
# ---------------------------------------------------------------------------

def add(*args) -> Expr:
    terms = []
    acc = Fraction(0)
    for a in args:
        a = _coerce(a)
        if isinstance(a, Add):
            inner = a.args
        else:
            inner = (a,)
        for t in inner:
            if isinstance(t, Const):
                acc = acc + t.value
            else:
                terms.append(t)
    if acc != 0 or not terms:
        # keep exact zero only when nothing else survived
        if not terms:
            return Const(acc)
        terms.append(Const(acc))
    if len(terms) == 1:
        return terms[0]
    return Add(terms)


def neg(a) -> Expr:
    a = _coerce(a)
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.args[0]
    return Neg((a,))


def mul(*args) -> Expr:
    factors = []
    acc = Fraction(1)
    for a in args:
        a = _coerce(a)
        if isinstance(a, Neg):
            acc = -acc
            a = a.args[0]
        if isinstance(a, Mul):
            inner = a.args
        else:
            inner = (a,)
        for f in inner:
            if isinstance(f, Const):
                acc = acc * f.value
            else:
                factors.append(f)
    if isinstance(acc, Fraction) and acc == 0:
        return ZERO
    if isinstance(acc, float) and acc == 0.0:
        return Const(0.0)
    if acc != 1 or not factors:
        if not factors:
            return Const(acc)
        factors.insert(0, Const(acc))
    if len(factors) == 1:
        return factors[0]
    return Mul(factors)


def div(a, b) -> Expr:
    a, b = _coerce(a), _coerce(b)
    if isinstance(b, Const):
        if b.value == 0:
            raise ZeroDivisionError("division by zero constant")
        if isinstance(a, Const):
            if isinstance(a.value, Fraction) and isinstance(b.value, Fraction):
                return Const(a.value / b.value)
            return Const(float(a.value) / float(b.value))
        # fold x / c into (1/c) * x so rationals stay exact
        if isinstance(b.value, Fraction):
            return mul(Const(Fraction(1) / b.value), a)
        return mul(Const(1.0 / b.value), a)
    if is_const(a, 0):
        return ZERO
    return Div((a, b))


def _fold_pow(base, expo):
    """Constant^constant with exactness where available, else float/None."""
    if isinstance(base, Fraction) and isinstance(expo, Fraction) and expo.denominator == 1:
        k = int(expo)
        if base == 0 and k < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return base ** k
    b, p = float(base), float(expo)
    if isinstance(base, Fraction) and isinstance(expo, Fraction) \
            and base >= 0 and expo.denominator == 2:
        # perfect rational square root (e.g. sqrt(9/4)) stays exact
        rn, rd = math.isqrt(base.numerator), math.isqrt(base.denominator)
        if rn * rn == base.numerator and rd * rd == base.denominator:
            return Fraction(rn, rd) ** expo.numerator
    if b < 0 and p != int(p):
        return None  # leave symbolic; evaluation would be complex
    if b == 0 and p < 0:
        raise ZeroDivisionError("0 raised to a negative power")
    return b ** p


def power(a, b) -> Expr:
    a, b = _coerce(a), _coerce(b)
    if isinstance(b, Const):
        if b.value == 0:
            return ONE
        if b.value == 1:
            return a
        if isinstance(a, Const):
            folded = _fold_pow(a.value, b.value)
            if folded is not None:
                return Const(folded)
        if isinstance(a, Pow) and isinstance(a.args[1], Const):
            # (u^p)^q -> u^(pq); valid for positive bases, which is the
            # regime the analytic power calculus works in anyway
            return power(a.args[0], Const(a.args[1].value * b.value))
    if is_const(a, 1):
        return ONE
    return Pow((a, b))


def call(fn: str, a) -> Expr:
    a = _coerce(a)
    if fn == "sqrt":
        # route through power so the exactness rules apply uniformly
        return power(a, Const(Fraction(1, 2)))
    if isinstance(a, Const):
        v = a.value
        if fn == "exp" and v == 0:
            return ONE
        if fn == "log" and v == 1:
            return ZERO
        if fn == "sin" and v == 0:
            return ZERO
        if fn == "cos" and v == 0:
            return ONE
        if fn == "asinh" and v == 0:
            return ZERO
        if fn == "abs":
            return Const(abs(v))
        if isinstance(v, float):
            return Const(_apply_float(fn, v))
    return Call(fn, a)


def _apply_float(fn, v):
    return {
        "exp": math.exp, "log": math.log, "sqrt": math.sqrt,
        "sin": math.sin, "cos": math.cos, "asinh": math.asinh, "abs": abs,
    }[fn](v)


# ---------------------------------------------------------------------------
# structural operations
# ---------------------------------------------------------------------------

def free_variables(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, (Const, Symbol)):
        return set()
    if isinstance(e, Call):
        return free_variables(e.arg)
    out = set()
    for a in e.args:
        out |= free_variables(a)
    return out


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace Var(j) by mapping[j] (an Expr or number) wherever present."""
    if isinstance(e, Var):
        if e.index in mapping:
            return _coerce(mapping[e.index])
        return e
    if isinstance(e, (Const, Symbol)):
        return e
    if isinstance(e, Call):
        return call(e.fn, substitute(e.arg, mapping))
    if isinstance(e, Add):
        return add(*[substitute(a, mapping) for a in e.args])
    if isinstance(e, Mul):
        return mul(*[substitute(a, mapping) for a in e.args])
    if isinstance(e, Div):
        return div(substitute(e.args[0], mapping), substitute(e.args[1], mapping))
    if isinstance(e, Pow):
        return power(substitute(e.args[0], mapping), substitute(e.args[1], mapping))
    if isinstance(e, Neg):
        return neg(substitute(e.args[0], mapping))
    raise ExprError(f"cannot substitute in {type(e).__name__}")


def diff(e: Expr, j: int) -> Expr:
    """Partial derivative with respect to x_j."""
    if isinstance(e, Const) or isinstance(e, Symbol):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == j else ZERO
    if isinstance(e, Neg):
        return neg(diff(e.args[0], j))
    if isinstance(e, Add):
        return add(*[diff(a, j) for a in e.args])
    if isinstance(e, Mul):
        terms = []
        for i, a in enumerate(e.args):
            da = diff(a, j)
            if is_const(da, 0):
                continue
            terms.append(mul(*e.args[:i], da, *e.args[i + 1:]))
        return add(*terms) if terms else ZERO
    if isinstance(e, Div):
        u, v = e.args
        return div(add(mul(diff(u, j), v), neg(mul(u, diff(v, j)))), power(v, 2))
    if isinstance(e, Pow):
        base, expo = e.args
        if isinstance(expo, Const):
            return mul(expo, power(base, Const(expo.value - 1)), diff(base, j))
        # general u^v via exp(v log u)
        return mul(e, add(mul(diff(expo, j), call("log", base)),
                          mul(expo, div(diff(base, j), base))))
    if isinstance(e, Call):
        u = e.arg
        du = diff(u, j)
        if is_const(du, 0):
            return ZERO
        if e.fn == "exp":
            outer = e
        elif e.fn == "log":
            return div(du, u)
        elif e.fn == "sin":
            outer = call("cos", u)
        elif e.fn == "cos":
            outer = neg(call("sin", u))
        elif e.fn == "asinh":
            return div(du, power(add(mul(u, u), 1), Const(Fraction(1, 2))))
        elif e.fn == "abs":
            outer = div(u, e)
        else:  # pragma: no cover
            raise ExprError(f"no derivative rule for {e.fn}")
        return mul(outer, du)
    raise ExprError(f"cannot differentiate {type(e).__name__}")


def evaluate(e: Expr, point: dict):
    """Evaluate at point {var_index: float | ndarray}.  Vectorized via numpy."""
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        try:
            return point[e.index]
        except KeyError:
            raise ExprError(f"no value supplied for x{e.index}") from None
    if isinstance(e, Symbol):
        raise ExprError(f"cannot evaluate raw symbol {e.name!r}")
    if isinstance(e, Neg):
        return -evaluate(e.args[0], point)
    if isinstance(e, Add):
        acc = evaluate(e.args[0], point)
        for a in e.args[1:]:
            acc = acc + evaluate(a, point)
        return acc
    if isinstance(e, Mul):
        acc = evaluate(e.args[0], point)
        for a in e.args[1:]:
            acc = acc * evaluate(a, point)
        return acc
    if isinstance(e, Div):
        return evaluate(e.args[0], point) / evaluate(e.args[1], point)
    if isinstance(e, Pow):
        base = evaluate(e.args[0], point)
        expo = evaluate(e.args[1], point)
        return np.power(base, expo) if isinstance(base, np.ndarray) or isinstance(expo, np.ndarray) \
            else float(base) ** float(expo)
    if isinstance(e, Call):
        u = evaluate(e.arg, point)
        fn = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt, "sin": np.sin,
              "cos": np.cos, "asinh": np.arcsinh, "abs": np.abs}[e.fn]
        out = fn(u)
        return out if isinstance(out, np.ndarray) else float(out)
    raise ExprError(f"cannot evaluate {type(e).__name__}")


class ExactnessError(ArithmeticError):
    pass


def evaluate_exact(e: Expr, point: dict) -> Fraction:
    """Evaluate with Fraction arithmetic; raises ExactnessError when an
    irrational operation is unavoidable."""
    if isinstance(e, Const):
        if not isinstance(e.value, Fraction):
            raise ExactnessError("float constant")
        return e.value
    if isinstance(e, Var):
        return Fraction(point[e.index])
    if isinstance(e, Neg):
        return -evaluate_exact(e.args[0], point)
    if isinstance(e, Add):
        return sum((evaluate_exact(a, point) for a in e.args), Fraction(0))
    if isinstance(e, Mul):
        acc = Fraction(1)
        for a in e.args:
            acc *= evaluate_exact(a, point)
        return acc
    if isinstance(e, Div):
        return evaluate_exact(e.args[0], point) / evaluate_exact(e.args[1], point)
    if isinstance(e, Pow):
        expo = evaluate_exact(e.args[1], point)
        base = evaluate_exact(e.args[0], point)
        folded = _fold_pow(base, expo)
        if not isinstance(folded, Fraction):
            raise ExactnessError(f"irrational power {base}^{expo}")
        return folded
    if isinstance(e, Call) and e.fn == "abs":
        return abs(evaluate_exact(e.arg, point))
    raise ExactnessError(f"{type(e).__name__} is not exactly evaluable")


# ---------------------------------------------------------------------------
# printing and parsing
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 10, 20, 30, 40, 50


def _wrap(s, inner_prec, outer_prec):
    return f"({s})" if inner_prec < outer_prec else s


def to_string(e: Expr) -> str:
    return _to_string(e, 0)


def _const_str(v):
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    return repr(v)


def _to_string(e: Expr, outer: int) -> str:
    if isinstance(e, Const):
        v = e.value
        if v < 0:
            return _wrap(f"-{_const_str(-v)}", _PREC_NEG, outer)
        if isinstance(v, Fraction) and v.denominator != 1:
            return _wrap(_const_str(v), _PREC_MUL, outer)
        return _const_str(v)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Symbol):
        return e.name
    if isinstance(e, Neg):
        return _wrap(f"-{_to_string(e.args[0], _PREC_NEG + 1)}", _PREC_NEG, outer)
    if isinstance(e, Add):
        parts = [_to_string(e.args[0], _PREC_ADD)]
        for a in e.args[1:]:
            if isinstance(a, Neg):
                parts.append(f" - {_to_string(a.args[0], _PREC_ADD + 1)}")
            elif isinstance(a, Const) and a.value < 0:
                parts.append(f" - {_to_string(Const(-a.value), _PREC_ADD + 1)}")
            else:
                parts.append(f" + {_to_string(a, _PREC_ADD + 1)}")
        return _wrap("".join(parts), _PREC_ADD, outer)
    if isinstance(e, Mul):
        return _wrap("*".join(_to_string(a, _PREC_MUL + (0 if i == 0 else 1))
                              for i, a in enumerate(e.args)), _PREC_MUL, outer)
    if isinstance(e, Div):
        return _wrap(f"{_to_string(e.args[0], _PREC_MUL)}/{_to_string(e.args[1], _PREC_MUL + 1)}",
                     _PREC_MUL, outer)
    if isinstance(e, Pow):
        return _wrap(f"{_to_string(e.args[0], _PREC_POW + 1)}^{_to_string(e.args[1], _PREC_POW)}",
                     _PREC_POW, outer)
    if isinstance(e, Call):
        name = "abs" if e.fn == "abs" else e.fn
        return f"{name}({_to_string(e.arg, 0)})"
    raise ExprError(f"cannot print {type(e).__name__}")


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ExprError(f"cannot tokenize near {rest[:12]!r}")
        if m.lastgroup is None and not m.group().strip():
            pos = m.end()
            continue
        if m.group("num") is not None:
            tok = m.group("num")
            if "." in tok or "e" in tok or "E" in tok:
                out.append(("num", float(tok)))
            else:
                out.append(("num", Fraction(int(tok))))
        elif m.group("ident") is not None:
            out.append(("ident", m.group("ident")))
        else:
            out.append(("op", m.group("op")))
        pos = m.end()
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, tokens, allow_symbols):
        self.toks = tokens
        self.i = 0
        self.allow_symbols = allow_symbols

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op):
        kind, val = self.next()
        if kind != "op" or val != op:
            raise ExprError(f"expected {op!r}, got {val!r}")

    def parse_expr(self, min_prec=_PREC_ADD):
        # '^' never reaches this loop: parse_postfix_pow consumes it
        left = self.parse_prefix()
        while True:
            kind, val = self.peek()
            if kind != "op" or val not in "+-*/":
                break
            prec = _PREC_ADD if val in "+-" else _PREC_MUL
            if prec < min_prec:
                break
            self.next()
            right = self.parse_expr(prec + 1)
            if val == "+":
                left = add(left, right)
            elif val == "-":
                left = add(left, neg(right))
            elif val == "*":
                left = mul(left, right)
            else:
                left = div(left, right)
        return left

    def parse_prefix_pow(self):
        # exponent position: right-associative, unary minus allowed
        kind, val = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return neg(self.parse_prefix_pow())
        base = self.parse_atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.next()
            return power(base, self.parse_prefix_pow())
        return base

    def parse_prefix(self):
        # unary minus binds tighter than * but looser than ^
        kind, val = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return neg(self.parse_prefix())
        return self.parse_postfix_pow()

    def parse_postfix_pow(self):
        base = self.parse_atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.next()
            return power(base, self.parse_prefix_pow())
        return base

    def parse_atom(self):
        kind, val = self.next()
        if kind == "num":
            return Const(val)
        if kind == "ident":
            if val in FUNCTIONS:
                self.expect_op("(")
                arg = self.parse_expr()
                self.expect_op(")")
                return call(val, arg)
            m = re.fullmatch(r"x(\d+)", val)
            if m:
                return Var(int(m.group(1)))
            if self.allow_symbols:
                return Symbol(val)
            raise ExprError(f"unknown identifier {val!r}")
        if kind == "op" and val == "(":
            e = self.parse_expr()
            self.expect_op(")")
            return e
        raise ExprError(f"unexpected token {val!r}")


def parse(text: str, allow_symbols: bool = False) -> Expr:
    """Parse an expression string.

    Grammar: identifiers x<k>; numbers are decimals or integers (p/q comes
    out of integer division folding); operators + - * / ^ with ^ binding
    tightest and right-associative, then unary minus, then * /, then + -;
    functions exp, log, sqrt, sin, cos, asinh, abs.
    """
    p = _Parser(_tokenize(text), allow_symbols)
    e = p.parse_expr()
    kind, val = p.peek()
    if kind != "end":
        raise ExprError(f"trailing input at {val!r}")
    return e


# ---------------------------------------------------------------------------
# monomial normal form
# ---------------------------------------------------------------------------
#
# A supported expression is flattened into {monomial: coefficient} where a
# monomial is (vars, atoms):
#   vars  = ((index, exponent), ...) sorted, exponent a Fraction (may be
#           fractional or negative -- radial powers like r^(1-2k) appear),
#   atoms = ((kind, key, exponent), ...) for opaque subterms: exp/log/sin/
#           cos/asinh of a normalized argument, or a non-monomial base raised
#           to a non-integer or negative power ('pow').
# Fractional powers are distributed over single-monomial bases, which is the
# positivity regime the analytic power calculus lives in.

class UnsupportedNormalForm(ExprError):
    pass


def _exp_key(v):
    v = as_number(v)
    if isinstance(v, float) and v.is_integer():
        return Fraction(int(v))
    return v


def _nf_key(nf):
    """Canonical hashable rendering of a normal form (for use inside atoms)."""
    items = []
    for mono, coeff in nf.items():
        if isinstance(coeff, Fraction):
            ckey = ("F", coeff.numerator, coeff.denominator)
        else:
            ckey = ("f", float(coeff))
        items.append((mono, ckey))
    return tuple(sorted(items, key=repr))


def _mono_mul(m1, m2):
    vars1, atoms1 = m1
    vars2, atoms2 = m2
    dv = dict(vars1)
    for idx, ex in vars2:
        dv[idx] = dv.get(idx, Fraction(0)) + ex
    da = dict(((k, key), ex) for k, key, ex in atoms1)
    for k, key, ex in atoms2:
        da[(k, key)] = da.get((k, key), Fraction(0)) + ex
    vars_t = tuple(sorted((i, e) for i, e in dv.items() if e != 0))
    atoms_t = tuple(sorted(((k, key, e) for (k, key), e in da.items() if e != 0), key=repr))
    return (vars_t, atoms_t)


_MONO_ONE = ((), ())


def _nf_mul(a, b):
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = _mono_mul(m1, m2)
            out[m] = out.get(m, Fraction(0)) + c1 * c2
    return {m: c for m, c in out.items() if c != 0}


def _nf_add(a, b):
    out = dict(a)
    for m, c in b.items():
        out[m] = out.get(m, Fraction(0)) + c
    return {m: c for m, c in out.items() if c != 0}


def _nf_scale(a, c):
    if c == 0:
        return {}
    return {m: c * v for m, v in a.items()}


def _mono_pow(mono, coeff, ex):
    """Raise a single monomial (coeff * mono) to the power ex."""
    vars_t, atoms_t = mono
    new_vars = tuple((i, e * ex) for i, e in vars_t)
    new_atoms = tuple((k, key, e * ex) for k, key, e in atoms_t)
    if coeff == 1:
        c = Fraction(1)
    else:
        folded = _fold_pow(as_number(coeff), _exp_key(ex))
        if folded is None:
            raise UnsupportedNormalForm("negative coefficient under fractional power")
        c = folded
    return {(tuple(sorted(new_vars)), tuple(sorted(new_atoms, key=repr))): c}


def normal_form(e: Expr) -> dict:
    if isinstance(e, Const):
        return {} if e.value == 0 else {_MONO_ONE: e.value}
    if isinstance(e, Var):
        return {(((e.index, Fraction(1)),), ()): Fraction(1)}
    if isinstance(e, Neg):
        return _nf_scale(normal_form(e.args[0]), Fraction(-1))
    if isinstance(e, Add):
        out = {}
        for a in e.args:
            out = _nf_add(out, normal_form(a))
        return out
    if isinstance(e, Mul):
        out = {_MONO_ONE: Fraction(1)}
        for a in e.args:
            out = _nf_mul(out, normal_form(a))
        return out
    if isinstance(e, Div):
        num = normal_form(e.args[0])
        den = normal_form(e.args[1])
        return _nf_mul(num, _nf_invert(den))
    if isinstance(e, Pow):
        base, expo = e.args
        if not isinstance(expo, Const):
            raise UnsupportedNormalForm("symbolic exponent")
        ex = _exp_key(expo.value)
        nb = normal_form(base)
        return _nf_pow(nb, ex)
    if isinstance(e, Call):
        if e.fn == "abs":
            raise UnsupportedNormalForm("abs is sign-dependent")
        narg = normal_form(e.arg)
        atom = (e.fn, _nf_key(narg), Fraction(1))
        return {((), (atom,)): Fraction(1)}
    if isinstance(e, Symbol):
        atom = ("sym", e.name, Fraction(1))
        return {((), (atom,)): Fraction(1)}
    raise UnsupportedNormalForm(type(e).__name__)


def _nf_invert(nf):
    if not nf:
        raise ZeroDivisionError("division by zero expression")
    if len(nf) == 1:
        ((mono, coeff),) = nf.items()
        vars_t, atoms_t = mono
        inv_mono = (tuple((i, -e) for i, e in vars_t),
                    tuple((k, key, -e) for k, key, e in atoms_t))
        if isinstance(coeff, Fraction):
            c = Fraction(1) / coeff
        else:
            c = 1.0 / coeff
        return {(tuple(sorted(inv_mono[0])), tuple(sorted(inv_mono[1], key=repr))): c}
    atom = ("pow", _nf_key(nf), Fraction(-1))
    return {((), (atom,)): Fraction(1)}


def _nf_pow(nf, ex):
    if isinstance(ex, Fraction) and ex.denominator == 1:
        k = int(ex)
        if k >= 0:
            out = {_MONO_ONE: Fraction(1)}
            for _ in range(k):
                out = _nf_mul(out, nf)
            return out
        inv = _nf_invert(nf)
        out = {_MONO_ONE: Fraction(1)}
        for _ in range(-k):
            out = _nf_mul(out, inv)
        return out
    if len(nf) == 1:
        ((mono, coeff),) = nf.items()
        return _mono_pow(mono, coeff, ex)
    atom = ("pow", _nf_key(nf), ex)
    return {((), (atom,)): Fraction(1)}


def nf_equal(e1: Expr, e2: Expr, tol: float = 1e-12) -> bool:
    """Exact (or tol-level, if floats entered) equality via normal forms."""
    d = _nf_add(normal_form(e1), _nf_scale(normal_form(e2), Fraction(-1)))
    return all(num_eq(c, Fraction(0), tol) for c in d.values())


def exprs_equal(e1: Expr, e2: Expr, tol: float = 1e-12, seed: int = 7,
                nsamples: int = 24, lo: float = 0.3, hi: float = 1.7) -> bool:
    """Equality test: normal form where supported, deterministic sampling
    otherwise (points drawn in [lo, hi] to stay clear of branch points)."""
    try:
        d = _nf_add(normal_form(e1), _nf_scale(normal_form(e2), Fraction(-1)))
        if all(num_eq(c, Fraction(0), tol) for c in d.values()):
            return True
        # A surviving term that carries an opaque atom (an unexpanded power of
        # a sum) does not prove inequality -- e.g. h^(-2)*h vs h^(-1) -- so
        # only a pure variable-monomial residue settles the question here.
        if all(not atoms_t for (_, atoms_t) in d):
            return False
    except UnsupportedNormalForm:
        pass
    rng = np.random.default_rng(seed)
    idxs = sorted(free_variables(e1) | free_variables(e2))
    for _ in range(nsamples):
        pt = {j: float(rng.uniform(lo, hi)) for j in idxs}
        v1, v2 = evaluate(e1, pt), evaluate(e2, pt)
        if not math.isclose(v1, v2, rel_tol=tol, abs_tol=tol * 10):
            return False
    return True


# ---------------------------------------------------------------------------
# plain multivariate polynomials (exponent-tuple dicts)
# ---------------------------------------------------------------------------

def as_polynomial(e: Expr, nvars: int):
    """Return {exponent_tuple: coeff} if e is a polynomial in x1..xnvars,
    else None."""
    try:
        nf = normal_form(e)
    except (UnsupportedNormalForm, ZeroDivisionError):
        return None
    poly = {}
    for (vars_t, atoms_t), coeff in nf.items():
        if atoms_t:
            return None
        expo = [0] * nvars
        for idx, ex in vars_t:
            if idx > nvars or not (isinstance(ex, Fraction) and ex.denominator == 1 and ex >= 0):
                return None
            expo[idx - 1] = int(ex)
        key = tuple(expo)
        poly[key] = poly.get(key, Fraction(0)) + coeff
    return {k: c for k, c in poly.items() if c != 0}


def poly_to_expr(poly: dict) -> Expr:
    terms = []
    for expo, coeff in sorted(poly.items()):
        factors = [Const(coeff)]
        for i, k in enumerate(expo):
            if k:
                factors.append(power(Var(i + 1), k))
        terms.append(mul(*factors))
    return add(*terms) if terms else ZERO


def _grlex_key(expo):
    return (sum(expo), expo)


def poly_divmod(p: dict, d: dict):
    """Single-divisor multivariate division (graded-lex leading term).
    Returns (q, r) with p = q*d + r and no term of r divisible by lt(d)."""
    if not d:
        raise ZeroDivisionError("polynomial division by zero")
    lt = max(d, key=_grlex_key)
    lc = d[lt]
    q, r = {}, {}
    work = dict(p)
    while work:
        t = max(work, key=_grlex_key)
        c = work.pop(t)
        if c == 0:
            continue
        if all(t[i] >= lt[i] for i in range(len(t))):
            mono = tuple(t[i] - lt[i] for i in range(len(t)))
            factor = c / lc
            q[mono] = q.get(mono, Fraction(0)) + factor
            for dt, dc in d.items():
                if dt == lt:
                    continue  # cancels the popped leading term exactly
                nt = tuple(mono[i] + dt[i] for i in range(len(t)))
                work[nt] = work.get(nt, Fraction(0)) - factor * dc
                if work[nt] == 0:
                    del work[nt]
        else:
            r[t] = r.get(t, Fraction(0)) + c
    return ({k: c for k, c in q.items() if c != 0},
            {k: c for k, c in r.items() if c != 0})
