"""Exact scalar arithmetic for the whole library.

A ``Poly`` is a multivariate polynomial with ``Fraction`` coefficients over a
set of named chart variables, an optional time variable ``t``, and a Laurent
unit ``u`` standing for ``exp(t)``:

    u * u^-1 = 1        and        dt(u) = u.

The representation is sparse: a map from exponent tuples to nonzero rational
coefficients.  The final slot of every exponent tuple is the (possibly
negative) power of ``u``; all other slots are nonnegative powers of the named
variables.  The zero polynomial is the empty map, which makes equality-to-zero
a trivially decidable property — every identity checked by this library
reduces to it.

Variables are kept in a canonical order (alphabetical, with ``t`` last) so
that printing is deterministic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

Rat = Fraction

Exponent = Tuple[int, ...]


def _var_key(name: str) -> tuple:
    # 't' sorts after all chart variables
    return (name == "t", name)


class Poly:
    """Sparse exact polynomial in chart variables, t, and u = exp(t)."""

    __slots__ = ("vars", "terms")

    def __init__(self, variables: Tuple[str, ...], terms: Dict[Exponent, Fraction]):
        self.vars = variables
        self.terms = {e: c for e, c in terms.items() if c != 0}

    @staticmethod
    def _raw(variables: Tuple[str, ...], terms: Dict[Exponent, Fraction]) -> "Poly":
        """Internal constructor; terms must already be canonical and zero-free."""
        p = object.__new__(Poly)
        p.vars = variables
        p.terms = terms
        return p

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "Poly":
        return _ZERO

    @staticmethod
    def one() -> "Poly":
        return _ONE

    @staticmethod
    def constant(value) -> "Poly":
        c = Fraction(value)
        return Poly((), {(0,): c} if c else {})

    @staticmethod
    def variable(name: str) -> "Poly":
        if name == "u" or name == "exp":
            raise ValueError(f"reserved name {name!r} cannot be a variable")
        return Poly((name,), {(1, 0): Fraction(1)})

    @staticmethod
    def u_power(k: int) -> "Poly":
        return Poly((), {(k,): Fraction(1)})

    # -- basic queries -------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(x == 0 for x in e) for e in self.terms)

    def constant_value(self) -> Fraction:
        """The value of a constant polynomial (raises if non-constant)."""
        if self.is_zero:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError(f"not a constant polynomial: {self}")
        return sum(self.terms.values(), Fraction(0))

    def uses_u(self) -> bool:
        return any(e[-1] != 0 for e in self.terms)

    def total_degree(self) -> int:
        if self.is_zero:
            return 0
        return max(sum(e[:-1]) + abs(e[-1]) for e in self.terms)

    # -- context handling ----------------------------------------------------

    def _extended(self, variables: Tuple[str, ...]) -> Dict[Exponent, Fraction]:
        """Terms re-indexed over a superset variable tuple."""
        if variables == self.vars:
            return dict(self.terms)
        pos = {v: variables.index(v) for v in self.vars}
        n = len(variables)
        out: Dict[Exponent, Fraction] = {}
        for e, c in self.terms.items():
            exp = [0] * (n + 1)
            for i, v in enumerate(self.vars):
                exp[pos[v]] = e[i]
            exp[n] = e[-1]
            out[tuple(exp)] = c
        return out

    @staticmethod
    def _merge_vars(a: Tuple[str, ...], b: Tuple[str, ...]) -> Tuple[str, ...]:
        if a == b:
            return a
        return tuple(sorted(set(a) | set(b), key=_var_key))

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other) -> "Poly":
        other = _coerce(other)
        if not self.terms:
            return other
        if not other.terms:
            return self
        if self.vars == other.vars:
            terms = dict(self.terms)
            for e, c in other.terms.items():
                s = terms.get(e)
                if s is None:
                    terms[e] = c
                else:
                    s = s + c
                    if s:
                        terms[e] = s
                    else:
                        del terms[e]
            return Poly._raw(self.vars, terms)
        variables = Poly._merge_vars(self.vars, other.vars)
        terms = self._extended(variables)
        for e, c in other._extended(variables).items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return Poly(variables, terms)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "Poly":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            if other == 0 or not self.terms:
                return _ZERO
            if other == 1:
                return self
            return Poly._raw(self.vars, {e: c * other for e, c in self.terms.items()})
        other = _coerce(other)
        if not self.terms or not other.terms:
            return _ZERO
        variables = (self.vars if self.vars == other.vars
                     else Poly._merge_vars(self.vars, other.vars))
        a = self.terms if variables == self.vars else self._extended(variables)
        b = other.terms if variables == other.vars else other._extended(variables)
        if len(b) == 1:
            (eb, cb), = b.items()
            return Poly._raw(variables,
                             {tuple(x + y for x, y in zip(ea, eb)): ca * cb
                              for ea, ca in a.items()})
        out: Dict[Exponent, Fraction] = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                s = out.get(e)
                if s is None:
                    out[e] = ca * cb
                else:
                    s = s + ca * cb
                    if s:
                        out[e] = s
                    else:
                        del out[e]
        return Poly._raw(variables, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative powers are only available for u (exp(t))")
        result = Poly.one()
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        return (self - other).is_zero

    __hash__ = None  # mutable-ish container; never used as a dict key

    # -- calculus ------------------------------------------------------------

    def partial(self, v: str) -> "Poly":
        """Formal partial derivative; dt also differentiates u-powers."""
        out: Dict[Exponent, Fraction] = {}
        if v in self.vars:
            i = self.vars.index(v)
            for e, c in self.terms.items():
                if e[i] > 0:
                    d = list(e)
                    d[i] -= 1
                    d = tuple(d)
                    out[d] = out.get(d, Fraction(0)) + c * e[i]
        if v == "t":
            for e, c in self.terms.items():
                if e[-1] != 0:
                    out[e] = out.get(e, Fraction(0)) + c * e[-1]
        return Poly(self.vars, out)

    def substitute(self, bindings: Mapping[str, "Poly"]) -> "Poly":
        """Exact composition; binding values may not contain exp(t)."""
        relevant = {v: p for v, p in bindings.items() if v in self.vars}
        for v, p in relevant.items():
            p = _coerce(p)
            if p.uses_u():
                raise ValueError(
                    f"cannot substitute exp(t)-dependent value for {v!r}"
                )
            relevant[v] = p
        if not relevant:
            return self
        kept = tuple(v for v in self.vars if v not in relevant)
        result = Poly.zero()
        for e, c in self.terms.items():
            term = Poly(kept, {tuple(e[i] for i, v in enumerate(self.vars) if v in kept) + (e[-1],): c})
            for i, v in enumerate(self.vars):
                if v in relevant and e[i]:
                    term = term * relevant[v] ** e[i]
            result = result + term
        return result

    def _leading(self) -> Tuple[Exponent, Fraction]:
        """Leading term under lex order (multiplication-compatible, u slot last)."""
        e = max(self.terms)
        return e, self.terms[e]

    def divexact(self, divisor: "Poly") -> "Poly":
        """Exact polynomial division; raises if the divisor does not divide."""
        divisor = _coerce(divisor)
        if divisor.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero:
            return _ZERO
        variables = Poly._merge_vars(self.vars, divisor.vars)
        rem = Poly(variables, self._extended(variables))
        div = Poly(variables, divisor._extended(variables))
        de, dc = div._leading()
        quot: Dict[Exponent, Fraction] = {}
        guard = 0
        while not rem.is_zero:
            guard += 1
            if guard > 10000:
                raise ArithmeticError("exact division did not terminate")
            re_, rc = rem._leading()
            qe = tuple(a - b for a, b in zip(re_, de))
            if any(x < 0 for x in qe[:-1]):
                raise ArithmeticError(f"{divisor} does not divide {self}")
            qc = rc / dc
            quot[qe] = quot.get(qe, Fraction(0)) + qc
            rem = rem - Poly(variables, {qe: qc}) * div
        return Poly(variables, quot)

    def rename(self, mapping: Mapping[str, str]) -> "Poly":
        """Bijectively rename variables (used when charts are combined)."""
        new_vars = tuple(mapping.get(v, v) for v in self.vars)
        if len(set(new_vars)) != len(new_vars):
            raise ValueError("variable renaming must stay injective")
        order = sorted(range(len(new_vars)), key=lambda i: _var_key(new_vars[i]))
        variables = tuple(new_vars[i] for i in order)
        terms = {tuple(e[i] for i in order) + (e[-1],): c
                 for e, c in self.terms.items()}
        return Poly(variables, terms)

    def eval_at(self, point: Mapping[str, Fraction], u_value: Fraction = Fraction(1)) -> Fraction:
        """Exact evaluation; u is evaluated at the given nonzero rational."""
        if u_value == 0:
            raise ValueError("u = exp(t) cannot vanish")
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for i, v in enumerate(self.vars):
                if e[i]:
                    term *= Fraction(point[v]) ** e[i]
            if e[-1]:
                term *= Fraction(u_value) ** e[-1]
            total += term
        return total

    # -- printing ------------------------------------------------------------

    def _sorted_terms(self):
        def key(item):
            e, _ = item
            return (sum(e[:-1]) + abs(e[-1]), e)

        return sorted(self.terms.items(), key=key, reverse=True)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        chunks = []
        for e, c in self._sorted_terms():
            factors = []
            for i, v in enumerate(self.vars):
                if e[i] == 1:
                    factors.append(v)
                elif e[i] > 1:
                    factors.append(f"{v}^{e[i]}")
            k = e[-1]
            if k == 1:
                factors.append("exp(t)")
            elif k == -1:
                factors.append("exp(-t)")
            elif k != 0:
                factors.append(f"exp({k}*t)")
            if not factors:
                body = str(abs(c))
            elif abs(c) == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(abs(c))] + factors)
            sign = "-" if c < 0 else "+"
            chunks.append((sign, body))
        first_sign, first_body = chunks[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in chunks[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"Poly({self})"


_ZERO = Poly((), {})
_ONE = Poly((), {(0,): Fraction(1)})


def _coerce(value) -> Poly:
    if isinstance(value, Poly):
        return value
    if isinstance(value, (int, Fraction)):
        return Poly.constant(value)
    raise TypeError(f"cannot interpret {value!r} as a polynomial")


# -- spec-level operation wrappers ------------------------------------------


def arith(a: Poly, b: Poly, kind: str) -> Poly:
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    raise ValueError(f"unknown arithmetic kind {kind!r}")


def partial(p: Poly, v: str) -> Poly:
    return p.partial(v)


def substitute(p: Poly, bindings: Mapping[str, Poly]) -> Poly:
    return p.substitute(bindings)


class PolyMap:
    """A polynomial map between charts, used as the base map of bundle maps."""

    __slots__ = ("source_vars", "target_vars", "components")

    def __init__(self, source_vars: Iterable[str], target_vars: Iterable[str],
                 components: Iterable[Poly]):
        self.source_vars = tuple(source_vars)
        self.target_vars = tuple(target_vars)
        self.components = tuple(components)
        if len(self.components) != len(self.target_vars):
            raise ValueError("one component per target variable is required")
        allowed = set(self.source_vars) | {"t"}
        for c in self.components:
            if not set(c.vars) <= allowed:
                raise ValueError(f"component {c} uses non-source variables")

    @staticmethod
    def identity(variables: Iterable[str]) -> "PolyMap":
        variables = tuple(variables)
        return PolyMap(variables, variables, [Poly.variable(v) for v in variables])

    def pull(self, f: Poly) -> Poly:
        """Compose a target-chart polynomial with the map."""
        return f.substitute(dict(zip(self.target_vars, self.components)))

    def compose(self, inner: "PolyMap") -> "PolyMap":
        """self o inner (inner is applied first)."""
        if inner.target_vars != self.source_vars:
            raise ValueError("charts do not match for composition")
        return PolyMap(inner.source_vars, self.target_vars,
                       [inner.pull(c) for c in self.components])

    def __eq__(self, other) -> bool:
        return (isinstance(other, PolyMap)
                and self.source_vars == other.source_vars
                and self.target_vars == other.target_vars
                and all(a == b for a, b in zip(self.components, other.components)))

    def __repr__(self) -> str:
        body = ", ".join(f"{v} -> {c}" for v, c in zip(self.target_vars, self.components))
        return f"PolyMap({body})"


# -- literal syntax -----------------------------------------------------------
#
#   integers, rationals a/b, variables, + - * ^, parentheses,
#   exp(t) / exp(-t) / exp(k*t)  for the Laurent unit u.


class PolyParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class _PolyParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def error(self, message: str):
        raise PolyParseError(message, self.pos)

    def parse(self) -> Poly:
        result = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error(f"unexpected {self.text[self.pos]!r}")
        return result

    def expr(self) -> Poly:
        sign = 1
        if self.peek() == "-":
            self.pos += 1
            sign = -1
        elif self.peek() == "+":
            self.pos += 1
        result = self.term() * sign
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def term(self) -> Poly:
        result = self.factor()
        while self.peek() == "*":
            self.pos += 1
            result = result * self.factor()
        return result

    def factor(self) -> Poly:
        base = self.atom()
        while self.peek() == "^":
            self.pos += 1
            self.skip_ws()
            neg = False
            if self.peek() == "-":
                neg = True
                self.pos += 1
            n = self.integer()
            if neg:
                if base.vars or any(e[:-1] != () for e in base.terms):
                    pass
                if not _is_pure_u(base):
                    self.error("negative powers are only allowed on exp(t)")
                k = next(iter(base.terms))[-1]
                base = Poly.u_power(-n * k)
            else:
                base = base ** n
        return base

    def atom(self) -> Poly:
        self.skip_ws()
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return inner
        if ch == "-":
            self.pos += 1
            return -self.atom()
        if ch.isdigit():
            num = self.integer()
            if self.peek() == "/":
                self.pos += 1
                den = self.integer()
                if den == 0:
                    self.error("zero denominator")
                return Poly.constant(Fraction(num, den))
            return Poly.constant(num)
        if ch.isalpha() or ch == "_":
            name = self.name()
            if name == "exp":
                return self.exp_args()
            if name == "u":
                self.error("write exp(t) rather than u")
            return Poly.variable(name)
        self.error("expected a number, variable, or '('")

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an integer")
        return int(self.text[start:self.pos])

    def name(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        return self.text[start:self.pos]

    def exp_args(self) -> Poly:
        if self.peek() != "(":
            self.error("expected '(' after exp")
        self.pos += 1
        sign = 1
        if self.peek() == "-":
            sign = -1
            self.pos += 1
        k = 1
        if self.peek().isdigit():
            k = self.integer()
            if self.peek() == "*":
                self.pos += 1
        if self.name() != "t":
            self.error("exp only accepts integer multiples of t")
        if self.peek() != ")":
            self.error("expected ')'")
        self.pos += 1
        return Poly.u_power(sign * k)


def _is_pure_u(p: Poly) -> bool:
    return len(p.terms) == 1 and all(
        c == 1 and all(x == 0 for x in e[:-1]) for e, c in p.terms.items()
    )


def parse_poly(text: str) -> Poly:
    """Parse the polynomial literal syntax shared with the definition language."""
    return _PolyParser(text).parse()
