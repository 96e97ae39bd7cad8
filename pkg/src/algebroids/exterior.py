"""Sparse graded exterior algebra over a trivialized bundle on a chart.

Multivectors and forms share one representation distinguished by a variance
tag; a degree-k element is a map from strictly increasing 1-based index
k-tuples to ``Poly`` coefficients.  Degree-0 elements use the empty tuple.

Sign conventions (normative for the whole library):

* basis index tuples are strictly increasing;
* the interior product by a degree-1 element is a left derivation,
  i_a(b1 ^ ... ^ bk) = sum_m (-1)^(m-1) <a, bm> b1 ^ ... ^ bm-hat ^ ... ^ bk;
* for decomposable a = a1 ^ ... ^ aj, interior iterates as
  i_a = i_aj o ... o i_a1;
* full evaluation contracts arguments left to right,
  w(X1, ..., Xk) = i_Xk ... i_X1 w.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .ring import Poly, PolyMap

MULTIVECTOR = "multivector"
FORM = "form"

IndexTuple = Tuple[int, ...]


@dataclass(frozen=True)
class BundleContext:
    """A trivialized rank-r bundle over a polynomial chart."""

    chart: Tuple[str, ...]
    basis: Tuple[str, ...]
    dual: Tuple[str, ...]

    def __post_init__(self):
        if len(self.basis) != len(self.dual):
            raise ValueError("basis and dual label lists must have equal length")
        if len(self.basis) < 1:
            raise ValueError("rank must be at least 1")
        labels = list(self.chart) + list(self.basis) + list(self.dual)
        if len(set(labels)) != len(labels):
            raise ValueError("chart, basis and dual labels must be distinct")

    @staticmethod
    def make(chart: Iterable[str], basis: Iterable[str],
             dual: Optional[Iterable[str]] = None) -> "BundleContext":
        basis = tuple(basis)
        if dual is None:
            dual = tuple(default_dual_label(b) for b in basis)
        return BundleContext(tuple(chart), basis, tuple(dual))

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def dim(self) -> int:
        return len(self.chart)

    def dualized(self) -> "BundleContext":
        """The dual bundle: basis and dual labels swap roles."""
        return BundleContext(self.chart, self.dual, self.basis)

    def with_chart(self, chart: Tuple[str, ...]) -> "BundleContext":
        return BundleContext(chart, self.basis, self.dual)

    def labels(self, variance: str) -> Tuple[str, ...]:
        return self.basis if variance == MULTIVECTOR else self.dual

    def colabels(self, variance: str) -> Tuple[str, ...]:
        return self.dual if variance == MULTIVECTOR else self.basis


def default_dual_label(basis_label: str) -> str:
    if basis_label.startswith("e"):
        return "eps" + basis_label[1:]
    return basis_label + "_d"


def _merge_indices(s: IndexTuple, t: IndexTuple) -> Optional[Tuple[int, IndexTuple]]:
    """Merge two strictly increasing tuples; None if they share an index."""
    sign = 1
    out: List[int] = []
    i = j = 0
    while i < len(s) and j < len(t):
        if s[i] == t[j]:
            return None
        if s[i] < t[j]:
            out.append(s[i])
            i += 1
        else:
            # t[j] jumps over the remaining len(s) - i entries of s
            if (len(s) - i) % 2:
                sign = -sign
            out.append(t[j])
            j += 1
    out.extend(s[i:])
    out.extend(t[j:])
    return sign, tuple(out)


class GradedElement:
    """A degree-k multivector or form with Poly coefficients."""

    __slots__ = ("ctx", "variance", "degree", "terms")

    def __init__(self, ctx: BundleContext, variance: str, degree: int,
                 terms: Dict[IndexTuple, Poly]):
        if variance not in (MULTIVECTOR, FORM):
            raise ValueError(f"unknown variance {variance!r}")
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        self.ctx = ctx
        self.variance = variance
        self.degree = degree
        clean: Dict[IndexTuple, Poly] = {}
        if degree <= ctx.rank:
            for idx, coeff in terms.items():
                if len(idx) != degree:
                    raise ValueError(f"index tuple {idx} has wrong length for degree {degree}")
                if any(i < 1 or i > ctx.rank for i in idx):
                    raise ValueError(f"index out of range in {idx}")
                if any(idx[m] >= idx[m + 1] for m in range(len(idx) - 1)):
                    raise ValueError(f"index tuple {idx} must be strictly increasing")
                if not coeff.is_zero:
                    clean[idx] = coeff
        self.terms = clean

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def _make(ctx: BundleContext, variance: str, degree: int,
              terms: Dict[IndexTuple, Poly]) -> "GradedElement":
        """Internal constructor; terms must be canonical with nonzero coefficients."""
        el = object.__new__(GradedElement)
        el.ctx = ctx
        el.variance = variance
        el.degree = degree
        el.terms = terms
        return el

    @staticmethod
    def zero(ctx: BundleContext, variance: str, degree: int) -> "GradedElement":
        return GradedElement._make(ctx, variance, degree, {})

    @staticmethod
    def scalar(ctx: BundleContext, value: Poly, variance: str = MULTIVECTOR) -> "GradedElement":
        return GradedElement(ctx, variance, 0, {(): value})

    @staticmethod
    def basis_vector(ctx: BundleContext, index: int) -> "GradedElement":
        return GradedElement(ctx, MULTIVECTOR, 1, {(index,): Poly.one()})

    @staticmethod
    def basis_form(ctx: BundleContext, index: int) -> "GradedElement":
        return GradedElement(ctx, FORM, 1, {(index,): Poly.one()})

    @staticmethod
    def section(ctx: BundleContext, variance: str, coeffs: Sequence[Poly]) -> "GradedElement":
        if len(coeffs) != ctx.rank:
            raise ValueError("one coefficient per basis label is required")
        return GradedElement._make(ctx, variance, 1,
                                   {(i + 1,): c for i, c in enumerate(coeffs)
                                    if c.terms})

    # -- queries --------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def as_poly(self) -> Poly:
        if self.degree != 0:
            raise ValueError("only degree-0 elements are scalars")
        return self.terms.get((), Poly.zero())

    def coeff(self, idx: IndexTuple) -> Poly:
        return self.terms.get(tuple(idx), Poly.zero())

    def coeffs_deg1(self) -> List[Poly]:
        if self.degree != 1:
            raise ValueError("coefficient vector is only defined in degree 1")
        return [self.terms.get((i,), Poly.zero()) for i in range(1, self.ctx.rank + 1)]

    def _check_mate(self, other: "GradedElement", same_variance: bool = True):
        if self.ctx is not other.ctx and self.ctx != other.ctx:
            raise ValueError("elements live on different bundle contexts")
        if same_variance and self.variance != other.variance:
            raise ValueError("variance mismatch (multivector vs form)")
        if not same_variance and self.variance == other.variance:
            raise ValueError("an element of the opposite variance is required")

    # -- linear structure -----------------------------------------------------

    def __add__(self, other: "GradedElement") -> "GradedElement":
        self._check_mate(other)
        if self.degree != other.degree:
            raise ValueError("cannot add elements of different degree")
        if not self.terms:
            return other
        if not other.terms:
            return self
        terms = dict(self.terms)
        for idx, c in other.terms.items():
            s = terms.get(idx)
            if s is None:
                terms[idx] = c
            else:
                s = s + c
                if s.terms:
                    terms[idx] = s
                else:
                    del terms[idx]
        return GradedElement._make(self.ctx, self.variance, self.degree, terms)

    def __neg__(self) -> "GradedElement":
        return GradedElement._make(self.ctx, self.variance, self.degree,
                                   {idx: -c for idx, c in self.terms.items()})

    def __sub__(self, other: "GradedElement") -> "GradedElement":
        return self + (-other)

    def scale(self, factor) -> "GradedElement":
        terms = {}
        for idx, c in self.terms.items():
            p = c * factor
            if p.terms:
                terms[idx] = p
        return GradedElement._make(self.ctx, self.variance, self.degree, terms)

    def map_coeffs(self, fn) -> "GradedElement":
        return GradedElement(self.ctx, self.variance, self.degree,
                             {idx: fn(c) for idx, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedElement):
            return NotImplemented
        if self.ctx != other.ctx or self.variance != other.variance \
                or self.degree != other.degree:
            return False
        return (self - other).is_zero

    __hash__ = None

    def as_dual(self) -> "GradedElement":
        """Reinterpret over the dual bundle (forms become multivectors)."""
        flipped = MULTIVECTOR if self.variance == FORM else FORM
        return GradedElement(self.ctx.dualized(), flipped, self.degree, dict(self.terms))

    # -- printing -------------------------------------------------------------

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        labels = self.ctx.labels(self.variance)
        parts = []
        for idx in sorted(self.terms):
            mono = "^".join(labels[i - 1] for i in idx) if idx else "1"
            parts.append(f"({self.terms[idx]})*{mono}" if idx else f"({self.terms[idx]})")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"GradedElement[{self.variance} deg {self.degree}]({self})"


# -- operations ---------------------------------------------------------------


def wedge(p: GradedElement, q: GradedElement) -> GradedElement:
    p._check_mate(q)
    degree = p.degree + q.degree
    if degree > p.ctx.rank or not p.terms or not q.terms:
        return GradedElement._make(p.ctx, p.variance, degree, {})
    out: Dict[IndexTuple, Poly] = {}
    for s, a in p.terms.items():
        for t, b in q.terms.items():
            merged = _merge_indices(s, t)
            if merged is None:
                continue
            sign, idx = merged
            coeff = a * b if sign > 0 else -(a * b)
            prev = out.get(idx)
            if prev is None:
                out[idx] = coeff
            else:
                prev = prev + coeff
                if prev.terms:
                    out[idx] = prev
                else:
                    del out[idx]
    return GradedElement._make(p.ctx, p.variance, degree, out)


def wedge_all(factors: Sequence[GradedElement], ctx: BundleContext,
              variance: str) -> GradedElement:
    result = GradedElement.scalar(ctx, Poly.one(), variance)
    for f in factors:
        result = wedge(result, f)
    return result


def _interior_deg1(a: GradedElement, p: GradedElement) -> GradedElement:
    """Contraction by a degree-1 element of the opposite variance."""
    coeffs = a.coeffs_deg1()
    out: Dict[IndexTuple, Poly] = {}
    for idx, c in p.terms.items():
        for m, i in enumerate(idx):
            weight = coeffs[i - 1]
            if weight.is_zero:
                continue
            rest = idx[:m] + idx[m + 1:]
            value = weight * c
            if m % 2:
                value = -value
            prev = out.get(rest)
            if prev is None:
                out[rest] = value
            else:
                prev = prev + value
                if prev.terms:
                    out[rest] = prev
                else:
                    del out[rest]
    return GradedElement._make(p.ctx, p.variance, p.degree - 1, out)


def _contract_index(i: int, p: GradedElement) -> GradedElement:
    """Contraction by the i-th basis element of the opposite variance."""
    out: Dict[IndexTuple, Poly] = {}
    for idx, c in p.terms.items():
        for m, j in enumerate(idx):
            if j != i:
                continue
            rest = idx[:m] + idx[m + 1:]
            out[rest] = c if m % 2 == 0 else -c
            break
    return GradedElement._make(p.ctx, p.variance, p.degree - 1, out)


def interior(a: GradedElement, p: GradedElement) -> GradedElement:
    """Iterated interior product i_a p; degree of a may not exceed that of p."""
    a._check_mate(p, same_variance=False)
    if a.degree > p.degree:
        raise ValueError(
            f"degree underflow: cannot contract degree {a.degree} into degree {p.degree}"
        )
    if a.degree == 0:
        return p.scale(a.as_poly())
    if a.degree == 1:
        return _interior_deg1(a, p)
    result = GradedElement.zero(p.ctx, p.variance, p.degree - a.degree)
    for idx, c in a.terms.items():
        cur = p
        for i in idx:
            cur = _contract_index(i, cur)
        result = result + cur.scale(c)
    return result


def interior_or_zero(a: GradedElement, p: GradedElement) -> GradedElement:
    """Interior product, truncated to zero on degree underflow."""
    if a.degree > p.degree:
        return GradedElement.zero(p.ctx, p.variance, max(p.degree - a.degree, 0))
    return interior(a, p)


def i_endomorphism(matrix: Sequence[Sequence[Poly]], omega: GradedElement) -> GradedElement:
    """Degree-zero derivation i_N on forms: sum over slots of N in one argument.

    ``matrix`` columns give N(e_a) in the basis, so row j lists the
    coefficients of N* eps_j.
    """
    if omega.variance != FORM:
        raise ValueError("i_N acts on forms")
    rank = omega.ctx.rank
    if len(matrix) != rank or any(len(row) != rank for row in matrix):
        raise ValueError("endomorphism matrix must be rank x rank")
    out = GradedElement.zero(omega.ctx, FORM, omega.degree)
    for idx, c in omega.terms.items():
        for m, i in enumerate(idx):
            row = matrix[i - 1]
            for a in range(1, rank + 1):
                coeff = row[a - 1]
                if coeff.is_zero:
                    continue
                replaced = idx[:m] + (a,) + idx[m + 1:]
                fixed = _sort_tuple(replaced)
                if fixed is None:
                    continue
                sign, key = fixed
                value = c * coeff if sign > 0 else -(c * coeff)
                out = out + GradedElement(omega.ctx, FORM, omega.degree, {key: value})
    return out


def _sort_tuple(idx: IndexTuple) -> Optional[Tuple[int, IndexTuple]]:
    """Sort an index tuple, tracking the permutation sign; None on repeats."""
    sign = 1
    items = list(idx)
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j] < items[j - 1]:
            items[j], items[j - 1] = items[j - 1], items[j]
            sign = -sign
            j -= 1
    for i in range(1, len(items)):
        if items[i] == items[i - 1]:
            return None
    return sign, tuple(items)


def evaluate(element: GradedElement, *args: GradedElement) -> Poly:
    """Full antisymmetric evaluation on degree-1 arguments, left to right."""
    if len(args) != element.degree:
        raise ValueError(
            f"degree-{element.degree} element takes {element.degree} arguments, got {len(args)}"
        )
    cur = element
    for x in args:
        if x.degree != 1:
            raise ValueError("evaluation arguments must have degree 1")
        cur = interior(x, cur)
    return cur.as_poly()


def pairing(alpha: GradedElement, x: GradedElement) -> Poly:
    """<alpha, X> for degree-1 elements of opposite variance."""
    alpha._check_mate(x, same_variance=False)
    if alpha.degree != 1 or x.degree != 1:
        raise ValueError("pairing is defined in degree 1")
    total = Poly.zero()
    for (i,), c in alpha.terms.items():
        other = x.terms.get((i,))
        if other is not None:
            total = total + c * other
    return total


class BundleMap:
    """A vector bundle map over a polynomial base map.

    ``fiber[j][a]`` is the e_target_j coefficient of the image of e_source_a;
    entries are polynomials over the source chart.
    """

    __slots__ = ("source", "target", "base", "fiber")

    def __init__(self, source: BundleContext, target: BundleContext,
                 base: PolyMap, fiber: Sequence[Sequence[Poly]]):
        if base.source_vars != source.chart or base.target_vars != target.chart:
            raise ValueError("base map charts do not match the bundle contexts")
        if len(fiber) != target.rank or any(len(row) != source.rank for row in fiber):
            raise ValueError("fiber matrix must be target-rank x source-rank")
        self.source = source
        self.target = target
        self.base = base
        self.fiber = tuple(tuple(row) for row in fiber)

    @staticmethod
    def identity(ctx: BundleContext) -> "BundleMap":
        fiber = [[Poly.one() if i == j else Poly.zero() for j in range(ctx.rank)]
                 for i in range(ctx.rank)]
        return BundleMap(ctx, ctx, PolyMap.identity(ctx.chart), fiber)

    @staticmethod
    def over_identity(ctx: BundleContext, matrix: Sequence[Sequence[Poly]],
                      target: Optional[BundleContext] = None) -> "BundleMap":
        return BundleMap(ctx, target or ctx, PolyMap.identity(ctx.chart), matrix)

    def compose(self, inner: "BundleMap") -> "BundleMap":
        """self o inner."""
        if inner.target != self.source:
            raise ValueError("bundle maps are not composable")
        fiber = [[sum((inner.base.pull(self.fiber[k][j]) * inner.fiber[j][a]
                       for j in range(self.source.rank)), Poly.zero())
                  for a in range(inner.source.rank)]
                 for k in range(self.target.rank)]
        return BundleMap(inner.source, self.target, self.base.compose(inner.base), fiber)

    def pushforward_ctx(self) -> BundleContext:
        """Target bundle read over the source chart (for images of sections)."""
        return self.target.with_chart(self.source.chart)

    def push_basis(self, a: int) -> GradedElement:
        ctx = self.pushforward_ctx()
        return GradedElement(ctx, MULTIVECTOR, 1,
                             {(j + 1,): self.fiber[j][a - 1] for j in range(self.target.rank)})

    def pull_dual_basis(self, j: int) -> GradedElement:
        return GradedElement(self.source, FORM, 1,
                             {(a + 1,): self.fiber[j - 1][a] for a in range(self.source.rank)})


def pullback(psi: BundleMap, omega: GradedElement) -> GradedElement:
    """Pull a form on the target back to the source bundle."""
    if omega.ctx != psi.target:
        raise ValueError("form does not live on the target of the bundle map")
    if omega.variance != FORM:
        raise ValueError("pullback acts on forms")
    result = GradedElement.zero(psi.source, FORM, omega.degree)
    for idx, c in omega.terms.items():
        factors = [psi.pull_dual_basis(j) for j in idx]
        term = wedge_all(factors, psi.source, FORM).scale(psi.base.pull(c))
        result = result + term
    return result


def pushforward(psi: BundleMap, p: GradedElement) -> GradedElement:
    """Push a multivector on the source into the target bundle.

    Coefficients stay over the source chart, matching the composition X o psi
    used when comparing with target-side data.
    """
    if p.ctx != psi.source:
        raise ValueError("multivector does not live on the source of the bundle map")
    if p.variance != MULTIVECTOR:
        raise ValueError("pushforward acts on multivectors")
    ctx = psi.pushforward_ctx()
    result = GradedElement.zero(ctx, MULTIVECTOR, p.degree)
    for idx, c in p.terms.items():
        factors = [psi.push_basis(a) for a in idx]
        term = wedge_all(factors, ctx, MULTIVECTOR).scale(c)
        result = result + term
    return result


def transport_to_chart(element: GradedElement, base: PolyMap) -> GradedElement:
    """Compose all coefficients with a base map (read a target object over the source)."""
    if element.ctx.chart != base.target_vars:
        raise ValueError("element chart does not match the base map target")
    ctx = element.ctx.with_chart(base.source_vars)
    return GradedElement(ctx, element.variance, element.degree,
                         {idx: base.pull(c) for idx, c in element.terms.items()})
