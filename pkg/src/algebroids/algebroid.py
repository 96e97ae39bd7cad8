"""Lie and Jacobi algebroid calculus over polynomial charts.

A ``LieAlgebroid`` is plain structure data: an anchor matrix and antisymmetric
structure functions on a trivialized bundle.  Nothing is assumed about the
data; ``verify_lie_algebroid`` reports whether the Jacobi identity and
anchor-bracket compatibility hold, and every operator below (differential,
Schouten bracket, deformations) is computed formally from the data, which is
exactly what the quasi-differential constructions need when the axioms fail
on purpose.

A ``JacobiAlgebroid`` adds a 1-form cocycle; the cocycle-twisted operators
(rho^phi, d^phi, the graded bracket with its degree-dependent correction
terms, the Cartan-homotopy Lie derivative) all live here, together with
bivector duals, Nijenhuis deformation/torsion, the Magri-Morosi compatibility
check and the hat construction that trades the cocycle for an extra chart
variable t with exp(t) weights.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .exterior import (
    FORM,
    MULTIVECTOR,
    BundleContext,
    BundleMap,
    GradedElement,
    evaluate,
    interior,
    interior_or_zero,
    pairing,
    pullback,
    wedge,
)
from .report import CheckReport
from .ring import Poly

VectorField = Tuple[Poly, ...]


def vf_zero(chart: Sequence[str]) -> VectorField:
    return tuple(Poly.zero() for _ in chart)


def vf_add(a: VectorField, b: VectorField) -> VectorField:
    return tuple(x + y for x, y in zip(a, b))


def vf_scale(a: VectorField, c: Poly) -> VectorField:
    return tuple(x * c for x in a)


def vf_apply(vf: VectorField, chart: Sequence[str], f: Poly) -> Poly:
    total = Poly.zero()
    for comp, var in zip(vf, chart):
        if not comp.is_zero:
            total = total + comp * f.partial(var)
    return total


def vf_commutator(a: VectorField, b: VectorField, chart: Sequence[str]) -> VectorField:
    out = []
    for i, var in enumerate(chart):
        out.append(vf_apply(a, chart, b[i]) - vf_apply(b, chart, a[i]))
    return tuple(out)


def vf_is_zero(vf: VectorField) -> bool:
    return all(c.is_zero for c in vf)


class LieAlgebroid:
    """Anchor + structure-function data on a bundle context.

    ``anchor[a][i]`` is the d/dx_i component of the image of basis section
    ``a``; ``struct[a][b][c]`` is the e_c coefficient of the bracket of basis
    sections a and b (all indices 0-based here, 1-based in GradedElement
    index tuples).
    """

    def __init__(self, ctx: BundleContext, anchor: Sequence[Sequence[Poly]],
                 struct: Dict[Tuple[int, int], Sequence[Poly]]):
        self.ctx = ctx
        r, n = ctx.rank, ctx.dim
        if len(anchor) != r or any(len(row) != n for row in anchor):
            raise ValueError("anchor must be a rank x dim matrix")
        self.anchor = tuple(tuple(row) for row in anchor)
        table = [[[Poly.zero() for _ in range(r)] for _ in range(r)] for _ in range(r)]
        for (a, b), coeffs in struct.items():
            if not (1 <= a <= r and 1 <= b <= r):
                raise ValueError(f"basis index out of range in bracket ({a},{b})")
            if a == b and any(not c.is_zero for c in coeffs):
                raise ValueError("structure functions must be antisymmetric")
            if len(coeffs) != r:
                raise ValueError("one structure function per basis label is required")
            for c in range(r):
                table[a - 1][b - 1][c] = coeffs[c]
                table[b - 1][a - 1][c] = -coeffs[c]
        self.struct = table
        self._d_dual_cache: Optional[List[GradedElement]] = None
        self._bracket_cache: Dict[Tuple[int, int], GradedElement] = {}

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def abelian(ctx: BundleContext,
                anchor: Optional[Sequence[Sequence[Poly]]] = None) -> "LieAlgebroid":
        if anchor is None:
            anchor = [[Poly.zero()] * ctx.dim for _ in range(ctx.rank)]
        return LieAlgebroid(ctx, anchor, {})

    @staticmethod
    def tangent_times_line(chart: Sequence[str]) -> "LieAlgebroid":
        """(TM x R, zero brackets): basis d/dx_1 .. d/dx_n, e0 with zero anchor."""
        chart = tuple(chart)
        n = len(chart)
        basis = tuple(f"e{i}" for i in range(1, n + 1)) + ("e0",)
        ctx = BundleContext.make(chart, basis)
        anchor = [[Poly.one() if j == i else Poly.zero() for j in range(n)]
                  for i in range(n)]
        anchor.append([Poly.zero()] * n)
        return LieAlgebroid(ctx, anchor, {})

    # -- basic operators ------------------------------------------------------

    def basis_vector(self, a: int) -> GradedElement:
        return GradedElement.basis_vector(self.ctx, a)

    def basis_form(self, a: int) -> GradedElement:
        return GradedElement.basis_form(self.ctx, a)

    def anchor_vf(self, x: GradedElement) -> VectorField:
        coeffs = x.coeffs_deg1()
        out = vf_zero(self.ctx.chart)
        for a, c in enumerate(coeffs):
            if not c.is_zero:
                out = vf_add(out, vf_scale(self.anchor[a], c))
        return out

    def rho(self, x: GradedElement, f: Poly) -> Poly:
        return vf_apply(self.anchor_vf(x), self.ctx.chart, f)

    def bracket_basis(self, a: int, b: int) -> GradedElement:
        cached = self._bracket_cache.get((a, b))
        if cached is None:
            cached = GradedElement.section(
                self.ctx, MULTIVECTOR,
                [self.struct[a - 1][b - 1][c] for c in range(self.ctx.rank)])
            self._bracket_cache[(a, b)] = cached
        return cached

    def bracket1(self, x: GradedElement, y: GradedElement) -> GradedElement:
        """Bracket of two degree-1 sections with Poly coefficients."""
        xc = x.coeffs_deg1()
        yc = y.coeffs_deg1()
        r = self.ctx.rank
        out = GradedElement.zero(self.ctx, MULTIVECTOR, 1)
        for a in range(r):
            if xc[a].is_zero:
                continue
            for b in range(r):
                if yc[b].is_zero:
                    continue
                term = self.bracket_basis(a + 1, b + 1).scale(xc[a] * yc[b])
                out = out + term
        rx = self.anchor_vf(x)
        ry = self.anchor_vf(y)
        derived = [vf_apply(rx, self.ctx.chart, yc[b]) - vf_apply(ry, self.ctx.chart, xc[b])
                   for b in range(r)]
        return out + GradedElement.section(self.ctx, MULTIVECTOR, derived)

    # -- differential ----------------------------------------------------------

    def d_function(self, f: Poly) -> GradedElement:
        return GradedElement.section(
            self.ctx, FORM,
            [vf_apply(self.anchor[a], self.ctx.chart, f) for a in range(self.ctx.rank)])

    def _d_dual_basis(self) -> List[GradedElement]:
        if self._d_dual_cache is None:
            r = self.ctx.rank
            cache = []
            for c in range(r):
                terms = {}
                for a in range(r):
                    for b in range(a + 1, r):
                        coeff = -self.struct[a][b][c]
                        if not coeff.is_zero:
                            terms[(a + 1, b + 1)] = coeff
                cache.append(GradedElement(self.ctx, FORM, 2, terms))
            self._d_dual_cache = cache
        return self._d_dual_cache

    def differential(self, omega: GradedElement) -> GradedElement:
        """The structural Cartan-type differential; d^2 = 0 iff the data is Lie."""
        if omega.ctx != self.ctx:
            raise ValueError("form lives on a different bundle context")
        if omega.variance != FORM:
            raise ValueError("the differential acts on forms")
        if omega.degree == 0:
            return self.d_function(omega.as_poly())
        d_eps = self._d_dual_basis()
        out = GradedElement.zero(self.ctx, FORM, omega.degree + 1)
        one = Poly.one()
        for idx, coeff in omega.terms.items():
            base = GradedElement._make(self.ctx, FORM, omega.degree, {idx: one})
            out = out + wedge(self.d_function(coeff), base)
            for m, i in enumerate(idx):
                if d_eps[i - 1].is_zero:
                    continue
                front = GradedElement._make(self.ctx, FORM, m, {idx[:m]: one})
                back = GradedElement._make(self.ctx, FORM, omega.degree - m - 1,
                                           {idx[m + 1:]: one})
                piece = wedge(wedge(front, d_eps[i - 1]), back).scale(coeff)
                if m % 2:
                    piece = -piece
                out = out + piece
        return out

    # -- Schouten bracket -------------------------------------------------------

    def schouten(self, p: GradedElement, q: GradedElement) -> GradedElement:
        """Schouten bracket by structural recursion on the biderivation laws."""
        if p.ctx != self.ctx or q.ctx != self.ctx:
            raise ValueError("multivectors live on a different bundle context")
        if p.variance != MULTIVECTOR or q.variance != MULTIVECTOR:
            raise ValueError("the Schouten bracket acts on multivectors")
        return self._schouten(p, q)

    def _schouten(self, p: GradedElement, q: GradedElement) -> GradedElement:
        dp, dq = p.degree, q.degree
        target = max(dp + dq - 1, 0)
        if p.is_zero or q.is_zero:
            return GradedElement.zero(self.ctx, MULTIVECTOR, target)
        if dp == 0 and dq == 0:
            return GradedElement.zero(self.ctx, MULTIVECTOR, 0)
        if dp == 1 and dq == 0:
            return GradedElement.scalar(self.ctx, self.rho(p, q.as_poly()))
        if dp == 0 and dq == 1:
            return -self._schouten(q, p)
        if dp == 1 and dq == 1:
            return self.bracket1(p, q)
        if dq >= 2:
            # [P, Y ^ Q'] = [P, Y] ^ Q' + (-1)^(dp - 1) Y ^ [P, Q']
            out = GradedElement.zero(self.ctx, MULTIVECTOR, target)
            for idx, coeff in q.terms.items():
                lead = GradedElement._make(self.ctx, MULTIVECTOR, 1, {(idx[0],): coeff})
                rest = GradedElement._make(self.ctx, MULTIVECTOR, dq - 1,
                                           {idx[1:]: Poly.one()})
                first = wedge(self._schouten(p, lead), rest)
                second = wedge(lead, self._schouten(p, rest))
                if (dp - 1) % 2:
                    second = -second
                out = out + first + second
            return out
        # dp >= 2, dq <= 1: graded skew symmetry
        swapped = self._schouten(q, p)
        if ((dp - 1) * (dq - 1)) % 2 == 0:
            swapped = -swapped
        return swapped


class JacobiAlgebroid:
    """A Lie algebroid together with a 1-form cocycle."""

    def __init__(self, base: LieAlgebroid, phi: GradedElement):
        if phi.ctx != base.ctx or phi.variance != FORM or phi.degree != 1:
            raise ValueError("the cocycle must be a 1-form on the algebroid's bundle")
        self.base = base
        self.phi = phi

    @property
    def ctx(self) -> BundleContext:
        return self.base.ctx

    def verify(self, prefix: str = "jacobi") -> CheckReport:
        report = CheckReport()
        report.merge(verify_lie_algebroid(self.base), prefix)
        report.check_zero(f"{prefix}.cocycle", "d(phi) = 0",
                          self.base.differential(self.phi))
        return report

    # -- twisted operators -----------------------------------------------------

    def rho_phi(self, x: GradedElement, f: Poly) -> Poly:
        return self.base.rho(x, f) + f * pairing(self.phi, x)

    def phi_differential(self, omega: GradedElement) -> GradedElement:
        return self.base.differential(omega) + wedge(self.phi, omega)

    def schouten_jacobi(self, p: GradedElement, q: GradedElement) -> GradedElement:
        """The cocycle-corrected graded bracket, extended to degrees >= 0."""
        dp, dq = p.degree, q.degree
        out = self.base.schouten(p, q)
        if dq >= 1 and dp != 1:
            out = out + wedge(p, interior(self.phi, q)).scale(Fraction(dp - 1))
        if dp >= 1 and dq != 1:
            sign = Fraction(dq - 1) if (dp - 1) % 2 else Fraction(-(dq - 1))
            out = out + wedge(interior(self.phi, p), q).scale(sign)
        return out

    def lie_derivative_phi(self, x: GradedElement, omega: GradedElement) -> GradedElement:
        """Cartan homotopy formula with the phi-differential."""
        if x.degree != 1:
            raise ValueError("the Lie derivative differentiates along degree-1 sections")
        part1 = interior(x, self.phi_differential(omega))
        if omega.degree >= 1:
            part2 = self.phi_differential(interior(x, omega))
        else:
            part2 = GradedElement.zero(self.ctx, FORM, omega.degree)
        return part1 + part2


# -- verification ---------------------------------------------------------------


def verify_lie_algebroid(a: LieAlgebroid) -> CheckReport:
    """Jacobi identity and anchor compatibility on basis pairs and triples."""
    report = CheckReport()
    r = a.ctx.rank
    labels = a.ctx.basis
    for i in range(1, r + 1):
        for j in range(i + 1, r + 1):
            lhs = a.anchor_vf(a.bracket_basis(i, j))
            rhs = vf_commutator(a.anchor[i - 1], a.anchor[j - 1], a.ctx.chart)
            residual = tuple(x - y for x, y in zip(lhs, rhs))
            report.add(
                f"anchor({labels[i-1]},{labels[j-1]})",
                "anchor of bracket equals commutator of anchors",
                vf_is_zero(residual),
                None if vf_is_zero(residual)
                else str(next(c for c in residual if not c.is_zero)))
    for i in range(1, r + 1):
        for j in range(i + 1, r + 1):
            for k in range(j + 1, r + 1):
                ei, ej, ek = (a.basis_vector(m) for m in (i, j, k))
                jac = (a.bracket1(a.bracket_basis(i, j), ek)
                       + a.bracket1(a.bracket_basis(j, k), ei)
                       + a.bracket1(a.bracket_basis(k, i), ej))
                report.check_zero(
                    f"jacobi({labels[i-1]},{labels[j-1]},{labels[k-1]})",
                    "Jacobi identity on basis sections", jac)
    if not report.entries:
        report.add("vacuous", "rank too small for nontrivial identities", True)
    return report


# -- endomorphisms, deformation, torsion -----------------------------------------


class EndomorphismField:
    """A fiberwise endomorphism; column a of the matrix gives N(e_a)."""

    def __init__(self, ctx: BundleContext, matrix: Sequence[Sequence[Poly]]):
        r = ctx.rank
        if len(matrix) != r or any(len(row) != r for row in matrix):
            raise ValueError("endomorphism matrix must be rank x rank")
        self.ctx = ctx
        self.matrix = tuple(tuple(row) for row in matrix)

    @staticmethod
    def identity(ctx: BundleContext) -> "EndomorphismField":
        return EndomorphismField(ctx, [[Poly.one() if i == j else Poly.zero()
                                        for j in range(ctx.rank)]
                                       for i in range(ctx.rank)])

    def apply(self, x: GradedElement) -> GradedElement:
        """N X for a degree-1 multivector."""
        if x.variance != MULTIVECTOR or x.degree != 1:
            raise ValueError("endomorphisms act on degree-1 multivectors")
        coeffs = x.coeffs_deg1()
        r = self.ctx.rank
        out = [Poly.zero()] * r
        for a in range(r):
            if coeffs[a].is_zero:
                continue
            for b in range(r):
                out[b] = out[b] + self.matrix[b][a] * coeffs[a]
        return GradedElement.section(x.ctx, MULTIVECTOR, out)

    def transpose_matrix(self) -> Tuple[Tuple[Poly, ...], ...]:
        r = self.ctx.rank
        return tuple(tuple(self.matrix[j][i] for j in range(r)) for i in range(r))

    def dual(self) -> "EndomorphismField":
        """N* on the dual bundle."""
        return EndomorphismField(self.ctx.dualized(), self.transpose_matrix())

    def pull_form(self, alpha: GradedElement) -> GradedElement:
        """N* alpha for a 1-form (row i of the matrix gives N* eps_i)."""
        if alpha.variance != FORM or alpha.degree != 1:
            raise ValueError("only 1-forms are pulled through N*")
        coeffs = alpha.coeffs_deg1()
        r = self.ctx.rank
        out = [Poly.zero()] * r
        for i in range(r):
            if coeffs[i].is_zero:
                continue
            for a in range(r):
                out[a] = out[a] + self.matrix[i][a] * coeffs[i]
        return GradedElement.section(alpha.ctx, FORM, out)

    def as_bundle_map(self) -> BundleMap:
        return BundleMap.over_identity(self.ctx, self.matrix)


def deformed_bracket(a: LieAlgebroid, n: EndomorphismField,
                     x: GradedElement, y: GradedElement) -> GradedElement:
    """[X, Y]_N = [NX, Y] + [X, NY] - N[X, Y]."""
    return (a.bracket1(n.apply(x), y)
            + a.bracket1(x, n.apply(y))
            - n.apply(a.bracket1(x, y)))


def torsion_of(a: LieAlgebroid, n: EndomorphismField,
               x: GradedElement, y: GradedElement) -> GradedElement:
    """T_N(X, Y) = [NX, NY] - N [X, Y]_N."""
    return a.bracket1(n.apply(x), n.apply(y)) - n.apply(deformed_bracket(a, n, x, y))


def torsion(a: LieAlgebroid, n: EndomorphismField):
    """Torsion table on basis pairs, plus the tensoriality side-condition report."""
    r = a.ctx.rank
    table: Dict[Tuple[int, int], GradedElement] = {}
    for i in range(1, r + 1):
        for j in range(1, r + 1):
            table[(i, j)] = torsion_of(a, n, a.basis_vector(i), a.basis_vector(j))
    report = CheckReport()
    labels = a.ctx.basis
    for i in range(1, r + 1):
        for j in range(1, r + 1):
            if i == j:
                continue
            for var in a.ctx.chart:
                f = Poly.variable(var)
                scaled = torsion_of(a, n, a.basis_vector(i).scale(f), a.basis_vector(j))
                report.check_zero(
                    f"tensorial({var}*{labels[i-1]},{labels[j-1]})",
                    "torsion is function-linear in its first slot",
                    scaled - table[(i, j)].scale(f))
    if not report.entries:
        report.add("tensorial.vacuous", "no chart variables to scale by", True)
    return table, report


def torsion_is_zero(a: LieAlgebroid, n: EndomorphismField) -> bool:
    table, _ = torsion(a, n)
    return all(t.is_zero for t in table.values())


def deform_algebroid(j: JacobiAlgebroid, n: EndomorphismField):
    """The deformed data (A_N, N* phi) and whether the torsion vanishes.

    The returned structure data is always well-formed; it is a Lie algebroid
    (and N a Jacobi algebroid morphism from it) precisely when the flag is
    true.
    """
    a = j.base
    r = a.ctx.rank
    struct: Dict[Tuple[int, int], List[Poly]] = {}
    for i in range(1, r + 1):
        for k in range(i + 1, r + 1):
            bracket = deformed_bracket(a, n, a.basis_vector(i), a.basis_vector(k))
            struct[(i, k)] = bracket.coeffs_deg1()
    anchor = []
    for i in range(1, r + 1):
        anchor.append(list(a.anchor_vf(n.apply(a.basis_vector(i)))))
    deformed = LieAlgebroid(a.ctx, anchor, struct)
    phi_n = n.pull_form(j.phi)
    flag = torsion_is_zero(a, n)
    return deformed, phi_n, flag


# -- bivectors and dual structures ------------------------------------------------


def sharp(pi: GradedElement, alpha: GradedElement) -> GradedElement:
    """pi-sharp of a 1-form: i_alpha pi (the library's normative convention)."""
    return interior(alpha, pi)


def sharp_matrix(pi: GradedElement) -> List[List[Poly]]:
    """Matrix P with P[b][a] = e_b coefficient of pi-sharp(eps_a) (0-based)."""
    r = pi.ctx.rank
    mat = [[Poly.zero() for _ in range(r)] for _ in range(r)]
    for (i, j), w in pi.terms.items():
        # i_eps_i (e_i ^ e_j) = e_j ; i_eps_j (e_i ^ e_j) = -e_i
        mat[j - 1][i - 1] = mat[j - 1][i - 1] + w
        mat[i - 1][j - 1] = mat[i - 1][j - 1] - w
    return mat


def bivector_from_sharp(ctx: BundleContext, mat: Sequence[Sequence[Poly]]) -> GradedElement:
    """Recover the bivector whose sharp matrix is the antisymmetric part of mat."""
    r = ctx.rank
    terms = {}
    half = Fraction(1, 2)
    for i in range(1, r + 1):
        for j in range(i + 1, r + 1):
            coeff = (mat[j - 1][i - 1] - mat[i - 1][j - 1]) * half
            if not coeff.is_zero:
                terms[(i, j)] = coeff
    return GradedElement(ctx, MULTIVECTOR, 2, terms)


def matrix_mul(a: Sequence[Sequence[Poly]], b: Sequence[Sequence[Poly]]) -> List[List[Poly]]:
    n = len(a)
    m = len(b[0])
    k = len(b)
    return [[sum((a[i][x] * b[x][j] for x in range(k)), Poly.zero())
             for j in range(m)] for i in range(n)]


def is_jacobi_bivector(j: JacobiAlgebroid, pi: GradedElement) -> CheckReport:
    report = CheckReport()
    report.check_zero("jacobi_bivector", "[pi, pi]^phi = 0",
                      j.schouten_jacobi(pi, pi))
    return report


def dual_bracket(j: JacobiAlgebroid, pi: GradedElement,
                 alpha: GradedElement, beta: GradedElement) -> GradedElement:
    """[alpha, beta]_pi = L^phi_{pi# alpha} beta - L^phi_{pi# beta} alpha - d^phi(pi(alpha, beta))."""
    pa = sharp(pi, alpha)
    pb = sharp(pi, beta)
    value = evaluate(pi, alpha, beta)
    return (j.lie_derivative_phi(pa, beta)
            - j.lie_derivative_phi(pb, alpha)
            - j.phi_differential(GradedElement.scalar(j.ctx, value, FORM)))


def dual_structure_data(j: JacobiAlgebroid, pi: GradedElement) -> LieAlgebroid:
    """The candidate Lie algebroid on A* induced by a bivector (no Jacobi gate)."""
    ctx = j.ctx
    r = ctx.rank
    p = sharp_matrix(pi)
    anchor = []
    for a in range(r):
        row = [Poly.zero()] * ctx.dim
        for b in range(r):
            if not p[b][a].is_zero:
                for i in range(ctx.dim):
                    row[i] = row[i] + p[b][a] * j.base.anchor[b][i]
        anchor.append(row)
    struct: Dict[Tuple[int, int], List[Poly]] = {}
    for a in range(1, r + 1):
        for b in range(a + 1, r + 1):
            bracket = dual_bracket(j, pi, j.base.basis_form(a), j.base.basis_form(b))
            struct[(a, b)] = bracket.coeffs_deg1()
    return LieAlgebroid(ctx.dualized(), anchor, struct)


def dual_structure(j: JacobiAlgebroid, pi: GradedElement) -> LieAlgebroid:
    """A*_pi; rejects bivectors that are not Jacobi."""
    is_jacobi_bivector(j, pi).require_ok("dual structure needs a Jacobi bivector")
    return dual_structure_data(j, pi)


def compat_and_concomitant(j: JacobiAlgebroid, pi: GradedElement,
                           n: EndomorphismField) -> CheckReport:
    """N pi# = pi# N* plus the vanishing of the Magri-Morosi concomitant."""
    is_jacobi_bivector(j, pi).require_ok("compatibility check needs a Jacobi bivector")
    report = CheckReport()
    r = j.ctx.rank
    p = sharp_matrix(pi)
    left = matrix_mul(n.matrix, p)
    right = matrix_mul(p, n.transpose_matrix())
    ok = True
    witness = None
    for a in range(r):
        for b in range(r):
            diff = left[a][b] - right[a][b]
            if not diff.is_zero and ok:
                ok = False
                witness = f"entry ({a + 1},{b + 1}): {diff}"
    report.add("sharp_compat", "N pi# = pi# N*", ok, witness)

    n_pi = bivector_from_sharp(j.ctx, left)
    dual = dual_structure_data(j, pi)
    n_dual = EndomorphismField(dual.ctx, n.transpose_matrix())
    duals = j.ctx.dual
    for a in range(1, r + 1):
        for b in range(a + 1, r + 1):
            alpha = j.base.basis_form(a)
            beta = j.base.basis_form(b)
            first = dual_bracket(j, n_pi, alpha, beta)
            second = deformed_bracket(dual, n_dual,
                                      alpha.as_dual(), beta.as_dual())
            report.check_zero(
                f"concomitant({duals[a-1]},{duals[b-1]})",
                "Magri-Morosi concomitant vanishes",
                first - second.as_dual())
    return report


# -- the hat construction ----------------------------------------------------------


def poissonize(j: JacobiAlgebroid) -> LieAlgebroid:
    """The algebroid over chart + (t,) trading the cocycle for a d/dt component."""
    ctx = j.ctx
    if "t" in ctx.chart:
        raise ValueError("the chart already contains t")
    hat_ctx = BundleContext(ctx.chart + ("t",), ctx.basis, ctx.dual)
    phi_coeffs = j.phi.coeffs_deg1()
    anchor = [list(j.base.anchor[a]) + [phi_coeffs[a]] for a in range(ctx.rank)]
    struct: Dict[Tuple[int, int], List[Poly]] = {}
    for a in range(1, ctx.rank + 1):
        for b in range(a + 1, ctx.rank + 1):
            struct[(a, b)] = [j.base.struct[a - 1][b - 1][c] for c in range(ctx.rank)]
    return LieAlgebroid(hat_ctx, anchor, struct)


def lift_to_hat(element: GradedElement, hat: LieAlgebroid) -> GradedElement:
    """Read a time-independent element over the extended chart."""
    return GradedElement(hat.ctx, element.variance, element.degree,
                         dict(element.terms))


def exp_weight(element: GradedElement, k: int) -> GradedElement:
    """Multiply all coefficients by exp(k t)."""
    return element.scale(Poly.u_power(k))


# -- morphisms ----------------------------------------------------------------------


def jacobi_morphism_check(psi: BundleMap, source: JacobiAlgebroid,
                          target: JacobiAlgebroid) -> CheckReport:
    """Prop-style check: Lie algebroid chain map plus cocycle pullback."""
    if psi.source != source.ctx or psi.target != target.ctx:
        raise ValueError("bundle map does not connect the two algebroids")
    report = CheckReport()
    for var in target.ctx.chart:
        f = Poly.variable(var)
        lhs = pullback(psi, target.base.d_function(f))
        rhs = source.base.d_function(psi.base.pull(f))
        report.check_zero(f"chain({var})", "pullback commutes with d on coordinates",
                          lhs - rhs)
    for idx, label in enumerate(target.ctx.dual, start=1):
        eps = target.base.basis_form(idx)
        lhs = pullback(psi, target.base.differential(eps))
        rhs = source.base.differential(pullback(psi, eps))
        report.check_zero(f"chain({label})", "pullback commutes with d on dual basis",
                          lhs - rhs)
    report.check_zero("cocycle", "pullback of the target cocycle is the source cocycle",
                      pullback(psi, target.phi) - source.phi)
    return report


def phi_chain_map_check(psi: BundleMap, source: JacobiAlgebroid,
                        target: JacobiAlgebroid) -> CheckReport:
    """Direct chain-map check for the cocycle-twisted differentials."""
    if psi.source != source.ctx or psi.target != target.ctx:
        raise ValueError("bundle map does not connect the two algebroids")
    report = CheckReport()
    generators = [("1", GradedElement.scalar(target.ctx, Poly.one(), FORM))]
    generators += [(v, GradedElement.scalar(target.ctx, Poly.variable(v), FORM))
                   for v in target.ctx.chart]
    generators += [(label, target.base.basis_form(i))
                   for i, label in enumerate(target.ctx.dual, start=1)]
    for name, omega in generators:
        lhs = pullback(psi, target.phi_differential(omega))
        rhs = source.phi_differential(pullback(psi, omega))
        report.check_zero(f"phi_chain({name})",
                          "pullback commutes with the phi-differential", lhs - rhs)
    return report


# -- generator families --------------------------------------------------------------


def generator_multivectors(ctx: BundleContext, gen_degree: int = 2) -> List[Tuple[str, GradedElement]]:
    """The named family on which operator identities are checked exactly."""
    out: List[Tuple[str, GradedElement]] = []
    out.append(("1", GradedElement.scalar(ctx, Poly.one())))
    for v in ctx.chart:
        out.append((v, GradedElement.scalar(ctx, Poly.variable(v))))
    for i, label in enumerate(ctx.basis, start=1):
        out.append((label, GradedElement.basis_vector(ctx, i)))
        for v in ctx.chart:
            out.append((f"{v}*{label}",
                        GradedElement.basis_vector(ctx, i).scale(Poly.variable(v))))
    if gen_degree >= 2:
        for i in range(1, ctx.rank + 1):
            for k in range(i + 1, ctx.rank + 1):
                base = GradedElement(ctx, MULTIVECTOR, 2, {(i, k): Poly.one()})
                name = f"{ctx.basis[i-1]}^{ctx.basis[k-1]}"
                out.append((name, base))
                for v in ctx.chart:
                    out.append((f"{v}*{name}", base.scale(Poly.variable(v))))
    return out


def generator_forms(ctx: BundleContext, gen_degree: int = 2) -> List[Tuple[str, GradedElement]]:
    duals = [(name, el.as_dual()) for name, el in
             generator_multivectors(ctx.dualized(), gen_degree)]
    return duals
