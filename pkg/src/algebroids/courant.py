"""Courant-Jacobi algebroids realized as doubles of quasi-Jacobi bialgebroids.

The bracket is attached to the generating bialgebroid data rather than stored
as a closure, so structures stay serializable and every check is replayable.
Two independent bracket realizations are kept: the operator formula (graded
bracket, quasi-Lie derivative, twisted differential) and the fully expanded
form used in the supported-Dirac arguments; public bracket calls cross-check
them against each other.

The standard structure E1(M), its twisted variant, and binary/n-ary products
with sign-flipped factors (needed for morphism graphs) are all constructed as
doubles, so one verification path covers everything.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .algebroid import (
    JacobiAlgebroid,
    LieAlgebroid,
    VectorField,
    generator_multivectors,
    vf_add,
    vf_apply,
    vf_commutator,
    vf_is_zero,
    vf_zero,
)
from .exterior import (
    FORM,
    MULTIVECTOR,
    BundleContext,
    GradedElement,
    interior,
    pairing,
    wedge,
)
from .quasi import (
    QuasiDualStructure,
    QuasiJacobiBialgebroid,
    encode_pair_form,
    standard_jacobi_algebroid,
    trivial_quasi_dual,
    verify_quasi_jacobi_bialgebroid,
)
from .report import CheckReport
from .ring import Poly

HALF = Fraction(1, 2)


@dataclass
class DoubleSection:
    """A section X + alpha of a double E = A + A*."""

    vec: GradedElement
    form: GradedElement

    def __post_init__(self):
        if self.vec.ctx != self.form.ctx:
            raise ValueError("the two halves must share a bundle context")
        if self.vec.variance != MULTIVECTOR or self.form.variance != FORM:
            raise ValueError("a double section is a multivector plus a form")
        if self.vec.degree != 1 or self.form.degree != 1:
            raise ValueError("double sections have degree 1 in both halves")

    @staticmethod
    def zero(ctx: BundleContext) -> "DoubleSection":
        return DoubleSection(GradedElement.zero(ctx, MULTIVECTOR, 1),
                             GradedElement.zero(ctx, FORM, 1))

    @staticmethod
    def of_vec(x: GradedElement) -> "DoubleSection":
        return DoubleSection(x, GradedElement.zero(x.ctx, FORM, 1))

    @staticmethod
    def of_form(alpha: GradedElement) -> "DoubleSection":
        return DoubleSection(GradedElement.zero(alpha.ctx, MULTIVECTOR, 1), alpha)

    def __add__(self, other: "DoubleSection") -> "DoubleSection":
        return DoubleSection(self.vec + other.vec, self.form + other.form)

    def __neg__(self) -> "DoubleSection":
        return DoubleSection(-self.vec, -self.form)

    def __sub__(self, other: "DoubleSection") -> "DoubleSection":
        return self + (-other)

    def scale(self, factor) -> "DoubleSection":
        return DoubleSection(self.vec.scale(factor), self.form.scale(factor))

    @property
    def is_zero(self) -> bool:
        return self.vec.is_zero and self.form.is_zero

    def coeff_vector(self) -> List[Poly]:
        """Length-2r coefficient vector: vec components then form components."""
        return self.vec.coeffs_deg1() + self.form.coeffs_deg1()

    def __eq__(self, other) -> bool:
        return (isinstance(other, DoubleSection)
                and self.vec == other.vec and self.form == other.form)

    def __str__(self) -> str:
        return f"({self.vec}) + ({self.form})"


@dataclass
class FactorInfo:
    """How an original factor sits inside a product double."""

    qjb: QuasiJacobiBialgebroid
    sign: int
    var_map: Dict[str, str]
    basis_offset: int


class CourantJacobiStructure:
    """Pairing, anchor into TM + R, and Dorfman-type bracket of a double."""

    def __init__(self, qjb: QuasiJacobiBialgebroid,
                 factors: Optional[List[FactorInfo]] = None,
                 presentation: str = "double"):
        self.qjb = qjb
        self.factors = factors
        self.presentation = presentation

    @property
    def ctx(self) -> BundleContext:
        return self.qjb.ctx

    @property
    def rank(self) -> int:
        return 2 * self.ctx.rank

    # -- pairing and anchor ----------------------------------------------------

    def pairing(self, e1: DoubleSection, e2: DoubleSection) -> Poly:
        return (pairing(e1.form, e2.vec) + pairing(e2.form, e1.vec)) * HALF

    def pairing_matrix(self) -> List[List[Poly]]:
        r = self.ctx.rank
        gens = self.basis_sections()
        return [[self.pairing(gens[i][1], gens[j][1]) for j in range(2 * r)]
                for i in range(2 * r)]

    def anchor(self, e: DoubleSection) -> Tuple[VectorField, Poly]:
        s = self.qjb.structure
        host = self.qjb.host
        vf = vf_add(host.base.anchor_vf(e.vec),
                    s.dual_data.anchor_vf(e.form.as_dual()))
        scalar = pairing(host.phi, e.vec) + pairing(e.form, s.w)
        return vf, scalar

    def lie_rho(self, e: DoubleSection, h: Poly) -> Poly:
        """First-order action of the anchor image (X, f): h -> X(h) + f h."""
        vf, scalar = self.anchor(e)
        return vf_apply(vf, self.ctx.chart, h) + scalar * h

    # -- the bracket -------------------------------------------------------------

    def bracket(self, e1: DoubleSection, e2: DoubleSection,
                cross_check: bool = True) -> DoubleSection:
        result = self._bracket_operator(e1, e2)
        if cross_check:
            expanded = self._bracket_expanded(e1, e2)
            if not (result - expanded).is_zero:
                raise AssertionError(
                    "the two bracket realizations disagree: "
                    f"{result - expanded}")
        return result

    def _bracket_operator(self, e1: DoubleSection, e2: DoubleSection) -> DoubleSection:
        s = self.qjb.structure
        host = self.qjb.host
        x1, a1 = e1.vec, e1.form
        x2, a2 = e2.vec, e2.form
        vec = (host.schouten_jacobi(x1, x2)
               + s.quasi_lie_derivative(a1, x2)
               - interior(a2, s.apply(x1))
               + interior(wedge(a1, a2), s.x))
        form = (s.dual_bracket1(a1, a2)
                + host.lie_derivative_phi(x1, a2)
                - interior(x2, host.phi_differential(a1)))
        return DoubleSection(vec, form)

    def _bracket_expanded(self, e1: DoubleSection, e2: DoubleSection) -> DoubleSection:
        s = self.qjb.structure
        host = self.qjb.host
        x, alpha = e1.vec, e1.form
        y, beta = e2.vec, e2.form
        phi, w = host.phi, s.w
        d = host.base.differential
        ay = pairing(alpha, y)
        bx = pairing(beta, x)
        vec = (host.base.bracket1(x, y)
               + interior(alpha, s.d_star(y))
               - interior(beta, s.d_star(x))
               + s.d_star(GradedElement.scalar(self.ctx, ay))
               + interior(wedge(alpha, beta), s.x)
               + y.scale(pairing(alpha, w))
               - x.scale(pairing(beta, w))
               + w.scale(bx))
        l_x_beta = interior(x, d(beta)) + d(GradedElement.scalar(self.ctx, bx, FORM))
        form = (s.dual_bracket1(alpha, beta)
                + l_x_beta
                - interior(y, d(alpha))
                + beta.scale(pairing(phi, x))
                - alpha.scale(pairing(phi, y))
                + phi.scale(ay))
        return DoubleSection(vec, form)

    def skew_bracket(self, e1: DoubleSection, e2: DoubleSection) -> DoubleSection:
        return (self.bracket(e1, e2) - self.bracket(e2, e1)).scale(HALF)

    # -- generators ----------------------------------------------------------------

    def basis_sections(self) -> List[Tuple[str, DoubleSection]]:
        ctx = self.ctx
        out = []
        for i, label in enumerate(ctx.basis, start=1):
            out.append((label, DoubleSection.of_vec(GradedElement.basis_vector(ctx, i))))
        for i, label in enumerate(ctx.dual, start=1):
            out.append((label, DoubleSection.of_form(GradedElement.basis_form(ctx, i))))
        return out

    def generator_sections(self) -> List[Tuple[str, DoubleSection]]:
        """Basis sections plus coordinate-scaled ones."""
        out = list(self.basis_sections())
        for name, sec in self.basis_sections():
            for v in self.ctx.chart:
                out.append((f"{v}*{name}", sec.scale(Poly.variable(v))))
        return out


def build_double(q: QuasiJacobiBialgebroid, gen_degree: int = 2,
                 presentation: str = "double") -> CourantJacobiStructure:
    """The double of a verified quasi-Jacobi bialgebroid."""
    if not q.report.entries:
        q.report = verify_quasi_jacobi_bialgebroid(q.structure, gen_degree)
    q.report.require_ok("only verified quasi-Jacobi bialgebroids have a double")
    return CourantJacobiStructure(q, presentation=presentation)


def cj_bracket(e: CourantJacobiStructure, e1: DoubleSection,
               e2: DoubleSection) -> DoubleSection:
    return e.bracket(e1, e2)


def cj_pairing_anchor(e: CourantJacobiStructure, e1: DoubleSection,
                      e2: DoubleSection):
    return e.pairing(e1, e2), e.anchor(e1)


def skew_bracket(e: CourantJacobiStructure, e1: DoubleSection,
                 e2: DoubleSection) -> DoubleSection:
    return e.skew_bracket(e1, e2)


# -- axiom verification -------------------------------------------------------------


def _triple_family(e: CourantJacobiStructure):
    """Basis triples plus triples containing exactly one scaled section."""
    basis = e.basis_sections()
    scaled = [(name, sec) for name, sec in e.generator_sections()
              if name not in dict(basis)]
    for n1, g1 in basis:
        for n2, g2 in basis:
            for n3, g3 in basis:
                yield (n1, g1), (n2, g2), (n3, g3)
    for pos in range(3):
        for ns, gs in scaled:
            for n1, g1 in basis:
                for n2, g2 in basis:
                    triple = [(n1, g1), (n2, g2)]
                    triple.insert(pos, (ns, gs))
                    yield tuple(triple)


def verify_courant_jacobi(e: CourantJacobiStructure) -> CheckReport:
    """CJ1-CJ3 and CJ'1-CJ'4 on the generator family, plus their agreement."""
    report = CheckReport()
    pairs = e.generator_sections()

    # brackets of generator pairs are shared by every axiom loop below
    bcache: Dict[Tuple[str, str], DoubleSection] = {}
    agree_ok = True
    agree_witness = None
    for n1, g1 in pairs:
        for n2, g2 in pairs:
            b = e._bracket_operator(g1, g2)
            bcache[(n1, n2)] = b
            diff = b - e._bracket_expanded(g1, g2)
            if not diff.is_zero and agree_ok:
                agree_ok = False
                agree_witness = f"({n1},{n2}): {diff}"
    report.add("BRACKET_AGREE",
               "operator and expanded bracket realizations coincide",
               agree_ok, agree_witness)

    # CJ1 / CJ'1: the Leibniz (Jacobi-type) identity for the bracket
    cj1_ok, cj1_witness = True, None
    cj2_ok, cj2_witness = True, None
    cj3_ok, cj3_witness = True, None
    for (n1, g1), (n2, g2), (n3, g3) in _triple_family(e):
        lhs = e.bracket(g1, bcache[(n2, n3)], cross_check=False)
        rhs = (e.bracket(bcache[(n1, n2)], g3, cross_check=False)
               + e.bracket(g2, bcache[(n1, n3)], cross_check=False))
        diff = lhs - rhs
        if not diff.is_zero and cj1_ok:
            cj1_ok = False
            cj1_witness = f"({n1},{n2},{n3}): {diff.vec if not diff.vec.is_zero else diff.form}"

        lie = e.lie_rho(g1, e.pairing(g2, g3))
        sym = e.pairing(g1, bcache[(n2, n3)] + bcache[(n3, n2)])
        two_sided = (e.pairing(bcache[(n1, n2)], g3)
                     + e.pairing(g2, bcache[(n1, n3)]))
        d2 = lie - sym
        d3 = lie - two_sided
        if not d2.is_zero and cj2_ok:
            cj2_ok, cj2_witness = False, f"({n1},{n2},{n3}): {d2}"
        if not d3.is_zero and cj3_ok:
            cj3_ok, cj3_witness = False, f"({n1},{n2},{n3}): {d3}"
    report.add("CJ1", "e1 o (e2 o e3) = (e1 o e2) o e3 + e2 o (e1 o e3)",
               cj1_ok, cj1_witness)
    report.add("CJ2", "Lie_rho(e1)<e2,e3> = <e1, e2 o e3 + e3 o e2>", cj2_ok, cj2_witness)
    report.add("CJ3", "Lie_rho(e1)<e2,e3> = <e1 o e2, e3> + <e2, e1 o e3>", cj3_ok, cj3_witness)

    report.add("CJp1", "CJ'1 coincides with CJ1", cj1_ok, cj1_witness)

    cjp2_ok, cjp2_witness = True, None
    cjp3_ok, cjp3_witness = True, None
    cjp4_ok, cjp4_witness = True, None
    for n1, g1 in pairs:
        vf1, f1 = e.anchor(g1)
        for n2, g2 in pairs:
            vf2, f2 = e.anchor(g2)
            vfb, fb = e.anchor(bcache[(n1, n2)])
            cvf = vf_commutator(vf1, vf2, e.ctx.chart)
            cf = (vf_apply(vf1, e.ctx.chart, f2) - vf_apply(vf2, e.ctx.chart, f1))
            residual_vf = tuple(a - b for a, b in zip(vfb, cvf))
            residual_f = fb - cf
            if (not vf_is_zero(residual_vf) or not residual_f.is_zero) and cjp2_ok:
                cjp2_ok = False
                cjp2_witness = f"({n1},{n2})"

            lhs3 = e.pairing(bcache[(n1, n2)], g2)
            rhs3 = e.pairing(g1, bcache[(n2, n2)])
            d3 = lhs3 - rhs3
            lhs4 = e.lie_rho(g1, e.pairing(g2, g2))
            d4 = lhs4 - 2 * lhs3
            if not d3.is_zero and cjp3_ok:
                cjp3_ok, cjp3_witness = False, f"({n1},{n2}): {d3}"
            if not d4.is_zero and cjp4_ok:
                cjp4_ok, cjp4_witness = False, f"({n1},{n2}): {d4}"
    report.add("CJp2", "rho(e1 o e2) = [rho(e1), rho(e2)] on TM + R", cjp2_ok, cjp2_witness)
    report.add("CJp3", "<e1 o e, e> = <e1, e o e>", cjp3_ok, cjp3_witness)
    report.add("CJp4", "Lie_rho(e1)<e,e> = 2 <e1 o e, e>", cjp4_ok, cjp4_witness)

    verdict_cj = cj1_ok and cj2_ok and cj3_ok
    verdict_cjp = cj1_ok and cjp2_ok and cjp3_ok and cjp4_ok
    report.add("AGREE", "the CJ1-CJ3 verdict matches the CJ'1-CJ'4 verdict",
               verdict_cj == verdict_cjp,
               None if verdict_cj == verdict_cjp else
               f"CJ1-3: {verdict_cj}, CJ'1-4: {verdict_cjp}")
    return report


# -- the standard structures -----------------------------------------------------------


def build_standard_e1(chart: Sequence[str],
                      omega: Optional[GradedElement] = None,
                      gen_degree: int = 2) -> CourantJacobiStructure:
    """E1(M), optionally twisted by a 2-form through the pair (d omega, omega)."""
    host_j = standard_jacobi_algebroid(chart)
    ctx = host_j.ctx
    if omega is None:
        q = QuasiJacobiBialgebroid(trivial_quasi_dual(host_j))
        return build_double(q, gen_degree, presentation="standard_e1")
    if omega.degree != 2 or any(max(idx) > ctx.rank - 1 for idx in omega.terms):
        raise ValueError("the twist must be a 2-form in the tangent directions")
    omega_lift = GradedElement(ctx, FORM, 2, dict(omega.terms))
    null_host = JacobiAlgebroid(
        LieAlgebroid.abelian(ctx.dualized()),
        GradedElement.zero(ctx.dualized(), FORM, 1))
    x = encode_pair_form(ctx, host_j.base.differential(omega_lift), omega_lift)
    structure = QuasiDualStructure(
        null_host,
        host_j.base,
        GradedElement.basis_form(ctx, ctx.rank).as_dual(),
        x.as_dual(),
    )
    q = QuasiJacobiBialgebroid(structure)
    return build_double(q, gen_degree, presentation="twisted_e1")


def standard_section(e: CourantJacobiStructure, x_coeffs: Sequence[Poly], f: Poly,
                     alpha_coeffs: Sequence[Poly], g: Poly) -> DoubleSection:
    """The section (X, f) + (alpha, g) of E1(M) in either presentation.

    In the twisted presentation the host bundle is T*M x R, so the (alpha, g)
    half is the multivector side and (X, f) the form side.
    """
    ctx = e.ctx
    n = ctx.rank - 1
    if len(x_coeffs) != n or len(alpha_coeffs) != n:
        raise ValueError("component counts must match the chart dimension")
    tangent_terms = {(i + 1,): c for i, c in enumerate(x_coeffs)}
    tangent_terms[(ctx.rank,)] = f
    cotangent_terms = {(i + 1,): c for i, c in enumerate(alpha_coeffs)}
    cotangent_terms[(ctx.rank,)] = g
    if e.presentation == "twisted_e1":
        return DoubleSection(
            GradedElement(ctx, MULTIVECTOR, 1, cotangent_terms),
            GradedElement(ctx, FORM, 1, tangent_terms))
    return DoubleSection(
        GradedElement(ctx, MULTIVECTOR, 1, tangent_terms),
        GradedElement(ctx, FORM, 1, cotangent_terms))


# -- products with sign-flipped factors --------------------------------------------------


def negate_qjb(q: QuasiJacobiBialgebroid) -> QuasiJacobiBialgebroid:
    """The double-of-(B, phi, -d-tilde, X) presentation of the pairing-negated double."""
    s = q.structure
    dd = s.dual_data
    neg_anchor = [[-p for p in row] for row in dd.anchor]
    neg_struct = {}
    r = dd.ctx.rank
    for a in range(1, r + 1):
        for b in range(a + 1, r + 1):
            neg_struct[(a, b)] = [-dd.struct[a - 1][b - 1][c] for c in range(r)]
    structure = QuasiDualStructure(
        s.host,
        LieAlgebroid(dd.ctx, neg_anchor, neg_struct),
        -s.w,
        s.x,
    )
    return QuasiJacobiBialgebroid(structure)


def _relabel_graded(el: GradedElement, ctx: BundleContext, var_map: Dict[str, str],
                    offset: int, total_rank: int) -> GradedElement:
    terms = {}
    for idx, c in el.terms.items():
        terms[tuple(i + offset for i in idx)] = c.rename(var_map)
    return GradedElement(ctx, el.variance, el.degree, terms)


def product_double(factors: Sequence[Tuple[QuasiJacobiBialgebroid, int]],
                   gen_degree: int = 2,
                   verify: bool = True) -> CourantJacobiStructure:
    """The double of the product bialgebroid, with sign-negated factors transported."""
    prepared = []
    for q, sign in factors:
        prepared.append((negate_qjb(q) if sign < 0 else q, sign))

    chart: List[str] = []
    basis: List[str] = []
    dual: List[str] = []
    infos: List[FactorInfo] = []
    var_maps = []
    for k, (q, sign) in enumerate(prepared):
        var_map = {}
        for v in q.ctx.chart:
            name = v
            if name in chart:
                name = f"{v}_{k + 1}"
            while name in chart:
                name += "'"
            var_map[v] = name
            chart.append(name)
        offset = len(basis)
        for lbl in q.ctx.basis:
            name = lbl if lbl not in basis else f"{lbl}_{k + 1}"
            while name in basis:
                name += "'"
            basis.append(name)
        for lbl in q.ctx.dual:
            name = lbl if lbl not in dual else f"{lbl}_{k + 1}"
            while name in dual:
                name += "'"
            dual.append(name)
        var_maps.append(var_map)
        infos.append(FactorInfo(factors[k][0], sign, var_map, offset))

    ctx = BundleContext(tuple(chart), tuple(basis), tuple(dual))
    total_rank = len(basis)
    n = len(chart)

    def block_algebroid(pick, target_ctx: BundleContext) -> LieAlgebroid:
        anchor = [[Poly.zero()] * n for _ in range(total_rank)]
        struct: Dict[Tuple[int, int], List[Poly]] = {}
        for k, (q, sign) in enumerate(prepared):
            data = pick(q)
            var_map = var_maps[k]
            offset = infos[k].basis_offset
            chart_positions = [chart.index(var_map[v]) for v in q.ctx.chart]
            for a in range(data.ctx.rank):
                for i, pos in enumerate(chart_positions):
                    anchor[offset + a][pos] = data.anchor[a][i].rename(var_map)
            for a in range(1, data.ctx.rank + 1):
                for b in range(a + 1, data.ctx.rank + 1):
                    coeffs = [Poly.zero()] * total_rank
                    for c in range(data.ctx.rank):
                        coeffs[offset + c] = data.struct[a - 1][b - 1][c].rename(var_map)
                    struct[(offset + a, offset + b)] = coeffs
        return LieAlgebroid(target_ctx, anchor, struct)

    host_algebroid = block_algebroid(lambda q: q.host.base, ctx)
    phi_terms = {}
    w = GradedElement.zero(ctx, MULTIVECTOR, 1)
    x = GradedElement.zero(ctx, MULTIVECTOR, 3)
    for k, (q, sign) in enumerate(prepared):
        offset = infos[k].basis_offset
        var_map = var_maps[k]
        for idx, c in q.host.phi.terms.items():
            phi_terms[(idx[0] + offset,)] = c.rename(var_map)
        w = w + _relabel_graded(q.structure.w, ctx, var_map, offset, total_rank)
        x = x + _relabel_graded(q.structure.x, ctx, var_map, offset, total_rank)
    host = JacobiAlgebroid(host_algebroid, GradedElement(ctx, FORM, 1, phi_terms))

    dual_data = block_algebroid(lambda q: q.structure.dual_data, ctx.dualized())

    structure = QuasiDualStructure(host, dual_data, w, x)
    q_total = QuasiJacobiBialgebroid(structure)
    if verify:
        q_total.report = verify_quasi_jacobi_bialgebroid(structure, gen_degree)
    return CourantJacobiStructure(q_total, infos, presentation="product")


def embed_section(e: CourantJacobiStructure, factor: int,
                  section: DoubleSection) -> DoubleSection:
    """Embed a factor section into a product (negated factors flip the form part)."""
    if not e.factors:
        raise ValueError("not a product structure")
    info = e.factors[factor]
    ctx = e.ctx
    total_rank = ctx.rank
    vec = _relabel_graded(section.vec, ctx, info.var_map, info.basis_offset, total_rank)
    form = _relabel_graded(section.form, ctx, info.var_map, info.basis_offset, total_rank)
    if info.sign < 0:
        form = -form
    return DoubleSection(vec, form)
