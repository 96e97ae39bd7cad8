"""Dirac structures supported on submanifolds and Courant-Jacobi morphisms.

Submanifolds are graph-type coordinate substitutions, so reduction modulo the
support is plain polynomial substitution and every membership question becomes
exact linear algebra over the polynomial ring: frames come with complements
certifying constant-determinant invertibility, and decompositions are solved
by Cramer's rule (fraction-free Bareiss determinants, exact division).

The morphism constructions (graphs of quasi-Jacobi bialgebroid morphisms, the
standard map between the E1 structures, the diagonal, and the graph of the
dual quasi-Nijenhuis map) all produce supported subbundles of sign-twisted
product doubles and are checked by one D1-D3 routine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .algebroid import vf_apply
from .courant import (
    CourantJacobiStructure,
    DoubleSection,
    FactorInfo,
    embed_section,
    product_double,
)
from .exterior import (
    FORM,
    MULTIVECTOR,
    BundleContext,
    BundleMap,
    GradedElement,
    pairing,
    pullback,
    wedge,
)
from .quasi import QuasiJacobiBialgebroid, verify_qjb_morphism
from .report import CheckReport
from .ring import Poly, PolyMap

# -- exact linear algebra -------------------------------------------------------


def det_bareiss(matrix: Sequence[Sequence[Poly]]) -> Poly:
    """Fraction-free determinant; all intermediate divisions are exact."""
    n = len(matrix)
    if n == 0:
        return Poly.one()
    m = [[p for p in row] for row in matrix]
    sign = 1
    prev = Poly.one()
    for k in range(n - 1):
        if m[k][k].is_zero:
            pivot_row = next((i for i in range(k + 1, n) if not m[i][k].is_zero), None)
            if pivot_row is None:
                return Poly.zero()
            m[k], m[pivot_row] = m[pivot_row], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[k][k] * m[i][j] - m[i][k] * m[k][j]).divexact(prev)
            m[i][k] = Poly.zero()
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return det if sign > 0 else -det


def matrix_rank(matrix: Sequence[Sequence[Poly]]) -> int:
    """Rank over the fraction field (exact, via fraction-free elimination)."""
    if not matrix:
        return 0
    m = [[p for p in row] for row in matrix]
    rows, cols = len(m), len(m[0])
    rank = 0
    prev = Poly.one()
    row = 0
    for col in range(cols):
        pivot = next((i for i in range(row, rows) if not m[i][col].is_zero), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        for i in range(row + 1, rows):
            for j in range(col + 1, cols):
                m[i][j] = (m[row][col] * m[i][j] - m[i][col] * m[row][j]).divexact(prev)
            m[i][col] = Poly.zero()
        prev = m[row][col]
        rank += 1
        row += 1
        if row == rows:
            break
    return rank


def solve_constant_det(matrix: Sequence[Sequence[Poly]], rhs: Sequence[Poly],
                       det: Optional[Poly] = None) -> List[Poly]:
    """Solve A c = b by Cramer's rule; the determinant must be a nonzero constant."""
    n = len(matrix)
    if det is None:
        det = det_bareiss(matrix)
    value = det.constant_value()
    if value == 0:
        raise ValueError("the frame matrix is singular over the support")
    inv = Fraction(1) / value
    out = []
    for i in range(n):
        replaced = [[matrix[r][c] if c != i else rhs[r] for c in range(n)]
                    for r in range(n)]
        out.append(det_bareiss(replaced) * inv)
    return out


def kernel_basis(matrix: Sequence[Sequence[Poly]]) -> List[List[Poly]]:
    """A polynomial basis of the kernel, built from maximal minors.

    Rows must be independent over the support (rank = row count); the result
    has one vector per non-pivot column, with entries given by k x k minors.
    """
    rows = len(matrix)
    if rows == 0:
        return []
    cols = len(matrix[0])
    pivots: List[int] = []
    for c in range(cols):
        candidate = pivots + [c]
        sub = [[matrix[r][cc] for cc in candidate] for r in range(rows)]
        if matrix_rank(sub) == len(candidate):
            pivots.append(c)
        if len(pivots) == rows:
            break
    if len(pivots) < rows:
        raise ValueError("frame rows are dependent over the support")
    pivot_det = det_bareiss([[matrix[r][c] for c in pivots] for r in range(rows)])
    basis = []
    for f in range(cols):
        if f in pivots:
            continue
        vec = [Poly.zero()] * cols
        vec[f] = pivot_det
        for pos, p in enumerate(pivots):
            cols_replaced = list(pivots)
            cols_replaced[pos] = f
            minor = det_bareiss([[matrix[r][c] for c in cols_replaced]
                                 for r in range(rows)])
            vec[p] = -minor
        basis.append(_normalize_vector(vec))
    return basis


def _normalize_vector(vec: List[Poly]) -> List[Poly]:
    """Divide by the rational content and fix the sign deterministically."""
    coeffs = [c for p in vec for c in p.terms.values()]
    if not coeffs:
        return vec
    from math import gcd

    num = 0
    den = 1
    for c in coeffs:
        num = gcd(num, abs(c.numerator))
        den = den * c.denominator // gcd(den, c.denominator)
    content = Fraction(num, den) if num else Fraction(1)
    lead = None
    for p in vec:
        if not p.is_zero:
            lead = p._leading()[1]
            break
    if lead is not None and lead < 0:
        content = -content
    return [p * (Fraction(1) / content) for p in vec]


# -- submanifolds and supported subbundles -------------------------------------------


@dataclass
class Submanifold:
    """A graph-type submanifold: constrained coordinates with substitution rules."""

    chart: Tuple[str, ...]
    rules: Dict[str, Poly]

    def __post_init__(self):
        free = set(self.chart) - set(self.rules)
        for v, p in self.rules.items():
            if v not in self.chart:
                raise ValueError(f"{v} is not a chart coordinate")
            if not set(p.vars) <= free:
                raise ValueError(f"rule for {v} must only use free coordinates")

    @staticmethod
    def whole(chart: Sequence[str]) -> "Submanifold":
        return Submanifold(tuple(chart), {})

    def restrict(self, p: Poly) -> Poly:
        return p.substitute(self.rules) if self.rules else p

    def restrict_section(self, s: DoubleSection) -> List[Poly]:
        return [self.restrict(c) for c in s.coeff_vector()]

    def vanishing(self) -> List[Poly]:
        """Generators of the ideal of the support: x_j - p_j."""
        return [Poly.variable(v) - p for v, p in sorted(self.rules.items())]

    def tangency_residuals(self, vf: Sequence[Poly]) -> List[Poly]:
        """Components of a vector field transverse to the support, restricted."""
        out = []
        chart = self.chart
        for v, p in sorted(self.rules.items()):
            j = chart.index(v)
            residual = vf[j] - vf_apply(tuple(vf), chart, p)
            out.append(self.restrict(residual))
        return out


@dataclass
class SupportedSubbundle:
    host: CourantJacobiStructure
    support: Submanifold
    frame: List[DoubleSection]
    complement: List[DoubleSection]

    def __post_init__(self):
        if self.support.chart != self.host.ctx.chart:
            raise ValueError("the support lives on a different chart")
        if len(self.frame) + len(self.complement) != self.host.rank:
            raise ValueError("frame plus complement must fill the whole bundle")

    def full_matrix(self) -> List[List[Poly]]:
        return [self.support.restrict_section(s) for s in self.frame + self.complement]


def orthogonal_complement(e: CourantJacobiStructure, frame: Sequence[DoubleSection],
                          support: Submanifold) -> List[DoubleSection]:
    """Sections orthogonal to a frame over the support, from exact kernels."""
    gram_rows = []
    basis = [sec for _, sec in e.basis_sections()]
    for s in frame:
        row = [support.restrict(e.pairing(s, b)) for b in basis]
        gram_rows.append(row)
    vectors = kernel_basis(gram_rows)
    out = []
    ctx = e.ctx
    r = ctx.rank
    for vec in vectors:
        vec_el = GradedElement.section(ctx, MULTIVECTOR, vec[:r])
        form_el = GradedElement.section(ctx, FORM, vec[r:])
        out.append(DoubleSection(vec_el, form_el))
    return out


def verify_dirac_supported(e: CourantJacobiStructure, f: SupportedSubbundle,
                           probes: bool = True) -> CheckReport:
    """D1 (maximal isotropy), D2 (anchor tangency), D3 (bracket closure)."""
    report = CheckReport()
    support = f.support
    r = e.ctx.rank

    full = f.full_matrix()
    det = det_bareiss(full)
    certified = det.is_constant() and not det.is_zero
    report.add("frame", "frame plus complement is invertible with constant determinant",
               certified, None if certified else f"det = {det}")
    if not certified:
        return report

    d1_ok, d1_witness = True, None
    if len(f.frame) != r:
        d1_ok, d1_witness = False, f"rank {len(f.frame)} instead of {r}"
    else:
        for i, s in enumerate(f.frame):
            for j, t in enumerate(f.frame):
                value = support.restrict(e.pairing(s, t))
                if not value.is_zero and d1_ok:
                    d1_ok = False
                    d1_witness = f"<frame {i + 1}, frame {j + 1}> = {value}"
    report.add("D1", "the subbundle is maximal isotropic over the support",
               d1_ok, d1_witness)

    d2_ok, d2_witness = True, None
    for i, s in enumerate(f.frame):
        vf, _ = e.anchor(s)
        residuals = support.tangency_residuals([support.restrict(c) for c in vf])
        for res in residuals:
            if not res.is_zero and d2_ok:
                d2_ok = False
                d2_witness = f"frame {i + 1}: transverse component {res}"
    report.add("D2", "anchor images stay tangent to the support (times R)",
               d2_ok, d2_witness)

    d3_ok, d3_witness = _closure_check(e, f, full, det)
    report.add("D3", "brackets of frame extensions restrict into the subbundle",
               d3_ok, d3_witness)

    if probes and d1_ok and d2_ok:
        vanishing = support.vanishing()
        probe_ok, probe_witness = True, None
        if vanishing:
            v = vanishing[0]
            for i in range(len(f.frame)):
                perturbed = list(f.frame)
                perturbed[i] = perturbed[i] + f.complement[i % len(f.complement)].scale(v)
                fp = SupportedSubbundle(e, support, perturbed, f.complement)
                fullp = fp.full_matrix()
                detp = det_bareiss(fullp)
                if not (detp.is_constant() and not detp.is_zero):
                    continue
                ok_p, wit_p = _closure_check(e, fp, fullp, detp)
                if ok_p != d3_ok and probe_ok:
                    probe_ok = False
                    probe_witness = f"probe on frame {i + 1}: {wit_p or 'verdict flipped'}"
        report.add("D3_probe", "the closure verdict is stable under extension probes",
                   probe_ok, probe_witness)
    return report


def _closure_check(e: CourantJacobiStructure, f: SupportedSubbundle,
                   full: List[List[Poly]], det: Poly):
    """Solve each restricted bracket in the full frame; complement parts must vanish."""
    k = len(f.frame)
    matrix_t = [[full[c][r] for c in range(len(full))] for r in range(len(full[0]))]
    ok, witness = True, None
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            bracket = e.bracket(f.frame[i], f.frame[j], cross_check=False)
            rhs = f.support.restrict_section(bracket)
            coords = solve_constant_det(matrix_t, rhs, det)
            for m in range(k, len(full)):
                if not coords[m].is_zero and ok:
                    ok = False
                    witness = (f"bracket(frame {i + 1}, frame {j + 1}) has "
                               f"complement component {coords[m]}")
    return ok, witness


# -- the split theorem -----------------------------------------------------------------


def _complete_frame(rows: List[List[Poly]], support: Submanifold,
                    dimension: int) -> List[int]:
    """Indices of standard basis vectors completing the rows to full rank."""
    completion = []
    for idx in range(dimension):
        candidate = [row[:] for row in rows]
        for c in completion:
            unit = [Poly.zero()] * dimension
            unit[c] = Poly.one()
            candidate.append(unit)
        unit = [Poly.zero()] * dimension
        unit[idx] = Poly.one()
        candidate.append(unit)
        if matrix_rank(candidate) == len(candidate):
            completion.append(idx)
        if len(rows) + len(completion) == dimension:
            break
    if len(rows) + len(completion) != dimension:
        raise ValueError("could not complete the frame over the support")
    return completion


def verify_split_theorem(e: CourantJacobiStructure, l_frame: Sequence[GradedElement],
                         support: Submanifold) -> CheckReport:
    """Conditions 1-4 for F = L + L-perp against the direct D1-D3 verdict."""
    report = CheckReport()
    qjb = e.qjb
    host = qjb.host
    s = qjb.structure
    ctx = e.ctx
    r = ctx.rank

    for el in l_frame:
        if el.ctx != ctx or el.variance != MULTIVECTOR or el.degree != 1:
            raise ValueError("the subbundle frame must consist of host sections")

    l_rows = [[support.restrict(c) for c in el.coeffs_deg1()] for el in l_frame]
    k = len(l_frame)
    if matrix_rank(l_rows) != k:
        raise ValueError("the frame drops rank over the support")

    # L-perp: the annihilator of L inside the dual bundle
    perp_vectors = kernel_basis(l_rows)
    perp_frame = [GradedElement.section(ctx, FORM, vec) for vec in perp_vectors]

    # adapted bases for exact membership tests
    l_completion = _complete_frame(l_rows, support, r)
    perp_rows = [[support.restrict(c) for c in el.coeffs_deg1()] for el in perp_frame]
    perp_completion = _complete_frame(perp_rows, support, r)

    def membership(section_coeffs: List[Poly], rows: List[List[Poly]],
                   completion: List[int]) -> Tuple[bool, Optional[Poly]]:
        matrix = [row[:] for row in rows]
        for c in completion:
            unit = [Poly.zero()] * r
            unit[c] = Poly.one()
            matrix.append(unit)
        matrix_t = [[matrix[a][b] for a in range(r)] for b in range(r)]
        det = det_bareiss(matrix_t)
        if not det.is_constant() or det.is_zero:
            return False, det
        coords = solve_constant_det(matrix_t, section_coeffs, det)
        for m in range(len(rows), r):
            if not coords[m].is_zero:
                return False, coords[m]
        return True, None

    # condition 1: L is a Lie subalgebroid (anchor tangency + bracket closure)
    c1_ok, c1_witness = True, None
    for i, el in enumerate(l_frame):
        vf = host.base.anchor_vf(el)
        for res in support.tangency_residuals([support.restrict(c) for c in vf]):
            if not res.is_zero and c1_ok:
                c1_ok, c1_witness = False, f"anchor of L section {i + 1} not tangent: {res}"
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            bracket = host.base.bracket1(l_frame[i], l_frame[j])
            coeffs = [support.restrict(c) for c in bracket.coeffs_deg1()]
            member, wit = membership(coeffs, l_rows, l_completion)
            if not member and c1_ok:
                c1_ok, c1_witness = False, f"[L {i + 1}, L {j + 1}] leaves L: {wit}"
    report.add("T1", "L is a Lie subalgebroid over the support", c1_ok, c1_witness)

    # condition 2: L-perp is closed for the dual bracket
    c2_ok, c2_witness = True, None
    for i in range(len(perp_frame)):
        for j in range(len(perp_frame)):
            if i == j:
                continue
            bracket = s.dual_bracket1(perp_frame[i], perp_frame[j])
            coeffs = [support.restrict(c) for c in bracket.coeffs_deg1()]
            member, wit = membership(coeffs, perp_rows, perp_completion)
            if not member and c2_ok:
                c2_ok, c2_witness = False, f"[perp {i + 1}, perp {j + 1}] leaves L-perp: {wit}"
    report.add("T2", "L-perp is closed for the bracket encoded by the dual data",
               c2_ok, c2_witness)

    # condition 3: the anchor keeps L-perp tangent to the support
    c3_ok, c3_witness = True, None
    for i, alpha in enumerate(perp_frame):
        vf = s.dual_data.anchor_vf(alpha.as_dual())
        for res in support.tangency_residuals([support.restrict(c) for c in vf]):
            if not res.is_zero and c3_ok:
                c3_ok, c3_witness = False, f"dual anchor of perp {i + 1} not tangent: {res}"
    report.add("T3", "the anchor of L-perp lands in TP + R", c3_ok, c3_witness)

    # condition 4: X restricted to the support lies in wedge-3 of L
    c4_ok, c4_witness = True, None
    if s.x.is_zero:
        pass
    else:
        adapted = [row[:] for row in l_rows]
        for c in l_completion:
            unit = [Poly.zero()] * r
            unit[c] = Poly.one()
            adapted.append(unit)
        matrix_t = [[adapted[a][b] for a in range(r)] for b in range(r)]
        det = det_bareiss(matrix_t)
        if not det.is_constant() or det.is_zero:
            c4_ok, c4_witness = False, "no constant-determinant adapted frame"
        else:
            x_res = GradedElement(ctx, MULTIVECTOR, 3,
                                  {idx: support.restrict(c)
                                   for idx, c in s.x.terms.items()})
            for idx in _index_triples(r):
                coeffs = [Poly.zero()] * r
                # solve e_a in the adapted frame once per basis index
                pass
            inverse_cols = []
            for a in range(r):
                unit = [Poly.zero()] * r
                unit[a] = Poly.one()
                inverse_cols.append(solve_constant_det(matrix_t, unit, det))
            transformed = _transform_trivector(x_res, inverse_cols)
            for idx, c in transformed.terms.items():
                if any(i > k for i in idx) and not c.is_zero and c4_ok:
                    c4_ok = False
                    c4_witness = f"component {idx}: {c}"
    report.add("T4", "the 3-section restricts into wedge-3 of L", c4_ok, c4_witness)

    conditions = c1_ok and c2_ok and c3_ok and c4_ok

    complement = ([DoubleSection.of_form(GradedElement.basis_form(ctx, c + 1))
                   for c in l_completion]
                  + [DoubleSection.of_vec(GradedElement.basis_vector(ctx, c + 1))
                     for c in perp_completion])
    f = SupportedSubbundle(
        e, support,
        [DoubleSection.of_vec(el) for el in l_frame]
        + [DoubleSection.of_form(el) for el in perp_frame],
        complement)
    direct = verify_dirac_supported(e, f)
    report.merge(direct, "dirac")
    report.add("AGREE", "conditions 1-4 match the direct D1-D3 verdict",
               conditions == direct.ok,
               None if conditions == direct.ok
               else f"conditions: {conditions}, direct: {direct.ok}")
    return report


def _index_triples(r: int):
    for a in range(1, r + 1):
        for b in range(a + 1, r + 1):
            for c in range(b + 1, r + 1):
                yield (a, b, c)


def _transform_trivector(x: GradedElement, inverse_cols: List[List[Poly]]) -> GradedElement:
    """Components of a trivector in a new frame, given e_a = sum_i inv[a][i] f_i."""
    ctx = x.ctx
    r = ctx.rank
    out = GradedElement.zero(ctx, MULTIVECTOR, 3)
    for idx, c in x.terms.items():
        factors = []
        for a in idx:
            factors.append(GradedElement.section(ctx, MULTIVECTOR, inverse_cols[a - 1]))
        term = wedge(wedge(factors[0], factors[1]), factors[2]).scale(c)
        out = out + term
    return out


# -- morphism graphs -------------------------------------------------------------------


def graph_support(source_chart: Sequence[str], base: PolyMap,
                  product_chart: Sequence[str], var_maps: List[Dict[str, str]]) -> Submanifold:
    """The graph of a base map inside a product chart."""
    rules = {}
    src_map = var_maps[0]
    tgt_map = var_maps[1]
    for v, comp in zip(base.target_vars, base.components):
        rules[tgt_map[v]] = comp.rename(src_map)
    return Submanifold(tuple(product_chart), rules)


def graph_of_qjb_morphism(psi: BundleMap, source: QuasiJacobiBialgebroid,
                          target: QuasiJacobiBialgebroid,
                          check_morphism: bool = True,
                          gen_degree: int = 2) -> Tuple[CourantJacobiStructure, SupportedSubbundle]:
    """F = {(a + psi* b, psi a + b)} inside E_source x (E_target with flipped pairing)."""
    if check_morphism:
        verify_qjb_morphism(psi, source, target).require_ok(
            "the bundle map must be a quasi-Jacobi bialgebroid morphism")
    product = product_double([(source, 1), (target, -1)], verify=False)
    infos = product.factors
    var_maps = [info.var_map for info in infos]
    support = graph_support(source.ctx.chart, psi.base, product.ctx.chart, var_maps)

    frame = []
    r1, r2 = source.ctx.rank, target.ctx.rank
    for a in range(1, r1 + 1):
        # a-type: (e_a, psi(e_a)) on the multivector sides
        sec1 = DoubleSection.of_vec(GradedElement.basis_vector(source.ctx, a))
        image = GradedElement.section(
            target.ctx, MULTIVECTOR,
            [psi.fiber[j][a - 1] for j in range(r2)])
        sec2 = DoubleSection.of_vec(image)
        frame.append(embed_section(product, 0, sec1) + embed_section(product, 1, sec2))
    for b in range(1, r2 + 1):
        # b*-type: (psi* eps_b, eps_b) on the form sides
        pulled = GradedElement.section(
            source.ctx, FORM, [psi.fiber[b - 1][i] for i in range(r1)])
        sec1 = DoubleSection.of_form(pulled)
        sec2 = DoubleSection.of_form(GradedElement.basis_form(target.ctx, b))
        frame.append(embed_section(product, 0, sec1) + embed_section(product, 1, sec2))

    complement = []
    for a in range(1, r1 + 1):
        complement.append(embed_section(
            product, 0, DoubleSection.of_form(GradedElement.basis_form(source.ctx, a))))
    for b in range(1, r2 + 1):
        complement.append(embed_section(
            product, 1, DoubleSection.of_vec(GradedElement.basis_vector(target.ctx, b))))

    subbundle = SupportedSubbundle(product, support, frame, complement)
    return product, subbundle


def standard_lpsi_morphism(source_chart: Sequence[str], target_chart: Sequence[str],
                           base: PolyMap) -> Tuple[CourantJacobiStructure, SupportedSubbundle]:
    """The standard morphism between E1 structures over a polynomial base map."""
    from .courant import build_standard_e1
    from .quasi import standard_jacobi_algebroid, trivial_quasi_dual

    source = QuasiJacobiBialgebroid(
        trivial_quasi_dual(standard_jacobi_algebroid(source_chart)))
    target = QuasiJacobiBialgebroid(
        trivial_quasi_dual(standard_jacobi_algebroid(target_chart)))
    n, m = len(tuple(source_chart)), len(tuple(target_chart))
    fiber = [[Poly.zero()] * (n + 1) for _ in range(m + 1)]
    for j in range(m):
        for i in range(n):
            fiber[j][i] = base.components[j].partial(base.source_vars[i])
    fiber[m][n] = Poly.one()
    psi = BundleMap(source.ctx, target.ctx, base, fiber)
    return graph_of_qjb_morphism(psi, source, target)


def diagonal_morphism(e: CourantJacobiStructure) -> Tuple[CourantJacobiStructure, SupportedSubbundle]:
    """L = {(X, X - rho*(alpha, f), rho(X) + (alpha, f))} in E x E-bar x E1(M)-bar."""
    from .courant import build_standard_e1, standard_section
    from .quasi import standard_jacobi_algebroid, trivial_quasi_dual

    chart = e.ctx.chart
    e1_qjb = QuasiJacobiBialgebroid(
        trivial_quasi_dual(standard_jacobi_algebroid(chart)))
    product = product_double([(e.qjb, 1), (e.qjb, -1), (e1_qjb, -1)], verify=False)
    rules = {}
    infos = product.factors
    for v in chart:
        rules[infos[1].var_map[v]] = Poly.variable(infos[0].var_map[v])
        rules[infos[2].var_map[v]] = Poly.variable(infos[0].var_map[v])
    support = Submanifold(product.ctx.chart, rules)

    ctx = e.ctx
    r = ctx.rank
    n = len(chart)
    e1_ctx = e1_qjb.ctx
    pair_matrix = [[e.pairing(s, t) for _, t in e.basis_sections()]
                   for _, s in e.basis_sections()]
    pair_det = det_bareiss(pair_matrix)

    frame = []
    basis = [sec for _, sec in e.basis_sections()]
    for idx, x in enumerate(basis):
        # (X, X, rho(X)): third slot holds the anchor image as a section of E1
        vf, scalar = e.anchor(x)
        e1_sec = standard_section(
            QuasiJacobiBialgebroidView(e1_qjb), list(vf), scalar,
            [Poly.zero()] * n, Poly.zero())
        frame.append(embed_section(product, 0, x)
                     + embed_section(product, 1, x)
                     + embed_section(product, 2, e1_sec))
    for j in range(n + 1):
        # (0, -rho*(alpha, f), (alpha, f)) for (alpha, f) running over T*M x R
        alpha = [Poly.zero()] * n
        f = Poly.zero()
        if j < n:
            alpha[j] = Poly.one()
        else:
            f = Poly.one()
        rhs = []
        for _, b in e.basis_sections():
            vf, scalar = e.anchor(b)
            value = sum((alpha[i] * vf[i] for i in range(n)), Poly.zero()) + f * scalar
            rhs.append(value * Fraction(1, 2))
        coords = solve_constant_det(
            [[pair_matrix[a][b] for a in range(2 * r)] for b in range(2 * r)],
            rhs, pair_det)
        rho_star = _section_from_coords(e, coords)
        e1_sec = standard_section(QuasiJacobiBialgebroidView(e1_qjb),
                                  [Poly.zero()] * n, Poly.zero(), alpha, f)
        frame.append(embed_section(product, 1, -rho_star)
                     + embed_section(product, 2, e1_sec))

    complement = []
    for _, b in e.basis_sections():
        complement.append(embed_section(product, 1, b))
    for j in range(n + 1):
        coeffs = [Poly.zero()] * (n + 1)
        coeffs[j] = Poly.one()
        vec = GradedElement.section(e1_ctx, MULTIVECTOR, coeffs)
        complement.append(embed_section(product, 2, DoubleSection.of_vec(vec)))

    subbundle = SupportedSubbundle(product, support, frame, complement)
    return product, subbundle


def _section_from_coords(e: CourantJacobiStructure, coords: Sequence[Poly]) -> DoubleSection:
    r = e.ctx.rank
    return DoubleSection(
        GradedElement.section(e.ctx, MULTIVECTOR, list(coords[:r])),
        GradedElement.section(e.ctx, FORM, list(coords[r:])))


class QuasiJacobiBialgebroidView(CourantJacobiStructure):
    """A thin standard-presentation view used to build E1 sections."""

    def __init__(self, qjb: QuasiJacobiBialgebroid):
        super().__init__(qjb, presentation="standard_e1")
