"""The cohomology complex of K/xi with its Bockstein differential.

Stringing the mod-xi cohomology groups H^i(K/xi) together by the connecting
map of 0 -> xi*R/xi^2 -> R/xi^2 -> R/xi -> 0 yields a complex over k; it is
this package's stand-in for a de Rham complex.  The module also houses the
identifications between that complex and the mod-xi reductions and
subquotients of the decalage stages: the reduction of the plain decalage is
quasi-isomorphic to the whole complex, the stage-(m+1)/xi*stage(m)
subquotient matches its degree >= m+1 (Hodge) part, the connecting map of the
graded triangle factors through beta, and the mod-xi reduction of a stage
splits into a truncation part and a Hodge part.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .checks import CheckResult
from .complexes import FGModule, FreeComplex, cohomology, cohomology_presentation, hodge_filtration, truncate_leq
from .eta import eta, eta_m, graded_piece, mod_xi_subquotient, stage_inclusion
from .kmatrix import QuotientSpace, field_rank, kernel_cols, solve_field
from .rmatrix import Matrix, solve_exact


def k_cohomology_quotient(cx: FreeComplex, i: int) -> QuotientSpace:
    """H^i of a complex over a field, with deterministic representatives."""
    Z = kernel_cols(cx.d(i))
    B = cx.d(i - 1)
    return QuotientSpace(
        cx.ring,
        cx.rank(i),
        [Z.column(j) for j in range(Z.cols)],
        [B.column(j) for j in range(B.cols)],
    )


class BocksteinComplex:
    """H^*(K/xi) with the Bockstein differential, over k = R/(xi).

    ``quotients[i]`` fixes representatives of H^i(K/xi) inside (K/xi)^i;
    ``beta[i]`` is the differential in those bases.  Degree i carries twist
    tag i (the differential raises the tag by one; comparisons untwist).
    """

    __slots__ = ("K", "kbar", "field", "quotients", "beta")

    def __init__(self, K, kbar, quotients, beta):
        self.K = K
        self.kbar = kbar
        self.field = kbar.ring
        self.quotients = quotients
        self.beta = beta

    def dim(self, i: int) -> int:
        q = self.quotients.get(i)
        return 0 if q is None else q.dim

    def beta_matrix(self, i: int) -> Matrix:
        b = self.beta.get(i)
        if b is None:
            return Matrix.zeros(self.field, self.dim(i + 1), self.dim(i))
        return b

    def as_complex(self) -> FreeComplex:
        """The Bockstein complex as a plain complex over k."""
        lo, hi = self.K.lo, self.K.hi
        ranks = [self.dim(i) for i in range(lo, hi + 1)]
        diffs = [self.beta_matrix(i) for i in range(lo, hi)]
        return FreeComplex(self.field, lo, ranks, diffs)

    def class_of(self, i: int, kbar_vector):
        """Class coordinates in H^i(K/xi) of a mod-xi cocycle vector."""
        return self.quotients[i].coords(kbar_vector)

    def describe(self) -> dict:
        return {
            "dims": [self.dim(i) for i in range(self.K.lo, self.K.hi + 1)],
            "beta": [
                [[self.field.format(x) for x in row] for row in self.beta_matrix(i).data]
                for i in range(self.K.lo, self.K.hi)
            ],
        }


def _beta_entry(K, i, rep, lift_noise=None):
    """beta of one representative: lift, apply d, divide by xi, reduce, classify."""
    ring = K.ring
    lifted = [ring.lift(c) for c in rep]
    if lift_noise is not None:
        lifted = [ring.add(x, ring.mul(ring.xi, n)) for x, n in zip(lifted, lift_noise)]
    dx = K.d(i).apply(lifted)
    divided = [ring.xi_divide(x, 1) for x in dx]
    return [ring.residue(x) for x in divided]


def bockstein_complex(K: FreeComplex, rng: random.Random | None = None) -> BocksteinComplex:
    """Build H^*(K/xi) with beta computed through explicit lifts.

    When ``rng`` is given, every lift is perturbed by a random multiple of
    xi; the resulting matrices must not change (lift independence).
    """
    kbar = K.reduce_mod_xi()
    quotients = {i: k_cohomology_quotient(kbar, i) for i in K.degrees()}
    beta = {}
    ring = K.ring
    for i in range(K.lo, K.hi):
        cols = []
        for rep in quotients[i].reps:
            noise = None
            if rng is not None:
                noise = [ring.parse(str(rng.randint(-3, 3))) if ring.kind == "z"
                         else ring.constant(_random_field_element(ring.base, rng))
                         for _ in rep]
            image = _beta_entry(K, i, rep, noise)
            cols.append(quotients[i + 1].coords(image))
        beta[i] = Matrix.from_columns(kbar.ring, cols, rows=quotients[i + 1].dim)
    return BocksteinComplex(K, kbar, quotients, beta)


def _random_field_element(field, rng):
    from .rings import PrimeField

    if isinstance(field, PrimeField):
        return rng.randrange(field.p)
    from fractions import Fraction

    return Fraction(rng.randint(-3, 3), rng.choice([1, 1, 2, 3]))


def beta_squared_is_zero(bc: BocksteinComplex) -> bool:
    for i in range(bc.K.lo, bc.K.hi - 1):
        if not (bc.beta_matrix(i + 1) @ bc.beta_matrix(i)).is_zero():
            return False
    return True


# ---------------------------------------------------------------------------
# comparison maps into the Bockstein complex


def decalage_comparison(K: FreeComplex, bc: BocksteinComplex) -> dict:
    """Per-degree k-matrices from (decalage of K) mod xi to H^i(K/xi).

    Generator j of the reduced stage at degree i is xi^i * w_j; it maps to
    the class of w_j mod xi.
    """
    emb = eta(K)
    maps = {}
    for i in K.degrees():
        wbar = emb.basis(i).xi_divide(i).residue()
        cols = [bc.class_of(i, wbar.column(j)) for j in range(wbar.cols)]
        maps[i] = Matrix.from_columns(bc.field, cols, rows=bc.dim(i))
    return maps


def hodge_stage_comparison(K: FreeComplex, bc: BocksteinComplex, m: int) -> dict:
    """Comparison from stage(m)/xi*stage(m-1) onto the Hodge part F_m of H^*(K/xi).

    For m = 0 this is the comparison of the full reduced decalage.  Degrees
    below m are zero on both sides; at degree i >= m generator j is
    xi^i * w_j and maps to the class of w_j.
    """
    emb = eta_m(K, m)
    maps = {}
    for i in K.degrees():
        if i < m:
            maps[i] = Matrix.zeros(bc.field, 0, emb.complex.rank(i))
            continue
        wbar = emb.basis(i).xi_divide(i).residue()
        cols = [bc.class_of(i, wbar.column(j)) for j in range(wbar.cols)]
        maps[i] = Matrix.from_columns(bc.field, cols, rows=bc.dim(i))
    return maps


def verify_reduction_identification(K: FreeComplex, bc: BocksteinComplex | None = None) -> CheckResult:
    """(decalage of K) mod xi is the Bockstein complex, via explicit maps.

    Checks the comparison is a chain map over k and induces an isomorphism on
    cohomology in every degree (dimension match plus full rank).
    """
    out = CheckResult("eta.mod-xi-bockstein-model")
    bc = bc or bockstein_complex(K)
    emb = eta(K)
    red = emb.complex.reduce_mod_xi()
    comp = decalage_comparison(K, bc)
    bcx = bc.as_complex()
    for i in range(K.lo, K.hi):
        lhs = comp[i + 1] @ red.d(i)
        rhs = bcx.d(i) @ comp[i]
        out.expect(lhs == rhs, degree=i, reason="comparison is not a chain map")
    for i in K.degrees():
        hq = k_cohomology_quotient(red, i)
        hb = k_cohomology_quotient(bcx, i)
        out.expect(hq.dim == hb.dim, degree=i, reason="dimension mismatch",
                   reduced=hq.dim, bockstein=hb.dim)
        if hq.dim != hb.dim:
            continue
        cols = []
        for rep in hq.reps:
            image = comp[i].apply(rep)
            cols.append(hb.coords(image))
        induced = Matrix.from_columns(bc.field, cols, rows=hb.dim)
        out.expect(field_rank(induced) == hq.dim, degree=i,
                   reason="induced map on cohomology is not invertible")
    return out


def verify_mod_xi_subquotient(K: FreeComplex, m: int,
                              bc: BocksteinComplex | None = None) -> CheckResult:
    """stage(m+1)/xi*stage(m) has the cohomology of the Hodge part F_{m+1}."""
    out = CheckResult("eta-m.mod-xi-subquotient")
    sq = mod_xi_subquotient(K, m)
    out.expect(sq.degree_m_cohomology_vanishes(), degree=m, m=m,
               reason="degree-m cohomology of the subquotient must vanish")
    bc = bc or bockstein_complex(K)
    hodge, _ = hodge_filtration(bc.as_complex(), m + 1)
    for i in K.degrees():
        got = cohomology(sq.fp, i)
        want = FGModule.of_k_dimension(K.ring, cohomology(hodge, i).free_rank)
        out.expect(got == want, degree=i, m=m, got=repr(got), want=repr(want))
    return out


# ---------------------------------------------------------------------------
# the connecting map of the graded triangle


def connecting_factorization(K: FreeComplex, m: int,
                             bc: BocksteinComplex | None = None) -> CheckResult:
    """Connecting map of stage(m+1) -> stage(m) -> graded piece, versus beta.

    Verifies, in order: the four-term sequence
    0 -> ker(beta_m) -> H^m(K/xi) -> ker(beta_{m+1}) -> H^{m+1}(of the
    Bockstein complex) -> 0 is exact; the mod-xi reduction of stage(m) has
    the three-case cohomology (H^i(K/xi) below m, ker beta_m at m, Bockstein
    cohomology above); and the snake map of the graded triangle equals beta_m
    under the comparison identifications.
    """
    out = CheckResult("eta-m.connecting-bockstein")
    bc = bc or bockstein_complex(K)
    bcx = bc.as_complex()
    field = bc.field

    # four-term exactness with middle map beta
    beta_m = bc.beta_matrix(m)
    beta_m1 = bc.beta_matrix(m + 1)
    zm = kernel_cols(beta_m)
    zm1 = kernel_cols(beta_m1)
    hm1 = k_cohomology_quotient(bcx, m + 1)
    out.expect((beta_m1 @ beta_m).is_zero(), m=m, reason="beta squared nonzero")
    # exactness at H^m(K/xi): kernel of beta_m is Z^m by construction; at
    # Z^{m+1}: image of beta_m + boundaries span, quotient is H^{m+1}
    rank_beta = field_rank(beta_m)
    out.expect(zm.cols + rank_beta == bc.dim(m), m=m, reason="rank-nullity failure")
    out.expect(zm1.cols - rank_beta == hm1.dim, m=m,
               reason="cokernel of beta_m inside Z^{m+1} is not H^{m+1}")

    # three-case formula for stage(m) mod xi
    red = eta_m(K, m).complex.reduce_mod_xi()
    for i in K.degrees():
        got = k_cohomology_quotient(red, i).dim
        if i <= m - 1:
            want = bc.dim(i)
        elif i == m:
            want = zm.cols
        else:
            want = k_cohomology_quotient(bcx, i).dim
        out.expect(got == want, degree=i, m=m, got=got, want=want,
                   reason="three-case reduction formula")

    # snake of the graded triangle equals beta
    if m + 1 <= K.hi:
        grade = graded_piece(K, m)
        stage, finer = grade.stage, grade.finer
        inc = stage_inclusion(finer, stage)
        pres = cohomology_presentation(grade.fp, m)
        for j in range(pres.gens_basis.cols):
            z = pres.gens_basis.take_columns([j])
            # class of z in H^m(K/xi)
            elt = (stage.basis(m) @ z).xi_divide(m).residue()
            src_class = bc.class_of(m, elt.column(0))
            rhs = beta_m.apply(src_class)
            # snake: lift z, apply d, pull back along the stage inclusion
            dz = stage.complex.d(m) @ z
            y = solve_exact(inc.map(m + 1), dz)
            if y is None:
                out.fail(m=m, generator=j, reason="snake image escaped the finer stage")
                continue
            velt = (finer.basis(m + 1) @ y).xi_divide(m + 1).residue()
            lhs = bc.class_of(m + 1, velt.column(0))
            out.expect(tuple(lhs) == tuple(rhs), m=m, generator=j,
                       reason="connecting map does not factor through beta",
                       snake=[field.format(x) for x in lhs],
                       beta=[field.format(x) for x in rhs])
    return out


# ---------------------------------------------------------------------------
# the splitting of stage(m+1) mod xi


@dataclass
class Splitting:
    """stage(m+1)/xi against its two factors, with the verification record."""

    dims: dict
    reduced: FreeComplex
    truncation_factor: FreeComplex
    hodge_factor: FreeComplex
    check: CheckResult


def split_mod_xi(K: FreeComplex, m: int,
                 bc: BocksteinComplex | None = None) -> Splitting:
    """Decomposition record for stage(m+1)/xi: truncation part + Hodge part.

    ``dims`` holds the per-degree bookkeeping; the check asserts cohomology
    additivity in every degree and the two compatibility squares.
    """
    bc = bc or bockstein_complex(K)
    bcx = bc.as_complex()

    finer = eta_m(K, m + 1)
    red = finer.complex.reduce_mod_xi()
    kbar = K.reduce_mod_xi()
    tau, _ = truncate_leq(kbar, m)
    tau = tau.with_twist(m + 1)
    hodge, _ = hodge_filtration(bcx, m + 1)

    result = CheckResult("eta-m.mod-xi-splitting")
    dims = {}
    for i in K.degrees():
        dims[i] = {
            "reduced": red.rank(i),
            "truncation_factor": tau.rank(i),
            "hodge_factor": hodge.rank(i),
        }
        got = k_cohomology_quotient(red, i).dim
        want = (k_cohomology_quotient(tau, i).dim
                + k_cohomology_quotient(hodge, i).dim)
        result.expect(got == want, degree=i, m=m, got=got, want=want,
                      reason="cohomology does not split")

    result.merge(_splitting_compatibility(K, bc, m))
    return Splitting(dims, red, tau, hodge, result)


def _splitting_compatibility(K: FreeComplex, bc: BocksteinComplex, m: int) -> CheckResult:
    """The two compatibility squares of the splitting, on cohomology.

    (a) Hodge side: stage(m+1)/xi*stage(m) -> stage(m)/xi*stage(m-1)
        agrees with the inclusion F_{m+1} -> F_m of Hodge parts.
    (b) truncation side: graded(m-1)(1) -> stage(m)/xi*stage(m) -> graded(m)
        agrees with the truncation inclusion tau_{<=m-1} -> tau_{<=m}.
    """
    out = CheckResult("eta-m.mod-xi-splitting-compat")
    bcx = bc.as_complex()
    field = bc.field

    # (a): compare through the Hodge comparisons at levels m+1 and m
    sq = mod_xi_subquotient(K, m)
    stage_m = eta_m(K, m)
    inc = stage_inclusion(sq.finer, stage_m)
    comp_fine = hodge_stage_comparison(K, bc, m + 1)
    comp_coarse = hodge_stage_comparison(K, bc, m)
    f_fine, _ = hodge_filtration(bcx, m + 1)
    f_coarse, _ = hodge_filtration(bcx, m)
    for i in K.degrees():
        if i < m + 1:
            continue
        pres = cohomology_presentation(sq.fp, i)
        hq = k_cohomology_quotient(f_coarse, i)
        for j in range(pres.gens_basis.cols):
            z = pres.gens_basis.take_columns([j])
            via_stage = comp_coarse[i] @ (inc.map(i) @ z).residue()
            via_hodge = comp_fine[i] @ z.residue()
            lhs = hq.coords(via_stage.column(0))
            rhs = hq.coords(via_hodge.column(0))
            out.expect(lhs == rhs, degree=i, m=m, generator=j,
                       reason="Hodge-side compatibility square fails")

    # (b): truncation side, only meaningful for m >= 1
    if m >= 1:
        kbar = K.reduce_mod_xi()
        grade_prev = graded_piece(K, m - 1)
        grade = graded_piece(K, m)
        tau_prev, tau_prev_inc = truncate_leq(kbar, m - 1)
        tau, tau_inc = truncate_leq(kbar, m)
        # inclusion tau_{<=m-1} -> tau_{<=m} over k
        jmaps = {}
        for i in kbar.degrees():
            sol = solve_field(tau_inc.map(i), tau_prev_inc.map(i))
            if sol is None:
                out.fail(degree=i, reason="truncations are not nested")
                return out
            jmaps[i] = sol
        for i in K.degrees():
            pres = cohomology_presentation(grade_prev.fp, i)
            if pres.gens_basis.cols == 0:
                continue
            hq = k_cohomology_quotient(grade.tau, i)
            u = solve_exact(grade.stage.basis(i),
                            grade_prev.stage.basis(i).scale(K.ring.xi))
            if u is None:
                out.fail(degree=i, m=m, reason="xi*stage(m-1) escaped stage(m)")
                continue
            for j in range(pres.gens_basis.cols):
                z = pres.gens_basis.take_columns([j])
                lhs_term = grade.comparison[i] @ (u @ z).residue()
                rhs_term = jmaps[i] @ (grade_prev.comparison[i] @ z.residue())
                lhs = hq.coords(lhs_term.column(0))
                rhs = hq.coords(rhs_term.column(0))
                out.expect(lhs == rhs, degree=i, m=m, generator=j,
                           reason="truncation-side compatibility square fails")
    return out
