"""The decalage construction and its one-parameter refinement.

For a termwise-free complex K in nonnegative degrees and m >= 0, the refined
subcomplex has degree-i term

    xi^i * { x in K^i : d(x) in xi*K^{i+1} }   for i >= m,
    xi^m * K^i                                  for i < m,

realized as an honest submodule of K^i with a recorded basis, so inclusions
between the stages (and the later lattice comparisons) are literal matrices.
The family decreases in m and squeezes between xi-multiples:
xi * stage(m) <= stage(m+1) <= stage(m).

Quotients of consecutive stages are produced as finitely presented complexes
together with the comparison maps onto truncations of K/xi.
"""

from __future__ import annotations

from .checks import CheckResult
from .complexes import (
    ChainMap,
    FGModule,
    FPComplex,
    FPModule,
    FreeComplex,
    cohomology,
    truncate_leq,
)
from .kmatrix import field_rank, solve_field
from .rmatrix import Matrix, image_basis, kernel_basis, solve_exact


class DegreeBelowZero(ValueError):
    """Decalage needs complexes concentrated in nonnegative degrees."""


class NegativeM(ValueError):
    """The refinement index m must be nonnegative."""


class SubcomplexEmbedding:
    """A stage of the filtration: abstract complex + embedding into K.

    ``iota`` has square injective matrices in each degree (the stages are
    full-rank submodules); ``twists[i]`` records the xi-power baked into the
    degree-i basis (i for the plain decalage part, m below degree m).
    """

    __slots__ = ("complex", "iota", "twists", "m")

    def __init__(self, complex: FreeComplex, iota: ChainMap, twists: dict, m: int):
        self.complex = complex
        self.iota = iota
        self.twists = dict(twists)
        self.m = m

    @property
    def ambient(self) -> FreeComplex:
        return self.iota.target

    def basis(self, i: int) -> Matrix:
        return self.iota.map(i)

    def reduction_map(self, i: int) -> Matrix:
        """Matrix over k of stage^i -> (K^i / xi^{m+1}) / xi^m, i.e. iota/xi^m mod xi."""
        return self.basis(i).xi_divide(self.m).residue()


def _congruence_kernel_basis(K: FreeComplex, i: int) -> Matrix:
    """Basis of { x in K^i : d(x) in xi*K^{i+1} } inside K^i."""
    ring = K.ring
    d = K.d(i)
    n_next = K.rank(i + 1)
    scaled = Matrix.scalar(ring, n_next, ring.xi)
    paired = d.hstack(scaled)
    ker = kernel_basis(paired)
    xpart = ker.submatrix(0, K.rank(i), 0, ker.cols)
    return image_basis(xpart)


def eta_m(K: FreeComplex, m: int) -> SubcomplexEmbedding:
    """Stage m of the refined decalage filtration, as a scaled subcomplex of K."""
    if K.lo < 0:
        raise DegreeBelowZero(f"complex starts at degree {K.lo}")
    if m < 0:
        raise NegativeM(f"m = {m}")
    ring = K.ring
    bases = {}
    twists = {}
    for i in K.degrees():
        if i < m:
            bases[i] = Matrix.scalar(ring, K.rank(i), ring.xi_power(m))
            twists[i] = m
        else:
            W = _congruence_kernel_basis(K, i)
            bases[i] = W.xi_scale(i)
            twists[i] = i
    diffs = []
    for i in range(K.lo, K.hi):
        moved = K.d(i) @ bases[i]
        inner = solve_exact(bases[i + 1], moved)
        if inner is None:
            raise ArithmeticError(f"stage differential escaped the stage at degree {i}")
        diffs.append(inner)
    E = FreeComplex(ring, K.lo, [bases[i].cols for i in K.degrees()], diffs, twist=m)
    iota = ChainMap(E, K, bases)
    return SubcomplexEmbedding(E, iota, twists, m)


def eta(K: FreeComplex) -> SubcomplexEmbedding:
    """The decalage subcomplex itself (stage m = 0)."""
    return eta_m(K, 0)


def stage_inclusion(finer: SubcomplexEmbedding, coarser: SubcomplexEmbedding) -> ChainMap:
    """The literal containment stage(m+1) <= stage(m) as a chain map."""
    maps = {}
    for i in coarser.ambient.degrees():
        sol = solve_exact(coarser.basis(i), finer.basis(i))
        if sol is None:
            raise ArithmeticError(f"stages are not nested at degree {i}")
        maps[i] = sol
    return ChainMap(finer.complex, coarser.complex, maps)


def eta_filtration(K: FreeComplex, m_max: int):
    """Stages 0..m_max with inclusion maps stage(m+1) -> stage(m)."""
    stages = [eta_m(K, m) for m in range(m_max + 1)]
    inclusions = [
        stage_inclusion(stages[m + 1], stages[m]) for m in range(m_max)
    ]
    return stages, inclusions


def xi_step_inclusion_holds(K: FreeComplex, m: int) -> bool:
    """Membership test for xi * stage(m) <= stage(m+1) <= stage(m)."""
    fine = eta_m(K, m + 1)
    coarse = eta_m(K, m)
    for i in K.degrees():
        if solve_exact(coarse.basis(i), fine.basis(i)) is None:
            return False
        if solve_exact(fine.basis(i), coarse.basis(i).scale(K.ring.xi)) is None:
            return False
    return True


def is_stationary_stage(K: FreeComplex, m: int) -> bool:
    """True when stage(m) equals xi^m * K on the nose (holds for m > hi)."""
    emb = eta_m(K, m)
    ring = K.ring
    for i in K.degrees():
        scaled = Matrix.scalar(ring, K.rank(i), ring.xi_power(m))
        if solve_exact(emb.basis(i), scaled) is None:
            return False
        if solve_exact(scaled, emb.basis(i)) is None:
            return False
    return True


# ---------------------------------------------------------------------------
# graded pieces


class GradedPiece:
    """stage(m)/stage(m+1) with its comparison onto the truncation of K/xi.

    ``fp`` presents the quotient on the stage-m basis; ``tau`` is the
    canonical truncation of the reduction at level m (twist tag m);
    ``comparison[i]`` is the k-matrix from stage-m generator coordinates to
    the chosen basis of tau's degree-i term.
    """

    __slots__ = ("K", "m", "fp", "tau", "tau_inclusion", "comparison", "stage", "finer")

    def __init__(self, K, m, fp, tau, tau_inclusion, comparison, stage, finer):
        self.K = K
        self.m = m
        self.fp = fp
        self.tau = tau
        self.tau_inclusion = tau_inclusion
        self.comparison = comparison
        self.stage = stage
        self.finer = finer

    def verify(self) -> CheckResult:
        out = CheckResult("eta-m.graded-piece")
        K, m = self.K, self.m
        kfield = K.ring.residue_field()
        for i in K.degrees():
            comp = self.comparison[i]
            rels = self.fp.rels(i).residue()
            # well-defined on the quotient
            if rels.cols:
                out.expect((comp @ rels).is_zero(), degree=i, reason="comparison not defined on quotient")
            # chain map over k
            lhs = self.comparison.get(i + 1)
            if lhs is not None:
                left = lhs @ self.fp.d(i).residue()
                right = self.tau.d(i) @ comp
                out.expect(left == right, degree=i, reason="comparison does not commute with d")
            # termwise bijectivity
            qdim = self.fp.term_invariants(i).k_dimension()
            tdim = self.tau.rank(i)
            out.expect(qdim == tdim, degree=i, reason="term dimension mismatch",
                       quotient=qdim, truncation=tdim)
            out.expect(field_rank(comp) == tdim, degree=i, reason="comparison not surjective")
            if i > m:
                out.expect(qdim == 0, degree=i, reason="graded piece should vanish above m")
        # cohomology agreement, degree by degree
        for i in K.degrees():
            got = cohomology(self.fp, i)
            want = FGModule.of_k_dimension(K.ring, cohomology(self.tau, i).free_rank)
            out.expect(got == want, degree=i, reason="graded cohomology mismatch",
                       got=repr(got), want=repr(want))
        return out


def graded_piece(K: FreeComplex, m: int) -> GradedPiece:
    """stage(m)/stage(m+1) with comparison to the truncation of K/xi at m."""
    stage = eta_m(K, m)
    finer = eta_m(K, m + 1)
    inc = stage_inclusion(finer, stage)
    ring = K.ring
    modules = [FPModule(stage.complex.rank(i), inc.map(i)) for i in K.degrees()]
    diffs = [stage.complex.d(i) for i in range(K.lo, K.hi)]
    fp = FPComplex(ring, K.lo, modules, diffs, twist=m)

    kbar = K.reduce_mod_xi()
    tau, tau_inc = truncate_leq(kbar, m)
    tau = tau.with_twist(m)

    comparison = {}
    for i in K.degrees():
        if i < m:
            comparison[i] = Matrix.identity(kbar.ring, K.rank(i))
        elif i == m:
            zbasis = tau_inc.map(m)
            wbar = stage.basis(m).xi_divide(m).residue()
            sol = solve_field(zbasis, wbar)
            if sol is None:
                raise ArithmeticError("stage basis did not reduce into the cocycles")
            comparison[i] = sol
        else:
            comparison[i] = Matrix.zeros(kbar.ring, tau.rank(i), stage.complex.rank(i))
    return GradedPiece(K, m, fp, tau, tau_inc, comparison, stage, finer)


# ---------------------------------------------------------------------------
# mod-xi subquotient stage(m+1) / xi*stage(m)


class ModXiSubquotient:
    """stage(m+1) / (xi * stage(m)) presented on the stage-(m+1) basis.

    Degreewise this is 0 below m, K^m/{x : dx in xi K^{m+1}} at m, and the
    mod-xi reduction of the plain decalage terms above m.  The cross-check
    against the Hodge part of the cohomology complex of K/xi lives in the
    bockstein module.
    """

    __slots__ = ("K", "m", "fp", "finer", "stage")

    def __init__(self, K, m, fp, finer, stage):
        self.K = K
        self.m = m
        self.fp = fp
        self.finer = finer
        self.stage = stage

    def degree_m_cohomology_vanishes(self) -> bool:
        return cohomology(self.fp, self.m).is_zero()


def mod_xi_subquotient(K: FreeComplex, m: int) -> ModXiSubquotient:
    stage = eta_m(K, m)
    finer = eta_m(K, m + 1)
    ring = K.ring
    modules = []
    for i in K.degrees():
        rel = solve_exact(finer.basis(i), stage.basis(i).scale(ring.xi))
        if rel is None:
            raise ArithmeticError(f"xi*stage(m) escaped stage(m+1) at degree {i}")
        modules.append(FPModule(finer.complex.rank(i), rel))
    diffs = [finer.complex.d(i) for i in range(K.lo, K.hi)]
    fp = FPComplex(ring, K.lo, modules, diffs, twist=m + 1)
    return ModXiSubquotient(K, m, fp, finer, stage)


def stage_mod_xi(K: FreeComplex, m: int):
    """stage(m) modulo xi as a complex over k, with its stage embedding."""
    emb = eta_m(K, m)
    return emb.complex.reduce_mod_xi(), emb


# ---------------------------------------------------------------------------
# cohomology of the stages


def verify_eta_m_cohomology(K: FreeComplex, m: int) -> CheckResult:
    """Three-case cohomology formula for stage(m), as exact FGModule equality.

    Above m the stage has the cohomology of the plain decalage (whose own
    identity against H(K) with xi-torsion removed is checked alongside);
    at and below m it matches H(K) up to the twist tag.
    """
    out = CheckResult("eta-m.cohomology")
    emb = eta_m(K, m)
    plain = eta(K)
    for i in K.degrees():
        got = cohomology(emb.complex, i)
        if i > m:
            want = cohomology(plain.complex, i)
        else:
            want = cohomology(K, i)
        out.expect(got == want, degree=i, m=m, got=repr(got), want=repr(want))
    for i in K.degrees():
        got = cohomology(plain.complex, i)
        want = cohomology(K, i).mod_xi_torsion()
        out.expect(got == want, degree=i, reason="decalage vs torsion quotient",
                   got=repr(got), want=repr(want))
    return out
