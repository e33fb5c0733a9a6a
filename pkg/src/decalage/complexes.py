"""Bounded cochain complexes of finite free and finitely presented modules.

A FreeComplex stores ranks and differentials on a window [lo, hi]; matrices
act on column vectors, so d(i) has shape rank(i+1) x rank(i).  Cohomology is
returned as an FGModule (free rank plus invariant-factor chain), and every
degree also exposes a presentation: a basis of the cocycle submodule together
with the relation matrix, which is what induced maps, snake maps and image
filtrations are computed through.

FPComplex covers quotient complexes (graded pieces, mod-xi subquotients):
each degree is generators-plus-relations, with differentials on generators.
"""

from __future__ import annotations

from .rings import BaseRing
from .rmatrix import (
    Matrix,
    ShapeMismatch,
    image_basis,
    kernel_basis,
    snf,
    solve_exact,
)


class DifferentialSquareNonzero(ValueError):
    def __init__(self, degree, witness_column=None):
        self.degree = degree
        self.witness_column = witness_column
        super().__init__(f"d(i+1) @ d(i) != 0 at degree {degree}")


# ---------------------------------------------------------------------------
# finitely generated module invariants


class FGModule:
    """Isomorphism invariants of a f.g. module: free rank + invariant factors."""

    __slots__ = ("ring", "free_rank", "factors")

    def __init__(self, ring: BaseRing, free_rank: int, factors=()):
        self.ring = ring
        self.free_rank = free_rank
        self.factors = tuple(factors)
        for f in self.factors:
            if ring.is_unit(f) or ring.is_zero(f):
                raise ValueError("invariant factors must be nonzero non-units")

    @classmethod
    def from_cokernel(cls, ring, gens: int, rels: Matrix) -> "FGModule":
        """Invariants of coker(rels: R^c -> R^gens)."""
        if rels.rows != gens:
            raise ShapeMismatch("relation matrix rows must equal generator count")
        res = snf(rels)
        factors = [f for f in res.factors if not ring.is_unit(f)]
        return cls(ring, gens - res.rank, factors)

    @classmethod
    def zero(cls, ring) -> "FGModule":
        return cls(ring, 0)

    @classmethod
    def of_k_dimension(cls, ring, d: int) -> "FGModule":
        """The FGModule of a d-dimensional k = R/(xi) vector space over R."""
        _, xin = ring.unit_normalize(ring.xi)
        return cls(ring, 0, (xin,) * d)

    def __eq__(self, other):
        return (
            isinstance(other, FGModule)
            and other.ring == self.ring
            and other.free_rank == self.free_rank
            and other.factors == self.factors
        )

    def __hash__(self):
        return hash((self.free_rank, self.factors))

    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.factors

    @property
    def xi_torsion_free(self) -> bool:
        R = self.ring
        return all(R.xi_valuation(f) == 0 for f in self.factors)

    def mod_xi_torsion(self) -> "FGModule":
        """Invariants of M / M[xi].

        The xi-torsion of R/(f) is killed by one power of xi, so each factor
        with positive valuation loses exactly one xi.
        """
        R = self.ring
        out = []
        for f in self.factors:
            if R.xi_valuation(f) > 0:
                f = R.xi_divide(f, 1)
            _, f = R.unit_normalize(f)
            if not R.is_unit(f):
                out.append(f)
        return FGModule(R, self.free_rank, out)

    def k_dimension(self):
        """dim over k when the module is a k-vector space, else None."""
        R = self.ring
        if self.free_rank:
            return None
        _, xin = R.unit_normalize(R.xi)
        if any(f != xin for f in self.factors):
            return None
        return len(self.factors)

    def describe(self) -> dict:
        return {
            "free_rank": self.free_rank,
            "factors": [self.ring.format(f) for f in self.factors],
        }

    def __repr__(self):
        if self.is_zero():
            return "<FG 0>"
        parts = []
        if self.free_rank:
            parts.append(f"R^{self.free_rank}")
        parts.extend(f"R/({self.ring.format(f)})" for f in self.factors)
        return "<FG " + " + ".join(parts) + ">"


# ---------------------------------------------------------------------------
# free complexes


class FreeComplex:
    __slots__ = ("ring", "lo", "hi", "_ranks", "_diffs", "twist")

    def __init__(self, ring, lo: int, ranks, diffs, twist: int = 0):
        ranks = tuple(int(r) for r in ranks)
        diffs = tuple(diffs)
        if not ranks:
            ranks = (0,)
        if len(diffs) != len(ranks) - 1:
            raise ShapeMismatch("need exactly one differential per adjacent pair")
        self.ring = ring
        self.lo = lo
        self.hi = lo + len(ranks) - 1
        self._ranks = ranks
        self._diffs = diffs
        self.twist = twist
        for i, d in enumerate(diffs):
            if (d.rows, d.cols) != (ranks[i + 1], ranks[i]):
                raise ShapeMismatch(
                    f"d({lo + i}) must be {ranks[i + 1]}x{ranks[i]}, got {d.rows}x{d.cols}"
                )
            if d.ring != ring:
                raise ShapeMismatch("differential over the wrong ring")

    @classmethod
    def zero(cls, ring, lo=0, hi=0, twist=0):
        n = hi - lo + 1
        diffs = [Matrix.zeros(ring, 0, 0) for _ in range(n - 1)]
        return cls(ring, lo, [0] * n, diffs, twist)

    @classmethod
    def single(cls, ring, degree, rank, twist=0):
        return cls(ring, degree, [rank], [], twist)

    def rank(self, i: int) -> int:
        if self.lo <= i <= self.hi:
            return self._ranks[i - self.lo]
        return 0

    def d(self, i: int) -> Matrix:
        if self.lo <= i < self.hi:
            return self._diffs[i - self.lo]
        return Matrix.zeros(self.ring, self.rank(i + 1), self.rank(i))

    def degrees(self):
        return range(self.lo, self.hi + 1)

    def ranks(self):
        return self._ranks

    def total_rank(self) -> int:
        return sum(self._ranks)

    def is_zero_complex(self) -> bool:
        return self.total_rank() == 0

    def euler_characteristic(self) -> int:
        return sum((-1) ** i * self.rank(i) for i in self.degrees())

    def validate(self) -> None:
        R = self.ring
        for i in self.degrees():
            if i + 2 > self.hi:
                continue
            sq = self.d(i + 1) @ self.d(i)
            if not sq.is_zero():
                witness = next(
                    j for j in range(sq.cols)
                    if any(not R.is_zero(x) for x in sq.column(j))
                )
                raise DifferentialSquareNonzero(i, witness)

    def reduce_mod_xi(self) -> "FreeComplex":
        k = self.ring.residue_field()
        return FreeComplex(
            k, self.lo, self._ranks, [d.residue() for d in self._diffs], self.twist
        )

    def with_twist(self, twist: int) -> "FreeComplex":
        return FreeComplex(self.ring, self.lo, self._ranks, self._diffs, twist)

    def shift(self, s: int) -> "FreeComplex":
        """Degree shift K[s]: K[s]^i = K^{i+s}, differentials sign-flipped for odd s."""
        diffs = self._diffs
        if s % 2:
            diffs = [-d for d in diffs]
        return FreeComplex(self.ring, self.lo - s, self._ranks, diffs, self.twist)

    def normalized_nonnegative(self):
        """(K', s) with K' = K[-s] starting at degree 0; s = 0 when lo >= 0.

        The decalage operations require nonnegative degrees; callers shift
        first and record s to reinterpret the answer.
        """
        if self.lo >= 0:
            return self, 0
        s = self.lo
        return self.shift(s), s

    def __eq__(self, other):
        return (
            isinstance(other, FreeComplex)
            and other.ring == self.ring
            and other.lo == self.lo
            and other._ranks == self._ranks
            and other._diffs == self._diffs
            and other.twist == self.twist
        )

    def __repr__(self):
        return f"<complex deg [{self.lo},{self.hi}] ranks {list(self._ranks)}>"


class ChainMap:
    __slots__ = ("source", "target", "_maps", "twist_shift")

    def __init__(self, source, target, maps: dict, twist_shift: int = 0):
        self.source = source
        self.target = target
        self._maps = dict(maps)
        self.twist_shift = twist_shift
        for i, f in self._maps.items():
            if (f.rows, f.cols) != (target.rank(i), source.rank(i)):
                raise ShapeMismatch(
                    f"f({i}) must be {target.rank(i)}x{source.rank(i)}, got {f.rows}x{f.cols}"
                )

    @classmethod
    def identity(cls, K) -> "ChainMap":
        return cls(K, K, {i: Matrix.identity(K.ring, K.rank(i)) for i in K.degrees()})

    @classmethod
    def zero(cls, source, target) -> "ChainMap":
        return cls(source, target, {})

    def map(self, i: int) -> Matrix:
        f = self._maps.get(i)
        if f is None:
            return Matrix.zeros(self.source.ring, self.target.rank(i), self.source.rank(i))
        return f

    def validate(self) -> None:
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        for i in range(lo, hi):
            lhs = self.target.d(i) @ self.map(i)
            rhs = self.map(i + 1) @ self.source.d(i)
            if lhs != rhs:
                raise ShapeMismatch(f"chain map does not commute at degree {i}")

    def is_degreewise_injective(self) -> bool:
        return all(
            kernel_basis(self.map(i)).cols == 0
            for i in self.source.degrees()
            if self.source.rank(i) > 0
        )

    def after(self, other: "ChainMap") -> "ChainMap":
        """self ∘ other (other feeds into self)."""
        if other.target is not self.source and other.target != self.source:
            raise ShapeMismatch("composition mismatch")
        lo = min(other.source.lo, self.target.lo)
        hi = max(other.source.hi, self.target.hi)
        maps = {i: self.map(i) @ other.map(i) for i in range(lo, hi + 1)}
        return ChainMap(other.source, self.target,
                        maps, self.twist_shift + other.twist_shift)


# ---------------------------------------------------------------------------
# finitely presented complexes


class FPModule:
    __slots__ = ("gens", "rels")

    def __init__(self, gens: int, rels: Matrix):
        if rels.rows != gens:
            raise ShapeMismatch("rels rows must equal generator count")
        self.gens = gens
        self.rels = rels

    def invariants(self, ring) -> FGModule:
        return FGModule.from_cokernel(ring, self.gens, self.rels)


class FPComplex:
    """Complex of finitely presented modules, differentials on generators."""

    __slots__ = ("ring", "lo", "hi", "modules", "_diffs", "twist")

    def __init__(self, ring, lo: int, modules, diffs, twist: int = 0):
        modules = tuple(modules)
        diffs = tuple(diffs)
        if not modules:
            modules = (FPModule(0, Matrix.zeros(ring, 0, 0)),)
        if len(diffs) != len(modules) - 1:
            raise ShapeMismatch("need one differential per adjacent pair")
        self.ring = ring
        self.lo = lo
        self.hi = lo + len(modules) - 1
        self.modules = modules
        self._diffs = diffs
        self.twist = twist
        for i, d in enumerate(diffs):
            if (d.rows, d.cols) != (modules[i + 1].gens, modules[i].gens):
                raise ShapeMismatch(f"FP differential shape mismatch at {lo + i}")

    def module(self, i: int) -> FPModule:
        if self.lo <= i <= self.hi:
            return self.modules[i - self.lo]
        return FPModule(0, Matrix.zeros(self.ring, 0, 0))

    def gens(self, i: int) -> int:
        return self.module(i).gens

    def rels(self, i: int) -> Matrix:
        return self.module(i).rels

    def d(self, i: int) -> Matrix:
        if self.lo <= i < self.hi:
            return self._diffs[i - self.lo]
        return Matrix.zeros(self.ring, self.gens(i + 1), self.gens(i))

    def degrees(self):
        return range(self.lo, self.hi + 1)

    def validate(self) -> None:
        for i in self.degrees():
            # differentials send relations into relations
            img = self.d(i) @ self.rels(i)
            if img.cols and solve_exact(self.rels(i + 1), img) is None:
                raise ShapeMismatch(f"d({i}) does not preserve relations")
            # d squared lands in relations
            sq = self.d(i + 1) @ self.d(i)
            if sq.cols and not sq.is_zero():
                if solve_exact(self.rels(i + 2), sq) is None:
                    raise DifferentialSquareNonzero(i)

    def term_invariants(self, i: int) -> FGModule:
        return self.module(i).invariants(self.ring)


# ---------------------------------------------------------------------------
# cohomology through presentations


class CohomologyPresentation:
    """H^i presented as coker(relations) on a basis of cocycle generators.

    ``gens_basis`` columns form an R-basis of the submodule
    N = { x : d(x) lies in the relation span one degree up } of the ambient
    generator module; ``relations`` collects boundaries and ambient relations
    in those coordinates.
    """

    __slots__ = ("ring", "ambient_gens", "gens_basis", "relations", "module")

    def __init__(self, ring, ambient_gens, gens_basis, relations):
        self.ring = ring
        self.ambient_gens = ambient_gens
        self.gens_basis = gens_basis
        self.relations = relations
        self.module = FGModule.from_cokernel(ring, gens_basis.cols, relations)

    def coords(self, M: Matrix) -> Matrix:
        """Presentation coordinates of columns of M (each must lie in N)."""
        sol = solve_exact(self.gens_basis, M)
        if sol is None:
            raise ValueError("column is not a cocycle for this presentation")
        return sol


def _presentation(ring, gens_i, rels_i, rels_next, d_i, d_prev) -> CohomologyPresentation:
    paired = d_i.hstack(rels_next) if rels_next.cols else d_i
    ker = kernel_basis(paired)
    xpart = ker.submatrix(0, gens_i, 0, ker.cols)
    basis = image_basis(xpart)
    bound = d_prev.hstack(rels_i) if rels_i.cols else d_prev
    coords = solve_exact(basis, bound)
    if coords is None:
        raise ShapeMismatch("boundaries do not lie in the cocycle submodule")
    return CohomologyPresentation(ring, gens_i, basis, coords)


def cohomology_presentation(K, i: int) -> CohomologyPresentation:
    ring = K.ring
    if isinstance(K, FPComplex):
        return _presentation(
            ring, K.gens(i), K.rels(i), K.rels(i + 1), K.d(i), K.d(i - 1)
        )
    empty_i = Matrix.zeros(ring, K.rank(i), 0)
    empty_next = Matrix.zeros(ring, K.rank(i + 1), 0)
    return _presentation(ring, K.rank(i), empty_i, empty_next, K.d(i), K.d(i - 1))


def cohomology(K, i: int) -> FGModule:
    return cohomology_presentation(K, i).module


def cocycles(K: FreeComplex, i: int) -> Matrix:
    """Basis of Z^i as columns inside K^i."""
    return kernel_basis(K.d(i))


def boundaries(K: FreeComplex, i: int) -> Matrix:
    """Generating set of B^i: the columns of d(i-1)."""
    return K.d(i - 1)


def induced_map(f: ChainMap, i: int, src_pres=None, tgt_pres=None) -> Matrix:
    """Matrix of H^i(f) with respect to the computed presentations."""
    if src_pres is None:
        src_pres = cohomology_presentation(f.source, i)
    if tgt_pres is None:
        tgt_pres = cohomology_presentation(f.target, i)
    return tgt_pres.coords(f.map(i) @ src_pres.gens_basis)


# ---------------------------------------------------------------------------
# truncations, cones, sums


def truncate_leq(K: FreeComplex, m: int):
    """Canonical truncation: [... -> K^{m-1} -> Z^m -> 0] with its inclusion."""
    if m >= K.hi:
        return K, ChainMap.identity(K)
    if m < K.lo:
        Z = FreeComplex.zero(K.ring, K.lo, K.hi, K.twist)
        return Z, ChainMap.zero(Z, K)
    zbasis = kernel_basis(K.d(m))
    ranks = [K.rank(i) for i in range(K.lo, m)] + [zbasis.cols]
    diffs = [K.d(i) for i in range(K.lo, m - 1)]
    if m > K.lo:
        last = solve_exact(zbasis, K.d(m - 1))
        if last is None:
            raise ShapeMismatch("image of d(m-1) escaped Z^m")
        diffs.append(last)
    T = FreeComplex(K.ring, K.lo, ranks, diffs, K.twist)
    maps = {i: Matrix.identity(K.ring, K.rank(i)) for i in range(K.lo, m)}
    maps[m] = zbasis
    return T, ChainMap(T, K, maps)


def hodge_filtration(K: FreeComplex, m: int):
    """Brutal truncation: K^i for i >= m, zero below, with its inclusion."""
    if m <= K.lo:
        return K, ChainMap.identity(K)
    if m > K.hi:
        Z = FreeComplex.zero(K.ring, K.lo, K.hi, K.twist)
        return Z, ChainMap.zero(Z, K)
    ranks = [K.rank(i) for i in range(m, K.hi + 1)]
    diffs = [K.d(i) for i in range(m, K.hi)]
    F = FreeComplex(K.ring, m, ranks, diffs, K.twist)
    maps = {i: Matrix.identity(K.ring, K.rank(i)) for i in range(m, K.hi + 1)}
    return F, ChainMap(F, K, maps)


def cone(f: ChainMap) -> FreeComplex:
    """Mapping cone: cone(f)^i = src^{i+1} (+) tgt^i, d = [[-d_src, 0], [f, d_tgt]]."""
    S, T = f.source, f.target
    ring = S.ring
    lo = min(S.lo - 1, T.lo)
    hi = max(S.hi - 1, T.hi)
    ranks = [S.rank(i + 1) + T.rank(i) for i in range(lo, hi + 1)]
    diffs = []
    for i in range(lo, hi):
        top = (-S.d(i + 1)).hstack(Matrix.zeros(ring, S.rank(i + 2), T.rank(i)))
        bottom = f.map(i + 1).hstack(T.d(i))
        diffs.append(top.vstack(bottom))
    return FreeComplex(ring, lo, ranks, diffs, T.twist)


def direct_sum(A: FreeComplex, B: FreeComplex) -> FreeComplex:
    if A.ring != B.ring:
        raise ShapeMismatch("direct sum over different rings")
    ring = A.ring
    lo, hi = min(A.lo, B.lo), max(A.hi, B.hi)
    ranks = [A.rank(i) + B.rank(i) for i in range(lo, hi + 1)]
    diffs = []
    for i in range(lo, hi):
        top = A.d(i).hstack(Matrix.zeros(ring, A.rank(i + 1), B.rank(i)))
        bottom = Matrix.zeros(ring, B.rank(i + 1), A.rank(i)).hstack(B.d(i))
        diffs.append(top.vstack(bottom))
    return FreeComplex(ring, lo, ranks, diffs, A.twist)
