from decalage.kmatrix import QuotientSpace, Subspace, field_rank, kernel_cols, rref, solve_field
from decalage.rings import PrimeField, RationalField
from decalage.rmatrix import Matrix


def test_rref_and_rank():
    F = PrimeField(5)
    M = Matrix(F, [[1, 2, 3], [2, 4, 1], [0, 0, 2]])
    R, pivots = rref(M)
    assert pivots == (0, 2)
    assert field_rank(M) == 2


def test_kernel_cols_deterministic():
    F = PrimeField(3)
    M = Matrix(F, [[1, 2, 0], [0, 0, 1]])
    K = kernel_cols(M)
    assert (M @ K).is_zero()
    assert K.cols == 1
    assert kernel_cols(M) == K


def test_solve_field_rationals():
    Q = RationalField()
    from fractions import Fraction

    A = Matrix(Q, [[Fraction(1), Fraction(2)], [Fraction(3), Fraction(4)]])
    B = Matrix(Q, [[Fraction(5)], [Fraction(6)]])
    X = solve_field(A, B)
    assert (A @ X) == B
    singular = Matrix(Q, [[Fraction(1), Fraction(1)], [Fraction(1), Fraction(1)]])
    assert solve_field(singular, B) is None


def test_subspace_normal_form_equality():
    F = PrimeField(5)
    a = Subspace(F, 3, [(1, 2, 0), (0, 0, 1)])
    b = Subspace(F, 3, [(2, 4, 1), (0, 0, 3), (1, 2, 1)])
    assert a == b
    assert a.contains((1, 2, 3))
    assert not a.contains((1, 0, 0))


def test_subspace_operations():
    F = PrimeField(5)
    e1 = Subspace(F, 3, [(1, 0, 0)])
    e12 = Subspace(F, 3, [(1, 0, 0), (0, 1, 0)])
    e23 = Subspace(F, 3, [(0, 1, 0), (0, 0, 1)])
    assert e12.intersect(e23) == Subspace(F, 3, [(0, 1, 0)])
    assert e1.add(e23).dim == 3
    assert e12.contains_space(e1)
    assert not e1.contains_space(e12)


def test_quotient_space_coords():
    F = PrimeField(5)
    z = [(1, 0, 0), (0, 1, 0), (1, 1, 0)]
    b = [(1, 1, 0)]
    q = QuotientSpace(F, 3, z, b)
    assert q.dim == 1
    c1 = q.coords((1, 0, 0))
    c2 = q.coords((0, 4, 0))  # = -(0,1,0) = (1,0,0) mod boundaries
    assert len(c1) == 1
    assert c2 == tuple(F.neg(x) for x in c1) or c2 == c1
    # class of a boundary is zero
    assert q.coords((2, 2, 0)) == (0,)
