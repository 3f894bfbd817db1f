from math import comb

import pytest
from hypothesis import given, strategies as st

from steklov_revolution import DomainError, ResourceError
from steklov_revolution.modes import check_dim, laplace_eigenvalue, mode, mode_table, multiplicity


def harmonic_dimension(n, k):
    # homogeneous polynomials of degree k in n variables minus those of degree k-2
    return comb(k + n - 1, n - 1) - (comb(k + n - 3, n - 1) if k >= 2 else 0)


def test_laplace_eigenvalues_small_cases():
    assert laplace_eigenvalue(3, 0) == 0.0
    assert laplace_eigenvalue(3, 1) == 2.0
    assert laplace_eigenvalue(3, 2) == 6.0
    assert laplace_eigenvalue(5, 3) == 18.0


def test_multiplicities_on_two_sphere_are_odd_numbers():
    assert [multiplicity(3, k) for k in range(6)] == [1, 3, 5, 7, 9, 11]


def test_multiplicities_on_three_sphere_are_squares():
    assert [multiplicity(4, k) for k in range(6)] == [1, 4, 9, 16, 25, 36]


def test_first_multiplicity_equals_dimension():
    for n in range(3, 30):
        assert multiplicity(n, 1) == n


@given(st.integers(3, 40), st.integers(0, 60))
def test_multiplicity_matches_harmonic_polynomial_count(n, k):
    assert multiplicity(n, k) == harmonic_dimension(n, k)


def test_multiplicity_is_exact_for_huge_arguments():
    n, k = 60, 128
    m = multiplicity(n, k)
    assert isinstance(m, int)
    assert m == harmonic_dimension(n, k)
    assert m > 2**63


@pytest.mark.parametrize("n", [2, 1, 0, -3, 3.5, True, "3"])
def test_invalid_dimension_rejected(n):
    with pytest.raises((DomainError, TypeError, ValueError)):
        check_dim(n)


@pytest.mark.parametrize("k", [-1, 1.5])
def test_invalid_mode_rejected(k):
    with pytest.raises(DomainError):
        laplace_eigenvalue(3, k)


def test_mode_table_contents_and_limit():
    table = mode_table(4, 3)
    assert [(m.k, m.lam, m.mult) for m in table] == [(0, 0.0, 1), (1, 3.0, 4), (2, 8.0, 9), (3, 15.0, 16)]
    assert mode(4, 2) == table[2]
    with pytest.raises(ResourceError):
        mode_table(3, 200)
    assert len(mode_table(3, 200, limit=256)) == 201
