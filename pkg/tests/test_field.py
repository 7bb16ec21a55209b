# tests/test_field.py
import numpy as np
import pytest

from app.exceptions import FieldError
from app.models.field import arith, is_prime, make_field
from app.utils.linalg import inverse_mod, rank_mod, solve_mod


@pytest.mark.parametrize("q", [3, 5, 7, 2_147_483_647])
def test_make_field_accepts_primes(q):
    assert make_field(q).q == q


@pytest.mark.parametrize("q", [0, 1, 2, 4, 9, 561])
def test_make_field_rejects_small_or_composite(q):
    with pytest.raises(FieldError):
        make_field(q)


def test_miller_rabin_agrees_with_trial_division():
    def slow(n):
        return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))

    assert [n for n in range(2000) if is_prime(n)] == [n for n in range(2000) if slow(n)]
    assert is_prime(18446744073709551557)
    assert not is_prime(3215031751)


def test_scalar_arithmetic(f3, f5):
    assert f3.mul(2, 2) == 1
    assert f3.inv(2) == 2
    assert f5.inv(3) == 2
    a, b = f5.element(3), f5.element(4)
    assert int(arith(a, b, "add")) == 2
    assert int(arith(a, b, "sub")) == 4
    assert int(arith(a, b, "div")) == 2
    assert int(arith(a, b, "neg")) == 2
    assert int(arith(a, b, "inv")) == 2


def test_inverse_of_zero_raises(f5):
    with pytest.raises(FieldError):
        f5.inv(0)
    with pytest.raises(FieldError):
        arith(f5.element(1), f5.element(0), "div")


def test_mixed_fields_rejected(f3, f5):
    with pytest.raises(FieldError):
        arith(f3.element(1), f5.element(1), "add")


def test_sampling_ranges(f3, f5, rng):
    assert {int(f3.sample_h(rng)) for _ in range(50)} == {2}
    assert {int(f3.sample_nonzero(rng)) for _ in range(50)} <= {1, 2}
    draws = [int(f5.sample_h(rng)) for _ in range(30_000)]
    counts = np.bincount(draws, minlength=5)
    assert counts[0] == counts[1] == 0
    # qui-quadrado com 2 graus de liberdade, nível 0.001
    expected = len(draws) / 3
    chi2 = sum((c - expected) ** 2 / expected for c in counts[2:])
    assert chi2 < 13.8


def test_vectors_are_reduced(f5):
    assert f5.array([5, 6, -1]).tolist() == [0, 1, 4]
    assert f5.matmul([[1, 2]], [[3], [4]]).tolist() == [[1]]


def test_rank_and_solve(f5):
    assert rank_mod([[1, 2], [2, 4]], 5) == 1
    assert rank_mod([[1, 2], [2, 4]], 7) == 1
    assert rank_mod([[1, 1], [1, 4]], 3) == 1
    assert rank_mod([[1, 1], [1, 4]], 5) == 2
    A = [[1, 2], [3, 4]]
    x = solve_mod(A, [1, 1], 5)
    assert (np.array(x, dtype=object).dot(np.array(A, dtype=object)) % 5).tolist() == [1, 1]
    inverse = inverse_mod(A, 5)
    assert (np.array(A, dtype=object).dot(inverse) % 5).tolist() == [[1, 0], [0, 1]]


def test_singular_system_raises():
    with pytest.raises(FieldError):
        inverse_mod([[1, 2], [2, 4]], 5)
    with pytest.raises(FieldError):
        solve_mod([[1, 2], [2, 4]], [1, 0], 5)
