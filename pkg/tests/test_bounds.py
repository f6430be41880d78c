import math

import mpmath
import pytest

from maxdelay.bounds import ceil_log2, delay_bound, digit_count, exponent


def reference_exponent(n, k):
    return 2 * n * (math.ceil(math.log2(n)) + 6 * k * k)


@pytest.mark.parametrize("n", range(1, 40))
def test_ceil_log2(n):
    assert ceil_log2(n) == math.ceil(math.log2(n))


def test_small_values():
    assert delay_bound(1, 0).value == 4
    assert delay_bound(2, 0).value == 2**17
    assert delay_bound(3, 0).value == 2 ** (2**12 + 1)
    assert delay_bound(3, 4).value is None


@pytest.mark.parametrize("n,k", [(1, 1), (2, 1), (3, 2), (5, 1), (3, 4), (7, 3)])
def test_digit_count_against_mpmath(n, k):
    e = exponent(n, k)
    assert e == reference_exponent(n, k)
    with mpmath.workdps(len(str(2**e)) + 40):
        expected = int(mpmath.floor((mpmath.mpf(2) ** e + 1) * mpmath.log10(2))) + 1
    assert digit_count(e) == expected


def test_digit_count_matches_exact_when_small():
    for e in range(0, 13):
        assert digit_count(e) == len(str(2 ** (2**e + 1)))
