"""Upper bound on the constant delay needed by Player O.

For an automaton with ``n`` states and ``k`` counters the bound is
``2^(2^E + 1)`` with ``E = 2n(ceil(log2 n) + 6k^2)``.  The value has
``2^E + 2`` bits, so it is materialised only for small ``E``.
"""
from __future__ import annotations

import decimal
from dataclasses import dataclass
from typing import Optional

EXACT_LIMIT = 16


def ceil_log2(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    return (n - 1).bit_length()


def exponent(n: int, k: int) -> int:
    return 2 * n * (ceil_log2(n) + 6 * k * k)


def digit_count(e: int) -> int:
    """Decimal digits of ``2^(2^e + 1)``."""
    m = 2 ** e + 1
    # floor(m * log10(2)) + 1; enough precision to resolve the floor
    prec = len(str(m)) + 30
    with decimal.localcontext() as ctx:
        ctx.prec = prec
        log2 = decimal.Decimal(2).log10()
        return int((decimal.Decimal(m) * log2).to_integral_value(rounding=decimal.ROUND_FLOOR)) + 1


@dataclass
class DelayBound:
    n: int
    k: int
    e: int
    value: Optional[int]
    digits: int

    def lines(self):
        out = [f"n = {self.n}", f"k = {self.k}", f"E = 2n(ceil(log2 n) + 6k^2) = {self.e}",
               f"bound = 2^(2^{self.e} + 1)", f"digits = {self.digits}"]
        if self.value is not None:
            out.append(f"value = {self.value}")
        else:
            out.append(f"value not printed: it has 2^{self.e} + 2 bits (limit E <= {EXACT_LIMIT})")
        return out


def delay_bound(n: int, k: int, exact_limit: int = EXACT_LIMIT) -> DelayBound:
    if k < 0:
        raise ValueError("k must be nonnegative")
    e = exponent(n, k)
    value = 2 ** (2 ** e + 1) if e <= exact_limit else None
    digits = len(str(value)) if value is not None else digit_count(e)
    return DelayBound(n, k, e, value, digits)
