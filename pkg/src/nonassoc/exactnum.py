"""Exact scalar arithmetic: rationals and prime fields behind one interface.

Every computation in this package is exact.  Scalars are plain Python
objects (``Fraction`` over the rationals, ``int`` residues over a prime
field); the ``Field`` object supplies the operations.  There is no
floating point anywhere.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from pathlib import Path

FIXTURE_ENV_VAR = "NONASSOC_FIXTURE_DIR"


def fixture_dir() -> Path:
    override = os.environ.get(FIXTURE_ENV_VAR)
    if override:
        return Path(override)
    return Path(__file__).parent / "fixtures"


# ---------------------------------------------------------------------------
# integer helpers


def gcd(a: int, b: int) -> int:
    """Non-negative gcd; gcd(0, 0) = 0."""
    return math.gcd(a, b)


def strip_factor(n: int, q: int) -> tuple[int, int]:
    """Return (n / q**k, k) with q not dividing the first component.

    Requires q >= 2 and n != 0.
    """
    if q <= 1:
        raise ValueError(f"factor to strip must be >= 2, got {q}")
    if n == 0:
        raise ValueError("cannot strip factors from 0")
    k = 0
    while n % q == 0:
        n //= q
        k += 1
    return n, k


_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 2**64 (and far beyond,
    up to 3.3e24, with this witness set)."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# fields


class Field:
    """Common scalar interface.  Values are immutable Python objects."""

    characteristic: int

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        raise NotImplementedError

    def from_int(self, n: int):
        raise NotImplementedError

    def parse(self, text: str):
        raise NotImplementedError

    def format(self, a) -> str:
        return str(a)


class RationalField(Field):
    """The rationals; values are ``fractions.Fraction`` (exactly reduced,
    positive denominator -- the Fraction invariants)."""

    characteristic = 0

    zero = Fraction(0)
    one = Fraction(1)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / a

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero")
        return a / b

    def is_zero(self, a):
        return a == 0

    def from_int(self, n):
        return Fraction(n)

    def parse(self, text):
        """Parse "p" or "p/q" exactly."""
        return Fraction(text.strip())

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")


class PrimeField(Field):
    """Integers mod p; values are ints reduced to [0, p).

    Primality is certified for p < 2**64; larger moduli are accepted
    unchecked (documented caveat -- nothing in this package needs them).
    """

    def __init__(self, p: int):
        if p < 2:
            raise ValueError(f"prime field modulus must be >= 2, got {p}")
        if p < 2**64 and not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.characteristic = p
        self.zero = 0
        self.one = 1 % p

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p)

    def is_zero(self, a):
        return a % self.p == 0

    def from_int(self, n):
        return n % self.p

    def parse(self, text):
        return int(text.strip()) % self.p

    def __repr__(self):
        return f"GF({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("Fp", self.p))


QQ = RationalField()
GF2 = PrimeField(2)


def field_for_characteristic(char: int) -> Field:
    return QQ if char == 0 else PrimeField(char)


# ---------------------------------------------------------------------------
# reference integer-membership constants (shipped decimal fixtures)

_MEMBER_DIGITS = {"member_constant_dp.txt": 541, "member_constant_dp_swap.txt": 353}


def reference_member_constants() -> tuple[int, int]:
    """The two shipped unit-multiple constants used by the characteristic
    transfer analysis: one per monomial order (default degrevlex, and
    degrevlex with the last two variables swapped).

    Self-test on load: their decimal expansions must be 541 and 353 digits.
    """
    values = []
    for name, digits in _MEMBER_DIGITS.items():
        text = (fixture_dir() / name).read_text().strip()
        if not text.isdigit() or len(text) != digits:
            raise ValueError(
                f"fixture {name} corrupt: expected a {digits}-digit integer"
            )
        values.append(int(text))
    return values[0], values[1]
