"""Exact arithmetic in the form class group of a negative discriminant.

Group elements are primitive positive-definite binary quadratic forms
a*x^2 + b*x*y + c*y^2, written (a, b, c), taken up to the usual reduction.
Composition is schoolbook Dirichlet composition followed by Gauss reduction;
all arithmetic is arbitrary-precision.  The reduced representative is made
unique by the convention b >= 0 whenever |b| = a or a = c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidFormError, ResourceLimitError
from .rng import SplitMix64

#: Enumeration guard: class_number/enumerate_reduced refuse |discriminant| above this.
DISCRIMINANT_GUARD = 10**7

#: Primality guard for random-element group orders (trial division only).
PRIME_GUARD = 10**12


@dataclass(frozen=True)
class Discriminant:
    """A negative discriminant, value ≡ 0 or 1 (mod 4)."""

    value: int

    def __post_init__(self):
        if self.value >= 0:
            raise InvalidFormError(f"discriminant must be negative, got {self.value}")
        if self.value % 4 not in (0, 1):
            raise InvalidFormError(f"discriminant must be 0 or 1 mod 4, got {self.value}")


@dataclass(frozen=True)
class QuadraticForm:
    """An integer form (a, b, c) with a > 0 and b^2 - 4ac < 0."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.a <= 0 or self.discriminant >= 0:
            raise InvalidFormError(f"form {self.triple()} is not positive definite")

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        return b >= 0 if (abs(b) == a or a == c) else True

    def triple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)


def principal_form(delta: Discriminant) -> QuadraticForm:
    """Identity element: (1, 0, -Δ/4) or (1, 1, (1-Δ)/4) by parity."""
    k = delta.value % 2
    return QuadraticForm(1, k, (k * k - delta.value) // 4)


def _check_discriminant(f: QuadraticForm, delta: Discriminant) -> None:
    if f.discriminant != delta.value:
        raise InvalidFormError(
            f"form {f.triple()} has discriminant {f.discriminant}, expected {delta.value}"
        )


def reduce(f: QuadraticForm) -> QuadraticForm:
    """Unique reduced representative of f's equivalence class."""
    a, b, c = f.a, f.b, f.c
    delta = f.discriminant
    while True:
        if not (-a < b <= a):
            # translate b into (-a, a], adjusting c to keep the discriminant
            b = b % (2 * a)
            if b > a:
                b -= 2 * a
            c = (b * b - delta) // (4 * a)
        if a > c:
            a, b, c = c, -b, a
            continue
        break
    if (abs(b) == a or a == c) and b < 0:
        b = -b
    return QuadraticForm(a, b, c)


def _egcd(x: int, y: int) -> tuple[int, int, int]:
    """g, u, v with u*x + v*y = g = gcd(x, y)."""
    u0, u1, v0, v1 = 1, 0, 0, 1
    while y:
        q, x, y = x // y, y, x % y
        u0, u1 = u1, u0 - q * u1
        v0, v1 = v1, v0 - q * v1
    if x < 0:
        return -x, -u0, -v0
    return x, u0, v0


def _egcd3(x: int, y: int, z: int) -> tuple[int, int, int, int]:
    """g, u, v, w with u*x + v*y + w*z = g = gcd(x, y, z)."""
    g1, u1, v1 = _egcd(x, y)
    g, s, w = _egcd(g1, z)
    return g, u1 * s, v1 * s, w


def compose(f: QuadraticForm, g: QuadraticForm) -> QuadraticForm:
    """Reduced Dirichlet composite of two forms of one discriminant."""
    delta = f.discriminant
    if g.discriminant != delta:
        raise InvalidFormError(
            f"cannot compose forms of discriminants {delta} and {g.discriminant}"
        )
    a1, b1, c1 = f.triple()
    a2, b2, c2 = g.triple()
    s0 = (b1 + b2) // 2
    n0 = (b1 - b2) // 2
    d, _, v, w = _egcd3(a1, a2, s0)
    a3 = (a1 * a2) // (d * d)
    b3 = b2 + 2 * (a2 // d) * (v * n0 - w * c2)
    c3 = (b3 * b3 - delta) // (4 * a3)
    if b3 * b3 - 4 * a3 * c3 != delta:
        raise InvalidFormError(f"composition of {f.triple()} and {g.triple()} lost the discriminant")
    return reduce(QuadraticForm(a3, b3, c3))


def inverse(f: QuadraticForm) -> QuadraticForm:
    """Opposite form (a, -b, c), reduced."""
    return reduce(QuadraticForm(f.a, -f.b, f.c))


def power(f: QuadraticForm, n: int) -> QuadraticForm:
    """f composed with itself n times, by repeated squaring."""
    if n < 0:
        raise ValueError("power() requires n >= 0")
    result = principal_form(Discriminant(f.discriminant))
    base = reduce(f)
    while n:
        if n & 1:
            result = compose(result, base)
        base = compose(base, base)
        n >>= 1
    return result


def enumerate_reduced(delta: Discriminant) -> list[QuadraticForm]:
    """All primitive reduced forms of the discriminant, sorted by (a, b)."""
    if abs(delta.value) > DISCRIMINANT_GUARD:
        raise ResourceLimitError(
            f"|discriminant| {abs(delta.value)} exceeds enumeration guard {DISCRIMINANT_GUARD}"
        )
    d = delta.value
    forms = []
    for a in range(1, math.isqrt(abs(d) // 3) + 1):
        for b in range(-a, a + 1):
            if (b - d) % 2:
                continue
            numerator = b * b - d
            if numerator % (4 * a):
                continue
            c = numerator // (4 * a)
            if c < a:
                continue
            if (abs(b) == a or a == c) and b < 0:
                continue  # skip the non-canonical boundary twin
            if math.gcd(math.gcd(a, abs(b)), c) != 1:
                continue
            forms.append(QuadraticForm(a, b, c))
    forms.sort(key=lambda f: (f.a, f.b))
    return forms


def class_number(delta: Discriminant) -> int:
    """h(Δ): the number of primitive reduced forms."""
    return len(enumerate_reduced(delta))


def _is_prime(n: int) -> bool:
    if n > PRIME_GUARD:
        raise ResourceLimitError(f"primality check beyond guard {PRIME_GUARD}")
    if n < 2:
        return False
    for q in (2, 3):
        if n % q == 0:
            return n == q
    q = 5
    while q * q <= n:
        if n % q == 0 or n % (q + 2) == 0:
            return False
        q += 6
    return True


def default_exponent_count(r: int, c: int = 3) -> int:
    """Suggested number of exponents for random words: c * ceil(log2 r)."""
    return max(1, c * math.ceil(math.log2(r)))


@dataclass(frozen=True)
class RandomElementParams:
    """Parameters for drawing a random group element as a word of exponents."""

    generator: QuadraticForm
    group_order: int
    num_exponents: int
    word_length: int
    seed: int

    def __post_init__(self):
        if not _is_prime(self.group_order):
            raise ValueError(f"group order {self.group_order} is not prime")
        if self.num_exponents < 1:
            raise ValueError("num_exponents must be >= 1")
        if self.word_length < 1:
            raise ValueError("word_length must be >= 1")


def random_element(params: RandomElementParams) -> tuple[int, QuadraticForm]:
    """Seeded random element: exponents c_1..c_k from (Z/rZ)^x, a length-m word
    over them, the summed exponent e mod r, and generator^e.

    Draw order (one SplitMix64 stream): the k exponents first, then the m word
    positions.
    """
    r = params.group_order
    rng = SplitMix64(params.seed)
    exponents = [1 + rng.randrange(r - 1) for _ in range(params.num_exponents)]
    word = [rng.randrange(params.num_exponents) for _ in range(params.word_length)]
    e = sum(exponents[s] for s in word) % r
    return e, power(params.generator, e)
