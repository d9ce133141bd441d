"""Exact arithmetic in GF(p^e) for plane constructions."""
import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Sequence, Tuple

logger = logging.getLogger(__name__)

DEFAULT_MAX_ORDER = 64


class FieldError(ValueError):
    """Raised for unsupported field parameters or mixed-field arithmetic."""


def is_prime(n: int) -> bool:
    """Trial-division primality test (orders here are tiny)."""
    if n < 2:
        return False
    for d in range(2, int(n ** 0.5) + 1):
        if n % d == 0:
            return False
    return True


def prime_power(q: int) -> Tuple[int, int]:
    """Split q into (p, e) with q = p^e.

    Args:
        q: Candidate field order

    Returns:
        Tuple of (characteristic, extension degree)

    Raises:
        FieldError: If q is not a prime power
    """
    if q < 2:
        raise FieldError(f"Not a prime power: {q}")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    e, rest = 0, q
    while rest % p == 0:
        rest //= p
        e += 1
    if rest != 1:
        raise FieldError(f"Not a prime power: {q}")
    return p, e


def _trim(poly: Sequence[int]) -> List[int]:
    out = list(poly)
    while out and out[-1] == 0:
        out.pop()
    return out


def _poly_mod(num: Sequence[int], den: Sequence[int], p: int) -> List[int]:
    """Remainder of num / den over Z_p (den monic)."""
    rem = _trim(num)
    den = _trim(den)
    while len(rem) >= len(den):
        shift = len(rem) - len(den)
        factor = rem[-1]
        for i, c in enumerate(den):
            rem[shift + i] = (rem[shift + i] - factor * c) % p
        rem = _trim(rem)
    return rem


def _is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """Brute-force test: no monic divisor of degree 1..e//2."""
    e = len(modulus) - 1
    for d in range(1, e // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            if not _poly_mod(modulus, list(low) + [1], p):
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """A finite field GF(p^e) given by a monic irreducible modulus.

    The modulus is stored low-degree first and has length e + 1.
    """

    p: int
    e: int
    modulus: Tuple[int, ...]

    @property
    def order(self) -> int:
        return self.p ** self.e

    def element(self, index: int) -> 'FieldElement':
        """Element whose base-p digits (low degree first) spell index."""
        if not 0 <= index < self.order:
            raise FieldError(f"Element index {index} outside GF({self.order})")
        coeffs = []
        for _ in range(self.e):
            index, digit = divmod(index, self.p)
            coeffs.append(digit)
        return FieldElement(self, tuple(coeffs))

    def zero(self) -> 'FieldElement':
        return self.element(0)

    def one(self) -> 'FieldElement':
        return self.element(1)

    @cached_property
    def add_table(self) -> Tuple[Tuple[int, ...], ...]:
        """Addition table over element indices."""
        elems = elements(self)
        return tuple(tuple((a + b).index for b in elems) for a in elems)

    @cached_property
    def mul_table(self) -> Tuple[Tuple[int, ...], ...]:
        """Multiplication table over element indices."""
        elems = elements(self)
        return tuple(tuple((a * b).index for b in elems) for a in elems)

    def __str__(self) -> str:
        return f"GF({self.order})"


@dataclass(frozen=True)
class FieldElement:
    """Polynomial representative of a field element."""

    field: FieldSpec
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.field.e:
            raise FieldError(f"Expected {self.field.e} coefficients, got {len(self.coeffs)}")
        if any(not 0 <= c < self.field.p for c in self.coeffs):
            raise FieldError(f"Coefficients must lie in [0, {self.field.p})")

    @property
    def index(self) -> int:
        return sum(c * self.field.p ** i for i, c in enumerate(self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def _check(self, other: 'FieldElement') -> None:
        if not isinstance(other, FieldElement) or other.field != self.field:
            raise FieldError("Operands belong to different fields")

    def _wrap(self, poly: Sequence[int]) -> 'FieldElement':
        poly = list(poly) + [0] * (self.field.e - len(poly))
        return FieldElement(self.field, tuple(poly[:self.field.e]))

    def __add__(self, other: 'FieldElement') -> 'FieldElement':
        self._check(other)
        p = self.field.p
        return self._wrap([(a + b) % p for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> 'FieldElement':
        p = self.field.p
        return self._wrap([(-a) % p for a in self.coeffs])

    def __sub__(self, other: 'FieldElement') -> 'FieldElement':
        self._check(other)
        return self + (-other)

    def __mul__(self, other: 'FieldElement') -> 'FieldElement':
        self._check(other)
        p = self.field.p
        product = [0] * (2 * self.field.e - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    product[i + j] = (product[i + j] + a * b) % p
        if self.field.e == 1:
            return self._wrap(product)
        return self._wrap(_poly_mod(product, self.field.modulus, p))

    def __pow__(self, exponent: int) -> 'FieldElement':
        result = self.field.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def inverse(self) -> 'FieldElement':
        if self.is_zero():
            raise ZeroDivisionError("Inversion of zero in a finite field")
        # multiplicative group has order q - 1
        return self ** (self.field.order - 2)

    def __truediv__(self, other: 'FieldElement') -> 'FieldElement':
        self._check(other)
        return self * other.inverse()

    def __repr__(self) -> str:
        return f"{self.field}[{self.index}]"


def make_field(p: int, e: int, max_order: int = DEFAULT_MAX_ORDER) -> FieldSpec:
    """Build GF(p^e) with the lexicographically least monic irreducible modulus.

    Candidate moduli are compared on their coefficient vectors low-degree
    first. For e = 1 the modulus is x and arithmetic is plain Z_p.

    Args:
        p: Prime characteristic
        e: Extension degree (>= 1)
        max_order: Largest supported field order

    Returns:
        FieldSpec for the requested field

    Raises:
        FieldError: If p is not prime, e < 1, or p^e exceeds max_order
    """
    if not is_prime(p):
        raise FieldError(f"Characteristic {p} is not prime")
    if e < 1:
        raise FieldError(f"Extension degree must be >= 1, got {e}")
    if p ** e > max_order:
        raise FieldError(f"GF({p}^{e}) exceeds capacity {max_order}")

    if e == 1:
        return FieldSpec(p, 1, (0, 1))

    for low in itertools.product(range(p), repeat=e):
        modulus = tuple(low) + (1,)
        if _is_irreducible(modulus, p):
            logger.debug("GF(%d^%d) modulus %s", p, e, modulus)
            return FieldSpec(p, e, modulus)
    raise FieldError(f"No irreducible polynomial of degree {e} over Z_{p}")  # unreachable


def field_of_order(q: int, max_order: int = DEFAULT_MAX_ORDER) -> FieldSpec:
    """GF(q) for a prime power q."""
    p, e = prime_power(q)
    return make_field(p, e, max_order)


def elements(f: FieldSpec) -> List[FieldElement]:
    """All elements in index order (0 first, 1 second)."""
    return [f.element(i) for i in range(f.order)]


def arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Apply a named operation.

    Args:
        a: Left operand
        b: Right operand (ignored by 'inv')
        op: One of 'add', 'sub', 'mul', 'inv', 'div'

    Returns:
        Resulting element
    """
    if b is not None:
        a._check(b)
    if op == 'add':
        return a + b
    if op == 'sub':
        return a - b
    if op == 'mul':
        return a * b
    if op == 'inv':
        return a.inverse()
    if op == 'div':
        return a / b
    raise FieldError(f"Unknown operation: {op}")
