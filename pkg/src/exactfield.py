"""
Exact field arithmetic over ℚ, prime fields 𝔽_p and extensions 𝔽_{p^k}.

A field is a *handle* (``ExactField``) that operates on raw element values,
not an element class: the linear algebra and series code pass thousands of
coefficients around and wrapping each one in an object costs more than the
arithmetic.  Element representations:

* rationals: ``fractions.Fraction`` (always reduced, positive denominator)
* prime: ``int`` residue in ``[0, p)``
* extension: ``int`` code ``c_0 + c_1 p + … + c_{k-1} p^{k-1}`` packing the
  coefficient sequence of the residue polynomial; ``coefficients(x)``
  unpacks it.  Multiplication goes through log/exp tables built once per
  handle, so every finite-field product is two lookups.

Handles are immutable, compare equal when their specs are equal, and pickle
by spec (tables are rebuilt on the other side), so they can be shipped to
worker processes.

Field strings used by the CLI: ``Q``, ``F5``, ``F2^4`` and ``F16`` (a prime
power; the modulus comes from ``config.IRREDUCIBLE_MODULI``).
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Iterator

import numpy as np
import sympy

import upoly
from config import IRREDUCIBLE_MODULI, MAX_EXTENSION_ORDER, RATIONAL_HEIGHT
from errors import (
    InfiniteField,
    NonPrimeModulus,
    PreconditionViolated,
    ReducibleModulus,
    UsageError,
)

logger = logging.getLogger(__name__)

# Fraction over Q, int residue or packed int code over a finite field.
FieldElem = Any


class FieldKind(str, Enum):
    RATIONALS = "rationals"
    PRIME = "prime"
    EXTENSION = "extension"


# ---------------------------------------------------------------------------
# Field specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    kind: FieldKind
    p: int = 0
    k: int = 1
    modulus: tuple[int, ...] | None = None  # monic, low -> high, length k + 1

    @property
    def characteristic(self) -> int:
        return 0 if self.kind is FieldKind.RATIONALS else self.p

    @property
    def cardinality(self) -> int | None:
        if self.kind is FieldKind.RATIONALS:
            return None
        return self.p ** self.k

    def label(self) -> str:
        """Short name used in reports: ``Q``, ``F5`` or ``F2^4``."""
        if self.kind is FieldKind.RATIONALS:
            return "Q"
        if self.kind is FieldKind.PRIME:
            return f"F{self.p}"
        return f"F{self.p}^{self.k}"

    @classmethod
    def rationals(cls) -> "FieldSpec":
        return cls(FieldKind.RATIONALS)

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls(FieldKind.PRIME, p=p)

    @classmethod
    def extension(cls, p: int, k: int, modulus: tuple[int, ...] | None = None) -> "FieldSpec":
        """Spec for 𝔽_{p^k}; the default modulus is used unless one is given."""
        if k == 1:
            return cls.prime(p)
        if modulus is None:
            modulus = default_modulus(p, k)
        return cls(FieldKind.EXTENSION, p=p, k=k, modulus=tuple(modulus))

    @classmethod
    def parse(cls, text: str) -> "FieldSpec":
        """Parse ``Q``, ``F<p>``, ``F<p>^<k>`` or ``F<q>`` with q a prime power."""
        s = text.strip().replace(" ", "")
        if s in ("Q", "QQ"):
            return cls.rationals()
        m = re.fullmatch(r"F(\d+)(?:\^(\d+))?", s)
        if not m:
            raise UsageError(f"unrecognised field {text!r} (expected Q, F5, F2^4 or F16)")
        base = int(m.group(1))
        if m.group(2) is not None:
            k = int(m.group(2))
            if k < 1:
                raise UsageError(f"extension degree must be positive in {text!r}")
            if not sympy.isprime(base):
                raise UsageError(f"{base} is not prime in {text!r}")
            return cls.extension(base, k)
        if base < 2:
            raise UsageError(f"no field with {base} elements")
        factors = sympy.factorint(base)
        if len(factors) != 1:
            raise UsageError(f"{base} is not a prime power")
        (p, k), = factors.items()
        return cls.extension(int(p), int(k))


def parse_tower(text: str) -> list[FieldSpec]:
    """Parse a comma-separated tower such as ``F2,F4,F16``."""
    specs = [FieldSpec.parse(part) for part in text.split(",") if part.strip()]
    if not specs:
        raise UsageError("empty tower")
    return specs


# ---------------------------------------------------------------------------
# Moduli
# ---------------------------------------------------------------------------

class _PrimeOps:
    """Bare 𝔽_p arithmetic for modulus checks (no tables, no validation)."""

    def __init__(self, p: int) -> None:
        self.p = p
        self.zero = 0
        self.one = 1

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        return pow(a, -1, self.p)

    def is_zero(self, a: int) -> bool:
        return a % self.p == 0

    def cardinality(self) -> int:
        return self.p


def is_irreducible(modulus: tuple[int, ...], p: int) -> bool:
    """Rabin's test for a monic polynomial over 𝔽_p."""
    F = _PrimeOps(p)
    f = upoly.trim([c % p for c in modulus], F)
    k = upoly.degree(f)
    if k < 1 or f[-1] != 1:
        return False
    if k == 1:
        return True
    t = [0, 1]
    # t^(p^k) == t mod f
    x = t
    for _ in range(k):
        x = upoly.powmod(x, p, f, F)
    if upoly.sub(x, t, F):
        return False
    for ell in sympy.primefactors(k):
        x = t
        for _ in range(k // ell):
            x = upoly.powmod(x, p, f, F)
        g = upoly.gcd(upoly.sub(x, t, F), f, F)
        if upoly.degree(g) != 0:
            return False
    return True


@lru_cache(maxsize=None)
def default_modulus(p: int, k: int) -> tuple[int, ...]:
    """Table entry for (p, k), else the smallest monic irreducible by search."""
    if (p, k) in IRREDUCIBLE_MODULI:
        return IRREDUCIBLE_MODULI[(p, k)]
    # Lexicographic in the base-p code of the lower coefficients.
    for code in range(p ** k):
        low = [(code // p ** i) % p for i in range(k)]
        cand = tuple(low) + (1,)
        if low[0] != 0 and is_irreducible(cand, p):
            logger.debug(f"Searched modulus for F{p}^{k}: {cand}")
            return cand
    raise ReducibleModulus(f"no irreducible polynomial of degree {k} over F{p}")


# ---------------------------------------------------------------------------
# Field handle
# ---------------------------------------------------------------------------

class ExactField:
    """Arithmetic handle for one field.  See module docstring."""

    def __init__(self, spec: FieldSpec) -> None:
        """Validate the spec and, for extensions, build the log/exp tables."""
        self.spec = spec
        self.kind = spec.kind
        self.p = spec.p
        self.k = spec.k
        self._exp: list[int] = []
        self._log: list[int] = []
        if spec.kind is FieldKind.RATIONALS:
            self.zero: FieldElem = Fraction(0)
            self.one: FieldElem = Fraction(1)
            return
        if spec.p < 2 or not sympy.isprime(spec.p):
            raise NonPrimeModulus(f"{spec.p} is not prime")
        self.zero = 0
        self.one = 1
        self.q = spec.p ** spec.k
        if spec.kind is FieldKind.EXTENSION:
            if spec.modulus is None or len(spec.modulus) != spec.k + 1:
                raise ReducibleModulus(f"modulus of {spec.label()} must have degree {spec.k}")
            if not is_irreducible(spec.modulus, spec.p):
                raise ReducibleModulus(f"{spec.modulus} is reducible over F{spec.p}")
            if self.q > MAX_EXTENSION_ORDER:
                raise PreconditionViolated(
                    f"{spec.label()} has {self.q} elements; tables are capped at {MAX_EXTENSION_ORDER}"
                )
            self._build_tables()

    # -- identity ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ExactField) and other.spec == self.spec

    def __hash__(self) -> int:
        return hash(self.spec)

    def __repr__(self) -> str:
        return f"ExactField({self.spec.label()})"

    def __reduce__(self):
        """Pickle as a spec so worker processes share the cached handle."""
        return (field_create, (self.spec,))

    def label(self) -> str:
        return self.spec.label()

    def characteristic(self) -> int:
        return self.spec.characteristic

    def is_finite(self) -> bool:
        return self.kind is not FieldKind.RATIONALS

    def cardinality(self) -> int:
        """Number of elements; raises ``InfiniteField`` over Q."""
        if not self.is_finite():
            raise InfiniteField("Q has no finite cardinality")
        return self.q

    # -- extension internals ----------------------------------------------

    def _poly_mul_code(self, a: int, b: int) -> int:
        """Slow schoolbook product of two codes, reduced by the modulus."""
        p, k, mod = self.p, self.k, self.spec.modulus
        da = [(a // p ** i) % p for i in range(k)]
        db = [(b // p ** i) % p for i in range(k)]
        prod = [0] * (2 * k - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        for d in range(2 * k - 2, k - 1, -1):
            c = prod[d]
            if c:
                for j in range(k + 1):
                    prod[d - k + j] = (prod[d - k + j] - c * mod[j]) % p
        return sum(prod[i] * p ** i for i in range(k))

    def _code_pow(self, a: int, e: int) -> int:
        """Power of a code by repeated squaring, before the tables exist."""
        result, base = 1, a
        while e:
            if e & 1:
                result = self._poly_mul_code(result, base)
            base = self._poly_mul_code(base, base)
            e >>= 1
        return result

    def _build_tables(self) -> None:
        """Find a primitive element and tabulate its powers."""
        order = self.q - 1
        primes = sympy.primefactors(order)
        gen = None
        for cand in range(2, self.q):
            if all(self._code_pow(cand, order // ell) != 1 for ell in primes):
                gen = cand
                break
        if gen is None:
            raise ReducibleModulus(f"no primitive element in {self.label()}")
        exp = [0] * order
        log = [0] * self.q
        x = 1
        for e in range(order):
            exp[e] = x
            log[x] = e
            x = self._poly_mul_code(x, gen)
        self._exp, self._log = exp, log
        logger.debug(f"Built log/exp tables for {self.label()} (generator code {gen})")

    # -- arithmetic ---------------------------------------------------------

    def add(self, a: FieldElem, b: FieldElem) -> FieldElem:
        """Field sum; extensions add residue digits."""
        if self.kind is FieldKind.RATIONALS:
            return a + b
        if self.kind is FieldKind.PRIME:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return self._digitwise(a, b, 1)

    def sub(self, a: FieldElem, b: FieldElem) -> FieldElem:
        if self.kind is FieldKind.RATIONALS:
            return a - b
        if self.kind is FieldKind.PRIME:
            return (a - b) % self.p
        if self.p == 2:
            return a ^ b
        return self._digitwise(a, b, -1)

    def _digitwise(self, a: int, b: int, sign: int) -> int:
        """Digit-by-digit sum (sign 1) or difference (sign -1) of two extension codes."""
        p = self.p
        out, scale = 0, 1
        for _ in range(self.k):
            out += ((a % p + sign * (b % p)) % p) * scale
            a //= p
            b //= p
            scale *= p
        return out

    def neg(self, a: FieldElem) -> FieldElem:
        return self.sub(self.zero, a)

    def mul(self, a: FieldElem, b: FieldElem) -> FieldElem:
        if self.kind is FieldKind.RATIONALS:
            return a * b
        if self.kind is FieldKind.PRIME:
            return (a * b) % self.p
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv(self, a: FieldElem) -> FieldElem:
        """Multiplicative inverse; raises ``ZeroDivisionError`` on zero."""
        if self.is_zero(a):
            raise ZeroDivisionError(f"inverse of zero in {self.label()}")
        if self.kind is FieldKind.RATIONALS:
            return 1 / a
        if self.kind is FieldKind.PRIME:
            return pow(a, -1, self.p)
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def div(self, a: FieldElem, b: FieldElem) -> FieldElem:
        return self.mul(a, self.inv(b))

    def pow(self, a: FieldElem, e: int) -> FieldElem:
        """Integer power, negative exponents through the inverse."""
        if e < 0:
            return self.pow(self.inv(a), -e)
        if self.kind is FieldKind.RATIONALS:
            return a ** e
        if self.kind is FieldKind.PRIME:
            return pow(a, e, self.p)
        if a == 0:
            return 1 if e == 0 else 0
        return self._exp[(self._log[a] * e) % (self.q - 1)]

    def is_zero(self, a: FieldElem) -> bool:
        return a == 0

    def eq(self, a: FieldElem, b: FieldElem) -> bool:
        return a == b

    # -- conversions ----------------------------------------------------------

    def from_int(self, n: int) -> FieldElem:
        if self.kind is FieldKind.RATIONALS:
            return Fraction(n)
        return n % self.p

    def from_fraction(self, x: Fraction | int) -> FieldElem:
        """Image of a rational; raises ``PreconditionViolated`` when p divides the denominator."""
        x = Fraction(x)
        if self.kind is FieldKind.RATIONALS:
            return x
        if x.denominator % self.p == 0:
            raise PreconditionViolated(f"{x} has no image in {self.label()}")
        return self.div(self.from_int(x.numerator), self.from_int(x.denominator))

    def from_literal(self, x: Fraction, text: str) -> FieldElem:
        """A user-typed rational; a denominator divisible by p is an input error."""
        try:
            return self.from_fraction(x)
        except PreconditionViolated as exc:
            raise UsageError(f"{text!r}: {exc}") from exc

    def coefficients(self, a: FieldElem) -> tuple[int, ...]:
        """Residue-polynomial coefficients (low -> high) of a finite-field element."""
        if self.kind is FieldKind.RATIONALS:
            raise InfiniteField("rational elements have no coefficient sequence")
        return tuple((a // self.p ** i) % self.p for i in range(self.k))

    def from_coefficients(self, coeffs: tuple[int, ...]) -> FieldElem:
        """Code of the residue polynomial with the given coefficients, low degree first."""
        if self.kind is FieldKind.RATIONALS:
            raise InfiniteField("rational elements have no coefficient sequence")
        return sum((c % self.p) * self.p ** i for i, c in enumerate(coeffs[: self.k]))

    def parse_element(self, text: str) -> FieldElem:
        """Parse ``3``, ``-1/2`` or (extensions) a polynomial in ``t`` such as ``t^2+1``."""
        s = text.strip()
        try:
            value = Fraction(s)
        except ValueError:
            value = None
        if value is not None:
            return self.from_literal(value, text)
        if self.kind is not FieldKind.EXTENSION:
            raise UsageError(f"cannot read {text!r} as an element of {self.label()}")
        t = sympy.Symbol("t")
        try:
            expr = sympy.sympify(s.replace("^", "**"), locals={"t": t})
            coeffs = sympy.Poly(expr, t).all_coeffs()[::-1]
        except (sympy.SympifyError, sympy.PolynomialError, TypeError) as exc:
            raise UsageError(f"cannot read {text!r} as an element of {self.label()}") from exc
        acc = self.zero
        t_pow = self.one
        t_code = self.p  # the code of t itself
        for c in coeffs:
            acc = self.add(acc, self.mul(self.from_literal(Fraction(int(c.p), int(c.q)), text), t_pow))
            t_pow = self.mul(t_pow, t_code)
        return acc

    def format(self, a: FieldElem) -> str:
        """Human-readable element; extension codes print as polynomials in ``t``."""
        if self.kind is not FieldKind.EXTENSION:
            return str(a)
        if a == 0:
            return "0"
        parts = []
        for i, c in reversed(list(enumerate(self.coefficients(a)))):
            if not c:
                continue
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            if not mono:
                parts.append(str(c))
            else:
                parts.append(mono if c == 1 else f"{c}*{mono}")
        return "+".join(parts)

    def to_json(self, a: FieldElem) -> Any:
        """Rationals as strings, finite-field codes as ints."""
        if self.kind is FieldKind.RATIONALS:
            return str(a)
        return int(a)

    # -- enumeration and sampling ---------------------------------------------

    def elements(self) -> Iterator[FieldElem]:
        """Every element once, in code order (stable across runs)."""
        if not self.is_finite():
            raise InfiniteField("cannot enumerate Q")
        return iter(range(self.q))

    def random_element(self, rng: np.random.Generator, height: int = RATIONAL_HEIGHT) -> FieldElem:
        """Uniform element of a finite field, or an integer in [-height, height] over Q."""
        if self.kind is FieldKind.RATIONALS:
            return Fraction(int(rng.integers(-height, height + 1)))
        return int(rng.integers(0, self.q))

    def random_nonzero(self, rng: np.random.Generator, height: int = RATIONAL_HEIGHT) -> FieldElem:
        """Like ``random_element`` but never zero."""
        while True:
            x = self.random_element(rng, height)
            if not self.is_zero(x):
                return x

    # -- squares ----------------------------------------------------------------

    def is_square(self, a: FieldElem) -> bool:
        """Quadratic-residue test; everything is a square in characteristic 2."""
        if self.is_zero(a):
            return True
        if self.kind is FieldKind.RATIONALS:
            return a > 0 and _is_int_square(a.numerator) and _is_int_square(a.denominator)
        if self.p == 2:
            return True
        return self.pow(a, (self.q - 1) // 2) == 1

    def sqrt(self, a: FieldElem) -> FieldElem:
        """A square root of ``a``; the unique one in characteristic 2."""
        if self.is_zero(a):
            return self.zero
        if not self.is_square(a):
            raise PreconditionViolated(f"{self.format(a)} is not a square in {self.label()}")
        if self.kind is FieldKind.RATIONALS:
            return Fraction(sympy.integer_nthroot(a.numerator, 2)[0],
                            sympy.integer_nthroot(a.denominator, 2)[0])
        if self.p == 2:
            # Frobenius is bijective; its inverse is x -> x^(q/2).
            return self.pow(a, self.q // 2)
        if self.kind is FieldKind.EXTENSION:
            return self._exp[self._log[a] // 2]
        return int(sympy.sqrt_mod(a, self.p))

    def non_square(self) -> FieldElem:
        """The fixed non-square ε of an odd finite field (smallest code)."""
        if not self.is_finite() or self.p == 2:
            raise PreconditionViolated(f"{self.label()} has no distinguished non-square")
        for x in range(1, self.q):
            if not self.is_square(x):
                return x
        raise PreconditionViolated("no non-square found")  # unreachable for odd q

    # -- vectorised arithmetic on numpy code arrays ---------------------------

    def _np_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """Log/exp tables as int64 arrays, built on first use."""
        if not hasattr(self, "_np_cache"):
            self._np_cache = (np.asarray(self._exp, dtype=np.int64),
                              np.asarray(self._log, dtype=np.int64))
        return self._np_cache

    def vec_add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise sum of two code arrays."""
        if self.kind is FieldKind.PRIME:
            return (a + b) % self.p
        if self.p == 2:
            return np.bitwise_xor(a, b)
        out = np.zeros_like(a)
        scale = 1
        for _ in range(self.k):
            out += (((a // scale) % self.p + (b // scale) % self.p) % self.p) * scale
            scale *= self.p
        return out

    def vec_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise product of two code arrays."""
        if self.kind is FieldKind.PRIME:
            return (a * b) % self.p
        exp, log = self._np_tables()
        out = exp[(log[a] + log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def vec_scale(self, c: FieldElem, a: np.ndarray) -> np.ndarray:
        return self.vec_mul(np.full_like(a, c), a)

    def vec_neg(self, a: np.ndarray) -> np.ndarray:
        """Elementwise negation of a code array."""
        if self.kind is FieldKind.PRIME:
            return (-a) % self.p
        if self.p == 2:
            return a.copy()
        out = np.zeros_like(a)
        scale = 1
        for _ in range(self.k):
            out += ((-(a // scale)) % self.p) * scale
            scale *= self.p
        return out

    def vec_sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.vec_add(a, self.vec_neg(b))

    def vec_inv(self, a: np.ndarray) -> np.ndarray:
        """Elementwise inverse; zero entries map to zero."""
        if self.kind is FieldKind.PRIME:
            table = np.array([0] + [pow(x, -1, self.p) for x in range(1, self.p)], dtype=np.int64)
            return table[a]
        exp, log = self._np_tables()
        return np.where(a == 0, 0, exp[(-log[a]) % (self.q - 1)])


def _is_int_square(n: int) -> bool:
    return n >= 0 and sympy.integer_nthroot(n, 2)[1]


@lru_cache(maxsize=None)
def field_create(spec: FieldSpec) -> ExactField:
    """Cached handle per spec; tables are built once per process."""
    return ExactField(spec)


def field_enumerate(field: ExactField) -> list[FieldElem]:
    """All elements of a finite field in code order."""
    return list(field.elements())


def parse_field(text: str) -> ExactField:
    """Field handle for a label such as ``Q``, ``F3`` or ``F2^3``."""
    return field_create(FieldSpec.parse(text))
