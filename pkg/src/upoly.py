"""
Dense univariate polynomials over a field handle.

Polynomials are lists of coefficients, lowest degree first, with no
trailing zeros (the zero polynomial is ``[]``).  The field is any object
with ``add/sub/mul/inv/neg/zero/one/is_zero``; an ``ExactField`` in
practice, but ``exactfield`` itself calls in here with a bare prime-field
handle while it is still checking a modulus, so nothing is imported.
"""
from __future__ import annotations

from typing import Any, Sequence

Coeffs = list[Any]


def trim(a: Sequence[Any], F: Any) -> Coeffs:
    """Drop trailing zero coefficients."""
    out = list(a)
    while out and F.is_zero(out[-1]):
        out.pop()
    return out


def degree(a: Sequence[Any]) -> int:
    """Degree, with ``-1`` for the zero polynomial."""
    return len(a) - 1


def add(a: Sequence[Any], b: Sequence[Any], F: Any) -> Coeffs:
    n = max(len(a), len(b))
    out = [
        F.add(a[i] if i < len(a) else F.zero, b[i] if i < len(b) else F.zero)
        for i in range(n)
    ]
    return trim(out, F)


def sub(a: Sequence[Any], b: Sequence[Any], F: Any) -> Coeffs:
    n = max(len(a), len(b))
    out = [
        F.sub(a[i] if i < len(a) else F.zero, b[i] if i < len(b) else F.zero)
        for i in range(n)
    ]
    return trim(out, F)


def mul(a: Sequence[Any], b: Sequence[Any], F: Any) -> Coeffs:
    if not a or not b:
        return []
    out = [F.zero] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if F.is_zero(ai):
            continue
        for j, bj in enumerate(b):
            out[i + j] = F.add(out[i + j], F.mul(ai, bj))
    return trim(out, F)


def divmod_(a: Sequence[Any], b: Sequence[Any], F: Any) -> tuple[Coeffs, Coeffs]:
    """Quotient and remainder of ``a`` by nonzero ``b``."""
    b = trim(b, F)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = trim(a, F)
    if len(r) < len(b):
        return [], r
    lead_inv = F.inv(b[-1])
    q = [F.zero] * (len(r) - len(b) + 1)
    while len(r) >= len(b):
        shift = len(r) - len(b)
        c = F.mul(r[-1], lead_inv)
        q[shift] = c
        for j, bj in enumerate(b):
            r[shift + j] = F.sub(r[shift + j], F.mul(c, bj))
        r = trim(r, F)
    return trim(q, F), r


def mod(a: Sequence[Any], b: Sequence[Any], F: Any) -> Coeffs:
    return divmod_(a, b, F)[1]


def monic(a: Sequence[Any], F: Any) -> Coeffs:
    """Scale ``a`` so its leading coefficient is one."""
    a = trim(a, F)
    if not a:
        return []
    inv = F.inv(a[-1])
    return [F.mul(c, inv) for c in a]


def gcd(a: Sequence[Any], b: Sequence[Any], F: Any) -> Coeffs:
    """Monic gcd (``[]`` when both inputs are zero)."""
    a, b = trim(a, F), trim(b, F)
    while b:
        a, b = b, mod(a, b, F)
    return monic(a, F)


def powmod(base: Sequence[Any], e: int, m: Sequence[Any], F: Any) -> Coeffs:
    """``base ** e`` modulo ``m`` by repeated squaring."""
    result: Coeffs = [F.one]
    base = mod(base, m, F)
    while e > 0:
        if e & 1:
            result = mod(mul(result, base, F), m, F)
        base = mod(mul(base, base, F), m, F)
        e >>= 1
    return mod(result, m, F)


def evaluate(a: Sequence[Any], x: Any, F: Any) -> Any:
    """Horner evaluation of ``a`` at ``x``."""
    acc = F.zero
    for c in reversed(a):
        acc = F.add(F.mul(acc, x), c)
    return acc


def count_roots(g: Sequence[Any], F: Any) -> int:
    """Number of distinct roots of nonzero ``g`` in the finite field ``F``.

    deg gcd(g, y^q - y).  Raises ``ValueError`` for the zero polynomial,
    whose root set is the whole field; callers decide what that means.
    """
    g = trim(g, F)
    if not g:
        raise ValueError("zero polynomial has every element as a root")
    if len(g) == 1:
        return 0
    y = [F.zero, F.one]
    yq = powmod(y, F.cardinality(), g, F)
    return degree(gcd(sub(yq, y, F), g, F))
