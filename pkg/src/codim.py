"""
Closed-form codimension and nonemptiness evaluators.

Every evaluator returns ``None`` for an empty stratum and an ``int``
codimension otherwise; "empty" and "codimension 0" are never conflated.

Strata covered:

* Σ^i of a general map 𝔸^n → 𝔸^r                   ``crit_codim``
* Σ^{i,j} second-order strata                       ``second_order_codim``
* the bad locus B^i                                 ``bad_locus_codim``
* Δ^{i,p} for constrained bilinear data             ``delta_nonempty`` / ``delta_codim``
* rank strata of symmetric/alternating forms        ``box_rank_stratum_codim``
* the first degeneracy locus of such forms          ``first_degeneracy_codim``
* the integer minimisation behind the last one      ``minimize_C`` / ``brute_force_min_C``

Alternating forms have even rank, and a family of them cannot have a
common radical of codimension one, so for ``box_alt`` the nonemptiness
predicates also exclude a − p = 1 (resp. e − i = 1) whatever f is.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import pandas as pd

from errors import EmptyRegion, PreconditionViolated

logger = logging.getLogger(__name__)


class Symmetry(str, Enum):
    BOX_SYM = "box_sym"   # Sym^2: symmetric blocks
    BOX_ALT = "box_alt"   # wedge^2: alternating blocks

    @classmethod
    def parse(cls, text: str) -> "Symmetry":
        """Accept the enum values and the aliases sym/alt, plus/minus and +/-."""
        key = text.strip().lower()
        aliases = {"sym": cls.BOX_SYM, "symmetric": cls.BOX_SYM, "plus": cls.BOX_SYM, "+": cls.BOX_SYM,
                   "alt": cls.BOX_ALT, "alternating": cls.BOX_ALT, "minus": cls.BOX_ALT, "-": cls.BOX_ALT}
        if key in aliases:
            return aliases[key]
        return cls(key)

    @property
    def sign(self) -> int:
        return 1 if self is Symmetry.BOX_SYM else -1


# ---------------------------------------------------------------------------
# Parameter bundles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StratumSpec:
    n: int
    r: int
    i: int
    j: int = 0
    char: int = 0

    def __post_init__(self) -> None:
        if min(self.n, self.r, self.i, self.j, self.char) < 0:
            raise PreconditionViolated(f"negative parameter in {self}")

    @property
    def m(self) -> int:
        return min(self.n, self.r)


@dataclass(frozen=True)
class DeltaSpec:
    e: int
    a: int
    f: int
    i: int
    p: int
    sym: Symmetry

    def __post_init__(self) -> None:
        if min(self.e, self.a, self.f) < 0 or self.a > self.e:
            raise PreconditionViolated(f"need 0 <= a <= e and f >= 0 in {self}")

    @property
    def n(self) -> int:
        return min(self.e, self.a * self.f) - self.i

    @property
    def ambient_dim(self) -> int:
        return ambient_dim(self.e, self.a, self.f, self.sym)


def ambient_dim(e: int, a: int, f: int, sym: Symmetry) -> int:
    """Free coordinates of the constrained maps E → Hom(A, F)."""
    return f * (a * (a + sym.sign) // 2 + a * (e - a))


@dataclass(frozen=True)
class CMinSpec:
    e: int
    a: int
    f: int
    sign: Symmetry

    def __post_init__(self) -> None:
        if self.a < 1 or self.f < 1 or self.a * self.f > self.e:
            raise PreconditionViolated(f"need a >= 1, f >= 1, af <= e in {self}")

    @property
    def parity_restricted(self) -> bool:
        """Alternating single forms only have even rank."""
        return self.sign is Symmetry.BOX_ALT and self.f == 1

    def admissible(self, i: int, p: int) -> bool:
        """Whether (i, p) lies in the region C is minimised over."""
        e, a, f = self.e, self.a, self.f
        if not 1 <= i <= a * f:
            return False
        if not max(a - a * f + i, 0) <= p <= min(a, e - a * f + i):
            return False
        return not self.parity_restricted or (p - a) % 2 == 0

    def region(self) -> Iterator[tuple[int, int]]:
        """Admissible lattice points in (i, p) order."""
        for i in range(1, self.a * self.f + 1):
            for p in range(0, self.a + 1):
                if self.admissible(i, p):
                    yield i, p


# ---------------------------------------------------------------------------
# Critical and second-order strata
# ---------------------------------------------------------------------------

def crit_codim(n: int, r: int, i: int) -> int | None:
    """Codimension of the corank-i critical stratum; ``None`` when i is out of range."""
    if i < 0 or i > min(n, r):
        return None
    return i * (abs(n - r) + i)


def second_order_codim(n: int, r: int, i: int, j: int, char: int) -> int | None:
    """Codimension of the second-order stratum with symbol (i, j), or ``None`` when it is empty."""
    m = min(n, r)
    if i < 0 or j < 0 or i > m or j > n - m + i:
        return None
    if i == 0 and j != 0:
        return None
    if char == 2 and i == 1 and r <= n and (n - m + i - j) % 2:
        return None
    sign = -1 if char == 2 else 1
    return (i * (abs(n - r) + i)
            + j * (n - m + i - j) * (r - m + i - 1)
            + j * (j + sign) * (r - m + i) // 2)


def bad_locus_codim(n: int, r: int, i: int, char: int) -> int | None:
    """Codimension of the bad locus inside the corank-i stratum."""
    if i <= 0 or i > min(n, r):
        return None
    c = i * (abs(n - r) + i)
    if n < c:
        return c  # the whole stratum is bad
    if char == 2 and i == 1 and (r >= n or (r == 1 and n % 2 == 1)):
        return n
    return n + 1


# ---------------------------------------------------------------------------
# Constrained bilinear strata
# ---------------------------------------------------------------------------

def delta_nonempty(spec: DeltaSpec) -> bool:
    """Whether the constrained stratum Δ^{i,p} has any points."""
    n, a, e = spec.n, spec.a, spec.e
    if spec.i < 0 or n < 0:
        return False
    if not max(a - n, 0) <= spec.p <= min(a, e - n):
        return False
    if spec.sym is Symmetry.BOX_ALT:
        rest = a - spec.p
        if spec.f == 1 and rest % 2:
            return False
        if rest == 1:
            return False
    return True


def delta_codim(spec: DeltaSpec) -> int | None:
    """Codimension of Δ^{i,p} in the space of constrained maps; ``None`` when empty."""
    if not delta_nonempty(spec):
        return None
    n, a, e, f, p = spec.n, spec.a, spec.e, spec.f, spec.p
    s = spec.sym.sign
    return p * (n - a + p) + f * ((-p * p + s * p) // 2 + (e - n) * a) - n * (e - n)


def box_rank_stratum_codim(e: int, f: int, i: int, sym: Symmetry) -> int | None:
    """Codimension of the corank-i stratum of f-tuples of forms on an e-space."""
    if i < 0 or i > e:
        return None
    if sym is Symmetry.BOX_ALT:
        if f == 1 and (e - i) % 2:
            return None
        if e - i == 1:
            return None
    return i * (e - i) * (f - 1) + i * (i + sym.sign) * f // 2


def first_degeneracy_codim(e: int, a: int, f: int, sym: Symmetry) -> int:
    """Codimension of the first degenerate stratum of the constrained maps."""
    if a * f > e:
        raise PreconditionViolated(f"first degeneracy needs af <= e (a={a}, f={f}, e={e})")
    if sym is Symmetry.BOX_ALT:
        keeps_extra = a > 1 and (f != 1 or (a == e and e % 2 == 0))
        if not keeps_extra:
            return e - a * f
    return e - a * f + 1


# ---------------------------------------------------------------------------
# The minimisation
# ---------------------------------------------------------------------------

def c_value(spec: CMinSpec, i: int, p: int) -> int:
    """C(i, p) for the lattice point given, as an integer."""
    e, a, f = spec.e, spec.a, spec.f
    s = spec.sign.sign
    n = a * f - i
    return p * (n - a + p) + f * ((-p * p + s * p) // 2 + (e - n) * a) - n * (e - n)


def _closed_form_value(spec: CMinSpec) -> int:
    e, a, f = spec.e, spec.a, spec.f
    base = e - a * f
    if spec.sign is Symmetry.BOX_SYM:
        return base + 1
    if f > 1:
        return base + 1 if a > 1 else base
    return base + 1 if (a == e and e % 2 == 0) else base


def _boundary_points(spec: CMinSpec) -> list[tuple[int, int]]:
    """The two boundary segments where C is minimised (C increases in i)."""
    e, a, f = spec.e, spec.a, spec.f
    seg1 = [(1, p) for p in range(max(a - a * f + 1, 0), min(a, e - a * f + 1) + 1)]
    seg2 = [(i, e - a * f + i) for i in range(1, (f + 1) * a - e + 1)]
    return sorted(pt for pt in set(seg1 + seg2) if spec.admissible(*pt))


def minimize_C(spec: CMinSpec) -> tuple[int, tuple[int, int]]:
    """Closed-form minimum of C over the region, with a witness lattice point."""
    value = _closed_form_value(spec)
    candidates = _boundary_points(spec)
    if not candidates:
        raise EmptyRegion(f"no admissible lattice point for {spec}")
    witness = next((pt for pt in candidates if c_value(spec, *pt) == value), None)
    if witness is None:
        raise PreconditionViolated(f"closed form {value} not attained on the boundary for {spec}")
    return value, witness


def brute_force_min_C(spec: CMinSpec) -> tuple[int, list[tuple[int, int]]]:
    """Minimum of C by exhaustion over the region, with every point attaining it."""
    values = {pt: c_value(spec, *pt) for pt in spec.region()}
    if not values:
        raise EmptyRegion(f"no admissible lattice point for {spec}")
    best = min(values.values())
    return best, sorted(pt for pt, v in values.items() if v == best)


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

def codim_grid(max_dim: int, char: int = 0) -> pd.DataFrame:
    """Critical, second-order and bad-locus codimensions for n, r ≤ max_dim."""
    rows = []
    for n in range(1, max_dim + 1):
        for r in range(1, max_dim + 1):
            for i in range(0, min(n, r) + 1):
                for j in range(0, n - min(n, r) + i + 1):
                    rows.append({
                        "n": n, "r": r, "i": i, "j": j, "char": char,
                        "crit": crit_codim(n, r, i),
                        "second_order": second_order_codim(n, r, i, j, char),
                        "bad_locus": bad_locus_codim(n, r, i, char),
                    })
    return pd.DataFrame(rows)
