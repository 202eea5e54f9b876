"""
Sparse multivariate polynomials and truncated power series.

``Poly`` is an exact polynomial; ``TruncatedSeries`` is the same thing
living in k[[x]]/⟨x⟩^(N+1): every result is cut back to total degree ≤ N.
Terms are a dict ``exponent tuple -> nonzero coefficient`` kept in
graded-reverse-lexicographic order (lowest degree first) so iteration, and
therefore every Macaulay matrix built downstream, is deterministic.

Also here: ``PolyMap`` (a tuple of component polynomials), the 2-jet at a
point (``Jet2`` / ``jet2_at``) and the text parser used by the CLI.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb
from typing import Any, Iterable, Mapping, Sequence

import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from errors import DimensionMismatch, NonzeroConstantTerm, UsageError
from exactfield import ExactField
from linalg import Matrix

logger = logging.getLogger(__name__)

Exp = tuple[int, ...]


def grevlex_key(e: Exp) -> tuple:
    """Ascending sort key: total degree, then graded reverse lex."""
    return (sum(e), tuple(-x for x in reversed(e)))


def monomials(nvars: int, max_degree: int, min_degree: int = 0) -> list[Exp]:
    """All exponents with ``min_degree <= |e| <= max_degree``, grevlex ascending."""
    out: list[Exp] = []
    for d in range(max(min_degree, 0), max_degree + 1):
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for v in combo:
                e[v] += 1
            out.append(tuple(e))
    out.sort(key=grevlex_key)
    return out


def unit_exp(nvars: int, i: int, power: int = 1) -> Exp:
    """Exponent of x_i^power in nvars variables."""
    return tuple(power if j == i else 0 for j in range(nvars))


def _exp_add(a: Exp, b: Exp) -> Exp:
    return tuple(x + y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

class Poly:
    """Exact polynomial over an ``ExactField``.  Treat as immutable."""

    trunc_order: int | None = None

    def __init__(self, field: ExactField, nvars: int, terms: Mapping[Exp, Any] | Iterable[tuple[Exp, Any]] = ()) -> None:
        """Sum duplicate exponents and drop zero coefficients; terms are kept in grevlex order."""
        self.field = field
        self.nvars = nvars
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Exp, Any] = {}
        for e, c in items:
            e = tuple(e)
            if len(e) != nvars:
                raise DimensionMismatch(f"exponent {e} in a {nvars}-variable polynomial")
            if self.trunc_order is not None and sum(e) > self.trunc_order:
                continue
            acc[e] = field.add(acc[e], c) if e in acc else c
        self.terms: dict[Exp, Any] = {
            e: acc[e] for e in sorted(acc, key=grevlex_key) if not field.is_zero(acc[e])
        }

    # -- construction helpers -----------------------------------------------

    def _like(self, terms: Mapping[Exp, Any] | Iterable[tuple[Exp, Any]], other: "Poly | None" = None) -> "Poly":
        """Same kind as ``self``: a series keeps the smaller of the two truncation orders."""
        order = self.trunc_order
        if other is not None and other.trunc_order is not None:
            order = other.trunc_order if order is None else min(order, other.trunc_order)
        if order is None:
            return Poly(self.field, self.nvars, terms)
        return TruncatedSeries(self.field, self.nvars, order, terms)

    @classmethod
    def constant(cls, field: ExactField, nvars: int, c: Any) -> "Poly":
        return Poly(field, nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, field: ExactField, nvars: int, i: int) -> "Poly":
        return Poly(field, nvars, {unit_exp(nvars, i): field.one})

    @classmethod
    def zero(cls, field: ExactField, nvars: int) -> "Poly":
        return Poly(field, nvars, {})

    # -- queries ---------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Poly) and other.field == self.field
                and other.nvars == self.nvars and other.terms == self.terms)

    def __hash__(self) -> int:
        return hash((self.nvars, tuple(self.terms.items())))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.format()!r})"

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, e: Exp) -> Any:
        return self.terms.get(tuple(e), self.field.zero)

    def constant_term(self) -> Any:
        return self.coefficient((0,) * self.nvars)

    def degree(self) -> int:
        """Total degree, ``-1`` for zero."""
        return max((sum(e) for e in self.terms), default=-1)

    def order(self) -> int | None:
        """Lowest total degree of a term, ``None`` for zero."""
        return min((sum(e) for e in self.terms), default=None)

    def variables(self) -> set[int]:
        """Indices of the variables that occur."""
        return {i for e in self.terms for i, x in enumerate(e) if x}

    def homogeneous_part(self, d: int) -> "Poly":
        """Terms of total degree exactly d."""
        return self._like((e, c) for e, c in self.terms.items() if sum(e) == d)

    def truncate(self, N: int) -> "TruncatedSeries":
        """This polynomial as a series truncated at order N."""
        return TruncatedSeries(self.field, self.nvars, N, self.terms)

    def as_poly(self) -> "Poly":
        return Poly(self.field, self.nvars, self.terms)

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "Poly") -> None:
        if other.field != self.field or other.nvars != self.nvars:
            raise DimensionMismatch(
                f"{self.field.label()}[{self.nvars} vars] vs {other.field.label()}[{other.nvars} vars]"
            )

    def add(self, other: "Poly") -> "Poly":
        """Sum; a truncated operand truncates the result."""
        self._check(other)
        return self._like(list(self.terms.items()) + list(other.terms.items()), other)

    def sub(self, other: "Poly") -> "Poly":
        return self.add(other.neg())

    def neg(self) -> "Poly":
        F = self.field
        return self._like((e, F.neg(c)) for e, c in self.terms.items())

    def scale(self, c: Any) -> "Poly":
        F = self.field
        return self._like((e, F.mul(c, x)) for e, x in self.terms.items())

    def mul(self, other: "Poly") -> "Poly":
        """Product, skipping terms past the truncation order."""
        self._check(other)
        F = self.field
        limit = self.trunc_order
        if other.trunc_order is not None:
            limit = other.trunc_order if limit is None else min(limit, other.trunc_order)
        right = [(sum(e), e, c) for e, c in other.terms.items()]  # degree ascending
        acc: dict[Exp, Any] = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for d2, e2, c2 in right:
                if limit is not None and d1 + d2 > limit:
                    break
                e = _exp_add(e1, e2)
                v = F.mul(c1, c2)
                acc[e] = F.add(acc[e], v) if e in acc else v
        return self._like(acc, other)

    def pow(self, k: int) -> "Poly":
        """k-th power by repeated squaring."""
        result = self._like({(0,) * self.nvars: self.field.one})
        base = self
        while k:
            if k & 1:
                result = result.mul(base)
            base = base.mul(base)
            k >>= 1
        return result

    __add__ = add
    __sub__ = sub
    __mul__ = mul
    __neg__ = neg

    # -- calculus -----------------------------------------------------------

    def derive(self, i: int) -> "Poly":
        """Formal partial derivative; m·x^(m-1) with m reduced in the field."""
        if not 0 <= i < self.nvars:
            raise DimensionMismatch(f"variable {i} out of range for {self.nvars} variables")
        F = self.field
        out = []
        for e, c in self.terms.items():
            m = e[i]
            if m:
                out.append((e[:i] + (m - 1,) + e[i + 1:], F.mul(F.from_int(m), c)))
        return self._like(out)

    def evaluate(self, point: Sequence[Any]) -> Any:
        """Value at a point of the field."""
        if len(point) != self.nvars:
            raise DimensionMismatch(f"point of length {len(point)} for {self.nvars} variables")
        F = self.field
        acc = F.zero
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v = F.mul(v, F.pow(x, k))
            acc = F.add(acc, v)
        return acc

    def shift(self, x0: Sequence[Any]) -> "Poly":
        """The Taylor shift u -> F(x0 + u)."""
        if len(x0) != self.nvars:
            raise DimensionMismatch(f"point of length {len(x0)} for {self.nvars} variables")
        F = self.field
        acc: dict[Exp, Any] = {}
        for e, c in self.terms.items():
            # product over variables of sum_k C(e_i, k) x0_i^(e_i - k) u_i^k
            partial: list[tuple[Exp, Any]] = [((), c)]
            for i, m in enumerate(e):
                nxt = []
                for k in range(m + 1):
                    factor = F.mul(F.from_int(comb(m, k)), F.pow(x0[i], m - k))
                    if F.is_zero(factor):
                        continue
                    for pe, pc in partial:
                        nxt.append((pe + (k,), F.mul(pc, factor)))
                partial = nxt
            for pe, pc in partial:
                acc[pe] = F.add(acc[pe], pc) if pe in acc else pc
        return self._like(acc)

    def substitute_zero(self, indices: Iterable[int]) -> "Poly":
        """Set the listed variables to zero."""
        idx = set(indices)
        return self._like((e, c) for e, c in self.terms.items() if not any(e[i] for i in idx))

    # -- text ---------------------------------------------------------------

    def format(self, names: Sequence[str] | None = None) -> str:
        """Text in the ``parse_poly`` syntax, highest grevlex term first."""
        if not self.terms:
            return "0"
        F = self.field
        names = names or [f"x{i}" for i in range(self.nvars)]
        parts = []
        for e, c in reversed(list(self.terms.items())):
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            cs = F.format(c)
            if F.kind.value == "extension" and "+" in cs:
                cs = f"({cs})"
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append(f"-{mono}")
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


class TruncatedSeries(Poly):
    """A ``Poly`` in k[[x]]/⟨x⟩^(N+1)."""

    def __init__(self, field: ExactField, nvars: int, trunc_order: int,
                 terms: Mapping[Exp, Any] | Iterable[tuple[Exp, Any]] = ()) -> None:
        self.trunc_order = trunc_order
        super().__init__(field, nvars, terms)


def series_compose(f: Poly, subs: Sequence[Poly], N: int) -> TruncatedSeries:
    """f(subs_1, …, subs_n) truncated at order N.

    Each substituted series must have zero constant term.  Monomial images
    are built incrementally (x^e = x^(e - e_i) · subs_i) and memoised.
    """
    if len(subs) != f.nvars:
        raise DimensionMismatch(f"{len(subs)} substitutions for {f.nvars} variables")
    F = f.field
    m = subs[0].nvars if subs else 0
    for i, s in enumerate(subs):
        if s.field != F:
            raise DimensionMismatch("substitution over a different field")
        if not F.is_zero(s.constant_term()):
            raise NonzeroConstantTerm(f"substitution for x{i} has constant term {F.format(s.constant_term())}")
    tsubs = [TruncatedSeries(F, m, N, s.terms) for s in subs]
    cache: dict[Exp, TruncatedSeries] = {(0,) * f.nvars: TruncatedSeries(F, m, N, {(0,) * m: F.one})}

    def image(e: Exp) -> TruncatedSeries:
        if e in cache:
            return cache[e]
        i = next(j for j, k in enumerate(e) if k)
        prev = e[:i] + (e[i] - 1,) + e[i + 1:]
        val = image(prev).mul(tsubs[i]) if sum(e) <= N else TruncatedSeries(F, m, N)
        cache[e] = val
        return val

    acc: dict[Exp, Any] = {}
    for e, c in f.terms.items():
        if sum(e) > N:
            # every substitution has order >= 1, so this monomial vanishes mod degree N+1
            continue
        for te, tc in image(e).terms.items():
            v = F.mul(c, tc)
            acc[te] = F.add(acc[te], v) if te in acc else v
    return TruncatedSeries(F, m, N, acc)


# ---------------------------------------------------------------------------
# Maps and jets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyMap:
    field: ExactField
    source_dim: int
    components: tuple[Poly, ...]

    def __post_init__(self) -> None:
        for c in self.components:
            if c.nvars != self.source_dim or c.field != self.field:
                raise DimensionMismatch("map components must share field and variables")

    @property
    def target_dim(self) -> int:
        return len(self.components)

    def evaluate(self, x: Sequence[Any]) -> tuple[Any, ...]:
        """Component values at x."""
        return tuple(c.evaluate(x) for c in self.components)

    def jacobian_polys(self) -> list[list[Poly]]:
        """r x n matrix of partial derivatives."""
        return [[c.derive(j) for j in range(self.source_dim)] for c in self.components]

    def shift(self, x0: Sequence[Any]) -> "PolyMap":
        """The map u ↦ F(x0 + u)."""
        return PolyMap(self.field, self.source_dim, tuple(c.shift(x0) for c in self.components))

    def add(self, other: "PolyMap") -> "PolyMap":
        return PolyMap(self.field, self.source_dim,
                       tuple(a.add(b) for a, b in zip(self.components, other.components)))

    def scale(self, c: Any) -> "PolyMap":
        return PolyMap(self.field, self.source_dim, tuple(p.scale(c) for p in self.components))

    def format(self) -> list[str]:
        return [c.format() for c in self.components]


@dataclass(frozen=True)
class Jet2:
    value: tuple[Any, ...]
    jacobian: Matrix
    hessian: tuple[Matrix, ...]  # one symmetric n x n slice per component


def jet2_at(F: PolyMap, x0: Sequence[Any]) -> Jet2:
    """Value, Jacobian and per-component Hessians of F at x0."""
    if len(x0) != F.source_dim:
        raise DimensionMismatch(f"point of length {len(x0)} for source dimension {F.source_dim}")
    n, K = F.source_dim, F.field
    grads = F.jacobian_polys()
    jac = Matrix.from_rows(K, [[g.evaluate(x0) for g in row] for row in grads], cols=n)
    slices = []
    for row in grads:
        slices.append(Matrix.from_rows(
            K, [[row[a].derive(b).evaluate(x0) for b in range(n)] for a in range(n)], cols=n))
    return Jet2(value=F.evaluate(x0), jacobian=jac, hessian=tuple(slices))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TRANSFORMS = standard_transformations + (convert_xor,)


def _symbols(nvars: int) -> list[sympy.Symbol]:
    return [sympy.Symbol(f"x{i}") for i in range(nvars)]


def infer_nvars(text: str) -> int:
    """One more than the largest ``x<i>`` index in *text*."""
    idx = [int(m) for m in re.findall(r"x(\d+)", text)]
    return max(idx) + 1 if idx else 1


def parse_poly(text: str, field: ExactField, nvars: int | None = None) -> Poly:
    """Read ``"x0^2 + 3*x0*x1 - x1^3"`` into a ``Poly`` over ``field``."""
    if nvars is None:
        nvars = infer_nvars(text)
    syms = _symbols(nvars)
    local = {str(s): s for s in syms}
    try:
        expr = parse_expr(text, local_dict=local, transformations=_TRANSFORMS)
    except (SyntaxError, TypeError, sympy.SympifyError) as exc:
        raise UsageError(f"cannot parse polynomial {text!r}: {exc}") from exc
    stray = expr.free_symbols - set(syms)
    if stray:
        raise UsageError(f"unknown variables {sorted(map(str, stray))} in {text!r} (use x0..x{nvars - 1})")
    try:
        sp = sympy.Poly(expr, *syms, domain="QQ")
    except sympy.PolynomialError as exc:
        raise UsageError(f"{text!r} is not a polynomial") from exc
    terms = []
    for monom, coeff in sp.terms():
        if coeff == 0:
            continue
        terms.append((tuple(int(k) for k in monom),
                      field.from_literal(Fraction(int(coeff.p), int(coeff.q)), text)))
    return Poly(field, nvars, terms)


def parse_map(text: str, field: ExactField, nvars: int | None = None) -> PolyMap:
    """Components separated by ``;``."""
    parts = [p for p in text.split(";") if p.strip()]
    if not parts:
        raise UsageError("empty map")
    if nvars is None:
        nvars = infer_nvars(text)
    comps = tuple(parse_poly(p, field, nvars) for p in parts)
    return PolyMap(field, nvars, comps)


def parse_point(text: str, field: ExactField) -> tuple[Any, ...]:
    """Comma-separated field elements, such as ``1/2, 0`` or ``t+1, t``."""
    return tuple(field.parse_element(t) for t in text.split(",") if t.strip())
