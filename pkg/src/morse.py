"""
Constructive local theory of power series.

Everything works in k[[x]]/⟨x⟩^(N+1) with exact coefficients.  A
``LocalAutomorphism`` is a tuple of substitution images with zero constant
term; ``phi.apply(f)`` is f(images) and ``phi.followed_by(psi)`` is the
substitution whose ``apply`` runs phi first, then psi.

* ``milnor``: certifies ⟨x⟩^r ⊆ jac(f) for the smallest r (Nakayama: it is
  enough that every degree-r monomial lies in jac(f) + ⟨x⟩^(r+1)) and then
  reads μ and a monomial basis off k[x]/(jac(f) + ⟨x⟩^r).
* ``quad_normal_form``: Gauss diagonalisation away from characteristic 2;
  symplectic reduction plus one collapsed square in characteristic 2.
* ``morse_with_params``: clears every term divisible by a variable of the
  normal quadratic part, degree by degree, leaving q + h.
* ``right_equiv_truncated``: Newton-style lifting of a right-equivalence
  between f and a high-order perturbation of f.
* ``corank1_normal_form``: the normal form at a corank-1 point of a map,
  with the first r − 1 components turned into parameters.

Every operation returns automorphisms that can be re-applied to check the
claimed congruence, and the tests do exactly that.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Any, Sequence

import sympy

from config import DEFAULT_TRUNCATION, MILNOR_MAX_TRUNC
from errors import (NonzeroConstant, NotCertifiedFinite, NotTruncatable, OrderTooLow,
                    PreconditionViolated, TargetTooBig, WrongCorank)
from exactfield import ExactField, FieldKind
from linalg import Matrix, inverse, rank, rref, solve_linear
from poly import (Exp, Poly, PolyMap, TruncatedSeries, grevlex_key, jet2_at, monomials,
                  series_compose, unit_exp)
from strata import corank_at

logger = logging.getLogger(__name__)


def _series(field: ExactField, nvars: int, N: int, terms: dict | list = ()) -> TruncatedSeries:
    return TruncatedSeries(field, nvars, N, terms)


def _variable(field: ExactField, nvars: int, N: int, i: int) -> TruncatedSeries:
    return _series(field, nvars, N, {unit_exp(nvars, i): field.one})


def _combine(field: ExactField, nvars: int, N: int,
             pairs: Sequence[tuple[Any, Poly]]) -> TruncatedSeries:
    acc: list[tuple[Exp, Any]] = []
    for c, s in pairs:
        if field.is_zero(c):
            continue
        acc.extend((e, field.mul(c, x)) for e, x in s.terms.items())
    return _series(field, nvars, N, acc)


def monomial_text(e: Exp) -> str:
    """``x0^2*x1`` style text for an exponent tuple."""
    parts = [f"x{i}" if k == 1 else f"x{i}^{k}" for i, k in enumerate(e) if k]
    return "*".join(parts) or "1"


# ---------------------------------------------------------------------------
# Local automorphisms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalAutomorphism:
    field: ExactField
    trunc_order: int
    images: tuple[TruncatedSeries, ...]
    fixed_prefix: int = 0

    @property
    def nvars(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, field: ExactField, nvars: int, N: int, fixed_prefix: int = 0) -> "LocalAutomorphism":
        """x_i ↦ x_i, truncated at order N."""
        return cls(field, N, tuple(_variable(field, nvars, N, i) for i in range(nvars)), fixed_prefix)

    @classmethod
    def from_linear(cls, M: Matrix, N: int, fixed_prefix: int = 0) -> "LocalAutomorphism":
        """x_i ↦ Σ_j M[i, j] x_j."""
        K, n = M.field, M.rows
        images = tuple(_series(K, n, N, {unit_exp(n, j): M[i, j] for j in range(n)}) for i in range(n))
        return cls(K, N, images, fixed_prefix)

    @classmethod
    def from_images(cls, field: ExactField, images: Sequence[Poly], N: int,
                    fixed_prefix: int = 0) -> "LocalAutomorphism":
        """Automorphism with the given polynomial images."""
        return cls(field, N, tuple(_series(field, p.nvars, N, p.terms) for p in images), fixed_prefix)

    def apply(self, f: Poly) -> TruncatedSeries:
        """f ∘ self, truncated at the automorphism's order."""
        return series_compose(f, self.images, self.trunc_order)

    def followed_by(self, other: "LocalAutomorphism") -> "LocalAutomorphism":
        """Apply ``other`` first, then ``self``."""
        if other.nvars != self.nvars:
            raise PreconditionViolated(f"cannot compose automorphisms of {self.nvars} and {other.nvars} variables")
        N = min(self.trunc_order, other.trunc_order)
        images = tuple(series_compose(img, other.images, N) for img in self.images)
        return LocalAutomorphism(self.field, N, images, min(self.fixed_prefix, other.fixed_prefix))

    def linear_part(self) -> Matrix:
        """Matrix of the degree-1 coefficients of the images."""
        n = self.nvars
        return Matrix.from_rows(self.field, [[img.coefficient(unit_exp(n, j)) for j in range(n)]
                                             for img in self.images], cols=n)

    def inverse(self) -> "LocalAutomorphism":
        """psi with self.followed_by(psi) ≡ identity, by fixed-point iteration."""
        K, n, N = self.field, self.nvars, self.trunc_order
        L_inv = inverse(self.linear_part())
        higher = [img.sub(_combine(K, n, N, [(img.coefficient(unit_exp(n, j)), _variable(K, n, N, j))
                                             for j in range(n)])) for img in self.images]
        xs = [_variable(K, n, N, j) for j in range(n)]
        psi = [_combine(K, n, N, [(L_inv[i, j], xs[j]) for j in range(n)]) for i in range(n)]
        for _ in range(N):
            rhs = [xs[j].sub(series_compose(higher[j], psi, N)) for j in range(n)]
            nxt = [_combine(K, n, N, [(L_inv[i, j], rhs[j]) for j in range(n)]) for i in range(n)]
            if nxt == psi:
                break
            psi = nxt
        return LocalAutomorphism(K, N, tuple(psi), self.fixed_prefix)

    def is_valid(self) -> bool:
        """Invertible with zero constant terms, leaving the fixed prefix alone."""
        K, n = self.field, self.nvars
        if any(not K.is_zero(img.constant_term()) for img in self.images):
            return False
        if rank(self.linear_part()) != n:
            return False
        return all(self.images[i] == _variable(K, n, self.trunc_order, i) for i in range(self.fixed_prefix))

    def validate(self) -> None:
        """Raise ``PreconditionViolated`` unless ``is_valid``."""
        if not self.is_valid():
            raise PreconditionViolated("not a local automorphism fixing its parameter block")

    def images_as_text(self) -> list[str]:
        return [img.format() for img in self.images]

    def to_dict(self) -> dict[str, Any]:
        return {"images": self.images_as_text(), "trunc_order": self.trunc_order,
                "fixed_prefix": self.fixed_prefix}


# ---------------------------------------------------------------------------
# Milnor numbers and determinacy
# ---------------------------------------------------------------------------

@dataclass
class MilnorReport:
    certified: bool
    mu: int | None
    r: int | None
    monomial_basis: list[Exp]
    N_used: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "certified": self.certified,
            "mu": self.mu if self.certified else "not certified",
            "r": self.r,
            "monomial_basis": [monomial_text(e) for e in self.monomial_basis],
            "N_used": self.N_used,
        }


def _macaulay_rows(f: Poly, r: int) -> list[dict[Exp, Any]]:
    """m·∂_i f truncated at degree r, for every monomial m that can contribute."""
    n = f.nvars
    rows = []
    for i in range(n):
        d = f.derive(i)
        order = d.order()
        if order is None or order > r:
            continue
        low = [(e, c) for e, c in d.terms.items() if sum(e) <= r]
        for m in monomials(n, r - order):
            dm = sum(m)
            row = {}
            for e, c in low:
                if sum(e) + dm <= r:
                    row[tuple(a + b for a, b in zip(e, m))] = c
            if row:
                rows.append(row)
    return rows


def milnor(f: Poly, N_max: int = MILNOR_MAX_TRUNC) -> MilnorReport:
    """Milnor number of f via the smallest r with m^r inside the Jacobian ideal."""
    K, n = f.field, f.nvars
    if not K.is_zero(f.constant_term()):
        raise NonzeroConstant(f"f has constant term {K.format(f.constant_term())}")
    for r in range(1, N_max + 1):
        # columns: degree < r high-first, then degree r
        low = [e for e in reversed(monomials(n, r - 1))]
        high = monomials(n, r, r)
        cols = low + high
        rows = _macaulay_rows(f, r)
        if not rows:
            logger.debug(f"milnor r={r}: empty Jacobian span")
            continue
        M = Matrix.from_rows(K, [[row.get(e, K.zero) for e in cols] for row in rows], cols=len(cols))
        _, pivots = rref(M)
        low_pivots = [c for c in pivots if c < len(low)]
        high_pivots = len(pivots) - len(low_pivots)
        logger.debug(f"milnor r={r}: {high_pivots}/{len(high)} top monomials in jac(f)")
        if high_pivots == len(high):
            pivot_set = set(low_pivots)
            basis = sorted((low[c] for c in range(len(low)) if c not in pivot_set),
                           key=grevlex_key)
            return MilnorReport(True, len(low) - len(low_pivots), r, basis, r + 1)
    logger.info(f"milnor: no certificate up to truncation {N_max}")
    return MilnorReport(False, None, None, [], N_max + 1)


def determinacy_bound(f: Poly, N_max: int = MILNOR_MAX_TRUNC) -> int:
    """Order 2r past which f is determined up to right equivalence."""
    report = milnor(f, N_max)
    if not report.certified:
        raise NotCertifiedFinite(f"Milnor number of {f.format()} not certified up to order {N_max}")
    return 2 * report.r


# ---------------------------------------------------------------------------
# Quadratic normal forms
# ---------------------------------------------------------------------------

@dataclass
class QuadNormalForm:
    phi: LocalAutomorphism
    rank: int
    extra_square: bool
    q: TruncatedSeries
    q_vars: tuple[int, ...]
    coefficients: list[Any] = dc_field(default_factory=list)
    pair_types: list[str] = dc_field(default_factory=list)
    closed_field_shape: bool = True
    extra_var: int | None = None

    def __iter__(self):
        return iter((self.phi, self.rank, self.extra_square))

    def to_dict(self) -> dict[str, Any]:
        K = self.phi.field
        return {
            "rank": self.rank,
            "extra_square": self.extra_square,
            "q": self.q.format(),
            "coefficients": [K.to_json(c) for c in self.coefficients],
            "pair_types": self.pair_types,
            "closed_field_shape": self.closed_field_shape,
            "automorphism": self.phi.images_as_text(),
        }


class _QuadForm:
    """A quadratic form on k^m from its monomial coefficients."""

    def __init__(self, field: ExactField, m: int, coeffs: dict[tuple[int, int], Any]) -> None:
        self.K, self.m, self.coeffs = field, m, coeffs

    def value(self, v: Sequence[Any]) -> Any:
        """Q(v)."""
        K = self.K
        acc = K.zero
        for (i, j), c in self.coeffs.items():
            acc = K.add(acc, K.mul(c, K.mul(v[i], v[j])))
        return acc

    def polar(self, u: Sequence[Any], v: Sequence[Any]) -> Any:
        """Polar form Q(u + v) - Q(u) - Q(v)."""
        K = self.K
        return K.sub(K.sub(self.value(_vadd(K, u, v)), self.value(u)), self.value(v))

    def unit(self, k: int) -> list[Any]:
        return [self.K.one if i == k else self.K.zero for i in range(self.m)]


def _vadd(K: ExactField, u: Sequence[Any], v: Sequence[Any]) -> list[Any]:
    return [K.add(a, b) for a, b in zip(u, v)]


def _vscale(K: ExactField, c: Any, v: Sequence[Any]) -> list[Any]:
    return [K.mul(c, a) for a in v]


def _quadratic_block(f: Poly, variables: Sequence[int]) -> dict[tuple[int, int], Any]:
    """Coefficients of the degree-2 monomials in ``variables``, indexed by position pairs."""
    pos = {v: k for k, v in enumerate(variables)}
    out: dict[tuple[int, int], Any] = {}
    for e, c in f.terms.items():
        if sum(e) != 2 or any(k and i not in pos for i, k in enumerate(e)):
            continue
        idx = sorted(pos[i] for i, k in enumerate(e) for _ in range(k))
        out[(idx[0], idx[1])] = c
    return out


def _squarefree_scale(d: Fraction) -> tuple[Fraction, int]:
    """(λ, m) with λ²·d = m squarefree."""
    a, b = d.numerator, d.denominator
    prod = a * b
    s, m = 1, 1 if prod > 0 else -1
    for p, k in sympy.factorint(abs(prod)).items():
        s *= p ** (k // 2)
        if k % 2:
            m *= p
    return Fraction(b, s), m


def _diagonal_basis(form: _QuadForm) -> tuple[list[tuple[list[Any], Any]], list[list[Any]]]:
    """Orthogonal basis of (value, vector) pairs and the radical, for odd characteristic."""
    K = form.K
    half = K.inv(K.from_int(2))

    def bil(u, v):
        return K.mul(half, form.polar(u, v))

    pending = [form.unit(k) for k in range(form.m)]
    ortho: list[tuple[list[Any], Any]] = []
    while pending:
        idx = next((k for k, v in enumerate(pending) if not K.is_zero(form.value(v))), None)
        if idx is None:
            pair = next(((a, b) for a in range(len(pending)) for b in range(a + 1, len(pending))
                         if not K.is_zero(bil(pending[a], pending[b]))), None)
            if pair is None:
                break
            a, b = pair
            pending[a] = _vadd(K, pending[a], pending[b])
            idx = a
        v = pending.pop(idx)
        d = form.value(v)
        pending = [_vadd(K, w, _vscale(K, K.neg(K.div(bil(w, v), d)), v)) for w in pending]
        ortho.append((v, d))
    return ortho, pending


def _normalise_diagonal(K: ExactField, ortho: list[tuple[list[Any], Any]]) -> list[tuple[list[Any], Any]]:
    """Rescale a diagonal form to 1s and at most one ε over a finite field, squarefree entries over Q."""
    if K.kind is FieldKind.RATIONALS:
        out = []
        for v, d in ortho:
            lam, m = _squarefree_scale(d)
            out.append((_vscale(K, lam, v), Fraction(m)))
        return out
    eps = K.non_square()
    ones, epss = [], []
    for v, d in ortho:
        if K.is_square(d):
            ones.append(_vscale(K, K.inv(K.sqrt(d)), v))
        else:
            epss.append(_vscale(K, K.inv(K.sqrt(K.div(d, eps))), v))
    # two ε-squares make two 1-squares: a² + b² = 1/ε
    target = K.inv(eps)
    while len(epss) >= 2:
        u, w = epss.pop(0), epss.pop(0)
        for a in K.elements():
            rest = K.sub(target, K.mul(a, a))
            if K.is_square(rest):
                b = K.sqrt(rest)
                break
        else:  # pragma: no cover - every element of a finite field is a sum of two squares
            raise PreconditionViolated("no representation as a sum of two squares")
        ones.append(_vadd(K, _vscale(K, a, u), _vscale(K, b, w)))
        ones.append(_vadd(K, _vscale(K, K.neg(b), u), _vscale(K, a, w)))
    return [(v, K.one) for v in ones] + [(v, eps) for v in epss]


def _symplectic_basis(form: _QuadForm) -> tuple[list[tuple[list[Any], list[Any], str, Any]], list[list[Any]]]:
    """Pairs (u, w, kind, c) with polar(u, w) = 1 and the polar radical."""
    K = form.K
    pending = [form.unit(k) for k in range(form.m)]
    pairs = []
    while True:
        found = next(((a, b) for a in range(len(pending)) for b in range(a + 1, len(pending))
                      if not K.is_zero(form.polar(pending[a], pending[b]))), None)
        if found is None:
            break
        a, b = found
        u = pending[a]
        w = _vscale(K, K.inv(form.polar(pending[a], pending[b])), pending[b])
        pending = [v for k, v in enumerate(pending) if k not in (a, b)]
        pending = [_vadd(K, _vadd(K, v, _vscale(K, form.polar(v, w), u)), _vscale(K, form.polar(v, u), w))
                   for v in pending]
        pairs.append(_normalise_pair(form, u, w))
    return pairs, pending


def _normalise_pair(form: _QuadForm, u: list[Any], w: list[Any]) -> tuple[list[Any], list[Any], str, Any]:
    """Characteristic-2 hyperbolic plane or anisotropic plane spanned by u and w."""
    K = form.K
    a, b = form.value(u), form.value(w)
    if K.is_zero(a):
        return u, _vadd(K, w, _vscale(K, b, u)), "hyperbolic", K.zero
    root = next((t for t in K.elements() if K.is_zero(K.add(K.add(K.mul(a, K.mul(t, t)), t), b))), None)
    if root is not None:
        z = _vadd(K, _vscale(K, root, u), w)
        return _vadd(K, u, _vscale(K, a, z)), z, "hyperbolic", K.zero
    s = K.sqrt(a)
    u1 = _vscale(K, K.inv(s), u)
    w1 = _vscale(K, s, w)
    c = K.mul(a, b)
    best_z = min(K.elements(), key=lambda z: K.add(c, K.add(K.mul(z, z), z)))
    return u1, _vadd(K, w1, _vscale(K, best_z, u1)), "anisotropic", K.add(c, K.add(K.mul(best_z, best_z), best_z))


def quad_normal_form(f: Poly, N: int = DEFAULT_TRUNCATION,
                     variables: Sequence[int] | None = None) -> QuadNormalForm:
    """Normalise the quadratic part of f in ``variables`` (all by default).

    The returned phi is linear, moves only ``variables`` and puts the
    normal form on the first ``rank`` of them.
    """
    K, n = f.field, f.nvars
    all_vars = variables is None
    variables = list(range(n)) if all_vars else list(variables)
    chosen = set(variables)
    for e in f.terms:
        if sum(e) == 1 and any(e[i] for i in chosen):
            raise OrderTooLow(f"f has the linear term {monomial_text(e)}")
    if all_vars and not K.is_zero(f.constant_term()):
        raise OrderTooLow("f has a nonzero constant term")
    form = _QuadForm(K, len(variables), _quadratic_block(f, variables))

    basis: list[list[Any]] = []
    q_terms: dict[Exp, Any] = {}
    coefficients: list[Any] = []
    pair_types: list[str] = []
    extra = False

    def var(k: int) -> int:
        return variables[k]

    if K.characteristic() != 2:
        ortho, radical = _diagonal_basis(form)
        ortho = _normalise_diagonal(K, ortho)
        for k, (v, d) in enumerate(ortho):
            basis.append(v)
            coefficients.append(d)
            q_terms[unit_exp(n, var(k), 2)] = d
        rk = len(ortho)
        basis.extend(radical)
        closed = all(K.eq(d, K.one) for d in coefficients)
    else:
        pairs, radical = _symplectic_basis(form)
        pairs.sort(key=lambda p: p[2] == "anisotropic")
        for k, (u, w, kind, c) in enumerate(pairs):
            basis.extend([u, w])
            pair_types.append(kind)
            y1, y2 = var(2 * k), var(2 * k + 1)
            q_terms[tuple(a + b for a, b in zip(unit_exp(n, y1), unit_exp(n, y2)))] = K.one
            if kind == "anisotropic":
                q_terms[unit_exp(n, y1, 2)] = K.one
                if not K.is_zero(c):
                    q_terms[unit_exp(n, y2, 2)] = c
        rk = 2 * len(pairs)
        roots = [K.sqrt(form.value(v)) for v in radical]
        lead = next((k for k, s in enumerate(roots) if not K.is_zero(s)), None)
        if lead is not None:
            extra = True
            rest = [_vadd(K, radical[k], _vscale(K, K.div(roots[k], roots[lead]), radical[lead]))
                    for k in range(len(radical)) if k != lead]
            radical = [_vscale(K, K.inv(roots[lead]), radical[lead])] + rest
        basis.extend(radical)
        closed = all(t == "hyperbolic" for t in pair_types)

    cells = [[K.one if i == j else K.zero for j in range(n)] for i in range(n)]
    for i in variables:
        for j in variables:
            cells[i][j] = K.zero
    for k, vec in enumerate(basis):
        for i, x in enumerate(vec):
            cells[var(i)][var(k)] = x
    fixed = min(variables) if variables else n
    phi = LocalAutomorphism.from_linear(Matrix.from_rows(K, cells, cols=n), N,
                                        fixed_prefix=fixed if not all_vars else 0)
    logger.debug(f"quadratic normal form: rank {rk}, extra square {extra}")
    return QuadNormalForm(
        phi=phi,
        rank=rk,
        extra_square=extra,
        q=_series(K, n, N, q_terms),
        q_vars=tuple(var(k) for k in range(rk)),
        coefficients=coefficients,
        pair_types=pair_types,
        closed_field_shape=closed,
        extra_var=var(rk) if extra else None,
    )


# ---------------------------------------------------------------------------
# Morse's lemma with parameters
# ---------------------------------------------------------------------------

@dataclass
class MorseSplitting:
    phi: LocalAutomorphism
    q: TruncatedSeries
    h: TruncatedSeries
    quad: QuadNormalForm

    @property
    def q_vars(self) -> tuple[int, ...]:
        return self.quad.q_vars

    def verify(self, F: Poly) -> bool:
        """Whether phi is valid and phi(F) is q + h with h free of the q-variables."""
        N = self.phi.trunc_order
        if not self.phi.is_valid():
            return False
        if self.h.variables() & set(self.q_vars):
            return False
        return self.phi.apply(F) == self.q.add(self.h).truncate(N)

    def to_dict(self) -> dict[str, Any]:
        return {"q": self.q.format(), "h": self.h.format(), "q_vars": list(self.q_vars),
                "automorphism": self.phi.images_as_text(), "quadratic": self.quad.to_dict()}


def morse_with_params(F: Poly, s: int, N: int = DEFAULT_TRUNCATION) -> MorseSplitting:
    """phi fixing x_0..x_{s-1} with phi(F) ≡ q + h, h free of the q-variables."""
    if N < 2:
        raise NotTruncatable(f"truncation order {N} is below 2")
    K, n = F.field, F.nvars
    if not 0 <= s <= n:
        raise PreconditionViolated(f"{s} parameters in {n} variables")
    quad = quad_normal_form(F, N, variables=range(s, n))
    phi = LocalAutomorphism(K, N, quad.phi.images, s)
    G = phi.apply(F)
    qv = quad.q_vars
    q = quad.q
    if qv:
        D = Matrix.from_rows(K, [[q.derive(j).coefficient(unit_exp(n, k)) for k in qv] for j in qv],
                             cols=len(qv))
        D_inv = inverse(D)
        for d in range(2, N + 1):
            for _ in range(N):
                R = G.sub(q)
                todo = [(e, c) for e, c in R.terms.items() if sum(e) == d and any(e[v] for v in qv)]
                if not todo:
                    break
                g: list[list[tuple[Exp, Any]]] = [[] for _ in qv]
                for e, c in todo:
                    k = next(t for t, v in enumerate(qv) if e[v])
                    rest = e[:qv[k]] + (e[qv[k]] - 1,) + e[qv[k] + 1:]
                    for j in range(len(qv)):
                        if not K.is_zero(D_inv[k, j]):
                            g[j].append((rest, K.mul(c, D_inv[k, j])))
                images = []
                for i in range(n):
                    x = _variable(K, n, N, i)
                    if i in qv:
                        x = x.sub(_series(K, n, N, g[qv.index(i)]))
                    images.append(x)
                sigma = LocalAutomorphism(K, N, tuple(images), s)
                phi = phi.followed_by(sigma)
                G = sigma.apply(G)
            else:
                raise PreconditionViolated(f"elimination stalled at degree {d}")
            logger.debug(f"morse: degree {d} cleared")
    h = G.sub(q)
    return MorseSplitting(phi=phi, q=q, h=_series(K, n, N, h.terms), quad=quad)


# ---------------------------------------------------------------------------
# Right-equivalence
# ---------------------------------------------------------------------------

def right_equiv_truncated(f: Poly, g: Poly, N: int,
                          N_max: int = MILNOR_MAX_TRUNC) -> LocalAutomorphism | None:
    """phi with phi(g) ≡ f mod ⟨x⟩^(N+1), or None when a lifting step has no solution."""
    K, n = f.field, f.nvars
    report = milnor(f, N_max)
    if not report.certified:
        raise NotCertifiedFinite(f"Milnor number of {f.format()} not certified up to order {N_max}")
    r = report.r
    phi = LocalAutomorphism.identity(K, n, N)
    G = g.truncate(N)
    target = f.truncate(N)
    diff = target.sub(G)
    if diff.is_zero():
        return phi
    if diff.order() < 2 * r + 1:
        raise PreconditionViolated(f"f - g has order {diff.order()}, need at least {2 * r + 1}")
    partials = [f.derive(i).truncate(N) for i in range(n)]
    while not diff.is_zero():
        s = diff.order() - 1
        low = s + 1 - r
        unknowns = [(i, m) for i in range(n) for m in monomials(n, N, low)]
        rows = monomials(n, N)
        index = {e: k for k, e in enumerate(rows)}
        cells = [[K.zero] * len(unknowns) for _ in rows]
        for col, (i, m) in enumerate(unknowns):
            for e, c in partials[i].terms.items():
                t = tuple(a + b for a, b in zip(e, m))
                if sum(t) <= N:
                    cells[index[t]][col] = K.add(cells[index[t]][col], c)
        rhs = [diff.coefficient(e) for e in rows]
        sol = solve_linear(Matrix.from_rows(K, cells, cols=len(unknowns)), rhs)
        if sol is None:
            logger.info(f"right-equivalence: no lift at agreement order {s}")
            return None
        u: list[list[tuple[Exp, Any]]] = [[] for _ in range(n)]
        for (i, m), x in zip(unknowns, sol):
            u[i].append((m, x))
        sigma = LocalAutomorphism(K, N, tuple(_variable(K, n, N, i).add(_series(K, n, N, u[i]))
                                              for i in range(n)))
        phi = phi.followed_by(sigma)
        G = sigma.apply(G)
        new_diff = target.sub(G)
        if not new_diff.is_zero() and new_diff.order() <= diff.order():
            logger.info(f"right-equivalence: agreement stuck at order {s}")
            return None
        diff = new_diff
    return phi


# ---------------------------------------------------------------------------
# Corank-1 normal form
# ---------------------------------------------------------------------------

@dataclass
class NormalFormReport:
    reordering: list[int]
    parameter_system: list[str]
    j: int
    q: TruncatedSeries
    h: TruncatedSeries
    phi: LocalAutomorphism
    achieved_order: int
    constants: tuple[Any, ...]
    component: TruncatedSeries
    parameter_components: tuple[TruncatedSeries, ...]
    quad: QuadNormalForm

    @property
    def q_vars(self) -> tuple[int, ...]:
        return self.quad.q_vars

    def to_dict(self) -> dict[str, Any]:
        K = self.phi.field
        return {
            "reordering": self.reordering,
            "parameter_system": self.parameter_system,
            "j": self.j,
            "q": self.q.format(),
            "h": self.h.format(),
            "q_vars": list(self.q_vars),
            "constants": [K.to_json(c) for c in self.constants],
            "automorphism": self.phi.images_as_text(),
            "achieved_order": self.achieved_order,
            "closed_field_shape": self.quad.closed_field_shape,
            "verified": verify_normal_form(self),
        }


def corank1_normal_form(F: PolyMap, x0: Sequence[Any], N: int = DEFAULT_TRUNCATION) -> NormalFormReport:
    """Corank-1 normal form of F at x0 up to order N."""
    n, r, K = F.source_dim, F.target_dim, F.field
    if r > n:
        raise TargetTooBig(f"target dimension {r} exceeds source dimension {n}")
    corank = corank_at(F, x0)
    if corank != 1:
        raise WrongCorank(f"corank {corank} at {[K.format(c) for c in x0]}, expected 1")
    G = F.shift(x0)
    consts = F.evaluate(x0)
    J = jet2_at(F, x0).jacobian

    chosen: list[int] = []
    span: list[tuple[Any, ...]] = []
    for ell in range(r):
        if len(chosen) == r - 1:
            break
        trial = span + [J.row(ell)]
        if rank(Matrix.from_rows(K, trial, cols=n)) == len(trial):
            chosen.append(ell)
            span = trial
    last = next(ell for ell in range(r) if ell not in chosen)
    reordering = chosen + [last]

    complement: list[int] = []
    for k in range(n):
        unit = tuple(K.one if t == k else K.zero for t in range(n))
        trial = span + [unit]
        if rank(Matrix.from_rows(K, trial, cols=n)) == len(trial):
            complement.append(k)
            span = trial

    params = tuple(G.components[ell].sub(Poly.constant(K, n, consts[ell])).truncate(N) for ell in chosen)
    coords = list(params) + [_variable(K, n, N, k) for k in complement]
    Phi = LocalAutomorphism.from_images(K, coords, N)
    Psi = Phi.inverse()
    component = G.components[last].truncate(N)
    f = Psi.apply(component.sub(Poly.constant(K, n, consts[last])))
    split = morse_with_params(f, r - 1, N)
    j = (n - r + 1) - split.quad.rank
    phi = Psi.followed_by(split.phi)
    h = split.h.add(_series(K, n, N, {(0,) * n: consts[last]}))
    logger.info(f"corank-1 normal form: j={j}, quadratic rank {split.quad.rank}")
    return NormalFormReport(
        reordering=reordering,
        parameter_system=Phi.images_as_text(),
        j=j,
        q=split.q,
        h=_series(K, n, N, h.terms),
        phi=phi,
        achieved_order=N,
        constants=tuple(consts),
        component=component,
        parameter_components=params,
        quad=split.quad,
    )


def verify_normal_form(report: NormalFormReport) -> bool:
    """Re-apply phi and check every claim of the report."""
    phi, N = report.phi, report.achieved_order
    K, n = phi.field, phi.nvars
    if not phi.is_valid():
        return False
    if report.h.variables() & set(report.q_vars):
        return False
    if phi.apply(report.component) != report.q.add(report.h).truncate(N):
        return False
    for ell, p in enumerate(report.parameter_components):
        if phi.apply(p) != _variable(K, n, N, ell):
            return False
    return True
