"""
Linear systems of polynomial maps and order-2 jet evaluation.

A ``LinearSystem`` is a finite basis of maps 𝔸^n → 𝔸^r.  It separates
principal parts of order 2 at a point x when evaluating order-2 Taylor
coefficients at x is onto the jet space, which has dimension
r·(1 + n + n(n+1)/2).  That count keeps the x_i² coordinates in every
characteristic: a squared coordinate survives in O/m³ even where the
Hessian diagonal vanishes.

The check here is pointwise at sampled rational points.  It is a sound
necessary test for separation, not a proof of it.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field as dc_field
from typing import Any, Sequence

import numpy as np

from config import RATIONAL_HEIGHT
from errors import DimensionMismatch, EmptySample, UsageError
from exactfield import ExactField
from linalg import Matrix, rank
from poly import Jet2, Poly, PolyMap, jet2_at, monomials

logger = logging.getLogger(__name__)

__all__ = [
    "Jet2",
    "LinearSystem",
    "SeparationReport",
    "jet2_at",
    "jet_coordinates",
    "jet_space_dim",
    "monomial_system",
    "parse_system",
    "random_points",
    "sample_member",
    "separates_order2",
]


@dataclass(frozen=True)
class LinearSystem:
    field: ExactField
    source_dim: int
    target_dim: int
    basis: tuple[PolyMap, ...]

    def __post_init__(self) -> None:
        for F in self.basis:
            if (F.field, F.source_dim, F.target_dim) != (self.field, self.source_dim, self.target_dim):
                raise DimensionMismatch("basis maps must share field, source and target")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def combine(self, coeffs: Sequence[Any]) -> PolyMap:
        """Σ c_i · basis_i."""
        if len(coeffs) != self.dim:
            raise DimensionMismatch(f"{len(coeffs)} coefficients for a {self.dim}-dimensional system")
        K = self.field
        comps = [Poly.zero(K, self.source_dim) for _ in range(self.target_dim)]
        for c, F in zip(coeffs, self.basis):
            if K.is_zero(c):
                continue
            comps = [a.add(b.scale(c)) for a, b in zip(comps, F.components)]
        return PolyMap(K, self.source_dim, tuple(comps))

    def recombine(self, change: Matrix) -> "LinearSystem":
        """New basis whose i-th element is Σ_j change[i, j] · basis_j."""
        return LinearSystem(self.field, self.source_dim, self.target_dim,
                            tuple(self.combine(change.row(i)) for i in range(change.rows)))


def monomial_system(field: ExactField, n: int, r: int, d: int) -> LinearSystem:
    """All maps whose components are monomials of degree ≤ d."""
    basis = []
    for ell in range(r):
        for e in monomials(n, d):
            comps = tuple(
                Poly(field, n, {e: field.one}) if j == ell else Poly.zero(field, n) for j in range(r)
            )
            basis.append(PolyMap(field, n, comps))
    return LinearSystem(field, n, r, tuple(basis))


def parse_system(text: str, field: ExactField) -> LinearSystem:
    """Parse ``monomials(n,r,d)`` into the matching monomial system."""
    m = re.fullmatch(r"\s*monomials\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*", text)
    if not m:
        raise UsageError(f"unknown linear system {text!r} (expected monomials(n,r,d))")
    n, r, d = (int(g) for g in m.groups())
    return monomial_system(field, n, r, d)


# ---------------------------------------------------------------------------
# Jet coordinates
# ---------------------------------------------------------------------------

def jet_space_dim(n: int, r: int) -> int:
    """Dimension of the space of 2-jets of maps from n-space to r-space."""
    return r * (1 + n + n * (n + 1) // 2)


def jet_coordinates(F: PolyMap, x: Sequence[Any]) -> tuple[Any, ...]:
    """Taylor coefficients of F(x + u) of degree ≤ 2, component by component."""
    basis = monomials(F.source_dim, 2)
    coords: list[Any] = []
    for comp in F.components:
        shifted = comp.shift(x)
        coords.extend(shifted.coefficient(e) for e in basis)
    return tuple(coords)


def evaluation_matrix(W: LinearSystem, x: Sequence[Any]) -> Matrix:
    """One row of 2-jet coordinates at ``x`` per basis map."""
    return Matrix.from_rows(W.field, [jet_coordinates(F, x) for F in W.basis],
                            cols=jet_space_dim(W.source_dim, W.target_dim))


@dataclass
class SeparationReport:
    jet_dim: int
    system_dim: int
    points: list[dict[str, Any]] = dc_field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return all(p["separates"] for p in self.points)

    def to_dict(self) -> dict[str, Any]:
        return {"jet_dim": self.jet_dim, "system_dim": self.system_dim,
                "verdict": self.verdict, "points": self.points}


def separates_order2(W: LinearSystem, points: Sequence[Sequence[Any]]) -> SeparationReport:
    """Rank of the jet evaluation at each point against the full jet dimension."""
    if not points:
        raise EmptySample("no sample points given")
    K = W.field
    report = SeparationReport(jet_dim=jet_space_dim(W.source_dim, W.target_dim), system_dim=W.dim)
    for x in points:
        if len(x) != W.source_dim:
            raise DimensionMismatch(f"point {x} not in a {W.source_dim}-dimensional source")
        rk = rank(evaluation_matrix(W, x))
        report.points.append({
            "point": [K.to_json(c) for c in x],
            "rank": rk,
            "separates": rk == report.jet_dim,
        })
    passing = sum(p["separates"] for p in report.points)
    logger.debug(f"separation: {passing}/{len(report.points)} points pass")
    return report


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_member(W: LinearSystem, seed: int | np.random.Generator,
                  height: int = RATIONAL_HEIGHT) -> PolyMap:
    """Σ c_i · basis_i with c_i uniform in the field (or in [-H, H] over ℚ)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return W.combine([W.field.random_element(rng, height) for _ in range(W.dim)])


def random_points(field: ExactField, n: int, count: int, rng: np.random.Generator,
                  height: int = RATIONAL_HEIGHT) -> list[tuple[Any, ...]]:
    """``count`` uniformly drawn points of n-space."""
    return [tuple(field.random_element(rng, height) for _ in range(n)) for _ in range(count)]
