"""
Pointwise singularity classification of polynomial maps.

At a rational point x of 𝔸^n a map F : 𝔸^n → 𝔸^r has

* corank i = min(n, r) − rank dF(x);
* an intrinsic differential: the derivative of the matrix dF at x,
  pushed into Hom(K, C) where K = ker dF(x) and C = coker dF(x);
* a second intrinsic differential: that tensor restricted to directions
  in K, i.e. the Hessian of F on K × K projected to C.  It is symmetric
  away from characteristic 2 and alternating in characteristic 2;
* a symbol (i, j) with j the corank of the second differential read as a
  linear map K → Hom(K, C);
* bad-locus membership: the full intrinsic differential T_x → Hom(K, C)
  fails to be onto its i(|n−r|+i)-dimensional target.

Kernel and cokernel bases come from ``linalg``'s fixed pivot rule, so
tensors are reproducible.  Basis changes conjugate them canonically.

The two whole-plane scans at the bottom back the verification battery:
one finds the singular points of Σ¹ for self-maps of the plane, the other
counts critical points of plane functions exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

import upoly
from errors import DimensionMismatch, PreconditionViolated
from exactfield import ExactField
from linalg import Matrix, rank, rank_profile, solve_linear
from poly import Poly, PolyMap, jet2_at

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntrinsicDiff:
    field: ExactField
    point: tuple[Any, ...]
    corank: int
    kernel_basis: tuple[tuple[Any, ...], ...]
    cokernel_proj: Matrix
    # tensor[d][k][c]: direction d (a source coordinate, or a kernel vector
    # when restricted), kernel vector k, cokernel coordinate c
    tensor: tuple[tuple[tuple[Any, ...], ...], ...]
    restricted: bool = False

    @property
    def dim_kernel(self) -> int:
        return len(self.kernel_basis)

    @property
    def dim_cokernel(self) -> int:
        return self.cokernel_proj.rows

    def as_linear_map(self) -> Matrix:
        """Rows: directions; columns: Hom(K, C) flattened as (k, c)."""
        width = self.dim_kernel * self.dim_cokernel
        return Matrix.from_rows(self.field, [[x for row in slab for x in row] for slab in self.tensor],
                                cols=width)

    def bilinear_slice(self, c: int) -> Matrix:
        """The K × K matrix of cokernel coordinate c (restricted form only)."""
        if not self.restricted:
            raise PreconditionViolated("bilinear slices exist only for the second differential")
        k = self.dim_kernel
        return Matrix.from_rows(self.field, [[self.tensor[a][b][c] for b in range(k)] for a in range(k)],
                                cols=k)

    def rank(self) -> int:
        """Rank of the differential viewed as a map into Hom(K, C)."""
        return rank(self.as_linear_map())


@dataclass(frozen=True)
class SymbolClass:
    i: int
    j: int


# ---------------------------------------------------------------------------
# Pointwise operations
# ---------------------------------------------------------------------------

def _check_point(n: int, x: Sequence[Any]) -> None:
    if len(x) != n:
        raise DimensionMismatch(f"point of length {len(x)} for source dimension {n}")


def corank_at(F: PolyMap, x: Sequence[Any]) -> int:
    """Corank of the Jacobian of F at x."""
    _check_point(F.source_dim, x)
    jac = jet2_at(F, x).jacobian
    return min(F.source_dim, F.target_dim) - rank(jac)


def intrinsic_differential_at(alpha: Sequence[Sequence[Poly]], x: Sequence[Any]) -> IntrinsicDiff:
    """∇alpha at x, pushed into Hom(ker alpha(x), coker alpha(x))."""
    if not alpha or not alpha[0]:
        raise DimensionMismatch("empty matrix of polynomials")
    rows, cols = len(alpha), len(alpha[0])
    K = alpha[0][0].field
    n = alpha[0][0].nvars
    _check_point(n, x)
    A = Matrix.from_rows(K, [[a.evaluate(x) for a in row] for row in alpha], cols=cols)
    prof = rank_profile(A)
    P = prof.cokernel_projection
    tensor = []
    for d in range(n):
        D = Matrix.from_rows(K, [[a.derive(d).evaluate(x) for a in row] for row in alpha], cols=cols)
        tensor.append(tuple(P.apply(D.apply(v)) for v in prof.kernel_basis))
    return IntrinsicDiff(
        field=K,
        point=tuple(x),
        corank=min(rows, cols) - prof.rank,
        kernel_basis=tuple(prof.kernel_basis),
        cokernel_proj=P,
        tensor=tuple(tensor),
    )


def transport_differential(diff: IntrinsicDiff, source: Matrix, target: Matrix,
                           onto: IntrinsicDiff) -> tuple:
    """Rewrite *diff* in the bases of *onto* after a linear change of coordinates.

    *onto* must be the differential of ``y ↦ target · alpha(source·y) · source``
    at ``source⁻¹ x``; this is how the Jacobian of ``target ∘ F ∘ source``
    transforms.  A kernel vector v' of *onto* is carried to ``source·v'`` in
    ker alpha(x), a direction e_d to ``source·e_d``, and cokernel classes
    through ``target``.  Equal to ``onto.tensor`` entry for entry when the
    differential is intrinsic.
    """
    K = diff.field
    n = source.rows
    if target.rows != diff.cokernel_proj.cols or onto.dim_kernel != diff.dim_kernel:
        raise DimensionMismatch("linear change does not match the differential")
    basis = Matrix.from_columns(K, diff.kernel_basis, rows=n)
    coords = []
    for v in onto.kernel_basis:
        lam = solve_linear(basis, source.apply(v))
        if lam is None:
            raise PreconditionViolated("kernel vector does not map into the original kernel")
        coords.append(lam)
    # cokernel class u of alpha ↦ class of target·z in the new cokernel, z any lift of u
    images = []
    for c in range(diff.dim_cokernel):
        unit = tuple(K.one if t == c else K.zero for t in range(diff.dim_cokernel))
        images.append(onto.cokernel_proj.apply(target.apply(solve_linear(diff.cokernel_proj, unit))))

    def combine(weights: Sequence[Any], vectors: Sequence[Sequence[Any]], width: int) -> tuple:
        acc = [K.zero] * width
        for w, vec in zip(weights, vectors):
            if K.is_zero(w):
                continue
            for t, x in enumerate(vec):
                acc[t] = K.add(acc[t], K.mul(w, x))
        return tuple(acc)

    out = []
    for d in range(n):
        direction = source.col(d)
        slab = []
        for lam in coords:
            # P_alpha(d_alpha(source·e_d)(source·v')) in the old cokernel
            per_dir = [combine(lam, diff.tensor[dp], diff.dim_cokernel) for dp in range(n)]
            u = combine(direction, per_dir, diff.dim_cokernel)
            slab.append(combine(u, images, onto.dim_cokernel))
        out.append(tuple(slab))
    return tuple(out)


def _restrict(diff: IntrinsicDiff) -> IntrinsicDiff:
    """Evaluate the differential on its own kernel, giving the K x K x C form."""
    K = diff.field
    restricted = []
    for v in diff.kernel_basis:
        slab = []
        for b in range(diff.dim_kernel):
            entry = []
            for c in range(diff.dim_cokernel):
                acc = K.zero
                for d, vd in enumerate(v):
                    if not K.is_zero(vd):
                        acc = K.add(acc, K.mul(vd, diff.tensor[d][b][c]))
                entry.append(acc)
            slab.append(tuple(entry))
        restricted.append(tuple(slab))
    return IntrinsicDiff(K, diff.point, diff.corank, diff.kernel_basis, diff.cokernel_proj,
                         tuple(restricted), restricted=True)


def second_intrinsic_differential_at(F: PolyMap, x: Sequence[Any]) -> IntrinsicDiff:
    """The intrinsic differential of F at x restricted to its kernel."""
    return _restrict(intrinsic_differential_at(F.jacobian_polys(), x))


def symbol_at(F: PolyMap, x: Sequence[Any]) -> SymbolClass:
    """Symbol class (i, j): corank and the rank drop of the second differential."""
    second = second_intrinsic_differential_at(F, x)
    k, c = second.dim_kernel, second.dim_cokernel
    j = min(k, k * c) - second.rank()
    return SymbolClass(i=second.corank, j=j)


def bad_locus_member(F: PolyMap, x: Sequence[Any]) -> bool:
    """Whether x lies where the second differential falls short of the expected rank."""
    diff = intrinsic_differential_at(F.jacobian_polys(), x)
    n, r, i = F.source_dim, F.target_dim, diff.corank
    target = i * (abs(n - r) + i)
    if n < target:
        return True
    return diff.rank() < target


def project_hessian(diff: IntrinsicDiff, hessian: Sequence[Matrix]) -> tuple:
    """Restrict per-component Hessians to K × K and project to C.

    ``diff`` must be the (unrestricted) differential of a map whose
    Jacobian has the kernel and cokernel in question.  Returns a tensor
    shaped like the restricted second differential.
    """
    K = diff.field
    P = diff.cokernel_proj
    out = []
    for u in diff.kernel_basis:
        slab = []
        for v in diff.kernel_basis:
            values = []
            for H in hessian:
                Hv = H.apply(v)
                acc = K.zero
                for a, b in zip(u, Hv):
                    acc = K.add(acc, K.mul(a, b))
                values.append(acc)
            slab.append(P.apply(values))
        out.append(tuple(slab))
    return tuple(out)


def classify(F: PolyMap, x: Sequence[Any]) -> dict[str, Any]:
    """Everything the ``classify`` subcommand reports about F at x."""
    second = second_intrinsic_differential_at(F, x)
    sym = symbol_at(F, x)
    return {
        "corank": second.corank,
        "symbol": [sym.i, sym.j],
        "bad_locus": bad_locus_member(F, x),
        "kernel_dim": second.dim_kernel,
        "cokernel_dim": second.dim_cokernel,
    }


# ---------------------------------------------------------------------------
# Whole-plane scans over finite fields
# ---------------------------------------------------------------------------

def vec_evaluate(f: Poly, coords: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate f at many points at once (finite fields, element codes)."""
    K = f.field
    shape = coords[0].shape
    acc = np.zeros(shape, dtype=np.int64)
    powers: dict[tuple[int, int], np.ndarray] = {}

    def power(i: int, k: int) -> np.ndarray:
        if k == 0:
            return np.ones(shape, dtype=np.int64)
        if (i, k) not in powers:
            powers[(i, k)] = K.vec_mul(power(i, k - 1), coords[i])
        return powers[(i, k)]

    for e, c in f.terms.items():
        term = np.full(shape, c, dtype=np.int64)
        for i, k in enumerate(e):
            if k:
                term = K.vec_mul(term, power(i, k))
        acc = K.vec_add(acc, term)
    return acc


def singular_critical_points(F: PolyMap) -> list[tuple[int, int]]:
    """Points of a self-map of the plane with corank ≥ 1 that lie in the bad locus.

    For n = r = 2 these are exactly the common zeros of det dF and its
    gradient: at a corank-1 point the derivative of det is a nonzero
    multiple of the intrinsic differential, and at corank 2 both vanish.
    """
    K = F.field
    if (F.source_dim, F.target_dim) != (2, 2):
        raise PreconditionViolated("the plane scan needs a map from A^2 to A^2")
    J = F.jacobian_polys()
    det = J[0][0].mul(J[1][1]).sub(J[0][1].mul(J[1][0]))
    q = K.cardinality()
    xs, ys = np.meshgrid(np.arange(q, dtype=np.int64), np.arange(q, dtype=np.int64), indexing="ij")
    mask = vec_evaluate(det, (xs, ys)) == 0
    mask &= vec_evaluate(det.derive(0), (xs, ys)) == 0
    mask &= vec_evaluate(det.derive(1), (xs, ys)) == 0
    pts = [(int(a), int(b)) for a, b in zip(xs[mask], ys[mask])]
    logger.debug(f"plane scan over {K.label()}: {len(pts)} singular critical points")
    return pts


def _slice_in_y(f: Poly, x0: Any) -> list[Any]:
    """Coefficients (in y) of f(x0, y)."""
    K = f.field
    coeffs: dict[int, Any] = {}
    for (a, b), c in f.terms.items():
        v = K.mul(c, K.pow(x0, a))
        coeffs[b] = K.add(coeffs.get(b, K.zero), v)
    top = max(coeffs, default=-1)
    return upoly.trim([coeffs.get(b, K.zero) for b in range(top + 1)], K)


def count_critical_points_plane(f: Poly) -> int:
    """Exact number of points of 𝔽_q² where both partials of f vanish.

    A vertical line of critical points contributes q.
    """
    K = f.field
    if f.nvars != 2:
        raise PreconditionViolated("count_critical_points_plane needs a function of two variables")
    fx, fy = f.derive(0), f.derive(1)
    q = K.cardinality()
    total = 0
    for x0 in K.elements():
        g = upoly.gcd(_slice_in_y(fx, x0), _slice_in_y(fy, x0), K)
        if not g:
            total += q
        else:
            total += upoly.count_roots(g, K)
    return total
