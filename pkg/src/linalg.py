"""
Dense exact matrices over an ``ExactField``.

Everything here is Gauss–Jordan elimination with the simplest pivot rule
exact arithmetic allows: scan columns left to right and take the first
row (at or below the current one) with a nonzero entry.  Kernels and
cokernel projections are read off the reduced form, and are fully
determined by the input; reports built on them are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from errors import DimensionMismatch, FieldMismatch, InfiniteField, NotInvertible
from exactfield import ExactField

Vector = tuple[Any, ...]


@dataclass(frozen=True)
class Matrix:
    field: ExactField
    rows: int
    cols: int
    entries: tuple[Any, ...]  # row-major

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatch(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}"
            )

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_rows(cls, field: ExactField, rows: Sequence[Sequence[Any]], cols: int | None = None) -> "Matrix":
        """Build from row sequences; ``cols`` is required when there are no rows."""
        rows = [tuple(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise DimensionMismatch("ragged rows")
        return cls(field, len(rows), cols, tuple(x for r in rows for x in r))

    @classmethod
    def zeros(cls, field: ExactField, rows: int, cols: int) -> "Matrix":
        return cls(field, rows, cols, (field.zero,) * (rows * cols))

    @classmethod
    def identity(cls, field: ExactField, n: int) -> "Matrix":
        return cls(field, n, n, tuple(field.one if i == j else field.zero
                                      for i in range(n) for j in range(n)))

    @classmethod
    def from_columns(cls, field: ExactField, columns: Sequence[Sequence[Any]], rows: int) -> "Matrix":
        """Build from column vectors of length ``rows``."""
        return cls.from_rows(field, [[c[i] for c in columns] for i in range(rows)], cols=len(columns))

    # -- access -------------------------------------------------------------

    def __getitem__(self, ij: tuple[int, int]) -> Any:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> Vector:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> list[list[Any]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "Matrix":
        return Matrix(self.field, self.cols, self.rows,
                      tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]) -> "Matrix":
        """Entries at the given row and column indices, in the order given."""
        rows, cols = list(rows), list(cols)
        return Matrix(self.field, len(rows), len(cols), tuple(self[i, j] for i in rows for j in cols))

    def is_zero(self) -> bool:
        return all(self.field.is_zero(x) for x in self.entries)

    # -- arithmetic -----------------------------------------------------------

    def _check_field(self, other: "Matrix") -> None:
        if other.field != self.field:
            raise FieldMismatch(f"{self.field.label()} vs {other.field.label()}")

    def matmul(self, other: "Matrix") -> "Matrix":
        """Matrix product; both operands must share a field."""
        self._check_field(other)
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        F = self.field
        add, mul, zero = F.add, F.mul, F.zero
        out = []
        for i in range(self.rows):
            r = self.row(i)
            for j in range(other.cols):
                acc = zero
                for t in range(self.cols):
                    if r[t] != zero:
                        acc = add(acc, mul(r[t], other.entries[t * other.cols + j]))
                out.append(acc)
        return Matrix(F, self.rows, other.cols, tuple(out))

    __matmul__ = matmul

    def apply(self, v: Sequence[Any]) -> Vector:
        """Matrix-vector product."""
        if len(v) != self.cols:
            raise DimensionMismatch(f"vector of length {len(v)} for {self.cols} columns")
        F = self.field
        out = []
        for i in range(self.rows):
            acc = F.zero
            for a, b in zip(self.row(i), v):
                if not F.is_zero(a):
                    acc = F.add(acc, F.mul(a, b))
            out.append(acc)
        return tuple(out)

    def add(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("shape mismatch in matrix sum")
        F = self.field
        return Matrix(F, self.rows, self.cols,
                      tuple(F.add(a, b) for a, b in zip(self.entries, other.entries)))

    def hstack(self, other: "Matrix") -> "Matrix":
        """Side-by-side concatenation."""
        self._check_field(other)
        if self.rows != other.rows:
            raise DimensionMismatch("hstack needs equal row counts")
        return Matrix.from_rows(self.field, [self.row(i) + other.row(i) for i in range(self.rows)],
                                cols=self.cols + other.cols)

    def vstack(self, other: "Matrix") -> "Matrix":
        """Stack ``other`` below ``self``."""
        self._check_field(other)
        if self.cols != other.cols:
            raise DimensionMismatch("vstack needs equal column counts")
        return Matrix(self.field, self.rows + other.rows, self.cols, self.entries + other.entries)

    def format(self) -> list[list[str]]:
        """Entries rendered with the field formatter, for tables and JSON."""
        return [[self.field.format(x) for x in self.row(i)] for i in range(self.rows)]


# ---------------------------------------------------------------------------
# Elimination
# ---------------------------------------------------------------------------

def rref(M: Matrix) -> tuple[list[list[Any]], list[int]]:
    """Reduced row echelon form (as row lists) and pivot columns."""
    F = M.field
    add, mul, inv, is_zero, neg = F.add, F.mul, F.inv, F.is_zero, F.neg
    A = M.to_rows()
    pivots: list[int] = []
    r = 0
    for c in range(M.cols):
        if r == M.rows:
            break
        pr = next((i for i in range(r, M.rows) if not is_zero(A[i][c])), None)
        if pr is None:
            continue
        A[r], A[pr] = A[pr], A[r]
        s = inv(A[r][c])
        A[r] = [mul(s, x) for x in A[r]]
        pivot_row = A[r]
        for i in range(M.rows):
            if i != r and not is_zero(A[i][c]):
                f = neg(A[i][c])
                A[i] = [add(x, mul(f, y)) if not is_zero(y) else x for x, y in zip(A[i], pivot_row)]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M: Matrix) -> int:
    """Rank over the matrix field."""
    return len(rref(M)[1])


def kernel(M: Matrix) -> list[Vector]:
    """Basis of {v : Mv = 0}, one vector per free column (in column order)."""
    F = M.field
    R, pivots = rref(M)
    pivot_set = set(pivots)
    basis = []
    for free in range(M.cols):
        if free in pivot_set:
            continue
        v = [F.zero] * M.cols
        v[free] = F.one
        for row_idx, pc in enumerate(pivots):
            v[pc] = F.neg(R[row_idx][free])
        basis.append(tuple(v))
    return basis


def cokernel_projection(M: Matrix) -> Matrix:
    """(rows - rank) x rows matrix P of full row rank with P·M = 0."""
    left = kernel(M.transpose())
    return Matrix.from_rows(M.field, left, cols=M.rows) if left else Matrix.zeros(M.field, 0, M.rows)


@dataclass(frozen=True)
class RankProfile:
    rank: int
    kernel_basis: list[Vector]
    cokernel_projection: Matrix


def rank_profile(M: Matrix) -> RankProfile:
    """Rank, kernel basis and cokernel projection in one elimination pass."""
    kb = kernel(M)
    return RankProfile(rank=M.cols - len(kb), kernel_basis=kb, cokernel_projection=cokernel_projection(M))


def solve_linear(A: Matrix, b: Sequence[Any]) -> Vector | None:
    """Some x with Ax = b (free variables zero), or None if b is not in the column span."""
    if len(b) != A.rows:
        raise DimensionMismatch(f"right-hand side of length {len(b)} for {A.rows} rows")
    F = A.field
    aug = Matrix.from_rows(F, [A.row(i) + (b[i],) for i in range(A.rows)], cols=A.cols + 1)
    R, pivots = rref(aug)
    if pivots and pivots[-1] == A.cols:
        return None
    x = [F.zero] * A.cols
    for row_idx, pc in enumerate(pivots):
        x[pc] = R[row_idx][A.cols]
    return tuple(x)


def inverse(M: Matrix) -> Matrix:
    """Inverse of a square matrix."""
    if M.rows != M.cols:
        raise DimensionMismatch("only square matrices have inverses")
    n = M.rows
    R, pivots = rref(M.hstack(Matrix.identity(M.field, n)))
    if pivots[:n] != list(range(n)):
        raise NotInvertible("matrix is singular")
    return Matrix.from_rows(M.field, [row[n:] for row in R], cols=n)


def determinant_is_zero(M: Matrix) -> bool:
    return rank(M) < M.rows


# ---------------------------------------------------------------------------
# 𝔽_2 fast path
# ---------------------------------------------------------------------------

def rank_gf2(rows: Iterable[int]) -> int:
    """Rank of a 𝔽_2 matrix given as integer bitmask rows."""
    pivots: dict[int, int] = {}
    r = 0
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top in pivots:
                row ^= pivots[top]
            else:
                pivots[top] = row
                r += 1
                break
    return r


def to_bitmask_rows(M: Matrix) -> list[int]:
    """Encode a 𝔽_2 matrix as bitmask rows (bit j = column j)."""
    return [sum(1 << j for j, x in enumerate(M.row(i)) if x) for i in range(M.rows)]


def batch_rank(field: ExactField, stack: np.ndarray) -> np.ndarray:
    """Ranks of a stack of finite-field matrices, shape (count, rows, cols), as code arrays.

    Gauss–Jordan on every matrix at once: per column, each matrix takes its
    first unused row with a nonzero entry as pivot and clears that column
    elsewhere.  Agrees with ``rank`` matrix by matrix.
    """
    if not field.is_finite():
        raise InfiniteField("batched ranks need a finite field")
    if stack.ndim != 3:
        raise DimensionMismatch(f"expected a (count, rows, cols) stack, got shape {stack.shape}")
    M = np.array(stack, dtype=np.int64)
    count, rows, cols = M.shape
    ranks = np.zeros(count, dtype=np.int64)
    if rows == 0:
        return ranks
    used = np.zeros((count, rows), dtype=bool)
    every = np.arange(count)
    row_ids = np.arange(rows)
    for j in range(cols):
        candidates = (M[:, :, j] != 0) & ~used
        has = candidates.any(axis=1)
        if not has.any():
            continue
        piv = candidates.argmax(axis=1)
        pivot_rows = M[every, piv, :]
        pivot_rows = field.vec_mul(field.vec_inv(pivot_rows[:, j])[:, None], pivot_rows)
        factors = np.where(has[:, None] & (row_ids[None, :] != piv[:, None]), M[:, :, j], 0)
        M = field.vec_sub(M, field.vec_mul(factors[:, :, None], pivot_rows[:, None, :]))
        M[every[has], piv[has], :] = pivot_rows[has]
        used[every[has], piv[has]] = True
        ranks += has
    return ranks
