"""
Empirical verification engine for the constrained-bilinear strata.

A constrained map is a linear map h : E → Hom(A, F) (A ⊆ E, dim E = e,
dim A = a, dim F = f) whose f bilinear components restrict to symmetric
(``box_sym``) or alternating (``box_alt``) forms on A × A.  The free
coordinates, in order, are for each component ℓ:

1. the A × A block: entries (s, t) with s ≤ t (symmetric) or s < t
   (alternating), row-major;
2. the (E/A) × A block: rows s = a … e−1, columns t = 0 … a−1.

``realize`` turns coordinates into the e × (a·f) matrix of h, column
(ℓ, t) at index ℓ·a + t.  A map lies in Δ^{i,p} when
rank h = min(e, af) − i and dim(ker h ∩ A) = p; the latter is read as
a − rank of the first a rows.

Three engines live here: exhaustive enumeration (``stratum_census``),
explicit witnesses for nonempty strata (``witness``), and Monte-Carlo
codimension estimates over a tower of finite fields
(``estimate_codim_mc``).  Enumeration splits the coordinate space into
contiguous index chunks; Monte-Carlo workers draw from independent
``SeedSequence`` substreams.  Both merge by addition, so results depend
only on (seed, worker count).
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Any, Callable, Iterator, Protocol, Sequence

import numpy as np
import pandas as pd

from codim import DeltaSpec, Symmetry, ambient_dim, delta_nonempty
from config import CENSUS_BUDGET, CENSUS_CHUNK, MC_BATCH, MC_Z, MIN_MC_SAMPLES
from errors import BudgetExceeded, DegenerateTower, EmptyStratum, PreconditionViolated
from exactfield import ExactField, FieldKind, field_create
from linalg import Matrix, batch_rank, rank, rank_gf2

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Constrained maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstrainedSpec:
    e: int
    a: int
    f: int
    sym: Symmetry
    field: ExactField

    def __post_init__(self) -> None:
        if not (0 <= self.a <= self.e) or self.f < 0:
            raise PreconditionViolated(f"need 0 <= a <= e, f >= 0 (got e={self.e}, a={self.a}, f={self.f})")

    @property
    def ambient_dim(self) -> int:
        return ambient_dim(self.e, self.a, self.f, self.sym)

    @property
    def max_rank(self) -> int:
        return min(self.e, self.a * self.f)

    def block_pairs(self) -> list[tuple[int, int]]:
        """Upper-triangular index pairs carried by each A-block form."""
        a = self.a
        if self.sym is Symmetry.BOX_SYM:
            return [(s, t) for s in range(a) for t in range(s, a)]
        return [(s, t) for s in range(a) for t in range(s + 1, a)]

    def coordinate_positions(self) -> list[list[tuple[int, int, int]]]:
        """For each coordinate, the matrix cells it fills as (row, col, sign)."""
        a = self.a
        out: list[list[tuple[int, int, int]]] = []
        for ell in range(self.f):
            for s, t in self.block_pairs():
                cells = [(s, ell * a + t, 1)]
                if s != t:
                    cells.append((t, ell * a + s, self.sym.sign))
                out.append(cells)
            for s in range(a, self.e):
                for t in range(a):
                    out.append([(s, ell * a + t, 1)])
        return out

    def label(self) -> dict[str, Any]:
        """Parameter columns shared by census rows and JSON reports."""
        return {"e": self.e, "a": self.a, "f": self.f, "sym": self.sym.value, "field": self.field.label()}


@dataclass(frozen=True)
class ConstrainedMap:
    """A coordinate vector together with its realized e x (a·f) matrix."""
    spec: ConstrainedSpec
    data: tuple[Any, ...]
    realized: Matrix


def realize(spec: ConstrainedSpec, data: Sequence[Any]) -> ConstrainedMap:
    """Place *data* into the matrix cells named by ``coordinate_positions``."""
    if len(data) != spec.ambient_dim:
        raise PreconditionViolated(f"{len(data)} coordinates for ambient dimension {spec.ambient_dim}")
    K = spec.field
    cols = spec.a * spec.f
    cells = [[K.zero] * cols for _ in range(spec.e)]
    for value, positions in zip(data, spec.coordinate_positions()):
        for row, col, sign in positions:
            cells[row][col] = value if sign > 0 else K.neg(value)
    return ConstrainedMap(spec, tuple(data), Matrix.from_rows(K, cells, cols=cols))


def classify_map(cmap: ConstrainedMap) -> tuple[int, int]:
    """(i, p) of a constrained map."""
    spec, M = cmap.spec, cmap.realized
    i = spec.max_rank - rank(M)
    p = spec.a - rank(M.submatrix(range(spec.a), range(M.cols)))
    return i, p


def sample_constrained(spec: ConstrainedSpec, rng: np.random.Generator) -> ConstrainedMap:
    """One uniformly random constrained map."""
    return realize(spec, [spec.field.random_element(rng) for _ in range(spec.ambient_dim)])


def realize_batch(spec: ConstrainedSpec, data: np.ndarray) -> np.ndarray:
    """Stack of realized matrices, shape (count, e, a·f), from coordinate rows of codes."""
    K = spec.field
    if data.ndim != 2 or data.shape[1] != spec.ambient_dim:
        raise PreconditionViolated(f"coordinate rows of shape {data.shape} for ambient dimension {spec.ambient_dim}")
    stack = np.zeros((data.shape[0], spec.e, spec.a * spec.f), dtype=np.int64)
    for k, positions in enumerate(spec.coordinate_positions()):
        column = data[:, k]
        for row, col, sign in positions:
            stack[:, row, col] = column if sign > 0 else K.vec_neg(column)
    return stack


def classify_batch(spec: ConstrainedSpec, data: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(i, p) arrays for many constrained maps over a finite field at once."""
    stack = realize_batch(spec, data)
    i = spec.max_rank - batch_rank(spec.field, stack)
    p = spec.a - batch_rank(spec.field, stack[:, :spec.a, :])
    return i, p


def _index_to_data(index: int, q: int, dim: int) -> list[int]:
    out = []
    for _ in range(dim):
        index, digit = divmod(index, q)
        out.append(digit)
    return out


def _check_budget(spec: ConstrainedSpec, budget: int) -> int:
    """Total number of maps for *spec*; raises ``BudgetExceeded`` above *budget*."""
    if not spec.field.is_finite():
        raise PreconditionViolated("enumeration needs a finite field")
    total = spec.field.cardinality() ** spec.ambient_dim
    if total > budget:
        raise BudgetExceeded(f"{total} maps for {spec.label()} exceed the budget of {budget}")
    return total


def enumerate_constrained(spec: ConstrainedSpec, budget: int = CENSUS_BUDGET,
                          start: int = 0, stop: int | None = None) -> Iterator[ConstrainedMap]:
    """Every constrained map once, in coordinate-index order (little-endian digits)."""
    total = _check_budget(spec, budget)
    yield from _maps_in_range(spec, start, total if stop is None else min(stop, total))


def _maps_in_range(spec: ConstrainedSpec, start: int, stop: int) -> Iterator[ConstrainedMap]:
    """Maps with coordinate index in [start, stop); the caller has checked the budget."""
    q = spec.field.cardinality()
    for index in range(start, stop):
        yield realize(spec, _index_to_data(index, q, spec.ambient_dim))


# ---------------------------------------------------------------------------
# Census
# ---------------------------------------------------------------------------

@dataclass
class CensusTable:
    """Counts of constrained maps per (i, p) stratum."""
    spec: ConstrainedSpec
    counts: dict[tuple[int, int], int]
    total: int

    def occupied(self) -> set[tuple[int, int]]:
        """Strata with at least one map."""
        return {k for k, v in self.counts.items() if v}

    def rank_counts(self) -> dict[int, int]:
        """Counts keyed by rank instead of (i, p)."""
        out: Counter[int] = Counter()
        for (i, _), v in self.counts.items():
            out[self.spec.max_rank - i] += v
        return dict(sorted(out.items()))

    def to_frame(self) -> pd.DataFrame:
        """One row per stratum, in (i, p) order."""
        label = self.spec.label()
        rows = [{**label, "i": i, "p": p, "count": c} for (i, p), c in sorted(self.counts.items())]
        return pd.DataFrame(rows, columns=["e", "a", "f", "sym", "field", "i", "p", "count"])

    def to_dict(self) -> dict[str, Any]:
        return {**self.spec.label(), "total": self.total,
                "strata": [{"i": i, "p": p, "count": c} for (i, p), c in sorted(self.counts.items())]}


def _census_chunk_gf2(spec: ConstrainedSpec, start: int, stop: int) -> Counter:
    # bitmask rows; signs are irrelevant in characteristic 2
    contributions = [
        [(row, 1 << col) for row, col, _ in cells] for cells in spec.coordinate_positions()
    ]
    counts: Counter = Counter()
    a, e, max_rank = spec.a, spec.e, spec.max_rank
    for index in range(start, stop):
        rows = [0] * e
        bits, k = index, 0
        while bits:
            if bits & 1:
                for row, mask in contributions[k]:
                    rows[row] ^= mask
            bits >>= 1
            k += 1
        counts[(max_rank - rank_gf2(rows), a - rank_gf2(rows[:a]))] += 1
    return counts


def _census_chunk(spec: ConstrainedSpec, start: int, stop: int) -> Counter:
    """Stratum counts for the coordinate indices in [start, stop)."""
    if spec.field.kind is FieldKind.PRIME and spec.field.p == 2:
        return _census_chunk_gf2(spec, start, stop)
    counts: Counter = Counter()
    for cmap in _maps_in_range(spec, start, stop):
        counts[classify_map(cmap)] += 1
    return counts


def stratum_census(spec: ConstrainedSpec, workers: int = 1, budget: int = CENSUS_BUDGET,
                   chunk: int = CENSUS_CHUNK) -> CensusTable:
    """Exhaustive (i, p) counts over a finite field, split into chunks across *workers*."""
    total = _check_budget(spec, budget)
    bounds = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    counts: Counter = Counter()
    if workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_census_chunk, [spec] * len(bounds), *zip(*bounds)):
                counts.update(part)
    else:
        for s, t in bounds:
            counts.update(_census_chunk(spec, s, t))
    logger.info(f"census {spec.label()}: {total} maps, {len(counts)} occupied strata")
    return CensusTable(spec, dict(sorted(counts.items())), total)


# ---------------------------------------------------------------------------
# Witnesses
# ---------------------------------------------------------------------------

def _data_from_blocks(spec: ConstrainedSpec, forms: list[list[list[Any]]],
                      free_rows: list[list[Any]]) -> list[Any]:
    """Coordinate vector for the given A-block forms and free E/A rows."""
    data = []
    for ell in range(spec.f):
        data.extend(forms[ell][s][t] for s, t in spec.block_pairs())
        for s in range(spec.a, spec.e):
            data.extend(free_rows[s - spec.a][ell * spec.a + t] for t in range(spec.a))
    return data


def witness(spec: ConstrainedSpec, i: int, p: int) -> ConstrainedMap:
    """An explicit constrained map in Δ^{i,p}.

    The A-block carries rank a − p: a diagonal for symmetric data, disjoint
    hyperbolic pairs when a − p is even, and for odd a − p ≥ 3 a chain
    v_0∧v_1 + … + v_{k−3}∧v_{k−2} in the first form plus v_{k−1}∧v_0 in the
    second.  The remaining n − (a − p) rank comes from rows of E/A chosen
    as unit vectors outside the A-row span.
    """
    dspec = DeltaSpec(spec.e, spec.a, spec.f, i, p, spec.sym)
    if not delta_nonempty(dspec):
        raise EmptyStratum(f"Δ^({i},{p}) is empty for {spec.label()}")
    K = spec.field
    one, minus = K.one, K.neg(K.one)
    e, a, f, n = spec.e, spec.a, spec.f, dspec.n
    k = a - p
    forms = [[[K.zero] * a for _ in range(a)] for _ in range(f)]
    if spec.sym is Symmetry.BOX_SYM:
        for s in range(k):
            forms[0][s][s] = one
    elif k % 2 == 0:
        for m in range(k // 2):
            forms[0][2 * m][2 * m + 1], forms[0][2 * m + 1][2 * m] = one, minus
    else:
        for s in range(k - 2):
            forms[0][s][s + 1], forms[0][s + 1][s] = one, minus
        forms[1][k - 1][0], forms[1][0][k - 1] = one, minus

    cols = a * f
    a_rows = [[forms[ell][s][t] for ell in range(f) for t in range(a)] for s in range(a)]
    span = list(a_rows)
    current = rank(Matrix.from_rows(K, span, cols=cols)) if span else 0
    free_rows = [[K.zero] * cols for _ in range(e - a)]
    filled = 0
    for col in range(cols):
        if filled == n - k:
            break
        unit = [one if c == col else K.zero for c in range(cols)]
        trial = rank(Matrix.from_rows(K, span + [unit], cols=cols))
        if trial > current:
            span.append(unit)
            current = trial
            free_rows[filled] = unit
            filled += 1

    cmap = realize(spec, _data_from_blocks(spec, forms, free_rows))
    got = classify_map(cmap)
    if got != (i, p):
        raise PreconditionViolated(f"witness for ({i},{p}) classified as {got}")
    return cmap


# ---------------------------------------------------------------------------
# Monte-Carlo trials
# ---------------------------------------------------------------------------

class Trial(Protocol):
    def __call__(self, field: ExactField, rng: np.random.Generator) -> bool: ...


@dataclass(frozen=True)
class DeltaTrial:
    """Is a uniformly random constrained map in Δ^{i,p}?"""
    e: int
    a: int
    f: int
    sym: Symmetry
    i: int
    p: int

    def __call__(self, field: ExactField, rng: np.random.Generator) -> bool:
        spec = ConstrainedSpec(self.e, self.a, self.f, self.sym, field)
        return classify_map(sample_constrained(spec, rng)) == (self.i, self.p)

    def batch(self, field: ExactField, rng: np.random.Generator, count: int) -> int:
        spec = ConstrainedSpec(self.e, self.a, self.f, self.sym, field)
        i, p = classify_batch(spec, rng.integers(0, field.cardinality(), size=(count, spec.ambient_dim)))
        return int(np.count_nonzero((i == self.i) & (p == self.p)))


@dataclass(frozen=True)
class SingularMatrixTrial:
    """Is a uniformly random square matrix singular?"""
    size: int

    def __call__(self, field: ExactField, rng: np.random.Generator) -> bool:
        M = Matrix.from_rows(field, [[field.random_element(rng) for _ in range(self.size)]
                                     for _ in range(self.size)], cols=self.size)
        return rank(M) < self.size

    def batch(self, field: ExactField, rng: np.random.Generator, count: int) -> int:
        stack = rng.integers(0, field.cardinality(), size=(count, self.size, self.size))
        return int(np.count_nonzero(batch_rank(field, stack) < self.size))


@dataclass(frozen=True)
class CriticalJetTrial:
    """Corank ≥ i of a random map at a point; only its uniform 1-jet matters."""
    n: int
    r: int
    i: int

    def __call__(self, field: ExactField, rng: np.random.Generator) -> bool:
        J = Matrix.from_rows(field, [[field.random_element(rng) for _ in range(self.n)]
                                     for _ in range(self.r)], cols=self.n)
        return min(self.n, self.r) - rank(J) >= self.i

    def batch(self, field: ExactField, rng: np.random.Generator, count: int) -> int:
        stack = rng.integers(0, field.cardinality(), size=(count, self.r, self.n))
        return int(np.count_nonzero(min(self.n, self.r) - batch_rank(field, stack) >= self.i))


@dataclass(frozen=True)
class NeverTrial:
    """Never hits; drives the empty-tower error path."""
    def __call__(self, field: ExactField, rng: np.random.Generator) -> bool:
        return False


# ---------------------------------------------------------------------------
# Tower fits
# ---------------------------------------------------------------------------

@dataclass
class CodimEstimate:
    tower: list[str]
    cardinalities: list[int]
    hits: list[int]
    samples: list[int]
    estimate: float
    halfwidth: float
    formula_codim: int | None = None
    seed: int | None = None
    workers: int = 1
    fitted_levels: list[str] = dc_field(default_factory=list)

    @property
    def fractions(self) -> list[Fraction]:
        return [Fraction(h, s) for h, s in zip(self.hits, self.samples)]

    def as_fraction(self, max_denominator: int = 100) -> Fraction:
        """The estimate as a nearby fraction."""
        return Fraction(self.estimate).limit_denominator(max_denominator)

    def agree(self, tolerance: float) -> bool | None:
        """Whether the estimate lies within *tolerance* of the formula; ``None`` without one."""
        if self.formula_codim is None:
            return None
        return abs(self.estimate - self.formula_codim) <= tolerance

    def to_dict(self, tolerance: float | None = None) -> dict[str, Any]:
        out: dict[str, Any] = {
            "tower": self.tower,
            "fractions": [str(fr) for fr in self.fractions],
            "hits": self.hits,
            "samples": self.samples,
            "estimate": round(self.estimate, 6),
            "halfwidth": round(self.halfwidth, 6),
            "formula_codim": self.formula_codim,
        }
        if tolerance is not None:
            out["agree"] = self.agree(tolerance)
        return out


def _mc_worker(trial: Callable, field: ExactField, seq: np.random.SeedSequence, count: int) -> int:
    """Hits among *count* samples; trials with a ``batch`` method are drawn MC_BATCH at a time."""
    rng = np.random.default_rng(seq)
    batch = getattr(trial, "batch", None)
    if batch is None:
        return sum(1 for _ in range(count) if trial(field, rng))
    hits = 0
    for start in range(0, count, MC_BATCH):
        hits += batch(field, rng, min(MC_BATCH, count - start))
    return hits


def _split(total: int, parts: int) -> list[int]:
    """Near-equal sample shares, one per worker."""
    base, extra = divmod(total, parts)
    return [base + (1 if w < extra else 0) for w in range(parts)]


def estimate_codim_mc(trial: Trial, tower: Sequence[ExactField], samples_per_field: int,
                      seed: int, workers: int = 1, formula_codim: int | None = None) -> CodimEstimate:
    """Fit the codimension c in  hit fraction ≈ C·q^(−c)  along a field tower.

    The estimate is the least-squares slope of −ln(fraction) against ln q;
    its half-width propagates binomial errors through the fit.
    """
    if len(tower) < 3:
        raise PreconditionViolated("a tower needs at least three fields")
    chars = {K.characteristic() for K in tower}
    if len(chars) != 1 or 0 in chars:
        raise PreconditionViolated("tower fields must be finite and share one characteristic")
    if samples_per_field < MIN_MC_SAMPLES:
        logger.warning(f"only {samples_per_field} samples per field; fits below {MIN_MC_SAMPLES} are noisy")
    level_seqs = np.random.SeedSequence(seed).spawn(len(tower))
    hits: list[int] = []
    for K, level_seq in zip(tower, level_seqs):
        shares = _split(samples_per_field, workers)
        seqs = level_seq.spawn(workers)
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                level_hits = sum(pool.map(_mc_worker, [trial] * workers, [K] * workers, seqs, shares))
        else:
            level_hits = _mc_worker(trial, K, seqs[0], shares[0])
        hits.append(level_hits)
        logger.info(f"MC level {K.label()}: {level_hits} / {samples_per_field} hits")

    qs = [K.cardinality() for K in tower]
    used = [(q, h) for q, h in zip(qs, hits) if h > 0]
    if not used:
        raise DegenerateTower("no hits at any level of the tower")
    if len(used) < 2:
        raise DegenerateTower("hits at fewer than two levels; cannot fit a slope")
    x = np.array([math.log(q) for q, _ in used])
    y = np.array([-math.log(h / samples_per_field) for _, h in used])
    slope = float(np.polyfit(x, y, 1)[0])
    var_y = np.array([(1 - h / samples_per_field) / h for _, h in used])
    dx = x - x.mean()
    se = math.sqrt(float(np.sum(dx ** 2 * var_y))) / float(np.sum(dx ** 2))
    return CodimEstimate(
        tower=[K.label() for K in tower],
        cardinalities=qs,
        hits=hits,
        samples=[samples_per_field] * len(tower),
        estimate=slope,
        halfwidth=MC_Z * se,
        formula_codim=formula_codim,
        seed=seed,
        workers=workers,
        fitted_levels=[K.label() for K, h in zip(tower, hits) if h > 0],
    )


def tower_fields(labels: Sequence[str]) -> list[ExactField]:
    """Fields for a list of field labels such as ``F2``, ``F4``, ``F8``."""
    from exactfield import FieldSpec

    return [field_create(FieldSpec.parse(s)) for s in labels]
