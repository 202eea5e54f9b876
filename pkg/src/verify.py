"""Acceptance battery for charstrat.

Runs the eleven acceptance checks (closed forms against brute force,
exhaustive censuses, Monte-Carlo tower fits, normal-form properties) and
prints a clear report.  Importable (``run_verification()``) or reachable
through ``charstrat verify``.

``quick`` mode shrinks every sample size so the whole battery finishes in
CI time; ``full`` mode uses the acceptance sizes from ``config.VERIFY_FULL``.
Exit code 1 when any check fails.
"""

from __future__ import annotations

import logging
import sys
import time
from itertools import product
from typing import Any, Callable

import numpy as np

from census import (ConstrainedSpec, DeltaTrial, SingularMatrixTrial, estimate_codim_mc,
                    stratum_census, tower_fields)
from codim import (CMinSpec, DeltaSpec, Symmetry, box_rank_stratum_codim, brute_force_min_C,
                   c_value, crit_codim, delta_codim, delta_nonempty, first_degeneracy_codim,
                   minimize_C, second_order_codim)
from config import (CRIT_MIN_PASS_FRACTION, CRIT_POINT_CAP, CUBIC_MAX_SINGULAR_POINTS,
                    CUBIC_MIN_ONE_POINT_FRACTION, MC_TOLERANCE, VERIFY_FULL, VERIFY_QUICK)
from exactfield import ExactField, FieldSpec, field_create
from jets import monomial_system, sample_member
from linalg import Matrix, inverse, rank
from morse import milnor, morse_with_params, right_equiv_truncated
from poly import Poly, PolyMap, jet2_at, monomials, series_compose
from strata import (count_critical_points_plane, intrinsic_differential_at, project_hessian,
                    second_intrinsic_differential_at, singular_critical_points, symbol_at,
                    transport_differential)

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# ANSI helpers: colour only when stdout is an interactive terminal
# ---------------------------------------------------------------------------
_USE_COLOR = hasattr(sys.stdout, "isatty") and sys.stdout.isatty()


def _c(code: str, text: str) -> str:
    if not _USE_COLOR:
        return text
    return f"\033[{code}m{text}\033[0m"


def _bold(text: str) -> str:
    return _c("1", text)


def _green(text: str) -> str:
    return _c("32", text)


def _red(text: str) -> str:
    return _c("31", text)


def _dim(text: str) -> str:
    return _c("2", text)


def _field(label: str) -> ExactField:
    return field_create(FieldSpec.parse(label))


def random_poly(K: ExactField, n: int, rng: np.random.Generator, min_degree: int, max_degree: int,
                terms: int, variables: list[int] | None = None) -> Poly:
    """A sparse random polynomial with ``terms`` monomials drawn from the given degree band."""
    pool = monomials(n, max_degree, min_degree)
    if variables is not None:
        allowed = set(variables)
        pool = [e for e in pool if all(k == 0 or i in allowed for i, k in enumerate(e))]
    if not pool:
        return Poly.zero(K, n)
    picks = rng.choice(len(pool), size=min(terms, len(pool)), replace=False)
    return Poly(K, n, {pool[int(k)]: K.random_nonzero(rng) for k in picks})


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def _check_minimal_codim(sizes: dict[str, int], rng: np.random.Generator, workers: int) -> tuple[bool, str]:
    """Closed-form minimum of C against brute force over a grid of (e, a, f, sign)."""
    top = 12 if sizes is VERIFY_FULL else 8
    cases = mismatches = 0
    first_bad = None
    for e in range(1, top + 1):
        for a in range(1, e + 1):
            for f in range(1, 7):
                if a * f > e:
                    continue
                for sign in Symmetry:
                    spec = CMinSpec(e, a, f, sign)
                    cases += 1
                    if minimize_C(spec)[0] != brute_force_min_C(spec)[0]:
                        mismatches += 1
                        first_bad = first_bad or spec
    detail = f"{cases} (e,a,f,sign) cases, {mismatches} mismatches"
    if first_bad:
        detail += f"; first: {first_bad}"
    return mismatches == 0, detail


def _census_specs(K: ExactField, cap: int):
    """Every constrained spec whose ambient dimension fits under *cap*."""
    for sym in Symmetry:
        for e in range(1, cap + 2):
            for a in range(1, e + 1):
                for f in range(1, cap + 1):
                    spec = ConstrainedSpec(e, a, f, sym, K)
                    if spec.ambient_dim <= cap:
                        yield spec


def _check_delta_census(sizes: dict[str, int], rng: np.random.Generator, workers: int) -> tuple[bool, str]:
    """Census occupancy over F2 and F3 against the nonemptiness predicate."""
    checked = 0
    for label, key in (("F2", "census_dim_f2"), ("F3", "census_dim_f3")):
        K = _field(label)
        for spec in _census_specs(K, sizes[key]):
            table = stratum_census(spec, workers=workers)
            predicted = {
                (i, p)
                for i in range(0, spec.max_rank + 1)
                for p in range(0, spec.a + 1)
                if delta_nonempty(DeltaSpec(spec.e, spec.a, spec.f, i, p, spec.sym))
            }
            if table.occupied() != predicted:
                diff = sorted(table.occupied() ^ predicted)
                return False, f"{spec.label()}: occupancy differs at {diff}"
            checked += 1
    return True, f"{checked} constrained specs: occupancy matches the nonemptiness predicate"


def _mc_candidates(max_codim: int) -> list[DeltaSpec]:
    """Nonempty strata of codimension 1..max_codim, interleaving symmetric and alternating blocks."""
    by_sym: dict[Symmetry, list[tuple]] = {s: [] for s in Symmetry}
    for sym in Symmetry:
        for e in range(1, 5):
            for a in range(1, e + 1):
                for f in range(1, 3):
                    for i in range(1, min(e, a * f) + 1):
                        for p in range(0, a + 1):
                            ds = DeltaSpec(e, a, f, i, p, sym)
                            c = delta_codim(ds)
                            if c is not None and 1 <= c <= max_codim:
                                by_sym[sym].append((c, e, a, f, i, p, ds))
    for rows in by_sym.values():
        rows.sort(key=lambda t: t[:6])
    out = []
    for pair in zip(by_sym[Symmetry.BOX_SYM], by_sym[Symmetry.BOX_ALT]):
        out.extend(t[-1] for t in pair)
    return out


def _check_delta_mc(sizes: dict[str, int], rng: np.random.Generator, workers: int) -> tuple[bool, str]:
    """Tower fits for low-codimension strata, plus a singular-matrix control."""
    max_codim = 4 if sizes is VERIFY_FULL else 1
    specs = _mc_candidates(max_codim)[: sizes["mc_specs"]]
    tower = tower_fields(["F2", "F4", "F16"])
    seed = int(rng.integers(2 ** 32))
    worst = 0.0
    for ds in specs:
        trial = DeltaTrial(ds.e, ds.a, ds.f, ds.sym, ds.i, ds.p)
        est = estimate_codim_mc(trial, tower, sizes["mc_samples"], seed, workers, delta_codim(ds))
        worst = max(worst, abs(est.estimate - est.formula_codim))
        if not est.agree(MC_TOLERANCE):
            return False, (f"Δ({ds.e},{ds.a},{ds.f},{ds.i},{ds.p},{ds.sym.value}): "
                           f"fit {est.estimate:.3f} vs formula {est.formula_codim}")
    # a control whose point count is known exactly
    est = estimate_codim_mc(SingularMatrixTrial(2), tower, sizes["mc_samples"], seed, workers, 1)
    if not est.agree(MC_TOLERANCE):
        return False, f"singular 2x2 control: fit {est.estimate:.3f} vs 1"
    return True, f"{len(specs)} strata + control within ±{MC_TOLERANCE} (worst deviation {worst:.3f})"


def _naive_rank_counts(e: int, f: int, sym: Symmetry, K: ExactField) -> dict[int, int]:
    """Corank counts of f-tuples of forms, by direct enumeration of matrices."""
    slots = [(s, t) for s in range(e) for t in range(s if sym is Symmetry.BOX_SYM else s + 1, e)]
    elems = list(K.elements())
    counts: dict[int, int] = {}
    for values in product(elems, repeat=len(slots) * f):
        blocks = []
        for ell in range(f):
            M = [[K.zero] * e for _ in range(e)]
            for (s, t), v in zip(slots, values[ell * len(slots):(ell + 1) * len(slots)]):
                M[s][t] = v
                M[t][s] = v if sym is Symmetry.BOX_SYM else K.neg(v)
            blocks.append(M)
        rows = [[x for M in blocks for x in M[s]] for s in range(e)]
        corank = min(e, e * f) - rank(Matrix.from_rows(K, rows, cols=e * f))
        counts[corank] = counts.get(corank, 0) + 1
    return counts


def _check_box_census(sizes: dict[str, int], rng: np.random.Generator, workers: int) -> tuple[bool, str]:
    """Form-space censuses against direct matrix enumeration."""
    checked = 0
    for label, key in (("F2", "census_dim_f2"), ("F3", "census_dim_f3")):
        K = _field(label)
        for sym in Symmetry:
            for e in range(1, 5):
                for f in range(1, 3):
                    spec = ConstrainedSpec(e, e, f, sym, K)
                    if spec.ambient_dim > sizes[key]:
                        continue
                    table = stratum_census(spec, workers=workers)
                    by_i: dict[int, int] = {}
                    for (i, _), cnt in table.counts.items():
                        by_i[i] = by_i.get(i, 0) + cnt
                    if by_i != _naive_rank_counts(e, f, sym, K):
                        return False, f"{spec.label()}: census disagrees with direct enumeration"
                    predicted = {i for i in range(0, e + 1) if box_rank_stratum_codim(e, f, i, sym) is not None}
                    if set(by_i) != predicted:
                        return False, f"{spec.label()}: occupied coranks {sorted(by_i)} vs {sorted(predicted)}"
                    checked += 1
    return True, f"{checked} form spaces agree with direct enumeration and the occupancy rule"


def _check_cubic_example(sizes: dict[str, int], rng: np.random.Generator, workers: int) -> tuple[bool, str]:
    """Random plane cubic maps over F2^k are singular at about one point."""
    K = _field(f"F2^{sizes['cubic_field_bits']}")
    W = monomial_system(K, 2, 2, 3)
    counts = []
    for _ in range(sizes["cubic_samples"]):
        counts.append(len(singular_critical_points(sample_member(W, rng))))
    ones = sum(1 for c in counts if c == 1)
    passed = (ones >= CUBIC_MIN_ONE_POINT_FRACTION * len(counts)
              and max(counts) <= CUBIC_MAX_SINGULAR_POINTS)
    return passed, f"{ones}/{len(counts)} cubic maps over {K.label()} singular at exactly one point (max {max(counts)})"


def _check_critical_dimension(sizes: dict[str, int], rng: np.random.Generator, workers: int) -> tuple[bool, str]:
    """Critical loci of random plane cubics have the expected dimension over F101."""
    base, ext = _field("F101"), _field("F101^2")
    W = monomial_system(base, 2, 1, 3)
    ok = 0
    worst = 0
    for seed in range(sizes["crit_seeds"]):
        f = sample_member(W, seed).components[0]
        lifted = Poly(ext, 2, f.terms)  # prime-field codes embed unchanged
        counts = (count_critical_points_plane(f), count_critical_points_plane(lifted))
        worst = max(worst, *counts)
        ok += all(c <= CRIT_POINT_CAP for c in counts)
    passed = ok >= CRIT_MIN_PASS_FRACTION * sizes["crit_seeds"]
    return passed, f"{ok}/{sizes['crit_seeds']} seeds with at most {CRIT_POINT_CAP} critical points (max {worst})"


def random_morse_instance(K: ExactField, rng: np.random.Generator, max_vars: int) -> tuple[Poly, int]:
    """A series with some parameters and no linear term in the fiber variables."""
    n = int(rng.integers(1, max_vars + 1))
    s = int(rng.integers(0, n))
    fiber = list(range(s, n))
    F = random_poly(K, n, rng, 2, 2, 3, variables=fiber)
    F = F.add(random_poly(K, n, rng, 2, 4, 3))
    if s:
        F = F.add(random_poly(K, n, rng, 1, 1, 1, variables=list(range(s))))
    return F, s


def _check_morse(sizes: dict[str, int], rng: np.random.Generator, workers: int) -> tuple[bool, str]:
    """Parametrised splitting lemma over Q and small fields."""
    N = 8 if sizes is VERIFY_FULL else 6
    max_vars = 4 if sizes is VERIFY_FULL else 3
    total = 0
    for label in ("Q", "F2", "F3", "F5"):
        K = _field(label)
        for _ in range(sizes["morse_instances"]):
            F, s = random_morse_instance(K, rng, max_vars)
            split = morse_with_params(F, s, N)
            if not split.verify(F):
                return False, f"{label}: phi(F) != q + h for F = {F.format()} (s={s})"
            if K.characteristic() == 2 and split.quad.rank % 2:
                return False, f"{label}: odd alternating rank for F = {F.format()}"
            total += 1
    return True, f"{total} instances over Q, F2, F3, F5 split as q + h at order {N}"


def random_determinacy_instance(K: ExactField, rng: np.random.Generator, max_vars: int = 3) -> Poly:
    """Diagonal x_i^2 / x_i^3 terms plus a few mixed terms of degree 2..3, in 1..max_vars variables."""
    n = int(rng.integers(1, max_vars + 1))
    f = Poly.zero(K, n)
    for i in range(n):
        k = int(rng.integers(2, 4))
        if K.characteristic() and k % K.characteristic() == 0:
            k = 2
        f = f.add(Poly(K, n, {tuple(k if t == i else 0 for t in range(n)): K.random_nonzero(rng)}))
    return f.add(random_poly(K, n, rng, 2, 3, 2))


def _check_determinacy(sizes: dict[str, int], rng: np.random.Generator, workers: int) -> tuple[bool, str]:
    """Right equivalence of f and f + g once g vanishes past the determinacy bound."""
    fields = [_field(s) for s in ("Q", "F3", "F5", "F7")]
    done = attempts = 0
    by_vars: dict[int, int] = {}
    while done < sizes["determinacy_instances"]:
        attempts += 1
        if attempts > 20 * sizes["determinacy_instances"]:
            return False, f"only {done} certified instances after {attempts} draws"
        K = fields[done % len(fields)]
        f = random_determinacy_instance(K, rng)
        n = f.nvars
        report = milnor(f, N_max=6)
        if not report.certified or report.mu > 15 or report.r > 3:
            continue
        r = report.r
        N = 2 * r + 2
        g = f.add(random_poly(K, n, rng, 2 * r + 1, N, 3))
        phi = right_equiv_truncated(f, g, N)
        if phi is None or phi.apply(g) != f.truncate(N):
            return False, f"{K.label()}: no right-equivalence for f = {f.format()}, g = {g.format()}"
        by_vars[n] = by_vars.get(n, 0) + 1
        done += 1
    spread = ", ".join(f"{k} in {n} var(s)" for n, k in sorted(by_vars.items()))
    return True, f"{done} perturbations beyond order 2r lifted to right-equivalences ({spread})"


def random_corank1_map(K: ExactField, rng: np.random.Generator, max_vars: int = 3) -> PolyMap:
    """A map with rank r − 1 at the origin: r − 1 submersive components, one critical."""
    n = int(rng.integers(1, max_vars + 1))
    r = int(rng.integers(1, n + 1))
    comps = []
    for ell in range(r - 1):
        comps.append(Poly.variable(K, n, ell).add(random_poly(K, n, rng, 2, 2, 3)))
    comps.append(random_poly(K, n, rng, 2, 3, 4))
    return PolyMap(K, n, tuple(comps))


def _check_symbol_parity(sizes: dict[str, int], rng: np.random.Generator, workers: int) -> tuple[bool, str]:
    """Corank-1 symbols in characteristic 2 have n - r + 1 - j even."""
    fields = [_field("F2"), _field("F4")]
    for k in range(sizes["parity_samples"]):
        K = fields[k % 2]
        F = random_corank1_map(K, rng)
        origin = (K.zero,) * F.source_dim
        sym = symbol_at(F, origin)
        n, r = F.source_dim, F.target_dim
        if sym.i == 1 and (n - r + 1 - sym.j) % 2:
            return False, f"{K.label()}: odd n−r+1−j for {F.format()}"
    return True, f"{sizes['parity_samples']} corank-1 symbols over F2/F4 have even n−r+1−j"


def _check_coherence(sizes: dict[str, int], rng: np.random.Generator, workers: int) -> tuple[bool, str]:
    """Identities linking the codimension formulas on parameter grids."""
    G = 12 if sizes is VERIFY_FULL else 6
    for n in range(1, G + 1):
        for r in range(1, G + 1):
            for i in range(0, min(n, r) + 1):
                for char in (0, 2, 3):
                    so = second_order_codim(n, r, i, 0, char)
                    if so is not None and so != crit_codim(n, r, i):
                        return False, f"second-order vs critical at (n,r,i,char)=({n},{r},{i},{char})"
    for e in range(1, G + 1):
        for f in range(1, G + 1):
            for sym in Symmetry:
                for i in range(0, e + 1):
                    if delta_codim(DeltaSpec(e, e, f, i, i, sym)) != box_rank_stratum_codim(e, f, i, sym):
                        return False, f"delta vs form strata at (e,f,i)=({e},{f},{i}) {sym.value}"
                for a in range(1, e + 1):
                    if a * f > e:
                        continue
                    values = [delta_codim(DeltaSpec(e, a, f, i, p, sym))
                              for i in range(1, a * f + 1) for p in range(a + 1)]
                    values = [v for v in values if v is not None]
                    if values and min(values) != first_degeneracy_codim(e, a, f, sym):
                        return False, f"first degeneracy at (e,a,f)=({e},{a},{f}) {sym.value}"
                    cm = CMinSpec(e, a, f, sym)
                    for i, p in cm.region():
                        ds = DeltaSpec(e, a, f, i, p, sym)
                        if delta_nonempty(ds) and delta_codim(ds) != c_value(cm, i, p):
                            return False, f"C vs delta at {ds}"
    return True, f"all identities hold on parameter grids up to {G}"


def _random_linear_change(K: ExactField, n: int, rng: np.random.Generator) -> Matrix:
    """A random invertible n x n matrix with small entries."""
    while True:
        M = Matrix.from_rows(K, [[K.random_element(rng, 3) for _ in range(n)] for _ in range(n)], cols=n)
        if rank(M) == n:
            return M


def _compose_linear(F: PolyMap, B: Matrix, A: Matrix) -> PolyMap:
    """A ∘ F ∘ B for linear A (target) and B (source)."""
    K, n = F.field, F.source_dim
    images = [Poly(K, n, {tuple(1 if t == j else 0 for t in range(n)): B[i, j] for j in range(n)})
              for i in range(n)]
    deg = max(max(c.degree() for c in F.components), 1)
    inner = [series_compose(c, images, deg).as_poly() for c in F.components]
    out = []
    for row in range(A.rows):
        acc = Poly.zero(K, n)
        for col, c in enumerate(inner):
            acc = acc.add(c.scale(A[row, col]))
        out.append(acc)
    return PolyMap(K, n, tuple(out))


def _check_pointwise(sizes: dict[str, int], rng: np.random.Generator, workers: int) -> tuple[bool, str]:
    """Pointwise invariants under linear changes, and symmetry of second differentials."""
    fields = [_field(s) for s in ("Q", "F2", "F3", "F5")]
    for k in range(sizes["pointwise_cases"]):
        K = fields[k % len(fields)]
        n, r = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        F = PolyMap(K, n, tuple(random_poly(K, n, rng, 1, 3, 4) for _ in range(r)))
        x = tuple(K.random_element(rng, 3) for _ in range(n))

        # invariance under linear changes of source and target
        B, A = _random_linear_change(K, n, rng), _random_linear_change(K, r, rng)
        G = _compose_linear(F, B, A)
        y = inverse(B).apply(x)
        d1 = intrinsic_differential_at(F.jacobian_polys(), x)
        d2 = intrinsic_differential_at(G.jacobian_polys(), y)
        if (d1.corank, d1.rank()) != (d2.corank, d2.rank()) or symbol_at(F, x) != symbol_at(G, y):
            return False, f"{K.label()}: invariants change under a linear change for {F.format()}"
        if transport_differential(d1, B, A, d2) != d2.tensor:
            return False, f"{K.label()}: differential is not conjugated by a linear change for {F.format()}"

        # symmetry of second differentials, alternating in characteristic 2
        second = second_intrinsic_differential_at(F, x)
        for c in range(second.dim_cokernel):
            S = second.bilinear_slice(c)
            if S.to_rows() != S.transpose().to_rows():
                return False, f"{K.label()}: asymmetric second differential for {F.format()}"
            if K.characteristic() == 2 and any(not K.is_zero(S[t, t]) for t in range(S.rows)):
                return False, f"{K.label()}: nonzero diagonal in characteristic 2 for {F.format()}"

        # char-2 Hessians have zero diagonal
        if K.characteristic() == 2:
            for H in jet2_at(F, x).hessian:
                if any(not K.is_zero(H[t, t]) for t in range(n)):
                    return False, f"{K.label()}: Hessian diagonal survives for {F.format()}"

        # additivity under a perturbation vanishing to order 2 at x
        delta = []
        for _ in range(r):
            quad = random_poly(K, n, rng, 2, 2, 2)
            neg_x = tuple(K.neg(c) for c in x)
            delta.append(quad.shift(neg_x))
        D = PolyMap(K, n, tuple(delta))
        second_sum = second_intrinsic_differential_at(F.add(D), x)
        extra = project_hessian(intrinsic_differential_at(F.jacobian_polys(), x), jet2_at(D, x).hessian)
        for a_idx, slab in enumerate(second.tensor):
            for b_idx, row in enumerate(slab):
                for c, v in enumerate(row):
                    if not K.eq(K.add(v, extra[a_idx][b_idx][c]), second_sum.tensor[a_idx][b_idx][c]):
                        return False, f"{K.label()}: second differential not additive for {F.format()}"
    return True, f"{sizes['pointwise_cases']} random maps pass invariance, symmetry and additivity"


CHECKS: list[tuple[str, Callable[[dict[str, int], np.random.Generator, int], tuple[bool, str]]]] = [
    ("minimal_codimension", _check_minimal_codim),
    ("delta_nonemptiness", _check_delta_census),
    ("delta_codimension_mc", _check_delta_mc),
    ("form_rank_strata", _check_box_census),
    ("char2_cubic_example", _check_cubic_example),
    ("critical_locus_dimension", _check_critical_dimension),
    ("morse_with_parameters", _check_morse),
    ("constructive_determinacy", _check_determinacy),
    ("char2_symbol_parity", _check_symbol_parity),
    ("formula_coherence", _check_coherence),
    ("pointwise_differentials", _check_pointwise),
]


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

def run_verification(mode: str = "quick", seed: int = 0, workers: int = 1,
                     only: list[str] | None = None) -> dict[str, Any]:
    """Run the battery and return ``{mode, seed, workers, checks: [...]}``.

    Each check entry is ``{name, passed, detail, seconds}``.  A check that
    raises is recorded as failed with the exception text.
    """
    sizes = VERIFY_FULL if mode == "full" else VERIFY_QUICK
    streams = np.random.SeedSequence(seed).spawn(len(CHECKS))
    checks = []
    for (name, fn), stream in zip(CHECKS, streams):
        if only and name not in only:
            continue
        start = time.perf_counter()
        try:
            passed, detail = fn(sizes, np.random.default_rng(stream), workers)
        except Exception as exc:  # recorded, never swallowed silently
            logger.exception(f"check {name} raised")
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        seconds = round(time.perf_counter() - start, 3)
        logger.info(f"{name}: {'PASS' if passed else 'FAIL'} ({seconds:.1f}s)")
        checks.append({"name": name, "passed": passed, "detail": detail, "seconds": seconds})
    return {"mode": mode, "seed": seed, "workers": workers, "checks": checks}


def print_report(results: dict[str, Any]) -> None:
    """Print a formatted verification report to stdout."""
    print()
    print(_bold("charstrat - Verification Report"))
    print(_dim(f"mode: {results['mode']}   seed: {results['seed']}   workers: {results['workers']}"))
    print(_bold("=" * 60))
    for k, check in enumerate(results["checks"], start=1):
        tag = _green("PASS") if check["passed"] else _red("FAIL")
        print(f"  {tag}  {k:2d}. {check['name']:<28s} {_dim(str(check['seconds']) + 's')}")
        print(f"        {check['detail']}")
    print()


def gating_decision(results: dict[str, Any]) -> tuple[bool, list[str]]:
    """``(failed, reasons)``: every failed check blocks, there is no warn-only tier."""
    reasons = [f"{c['name']}: {c['detail']}" for c in results["checks"] if not c["passed"]]
    return (len(reasons) > 0, reasons)


def count_summary(results: dict[str, Any]) -> str:
    """``passed/total`` line for the report footer."""
    passed = sum(1 for c in results["checks"] if c["passed"])
    return f"{passed}/{len(results['checks'])} checks passed"


__all__ = ["run_verification", "print_report", "gating_decision", "count_summary", "CHECKS",
           "random_poly", "random_corank1_map", "random_morse_instance"]
