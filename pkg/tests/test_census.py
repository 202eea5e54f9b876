"""Tests for src/census.py: enumeration, censuses, witnesses, Monte-Carlo fits."""
from __future__ import annotations

import logging
import time
from collections import Counter

import numpy as np
import pytest

from census import (
    CensusTable,
    ConstrainedSpec,
    CriticalJetTrial,
    DeltaTrial,
    NeverTrial,
    SingularMatrixTrial,
    _census_chunk_gf2,
    classify_batch,
    classify_map,
    enumerate_constrained,
    estimate_codim_mc,
    realize,
    sample_constrained,
    stratum_census,
    tower_fields,
    witness,
)
from codim import DeltaSpec, Symmetry, delta_codim, delta_nonempty
from config import CENSUS_CHUNK, DEFAULT_MC_SAMPLES, VERIFY_FULL
from errors import BudgetExceeded, DegenerateTower, EmptyStratum, PreconditionViolated
from exactfield import ExactField, parse_field

SYM, ALT = Symmetry.BOX_SYM, Symmetry.BOX_ALT


def _nonempty_strata(spec: ConstrainedSpec) -> set[tuple[int, int]]:
    return {
        (i, p)
        for i in range(0, spec.max_rank + 1)
        for p in range(0, spec.a + 1)
        if delta_nonempty(DeltaSpec(spec.e, spec.a, spec.f, i, p, spec.sym))
    }


# ---------------------------------------------------------------------------
# Constrained maps
# ---------------------------------------------------------------------------

def test_realize_symmetric_block(F3: ExactField) -> None:
    spec = ConstrainedSpec(2, 2, 1, SYM, F3)
    M = realize(spec, [1, 2, 0]).realized
    assert M.to_rows() == [[1, 2], [2, 0]]


def test_realize_alternating_block_has_zero_diagonal(F3: ExactField) -> None:
    spec = ConstrainedSpec(3, 2, 1, ALT, F3)
    M = realize(spec, [1, 2, 0]).realized
    assert M.to_rows() == [[0, 1], [2, 0], [2, 0]]


def test_realize_checks_coordinate_count(F3: ExactField) -> None:
    with pytest.raises(PreconditionViolated):
        realize(ConstrainedSpec(2, 2, 1, SYM, F3), [1, 2])


def test_classify_map(Q: ExactField) -> None:
    from fractions import Fraction

    spec = ConstrainedSpec(3, 2, 1, SYM, Q)
    # A-block [[1, 0], [0, 0]], free row (0, 1): rank 2, A-rows rank 1
    cmap = realize(spec, [Fraction(1), Fraction(0), Fraction(0), Fraction(0), Fraction(1)])
    assert classify_map(cmap) == (0, 1)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("e,a,f,sym,count", [
    (2, 2, 1, SYM, 8),
    (2, 2, 1, ALT, 2),
    (3, 2, 2, SYM, 1024),
])
def test_enumeration_sizes(F2: ExactField, e: int, a: int, f: int, sym: Symmetry, count: int) -> None:
    spec = ConstrainedSpec(e, a, f, sym, F2)
    maps = list(enumerate_constrained(spec))
    assert len(maps) == count
    assert len({m.data for m in maps}) == count


def test_enumeration_respects_budget(F3: ExactField) -> None:
    with pytest.raises(BudgetExceeded):
        list(enumerate_constrained(ConstrainedSpec(3, 2, 2, SYM, F3), budget=1000))


def test_enumeration_needs_finite_field(Q: ExactField) -> None:
    with pytest.raises(PreconditionViolated):
        list(enumerate_constrained(ConstrainedSpec(2, 2, 1, SYM, Q)))


# ---------------------------------------------------------------------------
# Census
# ---------------------------------------------------------------------------

def test_symmetric_2x2_census_over_f2(F2: ExactField) -> None:
    table = stratum_census(ConstrainedSpec(2, 2, 1, SYM, F2))
    assert table.total == 8
    assert table.rank_counts() == {0: 1, 1: 3, 2: 4}


def test_alternating_2x2_census_over_f2(F2: ExactField) -> None:
    table = stratum_census(ConstrainedSpec(2, 2, 1, ALT, F2))
    assert table.rank_counts() == {0: 1, 2: 1}


def test_census_counts_sum_to_total(F3: ExactField) -> None:
    table = stratum_census(ConstrainedSpec(3, 2, 1, SYM, F3))
    assert sum(table.counts.values()) == table.total == 3 ** 5


def test_census_logs_a_preformatted_summary(F2: ExactField, caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.INFO, logger="census"):
        stratum_census(ConstrainedSpec(2, 2, 1, SYM, F2))
    record = next(r for r in caplog.records if r.name == "census")
    assert record.args == ()
    assert "8 maps" in record.getMessage()


def test_gf2_fast_path_matches_generic_classifier(F2: ExactField) -> None:
    spec = ConstrainedSpec(3, 2, 2, ALT, F2)
    fast = _census_chunk_gf2(spec, 0, 2 ** spec.ambient_dim)
    slow = Counter(classify_map(m) for m in enumerate_constrained(spec))
    assert fast == slow


def test_chunked_census_is_independent_of_chunk_size(F2: ExactField) -> None:
    spec = ConstrainedSpec(3, 2, 2, SYM, F2)
    assert stratum_census(spec, chunk=7).counts == stratum_census(spec, chunk=4096).counts


def test_f3_census_spans_several_chunks(F3: ExactField) -> None:
    spec = ConstrainedSpec(3, 2, 1, SYM, F3)
    chunked = stratum_census(spec, chunk=50)
    assert chunked.counts == stratum_census(spec, chunk=1 << 14).counts
    assert chunked.total == 3 ** 5


def test_f3_census_larger_than_one_default_chunk(F3: ExactField) -> None:
    spec = ConstrainedSpec(4, 3, 1, SYM, F3)
    table = stratum_census(spec)
    assert table.total == 3 ** 9 > CENSUS_CHUNK
    assert sum(table.counts.values()) == table.total
    assert table.occupied() == _nonempty_strata(spec)


@pytest.mark.slow
@pytest.mark.parametrize("label,e,a,f,sym,key", [
    ("F3", 3, 2, 2, SYM, "census_dim_f3"),
    ("F3", 5, 4, 1, ALT, "census_dim_f3"),
    ("F2", 4, 1, 4, SYM, "census_dim_f2"),
])
def test_census_at_the_full_size_limit(label: str, e: int, a: int, f: int, sym: Symmetry, key: str) -> None:
    spec = ConstrainedSpec(e, a, f, sym, parse_field(label))
    assert spec.ambient_dim == VERIFY_FULL[key]
    table = stratum_census(spec, workers=2)
    assert sum(table.counts.values()) == table.total == spec.field.cardinality() ** spec.ambient_dim
    assert table.occupied() == _nonempty_strata(spec)

@pytest.mark.parametrize("label,e,a,f,sym", [
    ("F2", 3, 2, 1, SYM),
    ("F2", 3, 2, 1, ALT),
    ("F2", 3, 2, 2, SYM),
    ("F2", 3, 2, 2, ALT),
    ("F2", 4, 3, 1, ALT),
    ("F3", 3, 2, 1, ALT),
    ("F3", 4, 2, 1, ALT),
])
def test_occupied_strata_are_exactly_the_nonempty_ones(label: str, e: int, a: int, f: int,
                                                       sym: Symmetry) -> None:
    spec = ConstrainedSpec(e, a, f, sym, parse_field(label))
    assert stratum_census(spec).occupied() == _nonempty_strata(spec)


def test_census_table_frame_and_dict(F2: ExactField) -> None:
    table = stratum_census(ConstrainedSpec(2, 2, 1, ALT, F2))
    df = table.to_frame()
    assert list(df.columns) == ["e", "a", "f", "sym", "field", "i", "p", "count"]
    assert int(df["count"].sum()) == 2
    d = table.to_dict()
    assert d["total"] == 2 and d["sym"] == "box_alt"


@pytest.mark.slow
def test_parallel_census_matches_serial(F2: ExactField) -> None:
    spec = ConstrainedSpec(4, 2, 2, SYM, F2)
    serial = stratum_census(spec, chunk=1 << 12)
    parallel = stratum_census(spec, workers=2, chunk=1 << 12)
    assert parallel.counts == serial.counts


# ---------------------------------------------------------------------------
# Witnesses
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("label,e,a,f,sym", [
    ("F3", 3, 2, 1, SYM),
    ("F2", 4, 3, 2, ALT),
    ("F5", 4, 4, 1, ALT),
    ("F3", 5, 3, 2, ALT),
    ("Q", 5, 3, 1, SYM),
])
def test_witness_lands_in_every_nonempty_stratum(label: str, e: int, a: int, f: int, sym: Symmetry) -> None:
    spec = ConstrainedSpec(e, a, f, sym, parse_field(label))
    for i, p in sorted(_nonempty_strata(spec)):
        assert classify_map(witness(spec, i, p)) == (i, p)


def test_witness_of_empty_stratum_raises(F2: ExactField) -> None:
    with pytest.raises(EmptyStratum):
        witness(ConstrainedSpec(3, 2, 1, ALT, F2), 1, 1)


# ---------------------------------------------------------------------------
# Monte-Carlo
# ---------------------------------------------------------------------------

def test_sampling_is_reproducible(F4: ExactField) -> None:
    spec = ConstrainedSpec(3, 2, 2, ALT, F4)
    a = sample_constrained(spec, np.random.default_rng(3))
    b = sample_constrained(spec, np.random.default_rng(3))
    assert a == b


def test_singular_matrix_codimension_is_one() -> None:
    tower = tower_fields(["F2", "F4", "F16"])
    est = estimate_codim_mc(SingularMatrixTrial(2), tower, 20_000, seed=11, formula_codim=1)
    assert est.agree(0.35)
    assert est.fitted_levels == ["F2", "F2^2", "F2^4"]
    assert est.to_dict(0.35)["agree"] is True


def test_critical_jet_trial_codimension() -> None:
    tower = tower_fields(["F3", "F9", "F27"])
    est = estimate_codim_mc(CriticalJetTrial(2, 1, 1), tower, 20_000, seed=5, formula_codim=2)
    assert abs(est.estimate - 2) <= 0.35


def test_mc_is_reproducible() -> None:
    tower = tower_fields(["F2", "F4", "F8"])
    trial = DeltaTrial(3, 2, 1, SYM, 1, 1)
    a = estimate_codim_mc(trial, tower, 2_000, seed=99)
    b = estimate_codim_mc(trial, tower, 2_000, seed=99)
    assert a.hits == b.hits
    assert a.estimate == b.estimate


def test_mc_without_hits_is_degenerate() -> None:
    with pytest.raises(DegenerateTower):
        estimate_codim_mc(NeverTrial(), tower_fields(["F2", "F4", "F8"]), 100, seed=0)


def test_mc_tower_validation() -> None:
    with pytest.raises(PreconditionViolated):
        estimate_codim_mc(NeverTrial(), tower_fields(["F2", "F4"]), 100, seed=0)
    with pytest.raises(PreconditionViolated):
        estimate_codim_mc(NeverTrial(), tower_fields(["F2", "F3", "F4"]), 100, seed=0)


def test_codim_estimate_fraction() -> None:
    tower = tower_fields(["F2", "F4", "F16"])
    est = estimate_codim_mc(SingularMatrixTrial(2), tower, 5_000, seed=1)
    assert all(0 < fr < 1 for fr in est.fractions)
    assert est.agree(0.35) is None            # no formula given
    assert est.as_fraction(4) in (1, 0.75, 1.25)


@pytest.mark.parametrize("label,e,a,f,sym", [
    ("F2", 3, 2, 2, ALT),
    ("F3", 4, 2, 1, SYM),
    ("F4", 3, 2, 1, SYM),
    ("F9", 3, 2, 1, ALT),
])
def test_batch_classification_matches_classify_map(label: str, e: int, a: int, f: int, sym: Symmetry) -> None:
    spec = ConstrainedSpec(e, a, f, sym, parse_field(label))
    data = np.random.default_rng(12).integers(0, spec.field.cardinality(), size=(200, spec.ambient_dim))
    i, p = classify_batch(spec, data)
    expected = [classify_map(realize(spec, [int(x) for x in row])) for row in data]
    assert list(zip(i.tolist(), p.tolist())) == expected


def test_batched_and_scalar_trials_estimate_the_same_codimension() -> None:
    tower = tower_fields(["F2", "F4", "F16"])
    batched = estimate_codim_mc(DeltaTrial(3, 2, 1, SYM, 1, 1), tower, 20_000, seed=4)
    scalar = estimate_codim_mc(lambda K, rng: DeltaTrial(3, 2, 1, SYM, 1, 1)(K, rng), tower, 20_000, seed=4)
    assert abs(batched.estimate - scalar.estimate) < 0.35


@pytest.mark.slow
@pytest.mark.parametrize("trial,codim", [
    (SingularMatrixTrial(2), 1),
    (DeltaTrial(3, 2, 1, SYM, 1, 1), delta_codim(DeltaSpec(3, 2, 1, 1, 1, SYM))),
    (DeltaTrial(2, 2, 1, SYM, 2, 2), 3),
])
def test_mc_at_full_sample_size(trial, codim: int) -> None:
    tower = tower_fields(["F2", "F4", "F16"])
    start = time.perf_counter()
    est = estimate_codim_mc(trial, tower, DEFAULT_MC_SAMPLES, seed=21, workers=2, formula_codim=codim)
    assert time.perf_counter() - start < 600
    assert est.samples == [DEFAULT_MC_SAMPLES] * 3
    assert est.agree(0.35)


def test_census_table_is_a_dataclass(F2: ExactField) -> None:
    t = CensusTable(ConstrainedSpec(1, 1, 1, SYM, F2), {(0, 0): 1, (1, 1): 1}, 2)
    assert t.occupied() == {(0, 0), (1, 1)}
    assert t.rank_counts() == {0: 1, 1: 1}
