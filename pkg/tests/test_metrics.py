import math

import numpy as np
import pytest

from analysis.helstrom import helstrom_batch
from analysis.metrics import (
    StateMetrics,
    evaluate_state,
    group_by_value,
    low_eta_sweep,
    mean_metrics,
    mean_over_square,
    midpoint_oracle,
    ranking_check,
    table_mean_hb,
    vectorize,
)
from core.errors import ConfigError, QuadratureError
from core.presets import load_presets
from core.scenario import LossExpansion


def metrics(label, hb, chi, configuration="2S1I"):
    return StateMetrics(configuration, label, 2, hb, chi, 1e-6, 100, 0.0)


def test_constant_and_polynomial_integrands():
    constant = mean_over_square(lambda p, e: np.full(len(p), 0.3), tol=1e-10)
    assert constant.value == pytest.approx(0.3, abs=1e-14)
    assert constant.leaves == 16
    product = mean_over_square(lambda p, e: p * e, tol=1e-10)
    assert product.value == pytest.approx(0.25, abs=1e-12)
    cubic = mean_over_square(lambda p, e: p ** 2 * e, tol=1e-10, threads=2)
    assert cubic.value == pytest.approx(1 / 6, abs=1e-12)


def test_kinked_integrand_is_refined():
    result = mean_over_square(lambda p, e: np.maximum(0.0, p - e), tol=1e-7)
    assert result.value == pytest.approx(1 / 6, abs=1e-6)
    assert result.abs_error_estimate <= 1e-7
    assert result.leaves > 16


def test_scalar_integrands_can_be_lifted():
    result = mean_over_square(vectorize(lambda p, e: math.sin(p) * e), tol=1e-9)
    assert result.value == pytest.approx((1 - math.cos(1)) / 2, abs=1e-8)


def test_quadrature_is_deterministic_across_thread_counts():
    expansion = LossExpansion.from_probe(load_presets().get("ghz_2s1i").build())
    f = lambda p, e: helstrom_batch(expansion, p, e)
    serial = mean_over_square(f, tol=1e-5, threads=1, chunk=64)
    parallel = mean_over_square(f, tol=1e-5, threads=4, chunk=64)
    assert serial.value == parallel.value
    assert serial.evaluations == parallel.evaluations


def test_quadrature_caps_raise_with_best_estimate():
    kink = lambda p, e: np.abs(p - 0.3) * np.abs(e - 0.7)
    with pytest.raises(QuadratureError) as info:
        mean_over_square(kink, tol=1e-14, max_depth=3)
    assert info.value.best_estimate == pytest.approx(0.29 ** 2, abs=5e-3)
    with pytest.raises(QuadratureError):
        mean_over_square(kink, tol=1e-14, max_evaluations=1)


def test_quadrature_rejects_nonpositive_tolerance():
    with pytest.raises(ConfigError):
        mean_over_square(lambda p, e: p, tol=0.0)


def test_midpoint_oracle():
    assert midpoint_oracle(lambda p, e: p * e, n=64) == pytest.approx(0.25)
    assert midpoint_oracle(lambda p, e: p ** 2, n=64) == pytest.approx(1 / 3, abs=1e-4)


def test_adaptive_mean_agrees_with_midpoint_rule():
    expansion = LossExpansion.from_probe(load_presets().get("si_1s1i").build())
    f = lambda p, e: helstrom_batch(expansion, p, e)
    adaptive = mean_over_square(f, tol=1e-6)
    assert adaptive.value == pytest.approx(midpoint_oracle(f, n=512), abs=2e-5)


def test_two_mode_means_match_reference():
    presets = load_presets()
    for name in ("si_1s1i", "s_i_1s1i"):
        entry = presets.get(name)
        row = evaluate_state(entry, tol=1e-5)
        assert row.mean_hb == pytest.approx(entry.reference.mean_hb, abs=1e-3)
        assert row.mean_holevo == pytest.approx(entry.reference.mean_holevo, abs=1e-3)
        assert not row.holevo_skipped


def test_holevo_mean_defaults_to_nats():
    entry = load_presets().get("si_1s1i")
    nats = evaluate_state(entry, tol=1e-5)
    bits = evaluate_state(entry, tol=1e-5, log_base=2)
    assert nats.mean_holevo == pytest.approx(entry.reference.mean_holevo, abs=1e-4)
    assert bits.mean_holevo == pytest.approx(nats.mean_holevo / math.log(2), abs=3e-5)
    assert nats.mean_hb == pytest.approx(bits.mean_hb, abs=1e-15)


def test_non_commuting_probe_has_no_holevo_mean():
    row = evaluate_state(load_presets().get("w_2s1i"), tol=1e-4)
    assert row.holevo_skipped
    assert row.mean_holevo is None
    assert row.mean_hb == pytest.approx(0.196996, abs=1e-3)


def test_table_without_holevo():
    rows = table_mean_hb([load_presets().get("si_1s1i")], tol=1e-4)
    assert rows[0].mean_holevo is None
    summary = mean_metrics(rows[0])
    assert summary.mean_hb == rows[0].mean_hb
    assert summary.evaluations == rows[0].evaluations


def test_group_by_value():
    groups = group_by_value({"b": 0.2, "a": 0.2 + 1e-12, "c": 0.1, "d": 0.3}, 1e-10)
    assert groups == [["c"], ["a", "b"], ["d"]]


@pytest.mark.parametrize("names,expected", [
    (["s_s_i_2s1i", "s_si_2s1i", "ss_i_2s1i", "ghz_2s1i", "w_2s1i"],
     [["S-SI"], ["W"], ["GHZ", "S-S-I"], ["SS-I"]]),
    (["si_i_1s2i", "ghz_1s2i", "w_1s2i", "s_i_i_1s2i"],
     [["GHZ", "SI-I"], ["W"], ["S-I-I"]]),
    (["s_s_s_3s", "ss_s_3s", "w_3s", "ghz_3s"],
     [["S-S-S"], ["SS-S"], ["W"], ["GHZ"]]),
])
def test_low_eta_orderings(names, expected):
    presets = load_presets()
    table = low_eta_sweep([presets.get(n) for n in names], p0=0.5, eta_max=0.01, n_points=101)
    assert table.etas[50] == pytest.approx(0.005)
    assert table.ordering_at(0.005) == expected


def test_sweep_rows_and_order_string():
    presets = load_presets()
    table = low_eta_sweep([presets.get("ghz_2s1i"), presets.get("s_si_2s1i")], n_points=3)
    assert table.order_string(0.005) == "S-SI<GHZ"
    rows = table.to_rows()
    assert [r["eta"] for r in rows] == [0.0, 0.005, 0.01]
    assert rows[0]["GHZ"] == pytest.approx(0.5)
    with pytest.raises(ConfigError):
        low_eta_sweep([], eta_max=0.0)


def test_ranking_check_reports_inversions():
    table = [
        metrics("SS-SI", 0.15559, 0.16081, "3S1I"),
        metrics("GHZ", 0.15666, 0.16215, "3S1I"),
        metrics("S-S-S-I", 0.15711, 0.15852, "3S1I"),
    ]
    report = ranking_check(table)
    assert report.inversions == [("SS-SI", "GHZ")]
    assert not report.consistent
    assert report.hb_order == [["SS-SI"], ["GHZ"], ["S-S-S-I"]]
    assert report.holevo_order == [["GHZ"], ["SS-SI"], ["S-S-S-I"]]


def test_ranking_check_on_consistent_table():
    table = [
        metrics("S-SI", 0.188163, 0.0968226),
        metrics("GHZ", 0.196955, 0.0823021),
        metrics("W", 0.196996, None),
        metrics("S-S-I", 0.2058, 0.0674483),
        metrics("SS-I", 0.221073, 0.0424548),
    ]
    report = ranking_check(table, expected_order=["S-SI", "GHZ", "W", "S-S-I", "SS-I"])
    assert report.consistent
    assert report.hb_order == [["S-SI"], ["GHZ", "W"], ["S-S-I"], ["SS-I"]]
    mismatched = ranking_check(table, expected_order=["SS-I", "S-SI"])
    assert mismatched.expected_mismatches == [("SS-I", "S-SI")]
    with pytest.raises(ConfigError):
        ranking_check(table, expected_order=["Cyclic"])


def table_cases(suite):
    presets = load_presets()
    _, entries = presets.suite(suite)
    return [pytest.param(e, id=f"{e.configuration}-{e.label}") for e in entries]


def check_against_reference(entry, tol, limit):
    row = evaluate_state(entry, tol=tol)
    assert row.mean_hb == pytest.approx(entry.reference.mean_hb, abs=limit)
    if entry.reference.mean_holevo is not None:
        assert row.mean_holevo is not None
        holevo_limit = entry.reference.holevo_tolerance or limit
        assert row.mean_holevo == pytest.approx(entry.reference.mean_holevo, abs=holevo_limit)


@pytest.mark.slow
@pytest.mark.parametrize("entry", table_cases("three-qubit"))
def test_three_qubit_table(entry):
    check_against_reference(entry, 1e-5, 1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("entry", table_cases("three-qutrit"))
def test_three_qutrit_table(entry):
    check_against_reference(entry, 1e-5, 1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("entry", table_cases("four-qubit"))
def test_four_qubit_table(entry):
    check_against_reference(entry, 1e-5, 1e-3)


@pytest.mark.expensive
@pytest.mark.parametrize("entry", table_cases("four-ququart"))
def test_four_ququart_table(entry):
    check_against_reference(entry, 1e-4, 2e-3)


@pytest.mark.expensive
def test_four_ququart_inversion():
    presets = load_presets()
    rows = [evaluate_state(presets.get(n), tol=1e-4) for n in ("ss_si_3s1i_d4", "ghz_3s1i_d4")]
    report = ranking_check(rows)
    assert report.inversions == [("SS-SI", "GHZ")]
