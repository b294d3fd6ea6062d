import math

import numpy as np
import pytest

from core.errors import ScenarioError, TensorError
from core.presets import load_presets
from core.scenario import (
    HypothesisPair,
    LossExpansion,
    Scenario,
    build_hypotheses,
    diagonal_noise,
    gamma,
    loss_components,
    mix_components,
    white_noise,
)
from core.states import Family, ProbeSpec, Role, build_probe
from core.tensor import ComplexMatrix

S, I = Role.SIGNAL, Role.IDLER


def bell():
    return build_probe(ProbeSpec(Family.PAIR, (2, 2), (S, I), pair=(0, 1)))


def test_noise_constructors():
    assert np.allclose(white_noise(3).data, np.eye(3) / 3)
    with pytest.raises(ScenarioError):
        white_noise(1)
    with pytest.raises(ScenarioError):
        diagonal_noise([0.5, 0.6])
    with pytest.raises(ScenarioError):
        diagonal_noise([1.0, 0.0])


def test_scenario_validates_parameters():
    with pytest.raises(ScenarioError):
        Scenario(bell(), eta=1.5, p0=0.5)
    with pytest.raises(ScenarioError):
        Scenario(bell(), eta=0.5, p0=-0.1)
    assert Scenario(bell(), eta=0.5, p0=0.3).p1 == pytest.approx(0.7)


def test_bell_pair_absent_hypothesis_is_maximally_mixed():
    h = build_hypotheses(Scenario(bell(), eta=0.3, p0=0.5))
    assert np.allclose(h.rho0.data, np.eye(4) / 4)
    assert np.allclose(h.rho1.data, 0.3 * bell().projector().data + 0.7 * np.eye(4) / 4)


def test_perfect_reflection_returns_the_probe():
    probe = load_presets().get("ghz_2s1i").build()
    h = build_hypotheses(Scenario(probe, eta=1.0, p0=0.5))
    assert np.allclose(h.rho1.data, probe.projector().data)


def test_no_reflection_makes_hypotheses_identical():
    probe = load_presets().get("w_2s1i").build()
    h = build_hypotheses(Scenario(probe, eta=0.0, p0=0.5))
    assert np.allclose(h.rho1.data, h.rho0.data)


def test_lost_signals_are_replaced_in_place():
    # S-SI on (S1, S2, I): losing S1 leaves the S2-I pair intact, losing S2 leaves S1 in |0⟩
    probe = load_presets().get("s_si_2s1i").build()
    components = loss_components(probe)
    assert len(components) == 3
    zero = np.diag([1.0, 0.0])
    half = np.eye(2) / 2
    pair = np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2
    expected_one_lost = np.kron(half, pair) + np.kron(np.kron(zero, half), half)
    assert np.allclose(components[1].data, expected_one_lost)
    assert np.allclose(components[2].data, np.eye(8) / 8)
    assert np.allclose(components[0].data, probe.projector().data)


def test_idler_only_probe_rejected():
    probe = build_probe(ProbeSpec(Family.SEPARABLE, (2,), (I,)))
    with pytest.raises(ScenarioError):
        loss_components(probe)


def test_non_white_noise_restricted_to_two_modes():
    probe = load_presets().get("ghz_2s1i").build()
    with pytest.raises(ScenarioError):
        loss_components(probe, noise=[0.7, 0.3])
    components = loss_components(bell(), noise=[0.7, 0.3])
    assert np.allclose(np.diag(components[-1].data).real, [0.35, 0.35, 0.15, 0.15])


def test_hypothesis_pair_checks_trace_and_positivity():
    good = ComplexMatrix.identity((2,)) * 0.5
    with pytest.raises(TensorError):
        HypothesisPair(good, ComplexMatrix.identity((2,)), eta=0.5, n_signals=1)
    with pytest.raises(TensorError):
        HypothesisPair(good, ComplexMatrix.diagonal([1.5, -0.5]), eta=0.5, n_signals=1)


def test_loss_expansion_matches_direct_construction():
    probe = load_presets().get("w_2s1i").build()
    expansion = LossExpansion.from_probe(probe)
    etas = np.array([0.0, 0.2, 0.7, 1.0])
    p0s = np.array([0.1, 0.5, 0.4, 0.9])
    rho1 = expansion.rho1_stack(etas)
    decision = expansion.decision_stack(p0s, etas)
    mixture = expansion.mixture_stack(p0s, etas)
    for k, (p0, eta) in enumerate(zip(p0s, etas)):
        h = build_hypotheses(Scenario(probe, eta=eta, p0=p0))
        assert np.allclose(rho1[k], h.rho1.data)
        assert np.allclose(decision[k], (1 - p0) * h.rho1.data - p0 * h.rho0.data)
        assert np.allclose(mixture[k], (1 - p0) * h.rho1.data + p0 * h.rho0.data)
    weights = expansion.weights(etas)
    assert np.allclose(weights[:, 0], etas ** 2)
    assert np.allclose(weights[:, 1], etas * (1 - etas))
    assert np.allclose(weights[:, 2], (1 - etas) ** 2)


def test_loss_expansion_uses_real_arithmetic_for_real_probes():
    expansion = LossExpansion.from_probe(load_presets().get("ghz_2s1i").build())
    assert not np.iscomplexobj(expansion.stack)
    assert expansion.n_signals == 2
    assert expansion.size == 8


def test_mix_components_binomial_weights():
    components = loss_components(load_presets().get("s_s_i_2s1i").build())
    rho = mix_components(components, 0.25)
    assert rho.trace().real == pytest.approx(1.0)


def test_commutator_detects_non_commuting_hypotheses():
    presets = load_presets()
    assert LossExpansion.from_probe(presets.get("w_2s1i").build()).max_commutator > 1e-8
    for name in ("ghz_2s1i", "s_si_2s1i", "ss_i_2s1i", "s_s_i_2s1i"):
        assert LossExpansion.from_probe(presets.get(name).build()).max_commutator < 1e-12


def test_gamma():
    assert gamma(0.5, 0.0, 2) == pytest.approx(0.0)
    assert gamma(0.2, 0.5, 1) == pytest.approx(0.8 * 0.5 - 0.2)
    assert gamma(0.3, 0.1, 3) == pytest.approx(0.7 * 0.9 ** 3 - 0.3)
    assert math.isclose(gamma(1.0, 0.3, 2), -1.0)
