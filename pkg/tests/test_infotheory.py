import itertools
import math

import numpy as np
import pytest

from analysis.infotheory import (
    classical_mutual_information,
    commutator_norm,
    holevo,
    holevo_batch,
    linear_entropy,
)
from core.errors import ScenarioError
from core.presets import load_presets
from core.scenario import HypothesisPair, LossExpansion, Scenario, build_hypotheses
from core.states import Family, ProbeSpec, PureState, Role, build_probe
from core.tensor import ComplexMatrix

S, I = Role.SIGNAL, Role.IDLER


def bell():
    return build_probe(ProbeSpec(Family.PAIR, (2, 2), (S, I), pair=(0, 1)))


def test_identical_hypotheses_carry_no_information():
    h = build_hypotheses(Scenario(bell(), eta=0.0, p0=0.5))
    assert holevo(h, 0.5).chi == pytest.approx(0.0, abs=1e-12)


def test_perfect_reflection_of_bell_pair():
    h = build_hypotheses(Scenario(bell(), eta=1.0, p0=0.5))
    values = np.array([5 / 8, 1 / 8, 1 / 8, 1 / 8])
    expected = -np.sum(values * np.log2(values)) - 0.5 * 2.0
    result = holevo(h, 0.5, log_base=2)
    assert result.chi == pytest.approx(expected)
    assert result.commuting
    nats = holevo(h, 0.5, log_base=math.e)
    assert nats.chi == pytest.approx(expected * math.log(2))


def test_holevo_rejects_bad_prior():
    h = build_hypotheses(Scenario(bell(), eta=0.5, p0=0.5))
    with pytest.raises(ScenarioError):
        holevo(h, 1.5)


def test_w_probe_is_flagged_non_commuting():
    probe = load_presets().get("w_2s1i").build()
    result = holevo(build_hypotheses(Scenario(probe, eta=0.5, p0=0.5)), 0.5)
    assert not result.commuting
    assert result.commutator_norm > 1e-8


@pytest.mark.parametrize("name", ["si_1s1i", "ghz_2s1i", "s_s_s_3s"])
def test_batch_matches_single_point(name):
    probe = load_presets().get(name).build()
    expansion = LossExpansion.from_probe(probe)
    p0s = np.array([0.0, 0.3, 0.5, 0.9])
    etas = np.array([0.4, 0.0, 0.7, 1.0])
    batch = holevo_batch(expansion, p0s, etas)
    for value, p0, eta in zip(batch, p0s, etas):
        single = holevo(build_hypotheses(Scenario(probe, eta=eta, p0=p0)), p0).chi
        assert value == pytest.approx(single, abs=1e-10)


def test_holevo_is_bounded_by_one_bit():
    probe = load_presets().get("s_si_2s1i").build()
    expansion = LossExpansion.from_probe(probe)
    p0s, etas = np.meshgrid(np.linspace(0, 1, 11), np.linspace(0, 1, 11))
    values = holevo_batch(expansion, p0s.ravel(), etas.ravel(), log_base=2)
    assert np.all(values >= -1e-12)
    assert np.all(values <= 1.0 + 1e-12)


def test_classical_mutual_information():
    assert classical_mutual_information(0.5, [1, 0], [0, 1], log_base=2) == pytest.approx(1.0)
    assert classical_mutual_information(0.3, [0.2, 0.8], [0.2, 0.8]) == pytest.approx(0.0, abs=1e-12)
    assert classical_mutual_information(0.5, [1, 0], [0, 1], log_base=math.e) == pytest.approx(math.log(2))


def test_commutator_norm():
    x = ComplexMatrix((2,), np.array([[0, 1], [1, 0]]))
    z = ComplexMatrix.diagonal([1, -1])
    assert commutator_norm(x, z) == pytest.approx(math.sqrt(8))
    assert commutator_norm(z, z) == 0.0


def test_linear_entropy():
    assert linear_entropy(bell(), traced=[1]) == pytest.approx(0.5)
    ghz = load_presets().get("ghz_2s1i").build()
    assert linear_entropy(ghz, traced=(0, 1)) == pytest.approx(0.5)
    separable = load_presets().get("s_s_i_2s1i").build()
    assert linear_entropy(separable, traced=(1, 2)) == pytest.approx(0.0, abs=1e-12)


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_holevo_invariant_under_joint_unitary():
    rng = np.random.default_rng(21)
    probe = load_presets().get("w_2s1i").build()
    for p0, eta in [(0.3, 0.4), (0.5, 0.8), (0.7, 0.2)]:
        h = build_hypotheses(Scenario(probe, eta=eta, p0=p0))
        u = random_unitary(rng, h.rho0.size)
        rotated = HypothesisPair(
            rho0=ComplexMatrix(h.dims, u @ h.rho0.data @ u.conj().T),
            rho1=ComplexMatrix(h.dims, u @ h.rho1.data @ u.conj().T),
            eta=eta,
            n_signals=h.n_signals,
        )
        assert holevo(rotated, p0).chi == pytest.approx(holevo(h, p0).chi, abs=1e-9)


@pytest.mark.parametrize("name", ["ghz_2s1i", "s_si_2s1i", "si_1s1i"])
def test_holevo_invariant_under_local_unitaries(name):
    rng = np.random.default_rng(8)
    probe = load_presets().get(name).build()
    local = random_unitary(rng, probe.dims[0])
    for d in probe.dims[1:]:
        local = np.kron(local, random_unitary(rng, d))
    rotated = PureState(probe.dims, probe.roles, local @ probe.amps)
    for p0, eta in [(0.2, 0.3), (0.5, 0.6), (0.8, 0.9)]:
        before = holevo(build_hypotheses(Scenario(probe, eta=eta, p0=p0)), p0).chi
        after = holevo(build_hypotheses(Scenario(rotated, eta=eta, p0=p0)), p0).chi
        assert after == pytest.approx(before, abs=1e-9)


@pytest.mark.parametrize("name", ["s_s_i_2s1i", "s_s_s_3s", "s_i_1s1i"])
def test_holevo_equals_classical_information_for_diagonal_hypotheses(name):
    probe = load_presets().get(name).build()
    for p0, eta in [(0.1, 0.2), (0.5, 0.5), (0.65, 0.95)]:
        h = build_hypotheses(Scenario(probe, eta=eta, p0=p0))
        assert commutator_norm(h.rho0, h.rho1) == pytest.approx(0.0, abs=1e-14)
        dist0 = np.real(np.diag(h.rho0.data))
        dist1 = np.real(np.diag(h.rho1.data))
        for base in (2, math.e):
            expected = classical_mutual_information(p0, dist0, dist1, log_base=base)
            assert holevo(h, p0, log_base=base).chi == pytest.approx(expected, abs=1e-12)


def test_holevo_bits_are_nats_over_ln2():
    probe = load_presets().get("ghz_2s1i").build()
    expansion = LossExpansion.from_probe(probe)
    p0s = np.linspace(0.05, 0.95, 7)
    etas = np.linspace(0.1, 1.0, 7)
    bits = holevo_batch(expansion, p0s, etas, log_base=2)
    nats = holevo_batch(expansion, p0s, etas, log_base=math.e)
    assert np.allclose(bits, nats / math.log(2), atol=1e-13)


@pytest.mark.parametrize("name", ["ghz_2s1i", "w_2s1i", "s_si_2s1i", "cyclic_3s_d3", "ghz_3s1i"])
def test_linear_entropy_of_complementary_parts(name):
    probe = load_presets().get(name).build()
    modes = set(range(probe.n_modes))
    for size in range(1, probe.n_modes):
        for part in itertools.combinations(sorted(modes), size):
            rest = tuple(sorted(modes - set(part)))
            assert linear_entropy(probe, traced=part) == pytest.approx(linear_entropy(probe, traced=rest), abs=1e-12)
