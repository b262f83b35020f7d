import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from workqp.gleason import nonnegativity_certificate
from workqp.operators import DensityMatrix, EvolutionSpec, ValidationError
from workqp.oracle import brute_moments, brute_pq
from workqp.sampling import random_hermitian, random_scenario, random_unitary
from workqp.work import (
    ChainSpec,
    FTensor,
    Scenario,
    WorkDistribution,
    chain_distribution,
    f_perturbed_distribution,
    mean_energy_change,
    mix,
    moment,
    negativity,
    no_go_repetition,
    quasiprob_q,
    second_moment_operator,
    total_variation,
    tpm_distribution,
    triple_weights,
    verify_conditions,
)

from conftest import PLUS, qubit_scenario

PSI = np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)])


def assert_same_atoms(d, atoms, atol=1e-12):
    assert len(d) == len(atoms)
    for (w, c), (w_ref, c_ref) in zip(d.atoms, atoms):
        assert w == pytest.approx(w_ref, abs=atol)
        assert c == pytest.approx(c_ref, abs=atol)


def static_scenario(rng, dim=3):
    h = random_hermitian(dim, rng)
    rho = DensityMatrix(np.eye(dim) / dim)
    return Scenario.from_hamiltonians(h, h, EvolutionSpec.direct(np.eye(dim)), rho)


# -- distributions ---------------------------------------------------------------


def test_work_distribution_validation():
    with pytest.raises(ValidationError):
        WorkDistribution([1.0, 0.0], [0.5, 0.5])
    with pytest.raises(ValidationError):
        WorkDistribution([0.0, 1.0], [0.5, 0.6])
    with pytest.raises(ValidationError):
        WorkDistribution([0.0, 1e-12], [0.5, 0.5], merge_tol=1e-9)


def test_tpm_static_single_atom(rng):
    d = tpm_distribution(static_scenario(rng))
    # zero-weight atoms at e_k - e_i (k != i) are kept
    support = [(w, c) for w, c in d.atoms if abs(c) > 1e-14]
    assert len(support) == 1
    assert support[0][0] == pytest.approx(0.0, abs=1e-12)
    assert support[0][1] == pytest.approx(1.0, abs=1e-12)


def test_tpm_qubit_maximally_mixed():
    d = tpm_distribution(qubit_scenario(DensityMatrix(np.eye(2) / 2)))
    assert_same_atoms(d, [(-2.0, 0.25), (-1.0, 0.25), (0.0, 0.25), (1.0, 0.25)])


def test_tpm_weights_are_probabilities(rng):
    for _ in range(100):
        s = random_scenario(int(rng.integers(2, 9)), rng)
        d = tpm_distribution(s)
        assert d.weights.min() >= -1e-12
        assert d.weights.sum() == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("q", [0.0, 0.3, 0.5, 1.0])
def test_incoherent_state_reproduces_tpm(q, rng):
    for _ in range(10):
        s = random_scenario(int(rng.integers(2, 7)), rng, coherent=False)
        assert total_variation(quasiprob_q(s, q), tpm_distribution(s)) < 1e-10


def test_qubit_plus_q0(qubit_plus):
    # w = e'_k - e_j; the k = - branch is orthogonal to |+>
    assert_same_atoms(quasiprob_q(qubit_plus, 0.0), [(-2.0, 0.0), (-1.0, 0.0), (0.0, 0.5), (1.0, 0.5)])


def test_qubit_plus_q_half(qubit_plus):
    # i != j cross terms: <+|0><0|+-><+-|1><1|+> = +-1/4, twice, at w = +-1 - 1/2
    assert_same_atoms(quasiprob_q(qubit_plus, 0.5),
                      [(-2.0, 0.25), (-1.5, -0.5), (-1.0, 0.25), (0.0, 0.25), (0.5, 0.5), (1.0, 0.25)])


@pytest.mark.parametrize("q", [0.0, 0.25, 0.5])
def test_qubit_matches_triple_loop(q, qubit_plus):
    ref = brute_pq(qubit_plus, q).value
    assert_same_atoms(quasiprob_q(qubit_plus, q), ref)


def test_coherent_q_dependence(qubit_plus):
    assert total_variation(quasiprob_q(qubit_plus, 0.0), quasiprob_q(qubit_plus, 0.5)) > 0.1


def test_mix_examples(qubit_plus):
    p0, p1 = quasiprob_q(qubit_plus, 0.0), quasiprob_q(qubit_plus, 1.0)
    assert total_variation(mix([p0], [1.0]), p0) == 0.0
    half = mix([p0, p1], [0.5, 0.5])
    assert moment(half, 1) == pytest.approx(0.5 * (moment(p0, 1) + moment(p1, 1)), abs=1e-12)
    with pytest.raises(ValidationError):
        mix([p0, p1], [1.5, -0.5])
    with pytest.raises(ValidationError):
        mix([p0, p1], [0.5])


def test_mixture_over_q_grid_satisfies_conditions(rng):
    s = random_scenario(4, rng)
    grid = [0, 0.25, 0.5, 0.75, 1]
    m = mix([quasiprob_q(s, q) for q in grid], [0.2] * 5)
    md = mix([quasiprob_q(s.dephased(), q) for q in grid], [0.2] * 5)
    assert total_variation(md, tpm_distribution(s)) < 1e-10
    assert abs(moment(m, 1) - mean_energy_change(s)) < 1e-10
    assert abs(moment(m, 2) - second_moment_operator(s)) < 1e-10


# -- moments ---------------------------------------------------------------------


def test_moment_examples():
    d = WorkDistribution([2.5], [1.0])
    assert moment(d, 0) == 1.0
    assert moment(d, 1) == 2.5
    with pytest.raises(ValueError):
        moment(d, -1)


def test_operator_moments_static(rng):
    s = static_scenario(rng)
    assert abs(mean_energy_change(s)) < 1e-12
    assert abs(second_moment_operator(s)) < 1e-12


def test_qubit_operator_moments(qubit_plus):
    # dH = sigma_x - diag(0, 1) = [[0, 1], [1, -1]]; dH^2 = [[1, -1], [-1, 2]]
    assert mean_energy_change(qubit_plus) == pytest.approx(0.5, abs=1e-14)
    assert second_moment_operator(qubit_plus) == pytest.approx(0.5, abs=1e-14)
    assert moment(quasiprob_q(qubit_plus, 0.0), 2) == pytest.approx(0.5, abs=1e-14)


def test_second_moment_nonnegative(rng):
    for _ in range(30):
        assert second_moment_operator(random_scenario(int(rng.integers(2, 7)), rng, mixed=True)) >= -1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 8), q=st.floats(-1.0, 2.0))
def test_conditions_hold_for_any_q(seed, dim, q):
    s = random_scenario(dim, np.random.default_rng(seed))
    report = verify_conditions(s, [q])
    assert report.passed, report.records


def test_verify_conditions_examples(rng):
    s = random_scenario(3, rng, coherent=False)
    rep = verify_conditions(s, [0.0, 0.5, 1.0])
    assert rep.passed
    assert all(r.w1 < 1e-12 for r in rep.records)
    coherent = random_scenario(3, rng)
    assert negativity(quasiprob_q(coherent, 0.5)) > 0
    assert verify_conditions(coherent, [0.5]).passed


def test_verify_reports_scale_free_residuals(rng):
    s = random_scenario(3, rng)
    big = Scenario(
        s.initial.__class__(s.initial.projectors, 1e4 * s.initial.eigenvalues, s.initial.ranks),
        s.final.__class__(s.final.projectors, 1e4 * s.final.eigenvalues, s.final.ranks),
        s.evolution, s.rho0,
    )
    assert verify_conditions(big, [0.3]).passed


# -- negativity ------------------------------------------------------------------


def test_negativity_examples(rng):
    assert negativity(WorkDistribution([0.0, 1.0], [1.2, -0.2])) == pytest.approx(0.2)
    assert negativity(tpm_distribution(random_scenario(4, rng))) == 0.0
    assert negativity(quasiprob_q(qubit_scenario(PSI), 0.0)) > 0


def test_negativity_zero_when_every_triple_certified(rng):
    for _ in range(20):
        s = random_scenario(int(rng.integers(2, 5)), rng, coherent=False)
        for i, k, j in itertools.product(range(len(s.initial)), range(len(s.final)), range(len(s.initial))):
            seq = [s.initial.projectors[i], s.evolved_final.projectors[k], s.initial.projectors[j]]
            assert nonnegativity_certificate(seq, s.rho0).certified
        for q in (0.0, 0.4, 1.0):
            assert negativity(quasiprob_q(s, q)) < 1e-14


# -- invariants ------------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 6), q=st.floats(-0.5, 1.5))
def test_q_reflection(seed, dim, q):
    s = random_scenario(dim, np.random.default_rng(seed))
    a, b = quasiprob_q(s, q), quasiprob_q(s, 1 - q)
    assert len(a) == len(b)
    assert np.abs(a.w - b.w).max() <= s.default_merge_tol
    assert np.abs(a.weights - b.weights).max() < 1e-12


def test_initial_marginal(rng):
    for _ in range(20):
        s = random_scenario(int(rng.integers(2, 7)), rng)
        t = triple_weights(s.initial.projectors, s.evolved_final.projectors, s.rho0.entries).real
        diag = np.array([np.trace(p @ s.rho0.entries).real for p in s.initial.projectors])
        # q = 0 groups by e_j (sum over i, k); q = 1 groups by e_i (sum over k, j)
        np.testing.assert_allclose(t.sum(axis=(0, 1)), diag, atol=1e-12)
        np.testing.assert_allclose(t.sum(axis=(1, 2)), diag, atol=1e-12)


def test_normalization_of_outputs(rng):
    for _ in range(20):
        s = random_scenario(int(rng.integers(2, 9)), rng, mixed=True)
        for q in (0.0, 0.7, 1.3):
            assert quasiprob_q(s, q).weights.sum() == pytest.approx(1.0, abs=1e-10)


def test_degenerate_spectrum_uses_eigenspaces(rng):
    u = random_unitary(4, rng).entries
    h0 = u @ np.diag([0.0, 1.0, 1.0, 2.0]) @ u.conj().T
    s = Scenario.from_hamiltonians(0.5 * (h0 + h0.conj().T), random_hermitian(4, rng),
                                   EvolutionSpec.direct(random_unitary(4, rng)), random_scenario(4, rng).rho0)
    assert s.initial.ranks == (1, 2, 1)
    assert verify_conditions(s, [0.0, 0.5]).passed
    assert len(brute_pq(s, 0.5).value) == len(quasiprob_q(s, 0.5))


# -- f-tensor --------------------------------------------------------------------


def random_ftensor(s, rng):
    m, n = len(s.initial), len(s.final)
    c = rng.normal(size=(m, m))
    np.fill_diagonal(c, 0.0)
    return FTensor(rng.normal(size=(m, n)), c)


def test_ftensor_validation():
    c = np.ones((2, 2))
    with pytest.raises(ValidationError):
        FTensor(np.zeros((2, 3)), c)
    with pytest.raises(ValidationError):
        FTensor(np.zeros((2, 3)), np.zeros((3, 3)))


def test_zero_ftensor_is_identity(qubit_plus):
    d = f_perturbed_distribution(qubit_plus, 0.3, FTensor.zero(2, 2))
    assert total_variation(d, quasiprob_q(qubit_plus, 0.3)) == 0.0


def test_ftensor_diagonal_vanishes(rng):
    f = random_ftensor(random_scenario(4, rng), rng).values()
    assert np.all(np.einsum("iik->ik", f) == 0)


def test_ftensor_mean_invariance(rng):
    for _ in range(50):
        s = random_scenario(int(rng.integers(2, 7)), rng)
        q = float(rng.uniform(-0.5, 1.5))
        d = f_perturbed_distribution(s, q, random_ftensor(s, rng))
        assert abs(moment(d, 1) - mean_energy_change(s)) < 1e-9


def test_k_independent_shift_is_invisible_to_second_moment(rng):
    # a_ik = e_i^2: summing over k first yields Tr{P_i P_j rho} = 0 for i != j
    s = random_scenario(4, rng)
    e = s.initial.eigenvalues
    f = FTensor(np.repeat((e ** 2)[:, None], len(s.final), axis=1), np.zeros((len(e), len(e))))
    d = f_perturbed_distribution(s, 0.3, f)
    assert abs(moment(d, 1) - mean_energy_change(s)) < 1e-12
    assert abs(moment(d, 2) - second_moment_operator(s)) < 1e-12
    assert abs(moment(d, 3) - moment(quasiprob_q(s, 0.3), 3)) > 1e-6


def test_k_dependent_shift_breaks_second_moment(rng):
    s = random_scenario(4, rng)
    f = FTensor(np.outer(s.initial.eigenvalues ** 2, s.final.eigenvalues), np.zeros((4, 4)))
    d = f_perturbed_distribution(s, 0.5, f)
    assert abs(moment(d, 1) - mean_energy_change(s)) < 1e-9
    assert abs(moment(d, 2) - second_moment_operator(s)) > 1e-6


# -- chains ----------------------------------------------------------------------


def test_chain_spec_validation():
    with pytest.raises(ValidationError):
        ChainSpec((("initial", "i"), ("final", "k")), (("i", 0.5), ("k", 1.0)))
    with pytest.raises(ValidationError):
        ChainSpec((("initial", "i"), ("final", "i")), (("i", 1.0),))
    with pytest.raises(ValidationError):
        ChainSpec((("nowhere", "i"),), (("i", 1.0),))
    assert ChainSpec.repeated_initial().has_repetition
    assert not ChainSpec.triple(0.3).has_repetition


def test_margenau_hill_real_part_matches_q_endpoints(rng):
    s = random_scenario(3, rng)
    ik = chain_distribution(s, ChainSpec.margenau_hill())
    ki = chain_distribution(s, ChainSpec.reversed_margenau_hill())
    # sum over j of P_i P'_k P_j collapses to P_i P'_k: that is q = 1
    assert total_variation(ik.real, quasiprob_q(s, 1.0)) < 1e-12
    assert total_variation(ki.real, quasiprob_q(s, 0.0)) < 1e-12
    assert np.abs(ik.complex_weights.imag).max() > 1e-6


@pytest.mark.parametrize("q", [0.0, 0.3, 0.5, 1.2])
def test_triple_chain_matches_quasiprob(q, rng):
    s = random_scenario(3, rng)
    res = chain_distribution(s, ChainSpec.triple(q))
    assert total_variation(res.real, quasiprob_q(s, q)) < 1e-12


def test_repeated_chain_distribution_is_normalized(qubit_plus):
    res = chain_distribution(qubit_plus, ChainSpec.repeated_initial())
    # Tr{P_i P'_k P_i rho} only sees the dephased state: it is the TPM
    assert total_variation(res.real, tpm_distribution(qubit_plus)) < 1e-12


# -- no-go -----------------------------------------------------------------------


def test_no_go_qubit_magnitude_one(qubit_plus):
    rep = no_go_repetition(qubit_plus)
    assert rep.status == "confirmed"
    assert rep.repeated_deviation == pytest.approx(1.0, abs=1e-12)
    assert rep.free_deviation < 1e-10
    # the hand value |sum_k <e1|P'_k|e0> e'_k|
    e0, e1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    hand = abs(sum(ek * e1 @ pk @ e0 for pk, ek, _ in qubit_plus.evolved_final.members))
    assert hand == pytest.approx(1.0)


def test_no_go_aligned_bases_inconclusive(rng):
    s = random_scenario(3, rng)
    aligned = Scenario(s.initial, s.initial, EvolutionSpec.direct(np.eye(3)), s.rho0)
    assert no_go_repetition(aligned).status == "inconclusive"


def test_no_go_random_repetition_free_chains_pass(rng):
    for _ in range(50):
        rep = no_go_repetition(random_scenario(int(rng.integers(2, 6)), rng))
        assert rep.free_deviation < 1e-10
        assert rep.status == "confirmed"


def test_no_go_needs_two_levels():
    s = Scenario.from_hamiltonians(np.eye(1), np.eye(1), EvolutionSpec.direct(np.eye(1)), DensityMatrix(np.eye(1)))
    with pytest.raises(ValidationError):
        no_go_repetition(s)


def test_oracle_moments_agree(rng):
    for _ in range(20):
        s = random_scenario(int(rng.integers(2, 7)), rng)
        assert brute_moments(s, 1).value == pytest.approx(mean_energy_change(s), abs=1e-12)
        assert brute_moments(s, 2).value == pytest.approx(second_moment_operator(s), abs=1e-12)
