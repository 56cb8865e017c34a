"""Discrete channel: Kraus form vs superoperator matrix, limits and fixed points."""

import numpy as np
import pytest
from scipy.linalg import expm

from openchaos.dephasing import EDParams, ed_liouvillian
from openchaos.pqc import (
    ParametricChannel,
    apply_channel,
    build_superoperator,
    build_wu_channel,
    evolve_discrete,
    kick_superoperator,
    lindblad_generator,
    unitary_superoperator,
)
from openchaos.rmt import KrausSet, derive_seed, sample_goe, sample_kraus_set
from openchaos.states import cgs_density, make_cgs, vectorize


def _channel(d=8, tau=0.1, eps=0.2, seed=31, idx=0, k=3):
    h = sample_goe(d, 1.0, derive_seed(seed, 0, idx))
    ks = sample_kraus_set(d, k, derive_seed(seed, 1, idx))
    return ParametricChannel(tau=tau, epsilon=eps, hamiltonian=h, kraus=ks)


def test_kraus_and_superoperator_routes_agree():
    # the central dual-path identity, over several random channels and steps
    for idx in range(5):
        ch = _channel(idx=idx, tau=0.3, eps=0.35)
        sup = build_superoperator(ch)
        rho = cgs_density(make_cgs(ch.hamiltonian, 0.1)).mat
        for _ in range(5):
            via_kraus = apply_channel(ch, rho).mat
            via_matrix = sup.apply(rho)
            assert np.max(np.abs(via_kraus - via_matrix)) < 1e-12
            rho = via_kraus


def test_superoperator_is_trace_preserving():
    for idx in range(5):
        ch = _channel(idx=idx, tau=0.7, eps=0.6)
        assert build_superoperator(ch).trace_defect() < 1e-12
        assert build_wu_channel(ch).trace_defect() < 1e-12


def test_channel_factorizes_into_unitary_and_kick():
    ch = _channel(tau=0.2, eps=0.3)
    u = unitary_superoperator(ch).matrix
    kick = kick_superoperator(ch).matrix
    d2 = ch.dim**2
    expect = (1 - ch.epsilon) * u + kick - (1 - ch.epsilon) * np.eye(d2)
    assert np.max(np.abs(build_superoperator(ch).matrix - expect)) < 1e-12


def test_wu_channel_is_kick_times_unitary():
    ch = _channel(tau=0.2, eps=0.3)
    expect = kick_superoperator(ch).matrix @ unitary_superoperator(ch).matrix
    assert np.max(np.abs(build_wu_channel(ch).matrix - expect)) < 1e-12


def test_channel_forms_coincide_at_tau_zero():
    ch = _channel(tau=0.0, eps=0.4)
    a = build_superoperator(ch).matrix
    b = build_wu_channel(ch).matrix
    assert np.max(np.abs(a - b)) < 1e-14


def test_channel_forms_differ_at_first_order_in_tau():
    # mixture and interleaved products differ by eps*M*(U-1) = O(eps*tau)
    h = sample_goe(16, 1.0, derive_seed(31, 0, 9))
    ks = sample_kraus_set(16, 3, derive_seed(31, 1, 9))
    gaps = []
    taus = (1e-2, 1e-3, 1e-4)
    for tau in taus:
        ch = ParametricChannel(tau=tau, epsilon=0.5, hamiltonian=h, kraus=ks)
        gaps.append(np.max(np.abs(build_superoperator(ch).matrix - build_wu_channel(ch).matrix)))
    slope = np.polyfit(np.log(taus), np.log(gaps), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.05)


def test_isolated_channel_phases_on_unit_circle():
    ch = _channel(tau=0.4, eps=0.0)
    ev = np.linalg.eigvals(build_superoperator(ch).matrix)
    assert np.max(np.abs(np.abs(ev) - 1.0)) < 1e-10
    # phases are exactly the gap angles tau*(E_m - E_n)
    e = ch.hamiltonian.energies
    expect = np.sort(np.angle(np.exp(1j * ch.tau * (e[None, :] - e[:, None])).reshape(-1)))
    assert np.max(np.abs(np.sort(np.angle(ev)) - expect)) < 1e-10


def test_isolated_sff_matches_partition_function_ratio():
    # eps=0 evolution of the coherent Gibbs state reproduces |Z(it)/Z|^2 at beta=0
    ch = _channel(tau=0.25, eps=0.0)
    d = ch.dim
    cgs = make_cgs(ch.hamiltonian, 0.0)
    rho = cgs_density(cgs).mat
    e = ch.hamiltonian.energies
    for j, state in enumerate(evolve_discrete(ch, rho, 6)):
        z = np.sum(np.exp(-1j * j * ch.tau * e)) / d
        direct = float(np.real(cgs.amplitudes @ state.mat @ cgs.amplitudes))
        assert direct == pytest.approx(abs(z) ** 2, abs=1e-12)


def test_sff_equals_superoperator_entry_sum():
    # at beta=0 the fidelity is the plain mean of all d^2 superoperator-power entries
    ch = _channel(tau=0.15, eps=0.25)
    d = ch.dim
    cgs = make_cgs(ch.hamiltonian, 0.0)
    rho = cgs_density(cgs).mat
    m = build_superoperator(ch).matrix
    power = np.eye(d * d, dtype=complex)
    for j, state in enumerate(evolve_discrete(ch, rho, 8)):
        if j > 0:
            power = m @ power
        via_sum = float(np.real(np.sum(power))) / d**2
        direct = float(np.real(cgs.amplitudes @ state.mat @ cgs.amplitudes))
        assert direct == pytest.approx(via_sum, abs=1e-10)


def test_unital_single_kraus_channel_fixes_maximally_mixed():
    ch = _channel(tau=0.3, eps=0.45, k=1)
    d = ch.dim
    rho = np.eye(d, dtype=complex) / d
    out = apply_channel(ch, rho).mat
    assert np.max(np.abs(out - rho)) < 1e-13


def test_fixed_point_eigenvalue_exists():
    ch = _channel(tau=0.6, eps=0.3, idx=2)
    ev = np.linalg.eigvals(build_superoperator(ch).matrix)
    assert np.min(np.abs(ev - 1.0)) < 1e-8


def test_markov_generator_with_hamiltonian_kraus_is_dephasing():
    # N_1 = H makes the dissipator the double commutator: exactly the
    # dephasing Liouvillian, entry by entry
    d, gamma = 8, 0.3
    h = sample_goe(d, 1.0, derive_seed(31, 0, 5))
    ks = KrausSet(d, h.matrix[np.newaxis].astype(complex), seed=None, generator_only=True)
    gen = lindblad_generator(h, ks, gamma)
    led = ed_liouvillian(h, EDParams(gamma))
    assert np.max(np.abs(gen.matrix - led.matrix)) < 1e-12


def test_markov_generator_preserves_trace():
    d = 6
    h = sample_goe(d, 1.0, derive_seed(31, 0, 6))
    ks = sample_kraus_set(d, 3, derive_seed(31, 1, 6))
    gen = lindblad_generator(h, ks, 0.4)
    one = np.eye(d, dtype=complex).reshape(-1)
    assert np.max(np.abs(one @ gen.matrix)) < 1e-12


def test_markov_limit_fixed_horizon_first_order():
    d, gamma, t = 6, 0.5, 1.0
    h = sample_goe(d, 1.0, derive_seed(31, 0, 7))
    ks = sample_kraus_set(d, 3, derive_seed(31, 1, 7))
    target = expm(t * lindblad_generator(h, ks, gamma).matrix)
    errs, taus = [], (1e-2, 1e-3, 1e-4)
    for tau in taus:
        ch = ParametricChannel(tau=tau, epsilon=2 * gamma * tau, hamiltonian=h, kraus=ks)
        prop = np.linalg.matrix_power(build_superoperator(ch).matrix, round(t / tau))
        errs.append(np.max(np.abs(prop - target)))
    slope = np.polyfit(np.log(taus), np.log(errs), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.1)


def test_channel_rejects_generator_only_kraus():
    h = sample_goe(4, 1.0, derive_seed(31, 0, 8))
    ops = np.stack([np.eye(4, dtype=complex)])
    ks = KrausSet(4, ops, seed=None, generator_only=True)
    with pytest.raises(ValueError):
        ParametricChannel(tau=0.1, epsilon=0.1, hamiltonian=h, kraus=ks)


def test_channel_parameter_validation():
    h = sample_goe(4, 1.0, derive_seed(31, 0, 8))
    ks = sample_kraus_set(4, 2, derive_seed(31, 1, 8))
    with pytest.raises(ValueError):
        ParametricChannel(tau=-0.1, epsilon=0.1, hamiltonian=h, kraus=ks)
    with pytest.raises(ValueError):
        ParametricChannel(tau=0.1, epsilon=1.5, hamiltonian=h, kraus=ks)
    with pytest.raises(ValueError):
        ParametricChannel(tau=0.1, epsilon=0.1, hamiltonian=h, kraus=ks, hbar=0.0)


def test_evolve_discrete_yields_states_inclusive():
    ch = _channel(tau=0.2, eps=0.1)
    rho = cgs_density(make_cgs(ch.hamiltonian, 0.0)).mat
    states = list(evolve_discrete(ch, rho, 4))
    assert len(states) == 5
    assert np.array_equal(states[0].mat, rho)
    for s in states:
        assert np.trace(s.mat).real == pytest.approx(1.0, abs=1e-12)
