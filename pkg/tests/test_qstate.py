"""Tests for the cluster-factored pure-state engine.

The gate tests check the registry against a deliberately naive dense
simulator built here from scratch (full 2**n vectors, explicit kron
embeddings), so the two implementations share no code.
"""
import math

import numpy as np
import pytest

from qbutterfly.qstate import (
    CNOT,
    H,
    NOISE_ALL_GATES,
    NORM_ATOL,
    DeadQubitError,
    Gate,
    GateKind,
    StateRegistry,
    X,
    Y,
    Z,
    random_state,
    rx,
    ry,
    states_equal,
)

SQ2 = 1.0 / math.sqrt(2.0)
BELL = np.array([SQ2, 0.0, 0.0, SQ2], dtype=complex)

# -- independent dense oracle -------------------------------------------------

I2 = np.eye(2, dtype=complex)
MX = np.array([[0, 1], [1, 0]], dtype=complex)
MY = np.array([[0, -1j], [1j, 0]], dtype=complex)
MZ = np.array([[1, 0], [0, -1]], dtype=complex)
MH = np.array([[SQ2, SQ2], [SQ2, -SQ2]], dtype=complex)


def mrx(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def mry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def embed_single(n, k, u):
    """Full 2**n matrix applying u on qubit k (qubit 0 = most significant)."""
    full = np.array([[1.0]], dtype=complex)
    for j in range(n):
        full = np.kron(full, u if j == k else I2)
    return full


def embed_cnot(n, control, target):
    dim = 2 ** n
    m = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        cbit = (i >> (n - 1 - control)) & 1
        m[i ^ (cbit << (n - 1 - target)), i] = 1.0
    return m


def registry_vector(reg, qubits):
    """Amplitudes of the (single) cluster holding `qubits`, axes reordered to
    match the given qubit order."""
    order, amps = reg.cluster_state(qubits[0])
    assert set(order) == set(qubits)
    k = len(order)
    perm = [order.index(q) for q in qubits]
    return np.transpose(amps.reshape([2] * k), perm).reshape(-1)


def test_scripted_circuit_matches_dense_oracle():
    reg = StateRegistry()
    rng = np.random.default_rng(17)
    inits = [random_state(rng) for _ in range(3)]
    qs = [reg.alloc_qubit(s) for s in inits]

    oracle = np.kron(np.kron(inits[0], inits[1]), inits[2])
    script = [
        (H, [0], embed_single(3, 0, MH)),
        (CNOT, [0, 1], embed_cnot(3, 0, 1)),
        (rx(0.7), [2], embed_single(3, 2, mrx(0.7))),
        (CNOT, [2, 1], embed_cnot(3, 2, 1)),
        (Y, [0], embed_single(3, 0, MY)),
        (ry(-1.3), [1], embed_single(3, 1, mry(-1.3))),
        (Z, [2], embed_single(3, 2, MZ)),
        (X, [1], embed_single(3, 1, MX)),
        (CNOT, [0, 2], embed_cnot(3, 0, 2)),
    ]
    for gate, targets, full in script:
        reg.apply_gate(gate, [qs[i] for i in targets])
        oracle = full @ oracle

    got = registry_vector(reg, qs)
    assert np.allclose(got, oracle, atol=1e-12)
    assert reg.gate_count == len(script)


@pytest.mark.parametrize("gate,matrix", [
    (X, MX), (Y, MY), (Z, MZ), (H, MH),
    (rx(1.234), mrx(1.234)), (ry(-0.521), mry(-0.521)),
])
def test_single_qubit_gates_match_matrices(gate, matrix):
    reg = StateRegistry()
    init = random_state(np.random.default_rng(3))
    q = reg.alloc_qubit(init)
    reg.apply_gate(gate, [q])
    _, amps = reg.cluster_state(q)
    assert np.allclose(amps, matrix @ init, atol=1e-12)


def test_bell_pair_is_phi_plus():
    reg = StateRegistry()
    a, b = reg.create_bell_pair()
    order, amps = reg.cluster_state(a)
    assert order == (a, b)
    assert np.allclose(amps, BELL, atol=1e-12)
    assert reg.cluster_dims() == [4]


def test_bell_measure_distinguishes_all_bell_states():
    # X/Z on one half turn phi+ into the other Bell states; the measurement
    # must report a distinct, deterministic bit pair for each.
    expected = {(): (0, 0), (X,): (0, 1), (Z,): (1, 0), (X, Z): (1, 1)}
    for paulis, bits in expected.items():
        reg = StateRegistry()
        a, b = reg.create_bell_pair()
        for gate in paulis:
            reg.apply_gate(gate, [b])
        assert reg.bell_measure(a, b) == bits


def test_measurement_frequency_follows_born_rule():
    theta = 1.234
    p1 = math.sin(theta / 2.0) ** 2
    reg = StateRegistry(seed=5)
    hits = 0
    for _ in range(10_000):
        q = reg.alloc_qubit([1.0, 0.0])
        reg.apply_gate(ry(theta), [q])
        hits += reg.measure(q)
    assert abs(hits / 10_000 - p1) < 0.02


def test_bell_pair_measurements_are_correlated():
    reg = StateRegistry(seed=11)
    seen = set()
    for _ in range(200):
        a, b = reg.create_bell_pair()
        ba, bb = reg.measure(a), reg.measure(b)
        assert ba == bb
        seen.add(ba)
    assert seen == {0, 1}


def test_partner_collapses_to_measured_bit():
    reg = StateRegistry(seed=2)
    a, b = reg.create_bell_pair()
    bit = reg.measure(a)
    _, amps = reg.cluster_state(b)
    target = np.zeros(2, dtype=complex)
    target[bit] = 1.0
    assert np.allclose(amps, target, atol=1e-12)


def test_release_leaves_partner_maximally_mixed():
    reg = StateRegistry(seed=4)
    a, b = reg.create_bell_pair()
    reg.release(a)
    plus = np.array([SQ2, SQ2], dtype=complex)
    assert reg.fidelity(b, plus) == pytest.approx(0.5, abs=1e-12)


def test_rotation_inverses_cancel():
    reg = StateRegistry()
    init = random_state(np.random.default_rng(9))
    q = reg.alloc_qubit(init)
    for gate, inverse in ((rx(0.7), rx(-0.7)), (ry(2.1), ry(-2.1))):
        reg.apply_gate(gate, [q])
        reg.apply_gate(inverse, [q])
    _, amps = reg.cluster_state(q)
    assert np.allclose(amps, init, atol=1e-12)


def test_full_turn_is_global_phase_only():
    reg = StateRegistry()
    init = random_state(np.random.default_rng(21))
    q = reg.alloc_qubit(init)
    reg.apply_gate(rx(2.0 * math.pi), [q])
    _, amps = reg.cluster_state(q)
    assert np.allclose(amps, -init, atol=1e-12)
    assert states_equal(amps, init)


def test_states_equal_is_phase_invariant():
    psi = random_state(np.random.default_rng(1))
    assert states_equal(psi, np.exp(1.3j) * psi)
    assert not states_equal(np.array([1.0, 0.0]), np.array([0.0, 1.0]))


def test_fidelity_of_known_states():
    reg = StateRegistry()
    q = reg.alloc_qubit([0.6, 0.8])
    ref = np.array([SQ2, SQ2], dtype=complex)
    assert reg.fidelity(q, ref) == pytest.approx(abs(np.vdot(ref, [0.6, 0.8])) ** 2, abs=1e-12)
    # the reduced state of one Bell half is maximally mixed
    a, b = reg.create_bell_pair()
    assert reg.fidelity(a, [1.0, 0.0]) == pytest.approx(0.5, abs=1e-12)
    assert reg.fidelity(b, ref) == pytest.approx(0.5, abs=1e-12)


def test_pair_fidelity_joint_and_cross_cluster():
    reg = StateRegistry()
    a, b = reg.create_bell_pair()
    assert reg.pair_fidelity(a, b, BELL) == pytest.approx(1.0, abs=1e-12)
    # halves of two unrelated pairs: rho = I/4, overlap with any pure state 0.25
    c, d = reg.create_bell_pair()
    assert reg.pair_fidelity(a, c, BELL) == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(ValueError):
        reg.pair_fidelity(a, a, BELL)


def test_cluster_factoring_keeps_pairs_independent():
    reg = StateRegistry()
    pairs = [reg.create_bell_pair() for _ in range(5)]
    assert reg.cluster_count == 5
    assert reg.cluster_dims() == [4] * 5
    assert reg.total_amplitudes == 20  # not 4**5
    assert reg.peak_cluster_dim == 4
    assert reg.live_count == 10
    assert reg.peak_alloc == 10
    for a, b in pairs:
        reg.release(a)
        reg.release(b)
    assert reg.live_count == 0
    assert reg.peak_alloc == 10


def test_transient_merge_tracked_separately_from_resident():
    reg = StateRegistry(seed=1)
    a, b = reg.create_bell_pair()
    c, d = reg.create_bell_pair()
    reg.bell_measure(b, c)  # merges two 4-dim clusters mid-measurement
    assert reg.peak_cluster_dim == 16
    assert reg.peak_resident_cluster_dim == 4
    assert reg.cluster_count == 1  # a and d now share one cluster
    assert reg.cluster_dims() == [4]


def test_chain_entanglement_grows_and_collapses():
    reg = StateRegistry(seed=0)
    qs = [reg.alloc_qubit([1.0, 0.0]) for _ in range(3)]
    reg.apply_gate(H, [qs[0]])
    reg.apply_gate(CNOT, [qs[0], qs[1]])
    reg.apply_gate(CNOT, [qs[1], qs[2]])
    assert reg.cluster_dims() == [8]
    assert reg.peak_resident_cluster_dim == 8
    reg.measure(qs[0])
    assert reg.cluster_dims() == [4]


def test_consumed_qubits_are_dead():
    reg = StateRegistry(seed=8)
    q = reg.alloc_qubit([1.0, 0.0])
    reg.measure(q)
    with pytest.raises(DeadQubitError):
        reg.measure(q)
    with pytest.raises(DeadQubitError):
        reg.apply_gate(X, [q])
    a, b = reg.create_bell_pair()
    reg.bell_measure(a, b)
    for dead in (a, b):
        with pytest.raises(DeadQubitError):
            reg.fidelity(dead, [1.0, 0.0])
    assert not reg.is_live(q)


def test_qubit_ids_are_never_reused():
    reg = StateRegistry()
    q1 = reg.alloc_qubit([1.0, 0.0])
    reg.measure(q1)
    q2 = reg.alloc_qubit([1.0, 0.0])
    assert q2 != q1


def test_alloc_validates_shape_and_norm():
    reg = StateRegistry()
    with pytest.raises(ValueError):
        reg.alloc_qubit([1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        reg.alloc_qubit([1.0, 1.0])
    # within the norm tolerance is fine
    reg.alloc_qubit([1.0 + 0.5 * NORM_ATOL, 0.0])


def test_gate_construction_validation():
    with pytest.raises(ValueError):
        Gate(GateKind.RX)  # rotation without an angle
    with pytest.raises(ValueError):
        Gate(GateKind.X, theta=0.5)
    with pytest.raises(ValueError):
        rx(float("nan"))
    with pytest.raises(ValueError):
        ry(float("inf"))


def test_gate_application_validation():
    reg = StateRegistry()
    a = reg.alloc_qubit([1.0, 0.0])
    b = reg.alloc_qubit([1.0, 0.0])
    with pytest.raises(ValueError):
        reg.apply_gate(CNOT, [a])
    with pytest.raises(ValueError):
        reg.apply_gate(X, [a, b])
    with pytest.raises(ValueError):
        reg.apply_gate(CNOT, [a, a])
    with pytest.raises(ValueError):
        reg.bell_measure(a, a)


def test_registry_constructor_validation():
    with pytest.raises(ValueError):
        StateRegistry(noise_prob=1.5)
    with pytest.raises(ValueError):
        StateRegistry(noise_prob=-0.1)
    with pytest.raises(ValueError):
        StateRegistry(noise_model="thermal")


def test_random_state_normalized_and_deterministic():
    s1 = random_state(np.random.default_rng(123))
    s2 = random_state(np.random.default_rng(123))
    assert np.allclose(s1, s2)
    assert abs(np.linalg.norm(s1) - 1.0) < 1e-12


def test_noiseless_runs_are_clean_and_reproducible():
    outcomes = []
    for _ in range(2):
        reg = StateRegistry(noise_prob=0.0, seed=77)
        bits = []
        for _ in range(20):
            a, b = reg.create_bell_pair()
            bits.append(reg.bell_measure(a, b))
        outcomes.append(bits)
    assert outcomes[0] == outcomes[1]
    assert reg.noise_events == 0


def test_entangling_noise_fires_only_on_cnot():
    reg = StateRegistry(noise_prob=1.0, seed=13)
    q = reg.alloc_qubit([1.0, 0.0])
    for _ in range(10):
        reg.apply_gate(H, [q])
        reg.apply_gate(rx(0.3), [q])
    assert reg.noise_events == 0

    # every noisy pair creation lands exactly one Pauli on one half, which
    # maps phi+ to an orthogonal Bell state
    for seed in range(12):
        reg = StateRegistry(noise_prob=1.0, seed=seed)
        a, b = reg.create_bell_pair()
        assert reg.noise_events == 1
        assert reg.pair_fidelity(a, b, BELL) == pytest.approx(0.0, abs=1e-12)


def test_all_gates_noise_hits_every_target():
    for seed in range(12):
        reg = StateRegistry(noise_prob=1.0, seed=seed, noise_model=NOISE_ALL_GATES)
        a, b = reg.create_bell_pair()
        assert reg.noise_events == 3  # one for H, one per CNOT target
        # Pauli images of Bell states are Bell states: fidelity is 0 or 1
        fid = reg.pair_fidelity(a, b, BELL)
        assert min(abs(fid), abs(fid - 1.0)) < 1e-12


def test_noise_rate_statistics():
    reg = StateRegistry(noise_prob=0.25, seed=99)
    for _ in range(2000):
        a, b = reg.create_bell_pair()
        reg.release(a)
        reg.release(b)
    # one CNOT per pair; expect ~500 events (sigma ~ 19)
    assert abs(reg.noise_events - 500) < 80
