import numpy as np
import pytest
from scipy.linalg import expm

from qesn import rng as rngs
from qesn.circuits import U1_ANGLES
from qesn.errors import ConfigurationError
from qesn.quantum import DensityMatrix, GateOp, StateVector, UnitaryCircuit, apply_circuit, expect_z_all
from qesn.reservoir import (
    ReservoirConfig,
    branch_probabilities,
    channel_step,
    evolve_channel,
    evolve_ensemble,
    step_member,
)

from conftest import make_config, random_density, random_state_amplitudes

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.diag([1.0, -1.0]).astype(complex)


def oracle_u0_3q():
    """Permutation matrix of CNOT(0,1) then CNOT(1,2), built from bit arithmetic."""
    P = np.zeros((8, 8))
    for b in range(8):
        b0, b1, b2 = (b >> 2) & 1, (b >> 1) & 1, b & 1
        b1 ^= b0
        b2 ^= b1
        P[(b0 << 2) | (b1 << 1) | b2, b] = 1
    return P


def oracle_u1_3q():
    U = np.eye(1)
    for a, b, c in U1_ANGLES[:3]:
        q = expm(-0.5j * c * _Z) @ expm(-0.5j * b * _Y) @ expm(-0.5j * a * _X)
        U = np.kron(U, q)
    return U


def superoperator_rows(inputs, eps):
    """Row-major vec: vec(U rho U^+) = (U kron conj(U)) vec(rho); reset adds eps * vec(sigma)."""
    U0, U1 = oracle_u0_3q(), oracle_u1_3q()
    S0, S1 = np.kron(U0, U0.conj()), np.kron(U1, U1.conj())
    sigma = np.zeros(64, dtype=complex)
    sigma[0] = 1
    v = sigma.copy()
    zdiag = [np.array([1 - 2 * ((b >> (2 - i)) & 1) for b in range(8)]) for i in range(3)]
    rows = []
    for u in inputs:
        v = (1 - eps) * u * (S0 @ v) + (1 - eps) * (1 - u) * (S1 @ v) + eps * sigma
        diag = v.reshape(8, 8).diagonal().real
        rows.append([diag @ z for z in zdiag])
    return np.array(rows)


def test_shipped_3q_circuits_match_oracle_unitaries(pair3):
    np.testing.assert_allclose(pair3.u0.unitary(), oracle_u0_3q(), atol=1e-15)
    np.testing.assert_allclose(pair3.u1.unitary(), oracle_u1_3q(), atol=1e-12)


@pytest.mark.parametrize("u,eps,expected", [
    (0.3, 0.2, (0.24, 0.56, 0.2)),
    (0.7, 1.0, (0.0, 0.0, 1.0)),
    (1.0, 0.0, (1.0, 0.0, 0.0)),
])
def test_branch_probabilities(u, eps, expected):
    p = branch_probabilities(u, eps)
    assert p == pytest.approx(expected, abs=1e-15)
    assert sum(p) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("u,eps", [(-0.1, 0.5), (1.1, 0.5), (0.5, -0.01), (0.5, 1.01)])
def test_branch_probabilities_out_of_range(u, eps):
    with pytest.raises(ValueError):
        branch_probabilities(u, eps)


def test_config_validation(pair3, pair5):
    with pytest.raises(ConfigurationError):
        make_config(pair3, 1.5)
    with pytest.raises(ConfigurationError):
        make_config(pair3, 0.5, ensemble_size=0)
    with pytest.raises(ConfigurationError):
        make_config(pair3, 0.5, measurement_mode="weak")
    with pytest.raises(ConfigurationError):
        ReservoirConfig(3, 0.5, pair3.u0, pair5.u1)


def test_step_member_full_reset(pair3, rng):
    cfg = make_config(pair3, 1.0)
    s = StateVector.from_amplitudes(random_state_amplitudes(rng, 3))
    out = step_member(s, 0.42, cfg, rng)
    np.testing.assert_array_equal(out.amplitudes, StateVector.zeros(3).amplitudes)


def test_step_member_deterministic_u0(pair3, rng):
    cfg = make_config(pair3, 0.0)
    s = StateVector.from_amplitudes(random_state_amplitudes(rng, 3))
    np.testing.assert_allclose(step_member(s, 1.0, cfg, rng).amplitudes, apply_circuit(s, pair3.u0).amplitudes)


def test_step_member_reproducible(pair3):
    cfg = make_config(pair3, 0.0)

    def run(seed):
        g = np.random.default_rng(seed)
        s, seq = StateVector.zeros(3), []
        for _ in range(50):
            s = step_member(s, 0.5, cfg, g)
            seq.append(s.amplitudes.copy())
        return np.array(seq)

    np.testing.assert_array_equal(run(11), run(11))
    assert not np.array_equal(run(11), run(12))


def test_ensemble_full_reset_rows_are_ones(pair5, rng):
    for mode in ("exact", "shots"):
        cfg = make_config(pair5, 1.0, ensemble_size=20, measurement_mode=mode, shots=50)
        np.testing.assert_array_equal(evolve_ensemble(rng.random(12), cfg), np.ones((12, 5)))


def test_ensemble_equals_member_loop(pair3, rng):
    """Vectorised evolution reproduces step_member driven by each member's own stream."""
    cfg = make_config(pair3, 0.35, ensemble_size=40, master_seed=99)
    u = rng.random(15)
    streams = [rngs.member_stream(99, rngs.BRANCH, m) for m in range(40)]
    states = [StateVector.zeros(3)] * 40
    rows = []
    for uk in u:
        states = [step_member(s, uk, cfg, g) for s, g in zip(states, streams)]
        rows.append(np.mean([expect_z_all(s) for s in states], axis=0))
    np.testing.assert_allclose(evolve_ensemble(u, cfg), np.array(rows), atol=1e-12)


@pytest.mark.parametrize("mode", ["exact", "shots"])
def test_ensemble_determinism(pair3, rng, mode):
    u = rng.random(10)
    cfg = make_config(pair3, 0.4, ensemble_size=64, measurement_mode=mode, shots=200, master_seed=5)
    a, b = evolve_ensemble(u, cfg), evolve_ensemble(u, cfg)
    assert a.tobytes() == b.tobytes()
    other = make_config(pair3, 0.4, ensemble_size=64, measurement_mode=mode, shots=200, master_seed=6)
    assert not np.array_equal(a, evolve_ensemble(u, other))


def test_shot_mode_tracks_exact_mode(pair3, rng):
    u = rng.random(10)
    exact = evolve_ensemble(u, make_config(pair3, 0.3, ensemble_size=200, master_seed=1))
    shots = evolve_ensemble(u, make_config(pair3, 0.3, ensemble_size=200, master_seed=1, measurement_mode="shots", shots=4000))
    # same branch history; only shot noise (<= 1/sqrt(S * N_c) per entry) separates them
    assert np.max(np.abs(exact - shots)) < 5 / np.sqrt(4000 * 200)


def test_table1_configuration_runs(pair5, rng):
    cfg = make_config(pair5, 0.5, ensemble_size=1024, measurement_mode="shots", shots=4000, master_seed=3)
    X = evolve_ensemble(rng.random(60), cfg)
    assert X.shape == (60, 5)
    assert np.all(np.abs(X) <= 1)


def test_invalid_inputs(pair3):
    cfg = make_config(pair3, 0.5, ensemble_size=4)
    for bad in ([], [0.5, 1.2], [-0.1]):
        with pytest.raises(ValueError):
            evolve_ensemble(bad, cfg)


def test_channel_step_full_reset(pair3, rng):
    cfg = make_config(pair3, 1.0)
    out = channel_step(random_density(rng, 3), 0.3, cfg)
    np.testing.assert_array_equal(out.entries, cfg.reset_state.entries)


def test_channel_step_pure_u0_branch(pair3, rng):
    cfg = make_config(pair3, 0.0)
    rho = random_density(rng, 3)
    U0 = oracle_u0_3q()
    np.testing.assert_allclose(channel_step(rho, 1.0, cfg).entries, U0 @ rho.entries @ U0.T, atol=1e-14)


def test_channel_step_single_qubit_by_hand():
    u0 = UnitaryCircuit(1, (GateOp("RX", 0, angle=np.pi / 2),))
    u1 = UnitaryCircuit(1, (GateOp("RZ", 0, angle=np.pi / 3),))
    cfg = ReservoirConfig(1, 0.5, u0, u1)
    # 0.25 * RX(pi/2)|0><0|RX^+ + 0.25 |0><0| + 0.5 |0><0|
    expected = np.array([[0.875, 0.125j], [-0.125j, 0.125]])
    np.testing.assert_allclose(channel_step(DensityMatrix.zeros(1), 0.5, cfg).entries, expected, atol=1e-15)


def test_channel_trace_and_positivity(pair3, rng):
    for _ in range(1000):
        cfg = make_config(pair3, float(rng.random()))
        rho = random_density(rng, 3, rank=int(rng.integers(1, 9)))
        out = channel_step(rho, float(rng.random()), cfg).entries
        assert abs(np.trace(out) - 1) < 1e-10
        assert np.linalg.eigvalsh(out).min() >= -1e-9


def test_channel_linearity(pair3, rng):
    from qesn.reservoir import _channel_step_array

    cfg = make_config(pair3, 0.0)  # affine reset term vanishes, map is linear
    a, b = random_density(rng, 3).entries, random_density(rng, 3).entries
    lhs = _channel_step_array(0.3 * a + 0.7 * b, 0.6, cfg)
    rhs = 0.3 * _channel_step_array(a, 0.6, cfg) + 0.7 * _channel_step_array(b, 0.6, cfg)
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


def test_channel_full_reset_rows(pair5, rng):
    np.testing.assert_array_equal(evolve_channel(rng.random(7), make_config(pair5, 1.0)), np.ones((7, 5)))


def test_channel_unitary_orbit(pair5):
    cfg = make_config(pair5, 0.0)
    rows = evolve_channel(np.ones(6), cfg)
    s = StateVector.zeros(5)
    for k in range(6):
        s = apply_circuit(s, pair5.u0)
        np.testing.assert_allclose(rows[k], expect_z_all(s), atol=1e-12)


@pytest.mark.parametrize("eps", [0.0, 0.4, 0.9])
def test_channel_matches_superoperator_oracle(pair3, rng, eps):
    u = rng.random(25)
    np.testing.assert_allclose(evolve_channel(u, make_config(pair3, eps)), superoperator_rows(u, eps), atol=1e-10)


def test_channel_trace_drift_100_steps(pair5, rng):
    _, states = evolve_channel(rng.random(100), make_config(pair5, 0.2), return_states=True)
    assert max(abs(np.trace(r) - 1) for r in states) < 1e-10


def test_monte_carlo_unbiased(pair3, rng):
    u = rng.random(20)
    cfg = make_config(pair3, 0.3, ensemble_size=5000, master_seed=17)
    mean, se = evolve_ensemble(u, cfg, with_stderr=True)
    exact = evolve_channel(u, cfg)
    z = np.abs(mean - exact) / np.maximum(se, 1e-300)
    assert np.all((z < 5) | (np.abs(mean - exact) < 1e-12))


def test_mixed_reset_state_is_sampled(pair3, rng):
    sigma = DensityMatrix(3, np.diag([0.5, 0, 0, 0.25, 0, 0, 0, 0.25]))
    u = rng.random(8)
    cfg = make_config(pair3, 0.5, ensemble_size=4000, master_seed=2, reset_state=sigma)
    mean, se = evolve_ensemble(u, cfg, with_stderr=True)
    exact = evolve_channel(u, cfg)
    assert np.all(np.abs(mean - exact) < 5 * se + 1e-12)


def test_fading_memory(pair5, rng):
    """Trace distance of histories differing only in u(1) shrinks at least like (1 - eps)^(k-1)."""
    eps = 0.3
    cfg = make_config(pair5, eps)
    u = rng.random(15)
    v = u.copy()
    v[0] = 1 - u[0]
    rows_u, su = evolve_channel(u, cfg, return_states=True)
    rows_v, sv = evolve_channel(v, cfg, return_states=True)
    d1 = np.abs(np.linalg.eigvalsh(su[0] - sv[0])).sum()
    assert d1 > 0
    for k in range(1, 15):
        dk = np.abs(np.linalg.eigvalsh(su[k] - sv[k])).sum()
        bound = (1 - eps) ** k * d1
        assert dk <= bound + 1e-12
        assert np.max(np.abs(rows_u[k] - rows_v[k])) <= bound + 1e-12
