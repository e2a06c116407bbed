import numpy as np
import pytest

import evotomo as et
from evotomo.channels import PAULI_X, PAULI_Y, PAULI_Z, choi_matrix
from evotomo.errors import InvalidOperatorError
from helpers import match_multisets, sample_semigroup


def test_identity_unitary_gives_identity_superoperator():
    T = et.unitary_channel(np.eye(2))
    assert np.abs(T.transfer - np.eye(4)).max() < 1e-14


def test_pauli_cycle_permutes_axes():
    T = et.unitary_channel(et.pauli_cycle_unitary())
    for src, dst in [(PAULI_X, PAULI_Y), (PAULI_Y, PAULI_Z), (PAULI_Z, PAULI_X)]:
        assert np.abs(et.apply(T, src).entries - dst).max() < 1e-12


def test_unitary_transfer_is_orthogonal():
    rng = np.random.default_rng(0)
    T = et.unitary_channel(et.haar_random_unitary(3, rng))
    assert np.abs(T.transfer.T @ T.transfer - np.eye(9)).max() < 1e-10


def test_unitary_channel_rejects_non_unitary():
    with pytest.raises(InvalidOperatorError):
        et.unitary_channel(np.eye(2) * 1.001)


def test_fully_depolarizing_spectrum():
    T = et.depolarizing_mixture(np.eye(2), np.eye(2) / 2, 1.0)
    ev = np.sort(np.abs(np.linalg.eigvals(T.transfer)))[::-1]
    assert abs(ev[0] - 1.0) < 1e-12
    assert ev[1:].max() < 1e-12


def test_depolarizing_lambda_zero_equals_unitary():
    rng = np.random.default_rng(1)
    U = et.haar_random_unitary(3, rng)
    a = et.depolarizing_mixture(U, np.eye(3) / 3, 0.0)
    b = et.unitary_channel(U)
    assert np.abs(a.transfer - b.transfer).max() < 1e-12


def test_depolarizing_half_identity_transfer():
    T = et.depolarizing_mixture(np.eye(2), np.eye(2) / 2, 0.5)
    assert np.abs(T.transfer - np.diag([0.5, 0.5, 0.5, 1.0])).max() < 1e-12


def test_depolarizing_rejects_bad_lambda():
    with pytest.raises(InvalidOperatorError):
        et.depolarizing_mixture(np.eye(2), np.eye(2) / 2, 1.5)


def test_qubit_channel_limits():
    T = et.qubit_dephasing_depolarizing(0.0, 0.0)
    assert np.abs(T.transfer - np.eye(4)).max() < 1e-12
    T = et.qubit_dephasing_depolarizing(1.0, 1.2)
    ev = np.sort(np.abs(np.linalg.eigvals(T.transfer)))
    assert ev[-1] == pytest.approx(1.0, abs=1e-12)
    assert ev[:-1].max() < 1e-12


def test_qubit_channel_spectrum_rotation_times_contraction():
    p, theta = 0.3, np.pi / 2
    T = et.qubit_dephasing_depolarizing(p, theta)
    expected = [1.0, 1 - p, (1 - p) * np.exp(1j * theta), (1 - p) * np.exp(-1j * theta)]
    got = np.linalg.eigvals(T.transfer)
    assert match_multisets(expected, got, 1e-10)


def test_qubit_channel_rejects_out_of_range():
    with pytest.raises(InvalidOperatorError):
        et.qubit_dephasing_depolarizing(-0.1, 1.0)
    with pytest.raises(InvalidOperatorError):
        et.qubit_dephasing_depolarizing(0.5, 4.0)


def test_random_lindblad_annihilates_identity():
    rng = np.random.default_rng(2)
    for d in (2, 3):
        L = et.random_lindblad(d, rng)
        assert np.abs(L.transfer[:, -1]).max() < 1e-12


def test_random_lindblad_exponential_is_cp():
    rng = np.random.default_rng(3)
    for d in (2, 3):
        L = et.random_lindblad(d, rng)
        assert choi_matrix(et.exponentiate(L, 1.0)).min_eigenvalue() > -1e-8


def test_random_lindblad_spectra_nondegenerate_probe():
    rng = np.random.default_rng(4)
    for _ in range(100):
        L = et.random_lindblad(2, rng)
        ev = np.linalg.eigvals(L.transfer.astype(complex))
        gaps = np.abs(ev[:, None] - ev[None, :])[~np.eye(4, dtype=bool)]
        assert gaps.min() > 1e-8


def test_exponentiate_zero_time_is_identity():
    rng = np.random.default_rng(5)
    L = et.random_lindblad(3, rng)
    assert np.abs(et.exponentiate(L, 0.0).transfer - np.eye(9)).max() < 1e-14


def test_exponentiate_semigroup_property():
    rng = np.random.default_rng(6)
    L = et.random_lindblad(2, rng)
    for _ in range(5):
        s, t = rng.uniform(0, 2, size=2)
        lhs = et.exponentiate(L, s + t).transfer
        rhs = et.exponentiate(L, s).transfer @ et.exponentiate(L, t).transfer
        assert np.abs(lhs - rhs).max() < 1e-9


def test_exponentiate_rejects_negative_time():
    rng = np.random.default_rng(7)
    L = et.random_lindblad(2, rng)
    with pytest.raises(InvalidOperatorError):
        et.exponentiate(L, -0.5)


def test_strong_dissipation_approaches_full_depolarizing():
    rng = np.random.default_rng(8)
    L = et.random_lindblad(2, rng, scale=200.0)
    ev = np.sort(np.abs(np.linalg.eigvals(et.exponentiate(L, 1.0).transfer)))
    assert abs(ev[-1] - 1.0) < 1e-10
    assert ev[:-1].max() < 1e-3  # every non-fixed direction decays hard


def test_validate_channel_reports():
    rng = np.random.default_rng(9)
    rep = et.validate_channel(et.unitary_channel(et.haar_random_unitary(2, rng)))
    assert rep == {"unital": True, "cp": True, "trace_dual_preserving": True}

    inflating = et.SuperOperator(dim=2, transfer=np.diag([1.5, 1.0, 1.0, 1.0]))
    assert et.validate_channel(inflating)["cp"] is False

    rep = et.validate_channel(et.exponentiate(et.random_lindblad(3, rng), 1.0))
    assert rep["cp"] is True and rep["unital"] is True


def test_all_constructors_pass_validation():
    rng = np.random.default_rng(10)
    channels = [
        et.unitary_channel(et.haar_random_unitary(3, rng)),
        et.depolarizing_mixture(et.haar_random_unitary(2, rng), np.eye(2) / 2, 0.3),
        et.qubit_dephasing_depolarizing(0.4, 1.0),
    ]
    for T in channels:
        rep = et.validate_channel(T)
        assert rep["unital"] and rep["cp"]
    L = et.random_lindblad(2, rng)
    for t in (0.1, 1.0, 10.0):
        assert et.validate_channel(et.exponentiate(L, t))["cp"]


def test_apply_matches_dense_formula():
    rng = np.random.default_rng(11)
    U = et.haar_random_unitary(3, rng)
    sigma = et.random_density(3, rng)
    lam = 0.35
    T = et.depolarizing_mixture(U, sigma, lam)
    for _ in range(5):
        h = et.random_hermitian(3, rng)
        direct = (1 - lam) * U.conj().T @ h.entries @ U + lam * np.eye(3) * np.trace(
            h.entries @ sigma.entries
        )
        assert np.abs(et.apply(T, h).entries - direct).max() < 1e-12


def test_restrict_traceless_depolarizing_is_zero():
    T = et.depolarizing_mixture(np.eye(2), np.eye(2) / 2, 1.0)
    assert np.abs(et.restrict_traceless(T)).max() < 1e-14


def test_restrict_traceless_rotation_block():
    theta = 0.7
    T = et.qubit_dephasing_depolarizing(0.0, theta)
    block = et.restrict_traceless(T)
    rot = np.array(
        [[np.cos(theta), np.sin(theta), 0.0],
         [-np.sin(theta), np.cos(theta), 0.0],
         [0.0, 0.0, 1.0]]
    )
    # the traceless block is a rotation in the (x, y) plane fixing z
    assert np.abs(np.abs(block) - np.abs(rot)).max() < 1e-12
    assert np.abs(block @ block.T - np.eye(3)).max() < 1e-12


def test_restrict_traceless_spectrum_identity():
    rng = np.random.default_rng(12)
    for d in (2, 3):
        _, T = sample_semigroup(d, rng)
        block = et.restrict_traceless(T)
        full = np.linalg.eigvals(T.transfer.astype(complex))
        small = np.linalg.eigvals(block.astype(complex))
        assert match_multisets(np.append(small, 1.0), full, 1e-8)


def test_restrict_traceless_rejects_non_unital():
    t = np.eye(4)
    t[0, -1] = 0.2
    bad = et.SuperOperator(dim=2, transfer=t, unital=False)
    with pytest.raises(InvalidOperatorError):
        et.restrict_traceless(bad)


def test_duality_pairing():
    rng = np.random.default_rng(13)
    for _ in range(50):
        d = int(rng.integers(2, 4))
        _, T = sample_semigroup(d, rng)
        x = et.random_hermitian(d, rng)
        y = et.random_hermitian(d, rng)
        lhs = np.trace(x.entries @ et.apply(T, y).entries).real
        rhs = np.trace(et.apply(T.dual(), x).entries @ y.entries).real
        assert abs(lhs - rhs) < 1e-10


def test_channel_json_round_trip():
    T = et.qubit_dephasing_depolarizing(0.3, 1.1)
    back = et.SuperOperator.from_dict(T.to_dict())
    assert np.abs(back.transfer - T.transfer).max() < 1e-15
    with pytest.raises(InvalidOperatorError):
        et.SuperOperator.from_dict({"dim": 2, "transfer": T.transfer.tolist(), "basis": "other"})


def test_lindblad_json_round_trip():
    rng = np.random.default_rng(14)
    L = et.random_lindblad(2, rng)
    back = et.LindbladGenerator.from_dict(L.to_dict())
    assert np.abs(back.transfer - L.transfer).max() < 1e-12


def test_choi_of_identity_is_maximally_entangled_projector():
    T = et.unitary_channel(np.eye(2))
    c = choi_matrix(T).entries
    omega = np.zeros(4, dtype=complex)
    omega[0] = omega[3] = 1.0
    assert np.abs(c - np.outer(omega, omega.conj())).max() < 1e-12
