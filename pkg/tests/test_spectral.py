import numpy as np
import pytest

import evotomo as et
from evotomo.errors import InvalidOperatorError
from helpers import match_multisets, sample_semigroup


def test_identity_channel_profile():
    p = et.spectral_profile(et.unitary_channel(np.eye(2)))
    assert p.delta == 1 and p.j0 == 0
    assert np.allclose(p.minpoly, [-1.0, 1.0], atol=1e-12)


def test_fully_depolarizing_profile():
    T = et.depolarizing_mixture(np.eye(2), np.eye(2) / 2, 1.0)
    p = et.spectral_profile(T)
    assert p.delta == 2 and p.j0 == 1
    assert np.allclose(p.minpoly, [0.0, -1.0, 1.0], atol=1e-10)


def test_generic_unitary_d3_has_delta_seven():
    rng = np.random.default_rng(0)
    T = et.unitary_channel(et.haar_random_unitary(3, rng))
    p = et.spectral_profile(T)
    assert p.delta == 7
    assert p.j0 == 0 and not p.distinct


def test_minimal_polynomial_annihilates():
    rng = np.random.default_rng(1)
    channels = [
        et.unitary_channel(et.haar_random_unitary(3, rng)),
        et.qubit_dephasing_depolarizing(0.3, 1.0),
        sample_semigroup(2, rng)[1],
        sample_semigroup(3, rng)[1],
    ]
    for T in channels:
        p = et.spectral_profile(T)
        norm = np.linalg.norm(T.transfer, 2)
        assert p.evaluate(T.transfer) <= 1e-6 * norm**p.delta


def test_minimality_no_shorter_annihilator():
    rng = np.random.default_rng(2)
    _, T = sample_semigroup(2, rng, gap=1e-2)
    p = et.spectral_profile(T)
    powers = [np.linalg.matrix_power(T.transfer, k).reshape(-1) for k in range(p.delta)]
    rows = np.array([v / np.linalg.norm(v) for v in powers])
    s = np.linalg.svd(rows, compute_uv=False)
    assert s[-1] / s[0] > p.tolerance_used


def test_degree_bound_check_matches_lemma_values():
    rng = np.random.default_rng(3)
    for d in (2, 3):
        U = et.haar_random_unitary(d, rng)
        r0 = et.degree_bound_check(U, np.eye(d) / d, 0.0)
        assert r0 == {"delta": d * d - d + 1, "bound": d * d - d + 1, "tight": True}
        r = et.degree_bound_check(U, np.eye(d) / d, 0.4)
        assert r == {"delta": d * d - d + 2, "bound": d * d - d + 2, "tight": True}


def test_qubit_diagonal_unitary_has_delta_three():
    theta = 1.2345
    U = np.diag([1.0, np.exp(1j * theta)])
    r = et.degree_bound_check(U, np.eye(2) / 2, 0.0)
    assert r["delta"] == 3


def test_nondegenerate_cases():
    rng = np.random.default_rng(4)
    assert not et.nondegenerate(et.unitary_channel(np.eye(2)), 1e-8)
    # unitary conjugation always has eigenvalue 1 with multiplicity >= d
    for d in (2, 3):
        T = et.unitary_channel(et.haar_random_unitary(d, rng))
        assert not et.nondegenerate(T, 1e-8)
    hits = sum(
        et.nondegenerate(et.exponentiate(et.random_lindblad(2, rng), 1.0), 1e-8)
        for _ in range(20)
    )
    assert hits == 20


def test_nondegenerate_rejects_bad_gap():
    with pytest.raises(InvalidOperatorError):
        et.nondegenerate(et.unitary_channel(np.eye(2)), 0.0)


def test_traceless_restriction_spectrum_and_degree_relation():
    rng = np.random.default_rng(5)
    channels = [
        et.qubit_dephasing_depolarizing(0.3, 1.0),
        et.unitary_channel(et.haar_random_unitary(3, rng)),
        sample_semigroup(2, rng, gap=1e-2)[1],
        sample_semigroup(3, rng, gap=2e-2)[1],
    ]
    for T in channels:
        full = et.spectral_profile(T)
        block = et.spectral_profile(et.restrict_traceless(T))
        ev_full = np.linalg.eigvals(T.transfer.astype(complex))
        ev_block = np.linalg.eigvals(et.restrict_traceless(T).astype(complex))
        assert match_multisets(np.append(ev_block, 1.0), ev_full, 1e-8)
        assert block.delta <= full.delta <= block.delta + 1


def test_profile_tolerance_validation():
    T = et.unitary_channel(np.eye(2))
    with pytest.raises(InvalidOperatorError):
        et.spectral_profile(T, tol=1e-3)
    with pytest.raises(InvalidOperatorError):
        et.spectral_profile(T, tol=0.0)


def test_profile_accepts_raw_matrix():
    p = et.spectral_profile(np.zeros((3, 3)))
    assert p.delta == 1 and p.j0 == 1
    assert np.allclose(p.minpoly, [0.0, 1.0], atol=1e-14)


def test_distinct_flag_consistency():
    rng = np.random.default_rng(6)
    _, T = sample_semigroup(2, rng, gap=1e-2)
    p = et.spectral_profile(T)
    assert p.distinct and p.delta == 4 and p.j0 in (0, 1)


def test_profile_json_fields():
    p = et.spectral_profile(et.unitary_channel(np.eye(2)))
    d = p.to_dict()
    assert set(d) >= {"eigenvalues", "delta", "j0", "minpoly", "tolerance"}
    assert d["delta"] == 1
    assert all(len(pair) == 2 for pair in d["eigenvalues"])
