import io

import numpy as np
import pytest

import evotomo as et
from evotomo.channels import PAULI_X, PAULI_Y, PAULI_Z
from evotomo.errors import (
    InsufficientSeedError,
    InvalidOperatorError,
)
from helpers import reldev, sample_semigroup


def test_identity_observable_gives_constant_ones():
    rng = np.random.default_rng(0)
    _, T = sample_semigroup(2, rng)
    rho = et.random_density(2, rng)
    series = et.generate_discrete(rho, np.eye(2), T, 0, 10)
    assert np.abs(series.values - 1.0).max() < 1e-12


def test_cyclic_channel_reads_bloch_components():
    rng = np.random.default_rng(1)
    T = et.unitary_channel(et.pauli_cycle_unitary())
    rho = et.random_density(2, rng)
    series = et.generate_discrete(rho, PAULI_Z, T, t0=1, length=3)
    expected = [np.trace(rho.entries @ s).real for s in (PAULI_X, PAULI_Y, PAULI_Z)]
    assert np.abs(series.values - expected).max() < 1e-12


def test_generation_matches_dense_conjugation_oracle():
    rng = np.random.default_rng(2)
    U = et.haar_random_unitary(3, rng)
    T = et.unitary_channel(U)
    rho = et.random_density(3, rng)
    h0 = et.random_hermitian(3, rng)
    series = et.generate_discrete(rho, h0, T, 0, 12)
    h = h0.entries.copy()
    for k in range(12):
        assert abs(series.values[k] - np.trace(rho.entries @ h).real) < 1e-10
        h = U.conj().T @ h @ U


def test_linear_extension_identity_channel():
    T = et.unitary_channel(np.eye(2))
    profile = et.spectral_profile(T)
    ext = et.build_linear_extension(profile, 0, 1, 10)
    out = ext.extend([0.7])
    assert np.abs(out.values - 0.7).max() < 1e-14


def test_linear_extension_depolarizing_constant_continuation():
    rng = np.random.default_rng(3)
    T = et.depolarizing_mixture(np.eye(2), np.eye(2) / 2, 1.0)
    profile = et.spectral_profile(T)
    assert (profile.delta, profile.j0) == (2, 1)
    rho = et.random_density(2, rng)
    h0 = et.random_hermitian(2, rng)
    seed = et.generate_discrete(rho, h0, T, t0=1, length=1)
    ext = et.build_linear_extension(profile, 1, 1, 20)
    out = ext.extend(seed.values)
    want = et.generate_discrete(rho, h0, T, t0=1, length=20)
    assert out.t0 == 1
    assert reldev(out.values, want.values) < 1e-12


def test_linear_extension_matches_oracle_random_semigroup():
    rng = np.random.default_rng(4)
    _, T = sample_semigroup(2, rng, gap=1e-2)
    profile = et.spectral_profile(T)
    assert profile.delta == 4
    for _ in range(5):
        rho = et.random_density(2, rng)
        h0 = et.random_hermitian(2, rng)
        seed = et.generate_discrete(rho, h0, T, 0, 4)
        ext = et.build_linear_extension(profile, 0, 4, 50)
        out = ext.extend(seed.values)
        want = et.generate_discrete(rho, h0, T, 0, 51)
        assert reldev(out.values, want.values) < 1e-8


def test_backward_extension_and_refusal_below_kappa():
    rng = np.random.default_rng(5)
    T = et.depolarizing_mixture(np.eye(2), np.eye(2) / 2, 1.0)
    profile = et.spectral_profile(T)
    rho = et.random_density(2, rng)
    h0 = et.random_hermitian(2, rng)
    seed = et.generate_discrete(rho, h0, T, t0=3, length=1)
    ext = et.build_linear_extension(profile, 3, 1, 12)
    out = ext.extend(seed.values)
    assert out.t0 == 1  # reaches kappa = j0 = 1, never index 0
    want = et.generate_discrete(rho, h0, T, t0=1, length=12)
    assert reldev(out.values, want.values) < 1e-12


def test_seed_below_threshold_is_refused():
    rng = np.random.default_rng(6)
    _, T = sample_semigroup(2, rng, gap=1e-2)
    profile = et.spectral_profile(T)
    with pytest.raises(InsufficientSeedError) as exc:
        et.build_linear_extension(profile, 0, profile.delta - 1, 30)
    assert exc.value.required == profile.delta


def test_linear_extension_is_state_and_observable_independent():
    rng = np.random.default_rng(7)
    _, T = sample_semigroup(2, rng, gap=1e-2)
    profile = et.spectral_profile(T)
    a = et.build_linear_extension(profile, 0, 4, 30)
    b = et.build_linear_extension(profile, 0, 4, 30)
    assert a.forward.tobytes() == b.forward.tobytes()
    assert (a.backward is None) == (b.backward is None)
    # the operator is genuinely linear: matrix action reproduces extend()
    seed = rng.standard_normal(4)
    assert np.allclose(a.as_matrix() @ seed, a.extend(seed).values, atol=1e-12)


def test_affine_extension_saves_one_seed_point():
    rng = np.random.default_rng(8)
    _, T = sample_semigroup(2, rng, gap=1e-2)
    profile_q = et.spectral_profile(et.restrict_traceless(T))
    assert profile_q.delta == 3
    h0 = et.random_hermitian(2, rng)
    aff = et.build_affine_extension(T, h0, 0, 3, 50)
    for _ in range(5):
        rho = et.random_density(2, rng)
        seed = et.generate_discrete(rho, h0, T, 0, 3)
        out = aff.extend(seed.values)
        want = et.generate_discrete(rho, h0, T, 0, 51)
        assert reldev(out.values, want.values) < 1e-8
    with pytest.raises(InsufficientSeedError):
        et.build_linear_extension(et.spectral_profile(T), 0, 3, 50)


def test_affine_extension_on_reference_state_returns_offsets():
    rng = np.random.default_rng(9)
    _, T = sample_semigroup(2, rng, gap=1e-2)
    h0 = et.random_hermitian(2, rng)
    aff = et.build_affine_extension(T, h0, 0, 3, 20)
    rho0 = np.eye(2) / 2
    seed = et.generate_discrete(rho0, h0, T, 0, 3)
    out = aff.extend(seed.values)
    assert np.abs(out.values - aff.gamma[: len(out.values)]).max() < 1e-10


def test_affine_extension_qubit_rotation_channel():
    rng = np.random.default_rng(10)
    T = et.qubit_dephasing_depolarizing(0.3, 1.0)
    h0 = et.random_hermitian(2, rng)
    aff = et.build_affine_extension(T, h0, 0, 3, 40)
    rho = et.random_density(2, rng)
    seed = et.generate_discrete(rho, h0, T, 0, 3)
    out = aff.extend(seed.values)
    want = et.generate_discrete(rho, h0, T, 0, 41)
    assert reldev(out.values, want.values) < 1e-8


def test_continuous_extension_reproduces_sample_points():
    rng = np.random.default_rng(11)
    L, _ = sample_semigroup(2, rng)
    times = np.array([0.0, 0.5, 1.1, 2.0])
    ext = et.build_continuous_extension(L, times)
    for m, t in enumerate(times):
        beta = ext.weights(float(t))
        unit = np.zeros(4)
        unit[m] = 1.0
        assert np.abs(beta - unit).max() < 1e-8


def test_continuous_extension_matches_exponential_oracle():
    rng = np.random.default_rng(12)
    L, _ = sample_semigroup(2, rng)
    times = [0.0, 0.5, 1.1, 2.0]
    ext = et.build_continuous_extension(L, times)
    rho = et.random_density(2, rng)
    h0 = et.random_hermitian(2, rng)
    seed = np.array(
        [et.generate_discrete(rho, h0, et.exponentiate(L, t), 0, 1).values[0] for t in times]
    )
    grid = np.arange(0.0, 5.0, 0.1)
    out = ext.extend(seed, grid)
    want = np.array(
        [et.generate_discrete(rho, h0, et.exponentiate(L, t), 0, 1).values[0] for t in grid]
    )
    assert reldev(out.values, want) < 1e-6


def test_continuous_matches_discrete_at_integer_times():
    rng = np.random.default_rng(13)
    L, T1 = sample_semigroup(2, rng)
    times = [0.0, 0.4, 1.3, 2.2]
    ext = et.build_continuous_extension(L, times)
    rho = et.random_density(2, rng)
    h0 = et.random_hermitian(2, rng)
    seed = np.array(
        [et.generate_discrete(rho, h0, et.exponentiate(L, t), 0, 1).values[0] for t in times]
    )
    grid = np.arange(0.0, 8.0)
    out = ext.extend(seed, grid)
    discrete = et.generate_discrete(rho, h0, T1, 0, 8)
    assert np.abs(out.values - discrete.values).max() < 1e-7


def test_real_spectrum_generators_always_invertible_sampling():
    # hermitian-Kraus dissipators are self-adjoint in the HS sense, so the
    # spectrum is real; the sample-time matrix must then always be invertible
    rng = np.random.default_rng(14)
    basis = et.standard_basis(2)
    for _ in range(10):
        P = np.diag(rng.uniform(0.2, 1.0, size=3))
        L = et.build_lindblad(2, P, np.zeros(3))
        ev = np.linalg.eigvals(L.transfer.astype(complex))
        assert np.abs(ev.imag).max() < 1e-10
        if not et.nondegenerate(L.transfer, 1e-8):
            continue
        times = np.sort(rng.uniform(0.0, 3.0, size=4))
        ext = et.build_continuous_extension(L, times)
        assert ext.condition_number < 1e12


def test_continuous_extension_rejects_bad_inputs():
    rng = np.random.default_rng(15)
    L, _ = sample_semigroup(2, rng)
    with pytest.raises(InvalidOperatorError):
        et.build_continuous_extension(L, [0.0, 0.5, 0.5, 2.0])
    with pytest.raises(Exception):
        et.build_continuous_extension(L, [0.0, 0.5, 1.0])  # wrong count


def test_series_subspace_rank_bounds():
    rng = np.random.default_rng(16)
    T = et.unitary_channel(np.eye(2))
    assert et.series_subspace_rank(T, 10, 5, rng) == 1

    T3 = et.unitary_channel(et.haar_random_unitary(3, rng))
    assert et.series_subspace_rank(T3, 40, 12, rng) == 7

    _, T2 = sample_semigroup(2, rng, gap=1e-2)
    assert et.series_subspace_rank(T2, 20, 8, rng) == 4


def test_series_subspace_rank_window_check():
    rng = np.random.default_rng(17)
    _, T = sample_semigroup(2, rng)
    with pytest.raises(InvalidOperatorError):
        et.series_subspace_rank(T, 10, 3, rng)


def test_time_series_validation_and_csv_round_trip():
    with pytest.raises(InvalidOperatorError):
        et.TimeSeries(mode="discrete", values=[1.0, np.inf])
    with pytest.raises(InvalidOperatorError):
        et.TimeSeries(mode="continuous", values=[1.0, 2.0], times=[0.5, 0.5])

    s = et.TimeSeries(mode="discrete", values=[1.0, -0.25, 3.5], t0=2)
    buf = io.StringIO(s.to_csv_text())
    back = et.TimeSeries.from_csv(buf)
    assert back.mode == "discrete" and back.t0 == 2
    assert np.array_equal(back.values, s.values)

    c = et.TimeSeries(mode="continuous", values=[1.0, 2.0], times=[0.1, 0.7])
    back = et.TimeSeries.from_csv(io.StringIO(c.to_csv_text()))
    assert back.mode == "continuous"
    assert np.allclose(back.times, [0.1, 0.7])

    with pytest.raises(InvalidOperatorError):
        et.TimeSeries.from_csv(io.StringIO("a,b\n1,2\n"))
