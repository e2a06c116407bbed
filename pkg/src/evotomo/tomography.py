"""Measurement maps from evolved probes: reconstruction and no-go certificates.

Two map kinds are built from a channel and a probe:

* state side ("alpha"): row ``i`` is the evolved observable ``T^i(H0)``;
  applied to a state it yields the expectation series.  Inversion runs on
  the traceless coordinates with the maximally mixed state as the affine
  reference, so unit trace is automatic.
* observable side ("beta"): row ``i`` is the dual-evolved reference state
  ``(T*)^i(rho0)``; applied to an observable it yields the same series read
  the other way around.

Injectivity is decided by the singular spectrum of the relevant row matrix;
the smallest singular value is the inverse of the reconstruction's best
Lipschitz constant, and a vanishing one is a no-go certificate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .channels import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    LindbladGenerator,
    SuperOperator,
    exponentiate,
    qubit_dephasing_depolarizing,
)
from .errors import (
    DegenerateProbeError,
    DimensionMismatchError,
    InvalidOperatorError,
    RankDeficientError,
)
from .operator_space import (
    POSITIVITY_ATOL,
    DensityOperator,
    HermitianOperator,
    as_matrix,
    devectorize,
    standard_basis,
    vectorize,
)

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-9
PROBE_ATOL = 1e-10

ALPHA = "state_map_alpha"
BETA = "observable_map_beta"


@dataclass(frozen=True)
class MeasurementMap:
    """Stack of vectorized evolved probes; one row per time index."""

    kind: str
    dim: int
    rows: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        if self.kind not in (ALPHA, BETA):
            raise InvalidOperatorError(f"unknown map kind {self.kind!r}")
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != self.dim * self.dim:
            raise DimensionMismatchError(f"rows shape {rows.shape} vs dim {self.dim}")
        rows.setflags(write=False)
        times = np.asarray(self.times)
        times.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "times", times)

    @property
    def ambient_dim(self) -> int:
        """Dimension of the space the map must resolve to be injective."""
        n = self.dim * self.dim
        return n - 1 if self.kind == ALPHA else n

    def effective_matrix(self) -> np.ndarray:
        """Row matrix restricted to the coordinates relevant for injectivity."""
        return self.rows[:, :-1] if self.kind == ALPHA else self.rows

    def offset(self) -> np.ndarray:
        """Map values on the maximally mixed state (alpha kind only)."""
        return self.rows[:, -1] / np.sqrt(self.dim)

    def evaluate(self, operator) -> np.ndarray:
        """Apply the map to a hermitian operator."""
        return self.rows @ vectorize(as_matrix(operator))


@dataclass(frozen=True)
class InjectivityCertificate:
    """SVD summary of a measurement map with an injective/rank-deficient verdict."""

    kind: str
    sigma_min: float
    sigma_max: float
    rank: int
    ambient: int
    verdict: str
    singular_values: np.ndarray
    tolerance: float

    @property
    def injective(self) -> bool:
        return self.verdict == "injective"

    @property
    def lipschitz_inverse(self) -> float | None:
        return 1.0 / self.sigma_min if self.injective else None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rank": self.rank,
            "ambient": self.ambient,
            "sigma_min": self.sigma_min,
            "sigma_max": self.sigma_max,
            "verdict": self.verdict,
            "singular_values": self.singular_values.tolist(),
            "tolerance": self.tolerance,
        }


def build_alpha(T: SuperOperator, H0, t0: int, t1: int) -> MeasurementMap:
    """Map sending states to ``(tr(rho T^i(H0)))`` for ``i = t0..t1``.

    The probe must have a nonvanishing traceless part; otherwise the map is
    constant on unit-trace states and carries no information.
    """
    if not 0 <= t0 <= t1:
        raise InvalidOperatorError(f"need 0 <= t0 <= t1, got {(t0, t1)}")
    h = as_matrix(H0)
    if h.shape[0] != T.dim:
        raise DimensionMismatchError("probe dimension does not match channel")
    hv = vectorize(h)
    if np.linalg.norm(hv[:-1]) <= PROBE_ATOL:
        raise DegenerateProbeError(
            "observable probe is proportional to the identity; the state map is constant"
        )
    rows = []
    for _ in range(t0):
        hv = T.transfer @ hv
    for _ in range(t0, t1 + 1):
        rows.append(hv.copy())
        hv = T.transfer @ hv
    return MeasurementMap(kind=ALPHA, dim=T.dim, rows=np.array(rows),
                          times=np.arange(t0, t1 + 1))


def build_beta(T: SuperOperator, rho0, t0: int, t1: int) -> MeasurementMap:
    """Map sending observables to ``(tr(rho0 T^i(H)))`` for ``i = t0..t1``.

    The reference state must have nonzero trace; a traceless reference is
    blind to the identity component of the observable.
    """
    if not 0 <= t0 <= t1:
        raise InvalidOperatorError(f"need 0 <= t0 <= t1, got {(t0, t1)}")
    r = as_matrix(rho0)
    if r.shape[0] != T.dim:
        raise DimensionMismatchError("reference state dimension does not match channel")
    rv = vectorize(r)
    if abs(np.trace(r).real) <= PROBE_ATOL * max(1.0, float(np.linalg.norm(rv))):
        raise DegenerateProbeError(
            "reference state is traceless; the observable map misses the identity component"
        )
    dual = T.transfer.T
    rows = []
    for _ in range(t0):
        rv = dual @ rv
    for _ in range(t0, t1 + 1):
        rows.append(rv.copy())
        rv = dual @ rv
    return MeasurementMap(kind=BETA, dim=T.dim, rows=np.array(rows),
                          times=np.arange(t0, t1 + 1))


def continuous_maps(L: LindbladGenerator, probe, times, kind: str) -> MeasurementMap:
    """Measurement map rows taken at arbitrary distinct real times of a semigroup."""
    times = np.asarray(times, dtype=float)
    if len(np.unique(times)) != len(times):
        raise InvalidOperatorError("sample times must be distinct")
    p = as_matrix(probe)
    pv = vectorize(p)
    if kind == ALPHA:
        if np.linalg.norm(pv[:-1]) <= PROBE_ATOL:
            raise DegenerateProbeError("observable probe is proportional to the identity")
    elif kind == BETA:
        if abs(np.trace(p).real) <= PROBE_ATOL * max(1.0, float(np.linalg.norm(pv))):
            raise DegenerateProbeError("reference state is traceless")
    else:
        raise InvalidOperatorError(f"unknown map kind {kind!r}")
    rows = []
    for t in times:
        transfer = exponentiate(L, float(t)).transfer
        rows.append((transfer if kind == ALPHA else transfer.T) @ pv)
    return MeasurementMap(kind=kind, dim=L.dim, rows=np.array(rows), times=times)


def certify(measurement_map: MeasurementMap, tol: float = RANK_RTOL) -> InjectivityCertificate:
    """Singular-value certificate; injective iff the numerical rank fills the
    ambient space.  The full singular spectrum is kept for audit."""
    eff = measurement_map.effective_matrix()
    s = np.linalg.svd(eff, compute_uv=False)
    ambient = measurement_map.ambient_dim
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    if eff.shape[0] >= ambient:
        sigma_min = float(s[ambient - 1])
    else:
        sigma_min = 0.0
    verdict = "injective" if rank == ambient else "rank_deficient"
    return InjectivityCertificate(
        kind=measurement_map.kind,
        sigma_min=sigma_min,
        sigma_max=float(s[0]) if s.size else 0.0,
        rank=rank,
        ambient=ambient,
        verdict=verdict,
        singular_values=s,
        tolerance=tol,
    )


def reconstruct_state(measurement_map: MeasurementMap, data, tol: float = RANK_RTOL):
    """Invert an injective state map on exact or least-squares data.

    Returns the unit-trace hermitian solution anchored at the maximally
    mixed state; positivity is reported, never enforced (a DensityOperator
    is returned when the spectrum allows it, a plain HermitianOperator
    otherwise).
    """
    if measurement_map.kind != ALPHA:
        raise InvalidOperatorError("state reconstruction needs a state-side map")
    data = np.asarray(data, dtype=float)
    if data.shape != (measurement_map.rows.shape[0],):
        raise DimensionMismatchError(
            f"data length {data.shape} vs {measurement_map.rows.shape[0]} rows"
        )
    cert = certify(measurement_map, tol)
    if not cert.injective:
        raise RankDeficientError(
            f"state map is rank deficient ({cert.rank} < {cert.ambient})", cert
        )
    y = data - measurement_map.offset()
    x, *_ = np.linalg.lstsq(measurement_map.effective_matrix(), y, rcond=None)
    d = measurement_map.dim
    full = np.append(x, 1.0 / np.sqrt(d))
    op = devectorize(full)
    if op.min_eigenvalue() >= -POSITIVITY_ATOL:
        return DensityOperator(op.entries)
    logger.debug(
        "reconstructed state has negative eigenvalue %.3e; returning it unprojected",
        op.min_eigenvalue(),
    )
    return op


def reconstruct_observable(measurement_map: MeasurementMap, data, tol: float = RANK_RTOL):
    """Invert an injective observable map (least squares on all coordinates)."""
    if measurement_map.kind != BETA:
        raise InvalidOperatorError("observable reconstruction needs an observable-side map")
    data = np.asarray(data, dtype=float)
    if data.shape != (measurement_map.rows.shape[0],):
        raise DimensionMismatchError(
            f"data length {data.shape} vs {measurement_map.rows.shape[0]} rows"
        )
    cert = certify(measurement_map, tol)
    if not cert.injective:
        raise RankDeficientError(
            f"observable map is rank deficient ({cert.rank} < {cert.ambient})", cert
        )
    x, *_ = np.linalg.lstsq(measurement_map.rows, data, rcond=None)
    return devectorize(x)


def takens_probe(
    T: SuperOperator,
    H0,
    m: int,
    state_sampler,
    pairs: int,
    rng: np.random.Generator,
    collision_tol: float = 1e-8,
) -> dict:
    """Empirical discrimination probe on a restricted state set.

    Samples ``pairs`` state pairs from ``state_sampler(rng)`` and reports the
    minimum of ``|map(r1) - map(r2)| / |r1 - r2|`` over the window
    ``i = 1..m``, plus the count of near-collisions below ``collision_tol``.
    This measures empirical distinguishability only; it proves nothing about
    inverses or their moduli of continuity.
    """
    if m < 1 or pairs < 1:
        raise InvalidOperatorError("need m >= 1 and pairs >= 1")
    mapping = build_alpha(T, H0, 1, m)
    min_ratio = np.inf
    collisions = 0
    for _ in range(pairs):
        r1 = vectorize(as_matrix(state_sampler(rng)))
        r2 = vectorize(as_matrix(state_sampler(rng)))
        diff = r1 - r2
        denom = float(np.linalg.norm(diff))
        if denom < 1e-14:
            continue
        ratio = float(np.linalg.norm(mapping.rows @ diff)) / denom
        min_ratio = min(min_ratio, ratio)
        if ratio < collision_tol:
            collisions += 1
    return {"min_ratio": float(min_ratio), "collisions": collisions}


def balanced_axis_state() -> DensityOperator:
    """Pure qubit state with equal overlap with the +1 eigenstates of all
    three Pauli axes: ``psi ~ (2 + sqrt(2), 1 + i)``."""
    psi = np.array([2.0 + np.sqrt(2.0), 1.0 + 1.0j], dtype=complex)
    psi /= np.linalg.norm(psi)
    return DensityOperator(np.outer(psi, psi.conj()))


def qubit_landscape(grid_p, grid_theta) -> np.ndarray:
    """Least singular value of the 4-point observable map of the qubit
    rotation/depolarizing channel, over a (noise, angle) grid.

    Each cell is computed independently and deterministically, so the scan
    parallelizes trivially and reruns are bit-identical.
    """
    grid_p = np.asarray(grid_p, dtype=float)
    grid_theta = np.asarray(grid_theta, dtype=float)
    if grid_p.size == 0 or grid_theta.size == 0:
        raise InvalidOperatorError("grids must be nonempty")
    if grid_p.min() < 0 or grid_p.max() > 1 or grid_theta.min() < 0 or grid_theta.max() > np.pi:
        raise InvalidOperatorError("grids must lie in [0,1] x [0,pi]")
    rho0 = balanced_axis_state()
    out = np.empty((grid_p.size, grid_theta.size))
    for i, p in enumerate(grid_p):
        for j, th in enumerate(grid_theta):
            channel = qubit_dephasing_depolarizing(float(p), float(th))
            mapping = build_beta(channel, rho0, 0, 3)
            s = np.linalg.svd(mapping.rows, compute_uv=False)
            out[i, j] = s[-1]
    return out


def tetrahedral_sic_states() -> list[DensityOperator]:
    """The four tetrahedral qubit states (even sign products on the axes)."""
    states = []
    for signs in [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]:
        bloch = np.array(signs, dtype=float) / np.sqrt(3.0)
        m = (np.eye(2) + bloch[0] * PAULI_X + bloch[1] * PAULI_Y + bloch[2] * PAULI_Z) / 2.0
        states.append(DensityOperator(m))
    return states


def reference_constants(d: int, include_sic: bool | None = None) -> dict:
    """Stability reference points for non-evolved measurement families.

    For a Hilbert-Schmidt orthogonal observable set with ``tr(H_i H_j) =
    d * delta_ij`` the state map satisfies ``|inverse|**2 == 1/d``.  For
    ``d = 2`` the tetrahedral state family gives the observable-map value
    ``(d+1)/d`` with Gram spectrum ``{d, d/(d+1)}``.  All values are
    computed from the actual matrices, not hard-coded.
    """
    if include_sic is None:
        include_sic = d == 2
    if include_sic and d != 2:
        raise InvalidOperatorError("the tetrahedral reference is only built for d=2")
    basis = standard_basis(d)
    rows = np.array([vectorize(np.sqrt(d) * b) for b in basis.stack[: d * d - 1]])
    mapping = MeasurementMap(kind=ALPHA, dim=d, rows=rows, times=np.arange(d * d - 1))
    cert = certify(mapping)
    result = {"pauli_alpha_invnorm_sq": 1.0 / cert.sigma_min**2}
    if include_sic:
        srows = np.array([vectorize(s.entries) for s in tetrahedral_sic_states()])
        gram = srows @ srows.T
        eigs = np.linalg.eigvalsh(gram)
        result["sic_beta_invnorm_sq"] = 1.0 / float(eigs[0])
        result["sic_gram_eigenvalues"] = eigs.tolist()
    return result
