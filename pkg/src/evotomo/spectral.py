"""Spectral quantities that control series extension and no-go certificates.

For a map with transfer matrix ``M`` this module computes the eigenvalues,
the degree ``delta`` of the minimal polynomial, the size ``j0`` of the
largest Jordan block at eigenvalue zero, and the monic minimal-polynomial
coefficients.

``delta`` is found basis-free from the Krylov stack of flattened powers
``I, M, M**2, ...``: it is the first length at which the stack becomes
numerically rank-deficient.  Eigenvalue clustering is used only to decide
the zero cluster for ``j0`` (refined by rank stabilization of powers);
no Jordan form is ever computed.  Borderline decisions are flagged as
ambiguous instead of silently guessed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import SuperOperator, depolarizing_mixture
from .errors import EvotomoError, InvalidOperatorError
from .operator_space import DensityOperator, as_matrix

DEFAULT_TOL = 1e-8
AMBIGUITY_BAND = 10.0


@dataclass(frozen=True)
class SpectralProfile:
    """Spectral summary of a square matrix (usually a transfer matrix).

    ``minpoly`` holds monic coefficients in ascending order: ``minpoly[k]``
    multiplies ``x**k`` and ``minpoly[delta] == 1``.
    """

    eigenvalues: np.ndarray
    delta: int
    j0: int
    minpoly: np.ndarray
    distinct: bool
    tolerance_used: float
    delta_ambiguous: bool = False
    j0_ambiguous: bool = False

    def __post_init__(self):
        n = len(self.eigenvalues)
        if not 1 <= self.delta <= n:
            raise InvalidOperatorError(f"delta {self.delta} outside [1, {n}]")
        if not 0 <= self.j0 <= self.delta:
            raise InvalidOperatorError(f"j0 {self.j0} outside [0, delta]")
        if self.distinct and (self.delta != n or self.j0 not in (0, 1)):
            raise InvalidOperatorError("distinct spectrum contradicts delta/j0")
        ev = np.asarray(self.eigenvalues, dtype=complex)
        ev.setflags(write=False)
        mp = np.asarray(self.minpoly, dtype=complex)
        mp.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "minpoly", mp)

    def evaluate(self, M: np.ndarray) -> float:
        """Spectral norm of the minimal polynomial evaluated at ``M``."""
        M = np.asarray(M, dtype=complex)
        acc = np.zeros_like(M)
        power = np.eye(M.shape[0], dtype=complex)
        for c in self.minpoly:
            acc = acc + c * power
            power = power @ M
        return float(np.linalg.norm(acc, 2))

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "delta": self.delta,
            "j0": self.j0,
            "minpoly": [[z.real, z.imag] for z in self.minpoly],
            "tolerance": self.tolerance_used,
            "distinct": self.distinct,
            "delta_ambiguous": self.delta_ambiguous,
            "j0_ambiguous": self.j0_ambiguous,
        }


def _numerical_rank(M: np.ndarray, rel_tol: float) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def _zero_block_size(powers: list[np.ndarray], eigenvalues: np.ndarray,
                     norm: float, tol: float) -> int:
    """Largest Jordan block at the zero cluster via rank stabilization.

    The stabilized rank of ``M**k`` is ``n - (zero-cluster multiplicity)``;
    the block size is the first power reaching that floor.  Anchoring on the
    floor (instead of consecutive-rank equality) keeps small-but-nonzero
    eigenvalues from inflating the answer.
    """
    n = powers[0].shape[0]
    zero_count = int(np.sum(np.abs(eigenvalues) < tol * max(norm, 1.0)))
    if zero_count == 0:
        return 0
    for k in range(1, len(powers)):
        if _numerical_rank(powers[k], tol) <= n - zero_count:
            return k
    return len(powers) - 1


def spectral_profile(T, tol: float = DEFAULT_TOL) -> SpectralProfile:
    """Compute the spectral profile of a SuperOperator or a raw square matrix.

    Parameters
    ----------
    T : SuperOperator or (n, n) ndarray
    tol : float
        Relative tolerance in ``(0, 1e-4]`` for the rank decisions.  The
        minimal-polynomial degree shifts discontinuously near spectral
        degeneracies, so borderline inputs may need a different value;
        ambiguity at the current one is reported through the flags.
    """
    if not 0.0 < tol <= 1e-4:
        raise InvalidOperatorError(f"tolerance {tol} outside (0, 1e-4]")
    M = T.transfer if isinstance(T, SuperOperator) else np.asarray(T)
    M = M.astype(complex)
    n = M.shape[0]
    if M.shape != (n, n):
        raise InvalidOperatorError(f"expected a square matrix, got {M.shape}")

    norm = float(np.linalg.norm(M, 2))
    eigenvalues = np.linalg.eigvals(M)
    order = np.lexsort((eigenvalues.imag, -eigenvalues.real))
    eigenvalues = eigenvalues[order]

    powers = [np.eye(n, dtype=complex)]
    for _ in range(n):
        powers.append(powers[-1] @ M)

    flat = np.array([p.reshape(-1) for p in powers])
    row_norms = np.linalg.norm(flat, axis=1)
    unit_rows = np.where(row_norms[:, None] > 0.0, flat / np.maximum(row_norms, 1e-300)[:, None], flat)

    delta = None
    ratios = []
    for t in range(1, n + 1):
        s = np.linalg.svd(unit_rows[: t + 1], compute_uv=False)
        ratios.append(s[-1] / s[0])
        if ratios[-1] < tol:
            delta = t
            break
    if delta is None:
        # Cayley-Hamilton guarantees dependence at n; treat the full stack as such.
        delta = n
        delta_ambiguous = True
    else:
        decisive = ratios[-1] <= tol / AMBIGUITY_BAND
        clean_run = all(r >= tol * AMBIGUITY_BAND for r in ratios[:-1])
        delta_ambiguous = not (decisive and clean_run)

    coeff, *_ = np.linalg.lstsq(flat[:delta].T, flat[delta], rcond=None)
    minpoly = np.concatenate([-coeff, [1.0 + 0.0j]])

    j0 = _zero_block_size(powers, eigenvalues, norm, tol)
    j0_loose = _zero_block_size(powers, eigenvalues, norm, tol * AMBIGUITY_BAND)
    in_band = np.any(
        (np.abs(eigenvalues) >= tol * max(norm, 1.0))
        & (np.abs(eigenvalues) < AMBIGUITY_BAND * tol * max(norm, 1.0))
    )
    j0_ambiguous = (j0 != j0_loose) or bool(in_band)

    gaps_ok = _pairwise_gaps_exceed(eigenvalues, tol * max(norm, 1.0))
    distinct = bool(gaps_ok and delta == n)
    if gaps_ok and delta != n:
        delta_ambiguous = True

    return SpectralProfile(
        eigenvalues=eigenvalues,
        delta=delta,
        j0=j0,
        minpoly=minpoly,
        distinct=distinct,
        tolerance_used=tol,
        delta_ambiguous=delta_ambiguous,
        j0_ambiguous=j0_ambiguous,
    )


def _pairwise_gaps_exceed(eigenvalues: np.ndarray, gap: float) -> bool:
    diff = eigenvalues[:, None] - eigenvalues[None, :]
    off = np.abs(diff[~np.eye(len(eigenvalues), dtype=bool)])
    return bool(off.min() > gap) if off.size else True


def nondegenerate(T, gap_tol: float) -> bool:
    """True iff all pairwise eigenvalue gaps of the transfer matrix exceed gap_tol."""
    if gap_tol <= 0:
        raise InvalidOperatorError(f"gap tolerance must be positive, got {gap_tol}")
    M = T.transfer if isinstance(T, SuperOperator) else np.asarray(T)
    return _pairwise_gaps_exceed(np.linalg.eigvals(M.astype(complex)), gap_tol)


def degree_bound_check(U: np.ndarray, sigma, lam: float, tol: float = DEFAULT_TOL) -> dict:
    """Measure delta of a unitary/depolarizing mixture against its degree bound.

    The bound is ``d**2 - d + 2`` for a strictly positive mixing weight and
    one less in the purely unitary case.
    """
    U = np.asarray(U, dtype=complex)
    d = U.shape[0]
    if not isinstance(sigma, DensityOperator):
        sigma = DensityOperator(as_matrix(sigma))
    T = depolarizing_mixture(U, sigma, lam)
    profile = spectral_profile(T, tol)
    bound = d * d - d + 2 - (1 if lam == 0.0 else 0)
    if profile.delta > bound:
        raise EvotomoError(
            f"measured delta {profile.delta} exceeds the bound {bound}"
        )
    return {"delta": profile.delta, "bound": bound, "tight": profile.delta == bound}
