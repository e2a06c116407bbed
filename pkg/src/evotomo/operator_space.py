"""Real vectorization of Hermitian matrices and orthonormal operator bases.

Every other module represents operators and maps through the isometry
implemented here: a Hermitian ``d x d`` matrix becomes a real vector of
length ``d**2`` by taking Hilbert-Schmidt inner products with a fixed
orthonormal basis of Hermitian matrices.

Convention: the basis places the identity-proportional element ``I/sqrt(d)``
LAST, so the traceless subspace occupies the leading ``d**2 - 1`` coordinates.
Restricting a map to traceless operators is then just taking the leading
principal block of its transfer matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatchError, InvalidOperatorError

HERMITICITY_RTOL = 1e-12
TRACE_ATOL = 1e-12
POSITIVITY_ATOL = 1e-10
ORTHONORMALITY_ATOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def as_matrix(x) -> np.ndarray:
    """Return the complex matrix behind ``x`` (HermitianOperator or ndarray)."""
    if isinstance(x, HermitianOperator):
        return x.entries
    return np.asarray(x, dtype=complex)


@dataclass(frozen=True)
class HermitianOperator:
    """A self-adjoint complex matrix.

    Hermiticity is checked at construction against ``max|M - M^dag| <=
    1e-12 * max|M|``; violating inputs are rejected rather than symmetrized.
    Instances are immutable and safe to share.
    """

    entries: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidOperatorError(f"expected a square matrix, got shape {m.shape}")
        scale = np.abs(m).max()
        if np.abs(m - m.conj().T).max() > HERMITICITY_RTOL * scale:
            raise InvalidOperatorError("matrix is not hermitian at tolerance 1e-12")
        object.__setattr__(self, "entries", _readonly(m))
        object.__setattr__(self, "dim", m.shape[0])

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def hs_norm(self) -> float:
        """Hilbert-Schmidt (Frobenius) norm."""
        return float(np.linalg.norm(self.entries))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def to_dict(self) -> dict:
        """JSON-ready encoding: {"dim": d, "re": [[..]], "im": [[..]]} row-major."""
        return {
            "dim": self.dim,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HermitianOperator":
        d = int(data["dim"])
        m = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        if m.shape != (d, d):
            raise InvalidOperatorError(f"declared dim {d} does not match matrix shape {m.shape}")
        return cls(m)


@dataclass(frozen=True)
class DensityOperator(HermitianOperator):
    """A HermitianOperator with unit trace and (numerically) nonnegative spectrum."""

    def __post_init__(self):
        super().__post_init__()
        if abs(np.trace(self.entries).real - 1.0) > TRACE_ATOL:
            raise InvalidOperatorError(f"trace {np.trace(self.entries).real!r} is not 1")
        if self.min_eigenvalue() < -POSITIVITY_ATOL:
            raise InvalidOperatorError(
                f"smallest eigenvalue {self.min_eigenvalue():.3e} below -1e-10"
            )


@dataclass(frozen=True)
class OperatorBasis:
    """A Hilbert-Schmidt orthonormal basis of hermitian ``d x d`` matrices.

    ``stack[k]`` is the k-th basis matrix; the last one is ``I/sqrt(d)``.
    """

    dim: int
    stack: np.ndarray

    def __post_init__(self):
        d = self.dim
        stack = np.asarray(self.stack, dtype=complex)
        if stack.shape != (d * d, d, d):
            raise InvalidOperatorError(f"basis stack has shape {stack.shape}, expected {(d*d, d, d)}")
        gram = np.einsum("aij,bji->ab", stack.conj().transpose(0, 2, 1), stack)
        if np.abs(gram - np.eye(d * d)).max() > ORTHONORMALITY_ATOL:
            raise InvalidOperatorError("basis is not HS-orthonormal at tolerance 1e-12")
        if np.abs(stack[-1] - np.eye(d) / np.sqrt(d)).max() > ORTHONORMALITY_ATOL:
            raise InvalidOperatorError("last basis element must be I/sqrt(d)")
        object.__setattr__(self, "stack", _readonly(stack))

    @property
    def elements(self) -> list[HermitianOperator]:
        return [HermitianOperator(m) for m in self.stack]

    @property
    def size(self) -> int:
        return self.dim * self.dim


@lru_cache(maxsize=None)
def standard_basis(d: int) -> OperatorBasis:
    """Generalized Gell-Mann basis, HS-orthonormalized, identity last.

    Ordering: symmetric off-diagonal elements (lexicographic pairs), then
    antisymmetric ones, then the diagonal ladder, then ``I/sqrt(d)``.  For
    ``d = 2`` this is exactly ``(sx, sy, sz, I)/sqrt(2)``.

    Parameters
    ----------
    d : int
        Matrix dimension, at least 2.
    """
    if d < 2:
        raise InvalidOperatorError(f"dimension must be >= 2, got {d}")
    mats = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = 1.0
            m[k, j] = 1.0
            mats.append(m / np.sqrt(2.0))
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1.0j
            m[k, j] = 1.0j
            mats.append(m / np.sqrt(2.0))
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[:l, :l] = np.eye(l)
        m[l, l] = -l
        mats.append(m / np.sqrt(l * (l + 1)))
    mats.append(np.eye(d, dtype=complex) / np.sqrt(d))
    return OperatorBasis(dim=d, stack=np.array(mats))


def _resolve_basis(dim: int, basis: OperatorBasis | None) -> OperatorBasis:
    if basis is None:
        return standard_basis(dim)
    if basis.dim != dim:
        raise DimensionMismatchError(f"basis dim {basis.dim} does not match operator dim {dim}")
    return basis


def vectorize(H, basis: OperatorBasis | None = None) -> np.ndarray:
    """Real coordinate vector of a hermitian operator, length ``d**2``.

    Component ``k`` is ``tr(B_k H)``.  The map is an isometry:
    ``norm(vectorize(H))**2 == tr(H @ H)``.
    """
    m = as_matrix(H)
    basis = _resolve_basis(m.shape[0], basis)
    v = np.einsum("kij,ji->k", basis.stack, m)
    return v.real.copy()


def devectorize(v: np.ndarray, basis: OperatorBasis | None = None) -> HermitianOperator:
    """Inverse of :func:`vectorize`: rebuild the operator ``sum_k v_k B_k``."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatchError(f"expected a vector, got shape {v.shape}")
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size or d < 2:
        raise DimensionMismatchError(
            f"vector length {v.size} is not a perfect square >= 4"
        )
    basis = _resolve_basis(d, basis)
    return HermitianOperator(np.einsum("k,kij->ij", v, basis.stack))


def traceless_project(H) -> HermitianOperator:
    """Orthogonal projection onto the traceless subspace: ``H - I tr(H)/d``."""
    m = as_matrix(H)
    d = m.shape[0]
    return HermitianOperator(m - np.eye(d) * (np.trace(m) / d))


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> HermitianOperator:
    """Hermitian matrix with i.i.d. Gaussian real/imaginary parts, symmetrized."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return HermitianOperator(scale * (g + g.conj().T) / 2.0)

def random_density(d: int, rng: np.random.Generator) -> DensityOperator:
    """Full-rank random density matrix ``G G^dag / tr(G G^dag)`` (Ginibre G)."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real)


def random_pure_state(d: int, rng: np.random.Generator) -> DensityOperator:
    """Rank-one projector onto a Haar-random unit vector."""
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi /= np.linalg.norm(psi)
    return DensityOperator(np.outer(psi, psi.conj()))
