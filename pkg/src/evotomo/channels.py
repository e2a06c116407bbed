"""Unital quantum channels and Lindblad generators as real transfer matrices.

Heisenberg-picture convention throughout: a channel acts on observables,
``H -> T(H)``.  The dual action on states is given by the transposed
transfer matrix.  Sticking to one convention (and exposing the dual
explicitly) avoids the classic adjoint bug.

A map is stored as its real ``d**2 x d**2`` transfer matrix in the
identity-last basis of :mod:`evotomo.operator_space`; unitality then reads
as "last column equals (0, ..., 0, 1)".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import DimensionMismatchError, InvalidOperatorError
from .operator_space import (
    DensityOperator,
    HermitianOperator,
    OperatorBasis,
    as_matrix,
    devectorize,
    standard_basis,
    vectorize,
)

UNITAL_ATOL = 1e-10
UNITARY_ATOL = 1e-10
CP_CHOI_ATOL = 1e-8
GENERATOR_UNITAL_ATOL = 1e-12
CP_PROBE_TIMES = (0.1, 1.0, 10.0)

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _is_unital(transfer: np.ndarray, atol: float = UNITAL_ATOL) -> bool:
    n = transfer.shape[0]
    e_last = np.zeros(n)
    e_last[-1] = 1.0
    return bool(np.abs(transfer[:, -1] - e_last).max() <= atol)


@dataclass(frozen=True)
class SuperOperator:
    """A hermiticity-preserving linear map on ``d x d`` hermitian matrices.

    Parameters
    ----------
    dim : int
        Hilbert-space dimension d.
    transfer : (d**2, d**2) real ndarray
        Matrix of the map in the standard identity-last basis.
    unital : bool
        Whether the map fixes the identity.  If set, the last transfer
        column must equal ``(0, ..., 0, 1)`` within 1e-10.
    completely_positive : bool or None
        Tri-state CP flag; ``None`` means "not checked".  Use
        :func:`validate_channel` to decide it.
    """

    dim: int
    transfer: np.ndarray
    unital: bool = True
    completely_positive: bool | None = None

    def __post_init__(self):
        t = np.asarray(self.transfer, dtype=float)
        n = self.dim * self.dim
        if t.shape != (n, n):
            raise DimensionMismatchError(f"transfer shape {t.shape}, expected {(n, n)}")
        if self.unital and not _is_unital(t):
            raise InvalidOperatorError("unital flag set but identity is not fixed")
        object.__setattr__(self, "transfer", _readonly(t))

    def dual(self) -> "SuperOperator":
        """Hilbert-Schmidt dual (state-side action); transfer is transposed."""
        t = self.transfer.T
        return SuperOperator(
            dim=self.dim,
            transfer=t,
            unital=_is_unital(t),
            completely_positive=self.completely_positive,
        )

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "transfer": self.transfer.tolist(),
            "basis": "gellmann-identity-last",
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SuperOperator":
        if data.get("basis") != "gellmann-identity-last":
            raise InvalidOperatorError(f"unsupported basis tag {data.get('basis')!r}")
        t = np.asarray(data["transfer"], dtype=float)
        return cls(dim=int(data["dim"]), transfer=t, unital=_is_unital(t))


@dataclass(frozen=True)
class ChoiMatrix:
    """Choi matrix of a map, hermitian for hermiticity-preserving maps."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        n = self.dim * self.dim
        if m.shape != (n, n):
            raise DimensionMismatchError(f"Choi shape {m.shape}, expected {(n, n)}")
        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.conj().T).max() > 1e-12 * scale:
            raise InvalidOperatorError("Choi matrix is not hermitian")
        object.__setattr__(self, "entries", _readonly(m))

    def min_eigenvalue(self) -> float:
        h = (self.entries + self.entries.conj().T) / 2.0
        return float(np.linalg.eigvalsh(h)[0])


def transfer_from_map(fn, d: int, basis: OperatorBasis | None = None) -> np.ndarray:
    """Transfer matrix of a hermitian-to-hermitian map given as a callable."""
    basis = standard_basis(d) if basis is None else basis
    cols = [vectorize(fn(b), basis) for b in basis.stack]
    return np.column_stack(cols)


def choi_matrix(T: SuperOperator) -> ChoiMatrix:
    """Choi matrix (unnormalized maximally entangled reference) of a map.

    Positivity of this matrix is equivalent to complete positivity of the
    map, in either picture.
    """
    d = T.dim
    w = standard_basis(d).stack.reshape(d * d, d * d)  # rows: row-major basis mats
    s = w.T @ T.transfer @ w.conj()
    c = s.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    c = (c + c.conj().T) / 2.0
    return ChoiMatrix(dim=d, entries=c)


def validate_channel(T: SuperOperator) -> dict:
    """Report unitality, complete positivity, and trace preservation of the dual.

    CP is decided by the smallest Choi eigenvalue with tolerance -1e-8.  In
    this representation the unitality and dual-trace-preservation tests
    coincide (both read off the last transfer column); both keys are kept
    for auditability.
    """
    unital = _is_unital(T.transfer)
    d = T.dim
    e_last = np.zeros(d * d)
    e_last[-1] = 1.0
    dual_traces = np.sqrt(d) * T.transfer[:, -1]
    ref_traces = np.sqrt(d) * e_last
    trace_dual = bool(np.abs(dual_traces - ref_traces).max() <= UNITAL_ATOL * np.sqrt(d))
    cp = choi_matrix(T).min_eigenvalue() >= -CP_CHOI_ATOL
    return {"unital": unital, "cp": bool(cp), "trace_dual_preserving": trace_dual}


def apply(T: SuperOperator, H) -> HermitianOperator:
    """Evaluate ``T(H)`` through the transfer matrix."""
    m = as_matrix(H)
    if m.shape[0] != T.dim:
        raise DimensionMismatchError(f"operator dim {m.shape[0]} vs channel dim {T.dim}")
    return devectorize(T.transfer @ vectorize(m))


def restrict_traceless(T: SuperOperator) -> np.ndarray:
    """Leading principal block of the transfer matrix: the map compressed to
    the traceless subspace.  Its spectrum plus {1} is the full spectrum."""
    if not _is_unital(T.transfer):
        raise InvalidOperatorError("traceless restriction requires a unital map")
    n = T.dim * T.dim
    return T.transfer[: n - 1, : n - 1].copy()


# ---------------------------------------------------------------------------
# channel constructors
# ---------------------------------------------------------------------------

def unitary_channel(U: np.ndarray) -> SuperOperator:
    """Conjugation channel ``H -> U^dag H U``.

    The transfer matrix is real orthogonal, so the map is an isometry of
    the Hilbert-Schmidt norm.
    """
    U = np.asarray(U, dtype=complex)
    d = U.shape[0]
    if U.shape != (d, d) or np.abs(U.conj().T @ U - np.eye(d)).max() > UNITARY_ATOL:
        raise InvalidOperatorError("input is not unitary at tolerance 1e-10")
    t = transfer_from_map(lambda h: U.conj().T @ h @ U, d)
    return SuperOperator(dim=d, transfer=t, unital=True, completely_positive=True)


def depolarizing_mixture(U: np.ndarray, sigma, lam: float) -> SuperOperator:
    """Convex mixture of a unitary channel and a simply depolarizing one:
    ``H -> (1-lam) U^dag H U + lam * I * tr(H sigma)``.
    """
    if not 0.0 <= lam <= 1.0:
        raise InvalidOperatorError(f"mixing weight {lam} outside [0, 1]")
    sig = as_matrix(sigma)
    DensityOperator(sig)  # validates trace and positivity
    U = np.asarray(U, dtype=complex)
    d = U.shape[0]
    if np.abs(U.conj().T @ U - np.eye(d)).max() > UNITARY_ATOL:
        raise InvalidOperatorError("input is not unitary at tolerance 1e-10")
    eye = np.eye(d)

    def mixed(h):
        return (1.0 - lam) * (U.conj().T @ h @ U) + lam * eye * np.trace(h @ sig)

    t = transfer_from_map(mixed, d)
    return SuperOperator(dim=d, transfer=t, unital=True, completely_positive=True)


def qubit_dephasing_depolarizing(p: float, theta: float) -> SuperOperator:
    """Qubit channel mixing a z-rotation with depolarizing noise:
    ``H -> (1-p) exp(-i theta sz/2) H exp(i theta sz/2) + p I tr(H)/2``.
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidOperatorError(f"noise weight {p} outside [0, 1]")
    if not 0.0 <= theta <= np.pi:
        raise InvalidOperatorError(f"rotation angle {theta} outside [0, pi]")
    U = expm(1j * (theta / 2.0) * PAULI_Z)  # U^dag H U == e^{-i th sz/2} H e^{i th sz/2}
    return depolarizing_mixture(U, np.eye(2) / 2.0, p)


def pauli_cycle_unitary() -> np.ndarray:
    """Qubit unitary whose channel permutes the Pauli axes cyclically
    (x -> y -> z -> x); a 2pi/3 rotation about the (1,1,1) axis."""
    return 0.5 * np.array([[1j + 1, 1 + 1j], [1j - 1, 1 - 1j]], dtype=complex)


def haar_random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via phase-fixed QR of a Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


# ---------------------------------------------------------------------------
# Lindblad generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LindbladGenerator:
    """Generator of a quantum dynamical semigroup, ``exp(tL)`` CP for t >= 0.

    Parametrized by the Choi-block data: a positive-semidefinite matrix
    ``P`` on the traceless sector and the free imaginary part ``v_imag`` of
    the coupling vector (its real part is fixed by ``P``).  The derived
    transfer matrix annihilates the identity, so its last column is zero.
    """

    dim: int
    P: np.ndarray
    v_imag: np.ndarray
    transfer: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = self.dim
        n = d * d
        P = np.asarray(self.P, dtype=complex)
        v = np.asarray(self.v_imag, dtype=float)
        t = np.asarray(self.transfer, dtype=float)
        if P.shape != (n - 1, n - 1) or v.shape != (n - 1,) or t.shape != (n, n):
            raise DimensionMismatchError("inconsistent generator block shapes")
        pscale = max(np.linalg.norm(P, 2), 1e-300)
        if np.linalg.eigvalsh((P + P.conj().T) / 2.0)[0] < -1e-10 * pscale:
            raise InvalidOperatorError("P block is not positive semidefinite")
        if np.abs(t[:, -1]).max() > GENERATOR_UNITAL_ATOL * max(1.0, np.abs(t).max()):
            raise InvalidOperatorError("generator does not annihilate the identity")
        for probe_t in CP_PROBE_TIMES:
            c = choi_matrix(exponentiate_transfer(d, t, probe_t))
            if c.min_eigenvalue() < -CP_CHOI_ATOL:
                raise InvalidOperatorError(
                    f"exp({probe_t} L) fails the Choi positivity check"
                )
        object.__setattr__(self, "P", _readonly(P))
        object.__setattr__(self, "v_imag", _readonly(v))
        object.__setattr__(self, "transfer", _readonly(t))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "P_re": self.P.real.tolist(),
            "P_im": self.P.imag.tolist(),
            "v_imag": self.v_imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LindbladGenerator":
        P = np.asarray(data["P_re"], dtype=float) + 1j * np.asarray(data["P_im"], dtype=float)
        return build_lindblad(int(data["dim"]), P, np.asarray(data["v_imag"], dtype=float))


def exponentiate_transfer(d: int, transfer: np.ndarray, t: float) -> SuperOperator:
    """``exp(t * transfer)`` wrapped as a SuperOperator (scaling-and-squaring Pade)."""
    if t < 0:
        raise InvalidOperatorError(f"semigroup parameter t={t} must be >= 0")
    et = expm(t * transfer)
    return SuperOperator(dim=d, transfer=et, unital=_is_unital(et), completely_positive=True)


def build_lindblad(d: int, P: np.ndarray, v_imag: np.ndarray) -> LindbladGenerator:
    """Assemble a generator from its Choi-block data.

    The completely positive part acts through the Choi block ``P`` on the
    traceless basis sector; the closure term uses ``K`` whose hermitian
    part is fixed by ``P`` (so the identity is annihilated exactly) and
    whose antihermitian part carries ``v_imag``.
    """
    P = np.asarray(P, dtype=complex)
    v_imag = np.asarray(v_imag, dtype=float)
    basis = standard_basis(d)
    w = basis.stack.reshape(d * d, d * d)
    wt = w.T[:, : d * d - 1]  # columns: vectorized traceless basis mats
    c_phi = (wt @ P @ wt.conj().T).reshape(d, d, d, d)

    def phi(x):
        return np.einsum("aibk,ik->ab", c_phi, x)

    k_herm = phi(np.eye(d)) / 2.0
    k_anti = 1j * np.einsum(
        "k,kij->ij", -v_imag / np.sqrt(d), basis.stack[: d * d - 1]
    )
    K = k_herm + k_anti

    def gen(x):
        return phi(x) - K @ x - x @ K.conj().T

    transfer = transfer_from_map(gen, d, basis)
    return LindbladGenerator(dim=d, P=P, v_imag=v_imag, transfer=transfer)


def random_lindblad(d: int, rng: np.random.Generator, scale: float = 1.0) -> LindbladGenerator:
    """Random generator: Wishart ``P`` (full rank almost surely) and Gaussian
    imaginary coupling, both multiplied by ``scale``."""
    if d < 2:
        raise InvalidOperatorError(f"dimension must be >= 2, got {d}")
    n = d * d - 1
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    P = scale * (g @ g.conj().T) / n
    v_imag = scale * rng.standard_normal(n)
    return build_lindblad(d, P, v_imag)


def exponentiate(L: LindbladGenerator, t: float) -> SuperOperator:
    """Semigroup element ``exp(tL)``; unital and completely positive."""
    return exponentiate_transfer(L.dim, L.transfer, t)
