"""Expectation-value time series and their extensions from spectral data.

A finite window of the sequence ``a_i = tr(rho T^i(H0))`` determines the
whole sequence once the minimal polynomial of the evolution is known: the
values obey a linear recurrence whose coefficients are read off the
polynomial.  Three flavours are implemented:

* linear: coefficients depend only on the spectral profile of ``T``; the
  same operator extends the series of every (state, observable) pair.
* affine: restricting states to unit trace lets the recurrence run on the
  traceless compression of ``T``, saving one seed point; the price is an
  observable-dependent offset sequence.
* continuous: for semigroups, values at ``d**2`` arbitrary distinct times
  determine ``a(t)`` everywhere through a generalized Vandermonde solve in
  the generator's eigenvalues.

Backward extension below the seed window is possible down to index
``kappa = min(t0, j0)`` and is refused beyond that.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .channels import LindbladGenerator, SuperOperator, restrict_traceless
from .errors import (
    DimensionMismatchError,
    EvotomoError,
    IllConditionedTimesError,
    InsufficientSeedError,
    InvalidOperatorError,
    SpectralAmbiguityError,
)
from .operator_space import as_matrix, random_hermitian, vectorize
from .spectral import SpectralProfile, nondegenerate, spectral_profile

logger = logging.getLogger(__name__)

VANDERMONDE_COND_LIMIT = 1e12
IMAG_RESIDUE_ATOL = 1e-9


@dataclass(frozen=True)
class TimeSeries:
    """Ordered expectation values, on an integer window or a real time grid."""

    mode: str
    values: np.ndarray
    t0: int = 0
    times: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise InvalidOperatorError("series contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.mode == "discrete":
            if self.t0 < 0:
                raise InvalidOperatorError(f"start index {self.t0} must be >= 0")
            object.__setattr__(self, "times", None)
        elif self.mode == "continuous":
            t = np.asarray(self.times, dtype=float)
            if t.shape != v.shape or (len(t) > 1 and np.any(np.diff(t) <= 0)):
                raise InvalidOperatorError("continuous times must be strictly increasing")
            t.setflags(write=False)
            object.__setattr__(self, "times", t)
        else:
            raise InvalidOperatorError(f"unknown series mode {self.mode!r}")

    @property
    def axis(self) -> np.ndarray:
        """Indices (discrete) or times (continuous) of the stored values."""
        if self.mode == "discrete":
            return np.arange(self.t0, self.t0 + len(self.values))
        return self.times

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(["index_or_time", "value"])
        for x, v in zip(self.axis, self.values):
            writer.writerow([f"{x:.17g}", f"{v:.17g}"])

    @classmethod
    def from_csv(cls, fh) -> "TimeSeries":
        rows = list(csv.reader(fh))
        if not rows or rows[0] != ["index_or_time", "value"]:
            raise InvalidOperatorError("expected CSV header 'index_or_time,value'")
        axis = np.array([float(r[0]) for r in rows[1:]])
        values = np.array([float(r[1]) for r in rows[1:]])
        if np.allclose(axis, np.round(axis)) and (
            len(axis) < 2 or np.all(np.diff(axis) == 1.0)
        ):
            return cls(mode="discrete", values=values, t0=int(round(axis[0])) if len(axis) else 0)
        return cls(mode="continuous", values=values, times=axis)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


def generate_discrete(rho, H0, T: SuperOperator, t0: int = 0, length: int = 1) -> TimeSeries:
    """Series ``a_i = tr(rho T^i(H0))`` for ``i = t0, ..., t0+length-1``,
    computed by iterated application of the transfer matrix."""
    r = as_matrix(rho)
    h = as_matrix(H0)
    if r.shape[0] != T.dim or h.shape[0] != T.dim:
        raise DimensionMismatchError("state/observable dimension does not match channel")
    if t0 < 0 or length < 1:
        raise InvalidOperatorError("need t0 >= 0 and length >= 1")
    rv = vectorize(r)
    hv = vectorize(h)
    for _ in range(t0):
        hv = T.transfer @ hv
    out = np.empty(length)
    for k in range(length):
        out[k] = rv @ hv
        if k + 1 < length:
            hv = T.transfer @ hv
    return TimeSeries(mode="discrete", values=out, t0=t0)


# ---------------------------------------------------------------------------
# discrete extensions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearExtension:
    """Linear extension operator built from a spectral profile alone.

    Maps a seed ``(a_i) for i in [t0, t0+seed_len-1]`` to the values on
    ``[kappa, horizon]``.  The coefficient tables are the same for every
    (state, observable) pair evolving under the profiled map.
    """

    kind: str = field(default="linear", init=False)
    t0: int = 0
    seed_len: int = 1
    horizon: int = 1
    kappa: int = 0
    delta: int = 1
    j0: int = 0
    forward: np.ndarray = None
    backward: np.ndarray | None = None
    full_order_fallback: bool = False

    @property
    def order(self) -> int:
        return len(self.forward)

    def step_amplification(self) -> float:
        """Worst-case one-step growth factor of the recurrences."""
        amp = float(np.abs(self.forward).sum())
        if self.backward is not None:
            amp = max(amp, float(np.abs(self.backward).sum()))
        return max(amp, 1.0)

    def extend(self, seed_values) -> TimeSeries:
        seed = np.asarray(seed_values, dtype=float)
        if seed.shape != (self.seed_len,):
            raise DimensionMismatchError(
                f"seed length {seed.shape} does not match declared {self.seed_len}"
            )
        top = max(self.horizon, self.t0 + self.seed_len - 1)
        buf = np.zeros(top - self.kappa + 1)
        lo = self.t0 - self.kappa
        buf[lo : lo + self.seed_len] = seed
        if self.backward is not None:
            for m in range(self.t0 - 1, self.kappa - 1, -1):
                window = buf[m + 1 - self.kappa : m + 1 + self.order - self.kappa]
                buf[m - self.kappa] = float(self.backward @ window)
        for m in range(self.t0 + self.seed_len, top + 1):
            window = buf[m - self.order - self.kappa : m - self.kappa]
            buf[m - self.kappa] = float(self.forward @ window)
        return TimeSeries(
            mode="discrete", values=buf[: self.horizon - self.kappa + 1], t0=self.kappa
        )

    def as_matrix(self) -> np.ndarray:
        """Matrix of the extension, columns = responses to unit seeds."""
        cols = []
        for k in range(self.seed_len):
            e = np.zeros(self.seed_len)
            e[k] = 1.0
            cols.append(self.extend(e).values)
        return np.column_stack(cols)


def build_linear_extension(
    profile: SpectralProfile, t0: int, t: int, horizon: int
) -> LinearExtension:
    """Extension operator for seeds of length ``t`` starting at ``t0``.

    Requires ``t >= delta - kappa`` with ``kappa = min(t0, j0)``.  When the
    zero-block size is ambiguous at the profile's tolerance, a certified
    backward reach is unavailable; the forward-only path (kappa = t0) is
    still offered provided ``t >= delta``.
    """
    if t0 < 0 or t < 1 or horizon < 0:
        raise InvalidOperatorError("need t0 >= 0, t >= 1, horizon >= 0")
    delta, j0 = profile.delta, profile.j0
    pi = profile.minpoly

    if profile.j0_ambiguous:
        if t < delta:
            raise SpectralAmbiguityError(
                "zero-block size is ambiguous at the working tolerance; a "
                f"certified extension needs a seed of length {delta} (got {t})"
            )
        forward = (-pi[:delta]).real.copy()
        return LinearExtension(
            t0=t0, seed_len=t, horizon=horizon, kappa=t0,
            delta=delta, j0=j0, forward=forward, backward=None,
            full_order_fallback=True,
        )

    kappa = min(t0, j0)
    required = delta - kappa
    if t < required:
        raise InsufficientSeedError(
            f"seed of length {t} is below the minimum {required} "
            f"(delta={delta}, kappa={kappa})",
            required,
        )
    order = delta - j0
    forward = (-pi[j0 : j0 + order]).real.copy()
    backward = None
    if t0 > kappa:
        low = pi[j0]
        if abs(low) <= 1e-10 * np.abs(pi).max():
            raise SpectralAmbiguityError(
                "lowest minimal-polynomial coefficient is numerically zero; "
                "backward extension cannot be certified"
            )
        backward = (-pi[j0 + 1 : j0 + 1 + order] / low).real.copy()
    return LinearExtension(
        t0=t0, seed_len=t, horizon=horizon, kappa=kappa,
        delta=delta, j0=j0, forward=forward, backward=backward,
    )


@dataclass(frozen=True)
class AffineExtension:
    """Affine extension for unit-trace states: a linear recurrence on the
    traceless compression plus a precomputed offset sequence."""

    kind: str = field(default="affine", init=False)
    inner: LinearExtension = None
    gamma: np.ndarray = None  # offsets on [kappa, max(horizon, t0+seed_len-1)]

    @property
    def t0(self) -> int:
        return self.inner.t0

    @property
    def seed_len(self) -> int:
        return self.inner.seed_len

    @property
    def horizon(self) -> int:
        return self.inner.horizon

    @property
    def kappa(self) -> int:
        return self.inner.kappa

    def step_amplification(self) -> float:
        return self.inner.step_amplification()

    def extend(self, seed_values) -> TimeSeries:
        seed = np.asarray(seed_values, dtype=float)
        lo = self.t0 - self.kappa
        deflated = seed - self.gamma[lo : lo + self.seed_len]
        inner_series = self.inner.extend(deflated)
        n = len(inner_series.values)
        return TimeSeries(
            mode="discrete", values=inner_series.values + self.gamma[:n], t0=self.kappa
        )


def build_affine_extension(
    T: SuperOperator, H0, t0: int, t: int, horizon: int, tol: float = 1e-8
) -> AffineExtension:
    """Extension valid for all unit-trace states, seeded one point shorter
    than the linear kind whenever the evolution is nondegenerate.

    The recurrence runs on the traceless compression of ``T``; the offsets
    are the series of the maximally mixed reference state.
    """
    tq = restrict_traceless(T)
    profile_q = spectral_profile(tq, tol)
    inner = build_linear_extension(profile_q, t0, t, horizon)
    d = T.dim
    top = max(horizon, t0 + t - 1)
    gamma = generate_discrete(
        np.eye(d) / d, H0, T, t0=inner.kappa, length=top - inner.kappa + 1
    )
    return AffineExtension(inner=inner, gamma=gamma.values)


# ---------------------------------------------------------------------------
# continuous extension
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuousExtension:
    """Evaluator reconstructing ``a(t)`` anywhere from values at ``d**2``
    distinct sample times, using only the generator's spectrum."""

    kind: str = field(default="continuous", init=False)
    sample_times: np.ndarray = None
    eigenvalues: np.ndarray = None
    condition_number: float = 1.0
    kappa: int = 0
    _lu: tuple = None

    def weights(self, t: float) -> np.ndarray:
        """Interpolation weights at time ``t`` (solve of the sample-time system)."""
        z = np.exp(self.eigenvalues * t)
        beta = lu_solve(self._lu, z)
        residue = float(np.abs(beta.imag).max())
        if residue > IMAG_RESIDUE_ATOL * max(1.0, float(np.abs(beta).max())):
            raise IllConditionedTimesError(
                f"imaginary residue {residue:.3e} in interpolation weights; "
                "re-space the sample times"
            )
        if residue > 0.0:
            logger.debug("discarding imaginary residue %.3e in weights", residue)
        return beta.real.copy()

    def extend(self, seed_values, eval_times) -> TimeSeries:
        seed = np.asarray(seed_values, dtype=float)
        if seed.shape != self.sample_times.shape:
            raise DimensionMismatchError(
                f"need {len(self.sample_times)} seed values, got {seed.shape}"
            )
        grid = np.asarray(eval_times, dtype=float)
        values = np.array([float(self.weights(t) @ seed) for t in grid])
        return TimeSeries(mode="continuous", values=values, times=grid)


def build_continuous_extension(
    L: LindbladGenerator, sample_times, gap_tol: float = 1e-10
) -> ContinuousExtension:
    """Build the continuous-time evaluator from ``d**2`` distinct sample times.

    Unsupported for degenerate generator spectra; a numerically singular
    sample-time matrix (condition number above 1e12) is rejected with a
    suggestion to re-space the times.
    """
    times = np.asarray(sample_times, dtype=float)
    n = L.dim * L.dim
    if times.shape != (n,):
        raise DimensionMismatchError(f"need exactly {n} sample times, got {times.shape}")
    if len(np.unique(times)) != n:
        raise InvalidOperatorError("sample times must be distinct")
    if not nondegenerate(L.transfer, gap_tol):
        raise InvalidOperatorError(
            "generator spectrum is degenerate at the gap tolerance; "
            "the continuous extension is unsupported"
        )
    lam = np.linalg.eigvals(L.transfer.astype(complex))
    Y = np.exp(np.outer(lam, times))
    cond = float(np.linalg.cond(Y))
    if not np.isfinite(cond) or cond > VANDERMONDE_COND_LIMIT:
        raise IllConditionedTimesError(
            f"sample-time matrix condition number {cond:.3e} exceeds 1e12; "
            "re-space the sample times"
        )
    return ContinuousExtension(
        sample_times=times,
        eigenvalues=lam,
        condition_number=cond,
        _lu=lu_factor(Y),
    )


def series_subspace_rank(
    T: SuperOperator,
    trials: int,
    window: int,
    rng: np.random.Generator,
    rank_tol: float = 1e-9,
) -> int:
    """Numerical rank of stacked series windows over random (state, observable)
    pairs; bounded above by the minimal-polynomial degree of ``T``."""
    profile = spectral_profile(T)
    if window < profile.delta + 2:
        raise InvalidOperatorError(
            f"window {window} too short; need at least delta+2 = {profile.delta + 2}"
        )
    rows = []
    for _ in range(trials):
        rho = random_hermitian(T.dim, rng)
        h0 = random_hermitian(T.dim, rng)
        rows.append(generate_discrete(rho, h0, T, t0=0, length=window).values)
    stacked = np.array(rows)
    s = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(s > rank_tol * s[0])) if s[0] > 0 else 0
    if rank > profile.delta:
        raise EvotomoError(
            f"stacked-window rank {rank} exceeds the degree bound {profile.delta}"
        )
    return rank
