"""Finite-statistics simulation and the least-squares estimator's error bound.

Each evolved effect is measured ``n`` times on independent preparations and
the outcomes are averaged.  Two sampling models are supported:

* ``binomial`` (default): the binary POVM-outcome indicator is averaged, so
  the frequency is binomial and the outcome values span an interval of
  length 1;
* ``spectrum``: eigenvalue readings of the effect are averaged; the outcome
  interval is the effect's spectral width.

The estimator interpolates the frequencies through the inverse measurement
map; its mean squared Hilbert-Schmidt error is bounded by the map's squared
inverse norm times the summed frequency variances, each capped by
``width**2 / (4n)`` for the relevant outcome interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BoundViolationError, InvalidOperatorError
from .operator_space import HermitianOperator, as_matrix
from .channels import SuperOperator, apply
from .tomography import (
    ALPHA,
    BETA,
    MeasurementMap,
    build_alpha,
    build_beta,
    certify,
    reconstruct_observable,
    reconstruct_state,
)

EFFECT_ATOL = 1e-10
FREQUENCY_ATOL = 1e-12


@dataclass(frozen=True)
class MeasurementPlan:
    """A batch of effect operators, each measured ``shots_per_effect`` times.

    ``spectral_width`` is the largest spectrum-interval length over the
    effects (at most 1 for genuine effects).
    """

    effects: tuple
    shots_per_effect: int
    mode: str = "binomial"
    spectral_width: float = field(init=False)

    def __post_init__(self):
        if self.shots_per_effect < 1:
            raise InvalidOperatorError("shot count must be at least 1")
        if self.mode not in ("binomial", "spectrum"):
            raise InvalidOperatorError(f"unknown sampling mode {self.mode!r}")
        ops = tuple(
            e if isinstance(e, HermitianOperator) else HermitianOperator(as_matrix(e))
            for e in self.effects
        )
        if not ops:
            raise InvalidOperatorError("plan needs at least one effect")
        width = 0.0
        for op in ops:
            ev = op.eigenvalues()
            if ev[0] < -EFFECT_ATOL or ev[-1] > 1.0 + EFFECT_ATOL:
                raise InvalidOperatorError(
                    f"effect spectrum [{ev[0]:.3e}, {ev[-1]:.3e}] leaves [0, 1]"
                )
            width = max(width, float(ev[-1] - ev[0]))
        object.__setattr__(self, "effects", ops)
        object.__setattr__(self, "spectral_width", width)

    @property
    def outcome_width(self) -> float:
        """Length of the interval the averaged outcomes are drawn from."""
        return 1.0 if self.mode == "binomial" else self.spectral_width

    def probabilities(self, rho) -> np.ndarray:
        r = as_matrix(rho)
        p = np.array([float(np.trace(e.entries @ r).real) for e in self.effects])
        if p.min() < -EFFECT_ATOL or p.max() > 1.0 + EFFECT_ATOL:
            raise InvalidOperatorError(
                f"outcome probability outside [0, 1]: range [{p.min():.3e}, {p.max():.3e}]"
            )
        return np.clip(p, 0.0, 1.0)


@dataclass(frozen=True)
class EstimationResult:
    """Frequencies, the estimate built from them, and optional error/bound data."""

    frequencies: np.ndarray
    estimate: HermitianOperator
    squared_error: float | None = None
    bound: float | None = None
    positive: bool = True

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        if f.min() < -FREQUENCY_ATOL or f.max() > 1.0 + FREQUENCY_ATOL:
            raise InvalidOperatorError("frequencies must lie in [0, 1]")
        f.setflags(write=False)
        object.__setattr__(self, "frequencies", f)


def evolved_effect_plan(
    T: SuperOperator, H0, count: int, shots: int, mode: str = "binomial"
) -> MeasurementPlan:
    """Plan measuring ``T^i(H0)`` for ``i = 0..count-1``; fails if any evolved
    operator leaves the effect range (only possible for non-CP or non-unital maps)."""
    h = HermitianOperator(as_matrix(H0))
    effects = []
    for _ in range(count):
        effects.append(h)
        h = apply(T, h)
    return MeasurementPlan(effects=tuple(effects), shots_per_effect=shots, mode=mode)


def sample_frequencies(plan: MeasurementPlan, rho, rng: np.random.Generator) -> np.ndarray:
    """Average of ``n`` independent outcomes per effect, one entry per effect."""
    n = plan.shots_per_effect
    if plan.mode == "binomial":
        p = plan.probabilities(rho)
        return rng.binomial(n, p).astype(float) / n
    r = as_matrix(rho)
    out = np.empty(len(plan.effects))
    for i, e in enumerate(plan.effects):
        lam, vecs = np.linalg.eigh(e.entries)
        pk = np.clip(np.real(np.einsum("ki,ij,jk->k", vecs.conj().T, r, vecs)), 0.0, None)
        pk /= pk.sum()
        counts = rng.multinomial(n, pk)
        out[i] = float(counts @ lam) / n
    return out


def estimate_state(
    measurement_map: MeasurementMap,
    frequencies,
    truth=None,
    plan: MeasurementPlan | None = None,
) -> EstimationResult:
    """Least-squares state estimate from observed frequencies.

    With as many rows as free state parameters the estimator interpolates
    the data exactly.  The result is unit-trace hermitian by construction
    and may fail positivity, which is flagged, not fixed.
    """
    f = np.asarray(frequencies, dtype=float)
    est = reconstruct_state(measurement_map, f)
    sq = None
    if truth is not None:
        sq = float(np.linalg.norm(est.entries - as_matrix(truth)) ** 2)
    bound = mse_bound(measurement_map, plan) if plan is not None else None
    return EstimationResult(
        frequencies=f,
        estimate=est,
        squared_error=sq,
        bound=bound,
        positive=est.min_eigenvalue() >= -EFFECT_ATOL,
    )


def mse_bound(measurement_map: MeasurementMap, plan: MeasurementPlan) -> float:
    """Worst-case mean squared error of the least-squares estimator:
    ``|inverse|^2 * width^2 * rows / (4n)``.

    ``width`` is the outcome-interval length of the plan (1 for binomial
    sampling).  Observable-side maps measure probabilities against evolved
    states, so their width is always 1.  Rank-deficient maps give infinity.
    """
    cert = certify(measurement_map)
    if not cert.injective:
        return float("inf")
    m = measurement_map.rows.shape[0]
    n = plan.shots_per_effect
    inv_sq = 1.0 / cert.sigma_min**2
    width = plan.outcome_width if measurement_map.kind == ALPHA else 1.0
    return inv_sq * width**2 * m / (4.0 * n)


def mse_experiment(
    T: SuperOperator,
    probe,
    truth,
    n: int,
    trials: int,
    rng: np.random.Generator,
    kind: str = ALPHA,
    t0: int = 0,
    t1: int | None = None,
) -> dict:
    """Monte-Carlo check of the estimator error against its bound.

    State side (default): ``probe`` is the evolved effect, ``truth`` the
    prepared state.  Observable side: ``probe`` is the reference state,
    ``truth`` the unknown effect, and the evolved states play the role of
    the measured family.  Raises if the empirical mean squared error
    exceeds the bound beyond the stochastic slack ``5/sqrt(trials)``.
    """
    if trials < 1:
        raise InvalidOperatorError("need at least one trial")
    d = T.dim
    if t1 is None:
        t1 = t0 + (d * d - 2 if kind == ALPHA else d * d - 1)
    count = t1 - t0 + 1
    truth_m = as_matrix(truth)
    if kind == ALPHA:
        mapping = build_alpha(T, probe, t0, t1)
        evolver = T
    elif kind == BETA:
        mapping = build_beta(T, probe, t0, t1)
        evolver = T.dual()
    else:
        raise InvalidOperatorError(f"unknown experiment kind {kind!r}")
    full_plan = evolved_effect_plan(evolver, probe, t0 + count, n)
    plan = MeasurementPlan(effects=full_plan.effects[t0:], shots_per_effect=n)

    bound = mse_bound(mapping, plan)
    errors = np.empty(trials)
    for k in range(trials):
        f = sample_frequencies(plan, truth_m, rng)
        if kind == ALPHA:
            est = reconstruct_state(mapping, f)
        else:
            est = reconstruct_observable(mapping, f)
        errors[k] = np.linalg.norm(est.entries - truth_m) ** 2
    empirical = float(errors.mean())
    ratio = empirical / bound if np.isfinite(bound) else float("inf")
    slack = 1.0 + 5.0 / np.sqrt(trials)
    if empirical > bound * slack:
        raise BoundViolationError(
            f"empirical MSE {empirical:.3e} exceeds bound {bound:.3e} with slack {slack:.3f}"
        )
    cert = certify(mapping)
    return {
        "empirical_mse": empirical,
        "bound": bound,
        "ratio": ratio,
        "trials": trials,
        "shots": n,
        "sigma_min": cert.sigma_min,
    }
