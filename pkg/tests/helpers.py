"""Shared test utilities: channel samplers and error metrics."""

import numpy as np

import evotomo as et


def sample_semigroup(d, rng, diss=0.3, coh=2.0, gap=None, t=1.0):
    """Random semigroup channel with separate dissipation/coherent scales.

    ``gap`` rejects draws whose channel spectrum has a pairwise eigenvalue
    gap below the threshold, which keeps minimal-polynomial detection and
    Vandermonde conditioning away from the degenerate null set.
    Returns (generator, channel).
    """
    n = d * d - 1
    while True:
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        P = diss * (g @ g.conj().T) / n
        v = coh * rng.standard_normal(n)
        L = et.build_lindblad(d, P, v)
        T = et.exponentiate(L, t)
        if gap is None or et.nondegenerate(T, gap):
            return L, T


def reldev(got, want):
    """Max absolute deviation relative to the reference's overall scale."""
    got = np.asarray(got, dtype=float)
    want = np.asarray(want, dtype=float)
    return float(np.abs(got - want).max() / max(np.abs(want).max(), 1e-300))


def match_multisets(a, b, tol):
    """True iff the complex multisets match pairwise within ``tol`` (greedy)."""
    b = list(b)
    for x in a:
        dists = [abs(x - y) for y in b]
        if not dists:
            return False
        k = int(np.argmin(dists))
        if dists[k] > tol:
            return False
        b.pop(k)
    return not b
