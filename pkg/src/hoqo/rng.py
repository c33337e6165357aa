"""Seeded random quantum objects.

A single 64-bit seed drives a counter-based Philox generator, so every random
state, channel and restart in the package is reproducible from one integer.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group


def make_rng(seed: int | None = None) -> np.random.Generator:
    """Philox-backed generator; ``None`` draws fresh OS entropy."""
    return np.random.Generator(np.random.Philox(seed))


def spawn(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Independent child generators, e.g. one per restart."""
    return list(rng.spawn(n))


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary."""
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.exp(
        2j * np.pi * rng.random()
    ) * np.ones((1, 1))


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = ginibre(d, d, rng)
    return 0.5 * (g + g.conj().T)


def random_state(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Density matrix from the induced measure with the given rank (default full)."""
    g = ginibre(d, rank or d, rng)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = ginibre(d, 1, rng)[:, 0]
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_isometry(d_out: int, d_in: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(d_out, d_in, rng))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus(d_in: int, d_out: int, rng: np.random.Generator,
                 n_kraus: int | None = None) -> list[np.ndarray]:
    """Kraus operators of a random CPTP map (slices of a random isometry)."""
    n = n_kraus or d_in * d_out
    v = random_isometry(d_out * n, d_in, rng)
    return [v[k * d_out:(k + 1) * d_out, :] for k in range(n)]


def random_unital_kraus(d: int, rng: np.random.Generator, n_terms: int = 3) -> list[np.ndarray]:
    """Kraus operators of a random mixture of unitaries (a unital channel)."""
    p = rng.dirichlet(np.ones(n_terms))
    return [np.sqrt(pk) * random_unitary(d, rng) for pk in p]
