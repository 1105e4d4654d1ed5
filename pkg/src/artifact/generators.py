"""Seeded random instances: complexes, closed maps, two-term objects, contractible objects."""

from __future__ import annotations

import numpy as np

from .complexes import GradedComplex, GradedMorphism, random_closed_morphism
from .exactalg import ZZ, ExactMatrix, Ring

__all__ = [
    "rng_from_seed", "random_complex", "random_invertible", "random_closed_map", "random_chain",
    "random_contractible", "random_matrix",
]


def rng_from_seed(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_matrix(ring: Ring, rows: int, cols: int, rng, coeff_range: int = 3) -> ExactMatrix:
    vals = rng.integers(-coeff_range, coeff_range + 1, size=(rows, cols))
    return ExactMatrix(ring, vals.astype(object) if ring.dtype is object else vals, shape=(rows, cols))


def random_invertible(ring: Ring, n: int, rng, steps: int | None = None) -> ExactMatrix:
    """A product of random elementary matrices (unimodular over ℤ)."""
    arr = np.array(ExactMatrix.identity(ring, n).array, copy=True)
    if n < 2:
        return ExactMatrix(ring, arr, shape=(n, n))
    for _ in range(steps if steps is not None else 3 * n):
        i, j = rng.choice(n, size=2, replace=False)
        c = int(rng.integers(-2, 3))
        arr[i, :] = arr[i, :] + c * arr[j, :]
    return ExactMatrix(ring, arr)


def _block_invertible(ring: Ring, degrees, rng) -> ExactMatrix:
    """Random invertible matrix preserving the degree of each basis vector."""
    n = len(degrees)
    arr = np.array(ExactMatrix.zeros(ring, n, n).array, copy=True)
    for e in sorted(set(degrees)):
        idx = [i for i, x in enumerate(degrees) if x == e]
        T = random_invertible(ring, len(idx), rng)
        arr[np.ix_(idx, idx)] = T.array
    return ExactMatrix(ring, arr, shape=(n, n))


def _inverse_of_product(ring, T):
    from .exactalg import QQ, inverse
    if ring is ZZ:
        Ti = inverse(T.change_ring(QQ))
        return Ti.change_ring(ZZ)
    return inverse(T)


def random_complex(ring: Ring, rng, grading: str = "Z2", max_rank: int = 3,
                   degrees: tuple[int, int] = (-1, 1), torsion: bool = False) -> GradedComplex:
    """A random finite free complex.

    Built in standard form (homology summands plus pairs v ↦ c·w) and then
    conjugated by a random degree-preserving invertible matrix.  Over ℤ the
    coefficient c is ±1 unless ``torsion`` is set.
    """
    rng = rng_from_seed(rng)
    degs = [0, 1] if grading == "Z2" else list(range(degrees[0], degrees[1] + 1))
    basis: list[int] = []
    pairs: list[tuple[int, int, int]] = []
    for e in degs:
        for _ in range(int(rng.integers(0, max_rank + 1))):
            basis.append(e)
    sources = degs if grading == "Z2" else degs[:-1]
    n_pairs = int(rng.integers(0, max_rank + 1)) if sources else 0
    for _ in range(n_pairs):
        e = sources[int(rng.integers(0, len(sources)))]
        tgt_e = (e + 1) % 2 if grading == "Z2" else e + 1
        c = 1
        if ring is ZZ and torsion:
            c = int(rng.choice([1, -1, 2, 3]))
        elif ring is ZZ:
            c = int(rng.choice([1, -1]))
        basis.append(e)
        basis.append(tgt_e)
        pairs.append((len(basis) - 2, len(basis) - 1, c))
    n = len(basis)
    D = np.array(ExactMatrix.zeros(ring, n, n).array, copy=True)
    for v, w, c in pairs:
        D[w, v] = ring.normalize(c)
    D0 = ExactMatrix(ring, D, shape=(n, n))
    T = _block_invertible(ring, basis, rng)
    Ti = _inverse_of_product(ring, T)
    perm = list(rng.permutation(n))
    A = GradedComplex(ring, basis, T @ D0 @ Ti, grading)
    return A.permuted(perm)


def random_contractible(ring: Ring, rng, grading: str = "Z2", max_pairs: int = 3):
    """A random contractible complex together with α of degree −1 with dα = id."""
    rng = rng_from_seed(rng)
    n_pairs = int(rng.integers(1, max_pairs + 1))
    basis, pairs = [], []
    for _ in range(n_pairs):
        e = int(rng.integers(0, 2))
        basis += [e, (e + 1) % 2 if grading == "Z2" else e + 1]
        pairs.append((len(basis) - 2, len(basis) - 1))
    n = len(basis)
    D = np.array(ExactMatrix.zeros(ring, n, n).array, copy=True)
    S = np.array(D, copy=True)
    for v, w in pairs:
        D[w, v] = ring.normalize(1)
        S[v, w] = ring.normalize(1)
    T = _block_invertible(ring, basis, rng)
    Ti = _inverse_of_product(ring, T)
    A = GradedComplex(ring, basis, T @ ExactMatrix(ring, D) @ Ti, grading)
    alpha = GradedMorphism(A, A, -1, T @ ExactMatrix(ring, S) @ Ti)
    return A, alpha


def random_closed_map(A: GradedComplex, B: GradedComplex, rng, k: int = 0) -> GradedMorphism:
    return random_closed_morphism(A, B, rng_from_seed(rng), k)


def random_chain(ring: Ring, length: int, rng, grading: str = "Z2", max_rank: int = 2) -> list[GradedMorphism]:
    """Closed degree-0 maps A_1 → A_2 → … → A_{length+1} between random complexes."""
    rng = rng_from_seed(rng)
    objs = [random_complex(ring, rng, grading, max_rank) for _ in range(length + 1)]
    return [random_closed_map(objs[i], objs[i + 1], rng) for i in range(length)]
