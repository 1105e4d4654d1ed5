"""Finite free graded complexes, graded morphisms, cones, shifts and homotopy equivalences.

A complex is a list of basis degrees together with one total differential
matrix; the basis is not required to be sorted by degree, which lets cones
and shifts keep the block order used throughout (``C(a) = A1[1] ⊕ A2``).
In ℤ/2-graded mode degrees are 0 or 1.

Morphisms are homogeneous matrices with a degree ``k``; the differential of a
morphism is ``df = d∘f − (−1)^k f∘d``.  Shifting a morphism by ``n`` multiplies
it by ``(−1)^{nk}``, and the cone of a degree-k morphism of two-term objects
``(f1, h1, f2)`` is ``𝔟((−1)^k f1, h1, f2)``; with these two conventions the
shift and the cone are dg functors (checked in the tests).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exactalg import (
    QQ, ZZ, DimensionError, ExactMatrix, Ring, RingError, assemble, invariant_factors, inverse,
    lower, nullspace, permutation, rank, ring_from_json, solve,
)

__all__ = [
    "GradedComplex", "GradedMorphism", "HomotopyWitness", "TwoTerm", "ComplexError",
    "shift", "cone", "cone_morphism", "zero_complex", "direct_sum",
    "StrongDeformationRetract", "deformation_retract", "null_homotopy", "is_homotopy_equivalence",
    "homotopy_inverse", "homology", "nine_lemma_witness", "nine_lemma_matrix",
    "eta_cone_exact", "eta_cone_triple", "cone_rotation", "xi_zero_lemmas", "xi_zero_cone_lemmas",
    "zero_cone_contraction", "closed_morphism_space", "random_closed_morphism",
]


class ComplexError(ValueError):
    """Invalid complex or morphism data (inhomogeneous, open differential, mismatched ends)."""


# --------------------------------------------------------------------------
# complexes


class GradedComplex:
    __slots__ = ("ring", "grading", "degrees", "d", "_sdr")

    def __init__(self, ring: Ring, degrees: Sequence[int], d: ExactMatrix | None = None,
                 grading: str = "Z2", check: bool = True):
        if grading not in ("Z", "Z2"):
            raise ComplexError(f"grading must be 'Z' or 'Z2', got {grading!r}")
        self.ring = ring
        self.grading = grading
        self.degrees = tuple(int(e) % 2 if grading == "Z2" else int(e) for e in degrees)
        n = len(self.degrees)
        self.d = d if d is not None else ExactMatrix.zeros(ring, n, n)
        self._sdr = None
        if self.d.shape != (n, n):
            raise DimensionError(f"differential of shape {self.d.shape} on a rank-{n} complex")
        if self.d.ring is not ring:
            raise RingError("differential over the wrong ring")
        if check:
            if not _homogeneous(self.d.array, self.degrees, self.degrees, 1, grading):
                raise ComplexError("differential does not raise degree by one")
            if not (self.d @ self.d).is_zero():
                raise ComplexError("d∘d ≠ 0")

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def reduce(self, e: int) -> int:
        return e % 2 if self.grading == "Z2" else e

    def degree_set(self) -> list[int]:
        return sorted(set(self.degrees))

    def indices(self, e: int) -> list[int]:
        e = self.reduce(e)
        return [i for i, x in enumerate(self.degrees) if x == e]

    def ranks(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for e in self.degrees:
            out[e] = out.get(e, 0) + 1
        return dict(sorted(out.items()))

    def d_n(self, e: int) -> ExactMatrix:
        """The component d: degree e → degree e+1 (rows and columns in basis order)."""
        rows, cols = self.indices(e + 1), self.indices(e)
        return ExactMatrix(self.ring, self.d.array[np.ix_(rows, cols)], shape=(len(rows), len(cols)))

    def identity(self) -> "GradedMorphism":
        return GradedMorphism(self, self, 0, ExactMatrix.identity(self.ring, self.dim), check=False)

    def zero_map(self, target: "GradedComplex", k: int = 0) -> "GradedMorphism":
        return GradedMorphism(self, target, k, ExactMatrix.zeros(self.ring, target.dim, self.dim), check=False)

    def __eq__(self, other):
        if not isinstance(other, GradedComplex):
            return NotImplemented
        return (self.ring is other.ring and self.grading == other.grading
                and self.degrees == other.degrees and self.d == other.d)

    def __hash__(self):
        return hash((self.grading, self.degrees, hash(self.d)))

    def __repr__(self):
        return f"GradedComplex({self.grading}, {self.ring}, ranks={self.ranks()})"

    def content_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()[:16]

    # serialization: per-degree blocks with the basis sorted by degree ----------
    def to_json(self) -> dict:
        order = sorted(range(self.dim), key=lambda i: self.degrees[i])
        if self.grading == "Z2":
            degs = [0, 1]
            grading = "Z2"
        else:
            lo = min(self.degrees, default=0)
            hi = max(self.degrees, default=0)
            degs = list(range(lo, hi + 1))
            grading = {"Z": [lo, hi]}
        perm = self.permuted(order)
        ranks = [len(perm.indices(e)) for e in degs]
        maps = [perm.d_n(e).to_json() for e in (degs if self.grading == "Z2" else degs[:-1])]
        return {"grading": grading, "ring": self.ring.to_json(), "ranks": ranks, "d": maps}

    @classmethod
    def from_json(cls, data: dict, ring: Ring | None = None) -> "GradedComplex":
        ring = ring or ring_from_json(data["ring"])
        grading = data["grading"]
        ranks = [int(r) for r in data["ranks"]]
        maps = [ExactMatrix.from_json(m, ring) for m in data.get("d", [])]
        if grading == "Z2":
            if len(ranks) != 2 or len(maps) != 2:
                raise ComplexError("ℤ/2 complexes need two ranks and two maps")
            degs, mode = [0, 1], "Z2"
        else:
            lo, hi = grading["Z"]
            degs, mode = list(range(lo, hi + 1)), "Z"
            if len(ranks) != len(degs) or len(maps) != max(len(degs) - 1, 0):
                raise ComplexError("ranks/maps do not match the degree window")
        degrees = [e for e, r in zip(degs, ranks) for _ in range(r)]
        starts = np.cumsum([0] + ranks)
        D = np.array(ExactMatrix.zeros(ring, len(degrees), len(degrees)).array, copy=True)
        for t, m in enumerate(maps):
            src = t
            tgt = (t + 1) % 2 if mode == "Z2" else t + 1
            if m.shape != (ranks[tgt], ranks[src]):
                raise DimensionError(f"d_{degs[src]} has shape {m.shape}, expected {(ranks[tgt], ranks[src])}")
            D[starts[tgt]:starts[tgt + 1], starts[src]:starts[src + 1]] = m.array
        return cls(ring, degrees, ExactMatrix(ring, D), mode)

    def permuted(self, order: Sequence[int]) -> "GradedComplex":
        """The same complex with basis vectors listed in ``order``."""
        order = list(order)
        arr = self.d.array[np.ix_(order, order)]
        return GradedComplex(self.ring, [self.degrees[i] for i in order],
                             ExactMatrix(self.ring, arr, shape=(self.dim, self.dim)), self.grading, check=False)


def zero_complex(ring: Ring, grading: str = "Z2") -> GradedComplex:
    return GradedComplex(ring, [], None, grading)


def _homogeneous(arr: np.ndarray, tgt_deg, src_deg, k: int, grading: str) -> bool:
    if arr.size == 0:
        return True
    t = np.asarray(tgt_deg, dtype=np.int64).reshape(-1, 1)
    s = np.asarray(src_deg, dtype=np.int64).reshape(1, -1)
    allowed = (t - s - k)
    if grading == "Z2":
        allowed = allowed % 2
    return not np.any((arr != 0) & (allowed != 0))


def direct_sum(*parts: GradedComplex) -> GradedComplex:
    if not parts:
        raise ComplexError("empty direct sum")
    ring, grading = parts[0].ring, parts[0].grading
    from .exactalg import diag
    return GradedComplex(ring, [e for P in parts for e in P.degrees], diag(*(P.d for P in parts)), grading,
                         check=False)


# --------------------------------------------------------------------------
# morphisms


class GradedMorphism:
    __slots__ = ("source", "target", "degree", "matrix")

    def __init__(self, source: GradedComplex, target: GradedComplex, degree: int,
                 matrix: ExactMatrix, check: bool = True):
        self.source = source
        self.target = target
        self.degree = source.reduce(degree)
        self.matrix = matrix
        if matrix.shape != (target.dim, source.dim):
            raise DimensionError(f"morphism matrix {matrix.shape} between ranks {source.dim} -> {target.dim}")
        if check:
            if source.ring is not target.ring or matrix.ring is not source.ring:
                raise RingError("morphism between complexes over different rings")
            if source.grading != target.grading:
                raise ComplexError("morphism between differently graded complexes")
            if not _homogeneous(matrix.array, target.degrees, source.degrees, self.degree, source.grading):
                raise ComplexError(f"matrix is not homogeneous of degree {degree}")

    @property
    def ring(self) -> Ring:
        return self.source.ring

    def sign(self, k: int | None = None) -> int:
        k = self.degree if k is None else k
        return -1 if k % 2 else 1

    def differential(self) -> "GradedMorphism":
        """df = d∘f − (−1)^k f∘d."""
        m = self.target.d @ self.matrix - (self.matrix @ self.source.d) * self.sign()
        return GradedMorphism(self.source, self.target, self.degree + 1, m, check=False)

    def is_closed(self) -> bool:
        m = self.target.d @ self.matrix - (self.matrix @ self.source.d) * self.sign()
        return m.is_zero()

    def __matmul__(self, other: "GradedMorphism") -> "GradedMorphism":
        if other.target != self.source:
            raise ComplexError("composing morphisms with mismatched source/target")
        return GradedMorphism(other.source, self.target, self.degree + other.degree,
                              self.matrix @ other.matrix, check=False)

    def __add__(self, other: "GradedMorphism") -> "GradedMorphism":
        self._same_ends(other)
        return GradedMorphism(self.source, self.target, self.degree, self.matrix + other.matrix, check=False)

    def __sub__(self, other: "GradedMorphism") -> "GradedMorphism":
        self._same_ends(other)
        return GradedMorphism(self.source, self.target, self.degree, self.matrix - other.matrix, check=False)

    def __neg__(self):
        return GradedMorphism(self.source, self.target, self.degree, -self.matrix, check=False)

    def __mul__(self, c):
        return GradedMorphism(self.source, self.target, self.degree, self.matrix * c, check=False)

    __rmul__ = __mul__

    def _same_ends(self, other):
        if (self.source != other.source or self.target != other.target
                or self.degree != other.degree):
            raise ComplexError("adding morphisms with different ends or degrees")

    def __eq__(self, other):
        if not isinstance(other, GradedMorphism):
            return NotImplemented
        return (self.degree == other.degree and self.matrix == other.matrix
                and self.source == other.source and self.target == other.target)

    def __hash__(self):
        return hash((self.degree, hash(self.matrix)))

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def __repr__(self):
        return f"GradedMorphism(deg {self.degree}, {self.source.dim}->{self.target.dim})"

    def to_json(self) -> dict:
        return {"degree": self.degree, "source": self.source.content_hash(),
                "target": self.target.content_hash(), "matrix": self.matrix.to_json()}

    @classmethod
    def from_json(cls, data: dict, source: GradedComplex, target: GradedComplex) -> "GradedMorphism":
        if data.get("source") not in (None, source.content_hash()):
            raise ComplexError("morphism source hash does not match the supplied complex")
        if data.get("target") not in (None, target.content_hash()):
            raise ComplexError("morphism target hash does not match the supplied complex")
        return cls(source, target, int(data["degree"]), ExactMatrix.from_json(data["matrix"], source.ring))


def morphism(source: GradedComplex, target: GradedComplex, matrix: ExactMatrix, degree: int = 0) -> GradedMorphism:
    return GradedMorphism(source, target, degree, matrix)


__all__.append("morphism")


# --------------------------------------------------------------------------
# shift and cone


def shift(x, n: int = 1):
    """A[n] (degrees e ↦ e − n, d ↦ (−1)^n d), or f[n] = (−1)^{nk} f for a morphism."""
    if isinstance(x, GradedComplex):
        if n == 0:
            return x
        d = x.d * (-1) if n % 2 else x.d
        return GradedComplex(x.ring, [e - n for e in x.degrees], d, x.grading, check=False)
    if isinstance(x, GradedMorphism):
        m = x.matrix * (-1) if (n * x.degree) % 2 else x.matrix
        return GradedMorphism(shift(x.source, n), shift(x.target, n), x.degree, m, check=False)
    raise TypeError(f"cannot shift {type(x).__name__}")


@dataclass(frozen=True)
class TwoTerm:
    """An object (A1 --a1--> A2) with a closed degree-0 map."""

    a: GradedMorphism

    def __post_init__(self):
        if self.a.degree != 0 or not self.a.is_closed():
            raise ComplexError("a two-term object needs a closed degree-0 map")

    @property
    def first(self) -> GradedComplex:
        return self.a.source

    @property
    def second(self) -> GradedComplex:
        return self.a.target


def cone(a: GradedMorphism | TwoTerm) -> GradedComplex:
    """C(a) = A1[1] ⊕ A2 with d = 𝔟(−d, a, d)."""
    if isinstance(a, TwoTerm):
        a = a.a
    if a.degree != 0:
        raise ComplexError("cones are taken of degree-0 maps")
    if not a.is_closed():
        raise ComplexError("cone of a map that is not closed")
    A1, A2 = a.source, a.target
    d = lower(-A1.d, a.matrix, A2.d)
    return GradedComplex(A1.ring, [e - 1 for e in A1.degrees] + list(A2.degrees), d, A1.grading, check=False)


def cone_morphism(f1: GradedMorphism, h1: GradedMorphism, f2: GradedMorphism,
                  a: GradedMorphism, b: GradedMorphism) -> GradedMorphism:
    """C(f1, h1, f2): C(a) → C(b) for a morphism (f1, h1, f2) from (A1 →a A2) to (B1 →b B2)."""
    k = f1.degree
    first = f1.matrix * (-1) if k % 2 else f1.matrix
    return GradedMorphism(cone(a), cone(b), k, lower(first, h1.matrix, f2.matrix))


def two_term_differential(f1, h1, f2, a, b):
    """d(f1, h1, f2) = (df1, dh1 + (−1)^k (b f1 − f2 a), df2) in Mod(A_2)."""
    k = f1.degree
    s = -1 if k % 2 else 1
    dh = h1.differential() + ((b @ f1) - (f2 @ a)) * s
    return f1.differential(), dh, f2.differential()


__all__.append("two_term_differential")


# --------------------------------------------------------------------------
# deformation retracts, homotopy inverses, homology


@dataclass
class StrongDeformationRetract:
    """Data (ι, π, s) with πι = id, ds + sd = id − ιπ, onto a zero-differential complex H."""

    complex: GradedComplex
    homology: GradedComplex
    iota: ExactMatrix  # A.dim × H.dim
    pi: ExactMatrix    # H.dim × A.dim
    s: ExactMatrix     # degree −1 endomorphism of A


def deformation_retract(A: GradedComplex) -> StrongDeformationRetract:
    """Split A as H ⊕ im d ⊕ (a complement mapped isomorphically onto im d)."""
    if A._sdr is not None:
        return A._sdr
    ring = A.ring
    if not ring.is_field:
        raise RingError(f"homotopy decisions need field coefficients, not {ring}")
    n = A.dim
    Darr = A.d.array
    H_cols, dV_cols, V_cols = [], [], []  # lists of (vector, degree)
    for e in A.degree_set():
        src = A.indices(e)
        tgt = A.indices(e + 1)
        de = ExactMatrix(ring, Darr[np.ix_(tgt, src)], shape=(len(tgt), len(src)))
        # v's: pivot columns of d_e; their images span im d_e
        piv = _pivot_columns(de)
        for c in piv:
            v = np.array(ExactMatrix.zeros(ring, n, 1).array, copy=True)
            v[src[c], 0] = ring.normalize(1)
            V_cols.append(v)
            dV_cols.append(np.array((A.d @ ExactMatrix(ring, v)).array, copy=True))
    # homology representatives: complete im d ∩ (degree e) to a basis of ker d_e
    for e in A.degree_set():
        src = A.indices(e)
        tgt = A.indices(e + 1)
        de = ExactMatrix(ring, Darr[np.ix_(tgt, src)], shape=(len(tgt), len(src)))
        ker = nullspace(de)
        img_here = [v[src] for v in dV_cols if np.any(v[src] != 0)]
        base = np.concatenate(img_here, axis=1) if img_here else None
        current = base
        for c in range(ker.cols):
            cand = ker.array[:, c:c + 1]
            trial = cand if current is None else np.concatenate([current, cand], axis=1)
            if rank(ExactMatrix(ring, trial)) > (0 if current is None else current.shape[1]):
                current = trial
                full = np.array(ExactMatrix.zeros(ring, n, 1).array, copy=True)
                full[src, :] = cand
                H_cols.append((full, e))
    cols = [h for h, _ in H_cols] + dV_cols + V_cols
    if len(cols) != n:
        raise AssertionError("deformation retract: basis size mismatch")
    if n == 0:
        T = ExactMatrix.zeros(ring, 0, 0)
    else:
        T = ExactMatrix(ring, np.concatenate(cols, axis=1))
    Tinv = inverse(T) if n else T
    h, m = len(H_cols), len(dV_cols)
    iota = T[:, :h]
    pi = Tinv[:h, :]
    E = np.array(ExactMatrix.zeros(ring, n, n).array, copy=True)
    for t in range(m):
        E[h + m + t, h + t] = ring.normalize(1)
    s = T @ ExactMatrix(ring, E) @ Tinv if n else T
    Hc = GradedComplex(ring, [e for _, e in H_cols], None, A.grading, check=False)
    sdr = StrongDeformationRetract(A, Hc, iota, pi, s)
    A._sdr = sdr
    return sdr


def _pivot_columns(M: ExactMatrix) -> list[int]:
    if M.rows == 0 or M.cols == 0:
        return []
    from .exactalg import rref
    return rref(M)[1]


def null_homotopy(X: GradedMorphism) -> GradedMorphism | None:
    """A morphism Y of degree |X| − 1 with dY = X, or None when X is not null-homotopic.

    X must be closed.  Uses the deformation retracts of source and target:
    X = d(s_B X + (−1)^k ι_B π_B X s_A) whenever π_B X ι_A = 0.
    """
    A, B = X.source, X.target
    if not X.is_closed():
        raise ComplexError("only closed morphisms can be null-homotopic")
    sa, sb = deformation_retract(A), deformation_retract(B)
    if not (sb.pi @ X.matrix @ sa.iota).is_zero():
        return None
    k = X.degree
    Y2 = sb.iota @ sb.pi @ X.matrix @ sa.s
    Y = sb.s @ X.matrix + (Y2 * (-1) if k % 2 else Y2)
    out = GradedMorphism(A, B, k - 1, Y, check=False)
    return out


def induced_on_homology(f: GradedMorphism) -> ExactMatrix:
    return deformation_retract(f.target).pi @ f.matrix @ deformation_retract(f.source).iota


@dataclass
class HomotopyWitness:
    """f: X → Y, g: Y → X with d(xi_gf) = id − g∘f and d(xi_fg) = id − f∘g."""

    forward: GradedMorphism
    backward: GradedMorphism
    xi_gf: GradedMorphism
    xi_fg: GradedMorphism

    def verify(self) -> bool:
        f, g = self.forward, self.backward
        if f.degree != 0 or g.degree != 0:
            return False
        if f.source != g.target or f.target != g.source:
            return False
        if not (f.is_closed() and g.is_closed()):
            return False
        X, Y = f.source, f.target
        ok1 = self.xi_gf.differential().matrix == X.identity().matrix - (g @ f).matrix
        ok2 = self.xi_fg.differential().matrix == Y.identity().matrix - (f @ g).matrix
        return ok1 and ok2

    def inverse(self) -> "HomotopyWitness":
        return HomotopyWitness(self.backward, self.forward, self.xi_fg, self.xi_gf)


def _witness_from(f: GradedMorphism, g: GradedMorphism, xi_gf=None, xi_fg=None) -> HomotopyWitness | None:
    """Complete a pair of mutually inverse (up to homotopy) maps with homotopies."""
    X, Y = f.source, f.target
    if xi_gf is None:
        xi_gf = null_homotopy(X.identity() - g @ f)
    if xi_fg is None:
        xi_fg = null_homotopy(Y.identity() - f @ g)
    if xi_gf is None or xi_fg is None:
        return None
    return HomotopyWitness(f, g, xi_gf, xi_fg)


def homotopy_inverse(f: GradedMorphism) -> GradedMorphism | None:
    """ι_A H(f)⁻¹ π_B when f induces an isomorphism on homology, else None."""
    if f.degree != 0 or not f.is_closed():
        raise ComplexError("homotopy inverses are defined for closed degree-0 maps")
    sa, sb = deformation_retract(f.source), deformation_retract(f.target)
    Hf = sb.pi @ f.matrix @ sa.iota
    if Hf.rows != Hf.cols:
        return None
    if Hf.rows and rank(Hf) != Hf.rows:
        return None
    Hinv = inverse(Hf) if Hf.rows else Hf.T
    return GradedMorphism(f.target, f.source, 0, sa.iota @ Hinv @ sb.pi, check=False)


def is_homotopy_equivalence(f: GradedMorphism) -> HomotopyWitness | None:
    """A full witness (g, ξ_gf, ξ_fg) for a closed degree-0 map, or None if f is not an equivalence."""
    g = homotopy_inverse(f)
    if g is None:
        return None
    return _witness_from(f, g)


@dataclass
class HomologyGroup:
    rank: int
    torsion: tuple[int, ...] = ()


def homology(A: GradedComplex) -> dict[int, HomologyGroup]:
    """Betti numbers per degree; over ℤ also the torsion invariant factors."""
    ring = A.ring
    out: dict[int, HomologyGroup] = {}
    degs = A.degree_set() if A.grading == "Z" else [0, 1]
    for e in degs:
        d_out = A.d_n(e)
        d_in = A.d_n(e - 1)
        n_e = len(A.indices(e))
        if ring is ZZ:
            rk_out = rank(d_out.change_ring(QQ))
            rk_in = rank(d_in.change_ring(QQ))
            tors = tuple(f for f in invariant_factors(d_in) if abs(f) > 1) if d_in.rows and d_in.cols else ()
            out[e] = HomologyGroup(n_e - rk_out - rk_in, tors)
        else:
            if not ring.is_field:
                raise RingError(f"homology over {ring} is not supported")
            out[e] = HomologyGroup(n_e - rank(d_out) - rank(d_in))
    return out


def is_acyclic(A: GradedComplex) -> bool:
    return all(h.rank == 0 and not h.torsion for h in homology(A).values())


__all__ += ["HomologyGroup", "is_acyclic", "induced_on_homology"]


# --------------------------------------------------------------------------
# closed morphisms by linear algebra


def closed_morphism_space(A: GradedComplex, B: GradedComplex, k: int = 0) -> list[ExactMatrix]:
    """A basis of the closed homogeneous degree-k matrices A → B (over ℤ: integral kernel vectors)."""
    ring = A.ring
    work = QQ if ring is ZZ else ring
    pos = [(i, j) for i in range(B.dim) for j in range(A.dim)
           if B.reduce(B.degrees[i] - A.degrees[j] - k) == 0]
    if not pos:
        return []
    dA = A.d.change_ring(work) if ring is ZZ else A.d
    dB = B.d.change_ring(work) if ring is ZZ else B.d
    sign = -1 if k % 2 else 1
    n = B.dim * A.dim
    cols = np.empty((n, len(pos)), dtype=object if work.dtype is object else work.dtype)
    zero = work.normalize(0)
    cols[...] = zero
    dBa, dAa = dB.array, dA.array
    for t, (i, j) in enumerate(pos):
        M = np.zeros((B.dim, A.dim), dtype=cols.dtype)
        if cols.dtype == object:
            M[...] = zero
        M[:, j] = M[:, j] + dBa[:, i]
        M[i, :] = M[i, :] - sign * dAa[j, :]
        cols[:, t] = work.reduce_array(M).reshape(-1)
    K = nullspace(ExactMatrix(work, cols))
    out = []
    for c in range(K.cols):
        vec = K.array[:, c]
        if ring is ZZ:
            den = 1
            for v in vec:
                den = den * v.denominator // _gcd(den, v.denominator)
            vec = [int(v * den) for v in vec]
        M = np.array(ExactMatrix.zeros(ring, B.dim, A.dim).array, copy=True)
        for t, (i, j) in enumerate(pos):
            M[i, j] = ring.normalize(vec[t])
        out.append(ExactMatrix(ring, M))
    return out


def _gcd(a, b):
    import math
    return math.gcd(a, b)


def random_closed_morphism(A: GradedComplex, B: GradedComplex, rng, k: int = 0, coeff_range: int = 3) -> GradedMorphism:
    """A random combination of a basis of closed degree-k morphisms."""
    basis = closed_morphism_space(A, B, k)
    M = ExactMatrix.zeros(A.ring, B.dim, A.dim)
    for v in basis:
        c = int(rng.integers(-coeff_range, coeff_range + 1))
        if c:
            M = M + v * c
    return GradedMorphism(A, B, k, M, check=False)


# --------------------------------------------------------------------------
# lemma-level equivalences


def _id(X: GradedComplex) -> ExactMatrix:
    return ExactMatrix.identity(X.ring, X.dim)


def _z(rows: GradedComplex, cols: GradedComplex) -> ExactMatrix:
    return ExactMatrix.zeros(rows.ring, rows.dim, cols.dim)


def _grid(rows: Sequence[GradedComplex], cols: Sequence[GradedComplex], entries: dict) -> ExactMatrix:
    """Block matrix with explicit zero blocks sized by ``rows`` × ``cols``."""
    grid = [[entries.get((i, j), _z(R, C)) for j, C in enumerate(cols)] for i, R in enumerate(rows)]
    if not rows or not cols:
        ring = (rows or cols)[0].ring
        return ExactMatrix.zeros(ring, sum(R.dim for R in rows), sum(C.dim for C in cols))
    return assemble(grid)


def _lemma(f_src: GradedComplex, f_tgt: GradedComplex, f: ExactMatrix, g: ExactMatrix,
           xi: ExactMatrix | None) -> HomotopyWitness:
    """Package an explicit equivalence f with right inverse g and homotopy ξ (dξ = id − g f)."""
    F = GradedMorphism(f_src, f_tgt, 0, f)
    G = GradedMorphism(f_tgt, f_src, 0, g)
    if xi is None:
        xi_gf = f_src.zero_map(f_src, -1)
    else:
        xi_gf = GradedMorphism(f_src, f_src, -1, xi)
    xi_fg = f_tgt.zero_map(f_tgt, -1)
    return HomotopyWitness(F, G, xi_gf, xi_fg)


def eta_cone_exact(a1: GradedMorphism) -> tuple[HomotopyWitness, HomotopyWitness]:
    """η₁: C(A2 →𝔠(0,id) C(a1)) ≃ A1[1] and η₂: C(C(a1) →𝔯(id,0) A1[1]) ≃ A2[1].

    Each witness has ``forward = η``, ``backward = η′`` with η∘η′ = id and a
    homotopy for id − η′∘η supported on one identity block.
    """
    A1, A2 = a1.source, a1.target
    Ca = cone(a1)
    A1s, A2s = shift(A1, 1), shift(A2, 1)
    # η1 on C(A2 → C(a1)), blocks [A2[1], A1[1], A2]
    inc = GradedMorphism(A2, Ca, 0, _grid([A1s, A2], [A2], {(1, 0): _id(A2)}))
    X1 = cone(inc)
    rows1 = [A2s, A1s, A2]
    eta1 = _grid([A1s], rows1, {(0, 1): _id(A1)})
    eta1p = _grid(rows1, [A1s], {(0, 0): -a1.matrix, (1, 0): _id(A1)})
    h1 = _grid(rows1, rows1, {(0, 2): _id(A2)})
    w1 = _lemma(X1, A1s, eta1, eta1p, h1)
    # η2 on C(C(a1) → A1[1]), blocks [A1[2], A2[1], A1[1]]
    proj = GradedMorphism(Ca, A1s, 0, _grid([A1s], [A1s, A2], {(0, 0): _id(A1)}))
    X2 = cone(proj)
    A1ss = shift(A1, 2)
    rows2 = [A1ss, A2s, A1s]
    eta2 = _grid([A2s], rows2, {(0, 1): _id(A2), (0, 2): a1.matrix})
    eta2p = _grid(rows2, [A2s], {(1, 0): _id(A2)})
    h2 = _grid(rows2, rows2, {(0, 2): _id(A1)})
    w2 = _lemma(X2, A2s, eta2, eta2p, h2)
    return w1, w2


def eta_cone_triple(a1: GradedMorphism, a2: GradedMorphism) -> tuple[HomotopyWitness, HomotopyWitness]:
    """η₃: C(C(a1) →𝔡(id,a2) C(a2a1)) ≃ C(a2) and η₄: C(C(a2a1) →𝔡(a1,id) C(a2)) ≃ C(a1)[1].

    η₃′ and η₄′ are the 4×2 block columns.  In η₄ the first block of the
    forward map and of its inverse carry a sign −1 so that both are closed over
    rings where −1 ≠ 1; modulo 2 they are the plain identity blocks.
    """
    if a1.target != a2.source:
        raise ComplexError("a2 must start where a1 ends")
    A1, A2, A3 = a1.source, a1.target, a2.target
    a21 = a2 @ a1
    A1s, A2s, A3s = shift(A1, 1), shift(A2, 1), shift(A3, 1)
    A1ss = shift(A1, 2)
    C1, C2, C21 = cone(a1), cone(a2), cone(a21)
    # η3: blocks [A1[2], A2[1], A1[1], A3]
    m3 = GradedMorphism(C1, C21, 0, _grid([A1s, A3], [A1s, A2], {(0, 0): _id(A1), (1, 1): a2.matrix}))
    X3 = cone(m3)
    rows3 = [A1ss, A2s, A1s, A3]
    eta3 = _grid([A2s, A3], rows3, {(0, 1): _id(A2), (0, 2): a1.matrix, (1, 3): _id(A3)})
    eta3p = _grid(rows3, [A2s, A3], {(1, 0): _id(A2), (3, 1): _id(A3)})
    h3 = _grid(rows3, rows3, {(0, 2): _id(A1)})
    w3 = _lemma(X3, C2, eta3, eta3p, h3)
    # η4: blocks [A1[2], A3[1], A2[1], A3]
    m4 = GradedMorphism(C21, C2, 0, _grid([A2s, A3], [A1s, A3], {(0, 0): a1.matrix, (1, 1): _id(A3)}))
    X4 = cone(m4)
    rows4 = [A1ss, A3s, A2s, A3]
    C1s = shift(C1, 1)
    eta4 = _grid([A1ss, A2s], rows4, {(0, 0): -_id(A1), (1, 2): _id(A2)})
    eta4p = _grid(rows4, [A1ss, A2s], {(0, 0): -_id(A1), (1, 1): -a2.matrix, (2, 1): _id(A2)})
    h4 = _grid(rows4, rows4, {(1, 3): _id(A3)})
    w4 = _lemma(X4, C1s, eta4, eta4p, h4)
    return w3, w4


def cone_rotation(a1: GradedMorphism, a2: GradedMorphism) -> HomotopyWitness:
    """C(C(a2) →𝔠(0,id)∘𝔯(id,0) C(a1)[1]) ≃ C(a2∘a1)[1] for A1 →a1 A2 →a2 A3.

    The map C(a2) → C(a1)[1] projects onto A2[1] and includes it as the
    second block; blocks of the source cone are [A2[2], A3[1], A1[2], A2[1]].
    The equivalence is 𝔯-shaped: [[0,0,id,0],[0,id,0,a2]], with inverse
    [[a1,0],[0,id],[id,0],[0,0]] and homotopy id from the last block to the first.
    """
    if a1.target != a2.source:
        raise ComplexError("a2 must start where a1 ends")
    A1, A2, A3 = a1.source, a1.target, a2.target
    C2, C1 = cone(a2), cone(a1)
    C1s = shift(C1, 1)
    A2s, A3s = shift(A2, 1), shift(A3, 1)
    A1ss, A2ss = shift(A1, 2), shift(A2, 2)
    x = GradedMorphism(C2, C1s, 0, _grid([A1ss, A2s], [A2s, A3], {(1, 0): _id(A2)}))
    X = cone(x)
    rows = [A2ss, A3s, A1ss, A2s]
    T = shift(cone(a2 @ a1), 1)
    cols = [A1ss, A3s]
    f = _grid(cols, rows, {(0, 2): _id(A1), (1, 1): _id(A3), (1, 3): a2.matrix})
    g = _grid(rows, cols, {(0, 0): a1.matrix, (1, 1): _id(A3), (2, 0): _id(A1)})
    h = _grid(rows, rows, {(0, 3): _id(A2)})
    return _lemma(X, T, f, g, h)


def nine_lemma_matrix(sizes: Sequence[int], ring: Ring, signed: bool) -> ExactMatrix:
    """P(4,2,3) on blocks of the given sizes, optionally with the first block negated."""
    P = permutation(4, 2, 3, ring, sizes=list(sizes))
    if signed:
        s0 = sizes[0]
        D = ExactMatrix.identity(ring, sum(sizes))
        arr = np.array(D.array, copy=True)
        for t in range(s0):
            arr[t, t] = ring.normalize(-1)
        P = P @ ExactMatrix(ring, arr)
    return P


def nine_lemma_witness(f1: GradedMorphism, h1: GradedMorphism, f2: GradedMorphism,
                       a1: GradedMorphism, b1: GradedMorphism, signed: bool | None = None):
    """The isomorphism C(C(a1) →C(f) C(b1)) ≅ C(C(f1) →C(a1,−h1,b1) C(f2)).

    The square (f1, h1, f2) from (A1 →a1 A2) to (B1 →b1 B2) must be closed:
    dh1 = f2 a1 − b1 f1.  The isomorphism is P(4,2,3) with the A1[2] block
    negated (``signed=True``); modulo 2 this is the bare permutation, and with
    ``signed=None`` the sign is applied only when −1 ≠ 1.  Returns the witness
    (zero homotopies) and the two cones.
    """
    ring = a1.ring
    if f1.degree or f2.degree or h1.degree != f1.source.reduce(-1):
        raise ComplexError("the square must have degree-0 sides and a degree −1 diagonal")
    dh = h1.differential().matrix
    if dh != (f2 @ a1).matrix - (b1 @ f1).matrix:
        raise ComplexError("the square is not closed: dh1 ≠ f2∘a1 − b1∘f1")
    if signed is None:
        signed = ring.characteristic != 2
    left = cone(cone_morphism(f1, h1, f2, a1, b1))
    neg_h = GradedMorphism(h1.source, h1.target, h1.degree, -h1.matrix, check=False)
    right = cone(cone_morphism(a1, neg_h, b1, f1, f2))
    A1, A2, B1 = a1.source, a1.target, b1.source
    B2 = b1.target
    P = nine_lemma_matrix([A1.dim, A2.dim, B1.dim, B2.dim], ring, signed)
    Q = nine_lemma_matrix([A1.dim, B1.dim, A2.dim, B2.dim], ring, signed)
    Pm = GradedMorphism(left, right, 0, P)
    Pinv = GradedMorphism(right, left, 0, Q)
    w = HomotopyWitness(Pm, Pinv, left.zero_map(left, -1), right.zero_map(right, -1))
    return w, left, right


def zero_cone_contraction(A: GradedComplex) -> GradedMorphism:
    """The contraction 𝔪(0, id, 0, 0) of C(id_A): d of it is the identity."""
    Cid = cone(A.identity())
    As = shift(A, 1)
    return GradedMorphism(Cid, Cid, -1, _grid([As, A], [As, A], {(0, 1): _id(A)}))


def xi_zero_lemmas(a1: GradedMorphism, alpha: GradedMorphism | None = None,
                   b1: GradedMorphism | None = None, beta: GradedMorphism | None = None):
    """Cones of maps into / out of contractible objects.

    With dα = id on A2 = target of a1: C(a1) ≃ A1[1] via ξ₁ = 𝔯(id,0),
    ξ₁′ = 𝔠(id, −α∘a1), homotopy 𝔡(0, α).  With dβ = id on B1 = source of b1:
    C(b1) ≃ B2 via ξ₂ = 𝔯(b1∘β, id), ξ₂′ = 𝔠(0, id), homotopy 𝔡(−β, 0).
    Returns the witnesses that were requested (None for the others).
    """
    out1 = out2 = None
    if alpha is not None:
        A1, A2 = a1.source, a1.target
        if alpha.differential().matrix != _id(A2):
            raise ComplexError("dα ≠ id")
        A1s = shift(A1, 1)
        C = cone(a1)
        f = _grid([A1s], [A1s, A2], {(0, 0): _id(A1)})
        g = _grid([A1s, A2], [A1s], {(0, 0): _id(A1), (1, 0): -(alpha.matrix @ a1.matrix)})
        h = _grid([A1s, A2], [A1s, A2], {(1, 1): alpha.matrix})
        out1 = _lemma(C, A1s, f, g, h)
    if b1 is not None and beta is not None:
        B1, B2 = b1.source, b1.target
        if beta.differential().matrix != _id(B1):
            raise ComplexError("dβ ≠ id")
        B1s = shift(B1, 1)
        C = cone(b1)
        f = _grid([B2], [B1s, B2], {(0, 0): b1.matrix @ beta.matrix, (0, 1): _id(B2)})
        g = _grid([B1s, B2], [B2], {(1, 0): _id(B2)})
        h = _grid([B1s, B2], [B1s, B2], {(0, 0): -beta.matrix})
        out2 = _lemma(C, B2, f, g, h)
    return out1, out2


def xi_zero_cone_lemmas(x: GradedMorphism | None = None, y: GradedMorphism | None = None):
    """The zero-cone variants.

    ``x = 𝔠(x1, x2): A1 → C(id_{A2})`` gives C(x) ≃ A1[1] via 𝔯(id,0,0) and
    𝔠(id, −x2, 0); ``y = 𝔯(y1, y2): C(id_{A1}) → A2`` gives C(y) ≃ A2 via
    𝔯(0, y1, id) and 𝔠(0, 0, id).  Both come from :func:`xi_zero_lemmas` with
    the contraction 𝔪(0, id, 0, 0) of C(id).
    """
    w1 = w2 = None
    if x is not None:
        T = x.target
        n2 = T.dim // 2
        A2 = GradedComplex(T.ring, T.degrees[n2:], T.d[n2:, n2:], T.grading, check=False)
        if T != cone(A2.identity()):
            raise ComplexError("target of x is not C(id)")
        w1, _ = xi_zero_lemmas(x, alpha=zero_cone_contraction(A2))
    if y is not None:
        S = y.source
        n1 = S.dim // 2
        A1 = GradedComplex(S.ring, S.degrees[n1:], S.d[n1:, n1:], S.grading, check=False)
        if S != cone(A1.identity()):
            raise ComplexError("source of y is not C(id)")
        _, w2 = xi_zero_lemmas(y, b1=y, beta=zero_cone_contraction(A1))
    return w1, w2
