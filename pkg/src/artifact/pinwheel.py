"""Circle objects over the pinwheel skeleton, their normal form, monodromy and disk attachment.

Everything here lives in the ℤ/2-graded setting.  A complex A₁ together with
degree-1 endomorphisms f¹, …, f^{p−1} generates the *ladder*
``C(l_k∘f₁) = (A₁[1])^{k+1}`` whose differential is the simple matrix
𝔰(−d, f¹, …, f^k); its d² = 0 is exactly the tower of relations
df^i = Σ_{j<i} f^{i−j}∘f^j.

Block conventions: a column 𝔠(x¹, …, x^m) stacks blocks of ``dim A₁`` rows,
``l_m`` keeps the first m blocks, and a ladder of size m has its blocks in the
order of the column that generates it.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .complexes import (
    GradedComplex, GradedMorphism, cone, cone_morphism, eta_cone_exact, eta_cone_triple,
    is_acyclic, is_homotopy_equivalence, null_homotopy, random_closed_morphism, shift,
)
from .exactalg import ExactMatrix, Ring, Zmod, assemble, ring_from_json, simple_matrix
from .generators import _block_invertible, _inverse_of_product, random_contractible, rng_from_seed
from .quiver import (
    QuiverMorphism, QuiverObject, _flatten, _slots, _unflatten, chi, coxeter, restrict,
)

__all__ = [
    "PinwheelError", "ladder", "SimplifiedObject", "CirclePair", "CircleMorphism",
    "LocalSystemOnCircle", "LocMorphism", "DiskObject", "SphereMorphism", "sphere_object",
    "ReducedMorphism", "PinwheelObject", "PinwheelMorphism", "PinwheelReport",
    "monodromy_chain", "monodromy_composed", "monodromy_closed", "monodromy_morphism",
    "monodromy_morphism_chain", "simplify_step_S", "simplify_step_T", "simplify_full",
    "SimplificationStep", "Simplification", "reduce_morphism", "MorphismReduction",
    "attach_disk", "validate_pinwheel", "catalog_residuals", "morphism_algebra",
    "brute_force_search", "accepted_set", "SearchResult", "orbit_invariant",
    "random_simplified_object", "random_circle_pair", "random_reduced_morphism",
    "random_pinwheel_object", "random_pinwheel_morphism", "random_closed_circle_morphism",
    "hbar_sequence", "hbar_sequence_right", "extract_simplified", "TStepData", "decode_solution",
    "encode_object", "perturbation_census",
]


class PinwheelError(ValueError):
    """Data that does not have the shape or satisfy the relations a construction requires."""


# --------------------------------------------------------------------------
# small matrix helpers


def _require_z2(*complexes: GradedComplex) -> None:
    for X in complexes:
        if X.grading != "Z2":
            raise PinwheelError("pinwheel constructions are ℤ/2-graded")


def _mor(src: GradedComplex, tgt: GradedComplex, k: int, M: ExactMatrix) -> GradedMorphism:
    return GradedMorphism(src, tgt, k, M, check=False)


def _zeros(ring: Ring, rows: int, cols: int) -> ExactMatrix:
    return ExactMatrix.zeros(ring, rows, cols)


def _eye(ring: Ring, n: int) -> ExactMatrix:
    return ExactMatrix.identity(ring, n)


def _signed(M: ExactMatrix, k: int) -> ExactMatrix:
    """(−1)^k M."""
    return -M if k % 2 else M


def _dend(X: ExactMatrix, d_src: ExactMatrix, d_tgt: ExactMatrix, k: int) -> ExactMatrix:
    """Hom-complex differential d_tgt X − (−1)^k X d_src of a degree-k matrix."""
    return d_tgt @ X - _signed(X @ d_src, k)


def _column(blocks: Sequence[ExactMatrix], ring: Ring, cols: int) -> ExactMatrix:
    if not blocks:
        return _zeros(ring, 0, cols)
    return assemble([[b] for b in blocks])


def _blocks(M: ExactMatrix, r: int) -> list[ExactMatrix]:
    """Split a column of r-row blocks."""
    if r == 0:
        return []
    if M.rows % r:
        raise PinwheelError(f"a column of height {M.rows} does not split into blocks of {r}")
    return [M[t * r:(t + 1) * r, :] for t in range(M.rows // r)]


def _first(m: int, total: int, r: int, ring: Ring) -> ExactMatrix:
    """l_m: keep the first m of ``total`` blocks of size r."""
    return assemble([[_eye(ring, m * r), _zeros(ring, m * r, (total - m) * r)]]) if total else _zeros(ring, 0, 0)


def _corner(M: ExactMatrix, m: int, r: int) -> ExactMatrix:
    """b_m(M): the top-left m × m block corner."""
    return M[:m * r, :m * r]


def _simple(diag: ExactMatrix, below: Sequence[ExactMatrix], size: int) -> ExactMatrix:
    """𝔰(diag, below¹, …) truncated to ``size`` blocks."""
    if size == 0:
        return _zeros(diag.ring, 0, 0)
    return simple_matrix([diag] + list(below[:size - 1]))


def _dsum(*blocks: ExactMatrix) -> ExactMatrix:
    """𝔡(…) allowing empty blocks."""
    ring = blocks[0].ring
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = np.array(_zeros(ring, rows, cols).array, copy=True)
    r0 = c0 = 0
    for b in blocks:
        if b.rows and b.cols:
            out[r0:r0 + b.rows, c0:c0 + b.cols] = b.array
        r0 += b.rows
        c0 += b.cols
    return ExactMatrix(ring, out, shape=(rows, cols))


def _lower(x: ExactMatrix, h: ExactMatrix, y: ExactMatrix) -> ExactMatrix:
    """𝔟(x, h, y) allowing empty blocks."""
    ring = x.ring
    out = np.array(_zeros(ring, x.rows + y.rows, x.cols + y.cols).array, copy=True)
    if x.rows and x.cols:
        out[:x.rows, :x.cols] = x.array
    if h.rows and h.cols:
        out[x.rows:, :x.cols] = h.array
    if y.rows and y.cols:
        out[x.rows:, x.cols:] = y.array
    return ExactMatrix(ring, out, shape=(x.rows + y.rows, x.cols + y.cols))


def ladder(A1: GradedComplex, column: Sequence[ExactMatrix], size: int) -> GradedComplex:
    """The complex (A₁[1])^size with differential 𝔰(−d, column¹, …, column^{size−1})."""
    _require_z2(A1)
    if size < 0 or len(column) < size - 1:
        raise PinwheelError(f"a ladder of size {size} needs {size - 1} column blocks")
    sh = shift(A1, 1)
    if size == 0:
        return GradedComplex(A1.ring, [], _zeros(A1.ring, 0, 0), "Z2", check=False)
    return GradedComplex(A1.ring, list(sh.degrees) * size, _simple(sh.d, column, size), "Z2", check=False)


def _complex_json(X: GradedComplex) -> dict:
    return {"degrees": [int(e) % 2 for e in X.degrees], "d": X.d.to_json()}


def _complex_from_json(data: dict, ring: Ring) -> GradedComplex:
    return GradedComplex(ring, [int(e) for e in data["degrees"]], ExactMatrix.from_json(data["d"], ring), "Z2")


# --------------------------------------------------------------------------
# Loc(S¹), the disk gluing and the Loc(S²) fixture


class LocalSystemOnCircle:
    """A pair (X, m) with m a closed degree-0 endomorphism (the monodromy)."""

    def __init__(self, X: GradedComplex, m: ExactMatrix | GradedMorphism, check: bool = True):
        self.X = X
        self.m = m.matrix if isinstance(m, GradedMorphism) else m
        if check:
            if self.m.shape != (X.dim, X.dim):
                raise PinwheelError("monodromy has the wrong shape")
            if not _dend(self.m, X.d, X.d, 0).is_zero():
                raise PinwheelError("the monodromy is not closed")

    @property
    def ring(self) -> Ring:
        return self.X.ring

    def monodromy(self) -> GradedMorphism:
        return _mor(self.X, self.X, 0, self.m)

    def is_local_system(self) -> bool:
        """m closed and invertible up to homotopy (field coefficients)."""
        return _dend(self.m, self.X.d, self.X.d, 0).is_zero() and is_homotopy_equivalence(self.monodromy()) is not None

    def __eq__(self, other):
        if not isinstance(other, LocalSystemOnCircle):
            return NotImplemented
        return self.X == other.X and self.m == other.m

    def __hash__(self):
        return hash((self.X, self.m))

    def __repr__(self):
        return f"LocalSystemOnCircle(dim {self.X.dim})"


class LocMorphism:
    """A degree-k morphism (f, h) of Loc(S¹): f of degree k and h of degree k − 1."""

    def __init__(self, source: LocalSystemOnCircle, target: LocalSystemOnCircle, degree: int,
                 f: ExactMatrix, h: ExactMatrix):
        self.source, self.target = source, target
        self.degree = degree % 2
        self.f, self.h = f, h

    def differential(self) -> "LocMorphism":
        """d(f, h) = (df, dh + (−1)^k (n f − f m))."""
        k = self.degree
        A, B = self.source, self.target
        df = _dend(self.f, A.X.d, B.X.d, k)
        dh = _dend(self.h, A.X.d, B.X.d, k - 1) + _signed(B.m @ self.f - self.f @ A.m, k)
        return LocMorphism(A, B, k + 1, df, dh)

    def __matmul__(self, other: "LocMorphism") -> "LocMorphism":
        """(f′, h′)∘(f, h) = (f′f, f′h + (−1)^k h′f) with k = |(f, h)|."""
        k = other.degree
        return LocMorphism(other.source, self.target, self.degree + k, self.f @ other.f,
                           self.f @ other.h + _signed(self.h @ other.f, k))

    def __add__(self, other):
        return LocMorphism(self.source, self.target, self.degree, self.f + other.f, self.h + other.h)

    def __sub__(self, other):
        return LocMorphism(self.source, self.target, self.degree, self.f - other.f, self.h - other.h)

    def is_zero(self) -> bool:
        return self.f.is_zero() and self.h.is_zero()

    def is_closed(self) -> bool:
        return self.differential().is_zero()

    def __eq__(self, other):
        if not isinstance(other, LocMorphism):
            return NotImplemented
        return self.degree == other.degree and self.f == other.f and self.h == other.h

    def __hash__(self):
        return hash((self.degree, self.f))

    @classmethod
    def identity(cls, L: LocalSystemOnCircle) -> "LocMorphism":
        return cls(L, L, 0, _eye(L.ring, L.X.dim), _zeros(L.ring, L.X.dim, L.X.dim))


class DiskObject:
    """A local system on the boundary circle together with γ killing its monodromy: dγ = m − id.

    γ is stored as a degree-1 endomorphism; in the ℤ/2 grading this is the
    same as the degree −1 of the general disk gluing.
    """

    def __init__(self, loc: LocalSystemOnCircle, gamma: ExactMatrix):
        X = loc.X
        if gamma.shape != (X.dim, X.dim):
            raise PinwheelError("γ has the wrong shape")
        if _dend(gamma, X.d, X.d, 1) != loc.m - _eye(X.ring, X.dim):
            raise PinwheelError("γ does not satisfy dγ = m − id")
        self.loc = loc
        self.gamma = gamma

    @property
    def X(self) -> GradedComplex:
        return self.loc.X


def sphere_object(A: GradedComplex, gamma: ExactMatrix) -> DiskObject:
    """The Loc(S²) fixture: two disks glued along a circle with trivial monodromy.

    The data (A, γ) is accepted exactly when dγ = 0.
    """
    _require_z2(A)
    return DiskObject(LocalSystemOnCircle(A, _eye(A.ring, A.dim)), gamma)


class SphereMorphism:
    """A degree-k morphism (f, h) between Loc(S²) objects (h of degree k − 2 ≡ k)."""

    def __init__(self, source: DiskObject, target: DiskObject, degree: int, f: ExactMatrix, h: ExactMatrix):
        self.source, self.target = source, target
        self.degree = degree % 2
        self.f, self.h = f, h

    def differential(self) -> "SphereMorphism":
        """d(f, h) = (df, dh + γ′f − (−1)^k fγ); the boundary part of f is (f, 0)."""
        k = self.degree
        A, B = self.source, self.target
        df = _dend(self.f, A.X.d, B.X.d, k)
        dh = _dend(self.h, A.X.d, B.X.d, k) + B.gamma @ self.f - _signed(self.f @ A.gamma, k)
        return SphereMorphism(A, B, k + 1, df, dh)

    def __matmul__(self, other: "SphereMorphism") -> "SphereMorphism":
        k = other.degree
        return SphereMorphism(other.source, self.target, self.degree + k, self.f @ other.f,
                              self.f @ other.h + _signed(self.h @ other.f, k))

    def is_zero(self) -> bool:
        return self.f.is_zero() and self.h.is_zero()

    def __sub__(self, other):
        return SphereMorphism(self.source, self.target, self.degree, self.f - other.f, self.h - other.h)

    def __add__(self, other):
        return SphereMorphism(self.source, self.target, self.degree, self.f + other.f, self.h + other.h)


# --------------------------------------------------------------------------
# simplified objects and circle pairs


class SimplifiedObject:
    """A complex A₁ with degree-1 endomorphisms f¹, …, f^{p−1} (the normal form)."""

    def __init__(self, A1: GradedComplex, f: Sequence[ExactMatrix | GradedMorphism], check: bool = True):
        _require_z2(A1)
        self.A1 = A1
        self.f = tuple(x.matrix if isinstance(x, GradedMorphism) else x for x in f)
        if len(self.f) < 2:
            raise PinwheelError("a simplified object needs p ≥ 3, i.e. at least two f-components")
        if any(x.shape != (A1.dim, A1.dim) for x in self.f):
            raise PinwheelError("every f^i is an endomorphism of A₁")
        if check:
            bad = [i + 1 for i, R in enumerate(self.relation_residuals()) if not R.is_zero()]
            if bad:
                raise PinwheelError(f"df^i ≠ Σ f^(i−j) f^j for i in {bad}")

    @property
    def p(self) -> int:
        return len(self.f) + 1

    @property
    def ring(self) -> Ring:
        return self.A1.ring

    @property
    def rank(self) -> int:
        return self.A1.dim

    def fi(self, i: int) -> ExactMatrix:
        return self.f[i - 1]

    def relation_residuals(self) -> list[ExactMatrix]:
        """df^i − Σ_{j<i} f^{i−j} f^j for i = 1, …, p − 1."""
        d = self.A1.d
        out = []
        for i in range(1, self.p):
            acc = _dend(self.fi(i), d, d, 1)
            for j in range(1, i):
                acc = acc - self.fi(i - j) @ self.fi(j)
            out.append(acc)
        return out

    def ladder(self, size: int) -> GradedComplex:
        return ladder(self.A1, self.f, size)

    def f1(self) -> GradedMorphism:
        """f₁ = 𝔠(f¹, …, f^{p−1}) as a degree-0 map A₁ → C(l_{p−2}∘f₁)."""
        return _mor(self.A1, self.ladder(self.p - 1), 0, _column(self.f, self.ring, self.rank))

    def is_homotopy_equivalence(self) -> bool:
        """f₁ is a homotopy equivalence iff its cone is acyclic."""
        return is_acyclic(cone(self.f1()))

    def monodromy(self) -> LocalSystemOnCircle:
        return monodromy_closed(self)

    def embed(self) -> "CirclePair":
        """The circle pair with vertices A₁, C(l_{p−3}f₁), …, A₁[1] and f = (f₁, id, …, id)."""
        p, r, ring = self.p, self.rank, self.ring
        V = [self.A1] + [self.ladder(p - j) for j in range(2, p)]
        maps = [_mor(V[0], V[1], 0, _column(self.f[:p - 2], ring, r))]
        for j in range(2, p - 1):
            maps.append(_mor(V[j - 1], V[j], 0, _first(p - j - 1, p - j, r, ring)))
        A = QuiverObject(V, maps, check=False)
        cA = coxeter(A)
        fs = [_mor(V[0], cA.A(1), 0, _column(self.f, ring, r))]
        fs += [_mor(V[j - 1], cA.A(j), 0, _eye(ring, V[j - 1].dim)) for j in range(2, p)]
        hs = [_mor(V[j - 1], cA.A(j + 1), -1, _zeros(ring, cA.A(j + 1).dim, V[j - 1].dim)) for j in range(1, p - 1)]
        return CirclePair(A, QuiverMorphism(A, cA, 0, fs, hs, check=False), check=False)

    def __eq__(self, other):
        if not isinstance(other, SimplifiedObject):
            return NotImplemented
        return self.A1 == other.A1 and self.f == other.f

    def __hash__(self):
        return hash((self.A1, self.f))

    def __repr__(self):
        return f"SimplifiedObject(p={self.p}, rank={self.rank}, {self.ring})"

    def to_json(self) -> dict:
        return {"type": "simplified", "p": self.p, "ring": self.ring.to_json(),
                "complex": _complex_json(self.A1), "f": [x.to_json() for x in self.f]}

    @classmethod
    def from_json(cls, data: dict) -> "SimplifiedObject":
        ring = ring_from_json(data["ring"])
        A1 = _complex_from_json(data["complex"], ring)
        f = [ExactMatrix.from_json(x, ring) for x in data["f"]]
        if "p" in data and int(data["p"]) != len(f) + 1:
            raise PinwheelError("p does not match the number of f-components")
        return cls(A1, f)


class CirclePair:
    """A quiver object A (n = p) with a closed degree-0 map f: A → c(A) that is a slotwise h.e."""

    def __init__(self, A: QuiverObject, f: QuiverMorphism, check: bool = True):
        _require_z2(*A.complexes)
        self.A, self.f = A, f
        if check:
            problems = self.problems()
            if problems:
                raise PinwheelError("; ".join(problems))

    @property
    def p(self) -> int:
        return self.A.n

    @property
    def ring(self) -> Ring:
        return self.A.ring

    @property
    def target(self) -> QuiverObject:
        t = getattr(self, "_target", None)
        if t is None:
            t = self._target = coxeter(self.A)
        return t

    def problems(self, homotopy: bool = True) -> list[str]:
        out = []
        if self.f.source != self.A:
            out.append("f does not start at A")
        if self.f.target != self.target:
            out.append("f does not land in c(A)")
        if self.f.degree != 0:
            out.append("f is not of degree 0")
        if out:
            return out
        if not self.f.is_closed():
            out.append("f is not closed")
        elif homotopy:
            for i, fi in enumerate(self.f.f, start=1):
                if is_homotopy_equivalence(fi) is None:
                    out.append(f"f_{i} is not a homotopy equivalence")
        return out

    def is_valid(self, homotopy: bool = True) -> bool:
        return not self.problems(homotopy)

    def __eq__(self, other):
        if not isinstance(other, CirclePair):
            return NotImplemented
        return self.A == other.A and self.f == other.f

    def __hash__(self):
        return hash(self.A)

    def __repr__(self):
        return f"CirclePair(p={self.p}, ranks={self.A.ranks()})"

    def to_json(self) -> dict:
        return {"type": "circle_pair", "p": self.p, "ring": self.ring.to_json(),
                "vertices": [_complex_json(X) for X in self.A.complexes],
                "maps": [a.matrix.to_json() for a in self.A.maps],
                "f": [x.matrix.to_json() for x in self.f.f],
                "h": [x.matrix.to_json() for x in self.f.h]}

    @classmethod
    def from_json(cls, data: dict) -> "CirclePair":
        ring = ring_from_json(data["ring"])
        V = [_complex_from_json(x, ring) for x in data["vertices"]]
        if len(V) < 2:
            raise PinwheelError("a circle pair needs p − 1 ≥ 2 vertices")
        maps = [GradedMorphism(V[i], V[i + 1], 0, ExactMatrix.from_json(m, ring)) for i, m in enumerate(data["maps"])]
        A = QuiverObject(V, maps)
        cA = coxeter(A)
        fs = [GradedMorphism(V[i], cA.complexes[i], 0, ExactMatrix.from_json(m, ring))
              for i, m in enumerate(data["f"])]
        hs = [GradedMorphism(V[i], cA.complexes[i + 1], -1, ExactMatrix.from_json(m, ring))
              for i, m in enumerate(data["h"])]
        return cls(A, QuiverMorphism(A, cA, 0, fs, hs))


class CircleMorphism:
    """A degree-k morphism (α, β) of circle pairs: α: A → B of degree k, β: A → c(B) of degree k − 1."""

    def __init__(self, source: CirclePair, target: CirclePair, degree: int,
                 alpha: QuiverMorphism, beta: QuiverMorphism):
        self.source, self.target = source, target
        self.degree = degree % 2
        self.alpha, self.beta = alpha, beta

    def differential(self) -> "CircleMorphism":
        """d(α, β) = (dα, dβ + (−1)^k (g∘α − c(α)∘f))."""
        k = self.degree
        extra = (self.target.f @ self.alpha) - (coxeter(self.alpha) @ self.source.f)
        dbeta = self.beta.differential() + (extra if k % 2 == 0 else -extra)
        return CircleMorphism(self.source, self.target, k + 1, self.alpha.differential(), dbeta)

    def __matmul__(self, other: "CircleMorphism") -> "CircleMorphism":
        """(α′, β′)∘(α, β) = (α′α, c(α′)β + (−1)^k β′α)."""
        k = other.degree
        t = self.beta @ other.alpha
        beta = coxeter(self.alpha) @ other.beta + (t if k % 2 == 0 else -t)
        return CircleMorphism(other.source, self.target, self.degree + k, self.alpha @ other.alpha, beta)

    def __add__(self, other):
        return CircleMorphism(self.source, self.target, self.degree, self.alpha + other.alpha, self.beta + other.beta)

    def __sub__(self, other):
        return CircleMorphism(self.source, self.target, self.degree, self.alpha - other.alpha, self.beta - other.beta)

    def is_zero(self) -> bool:
        return self.alpha.is_zero() and self.beta.is_zero()

    def is_closed(self) -> bool:
        return self.differential().is_zero()

    def is_homotopy_equivalence(self) -> bool:
        """Closed of degree 0 with every α_i a homotopy equivalence."""
        return (self.degree == 0 and self.is_closed()
                and all(is_homotopy_equivalence(a) is not None for a in self.alpha.f))

    def __eq__(self, other):
        if not isinstance(other, CircleMorphism):
            return NotImplemented
        return self.degree == other.degree and self.alpha == other.alpha and self.beta == other.beta

    def __hash__(self):
        return hash(self.alpha)


def _zero_quiver_morphism(A: QuiverObject, B: QuiverObject, k: int) -> QuiverMorphism:
    layout = _slots(A, B, k)
    return _unflatten(A, B, k, layout, [0] * sum(len(p) for _, _, p in layout))


# --------------------------------------------------------------------------
# monodromy


def monodromy_chain(pair: CirclePair) -> list[tuple[str, ExactMatrix]]:
    """The factors of the composed monodromy in the order they are applied.

    f₁, 𝔟(f₁,h₁,f₂), η_{3,1}, 𝔟(f₂,h₂,f₃), …, η_{3,p−3}, 𝔟(f_{p−2},h_{p−2},f_{p−1}), η₂, f_{p−1}:
    p factor morphisms and p − 2 cone corrections.
    """
    A, cA, f = pair.A, pair.target, pair.f
    p = pair.p
    out = [("f_1", f.fi(1).matrix)]
    for i in range(1, p - 1):
        b = cone_morphism(f.fi(i), f.hi(i), f.fi(i + 1), A.a(i), cA.a(i))
        out.append((f"b(f_{i},h_{i},f_{i + 1})", b.matrix))
        if i <= p - 3:
            out.append((f"eta3_{i}", eta_cone_triple(A.abar(1, i + 1), A.a(i + 1))[0].forward.matrix))
        else:
            out.append(("eta2", eta_cone_exact(A.abar(1, p - 1))[1].forward.matrix))
    out.append((f"f_{p - 1}", f.fi(p - 1).matrix))
    return out


def monodromy_composed(pair: CirclePair) -> LocalSystemOnCircle:
    """Transport once around the core circle by composing the chain of :func:`monodromy_chain`."""
    A1 = pair.A.A(1)
    M = _eye(pair.ring, A1.dim)
    for _, F in monodromy_chain(pair):
        M = F @ M
    return LocalSystemOnCircle(A1, M)


def monodromy_closed(obj: SimplifiedObject) -> LocalSystemOnCircle:
    """m = Σ_{j=1}^{p−1} f^{p−j}∘f^j."""
    p = obj.p
    M = _zeros(obj.ring, obj.rank, obj.rank)
    for j in range(1, p):
        M = M + obj.fi(p - j) @ obj.fi(j)
    return LocalSystemOnCircle(obj.A1, M)


# --------------------------------------------------------------------------
# reduced morphisms of simplified objects


class ReducedMorphism:
    """A degree-k morphism (α₁, β¹, …, β^{p−1}) between simplified objects."""

    def __init__(self, source: SimplifiedObject, target: SimplifiedObject, degree: int,
                 alpha: ExactMatrix, beta: Sequence[ExactMatrix]):
        if source.p != target.p:
            raise PinwheelError("morphism between simplified objects with different p")
        beta = tuple(beta)
        if len(beta) != source.p - 1:
            raise PinwheelError(f"expected {source.p - 1} β-components, got {len(beta)}")
        self.source, self.target = source, target
        self.degree = degree % 2
        self.alpha, self.beta = alpha, beta

    @property
    def p(self) -> int:
        return self.source.p

    def bi(self, i: int) -> ExactMatrix:
        return self.beta[i - 1]

    def differential(self) -> "ReducedMorphism":
        """(dα₁, −dβ^i + (−1)^k(g^i α₁ − α₁ f^i) + Σ_{j<i}(g^j β^{i−j} − (−1)^k β^{i−j} f^j))."""
        k, A, B = self.degree, self.source, self.target
        dA, dB = A.A1.d, B.A1.d
        da = _dend(self.alpha, dA, dB, k)
        out = []
        for i in range(1, self.p):
            acc = -_dend(self.bi(i), dA, dB, k) + _signed(B.fi(i) @ self.alpha - self.alpha @ A.fi(i), k)
            for j in range(1, i):
                acc = acc + B.fi(j) @ self.bi(i - j) - _signed(self.bi(i - j) @ A.fi(j), k)
            out.append(acc)
        return ReducedMorphism(A, B, k + 1, da, out)

    def __matmul__(self, other: "ReducedMorphism") -> "ReducedMorphism":
        """(α′α, α′β^i + (−1)^k β′^i α + Σ_{j<i} β′^{i−j} β^j) with k = |other|."""
        k = other.degree
        out = []
        for i in range(1, self.p):
            acc = self.alpha @ other.bi(i) + _signed(self.bi(i) @ other.alpha, k)
            for j in range(1, i):
                acc = acc + self.bi(i - j) @ other.bi(j)
            out.append(acc)
        return ReducedMorphism(other.source, self.target, self.degree + k, self.alpha @ other.alpha, out)

    def __add__(self, other):
        return ReducedMorphism(self.source, self.target, self.degree, self.alpha + other.alpha,
                               [x + y for x, y in zip(self.beta, other.beta)])

    def __sub__(self, other):
        return ReducedMorphism(self.source, self.target, self.degree, self.alpha - other.alpha,
                               [x - y for x, y in zip(self.beta, other.beta)])

    def is_zero(self) -> bool:
        return self.alpha.is_zero() and all(b.is_zero() for b in self.beta)

    def __eq__(self, other):
        if not isinstance(other, ReducedMorphism):
            return NotImplemented
        return self.degree == other.degree and self.alpha == other.alpha and self.beta == other.beta

    def __hash__(self):
        return hash((self.degree, self.alpha))

    @classmethod
    def identity(cls, X: SimplifiedObject) -> "ReducedMorphism":
        z = _zeros(X.ring, X.rank, X.rank)
        return cls(X, X, 0, _eye(X.ring, X.rank), [z] * (X.p - 1))

    @classmethod
    def zero(cls, A: SimplifiedObject, B: SimplifiedObject, degree: int = 0) -> "ReducedMorphism":
        z = _zeros(A.ring, B.rank, A.rank)
        return cls(A, B, degree, z, [z] * (A.p - 1))

    def embed(self, source: CirclePair | None = None, target: CirclePair | None = None) -> CircleMorphism:
        """The circle morphism (α″, β″) with α″ = (α₁, 𝔰(α₁, β¹, …), …, α₁), h₁ = 𝔠(β¹…β^{p−2}), β″₁ = 𝔠(β)."""
        A = source or self.source.embed()
        B = target or self.target.embed()
        p, ring = self.p, self.source.ring
        ra = self.source.rank
        k = self.degree
        fs = [_mor(A.A.A(1), B.A.A(1), k, self.alpha)]
        for j in range(2, p):
            size = p - j
            fs.append(_mor(A.A.A(j), B.A.A(j), k, _simple(self.alpha, self.beta, size)))
        hs = []
        for j in range(1, p - 1):
            S, T = A.A.A(j), B.A.A(j + 1)
            M = _column(self.beta[:p - 2], ring, ra) if j == 1 else _zeros(ring, T.dim, S.dim)
            hs.append(_mor(S, T, k - 1, M))
        alpha = QuiverMorphism(A.A, B.A, k, fs, hs, check=False)
        cB = B.target
        bf = [_mor(A.A.A(1), cB.A(1), k - 1, _column(self.beta, ring, ra))]
        bf += [_mor(A.A.A(j), cB.A(j), k - 1, _zeros(ring, cB.A(j).dim, A.A.A(j).dim)) for j in range(2, p)]
        bh = [_mor(A.A.A(j), cB.A(j + 1), k, _zeros(ring, cB.A(j + 1).dim, A.A.A(j).dim)) for j in range(1, p - 1)]
        beta = QuiverMorphism(A.A, cB, k - 1, bf, bh, check=False)
        return CircleMorphism(A, B, k, alpha, beta)


def monodromy_morphism(mu: ReducedMorphism) -> LocMorphism:
    """𝒎(α, β) = (α₁, Σ_j g^j β^{p−j} − (−1)^k Σ_j β^{p−j} f^j)."""
    k, p = mu.degree, mu.p
    A, B = mu.source, mu.target
    h = _zeros(A.ring, B.rank, A.rank)
    for j in range(1, p):
        h = h + B.fi(j) @ mu.bi(p - j) - _signed(mu.bi(p - j) @ A.fi(j), k)
    return LocMorphism(monodromy_closed(A), monodromy_closed(B), k, mu.alpha, h)


def monodromy_morphism_chain(mu: CircleMorphism) -> LocMorphism:
    """Extend (α, β) along the monodromy chains and compose the diagonals.

    The squares are: (α₁ | β₁ | c(α)₁) over f₁; (j_{i+1}(c(α)) | j_{i+1}(β)) over
    𝔟(f_i, h_i, f_{i+1}); the adjusting-lemma diagonals
    ξ = (−1)^k η(g)∘j(c(α))∘ζ(f) over η_{3,i} and η₂, where ζ = −(the
    explicit homotopy with dζ = η′η − id); and (c(α)_{p−1}[1] | β_{p−1}[1]) over
    f_{p−1}[1].  Horizontal composition sums (bottom chain after)∘diagonal∘(top chain before).
    """
    S, T = mu.source, mu.target
    k = mu.degree
    p = S.p
    A, cA, f = S.A, S.target, S.f
    B, cB, g = T.A, T.target, T.f
    ca = coxeter(mu.alpha)
    top, bottom, diag = [], [], []
    top.append(f.fi(1).matrix)
    bottom.append(g.fi(1).matrix)
    diag.append(mu.beta.fi(1).matrix)
    for i in range(1, p - 1):
        top.append(cone_morphism(f.fi(i), f.hi(i), f.fi(i + 1), A.a(i), cA.a(i)).matrix)
        bottom.append(cone_morphism(g.fi(i), g.hi(i), g.fi(i + 1), B.a(i), cB.a(i)).matrix)
        diag.append(restrict(mu.beta, i + 1))
        diag[-1] = diag[-1].matrix
        vert = restrict(ca, i + 1).matrix
        if i <= p - 3:
            wf = eta_cone_triple(A.abar(1, i + 1), A.a(i + 1))[0]
            wg = eta_cone_triple(B.abar(1, i + 1), B.a(i + 1))[0]
        else:
            wf = eta_cone_exact(A.abar(1, p - 1))[1]
            wg = eta_cone_exact(B.abar(1, p - 1))[1]
        zeta = -wf.xi_gf.matrix
        top.append(wf.forward.matrix)
        bottom.append(wg.forward.matrix)
        diag.append(_signed(wg.forward.matrix @ vert @ zeta, k))
    top.append(f.fi(p - 1).matrix)
    bottom.append(g.fi(p - 1).matrix)
    diag.append(_signed(mu.beta.fi(p - 1).matrix, k - 1))
    ring = S.ring
    total = _zeros(ring, T.A.A(1).dim, S.A.A(1).dim)
    for t, D in enumerate(diag):
        left = _eye(ring, S.A.A(1).dim)
        for F in top[:t]:
            left = F @ left
        M = D @ left
        for G in bottom[t + 1:]:
            M = G @ M
        total = total + M
    return LocMorphism(monodromy_composed(S), monodromy_composed(T), k, mu.alpha.fi(1).matrix, total)


# --------------------------------------------------------------------------
# pinwheel objects and morphisms


class PinwheelObject:
    """(A₁, f¹, …, f^p, g^{ij}): a module over the algebra with generators x_i ↔ f^i, y_ij ↔ g^{ij}."""

    def __init__(self, A1: GradedComplex, f: Sequence[ExactMatrix], g: dict | Sequence[Sequence[ExactMatrix]]):
        _require_z2(A1)
        self.A1 = A1
        self.f = tuple(f)
        p = len(self.f)
        if p < 1:
            raise PinwheelError("a pinwheel object needs at least one f-component")
        if isinstance(g, dict):
            self.g = {(int(i), int(j)): M for (i, j), M in g.items()}
        else:
            self.g = {(i + 1, j + 1): M for i, rw in enumerate(g) for j, M in enumerate(rw)}
        if set(self.g) != {(i, j) for i in range(1, p + 1) for j in range(1, p + 1)}:
            raise PinwheelError("g must have one component for each 1 ≤ i, j ≤ p")
        shape = (A1.dim, A1.dim)
        if any(M.shape != shape for M in self.f) or any(M.shape != shape for M in self.g.values()):
            raise PinwheelError("every f^i and g^{ij} is an endomorphism of A₁")

    @property
    def p(self) -> int:
        return len(self.f)

    @property
    def ring(self) -> Ring:
        return self.A1.ring

    @property
    def rank(self) -> int:
        return self.A1.dim

    def fi(self, i: int) -> ExactMatrix:
        return self.f[i - 1]

    def simplified(self) -> SimplifiedObject:
        return SimplifiedObject(self.A1, self.f[:-1], check=False)

    def __eq__(self, other):
        if not isinstance(other, PinwheelObject):
            return NotImplemented
        return self.A1 == other.A1 and self.f == other.f and self.g == other.g

    def __hash__(self):
        return hash((self.A1, self.f))

    def __repr__(self):
        return f"PinwheelObject(p={self.p}, rank={self.rank}, {self.ring})"

    def to_json(self) -> dict:
        p = self.p
        return {"type": "pinwheel", "p": p, "ring": self.ring.to_json(), "complex": _complex_json(self.A1),
                "f": [x.to_json() for x in self.f],
                "g": [[self.g[i, j].to_json() for j in range(1, p + 1)] for i in range(1, p + 1)]}

    @classmethod
    def from_json(cls, data: dict) -> "PinwheelObject":
        ring = ring_from_json(data["ring"])
        A1 = _complex_from_json(data["complex"], ring)
        f = [ExactMatrix.from_json(x, ring) for x in data["f"]]
        g = [[ExactMatrix.from_json(x, ring) for x in rw] for rw in data["g"]]
        if len(g) != len(f) or any(len(rw) != len(f) for rw in g):
            raise PinwheelError("g must be a p × p grid")
        if "p" in data and int(data["p"]) != len(f):
            raise PinwheelError("p does not match the number of f-components")
        return cls(A1, f, g)


@dataclass
class PinwheelReport:
    """Exact residuals per relation; keys are ``("d2",)``, ``("f", i)`` and ``("g", i, j)``."""

    residuals: dict
    catalog_consistent: bool | None = None

    @property
    def failures(self) -> list[tuple]:
        return [key for key, R in self.residuals.items() if not R.is_zero()]

    @property
    def families(self) -> set[str]:
        return {key[0] for key in self.failures}

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        return {"ok": self.ok, "failures": [list(k) for k in self.failures],
                "catalog_consistent": self.catalog_consistent}


def _relation_residuals(obj: PinwheelObject) -> dict:
    d, ring, n, p = obj.A1.d, obj.ring, obj.rank, obj.p
    I = _eye(ring, n)
    res = {("d2",): d @ d}
    for i in range(1, p + 1):
        acc = _dend(obj.fi(i), d, d, 1) + (I if i == p else _zeros(ring, n, n))
        for j in range(1, i):
            acc = acc - obj.fi(i - j) @ obj.fi(j)
        res[("f", i)] = acc
    for i in range(1, p + 1):
        for j in range(1, p + 1):
            acc = _dend(obj.g[i, j], d, d, 1) - (I if i == j else _zeros(ring, n, n))
            for k in range(1, i):
                acc = acc - obj.fi(i - k) @ obj.g[k, j]
            for k in range(j + 1, p + 1):
                acc = acc - obj.g[i, k] @ obj.fi(k - j)
            res[("g", i, j)] = acc
    return res


def catalog_residuals(obj: PinwheelObject) -> dict[str, ExactMatrix]:
    """d(generator) − (catalog differential evaluated at x_i ↦ f^i, y_ij ↦ g^{ij}) per generator."""
    from .catalog import build_A
    from .freedga import parse_key

    A = build_A(obj.p, obj.ring)
    d, n = obj.A1.d, obj.rank
    value = {}
    for key in A.keys:
        fam, idx = parse_key(key)
        value[key] = obj.fi(idx[0]) if fam == "x" else obj.g[idx]
    out = {}
    for key in A.keys:
        acc = _zeros(obj.ring, n, n)
        for word, c in A.d[key].terms.items():
            M = _eye(obj.ring, n)
            for w in word:
                M = M @ value[w]
            acc = acc + M * c
        out[key] = _dend(value[key], d, d, 1) - acc
    return out


def validate_pinwheel(obj: PinwheelObject, catalog: bool = True) -> PinwheelReport:
    """Exact residuals of d² = 0, the f-tower and the g-grid; optionally cross-checked against the catalog."""
    res = _relation_residuals(obj)
    report = PinwheelReport(res)
    if catalog:
        cat = catalog_residuals(obj)
        mine = {}
        for (fam, *idx), R in res.items():
            if fam == "f":
                mine[f"x[{idx[0]}]"] = R
            elif fam == "g":
                mine[f"y[{idx[0]},{idx[1]}]"] = R
        report.catalog_consistent = set(cat) == set(mine) and all(cat[k] == mine[k] for k in cat)
    return report


def attach_disk(obj: SimplifiedObject, gamma: ExactMatrix | None = None) -> PinwheelObject:
    """Kill the monodromy: f^p := γ with dγ = m − id, and g^{ij} := −v^i ε u^j for a contraction ε of C(f₁).

    With ``gamma`` omitted a solution of dγ = m − id is computed (field coefficients).
    """
    A1, ring, n, p = obj.A1, obj.ring, obj.rank, obj.p
    m = monodromy_closed(obj).m
    target = m - _eye(ring, n)
    if gamma is None:
        sol = null_homotopy(_mor(A1, A1, 0, target))
        if sol is None:
            raise PinwheelError("the monodromy is not homotopic to the identity")
        gamma = sol.matrix
    if _dend(gamma, A1.d, A1.d, 1) != target:
        raise PinwheelError("γ does not satisfy dγ = m − id")
    C = cone(obj.f1())
    eps = null_homotopy(C.identity())
    if eps is None:
        raise PinwheelError("f₁ is not a homotopy equivalence: C(f₁) is not contractible")
    E = eps.matrix
    g = {}
    for i in range(1, p + 1):
        for j in range(1, p + 1):
            g[i, j] = -E[(i - 1) * n:i * n, (j - 1) * n:j * n]
    return PinwheelObject(A1, list(obj.f) + [gamma], g)


class PinwheelMorphism:
    """A degree-k morphism (α₁, β¹, …, β^p) of pinwheel objects."""

    def __init__(self, source: PinwheelObject, target: PinwheelObject, degree: int,
                 alpha: ExactMatrix, beta: Sequence[ExactMatrix]):
        if source.p != target.p:
            raise PinwheelError("morphism between pinwheel objects with different p")
        beta = tuple(beta)
        if len(beta) != source.p:
            raise PinwheelError(f"expected {source.p} β-components, got {len(beta)}")
        self.source, self.target = source, target
        self.degree = degree % 2
        self.alpha, self.beta = alpha, beta

    @property
    def p(self) -> int:
        return self.source.p

    def bi(self, i: int) -> ExactMatrix:
        return self.beta[i - 1]

    def differential(self) -> "PinwheelMorphism":
        k, A, B, p = self.degree, self.source, self.target, self.p
        dA, dB = A.A1.d, B.A1.d
        da = _dend(self.alpha, dA, dB, k)
        out = []
        for i in range(1, p):
            acc = -_dend(self.bi(i), dA, dB, k) + _signed(B.fi(i) @ self.alpha - self.alpha @ A.fi(i), k)
            for j in range(1, i):
                acc = acc + B.fi(j) @ self.bi(i - j) - _signed(self.bi(i - j) @ A.fi(j), k)
            out.append(acc)
        acc = _dend(self.bi(p), dA, dB, k) + B.fi(p) @ self.alpha - _signed(self.alpha @ A.fi(p), k)
        tail = _zeros(A.ring, B.rank, A.rank)
        for j in range(1, p):
            tail = tail + B.fi(j) @ self.bi(p - j) - _signed(self.bi(p - j) @ A.fi(j), k)
        out.append(acc + _signed(tail, k))
        return PinwheelMorphism(A, B, k + 1, da, out)

    def __matmul__(self, other: "PinwheelMorphism") -> "PinwheelMorphism":
        k, p = other.degree, self.p
        out = []
        for i in range(1, p):
            acc = self.alpha @ other.bi(i) + _signed(self.bi(i) @ other.alpha, k)
            for j in range(1, i):
                acc = acc + self.bi(i - j) @ other.bi(j)
            out.append(acc)
        out.append(self.alpha @ other.bi(p) + _signed(self.bi(p) @ other.alpha, k))
        return PinwheelMorphism(other.source, self.target, self.degree + k, self.alpha @ other.alpha, out)

    def compose_corrected(self, other: "PinwheelMorphism") -> "PinwheelMorphism":
        """Composition with the quadratic term Σ_{j<p} β′^{p−j}β^j added to the last component.

        𝒎 is only multiplicative up to this term, and without it the graded
        Leibniz rule fails.  With it the last component composes like the
        others, so the formulas describe a dg category (checked over ℤ/2).
        """
        out = self @ other
        last = out.beta[-1]
        for j in range(1, self.p):
            last = last + self.bi(self.p - j) @ other.bi(j)
        return PinwheelMorphism(out.source, out.target, out.degree, out.alpha, out.beta[:-1] + (last,))

    def __add__(self, other):
        return PinwheelMorphism(self.source, self.target, self.degree, self.alpha + other.alpha,
                                [x + y for x, y in zip(self.beta, other.beta)])

    def __sub__(self, other):
        return PinwheelMorphism(self.source, self.target, self.degree, self.alpha - other.alpha,
                                [x - y for x, y in zip(self.beta, other.beta)])

    def __neg__(self):
        return PinwheelMorphism(self.source, self.target, self.degree, -self.alpha, [-x for x in self.beta])

    def is_zero(self) -> bool:
        return self.alpha.is_zero() and all(b.is_zero() for b in self.beta)

    def __eq__(self, other):
        if not isinstance(other, PinwheelMorphism):
            return NotImplemented
        return self.degree == other.degree and self.alpha == other.alpha and self.beta == other.beta

    def __hash__(self):
        return hash((self.degree, self.alpha))

    @classmethod
    def identity(cls, X: PinwheelObject) -> "PinwheelMorphism":
        z = _zeros(X.ring, X.rank, X.rank)
        return cls(X, X, 0, _eye(X.ring, X.rank), [z] * X.p)

    @classmethod
    def zero(cls, A: PinwheelObject, B: PinwheelObject, degree: int = 0) -> "PinwheelMorphism":
        z = _zeros(A.ring, B.rank, A.rank)
        return cls(A, B, degree, z, [z] * A.p)


def morphism_algebra(mu: PinwheelMorphism, nu: PinwheelMorphism | None = None):
    """dμ alone, or (dμ, dν, μ∘ν) for a composable pair."""
    if nu is None:
        return mu.differential()
    if nu.target is not mu.source and nu.target != mu.source:
        raise PinwheelError("morphisms are not composable")
    return mu.differential(), nu.differential(), mu @ nu


# --------------------------------------------------------------------------
# simplification of circle pairs


def _ladder_check(pair: CirclePair, i: int) -> list[ExactMatrix]:
    """Vertices i+1, …, p−1 must be the ladders generated by ā_{1→i+1}; returns its column blocks."""
    A, f, p = pair.A, pair.f, pair.p
    A1 = A.A(1)
    r = A1.dim
    column = _blocks(A.abar(1, i + 1).matrix, r) if r else []
    if r and len(column) != p - i - 1:
        raise PinwheelError(f"vertex {i + 1} is not a ladder of size {p - i - 1}")
    for j in range(i + 1, p):
        if A.A(j) != ladder(A1, column, p - j):
            raise PinwheelError(f"vertex {j} is not the ladder generated by ā_(1→{i + 1})")
        if j <= p - 2 and A.a(j).matrix != _first(p - j - 1, p - j, r, A.ring):
            raise PinwheelError(f"a_{j} is not the block projection")
        if f.fi(j).matrix != _eye(A.ring, A.A(j).dim):
            raise PinwheelError(f"f_{j} is not the identity")
        if j <= p - 2 and not f.hi(j).matrix.is_zero():
            raise PinwheelError(f"h_{j} is not zero")
    return column


def simplify_step_S(pair: CirclePair, i: int) -> tuple[CirclePair, CircleMorphism]:
    """Replace vertex i by c(A)_i and rebuild the window around it.

    Requires f_j = id for j > i, h_j = 0 for j ≥ i and a_i = c(A)(a_i)∘f_i.
    Returns the new pair and the connecting equivalence (α, 0) with
    α_i = f_i and identities elsewhere.
    """
    A, cA, f, p = pair.A, pair.target, pair.f, pair.p
    if not 2 <= i <= p - 1:
        raise PinwheelError(f"an S-step needs 2 ≤ i ≤ p − 1, got {i}")
    for j in range(i + 1, p):
        if f.fi(j).matrix != _eye(A.ring, A.A(j).dim) or A.A(j) != cA.A(j):
            raise PinwheelError(f"f_{j} is not the identity")
    for j in range(i, p - 1):
        if not f.hi(j).matrix.is_zero():
            raise PinwheelError(f"h_{j} is not zero")
    if i <= p - 2 and A.a(i).matrix != (cA.a(i) @ f.fi(i)).matrix:
        raise PinwheelError(f"a_{i} ≠ c(A)(a_{i})∘f_{i}")
    ring = A.ring
    fi = f.fi(i)
    V = list(A.complexes)
    V[i - 1] = cA.A(i)
    maps = list(A.maps)
    maps[i - 2] = _mor(V[i - 2], V[i - 1], 0, fi.matrix @ A.a(i - 1).matrix)
    if i <= p - 2:
        maps[i - 1] = _mor(V[i - 1], V[i], 0, cA.a(i).matrix)
    A2 = QuiverObject(V, maps, check=False)
    cA2 = coxeter(A2)
    r = A.A(1).dim
    lift = _dsum(_eye(ring, r), fi.matrix)  # 𝔡(id, f_i): c(A)_{i−1} → c(A″)_{i−1}
    fs, hs = [], []
    for j in range(1, p):
        if j == i - 1:
            M = lift @ f.fi(j).matrix
        elif j == i:
            M = _eye(ring, V[i - 1].dim)
        else:
            M = f.fi(j).matrix
        fs.append(_mor(V[j - 1], cA2.A(j), 0, M))
    for j in range(1, p - 1):
        if j == i - 2:
            M = lift @ f.hi(j).matrix
        elif j >= i:
            M = _zeros(ring, cA2.A(j + 1).dim, V[j - 1].dim)
        else:
            M = f.hi(j).matrix
        hs.append(_mor(V[j - 1], cA2.A(j + 1), -1, M))
    new = CirclePair(A2, QuiverMorphism(A2, cA2, 0, fs, hs, check=False), check=False)
    af = [_mor(A.A(j), V[j - 1], 0, fi.matrix if j == i else _eye(ring, A.A(j).dim)) for j in range(1, p)]
    ah = [_mor(A.A(j), V[j], -1, _zeros(ring, V[j].dim, A.A(j).dim)) for j in range(1, p - 1)]
    alpha = QuiverMorphism(A, A2, 0, af, ah, check=False)
    return new, CircleMorphism(pair, new, 0, alpha, _zero_quiver_morphism(A, cA2, -1))


def hbar_sequence(h: Sequence[ExactMatrix], abar: ExactMatrix) -> list[ExactMatrix]:
    """h̄^l = h^l + Σ_{j<l} h^{l−j}∘ā∘h̄^j."""
    out: list[ExactMatrix] = []
    for l in range(1, len(h) + 1):
        acc = h[l - 1]
        for j in range(1, l):
            acc = acc + h[l - j - 1] @ abar @ out[j - 1]
        out.append(acc)
    return out


def hbar_sequence_right(h: Sequence[ExactMatrix], abar: ExactMatrix) -> list[ExactMatrix]:
    """The mirrored recursion h̄^l = h^l + Σ_{j<l} h̄^{l−j}∘ā∘h^j."""
    out: list[ExactMatrix] = []
    for l in range(1, len(h) + 1):
        acc = h[l - 1]
        for j in range(1, l):
            acc = acc + out[l - j - 1] @ abar @ h[j - 1]
        out.append(acc)
    return out


@dataclass
class TStepData:
    """Matrices of one T-step: h̄, H̄ = 𝔰(id, h̄ā) and its inverse H = 𝔰(id, −hā)."""

    hbar: list[ExactMatrix]
    Hbar: ExactMatrix
    H: ExactMatrix


def simplify_step_T(pair: CirclePair, i: int, with_data: bool = False):
    """Absorb the homotopy h_i into the ladder data through H̄_i.

    Requires vertices j > i to be the ladders generated by ā_{1→i+1}, with
    projections, f_j = id and h_j = 0 beyond i.  Returns the new pair and the
    connecting equivalence (α, 0) with α_j = id for j ≤ i, α_j = b_{p−j}(H̄) for
    j > i and the single homotopy component h̄ at i.
    """
    A, cA, f, p = pair.A, pair.target, pair.f, pair.p
    if not 1 <= i <= p - 2:
        raise PinwheelError(f"a T-step needs 1 ≤ i ≤ p − 2, got {i}")
    _ladder_check(pair, i)
    ring = A.ring
    A1 = A.A(1)
    r = A1.dim
    m = p - i  # blocks of c(A)_i
    abar = A.abar(1, i).matrix
    hs = _blocks(f.hi(i).matrix, r) if r else []
    hbar = hbar_sequence(hs, abar)
    ident = _eye(ring, r)
    Hbar = _simple(ident, [x @ abar for x in hbar], m)
    H = _simple(ident, [-(x @ abar) for x in hs], m)
    if not (H @ Hbar).is_identity() or not (Hbar @ H).is_identity():
        raise PinwheelError("H̄ and H are not mutually inverse")
    fi = f.fi(i).matrix
    new_fi = Hbar @ fi
    column = _blocks(_first(m - 1, m, r, ring) @ new_fi @ abar, r) if r else []
    V = list(A.complexes)
    for j in range(i + 1, p):
        V[j - 1] = ladder(A1, column, p - j)
    maps = list(A.maps)
    if i <= p - 2 and i >= 1:
        if i <= len(maps):
            maps[i - 1] = _mor(V[i - 1], V[i], 0, _first(m - 1, m, r, ring) @ new_fi)
    for j in range(i + 1, p - 1):
        maps[j - 1] = _mor(V[j - 1], V[j], 0, _first(p - j - 1, p - j, r, ring))
    A2 = QuiverObject(V, maps, check=False)
    cA2 = coxeter(A2)
    hbar_col = _column(hbar, ring, A.A(i).dim)
    fs, hs2 = [], []
    for j in range(1, p):
        if j == i:
            M = new_fi
        elif j > i:
            M = _eye(ring, V[j - 1].dim)
        else:
            M = f.fi(j).matrix
        fs.append(_mor(V[j - 1], cA2.A(j), 0, M))
    for j in range(1, p - 1):
        if j == i - 1:
            M = Hbar @ f.hi(j).matrix + _dsum(_zeros(ring, r, r), hbar_col) @ f.fi(j).matrix
        elif j >= i:
            M = _zeros(ring, cA2.A(j + 1).dim, V[j - 1].dim)
        else:
            M = f.hi(j).matrix
        hs2.append(_mor(V[j - 1], cA2.A(j + 1), -1, M))
    new = CirclePair(A2, QuiverMorphism(A2, cA2, 0, fs, hs2, check=False), check=False)
    af = []
    for j in range(1, p):
        M = _eye(ring, A.A(j).dim) if j <= i else _corner(Hbar, p - j, r)
        af.append(_mor(A.A(j), V[j - 1], 0, M))
    ah = []
    for j in range(1, p - 1):
        M = hbar_col if j == i else _zeros(ring, V[j].dim, A.A(j).dim)
        ah.append(_mor(A.A(j), V[j], -1, M))
    alpha = QuiverMorphism(A, A2, 0, af, ah, check=False)
    conn = CircleMorphism(pair, new, 0, alpha, _zero_quiver_morphism(A, cA2, -1))
    if with_data:
        return new, conn, TStepData(hbar, Hbar, H)
    return new, conn


def extract_simplified(pair: CirclePair) -> SimplifiedObject:
    """Read (A₁, f¹, …, f^{p−1}) off a pair in normal form and check that it embeds back to the pair."""
    A1 = pair.A.A(1)
    blocks = _blocks(pair.f.fi(1).matrix, A1.dim) if A1.dim else [_zeros(pair.ring, 0, 0)] * (pair.p - 1)
    obj = SimplifiedObject(A1, blocks, check=False)
    if obj.embed() != pair:
        raise PinwheelError("the pair is not in normal form")
    return obj


@dataclass
class SimplificationStep:
    kind: str
    index: int
    before: CirclePair
    after: CirclePair
    connecting: CircleMorphism

    def problems(self) -> list[str]:
        out = []
        c = self.connecting
        if c.source != self.before or c.target != self.after:
            out.append(f"{self.kind}{self.index}: connecting morphism has the wrong ends")
            return out
        if not self.after.is_valid():
            out.append(f"{self.kind}{self.index}: the new pair is invalid")
        if not c.is_homotopy_equivalence():
            out.append(f"{self.kind}{self.index}: connecting morphism is not a homotopy equivalence")
        return out


@dataclass
class Simplification:
    """Result of :func:`simplify_full` with its audit trail."""

    original: CirclePair
    steps: list[SimplificationStep]
    result: SimplifiedObject
    monodromy_homotopy: ExactMatrix | None = None
    monodromy_exact: bool = False
    problems_found: list[str] = field(default_factory=list)

    @property
    def final(self) -> CirclePair:
        return self.steps[-1].after if self.steps else self.original

    def conjugation(self) -> tuple[ExactMatrix, ExactMatrix]:
        """(u, u′): the vertex-1 components of the composite equivalence and of its inverse."""
        ring = self.original.ring
        r = self.original.A.A(1).dim
        u = _eye(ring, r)
        for s in self.steps:
            u = s.connecting.alpha.fi(1).matrix @ u
        return u, _eye(ring, r)

    def verify(self) -> list[str]:
        """Re-validate every step, the chaining of the trail, the end state and the monodromy relation."""
        out = []
        if not self.original.is_valid():
            out.append("the original pair is invalid")
        state = self.original
        for s in self.steps:
            if s.before != state:
                out.append(f"{s.kind}{s.index}: trail is not contiguous")
            out += s.problems()
            state = s.after
        if self.result.embed() != state:
            out.append("the final state is not the embedding of the extracted object")
        if any(not R.is_zero() for R in self.result.relation_residuals()):
            out.append("the extracted object violates its relations")
        if not self.result.is_homotopy_equivalence():
            out.append("the extracted f₁ is not a homotopy equivalence")
        u, u2 = self.conjugation()
        before = monodromy_composed(self.original).m
        after = monodromy_closed(self.result).m
        X = self.original.A.A(1)
        diff = after - u @ before @ u2
        if self.monodromy_homotopy is None:
            if not diff.is_zero():
                out.append("no monodromy homotopy recorded")
        elif _dend(self.monodromy_homotopy, X.d, X.d, -1) != diff:
            out.append("the recorded monodromy homotopy does not bound m_after − u m_before u′")
        if not (u @ u2).is_identity() and null_homotopy(_mor(X, X, 0, u @ u2 - _eye(X.ring, X.dim))) is None:
            out.append("u∘u′ is not homotopic to the identity")
        return out

    def ok(self) -> bool:
        return not self.verify()


def simplify_full(pair: CirclePair, check: bool = True) -> Simplification:
    """Alternate S_{p−1}, T_{p−2}, S_{p−2}, …, S_2, T_1 and read off the normal form."""
    if check and not pair.is_valid():
        raise PinwheelError("; ".join(pair.problems()))
    p = pair.p
    steps: list[SimplificationStep] = []
    state = pair
    for i in range(p - 1, 1, -1):
        new, conn = simplify_step_S(state, i)
        steps.append(SimplificationStep("S", i, state, new, conn))
        state = new
        new, conn = simplify_step_T(state, i - 1)
        steps.append(SimplificationStep("T", i - 1, state, new, conn))
        state = new
    result = extract_simplified(state)
    u, u2 = Simplification(pair, steps, result).conjugation()
    before = monodromy_composed(pair).m
    after = monodromy_closed(result).m
    diff = after - u @ before @ u2
    X = pair.A.A(1)
    exact = diff.is_zero()
    hom = _zeros(X.ring, X.dim, X.dim) if exact else None
    if not exact:
        sol = null_homotopy(_mor(X, X, 0, diff))
        hom = None if sol is None else sol.matrix
    out = Simplification(pair, steps, result, hom, exact)
    return out


# --------------------------------------------------------------------------
# reducing morphisms between simplified objects


@dataclass
class MorphismReduction:
    """μ = (α′, β′), its reduced form μ″ and the homotopy (κ, 0) with d(κ, 0) = μ − μ″."""

    original: CircleMorphism
    reduced: ReducedMorphism
    homotopy: CircleMorphism

    def verify(self) -> bool:
        return self.homotopy.differential() == self.original - self.reduced.embed(self.original.source,
                                                                               self.original.target)


def reduce_morphism(mu: CircleMorphism, source: SimplifiedObject, target: SimplifiedObject) -> MorphismReduction:
    """λ/κ recursion: λ_{p−2} = (−1)^{k−1}ε_{p−2}, λ_i = (−1)^{k−1}ε_i + 𝔡(0, λ_{i+1}),
    λ₁ = (−1)^{k−1}ε₁ + 𝔡(0, λ₂)f₁; κ_{p−1} = (−1)^{k−1}β_{p−1},
    κ_i = (−1)^{k−1}β_i + 𝔟(0, χ(λ)₁^i, κ_{i+1}), κ₁ = β₁ + (−1)^{k−1}𝔟(0, λ₁, κ₂)f₁.
    """
    if not mu.is_closed():
        raise PinwheelError("only closed morphisms are reduced")
    A, B = mu.source, mu.target
    if A != source.embed() or B != target.embed():
        raise PinwheelError("the morphism must run between embedded simplified objects")
    k, p, ring = mu.degree, A.p, A.ring
    r_a, r_b = source.rank, target.rank
    s = k - 1
    eps = [mu.beta.hi(i).matrix for i in range(1, p - 1)]
    bet = [mu.beta.fi(i).matrix for i in range(1, p)]
    f1 = A.f.fi(1).matrix
    lam: dict[int, ExactMatrix] = {}
    lam[p - 2] = _signed(eps[p - 3], s)
    for i in range(p - 3, 0, -1):
        nxt = _dsum(_zeros(ring, r_b, r_a), lam[i + 1])
        if i == 1:
            nxt = nxt @ f1
        lam[i] = _signed(eps[i - 1], s) + nxt
    # the κ quiver morphism (0, κ₂, …, κ_{p−1}; λ₁, …, λ_{p−2}) is built from the top down
    kap: dict[int, ExactMatrix] = {p - 1: _signed(bet[p - 2], s)}
    lam_mor = QuiverMorphism(
        A.A, B.A, k - 1,
        [_mor(A.A.A(j), B.A.A(j), k - 1, _zeros(ring, B.A.A(j).dim, A.A.A(j).dim)) for j in range(1, p)],
        [_mor(A.A.A(j), B.A.A(j + 1), k - 2, lam[j]) for j in range(1, p - 1)], check=False)
    for i in range(p - 2, 1, -1):
        ch = chi(lam_mor, 1, i).matrix
        kap[i] = _signed(bet[i - 1], s) + _lower(_zeros(ring, r_b, r_a), ch, kap[i + 1])
    kappa1 = bet[0] + _signed(_lower(_zeros(ring, r_b, r_a), lam[1], kap[2]) @ f1, s)
    fs = [_mor(A.A.A(1), B.A.A(1), k - 1, _zeros(ring, r_b, r_a))]
    fs += [_mor(A.A.A(j), B.A.A(j), k - 1, kap[j]) for j in range(2, p)]
    hs = [_mor(A.A.A(j), B.A.A(j + 1), k - 2, lam[j]) for j in range(1, p - 1)]
    kappa = QuiverMorphism(A.A, B.A, k - 1, fs, hs, check=False)
    tau = _zero_quiver_morphism(A.A, B.target, k - 2)
    hom = CircleMorphism(A, B, k - 1, kappa, tau)
    alpha1 = mu.alpha.fi(1).matrix
    reduced = ReducedMorphism(source, target, k, alpha1, _blocks(kappa1, r_b) if r_b else
                              [_zeros(ring, 0, r_a)] * (p - 1))
    return MorphismReduction(mu, reduced, hom)


def _circle_layout(A: CirclePair, B: CirclePair, k: int):
    return _slots(A.A, B.A, k), _slots(A.A, B.target, k - 1)


def _circle_unflatten(A: CirclePair, B: CirclePair, k: int, layouts, vec) -> CircleMorphism:
    la, lb = layouts
    na = sum(len(p) for _, _, p in la)
    alpha = _unflatten(A.A, B.A, k, la, list(vec[:na]))
    beta = _unflatten(A.A, B.target, k - 1, lb, list(vec[na:]))
    return CircleMorphism(A, B, k, alpha, beta)


def _circle_flatten(mu: CircleMorphism, layouts) -> list:
    la, lb = layouts
    return _flatten(mu.alpha, la) + _flatten(mu.beta, lb)


def random_closed_circle_morphism(A: CirclePair, B: CirclePair, rng, k: int = 0) -> CircleMorphism:
    """A uniformly mixed element of the closed degree-k circle morphisms A → B."""
    from .exactalg import nullspace
    rng = rng_from_seed(rng)
    src = _circle_layout(A, B, k)
    tgt = _circle_layout(A, B, k + 1)
    n = sum(len(p) for _, _, p in src[0]) + sum(len(p) for _, _, p in src[1])
    cols = []
    for t in range(n):
        e = [0] * n
        e[t] = 1
        cols.append(_circle_flatten(_circle_unflatten(A, B, k, src, e).differential(), tgt))
    rows = len(cols[0]) if cols else 0
    ring = A.ring
    if n == 0:
        return _circle_unflatten(A, B, k, src, [])
    M = ExactMatrix(ring, [[cols[j][i] for j in range(n)] for i in range(rows)], shape=(rows, n))
    K = nullspace(M)
    vec = [0] * n
    for c in range(K.cols):
        coef = int(rng.integers(0, ring.characteristic if ring.characteristic else 3))
        for t in range(n):
            vec[t] = ring.normalize(vec[t] + coef * K.array[t, c])
    return _circle_unflatten(A, B, k, src, vec)


# --------------------------------------------------------------------------
# random generators


def _random_odd(ring: Ring, X: GradedComplex, Y: GradedComplex, rng, k: int = 1) -> ExactMatrix:
    """A random homogeneous degree-k matrix X → Y."""
    arr = np.array(_zeros(ring, Y.dim, X.dim).array, copy=True)
    for a in range(Y.dim):
        for b in range(X.dim):
            if (Y.degrees[a] - X.degrees[b] - k) % 2 == 0:
                arr[a, b] = ring.normalize(int(rng.integers(-1, 2)))
    return ExactMatrix(ring, arr, shape=(Y.dim, X.dim))


def _base_cells(ring: Ring, p: int, cells: int):
    """Copies of k ⊕ k[1] with f¹ = N (even → odd), f^{p−1} = M (odd → even): monodromy MN + NM = id."""
    degrees = [0, 1] * cells
    n = 2 * cells
    N = np.array(_zeros(ring, n, n).array, copy=True)
    Mm = np.array(N, copy=True)
    for c in range(cells):
        N[2 * c + 1, 2 * c] = ring.normalize(1)
        Mm[2 * c, 2 * c + 1] = ring.normalize(1)
    fs = [_zeros(ring, n, n) for _ in range(p - 1)]
    fs[0] = ExactMatrix(ring, N, shape=(n, n))
    fs[p - 2] = fs[p - 2] + ExactMatrix(ring, Mm, shape=(n, n))
    return degrees, fs


def random_simplified_object(p: int, ring: Ring | None = None, rng=None, max_rank: int = 3,
                             perturb: bool = True, attempts: int = 200) -> SimplifiedObject:
    """A random object of the normal form with f₁ a homotopy equivalence.

    Built from base cells (monodromy id), a random contractible summand, a
    random solution of each df^i equation and a final change of basis.  The
    ranks in each degree stay ≤ ``max_rank``.
    """
    ring = ring or Zmod(2)
    rng = rng_from_seed(rng)
    for _ in range(attempts):
        cells = int(rng.integers(0, max(1, max_rank) + 1))
        degrees, base = _base_cells(ring, p, cells)
        room = max_rank - cells
        C_deg, C_d = [], _zeros(ring, 0, 0)
        if room > 0 and rng.random() < 0.7:
            C, _ = random_contractible(ring, rng, "Z2", max_pairs=room)
            if all(C.degrees.count(e) + cells <= max_rank for e in (0, 1)):
                C_deg, C_d = list(C.degrees), C.d
        n0 = len(degrees)
        deg = degrees + C_deg
        n = len(deg)
        if n == 0:
            continue
        D = _dsum(_zeros(ring, n0, n0), C_d)
        A1 = GradedComplex(ring, deg, D, "Z2", check=False)
        fs = [_dsum(b, _zeros(ring, len(C_deg), len(C_deg))) for b in base]
        if perturb:
            ok = True
            new: list[ExactMatrix] = []
            for i in range(1, p):
                R = _zeros(ring, n, n)
                for j in range(1, i):
                    R = R + new[i - j - 1] @ new[j - 1]
                cand = fs[i - 1] + (_random_odd(ring, A1, A1, rng) if rng.random() < 0.6 else _zeros(ring, n, n))
                defect = R - _dend(cand, D, D, 1)
                if defect.is_zero():
                    new.append(cand)
                    continue
                sol = null_homotopy(_mor(A1, A1, 0, defect))
                if sol is None:
                    ok = False
                    break
                new.append(cand + sol.matrix)
            if not ok:
                continue
            fs = new
        T = _block_invertible(ring, deg, rng)
        Ti = _inverse_of_product(ring, T)
        A1 = GradedComplex(ring, deg, T @ D @ Ti, "Z2", check=False)
        obj = SimplifiedObject(A1, [T @ x @ Ti for x in fs], check=False)
        if any(not R.is_zero() for R in obj.relation_residuals()):
            continue
        if ring.characteristic and not obj.is_homotopy_equivalence():
            continue
        return obj
    raise PinwheelError("could not generate a random simplified object")


def random_reduced_morphism(A: SimplifiedObject, B: SimplifiedObject, rng, degree: int = 0) -> ReducedMorphism:
    """Arbitrary homogeneous components (not necessarily closed)."""
    rng = rng_from_seed(rng)
    ring = A.ring
    mk = lambda: _random_odd(ring, A.A1, B.A1, rng, degree)
    return ReducedMorphism(A, B, degree, mk(), [mk() for _ in range(A.p - 1)])


def random_pinwheel_object(p: int, ring: Ring | None = None, rng=None, max_rank: int = 3,
                           attempts: int = 200) -> PinwheelObject:
    """A random simplified object whose monodromy is homotopic to id, with the disk attached."""
    ring = ring or Zmod(2)
    rng = rng_from_seed(rng)
    for _ in range(attempts):
        obj = random_simplified_object(p, ring, rng, max_rank)
        try:
            return attach_disk(obj)
        except PinwheelError:
            continue
    raise PinwheelError("could not generate a random pinwheel object")


def random_pinwheel_morphism(A: PinwheelObject, B: PinwheelObject, rng, degree: int = 0) -> PinwheelMorphism:
    rng = rng_from_seed(rng)
    mk = lambda: _random_odd(A.ring, A.A1, B.A1, rng, degree)
    return PinwheelMorphism(A, B, degree, mk(), [mk() for _ in range(A.p)])


def _transport(pair: CirclePair, Ts: Sequence[ExactMatrix]) -> tuple[CirclePair, QuiverMorphism]:
    """Conjugate every vertex by T_j and move f along; returns the new pair and φ: A → A′."""
    A, ring = pair.A, pair.ring
    Tis = [_inverse_of_product(ring, T) for T in Ts]
    V = [GradedComplex(ring, X.degrees, T @ X.d @ Ti, "Z2", check=False)
         for X, T, Ti in zip(A.complexes, Ts, Tis)]
    maps = [_mor(V[j], V[j + 1], 0, Ts[j + 1] @ a.matrix @ Tis[j]) for j, a in enumerate(A.maps)]
    A2 = QuiverObject(V, maps, check=False)
    zero_h = lambda src, tgt, j: [_mor(src.A(t), tgt.A(t + 1), -1, _zeros(ring, tgt.A(t + 1).dim, src.A(t).dim))
                                  for t in range(1, src.n - 1)]
    phi = QuiverMorphism(A, A2, 0, [_mor(A.A(j), V[j - 1], 0, Ts[j - 1]) for j in range(1, A.n)],
                         zero_h(A, A2, 0), check=False)
    phi_inv = QuiverMorphism(A2, A, 0, [_mor(V[j - 1], A.A(j), 0, Tis[j - 1]) for j in range(1, A.n)],
                             zero_h(A2, A, 0), check=False)
    f2 = coxeter(phi) @ pair.f @ phi_inv
    return CirclePair(A2, f2, check=False), phi


def random_circle_pair(p: int, ring: Ring | None = None, rng=None, max_rank: int = 2,
                       homotopy: bool = True) -> CirclePair:
    """The embedding of a random simplified object moved by vertexwise basis changes and a boundary d(K)."""
    ring = ring or Zmod(2)
    rng = rng_from_seed(rng)
    obj = random_simplified_object(p, ring, rng, max_rank)
    pair = obj.embed()
    Ts = [_block_invertible(ring, X.degrees, rng) for X in pair.A.complexes]
    pair, _ = _transport(pair, Ts)
    if homotopy:
        A, cA = pair.A, pair.target
        layout = _slots(A, cA, -1)
        n = sum(len(q) for _, _, q in layout)
        K = _unflatten(A, cA, -1, layout, [int(rng.integers(-1, 2)) for _ in range(n)])
        pair = CirclePair(A, pair.f + K.differential(), check=False)
    return pair


# --------------------------------------------------------------------------
# exhaustive search over F₂


def _odd_positions(degrees: Sequence[int]) -> list[tuple[int, int]]:
    n = len(degrees)
    return [(a, b) for a in range(n) for b in range(n) if (degrees[a] - degrees[b]) % 2 == 1]


def _variables(p: int) -> list[tuple]:
    """Search order: d, then f¹…f^p, then g^{ij} by increasing i and decreasing j."""
    return [("d",)] + [("f", i) for i in range(1, p + 1)] + [
        ("g", i, j) for i in range(1, p + 1) for j in range(p, 0, -1)]


def _value_table(n: int, positions, bits: int) -> np.ndarray:
    """All 2^bits odd matrices, indexed by the integer whose binary digits fill ``positions``."""
    vals = np.zeros((1 << bits, n, n), dtype=np.int64)
    for v in range(1 << bits):
        for t, (a, b) in enumerate(positions):
            if (v >> t) & 1:
                vals[v, a, b] = 1
    return vals


@dataclass
class SearchResult:
    """All solutions as tuples of value indices, one per variable of :func:`_variables`."""

    p: int
    ranks: tuple[int, int]
    solutions: list[tuple[int, ...]]
    nodes: int
    seconds: float
    domain_bits: int

    def objects(self) -> list[PinwheelObject]:
        return [decode_solution(self.p, self.ranks, s) for s in self.solutions]


def _degrees(ranks: tuple[int, int]) -> list[int]:
    return [0] * ranks[0] + [1] * ranks[1]


def decode_solution(p: int, ranks: tuple[int, int], sol: Sequence[int]) -> PinwheelObject:
    """Turn a tuple of value indices into a pinwheel object over ℤ/2."""
    ring = Zmod(2)
    deg = _degrees(ranks)
    n = len(deg)
    pos = _odd_positions(deg)
    table = _value_table(n, pos, len(pos))
    mats = [ExactMatrix(ring, table[v], shape=(n, n)) for v in sol]
    names = _variables(p)
    val = dict(zip(names, mats))
    A1 = GradedComplex(ring, deg, val[("d",)], "Z2", check=False)
    f = [val[("f", i)] for i in range(1, p + 1)]
    g = {(i, j): val[("g", i, j)] for i in range(1, p + 1) for j in range(1, p + 1)}
    return PinwheelObject(A1, f, g)


def encode_object(obj: PinwheelObject) -> tuple[int, ...]:
    """Inverse of :func:`decode_solution` for objects over ℤ/2 with the basis sorted by degree."""
    pos = _odd_positions(obj.A1.degrees)
    def code(M: ExactMatrix) -> int:
        return sum(int(M.array[a, b]) % 2 << t for t, (a, b) in enumerate(pos))
    out = [code(obj.A1.d)] + [code(x) for x in obj.f]
    out += [code(obj.g[i, j]) for i in range(1, obj.p + 1) for j in range(obj.p, 0, -1)]
    return tuple(out)


def brute_force_search(p: int, ranks: tuple[int, int] = (1, 1), max_bits: int = 40,
                       time_limit: float | None = None) -> SearchResult:
    """Every (d, f¹…f^p, g^{ij}) over ℤ/2 satisfying all relations, by depth-first search with pruning.

    Each variable is fixed in the order of :func:`_variables` and the
    relation it completes is checked immediately: d² = 0 after d, the f^i
    relation after f^i and the (i, j) relation after g^{ij}.
    """
    if p < 1:
        raise PinwheelError("p must be positive")
    deg = _degrees(ranks)
    n = len(deg)
    pos = _odd_positions(deg)
    b = len(pos)
    names = _variables(p)
    total_bits = b * len(names)
    if total_bits > max_bits:
        raise PinwheelError(f"search space 2^{total_bits} exceeds the limit 2^{max_bits}")
    table = _value_table(n, pos, b)
    I = np.eye(n, dtype=np.int64)
    start = time.perf_counter()
    sols: list[tuple[int, ...]] = []
    nodes = 0
    chosen: list[int] = []
    val: dict = {}

    def ok(name) -> bool:
        d = val[("d",)]
        if name[0] == "d":
            return not ((d @ d) % 2).any()
        if name[0] == "f":
            i = name[1]
            x = val[name]
            acc = d @ x + x @ d + (I if i == p else 0)
            for j in range(1, i):
                acc = acc + val[("f", i - j)] @ val[("f", j)]
            return not (acc % 2).any()
        _, i, j = name
        x = val[name]
        acc = d @ x + x @ d + (I if i == j else 0)
        for k in range(1, i):
            acc = acc + val[("f", i - k)] @ val[("g", k, j)]
        for k in range(j + 1, p + 1):
            acc = acc + val[("g", i, k)] @ val[("f", k - j)]
        return not (acc % 2).any()

    def walk(t: int) -> None:
        nonlocal nodes
        if time_limit is not None and time.perf_counter() - start > time_limit:
            raise PinwheelError("search exceeded its time limit")
        if t == len(names):
            sols.append(tuple(chosen))
            return
        name = names[t]
        for v in range(1 << b):
            nodes += 1
            val[name] = table[v]
            if ok(name):
                chosen.append(v)
                walk(t + 1)
                chosen.pop()
        val.pop(name, None)

    walk(0)
    return SearchResult(p, tuple(ranks), sols, nodes, time.perf_counter() - start, total_bits)


def accepted_set(p: int, ranks: tuple[int, int] = (1, 1), max_batch_bits: int = 22) -> set[tuple[int, ...]]:
    """All accepted points of the full domain, by vectorized evaluation of every relation.

    Independent of the search: no pruning order is used.  The domain is
    split by the (d, f) coordinates; when a relation that does not involve g
    fails, every point of that slice is rejected, otherwise all g
    coordinates of the slice are evaluated at once.
    """
    deg = _degrees(ranks)
    n = len(deg)
    pos = _odd_positions(deg)
    b = len(pos)
    table = _value_table(n, pos, b)
    I = np.eye(n, dtype=np.int64)
    names = _variables(p)
    g_names = names[p + 1:]
    if b * len(g_names) > max_batch_bits:
        raise PinwheelError("the g-slice is too large to evaluate in one batch")
    out: set[tuple[int, ...]] = set()
    n_g = len(g_names)
    # digits of every g-slice point, one column per g variable
    count = 1 << (b * n_g)
    idx = np.arange(count, dtype=np.int64)
    digits = np.stack([(idx >> (b * t)) & ((1 << b) - 1) for t in range(n_g)], axis=1) if n_g else np.zeros((1, 0), np.int64)
    gvals = {name: table[digits[:, t]] for t, name in enumerate(g_names)}
    for head in itertools.product(range(1 << b), repeat=p + 1):
        d = table[head[0]]
        f = {i: table[head[i]] for i in range(1, p + 1)}
        good = not ((d @ d) % 2).any()
        for i in range(1, p + 1):
            acc = d @ f[i] + f[i] @ d + (I if i == p else 0)
            for j in range(1, i):
                acc = acc + f[i - j] @ f[j]
            good = good and not (acc % 2).any()
        if not good:
            continue
        mask = np.ones(count, dtype=bool)
        for i in range(1, p + 1):
            for j in range(1, p + 1):
                x = gvals[("g", i, j)]
                acc = d @ x + x @ d
                if i == j:
                    acc = acc + I
                for k in range(1, i):
                    acc = acc + f[i - k] @ gvals[("g", k, j)]
                for k in range(j + 1, p + 1):
                    acc = acc + gvals[("g", i, k)] @ f[k - j]
                mask &= ~((acc % 2).reshape(count, -1).any(axis=1))
        for row in digits[mask]:
            out.add(tuple(head) + tuple(int(v) for v in row))
    return out


def orbit_invariant(solutions: Iterable[tuple[int, ...]], p: int, ranks: tuple[int, int]) -> bool:
    """The solution set is closed under every degree-preserving change of basis and the parity swap."""
    sols = set(solutions)
    deg = _degrees(ranks)
    n = len(deg)
    ring = Zmod(2)
    group = []
    for entries in itertools.product((0, 1), repeat=ranks[0] ** 2 + ranks[1] ** 2):
        T = np.zeros((n, n), dtype=np.int64)
        t = 0
        for lo, size in ((0, ranks[0]), (ranks[0], ranks[1])):
            for a in range(size):
                for c in range(size):
                    T[lo + a, lo + c] = entries[t]
                    t += 1
        det = round(abs(np.linalg.det(T))) % 2 if n else 1
        if det == 1:
            group.append(ExactMatrix(ring, T, shape=(n, n)))
    transforms = [(T, _inverse_of_product(ring, T), False) for T in group]
    if ranks[0] == ranks[1]:
        P = np.zeros((n, n), dtype=np.int64)
        r = ranks[0]
        for a in range(r):
            P[a, r + a] = 1
            P[r + a, a] = 1
        Pm = ExactMatrix(ring, P, shape=(n, n))
        transforms.append((Pm, Pm, True))
    for s in sols:
        obj = decode_solution(p, ranks, s)
        for T, Ti, _ in transforms:
            conj = lambda M: T @ M @ Ti
            moved = PinwheelObject(
                GradedComplex(ring, obj.A1.degrees, conj(obj.A1.d), "Z2", check=False),
                [conj(x) for x in obj.f], {key: conj(M) for key, M in obj.g.items()})
            if encode_object(moved) not in sols:
                return False
    return True


def perturbation_census(result: SearchResult) -> dict[tuple, tuple[int, int]]:
    """For each variable: (single-bit flips of solutions that stay accepted, flips tried)."""
    sols = set(result.solutions)
    b = len(_odd_positions(_degrees(result.ranks)))
    out = {}
    for t, name in enumerate(_variables(result.p)):
        stay = tried = 0
        for s in result.solutions:
            for bit in range(b):
                moved = s[:t] + (s[t] ^ (1 << bit),) + s[t + 1:]
                tried += 1
                stay += moved in sols
        out[name] = (stay, tried)
    return out
