"""A_{n−1}-quiver dg-modules, restriction functors and the Coxeter functor calculus.

An object is a chain A_1 → A_2 → … → A_{n−1} of complexes with closed degree-0
maps.  Internally the chain is padded with A_0 = A_n = 0 (and a_0, a_{n−1}
zero), which makes j_1, j_n and the end slots of c_{n,k} instances of the
uniform cone formulas.  Indices in the public API are 1-based, matching the
quiver vertices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .complexes import (
    ComplexError, GradedComplex, GradedMorphism, HomotopyWitness, cone, cone_rotation,
    eta_cone_triple, is_homotopy_equivalence, null_homotopy, shift, zero_complex,
)
from .exactalg import ExactMatrix, Ring, assemble, ring_from_json

__all__ = [
    "QuiverError", "QuiverObject", "QuiverMorphism", "QuiverReport", "QuiverWitness",
    "validate", "restrict", "component", "coxeter", "coxeter_model", "chi",
    "adjust_quiver", "coxeter_power_witness", "coxeter_power_chain", "injective", "projective",
    "injective_projective_check", "rotation_witness",
]


class QuiverError(ValueError):
    """Malformed quiver data or a request outside the allowed index range."""


def _zero_like(ring: Ring, grading: str) -> GradedComplex:
    return zero_complex(ring, grading)


def _zmat(ring: Ring, rows: int, cols: int) -> ExactMatrix:
    return ExactMatrix.zeros(ring, rows, cols)


def _zero_map(src: GradedComplex, tgt: GradedComplex, k: int = 0) -> GradedMorphism:
    return GradedMorphism(src, tgt, k, _zmat(src.ring, tgt.dim, src.dim), check=False)


class QuiverObject:
    """A chain of complexes with closed degree-0 connecting maps."""

    def __init__(self, complexes: Sequence[GradedComplex], maps: Sequence[GradedMorphism], check: bool = True):
        complexes = list(complexes)
        maps = list(maps)
        if len(complexes) < 2:
            raise QuiverError("a quiver object needs n − 1 ≥ 2 vertices")
        if len(maps) != len(complexes) - 1:
            raise QuiverError(f"{len(complexes)} vertices need {len(complexes) - 1} maps, got {len(maps)}")
        self.n = len(complexes) + 1
        self.complexes = tuple(complexes)
        self.maps = tuple(maps)
        self.ring = complexes[0].ring
        self.grading = complexes[0].grading
        self._abar: dict[tuple[int, int], GradedMorphism] = {}
        if check:
            for i, a in enumerate(maps):
                if a.source != complexes[i] or a.target != complexes[i + 1]:
                    raise QuiverError(f"a_{i + 1} does not connect A_{i + 1} to A_{i + 2}")
                if a.degree != 0:
                    raise QuiverError(f"a_{i + 1} has degree {a.degree}, expected 0")
                if not a.is_closed():
                    raise QuiverError(f"a_{i + 1} is not closed")

    @cached_property
    def _zero(self) -> GradedComplex:
        return _zero_like(self.ring, self.grading)

    def A(self, i: int) -> GradedComplex:
        """A_i for 0 ≤ i ≤ n (A_0 = A_n = 0)."""
        if i == 0 or i == self.n:
            return self._zero
        if not 1 <= i <= self.n - 1:
            raise QuiverError(f"vertex {i} outside 0..{self.n}")
        return self.complexes[i - 1]

    def a(self, i: int) -> GradedMorphism:
        """a_i: A_i → A_{i+1} for 0 ≤ i ≤ n − 1 (a_0 and a_{n−1} are zero)."""
        if i == 0 or i == self.n - 1:
            return _zero_map(self.A(i), self.A(i + 1))
        if not 1 <= i <= self.n - 2:
            raise QuiverError(f"arrow {i} outside 0..{self.n - 1}")
        return self.maps[i - 1]

    def abar(self, start: int, end: int) -> GradedMorphism:
        """ā = a_{end−1}∘…∘a_start: A_start → A_end (identity when start = end), memoized."""
        if not 0 <= start <= end <= self.n:
            raise QuiverError(f"composite {start}→{end} out of range")
        key = (start, end)
        hit = self._abar.get(key)
        if hit is not None:
            return hit
        if start == end:
            out = self.A(start).identity()
        else:
            out = self.a(end - 1) @ self.abar(start, end - 1)
        self._abar[key] = out
        return out

    def shift(self, m: int) -> "QuiverObject":
        cs = [shift(A, m) for A in self.complexes]
        ms = [GradedMorphism(cs[i], cs[i + 1], 0, a.matrix, check=False) for i, a in enumerate(self.maps)]
        return QuiverObject(cs, ms, check=False)

    def identity(self) -> "QuiverMorphism":
        f = [A.identity() for A in self.complexes]
        h = [_zero_map(self.A(i), self.A(i + 1), -1) for i in range(1, self.n - 1)]
        return QuiverMorphism(self, self, 0, f, h, check=False)

    def ranks(self) -> list[int]:
        return [A.dim for A in self.complexes]

    def __eq__(self, other):
        if not isinstance(other, QuiverObject):
            return NotImplemented
        return self.complexes == other.complexes and all(
            x.matrix == y.matrix for x, y in zip(self.maps, other.maps))

    def __hash__(self):
        return hash(self.complexes)

    def __repr__(self):
        return f"QuiverObject(n={self.n}, ranks={self.ranks()}, {self.grading}, {self.ring})"

    def to_json(self) -> dict:
        return {"n": self.n, "ring": self.ring.to_json(),
                "complexes": [A.to_json() for A in self.complexes],
                "maps": [_map_json(a) for a in self.maps]}

    @classmethod
    def from_json(cls, data: dict, ring: Ring | None = None) -> "QuiverObject":
        ring = ring or ring_from_json(data["ring"])
        cs = [GradedComplex.from_json(c, ring) for c in data["complexes"]]
        if "n" in data and int(data["n"]) != len(cs) + 1:
            raise QuiverError("n does not match the number of complexes")
        # maps are stored against the degree-sorted basis used by the complex JSON
        ms = []
        for i, m in enumerate(data["maps"]):
            M = ExactMatrix.from_json(m["matrix"] if isinstance(m, dict) and "matrix" in m else m, ring)
            ms.append(GradedMorphism(cs[i], cs[i + 1], 0, M))
        return cls(cs, ms)


def _map_json(a: GradedMorphism) -> dict:
    """Map matrix against the degree-sorted bases written by GradedComplex.to_json."""
    so = sorted(range(a.source.dim), key=lambda i: a.source.degrees[i])
    to = sorted(range(a.target.dim), key=lambda i: a.target.degrees[i])
    return {"matrix": a.matrix[to, :][:, so].to_json() if a.matrix.rows and a.matrix.cols
            else a.matrix.to_json()}


def _sorted_complex(A: GradedComplex) -> GradedComplex:
    return A.permuted(sorted(range(A.dim), key=lambda i: A.degrees[i]))


def normalized(obj: QuiverObject) -> QuiverObject:
    """The same object with every basis sorted by degree (the form used for JSON)."""
    orders = [sorted(range(A.dim), key=lambda i: A.degrees[i]) for A in obj.complexes]
    cs = [A.permuted(o) for A, o in zip(obj.complexes, orders)]
    ms = []
    for i, a in enumerate(obj.maps):
        M = a.matrix
        if M.rows and M.cols:
            M = M[orders[i + 1], :][:, orders[i]]
        ms.append(GradedMorphism(cs[i], cs[i + 1], 0, M, check=False))
    return QuiverObject(cs, ms, check=False)


__all__.append("normalized")


class QuiverMorphism:
    """A degree-k morphism (f_1, h_1, f_2, …, h_{n−2}, f_{n−1})."""

    def __init__(self, source: QuiverObject, target: QuiverObject, degree: int,
                 f: Sequence[GradedMorphism], h: Sequence[GradedMorphism], check: bool = True):
        if source.n != target.n:
            raise QuiverError("morphism between quivers of different length")
        f, h = list(f), list(h)
        if len(f) != source.n - 1 or len(h) != source.n - 2:
            raise QuiverError("wrong number of components")
        self.source, self.target = source, target
        self.degree = source.complexes[0].reduce(degree)
        self.f = tuple(f)
        self.h = tuple(h)
        if check:
            for i, fi in enumerate(f):
                if fi.source != source.complexes[i] or fi.target != target.complexes[i]:
                    raise QuiverError(f"f_{i + 1} has the wrong source or target")
                if fi.degree != self.degree:
                    raise QuiverError(f"f_{i + 1} has degree {fi.degree}, expected {self.degree}")
            for i, hi in enumerate(h):
                if hi.source != source.complexes[i] or hi.target != target.complexes[i + 1]:
                    raise QuiverError(f"h_{i + 1} has the wrong source or target")
                if hi.degree != source.complexes[0].reduce(self.degree - 1):
                    raise QuiverError(f"h_{i + 1} must have degree {self.degree - 1}")

    @property
    def n(self) -> int:
        return self.source.n

    def fi(self, i: int) -> GradedMorphism:
        """f_i for 0 ≤ i ≤ n (zero at the padding)."""
        if i == 0 or i == self.n:
            return _zero_map(self.source.A(i), self.target.A(i), self.degree)
        return self.f[i - 1]

    def hi(self, i: int) -> GradedMorphism:
        """h_i for 0 ≤ i ≤ n − 1 (zero at the padding)."""
        if i == 0 or i == self.n - 1:
            return _zero_map(self.source.A(i), self.target.A(i + 1), self.degree - 1)
        return self.h[i - 1]

    def _sign(self) -> int:
        return -1 if self.degree % 2 else 1

    def differential(self) -> "QuiverMorphism":
        """d(f, h) = (df_i, dh_i + (−1)^k (b_i f_i − f_{i+1} a_i))."""
        s = self._sign()
        df = [fi.differential() for fi in self.f]
        dh = []
        for i in range(1, self.n - 1):
            extra = (self.target.a(i) @ self.fi(i)) - (self.fi(i + 1) @ self.source.a(i))
            dh.append(self.hi(i).differential() + (extra if s == 1 else -extra))
        return QuiverMorphism(self.source, self.target, self.degree + 1, df, dh, check=False)

    def is_closed(self) -> bool:
        d = self.differential()
        return all(x.is_zero() for x in d.f) and all(x.is_zero() for x in d.h)

    def __matmul__(self, other: "QuiverMorphism") -> "QuiverMorphism":
        """(f′, h′)∘(f, h) = (f′f, f′_{i+1} h_i + (−1)^k h′_i f_i) with k = |(f, h)|."""
        if other.target != self.source:
            raise QuiverError("composing quiver morphisms with mismatched ends")
        s = other._sign()
        f = [x @ y for x, y in zip(self.f, other.f)]
        h = []
        for i in range(1, self.n - 1):
            t = self.hi(i) @ other.fi(i)
            h.append(self.fi(i + 1) @ other.hi(i) + (t if s == 1 else -t))
        return QuiverMorphism(other.source, self.target, self.degree + other.degree, f, h, check=False)

    def __add__(self, other):
        return QuiverMorphism(self.source, self.target, self.degree,
                              [x + y for x, y in zip(self.f, other.f)],
                              [x + y for x, y in zip(self.h, other.h)], check=False)

    def __sub__(self, other):
        return QuiverMorphism(self.source, self.target, self.degree,
                              [x - y for x, y in zip(self.f, other.f)],
                              [x - y for x, y in zip(self.h, other.h)], check=False)

    def __neg__(self):
        return QuiverMorphism(self.source, self.target, self.degree,
                              [-x for x in self.f], [-x for x in self.h], check=False)

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.f) and all(x.is_zero() for x in self.h)

    def __eq__(self, other):
        if not isinstance(other, QuiverMorphism):
            return NotImplemented
        return (self.degree == other.degree and self.source == other.source and self.target == other.target
                and all(x.matrix == y.matrix for x, y in zip(self.f, other.f))
                and all(x.matrix == y.matrix for x, y in zip(self.h, other.h)))

    def __hash__(self):
        return hash((self.degree, self.f[0].matrix))

    def __repr__(self):
        return f"QuiverMorphism(deg {self.degree}, n={self.n})"


# --------------------------------------------------------------------------
# validation


@dataclass
class QuiverReport:
    kind: str
    closed: bool
    degree: int
    problems: list[str] = field(default_factory=list)
    slot_witnesses: list[HomotopyWitness] | None = None

    @property
    def homotopy_equivalence(self) -> bool | None:
        if self.slot_witnesses is None:
            return None
        return self.closed and self.degree == 0 and all(w is not None for w in self.slot_witnesses)

    @property
    def ok(self) -> bool:
        return self.closed and not self.problems


def validate(x: QuiverObject | QuiverMorphism, classify: bool = False) -> QuiverReport:
    """Closedness and degree, and optionally the slot-wise homotopy-equivalence criterion.

    A closed degree-0 morphism is a homotopy equivalence exactly when every f_i
    is; ``classify`` asks for slot witnesses (field coefficients only).
    """
    if isinstance(x, QuiverObject):
        problems = []
        for i in range(1, x.n - 1):
            a = x.a(i)
            if a.source != x.A(i) or a.target != x.A(i + 1):
                problems.append(f"a_{i} is not composable")
            elif not a.is_closed():
                problems.append(f"da_{i} ≠ 0")
            if a.degree != 0:
                problems.append(f"a_{i} has degree {a.degree}")
        return QuiverReport("object", not problems, 0, problems)
    if not isinstance(x, QuiverMorphism):
        raise TypeError(f"cannot validate {type(x).__name__}")
    d = x.differential()
    problems = [f"df_{i + 1} ≠ 0" for i, y in enumerate(d.f) if not y.is_zero()]
    problems += [f"dh_{i + 1} ≠ (−1)^(k+1)(b f − f a)" for i, y in enumerate(d.h) if not y.is_zero()]
    closed = not problems
    witnesses = None
    if classify and closed and x.degree == 0:
        witnesses = [is_homotopy_equivalence(fi) for fi in x.f]
    return QuiverReport("morphism", closed, x.degree, problems, witnesses)


# --------------------------------------------------------------------------
# restriction and components


def _two_term_cone_morphism(F1: GradedMorphism, H: GradedMorphism, F2: GradedMorphism,
                            src: GradedComplex, tgt: GradedComplex, k: int) -> GradedMorphism:
    """𝔟((−1)^k F1, H, F2) between the given cones."""
    first = F1.matrix * (-1) if k % 2 else F1.matrix
    return GradedMorphism(src, tgt, k, assemble([[first, _zmat(src.ring, F1.target.dim, F2.source.dim)],
                                                  [H.matrix, F2.matrix]]), check=False)


def restrict(x: QuiverObject | QuiverMorphism, k: int):
    """j_k(A) = C(a_{k−1}) and j_k(f) = 𝔟(f_{k−1}, h_{k−1}, f_k), for 1 ≤ k ≤ n."""
    if not 1 <= k <= x.n:
        raise QuiverError(f"restriction index {k} outside 1..{x.n}")
    if isinstance(x, QuiverObject):
        return cone(x.a(k - 1))
    src, tgt = restrict(x.source, k), restrict(x.target, k)
    return _two_term_cone_morphism(x.fi(k - 1), x.hi(k - 1), x.fi(k), src, tgt, x.degree)


def component(x: QuiverObject | QuiverMorphism, i: int, j: int):
    """u_{i,j}: the slice A_i → … → A_j (and f_i, h_i, …, f_j on morphisms)."""
    if not 1 <= i < j <= x.n - 1:
        raise QuiverError(f"component ({i}, {j}) needs 1 ≤ i < j ≤ {x.n - 1}")
    if isinstance(x, QuiverObject):
        return QuiverObject(x.complexes[i - 1:j], x.maps[i - 1:j - 1], check=False)
    return QuiverMorphism(component(x.source, i, j), component(x.target, i, j), x.degree,
                          x.f[i - 1:j], x.h[i - 1:j - 1], check=False)


# --------------------------------------------------------------------------
# Coxeter functor and its powers


def chi(mor: QuiverMorphism, i1: int, i2: int) -> GradedMorphism:
    """χ(h)_{i1}^{i2} = Σ_j b_{i2}∘…∘b_{j+1}∘h_j∘a_{j−1}∘…∘a_{i1}: A_{i1} → B_{i2+1}."""
    A, B = mor.source, mor.target
    total = _zero_map(A.A(i1), B.A(i2 + 1), mor.degree - 1)
    for j in range(i1, i2 + 1):
        total = total + B.abar(j + 1, i2 + 1) @ mor.hi(j) @ A.abar(i1, j)
    return total


def _slot_spec(n: int, k: int, i: int) -> tuple[str, int, int]:
    """Which composite feeds slot i of c_{n,k}: ('plain', k, k+i) or ('shifted', k+i−n, k)."""
    if i <= n - k:
        return "plain", k, k + i
    return "shifted", k + i - n, k


def _model_slot(obj: QuiverObject, k: int, i: int) -> GradedComplex:
    kind, s, e = _slot_spec(obj.n, k, i)
    C = cone(obj.abar(s, e))
    return C if kind == "plain" else shift(C, 1)


def _check_model_k(obj_or_n, k: int, grading: str, allow_shift: bool) -> tuple[int, int]:
    """Return (k′, shift) with c_{n,k} = c_{n,k′}[shift]; k′ = 0 means identity."""
    n = obj_or_n
    if grading == "Z2":
        kk = k % n
        return kk, 0
    if 1 <= k <= n - 1:
        return k, 0
    if not allow_shift:
        raise QuiverError(f"c_({n},{k}) is only defined in ℤ/2-graded mode or with an explicit "
                          f"[2⌊k/n⌋] shift (pass allow_shift=True)")
    q, kk = divmod(k, n)
    return kk, 2 * q


def _model_object(obj: QuiverObject, k: int) -> QuiverObject:
    """Uniform c_{n,k} slot formula for 1 ≤ k ≤ n (k = n gives A[2])."""
    n = obj.n
    slots = [_model_slot(obj, k, i) for i in range(1, n)]
    maps = []
    ring = obj.ring
    for i in range(1, n - 1):
        kind, s, e = _slot_spec(n, k, i)
        src, tgt = slots[i - 1], slots[i]
        if kind == "plain" and i + 1 <= n - k:
            # 𝔡(id, a_{k+i}): C(ā_{k→k+i}) → C(ā_{k→k+i+1})
            x = obj.a(k + i).matrix
            Ak = obj.A(k)
            M = assemble([[ExactMatrix.identity(ring, Ak.dim), _zmat(ring, Ak.dim, x.cols)],
                          [_zmat(ring, x.rows, Ak.dim), x]])
        elif kind == "plain":
            # i = n−k: A_k[1] (as C(A_k → 0)) to C(ā_{1→k})[1], which is 𝔡(a_0, id)
            x = obj.a(0).matrix
            Ak = obj.A(k)
            M = assemble([[x, _zmat(ring, x.rows, Ak.dim)],
                          [_zmat(ring, Ak.dim, x.cols), ExactMatrix.identity(ring, Ak.dim)]])
        else:
            # 𝔡(a_s, id)[1]: C(ā_{s→k})[1] → C(ā_{s+1→k})[1]
            x = obj.a(s).matrix
            Ak = obj.A(k)
            M = assemble([[x, _zmat(ring, x.rows, Ak.dim)],
                          [_zmat(ring, Ak.dim, x.cols), ExactMatrix.identity(ring, Ak.dim)]])
        maps.append(GradedMorphism(src, tgt, 0, M, check=False))
    return QuiverObject(slots, maps, check=False)


def _model_morphism(mor: QuiverMorphism, k: int, src: QuiverObject, tgt: QuiverObject) -> QuiverMorphism:
    n = mor.n
    deg = mor.degree
    ring = mor.source.ring
    F, H = [], []
    for i in range(1, n):
        kind, s, e = _slot_spec(n, k, i)
        S, T = src.complexes[i - 1], tgt.complexes[i - 1]
        if kind == "plain":
            blk = _two_term_cone_morphism(mor.fi(s), chi(mor, s, e - 1), mor.fi(e),
                                          cone(mor.source.abar(s, e)), cone(mor.target.abar(s, e)), deg)
            M = blk.matrix
        else:
            blk = _two_term_cone_morphism(mor.fi(s), chi(mor, s, e - 1), mor.fi(e),
                                          cone(mor.source.abar(s, e)), cone(mor.target.abar(s, e)), deg)
            M = blk.matrix * (-1) if deg % 2 else blk.matrix
        F.append(GradedMorphism(S, T, deg, M, check=False))
    for i in range(1, n - 1):
        kind, s, e = _slot_spec(n, k, i)
        S, T = src.complexes[i - 1], tgt.complexes[i]
        if kind == "plain" and i + 1 <= n - k:
            hh = mor.hi(k + i).matrix
            Ak, Bk = mor.source.A(k), mor.target.A(k)
            M = assemble([[_zmat(ring, Bk.dim, Ak.dim), _zmat(ring, Bk.dim, hh.cols)],
                          [_zmat(ring, hh.rows, Ak.dim), hh]])
        else:
            # 𝔡(h_s, 0) in the shifted region (s = 0 at the seam, where h_0 = 0)
            s2 = s if kind == "shifted" else 0
            hh = mor.hi(s2).matrix
            Ak, Bk = mor.source.A(k), mor.target.A(k)
            M = assemble([[hh, _zmat(ring, hh.rows, Ak.dim)],
                          [_zmat(ring, Bk.dim, hh.cols), _zmat(ring, Bk.dim, Ak.dim)]])
        H.append(GradedMorphism(S, T, deg - 1, M, check=False))
    return QuiverMorphism(src, tgt, deg, F, H, check=False)


def coxeter_model(x: QuiverObject | QuiverMorphism, k: int, allow_shift: bool = False):
    """c_{n,k} on objects or morphisms.

    ℤ/2 mode: k is read modulo n and k ≡ 0 gives the identity functor.  ℤ mode:
    1 ≤ k ≤ n − 1, or any k with ``allow_shift`` (then c_{n,k′}[2⌊k/n⌋]).
    """
    grading = (x.grading if isinstance(x, QuiverObject) else x.source.grading)
    n = x.n
    kk, sh = _check_model_k(n, k, grading, allow_shift)
    if isinstance(x, QuiverObject):
        out = x if kk == 0 else _model_object(x, kk)
        return out.shift(sh) if sh else out
    if kk == 0:
        out = x
    else:
        out = _model_morphism(x, kk, _model_object(x.source, kk), _model_object(x.target, kk))
    return shift_morphism(out, sh) if sh else out


def shift_morphism(mor: QuiverMorphism, m: int) -> QuiverMorphism:
    """f[m]: every component multiplied by (−1)^{m k}."""
    src, tgt = mor.source.shift(m), mor.target.shift(m)
    sgn = -1 if (m * mor.degree) % 2 else 1
    f = [GradedMorphism(src.complexes[i], tgt.complexes[i], mor.degree, x.matrix * sgn, check=False)
         for i, x in enumerate(mor.f)]
    h = [GradedMorphism(src.complexes[i], tgt.complexes[i + 1], x.degree, x.matrix * sgn, check=False)
         for i, x in enumerate(mor.h)]
    return QuiverMorphism(src, tgt, mor.degree, f, h, check=False)


__all__.append("shift_morphism")


def coxeter(x: QuiverObject | QuiverMorphism):
    """The Coxeter functor c_n = c_{n,1}."""
    return coxeter_model(x, 1)


# --------------------------------------------------------------------------
# witnesses


@dataclass
class QuiverWitness:
    """A closed degree-0 quiver morphism with a homotopy-equivalence witness per slot."""

    morphism: QuiverMorphism
    slots: list[HomotopyWitness]

    def verify(self) -> bool:
        m = self.morphism
        if m.degree != 0 or not m.is_closed():
            return False
        if len(self.slots) != len(m.f):
            return False
        for fi, w in zip(m.f, self.slots):
            if w is None or w.forward.matrix != fi.matrix or w.forward.source != fi.source:
                return False
            if not w.verify():
                return False
        return True


def adjust_quiver(src: QuiverObject, tgt: QuiverObject, slots: Sequence[HomotopyWitness],
                  solve_fallback: bool = True) -> QuiverMorphism:
    """The morphism (m_i, h_i) with h_i = m_{i+1}∘x_i∘ξ_i.

    When the target maps are exactly y_i = m_{i+1} x_i m_i′ this is closed as
    it stands; otherwise the remaining defect m_{i+1} x_i − y_i m_i − dh_i is
    closed and, over a field, is absorbed by a null-homotopy.
    """
    n = src.n
    ms = [w.forward for w in slots]
    hs = []
    for i in range(1, n - 1):
        x, y = src.a(i), tgt.a(i)
        w = slots[i - 1]
        h = ms[i] @ x @ w.xi_gf
        defect = (ms[i] @ x) - (y @ ms[i - 1]) - h.differential()
        if not defect.is_zero():
            if not solve_fallback:
                raise QuiverError(f"slot {i}: target map is not m x m′ and no fallback was allowed")
            extra = null_homotopy(defect)
            if extra is None:
                raise QuiverError(f"slot {i}: correction is not null-homotopic")
            h = h + extra
        hs.append(h)
    return QuiverMorphism(src, tgt, 0, ms, hs, check=False)


def coxeter_power_witness(obj: QuiverObject, k: int) -> QuiverWitness:
    """The equivalence c_n(c_{n,k−1}(A)) → c_{n,k}(A) for 2 ≤ k ≤ n (k = n: target A[2]).

    Slots i ≤ n − k use η₃ with a₁ = a_{k−1}, a₂ = ā_{k→k+i}; slots
    n − k < i ≤ n − 2 use the cone rotation with a₁ = ā_{k+i−n→k−1},
    a₂ = a_{k−1}; the last slot is the identity.  k = 1 is the identity witness.
    """
    n = obj.n
    if not 1 <= k <= n:
        raise QuiverError(f"power witness needs 1 ≤ k ≤ {n}")
    if k == 1:
        C = coxeter(obj)
        return QuiverWitness(C.identity(), [_identity_witness(X) for X in C.complexes])
    prev = _model_object(obj, k - 1)
    src = coxeter(prev)
    tgt = _model_object(obj, k)
    slots = []
    a_prev = obj.a(k - 1)
    for i in range(1, n):
        if i <= n - k:
            w, _ = eta_cone_triple(a_prev, obj.abar(k, k + i))
        elif i <= n - 2:
            w = cone_rotation(obj.abar(k + i - n, k - 1), a_prev)
        else:
            w = _identity_witness(src.complexes[i - 1])
        S, T = src.complexes[i - 1], tgt.complexes[i - 1]
        if w.forward.source != S or w.forward.target != T:
            raise QuiverError(f"slot {i}: lemma equivalence does not match the Coxeter slots")
        slots.append(w)
    m = adjust_quiver(src, tgt, slots)
    return QuiverWitness(m, slots)


def _identity_witness(X: GradedComplex) -> HomotopyWitness:
    z = X.zero_map(X, -1)
    return HomotopyWitness(X.identity(), X.identity(), z, z)


def coxeter_power_chain(obj: QuiverObject, k: int) -> tuple[QuiverObject, QuiverWitness]:
    """c_n^k(A) together with a validated equivalence c_n^k(A) → c_{n,k}(A) (1 ≤ k ≤ n).

    Φ_1 = id and Φ_k = W_k ∘ c_n(Φ_{k−1}).  Slot witnesses of the composite
    are solved over the field (the slot maps are composites of equivalences).
    """
    n = obj.n
    if not 1 <= k <= n:
        raise QuiverError(f"power chain needs 1 ≤ k ≤ {n}")
    power = coxeter(obj)
    phi = coxeter_power_witness(obj, 1).morphism
    for j in range(2, k + 1):
        W = coxeter_power_witness(obj, j)
        power = coxeter(power)
        phi = W.morphism @ coxeter(phi)
    slots = [is_homotopy_equivalence(fi) for fi in phi.f]
    return power, QuiverWitness(phi, slots)


def injective(n: int, i: int, ring: Ring, grading: str = "Z2") -> QuiverObject:
    """I_i = k → k → … → k → 0 → … → 0 with i leading copies of k."""
    return _indicator(n, list(range(1, i + 1)), ring, grading)


def projective(n: int, i: int, ring: Ring, grading: str = "Z2") -> QuiverObject:
    """P_i = 0 → … → 0 → k → … → k starting at vertex i."""
    return _indicator(n, list(range(i, n)), ring, grading)


def _indicator(n: int, support: list[int], ring: Ring, grading: str) -> QuiverObject:
    k1 = GradedComplex(ring, [0], None, grading)
    z = zero_complex(ring, grading)
    cs = [k1 if v in support else z for v in range(1, n)]
    ms = []
    for v in range(1, n - 1):
        S, T = cs[v - 1], cs[v]
        M = ExactMatrix.identity(ring, 1) if (S.dim and T.dim) else _zmat(ring, T.dim, S.dim)
        ms.append(GradedMorphism(S, T, 0, M))
    return QuiverObject(cs, ms)


def injective_projective_check(n: int, ring: Ring, grading: str = "Z2") -> list[QuiverWitness]:
    """Witnesses c_n(I_i) ≃ P_i[1] for i = 1..n−1.

    Slot maps are the identity on the surviving k[1] and zero on the
    contractible cones C(id_k); diagonals come from null-homotopies.
    """
    out = []
    for i in range(1, n):
        src = coxeter(injective(n, i, ring, grading))
        tgt = projective(n, i, ring, grading).shift(1)
        slots = []
        for v in range(1, n):
            S, T = src.complexes[v - 1], tgt.complexes[v - 1]
            if T.dim == 0:
                f = GradedMorphism(S, T, 0, _zmat(ring, 0, S.dim))
            else:
                # S = k[1] (as C(k → 0)), T = k[1]
                f = GradedMorphism(S, T, 0, ExactMatrix.identity(ring, 1))
            w = is_homotopy_equivalence(f)
            if w is None:
                raise QuiverError(f"slot {v} of c_n(I_{i}) is not equivalent to P_{i}[1]")
            slots.append(w)
        m = adjust_quiver(src, tgt, slots)
        out.append(QuiverWitness(m, slots))
    return out


def rotation_witness(obj: QuiverObject, l: int) -> HomotopyWitness:
    """j_l(c_n(A)) ≃ j_{l+1}(A) for 1 ≤ l ≤ n − 1 and j_n(c_n(A)) = j_1(A)[2].

    For 2 ≤ l ≤ n − 1 this is η₃ with a₁ = ā_{1→l}, a₂ = a_l; the two ends are
    literal equalities.
    """
    n = obj.n
    if not 1 <= l <= n:
        raise QuiverError(f"restriction index {l} outside 1..{n}")
    C = coxeter(obj)
    src = restrict(C, l)
    if l == 1 or l == n:
        tgt = restrict(obj, l + 1) if l == 1 else shift(restrict(obj, 1), 2)
        if src != tgt:
            raise ComplexError("end slot of the rotation is not a literal equality")
        return _identity_witness(src)
    w, _ = eta_cone_triple(obj.abar(1, l), obj.a(l))
    if w.forward.source != src:
        raise ComplexError("rotation witness does not start at j_l(c(A))")
    return w


# --------------------------------------------------------------------------
# morphism spaces by linear algebra


def _slots(A: QuiverObject, B: QuiverObject, k: int) -> list[tuple[str, int, list[tuple[int, int]]]]:
    """Homogeneous entry positions of every component of a degree-k morphism A → B."""
    out = []
    for i in range(1, A.n):
        S, T = A.A(i), B.A(i)
        out.append(("f", i, [(r, c) for r in range(T.dim) for c in range(S.dim)
                             if T.reduce(T.degrees[r] - S.degrees[c] - k) == 0]))
    for i in range(1, A.n - 1):
        S, T = A.A(i), B.A(i + 1)
        out.append(("h", i, [(r, c) for r in range(T.dim) for c in range(S.dim)
                             if T.reduce(T.degrees[r] - S.degrees[c] - k + 1) == 0]))
    return out


def _flatten(mor: QuiverMorphism, layout) -> list:
    vals = []
    for kind, i, pos in layout:
        M = (mor.fi(i) if kind == "f" else mor.hi(i)).matrix.array
        vals.extend(M[r, c] for r, c in pos)
    return vals


def _unflatten(A: QuiverObject, B: QuiverObject, k: int, layout, vec) -> QuiverMorphism:
    ring = A.ring
    f, h = [], []
    t = 0
    for kind, i, pos in layout:
        S = A.A(i)
        T = B.A(i) if kind == "f" else B.A(i + 1)
        arr = np.array(_zmat(ring, T.dim, S.dim).array, copy=True)
        for r, c in pos:
            arr[r, c] = ring.normalize(vec[t])
            t += 1
        m = GradedMorphism(S, T, k if kind == "f" else k - 1, ExactMatrix(ring, arr, shape=(T.dim, S.dim)),
                           check=False)
        (f if kind == "f" else h).append(m)
    return QuiverMorphism(A, B, k, f, h, check=False)


def _differential_matrix(A: QuiverObject, B: QuiverObject, k: int):
    src_layout = _slots(A, B, k)
    tgt_layout = _slots(A, B, k + 1)
    n_src = sum(len(p) for _, _, p in src_layout)
    cols = []
    for t in range(n_src):
        e = [0] * n_src
        e[t] = 1
        cols.append(_flatten(_unflatten(A, B, k, src_layout, e).differential(), tgt_layout))
    ring = A.ring
    n_tgt = sum(len(p) for _, _, p in tgt_layout)
    M = ExactMatrix(ring, [[cols[j][i] for j in range(n_src)] for i in range(n_tgt)], shape=(n_tgt, n_src))
    return M, src_layout, tgt_layout


def quiver_null_homotopy(D: QuiverMorphism) -> QuiverMorphism | None:
    """X of degree |D| − 1 with dX = D, or None (field coefficients)."""
    from .exactalg import solve
    A, B = D.source, D.target
    M, src_layout, tgt_layout = _differential_matrix(A, B, D.degree - 1)
    rhs = ExactMatrix(A.ring, [[v] for v in _flatten(D, tgt_layout)], shape=(M.rows, 1))
    if M.cols == 0:
        return _unflatten(A, B, D.degree - 1, src_layout, []) if rhs.is_zero() else None
    x = solve(M, rhs)
    if x is None:
        return None
    return _unflatten(A, B, D.degree - 1, src_layout, [x.array[t, 0] for t in range(x.rows)])


def closed_quiver_morphisms(A: QuiverObject, B: QuiverObject, k: int = 0) -> list[QuiverMorphism]:
    """A basis of the closed degree-k morphisms A → B (field coefficients)."""
    from .exactalg import nullspace
    M, layout, _ = _differential_matrix(A, B, k)
    if M.cols == 0:
        return []
    K = nullspace(M)
    return [_unflatten(A, B, k, layout, [K.array[t, c] for t in range(K.rows)]) for c in range(K.cols)]


def random_closed_quiver_morphism(A: QuiverObject, B: QuiverObject, rng, k: int = 0) -> QuiverMorphism:
    basis = closed_quiver_morphisms(A, B, k)
    out = _unflatten(A, B, k, _slots(A, B, k), [0] * sum(len(p) for _, _, p in _slots(A, B, k)))
    for m in basis:
        c = int(rng.integers(-2, 3))
        if c:
            out = out + QuiverMorphism(A, B, k, [x * c for x in m.f], [x * c for x in m.h], check=False)
    return out


__all__ += ["quiver_null_homotopy", "closed_quiver_morphisms", "random_closed_quiver_morphism"]
