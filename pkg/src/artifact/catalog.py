"""The three DGA families attached to the pinwheel Legendrian, and the tame change of variables.

``build_CE(p)`` is the Chekanov–Eliashberg algebra with generators ``a[i]``,
``b[i,j]``, ``c[i,j]``, ``c'[i,j]``; ``build_A(p)`` the small model with
``x[i]``, ``y[i,j]``; ``build_B(p)`` the algebra on the barred generators
``abar``, ``bbar``, ``cbar``, ``c'bar``.  All are ℤ/2-graded and default to
integer coefficients, so every sign is exercised.

The change of variables expresses each barred generator as a polynomial in
the unbarred ones.  Generator ranks follow the five ordering rules
``b < a < c < c'``, ``a`` by index, ``c`` by ``i - j`` then ``i``, ``c'`` by
``i - j``; with this ordering every substitution is triangular, which is what
makes the change of variables a tame isomorphism.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .exactalg import ZZ, Ring
from .freedga import (
    FamilyParameterError, Generator, NCPoly, SemifreeDGA, Substitution, apply_substitution,
    check_d_squared, compose_automorphisms, differentiate, gen_key, stabilize, substitute,
    tame_factorization, triangular_leads,
)

__all__ = [
    "build_CE", "build_A", "build_B", "beta_table", "change_of_variables",
    "verify_transformed_differentials", "verify_stabilization", "five_rule_ordering",
    "relabel_A_as_B", "TransformReport", "BetaTable", "transported_B",
    "elementary_steps", "factorization_reproduces", "stabilization_pairs",
]


def _check_p(p: int) -> None:
    if not isinstance(p, int) or p < 3:
        raise FamilyParameterError(f"the pinwheel families need p >= 3, got {p!r}")


def _lower_pairs(p):
    return [(i, j) for i in range(1, p + 1) for j in range(1, i)]


def _all_pairs(p):
    return [(i, j) for i in range(1, p + 1) for j in range(1, p + 1)]


def _ce_generators(p: int, fam=("a", "b", "c", "c'")) -> list[Generator]:
    """Generators in the five-rule order; ``fam`` renames the four families."""
    fa, fb, fc, fcp = fam
    gens: list[Generator] = []
    by_diag = lambda ij: (ij[0] - ij[1], ij[0])
    for i, j in sorted(_lower_pairs(p), key=by_diag):
        gens.append(Generator(fb, (i, j), 0, len(gens)))
    for i in range(1, p + 1):
        gens.append(Generator(fa, (i,), 1, len(gens)))
    for i, j in sorted(_lower_pairs(p), key=by_diag):
        gens.append(Generator(fc, (i, j), 1, len(gens)))
    for i, j in sorted(_all_pairs(p), key=by_diag):
        gens.append(Generator(fcp, (i, j), 1, len(gens)))
    return gens


def five_rule_ordering(p: int) -> list[str]:
    """Generator keys of ``build_CE(p)`` from smallest to largest."""
    _check_p(p)
    return [g.key for g in _ce_generators(p)]


class _Symbols:
    """Polynomial constructors with the index conventions c_{i0} = a_i, b_ii = c_ii = 1."""

    def __init__(self, ring: Ring, fam=("a", "b", "c", "c'")):
        self.ring = ring
        self.fa, self.fb, self.fc, self.fcp = fam

    def one(self):
        return NCPoly.one(self.ring)

    def zero(self):
        return NCPoly.zero(self.ring)

    def a(self, i):
        return NCPoly.gen(self.ring, gen_key(self.fa, (i,)))

    def b(self, i, j):
        if i == j:
            return self.one()
        return NCPoly.gen(self.ring, gen_key(self.fb, (i, j)))

    def c(self, i, j):
        if i == j:
            return self.one()
        if j == 0:
            return self.a(i)
        return NCPoly.gen(self.ring, gen_key(self.fc, (i, j)))

    def cp(self, i, j):
        return NCPoly.gen(self.ring, gen_key(self.fcp, (i, j)))


def _delta(i, j) -> int:
    return 1 if i == j else 0


def build_CE(p: int, ring: Ring = ZZ) -> SemifreeDGA:
    """The Chekanov–Eliashberg DGA of the (p, 1) pinwheel Legendrian, with t = 1."""
    _check_p(p)
    s = _Symbols(ring)
    d: dict[str, NCPoly] = {}
    for i in range(1, p + 1):
        # da_i = dc_{i0} = -δ_{i,p} + Σ_{k=1}^{i-1} c_ik a_k
        d[gen_key("a", (i,))] = _dc(s, p, i, 0)
    for i, j in _lower_pairs(p):
        d[gen_key("b", (i, j))] = _db(s, i, j)
        d[gen_key("c", (i, j))] = _dc(s, p, i, j)
    for i, j in _all_pairs(p):
        acc = s.one() * _delta(i, j)
        for k in range(1, i):
            acc = acc + s.c(i, k) * s.cp(k, j)
        for k in range(j + 1, p + 1):
            acc = acc + s.cp(i, k) * s.c(k, j)
        d[gen_key("c'", (i, j))] = acc
    return SemifreeDGA("Z2", ring, _ce_generators(p), d, name=f"CE(Lambda_{p},1)")


def _dc(s: _Symbols, p: int, i: int, j: int) -> NCPoly:
    acc = s.one() * (-_delta(i - j, p))
    for k in range(j + 1, i):
        acc = acc + s.c(i, k) * s.c(k, j)
    return acc


def _db(s: _Symbols, i: int, j: int) -> NCPoly:
    """db_ij = Σ_{k=j}^{i} (c_ik b_kj − b_ik c_{(k−1)(j−1)}) with the index conventions."""
    acc = s.zero()
    for k in range(j, i + 1):
        acc = acc + s.c(i, k) * s.b(k, j) - s.b(i, k) * s.c(k - 1, j - 1)
    return acc


def build_A(p: int, ring: Ring = ZZ, fam=("x", "y")) -> SemifreeDGA:
    """The algebra with degree-1 generators x_i, y_ij and the two displayed differentials."""
    _check_p(p)
    fx, fy = fam
    x = lambda i: NCPoly.gen(ring, gen_key(fx, (i,)))
    y = lambda i, j: NCPoly.gen(ring, gen_key(fy, (i, j)))
    one = NCPoly.one(ring)
    gens = [Generator(fx, (i,), 1, i - 1) for i in range(1, p + 1)]
    for i, j in sorted(_all_pairs(p), key=lambda ij: (ij[0] - ij[1], ij[0])):
        gens.append(Generator(fy, (i, j), 1, len(gens)))
    d = {}
    for i in range(1, p + 1):
        acc = one * (-_delta(i, p))
        for j in range(1, i):
            acc = acc + x(i - j) * x(j)
        d[gen_key(fx, (i,))] = acc
    for i, j in _all_pairs(p):
        acc = one * _delta(i, j)
        for k in range(1, i):
            acc = acc + x(i - k) * y(k, j)
        for k in range(j + 1, p + 1):
            acc = acc + y(i, k) * x(k - j)
        d[gen_key(fy, (i, j))] = acc
    return SemifreeDGA("Z2", ring, gens, d, name=f"A_{p},1")


B_FAMILIES = ("abar", "bbar", "cbar", "c'bar")


def build_B(p: int, ring: Ring = ZZ) -> SemifreeDGA:
    """The algebra on the barred generators with the four claimed differentials."""
    _check_p(p)
    fa, fb, fc, fcp = B_FAMILIES
    d = _claimed_B_differentials(p, ring)
    return SemifreeDGA("Z2", ring, _ce_generators(p, B_FAMILIES), d, name=f"B_{p},1")


def _claimed_B_differentials(p: int, ring: Ring) -> dict[str, NCPoly]:
    fa, fb, fc, fcp = B_FAMILIES
    A = build_A(p, ring, fam=(fa, fcp))
    d = dict(A.d)
    for i, j in _lower_pairs(p):
        d[gen_key(fb, (i, j))] = NCPoly.gen(ring, gen_key(fc, (i, j)))
        d[gen_key(fc, (i, j))] = NCPoly.zero(ring)
    return d


def relabel_A_as_B(p: int, ring: Ring = ZZ) -> SemifreeDGA:
    """A_{p,1} with x_i renamed to abar_i and y_ij renamed to c'bar_ij."""
    return build_A(p, ring, fam=(B_FAMILIES[0], B_FAMILIES[3]))


# --------------------------------------------------------------------------
# β table and the change of variables


@dataclass
class BetaTable:
    p: int
    ring: Ring
    entries: dict[tuple[int, int], NCPoly]

    def __getitem__(self, ij: tuple[int, int]) -> NCPoly:
        return self.entries[ij]

    def recursion_residuals(self) -> dict[tuple[int, int], NCPoly]:
        """β_ij − Σ_{k=j}^{i} b_ik β_{(k−1)(j−1)} for every i ≥ j ≥ 1 (all zero for the true table)."""
        s = _Symbols(self.ring)
        out = {}
        for i in range(1, self.p + 1):
            for j in range(1, i + 1):
                acc = s.zero()
                for k in range(j, i + 1):
                    acc = acc + s.b(i, k) * self.entries[(k - 1, j - 1)]
                res = self.entries[(i, j)] - acc if i != j else self.entries[(i, j)] - s.one()
                if res:
                    out[(i, j)] = res
        return out


def beta_table(p: int, ring: Ring = ZZ) -> BetaTable:
    """β_ij for p ≥ i ≥ j ≥ 0 from β_ij = Σ_{k=j}^{i} b_ik β_{(k−1)(j−1)}, β_ii = 1, β_i0 = 0."""
    _check_p(p)
    s = _Symbols(ring)
    t: dict[tuple[int, int], NCPoly] = {}
    for i in range(0, p + 1):
        t[(i, i)] = s.one()
        if i > 0:
            t[(i, 0)] = s.zero()
    for diff in range(1, p + 1):
        for j in range(1, p + 1 - diff):
            i = j + diff
            acc = s.zero()
            for k in range(j, i + 1):
                acc = acc + s.b(i, k) * t[(k - 1, j - 1)]
            t[(i, j)] = acc
    return BetaTable(p, ring, t)


def _barred_images(p: int, ring: Ring, beta: BetaTable) -> dict[str, NCPoly]:
    s = _Symbols(ring)
    fa, fb, fc, fcp = B_FAMILIES
    img: dict[str, NCPoly] = {}
    abar: dict[int, NCPoly] = {}
    for i in range(1, p + 1):
        acc = s.a(i)
        for j in range(1, i):
            acc = acc - beta[(i, j)] * abar[j]
        abar[i] = acc
        img[gen_key(fa, (i,))] = acc
    for i, j in _lower_pairs(p):
        img[gen_key(fb, (i, j))] = s.b(i, j)
        img[gen_key(fc, (i, j))] = _db(s, i, j)
    cpbar: dict[tuple[int, int], NCPoly] = {}
    for i in range(1, p + 1):
        for j in range(1, p + 1):
            acc = s.cp(i, j)
            for k in range(1, i):
                acc = acc - beta[(i, k)] * cpbar[(k, j)]
            for k in range(j + 1, p + 1):
                acc = acc + s.cp(i, k) * beta[(k, j)]
            cpbar[(i, j)] = acc
            img[gen_key(fcp, (i, j))] = acc
    return img


def change_of_variables(p: int, ring: Ring = ZZ, beta: BetaTable | None = None) -> Substitution:
    """The substitution sending each barred generator to its polynomial in ``build_CE(p)``."""
    _check_p(p)
    ce = build_CE(p, ring)
    beta = beta or beta_table(p, ring)
    images = _barred_images(p, ring, beta)
    targets = tuple(build_B(p, ring).generators)
    lead = triangular_leads(ce, targets, images)
    return Substitution(ce, targets, images, lead)


def elementary_steps(p: int, ring: Ring = ZZ):
    """The change of variables as elementary automorphisms ``E_1, ..., E_N`` (E_1 applied first)."""
    sub = change_of_variables(p, ring)
    return tame_factorization(sub, five_rule_ordering(p))


def factorization_reproduces(p: int, ring: Ring = ZZ) -> bool:
    """E_N ∘ ... ∘ E_1 followed by the relabeling equals the change of variables."""
    sub = change_of_variables(p, ring)
    composed = compose_automorphisms(elementary_steps(p, ring))
    return all(composed[sub.lead[new]] == img for new, img in sub.images.items())


@dataclass
class TransformReport:
    p: int
    residuals: dict[str, dict[str, NCPoly]] = field(default_factory=dict)

    def family_passed(self, family: str) -> bool:
        return not self.residuals.get(family)

    @property
    def passed(self) -> bool:
        return all(not v for v in self.residuals.values())

    def summary(self) -> dict[str, int]:
        return {fam: len(v) for fam, v in self.residuals.items()}


def verify_transformed_differentials(p: int, ring: Ring = ZZ, beta: BetaTable | None = None) -> TransformReport:
    """Compare d_CE(σ(ḡ)) with σ(claimed dḡ) for every barred generator.

    Also replays the auxiliary identity
    dβ_ij = Σ_{k=j+1}^{i} (c_{i(k−1)} β_{(k−1)j} − β_ik ā_{k−j}) under the
    family name ``beta``.  Residuals are exact polynomials; empty = pass.
    """
    _check_p(p)
    ce = build_CE(p, ring)
    beta = beta or beta_table(p, ring)
    images = _barred_images(p, ring, beta)
    claimed = _claimed_B_differentials(p, ring)
    report = TransformReport(p, {fam: {} for fam in (*B_FAMILIES, "beta")})
    for key, img in images.items():
        fam = key.split("[")[0]
        res = differentiate(ce, img) - substitute(claimed[key], images, ring)
        if res:
            report.residuals[fam][key] = res
    s = _Symbols(ring)
    abar = {i: images[gen_key(B_FAMILIES[0], (i,))] for i in range(1, p + 1)}
    for i in range(0, p + 1):
        for j in range(0, i + 1):
            want = s.zero()
            for k in range(j + 1, i + 1):
                want = want + s.c(i, k - 1) * beta[(k - 1, j)] - beta[(i, k)] * abar[k - j]
            res = differentiate(ce, beta[(i, j)]) - want
            if res:
                report.residuals["beta"][f"beta[{i},{j}]"] = res
    return report


def transported_B(p: int, ring: Ring = ZZ) -> SemifreeDGA:
    """The DGA obtained by transporting d_CE along the change of variables."""
    return apply_substitution(build_CE(p, ring), change_of_variables(p, ring), name=f"B_{p},1 (transported)")


def stabilization_pairs(p: int) -> list[tuple[Generator, Generator]]:
    _, fb, fc, _ = B_FAMILIES
    return [(Generator(fb, (i, j), 0, 0), Generator(fc, (i, j), 1, 0)) for i, j in _lower_pairs(p)]


def verify_stabilization(p: int, ring: Ring = ZZ, B: SemifreeDGA | None = None) -> bool:
    """True iff B equals relabeled A_{p,1} stabilized by the pairs (bbar_ij, cbar_ij)."""
    _check_p(p)
    B = B if B is not None else build_B(p, ring)
    stab = stabilize(relabel_A_as_B(p, ring), stabilization_pairs(p))
    return stab.same_up_to_ranks(B)
