"""Semifree noncommutative DGAs: polynomials, graded Leibniz rule, substitutions.

Words are tuples of generator keys stored left to right exactly as the
composition is written, so the word ``("y[1,2]", "x[1]")`` stands for
``y_12 ∘ x_1`` (apply ``x_1`` first).  The Leibniz rule differentiates a word
symbol by symbol from the left, with the sign ``(-1)^{|prefix|}``; in
ℤ/2-graded mode the sign uses the 0/1 representative of each degree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exactalg import QQ, ZZ, Ring, RingError, Scalar, Zmod, ring_from_json

__all__ = [
    "Generator", "NCPoly", "SemifreeDGA", "Substitution", "DGAError",
    "FiltrationError", "DegreeError", "FamilyParameterError",
    "gen_key", "parse_key", "multiply", "differentiate", "check_d_squared",
    "elementary_automorphism", "apply_substitution", "stabilize",
    "is_valid_tame_ordering",
]


class DGAError(ValueError):
    """Malformed DGA data (unknown generators, name collisions, bad assignments)."""


class FiltrationError(DGAError):
    """A tail uses a generator that is not strictly smaller than its target."""


class DegreeError(DGAError):
    """A polynomial has the wrong degree for its role."""


class FamilyParameterError(ValueError):
    """Raised for family parameters outside the supported range (p < 3)."""


Word = tuple


def gen_key(family: str, indices: Sequence[int]) -> str:
    """Canonical string key of a generator, e.g. ``gen_key("b", (2, 1)) == "b[2,1]"``."""
    return f"{family}[{','.join(str(i) for i in indices)}]"


def parse_key(key: str) -> tuple[str, tuple[int, ...]]:
    family, _, rest = key.partition("[")
    if not rest.endswith("]"):
        raise DGAError(f"malformed generator key {key!r}")
    body = rest[:-1]
    indices = tuple(int(t) for t in body.split(",")) if body else ()
    return family, indices


@dataclass(frozen=True)
class Generator:
    family: str
    indices: tuple[int, ...]
    degree: int
    rank: int

    @property
    def key(self) -> str:
        return gen_key(self.family, self.indices)


# --------------------------------------------------------------------------
# polynomials


class NCPoly:
    """A finite linear combination of words with coefficients in ``ring``."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: Mapping[Word, object] | None = None):
        self.ring = ring
        clean: dict[Word, object] = {}
        if terms:
            for w, c in terms.items():
                c = ring.normalize(c.value if isinstance(c, Scalar) else c)
                if c != 0:
                    clean[tuple(w)] = c
        self.terms = clean

    @classmethod
    def zero(cls, ring: Ring) -> "NCPoly":
        return cls(ring)

    @classmethod
    def one(cls, ring: Ring, coeff=1) -> "NCPoly":
        return cls(ring, {(): coeff})

    @classmethod
    def gen(cls, ring: Ring, key: str, coeff=1) -> "NCPoly":
        return cls(ring, {(key,): coeff})

    @classmethod
    def word(cls, ring: Ring, keys: Iterable[str], coeff=1) -> "NCPoly":
        return cls(ring, {tuple(keys): coeff})

    def _same(self, other: "NCPoly"):
        if not isinstance(other, NCPoly):
            raise TypeError(f"expected NCPoly, got {type(other).__name__}")
        if other.ring is not self.ring:
            raise RingError(f"cannot mix {self.ring} and {other.ring}")

    def _lift(self, other):
        if isinstance(other, NCPoly):
            self._same(other)
            return other
        if isinstance(other, (int, Fraction, Scalar)):
            return NCPoly.one(self.ring, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return NCPoly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return NCPoly(self.ring, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            c = self.ring.normalize(other.value if isinstance(other, Scalar) else other)
            return NCPoly(self.ring, {w: v * c for w, v in self.terms.items()})
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = NCPoly.one(self.ring, other)
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.ring is other.ring and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def generators(self) -> set[str]:
        return {g for w in self.terms for g in w}

    def coefficient(self, word: Iterable[str]):
        return self.terms.get(tuple(word), self.ring.normalize(0))

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return format_poly(self)


def multiply(p: NCPoly, q: NCPoly) -> NCPoly:
    """Bilinear extension of word concatenation."""
    p._same(q)
    out: dict[Word, object] = {}
    for w1, c1 in p.terms.items():
        for w2, c2 in q.terms.items():
            w = w1 + w2
            out[w] = out.get(w, 0) + c1 * c2
    return NCPoly(p.ring, out)


def format_poly(p: NCPoly, order=None) -> str:
    if not p.terms:
        return "0"
    items = order(p) if order else sorted(p.terms.items(), key=lambda t: (len(t[0]), t[0]))
    parts = []
    for w, c in items:
        text = p.ring.format(c)
        body = "*".join(w)
        if not w:
            parts.append(str(text))
        elif str(text) == "1":
            parts.append(body)
        elif str(text) == "-1":
            parts.append("-" + body)
        else:
            parts.append(f"{text}*{body}")
    return " + ".join(parts).replace("+ -", "- ")


# --------------------------------------------------------------------------
# DGAs


class SemifreeDGA:
    """Free unital algebra on ordered generators with a differential on generators."""

    def __init__(self, grading: str, ring: Ring, generators: Sequence[Generator],
                 differential: Mapping[str, NCPoly], name: str = ""):
        if grading not in ("Z", "Z2"):
            raise DGAError(f"grading must be 'Z' or 'Z2', got {grading!r}")
        self.grading = grading
        self.ring = ring
        self.name = name
        gens = sorted(generators, key=lambda g: g.rank)
        keys = [g.key for g in gens]
        if len(set(keys)) != len(keys):
            raise DGAError("duplicate generator")
        if len({g.rank for g in gens}) != len(gens):
            raise DGAError("order ranks must be distinct")
        self.generators: tuple[Generator, ...] = tuple(
            Generator(g.family, g.indices, self.reduce_degree(g.degree), g.rank) for g in gens)
        self._by_key = {g.key: g for g in self.generators}
        self.d: dict[str, NCPoly] = {}
        for k in keys:
            poly = differential.get(k, NCPoly.zero(ring))
            if poly.ring is not ring:
                raise RingError(f"differential of {k} is over {poly.ring}, expected {ring}")
            unknown = poly.generators() - self._by_key.keys()
            if unknown:
                raise DGAError(f"differential of {k} uses unknown generators {sorted(unknown)}")
            self.d[k] = poly
        extra = set(differential) - set(keys)
        if extra:
            raise DGAError(f"differential given for unknown generators {sorted(extra)}")

    # degrees ---------------------------------------------------------------
    def reduce_degree(self, deg: int) -> int:
        return deg % 2 if self.grading == "Z2" else deg

    def degree_of(self, key: str) -> int:
        try:
            return self._by_key[key].degree
        except KeyError:
            raise DGAError(f"generator {key} is not in this DGA") from None

    def word_degree(self, word: Word) -> int:
        return self.reduce_degree(sum(self.degree_of(g) for g in word))

    def poly_degrees(self, p: NCPoly) -> set[int]:
        return {self.word_degree(w) for w in p.terms}

    def sign(self, deg: int) -> int:
        """(-1)^deg using the 0/1 lift in ℤ/2 mode."""
        return -1 if deg % 2 else 1

    # lookup ------------------------------------------------------------------
    def __contains__(self, key: str) -> bool:
        return key in self._by_key

    def generator(self, key: str) -> Generator:
        try:
            return self._by_key[key]
        except KeyError:
            raise DGAError(f"generator {key} is not in this DGA") from None

    @property
    def keys(self) -> list[str]:
        return [g.key for g in self.generators]

    def rank_of(self, key: str) -> int:
        return self.generator(key).rank

    def gen(self, key: str) -> NCPoly:
        self.generator(key)
        return NCPoly.gen(self.ring, key)

    def canonical_terms(self, p: NCPoly) -> list[tuple[Word, object]]:
        """Terms sorted by degree, then length, then lexicographically by order rank."""
        return sorted(p.terms.items(),
                      key=lambda t: (self.word_degree(t[0]), len(t[0]),
                                     tuple(self.rank_of(g) for g in t[0])))

    def format(self, p: NCPoly) -> str:
        return format_poly(p, self.canonical_terms)

    def __eq__(self, other):
        if not isinstance(other, SemifreeDGA):
            return NotImplemented
        return (self.grading == other.grading and self.ring is other.ring
                and self.generators == other.generators and self.d == other.d)

    def same_up_to_ranks(self, other: "SemifreeDGA") -> bool:
        """Equal generator sets, degrees and differentials, ignoring order ranks."""
        mine = {(g.key, g.degree) for g in self.generators}
        theirs = {(g.key, g.degree) for g in other.generators}
        return (self.grading == other.grading and self.ring is other.ring
                and mine == theirs and self.d == other.d)

    def __repr__(self):
        return f"SemifreeDGA({self.name or '?'}, {len(self.generators)} generators, {self.grading}, {self.ring})"

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "grading": self.grading,
            "ring": self.ring.to_json(),
            "generators": [{"family": g.family, "indices": list(g.indices),
                            "degree": g.degree, "rank": g.rank} for g in self.generators],
            "d": {g.key: [[self.ring.format(c), list(w)] for w, c in self.canonical_terms(self.d[g.key])]
                  for g in self.generators},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SemifreeDGA":
        try:
            ring = ring_from_json(data["ring"])
            gens = [Generator(g["family"], tuple(int(i) for i in g["indices"]), int(g["degree"]), int(g["rank"]))
                    for g in data["generators"]]
            d = {}
            for key, terms in data.get("d", {}).items():
                acc: dict[Word, object] = {}
                for coeff, word in terms:
                    c = ring.normalize(Fraction(coeff) if isinstance(coeff, str) else coeff)
                    acc[tuple(word)] = acc.get(tuple(word), 0) + c
                d[key] = NCPoly(ring, acc)
            return cls(data["grading"], ring, gens, d)
        except (KeyError, TypeError) as exc:
            raise DGAError(f"malformed DGA JSON: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def differentiate(dga: SemifreeDGA, p: NCPoly) -> NCPoly:
    """Apply the differential via the graded Leibniz rule, word by word."""
    if p.ring is not dga.ring:
        raise RingError(f"polynomial over {p.ring}, DGA over {dga.ring}")
    ring = dga.ring
    out: dict[Word, object] = {}
    for w, c in p.terms.items():
        prefix_deg = 0
        for pos, g in enumerate(w):
            dg = dga.d.get(g)
            if dg is None:
                raise DGAError(f"generator {g} is not in this DGA")
            if dg.terms:
                coeff = c * dga.sign(prefix_deg)
                left, right = w[:pos], w[pos + 1:]
                for mid, cm in dg.terms.items():
                    key = left + mid + right
                    out[key] = out.get(key, 0) + coeff * cm
            prefix_deg += dga.degree_of(g)
    return NCPoly(ring, out)


@dataclass
class DSquaredReport:
    degree_violations: list[tuple[str, NCPoly]] = field(default_factory=list)
    failures: list[tuple[str, NCPoly]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.degree_violations and not self.failures

    def to_json(self, dga: SemifreeDGA) -> dict:
        return {
            "passed": self.passed,
            "degree_violations": [{"generator": k, "d": dga.format(p)} for k, p in self.degree_violations],
            "failures": [{"generator": k, "residual": dga.format(p)} for k, p in self.failures],
        }


def check_d_squared(dga: SemifreeDGA) -> DSquaredReport:
    """Report generators whose differential has the wrong degree or whose d² is nonzero."""
    report = DSquaredReport()
    for g in dga.generators:
        dg = dga.d[g.key]
        want = dga.reduce_degree(g.degree + 1)
        if any(deg != want for deg in dga.poly_degrees(dg)):
            report.degree_violations.append((g.key, dg))
            continue
        dd = differentiate(dga, dg)
        if dd:
            report.failures.append((g.key, dd))
    return report


# --------------------------------------------------------------------------
# substitutions


def substitute(p: NCPoly, images: Mapping[str, NCPoly], ring: Ring) -> NCPoly:
    """Replace every generator of ``p`` by its image (generators without one are kept)."""
    out = NCPoly.zero(ring)
    cache: dict[str, NCPoly] = {}
    for w, c in p.terms.items():
        term = NCPoly.one(ring, c)
        for g in w:
            img = cache.get(g)
            if img is None:
                img = images.get(g)
                if img is None:
                    img = NCPoly.gen(ring, g)
                cache[g] = img
            term = multiply(term, img)
        out = out + term
    return out


@dataclass
class Substitution:
    """An algebra map given on generators: ``images[new_key]`` is a polynomial in ``source`` generators.

    ``targets`` are the generators of the new algebra (with degrees and ranks);
    ``lead[new_key]`` names the source generator carrying the invertible
    linear leading term.
    """

    source: SemifreeDGA
    targets: tuple[Generator, ...]
    images: dict[str, NCPoly]
    lead: dict[str, str]

    def __post_init__(self):
        self._inverse: dict[str, NCPoly] | None = None

    def image(self, key: str) -> NCPoly:
        return self.images[key]

    def apply(self, p: NCPoly) -> NCPoly:
        """Push a polynomial in the new generators to the source algebra."""
        return substitute(p, self.images, self.source.ring)

    def tail(self, key: str) -> NCPoly:
        """The image of ``key`` with its leading linear term removed."""
        ld = self.lead[key]
        img = self.images[key]
        return img - NCPoly.gen(img.ring, ld) * img.coefficient((ld,))

    def inverse_images(self) -> dict[str, NCPoly]:
        """Express each source generator as a polynomial in the new generators."""
        if self._inverse is not None:
            return self._inverse
        ring = self.source.ring
        new_of = {old: new for new, old in self.lead.items()}
        inv: dict[str, NCPoly] = {}
        for g in self.source.generators:  # ascending rank: tails only use earlier generators
            new = new_of[g.key]
            u = self.images[new].coefficient((g.key,))
            t = self.tail(new)
            inv[g.key] = (NCPoly.gen(ring, new) - substitute(t, inv, ring)) * ring.inv(u)
        self._inverse = inv
        return inv

    def compose(self, inner: "Substitution") -> "Substitution":
        """``self ∘ inner`` when ``self.source`` has the generators of ``inner.targets``.

        The result sends a target generator ``g`` of ``self`` to
        ``inner.apply(self.images[g])``, a polynomial in ``inner.source``.
        """
        images = {k: inner.apply(v) for k, v in self.images.items()}
        lead = {k: inner.lead.get(v, v) for k, v in self.lead.items()}
        return Substitution(inner.source, self.targets, images, lead)


def _check_filtration(dga: SemifreeDGA, key: str, tail: NCPoly, rank_of) -> None:
    r0 = rank_of(key)
    for g in tail.generators():
        if rank_of(g) >= r0:
            raise FiltrationError(f"tail of {key} uses {g}, which is not smaller")


def elementary_automorphism(dga: SemifreeDGA, target: str, unit=1, tail: NCPoly | None = None) -> Substitution:
    """The automorphism ``target ↦ unit·target + tail`` fixing all other generators."""
    ring = dga.ring
    g = dga.generator(target)
    u = ring.normalize(unit.value if isinstance(unit, Scalar) else unit)
    if not ring.is_unit(u):
        raise RingError(f"{unit} is not a unit in {ring}")
    tail = tail if tail is not None else NCPoly.zero(ring)
    if tail.ring is not ring:
        raise RingError("tail over the wrong ring")
    _check_filtration(dga, target, tail, dga.rank_of)
    if any(deg != g.degree for deg in dga.poly_degrees(tail)):
        raise DegreeError(f"tail of {target} is not homogeneous of degree {g.degree}")
    images = {k: NCPoly.gen(ring, k) for k in dga.keys}
    images[target] = NCPoly.gen(ring, target) * u + tail
    return Substitution(dga, dga.generators, images, {k: k for k in dga.keys})


def identity_substitution(dga: SemifreeDGA) -> Substitution:
    ring = dga.ring
    return Substitution(dga, dga.generators, {k: NCPoly.gen(ring, k) for k in dga.keys},
                        {k: k for k in dga.keys})


def triangular_leads(dga: SemifreeDGA, targets: Sequence[Generator], images: Mapping[str, NCPoly],
                     rank_of=None) -> dict[str, str]:
    """Find, for every target, the source generator carrying its leading term.

    The leading generator of an image is its largest generator (w.r.t.
    ``rank_of``); it must appear exactly as a linear term with unit
    coefficient, and distinct targets must have distinct leads.
    """
    rank_of = rank_of or dga.rank_of
    lead: dict[str, str] = {}
    for t in targets:
        img = images.get(t.key)
        if img is None:
            raise DGAError(f"no image assigned to {t.key}")
        gens = img.generators()
        if not gens:
            raise DGAError(f"image of {t.key} is constant")
        top = max(gens, key=rank_of)
        c = img.coefficient((top,))
        if c == 0 or not dga.ring.is_unit(c):
            raise DGAError(f"image of {t.key} has no invertible linear leading term")
        rest = img - NCPoly.gen(dga.ring, top) * c
        if top in rest.generators():
            raise DGAError(f"leading generator {top} of {t.key} also appears nonlinearly")
        if dga.degree_of(top) != dga.reduce_degree(t.degree):
            raise DegreeError(f"{t.key} has degree {t.degree} but its lead {top} has degree {dga.degree_of(top)}")
        lead[t.key] = top
    if len(set(lead.values())) != len(lead) or set(lead.values()) != set(dga.keys):
        raise DGAError("assignment is not invertible (leading generators are not a bijection)")
    return lead


def apply_substitution(dga: SemifreeDGA, images: Mapping[str, NCPoly] | Substitution,
                       targets: Sequence[Generator] | None = None, name: str = "") -> SemifreeDGA:
    """Transport the differential along an invertible generator-wise assignment.

    ``images`` maps each new generator to a polynomial in the old ones.  The
    new differential is ``σ⁻¹ ∘ d ∘ σ`` on new generators; d² = 0 is re-checked.
    """
    if isinstance(images, Substitution):
        sub = images
    else:
        targets = tuple(targets) if targets is not None else dga.generators
        for k, img in images.items():
            want = dga.reduce_degree(next(t.degree for t in targets if t.key == k))
            if any(deg != want for deg in dga.poly_degrees(img)):
                raise DegreeError(f"image of {k} is not homogeneous of degree {want}")
        lead = triangular_leads(dga, targets, images)
        sub = Substitution(dga, tuple(targets), dict(images), lead)
    inv = sub.inverse_images()
    ring = dga.ring
    new_d = {}
    for t in sub.targets:
        pushed = differentiate(dga, sub.images[t.key])
        new_d[t.key] = substitute(pushed, inv, ring)
    out = SemifreeDGA(dga.grading, ring, sub.targets, new_d, name=name or dga.name)
    report = check_d_squared(out)
    if not report.passed:
        raise DGAError(f"transported differential fails d² = 0 on {[k for k, _ in report.failures]}")
    return out


def stabilize(dga: SemifreeDGA, pairs: Sequence[tuple[Generator, Generator]]) -> SemifreeDGA:
    """Adjoin generator pairs ``(x, y)`` with ``dx = y`` and ``dy = 0``."""
    existing = set(dga.keys)
    gens = list(dga.generators)
    d = dict(dga.d)
    next_rank = max((g.rank for g in gens), default=-1) + 1
    ring = dga.ring
    for x, y in pairs:
        for g in (x, y):
            if g.key in existing:
                raise DGAError(f"generator name {g.key} already in use")
            existing.add(g.key)
        if dga.reduce_degree(y.degree) != dga.reduce_degree(x.degree + 1):
            raise DegreeError(f"|{y.key}| must equal |{x.key}| + 1")
        gens.append(Generator(x.family, x.indices, x.degree, next_rank))
        gens.append(Generator(y.family, y.indices, y.degree, next_rank + 1))
        next_rank += 2
        d[x.key] = NCPoly.gen(ring, y.key)
        d[y.key] = NCPoly.zero(ring)
    return SemifreeDGA(dga.grading, ring, gens, d, name=dga.name)


def is_valid_tame_ordering(dga: SemifreeDGA, ordering: Sequence[str], substitution: Substitution) -> bool:
    """True iff every tail of ``substitution`` only uses generators earlier in ``ordering``.

    ``ordering`` lists the source generators from smallest to largest; it must
    be a permutation of the generators of ``dga``.
    """
    if sorted(ordering) != sorted(dga.keys) or len(set(ordering)) != len(ordering):
        raise DGAError("ordering must list every generator exactly once")
    position = {k: i for i, k in enumerate(ordering)}
    for new, old in substitution.lead.items():
        img = substitution.images[new]
        if not dga.ring.is_unit(img.coefficient((old,))):
            return False
        if any(position[g] >= position[old] for g in substitution.tail(new).generators()):
            return False
    return True


def tame_factorization(sub: Substitution, ordering: Sequence[str] | None = None) -> list[Substitution]:
    """Split a triangular substitution into elementary automorphisms ``E_1, ..., E_N``.

    ``E_k`` sends the k-th source generator (in ``ordering``) to its full
    image with the new generator renamed to its lead; composing them with
    ``E_1`` applied first reproduces the substitution up to relabeling.
    """
    dga = sub.source
    ordering = list(ordering) if ordering is not None else dga.keys
    position = {k: i for i, k in enumerate(ordering)}
    new_of = {old: new for new, old in sub.lead.items()}
    steps = []
    for old in ordering:
        new = new_of[old]
        u = sub.images[new].coefficient((old,))
        tail = sub.tail(new)
        if any(position[g] >= position[old] for g in tail.generators()):
            raise FiltrationError(f"tail of {new} is not below {old} in the ordering")
        ranked = SemifreeDGA(dga.grading, dga.ring,
                             [Generator(g.family, g.indices, g.degree, position[g.key]) for g in dga.generators],
                             dga.d)
        steps.append(elementary_automorphism(ranked, old, u, tail))
    return steps


def compose_automorphisms(steps: Sequence[Substitution]) -> dict[str, NCPoly]:
    """Images of ``E_N ∘ ... ∘ E_1`` on the source generators."""
    if not steps:
        raise DGAError("empty composition")
    ring = steps[0].source.ring
    current = {k: NCPoly.gen(ring, k) for k in steps[0].source.keys}
    for step in steps:
        # Φ_k = E_k ∘ Φ_{k-1}: apply E_k to the polynomial Φ_{k-1}(g).
        current = {k: substitute(v, step.images, ring) for k, v in current.items()}
    return current
