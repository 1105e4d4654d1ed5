"""Exact coefficient rings, dense exact matrices and the block-matrix vocabulary.

Three coefficient rings are supported: the integers ``ZZ``, the rationals
``QQ`` and the residue rings ``Zmod(N)``.  A matrix stores its entries in a
numpy array whose dtype is chosen by the ring: Python ``int`` or
``Fraction`` objects for ``ZZ`` and ``QQ`` (arbitrary precision), and
``int64`` for ``Zmod(N)`` with small ``N`` (entries live in ``[0, N)``, so
products cannot overflow before reduction).

The block helpers ``mat2``, ``lower``, ``diag``, ``row`` and ``col`` build the
2x2, lower-triangular, diagonal, row and column assemblies that the homological
code is written in.  Their arguments may be ``0`` (or ``None``) for a zero block
whose shape is inferred from the other blocks in its block row and column.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Ring", "ZZ", "QQ", "Zmod", "ring_from_json", "ring_from_name",
    "Scalar", "ExactMatrix", "DimensionError", "RingError",
    "block", "assemble", "mat2", "lower", "diag", "row", "col",
    "simple_matrix", "permutation", "l", "r", "b",
    "smith_normal_form", "invariant_factors",
    "rref", "rank", "nullspace", "solve", "inverse",
]


class RingError(ValueError):
    """Raised on mixed rings, non-units, or operations a ring does not support."""


class DimensionError(ValueError):
    """Raised when matrix or block shapes do not fit together."""


# --------------------------------------------------------------------------
# rings


class Ring:
    """A commutative coefficient ring with canonical representatives."""

    name: str
    is_field: bool
    dtype: object = object

    def normalize(self, value):
        raise NotImplementedError

    def reduce_array(self, arr: np.ndarray) -> np.ndarray:
        return arr

    def is_unit(self, value) -> bool:
        raise NotImplementedError

    def inv(self, value):
        raise NotImplementedError

    def parse(self, token):
        return self.normalize(token)

    def format(self, value):
        return int(value)

    def to_json(self):
        return self.name

    @property
    def characteristic(self) -> int:
        return 0

    def __repr__(self) -> str:
        return self.name


class _Integers(Ring):
    name = "Z"
    is_field = False

    def normalize(self, value):
        if isinstance(value, Fraction):
            if value.denominator != 1:
                raise RingError(f"{value} is not an integer")
            return int(value.numerator)
        if isinstance(value, (int, np.integer)):
            return int(value)
        raise RingError(f"cannot read {value!r} as an integer")

    def is_unit(self, value) -> bool:
        return value in (1, -1)

    def inv(self, value):
        if value not in (1, -1):
            raise RingError(f"{value} is not a unit in Z")
        return value


class _Rationals(Ring):
    name = "Q"
    is_field = True

    def normalize(self, value):
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, np.integer)):
            return Fraction(int(value))
        if isinstance(value, str):
            return Fraction(value)
        raise RingError(f"cannot read {value!r} as a rational")

    def is_unit(self, value) -> bool:
        return value != 0

    def inv(self, value):
        if value == 0:
            raise RingError("division by zero in Q")
        return 1 / Fraction(value)

    def format(self, value):
        value = Fraction(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"


class _IntegersMod(Ring):
    """The residue ring Z/N; values are kept in ``[0, N)``."""

    def __init__(self, modulus: int):
        if modulus < 2:
            raise RingError("the modulus must be at least 2")
        self.modulus = modulus
        self.name = f"Z/{modulus}"
        self.is_field = _is_prime(modulus)
        # Products of two reduced entries summed over a few thousand terms must
        # stay inside int64; larger moduli fall back to Python integers.
        self.dtype = np.int64 if modulus < (1 << 24) else object

    def normalize(self, value):
        if isinstance(value, Fraction):
            return self.normalize(value.numerator) * self.inv(self.normalize(value.denominator)) % self.modulus
        if isinstance(value, (int, np.integer)):
            return int(value) % self.modulus
        raise RingError(f"cannot read {value!r} as a residue mod {self.modulus}")

    def reduce_array(self, arr):
        return arr % self.modulus

    def is_unit(self, value) -> bool:
        return math.gcd(int(value), self.modulus) == 1

    def inv(self, value):
        value = int(value) % self.modulus
        if math.gcd(value, self.modulus) != 1:
            raise RingError(f"{value} is not a unit mod {self.modulus}")
        return pow(value, -1, self.modulus)

    @property
    def characteristic(self) -> int:
        return self.modulus

    def to_json(self):
        return {"ZmodN": self.modulus}


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


ZZ = _Integers()
QQ = _Rationals()


@lru_cache(maxsize=None)
def Zmod(modulus: int) -> Ring:
    """Return the (cached) ring Z/modulus."""
    return _IntegersMod(int(modulus))


def ring_from_json(data) -> Ring:
    if data == "Z":
        return ZZ
    if data == "Q":
        return QQ
    if isinstance(data, dict) and "ZmodN" in data:
        return Zmod(int(data["ZmodN"]))
    raise RingError(f"unknown ring description {data!r}")


def ring_from_name(name: str) -> Ring:
    """Parse command-line ring names such as ``Z``, ``Q``, ``Z2`` or ``Z/7``."""
    text = name.strip().upper().replace(" ", "")
    if text in ("Z", "ZZ"):
        return ZZ
    if text in ("Q", "QQ"):
        return QQ
    m = re.fullmatch(r"(?:Z/|Z|F|GF|ZMOD)\(?(\d+)\)?", text)
    if m:
        return Zmod(int(m.group(1)))
    raise RingError(f"unknown ring {name!r}")


# --------------------------------------------------------------------------
# scalars


@dataclass(frozen=True)
class Scalar:
    """An element of one of the supported rings, kept in canonical form."""

    ring: Ring
    value: object

    def __post_init__(self):
        object.__setattr__(self, "value", self.ring.normalize(self.value))

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.ring is not self.ring:
                raise RingError(f"cannot mix {self.ring} and {other.ring}")
            return other
        if isinstance(other, (int, np.integer)):
            return Scalar(self.ring, int(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar(self.ring, self.value + other.value)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar(self.ring, self.value - other.value)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar(self.ring, other.value - self.value)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar(self.ring, self.value * other.value)

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar(self.ring, -self.value)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar(self.ring, self.value * self.ring.inv(other.value))

    def inverse(self) -> "Scalar":
        return Scalar(self.ring, self.ring.inv(self.value))

    def is_unit(self) -> bool:
        return self.ring.is_unit(self.value)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.ring is other.ring and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == self.ring.normalize(int(other))
        return NotImplemented

    def __hash__(self):
        return hash((self.ring.name, self.value))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.ring.format(self.value)}"


# --------------------------------------------------------------------------
# matrices


def _empty(ring: Ring, rows: int, cols: int) -> np.ndarray:
    if ring.dtype is object:
        arr = np.empty((rows, cols), dtype=object)
        arr.fill(ring.normalize(0))
        return arr
    return np.zeros((rows, cols), dtype=ring.dtype)


class ExactMatrix:
    """An immutable dense matrix over ``ZZ``, ``QQ`` or ``Zmod(N)``."""

    __slots__ = ("ring", "_a")

    def __init__(self, ring: Ring, entries, *, shape: tuple[int, int] | None = None):
        self.ring = ring
        if isinstance(entries, np.ndarray) and entries.ndim == 2:
            arr = entries
            if ring.dtype is object:
                if arr.dtype != object or (arr.size and not _all_canonical(ring, arr)):
                    arr = _to_object(ring, arr)
            else:
                arr = ring.reduce_array(arr.astype(ring.dtype, copy=False))
        else:
            rows = [list(rw) for rw in entries]
            n_rows = len(rows)
            n_cols = len(rows[0]) if rows else (shape[1] if shape else 0)
            if any(len(rw) != n_cols for rw in rows):
                raise DimensionError("ragged entry grid")
            arr = _empty(ring, n_rows, n_cols)
            for i, rw in enumerate(rows):
                for j, v in enumerate(rw):
                    if isinstance(v, Scalar):
                        if v.ring is not ring:
                            raise RingError(f"entry from {v.ring} in a matrix over {ring}")
                        v = v.value
                    elif isinstance(v, str):
                        v = ring.parse(Fraction(v)) if ring is not QQ else Fraction(v)
                    arr[i, j] = ring.normalize(v)
        if shape is not None and arr.shape != tuple(shape):
            if arr.size == 0:
                arr = _empty(ring, *shape)
            else:
                raise DimensionError(f"declared shape {shape} but entries have shape {arr.shape}")
        arr.flags.writeable = False
        self._a = arr

    # construction helpers -------------------------------------------------
    @classmethod
    def _wrap(cls, ring: Ring, arr: np.ndarray) -> "ExactMatrix":
        m = object.__new__(cls)
        m.ring = ring
        arr.flags.writeable = False
        m._a = arr
        return m

    @classmethod
    def zeros(cls, ring: Ring, rows: int, cols: int) -> "ExactMatrix":
        return cls._wrap(ring, _empty(ring, rows, cols))

    @classmethod
    def identity(cls, ring: Ring, n: int) -> "ExactMatrix":
        arr = _empty(ring, n, n)
        for i in range(n):
            arr[i, i] = ring.normalize(1)
        return cls._wrap(ring, arr)

    @classmethod
    def scalar(cls, ring: Ring, n: int, value) -> "ExactMatrix":
        arr = _empty(ring, n, n)
        v = ring.normalize(value.value if isinstance(value, Scalar) else value)
        for i in range(n):
            arr[i, i] = v
        return cls._wrap(ring, arr)

    @classmethod
    def from_array(cls, ring: Ring, arr: np.ndarray) -> "ExactMatrix":
        return cls(ring, np.array(arr, copy=True))

    # basic protocol ------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def array(self) -> np.ndarray:
        """The read-only backing array (raw representatives)."""
        return self._a

    def entry(self, i: int, j: int) -> Scalar:
        return Scalar(self.ring, self._a[i, j])

    def __getitem__(self, key):
        if isinstance(key, tuple) and all(isinstance(k, (int, np.integer)) for k in key):
            return self.entry(*key)
        sub = self._a[key]
        if sub.ndim != 2:
            raise DimensionError("matrix slicing must keep two axes")
        return ExactMatrix._wrap(self.ring, np.array(sub, copy=True))

    def to_lists(self) -> list[list]:
        return [[v for v in rw] for rw in self._a.tolist()]

    def _check(self, other: "ExactMatrix"):
        if not isinstance(other, ExactMatrix):
            raise TypeError(f"expected ExactMatrix, got {type(other).__name__}")
        if other.ring is not self.ring:
            raise RingError(f"cannot mix {self.ring} and {other.ring}")

    def __add__(self, other):
        if isinstance(other, (int, np.integer)) and other == 0:
            return self
        self._check(other)
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return ExactMatrix._wrap(self.ring, self.ring.reduce_array(self._a + other._a))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, np.integer)) and other == 0:
            return self
        self._check(other)
        if self.shape != other.shape:
            raise DimensionError(f"cannot subtract {other.shape} from {self.shape}")
        return ExactMatrix._wrap(self.ring, self.ring.reduce_array(self._a - other._a))

    def __neg__(self):
        return ExactMatrix._wrap(self.ring, self.ring.reduce_array(-self._a))

    def __matmul__(self, other):
        self._check(other)
        if self.cols != other.rows:
            raise DimensionError(f"cannot compose {self.shape} after {other.shape}")
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return ExactMatrix.zeros(self.ring, self.rows, other.cols)
        return ExactMatrix._wrap(self.ring, self.ring.reduce_array(self._a @ other._a))

    def __mul__(self, c):
        if isinstance(c, Scalar):
            if c.ring is not self.ring:
                raise RingError(f"cannot mix {self.ring} and {c.ring}")
            c = c.value
        elif isinstance(c, (int, np.integer, Fraction)):
            c = self.ring.normalize(c)
        else:
            return NotImplemented
        return ExactMatrix._wrap(self.ring, self.ring.reduce_array(self._a * c))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (self.ring is other.ring and self.shape == other.shape
                and bool(np.array_equal(self._a, other._a)))

    def __hash__(self):
        return hash((self.ring.name, self.shape, tuple(self._a.ravel().tolist())))

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix._wrap(self.ring, np.array(self._a.T, copy=True))

    def is_zero(self) -> bool:
        return not np.any(self._a != 0)

    def is_identity(self) -> bool:
        return self.rows == self.cols and self == ExactMatrix.identity(self.ring, self.rows)

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self._a != 0))

    def change_ring(self, ring: Ring) -> "ExactMatrix":
        """Reinterpret the entries in another ring (e.g. reduce Z -> Z/N)."""
        return ExactMatrix(ring, [[ring.normalize(v) for v in rw] for rw in self._a.tolist()],
                           shape=self.shape)

    def __repr__(self):
        body = "; ".join(" ".join(str(self.ring.format(v)) for v in rw) for rw in self._a.tolist())
        return f"ExactMatrix<{self.ring}>[{self.rows}x{self.cols}]({body})"

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "ring": self.ring.to_json(),
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[self.ring.format(v) for v in rw] for rw in self._a.tolist()],
        }

    @classmethod
    def from_json(cls, data: dict, ring: Ring | None = None) -> "ExactMatrix":
        ring = ring or ring_from_json(data["ring"])
        rows, cols = int(data["rows"]), int(data["cols"])
        entries = data.get("entries", [])
        if len(entries) != rows or any(len(rw) != cols for rw in entries):
            raise DimensionError("entry grid does not match declared dimensions")
        parsed = [[_parse_entry(ring, v) for v in rw] for rw in entries]
        return cls(ring, parsed, shape=(rows, cols))


def _parse_entry(ring: Ring, v):
    if isinstance(v, str):
        v = Fraction(v)
    return ring.normalize(v)


def _all_canonical(ring: Ring, arr: np.ndarray) -> bool:
    sample = arr.flat[0]
    if ring is QQ:
        return isinstance(sample, Fraction)
    return isinstance(sample, int) and not isinstance(sample, bool)


def _to_object(ring: Ring, arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = ring.normalize(v.item() if isinstance(v, np.generic) else v)
    return out


# --------------------------------------------------------------------------
# block assembly

def _is_zero_block(x) -> bool:
    return x is None or (isinstance(x, (int, np.integer)) and x == 0)


def assemble(grid: Sequence[Sequence], ring: Ring | None = None) -> ExactMatrix:
    """Assemble a block grid into one matrix.

    Zero placeholders (``0`` or ``None``) take the row height and column width
    determined by the explicit blocks sharing their block row and column.
    """
    grid = [list(rw) for rw in grid]
    if not grid:
        raise DimensionError("empty block grid")
    n_cols = len(grid[0])
    if any(len(rw) != n_cols for rw in grid):
        raise DimensionError("ragged block grid")
    heights: list[int | None] = [None] * len(grid)
    widths: list[int | None] = [None] * n_cols
    for i, rw in enumerate(grid):
        for j, blk in enumerate(rw):
            if _is_zero_block(blk):
                continue
            if not isinstance(blk, ExactMatrix):
                raise TypeError(f"block ({i},{j}) is {type(blk).__name__}")
            if ring is None:
                ring = blk.ring
            elif blk.ring is not ring:
                raise RingError(f"block ({i},{j}) is over {blk.ring}, expected {ring}")
            for store, k, size in ((heights, i, blk.rows), (widths, j, blk.cols)):
                if store[k] is None:
                    store[k] = size
                elif store[k] != size:
                    raise DimensionError(f"block ({i},{j}) has incompatible shape {blk.shape}")
    if ring is None:
        raise DimensionError("cannot infer the ring of an all-zero block grid")
    if None in heights or None in widths:
        raise DimensionError("cannot infer the shape of a zero block")
    out = _empty(ring, sum(heights), sum(widths))
    r0 = 0
    for i, rw in enumerate(grid):
        c0 = 0
        for j, blk in enumerate(rw):
            if not _is_zero_block(blk) and blk.rows and blk.cols:
                out[r0:r0 + heights[i], c0:c0 + widths[j]] = blk._a
            c0 += widths[j]
        r0 += heights[i]
    return ExactMatrix._wrap(ring, out)


def mat2(a, b, c, d) -> ExactMatrix:
    """The 2x2 block matrix [[a, b], [c, d]]."""
    return assemble([[a, b], [c, d]])


def lower(x, h, y) -> ExactMatrix:
    """The lower-triangular block matrix [[x, 0], [h, y]]."""
    return assemble([[x, 0], [h, y]])


def diag(*blocks: ExactMatrix) -> ExactMatrix:
    """Block-diagonal matrix; every block must be an explicit matrix."""
    if not blocks:
        raise DimensionError("diag needs at least one block")
    ring = blocks[0].ring
    rows = sum(bl.rows for bl in blocks)
    cols = sum(bl.cols for bl in blocks)
    out = _empty(ring, rows, cols)
    r0 = c0 = 0
    for bl in blocks:
        if bl.ring is not ring:
            raise RingError("diag blocks over different rings")
        if bl.rows and bl.cols:
            out[r0:r0 + bl.rows, c0:c0 + bl.cols] = bl._a
        r0 += bl.rows
        c0 += bl.cols
    return ExactMatrix._wrap(ring, out)


def row(*blocks) -> ExactMatrix:
    """Horizontal concatenation [b1 | b2 | ...]."""
    return assemble([list(blocks)])


def col(*blocks) -> ExactMatrix:
    """Vertical concatenation of blocks."""
    return assemble([[bl] for bl in blocks])


_BLOCK_KINDS = {"m": "m", "𝔪": "m", "b": "b", "𝔟": "b", "d": "d", "𝔡": "d",
                "r": "r", "𝔯": "r", "c": "c", "𝔠": "c"}


def block(kind: str, parts: Sequence) -> ExactMatrix:
    """Assemble ``parts`` according to ``kind``.

    ``m``: [[a, b], [c, d]]; ``b``: [[x, 0], [h, y]]; ``d``: block diagonal;
    ``r``: one block row; ``c``: one block column.  The Fraktur letters are
    accepted as aliases.
    """
    try:
        k = _BLOCK_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown block kind {kind!r}") from None
    parts = list(parts)
    if k == "m":
        if len(parts) != 4:
            raise DimensionError("m needs four blocks")
        return mat2(*parts)
    if k == "b":
        if len(parts) != 3:
            raise DimensionError("b needs three blocks")
        return lower(*parts)
    if k == "d":
        return assemble([[p if i == j else 0 for j in range(len(parts))] for i, p in enumerate(parts)])
    if k == "r":
        return row(*parts)
    return col(*parts)


def split(m: ExactMatrix, row_sizes: Sequence[int], col_sizes: Sequence[int]) -> list[list[ExactMatrix]]:
    """Inverse of :func:`assemble` for a given block partition."""
    if sum(row_sizes) != m.rows or sum(col_sizes) != m.cols:
        raise DimensionError(f"partition {row_sizes}x{col_sizes} does not fit {m.shape}")
    out = []
    r0 = 0
    for h in row_sizes:
        c0 = 0
        line = []
        for w in col_sizes:
            line.append(m[r0:r0 + h, c0:c0 + w])
            c0 += w
        out.append(line)
        r0 += h
    return out


__all__.append("split")


# --------------------------------------------------------------------------
# simple matrices and the index matrices P, l, r, b

def simple_matrix(first_column: Sequence[ExactMatrix] | ExactMatrix) -> ExactMatrix:
    """Lower-triangular block Toeplitz matrix generated by its first block column.

    ``first_column`` is a list of equally shaped blocks ``[x, a1, a2, ...]``;
    an ``n x 1`` matrix is read as ``n`` scalar blocks.  The result has ``x`` on
    the diagonal, ``a1`` on the first subdiagonal, and so on.
    """
    if isinstance(first_column, ExactMatrix):
        if first_column.cols != 1:
            raise DimensionError("a first column must have one column")
        blocks = [first_column[i:i + 1, :] for i in range(first_column.rows)]
    else:
        blocks = list(first_column)
    if not blocks:
        raise DimensionError("a simple matrix needs a nonempty first column")
    shape = blocks[0].shape
    if any(bl.shape != shape for bl in blocks):
        raise DimensionError("all blocks of a simple matrix share one shape")
    n = len(blocks)
    ring = blocks[0].ring
    h, w = shape
    out = _empty(ring, n * h, n * w)
    for i in range(n):
        for j in range(i + 1):
            bl = blocks[i - j]
            if h and w:
                out[i * h:(i + 1) * h, j * w:(j + 1) * w] = bl._a
    return ExactMatrix._wrap(ring, out)


def _block_sizes(n: int, sizes) -> list[int]:
    if sizes is None:
        return [1] * n
    if isinstance(sizes, int):
        return [sizes] * n
    sizes = list(sizes)
    if len(sizes) != n:
        raise DimensionError(f"expected {n} block sizes, got {len(sizes)}")
    return sizes


def permutation(n: int, i: int, j: int, ring: Ring = ZZ, sizes=None) -> ExactMatrix:
    """The block permutation matrix P(n, i, j): identity with block rows i, j swapped.

    Indices are 1-based.  ``sizes`` gives the block sizes of the source (one
    integer for uniform blocks); the target blocks are the source blocks with
    positions ``i`` and ``j`` exchanged.
    """
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"P({n},{i},{j}) needs 1 <= i, j <= n")
    src = _block_sizes(n, sizes)
    order = list(range(n))
    order[i - 1], order[j - 1] = order[j - 1], order[i - 1]
    starts = np.cumsum([0] + src)
    total = int(starts[-1])
    out = _empty(ring, total, total)
    one = ring.normalize(1)
    r0 = 0
    for k in order:
        for t in range(src[k]):
            out[r0 + t, starts[k] + t] = one
        r0 += src[k]
    return ExactMatrix._wrap(ring, out)


def l(n: int, m: int, ring: Ring = ZZ, size: int = 1) -> ExactMatrix:
    """l_n = [I_n | 0]: keep the first ``n`` of ``m`` blocks of size ``size``."""
    if not 0 <= n <= m:
        raise IndexError(f"l_{n} needs 0 <= n <= {m}")
    return row(ExactMatrix.identity(ring, n * size), ExactMatrix.zeros(ring, n * size, (m - n) * size))


def r(n: int, m: int, ring: Ring = ZZ, size: int = 1) -> ExactMatrix:
    """r_n = [I_n ; 0]: include ``n`` blocks as the first ones of ``m``."""
    return l(n, m, ring, size).T


def b(n: int, M: ExactMatrix, size: int = 1) -> ExactMatrix:
    """b_n(M) = l_n M r_n, the top-left ``n x n`` block corner of ``M``."""
    if n * size > min(M.rows, M.cols):
        raise IndexError(f"b_{n} needs a matrix with at least {n} blocks each way")
    return M[: n * size, : n * size]


# --------------------------------------------------------------------------
# Smith normal form over Z

def smith_normal_form(M: ExactMatrix) -> tuple[ExactMatrix, ExactMatrix, ExactMatrix]:
    """Return ``(D, U, V)`` with ``U @ M @ V == D`` diagonal, ``d_i | d_{i+1}``, U, V unimodular."""
    if M.ring is not ZZ:
        raise RingError("Smith normal form is implemented over Z only")
    m, n = M.shape
    A = [[int(v) for v in rw] for rw in M.array.tolist()]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(X, i, j):
        X[i], X[j] = X[j], X[i]

    def swap_cols(X, i, j):
        for rw in X:
            rw[i], rw[j] = rw[j], rw[i]

    def add_row(X, src, dst, c):  # row_dst += c * row_src
        X[dst] = [a + c * s for a, s in zip(X[dst], X[src])]

    def add_col(X, src, dst, c):  # col_dst += c * col_src
        for rw in X:
            rw[dst] += c * rw[src]

    t = 0
    while t < min(m, n):
        nonzero = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
        if not nonzero:
            break
        _, pi, pj = min(nonzero)
        swap_rows(A, t, pi)
        swap_rows(U, t, pi)
        swap_cols(A, t, pj)
        swap_cols(V, t, pj)
        while True:
            done = True
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    add_row(A, t, i, -q)
                    add_row(U, t, i, -q)
                    if A[i][t]:
                        done = False
                        swap_rows(A, t, i)
                        swap_rows(U, t, i)
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    add_col(A, t, j, -q)
                    add_col(V, t, j, -q)
                    if A[t][j]:
                        done = False
                        swap_cols(A, t, j)
                        swap_cols(V, t, j)
            if not done:
                continue
            # enforce divisibility of the remaining block by the pivot
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            add_row(A, bad[0], t, 1)
            add_row(U, bad[0], t, 1)
        if A[t][t] < 0:
            A[t] = [-v for v in A[t]]
            U[t] = [-v for v in U[t]]
        t += 1
    shape_or_empty = lambda rows, r_, c_: ExactMatrix(ZZ, rows, shape=(r_, c_))
    return shape_or_empty(A, m, n), shape_or_empty(U, m, m), shape_or_empty(V, n, n)


def invariant_factors(M: ExactMatrix) -> list[int]:
    """Nonzero diagonal entries of the Smith normal form of an integer matrix."""
    D, _, _ = smith_normal_form(M)
    return [int(D.array[i, i]) for i in range(min(D.shape)) if D.array[i, i] != 0]


# --------------------------------------------------------------------------
# linear algebra over fields

def _require_field(ring: Ring):
    if not ring.is_field:
        raise RingError(f"{ring} is not a field")


def _rref_array(ring: Ring, arr: np.ndarray, limit_cols: int | None = None):
    """Row reduce a copy of ``arr``; pivots are searched in the first ``limit_cols`` columns."""
    A = np.array(arr, copy=True)
    rows, cols = A.shape
    limit = cols if limit_cols is None else limit_cols
    pivots: list[int] = []
    r0 = 0
    for c in range(limit):
        if r0 >= rows:
            break
        nz = np.nonzero(A[r0:, c] != 0)[0]
        if nz.size == 0:
            continue
        p = r0 + int(nz[0])
        if p != r0:
            A[[r0, p]] = A[[p, r0]]
        inv = ring.inv(A[r0, c])
        A[r0] = ring.reduce_array(A[r0] * inv)
        others = np.nonzero(A[:, c] != 0)[0]
        others = others[others != r0]
        if others.size:
            factors = A[others, c].reshape(-1, 1)
            A[others] = ring.reduce_array(A[others] - factors * A[r0].reshape(1, -1))
        pivots.append(c)
        r0 += 1
    return A, pivots


def rref(M: ExactMatrix) -> tuple[ExactMatrix, list[int]]:
    """Reduced row echelon form and pivot columns (field coefficients)."""
    _require_field(M.ring)
    A, piv = _rref_array(M.ring, M.array)
    return ExactMatrix._wrap(M.ring, A), piv


def rank(M: ExactMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    _require_field(M.ring)
    return len(_rref_array(M.ring, M.array)[1])


def nullspace(M: ExactMatrix) -> ExactMatrix:
    """A basis of ``{x : M x = 0}`` as the columns of the returned matrix."""
    _require_field(M.ring)
    ring = M.ring
    n = M.cols
    if M.rows == 0:
        return ExactMatrix.identity(ring, n)
    A, piv = _rref_array(ring, M.array)
    free = [c for c in range(n) if c not in set(piv)]
    out = _empty(ring, n, len(free))
    one = ring.normalize(1)
    for k, f in enumerate(free):
        out[f, k] = one
        for i, pc in enumerate(piv):
            out[pc, k] = ring.normalize(-A[i, f])
    return ExactMatrix._wrap(ring, out)


def solve(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix | None:
    """One solution ``X`` of ``A X = B`` (free variables set to zero), or ``None``."""
    _require_field(A.ring)
    if A.ring is not B.ring:
        raise RingError("solve over mixed rings")
    if A.rows != B.rows:
        raise DimensionError(f"cannot solve {A.shape} X = {B.shape}")
    ring = A.ring
    n = A.cols
    if A.rows == 0:
        return ExactMatrix.zeros(ring, n, B.cols)
    aug = np.concatenate([A.array, B.array], axis=1)
    R, piv = _rref_array(ring, aug, limit_cols=n)
    rank_ = len(piv)
    if np.any(R[rank_:, n:] != 0):
        return None
    X = _empty(ring, n, B.cols)
    for i, pc in enumerate(piv):
        X[pc] = R[i, n:]
    return ExactMatrix._wrap(ring, X)


def inverse(M: ExactMatrix) -> ExactMatrix:
    if M.rows != M.cols:
        raise DimensionError("only square matrices can be inverted")
    X = solve(M, ExactMatrix.identity(M.ring, M.rows))
    if X is None or M.rows and rank(M) != M.rows:
        raise RingError("matrix is singular")
    return X
