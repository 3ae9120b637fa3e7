"""Prime-field arithmetic and dense linear algebra, backed by galois.

Matrix and Polynomial keep canonical ints in [0, q) so they hash, compare and
serialise cheaply; every computation goes through the galois.GF(q) FieldArray
class of the owning PrimeField. FieldElement is the checked scalar API.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property

import galois
import numpy as np

from src.toolkit_config import DsspError

MAX_MODULUS = 2**31


class FieldMismatch(DsspError, ValueError):
    """Raised when operands belong to different prime fields."""


class ZeroInverse(DsspError, ZeroDivisionError):
    """Raised when inverting the zero element."""


class FieldTooSmall(DsspError, ValueError):
    """Raised when q does not leave room for the required evaluation points."""


class SingularMatrix(DsspError):
    """Raised when elimination finds a column without a nonzero pivot."""

    def __init__(self, rank: int, size: int):
        super().__init__(f"matrix is singular: rank {rank} < {size}")
        self.rank = rank
        self.size = size


def is_prime(n: int) -> bool:
    return n >= 2 and bool(galois.is_prime(n))


# =========================
# SCALARS
# =========================


@dataclass
class OpCounter:
    """Counts field multiplications and additions performed by an encoder."""

    muls: int = 0
    adds: int = 0

    @property
    def total(self) -> int:
        return self.muls + self.adds


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self) -> None:
        if self.q < 2 or self.q >= MAX_MODULUS:
            raise ValueError(f"modulus must satisfy 2 <= q < 2^31; got {self.q}")
        if not is_prime(self.q):
            raise ValueError(f"modulus {self.q} is not prime")

    @cached_property
    def gf(self) -> type[galois.FieldArray]:
        return galois.GF(self.q)

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(int(value) % self.q, self)

    def array(self, values: Iterable[int] | np.ndarray) -> galois.FieldArray:
        """FieldArray of canonical representatives of the given ints."""
        return self.gf(np.asarray(values, dtype=np.int64) % self.q)

    def inverse(self, value: int) -> int:
        a = int(value) % self.q
        if a == 0:
            raise ZeroInverse(f"0 has no inverse in F_{self.q}")
        return int(np.reciprocal(self.gf(a)))

    def elements(self, values: Iterable[int]) -> list[FieldElement]:
        return [self(value) for value in values]


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: PrimeField

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.field.q:
            raise ValueError(
                f"{self.value} is not a canonical representative mod {self.field.q}"
            )

    @property
    def gf(self) -> galois.FieldArray:
        return self.field.gf(self.value)

    def _other(self, other: FieldElement) -> galois.FieldArray:
        if other.field.q != self.field.q:
            raise FieldMismatch(
                f"cannot combine F_{self.field.q} with F_{other.field.q}"
            )
        return other.gf

    def _wrap(self, result: galois.FieldArray) -> FieldElement:
        return FieldElement(int(result), self.field)

    def __add__(self, other: FieldElement) -> FieldElement:
        return self._wrap(self.gf + self._other(other))

    def __sub__(self, other: FieldElement) -> FieldElement:
        return self._wrap(self.gf - self._other(other))

    def __mul__(self, other: FieldElement) -> FieldElement:
        return self._wrap(self.gf * self._other(other))

    def __truediv__(self, other: FieldElement) -> FieldElement:
        return self * other.inv()

    def __neg__(self) -> FieldElement:
        return self._wrap(-self.gf)

    def __pow__(self, exponent: int) -> FieldElement:
        if exponent < 0:
            return self.inv() ** -exponent
        return self._wrap(self.gf**exponent)

    def __int__(self) -> int:
        return self.value

    def inv(self) -> FieldElement:
        return FieldElement(self.field.inverse(self.value), self.field)


def inv(a: FieldElement) -> FieldElement:
    """Multiplicative inverse; raises ZeroInverse for a = 0."""
    return a.inv()


def multiplicative_order(field: PrimeField, value: int) -> int:
    """Order of a nonzero element in F_q^*."""
    if value % field.q == 0:
        raise ZeroInverse("0 has no multiplicative order")
    return int(field(value).gf.multiplicative_order())


def primitive_element(field: PrimeField) -> FieldElement:
    """Smallest g >= 2 generating F_q^*."""
    if field.q < 3:
        raise ValueError("primitive_element needs q >= 3")
    return field(int(field.gf.primitive_element))


# =========================
# MATRICES
# =========================


@dataclass(frozen=True)
class Matrix:
    field: PrimeField
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries; got {len(self.entries)}"
            )
        q = self.field.q
        if any(not 0 <= value < q for value in self.entries):
            raise ValueError("matrix entries must be canonical representatives")

    @classmethod
    def from_rows(cls, field: PrimeField, rows: Sequence[Sequence[int]]) -> Matrix:
        width = len(rows[0]) if rows else 0
        if any(len(row) != width for row in rows):
            raise ValueError("ragged rows")
        entries = tuple(int(value) % field.q for row in rows for value in row)
        return cls(field, len(rows), width, entries)

    @classmethod
    def from_array(cls, field: PrimeField, array: galois.FieldArray) -> Matrix:
        rows, cols = array.shape
        return cls(field, rows, cols, tuple(int(v) for v in array.flatten()))

    @classmethod
    def identity(cls, field: PrimeField, size: int) -> Matrix:
        return cls.from_array(field, field.gf.Identity(size))

    @classmethod
    def zeros(cls, field: PrimeField, rows: int, cols: int) -> Matrix:
        return cls(field, rows, cols, (0,) * (rows * cols))

    def array(self) -> galois.FieldArray:
        return self.field.gf(
            np.array(self.entries, dtype=np.int64).reshape(self.rows, self.cols)
        )

    def row(self, r: int) -> tuple[int, ...]:
        return self.entries[r * self.cols : (r + 1) * self.cols]

    def row_list(self) -> list[list[int]]:
        return [list(self.row(r)) for r in range(self.rows)]

    def element(self, r: int, c: int) -> FieldElement:
        return FieldElement(self.entries[r * self.cols + c], self.field)

    def transpose(self) -> Matrix:
        columns = [self.entries[c :: self.cols] for c in range(self.cols)]
        return Matrix.from_rows(self.field, columns)

    def select_rows(self, indices: Sequence[int]) -> Matrix:
        return Matrix.from_rows(self.field, [self.row(r) for r in indices])

    def stack(self, other: Matrix) -> Matrix:
        if other.cols != self.cols or other.field != self.field:
            raise ValueError("cannot stack matrices of different shape or field")
        return Matrix(
            self.field, self.rows + other.rows, self.cols, self.entries + other.entries
        )

    def __neg__(self) -> Matrix:
        return Matrix.from_array(self.field, -self.array())

    def __matmul__(self, other: Matrix) -> Matrix:
        if other.field != self.field:
            raise FieldMismatch("matrix product across fields")
        if self.cols != other.rows:
            raise ValueError(
                f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}"
            )
        return Matrix.from_array(self.field, self.array() @ other.array())


def mat_vec(
    matrix: Matrix, vector: Sequence[int], counter: OpCounter | None = None
) -> list[int]:
    """Compute matrix @ vector over F_q, optionally counting field operations.

    Without a counter the product is one FieldArray matmul. With one, each row
    is accumulated term by term and every multiplication and addition is
    tallied as it is performed.
    """
    if len(vector) != matrix.cols:
        raise ValueError(f"vector length {len(vector)} != {matrix.cols} columns")
    field = matrix.field
    x = field.array(vector)
    if counter is None:
        return [int(v) for v in matrix.array() @ x]
    a = matrix.array()
    result: list[int] = []
    for r in range(matrix.rows):
        acc = field.gf(0)
        for c in range(matrix.cols):
            term = a[r, c] * x[c]
            counter.muls += 1
            if c:
                acc = acc + term
                counter.adds += 1
            else:
                acc = term
        result.append(int(acc))
    return result


def gauss_solve(matrix: Matrix, rhs: Matrix) -> Matrix:
    """Solve matrix @ X = rhs for square nonsingular matrix."""
    if matrix.rows != matrix.cols:
        raise ValueError("gauss_solve needs a square matrix")
    if rhs.rows != matrix.rows or rhs.field != matrix.field:
        raise ValueError("right-hand side does not match the system")
    a = matrix.array()
    try:
        a_inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(int(np.linalg.matrix_rank(a)), matrix.rows) from exc
    return Matrix.from_array(matrix.field, a_inv @ rhs.array())


def invert(matrix: Matrix) -> Matrix:
    return gauss_solve(matrix, Matrix.identity(matrix.field, matrix.rows))


def rank(matrix: Matrix) -> int:
    if matrix.rows == 0 or matrix.cols == 0:
        return 0
    return int(np.linalg.matrix_rank(matrix.array()))


def det(matrix: Matrix) -> FieldElement:
    if matrix.rows != matrix.cols:
        raise ValueError("det needs a square matrix")
    return matrix.field(int(np.linalg.det(matrix.array())))


def vandermonde(points: Sequence[FieldElement], cols: int) -> Matrix:
    """Rows (x, x^2, ..., x^cols) for each point; no constant column."""
    if not points:
        raise ValueError("vandermonde needs at least one point")
    field = points[0].field
    values = [p.value for p in points]
    if any(p.field != field for p in points):
        raise FieldMismatch("vandermonde points span several fields")
    if len(set(values)) != len(values):
        raise ValueError("vandermonde points must be distinct")
    if 0 in values:
        raise ValueError("vandermonde points must be nonzero")
    x = field.array(values)
    columns = [[int(v) for v in x**c] for c in range(1, cols + 1)]
    return Matrix.from_rows(field, [list(row) for row in zip(*columns, strict=True)])


# =========================
# POLYNOMIALS
# =========================


@dataclass(frozen=True)
class Polynomial:
    """Polynomial over F_q, constant term first, trailing zeros trimmed."""

    field: PrimeField
    coefficients: tuple[int, ...]

    def __post_init__(self) -> None:
        q = self.field.q
        coeffs = [int(c) % q for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def from_poly(cls, field: PrimeField, poly: galois.Poly) -> Polynomial:
        return cls(field, tuple(int(c) for c in poly.coeffs[::-1]))

    @cached_property
    def poly(self) -> galois.Poly:
        return galois.Poly(
            list(self.coefficients) or [0], field=self.field.gf, order="asc"
        )

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def evaluate(self, x: int) -> int:
        return int(self.poly(self.field(x).gf))

    def __call__(self, x: FieldElement) -> FieldElement:
        return self.field(self.evaluate(x.value))

    def monic(self) -> Polynomial:
        if self.is_zero():
            return self
        lead_inv = self.field.inverse(self.coefficients[-1])
        scale = galois.Poly([lead_inv], field=self.field.gf)
        return Polynomial.from_poly(self.field, self.poly * scale)

    def divmod(self, divisor: Polynomial) -> tuple[Polynomial, Polynomial]:
        if divisor.is_zero():
            raise ZeroInverse("polynomial division by zero")
        quotient, remainder = divmod(self.poly, divisor.poly)
        return (
            Polynomial.from_poly(self.field, quotient),
            Polynomial.from_poly(self.field, remainder),
        )


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd of two polynomials over the same field."""
    if a.field != b.field:
        raise FieldMismatch("gcd of polynomials over different fields")
    if a.is_zero() and b.is_zero():
        return a
    return Polynomial.from_poly(a.field, galois.gcd(a.poly, b.poly)).monic()


def circulant(first_row: Sequence[FieldElement], m: int) -> Matrix:
    """m x m circulant whose row r is first_row cyclically shifted right by r."""
    if len(first_row) > m:
        raise ValueError(f"first row has {len(first_row)} entries for m={m}")
    field = first_row[0].field
    padded = [e.value for e in first_row] + [0] * (m - len(first_row))
    return Matrix.from_rows(
        field, [[padded[(c - r) % m] for c in range(m)] for r in range(m)]
    )


def circulant_nonsingular(first_row: Sequence[FieldElement], m: int) -> bool:
    """True iff gcd(x^m - 1, V(x)) = 1 with V(x) = sum first_row[i] x^i."""
    if not first_row:
        return False
    if len(first_row) > m:
        raise ValueError(f"first row has {len(first_row)} entries for m={m}")
    field = first_row[0].field
    associated = Polynomial(field, tuple(e.value for e in first_row))
    if associated.is_zero():
        return False
    x_m_minus_one = Polynomial(field, (-1,) + (0,) * (m - 1) + (1,))
    return poly_gcd(x_m_minus_one, associated).degree == 0
