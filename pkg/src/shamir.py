"""(k, t) Shamir encoding and Lagrange decoding over a prime field.

Randomness is always passed in by the caller; nothing here draws entropy.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import galois

from src.field_core import FieldTooSmall, PrimeField
from src.toolkit_config import DsspError


class InsufficientShares(DsspError, ValueError):
    """Raised when fewer than t shares are supplied to the decoder."""

    def __init__(self, needed: int, supplied: int):
        super().__init__(f"need {needed} shares to decode; got {supplied}")
        self.needed = needed
        self.supplied = supplied


@dataclass(frozen=True)
class ShamirParams:
    field: PrimeField
    k: int
    t: int
    points: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.t <= self.k:
            raise ValueError(f"need 1 <= t <= k; got t={self.t} k={self.k}")
        if self.field.q <= self.k:
            raise FieldTooSmall(
                f"F_{self.field.q} has too few nonzero elements for {self.k} shares"
            )
        if len(self.points) != self.k:
            raise ValueError(f"expected {self.k} evaluation points")
        canonical = [p % self.field.q for p in self.points]
        if 0 in canonical or len(set(canonical)) != self.k:
            raise ValueError("evaluation points must be distinct and nonzero")

    @classmethod
    def default(cls, field: PrimeField, k: int, t: int | None = None) -> ShamirParams:
        """Parameters with evaluation points 1..k."""
        return cls(field, k, k if t is None else t, tuple(range(1, k + 1)))


def shamir_encode(s: int, params: ShamirParams, seed: Sequence[int]) -> list[int]:
    """Shares P(gamma_i) of P(x) = s + seed_1 x + ... + seed_{t-1} x^{t-1}."""
    if len(seed) != params.t - 1:
        raise ValueError(f"expected {params.t - 1} seed symbols; got {len(seed)}")
    field = params.field
    coefficients = field.array([s, *seed])
    polynomial = galois.Poly(coefficients, order="asc")
    return [int(v) for v in polynomial(field.array(params.points))]


def lagrange_at_zero(
    field: PrimeField, points: Sequence[int], values: Sequence[int]
) -> int:
    """Value at 0 of the unique polynomial of degree < len(points) through them."""
    q = field.q
    xs = [p % q for p in points]
    if len(set(xs)) != len(xs):
        raise ValueError(f"interpolation points must be distinct: {list(points)}")
    if 0 in xs:
        raise ValueError("interpolation points must be nonzero")
    if len(values) != len(xs):
        raise ValueError(f"expected {len(xs)} values; got {len(values)}")
    polynomial = galois.lagrange_poly(field.array(xs), field.array(values))
    return int(polynomial(field.gf(0)))


def shamir_decode(field: PrimeField, shares: Sequence[tuple[int, int]], t: int) -> int:
    """Recover P(0) from at least t (point, value) shares."""
    if len(shares) < t:
        raise InsufficientShares(t, len(shares))
    points = [int(point) for point, _ in shares]
    if len({p % field.q for p in points}) != len(points):
        raise ValueError(f"duplicate share points: {points}")
    chosen = shares[:t]
    return lagrange_at_zero(
        field, [int(p) for p, _ in chosen], [int(v) for _, v in chosen]
    )
