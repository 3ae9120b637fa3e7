"""Nearly storage-optimal protocol for any m, with k-1 external seed symbols.

Windows of width k over an acyclic sequence of length m+k-1 give every user k
consecutive symbols. Only user 0's polynomial is seeded; each later symbol is
chosen so that the next user's window interpolates to its secret.
"""

from __future__ import annotations

from collections.abc import Sequence

from src.access_design import AccessStructure, InfeasibleUserCount, max_users
from src.combinatorics import Infeasible, KSubset, binomial, window_sequence
from src.field_core import (
    FieldTooSmall,
    OpCounter,
    PrimeField,
    invert,
    vandermonde,
)
from src.protocol_optimal_so import WindowInfeasible
from src.protocol_sdssp import (
    KIND_NEARLY,
    ProtocolDescriptor,
    StoringMatrix,
    WrongKind,
    interpolate_user,
    random_symbols,
)
from src.toolkit_config import DEFAULT_SEARCH_BUDGET, LOGGER


def minimal_window(n: int, m: int) -> int:
    """Smallest k >= 1 with C(n, k) >= m."""
    if not 1 <= m <= max_users(n):
        raise InfeasibleUserCount(n, m)
    k = 1
    while binomial(n, k) < m:
        k += 1
    return k


def iterative_row(field: PrimeField, points: Sequence[int]) -> tuple[int, ...]:
    """w = [g_k, g_k^2, ..., g_k^(k-1)] D^{-1} over the first k-1 points."""
    k = len(points)
    if k <= 1:
        return ()
    d_inv = invert(vandermonde(field.elements(points[: k - 1]), k - 1))
    last = vandermonde(field.elements(points[-1:]), k - 1)
    return tuple(int(v) for v in (last.array() @ d_inv.array())[0])


def iterative_encode(
    field: PrimeField,
    points: Sequence[int],
    w: Sequence[int],
    s: Sequence[int],
    seed: Sequence[int],
    counter: OpCounter | None = None,
) -> list[int]:
    """m + k - 1 symbols whose every width-k window decodes to its user's secret."""
    k = len(points)
    if len(seed) != k - 1:
        raise ValueError(f"expected {k - 1} seed symbols; got {len(seed)}")
    if not s:
        raise ValueError("need at least one secret")
    secrets = field.array(s)
    coefficients = field.array(w)
    first = [secrets[0], *field.array(seed)]
    muls = adds = 0

    # user 0: Horner evaluation of s_0 + seed_1 x + ... at each point
    y = []
    for x in field.array(points):
        acc = first[-1]
        for c in reversed(first[:-1]):
            acc = acc * x + c
            muls += 1
            adds += 1
        y.append(acc)

    for j in range(1, len(secrets)):
        s_j = secrets[j]
        acc = s_j
        for coefficient, value in zip(coefficients, y[j : j + k - 1], strict=True):
            acc = acc + coefficient * (value - s_j)
            muls += 1
            adds += 2
        y.append(acc)

    if counter is not None:
        counter.muls += muls
        counter.adds += adds
    return [int(v) for v in y]


def build_nearly(
    n: int,
    m: int,
    q: int,
    k_override: int | None = None,
    budget: int = DEFAULT_SEARCH_BUDGET,
    seed: int | None = None,
) -> ProtocolDescriptor:
    """Uniform width-k protocol with h = m + k - 1 stored symbols."""
    k = minimal_window(n, m) if k_override is None else k_override
    if not 1 <= k <= n or binomial(n, k) < m:
        raise ValueError(f"k={k} cannot host m={m} distinct subsets of [{n}]")
    field = PrimeField(q)
    if q <= k:
        raise FieldTooSmall(f"q={q} must exceed k={k}")
    LOGGER.info("event=nearly_build_started n=%s m=%s q=%s k=%s", n, m, q, k)

    try:
        sequence = window_sequence(n, k, m, cyclic=False, budget=budget)
    except Infeasible as exc:
        raise WindowInfeasible(exc) from exc

    points = tuple(range(1, k + 1))
    access = AccessStructure(
        tuple(KSubset.of(sequence.window_symbols(j)) for j in range(m))
    )
    access.require_sperner()
    desc = ProtocolDescriptor(
        kind=KIND_NEARLY,
        n=n,
        m=m,
        q=q,
        k=k,
        access=access,
        points=points,
        storing=StoringMatrix(n, sequence.symbols),
        user_slots=tuple(tuple(range(j, j + k)) for j in range(m)),
        iterative_row=iterative_row(field, points),
        sequence=sequence,
        seed=seed,
    )
    LOGGER.info(
        "event=nearly_build_finished n=%s m=%s q=%s k=%s h=%s", n, m, q, k, desc.h
    )
    return desc


def _require_nearly(desc: ProtocolDescriptor) -> None:
    if desc.kind != KIND_NEARLY or desc.iterative_row is None:
        raise WrongKind(f"expected a {KIND_NEARLY} descriptor; got {desc.kind}")


def nearly_seed(desc: ProtocolDescriptor, rng_seed: int) -> list[int]:
    """k-1 seed symbols drawn from the generator keyed by rng_seed."""
    _require_nearly(desc)
    return random_symbols(desc.q, len(desc.points) - 1, rng_seed, 0)


def nearly_encode(
    desc: ProtocolDescriptor,
    s: Sequence[int],
    seed: Sequence[int],
    counter: OpCounter | None = None,
) -> list[int]:
    _require_nearly(desc)
    if len(s) != desc.m:
        raise ValueError(f"expected {desc.m} secrets; got {len(s)}")
    return iterative_encode(
        desc.field, desc.points, desc.iterative_row, s, seed, counter
    )


def nearly_decode(desc: ProtocolDescriptor, j: int, reads: dict[int, int]) -> int:
    """Interpolate user j's window y_j..y_{j+k-1} at 1..k and evaluate at 0."""
    _require_nearly(desc)
    return interpolate_user(desc, j, reads)
