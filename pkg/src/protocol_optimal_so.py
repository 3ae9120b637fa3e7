"""Storage-optimal protocol: m = C(n, k) users, y = E s, one copy per symbol.

Each user j owns a polynomial P_j of degree k-1 with P_j(0) = s_j whose values
at gamma^1..gamma^k are the cyclic window y_j..y_{j+k-1}. The polynomials'
non-constant coefficients are not random; they are fixed by the coupled linear
system A b + K s = 0, whose solution gives the encoding matrix E.
"""

from __future__ import annotations

from collections.abc import Sequence

from src.access_design import AccessStructure
from src.combinatorics import Infeasible, KSubset, binomial, window_sequence
from src.field_core import (
    FieldElement,
    FieldTooSmall,
    Matrix,
    OpCounter,
    PrimeField,
    SingularMatrix,
    det,
    gauss_solve,
    mat_vec,
    primitive_element,
    rank,
    vandermonde,
)
from src.protocol_sdssp import (
    KIND_OPTIMAL,
    ProtocolDescriptor,
    StoringMatrix,
    WrongKind,
    interpolate_user,
)
from src.toolkit_config import DEFAULT_SEARCH_BUDGET, LOGGER, DsspError


class SingularSystem(DsspError):
    """Raised when the coupled system matrix A is singular for (q, m, k)."""

    def __init__(self, q: int, m: int, k: int, system_rank: int):
        super().__init__(
            f"system matrix is singular for q={q} m={m} k={k} "
            f"(rank {system_rank} < {k * m})"
        )
        self.q = q
        self.m = m
        self.k = k
        self.rank = system_rank


class WindowInfeasible(DsspError):
    """Raised when no storing window sequence exists for the requested shape."""

    def __init__(self, cause: Infeasible):
        super().__init__(str(cause))
        self.certificate = cause.certificate


def check_condition(q: int, m: int, k: int) -> bool:
    """Sufficient nonsingularity test: (q-1) divides none of m, 2m, ..., km."""
    return all((i * m) % (q - 1) for i in range(1, k + 1))


def gamma_points(field: PrimeField, gamma: int, k: int) -> list[FieldElement]:
    """gamma^1, ..., gamma^k."""
    return [field(gamma) ** i for i in range(1, k + 1)]


def assemble_system_matrix(field: PrimeField, m: int, k: int, gamma: int) -> Matrix:
    """The km x km matrix A of the system A b + K s = 0.

    Unknowns b are the coefficients p_{j,1..k-1} of every user followed by
    y_0..y_{m-1}. Row j*k + i encodes P_j(gamma^(i+1)) - y_{(j+i) mod m} = -s_j.
    """
    size = k * m
    y_offset = (k - 1) * m
    block = (
        vandermonde(gamma_points(field, gamma, k), k - 1).row_list()
        if k > 1
        else [[] for _ in range(k)]
    )
    rows: list[list[int]] = []
    for j in range(m):
        for i in range(k):
            row = [0] * size
            row[j * (k - 1) : (j + 1) * (k - 1)] = block[i]
            row[y_offset + (j + i) % m] = -1
            rows.append(row)
    return Matrix.from_rows(field, rows)


def _secret_injection(field: PrimeField, m: int, k: int) -> Matrix:
    """K: row j*k + i picks s_j."""
    rows = [[1 if c == j else 0 for c in range(m)] for j in range(m) for _ in range(k)]
    return Matrix.from_rows(field, rows)


def encoding_matrix(field: PrimeField, m: int, k: int, gamma: int) -> Matrix:
    """E = the y-rows of -A^{-1} K; raises SingularSystem when A is singular."""
    system = assemble_system_matrix(field, m, k, gamma)
    if not check_condition(field.q, m, k):
        determinant = det(system)
        LOGGER.info(
            "event=optimal_condition_failed q=%s m=%s k=%s det=%s",
            field.q,
            m,
            k,
            determinant.value,
        )
        if determinant.value == 0:
            raise SingularSystem(field.q, m, k, rank(system))
    try:
        solution = gauss_solve(system, -_secret_injection(field, m, k))
    except SingularMatrix as exc:
        raise SingularSystem(field.q, m, k, exc.rank) from exc
    return solution.select_rows(range((k - 1) * m, k * m))


def build_optimal(
    n: int,
    k: int,
    q: int,
    budget: int = DEFAULT_SEARCH_BUDGET,
    seed: int | None = None,
) -> ProtocolDescriptor:
    """Storage-overhead-1 protocol serving every k-subset of [n]."""
    if not 1 <= k <= max(1, n // 2):
        raise ValueError(f"need 1 <= k <= floor(n/2); got n={n} k={k}")
    field = PrimeField(q)
    if q <= k or q < 3:
        raise FieldTooSmall(f"q={q} is too small for k={k} (need q > k and q >= 3)")
    m = binomial(n, k)
    LOGGER.info("event=optimal_build_started n=%s k=%s q=%s m=%s", n, k, q, m)

    gamma = primitive_element(field).value
    matrix = encoding_matrix(field, m, k, gamma)
    if rank(matrix) != m:
        raise SingularSystem(q, m, k, rank(matrix))

    try:
        sequence = window_sequence(n, k, m, cyclic=True, budget=budget)
    except Infeasible as exc:
        LOGGER.info("event=optimal_window_infeasible n=%s k=%s", n, k)
        raise WindowInfeasible(exc) from exc

    access = AccessStructure(
        tuple(KSubset.of(sequence.window_symbols(j)) for j in range(m))
    )
    access.require_sperner()
    desc = ProtocolDescriptor(
        kind=KIND_OPTIMAL,
        n=n,
        m=m,
        q=q,
        k=k,
        access=access,
        points=tuple(p.value for p in gamma_points(field, gamma, k)),
        storing=StoringMatrix(n, sequence.symbols),
        user_slots=tuple(tuple((j + i) % m for i in range(k)) for j in range(m)),
        encoding_matrix=matrix,
        sequence=sequence,
        seed=seed,
    )
    LOGGER.info(
        "event=optimal_build_finished n=%s k=%s q=%s gamma=%s h=%s",
        n,
        k,
        q,
        gamma,
        desc.h,
    )
    return desc


def linear_encode(
    matrix: Matrix, s: Sequence[int], counter: OpCounter | None = None
) -> list[int]:
    return mat_vec(matrix, [int(v) % matrix.field.q for v in s], counter)


def optimal_encode(
    desc: ProtocolDescriptor, s: Sequence[int], counter: OpCounter | None = None
) -> list[int]:
    """y = E s; consumes no randomness."""
    if desc.kind != KIND_OPTIMAL or desc.encoding_matrix is None:
        raise WrongKind(f"optimal_encode needs an {KIND_OPTIMAL} descriptor")
    if len(s) != desc.m:
        raise ValueError(f"expected {desc.m} secrets; got {len(s)}")
    return linear_encode(desc.encoding_matrix, s, counter)


def optimal_decode(desc: ProtocolDescriptor, j: int, reads: dict[int, int]) -> int:
    """Interpolate user j's window at gamma^1..gamma^k and evaluate at 0."""
    if desc.kind != KIND_OPTIMAL:
        raise WrongKind(f"optimal_decode needs an {KIND_OPTIMAL} descriptor")
    return interpolate_user(desc, j, reads)
