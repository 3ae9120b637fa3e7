"""Protocol descriptors and the Shamir-per-user S-DSSP construction.

The descriptor defined here is shared by every protocol kind; it carries the
access structure, the storing placements (sparse Z), the per-user decoder
slots and whatever the kind's encoder needs.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any

import numpy as np

from src.access_design import AccessStructure, max_users
from src.combinatorics import WindowSequence, k_subsets
from src.field_core import FieldTooSmall, Matrix, PrimeField
from src.shamir import ShamirParams, lagrange_at_zero, shamir_encode
from src.toolkit_config import LOGGER, DsspError

DESCRIPTOR_FORMAT = "dssp-descriptor/1"
KIND_SDSSP = "sdssp"
KIND_OPTIMAL = "optimal_so"
KIND_NEARLY = "nearly_optimal"
PROTOCOL_KINDS = (KIND_SDSSP, KIND_OPTIMAL, KIND_NEARLY)

# node index -> [(slot, value), ...]
ShareStore = dict[int, list[tuple[int, int]]]


class MissingSlot(DsspError):
    """Raised when a decoder lacks one of the slots it needs."""

    def __init__(self, user: int, slot: int):
        super().__init__(f"user {user} cannot decode: slot {slot} was not read")
        self.user = user
        self.slot = slot


class WrongKind(DsspError, ValueError):
    """Raised when an operation is applied to the wrong protocol kind."""


class FormatError(DsspError, ValueError):
    """Raised when a stored document does not match its expected format."""


# =========================
# DATA MODELS
# =========================


@dataclass(frozen=True)
class StoringMatrix:
    """Sparse Z: placements[r] is the node that stores slot r."""

    n: int
    placements: tuple[int, ...]

    def __post_init__(self) -> None:
        bad = [node for node in self.placements if not 1 <= node <= self.n]
        if bad:
            raise ValueError(f"placements name nodes outside [1..{self.n}]: {bad}")

    @property
    def h(self) -> int:
        return len(self.placements)

    def node_slots(self, node: int) -> list[int]:
        return [r for r, stored_on in enumerate(self.placements) if stored_on == node]

    def to_dense(self) -> list[list[int]]:
        return [
            [1 if stored_on == node else 0 for stored_on in self.placements]
            for node in range(1, self.n + 1)
        ]


@dataclass(frozen=True)
class ProtocolDescriptor:
    kind: str
    n: int
    m: int
    q: int
    k: int | None
    access: AccessStructure
    points: tuple[int, ...]
    storing: StoringMatrix
    user_slots: tuple[tuple[int, ...], ...]
    encoding_matrix: Matrix | None = None
    iterative_row: tuple[int, ...] | None = None
    sequence: WindowSequence | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in PROTOCOL_KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        if len(self.access) != self.m or len(self.user_slots) != self.m:
            raise ValueError("access sets and decoder slots must list every user")

    @cached_property
    def field(self) -> PrimeField:
        return PrimeField(self.q)

    @property
    def h(self) -> int:
        return self.storing.h

    @property
    def storage_overhead(self) -> Fraction:
        return Fraction(self.h, self.m)

    def readable_slots(self, j: int) -> list[int]:
        """Every slot stored on a node in user j's access set."""
        nodes = set(self.access.sets[j].elements)
        return [r for r, node in enumerate(self.storing.placements) if node in nodes]

    def coverage_violation(self) -> tuple[int, int] | None:
        """First (user, slot) whose decoder slot sits outside the access set."""
        for j, slots in enumerate(self.user_slots):
            nodes = set(self.access.sets[j].elements)
            for r in slots:
                if self.storing.placements[r] not in nodes:
                    return j, r
        return None


# =========================
# SHARE STORAGE
# =========================


def store_shares(desc: ProtocolDescriptor, y: Sequence[int]) -> ShareStore:
    """Place each produced symbol on the node its storing column names."""
    if len(y) != desc.h:
        raise ValueError(f"expected {desc.h} symbols; got {len(y)}")
    store: ShareStore = {node: [] for node in range(1, desc.n + 1)}
    for r, (node, value) in enumerate(zip(desc.storing.placements, y, strict=True)):
        store[node].append((r, int(value)))
    return store


def reads_for_user(
    desc: ProtocolDescriptor, store: ShareStore, j: int
) -> dict[int, int]:
    """Everything user j can read: the full contents of its access-set nodes."""
    reads: dict[int, int] = {}
    for node in desc.access.sets[j].elements:
        for slot, value in store.get(node, []):
            reads[slot] = value
    return reads


def interpolate_user(
    desc: ProtocolDescriptor,
    j: int,
    reads: dict[int, int],
) -> int:
    """Decode s_j from user j's decoder slots at the descriptor's points."""
    if not 0 <= j < desc.m:
        raise ValueError(f"user index {j} outside 0..{desc.m - 1}")
    slots = desc.user_slots[j]
    for slot in slots:
        if slot not in reads:
            raise MissingSlot(j, slot)
    values = [reads[slot] % desc.q for slot in slots]
    return lagrange_at_zero(desc.field, desc.points[: len(slots)], values)


# =========================
# SEEDED RANDOMNESS
# =========================


def random_symbols(q: int, count: int, rng_seed: int, key: int) -> list[int]:
    """count uniform symbols of F_q from the stream keyed by (rng_seed, key)."""
    if count == 0:
        return []
    sequence = np.random.SeedSequence(entropy=rng_seed, spawn_key=(key,))
    rng = np.random.default_rng(sequence)
    return [int(v) for v in rng.integers(0, q, size=count)]


def fresh_seed() -> int:
    """A 128-bit seed drawn from OS entropy."""
    return int(np.random.SeedSequence().entropy)


# =========================
# S-DSSP
# =========================


def build_sdssp(
    n: int, access: AccessStructure, q: int, seed: int | None = None
) -> ProtocolDescriptor:
    """Independent (t_j, t_j) Shamir per user, slots laid out in tau blocks."""
    access.require_sperner()
    if not len(access):
        raise ValueError("access structure has no users")
    if any(not s.elements for s in access.sets):
        raise ValueError("access sets must be nonempty")
    if access.max_node() > n:
        raise ValueError(f"access sets reference nodes beyond n={n}")
    field = PrimeField(q)
    widest = max(len(s) for s in access.sets)
    if q <= widest:
        raise FieldTooSmall(f"q={q} must exceed the largest access set ({widest})")

    placements: list[int] = []
    user_slots: list[tuple[int, ...]] = []
    for subset in access.sets:
        start = len(placements)
        placements.extend(subset.elements)
        user_slots.append(tuple(range(start, len(placements))))

    sizes = {len(s) for s in access.sets}
    desc = ProtocolDescriptor(
        kind=KIND_SDSSP,
        n=n,
        m=len(access),
        q=field.q,
        k=sizes.pop() if len(sizes) == 1 else None,
        access=access,
        points=tuple(range(1, widest + 1)),
        storing=StoringMatrix(n, tuple(placements)),
        user_slots=tuple(user_slots),
        seed=seed,
    )
    LOGGER.info(
        "event=sdssp_built n=%s m=%s q=%s h=%s profile=%s",
        n,
        desc.m,
        q,
        desc.h,
        access.profile(),
    )
    return desc


def build_max_users_sdssp(
    n: int, q: int, seed: int | None = None
) -> ProtocolDescriptor:
    """S-DSSP over every floor(n/2)-subset, serving max_users(n) users."""
    access = AccessStructure(tuple(k_subsets(n, max(1, n // 2))))
    if len(access) != max_users(n):
        raise AssertionError("middle layer size differs from max_users")
    return build_sdssp(n, access, q, seed)


def _require_kind(desc: ProtocolDescriptor, kind: str) -> None:
    if desc.kind != kind:
        raise WrongKind(f"expected a {kind} descriptor; got {desc.kind}")


def sdssp_randomness_count(desc: ProtocolDescriptor) -> int:
    return sum(len(slots) - 1 for slots in desc.user_slots)


def sdssp_randomness(desc: ProtocolDescriptor, rng_seed: int) -> list[int]:
    """Per-user Shamir coefficients, each user drawing from its own stream."""
    _require_kind(desc, KIND_SDSSP)
    coefficients: list[int] = []
    for j, slots in enumerate(desc.user_slots):
        coefficients.extend(random_symbols(desc.q, len(slots) - 1, rng_seed, j))
    return coefficients


def sdssp_encode_explicit(
    desc: ProtocolDescriptor, s: Sequence[int], randomness: Sequence[int]
) -> list[int]:
    """Encode with caller-supplied coefficients, consumed user by user."""
    _require_kind(desc, KIND_SDSSP)
    if len(s) != desc.m:
        raise ValueError(f"expected {desc.m} secrets; got {len(s)}")
    if len(randomness) != sdssp_randomness_count(desc):
        raise ValueError(
            f"expected {sdssp_randomness_count(desc)} random symbols; "
            f"got {len(randomness)}"
        )
    field = desc.field
    y: list[int] = []
    offset = 0
    for secret, slots in zip(s, desc.user_slots, strict=True):
        t = len(slots)
        params = ShamirParams(field, t, t, desc.points[:t])
        coefficients = randomness[offset : offset + t - 1]
        y.extend(shamir_encode(int(secret), params, coefficients))
        offset += t - 1
    return y


def sdssp_encode(
    desc: ProtocolDescriptor, s: Sequence[int], rng_seed: int
) -> list[int]:
    """Concatenated per-user share blocks; deterministic in rng_seed."""
    return sdssp_encode_explicit(desc, s, sdssp_randomness(desc, rng_seed))


def user_decode(desc: ProtocolDescriptor, j: int, reads: dict[int, int]) -> int:
    """(t_j, t_j) Shamir decoding of user j's block."""
    return interpolate_user(desc, j, reads)


# =========================
# DOCUMENTS
# =========================


def descriptor_to_document(desc: ProtocolDescriptor) -> dict[str, Any]:
    return {
        "format": DESCRIPTOR_FORMAT,
        "kind": desc.kind,
        "n": desc.n,
        "m": desc.m,
        "q": desc.q,
        "k": desc.k,
        "access": [list(s.elements) for s in desc.access.sets],
        "points": list(desc.points),
        "placements": list(desc.storing.placements),
        "user_slots": [list(slots) for slots in desc.user_slots],
        "encoding_matrix": (
            desc.encoding_matrix.row_list() if desc.encoding_matrix else None
        ),
        "iterative_row": (
            list(desc.iterative_row) if desc.iterative_row is not None else None
        ),
        "sequence": (
            {
                "symbols": list(desc.sequence.symbols),
                "window": desc.sequence.window,
                "cyclic": desc.sequence.cyclic,
            }
            if desc.sequence
            else None
        ),
        "seed": desc.seed,
    }


def descriptor_from_document(doc: object) -> ProtocolDescriptor:
    if not isinstance(doc, dict) or doc.get("format") != DESCRIPTOR_FORMAT:
        raise FormatError(f"not a {DESCRIPTOR_FORMAT} document")
    try:
        field = PrimeField(int(doc["q"]))
        matrix_rows = doc.get("encoding_matrix")
        sequence_doc = doc.get("sequence")
        iterative_row = doc.get("iterative_row")
        return ProtocolDescriptor(
            kind=str(doc["kind"]),
            n=int(doc["n"]),
            m=int(doc["m"]),
            q=field.q,
            k=None if doc.get("k") is None else int(doc["k"]),
            access=AccessStructure.from_lists(doc["access"]),
            points=tuple(int(p) for p in doc["points"]),
            storing=StoringMatrix(
                int(doc["n"]), tuple(int(v) for v in doc["placements"])
            ),
            user_slots=tuple(
                tuple(int(r) for r in slots) for slots in doc["user_slots"]
            ),
            encoding_matrix=(
                Matrix.from_rows(field, matrix_rows) if matrix_rows else None
            ),
            iterative_row=(
                tuple(int(v) for v in iterative_row)
                if iterative_row is not None
                else None
            ),
            sequence=(
                WindowSequence(
                    tuple(int(v) for v in sequence_doc["symbols"]),
                    int(sequence_doc["window"]),
                    bool(sequence_doc["cyclic"]),
                )
                if sequence_doc
                else None
            ),
            seed=None if doc.get("seed") is None else int(doc["seed"]),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed descriptor document: {exc!r}") from exc
