"""Machine checks of a built protocol: correctness, secrecy, overhead, traffic.

Secrecy is verified exactly. Small instances are enumerated in full and the
conditional counts of s_l given user j's readable data compared as integers;
linear deterministic encoders get a rank certificate instead.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any

import numpy as np

from src.access_design import solve_design
from src.access_design import max_users as max_users_for
from src.field_core import Matrix, rank
from src.protocol_nearly_optimal import nearly_encode, nearly_seed
from src.protocol_optimal_so import optimal_encode
from src.protocol_sdssp import (
    KIND_NEARLY,
    KIND_OPTIMAL,
    KIND_SDSSP,
    MissingSlot,
    ProtocolDescriptor,
    WrongKind,
    interpolate_user,
    reads_for_user,
    sdssp_encode_explicit,
    sdssp_randomness,
    sdssp_randomness_count,
    store_shares,
)
from src.toolkit_config import (
    DEFAULT_CORRECTNESS_TRIALS,
    DEFAULT_ENUMERATION_BUDGET,
    LOGGER,
    BudgetExhausted,
)

AUDIT_FORMAT = "dssp-audit/1"
METHOD_EXHAUSTIVE = "exhaustive"
METHOD_RANK = "rank"
METHOD_SKIPPED = "skipped"

Encoder = Callable[[ProtocolDescriptor, Sequence[int], Sequence[int]], list[int]]


# =========================
# ENCODER DISPATCH
# =========================


def randomness_count(desc: ProtocolDescriptor) -> int:
    """Symbols of external randomness one encoding consumes."""
    if desc.kind == KIND_SDSSP:
        return sdssp_randomness_count(desc)
    if desc.kind == KIND_NEARLY:
        return len(desc.points) - 1
    return 0


def encode_explicit(
    desc: ProtocolDescriptor, s: Sequence[int], randomness: Sequence[int]
) -> list[int]:
    if desc.kind == KIND_SDSSP:
        return sdssp_encode_explicit(desc, s, randomness)
    if desc.kind == KIND_NEARLY:
        return nearly_encode(desc, s, randomness)
    if randomness:
        raise ValueError(f"{KIND_OPTIMAL} encoding takes no randomness")
    return optimal_encode(desc, s)


def draw_randomness(desc: ProtocolDescriptor, rng_seed: int) -> list[int]:
    if desc.kind == KIND_SDSSP:
        return sdssp_randomness(desc, rng_seed)
    if desc.kind == KIND_NEARLY:
        return nearly_seed(desc, rng_seed)
    return []


def encode_secrets(
    desc: ProtocolDescriptor, s: Sequence[int], rng_seed: int
) -> list[int]:
    """Encode with randomness drawn deterministically from rng_seed."""
    return encode_explicit(desc, s, draw_randomness(desc, rng_seed))


def decode_user(desc: ProtocolDescriptor, j: int, reads: dict[int, int]) -> int:
    return interpolate_user(desc, j, reads)


# =========================
# DATA MODELS
# =========================


@dataclass
class Verdict:
    passed: bool
    detail: str = ""
    witness: dict[str, Any] | None = None

    def to_document(self) -> dict[str, Any]:
        return {"passed": self.passed, "detail": self.detail, "witness": self.witness}


@dataclass
class SecrecyResult:
    method: str
    pairs: dict[tuple[int, int], Verdict] = field(default_factory=dict)
    detail: str = ""
    decodability: Verdict | None = None

    @property
    def inconclusive(self) -> bool:
        """True when no check ran, e.g. the input space exceeded the budget."""
        return self.method == METHOD_SKIPPED

    @property
    def passed(self) -> bool:
        if self.inconclusive:
            return False
        if self.decodability is not None and not self.decodability.passed:
            return False
        return all(v.passed for v in self.pairs.values())

    def failures(self) -> list[tuple[int, int]]:
        return sorted(pair for pair, v in self.pairs.items() if not v.passed)

    def to_document(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "passed": self.passed,
            "inconclusive": self.inconclusive,
            "pairs_checked": len(self.pairs),
            "detail": self.detail,
            "decodability": (
                self.decodability.to_document() if self.decodability else None
            ),
            "failures": [
                {"user": j, "other": other, **self.pairs[(j, other)].to_document()}
                for j, other in self.failures()
            ],
        }


@dataclass(frozen=True)
class Metrics:
    so: Fraction
    so_gap: Fraction
    comm: int
    c_star: int
    max_users: int
    downloads: tuple[int, ...]
    trivial_bound: int | None
    trivial_ratio: Fraction | None

    def to_document(self) -> dict[str, Any]:
        return {
            "so": str(self.so),
            "so_gap": str(self.so_gap),
            "comm": self.comm,
            "c_star": self.c_star,
            "max_users": self.max_users,
            "downloads": list(self.downloads),
            "trivial_bound": self.trivial_bound,
            "trivial_ratio": (
                str(self.trivial_ratio) if self.trivial_ratio is not None else None
            ),
        }


@dataclass
class AuditReport:
    kind: str
    correctness: Verdict
    sperner: Verdict
    metrics: Metrics
    so_expected: Fraction
    secrecy: SecrecyResult
    uniformity: Verdict | None = None

    @property
    def passed(self) -> bool:
        verdicts = [self.correctness, self.sperner, self.secrecy]
        if self.uniformity is not None:
            verdicts.append(self.uniformity)
        return (
            all(v.passed for v in verdicts)
            and self.metrics.so == self.so_expected
            and self.metrics.comm >= self.metrics.c_star
        )

    def to_document(self) -> dict[str, Any]:
        return {
            "format": AUDIT_FORMAT,
            "kind": self.kind,
            "passed": self.passed,
            "correctness": self.correctness.to_document(),
            "sperner": self.sperner.to_document(),
            "metrics": self.metrics.to_document(),
            "so_expected": str(self.so_expected),
            "secrecy": self.secrecy.to_document(),
            "uniformity": (
                self.uniformity.to_document() if self.uniformity is not None else None
            ),
        }


# =========================
# ENUMERATION
# =========================


def input_space_size(desc: ProtocolDescriptor) -> int:
    return desc.q ** (desc.m + randomness_count(desc))


def _all_inputs(desc: ProtocolDescriptor) -> Iterator[tuple[list[int], list[int]]]:
    m = desc.m
    for values in product(range(desc.q), repeat=m + randomness_count(desc)):
        yield list(values[:m]), list(values[m:])


def _random_inputs(
    desc: ProtocolDescriptor, trials: int, seed: int
) -> Iterator[tuple[list[int], list[int]]]:
    rng = np.random.default_rng(seed)
    extra = randomness_count(desc)
    for _ in range(trials):
        s = [int(v) for v in rng.integers(0, desc.q, size=desc.m)]
        r = [int(v) for v in rng.integers(0, desc.q, size=extra)]
        yield s, r


# =========================
# AUDITS
# =========================


def audit_correctness(
    desc: ProtocolDescriptor,
    trials: int = DEFAULT_CORRECTNESS_TRIALS,
    exhaustive_budget: int = DEFAULT_ENUMERATION_BUDGET,
    seed: int = 0,
) -> Verdict:
    """Encode, store on nodes, and decode every user from its own nodes."""
    exhaustive = input_space_size(desc) <= exhaustive_budget
    inputs = _all_inputs(desc) if exhaustive else _random_inputs(desc, trials, seed)
    checked = 0
    for s, randomness in inputs:
        store = store_shares(desc, encode_explicit(desc, s, randomness))
        for j in range(desc.m):
            witness = {"user": j, "secrets": s, "randomness": randomness}
            try:
                decoded = decode_user(desc, j, reads_for_user(desc, store, j))
            except MissingSlot as exc:
                LOGGER.warning(
                    "event=audit_correctness_failed user=%s slot=%s", j, exc.slot
                )
                return Verdict(False, str(exc), {**witness, "missing_slot": exc.slot})
            if decoded != s[j] % desc.q:
                LOGGER.warning("event=audit_correctness_failed user=%s", j)
                return Verdict(
                    False,
                    f"user {j} decoded {decoded} instead of {s[j]}",
                    {**witness, "decoded": decoded},
                )
        checked += 1
    mode = "exhaustive" if exhaustive else "random"
    return Verdict(True, f"{mode}: {checked} inputs, every user decoded")


def audit_sperner(desc: ProtocolDescriptor) -> Verdict:
    violation = desc.access.sperner_violation()
    if violation is not None:
        j, other = violation
        return Verdict(
            False,
            f"access set {j} is contained in access set {other}",
            {"inner": j, "outer": other},
        )
    return Verdict(True, f"{desc.m} access sets, pairwise non-containing")


def audit_secrecy_exhaustive(
    desc: ProtocolDescriptor,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    encoder: Encoder | None = None,
) -> SecrecyResult:
    """Exact conditional uniformity of s_l given everything user j can read."""
    total = input_space_size(desc)
    if total > budget:
        raise BudgetExhausted(f"secrecy enumeration of {total} inputs", budget)
    encode = encoder or encode_explicit
    q = desc.q
    readable = [desc.readable_slots(j) for j in range(desc.m)]
    # counts[j][view][l] is a histogram of s_l over inputs producing that view
    counts: list[dict[tuple[int, ...], list[list[int]]]] = [
        {} for _ in range(desc.m)
    ]
    for s, randomness in _all_inputs(desc):
        y = encode(desc, s, randomness)
        for j, slots in enumerate(readable):
            view = tuple(y[r] % q for r in slots)
            histograms = counts[j].get(view)
            if histograms is None:
                histograms = [[0] * q for _ in range(desc.m)]
                counts[j][view] = histograms
            for other, value in enumerate(s):
                histograms[other][value] += 1

    result = SecrecyResult(METHOD_EXHAUSTIVE, detail=f"{total} inputs enumerated")
    for j in range(desc.m):
        for other in range(desc.m):
            if other == j:
                continue
            verdict = Verdict(True)
            for view, histograms in counts[j].items():
                if len(set(histograms[other])) != 1:
                    verdict = Verdict(
                        False,
                        f"s_{other} is not uniform given user {j}'s view",
                        {"view": list(view), "counts": histograms[other]},
                    )
                    break
            result.pairs[(j, other)] = verdict
    if not result.passed:
        LOGGER.warning(
            "event=audit_secrecy_failed method=exhaustive pairs=%s", result.failures()
        )
    return result


def _unit_row(size: int, index: int) -> list[int]:
    return [1 if c == index else 0 for c in range(size)]


def _rank_of(matrix: Matrix, slots: Sequence[int], unit: int | None = None) -> int:
    """Rank of E's rows at slots, optionally stacked with the unit row e_unit."""
    rows = [list(matrix.row(r)) for r in slots]
    if unit is not None:
        rows.append(_unit_row(matrix.cols, unit))
    return rank(Matrix.from_rows(matrix.field, rows)) if rows else 0


def audit_secrecy_rank(desc: ProtocolDescriptor) -> SecrecyResult:
    """Rank certificate for y = E s: e_l outside the row space of user j's rows.

    Also checks e_j inside the row space of user j's decoder window.
    """
    if desc.kind != KIND_OPTIMAL or desc.encoding_matrix is None:
        raise WrongKind(f"rank certificate needs an {KIND_OPTIMAL} descriptor")
    matrix = desc.encoding_matrix
    result = SecrecyResult(METHOD_RANK, detail="rank([M_j; e_l]) = rank(M_j) + 1")
    result.decodability = Verdict(True, "every e_j lies in its window's row space")
    for j in range(desc.m):
        window = desc.user_slots[j]
        window_rank = _rank_of(matrix, window)
        if result.decodability.passed and _rank_of(matrix, window, j) != window_rank:
            result.decodability = Verdict(
                False,
                f"s_{j} is not a linear function of user {j}'s window",
                {"user": j, "rank": window_rank},
            )

        readable = desc.readable_slots(j)
        base = _rank_of(matrix, readable)
        for other in range(desc.m):
            if other == j:
                continue
            grown = _rank_of(matrix, readable, other)
            if grown == base + 1:
                result.pairs[(j, other)] = Verdict(True)
            else:
                result.pairs[(j, other)] = Verdict(
                    False,
                    f"s_{other} is a linear function of user {j}'s readable symbols",
                    {"rank": base, "rank_with_unit": grown},
                )
    if not result.passed:
        LOGGER.warning(
            "event=audit_secrecy_failed method=rank pairs=%s", result.failures()
        )
    return result


def audit_uniformity(
    desc: ProtocolDescriptor, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> Verdict:
    """Over uniform inputs, every y in F_q^h occurs equally often."""
    total = input_space_size(desc)
    if total > budget:
        raise BudgetExhausted(f"uniformity enumeration of {total} inputs", budget)
    seen: Counter[tuple[int, ...]] = Counter()
    for s, randomness in _all_inputs(desc):
        seen[tuple(encode_explicit(desc, s, randomness))] += 1
    outputs = desc.q**desc.h
    if len(seen) != outputs:
        return Verdict(
            False,
            f"{len(seen)} distinct outputs cover only part of F_{desc.q}^{desc.h}",
            {"distinct": len(seen), "expected": outputs},
        )
    multiplicities = set(seen.values())
    if len(multiplicities) != 1:
        worst = seen.most_common(1)[0]
        return Verdict(
            False,
            "outputs occur with unequal multiplicity",
            {"output": list(worst[0]), "count": worst[1]},
        )
    return Verdict(True, f"{total} inputs map uniformly onto {outputs} outputs")


def expected_storage_overhead(desc: ProtocolDescriptor) -> Fraction:
    if desc.kind == KIND_OPTIMAL:
        return Fraction(1)
    if desc.kind == KIND_NEARLY:
        return Fraction(desc.m + len(desc.points) - 1, desc.m)
    return Fraction(sum(len(s) for s in desc.access.sets), desc.m)


def metrics(desc: ProtocolDescriptor) -> Metrics:
    so = desc.storage_overhead
    downloads = tuple(len(slots) for slots in desc.user_slots)
    comm = sum(downloads)
    sizes = {len(s) for s in desc.access.sets}
    trivial_bound = trivial_ratio = None
    if len(sizes) == 1 and (k := sizes.pop()) > 1:
        trivial_bound = desc.m * (k - 1)
        trivial_ratio = Fraction(comm, trivial_bound)
    return Metrics(
        so=so,
        so_gap=so - 1,
        comm=comm,
        c_star=solve_design(desc.n, desc.m).c_star,
        max_users=max_users_for(desc.n),
        downloads=downloads,
        trivial_bound=trivial_bound,
        trivial_ratio=trivial_ratio,
    )


def audit_secrecy(
    desc: ProtocolDescriptor, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> SecrecyResult:
    """Rank certificate for linear encoders, enumeration otherwise."""
    if desc.kind == KIND_OPTIMAL:
        return audit_secrecy_rank(desc)
    if input_space_size(desc) <= budget:
        return audit_secrecy_exhaustive(desc, budget)
    LOGGER.warning(
        "event=audit_secrecy_skipped inputs=%s budget=%s",
        input_space_size(desc),
        budget,
    )
    return SecrecyResult(
        METHOD_SKIPPED,
        detail=f"{input_space_size(desc)} inputs exceed the budget of {budget}",
    )


def audit(
    desc: ProtocolDescriptor,
    trials: int = DEFAULT_CORRECTNESS_TRIALS,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    seed: int = 0,
) -> AuditReport:
    LOGGER.info(
        "event=audit_started kind=%s n=%s m=%s q=%s", desc.kind, desc.n, desc.m, desc.q
    )
    correctness = audit_correctness(desc, trials, budget, seed)
    uniformity = (
        audit_uniformity(desc, budget) if input_space_size(desc) <= budget else None
    )
    report = AuditReport(
        kind=desc.kind,
        correctness=correctness,
        sperner=audit_sperner(desc),
        metrics=metrics(desc),
        so_expected=expected_storage_overhead(desc),
        secrecy=audit_secrecy(desc, budget),
        uniformity=uniformity,
    )
    LOGGER.info(
        "event=audit_finished kind=%s passed=%s secrecy_method=%s",
        desc.kind,
        report.passed,
        report.secrecy.method,
    )
    return report
