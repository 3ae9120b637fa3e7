"""Binomials, k-subset listings and storing-order window sequences.

Node indices are 1-based throughout, matching the node set [n].
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from itertools import combinations, pairwise

from src.toolkit_config import (
    DEFAULT_SEARCH_BUDGET,
    LOGGER,
    BudgetExhausted,
    DsspError,
)

CHECKED_INT_MAX = 2**63 - 1


class Overflow(DsspError, OverflowError):
    """Raised when a binomial leaves the checked 64-bit integer range."""


class Infeasible(DsspError):
    """Raised when no window sequence exists; carries the certificate text."""

    def __init__(self, n: int, k: int, m: int, cyclic: bool, certificate: str):
        shape = "cyclic" if cyclic else "acyclic"
        super().__init__(
            f"no {shape} window sequence for n={n} k={k} m={m}: {certificate}"
        )
        self.n = n
        self.k = k
        self.m = m
        self.cyclic = cyclic
        self.certificate = certificate


def binomial(n: int, k: int) -> int:
    """Exact C(n, k), refusing results beyond the checked integer range."""
    if not 0 <= k <= n:
        raise ValueError(f"binomial needs 0 <= k <= n; got n={n} k={k}")
    value = math.comb(n, k)
    if value > CHECKED_INT_MAX:
        raise Overflow(f"C({n},{k}) exceeds 2^63-1")
    return value


@dataclass(frozen=True)
class KSubset:
    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(a >= b for a, b in pairwise(self.elements)):
            raise ValueError(f"subset elements must increase: {self.elements}")
        if self.elements and self.elements[0] < 1:
            raise ValueError("node indices start at 1")

    @classmethod
    def of(cls, values: Iterable[int]) -> KSubset:
        return cls(tuple(sorted(set(values))))

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def issubset(self, other: KSubset) -> bool:
        return set(self.elements) <= set(other.elements)


def k_subsets(n: int, k: int) -> list[KSubset]:
    """All k-subsets of [n] in lexicographic order."""
    return [KSubset(c) for c in combinations(range(1, n + 1), k)]


def _revolving_door(n: int, k: int) -> list[tuple[int, ...]]:
    if k == 0:
        return [()]
    if k == n:
        return [tuple(range(1, n + 1))]
    head = _revolving_door(n - 1, k)
    tail = [subset + (n,) for subset in reversed(_revolving_door(n - 1, k - 1))]
    return head + tail


def revolving_door(n: int, k: int) -> list[KSubset]:
    """Gray-code listing of the k-subsets of [n]; neighbours differ by one swap."""
    if not 1 <= k <= n:
        raise ValueError(f"revolving_door needs 1 <= k <= n; got n={n} k={k}")
    return [KSubset(subset) for subset in _revolving_door(n, k)]


# =========================
# WINDOW SEQUENCES
# =========================


@dataclass(frozen=True)
class WindowSequence:
    symbols: tuple[int, ...]
    window: int
    cyclic: bool

    @property
    def window_count(self) -> int:
        if self.cyclic:
            return len(self.symbols)
        return max(len(self.symbols) - self.window + 1, 0)

    def window_symbols(self, j: int) -> tuple[int, ...]:
        """Symbols of window j (0-based), wrapping for cyclic sequences."""
        length = len(self.symbols)
        return tuple(self.symbols[(j + i) % length] for i in range(self.window))

    def windows(self) -> list[frozenset[int]]:
        return [frozenset(self.window_symbols(j)) for j in range(self.window_count)]


def verify_window_property(seq: WindowSequence) -> tuple[bool, str | None]:
    """Check both window invariants; returns (ok, first violation)."""
    if seq.cyclic and len(seq.symbols) < seq.window:
        return False, f"cyclic sequence shorter than its window {seq.window}"
    seen: dict[frozenset[int], int] = {}
    for j in range(seq.window_count):
        symbols = seq.window_symbols(j)
        window = frozenset(symbols)
        if len(window) < seq.window:
            return False, f"window {j} repeats a symbol: {symbols}"
        if window in seen:
            first = seen[window]
            return False, f"window {j} equals window {first}: {sorted(window)}"
        seen[window] = j
    return True, None


def _revolving_door_candidate(
    n: int, k: int, m: int, cyclic: bool
) -> tuple[int, ...]:
    """Departing-element sequence read off the revolving-door listing."""
    listing = [set(s.elements) for s in revolving_door(n, k)]
    if cyclic:
        return tuple(
            min((listing[j] - listing[(j + 1) % m]) or listing[j]) for j in range(m)
        )
    symbols = [min(listing[j] - listing[j + 1]) for j in range(m - 1)]
    entered: dict[int, int] = {x: -1 for x in listing[0]}
    for j in range(1, m):
        for x in listing[j] - listing[j - 1]:
            entered[x] = j
    symbols.extend(sorted(listing[m - 1], key=lambda x: (entered.get(x, -1), x)))
    return tuple(symbols)


def _closes_cycle(symbols: list[int], k: int, used: set[frozenset[int]]) -> bool:
    """Check the k-1 wrap-around windows of a complete cyclic sequence."""
    m = len(symbols)
    closing: set[frozenset[int]] = set()
    for start in range(m - k + 1, m):
        window = frozenset(symbols[(start + i) % m] for i in range(k))
        if len(window) < k or window in used or window in closing:
            return False
        closing.add(window)
    return True


def _search_window_sequence(
    n: int, k: int, m: int, cyclic: bool, budget: int
) -> tuple[tuple[int, ...] | None, int]:
    """Depth-first search; returns (symbols or None, expansions used).

    The first window is fixed to 1..k; relabelling nodes (and rotating a cyclic
    sequence) maps any solution onto one with that prefix.
    """
    target_len = m if cyclic else m + k - 1
    symbols = list(range(1, k + 1))
    used = {frozenset(symbols)}
    if len(symbols) == target_len:
        if not cyclic or _closes_cycle(symbols, k, used):
            return tuple(symbols), 0
        return None, 0

    expansions = 0
    stack: list[Iterator[int]] = [iter(range(1, n + 1))]
    while stack:
        advanced = False
        for x in stack[-1]:
            expansions += 1
            if expansions > budget:
                raise BudgetExhausted(f"window search n={n} k={k} m={m}", budget)
            tail = symbols[len(symbols) - (k - 1) :] if k > 1 else []
            if x in tail:
                continue
            window = frozenset(tail + [x])
            if window in used:
                continue
            symbols.append(x)
            used.add(window)
            if len(symbols) == target_len:
                if not cyclic or _closes_cycle(symbols, k, used):
                    return tuple(symbols), expansions
                used.discard(window)
                symbols.pop()
                continue
            stack.append(iter(range(1, n + 1)))
            advanced = True
            break
        if not advanced:
            stack.pop()
            if stack:
                used.discard(frozenset(symbols[-k:]))
                symbols.pop()
    return None, expansions


def cyclic_obstruction(n: int, k: int) -> str | None:
    """Counting certificate ruling out a cyclic sequence over all k-subsets."""
    per_symbol = binomial(n - 1, k - 1)
    if per_symbol % k:
        return (
            f"each node lies in C({n - 1},{k - 1})={per_symbol} windows but every "
            f"occurrence covers exactly {k}, and {k} does not divide {per_symbol}"
        )
    return None


def window_sequence(
    n: int,
    k: int,
    m: int,
    cyclic: bool,
    budget: int = DEFAULT_SEARCH_BUDGET,
    precheck: bool = True,
) -> WindowSequence:
    """Build a sequence whose m width-k windows are distinct k-subsets of [n]."""
    if not 1 <= k <= n:
        raise ValueError(f"window_sequence needs 1 <= k <= n; got n={n} k={k}")
    total = binomial(n, k)
    if not 1 <= m <= total:
        raise ValueError(f"need 1 <= m <= C({n},{k})={total}; got m={m}")
    if cyclic and m != total:
        raise ValueError(f"cyclic sequences cover all C({n},{k})={total} subsets")

    LOGGER.info(
        "event=window_search_started n=%s k=%s m=%s cyclic=%s budget=%s",
        n,
        k,
        m,
        cyclic,
        budget,
    )
    if cyclic and m < k:
        raise Infeasible(n, k, m, cyclic, f"a cycle of length {m} < {k} repeats nodes")
    if cyclic and precheck:
        certificate = cyclic_obstruction(n, k)
        if certificate is not None:
            LOGGER.info(
                "event=window_search_infeasible reason=divisibility n=%s k=%s", n, k
            )
            raise Infeasible(n, k, m, cyclic, certificate)

    candidate = WindowSequence(_revolving_door_candidate(n, k, m, cyclic), k, cyclic)
    ok, violation = verify_window_property(candidate)
    if ok:
        LOGGER.info(
            "event=window_search_finished source=revolving_door n=%s k=%s", n, k
        )
        return candidate
    LOGGER.info("event=revolving_door_candidate_rejected violation=%r", violation)

    symbols, expansions = _search_window_sequence(n, k, m, cyclic, budget)
    if symbols is None:
        LOGGER.info(
            "event=window_search_infeasible reason=exhausted expansions=%s", expansions
        )
        raise Infeasible(
            n,
            k,
            m,
            cyclic,
            f"exhaustive search found no sequence after {expansions} expansions",
        )
    found = WindowSequence(symbols, k, cyclic)
    ok, violation = verify_window_property(found)
    if not ok:
        raise AssertionError(f"search produced an invalid sequence: {violation}")
    LOGGER.info(
        "event=window_search_finished source=backtracking expansions=%s", expansions
    )
    return found
