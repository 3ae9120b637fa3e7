"""Communication-optimal access structures.

Solves min sum k*a_k subject to sum a_k = m and the LYM inequality, both in
closed form (exact rationals) and by exhaustive search, and turns size profiles
into concrete Sperner families.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from src.combinatorics import KSubset, binomial
from src.toolkit_config import (
    DEFAULT_SEARCH_BUDGET,
    LOGGER,
    BudgetExhausted,
    DsspError,
)

# Above this many users check_appendix_lemmas samples m instead of sweeping.
FULL_SWEEP_LIMIT = 2000
SAMPLED_M_VALUES = 500


class InfeasibleUserCount(DsspError, ValueError):
    """Raised when m exceeds the Sperner bound C(n, floor(n/2))."""

    def __init__(self, n: int, m: int):
        limit = max_users(n)
        super().__init__(f"m={m} users exceeds the maximum {limit} for n={n} nodes")
        self.n = n
        self.m = m
        self.limit = limit


class Unrealizable(DsspError):
    """Raised when no Sperner family has the requested size profile."""

    def __init__(self, n: int, profile: dict[int, int], certificate: str):
        super().__init__(f"profile {profile} over [{n}] is unrealizable: {certificate}")
        self.n = n
        self.profile = dict(profile)
        self.certificate = certificate


class NotSperner(DsspError, ValueError):
    """Raised when one access set contains another."""

    def __init__(
        self, inner_user: int, outer_user: int, inner: KSubset, outer: KSubset
    ):
        super().__init__(
            f"access set {inner_user} {list(inner)} is contained in access set "
            f"{outer_user} {list(outer)}"
        )
        self.witness = (inner_user, outer_user)


class _SearchBudget:
    """Node-expansion allowance shared by nested searches."""

    def __init__(self, limit: int, what: str):
        self.limit = limit
        self.what = what
        self.used = 0

    def spend(self, amount: int = 1) -> None:
        self.used += amount
        if self.used > self.limit:
            raise BudgetExhausted(self.what, self.limit)


# =========================
# DATA MODELS
# =========================


@dataclass(frozen=True)
class AccessStructure:
    sets: tuple[KSubset, ...]

    @classmethod
    def from_lists(cls, sets: Iterable[Iterable[int]]) -> AccessStructure:
        return cls(tuple(KSubset.of(s) for s in sets))

    def __len__(self) -> int:
        return len(self.sets)

    def sperner_violation(self) -> tuple[int, int] | None:
        """Return the first (j, other) with sets[j] contained in sets[other]."""
        masks = [_mask(s) for s in self.sets]
        for j, inner in enumerate(masks):
            for other, outer in enumerate(masks):
                if j != other and inner & outer == inner:
                    return j, other
        return None

    def require_sperner(self) -> None:
        violation = self.sperner_violation()
        if violation is not None:
            j, other = violation
            raise NotSperner(j, other, self.sets[j], self.sets[other])

    def profile(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for s in self.sets:
            counts[len(s)] = counts.get(len(s), 0) + 1
        return dict(sorted(counts.items()))

    def total_size(self) -> int:
        return sum(len(s) for s in self.sets)

    def max_node(self) -> int:
        return max((max(s.elements) for s in self.sets if s.elements), default=0)


@dataclass(frozen=True)
class DesignSolution:
    n: int
    m: int
    i: int
    alpha_i: Fraction
    alpha_i1: Fraction
    a: dict[int, int] = field(hash=False)
    psi_star: Fraction
    c_star: int

    def lym_sum(self) -> Fraction:
        return lym_sum(self.n, self.a)


def _mask(subset: Iterable[int]) -> int:
    bits = 0
    for x in subset:
        bits |= 1 << x
    return bits


def lym_sum(n: int, profile: dict[int, int]) -> Fraction:
    return sum(
        (Fraction(count, binomial(n, k)) for k, count in profile.items()),
        Fraction(0),
    )


def max_users(n: int) -> int:
    """Largest Sperner family over [n]: C(n, floor(n/2))."""
    if n < 1:
        raise ValueError(f"need at least one storage node; got n={n}")
    return binomial(n, n // 2)


# =========================
# CLOSED FORM
# =========================


def solve_design(n: int, m: int) -> DesignSolution:
    """Closed-form continuous optimum and its integer rounding."""
    if not 1 <= m <= max_users(n):
        raise InfeasibleUserCount(n, m)

    half = max(1, n // 2)
    i = 1
    for k in range(1, half + 1):
        if binomial(n, k) <= m:
            i = k

    lower = binomial(n, i)
    if m <= lower:
        alpha_i = Fraction(m)
        alpha_i1 = Fraction(0)
    else:
        upper = binomial(n, i + 1)
        alpha_i = Fraction((upper - m) * lower, upper - lower)
        alpha_i1 = Fraction((m - lower) * upper, upper - lower)

    a_i = math.floor(alpha_i)
    a_i1 = math.ceil(alpha_i1)
    profile = {k: count for k, count in ((i, a_i), (i + 1, a_i1)) if count}
    psi_star = i * alpha_i + (i + 1) * alpha_i1
    c_star = math.ceil(psi_star)
    if c_star != sum(k * count for k, count in profile.items()):
        raise AssertionError(f"rounded profile {profile} misses ceil(psi*)={c_star}")

    return DesignSolution(
        n=n,
        m=m,
        i=i,
        alpha_i=alpha_i,
        alpha_i1=alpha_i1,
        a=profile,
        psi_star=psi_star,
        c_star=c_star,
    )


# =========================
# EXHAUSTIVE ORACLES
# =========================


def brute_force_design(
    n: int, m: int, budget: int = DEFAULT_SEARCH_BUDGET
) -> tuple[dict[int, int], int]:
    """Exhaustive minimum of sum k*a_k over integer profiles meeting LYM."""
    if not 1 <= m <= max_users(n):
        raise InfeasibleUserCount(n, m)

    sizes = list(range(1, max(1, n // 2) + 1))
    # LYM in integers: sum a_k * (L / C(n,k)) <= L.
    lcm = math.lcm(*(binomial(n, k) for k in sizes))
    weights = [lcm // binomial(n, k) for k in sizes]
    allowance = _SearchBudget(budget, f"brute_force_design n={n} m={m}")
    best: tuple[int, list[int]] | None = None

    def explore(index: int, remaining: int, capacity: int, chosen: list[int]) -> None:
        nonlocal best
        allowance.spend()
        k = sizes[index]
        limit = binomial(n, k)
        if index == len(sizes) - 1:
            if remaining <= limit and remaining * weights[index] <= capacity:
                profile = chosen + [remaining]
                cost = sum(
                    size * count for size, count in zip(sizes, profile, strict=True)
                )
                if best is None or cost < best[0]:
                    best = (cost, profile)
            return
        top = min(remaining, limit, capacity // weights[index])
        for count in range(top + 1):
            explore(
                index + 1,
                remaining - count,
                capacity - count * weights[index],
                chosen + [count],
            )

    explore(0, m, lcm, [])
    if best is None:
        raise InfeasibleUserCount(n, m)
    cost, counts = best
    return {k: c for k, c in zip(sizes, counts, strict=True) if c}, cost


def _colex(n: int, k: int) -> list[int]:
    """k-subsets of [n] as bitmasks in colexicographic order."""
    subsets = sorted(combinations(range(1, n + 1), k), key=lambda s: s[::-1])
    return [_mask(s) for s in subsets]


def _lex(n: int, k: int) -> list[int]:
    return [_mask(s) for s in combinations(range(1, n + 1), k)]


def _unmask(bits: int) -> KSubset:
    return KSubset(tuple(x for x in range(1, bits.bit_length()) if bits >> x & 1))


def _realize(
    n: int, profile: dict[int, int], allowance: _SearchBudget
) -> list[int] | None:
    sizes = sorted((k for k, count in profile.items() if count), reverse=True)

    def free(k: int, chosen: list[int]) -> list[int]:
        order = _colex(n, k) if k == sizes[0] else _lex(n, k)
        return [s for s in order if not any(s & c == s for c in chosen)]

    # Largest size takes a colex initial segment (small shadow, Kruskal-Katona);
    # smaller sizes fill lexicographically from outside the shadow.
    greedy: list[int] = []
    for k in sizes:
        candidates = free(k, greedy)
        if len(candidates) < profile[k]:
            break
        greedy.extend(candidates[: profile[k]])
    else:
        return greedy

    def search(level: int, chosen: list[int]) -> list[int] | None:
        k = sizes[level]
        need = profile[k]
        candidates = free(k, chosen)
        allowance.spend()
        if len(candidates) < need:
            return None
        if level == len(sizes) - 1:
            return chosen + candidates[:need]
        for combo in combinations(candidates, need):
            allowance.spend()
            found = search(level + 1, chosen + list(combo))
            if found is not None:
                return found
        return None

    return search(0, [])


def realize_sperner(
    n: int, profile: dict[int, int], budget: int = DEFAULT_SEARCH_BUDGET
) -> AccessStructure:
    """A Sperner family over [n] with exactly profile[k] sets of size k."""
    return _realize_with(n, profile, _SearchBudget(budget, f"realize_sperner n={n}"))


def _realize_with(
    n: int, profile: dict[int, int], allowance: _SearchBudget
) -> AccessStructure:
    if any(k < 1 or k > n or count < 0 for k, count in profile.items()):
        raise ValueError(f"profile {profile} has sizes outside 1..{n}")
    if lym_sum(n, profile) > 1:
        raise Unrealizable(n, profile, "violates the LYM inequality")
    before = allowance.used
    family = _realize(n, profile, allowance)
    if family is None:
        LOGGER.info(
            "event=sperner_unrealizable n=%s profile=%s expansions=%s",
            n,
            profile,
            allowance.used - before,
        )
        raise Unrealizable(
            n,
            profile,
            f"exhaustive search over {allowance.used - before} choices found no family",
        )
    structure = AccessStructure(tuple(_unmask(bits) for bits in family))
    structure.require_sperner()
    return structure


def _profiles_with_cost(n: int, m: int, cost: int) -> Iterator[dict[int, int]]:
    """Profiles over sizes 1..n with m sets, total size cost and LYM <= 1."""

    def extend(k: int, users: int, budget: int, chosen: dict[int, int]):
        if users == 0:
            if budget == 0 and lym_sum(n, chosen) <= 1:
                yield dict(chosen)
            return
        if k > n or budget < users * k:
            return
        top = min(users, binomial(n, k), budget // k)
        for count in range(top, -1, -1):
            if count:
                chosen[k] = count
            yield from extend(k + 1, users - count, budget - count * k, chosen)
            chosen.pop(k, None)

    yield from extend(1, m, cost, {})


def achievable_min_C(
    n: int, m: int, budget: int = DEFAULT_SEARCH_BUDGET
) -> tuple[int, AccessStructure]:
    """Smallest total access-set size over realizable families, with a witness."""
    solution = solve_design(n, m)
    allowance = _SearchBudget(budget, f"achievable_min_C n={n} m={m}")
    cost = solution.c_star
    while True:
        for profile in _profiles_with_cost(n, m, cost):
            allowance.spend()
            try:
                structure = _realize_with(n, profile, allowance)
            except Unrealizable:
                continue
            LOGGER.info(
                "event=achievable_min_found n=%s m=%s c_star=%s achieved=%s",
                n,
                m,
                solution.c_star,
                cost,
            )
            return cost, structure
        cost += 1


@dataclass(frozen=True)
class AccessDesign:
    solution: DesignSolution
    structure: AccessStructure
    realized_optimum: bool

    @property
    def total_size(self) -> int:
        return self.structure.total_size()


def design_access_structure(
    n: int, m: int, budget: int = DEFAULT_SEARCH_BUDGET
) -> AccessDesign:
    """Realize the optimal profile, falling back to the achievable minimum."""
    solution = solve_design(n, m)
    try:
        structure = realize_sperner(n, solution.a, budget)
        return AccessDesign(solution, structure, realized_optimum=True)
    except Unrealizable as exc:
        LOGGER.info("event=design_fallback n=%s m=%s reason=%r", n, m, exc.certificate)
    _, structure = achievable_min_C(n, m, budget)
    return AccessDesign(solution, structure, realized_optimum=False)


# =========================
# OPTIMALITY CHECKS
# =========================


@dataclass
class LemmaReport:
    n: int
    checks: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def expect(self, condition: bool, message: str) -> None:
        self.checks += 1
        if not condition:
            self.violations.append(message)


def _sampled_m_values(n: int) -> list[int]:
    limit = max_users(n)
    if limit <= FULL_SWEEP_LIMIT:
        return list(range(1, limit + 1))
    values: set[int] = set()
    for k in range(0, n // 2 + 1):
        edge = binomial(n, k)
        values.update(v for v in (edge - 1, edge, edge + 1) if 1 <= v <= limit)
    step = max(1, limit // SAMPLED_M_VALUES)
    values.update(range(1, limit + 1, step))
    return sorted(values)


def _vertex_optimum(n: int, m: int) -> tuple[Fraction, list[tuple[int, ...]]]:
    """Minimum of the continuous relaxation over its vertices, with minimizers.

    Vertices have one nonzero size (LYM slack) or two (LYM tight).
    """
    sizes = range(1, max(1, n // 2) + 1)
    candidates: list[tuple[Fraction, tuple[int, ...]]] = []
    for k in sizes:
        if m <= binomial(n, k):
            candidates.append((Fraction(k * m), (k,)))
    for k1, k2 in combinations(sizes, 2):
        c1, c2 = binomial(n, k1), binomial(n, k2)
        # alpha1 + alpha2 = m and alpha1/c1 + alpha2/c2 = 1
        alpha1 = Fraction((c2 - m) * c1, c2 - c1)
        alpha2 = m - alpha1
        if alpha1 > 0 and alpha2 > 0:
            candidates.append((k1 * alpha1 + k2 * alpha2, (k1, k2)))
    best = min(value for value, _ in candidates)
    return best, [support for value, support in candidates if value == best]


def check_appendix_lemmas(
    n: int, m_values: Iterable[int] | None = None
) -> LemmaReport:
    """Verify convexity of 1/C(n,k), slope monotonicity and the two-size optimum."""
    if n < 2:
        raise ValueError(f"check_appendix_lemmas needs n >= 2; got {n}")
    report = LemmaReport(n)
    f = [Fraction(1, binomial(n, k)) for k in range(n + 1)]
    d = [f[k + 1] - f[k] for k in range(n)]

    for k in range(n):
        closed = Fraction(2 * k - n + 1, n * binomial(n - 1, k))
        report.expect(d[k] == closed, f"d_{k}={d[k]} differs from closed form {closed}")
    for k in range(n - 1):
        report.expect(d[k] < d[k + 1], f"d_{k}={d[k]} >= d_{k + 1}={d[k + 1]}")

    def slope(k1: int, k2: int) -> Fraction:
        return (f[k2] - f[k1]) / (k2 - k1)

    for k1, k2, k3 in combinations(range(n // 2 + 1), 3):
        report.expect(
            slope(k1, k2) < slope(k2, k3),
            f"slope({k1},{k2}) >= slope({k2},{k3})",
        )

    for m in m_values if m_values is not None else _sampled_m_values(n):
        solution = solve_design(n, m)
        best, supports = _vertex_optimum(n, m)
        report.expect(
            best == solution.psi_star,
            f"m={m}: vertex optimum {best} differs from psi*={solution.psi_star}",
        )
        for support in supports:
            report.expect(
                len(support) <= 2 and support[-1] - support[0] < len(support),
                f"m={m}: optimal sizes {list(support)} are not consecutive",
            )
        report.expect(
            solution.alpha_i + solution.alpha_i1 == m,
            f"m={m}: alpha values do not sum to m",
        )
        if solution.alpha_i1:
            lower = binomial(n, solution.i)
            upper = binomial(n, solution.i + 1)
            active = solution.alpha_i / lower + solution.alpha_i1 / upper
            report.expect(active == 1, f"m={m}: LYM constraint not active ({active})")
        report.expect(solution.lym_sum() <= 1, f"m={m}: rounded profile breaks LYM")

    LOGGER.info(
        "event=design_lemma_checks n=%s checks=%s violations=%s",
        n,
        report.checks,
        len(report.violations),
    )
    return report
